//! Local Riemannian geometry on jet-valued tensor fields.
//!
//! A tensor "field" is represented by its truncated Taylor expansion at the
//! current chart point. Differentiating a jet lowers its degree by one, so a
//! Christoffel symbol built from a degree-`d` metric is valid to degree `d-1`,
//! the curvature to `d-2`, and so on. Results that are only needed at the
//! point itself are returned as plain scalars in a `g`-orthonormal frame.

use crate::error::{Error, Result};
use crate::jet::{sum, Jet};
use crate::linalg::{Mat, Signature, SymTensor2};
use crate::Real;

/// Ambient vector with jet components.
pub type JetVec<T> = Vec<Jet<T>>;

/// `⟨a, b⟩` for jet-valued ambient vectors.
pub fn jet_inner<T: Real>(a: &[Jet<T>], b: &[Jet<T>], sig: Signature) -> Jet<T> {
    let s = sig.time_index();
    sum(a.iter().zip(b).enumerate().map(|(i, (x, y))| {
        let p = x * y;
        if i < s {
            -p
        } else {
            p
        }
    }))
}

pub fn values<T: Real>(v: &[Jet<T>]) -> Vec<T> {
    v.iter().map(Jet::value).collect()
}

pub fn derivative_vec<T: Real>(v: &[Jet<T>], var: usize) -> JetVec<T> {
    v.iter().map(|c| c.derivative(var)).collect()
}

/// Square matrix of jets.
#[derive(Debug, Clone)]
pub struct JetMat<T> {
    n: usize,
    data: Vec<Jet<T>>,
}

impl<T: Real> JetMat<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Jet<T>) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        JetMat { n, data }
    }

    /// Symmetric matrix from its upper triangle.
    pub fn symmetric_from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Jet<T>) -> Self {
        let mut upper: Vec<Option<Jet<T>>> = vec![None; n * n];
        for i in 0..n {
            for j in i..n {
                upper[i * n + j] = Some(f(i, j));
            }
        }
        Self::from_fn(n, |i, j| {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            upper[a * n + b].clone().unwrap()
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet<T> {
        &self.data[i * self.n + j]
    }

    pub fn degree(&self) -> usize {
        self.data.iter().map(Jet::degree).min().unwrap_or(0)
    }

    pub fn value_sym(&self) -> SymTensor2<T> {
        SymTensor2::from_fn(self.n, |i, j| self.get(i, j).value())
    }

    pub fn value_mat(&self) -> Mat<T> {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j).value())
    }

    pub fn derivative(&self, var: usize) -> Self {
        JetMat {
            n: self.n,
            data: self.data.iter().map(|x| x.derivative(var)).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self::from_fn(self.n, |i, j| {
            sum((0..self.n).map(|k| self.get(i, k) * other.get(k, j)))
        })
    }

    pub fn trace(&self) -> Jet<T> {
        sum((0..self.n).map(|i| self.get(i, i).clone()))
    }

    pub fn scale_by(&self, s: &Jet<T>) -> Self {
        JetMat {
            n: self.n,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// Gauss-Jordan inverse pivoting on the magnitude of the constant terms.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a = self.data.clone();
        let space = self.data[0].space().clone();
        let deg = self.degree();
        let mut inv: Vec<Jet<T>> = (0..n * n)
            .map(|k| {
                Jet::constant(
                    &space,
                    deg,
                    if k / n == k % n { T::one() } else { T::zero() },
                )
            })
            .collect();
        let scale = a.iter().fold(T::zero(), |m, x| m.max(x.value().abs()));
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| {
                    a[x * n + col]
                        .value()
                        .abs()
                        .partial_cmp(&a[y * n + col].value().abs())
                        .unwrap()
                })
                .unwrap();
            if !(a[piv * n + col].value().abs() > scale * T::epsilon() * T::of(4 * n)) {
                return Err(Error::DegenerateComplement);
            }
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
                inv.swap(col * n + j, piv * n + j);
            }
            let p = a[col * n + col].recip();
            for j in 0..n {
                a[col * n + j] = &a[col * n + j] * &p;
                inv[col * n + j] = &inv[col * n + j] * &p;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = a[i * n + col].clone();
                for j in 0..n {
                    a[i * n + j] = &a[i * n + j] - &(&f * &a[col * n + j]);
                    inv[i * n + j] = &inv[i * n + j] - &(&f * &inv[col * n + j]);
                }
            }
        }
        Ok(JetMat { n, data: inv })
    }
}

/// Unit vector orthogonal to `vectors`, as a jet field: the constant `seed`
/// (already orthogonal at the point) is projected off the span of `vectors`
/// at every order and normalized to `|⟨v, v⟩| = 1`.
pub fn jet_complement<T: Real>(
    vectors: &[JetVec<T>],
    sig: Signature,
    seed: &[T],
) -> Result<JetVec<T>> {
    let m = vectors.len();
    let space = vectors[0][0].space().clone();
    let deg = vectors
        .iter()
        .flat_map(|v| v.iter().map(Jet::degree))
        .min()
        .unwrap();
    let gram = JetMat::symmetric_from_fn(m, |a, b| jet_inner(&vectors[a], &vectors[b], sig));
    let ginv = gram.inverse()?;
    let w: JetVec<T> = seed
        .iter()
        .map(|&x| Jet::constant(&space, deg, x))
        .collect();
    let proj: Vec<Jet<T>> = vectors.iter().map(|v| jet_inner(v, &w, sig)).collect();
    let coef: Vec<Jet<T>> = (0..m)
        .map(|a| sum((0..m).map(|b| ginv.get(a, b) * &proj[b])))
        .collect();
    let projected: JetVec<T> = (0..sig.total_dim())
        .map(|k| {
            let mut c = w[k].clone();
            for a in 0..m {
                c = &c - &(&coef[a] * &vectors[a][k]);
            }
            c
        })
        .collect();
    let norm = jet_inner(&projected, &projected, sig);
    let sign = if norm.value() < T::zero() {
        -T::one()
    } else {
        T::one()
    };
    if norm.value().abs() <= T::lit(1e-14) {
        return Err(Error::DegenerateComplement);
    }
    let inv_len = norm.scale(sign).sqrt().recip();
    Ok(projected.iter().map(|c| c * &inv_len).collect())
}

/// `g`-orthonormal frame: columns of `L⁻ᵀ` for the Cholesky factor `L` of `g`.
pub fn orthonormal_frame<T: Real>(g: &SymTensor2<T>) -> Result<Mat<T>> {
    Ok(g.to_mat().cholesky()?.lower_inverse().transpose())
}

/// Dense rank-3 array `t[i][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Tensor3<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    data.push(f(i, j, k));
                }
            }
        }
        Tensor3 { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.data[(i * self.n + j) * self.n + k]
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Components with every slot contracted against the frame columns.
    pub fn in_frame(&self, e: &Mat<T>) -> Self {
        let n = self.n;
        Self::from_fn(n, |i, j, k| {
            let mut s = T::zero();
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        s += e.get(a, i) * e.get(b, j) * e.get(c, k) * self.get(a, b, c);
                    }
                }
            }
            s
        })
    }
}

/// Dense rank-4 array.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Tensor4<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n.pow(4));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        data.push(f(i, j, k, l));
                    }
                }
            }
        }
        Tensor4 { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        self.data[((i * self.n + j) * self.n + k) * self.n + l]
    }

    pub fn in_frame(&self, e: &Mat<T>) -> Self {
        let n = self.n;
        // contract one slot at a time
        let mut cur = self.data.clone();
        for slot in 0..4 {
            let mut next = vec![T::zero(); cur.len()];
            for idx in 0..cur.len() {
                let mut digits = [0usize; 4];
                let mut r = idx;
                for d in (0..4).rev() {
                    digits[d] = r % n;
                    r /= n;
                }
                let target = digits[slot];
                let mut s = T::zero();
                for a in 0..n {
                    let mut dd = digits;
                    dd[slot] = a;
                    let src = ((dd[0] * n + dd[1]) * n + dd[2]) * n + dd[3];
                    s += e.get(a, target) * cur[src];
                }
                next[idx] = s;
            }
            cur = next;
        }
        Tensor4 { n, data: cur }
    }
}

/// Metric field expanded at a point, with its inverse and Levi-Civita symbols.
#[derive(Debug, Clone)]
pub struct MetricJet<T> {
    g: JetMat<T>,
    inv: JetMat<T>,
    // gamma[(k * n + i) * n + j] = Γ^k_{ij}
    gamma: Vec<Jet<T>>,
}

impl<T: Real> MetricJet<T> {
    /// Requires degree ≥ 1.
    pub fn new(g: JetMat<T>) -> Result<Self> {
        if g.degree() < 1 {
            return Err(Error::InsufficientOrder { have: 0, need: 1 });
        }
        g.value_mat().cholesky()?;
        let n = g.dim();
        let inv = g.inverse().map_err(|_| Error::MetricDegenerate)?;
        let dg: Vec<JetMat<T>> = (0..n).map(|a| g.derivative(a)).collect();
        let half = T::lit(0.5);
        // Γ_{d,ij} = ½(∂_i g_dj + ∂_j g_di − ∂_d g_ij)
        let lowered: Vec<Jet<T>> = {
            let mut v = Vec::with_capacity(n * n * n);
            for d in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let t = &(dg[i].get(d, j) + dg[j].get(d, i)) - dg[d].get(i, j);
                        v.push(t.scale(half));
                    }
                }
            }
            v
        };
        let mut gamma = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    gamma.push(sum((0..n).map(|d| inv.get(k, d) * &lowered[(d * n + i) * n + j])));
                }
            }
        }
        Ok(MetricJet { g, inv, gamma })
    }

    /// Metric from a closure over coordinate jets.
    pub fn from_fn(
        point: &[T],
        degree: usize,
        f: impl Fn(&[Jet<T>]) -> JetMat<T>,
    ) -> Result<Self> {
        let x = Jet::coordinates(point, degree);
        Self::new(f(&x))
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn metric(&self) -> &JetMat<T> {
        &self.g
    }

    pub fn inverse(&self) -> &JetMat<T> {
        &self.inv
    }

    pub fn value(&self) -> SymTensor2<T> {
        self.g.value_sym()
    }

    /// `Γ^k_{ij}` as a jet.
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> &Jet<T> {
        let n = self.dim();
        &self.gamma[(k * n + i) * n + j]
    }

    /// Christoffel symbols at the point, `result.get(k, i, j) = Γ^k_{ij}`.
    pub fn christoffel(&self) -> Tensor3<T> {
        Tensor3::from_fn(self.dim(), |k, i, j| self.gamma(k, i, j).value())
    }

    pub fn frame(&self) -> Result<Mat<T>> {
        orthonormal_frame(&self.value())
    }

    /// `R_{abcd}` in chart components at the point, with the convention that
    /// the round unit sphere has `R_{1212} = +1`.
    pub fn riemann_chart(&self) -> Result<Tensor4<T>> {
        let n = self.dim();
        let deg = self.gamma[0].degree();
        if deg < 1 {
            return Err(Error::InsufficientOrder {
                have: self.g.degree(),
                need: 2,
            });
        }
        // R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb}
        let gv = self.christoffel();
        let dgamma: Vec<T> = {
            let mut v = Vec::with_capacity(n.pow(4));
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            // ∂_d Γ^a_{bc}
                            v.push(self.gamma(a, b, c).partial(&[d]));
                        }
                    }
                }
            }
            v
        };
        let dg = |a: usize, b: usize, c: usize, d: usize| dgamma[((a * n + b) * n + c) * n + d];
        let up = Tensor4::from_fn(n, |a, b, c, d| {
            let mut r = dg(a, d, b, c) - dg(a, c, b, d);
            for e in 0..n {
                r += gv.get(a, c, e) * gv.get(e, d, b) - gv.get(a, d, e) * gv.get(e, c, b);
            }
            r
        });
        let g = self.value();
        Ok(Tensor4::from_fn(n, |a, b, c, d| {
            (0..n).fold(T::zero(), |s, e| s + g.get(a, e) * up.get(e, b, c, d))
        }))
    }

    /// Riemann tensor in a `g`-orthonormal frame.
    pub fn riemann(&self) -> Result<Tensor4<T>> {
        Ok(self.riemann_chart()?.in_frame(&self.frame()?))
    }

    /// `g^{ac} g^{bd} R_{abcd}`.
    pub fn scalar_curvature(&self) -> Result<T> {
        let r = self.riemann()?;
        let n = self.dim();
        let mut s = T::zero();
        for a in 0..n {
            for b in 0..n {
                s += r.get(a, b, a, b);
            }
        }
        Ok(s)
    }

    /// Covariant Hessian `∂_a∂_b f − Γ^c_{ab} ∂_c f` of a scalar jet.
    pub fn hessian(&self, f: &Jet<T>) -> JetMat<T> {
        let n = self.dim();
        let df: Vec<Jet<T>> = (0..n).map(|a| f.derivative(a)).collect();
        JetMat::symmetric_from_fn(n, |a, b| {
            let mut h = df[a].derivative(b);
            for (c, dfc) in df.iter().enumerate() {
                h = &h - &(self.gamma(c, a, b) * dfc);
            }
            h
        })
    }

    /// Covariant Hessian of each component of an ambient vector field
    /// (flat ambient connection): `∂_a∂_b y − Γ^c_{ab} ∂_c y`.
    pub fn vector_hessian(&self, y: &[Jet<T>]) -> Vec<Vec<JetVec<T>>> {
        let n = self.dim();
        let dy: Vec<JetVec<T>> = (0..n).map(|a| derivative_vec(y, a)).collect();
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        (0..y.len())
                            .map(|k| {
                                let mut h = dy[a][k].derivative(b);
                                for (c, dyc) in dy.iter().enumerate() {
                                    h = &h - &(self.gamma(c, a, b) * &dyc[k]);
                                }
                                h
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// `g^{ab}(∂_a∂_b y − Γ^c_{ab}∂_c y)` as a jet vector.
    pub fn laplacian(&self, y: &[Jet<T>]) -> JetVec<T> {
        let hess = self.vector_hessian(y);
        let n = self.dim();
        (0..y.len())
            .map(|k| {
                sum((0..n).flat_map(|a| {
                    let hess = &hess;
                    (0..n).map(move |b| self.inv.get(a, b) * &hess[a][b][k])
                }))
            })
            .collect()
    }

    /// `∇_k T_{ij}` at the point, in chart components (`get(i, j, k)`).
    pub fn covariant_derivative_sym(&self, t: &JetMat<T>) -> Result<Tensor3<T>> {
        if t.degree() < 1 {
            return Err(Error::InsufficientOrder {
                have: t.degree(),
                need: 1,
            });
        }
        let n = self.dim();
        let gv = self.christoffel();
        Ok(Tensor3::from_fn(n, |i, j, k| {
            let mut v = t.get(i, j).partial(&[k]);
            for l in 0..n {
                v -= gv.get(l, k, i) * t.get(l, j).value() + gv.get(l, k, j) * t.get(i, l).value();
            }
            v
        }))
    }

    /// `∇_j C_i` at the point for a one-form, chart components `m[i][j]`.
    pub fn covariant_derivative_form(&self, c: &[Jet<T>]) -> Result<Mat<T>> {
        let deg = c.iter().map(Jet::degree).min().unwrap_or(0);
        if deg < 1 {
            return Err(Error::InsufficientOrder { have: deg, need: 1 });
        }
        let n = self.dim();
        let gv = self.christoffel();
        Ok(Mat::from_fn(n, n, |i, j| {
            let mut v = c[i].partial(&[j]);
            for l in 0..n {
                v -= gv.get(l, j, i) * c[l].value();
            }
            v
        }))
    }
}

/// Ambient-valued second partials `∂_a∂_b y` (for an immersion of flat ambient space).
pub fn second_partials<T: Real>(y: &[Jet<T>], n: usize) -> Vec<Vec<JetVec<T>>> {
    let dy: Vec<JetVec<T>> = (0..n).map(|a| derivative_vec(y, a)).collect();
    (0..n)
        .map(|a| (0..n).map(|b| derivative_vec(&dy[a], b)).collect())
        .collect()
}

/// Induced metric `⟨∂_a y, ∂_b y⟩`.
pub fn induced_metric<T: Real>(y: &[Jet<T>], n: usize, sig: Signature) -> JetMat<T> {
    let dy: Vec<JetVec<T>> = (0..n).map(|a| derivative_vec(y, a)).collect();
    JetMat::symmetric_from_fn(n, |a, b| jet_inner(&dy[a], &dy[b], sig))
}
