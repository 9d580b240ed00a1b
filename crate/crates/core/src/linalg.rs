//! Signature-aware dense linear algebra.
//!
//! Everything here is small and dense: induced metrics have dimension `n ≤ 32`
//! and ambient spaces `n + 3`. Generalized symmetric eigenproblems `T x = λ g x`
//! are reduced by a Cholesky factor of `g` and solved with cyclic Jacobi
//! rotations, which keeps the eigenbasis `g`-orthonormal by construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Real;

/// Pseudo-Euclidean signature of `ℝ^N_s`: the first `s` basis vectors have
/// square norm `-1`, the remaining `N - s` have `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    total_dim: usize,
    time_index: usize,
}

impl Signature {
    pub fn new(total_dim: usize, time_index: usize) -> Result<Self> {
        if total_dim == 0 || time_index > total_dim {
            return Err(Error::InvalidParameter(format!(
                "signature (N={total_dim}, s={time_index})"
            )));
        }
        Ok(Signature {
            total_dim,
            time_index,
        })
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    /// `⟨e_i, e_i⟩`.
    pub fn sign<T: Real>(&self, i: usize) -> T {
        if i < self.time_index {
            -T::one()
        } else {
            T::one()
        }
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.total_dim {
            return Err(Error::DimensionMismatch {
                expected: self.total_dim,
                found: len,
            });
        }
        Ok(())
    }
}

/// `⟨ξ, η⟩ = -Σ_{i<s} x_i y_i + Σ_{i≥s} x_i y_i`.
pub fn inner<T: Real>(xi: &[T], eta: &[T], sig: Signature) -> Result<T> {
    sig.check_len(xi.len())?;
    sig.check_len(eta.len())?;
    Ok(inner_unchecked(xi, eta, sig))
}

pub(crate) fn inner_unchecked<T: Real>(xi: &[T], eta: &[T], sig: Signature) -> T {
    let s = sig.time_index;
    let time: T = xi[..s]
        .iter()
        .zip(&eta[..s])
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y);
    let space: T = xi[s..]
        .iter()
        .zip(&eta[s..])
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y);
    space - time
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn diag(values: &[T]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| acc + self.get(i, k) * other.get(k, j))
        })
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(T::zero(), |acc, k| acc + self.get(i, k) * v[k]))
            .collect()
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - other.get(i, j))
    }

    /// Lower-triangular `L` with `L Lᵀ = self`.
    pub fn cholesky(&self) -> Result<Self> {
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        let scale = (0..n).fold(T::zero(), |acc, i| acc.max(self.get(i, i).abs()));
        let floor = scale * T::epsilon() * T::of(n.max(1) * 16);
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l.get(j, k) * l.get(j, k);
            }
            if !(d > floor) {
                return Err(Error::MetricDegenerate);
            }
            let d = d.sqrt();
            l.set(j, j, d);
            for i in j + 1..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / d);
            }
        }
        Ok(l)
    }

    /// Inverse of a lower-triangular matrix.
    pub fn lower_inverse(&self) -> Self {
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        for j in 0..n {
            inv.set(j, j, self.get(j, j).recip());
            for i in j + 1..n {
                let mut s = T::zero();
                for k in j..i {
                    s += self.get(i, k) * inv.get(k, j);
                }
                inv.set(i, j, -s / self.get(i, i));
            }
        }
        inv
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a.get(x, col).abs().partial_cmp(&a.get(y, col).abs()).unwrap())
                .unwrap();
            if !(a.get(piv, col).abs() > scale * T::epsilon() * T::of(n * 4)) {
                return Err(Error::DegenerateComplement);
            }
            for j in 0..n {
                a.data.swap(col * n + j, piv * n + j);
                inv.data.swap(col * n + j, piv * n + j);
            }
            let p = a.get(col, col);
            for j in 0..n {
                a.set(col, j, a.get(col, j) / p);
                inv.set(col, j, inv.get(col, j) / p);
            }
            for i in 0..n {
                if i != col {
                    let f = a.get(i, col);
                    if f != T::zero() {
                        for j in 0..n {
                            a.set(i, j, a.get(i, j) - f * a.get(col, j));
                            inv.set(i, j, inv.get(i, j) - f * inv.get(col, j));
                        }
                    }
                }
            }
        }
        Ok(inv)
    }
}

/// Components of a symmetric (0,2) tensor. Only the upper triangle is stored,
/// so `get(i, j) == get(j, i)` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor2<T> {
    dim: usize,
    packed: Vec<T>,
}

impl<T: Real> SymTensor2<T> {
    fn slot(dim: usize, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * dim - i * (i + 1) / 2 + j
    }

    /// Builds from `f(i, j)` evaluated on the upper triangle only.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut packed = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                packed.push(f(i, j));
            }
        }
        SymTensor2 { dim, packed }
    }

    /// Symmetrizes `(m + mᵀ)/2`.
    pub fn from_mat(m: &Mat<T>) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(m.rows(), |i, j| half * (m.get(i, j) + m.get(j, i)))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diag(values: &[T]) -> Self {
        Self::from_fn(values.len(), |i, j| if i == j { values[i] } else { T::zero() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.packed[Self::slot(self.dim, i, j)]
    }

    pub fn to_mat(&self) -> Mat<T> {
        Mat::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn scale(&self, s: T) -> Self {
        SymTensor2 {
            dim: self.dim,
            packed: self.packed.iter().map(|&x| x * s).collect(),
        }
    }

    /// Components `Eᵀ T E` in the frame given by the columns of `frame`.
    pub fn in_frame(&self, frame: &Mat<T>) -> Self {
        Self::from_mat(&frame.transpose().matmul(&self.to_mat()).matmul(frame))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.packed
            .iter()
            .zip(&other.packed)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }

    pub fn trace(&self) -> T {
        (0..self.dim).fold(T::zero(), |acc, i| acc + self.get(i, i))
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns ascending eigenvalues and the orthonormal eigenvectors as columns.
pub fn symmetric_eigen<T: Real>(a: &Mat<T>) -> (Vec<T>, Mat<T>) {
    let n = a.rows();
    let mut m = a.clone();
    let mut v = Mat::identity(n);
    let tiny = T::min_positive_value();
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off += m.get(i, j) * m.get(i, j);
            }
        }
        let diag_norm = (0..n).fold(T::zero(), |acc, i| acc + m.get(i, i) * m.get(i, i));
        if off <= T::epsilon() * T::epsilon() * diag_norm * T::lit(1e-4) || off <= tiny {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq.abs() <= tiny {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let t = if theta == T::zero() { T::one() } else { t };
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).partial_cmp(&m.get(j, j)).unwrap());
    let values = order.iter().map(|&i| m.get(i, i)).collect();
    let vectors = Mat::from_fn(n, n, |r, c| v.get(r, order[c]));
    (values, vectors)
}

/// Eigenpairs of the `g`-self-adjoint operator `T♯ = g⁻¹T`.
#[derive(Debug, Clone)]
pub struct Eigen<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// Columns form a `g`-orthonormal eigenbasis.
    pub vectors: Mat<T>,
}

/// Solves `T x = λ g x` for symmetric `T` and positive definite `g`.
pub fn generalized_eigen<T: Real>(t: &SymTensor2<T>, g: &SymTensor2<T>) -> Result<Eigen<T>> {
    if t.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: t.dim(),
        });
    }
    let l = g.to_mat().cholesky()?;
    let linv = l.lower_inverse();
    let reduced = SymTensor2::from_mat(&linv.matmul(&t.to_mat()).matmul(&linv.transpose()));
    let (values, w) = symmetric_eigen(&reduced.to_mat());
    let vectors = linv.transpose().matmul(&w);
    Ok(Eigen { values, vectors })
}

/// A group of numerically coincident eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
    pub spread: f64,
}

/// Eigenvalues grouped into distinct clusters at a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenClusterSet {
    pub clusters: Vec<Cluster>,
    pub tolerance: f64,
}

impl EigenClusterSet {
    pub fn count(&self) -> usize {
        self.clusters.len()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.multiplicity).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.value).collect()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).sum()
    }
}

/// Single-linkage clustering of `values` at tolerance `tol`.
///
/// Sorted values whose gap is at most `tol` are chained into one cluster. A
/// chain wider than `tol`, or two clusters closer than `2·tol`, is ambiguous.
pub fn cluster<T: Real>(values: &[T], tol: T) -> Result<EigenClusterSet> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter("cluster tolerance must be positive".into()));
    }
    let mut sorted: Vec<f64> = values.iter().map(|v| v.to_f64_lossy()).collect();
    if sorted.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = tol.to_f64_lossy();

    let mut groups: Vec<Vec<f64>> = Vec::new();
    for v in sorted {
        match groups.last_mut() {
            Some(g) if v - *g.last().unwrap() <= tol => g.push(v),
            _ => groups.push(vec![v]),
        }
    }
    let clusters: Vec<Cluster> = groups
        .iter()
        .map(|g| Cluster {
            value: g.iter().sum::<f64>() / g.len() as f64,
            multiplicity: g.len(),
            spread: g.last().unwrap() - g[0],
        })
        .collect();
    for c in &clusters {
        if c.spread > tol {
            return Err(Error::ClusterAmbiguity { gap: c.spread });
        }
    }
    for w in clusters.windows(2) {
        let gap = w[1].value - w[0].value;
        if gap <= 2.0 * tol {
            return Err(Error::ClusterAmbiguity { gap });
        }
    }
    Ok(EigenClusterSet {
        clusters,
        tolerance: tol,
    })
}

/// Eigen-decomposition of `T` relative to `g` together with its clustering.
pub fn self_adjoint_eigen<T: Real>(
    t: &SymTensor2<T>,
    g: &SymTensor2<T>,
    tol: T,
) -> Result<(EigenClusterSet, Eigen<T>)> {
    let eig = generalized_eigen(t, g)?;
    let set = cluster(&eig.values, tol)?;
    Ok((set, eig))
}

/// Requested causal character of a one-dimensional orthogonal complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalType {
    TimeLike,
    SpaceLike,
    /// Time-like complement of a frame whose first two vectors form a null
    /// pair (a light-cone point and its null partner).
    NullPair,
}

/// Unit vector spanning the orthogonal complement of `vectors` in `ℝ^N_s`.
///
/// Requires exactly `N - 1` independent inputs. The result is normalized to
/// `⟨v, v⟩ = -1` (time-like) or `+1` (space-like), with its first nonzero
/// coordinate positive.
pub fn orthogonal_complement_unit<T: Real>(
    vectors: &[Vec<T>],
    sig: Signature,
    causal: CausalType,
) -> Result<Vec<T>> {
    let n = sig.total_dim();
    if vectors.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            found: vectors.len(),
        });
    }
    for v in vectors {
        sig.check_len(v.len())?;
    }
    if causal == CausalType::NullPair {
        let tol = T::lit(1e-8);
        let (a, b) = (&vectors[0], &vectors[1]);
        let ab = inner_unchecked(a, b, sig);
        if inner_unchecked(a, a, sig).abs() > tol
            || inner_unchecked(b, b, sig).abs() > tol
            || ab.abs() <= tol
        {
            return Err(Error::DegenerateComplement);
        }
    }
    let v = complement_raw(vectors, sig)?;
    let norm = inner_unchecked(&v, &v, sig);
    let want_negative = causal != CausalType::SpaceLike;
    if (norm < T::zero()) != want_negative || norm.abs() <= T::lit(1e-12) {
        return Err(Error::WrongCausalType {
            norm: norm.to_f64_lossy(),
        });
    }
    let s = norm.abs().sqrt();
    let mut out: Vec<T> = v.iter().map(|&x| x / s).collect();
    let scale = out.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    if let Some(first) = out.iter().find(|x| x.abs() > scale * T::lit(1e-10)) {
        if *first < T::zero() {
            out.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(out)
}

/// Unnormalized complement: projection of the best coordinate axis off the span.
pub(crate) fn complement_raw<T: Real>(vectors: &[Vec<T>], sig: Signature) -> Result<Vec<T>> {
    let m = vectors.len();
    let n = sig.total_dim();
    let gram = Mat::from_fn(m, m, |a, b| inner_unchecked(&vectors[a], &vectors[b], sig));
    let scale = vectors
        .iter()
        .flat_map(|v| v.iter())
        .fold(T::zero(), |acc, x| acc.max(x.abs()));
    let ginv = gram.inverse()?;
    let mut best: Option<(T, Vec<T>)> = None;
    for axis in 0..n {
        let mut w = vec![T::zero(); n];
        w[axis] = T::one();
        let proj: Vec<T> = (0..m).map(|b| inner_unchecked(&vectors[b], &w, sig)).collect();
        let coef = ginv.matvec(&proj);
        for (a, &c) in coef.iter().enumerate() {
            for k in 0..n {
                w[k] -= c * vectors[a][k];
            }
        }
        let e = w.iter().fold(T::zero(), |acc, x| acc + *x * *x);
        if best.as_ref().map_or(true, |(b, _)| e > *b) {
            best = Some((e, w));
        }
    }
    let (e, w) = best.unwrap();
    if !(e.sqrt() > T::lit(1e-10) * scale.max(T::one()).recip()) {
        return Err(Error::DegenerateComplement);
    }
    Ok(w)
}
