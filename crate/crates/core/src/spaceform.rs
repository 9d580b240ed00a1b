//! From a hypersurface of a Lorentzian space form to its conformal invariants.
//!
//! Every field is carried as a jet at the sample point, so the covariant
//! derivatives needed downstream come out of the same arithmetic:
//!
//! | field | degree (from `u` of degree 5) |
//! |-------|------|
//! | `I`, normal | 4 |
//! | `h`, `H`, `τ`, `B` | 3 |
//! | `τ_a`, `C` | 2 |
//! | `τ_{,ab}`, `A` | 1 |

use serde::{Deserialize, Serialize};

use crate::differentiation::{jet, AmbientConstraint, DerivStrategy, Immersion, JetData};
use crate::error::{Error, Result};
use crate::geometry::{
    derivative_vec, induced_metric, jet_complement, jet_inner, second_partials, JetMat, JetVec,
    MetricJet,
};
use crate::invariants::ConformalJets;
use crate::jet::{sum, Jet};
use crate::linalg::{orthogonal_complement_unit, CausalType, Mat, Signature, SymTensor2};
use crate::Real;

/// Pipeline knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceFormOptions {
    /// Use `−e` instead of the canonical normal.
    pub flip_normal: bool,
    /// Smallest admissible `e^{2τ}`.
    pub regularity: f64,
}

impl Default for SpaceFormOptions {
    fn default() -> Self {
        SpaceFormOptions {
            flip_normal: false,
            regularity: 1e-10,
        }
    }
}

/// First and second fundamental forms at a point (chart components).
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalForms<T> {
    pub first: SymTensor2<T>,
    pub second: SymTensor2<T>,
    pub mean_curvature: T,
    pub normal: Vec<T>,
    pub epsilon: T,
}

/// `τ` with its chart gradient and `I`-covariant Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct TauData<T> {
    pub tau: T,
    pub grad: Vec<T>,
    pub hess: SymTensor2<T>,
}

impl<T: Real> TauData<T> {
    /// Gradient and Hessian in an `I`-orthonormal frame.
    pub fn in_frame(&self, frame: &Mat<T>) -> (Vec<T>, SymTensor2<T>) {
        let n = self.grad.len();
        let grad = (0..n)
            .map(|i| (0..n).fold(T::zero(), |s, a| s + frame.get(a, i) * self.grad[a]))
            .collect();
        (grad, self.hess.in_frame(frame))
    }
}

/// Pointwise conformal data in chart components.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalData<T> {
    pub tau: T,
    pub grad_tau: Vec<T>,
    pub hess_tau: SymTensor2<T>,
    pub g: SymTensor2<T>,
    pub a: SymTensor2<T>,
    pub b: SymTensor2<T>,
    pub c: Vec<T>,
}

/// Every intermediate field of the pipeline as a jet.
#[derive(Debug, Clone)]
pub struct SpaceFormJets<T> {
    pub epsilon: T,
    pub first: MetricJet<T>,
    pub second: JetMat<T>,
    pub mean: Jet<T>,
    pub normal: JetVec<T>,
    pub tau: Jet<T>,
    pub hess_tau: JetMat<T>,
    pub conformal: ConformalJets<T>,
}

/// Unit time-like normal as a jet field (also orthogonal to the position
/// vector when the ambient space is a quadric).
fn normal_field<T: Real>(
    u: &[Jet<T>],
    du: &[JetVec<T>],
    sig: Signature,
    on_quadric: bool,
) -> Result<JetVec<T>> {
    let mut span: Vec<JetVec<T>> = du.to_vec();
    if on_quadric {
        span.push(u.to_vec());
    }
    let at_point: Vec<Vec<T>> = span
        .iter()
        .map(|v| v.iter().map(Jet::value).collect())
        .collect();
    let seed = match orthogonal_complement_unit(&at_point, sig, CausalType::TimeLike) {
        Ok(v) => v,
        Err(Error::WrongCausalType { .. }) => return Err(Error::NotSpaceLike),
        Err(e) => return Err(e),
    };
    let e = jet_complement(&span, sig, &seed)?;
    if jet_inner(&e, &e, sig).value() >= T::zero() {
        return Err(Error::NotSpaceLike);
    }
    Ok(e)
}

impl<T: Real> SpaceFormJets<T> {
    pub fn new(
        u: &[Jet<T>],
        sig: Signature,
        constraint: AmbientConstraint<T>,
        options: SpaceFormOptions,
    ) -> Result<Self> {
        let epsilon = constraint
            .epsilon()
            .ok_or_else(|| Error::Unsupported("light-cone input to the space-form pipeline".into()))?;
        sig.check_len(u.len())?;
        let n = u[0].nvars();
        if n < 2 {
            return Err(Error::InvalidParameter("hypersurface dimension must be at least 2".into()));
        }
        let deg = u[0].degree();
        if deg < 2 {
            return Err(Error::InsufficientOrder { have: deg, need: 2 });
        }
        let du: Vec<JetVec<T>> = (0..n).map(|a| derivative_vec(u, a)).collect();
        let d2u = second_partials(u, n);
        let first = MetricJet::new(induced_metric(u, n, sig))?;

        let mut normal = normal_field(u, &du, sig, constraint.target().is_some())?;
        if options.flip_normal {
            normal = normal.iter().map(|c| -c).collect();
        }
        let second = JetMat::symmetric_from_fn(n, |a, b| -jet_inner(&d2u[a][b], &normal, sig));

        let shape = first.inverse().matmul(&second);
        let tr = shape.trace();
        let tr2 = shape.matmul(&shape).trace();
        let nn = T::of(n);
        let mean = tr.scale(nn.recip());
        let e2tau = (&tr2.scale(nn) - &(&tr * &tr)).scale((nn - T::one()).recip());
        if !(e2tau.value() > T::lit(options.regularity)) {
            return Err(Error::NonRegularPoint {
                value: e2tau.value().to_f64_lossy(),
            });
        }
        let tau = e2tau.ln().scale(T::lit(0.5));
        let etau = tau.exp();
        let emtau = etau.recip();

        let dtau: JetVec<T> = (0..n).map(|a| tau.derivative(a)).collect();
        let hess_tau = first.hessian(&tau);
        let iinv = first.inverse();
        let ig = first.metric();
        // τ^a raised with I
        let tau_up: JetVec<T> = (0..n)
            .map(|a| sum((0..n).map(|b| iinv.get(a, b) * &dtau[b])))
            .collect();
        let grad_sq = sum((0..n).map(|a| &tau_up[a] * &dtau[a]));
        let bracket = (&grad_sq - &(&mean * &mean)).add_scalar(-epsilon).scale(T::lit(0.5));
        let blaschke = JetMat::symmetric_from_fn(n, |a, b| {
            let t = &(&dtau[a] * &dtau[b]) - &(&mean * second.get(a, b));
            &(&t - hess_tau.get(a, b)) - &(&bracket * ig.get(a, b))
        });
        let conf_second = JetMat::symmetric_from_fn(n, |a, b| {
            &etau * &(second.get(a, b) - &(&mean * ig.get(a, b)))
        });
        let form: JetVec<T> = (0..n)
            .map(|a| {
                let h_tau = sum((0..n).map(|b| second.get(a, b) * &tau_up[b]));
                let inner = &(&(&mean * &dtau[a]) - &h_tau) - &mean.derivative(a);
                &emtau * &inner
            })
            .collect();
        let metric = MetricJet::new(ig.scale_by(&e2tau))?;

        Ok(SpaceFormJets {
            epsilon,
            first,
            second,
            mean,
            normal,
            tau,
            hess_tau,
            conformal: ConformalJets {
                metric,
                blaschke,
                second: conf_second,
                form,
            },
        })
    }

    /// Runs the pipeline on `imm` at `point` with order-5 jets.
    pub fn at(
        imm: &Immersion<T>,
        point: &[T],
        strategy: DerivStrategy<T>,
        options: SpaceFormOptions,
    ) -> Result<Self> {
        let j = jet(imm, point, 5, strategy)?;
        check_constraint(imm, &j)?;
        Self::new(j.components(), imm.ambient(), imm.constraint(), options)
    }

    pub fn fundamental_forms(&self) -> FundamentalForms<T> {
        FundamentalForms {
            first: self.first.value(),
            second: self.second.value_sym(),
            mean_curvature: self.mean.value(),
            normal: self.normal.iter().map(Jet::value).collect(),
            epsilon: self.epsilon,
        }
    }

    pub fn tau_data(&self) -> TauData<T> {
        let n = self.first.dim();
        TauData {
            tau: self.tau.value(),
            grad: (0..n).map(|a| self.tau.partial(&[a])).collect(),
            hess: self.hess_tau.value_sym(),
        }
    }

    pub fn conformal_data(&self) -> ConformalData<T> {
        let t = self.tau_data();
        ConformalData {
            tau: t.tau,
            grad_tau: t.grad,
            hess_tau: t.hess,
            g: self.conformal.metric.value(),
            a: self.conformal.blaschke.value_sym(),
            b: self.conformal.second.value_sym(),
            c: self.conformal.form.iter().map(Jet::value).collect(),
        }
    }
}

fn check_constraint<T: Real>(imm: &Immersion<T>, j: &JetData<T>) -> Result<()> {
    let r = imm.constraint().residual(&j.value(), imm.ambient());
    if r > T::lit(1e-10) {
        return Err(Error::AmbientConstraint {
            residual: r.to_f64_lossy(),
        });
    }
    Ok(())
}

/// First and second fundamental forms from a jet of order ≥ 2.
pub fn fundamental_forms<T: Real>(
    data: &JetData<T>,
    sig: Signature,
    constraint: AmbientConstraint<T>,
) -> Result<FundamentalForms<T>> {
    let u: Vec<Jet<T>> = data.components().iter().map(|c| c.truncate(2)).collect();
    if data.order() < 2 {
        return Err(Error::InsufficientOrder {
            have: data.order(),
            need: 2,
        });
    }
    let n = data.point().len();
    let epsilon = constraint
        .epsilon()
        .ok_or_else(|| Error::Unsupported("light-cone input to the space-form pipeline".into()))?;
    let du: Vec<JetVec<T>> = (0..n).map(|a| derivative_vec(&u, a)).collect();
    let first = SymTensor2::from_fn(n, |a, b| jet_inner(&du[a], &du[b], sig).value());
    first.to_mat().cholesky()?;
    let normal: Vec<T> = normal_field(&u, &du, sig, constraint.target().is_some())?
        .iter()
        .map(Jet::value)
        .collect();
    let second = SymTensor2::from_fn(n, |a, b| {
        -crate::linalg::inner(&data.partial(&[a, b]), &normal, sig).unwrap()
    });
    let iinv = first.to_mat().inverse()?;
    let shape = iinv.matmul(&second.to_mat());
    let mean = (0..n).fold(T::zero(), |s, i| s + shape.get(i, i)) / T::of(n);
    Ok(FundamentalForms {
        first,
        second,
        mean_curvature: mean,
        normal,
        epsilon,
    })
}

/// `e^{2τ} = (n·tr(S²) − (tr S)²)/(n − 1)` with `S = I⁻¹h`.
pub fn conformal_factor<T: Real>(ff: &FundamentalForms<T>, regularity: T) -> Result<T> {
    let n = ff.first.dim();
    let s = ff.first.to_mat().inverse()?.matmul(&ff.second.to_mat());
    let s2 = s.matmul(&s);
    let tr = (0..n).fold(T::zero(), |a, i| a + s.get(i, i));
    let tr2 = (0..n).fold(T::zero(), |a, i| a + s2.get(i, i));
    let v = (T::of(n) * tr2 - tr * tr) / T::of(n - 1);
    if !(v > regularity) {
        return Err(Error::NonRegularPoint {
            value: v.to_f64_lossy(),
        });
    }
    Ok(v)
}

/// `τ`, `τ_i` and the `I`-covariant Hessian `τ_{,ij}` at `point`.
pub fn tau_field<T: Real>(
    imm: &Immersion<T>,
    point: &[T],
    strategy: DerivStrategy<T>,
) -> Result<TauData<T>> {
    Ok(SpaceFormJets::at(imm, point, strategy, SpaceFormOptions::default())?.tau_data())
}

/// `A_{ij} = τ_iτ_j − H h_{ij} − τ_{,ij} − ½(|∇τ|² − H² − ε) I_{ij}`.
pub fn blaschke_tensor<T: Real>(
    ff: &FundamentalForms<T>,
    tau: &TauData<T>,
) -> Result<SymTensor2<T>> {
    let n = ff.first.dim();
    let iinv = ff.first.to_mat().inverse()?;
    let up = iinv.matvec(&tau.grad);
    let grad_sq = up.iter().zip(&tau.grad).fold(T::zero(), |s, (&a, &b)| s + a * b);
    let h = ff.mean_curvature;
    let bracket = (grad_sq - h * h - ff.epsilon) * T::lit(0.5);
    Ok(SymTensor2::from_fn(n, |i, j| {
        tau.grad[i] * tau.grad[j] - h * ff.second.get(i, j) - tau.hess.get(i, j)
            - bracket * ff.first.get(i, j)
    }))
}

/// `B_{ij} = e^τ (h_{ij} − H I_{ij})`.
pub fn conformal_second_ff<T: Real>(ff: &FundamentalForms<T>, tau: T) -> SymTensor2<T> {
    let n = ff.first.dim();
    let et = tau.exp();
    SymTensor2::from_fn(n, |i, j| {
        et * (ff.second.get(i, j) - ff.mean_curvature * ff.first.get(i, j))
    })
}

/// `C_i = e^{−τ}(H τ_i − h_{ij} τ^j − H_i)`.
pub fn conformal_form<T: Real>(
    ff: &FundamentalForms<T>,
    tau: &TauData<T>,
    grad_mean: &[T],
) -> Result<Vec<T>> {
    let n = ff.first.dim();
    let up = ff.first.to_mat().inverse()?.matvec(&tau.grad);
    let emt = (-tau.tau).exp();
    Ok((0..n)
        .map(|i| {
            let h_tau = (0..n).fold(T::zero(), |s, j| s + ff.second.get(i, j) * up[j]);
            emt * (ff.mean_curvature * tau.grad[i] - h_tau - grad_mean[i])
        })
        .collect())
}

/// `Δu = g^{ij}(∂_i∂_j u − Γ^k_{ij} ∂_k u)` for the metric induced by `u`
/// itself (pass the jets of `u` of order ≥ 2).
pub fn laplacian_of_immersion<T: Real>(u: &[Jet<T>], sig: Signature) -> Result<Vec<T>> {
    let n = u[0].nvars();
    let metric = MetricJet::new(induced_metric(u, n, sig))?;
    Ok(metric.laplacian(u).iter().map(Jet::value).collect())
}
