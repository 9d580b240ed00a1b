//! Light-cone pipeline.
//!
//! A hypersurface of the conformal space is represented by a null immersion
//! `y` into `ℝ^{n+3}_2` with `⟨dy, dy⟩ = g`. Completing `{y, ∂y}` to the frame
//! `{y, N, ∂y, ξ}` and contracting the `g`-covariant Hessian of `y` against
//! `N` and `ξ` yields `A` and `B`; `C` comes from `⟨∂ξ, N⟩`.

use crate::differentiation::{jet, AmbientConstraint, DerivStrategy, Immersion, Parametrization};
use crate::error::{Error, Result};
use crate::geometry::{derivative_vec, induced_metric, jet_complement, jet_inner, JetMat, JetVec, MetricJet};
use crate::invariants::{ConformalJets, PointInvariants};
use crate::jet::{sum, Jet};
use crate::linalg::{inner_unchecked, orthogonal_complement_unit, CausalType, Mat, Signature};
use crate::spaceform::{SpaceFormJets, SpaceFormOptions};
use crate::Real;

// Orientation of the extracted invariants relative to the space-form
// pipeline, fixed once on the flat cylinder (A, B) and a generic graph (C).
const SIGN_A: f64 = 1.0;
const SIGN_B: f64 = -1.0;
const SIGN_C: f64 = -1.0;

/// Tolerance on `|⟨y, y⟩|` for direct light-cone input.
pub const NULL_TOL: f64 = 1e-8;
/// Tolerance on `|B|² − (n−1)/n` separating canonical lifts from rescaled ones.
pub const CANONICAL_TOL: f64 = 1e-3;

/// Signature of the conformal ambient space for hypersurface dimension `n`.
pub fn conformal_signature(n: usize) -> Signature {
    Signature::new(n + 3, 2).expect("valid signature")
}

/// Standard null embedding of a space form into `ℝ^{n+3}_2`, applied to
/// jets. Time coordinates come first.
pub fn null_embedding<T: Real>(u: &[Jet<T>], sig: Signature, constraint: AmbientConstraint<T>) -> Result<JetVec<T>> {
    match constraint {
        AmbientConstraint::None => {
            let q = jet_inner(u, u, sig);
            let half = T::lit(0.5);
            let mut y = Vec::with_capacity(u.len() + 2);
            y.push(q.add_scalar(T::one()).scale(half));
            y.extend(u.iter().cloned());
            y.push((-&q).add_scalar(T::one()).scale(half));
            Ok(y)
        }
        AmbientConstraint::Sphere(r) => {
            let mut y = vec![u[0].scale(T::zero()).add_scalar(r)];
            y.extend(u.iter().cloned());
            Ok(y)
        }
        AmbientConstraint::Hyperbolic(r) => {
            let mut y = u.to_vec();
            y.push(u[0].scale(T::zero()).add_scalar(r));
            Ok(y)
        }
        AmbientConstraint::LightCone => Err(Error::Unsupported("input already lies on the light cone".into())),
    }
}

/// Differential of the null embedding applied to an ambient vector `v` at `u`.
fn null_embedding_differential<T: Real>(u: &[T], v: &[T], sig: Signature, constraint: AmbientConstraint<T>) -> Vec<T> {
    match constraint {
        AmbientConstraint::Sphere(_) => std::iter::once(T::zero()).chain(v.iter().cloned()).collect(),
        AmbientConstraint::Hyperbolic(_) => v.iter().cloned().chain(std::iter::once(T::zero())).collect(),
        _ => {
            let uv = inner_unchecked(u, v, sig);
            std::iter::once(uv).chain(v.iter().cloned()).chain(std::iter::once(-uv)).collect()
        }
    }
}

/// Canonical lift `y = e^τ σ(u)` of a space-form hypersurface (as jets of
/// degree `deg(u) − 2`) together with the lifted normal, used to orient `ξ`.
pub fn canonical_lift_jets<T: Real>(
    u: &[Jet<T>],
    sig: Signature,
    constraint: AmbientConstraint<T>,
    options: SpaceFormOptions,
) -> Result<(JetVec<T>, Vec<T>)> {
    let sf = SpaceFormJets::new(u, sig, constraint, options)?;
    let deg = sf.tau.degree();
    let ut: Vec<Jet<T>> = u.iter().map(|c| c.truncate(deg)).collect();
    let sigma = null_embedding(&ut, sig, constraint)?;
    let et = sf.tau.exp();
    let y = sigma.iter().map(|c| c * &et).collect();
    let uv: Vec<T> = u.iter().map(Jet::value).collect();
    let ev: Vec<T> = sf.normal.iter().map(Jet::value).collect();
    Ok((y, null_embedding_differential(&uv, &ev, sig, constraint)))
}

/// The light-cone immersion obtained by canonically lifting `base`.
///
/// Exact jets are available to order 3 when `base` supplies order-5 jets.
pub struct CanonicalLift<T> {
    base: Immersion<T>,
    options: SpaceFormOptions,
}

impl<T: Real> CanonicalLift<T> {
    pub fn new(base: Immersion<T>, options: SpaceFormOptions) -> Result<Self> {
        if base.constraint() == AmbientConstraint::LightCone {
            return Err(Error::Unsupported("input already lies on the light cone".into()));
        }
        Ok(CanonicalLift { base, options })
    }

    /// Lifted jets and the orientation hint at `x`.
    pub fn jets_with_hint(&self, x: &[T], order: usize) -> Result<(JetVec<T>, Vec<T>)> {
        let u = self.base.exact_jet(x, (order + 2).max(2))?;
        let (y, hint) = canonical_lift_jets(&u, self.base.ambient(), self.base.constraint(), self.options)?;
        Ok((y.iter().map(|c| c.truncate(order)).collect(), hint))
    }
}

impl<T: Real> Parametrization<T> for CanonicalLift<T> {
    fn chart_dim(&self) -> usize {
        self.base.chart_dim()
    }

    fn ambient(&self) -> Signature {
        conformal_signature(self.base.chart_dim())
    }

    fn constraint(&self) -> AmbientConstraint<T> {
        AmbientConstraint::LightCone
    }

    fn domain(&self) -> &[(T, T)] {
        self.base.domain()
    }

    fn eval(&self, x: &[T]) -> Result<Vec<T>> {
        let u = match self.base.exact_jet(x, 2) {
            Ok(u) => u,
            Err(Error::MissingExactJet) => jet(&self.base, x, 2, DerivStrategy::fd())?.into_components(),
            Err(e) => return Err(e),
        };
        let (y, _) = canonical_lift_jets(&u, self.base.ambient(), self.base.constraint(), self.options)?;
        Ok(y.iter().map(Jet::value).collect())
    }

    fn exact_jet(&self, x: &[T], order: usize) -> Result<Vec<Jet<T>>> {
        if order > 3 {
            return Err(Error::InsufficientOrder { have: 3, need: order });
        }
        Ok(self.jets_with_hint(x, order)?.0)
    }
}

/// `canonical_lift` as an [`Immersion`] handle.
pub fn canonical_lift<T: Real>(base: &Immersion<T>, options: SpaceFormOptions) -> Result<Immersion<T>> {
    Ok(Immersion::new(CanonicalLift::new(base.clone(), options)?))
}

/// Moving frame at a point of a light-cone immersion.
#[derive(Debug, Clone)]
pub struct ConformalFrame<T> {
    pub y: Vec<T>,
    pub n: Vec<T>,
    /// `g`-orthonormal tangent vectors `Σ_a E^a_i ∂_a y`.
    pub tangent: Vec<Vec<T>>,
    pub xi: Vec<T>,
    pub signature: Signature,
}

impl<T: Real> ConformalFrame<T> {
    /// Largest violation among the ten normalizations of the frame.
    pub fn normalization_residual(&self) -> T {
        let s = self.signature;
        let ip = |a: &[T], b: &[T]| inner_unchecked(a, b, s);
        let mut worst = T::zero();
        let mut check = |v: T, want: T| worst = worst.max((v - want).abs());
        let (z, one) = (T::zero(), T::one());
        check(ip(&self.y, &self.y), z);
        check(ip(&self.y, &self.n), -one);
        check(ip(&self.n, &self.n), z);
        check(ip(&self.y, &self.xi), z);
        check(ip(&self.n, &self.xi), z);
        check(ip(&self.xi, &self.xi), -one);
        for (i, t) in self.tangent.iter().enumerate() {
            check(ip(&self.y, t), z);
            check(ip(&self.n, t), z);
            check(ip(&self.xi, t), z);
            for (j, u) in self.tangent.iter().enumerate() {
                check(ip(t, u), if i == j { one } else { z });
            }
        }
        worst
    }
}

/// Everything the light-cone pipeline derives from the jets of `y`.
#[derive(Debug, Clone)]
pub struct LightConeJets<T> {
    pub y: JetVec<T>,
    pub partner: JetVec<T>,
    pub xi: JetVec<T>,
    pub laplacian: JetVec<T>,
    pub signature: Signature,
    pub conformal: ConformalJets<T>,
}

impl<T: Real> LightConeJets<T> {
    /// Runs the frame construction. `hint` orients `ξ` (`⟨ξ, hint⟩ < 0`);
    /// without one the first nonzero coordinate of `ξ` is made positive.
    pub fn new(y: &[Jet<T>], sig: Signature, hint: Option<&[T]>) -> Result<Self> {
        sig.check_len(y.len())?;
        let n = y[0].nvars();
        if sig.total_dim() != n + 3 || sig.time_index() != 2 {
            return Err(Error::DimensionMismatch {
                expected: n + 3,
                found: sig.total_dim(),
            });
        }
        let deg = y[0].degree();
        if deg < 3 {
            return Err(Error::InsufficientOrder { have: deg, need: 3 });
        }
        let null = jet_inner(y, y, sig).value().abs();
        if null > T::lit(NULL_TOL) {
            return Err(Error::LiftNotNull {
                residual: null.to_f64_lossy(),
            });
        }
        let metric = MetricJet::new(induced_metric(y, n, sig))?;
        let hess = metric.vector_hessian(y);
        let lap = metric.laplacian(y);
        let nn = T::of(n);
        let lap_sq = jet_inner(&lap, &lap, sig);
        let coef = lap_sq.scale((T::lit(2.0) * nn * nn).recip());
        let partner: JetVec<T> = lap
            .iter()
            .zip(y)
            .map(|(l, yk)| &l.scale(nn.recip()) + &(&coef * yk))
            .collect();

        let dy: Vec<JetVec<T>> = (0..n).map(|a| derivative_vec(y, a)).collect();
        let mut span = vec![y.to_vec(), partner.clone()];
        span.extend(dy.iter().cloned());
        let at_point: Vec<Vec<T>> = span
            .iter()
            .map(|v| v.iter().map(Jet::value).collect())
            .collect();
        let mut seed = orthogonal_complement_unit(&at_point, sig, CausalType::NullPair)?;
        if let Some(h) = hint {
            if inner_unchecked(&seed, h, sig) > T::zero() {
                seed.iter_mut().for_each(|x| *x = -*x);
            }
        }
        let xi = jet_complement(&span, sig, &seed)?;

        let (sa, sb, sc) = (T::lit(SIGN_A), T::lit(SIGN_B), T::lit(SIGN_C));
        let blaschke = JetMat::symmetric_from_fn(n, |a, b| jet_inner(&hess[a][b], &partner, sig).scale(sa));
        let second = JetMat::symmetric_from_fn(n, |a, b| jet_inner(&hess[a][b], &xi, sig).scale(sb));
        let form = (0..n)
            .map(|a| jet_inner(&derivative_vec(&xi, a), &partner, sig).scale(sc))
            .collect();

        let out = LightConeJets {
            y: y.to_vec(),
            partner,
            xi,
            laplacian: lap,
            signature: sig,
            conformal: ConformalJets {
                metric,
                blaschke,
                second,
                form,
            },
        };
        let dev = out.canonical_residual()?;
        if dev > T::lit(CANONICAL_TOL) {
            return Err(Error::LiftNotCanonical {
                residual: dev.to_f64_lossy(),
            });
        }
        Ok(out)
    }

    /// `| |B|²_g − (n−1)/n |`, which vanishes exactly for canonical lifts.
    pub fn canonical_residual(&self) -> Result<T> {
        let n = self.conformal.dim();
        let e = self.conformal.metric.frame()?;
        let b = self.conformal.second.value_sym().in_frame(&e);
        let mut sq = T::zero();
        for i in 0..n {
            for j in 0..n {
                sq += b.get(i, j) * b.get(i, j);
            }
        }
        Ok((sq - T::of(n - 1) / T::of(n)).abs())
    }

    pub fn frame(&self) -> Result<ConformalFrame<T>> {
        let e = self.conformal.metric.frame()?;
        let n = self.conformal.dim();
        let dy: Vec<Vec<T>> = (0..n)
            .map(|a| self.y.iter().map(|c| c.partial(&[a])).collect())
            .collect();
        let tangent = (0..n)
            .map(|i| {
                (0..self.y.len())
                    .map(|k| (0..n).fold(T::zero(), |s, a| s + e.get(a, i) * dy[a][k]))
                    .collect()
            })
            .collect();
        Ok(ConformalFrame {
            y: self.y.iter().map(Jet::value).collect(),
            n: self.partner.iter().map(Jet::value).collect(),
            tangent,
            xi: self.xi.iter().map(Jet::value).collect(),
            signature: self.signature,
        })
    }
}

/// Frame of the light-cone immersion whose jets are `y` (order ≥ 3).
pub fn conformal_frame<T: Real>(y: &[Jet<T>], sig: Signature) -> Result<ConformalFrame<T>> {
    LightConeJets::new(y, sig, None)?.frame()
}

/// Light-cone pipeline applied to a space-form hypersurface through its
/// canonical lift (jets of order 3 from order-5 input).
pub fn invariants_from_spaceform_lift<T: Real>(
    imm: &Immersion<T>,
    point: &[T],
    options: SpaceFormOptions,
) -> Result<LightConeJets<T>> {
    let lift = CanonicalLift::new(imm.clone(), options)?;
    let (y, hint) = lift.jets_with_hint(point, 3)?;
    LightConeJets::new(&y, conformal_signature(imm.chart_dim()), Some(&hint))
}

/// Light-cone pipeline on a direct light-cone immersion.
pub fn invariants_from_lift<T: Real>(
    imm: &Immersion<T>,
    point: &[T],
    strategy: DerivStrategy<T>,
) -> Result<LightConeJets<T>> {
    if imm.constraint() != AmbientConstraint::LightCone {
        return Err(Error::Unsupported("light-cone pipeline needs a null immersion".into()));
    }
    let j = jet(imm, point, 5, strategy)?;
    LightConeJets::new(j.components(), imm.ambient(), None)
}

/// Invariants at a chart point through the pipeline matching the ambient:
/// light-cone input goes through the lift formulas, everything else through
/// the space-form formulas.
pub fn invariants_at<T: Real>(
    imm: &Immersion<T>,
    point: &[T],
    strategy: DerivStrategy<T>,
    options: SpaceFormOptions,
) -> Result<PointInvariants<T>> {
    if imm.constraint() == AmbientConstraint::LightCone {
        invariants_from_lift(imm, point, strategy)?.conformal.evaluate()
    } else {
        SpaceFormJets::at(imm, point, strategy, options)?.conformal.evaluate()
    }
}

/// Residual of the lift metric against `e^{2τ} I`.
pub fn lift_metric_residual<T: Real>(
    imm: &Immersion<T>,
    point: &[T],
    options: SpaceFormOptions,
) -> Result<T> {
    let u = imm.exact_jet(point, 5)?;
    let sf = SpaceFormJets::new(&u, imm.ambient(), imm.constraint(), options)?;
    let (y, _) = canonical_lift_jets(&u, imm.ambient(), imm.constraint(), options)?;
    let n = imm.chart_dim();
    let g = induced_metric(&y, n, conformal_signature(n)).value_sym();
    let want = sf.conformal.metric.value();
    let null = sum(std::iter::once(jet_inner(&y, &y, conformal_signature(n)))).value().abs();
    Ok(g.max_abs_diff(&want).max(null))
}

/// `g`-orthonormal tangent basis in chart coordinates, as columns.
pub fn frame_of<T: Real>(lc: &LightConeJets<T>) -> Result<Mat<T>> {
    lc.conformal.metric.frame()
}

/// Null immersion `y = (u, v)` of a product `M₁ × M₂` built from two
/// quadric immersions with opposite `⟨·,·⟩` values. Time coordinates of both
/// factors are moved to the front.
pub struct ProductLift<T> {
    u: Immersion<T>,
    v: Immersion<T>,
    domain: Vec<(T, T)>,
}

impl<T: Real> ProductLift<T> {
    pub fn new(u: Immersion<T>, v: Immersion<T>) -> Result<Self> {
        let (su, sv) = (u.ambient(), v.ambient());
        let n = u.chart_dim() + v.chart_dim();
        if su.total_dim() + sv.total_dim() != n + 3 || su.time_index() + sv.time_index() != 2 {
            return Err(Error::DimensionMismatch {
                expected: n + 3,
                found: su.total_dim() + sv.total_dim(),
            });
        }
        let cu = u.constraint().target();
        let cv = v.constraint().target();
        match (cu, cv) {
            (Some(a), Some(b)) if (a + b).abs() <= T::lit(1e-12) * (T::one() + a.abs()) => {}
            _ => {
                return Err(Error::AmbientMismatch(
                    "product factors must lie on quadrics with opposite radii".into(),
                ))
            }
        }
        let domain = u.domain().iter().chain(v.domain()).cloned().collect();
        Ok(ProductLift { u, v, domain })
    }

    fn interleave<X: Clone>(&self, a: Vec<X>, b: Vec<X>) -> Vec<X> {
        let (ta, tb) = (self.u.ambient().time_index(), self.v.ambient().time_index());
        let mut out = Vec::with_capacity(a.len() + b.len());
        out.extend_from_slice(&a[..ta]);
        out.extend_from_slice(&b[..tb]);
        out.extend_from_slice(&a[ta..]);
        out.extend_from_slice(&b[tb..]);
        out
    }
}

impl<T: Real> Parametrization<T> for ProductLift<T> {
    fn chart_dim(&self) -> usize {
        self.domain.len()
    }

    fn ambient(&self) -> Signature {
        conformal_signature(self.domain.len())
    }

    fn constraint(&self) -> AmbientConstraint<T> {
        AmbientConstraint::LightCone
    }

    fn domain(&self) -> &[(T, T)] {
        &self.domain
    }

    fn eval(&self, x: &[T]) -> Result<Vec<T>> {
        let k = self.u.chart_dim();
        Ok(self.interleave(self.u.eval(&x[..k])?, self.v.eval(&x[k..])?))
    }

    fn exact_jet(&self, x: &[T], order: usize) -> Result<Vec<Jet<T>>> {
        let k = self.u.chart_dim();
        let space = crate::jet::JetSpace::for_vars(x.len());
        let a = self.u.exact_jet(&x[..k], order)?;
        let b = self.v.exact_jet(&x[k..], order)?;
        Ok(self.interleave(
            a.iter().map(|c| c.embed(&space, 0)).collect(),
            b.iter().map(|c| c.embed(&space, k)).collect(),
        ))
    }
}
