//! Immersions and their derivative suppliers.
//!
//! Two strategies are offered. `Exact` asks the immersion for a Taylor jet
//! (catalog surfaces evaluate their closed form in jet arithmetic, grid files
//! supply tabulated partials). `Fd` rebuilds the same jet from point
//! evaluations with tensor-product central stencils and one Richardson step.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::{multi_factorial, Jet, JetSpace, MAX_ORDER};
use crate::linalg::{inner_unchecked, Mat, Signature};
use crate::Real;

/// Quadric the image is constrained to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmbientConstraint<T> {
    None,
    /// `⟨u,u⟩ = r²` (de Sitter space).
    Sphere(T),
    /// `⟨u,u⟩ = −r²` (anti-de Sitter space).
    Hyperbolic(T),
    /// `⟨y,y⟩ = 0`.
    LightCone,
}

impl<T: Real> AmbientConstraint<T> {
    /// Value of `⟨u,u⟩` on the quadric, if constrained.
    pub fn target(&self) -> Option<T> {
        match *self {
            AmbientConstraint::None => None,
            AmbientConstraint::Sphere(r) => Some(r * r),
            AmbientConstraint::Hyperbolic(r) => Some(-r * r),
            AmbientConstraint::LightCone => Some(T::zero()),
        }
    }

    /// Sectional curvature of the space form (`1/r²`, `0`, `−1/r²`).
    pub fn epsilon(&self) -> Option<T> {
        match *self {
            AmbientConstraint::None => Some(T::zero()),
            AmbientConstraint::Sphere(r) => Some((r * r).recip()),
            AmbientConstraint::Hyperbolic(r) => Some(-(r * r).recip()),
            AmbientConstraint::LightCone => None,
        }
    }

    pub fn residual(&self, u: &[T], sig: Signature) -> T {
        match self.target() {
            Some(c) => (inner_unchecked(u, u, sig) - c).abs(),
            None => T::zero(),
        }
    }
}

/// A chart-domain-to-ambient map.
pub trait Parametrization<T: Real>: Send + Sync {
    fn chart_dim(&self) -> usize;
    fn ambient(&self) -> Signature;
    fn constraint(&self) -> AmbientConstraint<T>;
    /// Open coordinate box on which the chart is valid.
    fn domain(&self) -> &[(T, T)];
    fn eval(&self, x: &[T]) -> Result<Vec<T>>;

    /// Taylor jet of every ambient component at `x`, to total degree `order`.
    fn exact_jet(&self, _x: &[T], _order: usize) -> Result<Vec<Jet<T>>> {
        Err(Error::MissingExactJet)
    }
}

type JetMap<T> = dyn Fn(&[Jet<T>]) -> Vec<Jet<T>> + Send + Sync;

/// Immersion given by a formula written once in jet arithmetic.
pub struct ClosedForm<T> {
    chart_dim: usize,
    ambient: Signature,
    constraint: AmbientConstraint<T>,
    domain: Vec<(T, T)>,
    map: Box<JetMap<T>>,
}

impl<T: Real> ClosedForm<T> {
    pub fn new(
        ambient: Signature,
        constraint: AmbientConstraint<T>,
        domain: Vec<(T, T)>,
        map: impl Fn(&[Jet<T>]) -> Vec<Jet<T>> + Send + Sync + 'static,
    ) -> Self {
        ClosedForm {
            chart_dim: domain.len(),
            ambient,
            constraint,
            domain,
            map: Box::new(map),
        }
    }
}

impl<T: Real> Parametrization<T> for ClosedForm<T> {
    fn chart_dim(&self) -> usize {
        self.chart_dim
    }

    fn ambient(&self) -> Signature {
        self.ambient
    }

    fn constraint(&self) -> AmbientConstraint<T> {
        self.constraint
    }

    fn domain(&self) -> &[(T, T)] {
        &self.domain
    }

    fn eval(&self, x: &[T]) -> Result<Vec<T>> {
        Ok(self.exact_jet(x, 0)?.iter().map(Jet::value).collect())
    }

    fn exact_jet(&self, x: &[T], order: usize) -> Result<Vec<Jet<T>>> {
        if x.len() != self.chart_dim {
            return Err(Error::DimensionMismatch {
                expected: self.chart_dim,
                found: x.len(),
            });
        }
        let out = (self.map)(&Jet::coordinates(x, order));
        self.ambient.check_len(out.len())?;
        Ok(out)
    }
}

/// `x ↦ M·f(x) + b`.
struct Transformed<T> {
    base: Immersion<T>,
    matrix: Mat<T>,
    shift: Vec<T>,
    constraint: AmbientConstraint<T>,
}

impl<T: Real> Transformed<T> {
    fn apply(&self, u: &[Jet<T>]) -> Vec<Jet<T>> {
        let n = self.matrix.rows();
        (0..n)
            .map(|i| {
                let mut acc = u[0].scale(self.matrix.get(i, 0));
                for (j, uj) in u.iter().enumerate().skip(1) {
                    acc = &acc + &uj.scale(self.matrix.get(i, j));
                }
                acc.add_scalar(self.shift[i])
            })
            .collect()
    }
}

impl<T: Real> Parametrization<T> for Transformed<T> {
    fn chart_dim(&self) -> usize {
        self.base.chart_dim()
    }

    fn ambient(&self) -> Signature {
        self.base.ambient()
    }

    fn constraint(&self) -> AmbientConstraint<T> {
        self.constraint
    }

    fn domain(&self) -> &[(T, T)] {
        self.base.domain()
    }

    fn eval(&self, x: &[T]) -> Result<Vec<T>> {
        let u = self.base.eval(x)?;
        let mut out = self.matrix.matvec(&u);
        for (o, s) in out.iter_mut().zip(&self.shift) {
            *o += *s;
        }
        Ok(out)
    }

    fn exact_jet(&self, x: &[T], order: usize) -> Result<Vec<Jet<T>>> {
        Ok(self.apply(&self.base.exact_jet(x, order)?))
    }
}

/// Shared handle to any parametrization.
#[derive(Clone)]
pub struct Immersion<T>(Arc<dyn Parametrization<T>>);

impl<T: Real> fmt::Debug for Immersion<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Immersion")
            .field("chart_dim", &self.chart_dim())
            .field("ambient", &self.ambient())
            .field("constraint", &self.constraint())
            .finish()
    }
}

impl<T: Real> Immersion<T> {
    pub fn new(p: impl Parametrization<T> + 'static) -> Self {
        Immersion(Arc::new(p))
    }

    pub fn closed_form(
        ambient: Signature,
        constraint: AmbientConstraint<T>,
        domain: Vec<(T, T)>,
        map: impl Fn(&[Jet<T>]) -> Vec<Jet<T>> + Send + Sync + 'static,
    ) -> Self {
        Self::new(ClosedForm::new(ambient, constraint, domain, map))
    }

    pub fn chart_dim(&self) -> usize {
        self.0.chart_dim()
    }

    pub fn ambient(&self) -> Signature {
        self.0.ambient()
    }

    pub fn constraint(&self) -> AmbientConstraint<T> {
        self.0.constraint()
    }

    pub fn domain(&self) -> &[(T, T)] {
        self.0.domain()
    }

    pub fn eval(&self, x: &[T]) -> Result<Vec<T>> {
        self.0.eval(x)
    }

    pub fn exact_jet(&self, x: &[T], order: usize) -> Result<Vec<Jet<T>>> {
        self.0.exact_jet(x, order)
    }

    /// Composition with an affine map `u ↦ M u + b`. The caller asserts that
    /// `M` preserves the constraint; a non-zero shift drops the quadric
    /// constraint, which is only meaningful in flat ambient space.
    pub fn transformed(&self, matrix: Mat<T>, shift: Vec<T>) -> Self {
        let constraint = if shift.iter().all(|s| s.is_zero()) {
            self.constraint()
        } else {
            AmbientConstraint::None
        };
        Self::new(Transformed {
            base: self.clone(),
            matrix,
            shift,
            constraint,
        })
    }

    /// Homothety `u ↦ λu` of a flat-ambient immersion.
    pub fn dilated(&self, lambda: T) -> Self {
        let n = self.ambient().total_dim();
        let constraint = match self.constraint() {
            AmbientConstraint::Sphere(r) => AmbientConstraint::Sphere(r * lambda.abs()),
            AmbientConstraint::Hyperbolic(r) => AmbientConstraint::Hyperbolic(r * lambda.abs()),
            c => c,
        };
        Self::new(Transformed {
            base: self.clone(),
            matrix: Mat::diag(&vec![lambda; n]),
            shift: vec![T::zero(); n],
            constraint,
        })
    }
}

/// How partial derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivStrategy<T> {
    Exact,
    Fd { h0: T },
}

impl<T: Real> DerivStrategy<T> {
    pub fn fd() -> Self {
        DerivStrategy::Fd { h0: T::lit(1e-2) }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, DerivStrategy::Exact)
    }
}

/// All partials of an immersion at a point up to a fixed order, stored as
/// one Taylor jet per ambient component.
#[derive(Debug, Clone)]
pub struct JetData<T> {
    point: Vec<T>,
    order: usize,
    components: Vec<Jet<T>>,
}

impl<T: Real> JetData<T> {
    pub fn new(point: Vec<T>, components: Vec<Jet<T>>) -> Result<Self> {
        let order = components.iter().map(Jet::degree).min().unwrap_or(0);
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(JetData {
            point,
            order,
            components,
        })
    }

    pub fn point(&self) -> &[T] {
        &self.point
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn components(&self) -> &[Jet<T>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Jet<T>> {
        self.components
    }

    pub fn value(&self) -> Vec<T> {
        self.components.iter().map(Jet::value).collect()
    }

    /// `∂_{axes} u`; the order of `axes` is irrelevant.
    pub fn partial(&self, axes: &[usize]) -> Vec<T> {
        self.components.iter().map(|c| c.partial(axes)).collect()
    }

    pub fn max_abs_diff(&self, other: &Self, order: usize) -> T {
        let space = self.components[0].space();
        let mut worst = T::zero();
        for (a, b) in self.components.iter().zip(&other.components) {
            for i in space.len(order.saturating_sub(1))..space.len(order) {
                let ex = space.exponent(i);
                let f = T::lit(multi_factorial(ex) as f64);
                worst = worst.max(((a.coeffs()[i] - b.coeffs()[i]) * f).abs());
            }
        }
        worst
    }
}

fn check_inside<T: Real>(domain: &[(T, T)], point: &[T], margin: T) -> Result<()> {
    if domain.len() != point.len() {
        return Err(Error::DimensionMismatch {
            expected: domain.len(),
            found: point.len(),
        });
    }
    for (axis, (&(lo, hi), &x)) in domain.iter().zip(point).enumerate() {
        if !(x > lo && x < hi) {
            return Err(Error::OutsideDomain { axis });
        }
        if x - lo < margin || hi - x < margin {
            return Err(Error::NearBoundary { axis });
        }
    }
    Ok(())
}

/// Partials of `imm` at `point` through total order `order`.
pub fn jet<T: Real>(
    imm: &Immersion<T>,
    point: &[T],
    order: usize,
    strategy: DerivStrategy<T>,
) -> Result<JetData<T>> {
    if order > MAX_ORDER {
        return Err(Error::OrderTooHigh(order));
    }
    match strategy {
        DerivStrategy::Exact => {
            check_inside(imm.domain(), point, T::zero())?;
            JetData::new(point.to_vec(), imm.exact_jet(point, order)?)
        }
        DerivStrategy::Fd { h0 } => {
            check_inside(imm.domain(), point, h0 * T::lit(5.0))?;
            let mut sampler = Sampler::new(|x: &[T]| imm.eval(x), point, h0);
            let space = JetSpace::for_vars(point.len());
            let dim = imm.ambient().total_dim();
            let mut coeffs = vec![Vec::with_capacity(space.len(order)); dim];
            for i in 0..space.len(order) {
                let ex = space.exponent(i).to_vec();
                let d = sampler.derivative(&ex)?;
                let f = T::lit(multi_factorial(&ex) as f64);
                for (c, v) in coeffs.iter_mut().zip(d) {
                    c.push(v / f);
                }
            }
            let comps = coeffs
                .into_iter()
                .map(|c| Jet::from_coeffs(&space, order, c))
                .collect();
            JetData::new(point.to_vec(), comps)
        }
    }
}

/// Finite-difference estimate of `∂_{axes} f(point)`.
pub fn fd_partial<T: Real>(
    f: impl Fn(&[T]) -> Result<Vec<T>>,
    point: &[T],
    axes: &[usize],
    h0: T,
) -> Result<Vec<T>> {
    if axes.len() > MAX_ORDER {
        return Err(Error::OrderTooHigh(axes.len()));
    }
    if !(h0 > T::zero()) {
        return Err(Error::InvalidParameter("fd step must be positive".into()));
    }
    let mut ex = vec![0u8; point.len()];
    for &a in axes {
        if a >= point.len() {
            return Err(Error::DimensionMismatch {
                expected: point.len(),
                found: a + 1,
            });
        }
        ex[a] += 1;
    }
    Sampler::new(f, point, h0).derivative(&ex)
}

/// Central stencil for the `m`-th derivative: (offset in steps, weight);
/// the result is divided by `hᵐ`. Each has an even error expansion.
fn stencil(m: u8) -> &'static [(i64, f64)] {
    match m {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        5 => &[
            (-3, -0.5),
            (-2, 2.0),
            (-1, -2.5),
            (1, 2.5),
            (2, -2.0),
            (3, 0.5),
        ],
        _ => unreachable!("order capped at five"),
    }
}

/// Memoized evaluations on the lattice `point + (h0/2)·k`.
struct Sampler<'a, T, F> {
    f: F,
    point: &'a [T],
    h0: T,
    cache: HashMap<Vec<i64>, Vec<T>>,
}

impl<'a, T: Real, F: Fn(&[T]) -> Result<Vec<T>>> Sampler<'a, T, F> {
    fn new(f: F, point: &'a [T], h0: T) -> Self {
        Sampler {
            f,
            point,
            h0,
            cache: HashMap::new(),
        }
    }

    fn at(&mut self, k: &[i64]) -> Result<Vec<T>> {
        if let Some(v) = self.cache.get(k) {
            return Ok(v.clone());
        }
        let half = self.h0 * T::lit(0.5);
        let x: Vec<T> = self
            .point
            .iter()
            .zip(k)
            .map(|(&p, &o)| p + half * T::lit(o as f64))
            .collect();
        let v = (self.f)(&x)?;
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        self.cache.insert(k.to_vec(), v.clone());
        Ok(v)
    }

    /// Tensor-product estimate at step `units·h0/2`.
    fn estimate(&mut self, ex: &[u8], units: i64) -> Result<Vec<T>> {
        let axes: Vec<usize> = (0..ex.len()).filter(|&a| ex[a] > 0).collect();
        let total: i32 = ex.iter().map(|&e| e as i32).sum();
        let step = self.h0 * T::lit(0.5) * T::lit(units as f64);
        let mut acc: Option<Vec<T>> = None;
        let mut idx = vec![0usize; axes.len()];
        loop {
            let mut k = vec![0i64; ex.len()];
            let mut w = 1.0;
            for (slot, &a) in axes.iter().enumerate() {
                let (off, wt) = stencil(ex[a])[idx[slot]];
                k[a] = off * units;
                w *= wt;
            }
            let v = self.at(&k)?;
            let w = T::lit(w);
            match acc.as_mut() {
                None => acc = Some(v.iter().map(|&c| c * w).collect()),
                Some(a) => {
                    for (x, c) in a.iter_mut().zip(&v) {
                        *x += *c * w;
                    }
                }
            }
            // odometer over stencil points
            let mut slot = 0;
            while slot < axes.len() {
                idx[slot] += 1;
                if idx[slot] < stencil(ex[axes[slot]]).len() {
                    break;
                }
                idx[slot] = 0;
                slot += 1;
            }
            if slot == axes.len() {
                break;
            }
        }
        let scale = step.powi(total).recip();
        Ok(acc.unwrap().into_iter().map(|c| c * scale).collect())
    }

    fn derivative(&mut self, ex: &[u8]) -> Result<Vec<T>> {
        if ex.iter().all(|&e| e == 0) {
            return self.at(&vec![0; ex.len()]);
        }
        let coarse = self.estimate(ex, 2)?;
        let fine = self.estimate(ex, 1)?;
        let three = T::lit(3.0);
        let four = T::lit(4.0);
        Ok(fine
            .iter()
            .zip(&coarse)
            .map(|(&f, &c)| (four * f - c) / three)
            .collect())
    }
}
