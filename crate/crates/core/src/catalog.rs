//! Closed-form surfaces for every branch of the classification, with the
//! invariants they are known to carry.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::checks::{analyze, Analysis, AmbientKind, Branch, Tolerances};
use crate::differentiation::{jet, AmbientConstraint, DerivStrategy, Immersion};
use crate::error::{Error, Result};
use crate::geometry::{induced_metric, MetricJet};
use crate::jet::Jet;
use crate::lift::{LightConeJets, ProductLift};
use crate::linalg::{cluster, Signature};
use crate::spaceform::{fundamental_forms, laplacian_of_immersion};
use crate::Real;

/// `r·H_m` with `H_1 = (cosh x₁, sinh x₁)`, `H_m = (cosh x_m·H_{m−1}, sinh x_m)`.
/// Lies on `⟨u,u⟩ = −r²` in `ℝ^{m+1}_1`, time coordinate first.
pub fn hyperbolic_chart<T: Real>(x: &[Jet<T>], r: T) -> Vec<Jet<T>> {
    let mut h = vec![x[0].cosh(), x[0].sinh()];
    for xm in &x[1..] {
        let c = xm.cosh();
        h = h.iter().map(|p| p * &c).collect();
        h.push(xm.sinh());
    }
    h.iter().map(|p| p.scale(r)).collect()
}

/// `r·S_m` with `S_1 = (cos θ₁, sin θ₁)`, `S_m = (cos θ_m·S_{m−1}, sin θ_m)`.
pub fn sphere_chart<T: Real>(x: &[Jet<T>], r: T) -> Vec<Jet<T>> {
    let mut s = vec![x[0].cos(), x[0].sin()];
    for xm in &x[1..] {
        let c = xm.cos();
        s = s.iter().map(|p| p * &c).collect();
        s.push(xm.sin());
    }
    s.iter().map(|p| p.scale(r)).collect()
}

fn hyperbolic_domain(m: usize) -> Vec<(f64, f64)> {
    vec![(-3.0, 3.0); m]
}

fn sphere_domain(m: usize) -> Vec<(f64, f64)> {
    let mut d = vec![(-3.0, 3.0)];
    d.extend(std::iter::repeat((-1.5, 1.5)).take(m - 1));
    d
}

const HYP_BOX: (f64, f64) = (-0.8, 0.8);
const ANGLE_BOX: (f64, f64) = (-0.6, 0.6);
const T_BOX: (f64, f64) = (0.5, 2.0);
const FLAT_BOX: (f64, f64) = (-1.0, 1.0);

fn lit_domain<T: Real>(d: &[(f64, f64)]) -> Vec<(T, T)> {
    d.iter().map(|&(a, b)| (T::lit(a), T::lit(b))).collect()
}

/// Puts the time coordinates of two concatenated factors first.
fn time_first<X: Clone>(a: &[X], ta: usize, b: &[X], tb: usize) -> Vec<X> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(&a[..ta]);
    out.extend_from_slice(&b[..tb]);
    out.extend_from_slice(&a[ta..]);
    out.extend_from_slice(&b[tb..]);
    out
}

/// How `e^{2τ}` behaves on a catalog surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum TauLaw {
    /// `e^{2τ}` is constant.
    Constant { e2tau: f64 },
    /// `e^{2τ}·t² = d` along chart axis `axis` (the `t` coordinate).
    InverseSquare { d: f64, axis: usize },
    /// Not defined for direct light-cone input.
    None,
}

/// Closed-form expectations for a catalog surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    /// Distinct `A`-eigenvalues (relative to `g`) with multiplicities, ascending.
    pub a: Vec<(f64, usize)>,
    /// `B`-eigenvalues with multiplicities; determined up to a global sign by
    /// the normal orientation.
    pub b: Vec<(f64, usize)>,
    pub tau: TauLaw,
    /// `None` at parameter values where the family degenerates into another branch.
    pub branch: Option<Branch>,
    /// Published eigenvalue formulas evaluated verbatim, when they differ.
    pub printed_a: Option<Vec<f64>>,
}

fn group(values: &[(f64, usize)]) -> Vec<(f64, usize)> {
    let mut v: Vec<(f64, usize)> = values.iter().filter(|(_, m)| *m > 0).cloned().collect();
    v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out: Vec<(f64, usize)> = Vec::new();
    for (x, m) in v {
        match out.last_mut() {
            Some((y, k)) if (x - *y).abs() <= 1e-12 * (1.0 + x.abs()) => *k += m,
            _ => out.push((x, m)),
        }
    }
    out
}

/// Expectations for a hypersurface whose shape operator has constant
/// eigenvalues `λ` (with multiplicities) in a space form of curvature `ε`.
pub fn constant_tau_expected(lambda: &[(f64, usize)], epsilon: f64) -> (f64, Vec<(f64, usize)>, Vec<(f64, usize)>) {
    let n: usize = lambda.iter().map(|l| l.1).sum();
    let nf = n as f64;
    let s1: f64 = lambda.iter().map(|&(l, m)| m as f64 * l).sum();
    let s2: f64 = lambda.iter().map(|&(l, m)| m as f64 * l * l).sum();
    let h = s1 / nf;
    let e2 = (nf * s2 - s1 * s1) / (nf - 1.0);
    let a: Vec<(f64, usize)> = lambda
        .iter()
        .map(|&(l, m)| ((-h * l + 0.5 * (h * h + epsilon)) / e2, m))
        .collect();
    let b: Vec<(f64, usize)> = lambda.iter().map(|&(l, m)| ((l - h) / e2.sqrt(), m)).collect();
    (e2, group(&a), group(&b))
}

fn branch_from(a: &[(f64, usize)], b: &[(f64, usize)], two: Branch) -> Option<Branch> {
    match a.len() {
        1 => Some(Branch::Case1Isotropic),
        2 if b.iter().all(|x| x.0.abs() > 1e-9) => Some(two),
        _ => None,
    }
}

/// A constructed surface ready for the pipelines.
#[derive(Clone)]
pub struct Surface<T> {
    pub id: String,
    pub params: BTreeMap<String, f64>,
    pub immersion: Immersion<T>,
    /// Interior sampling box in chart coordinates.
    pub sample_box: Vec<(f64, f64)>,
    pub ambient: AmbientKind,
    pub expected: Option<Expected>,
}

impl<T: Real> std::fmt::Debug for Surface<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Surface")
            .field("id", &self.id)
            .field("params", &self.params)
            .field("ambient", &self.ambient)
            .finish_non_exhaustive()
    }
}

/// `ℍ^k(r) × 𝕊^{n−k}(√(1+r²)) ⊂ 𝕊^{n+1}_1`.
pub fn make_cylinder_desitter<T: Real>(k: usize, n: usize, r: f64) -> Result<Surface<T>> {
    if !(k >= 1 && k < n) || !(r > 0.0) {
        return Err(Error::InvalidParameter("need 1 ≤ k ≤ n−1 and r > 0".into()));
    }
    let s = (1.0 + r * r).sqrt();
    let (rt, st) = (T::lit(r), T::lit(s));
    let mut domain = hyperbolic_domain(k);
    domain.extend(sphere_domain(n - k));
    let imm = Immersion::closed_form(
        Signature::new(n + 2, 1)?,
        AmbientConstraint::Sphere(T::one()),
        lit_domain(&domain),
        move |x| {
            let mut u = hyperbolic_chart(&x[..k], rt);
            u.extend(sphere_chart(&x[k..], st));
            u
        },
    );
    let (e2, a, b) = constant_tau_expected(&[(s / r, k), (r / s, n - k)], 1.0);
    let mut sample_box = vec![HYP_BOX; k];
    sample_box.extend(vec![ANGLE_BOX; n - k]);
    Ok(Surface {
        id: "cylinder_desitter".into(),
        params: params(&[("k", k as f64), ("n", n as f64), ("r", r)]),
        immersion: imm,
        sample_box,
        ambient: AmbientKind::DeSitter,
        expected: Some(Expected {
            branch: branch_from(&a, &b, Branch::CylinderS),
            a,
            b,
            tau: TauLaw::Constant { e2tau: e2 },
            printed_a: None,
        }),
    })
}

/// `ℍ^k × ℝ^{n−k} ⊂ ℝ^{n+1}_1`.
pub fn make_cylinder_flat<T: Real>(k: usize, n: usize) -> Result<Surface<T>> {
    if !(k >= 1 && k < n) {
        return Err(Error::InvalidParameter("need 1 ≤ k ≤ n−1".into()));
    }
    let mut domain = hyperbolic_domain(k);
    domain.extend(vec![(-10.0, 10.0); n - k]);
    let imm = Immersion::closed_form(
        Signature::new(n + 1, 1)?,
        AmbientConstraint::None,
        lit_domain(&domain),
        move |x| {
            let mut u = hyperbolic_chart(&x[..k], T::one());
            u.extend(x[k..].iter().cloned());
            u
        },
    );
    let (e2, a, b) = constant_tau_expected(&[(1.0, k), (0.0, n - k)], 0.0);
    let mut sample_box = vec![HYP_BOX; k];
    sample_box.extend(vec![FLAT_BOX; n - k]);
    Ok(Surface {
        id: "cylinder_flat".into(),
        params: params(&[("k", k as f64), ("n", n as f64)]),
        immersion: imm,
        sample_box,
        ambient: AmbientKind::Flat,
        expected: Some(Expected {
            branch: branch_from(&a, &b, Branch::CylinderFlat),
            a,
            b,
            tau: TauLaw::Constant { e2tau: e2 },
            printed_a: None,
        }),
    })
}

fn ads_product<T: Real>(k: usize, n: usize, r1: f64, r2: f64) -> Result<Immersion<T>> {
    let (a, b) = (T::lit(r1), T::lit(r2));
    let mut domain = hyperbolic_domain(k);
    domain.extend(hyperbolic_domain(n - k));
    Ok(Immersion::closed_form(
        Signature::new(n + 2, 2)?,
        AmbientConstraint::Hyperbolic(T::one()),
        lit_domain(&domain),
        move |x| {
            let u1 = hyperbolic_chart(&x[..k], a);
            let u2 = hyperbolic_chart(&x[k..], b);
            time_first(&u1, 1, &u2, 1)
        },
    ))
}

/// `ℍ^k(r) × ℍ^{n−k}(√(1−r²)) ⊂ ℍ^{n+1}_1`, `0 < r < 1`.
pub fn make_cylinder_ads<T: Real>(k: usize, n: usize, r: f64) -> Result<Surface<T>> {
    if !(k >= 1 && k < n) || !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter("need 1 ≤ k ≤ n−1 and 0 < r < 1".into()));
    }
    let s = (1.0 - r * r).sqrt();
    let imm = ads_product(k, n, r, s)?;
    let (e2, a, b) = constant_tau_expected(&[(s / r, k), (-r / s, n - k)], -1.0);
    Ok(Surface {
        id: "cylinder_ads".into(),
        params: params(&[("k", k as f64), ("n", n as f64), ("r", r)]),
        immersion: imm,
        sample_box: vec![HYP_BOX; n],
        ambient: AmbientKind::AntiDeSitter,
        expected: Some(Expected {
            branch: branch_from(&a, &b, Branch::CylinderH),
            a,
            b,
            tau: TauLaw::Constant { e2tau: e2 },
            printed_a: None,
        }),
    })
}

/// Maximal `ℍ^p(r₁) × ℍ^{n−p}(r₂) ⊂ ℍ^{n+1}_1` with `r₁² = p/n`, `r₂² = (n−p)/n`.
pub fn make_maximal_ads_product<T: Real>(p: usize, n: usize) -> Result<Surface<T>> {
    if !(p >= 1 && p < n) {
        return Err(Error::InvalidParameter("need 1 ≤ p ≤ n−1".into()));
    }
    let r1 = (p as f64 / n as f64).sqrt();
    let r2 = ((n - p) as f64 / n as f64).sqrt();
    let imm = ads_product(p, n, r1, r2)?;
    let (e2, a, b) = constant_tau_expected(&[(r2 / r1, p), (-r1 / r2, n - p)], -1.0);
    Ok(Surface {
        id: "maximal_ads_product".into(),
        params: params(&[("p", p as f64), ("n", n as f64)]),
        immersion: imm,
        sample_box: vec![HYP_BOX; n],
        ambient: AmbientKind::AntiDeSitter,
        expected: Some(Expected {
            branch: branch_from(&a, &b, Branch::CylinderH),
            a,
            b,
            tau: TauLaw::Constant { e2tau: e2 },
            printed_a: None,
        }),
    })
}

/// Closed-form invariants of the warped product for the orthonormal normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpedConstants {
    /// Shape eigenvalue (times `t`) on the hyperbolic factor, `√(r²+1)/r`.
    pub alpha: f64,
    /// Shape eigenvalue (times `t`) on the spherical factor, `r/√(r²+1)`.
    pub beta: f64,
    /// `H·t`.
    pub c: f64,
    /// `e^{2τ}·t²`.
    pub d: f64,
    pub a: [f64; 3],
    pub b: [f64; 3],
}

pub fn warped_constants(p: usize, q: usize, n: usize, r: f64) -> WarpedConstants {
    let alpha = (r * r + 1.0).sqrt() / r;
    let beta = r / (r * r + 1.0).sqrt();
    let (pf, qf, nf) = (p as f64, q as f64, n as f64);
    let c = (pf * alpha + qf * beta) / nf;
    let d = (nf * (pf * alpha * alpha + qf * beta * beta) - (pf * alpha + qf * beta).powi(2)) / (nf - 1.0);
    let sd = d.sqrt();
    WarpedConstants {
        alpha,
        beta,
        c,
        d,
        a: [
            (c * c - 2.0 * c * alpha + 1.0) / (2.0 * d),
            (c * c - 2.0 * c * beta + 1.0) / (2.0 * d),
            (c * c - 1.0) / (2.0 * d),
        ],
        b: [(alpha - c) / sd, (beta - c) / sd, -c / sd],
    }
}

/// Published `(a₁, a₂, a₃)` formulas evaluated verbatim, for comparison.
pub fn warped_printed_eigenvalues(p: usize, q: usize, n: usize, r: f64) -> [f64; 3] {
    let (pf, qf, nf) = (p as f64, q as f64, n as f64);
    let r2 = r * r;
    let a = r / (r2 + 1.0).sqrt();
    let b = (r2 + 1.0).sqrt() / r;
    let c = (pf * r2 + qf * (r2 + 1.0)) / (nf * r * (r2 + 1.0).sqrt());
    let d = (pf * (nf - pf) * r2 * r2 - 2.0 * pf * qf * r2 * (r2 + 1.0)
        + qf * (nf - qf) * (r2 + 1.0).powi(2))
        / (nf - 1.0);
    [
        (c * c - 2.0 * a - 1.0) / (2.0 * d),
        (c * c - 2.0 * b - 1.0) / (2.0 * d),
        (c * c - 1.0) / (2.0 * d),
    ]
}

/// `(u', u'', t, u''') ↦ (t u', t u'', u''')` with `u' ∈ ℍ^p(r)`,
/// `u'' ∈ 𝕊^q(√(r²+1))`. Chart order: hyperbolic, spherical, `t`, flat.
pub fn make_warped<T: Real>(p: usize, q: usize, n: usize, r: f64) -> Result<Surface<T>> {
    if p < 1 || q < 1 || n < p + q + 2 || !(r > 0.0) {
        return Err(Error::InvalidParameter("need p, q ≥ 1, n − p − q − 1 ≥ 1 and r > 0".into()));
    }
    let (rt, st) = (T::lit(r), T::lit((r * r + 1.0).sqrt()));
    let mut domain = hyperbolic_domain(p);
    domain.extend(sphere_domain(q));
    domain.push((0.05, 20.0));
    domain.extend(vec![(-10.0, 10.0); n - p - q - 1]);
    let imm = Immersion::closed_form(
        Signature::new(n + 1, 1)?,
        AmbientConstraint::None,
        lit_domain(&domain),
        move |x| {
            let t = &x[p + q];
            let mut u: Vec<Jet<T>> = hyperbolic_chart(&x[..p], rt).iter().map(|c| c * t).collect();
            u.extend(sphere_chart(&x[p..p + q], st).iter().map(|c| c * t));
            u.extend(x[p + q + 1..].iter().cloned());
            u
        },
    );
    let w = warped_constants(p, q, n, r);
    let a = group(&[(w.a[0], p), (w.a[1], q), (w.a[2], n - p - q)]);
    let b = group(&[(w.b[0], p), (w.b[1], q), (w.b[2], n - p - q)]);
    let branch = if a.len() == 3 { Some(Branch::Warped) } else { None };
    let mut sample_box = vec![HYP_BOX; p];
    sample_box.extend(vec![ANGLE_BOX; q]);
    sample_box.push(T_BOX);
    sample_box.extend(vec![FLAT_BOX; n - p - q - 1]);
    Ok(Surface {
        id: "warped".into(),
        params: params(&[("p", p as f64), ("q", q as f64), ("n", n as f64), ("r", r)]),
        immersion: imm,
        sample_box,
        ambient: AmbientKind::Flat,
        expected: Some(Expected {
            a,
            b,
            tau: TauLaw::InverseSquare { d: w.d, axis: p + q },
            branch,
            printed_a: Some(warped_printed_eigenvalues(p, q, n, r).to_vec()),
        }),
    })
}

/// Radii of the anti-de Sitter light-cone product: `(r, r₁, r₂)`.
pub fn example12_radii(k: usize, p: usize, n: usize) -> (f64, f64, f64) {
    let r2 = (k * n) as f64 / (n - 1) as f64;
    let r1 = (r2 * p as f64 / k as f64).sqrt();
    let rr2 = (r2 * (k - p) as f64 / k as f64).sqrt();
    (r2.sqrt(), r1, rr2)
}

/// Maximal `N^k = ℍ^p(r₁) × ℍ^{k−p}(r₂) ⊂ ℍ^{k+1}_1(r)`, the first factor
/// of the anti-de Sitter light-cone product.
pub fn example12_component<T: Real>(k: usize, p: usize, n: usize) -> Result<Immersion<T>> {
    if !(k >= 2 && k < n && p >= 1 && p < k) {
        return Err(Error::InvalidParameter("need 2 ≤ k ≤ n−1 and 1 ≤ p ≤ k−1".into()));
    }
    let (r, r1, r2) = example12_radii(k, p, n);
    let (a, b) = (T::lit(r1), T::lit(r2));
    Ok(Immersion::closed_form(
        Signature::new(k + 2, 2)?,
        AmbientConstraint::Hyperbolic(T::lit(r)),
        lit_domain(&hyperbolic_domain(k)),
        move |x| {
            let u1 = hyperbolic_chart(&x[..p], a);
            let u2 = hyperbolic_chart(&x[p..], b);
            time_first(&u1, 1, &u2, 1)
        },
    ))
}

fn standard_factor<T: Real>(m: usize, r: f64, hyperbolic: bool) -> Result<Immersion<T>> {
    let rt = T::lit(r);
    Ok(if hyperbolic {
        Immersion::closed_form(
            Signature::new(m + 1, 1)?,
            AmbientConstraint::Hyperbolic(rt),
            lit_domain(&hyperbolic_domain(m)),
            move |x| hyperbolic_chart(x, rt),
        )
    } else {
        Immersion::closed_form(
            Signature::new(m + 1, 0)?,
            AmbientConstraint::Sphere(rt),
            lit_domain(&sphere_domain(m)),
            move |x| sphere_chart(x, rt),
        )
    })
}

/// Light-cone immersion `y = (u, v)` of `N^k × 𝕊^{n−k}(r)`.
pub fn make_example12_instance<T: Real>(k: usize, p: usize, n: usize) -> Result<Surface<T>> {
    let u = example12_component(k, p, n)?;
    let (r, r1, r2) = example12_radii(k, p, n);
    let v = standard_factor(n - k, r, false)?;
    let imm = Immersion::new(ProductLift::new(u, v)?);
    let half = 0.5 / (r * r);
    let hu = r2 / (r1 * r);
    let hv = -r1 / (r2 * r);
    let mut sample_box = vec![HYP_BOX; k];
    sample_box.extend(vec![ANGLE_BOX; n - k]);
    Ok(Surface {
        id: "example12".into(),
        params: params(&[("k", k as f64), ("p", p as f64), ("n", n as f64)]),
        immersion: imm,
        sample_box,
        ambient: AmbientKind::LightCone,
        expected: Some(Expected {
            a: group(&[(-half, k), (half, n - k)]),
            b: group(&[(hu, p), (hv, k - p), (0.0, n - k)]),
            tau: TauLaw::None,
            branch: Some(Branch::Ex12Type),
            printed_a: None,
        }),
    })
}

fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// One named constructor parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub integer: bool,
    pub range: &'static str,
}

/// A family in the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub summary: &'static str,
    pub params: &'static [ParamSpec],
    /// Default parameter values used when none are given.
    pub defaults: &'static [(&'static str, f64)],
    pub branch: Branch,
}

const fn int(name: &'static str, range: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        integer: true,
        range,
    }
}

const fn real(name: &'static str, range: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        integer: false,
        range,
    }
}

pub const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        id: "cylinder_desitter",
        summary: "H^k(r) x S^(n-k)(sqrt(1+r^2)) in de Sitter space",
        params: &[int("k", "1 <= k <= n-1"), int("n", "n >= 2"), real("r", "r > 0")],
        defaults: &[("k", 1.0), ("n", 3.0), ("r", 1.0)],
        branch: Branch::CylinderS,
    },
    CatalogEntry {
        id: "cylinder_flat",
        summary: "H^k x R^(n-k) in Minkowski space",
        params: &[int("k", "1 <= k <= n-1"), int("n", "n >= 2")],
        defaults: &[("k", 1.0), ("n", 3.0)],
        branch: Branch::CylinderFlat,
    },
    CatalogEntry {
        id: "cylinder_ads",
        summary: "H^k(r) x H^(n-k)(sqrt(1-r^2)) in anti-de Sitter space",
        params: &[int("k", "1 <= k <= n-1"), int("n", "n >= 2"), real("r", "0 < r < 1")],
        defaults: &[("k", 1.0), ("n", 3.0), ("r", 0.4)],
        branch: Branch::CylinderH,
    },
    CatalogEntry {
        id: "warped",
        summary: "warped product (u',u'',t,u''') -> (t u', t u'', u''') in Minkowski space",
        params: &[
            int("p", "p >= 1"),
            int("q", "q >= 1"),
            int("n", "n >= p+q+2"),
            real("r", "r > 0"),
        ],
        defaults: &[("p", 1.0), ("q", 1.0), ("n", 4.0), ("r", 1.0)],
        branch: Branch::Warped,
    },
    CatalogEntry {
        id: "example12",
        summary: "light-cone product N^k x S^(n-k)(r), N^k maximal in H^(k+1)_1(r)",
        params: &[int("k", "2 <= k <= n-1"), int("p", "1 <= p <= k-1"), int("n", "n >= 3")],
        defaults: &[("k", 2.0), ("p", 1.0), ("n", 4.0)],
        branch: Branch::Ex12Type,
    },
    CatalogEntry {
        id: "maximal_ads_product",
        summary: "maximal H^p(sqrt(p/n)) x H^(n-p)(sqrt((n-p)/n)) in anti-de Sitter space",
        params: &[int("p", "1 <= p <= n-1"), int("n", "n >= 2")],
        defaults: &[("p", 1.0), ("n", 3.0)],
        branch: Branch::Case1Isotropic,
    },
];

pub fn entry(id: &str) -> Option<&'static CatalogEntry> {
    ENTRIES.iter().find(|e| e.id == id)
}

/// Builds a catalog surface from named parameters (missing ones take defaults).
pub fn build<T: Real>(id: &str, given: &BTreeMap<String, f64>) -> Result<Surface<T>> {
    let e = entry(id).ok_or_else(|| Error::InvalidParameter(format!("unknown surface id `{id}`")))?;
    for k in given.keys() {
        if !e.params.iter().any(|p| p.name == k) {
            return Err(Error::InvalidParameter(format!("`{id}` has no parameter `{k}`")));
        }
    }
    let get = |name: &str| -> Result<f64> {
        let spec = e.params.iter().find(|p| p.name == name).unwrap();
        let v = given
            .get(name)
            .copied()
            .or_else(|| e.defaults.iter().find(|d| d.0 == name).map(|d| d.1))
            .ok_or_else(|| Error::InvalidParameter(format!("missing parameter `{name}`")))?;
        if !v.is_finite() || (spec.integer && (v.fract() != 0.0 || v < 0.0)) {
            return Err(Error::InvalidParameter(format!("`{name}` must be {}", spec.range)));
        }
        Ok(v)
    };
    let u = |name: &str| get(name).map(|v| v as usize);
    match id {
        "cylinder_desitter" => make_cylinder_desitter(u("k")?, u("n")?, get("r")?),
        "cylinder_flat" => make_cylinder_flat(u("k")?, u("n")?),
        "cylinder_ads" => make_cylinder_ads(u("k")?, u("n")?, get("r")?),
        "warped" => make_warped(u("p")?, u("q")?, u("n")?, get("r")?),
        "example12" => make_example12_instance(u("k")?, u("p")?, u("n")?),
        "maximal_ads_product" => make_maximal_ads_product(u("p")?, u("n")?),
        _ => unreachable!(),
    }
}

/// Which light-cone example a component is meant to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    /// Maximal in de Sitter `𝕊^{k+1}_1(r)`, paired with `ℍ^{n−k}(r)`.
    Ex11,
    /// Maximal in anti-de Sitter `ℍ^{k+1}_1(r)`, paired with `𝕊^{n−k}(r)`.
    Ex12,
}

/// Outcome of validating a user-supplied component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub kind: ComponentKind,
    pub k: usize,
    pub n: usize,
    pub r: f64,
    pub samples: usize,
    /// `max |tr h|`.
    pub trace_h: f64,
    /// `max |Σ h^i_j h^j_i − (n−1)/n|`.
    pub norm_h: f64,
    /// `max |ρ − (±k(k−1)/r² + (n−1)/n)|`, the value forced by the Gauss equation.
    pub scalar_curvature: f64,
    /// Same residual against the published `ρ₁` (informational).
    pub scalar_curvature_printed: f64,
    /// `max |Δu ± k u / r²|`.
    pub laplacian: f64,
    pub rejections: Vec<String>,
    pub lift: Option<Analysis>,
    pub passed: bool,
}

/// Validates a candidate first factor of a light-cone product (`Ex11`: de
/// Sitter component, `Ex12`: anti-de Sitter component) at the given chart points and, if it passes,
/// runs the light-cone pipeline on the product lift.
pub fn validate_product_component<T: Real>(
    u: &Immersion<T>,
    n: usize,
    kind: ComponentKind,
    points: &[Vec<T>],
    tolerances: Tolerances,
) -> Result<ComponentReport> {
    let k = u.chart_dim();
    let sig = u.ambient();
    let (r, want_time) = match (kind, u.constraint()) {
        (ComponentKind::Ex11, AmbientConstraint::Sphere(r)) => (r, 1),
        (ComponentKind::Ex12, AmbientConstraint::Hyperbolic(r)) => (r, 2),
        (kind, c) => {
            return Err(Error::AmbientMismatch(format!(
                "{kind:?} component must lie in the {} quadric, found {c:?}",
                if kind == ComponentKind::Ex11 { "de Sitter" } else { "anti-de Sitter" }
            )))
        }
    };
    if sig.total_dim() != k + 2 || sig.time_index() != want_time {
        return Err(Error::AmbientMismatch(format!(
            "component of dimension {k} must map into R^{}_{want_time}",
            k + 2
        )));
    }
    if !(k >= 2 && k < n) {
        return Err(Error::InvalidParameter("need 2 ≤ k ≤ n−1".into()));
    }
    let rf = r.to_f64_lossy();
    let (kf, nf) = (k as f64, n as f64);
    let sign = if kind == ComponentKind::Ex11 { 1.0 } else { -1.0 };
    let rho_gauss = sign * kf * (kf - 1.0) / (rf * rf) + (nf - 1.0) / nf;
    let rho_printed = sign * kf * (kf - 1.0) / (rf * rf) - (nf - 1.0) / nf;
    let lap_coef = -sign * kf / (rf * rf);

    let (mut trace_h, mut norm_h, mut rho_res, mut rho_printed_res, mut lap) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for x in points {
        let j = jet(u, x, 3, DerivStrategy::Exact)?;
        let ff = fundamental_forms(&j, sig, u.constraint())?;
        let s = ff.first.to_mat().inverse()?.matmul(&ff.second.to_mat());
        let s2 = s.matmul(&s);
        let tr: f64 = (0..k).map(|i| s.get(i, i).to_f64_lossy()).sum();
        let tr2: f64 = (0..k).map(|i| s2.get(i, i).to_f64_lossy()).sum();
        trace_h = trace_h.max(tr.abs());
        norm_h = norm_h.max((tr2 - (nf - 1.0) / nf).abs());
        let metric = MetricJet::new(induced_metric(j.components(), k, sig))?;
        let rho = metric.scalar_curvature()?.to_f64_lossy();
        rho_res = rho_res.max((rho - rho_gauss).abs());
        rho_printed_res = rho_printed_res.max((rho - rho_printed).abs());
        let comps: Vec<Jet<T>> = j.components().iter().map(|c| c.truncate(2)).collect();
        let l = laplacian_of_immersion(&comps, sig)?;
        for (li, ui) in l.iter().zip(j.value()) {
            lap = lap.max((li.to_f64_lossy() - lap_coef * ui.to_f64_lossy()).abs());
        }
    }
    let tol = tolerances.residual;
    let mut rejections = Vec::new();
    if !(trace_h <= tol) {
        rejections.push(format!("not maximal: |tr h| = {trace_h:e}"));
    }
    if !(norm_h <= tol) {
        rejections.push(format!("norm condition fails: |h|² − (n−1)/n = {norm_h:e}"));
    }
    if !(rho_res <= tol) {
        rejections.push(format!("scalar curvature not constant at the Gauss value: {rho_res:e}"));
    }
    if !(lap <= tol) {
        rejections.push(format!("Laplacian identity fails: {lap:e}"));
    }
    let lift = if rejections.is_empty() {
        let v = standard_factor(n - k, rf, kind == ComponentKind::Ex11)?;
        let y = Immersion::new(ProductLift::new(u.clone(), v)?);
        let invariants = points
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let mut z = x.clone();
                z.extend((0..n - k).map(|a| T::lit(0.1 * (((i + a) % 5) as f64) - 0.2)));
                let j = jet(&y, &z, 5, DerivStrategy::Exact)?;
                LightConeJets::new(j.components(), y.ambient(), None)?.conformal.evaluate()
            })
            .collect::<Result<Vec<_>>>()?;
        let analysis = analyze(&invariants, tolerances, AmbientKind::LightCone)?;
        let want = if kind == ComponentKind::Ex11 { Branch::Ex11Type } else { Branch::Ex12Type };
        if analysis.verdict.branch != want {
            rejections.push(format!(
                "lift classified as {} instead of {}",
                analysis.verdict.branch.label(),
                want.label()
            ));
        }
        Some(analysis)
    } else {
        None
    };
    Ok(ComponentReport {
        kind,
        k,
        n,
        r: rf,
        samples: points.len(),
        trace_h,
        norm_h,
        scalar_curvature: rho_res,
        scalar_curvature_printed: rho_printed_res,
        laplacian: lap,
        passed: rejections.is_empty(),
        rejections,
        lift,
    })
}

/// De Sitter slot: the candidate must be maximal in `𝕊^{k+1}_1(r)`.
pub fn validate_example11_component<T: Real>(
    u: &Immersion<T>,
    n: usize,
    points: &[Vec<T>],
    tolerances: Tolerances,
) -> Result<ComponentReport> {
    validate_product_component(u, n, ComponentKind::Ex11, points, tolerances)
}

/// Distinct values of a closed-form list, clustered like pipeline output.
pub fn expected_clusters(values: &[(f64, usize)], tol: f64) -> Result<Vec<(f64, usize)>> {
    let mut flat = Vec::new();
    for &(v, m) in values {
        flat.extend(std::iter::repeat(v).take(m));
    }
    flat.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(cluster(&flat, tol)?
        .clusters
        .iter()
        .map(|c| (c.value, c.multiplicity))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::jet_inner;

    #[test]
    fn hand_values_of_constant_tau_helper() {
        let s = 2f64.sqrt();
        let (e2, a, b) = constant_tau_expected(&[(s, 1), (1.0 / s, 2)], 1.0);
        assert!((e2 - 0.5).abs() < 1e-15);
        assert!((a[0].0 + 7.0 / 9.0).abs() < 1e-14 && (a[1].0 - 5.0 / 9.0).abs() < 1e-14);
        assert_eq!(a[1].1, 2);
        assert!((b[1].0 - 2.0 / 3.0).abs() < 1e-14 && (b[0].0 + 1.0 / 3.0).abs() < 1e-14);
        let (e2, a, _) = constant_tau_expected(&[(1.0, 1), (0.0, 2)], 0.0);
        assert!((e2 - 1.0).abs() < 1e-15);
        assert!((a[0].0 + 5.0 / 18.0).abs() < 1e-15 && (a[1].0 - 1.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn warped_closed_forms_satisfy_relation() {
        for &(p, q, n, r) in &[(1, 1, 4, 1.0), (1, 2, 5, 1.0), (2, 1, 5, 2.0), (2, 3, 7, 0.4)] {
            let w = warped_constants(p, q, n, r);
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        assert!((w.a[i] + w.a[j] - w.b[i] * w.b[j]).abs() < 1e-13);
                    }
                }
            }
            let (pf, qf, rest) = (p as f64, q as f64, (n - p - q) as f64);
            assert!((pf * w.b[0] + qf * w.b[1] + rest * w.b[2]).abs() < 1e-13);
            let nf = n as f64;
            let sq = pf * w.b[0].powi(2) + qf * w.b[1].powi(2) + rest * w.b[2].powi(2);
            assert!((sq - (nf - 1.0) / nf).abs() < 1e-13);
        }
    }

    #[test]
    fn constructors_respect_constraints() {
        let surfaces: Vec<Surface<f64>> = vec![
            make_cylinder_desitter(2, 4, 0.7).unwrap(),
            make_cylinder_flat(1, 3).unwrap(),
            make_cylinder_ads(1, 3, 0.4).unwrap(),
            make_warped(1, 1, 4, 1.0).unwrap(),
            make_example12_instance(2, 1, 4).unwrap(),
            make_maximal_ads_product(2, 5).unwrap(),
        ];
        for s in &surfaces {
            let imm = &s.immersion;
            let x: Vec<f64> = s.sample_box.iter().map(|&(a, b)| 0.3 * a + 0.7 * b).collect();
            let u = imm.eval(&x).unwrap();
            assert!(imm.constraint().residual(&u, imm.ambient()) < 1e-12, "{}", s.id);
            let j = imm.exact_jet(&x, 1).unwrap();
            let g = induced_metric(&j, x.len(), imm.ambient());
            assert!(g.value_mat().cholesky().is_ok(), "{} not space-like", s.id);
        }
    }

    #[test]
    fn example12_component_is_maximal_with_fixed_norm() {
        let (k, p, n) = (3, 1, 5);
        let u = example12_component::<f64>(k, p, n).unwrap();
        let j = jet(&u, &[0.1, -0.2, 0.3], 2, DerivStrategy::Exact).unwrap();
        let ff = fundamental_forms(&j, u.ambient(), u.constraint()).unwrap();
        let s = ff.first.to_mat().inverse().unwrap().matmul(&ff.second.to_mat());
        let s2 = s.matmul(&s);
        assert!(ff.mean_curvature.abs() < 1e-12);
        let tr2: f64 = (0..k).map(|i| s2.get(i, i)).sum();
        assert!((tr2 - (n as f64 - 1.0) / n as f64).abs() < 1e-12);
    }

    #[test]
    fn example12_lift_is_null() {
        let s = make_example12_instance::<f64>(2, 1, 4).unwrap();
        let y = s.immersion.exact_jet(&[0.2, 0.1, 0.3, -0.1], 2).unwrap();
        assert!(jet_inner(&y, &y, s.immersion.ambient()).coeffs().iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn unknown_ids_and_bad_parameters() {
        assert!(build::<f64>("nope", &BTreeMap::new()).is_err());
        let mut p = BTreeMap::new();
        p.insert("k".to_string(), 1.5);
        assert!(build::<f64>("cylinder_flat", &p).is_err());
        p.insert("k".to_string(), 3.0);
        assert!(build::<f64>("cylinder_flat", &p).is_err());
        let mut p = BTreeMap::new();
        p.insert("r".to_string(), 1.5);
        assert!(build::<f64>("cylinder_ads", &p).is_err());
        assert!(build::<f64>("cylinder_flat", &BTreeMap::new()).is_ok());
    }

    #[test]
    fn ads_cylinder_degenerates_to_isotropic_when_maximal() {
        // r² = k/n makes the product maximal
        let s = make_cylinder_ads::<f64>(1, 4, 0.5).unwrap();
        let e = s.expected.unwrap();
        assert_eq!(e.a.len(), 1);
        assert_eq!(e.branch, Some(Branch::Case1Isotropic));
    }
}
