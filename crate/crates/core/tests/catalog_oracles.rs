mod common;

use blaschke_core::catalog::*;
use blaschke_core::checks::{analyze, Branch, Tolerances};
use blaschke_core::differentiation::jet;
use blaschke_core::error::Error;
use blaschke_core::geometry::{induced_metric, MetricJet};
use blaschke_core::lift::{invariants_from_lift, NULL_TOL};
use blaschke_core::spaceform::{SpaceFormJets, SpaceFormOptions};
use blaschke_core::{AmbientConstraint, DerivStrategy, Immersion, Signature};
use common::*;

fn all_surfaces() -> Vec<Surface<f64>> {
    vec![
        make_cylinder_desitter(1, 3, 1.0).unwrap(),
        make_cylinder_desitter(2, 4, 0.7).unwrap(),
        make_cylinder_flat(1, 3).unwrap(),
        make_cylinder_flat(2, 4).unwrap(),
        make_cylinder_ads(1, 3, 0.4).unwrap(),
        make_cylinder_ads(2, 3, 0.8).unwrap(),
        make_warped(1, 1, 4, 1.0).unwrap(),
        make_example12_instance(2, 1, 4).unwrap(),
        make_maximal_ads_product(1, 3).unwrap(),
    ]
}

#[test]
fn constraint_and_spacelike_at_random_points() {
    for s in all_surfaces() {
        for x in sample_points(&s.sample_box, 100, 11) {
            let u = s.immersion.eval(&x).unwrap();
            let res = s.immersion.constraint().residual(&u, s.immersion.ambient());
            assert!(res < 1e-10, "{} constraint residual {res:e}", s.id);
            let j = s.immersion.exact_jet(&x, 1).unwrap();
            let g = induced_metric(&j, x.len(), s.immersion.ambient());
            assert!(g.value_mat().cholesky().is_ok(), "{} not space-like at {x:?}", s.id);
        }
    }
}

#[test]
fn expected_records_match_exact_pipeline() {
    for s in all_surfaces() {
        let e = s.expected.clone().unwrap();
        let pts = sample_points(&s.sample_box, 6, 3);
        let inv = invariants(&s, &pts, DerivStrategy::Exact);
        let (want_a, want_b) = (expand(&e.a), expand(&e.b));
        for p in &inv {
            assert!(max_diff(&eigenvalues(&p.a), &want_a) < 1e-9, "{} A", s.id);
            assert!(max_diff_up_to_sign(&eigenvalues(&p.b), &want_b) < 1e-9, "{} B", s.id);
            assert!(p.c_norm() < 1e-9, "{} C", s.id);
        }
        let an = analyze(&inv, Tolerances::EXACT, s.ambient).unwrap();
        if let Some(b) = e.branch {
            assert_eq!(an.verdict.branch, b, "{}: {:?}", s.id, an.verdict);
        }
    }
}

#[test]
fn tau_laws() {
    for s in all_surfaces() {
        let e = s.expected.clone().unwrap();
        for x in sample_points(&s.sample_box, 5, 5) {
            if s.immersion.constraint() == AmbientConstraint::LightCone {
                continue;
            }
            let sf = SpaceFormJets::at(&s.immersion, &x, DerivStrategy::Exact, SpaceFormOptions::default()).unwrap();
            let e2 = (2.0 * sf.tau_data().tau).exp();
            match e.tau {
                TauLaw::Constant { e2tau } => assert!((e2 - e2tau).abs() < 1e-9, "{}", s.id),
                TauLaw::InverseSquare { d, axis } => {
                    assert!((e2 * x[axis] * x[axis] - d).abs() < 1e-8, "{}", s.id)
                }
                TauLaw::None => unreachable!(),
            }
        }
    }
}

#[test]
fn expected_records_match_fd_pipeline() {
    // The default step sits at the roundoff floor of the order-5 stencils
    // for the de Sitter cylinder (∇A ≈ 1.1e-3); a coarser step clears it.
    let cases = [
        (make_cylinder_flat(1, 3).unwrap(), DerivStrategy::fd()),
        (make_cylinder_ads(1, 3, 0.4).unwrap(), DerivStrategy::fd()),
        (make_warped(1, 1, 4, 1.0).unwrap(), DerivStrategy::fd()),
        (make_maximal_ads_product(1, 3).unwrap(), DerivStrategy::fd()),
        (make_example12_instance(2, 1, 4).unwrap(), DerivStrategy::fd()),
        (make_cylinder_desitter(1, 3, 1.0).unwrap(), DerivStrategy::Fd { h0: 2e-2 }),
    ];
    for (s, strategy) in cases {
        let e = s.expected.clone().unwrap();
        let pts = sample_points(&s.sample_box, 3, 9);
        let inv = invariants(&s, &pts, strategy);
        for p in &inv {
            assert!(max_diff(&eigenvalues(&p.a), &expand(&e.a)) < 1e-3, "{}", s.id);
            assert!(max_diff_up_to_sign(&eigenvalues(&p.b), &expand(&e.b)) < 1e-3, "{}", s.id);
        }
        let an = analyze(&inv, Tolerances::FD, s.ambient).unwrap();
        assert_eq!(Some(an.verdict.branch), e.branch, "{}: {:#?}", s.id, an.verdict);
    }
}

#[test]
fn warped_family_has_three_clusters_and_printed_a3_pattern() {
    for &(p, q, n, r) in &[(1, 1, 4, 1.0), (1, 2, 5, 1.0), (2, 1, 5, 2.0)] {
        let s = make_warped::<f64>(p, q, n, r).unwrap();
        let pts = sample_points(&s.sample_box, 4, 21);
        let an = analyze(&invariants(&s, &pts, DerivStrategy::Exact), Tolerances::EXACT, s.ambient).unwrap();
        assert_eq!(an.verdict.branch, Branch::Warped);
        assert_eq!(an.verdict.s, 3);
        let w = warped_constants(p, q, n, r);
        // the third eigenvalue pattern survives the normal correction
        assert!((w.a[2] - (w.c * w.c - 1.0) / (2.0 * w.d)).abs() < 1e-15);
        let printed = warped_printed_eigenvalues(p, q, n, r);
        // the printed d carries an extra factor r²(r²+1)
        if p == q {
            assert!((printed[2] * r * r * (r * r + 1.0) - w.a[2]).abs() < 1e-12);
        }
    }
}

#[test]
fn example12_instance() {
    let (k, p, n) = (2, 1, 4);
    let s = make_example12_instance::<f64>(k, p, n).unwrap();
    let (r, _, _) = example12_radii(k, p, n);
    let x = [0.3, -0.2, 0.1, 0.4];
    let lc = invariants_from_lift(&s.immersion, &x, DerivStrategy::Exact).unwrap();
    assert!(lc.frame().unwrap().normalization_residual() < NULL_TOL);
    let p0 = lc.conformal.evaluate().unwrap();
    let a = eigenvalues(&p0.a);
    let h = 0.5 / (r * r);
    assert!(max_diff(&a, &[-h, -h, h, h]) < 1e-9);
}

#[test]
fn maximal_ads_product_has_constant_scalar_curvature() {
    let s = make_maximal_ads_product::<f64>(2, 5).unwrap();
    let rho: Vec<f64> = sample_points(&s.sample_box, 6, 2)
        .iter()
        .map(|x| {
            let j = jet(&s.immersion, x, 3, DerivStrategy::Exact).unwrap();
            MetricJet::new(induced_metric(j.components(), 5, s.immersion.ambient()))
                .unwrap()
                .scalar_curvature()
                .unwrap()
        })
        .collect();
    let spread = rho.iter().cloned().fold(f64::MIN, f64::max) - rho.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 1e-8);
}

#[test]
fn example12_component_validates_and_lifts() {
    let u = example12_component::<f64>(2, 1, 4).unwrap();
    let pts = sample_points(&[(-0.5, 0.5); 2], 4, 1);
    let rep = validate_product_component(&u, 4, ComponentKind::Ex12, &pts, Tolerances::EXACT).unwrap();
    assert!(rep.passed, "{:?}", rep.rejections);
    assert!(rep.laplacian < 1e-8 && rep.norm_h < 1e-8 && rep.scalar_curvature < 1e-8);
    // ℍ¹ × ℍ¹ is flat; the printed value −k(k−1)/r² − (n−1)/n is not
    assert!(rep.scalar_curvature_printed > 1.0);
    assert_eq!(rep.lift.unwrap().verdict.branch, Branch::Ex12Type);
}

#[test]
fn example11_validator_rejects_wrong_ambient() {
    let u = example12_component::<f64>(2, 1, 4).unwrap();
    let err = validate_example11_component(&u, 4, &[vec![0.0, 0.0]], Tolerances::EXACT).unwrap_err();
    assert!(matches!(err, Error::AmbientMismatch(_)));
}

#[test]
fn example11_validator_rejects_totally_geodesic_sphere() {
    // {x₀ = 0} ∩ 𝕊³₁(r): space-like, maximal, but h = 0
    let r = 1.3;
    let u = Immersion::closed_form(
        Signature::new(4, 1).unwrap(),
        AmbientConstraint::Sphere(r),
        vec![(-3.0, 3.0), (-1.5, 1.5)],
        move |x| {
            let mut s = sphere_chart(x, r);
            s.insert(0, x[0].scale(0.0));
            s
        },
    );
    let rep = validate_example11_component(&u, 4, &[vec![0.1, 0.2]], Tolerances::EXACT).unwrap();
    assert!(!rep.passed);
    assert!(rep.trace_h < 1e-12);
    assert!(rep.rejections.iter().any(|m| m.contains("norm condition")));
}
