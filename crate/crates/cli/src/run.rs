use std::path::Path;
use std::time::Instant;

use blaschke_core::catalog::{self, validate_product_component, ComponentKind, ComponentReport, Expected};
use blaschke_core::checks::{analyze, point_residuals};
use blaschke_core::lift::invariants_from_spaceform_lift;
use blaschke_core::linalg::symmetric_eigen;
use blaschke_core::spaceform::{SpaceFormJets, SpaceFormOptions};
use blaschke_core::{AmbientConstraint, AmbientKind, Branch, DerivStrategy, Immersion, PointInvariants, Tolerances};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Deriv, RunConfig, Source};
use crate::grid::GridImmersion;
use crate::report::*;
use crate::RunError;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "BLASCHKE_THREADS";

struct Resolved {
    id: String,
    params: std::collections::BTreeMap<String, f64>,
    immersion: Immersion<f64>,
    ambient: AmbientKind,
    expected: Option<Expected>,
    points: Vec<Vec<f64>>,
}

fn seeded_box(bx: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| bx.iter().map(|&(a, b)| rng.gen_range(a..b)).collect())
        .collect()
}

/// Up to `count` interior nodes, chosen by the seed.
pub fn grid_sample_points(grid: &GridImmersion, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, RunError> {
    let nodes = grid.interior_nodes();
    if nodes.is_empty() {
        return Err(RunError::Config(
            "grid has no interior nodes (two neighbours per side are needed)".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = sample(&mut rng, nodes.len(), count.min(nodes.len())).into_vec();
    Ok(picks.into_iter().map(|i| grid.node_point(&nodes[i])).collect())
}

fn resolve(config: &RunConfig) -> Result<Resolved, RunError> {
    match &config.source {
        Source::Catalog { id, params } => {
            let s = catalog::build::<f64>(id, params).map_err(|e| RunError::Config(e.to_string()))?;
            Ok(Resolved {
                points: seeded_box(&s.sample_box, config.samples, config.seed),
                id: s.id,
                params: s.params,
                immersion: s.immersion,
                ambient: s.ambient,
                expected: s.expected,
            })
        }
        Source::Grid { path } => {
            let grid = GridImmersion::load(Path::new(path))?;
            let points = grid_sample_points(&grid, config.samples, config.seed)?;
            let ambient = grid.ambient_kind();
            let (id, params, expected) = match &grid.source {
                Some(src) => {
                    let s = catalog::build::<f64>(&src.id, &src.params).map_err(|e| RunError::Config(e.to_string()))?;
                    (src.id.clone(), src.params.clone(), s.expected)
                }
                None => ("grid".to_string(), Default::default(), None),
            };
            Ok(Resolved {
                id,
                params,
                immersion: Immersion::new(grid),
                ambient,
                expected,
                points,
            })
        }
    }
}

struct Evaluated {
    record: SampleRecord,
    invariants: PointInvariants<f64>,
    cross: Option<CrossPipeline>,
}

fn eigen(t: &blaschke_core::SymTensor2f64) -> Vec<f64> {
    symmetric_eigen(&t.to_mat()).0
}

fn evaluate(
    imm: &Immersion<f64>,
    index: usize,
    x: &[f64],
    strategy: DerivStrategy<f64>,
    options: SpaceFormOptions,
) -> blaschke_core::Result<Evaluated> {
    let (inv, tau, cross) = if imm.constraint() == AmbientConstraint::LightCone {
        let lc = blaschke_core::lift::invariants_from_lift(imm, x, strategy)?;
        (lc.conformal.evaluate()?, None, None)
    } else {
        let sf = SpaceFormJets::at(imm, x, strategy, options)?;
        let inv = sf.conformal.evaluate()?;
        let cross = if strategy.is_exact() {
            let lc = invariants_from_spaceform_lift(imm, x, options)?.conformal.evaluate()?;
            Some(CrossPipeline {
                g: inv.g.max_abs_diff(&lc.g),
                a: inv.a.max_abs_diff(&lc.a),
                b: inv.b.max_abs_diff(&lc.b),
                c_norm: (inv.c_norm() - lc.c_norm()).abs(),
            })
        } else {
            None
        };
        (inv, Some(sf.tau_data().tau), cross)
    };
    Ok(Evaluated {
        record: SampleRecord {
            index,
            point: x.to_vec(),
            tau,
            a_eigenvalues: eigen(&inv.a),
            b_eigenvalues: eigen(&inv.b),
            c_norm: inv.c_norm(),
            residuals: point_residuals(&inv),
        },
        invariants: inv,
        cross,
    })
}

/// Runs `f` on a pool sized by `BLASCHKE_THREADS` (if set).
pub fn with_pool<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R, RunError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| RunError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?,
        Err(_) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RunError::Config(e.to_string()))?;
    Ok(pool.install(f))
}

fn spread(values: &[f64], want: &[f64]) -> f64 {
    values.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn expected_match(e: &Expected, samples: &[SampleRecord], branch: Branch, tol: f64) -> ExpectedMatch {
    let expand = |v: &[(f64, usize)], sign: f64| {
        let mut out: Vec<f64> = v
            .iter()
            .flat_map(|&(x, m)| std::iter::repeat(sign * x).take(m))
            .collect();
        out.sort_by(|a, b| a.total_cmp(b));
        out
    };
    let (want_a, bp, bm) = (expand(&e.a, 1.0), expand(&e.b, 1.0), expand(&e.b, -1.0));
    let mut a = 0.0f64;
    let mut b = 0.0f64;
    for s in samples {
        a = a.max(spread(&s.a_eigenvalues, &want_a));
        b = b.max(spread(&s.b_eigenvalues, &bp).min(spread(&s.b_eigenvalues, &bm)));
    }
    let branch_ok = e.branch.is_none_or(|want| want == branch);
    ExpectedMatch {
        a,
        b,
        branch: e.branch,
        passed: a <= tol && b <= tol && branch_ok,
    }
}

pub fn run_check(config: &RunConfig) -> Result<Report, RunError> {
    config.validate()?;
    let start = Instant::now();
    let r = resolve(config)?;
    let strategy = match config.deriv {
        Deriv::Exact => DerivStrategy::Exact,
        Deriv::Fd => DerivStrategy::Fd { h0: config.fd_step },
    };
    let options = SpaceFormOptions {
        flip_normal: false,
        regularity: config.regularity,
    };
    let tol = config.tolerances();
    let imm = &r.immersion;
    let results: Vec<(usize, Result<Evaluated, String>)> = with_pool(|| {
        r.points
            .par_iter()
            .enumerate()
            .map(|(i, x)| (i, evaluate(imm, i, x, strategy, options).map_err(|e| e.to_string())))
            .collect()
    })?;
    let mut samples = Vec::new();
    let mut invariants = Vec::new();
    let mut skipped = Vec::new();
    let mut cross: Option<CrossPipeline> = None;
    for (i, res) in results {
        match res {
            Ok(ev) => {
                samples.push(ev.record);
                invariants.push(ev.invariants);
                if let Some(c) = ev.cross {
                    cross = Some(cross.map_or(c, |acc| acc.max(c)));
                }
            }
            Err(error) => skipped.push(SkippedSample {
                index: i,
                point: r.points[i].clone(),
                error,
            }),
        }
    }
    if 2 * skipped.len() > r.points.len() || invariants.is_empty() {
        return Err(RunError::Aborted {
            failed: skipped.len(),
            total: r.points.len(),
            first: skipped.first().map(|s| s.error.clone()).unwrap_or_default(),
        });
    }
    let analysis = analyze(&invariants, tol, r.ambient).map_err(RunError::Core)?;
    let expected_match = r
        .expected
        .as_ref()
        .map(|e| expected_match(e, &samples, analysis.verdict.branch, tol.cluster));
    let sig = imm.ambient();
    Ok(Report {
        format_version: FORMAT_VERSION,
        tool: Tool::current(),
        config: config.clone(),
        surface: SurfaceInfo {
            id: r.id,
            params: r.params,
            chart_dim: imm.chart_dim(),
            signature: sig,
            ambient: r.ambient,
            expected: r.expected,
        },
        samples,
        skipped,
        cross_pipeline: cross,
        summary: analysis.summary,
        eigenstructure: analysis.eigenstructure,
        verdict: analysis.verdict,
        expected_match,
        wall_time: Some(start.elapsed().as_secs_f64()),
    })
}

/// Writes the configured outputs. `timing` keeps the wall time in the JSON,
/// which makes it run-dependent.
pub fn emit(report: &Report, config: &RunConfig, timing: bool) -> Result<(), RunError> {
    let mut r = report.clone();
    if !timing {
        r.wall_time = None;
    }
    if let Some(path) = &config.outputs.json {
        std::fs::write(path, to_json(&r)?).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &config.outputs.csv {
        let f = std::fs::File::create(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        write_csv(&r, f)?;
    }
    Ok(())
}

/// Validates a tabulated light-cone product component.
pub fn run_validate_component(
    grid: GridImmersion,
    n: usize,
    kind: ComponentKind,
    samples: usize,
    seed: u64,
) -> Result<ComponentReport, RunError> {
    let points = grid_sample_points(&grid, samples, seed)?;
    let imm = Immersion::new(grid);
    validate_product_component(&imm, n, kind, &points, Tolerances::EXACT).map_err(RunError::Core)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_points_are_reproducible() {
        let b = [(0.0, 1.0), (-2.0, 2.0)];
        assert_eq!(seeded_box(&b, 4, 7), seeded_box(&b, 4, 7));
        assert_ne!(seeded_box(&b, 4, 7), seeded_box(&b, 4, 8));
        assert!(seeded_box(&b, 50, 1).iter().all(|p| p[1] >= -2.0 && p[1] < 2.0));
    }

    #[test]
    fn unknown_surface_is_a_config_error() {
        let c = RunConfig::catalog("no_such_surface", &[]);
        assert!(matches!(run_check(&c), Err(RunError::Config(_))));
    }

    #[test]
    fn flat_cylinder_exact_run() {
        let mut c = RunConfig::catalog("cylinder_flat", &[("k", 1.0), ("n", 3.0)]);
        c.samples = 4;
        let r = run_check(&c).unwrap();
        assert_eq!(r.verdict.branch, Branch::CylinderFlat);
        assert_eq!(r.exit_code(), 0);
        assert!(r.cross_pipeline.unwrap().worst() < 1e-9);
    }
}
