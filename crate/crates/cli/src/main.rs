use std::path::PathBuf;
use std::process::ExitCode;

use blaschke_cli::config::parse_params;
use blaschke_cli::grid::{export_grid, write_grid, GridImmersion, GridOrigin};
use blaschke_cli::report::to_json;
use blaschke_cli::run::run_validate_component;
use blaschke_cli::{emit, run_check, Deriv, Outputs, RunConfig, RunError, Source};
use blaschke_core::catalog::{self, ComponentKind};
use clap::{Parser, Subcommand, ValueEnum};

const COMPONENT_ID: &str = "example12_component";

#[derive(Parser)]
#[command(name = "blaschke", version, about = "Conformal invariants of space-like hypersurfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Ex11,
    Ex12,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog surfaces and their parameters.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Sample a surface, compute invariants and residuals, classify.
    Check {
        #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
        surface: Option<String>,
        /// Tabulated immersion instead of a catalog surface.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Surface parameter as name=value (repeatable).
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Deriv::Exact)]
        deriv: Deriv,
        #[arg(long, default_value_t = 1e-2)]
        fd_step: f64,
        #[arg(long)]
        tol_cluster: Option<f64>,
        #[arg(long)]
        tol_residual: Option<f64>,
        #[arg(long, default_value_t = 1e-10)]
        regularity: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Include the wall time in the JSON (breaks byte-identical output).
        #[arg(long)]
        timing: bool,
    },
    /// Check a tabulated component of a light-cone product.
    ValidateComponent {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Kind::Ex11)]
        kind: Kind,
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate a catalog surface (or `example12_component`, the maximal
    /// first factor of the light-cone product) as a grid file.
    ExportGrid {
        #[arg(long)]
        surface: String,
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long, default_value_t = 7)]
        nodes: usize,
        #[arg(long, default_value_t = 0.05)]
        spacing: f64,
        /// Lattice centre (comma separated); defaults to the sampling box centre.
        #[arg(long, value_delimiter = ',')]
        center: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn list(json: bool) -> Result<i32, RunError> {
    if json {
        print!("{}", to_json(&catalog::ENTRIES)?);
        return Ok(0);
    }
    for e in catalog::ENTRIES {
        println!("{:<22} {}", e.id, e.summary);
        for p in e.params {
            let default = e.defaults.iter().find(|d| d.0 == p.name).map(|d| d.1);
            println!(
                "    {:<3} {:<8} {:<18} default {}",
                p.name,
                if p.integer { "integer" } else { "real" },
                p.range,
                default.map_or("-".into(), |d| d.to_string())
            );
        }
        println!("    expected branch: {}", e.branch.label());
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<i32, RunError> {
    match cli.command {
        Command::List { json } => list(json),
        Command::Check {
            surface,
            grid,
            params,
            samples,
            seed,
            deriv,
            fd_step,
            tol_cluster,
            tol_residual,
            regularity,
            out,
            csv,
            timing,
        } => {
            let source = match (surface, grid) {
                (Some(id), None) => Source::Catalog {
                    id,
                    params: parse_params(&params)?,
                },
                (None, Some(path)) => {
                    if !params.is_empty() {
                        return Err(RunError::Config("--param applies to catalog surfaces only".into()));
                    }
                    Source::Grid {
                        path: path.display().to_string(),
                    }
                }
                _ => unreachable!("enforced by clap"),
            };
            let config = RunConfig {
                source,
                samples,
                seed,
                deriv,
                fd_step,
                tol_cluster,
                tol_residual,
                regularity,
                outputs: Outputs { json: out, csv },
            };
            let report = run_check(&config)?;
            emit(&report, &config, timing)?;
            let code = report.exit_code();
            eprintln!(
                "{}: {} (s = {}, {} samples, {} skipped)",
                report.surface.id,
                report.verdict.branch.label(),
                report.verdict.s,
                report.samples.len(),
                report.skipped.len()
            );
            for f in report.summary.failures() {
                eprintln!("  residual over tolerance: {f}");
            }
            for r in report.verdict.reasons.iter().chain(&report.verdict.flags) {
                eprintln!("  {r}");
            }
            if let Some(m) = report.expected_match.as_ref().filter(|m| !m.passed) {
                eprintln!("  differs from closed form: |ΔA| = {:e}, |ΔB| = {:e}", m.a, m.b);
            }
            Ok(code)
        }
        Command::ValidateComponent {
            grid,
            n,
            kind,
            samples,
            seed,
            out,
        } => {
            let kind = match kind {
                Kind::Ex11 => ComponentKind::Ex11,
                Kind::Ex12 => ComponentKind::Ex12,
            };
            let g = GridImmersion::load(&grid)?;
            let report = match run_validate_component(g, n, kind, samples, seed) {
                Err(RunError::Core(e @ blaschke_core::Error::AmbientMismatch(_))) => {
                    eprintln!("rejected: {e}");
                    return Ok(3);
                }
                r => r?,
            };
            if let Some(path) = out {
                std::fs::write(&path, to_json(&report)?).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
            }
            if report.passed {
                eprintln!("component accepted");
                Ok(0)
            } else {
                for r in &report.rejections {
                    eprintln!("rejected: {r}");
                }
                Ok(3)
            }
        }
        Command::ExportGrid {
            surface,
            params,
            nodes,
            spacing,
            center,
            out,
        } => {
            let params = parse_params(&params)?;
            let config = |e: blaschke_core::Error| RunError::Config(e.to_string());
            let (imm, origin, source) = if surface == COMPONENT_ID {
                let get = |k: &str, d: f64| params.get(k).copied().unwrap_or(d) as usize;
                let imm = catalog::example12_component::<f64>(get("k", 2.0), get("p", 1.0), get("n", 4.0)).map_err(config)?;
                let centre = vec![0.0; imm.chart_dim()];
                (imm, centre, None)
            } else {
                let s = catalog::build::<f64>(&surface, &params).map_err(config)?;
                let centre = s.sample_box.iter().map(|(a, b)| 0.5 * (a + b)).collect();
                let source = GridOrigin {
                    id: s.id.clone(),
                    params: s.params.clone(),
                };
                (s.immersion, centre, Some(source))
            };
            let file = export_grid(&imm, &center.unwrap_or(origin), spacing, nodes, source)?;
            write_grid(&file, &out)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
