//! Report schema and its serializations.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which round-trips
//! every finite double; non-finite values become `null`.

use std::collections::BTreeMap;
use std::io::{self, Write};

use blaschke_core::catalog::Expected;
use blaschke_core::checks::{ClassificationVerdict, Eigenstructure, PointResiduals, ResidualSummary};
use blaschke_core::{AmbientKind, Branch, Signature};
use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::RunConfig;
use crate::RunError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct Tool {
    pub name: String,
    pub version: String,
}

impl Tool {
    pub fn current() -> Self {
        Tool {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct SurfaceInfo {
    pub id: String,
    pub params: BTreeMap<String, f64>,
    pub chart_dim: usize,
    pub signature: Signature,
    pub ambient: AmbientKind,
    pub expected: Option<Expected>,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub point: Vec<f64>,
    /// `None` for direct light-cone input.
    pub tau: Option<f64>,
    pub a_eigenvalues: Vec<f64>,
    pub b_eigenvalues: Vec<f64>,
    pub c_norm: f64,
    pub residuals: PointResiduals,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct SkippedSample {
    pub index: usize,
    pub point: Vec<f64>,
    pub error: String,
}

/// Largest disagreement between the space-form and light-cone pipelines.
#[derive(Debug, Clone, Copy, PartialEq, SerializeDerive, Deserialize)]
pub struct CrossPipeline {
    pub g: f64,
    pub a: f64,
    pub b: f64,
    pub c_norm: f64,
}

impl CrossPipeline {
    pub fn max(self, o: CrossPipeline) -> CrossPipeline {
        CrossPipeline {
            g: self.g.max(o.g),
            a: self.a.max(o.a),
            b: self.b.max(o.b),
            c_norm: self.c_norm.max(o.c_norm),
        }
    }

    pub fn worst(&self) -> f64 {
        self.g.max(self.a).max(self.b).max(self.c_norm)
    }
}

/// Comparison with the catalog's closed forms.
#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct ExpectedMatch {
    pub a: f64,
    /// Up to the global sign fixed by the normal orientation.
    pub b: f64,
    pub branch: Option<Branch>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct Report {
    pub format_version: u32,
    pub tool: Tool,
    pub config: RunConfig,
    pub surface: SurfaceInfo,
    pub samples: Vec<SampleRecord>,
    pub skipped: Vec<SkippedSample>,
    pub cross_pipeline: Option<CrossPipeline>,
    pub summary: ResidualSummary,
    pub eigenstructure: Eigenstructure,
    pub verdict: ClassificationVerdict,
    pub expected_match: Option<ExpectedMatch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

impl Report {
    /// Exit status: 0 match, 2 indeterminate, 3 residual or expectation failure.
    pub fn exit_code(&self) -> i32 {
        if !self.summary.failures().is_empty() {
            3
        } else if self.verdict.branch == Branch::Indeterminate {
            2
        } else if self.expected_match.as_ref().is_some_and(|m| !m.passed) {
            3
        } else {
            0
        }
    }
}

/// Pretty JSON with fixed-width scientific floats.
struct SciFormatter(PrettyFormatter<'static>);

macro_rules! delegate {
    ($($name:ident),*) => {$(
        fn $name<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.0.$name(w)
        }
    )*};
}

impl Formatter for SciFormatter {
    delegate!(begin_array, end_array, begin_object, end_object, end_array_value, end_object_value, begin_object_value);

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{}", format_float(v))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

/// `{:.16e}` for finite values; callers handle the rest.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json<S: Serialize>(value: &S) -> Result<String, RunError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| RunError::Io(e.to_string()))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn from_json(text: &str) -> Result<Report, RunError> {
    serde_json::from_str(text).map_err(|e| RunError::Config(format!("malformed report: {e}")))
}

fn opt(v: Option<f64>) -> String {
    v.filter(|x| x.is_finite()).map(format_float).unwrap_or_default()
}

/// One row per evaluated sample.
pub fn write_csv<W: Write>(report: &Report, out: W) -> Result<(), RunError> {
    let dim = report.surface.chart_dim;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["index".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    header.push("tau".into());
    header.extend((0..dim).map(|i| format!("a{i}")));
    header.extend((0..dim).map(|i| format!("b{i}")));
    for h in [
        "c_norm",
        "codazzi_a",
        "codazzi_b",
        "ricci_c",
        "gauss",
        "trace_b",
        "norm_b",
        "parallel_a",
        "parallel_b",
    ] {
        header.push(h.into());
    }
    let io = |e: csv::Error| RunError::Io(e.to_string());
    w.write_record(&header).map_err(io)?;
    for s in &report.samples {
        let r = &s.residuals;
        let mut row = vec![s.index.to_string()];
        row.extend(s.point.iter().map(|&x| format_float(x)));
        row.push(opt(s.tau));
        row.extend(s.a_eigenvalues.iter().map(|&x| format_float(x)));
        row.extend(s.b_eigenvalues.iter().map(|&x| format_float(x)));
        row.push(format_float(s.c_norm));
        for v in [r.codazzi_a, r.codazzi_b, r.ricci_c, r.gauss, Some(r.trace_b), Some(r.norm_b), r.parallel_a, r.parallel_b] {
            row.push(opt(v));
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| RunError::Io(e.to_string()))
}
