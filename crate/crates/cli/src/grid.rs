//! Tabulated immersions: per-node partial derivatives on a regular lattice.
//!
//! Nodes carry all partials up to order 4, keyed by the sorted list of
//! differentiation axes (`""`, `"0"`, `"0,1"`, ...). Order-5 jets are
//! obtained by differencing the order-4 data of neighbouring nodes, so they
//! exist only at nodes with two neighbours on each side.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use blaschke_core::differentiation::Parametrization;
use blaschke_core::error::{Error, Result as CoreResult};
use blaschke_core::jet::{multi_factorial, Jet, JetSpace};
use blaschke_core::{AmbientConstraint, AmbientKind, Immersion, Signature};
use serde::{Deserialize, Serialize};

use crate::report::to_json;
use crate::RunError;

pub const GRID_FORMAT_VERSION: u32 = 1;
/// Order of the tabulated partials.
pub const GRID_ORDER: usize = 4;
const SYMMETRY_TOL: f64 = 1e-8;
const CONSTRAINT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridConstraint {
    None,
    Sphere { radius: f64 },
    Hyperbolic { radius: f64 },
    LightCone,
}

impl GridConstraint {
    fn to_core(self) -> AmbientConstraint<f64> {
        match self {
            GridConstraint::None => AmbientConstraint::None,
            GridConstraint::Sphere { radius } => AmbientConstraint::Sphere(radius),
            GridConstraint::Hyperbolic { radius } => AmbientConstraint::Hyperbolic(radius),
            GridConstraint::LightCone => AmbientConstraint::LightCone,
        }
    }

    fn from_core(c: AmbientConstraint<f64>) -> Self {
        match c {
            AmbientConstraint::None => GridConstraint::None,
            AmbientConstraint::Sphere(radius) => GridConstraint::Sphere { radius },
            AmbientConstraint::Hyperbolic(radius) => GridConstraint::Hyperbolic { radius },
            AmbientConstraint::LightCone => GridConstraint::LightCone,
        }
    }
}

/// Catalog provenance, so that a reloaded grid can be compared with the
/// closed-form expectations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOrigin {
    pub id: String,
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridNode {
    pub index: Vec<usize>,
    pub partials: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFile {
    pub format_version: u32,
    pub chart_dim: usize,
    pub ambient_dim: usize,
    pub time_dim: usize,
    pub constraint: GridConstraint,
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub shape: Vec<usize>,
    #[serde(default)]
    pub source: Option<GridOrigin>,
    pub nodes: Vec<GridNode>,
}

fn key(axes: &[usize]) -> String {
    axes.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
}

fn axes_of(exponent: &[u8]) -> Vec<usize> {
    exponent
        .iter()
        .enumerate()
        .flat_map(|(a, &e)| std::iter::repeat(a).take(e as usize))
        .collect()
}

/// Validated grid, usable as an immersion at its nodes.
pub struct GridImmersion {
    chart_dim: usize,
    ambient: Signature,
    constraint: AmbientConstraint<f64>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    shape: Vec<usize>,
    domain: Vec<(f64, f64)>,
    /// Taylor coefficients (up to order 4) per node, indexed like `JetSpace`.
    coeffs: HashMap<Vec<usize>, Vec<Vec<f64>>>,
    pub source: Option<GridOrigin>,
}

impl GridImmersion {
    pub fn from_file(file: GridFile) -> Result<Self, RunError> {
        let bad = |m: String| RunError::Config(format!("grid: {m}"));
        if file.format_version != GRID_FORMAT_VERSION {
            return Err(bad(format!("unsupported format_version {}", file.format_version)));
        }
        let k = file.chart_dim;
        if k == 0 || file.origin.len() != k || file.spacing.len() != k || file.shape.len() != k {
            return Err(bad("origin, spacing and shape must have chart_dim entries".into()));
        }
        if file.spacing.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(bad("spacing must be positive".into()));
        }
        let ambient = Signature::new(file.ambient_dim, file.time_dim).map_err(|e| bad(e.to_string()))?;
        let constraint = file.constraint.to_core();
        let expected: usize = file.shape.iter().product();
        if file.nodes.len() != expected {
            return Err(bad(format!("{} nodes listed, shape implies {expected}", file.nodes.len())));
        }
        let space = JetSpace::for_vars(k);
        let count = space.len(GRID_ORDER);
        let mut coeffs = HashMap::new();
        for (ni, node) in file.nodes.iter().enumerate() {
            if node.index.len() != k || node.index.iter().zip(&file.shape).any(|(i, s)| i >= s) {
                return Err(bad(format!("node {ni}: index {:?} outside the lattice", node.index)));
            }
            let mut table: Vec<Option<Vec<f64>>> = vec![None; count];
            for (raw, v) in &node.partials {
                let mut axes = Vec::new();
                for part in raw.split(',').filter(|s| !s.trim().is_empty()) {
                    let a: usize = part
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("node {ni}: malformed partial key `{raw}`")))?;
                    if a >= k {
                        return Err(bad(format!("node {ni}: axis {a} in `{raw}` out of range")));
                    }
                    axes.push(a);
                }
                if axes.len() > GRID_ORDER {
                    continue;
                }
                if v.len() != file.ambient_dim || v.iter().any(|x| !x.is_finite()) {
                    return Err(bad(format!("node {ni}: partial `{raw}` must hold {} finite numbers", file.ambient_dim)));
                }
                let mut ex = vec![0u8; k];
                for &a in &axes {
                    ex[a] += 1;
                }
                let slot = space.index_of(&ex).expect("order checked");
                match &table[slot] {
                    Some(prev) => {
                        let gap = prev.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                        if gap > SYMMETRY_TOL {
                            return Err(bad(format!(
                                "node {ni}: mixed partials `{}` and `{raw}` differ by {gap:e}",
                                key(&{
                                    let mut s = axes.clone();
                                    s.sort();
                                    s
                                })
                            )));
                        }
                    }
                    None => table[slot] = Some(v.clone()),
                }
            }
            let mut per_component = vec![vec![0.0; count]; file.ambient_dim];
            for (slot, entry) in table.iter().enumerate() {
                let ex = space.exponent(slot);
                let v = entry
                    .as_ref()
                    .ok_or_else(|| bad(format!("node {ni}: missing partial `{}`", key(&axes_of(ex)))))?;
                let f = multi_factorial(ex) as f64;
                for (c, x) in per_component.iter_mut().zip(v) {
                    c[slot] = x / f;
                }
            }
            let value: Vec<f64> = per_component.iter().map(|c| c[0]).collect();
            let residual = constraint.residual(&value, ambient);
            let scale = constraint.target().map_or(1.0, |t: f64| t.abs().max(1.0));
            if residual > CONSTRAINT_TOL * scale {
                return Err(bad(format!("node {ni}: ambient constraint violated (residual {residual:e})")));
            }
            if coeffs.insert(node.index.clone(), per_component).is_some() {
                return Err(bad(format!("node {ni}: duplicate index {:?}", node.index)));
            }
        }
        let domain = (0..k)
            .map(|a| (file.origin[a], file.origin[a] + file.spacing[a] * (file.shape[a] - 1) as f64))
            .collect();
        Ok(GridImmersion {
            chart_dim: k,
            ambient,
            constraint,
            origin: file.origin,
            spacing: file.spacing,
            shape: file.shape,
            domain,
            coeffs,
            source: file.source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        let file: GridFile =
            serde_json::from_str(&text).map_err(|e| RunError::Config(format!("grid: malformed file: {e}")))?;
        Self::from_file(file)
    }

    pub fn ambient_kind(&self) -> AmbientKind {
        match self.constraint {
            AmbientConstraint::None => AmbientKind::Flat,
            AmbientConstraint::Sphere(_) => AmbientKind::DeSitter,
            AmbientConstraint::Hyperbolic(_) => AmbientKind::AntiDeSitter,
            AmbientConstraint::LightCone => AmbientKind::LightCone,
        }
    }

    pub fn node_point(&self, index: &[usize]) -> Vec<f64> {
        index
            .iter()
            .enumerate()
            .map(|(a, &i)| self.origin[a] + self.spacing[a] * i as f64)
            .collect()
    }

    /// Nodes with two neighbours on every side, in lexicographic order.
    pub fn interior_nodes(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self
            .coeffs
            .keys()
            .filter(|idx| idx.iter().zip(&self.shape).all(|(&i, &s)| i >= 2 && i + 2 < s))
            .cloned()
            .collect();
        out.sort();
        out
    }

    fn node_at(&self, x: &[f64]) -> CoreResult<Vec<usize>> {
        if x.len() != self.chart_dim {
            return Err(Error::DimensionMismatch {
                expected: self.chart_dim,
                found: x.len(),
            });
        }
        let mut idx = Vec::with_capacity(x.len());
        for a in 0..x.len() {
            let t = (x[a] - self.origin[a]) / self.spacing[a];
            let r = t.round();
            if (t - r).abs() > 1e-6 || r < 0.0 || r as usize >= self.shape[a] {
                return Err(Error::Unsupported("grid immersions are evaluated at lattice nodes only".into()));
            }
            idx.push(r as usize);
        }
        Ok(idx)
    }

    fn neighbour(&self, idx: &[usize], axis: usize, offset: i64) -> CoreResult<&Vec<Vec<f64>>> {
        let mut n = idx.to_vec();
        let i = idx[axis] as i64 + offset;
        if i < 0 || i as usize >= self.shape[axis] {
            return Err(Error::Unsupported(
                "order-5 jets need two grid neighbours on each side".into(),
            ));
        }
        n[axis] = i as usize;
        Ok(&self.coeffs[&n])
    }
}

impl Parametrization<f64> for GridImmersion {
    fn chart_dim(&self) -> usize {
        self.chart_dim
    }

    fn ambient(&self) -> Signature {
        self.ambient
    }

    fn constraint(&self) -> AmbientConstraint<f64> {
        self.constraint
    }

    fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    fn eval(&self, x: &[f64]) -> CoreResult<Vec<f64>> {
        let idx = self.node_at(x)?;
        Ok(self.coeffs[&idx].iter().map(|c| c[0]).collect())
    }

    fn exact_jet(&self, x: &[f64], order: usize) -> CoreResult<Vec<Jet<f64>>> {
        if order > GRID_ORDER + 1 {
            return Err(Error::OrderTooHigh(order));
        }
        let idx = self.node_at(x)?;
        let here = &self.coeffs[&idx];
        let space = JetSpace::for_vars(self.chart_dim);
        let mut out: Vec<Vec<f64>> = here.iter().map(|c| c[..space.len(order.min(GRID_ORDER))].to_vec()).collect();
        if order > GRID_ORDER {
            for slot in space.len(GRID_ORDER)..space.len(order) {
                let ex = space.exponent(slot).to_vec();
                // differentiate the order-4 partial along the last active axis
                let axis = (0..ex.len()).rev().find(|&a| ex[a] > 0).unwrap();
                let mut lower = ex.clone();
                lower[axis] -= 1;
                let ls = space.index_of(&lower).unwrap();
                let lf = multi_factorial(&lower) as f64;
                let f = multi_factorial(&ex) as f64;
                let h = self.spacing[axis];
                let (m2, m1) = (self.neighbour(&idx, axis, -2)?, self.neighbour(&idx, axis, -1)?);
                let (p1, p2) = (self.neighbour(&idx, axis, 1)?, self.neighbour(&idx, axis, 2)?);
                for (c, comp) in out.iter_mut().enumerate() {
                    let d = (-p2[c][ls] + 8.0 * p1[c][ls] - 8.0 * m1[c][ls] + m2[c][ls]) * lf / (12.0 * h);
                    comp.push(d / f);
                }
            }
        }
        Ok(out
            .into_iter()
            .map(|c| Jet::from_coeffs(&space, order, c))
            .collect())
    }
}

/// Tabulates `imm` on the lattice `center + spacing·(i − (m−1)/2)` with `m`
/// nodes per axis.
pub fn export_grid(
    imm: &Immersion<f64>,
    center: &[f64],
    spacing: f64,
    nodes_per_axis: usize,
    source: Option<GridOrigin>,
) -> Result<GridFile, RunError> {
    let k = imm.chart_dim();
    if center.len() != k || nodes_per_axis < 1 || !(spacing > 0.0) {
        return Err(RunError::Config("export: bad lattice specification".into()));
    }
    let half = (nodes_per_axis - 1) as f64 / 2.0;
    let origin: Vec<f64> = center.iter().map(|c| c - spacing * half).collect();
    let space = JetSpace::for_vars(k);
    let total = nodes_per_axis.pow(k as u32);
    let mut nodes = Vec::with_capacity(total);
    for flat in 0..total {
        let mut index = vec![0usize; k];
        let mut rest = flat;
        for a in (0..k).rev() {
            index[a] = rest % nodes_per_axis;
            rest /= nodes_per_axis;
        }
        let x: Vec<f64> = (0..k).map(|a| origin[a] + spacing * index[a] as f64).collect();
        let jets = imm.exact_jet(&x, GRID_ORDER).map_err(RunError::Core)?;
        let mut partials = BTreeMap::new();
        for slot in 0..space.len(GRID_ORDER) {
            let ex = space.exponent(slot);
            let f = multi_factorial(ex) as f64;
            partials.insert(key(&axes_of(ex)), jets.iter().map(|j| j.coeffs()[slot] * f).collect());
        }
        nodes.push(GridNode { index, partials });
    }
    let sig = imm.ambient();
    Ok(GridFile {
        format_version: GRID_FORMAT_VERSION,
        chart_dim: k,
        ambient_dim: sig.total_dim(),
        time_dim: sig.time_index(),
        constraint: GridConstraint::from_core(imm.constraint()),
        origin,
        spacing: vec![spacing; k],
        shape: vec![nodes_per_axis; k],
        source,
        nodes,
    })
}

pub fn write_grid(file: &GridFile, path: &Path) -> Result<(), RunError> {
    std::fs::write(path, to_json(file)?).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
}
