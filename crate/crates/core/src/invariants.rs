//! The conformal invariants `(g, A, B, C)` as jet fields, and their
//! evaluation at the expansion point in a `g`-orthonormal frame.

use crate::error::Result;
use crate::geometry::{JetMat, JetVec, MetricJet, Tensor3, Tensor4};
use crate::jet::Jet;
use crate::linalg::{Mat, SymTensor2};
use crate::Real;

/// Conformal metric, Blaschke tensor, conformal second fundamental form and
/// conformal form, expanded around one chart point (chart components).
#[derive(Debug, Clone)]
pub struct ConformalJets<T> {
    pub metric: MetricJet<T>,
    pub blaschke: JetMat<T>,
    pub second: JetMat<T>,
    pub form: JetVec<T>,
}

/// Invariants at a point, every tensor in a `g`-orthonormal frame.
///
/// Derivative tensors are `None` when the jets are too shallow to supply them.
#[derive(Debug, Clone)]
pub struct PointInvariants<T> {
    /// Chart components of `g`.
    pub g: SymTensor2<T>,
    /// Frame vectors (columns) in chart coordinates.
    pub frame: Mat<T>,
    pub a: SymTensor2<T>,
    pub b: SymTensor2<T>,
    pub c: Vec<T>,
    /// `∇_k A_{ij}` stored as `get(i, j, k)`.
    pub grad_a: Option<Tensor3<T>>,
    pub grad_b: Option<Tensor3<T>>,
    /// `∇_j C_i` stored at `(i, j)`.
    pub grad_c: Option<Mat<T>>,
    pub riemann: Option<Tensor4<T>>,
}

impl<T: Real> ConformalJets<T> {
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn evaluate(&self) -> Result<PointInvariants<T>> {
        let e = self.metric.frame()?;
        let g = self.metric.value();
        let n = self.dim();
        let c_chart: Vec<T> = self.form.iter().map(Jet::value).collect();
        let c = (0..n)
            .map(|i| (0..n).fold(T::zero(), |s, a| s + e.get(a, i) * c_chart[a]))
            .collect();
        let grad_a = self
            .metric
            .covariant_derivative_sym(&self.blaschke)
            .ok()
            .map(|t| t.in_frame(&e));
        let grad_b = self
            .metric
            .covariant_derivative_sym(&self.second)
            .ok()
            .map(|t| t.in_frame(&e));
        let grad_c = self
            .metric
            .covariant_derivative_form(&self.form)
            .ok()
            .map(|m| e.transpose().matmul(&m).matmul(&e));
        let riemann = self.metric.riemann_chart().ok().map(|r| r.in_frame(&e));
        Ok(PointInvariants {
            a: self.blaschke.value_sym().in_frame(&e),
            b: self.second.value_sym().in_frame(&e),
            g,
            frame: e,
            c,
            grad_a,
            grad_b,
            grad_c,
            riemann,
        })
    }
}

impl<T: Real> PointInvariants<T> {
    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn c_norm(&self) -> T {
        self.c.iter().fold(T::zero(), |s, &x| s + x * x).sqrt()
    }

    /// Invariants of the oppositely oriented hypersurface.
    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        out.b = self.b.scale(-T::one());
        out.c = self.c.iter().map(|&x| -x).collect();
        out.grad_b = self
            .grad_b
            .as_ref()
            .map(|t| Tensor3::from_fn(t.dim(), |i, j, k| -t.get(i, j, k)));
        out.grad_c = self.grad_c.as_ref().map(|m| {
            Mat::from_fn(m.rows(), m.cols(), |i, j| -m.get(i, j))
        });
        out
    }
}
