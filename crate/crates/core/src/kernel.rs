//! Smoothed delta functions δ_ω for initial-data mollification.
//!
//! δ_ω(x) = (1/ω)·β(x/ω) for |x| ≤ ω and 0 outside, with β either the hat
//! 1−|x| or the cosine ½(1+cos πx). Both integrate to one analytically and
//! both sum to one exactly on a node-aligned lattice with ω = m·h.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelShape {
    Hat,
    Cosine,
}

/// Compactly supported unit-mass mollifier of half-width ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaKernel {
    omega: f64,
    shape: KernelShape,
}

/// Result of the lattice mass check.
#[derive(Debug, Clone, Copy)]
pub struct MassReport {
    pub value: f64,
    /// Fewer than 2 lattice points inside the support.
    pub under_resolved: bool,
}

impl DeltaKernel {
    pub fn new(shape: KernelShape, omega: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::config(format!("kernel width must be positive, got {omega}")));
        }
        Ok(DeltaKernel { omega, shape })
    }

    /// Width from the error-balance rule ω = (dims_total·h)^(1/3), cosine shape.
    pub fn balanced(dims_total: usize, h: f64) -> Result<Self> {
        DeltaKernel::new(KernelShape::Cosine, (dims_total as f64 * h).cbrt())
    }

    /// Width as a mesh multiple ω = m·h.
    pub fn mesh_multiple(shape: KernelShape, m: f64, h: f64) -> Result<Self> {
        DeltaKernel::new(shape, m * h)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn shape(&self) -> KernelShape {
        self.shape
    }

    /// δ_ω(x). Zero outside the closed support, exactly.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::numerical(format!("kernel argument not finite: {x}")));
        }
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax > self.omega {
            return 0.0;
        }
        let r = x / self.omega;
        let beta = match self.shape {
            KernelShape::Hat => 1.0 - r.abs(),
            KernelShape::Cosine => 0.5 * (1.0 + (std::f64::consts::PI * r).cos()),
        };
        beta / self.omega
    }

    /// Tensor product Π_i δ_ω(v_i).
    pub fn eval_nd(&self, v: &[f64]) -> Result<f64> {
        if v.is_empty() {
            return Err(Error::dimension("eval_nd needs at least one component"));
        }
        let mut prod = 1.0;
        for &x in v {
            if !x.is_finite() {
                return Err(Error::numerical(format!("kernel argument not finite: {x}")));
            }
            prod *= self.eval_unchecked(x);
            if prod == 0.0 {
                return Ok(0.0);
            }
        }
        Ok(prod)
    }

    /// h·Σ_j δ_ω(j·h) over the lattice points inside the support, kernel
    /// centered on a node. Exactly 1 for node-aligned widths ω = m·h.
    pub fn discrete_mass(&self, h: f64) -> Result<MassReport> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::config(format!("h must be positive, got {h}")));
        }
        let reach = (self.omega / h).floor() as i64;
        let mut sum = 0.0;
        let mut inside = 0usize;
        for j in -reach..=reach {
            let v = self.eval_unchecked(j as f64 * h);
            if v != 0.0 {
                inside += 1;
            }
            sum += v;
        }
        Ok(MassReport {
            value: h * sum,
            under_resolved: inside < 2,
        })
    }
}
