//! Uniform phase-space meshes over [0,1]^D and CFL-constrained time steps.
//!
//! Nodes sit at x_j = j·h for j = 1..N with h = 1/N, so the domain is (0,1].
//! Indices outside [1,N] are ghost cells; the solvers decide what they hold.
//! Flat indices are row-major with the *first* coordinate fastest, fixed once
//! so matrix assembly and field storage agree bit-exactly.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform mesh over [0,1]^(dims_x + dims_p) plus time stepping parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    dims_x: usize,
    dims_p: usize,
    n_per_dim: usize,
    h: f64,
    dt: f64,
    n_steps: usize,
}

impl PhaseGrid {
    /// Build a grid with N points per dimension, time step `dt` and `n_steps` steps.
    ///
    /// `dims_x` is the number of spatial axes, `dims_p` the number of momentum
    /// axes (d for Hamilton-Jacobi, 1 for scalar hyperbolic, 0 for state-space
    /// transport where the spatial axes play the role of the full state).
    pub fn new(dims_x: usize, dims_p: usize, n_per_dim: usize, dt: f64, n_steps: usize) -> Result<Self> {
        let dims = dims_x + dims_p;
        if dims == 0 {
            return Err(Error::config("grid needs at least one dimension"));
        }
        if n_per_dim == 0 {
            return Err(Error::config("n_per_dim must be at least 1"));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::config(format!("dt must be positive and finite, got {dt}")));
        }
        if n_steps == 0 {
            return Err(Error::config("n_steps must be at least 1"));
        }
        // Total point count must be addressable.
        let mut total: usize = 1;
        for _ in 0..dims {
            total = total
                .checked_mul(n_per_dim)
                .ok_or_else(|| Error::config(format!("grid {n_per_dim}^{dims} exceeds addressable size")))?;
        }
        Ok(PhaseGrid {
            dims_x,
            dims_p,
            n_per_dim,
            h: 1.0 / n_per_dim as f64,
            dt,
            n_steps,
        })
    }

    pub fn dims_x(&self) -> usize {
        self.dims_x
    }
    pub fn dims_p(&self) -> usize {
        self.dims_p
    }
    pub fn dims_total(&self) -> usize {
        self.dims_x + self.dims_p
    }
    pub fn n_per_dim(&self) -> usize {
        self.n_per_dim
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }
    pub fn t_final(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }
    pub fn lambda(&self) -> f64 {
        self.dt / self.h
    }

    /// Total number of grid points N^(dims_x + dims_p).
    pub fn total_points(&self) -> usize {
        self.n_per_dim.pow(self.dims_total() as u32)
    }

    /// Number of points of the x-subgrid (N^dims_x).
    pub fn x_points(&self) -> usize {
        self.n_per_dim.pow(self.dims_x as u32)
    }

    /// Number of points of the p-subgrid (N^dims_p).
    pub fn p_points(&self) -> usize {
        self.n_per_dim.pow(self.dims_p as u32)
    }

    /// Flat index of a multi-index, first coordinate fastest.
    pub fn flatten(&self, idx: &MultiIndex) -> Result<usize> {
        if idx.coords.len() != self.dims_total() {
            return Err(Error::dimension(format!(
                "index has {} coords, grid has {} dims",
                idx.coords.len(),
                self.dims_total()
            )));
        }
        let mut flat = 0usize;
        let mut stride = 1usize;
        for &c in &idx.coords {
            if c < 1 || c > self.n_per_dim {
                return Err(Error::dimension(format!(
                    "coordinate {c} out of range [1, {}]",
                    self.n_per_dim
                )));
            }
            flat += (c - 1) * stride;
            stride *= self.n_per_dim;
        }
        Ok(flat)
    }

    /// Inverse of [`flatten`](Self::flatten).
    pub fn unflatten(&self, mut flat: usize) -> MultiIndex {
        let mut coords = Vec::with_capacity(self.dims_total());
        for _ in 0..self.dims_total() {
            coords.push(flat % self.n_per_dim + 1);
            flat /= self.n_per_dim;
        }
        MultiIndex { coords }
    }

    /// Physical coordinates h·(j_1, ..., j_D) of a node.
    pub fn coord(&self, idx: &MultiIndex) -> Vec<f64> {
        idx.coords.iter().map(|&c| c as f64 * self.h).collect()
    }

    /// Physical coordinates of a flat index, split into (x, p) parts.
    pub fn coord_split(&self, flat: usize) -> (Vec<f64>, Vec<f64>) {
        let idx = self.unflatten(flat);
        let pt = self.coord(&idx);
        let x = pt[..self.dims_x].to_vec();
        let p = pt[self.dims_x..].to_vec();
        (x, p)
    }
}

/// 1-based lattice index (j_1, ..., j_D), each coordinate in [1, N].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiIndex {
    pub coords: Vec<usize>,
}

impl MultiIndex {
    pub fn new(coords: Vec<usize>) -> Self {
        MultiIndex { coords }
    }
    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Largest stable explicit time step: dims_total·(Δt/h)·max_speed ≤ 1.
///
/// `max_speed` is the sup over the domain of max_i {|∂H/∂x_i|, |∂H/∂p_i|}
/// (or |F_i| for state-space transport). A zero speed makes the bound vacuous;
/// we cap at Δt = h so time stepping stays defined.
pub fn cfl_time_step(max_speed: f64, dims_total: usize, h: f64) -> Result<f64> {
    if !max_speed.is_finite() {
        return Err(Error::numerical("unbounded characteristic speed"));
    }
    if max_speed < 0.0 {
        return Err(Error::config(format!("max_speed must be nonnegative, got {max_speed}")));
    }
    if dims_total == 0 {
        return Err(Error::config("dims_total must be at least 1"));
    }
    if !(h > 0.0) {
        return Err(Error::config(format!("h must be positive, got {h}")));
    }
    if max_speed == 0.0 {
        return Ok(h);
    }
    Ok(h / (dims_total as f64 * max_speed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cfl_examples() {
        assert_eq!(cfl_time_step(1.0, 2, 0.01).unwrap(), 0.005);
        assert_eq!(cfl_time_step(0.0, 3, 0.1).unwrap(), 0.1);
        assert_eq!(cfl_time_step(2.0, 1, 0.1).unwrap(), 0.05);
    }

    #[test]
    fn cfl_rejects_bad_input() {
        assert!(cfl_time_step(f64::INFINITY, 1, 0.1).is_err());
        assert!(cfl_time_step(f64::NAN, 1, 0.1).is_err());
        assert!(cfl_time_step(1.0, 0, 0.1).is_err());
        assert!(cfl_time_step(1.0, 1, 0.0).is_err());
    }

    #[test]
    fn flatten_examples() {
        let g = PhaseGrid::new(1, 1, 4, 0.1, 1).unwrap();
        assert_eq!(g.flatten(&MultiIndex::new(vec![1, 1])).unwrap(), 0);
        assert_eq!(g.flatten(&MultiIndex::new(vec![2, 1])).unwrap(), 1);
        assert_eq!(g.flatten(&MultiIndex::new(vec![1, 2])).unwrap(), 4);
    }

    #[test]
    fn flatten_rejects_out_of_range() {
        let g = PhaseGrid::new(1, 1, 4, 0.1, 1).unwrap();
        assert!(g.flatten(&MultiIndex::new(vec![0, 1])).is_err());
        assert!(g.flatten(&MultiIndex::new(vec![5, 1])).is_err());
        assert!(g.flatten(&MultiIndex::new(vec![1])).is_err());
    }

    #[test]
    fn coord_examples() {
        let g = PhaseGrid::new(1, 0, 10, 0.1, 1).unwrap();
        assert_eq!(g.coord(&MultiIndex::new(vec![5])), vec![0.5]);
        assert_eq!(g.coord(&MultiIndex::new(vec![10])), vec![1.0]);
        let g = PhaseGrid::new(2, 0, 8, 0.1, 1).unwrap();
        assert_eq!(g.coord(&MultiIndex::new(vec![3, 6])), vec![0.375, 0.75]);
    }

    #[test]
    fn round_trip_exhaustive() {
        for &n in &[2usize, 3, 4, 8] {
            for dims in 1..=3usize {
                let g = PhaseGrid::new(dims, 0, n, 0.1, 1).unwrap();
                for flat in 0..g.total_points() {
                    let idx = g.unflatten(flat);
                    assert_eq!(g.flatten(&idx).unwrap(), flat);
                }
            }
        }
    }

    #[test]
    fn h_times_n_is_one() {
        for n in [3usize, 7, 64, 1000] {
            let g = PhaseGrid::new(1, 0, n, 0.1, 1).unwrap();
            let prod = g.h() * n as f64;
            assert!((prod - 1.0).abs() <= f64::EPSILON);
        }
    }

    #[test]
    fn t_final_consistent() {
        let g = PhaseGrid::new(1, 1, 8, 0.25, 12).unwrap();
        assert!((g.t_final() - 3.0).abs() < 1e-12 * 3.0);
    }

    #[test]
    fn oversized_grid_rejected() {
        assert!(PhaseGrid::new(9, 0, 1 << 16, 0.1, 1).is_err());
    }
}
