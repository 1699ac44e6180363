//! Block lower-triangular system assembly, forward substitution, Hermitian
//! dilation, and sparsity/condition-number measurement.
//!
//! The full operator has identity diagonal blocks and stencil blocks K on the
//! subdiagonal, so applying its inverse to (ψ₀, 0, …, 0) reproduces the time
//! stepper history slot by slot: slot 1 holds ψ⁰ and slot b holds the state
//! after b−1 steps. The final block row either repeats the stencil or couples
//! (−𝟙, 𝟙), which duplicates the previous slot; the latter matches the
//! published layout and changes the condition number slightly.

use crate::error::{Error, Result};
use crate::field::LevelSetField;
use crate::grid::PhaseGrid;
use crate::liouville::{step, StencilCoeffs};
use std::io::Write;
use std::path::Path;

/// Compressed-row sparse matrix with sorted column indices.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut vals = Vec::with_capacity(entries.len());
        for &(r, c, v) in &entries {
            debug_assert!(r < nrows && c < ncols);
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            vals.push(v);
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn max_nnz_per_row(&self) -> usize {
        (0..self.nrows)
            .map(|r| self.row_ptr[r + 1] - self.row_ptr[r])
            .max()
            .unwrap_or(0)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = 0.0;
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[i] * x[self.col_idx[i]];
            }
            y[r] = acc;
        }
    }

    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        y.fill(0.0);
        for r in 0..self.nrows {
            let xr = x[r];
            if xr == 0.0 {
                continue;
            }
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.col_idx[i]] += self.vals[i] * xr;
            }
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let entries: Vec<(usize, usize, f64)> = (0..self.nrows)
            .flat_map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |i| (self.col_idx[i], r, self.vals[i]))
            })
            .collect();
        CsrMatrix::from_triplets(self.ncols, self.nrows, entries)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        for i in self.row_ptr[r]..self.row_ptr[r + 1] {
            if self.col_idx[i] == c {
                return self.vals[i];
            }
        }
        0.0
    }

    /// max_{i,j} |A_ij|.
    pub fn max_abs_entry(&self) -> f64 {
        self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Coordinate text export: `row col value` per line.
    pub fn write_coordinate_text(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for r in 0..self.nrows {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                writeln!(f, "{} {} {}", r, self.col_idx[i], crate::util::fmt_f64(self.vals[i]))?;
            }
        }
        Ok(())
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.col_idx[i])] = self.vals[i];
            }
        }
        m
    }
}

/// Final block row convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LastRow {
    /// (−𝟙, 𝟙): the last slot duplicates the previous one.
    FinalCopy,
    /// (K, 𝟙): every interior row applies the stencil.
    Stencil,
}

/// The assembled block lower-triangular operator and its metadata.
pub struct TransportSystem {
    pub full: CsrMatrix,
    pub k_block: CsrMatrix,
    pub block_size: usize,
    pub n_blocks: usize,
    pub lambda: f64,
    pub last_row: LastRow,
    pub grid: PhaseGrid,
}

/// Hard cap on assembled state size.
pub const ASSEMBLY_CAP: usize = 1 << 24;

/// Assemble the system from the same stencil coefficients the stepper uses.
pub fn assemble_system(coeffs: &StencilCoeffs, last_row: LastRow) -> Result<TransportSystem> {
    let grid = &coeffs.grid;
    let n = grid.n_per_dim();
    let dims = grid.dims_total();
    let block = grid.total_points();
    let n_blocks = grid.n_steps();
    let total = block
        .checked_mul(n_blocks)
        .filter(|&t| t <= ASSEMBLY_CAP)
        .ok_or_else(|| {
            Error::config(format!(
                "system too large: N_t·N^dims = {n_blocks}·{block} exceeds the cap {ASSEMBLY_CAP}"
            ))
        })?;
    let lam = coeffs.lambda;

    // K = −I + λ·L, one row per cell, built from the shared coefficients.
    let mut stride = vec![1usize; dims];
    for k in 1..dims {
        stride[k] = stride[k - 1] * n;
    }
    let mut k_entries: Vec<(usize, usize, f64)> = Vec::with_capacity(block * (2 * dims + 1));
    for flat in 0..block {
        let mut diag = -1.0;
        for k in 0..dims {
            let (cp, cs, cm) = coeffs.at(k, flat);
            diag += lam * cs;
            let ck = (flat / stride[k]) % n;
            if cp != 0.0 {
                if ck + 1 < n {
                    k_entries.push((flat, flat + stride[k], lam * cp));
                } else if wraps(coeffs, k) {
                    k_entries.push((flat, flat - (n - 1) * stride[k], lam * cp));
                }
            }
            if cm != 0.0 {
                if ck > 0 {
                    k_entries.push((flat, flat - stride[k], lam * cm));
                } else if wraps(coeffs, k) {
                    k_entries.push((flat, flat + (n - 1) * stride[k], lam * cm));
                }
            }
        }
        k_entries.push((flat, flat, diag));
    }
    // merge duplicate positions (periodic wrap on N = 2 can collide)
    k_entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
    let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(k_entries.len());
    for (r, c, v) in k_entries {
        if let Some(last) = merged.last_mut() {
            if last.0 == r && last.1 == c {
                last.2 += v;
                continue;
            }
        }
        merged.push((r, c, v));
    }
    let k_block = CsrMatrix::from_triplets(block, block, merged);

    let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(total + (n_blocks - 1) * k_block.nnz());
    for b in 0..n_blocks {
        let off = b * block;
        for i in 0..block {
            entries.push((off + i, off + i, 1.0));
        }
        if b == 0 {
            continue;
        }
        let prev = off - block;
        if b == n_blocks - 1 && last_row == LastRow::FinalCopy {
            for i in 0..block {
                entries.push((off + i, prev + i, -1.0));
            }
        } else {
            for r in 0..block {
                for i in k_block.row_ptr[r]..k_block.row_ptr[r + 1] {
                    entries.push((off + r, prev + k_block.col_idx[i], k_block.vals[i]));
                }
            }
        }
    }
    let full = CsrMatrix::from_triplets(total, total, entries);
    Ok(TransportSystem {
        full,
        k_block,
        block_size: block,
        n_blocks,
        lambda: lam,
        last_row,
        grid: grid.clone(),
    })
}

fn wraps(coeffs: &StencilCoeffs, axis: usize) -> bool {
    use crate::liouville::{Boundary, TransportKind};
    match coeffs.boundary {
        Boundary::Zero => false,
        Boundary::PeriodicX => match coeffs.kind {
            TransportKind::OdeTransport => true,
            _ => axis < coeffs.grid.dims_x(),
        },
    }
}

impl TransportSystem {
    pub fn total_size(&self) -> usize {
        self.block_size * self.n_blocks
    }

    /// Forward substitution: solve 𝒦·u = (ψ₀, 0, …, 0)ᵀ exactly.
    ///
    /// Returns the stacked solution as `n_blocks` slots; slot 1 equals ψ₀ and
    /// slot b holds the state after b−1 stencil applications (the final slot
    /// under [`LastRow::FinalCopy`] duplicates its predecessor).
    pub fn solve_forward(&self, psi0: &[f64]) -> Result<Vec<Vec<f64>>> {
        if psi0.len() != self.block_size {
            return Err(Error::dimension(format!(
                "psi0 has {} entries, block size is {}",
                psi0.len(),
                self.block_size
            )));
        }
        let block = self.block_size;
        let mut u = vec![0.0; self.total_size()];
        for b in 0..self.n_blocks {
            let off = b * block;
            for r in 0..block {
                let row = off + r;
                let rhs = if b == 0 { psi0[r] } else { 0.0 };
                let mut acc = rhs;
                for i in self.full.row_ptr[row]..self.full.row_ptr[row + 1] {
                    let c = self.full.col_idx[i];
                    if c < off {
                        acc -= self.full.vals[i] * u[c];
                    } else {
                        debug_assert_eq!(c, row, "diagonal blocks are identities");
                    }
                }
                u[row] = acc;
            }
        }
        Ok(u.chunks(block).map(|c| c.to_vec()).collect())
    }

    /// ‖𝒦·u − e₁⊗ψ₀‖_∞ for a stacked vector `u`.
    pub fn residual_inf(&self, psi0: &[f64], stacked: &[f64]) -> f64 {
        let mut y = vec![0.0; self.total_size()];
        self.full.matvec(stacked, &mut y);
        let mut worst = 0.0f64;
        for (i, yi) in y.iter().enumerate() {
            let rhs = if i < self.block_size { psi0[i] } else { 0.0 };
            worst = worst.max((yi - rhs).abs());
        }
        worst
    }

    /// Stepper-derived stacked history under this system's slot convention.
    pub fn stepper_history(&self, psi0: &LevelSetField, coeffs: &StencilCoeffs) -> Result<Vec<Vec<f64>>> {
        let mut slots: Vec<Vec<f64>> = Vec::with_capacity(self.n_blocks);
        let mut current = psi0.clone();
        slots.push(current.values.clone());
        for b in 1..self.n_blocks {
            if b == self.n_blocks - 1 && self.last_row == LastRow::FinalCopy {
                slots.push(slots[b - 1].clone());
            } else {
                current = step(&current, coeffs)?;
                slots.push(current.values.clone());
            }
        }
        Ok(slots)
    }

    /// Hermitian dilation [[0, 𝒦], [𝒦ᵀ, 0]].
    pub fn hermitian_dilation(&self) -> CsrMatrix {
        let n = self.total_size();
        let mut entries = Vec::with_capacity(2 * self.full.nnz());
        for r in 0..n {
            for i in self.full.row_ptr[r]..self.full.row_ptr[r + 1] {
                let c = self.full.col_idx[i];
                let v = self.full.vals[i];
                entries.push((r, n + c, v));
                entries.push((n + c, r, v));
            }
        }
        CsrMatrix::from_triplets(2 * n, 2 * n, entries)
    }

    /// Max nonzeros per row of 𝒦.
    pub fn measure_sparsity(&self) -> usize {
        self.full.max_nnz_per_row()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionMethod {
    Dense,
    Power,
}

#[derive(Debug, Clone, Copy)]
pub struct ConditionReport {
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub kappa: f64,
}

/// Singular extremes of 𝒦 and κ = σmax/σmin.
pub fn measure_condition(system: &TransportSystem, method: ConditionMethod) -> Result<ConditionReport> {
    match method {
        ConditionMethod::Dense => {
            let n = system.total_size();
            if n > 4096 {
                return Err(Error::config(format!(
                    "dense SVD limited to total size 4096, system has {n}"
                )));
            }
            let svd = system.full.to_dense().svd(false, false);
            let sv = &svd.singular_values;
            let sigma_max = sv.iter().cloned().fold(0.0f64, f64::max);
            let sigma_min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(ConditionReport {
                sigma_max,
                sigma_min,
                kappa: sigma_max / sigma_min,
            })
        }
        ConditionMethod::Power => {
            let sigma_max = power_sigma_max(system, 1e-8, 10_000)?;
            let sigma_min = inverse_power_sigma_min(system, 1e-8, 10_000)?;
            Ok(ConditionReport {
                sigma_max,
                sigma_min,
                kappa: sigma_max / sigma_min,
            })
        }
    }
}

fn power_sigma_max(system: &TransportSystem, tol: f64, max_iter: usize) -> Result<f64> {
    let n = system.total_size();
    let mut z: Vec<f64> = (0..n).map(|i| ((i * 2654435761 + 1) % 1000) as f64 / 1000.0 + 0.1).collect();
    normalize(&mut z);
    let mut y = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut prev = 0.0;
    for it in 0..max_iter {
        system.full.matvec(&z, &mut y);
        system.full.matvec_transpose(&y, &mut w);
        let lambda = norm(&w);
        z.copy_from_slice(&w);
        normalize(&mut z);
        let sigma = lambda.sqrt();
        if it > 2 && (sigma - prev).abs() <= tol * sigma.max(1.0) {
            return Ok(sigma);
        }
        prev = sigma;
    }
    Err(Error::NoConvergence(format!(
        "power iteration for σmax: residual {:.3e} after {max_iter} iterations",
        prev
    )))
}

fn inverse_power_sigma_min(system: &TransportSystem, tol: f64, max_iter: usize) -> Result<f64> {
    let n = system.total_size();
    let kt = system.full.transpose();
    let mut z: Vec<f64> = (0..n).map(|i| ((i * 1103515245 + 7) % 1000) as f64 / 1000.0 + 0.1).collect();
    normalize(&mut z);
    let mut prev = 0.0;
    for it in 0..max_iter {
        // w = 𝒦⁻ᵀ z (backward substitution on the transpose, which is upper
        // triangular with unit diagonal), then y = 𝒦⁻¹ w.
        let w = solve_unit_lower_transposed(&kt, &z);
        let y = solve_unit_lower(&system.full, &w);
        let lambda = norm(&y);
        z.copy_from_slice(&y);
        normalize(&mut z);
        let sigma = 1.0 / lambda.sqrt();
        if it > 2 && (sigma - prev).abs() <= tol * sigma.max(1e-300) {
            return Ok(sigma);
        }
        prev = sigma;
    }
    Err(Error::NoConvergence(format!(
        "inverse iteration for σmin: residual {:.3e} after {max_iter} iterations",
        prev
    )))
}

/// Solve A·x = b where A is lower triangular with unit diagonal (CSR rows).
fn solve_unit_lower(a: &CsrMatrix, b: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; b.len()];
    for r in 0..a.nrows {
        let mut acc = b[r];
        for i in a.row_ptr[r]..a.row_ptr[r + 1] {
            let c = a.col_idx[i];
            if c < r {
                acc -= a.vals[i] * x[c];
            }
        }
        x[r] = acc;
    }
    x
}

/// Solve Aᵀ-style upper triangular (unit diagonal) given A upper in CSR.
fn solve_unit_lower_transposed(upper: &CsrMatrix, b: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; b.len()];
    for r in (0..upper.nrows).rev() {
        let mut acc = b[r];
        for i in upper.row_ptr[r]..upper.row_ptr[r + 1] {
            let c = upper.col_idx[i];
            if c > r {
                acc -= upper.vals[i] * x[c];
            }
        }
        x[r] = acc;
    }
    x
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = norm(v);
    if n > 0.0 {
        for a in v.iter_mut() {
            *a /= n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PhaseGrid;
    use crate::liouville::{hj_coeffs, ode_coeffs, Boundary};
    use crate::model::{builtin_advection, HamiltonianModel};
    use std::sync::Arc;

    /// 1-D advection ∂_t u + ∂_x u = 0: unit-speed transport on a pure 1-D
    /// grid. The conservative stencil reduces to u^{n+1} = u − λ(u − u_{j−1}),
    /// so K has diagonal λ−1 and subdiagonal −λ.
    pub(crate) fn advection_system(n: usize, n_t: usize, lam: f64, last_row: LastRow) -> TransportSystem {
        let model = builtin_advection(1);
        let grid = PhaseGrid::new(1, 0, n, lam / n as f64, n_t).unwrap();
        let coeffs = ode_coeffs(&model, &grid, Boundary::Zero).unwrap();
        assemble_system(&coeffs, last_row).unwrap()
    }

    #[test]
    fn advection_block_entries() {
        // λ = 0.5, N = 3: K diagonal λ−1 = −0.5, subdiagonal −λ = −0.5.
        let sys = advection_system(3, 2, 0.5, LastRow::Stencil);
        let k = &sys.k_block;
        // x-fastest layout: the x-subdiagonal couples flat index f to f−1 in
        // each p-row; check the first p-row (flats 0..3).
        assert_eq!(k.get(0, 0), -0.5);
        assert_eq!(k.get(1, 1), -0.5);
        assert_eq!(k.get(1, 0), -0.5);
        assert_eq!(k.get(2, 1), -0.5);
        assert_eq!(k.get(0, 1), 0.0);
    }

    #[test]
    fn lambda_one_collapses_to_shift() {
        let sys = advection_system(4, 2, 1.0, LastRow::Stencil);
        let k = &sys.k_block;
        for f in 0..sys.block_size {
            assert_eq!(k.get(f, f), 0.0, "diagonal vanishes at λ=1");
        }
        assert_eq!(k.get(1, 0), -1.0);
    }

    #[test]
    fn solve_forward_zero_input() {
        let sys = advection_system(4, 3, 0.5, LastRow::FinalCopy);
        let sol = sys.solve_forward(&vec![0.0; sys.block_size]).unwrap();
        for block in sol {
            assert!(block.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn solve_forward_shifts_spike() {
        // λ = 1 advection: slot 1 = ψ₀, slot b = shifted b−1 times.
        let n = 8;
        let sys = advection_system(n, 3, 1.0, LastRow::Stencil);
        let mut psi0 = vec![0.0; sys.block_size];
        psi0[1] = 1.0; // spike at j = 2 (first p-row)
        let sol = sys.solve_forward(&psi0).unwrap();
        assert_eq!(sol[0][1], 1.0);
        assert_eq!(sol[1][2], 1.0);
        assert_eq!(sol[2][3], 1.0);
        assert_eq!(sol[1].iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn final_copy_duplicates_last_slot() {
        let n = 8;
        let sys = advection_system(n, 4, 1.0, LastRow::FinalCopy);
        let mut psi0 = vec![0.0; sys.block_size];
        psi0[1] = 1.0;
        let sol = sys.solve_forward(&psi0).unwrap();
        assert_eq!(sol[3], sol[2]);
        let stacked: Vec<f64> = sol.iter().flatten().cloned().collect();
        assert!(sys.residual_inf(&psi0, &stacked) <= 1e-15);
    }

    #[test]
    fn dilation_is_symmetric_with_matching_spectrum() {
        let sys = advection_system(2, 2, 0.5, LastRow::FinalCopy);
        let m = sys.hermitian_dilation();
        for r in 0..m.nrows {
            for i in m.row_ptr[r]..m.row_ptr[r + 1] {
                let c = m.col_idx[i];
                assert_eq!(m.vals[i], m.get(c, r), "M must equal its transpose");
            }
        }
        assert_eq!(m.max_nnz_per_row(), sys.full.max_nnz_per_row());
        // eigenvalues of M come in ±σ pairs: singular values of M equal those
        // of K, doubled in multiplicity
        let sv_k = sys.full.to_dense().svd(false, false).singular_values;
        let sv_m = m.to_dense().svd(false, false).singular_values;
        let mut k2: Vec<f64> = sv_k.iter().flat_map(|&s| [s, s]).collect();
        let mut mv: Vec<f64> = sv_m.iter().cloned().collect();
        k2.sort_by(|a, b| a.partial_cmp(b).unwrap());
        mv.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in k2.iter().zip(&mv) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn identity_system_condition() {
        let sys = advection_system(4, 1, 0.5, LastRow::Stencil);
        let rep = measure_condition(&sys, ConditionMethod::Dense).unwrap();
        assert!((rep.kappa - 1.0).abs() < 1e-12);
        assert!((rep.sigma_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_method_matches_dense() {
        let sys = advection_system(4, 6, 0.5, LastRow::FinalCopy);
        let dense = measure_condition(&sys, ConditionMethod::Dense).unwrap();
        let power = measure_condition(&sys, ConditionMethod::Power).unwrap();
        assert!((dense.sigma_max - power.sigma_max).abs() <= 1e-6 * dense.sigma_max);
        assert!((dense.sigma_min - power.sigma_min).abs() <= 1e-6 * dense.sigma_max);
    }

    #[test]
    fn sparsity_counts() {
        // advection: identity + stencil (diag + 1 neighbor) → 3
        let sys = advection_system(8, 4, 0.5, LastRow::Stencil);
        assert_eq!(sys.measure_sparsity(), 3);
        // HJ d=1 (2 phase dims): at most identity + diag + 4 neighbors = 6
        let grid = PhaseGrid::new(1, 1, 8, 0.5 / 8.0, 3).unwrap();
        let harm = crate::model::builtin_harmonic(1);
        let coeffs = hj_coeffs(&harm, &grid, Boundary::Zero).unwrap();
        let sys_hj = assemble_system(&coeffs, LastRow::Stencil).unwrap();
        assert!(sys_hj.measure_sparsity() <= 6);
        // degenerate zero-speed stencil: K = −I only → 2 per row
        let grid = PhaseGrid::new(1, 1, 4, 0.01, 3).unwrap();
        let still = HamiltonianModel::new(
            "still",
            1,
            Arc::new(|_: &[f64], _: &[f64]| 0.0),
            Arc::new(|_: &[f64], _: &[f64], out: &mut [f64]| {
                out[0] = 0.0;
                Ok(())
            }),
            Arc::new(|_: &[f64], _: &[f64], out: &mut [f64]| {
                out[0] = 0.0;
                Ok(())
            }),
            0.0,
        );
        let coeffs = hj_coeffs(&still, &grid, Boundary::Zero).unwrap();
        let sys2 = assemble_system(&coeffs, LastRow::Stencil).unwrap();
        assert_eq!(sys2.measure_sparsity(), 2);
    }

    #[test]
    fn oversized_assembly_rejected() {
        // state size 4096 · 8192 = 2^25 exceeds the cap; the coefficient
        // build itself is cheap in 1-D.
        let model = builtin_advection(1);
        let grid = PhaseGrid::new(1, 0, 4096, 1e-5, 8192).unwrap();
        let coeffs = ode_coeffs(&model, &grid, Boundary::Zero).unwrap();
        assert!(assemble_system(&coeffs, LastRow::Stencil).is_err());
    }
}
