//! Explicit upwind solvers for the three linear transport problems: the
//! phase-space density of Hamilton-Jacobi flows, the level-set density of
//! scalar hyperbolic laws, and state-space transport for ODE ensembles.
//!
//! All three share one update shape. Per axis k each cell sees three
//! coefficients (plus, self, minus) and steps as
//!
//!   ψ' = ψ − λ Σ_k [ cp_k·ψ₊ + cs_k·ψ + cm_k·ψ₋ ]
//!
//! For the Hamiltonian case the x-axis coefficients come from {∂H/∂p_i}_±
//! and the p-axis ones from {∂H/∂x_i}_±, both evaluated at the node. The
//! state-space case uses face-averaged fluxes F_i(q_{i±1/2}) in conservative
//! form, so interior mass telescopes exactly. Coefficients are precomputed
//! once and shared verbatim with the matrix assembly in [`crate::linsys`].

use crate::error::{Error, Result};
use crate::field::LevelSetField;
use crate::grid::PhaseGrid;
use crate::kernel::DeltaKernel;
use crate::model::{HamiltonianModel, HyperbolicModel, InitialData, InitialEnsemble, OdeModel};
use crate::util::pairwise_sum;
use serde::{Deserialize, Serialize};

/// Ghost-cell policy. Zero ghosts match the compact-support assumption;
/// periodic wrapping of the x-axes serves problems whose initial data is
/// 1-periodic rather than compactly supported. Momentum axes always hold
/// zero ghosts (the density starts as a mollified delta in p).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Zero,
    PeriodicX,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportKind {
    HamiltonJacobi,
    Hyperbolic,
    OdeTransport,
}

/// Precomputed per-cell stencil coefficients for one problem on one grid.
pub struct StencilCoeffs {
    pub grid: PhaseGrid,
    pub kind: TransportKind,
    pub boundary: Boundary,
    pub lambda: f64,
    cp: Vec<Vec<f64>>,
    cs: Vec<Vec<f64>>,
    cm: Vec<Vec<f64>>,
    /// (cell, coefficient) pairs of outgoing flux through the top/bottom
    /// domain faces, conservative scheme only.
    top_flux: Vec<(usize, f64)>,
    bot_flux: Vec<(usize, f64)>,
}

impl StencilCoeffs {
    /// Coefficients (plus, self, minus) of `axis` at `flat`.
    pub fn at(&self, axis: usize, flat: usize) -> (f64, f64, f64) {
        (self.cp[axis][flat], self.cs[axis][flat], self.cm[axis][flat])
    }

    /// Whether the x-part of the lattice wraps on `axis`.
    fn wraps(&self, axis: usize) -> bool {
        match self.boundary {
            Boundary::Zero => false,
            Boundary::PeriodicX => match self.kind {
                TransportKind::OdeTransport => true,
                _ => axis < self.grid.dims_x(),
            },
        }
    }

    fn check_monotone(&self) -> Result<()> {
        let total = self.grid.total_points();
        let dims = self.grid.dims_total();
        let lam = self.lambda;
        for flat in 0..total {
            let mut outflow = 0.0;
            for k in 0..dims {
                outflow += self.cs[k][flat];
            }
            if lam * outflow > 1.0 + 1e-12 {
                return Err(Error::numerical(format!(
                    "CFL violated: λ·Σ_i(|coef_i|) = {:.6} > 1 at cell {flat}; reduce Δt",
                    lam * outflow
                )));
            }
        }
        Ok(())
    }
}

fn nominal_cfl_check(grid: &PhaseGrid, dims: usize, speed_bound: f64, label: &str) -> Result<()> {
    let d = dims as f64;
    let lam = grid.lambda();
    if d * lam * speed_bound > 1.0 + 1e-12 {
        return Err(Error::numerical(format!(
            "CFL violated for {label}: d·(Δt/h)·max_speed = {:.6} > 1 (Δt = {}, h = {}, speed = {})",
            d * lam * speed_bound,
            grid.dt(),
            grid.h(),
            speed_bound
        )));
    }
    Ok(())
}

/// Stencil for the phase-space transport of a Hamiltonian flow.
pub fn hj_coeffs(model: &HamiltonianModel, grid: &PhaseGrid, boundary: Boundary) -> Result<StencilCoeffs> {
    if grid.dims_x() != model.dims || grid.dims_p() != model.dims {
        return Err(Error::dimension(format!(
            "model dimension {} does not match grid ({} x, {} p)",
            model.dims,
            grid.dims_x(),
            grid.dims_p()
        )));
    }
    nominal_cfl_check(grid, model.dims, model.speed_bound(), &model.name)?;
    let d = model.dims;
    let dims = grid.dims_total();
    let total = grid.total_points();
    let mut cp = vec![vec![0.0; total]; dims];
    let mut cs = vec![vec![0.0; total]; dims];
    let mut cm = vec![vec![0.0; total]; dims];
    let mut gx = vec![0.0; d];
    let mut gp = vec![0.0; d];
    for flat in 0..total {
        let (x, p) = grid.coord_split(flat);
        model.grad_p(&x, &p, &mut gp)?;
        model.grad_x(&x, &p, &mut gx)?;
        for i in 0..d {
            let a = gp[i];
            cp[i][flat] = a.min(0.0);
            cs[i][flat] = a.abs();
            cm[i][flat] = -a.max(0.0);
            let b = gx[i];
            cp[d + i][flat] = -b.max(0.0);
            cs[d + i][flat] = b.abs();
            cm[d + i][flat] = b.min(0.0);
        }
    }
    let coeffs = StencilCoeffs {
        grid: grid.clone(),
        kind: TransportKind::HamiltonJacobi,
        boundary,
        lambda: grid.lambda(),
        cp,
        cs,
        cm,
        top_flux: Vec::new(),
        bot_flux: Vec::new(),
    };
    coeffs.check_monotone()?;
    Ok(coeffs)
}

/// Stencil for the level-set transport of a scalar hyperbolic law:
/// x-advection at F_i(p), p-advection at −Q(x, p).
pub fn hyperbolic_coeffs(model: &HyperbolicModel, grid: &PhaseGrid, boundary: Boundary) -> Result<StencilCoeffs> {
    if grid.dims_x() != model.dims_x || grid.dims_p() != 1 {
        return Err(Error::dimension(format!(
            "hyperbolic grid needs ({}, 1) dims, got ({}, {})",
            model.dims_x,
            grid.dims_x(),
            grid.dims_p()
        )));
    }
    nominal_cfl_check(grid, model.dims_x, model.speed_bound(), &model.name)?;
    let d = model.dims_x;
    let dims = grid.dims_total();
    let total = grid.total_points();
    let mut cp = vec![vec![0.0; total]; dims];
    let mut cs = vec![vec![0.0; total]; dims];
    let mut cm = vec![vec![0.0; total]; dims];
    let mut f = vec![0.0; d];
    for flat in 0..total {
        let (x, p) = grid.coord_split(flat);
        model.flux(p[0], &mut f);
        for i in 0..d {
            let a = f[i];
            cp[i][flat] = a.min(0.0);
            cs[i][flat] = a.abs();
            cm[i][flat] = -a.max(0.0);
        }
        let b = model.source(&x, p[0]);
        cp[d][flat] = -b.max(0.0);
        cs[d][flat] = b.abs();
        cm[d][flat] = b.min(0.0);
    }
    let coeffs = StencilCoeffs {
        grid: grid.clone(),
        kind: TransportKind::Hyperbolic,
        boundary,
        lambda: grid.lambda(),
        cp,
        cs,
        cm,
        top_flux: Vec::new(),
        bot_flux: Vec::new(),
    };
    coeffs.check_monotone()?;
    Ok(coeffs)
}

/// Conservative upwind stencil for state-space transport, with face-averaged
/// fluxes F_i(q_{i+1/2}) = ½(F_i(q_{j+e_i}) + F_i(q_j)).
pub fn ode_coeffs(model: &OdeModel, grid: &PhaseGrid, boundary: Boundary) -> Result<StencilCoeffs> {
    if grid.dims_x() != model.dims || grid.dims_p() != 0 {
        return Err(Error::dimension(format!(
            "state-space grid needs ({}, 0) dims, got ({}, {})",
            model.dims,
            grid.dims_x(),
            grid.dims_p()
        )));
    }
    // The explicit scheme requires D·λ ≤ 1 outright; the pointwise monotone
    // check below covers fields faster than unit speed.
    let dd = model.dims as f64;
    if dd * grid.lambda() > 1.0 + 1e-12 {
        return Err(Error::numerical(format!(
            "CFL violated: D·Δt/h = {:.6} > 1",
            dd * grid.lambda()
        )));
    }
    let d = model.dims;
    let total = grid.total_points();
    let n = grid.n_per_dim();
    let h = grid.h();
    let mut cp = vec![vec![0.0; total]; d];
    let mut cs = vec![vec![0.0; total]; d];
    let mut cm = vec![vec![0.0; total]; d];
    let mut top_flux = Vec::new();
    let mut bot_flux = Vec::new();
    let wrap = boundary == Boundary::PeriodicX;
    let mut f_here = vec![0.0; d];
    let mut f_up = vec![0.0; d];
    let mut f_dn = vec![0.0; d];
    for flat in 0..total {
        let idx = grid.unflatten(flat);
        let q = grid.coord(&idx);
        model.eval(&q, &mut f_here);
        for i in 0..d {
            let mut qn = q.clone();
            // Ghost nodes are evaluated at their real coordinates; models are
            // globally defined formulas. Under wrapping the neighbor is the
            // periodic image instead.
            let up_c = if idx.coords[i] == n && wrap { 1 } else { idx.coords[i] + 1 };
            qn[i] = up_c as f64 * h;
            model.eval(&qn, &mut f_up);
            let dn_c = if idx.coords[i] == 1 && wrap { n as i64 } else { idx.coords[i] as i64 - 1 };
            qn[i] = dn_c as f64 * h;
            model.eval(&qn, &mut f_dn);
            qn[i] = q[i];
            let face_up = 0.5 * (f_up[i] + f_here[i]);
            let face_dn = 0.5 * (f_here[i] + f_dn[i]);
            cp[i][flat] = face_up.min(0.0);
            cs[i][flat] = face_up.max(0.0) - face_dn.min(0.0);
            cm[i][flat] = -face_dn.max(0.0);
            if !wrap {
                if idx.coords[i] == n && face_up > 0.0 {
                    top_flux.push((flat, face_up));
                }
                if idx.coords[i] == 1 && face_dn < 0.0 {
                    bot_flux.push((flat, -face_dn));
                }
            }
        }
    }
    let coeffs = StencilCoeffs {
        grid: grid.clone(),
        kind: TransportKind::OdeTransport,
        boundary,
        lambda: grid.lambda(),
        cp,
        cs,
        cm,
        top_flux,
        bot_flux,
    };
    coeffs.check_monotone()?;
    Ok(coeffs)
}

/// ψ₀ at (j, l) = Σ_k c_k Π_i δ_ω(l_i·h − u_i^{[k]}(jh)).
pub fn assemble_initial_hj(
    ensemble: &InitialEnsemble,
    grid: &PhaseGrid,
    kernel: &DeltaKernel,
) -> Result<LevelSetField> {
    let d = grid.dims_x();
    if grid.dims_p() != d {
        return Err(Error::dimension("Hamilton-Jacobi grids need dims_p = dims_x"));
    }
    let nx = grid.x_points();
    let np = grid.p_points();
    let n = grid.n_per_dim();
    let h = grid.h();
    let om = kernel.omega();
    let mut values = vec![0.0; grid.total_points()];
    let mut u = vec![0.0; d];
    for xf in 0..nx {
        let x: Vec<f64> = decompose(xf, n, d).iter().map(|&c| c as f64 * h).collect();
        for (member, &w) in ensemble.members.iter().zip(&ensemble.weights) {
            let g = match member {
                InitialData::HjGradient(g) => g,
                _ => return Err(Error::config("ensemble member is not Hamilton-Jacobi initial data")),
            };
            g(&x, &mut u);
            for &ui in u.iter() {
                if ui - om <= 0.0 || ui + om >= 1.0 {
                    return Err(Error::numerical(format!(
                        "initial support touches boundary: u₀ = {ui} with ω = {om}"
                    )));
                }
            }
            for pf in 0..np {
                let mut prod = w;
                let mut rem = pf;
                for ui in u.iter().take(d) {
                    let li = (rem % n + 1) as f64;
                    rem /= n;
                    prod *= kernel.eval_unchecked(li * h - ui);
                    if prod == 0.0 {
                        break;
                    }
                }
                if prod != 0.0 {
                    values[xf + pf * nx] += prod;
                }
            }
        }
    }
    LevelSetField::from_values(grid.clone(), om, values, 0)
}

/// ψ₀ at (j, l) = Σ_k c_k δ_ω(l·h − u₀^{[k]}(jh)) for scalar profiles.
pub fn assemble_initial_hyperbolic(
    ensemble: &InitialEnsemble,
    grid: &PhaseGrid,
    kernel: &DeltaKernel,
) -> Result<LevelSetField> {
    if grid.dims_p() != 1 {
        return Err(Error::dimension("hyperbolic grids need dims_p = 1"));
    }
    let d = grid.dims_x();
    let nx = grid.x_points();
    let n = grid.n_per_dim();
    let h = grid.h();
    let om = kernel.omega();
    let mut values = vec![0.0; grid.total_points()];
    for xf in 0..nx {
        let x: Vec<f64> = decompose(xf, n, d).iter().map(|&c| c as f64 * h).collect();
        for (member, &w) in ensemble.members.iter().zip(&ensemble.weights) {
            let profile = match member {
                InitialData::HyperbolicProfile(p) => p,
                _ => return Err(Error::config("ensemble member is not a scalar profile")),
            };
            let u = profile(&x);
            if u - om <= 0.0 || u + om >= 1.0 {
                return Err(Error::numerical(format!(
                    "initial support touches boundary: u₀ = {u} with ω = {om}"
                )));
            }
            for l in 1..=n {
                let v = kernel.eval_unchecked(l as f64 * h - u);
                if v != 0.0 {
                    values[xf + (l - 1) * nx] += w * v;
                }
            }
        }
    }
    LevelSetField::from_values(grid.clone(), om, values, 0)
}

/// Φ₀ at j = Σ_k c_k Π_i δ_ω(j_i·h − X_i^{[k]}).
pub fn assemble_initial_ode(
    ensemble: &InitialEnsemble,
    grid: &PhaseGrid,
    kernel: &DeltaKernel,
) -> Result<LevelSetField> {
    if grid.dims_p() != 0 {
        return Err(Error::dimension("state-space grids need dims_p = 0"));
    }
    let d = grid.dims_x();
    let n = grid.n_per_dim();
    let h = grid.h();
    let om = kernel.omega();
    let mut values = vec![0.0; grid.total_points()];
    for (member, &w) in ensemble.members.iter().zip(&ensemble.weights) {
        let x0 = match member {
            InitialData::OdePoint(p) => p,
            _ => return Err(Error::config("ensemble member is not a state-space point")),
        };
        if x0.len() != d {
            return Err(Error::dimension(format!("point has {} coords, grid {d}", x0.len())));
        }
        for &xi in x0 {
            if xi - om <= 0.0 || xi + om >= 1.0 {
                return Err(Error::numerical(format!(
                    "initial support touches boundary: X₀ = {xi} with ω = {om}"
                )));
            }
        }
        for (flat, v) in values.iter_mut().enumerate() {
            let mut prod = w;
            let mut rem = flat;
            for x0i in x0.iter().take(d) {
                let c = (rem % n + 1) as f64;
                rem /= n;
                prod *= kernel.eval_unchecked(c * h - x0i);
                if prod == 0.0 {
                    break;
                }
            }
            *v += prod;
        }
    }
    LevelSetField::from_values(grid.clone(), om, values, 0)
}

fn decompose(mut flat: usize, n: usize, dims: usize) -> Vec<usize> {
    let mut coords = Vec::with_capacity(dims);
    for _ in 0..dims {
        coords.push(flat % n + 1);
        flat /= n;
    }
    coords
}

/// One explicit step. Pure map over cells reading only the previous slice.
pub fn step(field: &LevelSetField, coeffs: &StencilCoeffs) -> Result<LevelSetField> {
    if field.grid != coeffs.grid {
        return Err(Error::dimension("field grid differs from stencil grid"));
    }
    let grid = &coeffs.grid;
    let n = grid.n_per_dim();
    let dims = grid.dims_total();
    let total = grid.total_points();
    let lam = coeffs.lambda;
    let vals = &field.values;
    let mut out = vec![0.0; total];
    let mut stride = vec![1usize; dims];
    for k in 1..dims {
        stride[k] = stride[k - 1] * n;
    }
    for (flat, o) in out.iter_mut().enumerate() {
        let center = vals[flat];
        let mut acc = 0.0;
        for k in 0..dims {
            let ck = (flat / stride[k]) % n;
            let up = if ck + 1 < n {
                vals[flat + stride[k]]
            } else if coeffs.wraps(k) {
                vals[flat - (n - 1) * stride[k]]
            } else {
                0.0
            };
            let dn = if ck > 0 {
                vals[flat - stride[k]]
            } else if coeffs.wraps(k) {
                vals[flat + (n - 1) * stride[k]]
            } else {
                0.0
            };
            acc += coeffs.cp[k][flat] * up + coeffs.cs[k][flat] * center + coeffs.cm[k][flat] * dn;
        }
        *o = center - lam * acc;
    }
    let mut next = LevelSetField::from_values(grid.clone(), field.omega, out, field.time_index + 1)?;
    next.omega = field.omega;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Record {
    Final,
    All,
}

/// Result of a time-stepping run.
pub struct EvolveRun {
    /// With `Record::All`: slices[i] is the field after i steps (slices[0] is
    /// the initial field). With `Record::Final`: the final slice only.
    pub slices: Vec<LevelSetField>,
    /// Accumulated mass that left through the domain faces (conservative
    /// scheme only; zero for the node-coefficient schemes).
    pub boundary_outflux: f64,
    /// True if boundary shell mass ever exceeded the compact-support monitor.
    pub support_warning: bool,
}

impl EvolveRun {
    pub fn final_slice(&self) -> &LevelSetField {
        self.slices.last().expect("evolve keeps at least one slice")
    }
}

/// Iterate the stepper `n_steps` times.
pub fn evolve(field0: &LevelSetField, coeffs: &StencilCoeffs, n_steps: usize, record: Record) -> Result<EvolveRun> {
    let mut slices = Vec::new();
    let mut current = field0.clone();
    let mut outflux = 0.0;
    let mut warning = current.compact_support_warning();
    if record == Record::All {
        slices.push(current.clone());
    }
    let cell = coeffs.grid.h().powi(coeffs.grid.dims_total() as i32);
    for _ in 0..n_steps {
        if !coeffs.top_flux.is_empty() || !coeffs.bot_flux.is_empty() {
            let step_out: f64 = coeffs
                .top_flux
                .iter()
                .chain(coeffs.bot_flux.iter())
                .map(|&(c, w)| w * current.values[c])
                .sum();
            outflux += coeffs.lambda * cell * step_out.abs();
        }
        current = step(&current, coeffs)?;
        if record == Record::All {
            slices.push(current.clone());
        }
    }
    current.assert_finite()?;
    warning = warning || current.compact_support_warning();
    if record == Record::Final {
        slices.push(current);
    }
    Ok(EvolveRun {
        slices,
        boundary_outflux: outflux,
        support_warning: warning,
    })
}

/// h^dims · Σ field, pairwise order.
pub fn mass(field: &LevelSetField) -> f64 {
    let cell = field.grid.h().powi(field.grid.dims_total() as i32);
    cell * pairwise_sum(&field.values)
}
