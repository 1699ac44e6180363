//! Problem definitions: Hamiltonians with analytic gradients, hyperbolic
//! flux/source pairs, state-space vector fields, and weighted initial ensembles.
//!
//! Models are immutable function bundles; evaluation is re-entrant. Built-ins
//! carry analytic speed bounds; models built from expressions get a sampled
//! bound with a 1.05 safety factor.

use crate::error::{Error, Result};
use crate::expr::Expr;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) -> Result<()> + Send + Sync>;

/// Hamiltonian H(x, p) with analytic gradients.
#[derive(Clone)]
pub struct HamiltonianModel {
    pub name: String,
    pub dims: usize,
    h: ScalarFn,
    grad_x: GradFn,
    grad_p: GradFn,
    speed_bound: f64,
}

impl HamiltonianModel {
    pub fn new(name: impl Into<String>, dims: usize, h: ScalarFn, grad_x: GradFn, grad_p: GradFn, speed_bound: f64) -> Self {
        HamiltonianModel {
            name: name.into(),
            dims,
            h,
            grad_x,
            grad_p,
            speed_bound,
        }
    }

    pub fn eval(&self, x: &[f64], p: &[f64]) -> f64 {
        (self.h)(x, p)
    }
    pub fn grad_x(&self, x: &[f64], p: &[f64], out: &mut [f64]) -> Result<()> {
        (self.grad_x)(x, p, out)
    }
    pub fn grad_p(&self, x: &[f64], p: &[f64], out: &mut [f64]) -> Result<()> {
        (self.grad_p)(x, p, out)
    }
    pub fn speed_bound(&self) -> f64 {
        self.speed_bound
    }
}

/// H = |p|²/2 + V(x), Newtonian particles. ∇_p H = p, ∇_x H = ∇V.
pub fn builtin_newtonian(
    name: impl Into<String>,
    dims: usize,
    v: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    grad_v: Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
    grad_v_bound: f64,
) -> HamiltonianModel {
    let v2 = v.clone();
    let h: ScalarFn = Arc::new(move |x, p| 0.5 * p.iter().map(|a| a * a).sum::<f64>() + v2(x));
    let gx: GradFn = Arc::new(move |x, _p, out| {
        grad_v(x, out);
        Ok(())
    });
    let gp: GradFn = Arc::new(|_x, p, out| {
        out.copy_from_slice(p);
        Ok(())
    });
    // |p| <= 1 on the unit box per component
    HamiltonianModel::new(name, dims, h, gx, gp, grad_v_bound.max(1.0))
}

/// Free particle H = |p|²/2.
pub fn builtin_free(dims: usize) -> HamiltonianModel {
    builtin_newtonian("free", dims, Arc::new(|_| 0.0), Arc::new(|_, out| out.fill(0.0)), 0.0)
}

/// Harmonic oscillator centered in the box: H = (|x−½|² + |p−½|²)/2.
pub fn builtin_harmonic(dims: usize) -> HamiltonianModel {
    let h: ScalarFn = Arc::new(|x, p| {
        0.5 * (x.iter().map(|a| (a - 0.5) * (a - 0.5)).sum::<f64>()
            + p.iter().map(|a| (a - 0.5) * (a - 0.5)).sum::<f64>())
    });
    let gx: GradFn = Arc::new(|x, _p, out| {
        for (o, a) in out.iter_mut().zip(x) {
            *o = a - 0.5;
        }
        Ok(())
    });
    let gp: GradFn = Arc::new(|_x, p, out| {
        for (o, a) in out.iter_mut().zip(p) {
            *o = a - 0.5;
        }
        Ok(())
    });
    HamiltonianModel::new("harmonic", dims, h, gx, gp, 0.5)
}

/// Geometric optics H = c(x)·|p|. ∇_p H = c(x)·p/|p|, ∇_x H = |p|·∇c.
///
/// The gradient is singular at p = 0; evaluation there is a hard error so the
/// singularity cannot silently corrupt CFL bounds.
pub fn builtin_geometric_optics(
    name: impl Into<String>,
    dims: usize,
    c: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    grad_c: Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
    c_bound: f64,
    grad_c_bound: f64,
) -> HamiltonianModel {
    let c2 = c.clone();
    let c3 = c.clone();
    let h: ScalarFn = Arc::new(move |x, p| c2(x) * norm(p));
    let gp: GradFn = Arc::new(move |x, p, out| {
        let n = norm(p);
        if n < 1e-12 {
            return Err(Error::numerical("gradient singular at p=0"));
        }
        let cv = c3(x);
        for (o, a) in out.iter_mut().zip(p) {
            *o = cv * a / n;
        }
        Ok(())
    });
    let gx: GradFn = Arc::new(move |x, p, out| {
        let n = norm(p);
        grad_c(x, out);
        for o in out.iter_mut() {
            *o *= n;
        }
        Ok(())
    });
    let dim_f = (dims as f64).sqrt();
    HamiltonianModel::new(name, dims, h, gx, gp, c_bound.max(dim_f * grad_c_bound))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Scalar hyperbolic model: flux F(u) ∈ ℝ^d and source Q(x, u).
#[derive(Clone)]
pub struct HyperbolicModel {
    pub name: String,
    pub dims_x: usize,
    flux: Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>,
    source: Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>,
    speed_bound: f64,
    pub u_range: (f64, f64),
}

impl HyperbolicModel {
    pub fn new(
        name: impl Into<String>,
        dims_x: usize,
        flux: Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>,
        source: Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>,
        speed_bound: f64,
        u_range: (f64, f64),
    ) -> Self {
        HyperbolicModel {
            name: name.into(),
            dims_x,
            flux,
            source,
            speed_bound,
            u_range,
        }
    }

    pub fn flux(&self, u: f64, out: &mut [f64]) {
        (self.flux)(u, out)
    }
    pub fn source(&self, x: &[f64], u: f64) -> f64 {
        (self.source)(x, u)
    }
    pub fn speed_bound(&self) -> f64 {
        self.speed_bound
    }
}

/// Burgers: F(u) = u in each component, Q = 0.
pub fn builtin_burgers(dims_x: usize) -> HyperbolicModel {
    HyperbolicModel::new(
        "burgers",
        dims_x,
        Arc::new(|u, out| out.fill(u)),
        Arc::new(|_, _| 0.0),
        1.0,
        (0.0, 1.0),
    )
}

/// State-space vector field dX/dt = F(X) in D dimensions.
#[derive(Clone)]
pub struct OdeModel {
    pub name: String,
    pub dims: usize,
    f: Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
    pub divergence_free: bool,
    speed_bound: f64,
}

impl OdeModel {
    pub fn new(
        name: impl Into<String>,
        dims: usize,
        f: Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
        divergence_free: bool,
        speed_bound: f64,
    ) -> Self {
        OdeModel {
            name: name.into(),
            dims,
            f,
            divergence_free,
            speed_bound,
        }
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        (self.f)(x, out)
    }
    pub fn speed_bound(&self) -> f64 {
        self.speed_bound
    }

    /// Numeric divergence by central differences, used by the self-check.
    pub fn divergence(&self, x: &[f64], step: f64) -> f64 {
        let mut div = 0.0;
        let mut xp = x.to_vec();
        let mut fp = vec![0.0; self.dims];
        let mut fm = vec![0.0; self.dims];
        for i in 0..self.dims {
            xp[i] = x[i] + step;
            self.eval(&xp, &mut fp);
            xp[i] = x[i] - step;
            self.eval(&xp, &mut fm);
            xp[i] = x[i];
            div += (fp[i] - fm[i]) / (2.0 * step);
        }
        div
    }
}

/// Constant unit-speed advection along every axis.
pub fn builtin_advection(dims: usize) -> OdeModel {
    OdeModel::new("advection", dims, Arc::new(|_q, out: &mut [f64]| out.fill(1.0)), true, 1.0)
}

/// Planar rotation about the box center, divergence free.
pub fn builtin_rotation() -> OdeModel {
    OdeModel::new(
        "rotation",
        2,
        Arc::new(|q, out| {
            out[0] = -(q[1] - 0.5);
            out[1] = q[0] - 0.5;
        }),
        true,
        0.5,
    )
}

/// Initial data of one ensemble member.
#[derive(Clone)]
pub enum InitialData {
    /// Hamilton-Jacobi gradient field u₀: [0,1]^d → ℝ^d.
    HjGradient(Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>),
    /// Scalar hyperbolic initial profile u₀: [0,1]^d → ℝ.
    HyperbolicProfile(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
    /// A state-space point X₀ ∈ [0,1]^D.
    OdePoint(Vec<f64>),
}

/// M weighted initial data with weights c_k > 0, Σ c_k = 1.
#[derive(Clone)]
pub struct InitialEnsemble {
    pub members: Vec<InitialData>,
    pub weights: Vec<f64>,
}

impl InitialEnsemble {
    pub fn new(members: Vec<InitialData>, weights: Option<Vec<f64>>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::config("ensemble needs at least one member"));
        }
        let m = members.len();
        let weights = match weights {
            Some(w) => {
                if w.len() != m {
                    return Err(Error::config(format!("{} weights for {m} members", w.len())));
                }
                if w.iter().any(|&c| !(c > 0.0)) {
                    return Err(Error::config("weights must be positive"));
                }
                let sum: f64 = w.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::config(format!("weights sum to {sum}, expected 1")));
                }
                w
            }
            None => vec![1.0 / m as f64; m],
        };
        Ok(InitialEnsemble { members, weights })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Outcome of comparing analytic gradients against central differences.
#[derive(Debug, Clone, Copy)]
pub struct SelfCheckReport {
    pub max_rel_deviation: f64,
    pub points_checked: usize,
}

/// Compare a Hamiltonian's analytic gradients with central finite differences
/// of H at random interior points (step 1e-5). Points keep p away from zero so
/// homogeneous Hamiltonians stay differentiable.
pub fn gradient_selfcheck(model: &HamiltonianModel, n_points: usize, seed: u64) -> Result<SelfCheckReport> {
    let d = model.dims;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    let mut gx = vec![0.0; d];
    let mut gp = vec![0.0; d];
    for _ in 0..n_points {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..0.9)).collect();
        let p: Vec<f64> = (0..d).map(|_| rng.random_range(0.2..0.9)).collect();
        model.grad_x(&x, &p, &mut gx)?;
        model.grad_p(&x, &p, &mut gp)?;
        let mut xs = x.clone();
        let mut ps = p.clone();
        for i in 0..d {
            xs[i] = x[i] + step;
            let hp = model.eval(&xs, &p);
            xs[i] = x[i] - step;
            let hm = model.eval(&xs, &p);
            xs[i] = x[i];
            let fd = (hp - hm) / (2.0 * step);
            worst = worst.max(rel_dev(gx[i], fd));

            ps[i] = p[i] + step;
            let hp = model.eval(&x, &ps);
            ps[i] = p[i] - step;
            let hm = model.eval(&x, &ps);
            ps[i] = p[i];
            let fd = (hp - hm) / (2.0 * step);
            worst = worst.max(rel_dev(gp[i], fd));
        }
    }
    Ok(SelfCheckReport {
        max_rel_deviation: worst,
        points_checked: n_points,
    })
}

fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1.0f64.max(a.abs()).max(b.abs())
}

/// Sample max_i {|∂H/∂x_i|, |∂H/∂p_i|} on a lattice and apply a 1.05 safety factor.
pub fn sampled_speed_bound(model: &HamiltonianModel, points_per_dim: usize) -> Result<f64> {
    let d = model.dims;
    let n = points_per_dim;
    let mut gx = vec![0.0; d];
    let mut gp = vec![0.0; d];
    let mut worst: f64 = 0.0;
    let total = n.pow((2 * d) as u32);
    for flat in 0..total {
        let mut rem = flat;
        let mut pt = vec![0.0; 2 * d];
        for c in pt.iter_mut() {
            *c = (rem % n + 1) as f64 / n as f64;
            rem /= n;
        }
        let (x, p) = pt.split_at(d);
        if model.grad_x(x, p, &mut gx).is_err() || model.grad_p(x, p, &mut gp).is_err() {
            continue; // singular sample points do not contribute
        }
        for i in 0..d {
            worst = worst.max(gx[i].abs()).max(gp[i].abs());
        }
    }
    Ok(worst * 1.05)
}

/// Parse a built-in model name from a config string.
///
/// Accepted: `free`, `harmonic`, `newtonian:V=<expr>`, `go:c=<expr>`, `burgers`.
/// Expressions see the spatial variable as `x` (d=1) or `x1..xd`.
pub fn hamiltonian_from_spec(spec: &str, dims: usize) -> Result<HamiltonianModel> {
    match spec {
        "free" => return Ok(builtin_free(dims)),
        "harmonic" => return Ok(builtin_harmonic(dims)),
        _ => {}
    }
    if let Some(vsrc) = spec.strip_prefix("newtonian:V=") {
        let expr = parse_spatial_expr(vsrc, dims)?;
        let e2 = expr.clone();
        let v = Arc::new(move |x: &[f64]| expr.eval(x));
        let grad_v = Arc::new(move |x: &[f64], out: &mut [f64]| {
            central_gradient(&e2, x, out);
        });
        let mut m = builtin_newtonian(format!("newtonian:V={vsrc}"), dims, v, grad_v, 0.0);
        let bound = sampled_speed_bound(&m, 17)?;
        m.speed_bound = bound.max(1.0);
        return Ok(m);
    }
    if let Some(csrc) = spec.strip_prefix("go:c=") {
        let expr = parse_spatial_expr(csrc, dims)?;
        let e2 = expr.clone();
        let c = Arc::new(move |x: &[f64]| expr.eval(x));
        let grad_c = Arc::new(move |x: &[f64], out: &mut [f64]| {
            central_gradient(&e2, x, out);
        });
        let mut m = builtin_geometric_optics(format!("go:c={csrc}"), dims, c, grad_c, 0.0, 0.0);
        let bound = sampled_speed_bound(&m, 17)?;
        m.speed_bound = bound;
        return Ok(m);
    }
    Err(Error::config(format!("unknown model spec {spec:?}")))
}

pub fn hyperbolic_from_spec(spec: &str, dims_x: usize) -> Result<HyperbolicModel> {
    if spec == "burgers" {
        return Ok(builtin_burgers(dims_x));
    }
    Err(Error::config(format!("unknown hyperbolic model {spec:?}")))
}

fn parse_spatial_expr(src: &str, dims: usize) -> Result<Expr> {
    if dims == 1 {
        Expr::parse(src, &["x"])
    } else {
        let names: Vec<String> = (1..=dims).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        Expr::parse(src, &refs)
    }
}

fn central_gradient(e: &Expr, x: &[f64], out: &mut [f64]) {
    let step = 1e-6;
    let mut xs = x.to_vec();
    for i in 0..x.len() {
        xs[i] = x[i] + step;
        let hp = e.eval(&xs);
        xs[i] = x[i] - step;
        let hm = e.eval(&xs);
        xs[i] = x[i];
        out[i] = (hp - hm) / (2.0 * step);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newtonian_free_values() {
        let m = builtin_free(1);
        assert_eq!(m.eval(&[0.3], &[0.5]), 0.125);
        let mut g = [0.0];
        m.grad_p(&[0.3], &[0.5], &mut g).unwrap();
        assert_eq!(g[0], 0.5);
        m.grad_x(&[0.3], &[0.5], &mut g).unwrap();
        assert_eq!(g[0], 0.0);
        assert_eq!(m.speed_bound(), 1.0);
    }

    #[test]
    fn newtonian_quadratic_potential() {
        let m = builtin_newtonian(
            "test",
            1,
            Arc::new(|x: &[f64]| 0.5 * x[0] * x[0]),
            Arc::new(|x: &[f64], out: &mut [f64]| out[0] = x[0]),
            1.0,
        );
        assert!((m.eval(&[0.6], &[0.8]) - 0.5).abs() < 1e-15);
        let mut g = [0.0];
        m.grad_x(&[0.6], &[0.8], &mut g).unwrap();
        assert_eq!(g[0], 0.6);
    }

    #[test]
    fn geometric_optics_values() {
        let m = builtin_geometric_optics(
            "go",
            2,
            Arc::new(|_| 1.0),
            Arc::new(|_, out: &mut [f64]| out.fill(0.0)),
            1.0,
            0.0,
        );
        assert!((m.eval(&[0.1, 0.1], &[0.6, 0.8]) - 1.0).abs() < 1e-15);
        let mut g = [0.0, 0.0];
        m.grad_p(&[0.1, 0.1], &[0.6, 0.8], &mut g).unwrap();
        assert!((g[0] - 0.6).abs() < 1e-15 && (g[1] - 0.8).abs() < 1e-15);
        assert!(m.grad_p(&[0.1, 0.1], &[0.0, 0.0], &mut g).is_err());

        let m1 = builtin_geometric_optics("go2", 1, Arc::new(|_| 2.0), Arc::new(|_, o: &mut [f64]| o.fill(0.0)), 2.0, 0.0);
        assert!((m1.eval(&[0.5], &[0.3]) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn selfcheck_builtin_models() {
        let free = builtin_free(1);
        assert!(gradient_selfcheck(&free, 100, 7).unwrap().max_rel_deviation <= 1e-9);
        let m = hamiltonian_from_spec("newtonian:V=sin(2*pi*x)", 1).unwrap();
        assert!(gradient_selfcheck(&m, 100, 7).unwrap().max_rel_deviation <= 1e-5);
        let harm = builtin_harmonic(2);
        assert!(gradient_selfcheck(&harm, 100, 7).unwrap().max_rel_deviation <= 1e-5);
    }

    #[test]
    fn selfcheck_flags_wrong_gradient() {
        let bad = HamiltonianModel::new(
            "bad",
            1,
            Arc::new(|_x: &[f64], p: &[f64]| 0.5 * p[0] * p[0]),
            Arc::new(|_x: &[f64], _p: &[f64], out: &mut [f64]| {
                out[0] = 0.0;
                Ok(())
            }),
            Arc::new(|_x: &[f64], p: &[f64], out: &mut [f64]| {
                out[0] = 2.0 * p[0]; // deliberately wrong
                Ok(())
            }),
            2.0,
        );
        assert!(gradient_selfcheck(&bad, 100, 7).unwrap().max_rel_deviation > 1e-2);
    }

    #[test]
    fn speed_bound_holds_on_lattice() {
        for spec in ["free", "harmonic", "newtonian:V=sin(2*pi*x)"] {
            let m = hamiltonian_from_spec(spec, 1).unwrap();
            let sampled = sampled_speed_bound(&m, 32).unwrap() / 1.05;
            assert!(
                sampled <= m.speed_bound() + 1e-9,
                "{spec}: sampled {sampled} > bound {}",
                m.speed_bound()
            );
        }
    }

    #[test]
    fn ensemble_weights() {
        let mk = || InitialData::OdePoint(vec![0.5, 0.5]);
        let e = InitialEnsemble::new(vec![mk(), mk()], None).unwrap();
        assert_eq!(e.weights, vec![0.5, 0.5]);
        assert!(InitialEnsemble::new(vec![mk()], Some(vec![0.9])).is_err());
        assert!(InitialEnsemble::new(vec![mk(), mk()], Some(vec![0.5, -0.5])).is_err());
        assert!(InitialEnsemble::new(vec![], None).is_err());
    }

    #[test]
    fn rotation_divergence_free() {
        let m = builtin_rotation();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let q = [rng.random_range(0.1..0.9), rng.random_range(0.1..0.9)];
            assert!(m.divergence(&q, 1e-5).abs() <= 1e-6);
        }
    }
}
