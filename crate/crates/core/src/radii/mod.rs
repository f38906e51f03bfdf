//! Operator norm, numerical radius and absolute numerical radius.
//!
//! All three quantities are suprema over the unit sphere, estimated by
//! multi-start local ascent. Every estimate carries the unit vector at which
//! its value is attained, so each value is a certified lower bound of the
//! true supremum.

mod brute;
mod problem;
mod solver;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use brute::brute_radius_2d;
pub(crate) use problem::Problem;

use crate::error::{Error, Result};
use crate::lp_space::{Field, LpSpace, Vector};
use crate::operator::Operator;

/// Default nonsmooth guard.
pub const DEFAULT_GUARD: f64 = 1e-12;
/// Projected-gradient norm below which a local maximum counts as stationary.
pub const STATIONARY: f64 = 1e-6;

/// Which supremum to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `||Tx||_p`.
    OpNorm,
    /// `|sum w x# Tx|`.
    NumRadius,
    /// `sum w |x|^(p-1) |Tx|` (real spaces only).
    AbsNumRadius,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::OpNorm, Objective::NumRadius, Objective::AbsNumRadius];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Random restarts (seeded starts come on top).
    pub restarts: usize,
    /// Iteration cap for each local ascent.
    pub max_iter: usize,
    /// Relative improvement regarded as negligible.
    pub tol: f64,
    /// Gradient norm at which an ascent stops.
    pub grad_tol: f64,
    /// Armijo sufficient-increase constant.
    pub armijo: f64,
    /// Backtracking factor.
    pub backtrack: f64,
    pub max_backtracks: usize,
    /// Largest trial step relative to the Euclidean length of the point.
    pub max_step: f64,
    /// Nonlinear power steps before ascent (operator norm only).
    pub power_iterations: usize,
    pub seed: u64,
    /// Nonsmooth guard: gradients are never taken with a coordinate this small
    /// where the objective has an unbounded derivative.
    pub delta: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iter: 500,
            tol: 1e-15,
            grad_tol: 1e-11,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
            max_step: 0.5,
            power_iterations: 100,
            seed: 0,
            delta: DEFAULT_GUARD,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_owned()));
        if self.restarts == 0 {
            return bad("restarts must be >= 1");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be > 0");
        }
        if !(self.delta >= 0.0) {
            return bad("delta must be >= 0");
        }
        if !(self.grad_tol >= 0.0) {
            return bad("grad_tol must be >= 0");
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad("armijo must lie in (0, 1)");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack must lie in (0, 1)");
        }
        if !(self.max_step > 0.0) {
            return bad("max_step must be > 0");
        }
        Ok(())
    }
}

/// A witnessed estimate of `||T||`, `v(T)` or `|v|(T)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusEstimate {
    pub objective: Objective,
    pub value: f64,
    /// Unit vector attaining `value`.
    pub witness: Vector,
    /// Starts run, seeded ones included.
    pub restarts: usize,
    /// Start index that produced the witness.
    pub best_start: usize,
    /// Ascent iterations summed over all starts.
    pub iterations: usize,
    /// Whether the winning ascent ended at a stationary point.
    pub converged: bool,
    /// Tangential gradient norm at the witness.
    pub grad_norm: f64,
}

/// The objective evaluated at `x` (any nonzero `x`; unit `x` for the
/// quantity itself).
pub fn objective_value(space: &LpSpace, t: &Operator, x: &Vector, objective: Objective) -> Result<f64> {
    let pr = problem_for(space, t, x.field(), objective)?;
    space.check(x)?;
    Ok(pr.value(objective, &pr.to_params(x)?))
}

/// Euclidean gradient of the objective at `x`, before tangent projection.
///
/// Complex vectors are treated as `2m` real coordinates; entry `k` of the
/// result is `df/d(re x_k) + i df/d(im x_k)`. For the absolute numerical
/// radius `sign_state` fixes `sigma` in `sum w |x|^(p-1) sigma (Tx)`; the
/// default is `sign(Tx)`.
pub fn radius_gradient(
    space: &LpSpace,
    t: &Operator,
    x: &Vector,
    objective: Objective,
    sign_state: Option<&[f64]>,
) -> Result<Vector> {
    let pr = problem_for(space, t, x.field(), objective)?;
    space.check(x)?;
    let params = pr.to_params(x)?;
    let g = pr.gradient(objective, &params, sign_state, DEFAULT_GUARD)?;
    Ok(pr.to_vector(&g))
}

/// Tangential gradient of `f / ||x||_p^k` at a unit `x`; zero at stationary
/// points of the objective on the sphere.
pub fn projected_gradient(space: &LpSpace, t: &Operator, x: &Vector, objective: Objective) -> Result<Vector> {
    let pr = problem_for(space, t, x.field(), objective)?;
    space.check(x)?;
    let params = pr.to_params(x)?;
    let f = pr.value(objective, &params);
    let g = pr.gradient(objective, &params, None, DEFAULT_GUARD)?;
    Ok(pr.to_vector(&pr.ratio_gradient(objective, &params, f, &g)))
}

fn problem_for(space: &LpSpace, t: &Operator, field: Field, objective: Objective) -> Result<Problem> {
    let field = match (t.field(), field) {
        (Field::Complex, _) => Field::Complex,
        (Field::Real, f) => f,
    };
    if objective == Objective::AbsNumRadius && field == Field::Complex {
        return Err(Error::FieldMismatch {
            expected: Field::Real,
            found: Field::Complex,
        });
    }
    Problem::new(space, t, field)
}

/// Start `j` of the random family: all-ones for `j = 0`, Gaussian otherwise.
/// The stream depends only on `(seed, j)`.
fn random_start(pr: &Problem, seed: u64, j: usize) -> Vec<f64> {
    let n = pr.dim();
    if j == 0 {
        return match pr.field() {
            Field::Real => vec![1.0; n],
            Field::Complex => (0..n).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect(),
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(j as u64);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Multi-start maximization over the unit sphere.
///
/// `seeds` are extra starting points run before the random family; real seeds
/// are embedded when the problem is complex. The field is that of the
/// operator: a real operator is optimized over the real sphere.
pub fn estimate(
    space: &LpSpace,
    t: &Operator,
    objective: Objective,
    cfg: &SolverConfig,
    seeds: &[Vector],
) -> Result<RadiusEstimate> {
    estimate_over(space, t, t.field(), objective, cfg, seeds)
}

/// As [`estimate`], over an explicit field; a real operator over the complex
/// field is its complexification.
pub fn estimate_over(
    space: &LpSpace,
    t: &Operator,
    field: Field,
    objective: Objective,
    cfg: &SolverConfig,
    seeds: &[Vector],
) -> Result<RadiusEstimate> {
    cfg.validate()?;
    let pr = problem_for(space, t, field, objective)?;
    let mut starts = Vec::with_capacity(seeds.len() + cfg.restarts);
    for s in seeds {
        space.check(s)?;
        let mut x = pr.to_params(s)?;
        if pr.normalize(&mut x) {
            starts.push(x);
        }
    }
    let n_seeded = starts.len();
    let total = n_seeded + cfg.restarts;

    let results: Vec<_> = (0..total)
        .into_par_iter()
        .map(|i| {
            let mut x0 = if i < n_seeded {
                starts[i].clone()
            } else {
                random_start(&pr, cfg.seed, i - n_seeded)
            };
            if !pr.normalize(&mut x0) {
                return None;
            }
            let start_value = pr.value(objective, &x0);
            let local = solver::local_max(&pr, objective, x0.clone(), cfg);
            // ascents never lose ground; keep the start if rounding says otherwise
            Some(if local.value >= start_value {
                local
            } else {
                solver::Local {
                    grad_norm: solver::stationarity(&pr, objective, &x0, cfg.delta),
                    x: x0,
                    value: start_value,
                    iterations: local.iterations,
                }
            })
        })
        .collect();

    let iterations = results.iter().flatten().map(|l| l.iterations).sum();
    let (best_start, best) = results
        .into_iter()
        .enumerate()
        .filter_map(|(i, l)| l.map(|l| (i, l)))
        .fold(None::<(usize, solver::Local)>, |acc, (i, l)| match acc {
            Some((_, ref b)) if b.value >= l.value => acc,
            _ => Some((i, l)),
        })
        .ok_or_else(|| Error::InvalidConfig("no usable start".into()))?;

    let mut x = best.x;
    pr.normalize(&mut x);
    let value = pr.value(objective, &x);
    Ok(RadiusEstimate {
        objective,
        value,
        witness: pr.to_vector(&x),
        restarts: total,
        best_start,
        iterations,
        converged: best.grad_norm <= STATIONARY,
        grad_norm: best.grad_norm,
    })
}

/// `||T||`.
pub fn op_norm(space: &LpSpace, t: &Operator, cfg: &SolverConfig) -> Result<RadiusEstimate> {
    estimate(space, t, Objective::OpNorm, cfg, &[])
}

/// `v(T)`.
pub fn num_radius(space: &LpSpace, t: &Operator, cfg: &SolverConfig) -> Result<RadiusEstimate> {
    estimate(space, t, Objective::NumRadius, cfg, &[])
}

/// `|v|(T)`; real operators only.
pub fn abs_num_radius(space: &LpSpace, t: &Operator, cfg: &SolverConfig) -> Result<RadiusEstimate> {
    estimate(space, t, Objective::AbsNumRadius, cfg, &[])
}

/// The three estimates of one operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Radii {
    pub op_norm: RadiusEstimate,
    pub num_radius: RadiusEstimate,
    /// `None` for complex operators.
    pub abs_num_radius: Option<RadiusEstimate>,
}

impl Radii {
    /// `v <= |v| <= ||T||` up to `slack`.
    pub fn ordered(&self, slack: f64) -> bool {
        let v = self.num_radius.value;
        let n = self.op_norm.value;
        match &self.abs_num_radius {
            Some(a) => v <= a.value + slack && a.value <= n + slack,
            None => v <= n + slack,
        }
    }
}

/// All estimates, each one also started from the witnesses of the smaller
/// quantities. Since `x# Tx <= |x|^(p-1)|Tx|` pointwise and Hölder bounds the
/// latter by `||Tx||_p` on the sphere, the reported values respect
/// `v <= |v| <= ||T||` by construction.
pub fn all_radii(space: &LpSpace, t: &Operator, cfg: &SolverConfig, v_seeds: &[Vector]) -> Result<Radii> {
    let v = estimate(space, t, Objective::NumRadius, cfg, v_seeds)?;
    let abs = match t.field() {
        Field::Real => Some(estimate(
            space,
            t,
            Objective::AbsNumRadius,
            cfg,
            std::slice::from_ref(&v.witness),
        )?),
        Field::Complex => None,
    };
    let mut norm_seeds = vec![v.witness.clone()];
    if let Some(a) = &abs {
        norm_seeds.push(a.witness.clone());
    }
    let n = estimate(space, t, Objective::OpNorm, cfg, &norm_seeds)?;
    Ok(Radii {
        op_norm: n,
        num_radius: v,
        abs_num_radius: abs,
    })
}
