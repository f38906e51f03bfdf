//! Lower-bound certificates for `v(T)` in terms of `|v|(T)` on real spaces.
//!
//! From a unit `x`, the atoms split into `A = {x# Tx >= 0}` and its
//! complement `B`. Testing the numerical radius at `x`, `x chi_B` and
//! `y = x + lambda x chi_B` yields `v(T) >= beta |t^(p-1) - t| / (t - 1 + 2 t^p)`
//! for every `t = 1 + lambda >= 1`, where `beta` is the larger of the two
//! signed half-sums of `x# Tx`. None of these steps uses `||T|| = 1`, so the
//! certificate holds verbatim for unnormalized operators.

use serde::Serialize;

use crate::constants::{compute_mp, MP_TOL};
use crate::error::{Error, Result};
use crate::lp_space::{self, Field, LpSpace, Vector};
use crate::operator::Operator;
use crate::radii::{objective_value, Objective};

/// Accepted deviation of `||x||_p` from 1.
pub const UNIT_TOL: f64 = 1e-9;
/// Slack on `lhs >= rhs` when checking the interpolation inequality.
pub const LSKF_SLACK: f64 = 1e-7;
const GRID_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundSample {
    pub t: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Certificate {
    pub x: Vector,
    /// Atoms with `x# (T_eff x) >= 0` (0-based).
    pub a_set: Vec<usize>,
    pub b_set: Vec<usize>,
    /// Half of `sum w |x# Tx|`.
    pub beta0: f64,
    /// `sum_A w x# (T_eff x)`.
    pub beta: f64,
    /// Whether `T_eff = -T`.
    pub flipped: bool,
    /// `beta^-1 sum_A w x# T_eff(x chi_B)`; zero when `beta = 0`.
    pub a: f64,
    pub samples: Vec<BoundSample>,
    pub best_bound: f64,
    pub best_t: f64,
    pub mp: f64,
    /// `beta M_p / 3`, which `best_bound` dominates.
    pub third_beta_mp: f64,
    /// Largest `|sum w z# Tz| / ||z||_p^p` over the test points of the
    /// argument; never below `best_bound`.
    pub constructive_v: f64,
    /// Unit test point attaining `constructive_v`.
    pub constructive_point: Vector,
    /// `|v|(T) - 2 beta0` once an absolute radius is attached.
    pub epsilon: Option<f64>,
}

impl Theorem1Certificate {
    /// Records `|v|(T) - 2 beta0`.
    pub fn with_abs_radius(mut self, abs_radius: f64) -> Self {
        self.epsilon = Some(abs_radius - 2.0 * self.beta0);
        self
    }

    /// `best_bound <= v + 1e-6`.
    pub fn sound_against(&self, v: f64) -> bool {
        self.best_bound <= v + 1e-6
    }
}

/// 512 log-spaced points on `[1, max(10, 3 t*)]` together with `t*`, the
/// maximizer of the `M_p` objective.
pub fn default_t_grid(p: f64) -> Result<Vec<f64>> {
    let t_star = compute_mp(p, MP_TOL)?.t_star;
    log_t_grid(p, 10f64.max(3.0 * t_star), GRID_POINTS)
}

/// `points` log-spaced values on `[1, t_max]` together with `t*`.
pub fn log_t_grid(p: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_max >= 1.0) || !t_max.is_finite() {
        return Err(Error::InvalidLambda(t_max - 1.0));
    }
    if points < 2 {
        return Err(Error::InvalidConfig("a t-grid needs at least 2 points".into()));
    }
    let t_star = compute_mp(p, MP_TOL)?.t_star;
    let mut grid: Vec<f64> = (0..points)
        .map(|i| (t_max.ln() * i as f64 / (points - 1) as f64).exp())
        .collect();
    grid.push(t_star);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

/// `beta |t^(p-1) - t| / (t - 1 + 2 t^p)`.
pub fn sample_bound(p: f64, beta: f64, t: f64) -> f64 {
    beta * (t.powf(p - 1.0) - t).abs() / (t - 1.0 + 2.0 * t.powf(p))
}

/// The split of the atoms and the derived sums.
struct Split {
    x: Vec<f64>,
    in_a: Vec<bool>,
    beta0: f64,
    beta: f64,
    flipped: bool,
    /// `sum_A w x# T_eff(x chi_B)`.
    cross: f64,
}

fn check_inputs(space: &LpSpace, t: &Operator, x: &Vector) -> Result<()> {
    t.check_space(space)?;
    space.check(x)?;
    for f in [t.field(), x.field()] {
        if f != Field::Real {
            return Err(Error::FieldMismatch {
                expected: Field::Real,
                found: f,
            });
        }
    }
    let n = lp_space::norm(space, x)?;
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit { norm: n });
    }
    Ok(())
}

fn split(space: &LpSpace, t: &Operator, x: &Vector) -> Result<Split> {
    check_inputs(space, t, x)?;
    let m = space.m();
    let w = space.weights();
    let x = x.as_real()?.to_vec();
    let xs: Vec<f64> = x.iter().map(|&e| lp_space::sharp_real(space.p(), e)).collect();
    let mut mat = t.real_entries()?.to_vec();
    let terms: Vec<f64> = (0..m)
        .map(|i| {
            let tx: f64 = (0..m).map(|k| mat[i * m + k] * x[k]).sum();
            w[i] * xs[i] * tx
        })
        .collect();
    let pos: f64 = terms.iter().filter(|&&v| v >= 0.0).sum();
    let neg: f64 = -terms.iter().filter(|&&v| v < 0.0).sum::<f64>();
    let beta0 = (pos + neg) / 2.0;
    let flipped = neg > pos;
    if flipped {
        mat.iter_mut().for_each(|e| *e = -*e);
    }
    let in_a: Vec<bool> = terms
        .iter()
        .map(|&v| if flipped { -v >= 0.0 } else { v >= 0.0 })
        .collect();
    let beta = if flipped { neg } else { pos };
    let cross = (0..m)
        .filter(|&i| in_a[i])
        .map(|i| {
            let txb: f64 = (0..m).filter(|&k| !in_a[k]).map(|k| mat[i * m + k] * x[k]).sum();
            w[i] * xs[i] * txb
        })
        .sum();
    Ok(Split {
        x,
        in_a,
        beta0,
        beta,
        flipped,
        cross,
    })
}

impl Split {
    /// `x + lambda x chi_B`.
    fn y(&self, lambda: f64) -> Vector {
        Vector::Real(
            self.x
                .iter()
                .zip(&self.in_a)
                .map(|(&e, &a)| if a { e } else { (1.0 + lambda) * e })
                .collect(),
        )
    }

    fn x_on_b(&self) -> Vector {
        Vector::Real(
            self.x
                .iter()
                .zip(&self.in_a)
                .map(|(&e, &a)| if a { 0.0 } else { e })
                .collect(),
        )
    }
}

/// `|sum w z# Tz| / ||z||_p^p` and the normalized point; `None` for `z = 0`.
fn v_ratio(space: &LpSpace, t: &Operator, z: &Vector) -> Option<(f64, Vector)> {
    let unit = lp_space::normalize(space, z).ok()??;
    let value = objective_value(space, t, &unit, Objective::NumRadius).ok()?;
    Some((value, unit))
}

fn best_of(space: &LpSpace, t: &Operator, points: impl IntoIterator<Item = Vector>) -> Option<(f64, Vector)> {
    points
        .into_iter()
        .filter_map(|z| v_ratio(space, t, &z))
        .fold(None, |acc: Option<(f64, Vector)>, c| match acc {
            Some(b) if b.0 >= c.0 => Some(b),
            _ => Some(c),
        })
}

/// Builds the certificate for a real operator and a unit real `x`.
pub fn build_certificate_thm1(
    space: &LpSpace,
    t: &Operator,
    x: &Vector,
    t_grid: &[f64],
) -> Result<Theorem1Certificate> {
    if let Some(&bad) = t_grid.iter().find(|&&s| !(s >= 1.0) || !s.is_finite()) {
        return Err(Error::InvalidLambda(bad - 1.0));
    }
    let sp = split(space, t, x)?;
    let p = space.p();
    let samples: Vec<BoundSample> = t_grid
        .iter()
        .map(|&s| BoundSample {
            t: s,
            bound: sample_bound(p, sp.beta, s),
        })
        .collect();
    let (best_t, best_bound) = samples
        .iter()
        .fold((1.0, 0.0), |acc, s| if s.bound > acc.1 { (s.t, s.bound) } else { acc });

    let mut points = vec![x.clone(), sp.x_on_b(), sp.y(-1.0)];
    points.extend(t_grid.iter().map(|&s| sp.y(s - 1.0)));
    let (constructive_v, constructive_point) = best_of(space, t, points).unwrap_or((0.0, x.clone()));

    let mp = compute_mp(p, MP_TOL)?.value;
    let idx = |want: bool| (0..space.m()).filter(|&i| sp.in_a[i] == want).collect::<Vec<_>>();
    Ok(Theorem1Certificate {
        x: x.clone(),
        a_set: idx(true),
        b_set: idx(false),
        beta0: sp.beta0,
        beta: sp.beta,
        flipped: sp.flipped,
        a: if sp.beta > 0.0 { sp.cross / sp.beta } else { 0.0 },
        samples,
        best_bound,
        best_t,
        mp,
        third_beta_mp: sp.beta * mp / 3.0,
        constructive_v,
        constructive_point,
        epsilon: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LskfCheck {
    pub lambda: f64,
    /// `v ((1 + |lambda|)(1 + lambda)^(p-1) + max(1, (1 + lambda)^p))`.
    pub lhs: f64,
    /// `|(1 - (1 + lambda)^(p-1)) beta + lambda sum_A w x# T(x chi_B)|`.
    pub rhs: f64,
    /// `lhs >= rhs - 1e-7`. A failure means the supplied `v` is too small.
    pub holds: bool,
    /// `lhs` with `v` replaced by the best ratio over `x`, `x chi_B`, `y_lambda`.
    pub constructive_lhs: f64,
    pub constructive_holds: bool,
}

/// Checks the interpolation inequality behind the certificate at one
/// `lambda >= -1`, given an estimate `v` of the numerical radius.
pub fn verify_lskf(space: &LpSpace, t: &Operator, x: &Vector, lambda: f64, v: f64) -> Result<LskfCheck> {
    if !(lambda >= -1.0) || !lambda.is_finite() {
        return Err(Error::InvalidLambda(lambda));
    }
    let sp = split(space, t, x)?;
    let p = space.p();
    let s = 1.0 + lambda;
    let factor = (1.0 + lambda.abs()) * s.powf(p - 1.0) + s.powf(p).max(1.0);
    let rhs = ((1.0 - s.powf(p - 1.0)) * sp.beta + lambda * sp.cross).abs();
    let lhs = v * factor;
    let v_local = best_of(space, t, [x.clone(), sp.x_on_b(), sp.y(lambda)])
        .map(|b| b.0)
        .unwrap_or(0.0);
    let constructive_lhs = v_local * factor;
    Ok(LskfCheck {
        lambda,
        lhs,
        rhs,
        holds: lhs >= rhs - LSKF_SLACK,
        constructive_lhs,
        constructive_holds: constructive_lhs >= rhs - 1e-12 * (1.0 + rhs),
    })
}

/// The points `x`, `x chi_B` and `y_lambda` at which the inequality for
/// `lambda` tests the numerical radius; zero points are dropped.
pub fn lskf_test_points(space: &LpSpace, t: &Operator, x: &Vector, lambda: f64) -> Result<Vec<Vector>> {
    if !(lambda >= -1.0) || !lambda.is_finite() {
        return Err(Error::InvalidLambda(lambda));
    }
    let sp = split(space, t, x)?;
    Ok([x.clone(), sp.x_on_b(), sp.y(lambda)]
        .into_iter()
        .filter(|z| !z.is_zero())
        .collect())
}

/// `||y_lambda||_p^p` for the split of `x` under `T`.
pub fn y_lambda_pow_norm(space: &LpSpace, t: &Operator, x: &Vector, lambda: f64) -> Result<f64> {
    let sp = split(space, t, x)?;
    Ok(lp_space::norm(space, &sp.y(lambda))?.powf(space.p()))
}
