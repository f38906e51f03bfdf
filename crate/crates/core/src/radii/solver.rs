//! Local ascent on the unit sphere of a weighted `l_p` space.
//!
//! Every objective is homogeneous, so the solver maximizes the scale-free
//! ratio `f(x) / ||x||_p^k` with a BFGS quasi-Newton method and Armijo
//! backtracking, renormalizing after every accepted step. Accepted steps
//! never decrease the ratio, so a run never ends below its starting value.

use num_complex::Complex64;

use super::problem::Problem;
use super::{Objective, SolverConfig};
use crate::error::Error;
use crate::lp_space::Vector;

/// Magnitude given to a coordinate pushed out of the nonsmooth guard.
type GradientFn<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>, Error> + 'a;

const NUDGE: f64 = 1e-6;
/// Sign-assignment rounds for the absolute numerical radius.
const MAX_SIGN_ROUNDS: usize = 100;
/// Consecutive negligible improvements that end a run.
const STALL_LIMIT: usize = 3;

#[derive(Debug, Clone)]
pub(crate) struct Local {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub grad_norm: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Moves coordinates that sit inside the guard to magnitude `NUDGE`, with the
/// sign (or phase) that increases the objective, and renormalizes.
pub(crate) fn nudge(pr: &Problem, objective: Objective, x: &[f64], delta: f64) -> Option<Vec<f64>> {
    let mut out = x.to_vec();
    let thresh = delta.max(0.0);
    match pr.to_vector(x) {
        Vector::Real(ref xr) => {
            let sigma = pr.sign_state(xr).ok()?;
            // sign of the signed pair decides the ascent side for |F|
            let pair_sign = if pr.signed_pair(xr) < 0.0 { -1.0 } else { 1.0 };
            for (k, e) in out.iter_mut().enumerate() {
                if e.abs() <= thresh {
                    let s = match objective {
                        Objective::NumRadius => pair_sign * sigma[k],
                        _ => 1.0,
                    };
                    *e = s * NUDGE;
                }
            }
        }
        Vector::Complex(ref xc) => {
            let (z, y) = pr.complex_pair(xc);
            for (k, zk) in xc.iter().enumerate() {
                if zk.norm() <= thresh {
                    let phi = y[k].arg() - z.arg();
                    let e = Complex64::from_polar(NUDGE, phi);
                    out[2 * k] = e.re;
                    out[2 * k + 1] = e.im;
                }
            }
        }
    }
    pr.normalize(&mut out).then_some(out)
}

/// BFGS ascent of a scale-invariant function from `x0` (already unit).
pub(crate) fn ascend(
    pr: &Problem,
    objective: Objective,
    x0: Vec<f64>,
    cfg: &SolverConfig,
    value: &dyn Fn(&[f64]) -> f64,
    grad: &GradientFn<'_>,
) -> Local {
    let n = x0.len();
    let mut x = x0;
    let mut v = value(&x);
    let mut iterations = 0;

    let mut g = match grad(&x) {
        Ok(g) => g,
        Err(_) => match nudge(pr, objective, &x, cfg.delta).and_then(|x2| grad(&x2).ok().map(|g| (x2, g))) {
            Some((x2, g2)) => {
                x = x2;
                v = value(&x);
                g2
            }
            None => {
                return Local {
                    value: v,
                    x,
                    iterations,
                    grad_norm: f64::INFINITY,
                }
            }
        },
    };

    let mut h = identity(n);
    let mut fresh = true;
    let mut stalls = 0;

    while iterations < cfg.max_iter {
        let gnorm = norm2(&g);
        if !(gnorm > cfg.grad_tol) {
            break;
        }
        iterations += 1;

        let mut d = matvec(&h, &g);
        let mut slope = dot(&d, &g);
        if !(slope > 0.0) || !slope.is_finite() {
            h = identity(n);
            fresh = true;
            d = g.clone();
            slope = gnorm * gnorm;
        }
        // cap the step relative to the point
        let xnorm = norm2(&x);
        let dnorm = norm2(&d);
        let mut alpha = if dnorm > cfg.max_step * xnorm {
            cfg.max_step * xnorm / dnorm
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..cfg.max_backtracks {
            let mut trial: Vec<f64> = x.iter().zip(&d).map(|(x, d)| x + alpha * d).collect();
            if pr.normalize(&mut trial) {
                let vt = value(&trial);
                if vt.is_finite() && vt >= v + cfg.armijo * alpha * slope {
                    accepted = Some((trial, vt));
                    break;
                }
            }
            alpha *= cfg.backtrack;
        }

        let Some((mut xn, mut vn)) = accepted else {
            if fresh {
                break;
            }
            h = identity(n);
            fresh = true;
            continue;
        };

        let gn = match grad(&xn) {
            Ok(gn) => gn,
            Err(_) => {
                let Some(x2) = nudge(pr, objective, &xn, cfg.delta) else {
                    break;
                };
                let v2 = value(&x2);
                let Ok(g2) = grad(&x2) else { break };
                if v2 < v {
                    // the nudge lost ground; stop at the last good point
                    break;
                }
                xn = x2;
                vn = v2;
                x = xn;
                v = vn;
                g = g2;
                h = identity(n);
                fresh = true;
                stalls = 0;
                continue;
            }
        };

        // BFGS update for minimizing -ratio
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g.iter().zip(&gn).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * norm2(&s) * norm2(&y) && sy > 0.0 {
            if fresh {
                let scale = sy / dot(&y, &y);
                h.iter_mut().for_each(|e| *e *= scale);
            }
            bfgs_update(&mut h, &s, &y, sy);
            fresh = false;
        }

        if vn - v <= cfg.tol * v.abs().max(1.0) {
            stalls += 1;
        } else {
            stalls = 0;
        }
        x = xn;
        v = vn;
        g = gn;
        if stalls >= STALL_LIMIT {
            break;
        }
    }

    let grad_norm = norm2(&g);
    Local {
        x,
        value: v,
        iterations,
        grad_norm,
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

fn matvec(h: &[f64], g: &[f64]) -> Vec<f64> {
    let n = g.len();
    (0..n).map(|i| dot(&h[i * n..(i + 1) * n], g)).collect()
}

/// `H <- (I - r s y^T) H (I - r y s^T) + r s s^T`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let r = 1.0 / sy;
    let hy = matvec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -r * (s[i] * hy[j] + hy[i] * s[j]) + (r * r * yhy + r) * s[i] * s[j];
        }
    }
}

/// Maximizes the ratio for one objective from a unit start.
pub(crate) fn local_max(pr: &Problem, objective: Objective, x0: Vec<f64>, cfg: &SolverConfig) -> Local {
    match objective {
        Objective::OpNorm => {
            let x = power_iterate(pr, x0, cfg);
            smooth_ascent(pr, objective, x, cfg)
        }
        Objective::NumRadius => smooth_ascent(pr, objective, x0, cfg),
        Objective::AbsNumRadius => sign_assignment_ascent(pr, x0, cfg),
    }
}

fn smooth_ascent(pr: &Problem, objective: Objective, x0: Vec<f64>, cfg: &SolverConfig) -> Local {
    let k = pr.degree(objective);
    let value = |x: &[f64]| pr.value(objective, x) / pr.norm(x).powf(k);
    let grad = |x: &[f64]| {
        let f = pr.value(objective, x);
        let gf = pr.gradient(objective, x, None, cfg.delta)?;
        Ok(pr.ratio_gradient(objective, x, f, &gf))
    };
    ascend(pr, objective, x0, cfg, &value, &grad)
}

/// Nonlinear power iteration for the operator norm; keeps only improving steps.
fn power_iterate(pr: &Problem, x0: Vec<f64>, cfg: &SolverConfig) -> Vec<f64> {
    let mut x = x0;
    let mut v = pr.value(Objective::OpNorm, &x);
    for _ in 0..cfg.power_iterations {
        let Some(xn) = pr.power_step(&x) else { break };
        let vn = pr.value(Objective::OpNorm, &xn);
        if !(vn > v) {
            break;
        }
        let small = vn - v <= cfg.tol * v.max(1.0);
        x = xn;
        v = vn;
        if small {
            break;
        }
    }
    x
}

/// Alternates a sign assignment `sigma = sign(Tx)` with smooth ascent of the
/// minorant `sum w |x|^(p-1) sigma (Tx)`, which is tight at the current point.
fn sign_assignment_ascent(pr: &Problem, x0: Vec<f64>, cfg: &SolverConfig) -> Local {
    let obj = Objective::AbsNumRadius;
    let p = pr.p();
    let mut x = x0;
    let mut best = pr.value(obj, &x);
    let mut best_x = x.clone();
    let mut iterations = 0;
    let Ok(mut sigma) = pr.sign_state(&x) else {
        return Local {
            x,
            value: best,
            iterations,
            grad_norm: f64::INFINITY,
        };
    };

    for _ in 0..MAX_SIGN_ROUNDS {
        let s = sigma.clone();
        let value = |x: &[f64]| pr.signed_value(x, &s) / pr.norm(x).powf(p);
        let grad = |x: &[f64]| {
            let f = pr.signed_value(x, &s);
            let gf = pr.signed_gradient(x, &s, cfg.delta)?;
            Ok(pr.ratio_gradient(obj, x, f, &gf))
        };
        let local = ascend(pr, obj, x.clone(), cfg, &value, &grad);
        iterations += local.iterations;
        x = local.x;
        let v = pr.value(obj, &x);
        if v > best {
            best = v;
            best_x = x.clone();
        }
        let next = pr.sign_state(&x).unwrap_or_else(|_| sigma.clone());
        if next == sigma {
            break;
        }
        sigma = next;
    }

    let grad_norm = stationarity(pr, obj, &best_x, cfg.delta);
    Local {
        x: best_x,
        value: best,
        iterations,
        grad_norm,
    }
}

/// Euclidean norm of the ratio gradient at `x`; infinite where it is undefined.
pub(crate) fn stationarity(pr: &Problem, obj: Objective, x: &[f64], delta: f64) -> f64 {
    let f = pr.value(obj, x);
    match pr.gradient(obj, x, None, delta) {
        Ok(gf) => norm2(&pr.ratio_gradient(obj, x, f, &gf)),
        Err(_) => f64::INFINITY,
    }
}
