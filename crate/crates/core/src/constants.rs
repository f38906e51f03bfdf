//! The constant `M_p` and the bounds derived from it.
//!
//! `M_p = max_{t >= 1} |t^(p-1) - t| / (1 + t^p)`, which coincides with the
//! maximum over `[0, 1]` under `t -> 1/t`. It is the numerical radius of the
//! rotation `(x, y) -> (-y, x)` on real `l_p^2`.

use std::f64::consts::E;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp_space::conjugate_exponent;

/// Points of the coarse logarithmic scan used to bracket the maximizer.
const SCAN_POINTS: usize = 4096;
/// Upper search limit never grows past this.
const MAX_SEARCH_T: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MpResult {
    pub p: f64,
    pub value: f64,
    /// Maximizer `t* >= 1`.
    pub t_star: f64,
    /// `|g'(t*)|`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundSet {
    pub p: f64,
    pub mp: f64,
    pub mp_over_6: f64,
    pub mp_over_12e: f64,
    /// `max(2^(-1/p), 2^(-1/q)) M_p`, the known lower bound on `n(l_p^2)`.
    pub lower_2d: f64,
    /// `M_p`, the known upper bound on `n(L_p)`.
    pub upper: f64,
    /// `1/e`, the floor of the numerical index of every complex space.
    pub complex_floor: f64,
}

/// `|t^(p-1) - t| / (1 + t^p)`.
pub fn mp_objective(p: f64, t: f64) -> f64 {
    (t.powf(p - 1.0) - t).abs() / (1.0 + t.powf(p))
}

/// Derivative of `mp_objective` on `t >= 1`, where the sign inside the
/// absolute value is fixed by `p`.
fn mp_derivative(p: f64, t: f64) -> f64 {
    let s = if p > 2.0 { 1.0 } else { -1.0 };
    let h = s * (t.powf(p - 1.0) - t);
    let dh = s * ((p - 1.0) * t.powf(p - 2.0) - 1.0);
    let d = 1.0 + t.powf(p);
    let dd = p * t.powf(p - 1.0);
    (dh * d - h * dd) / (d * d)
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// Maximizes the `M_p` objective over `t >= 1` to absolute accuracy `tol` in `t`.
///
/// A logarithmic scan over `[1, max(100, 10^(6/p))]` brackets the maximizer,
/// then bisection on the analytic derivative refines it.
pub fn compute_mp(p: f64, tol: f64) -> Result<MpResult> {
    check_exponent(p)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be > 0, got {tol}")));
    }
    if p == 2.0 {
        return Ok(MpResult {
            p,
            value: 0.0,
            t_star: 1.0,
            residual: 0.0,
        });
    }

    let mut t_max = 100f64.max(10f64.powf(6.0 / p));
    let (mut lo, mut hi) = loop {
        let log_max = t_max.ln();
        let t_at = |i: usize| (log_max * i as f64 / SCAN_POINTS as f64).exp();
        let best =
            (0..=SCAN_POINTS)
                .map(|i| (i, mp_objective(p, t_at(i))))
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
                );
        if best.0 < SCAN_POINTS || t_max >= MAX_SEARCH_T {
            break (t_at(best.0.saturating_sub(1)), t_at((best.0 + 1).min(SCAN_POINTS)));
        }
        // maximizer sits on the right edge of the scan; widen
        t_max = (t_max * t_max).min(MAX_SEARCH_T);
    };

    if mp_derivative(p, lo) > 0.0 && mp_derivative(p, hi) < 0.0 {
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if mp_derivative(p, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    } else {
        // derivative sign lost to rounding: fall back to golden section on values
        (lo, hi) = golden_section_max(|t| mp_objective(p, t), lo, hi, tol);
    }
    let t_star = 0.5 * (lo + hi);
    Ok(MpResult {
        p,
        value: mp_objective(p, t_star),
        t_star,
        residual: mp_derivative(p, t_star).abs(),
    })
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a, b)
}

/// Default accuracy for `compute_mp` used by the rest of the crate.
pub const MP_TOL: f64 = 1e-14;

pub fn bounds(p: f64) -> Result<BoundSet> {
    let mp = compute_mp(p, MP_TOL)?.value;
    let q = conjugate_exponent(p);
    let lower_factor = 2f64.powf(-1.0 / p).max(2f64.powf(-1.0 / q));
    Ok(BoundSet {
        p,
        mp,
        mp_over_6: mp / 6.0,
        mp_over_12e: mp / (12.0 * E),
        lower_2d: lower_factor * mp,
        upper: mp,
        complex_floor: 1.0 / E,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent oracle: plain grid maximum of the objective.
    fn grid_max(p: f64, lo: f64, hi: f64, n: usize) -> f64 {
        (0..n)
            .map(|i| {
                let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                (t.powf(p - 1.0) - t).abs() / (1.0 + t.powf(p))
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn p_two_is_exactly_zero() {
        let r = compute_mp(2.0, 1e-12).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.t_star, 1.0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert_eq!(compute_mp(1.0, 1e-12), Err(Error::InvalidExponent(1.0)));
        assert!(compute_mp(0.5, 1e-12).is_err());
        assert!(compute_mp(f64::INFINITY, 1e-12).is_err());
        assert!(compute_mp(3.0, 0.0).is_err());
        assert!(bounds(1.0).is_err());
    }

    #[test]
    fn conjugate_symmetry_and_grid_oracle() {
        let m3 = compute_mp(3.0, 1e-14).unwrap();
        let m15 = compute_mp(1.5, 1e-14).unwrap();
        assert!((m3.value - m15.value).abs() <= 1e-10);
        let g = grid_max(3.0, 1.0, 100.0, 1_000_000);
        assert!((m3.value - g).abs() <= 1e-8, "{} vs {}", m3.value, g);
        assert!(m3.value >= g);
    }

    #[test]
    fn symmetry_sweep_and_positivity() {
        for &p in &[1.05, 1.2, 1.3, 1.5, 1.7, 1.9, 2.1, 2.5, 3.0, 4.0, 6.0, 10.0] {
            let a = compute_mp(p, 1e-14).unwrap();
            let b = compute_mp(conjugate_exponent(p), 1e-14).unwrap();
            assert!((a.value - b.value).abs() <= 1e-10, "p={p}");
            assert!(a.value > 0.0 && a.value < 1.0);
            assert!(a.t_star > 1.0);
            assert!(a.residual <= 1e-8, "p={p} residual {}", a.residual);
        }
    }

    #[test]
    fn both_max_formulas_agree() {
        for &p in &[1.5, 3.0, 5.0] {
            let unit = grid_max(p, 0.0, 1.0, 1_000_000);
            let tail = grid_max(p, 1.0, 100.0, 1_000_000);
            assert!((unit - tail).abs() <= 1e-7, "p={p}: {unit} vs {tail}");
        }
    }

    #[test]
    fn bound_set() {
        let b = bounds(2.0).unwrap();
        assert_eq!(
            (b.mp, b.mp_over_6, b.mp_over_12e, b.lower_2d, b.upper),
            (0.0, 0.0, 0.0, 0.0, 0.0)
        );
        assert_eq!(b.complex_floor, 1.0 / E);
        let b3 = bounds(3.0).unwrap();
        assert_eq!(b3.mp_over_12e, compute_mp(3.0, MP_TOL).unwrap().value / (12.0 * E));
        for &p in &[1.2, 1.5, 3.0, 6.0] {
            let b = bounds(p).unwrap();
            assert!(b.lower_2d <= b.upper);
            assert!(b.mp_over_12e <= b.mp_over_6 && b.mp_over_6 <= b.mp);
        }
    }
}
