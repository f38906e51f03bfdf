//! Complexification of real operators and the sign-pattern bound relating
//! `v(T_C)` to `|v|(T)`.
//!
//! For a unit complex `x = (a_j e^{i theta_j})`, `|sum w x# T_C x|` is bounded
//! by the sum of the cosine and sine parts of the phases, each at most the
//! maximum over sign patterns `z` of
//! `f(z) = sum_j a_j^(p-1) |sum_k a_k z_k alpha_jk|` with `alpha_jk = w_j M_jk`.
//! The real vector `y = (a_j z_j)` is unit and attains `f(z)` in the absolute
//! numerical radius objective.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp_space::{self, Field, LpSpace, Vector};
use crate::operator::{apply, Operator};
use crate::radii::{objective_value, Objective};
use crate::theorem::certificate::UNIT_TOL;

/// Largest dimension enumerated exhaustively.
pub const MAX_ENUMERATION_M: usize = 24;
/// Slack of each link of the chain.
pub const CHAIN_SLACK: f64 = 1e-9;

/// The same matrix acting on complex vectors: `T_C x = T(Re x) + i T(Im x)`.
pub fn complexify(t: &Operator) -> Result<Operator> {
    match t.field() {
        Field::Real => Ok(t.to_complex()),
        Field::Complex => Err(Error::FieldMismatch {
            expected: Field::Real,
            found: Field::Complex,
        }),
    }
}

/// `alpha_jk = w_j M_jk`, row-major.
pub fn alpha_matrix(space: &LpSpace, t: &Operator) -> Result<Vec<Vec<f64>>> {
    t.check_space(space)?;
    let m = space.m();
    let e = t.real_entries()?;
    Ok((0..m)
        .map(|j| (0..m).map(|k| space.weights()[j] * e[j * m + k]).collect())
        .collect())
}

/// `sum_j a_j^(p-1) |sum_k a_k z_k alpha_jk|` for any `z` in the cube.
pub fn vertex_objective(p: f64, a: &[f64], alpha: &[Vec<f64>], z: &[f64]) -> f64 {
    alpha
        .iter()
        .zip(a)
        .map(|(row, aj)| {
            let inner: f64 = row.iter().zip(a).zip(z).map(|((al, ak), zk)| ak * zk * al).sum();
            aj.powf(p - 1.0) * inner.abs()
        })
        .sum()
}

fn pattern(m: usize, idx: u64) -> Vec<f64> {
    (0..m)
        .map(|k| if idx >> (m - 1 - k) & 1 == 1 { -1.0 } else { 1.0 })
        .collect()
}

/// Maximum of [`vertex_objective`] over `z in {-1, 1}^m`.
///
/// Ties go to the lexicographically smallest pattern with `+1` ordered before
/// `-1`. Since `f(-z) = f(z)`, only patterns with `z_1 = +1` are visited.
pub fn sign_pattern_max(space: &LpSpace, a: &[f64], alpha: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let m = space.m();
    if m > MAX_ENUMERATION_M {
        return Err(Error::TooLarge {
            m,
            max: MAX_ENUMERATION_M,
        });
    }
    if a.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: a.len(),
        });
    }
    if let Some(row) = alpha.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: row.len(),
        });
    }
    if alpha.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: alpha.len(),
        });
    }
    if let Some(index) = a.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::NonFinite { index });
    }
    let p = space.p();
    let (value, idx) = (0..1u64 << (m - 1))
        .into_par_iter()
        .map(|idx| (vertex_objective(p, a, alpha, &pattern(m, idx)), idx))
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX),
            |l, r| if r.0 > l.0 || (r.0 == l.0 && r.1 < l.1) { r } else { l },
        );
    Ok((value, pattern(m, idx)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexificationReport {
    pub alpha: Vec<Vec<f64>>,
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
    /// `|sum w x# T_C x|`.
    pub lhs: f64,
    /// `sum_j a_j^(p-1) |sum_k a_k e^{i theta_k} alpha_jk|`.
    pub triangle_sum: f64,
    /// `f(cos theta)`.
    pub cos_part: f64,
    /// `f(sin theta)`.
    pub sin_part: f64,
    pub vertex_max: f64,
    pub argmax_z: Vec<f64>,
    /// `y = (a_j z_j)` at the maximizing pattern.
    pub y: Vector,
    /// `sum w |y|^(p-1) |Ty|`.
    pub absrad_lb: f64,
    pub chain_ok: bool,
}

/// Evaluates every link of the chain for a real operator and a unit `x`
/// (real `x` is embedded).
pub fn verify_thm2_chain(space: &LpSpace, t: &Operator, x: &Vector) -> Result<ComplexificationReport> {
    let alpha = alpha_matrix(space, t)?;
    space.check(x)?;
    let n = lp_space::norm(space, x)?;
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit { norm: n });
    }
    let p = space.p();
    let xc = Vector::Complex(x.to_complex());
    let tc = complexify(t)?;
    let lhs = lp_space::pair(space, &lp_space::sharp(space, &xc)?, &apply(space, &tc, &xc)?)?.norm();

    let (a, theta) = lp_space::amplitude_phase(&xc);
    let triangle_sum = alpha
        .iter()
        .zip(&a)
        .map(|(row, aj)| {
            let inner: Complex64 = row
                .iter()
                .zip(&a)
                .zip(&theta)
                .map(|((al, ak), th)| Complex64::from_polar(ak * al, *th))
                .sum();
            aj.powf(p - 1.0) * inner.norm()
        })
        .sum();
    let cos: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
    let sin: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
    let cos_part = vertex_objective(p, &a, &alpha, &cos);
    let sin_part = vertex_objective(p, &a, &alpha, &sin);

    let (vertex_max, z) = sign_pattern_max(space, &a, &alpha)?;
    let y = Vector::Real(a.iter().zip(&z).map(|(a, z)| a * z).collect());
    let absrad_lb = objective_value(space, t, &y, Objective::AbsNumRadius)?;
    let chain_ok = lhs <= 2.0 * vertex_max + CHAIN_SLACK && vertex_max <= absrad_lb + CHAIN_SLACK;
    Ok(ComplexificationReport {
        alpha,
        amplitudes: a,
        phases: theta,
        lhs,
        triangle_sum,
        cos_part,
        sin_part,
        vertex_max,
        argmax_z: z,
        y,
        absrad_lb,
        chain_ok,
    })
}
