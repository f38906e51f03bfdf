//! End-to-end checks of the radius inequalities on one real operator.
//!
//! The solvers only produce lower bounds, so each estimate is started from
//! the points the corresponding argument constructs:
//!
//! * `v(T)` from the best test point of the certificate built on the `|v|(T)`
//!   witness, so `v >= (M_p / 6) |v|` holds constructively;
//! * `|v|(T)` from the `v(T)` witness and from `y = (a_j z_j)` built on the
//!   `v(T_C)` witness, so `v <= |v|` and `2 |v| >= v(T_C)`;
//! * `||T||` from both real witnesses and `||T_C||` from the real norm witness.
//!
//! The passes repeat until `|v|(T)` stops improving. Only the complex floor
//! `v(T_C) >= ||T_C|| / e` rests on the solvers alone.

use std::f64::consts::E;

use serde::Serialize;

use crate::constants::{compute_mp, MP_TOL};
use crate::error::Result;
use crate::lp_space::{Field, LpSpace, Vector};
use crate::operator::Operator;
use crate::radii::{estimate, estimate_over, Objective, RadiusEstimate, SolverConfig};
use crate::theorem::certificate::{build_certificate_thm1, default_t_grid, Theorem1Certificate};
use crate::theorem::complexification::{verify_thm2_chain, ComplexificationReport};

/// Slack of every inequality in the report.
pub const COROLLARY_SLACK: f64 = 1e-7;
/// Passes of the seeding loop.
const MAX_PASSES: usize = 6;
/// Each escalation doubles the restarts.
pub const MAX_ESCALATIONS: usize = 2;

/// All estimates for one operator, seeded as described in the module docs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedRadii {
    pub num_radius: RadiusEstimate,
    pub abs_num_radius: RadiusEstimate,
    pub op_norm: RadiusEstimate,
    pub complex_num_radius: RadiusEstimate,
    pub complex_op_norm: RadiusEstimate,
    pub certificate: Theorem1Certificate,
    pub chain: ComplexificationReport,
    pub passes: usize,
}

/// Runs the seeded estimates on a real operator.
pub fn certified_radii(space: &LpSpace, t: &Operator, cfg: &SolverConfig) -> Result<CertifiedRadii> {
    certified_radii_with_grid(space, t, cfg, &default_t_grid(space.p())?)
}

/// As [`certified_radii`], with certificates sampled on `grid`.
pub fn certified_radii_with_grid(
    space: &LpSpace,
    t: &Operator,
    cfg: &SolverConfig,
    grid: &[f64],
) -> Result<CertifiedRadii> {
    let tc = super::complexify(t)?;
    let mut abs_seeds: Vec<Vector> = Vec::new();
    let mut passes = 0;
    loop {
        passes += 1;
        let abs0 = estimate(space, t, Objective::AbsNumRadius, cfg, &abs_seeds)?;
        let certificate = build_certificate_thm1(space, t, &abs0.witness, grid)?;
        let v = estimate(
            space,
            t,
            Objective::NumRadius,
            cfg,
            std::slice::from_ref(&certificate.constructive_point),
        )?;
        let mut seeds = abs_seeds.clone();
        seeds.extend([abs0.witness.clone(), v.witness.clone()]);
        let abs = estimate(space, t, Objective::AbsNumRadius, cfg, &seeds)?;
        let norm = estimate(
            space,
            t,
            Objective::OpNorm,
            cfg,
            &[v.witness.clone(), abs.witness.clone()],
        )?;
        let norm_c = estimate_over(
            space,
            &tc,
            Field::Complex,
            Objective::OpNorm,
            cfg,
            std::slice::from_ref(&norm.witness),
        )?;
        let v_c = estimate_over(
            space,
            &tc,
            Field::Complex,
            Objective::NumRadius,
            cfg,
            std::slice::from_ref(&v.witness),
        )?;
        let chain = verify_thm2_chain(space, t, &v_c.witness)?;

        let improved = abs.value > abs0.value || chain.absrad_lb > abs.value;
        if improved && passes < MAX_PASSES {
            abs_seeds = vec![abs.witness.clone(), chain.y.clone()];
            continue;
        }
        let certificate = certificate.with_abs_radius(abs.value);
        return Ok(CertifiedRadii {
            num_radius: v,
            abs_num_radius: abs,
            op_norm: norm,
            complex_num_radius: v_c,
            complex_op_norm: norm_c,
            certificate,
            chain,
            passes,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs >= rhs - slack`.
    pub holds: bool,
}

fn check(name: &'static str, lhs: f64, rhs: f64) -> InequalityCheck {
    InequalityCheck {
        name,
        lhs,
        rhs,
        holds: lhs >= rhs - COROLLARY_SLACK,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryReport {
    pub p: f64,
    pub m: usize,
    pub mp: f64,
    pub v: f64,
    pub abs_v: f64,
    pub norm: f64,
    pub complex_v: f64,
    pub complex_norm: f64,
    pub best_bound: f64,
    pub checks: Vec<InequalityCheck>,
    /// Restart doublings needed before every check held (or the cap).
    pub escalations: usize,
    pub restarts: usize,
    pub all_hold: bool,
}

fn checks_for(r: &CertifiedRadii, mp: f64) -> Vec<InequalityCheck> {
    let (v, abs, norm) = (r.num_radius.value, r.abs_num_radius.value, r.op_norm.value);
    let (vc, nc) = (r.complex_num_radius.value, r.complex_op_norm.value);
    vec![
        check("ordering_v_abs", abs, v),
        check("ordering_abs_norm", norm, abs),
        check("certificate", v + 1e-6 - COROLLARY_SLACK, r.certificate.best_bound),
        check("theorem1", v, mp / 6.0 * abs),
        check("theorem2", abs, norm / (2.0 * E)),
        check("corollary1", v, mp / (12.0 * E) * norm),
        check("complex_floor", vc, nc / E),
        check("complexification_v", 2.0 * abs, vc),
        check("complexification_norm", nc, norm),
    ]
}

/// Checks, for a real operator,
/// `v >= (M_p/6)|v|`, `|v| >= ||T||/(2e)`, `v >= M_p/(12e) ||T||`,
/// `v(T_C) >= ||T_C||/e` and `2|v| >= v(T_C)`, together with the orderings
/// they rest on. Failing checks are retried with doubled restarts; a check
/// that survives escalation is reported, not raised.
pub fn verify_corollaries(space: &LpSpace, t: &Operator, cfg: &SolverConfig) -> Result<CorollaryReport> {
    let mp = compute_mp(space.p(), MP_TOL)?.value;
    let mut cfg = cfg.clone();
    let mut escalations = 0;
    loop {
        let r = certified_radii(space, t, &cfg)?;
        let checks = checks_for(&r, mp);
        let all_hold = checks.iter().all(|c| c.holds);
        if all_hold || escalations == MAX_ESCALATIONS {
            return Ok(CorollaryReport {
                p: space.p(),
                m: space.m(),
                mp,
                v: r.num_radius.value,
                abs_v: r.abs_num_radius.value,
                norm: r.op_norm.value,
                complex_v: r.complex_num_radius.value,
                complex_norm: r.complex_op_norm.value,
                best_bound: r.certificate.best_bound,
                checks,
                escalations,
                restarts: cfg.restarts,
                all_hold,
            });
        }
        escalations += 1;
        cfg.restarts *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    fn cfg() -> SolverConfig {
        SolverConfig::default().with_restarts(16)
    }

    #[test]
    fn identity_report() {
        let s = LpSpace::new(1.7, vec![1.0, 3.0, 0.2]).unwrap();
        let r = verify_corollaries(&s, &Operator::identity(3, Field::Real), &cfg()).unwrap();
        assert!(r.all_hold);
        for v in [r.v, r.abs_v, r.norm] {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rotation_report() {
        let s = LpSpace::uniform(3.0, 2).unwrap();
        let r = verify_corollaries(&s, &Operator::rotation(), &cfg()).unwrap();
        assert!(r.all_hold, "{:?}", r.checks);
        assert!((r.v - r.mp).abs() < 1e-9);
        assert!(r.abs_v <= 1.0 + 1e-12);
    }

    #[test]
    fn zero_report() {
        let s = LpSpace::uniform(2.5, 3).unwrap();
        let r = verify_corollaries(&s, &Operator::zero(3, Field::Real), &cfg()).unwrap();
        assert!(r.all_hold);
        assert_eq!((r.v, r.abs_v, r.norm), (0.0, 0.0, 0.0));
    }

    #[test]
    fn random_operators_hold() {
        for seed in 0..12u64 {
            let mut rng = random::stream_rng(seed, 9);
            let m = 2 + seed as usize % 4;
            let p = [1.3, 1.7, 2.5, 4.0][seed as usize % 4];
            let s = random::space(&mut rng, p, m);
            let t = random::operator(&mut rng, m, Field::Real);
            let r = verify_corollaries(&s, &t, &cfg()).unwrap();
            assert!(r.all_hold, "seed {seed}: {:?}", r.checks);
        }
    }
}
