//! A reproducible randomized corpus exercising every checked inequality.
//!
//! Items are generated from `(seed, item)` streams and evaluated in
//! parallel; tallies are folded in item order, so a report depends only on
//! the configuration.

use std::f64::consts::E;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::lp_space::Field;
use crate::radii::{brute_radius_2d, estimate, Objective, SolverConfig};
use crate::random::{self, stream_rng};
use crate::theorem::{lskf_test_points, verify_corollaries, verify_lskf, verify_thm2_chain};

/// Exponents cycled through by the corpus.
pub const CORPUS_EXPONENTS: [f64; 4] = [1.3, 1.7, 2.5, 4.0];
/// Agreement required between the solver and the grid oracle.
pub const ORACLE_TOL: f64 = 1e-4;
/// Slack of the complex floor on random complex operators.
pub const COMPLEX_FLOOR_SLACK: f64 = 1e-6;
/// Failing item ids kept per property.
const KEPT_FAILURES: usize = 10;

const LSKF_STREAM: u64 = 1 << 40;
const CHAIN_STREAM: u64 = 2 << 40;
const COMPLEX_STREAM: u64 = 3 << 40;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusConfig {
    pub seed: u64,
    /// Real operators, `m` in `2..=6`, run through every radius inequality.
    pub operators: usize,
    /// Random `(T, x, lambda)` triples with `lambda` in `[-1, 10]`.
    pub lskf_triples: usize,
    /// Random `(T, x)` pairs, `m` in `2..=4`, `x` complex.
    pub chain_pairs: usize,
    /// Random complex operators, `m` in `2..=4`.
    pub complex_operators: usize,
    pub oracle_resolution: usize,
    pub solver: SolverConfig,
}

impl CorpusConfig {
    pub fn quick(seed: u64) -> Self {
        Self {
            seed,
            operators: 40,
            lskf_triples: 100,
            chain_pairs: 100,
            complex_operators: 40,
            oracle_resolution: 1_000_000,
            solver: SolverConfig::default().with_seed(seed),
        }
    }

    pub fn full(seed: u64) -> Self {
        Self {
            operators: 1000,
            lskf_triples: 1000,
            chain_pairs: 1000,
            complex_operators: 500,
            ..Self::quick(seed)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyTally {
    pub name: String,
    pub checked: usize,
    pub failed: usize,
    /// Smallest `lhs - rhs` seen (negative beyond the slack means failure).
    pub worst_margin: f64,
    /// First failing item ids.
    pub failures: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusReport {
    pub config: CorpusConfig,
    pub properties: Vec<PropertyTally>,
    pub all_pass: bool,
}

/// One outcome: property, item, margin, pass.
type Outcome = (&'static str, usize, f64, bool);

fn item_shape(rng: &mut impl Rng, i: usize, m_lo: usize, m_hi: usize) -> (f64, usize) {
    let p = CORPUS_EXPONENTS[i % CORPUS_EXPONENTS.len()];
    let m = rng.random_range(m_lo..=m_hi);
    (p, m)
}

fn operator_item(cfg: &CorpusConfig, i: usize) -> Result<Vec<Outcome>> {
    let mut rng = stream_rng(cfg.seed, i as u64);
    let (p, m) = item_shape(&mut rng, i, 2, 6);
    let space = random::space(&mut rng, p, m);
    let t = random::operator(&mut rng, m, Field::Real);
    let report = verify_corollaries(&space, &t, &cfg.solver)?;
    let mut out: Vec<Outcome> = report
        .checks
        .iter()
        .map(|c| {
            let prop = match c.name {
                "ordering_v_abs" | "ordering_abs_norm" => "ordering",
                "complexification_v" | "complexification_norm" => "complexification",
                other => other,
            };
            (prop, i, c.lhs - c.rhs, c.holds)
        })
        .collect();
    if m == 2 {
        for (obj, est) in [
            (Objective::NumRadius, report.v),
            (Objective::AbsNumRadius, report.abs_v),
            (Objective::OpNorm, report.norm),
        ] {
            let brute = brute_radius_2d(&space, &t, obj, cfg.oracle_resolution)?;
            let gap = (est - brute).abs();
            out.push(("oracle_m2", i, ORACLE_TOL - gap, gap <= ORACLE_TOL));
        }
    }
    Ok(out)
}

fn lskf_item(cfg: &CorpusConfig, i: usize) -> Result<Vec<Outcome>> {
    let mut rng = stream_rng(cfg.seed, LSKF_STREAM + i as u64);
    let (p, m) = item_shape(&mut rng, i, 2, 6);
    let space = random::space(&mut rng, p, m);
    let t = random::operator(&mut rng, m, Field::Real);
    let x = random::unit_vector(&mut rng, &space, Field::Real);
    let lambda = rng.random_range(-1.0..=10.0);
    let seeds = lskf_test_points(&space, &t, &x, lambda)?;
    let v = estimate(&space, &t, Objective::NumRadius, &cfg.solver, &seeds)?;
    let c = verify_lskf(&space, &t, &x, lambda, v.value)?;
    Ok(vec![("lskf", i, c.lhs - c.rhs, c.holds)])
}

fn chain_item(cfg: &CorpusConfig, i: usize) -> Result<Vec<Outcome>> {
    let mut rng = stream_rng(cfg.seed, CHAIN_STREAM + i as u64);
    let (p, m) = item_shape(&mut rng, i, 2, 4);
    let space = random::space(&mut rng, p, m);
    let t = random::operator(&mut rng, m, Field::Real);
    let x = random::unit_vector(&mut rng, &space, Field::Complex);
    let r = verify_thm2_chain(&space, &t, &x)?;
    let margin = (2.0 * r.vertex_max - r.lhs).min(r.absrad_lb - r.vertex_max);
    Ok(vec![("thm2_chain", i, margin, r.chain_ok)])
}

fn complex_item(cfg: &CorpusConfig, i: usize) -> Result<Vec<Outcome>> {
    let mut rng = stream_rng(cfg.seed, COMPLEX_STREAM + i as u64);
    let (p, m) = item_shape(&mut rng, i, 2, 4);
    let space = random::space(&mut rng, p, m);
    let t = random::operator(&mut rng, m, Field::Complex);
    let v = estimate(&space, &t, Objective::NumRadius, &cfg.solver, &[])?;
    let n = estimate(
        &space,
        &t,
        Objective::OpNorm,
        &cfg.solver,
        std::slice::from_ref(&v.witness),
    )?;
    let ratio = v.value / n.value;
    let floor = 1.0 / E;
    Ok(vec![(
        "complex_index_floor",
        i,
        ratio - floor,
        ratio >= floor - COMPLEX_FLOOR_SLACK,
    )])
}

fn run_family(n: usize, f: impl Fn(usize) -> Result<Vec<Outcome>> + Sync + Send) -> Result<Vec<Outcome>> {
    let parts: Vec<Vec<Outcome>> = (0..n).into_par_iter().map(f).collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

/// Runs the whole corpus.
pub fn run_corpus(cfg: &CorpusConfig) -> Result<CorpusReport> {
    cfg.solver.validate()?;
    let mut outcomes = run_family(cfg.operators, |i| operator_item(cfg, i))?;
    outcomes.extend(run_family(cfg.lskf_triples, |i| lskf_item(cfg, i))?);
    outcomes.extend(run_family(cfg.chain_pairs, |i| chain_item(cfg, i))?);
    outcomes.extend(run_family(cfg.complex_operators, |i| complex_item(cfg, i))?);

    let mut properties: Vec<PropertyTally> = Vec::new();
    for (name, item, margin, pass) in outcomes {
        let idx = match properties.iter().position(|t| t.name == name) {
            Some(idx) => idx,
            None => {
                properties.push(PropertyTally {
                    name: name.to_owned(),
                    checked: 0,
                    failed: 0,
                    worst_margin: f64::INFINITY,
                    failures: Vec::new(),
                });
                properties.len() - 1
            }
        };
        let tally = &mut properties[idx];
        tally.checked += 1;
        tally.worst_margin = tally.worst_margin.min(margin);
        if !pass {
            tally.failed += 1;
            if tally.failures.len() < KEPT_FAILURES && !tally.failures.contains(&item) {
                tally.failures.push(item);
            }
        }
    }
    let all_pass = properties.iter().all(|t| t.failed == 0);
    Ok(CorpusReport {
        config: cfg.clone(),
        properties,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(seed: u64) -> CorpusConfig {
        CorpusConfig {
            operators: 6,
            lskf_triples: 10,
            chain_pairs: 10,
            complex_operators: 4,
            oracle_resolution: 100_000,
            solver: SolverConfig::default().with_seed(seed).with_restarts(16),
            seed,
        }
    }

    #[test]
    fn tiny_corpus_passes_and_is_deterministic() {
        let a = run_corpus(&tiny(3)).unwrap();
        assert!(a.all_pass, "{:#?}", a.properties);
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_corpus(&tiny(3)).unwrap());
        assert_eq!(a, b);
        assert!(a.properties.iter().any(|t| t.name == "theorem1"));
    }
}
