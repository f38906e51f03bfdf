//! Upper estimates of the numerical index by searching for operators with a
//! small ratio `v(T) / ||T||`.
//!
//! Each candidate ratio bounds the index from above, up to solver slack on
//! `v(T)`, which can only push a ratio down. The best candidates are
//! therefore re-solved with more restarts on fresh random streams before one
//! is reported.

use std::f64::consts::E;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{compute_mp, MP_TOL};
use crate::error::{Error, Result};
use crate::lp_space::{Field, LpSpace};
use crate::operator::Operator;
use crate::radii::{estimate, Objective, SolverConfig};
use crate::random::{self, stream_rng};

/// Largest dimension for which all signed permutations are enumerated.
const FULL_PERMUTATION_M: usize = 4;
/// Streams reserved per family so candidate draws never overlap.
const FAMILY_STRIDE: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexConfig {
    pub field: Field,
    pub random: usize,
    pub skew: usize,
    /// Sampled signed permutations and differences of pairs, used when the
    /// full enumeration is too large.
    pub permutation_samples: usize,
    /// Candidates refined by descent.
    pub descent_top: usize,
    pub descent_steps: usize,
    /// Candidates re-solved before reporting.
    pub verify_top: usize,
    /// Restart multiplier of the re-solve.
    pub verify_factor: usize,
    pub solver: SolverConfig,
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self {
            field: Field::Real,
            random: 256,
            skew: 64,
            permutation_samples: 64,
            descent_top: 8,
            descent_steps: 40,
            verify_top: 8,
            verify_factor: 4,
            solver: SolverConfig::default().with_restarts(16),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexEstimate {
    pub p: f64,
    pub m: usize,
    pub weights: Vec<f64>,
    pub field: Field,
    /// Smallest verified `v(T) / ||T||`.
    pub estimate: f64,
    /// Minimizer, scaled so its norm estimate is 1.
    pub best_t: Operator,
    pub candidates: usize,
    pub seed: u64,
    /// Range of the ratio over all evaluated candidates before verification.
    pub min_candidate_ratio: f64,
    pub max_candidate_ratio: f64,
}

#[derive(Debug, Clone)]
struct Scored {
    op: Operator,
    ratio: f64,
    norm: f64,
    converged: bool,
}

fn score(space: &LpSpace, t: &Operator, cfg: &SolverConfig) -> Result<Option<Scored>> {
    let v = estimate(space, t, Objective::NumRadius, cfg, &[])?;
    let n = estimate(space, t, Objective::OpNorm, cfg, std::slice::from_ref(&v.witness))?;
    if !(n.value > 0.0) {
        return Ok(None);
    }
    Ok(Some(Scored {
        op: t.clone(),
        ratio: v.value / n.value,
        norm: n.value,
        converged: v.converged,
    }))
}

fn signed_permutation(m: usize, perm: &[usize], signs: u64) -> Vec<f64> {
    let mut e = vec![0.0; m * m];
    for (i, &k) in perm.iter().enumerate() {
        e[i * m + k] = if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
    }
    e
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

fn random_permutation(rng: &mut impl Rng, m: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        p.swap(i, rng.random_range(0..=i));
    }
    p
}

fn in_field(op: Operator, field: Field) -> Operator {
    match field {
        Field::Real => op,
        Field::Complex => op.to_complex(),
    }
}

/// Every candidate of the initial pool, in a fixed order.
fn candidate_pool(m: usize, cfg: &IndexConfig, seed: u64) -> Vec<Operator> {
    let field = cfg.field;
    let mut pool = Vec::new();
    for j in 0..cfg.random {
        pool.push(random::operator(&mut stream_rng(seed, j as u64), m, field));
    }
    for j in 0..cfg.skew {
        let mut rng = stream_rng(seed, FAMILY_STRIDE + j as u64);
        let skew = random::skew_operator(&mut rng, m);
        pool.push(match field {
            Field::Real => skew,
            Field::Complex => {
                let im = random::skew_operator(&mut rng, m);
                let e = (0..m * m)
                    .map(|ik| {
                        let (i, k) = (ik / m, ik % m);
                        Complex64::new(skew.entry(i, k).re, im.entry(i, k).re)
                    })
                    .collect();
                Operator::from_complex_entries(m, e)
            }
        });
    }
    let signed: Vec<Vec<f64>> = if m <= FULL_PERMUTATION_M {
        permutations(m)
            .iter()
            .flat_map(|perm| (0..1u64 << m).map(move |s| signed_permutation(m, perm, s)))
            .collect()
    } else {
        (0..cfg.permutation_samples)
            .map(|j| {
                let mut rng = stream_rng(seed, 2 * FAMILY_STRIDE + j as u64);
                let perm = random_permutation(&mut rng, m);
                signed_permutation(m, &perm, rng.random())
            })
            .collect()
    };
    for e in &signed {
        pool.push(in_field(Operator::from_real_entries(m, e.clone()), field));
    }
    for j in 0..cfg.permutation_samples.min(signed.len() * signed.len()) {
        let mut rng = stream_rng(seed, 3 * FAMILY_STRIDE + j as u64);
        let (a, b) = (rng.random_range(0..signed.len()), rng.random_range(0..signed.len()));
        let diff: Vec<f64> = signed[a].iter().zip(&signed[b]).map(|(x, y)| x - y).collect();
        if diff.iter().any(|&d| d != 0.0) {
            pool.push(in_field(Operator::from_real_entries(m, diff), field));
        }
    }
    for i in 0..m {
        for k in 0..m {
            if i != k {
                let mut e = vec![0.0; m * m];
                e[i * m + k] = 1.0;
                pool.push(in_field(Operator::from_real_entries(m, e), field));
            }
        }
    }
    // 2x2 signed permutations on a coordinate pair, zero elsewhere
    if m > 2 {
        for i in 0..m {
            for k in i + 1..m {
                for perm in permutations(2) {
                    for signs in 0..4 {
                        let block = signed_permutation(2, &perm, signs);
                        let mut e = vec![0.0; m * m];
                        let idx = [i, k];
                        for (r, &row) in idx.iter().enumerate() {
                            for (c, &col) in idx.iter().enumerate() {
                                e[row * m + col] = block[r * 2 + c];
                            }
                        }
                        pool.push(in_field(Operator::from_real_entries(m, e), field));
                    }
                }
            }
        }
    }
    pool
}

/// `t` in the top-left corner of an `m x m` zero matrix.
pub fn pad_operator(t: &Operator, m: usize) -> Operator {
    let k = t.dim();
    assert!(k <= m, "cannot pad a {k}x{k} operator to {m}x{m}");
    let at = |i: usize, j: usize| (i < k && j < k).then(|| t.entry(i, j));
    let cells = (0..m * m).map(|ij| at(ij / m, ij % m).unwrap_or_default());
    match t.field() {
        Field::Real => Operator::from_real_entries(m, cells.map(|z| z.re).collect()),
        Field::Complex => Operator::from_complex_entries(m, cells.collect()),
    }
}

fn perturb(t: &Operator, rng: &mut impl Rng, step: f64) -> Operator {
    let scale = step * t.frobenius_sq().sqrt();
    let d = random::operator(rng, t.dim(), t.field());
    let dn = d.frobenius_sq().sqrt();
    t.add(&d.scale(scale / dn)).expect("same dimension")
}

/// Random-direction descent on the entries, re-solving `v` at every trial.
fn descend(space: &LpSpace, start: Scored, cfg: &IndexConfig, seed: u64, lane: u64) -> Result<Scored> {
    let mut rng = stream_rng(seed, 4 * FAMILY_STRIDE + lane);
    let mut best = start;
    let mut step = 0.1;
    for _ in 0..cfg.descent_steps {
        let trial = perturb(&best.op, &mut rng, step);
        match score(space, &trial, &cfg.solver)? {
            Some(s) if s.converged && s.ratio < best.ratio => {
                best = s;
                step = (step * 1.5).min(0.5);
            }
            _ => step *= 0.5,
        }
        if step < 1e-6 {
            break;
        }
    }
    Ok(best)
}

fn by_ratio(a: &(usize, Scored), b: &(usize, Scored)) -> std::cmp::Ordering {
    a.1.ratio.total_cmp(&b.1.ratio).then(a.0.cmp(&b.0))
}

/// Re-solves with more restarts on a disjoint seed; each quantity keeps the
/// larger of the two lower bounds.
fn verify(space: &LpSpace, s: &Scored, cfg: &IndexConfig) -> Result<Scored> {
    let base = &cfg.solver;
    let strong = SolverConfig {
        restarts: base.restarts * cfg.verify_factor.max(1),
        seed: base.seed ^ 0x005E_ED0F_1DE5,
        ..base.clone()
    };
    let v0 = estimate(space, &s.op, Objective::NumRadius, base, &[])?;
    let v = estimate(
        space,
        &s.op,
        Objective::NumRadius,
        &strong,
        std::slice::from_ref(&v0.witness),
    )?;
    let n0 = estimate(space, &s.op, Objective::OpNorm, base, std::slice::from_ref(&v.witness))?;
    let n = estimate(
        space,
        &s.op,
        Objective::OpNorm,
        &strong,
        &[n0.witness.clone(), v.witness.clone()],
    )?;
    Ok(Scored {
        op: s.op.clone(),
        ratio: v.value / n.value,
        norm: n.value,
        converged: v.converged,
    })
}

/// Smallest verified `v(T)/||T||` over the candidate families and the
/// descent from the best of them.
pub fn estimate_index(space: &LpSpace, cfg: &IndexConfig) -> Result<IndexEstimate> {
    estimate_index_seeded(space, cfg, &[])
}

/// As [`estimate_index`], with `extra` appended to the candidate pool.
pub fn estimate_index_seeded(space: &LpSpace, cfg: &IndexConfig, extra: &[Operator]) -> Result<IndexEstimate> {
    cfg.solver.validate()?;
    if cfg.verify_top == 0 {
        return Err(Error::InvalidConfig("verify_top must be >= 1".into()));
    }
    let m = space.m();
    if let Some(t) = extra.iter().find(|t| t.dim() != m || t.field() != cfg.field) {
        return Err(Error::InvalidConfig(format!(
            "extra candidate is {:?} {}x{}, expected {:?} {m}x{m}",
            t.field(),
            t.dim(),
            t.dim(),
            cfg.field
        )));
    }
    let seed = cfg.solver.seed;
    let mut pool = candidate_pool(m, cfg, seed);
    pool.extend_from_slice(extra);
    let scored: Vec<Option<Scored>> = pool
        .par_iter()
        .map(|t| score(space, t, &cfg.solver))
        .collect::<Result<_>>()?;
    let mut ranked: Vec<(usize, Scored)> = scored
        .into_iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|s| (i, s)))
        .collect();
    if ranked.is_empty() {
        return Err(Error::InvalidConfig("no candidate with nonzero norm".into()));
    }
    let min_candidate_ratio = ranked.iter().map(|r| r.1.ratio).fold(f64::INFINITY, f64::min);
    let max_candidate_ratio = ranked.iter().map(|r| r.1.ratio).fold(0.0, f64::max);
    ranked.sort_by(by_ratio);

    let n_pool = ranked.len();
    let descended: Vec<(usize, Scored)> = ranked
        .iter()
        .take(cfg.descent_top)
        .enumerate()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(lane, (i, s))| descend(space, s.clone(), cfg, seed, lane as u64).map(|d| (n_pool + *i, d)))
        .collect::<Result<_>>()?;
    let descent_evals = descended.len() * cfg.descent_steps;
    ranked.extend(descended);
    ranked.sort_by(by_ratio);

    let verified: Vec<(usize, Scored)> = ranked
        .iter()
        .take(cfg.verify_top)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(i, s)| verify(space, s, cfg).map(|v| (*i, v)))
        .collect::<Result<_>>()?;
    let (_, best) = verified
        .into_iter()
        .min_by(by_ratio)
        .expect("verify_top >= 1 and the pool is nonempty");

    Ok(IndexEstimate {
        p: space.p(),
        m,
        weights: space.weights().to_vec(),
        field: cfg.field,
        estimate: best.ratio,
        best_t: best.op.scale(1.0 / best.norm),
        candidates: pool.len() + descent_evals,
        seed,
        min_candidate_ratio,
        max_candidate_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub m: usize,
    pub estimate: f64,
    pub mp: f64,
    /// `M_p / (12 e)`.
    pub floor: f64,
    /// `estimate >= floor - 1e-6`.
    pub floor_ok: bool,
    /// `estimate <= estimate at the previous m + 1e-3`; `None` for the first m.
    pub monotone_ok: Option<bool>,
}

/// Slack of the soft monotonicity flag.
pub const MONOTONE_SLACK: f64 = 1e-3;
/// Slack of the floor flag.
pub const FLOOR_SLACK: f64 = 1e-6;

/// One estimate per `(p, m)` on uniform weights, with soft diagnostics.
/// Rows follow `p_list` order, then ascending `m`; each dimension also tries
/// the previous dimension's minimizer padded with zeros.
pub fn sweep(p_list: &[f64], m_list: &[usize], cfg: &IndexConfig) -> Result<Vec<SweepRow>> {
    let mut ms = m_list.to_vec();
    ms.sort_unstable();
    ms.dedup();
    let mut rows = Vec::new();
    for &p in p_list {
        let mp = compute_mp(p, MP_TOL)?.value;
        let floor = mp / (12.0 * E);
        let mut prev: Option<f64> = None;
        let mut prev_t: Option<Operator> = None;
        for &m in &ms {
            let extra: Vec<Operator> = prev_t.iter().map(|t| pad_operator(t, m)).collect();
            let est = estimate_index_seeded(&LpSpace::uniform(p, m)?, cfg, &extra)?;
            rows.push(SweepRow {
                p,
                m,
                estimate: est.estimate,
                mp,
                floor,
                floor_ok: est.estimate >= floor - FLOOR_SLACK,
                monotone_ok: prev.map(|e| est.estimate <= e + MONOTONE_SLACK),
            });
            prev = Some(est.estimate);
            prev_t = Some(est.best_t);
        }
    }
    Ok(rows)
}
