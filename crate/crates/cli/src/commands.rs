use std::f64::consts::E;

use anyhow::{bail, Result};
use numindex_core::constants::{bounds, compute_mp, BoundSet, MpResult, MP_TOL};
use numindex_core::index_search::{estimate_index, sweep, IndexConfig, IndexEstimate};
use numindex_core::lp_space::{self, Field, LpSpace, Vector};
use numindex_core::radii::{all_radii, estimate, Objective, RadiusEstimate, SolverConfig};
use numindex_core::random::{self, stream_rng};
use numindex_core::theorem::{
    build_certificate_thm1, certified_radii_with_grid, complexify, default_t_grid, log_t_grid, CertifiedRadii,
    ComplexificationReport, Theorem1Certificate,
};
use numindex_core::verification::{run_corpus, CorpusConfig, CORPUS_EXPONENTS};
use numindex_core::Operator;
use rand::Rng;
use serde::Serialize;

use crate::operator_file;
use crate::output::{format_f64, to_csv, to_json};
use crate::{BudgetArgs, Cli, Command, Format, GlobalArgs, IndexArgs, ObjectiveArg, WitnessSource};

/// Slack of the ordering and radius-ratio checks.
const SLACK: f64 = 1e-7;
/// Slack of `v >= best_bound`.
const BOUND_SLACK: f64 = 1e-6;
/// Restart doublings before a failed check is reported.
const ESCALATIONS: usize = 2;

pub struct Report {
    pub text: String,
    pub ok: bool,
    pub notes: Vec<String>,
}

impl Report {
    fn new(text: String, ok: bool) -> Self {
        Self {
            text,
            ok,
            notes: Vec::new(),
        }
    }
}

fn solver(g: &GlobalArgs) -> Result<SolverConfig> {
    let mut cfg = SolverConfig::default().with_seed(g.seed);
    if let Some(r) = g.restarts {
        cfg.restarts = r;
    }
    if let Some(t) = g.tol {
        cfg.tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn fmt_row(values: &[f64]) -> Vec<String> {
    values.iter().map(|&v| format_f64(v)).collect()
}

pub fn run(cli: &Cli) -> Result<Report> {
    let g = &cli.global;
    match &cli.command {
        Command::Mp { p } => mp(g, p),
        Command::Radius { spec, objective } => radius(g, spec, *objective),
        Command::Certify {
            spec,
            witness,
            witness_file,
            t_max,
            t_points,
            random,
            p,
            m,
        } => {
            let grid = GridArgs {
                t_max: *t_max,
                points: *t_points,
            };
            match (spec, random) {
                (_, Some(n)) => certify_random(g, *n, *p, *m, &grid),
                (Some(spec), None) => certify_file(g, spec, *witness, witness_file.as_deref(), &grid),
                (None, None) => bail!("certify needs an operator file or --random N"),
            }
        }
        Command::Complexify { spec } => complexify_cmd(g, spec),
        Command::Index(args) => index(g, args),
        Command::Sweep { p, m, budget, field } => sweep_cmd(g, p, m, budget, (*field).into()),
        Command::Verify {
            quick,
            operators,
            lskf_triples,
            chain_pairs,
            complex_operators,
            oracle_resolution,
        } => {
            let mut cfg = if *quick {
                CorpusConfig::quick(g.seed)
            } else {
                CorpusConfig::full(g.seed)
            };
            cfg.solver = solver(g)?;
            let set = |slot: &mut usize, v: &Option<usize>| {
                if let Some(v) = v {
                    *slot = *v;
                }
            };
            set(&mut cfg.operators, operators);
            set(&mut cfg.lskf_triples, lskf_triples);
            set(&mut cfg.chain_pairs, chain_pairs);
            set(&mut cfg.complex_operators, complex_operators);
            set(&mut cfg.oracle_resolution, oracle_resolution);
            let report = run_corpus(&cfg)?;
            let text = match g.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&report)?,
                Format::Csv => to_csv(
                    &["property", "checked", "failed", "worst_margin"],
                    &report
                        .properties
                        .iter()
                        .map(|t| {
                            vec![
                                t.name.clone(),
                                t.checked.to_string(),
                                t.failed.to_string(),
                                format_f64(t.worst_margin),
                            ]
                        })
                        .collect::<Vec<_>>(),
                )?,
            };
            Ok(Report::new(text, report.all_pass))
        }
    }
}

#[derive(Serialize)]
struct MpRow {
    mp: MpResult,
    bounds: BoundSet,
}

fn mp(g: &GlobalArgs, ps: &[f64]) -> Result<Report> {
    let tol = g.tol.unwrap_or(MP_TOL);
    let rows = ps
        .iter()
        .map(|&p| {
            Ok(MpRow {
                mp: compute_mp(p, tol)?,
                bounds: bounds(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let text = match g.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&rows)?,
        Format::Csv => to_csv(
            &[
                "p",
                "value",
                "t_star",
                "residual",
                "mp_over_6",
                "mp_over_12e",
                "lower_2d",
                "upper",
                "complex_floor",
            ],
            &rows
                .iter()
                .map(|r| {
                    fmt_row(&[
                        r.mp.p,
                        r.mp.value,
                        r.mp.t_star,
                        r.mp.residual,
                        r.bounds.mp_over_6,
                        r.bounds.mp_over_12e,
                        r.bounds.lower_2d,
                        r.bounds.upper,
                        r.bounds.complex_floor,
                    ])
                })
                .collect::<Vec<_>>(),
        )?,
    };
    Ok(Report::new(text, true))
}

#[derive(Serialize)]
struct RadiusReport {
    p: f64,
    weights: Vec<f64>,
    field: Field,
    op_norm: Option<RadiusEstimate>,
    num_radius: Option<RadiusEstimate>,
    abs_num_radius: Option<RadiusEstimate>,
    /// `v <= |v| <= ||T||` within 1e-7, over the computed quantities.
    ordering_ok: bool,
}

fn radius(g: &GlobalArgs, spec: &std::path::Path, objective: ObjectiveArg) -> Result<Report> {
    let f = operator_file::load(spec)?;
    let cfg = solver(g)?;
    let (space, t) = (&f.space, &f.operator);
    if objective == ObjectiveArg::Absv && t.field() == Field::Complex {
        bail!("the absolute numerical radius is defined for real operators only");
    }
    let one = |obj| estimate(space, t, obj, &cfg, &[]).map(Some);
    let (n, v, a) = match objective {
        ObjectiveArg::Norm => (one(Objective::OpNorm)?, None, None),
        ObjectiveArg::V => (None, one(Objective::NumRadius)?, None),
        ObjectiveArg::Absv => (None, None, one(Objective::AbsNumRadius)?),
        ObjectiveArg::All => {
            let r = all_radii(space, t, &cfg, &[])?;
            (Some(r.op_norm), Some(r.num_radius), r.abs_num_radius)
        }
    };
    let vals = [v.as_ref(), a.as_ref(), n.as_ref()];
    let present: Vec<f64> = vals.iter().flatten().map(|e| e.value).collect();
    let ordering_ok = present.windows(2).all(|w| w[0] <= w[1] + SLACK);
    let report = RadiusReport {
        p: space.p(),
        weights: space.weights().to_vec(),
        field: t.field(),
        op_norm: n,
        num_radius: v,
        abs_num_radius: a,
        ordering_ok,
    };
    let text = match g.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let rows = [
                ("op_norm", &report.op_norm),
                ("num_radius", &report.num_radius),
                ("abs_num_radius", &report.abs_num_radius),
            ]
            .iter()
            .filter_map(|(name, e)| {
                e.as_ref().map(|e| {
                    vec![
                        name.to_string(),
                        format_f64(e.value),
                        e.restarts.to_string(),
                        e.iterations.to_string(),
                        e.converged.to_string(),
                    ]
                })
            })
            .collect::<Vec<_>>();
            to_csv(&["objective", "value", "restarts", "iterations", "converged"], &rows)?
        }
    };
    Ok(Report::new(text, ordering_ok))
}

struct GridArgs {
    t_max: Option<f64>,
    points: usize,
}

impl GridArgs {
    fn grid(&self, p: f64) -> Result<Vec<f64>> {
        Ok(match self.t_max {
            None if self.points == 512 => default_t_grid(p)?,
            None => {
                let t_star = compute_mp(p, MP_TOL)?.t_star;
                log_t_grid(p, 10f64.max(3.0 * t_star), self.points)?
            }
            Some(t_max) => log_t_grid(p, t_max, self.points)?,
        })
    }
}

#[derive(Serialize)]
struct CertifyReport {
    certificate: Theorem1Certificate,
    v: f64,
    abs_v: f64,
    norm: f64,
    /// The `|v|` value `v` is compared against: the estimate when
    /// solving, `2 beta0` for a supplied witness.
    abs_reference: f64,
    /// `v >= best_bound - 1e-6`.
    bound_ok: bool,
    /// `v >= (M_p / 6) abs_reference - 1e-7`.
    theorem1_ok: bool,
    escalations: usize,
    pass: bool,
}

fn certify_solve(space: &LpSpace, t: &Operator, cfg: &SolverConfig, grid: &[f64]) -> Result<CertifyReport> {
    let mut cfg = cfg.clone();
    let mut escalations = 0;
    loop {
        let r: CertifiedRadii = certified_radii_with_grid(space, t, &cfg, grid)?;
        let v = r.num_radius.value;
        let abs = r.abs_num_radius.value;
        let c = r.certificate;
        let bound_ok = v >= c.best_bound - BOUND_SLACK;
        let theorem1_ok = v >= c.mp / 6.0 * abs - SLACK;
        let pass = bound_ok && theorem1_ok;
        if pass || escalations == ESCALATIONS {
            return Ok(CertifyReport {
                certificate: c,
                v,
                abs_v: abs,
                norm: r.op_norm.value,
                abs_reference: abs,
                bound_ok,
                theorem1_ok,
                escalations,
                pass,
            });
        }
        escalations += 1;
        cfg.restarts *= 2;
    }
}

fn certify_witness(
    space: &LpSpace,
    t: &Operator,
    x: &Vector,
    cfg: &SolverConfig,
    grid: &[f64],
) -> Result<CertifyReport> {
    let c = build_certificate_thm1(space, t, x, grid)?;
    let mut cfg = cfg.clone();
    let mut escalations = 0;
    loop {
        let v = estimate(
            space,
            t,
            Objective::NumRadius,
            &cfg,
            std::slice::from_ref(&c.constructive_point),
        )?;
        let abs = estimate(space, t, Objective::AbsNumRadius, &cfg, &[x.clone(), v.witness.clone()])?;
        let norm = estimate(
            space,
            t,
            Objective::OpNorm,
            &cfg,
            &[v.witness.clone(), abs.witness.clone()],
        )?;
        let reference = 2.0 * c.beta0;
        let bound_ok = v.value >= c.best_bound - BOUND_SLACK;
        let theorem1_ok = v.value >= c.mp / 6.0 * reference - SLACK;
        let pass = bound_ok && theorem1_ok;
        if pass || escalations == ESCALATIONS {
            return Ok(CertifyReport {
                certificate: c.with_abs_radius(abs.value),
                v: v.value,
                abs_v: abs.value,
                norm: norm.value,
                abs_reference: reference,
                bound_ok,
                theorem1_ok,
                escalations,
                pass,
            });
        }
        escalations += 1;
        cfg.restarts *= 2;
    }
}

fn certify_file(
    g: &GlobalArgs,
    spec: &std::path::Path,
    witness: WitnessSource,
    witness_file: Option<&std::path::Path>,
    grid: &GridArgs,
) -> Result<Report> {
    let f = operator_file::load(spec)?;
    if f.operator.field() != Field::Real {
        bail!("certificates are defined for real operators only");
    }
    let cfg = solver(g)?;
    let grid = grid.grid(f.space.p())?;
    let report = match (witness, witness_file) {
        (WitnessSource::Solve, None) => certify_solve(&f.space, &f.operator, &cfg, &grid)?,
        (WitnessSource::File, Some(path)) => {
            let x = operator_file::load_real_vector(path, f.space.m())?;
            let n = lp_space::norm(&f.space, &x)?;
            if (n - 1.0).abs() > 1e-9 {
                bail!("{}: witness must have unit norm, found {n}", path.display());
            }
            certify_witness(&f.space, &f.operator, &x, &cfg, &grid)?
        }
        (WitnessSource::File, None) => bail!("--witness file needs --witness-file PATH"),
        (WitnessSource::Solve, Some(_)) => bail!("--witness-file needs --witness file"),
    };
    let ok = report.pass;
    let text = match g.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report)?,
        Format::Csv => to_csv(
            &["v", "abs_v", "norm", "beta0", "beta", "best_bound", "best_t", "pass"],
            &[{
                let c = &report.certificate;
                let mut row = fmt_row(&[
                    report.v,
                    report.abs_v,
                    report.norm,
                    c.beta0,
                    c.beta,
                    c.best_bound,
                    c.best_t,
                ]);
                row.push(report.pass.to_string());
                row
            }],
        )?,
    };
    Ok(Report::new(text, ok))
}

#[derive(Serialize)]
struct RandomCertifyItem {
    item: usize,
    p: f64,
    m: usize,
    v: f64,
    abs_v: f64,
    best_bound: f64,
    beta0: f64,
    escalations: usize,
    pass: bool,
}

#[derive(Serialize)]
struct RandomCertifyReport {
    seed: u64,
    count: usize,
    passed: usize,
    failures: Vec<usize>,
    items: Vec<RandomCertifyItem>,
}

fn certify_random(g: &GlobalArgs, n: usize, p: Option<f64>, m: Option<usize>, grid: &GridArgs) -> Result<Report> {
    let cfg = solver(g)?;
    if let Some(p) = p {
        LpSpace::uniform(p, 1)?;
    }
    if m == Some(0) {
        bail!("--m must be >= 1");
    }
    use rayon::prelude::*;
    let items = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(g.seed, i as u64);
            let p = p.unwrap_or(CORPUS_EXPONENTS[i % CORPUS_EXPONENTS.len()]);
            let m = m.unwrap_or_else(|| rng.random_range(2..=6));
            let space = random::space(&mut rng, p, m);
            let t = random::operator(&mut rng, m, Field::Real);
            let r = certify_solve(&space, &t, &cfg, &grid.grid(p)?)?;
            Ok(RandomCertifyItem {
                item: i,
                p,
                m,
                v: r.v,
                abs_v: r.abs_v,
                best_bound: r.certificate.best_bound,
                beta0: r.certificate.beta0,
                escalations: r.escalations,
                pass: r.pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let failures: Vec<usize> = items.iter().filter(|i| !i.pass).map(|i| i.item).collect();
    let report = RandomCertifyReport {
        seed: g.seed,
        count: n,
        passed: n - failures.len(),
        failures,
        items,
    };
    let ok = report.failures.is_empty();
    let text = match g.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report)?,
        Format::Csv => to_csv(
            &["item", "p", "m", "v", "abs_v", "best_bound", "pass"],
            &report
                .items
                .iter()
                .map(|i| {
                    let mut row = vec![i.item.to_string(), format_f64(i.p), i.m.to_string()];
                    row.extend(fmt_row(&[i.v, i.abs_v, i.best_bound]));
                    row.push(i.pass.to_string());
                    row
                })
                .collect::<Vec<_>>(),
        )?,
    };
    Ok(Report::new(text, ok))
}

#[derive(Serialize)]
struct ComplexifyReport {
    complexified: Operator,
    norm: f64,
    complex_norm: f64,
    abs_v: f64,
    complex_v: f64,
    chain: ComplexificationReport,
    /// `||T|| <= ||T_C|| + 1e-7`.
    norm_ok: bool,
    /// `2 |v|(T) >= v(T_C) - 1e-7`.
    radius_ok: bool,
    /// `v(T_C) >= ||T_C|| / e - 1e-7`.
    floor_ok: bool,
}

fn complexify_cmd(g: &GlobalArgs, spec: &std::path::Path) -> Result<Report> {
    let f = operator_file::load(spec)?;
    let tc = complexify(&f.operator)?;
    let r = certified_radii_with_grid(&f.space, &f.operator, &solver(g)?, &default_t_grid(f.space.p())?)?;
    let (n, nc) = (r.op_norm.value, r.complex_op_norm.value);
    let (a, vc) = (r.abs_num_radius.value, r.complex_num_radius.value);
    let report = ComplexifyReport {
        complexified: tc,
        norm: n,
        complex_norm: nc,
        abs_v: a,
        complex_v: vc,
        norm_ok: n <= nc + SLACK,
        radius_ok: 2.0 * a >= vc - SLACK,
        floor_ok: vc >= nc / E - SLACK,
        chain: r.chain,
    };
    let ok = report.norm_ok && report.radius_ok && report.floor_ok && report.chain.chain_ok;
    let text = match g.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report)?,
        Format::Csv => to_csv(
            &["norm", "complex_norm", "abs_v", "complex_v", "vertex_max", "chain_ok"],
            &[{
                let mut row = fmt_row(&[n, nc, a, vc, report.chain.vertex_max]);
                row.push(report.chain.chain_ok.to_string());
                row
            }],
        )?,
    };
    Ok(Report::new(text, ok))
}

fn index_config(g: &GlobalArgs, budget: &BudgetArgs, field: Field) -> Result<IndexConfig> {
    let mut solver = solver(g)?;
    if g.restarts.is_none() {
        solver.restarts = IndexConfig::default().solver.restarts;
    }
    Ok(IndexConfig {
        field,
        random: budget.random_candidates,
        skew: budget.skew_candidates,
        descent_top: budget.descent_top,
        descent_steps: budget.descent_steps,
        solver,
        ..IndexConfig::default()
    })
}

fn index(g: &GlobalArgs, args: &IndexArgs) -> Result<Report> {
    let weights = args.weights.clone().unwrap_or_else(|| vec![1.0; args.m]);
    if weights.len() != args.m {
        bail!("--weights: expected {} values, found {}", args.m, weights.len());
    }
    let space = LpSpace::new(args.p, weights)?;
    let est: IndexEstimate = estimate_index(&space, &index_config(g, &args.budget, args.field.into())?)?;
    let text = match g.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&est)?,
        Format::Csv => to_csv(
            &["p", "m", "field", "estimate", "candidates"],
            &[vec![
                format_f64(est.p),
                est.m.to_string(),
                est.field.to_string(),
                format_f64(est.estimate),
                est.candidates.to_string(),
            ]],
        )?,
    };
    Ok(Report::new(text, true))
}

fn sweep_cmd(g: &GlobalArgs, ps: &[f64], ms: &[usize], budget: &BudgetArgs, field: Field) -> Result<Report> {
    if ms.contains(&0) {
        bail!("--m must be >= 1");
    }
    let rows = sweep(ps, ms, &index_config(g, budget, field)?)?;
    let mut notes = Vec::new();
    for r in &rows {
        if field == Field::Real && !r.floor_ok {
            notes.push(format!(
                "p={} m={}: estimate {} below the floor {}",
                r.p, r.m, r.estimate, r.floor
            ));
        }
        if r.monotone_ok == Some(false) {
            notes.push(format!(
                "p={} m={}: estimate {} exceeds the previous dimension's",
                r.p, r.m, r.estimate
            ));
        }
    }
    let text = match g.format.unwrap_or(Format::Csv) {
        Format::Csv => to_csv(
            &["p", "m", "estimate", "mp", "floor"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        format_f64(r.p),
                        r.m.to_string(),
                        format_f64(r.estimate),
                        format_f64(r.mp),
                        format_f64(r.floor),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Json => to_json(&rows)?,
    };
    Ok(Report { text, ok: true, notes })
}
