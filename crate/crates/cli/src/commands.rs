use serde::Serialize;
use serde_json::{json, Value};

use dioph_core::discrepancy::{erdos_turan_bound, paper_h, verify_lemma};
use dioph_core::interval::{HalfOpenInterval, OpenInterval};
use dioph_core::lattice::{
    count_basic, count_basic_oracle, count_perturbed, count_perturbed_oracle, LatticeQuery, QsetSpec,
};
use dioph_core::numeric::{BigReal, ExactScalar, PrecisionPolicy, RealExpr};
use dioph_core::ps::{
    audit_reduction, direct_solutions, make_equation, orient, quotient_set, sample_alphas, PSEquation,
};
use dioph_core::systems::{
    check_hypotheses, solve_system, survey_measure, PerturbationFamily, PsiFamily, SolveOptions, SurveyOptions,
    SystemInstance, TwistFamily,
};
use dioph_core::weyl::{equid_report, sequence_c1, star_discrepancy, vdc_difference, weyl_profile, C1Family, SequenceSample};

use crate::config::{Params, RunConfig};
use crate::CliError;

/// A command's result: the JSON document and its tabular form.
pub struct Report {
    pub result: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

fn to_value<T: Serialize + ?Sized>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn opt_cell<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Midpoint and radius cells of an enclosure.
fn big_cells(x: &BigReal) -> [String; 2] {
    let v = to_value(x);
    [v["value"].to_string(), v["radius"].to_string()]
}

pub fn run(cfg: &RunConfig, policy: &PrecisionPolicy) -> Result<Report, CliError> {
    match cfg.command.as_str() {
        "solve" => solve(cfg, policy),
        "survey" => survey(cfg, policy),
        "hypotheses" => hypotheses(cfg),
        "lattice-count" => lattice_count(cfg, policy),
        "discrepancy" => discrepancy(cfg, policy),
        "weyl" => weyl(cfg, policy),
        "ps-scan" => ps_scan(cfg, policy),
        "ps-quotients" => ps_quotients(cfg, policy),
        "ps-check" => ps_check(cfg, policy),
        other => Err(CliError::Validation(vec![format!("unknown command {other:?}")])),
    }
}

fn instance(p: &mut Params) -> Option<SystemInstance> {
    if let Some(path) = p.raw("instance") {
        if p.raw("psi").is_some() {
            p.errors.push("--instance and --psi are mutually exclusive".into());
            return None;
        }
        return match std::fs::read_to_string(path) {
            Ok(text) => SystemInstance::from_json(&text).map_err(|e| p.errors.push(format!("--instance: {e}"))).ok(),
            Err(e) => {
                p.errors.push(format!("--instance {path}: {e}"));
                None
            }
        };
    }
    let psi: Option<PsiFamily> = p.req("psi");
    let phi: Option<PerturbationFamily> = p.opt("phi");
    let rho: Option<TwistFamily> = p.opt("rho");
    let j: Option<OpenInterval> = p.opt("J");
    let i: Option<HalfOpenInterval> = p.opt("I");
    SystemInstance::new(j?, psi?, phi?, rho?, i?).map_err(|e| p.errors.push(e.to_string())).ok()
}

fn solve(cfg: &RunConfig, policy: &PrecisionPolicy) -> Result<Report, CliError> {
    let mut p = Params::new(&cfg.params);
    let inst = instance(&mut p);
    let theta: Option<ExactScalar> = p.req("theta");
    let n_min: Option<u64> = p.req("n-min");
    let n_max: Option<u64> = p.req("n-max");
    let cap: Option<usize> = p.opt("max-solutions");
    let primes_only = p.flag("primes-only");
    p.finish()?;
    let (inst, theta, n_min, n_max) = (inst.unwrap(), theta.unwrap(), n_min.unwrap(), n_max.unwrap());
    let sols = solve_system(&inst, &theta, n_min, n_max, cap.unwrap_or(usize::MAX), SolveOptions { primes_only }, policy)?;
    let rows = sols
        .iter()
        .map(|s| {
            let [r, rr] = big_cells(&s.residual);
            let [v, vr] = big_cells(&s.psi);
            let [t, tr] = s.twist.as_ref().map(big_cells).unwrap_or_default();
            vec![s.n.to_string(), r, rr, v, vr, t, tr, s.passed.to_string()]
        })
        .collect();
    Ok(Report {
        result: json!({
            "instance": to_value(&inst),
            "theta": theta.to_string(),
            "count": sols.len(),
            "n": sols.iter().map(|s| s.n).collect::<Vec<_>>(),
            "solutions": to_value(&sols),
        }),
        header: vec!["n", "residual", "residual_radius", "psi", "psi_radius", "twist", "twist_radius", "passed"],
        rows,
    })
}

fn survey(cfg: &RunConfig, policy: &PrecisionPolicy) -> Result<Report, CliError> {
    let mut p = Params::new(&cfg.params);
    let inst = instance(&mut p);
    let samples: Option<u64> = p.req("samples");
    let n_max: Option<u64> = p.req("n-max");
    let min_hits: Option<u64> = p.req("min-hits");
    let (stratified, primes_only) = (p.flag("stratified"), p.flag("primes-only"));
    p.finish()?;
    let opts = SurveyOptions {
        samples: samples.unwrap(),
        n_max: n_max.unwrap(),
        min_hits: min_hits.unwrap(),
        seed: cfg.seed,
        stratified,
        primes_only,
    };
    let inst = inst.unwrap();
    let report = survey_measure(&inst, &opts, policy)?;
    let rows = report
        .per_sample
        .iter()
        .map(|s| {
            vec![s.index.to_string(), s.theta.clone(), s.theta_approx.to_string(), opt_cell(s.hits), opt_cell(s.error.clone())]
        })
        .collect();
    Ok(Report {
        result: json!({ "instance": to_value(&inst), "report": to_value(&report) }),
        header: vec!["index", "theta", "theta_approx", "hits", "error"],
        rows,
    })
}

fn hypotheses(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut p = Params::new(&cfg.params);
    let inst = instance(&mut p);
    let n_trunc: Option<u64> = p.req("n-trunc");
    p.finish()?;
    let inst = inst.unwrap();
    let report = check_hypotheses(&inst, n_trunc.unwrap())?;
    let rows = report
        .conditions
        .iter()
        .map(|(name, c)| vec![name.clone(), to_value(&c.verdict).as_str().unwrap_or_default().to_string(), c.note.clone()])
        .collect();
    Ok(Report {
        result: json!({ "instance": to_value(&inst), "report": to_value(&report) }),
        header: vec!["condition", "verdict", "note"],
        rows,
    })
}

fn lattice_count(cfg: &RunConfig, policy: &PrecisionPolicy) -> Result<Report, CliError> {
    let mut p = Params::new(&cfg.params);
    let prime: Option<u64> = p.req("p");
    let big_q: Option<u64> = p.req("Q");
    let l: Option<RealExpr> = p.req("L");
    let j: Option<OpenInterval> = p.req("J");
    let qset: Option<QsetSpec> = p.req("qset");
    let phi: Option<PerturbationFamily> = p.opt("phi");
    let cap: Option<u128> = p.req("work-cap");
    let oracle = p.flag("oracle");
    p.finish()?;
    let (prime, big_q) = (prime.unwrap(), big_q.unwrap());
    let members = qset.unwrap().resolve(prime, big_q);
    let query = LatticeQuery::new(prime, big_q, members, l.unwrap(), j.unwrap(), phi)?;
    let perturbed = query.phi.is_some();
    let report = if perturbed { count_perturbed(&query, policy)? } else { count_basic(&query, policy)? };
    let oracle_count = if !oracle {
        None
    } else if perturbed {
        Some(count_perturbed_oracle(&query, policy, cap.unwrap())?)
    } else {
        Some(count_basic_oracle(&query, policy, cap.unwrap())?)
    };
    let row = vec![
        report.count.to_string(),
        report.bound_basic.to_string(),
        opt_cell(report.omega),
        opt_cell(report.hypothesis_ok),
        opt_cell(report.bound_perturbed),
        opt_cell(report.ratio),
        opt_cell(oracle_count),
    ];
    Ok(Report {
        result: json!({
            "query": to_value(&query),
            "perturbed": perturbed,
            "report": to_value(&report),
            "oracle_count": oracle_count,
            "oracle_agrees": oracle_count.map(|c| c == report.count),
        }),
        header: vec!["count", "bound_basic", "omega", "hypothesis_ok", "bound_perturbed", "ratio", "oracle_count"],
        rows: vec![row],
    })
}

fn discrepancy(cfg: &RunConfig, policy: &PrecisionPolicy) -> Result<Report, CliError> {
    let mut p = Params::new(&cfg.params);
    let alpha: Option<RealExpr> = p.req("alpha");
    let l: Option<u64> = p.req("L");
    let j: Option<OpenInterval> = p.req("J");
    let h: Option<u64> = p.opt("H");
    let h_paper = p.flag("h-paper");
    let verify = p.flag("verify");
    match (h.is_some(), h_paper) {
        (true, true) => p.errors.push("--H and --h-paper are mutually exclusive".into()),
        (false, false) if p.raw("H").is_none() => p.errors.push("one of --H or --h-paper is required".into()),
        _ => {}
    }
    p.finish()?;
    let (alpha, l, j) = (alpha.unwrap(), l.unwrap(), j.unwrap());
    let h = h.unwrap_or_else(|| paper_h(&j));
    let reports = if verify {
        verify_lemma(&alpha, l, &j, h, policy)?
    } else {
        (1..=h).map(|k| erdos_turan_bound(&alpha, l, &j, k, policy)).collect::<Result<Vec<_>, _>>()?
    };
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.h.to_string(),
                r.count.to_string(),
                r.bound.to_string(),
                r.main.to_string(),
                r.middle.to_string(),
                r.tail.to_string(),
                r.violated.to_string(),
            ]
        })
        .collect();
    Ok(Report {
        result: json!({
            "alpha": alpha.to_string(),
            "L": l,
            "J": to_value(&j),
            "H": h,
            "reports": to_value(&reports),
        }),
        header: vec!["H", "count", "bound", "main", "middle", "tail", "violated"],
        rows,
    })
}

fn parse_intervals(raw: &str) -> Result<Vec<HalfOpenInterval>, String> {
    raw.split(';').map(|s| s.trim().parse::<HalfOpenInterval>().map_err(|e| e.to_string())).collect()
}

fn weyl(cfg: &RunConfig, policy: &PrecisionPolicy) -> Result<Report, CliError> {
    let mut p = Params::new(&cfg.params);
    if let Some(f) = p.raw("family").filter(|f| *f != "c1") {
        p.errors.push(format!("--family {f:?}: only c1 is available"));
    }
    let a: Option<ExactScalar> = p.req("a");
    let gamma: Option<ExactScalar> = p.req("gamma");
    let phi: Option<PerturbationFamily> = p.req("phi");
    let n: Option<u64> = p.req("n");
    let j: Option<OpenInterval> = p.req("J");
    let b_max: Option<u64> = p.req("b-range");
    let lag: Option<u64> = p.opt("vdc-lag");
    let intervals = match p.raw("intervals") {
        Some(raw) => parse_intervals(raw).map_err(|e| p.errors.push(format!("--intervals: {e}"))).ok(),
        None => Some(Vec::new()),
    };
    p.finish()?;
    let family = C1Family::new(a.unwrap(), gamma.unwrap(), phi.unwrap(), n.unwrap(), j.unwrap())?;
    let sample: SequenceSample = match lag {
        Some(h) => {
            let count = family.m_range()?.count() as u64;
            vdc_difference(family.generator(policy), count, h)?
        }
        None => sequence_c1(&family, policy)?,
    };
    let dstar = star_discrepancy(&sample)?;
    let sums = weyl_profile(&sample, b_max.unwrap())?;
    let equid = equid_report(&sample, &intervals.unwrap())?;
    let mut rows = vec![{
        let [v, r] = big_cells(&dstar);
        vec!["star_discrepancy".to_string(), String::new(), v, r]
    }];
    for (b, s) in &sums {
        let [v, r] = big_cells(s);
        rows.push(vec!["weyl_sum".into(), b.to_string(), v, r]);
    }
    for row in &equid {
        rows.push(vec![
            "deviation".into(),
            format!("[{},{})", row.interval.lo, row.interval.hi),
            row.deviation.to_string(),
            String::new(),
        ]);
    }
    let mut source = to_value(&sample);
    if let Value::Object(m) = &mut source {
        m.remove("values");
    }
    Ok(Report {
        result: json!({
            "family": to_value(&family),
            "sample": source,
            "star_discrepancy": to_value(&dstar),
            "weyl_sums": sums.iter().map(|(b, s)| json!({ "b": b, "value": to_value(s) })).collect::<Vec<_>>(),
            "equidistribution": to_value(&equid),
        }),
        header: vec!["metric", "parameter", "value", "radius"],
        rows,
    })
}

/// `alpha` or `alpha-range lo,hi,count` (seeded draws).
fn alphas(p: &mut Params, seed: u64) -> Option<Vec<ExactScalar>> {
    match (p.raw("alpha"), p.raw("alpha-range")) {
        (Some(_), Some(_)) => {
            p.errors.push("--alpha and --alpha-range are mutually exclusive".into());
            None
        }
        (None, None) => {
            p.errors.push("one of --alpha or --alpha-range is required".into());
            None
        }
        (Some(_), None) => p.opt("alpha").map(|a| vec![a]),
        (None, Some(raw)) => {
            let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
            let parsed = match parts[..] {
                [lo, hi, count] => match (lo.parse::<ExactScalar>(), hi.parse::<ExactScalar>(), count.parse::<u64>()) {
                    (Ok(lo), Ok(hi), Ok(count)) => sample_alphas(&lo, &hi, count, seed).map_err(|e| e.to_string()),
                    _ => Err("expected lo,hi,count".to_string()),
                },
                _ => Err("expected lo,hi,count".to_string()),
            };
            parsed.map_err(|e| p.errors.push(format!("--alpha-range {raw:?}: {e}"))).ok()
        }
    }
}

fn equation(p: &mut Params) -> Option<PSEquation> {
    let a1: Option<u64> = p.req("a1");
    let a2: Option<u64> = p.req("a2");
    let b2: Option<i64> = p.req("b2");
    make_equation(a1?, a2?, b2?).map_err(|e| p.errors.push(e.to_string())).ok()
}

/// Per-alpha outcome: ambiguity is recorded and the scan continues.
fn per_alpha<T>(
    alphas: &[ExactScalar],
    f: impl Fn(&ExactScalar) -> dioph_core::Result<T>,
) -> Result<Vec<(ExactScalar, Result<T, String>)>, CliError> {
    alphas
        .iter()
        .map(|a| match f(a) {
            Ok(v) => Ok((a.clone(), Ok(v))),
            Err(e) if e.is_ambiguity() => Ok((a.clone(), Err(e.to_string()))),
            Err(e) => Err(e.into()),
        })
        .collect()
}

fn ps_scan(cfg: &RunConfig, policy: &PrecisionPolicy) -> Result<Report, CliError> {
    let mut p = Params::new(&cfg.params);
    let eq = equation(&mut p);
    let alphas = alphas(&mut p, cfg.seed);
    let n_max: Option<u64> = p.req("n-max");
    let cap: Option<usize> = p.req("cap");
    p.finish()?;
    let (eq, n_max, cap) = (eq.unwrap(), n_max.unwrap(), cap.unwrap());
    let runs = per_alpha(&alphas.unwrap(), |a| direct_solutions(&eq, a, n_max, None, policy))?;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for (alpha, run) in &runs {
        match run {
            Ok(pairs) => {
                rows.push(vec![alpha.to_string(), pairs.len().to_string(), String::new()]);
                entries.push(json!({
                    "alpha": alpha.to_string(),
                    "count": pairs.len(),
                    "pairs": to_value(&pairs[..pairs.len().min(cap)]),
                }));
            }
            Err(e) => {
                rows.push(vec![alpha.to_string(), String::new(), e.clone()]);
                entries.push(json!({ "alpha": alpha.to_string(), "count": null, "error": e }));
            }
        }
    }
    Ok(Report {
        result: json!({ "equation": to_value(&eq), "n_max": n_max, "scan": entries }),
        header: vec!["alpha", "count", "error"],
        rows,
    })
}

fn ps_quotients(cfg: &RunConfig, policy: &PrecisionPolicy) -> Result<Report, CliError> {
    let mut p = Params::new(&cfg.params);
    let alphas = alphas(&mut p, cfg.seed);
    let n_floor: Option<u64> = p.req("n-floor");
    let n_max: Option<u64> = p.req("n-max");
    let height: Option<u64> = p.req("height-bound");
    p.finish()?;
    let (n_floor, n_max, height) = (n_floor.unwrap(), n_max.unwrap(), height.unwrap());
    let runs = per_alpha(&alphas.unwrap(), |a| quotient_set(a, n_floor, n_max, height, policy))?;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for (alpha, run) in &runs {
        match run {
            Ok(set) => {
                let items: Vec<String> = set.iter().map(|q| q.to_string()).collect();
                rows.push(vec![alpha.to_string(), items.join(" "), String::new()]);
                entries.push(json!({ "alpha": alpha.to_string(), "quotients": items }));
            }
            Err(e) => {
                rows.push(vec![alpha.to_string(), String::new(), e.clone()]);
                entries.push(json!({ "alpha": alpha.to_string(), "quotients": null, "error": e }));
            }
        }
    }
    Ok(Report {
        result: json!({ "N_floor": n_floor, "n_max": n_max, "height_bound": height, "sets": entries }),
        header: vec!["alpha", "quotients", "error"],
        rows,
    })
}

fn ps_check(cfg: &RunConfig, policy: &PrecisionPolicy) -> Result<Report, CliError> {
    let mut p = Params::new(&cfg.params);
    let eq = equation(&mut p);
    let alphas = alphas(&mut p, cfg.seed);
    let n_max: Option<u64> = p.req("n-max");
    p.finish()?;
    let (eq, n_max) = (eq.unwrap(), n_max.unwrap());
    let (oriented, swapped) = orient(&eq)?;
    let runs = per_alpha(&alphas.unwrap(), |a| audit_reduction(&oriented, a, n_max, policy))?;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for (alpha, run) in &runs {
        match run {
            Ok(r) => {
                rows.push(vec![
                    alpha.to_string(),
                    r.checked.to_string(),
                    r.skipped.to_string(),
                    r.members.to_string(),
                    r.mismatches.len().to_string(),
                    String::new(),
                ]);
                entries.push(to_value(r));
            }
            Err(e) => {
                rows.push(vec![alpha.to_string(), String::new(), String::new(), String::new(), String::new(), e.clone()]);
                entries.push(json!({ "alpha": alpha.to_string(), "error": e }));
            }
        }
    }
    Ok(Report {
        result: json!({
            "equation": to_value(&eq),
            "oriented": to_value(&oriented),
            "swapped": swapped,
            "audits": entries,
        }),
        header: vec!["alpha", "checked", "skipped", "members", "mismatches", "error"],
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_lists() {
        assert_eq!(parse_intervals("0,0.5; 0.2,0.3").unwrap().len(), 2);
        assert!(parse_intervals("0,0.5;oops").is_err());
    }
}
