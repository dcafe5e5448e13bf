use hv_core::belief::InformationStructure;
use hv_core::corpus::{generate, verify_all, CorpusEntry, CorpusSpec};
use hv_core::design::{
    check_equivalence, max_social_value, optimal_eps_agent, optimal_eps_social, split_kernels,
    split_to_ternary, verify_dominance, AgentOptimum, Equivalence, SplitKernel, TernaryStructure,
};
use hv_core::engine::{best_equilibrium_payoffs, social_value, PayoffProfile};
use hv_core::market::{
    sticky_surpluses, surpluses, ternary_sticky_buyer, ternary_sticky_seller, MarketParams, Regime,
};
use hv_core::optimize::Estimate;
use hv_core::report::{
    dominance_csv, payoff_profile_csv, price_schedule_csv, sweep_csv, Bounded, Exact,
};
use hv_core::sweep::{run_sweep, summarize, SweepGrid, SweepSummary};
use hv_core::Rat;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

const DEFAULT_HORIZON: usize = 4;
const DEFAULT_VERIFY_HORIZON: usize = 5;

fn default_tol() -> Rat {
    Rat::new(1, 1_000_000_000)
}

/// What a command produced: a JSON document and, where one exists, a CSV
/// rendering.
pub struct Output {
    pub json: String,
    pub csv: Option<String>,
    /// Set when the run completed but a checked property failed.
    pub failure: Option<String>,
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Internal(e.to_string()))
}

#[derive(Serialize)]
struct AgentRow {
    i: usize,
    v_i: Exact,
    vbar_i: Exact,
    hist_value_i: Exact,
}

fn agent_rows(p: &PayoffProfile) -> Vec<AgentRow> {
    p.v_i
        .iter()
        .zip(&p.vbar_i)
        .zip(&p.hist_value_i)
        .enumerate()
        .map(|(k, ((v, vb), h))| AgentRow {
            i: k + 1,
            v_i: v.into(),
            vbar_i: vb.into(),
            hist_value_i: h.into(),
        })
        .collect()
}

#[derive(Serialize)]
struct ValueReport<'a> {
    command: &'static str,
    config: &'a RunConfig,
    v: Exact,
    agents: Vec<AgentRow>,
    sandwich_holds: bool,
    values_nonnegative: bool,
    tie_points: usize,
    profiles_examined: usize,
    social_value: Option<Bounded>,
}

pub fn run_value(config: &RunConfig) -> Result<Output, CliError> {
    let pi = config.require_structure()?;
    let horizon = config.horizon.unwrap_or(DEFAULT_HORIZON);
    let sel = best_equilibrium_payoffs(pi, horizon, &config.limits)?;
    let social = match &config.delta {
        Some(d) => {
            let tol = config.tol.clone().unwrap_or_else(default_tol);
            Some(Bounded::from(&social_value(pi, d, &tol, &config.limits)?))
        }
        None => None,
    };
    let p = &sel.profile;
    let report = ValueReport {
        command: "value",
        config,
        v: (&p.v).into(),
        agents: agent_rows(p),
        sandwich_holds: p.sandwich_holds(),
        values_nonnegative: p.hist_value_i.iter().all(|x| !x.is_negative()),
        tie_points: sel.tie_table.len(),
        profiles_examined: sel.profiles_examined,
        social_value: social,
    };
    let failure = (!report.sandwich_holds || !report.values_nonnegative)
        .then(|| "payoff profile violates V <= V_i <= Vbar_i or has a negative value".to_string());
    Ok(Output {
        json: to_json(&report)?,
        csv: Some(payoff_profile_csv(p)),
        failure,
    })
}

#[derive(Serialize)]
struct Comparison {
    i: usize,
    original: Exact,
    split: Exact,
}

#[derive(Serialize)]
struct SocialOptimum {
    eps: Estimate,
    value: Estimate,
    value_at_split: Exact,
}

#[derive(Serialize)]
struct DesignReport<'a> {
    command: &'static str,
    config: &'a RunConfig,
    split_eps: Exact,
    split: InformationStructure,
    kernels: Vec<SplitKernel>,
    v_original: Exact,
    v_split: Exact,
    agents: Vec<Comparison>,
    weakly_dominates: bool,
    two_sided: bool,
    strict: Option<bool>,
    equivalence: Equivalence,
    agent_optima: Vec<AgentOptimum>,
    social_optimum: Option<SocialOptimum>,
}

pub fn run_design(config: &RunConfig) -> Result<Output, CliError> {
    let pi = config.require_structure()?;
    let horizon = config.horizon.unwrap_or(DEFAULT_HORIZON);
    let dom = verify_dominance(pi, horizon, &config.limits)?;
    let equivalence = check_equivalence(pi, &dom.split, horizon, &config.limits)?;
    let social_optimum = match &config.delta {
        Some(d) => Some(SocialOptimum {
            eps: optimal_eps_social(d)?,
            value: max_social_value(d)?,
            value_at_split: hv_core::design::ternary_social_value(&dom.split_eps, d)?.into(),
        }),
        None => None,
    };
    let report = DesignReport {
        command: "design",
        config,
        split_eps: (&dom.split_eps).into(),
        split: split_to_ternary(pi),
        kernels: split_kernels(pi),
        v_original: (&dom.original_profile.v).into(),
        v_split: (&dom.split_profile.v).into(),
        agents: dom
            .agents
            .iter()
            .map(|a| Comparison {
                i: a.agent,
                original: (&a.original).into(),
                split: (&a.split).into(),
            })
            .collect(),
        weakly_dominates: dom.weakly_dominates,
        two_sided: dom.two_sided,
        strict: dom.strict,
        equivalence,
        agent_optima: (1..=horizon as u32).map(optimal_eps_agent).collect(),
        social_optimum,
    };
    let failure = (!dom.passes()).then(|| "split does not dominate the original".to_string());
    let entry = CorpusEntry {
        index: 0,
        structure: pi.clone(),
        outcome: Ok(dom),
    };
    Ok(Output {
        json: to_json(&report)?,
        csv: Some(dominance_csv(None, &[entry])),
        failure,
    })
}

#[derive(Serialize)]
struct ClosedForm {
    eps: Exact,
    seller: Exact,
    buyer: Exact,
}

#[derive(Serialize)]
struct MarketReport<'a> {
    command: &'static str,
    config: &'a RunConfig,
    regime: Regime,
    prices: Vec<Exact>,
    participation_holds: bool,
    prices_nondecreasing: bool,
    seller: Bounded,
    buyer: Bounded,
    social: Bounded,
    ternary_closed_form: Option<ClosedForm>,
}

pub fn run_market(config: &RunConfig) -> Result<Output, CliError> {
    let pi = config.require_structure()?;
    let delta = config.require_delta()?;
    let alpha = config
        .alpha
        .clone()
        .ok_or_else(|| CliError::Validation("alpha is required".into()))?;
    let t = config.t.unwrap_or(1);
    let params = MarketParams::new(delta.clone(), alpha, t)?;
    let tol = config.tol.clone().unwrap_or_else(default_tol);
    let rep = if t == 1 {
        surpluses(pi, &params, &tol, &config.limits)?
    } else {
        sticky_surpluses(pi, &params, &tol, &config.limits)?
    };
    let ternary_closed_form = TernaryStructure::from_structure(pi).map(|ts| {
        let e = ts.eps();
        ClosedForm {
            eps: e.into(),
            seller: ternary_sticky_seller(e, delta, t as u32).into(),
            buyer: ternary_sticky_buyer(e, delta, t as u32).into(),
        }
    });
    let report = MarketReport {
        command: "market",
        config,
        regime: rep.regime,
        prices: rep.schedule.prices.iter().map(Exact::from).collect(),
        participation_holds: rep.schedule.participation_holds(),
        prices_nondecreasing: rep.schedule.is_nondecreasing(),
        seller: (&rep.seller).into(),
        buyer: (&rep.buyer).into(),
        social: (&rep.social).into(),
        ternary_closed_form,
    };
    let failure = (!report.participation_holds)
        .then(|| "some buyer is priced above their value of history".to_string());
    Ok(Output {
        json: to_json(&report)?,
        csv: Some(price_schedule_csv(&rep.schedule)),
        failure,
    })
}

#[derive(Serialize)]
struct VerifyEntry<'a> {
    index: usize,
    passed: bool,
    two_sided: Option<bool>,
    strict: Option<bool>,
    equivalent: Option<bool>,
    split_eps: Option<Rat>,
    hist_values_monotone: Option<bool>,
    agents: Vec<Comparison>,
    error: Option<&'a str>,
    /// Present only for failures.
    structure: Option<&'a InformationStructure>,
}

#[derive(Serialize)]
struct VerifySummary {
    total: usize,
    passed: usize,
    failed: usize,
    two_sided: usize,
    strict: usize,
    equivalent: usize,
    nonmonotone: usize,
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    command: &'static str,
    config: &'a RunConfig,
    seed: Option<u64>,
    horizon: usize,
    verdict: bool,
    summary: VerifySummary,
    entries: Vec<VerifyEntry<'a>>,
}

fn verify_entry(e: &CorpusEntry) -> VerifyEntry<'_> {
    let passed = e.passed();
    let structure = (!passed).then_some(&e.structure);
    match &e.outcome {
        Ok(r) => VerifyEntry {
            index: e.index,
            passed,
            two_sided: Some(r.two_sided),
            strict: r.strict,
            equivalent: Some(r.equivalent),
            split_eps: Some(r.split_eps.clone()),
            hist_values_monotone: Some(
                r.original_profile
                    .hist_value_i
                    .windows(2)
                    .all(|w| w[0] <= w[1]),
            ),
            agents: r
                .agents
                .iter()
                .map(|a| Comparison {
                    i: a.agent,
                    original: (&a.original).into(),
                    split: (&a.split).into(),
                })
                .collect(),
            error: None,
            structure,
        },
        Err(msg) => VerifyEntry {
            index: e.index,
            passed,
            two_sided: None,
            strict: None,
            equivalent: None,
            split_eps: None,
            hist_values_monotone: None,
            agents: Vec::new(),
            error: Some(msg),
            structure,
        },
    }
}

pub fn run_verify(config: &RunConfig) -> Result<Output, CliError> {
    let horizon = config.horizon.unwrap_or(DEFAULT_VERIFY_HORIZON);
    if horizon > config.limits.lexicographic_cap {
        return Err(CliError::Cap(format!(
            "horizon {horizon} exceeds cap {}",
            config.limits.lexicographic_cap
        )));
    }
    let (seed, structures) = match &config.structure {
        Some(s) => (None, vec![s.clone()]),
        None => {
            let spec = config.corpus.clone().unwrap_or_else(|| CorpusSpec {
                seed: config.seed.unwrap_or(CorpusSpec::default().seed),
                ..CorpusSpec::default()
            });
            if spec.max_signals < 2 || spec.max_denominator < 1 {
                return Err(CliError::Validation(
                    "corpus needs max_signals >= 2 and max_denominator >= 1".into(),
                ));
            }
            (Some(spec.seed), generate(&spec))
        }
    };
    let entries = verify_all(&structures, horizon, &config.limits);
    let views: Vec<VerifyEntry> = entries.iter().map(verify_entry).collect();
    let passed = views.iter().filter(|v| v.passed).count();
    let summary = VerifySummary {
        total: views.len(),
        passed,
        failed: views.len() - passed,
        two_sided: views.iter().filter(|v| v.two_sided == Some(true)).count(),
        strict: views.iter().filter(|v| v.strict == Some(true)).count(),
        equivalent: views.iter().filter(|v| v.equivalent == Some(true)).count(),
        nonmonotone: views
            .iter()
            .filter(|v| v.hist_values_monotone == Some(false))
            .count(),
    };
    let failure = (summary.failed > 0)
        .then(|| format!("{} of {} structures failed", summary.failed, summary.total));
    let report = VerifyReport {
        command: "verify",
        config,
        seed,
        horizon,
        verdict: summary.failed == 0,
        summary,
        entries: views,
    };
    Ok(Output {
        json: to_json(&report)?,
        csv: Some(dominance_csv(seed, &entries)),
        failure,
    })
}

#[derive(Serialize)]
struct SweepReport<'a> {
    command: &'static str,
    grid: &'a SweepGrid,
    tol: f64,
    points: usize,
    summary: SweepSummary,
}

pub fn run_sweep_command(config: &RunConfig) -> Result<Output, CliError> {
    let grid = config
        .grid
        .as_ref()
        .ok_or_else(|| CliError::Validation("sweep needs a grid".into()))?;
    let tol = config.tol.as_ref().map(Rat::to_f64).unwrap_or(1e-10);
    let rows = run_sweep(grid, tol)?;
    let summary = summarize(&rows, tol);
    let report = SweepReport {
        command: "sweep",
        grid,
        tol,
        points: rows.len(),
        summary,
    };
    Ok(Output {
        json: to_json(&report)?,
        csv: Some(sweep_csv(&rows)),
        failure: None,
    })
}
