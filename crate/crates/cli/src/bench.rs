//! Synthetic benchmark tables: every roster entry is trained on a fresh draw
//! of the training data for each seed and scored on an independent test draw.

use std::fmt::Write as _;
use std::path::Path;

use rai_forge::data::{generate, SyntheticKind, SyntheticSpec};
use rai_forge::ensemble::MetricsReport;
use rai_forge::learners::{LearnerKind, TrainBudget};
use rai_forge::solvers::{solve, Algorithm, LineSearch, SolverConfig};
use rai_forge::{Dataset64, UncertaintySet, UncertaintySetSpec};
use rayon::prelude::*;

use crate::Failure;

const TRAIN_SIZE: usize = 1000;
const TEST_SIZE: usize = 1000;
const ROUNDS: usize = 30;
const CVAR_ALPHA: f64 = 0.7;
const CHI2_RHO: f64 = 0.5;
const GROUPS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Experiment {
    /// Dataset-I, no group information at training time.
    Dataset1Do,
    /// Dataset-II, group ids available.
    Dataset2Da,
    /// Dataset-II, adding χ² ∩ group runs.
    Dataset2Pda,
}

impl Experiment {
    fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "dataset1_do" | "do" => Some(Experiment::Dataset1Do),
            "dataset2_da" | "da" => Some(Experiment::Dataset2Da),
            "dataset2_pda" | "pda" => Some(Experiment::Dataset2Pda),
            _ => None,
        }
    }

    fn kind(self) -> SyntheticKind {
        match self {
            Experiment::Dataset1Do => SyntheticKind::DatasetI,
            _ => SyntheticKind::DatasetII,
        }
    }
}

struct Entry {
    label: &'static str,
    config: SolverConfig,
}

fn budget() -> TrainBudget {
    TrainBudget { iterations: 1000, batch_size: 32, learning_rate: 0.1, seed: 0 }
}

fn config(algorithm: Algorithm, set: UncertaintySetSpec, learner: &LearnerKind) -> SolverConfig {
    let mut c = SolverConfig::new(algorithm, set, ROUNDS, learner.clone());
    c.budget = budget();
    c.line_search = match algorithm {
        Algorithm::FrankWolfe => LineSearch::BallAroundInverseT { radius_fraction: 0.5 },
        Algorithm::GenAdaBoost => LineSearch::UnitInterval,
        _ => LineSearch::None,
    };
    c
}

fn roster(exp: Experiment) -> Vec<Entry> {
    use Algorithm::*;
    let e = |label, algorithm, set, learner: &LearnerKind| Entry { label, config: config(algorithm, set, learner) };
    match exp {
        Experiment::Dataset1Do => {
            let lin = LearnerKind::Linear;
            let cvar = UncertaintySetSpec::Cvar { alpha: CVAR_ALPHA };
            vec![
                e("ERM", Erm, UncertaintySetSpec::Erm, &lin),
                e("AdaBoost", AdaBoost, UncertaintySetSpec::Erm, &lin),
                e("RAI-GA (CVaR)", GenAdaBoost, cvar.clone(), &lin),
                e("RAI-FW (CVaR)", FrankWolfe, cvar, &lin),
            ]
        }
        Experiment::Dataset2Da | Experiment::Dataset2Pda => {
            let mlp = LearnerKind::Mlp { hidden: 4 };
            let chi2 = UncertaintySetSpec::Chi2 { rho: CHI2_RHO };
            let both = UncertaintySetSpec::Intersection { members: vec![chi2.clone(), UncertaintySetSpec::Group] };
            let mut rows = vec![
                e("ERM", Erm, UncertaintySetSpec::Erm, &mlp),
                e("RAI-GA (Chi2)", GenAdaBoost, chi2.clone(), &mlp),
                e("RAI-FW (Chi2)", FrankWolfe, chi2, &mlp),
                e("Online GDRO", OnlineGdro, UncertaintySetSpec::Group, &mlp),
                e("RAI-GA (Group)", GenAdaBoost, UncertaintySetSpec::Group, &mlp),
                e("RAI-FW (Group)", FrankWolfe, UncertaintySetSpec::Group, &mlp),
            ];
            if exp == Experiment::Dataset2Pda {
                rows.push(e("RAI-GA (Chi2 & Group)", GenAdaBoost, both.clone(), &mlp));
                rows.push(e("RAI-FW (Chi2 & Group)", FrankWolfe, both, &mlp));
            }
            rows
        }
    }
}

fn data(exp: Experiment, seed: usize) -> Result<(Dataset64, Dataset64), Failure> {
    let which = exp.kind();
    let train = generate(&SyntheticSpec { which, n: TRAIN_SIZE, seed: 1000 + seed as u64 })?;
    let test = generate(&SyntheticSpec { which, n: TEST_SIZE, seed: 2000 + seed as u64 })?;
    // Domain-oblivious runs never see group ids.
    let train = if exp == Experiment::Dataset1Do { train.without_groups() } else { train };
    Ok((train, test))
}

fn run_one(exp: Experiment, entry: &Entry, seed: usize) -> Result<MetricsReport, Failure> {
    let (train, test) = data(exp, seed)?;
    let mut cfg = entry.config.clone();
    cfg.seed = seed as u64;
    let (ensemble, _) = solve(&train, &cfg)?;
    let set = UncertaintySet::for_dataset(UncertaintySetSpec::Erm, &test)?;
    Ok(ensemble.metrics(&test, &set)?)
}

fn columns(exp: Experiment) -> Vec<String> {
    match exp {
        Experiment::Dataset1Do => vec!["average".into(), "worst_class".into()],
        _ => {
            let mut c: Vec<String> = (0..GROUPS).map(|g| format!("group{g}")).collect();
            c.extend(["worst_group".into(), "average".into(), "worst_class".into()]);
            c
        }
    }
}

fn cells(exp: Experiment, m: &MetricsReport) -> Vec<f64> {
    match exp {
        Experiment::Dataset1Do => vec![m.average, m.worst_class],
        _ => {
            let mut c = vec![f64::NAN; GROUPS];
            for g in m.per_group.iter().flatten() {
                c[g.id] = g.loss;
            }
            c.extend([m.worst_group.unwrap_or(f64::NAN), m.average, m.worst_class]);
            c
        }
    }
}

/// Mean and population standard deviation.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn table(exp: Experiment, rows: &[(&str, Vec<MetricsReport>)]) -> String {
    let mut out = String::from("algorithm");
    for c in columns(exp) {
        let _ = write!(out, ",{c},{c}_std");
    }
    out.push('\n');
    for (label, reports) in rows {
        out.push_str(label);
        let per_seed: Vec<Vec<f64>> = reports.iter().map(|m| cells(exp, m)).collect();
        for k in 0..columns(exp).len() {
            let xs: Vec<f64> = per_seed.iter().map(|c| c[k]).collect();
            let (m, s) = mean_std(&xs);
            let _ = write!(out, ",{m:.2},{s:.2}");
        }
        out.push('\n');
    }
    out
}

fn threads() -> Result<usize, Failure> {
    match std::env::var("RAI_FORGE_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| Failure::new("invalid-args", format!("RAI_FORGE_THREADS must be a positive integer, got {v:?}"), 2)),
    }
}

pub(crate) fn run(name: &str, seeds: usize, out: &Path) -> Result<(), Failure> {
    let exp = Experiment::parse(name).ok_or_else(|| {
        Failure::new(
            "invalid-args",
            format!("unknown experiment {name:?}; expected Dataset1_DO, Dataset2_DA or Dataset2_PDA"),
            2,
        )
    })?;
    if seeds == 0 {
        return Err(Failure::new("invalid-args", "--seeds must be >= 1", 2));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads()?)
        .build()
        .map_err(|e| Failure::new("io", e.to_string(), 2))?;
    let entries = roster(exp);
    let jobs: Vec<(usize, usize)> = (0..entries.len()).flat_map(|r| (0..seeds).map(move |s| (r, s))).collect();
    let results: Vec<Result<MetricsReport, Failure>> =
        pool.install(|| jobs.par_iter().map(|&(r, s)| run_one(exp, &entries[r], s)).collect());

    let mut rows: Vec<(&str, Vec<MetricsReport>)> = Vec::new();
    let mut first_error: Option<(String, Failure)> = None;
    let mut it = results.into_iter();
    for entry in &entries {
        let mut reports = Vec::with_capacity(seeds);
        for _ in 0..seeds {
            match it.next().expect("one result per job") {
                Ok(m) => reports.push(m),
                Err(f) => {
                    if first_error.is_none() {
                        first_error = Some((entry.label.to_string(), f));
                    }
                }
            }
        }
        if reports.len() == seeds {
            rows.push((entry.label, reports));
        }
    }
    std::fs::write(out, table(exp, &rows)).map_err(|e| Failure::from(rai_forge::RaiError::from(e)))?;
    if let Some((label, f)) = first_error {
        return Err(Failure::new(
            &f.kind,
            format!(
                "run {label:?} failed: {}; partial results ({} of {} rows) written to {}",
                f.message,
                rows.len(),
                entries.len(),
                out.display()
            ),
            f.code,
        ));
    }
    Ok(())
}
