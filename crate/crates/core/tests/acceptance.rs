//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria 1-3 reproduce the synthetic benchmark tables and are reported
//! only; the remaining criteria are exact or near-exact properties and make
//! the run fail when violated.

use std::process::ExitCode;
use std::thread;

use rai_forge::data::{generate, Dataset, Sample, SyntheticKind, SyntheticSpec};
use rai_forge::ensemble::{Ensemble, MetricsReport};
use rai_forge::learners::{best_response, loss_row, Hypothesis, LearnerKind, TrainBudget};
use rai_forge::rng::SplitMix64;
use rai_forge::solvers::{solve, solve_matrix_game, Algorithm, EtaSchedule, LineSearch, SolverConfig};
use rai_forge::uncertainty::cvar_capped_projection;
use rai_forge::{RegularizerSpec, UncertaintySet, UncertaintySetSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

// ---------------------------------------------------------------- benchmarks

const SEEDS: u64 = 3;

fn bench_config(algorithm: Algorithm, set: UncertaintySetSpec, learner: LearnerKind) -> SolverConfig {
    let mut c = SolverConfig::new(algorithm, set, 30, learner);
    c.budget = TrainBudget { iterations: 1000, batch_size: 32, learning_rate: 0.1, seed: 0 };
    c.line_search = match algorithm {
        Algorithm::FrankWolfe => LineSearch::BallAroundInverseT { radius_fraction: 0.5 },
        Algorithm::GenAdaBoost => LineSearch::UnitInterval,
        _ => LineSearch::None,
    };
    c
}

/// Mean metrics over the seeds: (average, worst_class, worst_group).
#[derive(Debug, Clone, Copy)]
struct Row {
    average: f64,
    worst_class: f64,
    worst_group: f64,
}

fn run_roster(which: SyntheticKind, roster: &[(&'static str, SolverConfig)]) -> Vec<(&'static str, Row)> {
    let reports: Vec<Vec<MetricsReport>> = thread::scope(|s| {
        let handles: Vec<_> = roster
            .iter()
            .map(|(_, cfg)| {
                (0..SEEDS)
                    .map(|seed| {
                        let cfg = cfg.clone();
                        s.spawn(move || {
                            let train: Dataset<f64> =
                                generate(&SyntheticSpec { which, n: 1000, seed: 1000 + seed }).unwrap();
                            let test: Dataset<f64> =
                                generate(&SyntheticSpec { which, n: 1000, seed: 2000 + seed }).unwrap();
                            let train = if which == SyntheticKind::DatasetI { train.without_groups() } else { train };
                            let mut cfg = cfg;
                            cfg.seed = seed;
                            let (q, _) = solve(&train, &cfg).unwrap();
                            let set = UncertaintySet::for_dataset(UncertaintySetSpec::Erm, &test).unwrap();
                            q.metrics(&test, &set).unwrap()
                        })
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        handles
            .into_iter()
            .map(|hs| hs.into_iter().map(|h| h.join().unwrap()).collect())
            .collect()
    });
    roster
        .iter()
        .zip(reports)
        .map(|((label, _), rs)| {
            let mean = |f: &dyn Fn(&MetricsReport) -> f64| rs.iter().map(f).sum::<f64>() / rs.len() as f64;
            let row = Row {
                average: mean(&|m| m.average),
                worst_class: mean(&|m| m.worst_class),
                worst_group: mean(&|m| m.worst_group.unwrap_or(f64::NAN)),
            };
            (*label, row)
        })
        .collect()
}

fn find(rows: &[(&str, Row)], label: &str) -> Row {
    rows.iter().find(|(l, _)| *l == label).expect("roster label").1
}

fn criterion_1() -> Outcome {
    let cvar = UncertaintySetSpec::Cvar { alpha: 0.7 };
    let lin = LearnerKind::Linear;
    let rows = run_roster(
        SyntheticKind::DatasetI,
        &[
            ("ERM", bench_config(Algorithm::Erm, UncertaintySetSpec::Erm, lin.clone())),
            ("AdaBoost", bench_config(Algorithm::AdaBoost, UncertaintySetSpec::Erm, lin.clone())),
            ("RAI-GA", bench_config(Algorithm::GenAdaBoost, cvar.clone(), lin.clone())),
            ("RAI-FW", bench_config(Algorithm::FrankWolfe, cvar, lin)),
        ],
    );
    let (erm, ada, ga, fw) = (find(&rows, "ERM"), find(&rows, "AdaBoost"), find(&rows, "RAI-GA"), find(&rows, "RAI-FW"));
    let rai_ok = |r: Row| (20.0..=30.0).contains(&r.worst_class) && (r.worst_class - r.average).abs() <= 4.0;
    let checks = [
        ("erm_wc>=60", erm.worst_class >= 60.0),
        ("ga_wc_in[20,30]&gap<=4", rai_ok(ga)),
        ("fw_wc_in[20,30]&gap<=4", rai_ok(fw)),
        ("ada_wc_in[24,32]", (24.0..=32.0).contains(&ada.worst_class)),
        ("fw<ada<erm", fw.worst_class < ada.worst_class && ada.worst_class < erm.worst_class),
    ];
    let table: Vec<String> =
        rows.iter().map(|(l, r)| format!("{l} {:.1}/{:.1}", r.average, r.worst_class)).collect();
    summarize(&checks, &table)
}

fn summarize(checks: &[(&str, bool)], table: &[String]) -> Outcome {
    let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    let mut detail = table.join("; ");
    if !failed.is_empty() {
        detail.push_str(&format!(" | failed: {}", failed.join(", ")));
    }
    outcome(failed.is_empty(), detail)
}

fn dataset2_roster(with_intersection: bool) -> Vec<(&'static str, SolverConfig)> {
    let mlp = LearnerKind::Mlp { hidden: 4 };
    let chi2 = UncertaintySetSpec::Chi2 { rho: 0.5 };
    let both = UncertaintySetSpec::Intersection { members: vec![chi2.clone(), UncertaintySetSpec::Group] };
    let mut r = vec![
        ("ERM", bench_config(Algorithm::Erm, UncertaintySetSpec::Erm, mlp.clone())),
        ("GA-chi2", bench_config(Algorithm::GenAdaBoost, chi2.clone(), mlp.clone())),
        ("FW-chi2", bench_config(Algorithm::FrankWolfe, chi2, mlp.clone())),
        ("GA-group", bench_config(Algorithm::GenAdaBoost, UncertaintySetSpec::Group, mlp.clone())),
        ("FW-group", bench_config(Algorithm::FrankWolfe, UncertaintySetSpec::Group, mlp.clone())),
    ];
    if with_intersection {
        r.push(("GA-both", bench_config(Algorithm::GenAdaBoost, both.clone(), mlp.clone())));
        r.push(("FW-both", bench_config(Algorithm::FrankWolfe, both, mlp)));
    }
    r
}

fn dataset2_table(rows: &[(&str, Row)]) -> Vec<String> {
    rows.iter()
        .map(|(l, r)| format!("{l} wg {:.1} avg {:.1} wc {:.1}", r.worst_group, r.average, r.worst_class))
        .collect()
}

fn criterion_2(rows: &[(&str, Row)]) -> Outcome {
    let wg = |l| find(rows, l).worst_group;
    let near = |v: f64, target: f64| (v - target).abs() <= 4.0;
    let checks = [
        ("erm_wg>=18", wg("ERM") >= 18.0),
        ("group_wg<=13", wg("GA-group") <= 13.0 && wg("FW-group") <= 13.0),
        ("chi2_wg<=16", wg("GA-chi2") <= 16.0 && wg("FW-chi2") <= 16.0),
        ("erm_within4(22.9)", near(wg("ERM"), 22.9)),
        ("ga_group_within4(10.3)", near(wg("GA-group"), 10.3)),
        ("fw_group_within4(10.0)", near(wg("FW-group"), 10.0)),
        ("ga_chi2_within4(13.3)", near(wg("GA-chi2"), 13.3)),
        ("fw_chi2_within4(13.4)", near(wg("FW-chi2"), 13.4)),
    ];
    summarize(&checks, &dataset2_table(rows))
}

fn criterion_3(rows: &[(&str, Row)]) -> Outcome {
    let check = |both, group, chi2| {
        let (b, g, c): (Row, Row, Row) = (find(rows, both), find(rows, group), find(rows, chi2));
        (b.worst_group <= 13.0 && b.worst_class <= 8.0, b.worst_class < g.worst_class || b.worst_group < c.worst_group)
    };
    let (ga_bounds, ga_beats) = check("GA-both", "GA-group", "GA-chi2");
    let (fw_bounds, fw_beats) = check("FW-both", "FW-group", "FW-chi2");
    let named = [("ga_bounds", ga_bounds), ("ga_beats", ga_beats), ("fw_bounds", fw_bounds), ("fw_beats", fw_beats)];
    summarize(&named, &dataset2_table(rows))
}

// ------------------------------------------------------------ exact oracles

/// Enumerates every capped set `C`: `w_i = v` on `C`, `c·s_i` elsewhere.
fn kkt_projection(scores: &[f64], cap: f64) -> Option<Vec<f64>> {
    let n = scores.len();
    for mask in 0u32..(1 << n) {
        let capped = |i: usize| mask & (1 << i) != 0;
        let k = mask.count_ones() as f64;
        let rest: f64 = (0..n).filter(|&i| !capped(i)).map(|i| scores[i]).sum();
        let left = 1.0 - k * cap;
        if left < -1e-12 {
            continue;
        }
        if rest == 0.0 {
            if left.abs() <= 1e-12 {
                return Some(vec![cap; n]);
            }
            continue;
        }
        let c = left / rest;
        let ok = (0..n).all(|i| if capped(i) { c * scores[i] >= cap - 1e-12 } else { c * scores[i] <= cap + 1e-12 });
        if ok {
            return Some((0..n).map(|i| if capped(i) { cap } else { c * scores[i] }).collect());
        }
    }
    None
}

fn criterion_4() -> Outcome {
    let mut rng = SplitMix64::new(4);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = 1 + rng.below(6);
        let scores: Vec<f64> = (0..n).map(|_| (rng.uniform() * 8.0 - 4.0).exp()).collect();
        let cap = 1.0 / n as f64 * (1.0 + rng.uniform() * 2.0 * n as f64);
        let cap = if rng.below(10) == 0 { 1.0 / n as f64 } else { cap };
        let Some(oracle) = kkt_projection(&scores, cap) else {
            return outcome(false, format!("oracle found no KKT point for {scores:?}, cap {cap}"));
        };
        let got = cvar_capped_projection(&scores, cap).unwrap();
        for (a, b) in got.as_slice().iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
    }
    outcome(worst <= 1e-9, format!("max coordinate error {worst:.2e} over 1000 inputs"))
}

/// Visits every point of `{x ∈ Δ_d : x = k/steps}` whose coordinates lie in
/// `[lo_j, hi_j]` (grid units).
fn simplex_grid(d: usize, steps: usize, lo: &[usize], hi: &[usize], visit: &mut impl FnMut(&[f64])) {
    fn rec(
        j: usize,
        left: usize,
        d: usize,
        steps: usize,
        lo: &[usize],
        hi: &[usize],
        cur: &mut Vec<f64>,
        visit: &mut impl FnMut(&[f64]),
    ) {
        if j == d - 1 {
            if left >= lo[j] && left <= hi[j] {
                cur.push(left as f64 / steps as f64);
                visit(cur);
                cur.pop();
            }
            return;
        }
        for k in lo[j]..=hi[j].min(left) {
            cur.push(k as f64 / steps as f64);
            rec(j + 1, left - k, d, steps, lo, hi, cur, visit);
            cur.pop();
        }
    }
    let mut cur = Vec::with_capacity(d);
    rec(0, steps, d, steps, lo, hi, &mut cur, visit);
}

fn entropy(w: &[f64]) -> f64 {
    -w.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

fn kl(w: &[f64]) -> f64 {
    let n = w.len() as f64;
    w.iter().filter(|&&x| x > 0.0).map(|&x| x * (n * x).ln()).sum()
}

fn chi2(w: &[f64]) -> f64 {
    let n = w.len() as f64;
    w.iter().map(|&x| 0.5 * (n * x - 1.0).powi(2)).sum::<f64>() / n
}

/// Independent membership test; `slack` absorbs solver tolerances.
fn member(spec: &UncertaintySetSpec, w: &[f64], groups: &[usize], slack: f64) -> bool {
    let n = w.len() as f64;
    match spec {
        UncertaintySetSpec::Erm => w.iter().all(|&x| (x - 1.0 / n).abs() <= slack),
        UncertaintySetSpec::Simplex => true,
        UncertaintySetSpec::Kl { rho } => kl(w) <= rho + slack,
        UncertaintySetSpec::Chi2 { rho } => chi2(w) <= rho + slack,
        UncertaintySetSpec::Cvar { alpha } => w.iter().all(|&x| x <= 1.0 / (alpha * n) + slack),
        UncertaintySetSpec::Group => (0..w.len()).all(|i| {
            (0..w.len()).filter(|&j| groups[j] == groups[i]).all(|j| (w[j] - w[i]).abs() <= slack)
        }),
        UncertaintySetSpec::Intersection { members } => members.iter().all(|m| member(m, w, groups, slack)),
    }
}

/// Best grid values of `w·linear` and `w·cum + η H(w)` over the feasible set.
///
/// Exhaustive scan of the step-1e-3 grid (step 1e-2 first when the simplex has
/// four vertices), then each optimum is refined on 10× finer grids in a small
/// box around it, down to step 1e-5, so the grid's own discretisation error
/// stays well below the comparison tolerance. `hints` (one point per
/// objective) seed extra refinement boxes; extra points can only raise the
/// grid optimum, so they never make the comparison easier.
fn grid_optimum(
    spec: &UncertaintySetSpec,
    groups: &[usize],
    linear: &[f64],
    cum: &[f64],
    eta: f64,
    hints: [&[f64]; 2],
) -> (f64, f64) {
    let n = linear.len();
    if matches!(spec, UncertaintySetSpec::Erm) {
        let w = vec![1.0 / n as f64; n];
        let lin = w.iter().zip(linear).map(|(a, b)| a * b).sum();
        let reg = w.iter().zip(cum).map(|(a, b)| a * b).sum::<f64>() + eta * entropy(&w);
        return (lin, reg);
    }
    let grouped = spec.needs_groups();
    let k = if grouped { groups.iter().max().unwrap() + 1 } else { n };
    let sizes: Vec<usize> = (0..k).map(|g| groups.iter().filter(|&&x| x == g).count()).collect();
    let to_w = |x: &[f64]| -> Vec<f64> {
        if grouped {
            groups.iter().map(|&g| x[g] / sizes[g] as f64).collect()
        } else {
            x.to_vec()
        }
    };
    let objectives: [&dyn Fn(&[f64]) -> f64; 2] = [
        &|w| w.iter().zip(linear).map(|(a, b)| a * b).sum(),
        &|w| w.iter().zip(cum).map(|(a, b)| a * b).sum::<f64>() + eta * entropy(w),
    ];
    let to_x = |w: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; k];
        for (i, &v) in w.iter().enumerate() {
            x[if grouped { groups[i] } else { i }] += v;
        }
        x
    };
    // Best feasible value on the grid `steps` within the box, and where.
    let scan = |f: &dyn Fn(&[f64]) -> f64, steps: usize, lo: &[usize], hi: &[usize]| {
        let mut best = f64::NEG_INFINITY;
        let mut at: Vec<f64> = Vec::new();
        simplex_grid(k, steps, lo, hi, &mut |x| {
            let w = to_w(x);
            if member(spec, &w, groups, 1e-12) {
                let v = f(&w);
                if v > best {
                    best = v;
                    at = x.to_vec();
                }
            }
        });
        (best, at)
    };
    let mut out = [f64::NEG_INFINITY; 2];
    for (o, f) in objectives.iter().enumerate() {
        let start = if k <= 3 { 1000 } else { 100 };
        let (best, at) = scan(*f, start, &vec![0; k], &vec![start; k]);
        out[o] = best;
        for centre in [at, to_x(hints[o])] {
            let mut centre = centre;
            let mut steps = start;
            while steps < 100_000 && !centre.is_empty() {
                steps *= 10;
                let c: Vec<usize> = centre.iter().map(|&v| (v * steps as f64).round() as usize).collect();
                let lo: Vec<usize> = c.iter().map(|&v| v.saturating_sub(30)).collect();
                let hi: Vec<usize> = c.iter().map(|&v| (v + 30).min(steps)).collect();
                let (best, at) = scan(*f, steps, &lo, &hi);
                out[o] = out[o].max(best);
                centre = at;
            }
        }
    }
    (out[0], out[1])
}

fn criterion_5() -> Outcome {
    let kinds: Vec<(&str, Box<dyn Fn(&mut SplitMix64) -> UncertaintySetSpec + Sync>)> = vec![
        ("erm", Box::new(|_| UncertaintySetSpec::Erm)),
        ("simplex", Box::new(|_| UncertaintySetSpec::Simplex)),
        ("kl", Box::new(|r| UncertaintySetSpec::Kl { rho: 0.05 + 0.45 * r.uniform() })),
        ("cvar", Box::new(|r| UncertaintySetSpec::Cvar { alpha: 0.2 + 0.8 * r.uniform() })),
        ("chi2", Box::new(|r| UncertaintySetSpec::Chi2 { rho: 0.05 + 0.45 * r.uniform() })),
        ("group", Box::new(|_| UncertaintySetSpec::Group)),
        (
            "chi2&group",
            Box::new(|r| UncertaintySetSpec::Intersection {
                members: vec![UncertaintySetSpec::Chi2 { rho: 0.05 + 0.45 * r.uniform() }, UncertaintySetSpec::Group],
            }),
        ),
        (
            "cvar&kl",
            Box::new(|r| UncertaintySetSpec::Intersection {
                members: vec![
                    UncertaintySetSpec::Cvar { alpha: 0.3 + 0.7 * r.uniform() },
                    UncertaintySetSpec::Kl { rho: 0.05 + 0.45 * r.uniform() },
                ],
            }),
        ),
    ];
    let results: Vec<(String, f64)> = thread::scope(|s| {
        let handles: Vec<_> = kinds
            .iter()
            .enumerate()
            .map(|(ki, (name, make))| {
                s.spawn(move || {
                    let mut rng = SplitMix64::derive(5, ki as u64);
                    let mut worst = 0.0f64;
                    for _ in 0..200 {
                        let n = 2 + rng.below(3);
                        let spec = make(&mut rng);
                        // Compact group ids 0..k.
                        let k = 1 + rng.below(n);
                        let mut groups: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.below(k) }).collect();
                        rng.shuffle(&mut groups);
                        let linear: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
                        let cum: Vec<f64> = (0..n).map(|_| 3.0 * rng.uniform()).collect();
                        let eta = 0.1 + 1.9 * rng.uniform();
                        let set = UncertaintySet::new(spec.clone(), n, Some(&groups)).unwrap();
                        let (lin_val, lin_w) = set.linear_max(&linear).unwrap();
                        let reg_w = set.regularized_argmax(&cum, &RegularizerSpec::entropy(eta)).unwrap();
                        let reg_w = reg_w.as_slice();
                        let feasible = member(&spec, lin_w.as_slice(), &groups, 1e-6) && member(&spec, reg_w, &groups, 1e-6);
                        let reg_val = reg_w.iter().zip(&cum).map(|(a, b)| a * b).sum::<f64>() + eta * entropy(reg_w);
                        let (g_lin, g_reg) = grid_optimum(&spec, &groups, &linear, &cum, eta, [lin_w.as_slice(), reg_w]);
                        // Our value may exceed the grid's (finer optimum) but not fall below it.
                        let err = (lin_val - g_lin).abs().max((reg_val - g_reg).abs());
                        let below = (g_lin - lin_val).max(g_reg - reg_val);
                        worst = worst.max(if feasible && below <= 1e-6 { err } else { f64::INFINITY });
                    }
                    (name.to_string(), worst)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let pass = results.iter().all(|(_, e)| *e <= 1e-3);
    let detail: Vec<String> = results.iter().map(|(n, e)| format!("{n} {e:.1e}")).collect();
    outcome(pass, format!("max |oracle - grid| per kind: {}", detail.join(", ")))
}

/// `x_i = i` on one feature, so stumps can carve arbitrary intervals.
fn line_dataset(labels: &[usize], groups: Option<&[usize]>, classes: usize) -> Dataset<f64> {
    let samples = labels
        .iter()
        .enumerate()
        .map(|(i, &y)| Sample { features: vec![i as f64], label: y, group: groups.map(|g| g[i]) })
        .collect();
    let k = groups.map_or(0, |g| g.iter().max().unwrap() + 1);
    Dataset::new(samples, classes, k, 0).unwrap()
}

fn random_stump_ensemble(rng: &mut SplitMix64, n: usize, classes: usize) -> Ensemble<f64> {
    let m = 1 + rng.below(8);
    let mut q = Ensemble::new();
    for _ in 0..m {
        let h = Hypothesis::Stump {
            feature: 0,
            threshold: rng.uniform() * n as f64 - 0.5,
            left: rng.below(classes),
            right: rng.below(classes),
        };
        q.push(h, 0.01 + rng.uniform()).unwrap();
    }
    q.normalized()
}

fn criterion_6() -> Outcome {
    let mut rng = SplitMix64::new(6);
    let mut prop2_bad = 0;
    let mut prop3_bad = 0;
    let mut prop3_slack = f64::INFINITY;
    for trial in 0..1000 {
        let n = 1 + rng.below(30);
        // Binary labels, full simplex: the vote is wrong exactly where a Q-majority errs.
        let labels: Vec<usize> = (0..n).map(|_| rng.below(2)).collect();
        let d = line_dataset(&labels, None, 2);
        let q = random_stump_ensemble(&mut rng, n, 2);
        let set = UncertaintySet::new(UncertaintySetSpec::Simplex, n, None).unwrap();
        let rand = q.randomized_risk(&d, &set).unwrap();
        let det = q.deterministic_risk(&d, &set).unwrap();
        let expect = if rand >= 0.5 { 1.0 } else { 0.0 };
        if det != expect {
            prop2_bad += 1;
        }

        // Multiclass: deterministic risk <= γ_Q · randomized risk.
        let classes = 3 + rng.below(2);
        let labels: Vec<usize> = (0..n).map(|_| rng.below(classes)).collect();
        let k = 1 + rng.below(n.min(4));
        let groups: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.below(k) }).collect();
        let d = line_dataset(&labels, Some(&groups), classes);
        let q = random_stump_ensemble(&mut rng, n, classes);
        let spec = match trial % 3 {
            0 => UncertaintySetSpec::Simplex,
            1 => UncertaintySetSpec::Cvar { alpha: 0.05 + 0.95 * rng.uniform() },
            _ => UncertaintySetSpec::Group,
        };
        let set = UncertaintySet::for_dataset(spec, &d).unwrap();
        let rand = q.randomized_risk(&d, &set).unwrap();
        let det = q.deterministic_risk(&d, &set).unwrap();
        let gamma = q.gamma_q(&d).unwrap();
        let slack = gamma * rand - det;
        prop3_slack = prop3_slack.min(slack);
        if det > gamma * rand + 1e-9 {
            prop3_bad += 1;
        }
    }
    outcome(
        prop2_bad == 0 && prop3_bad == 0,
        format!("binary identity violations {prop2_bad}/1000, gamma bound violations {prop3_bad}/1000 (min slack {prop3_slack:.2e})"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = SplitMix64::new(7);
    let n = 24;
    let labels: Vec<usize> = (0..n).map(|_| rng.below(2)).collect();
    let groups: Vec<usize> = (0..n).map(|i| i % 3).collect();
    let d = line_dataset(&labels, Some(&groups), 2);
    let pool: Vec<Hypothesis<f64>> = (0..5)
        .map(|j| Hypothesis::Stump { feature: 0, threshold: 4.5 * j as f64 + 1.5, left: j % 2, right: 1 - j % 2 })
        .collect();
    let sets = [
        UncertaintySetSpec::Simplex,
        UncertaintySetSpec::Cvar { alpha: 0.3 },
        UncertaintySetSpec::Group,
        UncertaintySetSpec::Erm,
    ];
    let mut mismatches = Vec::new();
    for spec in sets {
        let mut gp = SolverConfig::new(Algorithm::GamePlay, spec.clone(), 50, LearnerKind::Pool { hypotheses: pool.clone() });
        gp.eta = 0.3;
        gp.eta_schedule = EtaSchedule::LinearInRound;
        gp.validation_fraction = 0.0;
        gp.record_weights = true;
        let mut fw = gp.clone();
        fw.algorithm = Algorithm::FrankWolfe;
        fw.eta_schedule = EtaSchedule::Constant;
        fw.line_search = LineSearch::InverseRound;
        let (_, a) = solve(&d, &gp).unwrap();
        let (_, b) = solve(&d, &fw).unwrap();
        if a.weights.len() != 50 || a.weights != b.weights {
            mismatches.push(format!("{spec:?}"));
        }
    }
    outcome(mismatches.is_empty(), if mismatches.is_empty() {
        "w^t bit-identical for 50 rounds on simplex, cvar, group, erm".to_string()
    } else {
        format!("weights differ for {}", mismatches.join(", "))
    })
}

fn criterion_8() -> Outcome {
    let mut rng = SplitMix64::new(8);
    let n = 20;
    let samples: Vec<Sample<f64>> = (0..n)
        .map(|_| {
            let x = [rng.gaussian(), rng.gaussian()];
            let y = usize::from(x[0] * x[1] + 0.3 * rng.gaussian() > 0.0);
            Sample { features: x.to_vec(), label: y, group: None }
        })
        .collect();
    let d = Dataset::new(samples, 2, 0, 0).unwrap();

    // Reference AdaBoost: multiply misclassified weights by (1-ε)/ε.
    let budget = TrainBudget::default();
    let mut w = vec![1.0 / n as f64; n];
    let mut ref_w = Vec::new();
    let mut ref_alpha = Vec::new();
    for _ in 0..10 {
        ref_w.push(w.clone());
        let h = best_response(&d, &w, &LearnerKind::Stump, &budget).unwrap();
        let miss = loss_row(&h, &d).unwrap();
        let eps: f64 = w.iter().zip(&miss).map(|(a, b)| a * b).sum();
        ref_alpha.push(0.5 * ((1.0 - eps) / eps).ln());
        for (wi, &m) in w.iter_mut().zip(&miss) {
            if m > 0.0 {
                *wi *= (1.0 - eps) / eps;
            }
        }
        let z: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= z);
    }

    let mut cfg = SolverConfig::new(Algorithm::GenAdaBoost, UncertaintySetSpec::Simplex, 10, LearnerKind::Stump);
    cfg.eta = 0.5;
    cfg.line_search = LineSearch::Exact;
    cfg.validation_fraction = 0.0;
    cfg.record_weights = true;
    let (_, trace) = solve(&d, &cfg).unwrap();
    let mut worst_w = 0.0f64;
    let mut worst_a = 0.0f64;
    for t in 0..10 {
        for (a, b) in trace.weights[t].iter().zip(&ref_w[t]) {
            worst_w = worst_w.max((a - b).abs());
        }
        worst_a = worst_a.max((trace.records[t].alpha - ref_alpha[t]).abs());
    }
    outcome(
        worst_w <= 1e-6 && worst_a <= 1e-6,
        format!("max weight error {worst_w:.2e}, max coefficient error {worst_a:.2e}"),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = SplitMix64::new(9);
    let (h, n) = (10, 50);
    let losses: Vec<Vec<f64>> = (0..h).map(|_| (0..n).map(|_| rng.uniform()).collect()).collect();
    let set = UncertaintySet::new(UncertaintySetSpec::Simplex, n, None).unwrap();
    let gap = |t: usize| {
        let mut cfg = SolverConfig::new(Algorithm::GamePlay, UncertaintySetSpec::Simplex, t, LearnerKind::Stump);
        cfg.eta = (t as f64 / (n as f64).ln()).sqrt();
        cfg.validation_fraction = 0.0;
        let (_, trace) = solve_matrix_game(&losses, &set, &cfg).unwrap();
        trace.last().unwrap().ne_gap.unwrap()
    };
    let (g2, g3, g4) = (gap(100), gap(1000), gap(10_000));
    let bound = 100f64.powf(-0.4);
    let ratio = g4 / g2;
    outcome(
        ratio <= bound,
        format!("gap T=1e2 {g2:.3e}, T=1e3 {g3:.3e}, T=1e4 {g4:.3e}; ratio {ratio:.3} (need <= {bound:.3})"),
    )
}

fn criterion_10() -> Outcome {
    // Three runs of labels 1 | 0 | 1: every weighting leaves a stump with error <= 1/3.
    let labels: Vec<usize> = (0..30).map(|i| usize::from(!(10..20).contains(&i))).collect();
    let d = line_dataset(&labels, None, 2);
    let set = UncertaintySet::new(UncertaintySetSpec::Simplex, d.len(), None).unwrap();
    for t in 1..=50 {
        let mut cfg = SolverConfig::new(Algorithm::GenAdaBoost, UncertaintySetSpec::Simplex, t, LearnerKind::Stump);
        cfg.eta = 0.5;
        cfg.line_search = LineSearch::Exact;
        cfg.validation_fraction = 0.0;
        let (q, _) = solve(&d, &cfg).unwrap();
        if q.deterministic_risk(&d, &set).unwrap() == 0.0 {
            return outcome(true, format!("deterministic simplex risk 0 after {t} rounds"));
        }
    }
    outcome(false, "deterministic simplex risk still positive after 50 rounds")
}

fn main() -> ExitCode {
    let d2 = run_roster(SyntheticKind::DatasetII, &dataset2_roster(true));
    let criteria: Vec<(u32, &str, bool, Outcome)> = vec![
        (1, "Dataset-I domain-oblivious table", false, criterion_1()),
        (2, "Dataset-II domain-aware table", false, criterion_2(&d2)),
        (3, "Dataset-II chi2 & group intersection", false, criterion_3(&d2)),
        (4, "CVaR projection vs KKT enumeration", true, criterion_4()),
        (5, "set oracles vs exhaustive grid", true, criterion_5()),
        (6, "derandomization identities", true, criterion_6()),
        (7, "game play / Frank-Wolfe equivalence", true, criterion_7()),
        (8, "AdaBoost recovery", true, criterion_8()),
        (9, "duality-gap decay", true, criterion_9()),
        (10, "weak-learning boostability", true, criterion_10()),
    ];
    let mut gate_failed = false;
    for (id, name, gating, o) in &criteria {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if *gating { "" } else { " (reported)" };
        println!("{tag} {id:>2} {name}{note}: {}", o.detail);
        gate_failed |= *gating && !o.pass;
    }
    if gate_failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
