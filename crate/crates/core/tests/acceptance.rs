//! Acceptance suite. Each criterion prints one PASS/FAIL line; the binary
//! exits non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::sync::Mutex;
use std::time::Instant;

use rand::{Rng, SeedableRng};

use doral::allocation::solve_lp;
use doral::env::{true_tau, ArmSpec, DelayDist, EnvModel, SimRng, World};
use doral::estimators::{basket_count, median_of_means, robust_bounds, RadiusMode};
use doral::harness::{preset, run_experiment, ExperimentConfig};
use doral::identify::{run_race, AcceptanceRule, CutoffScope, RaceConfig, RaceEnv};
use doral::linear::ContextRegressor;
use doral::policies::{dalp_run, doral_run, PolicyConfig, PolicyKind, RunMetrics, RunOptions, TauMode};

/// Budget-safety ledger shared by every run in the suite.
static SPEND_LOG: Mutex<Vec<String>> = Mutex::new(Vec::new());
static RUNS_CHECKED: Mutex<usize> = Mutex::new(0);

fn audit(budget: f64, m: &RunMetrics) {
    *RUNS_CHECKED.lock().unwrap() += 1;
    let total = m.total_spend();
    let mut log = SPEND_LOG.lock().unwrap();
    if total > budget {
        log.push(format!("{} seed {}: spend {total} > budget {budget}", m.label, m.seed));
    }
    if m.records.iter().any(|r| r.action.is_none() && r.spend != 0.0) {
        log.push(format!("{} seed {}: a skip round spent budget", m.label, m.seed));
    }
    if let Some(last) = m.records.last() {
        if last.remaining + total != budget {
            log.push(format!("{} seed {}: ledger does not balance", m.label, m.seed));
        }
    }
}

fn audit_experiment(cfg: &ExperimentConfig, res: &doral::harness::ExperimentResult) {
    for p in &res.policies {
        for rep in &p.replications {
            audit(cfg.env.budget, rep.metrics());
        }
    }
}

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_tau() -> Outcome {
    let pareto = ArmSpec {
        id: 0,
        features: vec![0.5],
        cost: 1.0,
        delay: DelayDist::Pareto {
            x_min: 400.0,
            shape: 2.0,
        },
    };
    let geometric = ArmSpec {
        delay: DelayDist::Geometric { mean: 300.0 },
        ..pareto.clone()
    };
    let p = true_tau(&pareto, 500.0);
    let g = true_tau(&geometric, 500.0);
    check(
        (p - 0.36).abs() < 1e-12 && (g - 0.8113).abs() <= 0.0005,
        format!("Pareto(400,2) -> {p:.6}, Geometric(300) -> {g:.6}"),
    )
}

// Optimal basic solutions have at most one fractional coordinate: try every
// 0/1 vector and every single fractional completion.
fn lp_brute_force(pi: &[f64], eta: &[f64], rho: f64) -> f64 {
    let n = pi.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        let used: f64 = (0..n).filter(|j| mask >> j & 1 == 1).map(|j| pi[j]).sum();
        if used > rho + 1e-15 {
            continue;
        }
        let val: f64 = (0..n).filter(|j| mask >> j & 1 == 1).map(|j| pi[j] * eta[j]).sum();
        best = best.max(val);
        for k in (0..n).filter(|k| mask >> k & 1 == 0 && pi[*k] > 0.0) {
            let frac = ((rho - used) / pi[k]).clamp(0.0, 1.0);
            best = best.max(val + frac * pi[k] * eta[k]);
        }
    }
    best
}

fn criterion_lp() -> Outcome {
    let mut rng = SimRng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let n = rng.random_range(1..=10);
        let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let pi: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let eta: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let rho = rng.random::<f64>();
        let sol = solve_lp(&pi, &eta, rho).map_err(|e| e.to_string())?;
        let used: f64 = sol.p.iter().zip(&pi).map(|(p, q)| p * q).sum();
        if used > rho + 1e-12 || sol.p.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(format!("infeasible p {:?} for rho {rho}", sol.p));
        }
        worst = worst.max((sol.value - lp_brute_force(&pi, &eta, rho)).abs());
    }
    check(worst <= 1e-9, format!("max value gap {worst:.3e} over 500 instances"))
}

// Normal equations (lambda I + F^T F) theta = F^T r, Gaussian elimination
// with partial pivoting.
fn ridge_oracle(rows: &[Vec<f64>], rewards: &[f64], lambda: f64) -> Vec<f64> {
    let d = rows[0].len();
    let mut a = vec![vec![0.0; d + 1]; d];
    for i in 0..d {
        a[i][i] = lambda;
    }
    for (f, r) in rows.iter().zip(rewards) {
        for i in 0..d {
            for j in 0..d {
                a[i][j] += f[i] * f[j];
            }
            a[i][d] += r * f[i];
        }
    }
    for col in 0..d {
        let piv = (col..d)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, piv);
        for row in 0..d {
            if row != col {
                let k = a[row][col] / a[col][col];
                for c in col..=d {
                    a[row][c] -= k * a[col][c];
                }
            }
        }
    }
    (0..d).map(|i| a[i][d] / a[i][i]).collect()
}

fn criterion_ridge() -> Outcome {
    let mut rng = SimRng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = rng.random_range(1..=8);
        let n = rng.random_range(1..=200);
        let lambda = rng.random_range(0.1..2.0);
        let mut reg = ContextRegressor::new(0, d, lambda, f64::INFINITY).map_err(|e| e.to_string())?;
        let mut rows = Vec::new();
        let mut rewards = Vec::new();
        for t in 0..n {
            let f: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let r = rng.random::<f64>();
            reg.record_pull(t, 0, &f).map_err(|e| e.to_string())?;
            reg.record_feedback(&f, r, true).map_err(|e| e.to_string())?;
            rows.push(f);
            rewards.push(r);
        }
        let got = reg.theta_hat();
        let want = ridge_oracle(&rows, &rewards, lambda);
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
    }
    check(
        worst <= 1e-10,
        format!("max coordinate gap {worst:.3e} over 100 instances"),
    )
}

fn criterion_concentration() -> Outcome {
    let (delta, budget, alpha, pulls, mean) = (0.05, 85_000.0, 1.0, 400, 200.0);
    let dist = DelayDist::Geometric { mean };
    let (h, _) = basket_count(pulls, delta).map_err(|e| e.to_string())?;
    let mut rng = SimRng::seed_from_u64(4);
    let trials = 10_000;
    let mut violations = 0;
    let mut worst_case_violations = 0;
    let covers = |d_m: f64, mode: RadiusMode| -> Result<bool, String> {
        let (ucb, lcb) = robust_bounds(d_m, pulls, alpha, budget, mode).map_err(|e| e.to_string())?;
        Ok(lcb <= mean && mean <= ucb)
    };
    for _ in 0..trials {
        let sample: Vec<f64> = (0..pulls).map(|_| dist.sample(&mut rng) as f64).collect();
        let d_m = median_of_means(&sample, h).map_err(|e| e.to_string())?;
        if !covers(d_m, RadiusMode::Plugin)? {
            violations += 1;
        }
        if !covers(d_m, RadiusMode::WorstCase)? {
            worst_case_violations += 1;
        }
    }
    let rate = violations as f64 / trials as f64;
    let worst_rate = worst_case_violations as f64 / trials as f64;
    let limit = delta + budget.powf(-alpha);
    check(
        rate <= limit,
        format!("plug-in radius violation rate {rate:.4} (limit {limit:.5}); B/2 radius {worst_rate:.4}"),
    )
}

/// Identification-only environment backed by the simulator.
struct RaceWorld<'a> {
    world: World<'a>,
    model: &'a EnvModel,
    t: usize,
}

impl RaceEnv for RaceWorld<'_> {
    fn round(&self) -> usize {
        self.t
    }

    fn cost(&self, arm: usize) -> f64 {
        self.model.arms()[arm].cost
    }

    fn remaining_budget(&self) -> f64 {
        self.world.remaining()
    }

    fn rounds_left(&self) -> usize {
        self.model.horizon() - self.t
    }

    fn pull(&mut self, arm: usize) -> doral::Result<Vec<(usize, usize, usize)>> {
        let due = self.world.pop_due(self.t);
        let context = self.world.sample_context();
        self.world.step(self.t, context, Some(arm))?;
        self.t += 1;
        Ok(due.iter().map(|r| (r.arm, r.decision_round, r.delay)).collect())
    }
}

fn criterion_identification() -> Outcome {
    let mut cfg = preset("diverse-delays-geometric").unwrap();
    cfg.env.budget = 20_000.0;
    cfg.env.horizon = 400_000;
    let model = cfg.build_env().map_err(|e| e.to_string())?;
    let race = RaceConfig {
        target: 5,
        delta: 0.05,
        alpha: 1.0,
        budget: model.budget(),
        spend_cap: 0.25 * model.budget(),
        radius_mode: RadiusMode::Plugin,
        acceptance_rule: AcceptanceRule::Responsive,
        cutoff_scope: CutoffScope::Accepted,
    };
    let mut hits = 0;
    let mut failures = 0;
    let mut spends = Vec::new();
    for seed in 0..50 {
        let mut env = RaceWorld {
            world: World::new(&model, seed),
            model: &model,
            t: 0,
        };
        match run_race(&mut env, model.num_arms(), &race) {
            Ok(out) => {
                if out.spend > model.budget() {
                    SPEND_LOG.lock().unwrap().push(format!("race seed {seed} overspent"));
                }
                *RUNS_CHECKED.lock().unwrap() += 1;
                spends.push(out.spend);
                if out.accepted == vec![0, 1, 2, 3, 4] {
                    hits += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    let mean_spend = spends.iter().sum::<f64>() / spends.len().max(1) as f64;
    check(
        hits >= 45,
        format!(
            "{hits}/50 runs accepted the five fastest arms, {failures} hit the spend cap (mean spend {mean_spend:.0})"
        ),
    )
}

fn criterion_ordering() -> Outcome {
    let mut cfg = preset("diverse-delays-pareto").unwrap();
    cfg.env.budget = 10_000.0;
    cfg.env.horizon = 12_000;
    cfg.replications = 50;
    cfg.diagnostics = false;
    // reported alongside, not part of the check
    let mut uncapped = cfg.policies[0].clone();
    uncapped.name = Some("DORAL-uncapped".into());
    uncapped.id_budget_fraction = 1.0;
    cfg.policies.push(uncapped);
    let res = run_experiment(&cfg, None).map_err(|e| e.to_string())?;
    audit_experiment(&cfg, &res);
    let mean = |label: &str| -> (f64, usize) {
        let p = res.policies.iter().find(|p| p.label == label).unwrap();
        let finals: Vec<f64> = p.replications.iter().map(|r| r.metrics().final_reward()).collect();
        let failed = p.replications.iter().filter(|r| !r.is_ok()).count();
        (finals.iter().sum::<f64>() / finals.len() as f64, failed)
    };
    let (doral, doral_failed) = mean("DORAL");
    let (dalp, _) = mean("D-ALP");
    let (dlin, _) = mean("D-LinUCB");
    let (random, _) = mean("Random");
    let (free, free_failed) = mean("DORAL-uncapped");
    let detail = format!(
        "DORAL {doral:.1} ({doral_failed} races hit the cap), D-ALP {dalp:.1}, D-LinUCB {dlin:.1}, Random {random:.1}; \
         uncapped DORAL {free:.1} ({free_failed} failed)"
    );
    check(doral >= dalp && doral >= dlin && dlin >= random, detail)
}

fn criterion_degeneracy() -> Outcome {
    let mut cfg = preset("diverse-delays-geometric-small").unwrap();
    cfg.env.horizon = 3000;
    let env = cfg.build_env().map_err(|e| e.to_string())?;
    let mut doral = PolicyConfig::new(PolicyKind::Doral);
    doral.tau_mode = TauMode::Unit;
    doral.target_arms = Some(env.num_arms());
    doral.cutoff = Some(500.0);
    let mut dalp = PolicyConfig::new(PolicyKind::Dalp);
    dalp.cutoff = Some(500.0);
    let opts = RunOptions::default();
    for seed in 0..10 {
        let a = doral_run(&env, &doral, seed, &opts).map_err(|e| e.to_string())?;
        let b = dalp_run(&env, &dalp, seed, &opts).map_err(|e| e.to_string())?;
        audit(env.budget(), &a);
        audit(env.budget(), &b);
        if a.actions() != b.actions() {
            return Err(format!("seed {seed}: action traces differ"));
        }
    }
    Ok("10/10 seeds produced identical action traces".into())
}

fn run_cli(out: &std::path::Path) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_doral"))
        .args([
            "run",
            "similar-delays-pareto-small",
            "--reps",
            "3",
            "--seed",
            "11",
            "--no-plots",
            "--quiet",
            "--out",
        ])
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    std::fs::read(out.join("curves.csv")).map_err(|e| e.to_string())
}

fn criterion_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = run_cli(&dir.path().join("a"))?;
    let b = run_cli(&dir.path().join("b"))?;
    let runs = std::fs::read_to_string(dir.path().join("a").join("runs.csv")).map_err(|e| e.to_string())?;
    let budget = preset("similar-delays-pareto-small").unwrap().env.budget;
    let mut reader = csv::Reader::from_reader(runs.as_bytes());
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    let col = headers.iter().position(|h| h == "spend").unwrap();
    for row in reader.records() {
        let row = row.map_err(|e| e.to_string())?;
        let spend: f64 = row[col].parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
        *RUNS_CHECKED.lock().unwrap() += 1;
        if spend > budget {
            SPEND_LOG.lock().unwrap().push(format!("CLI run overspent: {spend}"));
        }
    }
    check(
        a == b && !a.is_empty(),
        format!("curves.csv {} bytes, identical: {}", a.len(), a == b),
    )
}

fn criterion_budget() -> Outcome {
    // a few extra small-budget runs of every policy on top of the suite's runs
    for name in ["similar-delays-geometric-small", "diverse-delays-pareto-small"] {
        let mut cfg = preset(name).unwrap();
        cfg.replications = 5;
        cfg.diagnostics = false;
        let res = run_experiment(&cfg, None).map_err(|e| e.to_string())?;
        audit_experiment(&cfg, &res);
    }
    let log = SPEND_LOG.lock().unwrap();
    let runs = *RUNS_CHECKED.lock().unwrap();
    check(
        log.is_empty(),
        if log.is_empty() {
            format!("{runs} runs audited, none overspent or charged a skip")
        } else {
            log.join("; ")
        },
    )
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 tau cross-checks", criterion_tau),
        ("2 LP oracle equivalence", criterion_lp),
        ("3 ridge oracle equivalence", criterion_ridge),
        ("4 concentration coverage", criterion_concentration),
        ("5 responsive-arm identification", criterion_identification),
        ("6 end-to-end reward ordering", criterion_ordering),
        ("7 degeneracy equivalence", criterion_degeneracy),
        ("8 CLI determinism", criterion_determinism),
        ("9 budget safety", criterion_budget),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        if !args.is_empty() && !args.iter().any(|a| name.contains(a.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
