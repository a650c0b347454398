//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use paleo::dists::{beta_from_mode_std, gamma_from_mode_std};
use paleo::model::{build_priors, survival_fraction, PriorConfig, TimeGrid};
use paleo::verify::{coverage_check, gradient_check, oracle_check, recovery_runs, RecoveryRun};

struct Outcome {
    passed: bool,
    line: String,
}

fn outcome(passed: bool, line: String) -> Outcome {
    Outcome { passed, line }
}

fn recovery(runs: &[RecoveryRun]) -> Outcome {
    let names = ["loss_rate", "scaling_factor", "sampling_prob"];
    let mut ok_seeds = 0;
    let mut slowest: f64 = 0.0;
    for r in runs {
        slowest = slowest.max(r.seconds);
        let all = r.recovered.iter().all(|x| *x);
        ok_seeds += all as usize;
        let means: Vec<String> = names
            .iter()
            .zip(&r.recovered)
            .map(|(n, ok)| {
                format!(
                    "{n}={:.4e}{}",
                    r.summary.parameter(n).unwrap().mean,
                    if *ok { "" } else { "(x)" }
                )
            })
            .collect();
        println!("    seed {}: {} [{:.2} s]", r.seed, means.join(" "), r.seconds);
    }
    outcome(
        ok_seeds >= 8 && slowest <= 600.0,
        format!(
            "parameter recovery: {ok_seeds}/{} seeds recover all of λ, a, p (need 8); slowest fit {slowest:.2} s (limit 600 s)",
            runs.len()
        ),
    )
}

fn gradient() -> Outcome {
    let c = gradient_check(0).expect("gradient check runs");
    outcome(
        c.passed && c.seconds < 30.0,
        format!(
            "gradient: max relative error {:.3e} (limit {:.0e}), {:.2} s (limit 30 s)",
            c.measured, c.threshold, c.seconds
        ),
    )
}

fn oracle() -> Outcome {
    let c = oracle_check(0).expect("oracle check runs");
    println!("    {}", c.detail);
    outcome(
        c.passed && c.seconds < 300.0,
        format!(
            "SVI vs MCMC: max |Δmean|/std {:.3} (limit {}), {:.1} s (limit 300 s)",
            c.measured, c.threshold, c.seconds
        ),
    )
}

fn coverage() -> Outcome {
    let c = coverage_check(0, 20).expect("coverage check runs");
    println!("    {}", c.detail);
    outcome(
        c.passed,
        format!(
            "coverage: {:.3} of replicate × latent pairs inside 90% intervals (band [0.6, 1.0])",
            c.measured
        ),
    )
}

fn parameterization() -> Outcome {
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let mut worst: f64 = 0.0;
    let mut check_gamma = |mode: f64, std: f64| {
        let g = gamma_from_mode_std(mode, std).expect("feasible");
        worst = worst.max(rel(g.mode().unwrap(), mode)).max(rel(g.std(), std));
    };
    check_gamma(150.0, 150.0);
    check_gamma(1e-4, 1e-4);
    check_gamma(0.1, 0.1);
    let grid = TimeGrid::cyprus_default();
    let priors = build_priors(&grid, &PriorConfig::default()).unwrap();
    for p in &priors.population {
        let m = p.mode().unwrap();
        check_gamma(m, p.std());
    }
    let b = beta_from_mode_std(0.1, 0.1).expect("feasible");
    worst = worst.max(rel(b.mode().unwrap(), 0.1)).max(rel(b.std(), 0.1));
    outcome(
        worst <= 1e-9,
        format!(
            "mode/std round trip: worst relative error {worst:.2e} over {} gamma and 1 beta cases (limit 1e-9)",
            3 + priors.population.len()
        ),
    )
}

fn survival() -> Outcome {
    let s = survival_fraction(1e-4, 1_000.0);
    outcome(
        (s - 0.90484).abs() <= 1e-5,
        format!("survival_fraction(1e-4, 1000) = {s:.7} (target 0.90484 ± 1e-5)"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let artifacts = [
        "counts.csv",
        "truth.json",
        "fit.json",
        "summary.json",
        "trajectory.csv",
        "parameters.csv",
        "elbo.csv",
        "trajectory.svg",
        "densities.svg",
    ];
    let pipeline = |dir: &Path| -> Vec<Vec<u8>> {
        for cmd in ["simulate", "fit", "report"] {
            let out = Command::new(env!("CARGO_BIN_EXE_paleo"))
                .args([cmd, "--seed", "2022"])
                .current_dir(dir)
                .env_remove("PALEO_SEED")
                .output()
                .expect("binary runs");
            assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        }
        artifacts
            .iter()
            .map(|a| std::fs::read(dir.join("out").join(a)).unwrap())
            .collect()
    };
    let first = pipeline(dir.path());
    let second = pipeline(dir.path());
    let differing: Vec<&str> = artifacts
        .iter()
        .zip(first.iter().zip(&second))
        .filter(|(_, (a, b))| a != b)
        .map(|(n, _)| *n)
        .collect();
    outcome(
        differing.is_empty(),
        format!(
            "determinism: {}/{} artifacts byte-identical across two simulate, fit, report runs{}",
            artifacts.len() - differing.len(),
            artifacts.len(),
            if differing.is_empty() {
                String::new()
            } else {
                format!(" (differ: {})", differing.join(", "))
            }
        ),
    )
}

fn trend(run: &RecoveryRun) -> Outcome {
    let rows = &run.summary.trajectory;
    let mean = |r: &[paleo::report::TrajectoryRow]| r.iter().map(|x| x.mean).sum::<f64>() / r.len() as f64;
    let early = mean(&rows[..10]);
    let late = mean(&rows[rows.len() - 10..]);
    let narrowest = rows.iter().map(|r| r.q75 - r.q25).fold(f64::INFINITY, f64::min);
    outcome(
        late > early && narrowest > 0.0,
        format!(
            "trajectory shape (seed {}): mean of last 10 bins {late:.4e} vs first 10 {early:.4e}; narrowest IQR {narrowest:.4e}",
            run.seed
        ),
    )
}

fn main() {
    let started = Instant::now();
    let seeds: Vec<u64> = (0..10).collect();
    let runs = recovery_runs(&seeds).expect("recovery fits run");
    let results = [
        (1, recovery(&runs)),
        (2, gradient()),
        (3, oracle()),
        (4, coverage()),
        (5, parameterization()),
        (6, survival()),
        (7, determinism()),
        (8, trend(&runs[0])),
    ];
    println!();
    let mut failed = 0;
    for (n, o) in &results {
        println!("{} criterion {n}: {}", if o.passed { "PASS" } else { "FAIL" }, o.line);
        failed += !o.passed as usize;
    }
    println!(
        "\n{} of {} criteria passed in {:.1} s",
        results.len() - failed,
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
