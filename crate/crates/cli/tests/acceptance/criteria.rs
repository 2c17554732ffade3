use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use crate::run_cli;
use mixrad::bregman::{finite_diff_check, mc_moments, mixup_smoothing, sample_moments};
use mixrad::complexity::{
    exact_rademacher_linear, linear_mixup_upper_bound, linear_reduction_bound, linear_upper_bound,
    mc_rademacher_linear, nn_mixup_upper_bound, nn_reduction_bound, nn_upper_bound, Center,
};
use mixrad::harness::{gap_vs_alpha, gen_gaussian, gen_gaussian_with_mean, sweep_fig1, sweep_fig2};
use mixrad::harness::{BlobSpec, Fig1Grid, Fig2Grid, TrainConfig};
use mixrad::mixup::{beta_moments, sample_lambda};
use mixrad::seed::{derive_seed, rng_from};
use mixrad::stats::spearman;
use mixrad::{DataMatrix, ExpFamily, FamilyKind, LinearClass, MixWeight, MixupPolicy, NetworkClass};

type Criterion = (&'static str, Duration, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn report(line: &str) {
    let mut err = std::io::stderr().lock();
    writeln!(err, "{line}").unwrap();
}

fn unit(seed: u64, k: u64) -> f64 {
    (derive_seed(seed, k) >> 11) as f64 / (1u64 << 53) as f64
}

/// Random data for the bound identity suites: `n <= 100`, `d <= 20`, with a
/// random offset and spread.
fn random_instance(k: u64) -> (DataMatrix, MixWeight) {
    let s = derive_seed(0xACCE, k);
    let n = 1 + (derive_seed(s, 0) % 100) as usize;
    let d = 1 + (derive_seed(s, 1) % 20) as usize;
    let sigma2 = 10f64.powf(-3.0 + 5.0 * unit(s, 2));
    let mean: Vec<f64> = (0..d as u64).map(|j| 20.0 * (unit(s, 10 + j) - 0.5)).collect();
    let lam = MixWeight::new((k % 11) as f64 / 10.0).unwrap();
    (gen_gaussian_with_mean(n, sigma2, &mean, derive_seed(s, 3)).unwrap(), lam)
}

fn within_slack(diff: f64, bound: f64) -> bool {
    diff <= bound + 1e-10 * diff.abs().max(bound.abs()).max(f64::MIN_POSITIVE)
}

fn oracle_equivalence() -> Verdict {
    let cls = LinearClass::new(1.0).unwrap();
    let mut agree = 0;
    for k in 0..100u64 {
        let n = 1 + (derive_seed(1, k) % 12) as usize;
        let d = 1 + (derive_seed(2, k) % 5) as usize;
        let x = gen_gaussian(n, d, 1.0, derive_seed(3, k)).unwrap();
        let exact = exact_rademacher_linear(&x, &cls).unwrap();
        let mc = mc_rademacher_linear(&x, &cls, 20_000, derive_seed(4, k)).unwrap();
        if (mc.mean - exact).abs() <= 4.0 * mc.std_err {
            agree += 1;
        }
    }
    verdict(agree >= 99, format!("{agree}/100 within 4 std_err"))
}

fn linear_identity() -> Verdict {
    let cls = LinearClass::new(1.0).unwrap();
    let violations = (0..1000)
        .filter(|&k| {
            let (x, lam) = random_instance(k);
            let diff = linear_upper_bound(&x, &cls).value - linear_mixup_upper_bound(&x, &cls, lam).value;
            !within_slack(diff, linear_reduction_bound(&x, &cls, lam).value)
        })
        .count();
    verdict(violations == 0, format!("{violations} violations in 1000"))
}

fn network_identity() -> Verdict {
    let cls = NetworkClass::new(3, 1.0).unwrap();
    let violations = (0..1000)
        .filter(|&k| {
            let (x, lam) = random_instance(k);
            let diff = nn_upper_bound(&x, &cls).value - nn_mixup_upper_bound(&x, &cls, lam).value;
            let red = nn_reduction_bound(&x, &cls, lam, &Center::SampleMean).unwrap().value;
            !within_slack(diff, red)
        })
        .count();
    verdict(violations == 0, format!("{violations} violations in 1000"))
}

fn fig1_shape() -> Verdict {
    let ns = [50, 200, 800];
    let sigmas = [0.5, 2.0, 8.0];
    let grid = Fig1Grid {
        n_values: ns.to_vec(),
        sigma2_values: sigmas.to_vec(),
        repeats: 50,
        d: 1,
        mean: 1.0,
        mc_draws: 0,
    };
    let rows =
        sweep_fig1(&grid, &LinearClass::new(1.0).unwrap(), MixWeight::new(0.5).unwrap(), 2024).unwrap();
    let cell = |n: usize, s: f64| rows.iter().find(|r| r.n == n && r.sigma2 == s).unwrap().bound_diff_mean;
    let mut ratios = Vec::new();
    for s in sigmas {
        for w in ns.windows(2) {
            ratios.push(cell(w[0], s) / cell(w[1], s));
        }
    }
    let rhos: Vec<f64> = ns.iter().map(|&n| spearman(&sigmas, &sigmas.map(|s| cell(n, s)))).collect();
    let pass = ratios.iter().all(|r| (1.8..=2.2).contains(r)) && rhos.iter().all(|&r| r > 0.9);
    verdict(pass, format!("n-to-4n ratios {ratios:.3?}, rho per n {rhos:?}"))
}

fn fig2_shape() -> Verdict {
    let net = NetworkClass::new(2, 1.5).unwrap();
    let lam = MixWeight::new(0.3).unwrap();
    let grid = Fig2Grid {
        n_values: vec![25, 100],
        eps_values: vec![1.5, 3.0],
        repeats: 1,
        d: 3,
        n_outliers: 1,
        mu: 0.0,
    };
    let rows = sweep_fig2(&grid, &net, lam, 7).unwrap();
    let red = |n: usize, e: f64| rows.iter().find(|r| r.n == n && r.eps == e).unwrap().nn_reduction;
    let doubles = red(25, 3.0) == 2.0 * red(25, 1.5) && red(100, 3.0) == 2.0 * red(100, 1.5);
    let sweep_halves = (red(25, 1.5) / red(100, 1.5) - 2.0).abs() <= 1e-12;

    // Identical noise draws at 4n: the same sample repeated four times.
    let (x, center) = mixrad::harness::gen_outliers(25, 3, 1.5, 1, 7).unwrap();
    let center = Center::Given(center);
    let base = nn_reduction_bound(&x, &net, lam, &center).unwrap().value;
    let tiled = nn_reduction_bound(&x.tile(4).unwrap(), &net, lam, &center).unwrap().value;
    let exact_halves = base == 2.0 * tiled;
    verdict(
        doubles && sweep_halves && exact_halves,
        format!("eps doubling exact: {doubles}, n quadrupling halves: {exact_halves} (same draws), {sweep_halves} (sweep)"),
    )
}

fn smoothing_verification() -> Verdict {
    let thetas = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let lams = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut failures = Vec::new();
    for kind in FamilyKind::ALL {
        for (i, &theta) in thetas.iter().enumerate() {
            let f = ExpFamily::new(kind, theta).unwrap();
            for (j, &lam) in lams.iter().enumerate() {
                let seed = derive_seed(6, (i * 5 + j) as u64);
                let r = mixup_smoothing(&f, MixWeight::new(lam).unwrap(), 100_000, seed).unwrap();
                if (r.ratio - lam * lam).abs() > 5.0 * r.mc_std_err / r.hess_original {
                    failures.push(format!("{kind} theta={theta} lam={lam} ratio={}", r.ratio));
                }
            }
            let m = mc_moments(&f, 100_000, derive_seed(7, i as u64)).unwrap();
            if (m.mean - f.grad_psi()).abs() > 4.0 * m.mean_std_err {
                failures.push(format!("{kind} theta={theta} mean"));
            }
            if (m.variance - f.hess_psi()).abs() > 4.0 * m.variance_std_err {
                failures.push(format!("{kind} theta={theta} variance"));
            }
            let coarse = finite_diff_check(&f, 0.02).unwrap();
            let fine = finite_diff_check(&f, 0.01).unwrap();
            if kind == FamilyKind::GaussianUnitVar {
                // psi is quadratic: central differences are exact up to rounding.
                if fine.grad_err > 1e-9 || fine.hess_err > 1e-6 {
                    failures.push(format!("{kind} theta={theta} fd"));
                }
                continue;
            }
            // Halving h must quarter the error. An error already at the
            // rounding floor counts as converged: at theta = 0 the Bernoulli
            // psi is theta / 2 plus an even function, so the centered
            // gradient stencil is exact there.
            let band = 4.0 / 1.5..=4.0 * 1.5;
            let quarters = |c: f64, f: f64| c <= 1e-12 || band.contains(&(c / f));
            let (g, h) = (coarse.grad_err / fine.grad_err, coarse.hess_err / fine.hess_err);
            if !quarters(coarse.grad_err, fine.grad_err) || !quarters(coarse.hess_err, fine.hess_err) {
                failures.push(format!("{kind} theta={theta} fd ratios {g:.2}/{h:.2}"));
            }
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() { "75 ratio, 15 moment, 15 fd checks".into() } else { failures.join("; ") },
    )
}

fn beta_moment_check() -> Verdict {
    let mut worst: f64 = 0.0;
    for (k, alpha) in [0.1, 0.5, 1.0, 4.0].into_iter().enumerate() {
        let policy = MixupPolicy::beta(alpha).unwrap();
        let mut rng = rng_from(derive_seed(8, k as u64));
        let draws: Vec<f64> = (0..100_000).map(|_| sample_lambda(&policy, &mut rng)).collect();
        let m = sample_moments(&draws);
        let target = beta_moments(alpha).unwrap();
        worst = worst
            .max((m.mean - target.mean).abs() / m.mean_std_err)
            .max((m.variance - target.variance).abs() / m.variance_std_err);
    }
    verdict(worst <= 4.0, format!("largest deviation {worst:.2} std_err"))
}

fn gap_trend() -> Verdict {
    let alphas = [0.1, 0.2, 0.4, 0.8, 1.0, 2.0, 4.0];
    let seeds: Vec<u64> = (0..10).collect();
    let sweep = gap_vs_alpha(&BlobSpec::default(), &alphas, &seeds, &TrainConfig::standard(0)).unwrap();
    let gaps: Vec<f64> = sweep.summary.iter().map(|s| s.mean_gap).collect();
    let rho = spearman(&alphas, &gaps);
    let (lo, hi) = (gaps[0], gaps[gaps.len() - 1]);
    verdict(
        rho > 0.5 && lo < hi && sweep.failures.is_empty(),
        format!("rho = {rho:.3}, gap(0.1) = {lo:.4}, gap(4.0) = {hi:.4}, mean gaps {gaps:.4?}"),
    )
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn reproducibility() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let data = root.join("points.csv");
    std::fs::write(&data, "f0,f1,label\n1,0,1\n0,1,-1\n0.5,2,1\n-1,0.3,-1\n").unwrap();
    let data = data.to_str().unwrap();
    let configs = [
        (
            "fig1.json",
            r#"{"grid": {"n_values": [20, 80], "sigma2_values": [0.5, 4], "repeats": 4, "mc_draws": 3000}, "lam": 0.5, "seed": 3}"#,
        ),
        (
            "fig2.json",
            r#"{"grid": {"n_values": [10, 40], "eps_values": [1, 2], "repeats": 3, "n_outliers": 2}, "depth": 2, "frob": 1, "lam": 0.25, "seed": 4}"#,
        ),
        (
            "gap.json",
            r#"{"alphas": [0.2, 2], "n_seeds": 3, "epochs": 60, "model": {"kind": "mlp", "hidden_width": 8, "depth": 1}, "seed": 5}"#,
        ),
    ];
    for (name, body) in configs {
        std::fs::write(root.join(name), body).unwrap();
    }
    let cfg = |name: &str| root.join(name).to_str().unwrap().to_string();
    let commands: Vec<Vec<String>> = [
        vec![
            "radbound", "linear", "--gen-n", "15", "--gen-d", "3", "--lam", "0.4", "--draws", "5000",
            "--exact", "--seed", "1",
        ],
        vec!["radbound", "linear", "--data", data, "--lam", "0.7", "--draws", "4000", "--seed", "2"],
        vec![
            "radbound", "nn", "--gen-n", "50", "--gen-d", "4", "--depth", "3", "--frob", "2", "--lam", "0.5",
            "--seed", "3",
        ],
        vec![
            "radbound", "nn", "--data", data, "--depth", "1", "--frob", "1", "--lam", "0.2", "--center",
            "0,0",
        ],
        vec!["radbound", "gap", "--rad", "0.3", "--n", "100", "--delta", "0.05", "--variant", "empirical"],
        vec![
            "bregman", "--family", "poisson", "--theta", "0.5", "--lam", "0.5", "--draws", "20000", "--seed",
            "6",
        ],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .chain(
        ["fig1", "fig2", "gap-alpha"]
            .into_iter()
            .zip(["fig1.json", "fig2.json", "gap.json"])
            .map(|(s, c)| vec!["sweep".to_string(), s.to_string(), "--config".to_string(), cfg(c)]),
    )
    .collect();

    let mut failures = Vec::new();
    for (k, cmd) in commands.iter().enumerate() {
        let label = cmd[..2].join(" ");
        let first = root.join(format!("run{k}"));
        let second = root.join(format!("run{k}-jobs"));
        let replayed = root.join(format!("run{k}-replay"));
        let run = |out: &Path, jobs: &str| {
            let mut args: Vec<&str> = cmd.iter().map(String::as_str).collect();
            args.extend(["--out", out.to_str().unwrap(), "--jobs", jobs]);
            run_cli(&args)
        };
        let a = run(&first, "1");
        let b = run(&second, "4");
        let manifest = first.join("manifest.json");
        let c = run_cli(&[
            "replay",
            "--manifest",
            manifest.to_str().unwrap(),
            "--out",
            replayed.to_str().unwrap(),
            "--jobs",
            "3",
        ]);
        if !(a.status.success() && b.status.success() && c.status.success()) {
            failures.push(format!("{label}: exit {:?}", (a.status.code(), b.status.code(), c.status.code())));
            continue;
        }
        let reference = dir_bytes(&first);
        if reference.len() < 2 || dir_bytes(&second) != reference || dir_bytes(&replayed) != reference {
            failures.push(format!("{label}: outputs differ"));
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} commands byte-identical across --jobs and replay", commands.len())
        } else {
            failures.join("; ")
        },
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 9] = [
        ("1 oracle equivalence", Duration::from_secs(60), oracle_equivalence),
        ("2 linear reduction identity", Duration::from_secs(10), linear_identity),
        ("3 network reduction identity", Duration::from_secs(10), network_identity),
        ("4 linear sweep shape", Duration::from_secs(120), fig1_shape),
        ("5 network sweep shape", Duration::from_secs(1), fig2_shape),
        ("6 exponential-family smoothing", Duration::from_secs(120), smoothing_verification),
        ("7 Beta moments", Duration::from_secs(10), beta_moment_check),
        ("8 gap vs alpha trend", Duration::from_secs(600), gap_trend),
        ("9 CLI reproducibility", Duration::MAX, reproducibility),
    ];
    let mut failed = Vec::new();
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let v = check();
        let took = start.elapsed();
        let in_time = took <= limit;
        let pass = v.pass && in_time;
        let timing = if limit == Duration::MAX {
            format!("{:.2}s", took.as_secs_f64())
        } else {
            format!("{:.2}s / {}s", took.as_secs_f64(), limit.as_secs())
        };
        report(&format!("[{}] {name}: {} ({timing})", if pass { "PASS" } else { "FAIL" }, v.detail));
        if !pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
