//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints its verdict line even when all of them pass.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::Rng;
use ris_forge::channel::{
    assemble_dyadic, assemble_spatial, effective_channel, sample_rayleigh, sample_spatial_paths, ArrayGeometry,
    RisConfig, Scene,
};
use ris_forge::linalg::ComplexMatrix;
use ris_forge::linksim::{
    binomial_halfwidth, normalize_scene, run_kappa_experiment, run_ser_experiment, ChannelKind, Detector,
    ExperimentConfig, KappaSample, Scenario, SerReport,
};
use ris_forge::metrics::spectral_entropy;
use ris_forge::optimizer::{
    cophase_gain_max, initial_phases, maximize_spectral_entropy, quantize_phases, se_gradient,
    single_antenna_gain, GradientMode, OptOptions,
};
use ris_forge::pathloss::near_field_boundary;
use ris_forge::rng::{complex_gaussian, stream};
use ris_forge::Complex64 as C;
use statrs::function::erf::erfc;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get()).min(16)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn kappa_samples() -> Vec<KappaSample<f64>> {
    let cfg = ExperimentConfig {
        m: 4,
        n: 4,
        l: 100,
        rho: 0.5,
        channel_realizations: 10_000,
        seed: 20_240_601,
        threads: threads(),
        ..ExperimentConfig::default()
    };
    run_kappa_experiment(&cfg).expect("kappa experiment runs")
}

fn criterion_1(samples: &[KappaSample<f64>]) -> Verdict {
    let total = samples.len();
    let converged: Vec<&KappaSample<f64>> = samples.iter().filter(|s| s.converged).collect();
    let rate = converged.len() as f64 / total as f64;
    let worst = converged.iter().map(|s| s.kappa_after).fold(1.0, f64::max);
    let ratio = median(samples.iter().map(|s| s.kappa_before).collect())
        / median(samples.iter().map(|s| s.kappa_after).collect());
    verdict(
        rate >= 0.99 && worst <= 1.05 && ratio >= 5.0,
        format!(
            "converged {}/{total} ({:.2}%), max converged kappa {worst:.4}, median kappa ratio {ratio:.2}",
            converged.len(),
            100.0 * rate
        ),
    )
}

fn criterion_2(samples: &[KappaSample<f64>]) -> Verdict {
    let converged: Vec<usize> = samples.iter().filter(|s| s.converged).map(|s| s.iterations).collect();
    let fast = converged.iter().filter(|&&i| i <= 200).count();
    let share = fast as f64 / converged.len().max(1) as f64;
    let mut sorted = converged.clone();
    sorted.sort_unstable();
    let p99 = sorted.get(sorted.len() * 99 / 100).copied().unwrap_or(0);
    verdict(
        share >= 0.99,
        format!(
            "{:.2}% of converged runs within 200 iterations (median {}, p99 {p99}, max {})",
            100.0 * share,
            sorted.get(sorted.len() / 2).copied().unwrap_or(0),
            sorted.last().copied().unwrap_or(0)
        ),
    )
}

fn ser_report() -> SerReport {
    let cfg = ExperimentConfig {
        m: 4,
        n: 4,
        l: 100,
        rho: 0.5,
        snr_db: (0..=10).map(|k| 2.0 * k as f64).collect(),
        trials_per_point: 500,
        channel_realizations: 200,
        detectors: Detector::ALL.to_vec(),
        scenarios: vec![Scenario::Baseline, Scenario::Assisted],
        seed: 5_150,
        threads: threads(),
        ..ExperimentConfig::default()
    };
    run_ser_experiment::<f64>(&cfg).expect("SER experiment runs")
}

fn criterion_3(report: &SerReport) -> Verdict {
    let curve = |s, d| report.curve(s, d).expect("curve present");
    let zf_a = curve(Scenario::Assisted, Detector::Zf);
    let ml_b = curve(Scenario::Baseline, Detector::Ml);
    let mf_a = curve(Scenario::Assisted, Detector::MatchedFilter);
    let ml_a = curve(Scenario::Assisted, Detector::Ml);
    let joint = |a: f64, b: f64| 3.0 * (a * a + b * b).sqrt();
    let mut failures = Vec::new();
    let mut worst_b = 0.0f64;
    for i in 0..zf_a.points.len() {
        let (z, m) = (zf_a.points[i], ml_b.points[i]);
        if z.ser > m.ser + joint(z.ci_halfwidth, m.ci_halfwidth) {
            failures.push(format!("(a) at {} dB: {} > {}", z.snr_db, z.ser, m.ser));
        }
        let trio = [zf_a.points[i], mf_a.points[i], ml_a.points[i]];
        for (x, y) in [(0, 1), (0, 2), (1, 2)] {
            let (p, q) = (trio[x], trio[y]);
            let d = (p.ser - q.ser).abs();
            let tol = joint(p.ci_halfwidth, q.ci_halfwidth);
            if tol > 0.0 {
                worst_b = worst_b.max(d / tol);
            }
            if d > tol {
                failures.push(format!("(b) at {} dB: {} vs {}", p.snr_db, p.ser, q.ser));
            }
        }
    }
    let trials = zf_a.points[0].trials;
    let gap = |db: f64| {
        let i = zf_a.points.iter().position(|p| p.snr_db == db).unwrap();
        (ml_b.points[i].ser, zf_a.points[i].ser)
    };
    let (b10, a10) = gap(10.0);
    verdict(
        failures.is_empty(),
        format!(
            "{trials} vectors per point, 11 points; at 10 dB ML baseline {b10:.4} vs ZF assisted {a10:.4}; \
             worst assisted pair at {worst_b:.2} of the 3-half-width band{}{}",
            if failures.is_empty() { "" } else { "; " },
            failures.join("; ")
        ),
    )
}

fn criterion_4() -> Verdict {
    let cfg = ExperimentConfig {
        m: 1,
        n: 1,
        l: 1,
        rho: 0.0,
        snr_db: (0..=10).map(|k| 2.0 * k as f64).collect(),
        trials_per_point: 100_000,
        channel_realizations: 10,
        detectors: Detector::ALL.to_vec(),
        scenarios: vec![Scenario::Baseline],
        channel: ChannelKind::Awgn,
        seed: 404,
        threads: threads(),
        ..ExperimentConfig::default()
    };
    let report = run_ser_experiment::<f64>(&cfg).expect("AWGN run");
    let q = |x: f64| 0.5 * erfc(x / std::f64::consts::SQRT_2);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for c in &report.curves {
        for p in &c.points {
            let gamma_b = 10f64.powf(p.snr_db / 10.0) / 2.0;
            let want = 1.0 - (1.0 - q((2.0 * gamma_b).sqrt())).powi(2);
            let hw = binomial_halfwidth(want, p.trials);
            let dev = (p.ser - want).abs();
            if hw > 0.0 {
                worst = worst.max(dev / hw);
            }
            if dev > 3.0 * hw {
                failures.push(format!("{} at {} dB: {} vs {want}", c.detector, p.snr_db, p.ser));
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "3 detectors x 11 points x {} symbols, worst deviation {worst:.2} half-widths{}",
            report.curves[0].points[0].trials,
            failures.iter().map(|f| format!("; {f}")).collect::<String>()
        ),
    )
}

fn criterion_5() -> Verdict {
    let b = near_field_boundary(1.5_f64, 28e9).unwrap();
    let rel = (b - 420.0).abs() / 420.0;
    verdict(rel <= 0.01, format!("boundary {b:.3} m, {:.3}% from 420 m", 100.0 * rel))
}

fn criterion_6() -> Verdict {
    let mut rng = stream(66, &[]);
    let (mut checked, mut skipped, mut worst) = (0, 0, 0.0f64);
    while checked < 100 {
        let m = rng.random_range(1..=4);
        let n = rng.random_range(1..=4);
        let l = rng.random_range(1..=16);
        let scene: Scene<f64> = normalize_scene(m, n, l, 0.5, &mut rng).unwrap();
        let cfg = RisConfig::with_phases(initial_phases(l, rng.random())).unwrap();
        let s = effective_channel(&scene, &cfg).unwrap().singular_values();
        let min_gap = s.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
        if min_gap < 1e-3 * s[0] || s[s.len() - 1] < 1e-3 * s[0] {
            skipped += 1;
            continue;
        }
        let a = se_gradient(&scene, &cfg, GradientMode::Analytic).unwrap();
        let fd = se_gradient(&scene, &cfg, GradientMode::FiniteDifference { step: 1e-6 }).unwrap();
        let norm = fd.iter().map(|x| x * x).sum::<f64>().sqrt();
        let err = a.iter().zip(&fd).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        // one-stream channels have a constant zero entropy and a zero gradient
        let rel = if norm < 1e-12 { err } else { err / norm };
        worst = worst.max(rel);
        checked += 1;
    }
    verdict(
        worst <= 1e-5,
        format!("{checked} scenes ({skipped} near-degenerate draws skipped), worst relative error {worst:.2e}"),
    )
}

fn criterion_7() -> Verdict {
    let mut rng = stream(77, &[]);
    let (mut worst_d, mut worst_s) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let n = rng.random_range(1..=8);
        let m = rng.random_range(1..=8);
        let l = rng.random_range(1..=8);
        let f: ComplexMatrix<f64> = sample_rayleigh(n, l, &mut rng).unwrap();
        let g: ComplexMatrix<f64> = sample_rayleigh(l, m, &mut rng).unwrap();
        let amps: Vec<f64> = (0..l).map(|_| rng.random()).collect();
        let cfg = RisConfig::new(amps, initial_phases(l, rng.random())).unwrap();
        let c = cfg.coefficients();
        let h = assemble_dyadic(&f, &cfg, &g).unwrap();
        let oracle = ComplexMatrix::from_fn(n, m, |r, k| {
            (0..l).fold(C::new(0.0, 0.0), |acc, i| acc + f[(r, i)] * c[i] * g[(i, k)])
        })
        .unwrap();
        worst_d = worst_d.max(h.max_abs_diff(&oracle).unwrap() / oracle.max_abs().max(f64::MIN_POSITIVE));

        let paths = sample_spatial_paths(l, 1.0, &mut rng).unwrap();
        let tx: ArrayGeometry<f64> = ArrayGeometry::half_wavelength(m).unwrap();
        let rx = ArrayGeometry::half_wavelength(n).unwrap();
        let scene = Scene::spatial(ComplexMatrix::zeros(n, m).unwrap(), paths.clone(), tx, rx, 0.0, 1.0).unwrap();
        let (fs, gs) = scene.dyadic_factors().unwrap();
        let direct = assemble_spatial(&paths, &tx, &rx).unwrap();
        let unit = RisConfig::with_phases(vec![0.0; l]).unwrap();
        let factored = assemble_dyadic(&fs, &unit, &gs).unwrap();
        worst_s = worst_s.max(direct.max_abs_diff(&factored).unwrap() / direct.max_abs().max(f64::MIN_POSITIVE));
    }
    verdict(
        worst_d <= 1e-12 && worst_s <= 1e-12,
        format!("1000 instances, worst relative error dyadic {worst_d:.2e}, spatial {worst_s:.2e}"),
    )
}

fn criterion_8() -> Verdict {
    const K: usize = 1024;
    let step = std::f64::consts::TAU / K as f64;
    let phasors: Vec<C> = (0..K).map(|k| C::from_polar(1.0, -std::f64::consts::PI + k as f64 * step)).collect();
    let mut rng = stream(88, &[]);
    let (mut worst_closed, mut worst_grid, mut below_grid) = (0.0f64, 0.0f64, 0);
    for _ in 0..100 {
        let d: C = complex_gaussian(&mut rng, 1.0);
        let g: Vec<C> = (0..2).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let f: Vec<C> = (0..2).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let top = single_antenna_gain(d, &g, &f, &cophase_gain_max(d, &g, &f).unwrap());
        let paths = [f[0] * g[0], f[1] * g[1]];
        let closed = d.norm() + paths[0].norm() + paths[1].norm();
        worst_closed = worst_closed.max((top - closed).abs() / closed);
        let mut grid = 0.0f64;
        for a in &phasors {
            let partial = d + paths[0] * a;
            for b in &phasors {
                grid = grid.max((partial + paths[1] * b).norm_sqr());
            }
        }
        let grid = grid.sqrt();
        // each path is at most half a grid step from its optimal phase
        let resolution = (1.0 - (step / 2.0).cos()) * (paths[0].norm() + paths[1].norm());
        if top < grid - 1e-12 {
            below_grid += 1;
        }
        worst_grid = worst_grid.max((top - grid) / resolution.max(f64::MIN_POSITIVE));
    }
    verdict(
        worst_closed <= 1e-12 && below_grid == 0 && worst_grid <= 1.0 + 1e-9,
        format!(
            "100 instances, closed-form gap {worst_closed:.2e}, grid gap at most {worst_grid:.3} of the resolution bound, \
             {below_grid} instances below the grid"
        ),
    )
}

fn criterion_9() -> Verdict {
    let bits = [1u32, 2, 3, 4, 6, 8];
    let mut sums = vec![0.0; bits.len()];
    let (mut continuous, mut used) = (0.0, 0usize);
    for r in 0..500u64 {
        let scene: Scene<f64> = normalize_scene(4, 4, 100, 0.5, &mut stream(99, &[r])).unwrap();
        let res = maximize_spectral_entropy(&scene, &OptOptions::with_seed(r)).unwrap();
        if !res.converged {
            continue;
        }
        used += 1;
        continuous += res.final_se();
        for (k, &b) in bits.iter().enumerate() {
            let q = quantize_phases(&res.phases, b).unwrap();
            sums[k] += spectral_entropy(&effective_channel(&scene, &RisConfig::with_phases(q).unwrap()).unwrap()).unwrap();
        }
    }
    let means: Vec<f64> = sums.iter().map(|s| s / used as f64).collect();
    let continuous = continuous / used as f64;
    let monotone = means.windows(2).all(|w| w[1] >= w[0]);
    let recovery = means[bits.len() - 1] / continuous;
    verdict(
        monotone && recovery >= 0.995,
        format!(
            "{used} converged solutions; mean SE by bits {}: continuous {continuous:.5}, 8-bit recovery {:.4}%",
            bits.iter()
                .zip(&means)
                .map(|(b, m)| format!("{b}:{m:.5}"))
                .collect::<Vec<_>>()
                .join(" "),
            100.0 * recovery
        ),
    )
}

fn run_bin(args: &[&str], dir: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_ris-forge"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .env_remove("RIS_FORGE_OUT")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn criterion_10() -> Verdict {
    let kappa = ["kappa-hist", "--realizations", "200", "--seed", "10", "--threads", "1"];
    let ser = [
        "ser-curve", "--realizations", "10", "--trials", "200", "--snr-db", "0:20:2", "--detectors", "zf,mf,ml",
        "--seed", "10", "--threads", "1",
    ];
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        if !run_bin(&kappa, d.path()) || !run_bin(&ser, d.path()) {
            return verdict(false, "binary run failed");
        }
    }
    let same = |file: &str| {
        let a = std::fs::read(dirs[0].path().join(file)).unwrap();
        let b = std::fs::read(dirs[1].path().join(file)).unwrap();
        (a == b, a.len())
    };
    let (k, kn) = same("kappa.csv");
    let (s, sn) = same("ser.csv");
    verdict(k && s, format!("kappa.csv {kn} bytes identical: {k}; ser.csv {sn} bytes identical: {s}"))
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        // cargo test --list probes harness-less targets; nothing to enumerate
        return ExitCode::SUCCESS;
    }
    let started = Instant::now();
    let samples = kappa_samples();
    let report = ser_report();
    let checks: Vec<(usize, Box<dyn Fn() -> Verdict + '_>)> = vec![
        (1, Box::new(|| criterion_1(&samples))),
        (2, Box::new(|| criterion_2(&samples))),
        (3, Box::new(|| criterion_3(&report))),
        (4, Box::new(criterion_4)),
        (5, Box::new(criterion_5)),
        (6, Box::new(criterion_6)),
        (7, Box::new(criterion_7)),
        (8, Box::new(criterion_8)),
        (9, Box::new(criterion_9)),
        (10, Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (id, check) in checks {
        let v = check();
        failed += usize::from(!v.pass);
        println!("acceptance criterion {id:>2}: {} | {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!(
        "acceptance: {} of 10 passed in {:.1} s",
        10 - failed,
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
