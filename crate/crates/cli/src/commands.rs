use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use ris_forge::channel::{effective_channel, RisConfig, Scene};
use ris_forge::linksim::{
    normalize_scene, run_kappa_experiment, run_ser_experiment, ExperimentConfig, Scenario,
};
use ris_forge::metrics::{condition_number, spectral_entropy};
use ris_forge::optimizer::{initial_phases, maximize_spectral_entropy_from, quantize_phases, OptOptions, Termination};
use ris_forge::pathloss::{classify_regime, near_field_boundary, pathloss_reflected, pathloss_scattered, ratio_db};
use ris_forge::rng::{derive_seed, stream, tag};
use serde::Serialize;

use crate::args::{KappaArgs, OptimizeArgs, PathlossArgs, SceneArgs, SerArgs};
use crate::manifest::{write_json, RunManifest, RunPlan};

pub const KAPPA_FILE: &str = "kappa.csv";
pub const SER_FILE: &str = "ser.csv";
pub const OPTIMIZE_FILE: &str = "optimize.json";
pub const KAPPA_HEADER: [&str; 6] = ["realization", "kappa_before", "kappa_after", "se_before", "se_after", "iters"];
pub const SER_HEADER: [&str; 6] = ["scenario", "detector", "snr_db", "ser", "trials", "ci_halfwidth"];

/// Error raised by a command: bad input (exit 2) or a failed run (exit 1).
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn base_config(scene: &SceneArgs, realizations: u64, threads: u64) -> ExperimentConfig {
    ExperimentConfig {
        m: scene.m as usize,
        n: scene.n as usize,
        l: scene.l as usize,
        rho: scene.rho,
        channel_realizations: realizations as usize,
        quantize_bits: scene.quantize_bits,
        max_iterations: scene.max_iterations as usize,
        se_tolerance: scene.se_tolerance,
        seed: scene.seed,
        threads: threads as usize,
        ..ExperimentConfig::default()
    }
}

pub fn kappa_config(args: &KappaArgs) -> ExperimentConfig {
    ExperimentConfig {
        snr_db: Vec::new(),
        ..base_config(&args.scene, args.realizations, args.threads)
    }
}

pub fn ser_config(args: &SerArgs) -> ExperimentConfig {
    let scenarios = match (args.baseline, args.assisted) {
        (true, false) => vec![Scenario::Baseline],
        (false, true) => vec![Scenario::Assisted],
        _ => vec![Scenario::Baseline, Scenario::Assisted],
    };
    let mut detectors: Vec<_> = args.detectors.iter().map(|&d| d.into()).collect();
    detectors.dedup();
    ExperimentConfig {
        snr_db: args.snr_db.points(),
        trials_per_point: args.trials as usize,
        detectors,
        scenarios,
        optimize_ris: !args.no_optimize,
        channel: args.channel.into(),
        ..base_config(&args.scene, args.realizations, args.threads)
    }
}

fn validated(config: ExperimentConfig) -> Result<ExperimentConfig, Failure> {
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(config)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))
}

/// Hand-rolled float formatting so that the bytes never depend on the csv
/// crate's float printer: shortest round-trip, `inf` for infinity.
fn num(v: f64) -> String {
    format!("{v}")
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

/// Runs a recorded experiment and writes its data files and manifest into `dir`.
pub fn execute(run: &RunPlan, dir: &Path, stdout: &mut dyn Write) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let started = Instant::now();
    let outputs = match run {
        RunPlan::KappaHist(args) => kappa_hist(args, dir, stdout)?,
        RunPlan::SerCurve(args) => ser_curve(args, dir, stdout)?,
        RunPlan::Optimize(args) => optimize(args, dir, stdout)?,
    };
    let mut files: Vec<String> = outputs.iter().map(|s| s.to_string()).collect();
    files.push(crate::manifest::MANIFEST_FILE.to_string());
    RunManifest::new(run.clone(), started.elapsed().as_secs_f64(), files).write(dir)?;
    Ok(())
}

fn kappa_hist(args: &KappaArgs, dir: &Path, stdout: &mut dyn Write) -> Result<Vec<&'static str>, Failure> {
    let config = validated(kappa_config(args))?;
    let samples = run_kappa_experiment::<f64>(&config).context("condition-number experiment")?;
    let path = dir.join(KAPPA_FILE);
    let mut w = csv_writer(&path)?;
    w.write_record(KAPPA_HEADER).context("writing header")?;
    for s in &samples {
        w.write_record([
            s.realization.to_string(),
            num(s.kappa_before),
            num(s.kappa_after),
            num(s.se_before),
            num(s.se_after),
            s.iterations.to_string(),
        ])
        .context("writing row")?;
    }
    w.flush()?;

    let converged = samples.iter().filter(|s| s.converged).count();
    let mut before: Vec<f64> = samples.iter().map(|s| s.kappa_before).collect();
    let mut after: Vec<f64> = samples.iter().map(|s| s.kappa_after).collect();
    writeln!(stdout, "wrote {} ({} rows)", path.display(), samples.len())?;
    writeln!(stdout, "converged: {converged}/{}", samples.len())?;
    writeln!(
        stdout,
        "median kappa: {:.4} before, {:.4} after",
        median(&mut before),
        median(&mut after)
    )?;
    Ok(vec![KAPPA_FILE])
}

fn ser_curve(args: &SerArgs, dir: &Path, stdout: &mut dyn Write) -> Result<Vec<&'static str>, Failure> {
    let config = validated(ser_config(args))?;
    let report = run_ser_experiment::<f64>(&config).context("symbol-error-rate experiment")?;
    let path = dir.join(SER_FILE);
    let mut w = csv_writer(&path)?;
    w.write_record(SER_HEADER).context("writing header")?;
    let mut rows = 0;
    for c in &report.curves {
        for p in &c.points {
            w.write_record([
                c.scenario.label().to_string(),
                c.detector.label().to_string(),
                num(p.snr_db),
                num(p.ser),
                p.trials.to_string(),
                num(p.ci_halfwidth),
            ])
            .context("writing row")?;
            rows += 1;
        }
    }
    w.flush()?;
    writeln!(stdout, "wrote {} ({rows} rows)", path.display())?;
    if config.scenarios.contains(&Scenario::Assisted) && config.optimize_ris {
        writeln!(
            stdout,
            "assisted optimizer converged: {}/{}",
            report.assisted_converged, report.realizations
        )?;
    }
    Ok(vec![SER_FILE])
}

#[derive(Debug, Serialize)]
struct OptimizeReport {
    /// Reported phases, quantized when requested.
    phases: Vec<f64>,
    continuous_phases: Vec<f64>,
    quantize_bits: Option<u32>,
    se_trace: Vec<f64>,
    converged: bool,
    iterations: usize,
    termination: &'static str,
    /// `null` encodes an infinite condition number.
    kappa_before: Option<f64>,
    kappa_after: Option<f64>,
    se_final: f64,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// The scene solved by `optimize`: drawn from `(seed, OPTIMIZE, SCENE)` with
/// starting phases from `(seed, OPTIMIZE, INIT)`.
pub fn optimize_scene(scene: &SceneArgs) -> Result<(Scene<f64>, Vec<f64>)> {
    let mut rng = stream(scene.seed, &[tag::OPTIMIZE, tag::SCENE]);
    let s = normalize_scene(scene.m as usize, scene.n as usize, scene.l as usize, scene.rho, &mut rng)?;
    let start = initial_phases(scene.l as usize, derive_seed(scene.seed, &[tag::OPTIMIZE, tag::INIT]));
    Ok((s, start))
}

fn optimize(args: &OptimizeArgs, dir: &Path, stdout: &mut dyn Write) -> Result<Vec<&'static str>, Failure> {
    let (scene, start) = optimize_scene(&args.scene)?;
    let options = OptOptions {
        max_iterations: args.scene.max_iterations as usize,
        se_tolerance: args.scene.se_tolerance,
        ..OptOptions::default()
    };
    let res = maximize_spectral_entropy_from(&scene, &start, &options).context("optimization")?;
    let phases = match args.scene.quantize_bits {
        Some(b) => quantize_phases(&res.phases, b).context("quantization")?,
        None => res.phases.clone(),
    };
    let h0 = effective_channel(&scene, &RisConfig::with_phases(start).context("phases")?).context("channel")?;
    let h1 = effective_channel(&scene, &RisConfig::with_phases(phases.clone()).context("phases")?).context("channel")?;
    let report = OptimizeReport {
        phases,
        continuous_phases: res.phases.clone(),
        quantize_bits: args.scene.quantize_bits,
        se_trace: res.objective_trace.clone(),
        converged: res.converged,
        iterations: res.iterations,
        termination: match res.termination {
            Termination::BoundReached => "bound-reached",
            Termination::SmallGradient => "small-gradient",
            Termination::MaxIterations => "max-iterations",
            Termination::Stalled => "stalled",
        },
        kappa_before: finite(condition_number(&h0).context("kappa")?),
        kappa_after: finite(condition_number(&h1).context("kappa")?),
        se_final: spectral_entropy(&h1).context("entropy")?,
    };
    write_json(&dir.join(OPTIMIZE_FILE), &report)?;
    writeln!(stdout, "{}", serde_json::to_string_pretty(&report).context("serializing")?)?;
    Ok(vec![OPTIMIZE_FILE])
}

/// Plain decimal in a readable range, scientific notation outside it.
fn readable(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e6).contains(&a) {
        format!("{v:e}")
    } else {
        num(v)
    }
}

pub fn pathloss(args: &PathlossArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let usage = |e: ris_forge::Error| Failure::Usage(e.to_string());
    let reflected = pathloss_reflected(args.d_sr, args.d_rd, args.exponent).map_err(usage)?;
    let scattered = pathloss_scattered(args.d_sr, args.d_rd, args.exponent).map_err(usage)?;
    let mut rows = vec![
        ("d_sr [m]", readable(args.d_sr)),
        ("d_rd [m]", readable(args.d_rd)),
        ("exponent", num(args.exponent)),
        ("reflected (normalized)", readable(reflected)),
        ("scattered (normalized)", readable(scattered)),
        ("scattered/reflected [dB]", format!("{:.3}", ratio_db(scattered, reflected))),
    ];
    if let (Some(size), Some(freq)) = (args.ris_size, args.freq) {
        let boundary = near_field_boundary(size, freq).map_err(usage)?;
        let regime = classify_regime(size, freq, args.d_sr, args.d_rd).map_err(usage)?;
        rows.push(("near-field boundary [m]", format!("{boundary:.3}")));
        rows.push(("regime", regime.label().to_string()));
    }
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        writeln!(stdout, "{k:<width$}  {v}")?;
    }
    Ok(())
}
