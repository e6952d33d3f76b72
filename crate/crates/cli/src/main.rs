use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use qaml::config::{ExperimentConfig, SplitSizes};
use qaml::data::CLASSES;
use qaml::diagnostics::{rescaled_time_table, write_pr_csv};
use qaml::pipeline::{load_split, read_rows, write_reference_csv, write_rows_file, Pipeline, ResultRow, SweepPoint};
use qaml::{Error, ErrorClass, Result};

/// Quantum-annealer feature-map experiments.
#[derive(Debug, Parser)]
#[command(name = "qaml", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; overrides `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Stratified subsample of the train and test splits.
    #[arg(long, global = true, num_args = 2, value_names = ["N_TRAIN", "N_TEST"])]
    subsample: Option<Vec<usize>>,

    /// Worker threads for per-image evolution.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load and validate the dataset, fit the encoders, write class counts.
    Ingest,
    /// Accuracy over the annealing-time grid.
    SweepTime,
    /// Accuracy over the shot-count grid.
    SweepShots,
    /// Accuracy under Hamiltonian randomness.
    SweepNoise,
    /// Participation ratios over N and T, plus the rescaled-time table.
    AprScan,
    /// Distribution-matching error L(T) against reference distributions.
    LtScan,
    /// Linear classifier on the PCA features alone.
    Baseline,
    /// Summarise the sweep CSVs already in the output directory.
    Report,
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Config => 1,
        ErrorClass::Data => 2,
        ErrorClass::Numerical => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are configuration errors; help and version are not errors.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.class()))
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    if let Some(sub) = &cli.subsample {
        config.subsample = Some(SplitSizes { train: sub[0], test: sub[1] });
    }
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    let config = resolve_config(&cli)?;
    if let Some(n) = config.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let out = config.output_dir.clone();
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    if let Command::Report = cli.command {
        return report(&out);
    }
    config.validate()?;
    write_json(&out.join("config.json"), &config)?;
    match cli.command {
        Command::Ingest => ingest(config, &out),
        Command::SweepTime => sweep(config, &out, "sweep_time", Pipeline::time_points),
        Command::SweepShots => sweep(config, &out, "sweep_shots", Pipeline::shot_points),
        Command::SweepNoise => sweep(config, &out, "sweep_noise", Pipeline::noise_points),
        Command::AprScan => apr_scan(config, &out),
        Command::LtScan => lt_scan(config, &out),
        Command::Baseline => baseline(config, &out),
        Command::Report => unreachable!(),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

fn ingest(config: ExperimentConfig, out: &Path) -> Result<()> {
    let split = load_split(&config)?;
    let path = out.join("ingest.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["split", "label", "count"])?;
    for (name, set) in [("train", &split.train), ("test", &split.test)] {
        let mut counts = [0usize; CLASSES];
        set.labels.iter().for_each(|&l| counts[l] += 1);
        for (label, count) in counts.iter().enumerate() {
            w.write_record([name.to_string(), label.to_string(), count.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    println!(
        "{}: {} train / {} test images, {} pixels",
        config.dataset.name(),
        split.train.len(),
        split.test.len(),
        split.train.pixels
    );
    let mut pipeline = Pipeline::with_split(config.clone(), split)?;
    for &n in &config.n_qubits {
        let encoded = pipeline.encoded(n)?;
        let path = out.join(format!("encoder_N{n}.json"));
        encoded.encoder.save(&path)?;
        if encoded.encoder.pca.is_rank_deficient() {
            eprintln!("warning: PCA for N={n} is rank deficient");
        }
        println!("N={n}: PCA dimension {} -> {}", encoded.encoder.pca.input_dim(), encoded.encoder.pca.k());
    }
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn model_name(point: &SweepPoint) -> String {
    let shots = point.shots.map_or_else(|| "exact".to_string(), |m| m.to_string());
    let noise = point.noise.map_or(0.0, |n| n.amplitude);
    format!("N{}_g{}_T{}_M{}_a{}.json", point.n_qubits, point.gamma, point.anneal_time, shots, noise)
}

fn sweep(config: ExperimentConfig, out: &Path, name: &str, points: fn(&Pipeline) -> Vec<SweepPoint>) -> Result<()> {
    let save = config.save_params;
    let mut pipeline = Pipeline::new(config)?;
    let points = points(&pipeline);
    let model_dir = out.join("models").join(name);
    if save {
        fs::create_dir_all(&model_dir).map_err(|e| Error::io(&model_dir, e))?;
    }
    let mut save_error = None;
    let rows = pipeline.run_sweep_with(&points, |point, outcome| {
        if save && save_error.is_none() {
            if let Err(e) = outcome.model.save(model_dir.join(model_name(point))) {
                save_error = Some(e);
            }
        }
    });
    let path = out.join(format!("{name}.csv"));
    write_rows_file(&path, &rows)?;
    if let Some(e) = save_error {
        return Err(e);
    }
    print_rows(&rows);
    first_row_error(&rows)
}

fn baseline(config: ExperimentConfig, out: &Path) -> Result<()> {
    let sizes = config.n_qubits.clone();
    let mut pipeline = Pipeline::new(config.clone())?;
    let rows: Vec<ResultRow> = sizes.iter().map(|&n| pipeline.baseline_row(n)).collect();
    if config.save_params {
        for &n in &sizes {
            if let Some(model) = pipeline.baseline(n).ok().and_then(|b| b.first_model.clone()) {
                model.model.save(out.join(format!("baseline_N{n}.json")))?;
            }
        }
    }
    write_rows_file(out.join("baseline.csv"), &rows)?;
    print_rows(&rows);
    first_row_error(&rows)
}

/// A run whose every point failed is reported as the first failure.
fn first_row_error(rows: &[ResultRow]) -> Result<()> {
    let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} rows recorded errors", rows.len());
    }
    // Baseline rows only count when there is nothing else.
    let scored: Vec<&ResultRow> = match rows.iter().filter(|r| r.kind != "baseline").collect::<Vec<_>>() {
        qa if qa.is_empty() => rows.iter().collect(),
        qa => qa,
    };
    match scored.first() {
        Some(first) if scored.iter().all(|r| !r.error.is_empty()) => Err(Error::Recorded {
            class: first.error_class.unwrap_or(ErrorClass::Data),
            message: format!("every point failed; first: {}", first.error),
        }),
        _ => Ok(()),
    }
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4}"))
}

fn print_rows(rows: &[ResultRow]) {
    for r in rows {
        println!(
            "{:8} N={:<2} gamma={:<5} T={:<6} M={:<6} noise={:<4} test={} ± {} baseline={} apr={}{}",
            r.kind,
            r.n_qubits,
            r.gamma.map_or("-".into(), |g| g.to_string()),
            r.anneal_time.map_or("-".into(), |t| t.to_string()),
            if r.shots.is_empty() { "-" } else { &r.shots },
            r.noise_amplitude.map_or("-".into(), |a| a.to_string()),
            fmt(r.test_acc_mean),
            fmt(r.test_acc_std),
            fmt(r.baseline_test_acc),
            r.apr.map_or("-".into(), |a| format!("{a:.2}")),
            if r.error.is_empty() { String::new() } else { format!("  error: {}", r.error) }
        );
    }
}

#[derive(Serialize)]
struct Collapse {
    gamma: f64,
    alpha: f64,
    collapse_before: f64,
    collapse_after: f64,
}

fn apr_scan(config: ExperimentConfig, out: &Path) -> Result<()> {
    let gammas = config.gammas.clone();
    let alpha = config.apr_alpha;
    let mut pipeline = Pipeline::new(config)?;
    let mut reports = Vec::new();
    let mut collapse = Vec::new();
    let apr_path = out.join("apr.csv");
    let mut apr_csv = csv_writer(&apr_path)?;
    apr_csv.write_record(["N", "T", "gamma", "apr"])?;
    for gamma in gammas {
        let (curves, mut batch) = pipeline.apr_curves(gamma)?;
        pipeline.clear_cache();
        for c in &curves {
            for (t, a) in c.times.iter().zip(&c.aprs) {
                apr_csv.write_record([c.n_qubits.to_string(), t.to_string(), gamma.to_string(), a.to_string()])?;
                println!("N={:<2} T={t:<6} gamma={gamma:<5} APR={a:.3}", c.n_qubits);
            }
        }
        if curves.len() >= 2 {
            let table = rescaled_time_table(&curves, alpha)?;
            table.write_csv(create(&out.join(format!("apr_rescaled_g{gamma}.csv")))?)?;
            println!(
                "gamma={gamma}: collapse score {:.4} raw, {:.4} at T/2^({alpha}N)",
                table.collapse_before, table.collapse_after
            );
            collapse.push(Collapse {
                gamma,
                alpha,
                collapse_before: table.collapse_before,
                collapse_after: table.collapse_after,
            });
        }
        reports.append(&mut batch);
    }
    apr_csv.flush().map_err(|e| Error::io(&apr_path, e))?;
    write_pr_csv(create(&out.join("pr.csv"))?, &reports)?;
    write_json(&out.join("apr_collapse.json"), &collapse)
}

#[derive(Serialize)]
struct LtSummary {
    n_qubits: usize,
    gamma: f64,
    reference: String,
    reference_time: Option<f64>,
    best_time: f64,
    min_mean_l: f64,
}

fn lt_scan(config: ExperimentConfig, out: &Path) -> Result<()> {
    let n = config.n_qubits[0];
    let gamma = config.gammas[0];
    let lt = config.lt.clone();
    let mut pipeline = Pipeline::new(config)?;
    let reference = pipeline.reference_distributions(n, gamma)?;
    if lt.reference_path.is_none() {
        write_reference_csv(create(&out.join("lt_reference.csv"))?, &reference)?;
    }
    let scan = pipeline.lt_scan_against(&reference, n, gamma)?;
    scan.write_csv(create(&out.join("lt_scan.csv"))?)?;
    for (t, l) in scan.times.iter().zip(&scan.mean_error) {
        println!("T={t:<6} mean L={l:.6e}");
    }
    println!("T* = {}", scan.best_time);
    let summary = LtSummary {
        n_qubits: n,
        gamma,
        reference: lt
            .reference_path
            .as_ref()
            .map_or_else(|| "synthetic".to_string(), |p| p.display().to_string()),
        reference_time: lt.reference_path.is_none().then_some(lt.reference_time),
        best_time: scan.best_time,
        min_mean_l: scan.mean_error[scan.best_index],
    };
    write_json(&out.join("lt_scan.json"), &summary)
}

const SWEEP_FILES: [&str; 4] = ["baseline", "sweep_time", "sweep_shots", "sweep_noise"];

fn report(out: &Path) -> Result<()> {
    let mut found = false;
    let path = out.join("report.csv");
    let mut w = csv_writer(&path)?;
    w.write_record([
        "source",
        "n_qubits",
        "best_gamma",
        "best_T",
        "best_shots",
        "best_noise",
        "best_test_acc",
        "baseline_test_acc",
        "points",
        "errors",
    ])?;
    for name in SWEEP_FILES {
        let file = out.join(format!("{name}.csv"));
        if !file.exists() {
            continue;
        }
        found = true;
        let rows = read_rows(&file)?;
        let mut by_size: BTreeMap<usize, Vec<&ResultRow>> = BTreeMap::new();
        rows.iter().for_each(|r| by_size.entry(r.n_qubits).or_default().push(r));
        for (n, group) in by_size {
            let base = group
                .iter()
                .find(|r| r.kind == "baseline")
                .and_then(|r| r.test_acc_mean)
                .or_else(|| group.iter().find_map(|r| r.baseline_test_acc));
            let errors = group.iter().filter(|r| !r.error.is_empty()).count();
            let qa: Vec<&&ResultRow> = group.iter().filter(|r| r.kind == "qa" && r.test_acc_mean.is_some()).collect();
            // Earliest row wins ties so the summary does not depend on float noise.
            let best = qa.iter().fold(None::<&&ResultRow>, |acc, r| match acc {
                Some(b) if b.test_acc_mean >= r.test_acc_mean => Some(b),
                _ => Some(r),
            });
            let cell = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
            w.write_record([
                name.to_string(),
                n.to_string(),
                cell(best.and_then(|b| b.gamma)),
                cell(best.and_then(|b| b.anneal_time)),
                best.map_or(String::new(), |b| b.shots.clone()),
                cell(best.and_then(|b| b.noise_amplitude)),
                cell(best.and_then(|b| b.test_acc_mean)),
                cell(base),
                qa.len().to_string(),
                errors.to_string(),
            ])?;
            match best {
                Some(b) => println!(
                    "{name}: N={n} best test {} at gamma={} T={} M={} (baseline {})",
                    fmt(b.test_acc_mean),
                    cell(b.gamma),
                    cell(b.anneal_time),
                    b.shots,
                    fmt(base)
                ),
                None => println!("{name}: N={n} baseline {}", fmt(base)),
            }
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    if !found {
        return Err(Error::Validation(format!("no sweep CSVs found in {}", out.display())));
    }
    Ok(())
}
