use std::path::PathBuf;
use std::process::ExitCode;

use adl_core::confidence::TieBreakPolicy;
use adl_core::eval::EvalGrid;
use adl_core::pipeline::{
    self, build_backend, cmd_eval, cmd_prepare, cmd_run, cmd_stats, cmd_sweep, BackendKind, EvalOptions, PipelineError,
    RunConfig, SweepAxis,
};
use adl_core::time::MICROS_PER_SECOND;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Zero-shot activity recognition on smart-home sensor logs.
#[derive(Parser, Debug)]
#[command(name = "adlrec", version)]
struct Cli {
    /// Log filter, e.g. `info` or `adl_core=debug`.
    #[arg(long, global = true, default_value = "info")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a raw log into clean events, a ground-truth timeline and a test split.
    Prepare {
        #[command(flatten)]
        run: RunFlags,
        /// Raw CASAS log.
        #[arg(long)]
        raw: Option<PathBuf>,
        #[arg(long)]
        inventory: Option<PathBuf>,
        /// First test day (YYYY-MM-DD); default is the last days of the log.
        #[arg(long)]
        test_start: Option<chrono::NaiveDate>,
        #[arg(long)]
        test_days: Option<u32>,
    },
    /// Recognize activities over every test window.
    Run {
        #[command(flatten)]
        run: RunFlags,
        /// Also write evaluation reports.
        #[arg(long)]
        eval: bool,
    },
    /// Score a predictions file against a ground-truth timeline.
    Eval(EvalFlags),
    /// Repeat runs over a range of k, N or confidence thresholds.
    Sweep {
        #[command(flatten)]
        run: RunFlags,
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Window timespan distribution for several k.
    Stats {
        #[arg(long, short)]
        config: Option<PathBuf>,
        /// Events CSV; defaults to the prepared events of the configuration.
        #[arg(long)]
        events: Option<PathBuf>,
        #[arg(long = "k", value_delimiter = ',', default_value = "5,10,20,30,50")]
        k_values: Vec<usize>,
        /// Output CSV; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Axis {
    K,
    Th,
    N,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BackendArg {
    Http,
    Scripted,
}

/// Overrides applied on top of the configuration file.
#[derive(Args, Debug)]
struct RunFlags {
    /// TOML run configuration.
    #[arg(long, short)]
    config: PathBuf,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    /// Repetitions per window.
    #[arg(long = "repetitions", short = 'n')]
    repetitions: Option<usize>,
    #[arg(long)]
    temperature: Option<f64>,
    /// Windows processed concurrently.
    #[arg(long)]
    parallelism: Option<usize>,
    /// Recognize only the first N windows.
    #[arg(long)]
    max_windows: Option<usize>,
    /// Seed for random tie-breaking; selects the seeded-random policy.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Scripted backend responses (JSON).
    #[arg(long)]
    script: Option<PathBuf>,
    /// Scripted answer for prompts the script does not cover.
    #[arg(long)]
    default_label: Option<String>,
    #[arg(long)]
    prompt_template: Option<PathBuf>,
}

impl RunFlags {
    fn load(&self) -> Result<RunConfig, PipelineError> {
        let mut c = RunConfig::load(&self.config)?;
        if let Some(v) = &self.output_dir {
            c.output_dir = v.clone();
        }
        if let Some(v) = self.k {
            c.segmentation.k = v;
        }
        if let Some(v) = self.s {
            c.segmentation.s = v;
        }
        if let Some(v) = self.repetitions {
            c.recognition.repetitions = v;
        }
        if let Some(v) = self.temperature {
            c.backend.http.temperature = v;
        }
        if let Some(v) = self.parallelism {
            c.recognition.parallelism = v;
        }
        if let Some(v) = self.max_windows {
            c.recognition.max_windows = Some(v);
        }
        if let Some(seed) = self.seed {
            c.recognition.tie_break = TieBreakPolicy::SeededRandom { seed };
        }
        if let Some(v) = &self.cache {
            c.recognition.cache = Some(v.clone());
        }
        if let Some(b) = self.backend {
            c.backend.kind = match b {
                BackendArg::Http => BackendKind::Http,
                BackendArg::Scripted => BackendKind::Scripted,
            };
        }
        if let Some(v) = &self.endpoint {
            c.backend.http.endpoint = v.clone();
        }
        if let Some(v) = &self.model {
            c.backend.http.model = v.clone();
        }
        if let Some(v) = &self.script {
            c.backend.script = Some(v.clone());
        }
        if let Some(v) = &self.default_label {
            c.backend.default_label = Some(v.clone());
        }
        if let Some(v) = &self.prompt_template {
            c.recognition.prompt_template = Some(v.clone());
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args, Debug)]
struct EvalFlags {
    /// Run configuration supplying default paths and label order.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Ground-truth timeline CSV (start,end,label).
    #[arg(long)]
    timeline: Option<PathBuf>,
    /// Report directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.66,0.8,1")]
    thresholds: Vec<f64>,
    /// Scoring interval length in seconds.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
}

fn eval_options(flags: &EvalFlags) -> Result<EvalOptions, PipelineError> {
    let mut options = match &flags.config {
        Some(path) => EvalOptions::for_run(&RunConfig::load(path)?),
        None => EvalOptions {
            predictions: PathBuf::new(),
            timeline: PathBuf::new(),
            out_dir: PathBuf::from("report"),
            thresholds: Vec::new(),
            delta_micros: EvalGrid::default().delta_micros,
            label_order: Vec::new(),
        },
    };
    let missing = |what: &str| PipelineError::Config(format!("--{what} is required without --config"));
    if let Some(p) = &flags.predictions {
        options.predictions = p.clone();
    } else if flags.config.is_none() {
        return Err(missing("predictions"));
    }
    if let Some(p) = &flags.timeline {
        options.timeline = p.clone();
    } else if flags.config.is_none() {
        return Err(missing("timeline"));
    }
    if let Some(p) = &flags.out {
        options.out_dir = p.clone();
    }
    options.thresholds = flags.thresholds.clone();
    if !(flags.delta.is_finite() && flags.delta > 0.0) {
        return Err(PipelineError::Config(format!("--delta {} must be positive", flags.delta)));
    }
    options.delta_micros = (flags.delta * MICROS_PER_SECOND as f64).round() as i64;
    Ok(options)
}

fn print_eval(outputs: &pipeline::EvalOutputs, dir: &std::path::Path) {
    let r = &outputs.report;
    println!("weighted F1 {:.4}  accuracy {:.4}", r.weighted_f1, r.accuracy);
    println!("evaluated {} s, excluded {} s", r.evaluated_seconds, r.excluded_seconds);
    for row in &outputs.thresholds.rows {
        let f1 = row.weighted_f1().map_or_else(|| "n/a".to_string(), |f| format!("{f:.4}"));
        println!("  th {:<5} F1 {f1}  discarded {:.2}%", row.threshold, row.discarded_pct());
    }
    println!("reports in {}", dir.display());
}

fn execute(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Prepare {
            run,
            raw,
            inventory,
            test_start,
            test_days,
        } => {
            let mut config = run.load()?;
            if raw.is_some() {
                config.dataset.raw = raw;
            }
            if inventory.is_some() {
                config.dataset.inventory = inventory;
            }
            if test_start.is_some() {
                config.test.start = test_start;
            }
            if let Some(d) = test_days {
                config.test.days = d;
            }
            let s = cmd_prepare(&config)?;
            println!(
                "{} records ({} unreadable lines), {} events, {} values without a rule, {} repeats dropped",
                s.records, s.line_errors, s.events, s.skipped_values, s.repeats
            );
            println!("{} sensors:", s.sensors.len());
            for (sensor, n) in &s.sensors {
                println!("  {sensor:<10} {n}");
            }
            println!("{} activities:", s.activities.len());
            for (label, secs) in &s.activities {
                println!("  {label:<24} {:.1} h", secs / 3600.0);
            }
            println!(
                "test span {} .. {} ({} events, {} train events)",
                s.split.test_span.start, s.split.test_span.end, s.split.test_events, s.split.train_events
            );
            println!("prepared data in {}", config.prepared_dir().display());
        }
        Command::Run { run, eval } => {
            let config = run.load()?;
            let out = cmd_run(&config)?;
            let m = &out.manifest;
            println!(
                "{} windows x {} repetitions: {} valid, {} invalid label, {} parse failure, {} transport failure",
                m.windows,
                m.repetitions,
                m.outcomes.valid,
                m.outcomes.invalid_label,
                m.outcomes.parse_failure,
                m.outcomes.transport_failure
            );
            println!(
                "{} backend calls, {} cache hits, {} ties broken, {:.1} s",
                m.backend_calls, m.cache_hits, m.tie_broken, m.wall_clock_seconds
            );
            for w in &m.warnings {
                println!("warning: {w}");
            }
            println!("predictions in {}", config.predictions_path().display());
            if eval {
                let options = EvalOptions::for_run(&config);
                let outputs = cmd_eval(&options)?;
                print_eval(&outputs, &options.out_dir);
            }
        }
        Command::Eval(flags) => {
            let options = eval_options(&flags)?;
            let outputs = cmd_eval(&options)?;
            print_eval(&outputs, &options.out_dir);
        }
        Command::Sweep { run, axis, values } => {
            let config = run.load()?;
            let backend = build_backend(&config)?;
            let axis = match axis {
                Axis::K => SweepAxis::K,
                Axis::Th => SweepAxis::Threshold,
                Axis::N => SweepAxis::Repetitions,
            };
            let rows = cmd_sweep(&config, backend.as_ref(), axis, &values)?;
            let mut out = std::io::stdout().lock();
            pipeline::write_sweep_csv(&mut out, axis, &rows).map_err(|e| PipelineError::Io {
                path: "<stdout>".into(),
                source: std::io::Error::other(e),
            })?;
        }
        Command::Stats {
            config,
            events,
            k_values,
            out,
        } => {
            let events = match (events, config) {
                (Some(e), _) => e,
                (None, Some(c)) => RunConfig::load(&c)?.prepared_dir().join("events.csv"),
                (None, None) => return Err(PipelineError::Config("--events or --config is required".into())),
            };
            match out {
                Some(path) => {
                    let mut buf = Vec::new();
                    cmd_stats(&events, &k_values, &mut buf)?;
                    adl_core::records::write_atomic(&path, &buf)?;
                }
                None => {
                    cmd_stats(&events, &k_values, &mut std::io::stdout().lock())?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_new(&cli.log).unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .with_target(false)
        .init();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
