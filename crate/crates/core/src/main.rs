use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use biteweight::config::PipelineConfig;
use biteweight::evaluation::{generate_synthetic_raw, SynthProfile};
use biteweight::experiment::{
    features_csv, load_sessions, preprocess_all, report_text, run_evaluate, run_report, Command, DataSource,
    RunConfig,
};
use biteweight::io::{read_json, write_imu_csv, write_json, write_raw_session, Manifest, ManifestSubject};
use biteweight::pipeline::{extract_features, BiteRow, Pipeline, TrainedModel};
use biteweight::Error;

#[derive(Parser)]
#[command(name = "biteweight", version, about = "Per-bite food weight estimation from wrist IMU data")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write the conditioned IMU stream of every session.
    Preprocess {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, env = "BITEWEIGHT_OUT", default_value = "biteweight-out")]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Emit per-bite features as CSV.
    Features {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "proposed")]
        pipeline: Pipeline,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Fit one model on every usable bite and save it as JSON.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "proposed")]
        pipeline: Pipeline,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Predict bite weights with a saved model.
    Predict {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Leave-one-subject-out evaluation against the mean-weight baseline.
    Evaluate(EvaluateArgs),
    /// Write a synthetic dataset (CSVs plus manifest.json).
    Synth {
        #[command(flatten)]
        synth: SynthArgs,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, env = "BITEWEIGHT_OUT", default_value = "biteweight-out")]
        out: PathBuf,
    },
    /// Combine the metrics files of a directory into one table.
    Report {
        #[arg(long, env = "BITEWEIGHT_OUT", default_value = "biteweight-out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, conflicts_with_all = ["synth", "from_run"])]
    manifest: Option<PathBuf>,
    /// Evaluate on generated data instead of a manifest.
    #[arg(long, conflicts_with = "from_run")]
    synth: bool,
    #[command(flatten)]
    synth_args: SynthArgs,
    /// Re-run exactly the configuration stored in a run.json.
    #[arg(long)]
    from_run: Option<PathBuf>,
    #[arg(long, default_value = "proposed")]
    pipeline: Pipeline,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output directory (overrides the one stored with --from-run).
    #[arg(long, env = "BITEWEIGHT_OUT")]
    out: Option<PathBuf>,
    /// Absolute-error histogram bin width in grams.
    #[arg(long, default_value_t = 1.0)]
    bin_width: f64,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    subjects: usize,
    /// Weight-to-behavior coupling of the generator.
    #[arg(long)]
    coupling: Option<f64>,
    /// Generator profile as JSON; flags override its fields.
    #[arg(long)]
    profile: Option<PathBuf>,
}

impl SynthArgs {
    fn resolve(&self) -> Result<SynthProfile, Failure> {
        let mut profile: SynthProfile = match &self.profile {
            Some(p) => read_json(&require_file(p)?)?,
            None => SynthProfile::default(),
        };
        if let Some(c) = self.coupling {
            profile.coupling = c;
        }
        Ok(profile)
    }
}

/// Overrides of the published constants.
#[derive(Args, Default)]
struct Overrides {
    /// Full pipeline configuration as JSON; the flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    svr_c: Option<f64>,
    #[arg(long)]
    svr_eps: Option<f64>,
    #[arg(long)]
    target_hz: Option<f64>,
    #[arg(long)]
    highpass_taps: Option<usize>,
    #[arg(long)]
    highpass_cutoff: Option<f64>,
    #[arg(long)]
    median_order: Option<usize>,
    #[arg(long)]
    p_strong: Option<f64>,
    #[arg(long)]
    p_weak: Option<f64>,
    #[arg(long)]
    max_gap_windows: Option<usize>,
    #[arg(long)]
    v_min: Option<f64>,
    #[arg(long)]
    v_max: Option<f64>,
    #[arg(long)]
    d_max_frames: Option<f64>,
    #[arg(long)]
    stat_window: Option<f64>,
    #[arg(long)]
    stat_step: Option<f64>,
    #[arg(long)]
    entropy_bins: Option<usize>,
    #[arg(long)]
    mirtchouk_window: Option<f64>,
    #[arg(long)]
    mirtchouk_step: Option<f64>,
    #[arg(long)]
    n_trees: Option<usize>,
}

impl Overrides {
    fn resolve(&self, seed: u64) -> Result<PipelineConfig, Failure> {
        let mut c: PipelineConfig = match &self.config {
            Some(p) => read_json(&require_file(p)?)?,
            None => PipelineConfig::default(),
        };
        c.forest.seed = seed;
        macro_rules! set {
            ($($flag:ident => $($field:ident).+;)*) => {
                $(if let Some(v) = self.$flag { c.$($field).+ = v; })*
            };
        }
        set! {
            svr_c => svr.c;
            svr_eps => svr.eps;
            target_hz => preprocess.target_hz;
            highpass_taps => preprocess.highpass_taps;
            highpass_cutoff => preprocess.highpass_cutoff_hz;
            median_order => preprocess.median_order;
            p_strong => behavioral.p_strong;
            p_weak => behavioral.p_weak;
            max_gap_windows => behavioral.max_gap_windows;
            v_min => behavioral.v_min;
            v_max => behavioral.v_max;
            d_max_frames => behavioral.d_max_frames;
            stat_window => statistical.window_s;
            stat_step => statistical.step_s;
            entropy_bins => statistical.entropy_bins;
            mirtchouk_window => mirtchouk.window_s;
            mirtchouk_step => mirtchouk.step_s;
            n_trees => forest.n_trees;
        }
        Ok(c)
    }
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn require_file(path: &Path) -> Result<PathBuf, Failure> {
    if path.is_file() {
        Ok(path.to_owned())
    } else {
        Err(Failure::Usage(format!("file not found: {}", path.display())))
    }
}

fn emit(out: Option<&Path>, body: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, body).map_err(|e| Error::Io {
            path: path.to_owned(),
            source: e,
        })?,
        None => {
            let _ = std::io::stdout().write_all(body.as_bytes());
        }
    }
    Ok(())
}

fn manifest_source(manifest: &Path) -> Result<DataSource, Failure> {
    Ok(DataSource::Manifest {
        path: require_file(manifest)?,
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Cmd::Preprocess {
            manifest,
            out,
            overrides,
        } => {
            let cfg = overrides.resolve(0)?;
            let sessions = load_sessions(&manifest_source(&manifest)?, 0)?;
            let processed = preprocess_all(&sessions, &cfg)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
            for s in &processed {
                let path = out.join(format!("{}_{}_imu.csv", s.subject_id, s.session_id));
                write_imu_csv(&path, s.imu.samples())?;
                println!("{}", path.display());
            }
        }
        Cmd::Features {
            manifest,
            pipeline,
            out,
            overrides,
        } => {
            if pipeline == Pipeline::Baseline {
                return Err(Failure::Usage("the baseline pipeline has no features".into()));
            }
            let cfg = overrides.resolve(0)?;
            let sessions = preprocess_all(&load_sessions(&manifest_source(&manifest)?, 0)?, &cfg)?;
            let table = extract_features(pipeline, &sessions, &cfg);
            for (key, why) in &table.skipped {
                log::warn!("skipped bite {key}: {why}");
            }
            emit(out.as_deref(), &features_csv(&table))?;
        }
        Cmd::Train {
            manifest,
            pipeline,
            model,
            seed,
            overrides,
        } => {
            let cfg = overrides.resolve(seed)?;
            let sessions = preprocess_all(&load_sessions(&manifest_source(&manifest)?, 0)?, &cfg)?;
            let table = extract_features(pipeline, &sessions, &cfg);
            let rows: Vec<&BiteRow> = table.rows.iter().collect();
            let fitted = TrainedModel::fit(pipeline, &rows, &cfg)?;
            write_json(&model, &fitted)?;
            eprintln!("trained {pipeline} on {} bites -> {}", rows.len(), model.display());
        }
        Cmd::Predict {
            manifest,
            model,
            out,
            overrides,
        } => {
            let fitted: TrainedModel = read_json(&require_file(&model)?)?;
            let cfg = overrides.resolve(0)?;
            let sessions = preprocess_all(&load_sessions(&manifest_source(&manifest)?, 0)?, &cfg)?;
            let table = extract_features(fitted.pipeline(), &sessions, &cfg);
            let mut body = String::from("bite_id,predicted_g,weight_g\n");
            for r in &table.rows {
                body.push_str(&format!("{},{},{}\n", r.key, fitted.predict(&r.features), r.weight_g));
            }
            emit(out.as_deref(), &body)?;
        }
        Cmd::Evaluate(args) => {
            let run = match &args.from_run {
                Some(path) => {
                    let mut run = RunConfig::read(&require_file(path)?)?;
                    if let Some(out) = &args.out {
                        run.output_dir = out.clone();
                    }
                    run
                }
                None => {
                    let data = match (&args.manifest, args.synth) {
                        (Some(m), _) => manifest_source(m)?,
                        (None, true) => DataSource::Synth {
                            subjects: args.synth_args.subjects,
                            profile: args.synth_args.resolve()?,
                        },
                        (None, false) => {
                            return Err(Failure::Usage("evaluate needs --manifest, --synth or --from-run".into()))
                        }
                    };
                    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("biteweight-out"));
                    let mut run = RunConfig::new(Command::Evaluate, data, out, args.pipeline, args.seed);
                    run.histogram_bin_g = args.bin_width;
                    run.config = args.overrides.resolve(args.seed)?;
                    run
                }
            };
            let eval = run_evaluate(&run)?;
            let r = &eval.report;
            println!(
                "{}: n={} MAE {:.2} g, baseline MAE {:.2} g, improvement {}",
                r.model_tag,
                r.n_bites,
                r.mae_g,
                r.baseline_mae_g,
                r.improvement_pct.map_or("N/A".into(), |v| format!("{v:.2}%"))
            );
        }
        Cmd::Synth { synth, seed, out } => {
            let profile = synth.resolve()?;
            let raw = generate_synthetic_raw(synth.subjects, seed, &profile)?;
            let data_dir = out.join("data");
            let mut subjects: Vec<ManifestSubject> = Vec::new();
            for s in &raw {
                let entry = write_raw_session(s, &data_dir, Path::new("data"))?;
                match subjects.iter_mut().find(|m| m.id == s.subject_id) {
                    Some(m) => m.sessions.push(entry),
                    None => subjects.push(ManifestSubject {
                        id: s.subject_id.clone(),
                        sessions: vec![entry],
                    }),
                }
            }
            let path = out.join("manifest.json");
            Manifest { subjects }.write(&path)?;
            println!("{}", path.display());
        }
        Cmd::Report { out } => {
            let rows = run_report(&out)?;
            print!("{}", report_text(&rows));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nUsage: biteweight <COMMAND> [OPTIONS]; see `biteweight --help`");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
