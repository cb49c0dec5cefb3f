//! The `gestalt` command line: dataset emission and checks, metrics,
//! training, learning curves, face fusion and the trial service.

use std::fmt;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use gestalt_core::dataset::{
    build_curriculum, emit_dataset, emit_deliberate, emit_faces, evaluate, learning_curve, read_predictions,
    set_dir, verify, write_curve_csv, write_predictions, write_report_csv, DeliberateOp, EmitSpec, Manifest,
    VerifyOptions, VerifyReport,
};
use gestalt_core::face::{read_pairs, DEFAULT_SIGMA};
use gestalt_core::rng::split_seed;
use gestalt_core::tasks::{Registry, Task};
use gestalt_learner::{checkpoint, AugmentConfig, Dataset, ModelConfig, TrainConfig};
use serde_json::json;

/// A failure with a stable category for scripts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub category: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(category: &'static str, message: impl Into<String>) -> Self {
        CliError {
            category,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category {
            "invalid-input" | "unknown-name" => 2,
            "io" => 3,
            "format" => 4,
            "integrity" => 5,
            "evaluation" => 6,
            "divergence" => 7,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", json!({ "error": self.category, "message": self.message }))
    }
}

macro_rules! from_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::new(e.category(), e.to_string())
            }
        }
    )*};
}
from_error!(gestalt_core::Error, gestalt_learner::Error, gestalt_trial::Error);

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "gestalt", version, about = "Synthetic visual-concept datasets, oracles, a small CNN and the trial service")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit one generated set to <out>/<task>/<round>/.
    Gen {
        #[arg(long)]
        task: String,
        #[arg(long)]
        round: String,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit the global-symmetry curriculum (A1, C1, D1(A1), A2, D2(A2), A3, D3(A3)) under <out>.
    Curriculum {
        #[arg(long, default_value_t = 8000)]
        a1: usize,
        #[arg(long, default_value_t = 8000)]
        c1: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a deliberate operator (D1, D2, D3) to a global-symmetry set.
    Derive {
        #[arg(long)]
        op: String,
        #[arg(long)]
        source: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to the size of the source.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check files, checksums, regeneration and oracle labels. Repeat
    /// --manifest to report several rounds.
    Verify {
        #[arg(long, required = true)]
        manifest: Vec<PathBuf>,
        /// Write the full reports and copies of disagreeing images here.
        #[arg(long)]
        dump: Option<PathBuf>,
        #[arg(long)]
        no_regenerate: bool,
        #[arg(long)]
        no_oracle: bool,
    },
    /// Score a `path,class` prediction file against a manifest.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Also write the report as CSV.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Train the classifier and write a checkpoint.
    Train {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        val: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        history: Option<PathBuf>,
        #[arg(long, default_value_t = 70)]
        epochs: usize,
        #[arg(long, default_value_t = 40)]
        batch: usize,
        #[arg(long, default_value_t = 0.01)]
        lr: f64,
        #[arg(long, default_value_t = 0.9)]
        momentum: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Label-preserving augmentation for the set's task.
        #[arg(long)]
        augment: bool,
        /// With --augment: rotations and shifts even for mirror symmetry.
        #[arg(long)]
        literal_augment: bool,
    },
    /// Write `path,class` predictions of a checkpoint on a manifest.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hold-out accuracy against training-set size.
    Curve {
        #[arg(long)]
        task: String,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Training round; defaults to the task's first round.
        #[arg(long)]
        round: Option<String>,
        /// Test round; defaults to the training round (fresh samples).
        #[arg(long)]
        test_round: Option<String>,
        #[arg(long, default_value_t = 200)]
        val_count: usize,
        #[arg(long, default_value_t = 400)]
        test_count: usize,
        #[arg(long, default_value_t = 70)]
        epochs: usize,
        #[arg(long, default_value_t = 40)]
        batch: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where the emitted sets go.
        #[arg(long, default_value = "curve-data")]
        work: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fuse listed face pairs into a face-task set.
    Fuse {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SIGMA)]
        sigma: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the trial service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Dataset root laid out as <root>/<task>/<round>/.
        #[arg(long)]
        data: PathBuf,
        /// Session logs; defaults to <data>/sessions.
        #[arg(long)]
        logs: Option<PathBuf>,
    },
}

/// First round of each synthetic task, used when none is given.
pub fn default_round(task: Task) -> Result<&'static str> {
    Ok(match task {
        Task::GlobalSymmetry => "A1",
        Task::LocalSymmetry | Task::TypeCounting => "train",
        Task::Counting => "s1",
        Task::CommonFate => "r1",
        Task::Face => return Err(CliError::new("invalid-input", "the face task has no generator")),
    })
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value"));
}

pub fn run(cli: Cli) -> Result<()> {
    let registry = Registry::builtin();
    match cli.command {
        Command::Gen {
            task,
            round,
            count,
            seed,
            out,
        } => {
            let task = Task::from_name(&task)?;
            let dir = set_dir(&out, task.name(), &round);
            let spec = EmitSpec {
                task,
                round,
                count,
                master_seed: seed,
            };
            let m = emit_dataset(&registry, &spec, &dir)?;
            println!("{} records {:?} -> {}", m.len(), m.class_counts, dir.display());
        }
        Command::Curriculum { a1, c1, seed, out } => {
            let c = build_curriculum(&registry, &out, a1, c1, seed)?;
            for m in c.training().into_iter().chain(c.tests()) {
                println!("{:<8} {:>6} records -> {}", m.round, m.len(), m.base.display());
            }
        }
        Command::Derive {
            op,
            source,
            seed,
            count,
            out,
        } => {
            let src = Manifest::open(&source)?;
            let m = emit_deliberate(DeliberateOp::from_name(&op)?, &src, &out, seed, count)?;
            println!("{} {} records -> {}", m.round, m.len(), out.display());
        }
        Command::Verify {
            manifest,
            dump,
            no_regenerate,
            no_oracle,
        } => {
            let opts = VerifyOptions {
                regenerate: !no_regenerate,
                oracle: !no_oracle,
            };
            let mut reports = Vec::new();
            for path in &manifest {
                let m = Manifest::open(path)?;
                let r = verify(&registry, &m, opts)?;
                println!(
                    "{}/{}: {} records, {} judged, agreement {:.2}%, {} regenerated, {} unreadable, {} checksum, {} regeneration mismatches",
                    r.task,
                    r.round,
                    r.records,
                    r.judged,
                    r.agreement(),
                    r.regenerated,
                    r.unreadable.len(),
                    r.checksum_mismatches.len(),
                    r.regeneration_mismatches.len()
                );
                if let Some(dir) = &dump {
                    dump_report(dir, &m, &r)?;
                }
                reports.push(r);
            }
            if let Some(bad) = reports.iter().find(|r| !r.is_clean()) {
                return Err(CliError::new(
                    "integrity",
                    format!("{}/{} failed verification", bad.task, bad.round),
                ));
            }
        }
        Command::Eval { pred, manifest, report } => {
            let m = Manifest::open(&manifest)?;
            let r = evaluate(&m, &read_predictions(&pred)?)?;
            if let Some(p) = report {
                write_report_csv(&p, &r)?;
            }
            print_json(&serde_json::to_value(&r).expect("plain report"));
        }
        Command::Train {
            train,
            val,
            out,
            history,
            epochs,
            batch,
            lr,
            momentum,
            seed,
            augment,
            literal_augment,
        } => {
            let tm = Manifest::open(&train)?;
            let task = Task::from_name(&tm.task)?;
            let model = ModelConfig {
                seed,
                ..ModelConfig::default()
            };
            let tc = TrainConfig {
                epochs,
                batch_size: batch,
                learning_rate: lr,
                momentum,
                augment: if augment {
                    AugmentConfig::for_task(task, literal_augment)
                } else {
                    AugmentConfig::off()
                },
                seed,
            };
            let tr = Dataset::from_manifest(&tm, model.input_side)?;
            let va = Dataset::from_manifest(&Manifest::open(&val)?, model.input_side)?;
            let t = gestalt_learner::train(&model, &tr, &va, &tc)?;
            if let Some(h) = history {
                t.history.write_csv(&h)?;
            }
            let sel = t.history.selected().cloned();
            let meta = json!({ "task": tm.task, "train": tm.round, "train_config": tc, "selected": sel });
            checkpoint::save(&t.model, meta, &out)?;
            if let Some(s) = sel {
                println!(
                    "epoch {} selected: validation error {:.2}%, train error {:.2}% -> {}",
                    s.epoch,
                    s.val_error,
                    s.train_error,
                    out.display()
                );
            }
        }
        Command::Predict { model, manifest, out } => {
            let (model, _) = checkpoint::load(&model)?;
            let m = Manifest::open(&manifest)?;
            let data = Dataset::from_manifest(&m, model.config().input_side)?;
            let labels = gestalt_learner::predict(&model, &data)?;
            let preds: Vec<_> = data.paths.into_iter().zip(labels).collect();
            write_predictions(&out, &preds)?;
            println!("{} predictions -> {}", preds.len(), out.display());
        }
        Command::Curve {
            task,
            sizes,
            round,
            test_round,
            val_count,
            test_count,
            epochs,
            batch,
            seed,
            work,
            out,
        } => {
            let task = Task::from_name(&task)?;
            let round = match round {
                Some(r) => r,
                None => default_round(task)?.to_string(),
            };
            let test_round = test_round.unwrap_or_else(|| round.clone());
            let curve = run_curve(&registry, task, &round, &test_round, &sizes, (val_count, test_count), epochs, batch, seed, &work)?;
            for p in &curve {
                match p.accuracy {
                    Some(a) => println!("{:>7} {:6.2}", p.size, a),
                    None => println!("{:>7} failed", p.size),
                }
            }
            if let Some(path) = out {
                write_curve_csv(&path, &curve)?;
            }
        }
        Command::Fuse { pairs, sigma, out } => {
            let m = emit_faces(&read_pairs(&pairs)?, sigma, &out)?;
            println!(
                "{} fused, {} real -> {}",
                m.class_counts[1],
                m.class_counts[0],
                out.display()
            );
        }
        Command::Serve { port, host, data, logs } => {
            let logs = logs.unwrap_or_else(|| data.join("sessions"));
            let addr = SocketAddr::new(host, port);
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::new("io", e.to_string()))?;
            eprintln!("serving {} on http://{addr}", data.display());
            rt.block_on(gestalt_trial::serve(addr, &data, &logs))?;
        }
    }
    Ok(())
}

fn dump_report(dir: &Path, m: &Manifest, r: &VerifyReport) -> Result<()> {
    let sub = dir.join(format!("{}-{}", r.task, gestalt_core::dataset::dir_name(&r.round)));
    let io = |p: &Path, e: std::io::Error| CliError::new("io", format!("{}: {e}", p.display()));
    std::fs::create_dir_all(&sub).map_err(|e| io(&sub, e))?;
    let report = sub.join("report.json");
    std::fs::write(&report, serde_json::to_string_pretty(r).expect("plain report")).map_err(|e| io(&report, e))?;
    for d in &r.disagreements {
        let from = m.resolve(&d.path);
        let to = sub.join(d.path.replace(['/', '\\'], "_").trim_start_matches('.'));
        std::fs::copy(&from, &to).map_err(|e| io(&from, e))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_curve(
    registry: &Registry,
    task: Task,
    round: &str,
    test_round: &str,
    sizes: &[usize],
    (val_count, test_count): (usize, usize),
    epochs: usize,
    batch: usize,
    seed: u64,
    work: &Path,
) -> Result<Vec<gestalt_core::dataset::CurvePoint>> {
    if sizes.is_empty() || sizes.contains(&0) {
        // Rejected by the curve itself, before anything is emitted.
        return Ok(learning_curve(sizes, |_| Ok(None))?);
    }
    let largest = sizes.iter().copied().max().unwrap_or(0);
    let emit = |name: &str, r: &str, count: usize, k: u64| -> Result<Dataset> {
        let spec = EmitSpec {
            task,
            round: r.to_string(),
            count,
            master_seed: split_seed(seed, k),
        };
        let m = emit_dataset(registry, &spec, &work.join(task.name()).join(name))?;
        Ok(Dataset::from_manifest(&m, ModelConfig::default().input_side)?)
    };
    let train = emit("train", round, largest, 0)?;
    let val = emit("val", round, val_count, 1)?;
    let test = emit("test", test_round, test_count, 2)?;
    Ok(learning_curve(sizes, |n| {
        let subset = train.subset(&(0..n).collect::<Vec<_>>());
        let tc = TrainConfig {
            epochs,
            batch_size: batch.min(n),
            augment: AugmentConfig::for_task(task, false),
            seed: split_seed(seed, n as u64),
            ..TrainConfig::default()
        };
        let model = ModelConfig {
            seed: split_seed(seed, 1 << 32 | n as u64),
            ..ModelConfig::default()
        };
        match gestalt_learner::train(&model, &subset, &val, &tc) {
            Ok(t) => Ok(Some(gestalt_learner::evaluate(&t.model, &test).map_err(to_core)?.accuracy)),
            Err(gestalt_learner::Error::Diverged { .. }) => Ok(None),
            Err(e) => Err(to_core(e)),
        }
    })?)
}

/// Learning-curve callbacks speak the core error type.
fn to_core(e: gestalt_learner::Error) -> gestalt_core::Error {
    match e {
        gestalt_learner::Error::Core(c) => c,
        other => gestalt_core::Error::Evaluation(other.to_string()),
    }
}
