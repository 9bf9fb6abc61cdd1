//! Command-line entry point: synth / train / eval / ablate / check.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kgrec::checkpoint::{load_checkpoint, peek_width, save_checkpoint};
use kgrec::config::RunConfig;
use kgrec::error::{Error, Result};
use kgrec::eval::{evaluate, MetricsReport, Split};
use kgrec::graph::{load_bundle, DatasetBundle};
use kgrec::scalar::Scalar;
use kgrec::selfcheck::{run_all_checks, run_quick_checks};
use kgrec::synth::{generate_synthetic_dataset, SynthSpec};
use kgrec::trainer::{ablation_csv, run_ablation_suite, train};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "kgrec", version, about = "knowledge-graph-enhanced recommender")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic dataset directory.
    Synth {
        /// Output directory for the dataset files.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 500)]
        users: usize,
        #[arg(long, default_value_t = 2000)]
        items: usize,
        #[arg(long, default_value_t = 2600)]
        entities: usize,
        #[arg(long, default_value_t = 8)]
        relations: usize,
        /// KG signal strength in [0,1]; 0 makes the KG pure noise.
        #[arg(long, default_value_t = 0.9)]
        signal: f64,
        /// Number of latent topics shared by users, items and KG communities.
        #[arg(long, default_value_t = 10)]
        topics: usize,
        /// Probability an interaction stays within the user's topic.
        #[arg(long, default_value_t = 0.85)]
        topic_affinity: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Train a model and write checkpoint, history and metrics.
    Train {
        /// Dataset directory (train/valid/test/kg/alignment tsv files).
        #[arg(long)]
        data: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Flat key = value config file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        over: Overrides,
    },
    /// Evaluate a checkpoint on one split.
    Eval {
        /// Checkpoint written by `train`.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Dataset directory; defaults to the one recorded in the checkpoint.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Where to write metrics.csv; defaults to the checkpoint's directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Split to evaluate: test or valid.
        #[arg(long, default_value = "test")]
        split: String,
        #[command(flatten)]
        over: Overrides,
    },
    /// Train every ablation variant and write the comparison table.
    Ablate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        over: Overrides,
    },
    /// Run the built-in validation suite.
    Check {
        /// Also run the slow directional and complexity experiments.
        #[arg(long)]
        full: bool,
    },
}

/// Per-key command-line overrides; precedence CLI > file > defaults.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    epochs_max: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    eval_interval: Option<usize>,
    #[arg(long)]
    augment: Option<String>,
    #[arg(long)]
    rho_ig: Option<f64>,
    #[arg(long)]
    rho_kg: Option<f64>,
    #[arg(long)]
    use_cl: Option<String>,
    #[arg(long)]
    use_fusion: Option<String>,
    #[arg(long)]
    use_normalization: Option<String>,
    #[arg(long)]
    include_layer0_in_x: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eval_k: Option<usize>,
    #[arg(long)]
    float_width: Option<u32>,
    #[arg(long)]
    bidirectional_kg: Option<String>,
    /// Worker threads; 1 by default.
    #[arg(long)]
    workers: Option<usize>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        let mut set = |key: &str, v: Option<String>| -> Result<()> {
            if let Some(v) = v {
                cfg.set(key, &v)?;
            }
            Ok(())
        };
        set("dim", self.dim.map(|v| v.to_string()))?;
        set("batch_size", self.batch_size.map(|v| v.to_string()))?;
        set("layers", self.layers.map(|v| v.to_string()))?;
        set("lr", self.lr.map(|v| v.to_string()))?;
        set("lambda1", self.lambda1.map(|v| v.to_string()))?;
        set("lambda2", self.lambda2.map(|v| v.to_string()))?;
        set("tau", self.tau.map(|v| v.to_string()))?;
        set("epochs_max", self.epochs_max.map(|v| v.to_string()))?;
        set("patience", self.patience.map(|v| v.to_string()))?;
        set("eval_interval", self.eval_interval.map(|v| v.to_string()))?;
        set("augment", self.augment.clone())?;
        set("rho_ig", self.rho_ig.map(|v| v.to_string()))?;
        set("rho_kg", self.rho_kg.map(|v| v.to_string()))?;
        set("use_cl", self.use_cl.clone())?;
        set("use_fusion", self.use_fusion.clone())?;
        set("use_normalization", self.use_normalization.clone())?;
        set("include_layer0_in_x", self.include_layer0_in_x.clone())?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("eval_k", self.eval_k.map(|v| v.to_string()))?;
        set("float_width", self.float_width.map(|v| v.to_string()))?;
        set("bidirectional_kg", self.bidirectional_kg.clone())?;
        set("workers", self.workers.map(|v| v.to_string()))?;
        Ok(())
    }
}

fn resolve_config(
    file: Option<&Path>,
    over: &Overrides,
    data: Option<&Path>,
    out: Option<&Path>,
) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(f) = file {
        cfg.load_file(f)?;
    }
    over.apply(&mut cfg)?;
    if let Some(d) = data {
        cfg.data_dir = Some(d.to_path_buf());
    }
    if let Some(o) = out {
        cfg.out_dir = Some(o.to_path_buf());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_workers(workers: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    Ok(())
}

fn write_out(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn metrics_csv(rows: &[(&str, MetricsReport)]) -> String {
    let mut s = String::from("split,k,recall,ndcg,users_evaluated\n");
    for (name, m) in rows {
        s.push_str(&format!(
            "{name},{},{:.6},{:.6},{}\n",
            m.k, m.recall, m.ndcg, m.users_evaluated
        ));
    }
    s
}

fn load_data(cfg: &RunConfig) -> Result<DatasetBundle> {
    let dir = cfg
        .data_dir
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("no data directory given".into()))?;
    load_bundle(dir, cfg.bidirectional_kg)
}

fn run_train<T: Scalar>(cfg: &RunConfig, out: &Path) -> Result<()> {
    let bundle = load_data(cfg)?;
    let (params, state, history) = train::<T>(&cfg.train, &bundle)?;
    let manifest = cfg.manifest("train", VERSION);
    fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.to_path_buf(),
        source,
    })?;
    write_out(&out.join("manifest.txt"), &manifest)?;
    write_out(&out.join("history.csv"), &history.to_csv())?;
    save_checkpoint(&out.join("checkpoint.bin"), &params, &state, &manifest)?;
    let fcfg = cfg.train.forward_config();
    let val = evaluate(&params, &bundle, &fcfg, Split::Validation, cfg.train.eval_k)?;
    let test = evaluate(&params, &bundle, &fcfg, Split::Test, cfg.train.eval_k)?;
    write_out(
        &out.join("metrics.csv"),
        &metrics_csv(&[("valid", val), ("test", test)]),
    )?;
    println!(
        "trained {} epochs (best epoch {:?}); test recall@{} = {:.6}, ndcg@{} = {:.6}",
        history.epochs.len(),
        history.best_epoch,
        test.k,
        test.recall,
        test.k,
        test.ndcg
    );
    if history.diverged {
        println!("warning: training diverged; wrote last finite parameters");
    }
    Ok(())
}

fn run_eval<T: Scalar>(cfg: &RunConfig, checkpoint: &Path, split: Split, out: &Path) -> Result<()> {
    let bundle = load_data(cfg)?;
    let ck = load_checkpoint::<T>(checkpoint)?;
    let fcfg = cfg.train.forward_config();
    let report = evaluate(&ck.params, &bundle, &fcfg, split, cfg.train.eval_k)?;
    let name = match split {
        Split::Validation => "valid",
        Split::Test => "test",
    };
    write_out(&out.join("metrics.csv"), &metrics_csv(&[(name, report)]))?;
    println!(
        "{name} recall@{} = {:.6}, ndcg@{} = {:.6} ({} users)",
        report.k, report.recall, report.k, report.ndcg, report.users_evaluated
    );
    Ok(())
}

fn run_ablate<T: Scalar>(cfg: &RunConfig, out: &Path) -> Result<()> {
    let bundle = load_data(cfg)?;
    let rows = run_ablation_suite::<T>(&cfg.train, &bundle)?;
    fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.to_path_buf(),
        source,
    })?;
    write_out(&out.join("manifest.txt"), &cfg.manifest("ablate", VERSION))?;
    let csv = ablation_csv(&rows);
    write_out(&out.join("ablation.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Synth {
            out,
            users,
            items,
            entities,
            relations,
            signal,
            topics,
            topic_affinity,
            seed,
        } => {
            let spec = SynthSpec {
                users,
                items,
                entities,
                relations,
                kg_signal_strength: signal,
                topics,
                topic_affinity,
                seed,
                ..SynthSpec::default()
            };
            generate_synthetic_dataset(&spec, &out)?;
            let manifest = format!(
                "# command: synth\n# version: {VERSION}\nusers = {users}\nitems = {items}\n\
                 entities = {entities}\nrelations = {relations}\nkg_signal_strength = {signal}\n\
                 seed = {seed}\n"
            );
            write_out(&out.join("manifest.txt"), &manifest)?;
            println!("wrote synthetic dataset to {}", out.display());
            Ok(())
        }
        Cmd::Train {
            data,
            out,
            config,
            over,
        } => {
            let cfg = resolve_config(config.as_deref(), &over, Some(&data), Some(&out))?;
            init_workers(cfg.workers)?;
            match cfg.float_width {
                32 => run_train::<f32>(&cfg, &out),
                _ => run_train::<f64>(&cfg, &out),
            }
        }
        Cmd::Eval {
            checkpoint,
            data,
            out,
            split,
            over,
        } => {
            let split = match split.as_str() {
                "test" => Split::Test,
                "valid" => Split::Validation,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "split must be `test` or `valid`, got `{other}`"
                    )))
                }
            };
            // start from the exact configuration stored in the checkpoint
            let mut cfg = RunConfig::default();
            let width = peek_width(&checkpoint)?;
            let stored = match width {
                4 => load_checkpoint::<f32>(&checkpoint)?.manifest,
                8 => load_checkpoint::<f64>(&checkpoint)?.manifest,
                w => return Err(Error::Checkpoint(format!("unsupported float width {w}"))),
            };
            cfg.load_str(&stored)?;
            over.apply(&mut cfg)?;
            if let Some(d) = data {
                cfg.data_dir = Some(d);
            }
            cfg.validate()?;
            init_workers(cfg.workers)?;
            let out = out
                .or_else(|| checkpoint.parent().map(Path::to_path_buf))
                .unwrap_or_else(|| PathBuf::from("."));
            match width {
                4 => run_eval::<f32>(&cfg, &checkpoint, split, &out),
                _ => run_eval::<f64>(&cfg, &checkpoint, split, &out),
            }
        }
        Cmd::Ablate {
            data,
            out,
            config,
            over,
        } => {
            let cfg = resolve_config(config.as_deref(), &over, Some(&data), Some(&out))?;
            init_workers(cfg.workers)?;
            match cfg.float_width {
                32 => run_ablate::<f32>(&cfg, &out),
                _ => run_ablate::<f64>(&cfg, &out),
            }
        }
        Cmd::Check { full } => {
            let outcomes = if full {
                run_all_checks()
            } else {
                run_quick_checks()
            };
            let mut failed = 0;
            for c in &outcomes {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                println!("[{tag}] {}: {}", c.name, c.detail);
                if !c.passed {
                    failed += 1;
                }
            }
            if failed > 0 {
                return Err(Error::InvalidGraph(format!("{failed} check(s) failed")));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::InvalidConfig(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
