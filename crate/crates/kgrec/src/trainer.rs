//! Training loop: per-epoch augmentation, one shared forward per batch for
//! both losses, Adam updates, validation-based early stopping, and ablation
//! sweeps.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::eval::{evaluate, MetricsReport, Split};
use crate::graph::{augment_interactions, augment_kg, sample_bpr_batch, DatasetBundle};
use crate::objectives::{compute_gradients, LossBreakdown, LossConfig};
use crate::params::{adam_step, init_params, AdamHyper, AdamState, ModelParams};
use crate::propagation::{forward, ForwardConfig, PropagationCounters};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub dim: usize,
    pub batch_size: usize,
    pub layers: usize,
    pub lr: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub tau: f64,
    pub epochs_max: usize,
    pub patience: usize,
    pub eval_interval: usize,
    pub augment: bool,
    pub rho_ig: f64,
    pub rho_kg: f64,
    pub use_cl: bool,
    pub use_fusion: bool,
    pub use_normalization: bool,
    pub include_layer0_in_x: bool,
    pub seed: u64,
    pub eval_k: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 64,
            batch_size: 2048,
            layers: 3,
            lr: 1e-3,
            lambda1: 0.1,
            lambda2: 1e-4,
            tau: 0.2,
            epochs_max: 200,
            patience: 10,
            eval_interval: 1,
            augment: true,
            rho_ig: 0.9,
            rho_kg: 0.9,
            use_cl: true,
            use_fusion: true,
            use_normalization: true,
            include_layer0_in_x: false,
            seed: 2023,
            eval_k: 20,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 || self.layers < 1 || self.batch_size < 1 {
            return Err(Error::InvalidConfig(
                "dim, layers and batch_size must be >= 1".into(),
            ));
        }
        if self.patience < 1 || self.eval_interval < 1 {
            return Err(Error::InvalidConfig(
                "patience and eval_interval must be >= 1".into(),
            ));
        }
        if !(self.rho_ig > 0.0 && self.rho_ig <= 1.0 && self.rho_kg > 0.0 && self.rho_kg <= 1.0) {
            return Err(Error::InvalidConfig("keep rates must be in (0,1]".into()));
        }
        if self.tau <= 0.0 || self.lr <= 0.0 || self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return Err(Error::InvalidConfig(
                "tau and lr must be positive, lambdas non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn forward_config(&self) -> ForwardConfig {
        ForwardConfig {
            layers: self.layers,
            fuse: self.use_fusion,
            normalize: self.use_normalization,
            include_layer0_in_x: self.include_layer0_in_x,
        }
    }

    pub fn loss_config(&self) -> LossConfig {
        LossConfig {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            tau: self.tau,
            use_cl: self.use_cl,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: LossBreakdown,
    pub val: Option<MetricsReport>,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub best_val_recall: f64,
    pub diverged: bool,
    pub counters: PropagationCounters,
    pub batches_run: u64,
}

impl TrainHistory {
    /// CSV with one row per epoch. Wall time stays out of the file so
    /// identical runs produce identical bytes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,bpr,cl,reg,total,val_recall,val_ndcg\n");
        for r in &self.epochs {
            let (vr, vn) = match &r.val {
                Some(m) => (format!("{:.6}", m.recall), format!("{:.6}", m.ndcg)),
                None => (String::new(), String::new()),
            };
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6},{:.6},{},{}\n",
                r.epoch,
                r.loss.bpr,
                r.loss.cl_user + r.loss.cl_item,
                r.loss.reg,
                r.loss.total,
                vr,
                vn,
            ));
        }
        out
    }
}

/// Train on the bundle; returns the parameters of the best validation epoch
/// (or the final ones when no evaluation ever ran).
pub fn train<T: Scalar>(
    cfg: &TrainConfig,
    bundle: &DatasetBundle,
) -> Result<(ModelParams<T>, AdamState<T>, TrainHistory)> {
    cfg.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut params: ModelParams<T> = init_params(bundle, cfg.dim, rng.gen());
    let mut state = AdamState::new(
        &params,
        AdamHyper {
            lr: cfg.lr,
            ..AdamHyper::default()
        },
    );
    let mut history = TrainHistory::default();
    if cfg.epochs_max == 0 {
        return Ok((params, state, history));
    }

    let fcfg = cfg.forward_config();
    let lcfg = cfg.loss_config();
    let train_edges = bundle.train.flat_edges();
    let batches_per_epoch = train_edges.len().div_ceil(cfg.batch_size).max(1);

    let mut best_params = params.clone();
    let mut best_state = state.clone();
    let mut evals_since_best = 0usize;

    for epoch in 0..cfg.epochs_max {
        let t0 = Instant::now();
        // augmentation is resampled once per epoch, not per batch
        let (aug_ig, aug_kg);
        let (ig_ref, kg_ref) = if cfg.augment && (cfg.rho_ig < 1.0 || cfg.rho_kg < 1.0) {
            aug_ig = augment_interactions(&bundle.train, cfg.rho_ig, &mut rng)?;
            aug_kg = augment_kg(&bundle.kg, cfg.rho_kg, &mut rng)?;
            (&aug_ig, &aug_kg)
        } else {
            (&bundle.train, &bundle.kg)
        };

        let mut epoch_loss = LossBreakdown::default();
        for _ in 0..batches_per_epoch {
            let batch = sample_bpr_batch(&bundle.train, &train_edges, cfg.batch_size, &mut rng)?;
            // exactly one forward per batch, shared by BPR and CL
            let fwd = forward(&params, ig_ref, kg_ref, &fcfg, &mut history.counters)?;
            let (loss, grads) = compute_gradients(&params, ig_ref, kg_ref, &fwd, &batch, &lcfg)?;
            history.batches_run += 1;
            if !loss.total.is_finite() {
                history.diverged = true;
                break;
            }
            adam_step(&mut params, &grads, &mut state)?;
            epoch_loss.bpr += loss.bpr;
            epoch_loss.cl_user += loss.cl_user;
            epoch_loss.cl_item += loss.cl_item;
            epoch_loss.reg += loss.reg;
            epoch_loss.total += loss.total;
        }
        let nb = batches_per_epoch as f64;
        epoch_loss.bpr /= nb;
        epoch_loss.cl_user /= nb;
        epoch_loss.cl_item /= nb;
        epoch_loss.reg /= nb;
        epoch_loss.total /= nb;
        epoch_loss.lambda1 = cfg.lambda1;
        epoch_loss.lambda2 = cfg.lambda2;
        epoch_loss.tau = cfg.tau;

        if history.diverged || !params.is_finite() {
            history.diverged = true;
            history.epochs.push(EpochRecord {
                epoch,
                loss: epoch_loss,
                val: None,
                seconds: t0.elapsed().as_secs_f64(),
            });
            // hand back the last good (best) parameters
            return Ok((best_params, best_state, history));
        }

        let mut val = None;
        let has_validation = bundle.valid.num_edges() > 0;
        if has_validation && (epoch + 1) % cfg.eval_interval == 0 {
            let report = evaluate(&params, bundle, &fcfg, Split::Validation, cfg.eval_k)?;
            if history.best_epoch.is_none() || report.recall > history.best_val_recall {
                history.best_val_recall = report.recall;
                history.best_epoch = Some(epoch);
                best_params = params.clone();
                best_state = state.clone();
                evals_since_best = 0;
            } else {
                evals_since_best += 1;
            }
            val = Some(report);
        }
        history.epochs.push(EpochRecord {
            epoch,
            loss: epoch_loss,
            val,
            seconds: t0.elapsed().as_secs_f64(),
        });
        if has_validation && evals_since_best >= cfg.patience {
            break;
        }
    }

    if history.best_epoch.is_some() {
        Ok((best_params, best_state, history))
    } else {
        Ok((params, state, history))
    }
}

/// Named ablation variants in the shape of the design-choice comparison.
pub const ABLATION_VARIANTS: [&str; 6] = [
    "full",
    "wo_cl",
    "wo_lf",
    "wo_augmentation",
    "wo_normalization",
    "lightgcn_only",
];

pub fn ablation_config(base: &TrainConfig, variant: &str) -> Result<TrainConfig> {
    let mut cfg = base.clone();
    match variant {
        "full" => {}
        "wo_cl" => cfg.use_cl = false,
        "wo_lf" => cfg.use_fusion = false,
        "wo_augmentation" => cfg.augment = false,
        "wo_normalization" => cfg.use_normalization = false,
        "lightgcn_only" => {
            cfg.use_cl = false;
            cfg.use_fusion = false;
        }
        other => {
            return Err(Error::InvalidConfig(format!("unknown ablation variant `{other}`")))
        }
    }
    Ok(cfg)
}

#[derive(Clone, Debug)]
pub struct AblationRow {
    pub variant: String,
    pub val: MetricsReport,
    pub test: MetricsReport,
}

/// Run every ablation variant with a shared seed; one row per variant.
pub fn run_ablation_suite<T: Scalar>(
    base: &TrainConfig,
    bundle: &DatasetBundle,
) -> Result<Vec<AblationRow>> {
    let mut rows = Vec::new();
    for variant in ABLATION_VARIANTS {
        let cfg = ablation_config(base, variant)?;
        let (params, _, _) = train::<T>(&cfg, bundle)?;
        let fcfg = cfg.forward_config();
        let val = evaluate(&params, bundle, &fcfg, Split::Validation, cfg.eval_k)?;
        let test = evaluate(&params, bundle, &fcfg, Split::Test, cfg.eval_k)?;
        rows.push(AblationRow {
            variant: variant.to_string(),
            val,
            test,
        });
    }
    Ok(rows)
}

pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut out =
        String::from("variant,val_recall@K,val_ndcg@K,test_recall@K,test_ndcg@K\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6}\n",
            r.variant, r.val.recall, r.val.ndcg, r.test.recall, r.test.ndcg
        ));
    }
    out
}
