//! Run configuration: flat `key = value` files, keyed setters shared by the
//! file parser and the CLI override flags, and the replayable manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::trainer::TrainConfig;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub train: TrainConfig,
    /// 32 or 64.
    pub float_width: u32,
    pub bidirectional_kg: bool,
    pub workers: usize,
    pub data_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            float_width: 32,
            bidirectional_kg: true,
            workers: 1,
            data_dir: None,
            out_dir: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad value `{value}` for key `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(Error::InvalidConfig(format!(
            "bad value `{value}` for key `{key}` (expected true/false)"
        ))),
    }
}

impl RunConfig {
    /// Apply one key; unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let t = &mut self.train;
        match key {
            "dim" => t.dim = parse(key, value)?,
            "batch_size" => t.batch_size = parse(key, value)?,
            "layers" => t.layers = parse(key, value)?,
            "lr" => t.lr = parse(key, value)?,
            "lambda1" => t.lambda1 = parse(key, value)?,
            "lambda2" => t.lambda2 = parse(key, value)?,
            "tau" => t.tau = parse(key, value)?,
            "epochs_max" => t.epochs_max = parse(key, value)?,
            "patience" => t.patience = parse(key, value)?,
            "eval_interval" => t.eval_interval = parse(key, value)?,
            "augment" => t.augment = parse_bool(key, value)?,
            "rho_ig" => t.rho_ig = parse(key, value)?,
            "rho_kg" => t.rho_kg = parse(key, value)?,
            "use_cl" => t.use_cl = parse_bool(key, value)?,
            "use_fusion" => t.use_fusion = parse_bool(key, value)?,
            "use_normalization" => t.use_normalization = parse_bool(key, value)?,
            "include_layer0_in_x" => t.include_layer0_in_x = parse_bool(key, value)?,
            "seed" => t.seed = parse(key, value)?,
            "eval_k" => t.eval_k = parse(key, value)?,
            "float_width" => self.float_width = parse(key, value)?,
            "bidirectional_kg" => self.bidirectional_kg = parse_bool(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "data_dir" => self.data_dir = Some(PathBuf::from(value)),
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            _ => return Err(Error::InvalidConfig(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Apply a flat config file: `key = value` per line, `#` comments.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.load_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn load_str(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.float_width != 32 && self.float_width != 64 {
            return Err(Error::InvalidConfig(format!(
                "float_width must be 32 or 64, got {}",
                self.float_width
            )));
        }
        if self.workers < 1 {
            return Err(Error::InvalidConfig("workers must be >= 1".into()));
        }
        self.train.validate()
    }

    /// Fully resolved, re-parseable manifest. Feeding it back through
    /// `load_str` reproduces this configuration exactly.
    pub fn manifest(&self, command: &str, version: &str) -> String {
        let t = &self.train;
        let mut s = String::new();
        let _ = writeln!(s, "# command: {command}");
        let _ = writeln!(s, "# version: {version}");
        if let Some(d) = &self.data_dir {
            let _ = writeln!(s, "data_dir = {}", d.display());
        }
        if let Some(d) = &self.out_dir {
            let _ = writeln!(s, "out_dir = {}", d.display());
        }
        let _ = writeln!(s, "dim = {}", t.dim);
        let _ = writeln!(s, "batch_size = {}", t.batch_size);
        let _ = writeln!(s, "layers = {}", t.layers);
        let _ = writeln!(s, "lr = {}", t.lr);
        let _ = writeln!(s, "lambda1 = {}", t.lambda1);
        let _ = writeln!(s, "lambda2 = {}", t.lambda2);
        let _ = writeln!(s, "tau = {}", t.tau);
        let _ = writeln!(s, "epochs_max = {}", t.epochs_max);
        let _ = writeln!(s, "patience = {}", t.patience);
        let _ = writeln!(s, "eval_interval = {}", t.eval_interval);
        let _ = writeln!(s, "augment = {}", t.augment);
        let _ = writeln!(s, "rho_ig = {}", t.rho_ig);
        let _ = writeln!(s, "rho_kg = {}", t.rho_kg);
        let _ = writeln!(s, "use_cl = {}", t.use_cl);
        let _ = writeln!(s, "use_fusion = {}", t.use_fusion);
        let _ = writeln!(s, "use_normalization = {}", t.use_normalization);
        let _ = writeln!(s, "include_layer0_in_x = {}", t.include_layer0_in_x);
        let _ = writeln!(s, "seed = {}", t.seed);
        let _ = writeln!(s, "eval_k = {}", t.eval_k);
        let _ = writeln!(s, "float_width = {}", self.float_width);
        let _ = writeln!(s, "bidirectional_kg = {}", self.bidirectional_kg);
        let _ = writeln!(s, "workers = {}", self.workers);
        s
    }
}
