use std::fmt;
use std::path::PathBuf;

use letternet::TrainConfig;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// 26 letter outputs.
    Exp1,
    /// 10 feature-set outputs, trained clean and with noise.
    Exp2,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Exp1 => "exp1",
            Experiment::Exp2 => "exp2",
        }
    }

    pub fn output_count(self) -> usize {
        match self {
            Experiment::Exp1 => 26,
            Experiment::Exp2 => 10,
        }
    }

    pub fn default_noise(self) -> f64 {
        match self {
            Experiment::Exp1 => 0.0,
            Experiment::Exp2 => 0.1,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fully resolved settings for one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub hidden_count: usize,
    pub eta: f64,
    pub epsilon: f64,
    pub max_epochs: usize,
    /// Training noise for exp1; the noisy condition's rate for exp2.
    pub noise_rate: f64,
    pub output_dir: PathBuf,
    pub font_path: Option<PathBuf>,
    pub cell_size: usize,
    pub gap: usize,
    pub threshold: f64,
    /// Noisy copies of each glyph used for noisy-input accuracy.
    pub noisy_eval_copies: usize,
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        RunConfig {
            experiment,
            seed: 1,
            hidden_count: 6,
            eta: 0.5,
            epsilon: 0.01,
            max_epochs: 5000,
            noise_rate: experiment.default_noise(),
            output_dir: PathBuf::from("out"),
            font_path: None,
            cell_size: 16,
            gap: 4,
            threshold: 0.5,
            noisy_eval_copies: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Usage(m));
        if self.hidden_count == 0 {
            return bad("--hidden must be at least 1".into());
        }
        if self.cell_size == 0 {
            return bad("--cell-size must be at least 1".into());
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad(format!(
                "--threshold must be in (0, 1), got {}",
                self.threshold
            ));
        }
        if self.experiment == Experiment::Exp2 && self.noise_rate == 0.0 {
            return bad("exp2 needs a nonzero --noise for its noisy condition".into());
        }
        self.train_config(self.noise_rate)
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn train_config(&self, noise_rate: f64) -> TrainConfig {
        TrainConfig {
            eta: self.eta,
            max_epochs: self.max_epochs,
            epsilon: self.epsilon,
            seed: self.seed,
            noise_rate,
            shuffle: true,
        }
    }

    /// Plain-text `key=value` lines, one per field, fixed order.
    pub fn to_key_values(&self) -> String {
        let font = self
            .font_path
            .as_ref()
            .map_or_else(|| "builtin".to_string(), |p| p.display().to_string());
        [
            ("experiment", self.experiment.to_string()),
            ("seed", self.seed.to_string()),
            ("hidden", self.hidden_count.to_string()),
            ("outputs", self.experiment.output_count().to_string()),
            ("eta", self.eta.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("max_epochs", self.max_epochs.to_string()),
            ("noise", self.noise_rate.to_string()),
            ("alpha", letternet::mlp::DEFAULT_ALPHA.to_string()),
            ("init_range", letternet::mlp::INIT_RANGE.to_string()),
            ("shuffle", "true".to_string()),
            ("font", font),
            ("cell_size", self.cell_size.to_string()),
            ("gap", self.gap.to_string()),
            ("threshold", self.threshold.to_string()),
            ("noisy_eval_copies", self.noisy_eval_copies.to_string()),
            ("out", self.output_dir.display().to_string()),
        ]
        .iter()
        .map(|(k, v)| format!("{k}={v}\n"))
        .collect()
    }
}
