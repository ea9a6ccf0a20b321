//! Experiment configuration, read from JSON.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hcr_core::features::ExtractorKind;
use hcr_core::glyph::{latin_uppercase, GlyphGenConfig};
use hcr_core::mlp::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::error::{HcrError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Mdc,
    MlpBp,
    MlpLm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Mdc, ClassifierKind::MlpBp, ClassifierKind::MlpLm];

    pub fn key(self) -> &'static str {
        match self {
            ClassifierKind::Mdc => "mdc",
            ClassifierKind::MlpBp => "mlp_bp",
            ClassifierKind::MlpLm => "mlp_lm",
        }
    }

    /// Label used in report tables.
    pub fn title(self) -> &'static str {
        match self {
            ClassifierKind::Mdc => "MDC",
            ClassifierKind::MlpBp => "MLP BP",
            ClassifierKind::MlpLm => "MLP LM",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ClassifierKind::ALL
            .into_iter()
            .find(|c| c.key() == s)
            .ok_or_else(|| format!("unknown classifier {s:?} (expected mdc, mlp_bp or mlp_lm)"))
    }
}

/// Rendering parameters of a generated dataset. The seed is the
/// experiment seed and the per-class count defaults to train + test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSource {
    pub canvas: usize,
    pub stroke_width: usize,
    pub jitter_translate: usize,
    pub jitter_stroke: usize,
    pub samples_per_class: Option<usize>,
}

impl Default for SyntheticSource {
    fn default() -> Self {
        let g = GlyphGenConfig::default();
        Self {
            canvas: g.canvas,
            stroke_width: g.stroke_width,
            jitter_translate: g.jitter_translate,
            jitter_stroke: g.jitter_stroke,
            samples_per_class: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    /// Images named `<LABEL>_<id>.<ext>` in one directory.
    Directory(PathBuf),
    Synthetic(SyntheticSource),
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Synthetic(SyntheticSource::default())
    }
}

/// Samples per class; the first `train` of each class (in dataset order)
/// are used for training and the next `test` for testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Split {
    pub train: usize,
    pub test: usize,
}

impl Default for Split {
    fn default() -> Self {
        Split { train: 3, test: 1 }
    }
}

/// Network width and optimizer settings; initialization uses the experiment seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpSettings {
    pub hidden: usize,
    /// Standardize each input feature with training-set mean and deviation.
    pub standardize: bool,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub max_iterations: usize,
    pub target_mse: f64,
    pub mu0: f64,
    pub mu_factor: f64,
    pub mu_max: f64,
}

impl Default for MlpSettings {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            hidden: 10,
            standardize: true,
            learning_rate: t.learning_rate,
            max_epochs: t.max_epochs,
            max_iterations: t.max_iterations,
            target_mse: t.target_mse,
            mu0: t.mu0,
            mu_factor: t.mu_factor,
            mu_max: t.mu_max,
        }
    }
}

impl MlpSettings {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            seed,
            learning_rate: self.learning_rate,
            max_epochs: self.max_epochs,
            max_iterations: self.max_iterations,
            target_mse: self.target_mse,
            mu0: self.mu0,
            mu_factor: self.mu_factor,
            mu_max: self.mu_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub alphabet: Vec<String>,
    pub split: Split,
    pub extractors: Vec<ExtractorKind>,
    pub classifiers: Vec<ClassifierKind>,
    pub mlp: MlpSettings,
    pub seed: u64,
    /// Treat light pixels as ink.
    pub light_foreground: bool,
    /// Where reports are written; not part of the experiment itself, so
    /// reports leave it out.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSource::default(),
            alphabet: latin_uppercase(),
            split: Split::default(),
            extractors: ExtractorKind::ALL.to_vec(),
            classifiers: vec![ClassifierKind::Mdc],
            mlp: MlpSettings::default(),
            seed: 0,
            light_foreground: false,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HcrError::io(path, e))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| HcrError::Json { path: path.to_path_buf(), source: e })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(HcrError::Usage(format!("invalid config: {m}")));
        if self.split.train == 0 || self.split.test == 0 {
            return usage("split.train and split.test must be >= 1".into());
        }
        if self.extractors.is_empty() {
            return usage("no extractors requested".into());
        }
        if self.classifiers.is_empty() {
            return usage("no classifiers requested".into());
        }
        if self.alphabet.is_empty() {
            return usage("alphabet is empty".into());
        }
        for (i, a) in self.alphabet.iter().enumerate() {
            if self.alphabet[..i].contains(a) {
                return usage(format!("duplicate alphabet entry {a:?}"));
            }
        }
        if self.mlp.hidden == 0 {
            return usage("mlp.hidden must be >= 1".into());
        }
        self.mlp.train_config(self.seed).validate().map_err(|e| HcrError::core("mlp", e))?;
        if let DatasetSource::Synthetic(_) = self.dataset {
            let glyphs = self.glyph_config().expect("synthetic source");
            glyphs.validate().map_err(|e| HcrError::core("dataset.synthetic", e))?;
            if glyphs.samples_per_class < self.split.train + self.split.test {
                return Err(HcrError::Data(format!(
                    "insufficient samples: split needs {} per class, synthetic source renders {}",
                    self.split.train + self.split.test,
                    glyphs.samples_per_class
                )));
            }
        }
        Ok(())
    }

    /// Generator settings for a synthetic source.
    pub fn glyph_config(&self) -> Option<GlyphGenConfig> {
        match &self.dataset {
            DatasetSource::Synthetic(s) => Some(GlyphGenConfig {
                canvas: s.canvas,
                stroke_width: s.stroke_width,
                jitter_translate: s.jitter_translate,
                jitter_stroke: s.jitter_stroke,
                samples_per_class: s.samples_per_class.unwrap_or(self.split.train + self.split.test),
                seed: self.seed,
            }),
            DatasetSource::Directory(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"dataset": {"synthetic": {"jitter_translate": 1}}, "split": {"train": 3, "test": 2},
                "extractors": ["proposed"], "classifiers": ["mdc", "mlp_lm"], "seed": 7}"#,
        )
        .unwrap();
        assert_eq!(cfg.extractors, vec![ExtractorKind::Proposed]);
        assert_eq!(cfg.classifiers, vec![ClassifierKind::Mdc, ClassifierKind::MlpLm]);
        let g = cfg.glyph_config().unwrap();
        assert_eq!((g.jitter_translate, g.samples_per_class, g.seed), (1, 5, 7));
        let dir: ExperimentConfig = serde_json::from_str(r#"{"dataset": {"directory": "data/chars"}}"#).unwrap();
        assert_eq!(dir.dataset, DatasetSource::Directory(PathBuf::from("data/chars")));
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            ExperimentConfig { split: Split { train: 0, test: 1 }, ..Default::default() },
            ExperimentConfig { extractors: vec![], ..Default::default() },
            ExperimentConfig { classifiers: vec![], ..Default::default() },
            ExperimentConfig { alphabet: vec!["A".into(), "A".into()], ..Default::default() },
            ExperimentConfig { mlp: MlpSettings { mu_factor: 0.5, ..Default::default() }, ..Default::default() },
        ];
        for cfg in bad {
            assert_eq!(cfg.validate().unwrap_err().exit_code(), 1, "{cfg:?}");
        }
        let short = ExperimentConfig {
            dataset: DatasetSource::Synthetic(SyntheticSource { samples_per_class: Some(3), ..Default::default() }),
            split: Split { train: 5, test: 1 },
            ..Default::default()
        };
        assert!(short.validate().unwrap_err().to_string().contains("insufficient samples"));
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"sede": 1}"#).is_err());
        assert!("svm".parse::<ClassifierKind>().is_err());
    }
}
