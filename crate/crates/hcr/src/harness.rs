//! Experiment pipeline: load, split, preprocess, extract, classify, report.

use hcr_core::classify::{fit_mdc, predict_mdc, MdcModel};
use hcr_core::features::{extract, ExtractorKind, FeatureVector};
use hcr_core::glyph::generate_glyphs;
use hcr_core::mlp::{init_mlp, predict_mlp, train_bp, train_lm, MlpModel, TrainTrace, TrainingSet};
use hcr_core::preprocess::{preprocess, Polarity, Preprocessed};
use hcr_core::Error as CoreError;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ClassifierKind, DatasetSource, ExperimentConfig};
use crate::error::{HcrError, Result};
use crate::io::ingest_dataset;
use crate::report::{Cell, Table, TableRow};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One preprocessed character and the name it is reported under.
#[derive(Debug, Clone)]
pub struct Sample {
    pub name: String,
    pub label: usize,
    pub pre: Preprocessed,
}

/// Train and test samples after blank images were set aside.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub alphabet: Vec<String>,
    pub provenance: String,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    pub summary: DatasetSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub provenance: String,
    pub alphabet: Vec<String>,
    /// Images loaded or generated, blanks included.
    pub samples: usize,
    pub train_count: usize,
    pub test_count: usize,
    pub skipped_files: Vec<String>,
    /// Images without foreground, left out of both splits.
    pub blank_excluded: Vec<String>,
}

fn polarity(cfg: &ExperimentConfig) -> Polarity {
    if cfg.light_foreground {
        Polarity::LightForeground
    } else {
        Polarity::DarkForeground
    }
}

/// Loads or generates the dataset, preprocesses every image and splits
/// each class into its first `train` and next `test` usable samples.
pub fn prepare_data(cfg: &ExperimentConfig) -> Result<PreparedData> {
    cfg.validate()?;
    let (dataset, names, skipped) = match &cfg.dataset {
        DatasetSource::Directory(dir) => {
            let ingested = ingest_dataset(dir, &cfg.alphabet)?;
            (ingested.dataset, ingested.files, ingested.skipped)
        }
        DatasetSource::Synthetic(_) => {
            let glyphs = cfg.glyph_config().expect("synthetic source");
            let dataset =
                generate_glyphs(&glyphs, &cfg.alphabet).map_err(|e| HcrError::core("dataset.synthetic", e))?;
            let names = synthetic_names(dataset.samples().iter().map(|s| s.1), &cfg.alphabet);
            (dataset, names, Vec::new())
        }
    };

    let polarity = polarity(cfg);
    let processed: Vec<_> = dataset.samples().par_iter().map(|(img, _)| preprocess(img, polarity)).collect();

    let classes = cfg.alphabet.len();
    let mut by_class: Vec<Vec<Sample>> = vec![Vec::new(); classes];
    let mut blank_excluded = Vec::new();
    for ((result, &(_, label)), name) in processed.into_iter().zip(dataset.samples()).zip(&names) {
        match result {
            Ok(pre) => by_class[label].push(Sample { name: name.clone(), label, pre }),
            Err(CoreError::BlankImage) => blank_excluded.push(name.clone()),
            Err(e) => return Err(HcrError::core(name.clone(), e)),
        }
    }

    let need = cfg.split.train + cfg.split.test;
    let mut train = Vec::with_capacity(classes * cfg.split.train);
    let mut test = Vec::with_capacity(classes * cfg.split.test);
    for (class, mut samples) in by_class.into_iter().enumerate() {
        if samples.len() < need {
            return Err(HcrError::Data(format!(
                "insufficient samples for class {:?}: need {need}, found {} usable",
                cfg.alphabet[class],
                samples.len()
            )));
        }
        samples.truncate(need);
        test.extend(samples.split_off(cfg.split.train));
        train.extend(samples);
    }
    let summary = DatasetSummary {
        provenance: dataset.provenance().to_string(),
        alphabet: cfg.alphabet.clone(),
        samples: dataset.len(),
        train_count: train.len(),
        test_count: test.len(),
        skipped_files: skipped,
        blank_excluded,
    };
    Ok(PreparedData { alphabet: cfg.alphabet.clone(), provenance: summary.provenance.clone(), train, test, summary })
}

/// `<LABEL>_<nnnn>` names numbered per class, matching `gen-synthetic` output.
pub fn synthetic_names(labels: impl Iterator<Item = usize>, alphabet: &[String]) -> Vec<String> {
    let mut seen = vec![0usize; alphabet.len()];
    labels
        .map(|l| {
            seen[l] += 1;
            format!("{}_{:04}", alphabet[l], seen[l])
        })
        .collect()
}

/// Feature vectors of `samples` in order, computed in parallel.
pub fn extract_all(kind: ExtractorKind, samples: &[Sample]) -> Result<Vec<(FeatureVector, usize)>> {
    samples
        .par_iter()
        .map(|s| extract(kind, &s.pre).map(|f| (f, s.label)).map_err(|e| HcrError::core(s.name.clone(), e)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "classifier", rename_all = "snake_case")]
pub enum TrainedModel {
    Mdc(MdcModel),
    Mlp {
        trainer: ClassifierKind,
        extractor: ExtractorKind,
        alphabet: Vec<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        scaler: Option<Standardizer>,
        model: MlpModel,
    },
}

/// Per-feature affine map `(x - mean) * scale` fitted on training vectors;
/// features that are constant in training map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[&[f64]]) -> Self {
        let dim = rows.first().map_or(0, |r| r.len());
        let n = rows.len() as f64;
        let mean: Vec<f64> = (0..dim).map(|d| rows.iter().map(|r| r[d]).sum::<f64>() / n).collect();
        let scale = (0..dim)
            .map(|d| {
                let var = rows.iter().map(|r| (r[d] - mean[d]).powi(2)).sum::<f64>() / n;
                if var > 1e-24 {
                    1.0 / var.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) * s).collect()
    }
}

impl TrainedModel {
    pub fn extractor(&self) -> ExtractorKind {
        match self {
            TrainedModel::Mdc(m) => m.extractor,
            TrainedModel::Mlp { extractor, .. } => *extractor,
        }
    }

    pub fn alphabet(&self) -> &[String] {
        match self {
            TrainedModel::Mdc(m) => &m.alphabet,
            TrainedModel::Mlp { alphabet, .. } => alphabet,
        }
    }

    pub fn predict(&self, x: &FeatureVector) -> hcr_core::Result<usize> {
        match self {
            TrainedModel::Mdc(m) => predict_mdc(m, x),
            TrainedModel::Mlp { model, scaler: Some(scaler), .. } => predict_mlp(model, &scaler.apply(&x.values)),
            TrainedModel::Mlp { model, scaler: None, .. } => predict_mlp(model, &x.values),
        }
    }
}

/// Fits one classifier. MLP models are `[dim, hidden, classes]` networks
/// initialized from the experiment seed and trained on one-hot targets,
/// optionally on standardized inputs.
pub fn fit_classifier(
    kind: ClassifierKind,
    train: &[(FeatureVector, usize)],
    alphabet: &[String],
    cfg: &ExperimentConfig,
) -> Result<(TrainedModel, Option<TrainTrace>)> {
    let first = train.first().ok_or_else(|| HcrError::Data("no training samples".into()))?;
    let extractor = first.0.extractor;
    let context = format!("{} / {}", extractor, kind);
    let core = |e| HcrError::core(context.clone(), e);
    if kind == ClassifierKind::Mdc {
        return Ok((TrainedModel::Mdc(fit_mdc(train, alphabet).map_err(core)?), None));
    }
    let model = init_mlp([first.0.len(), cfg.mlp.hidden, alphabet.len()], cfg.seed).map_err(core)?;
    let scaler = cfg.mlp.standardize.then(|| {
        let rows: Vec<&[f64]> = train.iter().map(|(f, _)| f.values.as_slice()).collect();
        Standardizer::fit(&rows)
    });
    let inputs =
        train.iter().map(|(f, _)| scaler.as_ref().map_or_else(|| f.values.clone(), |s| s.apply(&f.values))).collect();
    let labels: Vec<usize> = train.iter().map(|(_, l)| *l).collect();
    let data = TrainingSet::one_hot(inputs, &labels, alphabet.len()).map_err(core)?;
    let train_cfg = cfg.mlp.train_config(cfg.seed);
    let (model, trace) = match kind {
        ClassifierKind::MlpBp => train_bp(&model, &data, &train_cfg),
        _ => train_lm(&model, &data, &train_cfg),
    }
    .map_err(core)?;
    Ok((TrainedModel::Mlp { trainer: kind, extractor, alphabet: alphabet.to_vec(), scaler, model }, Some(trace)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterAccuracy {
    pub character: String,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub iterations: usize,
    pub initial_mse: f64,
    pub final_mse: f64,
}

/// Test-set outcome of one (extractor, classifier) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub extractor: ExtractorKind,
    pub classifier: ClassifierKind,
    pub train_count: usize,
    pub test_count: usize,
    /// Fraction of test samples classified correctly.
    pub accuracy: f64,
    pub per_character: Vec<CharacterAccuracy>,
    /// `confusion[true][predicted]` counts.
    pub confusion: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainingSummary>,
}

impl RunResult {
    pub fn from_predictions(
        extractor: ExtractorKind,
        classifier: ClassifierKind,
        alphabet: &[String],
        train_count: usize,
        truth_and_predicted: &[(usize, usize)],
        trace: Option<&TrainTrace>,
    ) -> Self {
        let n = alphabet.len();
        let mut confusion = vec![vec![0usize; n]; n];
        for &(t, p) in truth_and_predicted {
            confusion[t][p] += 1;
        }
        let correct: usize = (0..n).map(|i| confusion[i][i]).sum();
        let total = truth_and_predicted.len();
        let per_character = alphabet
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let row_total: usize = confusion[i].iter().sum();
                CharacterAccuracy {
                    character: c.clone(),
                    correct: confusion[i][i],
                    total: row_total,
                    accuracy: ratio(confusion[i][i], row_total),
                }
            })
            .collect();
        let training = trace.map(|t| TrainingSummary {
            iterations: t.records.last().map_or(0, |r| r.iteration),
            initial_mse: t.initial_mse().unwrap_or(0.0),
            final_mse: t.final_mse().unwrap_or(0.0),
        });
        RunResult {
            extractor,
            classifier,
            train_count,
            test_count: total,
            accuracy: ratio(correct, total),
            per_character,
            confusion,
            training,
        }
    }

    pub fn character(&self, name: &str) -> Option<&CharacterAccuracy> {
        self.per_character.iter().find(|c| c.character == name)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub toolkit_version: String,
    pub config: ExperimentConfig,
    pub dataset: DatasetSummary,
    pub results: Vec<RunResult>,
    pub tables: Vec<Table>,
}

impl EvalReport {
    pub fn result(&self, extractor: ExtractorKind, classifier: ClassifierKind) -> Option<&RunResult> {
        self.results.iter().find(|r| r.extractor == extractor && r.classifier == classifier)
    }
}

/// Runs every requested (extractor, classifier) pair. Features are
/// extracted once per extractor and shared by all classifiers.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<EvalReport> {
    let data = prepare_data(cfg)?;
    let mut results = Vec::new();
    for &extractor in &cfg.extractors {
        let train = extract_all(extractor, &data.train)?;
        let test = extract_all(extractor, &data.test)?;
        for &classifier in &cfg.classifiers {
            let (model, trace) = fit_classifier(classifier, &train, &data.alphabet, cfg)?;
            let pairs = test
                .iter()
                .map(|(f, label)| model.predict(f).map(|p| (*label, p)))
                .collect::<hcr_core::Result<Vec<_>>>()
                .map_err(|e| HcrError::core(format!("{extractor} / {classifier}"), e))?;
            results.push(RunResult::from_predictions(
                extractor,
                classifier,
                &data.alphabet,
                train.len(),
                &pairs,
                trace.as_ref(),
            ));
        }
    }
    let mut echo = cfg.clone();
    echo.output_dir = None;
    let mut report = EvalReport {
        toolkit_version: TOOLKIT_VERSION.to_string(),
        config: echo,
        dataset: data.summary,
        results,
        tables: Vec::new(),
    };
    report.tables.push(accuracy_table(&report));
    Ok(report)
}

/// Display name of an extractor in comparison tables.
pub fn extractor_title(kind: ExtractorKind) -> &'static str {
    match kind {
        ExtractorKind::Proposed => "Proposed",
        ExtractorKind::Geometric => "Geometric",
        ExtractorKind::Hybrid => "Zone-based hybrid",
        ExtractorKind::Gradient => "Gradient",
    }
}

fn percent(fraction: f64) -> Cell {
    Cell::Number(fraction * 100.0)
}

/// Every result of a report as one row.
pub fn accuracy_table(report: &EvalReport) -> Table {
    let rows = report
        .results
        .iter()
        .map(|r| TableRow {
            label: format!("{} / {}", extractor_title(r.extractor), r.classifier.title()),
            cells: vec![Cell::Count(r.train_count), Cell::Count(r.test_count), percent(r.accuracy)],
        })
        .collect();
    Table::new(
        "accuracy",
        "Test accuracy per extractor and classifier",
        &["train_count", "test_count", "accuracy_percent"],
        rows,
    )
}

/// Row order of the extractor comparison.
pub const EXTRACTOR_TABLE_ORDER: [ExtractorKind; 4] =
    [ExtractorKind::Gradient, ExtractorKind::Hybrid, ExtractorKind::Geometric, ExtractorKind::Proposed];

/// Published MDC accuracies (percent) for the extractor comparison.
pub fn reference_extractor_accuracy(kind: ExtractorKind) -> f64 {
    match kind {
        ExtractorKind::Gradient => 80.77,
        ExtractorKind::Hybrid => 84.61,
        ExtractorKind::Geometric => 80.77,
        ExtractorKind::Proposed => 88.46,
    }
}

/// Published per-character MDC accuracies (percent) for A, L and Z.
pub fn reference_character_accuracy(kind: ExtractorKind, character: &str) -> Option<f64> {
    let [a, l, z] = match kind {
        ExtractorKind::Geometric => [90.0, 80.0, 100.0],
        ExtractorKind::Hybrid => [80.0, 100.0, 90.0],
        ExtractorKind::Gradient => [100.0, 70.0, 90.0],
        ExtractorKind::Proposed => [100.0, 70.0, 100.0],
    };
    match character {
        "A" => Some(a),
        "L" => Some(l),
        "Z" => Some(z),
        _ => None,
    }
}

/// Row order of the per-character comparison.
pub const CHARACTER_TABLE_ORDER: [ExtractorKind; 4] =
    [ExtractorKind::Geometric, ExtractorKind::Hybrid, ExtractorKind::Gradient, ExtractorKind::Proposed];

/// Published network accuracies (percent) as (BP, LM, CNN).
pub fn reference_network_accuracy(kind: ExtractorKind) -> Option<[f64; 3]> {
    match kind {
        ExtractorKind::Geometric => Some([86.5385, 88.4615, 88.4615]),
        ExtractorKind::Gradient => Some([84.6154, 90.3846, 92.3077]),
        _ => None,
    }
}

/// MDC accuracy of all four extractors, in comparison-table order.
pub fn compare_extractors(cfg: &ExperimentConfig) -> Result<EvalReport> {
    let cfg = ExperimentConfig {
        extractors: EXTRACTOR_TABLE_ORDER.to_vec(),
        classifiers: vec![ClassifierKind::Mdc],
        ..cfg.clone()
    };
    let mut report = run_experiment(&cfg)?;
    report.tables.push(extractor_table(&report)?);
    let chars: Vec<String> =
        ["A", "L", "Z"].into_iter().filter(|c| cfg.alphabet.iter().any(|a| a == c)).map(String::from).collect();
    if !chars.is_empty() {
        report.tables.push(per_character_report(&report, &chars)?);
    }
    Ok(report)
}

fn extractor_table(report: &EvalReport) -> Result<Table> {
    let mut rows = Vec::new();
    for kind in EXTRACTOR_TABLE_ORDER {
        let r = report
            .result(kind, ClassifierKind::Mdc)
            .ok_or_else(|| HcrError::Data(format!("no MDC result for extractor {kind}")))?;
        rows.push(TableRow {
            label: extractor_title(kind).to_string(),
            cells: vec![
                Cell::Text(ClassifierKind::Mdc.title().to_string()),
                percent(r.accuracy),
                Cell::Number(reference_extractor_accuracy(kind)),
            ],
        });
    }
    Ok(Table::new(
        "extractor_accuracy",
        "Accuracy of the feature extraction methods",
        &["classifier", "accuracy_percent", "reference_percent"],
        rows,
    ))
}

/// MDC accuracy on individual characters for each extractor in the report.
pub fn per_character_report(report: &EvalReport, chars: &[String]) -> Result<Table> {
    for c in chars {
        if !report.dataset.alphabet.contains(c) {
            return Err(HcrError::Usage(format!("unknown character {c:?}")));
        }
    }
    let mut columns = vec!["classifier".to_string()];
    columns.extend(chars.iter().map(|c| format!("{c}_percent")));
    columns.extend(chars.iter().map(|c| format!("{c}_reference_percent")));
    let mut rows = Vec::new();
    for kind in CHARACTER_TABLE_ORDER {
        let Some(r) = report.result(kind, ClassifierKind::Mdc) else { continue };
        let mut cells = vec![Cell::Text(ClassifierKind::Mdc.title().to_string())];
        cells.extend(chars.iter().map(|c| percent(r.character(c).map_or(0.0, |a| a.accuracy))));
        cells.extend(
            chars.iter().map(|c| reference_character_accuracy(kind, c).map_or(Cell::Text(String::new()), Cell::Number)),
        );
        rows.push(TableRow { label: extractor_title(kind).to_string(), cells });
    }
    Ok(Table { id: "per_character".into(), title: "Accuracy on individual characters".into(), columns, rows })
}

/// Both MLP trainers on every configured extractor, with a placeholder
/// row for the convolutional network.
pub fn compare_networks(cfg: &ExperimentConfig) -> Result<EvalReport> {
    let cfg = ExperimentConfig { classifiers: vec![ClassifierKind::MlpBp, ClassifierKind::MlpLm], ..cfg.clone() };
    let mut report = run_experiment(&cfg)?;
    for &kind in &cfg.extractors {
        let table = network_table(&report, kind)?;
        report.tables.push(table);
    }
    Ok(report)
}

pub const NOT_IMPLEMENTED: &str = "not implemented";

fn network_table(report: &EvalReport, kind: ExtractorKind) -> Result<Table> {
    let reference = reference_network_accuracy(kind);
    let reference_cell = |i: usize| reference.map_or(Cell::Text(String::new()), |r| Cell::Number(r[i]));
    let mut rows = Vec::new();
    let (mut train_count, mut test_count) = (report.dataset.train_count, report.dataset.test_count);
    for (i, trainer) in [ClassifierKind::MlpBp, ClassifierKind::MlpLm].into_iter().enumerate() {
        let r = report
            .result(kind, trainer)
            .ok_or_else(|| HcrError::Data(format!("no {trainer} result for extractor {kind}")))?;
        (train_count, test_count) = (r.train_count, r.test_count);
        rows.push(TableRow {
            label: trainer.title().to_string(),
            cells: vec![Cell::Count(r.train_count), Cell::Count(r.test_count), percent(r.accuracy), reference_cell(i)],
        });
    }
    rows.push(TableRow {
        label: "CNN".to_string(),
        cells: vec![
            Cell::Count(train_count),
            Cell::Count(test_count),
            Cell::Text(NOT_IMPLEMENTED.to_string()),
            reference_cell(2),
        ],
    });
    Ok(Table::new(
        &format!("network_accuracy_{kind}"),
        &format!("Neural network accuracy with {} features", extractor_title(kind).to_lowercase()),
        &["train_count", "test_count", "accuracy_percent", "reference_percent"],
        rows,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_bookkeeping() {
        let alphabet: Vec<String> = ["A", "B", "C"].map(String::from).to_vec();
        let pairs = [(0, 0), (0, 1), (1, 1), (2, 2), (2, 0)];
        let r = RunResult::from_predictions(ExtractorKind::Proposed, ClassifierKind::Mdc, &alphabet, 6, &pairs, None);
        assert_eq!(r.confusion, vec![vec![1, 1, 0], vec![0, 1, 0], vec![1, 0, 1]]);
        assert_eq!(r.accuracy, 3.0 / 5.0);
        assert_eq!(r.character("A").unwrap().accuracy, 0.5);
        assert_eq!(r.character("B").unwrap().accuracy, 1.0);
        assert_eq!(r.test_count, 5);
    }

    #[test]
    fn synthetic_names_count_per_class() {
        let alphabet: Vec<String> = ["A", "B"].map(String::from).to_vec();
        assert_eq!(synthetic_names([0, 0, 1].into_iter(), &alphabet), ["A_0001", "A_0002", "B_0001"]);
    }

    #[test]
    fn standardizer() {
        let rows: [&[f64]; 3] = [&[1.0, 5.0], &[2.0, 5.0], &[3.0, 5.0]];
        let s = Standardizer::fit(&rows);
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.scale[1], 0.0);
        let z = s.apply(&[3.0, 7.0]);
        assert!((z[0] - 1.0 / (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(z[1], 0.0);
    }

    #[test]
    fn reference_lookups() {
        assert_eq!(reference_character_accuracy(ExtractorKind::Hybrid, "L"), Some(100.0));
        assert_eq!(reference_character_accuracy(ExtractorKind::Hybrid, "Q"), None);
        assert!(reference_network_accuracy(ExtractorKind::Proposed).is_none());
    }
}
