use std::collections::HashSet;

use hcr::config::{DatasetSource, MlpSettings, SyntheticSource};
use hcr::harness::{prepare_data, NOT_IMPLEMENTED};
use hcr::report::{read_report, write_report, Cell};
use hcr::{compare_extractors, compare_networks, per_character_report, ClassifierKind, ExperimentConfig, Split};
use hcr_core::features::ExtractorKind;

fn letters(s: &str) -> Vec<String> {
    s.chars().map(String::from).collect()
}

fn jittered(train: usize, test: usize) -> ExperimentConfig {
    ExperimentConfig {
        dataset: DatasetSource::Synthetic(SyntheticSource {
            jitter_translate: 1,
            jitter_stroke: 1,
            ..Default::default()
        }),
        split: Split { train, test },
        seed: 3,
        ..Default::default()
    }
}

#[test]
fn splits_are_disjoint_and_sized_per_class() {
    let data = prepare_data(&jittered(3, 2)).unwrap();
    assert_eq!((data.train.len(), data.test.len()), (78, 52));
    let train: HashSet<_> = data.train.iter().map(|s| s.name.clone()).collect();
    assert!(data.test.iter().all(|s| !train.contains(&s.name)));
    for label in 0..26 {
        assert_eq!(data.train.iter().filter(|s| s.label == label).count(), 3);
        assert_eq!(data.test.iter().filter(|s| s.label == label).count(), 2);
    }
}

#[test]
fn accuracy_is_the_confusion_trace_over_its_sum() {
    let report = compare_extractors(&jittered(3, 2)).unwrap();
    assert_eq!(report.results.len(), 4);
    for r in &report.results {
        let n = r.confusion.len();
        let trace: usize = (0..n).map(|i| r.confusion[i][i]).sum();
        let sum: usize = r.confusion.iter().flatten().sum();
        assert_eq!(sum, r.test_count);
        assert_eq!(r.accuracy, trace as f64 / sum as f64);
        for (i, c) in r.per_character.iter().enumerate() {
            assert_eq!(c.correct, r.confusion[i][i]);
            assert_eq!(c.total, r.confusion[i].iter().sum::<usize>());
        }
    }
    let table = report.tables.iter().find(|t| t.id == "extractor_accuracy").unwrap();
    let rows: Vec<&str> = table.rows.iter().map(|r| r.label.as_str()).collect();
    assert_eq!(rows, ["Gradient", "Zone-based hybrid", "Geometric", "Proposed"]);
    assert_eq!(table.cell("Proposed", "reference_percent").and_then(Cell::as_number), Some(88.46));

    let chars = report.tables.iter().find(|t| t.id == "per_character").unwrap();
    let rows: Vec<&str> = chars.rows.iter().map(|r| r.label.as_str()).collect();
    assert_eq!(rows, ["Geometric", "Zone-based hybrid", "Gradient", "Proposed"]);
    assert_eq!(chars.cell("Gradient", "L_reference_percent").and_then(Cell::as_number), Some(70.0));
    assert!(per_character_report(&report, &letters("?")).is_err());
}

#[test]
fn report_round_trips_through_disk() {
    let report = compare_extractors(&ExperimentConfig { alphabet: letters("ALZ"), ..Default::default() }).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_report(&report, dir.path()).unwrap();
    assert_eq!(read_report(&dir.path().join("report.json")).unwrap(), report);
    let csv = std::fs::read_to_string(dir.path().join("tables.csv")).unwrap();
    assert!(csv.starts_with("table_id,row,column,value\n"));
    assert!(csv.contains("extractor_accuracy,Proposed,accuracy_percent,100"));
}

#[test]
fn network_table_lists_both_trainers_and_a_cnn_placeholder() {
    let cfg = ExperimentConfig {
        alphabet: letters("LOTX"),
        split: Split { train: 2, test: 1 },
        extractors: vec![ExtractorKind::Gradient],
        mlp: MlpSettings { hidden: 4, max_epochs: 50, max_iterations: 5, ..Default::default() },
        ..Default::default()
    };
    let report = compare_networks(&cfg).unwrap();
    assert!(report.result(ExtractorKind::Gradient, ClassifierKind::MlpLm).unwrap().training.is_some());
    let table = report.tables.iter().find(|t| t.id == "network_accuracy_gradient").unwrap();
    let rows: Vec<&str> = table.rows.iter().map(|r| r.label.as_str()).collect();
    assert_eq!(rows, ["MLP BP", "MLP LM", "CNN"]);
    for row in &table.rows {
        assert_eq!(row.cells[0], Cell::Count(8));
        assert_eq!(row.cells[1], Cell::Count(4));
    }
    assert_eq!(table.cell("CNN", "accuracy_percent"), Some(&Cell::Text(NOT_IMPLEMENTED.into())));
    assert_eq!(table.cell("MLP LM", "reference_percent").and_then(Cell::as_number), Some(90.3846));
}

#[test]
fn too_few_samples_is_a_data_error() {
    let cfg = ExperimentConfig {
        dataset: DatasetSource::Synthetic(SyntheticSource { samples_per_class: Some(3), ..Default::default() }),
        ..Default::default()
    };
    let err = cfg.validate().unwrap_err();
    assert!(err.to_string().contains("insufficient samples"), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn directory_datasets_exclude_blank_images() {
    let dir = tempfile::tempdir().unwrap();
    let gen = hcr_core::glyph::GlyphGenConfig { samples_per_class: 2, ..Default::default() };
    let ds = hcr_core::glyph::generate_glyphs(&gen, &letters("IO")).unwrap();
    for (i, (img, label)) in ds.samples().iter().enumerate() {
        let name = format!("{}_{i}.pgm", ["I", "O"][*label]);
        hcr::io::save_pgm(img, &dir.path().join(name)).unwrap();
    }
    let blank = hcr_core::image::GrayImage::filled(32, 32, 255).unwrap();
    hcr::io::save_pgm(&blank, &dir.path().join("O_9.pgm")).unwrap();
    let cfg = ExperimentConfig {
        dataset: DatasetSource::Directory(dir.path().to_path_buf()),
        alphabet: letters("IO"),
        split: Split { train: 1, test: 1 },
        ..Default::default()
    };
    let data = prepare_data(&cfg).unwrap();
    assert_eq!(data.summary.blank_excluded, ["O_9.pgm"]);
    assert_eq!((data.train.len(), data.test.len()), (2, 2));

    let greedy = ExperimentConfig { split: Split { train: 2, test: 1 }, ..cfg };
    let err = prepare_data(&greedy).unwrap_err();
    assert!(err.to_string().contains("insufficient samples"), "{err}");
    assert_eq!(err.exit_code(), 2);
}
