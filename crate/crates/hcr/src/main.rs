use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use hcr::config::{ClassifierKind, ExperimentConfig};
use hcr::error::{HcrError, Result};
use hcr::harness::{self, EvalReport, RunResult, TrainedModel};
use hcr::io::{load_image, save_pgm};
use hcr::report::{read_report, trace_to_csv, write_report};
use hcr_core::features::{extract, ExtractorKind};
use hcr_core::glyph::{generate_glyphs, latin_uppercase, GlyphGenConfig};
use hcr_core::preprocess::{preprocess, Polarity};

#[derive(Debug, Parser)]
#[command(
    name = "hcr",
    version,
    about = "Handwritten character recognition: preprocessing, zone features, MDC and MLP classifiers"
)]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, or output file for `extract`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render synthetic glyphs as `<LABEL>_<nnnn>.pgm` files.
    GenSynthetic {
        #[arg(long, default_value_t = 32)]
        canvas: usize,
        #[arg(long, default_value_t = 2)]
        stroke_width: usize,
        #[arg(long, default_value_t = 0)]
        jitter_translate: usize,
        #[arg(long, default_value_t = 0)]
        jitter_stroke: usize,
        #[arg(long, default_value_t = 4)]
        samples_per_class: usize,
        /// Comma-separated class names; defaults to A-Z.
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Binarize, thin and crop one image.
    Preprocess {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_skeleton: PathBuf,
        #[arg(long)]
        out_binary: PathBuf,
        #[arg(long)]
        light_foreground: bool,
    },
    /// Feature vector of one image as CSV or JSON, chosen by the `--out` extension.
    Extract {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        extractor: ExtractorKind,
        #[arg(long)]
        light_foreground: bool,
    },
    /// Fit a classifier on the training split and save it as `model.json`.
    Train {
        #[arg(long)]
        extractor: ExtractorKind,
        #[arg(long, default_value = "mdc")]
        classifier: ClassifierKind,
    },
    /// Run the configured experiment, or score a saved model on the test split.
    Evaluate {
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// MDC accuracy of every extractor, overall and per character.
    CompareExtractors,
    /// MLP accuracy with backpropagation and Levenberg-Marquardt training.
    CompareNetworks,
    /// Print the tables of an existing report.
    Show { report: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn experiment_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn polarity(light: bool) -> Polarity {
    if light {
        Polarity::LightForeground
    } else {
        Polarity::DarkForeground
    }
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::GenSynthetic {
            canvas,
            stroke_width,
            jitter_translate,
            jitter_stroke,
            samples_per_class,
            alphabet,
        } => {
            let alphabet = match alphabet {
                Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
                None => latin_uppercase(),
            };
            let cfg = GlyphGenConfig {
                canvas: *canvas,
                stroke_width: *stroke_width,
                jitter_translate: *jitter_translate,
                jitter_stroke: *jitter_stroke,
                samples_per_class: *samples_per_class,
                seed: cli.seed.unwrap_or(0),
            };
            let dataset = generate_glyphs(&cfg, &alphabet).map_err(|e| HcrError::core("gen-synthetic", e))?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("synthetic"));
            fs::create_dir_all(&dir).map_err(|e| HcrError::io(&dir, e))?;
            let names = harness::synthetic_names(dataset.samples().iter().map(|s| s.1), &alphabet);
            for ((img, _), name) in dataset.samples().iter().zip(&names) {
                save_pgm(img, &dir.join(format!("{name}.pgm")))?;
            }
            eprintln!("wrote {} images to {}", dataset.len(), dir.display());
        }
        Command::Preprocess { input, out_skeleton, out_binary, light_foreground } => {
            let img = load_image(input)?;
            let pre = preprocess(&img, polarity(*light_foreground))
                .map_err(|e| HcrError::core(input.display().to_string(), e))?;
            save_pgm(&pre.skeleton.image().to_gray(0, 255), out_skeleton)?;
            save_pgm(&pre.binary.to_gray(0, 255), out_binary)?;
            eprintln!(
                "threshold {}, box ({}, {})-({}, {}), {} skeleton pixels",
                pre.threshold,
                pre.bbox.x0,
                pre.bbox.y0,
                pre.bbox.x1,
                pre.bbox.y1,
                pre.skeleton.image().count()
            );
        }
        Command::Extract { input, extractor, light_foreground } => {
            let img = load_image(input)?;
            let pre = preprocess(&img, polarity(*light_foreground))
                .map_err(|e| HcrError::core(input.display().to_string(), e))?;
            let fv = extract(*extractor, &pre).map_err(|e| HcrError::core(input.display().to_string(), e))?;
            let is_json = cli.out.as_deref().and_then(Path::extension).is_some_and(|e| e == "json");
            let text = if is_json {
                let mut s = serde_json::to_string(&fv).expect("feature vectors serialize");
                s.push('\n');
                s
            } else {
                let row: Vec<String> = fv.values.iter().map(f64::to_string).collect();
                format!("{}\n", row.join(","))
            };
            match &cli.out {
                Some(path) => fs::write(path, text).map_err(|e| HcrError::io(path, e))?,
                None => print!("{text}"),
            }
        }
        Command::Train { extractor, classifier } => {
            let cfg = experiment_config(&cli)?;
            let data = harness::prepare_data(&cfg)?;
            let train = harness::extract_all(*extractor, &data.train)?;
            let (model, trace) = harness::fit_classifier(*classifier, &train, &data.alphabet, &cfg)?;
            let dir = output_dir(&cfg);
            fs::create_dir_all(&dir).map_err(|e| HcrError::io(&dir, e))?;
            let path = dir.join("model.json");
            let json = serde_json::to_string_pretty(&model).expect("models serialize");
            fs::write(&path, json + "\n").map_err(|e| HcrError::io(&path, e))?;
            if let Some(trace) = trace {
                let log = dir.join("training_log.csv");
                fs::write(&log, trace_to_csv(&trace)).map_err(|e| HcrError::io(&log, e))?;
            }
            eprintln!("trained {classifier} on {} {extractor} vectors, saved {}", train.len(), path.display());
        }
        Command::Evaluate { model } => {
            let cfg = experiment_config(&cli)?;
            let report = match model {
                Some(path) => evaluate_model(&cfg, path)?,
                None => timed(|| harness::run_experiment(&cfg))?,
            };
            finish(&report, &output_dir(&cfg))?;
        }
        Command::CompareExtractors => {
            let cfg = experiment_config(&cli)?;
            let report = timed(|| harness::compare_extractors(&cfg))?;
            finish(&report, &output_dir(&cfg))?;
        }
        Command::CompareNetworks => {
            let cfg = experiment_config(&cli)?;
            let report = timed(|| harness::compare_networks(&cfg))?;
            finish(&report, &output_dir(&cfg))?;
        }
        Command::Show { report } => {
            for table in read_report(report)?.tables {
                println!("{}", table.to_text());
            }
        }
    }
    Ok(())
}

fn timed(f: impl FnOnce() -> Result<EvalReport>) -> Result<EvalReport> {
    let start = Instant::now();
    let report = f()?;
    eprintln!("finished in {:.2} s", start.elapsed().as_secs_f64());
    Ok(report)
}

fn evaluate_model(cfg: &ExperimentConfig, path: &Path) -> Result<EvalReport> {
    let text = fs::read_to_string(path).map_err(|e| HcrError::io(path, e))?;
    let model: TrainedModel =
        serde_json::from_str(&text).map_err(|e| HcrError::Json { path: path.to_path_buf(), source: e })?;
    if model.alphabet() != cfg.alphabet.as_slice() {
        return Err(HcrError::Usage(format!(
            "{}: model alphabet differs from the configured alphabet",
            path.display()
        )));
    }
    let data = harness::prepare_data(cfg)?;
    let test = harness::extract_all(model.extractor(), &data.test)?;
    let pairs = test
        .iter()
        .map(|(f, label)| model.predict(f).map(|p| (*label, p)))
        .collect::<hcr_core::Result<Vec<_>>>()
        .map_err(|e| HcrError::core(path.display().to_string(), e))?;
    let classifier = match &model {
        TrainedModel::Mdc(_) => ClassifierKind::Mdc,
        TrainedModel::Mlp { trainer, .. } => *trainer,
    };
    let result =
        RunResult::from_predictions(model.extractor(), classifier, &data.alphabet, data.train.len(), &pairs, None);
    let mut echo = cfg.clone();
    echo.output_dir = None;
    let mut report = EvalReport {
        toolkit_version: harness::TOOLKIT_VERSION.to_string(),
        config: echo,
        dataset: data.summary,
        results: vec![result],
        tables: Vec::new(),
    };
    report.tables.push(harness::accuracy_table(&report));
    Ok(report)
}

fn finish(report: &EvalReport, dir: &Path) -> Result<()> {
    let d = &report.dataset;
    if !d.skipped_files.is_empty() {
        eprintln!("warning: skipped {} files without a known label", d.skipped_files.len());
    }
    if !d.blank_excluded.is_empty() {
        eprintln!("warning: excluded {} blank images: {}", d.blank_excluded.len(), d.blank_excluded.join(", "));
    }
    for table in &report.tables {
        println!("{}", table.to_text());
    }
    write_report(report, dir)?;
    eprintln!("wrote {} and {}", dir.join("report.json").display(), dir.join("tables.csv").display());
    Ok(())
}
