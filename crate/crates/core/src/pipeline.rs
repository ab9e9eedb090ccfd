//! End-to-end runs: ingestion, splitting, evolution, baseline and reports.
//!
//! A run is described by a flat `key = value` config file. See
//! [`RunConfig::parse`] for the keys.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::baseline::{self, MlpConfig};
use crate::circuit::build_feature_map;
use crate::error::{Error, Result};
use crate::evolve::{self, GaConfig, Individual, PreparedData, RunOutcome};
use crate::genome::{BitString, EncodingMode, MAX_PCA_COMPONENTS};
use crate::reduce::{
    load_external_features, pca_fit, pca_transform, standardize_apply, standardize_fit,
    stratified_split, FeatureMatrix, Split,
};
use crate::svm::{QsvmSummary, SvmConfig};
use crate::synthetic::TwoGaussians;

/// Which evolutionary pipelines a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineMode {
    /// Per-individual PCA dimensionality from the genome header.
    Pca,
    /// Fixed-width precomputed features (e.g. autoencoder latents).
    External,
    /// Both of the above, each on its own data source.
    Both,
}

/// Where samples come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    /// Directory with one subdirectory of grayscale images per class.
    Images(PathBuf),
    /// Feature CSV with a final `label` column.
    Csv(PathBuf),
    /// Generated two-Gaussian data.
    Synthetic(TwoGaussians),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: PipelineMode,
    /// Input to the PCA branch (or to the external branch in `external` mode).
    pub data: DataSource,
    /// Feature CSV for the external branch in `both` mode.
    pub external_data: Option<PathBuf>,
    pub image_size: usize,
    pub external_dim: usize,
    pub test_fraction: f64,
    pub pca_max_components: usize,
    pub pca_rescale: bool,
    pub ga: GaConfig,
    pub svm: SvmConfig,
    pub baseline: bool,
    pub mlp: MlpConfig,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: PipelineMode::Pca,
            data: DataSource::Synthetic(TwoGaussians::default()),
            external_data: None,
            image_size: 250,
            external_dim: 64,
            test_fraction: 0.25,
            pca_max_components: MAX_PCA_COMPONENTS,
            pca_rescale: true,
            ga: GaConfig::default(),
            svm: SvmConfig::default(),
            baseline: true,
            mlp: MlpConfig::default(),
            output: PathBuf::from("out"),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for key '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean {value:?} for key '{key}'"))),
    }
}

impl RunConfig {
    /// Parses the flat config format.
    ///
    /// One `key = value` per line; `#` starts a comment. Keys:
    /// `mode` (`pca` | `external` | `both`), `data` (image directory, `.csv`
    /// file or `synthetic`), `external_data`, `image_size`, `external_dim`,
    /// `test_fraction`, `pca_max_components`, `pca_rescale`, `qubits`,
    /// `layers`, `mu`, `lambda`, `p_cross`, `p_ind`, `p_gen`, `generations`,
    /// `patience` (0 disables), `seed`, `svm_c`, `svm_tol`, `svm_max_passes`,
    /// `baseline`, `baseline_lr`, `baseline_epochs`, `baseline_hidden`,
    /// `output` (default `out`), and for synthetic data `synthetic_samples`,
    /// `synthetic_features`, `synthetic_informative`, `synthetic_shift`,
    /// `synthetic_seed`. Relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<RunConfig> {
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value', got {raw:?}", lineno + 1))
            })?;
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            if seen.insert(key.clone(), value).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
        }

        let mut cfg = RunConfig {
            output: base_dir.join("out"),
            ..RunConfig::default()
        };
        let mut synthetic = TwoGaussians::default();
        let mut data: Option<String> = None;
        let resolve = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base_dir.join(p)
            }
        };
        for (key, value) in &seen {
            let (k, v) = (key.as_str(), value.as_str());
            match k {
                "mode" => {
                    cfg.mode = match v {
                        "pca" => PipelineMode::Pca,
                        "external" => PipelineMode::External,
                        "both" => PipelineMode::Both,
                        _ => return Err(Error::Config(format!("unknown mode {v:?}"))),
                    }
                }
                "data" => data = Some(v.to_string()),
                "external_data" => cfg.external_data = Some(resolve(v)),
                "image_size" => cfg.image_size = parse_value(k, v)?,
                "external_dim" => cfg.external_dim = parse_value(k, v)?,
                "test_fraction" => cfg.test_fraction = parse_value(k, v)?,
                "pca_max_components" => cfg.pca_max_components = parse_value(k, v)?,
                "pca_rescale" => cfg.pca_rescale = parse_bool(k, v)?,
                "qubits" => cfg.ga.qubits = parse_value(k, v)?,
                "layers" => cfg.ga.layers = parse_value(k, v)?,
                "mu" => cfg.ga.mu = parse_value(k, v)?,
                "lambda" => cfg.ga.lambda = parse_value(k, v)?,
                "p_cross" => cfg.ga.p_cross = parse_value(k, v)?,
                "p_ind" => cfg.ga.p_ind = parse_value(k, v)?,
                "p_gen" => cfg.ga.p_gen = parse_value(k, v)?,
                "generations" => cfg.ga.max_generations = parse_value(k, v)?,
                "patience" => {
                    let p: usize = parse_value(k, v)?;
                    cfg.ga.patience = (p > 0).then_some(p);
                }
                "seed" => cfg.ga.seed = parse_value(k, v)?,
                "svm_c" => cfg.svm.c = parse_value(k, v)?,
                "svm_tol" => cfg.svm.tol = parse_value(k, v)?,
                "svm_max_passes" => cfg.svm.max_passes = parse_value(k, v)?,
                "baseline" => cfg.baseline = parse_bool(k, v)?,
                "baseline_lr" => cfg.mlp.lr = parse_value(k, v)?,
                "baseline_epochs" => cfg.mlp.epochs = parse_value(k, v)?,
                "baseline_hidden" => cfg.mlp.hidden = parse_value(k, v)?,
                "output" => cfg.output = resolve(v),
                "synthetic_samples" => synthetic.samples = parse_value(k, v)?,
                "synthetic_features" => synthetic.features = parse_value(k, v)?,
                "synthetic_informative" => synthetic.informative = parse_value(k, v)?,
                "synthetic_shift" => synthetic.shift = parse_value(k, v)?,
                "synthetic_seed" => synthetic.seed = parse_value(k, v)?,
                _ => return Err(Error::Config(format!("unknown key '{k}'"))),
            }
        }
        cfg.mlp.seed = cfg.ga.seed;
        cfg.data = match data.as_deref() {
            None => return Err(Error::Config("missing required key 'data'".into())),
            Some("synthetic") => DataSource::Synthetic(synthetic),
            Some(p) => {
                let path = resolve(p);
                if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
                    DataSource::Csv(path)
                } else {
                    DataSource::Images(path)
                }
            }
        };
        cfg.ga.mode = match cfg.mode {
            PipelineMode::External => EncodingMode::FixedFeatures,
            _ => EncodingMode::PcaHeader,
        };
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Checks ranges and that every referenced input exists.
    pub fn validate(&self) -> Result<()> {
        self.ga.validate()?;
        self.svm.validate()?;
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!("test_fraction {} outside (0, 1)", self.test_fraction)));
        }
        if self.image_size == 0 || self.external_dim == 0 || self.pca_max_components == 0 {
            return Err(Error::Config("image_size, external_dim and pca_max_components must be positive".into()));
        }
        if self.pca_max_components > MAX_PCA_COMPONENTS {
            return Err(Error::Config(format!(
                "pca_max_components {} exceeds the header range of {MAX_PCA_COMPONENTS}",
                self.pca_max_components
            )));
        }
        if self.baseline && (self.mlp.hidden == 0 || self.mlp.lr < 0.0) {
            return Err(Error::Config("baseline needs hidden ≥ 1 and lr ≥ 0".into()));
        }
        let check = |p: &Path| {
            if p.exists() {
                Ok(())
            } else {
                Err(Error::Config(format!("path does not exist: {}", p.display())))
            }
        };
        match &self.data {
            DataSource::Images(p) | DataSource::Csv(p) => check(p)?,
            DataSource::Synthetic(s) => {
                if s.samples < 8 || s.features == 0 || s.informative > s.features {
                    return Err(Error::Config("synthetic data needs ≥ 8 samples and informative ≤ features".into()));
                }
            }
        }
        if self.mode == PipelineMode::External && matches!(self.data, DataSource::Images(_)) {
            return Err(Error::Config("external mode needs a feature CSV, not an image directory".into()));
        }
        if self.mode == PipelineMode::Both {
            let ext = self
                .external_data
                .as_ref()
                .ok_or_else(|| Error::Config("mode 'both' requires 'external_data'".into()))?;
            check(ext)?;
        }
        Ok(())
    }

    fn encoding_for(&self, branch: Branch) -> GaConfig {
        let mut ga = self.ga.clone();
        ga.mode = match branch {
            Branch::Pca => EncodingMode::PcaHeader,
            Branch::External => EncodingMode::FixedFeatures,
        };
        ga
    }
}

/// Images decoded into rows, with class directory names.
#[derive(Debug, Clone)]
pub struct ImageDataset {
    pub features: FeatureMatrix,
    pub class_names: Vec<String>,
    pub skipped: usize,
}

/// Bilinear resize (corner-aligned) of a row-major grayscale image.
pub fn resize_bilinear(src: &[f64], width: usize, height: usize, out_w: usize, out_h: usize) -> Vec<f64> {
    // Integer numerator keeps the last sample exactly on the last pixel.
    let coord = |o: usize, out: usize, inp: usize| {
        if out > 1 {
            (o * (inp - 1)) as f64 / (out - 1) as f64
        } else {
            0.0
        }
    };
    let mut out = Vec::with_capacity(out_w * out_h);
    for oy in 0..out_h {
        let fy = coord(oy, out_h, height);
        let y0 = (fy.floor() as usize).min(height - 1);
        let y1 = (y0 + 1).min(height - 1);
        let ty = fy - y0 as f64;
        for ox in 0..out_w {
            let fx = coord(ox, out_w, width);
            let x0 = (fx.floor() as usize).min(width - 1);
            let x1 = (x0 + 1).min(width - 1);
            let tx = fx - x0 as f64;
            let top = src[y0 * width + x0] * (1.0 - tx) + src[y0 * width + x1] * tx;
            let bottom = src[y1 * width + x0] * (1.0 - tx) + src[y1 * width + x1] * tx;
            out.push(top * (1.0 - ty) + bottom * ty);
        }
    }
    out
}

/// Decodes one image to `[0, 1]` luminance, resized to `size × size`.
pub fn load_image(path: &Path, size: usize) -> Result<Vec<f64>> {
    let img = image::open(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?
        .to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels: Vec<f64> = img.as_raw().iter().map(|&p| f64::from(p) / 255.0).collect();
    Ok(resize_bilinear(&pixels, w, h, size, size))
}

/// Reads `root/<class>/<image>` for exactly two class directories, sorted
/// by name (first → label 0). Unreadable files are skipped and counted.
pub fn load_image_dataset(root: impl AsRef<Path>, size: usize) -> Result<ImageDataset> {
    let root = root.as_ref();
    let mut classes: Vec<PathBuf> = std::fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    classes.sort();
    if classes.len() != 2 {
        return Err(Error::Input(format!(
            "{} must contain exactly 2 class directories, found {}",
            root.display(),
            classes.len()
        )));
    }
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut skipped = 0;
    for (label, dir) in classes.iter().enumerate() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        for f in files {
            match load_image(&f, size) {
                Ok(px) => {
                    data.extend(px);
                    labels.push(label as u8);
                }
                Err(e) => {
                    warn!("skipping {}: {e}", f.display());
                    skipped += 1;
                }
            }
        }
    }
    let features = FeatureMatrix::new(labels.len(), size * size, data)?.with_labels(labels)?;
    let class_names = classes
        .iter()
        .map(|c| c.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
        .collect();
    Ok(ImageDataset {
        features,
        class_names,
        skipped,
    })
}

/// Samples, class names and skipped-file count for a data source.
pub fn load_source(source: &DataSource, image_size: usize) -> Result<ImageDataset> {
    match source {
        DataSource::Images(p) => load_image_dataset(p, image_size),
        DataSource::Csv(p) => Ok(ImageDataset {
            features: load_external_features(p)?,
            class_names: vec!["0".into(), "1".into()],
            skipped: 0,
        }),
        DataSource::Synthetic(params) => Ok(ImageDataset {
            features: params.generate(),
            class_names: vec!["0".into(), "1".into()],
            skipped: 0,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    Pca,
    External,
}

impl Branch {
    fn name(self) -> &'static str {
        match self {
            Branch::Pca => "pca_qsvm",
            Branch::External => "external_qsvm",
        }
    }

    fn file_suffix(self, mode: PipelineMode) -> &'static str {
        match (mode, self) {
            (PipelineMode::Both, Branch::External) => "_external",
            _ => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub source: String,
    pub samples: usize,
    pub features: usize,
    pub class_names: Vec<String>,
    pub class_counts: [usize; 2],
    pub skipped_files: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub split: Split,
}

/// One archive member as written to the reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub bitstring: String,
    pub eval_id: u64,
    pub accuracy: f64,
    pub complexity: f64,
    pub objective_balance: f64,
    /// Effective input width (PCA components actually used, or feature width).
    pub input_dim: usize,
    /// Component count requested by the header, if any.
    pub pca_components: Option<usize>,
    pub circuit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestReport {
    #[serde(flatten)]
    pub entry: ArchiveEntry,
    pub train_accuracy: f64,
    pub qsvm: QsvmSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub name: String,
    pub dataset: DatasetSummary,
    pub best: BestReport,
    pub archive: Vec<ArchiveEntry>,
    pub history_file: String,
    pub archive_file: String,
    pub generations_run: usize,
    pub stopped_on_stagnation: bool,
    pub total_evaluations: u64,
    pub initial_median_complexity: f64,
    pub wall_clock_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub test_accuracy: f64,
    pub train_accuracy: f64,
    pub pca_components: usize,
    pub hidden: usize,
    pub lr: f64,
    pub epochs: usize,
    pub final_loss: f64,
    pub dataset: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub image_resize: String,
    pub image_size: usize,
    pub intensity_scale: String,
    pub standardization: String,
    pub pca_rescale: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub preprocessing: Preprocessing,
    pub branches: Vec<BranchReport>,
    pub baseline: Option<BaselineReport>,
    /// Test accuracy per model, keyed `pca_qsvm`, `external_qsvm`, `baseline_mlp`.
    pub accuracies: BTreeMap<String, f64>,
    pub wall_clock_secs: f64,
}

/// Loads, splits and standardizes a source; returns the split data too.
struct Loaded {
    dataset: ImageDataset,
    split: Split,
    train: FeatureMatrix,
    test: FeatureMatrix,
    source: String,
}

fn load_and_split(source: &DataSource, config: &RunConfig, require_width: Option<usize>) -> Result<Loaded> {
    let dataset = load_source(source, config.image_size)?;
    if let Some(w) = require_width {
        if dataset.features.ncols() != w {
            return Err(Error::Input(format!(
                "external features must have {w} columns, found {}",
                dataset.features.ncols()
            )));
        }
    }
    let labels = dataset.features.labels().expect("loaded data is labeled");
    let split = stratified_split(labels, config.test_fraction, config.ga.seed)?;
    let raw_train = dataset.features.select_rows(&split.train);
    let raw_test = dataset.features.select_rows(&split.test);
    let params = standardize_fit(&raw_train)?;
    let train = standardize_apply(&params, &raw_train)?;
    let test = standardize_apply(&params, &raw_test)?;
    let source = match source {
        DataSource::Images(p) | DataSource::Csv(p) => p.display().to_string(),
        DataSource::Synthetic(_) => "synthetic".to_string(),
    };
    Ok(Loaded {
        dataset,
        split,
        train,
        test,
        source,
    })
}

fn archive_entry(ind: &Individual, ga: &GaConfig, data: &PreparedData) -> Result<ArchiveEntry> {
    let genome = ga.decode(&ind.bits)?;
    let input_dim = match (genome.pca_components(), data.pca_components()) {
        (Some(r), Some(avail)) => r.min(avail),
        _ => data.train().ncols(),
    };
    let circuit = build_feature_map(&genome, input_dim)?;
    let f = ind.fitness.expect("archive members are evaluated");
    Ok(ArchiveEntry {
        bitstring: ind.bits.to_string(),
        eval_id: ind.eval_id,
        accuracy: f.accuracy,
        complexity: f.complexity,
        objective_balance: f.objective_balance,
        input_dim,
        pca_components: genome.pca_components(),
        circuit: circuit.diagram(&genome),
    })
}

/// Writes the per-generation history CSV.
pub fn write_history(path: &Path, outcome: &RunOutcome) -> Result<()> {
    let mut text = String::from(
        "generation,best_accuracy,best_objective_balance,archive_size,evaluations,wall_clock_s\n",
    );
    for h in &outcome.history {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{:.3}",
            h.generation,
            h.best_accuracy,
            h.best_objective_balance,
            h.archive_size,
            h.evaluations,
            h.wall_clock_secs
        );
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Input(format!("cannot serialize {}: {e}", path.display())))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn run_branch(branch: Branch, source: &DataSource, config: &RunConfig) -> Result<(BranchReport, Loaded)> {
    let start = Instant::now();
    let width = (branch == Branch::External).then_some(config.external_dim);
    let loaded = load_and_split(source, config, width)?;
    let ga = config.encoding_for(branch);
    let data = match branch {
        Branch::Pca => PreparedData::pca(
            loaded.train.clone(),
            loaded.test.clone(),
            config.pca_max_components,
            config.pca_rescale,
        )?,
        Branch::External => PreparedData::fixed(loaded.train.clone(), loaded.test.clone())?,
    };
    info!(
        "{}: {} train / {} test samples, {} features, genome length {}",
        branch.name(),
        loaded.train.nrows(),
        loaded.test.nrows(),
        data.train().ncols(),
        ga.genome_length()
    );
    let outcome = evolve::run(&ga, &config.svm, &data)?;

    let suffix = branch.file_suffix(config.mode);
    let history_file = format!("history{suffix}.csv");
    let archive_file = format!("archive{suffix}.json");
    write_history(&config.output.join(&history_file), &outcome)?;
    let archive: Vec<ArchiveEntry> = outcome
        .archive
        .members()
        .iter()
        .map(|m| archive_entry(m, &ga, &data))
        .collect::<Result<_>>()?;
    write_json(&config.output.join(&archive_file), &archive)?;

    let best_genome = ga.decode(&outcome.best.bits)?;
    let eval = evolve::evaluate_genome(&best_genome, &data, &config.svm)?;
    let best = BestReport {
        entry: archive_entry(&outcome.best, &ga, &data)?,
        train_accuracy: eval.train_accuracy,
        qsvm: eval.model.summary(),
    };
    let features = &loaded.dataset.features;
    let report = BranchReport {
        name: branch.name().to_string(),
        dataset: DatasetSummary {
            source: loaded.source.clone(),
            samples: features.nrows(),
            features: features.ncols(),
            class_names: loaded.dataset.class_names.clone(),
            class_counts: features.class_counts(),
            skipped_files: loaded.dataset.skipped,
            train_size: loaded.split.train.len(),
            test_size: loaded.split.test.len(),
            split: loaded.split.clone(),
        },
        best,
        archive,
        history_file,
        archive_file,
        generations_run: outcome.generations_run,
        stopped_on_stagnation: outcome.stopped_on_stagnation,
        total_evaluations: outcome.total_evaluations,
        initial_median_complexity: outcome.initial_median_complexity,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    };
    Ok((report, loaded))
}

fn run_mlp(loaded: &Loaded, config: &RunConfig) -> Result<BaselineReport> {
    let model = pca_fit(&loaded.train, MAX_PCA_COMPONENTS)?;
    let mut train = pca_transform(&model, &loaded.train)?;
    let mut test = pca_transform(&model, &loaded.test)?;
    if config.pca_rescale {
        let params = standardize_fit(&train)?;
        train = standardize_apply(&params, &train)?;
        test = standardize_apply(&params, &test)?;
    }
    let trained = baseline::train(&train, &config.mlp)?;
    Ok(BaselineReport {
        test_accuracy: baseline::evaluate(&trained.model, &test)?,
        train_accuracy: baseline::evaluate(&trained.model, &train)?,
        pca_components: model.n_components(),
        hidden: config.mlp.hidden,
        lr: config.mlp.lr,
        epochs: config.mlp.epochs,
        final_loss: trained.losses.last().copied().unwrap_or(f64::NAN),
        dataset: loaded.source.clone(),
    })
}

fn preprocessing(config: &RunConfig) -> Preprocessing {
    Preprocessing {
        image_resize: "bilinear (corner-aligned)".into(),
        image_size: config.image_size,
        intensity_scale: "pixel / 255 → [0, 1]".into(),
        standardization: "per-feature min-max to [-1, 1], fitted on training rows".into(),
        pca_rescale: config.pca_rescale,
    }
}

/// Executes a full run and writes `report.json`, `history.csv` and
/// `archive.json` into the output directory.
pub fn run_pipeline(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    std::fs::create_dir_all(&config.output).map_err(|e| Error::io(&config.output, e))?;

    let mut branches = Vec::new();
    let mut baseline_data = None;
    let plan: Vec<(Branch, DataSource)> = match config.mode {
        PipelineMode::Pca => vec![(Branch::Pca, config.data.clone())],
        PipelineMode::External => vec![(Branch::External, config.data.clone())],
        PipelineMode::Both => vec![
            (Branch::Pca, config.data.clone()),
            (
                Branch::External,
                DataSource::Csv(config.external_data.clone().expect("validated")),
            ),
        ],
    };
    for (branch, source) in plan {
        let (report, loaded) = run_branch(branch, &source, config)?;
        branches.push(report);
        baseline_data.get_or_insert(loaded);
    }

    let baseline = match (config.baseline, &baseline_data) {
        (true, Some(loaded)) => Some(run_mlp(loaded, config)?),
        _ => None,
    };
    let mut accuracies = BTreeMap::new();
    for b in &branches {
        accuracies.insert(b.name.clone(), b.best.entry.accuracy);
    }
    if let Some(b) = &baseline {
        accuracies.insert("baseline_mlp".into(), b.test_accuracy);
    }
    let report = RunReport {
        config: config.clone(),
        preprocessing: preprocessing(config),
        branches,
        baseline,
        accuracies,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    };
    write_json(&config.output.join("report.json"), &report)?;
    Ok(report)
}

/// Trains only the MLP baseline on the run's primary data source.
pub fn run_baseline(config: &RunConfig) -> Result<BaselineReport> {
    config.validate()?;
    let width = (config.mode == PipelineMode::External).then_some(config.external_dim);
    let loaded = load_and_split(&config.data, config, width)?;
    run_mlp(&loaded, config)
}

/// Decodes a genome under a run configuration and describes the circuit.
pub fn inspect(bits: &str, config: &RunConfig) -> Result<String> {
    let bits: BitString = bits.parse()?;
    let branch = if config.mode == PipelineMode::External {
        Branch::External
    } else {
        Branch::Pca
    };
    let ga = config.encoding_for(branch);
    let genome = ga.decode(&bits)?;
    let input_dim = genome.pca_components().unwrap_or(config.external_dim);
    let circuit = build_feature_map(&genome, input_dim)?;
    let census = circuit.census();
    let mut out = String::new();
    let _ = writeln!(out, "grid: {} qubits × {} layers ({:?})", genome.qubits(), genome.layers(), ga.mode);
    if let Some(r) = genome.pca_components() {
        let _ = writeln!(out, "pca components: {r}");
    }
    let _ = writeln!(out, "input features: {input_dim}");
    let _ = writeln!(
        out,
        "gates: {} local, {} cnot, {} identity",
        census.n_local, census.n_cnot, census.n_identity
    );
    let _ = writeln!(out, "complexity: {}", circuit.complexity());
    out.push_str(&circuit.diagram(&genome));
    Ok(out)
}
