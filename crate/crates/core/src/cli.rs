//! Library side of the `l2gtx` command: settings resolution, predictor
//! construction and artifact writing.
//!
//! Settings are `key=value` pairs. Command-line values override the config
//! file, which overrides built-in defaults; `L2GTX_SEED` supplies the seed
//! when neither sets one.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{load_ucr_tsv, standardize, Dataset};
use crate::l2gtx::{instance_seed, run_pipeline, PercentileRun, PipelineConfig, PipelineReport};
use crate::lomatce::{explain_instance_traced, LocalExplanation, SigmaMode};
use crate::numerics::Linkage;
use crate::predictor::{
    fit_calibrated_centroid, fit_nearest_centroid, ConstantPredictor, ExternalPredictor, NearestCentroidModel, Predictor,
};
use crate::selftest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PROTOCOL: i32 = 3;

/// Every recognised key with its default (`None`: no default).
const KEYS: &[(&str, Option<&str>)] = &[
    ("data", None),
    ("train", None),
    ("predictor", Some("centroid")),
    ("temperature", Some("auto")),
    ("standardize", Some("true")),
    ("out", Some("out")),
    ("n-inst", Some("15")),
    ("budget", Some("15")),
    ("allow-budget-over", Some("false")),
    ("percentiles", Some("95")),
    ("seed", Some("0")),
    ("jobs", None),
    ("samples", Some("150")),
    ("segments", Some("10")),
    ("sigma", Some("median")),
    ("radius", Some("8")),
    ("lambda", Some("1")),
    ("top-n", Some("5")),
    ("standardize-columns", Some("true")),
    ("k-min", Some("2")),
    ("k-max", Some("6")),
    ("smoothing", Some("3")),
    ("min-duration", Some("2")),
    ("gradient-threshold", Some("0")),
    ("linkage", Some("average")),
    ("pooled-tau", Some("false")),
    ("epsilon", Some("1e-9")),
];

/// Keys that do not affect results and are left out of written configs.
const VOLATILE: &[&str] = &["out", "jobs"];

/// A command failure with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: Error,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.error)
    }
}

impl std::error::Error for Failure {}

fn fail(code: i32) -> impl FnOnce(Error) -> Failure {
    move |error| Failure { code, error }
}

/// Exit code for an error raised while computing.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Protocol(_) | Error::Transport(_) => EXIT_PROTOCOL,
        Error::Config(_) | Error::InsufficientInstances { .. } => EXIT_USAGE,
        _ => EXIT_INTERNAL,
    }
}

fn classify(e: Error) -> Failure {
    Failure {
        code: exit_code(&e),
        error: e,
    }
}

/// Parses a `key=value` config file body. Blank lines and `#` comments are
/// ignored; unknown or repeated keys are errors.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected key=value", n + 1)))?;
        let k = k.trim().replace('_', "-");
        if !KEYS.iter().any(|(name, _)| *name == k) {
            return Err(Error::Config(format!("config line {}: unknown key {k:?}", n + 1)));
        }
        if out.insert(k.clone(), v.trim().to_owned()).is_some() {
            return Err(Error::Config(format!("config line {}: {k:?} set twice", n + 1)));
        }
    }
    Ok(out)
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub data: PathBuf,
    pub train: Option<PathBuf>,
    pub predictor: String,
    /// `None`: calibrate on the training data.
    pub temperature: Option<f64>,
    pub standardize: bool,
    pub out: PathBuf,
    pub pipeline: PipelineConfig,
    /// The effective `key=value` pairs, sorted by key.
    pub resolved: BTreeMap<String, String>,
}

fn value<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T> {
    let raw = map.get(key).ok_or_else(|| Error::Config(format!("missing required setting {key:?}")))?;
    raw.parse()
        .map_err(|_| Error::Config(format!("invalid value {raw:?} for {key:?}")))
}

impl Settings {
    /// Layers `overrides` over the file at `config` (if any) over the
    /// defaults. `env_seed` is used when no layer sets `seed`.
    pub fn resolve(config: Option<&Path>, overrides: &[(String, String)], env_seed: Option<&str>) -> Result<Settings> {
        let mut map: BTreeMap<String, String> = KEYS
            .iter()
            .filter_map(|(k, d)| d.map(|d| ((*k).to_owned(), d.to_owned())))
            .collect();
        let mut seed_set = false;
        if let Some(path) = config {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
            let file = parse_config(&text)?;
            seed_set |= file.contains_key("seed");
            map.extend(file);
        }
        for (k, v) in overrides {
            let k = k.replace('_', "-");
            if !KEYS.iter().any(|(name, _)| *name == k) {
                return Err(Error::Config(format!("unknown setting {k:?}")));
            }
            seed_set |= k == "seed";
            map.insert(k, v.clone());
        }
        if let (false, Some(s)) = (seed_set, env_seed) {
            map.insert("seed".into(), s.trim().to_owned());
        }
        Settings::from_map(map)
    }

    fn from_map(map: BTreeMap<String, String>) -> Result<Settings> {
        let mut p = PipelineConfig {
            n_inst: value(&map, "n-inst")?,
            budget: value(&map, "budget")?,
            seed: value(&map, "seed")?,
            epsilon: value(&map, "epsilon")?,
            linkage: map["linkage"].parse::<Linkage>()?,
            pooled_tau: value(&map, "pooled-tau")?,
            jobs: map.get("jobs").map(|_| value(&map, "jobs")).transpose()?,
            ..PipelineConfig::default()
        };
        p.percentiles = map["percentiles"]
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("invalid percentile list {:?}", map["percentiles"])))?;
        let l = &mut p.lomatce;
        l.n_samples = value(&map, "samples")?;
        l.n_segments = value(&map, "segments")?;
        l.dtw_radius = value(&map, "radius")?;
        l.lambda = value(&map, "lambda")?;
        l.top_n = value(&map, "top-n")?;
        l.standardize_columns = value(&map, "standardize-columns")?;
        l.sigma = match map["sigma"].as_str() {
            "median" => SigmaMode::Median,
            _ => SigmaMode::Fixed(value(&map, "sigma")?),
        };
        l.clustering.k_min = value(&map, "k-min")?;
        l.clustering.k_max = value(&map, "k-max")?;
        l.pep.smoothing_window = value(&map, "smoothing")?;
        l.pep.min_duration = value(&map, "min-duration")?;
        l.pep.gradient_threshold = value(&map, "gradient-threshold")?;
        p.validate()?;
        if p.lomatce.clustering.k_min < 2 || p.lomatce.clustering.k_max < p.lomatce.clustering.k_min {
            return Err(Error::Config("need 2 <= k-min <= k-max".into()));
        }
        if p.budget > p.n_inst && !value::<bool>(&map, "allow-budget-over")? {
            return Err(Error::Config(format!(
                "budget {} exceeds n-inst {} (set allow-budget-over=true to permit)",
                p.budget, p.n_inst
            )));
        }
        let temperature = match map["temperature"].as_str() {
            "auto" => None,
            _ => Some(value::<f64>(&map, "temperature")?),
        };
        if temperature.is_some_and(|t| !(t > 0.0)) {
            return Err(Error::Config("temperature must be positive or auto".into()));
        }
        Ok(Settings {
            data: value(&map, "data")?,
            train: map.get("train").map(PathBuf::from),
            predictor: map["predictor"].clone(),
            temperature,
            standardize: value(&map, "standardize")?,
            out: value(&map, "out")?,
            pipeline: p,
            resolved: map,
        })
    }

    /// The settings that determine results, as a `key=value` file.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.resolved.iter().filter(|(k, _)| !VOLATILE.contains(&k.as_str())) {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

fn load(path: &Path, standardize_it: bool) -> Result<Dataset> {
    let d = load_ucr_tsv(path).map_err(|e| e.context(format!("loading {}", path.display())))?;
    Ok(if standardize_it { standardize(&d) } else { d })
}

/// Builds the black box named by `settings.predictor`:
///
/// * `centroid`: nearest-centroid softmax fitted on `train` (or the data),
///   temperature calibrated unless given,
/// * `uniform`: equal probabilities,
/// * `external:<command line>`: a process speaking the JSON-lines protocol.
pub fn build_predictor(settings: &Settings, data: &Dataset) -> Result<Box<dyn Predictor>, Failure> {
    let spec = settings.predictor.as_str();
    if let Some(cmd) = spec.strip_prefix("external:") {
        let p = ExternalPredictor::from_command_line(cmd).map_err(|e| Failure {
            code: if e.is_protocol() { EXIT_PROTOCOL } else { EXIT_USAGE },
            error: e,
        })?;
        return Ok(Box::new(p));
    }
    match spec {
        "uniform" => Ok(Box::new(ConstantPredictor::uniform(data.class_count()))),
        "centroid" => {
            let model = match &settings.train {
                Some(path) => {
                    let train = load(path, settings.standardize).map_err(fail(EXIT_USAGE))?;
                    if train.label_names() != data.label_names() {
                        return Err(Failure {
                            code: EXIT_USAGE,
                            error: Error::Config("training and explained data have different labels".into()),
                        });
                    }
                    fit_centroid(&train, settings.temperature)
                }
                None => fit_centroid(data, settings.temperature),
            };
            Ok(Box::new(model.map_err(fail(EXIT_USAGE))?))
        }
        other => Err(Failure {
            code: EXIT_USAGE,
            error: Error::Config(format!("unknown predictor {other:?}")),
        }),
    }
}

fn fit_centroid(train: &Dataset, temperature: Option<f64>) -> Result<NearestCentroidModel> {
    match temperature {
        Some(t) => fit_nearest_centroid(train, t),
        None => fit_calibrated_centroid(train),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// `<out>/<dataset>/<seed>`.
pub fn run_dir(settings: &Settings, dataset: &str) -> PathBuf {
    settings.out.join(dataset).join(settings.pipeline.seed.to_string())
}

#[derive(Serialize)]
struct ClassMetrics {
    class: usize,
    class_name: i64,
    gf: f64,
    undefined_fidelities: usize,
    global_clusters: usize,
    reported_clusters: usize,
    selected: usize,
    shortfall: usize,
}

#[derive(Serialize)]
struct PercentileMetrics {
    percentile: f64,
    macro_gf: f64,
    total_global_clusters: usize,
    classes: Vec<ClassMetrics>,
}

#[derive(Serialize)]
struct Metrics<'a> {
    dataset: &'a str,
    seed: u64,
    instances: usize,
    series_length: usize,
    classes: usize,
    runs: Vec<PercentileMetrics>,
    config: &'a PipelineConfig,
}

fn metrics<'a>(dataset: &'a Dataset, report: &PipelineReport, cfg: &'a PipelineConfig) -> Metrics<'a> {
    Metrics {
        dataset: &dataset.name,
        seed: cfg.seed,
        instances: dataset.len(),
        series_length: dataset.series_len(),
        classes: dataset.class_count(),
        runs: report
            .runs
            .iter()
            .map(|r| PercentileMetrics {
                percentile: r.percentile,
                macro_gf: r.macro_gf,
                total_global_clusters: r.total_global_clusters,
                classes: r
                    .summaries
                    .iter()
                    .map(|s| ClassMetrics {
                        class: s.class_label,
                        class_name: s.class_name,
                        gf: s.gf,
                        undefined_fidelities: s.undefined_fidelities,
                        global_clusters: s.total_global_clusters,
                        reported_clusters: s.clusters.len(),
                        selected: s.selected_instances.len(),
                        shortfall: s.shortfall,
                    })
                    .collect(),
            })
            .collect(),
        config: cfg,
    }
}

/// Long-format table for plotting: one row per reported cluster attribute.
pub fn plot_csv(run: &PercentileRun) -> String {
    let mut s = String::from("class,global_id,pep_kind,normalised_importance,attr,mean,std,count\n");
    for summary in &run.summaries {
        for c in &summary.clusters {
            for a in &c.attributes {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    summary.class_name, c.global_id, c.kind, c.normalised_importance, a.name, a.mean, a.std, c.event_count
                );
            }
        }
    }
    s
}

/// Writes every artifact of a finished run under [`run_dir`].
pub fn write_global_artifacts(settings: &Settings, dataset: &Dataset, report: &PipelineReport) -> Result<PathBuf> {
    let dir = run_dir(settings, &dataset.name);
    fs::create_dir_all(&dir)?;
    for run in &report.runs {
        for s in &run.summaries {
            let class_dir = dir.join(format!("class_{}", s.class_name));
            fs::create_dir_all(&class_dir)?;
            write_json(&class_dir.join(format!("summary_p{}.json", run.percentile)), s)?;
        }
        fs::write(dir.join(format!("plot_{}.csv", run.percentile)), plot_csv(run))?;
    }
    write_json(&dir.join("metrics.json"), &metrics(dataset, report, &settings.pipeline))?;
    write_json(&dir.join("locals.json"), &report.locals.classes)?;
    fs::write(dir.join("config.txt"), settings.to_config_string())?;
    Ok(dir)
}

/// What a successful `explain-global` produced.
#[derive(Debug)]
pub struct GlobalOutcome {
    pub dir: PathBuf,
    pub report: PipelineReport,
    pub dataset: Dataset,
}

/// Loads, explains and writes. Nothing is written unless the whole run
/// succeeds.
pub fn explain_global(settings: &Settings) -> Result<GlobalOutcome, Failure> {
    let dataset = load(&settings.data, settings.standardize).map_err(fail(EXIT_USAGE))?;
    let predictor = build_predictor(settings, &dataset)?;
    let report = run_pipeline(&dataset, predictor.as_ref(), &settings.pipeline).map_err(classify)?;
    let dir = write_global_artifacts(settings, &dataset, &report).map_err(fail(EXIT_INTERNAL))?;
    Ok(GlobalOutcome { dir, report, dataset })
}

/// Fixed-width histogram of values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn unit_histogram(values: &[f64], bins: usize) -> Histogram {
    let mut counts = vec![0; bins];
    for v in values {
        let b = ((v.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    Histogram {
        edges: (0..=bins).map(|i| i as f64 / bins as f64).collect(),
        counts,
    }
}

#[derive(Debug, Serialize)]
pub struct LocalReport {
    pub dataset: String,
    pub instance_id: usize,
    pub true_class: i64,
    pub seed: u64,
    pub explanation: LocalExplanation,
    pub sigma: f64,
    pub weights_histogram: Histogram,
    pub neighbourhood_events: usize,
    pub total_clusters: usize,
    pub config: PipelineConfig,
}

/// Explains dataset instance `index` and writes `local_<index>.json`.
pub fn explain_local(settings: &Settings, index: usize) -> Result<(PathBuf, LocalReport), Failure> {
    let dataset = load(&settings.data, settings.standardize).map_err(fail(EXIT_USAGE))?;
    if index >= dataset.len() {
        return Err(Failure {
            code: EXIT_USAGE,
            error: Error::Config(format!("index {index} out of range for {} instances", dataset.len())),
        });
    }
    let predictor = build_predictor(settings, &dataset)?;
    let seed = instance_seed(settings.pipeline.seed, index);
    let (explanation, trace) = explain_instance_traced(
        &dataset.instances()[index],
        index,
        predictor.as_ref(),
        &settings.pipeline.lomatce,
        seed,
    )
    .map_err(classify)?;
    let report = LocalReport {
        dataset: dataset.name.clone(),
        instance_id: index,
        true_class: dataset.label_names()[dataset.labels()[index] - 1],
        seed: settings.pipeline.seed,
        explanation,
        sigma: trace.sigma,
        weights_histogram: unit_histogram(&trace.weights, 10),
        neighbourhood_events: trace.events.len(),
        total_clusters: trace.clustering.as_ref().map_or(0, |c| c.total_clusters),
        config: settings.pipeline.clone(),
    };
    let dir = run_dir(settings, &dataset.name);
    let path = dir.join(format!("local_{index}.json"));
    fs::create_dir_all(&dir)
        .map_err(Error::from)
        .and_then(|_| write_json(&path, &report))
        .map_err(fail(EXIT_INTERNAL))?;
    Ok((path, report))
}

/// Runs the oracle checks; the exit code is 0 only if all pass.
pub fn run_selftest(seed: u64, faults: selftest::Faults) -> (Vec<selftest::Check>, i32) {
    let checks = selftest::run(seed, faults);
    let code = if checks.iter().all(|c| c.passed) {
        EXIT_OK
    } else {
        EXIT_INTERNAL
    };
    (checks, code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| ((*k).into(), (*v).into())).collect()
    }

    #[test]
    fn defaults_apply() {
        let s = Settings::resolve(None, &kv(&[("data", "x.tsv")]), None).unwrap();
        assert_eq!(s.pipeline.n_inst, 15);
        assert_eq!(s.pipeline.budget, 15);
        assert_eq!(s.pipeline.percentiles, vec![95.0]);
        assert_eq!(s.pipeline.lomatce.lambda, 1.0);
    }

    #[test]
    fn cli_beats_file_beats_default() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.conf");
        fs::write(&cfg, "# test\nbudget = 5\nn_inst=10\nseed=3\n").unwrap();
        let s = Settings::resolve(Some(&cfg), &kv(&[("data", "x"), ("budget", "7")]), Some("99")).unwrap();
        assert_eq!((s.pipeline.budget, s.pipeline.n_inst, s.pipeline.seed), (7, 10, 3));
    }

    #[test]
    fn env_seed_is_a_fallback() {
        let s = Settings::resolve(None, &kv(&[("data", "x")]), Some("42")).unwrap();
        assert_eq!(s.pipeline.seed, 42);
        let s = Settings::resolve(None, &kv(&[("data", "x"), ("seed", "1")]), Some("42")).unwrap();
        assert_eq!(s.pipeline.seed, 1);
    }

    #[test]
    fn budget_over_n_inst_needs_opt_in() {
        let e = Settings::resolve(None, &kv(&[("data", "x"), ("budget", "20")]), None).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_USAGE);
        assert!(Settings::resolve(None, &kv(&[("data", "x"), ("budget", "20"), ("allow-budget-over", "true")]), None).is_ok());
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(parse_config("bogus=1").is_err());
        assert!(parse_config("seed=1\nseed=2").is_err());
        assert!(parse_config("seed 1").is_err());
        assert!(Settings::resolve(None, &kv(&[("data", "x"), ("percentiles", "25,abc")]), None).is_err());
    }

    #[test]
    fn config_string_skips_volatile_keys() {
        let s = Settings::resolve(None, &kv(&[("data", "x"), ("out", "/tmp/o"), ("jobs", "2")]), None).unwrap();
        let text = s.to_config_string();
        assert!(text.contains("data=x\n"));
        assert!(!text.contains("out=") && !text.contains("jobs="));
    }

    #[test]
    fn histogram_bins() {
        let h = unit_histogram(&[0.0, 0.05, 0.5, 1.0], 10);
        assert_eq!(h.counts, vec![2, 0, 0, 0, 0, 1, 0, 0, 0, 1]);
        assert_eq!(h.edges.len(), 11);
    }
}
