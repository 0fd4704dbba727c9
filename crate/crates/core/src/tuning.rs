//! Threshold calibration by exhaustive grid search over a labeled corpus.
//!
//! The input is a strategy template with `$holes` in its filter arguments, a
//! finite grid of candidate values per hole, and a corpus of models each
//! labeled with the entities a reviewer flagged. Every grid assignment is
//! evaluated on every sample; the winner maximizes entity-level F1,
//! micro-averaged over the samples. Grids stay small by design: exhaustive
//! search keeps the result deterministic and auditable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::frontend::{load_facts, model_from_sources, FactsError, FrontendError, SourceProgram};
use crate::model::{DesignModel, EntityId};
use crate::strategy::{evaluate, ArgValue, StrategyError, StrategyTemplate};

/// Default ceiling on the number of grid assignments.
pub const DEFAULT_GRID_CAP: usize = 10_000;

/// One labeled sample: a model plus the entities flagged as flawed.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSample {
    pub model: DesignModel,
    pub flagged: BTreeSet<EntityId>,
}

/// A set of labeled samples for calibration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledCorpus {
    pub samples: Vec<CorpusSample>,
}

#[derive(Debug, thiserror::Error)]
pub enum TuneError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    CorpusFormat { path: String, message: String },
    #[error("sample {sample}: flagged entity `{id}` does not resolve in the sample's model")]
    FlaggedUnresolved { sample: usize, id: EntityId },
    #[error(transparent)]
    Facts(#[from] FactsError),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error("the corpus has no samples")]
    EmptyCorpus,
    #[error("grid has {size} assignments, over the cap of {cap}")]
    GridTooLarge { size: usize, cap: usize },
    #[error("template hole `${0}` has no grid column")]
    MissingHole(String),
    #[error("grid column `${0}` matches no hole in the template")]
    UnusedHole(String),
    #[error("grid column `${0}` is empty")]
    EmptyGridColumn(String),
    #[error("grid value `{value}` for `${hole}` is not a number or percentage")]
    BadGridValue { hole: String, value: String },
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

impl LabeledCorpus {
    pub fn new(samples: Vec<CorpusSample>) -> Result<Self, TuneError> {
        let corpus = LabeledCorpus { samples };
        corpus.validate()?;
        Ok(corpus)
    }

    /// Load a corpus file. Sample paths are resolved relative to the corpus
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, TuneError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct CorpusFile {
            samples: Vec<SampleSpec>,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct SampleSpec {
            facts: Option<String>,
            sources: Option<Vec<String>>,
            flagged: Vec<String>,
        }

        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| TuneError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let file: CorpusFile = serde_json::from_str(&text).map_err(|e| TuneError::CorpusFormat {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;

        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut samples = Vec::new();
        for (index, spec) in file.samples.iter().enumerate() {
            let model = match (&spec.facts, &spec.sources) {
                (Some(facts), None) => load_facts(base.join(facts))?,
                (None, Some(sources)) => {
                    let paths: Vec<PathBuf> = sources.iter().map(|s| base.join(s)).collect();
                    model_from_sources(&SourceProgram::read_files(&paths)?)?
                }
                _ => {
                    return Err(TuneError::CorpusFormat {
                        path: path.display().to_string(),
                        message: format!(
                            "sample {index}: exactly one of `facts` or `sources` is required"
                        ),
                    })
                }
            };
            let flagged = spec.flagged.iter().map(EntityId::from_raw).collect();
            samples.push(CorpusSample { model, flagged });
        }
        LabeledCorpus::new(samples)
    }

    fn validate(&self) -> Result<(), TuneError> {
        for (index, sample) in self.samples.iter().enumerate() {
            for id in &sample.flagged {
                let resolves = sample.model.class(id).is_some()
                    || sample.model.method(id).is_some()
                    || sample.model.attribute(id).is_some();
                if !resolves {
                    return Err(TuneError::FlaggedUnresolved { sample: index, id: id.clone() });
                }
            }
        }
        Ok(())
    }
}

/// Candidate values per hole, in the order they should be tried.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Grid {
    columns: BTreeMap<String, Vec<ArgValue>>,
}

impl Grid {
    pub fn new(columns: BTreeMap<String, Vec<ArgValue>>) -> Self {
        Grid { columns }
    }

    /// Load a grid file: `{"holes": {"$p": ["25%", "50%", "75%"]}}`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, TuneError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct GridFile {
            holes: BTreeMap<String, Vec<String>>,
        }

        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| TuneError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let file: GridFile = serde_json::from_str(&text).map_err(|e| TuneError::CorpusFormat {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;

        let mut columns = BTreeMap::new();
        for (raw_name, raw_values) in file.holes {
            let name = raw_name.strip_prefix('$').unwrap_or(&raw_name).to_string();
            let mut values = Vec::with_capacity(raw_values.len());
            for raw in &raw_values {
                values.push(parse_arg_value(raw).ok_or_else(|| TuneError::BadGridValue {
                    hole: name.clone(),
                    value: raw.clone(),
                })?);
            }
            columns.insert(name, values);
        }
        Ok(Grid { columns })
    }
}

/// `"25%"` -> percent, `"10"` / `"1.5"` -> number.
pub fn parse_arg_value(raw: &str) -> Option<ArgValue> {
    let raw = raw.trim();
    if let Some(percent) = raw.strip_suffix('%') {
        percent.trim().parse::<f64>().ok().map(ArgValue::Percent)
    } else {
        raw.parse::<f64>().ok().map(ArgValue::Number)
    }
}

/// A strategy template plus the grid to search.
#[derive(Debug, Clone, PartialEq)]
pub struct TunableStrategy {
    pub template: StrategyTemplate,
    pub grid: Grid,
}

/// One binding of every hole to a candidate value.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment(pub BTreeMap<String, ArgValue>);

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, value) in &self.0 {
            if !first {
                f.write_str(", ")?;
            }
            write!(f, "${name}={value}")?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub best: Assignment,
    pub score: f64,
    /// Every assignment with its score, in enumeration order.
    pub table: Vec<(Assignment, f64)>,
}

pub fn tune(corpus: &LabeledCorpus, tunable: &TunableStrategy) -> Result<TuneResult, TuneError> {
    tune_with_cap(corpus, tunable, DEFAULT_GRID_CAP)
}

/// Exhaustive grid search. Assignments are enumerated with holes in
/// lexicographic name order (first hole most significant) and candidates in
/// grid order; the first assignment reaching the maximum score wins, so
/// ties resolve deterministically.
pub fn tune_with_cap(
    corpus: &LabeledCorpus,
    tunable: &TunableStrategy,
    cap: usize,
) -> Result<TuneResult, TuneError> {
    if corpus.samples.is_empty() {
        return Err(TuneError::EmptyCorpus);
    }
    corpus.validate()?;

    let holes = tunable.template.holes();
    for hole in &holes {
        if !tunable.grid.columns.contains_key(hole) {
            return Err(TuneError::MissingHole(hole.clone()));
        }
    }
    for name in tunable.grid.columns.keys() {
        if !holes.contains(name) {
            return Err(TuneError::UnusedHole(name.clone()));
        }
    }

    let columns: Vec<(&String, &Vec<ArgValue>)> = tunable.grid.columns.iter().collect();
    let mut size = 1usize;
    for (name, values) in &columns {
        if values.is_empty() {
            return Err(TuneError::EmptyGridColumn((*name).clone()));
        }
        size = size.saturating_mul(values.len());
    }
    if size > cap {
        return Err(TuneError::GridTooLarge { size, cap });
    }

    let mut table = Vec::with_capacity(size);
    let mut best: Option<(Assignment, f64)> = None;
    let mut indices = vec![0usize; columns.len()];
    loop {
        let bindings: BTreeMap<String, ArgValue> = columns
            .iter()
            .zip(&indices)
            .map(|((name, values), &i)| ((*name).clone(), values[i]))
            .collect();
        let assignment = Assignment(bindings);
        let score = score_assignment(corpus, tunable, &assignment)?;
        if best.as_ref().is_none_or(|(_, best_score)| score > *best_score) {
            best = Some((assignment.clone(), score));
        }
        table.push((assignment, score));

        // odometer: last column fastest, so earlier (lexicographically
        // smaller) hole names are most significant
        let mut column = columns.len();
        loop {
            if column == 0 {
                let (best, score) = best.expect("grid is non-empty");
                return Ok(TuneResult { best, score, table });
            }
            column -= 1;
            indices[column] += 1;
            if indices[column] < columns[column].1.len() {
                break;
            }
            indices[column] = 0;
        }
    }
}

/// Evaluate one assignment over the whole corpus and return the
/// micro-averaged F1 of suspects against flagged entities. With nothing
/// flagged and nothing reported the score is 1.0.
pub fn score_assignment(
    corpus: &LabeledCorpus,
    tunable: &TunableStrategy,
    assignment: &Assignment,
) -> Result<f64, TuneError> {
    let strategy = tunable.template.instantiate(&assignment.0)?;
    let mut true_positives = 0usize;
    let mut false_positives = 0usize;
    let mut false_negatives = 0usize;
    for sample in &corpus.samples {
        let report = evaluate(&sample.model, &strategy)?;
        true_positives += report.suspects.intersection(&sample.flagged).count();
        false_positives += report.suspects.difference(&sample.flagged).count();
        false_negatives += sample.flagged.difference(&report.suspects).count();
    }
    let denominator = 2 * true_positives + false_positives + false_negatives;
    if denominator == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * true_positives as f64 / denominator as f64)
}
