//! JSON run configuration.
//!
//! Rationals are strings, either `num/den` or a decimal literal such as
//! `"0.35"` or `"1e-9"`. Relative `structure_file` paths resolve against the
//! config file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use hv_core::belief::{validate_structure, InformationStructure, Signal};
use hv_core::corpus::CorpusSpec;
use hv_core::design::ternary;
use hv_core::engine::Limits;
use hv_core::sweep::SweepGrid;
use hv_core::Rat;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStructure {
    signals: Vec<Signal>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorpus {
    size: Option<usize>,
    max_signals: Option<usize>,
    max_denominator: Option<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    deltas: Vec<String>,
    alphas: Vec<String>,
    #[serde(default = "default_ts")]
    ts: Vec<u32>,
}

fn default_ts() -> Vec<u32> {
    vec![1]
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    structure: Option<RawStructure>,
    structure_file: Option<PathBuf>,
    eps: Option<String>,
    horizon: Option<usize>,
    tol: Option<String>,
    delta: Option<String>,
    alpha: Option<String>,
    t: Option<usize>,
    seed: Option<u64>,
    corpus: Option<RawCorpus>,
    grid: Option<RawGrid>,
    limits: Option<Limits>,
}

/// Where the structure came from, echoed in reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Inline,
    File(PathBuf),
    Ternary(Rat),
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub source: Option<Source>,
    pub structure: Option<InformationStructure>,
    pub horizon: Option<usize>,
    pub tol: Option<Rat>,
    pub delta: Option<Rat>,
    pub alpha: Option<Rat>,
    pub t: Option<usize>,
    pub seed: Option<u64>,
    pub corpus: Option<CorpusSpec>,
    pub grid: Option<SweepGrid>,
    pub limits: Limits,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub horizon: Option<usize>,
    pub tol: Option<String>,
}

pub fn parse_rat(field: &str, s: &str) -> Result<Rat, CliError> {
    s.trim()
        .parse::<Rat>()
        .or_else(|_| Rat::from_decimal_str(s.trim()))
        .map_err(|e| CliError::Parse(format!("{field}: cannot read {s:?} as a rational ({e})")))
}

fn opt_rat(field: &str, s: Option<String>) -> Result<Option<Rat>, CliError> {
    s.map(|s| parse_rat(field, &s)).transpose()
}

fn structure_from_raw(raw: RawStructure) -> Result<InformationStructure, CliError> {
    Ok(validate_structure(raw.signals)?)
}

pub fn read_structure_file(path: &Path) -> Result<InformationStructure, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let raw: RawStructure = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    structure_from_raw(raw)
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::from_json(&text, base, overrides)
    }

    pub fn from_json(text: &str, base: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| CliError::Parse(format!("config: {e}")))?;

        let sources = [
            raw.structure.is_some(),
            raw.structure_file.is_some(),
            raw.eps.is_some(),
        ]
        .iter()
        .filter(|x| **x)
        .count();
        if sources > 1 {
            return Err(CliError::Validation(
                "give at most one of structure, structure_file, eps".into(),
            ));
        }
        let (source, structure) = if let Some(s) = raw.structure {
            (Some(Source::Inline), Some(structure_from_raw(s)?))
        } else if let Some(p) = raw.structure_file {
            let full = if p.is_absolute() {
                p.clone()
            } else {
                base.join(&p)
            };
            (Some(Source::File(p)), Some(read_structure_file(&full)?))
        } else if let Some(e) = raw.eps {
            let eps = parse_rat("eps", &e)?;
            (Some(Source::Ternary(eps.clone())), Some(ternary(eps)?))
        } else {
            (None, None)
        };

        let tol = match &overrides.tol {
            Some(t) => Some(parse_rat("tol", t)?),
            None => opt_rat("tol", raw.tol)?,
        };
        if let Some(t) = &tol {
            if !t.is_positive() {
                return Err(CliError::Validation(format!(
                    "tol must be positive, got {t}"
                )));
            }
        }
        let horizon = overrides.horizon.or(raw.horizon);
        if horizon == Some(0) {
            return Err(CliError::Validation("horizon must be at least 1".into()));
        }
        if raw.t == Some(0) {
            return Err(CliError::Validation("t must be at least 1".into()));
        }

        let seed = overrides.seed.or(raw.seed);
        let corpus = raw.corpus.map(|c| {
            let d = CorpusSpec::default();
            CorpusSpec {
                seed: seed.unwrap_or(d.seed),
                size: c.size.unwrap_or(d.size),
                max_signals: c.max_signals.unwrap_or(d.max_signals),
                max_denominator: c.max_denominator.unwrap_or(d.max_denominator),
            }
        });
        let grid = match raw.grid {
            Some(g) => {
                let parse_all = |field: &str, xs: Vec<String>| {
                    xs.iter()
                        .map(|s| parse_rat(field, s))
                        .collect::<Result<Vec<_>, _>>()
                };
                let grid = SweepGrid {
                    deltas: parse_all("grid.deltas", g.deltas)?,
                    alphas: parse_all("grid.alphas", g.alphas)?,
                    ts: g.ts,
                };
                if grid.deltas.is_empty() || grid.alphas.is_empty() || grid.ts.is_empty() {
                    return Err(CliError::Validation("grid axes must be non-empty".into()));
                }
                Some(grid)
            }
            None => None,
        };

        Ok(RunConfig {
            source,
            structure,
            horizon,
            tol,
            delta: opt_rat("delta", raw.delta)?,
            alpha: opt_rat("alpha", raw.alpha)?,
            t: raw.t,
            seed,
            corpus,
            grid,
            limits: raw.limits.unwrap_or_default(),
        })
    }

    pub fn require_structure(&self) -> Result<&InformationStructure, CliError> {
        self.structure.as_ref().ok_or_else(|| {
            CliError::Validation(
                "a structure is required (structure, structure_file or eps)".into(),
            )
        })
    }

    pub fn require_delta(&self) -> Result<&Rat, CliError> {
        self.delta
            .as_ref()
            .ok_or_else(|| CliError::Validation("delta is required".into()))
    }
}
