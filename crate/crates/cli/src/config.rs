//! Experiment specification: JSON config file merged with command-line flags.

use crate::failure::Failure;
use resolv::FiniteDist;
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// A single number or a list of numbers.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum NumberOrList {
    One(f64),
    Many(Vec<f64>),
}

impl NumberOrList {
    pub fn into_vec(self) -> Vec<f64> {
        match self {
            NumberOrList::One(v) => vec![v],
            NumberOrList::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    /// Binary `P(0)` or a full single-letter distribution.
    pub p: NumberOrList,
    pub alpha: f64,
}

/// Contents of a `--config` JSON file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub probs: Option<Vec<f64>>,
    pub iid: Option<NumberOrList>,
    pub components: Option<Vec<ComponentConfig>>,
    pub n: Option<usize>,
    pub delta: Option<NumberOrList>,
    pub gamma: Option<NumberOrList>,
    #[serde(rename = "K")]
    pub k: Option<u32>,
    pub n_sweep: Option<Vec<usize>>,
    pub grid_step: Option<f64>,
    pub out: Option<PathBuf>,
    pub first_only: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::spec(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::spec(format!("invalid config {}: {e}", path.display())))
    }
}

/// Source options as given on the command line.
#[derive(Debug, Clone, Default)]
pub struct FlagSource {
    pub probs: Option<Vec<f64>>,
    pub iid: Option<Vec<f64>>,
    pub components: Vec<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
}

/// The source under study.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// An explicit distribution over block outcomes.
    Explicit(FiniteDist),
    /// An i.i.d. source with the given single-letter law.
    Iid(FiniteDist),
    /// A finite mixture. Components are single letters of i.i.d. sources when a
    /// blocklength is given, explicit block distributions otherwise.
    Mixed {
        letters: Vec<FiniteDist>,
        weights: Vec<f64>,
    },
}

/// Fully merged and validated parameters of one run.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub source: Source,
    pub n: Option<usize>,
    pub n_sweep: Option<Vec<usize>>,
    pub deltas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub k: u32,
    pub grid_step: f64,
    pub out: Option<PathBuf>,
    pub json: bool,
    pub timing: bool,
    pub first_only: bool,
}

pub const DEFAULT_K: u32 = 2;
pub const DEFAULT_GRID_STEP: f64 = 1e-3;

/// Command-line overrides; `None` / empty means "not given".
#[derive(Debug, Clone, Default)]
pub struct FlagParams {
    pub source: FlagSource,
    pub n: Option<usize>,
    pub n_sweep: Option<Vec<usize>>,
    pub deltas: Option<Vec<f64>>,
    pub gammas: Option<Vec<f64>>,
    pub k: Option<u32>,
    pub grid_step: Option<f64>,
    pub out: Option<PathBuf>,
    pub json: bool,
    pub timing: bool,
    pub first_only: bool,
}

/// Single number: binary letter with `P(0) = p`; list: full distribution.
pub fn letter(values: &[f64]) -> Result<FiniteDist, Failure> {
    match values {
        [p] => FiniteDist::binary(*p).map_err(Failure::from),
        many => FiniteDist::new(many.to_vec()).map_err(Failure::from),
    }
}

fn resolve_source(flags: &FlagSource, file: &FileConfig) -> Result<Source, Failure> {
    let flag_given = flags.probs.is_some() || flags.iid.is_some() || !flags.components.is_empty();
    let given = [
        flags.probs.is_some(),
        flags.iid.is_some(),
        !flags.components.is_empty(),
    ];
    if given.iter().filter(|&&g| g).count() > 1 {
        return Err(Failure::spec(
            "give only one of --probs, --iid, --component",
        ));
    }
    if flag_given {
        if let Some(p) = &flags.probs {
            return Ok(Source::Explicit(FiniteDist::new(p.clone())?));
        }
        if let Some(p) = &flags.iid {
            return Ok(Source::Iid(letter(p)?));
        }
        let letters = flags
            .components
            .iter()
            .map(|c| letter(c))
            .collect::<Result<Vec<_>, _>>()?;
        let weights = match &flags.weights {
            Some(w) => w.clone(),
            None if letters.len() == 1 => vec![1.0],
            None => {
                return Err(Failure::spec(
                    "--weights is required with several --component",
                ))
            }
        };
        return Ok(Source::Mixed { letters, weights });
    }
    if flags.weights.is_some() {
        return Err(Failure::spec("--weights needs --component"));
    }

    let file_given = [
        file.probs.is_some(),
        file.iid.is_some(),
        file.components.is_some(),
    ];
    match file_given.iter().filter(|&&g| g).count() {
        0 => {
            return Err(Failure::spec(
                "no source: give --probs, --iid or --component",
            ))
        }
        1 => {}
        _ => {
            return Err(Failure::spec(
                "config gives more than one of probs, iid, components",
            ))
        }
    }
    if let Some(p) = &file.probs {
        return Ok(Source::Explicit(FiniteDist::new(p.clone())?));
    }
    if let Some(p) = &file.iid {
        return Ok(Source::Iid(letter(&p.clone().into_vec())?));
    }
    let comps = file.components.as_deref().unwrap_or_default();
    let letters = comps
        .iter()
        .map(|c| letter(&c.p.clone().into_vec()))
        .collect::<Result<Vec<_>, _>>()?;
    let weights = comps.iter().map(|c| c.alpha).collect();
    Ok(Source::Mixed { letters, weights })
}

impl ExperimentSpec {
    /// Merges flags over the file config; flags win field by field.
    pub fn merge(flags: FlagParams, file: FileConfig) -> Result<Self, Failure> {
        let source = resolve_source(&flags.source, &file)?;
        let spec = Self {
            source,
            n: flags.n.or(file.n),
            n_sweep: flags.n_sweep.or(file.n_sweep),
            deltas: flags
                .deltas
                .or(file.delta.map(NumberOrList::into_vec))
                .unwrap_or_default(),
            gammas: flags
                .gammas
                .or(file.gamma.map(NumberOrList::into_vec))
                .unwrap_or_default(),
            k: flags.k.or(file.k).unwrap_or(DEFAULT_K),
            grid_step: flags
                .grid_step
                .or(file.grid_step)
                .unwrap_or(DEFAULT_GRID_STEP),
            out: flags.out.or(file.out),
            json: flags.json,
            timing: flags.timing,
            first_only: flags.first_only || file.first_only.unwrap_or(false),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), Failure> {
        if let Some(d) = self
            .deltas
            .iter()
            .find(|d| !(d.is_finite() && (0.0..1.0).contains(*d)))
        {
            return Err(Failure::spec(format!("delta must lie in [0, 1), got {d}")));
        }
        if let Some(g) = self.gammas.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(Failure::spec(format!("gamma must be > 0, got {g}")));
        }
        if self.k < 2 {
            return Err(Failure::spec(format!(
                "K must be at least 2, got {}",
                self.k
            )));
        }
        if !(self.grid_step > 0.0 && self.grid_step <= 0.1) {
            return Err(Failure::spec(format!(
                "grid step must lie in (0, 0.1], got {}",
                self.grid_step
            )));
        }
        if self.n == Some(0) || self.n_sweep.as_ref().is_some_and(|s| s.contains(&0)) {
            return Err(Failure::spec("blocklengths must be positive"));
        }
        if self.n_sweep.as_ref().is_some_and(Vec::is_empty) {
            return Err(Failure::spec("empty n sweep"));
        }
        if let Source::Mixed { letters, weights } = &self.source {
            if letters.len() != weights.len() {
                return Err(Failure::spec(format!(
                    "{} components but {} weights",
                    letters.len(),
                    weights.len()
                )));
            }
        }
        Ok(())
    }

    /// Blocklengths to evaluate: the sweep, else `n`.
    pub fn blocklengths(&self) -> Option<Vec<usize>> {
        self.n_sweep.clone().or(self.n.map(|n| vec![n]))
    }

    pub fn require_deltas(&self) -> Result<&[f64], Failure> {
        if self.deltas.is_empty() {
            Err(Failure::spec("--delta is required"))
        } else {
            Ok(&self.deltas)
        }
    }

    pub fn require_gammas(&self) -> Result<&[f64], Failure> {
        if self.gammas.is_empty() {
            Err(Failure::spec("--gamma is required"))
        } else {
            Ok(&self.gammas)
        }
    }
}
