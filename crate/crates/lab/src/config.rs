//! Experiment configuration: defaults, JSON file overrides and flag overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    SelfaffineCert,
    FbmLocaltime,
    RestrictionDim,
    MolchanTail,
    GreedyWalk,
    EnergyScaling,
    VariationOracle,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::SelfaffineCert,
        Experiment::FbmLocaltime,
        Experiment::RestrictionDim,
        Experiment::MolchanTail,
        Experiment::GreedyWalk,
        Experiment::EnergyScaling,
        Experiment::VariationOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SelfaffineCert => "selfaffine-cert",
            Experiment::FbmLocaltime => "fbm-localtime",
            Experiment::RestrictionDim => "restriction-dim",
            Experiment::MolchanTail => "molchan-tail",
            Experiment::GreedyWalk => "greedy-walk",
            Experiment::EnergyScaling => "energy-scaling",
            Experiment::VariationOracle => "variation-oracle",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Restriction set used by `restriction-dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    Zero,
    Record,
}

/// Closed acceptance interval for one aggregate statistic.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Band {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

impl Band {
    pub fn between(min: f64, max: f64) -> Self {
        Band { min: Some(min), max: Some(max) }
    }

    pub fn at_least(min: f64) -> Self {
        Band { min: Some(min), max: None }
    }

    pub fn at_most(max: f64) -> Self {
        Band { min: None, max: Some(max) }
    }

    pub fn around(center: f64, tol: f64) -> Self {
        Band::between(center - tol, center + tol)
    }

    pub fn contains(&self, v: f64) -> bool {
        v.is_finite() && self.min.is_none_or(|m| v >= m) && self.max.is_none_or(|m| v <= m)
    }
}

/// A fully resolved configuration.
///
/// Parameters an experiment does not use are still echoed; see the README for
/// which ones each experiment reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub alpha: f64,
    pub n: u32,
    pub paths: u64,
    pub samples: u64,
    pub k: u32,
    pub m: u32,
    pub beta: Vec<f64>,
    pub gamma: f64,
    pub set: SetKind,
    pub resolution: u32,
    pub compare_n: u32,
    pub cap: u64,
    pub window: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub bands: BTreeMap<String, Band>,
}

/// Partial configuration, as read from a file or from flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub n: Option<u32>,
    pub paths: Option<u64>,
    pub samples: Option<u64>,
    pub k: Option<u32>,
    pub m: Option<u32>,
    pub beta: Option<Vec<f64>>,
    pub gamma: Option<f64>,
    pub set: Option<SetKind>,
    pub resolution: Option<u32>,
    pub compare_n: Option<u32>,
    pub cap: Option<u64>,
    pub window: Option<[f64; 2]>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub bands: Option<BTreeMap<String, Band>>,
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::Io { path: path.to_owned(), source })?;
        serde_json::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
    }
}

macro_rules! apply {
    ($cfg:ident, $ov:ident, $($field:ident),*) => {
        $(if let Some(v) = $ov.$field.clone() { $cfg.$field = v; })*
    };
}

impl ExperimentConfig {
    /// Defaults for `experiment`, with bands derived from the parameters.
    pub fn new(experiment: Experiment, seed: u64) -> Self {
        let mut cfg = ExperimentConfig {
            experiment,
            seed,
            alpha: 0.5,
            n: 12,
            paths: 100,
            samples: 1000,
            k: 2,
            m: 3,
            beta: vec![0.5, 1.0, 2.0, 3.0],
            gamma: 0.25,
            set: SetKind::Zero,
            resolution: 0,
            compare_n: 8,
            cap: 1 << 14,
            window: [0.0, 0.0],
            threads: None,
            out: None,
            bands: BTreeMap::new(),
        };
        match experiment {
            Experiment::SelfaffineCert => cfg.n = 8,
            Experiment::FbmLocaltime => cfg.resolution = 14,
            Experiment::RestrictionDim => {
                cfg.n = 14;
                cfg.paths = 50;
                cfg.resolution = 20;
                cfg.window = [6.0, 14.0];
            }
            Experiment::MolchanTail => {
                cfg.n = 14;
                cfg.paths = 10_000;
                cfg.window = [2f64.powi(-8), 2f64.powi(-3)];
            }
            Experiment::GreedyWalk => {
                cfg.n = 16;
                cfg.paths = 100_000;
                cfg.window = [16.0, 4096.0];
            }
            Experiment::EnergyScaling => {
                cfg.alpha = 1.0 / 3.0;
                cfg.n = 12;
            }
            Experiment::VariationOracle => {
                cfg.n = 12;
                cfg.paths = 100;
            }
        }
        cfg.bands = cfg.default_bands();
        cfg
    }

    /// Defaults, then `file`, then `flags`; bands given explicitly replace
    /// the derived ones key by key.
    pub fn resolve(experiment: Experiment, file: &Overrides, flags: &Overrides) -> Result<Self, LabError> {
        if let Some(e) = file.experiment.filter(|e| *e != experiment) {
            return Err(LabError::Config(format!("config file is for `{e}`, not `{experiment}`")));
        }
        let seed = flags
            .seed
            .or(file.seed)
            .ok_or_else(|| LabError::Config("a seed is required (--seed or \"seed\" in the config file)".into()))?;
        let mut cfg = ExperimentConfig::new(experiment, seed);
        if experiment == Experiment::RestrictionDim && (file.n.is_some() || flags.n.is_some()) {
            // The fit window ends at n unless a window is given.
            let n = flags.n.or(file.n).unwrap();
            cfg.window[1] = n as f64;
        }
        for ov in [file, flags] {
            apply!(cfg, ov, alpha, n, paths, samples, k, m, beta, gamma, set, resolution, compare_n, cap, window);
            if ov.threads.is_some() {
                cfg.threads = ov.threads;
            }
            if ov.out.is_some() {
                cfg.out = ov.out.clone();
            }
        }
        cfg.bands = cfg.default_bands();
        for ov in [file, flags] {
            if let Some(b) = &ov.bands {
                cfg.bands.extend(b.iter().map(|(k, v)| (k.clone(), *v)));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Bands implied by the current parameters.
    pub fn default_bands(&self) -> BTreeMap<String, Band> {
        let a = self.alpha;
        let bands: Vec<(&str, Band)> = match self.experiment {
            Experiment::SelfaffineCert => vec![("max_ratio", Band::at_most(1.0)), ("certified", Band::at_least(1.0))],
            Experiment::FbmLocaltime => vec![
                ("class_a_fraction", Band::at_least(0.95)),
                ("class_s_fraction", Band::at_least(0.95)),
                ("class_a_trend", Band::at_least(0.0)),
                ("class_s_trend", Band::at_least(0.0)),
            ],
            Experiment::RestrictionDim => {
                let target = match self.set {
                    SetKind::Zero => 1.0 - a,
                    SetKind::Record => a,
                };
                vec![("mean_slope", Band::around(target, 0.1))]
            }
            Experiment::MolchanTail => vec![("slope", Band::around(1.0 - a, 0.1))],
            Experiment::GreedyWalk => vec![
                ("tail_slope", Band::around(-1.0 / 3.0, 0.05)),
                ("count_slope", Band::around(1.0 / 3.0, 0.05)),
            ],
            Experiment::EnergyScaling => vec![
                ("identity_max_rel_error", Band::at_most(1e-12)),
                ("growth_slope", Band::at_most(2.0 * a - self.gamma + 0.1)),
            ],
            Experiment::VariationOracle => vec![("max_rel_diff", Band::at_most(1e-12))],
        };
        bands.into_iter().map(|(k, b)| (k.to_string(), b)).collect()
    }

    fn validate(&self) -> Result<(), LabError> {
        let bad = |what: &str| Err(LabError::Config(what.to_string()));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if self.paths == 0 || self.samples == 0 {
            return bad("paths and samples must be positive");
        }
        if self.threads == Some(0) {
            return bad("threads must be positive");
        }
        if self.beta.is_empty() || self.beta.iter().any(|b| !(*b > 0.0)) {
            return bad("beta must be a non-empty list of positive exponents");
        }
        if !(self.window[0] <= self.window[1]) {
            return bad("window must satisfy lo <= hi");
        }
        Ok(())
    }
}
