//! Experiment configuration and its flat `key = value` text format.
//!
//! Lines are `key = value`; `#` starts a comment; list values are
//! comma-separated. Shapes are written `3x4x5`, SNRs in dB or `none`.
//! Unset keys take the experiment's defaults, and [`ExperimentConfig::to_text`]
//! writes every key so that the file reproduces the run exactly.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use cpdeflate::cpd::StopRule;
use cpdeflate::Field;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Fig2,
    Tables,
    Fig3,
    Fig4,
    Fig5,
    Conjecture,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Fig2,
        Experiment::Tables,
        Experiment::Fig3,
        Experiment::Fig4,
        Experiment::Fig5,
        Experiment::Conjecture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2 => "fig2",
            Experiment::Tables => "tables",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::Conjecture => "conjecture",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| anyhow!("unknown experiment `{s}`"))
    }
}

/// Rank-1 operators and full CP solvers known to the drivers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Algorithm {
    Thosvd,
    Seroap,
    Ce,
    Rank1Als,
    Als,
    Cg,
    DcpdThosvd,
    DcpdSeroap,
}

impl Algorithm {
    const ALL: [Algorithm; 8] = [
        Algorithm::Thosvd,
        Algorithm::Seroap,
        Algorithm::Ce,
        Algorithm::Rank1Als,
        Algorithm::Als,
        Algorithm::Cg,
        Algorithm::DcpdThosvd,
        Algorithm::DcpdSeroap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Thosvd => "thosvd",
            Algorithm::Seroap => "seroap",
            Algorithm::Ce => "ce",
            Algorithm::Rank1Als => "rank1-als",
            Algorithm::Als => "als",
            Algorithm::Cg => "cg",
            Algorithm::DcpdThosvd => "dcpd-thosvd",
            Algorithm::DcpdSeroap => "dcpd-seroap",
        }
    }

    /// Default stop rule of the full CP solvers.
    pub fn default_stop(self) -> StopRule {
        match self {
            Algorithm::Cg => StopRule::cg(),
            Algorithm::DcpdThosvd | Algorithm::DcpdSeroap => StopRule::dcpd(),
            _ => StopRule::als(),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| anyhow!("unknown algorithm `{s}`"))
    }
}

/// Overrides applied on top of each solver's default [`StopRule`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct StopOverrides {
    pub max_iterations: Option<usize>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
}

impl StopOverrides {
    pub fn apply(&self, base: StopRule) -> StopRule {
        StopRule {
            max_iterations: self.max_iterations.unwrap_or(base.max_iterations),
            rel_tol: self.rel_tol.unwrap_or(base.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(base.abs_tol),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub shapes: Vec<Vec<usize>>,
    /// CP ranks; for `fig2` an empty list means dense random inputs.
    pub ranks: Vec<usize>,
    pub field: Field,
    /// `None` is the noiseless case.
    pub snr_db: Vec<Option<f64>>,
    pub trials: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub stop: StopOverrides,
    /// Length of the residual-vs-iteration curves (`fig4`).
    pub iterations: usize,
    /// Shared-axis iterations charged per deflation sweep (`fig4`).
    pub sweep_cost: usize,
    /// Rescale each exact tensor to unit norm before adding noise.
    pub normalize: bool,
    /// Success threshold on the final residual (`fig3`).
    pub threshold: f64,
    /// Restarts of the reference best rank-1 oracle.
    pub oracle_restarts: usize,
    /// Sweeps `L` of the chain probability (`conjecture`).
    pub sweeps: usize,
    pub betas: Vec<f64>,
}

fn shapes(list: &[&[usize]]) -> Vec<Vec<usize>> {
    list.iter().map(|s| s.to_vec()).collect()
}

fn cube_shapes(range: std::ops::RangeInclusive<usize>) -> Vec<Vec<usize>> {
    range.map(|n| vec![n, n, n]).collect()
}

/// `0, π/40, ..., π/2` followed by a finer grid over the last step.
pub fn default_betas() -> Vec<f64> {
    let mut betas: Vec<f64> = (0..20).map(|k| FRAC_PI_2 * k as f64 / 20.0).collect();
    betas.extend((1..10).map(|k| FRAC_PI_2 * (0.95 + 0.005 * k as f64)));
    betas.push(FRAC_PI_2);
    betas
}

impl ExperimentConfig {
    /// Desk-scale defaults.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = ExperimentConfig {
            experiment,
            shapes: vec![],
            ranks: vec![],
            field: Field::Real,
            snr_db: vec![None],
            trials: 50,
            seed: 1,
            algorithms: vec![],
            stop: StopOverrides::default(),
            iterations: 200,
            sweep_cost: 1,
            normalize: true,
            threshold: 1e-6,
            oracle_restarts: 8,
            sweeps: 5,
            betas: vec![],
        };
        let cpd = vec![Algorithm::Als, Algorithm::Cg, Algorithm::DcpdThosvd, Algorithm::DcpdSeroap];
        match experiment {
            Experiment::Fig2 => ExperimentConfig {
                shapes: shapes(&[&[3, 4, 5], &[3, 4, 20], &[3, 20, 20], &[20, 20, 20]]),
                field: Field::Complex,
                trials: 300,
                algorithms: vec![Algorithm::Thosvd, Algorithm::Seroap],
                ..base
            },
            Experiment::Tables => ExperimentConfig {
                shapes: shapes(&[&[2, 2, 2], &[3, 3, 3]]),
                trials: 200,
                algorithms: vec![Algorithm::Thosvd, Algorithm::Seroap, Algorithm::Ce, Algorithm::Rank1Als],
                oracle_restarts: 32,
                ..base
            },
            Experiment::Fig3 => ExperimentConfig {
                shapes: cube_shapes(3..=8),
                ranks: vec![3],
                algorithms: cpd,
                ..base
            },
            Experiment::Fig4 => ExperimentConfig {
                shapes: shapes(&[&[5, 5, 5]]),
                ranks: vec![3],
                snr_db: vec![Some(40.0), Some(30.0), Some(20.0)],
                algorithms: cpd,
                ..base
            },
            Experiment::Fig5 => ExperimentConfig {
                shapes: shapes(&[&[8, 8, 8]]),
                ranks: (3..=7).collect(),
                snr_db: vec![Some(30.0), Some(40.0)],
                algorithms: cpd,
                stop: StopOverrides {
                    max_iterations: Some(1000),
                    ..StopOverrides::default()
                },
                ..base
            },
            Experiment::Conjecture => ExperimentConfig {
                shapes: shapes(&[&[2, 2, 2]]),
                ranks: vec![2],
                trials: 500,
                betas: default_betas(),
                ..base
            },
        }
    }

    /// Restores the trial counts of the original study.
    pub fn paper_scale(mut self) -> Self {
        self.trials = match self.experiment {
            Experiment::Fig2 | Experiment::Fig3 | Experiment::Fig4 | Experiment::Fig5 => 300,
            Experiment::Tables => 200,
            Experiment::Conjecture => self.trials.max(500),
        };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if self.shapes.is_empty() {
            bail!("no shapes given");
        }
        for s in &self.shapes {
            if s.len() < 2 || s.contains(&0) {
                bail!("invalid shape {}", format_shape(s));
            }
        }
        if self.ranks.contains(&0) {
            bail!("ranks must be positive");
        }
        if self.sweep_cost == 0 {
            bail!("sweep_cost must be positive");
        }
        Ok(())
    }

    /// Parses a configuration file; `experiment` must match the file's
    /// `experiment` key when that key is present.
    pub fn parse(text: &str, experiment: Option<Experiment>) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
            pairs.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let from_file = pairs
            .iter()
            .find(|(_, k, _)| k == "experiment")
            .map(|(_, _, v)| v.parse::<Experiment>())
            .transpose()?;
        let experiment = match (experiment, from_file) {
            (Some(a), Some(b)) if a != b => bail!("config is for `{b}`, not `{a}`"),
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => bail!("config does not name an experiment"),
        };
        let mut cfg = ExperimentConfig::defaults(experiment);
        for (line, key, value) in pairs {
            cfg.set(&key, &value).with_context(|| format!("line {line}: `{key}`"))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => {}
            "shapes" => self.shapes = list(value, parse_shape)?,
            "ranks" => self.ranks = list(value, |s| Ok(s.parse()?))?,
            "field" => self.field = value.parse().map_err(|e| anyhow!("{e}"))?,
            "snr_db" => self.snr_db = list(value, parse_snr)?,
            "trials" => self.trials = value.parse()?,
            "seed" => self.seed = value.parse()?,
            "algorithms" => self.algorithms = list(value, str::parse)?,
            "max_iterations" => self.stop.max_iterations = optional(value)?,
            "rel_tol" => self.stop.rel_tol = optional(value)?,
            "abs_tol" => self.stop.abs_tol = optional(value)?,
            "iterations" => self.iterations = value.parse()?,
            "sweep_cost" => self.sweep_cost = value.parse()?,
            "normalize" => self.normalize = value.parse()?,
            "threshold" => self.threshold = value.parse()?,
            "oracle_restarts" => self.oracle_restarts = value.parse()?,
            "sweeps" => self.sweeps = value.parse()?,
            "betas" => self.betas = list(value, |s| Ok(s.parse()?))?,
            _ => bail!("unknown key"),
        }
        Ok(())
    }

    /// Every key with its resolved value.
    pub fn to_text(&self) -> String {
        let join = |items: Vec<String>| items.join(", ");
        let opt = |v: Option<String>| v.unwrap_or_else(|| "default".into());
        let lines = [
            ("experiment", self.experiment.to_string()),
            ("shapes", join(self.shapes.iter().map(|s| format_shape(s)).collect())),
            ("ranks", join(self.ranks.iter().map(|r| r.to_string()).collect())),
            ("field", self.field.to_string()),
            ("snr_db", join(self.snr_db.iter().map(|s| format_snr(*s)).collect())),
            ("trials", self.trials.to_string()),
            ("seed", self.seed.to_string()),
            ("algorithms", join(self.algorithms.iter().map(|a| a.to_string()).collect())),
            ("max_iterations", opt(self.stop.max_iterations.map(|v| v.to_string()))),
            ("rel_tol", opt(self.stop.rel_tol.map(|v| format!("{v:?}")))),
            ("abs_tol", opt(self.stop.abs_tol.map(|v| format!("{v:?}")))),
            ("iterations", self.iterations.to_string()),
            ("sweep_cost", self.sweep_cost.to_string()),
            ("normalize", self.normalize.to_string()),
            ("threshold", format!("{:?}", self.threshold)),
            ("oracle_restarts", self.oracle_restarts.to_string()),
            ("sweeps", self.sweeps.to_string()),
            ("betas", join(self.betas.iter().map(|b| format!("{b:?}")).collect())),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn stop_rule(&self, algorithm: Algorithm) -> StopRule {
        self.stop.apply(algorithm.default_stop())
    }
}

fn list<T>(value: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse)
        .collect()
}

fn optional<T: FromStr>(value: &str) -> Result<Option<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    match value {
        "default" | "" => Ok(None),
        v => Ok(Some(v.parse()?)),
    }
}

pub fn parse_shape(s: &str) -> Result<Vec<usize>> {
    s.split('x')
        .map(|d| d.trim().parse::<usize>().with_context(|| format!("bad shape `{s}`")))
        .collect()
}

pub fn format_shape(shape: &[usize]) -> String {
    shape.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x")
}

fn parse_snr(s: &str) -> Result<Option<f64>> {
    match s {
        "none" | "inf" => Ok(None),
        v => Ok(Some(v.parse()?)),
    }
}

pub fn format_snr(snr: Option<f64>) -> String {
    snr.map_or_else(|| "none".into(), |v| format!("{v:?}"))
}
