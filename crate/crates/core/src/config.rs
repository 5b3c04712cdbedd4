//! Experiment configuration: an INI file with a `[run]` section and one
//! section per experiment.
//!
//! ```text
//! [run]
//! seed = 7
//! out = results
//! engine = bucketed        ; or naive
//! verify = false           ; cross-check bucketed counts against the naive engine
//!
//! [incidence-sweep]
//! deltas = 2^-6..2^-12     ; powers of two, exponents inclusive
//! families = tube, random
//!
//! [rich-points]
//! deltas = 2^-6, 2^-7, 1/256
//! epsilon_factors = 1, 4, 16
//! ks = 2, 4, 8, 16
//! ```
//!
//! Numbers are decimals, fractions `p/q` or powers `2^e`. A list is a comma
//! separated sequence of numbers and ranges `2^a..2^b`. A key present with an
//! empty value is an error. Unknown sections and keys are errors. Text after
//! whitespace followed by `;` or `#` is a comment.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ini::{Ini, Properties};
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::generators::GeneratorKind;
use crate::incidence::Engine;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    IncidenceSweep,
    RichPoints,
    DualityCheck,
    StarBound,
    LwSweep,
    TubeVolume,
    SobolevCheck,
    Isoperimetric,
    ReducePipeline,
    VerifyAll,
}

impl Experiment {
    /// Every experiment except `verify-all`, in run order.
    pub const SWEEPS: [Experiment; 9] = [
        Experiment::IncidenceSweep,
        Experiment::RichPoints,
        Experiment::DualityCheck,
        Experiment::StarBound,
        Experiment::LwSweep,
        Experiment::TubeVolume,
        Experiment::SobolevCheck,
        Experiment::Isoperimetric,
        Experiment::ReducePipeline,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::IncidenceSweep => "incidence-sweep",
            Experiment::RichPoints => "rich-points",
            Experiment::DualityCheck => "duality-check",
            Experiment::StarBound => "star-bound",
            Experiment::LwSweep => "lw-sweep",
            Experiment::TubeVolume => "tube-volume",
            Experiment::SobolevCheck => "sobolev-check",
            Experiment::Isoperimetric => "isoperimetric",
            Experiment::ReducePipeline => "reduce-pipeline",
            Experiment::VerifyAll => "verify-all",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::SWEEPS
            .iter()
            .chain(std::iter::once(&Experiment::VerifyAll))
            .find(|e| e.name() == s.trim())
            .copied()
            .ok_or_else(|| LabError::Config(format!("unknown experiment '{s}'")))
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Sweep ranges of one experiment. Fields an experiment does not read are ignored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Params {
    pub deltas: Vec<f64>,
    /// Explicit ε per δ; when empty, `epsilon_factors` apply.
    pub epsilons: Vec<f64>,
    pub epsilon_factors: Vec<f64>,
    pub ks: Vec<u32>,
    pub hs: Vec<f64>,
    pub radii: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub families: Vec<GeneratorKind>,
    /// Names from the shape zoo, or `all`.
    pub shapes: Vec<String>,
    /// Names from the function zoo, or `all`.
    pub functions: Vec<String>,
    pub samples: usize,
    pub instances: usize,
    /// Number of k-star centers.
    pub m: usize,
    pub n_points: usize,
    pub n_lines: usize,
}

fn pow2(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(-e)).collect()
}

impl Params {
    pub fn defaults(exp: Experiment) -> Params {
        let mut p = Params {
            deltas: pow2(4, 7),
            epsilons: Vec::new(),
            epsilon_factors: vec![1.0],
            ks: vec![2],
            hs: vec![1.0 / 64.0],
            radii: vec![0.5],
            lambdas: vec![0.5, 2.0],
            families: vec![GeneratorKind::Random],
            shapes: vec!["all".into()],
            functions: vec!["all".into()],
            samples: 1000,
            instances: 10,
            m: 8,
            n_points: 400,
            n_lines: 400,
        };
        match exp {
            Experiment::IncidenceSweep => {
                p.deltas = pow2(6, 12);
                p.families = vec![GeneratorKind::Tube];
            }
            Experiment::RichPoints => {
                p.deltas = pow2(6, 8);
                p.epsilon_factors = vec![1.0, 4.0, 16.0];
                p.ks = vec![2, 4, 8, 16];
                p.families = vec![GeneratorKind::Rectangle, GeneratorKind::KStar];
            }
            Experiment::DualityCheck => {
                p.deltas = pow2(4, 10);
                p.samples = 10_000;
            }
            Experiment::StarBound => {
                p.epsilons = pow2(4, 8);
                p.deltas = p.epsilons.clone();
                p.samples = 16;
            }
            Experiment::LwSweep => {
                p.radii = vec![0.25, 0.5];
                p.hs = vec![1.0 / 64.0];
            }
            Experiment::TubeVolume => {
                p.samples = 4;
            }
            Experiment::SobolevCheck => {
                p.hs = vec![1.0 / 64.0, 1.0 / 128.0];
                p.lambdas = vec![2.0];
            }
            Experiment::Isoperimetric => {
                p.hs = vec![1.0 / 32.0, 1.0 / 64.0];
                p.instances = 100;
            }
            Experiment::ReducePipeline => {}
            Experiment::VerifyAll => {}
        }
        p
    }

    fn apply(&mut self, props: &Properties, section: &str) -> Result<()> {
        let mut explicit_deltas = false;
        for (key, value) in props.iter() {
            let value = strip_comment(value);
            let ctx = |e: LabError| LabError::Config(format!("[{section}] {key}: {e}"));
            match key {
                "deltas" => {
                    self.deltas = parse_list(value).map_err(ctx)?;
                    explicit_deltas = true;
                }
                "epsilons" => self.epsilons = parse_list(value).map_err(ctx)?,
                "epsilon_factors" => self.epsilon_factors = parse_list(value).map_err(ctx)?,
                "ks" => {
                    self.ks = parse_list(value)
                        .and_then(|v| v.into_iter().map(to_count).collect())
                        .map_err(ctx)?
                }
                "hs" => self.hs = parse_list(value).map_err(ctx)?,
                "radii" => self.radii = parse_list(value).map_err(ctx)?,
                "lambdas" => self.lambdas = parse_list(value).map_err(ctx)?,
                "families" => {
                    self.families = split(value)
                        .map(GeneratorKind::parse)
                        .collect::<Result<_>>()
                        .map_err(ctx)?
                }
                "shapes" => self.shapes = split(value).map(str::to_string).collect(),
                "functions" => self.functions = split(value).map(str::to_string).collect(),
                "samples" => self.samples = parse_usize(value).map_err(ctx)?,
                "instances" => self.instances = parse_usize(value).map_err(ctx)?,
                "m" => self.m = parse_usize(value).map_err(ctx)?,
                "n_points" => self.n_points = parse_usize(value).map_err(ctx)?,
                "n_lines" => self.n_lines = parse_usize(value).map_err(ctx)?,
                other => return Err(LabError::Config(format!("[{section}] unknown key '{other}'"))),
            }
        }
        // A star-bound section that sets only epsilons runs at δ = ε.
        if section == Experiment::StarBound.name() && !explicit_deltas && props.contains_key("epsilons") {
            self.deltas = self.epsilons.clone();
        }
        Ok(())
    }

    pub fn validate(&self, exp: Experiment) -> Result<()> {
        let err = |m: String| Err(LabError::Config(format!("[{exp}] {m}")));
        let lists: [(&str, bool); 9] = [
            ("deltas", self.deltas.is_empty()),
            ("epsilon_factors", self.epsilon_factors.is_empty()),
            ("ks", self.ks.is_empty()),
            ("hs", self.hs.is_empty()),
            ("radii", self.radii.is_empty()),
            ("lambdas", self.lambdas.is_empty()),
            ("families", self.families.is_empty()),
            ("shapes", self.shapes.is_empty()),
            ("functions", self.functions.is_empty()),
        ];
        if let Some((name, _)) = lists.iter().find(|(_, empty)| *empty) {
            return err(format!("sweep list '{name}' is empty"));
        }
        let positive = [
            ("deltas", &self.deltas),
            ("epsilons", &self.epsilons),
            ("hs", &self.hs),
            ("radii", &self.radii),
            ("lambdas", &self.lambdas),
        ];
        for (name, v) in positive {
            if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return err(format!("'{name}' must be positive and finite"));
            }
        }
        if self.deltas.iter().any(|&d| d > 1.0) {
            return err("deltas must lie in (0, 1]".into());
        }
        if self.epsilon_factors.iter().any(|&f| !(f >= 1.0 && f.is_finite())) {
            return err("epsilon_factors must be >= 1 so that delta <= epsilon".into());
        }
        if !self.epsilons.is_empty() {
            if self.epsilons.len() != self.deltas.len() {
                return err(format!(
                    "epsilons ({}) and deltas ({}) must have equal length",
                    self.epsilons.len(),
                    self.deltas.len()
                ));
            }
            if let Some((d, e)) = self.deltas.iter().zip(&self.epsilons).find(|(d, e)| d > e) {
                return err(format!("delta {d} exceeds epsilon {e}"));
            }
        }
        crate::measure::select_shapes(&self.shapes)?;
        crate::sobolev::select_functions(&self.functions)?;
        if self.ks.contains(&0) {
            return err("ks must be positive".into());
        }
        if self.samples == 0 || self.instances == 0 || self.m == 0 {
            return err("samples, instances and m must be positive".into());
        }
        Ok(())
    }

    /// The `(δ, ε)` pairs of the sweep: explicit epsilons, or every δ times every factor.
    pub fn delta_epsilon_pairs(&self) -> Vec<(f64, f64)> {
        if self.epsilons.is_empty() {
            self.deltas
                .iter()
                .flat_map(|&d| self.epsilon_factors.iter().map(move |&f| (d, f * d)))
                .collect()
        } else {
            self.deltas.iter().copied().zip(self.epsilons.iter().copied()).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub engine: Engine,
    pub verify: bool,
    pub params: BTreeMap<Experiment, Params>,
}

impl ExperimentConfig {
    /// Defaults for every experiment.
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            seed: 0,
            out_dir: PathBuf::from("lab-out"),
            engine: Engine::Bucketed,
            verify: false,
            params: Experiment::SWEEPS.iter().map(|&e| (e, Params::defaults(e))).collect(),
        }
    }

    pub fn params(&self, exp: Experiment) -> &Params {
        &self.params[&exp]
    }

    pub fn params_mut(&mut self, exp: Experiment) -> &mut Params {
        self.params.get_mut(&exp).expect("every sweep has params")
    }

    /// Parses INI text on top of the defaults. `experiment` comes from the
    /// command line; a `[run] experiment` key is only used when it is `None`.
    pub fn from_ini_str(text: &str, experiment: Option<Experiment>) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        let run = ini.section(Some("run"));
        let experiment = match (experiment, run.and_then(|r| r.get("experiment"))) {
            (Some(e), _) => e,
            (None, Some(name)) => Experiment::parse(strip_comment(name))?,
            (None, None) => return Err(LabError::Config("no experiment given".into())),
        };
        let mut cfg = Self::new(experiment);
        for (section, props) in ini.iter() {
            match section {
                None => {
                    if props.iter().next().is_some() {
                        return Err(LabError::Config("keys outside of a section".into()));
                    }
                }
                Some("run") => cfg.apply_run(props)?,
                Some(name) => {
                    let exp = Experiment::parse(name)?;
                    if exp == Experiment::VerifyAll {
                        return Err(LabError::Config("[verify-all] takes no keys".into()));
                    }
                    cfg.params_mut(exp).apply(props, name)?;
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, experiment: Option<Experiment>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_ini_str(&text, experiment)
    }

    fn apply_run(&mut self, props: &Properties) -> Result<()> {
        for (key, value) in props.iter() {
            let value = strip_comment(value);
            match key {
                "experiment" => {}
                "seed" => {
                    self.seed = value
                        .trim()
                        .parse()
                        .map_err(|_| LabError::Config(format!("[run] seed: bad integer '{value}'")))?
                }
                "out" => self.out_dir = PathBuf::from(value.trim()),
                "engine" => {
                    self.engine = match value.trim() {
                        "naive" => Engine::Naive,
                        "bucketed" => Engine::Bucketed,
                        other => return Err(LabError::Config(format!("[run] unknown engine '{other}'"))),
                    }
                }
                "verify" => {
                    self.verify = match value.trim() {
                        "true" | "yes" | "1" => true,
                        "false" | "no" | "0" => false,
                        other => return Err(LabError::Config(format!("[run] verify: bad boolean '{other}'"))),
                    }
                }
                other => return Err(LabError::Config(format!("[run] unknown key '{other}'"))),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for (exp, p) in &self.params {
            p.validate(*exp)?;
        }
        Ok(())
    }
}

/// Drops a trailing `; ...` or `# ...` comment that follows whitespace.
fn strip_comment(value: &str) -> &str {
    let b = value.as_bytes();
    let cut = (0..b.len())
        .find(|&i| (b[i] == b';' || b[i] == b'#') && (i == 0 || b[i - 1].is_ascii_whitespace()))
        .unwrap_or(b.len());
    value[..cut].trim()
}

fn split(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// `1.5`, `1/64`, `2^-6`.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || LabError::Config(format!("bad number '{s}'"));
    let v = if let Some(e) = s.strip_prefix("2^") {
        2f64.powi(e.trim().parse::<i32>().map_err(|_| bad())?)
    } else if let Some((p, q)) = s.split_once('/') {
        p.trim().parse::<f64>().map_err(|_| bad())? / q.trim().parse::<f64>().map_err(|_| bad())?
    } else {
        s.parse::<f64>().map_err(|_| bad())?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// Comma separated numbers and `2^a..2^b` ranges. An empty value is an error.
pub fn parse_list(value: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in split(value) {
        if let Some((a, b)) = item.split_once("..") {
            let exp = |s: &str| {
                s.trim()
                    .strip_prefix("2^")
                    .and_then(|e| e.trim().parse::<i32>().ok())
                    .ok_or_else(|| LabError::Config(format!("range endpoints must be powers of two: '{item}'")))
            };
            let (ea, eb) = (exp(a)?, exp(b)?);
            let step = if eb >= ea { 1 } else { -1 };
            let mut e = ea;
            loop {
                out.push(2f64.powi(e));
                if e == eb {
                    break;
                }
                e += step;
            }
        } else {
            out.push(parse_number(item)?);
        }
    }
    if out.is_empty() {
        return Err(LabError::Config("empty list".into()));
    }
    Ok(out)
}

fn parse_usize(value: &str) -> Result<usize> {
    value
        .trim()
        .parse()
        .map_err(|_| LabError::Config(format!("bad integer '{value}'")))
}

fn to_count(v: f64) -> Result<u32> {
    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as u32)
    } else {
        Err(LabError::Config(format!("expected a nonnegative integer, got {v}")))
    }
}
