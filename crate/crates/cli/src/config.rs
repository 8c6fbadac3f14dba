//! Run configuration: flat `key = value` text with `#` comments.
//!
//! Parameter keys use the ecological names (`r`, `K`, `q`, `a`, `s`, `n`,
//! `c`, `m`); analysis options use dotted keys such as `hopf.q_min`.
//! Unknown and repeated keys are errors.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use mhtlab_core::{Branch, DimensionalParams, Frame, ModelVariant, State, Tolerances};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("key `{key}`: invalid value `{value}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("key `{key}`: {reason}")]
    Domain { key: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Analysis {
    Simulate,
    Equilibria,
    Hopf,
    Collapse,
    RegionMap,
    Basin,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::Simulate => "simulate",
            Analysis::Equilibria => "equilibria",
            Analysis::Hopf => "hopf",
            Analysis::Collapse => "collapse",
            Analysis::RegionMap => "region-map",
            Analysis::Basin => "basin",
        }
    }
}

impl FromStr for Analysis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Analysis::Simulate,
            Analysis::Equilibria,
            Analysis::Hopf,
            Analysis::Collapse,
            Analysis::RegionMap,
            Analysis::Basin,
        ]
        .into_iter()
        .find(|a| a.name() == s)
        .ok_or_else(|| "expected simulate, equilibria, hopf, collapse, region-map or basin".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Svg => "svg",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            _ => Err("expected json, csv or svg".into()),
        }
    }
}

/// Parses a comma-separated format list, removing duplicates.
pub fn parse_formats(s: &str) -> Result<Vec<Format>, String> {
    let mut out: Vec<Format> = s.split(',').map(str::parse).collect::<Result<_, _>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub t_end: f64,
    /// Uniform output spacing; `0` records every accepted step.
    pub sample_dt: f64,
    pub frame: Frame,
    /// Initial conditions in dimensional units.
    pub initial: Vec<State>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopfConfig {
    pub q_min: f64,
    pub q_max: f64,
    pub steps: usize,
    /// `None` picks the variant's default branch.
    pub branch: Option<Branch>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapseConfig {
    pub q_min: f64,
    pub q_max: f64,
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionConfig {
    pub q_min: f64,
    pub q_max: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub nq: usize,
    pub ns: usize,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinConfig {
    pub nx: usize,
    pub ny: usize,
    /// `0` means the default bound.
    pub prey_max: f64,
    pub predator_max: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub variant: ModelVariant,
    pub params: DimensionalParams,
    pub analysis: Option<Analysis>,
    pub tolerances: Tolerances,
    pub simulate: SimulateConfig,
    pub hopf: HopfConfig,
    pub collapse: CollapseConfig,
    pub region: RegionConfig,
    pub basin: BasinConfig,
    pub out: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            variant: ModelVariant::MhtAllee,
            params: DimensionalParams::default(),
            analysis: None,
            tolerances: Tolerances::default(),
            simulate: SimulateConfig {
                t_end: 100.0,
                sample_dt: 0.05,
                frame: Frame::Dimensional,
                initial: vec![State::dimensional(60.0, 2.5), State::dimensional(10.0, 1.0)],
            },
            hopf: HopfConfig {
                q_min: 100.0,
                q_max: 6000.0,
                steps: 200,
                branch: None,
            },
            collapse: CollapseConfig {
                q_min: 1.0,
                q_max: 1e5,
                grid: 400,
            },
            region: RegionConfig {
                q_min: 400.0,
                q_max: 900.0,
                s_min: 0.5,
                s_max: 2.0,
                nq: 60,
                ns: 60,
                t_max: 400.0,
            },
            basin: BasinConfig {
                nx: 100,
                ny: 100,
                prey_max: 0.0,
                predator_max: 0.0,
                t_max: 1000.0,
            },
            out: None,
            formats: None,
        }
    }
}

const KEYS: &[&str] = &[
    "variant",
    "analysis",
    "r",
    "K",
    "q",
    "a",
    "s",
    "n",
    "c",
    "m",
    "tol.rtol",
    "tol.atol",
    "tol.max_steps",
    "simulate.t_end",
    "simulate.sample_dt",
    "simulate.frame",
    "simulate.ic",
    "hopf.q_min",
    "hopf.q_max",
    "hopf.steps",
    "hopf.branch",
    "collapse.q_min",
    "collapse.q_max",
    "collapse.grid",
    "region.q_min",
    "region.q_max",
    "region.s_min",
    "region.s_max",
    "region.nq",
    "region.ns",
    "region.t_max",
    "basin.nx",
    "basin.ny",
    "basin.prey_max",
    "basin.predator_max",
    "basin.t_max",
    "output.dir",
    "output.format",
];

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.into(),
        value: value.into(),
        reason: reason.into(),
    }
}

fn num(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = value
        .parse()
        .map_err(|_| invalid(key, value, "not a number"))?;
    if !x.is_finite() {
        return Err(invalid(key, value, "must be finite"));
    }
    Ok(x)
}

fn count(key: &str, value: &str) -> Result<usize, ConfigError> {
    value
        .parse()
        .map_err(|_| invalid(key, value, "not a non-negative integer"))
}

fn parse_frame(key: &str, value: &str) -> Result<Frame, ConfigError> {
    match value {
        "dimensional" => Ok(Frame::Dimensional),
        "rescaled" => Ok(Frame::Rescaled),
        _ => Err(invalid(key, value, "expected dimensional or rescaled")),
    }
}

fn parse_branch(key: &str, value: &str) -> Result<Option<Branch>, ConfigError> {
    match value {
        "auto" => Ok(None),
        "lower" => Ok(Some(Branch::Lower)),
        "upper" => Ok(Some(Branch::Upper)),
        _ => Err(invalid(key, value, "expected auto, lower or upper")),
    }
}

/// `N,P; N,P; ...`
fn parse_initial(key: &str, value: &str) -> Result<Vec<State>, ConfigError> {
    value
        .split(';')
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(invalid(
                    key,
                    value,
                    "expected `prey,predator` pairs separated by `;`",
                ));
            }
            Ok(State::dimensional(num(key, parts[0])?, num(key, parts[1])?))
        })
        .collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    text: raw.trim().into(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
                return Err(ConfigError::UnknownKey {
                    line: line_no,
                    key: key.into(),
                });
            };
            if seen.contains(&known) {
                return Err(ConfigError::DuplicateKey {
                    line: line_no,
                    key: key.into(),
                });
            }
            seen.push(known);
            cfg.set(known, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let p = &mut self.params;
        match key {
            "variant" => {
                self.variant = value.parse().map_err(|e: String| invalid(key, value, e))?
            }
            "analysis" => {
                self.analysis = Some(value.parse().map_err(|e: String| invalid(key, value, e))?)
            }
            "r" => p.r = num(key, value)?,
            "K" => p.k = num(key, value)?,
            "q" => p.q = num(key, value)?,
            "a" => p.a = num(key, value)?,
            "s" => p.s = num(key, value)?,
            "n" => p.n = num(key, value)?,
            "c" => p.c = num(key, value)?,
            "m" => p.m = num(key, value)?,
            "tol.rtol" => self.tolerances.rtol = num(key, value)?,
            "tol.atol" => self.tolerances.atol = num(key, value)?,
            "tol.max_steps" => self.tolerances.max_steps = count(key, value)?,
            "simulate.t_end" => self.simulate.t_end = num(key, value)?,
            "simulate.sample_dt" => self.simulate.sample_dt = num(key, value)?,
            "simulate.frame" => self.simulate.frame = parse_frame(key, value)?,
            "simulate.ic" => self.simulate.initial = parse_initial(key, value)?,
            "hopf.q_min" => self.hopf.q_min = num(key, value)?,
            "hopf.q_max" => self.hopf.q_max = num(key, value)?,
            "hopf.steps" => self.hopf.steps = count(key, value)?,
            "hopf.branch" => self.hopf.branch = parse_branch(key, value)?,
            "collapse.q_min" => self.collapse.q_min = num(key, value)?,
            "collapse.q_max" => self.collapse.q_max = num(key, value)?,
            "collapse.grid" => self.collapse.grid = count(key, value)?,
            "region.q_min" => self.region.q_min = num(key, value)?,
            "region.q_max" => self.region.q_max = num(key, value)?,
            "region.s_min" => self.region.s_min = num(key, value)?,
            "region.s_max" => self.region.s_max = num(key, value)?,
            "region.nq" => self.region.nq = count(key, value)?,
            "region.ns" => self.region.ns = count(key, value)?,
            "region.t_max" => self.region.t_max = num(key, value)?,
            "basin.nx" => self.basin.nx = count(key, value)?,
            "basin.ny" => self.basin.ny = count(key, value)?,
            "basin.prey_max" => self.basin.prey_max = num(key, value)?,
            "basin.predator_max" => self.basin.predator_max = num(key, value)?,
            "basin.t_max" => self.basin.t_max = num(key, value)?,
            "output.dir" => self.out = Some(PathBuf::from(value)),
            "output.format" => {
                self.formats = Some(parse_formats(value).map_err(|e| invalid(key, value, e))?)
            }
            _ => unreachable!("key list and setter disagree on `{key}`"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let domain = |key: &str, reason: &str| ConfigError::Domain {
            key: key.into(),
            reason: reason.into(),
        };
        if let Err(mhtlab_core::Error::InvalidParameter {
            name,
            value,
            reason,
        }) = self.params.validate()
        {
            return Err(domain(name, &format!("{value} {reason}")));
        }
        if let Err(mhtlab_core::Error::InvalidParameter { value, reason, .. }) =
            self.tolerances.validate()
        {
            return Err(domain("tol.rtol", &format!("{value} {reason}")));
        }
        if !(self.tolerances.atol > 0.0) {
            return Err(domain("tol.atol", "must be > 0"));
        }
        if self.tolerances.max_steps == 0 {
            return Err(domain("tol.max_steps", "must be > 0"));
        }
        let checks: [(&str, bool, &str); 16] = [
            ("simulate.t_end", self.simulate.t_end > 0.0, "must be > 0"),
            (
                "simulate.sample_dt",
                self.simulate.sample_dt >= 0.0,
                "must be >= 0",
            ),
            (
                "simulate.ic",
                self.simulate.initial.iter().all(|x| x.in_first_quadrant()),
                "initial conditions must be non-negative",
            ),
            ("hopf.q_min", self.hopf.q_min > 0.0, "must be > 0"),
            (
                "hopf.q_max",
                self.hopf.q_max > 0.0 && self.hopf.q_max != self.hopf.q_min,
                "must be > 0 and differ from hopf.q_min",
            ),
            ("hopf.steps", self.hopf.steps > 0, "must be > 0"),
            (
                "collapse.q_max",
                self.collapse.q_min > 0.0 && self.collapse.q_max > self.collapse.q_min,
                "needs 0 < collapse.q_min < collapse.q_max",
            ),
            ("collapse.grid", self.collapse.grid > 0, "must be > 0"),
            (
                "region.q_max",
                self.region.q_min > 0.0 && self.region.q_max >= self.region.q_min,
                "needs 0 < region.q_min <= region.q_max",
            ),
            (
                "region.s_max",
                self.region.s_min > 0.0 && self.region.s_max >= self.region.s_min,
                "needs 0 < region.s_min <= region.s_max",
            ),
            ("region.nq", self.region.nq > 0, "must be > 0"),
            ("region.ns", self.region.ns > 0, "must be > 0"),
            ("region.t_max", self.region.t_max > 0.0, "must be > 0"),
            (
                "basin.nx",
                self.basin.nx > 0 && self.basin.ny > 0,
                "basin.nx and basin.ny must be > 0",
            ),
            (
                "basin.prey_max",
                self.basin.prey_max >= 0.0 && self.basin.predator_max >= 0.0,
                "bounds must be >= 0 (0 selects the default)",
            ),
            ("basin.t_max", self.basin.t_max > 0.0, "must be > 0"),
        ];
        for (key, ok, reason) in checks {
            if !ok {
                return Err(domain(key, reason));
            }
        }
        if self.simulate.initial.is_empty() {
            return Err(domain(
                "simulate.ic",
                "needs at least one initial condition",
            ));
        }
        Ok(())
    }

    /// Renders every key; `parse(render())` reproduces the configuration.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let p = &self.params;
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("variant", self.variant.name().into());
        if let Some(a) = self.analysis {
            line("analysis", a.name().into());
        }
        for (k, v) in [
            ("r", p.r),
            ("K", p.k),
            ("q", p.q),
            ("a", p.a),
            ("s", p.s),
            ("n", p.n),
            ("c", p.c),
            ("m", p.m),
        ] {
            line(k, v.to_string());
        }
        line("tol.rtol", self.tolerances.rtol.to_string());
        line("tol.atol", self.tolerances.atol.to_string());
        line("tol.max_steps", self.tolerances.max_steps.to_string());
        line("simulate.t_end", self.simulate.t_end.to_string());
        line("simulate.sample_dt", self.simulate.sample_dt.to_string());
        line("simulate.frame", self.simulate.frame.name().into());
        let ics: Vec<String> = self
            .simulate
            .initial
            .iter()
            .map(|x| format!("{},{}", x.prey, x.predator))
            .collect();
        line("simulate.ic", ics.join("; "));
        line("hopf.q_min", self.hopf.q_min.to_string());
        line("hopf.q_max", self.hopf.q_max.to_string());
        line("hopf.steps", self.hopf.steps.to_string());
        let branch = match self.hopf.branch {
            None => "auto",
            Some(Branch::Lower) => "lower",
            Some(Branch::Upper) => "upper",
        };
        line("hopf.branch", branch.into());
        line("collapse.q_min", self.collapse.q_min.to_string());
        line("collapse.q_max", self.collapse.q_max.to_string());
        line("collapse.grid", self.collapse.grid.to_string());
        let r = &self.region;
        for (k, v) in [
            ("region.q_min", r.q_min),
            ("region.q_max", r.q_max),
            ("region.s_min", r.s_min),
            ("region.s_max", r.s_max),
        ] {
            line(k, v.to_string());
        }
        line("region.nq", r.nq.to_string());
        line("region.ns", r.ns.to_string());
        line("region.t_max", r.t_max.to_string());
        let b = &self.basin;
        line("basin.nx", b.nx.to_string());
        line("basin.ny", b.ny.to_string());
        line("basin.prey_max", b.prey_max.to_string());
        line("basin.predator_max", b.predator_max.to_string());
        line("basin.t_max", b.t_max.to_string());
        if let Some(dir) = &self.out {
            line("output.dir", dir.display().to_string());
        }
        if let Some(f) = &self.formats {
            let names: Vec<&str> = f.iter().map(|f| f.name()).collect();
            line("output.format", names.join(","));
        }
        out
    }
}
