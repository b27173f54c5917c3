//! Flat key-value configuration.
//!
//! The document is TOML restricted to top-level scalars and arrays. Every
//! frequency is in units of `γ`, every length in units of `1/γ`.
//!
//! ```toml
//! gamma = 1.0
//! U = 1.0
//! phi = 1.5707963267948966     # or phi_rule = "chiral"
//! d = 0.6283185307179586
//! phase_k0d = 1.5707963267948966
//! direction = "R"
//! k_i = 10.0
//! omega0 = 5.0
//!
//! target = "steady_curve"
//! observables = ["n", "g2"]
//! axis1_name = "omega0"
//! axis1_min = 0.0
//! axis1_max = 8.0
//! axis1_points = 33
//! ```
//!
//! An axis is either `axisN_min`/`axisN_max`/`axisN_points` with optional
//! `axisN_scale = "linear" | "log"`, or an explicit `axisN_values` array.

use std::collections::BTreeSet;
use std::path::PathBuf;

use giantwg_core::{Direction, DriveConfig, NumericalControls, SystemParams};
use serde::Serialize;
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("parse error at line {line}: {field}: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },
}

impl ConfigError {
    fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<giantwg_core::Error> for ConfigError {
    fn from(e: giantwg_core::Error) -> Self {
        match e {
            giantwg_core::Error::InvalidParameter { name, reason } => ConfigError::validation(name, reason),
            other => ConfigError::validation("parameters", other.to_string()),
        }
    }
}

/// Parameters a sweep axis may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Param {
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "U")]
    U,
    #[serde(rename = "phi")]
    Phi,
    #[serde(rename = "d")]
    D,
    #[serde(rename = "phase_k0d")]
    PhaseK0d,
    #[serde(rename = "k_i")]
    KI,
    #[serde(rename = "omega0")]
    Omega0,
    #[serde(rename = "tau")]
    Tau,
    #[serde(rename = "p1")]
    P1,
}

impl Param {
    pub const ALL: [Param; 9] = [
        Param::Gamma,
        Param::U,
        Param::Phi,
        Param::D,
        Param::PhaseK0d,
        Param::KI,
        Param::Omega0,
        Param::Tau,
        Param::P1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::Gamma => "gamma",
            Param::U => "U",
            Param::Phi => "phi",
            Param::D => "d",
            Param::PhaseK0d => "phase_k0d",
            Param::KI => "k_i",
            Param::Omega0 => "omega0",
            Param::Tau => "tau",
            Param::P1 => "p1",
        }
    }

    fn parse(s: &str) -> Option<Param> {
        Param::ALL.into_iter().find(|p| p.name() == s || (s == "u" && *p == Param::U))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    SinglePhoton,
    G2Map,
    FluorescenceSlice,
    SteadyCurve,
    ReflectedCurve,
    GapCurve,
}

impl Target {
    pub const ALL: [Target; 6] = [
        Target::SinglePhoton,
        Target::G2Map,
        Target::FluorescenceSlice,
        Target::SteadyCurve,
        Target::ReflectedCurve,
        Target::GapCurve,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::SinglePhoton => "single_photon",
            Target::G2Map => "g2_map",
            Target::FluorescenceSlice => "fluorescence_slice",
            Target::SteadyCurve => "steady_curve",
            Target::ReflectedCurve => "reflected_curve",
            Target::GapCurve => "gap_curve",
        }
    }

    /// Observables the target can report; the first entries up to
    /// `default_count` are reported when none are requested.
    pub fn observables(self) -> &'static [&'static str] {
        match self {
            Target::SinglePhoton => &["t", "r", "sigma", "green"],
            Target::G2Map => &["g2", "t_s"],
            Target::FluorescenceSlice => &["fluorescence"],
            Target::SteadyCurve => &["n", "g2", "b_mean", "transmitted_g2", "top_population"],
            Target::ReflectedCurve => &["rho_L", "correlator"],
            Target::GapCurve => &["gap"],
        }
    }

    fn default_count(self) -> usize {
        match self {
            Target::SinglePhoton | Target::SteadyCurve => 2,
            _ => 1,
        }
    }

    pub fn default_observables(self) -> Vec<String> {
        self.observables()[..self.default_count()]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    fn parse(s: &str) -> Option<Target> {
        Target::ALL.into_iter().find(|t| t.name() == s)
    }

    /// Targets solved by the master equation, valid only at `φ = ±π/2`.
    pub fn is_markovian(self) -> bool {
        matches!(self, Target::SteadyCurve | Target::ReflectedCurve | Target::GapCurve)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: Param,
    pub scale: Scale,
    pub values: Vec<f64>,
}

/// How `φ` is fixed at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum PhiRule {
    Fixed,
    /// `φ = (2n+1)π − (k₀d + k_i d)`, which darkens the left-moving mode.
    Chiral { n: i64 },
}

/// How `k₀d` is fixed at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum ThetaRule {
    Fixed,
    /// `k₀d` chosen so that `θ_{R,k_i}` takes this value.
    Value { theta: f64 },
    /// `θ_{R,k_i} = π − φ`.
    PiMinusPhi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// One parameter point before the rules are applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub gamma: f64,
    #[serde(rename = "U")]
    pub u: f64,
    pub phi: f64,
    pub d: f64,
    pub phase_k0d: f64,
    pub k_i: f64,
    pub omega0: f64,
    pub tau: f64,
    pub p1: f64,
}

impl Point {
    pub fn set(&mut self, p: Param, v: f64) {
        match p {
            Param::Gamma => self.gamma = v,
            Param::U => self.u = v,
            Param::Phi => self.phi = v,
            Param::D => self.d = v,
            Param::PhaseK0d => self.phase_k0d = v,
            Param::KI => self.k_i = v,
            Param::Omega0 => self.omega0 = v,
            Param::Tau => self.tau = v,
            Param::P1 => self.p1 = v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub target: Target,
    pub observables: Vec<String>,
    pub axes: Vec<Axis>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

/// Validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub base: Point,
    pub direction: Direction,
    pub phi_rule: PhiRule,
    pub theta_rule: ThetaRule,
    pub controls: NumericalControls,
    pub sweep: SweepSpec,
}

impl Config {
    /// Model inputs at `point` after the phase rules are applied.
    pub fn resolve(&self, point: &Point) -> Result<(SystemParams, DriveConfig), giantwg_core::Error> {
        let mut params = SystemParams::new(point.gamma, point.u, point.phi, point.d, point.phase_k0d)?
            .with_controls(self.controls.clone());
        match self.theta_rule {
            ThetaRule::Fixed => {}
            ThetaRule::Value { theta } => params = params.with_propagation_phase(theta, point.k_i),
            ThetaRule::PiMinusPhi => {
                let theta = std::f64::consts::PI - params.phi;
                params = params.with_propagation_phase(theta, point.k_i)
            }
        }
        if let PhiRule::Chiral { n } = self.phi_rule {
            params = params.with_chiral_phase(point.k_i, n);
        }
        params.validate()?;
        let drive = DriveConfig::new(self.direction, point.k_i, point.omega0)?;
        Ok((params, drive))
    }

    /// Grid points in row-major order over the axes.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let mut points: Vec<Vec<f64>> = vec![Vec::new()];
        for axis in &self.sweep.axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        points
    }

    pub fn point_at(&self, coords: &[f64]) -> Point {
        let mut p = self.base;
        for (axis, &v) in self.sweep.axes.iter().zip(coords) {
            p.set(axis.name, v);
        }
        p
    }
}

const KNOWN_KEYS: &[&str] = &[
    "gamma",
    "U",
    "u",
    "phi",
    "phi_rule",
    "chiral_n",
    "theta_r",
    "theta_rule",
    "d",
    "phase_k0d",
    "direction",
    "k_i",
    "omega0",
    "tau",
    "p1",
    "series_rel_tol",
    "series_max_order",
    "fock_cutoff",
    "quadrature_abs_tol",
    "ode_rel_tol",
    "target",
    "observables",
    "output",
    "format",
];
const AXIS_FIELDS: &[&str] = &["name", "min", "max", "points", "scale", "values"];
const MAX_AXES: usize = 2;

struct Doc<'a> {
    text: &'a str,
    table: Table,
    used: BTreeSet<String>,
}

impl<'a> Doc<'a> {
    fn line_of(&self, key: &str) -> usize {
        self.text
            .lines()
            .position(|l| {
                let l = l.trim_start();
                l.strip_prefix(key)
                    .is_some_and(|rest| rest.trim_start().starts_with('='))
            })
            .map_or(0, |i| i + 1)
    }

    fn type_error(&self, key: &str, expected: &str, got: &Value) -> ConfigError {
        ConfigError::Parse {
            line: self.line_of(key),
            field: key.to_string(),
            message: format!("expected {expected}, found {}", got.type_str()),
        }
    }

    fn raw(&mut self, key: &str) -> Option<Value> {
        let v = self.table.get(key).cloned();
        if v.is_some() {
            self.used.insert(key.to_string());
        }
        v
    }

    fn float(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(f)),
            Some(Value::Integer(i)) => Ok(Some(i as f64)),
            Some(other) => Err(self.type_error(key, "a number", &other)),
        }
    }

    fn int(&mut self, key: &str) -> Result<Option<i64>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Integer(i)) => Ok(Some(i)),
            Some(other) => Err(self.type_error(key, "an integer", &other)),
        }
    }

    fn count(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.int(key)? {
            None => Ok(None),
            Some(i) if i >= 0 => Ok(Some(i as usize)),
            Some(i) => Err(ConfigError::validation(key, format!("must be >= 0, got {i}"))),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<String>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(other) => Err(self.type_error(key, "a string", &other)),
        }
    }

    fn floats(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        let Value::Array(items) = &v else {
            return Err(self.type_error(key, "an array of numbers", &v));
        };
        items
            .iter()
            .map(|x| match x {
                Value::Float(f) => Ok(*f),
                Value::Integer(i) => Ok(*i as f64),
                other => Err(self.type_error(key, "an array of numbers", other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn strings(&mut self, key: &str) -> Result<Option<Vec<String>>, ConfigError> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        let Value::Array(items) = &v else {
            return Err(self.type_error(key, "an array of strings", &v));
        };
        items
            .iter()
            .map(|x| match x {
                Value::String(s) => Ok(s.clone()),
                other => Err(self.type_error(key, "an array of strings", other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

fn is_known(key: &str) -> bool {
    if KNOWN_KEYS.contains(&key) {
        return true;
    }
    (1..=MAX_AXES).any(|i| {
        key.strip_prefix(&format!("axis{i}_"))
            .is_some_and(|f| AXIS_FIELDS.contains(&f))
    })
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| {
        let line = e
            .span()
            .map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        ConfigError::Parse {
            line,
            field: "document".into(),
            message: e.message().to_string(),
        }
    })?;
    let mut doc = Doc {
        text,
        table,
        used: BTreeSet::new(),
    };
    for (key, value) in doc.table.iter() {
        if !is_known(key) {
            return Err(ConfigError::Parse {
                line: doc.line_of(key),
                field: key.clone(),
                message: "unknown key".into(),
            });
        }
        if matches!(value, Value::Table(_)) {
            return Err(ConfigError::Parse {
                line: doc.line_of(key),
                field: key.clone(),
                message: "nested tables are not supported; the document is flat".into(),
            });
        }
    }
    if doc.table.contains_key("U") && doc.table.contains_key("u") {
        return Err(ConfigError::validation("U", "given twice (as U and u)"));
    }

    let gamma = doc.float("gamma")?.unwrap_or(1.0);
    let u = match doc.float("U")? {
        Some(v) => v,
        None => doc.float("u")?.unwrap_or(0.0),
    };
    let phi_value = doc.float("phi")?;
    let phi_rule = match doc.string("phi_rule")?.as_deref() {
        None | Some("fixed") => PhiRule::Fixed,
        Some("chiral") => PhiRule::Chiral {
            n: doc.int("chiral_n")?.unwrap_or(0),
        },
        Some(other) => {
            return Err(ConfigError::validation(
                "phi_rule",
                format!("expected \"fixed\" or \"chiral\", got {other:?}"),
            ))
        }
    };
    if phi_rule == PhiRule::Fixed && doc.table.contains_key("chiral_n") {
        return Err(ConfigError::validation("chiral_n", "only meaningful with phi_rule = \"chiral\""));
    }
    let theta_value = doc.float("theta_r")?;
    let theta_rule = match (doc.string("theta_rule")?.as_deref(), theta_value) {
        (None | Some("fixed"), None) => ThetaRule::Fixed,
        (None | Some("value"), Some(theta)) => ThetaRule::Value { theta },
        (Some("pi_minus_phi"), None) => ThetaRule::PiMinusPhi,
        (Some("value"), None) => return Err(ConfigError::validation("theta_r", "theta_rule = \"value\" needs theta_r")),
        (Some(other), _) => {
            return Err(ConfigError::validation(
                "theta_rule",
                format!("expected \"fixed\", \"value\" or \"pi_minus_phi\" (without theta_r), got {other:?}"),
            ))
        }
    };
    if phi_rule != PhiRule::Fixed && theta_rule != ThetaRule::Fixed {
        return Err(ConfigError::validation(
            "phi_rule",
            "cannot be combined with theta_rule or theta_r; both fix the same phase relation",
        ));
    }
    if phi_rule != PhiRule::Fixed && phi_value.is_some() {
        return Err(ConfigError::validation("phi", "is computed by phi_rule = \"chiral\"; remove it"));
    }

    let direction = match doc.string("direction")?.as_deref() {
        None | Some("R") | Some("r") => Direction::R,
        Some("L") | Some("l") => Direction::L,
        Some(other) => return Err(ConfigError::validation("direction", format!("expected \"R\" or \"L\", got {other:?}"))),
    };
    let base = Point {
        gamma,
        u,
        phi: phi_value.unwrap_or(0.0),
        d: doc.float("d")?.unwrap_or(0.0),
        phase_k0d: doc.float("phase_k0d")?.unwrap_or(0.0),
        k_i: doc.float("k_i")?.unwrap_or(0.0),
        omega0: doc.float("omega0")?.unwrap_or(0.0),
        tau: doc.float("tau")?.unwrap_or(0.0),
        p1: doc.float("p1")?.unwrap_or(0.0),
    };

    let defaults = NumericalControls::default();
    let controls = NumericalControls {
        series_rel_tol: doc.float("series_rel_tol")?.unwrap_or(defaults.series_rel_tol),
        series_max_order: doc.count("series_max_order")?.unwrap_or(defaults.series_max_order),
        fock_cutoff: doc.count("fock_cutoff")?,
        quadrature_abs_tol: doc.float("quadrature_abs_tol")?.unwrap_or(defaults.quadrature_abs_tol),
        ode_rel_tol: doc.float("ode_rel_tol")?.unwrap_or(defaults.ode_rel_tol),
    };
    controls.validate()?;

    let target = match doc.string("target")? {
        None => Target::SteadyCurve,
        Some(s) => Target::parse(&s).ok_or_else(|| {
            let names: Vec<_> = Target::ALL.iter().map(|t| t.name()).collect();
            ConfigError::validation("target", format!("unknown target {s:?}; expected one of {names:?}"))
        })?,
    };
    let observables = match doc.strings("observables")? {
        None => target.default_observables(),
        Some(list) => list,
    };
    let axes = parse_axes(&mut doc)?;
    let output = doc.string("output")?.map(PathBuf::from);
    let format = match doc.string("format")? {
        None => Format::Csv,
        Some(s) => Format::parse(&s)
            .ok_or_else(|| ConfigError::validation("format", format!("expected \"csv\" or \"json\", got {s:?}")))?,
    };
    debug_assert!(doc.table.keys().all(|k| doc.used.contains(k)));

    let config = Config {
        base,
        direction,
        phi_rule,
        theta_rule,
        controls,
        sweep: SweepSpec {
            target,
            observables,
            axes,
            output,
            format,
        },
    };
    validate(&config)?;
    Ok(config)
}

fn parse_axes(doc: &mut Doc) -> Result<Vec<Axis>, ConfigError> {
    let mut axes = Vec::new();
    for i in 1..=MAX_AXES {
        let key = |f: &str| format!("axis{i}_{f}");
        let present = AXIS_FIELDS.iter().any(|f| doc.table.contains_key(&key(f)));
        if !present {
            continue;
        }
        if axes.len() + 1 != i {
            return Err(ConfigError::validation(key("name"), "axis2 needs axis1"));
        }
        let name_s = doc
            .string(&key("name"))?
            .ok_or_else(|| ConfigError::validation(key("name"), "missing"))?;
        let name = Param::parse(&name_s).ok_or_else(|| {
            let names: Vec<_> = Param::ALL.iter().map(|p| p.name()).collect();
            ConfigError::validation(key("name"), format!("unknown parameter {name_s:?}; expected one of {names:?}"))
        })?;
        let scale = match doc.string(&key("scale"))?.as_deref() {
            None | Some("linear") => Scale::Linear,
            Some("log") => Scale::Log,
            Some(other) => {
                return Err(ConfigError::validation(key("scale"), format!("expected \"linear\" or \"log\", got {other:?}")))
            }
        };
        let explicit = doc.floats(&key("values"))?;
        let (min, max, points) = (doc.float(&key("min"))?, doc.float(&key("max"))?, doc.count(&key("points"))?);
        let values = match (explicit, min, max, points) {
            (Some(v), None, None, None) => v,
            (None, Some(lo), Some(hi), Some(n)) => {
                if n < 2 {
                    return Err(ConfigError::validation(key("points"), format!("must be >= 2, got {n}")));
                }
                if !(lo.is_finite() && hi.is_finite()) {
                    return Err(ConfigError::validation(key("min"), "range must be finite"));
                }
                if scale == Scale::Log && !(lo > 0.0 && hi > 0.0) {
                    return Err(ConfigError::validation(key("scale"), "log axes need min > 0 and max > 0"));
                }
                (0..n)
                    .map(|j| {
                        let t = j as f64 / (n - 1) as f64;
                        match scale {
                            Scale::Linear => lo + t * (hi - lo),
                            Scale::Log => (lo.ln() + t * (hi.ln() - lo.ln())).exp(),
                        }
                    })
                    .collect()
            }
            _ => {
                return Err(ConfigError::validation(
                    key("values"),
                    "give either axis values or all of min, max and points",
                ))
            }
        };
        if values.len() < 2 {
            return Err(ConfigError::validation(key("values"), "an axis needs at least 2 points"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(ConfigError::validation(key("values"), format!("must be finite, got {bad}")));
        }
        axes.push(Axis { name, scale, values });
    }
    if axes.len() == 2 && axes[0].name == axes[1].name {
        return Err(ConfigError::validation("axis2_name", "repeats axis1_name"));
    }
    Ok(axes)
}

fn validate(config: &Config) -> Result<(), ConfigError> {
    let target = config.sweep.target;
    if config.sweep.observables.is_empty() {
        return Err(ConfigError::validation("observables", "must not be empty"));
    }
    for obs in &config.sweep.observables {
        if !target.observables().contains(&obs.as_str()) {
            return Err(ConfigError::validation(
                "observables",
                format!("{obs:?} is not reported by {}; expected one of {:?}", target.name(), target.observables()),
            ));
        }
    }
    let swept = |p: Param| config.sweep.axes.iter().any(|a| a.name == p);
    if matches!(config.phi_rule, PhiRule::Chiral { .. }) && swept(Param::Phi) {
        return Err(ConfigError::validation("axis1_name", "phi cannot be swept while phi_rule = \"chiral\""));
    }
    if config.theta_rule != ThetaRule::Fixed && swept(Param::PhaseK0d) {
        return Err(ConfigError::validation("axis1_name", "phase_k0d cannot be swept while theta_rule fixes it"));
    }
    // every point must resolve; checking the corners catches sign and range errors
    let grid = config.grid();
    for coords in [grid.first(), grid.last()].into_iter().flatten() {
        config.resolve(&config.point_at(coords))?;
    }
    Ok(())
}
