//! Run configuration: a single TOML file describing the domain, the exponent,
//! discretization sizes and the command to run.
//!
//! ```toml
//! command = "certify"          # optional; the CLI subcommand takes precedence
//! p = 2.0
//! epsilons = [0.4, 0.2, 0.1]   # sweep only
//!
//! [curvature]                  # or [parametric] with x, y, t_range
//! L = 3.14159
//! k = "-0.5"                   # expression in s and L, a number, or samples
//!
//! [width]
//! delta = "0.4"
//!
//! [mesh]
//! ns = 256
//! nt = 32
//! ```
//!
//! See the README for every key and its default.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::asymptotics::MeshPolicy;
use crate::eig2d::{DEFAULT_NS, DEFAULT_NT};
use crate::error::{Error, Result};
use crate::expr::{parse_expression, Expr};
use crate::geometry::{
    curvature_from_parametric, reconstruct_with_tol, FermiDomain, Profile, WidthProfile, DEFAULT_SAMPLES,
    DEFAULT_SYMMETRY_TOL,
};

pub const DEFAULT_ELEMENTS_1D: usize = 1024;
pub const DEFAULT_SHOOTING_TOL: f64 = 1e-12;
pub const DEFAULT_FIGURE_POINTS: usize = 500;
pub const DEFAULT_OUTPUT_DIR: &str = "fermi-output";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Bounds,
    Certify,
    Solve1d,
    Solve2d,
    Sweep,
    #[serde(rename = "figure2")]
    PiComparison,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Bounds,
        Command::Certify,
        Command::Solve1d,
        Command::Solve2d,
        Command::Sweep,
        Command::PiComparison,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::Certify => "certify",
            Command::Solve1d => "solve1d",
            Command::Solve2d => "solve2d",
            Command::Sweep => "sweep",
            Command::PiComparison => "figure2",
        }
    }

    /// Whether the command needs a domain and an exponent.
    pub fn needs_domain(self) -> bool {
        self != Command::PiComparison
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
                format!("unknown command `{s}`; expected one of {}", names.join(", "))
            })
    }
}

/// A function of arc length as written in the config.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionInput {
    Constant(f64),
    Expression(Expr),
    /// Equispaced samples over `[0, L]`.
    Samples(Vec<f64>),
}

impl FunctionInput {
    pub fn to_profile(&self) -> Profile {
        match self {
            FunctionInput::Constant(v) => Profile::Constant(*v),
            FunctionInput::Expression(e) => Profile::Expr(e.clone()),
            FunctionInput::Samples(v) => Profile::Samples(v.clone()),
        }
    }
}

impl Serialize for FunctionInput {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            FunctionInput::Constant(v) => ser.serialize_f64(*v),
            FunctionInput::Expression(e) => ser.collect_str(e),
            FunctionInput::Samples(v) => v.serialize(ser),
        }
    }
}

fn serialize_expr<S: Serializer>(e: &Expr, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.collect_str(e)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CurveInput {
    Curvature {
        #[serde(rename = "L")]
        length: f64,
        k: FunctionInput,
    },
    Parametric {
        #[serde(serialize_with = "serialize_expr")]
        x: Expr,
        #[serde(serialize_with = "serialize_expr")]
        y: Expr,
        t_range: (f64, f64),
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshConfig {
    /// Cells along `s` for the 2-D solver (even, at least 8).
    pub ns: usize,
    /// Cells across the width for the 2-D solver (at least 8).
    pub nt: usize,
    /// Nodes of the curvature and width grids (odd).
    pub samples: usize,
    /// Elements of the discretized 1-D cross-check.
    pub elements_1d: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            ns: DEFAULT_NS,
            nt: DEFAULT_NT,
            samples: DEFAULT_SAMPLES,
            elements_1d: DEFAULT_ELEMENTS_1D,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative evenness tolerance for curvature and width.
    pub symmetry: f64,
    /// Bisection tolerance of the shooting solver.
    pub shooting: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            symmetry: DEFAULT_SYMMETRY_TOL,
            shooting: DEFAULT_SHOOTING_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiComparisonConfig {
    pub points: usize,
}

impl Default for PiComparisonConfig {
    fn default() -> Self {
        PiComparisonConfig {
            points: DEFAULT_FIGURE_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub p: Option<f64>,
    pub curve: Option<CurveInput>,
    pub width: Option<FunctionInput>,
    pub mesh: MeshConfig,
    pub epsilons: Option<Vec<f64>>,
    pub sweep: MeshPolicy,
    pub pi_comparison: PiComparisonConfig,
    pub tolerances: Tolerances,
    /// Not part of the config hash.
    #[serde(skip)]
    pub output: OutputConfig,
}

/// Command-line values that replace the config's.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub ns: Option<usize>,
    pub nt: Option<usize>,
    pub p: Option<f64>,
}

impl RunConfig {
    /// Hex SHA-256 of the canonical JSON form (output location excluded).
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// Applies overrides and re-validates. `nt` replaces both the 2-D mesh
    /// and the sweep policy value.
    pub fn apply_overrides(&mut self, o: &Overrides) -> Result<()> {
        if let Some(dir) = &o.out {
            self.output.dir = dir.clone();
        }
        if let Some(ns) = o.ns {
            self.mesh.ns = ns;
        }
        if let Some(nt) = o.nt {
            self.mesh.nt = nt;
            self.sweep.nt = nt;
        }
        if let Some(p) = o.p {
            self.p = Some(p);
        }
        self.validate()
    }

    /// The command to run: `requested` when given, else the config's.
    pub fn resolve_command(&mut self, requested: Option<Command>) -> Result<Command> {
        if let Some(c) = requested {
            self.command = Some(c);
        }
        let command = self
            .command
            .ok_or_else(|| Error::schema("command", "no command given"))?;
        self.require_inputs(command)?;
        Ok(command)
    }

    /// Checks that every key `command` needs is present.
    pub fn require_inputs(&self, command: Command) -> Result<()> {
        if command.needs_domain() {
            if self.p.is_none() {
                return Err(Error::schema("p", format!("required by `{command}`")));
            }
            if self.curve.is_none() {
                return Err(Error::schema(
                    "curvature",
                    format!("`{command}` needs a [curvature] or [parametric] table"),
                ));
            }
            if self.width.is_none() {
                return Err(Error::schema("width.delta", format!("required by `{command}`")));
            }
        }
        if command == Command::Sweep && self.epsilons.is_none() {
            return Err(Error::schema("epsilons", "required by `sweep`"));
        }
        Ok(())
    }

    pub fn exponent(&self) -> Result<f64> {
        self.p.ok_or_else(|| Error::schema("p", "missing"))
    }

    /// Builds and validates the Fermi domain.
    pub fn domain(&self) -> Result<FermiDomain> {
        let curve_input = self
            .curve
            .as_ref()
            .ok_or_else(|| Error::schema("curvature", "missing curve description"))?;
        let width = self
            .width
            .as_ref()
            .ok_or_else(|| Error::schema("width.delta", "missing"))?;
        let n = self.mesh.samples;
        let curve = match curve_input {
            CurveInput::Curvature { length, k } => {
                reconstruct_with_tol(*length, &k.to_profile(), n, self.tolerances.symmetry)?
            }
            CurveInput::Parametric { x, y, t_range } => curvature_from_parametric(x, y, *t_range, n)?,
        };
        let delta = width.to_profile().sample(curve.length, n);
        let width = WidthProfile::from_samples(delta, self.tolerances.symmetry)?;
        FermiDomain::new(curve, width)
    }

    fn validate(&self) -> Result<()> {
        if let Some(p) = self.p {
            if !(p.is_finite() && p > 1.0) {
                return Err(Error::schema("p", "p must exceed 1"));
            }
        }
        if self.mesh.ns < 8 || !self.mesh.ns.is_multiple_of(2) {
            return Err(Error::schema("mesh.ns", "must be an even integer >= 8"));
        }
        if self.mesh.nt < 8 {
            return Err(Error::schema("mesh.nt", "must be >= 8"));
        }
        if self.mesh.samples < 5 || self.mesh.samples.is_multiple_of(2) {
            return Err(Error::schema("mesh.samples", "must be an odd integer >= 5"));
        }
        if self.mesh.elements_1d < 32 {
            return Err(Error::schema("mesh.elements_1d", "must be >= 32"));
        }
        if let Some(eps) = &self.epsilons {
            if eps.is_empty() {
                return Err(Error::schema("epsilons", "must not be empty"));
            }
            if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
                return Err(Error::schema("epsilons", "every value must be positive"));
            }
            if eps.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(Error::schema("epsilons", "must be strictly decreasing"));
            }
        }
        let s = &self.sweep;
        if s.nt < 8 {
            return Err(Error::schema("sweep.nt", "must be >= 8"));
        }
        if !(s.max_aspect > 0.0 && s.max_aspect.is_finite()) {
            return Err(Error::schema("sweep.max_aspect", "must be positive"));
        }
        if s.min_ns < 8 || s.max_ns < s.min_ns {
            return Err(Error::schema("sweep.max_ns", "need 8 <= min_ns <= max_ns"));
        }
        if self.pi_comparison.points == 0 {
            return Err(Error::schema("pi_comparison.points", "must be positive"));
        }
        for (key, v) in [
            ("tolerances.symmetry", self.tolerances.symmetry),
            ("tolerances.shooting", self.tolerances.shooting),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::schema(key, "must be positive"));
            }
        }
        if let Some(CurveInput::Curvature { length, .. }) = &self.curve {
            if !(*length > 0.0 && length.is_finite()) {
                return Err(Error::schema("curvature.L", "must be positive"));
            }
        }
        if let Some(CurveInput::Parametric { t_range, .. }) = &self.curve {
            if !(t_range.1 > t_range.0) {
                return Err(Error::schema("parametric.t_range", "need t0 < t1"));
            }
        }
        if let Some(cmd) = self.command {
            self.require_inputs(cmd)?;
        }
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::schema("<file>", e.message().to_string()))?;
    let root = Section { table: &table, prefix: "" };
    root.allow(&[
        "command",
        "p",
        "epsilons",
        "curvature",
        "parametric",
        "width",
        "mesh",
        "sweep",
        "pi_comparison",
        "tolerances",
        "output",
    ])?;

    let mut cfg = RunConfig::default();
    if let Some(name) = root.string("command")? {
        cfg.command = Some(name.parse().map_err(|m| Error::schema("command", m))?);
    }
    cfg.p = root.float("p")?;
    cfg.epsilons = root.floats("epsilons")?;

    let curvature = root.section("curvature")?;
    let parametric = root.section("parametric")?;
    cfg.curve = match (curvature, parametric) {
        (Some(_), Some(_)) => {
            return Err(Error::schema(
                "curvature",
                "give exactly one of [curvature] and [parametric]",
            ))
        }
        (Some(sec), None) => {
            sec.allow(&["L", "k"])?;
            Some(CurveInput::Curvature {
                length: sec.require(sec.float("L")?, "L")?,
                k: sec.require(sec.function("k", &["s", "L"])?, "k")?,
            })
        }
        (None, Some(sec)) => {
            sec.allow(&["x", "y", "t_range"])?;
            let t_range = sec.require(sec.floats("t_range")?, "t_range")?;
            if t_range.len() != 2 {
                return Err(Error::schema(sec.key("t_range"), "expected [t0, t1]"));
            }
            Some(CurveInput::Parametric {
                x: sec.require(sec.expression("x", &["t"])?, "x")?,
                y: sec.require(sec.expression("y", &["t"])?, "y")?,
                t_range: (t_range[0], t_range[1]),
            })
        }
        (None, None) => None,
    };

    if let Some(sec) = root.section("width")? {
        sec.allow(&["delta"])?;
        cfg.width = Some(sec.require(sec.function("delta", &["s", "L"])?, "delta")?);
    }
    if let Some(sec) = root.section("mesh")? {
        sec.allow(&["ns", "nt", "samples", "elements_1d"])?;
        let m = &mut cfg.mesh;
        m.ns = sec.count("ns")?.unwrap_or(m.ns);
        m.nt = sec.count("nt")?.unwrap_or(m.nt);
        m.samples = sec.count("samples")?.unwrap_or(m.samples);
        m.elements_1d = sec.count("elements_1d")?.unwrap_or(m.elements_1d);
    }
    if let Some(sec) = root.section("sweep")? {
        sec.allow(&["nt", "max_aspect", "min_ns", "max_ns", "estimate_error"])?;
        let s = &mut cfg.sweep;
        s.nt = sec.count("nt")?.unwrap_or(s.nt);
        s.max_aspect = sec.float("max_aspect")?.unwrap_or(s.max_aspect);
        s.min_ns = sec.count("min_ns")?.unwrap_or(s.min_ns);
        s.max_ns = sec.count("max_ns")?.unwrap_or(s.max_ns);
        s.estimate_error = sec.boolean("estimate_error")?.unwrap_or(s.estimate_error);
    }
    if let Some(sec) = root.section("pi_comparison")? {
        sec.allow(&["points"])?;
        cfg.pi_comparison.points = sec.count("points")?.unwrap_or(cfg.pi_comparison.points);
    }
    if let Some(sec) = root.section("tolerances")? {
        sec.allow(&["symmetry", "shooting"])?;
        let t = &mut cfg.tolerances;
        t.symmetry = sec.float("symmetry")?.unwrap_or(t.symmetry);
        t.shooting = sec.float("shooting")?.unwrap_or(t.shooting);
    }
    if let Some(sec) = root.section("output")? {
        sec.allow(&["dir"])?;
        if let Some(dir) = sec.string("dir")? {
            cfg.output.dir = PathBuf::from(dir);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// A table together with its dotted key path, for error messages.
struct Section<'a> {
    table: &'a Table,
    prefix: &'a str,
}

impl<'a> Section<'a> {
    fn key(&self, name: &str) -> String {
        if self.prefix.is_empty() {
            name.to_string()
        } else {
            format!("{}.{name}", self.prefix)
        }
    }

    fn allow(&self, names: &[&str]) -> Result<()> {
        match self.table.keys().find(|k| !names.contains(&k.as_str())) {
            Some(k) => Err(Error::schema(self.key(k), "unknown key")),
            None => Ok(()),
        }
    }

    fn require<T>(&self, v: Option<T>, name: &str) -> Result<T> {
        v.ok_or_else(|| Error::schema(self.key(name), "missing"))
    }

    fn section(&self, name: &'a str) -> Result<Option<Section<'a>>> {
        match self.table.get(name) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(Section { table: t, prefix: name })),
            Some(_) => Err(Error::schema(self.key(name), "expected a table")),
        }
    }

    fn float(&self, name: &str) -> Result<Option<f64>> {
        self.table
            .get(name)
            .map(|v| as_float(v).ok_or_else(|| Error::schema(self.key(name), "expected a number")))
            .transpose()
    }

    fn floats(&self, name: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.table.get(name) else {
            return Ok(None);
        };
        let err = || Error::schema(self.key(name), "expected an array of numbers");
        let arr = v.as_array().ok_or_else(err)?;
        arr.iter().map(|x| as_float(x).ok_or_else(err)).collect::<Result<_>>().map(Some)
    }

    fn count(&self, name: &str) -> Result<Option<usize>> {
        match self.table.get(name) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => Err(Error::schema(self.key(name), "expected a nonnegative integer")),
        }
    }

    fn boolean(&self, name: &str) -> Result<Option<bool>> {
        match self.table.get(name) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(Error::schema(self.key(name), "expected true or false")),
        }
    }

    fn string(&self, name: &str) -> Result<Option<&'a str>> {
        match self.table.get(name) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => Err(Error::schema(self.key(name), "expected a string")),
        }
    }

    fn expression(&self, name: &str, allowed: &[&str]) -> Result<Option<Expr>> {
        let Some(text) = self.string(name)? else {
            return Ok(None);
        };
        let key = self.key(name);
        let expr = parse_expression(text).map_err(|source| Error::Expression {
            key: key.clone(),
            source,
        })?;
        let allowed: BTreeSet<&str> = allowed.iter().copied().collect();
        if let Some(bad) = expr.variables().iter().find(|v| !allowed.contains(v.as_str())) {
            let list: Vec<&str> = allowed.into_iter().collect();
            return Err(Error::schema(
                key,
                format!("variable `{bad}` is not allowed here (allowed: {})", list.join(", ")),
            ));
        }
        Ok(Some(expr))
    }

    /// A number, an expression string, or an array of samples.
    fn function(&self, name: &str, allowed: &[&str]) -> Result<Option<FunctionInput>> {
        match self.table.get(name) {
            None => Ok(None),
            Some(Value::String(_)) => Ok(self.expression(name, allowed)?.map(FunctionInput::Expression)),
            Some(Value::Array(_)) => Ok(self.floats(name)?.map(FunctionInput::Samples)),
            Some(v) => as_float(v)
                .map(|x| Some(FunctionInput::Constant(x)))
                .ok_or_else(|| Error::schema(self.key(name), "expected a number, expression or array")),
        }
    }
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}
