//! Manifest schema and validation.

use std::path::{Path, PathBuf};

use holocalc::apps::ContractionModel;
use holocalc::hoermander::Localizer;
use holocalc::{Grid, HolFn, Weight};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const VERSION: u32 = 1;

/// A schema or semantic problem, located by the first offending field.
#[derive(Debug, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl ToString) -> Self {
        ConfigError {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    version: u32,
    tasks: Vec<RawTask>,
    output_dir: PathBuf,
    #[serde(default)]
    grid_overrides: Option<GridOverrides>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    kind: Kind,
    #[serde(default)]
    name: Option<String>,
    #[serde(default = "empty_object")]
    params: Value,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    WeightCheck,
    Norm,
    Calculus,
    Verify,
    App,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::WeightCheck => "weight-check",
            Kind::Norm => "norm",
            Kind::Calculus => "calculus",
            Kind::Verify => "verify",
            Kind::App => "app",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOverrides {
    #[serde(rename = "L")]
    pub half_width: Option<f64>,
    #[serde(rename = "N")]
    pub points: Option<usize>,
}

impl GridOverrides {
    pub fn apply(&self, base: Grid) -> holocalc::Result<Grid> {
        Grid::new(
            self.half_width.unwrap_or(base.half_width()),
            self.points.unwrap_or(base.points()),
        )
    }

    pub fn merged(self, over: GridOverrides) -> GridOverrides {
        GridOverrides {
            half_width: over.half_width.or(self.half_width),
            points: over.points.or(self.points),
        }
    }
}

/// Bounds checked after a task runs; any violation is an assertion failure.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Target value, compared with `rel_tol` (default 1e-6).
    pub value: Option<f64>,
    pub rel_tol: Option<f64>,
}

impl Expect {
    pub fn check(&self, x: f64) -> Option<String> {
        if let Some(lo) = self.min {
            if !(x >= lo) {
                return Some(format!("{x} < min {lo}"));
            }
        }
        if let Some(hi) = self.max {
            if !(x <= hi) {
                return Some(format!("{x} > max {hi}"));
            }
        }
        if let Some(v) = self.value {
            let tol = self.rel_tol.unwrap_or(1e-6);
            if !((x - v).abs() <= tol * v.abs().max(f64::MIN_POSITIVE)) {
                return Some(format!("{x} differs from {v} by more than {tol} relative"));
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Bounded,
    Diverging,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightCheckParams {
    pub weight: String,
    #[serde(default = "default_scan")]
    pub scan_range: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub m_v: Option<Expect>,
    #[serde(default)]
    pub doubling_sup: Option<Expect>,
    #[serde(default)]
    pub trend: Option<Trend>,
    #[serde(default)]
    pub strongly_admissible: Option<bool>,
}

fn default_scan() -> f64 {
    1e3
}

fn default_samples() -> usize {
    1000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    Sobolev,
    FourierAlgebra,
    Hardy2,
    BoundaryRatio,
    Hoermander,
    SectorSobolev,
    SectorHoermander,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormParams {
    pub function: String,
    pub norm: NormKind,
    /// Strip height, or sector half-angle for the sector norms.
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub omega_prime: Option<f64>,
    #[serde(default = "default_weight")]
    pub weight: String,
    #[serde(default = "default_localizer")]
    pub localizer: String,
    #[serde(default = "default_t_range")]
    pub t_range: f64,
    #[serde(default = "default_t_step")]
    pub t_step: f64,
    #[serde(default)]
    pub expect: Option<Expect>,
}

fn default_weight() -> String {
    "const".into()
}

fn default_localizer() -> String {
    "gaussian".into()
}

fn default_t_range() -> f64 {
    20.0
}

fn default_t_step() -> f64 {
    0.25
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalcMethod {
    Oracle,
    Contour,
    SobolevIntegral,
    Meda,
    SectorOracle,
    SectorContour,
}

impl CalcMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CalcMethod::Oracle => "oracle",
            CalcMethod::Contour => "contour",
            CalcMethod::SobolevIntegral => "sobolev-integral",
            CalcMethod::Meda => "meda",
            CalcMethod::SectorOracle => "sector-oracle",
            CalcMethod::SectorContour => "sector-contour",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    StripType,
    SelfAdjoint,
    Sectorial,
    Positive,
    File,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default = "default_dim")]
    pub n: usize,
    #[serde(default = "default_model_omega")]
    pub omega: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

fn default_dim() -> usize {
    6
}

fn default_model_omega() -> f64 {
    0.5
}

fn default_p() -> f64 {
    2.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalculusParams {
    pub functions: Vec<String>,
    pub methods: Vec<CalcMethod>,
    pub model: ModelSpec,
    #[serde(default = "one_seed")]
    pub seeds: Seeds,
    #[serde(default)]
    pub max_deviation: Option<f64>,
}

fn one_seed() -> Seeds {
    Seeds::Count(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Conventions,
    Hardy,
    Partition,
    Calderon,
    Composition,
    All,
}

impl Suite {
    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Conventions,
                Suite::Hardy,
                Suite::Partition,
                Suite::Calderon,
                Suite::Composition,
            ],
            s => vec![s],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyParams {
    #[serde(default = "all_suites")]
    pub suite: Suite,
}

fn all_suites() -> Suite {
    Suite::All
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    CdGrowth,
    Multiplier,
    Contractivity,
    Ou,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemigroupKind {
    Cycle,
    Swap,
    Random,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupSpec {
    pub kind: SemigroupKind,
    #[serde(default = "default_cycle")]
    pub n: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_cycle() -> usize {
    8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppParams {
    pub experiment: Experiment,
    #[serde(default)]
    pub model: Option<SemigroupSpec>,
    #[serde(default = "default_app_p")]
    pub p: f64,
    #[serde(default = "default_t_range")]
    pub s_range: f64,
    #[serde(default = "default_t_step")]
    pub s_step: f64,
    #[serde(default)]
    pub functions: Vec<String>,
    #[serde(default = "default_app_weight")]
    pub weight: String,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
}

fn default_app_p() -> f64 {
    4.0
}

fn default_app_weight() -> String {
    "poly:2".into()
}

fn default_truncation() -> usize {
    16
}

#[derive(Debug, Clone)]
pub enum TaskParams {
    WeightCheck(WeightCheckParams),
    Norm(NormParams),
    Calculus(CalculusParams),
    Verify(VerifyParams),
    App(AppParams),
}

#[derive(Debug, Clone)]
pub struct Task {
    pub index: usize,
    pub kind: Kind,
    pub name: String,
    pub params: TaskParams,
}

#[derive(Debug, Clone)]
pub struct Manifest {
    pub tasks: Vec<Task>,
    pub output_dir: PathBuf,
    pub grid_overrides: GridOverrides,
    pub seed: Option<u64>,
}

fn decode<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { prefix.to_string() } else { format!("{prefix}.{inner}") };
        ConfigError::new(path, e.into_inner())
    })
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::new("$", e))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self, ConfigError> {
        let raw: RawManifest = decode(value, "$")?;
        if raw.version != VERSION {
            return Err(ConfigError::new("$.version", format!("unsupported version {}", raw.version)));
        }
        if raw.tasks.is_empty() {
            return Err(ConfigError::new("$.tasks", "no tasks"));
        }
        let overrides = raw.grid_overrides.unwrap_or_default();
        overrides
            .apply(Grid::default())
            .map_err(|e| ConfigError::new("$.grid_overrides", e))?;
        let mut tasks = Vec::with_capacity(raw.tasks.len());
        for (index, t) in raw.tasks.into_iter().enumerate() {
            let at = format!("$.tasks[{index}].params");
            let params = match t.kind {
                Kind::WeightCheck => TaskParams::WeightCheck(decode(t.params, &at)?),
                Kind::Norm => TaskParams::Norm(decode(t.params, &at)?),
                Kind::Calculus => TaskParams::Calculus(decode(t.params, &at)?),
                Kind::Verify => TaskParams::Verify(decode(t.params, &at)?),
                Kind::App => TaskParams::App(decode(t.params, &at)?),
            };
            validate(&params, &at)?;
            let name = t.name.unwrap_or_else(|| t.kind.as_str().to_string());
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
                return Err(ConfigError::new(
                    format!("$.tasks[{index}].name"),
                    "names use ASCII letters, digits, '-', '_' and '.'",
                ));
            }
            tasks.push(Task {
                index,
                kind: t.kind,
                name,
                params,
            });
        }
        Ok(Manifest {
            tasks,
            output_dir: raw.output_dir,
            grid_overrides: overrides,
            seed: raw.seed,
        })
    }
}

pub fn parse_localizer(spec: &str) -> holocalc::Result<Localizer> {
    let bad = |m: String| holocalc::Error::Config(format!("localizer '{spec}': {m}"));
    let (head, arg) = match spec.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (spec, None),
    };
    let num = || -> holocalc::Result<f64> {
        arg.ok_or_else(|| bad("missing parameter".into()))?
            .parse()
            .map_err(|e: std::num::ParseFloatError| bad(e.to_string()))
    };
    match head {
        "gaussian" => Ok(Localizer::gaussian()),
        "modulated" => Ok(Localizer::modulated_gaussian(num()?)),
        "sech" => Localizer::sech_power(num()? as i32),
        "bump" => Localizer::fourier_of_bump(num()?),
        other => Err(bad(format!("unknown localizer '{other}'"))),
    }
}

fn field<T>(r: holocalc::Result<T>, path: String) -> Result<T, ConfigError> {
    r.map_err(|e| ConfigError::new(path, e))
}

fn positive(x: f64, path: String) -> Result<(), ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("must be positive and finite, got {x}")))
    }
}

fn check_p(p: f64, path: String) -> Result<(), ConfigError> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("p must be >= 1 (or infinite), got {p}")))
    }
}

/// Semantic checks that need no computation: every string spec parses and
/// every numeric range is sane.
fn validate(params: &TaskParams, at: &str) -> Result<(), ConfigError> {
    match params {
        TaskParams::WeightCheck(p) => {
            if !p.weight.starts_with("table:") {
                field(Weight::parse(&p.weight), format!("{at}.weight"))?;
            }
            positive(p.scan_range, format!("{at}.scan_range"))?;
            if p.samples < 2 {
                return Err(ConfigError::new(format!("{at}.samples"), "need at least 2 samples"));
            }
        }
        TaskParams::Norm(p) => {
            field(HolFn::parse(&p.function), format!("{at}.function"))?;
            if !p.weight.starts_with("table:") {
                field(Weight::parse(&p.weight), format!("{at}.weight"))?;
            }
            field(parse_localizer(&p.localizer), format!("{at}.localizer"))?;
            if !(p.omega >= 0.0 && p.omega.is_finite()) {
                return Err(ConfigError::new(format!("{at}.omega"), "must be >= 0"));
            }
            positive(p.t_step, format!("{at}.t_step"))?;
            if !(p.t_range >= 0.0) {
                return Err(ConfigError::new(format!("{at}.t_range"), "must be >= 0"));
            }
            if p.norm == NormKind::Hardy2 && p.omega_prime.is_none() {
                return Err(ConfigError::new(format!("{at}.omega_prime"), "hardy2 needs omega_prime"));
            }
            if let Some(w) = p.omega_prime {
                positive(w, format!("{at}.omega_prime"))?;
            }
        }
        TaskParams::Calculus(p) => {
            if p.functions.is_empty() {
                return Err(ConfigError::new(format!("{at}.functions"), "empty list"));
            }
            for (i, f) in p.functions.iter().enumerate() {
                field(HolFn::parse(f), format!("{at}.functions[{i}]"))?;
            }
            if p.methods.is_empty() {
                return Err(ConfigError::new(format!("{at}.methods"), "empty list"));
            }
            if p.model.n == 0 {
                return Err(ConfigError::new(format!("{at}.model.n"), "must be positive"));
            }
            check_p(p.model.p, format!("{at}.model.p"))?;
            if !(p.model.omega >= 0.0 && p.model.omega.is_finite()) {
                return Err(ConfigError::new(format!("{at}.model.omega"), "must be >= 0"));
            }
            if p.model.kind == ModelKind::File && p.model.path.is_none() {
                return Err(ConfigError::new(format!("{at}.model.path"), "file models need a path"));
            }
            match &p.seeds {
                Seeds::Count(0) => return Err(ConfigError::new(format!("{at}.seeds"), "must be positive")),
                Seeds::List(l) if l.is_empty() => return Err(ConfigError::new(format!("{at}.seeds"), "empty list")),
                _ => {}
            }
            if let Some(d) = p.max_deviation {
                positive(d, format!("{at}.max_deviation"))?;
            }
        }
        TaskParams::Verify(_) => {}
        TaskParams::App(p) => {
            for (i, f) in p.functions.iter().enumerate() {
                field(HolFn::parse(f), format!("{at}.functions[{i}]"))?;
            }
            field(Weight::parse(&p.weight), format!("{at}.weight"))?;
            positive(p.s_step, format!("{at}.s_step"))?;
            positive(p.s_range, format!("{at}.s_range"))?;
            match p.experiment {
                Experiment::CdGrowth | Experiment::Multiplier => {
                    if !(p.p > 1.0 && p.p.is_finite()) {
                        return Err(ConfigError::new(format!("{at}.p"), "needs 1 < p < ∞"));
                    }
                    if p.model.is_none() {
                        return Err(ConfigError::new(format!("{at}.model"), "missing field"));
                    }
                }
                Experiment::Contractivity => {
                    if p.model.is_none() {
                        return Err(ConfigError::new(format!("{at}.model"), "missing field"));
                    }
                }
                Experiment::Ou => {
                    check_p(p.p, format!("{at}.p"))?;
                    if p.truncation == 0 || p.truncation > holocalc::apps::MAX_TRUNCATION {
                        return Err(ConfigError::new(
                            format!("{at}.truncation"),
                            format!("must lie in 1..={}", holocalc::apps::MAX_TRUNCATION),
                        ));
                    }
                }
            }
            if p.experiment == Experiment::Multiplier && p.functions.is_empty() {
                return Err(ConfigError::new(format!("{at}.functions"), "empty list"));
            }
            if let Some(m) = &p.model {
                if m.kind != SemigroupKind::Swap && !(2..=64).contains(&m.n) {
                    return Err(ConfigError::new(format!("{at}.model.n"), "must lie in 2..=64"));
                }
            }
        }
    }
    Ok(())
}

pub fn build_semigroup(spec: &SemigroupSpec, p: f64, seed: u64) -> holocalc::Result<ContractionModel> {
    use rand_chacha::rand_core::SeedableRng;
    match spec.kind {
        SemigroupKind::Cycle => ContractionModel::cycle_walk(spec.n, p),
        SemigroupKind::Swap => ContractionModel::swap(p),
        SemigroupKind::Random => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(spec.seed.unwrap_or(seed));
            ContractionModel::random(&mut rng, spec.n, p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_point_at_the_first_bad_field() {
        let e = Manifest::parse(r#"{"version":1,"output_dir":"o","tasks":[]}"#).unwrap_err();
        assert_eq!((e.path.as_str(), e.message.as_str()), ("$.tasks", "no tasks"));
        let e = Manifest::parse(
            r#"{"version":1,"output_dir":"o","tasks":[{"kind":"norm","params":{"function":"gaussian","norm":"sobolev","t_step":"x"}}]}"#,
        )
        .unwrap_err();
        assert_eq!(e.path, "$.tasks[0].params.t_step");
        let e = Manifest::parse(r#"{"version":1,"output_dir":"o","tasks":[{"kind":"bogus"}]}"#).unwrap_err();
        assert_eq!(e.path, "$.tasks[0].kind");
        let e = Manifest::parse(
            r#"{"version":1,"output_dir":"o","tasks":[{"kind":"weight-check","params":{"weight":"poly:-1"}}]}"#,
        )
        .unwrap_err();
        assert_eq!(e.path, "$.tasks[0].params.weight");
    }
}
