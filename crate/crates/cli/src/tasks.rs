//! Task execution, artifacts and the run log.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use holocalc::apps::{cd_growth_check, multiplier_experiment, OUModel};
use holocalc::calculus::{
    elementary_contour, meda_hoermander, sector_calculus, sobolev_integral, spectral_oracle, ContourConfig,
    MedaConfig, StripMethod,
};
use holocalc::hoermander::{hoermander_norm, HoermanderConfig, Localizer};
use holocalc::operators::random::{random_positive_self_adjoint, random_sectorial, random_self_adjoint, random_strip_type};
use holocalc::operators::DiagonalizableOperator;
use holocalc::sector::{sector_hoermander_norm, sector_sobolev_norm_of};
use holocalc::weights::DoublingTrend;
use holocalc::{admissibility_report, Grid, HolFn, StripFunctionRep, Weight};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::manifest::{
    build_semigroup, parse_localizer, AppParams, CalcMethod, CalculusParams, Experiment, ModelKind, ModelSpec, NormKind,
    NormParams, Seeds, Task, TaskParams, Trend, VerifyParams, WeightCheckParams,
};
use crate::verify::run_suite;

/// Shared settings of one run.
#[derive(Debug, Clone)]
pub struct Context {
    pub grid: Grid,
    pub seed: u64,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    AssertionFailed,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub index: usize,
    pub name: String,
    pub kind: &'static str,
    pub status: Status,
    pub summary: Value,
    pub failures: Vec<String>,
    pub artifacts: Vec<String>,
    pub elapsed_ms: u128,
}

struct Done {
    summary: Value,
    failures: Vec<String>,
    artifacts: Vec<PathBuf>,
}

impl Done {
    fn new(summary: Value) -> Self {
        Done {
            summary,
            failures: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    fn fail_if(&mut self, what: &str, failure: Option<String>) {
        if let Some(m) = failure {
            self.failures.push(format!("{what}: {m}"));
        }
    }
}

pub fn run_task(task: &Task, ctx: &Context) -> Outcome {
    let start = Instant::now();
    let stem = ctx.output_dir.join(format!("{:02}-{}", task.index, task.name));
    let result = match &task.params {
        TaskParams::WeightCheck(p) => weight_check(p, &stem),
        TaskParams::Norm(p) => norm(p, ctx, &stem),
        TaskParams::Calculus(p) => calculus(p, ctx, &stem),
        TaskParams::Verify(p) => verify(p, ctx, &stem),
        TaskParams::App(p) => app(p, ctx, &stem),
    };
    let (status, summary, failures, artifacts) = match result {
        Ok(d) => {
            let status = if d.failures.is_empty() { Status::Ok } else { Status::AssertionFailed };
            (status, d.summary, d.failures, d.artifacts)
        }
        Err(e) => (Status::Error, Value::Null, vec![e.to_string()], Vec::new()),
    };
    Outcome {
        index: task.index,
        name: task.name.clone(),
        kind: task.kind.as_str(),
        status,
        summary,
        failures,
        artifacts: artifacts.iter().map(|p| p.display().to_string()).collect(),
        elapsed_ms: start.elapsed().as_millis(),
    }
}

/// One JSON line per task; the timestamp lives only here.
pub fn append_log(path: &Path, outcome: &Outcome) -> std::io::Result<()> {
    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let mut line = serde_json::to_value(outcome).map_err(std::io::Error::other)?;
    line["timestamp"] = json!(ts);
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(f, "{line}")
}

fn write_json(path: PathBuf, value: &impl Serialize) -> holocalc::Result<PathBuf> {
    std::fs::write(&path, serde_json::to_string_pretty(value)?)?;
    Ok(path)
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn expect_or(done: &mut Done, what: &str, e: Option<crate::manifest::Expect>, x: f64) {
    if let Some(e) = e {
        done.fail_if(what, e.check(x));
    }
}

fn weight_check(p: &WeightCheckParams, stem: &Path) -> holocalc::Result<Done> {
    let v = Weight::parse(&p.weight)?;
    let r = admissibility_report(&v, p.scan_range, p.samples)?;
    let trend = match r.doubling_trend {
        DoublingTrend::Bounded => Trend::Bounded,
        DoublingTrend::Diverging => Trend::Diverging,
    };
    let mut done = Done::new(json!({
        "weight": v.describe(),
        "m_v_estimate": r.m_v_estimate,
        "doubling_sup": r.doubling_sup,
        "trend": trend,
        "strongly_admissible": r.strongly_admissible,
    }));
    done.artifacts
        .push(write_json(with_ext(stem, "json"), &json!({"weight": v.describe(), "report": r}))?);
    expect_or(&mut done, "m_v", p.m_v, r.m_v_estimate);
    expect_or(&mut done, "doubling_sup", p.doubling_sup, r.doubling_sup);
    if let Some(t) = p.trend {
        if t != trend {
            done.failures.push(format!("trend: expected {t:?}, found {trend:?}"));
        }
    }
    if let Some(s) = p.strongly_admissible {
        if s != r.strongly_admissible {
            done.failures
                .push(format!("strongly_admissible: expected {s}, found {}", r.strongly_admissible));
        }
    }
    Ok(done)
}

fn norm(p: &NormParams, ctx: &Context, stem: &Path) -> holocalc::Result<Done> {
    let f = HolFn::parse(&p.function)?;
    let v = Weight::parse(&p.weight)?;
    let loc = parse_localizer(&p.localizer)?;
    let cfg = HoermanderConfig {
        grid: ctx.grid,
        t_range: p.t_range,
        t_step: p.t_step,
        check_grid: false,
    };
    let fit = || StripFunctionRep::from_spec(&p.function, ctx.grid, p.omega, v.clone());
    let mut artifacts = Vec::new();
    let (value, detail) = match p.norm {
        NormKind::Sobolev => {
            let r = fit()?.sobolev_norm_report()?;
            (r.value, json!(r))
        }
        NormKind::FourierAlgebra => {
            let r = fit()?.fourier_algebra_norm_report()?;
            (r.value, json!(r))
        }
        NormKind::Hardy2 => {
            let r = fit()?.hardy2_norm(p.omega_prime.expect("validated"))?;
            (r.value, json!(r))
        }
        NormKind::BoundaryRatio => {
            let r = fit()?.boundary_norm_ratio()?;
            (r, Value::Null)
        }
        NormKind::Hoermander => {
            let e = hoermander_norm(&f, &loc, &v, p.omega, &cfg)?;
            let path = with_ext(stem, "profile.csv");
            e.save_profile_csv(&path)?;
            artifacts.push(path);
            (e.value, hoermander_detail(&e))
        }
        NormKind::SectorSobolev => (sector_sobolev_norm_of(&f, ctx.grid, p.omega, v.clone())?, Value::Null),
        NormKind::SectorHoermander => {
            let e = sector_hoermander_norm(&f, p.omega, &loc, &v, &cfg)?;
            let path = with_ext(stem, "profile.csv");
            e.save_profile_csv(&path)?;
            artifacts.push(path);
            (e.value, hoermander_detail(&e))
        }
    };
    let summary = json!({
        "function": p.function,
        "norm": p.norm,
        "omega": p.omega,
        "weight": v.describe(),
        "value": value,
    });
    artifacts.push(write_json(with_ext(stem, "json"), &json!({"summary": summary, "detail": detail}))?);
    let mut done = Done::new(summary);
    done.artifacts = artifacts;
    expect_or(&mut done, "value", p.expect, value);
    Ok(done)
}

fn hoermander_detail(e: &holocalc::hoermander::HoermanderEstimate) -> Value {
    json!({
        "argmax_t": e.argmax_t,
        "refined_value": e.refined_value,
        "convergence_flag": e.convergence_flag,
        "edge_tail": e.edge_tail,
        "t_lattice": e.t_lattice(),
    })
}

fn build_model(spec: &ModelSpec, seed: u64) -> holocalc::Result<DiagonalizableOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec.kind {
        ModelKind::StripType => random_strip_type(&mut rng, spec.n, spec.omega, spec.p),
        ModelKind::SelfAdjoint => random_self_adjoint(&mut rng, spec.n)?.with_p(spec.p),
        ModelKind::Sectorial => random_sectorial(&mut rng, spec.n, spec.omega, spec.p),
        ModelKind::Positive => random_positive_self_adjoint(&mut rng, spec.n)?.with_p(spec.p),
        ModelKind::File => DiagonalizableOperator::load(spec.path.as_ref().expect("validated")),
    }
}

fn evaluate(a: &DiagonalizableOperator, spec: &str, f: &HolFn, method: CalcMethod, grid: Grid) -> holocalc::Result<f64> {
    let r = match method {
        CalcMethod::Oracle => spectral_oracle(a, f)?,
        CalcMethod::Contour => elementary_contour(a, f, &ContourConfig::default())?,
        CalcMethod::SobolevIntegral => {
            let rep = StripFunctionRep::from_spec(spec, grid, 0.0, Weight::constant())?;
            sobolev_integral(a, &rep)?
        }
        CalcMethod::Meda => {
            let cfg = MedaConfig {
                grid,
                with_bound: false,
                ..Default::default()
            };
            meda_hoermander(a, f, &Localizer::gaussian(), &cfg)?
        }
        CalcMethod::SectorOracle => sector_calculus(a, f, &StripMethod::Oracle)?,
        CalcMethod::SectorContour => {
            // closed contour: no decay needed along the long sides
            let cfg = ContourConfig {
                require_decay: false,
                ..Default::default()
            };
            sector_calculus(a, f, &StripMethod::Contour(cfg))?
        }
    };
    Ok(r.deviation_from_oracle)
}

#[derive(Serialize)]
struct CalcRow<'a> {
    seed: u64,
    function: &'a str,
    method: &'static str,
    deviation: String,
}

fn calculus(p: &CalculusParams, ctx: &Context, stem: &Path) -> holocalc::Result<Done> {
    let seeds: Vec<u64> = match &p.seeds {
        Seeds::Count(k) => (0..*k).map(|i| ctx.seed + i).collect(),
        Seeds::List(l) => l.clone(),
    };
    let functions: Vec<HolFn> = p.functions.iter().map(|s| HolFn::parse(s)).collect::<holocalc::Result<_>>()?;
    let rows: Vec<Vec<(u64, usize, CalcMethod, f64)>> = seeds
        .par_iter()
        .map(|&seed| -> holocalc::Result<_> {
            let a = build_model(&p.model, seed)?;
            let mut out = Vec::new();
            for (i, f) in functions.iter().enumerate() {
                for &m in &p.methods {
                    out.push((seed, i, m, evaluate(&a, &p.functions[i], f, m, ctx.grid)?));
                }
            }
            Ok(out)
        })
        .collect::<holocalc::Result<_>>()?;
    let path = with_ext(stem, "csv");
    let mut wr = csv::Writer::from_path(&path)?;
    let mut max_dev = 0.0f64;
    for &(seed, i, m, d) in rows.iter().flatten() {
        max_dev = max_dev.max(d);
        wr.serialize(CalcRow {
            seed,
            function: &p.functions[i],
            method: m.as_str(),
            deviation: format!("{d:.6e}"),
        })?;
    }
    wr.flush()?;
    let summary = json!({
        "rows": rows.iter().map(Vec::len).sum::<usize>(),
        "max_deviation": max_dev,
        "threshold": p.max_deviation,
    });
    let mut done = Done::new(summary);
    done.artifacts.push(path);
    done.artifacts.push(write_json(with_ext(stem, "json"), &done.summary)?);
    if let Some(t) = p.max_deviation {
        if !(max_dev <= t) {
            done.failures.push(format!("max deviation {max_dev:e} > {t:e}"));
        }
    }
    Ok(done)
}

fn verify(p: &VerifyParams, ctx: &Context, stem: &Path) -> holocalc::Result<Done> {
    let checks = run_suite(p.suite, ctx.grid)?;
    let path = with_ext(stem, "csv");
    let mut wr = csv::Writer::from_path(&path)?;
    wr.write_record(["suite", "check", "value", "tolerance", "pass"])?;
    for c in &checks {
        wr.write_record([
            c.suite.to_string(),
            c.check.clone(),
            format!("{:.6e}", c.value),
            format!("{:e}", c.tolerance),
            c.pass.to_string(),
        ])?;
    }
    wr.flush()?;
    let passed = checks.iter().filter(|c| c.pass).count();
    let mut done = Done::new(json!({"checks": checks.len(), "passed": passed}));
    done.artifacts.push(path);
    for c in checks.iter().filter(|c| !c.pass) {
        done.failures
            .push(format!("{}/{}: {:e} > {:e}", c.suite, c.check, c.value, c.tolerance));
    }
    Ok(done)
}

fn s_grid(range: f64, step: f64) -> Vec<f64> {
    let n = (2.0 * range / step + 1e-9).floor() as usize;
    (0..=n).map(|k| -range + k as f64 * step).collect()
}

fn app(p: &AppParams, ctx: &Context, stem: &Path) -> holocalc::Result<Done> {
    match p.experiment {
        Experiment::CdGrowth => {
            let model = build_semigroup(p.model.as_ref().expect("validated"), p.p, ctx.seed)?;
            let r = cd_growth_check(&model, p.p, &s_grid(p.s_range, p.s_step))?;
            r.save(stem)?;
            let mut done = Done::new(json!({
                "model": r.model, "p": r.p, "omega_p": r.omega_p, "fitted_c": r.fitted_c,
                "window_growth": r.window_growth, "passes": r.passes, "degenerate": r.degenerate,
            }));
            done.artifacts = vec![with_ext(stem, "csv"), with_ext(stem, "json")];
            if !r.passes {
                done.failures.push(if r.degenerate {
                    "range of the generator is trivial".into()
                } else {
                    format!("growth trend {:.4} or unbounded constant {}", r.window_growth, r.fitted_c)
                });
            }
            Ok(done)
        }
        Experiment::Multiplier => {
            let model = build_semigroup(p.model.as_ref().expect("validated"), p.p, ctx.seed)?;
            let family: Vec<HolFn> = p.functions.iter().map(|s| HolFn::parse(s)).collect::<holocalc::Result<_>>()?;
            let cfg = HoermanderConfig {
                grid: ctx.grid,
                ..Default::default()
            };
            let r = multiplier_experiment(&model, &family, p.p, &Weight::parse(&p.weight)?, &cfg)?;
            r.save(stem)?;
            let mut done = Done::new(json!({
                "model": r.model, "p": r.p, "omega_p": r.omega_p, "max_ratio": r.max_ratio,
            }));
            done.artifacts = vec![with_ext(stem, "csv"), with_ext(stem, "json")];
            if !r.max_ratio.is_finite() {
                done.failures.push("operator norm not controlled by the Hörmander norm".into());
            }
            Ok(done)
        }
        Experiment::Contractivity => {
            let model = build_semigroup(p.model.as_ref().expect("validated"), p.p, ctx.seed)?;
            let r = model.contractivity()?;
            let mut done = Done::new(json!({
                "model": model.label(), "spectral_radius": r.spectral_radius, "contractive": r.contractive,
            }));
            done.artifacts.push(write_json(with_ext(stem, "json"), &r)?);
            if !r.contractive {
                done.failures.push("semigroup is not contractive on ℓ¹ and ℓ^∞".into());
            }
            Ok(done)
        }
        Experiment::Ou => {
            let model = OUModel::new(p.truncation, p.p)?;
            let rows: Vec<(f64, f64)> = s_grid(p.s_range, p.s_step)
                .into_iter()
                .map(|s| Ok((s, model.imaginary_power_norm(s, p.p)?.value)))
                .collect::<holocalc::Result<_>>()?;
            let path = with_ext(stem, "csv");
            let mut wr = csv::Writer::from_path(&path)?;
            wr.write_record(["s", "norm"])?;
            for (s, n) in &rows {
                wr.write_record([format!("{s:.17e}"), format!("{n:.17e}")])?;
            }
            wr.flush()?;
            let summary = model.summary();
            let unitarity = rows.iter().map(|(_, n)| (n - 1.0).abs()).fold(0.0, f64::max);
            let mut done = Done::new(json!({"summary": summary, "p": p.p, "max_unitarity_defect": unitarity}));
            done.artifacts.push(path);
            done.artifacts.push(write_json(with_ext(stem, "json"), &done.summary)?);
            if p.p == 2.0 && unitarity > 1e-8 {
                done.failures.push(format!("‖L^{{-is}}‖₂ deviates from 1 by {unitarity:e}"));
            }
            Ok(done)
        }
    }
}
