mod manifest;
mod tasks;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use holocalc::calculus::{elementary_contour, ContourConfig};
use holocalc::hoermander::{hoermander_norm, HoermanderConfig, Localizer};
use holocalc::operators::random::random_strip_type;
use holocalc::{Grid, HolFn, StripFunctionRep, Weight};
use rand_chacha::rand_core::SeedableRng;
use rayon::prelude::*;
use serde_json::{json, Value};

use manifest::{GridOverrides, Manifest};
use tasks::{append_log, run_task, Context, Status};

const EXIT_CONFIG: u8 = 1;
const EXIT_ASSERTION: u8 = 2;

#[derive(Parser)]
#[command(name = "holocalc", version, about = "Weighted Sobolev/Hörmander norms and functional calculus for operator models")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Half-width L of the coefficient grid.
    #[arg(long = "grid-L", global = true)]
    grid_l: Option<f64>,
    /// Number of grid points N (a power of two, at least 8).
    #[arg(long = "grid-N", global = true)]
    grid_n: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides the manifest's).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run up to k independent tasks at once.
    #[arg(long, global = true, default_value_t = 1)]
    parallel: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Admissibility diagnostics of a weight (`poly:α`, `polylog:α:β`, `const`, `table:<path>`).
    CheckWeight {
        weight: String,
        #[arg(long, default_value_t = 1e3)]
        scan_range: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// One norm of one function.
    Norm {
        #[arg(long)]
        function: String,
        /// sobolev, fourier-algebra, hardy2, boundary-ratio, hoermander, sector-sobolev, sector-hoermander
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 0.0)]
        omega: f64,
        #[arg(long)]
        omega_prime: Option<f64>,
        #[arg(long, default_value = "const")]
        weight: String,
        #[arg(long, default_value = "gaussian")]
        localizer: String,
    },
    /// Deviation of calculus methods from the spectral oracle on seeded models.
    Calc {
        #[arg(long = "function", required = true)]
        functions: Vec<String>,
        #[arg(long = "method", default_values_t = ["contour".to_string(), "sobolev-integral".to_string()])]
        methods: Vec<String>,
        /// strip-type, self-adjoint, sectorial, positive
        #[arg(long, default_value = "strip-type")]
        model: String,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        model_omega: f64,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long)]
        max_deviation: Option<f64>,
    },
    /// Built-in verification suites.
    Verify {
        /// conventions, hardy, partition, calderon, composition, all
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Execute a JSON manifest.
    Run { manifest: PathBuf },
    /// Quick wall-clock timings of the main kernels.
    Bench {
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
}

fn single_task(kind: &str, params: Value) -> Value {
    json!({"version": manifest::VERSION, "output_dir": "holocalc-out", "tasks": [{"kind": kind, "params": params}]})
}

fn config_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("configuration error: {e}");
    ExitCode::from(EXIT_CONFIG)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let value = match cli.command {
        Command::CheckWeight {
            weight,
            scan_range,
            samples,
        } => single_task(
            "weight-check",
            json!({"weight": weight, "scan_range": scan_range, "samples": samples}),
        ),
        Command::Norm {
            function,
            kind,
            omega,
            omega_prime,
            weight,
            localizer,
        } => {
            let mut p = json!({"function": function, "norm": kind, "omega": omega, "weight": weight, "localizer": localizer});
            if let Some(w) = omega_prime {
                p["omega_prime"] = json!(w);
            }
            single_task("norm", p)
        }
        Command::Calc {
            functions,
            methods,
            model,
            n,
            model_omega,
            seeds,
            max_deviation,
        } => {
            let mut p = json!({
                "functions": functions,
                "methods": methods,
                "model": {"kind": model, "n": n, "omega": model_omega},
                "seeds": seeds,
            });
            if let Some(d) = max_deviation {
                p["max_deviation"] = json!(d);
            }
            single_task("calculus", p)
        }
        Command::Verify { suite } => single_task("verify", json!({"suite": suite})),
        Command::Run { manifest } => match Manifest::load(&manifest) {
            Ok(m) => return execute(m, &cli.global),
            Err(e) => return config_error(e),
        },
        Command::Bench { repeats } => return bench(&cli.global, repeats),
    };
    let m = match Manifest::from_value(value) {
        Ok(m) => m,
        Err(e) => return config_error(e),
    };
    execute(m, &cli.global)
}

fn execute(m: Manifest, g: &Global) -> ExitCode {
    let overrides = m.grid_overrides.merged(GridOverrides {
        half_width: g.grid_l,
        points: g.grid_n,
    });
    let grid = match overrides.apply(Grid::default()) {
        Ok(grid) => grid,
        Err(e) => return config_error(format!("grid: {e}")),
    };
    let ctx = Context {
        grid,
        seed: g.seed.or(m.seed).unwrap_or(0),
        output_dir: g.out.clone().unwrap_or(m.output_dir),
    };
    if let Err(e) = std::fs::create_dir_all(&ctx.output_dir) {
        return config_error(format!("{}: {e}", ctx.output_dir.display()));
    }
    let log = ctx.output_dir.join("run.log.jsonl");
    let report = |o: &tasks::Outcome| {
        if let Err(e) = append_log(&log, o) {
            eprintln!("warning: cannot write {}: {e}", log.display());
        }
        println!(
            "[{}] {} {}: {:?} {}",
            o.index,
            o.kind,
            o.name,
            o.status,
            if o.failures.is_empty() { o.summary.to_string() } else { o.failures.join("; ") }
        );
    };
    let outcomes: Vec<tasks::Outcome> = if g.parallel > 1 {
        let pool = match rayon::ThreadPoolBuilder::new().num_threads(g.parallel).build() {
            Ok(p) => p,
            Err(e) => return config_error(format!("--parallel: {e}")),
        };
        let out: Vec<_> = pool.install(|| m.tasks.par_iter().map(|t| run_task(t, &ctx)).collect());
        out.iter().for_each(report);
        out
    } else {
        m.tasks
            .iter()
            .map(|t| {
                let o = run_task(t, &ctx);
                report(&o);
                o
            })
            .collect()
    };
    if outcomes.iter().all(|o| o.status == Status::Ok) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ASSERTION)
    }
}

fn bench(g: &Global, repeats: usize) -> ExitCode {
    let grid = match (GridOverrides {
        half_width: g.grid_l,
        points: g.grid_n,
    })
    .apply(Grid::default())
    {
        Ok(grid) => grid,
        Err(e) => return config_error(format!("grid: {e}")),
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(g.seed.unwrap_or(0));
    let model = match random_strip_type(&mut rng, 6, 0.5, 2.0) {
        Ok(a) => a,
        Err(e) => return config_error(e),
    };
    let kernels: Vec<(&str, Box<dyn Fn() -> holocalc::Result<()>>)> = vec![
        (
            "weight-diagnostics",
            Box::new(|| holocalc::admissibility_report(&Weight::polynomial(1.0)?, 1e3, 1000).map(drop)),
        ),
        (
            "sobolev-norm",
            Box::new(move || {
                StripFunctionRep::fit(&HolFn::gaussian(), grid, 0.5, Weight::polynomial(1.0)?)?.sobolev_norm();
                Ok(())
            }),
        ),
        (
            "hoermander-norm",
            Box::new(move || {
                let cfg = HoermanderConfig {
                    grid,
                    ..Default::default()
                };
                hoermander_norm(&HolFn::tanh(), &Localizer::gaussian(), &Weight::polynomial(1.0)?, 0.0, &cfg).map(drop)
            }),
        ),
        (
            "contour-6x6",
            Box::new(move || elementary_contour(&model, &HolFn::gaussian(), &ContourConfig::default()).map(drop)),
        ),
    ];
    let mut rows = Vec::new();
    for (name, k) in &kernels {
        let mut best = f64::INFINITY;
        for _ in 0..repeats.max(1) {
            let t = Instant::now();
            if let Err(e) = k() {
                eprintln!("{name}: {e}");
                return ExitCode::from(EXIT_ASSERTION);
            }
            best = best.min(t.elapsed().as_secs_f64());
        }
        println!("{name:<20} {best:>10.4} s");
        rows.push(format!("{name},{best:.6e}"));
    }
    if let Some(out) = &g.out {
        let body = format!("kernel,best_seconds\n{}\n", rows.join("\n"));
        if let Err(e) = std::fs::create_dir_all(out).and_then(|_| std::fs::write(out.join("bench.csv"), body)) {
            return config_error(format!("{}: {e}", out.display()));
        }
    }
    ExitCode::SUCCESS
}
