use clap::{Args, Parser, Subcommand};
use nehari_sp::io::{write_field_with_hash, StoredField};
use nehari_sp::semiclassics::bubble::{loglog_slope, predicted_slope, DEFAULT_RADIUS, NORM_EXPONENTS};
use nehari_sp::semiclassics::gmap::{ground_energy_map_with, GroundEnergy};
use nehari_sp::semiclassics::scan::scan_csv;
use nehari_sp::semiclassics::{
    bubble_estimates, critical_level_check, epsilon_scan, nonexistence_probe, runaway_probe, ScanSetup,
};
use nehari_sp::verify::{run_verify, VerifyOptions};
use nehari_sp::{Error, RunConfig, Solver};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Configurations shipped with the repository; `verify` checks the
/// critical-level margin on each of them.
const SHIPPED: [(&str, &str); 6] = [
    ("constants", include_str!("../../../configs/constants.toml")),
    ("single_well", include_str!("../../../configs/single_well.toml")),
    ("competing", include_str!("../../../configs/competing.toml")),
    ("vanishing_h", include_str!("../../../configs/vanishing_h.toml")),
    ("bump", include_str!("../../../configs/bump.toml")),
    ("well", include_str!("../../../configs/well.toml")),
];

const BUBBLE_SIGMAS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

#[derive(Parser)]
#[command(name = "nehari-sp", version, about = "Ground states of critical Schrödinger–Poisson systems")]
struct Cli {
    /// Worker threads for the parallel solves.
    #[arg(long, global = true, env = "NEHARI_SP_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to `output.dir` of the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize on the Nehari manifold at one ε.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Defaults to the first entry of `scan.eps_list`.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Sample the ground-energy function G on the configured box.
    Gmap {
        #[command(flatten)]
        common: Common,
    },
    /// Concentration diagnostics along `scan.eps_list`.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Run even when c_∞ > c₀ does not hold.
        #[arg(long)]
        force: bool,
    },
    /// Run the property suite.
    Verify {
        /// Only run one group or property.
        #[arg(long)]
        filter: Option<String>,
        /// Also check this configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Flip the sign of the Coulomb kernel (mutation check of the suite).
        #[arg(long, hide = true)]
        flip_kernel: bool,
    },
    /// Integrals of cut-off bubbles and their slopes in σ.
    Bubble {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Runaway probe for configurations without ground states.
    Nonexist {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eps: Option<f64>,
        /// Skip the hypothesis check; for control runs on configurations
        /// that do have ground states.
        #[arg(long)]
        control: bool,
    },
}

enum Failure {
    Config(Error),
    Runtime(String),
    Unconverged(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. }
            | Error::Potential(_)
            | Error::Expr { .. }
            | Error::InvalidArgument(_)
            | Error::InvalidGrid(_)
            | Error::InvalidParameters(_) => Failure::Config(e),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

struct Run {
    cfg: RunConfig,
    hash: String,
    out: PathBuf,
}

impl Run {
    fn load(common: &Common) -> Result<Self, Failure> {
        let cfg = RunConfig::load(&common.config).map_err(|e| match e {
            Error::Io(io) => Failure::Config(Error::Config {
                field: common.config.display().to_string(),
                msg: io.to_string(),
            }),
            other => Failure::from(other),
        })?;
        let out = common.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
        std::fs::create_dir_all(&out)?;
        Ok(Self { hash: cfg.hash(), cfg, out })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn csv(&self, name: &str, body: &str) -> Result<(), Failure> {
        write_csv(&self.path(name), &self.hash, body)
    }

    fn json(&self, name: &str, mut value: serde_json::Value) -> Result<(), Failure> {
        value["config_hash"] = json!(self.hash);
        write_json(&self.path(name), &value)
    }
}

fn write_csv(path: &Path, hash: &str, body: &str) -> Result<(), Failure> {
    std::fs::write(path, format!("# config_hash={hash}\n{body}"))?;
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn eps_tag(eps: f64) -> String {
    format!("{eps}").replace('.', "p")
}

fn solve(common: &Common, eps: Option<f64>) -> Outcome {
    let run = Run::load(common)?;
    let eps = eps.unwrap_or(run.cfg.scan.eps_list[0]);
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Config { field: "--eps".into(), msg: format!("must be positive, got {eps}") }.into());
    }
    let p = run.cfg.potential_set()?;
    let solver = Solver::new(&p, run.cfg.grid()?, eps)?;
    let (state, seeds) = solver.multistart(&[p.k_max_point()], run.cfg.scan.seed_width, &run.cfg.solver)?;
    let tag = eps_tag(eps);
    write_field_with_hash(
        run.path(&format!("ground_state_eps{tag}.field")),
        &StoredField::Grid(state.u.clone()),
        "u",
        Some(&run.hash),
    )?;
    run.csv(&format!("log_eps{tag}.csv"), &state.log_csv())?;
    run.json(
        &format!("energy_eps{tag}.json"),
        json!({
            "eps": eps,
            "energy": state.energy,
            "breakdown": state.breakdown,
            "nehari_residual": state.nehari_residual,
            "el_residual": state.el_residual,
            "norm": state.norm,
            "max_point": state.max_point_original,
            "positive": state.positive,
            "converged": state.converged,
            "iterations": state.iterations,
            "boundary_ratio": state.boundary_ratio,
            "seeds": seeds,
        }),
    )?;
    println!(
        "eps {eps}: energy {:.10} el_residual {:.3e} iterations {} converged {}",
        state.energy, state.el_residual, state.iterations, state.converged
    );
    if state.converged {
        Ok(())
    } else {
        Err(Failure::Unconverged(format!("residual {:.3e} after {} iterations", state.el_residual, state.iterations)))
    }
}

fn gmap_report(run: &Run, ge: &GroundEnergy) -> Result<nehari_sp::semiclassics::GroundEnergyMap, Failure> {
    let p = run.cfg.potential_set()?;
    let gmap = ground_energy_map_with(&p, run.cfg.gmap.extent, run.cfg.gmap.resolution, ge)?;
    let critical = critical_level_check(&gmap, &p).ok();
    run.csv("gmap.csv", &gmap.to_csv())?;
    run.json(
        "gmap_verdict.json",
        json!({
            "c0": gmap.c0,
            "c_inf": gmap.c_inf,
            "argmin": gmap.argmin,
            "existence_verdict": gmap.existence_verdict,
            "critical_threshold": critical.map(|c| c.threshold),
            "critical_margin": critical.map(|c| c.margin),
            "critical_holds": critical.map(|c| c.holds),
        }),
    )?;
    println!(
        "c0 {:.10} c_inf {} |argmin| {} verdict {}",
        gmap.c0,
        gmap.c_inf.map_or("inf".to_string(), |c| format!("{c:.10}")),
        gmap.argmin.len(),
        gmap.existence_verdict
    );
    Ok(gmap)
}

fn gmap(common: &Common) -> Outcome {
    let run = Run::load(common)?;
    gmap_report(&run, &GroundEnergy::new(run.cfg.radial.clone()))?;
    Ok(())
}

fn scan(common: &Common, force: bool) -> Outcome {
    let run = Run::load(common)?;
    let gmap = gmap_report(&run, &GroundEnergy::new(run.cfg.radial.clone()))?;
    if !gmap.existence_verdict && !force {
        return Err(Failure::Config(Error::Config {
            field: "potentials".into(),
            msg: "c_inf > c0 does not hold, so concentration is not predicted; pass --force to scan anyway".into(),
        }));
    }
    let p = run.cfg.potential_set()?;
    let setup = ScanSetup {
        grid: run.cfg.grid()?,
        solver: run.cfg.solver.clone(),
        radial: run.cfg.radial.clone(),
        seed_width: run.cfg.scan.seed_width,
    };
    let entries = epsilon_scan(&p, &run.cfg.scan.eps_list, &setup, &gmap)?;
    for e in &entries {
        let tag = eps_tag(e.report.eps);
        write_field_with_hash(
            run.path(&format!("scan_eps{tag}.field")),
            &StoredField::Grid(e.state.u.clone()),
            "u",
            Some(&run.hash),
        )?;
        run.csv(&format!("scan_log_eps{tag}.csv"), &e.state.log_csv())?;
        println!(
            "eps {}: c_eps {:.10} x_eps {:?} dist {} converged {}",
            e.report.eps,
            e.report.c_eps,
            e.report.max_point,
            e.report.dist_to_argmin.map_or("n/a".to_string(), |d| format!("{d:.4}")),
            e.report.converged
        );
    }
    let reports: Vec<_> = entries.iter().map(|e| e.report.clone()).collect();
    run.csv("scan.csv", &scan_csv(&reports))?;
    run.json("scan.json", json!({ "c0": gmap.c0, "reports": reports }))?;
    match entries.iter().find(|e| !e.report.converged) {
        Some(e) => Err(Failure::Unconverged(format!("ε = {} did not converge", e.report.eps))),
        None => Ok(()),
    }
}

fn verify(filter: Option<String>, config: Option<PathBuf>, out: Option<PathBuf>, flip_kernel: bool) -> Outcome {
    let mut configs = SHIPPED
        .iter()
        .map(|(name, text)| Ok((name.to_string(), RunConfig::from_toml_str(text)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    if let Some(path) = config {
        let name = path.file_stem().map_or("config".into(), |s| s.to_string_lossy().into_owned());
        configs.push((name, RunConfig::load(&path)?));
    }
    let report = run_verify(&VerifyOptions { filter, flip_kernel, configs });
    for p in &report.properties {
        println!(
            "{} {:<40} measured {:.3e} tolerance {:.1e} ({:.1} s) {}",
            if p.passed { "PASS" } else { "FAIL" },
            p.name,
            p.measured,
            p.tolerance,
            p.seconds,
            p.detail
        );
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir)?;
        let value = serde_json::to_value(&report).map_err(|e| Failure::Runtime(e.to_string()))?;
        write_json(&dir.join("verify.json"), &value)?;
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn bubble(out: &Path) -> Outcome {
    std::fs::create_dir_all(out)?;
    let rows = bubble_estimates(&BUBBLE_SIGMAS, [0.0; 3], DEFAULT_RADIUS)?;
    let params = json!({ "sigmas": BUBBLE_SIGMAS, "radius": DEFAULT_RADIUS });
    let hash = {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(params.to_string().as_bytes()))
    };
    let mut body = String::from("sigma,grad_sq,l6");
    for t in NORM_EXPONENTS {
        body.push_str(&format!(",lt_{t}"));
    }
    body.push('\n');
    for r in &rows {
        body.push_str(&format!("{},{:.12e},{:.12e}", r.sigma, r.grad_sq, r.l6));
        for v in r.lt {
            body.push_str(&format!(",{v:.12e}"));
        }
        body.push('\n');
    }
    write_csv(&out.join("bubbles.csv"), &hash, &body)?;
    for (k, t) in NORM_EXPONENTS.iter().enumerate() {
        let y: Vec<f64> = rows.iter().map(|r| r.lt[k]).collect();
        println!("t = {t}: slope {:.4} (predicted {:.4})", loglog_slope(&BUBBLE_SIGMAS, &y), predicted_slope(*t));
    }
    Ok(())
}

fn nonexist(common: &Common, eps: Option<f64>, control: bool) -> Outcome {
    let run = Run::load(common)?;
    let p = run.cfg.potential_set()?;
    let section = &run.cfg.nonexist;
    let eps = eps.unwrap_or(section.eps);
    let grid = run.cfg.grid()?;
    let probe = if control { runaway_probe } else { nonexistence_probe };
    let report = probe(&p, eps, grid, &run.cfg.solver, &run.cfg.radial, section.seed, run.cfg.scan.seed_width)?;
    let mut body = String::from("iter,cx,cy,cz\n");
    for (i, c) in report.centroids.iter().enumerate() {
        body.push_str(&format!("{i},{:.12e},{:.12e},{:.12e}\n", c[0], c[1], c[2]));
    }
    run.csv("nonexist_centroids.csv", &body)?;
    let mut value = serde_json::to_value(&report).map_err(|e| Failure::Runtime(e.to_string()))?;
    value.as_object_mut().expect("report is an object").remove("centroids");
    value["control"] = json!(control);
    run.json("nonexist.json", value)?;
    println!(
        "c_eps {:.10} c_inf {:.10} gap {:.3e} drift {:.4} runaway {}",
        report.c_eps, report.c_inf, report.rel_gap, report.drift, report.runaway
    );
    Ok(())
}

fn main() -> ExitCode {
    // Usage errors exit 1 like other bad input; clap's default of 2 would
    // collide with the unconverged exit code.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = match cli.command {
        Command::Solve { common, eps } => solve(&common, eps),
        Command::Gmap { common } => gmap(&common),
        Command::Scan { common, force } => scan(&common, force),
        Command::Verify { filter, config, out, flip_kernel } => verify(filter, config, out, flip_kernel),
        Command::Bubble { out } => bubble(&out),
        Command::Nonexist { common, eps, control } => nonexist(&common, eps, control),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Unconverged(msg)) => {
            eprintln!("not converged: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verify) => {
            eprintln!("verification failed");
            ExitCode::from(3)
        }
    }
}
