//! Command-line driver: reproducible runs from a single JSON config.
//!
//! Exit codes: 0 success, 2 config/parameter error, 3 blow-up,
//! 4 region violation (fatal audits and the invariant-audit command).

use clap::{Parser, Subcommand};
use fracsplit::asymptotics::track_asymptote;
use fracsplit::config::{RunConfig, RunPlan};
use fracsplit::io::{self, KernelTableRow, RunMetadata, SnapshotEntry};
use fracsplit::kernel::{heat_kernel, stable_density_radial, KernelSpec};
use fracsplit::regions::AuditReport;
use fracsplit::splitting::{self, SimulationBlowUp, SimulationFailure, Trajectory};
use fracsplit::Error;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_BLOW_UP: u8 = 3;
const EXIT_REGION: u8 = 4;

#[derive(Parser)]
#[command(
    name = "fracsplit",
    version,
    about = "Lie-Trotter splitting solver for fractional reaction-diffusion equations"
)]
struct Cli {
    /// Worker threads for per-step parallelism (affects speed only).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write trajectory artifacts.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Self-convergence study over the config's h list.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Tabulate the stable density and heat kernel as CSV.
    KernelTable {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        time: f64,
        /// Half-width of the sampled x range (radial for dim > 1).
        #[arg(long)]
        range: f64,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a simulation and audit it against the configured region;
    /// exits 4 when the audit fails.
    InvariantAudit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a simulation and track boundary asymptotes against the
    /// reaction ODE.
    Asymptote {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("fracsplit: cannot configure thread pool: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let outcome = match cli.command {
        Command::Simulate { config, out, seed } => run_simulate(&config, &out, seed, Mode::Simulate),
        Command::InvariantAudit { config, out, seed } => {
            run_simulate(&config, &out, seed, Mode::Audit)
        }
        Command::Asymptote { config, out, seed } => {
            run_simulate(&config, &out, seed, Mode::Asymptote)
        }
        Command::Converge { config, out, seed } => run_converge(&config, &out, seed),
        Command::KernelTable { beta, sigma, dim, time, range, samples, out } => {
            run_kernel_table(beta, sigma, dim, time, range, samples, &out)
        }
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("fracsplit: {e}");
            let code = match e {
                Error::BlowUp { .. } => EXIT_BLOW_UP,
                _ => EXIT_CONFIG,
            };
            ExitCode::from(code)
        }
    }
}

#[derive(PartialEq, Clone, Copy)]
enum Mode {
    Simulate,
    Audit,
    Asymptote,
}

fn load_plan(config: &Path, seed: Option<u64>) -> Result<RunPlan, Error> {
    RunConfig::load(config)?.build(seed)
}

fn run_simulate(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    mode: Mode,
) -> Result<ExitCode, Error> {
    let plan = load_plan(config, seed)?;
    if mode == Mode::Audit && plan.monitors.regions.is_empty() {
        return Err(Error::Config("invariant-audit needs a region monitor in the config".into()));
    }
    if mode == Mode::Asymptote && plan.probe.is_none() {
        return Err(Error::Config("asymptote needs monitors.asymptote in the config".into()));
    }
    std::fs::create_dir_all(out)?;

    let result = splitting::simulate(
        &plan.initial,
        &plan.model,
        &plan.specs,
        &plan.schedule,
        &plan.monitors,
        &plan.flow,
    );
    match result {
        Ok(traj) => {
            let mut files = Vec::new();
            let mut code = ExitCode::SUCCESS;

            if !plan.monitors.regions.is_empty() {
                let audits = &traj.monitors.region_audits[0];
                let report = AuditReport {
                    region: plan.monitors.regions[0].describe().to_string(),
                    tolerance: plan.monitors.regions[0].tolerance(),
                    snapshots: audits.clone(),
                    pass: audits.iter().all(|a| a.pass),
                };
                io::write_audit(out, &report)?;
                files.push(io::AUDIT_FILE.to_string());
                if !report.pass {
                    eprintln!(
                        "fracsplit: region audit failed (worst margin {:.3e})",
                        report
                            .snapshots
                            .iter()
                            .map(|s| s.worst_margin)
                            .fold(f64::INFINITY, f64::min)
                    );
                    if mode == Mode::Audit || plan.region_fatal {
                        code = ExitCode::from(EXIT_REGION);
                    }
                }
            }

            if let Some(probe) = &plan.probe {
                let series =
                    track_asymptote(&traj, &plan.model, probe, &plan.flow, plan.specs.first())?;
                io::write_deviation_csv(out, &series)?;
                files.push(io::ASYMPTOTE_FILE.to_string());
            }

            write_trajectory_artifacts(out, &plan, &traj, files)?;
            Ok(code)
        }
        Err(SimulationFailure::Invalid(e)) => Err(e),
        Err(SimulationFailure::BlowUp(blow_up)) => {
            // Keep the partial trajectory on disk for diagnosis.
            write_trajectory_artifacts(out, &plan, &blow_up.partial, Vec::new())?;
            let SimulationBlowUp { step, time, grid_index, .. } = blow_up;
            match grid_index {
                Some(p) => {
                    eprintln!("fracsplit: blow-up at step {step}, t = {time}, grid point {p}")
                }
                None => eprintln!("fracsplit: blow-up at step {step}, t = {time}"),
            }
            Ok(ExitCode::from(EXIT_BLOW_UP))
        }
    }
}

fn write_trajectory_artifacts(
    out: &Path,
    plan: &RunPlan,
    traj: &Trajectory,
    mut files: Vec<String>,
) -> Result<(), Error> {
    let (snapshots, half_snapshots): (Vec<SnapshotEntry>, Vec<SnapshotEntry>) =
        io::write_snapshots(out, traj)?;
    io::write_supnorm_csv(out, &traj.times, &traj.monitors.sup_norm)?;
    files.push(io::SUPNORM_FILE.to_string());
    files.sort();
    let meta = RunMetadata {
        format_version: 1,
        grid: plan.initial.grid(),
        kernel: &plan.specs,
        model: plan.model.variant_name().to_string(),
        state_dim: plan.initial.state_dim(),
        complex: plan.initial.is_complex(),
        schedule_h: plan.schedule.period(),
        schedule_steps: plan.schedule.steps(),
        total_time: plan.schedule.total_time(),
        seed: plan.seed,
        snapshots,
        half_snapshots,
        sup_norm: &traj.monitors.sup_norm,
        boundary_band_means: traj.monitors.boundary_values.as_deref(),
        files,
        config: &plan.config,
    };
    io::write_metadata(out, &meta)?;
    Ok(())
}

fn run_converge(config: &Path, out: &Path, seed: Option<u64>) -> Result<ExitCode, Error> {
    let plan = load_plan(config, seed)?;
    let converge = plan
        .config
        .converge
        .clone()
        .ok_or_else(|| Error::Config("converge needs a \"converge\" section in the config".into()))?;
    std::fs::create_dir_all(out)?;
    let table = splitting::self_convergence(
        &plan.initial,
        &plan.model,
        &plan.specs,
        converge.total_time,
        &converge.h_list,
        &plan.flow,
    )?;
    io::write_convergence_csv(out, &table)?;
    for row in &table.rows {
        match row.order {
            Some(o) => println!("h = {:<10} error = {:.6e}  order = {:.3}", row.h, row.error, o),
            None => println!("h = {:<10} error = {:.6e}", row.h, row.error),
        }
    }
    if let Some(order) = table.mean_order() {
        println!("mean order estimate: {order:.3}");
    }
    Ok(ExitCode::SUCCESS)
}

fn run_kernel_table(
    beta: f64,
    sigma: f64,
    dim: usize,
    time: f64,
    range: f64,
    samples: usize,
    out: &Path,
) -> Result<ExitCode, Error> {
    if samples < 2 {
        return Err(Error::Parameter("kernel table needs at least 2 samples".into()));
    }
    if !(range.is_finite() && range > 0.0) {
        return Err(Error::Parameter(format!("range must be > 0, got {range}")));
    }
    let spec = KernelSpec::new(sigma, beta, dim)?;
    std::fs::create_dir_all(out)?;

    let (lo, hi) = if dim == 1 { (-range, range) } else { (0.0, range) };
    let dx = (hi - lo) / (samples - 1) as f64;
    let mut rows = Vec::with_capacity(samples);
    for i in 0..samples {
        let x = lo + i as f64 * dx;
        let density = stable_density_radial(beta, dim, x.abs())?;
        let mut point = vec![0.0; dim];
        point[0] = x;
        let heat = heat_kernel(&spec, time, &point)?;
        rows.push(KernelTableRow { x, density, heat });
    }

    // Trapezoid mass over the sampled range, with the radial volume
    // element for dim > 1.
    let weight = |x: f64| match dim {
        1 => 1.0,
        2 => 2.0 * PI * x.abs(),
        _ => 4.0 * PI * x * x,
    };
    let mut mass = 0.0;
    for w in rows.windows(2) {
        mass += 0.5 * (w[0].density * weight(w[0].x) + w[1].density * weight(w[1].x)) * dx;
    }
    io::write_kernel_table(out, &rows, mass)?;
    println!("kernel table: {} samples, trapezoid mass {mass:.9}", rows.len());
    Ok(ExitCode::SUCCESS)
}
