//! `ibstab` command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ibstab::harness::{
    find_critical_dt, poiseuille_experiment, run_observed, BisectOptions, PoiseuilleOptions,
    SimConfig,
};
use ibstab::kernel::{bandlimit_ratio, KernelTable};
use ibstab::stability::{c_surface_membrane, dtc_membrane_from_cmax, dtc_target, table1, Mode};
use ibstab::ForcingKind;

#[derive(Parser, Debug)]
#[command(
    name = "ibstab",
    version,
    about = "Stability laboratory for the immersed boundary method",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fourier coefficients of the 4-point kernel and the band-limit ratio.
    KernelReport {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predicted critical timestep.
    Predict {
        #[command(subcommand)]
        kind: Predict,
    },
    /// Band-limited membrane maxima over a grid of (N, P).
    Table1 {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one configuration and print its relative energy history.
    Simulate(SimulateArgs),
    /// Bisect for the empirical critical timestep.
    FindCriticalDt {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        /// Largest multiple of the configured steps tried on indeterminate runs.
        #[arg(long, default_value_t = 4)]
        max_horizon_factor: usize,
    },
    /// Channel-flow convergence table.
    Poiseuille {
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// End time; defaults to two viscous times `2 L^2 / μ`.
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long, default_value_t = 16)]
        base_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum Predict {
    /// `sqrt(32 ρ h / (3 K))` for target points.
    Target {
        #[arg(long)]
        k: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        h: f64,
    },
    /// Maximize the membrane stability surface.
    Membrane {
        #[arg(long)]
        k: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        /// Meshwidth; defaults to `1/N`.
        #[arg(long)]
        h: Option<f64>,
        /// Use the full lattice sums instead of the band-limited form.
        #[arg(long)]
        exact: bool,
        #[arg(long, value_parser = parse_shift, requires = "exact")]
        eps: Option<[f64; 3]>,
    },
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write marker positions every this many steps.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    dump_membrane: Option<u64>,
    /// Directory for the snapshot files `membrane_<step>.csv`.
    #[arg(long, default_value = ".")]
    dump_dir: PathBuf,
}

/// `e1,e2,e3` into a shift vector.
fn parse_shift(s: &str) -> std::result::Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    <[f64; 3]>::try_from(v.as_slice())
        .map_err(|_| format!("expected three comma-separated values, got {}", v.len()))
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn kernel_report(n: usize, out: Option<&Path>) -> Result<()> {
    let table = KernelTable::with_qcut(n, 2 * n)?;
    let ratio = bandlimit_ratio(n)?;
    let mut w = open_out(out)?;
    writeln!(w, "q,Phi")?;
    let m = 2 * n as i64;
    for q in -m..=m {
        writeln!(w, "{q},{:e}", table.coeff(q))?;
    }
    writeln!(w, "# R({n}) = {ratio:e}")?;
    w.flush()?;
    Ok(())
}

fn predict(kind: Predict) -> Result<()> {
    match kind {
        Predict::Target { k, rho, h } => {
            println!("dt_critical={:e}", dtc_target(k, rho, h)?);
        }
        Predict::Membrane {
            k,
            rho,
            n,
            p,
            h,
            exact,
            eps,
        } => {
            let eps = eps.unwrap_or([0.0; 3]);
            let mode = if exact {
                Mode::Exact
            } else {
                Mode::BandLimited
            };
            let h = h.unwrap_or(1.0 / n as f64);
            let report = c_surface_membrane(n, p, mode, eps)?;
            let dt = dtc_membrane_from_cmax(k, rho, h, p, report.cmax)?;
            println!("Cmax={:e}", report.cmax);
            println!("argmax={},{}", report.argmax.0, report.argmax.1);
            println!("dt_critical={dt:e}");
        }
    }
    Ok(())
}

fn write_table1(n: &[usize], p: &[usize], out: Option<&Path>) -> Result<()> {
    let rows = table1(n, p)?;
    let mut w = open_out(out)?;
    writeln!(w, "N,P,Cmax,xi1,xi2")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{:e},{},{}",
            r.n, r.p, r.cmax, r.argmax.0, r.argmax.1
        )?;
    }
    w.flush()?;
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let cfg = SimConfig::from_file(&args.config)?;
    if args.dump_membrane.is_some() && cfg.forcing != ForcingKind::Membrane {
        bail!("--dump-membrane needs forcing = membrane");
    }
    let mut dump_error = None;
    let verdict = run_observed(&cfg, |sim| {
        let Some(every) = args.dump_membrane else {
            return Ok(());
        };
        let step = sim.fluid().step_index;
        if !(step as u64).is_multiple_of(every) || dump_error.is_some() {
            return Ok(());
        }
        let path = args.dump_dir.join(format!("membrane_{step:06}.csv"));
        if let Err(e) = write_snapshot(&path, sim.sheet().m(), &sim.positions()) {
            dump_error = Some(e);
        }
        Ok(())
    })?;
    if let Some(e) = dump_error {
        return Err(e);
    }
    let mut w = open_out(args.out.as_deref())?;
    writeln!(w, "step,time,relative_energy")?;
    for t in &verdict.trace {
        writeln!(w, "{},{:e},{:e}", t.step, t.time, t.relative_energy)?;
    }
    w.flush()?;
    eprintln!("status={:?}", verdict.status);
    Ok(())
}

fn write_snapshot(path: &Path, m: usize, x: &[ibstab::Vec3]) -> Result<()> {
    let mut w = BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    );
    writeln!(w, "k1,k2,X1,X2,X3")?;
    for (i, p) in x.iter().enumerate() {
        writeln!(w, "{},{},{:e},{:e},{:e}", i % m, i / m, p[0], p[1], p[2])?;
    }
    w.flush()?;
    Ok(())
}

fn critical_dt(
    config: &Path,
    lo: f64,
    hi: f64,
    tol: f64,
    seeds: usize,
    max_horizon_factor: usize,
) -> Result<()> {
    let cfg = SimConfig::from_file(config)?;
    let opts = BisectOptions {
        rel_tol: tol,
        n_seeds: seeds,
        max_horizon_factor,
    };
    let r = find_critical_dt(&cfg, lo, hi, &opts)?;
    println!("dt_critical_empirical={:e}", r.dt);
    for (i, (dt, (a, b))) in r.per_seed.iter().zip(&r.brackets).enumerate() {
        println!("seed_{i}={dt:e} bracket=[{a:e},{b:e}]");
    }
    Ok(())
}

fn poiseuille(levels: usize, t_end: Option<f64>, base_n: usize, out: Option<&Path>) -> Result<()> {
    let mut opts = PoiseuilleOptions {
        levels,
        base_n,
        ..PoiseuilleOptions::default()
    };
    if let Some(t) = t_end {
        opts.t_end = t;
    }
    let rows = poiseuille_experiment(&opts)?;
    let mut w = open_out(out)?;
    writeln!(w, "N,err_u_L1,err_u_L2,err_u_Linf,d_L1,d_L2,d_Linf")?;
    for r in rows {
        let [u1, u2, ui] = r.err_u;
        let [d1, d2, di] = r.d;
        writeln!(w, "{},{u1:e},{u2:e},{ui:e},{d1:e},{d2:e},{di:e}", r.n)?;
    }
    w.flush()?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::KernelReport { n, out } => kernel_report(n, out.as_deref()),
        Command::Predict { kind } => predict(kind),
        Command::Table1 { n, p, out } => write_table1(&n, &p, out.as_deref()),
        Command::Simulate(args) => simulate(args),
        Command::FindCriticalDt {
            config,
            lo,
            hi,
            tol,
            seeds,
            max_horizon_factor,
        } => critical_dt(&config, lo, hi, tol, seeds, max_horizon_factor),
        Command::Poiseuille {
            levels,
            t_end,
            base_n,
            out,
        } => poiseuille(levels, t_end, base_n, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
