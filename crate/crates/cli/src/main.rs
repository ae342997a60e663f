use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nclg::characteristics::RkOrder;
use nclg::fem::build_space;
use nclg::geometry::{build_uniform_square_mesh, simplex_quadrature, DiagonalSplit, DomainBox};
use nclg::harness::{
    convergence_sweep, relative_l2_error, relative_mass_error, rotating_wave_problem,
    ConvergenceTable, ProblemSettings, SweepCase, SweepConfig,
};
use nclg::scheme::{run, SchemeConfig, StartupMode, Variant};

#[derive(Parser)]
#[command(
    name = "nclg",
    version,
    about = "Lagrange-Galerkin BDF solver for the rotating-wave benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write per-level diagnostics as CSV.
    Run(RunArgs),
    /// Run a JSON-configured sweep and write the convergence table.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the table as JSON instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Compare conservative and non-conservative mass errors on one case.
    Compare(CaseArgs),
}

#[derive(Args, Clone)]
struct CaseArgs {
    #[arg(long = "N")]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    q: usize,
    #[arg(long)]
    dt: f64,
    #[arg(long, default_value_t = 0.01)]
    mu: f64,
    #[arg(long = "T", default_value_t = 0.5)]
    t_final: f64,
    #[arg(long, default_value = "exact")]
    startup: StartupMode,
    #[arg(long, default_value = "lower-left-upper-right")]
    split: DiagonalSplit,
    #[arg(long)]
    quad_degree: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    case: CaseArgs,
    #[arg(long, default_value_t = 0.0)]
    a0: f64,
    #[arg(long, default_value = "conservative")]
    variant: Variant,
    #[arg(long, default_value_t = 4)]
    rk_substeps: usize,
    #[arg(long, default_value_t = 4)]
    rk_order: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the final coefficient vector to this file.
    #[arg(long)]
    field_out: Option<PathBuf>,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run_command(args: RunArgs) -> Result<()> {
    let c = &args.case;
    let mut problem = rotating_wave_problem(c.mu, c.t_final);
    problem.a0 = args.a0;
    if args.a0 != 0.0 {
        // The closed-form solution only holds without reaction.
        problem.exact = None;
        if c.startup == StartupMode::Exact {
            bail!("--startup exact needs a0 = 0; use --startup rk");
        }
    }
    let mesh = build_uniform_square_mesh(DomainBox::symmetric_unit(), c.n, c.split)?;
    let space = build_space(Arc::new(mesh), c.k)?;
    let mut cfg = SchemeConfig::new(c.q, c.dt).with_variant(args.variant);
    cfg.startup = c.startup;
    cfg.quad_degree = c.quad_degree;
    cfg.rk.substeps = args.rk_substeps;
    cfg.rk.order = RkOrder::from_order(args.rk_order)?;
    cfg.validate()?;
    let quad = simplex_quadrature(cfg.quad_degree_for(c.k))?;
    let exact = problem.exact.clone();

    let mut w = output(&args.out)?;
    writeln!(
        w,
        "# N={} k={} q={} dt={} mu={} a0={} T={}",
        c.n, c.k, c.q, c.dt, c.mu, args.a0, c.t_final
    )?;
    writeln!(
        w,
        "# variant={} startup={:?} quad_degree={}",
        args.variant.name(),
        c.startup,
        cfg.quad_degree_for(c.k)
    )?;
    writeln!(w, "t,mass,e_L2_inst")?;
    let mut io_error = None;
    let out = run(&problem, &space, &cfg, |r| {
        let err = exact
            .as_ref()
            .map(|e| {
                format!(
                    "{:.10e}",
                    relative_l2_error(&space, r.field, |x, t| e(x, t), r.diagnostics.t, &quad)
                )
            })
            .unwrap_or_default();
        if let Err(e) = writeln!(
            w,
            "{:.10},{:.10e},{}",
            r.diagnostics.t, r.diagnostics.mass, err
        ) {
            io_error.get_or_insert(e);
        }
    })?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    w.flush()?;

    if let Some(path) = &args.field_out {
        out.field.write_text(BufWriter::new(File::create(path)?))?;
    }
    if let Some(e) = &exact {
        eprintln!(
            "steps={} t={} e_L2={:.6e} e_m={:.6e} cg_iterations={} projected_nodes={} clamped_feet={}",
            out.steps,
            out.time,
            relative_l2_error(&space, &out.field, |x, t| e(x, t), out.time, &quad),
            relative_mass_error(&space, &out.field, |x, t| e(x, t), out.time, &quad),
            out.total_iterations(),
            out.total_projected_nodes(),
            out.total_clamped_feet()
        );
    }
    Ok(())
}

fn write_table(table: &ConvergenceTable, out: &Option<PathBuf>, json: bool) -> Result<()> {
    let mut w = output(out)?;
    if json {
        serde_json::to_writer_pretty(&mut w, table)?;
        writeln!(w)?;
    } else {
        table.write_csv(&mut w)?;
    }
    w.flush()?;
    Ok(())
}

fn compare_command(c: CaseArgs) -> Result<()> {
    let config = SweepConfig {
        problem: ProblemSettings {
            mu: c.mu,
            t_final: c.t_final,
        },
        grid: vec![SweepCase {
            n: c.n,
            k: c.k,
            q: c.q,
            dt: c.dt,
        }],
        variants: vec![
            Variant::Conservative,
            Variant::NonConservative,
            Variant::NonConservativeReaction,
        ],
        startup: c.startup,
        split: c.split,
        quad_degree: c.quad_degree,
    };
    let table = convergence_sweep(&config)?;
    println!("variant,e_L2,e_m");
    for r in &table.rows {
        match &r.failure {
            None => println!("{},{:.6e},{:.6e}", r.variant.name(), r.e_l2, r.e_m),
            Some(msg) => bail!("{} run failed: {msg}", r.variant.name()),
        }
    }
    if let Some(cmp) = table.mass_comparison().first() {
        println!(
            "# e_m ratio nonconservative/conservative = {:.3}",
            cmp.ratio()
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run_command(args),
        Command::Sweep { config, out, json } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let table = convergence_sweep(&SweepConfig::from_json(&text)?)?;
            write_table(&table, &out, json)
        }
        Command::Compare(case) => compare_command(case),
    }
}
