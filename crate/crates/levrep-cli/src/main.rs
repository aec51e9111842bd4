use clap::{Parser, Subcommand};
use levrep_cli::commands::{
    self, FitArgs, KernelArgs, SpacingArgs, SweepArgs, VarianceArgs,
};
use levrep_cli::config::CommonArgs;

/// Spectral statistics of integrable systems under parametric ensemble
/// averaging: deterministic ensembles, spacing and correlation estimators,
/// closed-form model overlays, reproducible CSV outputs.
#[derive(Parser)]
#[command(name = "levrep", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Nearest-neighbour spacing histogram with model overlays and a
    /// repulsion-period fit
    Spacing {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        args: SpacingArgs,
    },
    /// P(s) at fixed small s across running energies, with the
    /// 1/sqrt(energy) coefficient fit
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        args: SweepArgs,
    },
    /// Level number variance over an interval-width grid
    Variance {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        args: VarianceArgs,
    },
    /// Empirical two-point kernel from pair distances
    Kernel {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        args: KernelArgs,
    },
    /// Repulsion-period fit on a stored spacing histogram
    Fit(FitArgs),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Spacing { common, args } => {
            let (cfg, file) = common.resolve()?;
            let params = args.resolve(&file)?;
            file.finish()?;
            commands::run_spacing(&cfg, &params)?;
        }
        Cmd::Sweep { common, args } => {
            let (cfg, file) = common.resolve()?;
            let params = args.resolve(&file)?;
            file.finish()?;
            commands::run_sweep(&cfg, &params)?;
        }
        Cmd::Variance { common, args } => {
            let (cfg, file) = common.resolve()?;
            let params = args.resolve(&file)?;
            file.finish()?;
            commands::run_variance(&cfg, &params)?;
        }
        Cmd::Kernel { common, args } => {
            let (cfg, file) = common.resolve()?;
            let params = args.resolve(&file)?;
            file.finish()?;
            commands::run_kernel(&cfg, &params)?;
        }
        Cmd::Fit(args) => {
            commands::run_fit(&args)?;
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse(); // clap itself exits 2 on flag-parse errors
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        let usage = e.downcast_ref::<levrep::Error>().is_some_and(|le| {
            matches!(
                le,
                levrep::Error::Config(_) | levrep::Error::GridTooWide(_) | levrep::Error::Domain(_)
            )
        });
        std::process::exit(if usage { 2 } else { 1 });
    }
}
