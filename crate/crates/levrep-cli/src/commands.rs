//! The five subcommands: spacing, sweep, variance, kernel, fit.
//!
//! Every command creates its output directory, writes CSVs (one header
//! row), a plain-text fit report where applicable, and a manifest listing
//! all outputs with SHA-256 checksums.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use levrep::fit::{fit_report, fit_sqrt_coefficient, fit_t_min, fit_t_min_binned, FitResult};
use levrep::models::{
    ansatz_cumulative, ansatz_cumulative_asymptote, ansatz_spacing_pdf, poisson_cumulative,
    rectangle_variance_adaptive, t_min_rectangle, AnsatzParams,
};
use levrep::stats::{
    CumulativeTally, KernelAccumulator, SpacingAccumulator, VarianceAccumulator,
};
use levrep::Real;

use crate::config::{fmt_f64, CommonConfig, KvFile};
use crate::csvio::write_csv;
use crate::manifest::ManifestWriter;
use crate::runner::{reduce_members, reduce_members_with_dump};

/// Paths produced by one run.
#[derive(Debug)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

fn finish_run(
    common_echo: Vec<(String, String)>,
    extra_echo: Vec<(String, String)>,
    command: &str,
    dir: &std::path::Path,
    files: Vec<PathBuf>,
    started: Instant,
) -> Result<RunOutput> {
    let mut kv = common_echo;
    kv.extend(extra_echo);
    let mut m = ManifestWriter::new(command, kv);
    for f in &files {
        m.add_output(f)?;
    }
    let manifest = m.write(dir, started.elapsed().as_secs_f64())?;
    Ok(RunOutput {
        dir: dir.to_path_buf(),
        files,
        manifest,
    })
}

// ---------------------------------------------------------------- spacing

#[derive(Debug, Clone, clap::Args)]
pub struct SpacingArgs {
    /// Histogram bin width
    #[arg(long)]
    pub bin: Option<f64>,
    /// Histogram upper edge
    #[arg(long)]
    pub smax: Option<f64>,
    /// Lower edge of the repulsion-period fit bracket
    #[arg(long)]
    pub fit_lo: Option<f64>,
    /// Upper edge of the repulsion-period fit bracket
    #[arg(long)]
    pub fit_hi: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SpacingParams {
    pub bin: f64,
    pub smax: f64,
    pub fit_lo: f64,
    pub fit_hi: f64,
}

impl SpacingArgs {
    pub fn resolve(&self, file: &KvFile) -> Result<SpacingParams> {
        Ok(SpacingParams {
            bin: self.bin.or(file.get("bin")?).unwrap_or(0.05),
            smax: self.smax.or(file.get("smax")?).unwrap_or(5.0),
            fit_lo: self.fit_lo.or(file.get("fit-lo")?).unwrap_or(0.0),
            fit_hi: self.fit_hi.or(file.get("fit-hi")?).unwrap_or(0.3),
        })
    }
}

/// Ensemble spacing histogram plus Poisson / theory / fitted model overlays.
pub fn run_spacing(common: &CommonConfig, p: &SpacingParams) -> Result<RunOutput> {
    let started = Instant::now();
    let cfg = common.ensemble();
    cfg.validate()?;
    std::fs::create_dir_all(&common.out_dir)
        .with_context(|| format!("creating {}", common.out_dir.display()))?;
    eprintln!(
        "spacing: {} members, {} at energy {}, window {}",
        cfg.member_count,
        cfg.system.name(),
        cfg.energy,
        cfg.window_width
    );

    let mut files = Vec::new();
    let make = || SpacingAccumulator::new(p.bin, p.smax).expect("validated params");
    let acc = if let Some(dump) = &common.dump_levels {
        let path = common.out_dir.join(dump);
        let acc =
            reduce_members_with_dump(&cfg, &path, make, |acc, w| acc.absorb_window(w))?;
        files.push(path);
        acc
    } else {
        reduce_members(&cfg, common.threads, make, |acc, w| acc.absorb_window(w), |a, b| {
            a.merge(&b)
        })?
    };
    let hist = acc.finalize()?;

    let hist_path = common.out_dir.join("spacing_hist.csv");
    let rows: Vec<Vec<Option<f64>>> = hist
        .mids()
        .iter()
        .zip(hist.density.iter().zip(&hist.stderr))
        .map(|(&s, (&d, &e))| vec![Some(s), Some(d), Some(e)])
        .collect();
    write_csv(&hist_path, "s_mid,density,stderr", &rows)?;
    files.push(hist_path);

    // model overlays on the same abscissas, x,value schema
    let theory = AnsatzParams::new(t_min_rectangle(cfg.energy))?;
    let fit = fit_t_min(&hist, (p.fit_lo, p.fit_hi))?;
    let fitted = AnsatzParams::new(fit.parameter)?;
    let mids = hist.mids();
    for (name, params) in [
        ("model_poisson.csv", AnsatzParams::new(0.0)?),
        ("model_ansatz_theory.csv", theory),
        ("model_ansatz_fit.csv", fitted),
    ] {
        let path = common.out_dir.join(name);
        let rows: Vec<Vec<Option<f64>>> = mids
            .iter()
            .map(|&s| vec![Some(s), Some(ansatz_spacing_pdf(s, params))])
            .collect();
        write_csv(&path, "x,value", &rows)?;
        files.push(path);
    }

    let report_path = common.out_dir.join("fit_report.txt");
    std::fs::write(
        &report_path,
        fit_report("repulsion period from p(s)", &fit, Some((p.fit_lo, p.fit_hi))),
    )?;
    files.push(report_path);

    let extra = vec![
        ("bin".to_string(), fmt_f64(p.bin)),
        ("smax".to_string(), fmt_f64(p.smax)),
        ("fit-lo".to_string(), fmt_f64(p.fit_lo)),
        ("fit-hi".to_string(), fmt_f64(p.fit_hi)),
    ];
    finish_run(common.echo(), extra, "spacing", &common.out_dir, files, started)
}

// ------------------------------------------------------------------ sweep

#[derive(Debug, Clone, clap::Args)]
pub struct SweepArgs {
    /// Comma-separated running energies
    #[arg(long, value_delimiter = ',')]
    pub energies: Option<Vec<f64>>,
    /// Level separation s at which P(s) is evaluated
    #[arg(long)]
    pub s: Option<f64>,
    /// Emit curves only; skip the 1/sqrt(energy) coefficient fit
    #[arg(long)]
    pub no_fit: bool,
}

#[derive(Debug, Clone)]
pub struct SweepParams {
    pub energies: Vec<f64>,
    pub s: f64,
    pub no_fit: bool,
}

impl SweepArgs {
    pub fn resolve(&self, file: &KvFile) -> Result<SweepParams> {
        let energies = match &self.energies {
            Some(v) if !v.is_empty() => v.clone(),
            _ => match file.get::<String>("energies")? {
                Some(s) => s
                    .split(',')
                    .map(|tok| tok.trim().parse::<f64>().map_err(anyhow::Error::from))
                    .collect::<Result<Vec<f64>>>()?,
                None => vec![2500.0, 1e4, 4e4],
            },
        };
        let no_fit = self.no_fit || file.get::<bool>("no-fit")?.unwrap_or(false);
        Ok(SweepParams {
            energies,
            s: self.s.or(file.get("s")?).unwrap_or(0.05),
            no_fit,
        })
    }
}

/// P(s) at a fixed small separation across running energies, with the
/// Poisson constant, exact and asymptotic theory curves, and a fitted
/// c/sqrt(energy) overlay.
pub fn run_sweep(common: &CommonConfig, p: &SweepParams) -> Result<RunOutput> {
    let started = Instant::now();
    if p.energies.is_empty() {
        bail!(levrep::Error::Config("sweep needs at least one energy".into()));
    }
    if !(p.s > 0.0) {
        bail!(levrep::Error::Config(format!("s must be > 0, got {}", p.s)));
    }
    if p.s >= 1.0 {
        eprintln!(
            "warning: s = {} is not small; the 1/sqrt(energy) asymptote is invalid there",
            p.s
        );
    }
    std::fs::create_dir_all(&common.out_dir)?;

    let mut points: Vec<(f64, f64, f64)> = Vec::new();
    for (k, &energy) in p.energies.iter().enumerate() {
        let cfg = common.ensemble_at(energy, common.seed + k as u64);
        cfg.validate()?;
        eprintln!(
            "sweep: energy {energy}, window {}, {} members",
            cfg.window_width, cfg.member_count
        );
        let tally = reduce_members(
            &cfg,
            common.threads,
            CumulativeTally::default,
            |acc, w| acc.absorb_window(p.s, w),
            |a, b| a.merge(&b),
        )?;
        points.push((energy, tally.estimate(p.s)?, tally.stderr(p.s)));
    }

    let fit: Option<FitResult> = if p.no_fit {
        None
    } else if points.len() >= 3 {
        Some(fit_sqrt_coefficient(&points, p.s)?)
    } else {
        None
    };

    let poisson = poisson_cumulative(p.s)?;
    let rows: Vec<Vec<Option<f64>>> = points
        .iter()
        .map(|&(energy, p_meas, stderr)| {
            let params = AnsatzParams {
                t_min: t_min_rectangle(energy),
            };
            let exact = ansatz_cumulative(p.s, params).expect("s > 0");
            let asym = ansatz_cumulative_asymptote(p.s, params).expect("s > 0");
            vec![
                Some(energy),
                Some(p_meas),
                Some(stderr),
                Some(poisson),
                Some(exact),
                Some(asym),
                fit.as_ref().map(|f| poisson - f.parameter / energy.sqrt()),
            ]
        })
        .collect();
    let sweep_path = common.out_dir.join("sweep.csv");
    write_csv(
        &sweep_path,
        "energy,P_measured,stderr,P_poisson,P_exact,P_asymptote,P_fitted",
        &rows,
    )?;
    let mut files = vec![sweep_path];

    if let Some(f) = &fit {
        let report_path = common.out_dir.join("fit_report.txt");
        std::fs::write(
            &report_path,
            fit_report("coefficient of 1/sqrt(energy) in P(s)", f, None),
        )?;
        files.push(report_path);
    }

    let extra = vec![
        (
            "energies".to_string(),
            p.energies
                .iter()
                .map(|e| fmt_f64(*e))
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("s".to_string(), fmt_f64(p.s)),
        ("no-fit".to_string(), p.no_fit.to_string()),
    ];
    let out = finish_run(common.echo(), extra, "sweep", &common.out_dir, files, started)?;
    if !p.no_fit && points.len() < 3 {
        bail!(levrep::Error::Config(format!(
            "the coefficient fit needs >= 3 energies, got {}; curves were still written \
             (pass --no-fit to silence)",
            points.len()
        )));
    }
    Ok(out)
}

// --------------------------------------------------------------- variance

#[derive(Debug, Clone, clap::Args)]
pub struct VarianceArgs {
    /// Smallest interval width
    #[arg(long)]
    pub l_min: Option<f64>,
    /// Interval-width step
    #[arg(long)]
    pub l_step: Option<f64>,
    /// Largest interval width
    #[arg(long)]
    pub l_max: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct VarianceParams {
    pub l_min: f64,
    pub l_step: f64,
    pub l_max: f64,
}

impl VarianceArgs {
    pub fn resolve(&self, file: &KvFile) -> Result<VarianceParams> {
        let l_step = self.l_step.or(file.get("l-step")?).unwrap_or(1.0);
        Ok(VarianceParams {
            l_min: self.l_min.or(file.get("l-min")?).unwrap_or(l_step),
            l_step,
            l_max: self.l_max.or(file.get("l-max")?).unwrap_or(50.0),
        })
    }

    pub fn grid(p: &VarianceParams) -> Vec<f64> {
        let mut grid = Vec::new();
        let mut l = p.l_min;
        while l <= p.l_max + 1e-9 {
            grid.push(l);
            l += p.l_step;
        }
        grid
    }
}

/// Level number variance over an interval-width grid, with the
/// winding-number-sum overlay for the rectangle.
pub fn run_variance(common: &CommonConfig, p: &VarianceParams) -> Result<RunOutput> {
    let started = Instant::now();
    let grid = VarianceArgs::grid(p);
    let cfg = common.ensemble();
    cfg.validate()?;
    std::fs::create_dir_all(&common.out_dir)?;
    eprintln!(
        "variance: {} members, L in [{}, {}] step {}",
        cfg.member_count, p.l_min, p.l_max, p.l_step
    );

    let make = || VarianceAccumulator::new(&grid, cfg.window_width).expect("validated grid");
    // grid errors surface before the run
    VarianceAccumulator::new(&grid, cfg.window_width)?;
    let acc = reduce_members(&cfg, common.threads, make, |acc, w| acc.absorb(w), |a, b| {
        a.merge(&b)
    })?;
    let curve = acc.finalize()?;

    let var_path = common.out_dir.join("variance.csv");
    let rows: Vec<Vec<Option<f64>>> = curve
        .l_grid
        .iter()
        .zip(curve.sigma2.iter().zip(&curve.stderr))
        .map(|(&l, (&v, &e))| vec![Some(l), Some(v), Some(e)])
        .collect();
    write_csv(&var_path, "L,sigma2,stderr", &rows)?;
    let mut files = vec![var_path];

    if cfg.system == levrep::ensemble::System::Rectangle {
        let model_path = common.out_dir.join("variance_model.csv");
        let rows: Vec<Vec<Option<f64>>> = grid
            .iter()
            .map(|&l| {
                let v = rectangle_variance_adaptive::<Real>(
                    l,
                    cfg.energy,
                    cfg.param_law.mean,
                    1e-3,
                    8192,
                );
                vec![Some(l), Some(v.value)]
            })
            .collect();
        write_csv(&model_path, "x,value", &rows)?;
        files.push(model_path);
    }

    let extra = vec![
        ("l-min".to_string(), fmt_f64(p.l_min)),
        ("l-step".to_string(), fmt_f64(p.l_step)),
        ("l-max".to_string(), fmt_f64(p.l_max)),
    ];
    finish_run(common.echo(), extra, "variance", &common.out_dir, files, started)
}

// ----------------------------------------------------------------- kernel

#[derive(Debug, Clone, clap::Args)]
pub struct KernelArgs {
    /// Largest pair separation measured
    #[arg(long)]
    pub omega_max: Option<f64>,
    /// Pair-distance bin width
    #[arg(long)]
    pub omega_bin: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct KernelParams {
    pub omega_max: f64,
    pub omega_bin: f64,
}

impl KernelArgs {
    pub fn resolve(&self, file: &KvFile) -> Result<KernelParams> {
        Ok(KernelParams {
            omega_max: self.omega_max.or(file.get("omega-max")?).unwrap_or(30.0),
            omega_bin: self.omega_bin.or(file.get("omega-bin")?).unwrap_or(0.5),
        })
    }
}

/// Empirical smooth kernel from pair distances, with the ansatz overlay.
pub fn run_kernel(common: &CommonConfig, p: &KernelParams) -> Result<RunOutput> {
    let started = Instant::now();
    let cfg = common.ensemble();
    cfg.validate()?;
    if !(p.omega_bin > 0.0) || !(p.omega_max >= p.omega_bin) {
        bail!(levrep::Error::Config(format!(
            "need omega-bin > 0 and omega-max >= omega-bin; got {}, {}",
            p.omega_bin, p.omega_max
        )));
    }
    std::fs::create_dir_all(&common.out_dir)?;
    let n_bins = (p.omega_max / p.omega_bin).round().max(1.0) as usize;
    // surface grid-vs-window errors before the run
    KernelAccumulator::new(n_bins, p.omega_bin, cfg.window_width)?;
    eprintln!(
        "kernel: {} members, {} bins of {}",
        cfg.member_count, n_bins, p.omega_bin
    );

    let make = || KernelAccumulator::new(n_bins, p.omega_bin, cfg.window_width).expect("validated");
    let acc = reduce_members(&cfg, common.threads, make, |acc, w| acc.absorb(w), |a, b| {
        a.merge(&b)
    })?;
    let est = acc.finalize()?;

    let kernel_path = common.out_dir.join("kernel.csv");
    let rows: Vec<Vec<Option<f64>>> = est
        .omega_grid
        .iter()
        .zip(est.k_smooth.iter().zip(&est.stderr))
        .map(|(&w, (&k, &e))| vec![Some(w), Some(k), Some(e)])
        .collect();
    write_csv(&kernel_path, "omega,k_smooth,stderr", &rows)?;
    let mut files = vec![kernel_path];

    // ansatz overlay with the system's repulsion period
    let t_min = match cfg.system {
        levrep::ensemble::System::Rectangle => t_min_rectangle(cfg.energy),
        levrep::ensemble::System::Kepler => {
            levrep::models::kepler_t_min(cfg.energy, cfg.param_law.mean)
        }
    };
    let model_path = common.out_dir.join("kernel_model.csv");
    let params = AnsatzParams::new(t_min)?;
    let rows: Vec<Vec<Option<f64>>> = est
        .omega_grid
        .iter()
        .map(|&w| vec![Some(w), Some(levrep::models::ansatz_kernel(w, params))])
        .collect();
    write_csv(&model_path, "x,value", &rows)?;
    files.push(model_path);

    // the Kepler winding sum is pointwise-defined; overlay it as printed
    if cfg.system == levrep::ensemble::System::Kepler {
        let sum_path = common.out_dir.join("kernel_model_sum.csv");
        let rows: Vec<Vec<Option<f64>>> = est
            .omega_grid
            .iter()
            .map(|&w| {
                let v = levrep::models::kepler_kernel(w, cfg.energy, cfg.param_law.mean, 400);
                vec![Some(w), Some(v.value)]
            })
            .collect();
        write_csv(&sum_path, "x,value", &rows)?;
        files.push(sum_path);
    }

    let extra = vec![
        ("omega-max".to_string(), fmt_f64(p.omega_max)),
        ("omega-bin".to_string(), fmt_f64(p.omega_bin)),
    ];
    finish_run(common.echo(), extra, "kernel", &common.out_dir, files, started)
}

// -------------------------------------------------------------------- fit

#[derive(Debug, Clone, clap::Args)]
pub struct FitArgs {
    /// Spacing histogram CSV (s_mid,density,stderr) from a previous run
    #[arg(long, value_name = "FILE")]
    pub hist: Option<PathBuf>,
    /// Lower edge of the fit bracket
    #[arg(long)]
    pub fit_lo: Option<f64>,
    /// Upper edge of the fit bracket
    #[arg(long)]
    pub fit_hi: Option<f64>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Plain-text key=value config file
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

/// Standalone repulsion-period fit on a stored histogram.
pub fn run_fit(args: &FitArgs) -> Result<RunOutput> {
    let started = Instant::now();
    let file = match &args.config {
        Some(p) => KvFile::parse(p)?,
        None => KvFile::default(),
    };
    let hist_path = match args.hist.clone().or(
        file.get::<String>("hist")?.map(PathBuf::from),
    ) {
        Some(p) => p,
        None => bail!(levrep::Error::Config("fit needs --hist FILE".into())),
    };
    let fit_lo = args.fit_lo.or(file.get("fit-lo")?).unwrap_or(0.0);
    let fit_hi = args.fit_hi.or(file.get("fit-hi")?).unwrap_or(0.3);
    let out_dir = match args.out.clone().or(file.get::<String>("out")?.map(PathBuf::from)) {
        Some(p) => p,
        None => PathBuf::from("levrep_out"),
    };
    file.finish()?;

    let text = std::fs::read_to_string(&hist_path)
        .with_context(|| format!("reading {}", hist_path.display()))?;
    let mut mids = Vec::new();
    let mut density = Vec::new();
    let mut stderr = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            continue; // header
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            bail!(levrep::Error::Config(format!(
                "{}:{}: expected 3 columns",
                hist_path.display(),
                i + 1
            )));
        }
        mids.push(cols[0].trim().parse::<f64>()?);
        density.push(cols[1].trim().parse::<f64>()?);
        stderr.push(cols[2].trim().parse::<f64>()?);
    }
    if mids.len() < 2 {
        bail!(levrep::Error::Config("histogram has fewer than 2 bins".into()));
    }
    let width = mids[1] - mids[0];
    let edges: Vec<f64> = (0..=mids.len()).map(|i| mids[0] - width / 2.0 + i as f64 * width).collect();

    let fit = fit_t_min_binned(&edges, &density, &stderr, (fit_lo, fit_hi))?;
    std::fs::create_dir_all(&out_dir)?;
    let report_path = out_dir.join("fit_report.txt");
    std::fs::write(
        &report_path,
        fit_report("repulsion period from stored p(s)", &fit, Some((fit_lo, fit_hi))),
    )?;

    let kv = vec![
        ("hist".to_string(), hist_path.display().to_string()),
        ("fit-lo".to_string(), fmt_f64(fit_lo)),
        ("fit-hi".to_string(), fmt_f64(fit_hi)),
        ("out".to_string(), out_dir.display().to_string()),
    ];
    finish_run(kv, Vec::new(), "fit", &out_dir, vec![report_path], started)
}
