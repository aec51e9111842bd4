//! Run configuration: defaults, plain-text key=value files, CLI overrides.
//!
//! Precedence (lowest to highest): built-in defaults, `--config FILE`,
//! explicit command-line flags. Manifests written by a run are valid config
//! files, so `levrep <cmd> --config out/manifest.txt` replays a run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use levrep::ensemble::{EnsembleConfig, ParamLaw, System};

/// Full-width-at-half-maximum to standard-deviation ratio of a normal law.
const HWHM_PER_SIGMA: f64 = 1.177_410_022_515_474_7; // sqrt(2 ln 2)

/// How the `*-spread` values are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpreadKind {
    /// Spread is the standard deviation of the normal law (default).
    #[default]
    StdDev,
    /// Spread is the half width at half maximum; converted internally.
    Hwhm,
}

impl std::str::FromStr for SpreadKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stddev" | "std" => Ok(SpreadKind::StdDev),
            "hwhm" => Ok(SpreadKind::Hwhm),
            other => bail!("unknown spread kind '{other}' (expected 'stddev' or 'hwhm')"),
        }
    }
}

impl SpreadKind {
    pub fn name(self) -> &'static str {
        match self {
            SpreadKind::StdDev => "stddev",
            SpreadKind::Hwhm => "hwhm",
        }
    }
}

/// Ensemble options shared by every subcommand, after resolution.
#[derive(Debug, Clone)]
pub struct CommonConfig {
    pub system: System,
    pub energy: f64,
    pub members: u64,
    pub seed: u64,
    pub window: f64,
    pub threads: usize,
    pub out_dir: PathBuf,
    pub alpha_mean: f64,
    pub alpha_spread: f64,
    pub alpha_lower: f64,
    pub alpha_upper: f64,
    pub beta_mean: f64,
    pub beta_spread: f64,
    pub beta_lower: f64,
    pub beta_upper: f64,
    pub spread_kind: SpreadKind,
    pub dump_levels: Option<PathBuf>,
}

impl Default for CommonConfig {
    fn default() -> Self {
        Self {
            system: System::Rectangle,
            energy: 1e4,
            members: 10_000,
            seed: 1,
            window: 100.0,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            out_dir: PathBuf::from("levrep_out"),
            alpha_mean: 1.0,
            alpha_spread: 0.2,
            alpha_lower: 0.5,
            alpha_upper: 2.0,
            beta_mean: 5.0,
            beta_spread: 0.5,
            beta_lower: 3.0,
            beta_upper: 8.0,
            spread_kind: SpreadKind::StdDev,
            dump_levels: None,
        }
    }
}

impl CommonConfig {
    /// The parameter law of the active system, with the spread converted to
    /// a standard deviation if it was given as an HWHM.
    pub fn param_law(&self) -> ParamLaw {
        let (mean, spread, lower_cut, upper_cut) = match self.system {
            System::Rectangle => (
                self.alpha_mean,
                self.alpha_spread,
                self.alpha_lower,
                self.alpha_upper,
            ),
            System::Kepler => (
                self.beta_mean,
                self.beta_spread,
                self.beta_lower,
                self.beta_upper,
            ),
        };
        let spread = match self.spread_kind {
            SpreadKind::StdDev => spread,
            SpreadKind::Hwhm => spread / HWHM_PER_SIGMA,
        };
        ParamLaw {
            mean,
            spread,
            lower_cut,
            upper_cut,
        }
    }

    /// Ensemble description at this configuration's energy.
    pub fn ensemble(&self) -> EnsembleConfig {
        self.ensemble_at(self.energy, self.seed)
    }

    /// Ensemble description at another energy/seed (sweeps), with the
    /// window clamped to the stationarity limit `energy / 10`.
    pub fn ensemble_at(&self, energy: f64, seed: u64) -> EnsembleConfig {
        EnsembleConfig {
            system: self.system,
            energy,
            window_width: self.window.min(energy / 10.0),
            member_count: self.members,
            seed,
            param_law: self.param_law(),
        }
    }

    /// Key=value echo written into manifests; parseable back by
    /// [`KvFile::parse`].
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("system".into(), self.system.name().into()),
            ("energy".into(), fmt_f64(self.energy)),
            ("members".into(), self.members.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("window".into(), fmt_f64(self.window)),
            ("spread-kind".into(), self.spread_kind.name().into()),
        ];
        match self.system {
            System::Rectangle => {
                kv.push(("alpha-mean".into(), fmt_f64(self.alpha_mean)));
                kv.push(("alpha-spread".into(), fmt_f64(self.alpha_spread)));
                kv.push(("alpha-lower".into(), fmt_f64(self.alpha_lower)));
                kv.push(("alpha-upper".into(), fmt_f64(self.alpha_upper)));
            }
            System::Kepler => {
                kv.push(("beta-mean".into(), fmt_f64(self.beta_mean)));
                kv.push(("beta-spread".into(), fmt_f64(self.beta_spread)));
                kv.push(("beta-lower".into(), fmt_f64(self.beta_lower)));
                kv.push(("beta-upper".into(), fmt_f64(self.beta_upper)));
            }
        }
        kv
    }
}

pub fn fmt_f64(x: f64) -> String {
    // round-trippable and compact for human-scale values
    let plain = format!("{x}");
    if plain.parse::<f64>() == Ok(x) {
        plain
    } else {
        format!("{x:.17e}")
    }
}

/// A parsed key=value file (config or manifest body).
#[derive(Debug, Default, Clone)]
pub struct KvFile {
    map: BTreeMap<String, String>,
    consumed: std::cell::RefCell<Vec<String>>,
}

impl KvFile {
    pub fn parse(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!(
                    "{}:{}: expected 'key = value', got '{raw}'",
                    path.display(),
                    lineno + 1
                );
            };
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self {
            map,
            consumed: Default::default(),
        })
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.consumed.borrow_mut().push(key.to_string());
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => match raw.parse::<T>() {
                Ok(v) => Ok(Some(v)),
                Err(e) => bail!("config key '{key}': cannot parse '{raw}': {e}"),
            },
        }
    }

    /// Errors on any key no subcommand asked about — typo protection.
    pub fn finish(&self) -> Result<()> {
        let consumed = self.consumed.borrow();
        for key in self.map.keys() {
            if !consumed.iter().any(|c| c == key) {
                bail!("unknown config key '{key}'");
            }
        }
        Ok(())
    }
}

/// Clap-level flags shared by all subcommands; `None` means "not given".
#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// Plain-text key=value config file (a manifest also works)
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Model system: rect | kepler
    #[arg(long)]
    pub system: Option<String>,
    /// Running energy, units of mean level spacing
    #[arg(long)]
    pub energy: Option<f64>,
    /// Ensemble size
    #[arg(long)]
    pub members: Option<u64>,
    /// Base seed; member i derives from (seed, i) only
    #[arg(long)]
    pub seed: Option<u64>,
    /// Observation window width (clamped to energy/10 for off-energy runs)
    #[arg(long)]
    pub window: Option<f64>,
    /// Worker threads; results are independent of this by construction
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub alpha_mean: Option<f64>,
    #[arg(long)]
    pub alpha_spread: Option<f64>,
    #[arg(long)]
    pub alpha_lower: Option<f64>,
    #[arg(long)]
    pub alpha_upper: Option<f64>,
    #[arg(long)]
    pub beta_mean: Option<f64>,
    #[arg(long)]
    pub beta_spread: Option<f64>,
    #[arg(long)]
    pub beta_lower: Option<f64>,
    #[arg(long)]
    pub beta_upper: Option<f64>,
    /// Interpretation of the spread values: stddev | hwhm
    #[arg(long)]
    pub spread_kind: Option<String>,
    /// Also dump every unfolded level as 'member_id,x' rows (sequential run)
    #[arg(long, value_name = "FILE")]
    pub dump_levels: Option<PathBuf>,
}

impl CommonArgs {
    /// Resolve defaults <- config file <- flags. Returns the config plus the
    /// parsed file for subcommand-specific keys.
    pub fn resolve(&self) -> Result<(CommonConfig, KvFile)> {
        let file = match &self.config {
            Some(p) => KvFile::parse(p)?,
            None => KvFile::default(),
        };
        let mut cfg = CommonConfig::default();
        if let Some(s) = file.get::<String>("system")? {
            cfg.system = s.parse::<System>()?;
        }
        macro_rules! kv {
            ($field:ident, $key:literal) => {
                if let Some(v) = file.get($key)? {
                    cfg.$field = v;
                }
            };
        }
        kv!(energy, "energy");
        kv!(members, "members");
        kv!(seed, "seed");
        kv!(window, "window");
        kv!(threads, "threads");
        kv!(alpha_mean, "alpha-mean");
        kv!(alpha_spread, "alpha-spread");
        kv!(alpha_lower, "alpha-lower");
        kv!(alpha_upper, "alpha-upper");
        kv!(beta_mean, "beta-mean");
        kv!(beta_spread, "beta-spread");
        kv!(beta_lower, "beta-lower");
        kv!(beta_upper, "beta-upper");
        if let Some(s) = file.get::<String>("spread-kind")? {
            cfg.spread_kind = s.parse()?;
        }
        if let Some(s) = file.get::<String>("out")? {
            cfg.out_dir = PathBuf::from(s);
        }

        if let Some(s) = &self.system {
            cfg.system = s.parse::<System>()?;
        }
        macro_rules! flag {
            ($field:ident) => {
                if let Some(v) = self.$field {
                    cfg.$field = v;
                }
            };
        }
        flag!(energy);
        flag!(members);
        flag!(seed);
        flag!(window);
        flag!(threads);
        flag!(alpha_mean);
        flag!(alpha_spread);
        flag!(alpha_lower);
        flag!(alpha_upper);
        flag!(beta_mean);
        flag!(beta_spread);
        flag!(beta_lower);
        flag!(beta_upper);
        if let Some(s) = &self.spread_kind {
            cfg.spread_kind = s.parse()?;
        }
        if let Some(p) = &self.out {
            cfg.out_dir = p.clone();
        }
        cfg.dump_levels = self.dump_levels.clone();
        if cfg.threads == 0 {
            bail!("--threads must be at least 1");
        }
        Ok((cfg, file))
    }
}
