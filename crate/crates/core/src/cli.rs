use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hubbard_dots::par::Execution;
use hubbard_dots::spectral::{DEFAULT_BAND_GAP_TOL, DEFAULT_DEG_TOL};
use hubbard_dots::sweep::{
    crossings, figure_plan, run_sweep, spectrum_table, write_crossings, write_records,
    write_spectrum, FigureId, FigurePlan, Grid, SweepConfig,
};
use hubbard_dots::{Error, Result};

/// Exact diagonalization of a Hubbard chain of quantum dots.
#[derive(Parser, Debug)]
#[command(name = "hubbard-dots", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// All 4^N eigenvalues for every U on the grid.
    Spectrum(Opts),
    /// Pair correlations over a (U, kT) grid.
    Sweep(Opts),
    /// Preconfigured sweep for one figure; flags override its defaults.
    Figure {
        /// One of 1a, 1b, 2a, 2b, 3a, 3b, 3c, 4a, 4b.
        id: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Ground-state multiplicity changes along the U grid.
    Crossings(Opts),
}

#[derive(Args, Debug, Default, Clone)]
pub struct Opts {
    /// Number of dots.
    #[arg(long)]
    pub sites: Option<usize>,
    /// Site pair as `i,j` (1-based).
    #[arg(long)]
    pub pair: Option<String>,
    /// Comma-separated U values.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "u_range")]
    pub u: Option<String>,
    /// Linear U grid as MIN:MAX:STEPS.
    #[arg(long = "u-range")]
    pub u_range: Option<String>,
    /// Comma-separated kT values.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "kt_range")]
    pub kt: Option<String>,
    /// Linear kT grid as MIN:MAX:STEPS.
    #[arg(long = "kt-range")]
    pub kt_range: Option<String>,
    /// Subset of lbc,coherence,mutual_info,entropy (or `all`).
    #[arg(long)]
    pub measures: Option<String>,
    /// Relative tolerance for grouping degenerate levels.
    #[arg(long = "deg-tol")]
    pub deg_tol: Option<f64>,
    /// Ratio a gap must exceed over intra-band spacing to split bands.
    #[arg(long = "band-gap-tol")]
    pub band_gap_tol: Option<f64>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    pub workers: Option<usize>,
    /// TOML file whose keys are flag names; explicit flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn toml_to_string(key: &str, v: &toml::Value) -> Result<String> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        toml::Value::Array(items) => Ok(items
            .iter()
            .map(|x| toml_to_string(key, x))
            .collect::<Result<Vec<_>>>()?
            .join(",")),
        _ => Err(Error::Config(format!(
            "config key '{key}' has an unsupported value type"
        ))),
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{s}' for '{key}'")))
}

impl Opts {
    /// Fills unset options from the config file, if one was given.
    pub fn merged(mut self) -> Result<Opts> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let table: toml::Table = text
            .parse()
            .map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))?;
        let u_set = self.u.is_some() || self.u_range.is_some();
        let kt_set = self.kt.is_some() || self.kt_range.is_some();
        for (key, value) in &table {
            let v = toml_to_string(key, value)?;
            match key.replace('_', "-").as_str() {
                "sites" => {
                    self.sites.get_or_insert(parse_value(key, &v)?);
                }
                "pair" => {
                    self.pair.get_or_insert(v);
                }
                "u" if !u_set => self.u = Some(v),
                "u-range" if !u_set => self.u_range = Some(v),
                "kt" if !kt_set => self.kt = Some(v),
                "kt-range" if !kt_set => self.kt_range = Some(v),
                "u" | "u-range" | "kt" | "kt-range" => {}
                "measures" => {
                    self.measures.get_or_insert(v);
                }
                "deg-tol" => {
                    self.deg_tol.get_or_insert(parse_value(key, &v)?);
                }
                "band-gap-tol" => {
                    self.band_gap_tol.get_or_insert(parse_value(key, &v)?);
                }
                "out" => {
                    self.out.get_or_insert(PathBuf::from(v));
                }
                "workers" => {
                    self.workers.get_or_insert(parse_value(key, &v)?);
                }
                _ => return Err(Error::Config(format!("unknown config key '{key}'"))),
            }
        }
        if self.u.is_some() && self.u_range.is_some() {
            return Err(Error::Config("config sets both 'u' and 'u-range'".into()));
        }
        if self.kt.is_some() && self.kt_range.is_some() {
            return Err(Error::Config("config sets both 'kt' and 'kt-range'".into()));
        }
        Ok(self)
    }

    fn grid(list: &Option<String>, range: &Option<String>) -> Result<Option<Grid>> {
        match (list, range) {
            (Some(l), _) => Grid::parse_list(l).map(Some),
            (None, Some(r)) => Grid::parse_range(r).map(Some),
            (None, None) => Ok(None),
        }
    }

    fn u_grid(&self) -> Result<Option<Grid>> {
        Self::grid(&self.u, &self.u_range)
    }

    fn kt_grid(&self) -> Result<Option<Grid>> {
        Self::grid(&self.kt, &self.kt_range)
    }

    fn require_sites(&self) -> Result<usize> {
        self.sites
            .ok_or_else(|| Error::Config("--sites is required".into()))
    }

    fn require_u(&self) -> Result<Grid> {
        self.u_grid()?
            .ok_or_else(|| Error::Config("one of --u or --u-range is required".into()))
    }

    fn parse_pair(&self) -> Result<Option<(usize, usize)>> {
        let Some(p) = &self.pair else { return Ok(None) };
        let bad = || Error::Config(format!("pair '{p}' must have the form i,j"));
        let (i, j) = p.split_once(',').ok_or_else(bad)?;
        Ok(Some((
            i.trim().parse().map_err(|_| bad())?,
            j.trim().parse().map_err(|_| bad())?,
        )))
    }

    fn execution(&self) -> Result<Execution> {
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        Ok(Execution::from_workers(self.workers))
    }

    /// Applies every option that is set on top of `cfg`.
    fn apply(&self, cfg: &mut SweepConfig) -> Result<()> {
        if let Some(n) = self.sites {
            cfg.n_sites = n;
        }
        if let Some(p) = self.parse_pair()? {
            cfg.pair = p;
        }
        if let Some(u) = self.u_grid()? {
            cfg.u = u;
        }
        if let Some(kt) = self.kt_grid()? {
            cfg.kt = kt;
        }
        if let Some(m) = &self.measures {
            cfg.measures = m.parse()?;
        }
        if let Some(t) = self.deg_tol {
            cfg.deg_tol = t;
        }
        if let Some(t) = self.band_gap_tol {
            cfg.band_gap_tol = t;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        cfg.validate()
    }

    fn sweep_config(&self) -> Result<SweepConfig> {
        let mut cfg = SweepConfig::new(
            self.require_sites()?,
            (1, 2),
            self.require_u()?,
            Grid::Values(vec![0.0]),
        );
        self.apply(&mut cfg)?;
        Ok(cfg)
    }
}

/// Outcome of a command, mapped to the process exit status by `main`.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Every point failed numerically.
    AllFailed,
}

fn with_output(out: &Option<PathBuf>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(create(path)?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(File::create(path)?)
}

fn spectrum(
    n_sites: usize,
    u: &Grid,
    band_gap_tol: f64,
    exec: Execution,
    out: &Option<PathBuf>,
) -> Result<Outcome> {
    let rows = spectrum_table(n_sites, u, band_gap_tol, exec)?;
    with_output(out, |w| write_spectrum(w, &rows))?;
    Ok(Outcome::Success)
}

fn sweep(cfg: &SweepConfig) -> Result<Outcome> {
    let records = run_sweep(cfg)?;
    with_output(&cfg.out, |w| write_records(w, &records))?;
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        eprintln!(
            "warning: {failed} of {} points failed; see the error column",
            records.len()
        );
    }
    Ok(if failed == records.len() {
        Outcome::AllFailed
    } else {
        Outcome::Success
    })
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Spectrum(opts) => {
            let o = opts.merged()?;
            let gap_tol = o.band_gap_tol.unwrap_or(DEFAULT_BAND_GAP_TOL);
            spectrum(
                o.require_sites()?,
                &o.require_u()?,
                gap_tol,
                o.execution()?,
                &o.out,
            )
        }
        Command::Sweep(opts) => sweep(&opts.merged()?.sweep_config()?),
        Command::Figure { id, opts } => {
            let id: FigureId = id.parse()?;
            let o = opts.merged()?;
            match figure_plan(id) {
                FigurePlan::Spectrum { n_sites, u } => {
                    let n = o.sites.unwrap_or(n_sites);
                    let u = o.u_grid()?.unwrap_or(u);
                    spectrum(
                        n,
                        &u,
                        o.band_gap_tol.unwrap_or(DEFAULT_BAND_GAP_TOL),
                        o.execution()?,
                        &o.out,
                    )
                }
                FigurePlan::Sweep(mut cfg) => {
                    o.apply(&mut cfg)?;
                    sweep(&cfg)
                }
            }
        }
        Command::Crossings(opts) => {
            let o = opts.merged()?;
            let n = o.require_sites()?;
            let found = crossings(
                n,
                &o.require_u()?,
                o.deg_tol.unwrap_or(DEFAULT_DEG_TOL),
                o.execution()?,
            )?;
            with_output(&o.out, |w| write_crossings(w, n, &found))?;
            Ok(Outcome::Success)
        }
    }
}
