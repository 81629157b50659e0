//! Parameter sweeps over `(U, kT)`, figure presets and CSV output.
//!
//! One spectrum is computed per `U` value and reused for every `kT` point.
//! `U` values are distributed over workers; records come back in
//! `U`-major, `kT`-minor order whatever the worker count.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fock::{HubbardParams, MAX_SITES};
use crate::measures::{
    coherence, lbc_with, mutual_information, so_generators, von_neumann_entropy, CorrelationRecord,
    GeneratorSet,
};
use crate::par::{self, Execution};
use crate::spectral::{
    cluster_degeneracies, count_bands, crossing_scan, linear_grid, Crossing, Spectrum,
    DEFAULT_BAND_GAP_TOL, DEFAULT_DEG_TOL,
};
use crate::states::reduced_thermal_state;

/// Header of the correlation CSV.
pub const SWEEP_HEADER: [&str; 13] = [
    "n_sites",
    "U",
    "kT",
    "pair_i",
    "pair_j",
    "lbc",
    "coherence",
    "mutual_info",
    "entropy_pair",
    "entropy_i",
    "entropy_j",
    "g0",
    "error",
];
pub const SPECTRUM_HEADER: [&str; 4] = ["U", "level", "energy", "band"];
pub const CROSSINGS_HEADER: [&str; 7] = [
    "n_sites",
    "U_star",
    "bracket_lo",
    "bracket_hi",
    "mult_before",
    "mult_at",
    "mult_after",
];

/// Explicit values or an inclusive linear range.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Values(Vec<f64>),
    Linear { min: f64, max: f64, steps: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Linear { min, max, steps } => linear_grid(*min, *max, *steps),
        }
    }

    /// Comma-separated list, e.g. `0,1.5,3`.
    pub fn parse_list(s: &str) -> Result<Grid> {
        let values = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Config(format!("invalid number '{t}' in list '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Grid::Values(values))
    }

    /// `MIN:MAX:STEPS`.
    pub fn parse_range(s: &str) -> Result<Grid> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || Error::Config(format!("range '{s}' must have the form MIN:MAX:STEPS"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let min = parts[0].parse().map_err(|_| bad())?;
        let max = parts[1].parse().map_err(|_| bad())?;
        let steps = parts[2].parse().map_err(|_| bad())?;
        Ok(Grid::Linear { min, max, steps })
    }

    fn validate(&self, name: &str) -> Result<()> {
        if let Grid::Linear { min, max, steps } = self {
            if *steps < 1 {
                return Err(Error::Config(format!(
                    "{name} range needs at least one step"
                )));
            }
            if max < min {
                return Err(Error::Config(format!(
                    "{name} range must be ascending, got {min}:{max}"
                )));
            }
        }
        let v = self.values();
        if v.is_empty() {
            return Err(Error::Config(format!("{name} grid is empty")));
        }
        if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Config(format!(
                "{name} values must be finite and >= 0"
            )));
        }
        if v.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config(format!("{name} grid must be ascending")));
        }
        Ok(())
    }
}

/// Which correlation columns to fill.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasureSet {
    pub lbc: bool,
    pub coherence: bool,
    pub mutual_info: bool,
    pub entropy: bool,
}

impl MeasureSet {
    pub const ALL: MeasureSet = MeasureSet {
        lbc: true,
        coherence: true,
        mutual_info: true,
        entropy: true,
    };
    pub const NONE: MeasureSet = MeasureSet {
        lbc: false,
        coherence: false,
        mutual_info: false,
        entropy: false,
    };

    pub fn only_lbc() -> Self {
        MeasureSet {
            lbc: true,
            ..Self::NONE
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == Self::NONE
    }
}

impl Default for MeasureSet {
    fn default() -> Self {
        Self::ALL
    }
}

impl FromStr for MeasureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut set = MeasureSet::NONE;
        for name in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match name {
                "lbc" => set.lbc = true,
                "coherence" => set.coherence = true,
                "mutual_info" => set.mutual_info = true,
                "entropy" => set.entropy = true,
                "all" => set = MeasureSet::ALL,
                other => {
                    return Err(Error::Config(format!(
                        "unknown measure '{other}' (expected lbc, coherence, mutual_info, entropy or all)"
                    )))
                }
            }
        }
        if set.is_empty() {
            return Err(Error::Config("at least one measure is required".into()));
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n_sites: usize,
    /// 1-based site labels, `i < j`.
    pub pair: (usize, usize),
    pub u: Grid,
    pub kt: Grid,
    pub measures: MeasureSet,
    pub deg_tol: f64,
    pub band_gap_tol: f64,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl SweepConfig {
    pub fn new(n_sites: usize, pair: (usize, usize), u: Grid, kt: Grid) -> Self {
        SweepConfig {
            n_sites,
            pair,
            u,
            kt,
            measures: MeasureSet::default(),
            deg_tol: DEFAULT_DEG_TOL,
            band_gap_tol: DEFAULT_BAND_GAP_TOL,
            out: None,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_SITES).contains(&self.n_sites) {
            return Err(Error::Config(format!(
                "sites must be in 2..={MAX_SITES} for a pair sweep, got {}",
                self.n_sites
            )));
        }
        let (i, j) = self.pair;
        if !(1 <= i && i < j && j <= self.n_sites) {
            return Err(Error::Config(format!(
                "pair ({i},{j}) must satisfy 1 <= i < j <= {}",
                self.n_sites
            )));
        }
        self.u.validate("U")?;
        self.kt.validate("kT")?;
        if self.measures.is_empty() {
            return Err(Error::Config("at least one measure is required".into()));
        }
        if self.deg_tol.is_nan() || self.deg_tol <= 0.0 {
            return Err(Error::Config(format!(
                "degeneracy tolerance must be > 0, got {}",
                self.deg_tol
            )));
        }
        if self.band_gap_tol.is_nan() || self.band_gap_tol <= 1.0 {
            return Err(Error::Config(format!(
                "band gap tolerance must be > 1, got {}",
                self.band_gap_tol
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        Ok(())
    }

    pub fn execution(&self) -> Execution {
        Execution::from_workers(self.workers)
    }
}

/// Evaluates the requested measures for one `(U, kT)` point from a cached spectrum.
pub fn evaluate_point(
    spec: &Spectrum,
    kt: f64,
    cfg: &SweepConfig,
    gens: &GeneratorSet,
) -> Result<CorrelationRecord> {
    let (i, j) = cfg.pair;
    let mut rec = CorrelationRecord::empty(cfg.n_sites, spec.params.u, kt, cfg.pair);
    let pair = reduced_thermal_state(spec, kt, cfg.deg_tol, &[i - 1, j - 1])?;
    if kt == 0.0 {
        rec.g0 = Some(cluster_degeneracies(spec, cfg.deg_tol).ground_multiplicity());
    }
    let m = cfg.measures;
    if m.lbc {
        rec.lbc = Some(lbc_with(&pair.rho, gens, Execution::Sequential)?.lbc);
    }
    if m.coherence {
        rec.coherence = Some(coherence(&pair.rho));
    }
    if m.mutual_info || m.entropy {
        let site_i = pair.reduce_to(&[i - 1])?;
        let site_j = pair.reduce_to(&[j - 1])?;
        if m.mutual_info {
            rec.mutual_info = Some(mutual_information(&pair, &site_i, &site_j)?);
        }
        if m.entropy {
            rec.entropy_pair = Some(von_neumann_entropy(&pair.rho));
            rec.entropy_i = Some(von_neumann_entropy(&site_i.rho));
            rec.entropy_j = Some(von_neumann_entropy(&site_j.rho));
        }
    }
    Ok(rec)
}

fn sweep_one_u(
    u: f64,
    kts: &[f64],
    cfg: &SweepConfig,
    gens: &GeneratorSet,
) -> Vec<CorrelationRecord> {
    let failed = |kt: f64, e: &Error| {
        let mut r = CorrelationRecord::empty(cfg.n_sites, u, kt, cfg.pair);
        r.error = Some(e.to_string());
        r
    };
    let spec = match HubbardParams::new(cfg.n_sites, u).and_then(|p| Spectrum::solve(&p)) {
        Ok(s) => s,
        Err(e) => return kts.iter().map(|&kt| failed(kt, &e)).collect(),
    };
    kts.iter()
        .map(|&kt| evaluate_point(&spec, kt, cfg, gens).unwrap_or_else(|e| failed(kt, &e)))
        .collect()
}

/// Runs the sweep. Per-point failures are reported in the record's `error`
/// field and do not stop the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<CorrelationRecord>> {
    cfg.validate()?;
    let gens = so_generators(4)?;
    let us = cfg.u.values();
    let kts = cfg.kt.values();
    let rows = par::map(cfg.execution(), &us, |&u| sweep_one_u(u, &kts, cfg, &gens));
    Ok(rows.into_iter().flatten().collect())
}

/// One eigenvalue of the spectrum table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub u: f64,
    pub level: usize,
    pub energy: f64,
    /// Band index from [`count_bands`].
    pub band: usize,
}

/// All `4^N` eigenvalues at every `U` on the grid.
pub fn spectrum_table(
    n_sites: usize,
    u: &Grid,
    band_gap_tol: f64,
    exec: Execution,
) -> Result<Vec<SpectrumRow>> {
    u.validate("U")?;
    let us = u.values();
    let per_u = par::map(exec, &us, |&u| -> Result<Vec<SpectrumRow>> {
        let spec = Spectrum::solve(&HubbardParams::new(n_sites, u)?)?;
        let bands = count_bands(&spec, band_gap_tol)?;
        let band_of: Vec<usize> = bands
            .bands
            .iter()
            .enumerate()
            .flat_map(|(b, band)| std::iter::repeat_n(b, band.levels))
            .collect();
        Ok(spec
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(level, &energy)| SpectrumRow {
                u,
                level,
                energy,
                band: band_of[level],
            })
            .collect())
    });
    let mut out = Vec::new();
    for rows in per_u {
        out.extend(rows?);
    }
    Ok(out)
}

pub fn crossings(n_sites: usize, u: &Grid, deg_tol: f64, exec: Execution) -> Result<Vec<Crossing>> {
    u.validate("U")?;
    crossing_scan(n_sites, 1.0, &u.values(), deg_tol, exec)
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" {
            "0".to_string()
        } else {
            t.to_string()
        }
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

pub fn write_records<W: Write>(out: W, records: &[CorrelationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in records {
        w.write_record([
            r.n_sites.to_string(),
            format_sig(r.u),
            format_sig(r.kt),
            r.pair.0.to_string(),
            r.pair.1.to_string(),
            opt(r.lbc),
            opt(r.coherence),
            opt(r.mutual_info),
            opt(r.entropy_pair),
            opt(r.entropy_i),
            opt(r.entropy_j),
            r.g0.map(|g| g.to_string()).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum<W: Write>(out: W, rows: &[SpectrumRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SPECTRUM_HEADER)?;
    for r in rows {
        w.write_record([
            format_sig(r.u),
            r.level.to_string(),
            format_sig(r.energy),
            r.band.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_crossings<W: Write>(out: W, n_sites: usize, rows: &[Crossing]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CROSSINGS_HEADER)?;
    for c in rows {
        w.write_record([
            n_sites.to_string(),
            format!("{:.7}", c.u_star),
            format_sig(c.bracket.0),
            format_sig(c.bracket.1),
            c.before.to_string(),
            c.at.to_string(),
            c.after.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Figure presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig1a,
    Fig1b,
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig4a,
    Fig4b,
}

impl FigureId {
    pub const ALL: [FigureId; 9] = [
        FigureId::Fig1a,
        FigureId::Fig1b,
        FigureId::Fig2a,
        FigureId::Fig2b,
        FigureId::Fig3a,
        FigureId::Fig3b,
        FigureId::Fig3c,
        FigureId::Fig4a,
        FigureId::Fig4b,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1a => "1a",
            FigureId::Fig1b => "1b",
            FigureId::Fig2a => "2a",
            FigureId::Fig2b => "2b",
            FigureId::Fig3a => "3a",
            FigureId::Fig3b => "3b",
            FigureId::Fig3c => "3c",
            FigureId::Fig4a => "4a",
            FigureId::Fig4b => "4b",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.name() == s.trim())
            .ok_or_else(|| {
                let valid: Vec<&str> = FigureId::ALL.iter().map(|id| id.name()).collect();
                Error::Config(format!(
                    "unknown figure '{s}', valid ids: {}",
                    valid.join(", ")
                ))
            })
    }
}

/// What a figure command computes.
#[derive(Debug, Clone, PartialEq)]
pub enum FigurePlan {
    Spectrum { n_sites: usize, u: Grid },
    Sweep(SweepConfig),
}

const FIGURE_POINTS: usize = 201;

/// Default configuration of each figure.
///
/// * 1a/1b: spectrum vs U on [0, 10] for N = 2, 3
/// * 2a/2b: LBC of pair (1,2) vs U on [0, 10] at kT = 0 for N = 2, 3
/// * 3a/3b: LBC vs kT on [0, 4] for U in {0, 1, 2, 3, 8}, N = 2, 3
/// * 3c: LBC vs kT on [0, 4] for U in {8, 10, 15, 20}, N = 4
/// * 4a: mutual information vs kT on [0, 6], N = 2
/// * 4b: coherence vs kT on [0, 6], N = 3
pub fn figure_plan(id: FigureId) -> FigurePlan {
    let u_axis = Grid::Linear {
        min: 0.0,
        max: 10.0,
        steps: FIGURE_POINTS,
    };
    let small_u = Grid::Values(vec![0.0, 1.0, 2.0, 3.0, 8.0]);
    let zero_t = Grid::Values(vec![0.0]);
    let kt_axis = |max: f64| Grid::Linear {
        min: 0.0,
        max,
        steps: FIGURE_POINTS,
    };
    let sweep = |n: usize, u: Grid, kt: Grid, measures: MeasureSet| {
        let mut cfg = SweepConfig::new(n, (1, 2), u, kt);
        cfg.measures = measures;
        FigurePlan::Sweep(cfg)
    };
    match id {
        FigureId::Fig1a => FigurePlan::Spectrum {
            n_sites: 2,
            u: u_axis,
        },
        FigureId::Fig1b => FigurePlan::Spectrum {
            n_sites: 3,
            u: u_axis,
        },
        FigureId::Fig2a => sweep(2, u_axis, zero_t, MeasureSet::only_lbc()),
        FigureId::Fig2b => sweep(3, u_axis, zero_t, MeasureSet::only_lbc()),
        FigureId::Fig3a => sweep(2, small_u, kt_axis(4.0), MeasureSet::only_lbc()),
        FigureId::Fig3b => sweep(3, small_u, kt_axis(4.0), MeasureSet::only_lbc()),
        FigureId::Fig3c => sweep(
            4,
            Grid::Values(vec![8.0, 10.0, 15.0, 20.0]),
            kt_axis(4.0),
            MeasureSet::only_lbc(),
        ),
        FigureId::Fig4a => sweep(
            2,
            small_u,
            kt_axis(6.0),
            MeasureSet {
                mutual_info: true,
                ..MeasureSet::NONE
            },
        ),
        FigureId::Fig4b => sweep(
            3,
            small_u,
            kt_axis(6.0),
            MeasureSet {
                coherence: true,
                ..MeasureSet::NONE
            },
        ),
    }
}
