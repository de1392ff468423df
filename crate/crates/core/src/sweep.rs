//! Parameter sweeps over analytic and Monte Carlo outage, with CSV and
//! gnuplot output.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analytic;
use crate::channel::ESTIMATE_VARIANCE_FLOOR;
use crate::config::{db_to_linear, two_user_reference, AccessMode, SystemConfig};
use crate::error::{Error, Result};
use crate::montecarlo::{self, McOptions, OutageSemantics};

pub const CSV_HEADER: &str = "axis,user,mode,op,ci,flags";

/// Smallest Monte Carlo trial count a sweep accepts.
pub const MIN_TRIALS: u64 = 1000;

/// Swept parameter. dB axes are converted to linear when applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    TransmitSnrDb,
    PtDb,
    ItcDb,
    Phi,
    Epsilon,
    Theta,
    Kappa,
}

impl Axis {
    pub const ALL: [Axis; 7] = [
        Axis::TransmitSnrDb,
        Axis::PtDb,
        Axis::ItcDb,
        Axis::Phi,
        Axis::Epsilon,
        Axis::Theta,
        Axis::Kappa,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Axis::TransmitSnrDb => "transmit_snr_db",
            Axis::PtDb => "p_t_db",
            Axis::ItcDb => "i_itc_db",
            Axis::Phi => "phi",
            Axis::Epsilon => "epsilon",
            Axis::Theta => "theta",
            Axis::Kappa => "kappa",
        }
    }

    pub fn apply(&self, config: &mut SystemConfig, value: f64) {
        match self {
            Axis::TransmitSnrDb => *config = config.at_snr(db_to_linear(value)),
            Axis::PtDb => config.p_t = db_to_linear(value),
            Axis::ItcDb => config.i_itc = db_to_linear(value),
            Axis::Phi => config.set_hardware_impairment(value),
            Axis::Epsilon => config.set_sic_residue(value),
            Axis::Theta => config.csi_theta = value,
            Axis::Kappa => config.csi_kappa = value,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownAxis(s.to_owned()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalModes {
    Analytic,
    MonteCarlo,
    Both,
}

impl EvalModes {
    pub fn analytic(&self) -> bool {
        matches!(self, EvalModes::Analytic | EvalModes::Both)
    }

    pub fn montecarlo(&self) -> bool {
        matches!(self, EvalModes::MonteCarlo | EvalModes::Both)
    }
}

impl FromStr for EvalModes {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(EvalModes::Analytic),
            "montecarlo" | "mc" => Ok(EvalModes::MonteCarlo),
            "both" => Ok(EvalModes::Both),
            other => Err(Error::InvalidSweep(format!("unknown evaluation mode `{other}`"))),
        }
    }
}

/// One curve family: a base configuration and the users to report.
#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub config: SystemConfig,
    pub users: Vec<usize>,
}

impl Series {
    pub fn all_users(label: impl Into<String>, config: SystemConfig) -> Self {
        let users = (1..=config.num_users).collect();
        Self {
            label: label.into(),
            config,
            users,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub series: Vec<Series>,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub modes: EvalModes,
    pub trials: u64,
    pub seed: u64,
    pub joint_sic: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.series.is_empty() {
            return Err(Error::InvalidSweep("no series".into()));
        }
        if self.values.is_empty() {
            return Err(Error::InvalidSweep("axis value list is empty".into()));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidSweep(format!("axis value {v} is not finite")));
        }
        if self.modes.montecarlo() && self.trials < MIN_TRIALS {
            return Err(Error::InvalidSweep(format!(
                "need at least {MIN_TRIALS} Monte Carlo trials, got {}",
                self.trials
            )));
        }
        for s in &self.series {
            if s.label.contains([',', ';', '\n', '"']) {
                return Err(Error::InvalidSweep(format!(
                    "series label `{}` contains a reserved character",
                    s.label
                )));
            }
            for &u in &s.users {
                s.config.check_user(u)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowMode {
    Analytic,
    MonteCarlo,
    MonteCarloJoint,
}

impl RowMode {
    pub fn name(&self) -> &'static str {
        match self {
            RowMode::Analytic => "analytic",
            RowMode::MonteCarlo => "montecarlo",
            RowMode::MonteCarloJoint => "montecarlo-joint",
        }
    }
}

impl FromStr for RowMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [RowMode::Analytic, RowMode::MonteCarlo, RowMode::MonteCarloJoint]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

pub const FLAG_BOUNDARY: &str = "boundary";
pub const FLAG_CSI_CLAMPED: &str = "csi-clamped";

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub axis: f64,
    pub user: usize,
    pub mode: RowMode,
    pub op: f64,
    /// Monte Carlo 3-sigma half-width; absent for analytic rows.
    pub ci: Option<f64>,
    pub flags: Vec<String>,
}

impl ResultRow {
    pub fn series(&self) -> Option<&str> {
        self.flags.iter().find_map(|f| f.strip_prefix("series="))
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub axis: Axis,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let ci = r.ci.map(|c| c.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.axis,
                r.user,
                r.mode.name(),
                r.op,
                ci,
                r.flags.join(";")
            );
        }
        out
    }

    pub fn from_csv(text: &str, axis: Axis) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h == CSV_HEADER => {}
            _ => {
                return Err(Error::TableSyntax {
                    line: 1,
                    message: format!("expected header `{CSV_HEADER}`"),
                })
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| Error::TableSyntax { line: i + 1, message };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(bad(format!("expected 6 fields, got {}", fields.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
            rows.push(ResultRow {
                axis: num(fields[0])?,
                user: fields[1].parse().map_err(|e| bad(format!("user: {e}")))?,
                mode: fields[2].parse().map_err(bad)?,
                op: num(fields[3])?,
                ci: if fields[4].is_empty() { None } else { Some(num(fields[4])?) },
                flags: if fields[5].is_empty() {
                    Vec::new()
                } else {
                    fields[5].split(';').map(str::to_owned).collect()
                },
            });
        }
        Ok(Self { axis, rows })
    }

    /// Self-contained gnuplot script: log-scale outage, one curve per
    /// (series, user, mode), data inlined as heredoc blocks.
    pub fn to_plot_script(&self, image_name: &str) -> String {
        type Curve = ((Option<String>, usize, RowMode), Vec<(f64, f64)>);
        let mut groups: Vec<Curve> = Vec::new();
        for r in &self.rows {
            let key = (r.series().map(str::to_owned), r.user, r.mode);
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, pts)) => pts.push((r.axis, r.op)),
                None => groups.push((key, vec![(r.axis, r.op)])),
            }
        }
        let mut s = String::new();
        s.push_str("# gnuplot script; run with `gnuplot <this file>`\n");
        let _ = writeln!(s, "set terminal pngcairo size 1000,700");
        let _ = writeln!(s, "set output '{image_name}'");
        s.push_str("set logscale y\nset format y '10^{%L}'\nset yrange [1e-4:1.2]\n");
        let _ = writeln!(s, "set xlabel '{}'", self.axis);
        s.push_str("set ylabel 'outage probability'\nset key outside right\nset grid\n");
        for (i, (_, pts)) in groups.iter().enumerate() {
            let _ = writeln!(s, "$s{i} << EOD");
            for (x, y) in pts {
                let _ = writeln!(s, "{x} {y}");
            }
            s.push_str("EOD\n");
        }
        s.push_str("plot ");
        for (i, ((series, user, mode), _)) in groups.iter().enumerate() {
            if i > 0 {
                s.push_str(", \\\n     ");
            }
            let style = match mode {
                RowMode::Analytic => "lines",
                _ => "points",
            };
            let title = match series {
                Some(label) => format!("U{user} {} {label}", mode.name()),
                None => format!("U{user} {}", mode.name()),
            };
            let _ = write!(s, "$s{i} using 1:2 with {style} title '{title}'");
        }
        s.push('\n');
        s
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<()> {
    if table.rows.is_empty() {
        return Err(Error::InvalidSweep("refusing to write an empty table".into()));
    }
    write_file(path, &table.to_csv())
}

pub fn emit_plot_script(table: &ResultTable, path: &Path) -> Result<()> {
    if table.rows.is_empty() {
        return Err(Error::InvalidSweep("refusing to plot an empty table".into()));
    }
    let image = path.with_extension("png");
    let image = image.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    write_file(path, &table.to_plot_script(&image))
}

fn point_rows(spec: &SweepSpec, series: &Series, value: f64) -> Result<Vec<ResultRow>> {
    let mut config = series.config.clone();
    spec.axis.apply(&mut config, value);
    let config = config.validated()?;
    let rho = config.transmit_snr();
    let clamped = config.csi_error_variance(rho) > 1.0 - ESTIMATE_VARIANCE_FLOOR;

    let base_flags = || {
        let mut f = Vec::new();
        if !series.label.is_empty() {
            f.push(format!("series={}", series.label));
        }
        if clamped {
            f.push(FLAG_CSI_CLAMPED.to_owned());
        }
        f
    };

    let mc = if spec.modes.montecarlo() {
        let opts = McOptions {
            trials: spec.trials,
            seed: spec.seed,
            joint_sic: spec.joint_sic,
        };
        montecarlo::estimate_outage(&config, rho, opts)?
    } else {
        Vec::new()
    };

    let mut rows = Vec::new();
    for &user in &series.users {
        if spec.modes.analytic() {
            let b = analytic::outage_breakdown(&config, user, rho)?;
            let mut flags = base_flags();
            if b.boundary {
                flags.push(FLAG_BOUNDARY.to_owned());
            }
            rows.push(ResultRow {
                axis: value,
                user,
                mode: RowMode::Analytic,
                op: b.outage,
                ci: None,
                flags,
            });
        }
        for r in mc.iter().filter(|r| r.user == user) {
            rows.push(ResultRow {
                axis: value,
                user,
                mode: match r.semantics {
                    OutageSemantics::PerLayer => RowMode::MonteCarlo,
                    OutageSemantics::JointSic => RowMode::MonteCarloJoint,
                },
                op: r.empirical_op,
                ci: Some(r.ci_halfwidth),
                flags: base_flags(),
            });
        }
    }
    Ok(rows)
}

/// Evaluates every (series, value) point; rows come out in series/value order
/// whatever order the workers finish in.
pub fn run_sweep(spec: &SweepSpec) -> Result<ResultTable> {
    run_sweep_with_progress(spec, |_, _| {})
}

/// [`run_sweep`] calling `progress(done, total)` as points complete.
pub fn run_sweep_with_progress<F>(spec: &SweepSpec, progress: F) -> Result<ResultTable>
where
    F: Fn(usize, usize) + Sync,
{
    spec.validate()?;
    let points: Vec<(&Series, f64)> = spec
        .series
        .iter()
        .flat_map(|s| spec.values.iter().map(move |&v| (s, v)))
        .collect();
    let total = points.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let chunks = points
        .par_iter()
        .map(|&(series, value)| {
            let rows = point_rows(spec, series, value);
            let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
            progress(n, total);
            rows
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResultTable {
        axis: spec.axis,
        rows: chunks.into_iter().flatten().collect(),
    })
}

/// A figure-reproduction sweep: several series over one axis.
#[derive(Clone, Debug)]
pub struct FigurePreset {
    pub name: &'static str,
    pub description: &'static str,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub series: Vec<Series>,
}

impl FigurePreset {
    pub fn sweep(&self, modes: EvalModes, trials: u64, seed: u64) -> SweepSpec {
        SweepSpec {
            series: self.series.clone(),
            axis: self.axis,
            values: self.values.clone(),
            modes,
            trials,
            seed,
            joint_sic: false,
        }
    }
}

fn snr_grid(step: f64) -> Vec<f64> {
    let n = (40.0 / step).round() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

fn with_mode(mut c: SystemConfig, mode: AccessMode) -> SystemConfig {
    c.mode = mode;
    c
}

/// OP versus transmit SNR for NOMA and the OMA baseline, ideal hardware,
/// SIC and CSI, with and without the 20 dB ITC and three primary levels.
fn figure2() -> FigurePreset {
    let mut series = Vec::new();
    for mode in [AccessMode::Noma, AccessMode::Oma] {
        for (itc_label, itc) in [("20dB", db_to_linear(20.0)), ("inf", f64::INFINITY)] {
            for (pt_label, p_t) in [("off", 0.0), ("10dB", db_to_linear(10.0)), ("25dB", db_to_linear(25.0))] {
                let mut c = with_mode(two_user_reference(), mode);
                c.i_itc = itc;
                c.p_t = p_t;
                series.push(Series::all_users(format!("{mode}/itc={itc_label}/pt={pt_label}"), c));
            }
        }
    }
    FigurePreset {
        name: "fig2",
        description: "OP vs transmit SNR, NOMA and OMA, ideal impairments; ITC 20 dB or none; primary power off, 10 dB, 25 dB",
        axis: Axis::TransmitSnrDb,
        values: snr_grid(2.0),
        series,
    }
}

/// OP versus transmit SNR under imperfect SIC and hardware impairments,
/// P_T = 10 dB, no ITC, perfect CSI.
fn figure3() -> FigurePreset {
    let base = || {
        let mut c = two_user_reference();
        c.p_t = db_to_linear(10.0);
        c
    };
    let mut series = Vec::new();
    series.push(Series::all_users("noma/perfect", base()));
    for eps in [0.005, 0.03] {
        let mut c = base();
        c.set_sic_residue(eps);
        series.push(Series::all_users(format!("noma/eps={eps}"), c));
    }
    for mode in [AccessMode::Noma, AccessMode::Oma] {
        for phi in [0.1, 0.15] {
            let mut c = with_mode(base(), mode);
            c.set_hardware_impairment(phi);
            series.push(Series::all_users(format!("{mode}/phi={phi}"), c));
        }
    }
    series.push(Series::all_users("oma/perfect", with_mode(base(), AccessMode::Oma)));
    FigurePreset {
        name: "fig3",
        description: "OP vs transmit SNR with imperfect SIC (0.005, 0.03) and hardware impairments (0.1, 0.15); P_T = 10 dB, no ITC, perfect CSI",
        axis: Axis::TransmitSnrDb,
        values: snr_grid(2.0),
        series,
    }
}

/// U1 OP versus transmit SNR for several channel-estimation regimes,
/// P_T = 10 dB, no ITC, ideal hardware and SIC.
fn figure4() -> FigurePreset {
    let mut series = Vec::new();
    for mode in [AccessMode::Noma, AccessMode::Oma] {
        let regimes: [(&str, f64, f64); 5] = [
            ("perfect", 0.0, 0.0),
            ("theta=0.001", 0.001, 0.0),
            ("theta=0.01", 0.01, 0.0),
            ("theta=0.1", 0.1, 0.0),
            ("theta=10/kappa=1.5", 10.0, 1.5),
        ];
        for (label, theta, kappa) in regimes {
            let mut c = with_mode(two_user_reference(), mode);
            c.p_t = db_to_linear(10.0);
            c.csi_theta = theta;
            c.csi_kappa = kappa;
            series.push(Series {
                label: format!("{mode}/{label}"),
                config: c,
                users: vec![1],
            });
        }
    }
    FigurePreset {
        name: "fig4",
        description: "U1 OP vs transmit SNR under CSI error theta*rho^-kappa; P_T = 10 dB, no ITC, ideal hardware and SIC",
        axis: Axis::TransmitSnrDb,
        values: snr_grid(2.0),
        series,
    }
}

pub fn figure_presets() -> Vec<FigurePreset> {
    vec![figure2(), figure3(), figure4()]
}

pub fn figure_preset(name: &str) -> Result<FigurePreset> {
    figure_presets()
        .into_iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::UnknownPreset(name.to_owned()))
}
