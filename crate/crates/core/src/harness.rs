//! Sweeps, verification runs and single-point reports behind the CLI.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::averaging::{
    average_fidelity, average_fidelity_closed, average_fidelity_numeric, gauss_legendre, Average, QuadratureSpec,
};
use crate::bell::OutcomeKind;
use crate::error::{Error, Result};
use crate::fock::{cutoff_for, DensityMatrix, FockState, ModeIndex, Shape, NUMERIC_ALPHA_MAX};
use crate::hybrid::{gram_overlap, ChannelState, Materialize, QubitCoeffs};
use crate::loss::{kraus_loss, LossParams};
use crate::teleport::{
    fidelity_closed_form, success_prob, teleport, Backend, Direction, Formula, NumericContext, TeleportResult,
};

/// Largest allowed disagreement between the two backends in a sweep.
pub const BACKEND_AGREEMENT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendPolicy {
    Analytic,
    Numeric,
    Both,
}

impl FromStr for BackendPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "analytic" => Ok(BackendPolicy::Analytic),
            "numeric" => Ok(BackendPolicy::Numeric),
            "both" => Ok(BackendPolicy::Both),
            _ => Err(Error::InvalidParameter(format!(
                "unknown backend {s:?} (expected analytic, numeric or both)"
            ))),
        }
    }
}

impl fmt::Display for BackendPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendPolicy::Analytic => "analytic",
            BackendPolicy::Numeric => "numeric",
            BackendPolicy::Both => "both",
        })
    }
}

/// Figure presets: fig1/fig2 compare s2c with c2s (fidelity and success
/// probability), fig3/fig4 add the polarization directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            _ => Err(Error::InvalidParameter(format!("unknown preset {s:?} (expected fig1..fig4)"))),
        }
    }
}

pub const PRESET_ALPHAS: [f64; 4] = [0.5, 1.0, 2.0, 10.0];
pub const PRESET_R_MAX: f64 = 0.999;
pub const PRESET_R_STEPS: usize = 201;

/// `steps` evenly spaced values from `min` to `max` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RGrid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl RGrid {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        if !(0.0 <= min && min <= max && max < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "r grid [{min}, {max}] must satisfy 0 <= min <= max < 1"
            )));
        }
        if steps < 2 {
            return Err(Error::InvalidParameter(format!("r grid needs at least 2 steps, got {steps}")));
        }
        Ok(RGrid { min, max, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.max } else { self.min + h * i as f64 })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepConfig {
    pub directions: Vec<Direction>,
    pub alphas: Vec<f64>,
    pub r: RGrid,
    pub quadrature: QuadratureSpec,
    pub backend: BackendPolicy,
}

impl SweepConfig {
    pub fn preset(p: Preset) -> Self {
        let directions = match p {
            Preset::Fig1 | Preset::Fig2 => vec![Direction::S2C, Direction::C2S],
            Preset::Fig3 | Preset::Fig4 => Direction::ALL.to_vec(),
        };
        SweepConfig {
            directions,
            alphas: PRESET_ALPHAS.to_vec(),
            r: RGrid {
                min: 0.0,
                max: PRESET_R_MAX,
                steps: PRESET_R_STEPS,
            },
            quadrature: QuadratureSpec::default(),
            backend: BackendPolicy::Analytic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.directions.is_empty() || self.alphas.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one direction and one alpha".into()));
        }
        for &a in &self.alphas {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidParameter(format!("alpha = {a} must be positive")));
            }
            if self.backend == BackendPolicy::Numeric && a > NUMERIC_ALPHA_MAX {
                return Err(Error::BackendOverflow {
                    alpha: a,
                    max: NUMERIC_ALPHA_MAX,
                });
            }
        }
        RGrid::new(self.r.min, self.r.max, self.r.steps)?;
        QuadratureSpec::new(self.quadrature.n_theta, self.quadrature.n_phi, self.quadrature.tolerance)?;
        Ok(())
    }

    /// Grid points in output order: direction, then alpha, then ascending r.
    pub fn points(&self) -> Vec<(Direction, f64, f64)> {
        let rs = self.r.values();
        let mut out = Vec::with_capacity(self.directions.len() * self.alphas.len() * rs.len());
        for &d in &self.directions {
            for &a in &self.alphas {
                for &r in &rs {
                    out.push((d, a, r));
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvergenceFlag {
    Ok,
    /// Node doubling did not settle; the finest estimate is reported.
    NonConvergent,
    /// The two backends disagree by more than [`BACKEND_AGREEMENT`].
    Mismatch,
    /// The success probability is an analytic limit.
    Limit,
}

impl fmt::Display for ConvergenceFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConvergenceFlag::Ok => "ok",
            ConvergenceFlag::NonConvergent => "nonconvergent",
            ConvergenceFlag::Mismatch => "mismatch",
            ConvergenceFlag::Limit => "limit",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub direction: Direction,
    pub alpha: f64,
    pub r: f64,
    pub t: f64,
    pub avg_fidelity: f64,
    pub avg_fidelity_closed_printed: Option<f64>,
    pub avg_fidelity_closed_corrected: Option<f64>,
    pub success_probability: f64,
    pub backend: String,
    pub convergence_flag: ConvergenceFlag,
}

pub const CSV_HEADER: [&str; 10] = [
    "direction",
    "alpha",
    "r",
    "t",
    "avg_fidelity",
    "avg_fidelity_closed_printed",
    "avg_fidelity_closed_corrected",
    "success_probability",
    "backend",
    "convergence_flag",
];

/// Finest estimate, and whether it is certified.
fn settle(avg: Result<Average>) -> Result<(f64, bool)> {
    match avg {
        Ok(a) => Ok((a.value, true)),
        Err(Error::NonConvergent { fine, .. }) => Ok((fine, false)),
        Err(e) => Err(e),
    }
}

pub fn sweep_point(direction: Direction, alpha: f64, r: f64, cfg: &SweepConfig) -> Result<SweepRecord> {
    let loss = LossParams::from_r(r)?;
    let spec = &cfg.quadrature;
    let numeric_ok = alpha <= NUMERIC_ALPHA_MAX;
    let (avg, converged, backend, mismatch) = match cfg.backend {
        BackendPolicy::Analytic => {
            let (v, c) = settle(average_fidelity(direction, alpha, &loss, spec))?;
            (v, c, "analytic", false)
        }
        BackendPolicy::Numeric => {
            let (v, c) = settle(average_fidelity_numeric(direction, alpha, &loss, spec))?;
            (v, c, "numeric", false)
        }
        BackendPolicy::Both if numeric_ok => {
            let (va, ca) = settle(average_fidelity(direction, alpha, &loss, spec))?;
            let (vn, cn) = settle(average_fidelity_numeric(direction, alpha, &loss, spec))?;
            (va, ca && cn, "both", (va - vn).abs() > BACKEND_AGREEMENT)
        }
        BackendPolicy::Both => {
            let (v, c) = settle(average_fidelity(direction, alpha, &loss, spec))?;
            (v, c, "analytic", false)
        }
    };
    let sp = success_prob(direction, alpha, &loss);
    let flag = if !converged {
        ConvergenceFlag::NonConvergent
    } else if mismatch {
        ConvergenceFlag::Mismatch
    } else if sp.limit {
        ConvergenceFlag::Limit
    } else {
        ConvergenceFlag::Ok
    };
    Ok(SweepRecord {
        direction,
        alpha,
        r,
        t: loss.t(),
        avg_fidelity: avg,
        avg_fidelity_closed_printed: average_fidelity_closed(direction, alpha, &loss, Formula::Printed).ok(),
        avg_fidelity_closed_corrected: average_fidelity_closed(direction, alpha, &loss, Formula::Corrected).ok(),
        success_probability: sp.value,
        backend: backend.to_string(),
        convergence_flag: flag,
    })
}

/// Evaluates every grid point (in parallel) and returns the records in
/// [`SweepConfig::points`] order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    cfg.points()
        .into_par_iter()
        .map(|(d, a, r)| sweep_point(d, a, r, cfg))
        .collect()
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros
/// trimmed, exponent form only for very large or small magnitudes.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{}{:02}", trim_zeros(mant), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for rec in records {
        w.write_record([
            rec.direction.label().to_string(),
            format_sig(rec.alpha),
            format_sig(rec.r),
            format_sig(rec.t),
            format_sig(rec.avg_fidelity),
            opt(rec.avg_fidelity_closed_printed),
            opt(rec.avg_fidelity_closed_corrected),
            format_sig(rec.success_probability),
            rec.backend.clone(),
            rec.convergence_flag.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_csv(cfg: &SweepConfig) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&run_sweep(cfg)?, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

// ---------------------------------------------------------------------------
// Verification

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// A published expression disagrees with the simulation; reported, not
    /// fatal.
    Flag,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Flag => "FLAG",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub grid_size: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub note: String,
}

impl Check {
    fn new(name: &str, devs: &[f64], tolerance: f64, on_excess: Verdict, note: impl Into<String>) -> Check {
        let max_deviation = devs.iter().copied().fold(0.0, f64::max);
        let bad = devs.iter().any(|d| !(d.is_finite() && *d <= tolerance));
        Check {
            name: name.to_string(),
            grid_size: devs.len(),
            max_deviation,
            tolerance,
            verdict: if bad { on_excess } else { Verdict::Pass },
            note: note.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<34} grid={:<5} max_dev={:<10.3e} tol={:<8.1e} {}",
            self.name, self.grid_size, self.max_deviation, self.tolerance, self.verdict
        )?;
        if !self.note.is_empty() {
            write!(f, "  {}", self.note)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    /// No check failed (flags are allowed).
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

pub const DEFAULT_VERIFY_ALPHAS: [f64; 3] = [0.5, 1.0, 2.0];
pub const DEFAULT_VERIFY_RS: [f64; 4] = [0.0, 0.3, 0.6, 0.9];

/// Bloch inputs for per-input comparisons: Gauss nodes in `cos θ`, uniform
/// `φ`, plus both poles.
pub fn bloch_grid(n_theta: usize, n_phi: usize) -> Vec<QubitCoeffs> {
    let (u, _) = gauss_legendre(n_theta);
    let mut out = vec![QubitCoeffs::zero(), QubitCoeffs::one()];
    for &ui in &u {
        for j in 0..n_phi {
            let phi = std::f64::consts::TAU * j as f64 / n_phi as f64;
            out.push(QubitCoeffs::from_bloch(ui.acos(), phi).expect("in range"));
        }
    }
    out
}

/// Trace distance between the closed-form lossy channel and the Kraus
/// evolution of the lossless channel state.
pub fn channel_equivalence(alpha: f64, t: f64) -> Result<f64> {
    let cutoff = cutoff_for(alpha);
    let s = Shape::single(2);
    let pure = FockState::basis(s.clone(), &[0])?
        .tensor(&crate::fock::coherent_state(alpha, cutoff)?)
        .plus(&FockState::basis(s, &[1])?.tensor(&crate::fock::coherent_state(-alpha, cutoff)?))?
        .scaled(num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
    let loss = LossParams::from_t(t)?;
    let evolved: DensityMatrix = kraus_loss(&pure.projector(), &loss, &[ModeIndex(0), ModeIndex(1)])?;
    ChannelState::new(alpha, t)?.materialize(cutoff)?.trace_distance(&evolved)
}

/// Mean accepted probability over the two basis inputs, i.e. for the
/// maximally mixed coherent-basis input.
fn pole_success(ctx: &NumericContext) -> Result<f64> {
    let p0 = ctx.teleport(&QubitCoeffs::zero())?.accepted_probability;
    let p1 = ctx.teleport(&QubitCoeffs::one())?.accepted_probability;
    Ok((p0 + p1) / 2.0)
}

/// Runs every equivalence and audit check over `alphas x rs`. Numeric legs
/// only use the alphas the Fock backend supports.
pub fn run_verify(alphas: &[f64], rs: &[f64], spec: &QuadratureSpec) -> Result<VerifyReport> {
    for &a in alphas {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha = {a} must be positive")));
        }
    }
    let losses: Vec<LossParams> = rs.iter().map(|&r| LossParams::from_r(r)).collect::<Result<_>>()?;
    let grid: Vec<(f64, LossParams)> = alphas.iter().flat_map(|&a| losses.iter().map(move |l| (a, *l))).collect();
    let numeric_grid: Vec<(f64, LossParams)> =
        grid.iter().copied().filter(|(a, _)| *a <= NUMERIC_ALPHA_MAX).collect();
    let inputs = bloch_grid(4, 4);
    let mut checks = Vec::new();

    let devs: Vec<f64> = numeric_grid
        .par_iter()
        .map(|(a, l)| channel_equivalence(*a, l.t()))
        .collect::<Result<_>>()?;
    checks.push(Check::new("channel_equivalence", &devs, 1e-10, Verdict::Fail, "trace distance"));

    for d in Direction::ALL {
        let devs: Vec<f64> = numeric_grid
            .par_iter()
            .map(|(a, l)| -> Result<Vec<f64>> {
                let ctx = NumericContext::new(d, *a, l)?;
                inputs
                    .iter()
                    .map(|q| {
                        let n = ctx.teleport(q)?;
                        let an = teleport(d, q, *a, l, Backend::Analytic)?;
                        Ok(result_deviation(&n, &an))
                    })
                    .collect()
            })
            .collect::<Result<Vec<_>>>()?
            .concat();
        checks.push(Check::new(&format!("{d}_analytic_vs_numeric"), &devs, 1e-8, Verdict::Fail, ""));
    }

    for d in Direction::ALL {
        for formula in [Formula::Printed, Formula::Corrected] {
            let devs: Vec<f64> = grid
                .iter()
                .flat_map(|(a, l)| inputs.iter().map(move |q| (a, l, q)))
                .map(|(a, l, q)| {
                    let an = teleport(d, q, *a, l, Backend::Analytic)?.raw_fidelity();
                    Ok((fidelity_closed_form(d, q, *a, l, formula) - an).abs())
                })
                .collect::<Result<_>>()?;
            let (name, on_excess) = match formula {
                Formula::Printed => (format!("{d}_closed_form_printed"), Verdict::Flag),
                Formula::Corrected => (format!("{d}_closed_form_corrected"), Verdict::Fail),
            };
            checks.push(Check::new(&name, &devs, 1e-10, on_excess, ""));
        }
    }

    let averages: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|(a, l)| {
            let s2c = settle(average_fidelity(Direction::S2C, *a, l, spec))?.0;
            let c2s = settle(average_fidelity(Direction::C2S, *a, l, spec))?.0;
            let c2p = settle(average_fidelity(Direction::C2P, *a, l, spec))?.0;
            Ok((s2c, c2s, c2p))
        })
        .collect::<Result<_>>()?;

    let devs: Vec<f64> = grid
        .iter()
        .zip(&averages)
        .map(|((a, l), avg)| Ok((average_fidelity_closed(Direction::C2S, *a, l, Formula::Corrected)? - avg.1).abs()))
        .collect::<Result<_>>()?;
    checks.push(Check::new("c2s_average_closed_corrected", &devs, 1e-9, Verdict::Fail, ""));
    let devs: Vec<f64> = grid
        .iter()
        .zip(&averages)
        .map(|((a, l), avg)| Ok((average_fidelity_closed(Direction::C2S, *a, l, Formula::Printed)? - avg.1).abs()))
        .collect::<Result<_>>()?;
    let lossless = average_fidelity_closed(Direction::C2S, 1.0, &LossParams::lossless(), Formula::Printed)?;
    checks.push(Check::new(
        "c2s_average_closed_printed",
        &devs,
        1e-9,
        Verdict::Flag,
        format!("printed constant 2/3 gives {} at r=0, above the fidelity bound", format_sig(lossless)),
    ));
    let devs: Vec<f64> = grid
        .iter()
        .zip(&averages)
        .map(|((a, l), avg)| Ok((average_fidelity_closed(Direction::C2P, *a, l, Formula::Printed)? - avg.2).abs()))
        .collect::<Result<_>>()?;
    checks.push(Check::new("c2p_average_closed", &devs, 1e-9, Verdict::Fail, ""));

    let devs: Vec<f64> = averages.iter().map(|(s2c, c2s, _)| (c2s - s2c).max(0.0)).collect();
    checks.push(Check::new("dominance_s2c_over_c2s", &devs, 1e-12, Verdict::Fail, "max(F_c2s - F_s2c, 0)"));

    let devs: Vec<f64> = numeric_grid
        .par_iter()
        .map(|(a, l)| Ok((pole_success(&NumericContext::new(Direction::S2C, *a, l)?)? - 0.5).abs()))
        .collect::<Result<_>>()?;
    checks.push(Check::new("s2c_success_accounting", &devs, 1e-9, Verdict::Fail, ""));
    let devs: Vec<f64> = numeric_grid
        .par_iter()
        .map(|(a, l)| {
            let p = pole_success(&NumericContext::new(Direction::C2S, *a, l)?)?;
            Ok((p - success_prob(Direction::C2S, *a, l).value).abs())
        })
        .collect::<Result<_>>()?;
    checks.push(Check::new("c2s_success_accounting", &devs, 1e-9, Verdict::Fail, ""));
    let devs: Vec<f64> = numeric_grid
        .par_iter()
        .map(|(a, l)| {
            let res = NumericContext::new(Direction::C2S, *a, l)?.teleport(&QubitCoeffs::zero())?;
            let fail = res.outcome(OutcomeKind::Fail).map_or(0.0, |o| o.probability);
            Ok((fail - gram_overlap(a * l.t())).abs())
        })
        .collect::<Result<_>>()?;
    checks.push(Check::new("coherent_fail_probability", &devs, 1e-8, Verdict::Fail, "basis input"));

    Ok(VerifyReport { checks })
}

/// Largest difference in any outcome probability or available fidelity.
fn result_deviation(a: &TeleportResult, b: &TeleportResult) -> f64 {
    let mut dev = (a.raw_fidelity() - b.raw_fidelity()).abs();
    if a.outcome_breakdown.len() != b.outcome_breakdown.len() {
        return f64::INFINITY;
    }
    for (x, y) in a.outcome_breakdown.iter().zip(&b.outcome_breakdown) {
        dev = dev.max((x.probability - y.probability).abs());
        if let (Some(fx), Some(fy)) = (x.fidelity, y.fidelity) {
            if x.probability.min(y.probability) > 1e-8 {
                dev = dev.max((fx - fy).abs());
            }
        }
    }
    dev
}

// ---------------------------------------------------------------------------
// Single points

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointReport {
    #[serde(flatten)]
    pub result: TeleportResult,
    pub fidelity_closed_printed: f64,
    pub fidelity_closed_corrected: f64,
}

pub fn run_point(
    direction: Direction,
    theta: f64,
    phi: f64,
    alpha: f64,
    r: f64,
    backend: Backend,
) -> Result<PointReport> {
    let q = QubitCoeffs::from_bloch(theta, phi)?;
    let loss = LossParams::from_r(r)?;
    Ok(PointReport {
        result: teleport(direction, &q, alpha, &loss, backend)?,
        fidelity_closed_printed: fidelity_closed_form(direction, &q, alpha, &loss, Formula::Printed),
        fidelity_closed_corrected: fidelity_closed_form(direction, &q, alpha, &loss, Formula::Corrected),
    })
}
