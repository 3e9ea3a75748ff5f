//! Bloch-sphere averages of per-input quantities.
//!
//! `(1/4π) ∫ sinθ dθ dφ f(θ, φ)` is evaluated with Gauss–Legendre nodes in
//! `u = cos θ` and a uniform periodic grid in `φ`. Every average is
//! certified by doubling both node counts: the result is accepted once two
//! successive grids agree to the requested tolerance.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hybrid::{decoherence_factor, QubitCoeffs};
use crate::loss::LossParams;
use crate::teleport::{AnalyticContext, Direction, Formula, NumericContext};

/// Best average fidelity reachable without entanglement.
pub const CLASSICAL_LIMIT: f64 = 2.0 / 3.0;

/// Node counts are doubled at most up to this many per axis.
pub const MAX_NODES: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub n_theta: usize,
    pub n_phi: usize,
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            n_theta: 64,
            n_phi: 64,
            tolerance: 1e-9,
        }
    }
}

impl QuadratureSpec {
    pub fn new(n_theta: usize, n_phi: usize, tolerance: f64) -> Result<Self> {
        if n_theta < 8 || n_phi < 8 {
            return Err(Error::InvalidParameter(format!(
                "quadrature needs at least 8 nodes per axis, got {n_theta} x {n_phi}"
            )));
        }
        if n_theta > MAX_NODES || n_phi > MAX_NODES {
            return Err(Error::InvalidParameter(format!("at most {MAX_NODES} nodes per axis")));
        }
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::InvalidParameter(format!("tolerance = {tolerance}")));
        }
        Ok(QuadratureSpec {
            n_theta,
            n_phi,
            tolerance,
        })
    }
}

/// A certified average: `value` on an `n_theta x n_phi` grid, differing by
/// `deviation` from the half-resolution grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Average {
    pub value: f64,
    pub deviation: f64,
    pub n_theta: usize,
    pub n_phi: usize,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// One fixed-grid evaluation of the sphere average. Nodes are evaluated in
/// parallel and summed in a fixed order, so the result does not depend on
/// the thread count.
pub fn sphere_average<F>(n_theta: usize, n_phi: usize, f: F) -> Result<f64>
where
    F: Fn(&QubitCoeffs) -> Result<f64> + Sync,
{
    let (u, wu) = gauss_legendre(n_theta);
    let rows: Vec<f64> = (0..n_theta)
        .into_par_iter()
        .map(|i| {
            let theta = u[i].clamp(-1.0, 1.0).acos();
            let mut acc = 0.0;
            for j in 0..n_phi {
                let phi = std::f64::consts::TAU * j as f64 / n_phi as f64;
                acc += f(&QubitCoeffs::from_bloch(theta, phi)?)?;
            }
            Ok(acc / n_phi as f64)
        })
        .collect::<Result<_>>()?;
    Ok(rows.iter().zip(&wu).map(|(r, w)| r * w).sum::<f64>() / 2.0)
}

/// Doubles the grid from `spec` until two successive results agree to
/// `spec.tolerance`, up to [`MAX_NODES`] per axis.
pub fn certified_average<F>(spec: &QuadratureSpec, f: F) -> Result<Average>
where
    F: Fn(&QubitCoeffs) -> Result<f64> + Sync,
{
    let (mut nt, mut np) = (spec.n_theta, spec.n_phi);
    let mut coarse = sphere_average(nt, np, &f)?;
    loop {
        let (ft, fp) = ((2 * nt).min(MAX_NODES), (2 * np).min(MAX_NODES));
        if (ft, fp) == (nt, np) {
            return Err(Error::NonConvergent {
                coarse,
                fine: coarse,
                nodes: nt,
            });
        }
        let fine = sphere_average(ft, fp, &f)?;
        let deviation = (fine - coarse).abs();
        if deviation < spec.tolerance {
            return Ok(Average {
                value: fine,
                deviation,
                n_theta: ft,
                n_phi: fp,
            });
        }
        if ft == MAX_NODES && fp == MAX_NODES {
            return Err(Error::NonConvergent { coarse, fine, nodes: ft });
        }
        (nt, np, coarse) = (ft, fp, fine);
    }
}

/// Bloch average of the headline fidelity from the analytic pipeline.
pub fn average_fidelity(direction: Direction, alpha: f64, loss: &LossParams, spec: &QuadratureSpec) -> Result<Average> {
    let ctx = AnalyticContext::new(direction, alpha, loss)?;
    certified_average(spec, |q| ctx.raw_fidelity(q))
}

/// Same average from the Fock-space backend (`alpha <= 3`).
pub fn average_fidelity_numeric(
    direction: Direction,
    alpha: f64,
    loss: &LossParams,
    spec: &QuadratureSpec,
) -> Result<Average> {
    let ctx = NumericContext::new(direction, alpha, loss)?;
    certified_average(spec, |q| Ok(ctx.teleport(q)?.raw_fidelity()))
}

/// Bloch average of the per-input success probability.
pub fn average_success(direction: Direction, alpha: f64, loss: &LossParams, spec: &QuadratureSpec) -> Result<Average> {
    let ctx = AnalyticContext::new(direction, alpha, loss)?;
    certified_average(spec, |q| Ok(ctx.teleport(q)?.accepted_probability))
}

/// Published closed-form averages, available for c2s and c2p.
///
/// * c2s printed: `2/3 + (t^2 + 2 t e)/6`, which exceeds 1 at `t = 1`;
///   corrected: `1/2 + (t^2 + 2 t e)/6`.
/// * c2p: `t^2 (2 + e) / 3` for both variants. The printed average already
///   carries the factor-2 cross term missing from the printed per-input
///   fidelity.
pub fn average_fidelity_closed(direction: Direction, alpha: f64, loss: &LossParams, formula: Formula) -> Result<f64> {
    let t = loss.t();
    let e = decoherence_factor(alpha, t);
    match direction {
        Direction::C2S => {
            let constant = match formula {
                Formula::Printed => 2.0 / 3.0,
                Formula::Corrected => 0.5,
            };
            Ok(constant + (t * t + 2.0 * t * e) / 6.0)
        }
        Direction::C2P => Ok(t * t * (2.0 + e) / 3.0),
        d => Err(Error::UnsupportedDirection(d.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_nodes() {
        let (x, w) = gauss_legendre(5);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(x[2].abs() < 1e-15);
        assert!((x[4] - 0.906_179_845_938_664).abs() < 1e-14);
        assert!((w[4] - 0.236_926_885_056_189).abs() < 1e-14);
        // Exact up to degree 2n - 1.
        let (x, w) = gauss_legendre(8);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((m - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn bloch_moments() {
        let p4 = sphere_average(8, 8, |q| Ok(q.p0() * q.p0())).unwrap();
        assert!((p4 - 1.0 / 3.0).abs() < 1e-15);
        let pp = sphere_average(8, 8, |q| Ok(q.p0() * q.p1())).unwrap();
        assert!((pp - 1.0 / 6.0).abs() < 1e-15);
        let re = sphere_average(8, 8, |q| Ok(q.coherence())).unwrap();
        assert!(re.abs() < 1e-15);
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(4, 64, 1e-9).is_err());
        assert!(QuadratureSpec::new(64, 64, 0.0).is_err());
        assert!(QuadratureSpec::new(8, 8, 1e-6).is_ok());
    }

    #[test]
    fn nonconvergent_integrand() {
        let spec = QuadratureSpec::new(512, 512, 1e-12).unwrap();
        // Square-root kink off the equator: algebraic convergence only.
        let err = certified_average(&spec, |q| Ok((q.p0() - 0.35).abs().sqrt())).unwrap_err();
        assert!(matches!(err, Error::NonConvergent { nodes: 1024, .. }));
    }

    #[test]
    fn c2s_quadrature_matches_corrected_average() {
        let spec = QuadratureSpec::default();
        for &(alpha, r) in &[(0.5, 0.0), (1.0, 0.5), (2.0, 0.99), (10.0, 0.25)] {
            let loss = LossParams::from_r(r).unwrap();
            let q = average_fidelity(Direction::C2S, alpha, &loss, &spec).unwrap();
            let c = average_fidelity_closed(Direction::C2S, alpha, &loss, Formula::Corrected).unwrap();
            assert!((q.value - c).abs() < 1e-9, "{alpha} {r}");
        }
        let printed = average_fidelity_closed(Direction::C2S, 1.0, &LossParams::lossless(), Formula::Printed).unwrap();
        assert!((printed - 7.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn c2p_average_value() {
        let loss = LossParams::from_t(0.9).unwrap();
        let closed = average_fidelity_closed(Direction::C2P, 1.0, &loss, Formula::Printed).unwrap();
        assert!((closed - 0.7246).abs() < 1e-4);
        let q = average_fidelity(Direction::C2P, 1.0, &loss, &QuadratureSpec::default()).unwrap();
        assert!((q.value - closed).abs() < 1e-9);
        assert!(average_fidelity_closed(Direction::S2C, 1.0, &loss, Formula::Printed).is_err());
    }

    #[test]
    fn s2c_lossless_average_is_one() {
        let a = average_fidelity(Direction::S2C, 2.0, &LossParams::lossless(), &QuadratureSpec::default()).unwrap();
        assert!((a.value - 1.0).abs() < 1e-9);
        assert!(a.deviation < 1e-9);
    }

    #[test]
    fn s2c_success_average_is_half() {
        let loss = LossParams::from_r(0.7).unwrap();
        let a = average_success(Direction::S2C, 1.0, &loss, &QuadratureSpec::default()).unwrap();
        assert!((a.value - 0.5).abs() < 1e-12);
    }
}
