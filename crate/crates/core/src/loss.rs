//! Zero-temperature photon loss (amplitude damping).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, ModeIndex};
use crate::hybrid::ChannelState;

/// Loss strength: amplitude decay `t = exp(-gamma tau / 2)` and normalized
/// time `r = sqrt(1 - t^2)`. Whichever was given is stored exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LossParams {
    t: f64,
    r: f64,
    gamma_tau: Option<f64>,
}

impl LossParams {
    pub fn from_t(t: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidParameter(format!("t = {t} outside (0, 1]")));
        }
        Ok(LossParams {
            t,
            r: ((1.0 - t) * (1.0 + t)).sqrt(),
            gamma_tau: None,
        })
    }

    pub fn from_r(r: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::InvalidParameter(format!("r = {r} outside [0, 1)")));
        }
        let mut p = Self::from_t(((1.0 - r) * (1.0 + r)).sqrt())?;
        p.r = r;
        Ok(p)
    }

    pub fn from_gamma_tau(gamma_tau: f64) -> Result<Self> {
        if !(gamma_tau >= 0.0 && gamma_tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma*tau = {gamma_tau}")));
        }
        let mut p = Self::from_t((-gamma_tau / 2.0).exp())?;
        p.gamma_tau = Some(gamma_tau);
        Ok(p)
    }

    pub fn lossless() -> Self {
        LossParams {
            t: 1.0,
            r: 0.0,
            gamma_tau: None,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn gamma_tau(&self) -> Option<f64> {
        self.gamma_tau
    }

    /// Loss `t1` followed by loss `t2` is loss `t1 * t2`.
    pub fn then(&self, other: &LossParams) -> Result<Self> {
        Self::from_t(self.t * other.t)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Kraus operators `E_k` on a mode of the given cutoff, `k = 0..cutoff`:
/// `<n-k|E_k|n> = sqrt(C(n,k)) t^(n-k) (1-t^2)^(k/2)`.
pub fn kraus_operators(p: &LossParams, cutoff: usize) -> Vec<DMatrix<Complex64>> {
    let (t, r) = (p.t, p.r);
    (0..cutoff)
        .map(|k| {
            let mut e = DMatrix::zeros(cutoff, cutoff);
            for n in k..cutoff {
                let v = binomial(n, k).sqrt() * t.powi((n - k) as i32) * r.powi(k as i32);
                e[(n - k, n)] = Complex64::new(v, 0.0);
            }
            e
        })
        .collect()
}

/// Applies the same loss to every listed mode.
pub fn kraus_loss(rho: &DensityMatrix, p: &LossParams, modes: &[ModeIndex]) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    for &m in modes {
        let ops = kraus_operators(p, rho.shape().cutoff(m)?);
        out = out.apply_kraus(m, &ops)?;
    }
    Ok(out)
}

/// The hybrid channel `(|0>|alpha> + |1>|-alpha>)/sqrt2` after loss `p` on
/// both modes, in the dynamic basis `{|t alpha>, |-t alpha>}`.
pub fn decohere_hybrid(alpha: f64, p: &LossParams) -> Result<ChannelState> {
    ChannelState::new(alpha, p.t)
}
