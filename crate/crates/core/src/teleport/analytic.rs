//! Exact pipelines in the coherent basis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{assemble, headline_fidelity, record, Backend, Direction, OutcomeRecord, TeleportResult};
use crate::bell::{
    bsm_coherent_analytic, bsm_polarization_analytic, bsm_single_rail_analytic, BsmOutcome, Conditional,
    CoherentJoint, Correction,
};
use crate::error::Result;
use crate::hybrid::{polarization_channel, target_amplitudes, ChannelState, HybridOp, QubitCoeffs};
use crate::loss::LossParams;

/// Channel for one `(direction, alpha, loss)` point, reused across inputs.
#[derive(Clone, Debug)]
pub struct AnalyticContext {
    direction: Direction,
    alpha: f64,
    loss: LossParams,
    channel: HybridOp,
}

impl AnalyticContext {
    pub fn new(direction: Direction, alpha: f64, loss: &LossParams) -> Result<Self> {
        let t = loss.t();
        let channel = match direction {
            Direction::S2C | Direction::C2S => ChannelState::new(alpha, t)?.coeffs(),
            Direction::P2C | Direction::C2P => polarization_channel(alpha, t)?,
        };
        Ok(AnalyticContext {
            direction,
            alpha,
            loss: *loss,
            channel,
        })
    }

    pub fn outcomes(&self, q: &QubitCoeffs) -> Result<Vec<OutcomeRecord>> {
        let (d, ch) = (self.direction, &self.channel);
        match d {
            Direction::S2C => to_coherent(d, q, ch, bsm_single_rail_analytic(q, ch)?),
            Direction::P2C => to_coherent(d, q, ch, bsm_polarization_analytic(q, ch)?),
            Direction::C2S | Direction::C2P => to_levels(d, q, ch),
        }
    }

    pub fn teleport(&self, q: &QubitCoeffs) -> Result<TeleportResult> {
        let records = self.outcomes(q)?;
        Ok(assemble(self.direction, Backend::Analytic, q, self.alpha, &self.loss, records))
    }

    /// Headline fidelity before clamping, without assembling a result.
    pub fn raw_fidelity(&self, q: &QubitCoeffs) -> Result<f64> {
        Ok(headline_fidelity(self.direction, &self.outcomes(q)?))
    }
}


/// Qubit sent onto the coherent half of `channel`.
fn to_coherent(direction: Direction, q: &QubitCoeffs, channel: &HybridOp, outs: Vec<BsmOutcome>) -> Result<Vec<OutcomeRecord>> {
    let target = target_amplitudes(q, channel.beta())?;
    outs.into_iter()
        .map(|o| {
            let fidelity = match &o.conditional {
                Some(Conditional::Coherent(op)) => Some(o.correction.apply_coherent(op).normalized()?.expectation(&target)),
                _ => None,
            };
            Ok(record(direction, o.kind, o.probability, fidelity))
        })
        .collect()
}

/// Coherent qubit sent onto the auxiliary (photonic) half of `channel`.
fn to_levels(direction: Direction, q: &QubitCoeffs, channel: &HybridOp) -> Result<Vec<OutcomeRecord>> {
    let input = target_amplitudes(q, channel.beta())?;
    let joint = CoherentJoint::from_input(&input, channel);
    let target = DVector::from_fn(channel.aux(), |i, _| match i {
        0 => q.a,
        1 => q.b,
        _ => Complex64::default(),
    });
    Ok(bsm_coherent_analytic(&joint)
        .into_iter()
        .map(|o| {
            let fidelity = match &o.conditional {
                Some(Conditional::Levels(rho)) => {
                    let rho = correct_levels(rho, o.correction);
                    Some(target.dotc(&(&rho * &target)).re)
                }
                _ => None,
            };
            record(direction, o.kind, o.probability, fidelity)
        })
        .collect())
}

/// Pauli correction on the photonic qubit spanned by levels 0 and 1; any
/// further level (photon lost) is left alone.
pub(crate) fn correct_levels(rho: &DMatrix<Complex64>, corr: Correction) -> DMatrix<Complex64> {
    let n = rho.nrows();
    let mut u = DMatrix::<Complex64>::identity(n, n);
    if corr.x {
        u.swap_rows(0, 1);
    }
    if corr.z {
        let row = u.row(1) * Complex64::new(-1.0, 0.0);
        u.set_row(1, &row);
    }
    &u * rho * u.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::OutcomeKind;

    #[test]
    fn level_corrections() {
        let rho = DMatrix::from_fn(3, 3, |i, j| Complex64::new((i * 3 + j) as f64, 0.0));
        let x = correct_levels(&rho, Correction { x: true, z: false });
        assert_eq!(x[(0, 0)], rho[(1, 1)]);
        assert_eq!(x[(2, 2)], rho[(2, 2)]);
        let z = correct_levels(&rho, Correction { x: false, z: true });
        assert_eq!(z[(0, 1)], -rho[(0, 1)]);
        assert_eq!(z[(1, 1)], rho[(1, 1)]);
    }

    #[test]
    fn c2p_breakdown_has_every_outcome() {
        let q = QubitCoeffs::from_bloch(0.7, 0.2).unwrap();
        let ctx = AnalyticContext::new(Direction::C2P, 1.0, &LossParams::from_t(0.9).unwrap()).unwrap();
        let recs = ctx.outcomes(&q).unwrap();
        assert_eq!(recs.len(), 5);
        assert!(recs.iter().filter(|r| r.accepted).count() == 4);
        assert!(!recs.iter().find(|r| r.outcome == OutcomeKind::Fail).unwrap().accepted);
    }
}
