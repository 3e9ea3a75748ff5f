//! Fock-space pipelines, used as an independent oracle for the analytic
//! backend.
//!
//! The lossy channel is built from its lossless pure state, run through the
//! Kraus loss map on every channel mode and split into pure branches, so the
//! Bell measurement only ever acts on state vectors.

use nalgebra::{DMatrix, Vector2};
use num_complex::Complex64;

use super::analytic::correct_levels;
use super::{assemble, record, Backend, Direction, OutcomeRecord, TeleportResult};
use crate::bell::{bsm_coherent_numeric, single_rail_bell, BsmOutcome, Conditional, Correction, OutcomeKind};
use crate::error::{Error, Result};
use crate::fock::{
    check_numeric_alpha, cutoff_for, fidelity, measure_pure, parity_operator, BeamSplit, DensityMatrix, FockState,
    ModeIndex, Projector, Shape, ZERO_PROBABILITY,
};
use crate::hybrid::{coherent_columns, target_amplitudes, QubitCoeffs};
use crate::loss::{kraus_loss, LossParams};

/// Eigenvalues of the lossy channel below this are dropped.
const BRANCH_THRESHOLD: f64 = 1e-15;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Precomputed channel for one `(direction, alpha, loss)` point; inputs are
/// then teleported one at a time.
#[derive(Clone, Debug)]
pub struct NumericContext {
    direction: Direction,
    alpha: f64,
    loss: LossParams,
    cutoff: usize,
    branches: Vec<FockState>,
}

impl NumericContext {
    pub fn new(direction: Direction, alpha: f64, loss: &LossParams) -> Result<Self> {
        check_numeric_alpha(alpha)?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha}")));
        }
        let cutoff = match direction {
            Direction::S2C | Direction::P2C => cutoff_for(alpha),
            // The coherent Bell measurement interferes two amplitudes.
            Direction::C2S | Direction::C2P => cutoff_for(std::f64::consts::SQRT_2 * alpha),
        };
        let (aux, levels) = match direction {
            Direction::S2C => (Shape::single(3), single_rail_levels(3)?),
            Direction::C2S => (Shape::single(2), single_rail_levels(2)?),
            Direction::P2C | Direction::C2P => (Shape::new(vec![2, 2]), dual_rail_levels()?),
        };
        let plus = crate::fock::coherent_state(alpha, cutoff)?;
        let minus = crate::fock::coherent_state(-alpha, cutoff)?;
        let pure = levels[0]
            .tensor(&plus)
            .plus(&levels[1].tensor(&minus))?
            .scaled(c(std::f64::consts::FRAC_1_SQRT_2));
        debug_assert_eq!(pure.shape(), &aux.concat(&Shape::single(cutoff)));
        let modes: Vec<ModeIndex> = (0..pure.shape().modes()).map(ModeIndex).collect();
        let lossy = kraus_loss(&pure.projector(), loss, &modes)?;
        Ok(NumericContext {
            direction,
            alpha,
            loss: *loss,
            cutoff,
            branches: lossy.branches(BRANCH_THRESHOLD),
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn teleport(&self, q: &QubitCoeffs) -> Result<TeleportResult> {
        let records = match self.direction {
            Direction::S2C => self.s2c(q)?,
            Direction::P2C => self.p2c(q)?,
            Direction::C2S | Direction::C2P => self.to_photonic(q)?,
        };
        Ok(assemble(self.direction, Backend::Numeric, q, self.alpha, &self.loss, records))
    }

    fn beta(&self) -> f64 {
        self.alpha * self.loss.t()
    }

    /// Sum over channel branches of the unnormalized state left after
    /// projecting `input ⊗ branch` (optionally beam-split first).
    fn conditional(
        &self,
        input: &FockState,
        proj: &Projector,
        modes: &[ModeIndex],
        split: Option<(ModeIndex, ModeIndex)>,
    ) -> Result<DensityMatrix> {
        let mut acc: Option<DensityMatrix> = None;
        for br in &self.branches {
            let mut joint = input.tensor(br);
            if let Some((m0, m1)) = split {
                joint = joint.beam_split(m0, m1)?;
            }
            let part = measure_pure(&joint, proj, modes)?;
            acc = Some(match acc {
                None => part,
                Some(a) => a.plus(&part)?,
            });
        }
        acc.ok_or_else(|| Error::ShapeMismatch("channel has no branches".into()))
    }

    /// Single-rail input on mode 0, channel on (1, 2). B3/B4 are read off
    /// the detector patterns behind the beam splitter; B1/B2 are ideal
    /// projections onto the beam-split Bell states.
    fn s2c(&self, q: &QubitCoeffs) -> Result<Vec<OutcomeRecord>> {
        let input = FockState::new(Shape::single(3), vec![q.a, q.b, c(0.0)])?;
        let modes = [ModeIndex(0), ModeIndex(1)];
        let coh = CoherentCorrector::new(self.beta(), self.cutoff, q)?;
        let mut out = Vec::with_capacity(4);
        for kind in OutcomeKind::BELL {
            let proj = match kind {
                OutcomeKind::B3 => Projector::pattern(&[1, 0]),
                OutcomeKind::B4 => Projector::pattern(&[0, 1]),
                _ => {
                    let bell = crate::bell::single_rail_bell_state(kind, 3)?;
                    Projector::onto(bell.beam_split(modes[0], modes[1])?)
                }
            };
            let rho = self.conditional(&input, &proj, &modes, Some((modes[0], modes[1])))?;
            out.push(coh.record(self.direction, kind, &rho)?);
        }
        Ok(out)
    }

    /// Polarization input on modes (0, 1), channel on (2, 3, 4).
    fn p2c(&self, q: &QubitCoeffs) -> Result<Vec<OutcomeRecord>> {
        let levels = dual_rail_levels()?;
        let input = levels[0].scaled(q.a).plus(&levels[1].scaled(q.b))?;
        let modes: Vec<ModeIndex> = (0..4).map(ModeIndex).collect();
        let coh = CoherentCorrector::new(self.beta(), self.cutoff, q)?;
        let mut out = Vec::with_capacity(5);
        let mut total = 0.0;
        for kind in OutcomeKind::BELL {
            let b = single_rail_bell(kind);
            let mut bell = FockState::vacuum(Shape::new(vec![2; 4]));
            for xs in 0..2 {
                for x in 0..2 {
                    bell = bell.plus(&levels[xs].tensor(&levels[x]).scaled(b[(xs, x)]))?;
                }
            }
            let rho = self.conditional(&input, &Projector::onto(bell), &modes, None)?;
            total += rho.trace();
            out.push(coh.record(self.direction, kind, &rho)?);
        }
        // Whatever the Bell states miss: the channel photon was lost.
        let norm: f64 = self.branches.iter().map(|b| b.norm_sqr()).sum::<f64>() * input.norm_sqr();
        out.push(record(self.direction, OutcomeKind::Fail, (norm - total).max(0.0), None));
        Ok(out)
    }

    /// Coherent input on mode 0, channel photonic modes next, channel
    /// coherent mode last.
    fn to_photonic(&self, q: &QubitCoeffs) -> Result<Vec<OutcomeRecord>> {
        let amps = target_amplitudes(q, self.beta())?;
        let input = coherent_qubit(self.beta(), self.cutoff, &amps)?;
        let ensemble: Vec<FockState> = self.branches.iter().map(|b| input.tensor(b)).collect();
        let last = ModeIndex(ensemble[0].shape().modes() - 1);
        let outs = bsm_coherent_numeric(&ensemble, ModeIndex(0), last, self.alpha)?;
        let dual = self.direction == Direction::C2P;
        let target = if dual {
            let l = dual_rail_levels()?;
            l[0].scaled(q.a).plus(&l[1].scaled(q.b))?
        } else {
            FockState::new(Shape::single(2), vec![q.a, q.b])?
        };
        outs.into_iter()
            .map(|o: BsmOutcome| {
                let fid = match &o.conditional {
                    Some(Conditional::Fock(rho)) => {
                        let corrected = if dual {
                            rho.conjugate(&dual_rail_correction(o.correction))?
                        } else {
                            DensityMatrix::new(rho.shape().clone(), correct_levels(rho.matrix(), o.correction))?
                        };
                        Some(fidelity(&target, &corrected)?)
                    }
                    _ => None,
                };
                Ok(record(self.direction, o.kind, o.probability, fid))
            })
            .collect()
    }
}

/// `|0>`, `|1>` on one mode of the given cutoff.
fn single_rail_levels(cutoff: usize) -> Result<[FockState; 2]> {
    let s = Shape::single(cutoff);
    Ok([FockState::basis(s.clone(), &[0])?, FockState::basis(s, &[1])?])
}

/// `|H> = |10>`, `|V> = |01>`.
fn dual_rail_levels() -> Result<[FockState; 2]> {
    let s = Shape::new(vec![2, 2]);
    Ok([FockState::basis(s.clone(), &[1, 0])?, FockState::basis(s, &[0, 1])?])
}

/// X swaps the rails, Z is `(-1)^{n_V}`, on the `(2, 2)` rail space.
fn dual_rail_correction(corr: Correction) -> DMatrix<Complex64> {
    let mut u = DMatrix::<Complex64>::identity(4, 4);
    if corr.x {
        u.swap_rows(1, 2);
    }
    if corr.z {
        let z = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(4, |i, _| c(if i % 2 == 1 { -1.0 } else { 1.0 })));
        u = z * u;
    }
    u
}

fn coherent_qubit(beta: f64, cutoff: usize, amps: &Vector2<Complex64>) -> Result<FockState> {
    let v = coherent_columns(beta, cutoff)?;
    FockState::new(Shape::single(cutoff), (v * amps).iter().copied().collect())
}

/// Corrections and target for a receiving coherent-state qubit.
struct CoherentCorrector {
    parity: DMatrix<Complex64>,
    /// `|±b> -> ±|±b>`, zero off the span.
    z: DMatrix<Complex64>,
    target: FockState,
}

impl CoherentCorrector {
    fn new(beta: f64, cutoff: usize, q: &QubitCoeffs) -> Result<Self> {
        let v = coherent_columns(beta, cutoff)?;
        let gram = v.adjoint() * &v;
        let inv = gram.try_inverse().ok_or(Error::DegenerateBasis)?;
        let sign = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(-1.0)]));
        Ok(CoherentCorrector {
            parity: parity_operator(cutoff),
            z: &v * sign * inv * v.adjoint(),
            target: coherent_qubit(beta, cutoff, &target_amplitudes(q, beta)?)?,
        })
    }

    fn record(&self, direction: Direction, kind: OutcomeKind, rho: &DensityMatrix) -> Result<OutcomeRecord> {
        let p = rho.trace();
        if p <= ZERO_PROBABILITY {
            return Ok(record(direction, kind, p, None));
        }
        let corr = Correction::standard(kind);
        let mut state = rho.clone();
        if corr.x {
            state = state.conjugate(&self.parity)?;
        }
        if corr.z {
            state = state.conjugate(&self.z)?;
        }
        let f = fidelity(&self.target, &state.normalized()?)?;
        Ok(record(direction, kind, p, Some(f)))
    }
}
