//! Linear-optics Bell-state measurements.
//!
//! Single-rail: a 50:50 beam splitter and two photon-number-resolving
//! detectors. Only `B3 -> (1,0)` and `B4 -> (0,1)` give unique click
//! patterns; `(0,0)`, `(2,0)`, `(0,2)` (and `(1,1)`, which the Bell states
//! never produce) are lumped into FAIL.
//!
//! Coherent: a 50:50 beam splitter followed by parity measurements. After the
//! splitter, `|u b>|v b>` lands on `|(u+v)b/√2>|(v-u)b/√2>`, so one output is
//! always vacuum and the other carries `|±√2 b>`. The projectors `O1..O4`
//! pick out even/odd photon numbers (n ≥ 1) with vacuum in the other mode;
//! the no-click event is FAIL.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    check_numeric_alpha, measure, measure_pure, BeamSplit, DensityMatrix, FockState, ModeIndex, Projector,
    Shape, TAIL_TOLERANCE, ZERO_PROBABILITY,
};
use crate::hybrid::{gram_overlap, CoherentBasisOp, HybridOp, QubitCoeffs};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutcomeKind {
    B1,
    B2,
    B3,
    B4,
    Fail,
}

impl OutcomeKind {
    pub const BELL: [OutcomeKind; 4] = [OutcomeKind::B1, OutcomeKind::B2, OutcomeKind::B3, OutcomeKind::B4];
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutcomeKind::B1 => "B1",
            OutcomeKind::B2 => "B2",
            OutcomeKind::B3 => "B3",
            OutcomeKind::B4 => "B4",
            OutcomeKind::Fail => "FAIL",
        })
    }
}

/// Pauli correction on the receiving qubit: `X` first, then `Z`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correction {
    pub x: bool,
    pub z: bool,
}

impl Correction {
    pub const NONE: Correction = Correction { x: false, z: false };

    /// Standard teleportation table: B1 none, B2 Z, B3 X, B4 X then Z.
    pub fn standard(kind: OutcomeKind) -> Correction {
        match kind {
            OutcomeKind::B1 | OutcomeKind::Fail => Correction::NONE,
            OutcomeKind::B2 => Correction { x: false, z: true },
            OutcomeKind::B3 => Correction { x: true, z: false },
            OutcomeKind::B4 => Correction { x: true, z: true },
        }
    }

    pub fn apply_coherent(&self, op: &CoherentBasisOp) -> CoherentBasisOp {
        let op = if self.x { op.apply_x() } else { op.clone() };
        if self.z {
            op.apply_z()
        } else {
            op
        }
    }
}

/// Post-measurement state of the unmeasured system.
#[derive(Clone, Debug, PartialEq)]
pub enum Conditional {
    Fock(DensityMatrix),
    Coherent(CoherentBasisOp),
    /// Density matrix over orthonormal auxiliary levels.
    Levels(DMatrix<Complex64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BsmOutcome {
    pub kind: OutcomeKind,
    pub probability: f64,
    /// Normalized; `None` when the outcome is impossible.
    pub conditional: Option<Conditional>,
    pub correction: Correction,
}

impl BsmOutcome {
    pub fn total_probability(outcomes: &[BsmOutcome]) -> f64 {
        outcomes.iter().map(|o| o.probability).sum()
    }

    pub fn find(outcomes: &[BsmOutcome], kind: OutcomeKind) -> Option<&BsmOutcome> {
        outcomes.iter().find(|o| o.kind == kind)
    }
}

/// Single-rail Bell state amplitudes `B[n_in][n_ch]`.
pub fn single_rail_bell(kind: OutcomeKind) -> Matrix2<Complex64> {
    let h = c(FRAC_1_SQRT_2);
    let z = c(0.0);
    match kind {
        OutcomeKind::B1 => Matrix2::new(h, z, z, h),
        OutcomeKind::B2 => Matrix2::new(h, z, z, -h),
        OutcomeKind::B3 => Matrix2::new(z, h, h, z),
        OutcomeKind::B4 => Matrix2::new(z, h, -h, z),
        OutcomeKind::Fail => panic!("FAIL is not a Bell state"),
    }
}

/// Single-rail Bell state on two Fock modes of the given cutoff.
pub fn single_rail_bell_state(kind: OutcomeKind, cutoff: usize) -> Result<FockState> {
    let b = single_rail_bell(kind);
    let shape = Shape::new(vec![cutoff, cutoff]);
    Ok(FockState::from_fn(shape, |ns| {
        if ns[0] < 2 && ns[1] < 2 {
            b[(ns[0], ns[1])]
        } else {
            c(0.0)
        }
    }))
}

const SINGLE_RAIL_CUTOFF: usize = 3;

/// Beam splitter plus detectors on `m_in`, `m_ch` of `joint`.
///
/// Both modes must carry at most one photon; they are widened to three levels
/// so the two-photon bunching terms fit.
pub fn bsm_single_rail(joint: &DensityMatrix, m_in: ModeIndex, m_ch: ModeIndex) -> Result<Vec<BsmOutcome>> {
    let shape = joint.shape();
    let (i, j) = (shape.check(m_in)?, shape.check(m_ch)?);
    for m in [i, j] {
        let excess: f64 = (0..shape.dim())
            .filter(|&k| shape.numbers(k)[m] >= 2)
            .map(|k| joint.matrix()[(k, k)].re)
            .sum();
        if excess > TAIL_TOLERANCE {
            return Err(Error::ModeNotSingleRail(m));
        }
    }
    let mut rho = joint.clone();
    for m in [m_in, m_ch] {
        let d = rho.shape().cutoff(m)?;
        if d < SINGLE_RAIL_CUTOFF {
            rho = rho.with_cutoff(m, SINGLE_RAIL_CUTOFF)?;
        }
    }
    let rho = rho.beam_split(m_in, m_ch)?;
    let modes = [m_in, m_ch];
    let mut out = Vec::new();
    for (kind, proj) in [
        (OutcomeKind::B3, Projector::pattern(&[1, 0])),
        (OutcomeKind::B4, Projector::pattern(&[0, 1])),
        (OutcomeKind::Fail, Projector::numbers(|ns| ns != [1, 0] && ns != [0, 1])),
    ] {
        let (probability, conditional) = match measure(&rho, &proj, &modes) {
            Ok((p, post)) => (p, Some(Conditional::Fock(post))),
            Err(Error::ZeroProbability) => (0.0, None),
            Err(e) => return Err(e),
        };
        out.push(BsmOutcome {
            kind,
            probability,
            conditional,
            correction: Correction::standard(kind),
        });
    }
    Ok(out)
}

/// Ideal single-rail Bell projections of `q ⊗ channel`, where `channel`
/// has single-rail levels as its auxiliary index. Returns all four Bell
/// outcomes; which of them linear optics can identify is the caller's
/// policy.
pub fn bsm_single_rail_analytic(q: &QubitCoeffs, channel: &HybridOp) -> Result<Vec<BsmOutcome>> {
    if channel.aux() != 2 {
        return Err(Error::ShapeMismatch(format!(
            "single-rail channel needs 2 levels, got {}",
            channel.aux()
        )));
    }
    two_level_projections(q, channel)
}

/// Ideal polarization Bell projections of `q ⊗ channel` for a channel with
/// levels `H`, `V`, `vac`. Losing the channel photon leaves nothing to pair
/// with the input and is reported as FAIL.
pub fn bsm_polarization_analytic(q: &QubitCoeffs, channel: &HybridOp) -> Result<Vec<BsmOutcome>> {
    if channel.aux() != 3 {
        return Err(Error::ShapeMismatch(format!(
            "polarization channel needs 3 levels, got {}",
            channel.aux()
        )));
    }
    two_level_projections(q, channel)
}

fn outcome_from_op(kind: OutcomeKind, op: CoherentBasisOp) -> BsmOutcome {
    let probability = op.trace().re;
    BsmOutcome {
        kind,
        probability,
        conditional: (probability > ZERO_PROBABILITY)
            .then(|| Conditional::Coherent(op.normalized().expect("positive trace"))),
        correction: Correction::standard(kind),
    }
}

fn two_level_projections(q: &QubitCoeffs, channel: &HybridOp) -> Result<Vec<BsmOutcome>> {
    let psi = q.vector();
    let mut out = Vec::with_capacity(5);
    for kind in OutcomeKind::BELL {
        let b = single_rail_bell(kind);
        let w: Vec<Complex64> = (0..2)
            .map(|x| (0..2).map(|xs| b[(xs, x)].conj() * psi[xs]).sum())
            .collect();
        let mut o = Matrix2::zeros();
        for u in 0..2 {
            for v in 0..2 {
                let mut acc = c(0.0);
                for x in 0..2 {
                    for y in 0..2 {
                        acc += w[x] * channel.coeff(x, u, y, v) * w[y].conj();
                    }
                }
                o[(u, v)] = acc;
            }
        }
        out.push(outcome_from_op(kind, CoherentBasisOp::new(channel.beta(), o)?));
    }
    if channel.aux() > 2 {
        let o = Matrix2::from_fn(|u, v| (2..channel.aux()).map(|x| channel.coeff(x, u, x, v)).sum());
        out.push(outcome_from_op(OutcomeKind::Fail, CoherentBasisOp::new(channel.beta(), o)?));
    }
    Ok(out)
}

/// `N± = (2 ± 2 exp(-4 b^2))^{-1/2}`.
pub fn coherent_bell_norms(beta: f64) -> (f64, f64) {
    let e = (-4.0 * beta * beta).exp();
    let plus = (2.0 + 2.0 * e).powf(-0.5);
    // 2 - 2e loses precision for small beta.
    let minus = (-2.0 * (-4.0 * beta * beta).exp_m1()).powf(-0.5);
    (plus, minus)
}

/// Two-mode coherent Bell state `sum_uv A[u][v] |u b>|v b>`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentBellState {
    pub kind: OutcomeKind,
    pub beta: f64,
    pub amps: Matrix2<Complex64>,
}

impl CoherentBellState {
    /// `<self|other>` through the two-mode Gram metric.
    pub fn inner(&self, other: &CoherentBellState) -> Result<Complex64> {
        if self.beta != other.beta {
            return Err(Error::BasisMismatch(self.beta, other.beta));
        }
        let g = gram_overlap(self.beta);
        let gm = Matrix2::new(c(1.0), c(g), c(g), c(1.0));
        Ok((self.amps.adjoint() * gm * other.amps * gm).trace())
    }

    pub fn materialize(&self, cutoff: usize) -> Result<FockState> {
        let cols = crate::hybrid::coherent_columns(self.beta, cutoff)?;
        let mut out = FockState::from_fn(Shape::new(vec![cutoff, cutoff]), |_| c(0.0));
        for u in 0..2 {
            for v in 0..2 {
                let a = self.amps[(u, v)];
                if a == c(0.0) {
                    continue;
                }
                let cu = FockState::new(Shape::single(cutoff), cols.column(u).iter().copied().collect())?;
                let cv = FockState::new(Shape::single(cutoff), cols.column(v).iter().copied().collect())?;
                out = out.plus(&cu.tensor(&cv).scaled(a))?;
            }
        }
        Ok(out)
    }

    /// The state as a joint with no auxiliary system.
    pub fn joint(&self) -> CoherentJoint {
        let v = DMatrix::from_fn(4, 1, |i, _| self.amps[(i / 2, i % 2)]);
        CoherentJoint {
            aux: 1,
            beta: self.beta,
            coeffs: &v * v.adjoint(),
        }
    }
}

/// The four coherent Bell states in the basis `{|tα>, |-tα>}`.
pub fn coherent_bell_states(alpha: f64, t: f64) -> Result<[CoherentBellState; 4]> {
    let beta = t * alpha;
    if !(beta > 0.0) {
        return Err(Error::DegenerateBasis);
    }
    let (np, nm) = coherent_bell_norms(beta);
    let z = c(0.0);
    let mk = |kind, amps| CoherentBellState { kind, beta, amps };
    Ok([
        mk(OutcomeKind::B1, Matrix2::new(c(np), z, z, c(np))),
        mk(OutcomeKind::B2, Matrix2::new(c(nm), z, z, c(-nm))),
        mk(OutcomeKind::B3, Matrix2::new(z, c(np), c(np), z)),
        mk(OutcomeKind::B4, Matrix2::new(z, c(nm), c(-nm), z)),
    ])
}

/// Operator on (auxiliary levels) ⊗ (coherent c) ⊗ (coherent c'), as
/// coefficients over `(x, u, v)` with flat index `4x + 2u + v`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentJoint {
    aux: usize,
    beta: f64,
    coeffs: DMatrix<Complex64>,
}

impl CoherentJoint {
    /// Pure coherent input `psi` on `c` alongside a channel whose coherent
    /// half is `c'`.
    pub fn from_input(psi: &Vector2<Complex64>, channel: &HybridOp) -> Self {
        let aux = channel.aux();
        let coeffs = DMatrix::from_fn(4 * aux, 4 * aux, |i, j| {
            let (x, u, v) = (i / 4, (i / 2) % 2, i % 2);
            let (y, up, vp) = (j / 4, (j / 2) % 2, j % 2);
            psi[u] * psi[up].conj() * channel.coeff(x, v, y, vp)
        });
        CoherentJoint {
            aux,
            beta: channel.beta(),
            coeffs,
        }
    }

    pub fn aux(&self) -> usize {
        self.aux
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// `(signs s(u,v), |Φ|^2)` with `K_j |u b>|v b> = s(u,v) |Φ_j>`.
fn parity_map(kind: OutcomeKind, beta: f64) -> ([[f64; 2]; 2], f64) {
    let b2 = 2.0 * beta * beta;
    let e = (-b2).exp();
    let em1 = -(-b2).exp_m1();
    let even = em1 * em1 / 2.0;
    let odd = -(-2.0 * b2).exp_m1() / 2.0;
    match kind {
        OutcomeKind::B1 => ([[1.0, 0.0], [0.0, 1.0]], even),
        OutcomeKind::B2 => ([[1.0, 0.0], [0.0, -1.0]], odd),
        OutcomeKind::B3 => ([[0.0, 1.0], [1.0, 0.0]], even),
        OutcomeKind::B4 => ([[0.0, -1.0], [1.0, 0.0]], odd),
        OutcomeKind::Fail => ([[1.0, 1.0], [1.0, 1.0]], e),
    }
}

/// Coherent Bell measurement in closed form. Conditionals are density
/// matrices over the joint's auxiliary levels.
pub fn bsm_coherent_analytic(joint: &CoherentJoint) -> Vec<BsmOutcome> {
    let n = joint.aux;
    [OutcomeKind::B1, OutcomeKind::B2, OutcomeKind::B3, OutcomeKind::B4, OutcomeKind::Fail]
        .into_iter()
        .map(|kind| {
            let (s, norm) = parity_map(kind, joint.beta);
            let rho = DMatrix::from_fn(n, n, |x, y| {
                let mut acc = c(0.0);
                for u in 0..2 {
                    for v in 0..2 {
                        if s[u][v] == 0.0 {
                            continue;
                        }
                        for up in 0..2 {
                            for vp in 0..2 {
                                if s[up][vp] == 0.0 {
                                    continue;
                                }
                                acc += joint.coeffs[(4 * x + 2 * u + v, 4 * y + 2 * up + vp)] * (s[u][v] * s[up][vp]);
                            }
                        }
                    }
                }
                acc * norm
            });
            let probability = rho.trace().re;
            BsmOutcome {
                kind,
                probability,
                conditional: (probability > ZERO_PROBABILITY)
                    .then(|| Conditional::Levels(rho / c(probability))),
                correction: Correction::standard(kind),
            }
        })
        .collect()
}

fn parity_projector(kind: OutcomeKind) -> Projector {
    match kind {
        OutcomeKind::B1 => Projector::numbers(|ns| ns[1] == 0 && ns[0] >= 2 && ns[0] % 2 == 0),
        OutcomeKind::B2 => Projector::numbers(|ns| ns[1] == 0 && ns[0] % 2 == 1),
        OutcomeKind::B3 => Projector::numbers(|ns| ns[0] == 0 && ns[1] >= 2 && ns[1] % 2 == 0),
        OutcomeKind::B4 => Projector::numbers(|ns| ns[0] == 0 && ns[1] % 2 == 1),
        // Both-click patterns never occur for inputs in the coherent span;
        // if truncation produces them they are counted as failures.
        OutcomeKind::Fail => Projector::numbers(|ns| ns[0] == 0 && ns[1] == 0 || ns[0] > 0 && ns[1] > 0),
    }
}

/// Coherent Bell measurement on a pure-state ensemble `sum_k |v_k><v_k|`
/// over Fock modes, `m_c` taking the role of the first beam-splitter input.
pub fn bsm_coherent_numeric(
    ensemble: &[FockState],
    m_c: ModeIndex,
    m_cp: ModeIndex,
    alpha: f64,
) -> Result<Vec<BsmOutcome>> {
    check_numeric_alpha(alpha)?;
    let split: Vec<FockState> = ensemble.iter().map(|v| v.beam_split(m_c, m_cp)).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(5);
    for kind in [OutcomeKind::B1, OutcomeKind::B2, OutcomeKind::B3, OutcomeKind::B4, OutcomeKind::Fail] {
        let proj = parity_projector(kind);
        let mut acc: Option<DensityMatrix> = None;
        for v in &split {
            let part = measure_pure(v, &proj, &[m_c, m_cp])?;
            acc = Some(match acc {
                None => part,
                Some(a) => a.plus(&part)?,
            });
        }
        let rho = acc.ok_or_else(|| Error::ShapeMismatch("empty ensemble".into()))?;
        let probability = rho.trace();
        out.push(BsmOutcome {
            kind,
            probability,
            conditional: (probability > ZERO_PROBABILITY).then(|| Conditional::Fock(rho.scaled(1.0 / probability))),
            correction: Correction::standard(kind),
        });
    }
    Ok(out)
}
