//! Exact representations in the non-orthogonal coherent basis
//! `{|beta>, |-beta>}`, valid for any amplitude without truncation.
//!
//! Index 0 is `|+beta>`, index 1 is `|-beta>`. Operators are stored as
//! coefficient matrices `C` meaning `sum_uv C[u][v] |u beta><v beta|`, so
//! traces and overlaps go through the Gram matrix `G = [[1, g], [g, 1]]`
//! with `g = <beta|-beta> = exp(-2 beta^2)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{coherent_state, DensityMatrix, FockState, Shape};

/// `N^-2` below this is treated as a collapsed basis.
const DEGENERATE: f64 = 1e-14;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Input-qubit coefficients `a|0> + b|1>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QubitCoeffs {
    pub a: Complex64,
    pub b: Complex64,
}

impl QubitCoeffs {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let n = a.norm_sqr() + b.norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("|a|^2 + |b|^2 = {n}")));
        }
        Ok(QubitCoeffs { a, b })
    }

    /// `a = cos(theta/2) e^{i phi/2}`, `b = sin(theta/2) e^{-i phi/2}`.
    ///
    /// `theta = pi` (the `|1>` pole) is accepted.
    pub fn from_bloch(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParameter(format!("theta = {theta} outside [0, pi]")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::InvalidParameter(format!("phi = {phi} outside [0, 2pi)")));
        }
        Ok(QubitCoeffs {
            a: Complex64::from_polar((theta / 2.0).cos(), phi / 2.0),
            b: Complex64::from_polar((theta / 2.0).sin(), -phi / 2.0),
        })
    }

    pub fn zero() -> Self {
        QubitCoeffs { a: c(1.0), b: c(0.0) }
    }

    pub fn one() -> Self {
        QubitCoeffs { a: c(0.0), b: c(1.0) }
    }

    pub fn p0(&self) -> f64 {
        self.a.norm_sqr()
    }

    pub fn p1(&self) -> f64 {
        self.b.norm_sqr()
    }

    /// `Re(a b*)`.
    pub fn coherence(&self) -> f64 {
        (self.a * self.b.conj()).re
    }

    pub fn vector(&self) -> Vector2<Complex64> {
        Vector2::new(self.a, self.b)
    }
}

/// Overlap `<beta|-beta>`.
pub fn gram_overlap(beta: f64) -> f64 {
    (-2.0 * beta * beta).exp()
}

fn gram(beta: f64) -> Matrix2<Complex64> {
    let g = c(gram_overlap(beta));
    Matrix2::new(c(1.0), g, g, c(1.0))
}

/// Operator on one coherent-state qubit in the basis `{|beta>, |-beta>}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentBasisOp {
    beta: f64,
    coeffs: Matrix2<Complex64>,
}

impl CoherentBasisOp {
    pub fn new(beta: f64, coeffs: Matrix2<Complex64>) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidParameter(format!("basis amplitude {beta}")));
        }
        Ok(CoherentBasisOp { beta, coeffs })
    }

    /// `|psi><psi|` for `psi = x|beta> + y|-beta>` (not renormalized).
    pub fn pure(beta: f64, amps: Vector2<Complex64>) -> Result<Self> {
        Self::new(beta, amps * amps.adjoint())
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gram(&self) -> f64 {
        gram_overlap(self.beta)
    }

    pub fn coeffs(&self) -> &Matrix2<Complex64> {
        &self.coeffs
    }

    pub fn trace(&self) -> Complex64 {
        (self.coeffs * gram(self.beta)).trace()
    }

    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace().re;
        if tr <= DEGENERATE {
            return Err(Error::ZeroProbability);
        }
        Self::new(self.beta, self.coeffs / c(tr))
    }

    /// `Tr(op1 op2)`.
    pub fn overlap(&self, other: &CoherentBasisOp) -> Result<Complex64> {
        if (self.beta - other.beta).abs() > 1e-14 * self.beta.max(1.0) {
            return Err(Error::BasisMismatch(self.beta, other.beta));
        }
        let g = gram(self.beta);
        Ok((self.coeffs * g * other.coeffs * g).trace())
    }

    /// `<psi|op|psi>` for `psi = x|beta> + y|-beta>`.
    pub fn expectation(&self, amps: &Vector2<Complex64>) -> f64 {
        let gpsi = gram(self.beta) * amps;
        (gpsi.adjoint() * self.coeffs * gpsi)[(0, 0)].re
    }

    /// Bit flip `|±beta> -> |∓beta>`.
    pub fn apply_x(&self) -> Self {
        let x = Matrix2::new(c(0.0), c(1.0), c(1.0), c(0.0));
        CoherentBasisOp {
            beta: self.beta,
            coeffs: x * self.coeffs * x,
        }
    }

    /// Phase flip `|±beta> -> ±|±beta>` (not unitary for finite beta).
    pub fn apply_z(&self) -> Self {
        let z = Matrix2::new(c(1.0), c(0.0), c(0.0), c(-1.0));
        CoherentBasisOp {
            beta: self.beta,
            coeffs: z * self.coeffs * z,
        }
    }

    pub fn purity(&self) -> f64 {
        self.overlap(self).expect("same basis").re
    }
}

/// Exact expansion into a truncated Fock basis.
pub trait Materialize {
    fn materialize(&self, cutoff: usize) -> Result<DensityMatrix>;
}

impl Materialize for CoherentBasisOp {
    fn materialize(&self, cutoff: usize) -> Result<DensityMatrix> {
        let v = coherent_columns(self.beta, cutoff)?;
        let cm = DMatrix::from_fn(2, 2, |i, j| self.coeffs[(i, j)]);
        DensityMatrix::new(Shape::single(cutoff), &v * cm * v.adjoint())
    }
}

/// Fock columns `[|beta>, |-beta>]`.
pub(crate) fn coherent_columns(beta: f64, cutoff: usize) -> Result<DMatrix<Complex64>> {
    let p = coherent_state(beta, cutoff)?;
    let m = coherent_state(-beta, cutoff)?;
    Ok(DMatrix::from_fn(cutoff, 2, |n, j| if j == 0 { p.amps()[n] } else { m.amps()[n] }))
}

/// Target `N (a|t alpha> + b|-t alpha>)` with
/// `N^-2 = 1 + 2 Re(a b*) exp(-2 t^2 alpha^2)`, as basis amplitudes.
pub fn target_amplitudes(q: &QubitCoeffs, beta: f64) -> Result<Vector2<Complex64>> {
    let n2 = 1.0 + 2.0 * q.coherence() * gram_overlap(beta);
    if n2 <= DEGENERATE {
        return Err(Error::DegenerateBasis);
    }
    Ok(q.vector() / c(n2.sqrt()))
}

pub fn target_coherent_qubit(q: &QubitCoeffs, alpha: f64, t: f64) -> Result<CoherentBasisOp> {
    check_alpha(alpha)?;
    let beta = t * alpha;
    CoherentBasisOp::pure(beta, target_amplitudes(q, beta)?)
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha}")));
    }
    Ok(())
}

/// Operator on (orthonormal auxiliary levels) ⊗ (coherent qubit), stored as
/// coefficients over `(x, u)` with flat index `2x + u`.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridOp {
    aux: usize,
    beta: f64,
    coeffs: DMatrix<Complex64>,
}

impl HybridOp {
    pub fn new(aux: usize, beta: f64, coeffs: DMatrix<Complex64>) -> Result<Self> {
        if coeffs.nrows() != 2 * aux || coeffs.ncols() != 2 * aux {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} coefficients for {aux} auxiliary levels",
                coeffs.nrows(),
                coeffs.ncols()
            )));
        }
        Ok(HybridOp { aux, beta, coeffs })
    }

    pub fn aux(&self) -> usize {
        self.aux
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn coeffs(&self) -> &DMatrix<Complex64> {
        &self.coeffs
    }

    pub fn coeff(&self, x: usize, u: usize, y: usize, v: usize) -> Complex64 {
        self.coeffs[(2 * x + u, 2 * y + v)]
    }

    pub fn trace(&self) -> Complex64 {
        let g = gram(self.beta);
        let mut acc = c(0.0);
        for x in 0..self.aux {
            for u in 0..2 {
                for v in 0..2 {
                    acc += self.coeff(x, u, x, v) * g[(v, u)];
                }
            }
        }
        acc
    }

    /// Expansion with auxiliary level `x` realized as `aux_basis[x]`.
    pub fn materialize_with(&self, aux_basis: &[FockState], cutoff: usize) -> Result<DensityMatrix> {
        if aux_basis.len() != self.aux {
            return Err(Error::ShapeMismatch(format!(
                "{} auxiliary basis states for {} levels",
                aux_basis.len(),
                self.aux
            )));
        }
        let cols = coherent_columns(self.beta, cutoff)?;
        let shape = aux_basis[0].shape().concat(&Shape::single(cutoff));
        let dim = shape.dim();
        let mut w = DMatrix::zeros(dim, 2 * self.aux);
        for (x, e) in aux_basis.iter().enumerate() {
            if e.shape() != aux_basis[0].shape() {
                return Err(Error::ShapeMismatch("auxiliary basis shapes differ".into()));
            }
            for u in 0..2 {
                let col = e.amps().kronecker(&cols.column(u));
                w.set_column(2 * x + u, &col);
            }
        }
        DensityMatrix::new(shape, &w * &self.coeffs * w.adjoint())
    }
}

/// The lossy hybrid channel
/// `1/2 [ |0><0| ⊗ |tα><tα| + (t^2|1><1| + (1-t^2)|0><0|) ⊗ |-tα><-tα|
///        + t e^{-2α^2(1-t^2)} (|0><1| ⊗ |tα><-tα| + h.c.) ]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChannelState {
    pub alpha: f64,
    pub t: f64,
    /// `|0><0| ⊗ |tα><tα|`
    pub vac_plus: f64,
    /// `|1><1| ⊗ |-tα><-tα|`
    pub one_minus: f64,
    /// `|0><0| ⊗ |-tα><-tα|`
    pub vac_minus: f64,
    /// `|0><1| ⊗ |tα><-tα|` and its conjugate
    pub cross: f64,
}

impl ChannelState {
    pub fn new(alpha: f64, t: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidParameter(format!("t = {t} outside (0, 1]")));
        }
        Ok(ChannelState {
            alpha,
            t,
            vac_plus: 0.5,
            one_minus: t * t / 2.0,
            vac_minus: (1.0 - t * t) / 2.0,
            cross: t * decoherence_factor(alpha, t) / 2.0,
        })
    }

    pub fn beta(&self) -> f64 {
        self.t * self.alpha
    }

    /// Sum of the diagonal weights; the coherent states are normalized so
    /// this is the trace.
    pub fn trace(&self) -> f64 {
        self.vac_plus + self.one_minus + self.vac_minus
    }

    /// Coefficients over `(x, u)`: `x` the single-rail level, `u` the
    /// coherent basis index.
    pub fn coeffs(&self) -> HybridOp {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 0)] = c(self.vac_plus);
        m[(1, 1)] = c(self.vac_minus);
        m[(3, 3)] = c(self.one_minus);
        m[(0, 3)] = c(self.cross);
        m[(3, 0)] = c(self.cross);
        HybridOp::new(2, self.beta(), m).expect("4x4")
    }

    /// Fock expansion with the single-rail mode truncated at `s_cutoff`.
    pub fn materialize_in(&self, s_cutoff: usize, cutoff: usize) -> Result<DensityMatrix> {
        let s = Shape::single(s_cutoff);
        let basis = [FockState::basis(s.clone(), &[0])?, FockState::basis(s, &[1])?];
        self.coeffs().materialize_with(&basis, cutoff)
    }
}

impl Materialize for ChannelState {
    fn materialize(&self, cutoff: usize) -> Result<DensityMatrix> {
        self.materialize_in(2, cutoff)
    }
}

/// The polarization–coherent channel `(|H>|α> + |V>|-α>)/√2` after loss
/// on all modes. Auxiliary levels are `H`, `V` and `vac` (photon lost); a
/// lost `H` and a lost `V` leave orthogonal records in the environment, so
/// the vacuum level carries no coherence.
pub fn polarization_channel(alpha: f64, t: f64) -> Result<HybridOp> {
    let ch = ChannelState::new(alpha, t)?;
    let t2 = t * t;
    let mut m = DMatrix::zeros(6, 6);
    m[(0, 0)] = c(t2 / 2.0);
    m[(3, 3)] = c(t2 / 2.0);
    m[(0, 3)] = c(t2 * decoherence_factor(alpha, t) / 2.0);
    m[(3, 0)] = m[(0, 3)];
    m[(4, 4)] = c((1.0 - t2) / 2.0);
    m[(5, 5)] = c((1.0 - t2) / 2.0);
    HybridOp::new(3, ch.beta(), m)
}

/// `exp(-2 alpha^2 (1 - t^2))`, the coherence surviving in the environment.
pub fn decoherence_factor(alpha: f64, t: f64) -> f64 {
    (-2.0 * alpha * alpha * (1.0 - t * t)).exp()
}
