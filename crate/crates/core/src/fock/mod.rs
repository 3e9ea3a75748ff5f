//! Dense linear algebra over a truncated multi-mode Fock basis.
//!
//! Every mode carries its own cutoff `d` (photon numbers `0..d`). Basis states
//! are laid out row-major with mode 0 most significant, so a two-mode state
//! with cutoffs `(3, 4)` stores `|n0, n1>` at index `4 * n0 + n1`.

mod beam_splitter;
mod projector;

pub use beam_splitter::{beam_splitter, sector_unitary, BeamSplit, MAX_SECTOR};
pub use projector::{measure, measure_pure, project, Projector};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Probability mass tolerated at the top of a truncated mode.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Largest coherent amplitude the numeric backend accepts.
pub const NUMERIC_ALPHA_MAX: f64 = 3.0;

/// Projections with probability at or below this are treated as impossible.
pub const ZERO_PROBABILITY: f64 = 1e-14;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// Cutoff for a mode whose coherent amplitude never exceeds `amplitude`.
///
/// `a^2 + 8a + 12` keeps roughly eight standard deviations of the Poisson
/// photon-number distribution, which puts the tail far below
/// [`TAIL_TOLERANCE`].
pub fn cutoff_for(amplitude: f64) -> usize {
    let a = amplitude.abs();
    (a * a + 8.0 * a + 12.0).ceil() as usize
}

/// Checks that `alpha` is within the range the numeric backend supports.
pub fn check_numeric_alpha(alpha: f64) -> Result<()> {
    if alpha.abs() > NUMERIC_ALPHA_MAX {
        return Err(Error::BackendOverflow {
            alpha,
            max: NUMERIC_ALPHA_MAX,
        });
    }
    Ok(())
}

/// Label of one mode inside a multi-mode state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeIndex(pub usize);

/// Per-mode cutoffs of a multi-mode Fock space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    dims: Vec<usize>,
}

impl Shape {
    pub fn new(dims: Vec<usize>) -> Self {
        assert!(!dims.is_empty(), "a Fock space needs at least one mode");
        assert!(dims.iter().all(|&d| d > 0), "cutoffs must be positive");
        Shape { dims }
    }

    pub fn single(cutoff: usize) -> Self {
        Shape::new(vec![cutoff])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn modes(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn cutoff(&self, mode: ModeIndex) -> Result<usize> {
        self.check(mode).map(|m| self.dims[m])
    }

    pub fn check(&self, mode: ModeIndex) -> Result<usize> {
        if mode.0 < self.dims.len() {
            Ok(mode.0)
        } else {
            Err(Error::ModeOutOfRange {
                mode: mode.0,
                modes: self.dims.len(),
            })
        }
    }

    pub(crate) fn stride(&self, mode: usize) -> usize {
        self.dims[mode + 1..].iter().product()
    }

    /// Photon numbers of every mode for a flat basis index.
    pub fn numbers(&self, mut index: usize) -> Vec<usize> {
        let mut ns = vec![0; self.dims.len()];
        for (m, &d) in self.dims.iter().enumerate().rev() {
            ns[m] = index % d;
            index /= d;
        }
        ns
    }

    /// Flat basis index of a photon-number tuple, if it fits under the cutoffs.
    pub fn index(&self, numbers: &[usize]) -> Option<usize> {
        if numbers.len() != self.dims.len() {
            return None;
        }
        let mut idx = 0;
        for (&n, &d) in numbers.iter().zip(&self.dims) {
            if n >= d {
                return None;
            }
            idx = idx * d + n;
        }
        Some(idx)
    }

    pub fn concat(&self, other: &Shape) -> Shape {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Shape::new(dims)
    }

    pub fn select(&self, modes: &[usize]) -> Shape {
        Shape::new(modes.iter().map(|&m| self.dims[m]).collect())
    }

    /// Flat-index contributions of every photon-number combination on
    /// `modes`, enumerated row-major in the order given.
    pub(crate) fn offsets(&self, modes: &[usize]) -> Vec<usize> {
        let mut out = vec![0usize];
        for &m in modes {
            let stride = self.stride(m);
            let d = self.dims[m];
            out = out
                .iter()
                .flat_map(|&o| (0..d).map(move |n| o + n * stride))
                .collect();
        }
        out
    }

    pub(crate) fn resolve(&self, modes: &[ModeIndex]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(modes.len());
        for &m in modes {
            let m = self.check(m)?;
            if out.contains(&m) {
                return Err(Error::ShapeMismatch(format!("mode {m} listed twice")));
            }
            out.push(m);
        }
        Ok(out)
    }

    pub(crate) fn complement(&self, modes: &[usize]) -> Vec<usize> {
        (0..self.modes()).filter(|m| !modes.contains(m)).collect()
    }
}

/// Applies a single-mode operator in place to a state vector.
pub(crate) fn apply_local_slice(v: &mut [Complex64], shape: &Shape, mode: usize, op: &DMatrix<Complex64>) {
    let d = shape.dims[mode];
    let stride = shape.stride(mode);
    let block = d * stride;
    let mut buf = vec![C0; d];
    for base in (0..v.len()).step_by(block) {
        for i in 0..stride {
            for (k, b) in buf.iter_mut().enumerate() {
                *b = v[base + i + k * stride];
            }
            for k in 0..d {
                let mut acc = C0;
                for (j, b) in buf.iter().enumerate() {
                    acc += op[(k, j)] * b;
                }
                v[base + i + k * stride] = acc;
            }
        }
    }
}

/// `A rho A^dagger` for a linear map `A` given as an in-place vector transform.
pub(crate) fn sandwich(mat: &DMatrix<Complex64>, f: impl Fn(&mut [Complex64])) -> DMatrix<Complex64> {
    let n = mat.nrows();
    let mut m = mat.clone();
    m.as_mut_slice().chunks_mut(n).for_each(&f);
    let mut m = m.adjoint();
    m.as_mut_slice().chunks_mut(n).for_each(&f);
    m.adjoint()
}

/// Flat indices of the old basis inside a shape with `mode` enlarged.
fn embedding(shape: &Shape, mode: usize, cutoff: usize) -> Result<(Shape, Vec<usize>)> {
    if cutoff < shape.dims[mode] {
        return Err(Error::ShapeMismatch(format!(
            "cannot shrink mode {mode} from {} to {cutoff}",
            shape.dims[mode]
        )));
    }
    let mut dims = shape.dims.clone();
    dims[mode] = cutoff;
    let big = Shape::new(dims);
    let map = (0..shape.dim())
        .map(|i| big.index(&shape.numbers(i)).expect("fits"))
        .collect();
    Ok((big, map))
}

/// A pure (not necessarily normalized) state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    shape: Shape,
    amps: DVector<Complex64>,
}

impl FockState {
    pub fn new(shape: Shape, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != shape.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} amplitudes for a {}-dimensional space",
                amps.len(),
                shape.dim()
            )));
        }
        Ok(FockState {
            shape,
            amps: DVector::from_vec(amps),
        })
    }

    pub fn from_fn(shape: Shape, f: impl Fn(&[usize]) -> Complex64) -> Self {
        let amps = (0..shape.dim()).map(|i| f(&shape.numbers(i))).collect();
        FockState {
            shape,
            amps: DVector::from_vec(amps),
        }
    }

    pub fn basis(shape: Shape, numbers: &[usize]) -> Result<Self> {
        let idx = shape.index(numbers).ok_or_else(|| {
            Error::ShapeMismatch(format!("{numbers:?} does not fit cutoffs {:?}", shape.dims()))
        })?;
        let mut amps = DVector::zeros(shape.dim());
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(FockState { shape, amps })
    }

    pub fn vacuum(shape: Shape) -> Self {
        let zeros = vec![0; shape.modes()];
        Self::basis(shape, &zeros).expect("vacuum always fits")
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn amps(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn amp(&self, numbers: &[usize]) -> Complex64 {
        self.shape.index(numbers).map_or(C0, |i| self.amps[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n <= ZERO_PROBABILITY {
            return Err(Error::ZeroProbability);
        }
        Ok(self.scaled(Complex64::new(1.0 / n.sqrt(), 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        FockState {
            shape: self.shape.clone(),
            amps: &self.amps * c,
        }
    }

    pub fn plus(&self, other: &FockState) -> Result<Self> {
        self.same_shape(other)?;
        Ok(FockState {
            shape: self.shape.clone(),
            amps: &self.amps + &other.amps,
        })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &FockState) -> Result<Complex64> {
        self.same_shape(other)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Same state in a space where `mode` has a larger cutoff.
    pub fn with_cutoff(&self, mode: ModeIndex, cutoff: usize) -> Result<Self> {
        let m = self.shape.check(mode)?;
        let (shape, map) = embedding(&self.shape, m, cutoff)?;
        let mut amps = DVector::zeros(shape.dim());
        for (i, &j) in map.iter().enumerate() {
            amps[j] = self.amps[i];
        }
        Ok(FockState { shape, amps })
    }

    pub fn tensor(&self, other: &FockState) -> FockState {
        FockState {
            shape: self.shape.concat(&other.shape),
            amps: self.amps.kronecker(&other.amps),
        }
    }

    /// Marginal probability of `mode` holding at least `cutoff - 2` photons.
    pub fn tail_mass(&self, mode: ModeIndex) -> Result<f64> {
        let m = self.shape.check(mode)?;
        let top = self.shape.dims[m].saturating_sub(2);
        Ok((0..self.shape.dim())
            .filter(|&i| self.shape.numbers(i)[m] >= top)
            .map(|i| self.amps[i].norm_sqr())
            .sum())
    }

    pub fn apply_local(&self, mode: ModeIndex, op: &DMatrix<Complex64>) -> Result<Self> {
        let m = self.shape.check(mode)?;
        check_square(op, self.shape.dims[m])?;
        let mut out = self.clone();
        apply_local_slice(out.amps.as_mut_slice(), &self.shape, m, op);
        Ok(out)
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            shape: self.shape.clone(),
            mat: &self.amps * self.amps.adjoint(),
        }
    }

    /// Reduced state `Tr_rest |psi><psi|` on `keep`, unnormalized.
    pub fn reduced(&self, keep: &[ModeIndex]) -> Result<DensityMatrix> {
        let keep = self.shape.resolve(keep)?;
        let rest = self.shape.complement(&keep);
        let ko = self.shape.offsets(&keep);
        let ro = self.shape.offsets(&rest);
        let a = DMatrix::from_fn(ko.len(), ro.len(), |i, r| self.amps[ko[i] + ro[r]]);
        Ok(DensityMatrix {
            shape: self.shape.select(&keep),
            mat: &a * a.adjoint(),
        })
    }

    fn same_shape(&self, other: &FockState) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape.dims(),
                other.shape.dims()
            )));
        }
        Ok(())
    }
}

fn check_square(op: &DMatrix<Complex64>, d: usize) -> Result<()> {
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} operator on a mode of cutoff {d}",
            op.nrows(),
            op.ncols()
        )));
    }
    Ok(())
}

/// Coherent state `|alpha>` truncated to `cutoff` photon numbers.
///
/// Fails with [`Error::TailTooLarge`] when the probability at
/// `n >= cutoff - 2` of the untruncated state exceeds [`TAIL_TOLERANCE`];
/// otherwise the truncated vector is renormalized.
pub fn coherent_state(alpha: f64, cutoff: usize) -> Result<FockState> {
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha = {alpha}")));
    }
    let top = cutoff.saturating_sub(2);
    let mut amp = (-alpha * alpha / 2.0).exp();
    let mut amps = Vec::with_capacity(cutoff);
    let mut tail = 0.0;
    let mut n = 0usize;
    loop {
        if n < cutoff {
            amps.push(Complex64::new(amp, 0.0));
        }
        if n >= top {
            tail += amp * amp;
        }
        if n >= cutoff && (amp * amp < 1e-30 * tail.max(1e-300) || amp == 0.0) {
            break;
        }
        n += 1;
        amp *= alpha / (n as f64).sqrt();
    }
    if tail > TAIL_TOLERANCE {
        return Err(Error::TailTooLarge { tail, cutoff });
    }
    FockState::new(Shape::single(cutoff), amps)?.normalized()
}

/// Mixed state over a multi-mode Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    shape: Shape,
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(shape: Shape, mat: DMatrix<Complex64>) -> Result<Self> {
        let d = shape.dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix for a {d}-dimensional space",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(DensityMatrix { shape, mat })
    }

    pub fn from_pure(state: &FockState) -> Self {
        state.projector()
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn scaled(&self, c: f64) -> Self {
        DensityMatrix {
            shape: self.shape.clone(),
            mat: &self.mat * Complex64::new(c, 0.0),
        }
    }

    pub fn plus(&self, other: &DensityMatrix) -> Result<Self> {
        self.same_shape(other)?;
        Ok(DensityMatrix {
            shape: self.shape.clone(),
            mat: &self.mat + &other.mat,
        })
    }

    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr <= ZERO_PROBABILITY {
            return Err(Error::ZeroProbability);
        }
        Ok(self.scaled(1.0 / tr))
    }

    /// Same state in a space where `mode` has a larger cutoff.
    pub fn with_cutoff(&self, mode: ModeIndex, cutoff: usize) -> Result<Self> {
        let m = self.shape.check(mode)?;
        let (shape, map) = embedding(&self.shape, m, cutoff)?;
        let mut mat = DMatrix::zeros(shape.dim(), shape.dim());
        for (i, &a) in map.iter().enumerate() {
            for (j, &b) in map.iter().enumerate() {
                mat[(a, b)] = self.mat[(i, j)];
            }
        }
        Ok(DensityMatrix { shape, mat })
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            shape: self.shape.concat(&other.shape),
            mat: self.mat.kronecker(&other.mat),
        }
    }

    /// Population of the basis state with the given photon numbers.
    pub fn population(&self, numbers: &[usize]) -> f64 {
        self.shape.index(numbers).map_or(0.0, |i| self.mat[(i, i)].re)
    }

    /// `A rho A^dagger` for a single-mode operator `A`.
    pub fn apply_local(&self, mode: ModeIndex, op: &DMatrix<Complex64>) -> Result<Self> {
        let m = self.shape.check(mode)?;
        check_square(op, self.shape.dims[m])?;
        let shape = &self.shape;
        Ok(DensityMatrix {
            shape: shape.clone(),
            mat: sandwich(&self.mat, |v| apply_local_slice(v, shape, m, op)),
        })
    }

    /// `sum_k E_k rho E_k^dagger` on one mode.
    pub fn apply_kraus(&self, mode: ModeIndex, ops: &[DMatrix<Complex64>]) -> Result<Self> {
        let mut acc = DMatrix::zeros(self.mat.nrows(), self.mat.ncols());
        for op in ops {
            acc += self.apply_local(mode, op)?.mat;
        }
        Ok(DensityMatrix {
            shape: self.shape.clone(),
            mat: acc,
        })
    }

    /// `U rho U^dagger` for an operator on the full space.
    pub fn conjugate(&self, op: &DMatrix<Complex64>) -> Result<Self> {
        check_square(op, self.shape.dim())?;
        Ok(DensityMatrix {
            shape: self.shape.clone(),
            mat: op * &self.mat * op.adjoint(),
        })
    }

    pub fn partial_trace(&self, keep: &[ModeIndex]) -> Result<DensityMatrix> {
        let keep = self.shape.resolve(keep)?;
        let rest = self.shape.complement(&keep);
        let ko = self.shape.offsets(&keep);
        let ro = self.shape.offsets(&rest);
        let mat = DMatrix::from_fn(ko.len(), ko.len(), |i, j| {
            ro.iter().map(|&r| self.mat[(ko[i] + r, ko[j] + r)]).sum()
        });
        Ok(DensityMatrix {
            shape: self.shape.select(&keep),
            mat,
        })
    }

    /// Largest absolute entry of `rho - rho^dagger`.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.mat - self.mat.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    fn hermitian_part(&self) -> DMatrix<Complex64> {
        (&self.mat + self.mat.adjoint()) * Complex64::new(0.5, 0.0)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.hermitian_part())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    /// Trace distance `||rho - sigma||_1 / 2`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.same_shape(other)?;
        let diff = DensityMatrix {
            shape: self.shape.clone(),
            mat: &self.mat - &other.mat,
        };
        Ok(0.5 * diff.eigenvalues().iter().map(|l| l.abs()).sum::<f64>())
    }

    /// Decomposes `rho` into unnormalized pure branches `rho = sum |v><v|`,
    /// dropping eigenvalues at or below `threshold`.
    pub fn branches(&self, threshold: f64) -> Vec<FockState> {
        let eig = SymmetricEigen::new(self.hermitian_part());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        order
            .into_iter()
            .filter(|&k| eig.eigenvalues[k] > threshold)
            .map(|k| FockState {
                shape: self.shape.clone(),
                amps: eig.eigenvectors.column(k) * Complex64::new(eig.eigenvalues[k].sqrt(), 0.0),
            })
            .collect()
    }

    fn same_shape(&self, other: &DensityMatrix) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape.dims(),
                other.shape.dims()
            )));
        }
        Ok(())
    }
}

pub fn partial_trace(state: &DensityMatrix, keep: &[ModeIndex]) -> Result<DensityMatrix> {
    state.partial_trace(keep)
}

/// `<target|rho|target>`, unclamped.
pub fn fidelity(target: &FockState, rho: &DensityMatrix) -> Result<f64> {
    if target.shape != rho.shape {
        return Err(Error::ShapeMismatch(format!(
            "target {:?} vs state {:?}",
            target.shape.dims(),
            rho.shape.dims()
        )));
    }
    Ok(target.amps.dotc(&(&rho.mat * &target.amps)).re)
}

/// Photon-number parity `exp(i pi n)` on a mode of the given cutoff.
pub fn parity_operator(cutoff: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(cutoff, cutoff, |i, j| {
        if i != j {
            C0
        } else if i % 2 == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn cutoff_rule() {
        assert_eq!(cutoff_for(0.0), 12);
        assert_eq!(cutoff_for(1.0), 21);
        assert_eq!(cutoff_for(2.0 * 2f64.sqrt()), 43);
    }

    #[test]
    fn vacuum_coherent_state() {
        let v = coherent_state(0.0, 12).unwrap();
        assert_eq!(v.amp(&[0]), c(1.0));
        assert!((v.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coherent_overlap_closed_form() {
        let n = cutoff_for(1.0);
        let p = coherent_state(1.0, n).unwrap();
        let m = coherent_state(-1.0, n).unwrap();
        let ov = p.inner(&m).unwrap();
        assert!((ov.re - (-2.0f64).exp()).abs() < 1e-12);
        assert!((ov.re - 0.135335).abs() < 1e-6);
    }

    #[test]
    fn coherent_state_normalized_after_truncation() {
        let v = coherent_state(2.0, cutoff_for(2.0 * 2f64.sqrt())).unwrap();
        assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(v.tail_mass(ModeIndex(0)).unwrap() < TAIL_TOLERANCE);
    }

    #[test]
    fn coherent_state_rejects_short_cutoff() {
        assert!(matches!(coherent_state(3.0, 10), Err(Error::TailTooLarge { .. })));
    }

    #[test]
    fn general_overlap_formula() {
        let n = cutoff_for(2.0);
        for &(a, b) in &[(0.3, -1.2), (1.5, 0.7), (-2.0, 2.0)] {
            let x = coherent_state(a, n).unwrap();
            let y = coherent_state(b, n).unwrap();
            let expect = (-(a * a + b * b) / 2.0 + a * b).exp();
            assert!((x.inner(&y).unwrap().re - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn shape_indexing_round_trips() {
        let s = Shape::new(vec![3, 4, 2]);
        for i in 0..s.dim() {
            assert_eq!(s.index(&s.numbers(i)), Some(i));
        }
        assert_eq!(s.index(&[1, 2, 1]), Some(8 + 4 + 1));
        assert_eq!(s.index(&[3, 0, 0]), None);
    }

    #[test]
    fn partial_trace_of_product_is_factor() {
        let a = coherent_state(0.7, 15).unwrap();
        let b = FockState::new(Shape::single(3), vec![c(0.6), Complex64::new(0.0, 0.8), c(0.0)]).unwrap();
        let rho = a.tensor(&b).projector();
        let ra = rho.partial_trace(&[ModeIndex(0)]).unwrap();
        let rb = rho.partial_trace(&[ModeIndex(1)]).unwrap();
        assert!(ra.trace_distance(&a.projector()).unwrap() < 1e-14);
        assert!(rb.trace_distance(&b.projector()).unwrap() < 1e-14);
        assert!((ra.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_of_hybrid_state() {
        // Independent reference: plain series for <-alpha|alpha>.
        let alpha: f64 = 1.0;
        let n = cutoff_for(alpha);
        let mut series = 0.0;
        let mut term = (-alpha * alpha).exp();
        for k in 0..60 {
            if k > 0 {
                term *= alpha * alpha / k as f64;
            }
            series += if k % 2 == 0 { term } else { -term };
        }
        let s = Shape::single(2);
        let plus = coherent_state(alpha, n).unwrap();
        let minus = coherent_state(-alpha, n).unwrap();
        let psi = FockState::basis(s.clone(), &[0])
            .unwrap()
            .tensor(&plus)
            .plus(&FockState::basis(s, &[1]).unwrap().tensor(&minus))
            .unwrap()
            .scaled(c(std::f64::consts::FRAC_1_SQRT_2));
        let red = psi.projector().partial_trace(&[ModeIndex(0)]).unwrap();
        let m = red.matrix();
        assert!((m[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((m[(1, 1)].re - 0.5).abs() < 1e-12);
        assert!((m[(0, 1)].re - series / 2.0).abs() < 1e-12);
        assert!((m[(1, 0)].re - series / 2.0).abs() < 1e-12);
        assert!((red.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let s = Shape::single(2);
        let zero = FockState::basis(s.clone(), &[0]).unwrap();
        let one = FockState::basis(s.clone(), &[1]).unwrap();
        assert!((fidelity(&zero, &zero.projector()).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity(&zero, &one.projector()).unwrap().abs() < 1e-15);
        let mix = DensityMatrix::new(s, DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.7), c(0.3)]))).unwrap();
        assert!((fidelity(&zero, &mix).unwrap() - 0.7).abs() < 1e-15);
        let other = FockState::vacuum(Shape::single(3));
        assert!(matches!(fidelity(&other, &mix), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn branches_reconstruct_state() {
        let a = coherent_state(0.5, 12).unwrap();
        let b = coherent_state(-0.5, 12).unwrap();
        let rho = a.projector().scaled(0.3).plus(&b.projector().scaled(0.7)).unwrap();
        let br = rho.branches(1e-14);
        assert_eq!(br.len(), 2);
        let mut back = DMatrix::zeros(12, 12);
        for v in &br {
            back += v.projector().matrix();
        }
        assert!((back - rho.matrix()).norm() < 1e-13);
    }

    #[test]
    fn mode_out_of_range() {
        let v = FockState::vacuum(Shape::single(3));
        assert!(matches!(
            v.reduced(&[ModeIndex(1)]),
            Err(Error::ModeOutOfRange { mode: 1, modes: 1 })
        ));
    }
}
