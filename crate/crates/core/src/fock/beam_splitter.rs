//! 50:50 beam splitter `U = exp(pi/4 (a0^dag a1 - a1^dag a0))`.
//!
//! `U` conserves total photon number, so it is applied one sector
//! `n0 + n1 = M` at a time. Within a sector, in the basis `k = n0`, the
//! generator is real antisymmetric with `K[k+1][k] = sqrt((k+1)(M-k))`.
//! Writing `K = -i P S P^dag` with `P = diag(i^k)` and `S` the symmetric
//! tridiagonal matrix with those off-diagonals gives
//! `U = P exp(-i pi/4 S) P^dag`; `S` has the integer spectrum
//! `-M, -M+2, .., M`, which we snap to exactly.
//!
//! On creation operators this is `a0^dag -> (a0^dag - a1^dag)/sqrt2`,
//! `a1^dag -> (a0^dag + a1^dag)/sqrt2`, hence on coherent states
//! `|a>|b> -> |(a+b)/sqrt2>|(b-a)/sqrt2>`.

use std::f64::consts::FRAC_PI_4;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{sandwich, DensityMatrix, FockState, ModeIndex, Shape, TAIL_TOLERANCE};
use crate::error::{Error, Result};

/// Largest total photon number with a cached sector matrix.
pub const MAX_SECTOR: usize = 511;

static SECTORS: [OnceLock<DMatrix<f64>>; MAX_SECTOR + 1] = [const { OnceLock::new() }; MAX_SECTOR + 1];

/// Real `(M+1) x (M+1)` matrix `U[p][k] = <p, M-p| U |k, M-k>`.
pub fn sector_unitary(total: usize) -> &'static DMatrix<f64> {
    assert!(total <= MAX_SECTOR, "photon-number sector {total} exceeds {MAX_SECTOR}");
    SECTORS[total].get_or_init(|| compute_sector(total))
}

fn compute_sector(total: usize) -> DMatrix<f64> {
    let n = total + 1;
    let mut s = DMatrix::<f64>::zeros(n, n);
    for k in 0..total {
        let v = (((k + 1) * (total - k)) as f64).sqrt();
        s[(k + 1, k)] = v;
        s[(k, k + 1)] = v;
    }
    let eig = SymmetricEigen::new(s);
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&l| Complex64::from_polar(1.0, -FRAC_PI_4 * l.round()))
        .collect();
    let v = &eig.eigenvectors;
    // i^(p-k): the real part is all that survives.
    let ipow = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    DMatrix::from_fn(n, n, |p, k| {
        let acc: Complex64 = (0..n).map(|j| phases[j] * (v[(p, j)] * v[(k, j)])).sum();
        (ipow[(p + 4 * n - k) % 4] * acc).re
    })
}

/// Applies the beam splitter in place; returns the norm lost above the cutoff.
fn apply_slice(v: &mut [Complex64], shape: &Shape, m0: usize, m1: usize) -> f64 {
    let d = shape.dims()[m0];
    let (s0, s1) = (shape.stride(m0), shape.stride(m1));
    let mut block = vec![Complex64::default(); d * d];
    let mut out = vec![Complex64::default(); d * d];
    let mut lost = 0.0;
    for base in 0..v.len() {
        if (base / s0) % d != 0 || (base / s1) % d != 0 {
            continue;
        }
        for n0 in 0..d {
            for n1 in 0..d {
                block[n0 * d + n1] = v[base + n0 * s0 + n1 * s1];
            }
        }
        for total in 0..=2 * (d - 1) {
            let u = sector_unitary(total);
            let lo = total.saturating_sub(d - 1);
            let hi = total.min(d - 1);
            for p in 0..=total {
                let acc: Complex64 = (lo..=hi).map(|k| block[k * d + total - k] * u[(p, k)]).sum();
                if p >= lo && p <= hi {
                    out[p * d + total - p] = acc;
                } else {
                    lost += acc.norm_sqr();
                }
            }
        }
        for n0 in 0..d {
            for n1 in 0..d {
                v[base + n0 * s0 + n1 * s1] = out[n0 * d + n1];
            }
        }
    }
    lost
}

fn check_modes(shape: &Shape, m0: ModeIndex, m1: ModeIndex) -> Result<(usize, usize)> {
    let a = shape.check(m0)?;
    let b = shape.check(m1)?;
    if a == b {
        return Err(Error::ShapeMismatch(format!("beam splitter on mode {a} twice")));
    }
    let (da, db) = (shape.dims()[a], shape.dims()[b]);
    if da != db {
        return Err(Error::CutoffMismatch(da, db));
    }
    Ok((a, b))
}

/// States the beam splitter can act on.
pub trait BeamSplit: Sized {
    fn beam_split(&self, m0: ModeIndex, m1: ModeIndex) -> Result<Self>;
}

impl BeamSplit for FockState {
    fn beam_split(&self, m0: ModeIndex, m1: ModeIndex) -> Result<Self> {
        let (a, b) = check_modes(self.shape(), m0, m1)?;
        let mut out = self.clone();
        let lost = apply_slice(out.amps.as_mut_slice(), &self.shape, a, b);
        if lost > TAIL_TOLERANCE * self.norm_sqr().max(1.0) {
            return Err(Error::TruncationLeakage(lost));
        }
        Ok(out)
    }
}

impl BeamSplit for DensityMatrix {
    fn beam_split(&self, m0: ModeIndex, m1: ModeIndex) -> Result<Self> {
        let (a, b) = check_modes(self.shape(), m0, m1)?;
        let shape = &self.shape;
        let mat = sandwich(&self.mat, |v| {
            apply_slice(v, shape, a, b);
        });
        let lost = self.trace() - mat.trace().re;
        if lost > TAIL_TOLERANCE * self.trace().max(1.0) {
            return Err(Error::TruncationLeakage(lost));
        }
        Ok(DensityMatrix {
            shape: shape.clone(),
            mat,
        })
    }
}

/// Beam splitter with `m0` playing the role of `a0` above.
pub fn beam_splitter<S: BeamSplit>(state: &S, m0: ModeIndex, m1: ModeIndex) -> Result<S> {
    state.beam_split(m0, m1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, cutoff_for, parity_operator};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn sectors_are_orthogonal() {
        for total in [0, 1, 2, 7, 40, 120] {
            let u = sector_unitary(total);
            let err = (u.transpose() * u - DMatrix::identity(total + 1, total + 1)).norm();
            assert!(err < 1e-12, "sector {total}: {err}");
        }
    }

    #[test]
    fn single_photon_rules() {
        let s = Shape::new(vec![3, 3]);
        let h = FRAC_1_SQRT_2;
        let out = FockState::basis(s.clone(), &[1, 0]).unwrap().beam_split(ModeIndex(0), ModeIndex(1)).unwrap();
        assert!((out.amp(&[1, 0]) - r(h)).norm() < 1e-15);
        assert!((out.amp(&[0, 1]) - r(-h)).norm() < 1e-15);
        let out = FockState::basis(s.clone(), &[0, 1]).unwrap().beam_split(ModeIndex(0), ModeIndex(1)).unwrap();
        assert!((out.amp(&[1, 0]) - r(h)).norm() < 1e-15);
        assert!((out.amp(&[0, 1]) - r(h)).norm() < 1e-15);
        // |11> -> (|20> - |02>)/sqrt2
        let out = FockState::basis(s, &[1, 1]).unwrap().beam_split(ModeIndex(0), ModeIndex(1)).unwrap();
        assert!((out.amp(&[2, 0]) - r(h)).norm() < 1e-15);
        assert!((out.amp(&[0, 2]) - r(-h)).norm() < 1e-15);
        assert!(out.amp(&[1, 1]).norm() < 1e-15);
    }

    #[test]
    fn coherent_pair_convention() {
        let (a, b) = (0.8, -0.3);
        let n = cutoff_for(2.0);
        let input = coherent_state(a, n).unwrap().tensor(&coherent_state(b, n).unwrap());
        let out = input.beam_split(ModeIndex(0), ModeIndex(1)).unwrap();
        let s2 = 2f64.sqrt();
        let expect = coherent_state((a + b) / s2, n)
            .unwrap()
            .tensor(&coherent_state((b - a) / s2, n).unwrap());
        assert!((out.amps() - expect.amps()).norm() < 1e-12);
    }

    #[test]
    fn fourth_power_is_parity() {
        let n = 8;
        let s = Shape::new(vec![n, n]);
        let psi = FockState::from_fn(s.clone(), |ns| {
            if ns[0] + ns[1] < n {
                Complex64::new(0.1 * ns[0] as f64 + 0.3, 0.2 * ns[1] as f64 - 0.1)
            } else {
                Complex64::default()
            }
        });
        let mut out = psi.clone();
        for _ in 0..4 {
            out = out.beam_split(ModeIndex(0), ModeIndex(1)).unwrap();
        }
        let expect = psi
            .apply_local(ModeIndex(0), &parity_operator(n))
            .unwrap()
            .apply_local(ModeIndex(1), &parity_operator(n))
            .unwrap();
        assert!((out.amps() - expect.amps()).norm() < 1e-12);
    }

    #[test]
    fn square_swaps_with_sign() {
        let s = Shape::new(vec![4, 4]);
        let psi = FockState::basis(s, &[1, 2]).unwrap();
        let out = psi
            .beam_split(ModeIndex(0), ModeIndex(1))
            .unwrap()
            .beam_split(ModeIndex(0), ModeIndex(1))
            .unwrap();
        assert!((out.amp(&[2, 1]) - r(-1.0)).norm() < 1e-14);
    }

    #[test]
    fn density_matrix_matches_pure() {
        let n = cutoff_for(1.0);
        let s = Shape::single(2);
        let psi = FockState::basis(s, &[1])
            .unwrap()
            .tensor(&coherent_state(0.6, n).unwrap())
            .tensor(&coherent_state(-0.4, n).unwrap());
        let pure = psi.beam_split(ModeIndex(1), ModeIndex(2)).unwrap().projector();
        let mixed = psi.projector().beam_split(ModeIndex(1), ModeIndex(2)).unwrap();
        assert!((pure.matrix() - mixed.matrix()).norm() < 1e-12);
    }

    #[test]
    fn leakage_and_mismatch() {
        let s = Shape::new(vec![3, 3]);
        let psi = FockState::basis(s, &[2, 2]).unwrap();
        assert!(matches!(
            psi.beam_split(ModeIndex(0), ModeIndex(1)),
            Err(Error::TruncationLeakage(_))
        ));
        let psi = FockState::vacuum(Shape::new(vec![3, 4]));
        assert!(matches!(
            psi.beam_split(ModeIndex(0), ModeIndex(1)),
            Err(Error::CutoffMismatch(3, 4))
        ));
    }
}
