use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{DensityMatrix, FockState, ModeIndex, Shape, ZERO_PROBABILITY};
use crate::error::{Error, Result};

type NumberFilter = Arc<dyn Fn(&[usize]) -> bool + Send + Sync>;

/// Measurement effect on a subset of modes.
#[derive(Clone)]
pub enum Projector {
    /// Sum of number-basis projectors whose photon numbers pass the filter.
    Diagonal(NumberFilter),
    /// `|v><v|` for a (normalized) state on the measured modes.
    Rank1(FockState),
}

impl Projector {
    pub fn numbers(f: impl Fn(&[usize]) -> bool + Send + Sync + 'static) -> Self {
        Projector::Diagonal(Arc::new(f))
    }

    /// Exact photon-number pattern.
    pub fn pattern(ns: &[usize]) -> Self {
        let ns = ns.to_vec();
        Projector::numbers(move |x| x == ns.as_slice())
    }

    pub fn onto(state: FockState) -> Self {
        Projector::Rank1(state)
    }
}

impl fmt::Debug for Projector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Projector::Diagonal(_) => f.write_str("Projector::Diagonal(..)"),
            Projector::Rank1(v) => write!(f, "Projector::Rank1({:?})", v.shape().dims()),
        }
    }
}

struct Split {
    keep: Vec<usize>,
    k_off: Vec<usize>,
    r_off: Vec<usize>,
    k_shape: Shape,
    rest_shape: Shape,
}

fn split(shape: &Shape, modes: &[ModeIndex]) -> Result<Split> {
    let keep = shape.resolve(modes)?;
    let rest = shape.complement(&keep);
    Ok(Split {
        k_off: shape.offsets(&keep),
        r_off: shape.offsets(&rest),
        k_shape: shape.select(&keep),
        // Measuring every mode leaves a trivial one-level system.
        rest_shape: if rest.is_empty() { Shape::single(1) } else { shape.select(&rest) },
        keep,
    })
}

impl Split {
    /// Flags for each measured-mode basis state under a diagonal filter.
    fn mask(&self, f: &NumberFilter) -> Vec<bool> {
        (0..self.k_off.len()).map(|k| f(&self.k_shape.numbers(k))).collect()
    }

    fn rank1<'a>(&self, v: &'a FockState) -> Result<&'a FockState> {
        if v.shape() != &self.k_shape {
            return Err(Error::ShapeMismatch(format!(
                "projector on {:?} for modes {:?} with cutoffs {:?}",
                v.shape().dims(),
                self.keep,
                self.k_shape.dims()
            )));
        }
        Ok(v)
    }
}

/// `P rho P` on the full space together with `Tr(P rho)`.
pub fn project(rho: &DensityMatrix, projector: &Projector, modes: &[ModeIndex]) -> Result<(f64, DensityMatrix)> {
    let sp = split(rho.shape(), modes)?;
    let m = rho.matrix();
    let out = match projector {
        Projector::Diagonal(f) => {
            let mask = sp.mask(f);
            let mut full = vec![false; m.nrows()];
            for (k, &on) in mask.iter().enumerate() {
                if on {
                    for &r in &sp.r_off {
                        full[sp.k_off[k] + r] = true;
                    }
                }
            }
            DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
                if full[i] && full[j] {
                    m[(i, j)]
                } else {
                    Complex64::default()
                }
            })
        }
        Projector::Rank1(v) => {
            let v = sp.rank1(v)?.amps();
            let w = conditional_block(m, &sp, v);
            let mut full = DMatrix::zeros(m.nrows(), m.ncols());
            for (k, &ko) in sp.k_off.iter().enumerate() {
                for (kp, &kpo) in sp.k_off.iter().enumerate() {
                    let c = v[k] * v[kp].conj();
                    if c == Complex64::default() {
                        continue;
                    }
                    for (r, &ro) in sp.r_off.iter().enumerate() {
                        for (rp, &rpo) in sp.r_off.iter().enumerate() {
                            full[(ko + ro, kpo + rpo)] = c * w[(r, rp)];
                        }
                    }
                }
            }
            full
        }
    };
    let p = out.trace().re;
    Ok((p, DensityMatrix::new(rho.shape().clone(), out)?))
}

fn conditional_block(m: &DMatrix<Complex64>, sp: &Split, v: &nalgebra::DVector<Complex64>) -> DMatrix<Complex64> {
    let nr = sp.r_off.len();
    DMatrix::from_fn(nr, nr, |r, rp| {
        let mut acc = Complex64::default();
        for (k, &ko) in sp.k_off.iter().enumerate() {
            let vk = v[k].conj();
            if vk == Complex64::default() {
                continue;
            }
            for (kp, &kpo) in sp.k_off.iter().enumerate() {
                acc += vk * m[(ko + sp.r_off[r], kpo + sp.r_off[rp])] * v[kp];
            }
        }
        acc
    })
}

/// Projects `modes`, traces them out and renormalizes.
///
/// Returns the outcome probability and the post-measurement state of the
/// remaining modes (in their original order). Outcomes with probability at
/// or below [`ZERO_PROBABILITY`] yield [`Error::ZeroProbability`].
pub fn measure(rho: &DensityMatrix, projector: &Projector, modes: &[ModeIndex]) -> Result<(f64, DensityMatrix)> {
    let sp = split(rho.shape(), modes)?;
    let rest = sp.rest_shape.clone();
    let m = rho.matrix();
    let nr = sp.r_off.len();
    let out = match projector {
        Projector::Diagonal(f) => {
            let mask = sp.mask(f);
            DMatrix::from_fn(nr, nr, |r, rp| {
                sp.k_off
                    .iter()
                    .zip(&mask)
                    .filter(|(_, &on)| on)
                    .map(|(&ko, _)| m[(ko + sp.r_off[r], ko + sp.r_off[rp])])
                    .sum()
            })
        }
        Projector::Rank1(v) => conditional_block(m, &sp, sp.rank1(v)?.amps()),
    };
    let p = out.trace().re;
    if p <= ZERO_PROBABILITY {
        return Err(Error::ZeroProbability);
    }
    Ok((p, DensityMatrix::new(rest, out / Complex64::new(p, 0.0))?))
}

/// Like [`measure`] for a pure input, but returns the unnormalized
/// remaining-mode state so branches of an ensemble can be summed.
pub fn measure_pure(psi: &FockState, projector: &Projector, modes: &[ModeIndex]) -> Result<DensityMatrix> {
    let sp = split(psi.shape(), modes)?;
    let rest = sp.rest_shape.clone();
    let a = psi.amps();
    let nr = sp.r_off.len();
    let mat = match projector {
        Projector::Diagonal(f) => {
            let mask = sp.mask(f);
            let on: Vec<usize> = sp.k_off.iter().zip(&mask).filter(|(_, &b)| b).map(|(&k, _)| k).collect();
            let b = DMatrix::from_fn(nr, on.len(), |r, k| a[on[k] + sp.r_off[r]]);
            &b * b.adjoint()
        }
        Projector::Rank1(v) => {
            let v = sp.rank1(v)?.amps();
            let u = nalgebra::DVector::from_fn(nr, |r, _| {
                sp.k_off
                    .iter()
                    .enumerate()
                    .map(|(k, &ko)| v[k].conj() * a[ko + sp.r_off[r]])
                    .sum::<Complex64>()
            });
            &u * u.adjoint()
        }
    };
    DensityMatrix::new(rest, mat)
}
