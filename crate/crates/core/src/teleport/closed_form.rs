//! Published closed-form fidelities and success probabilities.
//!
//! Notation: `g = exp(-2 t^2 α^2)` (basis overlap), `e = exp(-2 α^2 (1 - t^2))`
//! (coherence surviving loss), `N^-2 = 1 + 2 Re(a b*) g`.

use serde::Serialize;

use super::{Direction, Formula};
use crate::hybrid::{decoherence_factor, gram_overlap, QubitCoeffs};
use crate::loss::LossParams;

/// Per-input fidelity from the closed-form expressions.
///
/// For `c2p` the printed cross term `e |a|^2 |b|^2` lacks a factor 2 (the
/// corrected form gives 1 at `t = 1` and reproduces the published average).
/// For `p2c` the printed cross term conjugates the wrong factors; the
/// corrected form is `2 e Re[a b* (a* + b* g)(a g + b)]`.
pub fn fidelity_closed_form(direction: Direction, q: &QubitCoeffs, alpha: f64, loss: &LossParams, formula: Formula) -> f64 {
    let t = loss.t();
    let t2 = t * t;
    let (a, b) = (q.a, q.b);
    let (pa, pb) = (q.p0(), q.p1());
    let g = gram_overlap(t * alpha);
    let e = decoherence_factor(alpha, t);
    let n2 = 1.0 / (1.0 + 2.0 * q.coherence() * g);
    match direction {
        Direction::S2C => {
            let m = 1.0 / ((2.0 - t2) * pa + t2 * pb + 2.0 * t * (-2.0 * alpha * alpha).exp() * q.coherence());
            let cross = (a * b.conj() * (a * g + b) * (a.conj() + b.conj() * g)).re;
            n2 * m
                * ((a * (a + b * g)).norm_sqr()
                    + ((1.0 - t2) * pa + t2 * pb) * (a * g + b).norm_sqr()
                    + 2.0 * t * e * cross)
        }
        Direction::C2S => pa * pa + ((1.0 - t2) + 2.0 * t * e) * pa * pb + t2 * pb * pb,
        Direction::C2P => {
            let k = match formula {
                Formula::Printed => 1.0,
                Formula::Corrected => 2.0,
            };
            t2 * (pa * pa + pb * pb + k * e * pa * pb)
        }
        Direction::P2C => {
            let s = 1.0 / (1.0 + 2.0 * (-2.0 * alpha * alpha).exp() * q.coherence());
            let cross = match formula {
                Formula::Printed => (a * b.conj() * (a + b * g) * (a.conj() * g + b.conj())).re,
                Formula::Corrected => (a * b.conj() * (a.conj() + b.conj() * g) * (a * g + b)).re,
            };
            n2 * s * ((a * (a + b * g)).norm_sqr() + (b * (a * g + b)).norm_sqr() + 2.0 * e * cross)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuccessProbability {
    pub value: f64,
    /// The value is the analytic limit at a singular point.
    pub limit: bool,
}

/// Input-averaged success probability.
///
/// * s2c: 1/2
/// * c2s: `(1 - exp(-2 t^2 α^2)) / 2`
/// * p2c: `t^2 / 2`
/// * c2p: `(e^{2x} - 1)/2 · ln((1 + e^{-2x}) / (1 - e^{-2x}))`, `x = α^2 t^2`,
///   evaluated as `(1 - g) artanh(g) / g`; at `x = 0` the limit 0 is
///   returned with `limit` set.
pub fn success_prob(direction: Direction, alpha: f64, loss: &LossParams) -> SuccessProbability {
    let t = loss.t();
    let x = alpha * alpha * t * t;
    let value = match direction {
        Direction::S2C => 0.5,
        Direction::C2S => -(-2.0 * x).exp_m1() / 2.0,
        Direction::P2C => t * t / 2.0,
        Direction::C2P => {
            if x == 0.0 {
                return SuccessProbability { value: 0.0, limit: true };
            }
            let g = (-2.0 * x).exp();
            let one_minus_g = -(-2.0 * x).exp_m1();
            // ln(1 - g), accurate at both ends of (0, 1).
            let ln_1mg = if g < 0.5 { (-g).ln_1p() } else { one_minus_g.ln() };
            let artanh = 0.5 * (g.ln_1p() - ln_1mg);
            one_minus_g * artanh / g
        }
    };
    SuccessProbability { value, limit: false }
}
