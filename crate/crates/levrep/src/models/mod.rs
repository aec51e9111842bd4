//! Closed-form theory layer.
//!
//! The smooth two-point kernel K(omega) describes level repulsion: the full
//! correlation function of the unit-density spectrum is delta(omega) -
//! K(omega), and K integrates to 1 over the real line. Everything here is a
//! pure function of its arguments and generic over the scalar type.
//!
//! Provided kernels:
//! - the short-orbit ansatz K(omega) = sin(omega T) / (pi omega), with T the
//!   period of the shortest periodic orbit;
//! - the GUE kernel sin^2(omega) / (pi omega^2) as the chaotic benchmark;
//! - the rectangle winding-number sum (exposed only through its integrated
//!   number-variance functional: the cosine double sum is a distribution,
//!   not a pointwise function);
//! - the modified-Kepler winding-number sum, evaluated pointwise exactly as
//!   printed (note: that form is odd in omega; the parity question is left
//!   to the caller rather than silently symmetrized).

mod si;
mod variance;

pub use si::sine_integral;
pub use variance::{rectangle_variance_adaptive, rectangle_variance_analytic};

use crate::quad::adaptive_simpson;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Period of the shortest periodic orbit of the unit-density rectangle at
/// running energy `energy`: T = 2 pi^(3/2) / sqrt(energy).
pub fn t_min_rectangle<S: Scalar>(energy: S) -> S {
    S::of(2) * S::PI().powf(S::lit(1.5)) / energy.sqrt()
}

/// Repulsion period read off the leading term of the Kepler kernel sum:
/// T = pi / (3 energy sqrt(2 beta))^(1/3).
///
/// This is a convenience derived from the sum's sine argument at winding
/// number 1, not an independently stated result.
pub fn kepler_t_min<S: Scalar>(energy: S, beta: S) -> S {
    let c = (S::of(2) * beta).sqrt();
    S::PI() / (S::of(3) * energy * c).powf(S::lit(1.0 / 3.0))
}

/// Parameters of the short-orbit repulsion ansatz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnsatzParams<S> {
    /// Period of the shortest orbit, in units where the mean spacing is 1.
    pub t_min: S,
}

impl<S: Scalar> AnsatzParams<S> {
    /// `t_min` must lie in [0, pi) so that g(0) = 1 - t_min/pi stays a
    /// valid density.
    pub fn new(t_min: S) -> Result<Self> {
        if !(t_min >= S::zero() && t_min < S::PI()) {
            return Err(Error::Config(format!(
                "t_min must lie in [0, pi), got {t_min:?}"
            )));
        }
        Ok(Self { t_min })
    }
}

/// Smooth ansatz kernel K(omega) = sin(omega t_min) / (pi omega);
/// K(0) = t_min / pi.
pub fn ansatz_kernel<S: Scalar>(omega: S, params: AnsatzParams<S>) -> S {
    let t = params.t_min;
    if omega == S::zero() {
        t / S::PI()
    } else {
        (omega * t).sin() / (S::PI() * omega)
    }
}

/// GUE kernel K(omega) = sin^2(omega) / (pi omega^2); K(0) = 1/pi.
/// Comparison model for chaotic spectra (printed convention: unit mean
/// spacing absorbed into omega).
pub fn gue_kernel<S: Scalar>(omega: S) -> S {
    if omega == S::zero() {
        S::one() / S::PI()
    } else {
        let s = omega.sin();
        s * s / (S::PI() * omega * omega)
    }
}

/// Weight of a rectangle winding-number pair: 0 if both indices vanish,
/// 1/4 if exactly one does, 1 otherwise.
pub fn weight_delta_m<S: Scalar>(m1: u32, m2: u32) -> S {
    match (m1 == 0, m2 == 0) {
        (true, true) => S::zero(),
        (true, false) | (false, true) => S::lit(0.25),
        (false, false) => S::one(),
    }
}

/// A truncated-sum value together with a bound on the dropped remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncated<S> {
    pub value: S,
    pub tail_bound: S,
}

/// Modified-Kepler kernel sum, truncated at winding number `m_max`:
///
/// sum_{M=1}^{m_max} (floor(M / (2 beta / 3 energy)^(1/3)) + 1/4)
///                   * 2 sqrt(2 beta) / (pi^2 M^3)
///                   * sin(pi M omega / (3 energy sqrt(2 beta))^(1/3))
///
/// The tail bound majorizes the dropped terms by |sin| <= 1 and
/// floor(M/c) <= M/c, summed in closed form; it decreases monotonically in
/// `m_max`.
pub fn kepler_kernel<S: Scalar>(omega: S, energy: S, beta: S, m_max: u32) -> Truncated<S> {
    assert!(m_max >= 1, "m_max must be at least 1");
    let c = (S::of(2) * beta).sqrt();
    let third = S::lit(1.0 / 3.0);
    let cb = (S::of(2) * beta / (S::of(3) * energy)).powf(third);
    let freq = S::PI() / (S::of(3) * energy * c).powf(third);
    let amp = S::of(2) * c / (S::PI() * S::PI());

    let mut value = S::zero();
    for m in 1..=m_max {
        let mf = S::of(m);
        let weight = (mf / cb).floor() + S::lit(0.25);
        value += weight * amp / (mf * mf * mf) * (freq * mf * omega).sin();
    }
    let n = S::of(m_max);
    let tail_bound = amp * (S::one() / (cb * n) + S::lit(0.125) / (n * n));
    Truncated { value, tail_bound }
}

/// Number variance of the ansatz kernel, obtained by integrating
/// delta(omega) - sin(omega T)/(pi omega) against the interval pair window:
///
/// Sigma^2(L) = L - (2L/pi) Si(L T) + 2 (1 - cos(L T)) / (pi T)
///
/// Reduces to the Poisson line Sigma^2 = L at T = 0 and saturates around
/// 2/(pi T) with decaying oscillations.
pub fn ansatz_variance<S: Scalar>(l: S, params: AnsatzParams<S>) -> S {
    let t = params.t_min;
    if t == S::zero() {
        return l;
    }
    let lt = l * t;
    l - S::of(2) * l / S::PI() * sine_integral(lt)
        + S::of(2) * (S::one() - lt.cos()) / (S::PI() * t)
}

/// Spacing density from a repulsion kernel through the gap construction
/// p(s) = g(s) exp(-∫₀ˢ g(x) dx), with g(x) = 1 - K(x).
///
/// The inner integral is evaluated by adaptive quadrature to 1e-10 absolute.
/// Fails with a domain error if g is negative at any evaluation point
/// (invalid repulsion strength).
pub fn spacing_pdf_from_kernel<S: Scalar>(g: impl Fn(S) -> S, s: S) -> Result<S> {
    use std::cell::Cell;
    if s < S::zero() {
        return Err(Error::Domain(format!("spacing must be >= 0, got {s:?}")));
    }
    let worst = Cell::new(S::zero());
    let checked = |x: S| {
        let v = g(x);
        if v < worst.get() {
            worst.set(v);
        }
        v
    };
    let gs = checked(s);
    let integral = adaptive_simpson(&checked, S::zero(), s, S::lit(1e-10));
    if worst.get() < S::zero() {
        return Err(Error::Domain(format!(
            "g(x) = 1 - K(x) dips to {:?} on [0, s]; kernel is not a valid repulsion law",
            worst.get()
        )));
    }
    Ok(gs * (-integral).exp())
}

/// Closed-form spacing density of the ansatz kernel:
///
/// p(s) = [1 - sin(s T)/(pi s)] exp[-s + Si(s T)/pi],   p(0) = 1 - T/pi.
///
/// T = 0 gives back the Poisson law exp(-s).
pub fn ansatz_spacing_pdf<S: Scalar>(s: S, params: AnsatzParams<S>) -> S {
    let t = params.t_min;
    let g = if s == S::zero() {
        S::one() - t / S::PI()
    } else {
        S::one() - (s * t).sin() / (S::PI() * s)
    };
    g * (-s + sine_integral(s * t) / S::PI()).exp()
}

/// Cumulative small-s weight P(s) = (1/s) ∫₀ˢ p(x) dx for the ansatz law,
/// in closed form: P(s) = (1 - exp[-s + Si(s T)/pi]) / s.
pub fn ansatz_cumulative<S: Scalar>(s: S, params: AnsatzParams<S>) -> Result<S> {
    if s <= S::zero() {
        return Err(Error::Domain(format!("s must be > 0, got {s:?}")));
    }
    let arg = -s + sine_integral(s * params.t_min) / S::PI();
    Ok(-arg.exp_m1() / s)
}

/// Small-s asymptote of [`ansatz_cumulative`]: P_p(s) - t_min/pi.
/// With the rectangle's t_min this is P_p(s) - 2 sqrt(pi/energy).
pub fn ansatz_cumulative_asymptote<S: Scalar>(s: S, params: AnsatzParams<S>) -> Result<S> {
    Ok(poisson_cumulative(s)? - params.t_min / S::PI())
}

/// Poisson cumulative weight P_p(s) = (1 - exp(-s)) / s; energy-independent.
pub fn poisson_cumulative<S: Scalar>(s: S) -> Result<S> {
    if s <= S::zero() {
        return Err(Error::Domain(format!("s must be > 0, got {s:?}")));
    }
    Ok(-(-s).exp_m1() / s)
}

/// An analytic smooth kernel with pointwise evaluation where one exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelModel<S> {
    /// Short-orbit ansatz with repulsion period `t_min`.
    Ansatz(AnsatzParams<S>),
    /// Gaussian unitary ensemble benchmark.
    Gue,
    /// Rectangle winding-number sum at fixed aspect ratio. Pointwise
    /// evaluation is not defined (undamped cosine sum); use
    /// [`rectangle_variance_analytic`] for its integrated functionals.
    RectangleSum { energy: S, alpha: S, m_max: u32 },
    /// Modified-Kepler winding-number sum, truncated at `m_max`.
    KeplerSum { energy: S, beta: S, m_max: u32 },
}

impl<S: Scalar> KernelModel<S> {
    /// Pointwise kernel value at separation `omega`.
    pub fn eval(&self, omega: S) -> Result<S> {
        match *self {
            KernelModel::Ansatz(p) => Ok(ansatz_kernel(omega, p)),
            KernelModel::Gue => Ok(gue_kernel(omega)),
            KernelModel::RectangleSum { .. } => Err(Error::Domain(
                "the rectangle cosine sum is a distribution; only integrated functionals \
                 (number variance) are defined pointwise"
                    .into(),
            )),
            KernelModel::KeplerSum {
                energy,
                beta,
                m_max,
            } => Ok(kepler_kernel(omega, energy, beta, m_max).value),
        }
    }
}
