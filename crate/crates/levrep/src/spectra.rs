//! Exact eigenvalues of the two model systems, Weyl-type unfolding to unit
//! mean density, and window enumeration.
//!
//! Rectangle (Dirichlet hard walls, aspect ratio alpha, unit mean density):
//!   e(n, m) = (pi/4) (n^2/alpha + m^2 alpha),   n, m >= 1
//! The normalization pi/4 makes the leading (area) term of the counting
//! function exactly e; boundary and corner terms complete the smooth count
//!   N(e) = e - (sqrt(alpha) + 1/sqrt(alpha)) sqrt(e/pi) + 1/4.
//!
//! Modified Kepler (radial + centrifugal correction):
//!   E(p, l) = 2 p sqrt(2 beta) + l^2,   p >= 0, l >= 1,
//! each (p, l) counted once. Its smooth count, from the lattice sum
//! Sum_l (floor((E - l^2)/(2c)) + 1) with c = sqrt(2 beta):
//!   N(E) = E^(3/2)/(3c) - E/(4c) + sqrt(E) (1/2 + 1/(24c)) + c0.
//! The E and sqrt(E) corrections matter: dropping them biases the local
//! density by 1/(2 sqrt(E)) (~0.5% at E = 1e4), which is comparable to the
//! repulsion effects under study. `c0` shifts all unfolded positions rigidly
//! and defaults to zero.
//!
//! Window enumeration emits exactly the levels whose unfolded position falls
//! in the observation window, in O(sqrt(energy)) per member, without
//! generating the spectrum below the window.

use crate::scalar::Scalar;
use crate::{Error, Result};

/// Two adjacent unfolded levels closer than this are treated as an exact
/// degeneracy, which generic (irrational-squared) parameters never produce.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// One ensemble member's sorted unfolded levels inside the observation
/// window around the running energy.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldedWindow {
    pub member_id: u64,
    /// Running energy (window center), units of mean spacing.
    pub center: f64,
    /// Half the window width.
    pub half_width: f64,
    /// Strictly ascending unfolded positions, all inside
    /// `[center - half_width, center + half_width]`.
    pub levels: Vec<f64>,
}

impl UnfoldedWindow {
    /// Sorts, range-checks and degeneracy-checks the levels.
    /// `param` only labels the error on failure.
    pub fn new(
        member_id: u64,
        center: f64,
        half_width: f64,
        mut levels: Vec<f64>,
        param: f64,
    ) -> Result<Self> {
        levels.sort_unstable_by(f64::total_cmp);
        let lo = center - half_width;
        let hi = center + half_width;
        if let (Some(first), Some(last)) = (levels.first(), levels.last()) {
            if *first < lo || *last > hi {
                return Err(Error::Config(format!(
                    "level outside window [{lo}, {hi}]"
                )));
            }
        }
        for pair in levels.windows(2) {
            let gap = pair[1] - pair[0];
            if gap < DEGENERACY_TOL {
                return Err(Error::Degenerate { param, gap });
            }
        }
        Ok(Self {
            member_id,
            center,
            half_width,
            levels,
        })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// Rectangle eigenvalue, unit mean density: (pi/4)(n^2/alpha + m^2 alpha).
pub fn rectangle_raw_level<S: Scalar>(n: u32, m: u32, alpha: S) -> S {
    debug_assert!(n >= 1 && m >= 1);
    let n2 = S::of(n) * S::of(n);
    let m2 = S::of(m) * S::of(m);
    S::FRAC_PI_4() * (n2 / alpha + m2 * alpha)
}

/// Smooth rectangle counting function (area, perimeter and corner terms):
/// N(e) = e - (sqrt(alpha) + 1/sqrt(alpha)) sqrt(e/pi) + 1/4.
/// Strictly increasing for e above the small turning point
/// (sqrt(alpha) + 1/sqrt(alpha))^2 / (4 pi), well below the ground state.
pub fn unfold_rectangle<S: Scalar>(e: S, alpha: S) -> S {
    let sa = alpha.sqrt();
    e - (sa + sa.recip()) * (e / S::PI()).sqrt() + S::lit(0.25)
}

/// Modified-Kepler eigenvalue: 2 p sqrt(2 beta) + l^2.
pub fn kepler_raw_level<S: Scalar>(p: u32, l: u32, beta: S) -> S {
    debug_assert!(l >= 1);
    S::of(2) * S::of(p) * (S::of(2) * beta).sqrt() + S::of(l) * S::of(l)
}

/// Smooth Kepler counting function; see the module docs for the derivation.
pub fn unfold_kepler<S: Scalar>(e: S, beta: S) -> S {
    let c = (S::of(2) * beta).sqrt();
    let sqrt_e = e.sqrt();
    e * sqrt_e / (S::of(3) * c) - e / (S::of(4) * c)
        + sqrt_e * (S::lit(0.5) + S::one() / (S::of(24) * c))
}

/// Start of the strictly increasing branch of the rectangle smooth count.
fn rectangle_branch_floor(alpha: f64) -> f64 {
    let sa = alpha.sqrt();
    let c = sa + 1.0 / sa;
    c * c / (4.0 * std::f64::consts::PI)
}

/// Inverts a smooth counting function by bisection + Newton polish.
/// `f` must be strictly increasing on `[lo, inf)`.
fn invert_count(f: impl Fn(f64) -> f64, x: f64, lo: f64) -> f64 {
    if f(lo) >= x {
        return lo;
    }
    // bracket the root from above
    let mut hi = (x.max(1.0)) * 2.0 + 10.0;
    let mut guard = 0;
    while f(hi) < x {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return hi;
        }
    }
    let mut a = lo;
    let mut b = hi;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if !(a < m && m < b) {
            break;
        }
        if f(m) < x {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-13 * b.abs().max(1.0) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Rectangle levels with unfolded position inside the window, exact and
/// sorted, enumerated analytically per quantum-number column.
pub fn rectangle_window(
    alpha: f64,
    energy: f64,
    window_width: f64,
    member_id: u64,
) -> Result<UnfoldedWindow> {
    if !(alpha > 0.0) || !(energy > 0.0) || !(window_width > 0.0) {
        return Err(Error::Config(format!(
            "rectangle window needs positive alpha, energy, width; got {alpha}, {energy}, {window_width}"
        )));
    }
    let half = window_width / 2.0;
    let x_lo = energy - half;
    let x_hi = energy + half;
    let floor_e = rectangle_branch_floor(alpha);
    // Raw-energy bracket, widened so that float error in the inversion can
    // never drop an edge level; the final filter is on unfolded positions.
    let e_lo = (invert_count(|e| unfold_rectangle(e, alpha), x_lo, floor_e) - 1.0).max(0.0);
    let e_hi = invert_count(|e| unfold_rectangle(e, alpha), x_hi, floor_e) + 1.0;

    let quarter_pi = std::f64::consts::FRAC_PI_4;
    let n_top = (e_hi * alpha / quarter_pi).sqrt().floor() as u32 + 1;
    let mut levels = Vec::new();
    for n in 1..=n_top {
        let base = quarter_pi * f64::from(n) * f64::from(n) / alpha;
        if base > e_hi {
            break;
        }
        // m-range from the quadratic bound, widened by one on both sides.
        let m2_hi = (e_hi - base) / (quarter_pi * alpha);
        if m2_hi < 1.0 {
            continue;
        }
        let m2_lo = (e_lo - base) / (quarter_pi * alpha);
        let m_from = if m2_lo > 1.0 {
            (m2_lo.sqrt().floor() as u32).max(2) - 1
        } else {
            1
        };
        let m_to = m2_hi.sqrt().ceil() as u32 + 1;
        for m in m_from..=m_to {
            let e = rectangle_raw_level(n, m, alpha);
            if e < e_lo || e > e_hi {
                continue;
            }
            let x = unfold_rectangle(e, alpha);
            if x >= x_lo && x <= x_hi {
                levels.push(x);
            }
        }
    }
    UnfoldedWindow::new(member_id, energy, half, levels, alpha)
}

/// Kepler levels with unfolded position inside the window; same contract as
/// [`rectangle_window`].
pub fn kepler_window(
    beta: f64,
    energy: f64,
    window_width: f64,
    member_id: u64,
) -> Result<UnfoldedWindow> {
    if !(beta > 0.0) || !(energy > 0.0) || !(window_width > 0.0) {
        return Err(Error::Config(format!(
            "kepler window needs positive beta, energy, width; got {beta}, {energy}, {window_width}"
        )));
    }
    let half = window_width / 2.0;
    let x_lo = energy - half;
    let x_hi = energy + half;
    let e_lo = (invert_count(|e| unfold_kepler(e, beta), x_lo, 1e-6) - 1.0).max(0.0);
    let e_hi = invert_count(|e| unfold_kepler(e, beta), x_hi, 1e-6) + 1.0;

    let two_c = 2.0 * (2.0 * beta).sqrt();
    let l_top = e_hi.sqrt().floor() as u32 + 1;
    let mut levels = Vec::new();
    for l in 1..=l_top {
        let l2 = f64::from(l) * f64::from(l);
        if l2 > e_hi {
            break;
        }
        let p_hi = ((e_hi - l2) / two_c).floor() as i64 + 1;
        let p_lo = (((e_lo - l2) / two_c).floor() as i64 - 1).max(0);
        for p in p_lo..=p_hi {
            let e = kepler_raw_level(p as u32, l, beta);
            if e < e_lo || e > e_hi {
                continue;
            }
            let x = unfold_kepler(e, beta);
            if x >= x_lo && x <= x_hi {
                levels.push(x);
            }
        }
    }
    UnfoldedWindow::new(member_id, energy, half, levels, beta)
}
