//! Hyperbolic-plane distances and the witness points that realize discrete
//! tree distances at infinity.
//!
//! Distances come in three forms. [`disk_distance`] works on complex Poincare
//! disk coordinates and serves as the reference oracle at moderate scale.
//! [`polar_distance`] evaluates the same metric in non-Euclidean polar
//! coordinates `(rho, phi)` and stays meaningful as long as `e^{rho1+rho2}`
//! is representable; it refuses inputs past [`DIRECT_RHO_SUM_LIMIT`].
//! [`polar_distance_logdomain`] carries every intermediate in log space and
//! is total: witness constructions push `rho` to millions of nats and angles
//! to `e^{-1000000}` and below, where only logarithms survive.
//!
//! A witness point for a discrete function at scale `eps` is
//! `(rho/eps, sum_k a_k e^{-s_k/eps})`. Scaled by `eps`, the plane distance
//! between two witness points approaches the tree distance as `eps -> 0`;
//! [`ConvergenceReport`] tabulates that convergence over a schedule.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use num_traits::Zero;
use thiserror::Error;

use crate::logdomain::{ln_two_cosh, logaddexp, SignedLog};
use crate::tree::DiscreteFunction;
use crate::{rat_f64, Rational};

/// Largest `rho1 + rho2` the direct polar evaluation accepts. Past this the
/// `sinh^2((rho1+rho2)/2)` term nears f64 overflow and the log-domain path is
/// the only honest one.
pub const DIRECT_RHO_SUM_LIMIT: f64 = 300.0;

// Below this |dphi| the series for ln(2 sin^2(dphi/2)) is used; above it the
// angle is representable and sin is evaluated directly.
const SMALL_ANGLE: f64 = 1e-3;

#[inline]
fn ln_8() -> f64 {
    // Written as 3 ln 2 so that the coincident-point cancellation in the
    // log-domain path is exact: D evaluates to ln 2 + 2 ln 2 there.
    3.0 * LN_2
}

#[derive(Debug, Error, PartialEq)]
pub enum HyperbolicError {
    #[error("point lies on or outside the unit disk (|x| = {modulus})")]
    PointOutsideDisk { modulus: f64 },
    #[error(
        "rho1 + rho2 = {rho_sum} nats exceeds the direct-path limit {DIRECT_RHO_SUM_LIMIT}; \
         use the log-domain distance"
    )]
    OverflowRegime { rho_sum: f64 },
    #[error("angle underflowed native precision; use the log-domain distance")]
    AngleUnderflow,
    #[error("bad coordinates: {0}")]
    BadCoordinates(String),
    #[error("bad epsilon schedule: {0}")]
    BadSchedule(String),
}

/// Point of the hyperbolic plane in non-Euclidean polar coordinates: `rho`
/// is the distance to the origin in nats, `phi` the polar angle in radians.
///
/// The angle is also carried as a signed log. Witness angles underflow f64
/// after a few refinement steps, and the log companion is what keeps them
/// alive; for ordinary angles the two representations agree.
#[derive(Clone, Copy, Debug)]
pub struct PolarPoint {
    rho: f64,
    phi: f64,
    log_phi: SignedLog,
}

impl PolarPoint {
    pub fn new(rho: f64, phi: f64) -> Result<Self, HyperbolicError> {
        check_rho(rho)?;
        if !phi.is_finite() {
            return Err(HyperbolicError::BadCoordinates(format!(
                "angle must be finite, got {phi}"
            )));
        }
        let phi = reduce_angle(phi);
        Ok(PolarPoint {
            rho,
            phi,
            log_phi: SignedLog::from_value(phi),
        })
    }

    /// Builds a point whose angle is `sign * e^{ln_abs}`, for magnitudes no
    /// float can hold. The plain `phi` field becomes the nearest f64,
    /// possibly zero.
    pub fn from_log_angle(rho: f64, log_phi: SignedLog) -> Result<Self, HyperbolicError> {
        check_rho(rho)?;
        if log_phi.ln_abs() == f64::INFINITY {
            return Err(HyperbolicError::BadCoordinates(
                "angle magnitude is infinite".to_string(),
            ));
        }
        let mut point = PolarPoint {
            rho,
            phi: log_phi.value(),
            log_phi,
        };
        if point.phi.abs() > PI {
            point.phi = reduce_angle(point.phi);
            point.log_phi = SignedLog::from_value(point.phi);
        }
        Ok(point)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn log_phi(&self) -> SignedLog {
        self.log_phi
    }
}

fn check_rho(rho: f64) -> Result<(), HyperbolicError> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(HyperbolicError::BadCoordinates(format!(
            "rho must be finite and nonnegative, got {rho}"
        )));
    }
    Ok(())
}

// Wraps into (-pi, pi]. Angles already in range pass through unchanged.
fn reduce_angle(phi: f64) -> f64 {
    let mut x = phi % (2.0 * PI);
    if x <= -PI {
        x += 2.0 * PI;
    } else if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Intermediates of the polar distance formula
///
/// ```text
/// d = ln (1+A)/(1-A),   A^2 = 1 - 8/D,
/// D = (2 - b^2)(t + 1/t)^2 + b^2 (s + 1/s)^2,
/// b^2 = 1 - cos(phi1 - phi2),  t^2 = e^{rho1-rho2},  s^2 = e^{rho1+rho2},
/// ```
///
/// exposed so the two evaluation paths can be compared piece by piece.
#[derive(Clone, Copy, Debug)]
pub struct HyperbolicTerms {
    pub beta2: f64,
    pub log_t2: f64,
    pub log_s2: f64,
    pub log_denom: f64,
    pub amplitude: f64,
}

impl HyperbolicTerms {
    /// Direct evaluation. Requires representable angles and a rho sum within
    /// [`DIRECT_RHO_SUM_LIMIT`].
    pub fn direct(p1: &PolarPoint, p2: &PolarPoint) -> Result<Self, HyperbolicError> {
        let rho_sum = p1.rho + p2.rho;
        if rho_sum > DIRECT_RHO_SUM_LIMIT {
            return Err(HyperbolicError::OverflowRegime { rho_sum });
        }
        if (p1.phi == 0.0 && !p1.log_phi.is_zero()) || (p2.phi == 0.0 && !p2.log_phi.is_zero()) {
            return Err(HyperbolicError::AngleUnderflow);
        }
        let drho = p1.rho - p2.rho;
        let beta2 = 2.0 * (0.5 * (p1.phi - p2.phi)).sin().powi(2);
        // D - 8 = 4[(2-b^2) sinh^2(drho/2) + b^2 sinh^2((rho1+rho2)/2)] is a sum
        // of nonnegative products, so small distances keep full relative
        // precision where D itself would cancel against the 8.
        let excess = 4.0
            * ((2.0 - beta2) * (0.5 * drho).sinh().powi(2)
                + beta2 * (0.5 * rho_sum).sinh().powi(2));
        Ok(HyperbolicTerms {
            beta2,
            log_t2: drho,
            log_s2: rho_sum,
            log_denom: (excess + 8.0).ln(),
            amplitude: (excess / (excess + 8.0)).sqrt(),
        })
    }

    /// Log-domain evaluation from the radial coordinates and the signed log
    /// of the angle gap `phi1 - phi2`. Total for finite inputs.
    pub fn from_log_gap(rho1: f64, rho2: f64, delta_phi: SignedLog) -> Self {
        let ln_beta2 = ln_beta2_from_gap(delta_phi);
        let drho = rho1 - rho2;
        let rho_sum = rho1 + rho2;
        // ln(2 - b^2) = ln 2 + ln(1 - b^2/2); b^2 = 2 (antipodal angles) sends
        // the first denominator term to zero and that is fine.
        let ln_two_minus = LN_2 + (-((ln_beta2 - LN_2).exp())).ln_1p();
        let l1 = ln_two_minus + 2.0 * ln_two_cosh(0.5 * drho);
        let l2 = ln_beta2 + 2.0 * ln_two_cosh(0.5 * rho_sum);
        let log_denom = logaddexp(l1, l2);
        // 8/D <= 1, so u <= 0 up to roundoff; clamp before expm1.
        let u = (ln_8() - log_denom).min(0.0);
        HyperbolicTerms {
            beta2: ln_beta2.exp(),
            log_t2: drho,
            log_s2: rho_sum,
            log_denom,
            amplitude: (-u.exp_m1()).sqrt(),
        }
    }

    /// `ln (1+A)/(1-A)`: as `2 atanh A` while A is away from 1, switching to
    /// `ln D - ln 8 + 2 ln(1+A)` where `1 - A` cancels.
    pub fn distance(&self) -> f64 {
        if self.amplitude < 0.9 {
            2.0 * self.amplitude.atanh()
        } else {
            self.log_denom - ln_8() + 2.0 * self.amplitude.ln_1p()
        }
    }
}

// ln b^2 = ln(1 - cos dphi) = ln 2 + 2 ln|sin(dphi/2)| from the signed log of
// the gap. Expects |dphi| <= 2 pi (reduced inputs guarantee it).
fn ln_beta2_from_gap(delta_phi: SignedLog) -> f64 {
    if delta_phi.is_zero() {
        return f64::NEG_INFINITY;
    }
    let lx = delta_phi.ln_abs();
    if lx < SMALL_ANGLE.ln() {
        // b^2 = (x^2/2)(1 - x^2/12 + x^4/360 - ...); x^2 may underflow, in
        // which case the correction vanishes with it.
        let x2 = (2.0 * lx).exp();
        2.0 * lx - LN_2 + (x2 * (x2 / 360.0 - 1.0 / 12.0)).ln_1p()
    } else {
        let x = delta_phi.value().abs();
        LN_2 + 2.0 * (0.5 * x).sin().abs().ln()
    }
}

/// Euclidean radius of the disk point at non-Euclidean distance `rho` from
/// the origin: `(e^rho - 1)/(e^rho + 1)`, evaluated as `tanh(rho/2)` so both
/// ends are cancellation-free.
pub fn rho_to_r(rho: f64) -> f64 {
    debug_assert!(rho >= 0.0);
    (0.5 * rho).tanh()
}

/// Hyperbolic distance between two points of the open unit disk,
/// `ln (|1-x1 conj(x2)| + |x1-x2|) / (|1-x1 conj(x2)| - |x1-x2|)`.
///
/// The denominator is recovered from `num^2 - delta^2 = (1-|x1|^2)(1-|x2|^2)`
/// rather than by subtraction: the raw difference loses a digit per nat of
/// distance and would cap the oracle at a few nats.
pub fn disk_distance(x1: Complex64, x2: Complex64) -> Result<f64, HyperbolicError> {
    for x in [x1, x2] {
        let n2 = x.norm_sqr();
        if !(n2 < 1.0) {
            return Err(HyperbolicError::PointOutsideDisk { modulus: n2.sqrt() });
        }
    }
    let num = (Complex64::new(1.0, 0.0) - x1 * x2.conj()).norm();
    let delta = (x1 - x2).norm();
    let s = num + delta;
    Ok((s * s / ((1.0 - x1.norm_sqr()) * (1.0 - x2.norm_sqr()))).ln())
}

/// Polar-coordinate distance, direct evaluation. Errors in the overflow
/// regime and on underflowed angles; [`polar_distance_logdomain`] covers
/// both.
pub fn polar_distance(p1: &PolarPoint, p2: &PolarPoint) -> Result<f64, HyperbolicError> {
    Ok(HyperbolicTerms::direct(p1, p2)?.distance())
}

/// Log-domain distance. The angle gap is taken as the difference of the two
/// stored logs, which is exact enough whenever the angles differ at
/// representable relative scale; witness pairs, whose gap is invisible at
/// that scale, must pass the term-wise gap to
/// [`polar_distance_logdomain_with_gap`] instead.
pub fn polar_distance_logdomain(p1: &PolarPoint, p2: &PolarPoint) -> f64 {
    polar_distance_logdomain_with_gap(p1, p2, p1.log_phi.sub(&p2.log_phi))
}

/// Log-domain distance with the angle gap `phi1 - phi2` supplied by the
/// caller as a signed log.
pub fn polar_distance_logdomain_with_gap(
    p1: &PolarPoint,
    p2: &PolarPoint,
    delta_phi: SignedLog,
) -> f64 {
    if delta_phi.is_zero() && p1.rho == p2.rho {
        // coincident points: identity of indiscernibles, not numerics
        return 0.0;
    }
    HyperbolicTerms::from_log_gap(p1.rho, p2.rho, delta_phi).distance()
}

/// Plane point standing in for `f` at refinement scale `eps`:
/// `(rho/eps, sum_k a_k e^{-s_k/eps})`, summed over the support of `f`.
///
/// The sum starts at the first support knot; a hypothetical knot at time 0
/// would carry coefficient f(0) = 0 and contribute nothing.
pub fn witness_point(f: &DiscreteFunction, eps: f64) -> PolarPoint {
    assert!(eps > 0.0 && eps.is_finite(), "eps must be positive, got {eps}");
    let mut log_phi = SignedLog::zero();
    for knot in f.support() {
        log_phi = log_phi.add(&log_term(&knot.value, &knot.time, eps));
    }
    PolarPoint {
        rho: rat_f64(f.rho()) / eps,
        phi: log_phi.value(),
        log_phi,
    }
}

// sign(c) * e^{ln|c| - s/eps}
fn log_term(coeff: &Rational, time: &Rational, eps: f64) -> SignedLog {
    SignedLog::from_value(rat_f64(coeff)).scale_ln(-rat_f64(time) / eps)
}

/// Signed log of `phi1 - phi2` for the witness points of `f1`, `f2` at scale
/// `eps`, assembled term-wise as `sum (a_{1,k} - a_{2,k}) e^{-s_k/eps}` over
/// the merged supports with exact coefficient differences.
///
/// Subtracting the assembled angles would return zero: below the segregation
/// moment the supports agree, so the leading difference term is smaller than
/// either angle by a factor no float resolves.
pub fn witness_angle_gap(f1: &DiscreteFunction, f2: &DiscreteFunction, eps: f64) -> SignedLog {
    let (a, b) = (f1.support(), f2.support());
    let mut gap = SignedLog::zero();
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (time, diff) = if j == b.len() || (i < a.len() && a[i].time < b[j].time) {
            i += 1;
            (&a[i - 1].time, a[i - 1].value.clone())
        } else if i == a.len() || b[j].time < a[i].time {
            j += 1;
            (&b[j - 1].time, -b[j - 1].value.clone())
        } else {
            i += 1;
            j += 1;
            (&a[i - 1].time, &a[i - 1].value - &b[j - 1].value)
        };
        if !diff.is_zero() {
            gap = gap.add(&log_term(&diff, time, eps));
        }
    }
    gap
}

/// `|eps * d_X(witness(f1), witness(f2)) - d_D(f1, f2)|`: how far the scaled
/// plane distance sits from the tree distance at this `eps`.
pub fn asymptotic_error(f1: &DiscreteFunction, f2: &DiscreteFunction, eps: f64) -> f64 {
    witness_row(f1, f2, eps).error
}

fn witness_row(f1: &DiscreteFunction, f2: &DiscreteFunction, eps: f64) -> ConvergenceRow {
    let p1 = witness_point(f1, eps);
    let p2 = witness_point(f2, eps);
    let d_x = polar_distance_logdomain_with_gap(&p1, &p2, witness_angle_gap(f1, f2, eps));
    let d_d = rat_f64(&f1.distance(f2));
    ConvergenceRow {
        eps,
        d_x,
        eps_d_x: eps * d_x,
        d_d,
        error: (eps * d_x - d_d).abs(),
    }
}

/// Strictly decreasing positive refinement scales.
#[derive(Clone, Debug)]
pub struct EpsilonSchedule {
    eps: Vec<f64>,
}

impl EpsilonSchedule {
    pub fn new(eps: Vec<f64>) -> Result<Self, HyperbolicError> {
        if eps.is_empty() {
            return Err(HyperbolicError::BadSchedule("schedule is empty".to_string()));
        }
        for (i, &e) in eps.iter().enumerate() {
            if !e.is_finite() || e <= 0.0 {
                return Err(HyperbolicError::BadSchedule(format!(
                    "entry {i} is {e}, want a positive finite float"
                )));
            }
            if i > 0 && eps[i - 1] <= e {
                return Err(HyperbolicError::BadSchedule(format!(
                    "entry {i} ({e}) does not decrease from {}",
                    eps[i - 1]
                )));
            }
        }
        Ok(EpsilonSchedule { eps })
    }

    /// `2^-hi, 2^-(hi+1), ..., 2^-lo`. Powers of two keep `eps * (rho/eps)`
    /// exact.
    pub fn dyadic(hi: u32, lo: u32) -> Self {
        assert!(hi <= lo, "want hi <= lo, got {hi} > {lo}");
        EpsilonSchedule {
            eps: (hi..=lo).map(|k| 2.0f64.powi(-(k as i32))).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.eps
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }
}

/// One scale of a witness convergence run.
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub d_x: f64,
    pub eps_d_x: f64,
    pub d_d: f64,
    pub error: f64,
}

/// Witness convergence experiment for one pair of discrete functions over an
/// epsilon schedule.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn from_pair(
        f1: &DiscreteFunction,
        f2: &DiscreteFunction,
        schedule: &EpsilonSchedule,
    ) -> Self {
        ConvergenceReport {
            rows: schedule
                .values()
                .iter()
                .map(|&eps| witness_row(f1, f2, eps))
                .collect(),
        }
    }

    pub fn final_error(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.error)
    }

    /// True when the error never grows from one row to the next once the
    /// first `skip` rows are past. Errors below 1e-12 sit in roundoff and a
    /// wobble there does not count.
    pub fn non_increasing_after(&self, skip: usize) -> bool {
        self.rows
            .windows(2)
            .skip(skip)
            .all(|w| w[1].error <= w[0].error.max(1e-12))
    }

    /// Least-squares slope of `ln error` against `ln eps` over the rows above
    /// the roundoff floor; NaN when fewer than two rows qualify. Slope 1
    /// means first-order convergence.
    pub fn fitted_order(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.error > 1e-15)
            .map(|r| (r.eps.ln(), r.error.ln()))
            .collect();
        if pts.len() < 2 {
            return f64::NAN;
        }
        let n = pts.len() as f64;
        let (mx, my) = pts
            .iter()
            .fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x, sy + y));
        let (mx, my) = (mx / n, my / n);
        let (cov, var) = pts.iter().fold((0.0, 0.0), |(c, v), (x, y)| {
            (c + (x - mx) * (y - my), v + (x - mx) * (x - mx))
        });
        cov / var
    }
}
