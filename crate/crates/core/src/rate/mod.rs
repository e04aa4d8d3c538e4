//! Exponential rate of the expected number of tight homomorphisms into `C_7`
//! and upper bounds for it over axis-aligned boxes.
//!
//! Variables are `y_i = m_i / n`, the fraction of matching edges between
//! classes `i - 1` and `i`. With `L(x) = x ln x` (the log of `x^x`), the
//! per-vertex log-rate at `y` is
//!
//! ```text
//! 2 L(y0 + y1) - L(y0) - 2 L(y1)
//!   + sum_{i=1..6} max_{z in B_i} [ L(y_i) + L(y_{i+1}) + L(y_i + y_{i+1} - z)
//!        - L(z) - 2 L(y_i - z) - L(y_{i+1} - y_i + z) - L(y_{i+1} - z) ]
//! ```
//!
//! with `y_7 = y_0` and `B_i = [max(0, y_i - y_{i+1}), min(y_i, y_{i+1})]`.
//! Over a box `a <= y <= b` each factor is dominated by a one-variable
//! function of `z` whose stationary point solves a quadratic; [`box_bound`]
//! sums those maxima. All arithmetic is in log space.

mod certify;

pub use certify::{
    certify, CertificationReport, CertifyConfig, GridBox, LevelStats, Offender, DEFAULT_OFFENDER_CAP, DEFAULT_SLACK,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lower bound on every `y_i` (and `b_i`), from the independence number bound 0.4554.
pub const MIN_CUT_FRACTION: f64 = 0.0446;
/// Upper end of the grid: every feasible `y_i` is at most `0.5 - 6 * 0.0446 = 0.2324`.
pub const GRID_UPPER: f64 = 0.24;
/// Tolerance for the linear constraints; applied in the permissive direction.
pub const CONSTRAINT_TOL: f64 = 1e-12;

const INV_E: f64 = 1.0 / std::f64::consts::E;
const FALLBACK_SCAN_POINTS: usize = 10_000;
const POINT_SCAN_POINTS: usize = 2_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("log_g needs x >= 0 (got {0})")]
    NegativeArgument(f64),
    #[error("critical point needs b_i > 0 and b_next > 0 (got {b_i}, {b_next})")]
    NonPositiveWidth { b_i: f64, b_next: f64 },
    #[error("critical point quadratic has negative discriminant {0:e}")]
    NegativeDiscriminant(f64),
    #[error("box violates 0 <= a_i <= b_i: {0}")]
    MalformedBox(String),
    #[error("factor {index}: b_(i+1) - a_i + z reaches {reach} >= 1/e, the monotonicity step is unsound")]
    UnsoundBox { index: usize, reach: f64 },
    #[error("box does not satisfy the feasibility constraints")]
    InfeasibleBox,
    #[error("point violates the constraints: {0}")]
    InfeasiblePoint(String),
    #[error("factor index must be in 1..=6 (got {0})")]
    BadIndex(usize),
    #[error("invalid certification schedule: {0}")]
    BadSchedule(String),
}

/// `x ln x` with the convention `0 ln 0 = 0`. Tiny negative rounding noise is read as 0.
#[inline]
fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Natural log of `g(x) = x^x` (with `g(0) = 1`).
pub fn log_g(x: f64) -> Result<f64, RateError> {
    if x.is_nan() || x < 0.0 {
        return Err(RateError::NegativeArgument(x));
    }
    Ok(xlnx(x))
}

/// A box `[a_0, b_0] x ... x [a_6, b_6]` in the rate variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub a: [f64; 7],
    pub b: [f64; 7],
}

impl BoxSpec {
    pub fn new(a: [f64; 7], b: [f64; 7]) -> Result<Self, RateError> {
        for i in 0..7 {
            if !(a[i] >= 0.0 && a[i] <= b[i]) {
                return Err(RateError::MalformedBox(format!("a_{i} = {}, b_{i} = {}", a[i], b[i])));
            }
        }
        Ok(BoxSpec { a, b })
    }

    /// The box `[a_i, a_i + width]` in every coordinate.
    pub fn uniform_width(a: [f64; 7], width: f64) -> Result<Self, RateError> {
        BoxSpec::new(a, a.map(|x| x + width))
    }

    pub fn contains(&self, y: &[f64; 7]) -> bool {
        (0..7).all(|i| self.a[i] <= y[i] && y[i] <= self.b[i])
    }

    /// The linear constraints on the box: `sum a <= 1/2 <= sum b`,
    /// `a_i <= 2 b_{i+1}` for `1 <= i <= 6`, and `b_i >= 0.0446`.
    pub fn satisfies_constraints(&self) -> bool {
        let sa: f64 = self.a.iter().sum();
        let sb: f64 = self.b.iter().sum();
        sa <= 0.5 + CONSTRAINT_TOL
            && sb >= 0.5 - CONSTRAINT_TOL
            && (1..7).all(|i| self.a[i] <= 2.0 * self.b[(i + 1) % 7] + CONSTRAINT_TOL)
            && self.b.iter().all(|&b| b >= MIN_CUT_FRACTION - CONSTRAINT_TOL)
    }

    /// `Some(index)` of the first factor whose `b_{i+1} - a_i + z` can reach `1/e`.
    pub fn unsound_factor(&self) -> Option<(usize, f64)> {
        (1..7).find_map(|i| {
            let (lo, hi) = factor_interval(self.a[i], self.b[i], self.b[(i + 1) % 7]);
            if lo > hi {
                return None;
            }
            let reach = self.b[(i + 1) % 7] - self.a[i] + hi;
            (reach >= INV_E).then_some((i, reach))
        })
    }
}

/// Feasible boxes satisfy the linear constraints and keep every
/// `b_{i+1} - a_i + z` below `1/e`, where `g` is decreasing.
pub fn box_feasible(bx: &BoxSpec) -> bool {
    bx.satisfies_constraints() && bx.unsound_factor().is_none()
}

/// `B'_i = [max(0, a_i - b_{i+1}), min(b_i, b_{i+1})]` as `(lo, hi)`; empty when `lo > hi`.
fn factor_interval(a_i: f64, b_i: f64, b_next: f64) -> (f64, f64) {
    ((a_i - b_next).max(0.0), b_i.min(b_next))
}

/// Log of the dominating factor at `z`:
/// `g(b_i) g(b') g(b_i + b' - z) / (g(z) g(b_i - z)^2 g(b' - a_i + z) g(b' - z))`.
pub fn factor_log(a_i: f64, b_i: f64, b_next: f64, z: f64) -> f64 {
    xlnx(b_i) + xlnx(b_next) + xlnx(b_i + b_next - z)
        - xlnx(z)
        - 2.0 * xlnx(b_i - z)
        - xlnx(b_next - a_i + z)
        - xlnx(b_next - z)
}

/// The `z`-derivative of [`factor_log`]:
/// `ln((b' - z)(b_i - z)^2 / (z (b_i + b' - z)(b' - a_i + z)))`.
pub fn factor_log_derivative(a_i: f64, b_i: f64, b_next: f64, z: f64) -> f64 {
    ((b_next - z) * (b_i - z) * (b_i - z)).ln()
        - (z * (b_i + b_next - z) * (b_next - a_i + z)).ln()
}

/// Stationary point of [`factor_log`]: the smaller root of
/// `A z^2 + B z + C = 0` with `A = b' + b_i - a_i`,
/// `B = b' a_i + b_i a_i - 3 b' b_i - b_i^2 - b'^2`, `C = b_i^2 b'`.
pub fn critical_z(a_i: f64, b_i: f64, b_next: f64) -> Result<f64, RateError> {
    if !(b_i > 0.0 && b_next > 0.0) {
        return Err(RateError::NonPositiveWidth { b_i, b_next });
    }
    let qa = b_next + b_i - a_i;
    let qb = b_next * a_i + b_i * a_i - 3.0 * b_next * b_i - b_i * b_i - b_next * b_next;
    let qc = b_i * b_i * b_next;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Err(RateError::NegativeDiscriminant(disc));
    }
    let root = disc.sqrt();
    // (-B - sqrt D) / 2A, rewritten as 2C / (-B + sqrt D) when B < 0 to avoid cancellation
    if qb < 0.0 {
        Ok(2.0 * qc / (-qb + root))
    } else {
        Ok((-qb - root) / (2.0 * qa))
    }
}

/// Maximum of a unimodal `f` on `[lo, hi]`: dense scan, then golden-section
/// refinement on the bracket around the best sample. Returns `(argmax, max)`.
pub fn scan_maximize<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    if hi <= lo {
        return (lo, f(lo));
    }
    let step = (hi - lo) / points as f64;
    let mut best = (lo, f(lo));
    let mut best_k = 0;
    for k in 1..=points {
        let x = if k == points { hi } else { lo + step * k as f64 };
        let v = f(x);
        if v > best.1 {
            best = (x, v);
            best_k = k;
        }
    }
    let mut left = lo + step * best_k.saturating_sub(1) as f64;
    let mut right = (lo + step * (best_k + 1) as f64).min(hi);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = right - phi * (right - left);
    let mut x2 = left + phi * (right - left);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            left = x1;
            x1 = x2;
            f1 = f2;
            x2 = left + phi * (right - left);
            f2 = f(x2);
        } else {
            right = x2;
            x2 = x1;
            f2 = f1;
            x1 = right - phi * (right - left);
            f1 = f(x1);
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Bound on factor `i` of the rate over a box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorBound {
    pub index: usize,
    pub z_star: f64,
    pub log_factor: f64,
    /// False when `B'_i` is empty; the factor is then zero (log `-inf`).
    pub feasible: bool,
    /// The closed-form stationary point was unusable and a scan was used instead.
    pub used_fallback: bool,
}

/// Upper bound for factor `i` (`1..=6`, with `b_7 = b_0`) over the box.
///
/// Evaluates the dominating expression at the stationary point clamped into
/// `B'_i` and at both ends of `B'_i`, and keeps the largest. Refuses boxes
/// where `b_{i+1} - a_i + z` can reach `1/e`.
pub fn box_factor(index: usize, bx: &BoxSpec) -> Result<FactorBound, RateError> {
    if !(1..=6).contains(&index) {
        return Err(RateError::BadIndex(index));
    }
    factor_bound(index, bx.a[index], bx.b[index], bx.b[(index + 1) % 7])
}

/// [`box_factor`] on raw coordinates.
pub(crate) fn factor_bound(index: usize, a_i: f64, b_i: f64, b_next: f64) -> Result<FactorBound, RateError> {
    let (lo, hi) = factor_interval(a_i, b_i, b_next);
    if lo > hi {
        return Ok(FactorBound {
            index,
            z_star: f64::NAN,
            log_factor: f64::NEG_INFINITY,
            feasible: false,
            used_fallback: false,
        });
    }
    let reach = b_next - a_i + hi;
    if reach >= INV_E {
        return Err(RateError::UnsoundBox { index, reach });
    }
    let f = |z: f64| factor_log(a_i, b_i, b_next, z);
    let slack = 1e-12 * (1.0 + hi);
    let closed_form = critical_z(a_i, b_i, b_next)
        .ok()
        .filter(|z| z.is_finite() && *z >= lo - slack && *z <= hi + slack);
    let (z_star, interior, used_fallback) = match closed_form {
        Some(z) => {
            let z = z.clamp(lo, hi);
            (z, f(z), false)
        }
        None => {
            let (z, v) = scan_maximize(f, lo, hi, FALLBACK_SCAN_POINTS);
            (z, v, true)
        }
    };
    let log_factor = interior.max(f(lo)).max(f(hi));
    Ok(FactorBound {
        index,
        z_star,
        log_factor,
        feasible: true,
        used_fallback,
    })
}

/// `2 L(x + b1) - L(x) - 2 L(b1)`, the log of `g(x + b1)^2 / (g(x) g(b1)^2)`.
fn first_factor_log(x: f64, b1: f64) -> f64 {
    2.0 * xlnx(x + b1) - xlnx(x) - 2.0 * xlnx(b1)
}

/// Bound on the leading factor over `y_0 in [a0, b0]`, `y_1 <= b1`.
///
/// The ratio increases in `y_1`, so `y_1 = b1`. In `x = y_0` the candidates
/// are both ends and any stationary point inside `[a0, b0]`, i.e. a root of
/// `e x^2 + (2 e b1 - 1) x + e b1^2 = 0`.
pub fn f0_bound(a0: f64, b0: f64, b1: f64) -> Result<f64, RateError> {
    if !(a0 >= 0.0 && a0 <= b0) {
        return Err(RateError::MalformedBox(format!("a_0 = {a0}, b_0 = {b0}")));
    }
    if !(b1 > 0.0) {
        return Err(RateError::NonPositiveWidth { b_i: b0, b_next: b1 });
    }
    let mut best = first_factor_log(a0, b1).max(first_factor_log(b0, b1));
    let e = std::f64::consts::E;
    let (qa, qb, qc) = (e, 2.0 * e * b1 - 1.0, e * b1 * b1);
    let disc = qb * qb - 4.0 * qa * qc;
    if disc >= 0.0 {
        let r = disc.sqrt();
        for x in [(-qb - r) / (2.0 * qa), (-qb + r) / (2.0 * qa)] {
            if x > a0 && x < b0 {
                best = best.max(first_factor_log(x, b1));
            }
        }
    }
    Ok(best)
}

/// Sum of the log bounds, without checking the linear constraints.
///
/// A factor with empty `B'_i` makes the whole bound `-inf`.
pub fn box_log_bound(bx: &BoxSpec) -> Result<(f64, usize), RateError> {
    let mut total = f0_bound(bx.a[0], bx.b[0], bx.b[1])?;
    let mut fallbacks = 0;
    for i in 1..7 {
        let fb = box_factor(i, bx)?;
        if fb.used_fallback {
            fallbacks += 1;
        }
        total += fb.log_factor;
    }
    Ok((total, fallbacks))
}

/// Upper bound on the log-rate over a feasible box.
pub fn box_bound(bx: &BoxSpec) -> Result<f64, RateError> {
    if !bx.satisfies_constraints() {
        return Err(RateError::InfeasibleBox);
    }
    box_log_bound(bx).map(|(v, _)| v)
}

/// Checks the point constraints: `sum y = 1/2`, `y_i <= 2 y_{i+1}` for
/// `1 <= i <= 6`, `y_i >= 0.0446`.
pub fn check_point(y: &[f64; 7]) -> Result<(), RateError> {
    let s: f64 = y.iter().sum();
    if (s - 0.5).abs() > 1e-12 {
        return Err(RateError::InfeasiblePoint(format!("sum is {s}, not 1/2")));
    }
    if let Some(i) = (0..7).find(|&i| !(y[i] >= MIN_CUT_FRACTION)) {
        return Err(RateError::InfeasiblePoint(format!("y_{i} = {} < {MIN_CUT_FRACTION}", y[i])));
    }
    if let Some(i) = (1..7).find(|&i| y[i] > 2.0 * y[(i + 1) % 7]) {
        return Err(RateError::InfeasiblePoint(format!(
            "y_{i} = {} > 2 y_{} = {}",
            y[i],
            (i + 1) % 7,
            2.0 * y[(i + 1) % 7]
        )));
    }
    Ok(())
}

/// Inner factor of the pointwise rate at `z`.
pub fn point_factor_log(y_i: f64, y_next: f64, z: f64) -> f64 {
    xlnx(y_i) + xlnx(y_next) + xlnx(y_i + y_next - z)
        - xlnx(z)
        - 2.0 * xlnx(y_i - z)
        - xlnx(y_next - y_i + z)
        - xlnx(y_next - z)
}

/// The log-rate at a constrained point, each inner maximum found numerically.
pub fn point_rate(y: &[f64; 7]) -> Result<f64, RateError> {
    check_point(y)?;
    let mut total = first_factor_log(y[0], y[1]);
    for i in 1..7 {
        let (yi, yn) = (y[i], y[(i + 1) % 7]);
        let lo = (yi - yn).max(0.0);
        let hi = yi.min(yn);
        let (_, v) = scan_maximize(|z| point_factor_log(yi, yn, z), lo, hi, POINT_SCAN_POINTS);
        total += v;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_g_values() {
        assert_eq!(log_g(0.0), Ok(0.0));
        assert_eq!(log_g(1.0), Ok(0.0));
        assert!((log_g(0.5).unwrap() + 0.3465735903).abs() < 1e-10);
        assert!(log_g(-0.1).is_err());
    }

    #[test]
    fn g_decreasing_below_inverse_e() {
        let pts: Vec<f64> = (1..1000).map(|k| k as f64 * INV_E / 1000.0).collect();
        for w in pts.windows(2) {
            assert!(log_g(w[0]).unwrap() > log_g(w[1]).unwrap());
        }
    }

    #[test]
    fn critical_z_symmetric() {
        let z = critical_z(0.1, 0.1, 0.1).unwrap();
        assert!((z - 0.1 * (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((z - 0.0381966).abs() < 1e-7);
        assert!(factor_log_derivative(0.1, 0.1, 0.1, z).abs() < 1e-8);
    }

    #[test]
    fn critical_z_asymmetric() {
        let z = critical_z(0.10, 0.11, 0.12).unwrap();
        assert!((z - 0.0380580).abs() < 5e-7, "{z}");
        let residual = (0.12 - z) * (0.11 - z).powi(2) - z * (0.23 - z) * (0.02 + z);
        assert!(residual.abs() < 1e-9);
        assert!(factor_log_derivative(0.10, 0.11, 0.12, z).abs() < 1e-8);
    }

    #[test]
    fn critical_z_rejects_zero_width() {
        assert!(critical_z(0.0, 0.0, 0.1).is_err());
        assert!(critical_z(0.0, 0.1, -0.1).is_err());
    }

    #[test]
    fn f0_symmetric_value() {
        let v = f0_bound(0.1, 0.1, 0.1).unwrap();
        let expected = (0.2f64.powf(0.4) / 0.1f64.powf(0.3)).ln();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 1.048122f64.ln()).abs() < 1e-6);
        assert!((v.exp() - 1.048122).abs() < 1e-6);
    }

    #[test]
    fn f0_degenerate_interval_is_point_ratio() {
        for x in [0.05, 0.1, 0.2] {
            assert_eq!(f0_bound(x, x, 0.07).unwrap(), first_factor_log(x, 0.07));
        }
    }

    #[test]
    fn empty_factor_interval_is_zero() {
        let mut a = [0.07; 7];
        let mut b = [0.08; 7];
        a[1] = 0.1;
        b[1] = 0.1;
        b[2] = 0.045;
        a[2] = 0.04;
        let bx = BoxSpec::new(a, b).unwrap();
        let fb = box_factor(1, &bx).unwrap();
        assert!(!fb.feasible);
        assert_eq!(fb.log_factor, f64::NEG_INFINITY);
        assert_eq!(box_log_bound(&bx).unwrap().0, f64::NEG_INFINITY);
        assert!(!bx.satisfies_constraints());
    }

    #[test]
    fn uniform_box_feasibility() {
        let bx = BoxSpec::new([0.07; 7], [0.08; 7]).unwrap();
        assert!(box_feasible(&bx));
        let v = box_bound(&bx).unwrap();
        assert!(v.is_finite());
        let y = [1.0 / 14.0; 7];
        assert!(point_rate(&y).unwrap() <= v);
    }

    #[test]
    fn small_b_infeasible() {
        let mut b = [0.08; 7];
        b[3] = 0.044;
        let mut a = [0.07; 7];
        a[3] = 0.04;
        assert!(!box_feasible(&BoxSpec::new(a, b).unwrap()));
    }

    #[test]
    fn a_over_twice_b_infeasible() {
        let mut a = [0.05; 7];
        let mut b = [0.06; 7];
        a[1] = 0.20;
        b[1] = 0.21;
        a[2] = 0.08;
        b[2] = 0.09;
        let bx = BoxSpec::new(a, b).unwrap();
        assert!(!box_feasible(&bx));
        assert_eq!(box_bound(&bx), Err(RateError::InfeasibleBox));
    }

    #[test]
    fn unsound_box_refused() {
        let mut a = [0.0; 7];
        let mut b = [0.05; 7];
        a[1] = 0.0;
        b[1] = 0.2;
        b[2] = 0.2;
        a[2] = 0.0;
        let bx = BoxSpec::new(a, b).unwrap();
        assert!(matches!(box_factor(1, &bx), Err(RateError::UnsoundBox { index: 1, .. })));
        assert!(!box_feasible(&bx));
    }

    #[test]
    fn point_constraints() {
        assert!(point_rate(&[1.0 / 14.0; 7]).is_ok());
        let y = [0.05, 0.16, 0.07, 0.05, 0.05, 0.05, 0.07];
        assert!(matches!(point_rate(&y), Err(RateError::InfeasiblePoint(m)) if m.contains("y_1")));
        let mut y = [0.0760; 7];
        y[0] = 0.0440;
        y[1] = 0.5 - 0.0440 - 5.0 * 0.0760;
        assert!(matches!(point_rate(&y), Err(RateError::InfeasiblePoint(_))));
    }

    #[test]
    fn factor_at_critical_dominates_scan() {
        let bx = BoxSpec::new([0.1; 7], [0.1; 7]).unwrap();
        let fb = box_factor(3, &bx).unwrap();
        assert!((fb.z_star - 0.0381966).abs() < 1e-7);
        for k in 0..=1000 {
            let z = 0.1 * k as f64 / 1000.0;
            assert!(point_factor_log(0.1, 0.1, z) <= fb.log_factor + 1e-12);
        }
    }

    #[test]
    fn scan_maximize_finds_peak() {
        let (x, v) = scan_maximize(|x| -(x - 0.3).powi(2), 0.0, 1.0, 50);
        assert!((x - 0.3).abs() < 1e-6);
        assert!(v.abs() < 1e-12);
    }
}
