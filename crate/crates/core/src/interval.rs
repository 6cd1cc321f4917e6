//! Closed real intervals with outward-rounded arithmetic.
//!
//! Every operation returns an enclosure of the exact real-arithmetic result.
//! Endpoints are computed in round-to-nearest and then moved one representable
//! value outward only when the operation was inexact, which is detected with
//! error-free transformations (`two_sum`, `fma`). Exact results therefore stay
//! exact, and inexact ones are at most one ULP wider than the tightest
//! representable enclosure.
//!
//! The empty set is an explicit state. It is never encoded with NaN or with
//! reversed endpoints.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntervalError {
    #[error("reversed endpoints: lo = {lo} > hi = {hi}")]
    Reversed { lo: f64, hi: f64 },
    #[error("NaN endpoint")]
    NaN,
    #[error("operation on an empty interval")]
    Empty,
    #[error("division by an interval containing zero: {0}")]
    DivisionByZero(Interval),
    #[error("invalid rounding precision")]
    Precision,
}

/// Directed rounding of the four basic operations.
///
/// Each function returns the round-to-nearest result when it is exact and its
/// neighbour in the requested direction otherwise.
pub mod round {
    fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
        let bb = s - a;
        (a - (s - bb)) + (b - bb)
    }

    /// Rounds an overflowed finite-operand result back to the largest finite
    /// value when rounding toward zero.
    fn overflow_down(s: f64) -> f64 {
        if s == f64::INFINITY {
            f64::MAX
        } else {
            s
        }
    }

    fn overflow_up(s: f64) -> f64 {
        if s == f64::NEG_INFINITY {
            f64::MIN
        } else {
            s
        }
    }

    pub fn add_down(a: f64, b: f64) -> f64 {
        let s = a + b;
        if !s.is_finite() {
            return if a.is_finite() && b.is_finite() { overflow_down(s) } else { s };
        }
        if two_sum_err(a, b, s) < 0.0 {
            s.next_down()
        } else {
            s
        }
    }

    pub fn add_up(a: f64, b: f64) -> f64 {
        let s = a + b;
        if !s.is_finite() {
            return if a.is_finite() && b.is_finite() { overflow_up(s) } else { s };
        }
        if two_sum_err(a, b, s) > 0.0 {
            s.next_up()
        } else {
            s
        }
    }

    pub fn sub_down(a: f64, b: f64) -> f64 {
        add_down(a, -b)
    }

    pub fn sub_up(a: f64, b: f64) -> f64 {
        add_up(a, -b)
    }

    /// `0 * inf` is taken as 0, the usual convention for interval products.
    fn product(a: f64, b: f64) -> f64 {
        if a == 0.0 || b == 0.0 {
            0.0
        } else {
            a * b
        }
    }

    pub fn mul_down(a: f64, b: f64) -> f64 {
        let p = product(a, b);
        if p == 0.0 && (a == 0.0 || b == 0.0) {
            return 0.0;
        }
        if !p.is_finite() {
            return if a.is_finite() && b.is_finite() { overflow_down(p) } else { p };
        }
        let err = a.mul_add(b, -p);
        // Underflow leaves the residual unreliable; widen unconditionally.
        if err < 0.0 || (p.abs() < f64::MIN_POSITIVE) {
            p.next_down()
        } else {
            p
        }
    }

    pub fn mul_up(a: f64, b: f64) -> f64 {
        let p = product(a, b);
        if p == 0.0 && (a == 0.0 || b == 0.0) {
            return 0.0;
        }
        if !p.is_finite() {
            return if a.is_finite() && b.is_finite() { overflow_up(p) } else { p };
        }
        let err = a.mul_add(b, -p);
        if err > 0.0 || (p.abs() < f64::MIN_POSITIVE) {
            p.next_up()
        } else {
            p
        }
    }

    /// Sign of `a/b - q` for a finite nonzero quotient `q`.
    fn div_residual_sign(a: f64, b: f64, q: f64) -> f64 {
        // r = a - q*b is exact; a/b - q = r/b.
        let r = (-q).mul_add(b, a);
        r * b.signum()
    }

    pub fn div_down(a: f64, b: f64) -> f64 {
        let q = a / b;
        if !q.is_finite() {
            return if a.is_finite() { overflow_down(q) } else { q };
        }
        if q == 0.0 {
            return if a == 0.0 || b.is_infinite() || (a.signum() == b.signum()) { 0.0 } else { (-0.0f64).next_down() };
        }
        if q.abs() < f64::MIN_POSITIVE || div_residual_sign(a, b, q) < 0.0 {
            q.next_down()
        } else {
            q
        }
    }

    pub fn div_up(a: f64, b: f64) -> f64 {
        let q = a / b;
        if !q.is_finite() {
            return if a.is_finite() { overflow_up(q) } else { q };
        }
        if q == 0.0 {
            return if a == 0.0 || b.is_infinite() || (a.signum() != b.signum()) { 0.0 } else { 0.0f64.next_up() };
        }
        if q.abs() < f64::MIN_POSITIVE || div_residual_sign(a, b, q) > 0.0 {
            q.next_up()
        } else {
            q
        }
    }
}

/// Basic arithmetic operation selector for [`arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

type Bounds = (f64, f64);

/// Closed interval `[lo, hi]` or the empty set.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    bounds: Option<Bounds>,
}

impl Interval {
    pub const EMPTY: Interval = Interval { bounds: None };

    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() {
            return Err(IntervalError::NaN);
        }
        if lo > hi {
            return Err(IntervalError::Reversed { lo, hi });
        }
        Ok(Interval { bounds: Some((lo, hi)) })
    }

    /// Thin interval `[v, v]`.
    ///
    /// # Panics
    /// If `v` is NaN.
    pub fn point(v: f64) -> Self {
        assert!(!v.is_nan(), "NaN point interval");
        Interval { bounds: Some((v, v)) }
    }

    /// `[-r, r]`.
    pub fn symmetric(r: f64) -> Self {
        Interval::new(-r.abs(), r.abs()).expect("finite radius")
    }

    /// Tightest enclosure of `[c - r, c + r]`.
    pub fn from_center_radius(center: f64, radius: f64) -> Result<Self, IntervalError> {
        if center.is_nan() || radius.is_nan() {
            return Err(IntervalError::NaN);
        }
        if radius < 0.0 {
            return Err(IntervalError::Reversed { lo: center + radius, hi: center - radius });
        }
        Interval::new(round::sub_down(center, radius), round::add_up(center, radius))
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_none()
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        self.bounds
    }

    /// Lower endpoint.
    ///
    /// # Panics
    /// On the empty interval.
    pub fn lo(&self) -> f64 {
        self.bounds.expect("lo() of empty interval").0
    }

    /// Upper endpoint.
    ///
    /// # Panics
    /// On the empty interval.
    pub fn hi(&self) -> f64 {
        self.bounds.expect("hi() of empty interval").1
    }

    pub fn is_thin(&self) -> bool {
        matches!(self.bounds, Some((l, h)) if l == h)
    }

    /// `hi - lo`, rounded up.
    pub fn width(&self) -> Result<f64, IntervalError> {
        let (l, h) = self.bounds.ok_or(IntervalError::Empty)?;
        Ok(round::sub_up(h, l))
    }

    pub fn midpoint(&self) -> Result<f64, IntervalError> {
        let (l, h) = self.bounds.ok_or(IntervalError::Empty)?;
        if l == f64::NEG_INFINITY && h == f64::INFINITY {
            return Ok(0.0);
        }
        let m = 0.5 * l + 0.5 * h;
        Ok(m.clamp(l, h))
    }

    pub fn contains(&self, t: f64) -> bool {
        matches!(self.bounds, Some((l, h)) if l <= t && t <= h)
    }

    /// `self ⊆ other`. The empty set is a subset of everything.
    pub fn subset(&self, other: &Interval) -> bool {
        match (self.bounds, other.bounds) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some((l, h)), Some((ol, oh))) => ol <= l && h <= oh,
        }
    }

    /// No common point. The empty set is disjoint from everything.
    pub fn disjoint(&self, other: &Interval) -> bool {
        match (self.bounds, other.bounds) {
            (Some((l, h)), Some((ol, oh))) => h < ol || oh < l,
            _ => true,
        }
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        match (self.bounds, other.bounds) {
            (Some((l, h)), Some((ol, oh))) => {
                let lo = l.max(ol);
                let hi = h.min(oh);
                if lo <= hi {
                    Interval { bounds: Some((lo, hi)) }
                } else {
                    Interval::EMPTY
                }
            }
            _ => Interval::EMPTY,
        }
    }

    /// Smallest interval containing both operands; empty operands are ignored.
    pub fn hull(&self, other: &Interval) -> Interval {
        match (self.bounds, other.bounds) {
            (Some((l, h)), Some((ol, oh))) => Interval { bounds: Some((l.min(ol), h.max(oh))) },
            (Some(_), None) => *self,
            (None, _) => *other,
        }
    }

    pub fn checked_add(&self, rhs: &Interval) -> Result<Interval, IntervalError> {
        let ((l, h), (rl, rh)) = self.pair(rhs)?;
        Ok(Interval { bounds: Some((round::add_down(l, rl), round::add_up(h, rh))) })
    }

    pub fn checked_sub(&self, rhs: &Interval) -> Result<Interval, IntervalError> {
        let ((l, h), (rl, rh)) = self.pair(rhs)?;
        Ok(Interval { bounds: Some((round::sub_down(l, rh), round::sub_up(h, rl))) })
    }

    pub fn checked_mul(&self, rhs: &Interval) -> Result<Interval, IntervalError> {
        let ((l, h), (rl, rh)) = self.pair(rhs)?;
        let corners = [(l, rl), (l, rh), (h, rl), (h, rh)];
        let lo = corners.iter().map(|&(p, q)| round::mul_down(p, q)).fold(f64::INFINITY, f64::min);
        let hi = corners.iter().map(|&(p, q)| round::mul_up(p, q)).fold(f64::NEG_INFINITY, f64::max);
        Ok(Interval { bounds: Some((lo, hi)) })
    }

    /// Division by an interval that lies strictly on one side of zero.
    pub fn checked_div(&self, rhs: &Interval) -> Result<Interval, IntervalError> {
        let ((l, h), (rl, rh)) = self.pair(rhs)?;
        if rl <= 0.0 && rh >= 0.0 {
            return Err(IntervalError::DivisionByZero(*rhs));
        }
        let corners = [(l, rl), (l, rh), (h, rl), (h, rh)];
        let lo = corners.iter().map(|&(p, q)| round::div_down(p, q)).fold(f64::INFINITY, f64::min);
        let hi = corners.iter().map(|&(p, q)| round::div_up(p, q)).fold(f64::NEG_INFINITY, f64::max);
        Ok(Interval { bounds: Some((lo, hi)) })
    }

    fn pair(&self, rhs: &Interval) -> Result<(Bounds, Bounds), IntervalError> {
        match (self.bounds, rhs.bounds) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(IntervalError::Empty),
        }
    }

    /// Rounds the endpoints outward to the given decimal precision.
    ///
    /// The result always contains `self`.
    pub fn round_out(&self, precision: Precision) -> Result<Interval, IntervalError> {
        let (l, h) = self.bounds.ok_or(IntervalError::Empty)?;
        if precision.digits() == 0 && matches!(precision, Precision::Significant(_)) {
            return Err(IntervalError::Precision);
        }
        let lo = decimal::round_directed(l, precision, false);
        let hi = decimal::round_directed(h, precision, true);
        Interval::new(lo, hi)
    }

    /// Formats `[lo, hi]` after outward rounding, with trailing zeros kept so
    /// that every endpoint shows the requested precision.
    pub fn display_rounded(&self, precision: Precision) -> String {
        match self.round_out(precision) {
            Ok(r) => {
                format!("[{}, {}]", decimal::format_at(r.lo(), self.lo(), precision), decimal::format_at(r.hi(), self.hi(), precision))
            }
            Err(_) => "empty".to_string(),
        }
    }
}

/// Interval operation dispatch; errors on empty operands and on division by
/// an interval containing zero.
pub fn arith(op: ArithOp, lhs: &Interval, rhs: &Interval) -> Result<Interval, IntervalError> {
    match op {
        ArithOp::Add => lhs.checked_add(rhs),
        ArithOp::Sub => lhs.checked_sub(rhs),
        ArithOp::Mul => lhs.checked_mul(rhs),
        ArithOp::Div => lhs.checked_div(rhs),
    }
}

// Operator forms propagate emptiness instead of failing.

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        self.checked_add(&rhs).unwrap_or(Interval::EMPTY)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        self.checked_sub(&rhs).unwrap_or(Interval::EMPTY)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        self.checked_mul(&rhs).unwrap_or(Interval::EMPTY)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        match self.bounds {
            Some((l, h)) => Interval { bounds: Some((-h, -l)) },
            None => Interval::EMPTY,
        }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bounds {
            Some((l, h)) => write!(f, "[{:?}, {:?}]", l, h),
            None => write!(f, "∅"),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bounds {
            Some((l, h)) => write!(f, "[{}, {}]", l, h),
            None => write!(f, "empty"),
        }
    }
}

/// Decimal precision for outward rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Digits after the decimal point.
    Decimals(u32),
    /// Significant decimal digits.
    Significant(u32),
}

impl Precision {
    pub fn digits(&self) -> u32 {
        match *self {
            Precision::Decimals(d) | Precision::Significant(d) => d,
        }
    }
}

mod decimal {
    use super::Precision;

    /// Position (power of ten of the last kept digit, negated) for `x`.
    fn decimals_for(x: f64, precision: Precision) -> i32 {
        match precision {
            Precision::Decimals(d) => d as i32,
            Precision::Significant(s) => {
                if x == 0.0 {
                    return s as i32 - 1;
                }
                let e = x.abs().log10().floor() as i32;
                // log10 may be off by one near powers of ten.
                let e = if 10f64.powi(e) > x.abs() {
                    e - 1
                } else if 10f64.powi(e + 1) <= x.abs() {
                    e + 1
                } else {
                    e
                };
                s as i32 - 1 - e
            }
        }
    }

    /// Exact decimal digits of `|x|` as (integer digits, fractional digits).
    fn exact_digits(x: f64) -> (String, String) {
        let s = format!("{:.1100}", x.abs());
        let (i, f) = s.split_once('.').unwrap_or((s.as_str(), ""));
        (i.to_string(), f.to_string())
    }

    /// Increments a string of decimal digits by one unit in the last place.
    fn increment(digits: &mut Vec<u8>) {
        for d in digits.iter_mut().rev() {
            if *d == 9 {
                *d = 0;
            } else {
                *d += 1;
                return;
            }
        }
        digits.insert(0, 1);
    }

    /// Decimal string of `x` rounded toward +inf (`up`) or -inf at the
    /// 10^-decimals position.
    fn directed_string(x: f64, decimals: i32, up: bool) -> String {
        let (int_part, frac_part) = exact_digits(x);
        let mut all: Vec<u8> = int_part.bytes().chain(frac_part.bytes()).map(|b| b - b'0').collect();
        let point = int_part.len() as i32;
        let keep = point + decimals;
        let negative = x < 0.0;
        // Magnitude rounding direction: away from zero for (up, positive) and
        // (down, negative).
        let away = up != negative;
        let (mut kept, rest_nonzero) = if keep <= 0 {
            (Vec::new(), all.iter().any(|&d| d != 0))
        } else {
            let k = keep as usize;
            if k >= all.len() {
                all.resize(k, 0);
                (all.clone(), false)
            } else {
                (all[..k].to_vec(), all[k..].iter().any(|&d| d != 0))
            }
        };
        if kept.is_empty() {
            kept.push(0);
        }
        if rest_nonzero && away {
            increment(&mut kept);
        }
        let mut s = String::new();
        if negative && kept.iter().any(|&d| d != 0) {
            s.push('-');
        }
        if decimals > 0 {
            let frac_len = decimals as usize;
            while kept.len() < frac_len {
                kept.insert(0, 0);
            }
            let split = kept.len() - frac_len;
            let ip: String = kept[..split].iter().map(|d| char::from(b'0' + d)).collect();
            let fp: String = kept[split..].iter().map(|d| char::from(b'0' + d)).collect();
            s.push_str(if ip.is_empty() { "0" } else { &ip });
            s.push('.');
            s.push_str(&fp);
        } else {
            let ip: String = kept.iter().map(|d| char::from(b'0' + d)).collect();
            s.push_str(if ip.is_empty() { "0" } else { &ip });
            for _ in 0..(-decimals) {
                s.push('0');
            }
        }
        s
    }

    pub(super) fn round_directed(x: f64, precision: Precision, up: bool) -> f64 {
        if !x.is_finite() {
            return x;
        }
        let decimals = decimals_for(x, precision);
        let s = directed_string(x, decimals, up);
        let v: f64 = s.parse().expect("generated decimal parses");
        // Round-to-nearest is monotone, so these only trigger if the decimal
        // string itself was not on the correct side of x.
        if up && v < x {
            v.next_up()
        } else if !up && v > x {
            v.next_down()
        } else {
            v
        }
    }

    /// Formats an already rounded endpoint with the digit count implied by
    /// the original value.
    pub(super) fn format_at(rounded: f64, original: f64, precision: Precision) -> String {
        if !rounded.is_finite() {
            return format!("{}", rounded);
        }
        let decimals = decimals_for(original, precision).max(0) as usize;
        format!("{:.*}", decimals, rounded)
    }
}
