//! Piecewise-linear charging functions.
//!
//! A charging function maps the state of charge (kWh) reached from an empty
//! battery to the elapsed charging time (hours). Breakpoints start at `(0, 0)`
//! and end at `(Q, time_to_full)`. Charging power may only drop as the battery
//! fills, so the time map is convex in energy (the energy map is concave in time).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::TechId;

/// Slack used when checking that an argument lies inside the function domain.
const DOMAIN_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChargingError {
    #[error("charging function needs at least two breakpoints, got {0}")]
    TooFewBreakpoints(usize),
    #[error("first breakpoint must be (0, 0), got ({0}, {1})")]
    BadOrigin(f64, f64),
    #[error("breakpoint {index} is not finite")]
    NonFinite { index: usize },
    #[error("breakpoints must be strictly increasing in energy and time (at index {index})")]
    NotIncreasing { index: usize },
    #[error("charging rate increases at breakpoint {index}; the function is not concave")]
    NotConcave { index: usize },
    #[error("state of charge {q} kWh outside [0, {capacity}]")]
    SocOutOfRange { q: f64, capacity: f64 },
    #[error("charging time {t} h outside [0, {full}]")]
    TimeOutOfRange { t: f64, full: f64 },
    #[error("exit SoC {q_out} kWh is below entry SoC {q_in} kWh")]
    Order { q_in: f64, q_out: f64 },
}

/// Concave piecewise-linear charging function of one station technology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargingFunction {
    label: TechId,
    breakpoints: Vec<(f64, f64)>,
}

impl ChargingFunction {
    /// Validates and builds a function from `(energy kWh, time h)` breakpoints.
    pub fn new(
        label: impl Into<TechId>,
        breakpoints: Vec<(f64, f64)>,
    ) -> Result<Self, ChargingError> {
        if breakpoints.len() < 2 {
            return Err(ChargingError::TooFewBreakpoints(breakpoints.len()));
        }
        for (index, &(e, t)) in breakpoints.iter().enumerate() {
            if !e.is_finite() || !t.is_finite() {
                return Err(ChargingError::NonFinite { index });
            }
        }
        let (e0, t0) = breakpoints[0];
        if e0 != 0.0 || t0 != 0.0 {
            return Err(ChargingError::BadOrigin(e0, t0));
        }
        for index in 1..breakpoints.len() {
            let (pe, pt) = breakpoints[index - 1];
            let (e, t) = breakpoints[index];
            if e <= pe || t <= pt {
                return Err(ChargingError::NotIncreasing { index });
            }
        }
        // rate (kWh/h) must be nonincreasing: compare by cross-multiplication
        for index in 2..breakpoints.len() {
            let (e0, t0) = breakpoints[index - 2];
            let (e1, t1) = breakpoints[index - 1];
            let (e2, t2) = breakpoints[index];
            let lhs = (e2 - e1) * (t1 - t0);
            let rhs = (e1 - e0) * (t2 - t1);
            if lhs > rhs * (1.0 + 1e-12) + 1e-15 {
                return Err(ChargingError::NotConcave { index: index - 1 });
            }
        }
        Ok(Self {
            label: label.into(),
            breakpoints,
        })
    }

    pub fn label(&self) -> &TechId {
        &self.label
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    /// Battery capacity covered by the function (last breakpoint energy).
    pub fn capacity(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1].0
    }

    pub fn time_to_full(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1].1
    }

    /// Number of linear segments.
    pub fn segment_count(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Energy width of each segment (the `E'` coefficients of the α-blocks).
    pub fn energy_widths(&self) -> Vec<f64> {
        self.breakpoints.windows(2).map(|w| w[1].0 - w[0].0).collect()
    }

    /// Time width of each segment (the `T'` coefficients of the α-blocks).
    pub fn time_widths(&self) -> Vec<f64> {
        self.breakpoints.windows(2).map(|w| w[1].1 - w[0].1).collect()
    }

    /// Marginal charging time (h/kWh) of each segment. Nondecreasing.
    pub fn marginal_times(&self) -> Vec<f64> {
        self.breakpoints
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect()
    }

    fn check_soc(&self, q: f64) -> Result<f64, ChargingError> {
        let cap = self.capacity();
        if !(q >= -DOMAIN_SLACK && q <= cap + DOMAIN_SLACK) {
            return Err(ChargingError::SocOutOfRange { q, capacity: cap });
        }
        Ok(q.clamp(0.0, cap))
    }

    /// Time needed to charge an empty battery up to `q` kWh.
    pub fn time_at_soc(&self, q: f64) -> Result<f64, ChargingError> {
        let q = self.check_soc(q)?;
        Ok(self.time_at_soc_unchecked(q))
    }

    /// Interpolates without domain checks; `q` is clamped to `[0, Q]`.
    pub(crate) fn time_at_soc_unchecked(&self, q: f64) -> f64 {
        let bp = &self.breakpoints;
        let q = q.clamp(0.0, self.capacity());
        let k = segment_index(bp, |p| p.0, q);
        let (e0, t0) = bp[k];
        let (e1, t1) = bp[k + 1];
        if q >= e1 {
            return t1;
        }
        t0 + (q - e0) * (t1 - t0) / (e1 - e0)
    }

    /// SoC reached after charging an empty battery for `t` hours.
    pub fn soc_at_time(&self, t: f64) -> Result<f64, ChargingError> {
        let full = self.time_to_full();
        if !(t >= -DOMAIN_SLACK && t <= full + DOMAIN_SLACK) {
            return Err(ChargingError::TimeOutOfRange { t, full });
        }
        Ok(self.soc_at_time_unchecked(t))
    }

    pub(crate) fn soc_at_time_unchecked(&self, t: f64) -> f64 {
        let bp = &self.breakpoints;
        let t = t.clamp(0.0, self.time_to_full());
        let k = segment_index(bp, |p| p.1, t);
        let (e0, t0) = bp[k];
        let (e1, t1) = bp[k + 1];
        if t >= t1 {
            return e1;
        }
        e0 + (t - t0) * (e1 - e0) / (t1 - t0)
    }

    /// Time spent charging from `q_in` to `q_out`.
    pub fn charge_duration(&self, q_in: f64, q_out: f64) -> Result<f64, ChargingError> {
        if q_out < q_in - DOMAIN_SLACK {
            return Err(ChargingError::Order { q_in, q_out });
        }
        let a = self.time_at_soc(q_in)?;
        let b = self.time_at_soc(q_out)?;
        Ok((b - a).max(0.0))
    }

    /// Longest possible charge (empty to full); the big-M for charging-time rows.
    pub fn max_charge_duration(&self) -> f64 {
        self.time_to_full()
    }

    /// Single-segment secant from `(0, 0)` to `(Q, time_to_full)`.
    pub fn linearize(&self) -> ChargingFunction {
        ChargingFunction {
            label: self.label.clone(),
            breakpoints: vec![(0.0, 0.0), (self.capacity(), self.time_to_full())],
        }
    }

    pub fn is_linear(&self) -> bool {
        self.breakpoints.len() == 2
    }

    /// `true` when this function's marginal charging time is no larger than
    /// `other`'s at every state of charge.
    pub fn is_pointwise_at_least_as_fast_as(&self, other: &ChargingFunction) -> bool {
        let cap = self.capacity().min(other.capacity());
        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .map(|p| p.0)
            .filter(|&e| e < cap)
            .collect();
        cuts.push(cap);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2).all(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            self.marginal_time_at(mid) <= other.marginal_time_at(mid) * (1.0 + 1e-12)
        })
    }

    /// Largest marginal time over the whole function (the slowest segment).
    pub fn max_marginal_time(&self) -> f64 {
        self.marginal_times().into_iter().fold(0.0, f64::max)
    }

    pub fn min_marginal_time(&self) -> f64 {
        self.marginal_times()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    fn marginal_time_at(&self, q: f64) -> f64 {
        let k = segment_index(&self.breakpoints, |p| p.0, q);
        let (e0, t0) = self.breakpoints[k];
        let (e1, t1) = self.breakpoints[k + 1];
        (t1 - t0) / (e1 - e0)
    }
}

impl fmt::Display for ChargingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[", self.label)?;
        for (i, (e, t)) in self.breakpoints.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({e}, {t})")?;
        }
        write!(f, "]")
    }
}

/// Index `k` of the segment `[x_k, x_{k+1}]` containing `x` (last segment if beyond).
fn segment_index(bp: &[(f64, f64)], coord: impl Fn(&(f64, f64)) -> f64, x: f64) -> usize {
    let above = bp.partition_point(|p| coord(p) <= x);
    above.saturating_sub(1).min(bp.len() - 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f() -> ChargingFunction {
        ChargingFunction::new("m", vec![(0.0, 0.0), (10.0, 0.5), (16.0, 1.25)]).unwrap()
    }

    #[test]
    fn time_at_soc_examples() {
        let f = f();
        assert_eq!(f.time_at_soc(10.0).unwrap(), 0.5);
        assert!((f.time_at_soc(12.0).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(f.time_at_soc(0.0).unwrap(), 0.0);
        assert!(f.time_at_soc(16.5).is_err());
        assert!(f.time_at_soc(-0.1).is_err());
    }

    #[test]
    fn soc_at_time_examples() {
        let f = f();
        assert!((f.soc_at_time(0.75).unwrap() - 12.0).abs() < 1e-12);
        assert_eq!(f.soc_at_time(1.25).unwrap(), 16.0);
        assert!(f.soc_at_time(1.3).is_err());
    }

    #[test]
    fn charge_duration_examples() {
        let f = f();
        assert!((f.charge_duration(8.0, 12.0).unwrap() - 0.35).abs() < 1e-12);
        assert_eq!(f.charge_duration(7.0, 7.0).unwrap(), 0.0);
        assert!(matches!(
            f.charge_duration(12.0, 8.0),
            Err(ChargingError::Order { .. })
        ));
    }

    #[test]
    fn charging_slows_down_past_the_fast_segment() {
        let f = ChargingFunction::new("x", vec![(0.0, 0.0), (6.0, 0.2), (16.0, 1.2)]).unwrap();
        assert!(f.charge_duration(0.0, 8.0).unwrap() < f.charge_duration(8.0, 16.0).unwrap());
    }

    #[test]
    fn max_charge_duration_is_full_time() {
        assert_eq!(f().max_charge_duration(), 1.25);
        let lin = ChargingFunction::new("l", vec![(0.0, 0.0), (16.0, 0.8)]).unwrap();
        assert_eq!(lin.max_charge_duration(), 0.8);
        let f = f();
        for a in 0..=32 {
            for b in a..=32 {
                let d = f.charge_duration(a as f64 * 0.5, b as f64 * 0.5).unwrap();
                assert!(d <= f.max_charge_duration() + 1e-12);
            }
        }
    }

    #[test]
    fn linearize_is_secant_and_idempotent() {
        let lin = f().linearize();
        assert_eq!(lin.breakpoints(), &[(0.0, 0.0), (16.0, 1.25)]);
        assert_eq!(lin.linearize(), lin);
    }

    #[test]
    fn secant_overestimates_partial_charge_times() {
        // convex time map: the secant lies above it everywhere inside (0, Q)
        let f = f();
        let lin = f.linearize();
        for i in 0..=160 {
            let q = i as f64 * 0.1;
            assert!(lin.time_at_soc(q).unwrap() >= f.time_at_soc(q).unwrap() - 1e-12);
        }
    }

    #[test]
    fn rejects_bad_breakpoints() {
        assert!(matches!(
            ChargingFunction::new("b", vec![(0.0, 0.0), (10.0, 0.5), (12.0, 0.4)]),
            Err(ChargingError::NotIncreasing { index: 2 })
        ));
        // faster second segment
        assert!(matches!(
            ChargingFunction::new("b", vec![(0.0, 0.0), (4.0, 0.5), (16.0, 0.6)]),
            Err(ChargingError::NotConcave { .. })
        ));
        assert!(ChargingFunction::new("b", vec![(1.0, 0.0), (16.0, 1.0)]).is_err());
        assert!(ChargingFunction::new("b", vec![(0.0, 0.0)]).is_err());
    }

    #[test]
    fn pointwise_speed_comparison() {
        let fast = ChargingFunction::new("f", vec![(0.0, 0.0), (12.0, 0.3), (16.0, 0.6)]).unwrap();
        let slow = ChargingFunction::new("s", vec![(0.0, 0.0), (12.0, 1.2), (16.0, 2.0)]).unwrap();
        assert!(fast.is_pointwise_at_least_as_fast_as(&slow));
        assert!(!slow.is_pointwise_at_least_as_fast_as(&fast));
        assert!(slow.is_pointwise_at_least_as_fast_as(&slow));
    }

    proptest::proptest! {
        #[test]
        fn duration_is_additive(a in 0.0..16.0f64, b in 0.0..16.0f64, c in 0.0..16.0f64) {
            let mut v = [a, b, c];
            v.sort_by(f64::total_cmp);
            let f = f();
            let lhs = f.charge_duration(v[0], v[1]).unwrap() + f.charge_duration(v[1], v[2]).unwrap();
            let rhs = f.charge_duration(v[0], v[2]).unwrap();
            proptest::prop_assert!((lhs - rhs).abs() < 1e-9);
        }

        #[test]
        fn time_map_is_strictly_monotone(a in 0.0..16.0f64, b in 0.0..16.0f64) {
            let f = f();
            if a < b {
                proptest::prop_assert!(f.time_at_soc(a).unwrap() < f.time_at_soc(b).unwrap());
            }
        }
    }
}
