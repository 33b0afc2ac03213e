use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Drive-sign sequence. Every segment is one closed phase-space loop of
/// length `2π/δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum WalshOrder {
    None,
    One,
    Three,
}

impl WalshOrder {
    pub const ALL: [WalshOrder; 3] = [WalshOrder::None, WalshOrder::One, WalshOrder::Three];

    pub fn signs(self) -> &'static [i8] {
        match self {
            WalshOrder::None => &[1],
            WalshOrder::One => &[1, -1],
            WalshOrder::Three => &[1, -1, -1, 1],
        }
    }

    pub fn loops(self) -> usize {
        self.signs().len()
    }

    pub fn index(self) -> u8 {
        match self {
            WalshOrder::None => 0,
            WalshOrder::One => 1,
            WalshOrder::Three => 3,
        }
    }
}

impl TryFrom<u8> for WalshOrder {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(WalshOrder::None),
            1 => Ok(WalshOrder::One),
            3 => Ok(WalshOrder::Three),
            _ => Err(Error::param("walsh_order", format!("{v} is not one of 0, 1, 3"))),
        }
    }
}

impl From<WalshOrder> for u8 {
    fn from(w: WalshOrder) -> u8 {
        w.index()
    }
}

impl fmt::Display for WalshOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T: Real> {
    pub sign: i8,
    /// s
    pub duration: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateSchedule<T: Real> {
    pub walsh_order: WalshOrder,
    /// Detuning δ, rad/s.
    pub delta: T,
    /// Gate Rabi frequency Ω_R, rad/s.
    pub rabi: T,
    pub segments: Vec<Segment<T>>,
}

impl<T: Real> GateSchedule<T> {
    pub fn new(walsh_order: WalshOrder, delta: T, rabi: T) -> Result<Self> {
        if !(delta > T::zero()) || !delta.is_finite() {
            return Err(Error::param("delta", "must be positive and finite"));
        }
        if !(rabi >= T::zero()) || !rabi.is_finite() {
            return Err(Error::param("rabi", "must be non-negative and finite"));
        }
        let period = T::TAU() / delta;
        let segments = walsh_order
            .signs()
            .iter()
            .map(|&sign| Segment { sign, duration: period })
            .collect();
        Ok(Self {
            walsh_order,
            delta,
            rabi,
            segments,
        })
    }

    /// Schedule with `δ = 2π / t_loop` and the analytic Rabi frequency.
    pub fn from_loop_time(walsh_order: WalshOrder, t_loop: T) -> Result<Self> {
        if !(t_loop > T::zero()) {
            return Err(Error::param("t_gate", "must be positive"));
        }
        let delta = T::TAU() / t_loop;
        Self::new(walsh_order, delta, analytic_rabi(delta, walsh_order.loops()))
    }

    pub fn with_rabi(&self, rabi: T) -> Self {
        Self { rabi, ..self.clone() }
    }

    pub fn duration(&self) -> T {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Segment end times, excluding the final one.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut t = T::zero();
        let mut out = Vec::with_capacity(self.segments.len());
        for s in &self.segments[..self.segments.len().saturating_sub(1)] {
            t += s.duration;
            out.push(t);
        }
        out
    }

    /// Walsh sign at `t`; a breakpoint belongs to the following segment.
    pub fn sign_at(&self, t: T) -> T {
        sign_lookup(&self.breakpoints(), &self.signs(), t)
    }

    pub fn signs(&self) -> Vec<T> {
        self.segments.iter().map(|s| T::lit(f64::from(s.sign))).collect()
    }
}

pub(crate) fn sign_lookup<T: Real>(breakpoints: &[T], signs: &[T], t: T) -> T {
    let k = breakpoints.partition_point(|&b| b <= t);
    signs[k.min(signs.len() - 1)]
}

/// `Ω_R = δ / (4√K)`: after `K` closed loops the same-spin states pick up the
/// phase that makes the gate equivalent to `exp(−i π/4 σz⊗σz)`.
pub fn analytic_rabi<T: Real>(delta: T, loops: usize) -> T {
    delta / (T::lit(4.0) * T::from_usize_lossy(loops).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn walsh_segments() {
        let delta = TAU / 2e-6;
        for (w, signs) in [
            (WalshOrder::None, vec![1]),
            (WalshOrder::One, vec![1, -1]),
            (WalshOrder::Three, vec![1, -1, -1, 1]),
        ] {
            let s = GateSchedule::new(w, delta, 1.0).unwrap();
            assert_eq!(s.segments.iter().map(|x| x.sign).collect::<Vec<_>>(), signs);
            assert!((s.duration() - 2e-6 * signs.len() as f64).abs() < 1e-18);
            assert!(s.segments.iter().all(|x| (x.duration - 2e-6).abs() < 1e-18));
        }
    }

    #[test]
    fn sign_switches_at_breakpoints() {
        let s = GateSchedule::new(WalshOrder::Three, TAU, 1.0).unwrap();
        assert_eq!(s.breakpoints(), vec![1.0, 2.0, 3.0]);
        assert_eq!(s.sign_at(0.5), 1.0);
        assert_eq!(s.sign_at(1.0), -1.0);
        assert_eq!(s.sign_at(2.5), -1.0);
        assert_eq!(s.sign_at(3.5), 1.0);
        assert_eq!(s.sign_at(9.0), 1.0);
    }

    #[test]
    fn walsh_order_parsing() {
        assert_eq!(WalshOrder::try_from(3).unwrap(), WalshOrder::Three);
        assert!(WalshOrder::try_from(2).is_err());
        let w: WalshOrder = serde_json::from_str("1").unwrap();
        assert_eq!(w, WalshOrder::One);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GateSchedule::new(WalshOrder::None, 0.0, 1.0).is_err());
        assert!(GateSchedule::new(WalshOrder::None, 1.0, -1.0).is_err());
        assert!(GateSchedule::<f64>::from_loop_time(WalshOrder::None, 0.0).is_err());
    }
}
