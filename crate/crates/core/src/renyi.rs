//! Rényi indices and entropies of (possibly unnormalized) spectra.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::numeric::CompensatedSum;

/// Rényi index `n ≥ 1`; `Infinite` selects the single-copy entropy `-log λ_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RenyiOrder {
    Finite(f64),
    Infinite,
}

impl RenyiOrder {
    pub fn new(n: f64) -> Result<Self> {
        if n.is_nan() || n < 1.0 {
            return invalid(format!("Rényi index must satisfy n >= 1, got {n}"));
        }
        if n.is_infinite() {
            return Ok(RenyiOrder::Infinite);
        }
        Ok(RenyiOrder::Finite(n))
    }

    pub const VON_NEUMANN: RenyiOrder = RenyiOrder::Finite(1.0);

    pub fn value(self) -> f64 {
        match self {
            RenyiOrder::Finite(n) => n,
            RenyiOrder::Infinite => f64::INFINITY,
        }
    }

    /// The index as an integer `>= 2`, if it is one.
    pub fn as_replica_count(self) -> Option<u32> {
        match self {
            RenyiOrder::Finite(n) if n >= 2.0 && n.fract() == 0.0 && n <= u32::MAX as f64 => Some(n as u32),
            _ => None,
        }
    }

    pub fn is_von_neumann(self) -> bool {
        self == RenyiOrder::VON_NEUMANN
    }
}

impl fmt::Display for RenyiOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RenyiOrder::Finite(n) => write!(f, "{n}"),
            RenyiOrder::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for RenyiOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "single-copy" => Ok(RenyiOrder::Infinite),
            other => {
                let n: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("not a Rényi index: {s:?}")))?;
                RenyiOrder::new(n)
            }
        }
    }
}

/// Streaming accumulator for the entropy of a spectrum given as log-eigenvalues.
///
/// The spectrum need not be normalized: the total mass is tracked and divided
/// out in [`SpectrumAccumulator::entropy`].
#[derive(Debug, Clone)]
pub struct SpectrumAccumulator {
    order: RenyiOrder,
    mass: CompensatedSum,
    // Σ λ^n scaled by exp(-n·shift), or Σ λ log λ for n = 1.
    power: CompensatedSum,
    shift: f64,
    max_log: f64,
}

impl SpectrumAccumulator {
    pub fn new(order: RenyiOrder) -> Self {
        Self {
            order,
            mass: CompensatedSum::new(),
            power: CompensatedSum::new(),
            shift: f64::NEG_INFINITY,
            max_log: f64::NEG_INFINITY,
        }
    }

    pub fn push_log(&mut self, log_lambda: f64) {
        if log_lambda == f64::NEG_INFINITY {
            return;
        }
        let lambda = log_lambda.exp();
        self.mass.add(lambda);
        self.max_log = self.max_log.max(log_lambda);
        match self.order {
            RenyiOrder::Infinite => {}
            RenyiOrder::Finite(1.0) => self.power.add(lambda * log_lambda),
            RenyiOrder::Finite(n) => {
                if log_lambda > self.shift {
                    // rescale what was accumulated so far to the new reference
                    let factor = if self.shift == f64::NEG_INFINITY {
                        0.0
                    } else {
                        (n * (self.shift - log_lambda)).exp()
                    };
                    let old = self.power.value() * factor;
                    self.power = CompensatedSum::new();
                    self.power.add(old);
                    self.shift = log_lambda;
                }
                self.power.add((n * (log_lambda - self.shift)).exp());
            }
        }
    }

    pub fn push(&mut self, lambda: f64) {
        if lambda > 0.0 {
            self.push_log(lambda.ln());
        }
    }

    /// Total (unnormalized) mass seen so far.
    pub fn mass(&self) -> f64 {
        self.mass.value()
    }

    pub fn entropy(&self) -> f64 {
        let mass = self.mass.value();
        if mass <= 0.0 {
            return 0.0;
        }
        let log_mass = mass.ln();
        match self.order {
            RenyiOrder::Infinite => -(self.max_log - log_mass),
            RenyiOrder::Finite(1.0) => -self.power.value() / mass + log_mass,
            RenyiOrder::Finite(n) => {
                let log_moment = self.power.value().ln() + n * self.shift - n * log_mass;
                log_moment / (1.0 - n)
            }
        }
    }
}

/// Rényi entropy of a list of eigenvalues (normalized internally).
pub fn spectrum_entropy(eigenvalues: &[f64], order: RenyiOrder) -> f64 {
    let mut acc = SpectrumAccumulator::new(order);
    for &l in eigenvalues {
        acc.push(l);
    }
    acc.entropy()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_indices() {
        assert_eq!("inf".parse::<RenyiOrder>().unwrap(), RenyiOrder::Infinite);
        assert_eq!("2".parse::<RenyiOrder>().unwrap(), RenyiOrder::Finite(2.0));
        assert!("0.5".parse::<RenyiOrder>().is_err());
        assert!("abc".parse::<RenyiOrder>().is_err());
        assert_eq!(RenyiOrder::Finite(3.0).as_replica_count(), Some(3));
        assert_eq!(RenyiOrder::Finite(2.5).as_replica_count(), None);
        assert_eq!(RenyiOrder::VON_NEUMANN.as_replica_count(), None);
    }

    #[test]
    fn entropies_of_simple_spectra() {
        let half = [0.5, 0.5];
        for order in [
            RenyiOrder::Finite(1.0),
            RenyiOrder::Finite(2.0),
            RenyiOrder::Finite(7.5),
            RenyiOrder::Infinite,
        ] {
            assert!((spectrum_entropy(&half, order) - 2f64.ln()).abs() < 1e-14);
        }
        let skew = [0.75, 0.25];
        assert!((spectrum_entropy(&skew, RenyiOrder::Finite(2.0)) + (0.625f64).ln()).abs() < 1e-14);
        assert!((spectrum_entropy(&skew, RenyiOrder::Infinite) + 0.75f64.ln()).abs() < 1e-14);
        assert_eq!(spectrum_entropy(&[1.0], RenyiOrder::Finite(2.0)), 0.0);
    }

    #[test]
    fn unnormalized_input_is_normalized() {
        let a = spectrum_entropy(&[3.0, 1.0], RenyiOrder::Finite(3.0));
        let b = spectrum_entropy(&[0.75, 0.25], RenyiOrder::Finite(3.0));
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn large_index_does_not_underflow() {
        let spec = vec![1e-3; 1000];
        let s = spectrum_entropy(&spec, RenyiOrder::Finite(400.0));
        assert!((s - 1000f64.ln()).abs() < 1e-10, "{s}");
    }
}
