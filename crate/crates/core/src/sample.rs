//! Sorted positive samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An immutable, ascending-sorted sample of strictly positive values.
///
/// Order statistics are exposed with the 1-based convention
/// `x(1) <= x(2) <= ... <= x(n)`. Estimation entry points require
/// `n >= 5`; the container itself only requires positivity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    /// Build a sample from arbitrary-order values; sorts ascending.
    /// Rejects empty input and any non-finite or non-positive value.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::input("sample is empty"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(Error::input(format!(
                "sample values must be finite and strictly positive, got {bad}"
            )));
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self { values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// The 1-based order statistic `x(j)`, `1 <= j <= n`.
    pub fn order(&self, j: usize) -> f64 {
        self.values[j - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Empirical quantile with linear interpolation between order
    /// statistics (the common "type 7" convention), `0 <= q <= 1`.
    pub fn empirical_quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::domain(format!("quantile level out of [0,1]: {q}")));
        }
        let n = self.values.len();
        let pos = q * (n - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let w = pos - lo as f64;
        Ok(self.values[lo] * (1.0 - w) + self.values[hi] * w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_and_validates() {
        let s = Sample::new(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(s.order(1), 1.0);
        assert_eq!(s.order(3), 3.0);
        assert!(Sample::new(vec![]).is_err());
        assert!(Sample::new(vec![1.0, 0.0]).is_err());
        assert!(Sample::new(vec![1.0, -2.0]).is_err());
        assert!(Sample::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn empirical_quantile_interpolates() {
        let s = Sample::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.empirical_quantile(0.0).unwrap(), 1.0);
        assert_eq!(s.empirical_quantile(1.0).unwrap(), 4.0);
        assert_eq!(s.empirical_quantile(0.5).unwrap(), 2.5);
        assert!(s.empirical_quantile(1.2).is_err());
    }
}
