use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Values on a strictly increasing grid, linear in between.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledFunction {
    xs: Vec<f64>,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if xs.len() != values.len() {
            return Err(invalid("abscissae and values differ in length"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("abscissae must be strictly increasing"));
        }
        Ok(Self { xs, values })
    }

    /// `f` on `points + 1` uniform nodes of `[a, b]`.
    pub fn from_fn(a: f64, b: f64, points: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(b > a) || points == 0 {
            return Err(invalid("uniform grid needs a < b and at least one interval"));
        }
        let xs: Vec<f64> = (0..=points).map(|i| a + (b - a) * i as f64 / points as f64).collect();
        let values = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, values)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.xs[0]
    }

    pub fn end(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    /// Nodes equally spaced up to rounding.
    pub fn is_uniform(&self) -> bool {
        if self.xs.len() < 3 {
            return true;
        }
        let h = (self.end() - self.start()) / (self.xs.len() - 1) as f64;
        self.xs
            .iter()
            .enumerate()
            .all(|(i, &x)| (x - (self.start() + h * i as f64)).abs() <= 1e-9 * h)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 1 || x <= self.xs[0] {
            return self.values[0];
        }
        if x >= self.xs[n - 1] {
            return self.values[n - 1];
        }
        let i = self.xs.partition_point(|&p| p <= x).saturating_sub(1).min(n - 2);
        let w = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            xs: self.xs.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_interpolation_and_validation() {
        let f = SampledFunction::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(2.0), 1.0);
        assert_eq!(f.eval(-1.0), 0.0);
        assert!(!f.is_uniform());
        assert!(SampledFunction::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert_eq!(SampledFunction::new(vec![], vec![]), Err(Error::EmptyGrid));
        assert!(SampledFunction::from_fn(0.0, 1.0, 8, |x| x).unwrap().is_uniform());
    }
}
