use std::ops::Index;

use crate::error::{Error, Result};

/// Values of a function on the uniform grid `t_k = k/(n-1)`, `n` odd and ≥ 3.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::GridTooSmall { n, min: 3 });
        }
        Ok(GridFunction { values })
    }

    pub fn from_fn(n: usize, f: impl FnMut(f64) -> f64) -> Result<Self> {
        let h = 1.0 / (n.max(2) - 1) as f64;
        let mut f = f;
        GridFunction::new((0..n).map(|k| f(k as f64 * h)).collect())
    }

    pub fn try_from_fn<E>(n: usize, mut f: impl FnMut(f64) -> Result<f64, E>) -> Result<Self>
    where
        Error: From<E>,
    {
        let h = 1.0 / (n.max(2) - 1) as f64;
        let values = (0..n).map(|k| f(k as f64 * h)).collect::<Result<Vec<_>, E>>()?;
        GridFunction::new(values)
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        GridFunction::new(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        1.0 / (self.values.len() - 1) as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        k as f64 * self.step()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..self.len()).map(move |k| k as f64 * h)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Piecewise-linear interpolation; `t` is clamped to `[0,1]`.
    #[inline]
    pub fn interp(&self, t: f64) -> f64 {
        let last = self.values.len() - 1;
        let x = t.clamp(0.0, 1.0) * last as f64;
        let k = (x.floor() as usize).min(last - 1);
        let w = x - k as f64;
        if w == 0.0 {
            return self.values[k];
        }
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction { values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    /// `max_k |self_k − other_k|`
    pub fn distance(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.len(), other.len(), "grid size mismatch");
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `a·self + b·other`
    pub fn combine(&self, a: f64, other: &GridFunction, b: f64) -> GridFunction {
        assert_eq!(self.len(), other.len(), "grid size mismatch");
        GridFunction { values: self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect() }
    }
}

impl Index<usize> for GridFunction {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.values[k]
    }
}

pub fn sup_norm(u: &GridFunction) -> f64 {
    u.sup_norm()
}
