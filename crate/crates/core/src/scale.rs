//! Finite isolated time scales and complex-valued grid functions.
//!
//! A time scale here is a strictly increasing finite set of points
//! `t_0 < t_1 < ... < t_N`. Every point is right-scattered, so the forward
//! jump is `sigma(t_i) = t_{i+1}`, the graininess is `mu(t_i) = t_{i+1} - t_i`,
//! the delta derivative is the forward difference quotient, and the delta
//! integral is a mu-weighted left-endpoint sum. All of delta calculus is a
//! finite, exact computation on such scales.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A strictly increasing finite set of real points.
///
/// Immutable after construction; shared between grid functions via `Arc`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeScale {
    points: Vec<f64>,
}

impl TimeScale {
    /// Validates monotonicity and builds the scale. At least two points are
    /// required so that at least one forward jump exists.
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::EmptyScale(points.len()));
        }
        for (i, w) in points.windows(2).enumerate() {
            if !w[0].is_finite() || !w[1].is_finite() || w[1] <= w[0] {
                return Err(Error::NonMonotonePoints {
                    index: i + 1,
                    value: w[1],
                    previous: w[0],
                });
            }
        }
        Ok(Self { points })
    }

    /// Convenience constructor returning the scale ready for sharing.
    pub fn shared(points: Vec<f64>) -> Result<Arc<Self>> {
        Self::new(points).map(Arc::new)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of points, `N + 1`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least two points
    }

    /// The largest valid index `N`.
    pub fn max_index(&self) -> usize {
        self.points.len() - 1
    }

    pub fn point(&self, i: usize) -> Result<f64> {
        self.points
            .get(i)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index: i,
                start: 0,
                end: self.max_index(),
            })
    }

    /// Forward jump and graininess `(sigma(t_i), mu(t_i))`.
    ///
    /// The maximum point has no forward jump on a finite scale, so `i = N`
    /// is out of range.
    pub fn forward_jump(&self, i: usize) -> Result<(f64, f64)> {
        if i + 1 >= self.points.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                start: 0,
                end: self.max_index() - 1,
            });
        }
        let sigma = self.points[i + 1];
        Ok((sigma, sigma - self.points[i]))
    }

    pub fn sigma(&self, i: usize) -> Result<f64> {
        self.forward_jump(i).map(|(s, _)| s)
    }

    pub fn mu(&self, i: usize) -> Result<f64> {
        self.forward_jump(i).map(|(_, m)| m)
    }
}

/// Complex samples on a contiguous index window of a [`TimeScale`].
///
/// The window `[start_index, end_index]` is tracked explicitly: operators
/// that consume a delta derivative shrink it at the right end, mirroring
/// the shrinking domains of an order-n problem.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    scale: Arc<TimeScale>,
    start: usize,
    values: Vec<Complex64>,
}

impl GridFunction {
    /// Wraps explicit values living on `[start, start + values.len() - 1]`.
    pub fn from_values(
        scale: Arc<TimeScale>,
        start: usize,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::WindowTooSmall {
                len: 0,
                reason: "a grid function needs at least one sample",
            });
        }
        let end = start + values.len() - 1;
        if end > scale.max_index() {
            return Err(Error::IndexOutOfRange {
                index: end,
                start: 0,
                end: scale.max_index(),
            });
        }
        Ok(Self {
            scale,
            start,
            values,
        })
    }

    /// Samples `f(t_i)` for `i` in `[start, end]`.
    pub fn sample<F>(scale: &Arc<TimeScale>, start: usize, end: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        if end > scale.max_index() || start > end {
            return Err(Error::IndexOutOfRange {
                index: end.max(start),
                start,
                end: scale.max_index(),
            });
        }
        let values = scale.points()[start..=end].iter().map(|&t| f(t)).collect();
        Ok(Self {
            scale: Arc::clone(scale),
            start,
            values,
        })
    }

    /// Samples `f` on the whole scale.
    pub fn sample_full<F>(scale: &Arc<TimeScale>, f: F) -> Self
    where
        F: Fn(f64) -> Complex64,
    {
        Self::sample(scale, 0, scale.max_index(), f).expect("full window is always valid")
    }

    /// Constant function on `[start, end]`.
    pub fn constant(scale: &Arc<TimeScale>, start: usize, end: usize, c: Complex64) -> Result<Self> {
        Self::sample(scale, start, end, |_| c)
    }

    pub fn scale(&self) -> &Arc<TimeScale> {
        &self.scale
    }

    pub fn start_index(&self) -> usize {
        self.start
    }

    pub fn end_index(&self) -> usize {
        self.start + self.values.len() - 1
    }

    pub fn window_len(&self) -> usize {
        self.values.len()
    }

    /// Values in window order, `value(start_index)` first.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> Result<Complex64> {
        if i < self.start || i > self.end_index() {
            return Err(Error::IndexOutOfRange {
                index: i,
                start: self.start,
                end: self.end_index(),
            });
        }
        Ok(self.values[i - self.start])
    }

    /// Iterator over `(index, t_i, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64, Complex64)> + '_ {
        self.values.iter().enumerate().map(move |(k, &v)| {
            let i = self.start + k;
            (i, self.scale.points()[i], v)
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Restriction to a sub-window `[start, end]`.
    pub fn restrict(&self, start: usize, end: usize) -> Result<Self> {
        if start < self.start || end > self.end_index() || start > end {
            return Err(Error::IndexOutOfRange {
                index: if start < self.start { start } else { end },
                start: self.start,
                end: self.end_index(),
            });
        }
        Ok(Self {
            scale: Arc::clone(&self.scale),
            start,
            values: self.values[start - self.start..=end - self.start].to_vec(),
        })
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64,
    {
        Self {
            scale: Arc::clone(&self.scale),
            start: self.start,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.map(|v| c * v)
    }

    /// Pointwise combination on the intersection of the two windows.
    pub fn zip_with<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(Complex64, Complex64) -> Complex64,
    {
        if !Arc::ptr_eq(&self.scale, &other.scale) && self.scale != other.scale {
            return Err(Error::ScaleMismatch);
        }
        let start = self.start.max(other.start);
        let end = self.end_index().min(other.end_index());
        if start > end {
            return Err(Error::WindowTooSmall {
                len: 0,
                reason: "windows do not overlap",
            });
        }
        let values = (start..=end)
            .map(|i| {
                f(
                    self.values[i - self.start],
                    other.values[i - other.start],
                )
            })
            .collect();
        Ok(Self {
            scale: Arc::clone(&self.scale),
            start,
            values,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Delta derivative `(g(sigma(t)) - g(t)) / mu(t)`.
    ///
    /// The window shrinks by one at the right end.
    pub fn delta_derivative(&self) -> Result<Self> {
        if self.window_len() < 2 {
            return Err(Error::WindowTooSmall {
                len: self.window_len(),
                reason: "delta derivative needs two samples",
            });
        }
        let values = (0..self.values.len() - 1)
            .map(|k| {
                let mu = self
                    .scale
                    .mu(self.start + k)
                    .expect("interior index has a forward jump");
                (self.values[k + 1] - self.values[k]) / mu
            })
            .collect();
        Ok(Self {
            scale: Arc::clone(&self.scale),
            start: self.start,
            values,
        })
    }

    /// Oriented delta integral from `t_{i_from}` to `t_{i_to}`:
    /// the mu-weighted left-endpoint sum, negated when `i_from > i_to`.
    pub fn delta_integral(&self, i_from: usize, i_to: usize) -> Result<Complex64> {
        for i in [i_from, i_to] {
            if i < self.start || i > self.end_index() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    start: self.start,
                    end: self.end_index(),
                });
            }
        }
        let (lo, hi, sign) = if i_from <= i_to {
            (i_from, i_to, 1.0)
        } else {
            (i_to, i_from, -1.0)
        };
        let mut acc = Complex64::ZERO;
        for i in lo..hi {
            let mu = self.scale.mu(i)?;
            acc += self.values[i - self.start] * mu;
        }
        Ok(acc * sign)
    }
}
