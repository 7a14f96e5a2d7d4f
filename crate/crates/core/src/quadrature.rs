//! Periodic trapezoid rules.
//!
//! On a circle the uniform trapezoid rule is exponentially accurate for
//! integrands analytic in a neighbouring annulus, which covers every kernel
//! and eigenfunction in this crate. Integrals over the real line are mapped
//! to a period by `x = scale * tan(t)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform trapezoid rule on the circle `|tau - center| = radius`, arc-length measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleRule {
    center: Complex64,
    radius: f64,
    count: usize,
}

impl CircleRule {
    pub fn new(center: Complex64, radius: f64, count: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "circle radius must be positive ({radius})"
            )));
        }
        if count == 0 {
            return Err(Error::InvalidInput("quadrature needs at least one node".into()));
        }
        Ok(Self { center, radius, count })
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Node `j`: `center + radius * exp(2 pi i j / count)`.
    pub fn node(&self, j: usize) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, 2.0 * PI * j as f64 / self.count as f64)
    }

    pub fn nodes(&self) -> Vec<Complex64> {
        (0..self.count).map(|j| self.node(j)).collect()
    }

    /// Arc-length weight `2 pi radius / count`, identical for every node.
    pub fn weight(&self) -> f64 {
        2.0 * PI * self.radius / self.count as f64
    }

    /// `∫ f(tau) |d tau|` over the circle.
    pub fn integrate(&self, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        let w = self.weight();
        (0..self.count).map(|j| f(self.node(j))).sum::<Complex64>() * w
    }
}

/// `∫_R f(x) dx` through `x = scale * tan(t)` and the midpoint rule on `(-pi/2, pi/2)`.
///
/// Exponentially accurate for rational-type integrands decaying like `x^-2`.
pub fn integrate_real_line(f: impl Fn(f64) -> Complex64, scale: f64, count: usize) -> Complex64 {
    let h = PI / count as f64;
    (0..count)
        .map(|k| {
            let t = -0.5 * PI + (k as f64 + 0.5) * h;
            let (s, c) = t.sin_cos();
            f(scale * s / c) * (scale / (c * c))
        })
        .sum::<Complex64>()
        * h
}

/// Laurent coefficients `f_n`, `-count/2 <= n < count/2`, of `f` sampled on
/// `|zeta| = radius`. Entry `k` of the result holds `f_{k - count/2}`.
pub fn laurent_coefficients(f: impl Fn(Complex64) -> Complex64, radius: f64, count: usize) -> Vec<Complex64> {
    let samples: Vec<Complex64> = (0..count)
        .map(|j| f(Complex64::from_polar(radius, 2.0 * PI * j as f64 / count as f64)))
        .collect();
    let half = (count / 2) as i64;
    (-half..count as i64 - half)
        .map(|n| {
            let acc: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    let phase = -2.0 * PI * ((n * j as i64).rem_euclid(count as i64)) as f64 / count as f64;
                    s * Complex64::from_polar(1.0, phase)
                })
                .sum();
            acc / count as f64 * radius.powi(-(n as i32))
        })
        .collect()
}
