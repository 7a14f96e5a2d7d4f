//! Epsilon sweeps, log-log slope fits and the switchover-index sum harness.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::series::{sum_nonneg, Branch};

/// `R^2` below which the largest-eps decade is dropped and the fit retried once.
pub const MIN_R_SQUARED: f64 = 0.999;

/// Least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Largest absolute residual.
    pub residual_max: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::InvalidInput(format!(
            "a line fit needs at least two points (got {n})"
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite data in line fit".into()));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("line fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_max = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).abs())
        .fold(0.0, f64::max);
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
        residual_max,
    })
}

/// `points` values from `hi` down to `lo`, equally spaced in `ln`.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && lo < hi && hi < 1.0) {
        return Err(Error::InvalidInput(format!(
            "range must satisfy 0 < lo < hi < 1 (lo = {lo}, hi = {hi})"
        )));
    }
    if points < 5 {
        return Err(Error::InvalidInput(format!(
            "at least 5 grid points are required (got {points})"
        )));
    }
    let (a, b) = (hi.ln(), lo.ln());
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|k| match k {
            0 => hi,
            k if k == points - 1 => lo,
            k => (a + (b - a) * k as f64 / last).exp(),
        })
        .collect())
}

/// Evaluate `f` on every grid point, possibly in parallel; results stay in grid order.
pub fn map_grid<T, F>(grid: &[f64], f: F) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync,
{
    grid.par_iter().map(|&x| f(x)).collect()
}

/// Slope fit of `ln value` against `ln eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub fit: LineFit,
    /// True when the largest-eps decade was excluded after a poor first fit.
    pub dropped_top_decade: bool,
    /// Number of points in the final fit.
    pub points_used: usize,
}

/// Fit `value ~ eps^slope`, retrying once without the largest-eps decade
/// when `R^2 < MIN_R_SQUARED`.
pub fn fit_power_law(eps: &[f64], values: &[f64]) -> Result<PowerFit> {
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Numerical(format!(
            "power-law fit needs positive values (got {v})"
        )));
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    if fit.r_squared >= MIN_R_SQUARED {
        return Ok(PowerFit {
            fit,
            dropped_top_decade: false,
            points_used: xs.len(),
        });
    }
    let top = eps.iter().cloned().fold(f64::MIN, f64::max);
    let keep: Vec<usize> = (0..eps.len())
        .filter(|&k| eps[k] <= top / 10.0 * (1.0 + 1e-12))
        .collect();
    if keep.len() < 3 {
        return Ok(PowerFit {
            fit,
            dropped_top_decade: false,
            points_used: xs.len(),
        });
    }
    let xs2: Vec<f64> = keep.iter().map(|&k| xs[k]).collect();
    let ys2: Vec<f64> = keep.iter().map(|&k| ys[k]).collect();
    Ok(PowerFit {
        fit: fit_line(&xs2, &ys2)?,
        dropped_top_decade: true,
        points_used: keep.len(),
    })
}

/// `max / min` of `value / eps^exponent`: the two-sided envelope of `value ~ eps^exponent`.
pub fn ratio_spread(eps: &[f64], values: &[f64], exponent: f64) -> f64 {
    let ratios = eps.iter().zip(values).map(|(e, v)| v / e.powf(exponent));
    let (min, max) = ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
    max / min
}

/// One scalar quantity measured over an eps grid, with its log-log fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Strictly decreasing.
    pub eps_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub fitted_slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residual_max: f64,
    pub dropped_top_decade: bool,
}

impl SweepResult {
    pub fn ratio_spread(&self, exponent: f64) -> f64 {
        ratio_spread(&self.eps_grid, &self.values, exponent)
    }
}

/// Evaluate `quantity` on a geometric grid in `[eps_lo, eps_hi]` and fit its slope.
pub fn sweep<F>(quantity: F, eps_lo: f64, eps_hi: f64, points: usize) -> Result<SweepResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let eps_grid = geometric_grid(eps_lo, eps_hi, points)?;
    let mut values = Vec::with_capacity(points);
    for (eps, v) in eps_grid.iter().zip(map_grid(&eps_grid, quantity)) {
        let v = v.map_err(|e| Error::AtEps {
            eps: *eps,
            source: Box::new(e),
        })?;
        values.push(v);
    }
    let pf = fit_power_law(&eps_grid, &values)?;
    Ok(SweepResult {
        eps_grid,
        values,
        fitted_slope: pf.fit.slope,
        intercept: pf.fit.intercept,
        r_squared: pf.fit.r_squared,
        residual_max: pf.fit.residual_max,
        dropped_top_decade: pf.dropped_top_decade,
    })
}

/// Asymptotics of `sum b_n / (a_n + eta)` and `sum b_n / (a_n + eta)^2` with
/// `a_n = e^{-alpha n}`, `b_n = e^{-beta n}`, `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumAsymptotics {
    pub alpha: f64,
    pub beta: f64,
    /// Decreasing.
    pub eta_grid: Vec<f64>,
    pub sum1_values: Vec<f64>,
    pub sum2_values: Vec<f64>,
    /// Expected `beta/alpha - 1`.
    pub slope1: f64,
    /// Expected `beta/alpha - 2`.
    pub slope2: f64,
    /// `J(eta) = max{n : a_n >= eta}`, 0 when no index qualifies.
    pub switchover_indices: Vec<u64>,
}

impl SumAsymptotics {
    pub fn expected_slopes(&self) -> (f64, f64) {
        let q = self.beta / self.alpha;
        (q - 1.0, q - 2.0)
    }
}

/// The switchover index `J(eta)` for `a_n = e^{-alpha n}`.
pub fn switchover_index(alpha: f64, eta: f64) -> u64 {
    let mut n = 0u64;
    while (-alpha * (n + 1) as f64).exp() >= eta {
        n += 1;
    }
    n
}

pub fn sum_asymptotics(alpha: f64, beta: f64, eta_lo: f64, eta_hi: f64, points: usize) -> Result<SumAsymptotics> {
    if !(beta > 0.0 && beta < alpha && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "rates must satisfy 0 < beta < alpha (alpha = {alpha}, beta = {beta})"
        )));
    }
    let eta_grid = geometric_grid(eta_lo, eta_hi, points)?;
    let mut sum1_values = Vec::with_capacity(points);
    let mut sum2_values = Vec::with_capacity(points);
    for &eta in &eta_grid {
        let s = sum_nonneg(Branch::up(1), 1e-16, |n| {
            let a = (-alpha * n as f64).exp();
            let b = (-beta * n as f64).exp();
            let d = a + eta;
            [b / d, b / (d * d)]
        })?;
        sum1_values.push(s.value[0]);
        sum2_values.push(s.value[1]);
    }
    let slope1 = fit_power_law(&eta_grid, &sum1_values)?.fit.slope;
    let slope2 = fit_power_law(&eta_grid, &sum2_values)?.fit.slope;
    let switchover_indices = eta_grid.iter().map(|&eta| switchover_index(alpha, eta)).collect();
    Ok(SumAsymptotics {
        alpha,
        beta,
        eta_grid,
        sum1_values,
        sum2_values,
        slope1,
        slope2,
        switchover_indices,
    })
}
