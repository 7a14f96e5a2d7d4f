//! Nyström discretization of `K` on a circular data curve, its spectrum, and
//! a direct solve of `(K + eps^2) u = p_z` that does not use the eigenbasis.
//!
//! With `M` uniform nodes `tau_j` and the common weight `w = 2 pi r / M` the
//! matrix `A_jk = p(tau_j, tau_k) w` is Hermitian, so the symmetrized matrix
//! `D^{1/2} A D^{-1/2}` coincides with `A`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::linalg::{hermitian_eigenvalues_dd, jacobi_eigenvalues, CDd, Dd, HermitianDd};
use crate::powerlaw::fit_line;
use crate::quadrature::CircleRule;
use crate::spectral::{Kernel, SpectralBasis};

/// Eigenvalues below `NOISE_FLOOR_FACTOR * f64::EPSILON * mu_1` are excluded from rate fits.
pub const NOISE_FLOOR_FACTOR: f64 = 1e3;

/// Largest inner radius accepted as a proxy for the disk.
pub const DISK_PROXY_RHO: f64 = 1e-8;

/// Smallest eps accepted by [`solve_numeric`]; the condition number grows like `mu_1 / eps^2`.
pub const MIN_NUMERIC_EPS: f64 = 1e-6;

/// Quadrature nodes on `Γ` with the kernel matrix.
#[derive(Debug, Clone)]
pub struct NystromOperator {
    geometry: Geometry,
    kernel: Kernel,
    rule: CircleRule,
    nodes: Vec<Complex64>,
    matrix: DMatrix<Complex64>,
}

/// Discretize `K` with `m` nodes. The ellipse is discretized through its annulus view.
pub fn build(geometry: &Geometry, m: usize) -> Result<NystromOperator> {
    if m < 16 || !m.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "node count must be even and at least 16 (M = {m})"
        )));
    }
    let geometry = match geometry {
        Geometry::Ellipse(e) => Geometry::Annulus(e.annulus_view()),
        g => *g,
    };
    let basis = SpectralBasis::for_geometry(&geometry);
    let kernel = basis.kernel();
    let (center, radius) = basis.data_circle();
    let rule = CircleRule::new(center, radius, m)?;
    let nodes = rule.nodes();
    let w = rule.weight();
    let mut matrix = DMatrix::<Complex64>::zeros(m, m);
    for i in 0..m {
        for j in 0..i {
            let v = kernel.eval(nodes[i], nodes[j])? * w;
            matrix[(i, j)] = v;
            matrix[(j, i)] = v.conj();
        }
        matrix[(i, i)] = Complex64::new(kernel.eval(nodes[i], nodes[i])?.re * w, 0.0);
    }
    Ok(NystromOperator {
        geometry,
        kernel,
        rule,
        nodes,
        matrix,
    })
}

impl NystromOperator {
    /// The discretized geometry (the annulus view for an ellipse).
    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn weight(&self) -> f64 {
        self.rule.weight()
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// `max |S - S*|`.
    pub fn hermitian_residual(&self) -> f64 {
        let m = self.size();
        let mut r: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                r = r.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        r
    }

    /// `(K f)(zeta)` by the quadrature rule, given `f` at the nodes.
    pub fn apply(&self, values: &[Complex64], zeta: Complex64) -> Result<Complex64> {
        if values.len() != self.size() {
            return Err(Error::InvalidInput("one value per node is required".into()));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (tau, f) in self.nodes.iter().zip(values) {
            acc += self.kernel.eval(zeta, *tau)? * f;
        }
        Ok(acc * self.weight())
    }

    /// The matrix rebuilt in double-double arithmetic from the same nodes.
    fn matrix_dd(&self) -> HermitianDd {
        let m = self.size();
        let w = Dd::TWO_PI * self.rule.radius() / Dd::new(m as f64);
        let nodes: Vec<CDd> = self.nodes.iter().map(|t| CDd::from_f64(t.re, t.im)).collect();
        HermitianDd::from_lower(m, |i, j| kernel_dd(&self.kernel, nodes[i], nodes[j]).scale(w))
    }
}

fn kernel_dd(kernel: &Kernel, zeta: CDd, tau: CDd) -> CDd {
    let one = CDd::new(Dd::ONE, Dd::ZERO);
    let annulus = |zeta: CDd, rho: f64| {
        let rho2 = Dd::new(rho) * Dd::new(rho);
        let x = zeta * tau.conj();
        (one - x).inv() + (x - CDd::new(rho2, Dd::ZERO)).inv().scale(rho2)
    };
    match kernel {
        Kernel::Annulus(a) => annulus(zeta, a.rho()),
        Kernel::SymmetricAnnulus(a) => {
            let mirrored = CDd::new(Dd::new(a.rho()), Dd::ZERO) / zeta;
            (annulus(zeta, a.rho()) + annulus(mirrored, a.rho())).scale(Dd::new(0.5))
        }
        Kernel::HalfPlane => {
            let d = (zeta - tau.conj()).scale(Dd::TWO_PI).inv();
            // i * d
            CDd::new(-d.im, d.re)
        }
    }
}

/// Sorted eigenvalues of the discretized operator.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericalSpectrum {
    /// `mu_1 >= mu_2 >= ...`
    pub eigenvalues: Vec<f64>,
    /// `NOISE_FLOOR_FACTOR * f64::EPSILON * mu_1`.
    pub noise_floor: f64,
    /// Number of leading eigenvalues above the noise floor.
    pub valid: usize,
    /// Slope of `ln mu_n` against `n` over the valid range.
    pub decay_slope: Option<f64>,
}

impl NumericalSpectrum {
    fn from_eigenvalues(eigenvalues: Vec<f64>) -> Self {
        let top = eigenvalues.first().copied().unwrap_or(0.0);
        let noise_floor = NOISE_FLOOR_FACTOR * f64::EPSILON * top;
        let valid = eigenvalues
            .iter()
            .take_while(|&&mu| mu > noise_floor && mu > 0.0)
            .count();
        let decay_slope = if valid >= 2 {
            let xs: Vec<f64> = (0..valid).map(|n| n as f64).collect();
            let ys: Vec<f64> = eigenvalues[..valid].iter().map(|mu| mu.ln()).collect();
            fit_line(&xs, &ys).ok().map(|f| f.slope)
        } else {
            None
        };
        Self {
            eigenvalues,
            noise_floor,
            valid,
            decay_slope,
        }
    }

    pub fn valid_eigenvalues(&self) -> &[f64] {
        &self.eigenvalues[..self.valid]
    }

    /// True when the smallest computed eigenvalue is positive.
    pub fn all_positive(&self) -> bool {
        self.eigenvalues.last().is_some_and(|&mu| mu > 0.0)
    }
}

/// Eigenvalues of the discretized operator, computed in double-double arithmetic.
pub fn spectrum(op: &NystromOperator) -> Result<NumericalSpectrum> {
    let ev = hermitian_eigenvalues_dd(op.matrix_dd())?;
    Ok(NumericalSpectrum::from_eigenvalues(
        ev.iter().map(|d| d.to_f64()).collect(),
    ))
}

/// Eigenvalues of the `f64` matrix by cyclic Jacobi.
pub fn spectrum_jacobi(op: &NystromOperator) -> Result<NumericalSpectrum> {
    Ok(NumericalSpectrum::from_eigenvalues(jacobi_eigenvalues(&op.matrix)?))
}

/// The `count` largest closed-form eigenvalues of the discretized geometry, descending.
pub fn analytic_eigenvalues(op: &NystromOperator, count: usize) -> Vec<f64> {
    let basis = SpectralBasis::for_geometry(&op.geometry);
    let mut lambda: Vec<f64> = basis
        .index_set()
        .window(count as i64)
        .into_iter()
        .map(|n| basis.lambda(n))
        .collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    lambda.truncate(count);
    lambda
}

/// Geometric decay of the spectrum in the disk limit, where `mu_n = 2 pi r^{2n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskDecayRate {
    /// Data circle radius.
    pub r: f64,
    /// Eigenvalues used (the valid range).
    pub used: usize,
    /// `exp(slope)`: fitted per-step ratio, expected `r^2`.
    pub ratio: f64,
    /// `exp(slope / 2)`, expected `r`.
    pub rho_hat: f64,
    pub r_squared: f64,
    /// `mu_{n+1} / mu_n` over the valid range.
    pub step_ratios: Vec<f64>,
    /// `mu_n / r^{2n+1}` over the valid range.
    pub prefactors: Vec<f64>,
}

impl DiskDecayRate {
    /// `max |mu_{n+1}/mu_n - r^2|`.
    pub fn max_ratio_deviation(&self) -> f64 {
        let r2 = self.r * self.r;
        self.step_ratios.iter().map(|q| (q - r2).abs()).fold(0.0, f64::max)
    }

    /// `max |mu_n / r^{2n+1} - 2 pi|`.
    pub fn max_prefactor_deviation(&self) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        self.prefactors.iter().map(|c| (c - two_pi).abs()).fold(0.0, f64::max)
    }
}

/// Fit the decay of the spectrum of an annulus whose inner radius is at
/// most [`DISK_PROXY_RHO`], a stand-in for the disk.
pub fn disk_decay_rate(op: &NystromOperator, spec: &NumericalSpectrum) -> Result<DiskDecayRate> {
    let a = match op.geometry {
        Geometry::Annulus(a) if a.rho() <= DISK_PROXY_RHO => a,
        _ => {
            return Err(Error::Configuration(format!(
                "the disk-limit rate needs an annulus with rho <= {DISK_PROXY_RHO:e}"
            )))
        }
    };
    let mu = spec.valid_eigenvalues();
    if mu.len() < 5 {
        return Err(Error::InsufficientResolution(format!(
            "{} eigenvalues above the noise floor, at least 5 are needed",
            mu.len()
        )));
    }
    let r = a.r();
    let xs: Vec<f64> = (0..mu.len()).map(|n| n as f64).collect();
    let ys: Vec<f64> = mu.iter().map(|m| m.ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    Ok(DiskDecayRate {
        r,
        used: mu.len(),
        ratio: fit.slope.exp(),
        rho_hat: (fit.slope / 2.0).exp(),
        r_squared: fit.r_squared,
        step_ratios: mu.windows(2).map(|w| w[1] / w[0]).collect(),
        prefactors: mu
            .iter()
            .enumerate()
            .map(|(n, m)| m / r.powi(2 * n as i32 + 1))
            .collect(),
    })
}

/// Grid solution of `(A + eps^2) u = p_z` and its extension off `Γ`.
#[derive(Debug, Clone)]
pub struct NumericSolution {
    kernel: Kernel,
    nodes: Vec<Complex64>,
    weight: f64,
    pub z: Complex64,
    pub eps: f64,
    /// `u(tau_j)`.
    pub values: Vec<Complex64>,
    /// `||(A + eps^2) u - p_z||_2`.
    pub residual: f64,
}

/// Solve on the grid with a dense LU factorization. `z` is in the
/// coordinates of the discretized geometry.
pub fn solve_numeric(op: &NystromOperator, z: Complex64, eps: f64) -> Result<NumericSolution> {
    if !(eps.is_finite() && eps >= MIN_NUMERIC_EPS) {
        return Err(Error::Conditioning(format!(
            "eps = {eps:e} is below the linear-system floor {MIN_NUMERIC_EPS:e} (condition number ~ mu_1 / eps^2)"
        )));
    }
    op.geometry.evaluation_point(z)?;
    let m = op.size();
    let mut b = DVector::<Complex64>::zeros(m);
    for (j, tau) in op.nodes.iter().enumerate() {
        b[j] = op.kernel.eval(*tau, z)?;
    }
    let mut a = op.matrix.clone();
    for j in 0..m {
        a[(j, j)] += eps * eps;
    }
    let u = a
        .clone()
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numerical("singular Nyström system".into()))?;
    let residual = (&a * &u - &b).norm();
    Ok(NumericSolution {
        kernel: op.kernel,
        nodes: op.nodes.clone(),
        weight: op.weight(),
        z,
        eps,
        values: u.iter().copied().collect(),
        residual,
    })
}

impl NumericSolution {
    /// `u(zeta) = (p(zeta, z) - (K u)(zeta)) / eps^2`.
    pub fn eval(&self, zeta: Complex64) -> Result<Complex64> {
        let mut ku = Complex64::new(0.0, 0.0);
        for (tau, u) in self.nodes.iter().zip(&self.values) {
            ku += self.kernel.eval(zeta, *tau)? * u;
        }
        ku *= self.weight;
        Ok((self.kernel.eval(zeta, self.z)? - ku) / (self.eps * self.eps))
    }

    /// `sum_j w |u(tau_j)|^2`, the quadrature value of `||u||_Γ^2`.
    pub fn grid_norm_gamma2(&self) -> f64 {
        self.values.iter().map(|u| u.norm_sqr()).sum::<f64>() * self.weight
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tikhonov::solve;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn default_annulus() -> Geometry {
        Geometry::annulus(0.25, 0.5).unwrap()
    }

    #[test]
    fn rejects_bad_node_counts() {
        assert!(build(&default_annulus(), 15).is_err());
        assert!(build(&default_annulus(), 17).is_err());
        assert!(build(&default_annulus(), 8).is_err());
    }

    #[test]
    fn row_sums_match_direct_quadrature() {
        let op = build(&default_annulus(), 64).unwrap();
        let a = Annulus::new(0.25, 0.5).unwrap();
        let rule = CircleRule::new(c(0.0, 0.0), 0.5, 64).unwrap();
        for j in [0, 7, 33] {
            let row: Complex64 = (0..64).map(|k| op.matrix()[(j, k)]).sum();
            let tau = op.nodes()[j];
            let direct = rule.integrate(|t| crate::spectral::kernel_annulus(tau, t, &a).unwrap());
            assert!((row - direct).norm() < 1e-13);
        }
    }

    use crate::geometry::Annulus;

    #[test]
    fn matrix_is_hermitian() {
        let op = build(&default_annulus(), 128).unwrap();
        assert!(op.hermitian_residual() < 1e-13);
    }

    #[test]
    fn annulus_spectrum_matches_closed_form() {
        let op = build(&default_annulus(), 256).unwrap();
        let spec = spectrum(&op).unwrap();
        let exact = analytic_eigenvalues(&op, 15);
        assert!((spec.eigenvalues[0] - std::f64::consts::PI).abs() < 1e-10 * std::f64::consts::PI);
        for (mu, lambda) in spec.eigenvalues.iter().zip(&exact) {
            assert!((mu - lambda).abs() < 1e-9 * lambda, "{mu} vs {lambda}");
        }
        assert!(spec.valid_eigenvalues().iter().all(|&mu| mu > 0.0));

        let coarse = spectrum(&build(&default_annulus(), 128).unwrap()).unwrap();
        for k in 0..10 {
            let d = (coarse.eigenvalues[k] - spec.eigenvalues[k]).abs() / spec.eigenvalues[k];
            assert!(d < 1e-12, "k = {k}: {d:e}");
        }

        let jac = spectrum_jacobi(&op).unwrap();
        for k in 0..8 {
            let d = (jac.eigenvalues[k] - spec.eigenvalues[k]).abs() / spec.eigenvalues[k];
            assert!(d < 1e-11, "k = {k}: {d:e}");
        }
    }

    #[test]
    fn halfplane_spectrum_matches_closed_form() {
        let op = build(&Geometry::half_plane(0.6).unwrap(), 256).unwrap();
        let spec = spectrum(&op).unwrap();
        for k in 0..=8 {
            let exact = 9f64.powi(-k) / 3.0;
            let mu = spec.eigenvalues[k as usize];
            assert!((mu - exact).abs() < 1e-8 * exact, "k = {k}: {mu:e} vs {exact:e}");
        }
    }

    #[test]
    fn disk_limit_decay() {
        let op = build(&Geometry::annulus(1e-9, 0.5).unwrap(), 256).unwrap();
        let spec = spectrum(&op).unwrap();
        let rate = disk_decay_rate(&op, &spec).unwrap();
        assert!(rate.used >= 5);
        assert!(rate.max_ratio_deviation() < 1e-6, "{}", rate.max_ratio_deviation());
        assert!(
            rate.max_prefactor_deviation() < 1e-6,
            "{}",
            rate.max_prefactor_deviation()
        );
        assert!(rate.r_squared > 0.999999);
        assert!((rate.rho_hat - 0.5).abs() < 1e-6);

        let full = build(&default_annulus(), 64).unwrap();
        let s = spectrum(&full).unwrap();
        assert!(matches!(disk_decay_rate(&full, &s), Err(Error::Configuration(_))));
    }

    #[test]
    fn numeric_solve_agrees_with_spectral_solve() {
        let g = default_annulus();
        let op = build(&g, 256).unwrap();
        let z = c(0.75, 0.0);
        let eps = 1e-3;
        let num = solve_numeric(&op, z, eps).unwrap();
        assert!(num.residual < 1e-10, "{}", num.residual);
        let spectral = solve(&g, z, eps, 1e-15).unwrap();
        let g2 = spectral.norm_gamma * spectral.norm_gamma;
        assert!((num.grid_norm_gamma2() - g2).abs() < 1e-6 * g2);
        for k in 0..16 {
            let radius = if k % 2 == 0 {
                0.65 + 0.015 * k as f64
            } else {
                0.3 + 0.006 * k as f64
            };
            let zeta = Complex64::from_polar(radius, 0.4 * k as f64);
            let a = num.eval(zeta).unwrap();
            let b = spectral.eval(zeta).unwrap();
            assert!((a - b).norm() < 1e-6 * b.norm(), "{zeta}: {a} vs {b}");
        }
        assert!(matches!(solve_numeric(&op, z, 1e-7), Err(Error::Conditioning(_))));
    }
}
