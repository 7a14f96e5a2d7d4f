//! Closed-form solution of `(K + eps^2) u = p_z` in the spectral basis, the
//! optimal bound built from it, the closed-form exponents and maximizers,
//! and the dual certificate `Phi(eta*) = eps^2`.
//!
//! In the eigenbasis the solution is `u = sum conj(e_n(z)) / (lambda_n + eps^2) e_n`
//! and every quantity reduces to a nonnegative series:
//!
//! ```text
//! u(z)        = sum |e_n(z)|^2 / (lambda_n + eps^2)
//! ||u||^2     = sum |e_n(z)|^2 / (lambda_n + eps^2)^2
//! ||u||_Γ^2   = sum lambda_n |e_n(z)|^2 / (lambda_n + eps^2)^2
//! ```

use num_complex::Complex64;

use crate::chebyshev::ChebyshevSeq;
use crate::error::{Error, Result};
use crate::geometry::{exterior_root, Annulus, Geometry, Side};
use crate::series::{sum_complex, sum_nonneg};
use crate::spectral::SpectralBasis;

/// Smallest supported regularization parameter.
pub const MIN_EPS: f64 = 1e-12;

fn check_eps(eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps >= MIN_EPS) {
        return Err(Error::InvalidInput(format!(
            "eps must be finite and at least {MIN_EPS:e} (eps = {eps})"
        )));
    }
    Ok(())
}

/// Truncated spectral solution `u_{eps,z}` and its three norms.
#[derive(Debug, Clone, PartialEq)]
pub struct TikhonovSolution {
    pub basis: SpectralBasis,
    /// Evaluation point in the coordinates of `basis`.
    pub z: Complex64,
    pub eps: f64,
    /// `(n, conj(e_n(z)) / (lambda_n + eps^2))` over the truncated window, by increasing `n`.
    pub coefficients: Vec<(i64, Complex64)>,
    /// `u(z)`.
    pub value_at_z: f64,
    /// `||u||` in the Hilbert space.
    pub norm_h: f64,
    /// `||u||_{L^2(Γ)}`.
    pub norm_gamma: f64,
    tol: f64,
}

/// Solve for a validated point of `geometry`.
pub fn solve(geometry: &Geometry, z: Complex64, eps: f64, tol: f64) -> Result<TikhonovSolution> {
    let point = geometry.evaluation_point(z)?;
    solve_in_basis(&SpectralBasis::for_geometry(geometry), point.basis_z, eps, tol)
}

/// Solve directly in `basis` at a point given in basis coordinates; no
/// domain validation beyond finiteness of the sums.
pub fn solve_in_basis(basis: &SpectralBasis, z: Complex64, eps: f64, tol: f64) -> Result<TikhonovSolution> {
    check_eps(eps)?;
    let e2 = eps * eps;
    let mut totals = [0.0; 3];
    let mut coefficients = Vec::new();
    for branch in basis.branches() {
        let s = sum_nonneg(*branch, tol, |n| {
            let lambda = basis.lambda(n);
            let e = basis.eval(n, z).norm_sqr();
            let d = lambda + e2;
            [e / d, e / (d * d), lambda * e / (d * d)]
        })?;
        for (t, v) in totals.iter_mut().zip(s.value) {
            *t += v;
        }
        let mut n = branch.start;
        for _ in 0..s.terms {
            coefficients.push((n, basis.eval(n, z).conj() / (basis.lambda(n) + e2)));
            n += branch.step;
        }
    }
    coefficients.sort_by_key(|&(n, _)| n);
    let [value_at_z, h2, g2] = totals;
    if !(value_at_z > 0.0 && h2 > 0.0 && g2 > 0.0) {
        return Err(Error::Numerical(format!(
            "degenerate solution at z = {z}: u(z) = {value_at_z:e}"
        )));
    }
    Ok(TikhonovSolution {
        basis: *basis,
        z,
        eps,
        coefficients,
        value_at_z,
        norm_h: h2.sqrt(),
        norm_gamma: g2.sqrt(),
        tol,
    })
}

impl TikhonovSolution {
    /// `u(zeta)` for `zeta` in basis coordinates, summed to the solve tolerance.
    pub fn eval(&self, zeta: Complex64) -> Result<Complex64> {
        let e2 = self.eps * self.eps;
        let basis = &self.basis;
        let mut acc = Complex64::new(0.0, 0.0);
        for branch in basis.branches() {
            acc += sum_complex(*branch, self.tol, |n| {
                let d = basis.lambda(n) + e2;
                let v = basis.eval(n, self.z).conj() * basis.eval(n, zeta) / d;
                let bound = basis.envelope(n, self.z) * basis.envelope(n, zeta) / d;
                (v, bound)
            })?
            .value;
        }
        Ok(acc)
    }

    /// `u(z) - ||u||_Γ^2 - eps^2 ||u||^2`, relative to `u(z)`.
    pub fn identity_defect(&self) -> f64 {
        let rhs = self.norm_gamma * self.norm_gamma + self.eps * self.eps * self.norm_h * self.norm_h;
        (self.value_at_z - rhs).abs() / self.value_at_z
    }
}

/// Which term attains `min{1/||u||, eps/||u||_Γ}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundBranch {
    /// `1 / ||u||`; also reported on an exact tie.
    NormH,
    /// `eps / ||u||_Γ`.
    NormGamma,
}

/// The optimal bound `(3/2) u(z) min{1/||u||, eps/||u||_Γ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityBound {
    pub bound_value: f64,
    pub argmin_branch: BoundBranch,
    /// `M_{eps,z}(z) = u(z) min{...}`, the value attaining the bound up to 3/2.
    pub maximizer_at_z: f64,
    pub gamma_closed_form: f64,
    /// `bound_value / eps^gamma`.
    pub prefactor: f64,
}

pub(crate) fn smaller_branch(h: f64, gamma: f64) -> (f64, BoundBranch) {
    if h <= gamma {
        (h, BoundBranch::NormH)
    } else {
        (gamma, BoundBranch::NormGamma)
    }
}

pub fn bound(sol: &TikhonovSolution) -> StabilityBound {
    let (factor, argmin_branch) = smaller_branch(1.0 / sol.norm_h, sol.eps / sol.norm_gamma);
    let maximizer_at_z = sol.value_at_z * factor;
    let bound_value = 1.5 * maximizer_at_z;
    let gamma = basis_exponent(&sol.basis, sol.z).gamma;
    StabilityBound {
        bound_value,
        argmin_branch,
        maximizer_at_z,
        gamma_closed_form: gamma,
        prefactor: bound_value / sol.eps.powf(gamma),
    }
}

/// A stability exponent; `stable_region` marks points where continuation is
/// Lipschitz (`gamma = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent {
    pub gamma: f64,
    pub stable_region: bool,
}

fn unstable(gamma: f64) -> Exponent {
    Exponent {
        gamma,
        stable_region: false,
    }
}

fn annulus_exponent(a: &Annulus, z: Complex64) -> f64 {
    let m = z.norm();
    if m > a.r() {
        m.ln() / a.r().ln()
    } else {
        (m / a.rho()).ln() / (a.r() / a.rho()).ln()
    }
}

/// Closed-form exponent: `gamma(z)` for the annulus and the half-plane,
/// `alpha(z) = 1 - ln|J^-1(z)| / ln R` for the ellipse.
pub fn exponent(geometry: &Geometry, z: Complex64) -> Result<Exponent> {
    let point = geometry.evaluation_point(z)?;
    Ok(match geometry {
        Geometry::Annulus(a) => unstable(annulus_exponent(a, z)),
        Geometry::HalfPlane(g) => match point.side {
            Side::Inside => Exponent {
                gamma: 1.0,
                stable_region: true,
            },
            Side::Outside => {
                let m = (z - g.z0()) / (z + g.z0());
                unstable(m.norm().ln() / g.rho().ln())
            }
        },
        Geometry::Ellipse(e) => {
            let w = exterior_root(z);
            unstable(1.0 - w.norm().ln() / e.big_r().ln())
        }
    })
}

/// Exponent read off the basis: `ln|z| / ln r` for the symmetric annulus.
pub fn basis_exponent(basis: &SpectralBasis, z: Complex64) -> Exponent {
    if let Some(a) = basis.annulus() {
        if basis.is_symmetric() {
            return unstable(z.norm().ln() / a.r().ln());
        }
        return unstable(annulus_exponent(&a, z));
    }
    let g = basis.half_plane().expect("basis is annulus or half-plane");
    let m = (z - g.z0()) / (z + g.z0());
    if (z - g.center()).norm() < g.r() {
        Exponent {
            gamma: 1.0,
            stable_region: true,
        }
    } else {
        unstable(m.norm().ln() / g.rho().ln())
    }
}

/// Closed-form worst-case function for one geometry, stored through its
/// coefficients `a_n` in the spectral basis.
///
/// * annulus: `eps^{2-gamma} sum_{n in Z} (conj(z) zeta)^n / (r^{2n} + eps^2 (1 + rho^{2n}))`
/// * half-plane: `eps^{2-gamma} / (zeta + z0) sum_{n>=1} (conj(m(z)) m(zeta))^n / (eps^2 + rho^{2n})`
/// * ellipse: `eps^{2-alpha} sum_{n>=1} conj(J^-1(z))^n T_n(zeta) / (1 + eps^2 R^{2n})`
#[derive(Debug, Clone, PartialEq)]
pub struct Maximizer {
    geometry: Geometry,
    basis: SpectralBasis,
    z: Complex64,
    basis_z: Complex64,
    eps: f64,
    gamma: f64,
    scale: f64,
    tol: f64,
}

pub fn maximizer(geometry: &Geometry, z: Complex64, eps: f64, tol: f64) -> Result<Maximizer> {
    check_eps(eps)?;
    let point = geometry.evaluation_point(z)?;
    let gamma = exponent(geometry, z)?.gamma;
    Ok(Maximizer {
        geometry: *geometry,
        basis: SpectralBasis::for_geometry(geometry),
        z,
        basis_z: point.basis_z,
        eps,
        gamma,
        scale: eps.powf(2.0 - gamma),
        tol,
    })
}

impl Maximizer {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Coefficient `a_n` of the maximizer in the spectral basis.
    pub fn coefficient(&self, n: i64) -> Complex64 {
        let e2 = self.eps * self.eps;
        let zb = self.basis_z.conj();
        match self.geometry {
            Geometry::Annulus(a) => {
                let (rho, r) = (a.rho(), a.r());
                if n >= 0 {
                    let k = n as i32;
                    zb.powi(k) * self.scale / (r.powi(2 * k) + e2 * (1.0 + rho.powi(2 * k)))
                } else {
                    // rearranged so that no power overflows
                    let k = -n as i32;
                    (rho / zb).powi(k) * self.scale / ((rho / r).powi(2 * k) + e2 * (1.0 + rho.powi(2 * k)))
                }
            }
            Geometry::HalfPlane(g) => {
                if n == 0 {
                    return Complex64::new(0.0, 0.0);
                }
                let k = n as i32;
                let mz = ((self.z - g.z0()) / (self.z + g.z0())).conj();
                let norm = g.s().sqrt() / std::f64::consts::PI.sqrt();
                mz.powi(k) * self.scale / ((e2 + g.rho().powi(2 * k)) * norm)
            }
            Geometry::Ellipse(e) => {
                if n == 0 {
                    return Complex64::new(0.0, 0.0);
                }
                let k = n as i32;
                let rho = e.annulus_view().rho();
                zb.powi(k) * self.scale / (std::f64::consts::SQRT_2 * (rho.powi(k) + e2))
            }
        }
    }

    /// `M(zeta)` in basis coordinates (the annulus view for the ellipse).
    pub fn eval_basis(&self, zeta: Complex64) -> Result<Complex64> {
        self.check_convergence(zeta)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for branch in self.basis.branches() {
            acc += sum_complex(*branch, self.tol, |n| {
                let a = self.coefficient(n);
                (a * self.basis.eval(n, zeta), a.norm() * self.basis.envelope(n, zeta))
            })?
            .value;
        }
        Ok(acc)
    }

    /// `M(zeta)` in the geometry's own coordinates; the ellipse series is
    /// evaluated by the Chebyshev recurrence.
    pub fn eval(&self, zeta: Complex64) -> Result<Complex64> {
        let Geometry::Ellipse(e) = self.geometry else {
            return self.eval_basis(zeta);
        };
        if !(zeta.re.is_finite() && zeta.im.is_finite()) {
            return Err(Error::Domain("non-finite evaluation point".into()));
        }
        let wz = self.basis_z * e.big_r();
        let m = exterior_root(zeta).norm();
        if wz.norm() * m >= e.big_r() * e.big_r() {
            return Err(Error::Domain(format!(
                "the ellipse maximizer diverges at zeta = {zeta}: |J^-1(z) J^-1(zeta)| >= R^2"
            )));
        }
        let rho = e.annulus_view().rho();
        let e2 = self.eps * self.eps;
        let q = wz.conj() * rho;
        let mut cheb = ChebyshevSeq::new(zeta).skip(1);
        let s = sum_complex(crate::series::Branch::up(1), self.tol, |n| {
            let k = n as i32;
            let c = q.powi(k) * self.scale / (rho.powi(k) + e2);
            let t = cheb.next().expect("the sequence is infinite");
            (c * t, c.norm() * 0.5 * (m.powi(k) + m.powi(-k)))
        })?;
        Ok(s.value)
    }

    /// `M(z)`.
    pub fn value_at_z(&self) -> Result<Complex64> {
        self.eval(self.z)
    }

    fn check_convergence(&self, zeta: Complex64) -> Result<()> {
        if !(zeta.re.is_finite() && zeta.im.is_finite()) {
            return Err(Error::Domain("non-finite evaluation point".into()));
        }
        let z = self.basis_z.norm();
        let ok = match self.geometry {
            Geometry::Annulus(a) => {
                let m = zeta.norm();
                a.rho() * a.rho() / z < m && m < 1.0 / z
            }
            Geometry::Ellipse(e) => {
                let a = e.annulus_view();
                let m = zeta.norm();
                a.rho() / z < m && m < 1.0 / z
            }
            Geometry::HalfPlane(g) => {
                let den = zeta + g.z0();
                let mz = ((self.z - g.z0()) / (self.z + g.z0())).norm();
                den.norm() > 0.0 && mz * ((zeta - g.z0()) / den).norm() < 1.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "the maximizer series does not converge at zeta = {zeta}"
            )))
        }
    }

    fn coefficient_sums(&self) -> Result<[f64; 2]> {
        let mut total = [0.0; 2];
        for branch in self.basis.branches() {
            let s = sum_nonneg(*branch, self.tol, |n| {
                let a = self.coefficient(n).norm_sqr();
                [a, self.basis.lambda(n) * a]
            })?;
            total[0] += s.value[0];
            total[1] += s.value[1];
        }
        Ok(total)
    }

    /// `||M||` in the Hilbert space of the basis.
    pub fn norm_h(&self) -> Result<f64> {
        Ok(self.coefficient_sums()?[0].sqrt())
    }

    /// `||M||_{L^2(Γ)} = (K M, M)^{1/2}`.
    pub fn norm_gamma(&self) -> Result<f64> {
        Ok(self.coefficient_sums()?[1].sqrt())
    }

    /// Points of the data curve: the circle `Γ`, or `[-1, 1]` for the ellipse.
    pub fn data_curve(&self, samples: usize) -> Vec<Complex64> {
        match self.geometry {
            Geometry::Ellipse(_) => (0..samples)
                .map(|j| {
                    let t = if samples > 1 {
                        -1.0 + 2.0 * j as f64 / (samples - 1) as f64
                    } else {
                        0.0
                    };
                    Complex64::new(t, 0.0)
                })
                .collect(),
            _ => {
                let (center, radius) = self.basis.data_circle();
                (0..samples)
                    .map(|j| {
                        center + Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * j as f64 / samples as f64)
                    })
                    .collect()
            }
        }
    }

    /// `max |M|` over `samples` points of the data curve.
    pub fn sup_on_data_curve(&self, samples: usize) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for zeta in self.data_curve(samples) {
            sup = sup.max(self.eval(zeta)?.norm());
        }
        Ok(sup)
    }
}

/// `Phi(eta) = sum lambda |e|^2/(lambda+eta)^2 / sum |e|^2/(lambda+eta)^2`,
/// increasing from 0 to `(K p_z, p_z) / ||p_z||^2`.
pub fn phi(basis: &SpectralBasis, z: Complex64, eta: f64, tol: f64) -> Result<f64> {
    Ok(phi_sums(basis, z, eta, tol)?.0)
}

/// `(Phi(eta), sum |e|^2 / (lambda + eta)^2)`.
fn phi_sums(basis: &SpectralBasis, z: Complex64, eta: f64, tol: f64) -> Result<(f64, f64)> {
    let mut num = 0.0;
    let mut den = 0.0;
    for branch in basis.branches() {
        let s = sum_nonneg(*branch, tol, |n| {
            let lambda = basis.lambda(n);
            let e = basis.eval(n, z).norm_sqr();
            let d = (lambda + eta) * (lambda + eta);
            [lambda * e / d, e / d]
        })?;
        num += s.value[0];
        den += s.value[1];
    }
    Ok((num / den, den))
}

/// `lim Phi(eta)` as `eta -> infinity`.
pub fn phi_limit(basis: &SpectralBasis, z: Complex64, tol: f64) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for branch in basis.branches() {
        let s = sum_nonneg(*branch, tol, |n| {
            let e = basis.eval(n, z).norm_sqr();
            [basis.lambda(n) * e, e]
        })?;
        num += s.value[0];
        den += s.value[1];
    }
    Ok(num / den)
}

/// Root `eta*` of `Phi(eta) = eps^2` with the multipliers of the dual problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualCertificate {
    pub eta_star: f64,
    pub phi_at_eta_star: f64,
    /// `eta* / eps^2`.
    pub ratio_eta_eps2: f64,
    /// `nu = (sum |e|^2 / (lambda + eta*)^2)^{1/2}`.
    pub nu: f64,
    /// `mu = eta* nu`.
    pub mu: f64,
}

pub fn dual_certificate(geometry: &Geometry, z: Complex64, eps: f64, tol: f64) -> Result<DualCertificate> {
    let point = geometry.evaluation_point(z)?;
    dual_certificate_in_basis(&SpectralBasis::for_geometry(geometry), point.basis_z, eps, tol)
}

pub fn dual_certificate_in_basis(basis: &SpectralBasis, z: Complex64, eps: f64, tol: f64) -> Result<DualCertificate> {
    check_eps(eps)?;
    let target = eps * eps;
    let limit = phi_limit(basis, z, tol)?;
    if target >= limit {
        return Err(Error::Numerical(format!(
            "Phi(eta) = eps^2 has no root: eps^2 = {target:e} exceeds sup Phi = {limit:e}"
        )));
    }
    let f = |eta: f64| phi(basis, z, eta, tol);
    let (mut lo, mut hi) = (target, target);
    let mut steps = 0;
    while f(lo)? > target {
        lo /= 10.0;
        steps += 1;
        if steps > 60 || lo == 0.0 {
            return Err(Error::Numerical("could not bracket eta* from below".into()));
        }
    }
    steps = 0;
    while f(hi)? < target {
        hi *= 10.0;
        steps += 1;
        if steps > 60 || !hi.is_finite() {
            return Err(Error::Numerical("could not bracket eta* from above".into()));
        }
    }
    for _ in 0..200 {
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
        let mid = (lo * hi).sqrt();
        if f(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let eta_star = (lo * hi).sqrt();
    let (value, den) = phi_sums(basis, z, eta_star, tol)?;
    let nu = den.sqrt();
    Ok(DualCertificate {
        eta_star,
        phi_at_eta_star: value,
        ratio_eta_eps2: eta_star / target,
        nu,
        mu: eta_star * nu,
    })
}

/// Degree `K(eps) = floor(ln(1/eps) / ln R)` of the scaled Chebyshev competitor.
pub fn competitor_degree(eps: f64, big_r: f64) -> Result<u32> {
    if !(big_r.is_finite() && big_r > 1.0) {
        return Err(Error::InvalidGeometry(format!("R must exceed 1 (R = {big_r})")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("eps must lie in (0, 1) (eps = {eps})")));
    }
    let mut k = ((1.0 / eps).ln() / big_r.ln()).floor().max(0.0) as i32;
    // the floor above can land one off when ln(1/eps)/ln R is an integer
    let slack = 1.0 + 8.0 * f64::EPSILON;
    while big_r.powi(k + 1) * eps <= slack {
        k += 1;
    }
    while k > 0 && big_r.powi(k) * eps > slack {
        k -= 1;
    }
    Ok(k as u32)
}

/// `g(z) = eps T_K(z)` with `K = K(eps)`: the polynomial competitor to the
/// ellipse maximizer.
pub fn chebyshev_competitor(z: Complex64, eps: f64, big_r: f64) -> Result<Complex64> {
    let k = competitor_degree(eps, big_r)?;
    Ok(eps * crate::chebyshev::chebyshev_t(k as usize, z))
}
