//! Reproducing kernels and the explicit eigenpairs `(lambda_n, e_n)` of the
//! restriction operator `K` for each setting.
//!
//! `K` acts on the Hilbert space of analytic functions by
//! `(K f)(zeta) = ∫_Γ p(zeta, tau) f(tau) |d tau|`, so `(K f, f) = ||f||^2_{L^2(Γ)}`.
//! In the three settings its eigenfunctions are known in closed form:
//!
//! | basis              | index set | `e_n(zeta)`                                   | `lambda_n`                     |
//! |--------------------|-----------|-----------------------------------------------|--------------------------------|
//! | annulus            | `Z`       | `zeta^n` (`n >= 0`), `(zeta/rho)^n` (`n < 0`)  | `2 pi r r^{2n}`, `2 pi r (r/rho)^{2n}` |
//! | half-plane         | `n >= 0`  | `(1-r^2)^{1/4} / sqrt(pi) * m^n / (zeta + z0)` | `r rho^{2n} / (1 + sqrt(1-r^2))` |
//! | symmetric annulus  | `n >= 0`  | `1`, `(zeta^n + (rho/zeta)^n) / sqrt 2`        | `2 pi sqrt(rho) rho^n`         |
//!
//! The symmetric basis spans the subspace `L = {f : f(zeta) = f(rho / zeta)}`
//! of the annulus space with `r^2 = rho`; it is the image of functions
//! analytic in a Bernstein ellipse.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Annulus, Geometry, HalfPlaneGeometry};
use crate::quadrature::{integrate_real_line, laurent_coefficients, CircleRule};
use crate::series::Branch;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Reproducing kernel of `H^2(A_rho)` for the inner product that makes
/// `{e_n}` orthonormal: `1/(1 - zeta conj(tau)) + rho^2/(zeta conj(tau) - rho^2)`.
pub fn kernel_annulus(zeta: Complex64, tau: Complex64, a: &Annulus) -> Result<Complex64> {
    let x = zeta * tau.conj();
    let rho2 = a.rho() * a.rho();
    let d1 = Complex64::new(1.0, 0.0) - x;
    let d2 = x - rho2;
    if d1 == Complex64::new(0.0, 0.0) || d2 == Complex64::new(0.0, 0.0) {
        return Err(Error::Pole(format!(
            "annulus kernel is singular for zeta * conj(tau) = {x}"
        )));
    }
    Ok(d1.inv() + rho2 / d2)
}

/// Reproducing kernel of `H^2(H_+)`: `i / (2 pi (zeta - conj(tau)))`.
pub fn kernel_halfplane(zeta: Complex64, tau: Complex64) -> Result<Complex64> {
    let d = zeta - tau.conj();
    if d == Complex64::new(0.0, 0.0) {
        return Err(Error::Pole("half-plane kernel is singular at zeta = conj(tau)".into()));
    }
    Ok(I / (2.0 * PI * d))
}

/// The reproducing kernel of one of the supported spaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Annulus(Annulus),
    HalfPlane,
    /// Kernel of the symmetric subspace `L`: `(p(zeta, tau) + p(rho/zeta, tau)) / 2`.
    SymmetricAnnulus(Annulus),
}

impl Kernel {
    pub fn eval(&self, zeta: Complex64, tau: Complex64) -> Result<Complex64> {
        match self {
            Kernel::Annulus(a) => kernel_annulus(zeta, tau, a),
            Kernel::HalfPlane => kernel_halfplane(zeta, tau),
            Kernel::SymmetricAnnulus(a) => {
                let mirrored = a.rho() / zeta;
                Ok(0.5 * (kernel_annulus(zeta, tau, a)? + kernel_annulus(mirrored, tau, a)?))
            }
        }
    }
}

/// Which indices label the eigenpairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexSet {
    /// All integers.
    Integers,
    /// `0, 1, 2, ...`
    NonNegative,
}

impl IndexSet {
    pub fn contains(&self, n: i64) -> bool {
        match self {
            IndexSet::Integers => true,
            IndexSet::NonNegative => n >= 0,
        }
    }

    /// Branches covering the index set, in summation order.
    pub fn branches(&self) -> &'static [Branch] {
        const Z: [Branch; 2] = [Branch::up(0), Branch::down(-1)];
        const N: [Branch; 1] = [Branch::up(0)];
        match self {
            IndexSet::Integers => &Z,
            IndexSet::NonNegative => &N,
        }
    }

    /// Indices with `|n| <= limit`, in increasing order.
    pub fn window(&self, limit: i64) -> Vec<i64> {
        match self {
            IndexSet::Integers => (-limit..=limit).collect(),
            IndexSet::NonNegative => (0..=limit).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum BasisKind {
    Annulus(Annulus),
    HalfPlane {
        geometry: HalfPlaneGeometry,
        norm: f64,
        lambda0: f64,
    },
    SymmetricAnnulus(Annulus),
}

/// Orthonormal eigenbasis of `K` for one setting.
///
/// Eigenfunctions are evaluated on demand from the geometry constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBasis {
    kind: BasisKind,
}

/// Eigenpairs of `K` on `H^2(A_rho)` with data on `|zeta| = r`.
pub fn basis_annulus(a: &Annulus) -> SpectralBasis {
    SpectralBasis {
        kind: BasisKind::Annulus(*a),
    }
}

/// Eigenpairs of `K` on `H^2(H_+)` with data on `C(i, r)`, indexed from `n = 0`.
pub fn basis_halfplane(g: &HalfPlaneGeometry) -> SpectralBasis {
    let r = g.r();
    let s = g.s();
    SpectralBasis {
        kind: BasisKind::HalfPlane {
            geometry: *g,
            norm: s.sqrt() / PI.sqrt(),
            lambda0: r / (1.0 + s),
        },
    }
}

/// Eigenpairs of `K` restricted to the symmetric subspace `L`; requires `r^2 = rho`.
pub fn basis_annulus_symmetric(a: &Annulus) -> Result<SpectralBasis> {
    if !a.is_symmetric() {
        return Err(Error::Configuration(format!(
            "symmetric subspace needs r^2 = rho (rho = {}, r = {})",
            a.rho(),
            a.r()
        )));
    }
    Ok(SpectralBasis {
        kind: BasisKind::SymmetricAnnulus(*a),
    })
}

impl SpectralBasis {
    /// The basis a geometry is solved in; the ellipse uses the symmetric
    /// subspace of its annulus view.
    pub fn for_geometry(g: &Geometry) -> Self {
        match g {
            Geometry::Annulus(a) => basis_annulus(a),
            Geometry::HalfPlane(h) => basis_halfplane(h),
            Geometry::Ellipse(e) => SpectralBasis {
                kind: BasisKind::SymmetricAnnulus(e.annulus_view()),
            },
        }
    }

    /// The annulus of an annulus or symmetric-annulus basis.
    pub fn annulus(&self) -> Option<Annulus> {
        match self.kind {
            BasisKind::Annulus(a) | BasisKind::SymmetricAnnulus(a) => Some(a),
            BasisKind::HalfPlane { .. } => None,
        }
    }

    pub fn half_plane(&self) -> Option<HalfPlaneGeometry> {
        match self.kind {
            BasisKind::HalfPlane { geometry, .. } => Some(geometry),
            _ => None,
        }
    }

    /// True for the basis of the symmetric subspace `L`.
    pub fn is_symmetric(&self) -> bool {
        matches!(self.kind, BasisKind::SymmetricAnnulus(_))
    }

    pub fn index_set(&self) -> IndexSet {
        match self.kind {
            BasisKind::Annulus(_) => IndexSet::Integers,
            BasisKind::HalfPlane { .. } | BasisKind::SymmetricAnnulus(_) => IndexSet::NonNegative,
        }
    }

    pub fn branches(&self) -> &'static [Branch] {
        self.index_set().branches()
    }

    /// The reproducing kernel of the space the basis spans.
    pub fn kernel(&self) -> Kernel {
        match self.kind {
            BasisKind::Annulus(a) => Kernel::Annulus(a),
            BasisKind::HalfPlane { .. } => Kernel::HalfPlane,
            BasisKind::SymmetricAnnulus(a) => Kernel::SymmetricAnnulus(a),
        }
    }

    /// Center and radius of the data circle.
    pub fn data_circle(&self) -> (Complex64, f64) {
        match self.kind {
            BasisKind::Annulus(a) | BasisKind::SymmetricAnnulus(a) => (Complex64::new(0.0, 0.0), a.r()),
            BasisKind::HalfPlane { geometry, .. } => (I, geometry.r()),
        }
    }

    /// Eigenvalue `lambda_n`. `n` must belong to [`Self::index_set`].
    pub fn lambda(&self, n: i64) -> f64 {
        debug_assert!(self.index_set().contains(n), "index {n} outside the basis");
        match self.kind {
            BasisKind::Annulus(a) => {
                let r = a.r();
                if n >= 0 {
                    2.0 * PI * r * r.powi(2 * n as i32)
                } else {
                    2.0 * PI * r * (a.rho() / r).powi(-2 * n as i32)
                }
            }
            BasisKind::HalfPlane { geometry, lambda0, .. } => lambda0 * geometry.rho().powi(2 * n as i32),
            BasisKind::SymmetricAnnulus(a) => 2.0 * PI * a.r() * a.rho().powi(n as i32),
        }
    }

    /// Eigenfunction `e_n(zeta)`.
    pub fn eval(&self, n: i64, zeta: Complex64) -> Complex64 {
        debug_assert!(self.index_set().contains(n), "index {n} outside the basis");
        match self.kind {
            BasisKind::Annulus(a) => {
                if n >= 0 {
                    zeta.powi(n as i32)
                } else {
                    (a.rho() / zeta).powi(-n as i32)
                }
            }
            BasisKind::HalfPlane { geometry, norm, .. } => {
                let z0 = geometry.z0();
                let den = zeta + z0;
                let m = (zeta - z0) / den;
                m.powi(n as i32) * norm / den
            }
            BasisKind::SymmetricAnnulus(a) => {
                if n == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    let k = n as i32;
                    (zeta.powi(k) + (a.rho() / zeta).powi(k)) / SQRT_2
                }
            }
        }
    }

    /// An upper bound on `|e_n(zeta)|` that is geometric in `n`; used to
    /// decide truncation where the eigenfunction itself may oscillate.
    pub fn envelope(&self, n: i64, zeta: Complex64) -> f64 {
        let m = zeta.norm();
        match self.kind {
            BasisKind::Annulus(a) => {
                if n >= 0 {
                    m.powi(n as i32)
                } else {
                    (a.rho() / m).powi(-n as i32)
                }
            }
            BasisKind::HalfPlane { .. } => self.eval(n, zeta).norm(),
            BasisKind::SymmetricAnnulus(a) => {
                if n == 0 {
                    1.0
                } else {
                    let k = n as i32;
                    (m.powi(k) + (a.rho() / m).powi(k)) / SQRT_2
                }
            }
        }
    }

    /// `(K f)(zeta)` by the trapezoid rule with `count` nodes on the data circle.
    pub fn apply_operator(
        &self,
        f: impl Fn(Complex64) -> Complex64,
        zeta: Complex64,
        count: usize,
    ) -> Result<Complex64> {
        let (center, radius) = self.data_circle();
        let rule = CircleRule::new(center, radius, count)?;
        let kernel = self.kernel();
        let w = rule.weight();
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..count {
            let tau = rule.node(j);
            acc += kernel.eval(zeta, tau)? * f(tau);
        }
        Ok(acc * w)
    }

    /// Inner product of the Hilbert space, by quadrature; see
    /// [`annulus_inner_product`] and [`halfplane_inner_product`].
    pub fn inner_product(&self, f: impl Fn(Complex64) -> Complex64, g: impl Fn(Complex64) -> Complex64) -> Complex64 {
        match self.kind {
            BasisKind::Annulus(a) | BasisKind::SymmetricAnnulus(a) => annulus_inner_product(f, g, &a, 256),
            BasisKind::HalfPlane { geometry, .. } => halfplane_inner_product(f, g, &geometry, 512),
        }
    }
}

/// Inner product of `H^2(A_rho)`:
/// `(f, g) = (f_+, g_+)_{L^2(|zeta|=1)} / (2 pi) + (f_-, g_-)_{L^2(|zeta|=rho)} / (2 pi rho)`
/// where `f_+` and `f_-` collect the nonnegative and negative Laurent powers.
///
/// The Laurent coefficients are sampled on `|zeta| = sqrt(rho)`, and both
/// boundary integrals are then evaluated exactly by Parseval.
pub fn annulus_inner_product(
    f: impl Fn(Complex64) -> Complex64,
    g: impl Fn(Complex64) -> Complex64,
    a: &Annulus,
    count: usize,
) -> Complex64 {
    let radius = a.rho().sqrt();
    let fc = laurent_coefficients(f, radius, count);
    let gc = laurent_coefficients(g, radius, count);
    let half = (count / 2) as i64;
    let rho2 = a.rho() * a.rho();
    fc.iter()
        .zip(&gc)
        .enumerate()
        .map(|(k, (fk, gk))| {
            let n = k as i64 - half;
            let weight = if n >= 0 { 1.0 } else { rho2.powi(n as i32) };
            fk * gk.conj() * weight
        })
        .sum()
}

/// Inner product of `H^2(H_+)`: `∫_R f(x) conj(g(x)) dx`.
pub fn halfplane_inner_product(
    f: impl Fn(Complex64) -> Complex64,
    g: impl Fn(Complex64) -> Complex64,
    geometry: &HalfPlaneGeometry,
    count: usize,
) -> Complex64 {
    integrate_real_line(
        |x| {
            let x = Complex64::new(x, 0.0);
            f(x) * g(x).conj()
        },
        geometry.s(),
        count,
    )
}

/// Orthogonal projection onto the symmetric subspace: `zeta -> (f(zeta) + f(rho/zeta)) / 2`.
pub fn project_symmetric<F>(f: F, a: &Annulus) -> Result<impl Fn(Complex64) -> Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    if !a.is_symmetric() {
        return Err(Error::Configuration(format!(
            "projection onto L needs r^2 = rho (rho = {}, r = {})",
            a.rho(),
            a.r()
        )));
    }
    let rho = a.rho();
    Ok(move |zeta: Complex64| 0.5 * (f(zeta) + f(rho / zeta)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn annulus() -> Annulus {
        Annulus::new(0.25, 0.5).unwrap()
    }

    #[test]
    fn annulus_kernel_values() {
        let a = annulus();
        let v = kernel_annulus(c(0.5, 0.0), c(0.5, 0.0), &a).unwrap();
        assert!((v - c(5.0 / 3.0, 0.0)).norm() < 1e-15);
        let x = c(0.62, 0.0);
        let v = kernel_annulus(x, x, &a).unwrap();
        assert!(v.im == 0.0 && v.re > 0.0);
        let (s, t) = (c(0.0, 0.5), c(0.4, 0.0));
        let lhs = kernel_annulus(s, t, &a).unwrap();
        let rhs = kernel_annulus(t, s, &a).unwrap().conj();
        assert!((lhs - rhs).norm() < 1e-15);
        assert!(matches!(
            kernel_annulus(c(1.0, 0.0), c(1.0, 0.0), &a),
            Err(Error::Pole(_))
        ));
    }

    #[test]
    fn halfplane_kernel_values() {
        let v = kernel_halfplane(c(0.0, 1.0), c(0.0, 1.0)).unwrap();
        assert!((v - c(1.0 / (4.0 * PI), 0.0)).norm() < 1e-16);
        let z = c(0.3, 2.5);
        let v = kernel_halfplane(z, z).unwrap();
        assert!((v.re - 1.0 / (4.0 * PI * 2.5)).abs() < 1e-16 && v.im.abs() < 1e-18);
        let (s, t) = (c(0.0, 2.0), c(1.0, 1.0));
        let lhs = kernel_halfplane(s, t).unwrap();
        let rhs = kernel_halfplane(t, s).unwrap().conj();
        assert!((lhs - rhs).norm() < 1e-16);
    }

    #[test]
    fn annulus_eigenvalues() {
        let b = basis_annulus(&Annulus::new(0.25, 0.5).unwrap());
        assert!((b.lambda(0) - PI).abs() < 1e-15);
        assert!((b.lambda(1) - PI / 4.0).abs() < 1e-15);
        assert!((b.lambda(-1) - PI / 4.0).abs() < 1e-15);
        assert!((b.eval(-1, c(0.25, 0.0)) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((b.eval(3, c(0.0, 0.5)) - c(0.0, -0.125)).norm() < 1e-16);
    }

    #[test]
    fn halfplane_eigenvalues() {
        let g = HalfPlaneGeometry::new(0.6).unwrap();
        let b = basis_halfplane(&g);
        for n in 0..10 {
            let expected = 9f64.powi(-(n as i32)) / 3.0;
            assert!((b.lambda(n) - expected).abs() <= 1e-14 * expected, "n = {n}");
        }
        for n in 1..6 {
            assert_eq!(b.eval(n, g.z0()), c(0.0, 0.0));
        }
    }

    #[test]
    fn halfplane_eigenfunctions_normalized_on_real_line() {
        let g = HalfPlaneGeometry::new(0.6).unwrap();
        let b = basis_halfplane(&g);
        for n in 0..=5 {
            let norm2 = halfplane_inner_product(|x| b.eval(n, x), |x| b.eval(n, x), &g, 256);
            assert!(
                (norm2.re - 1.0).abs() < 1e-8 && norm2.im.abs() < 1e-8,
                "n = {n}: {norm2}"
            );
        }
    }

    #[test]
    fn symmetric_basis() {
        let a = annulus();
        let b = basis_annulus_symmetric(&a).unwrap();
        assert!((b.lambda(0) - PI).abs() < 1e-15);
        let z = c(0.0, 0.7);
        assert_eq!(b.eval(3, z), b.eval(3, a.rho() / z));
        let on_gamma = Complex64::from_polar(0.5, 0.9);
        assert!((b.eval(4, on_gamma) - b.eval(4, on_gamma.conj())).norm() < 1e-15);
        assert!(matches!(
            basis_annulus_symmetric(&Annulus::new(0.2, 0.5).unwrap()),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn projection_onto_symmetric_subspace() {
        let a = annulus();
        let b = basis_annulus_symmetric(&a).unwrap();
        let p = project_symmetric(|z| b.eval(2, z), &a).unwrap();
        let z = c(0.3, 0.6);
        assert!((p(z) - b.eval(2, z)).norm() < 1e-15);
        let p = project_symmetric(|z| z, &a).unwrap();
        assert!((p(z) - 0.5 * (z + a.rho() / z)).norm() < 1e-16);
        let pp = project_symmetric(|z| z.exp() * z.powi(-2), &a).unwrap();
        let ppp = project_symmetric(&pp, &a).unwrap();
        for k in 0..16 {
            let zeta = Complex64::from_polar(0.3 + 0.04 * k as f64, 0.4 * k as f64);
            assert!((pp(zeta) - ppp(zeta)).norm() < 1e-14);
        }
        assert!(project_symmetric(|z| z, &Annulus::new(0.2, 0.5).unwrap()).is_err());
    }

    #[test]
    fn kernel_matches_basis_expansion() {
        let a = annulus();
        let b = basis_annulus(&a);
        for &(zeta, tau) in &[
            (c(0.4, 0.0), c(0.9, 0.0)),
            (Complex64::from_polar(0.7, 1.0), Complex64::from_polar(0.5, -2.0)),
            (Complex64::from_polar(0.9, 0.3), Complex64::from_polar(0.9, 0.2)),
        ] {
            let sum: Complex64 = (-200..=200).map(|n| b.eval(n, tau).conj() * b.eval(n, zeta)).sum();
            let p = kernel_annulus(zeta, tau, &a).unwrap();
            assert!((sum - p).norm() < 1e-8 * p.norm());
        }
    }
}
