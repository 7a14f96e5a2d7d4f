//! Domains, data curves, membership tests and the conformal maps.
//!
//! Three settings are supported:
//!
//! * [`Annulus`]: `A_rho = {rho < |zeta| < 1}` with data on the circle `|zeta| = r`.
//! * [`HalfPlaneGeometry`]: the upper half-plane with data on the circle `C(i, r)`.
//! * [`BernsteinEllipse`]: the ellipse `E_R` with foci `±1` and data on `[-1, 1]`,
//!   handled through its annulus view `rho = R^-2`, `r = R^-1`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Points closer than this to a data curve or a domain boundary are rejected.
pub const NEAR_DEGENERATE_DISTANCE: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Annulus `rho < |zeta| < 1` with the data circle `|zeta| = r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annulus {
    rho: f64,
    r: f64,
}

impl Annulus {
    pub fn new(rho: f64, r: f64) -> Result<Self> {
        if !(rho.is_finite() && r.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "annulus parameters must be finite (rho = {rho}, r = {r})"
            )));
        }
        if !(0.0 < rho && rho < r && r < 1.0) {
            return Err(Error::InvalidGeometry(format!(
                "annulus requires 0 < rho < r < 1 (rho = {rho}, r = {r})"
            )));
        }
        Ok(Self { rho, r })
    }

    /// Inner radius of the annulus.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Radius of the data circle.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// `r^2 = rho`: the data circle is the symmetry circle of `zeta -> rho / zeta`.
    pub fn is_symmetric(&self) -> bool {
        (self.r * self.r - self.rho).abs() <= 1e-14 * self.rho
    }

    /// Locate `z` relative to the data circle, rejecting points outside the
    /// open annulus or too close to one of its three circles.
    pub fn classify(&self, z: Complex64) -> Result<Side> {
        let m = z.norm();
        if !m.is_finite() || m <= self.rho || m >= 1.0 {
            return Err(Error::Domain(format!(
                "|z| = {m} is outside the annulus ({}, 1)",
                self.rho
            )));
        }
        if m - self.rho < NEAR_DEGENERATE_DISTANCE || 1.0 - m < NEAR_DEGENERATE_DISTANCE {
            return Err(Error::NearDegenerate(format!(
                "|z| = {m} is within {NEAR_DEGENERATE_DISTANCE:e} of the annulus boundary"
            )));
        }
        if (m - self.r).abs() < NEAR_DEGENERATE_DISTANCE {
            return Err(Error::NearDegenerate(format!(
                "|z| = {m} is within {NEAR_DEGENERATE_DISTANCE:e} of the data circle r = {}",
                self.r
            )));
        }
        Ok(if m > self.r { Side::Outside } else { Side::Inside })
    }
}

/// Upper half-plane with the data circle `C(i, r)`.
///
/// The Möbius map `m(zeta) = (zeta - z0) / (zeta + z0)` with `z0 = i sqrt(1 - r^2)`
/// sends the half-plane to the unit disk and the data circle to `|w| = rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlaneGeometry {
    r: f64,
    z0: Complex64,
    rho: f64,
}

impl HalfPlaneGeometry {
    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && 0.0 < r && r < 1.0) {
            return Err(Error::InvalidGeometry(format!(
                "half-plane data circle requires 0 < r < 1 (r = {r})"
            )));
        }
        let s = (1.0 - r * r).sqrt();
        // (1 - s) / r without the cancellation for small r.
        let rho = r / (1.0 + s);
        Ok(Self {
            r,
            z0: Complex64::new(0.0, s),
            rho,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `z0 = i sqrt(1 - r^2)`.
    pub fn z0(&self) -> Complex64 {
        self.z0
    }

    /// Radius of the image of the data circle under the Möbius map.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `sqrt(1 - r^2)`.
    pub fn s(&self) -> f64 {
        self.z0.im
    }

    pub fn center(&self) -> Complex64 {
        I
    }

    pub fn classify(&self, z: Complex64) -> Result<Side> {
        if !(z.re.is_finite() && z.im.is_finite()) || z.im <= 0.0 {
            return Err(Error::Domain(format!(
                "z = {} is not in the open upper half-plane",
                fmt_c(z)
            )));
        }
        if z.im < NEAR_DEGENERATE_DISTANCE {
            return Err(Error::NearDegenerate(format!(
                "z = {} is within {NEAR_DEGENERATE_DISTANCE:e} of the real axis",
                fmt_c(z)
            )));
        }
        let d = (z - I).norm();
        if (d - self.r).abs() < NEAR_DEGENERATE_DISTANCE {
            return Err(Error::NearDegenerate(format!(
                "z = {} is within {NEAR_DEGENERATE_DISTANCE:e} of the data circle C(i, {})",
                fmt_c(z),
                self.r
            )));
        }
        Ok(if d > self.r { Side::Outside } else { Side::Inside })
    }
}

/// Bernstein ellipse `E_R` with foci `±1` and semi-axis sum `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinEllipse {
    big_r: f64,
    annulus_view: Annulus,
}

impl BernsteinEllipse {
    pub fn new(big_r: f64) -> Result<Self> {
        if !(big_r.is_finite() && big_r > 1.0) {
            return Err(Error::InvalidGeometry(format!(
                "Bernstein ellipse requires R > 1 (R = {big_r})"
            )));
        }
        let r = 1.0 / big_r;
        // rho is defined as r * r so that the symmetric relation holds bit for bit.
        let annulus_view = Annulus::new(r * r, r)?;
        Ok(Self { big_r, annulus_view })
    }

    /// Sum of the semi-axes.
    pub fn big_r(&self) -> f64 {
        self.big_r
    }

    /// The annulus `R^-2 < |zeta| < 1` with data circle `|zeta| = R^-1`.
    pub fn annulus_view(&self) -> Annulus {
        self.annulus_view
    }

    /// Semi-axes `((R + 1/R) / 2, (R - 1/R) / 2)`.
    pub fn semi_axes(&self) -> (f64, f64) {
        let inv = 1.0 / self.big_r;
        (0.5 * (self.big_r + inv), 0.5 * (self.big_r - inv))
    }

    /// Validate `z` in `E_R \ [-1, 1]` and return its annulus image `z_a`.
    pub fn classify(&self, z: Complex64) -> Result<Complex64> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain("non-finite point".into()));
        }
        if distance_to_interval(z) < NEAR_DEGENERATE_DISTANCE && !on_interval(z) {
            return Err(Error::NearDegenerate(format!(
                "z = {} is within {NEAR_DEGENERATE_DISTANCE:e} of [-1, 1]",
                fmt_c(z)
            )));
        }
        let w = inverse_joukowski(z, self.big_r)?;
        if self.big_r - w.norm() < NEAR_DEGENERATE_DISTANCE {
            return Err(Error::NearDegenerate(format!(
                "z = {} is within {NEAR_DEGENERATE_DISTANCE:e} of the ellipse boundary",
                fmt_c(z)
            )));
        }
        Ok(w / self.big_r)
    }
}

/// Location of an evaluation point relative to the data curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Between the data curve and the outer boundary (or, for the
    /// half-plane, outside the data circle).
    Outside,
    /// Between the inner boundary and the data curve (annulus), or inside
    /// the data circle (half-plane).
    Inside,
}

/// One of the three problem settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Annulus(Annulus),
    HalfPlane(HalfPlaneGeometry),
    Ellipse(BernsteinEllipse),
}

impl Geometry {
    pub fn annulus(rho: f64, r: f64) -> Result<Self> {
        Annulus::new(rho, r).map(Geometry::Annulus)
    }

    pub fn half_plane(r: f64) -> Result<Self> {
        HalfPlaneGeometry::new(r).map(Geometry::HalfPlane)
    }

    pub fn ellipse(big_r: f64) -> Result<Self> {
        BernsteinEllipse::new(big_r).map(Geometry::Ellipse)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Geometry::Annulus(_) => "annulus",
            Geometry::HalfPlane(_) => "halfplane",
            Geometry::Ellipse(_) => "ellipse",
        }
    }

    /// Validate `z` and locate it; see [`EvaluationPoint`].
    pub fn evaluation_point(&self, z: Complex64) -> Result<EvaluationPoint> {
        match self {
            Geometry::Annulus(a) => Ok(EvaluationPoint {
                z,
                side: a.classify(z)?,
                basis_z: z,
            }),
            Geometry::HalfPlane(g) => Ok(EvaluationPoint {
                z,
                side: g.classify(z)?,
                basis_z: z,
            }),
            Geometry::Ellipse(e) => Ok(EvaluationPoint {
                z,
                side: Side::Outside,
                basis_z: e.classify(z)?,
            }),
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Annulus(a) => write!(f, "annulus(rho={}, r={})", a.rho, a.r),
            Geometry::HalfPlane(g) => write!(f, "halfplane(r={})", g.r),
            Geometry::Ellipse(e) => write!(f, "ellipse(R={})", e.big_r),
        }
    }
}

/// A validated evaluation point.
///
/// `basis_z` is the point in the coordinates of the spectral basis: `z`
/// itself for the annulus and the half-plane, and `z_a = J^-1(z) / R` for the
/// ellipse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationPoint {
    pub z: Complex64,
    pub side: Side,
    pub basis_z: Complex64,
}

/// Joukowski map `J(w) = (w + 1/w) / 2`.
pub fn joukowski(w: Complex64) -> Result<Complex64> {
    if w == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("Joukowski map is singular at w = 0".into()));
    }
    Ok(0.5 * (w + w.inv()))
}

/// Branch of `J^-1` on `E_R \ [-1, 1]` with `1 < |w| < R`.
///
/// Solves `w^2 - 2 z w + 1 = 0` and keeps the root outside the unit circle;
/// the two roots multiply to one, so exactly one qualifies off the cut.
pub fn inverse_joukowski(z: Complex64, big_r: f64) -> Result<Complex64> {
    if !(big_r.is_finite() && big_r > 1.0) {
        return Err(Error::InvalidGeometry(format!("R must exceed 1 (R = {big_r})")));
    }
    if on_interval(z) {
        return Err(Error::BranchPoint(format!("z = {} lies on the cut [-1, 1]", fmt_c(z))));
    }
    let w = exterior_root(z);
    if w.norm() > big_r * (1.0 + 4.0 * f64::EPSILON) {
        return Err(Error::Domain(format!(
            "z = {} lies outside the closed Bernstein ellipse E_{big_r}",
            fmt_c(z)
        )));
    }
    Ok(w)
}

/// The nested-radical form `z + (z - 1) sqrt((z + 1) / (z - 1))` of the same
/// branch, kept as an independent cross-check of [`inverse_joukowski`].
pub fn inverse_joukowski_radical(z: Complex64) -> Result<Complex64> {
    if on_interval(z) {
        return Err(Error::BranchPoint(format!("z = {} lies on the cut [-1, 1]", fmt_c(z))));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok(z + (z - one) * ((z + one) / (z - one)).sqrt())
}

/// Preimage of `z` under `J` with `|w| >= 1`, defined on the whole plane
/// including the cut (where `|w| = 1` and both preimages are conjugate).
pub(crate) fn exterior_root(z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let s = ((z - one) * (z + one)).sqrt();
    let a = z + s;
    let b = z - s;
    // pick the larger root directly, the other one suffers cancellation
    let w = if a.norm_sqr() >= b.norm_sqr() { a } else { b };
    if on_interval(z) {
        // on the cut both roots have modulus one; fix the upper one
        let x = z.re.clamp(-1.0, 1.0);
        return Complex64::new(x, (1.0 - x * x).max(0.0).sqrt());
    }
    w
}

/// Möbius map `m(zeta) = (zeta - z0) / (zeta + z0)` of the half-plane setting.
///
/// Defined off the pole `zeta = -z0`; the map is also used on the real line
/// (where `|m| = 1`) when checking normalizations.
pub fn mobius(zeta: Complex64, g: &HalfPlaneGeometry) -> Result<Complex64> {
    let den = zeta + g.z0;
    if den == Complex64::new(0.0, 0.0) {
        return Err(Error::Pole("Möbius map has a pole at zeta = -z0".into()));
    }
    Ok((zeta - g.z0) / den)
}

/// Image `z_a = J^-1(z) / R` of an ellipse point in the annulus view, with `r < |z_a| < 1`.
pub fn ellipse_point_to_annulus(z: Complex64, e: &BernsteinEllipse) -> Result<Complex64> {
    Ok(inverse_joukowski(z, e.big_r)? / e.big_r)
}

fn on_interval(z: Complex64) -> bool {
    z.im == 0.0 && z.re.abs() <= 1.0
}

fn distance_to_interval(z: Complex64) -> f64 {
    let x = z.re.clamp(-1.0, 1.0);
    Complex64::new(z.re - x, z.im).norm()
}

pub(crate) fn fmt_c(z: Complex64) -> String {
    format!("{},{}", z.re, z.im)
}
