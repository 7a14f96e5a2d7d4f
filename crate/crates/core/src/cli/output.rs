//! Fixed-format number printing and the geometry echo shared by all commands.

use serde::Serialize;

use crate::geometry::Geometry;

/// 17 significant digits, scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeometrySpec {
    Annulus {
        rho: f64,
        r: f64,
    },
    Halfplane {
        r: f64,
    },
    Ellipse {
        #[serde(rename = "R")]
        big_r: f64,
    },
}

impl From<&Geometry> for GeometrySpec {
    fn from(g: &Geometry) -> Self {
        match g {
            Geometry::Annulus(a) => GeometrySpec::Annulus { rho: a.rho(), r: a.r() },
            Geometry::HalfPlane(h) => GeometrySpec::Halfplane { r: h.r() },
            Geometry::Ellipse(e) => GeometrySpec::Ellipse { big_r: e.big_r() },
        }
    }
}

/// `# geometry,...` metadata line for CSV footers.
pub fn geometry_comment(g: &Geometry) -> String {
    match g {
        Geometry::Annulus(a) => format!("# geometry,annulus,rho={},r={}\n", num(a.rho()), num(a.r())),
        Geometry::HalfPlane(h) => format!("# geometry,halfplane,r={}\n", num(h.r())),
        Geometry::Ellipse(e) => format!("# geometry,ellipse,R={}\n", num(e.big_r())),
    }
}

/// Make free text safe for a single CSV field.
pub fn csv_text(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
