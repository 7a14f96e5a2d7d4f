use std::fmt::Write as _;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::Serialize;

use super::output::{csv_text, geometry_comment, num, to_json, GeometrySpec};
use super::verify::{run_suite, VerifyOptions};
use super::{emit, exit_code, parse_eps_range, parse_floats, Format, GeometryArgs, OutputArgs};
use super::{EXIT_OK, EXIT_VERIFY_FAILED};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::nystrom::{analytic_eigenvalues, build, disk_decay_rate, spectrum as nystrom_spectrum, DISK_PROXY_RHO};
use crate::powerlaw::{fit_power_law, geometric_grid, map_grid};
use crate::tikhonov::{bound, dual_certificate, exponent as closed_exponent, maximizer as closed_maximizer, solve};

#[derive(Serialize)]
struct ExponentJson {
    geometry: GeometrySpec,
    z: [f64; 2],
    gamma: f64,
    stable_region: bool,
}

pub fn exponent(args: &GeometryArgs, out: &OutputArgs) -> Result<i32> {
    let (g, z) = args.resolve()?;
    let e = closed_exponent(&g, z)?;
    let text = match out.format {
        Format::Json => to_json(&ExponentJson {
            geometry: (&g).into(),
            z: [z.re, z.im],
            gamma: e.gamma,
            stable_region: e.stable_region,
        }),
        Format::Csv => format!(
            "kind,z_re,z_im,gamma,stable_region\n{},{},{},{},{}\n{}",
            g.kind(),
            num(z.re),
            num(z.im),
            num(e.gamma),
            e.stable_region,
            geometry_comment(&g)
        ),
    };
    emit(&text, out.out.as_ref())?;
    Ok(EXIT_OK)
}

const SWEEP_HEADER: &str = "eps,bound,M_at_z,u_at_z,norm_H,norm_Gamma,eta_star_ratio";

#[derive(Debug, Clone, Copy, Serialize)]
struct SweepRow {
    eps: f64,
    bound: f64,
    #[serde(rename = "M_at_z")]
    m_at_z: f64,
    u_at_z: f64,
    #[serde(rename = "norm_H")]
    norm_h: f64,
    #[serde(rename = "norm_Gamma")]
    norm_gamma: f64,
    eta_star_ratio: f64,
}

impl SweepRow {
    fn columns(&self) -> [f64; 6] {
        [
            self.bound,
            self.m_at_z,
            self.u_at_z,
            self.norm_h,
            self.norm_gamma,
            self.eta_star_ratio,
        ]
    }
}

fn sweep_row(g: &Geometry, z: Complex64, eps: f64, tol: f64) -> Result<SweepRow> {
    let sol = solve(g, z, eps, tol)?;
    let b = bound(&sol);
    let m = closed_maximizer(g, z, eps, tol)?.value_at_z()?.norm();
    let cert = dual_certificate(g, z, eps, tol)?;
    Ok(SweepRow {
        eps,
        bound: b.bound_value,
        m_at_z: m,
        u_at_z: sol.value_at_z,
        norm_h: sol.norm_h,
        norm_gamma: sol.norm_gamma,
        eta_star_ratio: cert.ratio_eta_eps2,
    })
}

#[derive(Serialize)]
struct FitJson {
    column: &'static str,
    slope: f64,
    expected: f64,
    intercept: f64,
    r_squared: f64,
    residual_max: f64,
    dropped_top_decade: bool,
}

#[derive(Serialize)]
struct SweepError {
    eps: f64,
    message: String,
}

#[derive(Serialize)]
struct SweepJson {
    geometry: GeometrySpec,
    z: [f64; 2],
    gamma: f64,
    rows: Vec<SweepRow>,
    fits: Vec<FitJson>,
    error: Option<SweepError>,
}

const FIT_COLUMNS: [&str; 6] = ["bound", "M_at_z", "u_at_z", "norm_H", "norm_Gamma", "eta_star_ratio"];

/// Expected slopes of the sweep columns for exponent `gamma`.
fn expected_slopes(gamma: f64) -> [f64; 6] {
    [gamma, gamma, 2.0 * gamma - 2.0, gamma - 2.0, gamma - 1.0, 0.0]
}

pub fn sweep(args: &GeometryArgs, eps_range: &str, tol: f64, out: &OutputArgs) -> Result<i32> {
    let (g, z) = args.resolve()?;
    let (lo, hi, n) = parse_eps_range(eps_range)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidInput(format!("--tol must be positive (got {tol})")));
    }
    let gamma = closed_exponent(&g, z)?.gamma;
    let grid = geometric_grid(lo, hi, n)?;
    let results = map_grid(&grid, |eps| sweep_row(&g, z, eps, tol));

    let mut rows = Vec::new();
    let mut failure = None;
    for (eps, r) in grid.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                failure = Some(Error::AtEps {
                    eps: *eps,
                    source: Box::new(e),
                });
                break;
            }
        }
    }

    let mut fits = Vec::new();
    if rows.len() >= 2 {
        let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
        let expected = expected_slopes(gamma);
        for (k, column) in FIT_COLUMNS.iter().enumerate() {
            let values: Vec<f64> = rows.iter().map(|r| r.columns()[k]).collect();
            if let Ok(pf) = fit_power_law(&eps, &values) {
                fits.push(FitJson {
                    column,
                    slope: pf.fit.slope,
                    expected: expected[k],
                    intercept: pf.fit.intercept,
                    r_squared: pf.fit.r_squared,
                    residual_max: pf.fit.residual_max,
                    dropped_top_decade: pf.dropped_top_decade,
                });
            }
        }
    }

    let error = failure.as_ref().map(|e| SweepError {
        eps: match e {
            Error::AtEps { eps, .. } => *eps,
            _ => f64::NAN,
        },
        message: e.to_string(),
    });

    let text = match out.format {
        Format::Json => to_json(&SweepJson {
            geometry: (&g).into(),
            z: [z.re, z.im],
            gamma,
            rows,
            fits,
            error,
        }),
        Format::Csv => {
            let mut s = String::new();
            s.push_str(SWEEP_HEADER);
            s.push('\n');
            for r in &rows {
                let cols: Vec<String> = std::iter::once(r.eps).chain(r.columns()).map(num).collect();
                s.push_str(&cols.join(","));
                s.push('\n');
            }
            if let Some(e) = &error {
                let _ = writeln!(s, "{},,,,,,,error: {}", num(e.eps), csv_text(&e.message));
            }
            s.push_str(&geometry_comment(&g));
            let _ = writeln!(s, "# z,{},{}", num(z.re), num(z.im));
            let _ = writeln!(s, "# gamma,{}", num(gamma));
            let _ = writeln!(s, "# fit,column,slope,expected,r_squared,dropped_top_decade");
            for f in &fits {
                let _ = writeln!(
                    s,
                    "# fit,{},{},{},{},{}",
                    f.column,
                    num(f.slope),
                    num(f.expected),
                    num(f.r_squared),
                    f.dropped_top_decade
                );
            }
            s
        }
    };
    emit(&text, out.out.as_ref())?;
    match failure {
        None => Ok(EXIT_OK),
        Some(e) => {
            eprintln!("contstab: {e}");
            Ok(exit_code(&e))
        }
    }
}

#[derive(Serialize)]
struct SpectrumRow {
    index: usize,
    mu_numeric: f64,
    lambda_analytic: f64,
    rel_err: f64,
}

#[derive(Serialize)]
struct DiskRateJson {
    ratio: f64,
    rho_hat: f64,
    r_squared: f64,
    used: usize,
    max_ratio_deviation: f64,
    max_prefactor_deviation: f64,
}

#[derive(Serialize)]
struct SpectrumJson {
    geometry: GeometrySpec,
    nodes: usize,
    noise_floor: f64,
    valid: usize,
    decay_slope: Option<f64>,
    /// Closed-form per-step decay of each eigenvalue branch.
    branch_rates: Vec<f64>,
    disk_rate: Option<DiskRateJson>,
    rows: Vec<SpectrumRow>,
}

pub fn spectrum(args: &GeometryArgs, nodes: usize, count: usize, out: &OutputArgs) -> Result<i32> {
    let (g, _) = args.resolve()?;
    let op = build(&g, nodes)?;
    let spec = nystrom_spectrum(&op)?;
    let count = count.min(nodes);
    let exact = analytic_eigenvalues(&op, count);
    let rows: Vec<SpectrumRow> = (0..count)
        .map(|k| {
            let mu = spec.eigenvalues[k];
            let lambda = exact[k];
            SpectrumRow {
                index: k,
                mu_numeric: mu,
                lambda_analytic: lambda,
                rel_err: (mu - lambda).abs() / lambda,
            }
        })
        .collect();
    let branch_rates = match op.geometry() {
        Geometry::Annulus(a) => vec![a.r() * a.r(), (a.rho() / a.r()).powi(2)],
        Geometry::HalfPlane(h) => vec![h.rho() * h.rho()],
        Geometry::Ellipse(_) => unreachable!("the ellipse is discretized through its annulus view"),
    };
    let disk_rate = match op.geometry() {
        Geometry::Annulus(a) if a.rho() <= DISK_PROXY_RHO => {
            let d = disk_decay_rate(&op, &spec)?;
            Some(DiskRateJson {
                ratio: d.ratio,
                rho_hat: d.rho_hat,
                r_squared: d.r_squared,
                used: d.used,
                max_ratio_deviation: d.max_ratio_deviation(),
                max_prefactor_deviation: d.max_prefactor_deviation(),
            })
        }
        _ => None,
    };
    let text = match out.format {
        Format::Json => to_json(&SpectrumJson {
            geometry: (&g).into(),
            nodes,
            noise_floor: spec.noise_floor,
            valid: spec.valid,
            decay_slope: spec.decay_slope,
            branch_rates,
            disk_rate,
            rows,
        }),
        Format::Csv => {
            let mut s = String::from("index,mu_numeric,lambda_analytic,rel_err\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    r.index,
                    num(r.mu_numeric),
                    num(r.lambda_analytic),
                    num(r.rel_err)
                );
            }
            s.push_str(&geometry_comment(&g));
            let _ = writeln!(s, "# nodes,{nodes}");
            let _ = writeln!(s, "# noise_floor,{}", num(spec.noise_floor));
            let _ = writeln!(s, "# valid,{}", spec.valid);
            if let Some(slope) = spec.decay_slope {
                let _ = writeln!(s, "# decay_slope,{}", num(slope));
            }
            let rates: Vec<String> = branch_rates.iter().map(|r| num(*r)).collect();
            let _ = writeln!(s, "# branch_rates,{}", rates.join(","));
            if let Some(d) = &disk_rate {
                let _ = writeln!(
                    s,
                    "# disk_rate,ratio={},rho_hat={},r_squared={},used={},max_ratio_deviation={},max_prefactor_deviation={}",
                    num(d.ratio),
                    num(d.rho_hat),
                    num(d.r_squared),
                    d.used,
                    num(d.max_ratio_deviation),
                    num(d.max_prefactor_deviation)
                );
            }
            s
        }
    };
    emit(&text, out.out.as_ref())?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct MaximizerRow {
    zeta_re: f64,
    zeta_im: f64,
    #[serde(rename = "M_re")]
    m_re: f64,
    #[serde(rename = "M_im")]
    m_im: f64,
    #[serde(rename = "M_abs")]
    m_abs: f64,
}

#[derive(Serialize)]
struct MaximizerJson {
    geometry: GeometrySpec,
    z: [f64; 2],
    eps: f64,
    gamma: f64,
    m_at_z: [f64; 2],
    sup_abs: f64,
    rows: Vec<MaximizerRow>,
}

pub fn maximizer(args: &GeometryArgs, eps: f64, samples: usize, tol: f64, out: &OutputArgs) -> Result<i32> {
    let (g, z) = args.resolve()?;
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidInput(format!("--eps must lie in (0, 0.5] (got {eps})")));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("--samples must be positive".into()));
    }
    let m = closed_maximizer(&g, z, eps, tol)?;
    let rows = m
        .data_curve(samples)
        .into_iter()
        .map(|zeta| {
            let v = m.eval(zeta)?;
            Ok(MaximizerRow {
                zeta_re: zeta.re,
                zeta_im: zeta.im,
                m_re: v.re,
                m_im: v.im,
                m_abs: v.norm(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let at_z = m.value_at_z()?;
    let sup_abs = rows.iter().map(|r| r.m_abs).fold(0.0, f64::max);
    let text = match out.format {
        Format::Json => to_json(&MaximizerJson {
            geometry: (&g).into(),
            z: [z.re, z.im],
            eps,
            gamma: m.gamma(),
            m_at_z: [at_z.re, at_z.im],
            sup_abs,
            rows,
        }),
        Format::Csv => {
            let mut s = String::from("zeta_re,zeta_im,M_re,M_im,M_abs\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    num(r.zeta_re),
                    num(r.zeta_im),
                    num(r.m_re),
                    num(r.m_im),
                    num(r.m_abs)
                );
            }
            s.push_str(&geometry_comment(&g));
            let _ = writeln!(s, "# z,{},{}", num(z.re), num(z.im));
            let _ = writeln!(s, "# eps,{}", num(eps));
            let _ = writeln!(s, "# gamma,{}", num(m.gamma()));
            let _ = writeln!(s, "# M_at_z,{},{}", num(at_z.re), num(at_z.im));
            let _ = writeln!(s, "# sup_abs,{}", num(sup_abs));
            s
        }
    };
    emit(&text, out.out.as_ref())?;
    Ok(EXIT_OK)
}

pub fn verify(
    json: bool,
    sum_rates: &str,
    slope_target: Option<f64>,
    nodes: usize,
    tol: f64,
    out: Option<&PathBuf>,
) -> Result<i32> {
    let ab = parse_floats(sum_rates, 2, "--lemma-a1")?;
    if !(ab[1] > 0.0 && ab[1] < ab[0]) {
        return Err(Error::InvalidInput(format!(
            "--lemma-a1 needs 0 < B < A (got {}, {})",
            ab[0], ab[1]
        )));
    }
    if nodes < 16 || !nodes.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "--nodes must be even and at least 16 (got {nodes})"
        )));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidInput(format!("--tol must be positive (got {tol})")));
    }
    let report = run_suite(&VerifyOptions {
        nodes,
        tol,
        slope_target,
        sum_rates: (ab[0], ab[1]),
    });
    let text = if json { to_json(&report) } else { report.to_text() };
    emit(&text, out)?;
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}
