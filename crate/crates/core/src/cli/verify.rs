//! The invariant suite behind `contstab verify`.

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{ellipse_point_to_annulus, joukowski, Annulus, BernsteinEllipse, Geometry};
use crate::nystrom::{analytic_eigenvalues, build, disk_decay_rate, solve_numeric, spectrum};
use crate::powerlaw::{ratio_spread, sum_asymptotics, sweep};
use crate::spectral::basis_annulus_symmetric;
use crate::tikhonov::{
    basis_exponent, bound, chebyshev_competitor, dual_certificate, exponent, maximizer, solve, solve_in_basis,
};

/// Seed of the randomized checks; fixed so reports are reproducible.
pub const SEED: u64 = 0x5eed_c0de;

const SLOPE_TOL: f64 = 0.02;
const ELLIPSE_SLOPE_TOL: f64 = 0.03;
const ENVELOPE: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub nodes: usize,
    pub tol: f64,
    /// Overrides the expected slope at the default annulus point.
    pub slope_target: Option<f64>,
    /// `(alpha, beta)` of the switchover-index harness.
    pub sum_rates: (f64, f64),
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            nodes: 256,
            tol: 1e-12,
            slope_target: None,
            sum_rates: (2.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!("{tag} {}: {}\n", c.name, c.detail));
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        s.push_str(&format!("{} checks, {failed} failed\n", self.checks.len()));
        s
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

type Outcome = Result<(bool, String)>;

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn maximizer_slope(g: &Geometry, z: Complex64, tol: f64) -> Result<f64> {
    Ok(sweep(
        |eps| maximizer(g, z, eps, tol)?.value_at_z().map(|v| v.norm()),
        1e-8,
        1e-3,
        11,
    )?
    .fitted_slope)
}

fn bound_slope(g: &Geometry, z: Complex64, tol: f64) -> Result<f64> {
    Ok(sweep(|eps| Ok(bound(&solve(g, z, eps, tol)?).bound_value), 1e-8, 1e-3, 11)?.fitted_slope)
}

fn annulus_exponent(o: &VerifyOptions) -> Outcome {
    let g = Geometry::annulus(0.25, 0.5)?;
    let outer = o.slope_target.unwrap_or(0.75f64.ln() / 0.5f64.ln());
    let inner = (0.35f64 / 0.25).ln() / 2f64.ln();
    let mut ok = true;
    let mut detail = Vec::new();
    for (z, target) in [(c(0.75, 0.0), outer), (c(0.35, 0.0), inner)] {
        let m = maximizer_slope(&g, z, o.tol)?;
        let b = bound_slope(&g, z, o.tol)?;
        ok &= within(m, target, SLOPE_TOL) && within(b, target, SLOPE_TOL);
        detail.push(format!(
            "|z|={}: M slope {m:.5}, bound slope {b:.5}, target {target:.5}",
            z.re
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn random_configuration(rng: &mut StdRng) -> Result<(Geometry, Complex64, f64)> {
    let eps = 10f64.powf(rng.gen_range(-8.0..-2.0));
    let arg = rng.gen_range(-3.0..3.0);
    Ok(match rng.gen_range(0..3) {
        0 => {
            let rho = rng.gen_range(0.1..0.4);
            let r = rng.gen_range(rho + 0.1..0.95);
            let t: f64 = rng.gen_range(0.1..0.9);
            let m = if rng.gen_bool(0.5) {
                r + t * (1.0 - r)
            } else {
                rho + t * (r - rho)
            };
            (Geometry::annulus(rho, r)?, Complex64::from_polar(m, arg), eps)
        }
        1 => {
            let r = rng.gen_range(0.2..0.9);
            let x = rng.gen_range(-2.0..2.0);
            let y = rng.gen_range(1.0 + r + 0.2..6.0);
            (Geometry::half_plane(r)?, c(x, y), eps)
        }
        _ => {
            let big_r = rng.gen_range(1.5..4.0);
            let w = Complex64::from_polar(rng.gen_range(1.1..big_r - 0.1), arg);
            (Geometry::ellipse(big_r)?, joukowski(w)?, eps)
        }
    })
}

fn norm_identity(o: &VerifyOptions) -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let (g, z, eps) = random_configuration(&mut rng)?;
        worst = worst.max(solve(&g, z, eps, o.tol)?.identity_defect());
    }
    Ok((
        worst < 1e-10,
        format!("max relative defect {worst:.3e} over 10 configurations"),
    ))
}

fn halfplane_exponent(o: &VerifyOptions) -> Outcome {
    let g = Geometry::half_plane(0.6)?;
    let target = (11.0f64 / 19.0).ln() / (1.0f64 / 3.0).ln();
    let slope = maximizer_slope(&g, c(0.0, 3.0), o.tol)?;
    Ok((
        within(slope, target, SLOPE_TOL),
        format!("slope {slope:.5}, target {target:.5}"),
    ))
}

fn ellipse_exponent(o: &VerifyOptions) -> Outcome {
    let e = BernsteinEllipse::new(2.0)?;
    let g = Geometry::Ellipse(e);
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let target = 1.0 - golden.ln() / 2f64.ln();
    let slope = maximizer_slope(&g, c(0.0, 0.5), o.tol)?;
    let sym = basis_annulus_symmetric(&e.annulus_view())?;
    let mut rng = StdRng::seed_from_u64(SEED ^ 4);
    let mut worst = 0.0f64;
    for _ in 0..16 {
        let w = Complex64::from_polar(rng.gen_range(1.05..1.95), rng.gen_range(0.01..3.13));
        let z = joukowski(w)?;
        let alpha = exponent(&g, z)?.gamma;
        let gamma = basis_exponent(&sym, ellipse_point_to_annulus(z, &e)?).gamma;
        worst = worst.max((alpha - gamma).abs());
    }
    Ok((
        within(slope, target, ELLIPSE_SLOPE_TOL) && worst < 1e-13,
        format!("slope {slope:.5}, target {target:.5}; max |alpha - gamma(z_a)| {worst:.1e} over 16 points"),
    ))
}

fn maximizer_feasibility(o: &VerifyOptions) -> Outcome {
    let g = Geometry::annulus(0.25, 0.5)?;
    let z = c(0.75, 0.0);
    let on_gamma = sweep(|eps| maximizer(&g, z, eps, o.tol)?.norm_gamma(), 1e-8, 1e-3, 11)?;
    let in_h = sweep(|eps| maximizer(&g, z, eps, o.tol)?.norm_h(), 1e-8, 1e-3, 11)?;
    let s_gamma = on_gamma.ratio_spread(1.0);
    let s_h = in_h.ratio_spread(0.0);
    Ok((
        s_gamma < ENVELOPE && s_h < ENVELOPE,
        format!("spread of ||M||_Γ/eps {s_gamma:.3}, of ||M|| {s_h:.3}"),
    ))
}

fn spectrum_agreement(o: &VerifyOptions) -> Outcome {
    let mut worst = Vec::new();
    let mut top = f64::NAN;
    for g in [Geometry::annulus(0.25, 0.5)?, Geometry::half_plane(0.6)?] {
        let op = build(&g, o.nodes)?;
        let spec = spectrum(&op)?;
        let exact = analytic_eigenvalues(&op, 15);
        let err = spec
            .eigenvalues
            .iter()
            .zip(&exact)
            .map(|(mu, l)| (mu - l).abs() / l)
            .fold(0.0, f64::max);
        if let Geometry::Annulus(_) = g {
            top = (spec.eigenvalues[0] - std::f64::consts::PI).abs() / std::f64::consts::PI;
        }
        worst.push(err);
    }
    Ok((
        worst.iter().all(|&e| e < 1e-8) && top < 1e-10,
        format!(
            "annulus top-15 {:.2e}, half-plane top-15 {:.2e}, |mu_1 - pi|/pi {top:.2e}",
            worst[0], worst[1]
        ),
    ))
}

fn disk_rate(o: &VerifyOptions) -> Outcome {
    let op = build(&Geometry::annulus(1e-9, 0.5)?, o.nodes)?;
    let rate = disk_decay_rate(&op, &spectrum(&op)?)?;
    let (dr, dp) = (rate.max_ratio_deviation(), rate.max_prefactor_deviation());
    Ok((
        dr < 1e-6 && dp < 1e-6,
        format!(
            "{} eigenvalues, max ratio deviation {dr:.2e}, max prefactor deviation {dp:.2e}",
            rate.used
        ),
    ))
}

fn numeric_vs_spectral(o: &VerifyOptions) -> Outcome {
    let g = Geometry::annulus(0.25, 0.5)?;
    let z = c(0.75, 0.0);
    let eps = 1e-3;
    let num = solve_numeric(&build(&g, o.nodes)?, z, eps)?;
    let spectral = solve(&g, z, eps, o.tol)?;
    let mut worst = 0.0f64;
    for k in 0..16 {
        let radius = if k % 2 == 0 {
            0.65 + 0.015 * k as f64
        } else {
            0.3 + 0.006 * k as f64
        };
        let zeta = Complex64::from_polar(radius, 0.4 * k as f64);
        let b = spectral.eval(zeta)?;
        worst = worst.max((num.eval(zeta)? - b).norm() / b.norm());
    }
    Ok((
        worst < 1e-6,
        format!("max relative difference {worst:.2e} at 16 points"),
    ))
}

fn dual_certificate_scaling(o: &VerifyOptions) -> Outcome {
    let g = Geometry::annulus(0.25, 0.5)?;
    let s = sweep(
        |eps| Ok(dual_certificate(&g, c(0.75, 0.0), eps, o.tol)?.ratio_eta_eps2),
        1e-7,
        1e-3,
        9,
    )?;
    let spread = s.ratio_spread(0.0);
    Ok((spread < ENVELOPE, format!("max/min of eta*/eps^2 {spread:.3}")))
}

fn sum_harness(o: &VerifyOptions) -> Outcome {
    let (alpha, beta) = o.sum_rates;
    let rep = sum_asymptotics(alpha, beta, 1e-10, 1e-2, 17)?;
    let (e1, e2) = rep.expected_slopes();
    let monotone = rep.switchover_indices.windows(2).all(|w| w[0] <= w[1]);
    Ok((
        within(rep.slope1, e1, SLOPE_TOL) && within(rep.slope2, e2, SLOPE_TOL) && monotone,
        format!(
            "alpha={alpha}, beta={beta}: slopes {:.5} and {:.5}, expected {e1:.5} and {e2:.5}",
            rep.slope1, rep.slope2
        ),
    ))
}

fn symmetric_commutation(o: &VerifyOptions) -> Outcome {
    let a = Annulus::new(0.25, 0.5)?;
    let rho = a.rho();
    let op = build(&Geometry::Annulus(a), 64)?;
    let tests: [fn(Complex64) -> Complex64; 8] = [
        |z| z,
        |z| z.powi(3),
        |z| z.powi(-2),
        |z| z.exp(),
        |z| (2.0 * z).sin() / z,
        |z| 1.0 / (z - 2.0),
        |z| 1.0 / (z - 0.1),
        |z| z.powi(5) + z.powi(-4) * 0.01,
    ];
    let mut worst = 0.0f64;
    for f in tests {
        let values: Vec<Complex64> = op.nodes().iter().map(|&t| f(t)).collect();
        let projected: Vec<Complex64> = op.nodes().iter().map(|&t| 0.5 * (f(t) + f(rho / t))).collect();
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for j in 0..32 {
            let zeta = Complex64::from_polar(a.r(), std::f64::consts::PI * (2 * j + 1) as f64 / 32.0);
            let kp = op.apply(&projected, zeta)?;
            let pk = 0.5 * (op.apply(&values, zeta)? + op.apply(&values, rho / zeta)?);
            num += (kp - pk).norm_sqr();
            den += pk.norm_sqr();
        }
        worst = worst.max((num / den).sqrt());
    }

    let z = c(0.7, 0.2);
    let eps = 1e-3;
    let full = solve(&Geometry::Annulus(a), z, eps, o.tol.min(1e-14))?;
    let sym = solve_in_basis(&basis_annulus_symmetric(&a)?, z, eps, o.tol.min(1e-14))?;
    let mut diff = 0.0f64;
    for k in 0..16 {
        let zeta = Complex64::from_polar(0.3 + 0.04 * k as f64, 0.7 * k as f64);
        let projected = 0.5 * (full.eval(zeta)? + full.eval(rho / zeta)?);
        let direct = sym.eval(zeta)?;
        diff = diff.max((projected - direct).norm() / direct.norm().max(1.0));
    }
    Ok((
        worst < 1e-8 && diff < 1e-10,
        format!("relative commutator {worst:.2e}; P_L u vs symmetric solution {diff:.2e}"),
    ))
}

fn competitor_comparison(_: &VerifyOptions) -> Outcome {
    let g = Geometry::ellipse(2.0)?;
    let z = c(0.0, 0.5);
    let alpha = exponent(&g, z)?.gamma;
    let s = sweep(|eps| Ok(chebyshev_competitor(z, eps, 2.0)?.norm()), 1e-8, 1e-3, 11)?;
    Ok((
        within(s.fitted_slope, alpha, ELLIPSE_SLOPE_TOL),
        format!("slope of |g(z)| {:.5}, alpha(z) {alpha:.5}", s.fitted_slope),
    ))
}

fn ratio_boundedness(o: &VerifyOptions) -> Outcome {
    let g = Geometry::annulus(0.25, 0.5)?;
    let z = c(0.75, 0.0);
    let gamma = exponent(&g, z)?.gamma;
    let s = sweep(|eps| Ok(bound(&solve(&g, z, eps, o.tol)?).bound_value), 1e-8, 1e-3, 11)?;
    let u = sweep(|eps| Ok(solve(&g, z, eps, o.tol)?.value_at_z), 1e-8, 1e-3, 11)?;
    let spread_b = s.ratio_spread(gamma);
    let spread_u = ratio_spread(&u.eps_grid, &u.values, 2.0 * gamma - 2.0);
    let slope_ok = (u.fitted_slope - (2.0 * gamma - 2.0)).abs() < 0.03;
    Ok((
        spread_b < ENVELOPE && spread_u < ENVELOPE && slope_ok,
        format!(
            "bound/eps^gamma spread {spread_b:.3}; u(z) slope {:.5} (target {:.5}), spread {spread_u:.3}",
            u.fitted_slope,
            2.0 * gamma - 2.0
        ),
    ))
}

type CheckFn = fn(&VerifyOptions) -> Outcome;

const CHECKS: [(&str, CheckFn); 12] = [
    ("annulus_exponent", annulus_exponent),
    ("norm_identity", norm_identity),
    ("halfplane_exponent", halfplane_exponent),
    ("ellipse_exponent", ellipse_exponent),
    ("maximizer_feasibility", maximizer_feasibility),
    ("spectrum_agreement", spectrum_agreement),
    ("disk_decay_rate", disk_rate),
    ("numeric_vs_spectral", numeric_vs_spectral),
    ("dual_certificate", dual_certificate_scaling),
    ("sum_asymptotics", sum_harness),
    ("symmetric_commutation", symmetric_commutation),
    ("chebyshev_competitor", competitor_comparison),
];

pub fn run_suite(options: &VerifyOptions) -> VerifyReport {
    let mut checks: Vec<Check> = CHECKS
        .iter()
        .map(|(name, f)| {
            let (passed, detail) = f(options).unwrap_or_else(|e| (false, format!("error: {e}")));
            Check {
                name: name.to_string(),
                passed,
                detail,
            }
        })
        .collect();
    let (passed, detail) = ratio_boundedness(options).unwrap_or_else(|e| (false, format!("error: {e}")));
    checks.push(Check {
        name: "ratio_boundedness".into(),
        passed,
        detail,
    });
    VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
