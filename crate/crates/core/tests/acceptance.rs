//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Oracles here are written out independently of the library: closed-form
//! exponents and eigenvalues, trapezoid quadrature of boundary norms,
//! a local least-squares fit, direct summation of the model sums and the
//! Chebyshev polynomial through `(w^K + w^-K) / 2`.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use contstab::geometry::{ellipse_point_to_annulus, joukowski, Annulus, BernsteinEllipse, Geometry};
use contstab::nystrom::{build, disk_decay_rate, solve_numeric, spectrum};
use contstab::powerlaw::sum_asymptotics;
use contstab::spectral::basis_annulus_symmetric;
use contstab::tikhonov::{
    basis_exponent, bound, chebyshev_competitor, dual_certificate, exponent, maximizer, solve, solve_in_basis,
};
use contstab::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn lib<T>(r: contstab::Result<T>) -> Result<T, String> {
    r.map_err(|e| format!("library error: {e}"))
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// `eps_k = hi (lo/hi)^{k/(n-1)}`.
fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| hi * (lo / hi).powf(k as f64 / (n - 1) as f64)).collect()
}

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::MIN, f64::max);
    let min = v.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

/// `∫_{|ζ - center| = radius} |f|^2 |dζ|` by the trapezoid rule.
fn circle_norm2(f: impl Fn(Complex64) -> Complex64, center: Complex64, radius: f64, m: usize) -> f64 {
    let h = 2.0 * PI / m as f64;
    (0..m)
        .map(|j| f(center + Complex64::from_polar(radius, h * j as f64)).norm_sqr())
        .sum::<f64>()
        * h
        * radius
}

/// Exterior root of `J(w) = z`.
fn outer_root(z: Complex64) -> Complex64 {
    let s = (z * z - 1.0).sqrt();
    let w = z + s;
    if w.norm() >= 1.0 {
        w
    } else {
        z - s
    }
}

fn m_at_z_values(g: &Geometry, z: Complex64, eps: &[f64]) -> Result<Vec<f64>, String> {
    eps.iter()
        .map(|&e| lib(lib(maximizer(g, z, e, 1e-12))?.value_at_z()).map(|v| v.norm()))
        .collect()
}

fn bound_values(g: &Geometry, z: Complex64, eps: &[f64]) -> Result<Vec<f64>, String> {
    eps.iter()
        .map(|&e| lib(solve(g, z, e, 1e-12)).map(|s| bound(&s).bound_value))
        .collect()
}

fn annulus_exponent() -> Outcome {
    let g = lib(Geometry::annulus(0.25, 0.5))?;
    let eps = grid(1e-8, 1e-3, 11);
    let mut ok = true;
    let mut detail = Vec::new();
    for (m, target) in [
        (0.75, 0.75f64.ln() / 0.5f64.ln()),
        (0.35, (0.35f64 / 0.25).ln() / 2f64.ln()),
    ] {
        let z = c(m, 0.0);
        let sm = loglog_slope(&eps, &m_at_z_values(&g, z, &eps)?);
        let sb = loglog_slope(&eps, &bound_values(&g, z, &eps)?);
        ok &= (sm - target).abs() < 0.02 && (sb - target).abs() < 0.02;
        detail.push(format!("|z|={m}: |M(z)| {sm:.5}, bound {sb:.5}, oracle {target:.5}"));
    }
    check(ok, detail.join("; "))
}

fn norm_identity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(20);
    let mut worst_lib = 0.0f64;
    let mut worst_quad = 0.0f64;
    for _ in 0..10 {
        let eps = 10f64.powf(rng.gen_range(-5.0..-2.0));
        let arg = rng.gen_range(-3.0..3.0);
        let (g, z) = match rng.gen_range(0..3) {
            0 => {
                let rho = rng.gen_range(0.1..0.35);
                let r = rng.gen_range(rho + 0.15..0.85);
                let m = if rng.gen_bool(0.5) {
                    rng.gen_range(r + 0.05..0.97)
                } else {
                    rng.gen_range(rho + 0.03..r - 0.05)
                };
                (lib(Geometry::annulus(rho, r))?, Complex64::from_polar(m, arg))
            }
            1 => {
                let r = rng.gen_range(0.3..0.8);
                (
                    lib(Geometry::half_plane(r))?,
                    c(rng.gen_range(-1.5..1.5), rng.gen_range(1.0 + r + 0.3..5.0)),
                )
            }
            _ => {
                let big_r = rng.gen_range(1.8..3.5);
                let w = Complex64::from_polar(rng.gen_range(1.1..big_r - 0.2), arg);
                (lib(Geometry::ellipse(big_r))?, lib(joukowski(w))?)
            }
        };
        let sol = lib(solve(&g, z, eps, 1e-14))?;
        let u = sol.value_at_z;
        let lib_defect = (u - sol.norm_gamma.powi(2) - eps * eps * sol.norm_h.powi(2)).abs() / u;
        let (center, radius) = sol.basis.data_circle();
        let quad = circle_norm2(|t| sol.eval(t).unwrap_or(c(f64::NAN, 0.0)), center, radius, 4096);
        let quad_defect = (u - quad - eps * eps * sol.norm_h.powi(2)).abs() / u;
        worst_lib = worst_lib.max(lib_defect);
        worst_quad = worst_quad.max(quad_defect);
    }
    check(
        worst_lib < 1e-10 && worst_quad < 1e-10,
        format!("max defect {worst_lib:.2e} (series norms), {worst_quad:.2e} (quadrature of |u|^2 on Γ)"),
    )
}

fn halfplane_exponent() -> Outcome {
    let g = lib(Geometry::half_plane(0.6))?;
    let eps = grid(1e-8, 1e-3, 11);
    let target = (11.0f64 / 19.0).ln() / (1.0f64 / 3.0).ln();
    let s = loglog_slope(&eps, &m_at_z_values(&g, c(0.0, 3.0), &eps)?);
    check((s - target).abs() < 0.02, format!("slope {s:.5}, oracle {target:.5}"))
}

fn ellipse_exponent() -> Outcome {
    let e = lib(BernsteinEllipse::new(2.0))?;
    let g = Geometry::Ellipse(e);
    let eps = grid(1e-8, 1e-3, 11);
    let target = 1.0 - ((1.0 + 5f64.sqrt()) / 2.0).ln() / 2f64.ln();
    let s = loglog_slope(&eps, &m_at_z_values(&g, c(0.0, 0.5), &eps)?);
    let sym = lib(basis_annulus_symmetric(&e.annulus_view()))?;
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut tested = 0;
    while tested < 16 {
        let z = c(rng.gen_range(-1.2..1.2), rng.gen_range(-0.7..0.7));
        let w = outer_root(z);
        if w.norm() >= 1.95 || w.norm() <= 1.02 {
            continue;
        }
        tested += 1;
        let alpha_oracle = 1.0 - w.norm().ln() / 2f64.ln();
        let alpha = lib(exponent(&g, z))?.gamma;
        let gamma = basis_exponent(&sym, lib(ellipse_point_to_annulus(z, &e))?).gamma;
        worst = worst.max((alpha - gamma).abs()).max((alpha - alpha_oracle).abs());
    }
    check(
        (s - target).abs() < 0.03 && worst < 1e-13,
        format!("slope {s:.5}, oracle {target:.5}; max |alpha - gamma(z_a)| {worst:.1e} over 16 points"),
    )
}

fn maximizer_feasibility() -> Outcome {
    let g = lib(Geometry::annulus(0.25, 0.5))?;
    let z = c(0.75, 0.0);
    let mut on_gamma = Vec::new();
    let mut in_h = Vec::new();
    let mut quad_gap = 0.0f64;
    for e in grid(1e-8, 1e-3, 11) {
        let m = lib(maximizer(&g, z, e, 1e-12))?;
        let ng = lib(m.norm_gamma())?;
        let quad = circle_norm2(|t| m.eval(t).unwrap_or(c(f64::NAN, 0.0)), c(0.0, 0.0), 0.5, 2048).sqrt();
        quad_gap = quad_gap.max((quad - ng).abs() / ng);
        on_gamma.push(ng / e);
        in_h.push(lib(m.norm_h())?);
    }
    let (sg, sh) = (spread(&on_gamma), spread(&in_h));
    check(
        sg < 10.0 && sh < 10.0 && quad_gap < 1e-8,
        format!("max/min ||M||_Γ/eps {sg:.4}, ||M|| {sh:.4}; quadrature vs series {quad_gap:.1e}"),
    )
}

fn spectrum_agreement() -> Outcome {
    let (rho, r) = (0.25f64, 0.5f64);
    let mut annulus: Vec<f64> = (0..40)
        .flat_map(|n| {
            let pos = 2.0 * PI * r * r.powi(2 * n);
            let neg = 2.0 * PI * r * (rho / r).powi(2 * n);
            if n == 0 {
                vec![pos]
            } else {
                vec![pos, neg]
            }
        })
        .collect();
    annulus.sort_by(|a, b| b.total_cmp(a));
    let half: Vec<f64> = (0..15).map(|n| 9f64.powi(-n) / 3.0).collect();
    let a = lib(spectrum(&lib(build(&lib(Geometry::annulus(rho, r))?, 256))?))?;
    let h = lib(spectrum(&lib(build(&lib(Geometry::half_plane(0.6))?, 256))?))?;
    let err = |mu: &[f64], ex: &[f64]| {
        mu.iter()
            .zip(ex)
            .take(15)
            .map(|(m, l)| (m - l).abs() / l)
            .fold(0.0, f64::max)
    };
    let (ea, eh) = (err(&a.eigenvalues, &annulus), err(&h.eigenvalues, &half));
    let top = (a.eigenvalues[0] - PI).abs() / PI;
    check(
        ea < 1e-8 && eh < 1e-8 && top < 1e-10,
        format!("top-15 rel err annulus {ea:.2e}, half-plane {eh:.2e}; |mu_1 - pi|/pi {top:.1e}"),
    )
}

fn disk_rate() -> Outcome {
    let op = lib(build(&lib(Geometry::annulus(1e-9, 0.5))?, 256))?;
    let spec = lib(spectrum(&op))?;
    let mu = spec.valid_eigenvalues();
    let ratio = mu.windows(2).map(|w| (w[1] / w[0] - 0.25).abs()).fold(0.0, f64::max);
    let pref = mu
        .iter()
        .enumerate()
        .map(|(n, m)| (m / 0.5f64.powi(2 * n as i32 + 1) - 2.0 * PI).abs())
        .fold(0.0, f64::max);
    let fitted = lib(disk_decay_rate(&op, &spec))?;
    check(
        mu.len() >= 5 && ratio < 1e-6 && pref < 1e-6 && (fitted.ratio - 0.25).abs() < 1e-6,
        format!(
            "{} eigenvalues, max |ratio - 0.25| {ratio:.1e}, max |prefactor - 2pi| {pref:.1e}",
            mu.len()
        ),
    )
}

fn numeric_vs_spectral() -> Outcome {
    let g = lib(Geometry::annulus(0.25, 0.5))?;
    let z = c(0.75, 0.0);
    let num = lib(solve_numeric(&lib(build(&g, 256))?, z, 1e-3))?;
    let spec = lib(solve(&g, z, 1e-3, 1e-14))?;
    let mut worst = 0.0f64;
    for k in 0..16 {
        let m = 0.28 + 0.66 * k as f64 / 15.0;
        let zeta = Complex64::from_polar(m, 0.37 + 0.9 * k as f64);
        let b = lib(spec.eval(zeta))?;
        worst = worst.max((lib(num.eval(zeta))? - b).norm() / b.norm());
    }
    check(worst < 1e-6, format!("max rel diff {worst:.2e} at 16 interior points"))
}

fn dual_certificate_scaling() -> Outcome {
    let g = lib(Geometry::annulus(0.25, 0.5))?;
    let mut ratios = Vec::new();
    let mut root = 0.0f64;
    for e in grid(1e-7, 1e-3, 9) {
        let d = lib(dual_certificate(&g, c(0.75, 0.0), e, 1e-12))?;
        root = root.max((d.phi_at_eta_star - e * e).abs() / (e * e));
        ratios.push(d.eta_star / (e * e));
    }
    let s = spread(&ratios);
    check(
        s < 10.0 && root < 1e-8,
        format!("max/min eta*/eps^2 {s:.4}; root residual {root:.1e}"),
    )
}

fn model_sums() -> Outcome {
    let rep = lib(sum_asymptotics(2.0, 1.0, 1e-10, 1e-2, 17))?;
    let direct = |eta: f64| {
        let (mut s1, mut s2) = (0.0, 0.0);
        for n in 1..2000 {
            let a = (-2.0 * n as f64).exp();
            let b = (-(n as f64)).exp();
            s1 += b / (a + eta);
            s2 += b / ((a + eta) * (a + eta));
        }
        (s1, s2)
    };
    let mut gap = 0.0f64;
    for (k, &eta) in rep.eta_grid.iter().enumerate() {
        let (s1, s2) = direct(eta);
        gap = gap
            .max((rep.sum1_values[k] - s1).abs() / s1)
            .max((rep.sum2_values[k] - s2).abs() / s2);
    }
    let s1 = loglog_slope(&rep.eta_grid, &rep.sum1_values);
    let s2 = loglog_slope(&rep.eta_grid, &rep.sum2_values);
    check(
        (s1 + 0.5).abs() < 0.02 && (s2 + 1.5).abs() < 0.02 && gap < 1e-12,
        format!("slopes {s1:.5}, {s2:.5}; sums vs direct {gap:.1e}"),
    )
}

fn symmetric_commutation() -> Outcome {
    let a = lib(Annulus::new(0.25, 0.5))?;
    let rho = a.rho();
    let op = lib(build(&Geometry::Annulus(a), 64))?;
    let fs: [fn(Complex64) -> Complex64; 6] = [
        |z| z * z,
        |z| z.powi(-3),
        |z| z.cos(),
        |z| 1.0 / (z - 1.5),
        |z| 1.0 / (z - c(0.0, 0.15)),
        |z| (z + 2.0).ln(),
    ];
    let mut worst = 0.0f64;
    for f in fs {
        let v: Vec<Complex64> = op.nodes().iter().map(|&t| f(t)).collect();
        let pv: Vec<Complex64> = op.nodes().iter().map(|&t| 0.5 * (f(t) + f(rho / t))).collect();
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..32 {
            let zeta = Complex64::from_polar(0.5, 2.0 * PI * (j as f64 + 0.25) / 32.0);
            let kp = lib(op.apply(&pv, zeta))?;
            let pk = 0.5 * (lib(op.apply(&v, zeta))? + lib(op.apply(&v, rho / zeta))?);
            num += (kp - pk).norm_sqr();
            den += pk.norm_sqr();
        }
        worst = worst.max((num / den).sqrt());
    }
    let z = c(-0.4, 0.45);
    let full = lib(solve(&Geometry::Annulus(a), z, 1e-3, 1e-15))?;
    let sym = lib(solve_in_basis(&lib(basis_annulus_symmetric(&a))?, z, 1e-3, 1e-15))?;
    let mut diff = 0.0f64;
    for k in 0..16 {
        let zeta = Complex64::from_polar(0.27 + 0.045 * k as f64, 1.3 * k as f64);
        let p = 0.5 * (lib(full.eval(zeta))? + lib(full.eval(rho / zeta))?);
        let d = lib(sym.eval(zeta))?;
        diff = diff.max((p - d).norm() / d.norm().max(1.0));
    }
    check(
        worst < 1e-8 && diff < 1e-10,
        format!("commutator {worst:.1e}; P_L u vs symmetric solve {diff:.1e}"),
    )
}

fn chebyshev_comparison() -> Outcome {
    let z = c(0.0, 0.5);
    let w = outer_root(z);
    let eps = grid(1e-8, 1e-3, 11);
    let mut values = Vec::new();
    let mut gap = 0.0f64;
    for &e in &eps {
        let k = ((1.0 / e).ln() / 2f64.ln() + 1e-12).floor() as i32;
        let oracle = e * 0.5 * (w.powi(k) + w.powi(-k));
        let g = lib(chebyshev_competitor(z, e, 2.0))?;
        gap = gap.max((g - oracle).norm() / oracle.norm());
        values.push(g.norm());
    }
    let alpha = 1.0 - w.norm().ln() / 2f64.ln();
    let s = loglog_slope(&eps, &values);
    check(
        (s - alpha).abs() < 0.03 && gap < 1e-12,
        format!("slope {s:.5}, alpha(z) {alpha:.5}; T_K vs (w^K + w^-K)/2 {gap:.1e}"),
    )
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_contstab");
    let run = |args: &[&str]| Command::new(bin).args(args).output().map_err(|e| e.to_string());
    let a = run(&["sweep"])?;
    let b = run(&["sweep"])?;
    let j1 = run(&["sweep", "--format", "json", "--halfplane", "0.6"])?;
    let j2 = run(&["sweep", "--format", "json", "--halfplane", "0.6"])?;
    let v = run(&["verify"])?;
    let identical = a.stdout == b.stdout && j1.stdout == j2.stdout && !a.stdout.is_empty();
    let code = v.status.code();
    check(
        identical && a.status.success() && code == Some(0),
        format!("sweep outputs identical: {identical}; verify exit code {code:?}"),
    )
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("01 annulus exponent", annulus_exponent),
        ("02 norm identity", norm_identity),
        ("03 half-plane exponent", halfplane_exponent),
        ("04 ellipse exponent", ellipse_exponent),
        ("05 maximizer feasibility", maximizer_feasibility),
        ("06 spectrum agreement", spectrum_agreement),
        ("07 disk decay rate", disk_rate),
        ("08 numerical vs spectral solve", numeric_vs_spectral),
        ("09 dual certificate", dual_certificate_scaling),
        ("10 sum asymptotics", model_sums),
        ("11 symmetric-subspace commutation", symmetric_commutation),
        ("12 Chebyshev competitor", chebyshev_comparison),
        ("13 CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {name}: {d} [{secs:.2}s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name}: {d} [{secs:.2}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 13 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
