use std::process::{Command, Output};

fn contstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contstab"))
        .args(args)
        .env_remove("CONTSTAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(line: &str, k: usize) -> f64 {
    line.split(',').nth(k).unwrap().parse().unwrap()
}

#[test]
fn exponent_examples() {
    let o = contstab(&["exponent", "--annulus", "0.25,0.5", "--z", "0.75,0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    assert!((field(row, 3) - 0.75f64.ln() / 0.5f64.ln()).abs() < 1e-15);

    let o = contstab(&["exponent", "--halfplane", "0.6", "--z", "0,1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["gamma"], 1.0);
    assert_eq!(v["stable_region"], true);
    assert_eq!(v["geometry"]["kind"], "halfplane");
    assert_eq!(v["z"], serde_json::json!([0.0, 1.0]));

    let o = contstab(&["exponent", "--ellipse", "2", "--z", "0,0.5", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["gamma"].as_f64().unwrap() - 0.3058).abs() < 1e-4);
}

#[test]
fn sweep_csv_contract() {
    let o = contstab(&["sweep"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("eps,bound,M_at_z,u_at_z,norm_H,norm_Gamma,eta_star_ratio")
    );
    let rows: Vec<&str> = text.lines().skip(1).filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 11);
    for r in &rows {
        let cols: Vec<&str> = r.split(',').collect();
        assert_eq!(cols.len(), 7);
        // 17 significant digits: one leading digit and 16 decimals
        let mantissa = cols[1].split('e').next().unwrap();
        assert_eq!(mantissa.len(), 18, "{}", cols[1]);
    }

    // the footer slope of the bound column matches an offline refit
    let eps: Vec<f64> = rows.iter().map(|r| field(r, 0)).collect();
    let bound: Vec<f64> = rows.iter().map(|r| field(r, 1)).collect();
    let fit = contstab::powerlaw::fit_power_law(&eps, &bound).unwrap();
    let footer = text.lines().find(|l| l.starts_with("# fit,bound,")).unwrap();
    assert_eq!(footer.split(',').nth(2).unwrap(), format!("{:.16e}", fit.fit.slope));
}

#[test]
fn sweep_json_and_out_file() {
    let dir = std::env::temp_dir().join(format!("contstab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sweep.json");
    let o = contstab(&[
        "sweep",
        "--halfplane",
        "0.6",
        "--eps-range",
        "1e-6,1e-3,7",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 7);
    assert!(v["rows"][0]["M_at_z"].as_f64().unwrap() > 0.0);
    assert!(v["error"].is_null());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn thread_cap_does_not_change_output() {
    let a = contstab(&["sweep", "--ellipse", "2"]);
    let b = Command::new(env!("CARGO_BIN_EXE_contstab"))
        .args(["sweep", "--ellipse", "2"])
        .env("CONTSTAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn spectrum_rows() {
    let o = contstab(&["spectrum", "--count", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("index,mu_numeric,lambda_analytic,rel_err\n"));
    let row0 = text.lines().nth(1).unwrap();
    assert!((field(row0, 1) - std::f64::consts::PI).abs() < 1e-10 * std::f64::consts::PI);
    assert!(field(row0, 3) < 1e-10);

    let o = contstab(&["spectrum", "--annulus", "1e-9,0.5", "--count", "2"]);
    assert!(stdout(&o).contains("# disk_rate,ratio=2.5"));

    assert_eq!(contstab(&["spectrum", "--nodes", "31"]).status.code(), Some(2));
}

#[test]
fn maximizer_table() {
    let o = contstab(&["maximizer", "--ellipse", "2", "--eps", "1e-5", "--samples", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 9);
    for r in rows {
        assert_eq!(field(r, 1), 0.0, "data curve of the ellipse is [-1, 1]");
        assert!(field(r, 4) < 10.0 * 1e-5);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(contstab(&["exponent", "--annulus", "0.5,0.25"]).status.code(), Some(2));
    assert_eq!(
        contstab(&["exponent", "--annulus", "0.25,0.5", "--z", "2,0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        contstab(&["exponent", "--halfplane", "0.6", "--z", "0,-1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        contstab(&["sweep", "--eps-range", "1e-3,1e-8,11"]).status.code(),
        Some(2)
    );
    assert_eq!(
        contstab(&["sweep", "--annulus", "0.25,0.5", "--ellipse", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(contstab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(contstab(&["--help"]).status.code(), Some(0));
    let o = contstab(&["exponent", "--annulus", "0.5,0.25"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("rho < r"));
}

#[test]
fn verify_negative_control_and_json() {
    let o = contstab(&["verify", "--slope-target", "0.9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL annulus_exponent"));

    let o = contstab(&["verify", "--json", "--lemma-a1", "3,1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 13);
    let lemma = checks.iter().find(|c| c["name"] == "sum_asymptotics").unwrap();
    assert!(lemma["detail"].as_str().unwrap().contains("alpha=3"));

    assert_eq!(contstab(&["verify", "--lemma-a1", "1,2"]).status.code(), Some(2));
}
