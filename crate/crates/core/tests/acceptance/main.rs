//! Acceptance criteria as a standalone target: one PASS/FAIL line per criterion,
//! each with its measured value and wall time. Exits non-zero if any criterion fails.

#[path = "../common/mod.rs"]
mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{cosh_profile, dense_from_bands, dense_solve, random_dominant_system, s_star, t_expr, x_expr};
use frontfix::analysis::{default_scales, holder_exponent, MIN_R2};
use frontfix::solver::run;
use frontfix::tridiag::thomas_solve;
use frontfix::verify::{
    compatibility_check, convergence_study, equilibrium_front, make_mms_case, CHECK_CORNER, CHECK_FLUX, CHECK_NEUMANN,
};
use frontfix::{Expr, Forcing, Grid, Parameters, RunStatus, UniformSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    body: fn(&Path) -> Outcome,
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn mms_case() -> frontfix::verify::MmsCase {
    let s_bar = t_expr("1 + 0.3*sin(2*t)");
    let v_bar = Expr::parse("2 + cos(pi*xi)*exp(-t)", &["xi", "t"]).unwrap();
    make_mms_case(&s_bar, &v_bar, &Parameters::new(1.0, 1.0, 1.0, 1.0).unwrap()).unwrap()
}

fn mms_space(_: &Path) -> Outcome {
    let levels: Vec<(usize, f64)> = [32usize, 64, 128].iter().map(|&n| (n, (1.0 / n as f64).powi(2))).collect();
    let table = convergence_study(&mms_case(), &levels).map_err(|e| e.to_string())?;
    let p = table.p_space_last.ok_or("no spatial order fitted")?;
    check(p >= 1.9, format!("p_space (last pair) = {p:.4}, target >= 1.9"))
}

fn mms_time(_: &Path) -> Outcome {
    let levels = [(256, 4e-3), (256, 2e-3), (256, 1e-3)];
    let table = convergence_study(&mms_case(), &levels).map_err(|e| e.to_string())?;
    let p = table.p_time.ok_or("no temporal order fitted")?;
    check(p >= 0.9, format!("p_time = {p:.4}, target >= 0.9"))
}

/// Smooth, compatible data away from equilibrium: f = 2 + 0.1 sin t.
fn smooth_phi_text(s: f64) -> String {
    format!("2*cosh({s:?} - x)/cosh({s:?}) + 0.05*((x - {s:?})^2 - {s:?}^2)")
}

fn identity_monitor(_: &Path) -> Outcome {
    let s = s_star();
    let t_end = 2.0;
    let p = Parameters::new(1.0, 1.0, s, t_end).unwrap();
    let f = t_expr("2 + 0.1*sin(t)");
    let phi = x_expr(&smooth_phi_text(s));
    let mut maxima = Vec::new();
    for (n, dt) in [(64, 2e-3), (128, 1e-3)] {
        let r = run(&p, &Grid::new(n, dt).unwrap(), &f, &phi, &Forcing::none(), &[]).map_err(|e| e.to_string())?;
        if r.status != RunStatus::Completed {
            return Err(format!("run ended with {:?}", r.status));
        }
        let m = r
            .series
            .rows()
            .iter()
            .filter(|row| row.t >= 0.1 * t_end && row.t <= t_end)
            .map(|row| row.identity_residual.abs())
            .fold(0.0, f64::max);
        maxima.push(m);
    }
    let ratio = maxima[0] / maxima[1];
    check(
        ratio >= 1.8,
        format!("max residual {:.3e} -> {:.3e}, ratio {ratio:.3}, target >= 1.8", maxima[0], maxima[1]),
    )
}

fn equilibrium(_: &Path) -> Outcome {
    let s = equilibrium_front(2.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let p = Parameters::new(1.0, 1.0, s, 5.0).unwrap();
    let r = run(&p, &Grid::new(128, 1e-3).unwrap(), &t_expr("2"), &cosh_profile(2.0, 1.0, s), &Forcing::none(), &[])
        .map_err(|e| e.to_string())?;
    let dev = r.series.fronts().iter().map(|x| (x - s).abs()).fold(0.0, f64::max);
    check(
        r.status == RunStatus::Completed && dev <= 5e-3,
        format!("s* = {s:.10}, max |s - s*| = {dev:.3e}, target <= 5e-3"),
    )
}

fn probe_config(f: &str, phi: &str, out: &Path) -> String {
    format!(
        "lambda = 1.0\nsigma = 1.0\nb = {:?}\nt_end = 4.0\nn_xi = 128\ndt = 5e-4\nf_expr = {f:?}\n\
         phi_expr = {phi:?}\nk_max = 4\nthreshold_factor = 10.0\noutput_dir = {:?}\n",
        s_star(),
        out.to_str().unwrap()
    )
}

/// Runs the binary on a config; returns the exit code.
fn frontfix(sub: &str, config: &str, dir: &Path, name: &str) -> Result<i32, String> {
    let path = dir.join(format!("{name}.toml"));
    std::fs::write(&path, config).map_err(|e| e.to_string())?;
    let o = Command::new(env!("CARGO_BIN_EXE_frontfix"))
        .arg(sub)
        .arg("--config")
        .arg(&path)
        .output()
        .map_err(|e| e.to_string())?;
    o.status.code().ok_or_else(|| "terminated by signal".to_string())
}

fn read_report(dir: &Path) -> Result<Value, String> {
    let text = std::fs::read_to_string(dir.join("report.json")).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn detections(report: &Value, k: u64) -> Vec<f64> {
    report["orders"]
        .as_array()
        .into_iter()
        .flatten()
        .filter(|o| o["k"].as_u64() == Some(k))
        .flat_map(|o| o["jumps"].as_array().cloned().unwrap_or_default())
        .filter_map(|j| j["t"].as_f64())
        .collect()
}

fn probe_smooth(tmp: &Path) -> Outcome {
    let out = tmp.join("probe_smooth");
    let code = frontfix("probe", &probe_config("2 + 0.1*sin(t)", &smooth_phi_text(s_star()), &out), tmp, "smooth")?;
    if code != 0 {
        return Err(format!("probe exited {code}"));
    }
    let report = read_report(&out)?;
    let counts: Vec<usize> = (1..=4).map(|k| detections(&report, k).len()).collect();
    check(
        counts.iter().all(|c| *c == 0),
        format!("detections per k = 1..4: {counts:?}, target all zero"),
    )
}

fn probe_rough(tmp: &Path) -> Outcome {
    let out = tmp.join("probe_rough");
    let s = s_star();
    let phi = common::cosh_profile_text(2.0, 1.0, s);
    let code = frontfix("probe", &probe_config("piecewise(2, 2, 2 + 0.5*(t - 2)^2)", &phi, &out), tmp, "rough")?;
    if code != 0 {
        return Err(format!("probe exited {code}"));
    }
    let report = read_report(&out)?;
    let dt = 5e-4;
    let k2 = detections(&report, 2);
    let near: Vec<(u64, f64)> = [3u64, 4]
        .iter()
        .flat_map(|&k| detections(&report, k).into_iter().map(move |t| (k, t)))
        .filter(|(_, t)| (t - 2.0).abs() <= 2.0 * dt)
        .collect();
    let firing: Vec<u64> = report["firing_orders"]
        .as_array()
        .ok_or("report lacks firing_orders")?
        .iter()
        .filter_map(Value::as_u64)
        .collect();
    let recorded = near.iter().all(|(k, _)| firing.contains(k));
    check(
        k2.is_empty() && !near.is_empty() && recorded,
        format!("k = 2 detections {k2:?}; detections near t0 = 2 (k, t): {near:?}; firing orders {firing:?}"),
    )
}

fn holder_calibration(_: &Path) -> Outcome {
    let dt = 1e-4;
    let s = UniformSeries::sample(0.0, dt, 20001, |t| (t - 1.0).abs().powf(1.5)).unwrap();
    let est = holder_exponent(&s, 1, &default_scales(s.len())).map_err(|e| e.to_string())?;
    let (slope, r2) = (est.slope.ok_or("no slope")?, est.fit_r2.ok_or("no fit")?);
    check(
        (slope - 1.5).abs() <= 0.1 && r2 >= MIN_R2,
        format!("slope = {slope:.4} (target 1.5 +- 0.1), r2 = {r2:.5} (target >= {MIN_R2})"),
    )
}

fn tridiagonal(_: &Path) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=200);
        let (lower, diag, upper, rhs) = random_dominant_system(&mut rng, n);
        let x = thomas_solve(&lower, &diag, &upper, &rhs).map_err(|e| e.to_string())?;
        let oracle = dense_solve(dense_from_bands(&lower, &diag, &upper), rhs);
        worst = x.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    check(worst <= 1e-10, format!("max |thomas - dense| = {worst:.3e} over 1000 systems, target <= 1e-10"))
}

fn compatibility(_: &Path) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let sigma = 1.0;
    for _ in 0..20 {
        let c: f64 = rng.gen_range(1.05..5.0);
        let lambda: f64 = rng.gen_range(0.2..4.0);
        let b: f64 = rng.gen_range(0.2..3.0);
        let p = Parameters::new(lambda, sigma, b, 1.0).unwrap();
        let f = Expr::constant(c, &["t"]);
        let rep = compatibility_check(&p, &f, &cosh_profile(c, lambda, b), 1e-6).map_err(|e| e.to_string())?;
        if !rep.overall {
            return Err(format!("equilibrium family failed at c = {c}, lambda = {lambda}, b = {b}: {rep:?}"));
        }
    }
    let p = Parameters::new(1.0, 1.0, 1.0, 1.0).unwrap();
    let violations = [
        ("1", "1", CHECK_FLUX),
        ("2", &common::cosh_profile_text(1.0, 1.0, 1.0)[..], CHECK_CORNER),
        ("1 + 0*t", "1 + x", CHECK_NEUMANN),
    ];
    for (f, phi, expected) in violations {
        let rep = compatibility_check(&p, &t_expr(f), &x_expr(phi), 1e-6).map_err(|e| e.to_string())?;
        let failed: Vec<&str> = rep.failures().map(|c| c.name).collect();
        if !failed.contains(&expected) {
            return Err(format!("f = {f}, phi = {phi}: failures {failed:?} miss {expected:?}"));
        }
    }
    Ok("20 equilibrium cases pass; 3 designed violations name the right condition".into())
}

fn determinism(tmp: &Path) -> Outcome {
    let mut files = Vec::new();
    for name in ["det_a", "det_b"] {
        let out = tmp.join(name);
        let cfg = format!(
            "lambda = 1.0\nsigma = 1.0\nb = {:?}\nt_end = 1.0\nn_xi = 64\ndt = 1e-3\nf_expr = \"2 + 0.1*sin(t)\"\n\
             phi_expr = {:?}\noutput_dir = {:?}\n",
            s_star(),
            smooth_phi_text(s_star()),
            out.to_str().unwrap()
        );
        let code = frontfix("solve", &cfg, tmp, name)?;
        if code != 0 {
            return Err(format!("solve exited {code}"));
        }
        files.push(std::fs::read(out.join("front.csv")).map_err(|e| e.to_string())?);
    }
    check(files[0] == files[1], format!("front.csv {} bytes, identical = {}", files[0].len(), files[0] == files[1]))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "MMS spatial order", limit: Duration::from_secs(30), body: mms_space },
        Criterion { id: 2, name: "MMS temporal order", limit: Duration::from_secs(60), body: mms_time },
        Criterion { id: 3, name: "identity residual refinement", limit: Duration::from_secs(60), body: identity_monitor },
        Criterion { id: 4, name: "equilibrium preservation", limit: Duration::from_secs(20), body: equilibrium },
        Criterion { id: 5, name: "smooth probe", limit: Duration::from_secs(60), body: probe_smooth },
        Criterion { id: 6, name: "rough probe", limit: Duration::from_secs(60), body: probe_rough },
        Criterion { id: 7, name: "Hoelder calibration", limit: Duration::from_secs(5), body: holder_calibration },
        Criterion { id: 8, name: "tridiagonal oracle", limit: Duration::from_secs(5), body: tridiagonal },
        Criterion { id: 9, name: "compatibility checker", limit: Duration::from_secs(5), body: compatibility },
        Criterion { id: 10, name: "determinism", limit: Duration::from_secs(60), body: determinism },
    ];
    let tmp = tempfile::tempdir().expect("temp dir");
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.body)(tmp.path());
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= c.limit => (true, d),
            Ok(d) => (false, format!("{d}; runtime over limit")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {}: {} ({:.2} s, limit {} s)",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
