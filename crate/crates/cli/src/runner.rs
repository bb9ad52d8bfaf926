//! Experiment orchestration and report emission.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use sdde::analysis::{certify, node_sequence, StabilityCertificate};
use sdde::error::{Error, Result};
use sdde::integrator::{check_solvable, simulate, wiener_increments, Grid};
use sdde::montecarlo::{
    asymptotic_envelope, check_bound, estimate_ms_deviation, strong_error_slope, MsDeviationSeries,
};
use sdde::model::TimeWindow;

use crate::config::ExperimentConfig;
use crate::registry::{build_problem, BuiltProblem};

/// 17 significant digits: round-trip exact for f64, so emitted files are
/// byte-identical across runs.
fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Parameter(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| Error::Parameter(format!("cannot write {}: {e}", path.display())))
}

fn certificate_text(cfg: &ExperimentConfig, cert: &StabilityCertificate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "problem = {}", cfg.problem_name);
    let _ = writeln!(s, "c = {}", fmt_f64(cert.c));
    let _ = writeln!(s, "sigma = {}", fmt_f64(cert.sigma));
    let _ = writeln!(s, "rho = {}", fmt_f64(cert.rho));
    let _ = writeln!(s, "alpha0 = {}", fmt_f64(cert.alpha0));
    match cert.nu {
        Some(nu) => {
            let _ = writeln!(s, "nu = {}", fmt_f64(nu));
        }
        None => {
            let _ = writeln!(s, "nu = undefined");
        }
    }
    let _ = writeln!(s, "classification = {}", cert.classification.as_str());
    let _ = writeln!(s, "stable_in_mean_square = {}", cert.stable_in_mean_square());
    let _ = writeln!(s, "contractive_in_mean_square = {}", cert.contractive());
    let _ = writeln!(
        s,
        "asymptotically_contractive_in_mean_square = {}",
        cert.asymptotically_contractive()
    );
    let _ = writeln!(s, "mu = {}", fmt_f64(cert.mu));
    match cert.c_mu {
        Some(c_mu) => {
            let _ = writeln!(s, "C_mu = {}", fmt_f64(c_mu));
        }
        None => {
            let _ = writeln!(s, "C_mu = undefined");
        }
    }
    let _ = writeln!(s, "h_max = {}", fmt_f64(cert.h_max));
    for d in &cert.stepsizes {
        let _ = writeln!(s, "h = {}", fmt_f64(d.h));
        let _ = writeln!(s, "c1 = {}", fmt_f64(d.c1));
        let _ = writeln!(s, "c_tilde = {}", fmt_f64(d.c_tilde));
        let _ = writeln!(s, "c2 = {}", fmt_f64(d.c2));
        let _ = writeln!(s, "solvable = {}", d.solvable);
    }
    s
}

fn build_certificate(cfg: &ExperimentConfig, built: &BuiltProblem) -> Result<StabilityCertificate> {
    certify(&built.spec.coeffs, cfg.c0, cfg.mu, &[cfg.h()])
}

/// `certify <config>`: derived constants, classification and admissible
/// stepsizes, printed and written as `certificate.txt`. When the per-h
/// constants do not exist at the configured stepsize, the certificate is
/// still emitted without them.
pub fn run_certify(cfg: &ExperimentConfig) -> Result<()> {
    let built = build_problem(cfg)?;
    let cert = match build_certificate(cfg, &built) {
        Ok(cert) => cert,
        Err(Error::Stepsize { h, reason }) => {
            println!("note: no per-stepsize constants at h = {h}: {reason}");
            certify(&built.spec.coeffs, cfg.c0, cfg.mu, &[])?
        }
        Err(e) => return Err(e),
    };
    let text = certificate_text(cfg, &cert);
    write_file(&cfg.out_dir, "certificate.txt", &text)?;
    print!("{text}");
    let h = cfg.h();
    if h > cert.h_max {
        println!(
            "note: configured h = {h} exceeds h_max = {}; deviation runs will be rejected",
            cert.h_max
        );
    }
    Ok(())
}

/// `simulate <config>`: one trajectory under path index 0, written as
/// `trajectory.csv`.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<()> {
    let built = build_problem(cfg)?;
    let grid = Grid::new(cfg.grid_a, cfg.grid_b, cfg.grid_n)?;
    let path = wiener_increments(cfg.seed, 0, &grid, built.spec.wiener_dimension);
    let traj = simulate(&built.spec, &grid, &path)?;

    let d = built.spec.dimension;
    let mut csv = String::from("n,t");
    for k in 0..d {
        let _ = write!(csv, ",x{k}_re,x{k}_im");
    }
    csv.push('\n');
    for n in 0..traj.len() {
        let _ = write!(csv, "{n},{}", fmt_f64(grid.node(n)));
        for k in 0..d {
            let z = traj.node_state(n).entry(k);
            let _ = write!(csv, ",{},{}", fmt_f64(z.re), fmt_f64(z.im));
        }
        csv.push('\n');
    }
    write_file(&cfg.out_dir, "trajectory.csv", &csv)?;
    println!(
        "wrote {} nodes to {}",
        traj.len(),
        cfg.out_dir.join("trajectory.csv").display()
    );
    Ok(())
}

fn deviation_csv(series: &MsDeviationSeries) -> String {
    let mut csv = String::from("n,t,estimate,stderr,envelope,violated\n");
    for n in 0..series.len() {
        let _ = writeln!(
            csv,
            "{n},{},{},{},{},{}",
            fmt_f64(series.times[n]),
            fmt_f64(series.estimates[n]),
            fmt_f64(series.stderrs[n]),
            fmt_f64(series.envelopes[n]),
            u8::from(series.violated[n]),
        );
    }
    csv
}

/// `deviation <config>`: certificate, coupled Monte Carlo deviation series,
/// envelope check. Writes `deviation.csv`, `certificate.txt`, `summary.txt`;
/// returns the number of envelope violations (exit status 0 iff zero).
pub fn run_deviation(cfg: &ExperimentConfig) -> Result<usize> {
    let start = Instant::now();
    let built = build_problem(cfg)?;
    let grid = Grid::new(cfg.grid_a, cfg.grid_b, cfg.grid_n)?;
    // reject an unsteppable configuration before anything else
    check_solvable(&built.spec, grid.h())?;
    let cert = build_certificate(cfg, &built)?;
    write_file(&cfg.out_dir, "certificate.txt", &certificate_text(cfg, &cert))?;
    let series = estimate_ms_deviation(
        &built.spec,
        &built.xi,
        &built.eta,
        &grid,
        cfg.paths,
        cfg.seed,
        cfg.slack,
        cfg.c0,
    )?;
    write_file(&cfg.out_dir, "deviation.csv", &deviation_csv(&series))?;

    let report = check_bound(&series, cfg.slack);

    // blockwise decay report when certified
    let mut block_lines = String::new();
    if cert.asymptotically_contractive() {
        if let Some(d) = cert.stepsizes.first() {
            // each block advances at least one node, so N blocks always fit
            if let Ok(seq) = node_sequence(&built.spec.delays[0], &grid, grid.steps()) {
                let blocks = asymptotic_envelope(&series, &seq, d.c2, series.d0, cfg.slack)?;
                let _ = writeln!(block_lines, "blocks = {}", blocks.blocks.len());
                let _ = writeln!(block_lines, "block_violations = {}", blocks.violations);
            }
        }
    }

    let mut summary = String::new();
    let _ = writeln!(summary, "problem = {}", cfg.problem_name);
    let _ = writeln!(summary, "h = {}", fmt_f64(series.h));
    let _ = writeln!(summary, "paths = {}", series.paths);
    let _ = writeln!(summary, "seed = {}", series.master_seed);
    let _ = writeln!(summary, "slack_sigmas = {}", fmt_f64(cfg.slack));
    let _ = writeln!(summary, "d0 = {}", fmt_f64(series.d0));
    let _ = writeln!(summary, "violations = {}", report.violations);
    let _ = writeln!(summary, "worst_margin = {}", fmt_f64(report.worst_margin));
    summary.push_str(&block_lines);
    let _ = writeln!(
        summary,
        "runtime_seconds = {:.3}",
        start.elapsed().as_secs_f64()
    );
    write_file(&cfg.out_dir, "summary.txt", &summary)?;

    println!(
        "deviation: {} nodes, {} paths, {} violations (worst margin {})",
        series.len(),
        series.paths,
        report.violations,
        fmt_f64(report.worst_margin)
    );
    Ok(report.violations)
}

/// `order <config>`: strong-order measurement on the delay-free linear
/// family; writes `order.csv` and prints the fitted slope.
pub fn run_order(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.problem_name != "pure_sde" {
        return Err(Error::Parameter(format!(
            "order measures the delay-free linear family; set problem.name = pure_sde \
             (got `{}`)",
            cfg.problem_name
        )));
    }
    let built = build_problem(cfg)?;
    let window = TimeWindow::new(cfg.grid_a, cfg.grid_b)?;
    let a1 = cfg.problem_params.get("A1").copied().unwrap_or(0.0);
    let b1 = cfg.problem_params.get("B1").copied().unwrap_or(0.0);
    let x0 = built.xi.eval(window.a)?.entry(0).re;
    let h_list: Vec<f64> = (cfg.order_exp_min..=cfg.order_exp_max)
        .map(|k| window.length() / f64::from(1u32 << k))
        .collect();
    let fit = strong_error_slope(a1, b1, x0, window, &h_list, cfg.paths, cfg.seed)?;

    let mut csv = String::from("h,rms_error\n");
    for p in &fit.points {
        let _ = writeln!(csv, "{},{}", fmt_f64(p.h), fmt_f64(p.rms_error));
    }
    write_file(&cfg.out_dir, "order.csv", &csv)?;
    println!("strong-order slope = {:.4} over {} stepsizes", fit.slope, fit.points.len());
    Ok(())
}
