use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use harmap_core::diagnostics::{standard_diagnostics, DiagnosticsReport};
use harmap_core::rescale::{blowup_family, default_sequence, hopf_bound_check, lemma_bounds_check};
use harmap_core::solver::{example_map_alpha, solve, SolveReport};
use harmap_core::{disk, Error, MapField};
use num_complex::Complex64;

use crate::config::{MapSource, RunConfig, Subcommand};
use crate::export;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_DIVERGED: u8 = 2;
pub const EXIT_CHECK_FAILED: u8 = 3;

/// Run one subcommand to completion. Input problems exit 1, a solver that
/// fails to contract exits 2 (leaving its update history behind), and a
/// violated bound check exits 3; everything else is 0.
pub fn execute(config: &RunConfig, out: &Path) -> u8 {
    if let Err(e) = fs::create_dir_all(out) {
        eprintln!("error: cannot create output directory {}: {e}", out.display());
        return EXIT_INPUT;
    }
    let outcome = match config.subcommand {
        Subcommand::Solve => run_solve(config, out),
        Subcommand::Diagnose => run_diagnose(config, out),
        Subcommand::Rescale => run_rescale(config, out),
        Subcommand::Kernels => run_kernels(out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    }
}

/// Solve the configured boundary problem; on divergence, write the update
/// history for post-mortem inspection and signal exit 2 via `Ok(None)`.
fn attempt_solve(config: &RunConfig, out: &Path) -> Result<Option<(MapField, SolveReport)>> {
    match solve(&config.metric, &config.boundary, &config.grid, &config.solver) {
        Ok(pair) => Ok(Some(pair)),
        Err(Error::SolverDiverged {
            iterations,
            last_update,
            history,
        }) => {
            export::write_history(&history, &out.join("history.csv"))?;
            eprintln!(
                "solver did not converge within {iterations} iterations \
                 (last update {last_update:.6e}); history written to history.csv"
            );
            Ok(None)
        }
        Err(e) => Err(e).context("solve"),
    }
}

fn solve_report_text(config: &RunConfig, report: &SolveReport) -> String {
    let mut text = String::new();
    text.push_str(&format!(
        "solve: metric {} on {} x {} grid\n",
        config.metric_kind,
        config.grid.nr(),
        config.grid.ntheta()
    ));
    text.push_str(&format!("iterations            {}\n", report.iterations));
    text.push_str(&format!("final update          {:.16e}\n", report.final_update));
    text.push_str(&format!("equation residual sup {:.16e}\n", report.residual_sup));
    text.push_str(&format!(
        "harmonic stencil sup  {:.16e} (discretization floor)\n",
        report.harmonic_stencil_sup
    ));
    text
}

fn run_solve(config: &RunConfig, out: &Path) -> Result<u8> {
    let Some((w, report)) = attempt_solve(config, out)? else {
        return Ok(EXIT_DIVERGED);
    };
    export::export_field(&w, &out.join("field.csv"))?;
    fs::write(out.join("solve_report.txt"), solve_report_text(config, &report))
        .context("writing solve_report.txt")?;
    if let Some(name) = &config.raster {
        export::write_raster(&w, &out.join(name))?;
    }
    Ok(EXIT_OK)
}

/// Shared tail: write the check table, list any failed inequalities on
/// stderr, and translate them into the exit status.
fn finish_checks(
    report: &DiagnosticsReport,
    header: &str,
    csv: &Path,
    txt: &Path,
) -> Result<u8> {
    export::write_report_csv(report, csv)?;
    export::write_report_text(report, header, txt)?;
    let failed = report.failed_inequalities();
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("failed checks: {}", failed.join(", "));
        Ok(EXIT_CHECK_FAILED)
    }
}

fn run_diagnose(config: &RunConfig, out: &Path) -> Result<u8> {
    let w = match config.map_source {
        MapSource::Solve => match attempt_solve(config, out)? {
            Some((w, _)) => w,
            None => return Ok(EXIT_DIVERGED),
        },
        MapSource::Alpha => example_map_alpha(config.alpha, &config.grid).context("fixture")?,
    };
    let report = standard_diagnostics(&config.metric, &w).context("diagnostics")?;
    if let Some(name) = &config.raster {
        export::write_raster(&w, &out.join(name))?;
    }
    let header = format!(
        "diagnostics: metric {} on {} x {} grid",
        config.metric_kind,
        config.grid.nr(),
        config.grid.ntheta()
    );
    finish_checks(
        &report,
        &header,
        &out.join("diagnostics.csv"),
        &out.join("summary.txt"),
    )
}

fn run_rescale(config: &RunConfig, out: &Path) -> Result<u8> {
    let Some((w, solve_report)) = attempt_solve(config, out)? else {
        return Ok(EXIT_DIVERGED);
    };
    let centers = default_sequence(config.theta0, config.sequence_count);
    let family = blowup_family(&w, &centers, w.grid()).context("blow-up family")?;
    let bounds = lemma_bounds_check(&family, &config.metric).context("interior bounds")?;
    let hopf = hopf_bound_check(&family, &config.metric).context("holomorphic-quadratic bound")?;

    let mut table = String::from(
        "n,center_re,center_im,origin_defect,c1,c2,c3,c3_skipped,transport_residual,hopf_sup\n",
    );
    let mut report = DiagnosticsReport::default();
    let transport_budget = 10.0 * solve_report.residual_sup;
    for (i, member) in bounds.members.iter().enumerate() {
        let defect = family.member_origin_defect(i)?;
        let c3 = member
            .c3
            .map(|v| format!("{v:.16e}"))
            .unwrap_or_default();
        table.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{:.16e},{:.16e}\n",
            i + 1,
            member.center.re,
            member.center.im,
            defect,
            member.c1,
            member.c2,
            c3,
            member.c3_skipped,
            member.transport_residual,
            hopf.members[i].1,
        ));
        report.push_inequality(
            &format!("origin-normalization-n{}", i + 1),
            defect,
            Some(1e-6),
            defect <= 1e-6,
            "|w_n(0)| by direct composition".into(),
        );
        report.push_inequality(
            &format!("harmonicity-transport-n{}", i + 1),
            member.transport_residual,
            Some(transport_budget),
            member.transport_residual <= transport_budget,
            "PDE residual of the member in its induced metric vs 10x the base residual".into(),
        );
    }
    report.push_inequality(
        "gradient-bound-uniform",
        bounds.c1_variation,
        Some(0.5),
        bounds.c1_variation < 0.5,
        format!("sup |grad w_n| (1-|z|) = {:.6e}; relative spread across the deeper members", bounds.c1_sup),
    );
    report.push_inequality(
        "laplacian-bound-uniform",
        bounds.c2_variation,
        Some(0.5),
        bounds.c2_variation < 0.5,
        format!("sup |Lap w_n| (1-|z|)^2 = {:.6e}; relative spread across the deeper members", bounds.c2_sup),
    );
    report.push_inequality(
        "hopf-bound-uniform",
        hopf.variation,
        Some(0.5),
        hopf.uniform,
        format!("sup |Psi_n| (1-|z|)^4 = {:.6e}; relative spread across the deeper members", hopf.sup),
    );
    if let Some(c3) = bounds.c3_sup {
        report.push_measurement(
            "laplacian-quotient-C3",
            c3,
            "sup |Lap w_n| (1-|z|)^2 / (|w_n_z| |w_n_zbar|)".into(),
        );
    }

    fs::write(out.join("members.csv"), table).context("writing members.csv")?;
    let header = format!(
        "blow-up family: {} members along theta0 = {}, base metric {}",
        config.sequence_count, config.theta0, config.metric_kind
    );
    finish_checks(
        &report,
        &header,
        &out.join("rescale_checks.csv"),
        &out.join("rescale_summary.txt"),
    )
}

/// Kernel identities on fixed sample points: no configuration beyond the
/// output directory, so reruns are byte-identical by construction.
fn run_kernels(out: &Path) -> Result<u8> {
    let samples = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.3, 0.0),
        Complex64::from_polar(0.5, 2.1),
        Complex64::from_polar(0.8, 4.0),
        Complex64::from_polar(0.95, 1.0),
    ];
    let pairs = [
        (Complex64::new(0.3, 0.2), Complex64::new(-0.4, 0.1)),
        (Complex64::new(0.0, 0.0), Complex64::new(0.5, -0.5)),
        (Complex64::from_polar(0.9, 0.7), Complex64::from_polar(0.2, 3.9)),
        (Complex64::new(-0.6, -0.3), Complex64::new(-0.55, -0.35)),
    ];

    let mut report = DiagnosticsReport::default();

    let quad_points = 2048usize;
    let step = std::f64::consts::TAU / quad_points as f64;
    let mut mean_dev = 0.0f64;
    for z in samples {
        let mean: f64 = (0..quad_points)
            .map(|k| disk::poisson_kernel(z, k as f64 * step).unwrap_or(f64::NAN))
            .sum::<f64>()
            * step
            / std::f64::consts::TAU;
        mean_dev = mean_dev.max((mean - 1.0).abs());
    }
    report.push_inequality(
        "poisson-mean-one",
        mean_dev,
        Some(1e-10),
        mean_dev <= 1e-10,
        format!("max |circle average - 1| over {} centers", samples.len()),
    );

    let mut asym = 0.0f64;
    let mut min_value = f64::INFINITY;
    for (z, w) in pairs {
        let forward = disk::green(z, w).context("kernel")?;
        let reverse = disk::green(w, z).context("kernel")?;
        asym = asym.max((forward - reverse).abs());
        min_value = min_value.min(forward.min(reverse));
    }
    report.push_inequality(
        "green-symmetry",
        asym,
        Some(1e-12),
        asym <= 1e-12,
        format!("max |G(z,w) - G(w,z)| over {} interior pairs", pairs.len()),
    );
    report.push_inequality(
        "green-positivity",
        min_value,
        Some(0.0),
        min_value > 0.0,
        "min of G over the same pairs; the kernel is positive inside the disk".into(),
    );

    let (z, w) = pairs[0];
    let exact = disk::green_dz(z, w).context("kernel")?;
    let fd = |h: f64| -> Result<Complex64> {
        let gx = (disk::green(z + h, w)? - disk::green(z - h, w)?) / (2.0 * h);
        let gy = (disk::green(z + Complex64::i() * h, w)?
            - disk::green(z - Complex64::i() * h, w)?)
            / (2.0 * h);
        Ok(Complex64::new(gx, -gy) * 0.5)
    };
    let err_coarse = (fd(1e-3)? - exact).norm();
    let err_fine = (fd(5e-4)? - exact).norm();
    let order = (err_coarse / err_fine).log2();
    report.push_inequality(
        "green-gradient-order",
        order,
        Some(1.9),
        order >= 1.9,
        "observed convergence order of centered differences toward the analytic z-derivative"
            .into(),
    );

    finish_checks(
        &report,
        "kernel identities on fixed sample points",
        &out.join("kernels.csv"),
        &out.join("kernels_summary.txt"),
    )
}
