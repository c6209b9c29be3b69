//! Mesh refinement study: one run per entry of `n-list`, writing
//! `n,h,err_u,err_v` rows and a footer with the least-squares slope of
//! log error against log mesh size. Rows whose error exceeds 1e3 or is
//! not finite count as diverged; they are reported on stderr and left out
//! of the fit, but the remaining rows still produce one.

use std::io::Write;

use crate::config::Config;
use crate::problem::{advance, build_setup, make_stepper, parse_cfl, project_exact, step_count};
use crate::Failure;

pub const KEYS: &[&str] = &[
    "dim", "qu", "qv", "scheme", "flux.alpha", "flux.beta", "flux.tau", "cfl", "T", "n-list",
    "problem", "omega", "k1", "k2", "c", "bc", "x-left", "x-right", "m", "p", "qT",
];

const DIVERGENCE_LIMIT: f64 = 1e3;

/// Least-squares slope of ln(err) against ln(h).
pub fn fit_rate(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return f64::NAN;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - xm) * (y - ym);
        den += (x - xm) * (x - xm);
    }
    num / den
}

fn usable(err: f64) -> bool {
    err.is_finite() && err > 0.0 && err <= DIVERGENCE_LIMIT
}

pub fn run(cfg: &Config, out: &mut dyn Write) -> Result<(), Failure> {
    let t_end = cfg.require_f64("T")?;
    if t_end < 0.0 {
        return Err(Failure::config(format!("T must be nonnegative, got {t_end}")));
    }
    let cfl = parse_cfl(cfg)?;
    let ns = cfg.require_usize_list("n-list")?;

    writeln!(out, "n,h,err_u,err_v")?;
    let mut fit_u = Vec::new();
    let mut fit_v = Vec::new();
    for &n in &ns {
        let setup = build_setup(cfg, n)?;
        let stepper = make_stepper(cfg, &setup)?;
        let steps = step_count(t_end, cfl * setup.h / setup.c_max);
        let dt = if steps == 0 { 0.0 } else { t_end / steps as f64 };
        let mut state = project_exact(&setup, 0.0);
        for _ in 0..steps {
            state = advance(&setup.op, &state, &stepper, dt);
            if !setup.op.discrete_energy(&state).is_finite() {
                break;
            }
        }
        let (err_u, err_v) = setup.op.l2_error(
            &state,
            &|x| (setup.exact_u)(x, t_end),
            &|x| (setup.exact_v)(x, t_end),
        );
        writeln!(out, "{n},{:.6e},{:.6e},{:.6e}", setup.h, err_u, err_v)?;
        if usable(err_u) {
            fit_u.push((setup.h, err_u));
        } else {
            eprintln!("n={n}: diverged (err_u = {err_u:.3e})");
        }
        if usable(err_v) {
            fit_v.push((setup.h, err_v));
        }
    }
    writeln!(out, "rate,,{:.4},{:.4}", fit_rate(&fit_u), fit_rate(&fit_v))?;
    Ok(())
}
