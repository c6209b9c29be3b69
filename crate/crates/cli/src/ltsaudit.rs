//! Eigenvalue audit of the one-step matrix for a bounded problem stepped
//! with the boundary-layer local time stepper. Writes one `index,1-|lambda|`
//! row per eigenvalue, sorted with the largest modulus first, and a `min`
//! footer with the worst margin. Negative values mean a mode grows per step.

use std::io::Write;

use wavedg_core::analysis::{build_one_step_matrix, eig_moduli, StepperConfig};
use wavedg_core::dg1d::{assemble_nonstaggered_1d, assemble_staggered_1d};
use wavedg_core::dg2d::assemble_staggered_2d;
use wavedg_core::mesh::{build_mesh_1d, build_mesh_2d};
use wavedg_core::operator::{Forcing, Scheme, SemiDiscreteOperator};
use wavedg_core::timeint::LtsConfig;

use crate::config::Config;
use crate::problem::{parse_bc_name, parse_cfl, parse_degrees, parse_flux, parse_scheme};
use crate::Failure;

pub const KEYS: &[&str] = &[
    "dim", "qu", "qv", "n", "m", "p", "qT", "cfl", "scheme", "flux.alpha", "flux.beta",
    "flux.tau", "c", "bc", "bc.left", "bc.right", "x-left", "x-right",
];

fn build_operator(cfg: &Config) -> Result<(SemiDiscreteOperator, f64), Failure> {
    let dim = cfg.opt_usize("dim", 1)?;
    let scheme = parse_scheme(cfg)?;
    let flux = parse_flux(cfg)?;
    let n = cfg.require_usize("n")?;
    let (q_u, q_v) = parse_degrees(cfg, dim, scheme)?;
    match dim {
        1 => {
            let x_left = cfg.opt_f64("x-left", -1.0)?;
            let x_right = cfg.opt_f64("x-right", 1.5)?;
            let c = cfg.opt_f64("c", 1.0)?;
            if c <= 0.0 {
                return Err(Failure::config(format!("c must be positive, got {c}")));
            }
            let left = parse_bc_name(cfg.opt_str("bc.left").unwrap_or("neumann"))?;
            let right = parse_bc_name(cfg.opt_str("bc.right").unwrap_or("dirichlet"))?;
            let mesh = build_mesh_1d(x_left, x_right, n, false)?;
            let bcs = Some([left, right]);
            let op = match scheme {
                Scheme::Staggered => assemble_staggered_1d(&mesh, q_u, q_v, flux, c, bcs)?,
                Scheme::NonStaggered => assemble_nonstaggered_1d(&mesh, q_u, q_v, flux, c, bcs)?,
            };
            Ok((op, c))
        }
        2 => {
            if scheme == Scheme::NonStaggered {
                return Err(Failure::config(
                    "the non-staggered assembly is one-dimensional only",
                ));
            }
            let (speed, c_max) = crate::problem::parse_speed_2d(cfg)?;
            let bc = parse_bc_name(cfg.opt_str("bc").unwrap_or("dirichlet"))?;
            let mesh = build_mesh_2d(n)?;
            Ok((assemble_staggered_2d(&mesh, q_u, q_v, flux, speed, bc, Forcing::None)?, c_max))
        }
        d => Err(Failure::config(format!("dim must be 1 or 2, got {d}"))),
    }
}

pub fn run(cfg: &Config, out: &mut dyn Write) -> Result<(), Failure> {
    let cfl = parse_cfl(cfg)?;
    let (op, c_max) = build_operator(cfg)?;
    let q_t = cfg.opt_usize("qT", op.q_u + 1)?;
    let m = cfg.opt_usize("m", 3)?;
    let p = cfg.opt_usize("p", q_t)?;
    let dt = cfl * op.h / c_max;
    let lts = LtsConfig::new(&op, m, p, q_t, false)?;
    let one_step = build_one_step_matrix(&StepperConfig::Lts { lts, dt }, &op)?;
    let report = eig_moduli(&one_step.b)?;

    writeln!(out, "index,one_minus_modulus")?;
    for &(i, _, margin) in &report.entries {
        writeln!(out, "{i},{margin:.9e}")?;
    }
    writeln!(out, "min,{:.9e}", -report.max_growth)?;
    Ok(())
}
