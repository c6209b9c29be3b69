//! Spectral radii of periodic semi-discrete operators on [-1, 1], scanned
//! over a list of degrees and element sizes. Writes `qu,h,rho,rho_h_over_qu`
//! with the velocity degree tied to `qu`. An optional `cfl-table` file of
//! `qu value` lines (reference time step limits from the literature) adds a
//! `cfl_ratio` column holding value / (rho h), the implied CFL number.

use std::collections::BTreeMap;
use std::io::Write;

use wavedg_core::analysis::spectral_radius_semidiscrete;
use wavedg_core::dg1d::{assemble_nonstaggered_1d, assemble_staggered_1d};
use wavedg_core::mesh::build_mesh_1d;
use wavedg_core::operator::Scheme;

use crate::config::{parse_float, Config};
use crate::problem::{parse_flux, parse_scheme};
use crate::Failure;

pub const KEYS: &[&str] =
    &["qu-list", "h-list", "scheme", "flux.alpha", "flux.beta", "flux.tau", "c", "cfl-table"];

fn load_cfl_table(path: &str) -> Result<BTreeMap<usize, f64>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read cfl-table {path}: {e}")))?;
    let mut table = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || Failure::config(format!("{path}:{}: expected `qu value`", lineno + 1));
        let mut parts = line.split_whitespace();
        let qu: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let value = parse_float(parts.next().ok_or_else(bad)?).ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        table.insert(qu, value);
    }
    Ok(table)
}

pub fn run(cfg: &Config, out: &mut dyn Write) -> Result<(), Failure> {
    let qus = cfg.require_usize_list("qu-list")?;
    let hs = cfg.require_f64_list("h-list")?;
    let scheme = parse_scheme(cfg)?;
    let flux = parse_flux(cfg)?;
    let c = cfg.opt_f64("c", 1.0)?;
    if c <= 0.0 {
        return Err(Failure::config(format!("c must be positive, got {c}")));
    }
    let table = match cfg.opt_str("cfl-table") {
        Some(path) => Some(load_cfl_table(path)?),
        None => None,
    };

    match table {
        Some(_) => writeln!(out, "qu,h,rho,rho_h_over_qu,cfl_ratio")?,
        None => writeln!(out, "qu,h,rho,rho_h_over_qu")?,
    }
    for &q_u in &qus {
        if q_u == 0 {
            return Err(Failure::config("qu-list entries must be at least 1"));
        }
        for &h_req in &hs {
            if !(h_req > 0.0 && h_req <= 1.0) {
                return Err(Failure::config(format!("h-list entries must lie in (0, 1], got {h_req}")));
            }
            let n = (2.0 / h_req).round().max(2.0) as usize;
            let mesh = build_mesh_1d(-1.0, 1.0, n, true)?;
            let h = mesh.h;
            let op = match scheme {
                Scheme::Staggered => assemble_staggered_1d(&mesh, q_u, q_u, flux, c, None)?,
                Scheme::NonStaggered => assemble_nonstaggered_1d(&mesh, q_u, q_u, flux, c, None)?,
            };
            let rho = match spectral_radius_semidiscrete(&op) {
                Ok(rho) => rho,
                Err(e @ wavedg_core::Error::DenseSizeGuard { .. }) => {
                    eprintln!("qu={q_u} h={h:.6e}: skipped ({e})");
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let scaled = rho * h / q_u as f64;
            match table.as_ref().and_then(|t| t.get(&q_u)) {
                Some(limit) => writeln!(
                    out,
                    "{q_u},{h:.6e},{rho:.6e},{scaled:.6e},{:.6e}",
                    limit / (rho * h)
                )?,
                None if table.is_some() => {
                    writeln!(out, "{q_u},{h:.6e},{rho:.6e},{scaled:.6e},")?
                }
                None => writeln!(out, "{q_u},{h:.6e},{rho:.6e},{scaled:.6e}")?,
            }
        }
    }
    Ok(())
}
