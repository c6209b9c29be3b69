//! Time-domain evolution of one configured problem. Writes a `t,energy,err_u`
//! row every `sample-every` steps plus the final time, and aborts with a
//! numerical failure if the state stops being finite, reporting the last
//! good time on stderr.
//!
//! With `snapshot-every` set, the full coefficient vector is dumped every
//! that many steps to `<snapshot-prefix>-<step>.bin`. The layout is eight
//! little-endian u64 values (dimension, u degree, v degree, u element
//! count, modes per u element, v element count, modes per v element, total
//! coefficient count) followed by the coefficients as little-endian f64 in
//! layout order: all u elements then all v elements, modes contiguous per
//! element.

use std::io::Write;
use std::path::PathBuf;

use wavedg_core::operator::{DgState, MeshShape, SemiDiscreteOperator};

use crate::config::Config;
use crate::problem::{advance, build_setup, make_stepper, parse_cfl, project_exact, step_count};
use crate::Failure;

pub const KEYS: &[&str] = &[
    "dim", "qu", "qv", "scheme", "flux.alpha", "flux.beta", "flux.tau", "cfl", "T", "n",
    "problem", "omega", "k1", "k2", "c", "bc", "x-left", "x-right", "m", "p", "qT",
    "sample-every", "snapshot-every", "snapshot-prefix",
];

fn write_snapshot(path: &PathBuf, op: &SemiDiscreteOperator, state: &DgState) -> Result<(), Failure> {
    let l = &op.layout;
    let dim = match op.shape {
        MeshShape::Line { .. } => 1u64,
        MeshShape::Square { .. } => 2u64,
    };
    let header: [u64; 8] = [
        dim,
        op.q_u as u64,
        op.q_v as u64,
        l.n_u_elems as u64,
        l.u_modes as u64,
        l.n_v_elems as u64,
        l.v_modes as u64,
        l.total as u64,
    ];
    let mut buf = Vec::with_capacity(8 * (header.len() + state.coeffs.len()));
    for v in header {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for &c in &state.coeffs {
        buf.extend_from_slice(&c.to_le_bytes());
    }
    std::fs::write(path, buf)
        .map_err(|e| Failure::config(format!("cannot write snapshot {}: {e}", path.display())))
}

pub fn run(cfg: &Config, out: &mut dyn Write) -> Result<(), Failure> {
    let t_end = cfg.require_f64("T")?;
    if t_end < 0.0 {
        return Err(Failure::config(format!("T must be nonnegative, got {t_end}")));
    }
    let cfl = parse_cfl(cfg)?;
    let n = cfg.require_usize("n")?;
    let sample_every = cfg.opt_usize("sample-every", 1)?.max(1);
    let snapshot_every = cfg.opt_usize("snapshot-every", 0)?;
    let snapshot_prefix = cfg.opt_str("snapshot-prefix");
    if snapshot_every > 0 && snapshot_prefix.is_none() {
        return Err(Failure::config("snapshot-every needs snapshot-prefix"));
    }

    let setup = build_setup(cfg, n)?;
    let stepper = make_stepper(cfg, &setup)?;
    let steps = step_count(t_end, cfl * setup.h / setup.c_max);
    let dt = if steps == 0 { 0.0 } else { t_end / steps as f64 };

    let mut state = project_exact(&setup, 0.0);
    let report = |state: &DgState, out: &mut dyn Write| -> Result<f64, Failure> {
        let energy = setup.op.discrete_energy(state);
        let (err_u, _) = setup.op.l2_error(
            state,
            &|x| (setup.exact_u)(x, state.time),
            &|x| (setup.exact_v)(x, state.time),
        );
        writeln!(out, "{:.9e},{energy:.15e},{err_u:.6e}", state.time)?;
        Ok(energy)
    };
    let snapshot = |state: &DgState, step: usize| -> Result<(), Failure> {
        if snapshot_every > 0 && (step % snapshot_every == 0 || step == steps) {
            let path = PathBuf::from(format!("{}-{step:08}.bin", snapshot_prefix.unwrap()));
            write_snapshot(&path, &setup.op, state)?;
        }
        Ok(())
    };

    writeln!(out, "t,energy,err_u")?;
    report(&state, out)?;
    snapshot(&state, 0)?;
    let mut last_good = 0.0;
    for step in 1..=steps {
        state = advance(&setup.op, &state, &stepper, dt);
        let sampled = step % sample_every == 0 || step == steps;
        let energy =
            if sampled { report(&state, out)? } else { setup.op.discrete_energy(&state) };
        if !energy.is_finite() {
            return Err(Failure::numerical(format!(
                "state became non-finite at t = {:.9e}; last good t = {last_good:.9e}",
                state.time
            )));
        }
        snapshot(&state, step)?;
        last_good = state.time;
    }
    Ok(())
}
