//! Turns a parsed config into a semi-discrete operator, exact-solution
//! callbacks, and a time stepper. Shared by the convergence and evolution
//! commands.
//!
//! Two problems are built in. `1d-wave` is the traveling wave
//! u = sin(omega (x + c t)) on a line with constant speed, exact for any
//! omega and unforced. `2d-manufactured` is the forced standing wave on
//! the unit square with speed c(x, y), where the forcing is chosen so the
//! prescribed fields solve the equation exactly.

use wavedg_core::dg1d::{assemble_nonstaggered_1d, assemble_staggered_1d};
use wavedg_core::dg2d::{assemble_staggered_2d, ManufacturedSolution, WaveSpeedField};
use wavedg_core::mesh::{build_mesh_1d, build_mesh_2d};
use wavedg_core::operator::{
    BoundaryCondition, DgState, FluxParams, Scheme, SemiDiscreteOperator,
};
use wavedg_core::timeint::{lts_step, taylor_step, LtsConfig, TaylorScheme};

use crate::config::Config;
use crate::Failure;

pub type ExactFn = Box<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

pub struct Setup {
    pub op: SemiDiscreteOperator,
    pub h: f64,
    /// Largest wave speed over the domain; the time step honors the CFL
    /// number c dt / h, so dt = cfl h / c_max.
    pub c_max: f64,
    pub periodic: bool,
    pub exact_u: ExactFn,
    pub exact_v: ExactFn,
}

pub fn parse_scheme(cfg: &Config) -> Result<Scheme, Failure> {
    match cfg.opt_str("scheme").unwrap_or("staggered") {
        "staggered" => Ok(Scheme::Staggered),
        "nonstaggered" => Ok(Scheme::NonStaggered),
        other => Err(Failure::config(format!(
            "scheme must be staggered or nonstaggered, got {other:?}"
        ))),
    }
}

pub fn parse_flux(cfg: &Config) -> Result<FluxParams, Failure> {
    let alpha = cfg.opt_f64("flux.alpha", 0.5)?;
    let beta = cfg.opt_f64("flux.beta", 0.0)?;
    let tau = cfg.opt_f64("flux.tau", 0.0)?;
    FluxParams::new(alpha, beta, tau).map_err(Failure::from)
}

pub fn parse_bc_name(name: &str) -> Result<BoundaryCondition, Failure> {
    match name {
        "dirichlet" => Ok(BoundaryCondition::dirichlet()),
        "neumann" => Ok(BoundaryCondition::neumann()),
        other => Err(Failure::config(format!(
            "boundary condition must be dirichlet or neumann, got {other:?}"
        ))),
    }
}

/// The `bc` key for line problems: `periodic`, one condition for both ends,
/// or a `left,right` pair.
fn parse_bc_line(cfg: &Config) -> Result<Option<[BoundaryCondition; 2]>, Failure> {
    match cfg.opt_str("bc").unwrap_or("periodic") {
        "periodic" => Ok(None),
        s => match s.split_once(',') {
            Some((l, r)) => Ok(Some([parse_bc_name(l.trim())?, parse_bc_name(r.trim())?])),
            None => {
                let b = parse_bc_name(s)?;
                Ok(Some([b, b]))
            }
        },
    }
}

fn parse_dim(cfg: &Config) -> Result<usize, Failure> {
    let dim = cfg.opt_usize("dim", 1)?;
    if dim == 1 || dim == 2 {
        Ok(dim)
    } else {
        Err(Failure::config(format!("dim must be 1 or 2, got {dim}")))
    }
}

/// The speed field together with its maximum over the closed square.
pub fn parse_speed_2d(cfg: &Config) -> Result<(WaveSpeedField, f64), Failure> {
    match cfg.opt_str("c").unwrap_or("one_plus_r2") {
        "one_plus_r2" => Ok((WaveSpeedField::one_plus_r2(), 3.0)),
        s => {
            let c = crate::config::parse_float(s)
                .ok_or_else(|| Failure::config(format!("c: cannot parse {s:?}")))?;
            if c <= 0.0 {
                return Err(Failure::config(format!("c must be positive, got {c}")));
            }
            Ok((WaveSpeedField::constant(c), c))
        }
    }
}

/// Degrees with the velocity degree defaulting to q_u - 1 on staggered
/// line meshes and to q_u everywhere else.
pub fn parse_degrees(cfg: &Config, dim: usize, scheme: Scheme) -> Result<(usize, usize), Failure> {
    let q_u = cfg.require_usize("qu")?;
    let default_qv = if dim == 1 && scheme == Scheme::Staggered && q_u > 0 { q_u - 1 } else { q_u };
    let q_v = cfg.opt_usize("qv", default_qv)?;
    Ok((q_u, q_v))
}

pub fn build_setup(cfg: &Config, n: usize) -> Result<Setup, Failure> {
    if n < 2 {
        return Err(Failure::config(format!("n must be at least 2, got {n}")));
    }
    let dim = parse_dim(cfg)?;
    let scheme = parse_scheme(cfg)?;
    let flux = parse_flux(cfg)?;
    let (q_u, q_v) = parse_degrees(cfg, dim, scheme)?;
    let problem = cfg.opt_str("problem").unwrap_or(if dim == 1 { "1d-wave" } else { "2d-manufactured" });

    match (dim, problem) {
        (1, "1d-wave") => {
            let x_left = cfg.opt_f64("x-left", -1.0)?;
            let x_right = cfg.opt_f64("x-right", 1.0)?;
            let c = cfg.opt_f64("c", 1.0)?;
            if c <= 0.0 {
                return Err(Failure::config(format!("c must be positive, got {c}")));
            }
            let omega = cfg.opt_f64("omega", 2.0 * q_u as f64 * std::f64::consts::PI)?;
            let bcs = parse_bc_line(cfg)?;
            let mesh = build_mesh_1d(x_left, x_right, n, bcs.is_none())?;
            let h = mesh.h;
            let op = match scheme {
                Scheme::Staggered => assemble_staggered_1d(&mesh, q_u, q_v, flux, c, bcs)?,
                Scheme::NonStaggered => assemble_nonstaggered_1d(&mesh, q_u, q_v, flux, c, bcs)?,
            };
            Ok(Setup {
                op,
                h,
                c_max: c,
                periodic: mesh.periodic,
                exact_u: Box::new(move |x, t| (omega * (x[0] + c * t)).sin()),
                exact_v: Box::new(move |x, t| omega * c * (omega * (x[0] + c * t)).cos()),
            })
        }
        (2, "2d-manufactured") => {
            if scheme == Scheme::NonStaggered {
                return Err(Failure::config(
                    "the non-staggered assembly is one-dimensional only",
                ));
            }
            let k1 = cfg.opt_usize("k1", 2)?;
            let k2 = cfg.opt_usize("k2", 2)?;
            let (speed, c_max) = parse_speed_2d(cfg)?;
            let bc = parse_bc_name(cfg.opt_str("bc").unwrap_or("dirichlet"))?;
            let mesh = build_mesh_2d(n)?;
            let h = mesh.h;
            let ms = ManufacturedSolution::standing_wave(k1, k2, &speed);
            let forcing = ms.forcing();
            let op = assemble_staggered_2d(&mesh, q_u, q_v, flux, speed, bc, forcing)?;
            let mu = ms.clone();
            let mv = ms;
            Ok(Setup {
                op,
                h,
                c_max,
                periodic: false,
                exact_u: Box::new(move |x, t| mu.u(x[0], x[1], t)),
                exact_v: Box::new(move |x, t| mv.v(x[0], x[1], t)),
            })
        }
        (d, p) => Err(Failure::config(format!("problem {p:?} does not exist in {d} dimensions"))),
    }
}

pub fn project_exact(setup: &Setup, t: f64) -> DgState {
    let eu = &setup.exact_u;
    let ev = &setup.exact_v;
    let mut state = setup.op.project_initial_data(&|x: &[f64]| eu(x, t), &|x: &[f64]| ev(x, t));
    state.time = t;
    state
}

pub enum Stepper {
    Taylor(usize),
    Lts(LtsConfig),
}

/// Periodic problems take global Taylor steps; bounded ones sub-step a
/// boundary layer of width `m` with `p` sub-steps per step.
pub fn make_stepper(cfg: &Config, setup: &Setup) -> Result<Stepper, Failure> {
    let q_t = cfg.opt_usize("qT", setup.op.q_u + 1)?;
    if q_t == 0 {
        return Err(Failure::config("qT must be at least 1"));
    }
    if setup.periodic {
        Ok(Stepper::Taylor(q_t))
    } else {
        let m = cfg.opt_usize("m", 3)?;
        let p = cfg.opt_usize("p", q_t)?;
        let lts = LtsConfig::new(&setup.op, m, p, q_t, true)?;
        Ok(Stepper::Lts(lts))
    }
}

pub fn advance(op: &SemiDiscreteOperator, state: &DgState, stepper: &Stepper, dt: f64) -> DgState {
    match stepper {
        Stepper::Taylor(order) => taylor_step(op, state, &TaylorScheme::new(*order, dt)),
        Stepper::Lts(lts) => lts_step(op, state, lts, dt),
    }
}

pub fn parse_cfl(cfg: &Config) -> Result<f64, Failure> {
    let cfl = cfg.opt_f64("cfl", 0.1)?;
    if cfl > 0.0 {
        Ok(cfl)
    } else {
        Err(Failure::config(format!("cfl must be positive, got {cfl}")))
    }
}

/// Step count hitting `t_end` exactly with a uniform dt at most `dt_max`.
pub fn step_count(t_end: f64, dt_max: f64) -> usize {
    if t_end <= 0.0 {
        0
    } else {
        (t_end / dt_max).ceil() as usize
    }
}
