//! Explicit Taylor time stepping, the W1/W0 partition, and local time
//! stepping that sub-steps only a layer of elements near non-periodic
//! boundaries.
//!
//! The degree-q_T Taylor update needs the first q_T time derivatives of
//! the state; for a linear system with forcing these follow from the
//! recursion d^(j+1) = L d^(j) + F^(j)(t). The local time stepper runs
//! that same ladder restricted to the boundary rows, feeding the interface
//! coupling from the interior Taylor polynomial evaluated at the sub-step
//! times, so the interior is advanced once while the boundary layer takes
//! p small steps.

use crate::mesh::DofLayout;
use crate::operator::{DgState, MeshShape, SemiDiscreteOperator};
use crate::Error;

#[derive(Debug, Clone, Copy)]
pub struct TaylorScheme {
    pub order: usize,
    pub dt: f64,
}

impl TaylorScheme {
    pub fn new(order: usize, dt: f64) -> Self {
        assert!(order >= 1, "Taylor order must be at least 1");
        assert!(dt >= 0.0, "time step must be nonnegative");
        Self { order, dt }
    }
}

/// Linear time-dependent system W' = L W + F(t), exposed through its
/// action and the time derivatives of the forcing.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn apply_linear(&self, x: &[f64], out: &mut [f64]);
    fn add_forcing(&self, order: usize, t: f64, out: &mut [f64]);
}

impl OdeSystem for SemiDiscreteOperator {
    fn dim(&self) -> usize {
        self.layout.total
    }

    fn apply_linear(&self, x: &[f64], out: &mut [f64]) {
        SemiDiscreteOperator::apply_linear(self, x, out);
    }

    fn add_forcing(&self, order: usize, t: f64, out: &mut [f64]) {
        SemiDiscreteOperator::add_forcing(self, order, t, out);
    }
}

/// One global Taylor step of the given order.
pub fn taylor_step<S: OdeSystem + ?Sized>(
    sys: &S,
    state: &DgState,
    scheme: &TaylorScheme,
) -> DgState {
    let dim = sys.dim();
    assert_eq!(state.coeffs.len(), dim);
    let mut acc = state.coeffs.clone();
    let mut dcur = state.coeffs.clone();
    let mut buf = vec![0.0; dim];
    let mut fact = 1.0;
    for j in 1..=scheme.order {
        sys.apply_linear(&dcur, &mut buf);
        sys.add_forcing(j - 1, state.time, &mut buf);
        std::mem::swap(&mut dcur, &mut buf);
        fact *= scheme.dt / j as f64;
        for (a, d) in acc.iter_mut().zip(&dcur) {
            *a += fact * d;
        }
    }
    DgState { coeffs: acc, time: state.time + scheme.dt }
}

/// (W1 indices, W0 indices): everything except the u cell averages, and
/// the cell averages.
pub fn partition(layout: &DofLayout) -> (Vec<usize>, Vec<usize>) {
    (layout.w1_indices(), layout.w0_indices())
}

/// Boundary-layer configuration for local time stepping: which elements
/// are within m of a non-periodic boundary, the sub-step count p, and the
/// Taylor order.
#[derive(Debug, Clone)]
pub struct LtsConfig {
    pub m: usize,
    pub p: usize,
    pub q_t: usize,
    pub boundary_u_elems: Vec<usize>,
    pub boundary_v_elems: Vec<usize>,
    /// Sorted DOF indices of the boundary group.
    pub boundary_dof_mask: Vec<usize>,
    is_boundary: Vec<bool>,
    interior_dofs: Vec<usize>,
}

fn line_band(count: usize, m: usize) -> Vec<usize> {
    (0..count).filter(|&j| j < m || j + m >= count).collect()
}

fn square_band(count: usize, m: usize) -> Vec<usize> {
    let inside = |j: usize| j >= m && j + m < count;
    let mut out = Vec::new();
    for iy in 0..count {
        for ix in 0..count {
            if !(inside(ix) && inside(iy)) {
                out.push(iy * count + ix);
            }
        }
    }
    out
}

impl LtsConfig {
    pub fn new(
        op: &SemiDiscreteOperator,
        m: usize,
        p: usize,
        q_t: usize,
        allow_global_substep: bool,
    ) -> Result<Self, Error> {
        assert!(m >= 1);
        let (bu, bv) = match op.shape {
            MeshShape::Line { periodic: true, .. } => (Vec::new(), Vec::new()),
            MeshShape::Line { n, periodic: false } => (line_band(n, m), line_band(n + 1, m)),
            MeshShape::Square { n } => (square_band(n, m), square_band(n + 1, m)),
        };
        Self::from_elements(op, m, p, q_t, bu, bv, allow_global_substep)
    }

    /// Builds the configuration from an explicit element partition instead
    /// of the band of thickness m.
    pub fn from_elements(
        op: &SemiDiscreteOperator,
        m: usize,
        p: usize,
        q_t: usize,
        bu: Vec<usize>,
        bv: Vec<usize>,
        allow_global_substep: bool,
    ) -> Result<Self, Error> {
        assert!(p >= 1 && q_t >= 1);
        let layout = &op.layout;
        let mut is_boundary = vec![false; layout.total];
        for &e in &bu {
            for i in layout.u_range(e) {
                is_boundary[i] = true;
            }
        }
        for &e in &bv {
            for i in layout.v_range(e) {
                is_boundary[i] = true;
            }
        }
        let mask: Vec<usize> =
            (0..layout.total).filter(|&i| is_boundary[i]).collect();
        if mask.len() == layout.total && !allow_global_substep {
            return Err(Error::DegenerateBoundaryLayer { m });
        }
        let interior_dofs = (0..layout.total).filter(|&i| !is_boundary[i]).collect();
        Ok(Self {
            m,
            p,
            q_t,
            boundary_u_elems: bu,
            boundary_v_elems: bv,
            boundary_dof_mask: mask,
            is_boundary,
            interior_dofs,
        })
    }
}

/// One step of size dt: interior DOFs take a single Taylor step, the
/// boundary layer takes p sub-steps of dt/p with the interface coupling
/// evaluated from the interior Taylor polynomial.
pub fn lts_step(
    op: &SemiDiscreteOperator,
    state: &DgState,
    lts: &LtsConfig,
    dt: f64,
) -> DgState {
    let total = op.layout.total;
    assert_eq!(state.coeffs.len(), total);
    let t_n = state.time;
    let q_t = lts.q_t;

    // global derivative ladder at t_n
    let mut ladder: Vec<Vec<f64>> = Vec::with_capacity(q_t + 1);
    ladder.push(state.coeffs.clone());
    for j in 1..=q_t {
        let mut next = vec![0.0; total];
        OdeSystem::apply_linear(op, &ladder[j - 1], &mut next);
        op.add_forcing(j - 1, t_n, &mut next);
        ladder.push(next);
    }

    // full-step Taylor sum; kept for the interior DOFs
    let mut acc = state.coeffs.clone();
    let mut fact = 1.0;
    for (j, d) in ladder.iter().enumerate().skip(1) {
        fact *= dt / j as f64;
        for (a, v) in acc.iter_mut().zip(d) {
            *a += fact * v;
        }
    }
    if lts.boundary_dof_mask.is_empty() {
        return DgState { coeffs: acc, time: t_n + dt };
    }

    // interior Taylor polynomial derivative of order ell at offset s
    let poly_deriv = |ell: usize, s: f64, out: &mut Vec<f64>| {
        out.clone_from(&ladder[q_t]);
        for j in (ell..q_t).rev() {
            let scale = s / (j + 1 - ell) as f64;
            for (o, d) in out.iter_mut().zip(&ladder[j]) {
                *o = d + scale * *o;
            }
        }
    };

    let delta = dt / lts.p as f64;
    let mut wb = state.coeffs.clone();
    let mut xcur = vec![0.0; total];
    let mut next_b = vec![0.0; total];
    let mut poly = vec![0.0; total];
    for sub in 0..lts.p {
        let s = sub as f64 * delta;
        let t_star = t_n + s;
        poly_deriv(0, s, &mut poly);
        for i in 0..total {
            xcur[i] = if lts.is_boundary[i] { wb[i] } else { poly[i] };
        }
        let mut fact = 1.0;
        for i in 1..=q_t {
            op.apply_linear_subset(&lts.boundary_u_elems, &lts.boundary_v_elems, &xcur, &mut next_b);
            op.add_forcing_subset(&lts.boundary_v_elems, i - 1, t_star, &mut next_b);
            poly_deriv(i, s, &mut poly);
            for &k in &lts.boundary_dof_mask {
                xcur[k] = next_b[k];
            }
            for &k in &lts.interior_dofs {
                xcur[k] = poly[k];
            }
            fact *= delta / i as f64;
            for &k in &lts.boundary_dof_mask {
                wb[k] += fact * xcur[k];
            }
        }
    }

    for &k in &lts.boundary_dof_mask {
        acc[k] = wb[k];
    }
    DgState { coeffs: acc, time: t_n + dt }
}
