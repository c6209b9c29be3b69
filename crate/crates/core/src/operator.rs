//! Shared semi-discrete operator machinery: sparse action, block mass
//! matrices, forcing, projections, and the energy diagnostics.
//!
//! Assembly lives in the dimension-specific modules; they fill in the
//! fields here. The operator realizes M dW/dt = AW + F with A stored in
//! CSR form and M block-diagonal: per u element a factorized gradient
//! Gram over the non-constant modes plus the cell-average row, per v
//! element a diagonal modal mass.

use std::sync::Arc;

use nalgebra::{DMatrix, DVectorView, DVectorViewMut, Dyn};
use rayon::prelude::*;

use crate::mesh::DofLayout;
use crate::Error;

/// Row-compressed sparse matrix, rows indexed like the DOF layout.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            debug_assert!(r < n_rows && c < n_cols);
            if row_ptr[r + 1] > 0 && *cols.last().unwrap() == c && row_ptr[r + 1] == cols.len() {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] = cols.len();
            }
        }
        // forward-fill empty rows
        for r in 1..=n_rows {
            if row_ptr[r] == 0 {
                row_ptr[r] = row_ptr[r - 1];
            }
        }
        // drop entries that merged to exact zero
        let mut kept_cols = Vec::with_capacity(cols.len());
        let mut kept_vals = Vec::with_capacity(vals.len());
        let mut kept_ptr = vec![0usize; n_rows + 1];
        for r in 0..n_rows {
            for i in row_ptr[r]..row_ptr[r + 1] {
                if vals[i] != 0.0 {
                    kept_cols.push(cols[i]);
                    kept_vals.push(vals[i]);
                }
            }
            kept_ptr[r + 1] = kept_cols.len();
        }
        CsrMatrix { n_rows, n_cols, row_ptr: kept_ptr, cols: kept_cols, vals: kept_vals }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in self.row_ptr[r]..self.row_ptr[r + 1] {
            acc += self.vals[i] * x[self.cols[i]];
        }
        acc
    }

    /// out = A x, overwriting out.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(out.len(), self.n_rows);
        if self.n_rows >= 4096 {
            out.par_iter_mut().enumerate().for_each(|(r, o)| *o = self.row_dot(r, x));
        } else {
            for (r, o) in out.iter_mut().enumerate() {
                *o = self.row_dot(r, x);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Staggered,
    NonStaggered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshShape {
    Line { n: usize, periodic: bool },
    Square { n: usize },
}

/// Interface flux parameters: averaging weight and the two jump penalties.
/// beta carries units 1/c and tau units c.
#[derive(Debug, Clone, Copy)]
pub struct FluxParams {
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
}

impl FluxParams {
    pub fn new(alpha: f64, beta: f64, tau: f64) -> Result<Self, Error> {
        if !(beta >= 0.0 && tau >= 0.0) {
            return Err(Error::NegativePenalty { beta, tau });
        }
        Ok(Self { alpha, beta, tau })
    }

    pub fn central() -> Self {
        Self { alpha: 0.5, beta: 0.0, tau: 0.0 }
    }

    pub fn upwind(c: f64) -> Self {
        Self { alpha: 0.5, beta: 0.5 / c, tau: 0.5 * c }
    }
}

/// Boundary condition weights gamma (Dirichlet part) and kappa (Neumann
/// part), normalized so gamma^2 + kappa^2 = 1.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryCondition {
    pub gamma: f64,
    pub kappa: f64,
}

impl BoundaryCondition {
    pub fn new(gamma: f64, kappa: f64) -> Result<Self, Error> {
        let norm = (gamma * gamma + kappa * kappa).sqrt();
        if !(gamma >= 0.0 && kappa >= 0.0) || norm < 1e-14 {
            return Err(Error::InvalidBoundaryWeights { gamma, kappa });
        }
        Ok(Self { gamma: gamma / norm, kappa: kappa / norm })
    }

    pub fn dirichlet() -> Self {
        Self { gamma: 1.0, kappa: 0.0 }
    }

    pub fn neumann() -> Self {
        Self { gamma: 0.0, kappa: 1.0 }
    }

    /// (flux weight kappa/(gamma+kappa), trace weight gamma/(gamma+kappa)).
    pub fn weights(&self) -> (f64, f64) {
        let s = self.gamma + self.kappa;
        (self.kappa / s, self.gamma / s)
    }

    /// Strengths of the dissipative flux penalties (on c grad(u).n in v*, on
    /// v in the trace flux). Pure Dirichlet and pure Neumann walls are imposed
    /// in conservative image form, keeping only the consistency part of the
    /// flux so the wall contributes nothing to the energy rate; any mix with
    /// gamma kappa > 0 is an absorbing wall and keeps the full weights.
    pub fn penalties(&self) -> (f64, f64) {
        if self.gamma * self.kappa > 0.0 {
            self.weights()
        } else {
            (0.0, 0.0)
        }
    }
}

/// Modal coefficients of (u, v) in DofLayout order, plus the current time.
#[derive(Debug, Clone)]
pub struct DgState {
    pub coeffs: Vec<f64>,
    pub time: f64,
}

impl DgState {
    pub fn zeros(layout: &DofLayout) -> Self {
        Self { coeffs: vec![0.0; layout.total], time: 0.0 }
    }
}

/// External forcing on the v equation.
#[derive(Clone)]
pub enum Forcing {
    None,
    /// f(x, t, order) returns the order-th time derivative of f at (x, t).
    Pointwise(Arc<dyn Fn(&[f64], f64, usize) -> f64 + Send + Sync>),
    /// f(x, t) = spatial(x) * temporal(t); temporal(t, order) returns the
    /// order-th derivative. The spatial factor is projected once at assembly.
    SeparableInTime {
        spatial: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
        temporal: Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>,
    },
}

pub(crate) enum ForcingImpl {
    None,
    Pointwise(Arc<dyn Fn(&[f64], f64, usize) -> f64 + Send + Sync>),
    Separable {
        temporal: Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>,
        /// Mass-normalized load per v-local DOF.
        load: Vec<f64>,
    },
}

/// Per-element quadrature tables on one mesh: physical points, combined
/// jacobian-times-weight factors, and basis values at the points.
pub(crate) struct QuadPlan {
    pub elems: Vec<ElemQuad>,
}

pub(crate) struct ElemQuad {
    pub points: Vec<[f64; 2]>,
    pub jw: Vec<f64>,
    /// n_modes rows, n_points columns.
    pub basis: DMatrix<f64>,
}

impl ElemQuad {
    fn project(&self, f: &mut dyn FnMut(&[f64]) -> f64, out: &mut [f64]) {
        let np = self.points.len();
        let nm = self.basis.nrows();
        let mut mass = vec![0.0; nm];
        out.iter_mut().for_each(|o| *o = 0.0);
        for p in 0..np {
            let val = f(&self.points[p]);
            for i in 0..nm {
                let b = self.basis[(i, p)];
                out[i] += self.jw[p] * b * val;
                mass[i] += self.jw[p] * b * b;
            }
        }
        for i in 0..nm {
            out[i] /= mass[i];
        }
    }

    fn error_sq(&self, coeffs: &[f64], f: &mut dyn FnMut(&[f64]) -> f64) -> f64 {
        let mut acc = 0.0;
        for p in 0..self.points.len() {
            let mut val = 0.0;
            for i in 0..coeffs.len() {
                val += coeffs[i] * self.basis[(i, p)];
            }
            let d = val - f(&self.points[p]);
            acc += self.jw[p] * d * d;
        }
        acc
    }
}

pub(crate) type SparseRow = Vec<(usize, f64)>;

/// One quadrature point of a jump functional: contributes -penalty * w * (row . x)^2
/// to the energy derivative.
pub(crate) struct JumpQuad {
    pub w: f64,
    pub row: SparseRow,
}

/// One boundary quadrature point: contributes -w c (pa a^2 + pv b^2) with
/// a = c grad(u).n and b = v evaluated through the stored rows, pa and pv
/// the penalty strengths of the wall flux.
pub(crate) struct BcQuad {
    pub w: f64,
    pub c: f64,
    pub pa: f64,
    pub pv: f64,
    pub a_row: SparseRow,
    pub b_row: SparseRow,
}

pub(crate) struct UElemMass {
    pub area: f64,
    /// Gradient Gram over the non-constant modes, ordered as the element's
    /// modes 1.. in layout order.
    pub gram: DMatrix<f64>,
    pub chol: nalgebra::Cholesky<f64, Dyn>,
}

pub struct SemiDiscreteOperator {
    pub scheme: Scheme,
    pub dim: usize,
    pub q_u: usize,
    pub q_v: usize,
    pub layout: DofLayout,
    pub flux: FluxParams,
    pub h: f64,
    pub c_max: f64,
    pub shape: MeshShape,
    pub(crate) a: CsrMatrix,
    pub(crate) u_mass: Vec<UElemMass>,
    pub(crate) v_mass_diag: Vec<f64>,
    pub(crate) v_mass_inv: Vec<f64>,
    pub(crate) forcing: ForcingImpl,
    pub(crate) u_plan: QuadPlan,
    pub(crate) v_plan: QuadPlan,
    pub(crate) beta_jumps: Vec<JumpQuad>,
    pub(crate) tau_jumps: Vec<JumpQuad>,
    pub(crate) bc_points: Vec<BcQuad>,
}

impl SemiDiscreteOperator {
    pub fn a_matrix(&self) -> &CsrMatrix {
        &self.a
    }

    pub fn u_gram(&self, e: usize) -> &DMatrix<f64> {
        &self.u_mass[e].gram
    }

    pub fn u_area(&self, e: usize) -> f64 {
        self.u_mass[e].area
    }

    pub fn v_mass_diag(&self) -> &[f64] {
        &self.v_mass_diag
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = match forcing {
            Forcing::None => ForcingImpl::None,
            Forcing::Pointwise(f) => ForcingImpl::Pointwise(f),
            Forcing::SeparableInTime { spatial, temporal } => {
                let load = self.project_v_load(&*spatial);
                ForcingImpl::Separable { temporal, load }
            }
        };
        self
    }

    /// Mass-normalized projection of a spatial profile onto the v space.
    fn project_v_load(&self, g: &(dyn Fn(&[f64]) -> f64 + Send + Sync)) -> Vec<f64> {
        let vm = self.layout.v_modes;
        let mut load = vec![0.0; self.layout.n_v_elems * vm];
        for (e, eq) in self.v_plan.elems.iter().enumerate() {
            let mut f = |x: &[f64]| g(x);
            eq.project(&mut f, &mut load[e * vm..(e + 1) * vm]);
        }
        load
    }

    /// Applies the per-element mass inverse to rows written in raw
    /// variational form.
    fn mass_solve_u(&self, e: usize, out: &mut [f64]) {
        let r = self.layout.u_range(e);
        let um = &self.u_mass[e];
        out[r.start] /= um.area;
        let m = self.layout.u_modes - 1;
        let mut view = DVectorViewMut::from_slice(&mut out[r.start + 1..r.end], m);
        um.chol.solve_mut(&mut view);
    }

    /// out = M^-1 A x, overwriting out.
    pub fn apply_linear(&self, x: &[f64], out: &mut [f64]) {
        self.a.matvec(x, out);
        for e in 0..self.layout.n_u_elems {
            self.mass_solve_u(e, out);
        }
        let u_dofs = self.layout.u_dofs();
        for (i, o) in out[u_dofs..].iter_mut().enumerate() {
            *o *= self.v_mass_inv[i];
        }
    }

    /// Writes M^-1 A x only on the rows of the listed elements; other
    /// entries of out are left untouched.
    pub fn apply_linear_subset(
        &self,
        u_elems: &[usize],
        v_elems: &[usize],
        x: &[f64],
        out: &mut [f64],
    ) {
        for &e in u_elems {
            for r in self.layout.u_range(e) {
                out[r] = self.a.row_dot(r, x);
            }
            self.mass_solve_u(e, out);
        }
        let u_dofs = self.layout.u_dofs();
        for &e in v_elems {
            for r in self.layout.v_range(e) {
                out[r] = self.a.row_dot(r, x) * self.v_mass_inv[r - u_dofs];
            }
        }
    }

    /// out += M^-1 times the order-th time derivative of F at time t.
    pub fn add_forcing(&self, order: usize, t: f64, out: &mut [f64]) {
        match &self.forcing {
            ForcingImpl::None => {}
            ForcingImpl::Separable { temporal, load } => {
                let s = temporal(t, order);
                let u_dofs = self.layout.u_dofs();
                for (i, l) in load.iter().enumerate() {
                    out[u_dofs + i] += s * l;
                }
            }
            ForcingImpl::Pointwise(f) => {
                for e in 0..self.layout.n_v_elems {
                    self.add_pointwise_load(&**f, e, order, t, out);
                }
            }
        }
    }

    /// Forcing restricted to the listed v elements.
    pub fn add_forcing_subset(&self, v_elems: &[usize], order: usize, t: f64, out: &mut [f64]) {
        match &self.forcing {
            ForcingImpl::None => {}
            ForcingImpl::Separable { temporal, load } => {
                let s = temporal(t, order);
                let vm = self.layout.v_modes;
                for &e in v_elems {
                    let r = self.layout.v_range(e);
                    for (o, l) in out[r].iter_mut().zip(&load[e * vm..(e + 1) * vm]) {
                        *o += s * l;
                    }
                }
            }
            ForcingImpl::Pointwise(f) => {
                for &e in v_elems {
                    self.add_pointwise_load(&**f, e, order, t, out);
                }
            }
        }
    }

    fn add_pointwise_load(
        &self,
        f: &(dyn Fn(&[f64], f64, usize) -> f64 + Send + Sync),
        e: usize,
        order: usize,
        t: f64,
        out: &mut [f64],
    ) {
        let eq = &self.v_plan.elems[e];
        let r = self.layout.v_range(e);
        let u_dofs = self.layout.u_dofs();
        let nm = self.layout.v_modes;
        for p in 0..eq.points.len() {
            let val = f(&eq.points[p], t, order) * eq.jw[p];
            for i in 0..nm {
                out[r.start + i] += val * eq.basis[(i, p)] * self.v_mass_inv[r.start + i - u_dofs];
            }
        }
    }

    /// out = M^-1 (A x + F(t)), overwriting out.
    pub fn apply(&self, x: &[f64], t: f64, out: &mut [f64]) {
        self.apply_linear(x, out);
        self.add_forcing(0, t, out);
    }

    /// L2 projection of initial data onto the discrete spaces.
    pub fn project_initial_data(
        &self,
        u0: &(dyn Fn(&[f64]) -> f64 + Send + Sync),
        v0: &(dyn Fn(&[f64]) -> f64 + Send + Sync),
    ) -> DgState {
        let mut state = DgState::zeros(&self.layout);
        for (e, eq) in self.u_plan.elems.iter().enumerate() {
            let r = self.layout.u_range(e);
            let mut f = |x: &[f64]| u0(x);
            eq.project(&mut f, &mut state.coeffs[r]);
        }
        for (e, eq) in self.v_plan.elems.iter().enumerate() {
            let r = self.layout.v_range(e);
            let mut f = |x: &[f64]| v0(x);
            eq.project(&mut f, &mut state.coeffs[r]);
        }
        state
    }

    /// Elementwise-quadrature L2 errors (err_u, err_v) against exact fields.
    pub fn l2_error(
        &self,
        state: &DgState,
        u_exact: &dyn Fn(&[f64]) -> f64,
        v_exact: &dyn Fn(&[f64]) -> f64,
    ) -> (f64, f64) {
        let mut eu = 0.0;
        for (e, eq) in self.u_plan.elems.iter().enumerate() {
            let mut f = |x: &[f64]| u_exact(x);
            eu += eq.error_sq(&state.coeffs[self.layout.u_range(e)], &mut f);
        }
        let mut ev = 0.0;
        for (e, eq) in self.v_plan.elems.iter().enumerate() {
            let mut f = |x: &[f64]| v_exact(x);
            ev += eq.error_sq(&state.coeffs[self.layout.v_range(e)], &mut f);
        }
        (eu.sqrt(), ev.sqrt())
    }

    /// E = 1/2 sum |c grad u|^2 + 1/2 sum v^2, evaluated through the
    /// assembled Gram and mass matrices.
    pub fn discrete_energy(&self, state: &DgState) -> f64 {
        let mut e_total = 0.0;
        for e in 0..self.layout.n_u_elems {
            let r = self.layout.u_range(e);
            let m = self.layout.u_modes - 1;
            let x = DVectorView::from_slice(&state.coeffs[r.start + 1..r.end], m);
            e_total += 0.5 * (x.transpose() * &self.u_mass[e].gram * x)[(0, 0)];
        }
        let u_dofs = self.layout.u_dofs();
        for (i, &v) in state.coeffs[u_dofs..].iter().enumerate() {
            e_total += 0.5 * self.v_mass_diag[i] * v * v;
        }
        e_total
    }

    /// Predicted dE/dt along the semi-discrete flow: the negated jump and
    /// boundary quadratic forms.
    pub fn energy_dissipation_rate(&self, state: &DgState) -> f64 {
        let x = &state.coeffs;
        let dot = |row: &SparseRow| row.iter().map(|&(i, c)| c * x[i]).sum::<f64>();
        let mut rate = 0.0;
        for j in &self.beta_jumps {
            let d = dot(&j.row);
            rate -= self.flux.beta * j.w * d * d;
        }
        for j in &self.tau_jumps {
            let d = dot(&j.row);
            rate -= self.flux.tau * j.w * d * d;
        }
        for b in &self.bc_points {
            let a = dot(&b.a_row);
            let v = dot(&b.b_row);
            rate -= b.w * b.c * (b.pa * a * a + b.pv * v * v);
        }
        rate
    }

    /// dE/dt evaluated directly as the energy inner product of the state
    /// with its derivative, mostly useful to cross-check the identity.
    pub fn energy_rate_direct(&self, state: &DgState) -> f64 {
        let mut dot = vec![0.0; self.layout.total];
        self.apply_linear(&state.coeffs, &mut dot);
        let mut rate = 0.0;
        for e in 0..self.layout.n_u_elems {
            let r = self.layout.u_range(e);
            let m = self.layout.u_modes - 1;
            let xu = DVectorView::from_slice(&state.coeffs[r.start + 1..r.end], m);
            let xd = DVectorView::from_slice(&dot[r.start + 1..r.end], m);
            rate += (xu.transpose() * &self.u_mass[e].gram * xd)[(0, 0)];
        }
        let u_dofs = self.layout.u_dofs();
        for i in 0..self.v_mass_diag.len() {
            rate += self.v_mass_diag[i] * state.coeffs[u_dofs + i] * dot[u_dofs + i];
        }
        rate
    }
}

pub(crate) fn cholesky_or_panic(m: &DMatrix<f64>, what: &str) -> nalgebra::Cholesky<f64, Dyn> {
    nalgebra::Cholesky::new(m.clone())
        .unwrap_or_else(|| panic!("{what} mass block is not positive definite"))
}
