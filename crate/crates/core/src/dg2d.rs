//! Two-dimensional staggered assembly on the square with variable wave
//! speed and characteristic boundary fluxes on all four sides.
//!
//! Volume integrals are split along the interior lines where the other
//! field is discontinuous: primal-cell integrals over the up-to-four dual
//! intersections, dual-cell integrals over the primal ones. Faces are
//! likewise split into sub-faces so every integrand is smooth on its
//! quadrature patch. The u equation keeps the divergence form, so the
//! speed field must provide the gradient of c^2 analytically.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::basis::{gauss_rule, legendre_values, legendre_values_d1, legendre_values_d2, tensor_indices};
use crate::dg1d::ref_map;
use crate::mesh::{DofLayout, FaceKind, Side, StaggeredMesh2D};
use crate::operator::{
    cholesky_or_panic, BcQuad, BoundaryCondition, CsrMatrix, DgState, ElemQuad, FluxParams,
    Forcing, ForcingImpl, JumpQuad, MeshShape, QuadPlan, Scheme, SemiDiscreteOperator, SparseRow,
    UElemMass,
};
use crate::Error;

/// Spatially varying wave speed. The divergence-form volume term needs
/// grad(c^2), so the field carries it analytically.
#[derive(Clone)]
pub struct WaveSpeedField {
    c: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    grad_c2: Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>,
}

impl WaveSpeedField {
    pub fn new(
        c: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        grad_c2: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        Self { c: Arc::new(c), grad_c2: Arc::new(grad_c2) }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_, _| c, |_, _| [0.0, 0.0])
    }

    /// c(x, y) = 1 + x^2 + y^2.
    pub fn one_plus_r2() -> Self {
        Self::new(
            |x, y| 1.0 + x * x + y * y,
            |x, y| {
                let c = 1.0 + x * x + y * y;
                [4.0 * c * x, 4.0 * c * y]
            },
        )
    }

    pub fn c(&self, x: f64, y: f64) -> f64 {
        (self.c)(x, y)
    }

    pub fn c2(&self, x: f64, y: f64) -> f64 {
        let c = (self.c)(x, y);
        c * c
    }

    pub fn grad_c2(&self, x: f64, y: f64) -> [f64; 2] {
        (self.grad_c2)(x, y)
    }
}

/// Separable standing wave together with the forcing that makes it an
/// exact solution for the given speed field.
#[derive(Clone)]
pub struct ManufacturedSolution {
    pub k1: usize,
    pub k2: usize,
    /// Temporal frequency pi sqrt(k1^2 + k2^2).
    pub s: f64,
    u: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
    v: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
    f: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
    spatial: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl ManufacturedSolution {
    /// u = sin(s t) sin(k1 pi x) sin(k2 pi y) with s = pi sqrt(k1^2+k2^2),
    /// so the forcing reduces to sin(s t) times a fixed spatial profile.
    pub fn standing_wave(k1: usize, k2: usize, speed: &WaveSpeedField) -> Self {
        let w1 = k1 as f64 * std::f64::consts::PI;
        let w2 = k2 as f64 * std::f64::consts::PI;
        let s = (w1 * w1 + w2 * w2).sqrt();
        let sp = speed.clone();
        let profile = Arc::new(move |x: f64, y: f64| {
            let (s1, c1) = (w1 * x).sin_cos();
            let (s2, c2) = (w2 * y).sin_cos();
            let [gx, gy] = sp.grad_c2(x, y);
            s * s * (sp.c2(x, y) - 1.0) * s1 * s2 - gx * w1 * c1 * s2 - gy * w2 * s1 * c2
        });
        let pf = profile.clone();
        Self {
            k1,
            k2,
            s,
            u: Arc::new(move |x, y, t| (s * t).sin() * (w1 * x).sin() * (w2 * y).sin()),
            v: Arc::new(move |x, y, t| s * (s * t).cos() * (w1 * x).sin() * (w2 * y).sin()),
            f: Arc::new(move |x, y, t| (s * t).sin() * profile(x, y)),
            spatial: Arc::new(move |p: &[f64]| pf(p[0], p[1])),
        }
    }

    pub fn u(&self, x: f64, y: f64, t: f64) -> f64 {
        (self.u)(x, y, t)
    }

    pub fn v(&self, x: f64, y: f64, t: f64) -> f64 {
        (self.v)(x, y, t)
    }

    pub fn f(&self, x: f64, y: f64, t: f64) -> f64 {
        (self.f)(x, y, t)
    }

    /// The forcing in separable form, with analytic time derivatives.
    pub fn forcing(&self) -> Forcing {
        let s = self.s;
        Forcing::SeparableInTime {
            spatial: self.spatial.clone(),
            temporal: Arc::new(move |t, m| {
                s.powi(m as i32) * (s * t + 0.5 * m as f64 * std::f64::consts::PI).sin()
            }),
        }
    }
}

/// L2 projection of pointwise initial data onto the discrete spaces.
pub fn project_initial_data(
    op: &SemiDiscreteOperator,
    u0: &(dyn Fn(f64, f64) -> f64 + Send + Sync),
    v0: &(dyn Fn(f64, f64) -> f64 + Send + Sync),
) -> DgState {
    op.project_initial_data(&|p: &[f64]| u0(p[0], p[1]), &|p: &[f64]| v0(p[0], p[1]))
}

struct Tab {
    v: Vec<Vec<f64>>,
    d1: Vec<Vec<f64>>,
    d2: Vec<Vec<f64>>,
}

fn tab(q: usize, lo: f64, hi: f64, pts: &[f64]) -> Tab {
    let mut t = Tab { v: Vec::with_capacity(pts.len()), d1: Vec::with_capacity(pts.len()), d2: Vec::with_capacity(pts.len()) };
    for &x in pts {
        let (v, d1, d2) = legendre_values_d2(q, ref_map(lo, hi, x));
        t.v.push(v);
        t.d1.push(d1);
        t.d2.push(d2);
    }
    t
}

fn square_plan(rects: &[(f64, f64, f64, f64)], degree: usize) -> QuadPlan {
    let (nodes, weights) = gauss_rule(degree + 6);
    let modes = tensor_indices(degree);
    let vals: Vec<Vec<f64>> = nodes.iter().map(|&xi| legendre_values(degree, xi)).collect();
    let elems = rects
        .iter()
        .map(|&(x0, x1, y0, y1)| {
            let np = nodes.len();
            let (mx, hx) = (0.5 * (x0 + x1), 0.5 * (x1 - x0));
            let (my, hy) = (0.5 * (y0 + y1), 0.5 * (y1 - y0));
            let mut points = Vec::with_capacity(np * np);
            let mut jw = Vec::with_capacity(np * np);
            let mut basis = DMatrix::zeros(modes.len(), np * np);
            let mut p = 0;
            for gx in 0..np {
                for gy in 0..np {
                    points.push([mx + hx * nodes[gx], my + hy * nodes[gy]]);
                    jw.push(weights[gx] * hx * weights[gy] * hy);
                    for (mi, &(a1, a2)) in modes.iter().enumerate() {
                        basis[(mi, p)] = vals[gx][a1] * vals[gy][a2];
                    }
                    p += 1;
                }
            }
            ElemQuad { points, jw, basis }
        })
        .collect();
    QuadPlan { elems }
}

pub fn assemble_staggered_2d(
    mesh: &StaggeredMesh2D,
    q_u: usize,
    q_v: usize,
    flux: FluxParams,
    speed: WaveSpeedField,
    bc: BoundaryCondition,
    forcing: Forcing,
) -> Result<SemiDiscreteOperator, Error> {
    if q_u == 0 {
        return Err(Error::ZeroDisplacementDegree);
    }
    FluxParams::new(flux.alpha, flux.beta, flux.tau)?;
    let n = mesh.n;
    let line = &mesh.line;
    let h = mesh.h;
    let du = 2.0 / h;
    let mu = tensor_indices(q_u);
    let mv = tensor_indices(q_v);
    let num_u = mu.len();
    let num_v = mv.len();
    let layout = DofLayout::new(mesh.n_primal(), num_u, mesh.n_dual(), num_v);
    // the beta face term carries c^2 in both factors, so with the quartic
    // speed fields the tangential integrand reaches degree 2 q_u + 8
    let (gn, gw) = gauss_rule(q_u.max(q_v) + 6);
    let (_, d1_left) = legendre_values_d1(q_u, -1.0);
    let (_, d1_right) = legendre_values_d1(q_u, 1.0);
    let (wf, wt) = bc.weights();
    let (pa, pv) = bc.penalties();

    let u_dof = |ix: usize, iy: usize, a: usize| mesh.primal_index(ix, iy) * num_u + a;
    let v_dof =
        |kx: usize, ky: usize, j: usize| layout.u_dofs() + mesh.dual_index(kx, ky) * num_v + j;
    let axis_rule = |lo: f64, hi: f64| -> (Vec<f64>, Vec<f64>) {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        (
            gn.iter().map(|&xi| mid + half * xi).collect(),
            gw.iter().map(|&w| w * half).collect(),
        )
    };

    let mut c_max = 0.0f64;
    let mut sample = |x: f64, y: f64| -> Result<f64, Error> {
        let c = speed.c(x, y);
        if !(c > 0.0) {
            return Err(Error::NonpositiveWaveSpeed { c2: c * c.abs(), x, y });
        }
        c_max = c_max.max(c);
        Ok(c)
    };

    // per-cell c^2-weighted gradient Gram over the nonconstant modes
    let mut u_mass = Vec::with_capacity(layout.n_u_elems);
    for iy in 0..n {
        for ix in 0..n {
            let (x0, x1, y0, y1) = mesh.primal_cell(ix, iy);
            let (pxs, wxs) = axis_rule(x0, x1);
            let (pys, wys) = axis_rule(y0, y1);
            let tx = tab(q_u, x0, x1, &pxs);
            let ty = tab(q_u, y0, y1, &pys);
            let mut gram = DMatrix::zeros(num_u - 1, num_u - 1);
            let mut gax = vec![0.0; num_u];
            let mut gay = vec![0.0; num_u];
            for gx in 0..pxs.len() {
                for gy in 0..pys.len() {
                    let c = sample(pxs[gx], pys[gy])?;
                    let w = wxs[gx] * wys[gy] * c * c;
                    for a in 1..num_u {
                        let (a1, a2) = mu[a];
                        gax[a] = tx.d1[gx][a1] * du * ty.v[gy][a2];
                        gay[a] = tx.v[gx][a1] * ty.d1[gy][a2] * du;
                    }
                    for a in 1..num_u {
                        for b in a..num_u {
                            let val = w * (gax[a] * gax[b] + gay[a] * gay[b]);
                            gram[(a - 1, b - 1)] += val;
                            if b != a {
                                gram[(b - 1, a - 1)] += val;
                            }
                        }
                    }
                }
            }
            let chol = cholesky_or_panic(&gram, "displacement");
            u_mass.push(UElemMass { area: h * h, gram, chol });
        }
    }

    let mut v_mass_diag = Vec::with_capacity(layout.n_v_elems * num_v);
    for ky in 0..=n {
        for kx in 0..=n {
            let area = mesh.dual_area(kx, ky);
            for &(j1, j2) in &mv {
                v_mass_diag.push(area / ((2 * j1 + 1) * (2 * j2 + 1)) as f64);
            }
        }
    }
    let v_mass_inv: Vec<f64> = v_mass_diag.iter().map(|m| 1.0 / m).collect();

    let mut trip: Vec<(usize, usize, f64)> = Vec::new();

    // u equation, volume parts: cell-average row integrates v over the dual
    // pieces, gradient rows carry -div(c^2 grad phi) v
    for iy in 0..n {
        for ix in 0..n {
            let (x0, x1, y0, y1) = mesh.primal_cell(ix, iy);
            for pcx in &line.primal_overlaps[ix] {
                for pcy in &line.primal_overlaps[iy] {
                    let (pxs, wxs) = axis_rule(pcx.a, pcx.b);
                    let (pys, wys) = axis_rule(pcy.a, pcy.b);
                    let tux = tab(q_u, x0, x1, &pxs);
                    let tuy = tab(q_u, y0, y1, &pys);
                    let tvx = tab(q_v, pcx.other_lo, pcx.other_hi, &pxs);
                    let tvy = tab(q_v, pcy.other_lo, pcy.other_hi, &pys);
                    let mut block = DMatrix::zeros(num_u, num_v);
                    let mut tcoef = vec![0.0; num_u];
                    let mut psi = vec![0.0; num_v];
                    for gx in 0..pxs.len() {
                        for gy in 0..pys.len() {
                            let c = sample(pxs[gx], pys[gy])?;
                            let c2 = c * c;
                            let [gcx, gcy] = speed.grad_c2(pxs[gx], pys[gy]);
                            let w = wxs[gx] * wys[gy];
                            tcoef[0] = 1.0;
                            for a in 1..num_u {
                                let (a1, a2) = mu[a];
                                let dax = tux.d1[gx][a1] * du * tuy.v[gy][a2];
                                let day = tux.v[gx][a1] * tuy.d1[gy][a2] * du;
                                let lap = (tux.d2[gx][a1] * tuy.v[gy][a2]
                                    + tux.v[gx][a1] * tuy.d2[gy][a2])
                                    * du
                                    * du;
                                tcoef[a] = -(gcx * dax + gcy * day + c2 * lap);
                            }
                            for (j, &(j1, j2)) in mv.iter().enumerate() {
                                psi[j] = tvx.v[gx][j1] * tvy.v[gy][j2];
                            }
                            for a in 0..num_u {
                                if tcoef[a] == 0.0 {
                                    continue;
                                }
                                let wt_a = w * tcoef[a];
                                for j in 0..num_v {
                                    block[(a, j)] += wt_a * psi[j];
                                }
                            }
                        }
                    }
                    for a in 0..num_u {
                        for j in 0..num_v {
                            let val = block[(a, j)];
                            if val != 0.0 {
                                trip.push((
                                    u_dof(ix, iy, a),
                                    v_dof(pcx.other, pcy.other, j),
                                    val,
                                ));
                            }
                        }
                    }
                }
            }
        }
    }

    // v equation, volume part: -grad(psi) . c^2 grad(u) over primal pieces
    for ky in 0..=n {
        for kx in 0..=n {
            let (dx0, dx1, dy0, dy1) = mesh.dual_cell(kx, ky);
            let svx = 2.0 / (dx1 - dx0);
            let svy = 2.0 / (dy1 - dy0);
            for pcx in &line.dual_overlaps[kx] {
                for pcy in &line.dual_overlaps[ky] {
                    let (pxs, wxs) = axis_rule(pcx.a, pcx.b);
                    let (pys, wys) = axis_rule(pcy.a, pcy.b);
                    let tvx = tab(q_v, dx0, dx1, &pxs);
                    let tvy = tab(q_v, dy0, dy1, &pys);
                    let tux = tab(q_u, pcx.other_lo, pcx.other_hi, &pxs);
                    let tuy = tab(q_u, pcy.other_lo, pcy.other_hi, &pys);
                    let mut block = DMatrix::zeros(num_v, num_u);
                    let mut psx = vec![0.0; num_v];
                    let mut psy = vec![0.0; num_v];
                    let mut uax = vec![0.0; num_u];
                    let mut uay = vec![0.0; num_u];
                    for gx in 0..pxs.len() {
                        for gy in 0..pys.len() {
                            let c = sample(pxs[gx], pys[gy])?;
                            let w = wxs[gx] * wys[gy] * c * c;
                            for (j, &(j1, j2)) in mv.iter().enumerate() {
                                psx[j] = tvx.d1[gx][j1] * svx * tvy.v[gy][j2];
                                psy[j] = tvx.v[gx][j1] * tvy.d1[gy][j2] * svy;
                            }
                            for a in 1..num_u {
                                let (a1, a2) = mu[a];
                                uax[a] = tux.d1[gx][a1] * du * tuy.v[gy][a2];
                                uay[a] = tux.v[gx][a1] * tuy.d1[gy][a2] * du;
                            }
                            for j in 0..num_v {
                                for a in 1..num_u {
                                    block[(j, a)] -= w * (psx[j] * uax[a] + psy[j] * uay[a]);
                                }
                            }
                        }
                    }
                    for j in 0..num_v {
                        for a in 1..num_u {
                            let val = block[(j, a)];
                            if val != 0.0 {
                                trip.push((
                                    v_dof(kx, ky, j),
                                    u_dof(pcx.other, pcy.other, a),
                                    val,
                                ));
                            }
                        }
                    }
                }
            }
        }
    }

    let mut beta_jumps = Vec::new();
    let mut tau_jumps = Vec::new();
    let mut bc_points = Vec::new();

    // primal faces, both axes: the u surface term (c^2 grad(phi) . n) v*.
    // `swap` = false runs the x-normal faces, true the y-normal ones; mode
    // pairs are read as (normal degree, tangential degree).
    for swap in [false, true] {
        let uix = |i_f: usize, i_t: usize, a: usize| {
            if swap {
                u_dof(i_t, i_f, a)
            } else {
                u_dof(i_f, i_t, a)
            }
        };
        let vix = |k_f: usize, k_t: usize, j: usize| {
            if swap {
                v_dof(k_t, k_f, j)
            } else {
                v_dof(k_f, k_t, j)
            }
        };
        let um = |a: usize| if swap { (mu[a].1, mu[a].0) } else { mu[a] };
        let vm = |j: usize| if swap { (mv[j].1, mv[j].0) } else { mv[j] };
        for f in &line.primal_faces {
            let vx = legendre_values(q_v, ref_map(f.owner_lo, f.owner_hi, f.position));
            for it in 0..n {
                let (t0, t1) = line.primal_interval(it);
                for pc in &line.primal_overlaps[it] {
                    let (ts, ws) = axis_rule(pc.a, pc.b);
                    let tu = tab(q_u, t0, t1, &ts);
                    let tv = tab(q_v, pc.other_lo, pc.other_hi, &ts);
                    let phys = |g: usize| {
                        if swap {
                            (ts[g], f.position)
                        } else {
                            (f.position, ts[g])
                        }
                    };
                    match f.kind {
                        FaceKind::Interior { left, right } => {
                            let mut bv = DMatrix::zeros(2 * num_u, num_v);
                            let mut bu = DMatrix::zeros(2 * num_u, 2 * num_u);
                            let mut tcoef = vec![0.0; 2 * num_u];
                            let mut psi = vec![0.0; num_v];
                            for g in 0..ts.len() {
                                let (x, y) = phys(g);
                                let c = sample(x, y)?;
                                let c2 = c * c;
                                let w = ws[g];
                                for a in 0..num_u {
                                    let (an, at) = um(a);
                                    let tv_a = tu.v[g][at];
                                    tcoef[a] = c2 * d1_right[an] * du * tv_a;
                                    tcoef[num_u + a] = -c2 * d1_left[an] * du * tv_a;
                                }
                                for j in 0..num_v {
                                    let (jn, jt) = vm(j);
                                    psi[j] = vx[jn] * tv.v[g][jt];
                                }
                                for r in 0..2 * num_u {
                                    if tcoef[r] == 0.0 {
                                        continue;
                                    }
                                    let wr = w * tcoef[r];
                                    for j in 0..num_v {
                                        bv[(r, j)] += wr * psi[j];
                                    }
                                    if flux.beta != 0.0 {
                                        let wb = -flux.beta * wr;
                                        for cc in 0..2 * num_u {
                                            bu[(r, cc)] += wb * tcoef[cc];
                                        }
                                    }
                                }
                                let row: SparseRow = (0..2 * num_u)
                                    .filter(|&r| tcoef[r] != 0.0)
                                    .map(|r| {
                                        let (cell, a) = (r / num_u, r % num_u);
                                        let e = if cell == 0 { left } else { right };
                                        (uix(e, it, a), tcoef[r])
                                    })
                                    .collect();
                                beta_jumps.push(JumpQuad { w, row });
                            }
                            for r in 0..2 * num_u {
                                let (cell, a) = (r / num_u, r % num_u);
                                let e = if cell == 0 { left } else { right };
                                let urow = uix(e, it, a);
                                for j in 0..num_v {
                                    let val = bv[(r, j)];
                                    if val != 0.0 {
                                        trip.push((urow, vix(f.owner, pc.other, j), val));
                                    }
                                }
                                for cc in 0..2 * num_u {
                                    let val = bu[(r, cc)];
                                    if val != 0.0 {
                                        let (cell2, a2) = (cc / num_u, cc % num_u);
                                        let e2 = if cell2 == 0 { left } else { right };
                                        trip.push((urow, uix(e2, it, a2), val));
                                    }
                                }
                            }
                        }
                        FaceKind::Boundary { elem, side } => {
                            let (tsgn, dvals) = match side {
                                Side::Left => (-1.0, &d1_left),
                                Side::Right => (1.0, &d1_right),
                            };
                            let mut bv = DMatrix::zeros(num_u, num_v);
                            let mut bu = DMatrix::zeros(num_u, num_u);
                            let mut acoef = vec![0.0; num_u];
                            let mut psi = vec![0.0; num_v];
                            for g in 0..ts.len() {
                                let (x, y) = phys(g);
                                let c = sample(x, y)?;
                                let w = ws[g];
                                for a in 0..num_u {
                                    let (an, at) = um(a);
                                    acoef[a] = tsgn * c * dvals[an] * du * tu.v[g][at];
                                }
                                for j in 0..num_v {
                                    let (jn, jt) = vm(j);
                                    psi[j] = vx[jn] * tv.v[g][jt];
                                }
                                for r in 0..num_u {
                                    if acoef[r] == 0.0 {
                                        continue;
                                    }
                                    let wr = w * wf * c * acoef[r];
                                    let wp = w * pa * c * acoef[r];
                                    for j in 0..num_v {
                                        bv[(r, j)] += wr * psi[j];
                                    }
                                    for cc in 0..num_u {
                                        bu[(r, cc)] -= wp * acoef[cc];
                                    }
                                }
                                let a_row: SparseRow = (0..num_u)
                                    .filter(|&a| acoef[a] != 0.0)
                                    .map(|a| (uix(elem, it, a), acoef[a]))
                                    .collect();
                                let b_row: SparseRow = (0..num_v)
                                    .filter(|&j| psi[j] != 0.0)
                                    .map(|j| (vix(f.owner, pc.other, j), psi[j]))
                                    .collect();
                                bc_points.push(BcQuad { w, c, pa, pv, a_row, b_row });
                            }
                            for r in 0..num_u {
                                let urow = uix(elem, it, r);
                                for j in 0..num_v {
                                    let val = bv[(r, j)];
                                    if val != 0.0 {
                                        trip.push((urow, vix(f.owner, pc.other, j), val));
                                    }
                                }
                                for cc in 0..num_u {
                                    let val = bu[(r, cc)];
                                    if val != 0.0 {
                                        trip.push((urow, uix(elem, it, cc), val));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // dual faces, both axes: the v surface term psi (c^2 grad(u) . n)*
    for swap in [false, true] {
        let uix = |i_f: usize, i_t: usize, a: usize| {
            if swap {
                u_dof(i_t, i_f, a)
            } else {
                u_dof(i_f, i_t, a)
            }
        };
        let vix = |k_f: usize, k_t: usize, j: usize| {
            if swap {
                v_dof(k_t, k_f, j)
            } else {
                v_dof(k_f, k_t, j)
            }
        };
        let um = |a: usize| if swap { (mu[a].1, mu[a].0) } else { mu[a] };
        let vm = |j: usize| if swap { (mv[j].1, mv[j].0) } else { mv[j] };
        for f in &line.dual_faces {
            let (_, uxd1) = legendre_values_d1(q_u, ref_map(f.owner_lo, f.owner_hi, f.position));
            for kt in 0..=n {
                let (t0, t1) = line.dual_interval(kt);
                for pc in &line.dual_overlaps[kt] {
                    let (ts, ws) = axis_rule(pc.a, pc.b);
                    let tvt = tab(q_v, t0, t1, &ts);
                    let tut = tab(q_u, pc.other_lo, pc.other_hi, &ts);
                    let phys = |g: usize| {
                        if swap {
                            (ts[g], f.position)
                        } else {
                            (f.position, ts[g])
                        }
                    };
                    match f.kind {
                        FaceKind::Interior { left, right } => {
                            let mut bu = DMatrix::zeros(2 * num_v, num_u);
                            let mut bv = DMatrix::zeros(2 * num_v, 2 * num_v);
                            let mut tcoef = vec![0.0; 2 * num_v];
                            let mut fcoef = vec![0.0; num_u];
                            for g in 0..ts.len() {
                                let (x, y) = phys(g);
                                let c = sample(x, y)?;
                                let c2 = c * c;
                                let w = ws[g];
                                for j in 0..num_v {
                                    let (jn, jt) = vm(j);
                                    let tv_j = tvt.v[g][jt];
                                    tcoef[j] = tv_j;
                                    tcoef[num_v + j] = -sign(jn) * tv_j;
                                }
                                for a in 1..num_u {
                                    let (an, at) = um(a);
                                    fcoef[a] = c2 * uxd1[an] * du * tut.v[g][at];
                                }
                                for r in 0..2 * num_v {
                                    if tcoef[r] == 0.0 {
                                        continue;
                                    }
                                    let wr = w * tcoef[r];
                                    for a in 1..num_u {
                                        bu[(r, a)] += wr * fcoef[a];
                                    }
                                    if flux.tau != 0.0 {
                                        let wtau = -flux.tau * wr;
                                        for cc in 0..2 * num_v {
                                            bv[(r, cc)] += wtau * tcoef[cc];
                                        }
                                    }
                                }
                                let row: SparseRow = (0..2 * num_v)
                                    .filter(|&r| tcoef[r] != 0.0)
                                    .map(|r| {
                                        let (cell, j) = (r / num_v, r % num_v);
                                        let k = if cell == 0 { left } else { right };
                                        (vix(k, kt, j), tcoef[r])
                                    })
                                    .collect();
                                tau_jumps.push(JumpQuad { w, row });
                            }
                            for r in 0..2 * num_v {
                                let (cell, j) = (r / num_v, r % num_v);
                                let k = if cell == 0 { left } else { right };
                                let vrow = vix(k, kt, j);
                                for a in 1..num_u {
                                    let val = bu[(r, a)];
                                    if val != 0.0 {
                                        trip.push((vrow, uix(f.owner, pc.other, a), val));
                                    }
                                }
                                for cc in 0..2 * num_v {
                                    let val = bv[(r, cc)];
                                    if val != 0.0 {
                                        let (cell2, j2) = (cc / num_v, cc % num_v);
                                        let k2 = if cell2 == 0 { left } else { right };
                                        trip.push((vrow, vix(k2, kt, j2), val));
                                    }
                                }
                            }
                        }
                        FaceKind::Boundary { elem, side } => {
                            let nsgn = match side {
                                Side::Left => -1.0,
                                Side::Right => 1.0,
                            };
                            let vedge = legendre_values(q_v, nsgn);
                            let mut bu = DMatrix::zeros(num_v, num_u);
                            let mut bv = DMatrix::zeros(num_v, num_v);
                            let mut psi = vec![0.0; num_v];
                            let mut acoef = vec![0.0; num_u];
                            for g in 0..ts.len() {
                                let (x, y) = phys(g);
                                let c = sample(x, y)?;
                                let c2 = c * c;
                                let w = ws[g];
                                for j in 0..num_v {
                                    let (jn, jt) = vm(j);
                                    psi[j] = vedge[jn] * tvt.v[g][jt];
                                }
                                for a in 1..num_u {
                                    let (an, at) = um(a);
                                    acoef[a] = nsgn * c2 * uxd1[an] * du * tut.v[g][at];
                                }
                                for r in 0..num_v {
                                    if psi[r] == 0.0 {
                                        continue;
                                    }
                                    let wr = w * wt * psi[r];
                                    let wp = w * pv * psi[r];
                                    for a in 1..num_u {
                                        bu[(r, a)] += wr * acoef[a];
                                    }
                                    for cc in 0..num_v {
                                        bv[(r, cc)] -= wp * c * psi[cc];
                                    }
                                }
                            }
                            for r in 0..num_v {
                                let vrow = vix(elem, kt, r);
                                for a in 1..num_u {
                                    let val = bu[(r, a)];
                                    if val != 0.0 {
                                        trip.push((vrow, uix(f.owner, pc.other, a), val));
                                    }
                                }
                                for cc in 0..num_v {
                                    let val = bv[(r, cc)];
                                    if val != 0.0 {
                                        trip.push((vrow, vix(elem, kt, cc), val));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    let u_rects: Vec<(f64, f64, f64, f64)> = (0..n)
        .flat_map(|iy| (0..n).map(move |ix| (ix, iy)))
        .map(|(ix, iy)| mesh.primal_cell(ix, iy))
        .collect();
    let v_rects: Vec<(f64, f64, f64, f64)> = (0..=n)
        .flat_map(|ky| (0..=n).map(move |kx| (kx, ky)))
        .map(|(kx, ky)| mesh.dual_cell(kx, ky))
        .collect();

    let op = SemiDiscreteOperator {
        scheme: Scheme::Staggered,
        dim: 2,
        q_u,
        q_v,
        a: CsrMatrix::from_triplets(layout.total, layout.total, trip),
        flux,
        h,
        c_max,
        shape: MeshShape::Square { n },
        u_mass,
        v_mass_diag,
        v_mass_inv,
        forcing: ForcingImpl::None,
        u_plan: square_plan(&u_rects, q_u),
        v_plan: square_plan(&v_rects, q_v),
        beta_jumps,
        tau_jumps,
        bc_points,
        layout,
    };
    Ok(op.with_forcing(forcing))
}

fn sign(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
