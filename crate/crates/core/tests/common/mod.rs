//! Dense reassembly of the semi-discrete operators, used to cross-check
//! the sparse production assembly on small meshes.
//!
//! The volume terms are written in the opposite form from the production
//! code: where the library differentiates the test function twice, this
//! module integrates by parts piece by piece and keeps the resulting
//! trace corrections, and vice versa. Agreement between the two paths
//! therefore checks the variational bookkeeping, not just the quadrature.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use wavedg_core::basis::{gauss_rule, legendre_values, legendre_values_d2, tensor_indices};
use wavedg_core::dg2d::WaveSpeedField;
use wavedg_core::mesh::{DofLayout, FaceKind, Side, StaggeredMesh1D, StaggeredMesh2D};
use wavedg_core::operator::{BoundaryCondition, FluxParams};

const GQ: usize = 16;

pub struct DenseOp {
    pub layout: DofLayout,
    pub m: DMatrix<f64>,
    pub a: DMatrix<f64>,
}

impl DenseOp {
    /// M^-1 A x through a dense LU solve.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let rhs = &self.a * DVector::from_column_slice(x);
        let sol = self.m.clone().lu().solve(&rhs).expect("singular dense mass matrix");
        sol.iter().cloned().collect()
    }

    /// Spectral radius of M^-1 A from a dense eigensolve.
    pub fn spectral_radius(&self) -> f64 {
        let prod = self.m.clone().lu().solve(&self.a).expect("singular dense mass matrix");
        let n = prod.nrows();
        let f = faer::Mat::from_fn(n, n, |i, j| prod[(i, j)]);
        let eig: Vec<num_complex::Complex<f64>> =
            f.eigenvalues().expect("dense eigensolve failed");
        eig.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Reference coordinate of x in [lo, hi], shifting by the period first if
/// x lies outside (wrapped faces on periodic meshes).
fn ref_in(lo: f64, hi: f64, x: f64, period: f64) -> f64 {
    let mut xx = x;
    if period > 0.0 {
        let tol = 1e-12 * (hi - lo);
        while xx < lo - tol {
            xx += period;
        }
        while xx > hi + tol {
            xx -= period;
        }
    }
    2.0 * (xx - lo) / (hi - lo) - 1.0
}

/// Values and scaled first/second derivatives of the Legendre basis of an
/// interval element at physical x.
fn shape_1d(q: usize, lo: f64, hi: f64, x: f64, period: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (v, d1, d2) = legendre_values_d2(q, ref_in(lo, hi, x, period));
    let s = 2.0 / (hi - lo);
    let d1s = d1.iter().map(|d| d * s).collect();
    let d2s = d2.iter().map(|d| d * s * s).collect();
    (v, d1s, d2s)
}

fn quad_on(a: f64, b: f64) -> Vec<(f64, f64)> {
    let (gx, gw) = gauss_rule(GQ);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    gx.iter().zip(&gw).map(|(&x, &w)| (mid + half * x, w * half)).collect()
}

fn bc_for(bcs: &Option<[BoundaryCondition; 2]>, side: Side) -> BoundaryCondition {
    let pair = bcs.as_ref().expect("bounded mesh needs boundary conditions");
    match side {
        Side::Left => pair[0],
        Side::Right => pair[1],
    }
}

pub fn dense_staggered_1d(
    mesh: &StaggeredMesh1D,
    q_u: usize,
    q_v: usize,
    flux: FluxParams,
    c: f64,
    bcs: Option<[BoundaryCondition; 2]>,
) -> DenseOp {
    let n = mesh.n;
    let layout = DofLayout::new(n, q_u + 1, mesh.n_dual(), q_v + 1);
    let total = layout.total;
    let c2 = c * c;
    let period = if mesh.periodic { mesh.x_right - mesh.x_left } else { 0.0 };
    let mut mm = DMatrix::zeros(total, total);
    let mut aa = DMatrix::zeros(total, total);
    let uc = |j: usize, m: usize| layout.u_range(j).start + m;
    let vc = |k: usize, i: usize| layout.v_range(k).start + i;

    for j in 0..n {
        let (lo, hi) = mesh.primal_interval(j);
        mm[(uc(j, 0), uc(j, 0))] = hi - lo;
        for (x, w) in quad_on(lo, hi) {
            let (_, du, _) = shape_1d(q_u, lo, hi, x, 0.0);
            for m in 1..=q_u {
                for k in 1..=q_u {
                    mm[(uc(j, m), uc(j, k))] += w * c2 * du[m] * du[k];
                }
            }
        }
        for piece in &mesh.primal_overlaps[j] {
            for (x, w) in quad_on(piece.a, piece.b) {
                let (_, du, _) = shape_1d(q_u, lo, hi, x, 0.0);
                let (pv, dv, _) = shape_1d(q_v, piece.other_lo, piece.other_hi, x, 0.0);
                for i in 0..=q_v {
                    aa[(uc(j, 0), vc(piece.other, i))] += w * pv[i];
                    for m in 1..=q_u {
                        aa[(uc(j, m), vc(piece.other, i))] += w * c2 * du[m] * dv[i];
                    }
                }
            }
        }
    }

    for k in 0..mesh.n_dual() {
        let (dl, dh) = mesh.dual_interval(k);
        for (x, w) in quad_on(dl, dh) {
            let (pv, _, _) = shape_1d(q_v, dl, dh, x, 0.0);
            for i in 0..=q_v {
                for jj in 0..=q_v {
                    mm[(vc(k, i), vc(k, jj))] += w * pv[i] * pv[jj];
                }
            }
        }
        for piece in &mesh.dual_overlaps[k] {
            for (x, w) in quad_on(piece.a, piece.b) {
                let (pv, _, _) = shape_1d(q_v, dl, dh, x, 0.0);
                let (_, _, d2u) = shape_1d(q_u, piece.other_lo, piece.other_hi, x, 0.0);
                for i in 0..=q_v {
                    for m in 1..=q_u {
                        aa[(vc(k, i), uc(piece.other, m))] += w * pv[i] * c2 * d2u[m];
                    }
                }
            }
        }
    }

    // interior dual faces sit inside a primal element; per-piece integration
    // by parts of the displacement equation leaves the jump of the v trace
    // against the smooth c^2 phi' there
    for f in &mesh.dual_faces {
        if let FaceKind::Interior { left, right } = f.kind {
            let x = f.position;
            let mut vjump = vec![0.0; total];
            for (k, s) in [(left, 1.0), (right, -1.0)] {
                let (dl, dh) = mesh.dual_interval(k);
                let pv = legendre_values(q_v, ref_in(dl, dh, x, period));
                for i in 0..=q_v {
                    vjump[vc(k, i)] += s * pv[i];
                }
            }
            let (lo, hi) = (f.owner_lo, f.owner_hi);
            let (_, du, _) = shape_1d(q_u, lo, hi, x, 0.0);
            for m in 1..=q_u {
                for col in 0..total {
                    aa[(uc(f.owner, m), col)] -= c2 * du[m] * vjump[col];
                }
            }
        }
    }

    for f in &mesh.primal_faces {
        let x = f.position;
        let mut vrow = vec![0.0; total];
        let pv = legendre_values(q_v, ref_in(f.owner_lo, f.owner_hi, x, 0.0));
        for i in 0..=q_v {
            vrow[vc(f.owner, i)] = pv[i];
        }
        match f.kind {
            FaceKind::Interior { left, right } => {
                let mut jump = vec![0.0; total];
                for (e, s) in [(left, 1.0), (right, -1.0)] {
                    let (lo, hi) = mesh.primal_interval(e);
                    let (_, du, _) = shape_1d(q_u, lo, hi, x, period);
                    for m in 1..=q_u {
                        jump[uc(e, m)] += s * c2 * du[m];
                    }
                }
                for (e, nrm) in [(left, 1.0), (right, -1.0)] {
                    let (lo, hi) = mesh.primal_interval(e);
                    let (_, du, _) = shape_1d(q_u, lo, hi, x, period);
                    for m in 1..=q_u {
                        let t = nrm * c2 * du[m];
                        for col in 0..total {
                            let vstar = vrow[col] - flux.beta * jump[col];
                            aa[(uc(e, m), col)] += t * (vstar - vrow[col]);
                        }
                    }
                }
                // the face crosses the owner dual cell; the strong-form
                // velocity rows keep the jump of c^2 u_x there
                for i in 0..=q_v {
                    for col in 0..total {
                        aa[(vc(f.owner, i), col)] -= pv[i] * jump[col];
                    }
                }
            }
            FaceKind::Boundary { elem, side } => {
                let (wf, _) = bc_for(&bcs, side).weights();
                let (pa, _) = bc_for(&bcs, side).penalties();
                let nrm = match side {
                    Side::Left => -1.0,
                    Side::Right => 1.0,
                };
                let (lo, hi) = mesh.primal_interval(elem);
                let (_, du, _) = shape_1d(q_u, lo, hi, x, 0.0);
                let mut arow = vec![0.0; total];
                for m in 1..=q_u {
                    arow[uc(elem, m)] = c * du[m] * nrm;
                }
                for m in 1..=q_u {
                    let t = nrm * c2 * du[m];
                    for col in 0..total {
                        let vstar = wf * vrow[col] - pa * arow[col];
                        aa[(uc(elem, m), col)] += t * (vstar - vrow[col]);
                    }
                }
            }
        }
    }

    // dual faces carry the velocity equation's flux; the single-valued
    // c^2 u_x trace cancels against the per-piece strong-form boundary term
    for f in &mesh.dual_faces {
        let x = f.position;
        let mut fx = vec![0.0; total];
        let (_, du, _) = shape_1d(q_u, f.owner_lo, f.owner_hi, x, 0.0);
        for m in 1..=q_u {
            fx[uc(f.owner, m)] = c2 * du[m];
        }
        match f.kind {
            FaceKind::Interior { left, right } => {
                let mut jv = vec![0.0; total];
                for (k, s) in [(left, 1.0), (right, -1.0)] {
                    let (dl, dh) = mesh.dual_interval(k);
                    let pv = legendre_values(q_v, ref_in(dl, dh, x, period));
                    for i in 0..=q_v {
                        jv[vc(k, i)] += s * pv[i];
                    }
                }
                for (k, nrm) in [(left, 1.0), (right, -1.0)] {
                    let (dl, dh) = mesh.dual_interval(k);
                    let pv = legendre_values(q_v, ref_in(dl, dh, x, period));
                    for i in 0..=q_v {
                        for col in 0..total {
                            let fstar = fx[col] - flux.tau * jv[col];
                            aa[(vc(k, i), col)] += pv[i] * nrm * (fstar - fx[col]);
                        }
                    }
                }
            }
            FaceKind::Boundary { elem, side } => {
                let (_, wt) = bc_for(&bcs, side).weights();
                let (_, pvp) = bc_for(&bcs, side).penalties();
                let nrm = match side {
                    Side::Left => -1.0,
                    Side::Right => 1.0,
                };
                let (dl, dh) = mesh.dual_interval(elem);
                let pv = legendre_values(q_v, ref_in(dl, dh, x, 0.0));
                let mut brow = vec![0.0; total];
                for i in 0..=q_v {
                    brow[vc(elem, i)] = pv[i];
                }
                for i in 0..=q_v {
                    for col in 0..total {
                        let un = fx[col] * nrm;
                        let star = wt * un - pvp * c * brow[col];
                        aa[(vc(elem, i), col)] += pv[i] * (star - un);
                    }
                }
            }
        }
    }

    DenseOp { layout, m: mm, a: aa }
}

pub fn dense_nonstaggered_1d(
    mesh: &StaggeredMesh1D,
    q_u: usize,
    q_v: usize,
    flux: FluxParams,
    c: f64,
    bcs: Option<[BoundaryCondition; 2]>,
) -> DenseOp {
    let n = mesh.n;
    let layout = DofLayout::new(n, q_u + 1, n, q_v + 1);
    let total = layout.total;
    let c2 = c * c;
    let period = if mesh.periodic { mesh.x_right - mesh.x_left } else { 0.0 };
    let mut mm = DMatrix::zeros(total, total);
    let mut aa = DMatrix::zeros(total, total);
    let uc = |j: usize, m: usize| layout.u_range(j).start + m;
    let vc = |j: usize, i: usize| layout.v_range(j).start + i;

    for j in 0..n {
        let (lo, hi) = mesh.primal_interval(j);
        mm[(uc(j, 0), uc(j, 0))] = hi - lo;
        for (x, w) in quad_on(lo, hi) {
            let (pu, du, d2u) = shape_1d(q_u, lo, hi, x, 0.0);
            let (pv, dv, _) = shape_1d(q_v, lo, hi, x, 0.0);
            let _ = pu;
            for k in 1..=q_u {
                for m in 1..=q_u {
                    mm[(uc(j, m), uc(j, k))] += w * c2 * du[m] * du[k];
                }
            }
            for i in 0..=q_v {
                aa[(uc(j, 0), vc(j, i))] += w * pv[i];
                for jj in 0..=q_v {
                    mm[(vc(j, i), vc(j, jj))] += w * pv[i] * pv[jj];
                }
                for m in 1..=q_u {
                    aa[(uc(j, m), vc(j, i))] += w * c2 * du[m] * dv[i];
                    aa[(vc(j, i), uc(j, m))] += w * pv[i] * c2 * d2u[m];
                }
            }
        }
    }

    for f in &mesh.primal_faces {
        let x = f.position;
        match f.kind {
            FaceKind::Interior { left, right } => {
                let mut vl = vec![0.0; total];
                let mut vr = vec![0.0; total];
                let mut cl = vec![0.0; total];
                let mut cr = vec![0.0; total];
                for (e, vrow, crow) in [(left, &mut vl, &mut cl), (right, &mut vr, &mut cr)] {
                    let (lo, hi) = mesh.primal_interval(e);
                    let (_, du, _) = shape_1d(q_u, lo, hi, x, period);
                    let pv = legendre_values(q_v, ref_in(lo, hi, x, period));
                    for i in 0..=q_v {
                        vrow[vc(e, i)] = pv[i];
                    }
                    for m in 1..=q_u {
                        crow[uc(e, m)] = c2 * du[m];
                    }
                }
                let al = flux.alpha;
                for (e, nrm, own_v, own_c) in [(left, 1.0, &vl, &cl), (right, -1.0, &vr, &cr)] {
                    let (lo, hi) = mesh.primal_interval(e);
                    let (_, du, _) = shape_1d(q_u, lo, hi, x, period);
                    let pv = legendre_values(q_v, ref_in(lo, hi, x, period));
                    for col in 0..total {
                        let vstar = al * vl[col] + (1.0 - al) * vr[col]
                            - flux.beta * (cl[col] - cr[col]);
                        let fstar = (1.0 - al) * cl[col] + al * cr[col]
                            - flux.tau * (vl[col] - vr[col]);
                        for m in 1..=q_u {
                            aa[(uc(e, m), col)] += nrm * c2 * du[m] * (vstar - own_v[col]);
                        }
                        for i in 0..=q_v {
                            aa[(vc(e, i), col)] += pv[i] * nrm * (fstar - own_c[col]);
                        }
                    }
                }
            }
            FaceKind::Boundary { elem, side } => {
                let (wf, wt) = bc_for(&bcs, side).weights();
                let (pa, pvp) = bc_for(&bcs, side).penalties();
                let nrm = match side {
                    Side::Left => -1.0,
                    Side::Right => 1.0,
                };
                let (lo, hi) = mesh.primal_interval(elem);
                let (_, du, _) = shape_1d(q_u, lo, hi, x, 0.0);
                let pv = legendre_values(q_v, ref_in(lo, hi, x, 0.0));
                let mut arow = vec![0.0; total];
                let mut brow = vec![0.0; total];
                for m in 1..=q_u {
                    arow[uc(elem, m)] = c * du[m] * nrm;
                }
                for i in 0..=q_v {
                    brow[vc(elem, i)] = pv[i];
                }
                for col in 0..total {
                    let vstar = wf * brow[col] - pa * arow[col];
                    let star = wt * c * arow[col] - pvp * c * brow[col];
                    for m in 1..=q_u {
                        aa[(uc(elem, m), col)] += nrm * c2 * du[m] * (vstar - brow[col]);
                    }
                    for i in 0..=q_v {
                        aa[(vc(elem, i), col)] += pv[i] * (star - c * arow[col]);
                    }
                }
            }
        }
    }

    DenseOp { layout, m: mm, a: aa }
}

struct Shapes2 {
    val: Vec<f64>,
    gx: Vec<f64>,
    gy: Vec<f64>,
    lap: Vec<f64>,
}

fn shapes_2d(q: usize, rect: (f64, f64, f64, f64), x: f64, y: f64) -> Shapes2 {
    let (x0, x1, y0, y1) = rect;
    let (vx, dx, d2x) = legendre_values_d2(q, ref_in(x0, x1, x, 0.0));
    let (vy, dy, d2y) = legendre_values_d2(q, ref_in(y0, y1, y, 0.0));
    let sx = 2.0 / (x1 - x0);
    let sy = 2.0 / (y1 - y0);
    let idx = tensor_indices(q);
    let mut s = Shapes2 {
        val: Vec::with_capacity(idx.len()),
        gx: Vec::with_capacity(idx.len()),
        gy: Vec::with_capacity(idx.len()),
        lap: Vec::with_capacity(idx.len()),
    };
    for &(a, b) in &idx {
        s.val.push(vx[a] * vy[b]);
        s.gx.push(dx[a] * sx * vy[b]);
        s.gy.push(vx[a] * dy[b] * sy);
        s.lap.push(d2x[a] * sx * sx * vy[b] + vx[a] * d2y[b] * sy * sy);
    }
    s
}

pub fn dense_staggered_2d(
    mesh: &StaggeredMesh2D,
    q_u: usize,
    q_v: usize,
    flux: FluxParams,
    speed: &WaveSpeedField,
    bc: BoundaryCondition,
) -> DenseOp {
    let n = mesh.n;
    let line = &mesh.line;
    let um = (q_u + 1) * (q_u + 1);
    let vm = (q_v + 1) * (q_v + 1);
    let layout = DofLayout::new(n * n, um, (n + 1) * (n + 1), vm);
    let total = layout.total;
    let (wf, wt) = bc.weights();
    let (pa, pv) = bc.penalties();
    let mut mm = DMatrix::zeros(total, total);
    let mut aa = DMatrix::zeros(total, total);
    let uc = |ix: usize, iy: usize, m: usize| layout.u_range(mesh.primal_index(ix, iy)).start + m;
    let vc = |kx: usize, ky: usize, i: usize| layout.v_range(mesh.dual_index(kx, ky)).start + i;

    // union of primal edges and cell centers: each atomic interval lies in
    // one primal and one dual element
    let mut breaks = Vec::with_capacity(2 * n + 1);
    for j in 0..n {
        let (lo, hi) = line.primal_interval(j);
        breaks.push(lo);
        breaks.push(0.5 * (lo + hi));
    }
    breaks.push(line.x_right);
    let prim_of = |t: usize| t / 2;
    let dual_of = |t: usize| (t + 1) / 2;

    for ty in 0..2 * n {
        for tx in 0..2 * n {
            let (px, py) = (prim_of(tx), prim_of(ty));
            let (dx_, dy_) = (dual_of(tx), dual_of(ty));
            let rect_p = mesh.primal_cell(px, py);
            let rect_d = mesh.dual_cell(dx_, dy_);
            for (x, wx) in quad_on(breaks[tx], breaks[tx + 1]) {
                for (y, wy) in quad_on(breaks[ty], breaks[ty + 1]) {
                    let w = wx * wy;
                    let c2 = speed.c2(x, y);
                    let gc2 = speed.grad_c2(x, y);
                    let su = shapes_2d(q_u, rect_p, x, y);
                    let sv = shapes_2d(q_v, rect_d, x, y);
                    for i in 0..vm {
                        aa[(uc(px, py, 0), vc(dx_, dy_, i))] += w * sv.val[i];
                        for j in 0..vm {
                            mm[(vc(dx_, dy_, i), vc(dx_, dy_, j))] += w * sv.val[i] * sv.val[j];
                        }
                    }
                    for m in 1..um {
                        for k in 1..um {
                            mm[(uc(px, py, m), uc(px, py, k))] +=
                                w * c2 * (su.gx[m] * su.gx[k] + su.gy[m] * su.gy[k]);
                        }
                        for i in 0..vm {
                            aa[(uc(px, py, m), vc(dx_, dy_, i))] +=
                                w * c2 * (su.gx[m] * sv.gx[i] + su.gy[m] * sv.gy[i]);
                        }
                    }
                    for m in 0..um {
                        let strong = gc2[0] * su.gx[m] + gc2[1] * su.gy[m] + c2 * su.lap[m];
                        for i in 0..vm {
                            aa[(vc(dx_, dy_, i), uc(px, py, m))] += w * sv.val[i] * strong;
                        }
                    }
                }
            }
        }
    }
    for py in 0..n {
        for px in 0..n {
            mm[(uc(px, py, 0), uc(px, py, 0))] = mesh.h * mesh.h;
        }
    }

    // axis 0: faces normal to x; axis 1: faces normal to y. (a, b) maps
    // (normal index, tangent index) to (ix, iy).
    for axis in 0..2 {
        let cell = |a: usize, b: usize| if axis == 0 { (a, b) } else { (b, a) };
        let point = |f: f64, s: f64| if axis == 0 { (f, s) } else { (s, f) };
        let gn = |s: &Shapes2, m: usize| if axis == 0 { s.gx[m] } else { s.gy[m] };

        // primal faces, including the two domain boundary lines
        for i in 0..=n {
            let fixed = line.primal_edges[i];
            for t in 0..2 * n {
                let pt = prim_of(t);
                let dt_ = dual_of(t);
                for (s, w) in quad_on(breaks[t], breaks[t + 1]) {
                    let (x, y) = point(fixed, s);
                    let c2 = speed.c2(x, y);
                    let cval = speed.c(x, y);
                    let (vkx, vky) = cell(i, dt_);
                    let rect_d = mesh.dual_cell(vkx, vky);
                    let sv = shapes_2d(q_v, rect_d, x, y);
                    let mut vrow = vec![0.0; total];
                    for ii in 0..vm {
                        vrow[vc(vkx, vky, ii)] = sv.val[ii];
                    }
                    if i > 0 && i < n {
                        let sides = [(i - 1, 1.0), (i, -1.0)];
                        let mut jump = vec![0.0; total];
                        for (e, nrm) in sides {
                            let (ix, iy) = cell(e, pt);
                            let su = shapes_2d(q_u, mesh.primal_cell(ix, iy), x, y);
                            for m in 1..um {
                                jump[uc(ix, iy, m)] += nrm * c2 * gn(&su, m);
                            }
                        }
                        for (e, nrm) in sides {
                            let (ix, iy) = cell(e, pt);
                            let su = shapes_2d(q_u, mesh.primal_cell(ix, iy), x, y);
                            for m in 1..um {
                                let tcoef = w * nrm * c2 * gn(&su, m);
                                for col in 0..total {
                                    let vstar = vrow[col] - flux.beta * jump[col];
                                    aa[(uc(ix, iy, m), col)] += tcoef * (vstar - vrow[col]);
                                }
                            }
                        }
                        for ii in 0..vm {
                            let tcoef = w * sv.val[ii];
                            for col in 0..total {
                                aa[(vc(vkx, vky, ii), col)] -= tcoef * jump[col];
                            }
                        }
                    } else {
                        let (e, nrm) = if i == 0 { (0, -1.0) } else { (n - 1, 1.0) };
                        let (ix, iy) = cell(e, pt);
                        let su = shapes_2d(q_u, mesh.primal_cell(ix, iy), x, y);
                        let mut arow = vec![0.0; total];
                        let mut unrow = vec![0.0; total];
                        for m in 1..um {
                            arow[uc(ix, iy, m)] = cval * gn(&su, m) * nrm;
                            unrow[uc(ix, iy, m)] = c2 * gn(&su, m) * nrm;
                        }
                        for m in 1..um {
                            let tcoef = w * nrm * c2 * gn(&su, m);
                            for col in 0..total {
                                let vstar = wf * vrow[col] - pa * arow[col];
                                aa[(uc(ix, iy, m), col)] += tcoef * (vstar - vrow[col]);
                            }
                        }
                        for ii in 0..vm {
                            let tcoef = w * sv.val[ii];
                            for col in 0..total {
                                let star = wt * unrow[col] - pv * cval * vrow[col];
                                aa[(vc(vkx, vky, ii), col)] += tcoef * (star - unrow[col]);
                            }
                        }
                    }
                }
            }
        }

        // dual faces at the cell centers, always interior
        for i in 0..n {
            let (plo, phi) = line.primal_interval(i);
            let fixed = 0.5 * (plo + phi);
            for t in 0..2 * n {
                let pt = prim_of(t);
                let dt_ = dual_of(t);
                for (s, w) in quad_on(breaks[t], breaks[t + 1]) {
                    let (x, y) = point(fixed, s);
                    let c2 = speed.c2(x, y);
                    let (ix, iy) = cell(i, pt);
                    let su = shapes_2d(q_u, mesh.primal_cell(ix, iy), x, y);
                    let mut unrow = vec![0.0; total];
                    for m in 1..um {
                        unrow[uc(ix, iy, m)] = c2 * gn(&su, m);
                    }
                    let sides = [(i, 1.0), (i + 1, -1.0)];
                    let mut jv = vec![0.0; total];
                    for (k, sgn) in sides {
                        let (kx, ky) = cell(k, dt_);
                        let sv = shapes_2d(q_v, mesh.dual_cell(kx, ky), x, y);
                        for ii in 0..vm {
                            jv[vc(kx, ky, ii)] += sgn * sv.val[ii];
                        }
                    }
                    for m in 1..um {
                        let tcoef = w * c2 * gn(&su, m);
                        for col in 0..total {
                            aa[(uc(ix, iy, m), col)] -= tcoef * jv[col];
                        }
                    }
                    for (k, nrm) in sides {
                        let (kx, ky) = cell(k, dt_);
                        let sv = shapes_2d(q_v, mesh.dual_cell(kx, ky), x, y);
                        for ii in 0..vm {
                            let tcoef = w * sv.val[ii] * nrm;
                            for col in 0..total {
                                let fstar = unrow[col] - flux.tau * jv[col];
                                aa[(vc(kx, ky, ii), col)] += tcoef * (fstar - unrow[col]);
                            }
                        }
                    }
                }
            }
        }
    }

    DenseOp { layout, m: mm, a: aa }
}
