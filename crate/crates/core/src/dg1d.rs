//! One-dimensional assembly: the non-staggered scheme keeps u and v on the
//! primal mesh, the staggered scheme moves v to the dual mesh.
//!
//! Both write the raw variational right-hand sides into sparse A rows; the
//! block mass structure (gradient Gram plus cell-average row for u,
//! diagonal modal mass for v) is handled by the shared operator. The u
//! equation is tested with gradients of the basis, so its volume term
//! carries the second derivative of the test function; the v equation is
//! in standard weak form. Interior numerical fluxes combine the averaging
//! weight alpha with the beta and tau jump penalties; boundary faces use
//! the (gamma, kappa) weighted characteristic fluxes.

use nalgebra::DMatrix;

use crate::basis::{gauss_rule, legendre_values, legendre_values_d1, legendre_values_d2};
use crate::mesh::{DofLayout, FaceKind, Side, StaggeredMesh1D};
use crate::operator::{
    cholesky_or_panic, BcQuad, BoundaryCondition, CsrMatrix, ElemQuad, FluxParams, ForcingImpl,
    JumpQuad, MeshShape, QuadPlan, Scheme, SemiDiscreteOperator, SparseRow, UElemMass,
};
use crate::Error;

pub(crate) fn ref_map(lo: f64, hi: f64, x: f64) -> f64 {
    (2.0 * x - lo - hi) / (hi - lo)
}

fn check_common(q_u: usize, flux: FluxParams, c: f64) -> Result<(), Error> {
    if q_u == 0 {
        return Err(Error::ZeroDisplacementDegree);
    }
    FluxParams::new(flux.alpha, flux.beta, flux.tau)?;
    if !(c > 0.0) {
        return Err(Error::NonpositiveWaveSpeed { c2: c * c.abs(), x: 0.0, y: 0.0 });
    }
    Ok(())
}

fn check_bcs(
    mesh: &StaggeredMesh1D,
    bcs: &Option<[BoundaryCondition; 2]>,
) -> Result<(), Error> {
    if mesh.periodic == bcs.is_some() {
        return Err(Error::BoundaryMismatch {
            periodic: mesh.periodic,
            bcs_given: bcs.is_some(),
        });
    }
    Ok(())
}

/// Quadrature plan over a list of intervals; points below the domain are
/// the wrapped periodic cell and get reported shifted into the domain.
fn line_plan(intervals: &[(f64, f64)], degree: usize, domain: (f64, f64)) -> QuadPlan {
    let (nodes, weights) = gauss_rule(degree + 6);
    let length = domain.1 - domain.0;
    let elems = intervals
        .iter()
        .map(|&(lo, hi)| {
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            let mut points = Vec::with_capacity(nodes.len());
            let mut jw = Vec::with_capacity(nodes.len());
            let mut basis = DMatrix::zeros(degree + 1, nodes.len());
            for (g, &xi) in nodes.iter().enumerate() {
                let x = mid + half * xi;
                let phys = if x < domain.0 { x + length } else { x };
                points.push([phys, 0.0]);
                jw.push(weights[g] * half);
                for (i, p) in legendre_values(degree, xi).into_iter().enumerate() {
                    basis[(i, g)] = p;
                }
            }
            ElemQuad { points, jw, basis }
        })
        .collect();
    QuadPlan { elems }
}

/// Gram matrix of the basis gradients over one element of width h,
/// weighted by the constant c^2, modes 1..=q_u.
fn gradient_gram(q_u: usize, h: f64, c2: f64) -> DMatrix<f64> {
    let (nodes, weights) = gauss_rule(q_u + 2);
    let mut khat = DMatrix::zeros(q_u, q_u);
    for (g, &xi) in nodes.iter().enumerate() {
        let (_, d1) = legendre_values_d1(q_u, xi);
        for m in 1..=q_u {
            for k in 1..=q_u {
                khat[(m - 1, k - 1)] += weights[g] * d1[m] * d1[k];
            }
        }
    }
    khat.scale(c2 * 2.0 / h)
}

fn sign_of_mode(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn assemble_staggered_1d(
    mesh: &StaggeredMesh1D,
    q_u: usize,
    q_v: usize,
    flux: FluxParams,
    c: f64,
    bcs: Option<[BoundaryCondition; 2]>,
) -> Result<SemiDiscreteOperator, Error> {
    check_common(q_u, flux, c)?;
    check_bcs(mesh, &bcs)?;
    let n = mesh.n;
    let n_dual = mesh.n_dual();
    let layout = DofLayout::new(n, q_u + 1, n_dual, q_v + 1);
    let c2 = c * c;
    let h = mesh.h;
    let du = 2.0 / h;
    let (qn, qw) = gauss_rule(q_u.max(q_v) + 2);
    let u_idx = |e: usize, m: usize| e * (q_u + 1) + m;
    let v_idx = |k: usize, i: usize| layout.u_dofs() + k * (q_v + 1) + i;

    let mut trip: Vec<(usize, usize, f64)> = Vec::new();

    // u equation, volume parts: the cell-average row integrates v over the
    // two dual pieces, the gradient rows carry -(c^2 phi')' v
    for j in 0..n {
        let (xl, xr) = mesh.primal_interval(j);
        for piece in &mesh.primal_overlaps[j] {
            let (mid, half) = (0.5 * (piece.a + piece.b), 0.5 * (piece.b - piece.a));
            for (g, &xi) in qn.iter().enumerate() {
                let x = mid + half * xi;
                let jw = qw[g] * half;
                let (_, _, d2) = legendre_values_d2(q_u, ref_map(xl, xr, x));
                let pv = legendre_values(q_v, ref_map(piece.other_lo, piece.other_hi, x));
                for (i, pvi) in pv.iter().enumerate() {
                    let col = v_idx(piece.other, i);
                    trip.push((u_idx(j, 0), col, jw * pvi));
                    for m in 1..=q_u {
                        trip.push((u_idx(j, m), col, -c2 * jw * d2[m] * du * du * pvi));
                    }
                }
            }
        }
    }

    // v equation, volume part: -psi' c^2 u_x over the primal pieces
    for k in 0..n_dual {
        let (dl, dh) = mesh.dual_interval(k);
        let sv = 2.0 / (dh - dl);
        for piece in &mesh.dual_overlaps[k] {
            let (mid, half) = (0.5 * (piece.a + piece.b), 0.5 * (piece.b - piece.a));
            for (g, &xi) in qn.iter().enumerate() {
                let x = mid + half * xi;
                let jw = qw[g] * half;
                let (_, pd1) = legendre_values_d1(q_v, ref_map(dl, dh, x));
                let (_, ud1) = legendre_values_d1(q_u, ref_map(piece.other_lo, piece.other_hi, x));
                for i in 0..=q_v {
                    for m in 1..=q_u {
                        trip.push((
                            v_idx(k, i),
                            u_idx(piece.other, m),
                            -c2 * jw * pd1[i] * sv * ud1[m] * du,
                        ));
                    }
                }
            }
        }
    }

    let (_, d1_left) = legendre_values_d1(q_u, -1.0);
    let (_, d1_right) = legendre_values_d1(q_u, 1.0);
    let mut beta_jumps = Vec::new();
    let mut tau_jumps = Vec::new();
    let mut bc_points = Vec::new();

    // primal faces: the u equation's surface term (c^2 phi' n) v*
    for f in &mesh.primal_faces {
        let pv_o = legendre_values(q_v, ref_map(f.owner_lo, f.owner_hi, f.position));
        match f.kind {
            FaceKind::Interior { left, right } => {
                let mut vstar: SparseRow =
                    pv_o.iter().enumerate().map(|(i, &p)| (v_idx(f.owner, i), p)).collect();
                let mut jump: SparseRow = Vec::new();
                for m in 1..=q_u {
                    jump.push((u_idx(left, m), c2 * d1_right[m] * du));
                    jump.push((u_idx(right, m), -c2 * d1_left[m] * du));
                }
                if flux.beta != 0.0 {
                    for &(col, w) in &jump {
                        vstar.push((col, -flux.beta * w));
                    }
                }
                for &(col, w) in &vstar {
                    for m in 1..=q_u {
                        trip.push((u_idx(left, m), col, c2 * d1_right[m] * du * w));
                        trip.push((u_idx(right, m), col, -c2 * d1_left[m] * du * w));
                    }
                }
                beta_jumps.push(JumpQuad { w: 1.0, row: jump });
            }
            FaceKind::Boundary { elem, side } => {
                let bc = match side {
                    Side::Left => bcs.as_ref().unwrap()[0],
                    Side::Right => bcs.as_ref().unwrap()[1],
                };
                let (wf, _) = bc.weights();
                let (pa, pv) = bc.penalties();
                let (tsgn, dvals) = match side {
                    Side::Left => (-1.0, &d1_left),
                    Side::Right => (1.0, &d1_right),
                };
                let a_row: SparseRow =
                    (1..=q_u).map(|m| (u_idx(elem, m), tsgn * c * dvals[m] * du)).collect();
                let b_row: SparseRow =
                    pv_o.iter().enumerate().map(|(i, &p)| (v_idx(f.owner, i), p)).collect();
                let mut vstar: SparseRow =
                    b_row.iter().map(|&(col, w)| (col, wf * w)).collect();
                vstar.extend(a_row.iter().map(|&(col, w)| (col, -pa * w)));
                for &(col, w) in &vstar {
                    for m in 1..=q_u {
                        trip.push((u_idx(elem, m), col, tsgn * c2 * dvals[m] * du * w));
                    }
                }
                bc_points.push(BcQuad { w: 1.0, c, pa, pv, a_row, b_row });
            }
        }
    }

    // dual faces: the v equation's surface term psi (c^2 u_x n)*
    for f in &mesh.dual_faces {
        let xo = ref_map(f.owner_lo, f.owner_hi, f.position);
        let (_, od1) = legendre_values_d1(q_u, xo);
        match f.kind {
            FaceKind::Interior { left, right } => {
                let mut fl: SparseRow =
                    (1..=q_u).map(|m| (u_idx(f.owner, m), c2 * od1[m] * du)).collect();
                let mut jump: SparseRow = Vec::new();
                for i in 0..=q_v {
                    jump.push((v_idx(left, i), 1.0));
                    jump.push((v_idx(right, i), -sign_of_mode(i)));
                }
                if flux.tau != 0.0 {
                    for &(col, w) in &jump {
                        fl.push((col, -flux.tau * w));
                    }
                }
                for &(col, w) in &fl {
                    for i in 0..=q_v {
                        trip.push((v_idx(left, i), col, w));
                        trip.push((v_idx(right, i), col, -sign_of_mode(i) * w));
                    }
                }
                tau_jumps.push(JumpQuad { w: 1.0, row: jump });
            }
            FaceKind::Boundary { elem, side } => {
                let bc = match side {
                    Side::Left => bcs.as_ref().unwrap()[0],
                    Side::Right => bcs.as_ref().unwrap()[1],
                };
                let (_, wt) = bc.weights();
                let (_, pv) = bc.penalties();
                let nsgn = match side {
                    Side::Left => -1.0,
                    Side::Right => 1.0,
                };
                let pv_e = legendre_values(q_v, nsgn);
                let mut star: SparseRow =
                    (1..=q_u).map(|m| (u_idx(f.owner, m), wt * nsgn * c2 * od1[m] * du)).collect();
                for (i, &p) in pv_e.iter().enumerate() {
                    star.push((v_idx(elem, i), -pv * c * p));
                }
                for &(col, w) in &star {
                    for (i, &p) in pv_e.iter().enumerate() {
                        trip.push((v_idx(elem, i), col, p * w));
                    }
                }
            }
        }
    }

    let gram = gradient_gram(q_u, h, c2);
    let chol = cholesky_or_panic(&gram, "displacement");
    let u_mass: Vec<UElemMass> = (0..n)
        .map(|_| UElemMass { area: h, gram: gram.clone(), chol: chol.clone() })
        .collect();
    let mut v_mass_diag = Vec::with_capacity(n_dual * (q_v + 1));
    for k in 0..n_dual {
        let wdt = mesh.dual_width(k);
        for i in 0..=q_v {
            v_mass_diag.push(wdt / (2 * i + 1) as f64);
        }
    }
    let v_mass_inv: Vec<f64> = v_mass_diag.iter().map(|m| 1.0 / m).collect();

    let domain = (mesh.x_left, mesh.x_right);
    let u_intervals: Vec<(f64, f64)> = (0..n).map(|j| mesh.primal_interval(j)).collect();
    let v_intervals: Vec<(f64, f64)> = (0..n_dual).map(|k| mesh.dual_interval(k)).collect();

    Ok(SemiDiscreteOperator {
        scheme: Scheme::Staggered,
        dim: 1,
        q_u,
        q_v,
        a: CsrMatrix::from_triplets(layout.total, layout.total, trip),
        flux,
        h,
        c_max: c,
        shape: MeshShape::Line { n, periodic: mesh.periodic },
        u_mass,
        v_mass_diag,
        v_mass_inv,
        forcing: ForcingImpl::None,
        u_plan: line_plan(&u_intervals, q_u, domain),
        v_plan: line_plan(&v_intervals, q_v, domain),
        beta_jumps,
        tau_jumps,
        bc_points,
        layout,
    })
}

pub fn assemble_nonstaggered_1d(
    mesh: &StaggeredMesh1D,
    q_u: usize,
    q_v: usize,
    flux: FluxParams,
    c: f64,
    bcs: Option<[BoundaryCondition; 2]>,
) -> Result<SemiDiscreteOperator, Error> {
    check_common(q_u, flux, c)?;
    check_bcs(mesh, &bcs)?;
    let n = mesh.n;
    let layout = DofLayout::new(n, q_u + 1, n, q_v + 1);
    let c2 = c * c;
    let h = mesh.h;
    let du = 2.0 / h;
    let (qn, qw) = gauss_rule(q_u.max(q_v) + 2);
    let u_idx = |e: usize, m: usize| e * (q_u + 1) + m;
    let v_idx = |e: usize, i: usize| layout.u_dofs() + e * (q_v + 1) + i;

    let mut trip: Vec<(usize, usize, f64)> = Vec::new();

    // volume terms; u and v share elements so there is no piece splitting
    for j in 0..n {
        trip.push((u_idx(j, 0), v_idx(j, 0), h));
        for (g, &xi) in qn.iter().enumerate() {
            let jw = qw[g] * 0.5 * h;
            let (_, ud1, ud2) = legendre_values_d2(q_u, xi);
            let (pv, pd1) = legendre_values_d1(q_v, xi);
            for i in 0..=q_v {
                for m in 1..=q_u {
                    trip.push((u_idx(j, m), v_idx(j, i), -c2 * jw * ud2[m] * du * du * pv[i]));
                    trip.push((v_idx(j, i), u_idx(j, m), -c2 * jw * pd1[i] * du * ud1[m] * du));
                }
            }
        }
    }

    let (_, d1_left) = legendre_values_d1(q_u, -1.0);
    let (_, d1_right) = legendre_values_d1(q_u, 1.0);
    let mut beta_jumps = Vec::new();
    let mut tau_jumps = Vec::new();
    let mut bc_points = Vec::new();

    // every flux lives on the primal faces: v* feeds the u equation,
    // the starred normal flux feeds the v equation
    for f in &mesh.primal_faces {
        match f.kind {
            FaceKind::Interior { left, right } => {
                let mut ujump: SparseRow = Vec::new();
                for m in 1..=q_u {
                    ujump.push((u_idx(left, m), c2 * d1_right[m] * du));
                    ujump.push((u_idx(right, m), -c2 * d1_left[m] * du));
                }
                let mut vjump: SparseRow = Vec::new();
                for i in 0..=q_v {
                    vjump.push((v_idx(left, i), 1.0));
                    vjump.push((v_idx(right, i), -sign_of_mode(i)));
                }

                let mut vstar: SparseRow = Vec::new();
                for i in 0..=q_v {
                    vstar.push((v_idx(left, i), flux.alpha));
                    vstar.push((v_idx(right, i), (1.0 - flux.alpha) * sign_of_mode(i)));
                }
                if flux.beta != 0.0 {
                    for &(col, w) in &ujump {
                        vstar.push((col, -flux.beta * w));
                    }
                }
                for &(col, w) in &vstar {
                    for m in 1..=q_u {
                        trip.push((u_idx(left, m), col, c2 * d1_right[m] * du * w));
                        trip.push((u_idx(right, m), col, -c2 * d1_left[m] * du * w));
                    }
                }

                let mut fl: SparseRow = Vec::new();
                for m in 1..=q_u {
                    fl.push((u_idx(left, m), (1.0 - flux.alpha) * c2 * d1_right[m] * du));
                    fl.push((u_idx(right, m), flux.alpha * c2 * d1_left[m] * du));
                }
                if flux.tau != 0.0 {
                    for &(col, w) in &vjump {
                        fl.push((col, -flux.tau * w));
                    }
                }
                for &(col, w) in &fl {
                    for i in 0..=q_v {
                        trip.push((v_idx(left, i), col, w));
                        trip.push((v_idx(right, i), col, -sign_of_mode(i) * w));
                    }
                }

                beta_jumps.push(JumpQuad { w: 1.0, row: ujump });
                tau_jumps.push(JumpQuad { w: 1.0, row: vjump });
            }
            FaceKind::Boundary { elem, side } => {
                let bc = match side {
                    Side::Left => bcs.as_ref().unwrap()[0],
                    Side::Right => bcs.as_ref().unwrap()[1],
                };
                let (wf, wt) = bc.weights();
                let (pa, pv) = bc.penalties();
                let (nsgn, dvals) = match side {
                    Side::Left => (-1.0, &d1_left),
                    Side::Right => (1.0, &d1_right),
                };
                let edge = legendre_values(q_v, nsgn);
                let a_row: SparseRow =
                    (1..=q_u).map(|m| (u_idx(elem, m), nsgn * c * dvals[m] * du)).collect();
                let b_row: SparseRow =
                    edge.iter().enumerate().map(|(i, &p)| (v_idx(elem, i), p)).collect();

                let mut vstar: SparseRow = b_row.iter().map(|&(col, w)| (col, wf * w)).collect();
                vstar.extend(a_row.iter().map(|&(col, w)| (col, -pa * w)));
                for &(col, w) in &vstar {
                    for m in 1..=q_u {
                        trip.push((u_idx(elem, m), col, nsgn * c2 * dvals[m] * du * w));
                    }
                }

                let mut star: SparseRow =
                    a_row.iter().map(|&(col, w)| (col, wt * c * w)).collect();
                star.extend(b_row.iter().map(|&(col, w)| (col, -pv * c * w)));
                for &(col, w) in &star {
                    for (i, &p) in edge.iter().enumerate() {
                        trip.push((v_idx(elem, i), col, p * w));
                    }
                }

                bc_points.push(BcQuad { w: 1.0, c, pa, pv, a_row, b_row });
            }
        }
    }

    let gram = gradient_gram(q_u, h, c2);
    let chol = cholesky_or_panic(&gram, "displacement");
    let u_mass: Vec<UElemMass> = (0..n)
        .map(|_| UElemMass { area: h, gram: gram.clone(), chol: chol.clone() })
        .collect();
    let mut v_mass_diag = Vec::with_capacity(n * (q_v + 1));
    for _ in 0..n {
        for i in 0..=q_v {
            v_mass_diag.push(h / (2 * i + 1) as f64);
        }
    }
    let v_mass_inv: Vec<f64> = v_mass_diag.iter().map(|m| 1.0 / m).collect();

    let domain = (mesh.x_left, mesh.x_right);
    let intervals: Vec<(f64, f64)> = (0..n).map(|j| mesh.primal_interval(j)).collect();

    Ok(SemiDiscreteOperator {
        scheme: Scheme::NonStaggered,
        dim: 1,
        q_u,
        q_v,
        a: CsrMatrix::from_triplets(layout.total, layout.total, trip),
        flux,
        h,
        c_max: c,
        shape: MeshShape::Line { n, periodic: mesh.periodic },
        u_mass,
        v_mass_diag,
        v_mass_inv,
        forcing: ForcingImpl::None,
        u_plan: line_plan(&intervals, q_u, domain),
        v_plan: line_plan(&intervals, q_v, domain),
        beta_jumps,
        tau_jumps,
        bc_points,
        layout,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh_1d;
    use crate::operator::DgState;

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = build_mesh_1d(-1.0, 1.0, 4, true).unwrap();
        assert!(assemble_staggered_1d(&m, 0, 1, FluxParams::central(), 1.0, None).is_err());
        assert!(assemble_staggered_1d(&m, 2, 1, FluxParams::central(), -1.0, None).is_err());
        let bcs = Some([BoundaryCondition::dirichlet(), BoundaryCondition::dirichlet()]);
        assert!(assemble_staggered_1d(&m, 2, 1, FluxParams::central(), 1.0, bcs).is_err());
        let mb = build_mesh_1d(-1.0, 1.0, 4, false).unwrap();
        assert!(assemble_nonstaggered_1d(&mb, 2, 1, FluxParams::central(), 1.0, None).is_err());
    }

    #[test]
    fn constant_state_is_steady() {
        let flux = FluxParams { alpha: 0.3, beta: 0.2, tau: 0.4 };
        let cases: Vec<SemiDiscreteOperator> = vec![
            assemble_staggered_1d(
                &build_mesh_1d(-1.0, 1.0, 5, true).unwrap(),
                3,
                2,
                flux,
                2.0,
                None,
            )
            .unwrap(),
            assemble_nonstaggered_1d(
                &build_mesh_1d(-1.0, 1.0, 5, true).unwrap(),
                3,
                2,
                flux,
                2.0,
                None,
            )
            .unwrap(),
            assemble_staggered_1d(
                &build_mesh_1d(0.0, 2.0, 5, false).unwrap(),
                3,
                2,
                flux,
                2.0,
                Some([BoundaryCondition::neumann(), BoundaryCondition::dirichlet()]),
            )
            .unwrap(),
        ];
        for op in cases {
            let mut state = DgState::zeros(&op.layout);
            for e in 0..op.layout.n_u_elems {
                state.coeffs[op.layout.u_range(e).start] = 1.0;
            }
            let mut out = vec![0.0; op.layout.total];
            op.apply_linear(&state.coeffs, &mut out);
            assert!(max_abs(&out) < 1e-13, "constant state drifts: {}", max_abs(&out));
            assert!(op.discrete_energy(&state) < 1e-14);
        }
    }

    /// u = x with v = 0 has continuous u_x and is steady for the staggered
    /// periodic operator and for bounded Dirichlet ends on both schemes.
    #[test]
    fn linear_profile_is_steady() {
        let lin_state = |op: &SemiDiscreteOperator, mesh: &StaggeredMesh1D| {
            let mut s = DgState::zeros(&op.layout);
            for j in 0..mesh.n {
                let (a, b) = mesh.primal_interval(j);
                let r = op.layout.u_range(j);
                s.coeffs[r.start] = 0.5 * (a + b);
                s.coeffs[r.start + 1] = 0.5 * (b - a);
            }
            s
        };
        let mesh = build_mesh_1d(-1.0, 1.0, 6, true).unwrap();
        let op = assemble_staggered_1d(&mesh, 3, 2, FluxParams::central(), 1.3, None).unwrap();
        let s = lin_state(&op, &mesh);
        let mut out = vec![0.0; op.layout.total];
        op.apply_linear(&s.coeffs, &mut out);
        assert!(max_abs(&out) < 1e-12, "staggered periodic: {}", max_abs(&out));

        let mesh = build_mesh_1d(0.0, 1.0, 4, false).unwrap();
        let dd = Some([BoundaryCondition::dirichlet(), BoundaryCondition::dirichlet()]);
        for op in [
            assemble_staggered_1d(&mesh, 2, 2, FluxParams { alpha: 0.4, beta: 0.5, tau: 0.5 }, 1.0, dd)
                .unwrap(),
            assemble_nonstaggered_1d(&mesh, 2, 2, FluxParams { alpha: 0.4, beta: 0.5, tau: 0.5 }, 1.0, dd)
                .unwrap(),
        ] {
            let s = lin_state(&op, &mesh);
            let mut out = vec![0.0; op.layout.total];
            op.apply_linear(&s.coeffs, &mut out);
            assert!(max_abs(&out) < 1e-12, "bounded dirichlet: {}", max_abs(&out));
        }
    }

    #[test]
    fn residual_against_smooth_solution_decays() {
        let resid = |n: usize| {
            let mesh = build_mesh_1d(-1.0, 1.0, n, true).unwrap();
            let op = assemble_staggered_1d(&mesh, 3, 2, FluxParams::central(), 1.0, None).unwrap();
            let w = 2.0 * std::f64::consts::PI;
            let state = op.project_initial_data(
                &move |x: &[f64]| (w * x[0]).sin(),
                &move |x: &[f64]| w * (w * x[0]).cos(),
            );
            let mut out = vec![0.0; op.layout.total];
            op.apply_linear(&state.coeffs, &mut out);
            // dv/dt should approximate u_xx = -w^2 sin(w x)
            let d = DgState { coeffs: out, time: 0.0 };
            let (_, ev) = op.l2_error(
                &d,
                &|_: &[f64]| 0.0,
                &move |x: &[f64]| -w * w * (w * x[0]).sin(),
            );
            ev
        };
        let (e1, e2) = (resid(10), resid(20));
        let rate = (e1 / e2).log2();
        assert!(rate > 1.8, "residual rate {rate} too low ({e1} -> {e2})");
    }
}
