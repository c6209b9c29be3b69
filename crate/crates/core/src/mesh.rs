//! Primal/dual staggered meshes and the global degree-of-freedom layout.
//!
//! Geometry is precomputed into overlap and face lists so that assembly
//! never reasons about wrapping or boundary reductions itself: every
//! volume integral walks `primal_overlaps`/`dual_overlaps` and every flux
//! term walks `primal_faces`/`dual_faces`. Intervals stored with a piece
//! or face are already shifted so they contain it, which makes periodic
//! wrap-around invisible to the consumer.

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Intersection of one primal and one dual element.
///
/// `[a, b]` is the piece itself; `other` is the element on the opposite
/// mesh, and `[other_lo, other_hi]` its interval, shifted by the period if
/// needed so that it contains `[a, b]`.
#[derive(Debug, Clone)]
pub struct OverlapPiece {
    pub other: usize,
    pub a: f64,
    pub b: f64,
    pub other_lo: f64,
    pub other_hi: f64,
}

#[derive(Debug, Clone, Copy)]
pub enum FaceKind {
    /// `left`/`right` are the elements on either side, on the face's own mesh.
    Interior { left: usize, right: usize },
    /// Physical boundary face; `elem` is the single adjacent element.
    Boundary { elem: usize, side: Side },
}

/// A mesh interface. For primal faces, `owner` is the dual element whose
/// (shifted) interval `[owner_lo, owner_hi]` covers the face position, so
/// the single-valued v trace is evaluated there; for dual faces, `owner`
/// is the primal element providing the single-valued u_x trace.
#[derive(Debug, Clone)]
pub struct Face1D {
    pub position: f64,
    pub kind: FaceKind,
    pub owner: usize,
    pub owner_lo: f64,
    pub owner_hi: f64,
}

#[derive(Debug, Clone)]
pub struct StaggeredMesh1D {
    pub x_left: f64,
    pub x_right: f64,
    pub n: usize,
    pub h: f64,
    pub periodic: bool,
    /// x_j = x_left + j h, length n+1.
    pub primal_edges: Vec<f64>,
    /// Periodic: the n primal centers. Bounded: {x_left, centers..., x_right}.
    pub dual_edges: Vec<f64>,
    /// Per primal element, its [left-half, right-half] dual intersections.
    pub primal_overlaps: Vec<[OverlapPiece; 2]>,
    /// Per dual element, its 1 or 2 primal intersections.
    pub dual_overlaps: Vec<Vec<OverlapPiece>>,
    pub primal_faces: Vec<Face1D>,
    pub dual_faces: Vec<Face1D>,
}

impl StaggeredMesh1D {
    pub fn n_dual(&self) -> usize {
        if self.periodic {
            self.n
        } else {
            self.n + 1
        }
    }

    pub fn primal_interval(&self, j: usize) -> (f64, f64) {
        (self.primal_edges[j], self.primal_edges[j + 1])
    }

    /// Dual element interval, unwrapped: the periodic cell 0 comes back as
    /// [rho_0 - h, rho_0], extending below x_left.
    pub fn dual_interval(&self, k: usize) -> (f64, f64) {
        if self.periodic {
            if k == 0 {
                (self.dual_edges[0] - self.h, self.dual_edges[0])
            } else {
                (self.dual_edges[k - 1], self.dual_edges[k])
            }
        } else {
            (self.dual_edges[k], self.dual_edges[k + 1])
        }
    }

    pub fn dual_width(&self, k: usize) -> f64 {
        let (a, b) = self.dual_interval(k);
        b - a
    }
}

pub fn build_mesh_1d(
    x_left: f64,
    x_right: f64,
    n: usize,
    periodic: bool,
) -> Result<StaggeredMesh1D, Error> {
    if n < 2 {
        return Err(Error::TooFewElements(n));
    }
    assert!(x_right > x_left, "empty domain [{x_left}, {x_right}]");
    let h = (x_right - x_left) / n as f64;
    let primal_edges: Vec<f64> = (0..=n).map(|j| x_left + j as f64 * h).collect();
    let centers: Vec<f64> = (0..n).map(|j| 0.5 * (primal_edges[j] + primal_edges[j + 1])).collect();
    let length = x_right - x_left;

    let dual_edges = if periodic {
        centers.clone()
    } else {
        let mut e = Vec::with_capacity(n + 2);
        e.push(x_left);
        e.extend_from_slice(&centers);
        e.push(x_right);
        e
    };

    let mut mesh = StaggeredMesh1D {
        x_left,
        x_right,
        n,
        h,
        periodic,
        primal_edges,
        dual_edges,
        primal_overlaps: Vec::new(),
        dual_overlaps: Vec::new(),
        primal_faces: Vec::new(),
        dual_faces: Vec::new(),
    };

    for j in 0..n {
        let (xl, xr) = mesh.primal_interval(j);
        let c = centers[j];
        // left half sits in dual cell j, right half in dual cell j+1 (wrapped)
        let kl = j;
        let kr = if periodic { (j + 1) % n } else { j + 1 };
        let (mut llo, mut lhi) = mesh.dual_interval(kl);
        if periodic && llo > xl + 1e-14 * h {
            llo -= length;
            lhi -= length;
        }
        let (mut rlo, mut rhi) = mesh.dual_interval(kr);
        if periodic && rhi < xr - 1e-14 * h {
            rlo += length;
            rhi += length;
        }
        mesh.primal_overlaps.push([
            OverlapPiece { other: kl, a: xl, b: c, other_lo: llo, other_hi: lhi },
            OverlapPiece { other: kr, a: c, b: xr, other_lo: rlo, other_hi: rhi },
        ]);
    }

    for k in 0..mesh.n_dual() {
        let (dl, dr) = mesh.dual_interval(k);
        let mut pieces = Vec::with_capacity(2);
        if periodic {
            // [dl, x_k] in primal k-1 (wrapped), [x_k, dr] in primal k
            let jl = (k + n - 1) % n;
            let (mut lo, mut hi) = mesh.primal_interval(jl);
            let split = mesh.primal_edges[k];
            if hi < split - 1e-14 * h {
                lo += length;
                hi += length;
            } else if lo > split + 1e-14 * h {
                lo -= length;
                hi -= length;
            }
            pieces.push(OverlapPiece { other: jl, a: dl, b: split, other_lo: lo, other_hi: hi });
            let (lo, hi) = mesh.primal_interval(k);
            pieces.push(OverlapPiece { other: k, a: split, b: dr, other_lo: lo, other_hi: hi });
        } else if k == 0 {
            let (lo, hi) = mesh.primal_interval(0);
            pieces.push(OverlapPiece { other: 0, a: dl, b: dr, other_lo: lo, other_hi: hi });
        } else if k == n {
            let (lo, hi) = mesh.primal_interval(n - 1);
            pieces.push(OverlapPiece { other: n - 1, a: dl, b: dr, other_lo: lo, other_hi: hi });
        } else {
            let split = mesh.primal_edges[k];
            let (lo, hi) = mesh.primal_interval(k - 1);
            pieces.push(OverlapPiece { other: k - 1, a: dl, b: split, other_lo: lo, other_hi: hi });
            let (lo, hi) = mesh.primal_interval(k);
            pieces.push(OverlapPiece { other: k, a: split, b: dr, other_lo: lo, other_hi: hi });
        }
        mesh.dual_overlaps.push(pieces);
    }

    // primal faces: x_j for j = 0..n (periodic: 0..n-1, all interior)
    let face_range = if periodic { 0..n } else { 0..n + 1 };
    for j in face_range {
        let position = mesh.primal_edges[j];
        let kind = if periodic {
            FaceKind::Interior { left: (j + n - 1) % n, right: j }
        } else if j == 0 {
            FaceKind::Boundary { elem: 0, side: Side::Left }
        } else if j == n {
            FaceKind::Boundary { elem: n - 1, side: Side::Right }
        } else {
            FaceKind::Interior { left: j - 1, right: j }
        };
        let owner = if periodic || j < n { j } else { n };
        let (mut lo, mut hi) = mesh.dual_interval(owner);
        if periodic && j == 0 && lo > position + 1e-14 * h {
            lo -= length;
            hi -= length;
        }
        mesh.primal_faces.push(Face1D { position, kind, owner, owner_lo: lo, owner_hi: hi });
    }

    // dual faces: centers rho_k (interior), plus the domain endpoints when bounded
    if !periodic {
        let (lo, hi) = mesh.primal_interval(0);
        mesh.dual_faces.push(Face1D {
            position: x_left,
            kind: FaceKind::Boundary { elem: 0, side: Side::Left },
            owner: 0,
            owner_lo: lo,
            owner_hi: hi,
        });
    }
    for k in 0..n {
        let position = centers[k];
        let (left, right) = if periodic {
            (k, (k + 1) % n)
        } else {
            (k, k + 1)
        };
        let (lo, hi) = mesh.primal_interval(k);
        mesh.dual_faces.push(Face1D {
            position,
            kind: FaceKind::Interior { left, right },
            owner: k,
            owner_lo: lo,
            owner_hi: hi,
        });
    }
    if !periodic {
        let (lo, hi) = mesh.primal_interval(n - 1);
        mesh.dual_faces.push(Face1D {
            position: x_right,
            kind: FaceKind::Boundary { elem: n, side: Side::Right },
            owner: n - 1,
            owner_lo: lo,
            owner_hi: hi,
        });
    }

    check_mesh_geometry(&mesh);
    Ok(mesh)
}

/// Interior faces must sit strictly inside their owner on the other mesh:
/// this is what makes v single-valued at primal faces and u_x single-valued
/// at dual faces.
fn check_mesh_geometry(mesh: &StaggeredMesh1D) {
    let tol = mesh.h * 1e-12;
    for f in &mesh.primal_faces {
        if matches!(f.kind, FaceKind::Interior { .. }) {
            assert!(
                f.position > f.owner_lo + tol && f.position < f.owner_hi - tol,
                "primal face at {} not interior to dual cell {}",
                f.position,
                f.owner
            );
        }
    }
    for f in &mesh.dual_faces {
        if matches!(f.kind, FaceKind::Interior { .. }) {
            assert!(
                f.position > f.owner_lo + tol && f.position < f.owner_hi - tol,
                "dual face at {} not interior to primal element {}",
                f.position,
                f.owner
            );
        }
    }
    let covered: f64 = (0..mesh.n_dual()).map(|k| mesh.dual_width(k)).sum();
    assert!(
        (covered - (mesh.x_right - mesh.x_left)).abs() < 1e-13 * (mesh.x_right - mesh.x_left),
        "dual cells do not tile the domain"
    );
}

/// Tensor-product staggered mesh on [-1, 1]^2: n x n primal cells and
/// (n+1) x (n+1) dual cells, built as the product of one bounded 1D mesh
/// per direction (both directions identical).
#[derive(Debug, Clone)]
pub struct StaggeredMesh2D {
    pub n: usize,
    pub h: f64,
    pub line: StaggeredMesh1D,
}

impl StaggeredMesh2D {
    pub fn n_primal(&self) -> usize {
        self.n * self.n
    }

    pub fn n_dual(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    pub fn primal_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n + ix
    }

    pub fn dual_index(&self, kx: usize, ky: usize) -> usize {
        ky * (self.n + 1) + kx
    }

    /// (x0, x1, y0, y1) of a primal cell.
    pub fn primal_cell(&self, ix: usize, iy: usize) -> (f64, f64, f64, f64) {
        let (x0, x1) = self.line.primal_interval(ix);
        let (y0, y1) = self.line.primal_interval(iy);
        (x0, x1, y0, y1)
    }

    /// (x0, x1, y0, y1) of a dual cell; boundary cells are the reduced ones.
    pub fn dual_cell(&self, kx: usize, ky: usize) -> (f64, f64, f64, f64) {
        let (x0, x1) = self.line.dual_interval(kx);
        let (y0, y1) = self.line.dual_interval(ky);
        (x0, x1, y0, y1)
    }

    pub fn dual_area(&self, kx: usize, ky: usize) -> f64 {
        self.line.dual_width(kx) * self.line.dual_width(ky)
    }
}

pub fn build_mesh_2d(n: usize) -> Result<StaggeredMesh2D, Error> {
    let line = build_mesh_1d(-1.0, 1.0, n, false)?;
    let mesh = StaggeredMesh2D { n, h: line.h, line };
    let total: f64 = (0..=n)
        .flat_map(|kx| (0..=n).map(move |ky| (kx, ky)))
        .map(|(kx, ky)| mesh.dual_area(kx, ky))
        .sum();
    assert!((total - 4.0).abs() < 1e-13 * 4.0, "dual cells do not tile the square");
    Ok(mesh)
}

/// Global coefficient layout: all u elements first, then all v elements,
/// each holding its modal coefficients contiguously (graded lexicographic
/// order within 2D elements, so the cell average leads).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofLayout {
    pub n_u_elems: usize,
    pub u_modes: usize,
    pub n_v_elems: usize,
    pub v_modes: usize,
    pub total: usize,
}

impl DofLayout {
    pub fn new(n_u_elems: usize, u_modes: usize, n_v_elems: usize, v_modes: usize) -> Self {
        Self {
            n_u_elems,
            u_modes,
            n_v_elems,
            v_modes,
            total: n_u_elems * u_modes + n_v_elems * v_modes,
        }
    }

    pub fn u_dofs(&self) -> usize {
        self.n_u_elems * self.u_modes
    }

    pub fn u_range(&self, e: usize) -> std::ops::Range<usize> {
        e * self.u_modes..(e + 1) * self.u_modes
    }

    pub fn v_range(&self, e: usize) -> std::ops::Range<usize> {
        let start = self.u_dofs() + e * self.v_modes;
        start..start + self.v_modes
    }

    /// One cell-average index per primal element.
    pub fn w0_indices(&self) -> Vec<usize> {
        (0..self.n_u_elems).map(|e| e * self.u_modes).collect()
    }

    /// Everything except the u cell averages.
    pub fn w1_indices(&self) -> Vec<usize> {
        (0..self.total).filter(|i| i >= &self.u_dofs() || i % self.u_modes != 0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn periodic_dual_edges_are_centers() {
        let m = build_mesh_1d(-1.0, 1.0, 4, true).unwrap();
        assert_eq!(m.dual_edges, vec![-0.75, -0.25, 0.25, 0.75]);
        assert_eq!(m.n_dual(), 4);
        // wrapped cell 0 spans [-1.25, -0.75] and contains the x_0 face
        let (lo, hi) = m.dual_interval(0);
        assert_abs_diff_eq!(lo, -1.25);
        assert_abs_diff_eq!(hi, -0.75);
    }

    #[test]
    fn bounded_dual_counts_and_end_widths() {
        let m = build_mesh_1d(-1.0, 1.5, 10, false).unwrap();
        assert_eq!(m.n, 10);
        assert_eq!(m.n_dual(), 11);
        assert_abs_diff_eq!(m.h, 0.25);
        assert_abs_diff_eq!(m.dual_width(0), 0.125);
        assert_abs_diff_eq!(m.dual_width(10), 0.125);
        for k in 1..10 {
            assert_abs_diff_eq!(m.dual_width(k), 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn small_bounded_dual_edges() {
        let m = build_mesh_1d(0.0, 1.0, 2, false).unwrap();
        assert_eq!(m.dual_edges, vec![0.0, 0.25, 0.75, 1.0]);
    }

    #[test]
    fn rejects_single_element() {
        assert!(build_mesh_1d(0.0, 1.0, 1, false).is_err());
        assert!(build_mesh_2d(1).is_err());
    }

    #[test]
    fn overlaps_tile_each_element() {
        for periodic in [false, true] {
            let m = build_mesh_1d(-1.0, 1.5, 7, periodic).unwrap();
            for j in 0..m.n {
                let (a, b) = m.primal_interval(j);
                let pieces = &m.primal_overlaps[j];
                assert_abs_diff_eq!(pieces[0].a, a);
                assert_abs_diff_eq!(pieces[0].b, pieces[1].a);
                assert_abs_diff_eq!(pieces[1].b, b);
                for p in pieces {
                    assert!(p.other_lo <= p.a + 1e-13 && p.b <= p.other_hi + 1e-13);
                }
            }
            for k in 0..m.n_dual() {
                let (a, b) = m.dual_interval(k);
                let pieces = &m.dual_overlaps[k];
                let total: f64 = pieces.iter().map(|p| p.b - p.a).sum();
                assert_abs_diff_eq!(total, b - a, epsilon = 1e-13);
                for p in pieces {
                    assert!(p.other_lo <= p.a + 1e-13 && p.b <= p.other_hi + 1e-13);
                }
            }
        }
    }

    #[test]
    fn face_counts() {
        let m = build_mesh_1d(-1.0, 1.0, 6, true).unwrap();
        assert_eq!(m.primal_faces.len(), 6);
        assert_eq!(m.dual_faces.len(), 6);
        assert!(m.primal_faces.iter().all(|f| matches!(f.kind, FaceKind::Interior { .. })));

        let m = build_mesh_1d(-1.0, 1.0, 6, false).unwrap();
        assert_eq!(m.primal_faces.len(), 7);
        assert_eq!(m.dual_faces.len(), 8);
        let boundary = m
            .dual_faces
            .iter()
            .filter(|f| matches!(f.kind, FaceKind::Boundary { .. }))
            .count();
        assert_eq!(boundary, 2);
    }

    #[test]
    fn mesh_2d_counts_and_areas() {
        let m = build_mesh_2d(3).unwrap();
        assert_eq!(m.n_primal(), 9);
        assert_eq!(m.n_dual(), 16);
        let h = m.h;
        let mut interior = 0;
        let mut edge = 0;
        let mut corner = 0;
        for kx in 0..=3 {
            for ky in 0..=3 {
                let a = m.dual_area(kx, ky);
                if (a - h * h).abs() < 1e-14 {
                    interior += 1;
                } else if (a - 0.5 * h * h).abs() < 1e-14 {
                    edge += 1;
                } else if (a - 0.25 * h * h).abs() < 1e-14 {
                    corner += 1;
                }
            }
        }
        assert_eq!((interior, edge, corner), (4, 8, 4));

        let m = build_mesh_2d(2).unwrap();
        assert_eq!((m.n_primal(), m.n_dual()), (4, 9));
        let m = build_mesh_2d(10).unwrap();
        assert_eq!((m.n_primal(), m.n_dual()), (100, 121));
    }

    #[test]
    fn layout_partition() {
        let l = DofLayout::new(4, 3, 5, 2);
        assert_eq!(l.total, 22);
        assert_eq!(l.w0_indices(), vec![0, 3, 6, 9]);
        let w1 = l.w1_indices();
        assert_eq!(w1.len() + 4, l.total);
        let mut all: Vec<usize> = l.w0_indices();
        all.extend(&w1);
        all.sort_unstable();
        assert_eq!(all, (0..22).collect::<Vec<_>>());
        assert_eq!(l.u_range(1), 3..6);
        assert_eq!(l.v_range(0), 12..14);
    }
}
