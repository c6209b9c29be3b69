//! Modal Legendre machinery on the reference interval [-1, 1]: polynomial
//! evaluation and differentiation, Gauss quadrature, and the tabulated
//! per-degree data shared by all assembly code.
//!
//! The basis is the un-normalized Legendre family, P_n(1) = 1, so the
//! reference mass matrix is diagonal with entries 2/(2n+1) and edge values
//! are exactly (-1)^n and 1.

use nalgebra::DMatrix;

/// How far outside [-1, 1] an evaluation point may sit before we treat it
/// as a bug rather than roundoff.
const EDGE_SLACK: f64 = 1e-12;

fn clamp_reference(x: f64) -> f64 {
    debug_assert!(
        x.abs() <= 1.0 + EDGE_SLACK,
        "evaluation point {x} outside the reference interval"
    );
    x.clamp(-1.0, 1.0)
}

/// P_degree(x) by the three-term recurrence.
///
/// `x` may overshoot the interval by up to 1e-12 and is clamped.
pub fn legendre_eval(degree: usize, x: f64) -> f64 {
    let x = clamp_reference(x);
    let (mut prev, mut cur) = (1.0, x);
    if degree == 0 {
        return prev;
    }
    for n in 1..degree {
        let next = ((2 * n + 1) as f64 * x * cur - n as f64 * prev) / (n + 1) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// Values of P_0 .. P_degree at x.
pub fn legendre_values(degree: usize, x: f64) -> Vec<f64> {
    let x = clamp_reference(x);
    let mut p = vec![0.0; degree + 1];
    p[0] = 1.0;
    if degree >= 1 {
        p[1] = x;
    }
    for n in 1..degree {
        p[n + 1] = ((2 * n + 1) as f64 * x * p[n] - n as f64 * p[n - 1]) / (n + 1) as f64;
    }
    p
}

/// Values and first derivatives of P_0 .. P_degree at x.
///
/// Derivatives use P'_{n+1} = P'_{n-1} + (2n+1) P_n, which stays exact at
/// the interval endpoints.
pub fn legendre_values_d1(degree: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let p = legendre_values(degree, x);
    let mut d = vec![0.0; degree + 1];
    if degree >= 1 {
        d[1] = 1.0;
    }
    for n in 1..degree {
        d[n + 1] = d[n - 1] + (2 * n + 1) as f64 * p[n];
    }
    (p, d)
}

/// Values, first and second derivatives of P_0 .. P_degree at x.
pub fn legendre_values_d2(degree: usize, x: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (p, d) = legendre_values_d1(degree, x);
    let mut dd = vec![0.0; degree + 1];
    for n in 1..degree {
        dd[n + 1] = dd[n - 1] + (2 * n + 1) as f64 * d[n];
    }
    (p, d, dd)
}

/// Gauss-Legendre rule with m nodes on [-1, 1]; integrates polynomials of
/// degree 2m-1 exactly. Newton iteration on P_m from Chebyshev initial
/// guesses, tolerance 1e-15, at most 100 sweeps (4-6 in practice).
pub fn gauss_rule(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1, "quadrature rule needs at least one node");
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        // i = 0 starts nearest +1; mirror once converged.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            let p = legendre_values(m, x);
            // interior nodes only, so the (x^2 - 1) form of P'_m is safe
            dp = m as f64 * (x * p[m] - p[m - 1]) / (x * x - 1.0);
            let step = p[m] / dp;
            x -= step;
            if step.abs() <= 1e-15 {
                converged = true;
                break;
            }
        }
        debug_assert!(converged, "Gauss node {i} of {m} did not converge");
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[m - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

/// Sum of c_n P_n(x) at each point.
pub fn eval_at(coeffs: &[f64], points: &[f64]) -> Vec<f64> {
    let degree = coeffs.len().saturating_sub(1);
    points
        .iter()
        .map(|&x| {
            let p = legendre_values(degree, x);
            coeffs.iter().zip(&p).map(|(c, v)| c * v).sum()
        })
        .collect()
}

/// Modal coefficients of dp/dx given modal coefficients of p; the degree
/// drops by one. Uses P'_n = sum over k < n, n-k odd, of (2k+1) P_k.
pub fn modal_derivative(coeffs: &[f64]) -> Vec<f64> {
    if coeffs.len() <= 1 {
        return vec![0.0];
    }
    let mut out = vec![0.0; coeffs.len() - 1];
    for (k, o) in out.iter_mut().enumerate() {
        let mut sum = 0.0;
        let mut n = k + 1;
        while n < coeffs.len() {
            sum += coeffs[n];
            n += 2;
        }
        *o = (2 * k + 1) as f64 * sum;
    }
    out
}

/// Tensor-product mode pairs (a, b), 0 <= a, b <= q, in graded
/// lexicographic order: sorted by a+b, ties by a. The constant mode (0, 0)
/// comes first, so a cell's average coefficient is always the leading one.
pub fn tensor_indices(q: usize) -> Vec<(usize, usize)> {
    let mut idx = Vec::with_capacity((q + 1) * (q + 1));
    for total in 0..=2 * q {
        for a in total.saturating_sub(q)..=total.min(q) {
            idx.push((a, total - a));
        }
    }
    idx
}

/// Tabulated modal Legendre data for one degree and one Gauss rule.
#[derive(Debug, Clone)]
pub struct ReferenceBasis {
    pub degree: usize,
    pub quad_nodes: Vec<f64>,
    pub quad_weights: Vec<f64>,
    /// vandermonde[(p, j)] = P_j at quadrature node p.
    pub vandermonde: DMatrix<f64>,
    /// vandermonde_deriv[(p, j)] = P'_j at quadrature node p.
    pub vandermonde_deriv: DMatrix<f64>,
    /// P_j(-1) = (-1)^j.
    pub edge_values_left: Vec<f64>,
    /// P_j(1) = 1.
    pub edge_values_right: Vec<f64>,
    /// Reference mass diagonal 2/(2j+1).
    pub mass_diagonal: Vec<f64>,
}

impl ReferenceBasis {
    pub fn new(degree: usize, quad_size: usize) -> Self {
        let (quad_nodes, quad_weights) = gauss_rule(quad_size);
        let mut vandermonde = DMatrix::zeros(quad_size, degree + 1);
        let mut vandermonde_deriv = DMatrix::zeros(quad_size, degree + 1);
        for (p, &x) in quad_nodes.iter().enumerate() {
            let (vals, ders) = legendre_values_d1(degree, x);
            for j in 0..=degree {
                vandermonde[(p, j)] = vals[j];
                vandermonde_deriv[(p, j)] = ders[j];
            }
        }
        let edge_values_left = (0..=degree).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let edge_values_right = vec![1.0; degree + 1];
        let mass_diagonal = (0..=degree).map(|j| 2.0 / (2 * j + 1) as f64).collect();
        Self {
            degree,
            quad_nodes,
            quad_weights,
            vandermonde,
            vandermonde_deriv,
            edge_values_left,
            edge_values_right,
            mass_diagonal,
        }
    }
}
