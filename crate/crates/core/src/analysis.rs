//! Spectral diagnostics for the discrete wave operators.
//!
//! Turns a time stepper into a dense one-step matrix, reports eigenvalue
//! moduli, measures the spectral radius of the semi-discrete generator on
//! the nonconstant block, and compares the measured operator norm with the
//! degree-explicit analytic bounds.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use rayon::prelude::*;

use crate::operator::{DgState, FluxParams, MeshShape, Scheme, SemiDiscreteOperator};
use crate::timeint::{lts_step, taylor_step, LtsConfig, TaylorScheme};
use crate::Error;

/// Largest state dimension for which dense matrices are assembled.
pub const DENSE_GUARD: usize = 20_000;

/// Time stepper whose one-step action gets expressed as a matrix.
#[derive(Debug, Clone)]
pub enum StepperConfig {
    Taylor(TaylorScheme),
    Lts { lts: LtsConfig, dt: f64 },
}

/// Dense matrix advancing the homogeneous system by one full step.
#[derive(Debug, Clone)]
pub struct OneStepMatrix {
    pub b: DMatrix<f64>,
    pub scheme: Scheme,
    pub shape: MeshShape,
    pub q_u: usize,
    pub q_v: usize,
}

/// Eigenvalue moduli sorted largest first.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Entries (rank, |lambda|, 1 - |lambda|).
    pub entries: Vec<(usize, f64, f64)>,
    pub spectral_radius: f64,
    /// Spectral radius minus one; positive means some mode grows per step.
    pub max_growth: f64,
}

fn guard(dim: usize) -> Result<(), Error> {
    if dim > DENSE_GUARD {
        return Err(Error::DenseSizeGuard { dim, limit: DENSE_GUARD });
    }
    Ok(())
}

/// Expresses one application of the stepper as a dense matrix by advancing
/// every unit state. Forcing carried by the operator is cancelled by
/// subtracting the image of the zero state, so the columns describe the
/// homogeneous problem.
pub fn build_one_step_matrix(
    stepper: &StepperConfig,
    op: &SemiDiscreteOperator,
) -> Result<OneStepMatrix, Error> {
    let dim = op.layout.total;
    guard(dim)?;
    let step = |x: Vec<f64>| -> Vec<f64> {
        let state = DgState { coeffs: x, time: 0.0 };
        match stepper {
            StepperConfig::Taylor(scheme) => taylor_step(op, &state, scheme).coeffs,
            StepperConfig::Lts { lts, dt } => lts_step(op, &state, lts, *dt).coeffs,
        }
    };
    let drift = step(vec![0.0; dim]);
    let mut b = DMatrix::zeros(dim, dim);
    b.as_mut_slice()
        .par_chunks_mut(dim)
        .enumerate()
        .for_each(|(k, col)| {
            let mut x = vec![0.0; dim];
            x[k] = 1.0;
            let out = step(x);
            for i in 0..dim {
                col[i] = out[i] - drift[i];
            }
        });
    Ok(OneStepMatrix {
        b,
        scheme: op.scheme,
        shape: op.shape.clone(),
        q_u: op.q_u,
        q_v: op.q_v,
    })
}

fn dense_eigenvalues(d: &DMatrix<f64>) -> Result<Vec<Complex<f64>>, Error> {
    let n = d.nrows();
    assert_eq!(n, d.ncols(), "eigenvalues need a square matrix");
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = faer::Mat::from_fn(n, n, |i, j| d[(i, j)]);
    m.eigenvalues().map_err(|_| Error::EigenFailure)
}

/// All eigenvalue moduli of a dense matrix, sorted descending.
pub fn eig_moduli(b: &DMatrix<f64>) -> Result<SpectrumReport, Error> {
    let eig = dense_eigenvalues(b)?;
    let mut moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let entries: Vec<(usize, f64, f64)> = moduli
        .iter()
        .enumerate()
        .map(|(i, &m)| (i, m, 1.0 - m))
        .collect();
    let rho = moduli.first().copied().unwrap_or(0.0);
    Ok(SpectrumReport {
        entries,
        spectral_radius: rho,
        max_growth: rho - 1.0,
    })
}

/// Dense restriction of the semi-discrete generator to the nonconstant
/// block, with the mass inverse applied.
pub fn w1_block_matrix(op: &SemiDiscreteOperator) -> Result<DMatrix<f64>, Error> {
    let w1 = op.layout.w1_indices();
    guard(w1.len())?;
    let dim = op.layout.total;
    let nw = w1.len();
    let mut d = DMatrix::zeros(nw, nw);
    d.as_mut_slice()
        .par_chunks_mut(nw)
        .zip(w1.par_iter())
        .for_each(|(col, &gk)| {
            let mut x = vec![0.0; dim];
            x[gk] = 1.0;
            let mut out = vec![0.0; dim];
            op.apply_linear(&x, &mut out);
            for (r, &gi) in w1.iter().enumerate() {
                col[r] = out[gi];
            }
        });
    Ok(d)
}

/// Largest eigenvalue modulus of the semi-discrete generator on the
/// nonconstant block.
pub fn spectral_radius_semidiscrete(op: &SemiDiscreteOperator) -> Result<f64, Error> {
    let d = w1_block_matrix(op)?;
    let eig = dense_eigenvalues(&d)?;
    Ok(eig.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Outcome of comparing the measured generator norm with the analytic bound.
#[derive(Debug, Clone, Copy)]
pub struct BoundCheck {
    pub measured: f64,
    pub bound: f64,
    pub satisfied: bool,
}

fn sym_sqrt(g: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let se = SymmetricEigen::new(g.clone());
    let n = g.nrows();
    let mut half = DMatrix::zeros(n, n);
    let mut inv_half = DMatrix::zeros(n, n);
    for i in 0..n {
        let r = se.eigenvalues[i].max(0.0).sqrt();
        assert!(r > 0.0, "gradient Gram block must be positive definite");
        half[(i, i)] = r;
        inv_half[(i, i)] = 1.0 / r;
    }
    let q = &se.eigenvectors;
    (q * &half * q.transpose(), q * &inv_half * q.transpose())
}

/// Degree-explicit analytic bound on the energy-norm of the generator.
pub fn operator_norm_bound(
    scheme: Scheme,
    q_u: usize,
    q_v: usize,
    flux: &FluxParams,
    c: f64,
    h: f64,
) -> f64 {
    let qu = q_u as f64;
    let qv = q_v as f64;
    let pen = (c * flux.beta * qu * qu).max(flux.tau / c * (qv + 1.0) * (qv + 1.0));
    match scheme {
        Scheme::Staggered => {
            let c35 = (8.0 * 3.0f64.sqrt() + 4.0) / 3.0;
            let c45 = 128.0 / (3.0f64.sqrt() * std::f64::consts::PI);
            let c5 = 4.0;
            c / h * (c35 * (qu + qv - 1.0) + c45 * (qu * (qv + 1.0)).sqrt() + c5 * pen)
        }
        Scheme::NonStaggered => {
            let c1 = 2.0 * 3.0f64.sqrt();
            let c2 = 2.0;
            let skew = flux.alpha.abs() + (1.0 - flux.alpha).abs();
            c1 * c / h * ((qu - 1.0) * (qu - 1.0)).max(qv * qv)
                + c2 * c / h * (2.0 * pen + skew * (qv + 1.0) * qu)
        }
    }
}

/// Measures the energy-norm of the generator as the largest singular value
/// of the mass-scaled nonconstant block and compares it with the analytic
/// bound. A violation is reported in the result, not raised.
pub fn check_operator_bounds(
    op: &SemiDiscreteOperator,
    q_u: usize,
    q_v: usize,
    flux: FluxParams,
    c: f64,
    h: f64,
) -> Result<BoundCheck, Error> {
    let d = w1_block_matrix(op)?;
    let n = d.nrows();
    let mut s = DMatrix::zeros(n, n);
    let mut s_inv = DMatrix::zeros(n, n);
    let mu = op.layout.u_modes - 1;
    let mut off = 0usize;
    for e in 0..op.layout.n_u_elems {
        let (gh, gih) = sym_sqrt(op.u_gram(e));
        s.view_mut((off, off), (mu, mu)).copy_from(&gh);
        s_inv.view_mut((off, off), (mu, mu)).copy_from(&gih);
        off += mu;
    }
    for &m in op.v_mass_diag() {
        let r = m.sqrt();
        s[(off, off)] = r;
        s_inv[(off, off)] = 1.0 / r;
        off += 1;
    }
    assert_eq!(off, n, "scaling blocks must tile the nonconstant block");
    let t = &s * &d * &s_inv;
    let measured = t.singular_values().iter().cloned().fold(0.0, f64::max);
    let bound = operator_norm_bound(op.scheme, q_u, q_v, &flux, c, h);
    Ok(BoundCheck {
        measured,
        bound,
        satisfied: measured <= bound,
    })
}
