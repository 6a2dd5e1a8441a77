//! Restarted GMRes and the preconditioner comparison on modal operators.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::modal::{build_operator, synthetic_rhs, ModalError, ModalGrid, ModalOperator, RhsModel, Variant};
use crate::symbols::MediaPair;

/// Reorthogonalize when Gram–Schmidt removes more than this share of a vector's norm.
const REORTH_RATIO: f64 = 0.7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KrylovError {
    #[error(transparent)]
    Modal(#[from] ModalError),
    #[error("right-hand side has length {got}, operator dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("right-hand side is zero")]
    ZeroRhs,
    #[error("restart length must be at least 1")]
    InvalidRestart,
}

/// Square linear map applied to complex vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]);
}

impl LinearOperator for ModalOperator {
    fn dim(&self) -> usize {
        self.dimension()
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        ModalOperator::apply_into(self, x, y).expect("lengths checked by the solver");
    }
}

impl LinearOperator for crate::linalg::DenseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.matvec_into(x, y);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GmresConfig {
    pub restart: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            restart: 20,
            tol: 1e-8,
            max_iter: 2000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GmresReport {
    pub iterations: usize,
    pub converged: bool,
    /// Relative residual from the least-squares recurrence, starting at 1.
    pub residual_history: Vec<f64>,
    pub restart: usize,
    pub tolerance: f64,
    /// Explicit `‖b - A x‖ / ‖b‖` for the returned solution.
    pub final_residual: f64,
    /// Largest `|⟨vᵢ, vⱼ⟩ - δᵢⱼ|` over the Krylov bases of all cycles.
    pub max_gram_defect: f64,
    /// Largest gap between recurrence and explicit relative residuals at restarts.
    pub max_residual_gap: f64,
    pub reorthogonalizations: usize,
    #[serde(skip)]
    pub solution: Vec<Complex64>,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn residual(op: &dyn LinearOperator, b: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
    let mut ax = vec![Complex64::default(); b.len()];
    op.apply_into(x, &mut ax);
    b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
}

/// Complex Givens rotation `[c s; -s̄ c]` zeroing `b` in `(a, b)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, Complex64::default());
    }
    if na == 0.0 {
        return (0.0, (b / nb).conj());
    }
    let r = na.hypot(nb);
    let phase = a / na;
    (na / r, phase * b.conj() / r)
}

fn gram_defect(basis: &[Vec<Complex64>]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..basis.len() {
        for j in 0..=i {
            let g = dot(&basis[i], &basis[j]);
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    worst
}

/// GMRes(`restart`) from a zero initial guess.
pub fn gmres(op: &dyn LinearOperator, rhs: &[Complex64], config: &GmresConfig) -> Result<GmresReport, KrylovError> {
    let dim = op.dim();
    if rhs.len() != dim {
        return Err(KrylovError::DimensionMismatch { expected: dim, got: rhs.len() });
    }
    if config.restart == 0 {
        return Err(KrylovError::InvalidRestart);
    }
    let b_norm = norm(rhs);
    if b_norm == 0.0 {
        return Err(KrylovError::ZeroRhs);
    }
    let m = config.restart;
    let mut x = vec![Complex64::default(); dim];
    let mut r = rhs.to_vec();
    let mut beta = b_norm;
    let mut history = vec![1.0];
    let mut iterations = 0;
    let mut max_gram_defect = 0.0f64;
    let mut max_residual_gap = 0.0f64;
    let mut reorthogonalizations = 0;
    let mut final_residual = 1.0;

    while final_residual > config.tol && iterations < config.max_iter {
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|z| z / beta).collect());
        // Column-major Hessenberg, already rotated to upper triangular form.
        let mut h: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(m);
        let mut g = vec![Complex64::default(); m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut w = vec![Complex64::default(); dim];
        let mut k = 0;
        while k < m && iterations < config.max_iter {
            op.apply_into(&basis[k], &mut w);
            iterations += 1;
            let before = norm(&w);
            let mut col = vec![Complex64::default(); k + 2];
            for (i, v) in basis.iter().enumerate() {
                col[i] = dot(v, &w);
                axpy(-col[i], v, &mut w);
            }
            let mut after = norm(&w);
            if after < REORTH_RATIO * before {
                reorthogonalizations += 1;
                for (i, v) in basis.iter().enumerate() {
                    let corr = dot(v, &w);
                    col[i] += corr;
                    axpy(-corr, v, &mut w);
                }
                after = norm(&w);
            }
            col[k + 1] = Complex64::new(after, 0.0);
            for (i, &(c, s)) in rotations.iter().enumerate() {
                let (a, bb) = (col[i], col[i + 1]);
                col[i] = a * c + s * bb;
                col[i + 1] = -s.conj() * a + bb * c;
            }
            let (c, s) = givens(col[k], col[k + 1]);
            col[k] = col[k] * c + s * col[k + 1];
            col[k + 1] = Complex64::default();
            g[k + 1] = -s.conj() * g[k];
            g[k] *= c;
            rotations.push((c, s));
            h.push(col);
            k += 1;
            let rel = g[k].norm() / b_norm;
            history.push(rel);
            let breakdown = after <= 1e-14 * before.max(f64::MIN_POSITIVE);
            if rel <= config.tol || breakdown {
                break;
            }
            basis.push(w.iter().map(|z| z / after).collect());
        }
        // Back substitution on the triangular factor.
        let mut y = vec![Complex64::default(); k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for j in i + 1..k {
                acc -= h[j][i] * y[j];
            }
            y[i] = acc / h[i][i];
        }
        for (yi, v) in y.iter().zip(&basis) {
            axpy(*yi, v, &mut x);
        }
        max_gram_defect = max_gram_defect.max(gram_defect(&basis[..basis.len().min(k)]));
        r = residual(op, rhs, &x);
        beta = norm(&r);
        final_residual = beta / b_norm;
        let recurrence = *history.last().expect("history is never empty");
        max_residual_gap = max_residual_gap.max((final_residual - recurrence).abs());
        if beta == 0.0 {
            break;
        }
    }

    Ok(GmresReport {
        iterations,
        converged: final_residual <= config.tol,
        residual_history: history,
        restart: m,
        tolerance: config.tol,
        final_residual,
        max_gram_defect,
        max_residual_gap,
        reorthogonalizations,
        solution: x,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareConfig {
    pub gmres: GmresConfig,
    pub model: RhsModel,
    pub seed: u64,
    pub with_multiplicity: bool,
    pub variants: Vec<Variant>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            gmres: GmresConfig::default(),
            model: RhsModel::MieLike,
            seed: 42,
            with_multiplicity: false,
            variants: vec![Variant::Mtf, Variant::Mtf2, Variant::Bmtf, Variant::Stf2],
        }
    }
}

/// Solves the normalized, norm-weighted system of each variant for the same data.
pub fn precond_compare(
    media: &MediaPair,
    n_max: usize,
    config: &CompareConfig,
) -> Result<Vec<(Variant, GmresReport)>, KrylovError> {
    let grid = ModalGrid::new(1, n_max, config.with_multiplicity)?;
    let data = synthetic_rhs(media, &grid, config.model, config.seed)?;
    config
        .variants
        .iter()
        .map(|&variant| {
            let op = build_operator(variant, media, grid, true)?.norm_weighted();
            let rhs = op.system_rhs(&data)?;
            Ok((variant, gmres(&op, &rhs, &config.gmres)?))
        })
        .collect()
}
