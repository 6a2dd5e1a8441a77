//! Mode symbols of the boundary integral operators on the unit sphere.
//!
//! On the vector spherical harmonics of degree `n` every operator of the local
//! multi-trace formulation acts as a small complex matrix: 2x2 for the
//! single/double layer parts, 4x4 for a Calderón operator `A`, 8x8 for the
//! multi-trace operator and its preconditioned products. This module builds
//! those matrices, their `n → ∞` limits and the closed-form accumulation points.
//!
//! Trace ordering inside a 4-vector is `(u∥, u×, p∥, p×)`; an 8-vector stacks the
//! exterior-side tuple before the interior-side one.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, DenseMatrix, LinalgError};
use crate::specfun::{riccati_table, RiccatiTable, ScaledProducts, SpecfunError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);
/// Points closer than this are reported once.
const DEDUP_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error("single-trace symbol is numerically singular at n = {n}: {source}")]
    SingularStf { n: usize, source: LinalgError },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid medium: {0}")]
    InvalidMedium(String),
    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
}

/// Material parameters of one subdomain, in vacuum-relative units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub epsilon: f64,
    pub mu: f64,
    pub omega: f64,
    pub kappa: f64,
}

impl Medium {
    /// Medium whose wavenumber is `omega * sqrt(mu * epsilon)`.
    pub fn from_physical(epsilon: f64, mu: f64, omega: f64) -> Result<Self, SymbolError> {
        Self::with_wavenumber(epsilon, mu, omega, omega * (mu * epsilon).sqrt())
    }

    /// Medium with a wavenumber stored verbatim (e.g. a rounded table value).
    pub fn with_wavenumber(epsilon: f64, mu: f64, omega: f64, kappa: f64) -> Result<Self, SymbolError> {
        for (name, v) in [("epsilon", epsilon), ("mu", mu), ("omega", omega), ("kappa", kappa)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SymbolError::InvalidMedium(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            epsilon,
            mu,
            omega,
            kappa,
        })
    }

    /// `sqrt(mu / epsilon)`, the factor in front of `V` in the scaled Calderón operator.
    pub fn impedance(&self) -> f64 {
        (self.mu / self.epsilon).sqrt()
    }

    pub fn omega_mu(&self) -> f64 {
        self.omega * self.mu
    }

    pub fn omega_epsilon(&self) -> f64 {
        self.omega * self.epsilon
    }
}

/// Exterior (`outer`, j = 0) and interior (`inner`, j = 1) media.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediaPair {
    pub outer: Medium,
    pub inner: Medium,
}

impl MediaPair {
    pub fn new(outer: Medium, inner: Medium) -> Result<Self, SymbolError> {
        if (outer.omega - inner.omega).abs() > 1e-12 * outer.omega.max(inner.omega) {
            return Err(SymbolError::InvalidMedium(format!(
                "both sides must share one angular frequency ({} vs {})",
                outer.omega, inner.omega
            )));
        }
        Ok(Self { outer, inner })
    }

    /// Both sides filled with the same medium.
    pub fn homogeneous(medium: Medium) -> Self {
        Self {
            outer: medium,
            inner: medium,
        }
    }

    pub fn relative_epsilon(&self) -> f64 {
        self.inner.epsilon / self.outer.epsilon
    }

    pub fn relative_mu(&self) -> f64 {
        self.inner.mu / self.outer.mu
    }
}

/// Orientation of the normal used to take traces: `Exterior` is j = 0 (normal
/// pointing out of the unit ball), `Interior` is j = 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Exterior,
    Interior,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Exterior => 1.0,
            Side::Interior => -1.0,
        }
    }

    pub fn from_index(j: usize) -> Option<Self> {
        match j {
            0 => Some(Side::Exterior),
            1 => Some(Side::Interior),
            _ => None,
        }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Sign pattern of the double-layer symbol, `diag(-1, +1)`.
pub(crate) const K_PATTERN: [f64; 2] = [-1.0, 1.0];

pub(crate) fn v_from_products(p: &ScaledProducts, side: Side) -> DenseMatrix {
    let s = side.sign();
    DenseMatrix::from_rows(&[vec![ZERO, p.p_jh * s], vec![p.p_jh_prime * s, ZERO]])
}

pub(crate) fn k_from_products(p: &ScaledProducts, side: Side, pattern: [f64; 2]) -> DenseMatrix {
    let s = side.sign();
    DenseMatrix::diagonal(&[p.p_mixed * (pattern[0] * s), p.p_mixed * (pattern[1] * s)])
}

/// `[[K, sqrt(mu/eps) V], [sqrt(eps/mu) V, K]]`.
pub(crate) fn a_from_parts(k: &DenseMatrix, v: &DenseMatrix, impedance: f64) -> DenseMatrix {
    DenseMatrix::from_blocks(k, &v.scale_real(impedance), &v.scale_real(1.0 / impedance), k)
}

pub(crate) fn a_from_products(p: &ScaledProducts, impedance: f64, side: Side, pattern: [f64; 2]) -> DenseMatrix {
    a_from_parts(&k_from_products(p, side, pattern), &v_from_products(p, side), impedance)
}

fn products(n: usize, kappa: f64) -> Result<ScaledProducts, SymbolError> {
    Ok(riccati_table(n, c(kappa))?.products(n))
}

/// Single-layer symbol `V_κ[n]` (antidiagonal `2iĵĤ`, `-2iĵ'Ĥ'`).
pub fn v_symbol(n: usize, kappa: f64, side: Side) -> Result<DenseMatrix, SymbolError> {
    Ok(v_from_products(&products(n, kappa)?, side))
}

/// Double-layer symbol `K_κ[n] = i(ĵĤ' + ĵ'Ĥ) diag(-1, +1)`.
pub fn k_symbol(n: usize, kappa: f64, side: Side) -> Result<DenseMatrix, SymbolError> {
    Ok(k_from_products(&products(n, kappa)?, side, K_PATTERN))
}

/// Scaled Calderón symbol `A^j_{κ,μ}[n]`, 4x4.
pub fn a_symbol(n: usize, medium: &Medium, side: Side) -> Result<DenseMatrix, SymbolError> {
    Ok(a_from_products(&products(n, medium.kappa)?, medium.impedance(), side, K_PATTERN))
}

/// Symbols of both media tabulated once for `n = 0..=n_max`.
#[derive(Clone, Debug)]
pub struct PairSymbols {
    media: MediaPair,
    outer: RiccatiTable,
    inner: RiccatiTable,
    k_pattern: [f64; 2],
}

impl PairSymbols {
    pub fn new(media: MediaPair, n_max: usize) -> Result<Self, SymbolError> {
        Ok(Self {
            media,
            outer: riccati_table(n_max, c(media.outer.kappa))?,
            inner: riccati_table(n_max, c(media.inner.kappa))?,
            k_pattern: K_PATTERN,
        })
    }

    /// Same tables with a different double-layer sign pattern.
    pub(crate) fn with_k_pattern(mut self, pattern: [f64; 2]) -> Self {
        self.k_pattern = pattern;
        self
    }

    pub fn media(&self) -> &MediaPair {
        &self.media
    }

    pub fn n_max(&self) -> usize {
        self.outer.n_max()
    }

    /// `A⁰_{κ0,μ0}[n]`: exterior medium, exterior orientation.
    pub fn a_outer(&self, n: usize) -> DenseMatrix {
        a_from_products(&self.outer.products(n), self.media.outer.impedance(), Side::Exterior, self.k_pattern)
    }

    /// `A⁰_{κ1,μ1}[n]`: interior medium taken with the exterior orientation.
    pub fn a_inner_exterior(&self, n: usize) -> DenseMatrix {
        a_from_products(&self.inner.products(n), self.media.inner.impedance(), Side::Exterior, self.k_pattern)
    }

    /// `A¹_{κ1,μ1}[n] = -A⁰_{κ1,μ1}[n]`.
    pub fn a_inner(&self, n: usize) -> DenseMatrix {
        -&self.a_inner_exterior(n)
    }

    /// `MTF_loc[n] = [[A⁰_{κ0,μ0}, Id], [Id, A¹_{κ1,μ1}]]`.
    pub fn mtf(&self, n: usize) -> DenseMatrix {
        let id = DenseMatrix::identity(4);
        DenseMatrix::from_blocks(&self.a_outer(n), &id, &id, &self.a_inner(n))
    }

    /// Single-trace symbol `S[n] = A⁰_{κ0,μ0}[n] + A⁰_{κ1,μ1}[n]`.
    pub fn stf(&self, n: usize) -> DenseMatrix {
        &self.a_outer(n) + &self.a_inner_exterior(n)
    }

    /// `K[n] = A⁰_{κ0,μ0}[n] - A⁰_{κ1,μ1}[n]`.
    pub fn k_difference(&self, n: usize) -> DenseMatrix {
        &self.a_outer(n) - &self.a_inner_exterior(n)
    }

    /// `B[n] = [[S, A⁰₀ S], [A⁰₁ S, -S]]`.
    pub fn b(&self, n: usize) -> DenseMatrix {
        let s = self.stf(n);
        let a0 = self.a_outer(n);
        let a1 = self.a_inner_exterior(n);
        DenseMatrix::from_blocks(&s, &a0.matmul(&s), &a1.matmul(&s), &-&s)
    }

    /// Closed-form inverse `[[S⁻¹, A⁰₀S⁻¹], [A⁰₁S⁻¹, -S⁻¹]]`.
    pub fn mtf_inverse(&self, n: usize) -> Result<DenseMatrix, SymbolError> {
        let s_inv = linalg::inverse(&self.stf(n)).map_err(|source| SymbolError::SingularStf { n, source })?;
        let a0 = self.a_outer(n);
        let a1 = self.a_inner_exterior(n);
        Ok(DenseMatrix::from_blocks(
            &s_inv,
            &a0.matmul(&s_inv),
            &a1.matmul(&s_inv),
            &-&s_inv,
        ))
    }

    /// `diag(A⁰₀, A¹₁) · MTF_loc[n]`.
    pub fn a_preconditioned(&self, n: usize) -> DenseMatrix {
        let a = DenseMatrix::block_diag(&self.a_outer(n), &self.a_inner(n));
        a.matmul(&self.mtf(n))
    }

    /// `Π · MTF_loc[n]`: the trace swap used as a preconditioner.
    pub fn pi_preconditioned(&self, n: usize) -> DenseMatrix {
        swap_matrix(4).matmul(&self.mtf(n))
    }
}

/// `Π = [[0, Id], [Id, 0]]` with `block`-sized identity blocks.
pub fn swap_matrix(block: usize) -> DenseMatrix {
    let z = DenseMatrix::zeros(block, block);
    let id = DenseMatrix::identity(block);
    DenseMatrix::from_blocks(&z, &id, &id, &z)
}

pub fn mtf_symbol(n: usize, media: &MediaPair) -> Result<DenseMatrix, SymbolError> {
    Ok(PairSymbols::new(*media, n)?.mtf(n))
}

pub fn stf_symbol(n: usize, media: &MediaPair) -> Result<DenseMatrix, SymbolError> {
    Ok(PairSymbols::new(*media, n)?.stf(n))
}

pub fn b_symbol(n: usize, media: &MediaPair) -> Result<DenseMatrix, SymbolError> {
    Ok(PairSymbols::new(*media, n)?.b(n))
}

pub fn mtf_inverse_symbol(n: usize, media: &MediaPair) -> Result<DenseMatrix, SymbolError> {
    PairSymbols::new(*media, n)?.mtf_inverse(n)
}

pub fn a_precond_symbol(n: usize, media: &MediaPair) -> Result<DenseMatrix, SymbolError> {
    Ok(PairSymbols::new(*media, n)?.a_preconditioned(n))
}

pub fn pi_precond_symbol(n: usize, media: &MediaPair) -> Result<DenseMatrix, SymbolError> {
    Ok(PairSymbols::new(*media, n)?.pi_preconditioned(n))
}

// ---------------------------------------------------------------------------
// n → ∞ limits
// ---------------------------------------------------------------------------

/// Diagonal of `T_n^{#k}`, i.e. `(1, 1/n)` repeated `len/2` times.
pub fn mode_scaling(n: usize, len: usize) -> Vec<f64> {
    let inv = 1.0 / n as f64;
    (0..len).map(|i| if i % 2 == 0 { 1.0 } else { inv }).collect()
}

/// `(T_n)⁻¹ · M · T_n` for the mode scaling of matching size.
pub fn at_mode(matrix: &DenseMatrix, n: usize) -> DenseMatrix {
    let t = mode_scaling(n, matrix.rows());
    let t_inv: Vec<f64> = t.iter().map(|x| 1.0 / x).collect();
    matrix.diagonal_similarity(&t_inv)
}

/// `Ã⁰_{κ,μ}`: the `n`-independent limit of the Calderón symbol.
pub fn a_tilde(medium: &Medium) -> DenseMatrix {
    let wm = medium.omega_mu();
    let we = medium.omega_epsilon();
    DenseMatrix::from_real_rows(&[
        &[0.0, 0.0, 0.0, wm],
        &[0.0, 0.0, 1.0 / we, 0.0],
        &[0.0, we, 0.0, 0.0],
        &[1.0 / wm, 0.0, 0.0, 0.0],
    ])
}

#[derive(Clone, Debug)]
pub struct AsymptoticSymbols {
    /// `Ã⁰_{κ0,μ0}`
    pub a_tilde_0: DenseMatrix,
    /// `Ã¹_{κ1,μ1} = -Ã⁰_{κ1,μ1}`
    pub a_tilde_1: DenseMatrix,
    pub mtf_inf: DenseMatrix,
    /// `K̃ = Ã⁰_{κ0,μ0} - Ã⁰_{κ1,μ1}`
    pub k_tilde: DenseMatrix,
    /// `S̃ = Ã⁰_{κ0,μ0} + Ã⁰_{κ1,μ1}`
    pub s_tilde: DenseMatrix,
}

pub fn asymptotic_symbols(media: &MediaPair) -> AsymptoticSymbols {
    let a0 = a_tilde(&media.outer);
    let a1_ext = a_tilde(&media.inner);
    let a1 = -&a1_ext;
    let id = DenseMatrix::identity(4);
    AsymptoticSymbols {
        mtf_inf: DenseMatrix::from_blocks(&a0, &id, &id, &a1),
        k_tilde: &a0 - &a1_ext,
        s_tilde: &a0 + &a1_ext,
        a_tilde_0: a0,
        a_tilde_1: a1,
    }
}

// ---------------------------------------------------------------------------
// Accumulation points
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccumulationVariant {
    Mtf,
    Mtf2,
    Bmtf,
    Ktilde,
    Stilde,
}

impl AccumulationVariant {
    pub const ALL: [AccumulationVariant; 5] = [
        AccumulationVariant::Mtf,
        AccumulationVariant::Mtf2,
        AccumulationVariant::Bmtf,
        AccumulationVariant::Ktilde,
        AccumulationVariant::Stilde,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            AccumulationVariant::Mtf => "mtf",
            AccumulationVariant::Mtf2 => "mtf2",
            AccumulationVariant::Bmtf => "bmtf",
            AccumulationVariant::Ktilde => "ktilde",
            AccumulationVariant::Stilde => "stilde",
        }
    }
}

impl fmt::Display for AccumulationVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for AccumulationVariant {
    type Err = SymbolError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.tag() == s)
            .ok_or_else(|| SymbolError::UnknownVariant(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccumulationSet {
    pub variant: AccumulationVariant,
    pub points: Vec<Complex64>,
    /// `(Λ_μ, Λ_ε)`
    pub lambdas: (f64, f64),
    /// `(Υ_μ, Υ_ε)`
    pub upsilons: (f64, f64),
}

impl AccumulationSet {
    /// `min(Υ_μ, Υ_ε)`.
    pub fn upsilon_min(&self) -> f64 {
        self.upsilons.0.min(self.upsilons.1)
    }
}

/// `|sqrt(r) - 1/sqrt(r)|` and `sqrt(r) + 1/sqrt(r)` for a contrast ratio `r`.
fn contrast(r: f64) -> (f64, f64) {
    let s = r.sqrt();
    ((s - 1.0 / s).abs(), s + 1.0 / s)
}

fn push_unique(points: &mut Vec<Complex64>, z: Complex64) {
    if points.iter().all(|p| (p - z).norm() > DEDUP_TOL) {
        points.push(z);
    }
}

pub fn accumulation_points(media: &MediaPair, variant: AccumulationVariant) -> AccumulationSet {
    let (lambda_mu, upsilon_mu) = contrast(media.relative_mu());
    let (lambda_eps, upsilon_eps) = contrast(media.relative_epsilon());
    let mut points = Vec::new();
    for (lambda, upsilon) in [(lambda_mu, upsilon_mu), (lambda_eps, upsilon_eps)] {
        let candidates: Vec<Complex64> = match variant {
            AccumulationVariant::Mtf => {
                let plus = (c(2.0) + I * lambda).sqrt();
                let minus = (c(2.0) - I * lambda).sqrt();
                vec![plus, minus, -plus, -minus]
            }
            AccumulationVariant::Mtf2 => vec![c(2.0) + I * lambda, c(2.0) - I * lambda],
            AccumulationVariant::Bmtf => vec![c(upsilon * upsilon)],
            AccumulationVariant::Ktilde => vec![I * lambda, -I * lambda],
            AccumulationVariant::Stilde => vec![c(upsilon), c(-upsilon)],
        };
        for z in candidates {
            push_unique(&mut points, z);
        }
    }
    AccumulationSet {
        variant,
        points,
        lambdas: (lambda_mu, lambda_eps),
        upsilons: (upsilon_mu, upsilon_eps),
    }
}
