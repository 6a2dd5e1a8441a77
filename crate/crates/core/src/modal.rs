//! Mode-truncated operators.
//!
//! An operator of the formulation is block diagonal in the vector spherical
//! harmonic basis; truncating at degree `N` gives one small block per `n`,
//! optionally repeated `2n + 1` times for the orders `m`. Degree 0 is skipped
//! because the tangential harmonics vanish there.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, DenseMatrix, LinalgError};
use crate::specfun::{riccati_table, SpecfunError};
use crate::symbols::{
    accumulation_points, asymptotic_symbols, at_mode, swap_matrix, AccumulationSet, AccumulationVariant,
    MediaPair, PairSymbols, SymbolError,
};

/// Operators with at least this many unknowns apply their blocks in parallel.
const PARALLEL_APPLY_DIM: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModalError {
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error("invalid mode grid: {0}")]
    InvalidGrid(String),
    #[error("unknown operator variant `{0}`; expected one of mtf, mtf2, bmtf, stf2, amtf, pi")]
    UnknownVariant(String),
    #[error("unknown right-hand side model `{0}`; expected one of mie-like, flat, random")]
    UnknownModel(String),
    #[error("vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModalGrid {
    pub n_min: usize,
    pub n_max: usize,
    pub with_multiplicity: bool,
}

impl ModalGrid {
    pub fn new(n_min: usize, n_max: usize, with_multiplicity: bool) -> Result<Self, ModalError> {
        if n_min < 1 || n_min > n_max {
            return Err(ModalError::InvalidGrid(format!(
                "need 1 <= n_min <= n_max, got n_min = {n_min}, n_max = {n_max}"
            )));
        }
        Ok(Self {
            n_min,
            n_max,
            with_multiplicity,
        })
    }

    /// Modes `1..=n_max` without multiplicity.
    pub fn up_to(n_max: usize) -> Result<Self, ModalError> {
        Self::new(1, n_max, false)
    }

    pub fn modes(&self) -> std::ops::RangeInclusive<usize> {
        self.n_min..=self.n_max
    }

    pub fn mode_count(&self) -> usize {
        self.n_max - self.n_min + 1
    }

    /// Number of copies of the degree-`n` block.
    pub fn multiplicity(&self, n: usize) -> usize {
        if self.with_multiplicity {
            2 * n + 1
        } else {
            1
        }
    }

    pub fn block_copies(&self) -> usize {
        self.modes().map(|n| self.multiplicity(n)).sum()
    }

    pub fn dimension(&self, block_dim: usize) -> usize {
        block_dim * self.block_copies()
    }
}

/// `⌈1.5·κ⌉ + 20` with `κ` the larger wavenumber of the pair.
pub fn default_n_max(media: &MediaPair) -> usize {
    (1.5 * media.outer.kappa.max(media.inner.kappa)).ceil() as usize + 20
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `MTF_loc`
    Mtf,
    /// `MTF_loc²`
    Mtf2,
    /// `B·MTF_loc`
    Bmtf,
    /// `S²` on the single-trace unknowns
    Stf2,
    /// `diag(A⁰₀, A¹₁)·MTF_loc`
    Amtf,
    /// `Π·MTF_loc`
    Pi,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Mtf,
        Variant::Mtf2,
        Variant::Bmtf,
        Variant::Stf2,
        Variant::Amtf,
        Variant::Pi,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Variant::Mtf => "mtf",
            Variant::Mtf2 => "mtf2",
            Variant::Bmtf => "bmtf",
            Variant::Stf2 => "stf2",
            Variant::Amtf => "amtf",
            Variant::Pi => "pi",
        }
    }

    pub fn block_dim(self) -> usize {
        match self {
            Variant::Stf2 => 4,
            _ => 8,
        }
    }

    /// Closed-form accumulation set, when one is known. `S²` shares the
    /// accumulation points of `B·MTF_loc`.
    pub fn accumulation_variant(self) -> Option<AccumulationVariant> {
        match self {
            Variant::Mtf => Some(AccumulationVariant::Mtf),
            Variant::Mtf2 => Some(AccumulationVariant::Mtf2),
            Variant::Bmtf | Variant::Stf2 => Some(AccumulationVariant::Bmtf),
            Variant::Amtf | Variant::Pi => None,
        }
    }

    /// Normalization bringing the accumulation points near 1: `1/√2`, `1/2`, `Υ̲⁻²`.
    pub fn normalization(self, media: &MediaPair) -> Option<f64> {
        match self {
            Variant::Mtf => Some(std::f64::consts::FRAC_1_SQRT_2),
            Variant::Mtf2 => Some(0.5),
            Variant::Bmtf | Variant::Stf2 => {
                let u = accumulation_points(media, AccumulationVariant::Bmtf).upsilon_min();
                Some(1.0 / (u * u))
            }
            Variant::Amtf | Variant::Pi => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Variant {
    type Err = ModalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.tag() == s)
            .ok_or_else(|| ModalError::UnknownVariant(s.to_string()))
    }
}

/// Operator block at mode `n` and the matrix mapping multi-trace data
/// (8 entries) to the right-hand side of that block's equation.
fn variant_block(symbols: &PairSymbols, variant: Variant, n: usize) -> (DenseMatrix, DenseMatrix) {
    let mtf = symbols.mtf(n);
    match variant {
        Variant::Mtf => (mtf, DenseMatrix::identity(8)),
        Variant::Mtf2 => (mtf.matmul(&mtf), mtf),
        Variant::Bmtf => {
            let b = symbols.b(n);
            (b.matmul(&mtf), b)
        }
        Variant::Stf2 => {
            let s = symbols.stf(n);
            let restrict = DenseMatrix::from_fn(4, 8, |i, j| if j < 4 { s[(i, j)] } else { Complex64::default() });
            (s.matmul(&s), restrict)
        }
        Variant::Amtf => {
            let a = DenseMatrix::block_diag(&symbols.a_outer(n), &symbols.a_inner(n));
            (a.matmul(&mtf), a)
        }
        Variant::Pi => {
            let p = swap_matrix(4);
            (p.matmul(&mtf), p)
        }
    }
}

/// Diagonal of `D̃ₙ` repeated over `len / 2` trace pairs.
pub fn d_tilde(n: usize, len: usize) -> Vec<f64> {
    let a = 1.0 + n as f64;
    (0..len).map(|i| if i % 2 == 0 { a } else { 1.0 / a }).collect()
}

/// Block-diagonal operator on the truncated harmonic space.
#[derive(Clone, Debug)]
pub struct ModalOperator {
    grid: ModalGrid,
    variant: Variant,
    media: MediaPair,
    blocks: Vec<DenseMatrix>,
    rhs_maps: Vec<DenseMatrix>,
    scaling: Option<f64>,
    norm_weighted: bool,
}

pub fn build_operator(
    variant: Variant,
    media: &MediaPair,
    grid: ModalGrid,
    scaled: bool,
) -> Result<ModalOperator, ModalError> {
    let symbols = PairSymbols::new(*media, grid.n_max)?;
    let scaling = if scaled { variant.normalization(media) } else { None };
    let (blocks, rhs_maps): (Vec<_>, Vec<_>) = grid
        .modes()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&n| {
            let (block, map) = variant_block(&symbols, variant, n);
            match scaling {
                Some(s) => (block.scale_real(s), map.scale_real(s)),
                None => (block, map),
            }
        })
        .unzip();
    Ok(ModalOperator {
        grid,
        variant,
        media: *media,
        blocks,
        rhs_maps,
        scaling,
        norm_weighted: false,
    })
}

impl ModalOperator {
    /// Wraps explicit per-mode blocks; the data map is the identity.
    pub fn from_blocks(grid: ModalGrid, variant: Variant, media: MediaPair, blocks: Vec<DenseMatrix>) -> Result<Self, ModalError> {
        if blocks.len() != grid.mode_count() {
            return Err(ModalError::InvalidGrid(format!(
                "{} blocks for {} modes",
                blocks.len(),
                grid.mode_count()
            )));
        }
        let rhs_maps = blocks.iter().map(|b| DenseMatrix::identity(b.rows())).collect();
        Ok(Self {
            grid,
            variant,
            media,
            blocks,
            rhs_maps,
            scaling: None,
            norm_weighted: false,
        })
    }

    pub fn grid(&self) -> &ModalGrid {
        &self.grid
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn media(&self) -> &MediaPair {
        &self.media
    }

    pub fn blocks(&self) -> &[DenseMatrix] {
        &self.blocks
    }

    pub fn block(&self, n: usize) -> &DenseMatrix {
        &self.blocks[n - self.grid.n_min]
    }

    pub fn scaling(&self) -> Option<f64> {
        self.scaling
    }

    pub fn is_norm_weighted(&self) -> bool {
        self.norm_weighted
    }

    pub fn block_dim(&self) -> usize {
        self.blocks[0].rows()
    }

    /// Length of the unknown vector.
    pub fn dimension(&self) -> usize {
        self.grid.dimension(self.block_dim())
    }

    /// Length of the multi-trace data vector accepted by [`Self::system_rhs`].
    pub fn data_dimension(&self) -> usize {
        self.grid.dimension(self.rhs_maps[0].cols())
    }

    /// Similarity `D̃^{1/2}·A·D̃^{-1/2}` on every block, so that the Euclidean
    /// norm of the new unknowns is the trace-space norm of the old ones.
    pub fn norm_weighted(mut self) -> Self {
        if self.norm_weighted {
            return self;
        }
        for (k, n) in self.grid.modes().enumerate() {
            let dim = self.blocks[k].rows();
            let w: Vec<f64> = d_tilde(n, dim).iter().map(|x| x.sqrt()).collect();
            self.blocks[k] = self.blocks[k].diagonal_similarity(&w);
            self.rhs_maps[k] = DenseMatrix::real_diagonal(&w).matmul(&self.rhs_maps[k]);
        }
        self.norm_weighted = true;
        self
    }

    fn segments(&self) -> Vec<(usize, usize, usize)> {
        let dim = self.block_dim();
        let mut offset = 0;
        self.grid
            .modes()
            .enumerate()
            .map(|(k, n)| {
                let len = dim * self.grid.multiplicity(n);
                let seg = (k, offset, len);
                offset += len;
                seg
            })
            .collect()
    }

    /// Exact block-diagonal matrix-vector product.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>, ModalError> {
        let mut y = vec![Complex64::default(); self.dimension()];
        self.apply_into(x, &mut y)?;
        Ok(y)
    }

    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) -> Result<(), ModalError> {
        let dim = self.dimension();
        for len in [x.len(), y.len()] {
            if len != dim {
                return Err(ModalError::DimensionMismatch { expected: dim, got: len });
            }
        }
        let bd = self.block_dim();
        let run = |k: usize, xs: &[Complex64], ys: &mut [Complex64]| {
            for (xc, yc) in xs.chunks_exact(bd).zip(ys.chunks_exact_mut(bd)) {
                self.blocks[k].matvec_into(xc, yc);
            }
        };
        if dim >= PARALLEL_APPLY_DIM {
            let mut parts = Vec::with_capacity(self.grid.mode_count());
            let mut rest = &mut y[..];
            for (k, off, len) in self.segments() {
                let (head, tail) = rest.split_at_mut(len);
                parts.push((k, off, head));
                rest = tail;
            }
            parts.into_par_iter().for_each(|(k, off, ys)| {
                let len = ys.len();
                run(k, &x[off..off + len], ys)
            });
        } else {
            for (k, off, len) in self.segments() {
                run(k, &x[off..off + len], &mut y[off..off + len]);
            }
        }
        Ok(())
    }

    /// Right-hand side of the (pre-multiplied, scaled, weighted) system for
    /// multi-trace data `f`: the blockwise product `P[n]·f`.
    pub fn system_rhs(&self, data: &[Complex64]) -> Result<Vec<Complex64>, ModalError> {
        let expected = self.data_dimension();
        if data.len() != expected {
            return Err(ModalError::DimensionMismatch { expected, got: data.len() });
        }
        let din = self.rhs_maps[0].cols();
        let mut out = Vec::with_capacity(self.dimension());
        let mut offset = 0;
        for (k, n) in self.grid.modes().enumerate() {
            for _ in 0..self.grid.multiplicity(n) {
                out.extend(self.rhs_maps[k].matvec(&data[offset..offset + din]));
                offset += din;
            }
        }
        Ok(out)
    }

    /// Undoes the norm weighting on a solution vector.
    pub fn unweight_solution(&self, x: &[Complex64]) -> Vec<Complex64> {
        if !self.norm_weighted {
            return x.to_vec();
        }
        let mut out = x.to_vec();
        for (k, off, len) in self.segments() {
            let n = self.grid.n_min + k;
            let w = d_tilde(n, self.block_dim());
            for (i, v) in out[off..off + len].iter_mut().enumerate() {
                *v /= w[i % w.len()].sqrt();
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Spectra
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct ModeSpectrum {
    pub n: usize,
    pub eigenvalues: Vec<Complex64>,
    /// Distance of each eigenvalue to the closest accumulation point.
    pub distances: Vec<f64>,
    /// Hausdorff distance between the eigenvalues and the accumulation set.
    pub hausdorff: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub variant: Variant,
    pub n_max: usize,
    pub modes: Vec<ModeSpectrum>,
    pub accumulation: Option<AccumulationSet>,
    pub min_modulus: f64,
}

impl SpectrumReport {
    pub fn mode(&self, n: usize) -> Option<&ModeSpectrum> {
        self.modes.iter().find(|m| m.n == n)
    }
}

/// Eigenvalues of every unscaled block `n = 1..=n_max`.
pub fn spectrum_scan(media: &MediaPair, variant: Variant, n_max: usize) -> Result<SpectrumReport, ModalError> {
    let grid = ModalGrid::up_to(n_max)?;
    let symbols = PairSymbols::new(*media, n_max)?;
    let accumulation = variant.accumulation_variant().map(|v| accumulation_points(media, v));
    let points = accumulation.as_ref().map(|a| a.points.clone());
    let modes = grid
        .modes()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&n| {
            let (block, _) = variant_block(&symbols, variant, n);
            let mut eigenvalues = linalg::eigenvalues(&block)?;
            linalg::sort_eigenvalues(&mut eigenvalues);
            let (distances, hausdorff) = match &points {
                Some(p) => (
                    eigenvalues.iter().map(|&z| linalg::distance_to_set(z, p)).collect(),
                    Some(linalg::hausdorff_distance(&eigenvalues, p)),
                ),
                None => (vec![f64::NAN; eigenvalues.len()], None),
            };
            Ok(ModeSpectrum {
                n,
                eigenvalues,
                distances,
                hausdorff,
            })
        })
        .collect::<Result<Vec<_>, ModalError>>()?;
    let min_modulus = modes
        .iter()
        .flat_map(|m| m.eigenvalues.iter().map(|z| z.norm()))
        .fold(f64::INFINITY, f64::min);
    Ok(SpectrumReport {
        variant,
        n_max,
        modes,
        accumulation,
        min_modulus,
    })
}

/// Smallest singular value of `MTF_loc[n]` over `n = 1..=n_max`, with its mode.
pub fn min_singular_value_scan(media: &MediaPair, n_max: usize) -> Result<(usize, f64), ModalError> {
    let symbols = PairSymbols::new(*media, n_max)?;
    Ok((1..=n_max)
        .into_par_iter()
        .map(|n| (n, linalg::min_singular_value(&symbols.mtf(n))))
        .reduce(|| (0, f64::INFINITY), |a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a }))
}

// ---------------------------------------------------------------------------
// Coercivity
// ---------------------------------------------------------------------------

/// Pairing and sign matrices of the multi-trace duality.
#[derive(Clone, Debug)]
pub struct PairingMatrices {
    /// Pairing of two trace tuples on the exterior side, `[u,v] = vᵀ M u`.
    pub m: DenseMatrix,
    /// `diag(+M, -M)`
    pub mm: DenseMatrix,
    /// `diag(+1, -1, +1, -1, ...)`, 8x8
    pub theta: DenseMatrix,
}

impl Default for PairingMatrices {
    fn default() -> Self {
        Self::new()
    }
}

impl PairingMatrices {
    pub fn new() -> Self {
        let m = DenseMatrix::from_real_rows(&[
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, -1.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[-1.0, 0.0, 0.0, 0.0],
        ]);
        let mm = DenseMatrix::block_diag(&m, &-&m);
        let theta = DenseMatrix::real_diagonal(&[1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
        Self { m, mm, theta }
    }

    /// `D̃ₙ^{#4}` as a weight vector of length 8.
    pub fn d_tilde(&self, n: usize) -> Vec<f64> {
        d_tilde(n, 8)
    }

    /// `𝕄·X·Θ`.
    pub fn form(&self, x: &DenseMatrix) -> DenseMatrix {
        self.mm.matmul(x).matmul(&self.theta)
    }
}

fn quotient(pairing: &PairingMatrices, symbol: &DenseMatrix, n: usize) -> Result<f64, ModalError> {
    Ok(linalg::weighted_hermitian_min_eig(&pairing.form(symbol), &pairing.d_tilde(n))?)
}

/// Smallest value of `Re{Uᵀ·𝕄·X·Θ·Ū} / (Uᵀ·D̃ₙ^{#4}·Ū)` over `U`, with `X` the
/// exact symbol `MTF_loc[n]` or its rescaled limit `MTF∞[n]`.
pub fn coercivity_quotient(n: usize, media: &MediaPair, use_asymptotic: bool) -> Result<f64, ModalError> {
    if n == 0 {
        return Err(ModalError::InvalidGrid("coercivity quotient needs n >= 1".into()));
    }
    let pairing = PairingMatrices::new();
    let symbol = if use_asymptotic {
        at_mode(&asymptotic_symbols(media).mtf_inf, n)
    } else {
        PairSymbols::new(*media, n)?.mtf(n)
    };
    quotient(&pairing, &symbol, n)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoercivityRow {
    pub n: usize,
    pub exact: f64,
    pub asymptotic: f64,
}

/// Both quotients for `n = 1..=n_max`.
pub fn coercivity_scan(media: &MediaPair, n_max: usize) -> Result<Vec<CoercivityRow>, ModalError> {
    let grid = ModalGrid::up_to(n_max)?;
    let symbols = PairSymbols::new(*media, n_max)?;
    let mtf_inf = asymptotic_symbols(media).mtf_inf;
    let pairing = PairingMatrices::new();
    grid.modes()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&n| {
            Ok(CoercivityRow {
                n,
                exact: quotient(&pairing, &symbols.mtf(n), n)?,
                asymptotic: quotient(&pairing, &at_mode(&mtf_inf, n), n)?,
            })
        })
        .collect()
}

/// `min_j min(1/(ωμ_j), ωε_j, 1/(ωε_j), ωμ_j)`: the `n → ∞` limit of the
/// asymptotic quotient.
pub fn coercivity_limit(media: &MediaPair) -> f64 {
    [media.outer, media.inner]
        .iter()
        .flat_map(|m| {
            let (wm, we) = (m.omega_mu(), m.omega_epsilon());
            [1.0 / wm, we, 1.0 / we, wm]
        })
        .fold(f64::INFINITY, f64::min)
}

/// Moduli of the exact single-layer weights `(ĵ'ₙĤ'ₙ, ĵₙĤₙ)` at argument `i`.
pub fn exact_norm_weights(n_max: usize) -> Result<Vec<[f64; 2]>, ModalError> {
    let table = riccati_table(n_max, Complex64::new(0.0, 1.0))?;
    Ok((0..=n_max)
        .map(|n| {
            let w = table.norm_weights(n);
            [w[0].norm(), w[1].norm()]
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RhsModel {
    /// Exterior traces with magnitude `|ĵₙ(κ0)|·(2n+1)` and random phases.
    MieLike,
    /// Every coefficient equal to 1.
    Flat,
    /// Independent uniform real and imaginary parts in `[-1, 1]`.
    Random,
}

impl RhsModel {
    pub fn tag(self) -> &'static str {
        match self {
            RhsModel::MieLike => "mie-like",
            RhsModel::Flat => "flat",
            RhsModel::Random => "random",
        }
    }
}

impl FromStr for RhsModel {
    type Err = ModalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [RhsModel::MieLike, RhsModel::Flat, RhsModel::Random]
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| ModalError::UnknownModel(s.to_string()))
    }
}

/// Multi-trace data vector (8 entries per block copy) for the grid.
pub fn synthetic_rhs(media: &MediaPair, grid: &ModalGrid, model: RhsModel, seed: u64) -> Result<Vec<Complex64>, ModalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(grid.dimension(8));
    let bessel = match model {
        RhsModel::MieLike => Some(riccati_table(grid.n_max, Complex64::new(media.outer.kappa, 0.0))?),
        _ => None,
    };
    for n in grid.modes() {
        for _ in 0..grid.multiplicity(n) {
            match model {
                RhsModel::MieLike => {
                    let table = bessel.as_ref().expect("table built for mie-like data");
                    let magnitude = table.j(n).norm() * (2 * n + 1) as f64;
                    for _ in 0..4 {
                        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                        out.push(Complex64::from_polar(magnitude, phase));
                    }
                    out.extend([Complex64::default(); 4]);
                }
                RhsModel::Flat => out.extend([Complex64::new(1.0, 0.0); 8]),
                RhsModel::Random => {
                    for _ in 0..8 {
                        out.push(Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)));
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::Medium;

    fn teflon_lf() -> MediaPair {
        let outer = Medium::with_wavenumber(1.0, 1.0, 1.05, 1.05).unwrap();
        let inner = Medium::with_wavenumber(2.1, 1.0, 1.05, 1.52).unwrap();
        MediaPair::new(outer, inner).unwrap()
    }

    #[test]
    fn grid_validation_and_counting() {
        assert!(ModalGrid::new(0, 3, false).is_err());
        assert!(ModalGrid::new(4, 3, false).is_err());
        let g = ModalGrid::new(1, 3, true).unwrap();
        assert_eq!(g.dimension(8), 120);
        assert_eq!(g.dimension(4), 60);
    }

    #[test]
    fn variant_tags_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.tag().parse::<Variant>().unwrap(), v);
        }
        assert!("mtf3".parse::<Variant>().is_err());
    }

    #[test]
    fn apply_reproduces_block_columns() {
        let media = teflon_lf();
        let grid = ModalGrid::new(1, 3, true).unwrap();
        for variant in Variant::ALL {
            let op = build_operator(variant, &media, grid, true).unwrap().norm_weighted();
            let bd = op.block_dim();
            let mut offset = 0;
            for n in grid.modes() {
                for _ in 0..grid.multiplicity(n) {
                    for col in 0..bd {
                        let mut e = vec![Complex64::default(); op.dimension()];
                        e[offset + col] = Complex64::new(1.0, 0.0);
                        let y = op.apply(&e).unwrap();
                        for (i, v) in y.iter().enumerate() {
                            let expected = if i >= offset && i < offset + bd {
                                op.block(n)[(i - offset, col)]
                            } else {
                                Complex64::default()
                            };
                            assert_eq!(*v, expected);
                        }
                    }
                    offset += bd;
                }
            }
        }
    }

    #[test]
    fn rhs_is_deterministic() {
        let media = teflon_lf();
        let grid = ModalGrid::up_to(10).unwrap();
        for model in [RhsModel::MieLike, RhsModel::Random] {
            let a = synthetic_rhs(&media, &grid, model, 7).unwrap();
            let b = synthetic_rhs(&media, &grid, model, 7).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, synthetic_rhs(&media, &grid, model, 8).unwrap());
        }
        let flat = synthetic_rhs(&media, &grid, RhsModel::Flat, 0).unwrap();
        assert!(flat.iter().all(|z| (z.norm() - 1.0).abs() == 0.0));
        assert!("plane".parse::<RhsModel>().is_err());
    }

    #[test]
    fn mie_like_tail_decays() {
        let media = teflon_lf();
        let grid = ModalGrid::up_to(30).unwrap();
        let f = synthetic_rhs(&media, &grid, RhsModel::MieLike, 1).unwrap();
        let mag = |n: usize| f[(n - 1) * 8].norm();
        assert!(mag(10) < 1e-6 * mag(1));
        for n in 5..30 {
            assert!(mag(n + 1) < 0.5 * mag(n), "n = {n}");
        }
    }

    #[test]
    fn pairing_structure() {
        let p = PairingMatrices::new();
        // The coupling through the identity blocks has zero real quadratic form.
        let coupling = p.form(&swap_matrix(4));
        assert!(linalg::max_abs_diff(&coupling.transpose(), &-&coupling) == 0.0);
        assert!(p.d_tilde(3).iter().all(|&w| w > 0.0));
    }

    #[test]
    fn asymptotic_quotient_tends_to_limit() {
        let media = teflon_lf();
        let limit = coercivity_limit(&media);
        let q = coercivity_quotient(1000, &media, true).unwrap();
        assert!((q / limit - 1.0).abs() < 2e-3, "{q} vs {limit}");
        assert!(coercivity_quotient(0, &media, true).is_err());
    }
}
