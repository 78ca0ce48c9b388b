//! Finite products `Y_M = Π (1 + √(τ/M) X_i)` and their eigenvalue clouds.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par, Side};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{EnsembleKind, RandomSeed};
use crate::error::{Error, Result};

pub const DEFAULT_BALANCE_THRESHOLD: f64 = 1e6;

/// One product experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductConfig {
    pub n: usize,
    pub m: usize,
    pub tau: f64,
    pub kind: EnsembleKind,
    pub samples: usize,
    pub seed: RandomSeed,
    /// Multiply every eigenvalue by `e^{-τ/2}`.
    pub rescale: bool,
    /// Frobenius norm above which a partial product is divided back to unit norm.
    pub balance_threshold: f64,
}

impl ProductConfig {
    pub fn new(kind: EnsembleKind, n: usize, m: usize, tau: f64) -> Self {
        ProductConfig {
            n,
            m,
            tau,
            kind,
            samples: 1,
            seed: RandomSeed::new(0, 0),
            rescale: false,
            balance_threshold: DEFAULT_BALANCE_THRESHOLD,
        }
    }

    pub fn samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn seed(mut self, seed: RandomSeed) -> Self {
        self.seed = seed;
        self
    }

    pub fn rescale(mut self, rescale: bool) -> Self {
        self.rescale = rescale;
        self
    }

    pub fn balance_threshold(mut self, threshold: f64) -> Self {
        self.balance_threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if self.m == 0 {
            return Err(Error::invalid("the product needs at least one factor"));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::invalid(format!("tau must be finite and >= 0, got {}", self.tau)));
        }
        if self.samples == 0 {
            return Err(Error::invalid("samples must be at least 1"));
        }
        if !(self.balance_threshold.is_finite() && self.balance_threshold > 1.0) {
            return Err(Error::invalid("balance threshold must be a finite number above 1"));
        }
        Ok(())
    }

    /// Substream used for factor `i` (0-based) of sample `sample_index`.
    pub fn factor_seed(&self, sample_index: usize, i: usize) -> RandomSeed {
        let offset = (sample_index as u64) * (self.m as u64) + i as u64;
        self.seed.with_stream(self.seed.stream.wrapping_add(offset))
    }
}

/// A product matrix together with the log of the scalar divided out of it.
#[derive(Clone, Debug)]
pub struct BalancedProduct {
    pub matrix: Mat<Complex64>,
    pub log_scale: f64,
}

/// Concatenated eigenvalues of `config.samples` independent products.
#[derive(Clone, Debug)]
pub struct EigenCloud {
    /// Sample `k` owns `eigenvalues[k * n..(k + 1) * n]`.
    pub eigenvalues: Vec<Complex64>,
    pub config: ProductConfig,
    /// Balancing correction per sample, already folded into `eigenvalues`.
    pub log_scale: Vec<f64>,
}

impl EigenCloud {
    pub fn sample_index(&self, k: usize) -> usize {
        k / self.config.n
    }
}

/// Multiplies out one product, left to right.
///
/// Factor `i` of sample `s` is drawn from substream `s·M + i` (offset by the
/// seed's own stream). Whenever the running product's Frobenius norm exceeds
/// the threshold it is divided by that norm, and the log of the divisor is
/// added to `log_scale`; the true product is `e^{log_scale} · matrix`.
pub fn build_product(config: &ProductConfig, sample_index: usize) -> Result<BalancedProduct> {
    config.validate()?;
    let n = config.n;
    let mut y = Mat::<Complex64>::identity(n, n);
    let mut log_scale = 0.0;
    if config.tau == 0.0 {
        return Ok(BalancedProduct { matrix: y, log_scale });
    }
    let c = Complex64::new((config.tau / config.m as f64).sqrt(), 0.0);
    let mut t = Mat::<Complex64>::zeros(n, n);
    for i in 0..config.m {
        let x = config.kind.fill(n, &mut config.factor_seed(sample_index, i).rng());
        // Y (1 + cX) = Y + c·Y·X
        matmul(t.as_mut(), Accum::Replace, y.as_ref(), x.as_ref(), c, Par::Seq);
        for j in 0..n {
            for k in 0..n {
                t[(k, j)] += y[(k, j)];
            }
        }
        std::mem::swap(&mut y, &mut t);

        let norm = y.norm_l2();
        if !norm.is_finite() {
            return Err(Error::NumericRange { sample_index, log_scale });
        }
        if norm > config.balance_threshold {
            let inv = Complex64::new(norm.recip(), 0.0);
            for j in 0..n {
                for k in 0..n {
                    y[(k, j)] *= inv;
                }
            }
            log_scale += norm.ln();
        }
    }
    Ok(BalancedProduct { matrix: y, log_scale })
}

/// Eigenvalues of a dense complex matrix, with multiplicity.
pub fn eigenvalues(matrix: MatRef<'_, Complex64>) -> Result<Vec<Complex64>> {
    check_square(matrix)?;
    matrix
        .eigenvalues()
        .map_err(|_| Error::EigenSolver { seed: None })
}

/// Real eigenvalues of a hermitian matrix in ascending order. Only the lower
/// triangle is read.
pub fn hermitian_eigenvalues(matrix: MatRef<'_, Complex64>) -> Result<Vec<f64>> {
    check_square(matrix)?;
    matrix
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::EigenSolver { seed: None })
}

fn check_square(matrix: MatRef<'_, Complex64>) -> Result<()> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::invalid(format!(
            "matrix is {}x{}, not square",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    if matrix.nrows() == 0 {
        return Err(Error::InvalidDimension(0));
    }
    Ok(())
}

/// Eigenvalues of `config.samples` independent products, merged in sample order.
pub fn sample_cloud(config: &ProductConfig) -> Result<EigenCloud> {
    config.validate()?;
    let shift = if config.rescale { -config.tau / 2.0 } else { 0.0 };
    let per_sample: Vec<Result<(Vec<Complex64>, f64)>> = (0..config.samples)
        .into_par_iter()
        .map(|s| {
            if config.tau == 0.0 {
                let one = Complex64::new(shift.exp(), 0.0);
                return Ok((vec![one; config.n], 0.0));
            }
            let p = build_product(config, s)?;
            let ev = p.matrix.eigenvalues().map_err(|_| Error::EigenSolver {
                seed: Some(config.factor_seed(s, 0)),
            })?;
            let factor = (p.log_scale + shift).exp();
            Ok((ev.into_iter().map(|l| l * factor).collect(), p.log_scale))
        })
        .collect();

    let mut eigenvalues = Vec::with_capacity(config.n * config.samples);
    let mut log_scale = Vec::with_capacity(config.samples);
    for r in per_sample {
        let (ev, ls) = r?;
        eigenvalues.extend(ev);
        log_scale.push(ls);
    }
    Ok(EigenCloud {
        eigenvalues,
        config: *config,
        log_scale,
    })
}

/// The cyclic block matrix with `A_1 … A_{M-1}` on the block superdiagonal and
/// `A_M` in the lower-left corner.
///
/// Its `M`-th power is block diagonal with cyclic shifts of `A_1⋯A_M`, so its
/// eigenvalues are the `M`-th roots of the product's eigenvalues.
pub fn block_embedding(factors: &[Mat<Complex64>]) -> Result<Mat<Complex64>> {
    let Some(first) = factors.first() else {
        return Err(Error::invalid("block embedding needs at least one factor"));
    };
    let n = first.nrows();
    if factors.iter().any(|a| a.nrows() != n || a.ncols() != n) {
        return Err(Error::invalid("all factors must be square of the same dimension"));
    }
    let m = factors.len();
    if m == 1 {
        return Ok(first.clone());
    }
    let mut b = Mat::<Complex64>::zeros(m * n, m * n);
    for (i, a) in factors.iter().enumerate() {
        let (r0, c0) = (i * n, ((i + 1) % m) * n);
        b.as_mut().submatrix_mut(r0, c0, n, n).copy_from(a);
    }
    Ok(b)
}

/// Sample statistics of `log|s(T)|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkStats {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub samples: usize,
}

impl WalkStats {
    pub fn mean_std_error(&self) -> f64 {
        (self.variance / self.samples as f64).sqrt()
    }

    /// Standard error of the variance, assuming normally distributed logs.
    pub fn variance_std_error(&self) -> f64 {
        self.variance * (2.0 / (self.samples as f64 - 1.0)).sqrt()
    }
}

/// Scalar geometric walk `s = Π (1 + √(τ/m) x_i)` with standard normal `x_i`.
///
/// As `m → ∞`, `log s` becomes normal with mean `-τ/2` and variance `τ`.
/// Sample `k` uses substream `seed.stream + k`.
pub fn scalar_walk(tau: f64, m: usize, samples: usize, seed: RandomSeed) -> Result<WalkStats> {
    if m == 0 || samples == 0 {
        return Err(Error::invalid("scalar walk needs m >= 1 and samples >= 1"));
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::invalid(format!("tau must be finite and >= 0, got {tau}")));
    }
    let c = (tau / m as f64).sqrt();
    let logs: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            if tau == 0.0 {
                return 0.0;
            }
            let mut rng = seed.with_stream(seed.stream.wrapping_add(k)).rng();
            let mut acc = 0.0;
            for _ in 0..m {
                let x: f64 = rng.sample(StandardNormal);
                let a = c * x;
                acc += if a > -1.0 { a.ln_1p() } else { (1.0 + a).abs().ln() };
            }
            acc
        })
        .collect();
    let n = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let variance = if logs.len() > 1 {
        logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(WalkStats { mean, variance, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_time_gives_identity() {
        let cfg = ProductConfig::new(EnsembleKind::Ginibre, 4, 7, 0.0);
        let p = build_product(&cfg, 0).unwrap();
        assert_eq!(p.matrix, Mat::<Complex64>::identity(4, 4));
        assert_eq!(p.log_scale, 0.0);
        let cloud = sample_cloud(&cfg.samples(3)).unwrap();
        assert_eq!(cloud.eigenvalues.len(), 12);
        assert!(cloud.eigenvalues.iter().all(|&l| l == c(1.0, 0.0)));
    }

    #[test]
    fn single_scalar_factor_is_one_plus_root_tau_x() {
        let tau = 0.7;
        let cfg = ProductConfig::new(EnsembleKind::Gue, 1, 1, tau).seed(RandomSeed::new(5, 2));
        let p = build_product(&cfg, 3).unwrap();
        let x = crate::gaussian_step(cfg.factor_seed(3, 0));
        assert!((p.matrix[(0, 0)] - c(1.0 + tau.sqrt() * x, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eigenvalues_of_diagonal_matrices() {
        let id = Mat::<Complex64>::identity(5, 5);
        for l in eigenvalues(id.as_ref()).unwrap() {
            assert!((l - c(1.0, 0.0)).norm() < 1e-14);
        }
        let d = [c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 0.0)];
        let m = Mat::from_fn(3, 3, |i, j| if i == j { d[i] } else { c(0.0, 0.0) });
        let mut ev = eigenvalues(m.as_ref()).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (a, b) in ev.iter().zip([d[2], d[1], d[0]]) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn non_square_is_rejected() {
        let m = Mat::<Complex64>::zeros(2, 3);
        assert!(matches!(eigenvalues(m.as_ref()), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn single_block_embedding_is_the_factor() {
        let a = crate::sample_ginibre(3, RandomSeed::new(1, 1)).unwrap().entries;
        assert_eq!(block_embedding(std::slice::from_ref(&a)).unwrap(), a);
    }

    #[test]
    fn mismatched_blocks_are_rejected() {
        let a = Mat::<Complex64>::identity(2, 2);
        let b = Mat::<Complex64>::identity(3, 3);
        assert!(block_embedding(&[a, b]).is_err());
        assert!(block_embedding(&[]).is_err());
    }

    #[test]
    fn zero_time_walk_is_exactly_zero() {
        let s = scalar_walk(0.0, 100, 10, RandomSeed::new(1, 0)).unwrap();
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.variance, 0.0);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = ProductConfig::new(EnsembleKind::Ginibre, 2, 2, 1.0);
        assert!(ProductConfig { n: 0, ..base }.validate().is_err());
        assert!(ProductConfig { m: 0, ..base }.validate().is_err());
        assert!(ProductConfig { tau: -1.0, ..base }.validate().is_err());
        assert!(ProductConfig { samples: 0, ..base }.validate().is_err());
        assert!(base.validate().is_ok());
    }
}
