//! Seeded Gaussian matrix ensembles with the `1/N` variance convention.

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Address of one random stream: a root seed plus a substream index.
///
/// Two seeds with the same `(root, stream)` pair produce identical draws.
/// Different streams under one root are statistically independent, which is
/// what lets sampling run in parallel without depending on the schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSeed {
    pub root: u64,
    pub stream: u64,
}

impl RandomSeed {
    pub const fn new(root: u64, stream: u64) -> Self {
        RandomSeed { root, stream }
    }

    /// The same root, shifted to another substream.
    pub const fn with_stream(self, stream: u64) -> Self {
        RandomSeed {
            root: self.root,
            stream,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root);
        rng.set_stream(self.stream);
        rng
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnsembleKind {
    /// Hermitian matrices, semicircle on `[-2, 2]`.
    Gue,
    /// Matrices with independent complex entries, uniform on the unit disk.
    Ginibre,
}

impl EnsembleKind {
    pub fn sample(self, n: usize, seed: RandomSeed) -> Result<MatrixSample> {
        match self {
            EnsembleKind::Gue => sample_gue(n, seed),
            EnsembleKind::Ginibre => sample_ginibre(n, seed),
        }
    }

    pub(crate) fn fill(self, n: usize, rng: &mut ChaCha8Rng) -> Mat<Complex64> {
        match self {
            EnsembleKind::Gue => gue_entries(n, rng),
            EnsembleKind::Ginibre => ginibre_entries(n, rng),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MatrixSample {
    pub n: usize,
    pub entries: Mat<Complex64>,
    pub kind: EnsembleKind,
}

/// Draws a GUE matrix with `<H_ab H_cd> = δ_ad δ_bc / n`.
///
/// The upper triangle is filled row by row; the lower triangle is its exact
/// conjugate, so the result is hermitian bit for bit.
///
/// ```
/// use matdiff::{sample_gue, RandomSeed};
///
/// let h = sample_gue(4, RandomSeed::new(7, 0)).unwrap().entries;
/// for i in 0..4 {
///     for j in 0..4 {
///         assert_eq!(h[(i, j)], h[(j, i)].conj());
///     }
/// }
/// ```
pub fn sample_gue(n: usize, seed: RandomSeed) -> Result<MatrixSample> {
    check_dim(n)?;
    Ok(MatrixSample {
        n,
        entries: gue_entries(n, &mut seed.rng()),
        kind: EnsembleKind::Gue,
    })
}

/// Draws a Ginibre matrix: independent entries with `<|X_ab|²> = 1/n`.
pub fn sample_ginibre(n: usize, seed: RandomSeed) -> Result<MatrixSample> {
    check_dim(n)?;
    Ok(MatrixSample {
        n,
        entries: ginibre_entries(n, &mut seed.rng()),
        kind: EnsembleKind::Ginibre,
    })
}

/// A single standard normal variate.
pub fn gaussian_step(seed: RandomSeed) -> f64 {
    seed.rng().sample(StandardNormal)
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension(n));
    }
    Ok(())
}

fn gue_entries(n: usize, rng: &mut ChaCha8Rng) -> Mat<Complex64> {
    let diag = (1.0 / n as f64).sqrt();
    let off = (0.5 / n as f64).sqrt();
    let mut h = Mat::<Complex64>::zeros(n, n);
    for i in 0..n {
        let x: f64 = rng.sample(StandardNormal);
        h[(i, i)] = Complex64::new(diag * x, 0.0);
        for j in i + 1..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let v = Complex64::new(off * re, off * im);
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
    }
    h
}

fn ginibre_entries(n: usize, rng: &mut ChaCha8Rng) -> Mat<Complex64> {
    let s = (0.5 / n as f64).sqrt();
    // Column-major fill order matches faer's storage; only reproducibility matters.
    let mut x = Mat::<Complex64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            x[(i, j)] = Complex64::new(s * re, s * im);
        }
    }
    x
}
