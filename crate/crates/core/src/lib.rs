mod curve;
mod ensembles;
mod error;
mod greens;
mod product;
mod special;
mod spectra;

pub use curve::{distance_to_polygons, inside_polygons, wrap, Band, BoundaryCurve, PolarPoint, Topology};
pub use ensembles::{gaussian_step, sample_ginibre, sample_gue, EnsembleKind, MatrixSample, RandomSeed};
pub use error::{Error, Result};
pub use greens::*;
pub use product::{
    block_embedding, build_product, eigenvalues, hermitian_eigenvalues, sample_cloud, scalar_walk,
    BalancedProduct, EigenCloud, ProductConfig, WalkStats, DEFAULT_BALANCE_THRESHOLD,
};
pub use special::{drift_profile, even_cosh, even_sinhc};
pub use spectra::{
    complex_fraction, containment, containment_with, histogram2d, ks_real, semicircle_cdf, uniform_disk_distance,
    ComparisonReport, DensityGrid, GridSpec, Law, RadialProfile, DEFAULT_HOLE_DEFLATION, DEFAULT_INFLATION,
};

pub use faer;
pub use num_complex::Complex64;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/sampling.md")]
    pub struct Sampling;
    #[doc = include_str!("../../../book/src/resolvents.md")]
    pub struct Resolvents;
    #[doc = include_str!("../../../book/src/finite.md")]
    pub struct Finite;
    #[doc = include_str!("../../../book/src/limit.md")]
    pub struct Limit;
    #[doc = include_str!("../../../book/src/comparing.md")]
    pub struct Comparing;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
