//! Kernel two-sample testing (MMD with a permutation null) and the PCA
//! projection used for decision-boundary plots.

mod kernel;
mod pca;
mod permutation;

pub use kernel::{
    euclidean, kernel_matrix, pairwise_distances, resolve_bandwidth, Bandwidth, KernelConfig, KernelKind,
};
pub use pca::{pca_project, Pca};
pub use permutation::{mmd2, permutation_pvalue, permutation_test, PermutationConfig, TwoSampleTest};
