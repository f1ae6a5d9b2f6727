//! Kernel methods that consume a [`KernelMatrix`](crate::kernels::KernelMatrix).

mod kmeans;
mod linkage;
mod pca;

pub use kmeans::{initial_centers, kernel_kmeans, ClusteringResult, KMeansConfig};
pub use linkage::{complete_linkage, feature_distance, Dendrogram, Merge};
pub use pca::{center_kernel, kernel_pca, PcaProjection};
