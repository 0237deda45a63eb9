//! Spectral communities: project the bipartite graph onto one side, build the
//! normalized Laplacian, compute its low spectrum and cluster the nodes in
//! the space of the low eigenvectors.

pub mod clustering;
pub mod eigen;
pub mod laplacian;
pub mod projection;
pub mod series;

pub use clustering::{choose_k, extract_communities, ClusterOptions, Communities};
pub use eigen::{laplacian_spectrum, low_spectrum, LowSpectrum, Solver, SpectrumOptions, DEFAULT_DENSE_LIMIT};
pub use laplacian::{laplacian, NormalizedAdjacency};
pub use projection::{project, CommonsRule, NodeFilter, ProjectedGraph};
pub use series::{community_series, labels_by_agent, CommunitySeries};
