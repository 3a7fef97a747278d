//! Cyclification, blending, corpus distance matrices and clustering of
//! animation clips.

mod blend;
mod cluster;
mod cyclify;
mod distance;

pub use blend::{blend, BlendOptions, BlendPath, Space};
pub use cluster::{adjusted_rand_index, cut_dendrogram, hierarchical_cluster, Dendrogram, Merge};
pub use cyclify::{cyclify, Cyclified, CyclifyOptions, CyclifyReport};
pub use distance::{closed_srv, distance_matrix, linear_distance, DistanceMatrix, MatrixOptions, MatrixResult, Metric};
