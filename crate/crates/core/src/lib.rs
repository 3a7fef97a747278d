//! Skeletal animations as curves on Riemannian manifolds.
//!
//! A clip is a curve in joint space. Through the square-root velocity (SRV)
//! representation, unit-length curves become points of an L² sphere and
//! closed curves points of a submanifold of it. Geodesics on these spaces
//! drive the three applications in [`apps`]:
//!
//! - [`apps::cyclify`] makes a nearly periodic clip loop seamlessly;
//! - [`apps::blend`] interpolates between two clips;
//! - [`apps::distance_matrix`] and [`apps::hierarchical_cluster`] group
//!   similar motions.
//!
//! ```
//! use elastic_motion::curve::{project_closed, srv_transform, Domain, SampledCurve};
//!
//! let arc = SampledCurve::from_fn(2, 100, 1.0, |t| {
//!     let a = 5.0 * t;
//!     vec![a.cos(), a.sin()]
//! })?;
//! let srv = srv_transform(&arc, Domain::Open)?;
//! let closed = project_closed(&srv, 1e-8, 50)?;
//! assert!(closed.residual < 1e-8);
//! # Ok::<(), elastic_motion::Error>(())
//! ```

pub mod apps;
pub mod curve;
pub mod error;
pub mod geodesic;
pub mod mocap;
pub mod shape;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/motion-data.md")]
    mod motion_data {}
    #[doc = include_str!("../../../book/src/srv-curves.md")]
    mod srv_curves {}
    #[doc = include_str!("../../../book/src/geodesics.md")]
    mod geodesics {}
    #[doc = include_str!("../../../book/src/shape-space.md")]
    mod shape_space {}
    #[doc = include_str!("../../../book/src/cyclification.md")]
    mod cyclification {}
    #[doc = include_str!("../../../book/src/blending.md")]
    mod blending {}
    #[doc = include_str!("../../../book/src/clustering.md")]
    mod clustering {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
