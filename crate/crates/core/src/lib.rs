//! Complex hyperbolic geometry with chains, Cartan invariants, bounded forms
//! and Toledo invariants, plus exact finite models of the underlying
//! resolutions.
//!
//! ```
//! use chaingeo::cartan::{cartan_invariant, chain_through};
//! use chaingeo::sampling::{boundary_point, rng};
//!
//! let mut r = rng(5);
//! let (a, b) = (boundary_point(2, &mut r), boundary_point(2, &mut r));
//! let chain = chain_through(&a, &b)?;
//! let c = cartan_invariant(&a, &chain.sample(1.0), &b)?;
//! assert!((c.value.abs() - 1.0).abs() < 1e-9);
//! # Ok::<(), chaingeo::Error>(())
//! ```
//!
//! The guide in `book/` walks through each module; its listings are
//! compiled as doctests by the `chaingeo-book` crate.

pub mod boundary_map;
pub mod busemann;
pub mod cartan;
pub mod error;
pub mod finite;
pub mod forms;
pub mod hermitian;
pub mod isometry;
pub mod projective;
pub mod quadrature;
pub mod reconstruction;
pub mod sampling;
pub mod toledo;

pub use error::{Error, Result};
