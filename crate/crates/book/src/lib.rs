//! The guide's chapters, compiled so that their listings run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/ball-model.md")]
pub mod ball_model {}
#[doc = include_str!("../../../book/src/cartan-and-chains.md")]
pub mod cartan_and_chains {}
#[doc = include_str!("../../../book/src/busemann.md")]
pub mod busemann {}
#[doc = include_str!("../../../book/src/bounded-forms.md")]
pub mod bounded_forms {}
#[doc = include_str!("../../../book/src/toledo.md")]
pub mod toledo {}
#[doc = include_str!("../../../book/src/projective.md")]
pub mod projective {}
#[doc = include_str!("../../../book/src/reconstruction.md")]
pub mod reconstruction {}
#[doc = include_str!("../../../book/src/finite-models.md")]
pub mod finite_models {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
