//! Core model for rendering HTML documents as layered 3D "DOM cities".
//!
//! The pipeline is:
//!
//! 1. [`dom::parse_html`] turns HTML text into a [`dom::DomTree`] of element
//!    nodes, each addressable by a stable [`dom::NodePath`].
//! 2. [`layout`] attaches a page-plane rectangle to every element, either from
//!    browser measurements ([`layout::ingest_geometry`]) or from a
//!    slice-and-dice treemap ([`layout::synthetic_layout`]).
//! 3. [`query::apply_filters`] selects the visible elements (layer range,
//!    text search, subtree isolation, viewport cropping).
//! 4. [`scene::build_scene`] stacks one box per visible element on the layer
//!    of its depth and connects children to parents; [`scene::diff_scenes`]
//!    produces path-keyed updates between two scenes.

pub mod dom;
pub mod error;
pub mod layout;
pub mod query;
pub mod scene;

#[cfg(feature = "testkit")]
pub mod testkit;

pub use error::{Error, Result};
