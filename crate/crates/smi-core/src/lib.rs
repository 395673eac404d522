//! Exact, desk-scale machinery for measured group theory over graph products:
//! canonical normal forms for graph products of finite groups, strict
//! cocycle couplings with greedy fundamental domains and exact rational
//! indices, the free-product and graph-product coupling extensions with
//! exhaustive disjointness/coverage verification on truncated balls, and the
//! correspondence with invariant measures on spaces of identity-fixing maps.
//!
//! The narrative guide lives in `book/`; the `smi` binary drives everything
//! from JSON configs.

pub mod contexts;
pub mod coupling;
pub mod enumerate;
pub mod error;
pub mod extend;
pub mod fingroup;
pub mod graph;
pub mod measure;
pub mod oracle;
pub mod pipeline;
pub mod randomorph;
pub mod rat;
pub mod word;

pub use error::{Error, Result};
pub use fingroup::{ElemId, FiniteGroup};
pub use graph::{build_graph, Graph, Neighborhood, VertexId};
pub use word::{GraphProduct, GroupElement, Syllable};
