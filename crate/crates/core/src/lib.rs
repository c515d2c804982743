//! Quandle counting invariants and their enhancement by bilinear bead colorings.
//!
//! A finite quandle colors the arcs of a link diagram; a compatible family of
//! bilinear forms then assigns each coloring a count of vector-valued "bead"
//! colorings. Collecting those counts gives a polynomial invariant that
//! specializes to the counting invariant at `u = 1`.

pub mod catalog;
pub mod coloring;
pub mod diagram;
pub mod field;
pub mod forms;
pub mod invariant;
pub mod quandle;

pub use catalog::{Catalog, CatalogEntry, CatalogError};
pub use coloring::{count_beads, enumerate_xcolorings, BeadColoring, Engine, XColoring};
pub use diagram::{import_pd, Crossing, DiagramFile, LinkDiagram, Sign};
pub use field::{FMatrix, FVector, PrimeField, VectorSpace};
pub use forms::{search_forms, validate_form, BilinearForm, FormArray, SearchConfig, SearchMode};
pub use invariant::{compare, compute_invariant, counting_invariant, InvariantPolynomial, InvariantReport};
pub use quandle::{validate_quandle, Quandle};
