//! Orlicz-space calculus with working operators on planar domains.
//!
//! The crate covers Young functions and their conjugates, Luxemburg norms of
//! sampled fields, a discrete Bogovskii operator on star-shaped and composite
//! domains, dual (negative) Orlicz norms of gradients, and the reconstruction of
//! discrete pressures from P2/P0 finite elements.

pub mod bogovskii;
pub mod error;
pub mod experiment;
pub mod fem;
pub mod field;
pub mod grid;
pub mod hardy;
pub mod negnorm;
pub mod norms;
pub mod quadrature;
pub mod young;

pub use error::{Error, Result};
pub use field::{Cell, SampledField, Values};
pub use young::{GrowthClass, YoungFunction};
