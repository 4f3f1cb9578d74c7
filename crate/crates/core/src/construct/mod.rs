//! Assembly of the field bundle from its region-wise pieces.

pub mod bundle;
pub mod eplus;
pub mod exterior;
pub mod grid;
pub mod interior;
pub mod potential;

pub use bundle::{build_bundle, bundle_from_samples, BundleParts, FieldBundle, FIELD_NAMES};
