//! Harness library behind the `pptsq` binary: the reference state families,
//! the two-cut composite construction, and the parameter-scan pipeline.

pub mod families;
pub mod scan;

pub use families::{build_composite, family_state, CompositeBundle, FamilyState, StateFamily};
pub use scan::{default_grid, scan, ScanRecord, ScanReport, ScanSummary, Verdict};
