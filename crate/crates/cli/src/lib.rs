//! Report schemas shared by the `matchmarket` binary and its tests.

pub mod report;
