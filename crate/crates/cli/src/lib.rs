//! Output encoding shared by the `multlab` binary and its tests.

pub mod output;
