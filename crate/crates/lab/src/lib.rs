//! File formats, benchmark harness and validators around `pmvb-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod format;
pub mod metrics;
pub mod validate;
