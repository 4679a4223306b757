#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod distributions;
pub mod error;
pub mod measures;
pub mod numeric;
pub mod rng;
pub mod sample;
pub mod resampling;
pub mod tail_index;
pub mod montecarlo;
pub mod io;
pub mod cli;
