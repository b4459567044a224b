#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abel;
pub mod cli;
pub mod error;
pub mod kernels;
pub mod numerics;
pub mod transforms;
