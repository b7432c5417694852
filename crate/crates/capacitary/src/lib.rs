#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bmo;
pub mod choquet;
pub mod cli;
pub mod content;
pub mod error;
pub mod lattice;
pub mod numeric;
pub mod operators;
pub mod young;
pub mod verify;
