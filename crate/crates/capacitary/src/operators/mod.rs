//! Maximal operators, Riesz potentials and their commutators.

mod commutator;
mod maximal;
mod riesz;

pub use commutator::{commutator, commutator_with, iterated_commutator, ExponentPair};
pub use maximal::{
    family_sup, maximal_content, maximal_content_with, maximal_fractional, maximal_orlicz_fractional,
    maximal_sharp,
};
pub use riesz::{beta_riesz_potential, riesz_potential, self_cell_constant, RieszMethod, RieszOperator, RieszParams};
