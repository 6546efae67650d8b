//! Additive-combinatorics primitives over Z₂ⁿ × Z₄ⁿ.

pub mod freiman;
pub mod group;
pub(crate) mod ntt;
pub mod quadruples;

pub use freiman::{freiman_check, FreimanMode, FreimanOutcome, FreimanWitness, PartialMap};
pub use group::{
    difference_set, doubling_report, iterated_sumset, iterated_sumset_with, mixed_sumset, sumset,
    sumset_with, DoublingReport, GroupElem, GroupSet, SumsetMode, MAX_DENSE_DIM,
};
pub use quadruples::{
    cauchy_schwarz_midpoint, count_quadruples, quadruple_bound, quadruple_bound_check, BoundCheck,
    QuadrupleMethod, QuadrupleReport,
};
