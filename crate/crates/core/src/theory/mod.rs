//! Exact interval-union constructions and sample-complexity calculators.

mod bounds;
mod counterexample;
mod encoding;
mod interval;

pub use bounds::{
    capacity_log_bound, covering_bound, covering_log_bound, reference, sample_size_bound, sample_size_real, BoundInputs,
};
pub use counterexample::{
    counterexample_demo, find_evading_union, max_deviation, CounterexampleDynamics, CounterexampleMdp,
    CounterexampleReport, CxState, UnionAction,
};
pub use encoding::{cantor_pair, cantor_unpair, index_of_union, nat_to_seq, seq_to_nat, union_from_index};
pub use interval::IntervalUnion;

use crate::sim::SimError;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("union has measure {0}, expected exactly 1/2")]
    MeasureNotHalf(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}
