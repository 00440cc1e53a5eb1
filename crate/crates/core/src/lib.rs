//! Round elimination for locally checkable problems on 2-colored Δ-regular
//! graphs.

pub mod bounds;
pub mod cert;
pub mod error;
pub mod family;
pub mod problem;
pub mod re;
pub mod relax;
pub mod sim;
pub mod zero_round;

pub use error::{Error, Result};
pub use problem::{
    CondensedConfiguration, Constraint, Group, Label, NamedConfiguration, Problem, Side, SingleConfiguration, Term,
};
