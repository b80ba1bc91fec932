//! Linear sets over finite fields, i-clubs, and the rank-metric codes they
//! determine.

pub mod constructions;
pub mod error;
pub mod field;
pub mod fqlinalg;
pub mod linset;
pub mod rmcode;
pub mod search;
pub mod tally;

pub use error::{Error, Result};
pub use tally::Tally;
