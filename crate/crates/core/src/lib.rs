//! GHZ parallel repetition, its recoding into Z₄ⁿ cross-functions, and a
//! constructive additive-combinatorics pipeline that measures how much
//! shift structure a winning strategy can carry.

pub mod additive;
pub mod error;
pub mod exact;
pub mod extract;
pub mod game;
pub mod io;
pub mod seeds;
pub mod vectors;
pub mod z4;

pub use error::{Error, Result};
pub use exact::Exact;
pub use vectors::{BitVec, QuatVec};
