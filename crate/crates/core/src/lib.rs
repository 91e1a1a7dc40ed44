//! Exact differential elimination through sparse resultants.

pub mod poly;
pub mod det;
pub mod lp;
pub mod matching;
pub mod system;
pub mod analysis;
pub mod frontend;
pub mod polytope;
pub mod ags;
pub mod sylvester;
pub mod specialize;
pub mod pipeline;
