pub mod error;
pub mod padic;
pub mod cli;
pub mod counterexample;
pub mod formal_group;
pub mod orbit;
pub mod parallel;
pub mod series;
pub mod subscheme;
pub mod weightspace;

pub use error::{Error, Result};
