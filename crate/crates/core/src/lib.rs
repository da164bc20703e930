//! Equidistant p-variation of processes driven by alpha-stable Lévy noise,
//! its stable limit laws, and a minimum-distance estimator of the stability
//! index and scale built on them.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod csv_io;
pub mod error;
pub mod estimator;
pub mod ks;
pub mod limit_law;
pub mod optimize;
pub mod path_sim;
pub mod pvariation;
pub mod quad;
pub mod rng;
pub mod stable_law;
pub mod verify;

pub use error::{Error, Result};
pub use rng::RandomStream;
pub use stable_law::StableParams;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/stable-laws.md")]
    mod stable_laws {}
    #[doc = include_str!("../../../book/src/paths.md")]
    mod paths {}
    #[doc = include_str!("../../../book/src/pvariation.md")]
    mod pvariation {}
    #[doc = include_str!("../../../book/src/limit-law.md")]
    mod limit_law {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
