//! Numerical tools for CR structures on the unit sphere in `C²`: the standard
//! frame and contact form, deformed structures, contact flows and their
//! Beltrami coefficients, horizontal lifts through the Hopf map, and
//! variations of the dilatation under flows.
//!
//! The guide in `book/` walks through each part with runnable examples.

pub mod commands;
pub mod config;
pub mod cr;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod grid;
pub mod hopf;
pub mod jet;
pub mod report;
pub mod sphere;
pub mod variation;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/frame.md")]
    mod frame {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/structures.md")]
    mod structures {}
    #[doc = include_str!("../../../book/src/flows.md")]
    mod flows {}
    #[doc = include_str!("../../../book/src/hopf.md")]
    mod hopf {}
    #[doc = include_str!("../../../book/src/variation.md")]
    mod variation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
