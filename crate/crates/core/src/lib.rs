//! Verification and spectra for the so(6) integrable spin chain.

pub mod bethe;
pub mod boundary;
pub mod commands;
pub mod config;
pub mod fusion;
pub mod linalg;
pub mod report;
pub mod rmatrix;
pub mod spectrum;
pub mod tensor;
pub mod transfer;
pub mod verify;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/rmatrix.md")]
    mod rmatrix {}
    #[doc = include_str!("../../../book/src/boundary.md")]
    mod boundary {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/bethe.md")]
    mod bethe {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
