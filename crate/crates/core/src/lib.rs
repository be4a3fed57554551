//! Exact arithmetic for L-functions and characteristic power series of
//! `Z_{p^l}` Artin-Schreier-Witt towers.
//!
//! Two independent routes are provided: the Dwork operator matrix over
//! truncated power series in `pi_1..pi_l` ([`dwork`]), and brute-force
//! exponential sums over finite fields ([`charsum`]).  [`verify`] compares
//! them and checks the slope statements; [`polygon`] computes Newton polygons.

pub mod arith;
pub mod charsum;
pub mod dwork;
pub mod error;
pub mod linalg;
pub mod mvseries;
pub mod polygon;
pub mod ring_tower;
pub mod tower;
pub mod valuation;
pub mod verify;

pub use error::{Error, Result};
pub use valuation::Valuation;
