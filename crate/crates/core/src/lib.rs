//! False-name-proof combinatorial auctions over small item sets.
//!
//! Mechanisms are expressed as price functions run in a price-oriented,
//! rationing-free way ([`porf`]). The crate ships the classic mechanisms,
//! checkers for the conditions that characterize false-name-proofness,
//! a bounded search for false-name manipulations, and the experiment
//! drivers that compare the mechanisms.

pub mod axioms;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod io;
pub mod manipulation;
pub mod mechanisms;
pub mod porf;
pub mod report;
pub mod valuation;
pub mod welfare;

pub use domain::{Agent, Bundle, Caps, Money, Outcome, Profile};
pub use error::{Error, Result};
pub use porf::{demand, run_auction, AllocationRule, MechanismRun, PriceFunction};
pub use report::{CheckReport, Counterexample, Verdict};
pub use valuation::ValuationSpec;
pub use welfare::{efficient_allocation, efficient_value};
