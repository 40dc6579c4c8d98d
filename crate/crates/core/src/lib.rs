//! Transfer exponents, minimax lower-bound constructions and transfer
//! learning procedures over finite and one-sided threshold classes.
//!
//! The crate is organised bottom-up:
//!
//! - [`hypothesis`] and [`projection`]: hypotheses, samples, and exact
//!   enumeration of a class over a finite point set.
//! - [`distribution`]: discrete joints, threshold scenarios, the lower-bound
//!   families, packings and KL utilities.
//! - [`discrepancy`]: brute-force transfer exponents and divergences.
//! - [`transfer_erm`], [`cost_adaptive`], [`source_select`]: the learning
//!   procedures.
//! - [`ratelab`]: Monte Carlo rate tables, slope fits and theory values.

pub mod cost_adaptive;
pub mod discrepancy;
pub mod distribution;
pub mod error;
pub mod hypothesis;
pub mod projection;
pub mod ratelab;
pub mod rng;
pub mod source_select;
pub mod transfer_erm;

pub use error::{Error, Result};
pub use hypothesis::{
    empirical_disagreement, empirical_risk, erm, project_class, FiniteClass, Hypothesis, HypothesisClass,
    LabeledSample, Orientation, Point, SupportPoint, UnlabeledSample,
};
