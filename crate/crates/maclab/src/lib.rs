//! maclab: rate regions and coding-scheme validation for state-dependent
//! multiple-access channels with strictly causal state information at the
//! encoders.
//!
//! The crate is organized around a pipeline:
//!
//! - [`prob`] — dense joint probability tables and information measures;
//! - [`channels`] — discrete memoryless state-dependent MAC models and the
//!   joint-distribution construction from inputs, states, and test channels;
//! - [`regions`] — fixed-distribution rate polytopes, closed-form capacity
//!   regions, convex envelopes, membership and inclusion tests;
//! - [`optimize`] — seeded multi-start search over input distributions and
//!   test channels to trace achievable-region boundaries;
//! - [`feedback`] — Monte Carlo validation of the Schalkwijk-Kailath-style
//!   state-cooperation scheme for the Gaussian MAC with output feedback.

pub mod channels;
pub mod checks;
pub mod feedback;
pub mod optimize;
pub mod prob;
pub mod regions;

pub(crate) mod numeric;

pub use channels::{AuxChannelSet, ChannelSpec, InputAssignment};
pub use prob::{JointTable, Pmf};
pub use regions::{RatePolytope, RegionEnvelope};
