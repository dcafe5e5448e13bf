//! Exact value-of-history computations for sequential social learning.
//!
//! Agents arrive in sequence, observe every predecessor's binary action and a
//! private signal, and guess a binary state. The crate computes what access
//! to that history is worth to each agent, which signal structures make it
//! worth the most, and how a monopolist selling access would price it.

pub mod belief;
pub mod corpus;
pub mod design;
pub mod engine;
pub mod market;
pub mod optimize;
pub mod rational;
pub mod report;
pub mod sweep;

pub use belief::{Action, Belief, BeliefDistribution, InformationStructure, Signal, State};
pub use engine::{Limits, PayoffProfile, TieBreakRule};
pub use rational::Rat;
