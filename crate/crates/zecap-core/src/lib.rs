//! Zero-error feedback capacity of finite state channels with state
//! information at both encoder and decoder.
//!
//! The capacity is computed in three cooperating pieces:
//!
//! * [`positivity`] decides whether the capacity is positive at all by
//!   solving a finite-horizon max-min game over the channel's support
//!   topology.
//! * [`value_iter`] runs average-reward value iteration whose per-state
//!   inner step ([`inner`]) is a small linear program, producing converging
//!   lower/upper bounds on the capacity.
//! * [`bellman`] verifies candidate analytical solutions of the associated
//!   fixed-point equation, and [`oracle`] provides independent ground truth
//!   through exact zero-error message counts and explicit feedback code
//!   trees.
//!
//! [`corpus`] ships the reference channels all of the above is validated
//! against. Everything here is `no_std` (alloc only); file formats and the
//! command line live in the companion `zecap` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bellman;
pub mod channel;
pub mod corpus;
pub mod inner;
pub mod oracle;
pub mod positivity;
pub mod simplex;
pub mod value_iter;

pub use channel::{Channel, ChannelError, ChannelSpec, SupportIndex, TransitionSpec};
pub use inner::InputPmf;
pub use positivity::{PositivityDecision, PositivityResult};
pub use value_iter::{BoundsTrace, CapacityEstimate, PolicyTable, ValueFunction};
