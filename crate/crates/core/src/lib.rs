//! Hierarchical reinforcement learning in parameterized action spaces.
//!
//! An action here is a tuple `(a, x)`: a discrete choice `a` plus a continuous
//! parameter vector `x` specific to that choice. The library provides
//!
//! - a minimal reverse-mode autodiff core ([`diffcore`]) sufficient for MLP
//!   policies, critics, and Hessian-vector products,
//! - distributions and the Gumbel-Max / Gumbel-Softmax reparameterizations
//!   ([`distributions`]),
//! - the Platform benchmark and an exactly-solvable toy domain ([`envs`]),
//! - a hierarchical policy architecture where the parameter network is
//!   conditioned on the discrete action ([`policies`]),
//! - three learners: trust-region optimization of the hierarchical policy
//!   ([`trpo`]), an off-policy reparameterized actor-critic ([`svg0`]), and
//!   the flat-actor DDPG baseline with the invert-gradient rule ([`paddpg`]),
//! - an experiment harness with a CLI ([`harness`]).

pub mod diffcore;
pub mod distributions;
pub mod envs;
pub mod error;
pub mod harness;
pub mod paddpg;
pub mod policies;
pub mod rng;
pub mod svg0;
pub mod trpo;

pub use error::{Error, Result};
