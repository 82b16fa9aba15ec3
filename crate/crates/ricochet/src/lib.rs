//! Simulation engine and experiment harness for the bullet process:
//! bullets are fired from the origin at i.i.d. random speeds with i.i.d.
//! random delays, and whenever a faster bullet catches a slower one both
//! annihilate. The crate provides exact collision resolution for finite
//! truncations (streaming, incremental), a brute-force reference resolver,
//! Monte Carlo estimators for the first bullet's survival probability and
//! the critical velocity, and finite-scale diagnostics for the process's
//! structural laws.
//!
//! All reals are IEEE binary64. Every randomized quantity is a pure
//! function of `(master_seed, stream_id)` for a fixed crate version.

pub mod analysis;
pub mod bullet;
pub mod config;
pub mod distribution;
pub mod engine;
pub mod error;
pub mod estimators;
pub mod kinematics;
pub mod oracle;
pub mod resolution;
pub mod rng;
pub mod verify;

pub use bullet::Bullet;
pub use config::{generate_sequence, BulletGenerator, ProcessConfig};
pub use distribution::{validate_pair, DistributionSpec, PairVerdict};
pub use engine::{resolve_truncation, CollisionSink, Engine, InsertionOutcome, SurvivorChange};
pub use error::{ConfigError, SimError};
pub use kinematics::{catch_time, Tolerance};
pub use oracle::brute_resolve;
pub use resolution::{Collision, Resolution};
pub use rng::RngStream;
