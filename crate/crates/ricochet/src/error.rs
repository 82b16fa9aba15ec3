use thiserror::Error;

/// Failures raised while resolving a bullet sequence.
#[derive(Debug, Error)]
pub enum SimError {
    /// Two interacting events coincide within the configured tolerance.
    ///
    /// Under a valid distribution pair this has probability zero; seeing it
    /// means the input is atomic-on-atomic or otherwise degenerate.
    #[error(
        "triple collision: events at t={earlier} and t={later} coincide within tolerance \
         (bullets {bullets:?})"
    )]
    TripleCollision {
        earlier: f64,
        later: f64,
        bullets: [usize; 3],
    },

    #[error("fire time {fire_time} does not exceed the previous fire time {previous}")]
    NonMonotoneFireTime { fire_time: f64, previous: f64 },

    #[error("bullet carries index {found} but is ingested at position {expected}")]
    IndexMismatch { expected: usize, found: usize },

    #[error("engine was poisoned by an earlier error and must be discarded")]
    Poisoned,

    #[error("collision sink: {0}")]
    Sink(#[from] std::io::Error),
}

/// Rejections produced while building distributions or process configurations.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("uniform bounds must satisfy 0 <= lo < hi and be finite, got {lo}..{hi}")]
    BadUniform { lo: f64, hi: f64 },

    #[error("point mass must be finite and >= 0, got {value}")]
    BadPointMass { value: f64 },

    #[error("exponential rate must be finite and > 0, got {rate}")]
    BadExponential { rate: f64 },

    #[error("finite support: {reason}")]
    BadFiniteSupport { reason: String },

    #[error("{spec} is not usable as a delay distribution: {reason}")]
    DelayIllegal { spec: String, reason: String },

    #[error("fixed v0 must be finite and >= 0, got {value}")]
    BadFixedV0 { value: f64 },

    #[error(
        "neither the velocity nor the delay distribution is provably non-atomic; \
         triple collisions are possible (pass the atomic-pair override to proceed)"
    )]
    AtomicPair,

    #[error("failed to parse distribution '{input}': {reason}")]
    Parse { input: String, reason: String },
}
