//! Velocity and delay distributions, their shared text grammar, and the
//! valid-pair check.
//!
//! Grammar (also used by the CLI): `uniform:LO,HI`, `point:C`, `exp:RATE`,
//! `finite:V1,V2,...,VK[;SIGMA]` (equal weights, SIGMA optional, default 0).
//! All reals are IEEE binary64.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::error::ConfigError;

/// Declarative description of a velocity distribution mu or delay
/// distribution nu. Malformed parameters are rejected at construction, not
/// at sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    Uniform { lo: f64, hi: f64 },
    PointMass { value: f64 },
    /// Equal-weight draw from `values`, plus centered Gaussian noise with
    /// standard deviation `noise_sigma`. Values are kept sorted.
    FiniteSupport { values: Vec<f64>, noise_sigma: f64 },
    Exponential { rate: f64 },
}

impl DistributionSpec {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self, ConfigError> {
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo >= hi {
            return Err(ConfigError::BadUniform { lo, hi });
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn point_mass(value: f64) -> Result<Self, ConfigError> {
        if !value.is_finite() || value < 0.0 {
            return Err(ConfigError::BadPointMass { value });
        }
        Ok(Self::PointMass { value })
    }

    pub fn finite_support(mut values: Vec<f64>, noise_sigma: f64) -> Result<Self, ConfigError> {
        if values.is_empty() {
            return Err(ConfigError::BadFiniteSupport {
                reason: "needs at least one value".into(),
            });
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ConfigError::BadFiniteSupport {
                reason: "values must be finite and >= 0".into(),
            });
        }
        if !noise_sigma.is_finite() || noise_sigma < 0.0 {
            return Err(ConfigError::BadFiniteSupport {
                reason: format!("noise sigma must be finite and >= 0, got {noise_sigma}"),
            });
        }
        values.sort_by(f64::total_cmp);
        if values.windows(2).any(|w| w[0] == w[1]) {
            return Err(ConfigError::BadFiniteSupport {
                reason: "values must be distinct".into(),
            });
        }
        Ok(Self::FiniteSupport {
            values,
            noise_sigma,
        })
    }

    pub fn exponential(rate: f64) -> Result<Self, ConfigError> {
        if !rate.is_finite() || rate <= 0.0 {
            return Err(ConfigError::BadExponential { rate });
        }
        Ok(Self::Exponential { rate })
    }

    /// True when the distribution is diffuse enough to rule out triple
    /// collisions almost surely: genuinely non-atomic, or finite support
    /// with jitter (the realized grid is almost surely free of
    /// simultaneous collision times — jitter exists precisely to avoid
    /// them).
    pub fn is_non_atomic(&self) -> bool {
        match self {
            Self::Uniform { .. } | Self::Exponential { .. } => true,
            Self::PointMass { .. } => false,
            Self::FiniteSupport { noise_sigma, .. } => *noise_sigma > 0.0,
        }
    }

    /// Check usability as a delay distribution: support must be strictly
    /// positive so fire times strictly increase.
    pub fn check_delay_legal(&self) -> Result<(), ConfigError> {
        let illegal = |reason: &str| {
            Err(ConfigError::DelayIllegal {
                spec: self.to_string(),
                reason: reason.into(),
            })
        };
        match self {
            Self::PointMass { value } if *value == 0.0 => illegal("a zero delay never fires"),
            Self::Uniform { lo, .. } if *lo == 0.0 => illegal("support reaches down to 0"),
            Self::FiniteSupport { noise_sigma, .. } if *noise_sigma > 0.0 => {
                illegal("Gaussian noise puts mass on non-positive delays")
            }
            Self::FiniteSupport { values, .. } if values[0] == 0.0 => {
                illegal("contains the value 0")
            }
            _ => Ok(()),
        }
    }

    /// Build the velocity sampler for one stream.
    ///
    /// For a noisy finite support this is where the noise enters: each
    /// support value is jittered once, here, by centered Gaussian noise
    /// with standard deviation `noise_sigma`, and every later draw picks
    /// uniformly among the realized values. Same-value bullets therefore
    /// share an exactly equal velocity (they can never catch each other),
    /// while the jitter keeps distinct values from producing simultaneous
    /// collisions. A jittered value falling below zero is clamped to 0 and
    /// tallied in the sampler's clamp counter.
    pub fn velocity_sampler<R: Rng>(&self, rng: &mut R) -> VelocitySampler {
        let mut clamped = 0;
        let kind = match self {
            Self::Uniform { lo, hi } => SamplerKind::Uniform { lo: *lo, hi: *hi },
            Self::PointMass { value } => SamplerKind::PointMass { value: *value },
            Self::FiniteSupport {
                values,
                noise_sigma,
            } => {
                let realized = if *noise_sigma == 0.0 {
                    values.clone()
                } else {
                    let noise = Normal::new(0.0, *noise_sigma).unwrap();
                    values
                        .iter()
                        .map(|v| {
                            let jittered = v + noise.sample(rng);
                            if jittered < 0.0 {
                                clamped += 1;
                                0.0
                            } else {
                                jittered
                            }
                        })
                        .collect()
                };
                SamplerKind::Atoms { values: realized }
            }
            Self::Exponential { rate } => SamplerKind::Exponential { rate: *rate },
        };
        VelocitySampler { kind, clamped }
    }

    /// One strictly positive delay draw. The caller must have verified
    /// delay legality; exact-zero draws (possible for Exponential at
    /// probability ~2^-53) are redrawn.
    pub fn sample_delay<R: Rng>(&self, rng: &mut R) -> f64 {
        debug_assert!(self.check_delay_legal().is_ok());
        match self {
            Self::Uniform { lo, hi } => rng.gen_range(*lo..*hi),
            Self::PointMass { value } => *value,
            Self::FiniteSupport { values, .. } => values[rng.gen_range(0..values.len())],
            Self::Exponential { rate } => {
                let exp = Exp::new(*rate).unwrap();
                loop {
                    let d = exp.sample(rng);
                    if d > 0.0 {
                        return d;
                    }
                }
            }
        }
    }
}

/// Drawn-once realization of a velocity distribution for one stream.
#[derive(Debug, Clone)]
pub struct VelocitySampler {
    kind: SamplerKind,
    clamped: u64,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Uniform { lo: f64, hi: f64 },
    PointMass { value: f64 },
    Atoms { values: Vec<f64> },
    Exponential { rate: f64 },
}

impl VelocitySampler {
    /// One velocity draw.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            SamplerKind::Uniform { lo, hi } => rng.gen_range(*lo..*hi),
            SamplerKind::PointMass { value } => *value,
            SamplerKind::Atoms { values } => values[rng.gen_range(0..values.len())],
            SamplerKind::Exponential { rate } => Exp::new(*rate).unwrap().sample(rng),
        }
    }

    /// Number of support values clamped up to 0 by the jitter.
    pub fn clamped_values(&self) -> u64 {
        self.clamped
    }
}

/// Outcome of the valid-pair check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairVerdict {
    /// At least one member is non-atomic: almost surely no triple collisions.
    Valid,
    /// Both members are atomic. Not necessarily broken (equal point masses
    /// never collide at all) but not provably safe; runtime triple-collision
    /// detection is the backstop.
    NotProvablyValid,
}

/// A `(mu, nu)` pair is valid when at least one member is non-atomic.
pub fn validate_pair(mu: &DistributionSpec, nu: &DistributionSpec) -> PairVerdict {
    if mu.is_non_atomic() || nu.is_non_atomic() {
        PairVerdict::Valid
    } else {
        PairVerdict::NotProvablyValid
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
            Self::PointMass { value } => write!(f, "point:{value}"),
            Self::FiniteSupport {
                values,
                noise_sigma,
            } => {
                write!(f, "finite:")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                if *noise_sigma > 0.0 {
                    write!(f, ";{noise_sigma}")?;
                }
                Ok(())
            }
            Self::Exponential { rate } => write!(f, "exp:{rate}"),
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse_err = |reason: &str| ConfigError::Parse {
            input: s.to_string(),
            reason: reason.into(),
        };
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| parse_err("expected KIND:ARGS"))?;
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| parse_err(&format!("bad number '{t}': {e}")))
        };
        match kind.trim() {
            "uniform" => {
                let (lo, hi) = args
                    .split_once(',')
                    .ok_or_else(|| parse_err("uniform needs LO,HI"))?;
                Self::uniform(num(lo)?, num(hi)?)
            }
            "point" => Self::point_mass(num(args)?),
            "exp" => Self::exponential(num(args)?),
            "finite" => {
                let (values_part, sigma_part) = match args.split_once(';') {
                    Some((v, s)) => (v, Some(s)),
                    None => (args, None),
                };
                let values = values_part
                    .split(',')
                    .map(num)
                    .collect::<Result<Vec<_>, _>>()?;
                let sigma = sigma_part.map(num).transpose()?.unwrap_or(0.0);
                Self::finite_support(values, sigma)
            }
            other => Err(parse_err(&format!("unknown distribution kind '{other}'"))),
        }
    }
}
