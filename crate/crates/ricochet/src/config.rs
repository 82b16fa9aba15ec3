//! Validated process configuration and bullet sequence generation.

use rand_chacha::ChaCha8Rng;

use crate::bullet::Bullet;
use crate::distribution::{validate_pair, DistributionSpec, PairVerdict, VelocitySampler};
use crate::error::ConfigError;
use crate::rng::RngStream;

/// Everything needed to realize a bullet process reproducibly: the
/// distribution pair, the master seed, and optionally a forced velocity for
/// bullet 0 (the `b_0^v` construction behind the theta estimator).
///
/// Immutable after construction; share freely across workers. Each worker
/// owns its own generator (one stream id).
#[derive(Debug, Clone)]
pub struct ProcessConfig {
    mu: DistributionSpec,
    nu: DistributionSpec,
    seed: u64,
    fixed_v0: Option<f64>,
}

impl ProcessConfig {
    /// Build a configuration, rejecting delay-illegal `nu` and atomic-only
    /// pairs. Use [`ProcessConfig::new_unchecked_pair`] to accept an
    /// atomic-on-atomic pair anyway.
    pub fn new(
        mu: DistributionSpec,
        nu: DistributionSpec,
        seed: u64,
    ) -> Result<Self, ConfigError> {
        nu.check_delay_legal()?;
        if validate_pair(&mu, &nu) == PairVerdict::NotProvablyValid {
            return Err(ConfigError::AtomicPair);
        }
        Ok(Self {
            mu,
            nu,
            seed,
            fixed_v0: None,
        })
    }

    /// Like [`ProcessConfig::new`] but skips the valid-pair requirement.
    /// Runtime triple-collision detection remains the backstop.
    pub fn new_unchecked_pair(
        mu: DistributionSpec,
        nu: DistributionSpec,
        seed: u64,
    ) -> Result<Self, ConfigError> {
        nu.check_delay_legal()?;
        Ok(Self {
            mu,
            nu,
            seed,
            fixed_v0: None,
        })
    }

    /// Force bullet 0's velocity. The forced value does not consume a draw,
    /// so sequences with different `v` under one stream share every other
    /// bullet — the common-random-numbers coupling the estimators rely on.
    pub fn with_fixed_v0(mut self, v: f64) -> Result<Self, ConfigError> {
        if !v.is_finite() || v < 0.0 {
            return Err(ConfigError::BadFixedV0 { value: v });
        }
        self.fixed_v0 = Some(v);
        Ok(self)
    }

    pub fn mu(&self) -> &DistributionSpec {
        &self.mu
    }

    pub fn nu(&self) -> &DistributionSpec {
        &self.nu
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fixed_v0(&self) -> Option<f64> {
        self.fixed_v0
    }

    /// Infinite bullet source for one stream of this configuration. A noisy
    /// finite-support velocity grid is realized here, once per stream.
    pub fn generator(&self, stream_id: u64) -> BulletGenerator {
        let mut rng = RngStream::new(self.seed, stream_id).rng();
        let mu = self.mu.velocity_sampler(&mut rng);
        BulletGenerator {
            rng,
            mu,
            nu: self.nu.clone(),
            fixed_v0: self.fixed_v0,
            next_index: 0,
            fire_time: 0.0,
        }
    }
}

/// Streaming bullet source. Bullet 0 fires at time 0; bullet `i` fires a
/// freshly drawn delay after bullet `i-1`. Per bullet the velocity is drawn
/// first, then the delay, so prefixes of one stream coincide for any count.
#[derive(Debug)]
pub struct BulletGenerator {
    rng: ChaCha8Rng,
    mu: VelocitySampler,
    nu: DistributionSpec,
    fixed_v0: Option<f64>,
    next_index: usize,
    fire_time: f64,
}

impl BulletGenerator {
    /// Number of jittered support values clamped up to 0 for this stream.
    pub fn clamped_velocities(&self) -> u64 {
        self.mu.clamped_values()
    }
}

impl Iterator for BulletGenerator {
    type Item = Bullet;

    fn next(&mut self) -> Option<Bullet> {
        let index = self.next_index;
        let velocity = match (index, self.fixed_v0) {
            (0, Some(v)) => v,
            _ => self.mu.sample(&mut self.rng),
        };
        if index > 0 {
            self.fire_time += self.nu.sample_delay(&mut self.rng);
        }
        self.next_index += 1;
        Some(Bullet::new(index, velocity, self.fire_time))
    }
}

/// Bullets `0..count` from stream 0 of `config`.
pub fn generate_sequence(config: &ProcessConfig, count: usize) -> Vec<Bullet> {
    assert!(count >= 1);
    config.generator(0).take(count).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_unit() -> ProcessConfig {
        ProcessConfig::new(
            DistributionSpec::uniform(0.0, 1.0).unwrap(),
            DistributionSpec::point_mass(1.0).unwrap(),
            99,
        )
        .unwrap()
    }

    #[test]
    fn deterministic_pair_gives_known_sequence() {
        let config = ProcessConfig::new_unchecked_pair(
            DistributionSpec::point_mass(1.0).unwrap(),
            DistributionSpec::point_mass(1.0).unwrap(),
            0,
        )
        .unwrap();
        let bullets = generate_sequence(&config, 3);
        assert_eq!(
            bullets.iter().map(|b| b.velocity).collect::<Vec<_>>(),
            vec![1.0, 1.0, 1.0]
        );
        assert_eq!(
            bullets.iter().map(|b| b.fire_time).collect::<Vec<_>>(),
            vec![0.0, 1.0, 2.0]
        );
    }

    #[test]
    fn fixed_v0_overrides_only_bullet_zero() {
        let config = uniform_unit().with_fixed_v0(0.9).unwrap();
        let bullets = generate_sequence(&config, 5);
        assert_eq!(bullets[0].velocity, 0.9);
        // the rest of the stream is untouched by the override
        let plain = generate_sequence(&uniform_unit().with_fixed_v0(0.1).unwrap(), 5);
        for (a, b) in bullets.iter().zip(&plain).skip(1) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn same_seed_reproduces_and_next_seed_differs() {
        let a = generate_sequence(&uniform_unit(), 100);
        let b = generate_sequence(&uniform_unit(), 100);
        assert_eq!(a, b);
        let shifted = ProcessConfig::new(
            DistributionSpec::uniform(0.0, 1.0).unwrap(),
            DistributionSpec::point_mass(1.0).unwrap(),
            100,
        )
        .unwrap();
        assert_ne!(a, generate_sequence(&shifted, 100));
    }

    #[test]
    fn fire_times_strictly_increase() {
        let config = ProcessConfig::new(
            DistributionSpec::uniform(0.0, 1.0).unwrap(),
            DistributionSpec::exponential(2.0).unwrap(),
            4,
        )
        .unwrap();
        let bullets = generate_sequence(&config, 10_000);
        for w in bullets.windows(2) {
            assert!(w[1].fire_time > w[0].fire_time);
        }
    }

    #[test]
    fn longer_prefixes_extend_shorter_ones() {
        let short = generate_sequence(&uniform_unit(), 50);
        let long = generate_sequence(&uniform_unit(), 500);
        assert_eq!(&long[..50], &short[..]);
    }

    #[test]
    fn atomic_pair_requires_override() {
        let mu = DistributionSpec::point_mass(1.0).unwrap();
        let nu = DistributionSpec::point_mass(1.0).unwrap();
        assert!(matches!(
            ProcessConfig::new(mu.clone(), nu.clone(), 0),
            Err(ConfigError::AtomicPair)
        ));
        assert!(ProcessConfig::new_unchecked_pair(mu, nu, 0).is_ok());
    }
}
