//! Monte Carlo pipelines: survival probability of the first bullet
//! (theta-hat), the critical-velocity reading of a theta grid (vc-hat), the
//! windowed potential-survivor estimate of the critical velocity
//! (vhat-hat), the finite-support survivor census, and the survivor-count
//! trajectory.
//!
//! Every estimator is a pure function of its arguments plus the master
//! seed: replica `r` draws from stream `r`, and aggregation is plain
//! counting, so worker scheduling cannot change any output.

use rayon::prelude::*;
use thiserror::Error;

use crate::config::ProcessConfig;
use crate::distribution::DistributionSpec;
use crate::engine::{CollisionSink, Engine, SurvivorChange};
use crate::error::{ConfigError, SimError};
use crate::kinematics::Tolerance;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("replica on stream {stream_id} failed: {source}")]
    Replica { stream_id: u64, source: SimError },
    #[error("{0}")]
    BadArgument(String),
}

/// Empirical estimate of theta_n(v): the probability that bullet 0, forced
/// to speed `v`, survives when `n` further bullets are fired.
#[derive(Debug, Clone)]
pub struct ThetaEstimate {
    pub v: f64,
    /// Bullets fired after bullet 0 (the replica resolves n+1 bullets).
    pub n: usize,
    /// Independent replicas.
    pub replicas: usize,
    pub successes: usize,
    pub point: f64,
    /// 95% Wilson score interval.
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// 95% Wilson score interval; sane at 0 and `n` successes.
fn wilson_95(successes: usize, trials: usize) -> (f64, f64) {
    const Z: f64 = 1.959963984540054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (Z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // the bound is exact at the boundary; don't leak cancellation residue
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Does bullet 0 survive the truncation with `n` bullets fired after it?
///
/// Streams bullets through the engine without keeping a collision log.
/// Exits early once bullet 0's death is confirmed (its collision time at or
/// before the latest fire time): a confirmed event belongs to the full
/// process and can never be undone, so the indicator is already settled.
fn replica_survives(
    config: &ProcessConfig,
    stream_id: u64,
    n: usize,
) -> Result<bool, SimError> {
    let mut gen = config.generator(stream_id);
    let mut engine = Engine::with_sink(CollisionSink::Count, Tolerance::exact());
    let mut b0_death: Option<f64> = None;
    for _ in 0..=n {
        let bullet = gen.next().expect("generator is infinite");
        let out = engine.ingest(bullet)?;
        match out.change {
            SurvivorChange::Removed(0) => {
                let pair = engine.last_cascade().last().expect("removal ends a cascade");
                debug_assert_eq!(pair.front_index, 0);
                b0_death = Some(pair.time);
            }
            SurvivorChange::Added(0) => b0_death = None,
            _ => {}
        }
        if let Some(t) = b0_death {
            if t <= engine.last_fire_time() {
                return Ok(false);
            }
        }
    }
    Ok(engine.first_survivor_index() == Some(0))
}

/// Estimate theta_n(v) from `replicas` independent replicas.
pub fn theta_hat(
    v: f64,
    mu: &DistributionSpec,
    nu: &DistributionSpec,
    n: usize,
    replicas: usize,
    master_seed: u64,
) -> Result<ThetaEstimate, EstimatorError> {
    if replicas == 0 {
        return Err(EstimatorError::BadArgument("need at least one replica".into()));
    }
    let config = ProcessConfig::new_unchecked_pair(mu.clone(), nu.clone(), master_seed)?
        .with_fixed_v0(v)?;
    let outcomes: Vec<Result<bool, SimError>> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| replica_survives(&config, r, n))
        .collect();
    let mut successes = 0;
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(true) => successes += 1,
            Ok(false) => {}
            Err(source) => {
                return Err(EstimatorError::Replica {
                    stream_id: r as u64,
                    source,
                })
            }
        }
    }
    let (ci_lo, ci_hi) = wilson_95(successes, replicas);
    Ok(ThetaEstimate {
        v,
        n,
        replicas,
        successes,
        point: successes as f64 / replicas as f64,
        ci_lo,
        ci_hi,
    })
}

/// Smallest grid velocity whose theta estimate sees at least one surviving
/// replica; +inf if none does.
///
/// Under one master seed every grid point reuses the same replica streams
/// (bullet 0's forced speed consumes no draw), and survival is pathwise
/// non-decreasing in v, so per-replica success indicators are coupled
/// monotone and the grid can be bisected instead of scanned.
pub fn vc_hat(
    grid: &[f64],
    mu: &DistributionSpec,
    nu: &DistributionSpec,
    n: usize,
    replicas: usize,
    master_seed: u64,
) -> Result<f64, EstimatorError> {
    debug_assert!(grid.windows(2).all(|w| w[0] < w[1]), "grid must ascend");
    let mut lo = 0usize;
    let mut hi = grid.len();
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let est = theta_hat(grid[mid], mu, nu, n, replicas, master_seed)?;
        if est.successes >= 1 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(if lo == grid.len() {
        f64::INFINITY
    } else {
        grid[lo]
    })
}

/// Default velocity grid 0.00..=1.00, step 0.01.
pub fn default_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramBucket {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// count / (bucket_width * (n/2)): the empirical rate at which a
    /// velocity in this bucket produces a potential survivor.
    pub height: f64,
}

/// Windowed potential-survivor estimate: one realization of bullets
/// 0..=n; the velocities of potential survivors fired in the window
/// (n/2, n] approximate the critical velocity from below the limsup.
#[derive(Debug, Clone)]
pub struct VhatEstimate {
    pub n: usize,
    /// Fastest potential survivor in the window; None when the window has
    /// no potential survivors at all.
    pub max_ps_velocity: Option<f64>,
    pub window_ps_count: usize,
    /// Non-empty buckets, ascending; half-open `[lo, hi)`.
    pub histogram: Vec<HistogramBucket>,
}

pub fn vhat_hat(
    mu: &DistributionSpec,
    nu: &DistributionSpec,
    n: usize,
    bucket_width: f64,
    master_seed: u64,
) -> Result<VhatEstimate, EstimatorError> {
    if n < 2 || n % 2 != 0 {
        return Err(EstimatorError::BadArgument(format!(
            "n must be even and >= 2, got {n}"
        )));
    }
    if !(bucket_width.is_finite() && bucket_width > 0.0) {
        return Err(EstimatorError::BadArgument(format!(
            "bucket width must be positive, got {bucket_width}"
        )));
    }
    let config = ProcessConfig::new_unchecked_pair(mu.clone(), nu.clone(), master_seed)?;
    let mut gen = config.generator(0);
    let mut engine = Engine::with_sink(CollisionSink::Count, Tolerance::exact());
    let mut counts: std::collections::BTreeMap<u64, usize> = Default::default();
    let mut max_ps: Option<f64> = None;
    let mut window_ps_count = 0usize;
    for k in 0..=n {
        let bullet = gen.next().expect("generator is infinite");
        let velocity = bullet.velocity;
        let out = engine.ingest(bullet).map_err(|source| {
            EstimatorError::Replica { stream_id: 0, source }
        })?;
        if out.is_potential_survivor && k > n / 2 {
            window_ps_count += 1;
            max_ps = Some(max_ps.map_or(velocity, |m: f64| m.max(velocity)));
            *counts.entry((velocity / bucket_width).floor() as u64).or_default() += 1;
        }
    }
    let norm = bucket_width * (n as f64 / 2.0);
    let histogram = counts
        .into_iter()
        .map(|(bucket, count)| HistogramBucket {
            lo: bucket as f64 * bucket_width,
            hi: (bucket + 1) as f64 * bucket_width,
            count,
            height: count as f64 / norm,
        })
        .collect();
    Ok(VhatEstimate {
        n,
        max_ps_velocity: max_ps,
        window_ps_count,
        histogram,
    })
}

/// Survivor and potential-survivor tallies for one support velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct CensusBin {
    pub velocity: f64,
    pub survivors: usize,
    pub potential_survivors: usize,
}

/// Survivor census of one realization under a finite-support velocity
/// distribution. Noisy velocities are folded back to the nearest support
/// value (ties toward the lower one).
#[derive(Debug, Clone)]
pub struct CensusResult {
    /// One bin per support value, ascending.
    pub bins: Vec<CensusBin>,
    pub total_survivors: usize,
    pub total_potential_survivors: usize,
    /// Support value holding the most survivors (lowest wins ties); None
    /// when nothing survived.
    pub modal_velocity: Option<f64>,
    /// Index of the first survivor at the modal velocity.
    pub first_modal_survivor_index: Option<usize>,
}

fn nearest_bin(values: &[f64], v: f64) -> usize {
    let i = values.partition_point(|&g| g < v);
    if i == 0 {
        return 0;
    }
    if i == values.len() {
        return values.len() - 1;
    }
    // tie broken toward the lower value
    if (v - values[i - 1]) <= (values[i] - v) {
        i - 1
    } else {
        i
    }
}

pub fn census(
    mu: &DistributionSpec,
    nu: &DistributionSpec,
    n: usize,
    master_seed: u64,
) -> Result<CensusResult, EstimatorError> {
    let DistributionSpec::FiniteSupport { values, .. } = mu else {
        return Err(EstimatorError::BadArgument(
            "census requires a finite-support velocity distribution".into(),
        ));
    };
    let values = values.clone();
    let config = ProcessConfig::new_unchecked_pair(mu.clone(), nu.clone(), master_seed)?;
    let mut gen = config.generator(0);
    let mut engine = Engine::with_sink(CollisionSink::Count, Tolerance::exact());
    let mut ps_counts = vec![0usize; values.len()];
    let mut total_ps = 0usize;
    for _ in 0..=n {
        let bullet = gen.next().expect("generator is infinite");
        let velocity = bullet.velocity;
        let out = engine.ingest(bullet).map_err(|source| {
            EstimatorError::Replica { stream_id: 0, source }
        })?;
        if out.is_potential_survivor {
            ps_counts[nearest_bin(&values, velocity)] += 1;
            total_ps += 1;
        }
    }
    let mut survivor_counts = vec![0usize; values.len()];
    let mut first_index: Vec<Option<usize>> = vec![None; values.len()];
    for b in engine.survivor_bullets() {
        let bin = nearest_bin(&values, b.velocity);
        survivor_counts[bin] += 1;
        first_index[bin].get_or_insert(b.index);
    }
    let total_survivors = engine.survivor_count();
    let modal = (0..values.len())
        .filter(|&i| survivor_counts[i] > 0)
        .max_by(|&a, &b| {
            survivor_counts[a]
                .cmp(&survivor_counts[b])
                // lowest velocity wins ties
                .then(b.cmp(&a))
        });
    Ok(CensusResult {
        bins: (0..values.len())
            .map(|i| CensusBin {
                velocity: values[i],
                survivors: survivor_counts[i],
                potential_survivors: ps_counts[i],
            })
            .collect(),
        total_survivors,
        total_potential_survivors: total_ps,
        modal_velocity: modal.map(|i| values[i]),
        first_modal_survivor_index: modal.and_then(|i| first_index[i]),
    })
}

/// The survivor-count trajectory |S_0|..=|S_n| of one realization.
pub fn sn_trajectory(
    mu: &DistributionSpec,
    nu: &DistributionSpec,
    n: usize,
    master_seed: u64,
) -> Result<Vec<usize>, EstimatorError> {
    let config = ProcessConfig::new_unchecked_pair(mu.clone(), nu.clone(), master_seed)?;
    let mut gen = config.generator(0);
    let mut engine = Engine::with_sink(CollisionSink::Count, Tolerance::exact());
    let mut sizes = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        let bullet = gen.next().expect("generator is infinite");
        let out = engine.ingest(bullet).map_err(|source| {
            EstimatorError::Replica { stream_id: 0, source }
        })?;
        sizes.push(out.survivor_count);
    }
    Ok(sizes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform() -> DistributionSpec {
        DistributionSpec::uniform(0.0, 1.0).unwrap()
    }

    fn unit_delay() -> DistributionSpec {
        DistributionSpec::point_mass(1.0).unwrap()
    }

    #[test]
    fn wilson_interval_behaves_at_the_edges() {
        let (lo, hi) = wilson_95(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.06);
        let (lo, hi) = wilson_95(100, 100);
        assert!(lo > 0.94 && lo < 1.0);
        assert_eq!(hi, 1.0);
        let (lo, hi) = wilson_95(50, 100);
        assert!(lo < 0.5 && 0.5 < hi);
    }

    #[test]
    fn theta_with_no_chasers_is_one() {
        // n = 0: bullet 0 alone always survives
        let est = theta_hat(0.3, &uniform(), &unit_delay(), 0, 50, 1).unwrap();
        assert_eq!(est.successes, 50);
        assert_eq!(est.point, 1.0);
    }

    #[test]
    fn theta_at_the_supremum_is_one() {
        // no chaser can exceed speed 1
        let est = theta_hat(1.0, &uniform(), &unit_delay(), 500, 40, 2).unwrap();
        assert_eq!(est.point, 1.0);
    }

    #[test]
    fn theta_is_deterministic_and_seed_sensitive() {
        let a = theta_hat(0.6, &uniform(), &unit_delay(), 200, 60, 7).unwrap();
        let b = theta_hat(0.6, &uniform(), &unit_delay(), 200, 60, 7).unwrap();
        assert_eq!(a.successes, b.successes);
        let c = theta_hat(0.6, &uniform(), &unit_delay(), 200, 60, 8).unwrap();
        // different master seed reshuffles replicas; successes may move
        assert_eq!(c.replicas, 60);
    }

    #[test]
    fn vc_hat_on_a_point_mass_grid_returns_the_atom() {
        // mu = point(c): equal speeds never collide, so c succeeds
        let mu = DistributionSpec::point_mass(0.5).unwrap();
        let nu = DistributionSpec::exponential(1.0).unwrap();
        let v = vc_hat(&[0.5], &mu, &nu, 50, 20, 3).unwrap();
        assert_eq!(v, 0.5);
    }

    #[test]
    fn vc_hat_matches_linear_scan() {
        let grid = default_grid();
        let fast = vc_hat(&grid, &uniform(), &unit_delay(), 300, 40, 11).unwrap();
        let slow = grid
            .iter()
            .copied()
            .find(|&v| {
                theta_hat(v, &uniform(), &unit_delay(), 300, 40, 11)
                    .unwrap()
                    .successes
                    >= 1
            })
            .unwrap_or(f64::INFINITY);
        assert_eq!(fast, slow);
    }

    #[test]
    fn vhat_point_mass_counts_the_whole_window() {
        let mu = DistributionSpec::point_mass(0.4).unwrap();
        let nu = DistributionSpec::exponential(1.0).unwrap();
        let est = vhat_hat(&mu, &nu, 1000, 0.001, 5).unwrap();
        assert_eq!(est.window_ps_count, 500);
        assert_eq!(est.max_ps_velocity, Some(0.4));
        assert_eq!(est.histogram.len(), 1);
        let bucket = &est.histogram[0];
        assert_eq!(bucket.count, 500);
        assert!((bucket.height - 1.0 / 0.001).abs() < 1e-9);
        assert!(bucket.lo <= 0.4 && 0.4 < bucket.hi);
    }

    #[test]
    fn vhat_histogram_counts_add_up() {
        let est = vhat_hat(&uniform(), &unit_delay(), 2000, 0.05, 9).unwrap();
        let total: usize = est.histogram.iter().map(|b| b.count).sum();
        assert_eq!(total, est.window_ps_count);
        assert!(est.histogram.windows(2).all(|w| w[0].lo < w[1].lo));
    }

    #[test]
    fn vhat_rejects_odd_n() {
        assert!(matches!(
            vhat_hat(&uniform(), &unit_delay(), 999, 0.001, 0),
            Err(EstimatorError::BadArgument(_))
        ));
    }

    #[test]
    fn census_of_single_atom_keeps_everyone() {
        let mu = DistributionSpec::finite_support(vec![0.8], 0.0).unwrap();
        let nu = DistributionSpec::exponential(1.0).unwrap();
        let c = census(&mu, &nu, 100, 4).unwrap();
        assert_eq!(c.total_survivors, 101);
        assert_eq!(c.bins.len(), 1);
        assert_eq!(c.bins[0].survivors, 101);
        assert_eq!(c.modal_velocity, Some(0.8));
        assert_eq!(c.first_modal_survivor_index, Some(0));
    }

    #[test]
    fn census_counts_are_conserved() {
        let values: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
        let mu = DistributionSpec::finite_support(values, 0.0002).unwrap();
        let c = census(&mu, &unit_delay(), 5000, 12).unwrap();
        assert_eq!(
            c.bins.iter().map(|b| b.survivors).sum::<usize>(),
            c.total_survivors
        );
        assert_eq!(
            c.bins.iter().map(|b| b.potential_survivors).sum::<usize>(),
            c.total_potential_survivors
        );
        // n+1 bullets, so parity of |S_n| follows n+1
        assert_eq!(c.total_survivors % 2, (5000 + 1) % 2);
    }

    #[test]
    fn census_requires_finite_support() {
        assert!(matches!(
            census(&uniform(), &unit_delay(), 10, 0),
            Err(EstimatorError::BadArgument(_))
        ));
    }

    #[test]
    fn nearest_bin_folds_noise_back() {
        let grid = [0.1, 0.2, 0.3];
        assert_eq!(nearest_bin(&grid, 0.1004), 0);
        assert_eq!(nearest_bin(&grid, 0.19), 1);
        assert_eq!(nearest_bin(&grid, 0.15), 0); // tie toward lower
        assert_eq!(nearest_bin(&grid, 0.0), 0);
        assert_eq!(nearest_bin(&grid, 9.0), 2);
    }

    #[test]
    fn sn_trajectory_of_point_mass_counts_up() {
        let mu = DistributionSpec::point_mass(1.0).unwrap();
        let nu = DistributionSpec::exponential(1.0).unwrap();
        let sizes = sn_trajectory(&mu, &nu, 10, 6).unwrap();
        assert_eq!(sizes, (1..=11).collect::<Vec<_>>());
    }

    #[test]
    fn sn_trajectory_steps_by_one() {
        let sizes = sn_trajectory(&uniform(), &unit_delay(), 3000, 13).unwrap();
        assert_eq!(sizes.len(), 3001);
        for w in sizes.windows(2) {
            assert_eq!(w[0].abs_diff(w[1]), 1);
        }
    }
}
