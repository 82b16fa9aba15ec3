//! Brute-force reference resolver.
//!
//! Validates the engine and deliberately shares none of its resolution
//! machinery: it simulates the defining dynamics directly. Active bullets
//! are kept in firing order; candidate events are the next firing plus the
//! catch of every adjacent active pair; the globally earliest event is
//! applied and everything is rescanned. Per-prefix quantities (`|S_k|`,
//! potential-survivor flags, insertion partners) come from rerunning each
//! prefix from scratch. Quadratic and proud of it; intended for n up to a
//! few thousand.

use crate::bullet::Bullet;
use crate::error::SimError;
use crate::kinematics::{bullet_catch, Tolerance};
use crate::resolution::{Collision, Resolution};

/// Resolve a truncation by direct simulation. Same contract as
/// `engine::resolve_truncation`.
pub fn brute_resolve(bullets: &[Bullet], tol: Tolerance) -> Result<Resolution, SimError> {
    let n = bullets.len();
    let mut sn_sizes = Vec::with_capacity(n);
    let mut ps_flags = Vec::with_capacity(n);
    let mut insertion_partner = Vec::with_capacity(n);
    let mut last_run = None;
    for k in 0..n {
        let run = event_resolve(&bullets[..=k], tol)?;
        sn_sizes.push(run.survivors.len());
        ps_flags.push(run.survivors.binary_search(&k).is_ok());
        insertion_partner.push(
            run.collisions
                .iter()
                .find(|c| c.back_index == k || c.front_index == k)
                .map(|c| if c.back_index == k { c.front_index } else { c.back_index }),
        );
        last_run = Some(run);
    }
    let last = last_run.expect("brute_resolve needs at least one bullet");
    Ok(Resolution {
        bullets: bullets.to_vec(),
        collisions: last.collisions,
        survivors: last.survivors,
        sn_sizes,
        ps_flags,
        insertion_partner,
    })
}

/// Survivors of one truncation by direct simulation, without the
/// per-prefix reruns of [`brute_resolve`]. One quadratic pass.
pub fn brute_survivors(bullets: &[Bullet], tol: Tolerance) -> Result<Vec<usize>, SimError> {
    Ok(event_resolve(bullets, tol)?.survivors)
}

struct EventRun {
    collisions: Vec<Collision>,
    survivors: Vec<usize>,
}

#[derive(Clone, Copy)]
struct CatchEvent {
    time: f64,
    position: f64,
    front: usize,
    back: usize,
}

fn event_resolve(bullets: &[Bullet], tol: Tolerance) -> Result<EventRun, SimError> {
    let mut active: Vec<usize> = Vec::new();
    let mut next_fire = 0usize;
    let mut collisions: Vec<Collision> = Vec::new();
    let mut catches: Vec<CatchEvent> = Vec::new();

    loop {
        catches.clear();
        for w in active.windows(2) {
            let (fi, bi) = (w[0], w[1]);
            if let Some((time, position)) = bullet_catch(&bullets[fi], &bullets[bi]) {
                catches.push(CatchEvent {
                    time,
                    position,
                    front: fi,
                    back: bi,
                });
            }
        }
        let fire_time = (next_fire < bullets.len()).then(|| bullets[next_fire].fire_time);
        let earliest_catch = catches
            .iter()
            .copied()
            .min_by(|a, b| a.time.total_cmp(&b.time).then(a.back.cmp(&b.back)));

        match (earliest_catch, fire_time) {
            (None, None) => break,
            (Some(c), f) if f.map_or(true, |tf| c.time <= tf) => {
                // Interacting simultaneous catches are a triple collision;
                // disjoint ones may be applied in either order.
                for other in &catches {
                    if other.back == c.back && other.front == c.front {
                        continue;
                    }
                    let shares = other.back == c.back
                        || other.back == c.front
                        || other.front == c.back
                        || other.front == c.front;
                    if shares && tol.coincides(other.time, c.time) {
                        return Err(SimError::TripleCollision {
                            earlier: c.time.min(other.time),
                            later: c.time.max(other.time),
                            bullets: [c.front, c.back, if other.back == c.back || other.back == c.front {
                                other.front
                            } else {
                                other.back
                            }],
                        });
                    }
                }
                collisions.push(Collision {
                    back_index: c.back,
                    front_index: c.front,
                    time: c.time,
                    position: c.position,
                });
                active.retain(|&i| i != c.back && i != c.front);
            }
            (_, Some(_)) => {
                active.push(next_fire);
                next_fire += 1;
            }
            _ => unreachable!("a catch with no firing left always passes the guard"),
        }
    }

    Ok(EventRun {
        collisions,
        survivors: active,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bullet::sequence;

    fn brute(velocities: &[f64], fire_times: &[f64]) -> Result<Resolution, SimError> {
        brute_resolve(&sequence(velocities, fire_times), Tolerance::default())
    }

    #[test]
    fn four_bullet_cascade_matches_hand_solution() {
        let r = brute(&[0.6, 0.2, 1.0, 10.0], &[0.0, 1.0, 2.0, 2.1]).unwrap();
        assert_eq!(r.survivors, vec![0, 1]);
        assert_eq!(r.sn_sizes, vec![1, 2, 1, 2]);
        assert_eq!(r.ps_flags, vec![true, true, false, false]);
        assert_eq!(r.insertion_partner, vec![None, None, Some(1), Some(2)]);
        assert_eq!(r.matching(), vec![(3, 2)]);
        assert!((r.collisions[0].time - 19.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn equal_speeds_never_collide() {
        let r = brute(&[2.0; 5], &[0.0, 0.5, 1.0, 1.5, 2.0]).unwrap();
        assert!(r.collisions.is_empty());
        assert_eq!(r.survivors, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn triple_collision_detected() {
        let err = brute(&[1.0, 1.5, 3.0], &[0.0, 1.0, 2.0]).unwrap_err();
        assert!(matches!(err, SimError::TripleCollision { .. }));
    }

    #[test]
    fn zero_speed_front_annihilated_at_next_firing() {
        let r = brute(&[0.0, 0.7], &[0.0, 1.0]).unwrap();
        assert_eq!(r.matching(), vec![(1, 0)]);
        assert_eq!(r.collisions[0].time, 1.0);
        assert_eq!(r.collisions[0].position, 0.0);
    }
}
