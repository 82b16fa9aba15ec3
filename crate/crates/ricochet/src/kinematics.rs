//! Trajectory intersection and the event-coincidence tolerance.
//!
//! Both resolvers (the incremental engine and the brute-force reference)
//! compute catch times through this one function, so agreeing matchings
//! yield bitwise-identical collision times.

use crate::bullet::Bullet;

/// Earliest time at which `back` reaches `front`, with the collision
/// position, assuming both keep flying from their fire times.
///
/// Arguments are `(velocity, fire_time)` pairs; `back` must have been fired
/// strictly after `front`. Returns `None` when the back bullet never gains
/// on the front one (`v_back <= v_front`), with one exception: a speed-0
/// front bullet never leaves the origin, so any later bullet meets it at
/// the instant it is fired, at position 0.
pub fn catch_time(front: (f64, f64), back: (f64, f64)) -> Option<(f64, f64)> {
    let (vf, tf) = front;
    let (vb, tb) = back;
    debug_assert!(tb > tf);
    if vf == 0.0 {
        return Some((tb, 0.0));
    }
    if vb <= vf {
        return None;
    }
    let t = (vb * tb - vf * tf) / (vb - vf);
    Some((t, vb * (t - tb)))
}

/// Catch time between two bullets (back chases front).
pub fn bullet_catch(front: &Bullet, back: &Bullet) -> Option<(f64, f64)> {
    catch_time(
        (front.velocity, front.fire_time),
        (back.velocity, back.fire_time),
    )
}

/// Coincidence tolerance for interacting events.
///
/// Two event times within `max(abs, rel * max(|t1|, |t2|))` of each other
/// are treated as simultaneous; when the events share a bullet that is a
/// triple collision and resolution aborts.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-12,
            rel: 1e-12,
        }
    }
}

impl Tolerance {
    /// Zero-width window: only bitwise-equal event times count as ties.
    ///
    /// The default window scales with absolute time, so on very long runs
    /// it eventually swallows genuinely distinct events (the first
    /// false flag shows up around five million unit delays). Streaming
    /// estimators therefore run with the exact window; true ties from
    /// atomic-on-atomic inputs are exactly equal floats and still raise.
    pub fn exact() -> Self {
        Self { abs: 0.0, rel: 0.0 }
    }

    pub fn coincides(&self, t1: f64, t2: f64) -> bool {
        let scale = t1.abs().max(t2.abs());
        (t1 - t2).abs() <= self.abs.max(self.rel * scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        // front (1.0, 0), back (2.0, 1): 2(t-1) = t  =>  t = 2, x = 2
        let (t, x) = catch_time((1.0, 0.0), (2.0, 1.0)).unwrap();
        assert_eq!(t, 2.0);
        assert_eq!(x, 2.0);
    }

    #[test]
    fn equal_velocities_never_meet() {
        assert!(catch_time((1.5, 0.0), (1.5, 1.0)).is_none());
        assert!(catch_time((2.0, 0.0), (1.0, 1.0)).is_none());
    }

    #[test]
    fn zero_speed_front_is_met_at_firing() {
        assert_eq!(catch_time((0.0, 0.0), (5.0, 1.5)), Some((1.5, 0.0)));
        // even a speed-0 chaser lands on top of it
        assert_eq!(catch_time((0.0, 0.0), (0.0, 2.0)), Some((2.0, 0.0)));
    }

    #[test]
    fn catch_is_strictly_after_back_fire_for_moving_front() {
        let (t, _) = catch_time((0.3, 0.0), (0.9, 4.0)).unwrap();
        assert!(t > 4.0);
    }

    #[test]
    fn position_agrees_along_both_trajectories() {
        let (vf, tf, vb, tb) = (0.2, 1.0, 1.0, 2.0);
        let (t, x) = catch_time((vf, tf), (vb, tb)).unwrap();
        assert!((x - vf * (t - tf)).abs() < 1e-12);
        assert!((x - vb * (t - tb)).abs() < 1e-12);
    }

    #[test]
    fn tolerance_windows() {
        let tol = Tolerance::default();
        assert!(tol.coincides(3.0, 3.0));
        assert!(tol.coincides(3.0, 3.0 + 1e-13));
        assert!(!tol.coincides(3.0, 3.0 + 1e-9));
        // relative part dominates at large t
        assert!(tol.coincides(1e6, 1e6 + 1e-7));
    }
}
