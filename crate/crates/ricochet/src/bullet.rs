/// A single bullet: fired from the origin at `fire_time`, moving right at
/// `velocity` forever (or until annihilated).
///
/// Within a sequence, fire times are strictly increasing in index, so the
/// delay before bullet `i` is recoverable as `fire_time[i] - fire_time[i-1]`.
/// Velocity 0 is legal; such a bullet sits at the origin until the next
/// bullet is fired on top of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bullet {
    pub index: usize,
    pub velocity: f64,
    pub fire_time: f64,
}

impl Bullet {
    pub fn new(index: usize, velocity: f64, fire_time: f64) -> Self {
        debug_assert!(velocity.is_finite() && velocity >= 0.0);
        debug_assert!(fire_time.is_finite() && fire_time >= 0.0);
        Self {
            index,
            velocity,
            fire_time,
        }
    }

    /// Position of the virtual trajectory at time `t` (ignores annihilation).
    pub fn position_at(&self, t: f64) -> f64 {
        self.velocity * (t - self.fire_time)
    }
}

/// Build a bullet sequence from explicit velocities and fire times.
/// Test and fixture helper.
pub fn sequence(velocities: &[f64], fire_times: &[f64]) -> Vec<Bullet> {
    assert_eq!(velocities.len(), fire_times.len());
    velocities
        .iter()
        .zip(fire_times)
        .enumerate()
        .map(|(i, (&v, &t))| Bullet::new(i, v, t))
        .collect()
}
