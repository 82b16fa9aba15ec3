use crate::bullet::Bullet;

/// One annihilation event. `back_index > front_index` always: a later-fired
/// bullet catches an earlier one. The position satisfies
/// `pos = v_back (t - t_back) = v_front (t - t_front)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collision {
    pub back_index: usize,
    pub front_index: usize,
    pub time: f64,
    pub position: f64,
}

/// Complete outcome of resolving a finite truncation: who collided with
/// whom, when and where, who survives, plus the per-prefix bookkeeping
/// (`|S_k|`, potential-survivor flags, insertion partners).
#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    pub bullets: Vec<Bullet>,
    /// All collisions, ascending in time.
    pub collisions: Vec<Collision>,
    /// Indices of surviving bullets, increasing.
    pub survivors: Vec<usize>,
    /// Entry `k` is `|S_k|`, the survivor count of the prefix truncation.
    pub sn_sizes: Vec<usize>,
    /// Entry `k` is true iff bullet `k` survives its own truncation.
    pub ps_flags: Vec<bool>,
    /// For each annihilated-at-insertion bullet `j`, the bullet it collides
    /// with in its own truncation; `None` exactly when `ps_flags[j]`.
    pub insertion_partner: Vec<Option<usize>>,
}

impl Resolution {
    /// Collision matching as sorted `(back, front)` pairs, for comparisons.
    pub fn matching(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = self
            .collisions
            .iter()
            .map(|c| (c.back_index, c.front_index))
            .collect();
        pairs.sort_unstable();
        pairs
    }

    pub fn collision_of(&self, index: usize) -> Option<&Collision> {
        self.collisions
            .iter()
            .find(|c| c.back_index == index || c.front_index == index)
    }
}
