//! The incremental resolver.
//!
//! After ingesting bullets `0..=n` the engine holds the drained schedule of
//! the truncated process: every still-relevant bullet is either an unpaired
//! survivor or one half of a scheduled collision. The schedule lives in one
//! index-ordered map (`spine`), keyed by the survivor's own index or the
//! scheduled pair's back (chaser) index. Pair spans never cross, and
//! survivors never sit inside a span.
//!
//! Ingesting a bullet walks the spine from the back. Against a scheduled
//! pair, the newcomer either catches the pair's chaser before the pair's
//! own collision (annihilating chaser and newcomer, and freeing the
//! chaser's target, which recursively re-resolves toward the front) or
//! steps past the doomed pair; either way the walk resumes just in front
//! of the pair's target, skipping everything nested inside the span.
//! Against an unpaired survivor the walk ends: the newcomer either
//! annihilates it or joins behind it as the new rearmost survivor. Each
//! ingest therefore changes `|S_n|` by exactly one, and work is
//! near-constant amortized on i.i.d. input.
//!
//! A scheduled collision becomes irrevocable once its time is at or before
//! the latest fire time: bullets enter at the origin, behind everything,
//! so nothing fired later can disturb events that precede its own firing.
//! Confirmed pairs leave the spine through a death-time min-heap (entries
//! are validated against the spine on pop, since pre-emption can orphan
//! them) and go to the collision sink, keeping resident state proportional
//! to the survivor count plus the scheduled-but-unconfirmed pairs.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::io::Write;

use crate::bullet::Bullet;
use crate::error::SimError;
use crate::kinematics::{bullet_catch, Tolerance};
use crate::resolution::{Collision, Resolution};

#[derive(Debug, Clone, Copy)]
struct PairEntry {
    back: Bullet,
    front: Bullet,
    time: f64,
    position: f64,
}

impl PairEntry {
    fn collision(&self) -> Collision {
        Collision {
            back_index: self.back.index,
            front_index: self.front.index,
            time: self.time,
            position: self.position,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Entry {
    Survivor(Bullet),
    Pair(PairEntry),
}

/// Death-heap record; compared by time, then back index.
#[derive(Debug, Clone, Copy)]
struct Death {
    time: f64,
    back: usize,
    front: usize,
}

impl PartialEq for Death {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.back == other.back
    }
}
impl Eq for Death {}
impl PartialOrd for Death {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Death {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.back.cmp(&other.back))
    }
}

/// Where confirmed collisions go.
pub enum CollisionSink {
    /// Keep them in memory (default; feeds `confirmed_collisions`).
    Memory(Vec<Collision>),
    /// Count only. Use for long runs where a log would dominate memory.
    Count,
    /// Append CSV rows `back_index,front_index,time,position` (no header).
    Csv(Box<dyn Write + Send>),
}

impl CollisionSink {
    fn emit(&mut self, c: &Collision) -> Result<(), SimError> {
        match self {
            CollisionSink::Memory(log) => log.push(*c),
            CollisionSink::Count => {}
            CollisionSink::Csv(w) => writeln!(
                w,
                "{},{},{},{}",
                c.back_index, c.front_index, c.time, c.position
            )?,
        }
        Ok(())
    }
}

/// How the survivor set changed during one ingest: exactly one bullet
/// entered or left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurvivorChange {
    /// This index joined the survivor set (the new bullet itself, or a
    /// bullet freed when its scheduled killer was annihilated early).
    Added(usize),
    /// The previous rearmost survivor was annihilated.
    Removed(usize),
}

/// Per-ingest summary.
#[derive(Debug, Clone, Copy)]
pub struct InsertionOutcome {
    /// `|S_n|` after this ingest.
    pub survivor_count: usize,
    /// Whether the ingested bullet survives its own truncation.
    pub is_potential_survivor: bool,
    pub change: SurvivorChange,
    /// The bullet the newcomer annihilates with, when it does not survive
    /// insertion. Set exactly when `is_potential_survivor` is false.
    pub insertion_partner: Option<usize>,
    /// Number of collisions newly scheduled during this ingest's cascade.
    pub cascade_len: usize,
}

pub struct Engine {
    tol: Tolerance,
    spine: BTreeMap<usize, Entry>,
    deaths: BinaryHeap<Reverse<Death>>,
    sink: CollisionSink,
    cascade: Vec<Collision>,
    survivor_count: usize,
    ps_bits: Vec<u64>,
    ingested: usize,
    last_fire_time: f64,
    confirmed: u64,
    poisoned: bool,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new()
    }
}

impl Engine {
    pub fn new() -> Self {
        Self::with_sink(CollisionSink::Memory(Vec::new()), Tolerance::default())
    }

    pub fn with_tolerance(tol: Tolerance) -> Self {
        Self::with_sink(CollisionSink::Memory(Vec::new()), tol)
    }

    pub fn with_sink(sink: CollisionSink, tol: Tolerance) -> Self {
        Self {
            tol,
            spine: BTreeMap::new(),
            deaths: BinaryHeap::new(),
            sink,
            cascade: Vec::new(),
            survivor_count: 0,
            ps_bits: Vec::new(),
            ingested: 0,
            last_fire_time: 0.0,
            confirmed: 0,
            poisoned: false,
        }
    }

    /// Feed the next bullet and update the resolution of the truncation.
    pub fn ingest(&mut self, bullet: Bullet) -> Result<InsertionOutcome, SimError> {
        if self.poisoned {
            return Err(SimError::Poisoned);
        }
        if bullet.index != self.ingested {
            return Err(SimError::IndexMismatch {
                expected: self.ingested,
                found: bullet.index,
            });
        }
        if self.ingested > 0 && bullet.fire_time <= self.last_fire_time {
            return Err(SimError::NonMonotoneFireTime {
                fire_time: bullet.fire_time,
                previous: self.last_fire_time,
            });
        }

        self.confirm_up_to(bullet.fire_time)?;

        self.cascade.clear();
        let mut pending = bullet;
        let mut bound = usize::MAX;
        let mut insertion_partner = None;

        let change = loop {
            let Some((&key, &entry)) = self.spine.range(..bound).next_back() else {
                // nothing in front: pending is the new frontmost survivor
                let added = pending.index;
                self.spine.insert(added, Entry::Survivor(pending));
                self.survivor_count += 1;
                break SurvivorChange::Added(added);
            };
            match entry {
                Entry::Pair(pair) => {
                    match bullet_catch(&pair.back, &pending) {
                        Some((t, x)) => {
                            if self.tol.coincides(t, pair.time) {
                                self.poisoned = true;
                                return Err(SimError::TripleCollision {
                                    earlier: t.min(pair.time),
                                    later: t.max(pair.time),
                                    bullets: [
                                        pair.front.index,
                                        pair.back.index,
                                        pending.index,
                                    ],
                                });
                            }
                            if t < pair.time {
                                // Pre-emption: pending kills the pair's
                                // chaser; the chaser's target is freed and
                                // re-resolves toward the front.
                                if pending.index == bullet.index {
                                    insertion_partner = Some(pair.back.index);
                                }
                                self.spine.remove(&key);
                                self.schedule(PairEntry {
                                    back: pending,
                                    front: pair.back,
                                    time: t,
                                    position: x,
                                });
                                pending = pair.front;
                                bound = pending.index;
                                continue;
                            }
                        }
                        None => {}
                    }
                    // Can't reach the chaser before the pair collides; by
                    // then the whole span is gone. Resume just in front of
                    // its target, skipping everything nested inside.
                    bound = pair.front.index;
                }
                Entry::Survivor(s) => {
                    debug_assert!(s.index < pending.index);
                    match bullet_catch(&s, &pending) {
                        Some((t, x)) => {
                            self.spine.remove(&key);
                            self.survivor_count -= 1;
                            if pending.index == bullet.index {
                                insertion_partner = Some(s.index);
                            }
                            self.schedule(PairEntry {
                                back: pending,
                                front: s,
                                time: t,
                                position: x,
                            });
                            break SurvivorChange::Removed(s.index);
                        }
                        None => {
                            let added = pending.index;
                            self.spine.insert(added, Entry::Survivor(pending));
                            self.survivor_count += 1;
                            break SurvivorChange::Added(added);
                        }
                    }
                }
            }
        };

        let is_ps = change == SurvivorChange::Added(bullet.index);
        self.push_ps_bit(is_ps);
        self.ingested += 1;
        self.last_fire_time = bullet.fire_time;

        Ok(InsertionOutcome {
            survivor_count: self.survivor_count,
            is_potential_survivor: is_ps,
            change,
            insertion_partner,
            cascade_len: self.cascade.len(),
        })
    }

    fn schedule(&mut self, pair: PairEntry) {
        self.cascade.push(pair.collision());
        self.deaths.push(Reverse(Death {
            time: pair.time,
            back: pair.back.index,
            front: pair.front.index,
        }));
        let displaced = self.spine.insert(pair.back.index, Entry::Pair(pair));
        debug_assert!(displaced.is_none());
    }

    /// Confirm every scheduled collision at or before `t`, in time order.
    /// Heap entries whose pair was pre-empted no longer match the spine and
    /// are dropped.
    fn confirm_up_to(&mut self, t: f64) -> Result<(), SimError> {
        while let Some(&Reverse(death)) = self.deaths.peek() {
            if death.time > t {
                break;
            }
            self.deaths.pop();
            let current = match self.spine.get(&death.back) {
                Some(Entry::Pair(p)) => {
                    p.front.index == death.front && p.time == death.time
                }
                _ => false,
            };
            if current {
                let Some(Entry::Pair(pair)) = self.spine.remove(&death.back) else {
                    unreachable!();
                };
                self.sink.emit(&pair.collision())?;
                self.confirmed += 1;
            }
        }
        Ok(())
    }

    fn push_ps_bit(&mut self, bit: bool) {
        let word = self.ingested / 64;
        if word == self.ps_bits.len() {
            self.ps_bits.push(0);
        }
        if bit {
            self.ps_bits[word] |= 1 << (self.ingested % 64);
        }
    }

    /// Current survivor set `S_n`, increasing index order.
    pub fn survivors_snapshot(&self) -> Vec<usize> {
        self.spine
            .values()
            .filter_map(|e| match e {
                Entry::Survivor(b) => Some(b.index),
                Entry::Pair(_) => None,
            })
            .collect()
    }

    pub fn survivor_bullets(&self) -> Vec<Bullet> {
        self.spine
            .values()
            .filter_map(|e| match e {
                Entry::Survivor(b) => Some(*b),
                Entry::Pair(_) => None,
            })
            .collect()
    }

    pub fn survivor_count(&self) -> usize {
        self.survivor_count
    }

    /// Index of the frontmost survivor; `Some(0)` iff bullet 0 is in `S_n`.
    pub fn first_survivor_index(&self) -> Option<usize> {
        self.spine.values().find_map(|e| match e {
            Entry::Survivor(b) => Some(b.index),
            Entry::Pair(_) => None,
        })
    }

    pub fn contains_survivor(&self, index: usize) -> bool {
        matches!(self.spine.get(&index), Some(Entry::Survivor(_)))
    }

    /// Whether bullet `k` survived its own truncation (`b_k` in `S_k`).
    /// `None` until `k` has been ingested.
    pub fn is_potential_survivor(&self, k: usize) -> Option<bool> {
        (k < self.ingested).then(|| self.ps_bits[k / 64] >> (k % 64) & 1 == 1)
    }

    /// Collisions scheduled during the most recent ingest.
    pub fn last_cascade(&self) -> &[Collision] {
        &self.cascade
    }

    /// Confirmed collisions (time at or before the latest fire time). These
    /// belong to the untruncated process and never change. Only populated
    /// with a memory sink; other sinks leave this empty and track
    /// [`Engine::confirmed_count`] instead.
    pub fn confirmed_collisions(&self) -> &[Collision] {
        match &self.sink {
            CollisionSink::Memory(log) => log,
            _ => &[],
        }
    }

    pub fn confirmed_count(&self) -> u64 {
        self.confirmed
    }

    pub fn ingested(&self) -> usize {
        self.ingested
    }

    pub fn last_fire_time(&self) -> f64 {
        self.last_fire_time
    }

    /// Resident footprint of the schedule, in entries: survivors, scheduled
    /// pairs, and not-yet-collected heap records.
    pub fn resident_entries(&self) -> usize {
        self.spine.len() + self.deaths.len()
    }

    /// Declare the sequence finished: no further bullets will be fired, so
    /// every still-scheduled pair is final. Flushes them to the sink in
    /// time order; afterwards only survivors remain in the schedule.
    pub fn finalize(&mut self) -> Result<(), SimError> {
        self.confirm_up_to(f64::INFINITY)
    }

    /// Flush the schedule and take everything: all collisions sorted by
    /// time, and the surviving bullets. Requires the memory sink.
    pub fn finish(mut self) -> (Vec<Collision>, Vec<Bullet>) {
        self.finalize().expect("memory sink cannot fail");
        let collisions = match self.sink {
            CollisionSink::Memory(log) => log,
            _ => panic!("finish() requires the memory collision sink"),
        };
        let survivors = self
            .spine
            .into_values()
            .map(|entry| match entry {
                Entry::Survivor(b) => b,
                Entry::Pair(_) => unreachable!("finalize cleared all pairs"),
            })
            .collect();
        (collisions, survivors)
    }
}

/// Resolve a whole truncation in one call: fold [`Engine::ingest`] over the
/// sequence and drain. Pure function of the input.
pub fn resolve_truncation(bullets: &[Bullet], tol: Tolerance) -> Result<Resolution, SimError> {
    let mut engine = Engine::with_tolerance(tol);
    let mut sn_sizes = Vec::with_capacity(bullets.len());
    let mut ps_flags = Vec::with_capacity(bullets.len());
    let mut insertion_partner = Vec::with_capacity(bullets.len());
    for b in bullets {
        let out = engine.ingest(*b)?;
        sn_sizes.push(out.survivor_count);
        ps_flags.push(out.is_potential_survivor);
        insertion_partner.push(out.insertion_partner);
    }
    let (collisions, survivors) = engine.finish();
    Ok(Resolution {
        bullets: bullets.to_vec(),
        collisions,
        survivors: survivors.into_iter().map(|b| b.index).collect(),
        sn_sizes,
        ps_flags,
        insertion_partner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bullet::sequence;

    fn resolve(velocities: &[f64], fire_times: &[f64]) -> Resolution {
        resolve_truncation(&sequence(velocities, fire_times), Tolerance::default()).unwrap()
    }

    #[test]
    fn single_bullet_survives() {
        let r = resolve(&[1.0], &[0.0]);
        assert_eq!(r.survivors, vec![0]);
        assert!(r.collisions.is_empty());
        assert_eq!(r.sn_sizes, vec![1]);
        assert_eq!(r.ps_flags, vec![true]);
    }

    #[test]
    fn equal_velocities_never_collide() {
        let r = resolve(&[1.0; 6], &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(r.survivors, vec![0, 1, 2, 3, 4, 5]);
        assert!(r.collisions.is_empty());
        assert_eq!(r.sn_sizes, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn three_bullet_fixture() {
        // b_1 catches b_0 at (1.5, 1.5); slow b_2 then survives alone
        let r = resolve(&[1.0, 3.0, 0.5], &[0.0, 1.0, 2.0]);
        assert_eq!(r.collisions.len(), 1);
        let c = &r.collisions[0];
        assert_eq!((c.back_index, c.front_index), (1, 0));
        assert_eq!(c.time, 1.5);
        assert_eq!(c.position, 1.5);
        assert_eq!(r.survivors, vec![2]);
        assert_eq!(r.sn_sizes, vec![1, 0, 1]);
        assert_eq!(r.ps_flags, vec![true, false, true]);
        assert_eq!(r.insertion_partner, vec![None, Some(0), None]);
    }

    #[test]
    fn four_bullet_cascade_fixture() {
        // b_3 pre-empts b_2's scheduled kill of b_1, freeing b_1
        let r = resolve(&[0.6, 0.2, 1.0, 10.0], &[0.0, 1.0, 2.0, 2.1]);
        assert_eq!(r.survivors, vec![0, 1]);
        assert_eq!(r.sn_sizes, vec![1, 2, 1, 2]);
        assert_eq!(r.ps_flags, vec![true, true, false, false]);
        assert_eq!(r.insertion_partner, vec![None, None, Some(1), Some(2)]);
        assert_eq!(r.matching(), vec![(3, 2)]);
        let c = &r.collisions[0];
        assert!((c.time - 19.0 / 9.0).abs() < 1e-12);
        assert!((c.position - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn cascade_confirmation_timing() {
        let bullets = sequence(&[0.6, 0.2, 1.0, 10.0], &[0.0, 1.0, 2.0, 2.1]);
        let mut engine = Engine::new();
        for b in &bullets {
            engine.ingest(*b).unwrap();
        }
        // collision at 19/9 ~ 2.111 is still in the future of t = 2.1
        assert!(engine.confirmed_collisions().is_empty());
        engine.ingest(Bullet::new(4, 0.1, 3.0)).unwrap();
        let confirmed = engine.confirmed_collisions();
        assert_eq!(confirmed.len(), 1);
        assert_eq!(confirmed[0].back_index, 3);
        assert_eq!(confirmed[0].front_index, 2);
    }

    #[test]
    fn triple_collision_fixture() {
        // both catch equations solve to (3, 3)
        let err = resolve_truncation(
            &sequence(&[1.0, 1.5, 3.0], &[0.0, 1.0, 2.0]),
            Tolerance::default(),
        )
        .unwrap_err();
        match err {
            SimError::TripleCollision { bullets, .. } => assert_eq!(bullets, [0, 1, 2]),
            other => panic!("expected triple collision, got {other}"),
        }
    }

    #[test]
    fn poisoned_engine_refuses_further_work() {
        let mut engine = Engine::new();
        for b in sequence(&[1.0, 1.5], &[0.0, 1.0]) {
            engine.ingest(b).unwrap();
        }
        assert!(engine.ingest(Bullet::new(2, 3.0, 2.0)).is_err());
        assert!(matches!(
            engine.ingest(Bullet::new(3, 0.1, 3.0)),
            Err(SimError::Poisoned)
        ));
    }

    #[test]
    fn zero_speed_bullets_match_degenerate_dynamics() {
        // mu = delta_0: b_{2k+1} annihilates b_{2k} at t_{2k+1}, position 0
        let r = resolve(&[0.0; 4], &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(r.matching(), vec![(1, 0), (3, 2)]);
        assert!(r.survivors.is_empty());
        for c in &r.collisions {
            assert_eq!(c.position, 0.0);
            assert_eq!(c.time, r.bullets[c.back_index].fire_time);
        }
        assert_eq!(r.sn_sizes, vec![1, 0, 1, 0]);
    }

    #[test]
    fn pair_hidden_behind_slow_survivor_is_reachable_again() {
        // the far-future pair (1 -> 0) outlives the speed-0 survivor b_2
        // that momentarily shields it; fast b_4 must still pre-empt it
        let r = resolve(
            &[0.63, 0.78, 0.0, 0.0, 1.9],
            &[0.018, 1.938, 1.9390, 1.9400, 1.9410],
        );
        assert_eq!(r.matching(), vec![(3, 2), (4, 1)]);
        assert_eq!(r.survivors, vec![0]);
    }

    #[test]
    fn bullet_zero_can_return_only_into_an_empty_set() {
        // b_1 dooms b_0, then fast b_2 kills b_1 early; freed b_0 is the
        // sole survivor again
        let r = resolve(&[1.0, 2.0, 10.0], &[0.0, 1.0, 1.5]);
        assert_eq!(r.survivors, vec![0]);
        assert_eq!(r.sn_sizes, vec![1, 0, 1]);
        assert_eq!(r.matching(), vec![(2, 1)]);
        assert_eq!(r.ps_flags, vec![true, false, false]);
    }

    #[test]
    fn non_monotone_fire_time_rejected() {
        let mut engine = Engine::new();
        engine.ingest(Bullet::new(0, 1.0, 0.0)).unwrap();
        let err = engine.ingest(Bullet::new(1, 1.0, 0.0)).unwrap_err();
        assert!(matches!(err, SimError::NonMonotoneFireTime { .. }));
    }

    #[test]
    fn potential_survivor_queries() {
        let bullets = sequence(&[0.6, 0.2, 1.0, 10.0], &[0.0, 1.0, 2.0, 2.1]);
        let mut engine = Engine::new();
        for b in &bullets {
            engine.ingest(*b).unwrap();
        }
        assert_eq!(engine.is_potential_survivor(0), Some(true));
        assert_eq!(engine.is_potential_survivor(3), Some(false));
        assert_eq!(engine.is_potential_survivor(4), None);
        assert_eq!(engine.survivors_snapshot(), vec![0, 1]);
        assert_eq!(engine.first_survivor_index(), Some(0));
        assert!(engine.contains_survivor(1));
        assert!(!engine.contains_survivor(2));
    }
}
