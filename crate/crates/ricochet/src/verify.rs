//! Conformance machinery shared by the test suites and the `check` CLI:
//! structural invariant checks on resolutions, step-level checks on the
//! engine's incremental updates, engine-vs-reference agreement, and a
//! randomized instance generator covering every distribution family.

use rand::Rng;

use crate::bullet::Bullet;
use crate::distribution::DistributionSpec;
use crate::engine::{resolve_truncation, Engine, SurvivorChange};
use crate::error::SimError;
use crate::kinematics::Tolerance;
use crate::oracle::brute_resolve;
use crate::resolution::Resolution;
use crate::rng::RngStream;

/// Structural invariants every resolution must satisfy, regardless of which
/// resolver produced it. Returns a description of the first violation.
pub fn check_static_invariants(bullets: &[Bullet], r: &Resolution) -> Result<(), String> {
    let n = bullets.len();
    if r.bullets.len() != n
        || r.sn_sizes.len() != n
        || r.ps_flags.len() != n
        || r.insertion_partner.len() != n
    {
        return Err("resolution vectors disagree with bullet count".into());
    }

    // conservation: every bullet either survives or sits in exactly one pair
    if 2 * r.collisions.len() + r.survivors.len() != n {
        return Err(format!(
            "conservation: 2*{} + {} != {}",
            r.collisions.len(),
            r.survivors.len(),
            n
        ));
    }

    // |S_k| parity and unit steps
    for (k, &s) in r.sn_sizes.iter().enumerate() {
        if s % 2 != (k + 1) % 2 {
            return Err(format!("parity: |S_{k}| = {s}"));
        }
        if k > 0 {
            let prev = r.sn_sizes[k - 1];
            if s.abs_diff(prev) != 1 {
                return Err(format!("unit step: |S_{}| = {prev} -> |S_{k}| = {s}", k - 1));
            }
        }
    }
    if let Some(&last) = r.sn_sizes.last() {
        if last != r.survivors.len() {
            return Err("final |S_n| disagrees with survivor list".into());
        }
    }

    // per-collision ordering and trajectory consistency
    for c in &r.collisions {
        if c.back_index <= c.front_index {
            return Err(format!("collision order: {} -> {}", c.back_index, c.front_index));
        }
        let back = &bullets[c.back_index];
        let front = &bullets[c.front_index];
        let degenerate = front.velocity == 0.0 && c.position == 0.0;
        if !(back.velocity > front.velocity || degenerate) {
            return Err(format!(
                "collision speeds: v_back {} <= v_front {} at ({}, {})",
                back.velocity, front.velocity, c.time, c.position
            ));
        }
        if c.time < back.fire_time || (c.time == back.fire_time && !degenerate) {
            return Err(format!("collision at {} precedes back firing", c.time));
        }
        for (b, name) in [(back, "back"), (front, "front")] {
            let expect = b.position_at(c.time);
            let scale = expect.abs().max(c.position.abs()).max(1e-300);
            if (expect - c.position).abs() > 1e-9 * scale.max(1.0) {
                return Err(format!(
                    "collision position {} off the {name} trajectory (expected {expect})",
                    c.position
                ));
            }
        }
    }

    // matching is non-crossing and survivors sit outside every pair span
    let mut partner = vec![usize::MAX; n];
    for c in &r.collisions {
        if partner[c.back_index] != usize::MAX || partner[c.front_index] != usize::MAX {
            return Err("a bullet appears in two collisions".into());
        }
        partner[c.back_index] = c.front_index;
        partner[c.front_index] = c.back_index;
    }
    let mut open: Vec<usize> = Vec::new();
    for i in 0..n {
        if partner[i] == usize::MAX {
            if !open.is_empty() {
                return Err(format!("survivor {i} sits inside an unclosed pair span"));
            }
        } else if partner[i] > i {
            open.push(i);
        } else if open.pop() != Some(partner[i]) {
            return Err(format!("crossing pair ({}, {i})", partner[i]));
        }
    }

    // survivor list: increasing, velocities non-increasing, all unmatched
    for w in r.survivors.windows(2) {
        if w[0] >= w[1] {
            return Err("survivor indices not increasing".into());
        }
        if bullets[w[0]].velocity < bullets[w[1]].velocity {
            return Err(format!(
                "survivor velocities increase: v[{}] = {} < v[{}] = {}",
                w[0], bullets[w[0]].velocity, w[1], bullets[w[1]].velocity
            ));
        }
    }
    for &s in &r.survivors {
        if partner[s] != usize::MAX {
            return Err(format!("survivor {s} also collides"));
        }
    }

    // potential-survivor flags vs insertion partners; threats are faster
    // than their targets
    for k in 0..n {
        if r.ps_flags[k] != r.insertion_partner[k].is_none() {
            return Err(format!("ps flag and insertion partner disagree at {k}"));
        }
        if let Some(p) = r.insertion_partner[k] {
            if p >= k {
                return Err(format!("insertion partner {p} not in front of {k}"));
            }
            let both_zero = bullets[k].velocity == 0.0 && bullets[p].velocity == 0.0;
            if bullets[k].velocity <= bullets[p].velocity && !both_zero {
                return Err(format!(
                    "threat {k} (v={}) not faster than target {p} (v={})",
                    bullets[k].velocity, bullets[p].velocity
                ));
            }
        }
    }

    Ok(())
}

/// Step-level invariants of the incremental engine: unit survivor-set
/// steps, removal only of the rearmost survivor, additions only at the
/// back, and bullet 0 leaving only as the sole survivor (it can return
/// afterwards, but only into an empty set).
pub fn check_step_invariants(bullets: &[Bullet], tol: Tolerance) -> Result<(), String> {
    let mut engine = Engine::with_tolerance(tol);
    let mut set: Vec<usize> = Vec::new();
    for (k, b) in bullets.iter().enumerate() {
        let out = engine
            .ingest(*b)
            .map_err(|e| format!("ingest {k}: {e}"))?;
        match out.change {
            SurvivorChange::Removed(s) => {
                if set.last() != Some(&s) {
                    return Err(format!("step {k}: removed {s}, rearmost was {:?}", set.last()));
                }
                if s == 0 && set.len() != 1 {
                    return Err(format!(
                        "step {k}: bullet 0 removed while {} survivors present",
                        set.len()
                    ));
                }
                set.pop();
            }
            SurvivorChange::Added(g) => {
                if let Some(&last) = set.last() {
                    if g <= last {
                        return Err(format!("step {k}: added {g} behind survivor {last}"));
                    }
                }
                if g == 0 && !set.is_empty() {
                    return Err(format!("step {k}: bullet 0 re-added to a non-empty set"));
                }
                set.push(g);
            }
        }
        if out.survivor_count != set.len() {
            return Err(format!("step {k}: survivor count drifted"));
        }
        if out.is_potential_survivor != (out.change == SurvivorChange::Added(k)) {
            return Err(format!("step {k}: ps flag inconsistent with change"));
        }
    }
    if engine.survivors_snapshot() != set {
        return Err("final snapshot disagrees with tracked set".into());
    }
    Ok(())
}

/// Exact agreement between two resolutions of the same input: identical
/// matching, survivors and per-prefix data; collision times and positions
/// within relative 1e-9 (they are bitwise equal in practice, both resolvers
/// share one catch-time routine).
pub fn check_agreement(a: &Resolution, b: &Resolution) -> Result<(), String> {
    if a.matching() != b.matching() {
        return Err(format!(
            "matchings differ: {:?} vs {:?}",
            a.matching(),
            b.matching()
        ));
    }
    if a.survivors != b.survivors {
        return Err(format!(
            "survivors differ: {:?} vs {:?}",
            a.survivors, b.survivors
        ));
    }
    if a.sn_sizes != b.sn_sizes {
        return Err("sn trajectories differ".into());
    }
    if a.ps_flags != b.ps_flags {
        return Err("ps flags differ".into());
    }
    if a.insertion_partner != b.insertion_partner {
        return Err("insertion partners differ".into());
    }
    for ca in &a.collisions {
        let cb = b
            .collisions
            .iter()
            .find(|c| c.back_index == ca.back_index)
            .expect("matchings already agreed");
        let tscale = ca.time.abs().max(1.0);
        let xscale = ca.position.abs().max(1.0);
        if (ca.time - cb.time).abs() > 1e-9 * tscale
            || (ca.position - cb.position).abs() > 1e-9 * xscale
        {
            return Err(format!(
                "collision ({}, {}) at t={} vs t={}",
                ca.back_index, ca.front_index, ca.time, cb.time
            ));
        }
    }
    Ok(())
}

/// One randomized instance: a bullet sequence drawn from a rotating menu of
/// distribution-family combinations (including atomic-on-atomic pairs,
/// which may legitimately end in a triple collision).
pub fn random_instance(case_id: u64, master_seed: u64) -> (Vec<Bullet>, String) {
    let mut rng = RngStream::new(master_seed, case_id).rng();
    let grid20: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
    let mus = [
        DistributionSpec::uniform(0.0, 1.0).unwrap(),
        DistributionSpec::uniform(0.5, 1.5).unwrap(),
        DistributionSpec::exponential(1.0).unwrap(),
        DistributionSpec::finite_support(grid20, 0.0002).unwrap(),
        DistributionSpec::finite_support(vec![0.25, 0.5, 0.75, 1.0], 0.0).unwrap(),
        DistributionSpec::point_mass(0.7).unwrap(),
    ];
    let nus = [
        DistributionSpec::point_mass(1.0).unwrap(),
        DistributionSpec::uniform(0.5, 1.5).unwrap(),
        DistributionSpec::exponential(2.0).unwrap(),
        DistributionSpec::uniform(0.05, 0.15).unwrap(),
    ];
    let mu = &mus[rng.gen_range(0..mus.len())];
    let nu = &nus[rng.gen_range(0..nus.len())];
    let n = rng.gen_range(2..=200);

    let sampler = mu.velocity_sampler(&mut rng);
    let mut fire_time = 0.0;
    let bullets = (0..n)
        .map(|i| {
            let v = sampler.sample(&mut rng);
            if i > 0 {
                fire_time += nu.sample_delay(&mut rng);
            }
            Bullet::new(i, v, fire_time)
        })
        .collect();
    (bullets, format!("case {case_id}: mu={mu} nu={nu} n={n}"))
}

/// Resolve one instance with both resolvers and require agreement — on the
/// resolution, or on the triple-collision verdict. Also runs the full
/// invariant suite on the agreed result.
pub fn compare_engine_oracle(bullets: &[Bullet], tol: Tolerance) -> Result<(), String> {
    let engine = resolve_truncation(bullets, tol);
    let oracle = brute_resolve(bullets, tol);
    match (engine, oracle) {
        (Ok(e), Ok(o)) => {
            check_agreement(&e, &o)?;
            check_static_invariants(bullets, &e)?;
            check_step_invariants(bullets, tol)
        }
        (Err(SimError::TripleCollision { .. }), Err(SimError::TripleCollision { .. })) => Ok(()),
        (Ok(_), Err(e)) => Err(format!("oracle failed where engine succeeded: {e}")),
        (Err(e), Ok(_)) => Err(format!("engine failed where oracle succeeded: {e}")),
        (Err(e), Err(o)) => Err(format!("mismatched failures: engine '{e}' oracle '{o}'")),
    }
}

/// Run `cases` randomized engine-vs-oracle comparisons. Returns the failure
/// descriptions (empty means the sweep passed).
pub fn oracle_sweep(cases: u64, master_seed: u64, tol: Tolerance) -> Vec<String> {
    use rayon::prelude::*;
    (0..cases)
        .into_par_iter()
        .filter_map(|case| {
            let (bullets, desc) = random_instance(case, master_seed);
            compare_engine_oracle(&bullets, tol)
                .err()
                .map(|e| format!("{desc}: {e}"))
        })
        .collect()
}
