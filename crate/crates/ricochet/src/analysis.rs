//! Finite-scale diagnostics: threat censuses, survivor-membership settling,
//! front-addition and shift-reindexing checks, and the shield fixture.

use crate::bullet::Bullet;
use crate::engine::{resolve_truncation, Engine, SurvivorChange};
use crate::error::SimError;
use crate::kinematics::Tolerance;
use crate::oracle::brute_survivors;
use crate::resolution::{Collision, Resolution};

/// The bullets that threaten a given target: `j` threatens `i` when `j`
/// annihilates `i` in the truncation ending at `j`. That collision partner
/// is exactly `j`'s insertion partner, so the census is read straight off a
/// resolution instead of re-resolving every truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreatRecord {
    pub target_index: usize,
    /// Threatening indices, increasing. Every entry is strictly faster than
    /// the target.
    pub threat_indices: Vec<usize>,
}

pub fn threats_of(bullets: &[Bullet], i: usize, tol: Tolerance) -> Result<ThreatRecord, SimError> {
    assert!(i < bullets.len(), "target index out of range");
    let resolution = resolve_truncation(bullets, tol)?;
    Ok(threats_from_resolution(&resolution, i))
}

/// Threat census against an already-computed resolution.
pub fn threats_from_resolution(resolution: &Resolution, i: usize) -> ThreatRecord {
    ThreatRecord {
        target_index: i,
        threat_indices: resolution
            .insertion_partner
            .iter()
            .enumerate()
            .filter_map(|(j, p)| (*p == Some(i)).then_some(j))
            .collect(),
    }
}

/// For each bullet, the last index at which its survivor-set membership
/// changed, counting its own firing. A bullet that enters, leaves and
/// re-enters reports the re-entry. This is a lower bound on the true
/// settling index: membership is only observed up to the final truncation.
pub fn settling_indices(bullets: &[Bullet], tol: Tolerance) -> Result<Vec<usize>, SimError> {
    let mut engine = Engine::with_tolerance(tol);
    let mut last_flip: Vec<usize> = Vec::with_capacity(bullets.len());
    for (k, b) in bullets.iter().enumerate() {
        let out = engine.ingest(*b)?;
        last_flip.push(k);
        match out.change {
            SurvivorChange::Added(g) if g != k => last_flip[g] = k,
            SurvivorChange::Removed(s) => last_flip[s] = k,
            _ => {}
        }
    }
    Ok(last_flip)
}

/// How the survivor set absorbed a bullet added at the front.
#[derive(Debug, Clone, PartialEq)]
pub enum FrontAdditionVerdict {
    /// The suffix had no survivors; the full set is the front bullet alone.
    PassEmptySuffix,
    /// The front bullet annihilated the suffix's first survivor.
    PassRemovedFirst,
    /// One bullet ahead of the suffix's first survivor was freed.
    PassAddedEarlier { added: usize },
    Fail {
        full: Vec<usize>,
        suffix: Vec<usize>,
    },
}

/// Resolve the truncation with and without its front bullet (both through
/// the reference resolver) and verify the survivor sets differ exactly as
/// the front-addition law allows.
pub fn check_front_addition(
    bullets: &[Bullet],
    tol: Tolerance,
) -> Result<FrontAdditionVerdict, SimError> {
    assert!(bullets.len() >= 2, "need at least two bullets");
    let full_survivors = brute_survivors(bullets, tol)?;
    let suffix_bullets: Vec<Bullet> = bullets[1..]
        .iter()
        .map(|b| Bullet::new(b.index - 1, b.velocity, b.fire_time))
        .collect();
    let suffix: Vec<usize> = brute_survivors(&suffix_bullets, tol)?
        .iter()
        .map(|s| s + 1)
        .collect();
    let full_set = &full_survivors;

    if suffix.is_empty() {
        return Ok(if full_set.len() == 1 {
            FrontAdditionVerdict::PassEmptySuffix
        } else {
            FrontAdditionVerdict::Fail {
                full: full_set.clone(),
                suffix,
            }
        });
    }
    if full_set.as_slice() == &suffix[1..] {
        return Ok(FrontAdditionVerdict::PassRemovedFirst);
    }
    if full_set.len() == suffix.len() + 1
        && full_set[0] < suffix[0]
        && full_set[1..] == suffix[..]
    {
        return Ok(FrontAdditionVerdict::PassAddedEarlier { added: full_set[0] });
    }
    Ok(FrontAdditionVerdict::Fail {
        full: full_set.clone(),
        suffix,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShiftVerdict {
    Pass,
    Fail { detail: String },
}

/// Resolving a suffix must not depend on how its fire times are presented:
/// re-based by subtracting the first fire time, or rebuilt by re-summing
/// the delays. Matchings must agree exactly and survivor velocities
/// bitwise.
pub fn shift_reindex_check(
    bullets: &[Bullet],
    k: usize,
    tol: Tolerance,
) -> Result<ShiftVerdict, SimError> {
    assert!(k < bullets.len(), "shift index out of range");
    let base = bullets[k].fire_time;
    let rebased: Vec<Bullet> = bullets[k..]
        .iter()
        .enumerate()
        .map(|(j, b)| Bullet::new(j, b.velocity, b.fire_time - base))
        .collect();

    let mut resummed = Vec::with_capacity(bullets.len() - k);
    resummed.push(Bullet::new(0, bullets[k].velocity, 0.0));
    let mut t = 0.0;
    for j in (k + 1)..bullets.len() {
        t += bullets[j].fire_time - bullets[j - 1].fire_time;
        resummed.push(Bullet::new(j - k, bullets[j].velocity, t));
    }

    let a = resolve_truncation(&rebased, tol)?;
    let b = resolve_truncation(&resummed, tol)?;
    if a.matching() != b.matching() {
        return Ok(ShiftVerdict::Fail {
            detail: format!("matchings differ: {:?} vs {:?}", a.matching(), b.matching()),
        });
    }
    let va: Vec<f64> = a.survivors.iter().map(|&s| rebased[s].velocity).collect();
    let vb: Vec<f64> = b.survivors.iter().map(|&s| resummed[s].velocity).collect();
    if va != vb {
        return Ok(ShiftVerdict::Fail {
            detail: format!("survivor velocities differ: {va:?} vs {vb:?}"),
        });
    }
    Ok(ShiftVerdict::Pass)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShieldVerdict {
    /// Every (slow, fast) pair mutually annihilated and the lead bullet
    /// survived.
    Shielded { collisions: Vec<Collision> },
    /// v_fast does not exceed the lead velocity: nothing collides, nothing
    /// is shielded.
    NonShieldConfiguration,
    Fail { detail: String },
}

/// Build the shield construction: a lead bullet at speed `v` followed by
/// `m` (slow, fast) pairs, with the given inter-firing delays. Verify each
/// fast bullet annihilates the slow one just ahead of it and the lead
/// bullet survives.
pub fn shield_scenario(
    v: f64,
    m: usize,
    v_slow: f64,
    v_fast: f64,
    delays: &[f64],
    tol: Tolerance,
) -> Result<ShieldVerdict, SimError> {
    assert_eq!(delays.len(), 2 * m, "need one delay per shield bullet");
    assert!(delays.iter().all(|d| *d > 0.0), "delays must be positive");
    assert!(v_slow <= v, "a shield's slow bullets must not outrun the lead");

    let mut bullets = Vec::with_capacity(2 * m + 1);
    bullets.push(Bullet::new(0, v, 0.0));
    let mut t = 0.0;
    for (i, d) in delays.iter().enumerate() {
        t += d;
        let velocity = if i % 2 == 0 { v_slow } else { v_fast };
        bullets.push(Bullet::new(i + 1, velocity, t));
    }
    let r = resolve_truncation(&bullets, tol)?;

    if v_fast <= v {
        return Ok(if r.collisions.is_empty() && r.survivors.len() == bullets.len() {
            ShieldVerdict::NonShieldConfiguration
        } else {
            ShieldVerdict::Fail {
                detail: format!("expected no collisions, got {:?}", r.matching()),
            }
        });
    }

    let expected: Vec<(usize, usize)> = (1..=m).map(|k| (2 * k, 2 * k - 1)).collect();
    if r.matching() != expected {
        return Ok(ShieldVerdict::Fail {
            detail: format!("matching {:?}, expected {:?}", r.matching(), expected),
        });
    }
    if !r.survivors.contains(&0) {
        return Ok(ShieldVerdict::Fail {
            detail: "lead bullet did not survive".into(),
        });
    }
    Ok(ShieldVerdict::Shielded {
        collisions: r.collisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bullet::sequence;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn cascade_fixture() -> Vec<Bullet> {
        sequence(&[0.6, 0.2, 1.0, 10.0], &[0.0, 1.0, 2.0, 2.1])
    }

    #[test]
    fn threats_read_off_insertion_partners() {
        let bullets = sequence(&[1.0, 3.0, 0.5], &[0.0, 1.0, 2.0]);
        let r = threats_of(&bullets, 0, tol()).unwrap();
        assert_eq!(r.threat_indices, vec![1]);

        let fixture = cascade_fixture();
        assert_eq!(threats_of(&fixture, 1, tol()).unwrap().threat_indices, vec![2]);
        assert_eq!(threats_of(&fixture, 2, tol()).unwrap().threat_indices, vec![3]);
        assert_eq!(threats_of(&fixture, 0, tol()).unwrap().threat_indices, Vec::<usize>::new());
    }

    #[test]
    fn no_collisions_means_no_threats() {
        let bullets = sequence(&[0.5; 5], &[0.0, 1.0, 2.0, 3.0, 4.0]);
        for i in 0..5 {
            assert!(threats_of(&bullets, i, tol()).unwrap().threat_indices.is_empty());
        }
    }

    #[test]
    fn settling_on_the_cascade_fixture() {
        // b_1 leaves at 2 and returns at 3; b_0 never budges after birth
        let flips = settling_indices(&cascade_fixture(), tol()).unwrap();
        assert_eq!(flips, vec![0, 3, 2, 3]);
    }

    #[test]
    fn settling_for_point_mass_is_the_birth_index() {
        let bullets = sequence(&[0.5; 4], &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(settling_indices(&bullets, tol()).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn front_addition_on_the_fixture() {
        // S_[1,3] = {b_1}; adding b_0 frees nothing but survives in front
        let v = check_front_addition(&cascade_fixture(), tol()).unwrap();
        assert_eq!(v, FrontAdditionVerdict::PassAddedEarlier { added: 0 });
    }

    #[test]
    fn front_addition_when_the_back_bullet_wins() {
        // two bullets, back faster: S_[1,1] = {b_1}, S = {} minus first
        let bullets = sequence(&[0.5, 2.0], &[0.0, 1.0]);
        let v = check_front_addition(&bullets, tol()).unwrap();
        assert_eq!(v, FrontAdditionVerdict::PassRemovedFirst);
    }

    #[test]
    fn shift_check_passes_on_fixture_suffixes() {
        let fixture = cascade_fixture();
        for k in 0..fixture.len() {
            assert_eq!(
                shift_reindex_check(&fixture, k, tol()).unwrap(),
                ShiftVerdict::Pass,
                "suffix at {k}"
            );
        }
    }

    #[test]
    fn shield_fixture_matches_hand_computation() {
        let delays = [1.0; 4];
        let v = shield_scenario(1.0, 2, 0.5, 5.0, &delays, tol()).unwrap();
        match v {
            ShieldVerdict::Shielded { collisions } => {
                assert_eq!(collisions.len(), 2);
                let c1 = collisions.iter().find(|c| c.back_index == 2).unwrap();
                assert!((c1.time - 9.5 / 4.5).abs() < 1e-12);
                let c2 = collisions.iter().find(|c| c.back_index == 4).unwrap();
                assert!((c2.time - 18.5 / 4.5).abs() < 1e-12);
            }
            other => panic!("expected shielded, got {other:?}"),
        }
    }

    #[test]
    fn empty_shield_is_trivially_shielded() {
        let v = shield_scenario(1.0, 0, 0.5, 5.0, &[], tol()).unwrap();
        assert!(matches!(v, ShieldVerdict::Shielded { .. }));
    }

    #[test]
    fn equal_speed_shield_reports_non_shield() {
        let v = shield_scenario(1.0, 2, 1.0, 1.0, &[1.0; 4], tol()).unwrap();
        assert_eq!(v, ShieldVerdict::NonShieldConfiguration);
    }
}
