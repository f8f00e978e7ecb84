//! Exhaustive ground truth over all `m^n` profiles.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::competition::CompetitionStructure;
use crate::error::{Error, Result};
use crate::game::{Game, Profile};
use crate::rational::{format_rational, Rational};
use crate::schedule::Analysis;

/// Default bound on the number of profiles an exhaustive scan may visit.
pub const DEFAULT_CAP: u128 = 1 << 24;

/// Environment variable overriding [`DEFAULT_CAP`].
pub const CAP_ENV: &str = "RANKSCHED_CAP";

pub fn cap_from_env() -> u128 {
    std::env::var(CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_CAP)
}

pub fn cap_check(game: &Game, cap: u128, force: bool) -> Result<()> {
    let required = game.profile_count();
    if required > cap && !force {
        return Err(Error::CapExceeded { required, cap });
    }
    if required > u64::MAX as u128 {
        return Err(Error::CapExceeded {
            required,
            cap: u64::MAX as u128,
        });
    }
    Ok(())
}

fn indices(game: &Game) -> rayon::range::Iter<u64> {
    (0..game.profile_count() as u64).into_par_iter()
}

fn analyse(game: &Game, idx: u64) -> Analysis<'_> {
    Analysis::new_unchecked(game, Profile::from_index(idx, game.n(), game.m()))
}

/// Every pure NE in lexicographic order of the assignment digits.
pub fn enumerate_ne(game: &Game, cap: u128, force: bool) -> Result<Vec<Profile>> {
    cap_check(game, cap, force)?;
    Ok(indices(game)
        .filter_map(|idx| {
            let a = analyse(game, idx);
            a.is_ne().then(|| a.into_profile())
        })
        .collect())
}

pub fn exists_ne(game: &Game, cap: u128, force: bool) -> Result<bool> {
    cap_check(game, cap, force)?;
    Ok(indices(game).any(|idx| analyse(game, idx).is_ne()))
}

/// Minimum makespan and the lexicographically first profile attaining it.
pub fn opt_makespan(game: &Game, cap: u128, force: bool) -> Result<(Rational, Profile)> {
    cap_check(game, cap, force)?;
    let (best, idx) = indices(game)
        .map(|idx| (analyse(game, idx).makespan(), idx))
        .min()
        .expect("at least one profile");
    Ok((best, Profile::from_index(idx, game.n(), game.m())))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub ne_profiles: Vec<Profile>,
    pub opt_makespan: Rational,
    pub opt_profile: Profile,
    pub poa: Option<Rational>,
    pub pos: Option<Rational>,
    pub profile_count: u128,
    /// Σ p_j.
    pub total_length: Rational,
}

impl OracleReport {
    pub fn to_json(&self, game: &Game) -> Value {
        let opt = |r: &Option<Rational>| match r {
            Some(v) => Value::String(format_rational(v)),
            None => Value::Null,
        };
        json!({
            "ne_count": self.ne_profiles.len(),
            "ne_profiles": self.ne_profiles.iter().map(|p| assignment_json(game, p)).collect::<Vec<_>>(),
            "opt_makespan": format_rational(&self.opt_makespan),
            "opt_profile": assignment_json(game, &self.opt_profile),
            "poa": opt(&self.poa),
            "pos": opt(&self.pos),
            "profile_count": self.profile_count.to_string(),
            "W": format_rational(&self.total_length),
        })
    }
}

/// `{"job id": "machine id"}` in job input order.
pub fn assignment_json(game: &Game, profile: &Profile) -> Value {
    let map: serde_json::Map<String, Value> = game
        .jobs()
        .iter()
        .zip(profile.as_slice())
        .map(|(job, &i)| (job.id.clone(), Value::String(game.machines()[i].id.clone())))
        .collect();
    Value::Object(map)
}

/// Full scan: equilibria, optimum and both ratios in one pass.
pub fn report(game: &Game, cap: u128, force: bool) -> Result<OracleReport> {
    cap_check(game, cap, force)?;
    let rows: Vec<(u64, Rational, bool)> = indices(game)
        .map(|idx| {
            let a = analyse(game, idx);
            (idx, a.makespan(), a.is_ne())
        })
        .collect();
    let (opt, opt_idx) = rows
        .iter()
        .map(|(idx, c, _)| (*c, *idx))
        .min()
        .expect("at least one profile");
    let ne: Vec<&(u64, Rational, bool)> = rows.iter().filter(|r| r.2).collect();
    let worst = ne.iter().map(|r| r.1).max();
    let best = ne.iter().map(|r| r.1).min();
    Ok(OracleReport {
        ne_profiles: ne
            .iter()
            .map(|r| Profile::from_index(r.0, game.n(), game.m()))
            .collect(),
        opt_makespan: opt,
        opt_profile: Profile::from_index(opt_idx, game.n(), game.m()),
        poa: worst.map(|w| w / opt),
        pos: best.map(|b| b / opt),
        profile_count: game.profile_count(),
        total_length: game.total_length(),
    })
}

/// (PoA, PoS); [`Error::NoEquilibrium`] when the game has no NE.
pub fn poa_pos(game: &Game, cap: u128, force: bool) -> Result<(Rational, Rational)> {
    let r = report(game, cap, force)?;
    match (r.poa, r.pos) {
        (Some(poa), Some(pos)) => Ok((poa, pos)),
        _ => Err(Error::NoEquilibrium),
    }
}

/// (PoA, PoS) of the same instance without competition (all-singleton sets).
pub fn cost_only_poa_pos(game: &Game, cap: u128, force: bool) -> Result<(Rational, Rational)> {
    poa_pos(
        &game.with_competition(CompetitionStructure::Singletons)?,
        cap,
        force,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameBuilder;
    use crate::rational::{int, rat};

    #[test]
    fn cycle_game_has_no_ne() {
        let g = GameBuilder::new()
            .job("a", int(1))
            .job("b", int(1))
            .machine("M1", int(1))
            .machine("M2", int(1))
            .global(&["a", "b"])
            .build()
            .unwrap();
        assert!(enumerate_ne(&g, DEFAULT_CAP, false).unwrap().is_empty());
        assert_eq!(poa_pos(&g, DEFAULT_CAP, false), Err(Error::NoEquilibrium));
    }

    #[test]
    fn reversed_lists_single_split() {
        let g = GameBuilder::new()
            .job("a", int(1))
            .job("b", int(1))
            .machine("M1", int(1))
            .machine("M2", int(1))
            .per_machine(&[vec!["a", "b"], vec!["b", "a"]])
            .build()
            .unwrap();
        let ne = enumerate_ne(&g, DEFAULT_CAP, false).unwrap();
        // Each job heads one list; swapping the split puts each job behind the other.
        assert_eq!(ne, vec![Profile::new(vec![0, 1])]);
    }

    #[test]
    fn single_job_everywhere() {
        let g = GameBuilder::new()
            .job("a", int(3))
            .machine("M1", int(1))
            .machine("M2", int(1))
            .machine("M3", int(2))
            .global(&["a"])
            .build()
            .unwrap();
        let (opt, p) = opt_makespan(&g, DEFAULT_CAP, false).unwrap();
        assert_eq!(opt, rat(3, 2));
        assert_eq!(p.as_slice(), &[2]);
        // Faster machine strictly better: only one NE here.
        assert_eq!(enumerate_ne(&g, DEFAULT_CAP, false).unwrap().len(), 1);
    }

    #[test]
    fn cap_refusal_names_requirement() {
        let mut b = GameBuilder::new();
        for j in 0..11 {
            b = b.job(format!("j{j}"), int(1));
        }
        let g = b
            .machine("M1", int(1))
            .machine("M2", int(1))
            .global_input_order()
            .build()
            .unwrap();
        assert_eq!(
            enumerate_ne(&g, 1000, false),
            Err(Error::CapExceeded {
                required: 2048,
                cap: 1000
            })
        );
        assert!(enumerate_ne(&g, 1000, true).is_ok());
    }
}
