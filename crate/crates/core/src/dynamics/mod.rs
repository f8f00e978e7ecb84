//! Best-response dynamics, deviator rules and sink equilibria.

mod graph;
pub mod scc;
pub mod stationary;

use std::collections::HashSet;

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{Game, Profile};
use crate::oracle::{cap_check, opt_makespan};
use crate::rational::{ceil_div, widen, Rational};
use crate::schedule::Analysis;

pub use graph::{build_profile_graph, Edge, GraphMode, ProfileGraph};

/// Chooses which suboptimal job moves next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeviatorRule {
    /// The highest-priority job of Lag(s) if any, else the lowest-priority job
    /// of Sub(s).
    PriorityBased,
    LowestIdSuboptimal,
    /// Worst rank first; ties go to the lowest index.
    HighestRankSuboptimal,
    UniformRandom,
}

impl DeviatorRule {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "priority" | "priority-based" => Some(DeviatorRule::PriorityBased),
            "lowest-id" => Some(DeviatorRule::LowestIdSuboptimal),
            "highest-rank" => Some(DeviatorRule::HighestRankSuboptimal),
            "uniform" | "uniform-random" => Some(DeviatorRule::UniformRandom),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DeviatorRule::PriorityBased => "priority",
            DeviatorRule::LowestIdSuboptimal => "lowest-id",
            DeviatorRule::HighestRankSuboptimal => "highest-rank",
            DeviatorRule::UniformRandom => "uniform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    ReachedNe,
    EnteredCycle,
    BudgetExhausted,
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::ReachedNe => "reached-NE",
            Termination::EnteredCycle => "entered-cycle",
            Termination::BudgetExhausted => "step-budget-exhausted",
        }
    }
}

/// One move and the profile it produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrStep {
    pub deviator: usize,
    pub target: usize,
    pub profile: Profile,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrTrace {
    pub start: Profile,
    pub steps: Vec<BrStep>,
    pub termination: Termination,
}

impl BrTrace {
    pub fn new(start: Profile, steps: Vec<BrStep>, termination: Termination) -> Self {
        BrTrace {
            start,
            steps,
            termination,
        }
    }

    pub fn final_profile(&self) -> Profile {
        self.steps
            .last()
            .map(|s| s.profile.clone())
            .unwrap_or_else(|| self.start.clone())
    }
}

/// Whether Lag(s) is defined: unit jobs, identical machines, one global list.
pub fn lag_defined(game: &Game) -> bool {
    game.all_unit() && game.identical_rates() && game.is_global()
}

fn lag_of(analysis: &Analysis<'_>) -> Vec<usize> {
    let game = analysis.game();
    let Some(list) = game.global_list() else {
        return Vec::new();
    };
    let m = game.m();
    let mut lag: Vec<usize> = Vec::new();
    for (pos, &j) in list.iter().enumerate() {
        let p = pos + 1;
        // rank > m⌈p/m⌉ − (m−1)/2, doubled to stay integral.
        let bound = 2 * m * ceil_div(p, m) - (m - 1);
        if analysis.rank(j) * 2 > Rational::from_integer(bound as i64) {
            lag.push(j);
        }
    }
    lag.sort_unstable();
    lag
}

/// Sub(s) and Lag(s), both ascending by job index.
pub fn sub_and_lag(game: &Game, profile: &Profile) -> Result<(Vec<usize>, Vec<usize>)> {
    if !lag_defined(game) {
        return Err(Error::contract(
            "Lag(s) needs unit jobs, identical machines and a global priority list",
        ));
    }
    let analysis = Analysis::new(game, profile.clone())?;
    Ok((analysis.suboptimal_jobs(), lag_of(&analysis)))
}

/// Position of a job in the global list, or its input index without one.
fn priority_position(game: &Game, job: usize) -> usize {
    if game.is_global() {
        game.position(0, job)
    } else {
        job
    }
}

/// Candidate deviators with their probabilities under `rule`. Deterministic
/// rules return one job with probability 1.
pub(crate) fn deviator_distribution(
    analysis: &Analysis<'_>,
    sub: &[usize],
    rule: DeviatorRule,
) -> Vec<usize> {
    if sub.is_empty() {
        return Vec::new();
    }
    let game = analysis.game();
    match rule {
        DeviatorRule::LowestIdSuboptimal => vec![sub[0]],
        DeviatorRule::HighestRankSuboptimal => {
            let worst = sub
                .iter()
                .map(|&j| analysis.rank(j))
                .max()
                .expect("nonempty");
            vec![*sub
                .iter()
                .find(|&&j| analysis.rank(j) == worst)
                .expect("nonempty")]
        }
        DeviatorRule::UniformRandom => sub.to_vec(),
        DeviatorRule::PriorityBased => {
            let lag = if lag_defined(game) {
                lag_of(analysis)
            } else {
                Vec::new()
            };
            let chosen = if lag.is_empty() {
                sub.iter().max_by_key(|&&j| priority_position(game, j))
            } else {
                lag.iter().min_by_key(|&&j| priority_position(game, j))
            };
            vec![*chosen.expect("nonempty")]
        }
    }
}

fn pick_with<R: Rng>(analysis: &Analysis<'_>, rule: DeviatorRule, rng: &mut R) -> Option<usize> {
    let sub = analysis.suboptimal_jobs();
    let candidates = deviator_distribution(analysis, &sub, rule);
    candidates.choose(rng).copied()
}

/// The next deviator; `seed` only matters for the uniform rule.
pub fn pick_deviator(
    game: &Game,
    profile: &Profile,
    rule: DeviatorRule,
    seed: u64,
) -> Result<usize> {
    let analysis = Analysis::new(game, profile.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pick_with(&analysis, rule, &mut rng)
        .ok_or_else(|| Error::contract("no deviator: the profile is a Nash equilibrium"))
}

/// Runs best-response dynamics. A deviator with several best responses picks
/// one uniformly at random. Stops at a NE, at the first repeated profile, or
/// after `max_steps` moves.
pub fn brd_run(
    game: &Game,
    start: &Profile,
    rule: DeviatorRule,
    max_steps: usize,
    seed: u64,
) -> Result<BrTrace> {
    game.check_profile(start)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<Profile> = HashSet::new();
    seen.insert(start.clone());
    let mut current = start.clone();
    let mut steps = Vec::new();
    loop {
        let analysis = Analysis::new_unchecked(game, current.clone());
        let Some(job) = pick_with(&analysis, rule, &mut rng) else {
            return Ok(BrTrace::new(start.clone(), steps, Termination::ReachedNe));
        };
        if steps.len() >= max_steps {
            return Ok(BrTrace::new(
                start.clone(),
                steps,
                Termination::BudgetExhausted,
            ));
        }
        let targets = analysis.best_responses(job);
        let target = *targets
            .choose(&mut rng)
            .expect("nonempty best-response set");
        current = current.with_move(job, target);
        steps.push(BrStep {
            deviator: job,
            target,
            profile: current.clone(),
        });
        if !seen.insert(current.clone()) {
            return Ok(BrTrace::new(
                start.clone(),
                steps,
                Termination::EnteredCycle,
            ));
        }
    }
}

/// A terminal strongly connected component of the rule-restricted graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SinkComponent {
    pub members: Vec<Profile>,
    /// Exact unless `exact` is false; sums over large sinks outgrow `i64`.
    pub distribution: Vec<BigRational>,
    /// Expected makespan under the stationary distribution.
    pub social_cost: BigRational,
    pub exact: bool,
}

impl SinkComponent {
    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }
}

/// Sinks of the rule-restricted graph reachable from `starts` (every profile
/// when `None`), with stationary distributions and expected makespan.
pub fn sink_analysis(
    game: &Game,
    rule: DeviatorRule,
    starts: Option<&[Profile]>,
    cap: u128,
    force: bool,
) -> Result<Vec<SinkComponent>> {
    let graph = build_profile_graph(game, GraphMode::RuleRestricted(rule), starts, cap, force)?;
    graph.sinks()
}

/// max over sinks of SC(Q) / OPT.
pub fn posink(game: &Game, rule: DeviatorRule, cap: u128, force: bool) -> Result<BigRational> {
    cap_check(game, cap, force)?;
    let sinks = sink_analysis(game, rule, None, cap, force)?;
    let (opt, _) = opt_makespan(game, cap, force)?;
    posink_of(&sinks, &opt)
}

/// max over `sinks` of SC(Q) / `opt`.
pub fn posink_of(sinks: &[SinkComponent], opt: &Rational) -> Result<BigRational> {
    let worst = sinks
        .iter()
        .map(|s| &s.social_cost)
        .max()
        .ok_or_else(|| Error::Invariant("profile graph without a sink".into()))?;
    Ok(worst / widen(opt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameBuilder;
    use crate::rational::{int, rat};

    fn global_unit(n: usize, m: usize) -> Game {
        let mut b = GameBuilder::new();
        for j in 1..=n {
            b = b.job(j.to_string(), int(1));
        }
        for i in 1..=m {
            b = b.machine(format!("M{i}"), int(1));
        }
        b.global_input_order().build().unwrap()
    }

    #[test]
    fn lag_example() {
        let g = global_unit(4, 2);
        let (sub, lag) = sub_and_lag(&g, &Profile::new(vec![0, 0, 0, 1])).unwrap();
        assert!(lag.contains(&2));
        assert!(lag.iter().all(|j| sub.contains(j)));
    }

    #[test]
    fn balanced_schedule_has_empty_lag() {
        let g = global_unit(6, 3);
        let p = Profile::new(vec![0, 1, 2, 0, 1, 2]);
        let (_, lag) = sub_and_lag(&g, &p).unwrap();
        assert!(lag.is_empty());
        // Jobs 5 and 6 finish last together; the rule moves job 5.
        assert_eq!(
            pick_deviator(&g, &p, DeviatorRule::PriorityBased, 0).unwrap(),
            4
        );
    }

    #[test]
    fn lag_outside_domain_is_contract_error() {
        let g = GameBuilder::new()
            .job("a", int(1))
            .job("b", int(2))
            .machine("M1", int(1))
            .global(&["a", "b"])
            .build()
            .unwrap();
        assert!(matches!(
            sub_and_lag(&g, &Profile::new(vec![0, 0])),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn cycle_game_cycles() {
        let g = global_unit(2, 2);
        for idx in 0..4 {
            let start = Profile::from_index(idx, 2, 2);
            let t = brd_run(&g, &start, DeviatorRule::LowestIdSuboptimal, 100, 1).unwrap();
            assert_eq!(t.termination, Termination::EnteredCycle);
        }
        assert_eq!(
            pick_deviator(
                &g,
                &Profile::new(vec![0, 1]),
                DeviatorRule::LowestIdSuboptimal,
                0
            )
            .unwrap(),
            0
        );
    }

    #[test]
    fn start_at_equilibrium() {
        let g = global_unit(3, 2);
        let p = Profile::new(vec![0, 1, 0]);
        let t = brd_run(&g, &p, DeviatorRule::PriorityBased, 10, 0).unwrap();
        assert!(t.steps.is_empty());
        assert_eq!(t.termination, Termination::ReachedNe);
        assert!(pick_deviator(&g, &p, DeviatorRule::PriorityBased, 0).is_err());
    }

    #[test]
    fn traces_are_reproducible() {
        let g = global_unit(6, 3);
        let start = Profile::uniform(6, 0);
        let a = brd_run(&g, &start, DeviatorRule::UniformRandom, 50, 9).unwrap();
        let b = brd_run(&g, &start, DeviatorRule::UniformRandom, 50, 9).unwrap();
        assert_eq!(a, b);
        for w in std::iter::once(&a.start)
            .chain(a.steps.iter().map(|s| &s.profile))
            .collect::<Vec<_>>()
            .windows(2)
        {
            assert_eq!(w[0].differing_jobs(w[1]).len(), 1);
        }
    }

    #[test]
    fn posink_small_even() {
        let g = global_unit(4, 2);
        assert_eq!(
            posink(&g, DeviatorRule::PriorityBased, 1 << 20, false).unwrap(),
            widen(&rat(5, 4))
        );
    }
}
