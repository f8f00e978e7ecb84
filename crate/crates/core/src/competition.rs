//! Competition sets and the seniority-ordered variant of the game.
//!
//! With set-level priority lists a machine processes competition sets in list
//! order; inside a set, jobs run in seniority order and a job that migrates is
//! appended behind the incumbents of its set.

use std::collections::HashSet;

use crate::dynamics::{BrStep, BrTrace, Termination};
use crate::error::{Error, Result};
use crate::game::{Game, Priorities, Profile};
use crate::rational::{zero, Rational};
use crate::schedule::{twice_ranks, Outcome, RankVector};

/// Partition of the jobs into competition sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub enum CompetitionStructure {
    /// Every job competes with every other job.
    #[default]
    Single,
    /// Explicit partition by job index.
    Sets(Vec<Vec<usize>>),
    /// No competition: each rank is 1 and only completion time matters.
    Singletons,
}

impl CompetitionStructure {
    /// Member lists, each ascending, in set order.
    pub fn resolve(&self, n: usize) -> Result<Vec<Vec<usize>>> {
        match self {
            CompetitionStructure::Single => Ok(vec![(0..n).collect()]),
            CompetitionStructure::Singletons => Ok((0..n).map(|j| vec![j]).collect()),
            CompetitionStructure::Sets(sets) => {
                let mut seen = vec![false; n];
                let mut out = Vec::with_capacity(sets.len());
                for (l, set) in sets.iter().enumerate() {
                    if set.is_empty() {
                        return Err(Error::validation(
                            format!("competition.sets[{l}]"),
                            "competition sets must be nonempty",
                        ));
                    }
                    for &j in set {
                        if j >= n {
                            return Err(Error::validation(
                                format!("competition.sets[{l}]"),
                                format!("job index {j} out of range"),
                            ));
                        }
                        if std::mem::replace(&mut seen[j], true) {
                            return Err(Error::validation(
                                format!("competition.sets[{l}]"),
                                format!("job index {j} appears in two sets"),
                            ));
                        }
                    }
                    let mut members = set.clone();
                    members.sort_unstable();
                    out.push(members);
                }
                if let Some(j) = seen.iter().position(|s| !s) {
                    return Err(Error::validation(
                        "competition.sets",
                        format!("job index {j} is not covered"),
                    ));
                }
                Ok(out)
            }
        }
    }
}

/// Ranks within each competition set of the game.
pub fn set_ranks(game: &Game, profile: &Profile) -> Result<RankVector> {
    crate::schedule::ranks(game, profile)
}

/// Machine assignment plus the seniority order inside every (machine, set)
/// queue.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeniorityState {
    /// `queues[i][l]`: jobs of set `l` on machine `i`, most senior first.
    queues: Vec<Vec<Vec<usize>>>,
    machine_of: Vec<usize>,
}

fn set_lists(game: &Game) -> Result<&[Vec<usize>]> {
    match game.priorities() {
        Priorities::SetLevel(lists) => Ok(lists),
        _ => Err(Error::contract(
            "the seniority model needs set-level priority lists",
        )),
    }
}

impl SeniorityState {
    /// Initial state: seniority inside a queue follows job input order.
    pub fn from_profile(game: &Game, profile: &Profile) -> Result<Self> {
        set_lists(game)?;
        game.check_profile(profile)?;
        let mut queues = vec![vec![Vec::new(); game.sets().len()]; game.m()];
        for j in 0..game.n() {
            queues[profile.machine_of(j)][game.set_of(j)].push(j);
        }
        Ok(SeniorityState {
            queues,
            machine_of: profile.as_slice().to_vec(),
        })
    }

    pub fn profile(&self) -> Profile {
        Profile::new(self.machine_of.clone())
    }

    pub fn machine_of(&self, job: usize) -> usize {
        self.machine_of[job]
    }

    pub fn queue(&self, machine: usize, set: usize) -> &[usize] {
        &self.queues[machine][set]
    }

    /// Processing order on `machine`.
    pub fn machine_order(&self, game: &Game, machine: usize) -> Result<Vec<usize>> {
        let lists = set_lists(game)?;
        Ok(lists[machine]
            .iter()
            .flat_map(|&l| self.queues[machine][l].iter().copied())
            .collect())
    }

    pub fn completion_times(&self, game: &Game) -> Result<Vec<Rational>> {
        let mut completion = vec![zero(); game.n()];
        for i in 0..game.m() {
            let mut work = zero();
            for j in self.machine_order(game, i)? {
                work += game.length(j);
                completion[j] = work / game.rate(i);
            }
        }
        Ok(completion)
    }

    pub fn ranks(&self, game: &Game) -> Result<RankVector> {
        Ok(crate::schedule::rank_vector(
            game,
            &self.completion_times(game)?,
        ))
    }

    fn outcome_of(&self, game: &Game, job: usize) -> Result<Outcome> {
        let completion = self.completion_times(game)?;
        let twice = twice_ranks(game.sets(), &completion);
        Ok(Outcome::new(twice[job], completion[job]))
    }

    /// The job's (rank, completion) after moving to `target` under the
    /// seniority rule; the current outcome when `target` is its machine.
    pub fn outcome(&self, game: &Game, job: usize, target: usize) -> Result<Outcome> {
        if target == self.machine_of[job] {
            return self.outcome_of(game, job);
        }
        seniority_deviate(game, self, job, target)?.outcome_of(game, job)
    }

    pub fn best_responses(&self, game: &Game, job: usize) -> Result<Vec<usize>> {
        let outcomes = (0..game.m())
            .map(|i| self.outcome(game, job, i))
            .collect::<Result<Vec<_>>>()?;
        let best = *outcomes.iter().min().expect("at least one machine");
        Ok((0..game.m()).filter(|&i| outcomes[i] == best).collect())
    }

    /// First suboptimal job in input order with its lowest-index best response.
    pub fn first_improvement(&self, game: &Game) -> Result<Option<(usize, usize)>> {
        for j in 0..game.n() {
            let br = self.best_responses(game, j)?;
            if !br.contains(&self.machine_of[j]) {
                return Ok(Some((j, br[0])));
            }
        }
        Ok(None)
    }

    pub fn is_stable(&self, game: &Game) -> Result<bool> {
        Ok(self.first_improvement(game)?.is_none())
    }
}

/// Moves `job` to `target`, placing it behind the jobs of its set already
/// there. Every other queue keeps its order.
pub fn seniority_deviate(
    game: &Game,
    state: &SeniorityState,
    job: usize,
    target: usize,
) -> Result<SeniorityState> {
    if job >= game.n() || target >= game.m() {
        return Err(Error::validation(
            "deviation",
            "job or machine index out of range",
        ));
    }
    let from = state.machine_of[job];
    if from == target {
        return Err(Error::contract(format!(
            "job {:?} already runs on machine {:?}",
            game.jobs()[job].id,
            game.machines()[target].id
        )));
    }
    let set = game.set_of(job);
    let mut next = state.clone();
    next.queues[from][set].retain(|&k| k != job);
    next.queues[target][set].push(job);
    next.machine_of[job] = target;
    Ok(next)
}

/// Best-response dynamics in the seniority model. The deviator is the first
/// suboptimal job in input order and moves to its lowest-index best response.
pub fn seniority_brd(game: &Game, initial: &SeniorityState, max_steps: usize) -> Result<BrTrace> {
    set_lists(game)?;
    let mut state = initial.clone();
    let mut steps = Vec::new();
    let mut seen = HashSet::new();
    seen.insert(state.clone());
    loop {
        let Some((job, target)) = state.first_improvement(game)? else {
            return Ok(BrTrace::new(
                initial.profile(),
                steps,
                Termination::ReachedNe,
            ));
        };
        if steps.len() >= max_steps {
            return Ok(BrTrace::new(
                initial.profile(),
                steps,
                Termination::BudgetExhausted,
            ));
        }
        state = seniority_deviate(game, &state, job, target)?;
        steps.push(BrStep {
            deviator: job,
            target,
            profile: state.profile(),
        });
        if !seen.insert(state.clone()) {
            return Ok(BrTrace::new(
                initial.profile(),
                steps,
                Termination::EnteredCycle,
            ));
        }
    }
}

/// Every state a seniority trace visits, starting with `initial`.
pub fn replay_seniority(
    game: &Game,
    initial: &SeniorityState,
    trace: &BrTrace,
) -> Result<Vec<SeniorityState>> {
    let mut states = vec![initial.clone()];
    for step in &trace.steps {
        let next = seniority_deviate(
            game,
            states.last().expect("nonempty"),
            step.deviator,
            step.target,
        )?;
        states.push(next);
    }
    Ok(states)
}

/// The engineering step budget `(Σ p_j)²` for integer-length instances.
pub fn seniority_budget(game: &Game) -> usize {
    let total = game.total_length().ceil().to_integer().max(1) as usize;
    total.saturating_mul(total)
}
