//! Schedule semantics: completion times, ranks, preferences, best responses and
//! the equilibrium test.
//!
//! Ranks are handled internally as twice their value (`2·less + equal + 1`) so
//! they stay integral; [`Outcome`] orders a job's situation lexicographically by
//! (rank, completion time), which is exactly the preference relation.

use crate::error::{Error, Result};
use crate::game::{Game, Profile};
use crate::rational::{half_rank, zero, Rational};

/// The schedule induced by a profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleView {
    /// Jobs on each machine in processing order.
    pub machine_jobs: Vec<Vec<usize>>,
    /// Work processed on the job's machine up to and including the job.
    pub prefix_work: Vec<Rational>,
    pub completion: Vec<Rational>,
    pub loads: Vec<Rational>,
}

impl ScheduleView {
    /// Jobs processed before or with `job` on its machine (the job included).
    pub fn delay_set(&self, job: usize) -> Vec<usize> {
        self.machine_jobs
            .iter()
            .find_map(|jobs| {
                jobs.iter()
                    .position(|&k| k == job)
                    .map(|p| jobs[..=p].to_vec())
            })
            .unwrap_or_default()
    }

    pub fn makespan(&self) -> Rational {
        self.completion.iter().copied().max().unwrap_or_else(zero)
    }
}

pub fn build_schedule(game: &Game, profile: &Profile) -> Result<ScheduleView> {
    game.check_profile(profile)?;
    Ok(schedule_unchecked(game, profile))
}

pub(crate) fn schedule_unchecked(game: &Game, profile: &Profile) -> ScheduleView {
    let n = game.n();
    let mut machine_jobs = vec![Vec::new(); game.m()];
    let mut prefix_work = vec![zero(); n];
    let mut completion = vec![zero(); n];
    let mut loads = vec![zero(); game.m()];
    for (i, jobs) in machine_jobs.iter_mut().enumerate() {
        let rate = game.rate(i);
        let mut work = zero();
        for &j in game.order(i) {
            if profile.machine_of(j) == i {
                work += game.length(j);
                prefix_work[j] = work;
                completion[j] = work / rate;
                jobs.push(j);
            }
        }
        loads[i] = work;
    }
    ScheduleView {
        machine_jobs,
        prefix_work,
        completion,
        loads,
    }
}

/// Per-job ranks, each within the job's competition set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankVector(Vec<Rational>);

impl RankVector {
    pub fn get(&self, job: usize) -> Rational {
        self.0[job]
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }
}

/// Twice the average-tie rank of every job within its set.
pub(crate) fn twice_ranks(sets: &[Vec<usize>], completion: &[Rational]) -> Vec<u64> {
    let mut twice = vec![0u64; completion.len()];
    let mut members: Vec<usize> = Vec::new();
    for set in sets {
        members.clear();
        members.extend_from_slice(set);
        members.sort_by(|&a, &b| completion[a].cmp(&completion[b]));
        let mut start = 0;
        while start < members.len() {
            let c = completion[members[start]];
            let mut end = start + 1;
            while end < members.len() && completion[members[end]] == c {
                end += 1;
            }
            for &j in &members[start..end] {
                twice[j] = (start + end + 1) as u64;
            }
            start = end;
        }
    }
    twice
}

pub fn ranks(game: &Game, profile: &Profile) -> Result<RankVector> {
    let schedule = build_schedule(game, profile)?;
    Ok(rank_vector(game, &schedule.completion))
}

/// Ranks for an arbitrary completion vector under the game's competition sets.
pub fn rank_vector(game: &Game, completion: &[Rational]) -> RankVector {
    RankVector(
        twice_ranks(game.sets(), completion)
            .into_iter()
            .map(half_rank)
            .collect(),
    )
}

/// A job's situation. The derived order is the preference order: smaller is
/// better, comparing rank first and completion time second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome {
    twice_rank: u64,
    completion: Rational,
}

impl Outcome {
    pub(crate) fn new(twice_rank: u64, completion: Rational) -> Self {
        Outcome {
            twice_rank,
            completion,
        }
    }

    pub fn rank(&self) -> Rational {
        half_rank(self.twice_rank)
    }

    pub fn completion(&self) -> Rational {
        self.completion
    }
}

/// A beneficial unilateral move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Deviation {
    pub job: usize,
    pub target: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeCheck {
    Stable,
    /// The first suboptimal job in input order, moving to its lowest-index best
    /// response.
    Unstable(Deviation),
}

impl NeCheck {
    pub fn is_ne(&self) -> bool {
        matches!(self, NeCheck::Stable)
    }

    pub fn witness(&self) -> Option<Deviation> {
        match self {
            NeCheck::Stable => None,
            NeCheck::Unstable(d) => Some(*d),
        }
    }
}

/// A profile together with its schedule and ranks, answering deviation queries
/// in O(n) each without rebuilding the schedule.
#[derive(Debug, Clone)]
pub struct Analysis<'g> {
    game: &'g Game,
    profile: Profile,
    schedule: ScheduleView,
    twice: Vec<u64>,
}

impl<'g> Analysis<'g> {
    pub fn new(game: &'g Game, profile: Profile) -> Result<Self> {
        game.check_profile(&profile)?;
        Ok(Self::new_unchecked(game, profile))
    }

    pub(crate) fn new_unchecked(game: &'g Game, profile: Profile) -> Self {
        let schedule = schedule_unchecked(game, &profile);
        let twice = twice_ranks(game.sets(), &schedule.completion);
        Analysis {
            game,
            profile,
            schedule,
            twice,
        }
    }

    pub fn game(&self) -> &'g Game {
        self.game
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn into_profile(self) -> Profile {
        self.profile
    }

    pub fn schedule(&self) -> &ScheduleView {
        &self.schedule
    }

    pub fn rank(&self, job: usize) -> Rational {
        half_rank(self.twice[job])
    }

    pub fn ranks(&self) -> RankVector {
        RankVector(self.twice.iter().map(|&t| half_rank(t)).collect())
    }

    pub fn makespan(&self) -> Rational {
        self.schedule.makespan()
    }

    pub fn current(&self, job: usize) -> Outcome {
        Outcome::new(self.twice[job], self.schedule.completion[job])
    }

    /// What `job` would experience on `target`, everyone else fixed.
    pub fn outcome(&self, job: usize, target: usize) -> Outcome {
        let from = self.profile.machine_of(job);
        if target == from {
            return self.current(job);
        }
        let game = self.game;
        let length = game.length(job);
        let pos_to = game.position(target, job);
        let pos_from = game.position(from, job);

        let mut work = length;
        for &k in &self.schedule.machine_jobs[target] {
            if game.position(target, k) > pos_to {
                break;
            }
            work += game.length(k);
        }
        let rate_to = game.rate(target);
        let c = work / rate_to;
        let gain = length / rate_to;
        let loss = length / game.rate(from);

        let mut less = 0u64;
        let mut equal = 1u64;
        for &k in &game.sets()[game.set_of(job)] {
            if k == job {
                continue;
            }
            let on = self.profile.machine_of(k);
            let mut ck = self.schedule.completion[k];
            if on == from && game.position(from, k) > pos_from {
                ck -= loss;
            } else if on == target && game.position(target, k) > pos_to {
                ck += gain;
            }
            match ck.cmp(&c) {
                std::cmp::Ordering::Less => less += 1,
                std::cmp::Ordering::Equal => equal += 1,
                std::cmp::Ordering::Greater => {}
            }
        }
        Outcome::new(2 * less + equal + 1, c)
    }

    /// Every machine minimizing the job's outcome, ascending.
    pub fn best_responses(&self, job: usize) -> Vec<usize> {
        let outcomes: Vec<Outcome> = (0..self.game.m()).map(|i| self.outcome(job, i)).collect();
        let best = *outcomes.iter().min().expect("at least one machine");
        (0..self.game.m())
            .filter(|&i| outcomes[i] == best)
            .collect()
    }

    /// The lowest-index best response when the job's current machine is not
    /// among its best responses.
    pub fn improving_target(&self, job: usize) -> Option<usize> {
        let current = self.current(job);
        let mut best: Option<(Outcome, usize)> = None;
        for i in 0..self.game.m() {
            if i == self.profile.machine_of(job) {
                continue;
            }
            let o = self.outcome(job, i);
            if o < current && best.is_none_or(|(b, _)| o < b) {
                best = Some((o, i));
            }
        }
        best.map(|(_, i)| i)
    }

    pub fn is_suboptimal(&self, job: usize) -> bool {
        let current = self.current(job);
        (0..self.game.m())
            .filter(|&i| i != self.profile.machine_of(job))
            .any(|i| self.outcome(job, i) < current)
    }

    /// Sub(s): jobs with a beneficial deviation, ascending.
    pub fn suboptimal_jobs(&self) -> Vec<usize> {
        (0..self.game.n())
            .filter(|&j| self.is_suboptimal(j))
            .collect()
    }

    pub fn check(&self) -> NeCheck {
        for job in 0..self.game.n() {
            if let Some(target) = self.improving_target(job) {
                return NeCheck::Unstable(Deviation { job, target });
            }
        }
        NeCheck::Stable
    }

    pub fn is_ne(&self) -> bool {
        (0..self.game.n()).all(|j| !self.is_suboptimal(j))
    }

    /// True when no job can lower its completion time by moving, ignoring ranks.
    pub fn is_cost_stable(&self) -> bool {
        (0..self.game.n()).all(|j| {
            let c = self.schedule.completion[j];
            (0..self.game.m()).all(|i| self.outcome(j, i).completion >= c)
        })
    }
}

/// True iff `job` strictly prefers `alternative` to `current`. The profiles may
/// differ only in the strategy of `job`.
pub fn prefers(game: &Game, job: usize, current: &Profile, alternative: &Profile) -> Result<bool> {
    game.check_profile(current)?;
    game.check_profile(alternative)?;
    if job >= game.n() {
        return Err(Error::validation(
            "job",
            format!("job index {job} out of range"),
        ));
    }
    if let Some(other) = current
        .differing_jobs(alternative)
        .into_iter()
        .find(|&k| k != job)
    {
        return Err(Error::contract(format!(
            "profiles also differ in the strategy of job {:?}",
            game.jobs()[other].id
        )));
    }
    Ok(outcome_by_rebuild(game, alternative, job) < outcome_by_rebuild(game, current, job))
}

pub fn best_responses(game: &Game, profile: &Profile, job: usize) -> Result<Vec<usize>> {
    if job >= game.n() {
        return Err(Error::validation(
            "job",
            format!("job index {job} out of range"),
        ));
    }
    Ok(Analysis::new(game, profile.clone())?.best_responses(job))
}

pub fn is_ne(game: &Game, profile: &Profile) -> Result<NeCheck> {
    Ok(Analysis::new(game, profile.clone())?.check())
}

pub fn makespan(game: &Game, profile: &Profile) -> Result<Rational> {
    Ok(build_schedule(game, profile)?.makespan())
}

/// Reference evaluation: rebuilds the whole schedule and rank vector. Used to
/// cross-check the incremental path.
pub fn outcome_by_rebuild(game: &Game, profile: &Profile, job: usize) -> Outcome {
    let schedule = schedule_unchecked(game, profile);
    let twice = twice_ranks(game.sets(), &schedule.completion);
    Outcome::new(twice[job], schedule.completion[job])
}

/// Reference equilibrium test built on [`outcome_by_rebuild`].
pub fn is_ne_by_rebuild(game: &Game, profile: &Profile) -> bool {
    (0..game.n()).all(|j| {
        let here = outcome_by_rebuild(game, profile, j);
        (0..game.m()).all(|i| outcome_by_rebuild(game, &profile.with_move(j, i), j) >= here)
    })
}
