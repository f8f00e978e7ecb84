//! Greedy list-scheduling constructors and the closed-form stability tests for
//! their unit-job outputs.

use crate::error::{Error, Result};
use crate::game::{Game, Profile};
use crate::rational::{one, zero, Rational};
use crate::schedule::Analysis;

/// How a step resolves several machines attaining the minimum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub enum TieBreak {
    #[default]
    LowestIndex,
    /// Machine chosen at each tied step, in order. The sequence must be used
    /// up exactly.
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Greedy {
    /// argmin load (identical machines).
    Load,
    /// argmin (load + 1) / rate (unit jobs).
    NextCompletion,
}

impl Greedy {
    fn check(self, game: &Game) -> Result<()> {
        match self {
            Greedy::Load if !game.identical_rates() => Err(Error::contract(
                "the load-greedy algorithm needs identical machine rates",
            )),
            Greedy::NextCompletion if !game.all_unit() => Err(Error::contract(
                "the completion-greedy algorithm needs unit-length jobs",
            )),
            _ => Ok(()),
        }
    }
}

/// A run of the greedy loop that can be advanced one assignment at a time.
#[derive(Debug, Clone)]
pub(crate) struct GreedyState<'g> {
    game: &'g Game,
    kind: Greedy,
    loads: Vec<Rational>,
    cursor: Vec<usize>,
    assigned: Vec<Option<usize>>,
    remaining: usize,
    /// Assignments performed so far.
    pub steps: usize,
}

impl<'g> GreedyState<'g> {
    pub fn new(game: &'g Game, kind: Greedy) -> Result<Self> {
        kind.check(game)?;
        Ok(GreedyState {
            game,
            kind,
            loads: vec![zero(); game.m()],
            cursor: vec![0; game.m()],
            assigned: vec![None; game.n()],
            remaining: game.n(),
            steps: 0,
        })
    }

    pub fn done(&self) -> bool {
        self.remaining == 0
    }

    fn key(&self, i: usize) -> Rational {
        match self.kind {
            Greedy::Load => self.loads[i],
            Greedy::NextCompletion => (self.loads[i] + one()) / self.game.rate(i),
        }
    }

    /// The argmin set of the next step, ascending.
    pub fn candidates(&self) -> Vec<usize> {
        let keys: Vec<Rational> = (0..self.game.m()).map(|i| self.key(i)).collect();
        let best = *keys.iter().min().expect("at least one machine");
        (0..self.game.m()).filter(|&i| keys[i] == best).collect()
    }

    /// The job `machine` would take next.
    pub fn next_job(&mut self, machine: usize) -> usize {
        let order = self.game.order(machine);
        while self.assigned[order[self.cursor[machine]]].is_some() {
            self.cursor[machine] += 1;
        }
        order[self.cursor[machine]]
    }

    /// Assigns the next job of `machine` to it and returns that job.
    pub fn step(&mut self, machine: usize) -> usize {
        let j = self.next_job(machine);
        self.assigned[j] = Some(machine);
        self.loads[machine] += self.game.length(j);
        self.remaining -= 1;
        self.steps += 1;
        j
    }

    pub fn machine_of(&self, job: usize) -> Option<usize> {
        self.assigned[job]
    }

    /// Jobs assigned so far, as a sorted list.
    pub fn assigned_set(&self) -> Vec<usize> {
        (0..self.game.n())
            .filter(|&j| self.assigned[j].is_some())
            .collect()
    }

    /// The profile; only meaningful once every job is assigned.
    pub fn profile(&self) -> Profile {
        Profile::new(
            self.assigned
                .iter()
                .map(|a| a.expect("greedy run incomplete"))
                .collect(),
        )
    }
}

fn run(game: &Game, kind: Greedy, tiebreak: &TieBreak) -> Result<Profile> {
    let mut state = GreedyState::new(game, kind)?;
    let mut decisions = match tiebreak {
        TieBreak::LowestIndex => None,
        TieBreak::Explicit(seq) => Some(seq.iter().copied()),
    };
    while !state.done() {
        let candidates = state.candidates();
        let machine = match (&mut decisions, candidates.len()) {
            (_, 1) | (None, _) => candidates[0],
            (Some(seq), _) => {
                let pick = seq.next().ok_or_else(|| {
                    Error::contract("explicit tie-break sequence ran out at a tied step")
                })?;
                if !candidates.contains(&pick) {
                    return Err(Error::contract(format!(
                        "tie-break chose machine {pick}, not among tied machines {candidates:?}"
                    )));
                }
                pick
            }
        };
        state.step(machine);
    }
    if let Some(mut seq) = decisions {
        if seq.next().is_some() {
            return Err(Error::contract(
                "explicit tie-break sequence has unused decisions",
            ));
        }
    }
    Ok(state.profile())
}

/// Least-loaded machine takes the first unassigned job of its list.
pub fn algorithm1(game: &Game, tiebreak: &TieBreak) -> Result<Profile> {
    run(game, Greedy::Load, tiebreak)
}

/// Machine with the earliest next completion takes the first unassigned job of
/// its list.
pub fn algorithm2(game: &Game, tiebreak: &TieBreak) -> Result<Profile> {
    run(game, Greedy::NextCompletion, tiebreak)
}

/// Every run of the algorithm over all tie resolutions, as (decision
/// sequence, profile) pairs in depth-first order. Exponential in the number of
/// ties.
pub fn enumerate_runs(game: &Game, kind: Greedy) -> Result<Vec<(Vec<usize>, Profile)>> {
    let mut out = Vec::new();
    let mut stack = vec![(GreedyState::new(game, kind)?, Vec::new())];
    while let Some((mut state, mut decisions)) = stack.pop() {
        loop {
            if state.done() {
                out.push((decisions, state.profile()));
                break;
            }
            let candidates = state.candidates();
            if candidates.len() > 1 {
                for &alt in candidates[1..].iter().rev() {
                    let mut branch = state.clone();
                    branch.step(alt);
                    let mut d = decisions.clone();
                    d.push(alt);
                    stack.push((branch, d));
                }
                decisions.push(candidates[0]);
            }
            state.step(candidates[0]);
        }
    }
    Ok(out)
}

/// No job can lower its completion time by moving.
pub fn check_cost_stable(game: &Game, profile: &Profile) -> Result<bool> {
    Ok(Analysis::new(game, profile.clone())?.is_cost_stable())
}

/// For a unit-job profile stable against cost-reducing moves, a job that is
/// last on its machine together with a machine where it would overtake a job
/// finishing at the same time. `None` exactly when the profile is a NE.
pub fn rank_decreasing_witness(game: &Game, profile: &Profile) -> Result<Option<(usize, usize)>> {
    if !game.all_unit() {
        return Err(Error::contract(
            "rank-decreasing witness needs unit-length jobs",
        ));
    }
    let analysis = Analysis::new(game, profile.clone())?;
    if cfg!(debug_assertions) && !analysis.is_cost_stable() {
        return Err(Error::contract("profile admits a cost-reducing deviation"));
    }
    Ok(witness_unchecked(&analysis))
}

pub(crate) fn witness_unchecked(analysis: &Analysis<'_>) -> Option<(usize, usize)> {
    let game = analysis.game();
    let schedule = analysis.schedule();
    let mut lasts: Vec<usize> = schedule
        .machine_jobs
        .iter()
        .filter_map(|jobs| jobs.last().copied())
        .collect();
    lasts.sort_unstable();
    for j in lasts {
        let cj = schedule.completion[j];
        for (z, jobs) in schedule.machine_jobs.iter().enumerate() {
            if z == analysis.profile().machine_of(j) {
                continue;
            }
            if jobs
                .iter()
                .any(|&k| schedule.completion[k] == cj && game.precedes(z, j, k))
            {
                return Some((j, z));
            }
        }
    }
    None
}

/// The sets P, P₁, P₂ of a balanced unit-job schedule on identical machines
/// with `n = ℓ·m + c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitStabilityPartition {
    pub ell: usize,
    pub c: usize,
    /// Jobs finishing in slot ℓ+1.
    pub p: Vec<usize>,
    /// Jobs finishing in slot ℓ that are last on their machine.
    pub p1: Vec<usize>,
    /// Jobs finishing in slot ℓ that are not last.
    pub p2: Vec<usize>,
}

pub fn unit_partition(game: &Game, profile: &Profile) -> Result<UnitStabilityPartition> {
    if !game.all_unit() || !game.identical_rates() {
        return Err(Error::contract(
            "the P/P1/P2 partition needs unit jobs on identical machines",
        ));
    }
    let analysis = Analysis::new(game, profile.clone())?;
    let (n, m) = (game.n(), game.m());
    let (ell, c) = (n / m, n % m);
    let counts: Vec<usize> = analysis
        .schedule()
        .machine_jobs
        .iter()
        .map(Vec::len)
        .collect();
    let heavy = counts.iter().filter(|&&k| k == ell + 1).count();
    if counts.iter().any(|&k| k != ell && k != ell + 1) || heavy != c {
        return Err(Error::contract(format!(
            "loads {counts:?} are not a greedy balance of {n} jobs on {m} machines"
        )));
    }
    let mut part = UnitStabilityPartition {
        ell,
        c,
        p: Vec::new(),
        p1: Vec::new(),
        p2: Vec::new(),
    };
    for jobs in &analysis.schedule().machine_jobs {
        for (slot, &j) in jobs.iter().enumerate() {
            let last = slot + 1 == jobs.len();
            match slot + 1 {
                s if s == ell + 1 => part.p.push(j),
                s if s == ell && last => part.p1.push(j),
                s if s == ell => part.p2.push(j),
                _ => {}
            }
        }
    }
    part.p.sort_unstable();
    part.p1.sort_unstable();
    part.p2.sort_unstable();
    Ok(part)
}

/// The two-condition characterization on P, P₁ and P₂.
pub fn check_identical_unit_stability(game: &Game, profile: &Profile) -> Result<bool> {
    let part = unit_partition(game, profile)?;
    let heads = |set: &[usize], others: &[usize]| {
        set.iter().all(|&j| {
            let i = profile.machine_of(j);
            others.iter().all(|&k| k == j || game.precedes(i, j, k))
        })
    };
    Ok(heads(&part.p, &part.p) && heads(&part.p1, &part.p1) && heads(&part.p2, &part.p1))
}

/// The fast machine (rate 1) and the slow machine (rate r ≤ 1).
fn q2_machines(game: &Game) -> Result<(usize, usize)> {
    if game.m() != 2 || !game.all_unit() {
        return Err(Error::contract("needs unit jobs on exactly two machines"));
    }
    if game.rate(0) != one() || game.rate(1) > one() {
        return Err(Error::contract(
            "needs machine rates 1 and r <= 1, fast machine first",
        ));
    }
    Ok((0, 1))
}

/// The three-condition characterization for two related machines. At `r = 1`
/// completion times align across machines and the first condition no longer
/// implies stability, so equal rates use the identical-machine test.
pub fn check_q2_unit_stability(game: &Game, profile: &Profile) -> Result<bool> {
    let (fast, slow) = q2_machines(game)?;
    if game.rate(slow) == game.rate(fast) {
        return check_identical_unit_stability(game, profile);
    }
    let analysis = Analysis::new(game, profile.clone())?;
    if !analysis.is_cost_stable() {
        return Err(Error::contract("profile admits a cost-reducing deviation"));
    }
    let schedule = analysis.schedule();
    let l1 = schedule.loads[fast];
    let l2r = schedule.loads[slow] / game.rate(slow);
    let last = |i: usize| schedule.machine_jobs[i].last().copied();
    if l1 < l2r {
        return Ok(true);
    }
    if l1 == l2r {
        let (j1, j2) = (last(fast), last(slow));
        return Ok(match (j1, j2) {
            (Some(j1), Some(j2)) => game.precedes(fast, j1, j2) && game.precedes(slow, j2, j1),
            _ => true,
        });
    }
    let Some(j2) = last(slow) else {
        return Ok(true);
    };
    let c2 = schedule.completion[j2];
    Ok(schedule.machine_jobs[fast]
        .iter()
        .find(|&&k| schedule.completion[k] == c2)
        .is_none_or(|&k| game.precedes(fast, k, j2)))
}

/// Sufficient test used for rates where ties cannot occur: pairwise distinct
/// completion times plus cost stability imply a NE.
pub fn distinct_completion_sufficient(game: &Game, profile: &Profile) -> Result<bool> {
    let analysis = Analysis::new(game, profile.clone())?;
    let mut c = analysis.schedule().completion.clone();
    c.sort_unstable();
    let distinct = c.windows(2).all(|w| w[0] != w[1]);
    Ok(distinct && analysis.is_cost_stable())
}
