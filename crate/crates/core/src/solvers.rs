//! Polynomial-time equilibrium deciders and constructors.
//!
//! The two-machine unit-job deciders share one engine: the greedy algorithm is
//! simulated block by block (a block is `a + b` assignments for rates `1` and
//! `a/b`; a layer of two jobs on identical machines), branching wherever the
//! argmin is tied. The reachable sets of assigned jobs after `k` blocks form
//! the frontier Γ_k, which never has more than two members.

use crate::error::{Error, Result};
use crate::game::{Game, PriorityList, Profile};
use crate::greedy::{algorithm1, witness_unchecked, Greedy, GreedyState, TieBreak};
use crate::rational::Rational;
use crate::schedule::Analysis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    NeExists,
    NoNe,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub verdict: Verdict,
    /// A NE whenever `verdict` is [`Verdict::NeExists`].
    pub witness: Option<Profile>,
    /// Greedy assignments simulated, across all explored runs.
    pub steps: usize,
}

impl SolveResult {
    fn exists(game: &Game, witness: Profile, steps: usize) -> Result<Self> {
        if !Analysis::new(game, witness.clone())?.is_ne() {
            return Err(Error::Invariant(format!(
                "constructed profile {witness} is not an equilibrium"
            )));
        }
        Ok(SolveResult {
            verdict: Verdict::NeExists,
            witness: Some(witness),
            steps,
        })
    }

    fn none(steps: usize) -> Self {
        SolveResult {
            verdict: Verdict::NoNe,
            witness: None,
            steps,
        }
    }

    pub fn has_ne(&self) -> bool {
        self.verdict == Verdict::NeExists
    }
}

/// The list and its reverse.
pub fn make_inversed_policies(list: &PriorityList) -> (PriorityList, PriorityList) {
    (list.clone(), list.reversed())
}

/// Two identical machines whose lists are mutual reverses always have a NE:
/// the load-greedy schedule.
pub fn solve_inversed(game: &Game) -> Result<SolveResult> {
    if game.m() != 2 || !game.identical_rates() {
        return Err(Error::contract(
            "Inversed-Policies needs two identical machines",
        ));
    }
    let reversed: Vec<usize> = game.order(0).iter().rev().copied().collect();
    if game.order(1) != reversed.as_slice() {
        return Err(Error::contract(
            "the two priority lists are not reverses of each other",
        ));
    }
    let witness = algorithm1(game, &TieBreak::LowestIndex)?;
    SolveResult::exists(game, witness, game.n())
}

fn require_single_set(game: &Game) -> Result<()> {
    if game.sets().len() != 1 {
        return Err(Error::contract("needs every job in one competition set"));
    }
    Ok(())
}

fn require_unit_identical(game: &Game) -> Result<()> {
    if !game.all_unit() || !game.identical_rates() {
        return Err(Error::contract("needs unit jobs on identical machines"));
    }
    require_single_set(game)
}

/// Odd `n` on two identical machines: greedy for `n − 1` jobs, then the last
/// job joins the machine whose slot-ℓ job it does not outrank on M1.
fn odd_two_machine(game: &Game) -> Result<SolveResult> {
    let mut state = GreedyState::new(game, Greedy::Load)?;
    while state.steps + 1 < game.n() {
        let machine = state.candidates()[0];
        state.step(machine);
    }
    let ell = (game.n() - 1) / 2;
    let target = if ell == 0 {
        0
    } else {
        let slot = |i: usize| {
            let jobs: Vec<usize> = game
                .order(i)
                .iter()
                .copied()
                .filter(|&j| state.machine_of(j) == Some(i))
                .collect();
            jobs[ell - 1]
        };
        let (j1, j2) = (slot(0), slot(1));
        if game.precedes(0, j1, j2) {
            0
        } else {
            1
        }
    };
    state.step(target);
    let steps = state.steps;
    SolveResult::exists(game, state.profile(), steps)
}

/// Unit jobs, identical machines, one global list: a NE exists iff `m = 2` and
/// `n` is odd.
pub fn decide_global_unit(game: &Game) -> Result<SolveResult> {
    require_unit_identical(game)?;
    if !game.is_global() {
        return Err(Error::contract("needs a global priority list"));
    }
    if game.m() == 2 && game.n() % 2 == 1 {
        odd_two_machine(game)
    } else if game.m() == 1 || game.n() == 1 {
        // One machine, or one job alone on a machine, is trivially stable.
        SolveResult::exists(game, Profile::uniform(game.n(), 0), 0)
    } else {
        Ok(SolveResult::none(0))
    }
}

/// Two machines with rates in ratio `a/b ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoMachineRates {
    pub fast: usize,
    pub slow: usize,
    pub a: usize,
    pub b: usize,
}

impl TwoMachineRates {
    pub fn of(game: &Game) -> Result<Self> {
        if game.m() != 2 || !game.all_unit() {
            return Err(Error::contract("needs unit jobs on exactly two machines"));
        }
        require_single_set(game)?;
        let (fast, slow) = if game.rate(0) >= game.rate(1) {
            (0, 1)
        } else {
            (1, 0)
        };
        let r: Rational = game.rate(slow) / game.rate(fast);
        Ok(TwoMachineRates {
            fast,
            slow,
            a: *r.numer() as usize,
            b: *r.denom() as usize,
        })
    }

    pub fn block(&self) -> usize {
        self.a + self.b
    }
}

/// Γ_k: the reachable sets of jobs assigned in the first `k` blocks, each with
/// the machine assignment of one run reaching it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaFrontier {
    pub k: usize,
    pub members: Vec<FrontierMember>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontierMember {
    /// Assigned jobs, ascending.
    pub jobs: Vec<usize>,
    /// Machine of each job, `None` when unassigned.
    pub assignment: Vec<Option<usize>>,
}

/// Runs `count` assignments from each state, branching at every tie.
fn advance<'g>(
    states: Vec<GreedyState<'g>>,
    count: usize,
    steps: &mut usize,
) -> Vec<GreedyState<'g>> {
    let mut out = Vec::new();
    for start in states {
        let target = start.steps + count;
        let mut stack = vec![start];
        while let Some(mut state) = stack.pop() {
            while state.steps < target && !state.done() {
                let candidates = state.candidates();
                for &alt in candidates[1..].iter().rev() {
                    let mut branch = state.clone();
                    branch.step(alt);
                    *steps += 1;
                    stack.push(branch);
                }
                state.step(candidates[0]);
                *steps += 1;
            }
            out.push(state);
        }
    }
    out
}

fn dedup_by_set(states: Vec<GreedyState<'_>>) -> Vec<GreedyState<'_>> {
    let mut out: Vec<GreedyState<'_>> = Vec::new();
    for s in states {
        if !out.iter().any(|t| t.assigned_set() == s.assigned_set()) {
            out.push(s);
        }
    }
    out
}

fn check_frontier(states: &[GreedyState<'_>], k: usize) -> Result<()> {
    match states {
        [_] => Ok(()),
        [x, y] => {
            let (sx, sy) = (x.assigned_set(), y.assigned_set());
            let only_x = sx.iter().filter(|j| !sy.contains(j)).count();
            let only_y = sy.iter().filter(|j| !sx.contains(j)).count();
            if only_x == 1 && only_y == 1 {
                Ok(())
            } else {
                Err(Error::Invariant(format!(
                    "frontier after block {k} has members differing in {} jobs",
                    only_x + only_y
                )))
            }
        }
        _ => Err(Error::Invariant(format!(
            "frontier after block {k} has {} members",
            states.len()
        ))),
    }
}

fn frontier_states<'g>(
    game: &'g Game,
    k: usize,
    steps: &mut usize,
) -> Result<Vec<GreedyState<'g>>> {
    let rates = TwoMachineRates::of(game)?;
    if k * rates.block() > game.n() {
        return Err(Error::contract(format!(
            "block {k} exceeds the {} jobs of the game",
            game.n()
        )));
    }
    let mut states = vec![GreedyState::new(game, Greedy::NextCompletion)?];
    for block in 1..=k {
        states = dedup_by_set(advance(states, rates.block(), steps));
        check_frontier(&states, block)?;
    }
    Ok(states)
}

/// Γ_k for unit jobs on two machines with rational rate ratio.
pub fn gamma_frontier(game: &Game, k: usize) -> Result<GammaFrontier> {
    let mut steps = 0;
    let states = frontier_states(game, k, &mut steps)?;
    Ok(GammaFrontier {
        k,
        members: states
            .iter()
            .map(|s| FrontierMember {
                jobs: s.assigned_set(),
                assignment: (0..game.n()).map(|j| s.machine_of(j)).collect(),
            })
            .collect(),
    })
}

/// Completes every frontier member over all tie branches and returns the
/// first equilibrium found, checked with the last-job characterization.
fn search_completions(
    game: &Game,
    start_block: usize,
    steps: &mut usize,
) -> Result<Option<Profile>> {
    let states = frontier_states(game, start_block, steps)?;
    let remaining = game.n() - states[0].steps;
    for state in advance(states, remaining, steps) {
        let profile = state.profile();
        let analysis = Analysis::new_unchecked(game, profile);
        if witness_unchecked(&analysis).is_none() {
            return Ok(Some(analysis.into_profile()));
        }
    }
    Ok(None)
}

/// Unit jobs on two related machines with rates `1` and `a/b`, any lists.
pub fn solve_q2_unit(game: &Game) -> Result<SolveResult> {
    let rates = TwoMachineRates::of(game)?;
    let block = rates.block();
    let (ell, c) = (game.n() / block, game.n() % block);
    let mut steps = 0;
    if c != 0 {
        let mut state = GreedyState::new(game, Greedy::NextCompletion)?;
        while !state.done() {
            let machine = state.candidates()[0];
            state.step(machine);
        }
        steps += state.steps;
        let default_run = state.profile();
        if Analysis::new_unchecked(game, default_run.clone()).is_ne() {
            return SolveResult::exists(game, default_run, steps);
        }
        // The tie of the final full block, or of the partial block when it
        // reaches the tied step, decides stability.
        return match search_completions(game, ell, &mut steps)? {
            Some(p) => SolveResult::exists(game, p, steps),
            None => Err(Error::Invariant(
                "no equilibrium among the greedy completions although c != 0".into(),
            )),
        };
    }
    match search_completions(game, ell - 1, &mut steps)? {
        Some(p) => SolveResult::exists(game, p, steps),
        None => Ok(SolveResult::none(steps)),
    }
}

/// Unit jobs on two identical machines with machine-dependent lists.
pub fn solve_p2_unit(game: &Game) -> Result<SolveResult> {
    require_unit_identical(game)?;
    if game.m() != 2 {
        return Err(Error::contract("needs exactly two machines"));
    }
    if game.n() % 2 == 1 {
        odd_two_machine(game)
    } else {
        solve_q2_unit(game)
    }
}

/// Unit jobs, rates `1` and `a/b`, one global list: a NE exists iff
/// `n mod (a + b) ≠ 0`.
pub fn decide_global_q2(game: &Game) -> Result<SolveResult> {
    let rates = TwoMachineRates::of(game)?;
    if !game.is_global() {
        return Err(Error::contract("needs a global priority list"));
    }
    if game.n().is_multiple_of(rates.block()) {
        Ok(SolveResult::none(0))
    } else {
        solve_q2_unit(game)
    }
}
