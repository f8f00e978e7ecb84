//! Game model: jobs, machines, priority lists, competition structure and profiles.

use std::collections::HashMap;
use std::fmt;

use crate::competition::CompetitionStructure;
use crate::error::{Error, Result};
use crate::rational::{is_positive, one, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Job {
    pub id: String,
    pub length: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Machine {
    pub id: String,
    /// Work processed per time unit.
    pub rate: Rational,
}

/// A processing order over job indices. A valid list is a permutation of
/// `0..n` for the game it belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PriorityList(Vec<usize>);

impl PriorityList {
    pub fn new(order: Vec<usize>) -> Self {
        PriorityList(order)
    }

    pub fn identity(n: usize) -> Self {
        PriorityList((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reversed(&self) -> Self {
        PriorityList(self.0.iter().rev().copied().collect())
    }

    /// Checks that the list is a permutation of `0..n`. The error message names
    /// the first offending job index.
    pub fn check_permutation(&self, n: usize) -> std::result::Result<(), String> {
        let mut seen = vec![false; n];
        for &j in &self.0 {
            if j >= n {
                return Err(format!("job index {j} out of range"));
            }
            if seen[j] {
                return Err(format!("job index {j} listed twice"));
            }
            seen[j] = true;
        }
        match seen.iter().position(|s| !s) {
            Some(missing) => Err(format!("job index {missing} missing")),
            None => Ok(()),
        }
    }
}

/// How machines order the jobs they process.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Priorities {
    /// Every machine uses the same list.
    Global(PriorityList),
    /// One list per machine, in machine order.
    PerMachine(Vec<PriorityList>),
    /// One permutation of competition-set indices per machine. Within a set the
    /// initial order is job input order; the seniority model evolves it.
    SetLevel(Vec<Vec<usize>>),
}

/// A strategy profile: the machine index chosen by each job, indexed by job.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Profile(Vec<usize>);

impl Profile {
    pub fn new(assignment: Vec<usize>) -> Self {
        Profile(assignment)
    }

    /// All jobs on one machine.
    pub fn uniform(n: usize, machine: usize) -> Self {
        Profile(vec![machine; n])
    }

    pub fn machine_of(&self, job: usize) -> usize {
        self.0[job]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn with_move(&self, job: usize, target: usize) -> Profile {
        let mut next = self.0.clone();
        next[job] = target;
        Profile(next)
    }

    pub fn set(&mut self, job: usize, machine: usize) {
        self.0[job] = machine;
    }

    /// Base-`m` index with job 0 as the most significant digit, so index order
    /// equals lexicographic order of the digit strings.
    pub fn index(&self, m: usize) -> u64 {
        self.0
            .iter()
            .fold(0u64, |acc, &d| acc * m as u64 + d as u64)
    }

    pub fn from_index(mut index: u64, n: usize, m: usize) -> Profile {
        let mut digits = vec![0usize; n];
        for slot in digits.iter_mut().rev() {
            *slot = (index % m as u64) as usize;
            index /= m as u64;
        }
        Profile(digits)
    }

    /// One base-`m` digit per job, job order = input order. Digits beyond 9 use
    /// lowercase letters.
    pub fn digit_string(&self) -> String {
        self.0
            .iter()
            .map(|&d| std::char::from_digit(d as u32, 36).unwrap_or('?'))
            .collect()
    }

    /// Jobs whose machine differs between the two profiles.
    pub fn differing_jobs(&self, other: &Profile) -> Vec<usize> {
        self.0
            .iter()
            .zip(&other.0)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(j, _)| j)
            .collect()
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.digit_string())
    }
}

/// A validated game instance. Derived lookup tables (processing order and list
/// positions per machine, competition sets) are computed once at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    jobs: Vec<Job>,
    machines: Vec<Machine>,
    priorities: Priorities,
    competition: CompetitionStructure,
    order: Vec<Vec<usize>>,
    position: Vec<Vec<usize>>,
    set_of: Vec<usize>,
    sets: Vec<Vec<usize>>,
}

impl Game {
    pub fn new(
        jobs: Vec<Job>,
        machines: Vec<Machine>,
        priorities: Priorities,
        competition: CompetitionStructure,
    ) -> Result<Game> {
        let n = jobs.len();
        let m = machines.len();
        if n == 0 {
            return Err(Error::validation("jobs", "at least one job is required"));
        }
        if m == 0 {
            return Err(Error::validation(
                "machines",
                "at least one machine is required",
            ));
        }
        let mut ids = HashMap::new();
        for (j, job) in jobs.iter().enumerate() {
            if ids.insert(job.id.as_str(), j).is_some() {
                return Err(Error::validation(
                    format!("jobs[{j}].id"),
                    format!("duplicate job id {:?}", job.id),
                ));
            }
            if !is_positive(&job.length) {
                return Err(Error::validation(
                    format!("jobs[{j}].length"),
                    format!("length of {:?} must be positive", job.id),
                ));
            }
        }
        let mut mids = HashMap::new();
        for (i, machine) in machines.iter().enumerate() {
            if mids.insert(machine.id.as_str(), i).is_some() {
                return Err(Error::validation(
                    format!("machines[{i}].id"),
                    format!("duplicate machine id {:?}", machine.id),
                ));
            }
            if !is_positive(&machine.rate) {
                return Err(Error::validation(
                    format!("machines[{i}].rate"),
                    format!("rate of {:?} must be positive", machine.id),
                ));
            }
        }

        let sets = competition.resolve(n)?;
        let mut set_of = vec![0; n];
        for (l, set) in sets.iter().enumerate() {
            for &j in set {
                set_of[j] = l;
            }
        }

        let order: Vec<Vec<usize>> = match &priorities {
            Priorities::Global(list) => {
                list.check_permutation(n)
                    .map_err(|e| Error::validation("priorities.list", describe(&jobs, e)))?;
                vec![list.as_slice().to_vec(); m]
            }
            Priorities::PerMachine(lists) => {
                if lists.len() != m {
                    return Err(Error::validation(
                        "priorities.lists",
                        format!(
                            "expected {m} lists (one per machine), found {}",
                            lists.len()
                        ),
                    ));
                }
                let mut order = Vec::with_capacity(m);
                for (i, list) in lists.iter().enumerate() {
                    list.check_permutation(n).map_err(|e| {
                        Error::validation(format!("priorities.lists[{i}]"), describe(&jobs, e))
                    })?;
                    order.push(list.as_slice().to_vec());
                }
                order
            }
            Priorities::SetLevel(lists) => {
                if lists.len() != m {
                    return Err(Error::validation(
                        "priorities.lists",
                        format!("expected {m} set-level lists, found {}", lists.len()),
                    ));
                }
                let mut order = Vec::with_capacity(m);
                for (i, list) in lists.iter().enumerate() {
                    PriorityList::new(list.clone())
                        .check_permutation(sets.len())
                        .map_err(|e| {
                            Error::validation(
                                format!("priorities.lists[{i}]"),
                                e.replace("job index", "set index"),
                            )
                        })?;
                    order.push(list.iter().flat_map(|&l| sets[l].iter().copied()).collect());
                }
                order
            }
        };
        let position = order
            .iter()
            .map(|list| {
                let mut pos = vec![0; n];
                for (p, &j) in list.iter().enumerate() {
                    pos[j] = p;
                }
                pos
            })
            .collect();

        Ok(Game {
            jobs,
            machines,
            priorities,
            competition,
            order,
            position,
            set_of,
            sets,
        })
    }

    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn m(&self) -> usize {
        self.machines.len()
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn machines(&self) -> &[Machine] {
        &self.machines
    }

    pub fn length(&self, job: usize) -> Rational {
        self.jobs[job].length
    }

    pub fn rate(&self, machine: usize) -> Rational {
        self.machines[machine].rate
    }

    pub fn priorities(&self) -> &Priorities {
        &self.priorities
    }

    pub fn competition(&self) -> &CompetitionStructure {
        &self.competition
    }

    pub fn job_index(&self, id: &str) -> Option<usize> {
        self.jobs.iter().position(|j| j.id == id)
    }

    pub fn machine_index(&self, id: &str) -> Option<usize> {
        self.machines.iter().position(|m| m.id == id)
    }

    /// Jobs in processing order on `machine` (job-level expansion for
    /// set-level lists).
    pub fn order(&self, machine: usize) -> &[usize] {
        &self.order[machine]
    }

    /// Zero-based position of `job` in the list of `machine`.
    pub fn position(&self, machine: usize, job: usize) -> usize {
        self.position[machine][job]
    }

    /// `a` is processed before `b` on `machine`.
    pub fn precedes(&self, machine: usize, a: usize, b: usize) -> bool {
        self.position[machine][a] < self.position[machine][b]
    }

    /// The shared list when all machines use the same order, regardless of how
    /// the priorities were declared.
    pub fn global_list(&self) -> Option<&[usize]> {
        let first = &self.order[0];
        self.order[1..]
            .iter()
            .all(|o| o == first)
            .then_some(first.as_slice())
    }

    pub fn is_global(&self) -> bool {
        self.global_list().is_some()
    }

    pub fn is_set_level(&self) -> bool {
        matches!(self.priorities, Priorities::SetLevel(_))
    }

    pub fn all_unit(&self) -> bool {
        self.jobs.iter().all(|j| j.length == one())
    }

    pub fn identical_rates(&self) -> bool {
        self.machines
            .iter()
            .all(|m| m.rate == self.machines[0].rate)
    }

    pub fn total_length(&self) -> Rational {
        self.jobs.iter().map(|j| j.length).sum()
    }

    pub fn set_of(&self, job: usize) -> usize {
        self.set_of[job]
    }

    /// Competition sets as lists of job indices.
    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// The same game under a different competition structure. Set-level
    /// priorities are tied to the set partition and are expanded to job-level
    /// lists first.
    pub fn with_competition(&self, competition: CompetitionStructure) -> Result<Game> {
        let priorities = match &self.priorities {
            Priorities::SetLevel(_) => {
                Priorities::PerMachine(self.order.iter().cloned().map(PriorityList::new).collect())
            }
            other => other.clone(),
        };
        Game::new(
            self.jobs.clone(),
            self.machines.clone(),
            priorities,
            competition,
        )
    }

    /// `m^n` as an exact count.
    pub fn profile_count(&self) -> u128 {
        (self.m() as u128)
            .checked_pow(self.n() as u32)
            .unwrap_or(u128::MAX)
    }

    pub fn check_profile(&self, profile: &Profile) -> Result<()> {
        if profile.len() != self.n() {
            return Err(Error::validation(
                "assignment",
                format!(
                    "profile assigns {} jobs, game has {}",
                    profile.len(),
                    self.n()
                ),
            ));
        }
        for (j, &i) in profile.as_slice().iter().enumerate() {
            if i >= self.m() {
                return Err(Error::validation(
                    format!("assignment.{}", self.jobs[j].id),
                    format!("machine index {i} out of range"),
                ));
            }
        }
        Ok(())
    }

    /// Builds a profile from `(job id, machine id)` pairs; every job must be
    /// assigned exactly once.
    pub fn profile_from_ids<'a, I>(&self, pairs: I) -> Result<Profile>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut assignment = vec![usize::MAX; self.n()];
        for (job, machine) in pairs {
            let j = self.job_index(job).ok_or_else(|| {
                Error::validation(
                    format!("assignment.{job}"),
                    format!("unknown job id {job:?}"),
                )
            })?;
            let i = self.machine_index(machine).ok_or_else(|| {
                Error::validation(
                    format!("assignment.{job}"),
                    format!("unknown machine id {machine:?}"),
                )
            })?;
            if assignment[j] != usize::MAX {
                return Err(Error::validation(
                    format!("assignment.{job}"),
                    "job assigned twice",
                ));
            }
            assignment[j] = i;
        }
        if let Some(j) = assignment.iter().position(|&i| i == usize::MAX) {
            return Err(Error::validation(
                format!("assignment.{}", self.jobs[j].id),
                "job is not assigned",
            ));
        }
        Ok(Profile::new(assignment))
    }

    /// Machine index per job, from machine id lists: `groups[i]` holds the job
    /// ids placed on machine `i`.
    pub fn profile_from_groups(&self, groups: &[&[&str]]) -> Result<Profile> {
        let pairs: Vec<(&str, &str)> = groups
            .iter()
            .enumerate()
            .flat_map(|(i, jobs)| {
                let machine = self.machines[i].id.as_str();
                jobs.iter().map(move |j| (*j, machine))
            })
            .collect();
        self.profile_from_ids(pairs)
    }
}

fn describe(jobs: &[Job], message: String) -> String {
    // Replace a bare index with the job id where possible.
    if let Some(rest) = message.strip_prefix("job index ") {
        if let Some((idx, tail)) = rest.split_once(' ') {
            if let Ok(j) = idx.parse::<usize>() {
                if let Some(job) = jobs.get(j) {
                    return format!("job {:?} {tail}", job.id);
                }
            }
        }
    }
    message
}

/// Convenience constructor keyed by ids, used by the instance generators and
/// tests.
#[derive(Debug, Default, Clone)]
pub struct GameBuilder {
    jobs: Vec<Job>,
    machines: Vec<Machine>,
    global: Option<Vec<String>>,
    per_machine: Option<Vec<Vec<String>>>,
    set_level: Option<Vec<Vec<usize>>>,
    competition: Option<CompetitionSpec>,
}

#[derive(Debug, Clone)]
enum CompetitionSpec {
    Single,
    Singletons,
    Sets(Vec<Vec<String>>),
}

impl GameBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn job(mut self, id: impl Into<String>, length: Rational) -> Self {
        self.jobs.push(Job {
            id: id.into(),
            length,
        });
        self
    }

    pub fn machine(mut self, id: impl Into<String>, rate: Rational) -> Self {
        self.machines.push(Machine {
            id: id.into(),
            rate,
        });
        self
    }

    pub fn global<S: AsRef<str>>(mut self, ids: &[S]) -> Self {
        self.global = Some(ids.iter().map(|s| s.as_ref().to_string()).collect());
        self
    }

    /// Global list in job input order.
    pub fn global_input_order(mut self) -> Self {
        self.global = Some(self.jobs.iter().map(|j| j.id.clone()).collect());
        self
    }

    pub fn per_machine<S: AsRef<str>>(mut self, lists: &[Vec<S>]) -> Self {
        self.per_machine = Some(
            lists
                .iter()
                .map(|l| l.iter().map(|s| s.as_ref().to_string()).collect())
                .collect(),
        );
        self
    }

    pub fn set_level(mut self, lists: Vec<Vec<usize>>) -> Self {
        self.set_level = Some(lists);
        self
    }

    pub fn singletons(mut self) -> Self {
        self.competition = Some(CompetitionSpec::Singletons);
        self
    }

    pub fn single_set(mut self) -> Self {
        self.competition = Some(CompetitionSpec::Single);
        self
    }

    pub fn sets<S: AsRef<str>>(mut self, sets: &[Vec<S>]) -> Self {
        self.competition = Some(CompetitionSpec::Sets(
            sets.iter()
                .map(|s| s.iter().map(|x| x.as_ref().to_string()).collect())
                .collect(),
        ));
        self
    }

    pub fn build(self) -> Result<Game> {
        let index: HashMap<&str, usize> = self
            .jobs
            .iter()
            .enumerate()
            .map(|(j, job)| (job.id.as_str(), j))
            .collect();
        let resolve = |path: String, ids: &[String]| -> Result<Vec<usize>> {
            ids.iter()
                .map(|id| {
                    index.get(id.as_str()).copied().ok_or_else(|| {
                        Error::validation(path.clone(), format!("unknown job id {id:?}"))
                    })
                })
                .collect()
        };
        let competition = match &self.competition {
            None | Some(CompetitionSpec::Single) => CompetitionStructure::Single,
            Some(CompetitionSpec::Singletons) => CompetitionStructure::Singletons,
            Some(CompetitionSpec::Sets(sets)) => CompetitionStructure::Sets(
                sets.iter()
                    .enumerate()
                    .map(|(l, s)| resolve(format!("competition.sets[{l}]"), s))
                    .collect::<Result<_>>()?,
            ),
        };
        let priorities = match (&self.global, &self.per_machine, &self.set_level) {
            (Some(list), None, None) => {
                Priorities::Global(PriorityList::new(resolve("priorities.list".into(), list)?))
            }
            (None, Some(lists), None) => Priorities::PerMachine(
                lists
                    .iter()
                    .enumerate()
                    .map(|(i, l)| {
                        resolve(format!("priorities.lists[{i}]"), l).map(PriorityList::new)
                    })
                    .collect::<Result<_>>()?,
            ),
            (None, None, Some(lists)) => Priorities::SetLevel(lists.clone()),
            _ => {
                return Err(Error::validation(
                    "priorities",
                    "exactly one of global, per-machine or set-level lists is required",
                ))
            }
        };
        Game::new(self.jobs, self.machines, priorities, competition)
    }
}
