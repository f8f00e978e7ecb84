//! Job-scheduling games where each machine runs its jobs in a fixed priority
//! order and every job cares first about the rank of its completion time
//! among its competitors, then about the completion time itself.
//!
//! All arithmetic is exact over [`Rational`].

pub mod competition;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod greedy;
pub mod instances;
pub mod io;
pub mod oracle;
pub mod rational;
pub mod schedule;
pub mod solvers;

pub use competition::{
    replay_seniority, seniority_brd, seniority_deviate, set_ranks, CompetitionStructure,
    SeniorityState,
};
pub use dynamics::{brd_run, sink_analysis, BrTrace, DeviatorRule, Termination};
pub use error::{Error, Result};
pub use game::{Game, GameBuilder, Job, Machine, Priorities, PriorityList, Profile};
pub use rational::{format_rational, parse_rational, rat, Rational};
pub use schedule::{best_responses, build_schedule, is_ne, prefers, Analysis, NeCheck, Outcome};
