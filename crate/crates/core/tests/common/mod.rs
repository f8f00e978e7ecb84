#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ranksched::rational::{int, rat, Rational};
use ranksched::{CompetitionStructure, Game, Job, Machine, Priorities, PriorityList, Profile};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn shuffled(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    v
}

pub fn game(
    lengths: &[Rational],
    rates: &[Rational],
    priorities: Priorities,
    competition: CompetitionStructure,
) -> Game {
    let jobs = lengths
        .iter()
        .enumerate()
        .map(|(j, &p)| Job {
            id: format!("j{j}"),
            length: p,
        })
        .collect();
    let machines = rates
        .iter()
        .enumerate()
        .map(|(i, &q)| Machine {
            id: format!("M{}", i + 1),
            rate: q,
        })
        .collect();
    Game::new(jobs, machines, priorities, competition).expect("valid game")
}

pub fn unit_game(rates: &[Rational], lists: Vec<Vec<usize>>) -> Game {
    let n = lists[0].len();
    game(
        &vec![int(1); n],
        rates,
        Priorities::PerMachine(lists.into_iter().map(PriorityList::new).collect()),
        CompetitionStructure::Single,
    )
}

pub fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(1..=6), rng.gen_range(1..=3))
}

pub fn random_sets(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let c = rng.gen_range(1..=n.min(3));
    let mut set_of: Vec<usize> = (0..n)
        .map(|j| if j < c { j } else { rng.gen_range(0..c) })
        .collect();
    set_of.shuffle(rng);
    (0..c)
        .map(|l| (0..n).filter(|&j| set_of[j] == l).collect())
        .collect()
}

/// Arbitrary game: rational lengths and rates, per-machine lists, and a
/// random competition structure.
pub fn random_game(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Game {
    let lengths: Vec<Rational> = (0..n).map(|_| small_rational(rng)).collect();
    let rates: Vec<Rational> = (0..m).map(|_| small_rational(rng)).collect();
    let lists = (0..m)
        .map(|_| PriorityList::new(shuffled(n, rng)))
        .collect();
    let competition = match rng.gen_range(0..3) {
        0 => CompetitionStructure::Single,
        1 => CompetitionStructure::Singletons,
        _ => CompetitionStructure::Sets(random_sets(n, rng)),
    };
    game(&lengths, &rates, Priorities::PerMachine(lists), competition)
}

pub fn random_profile(game: &Game, rng: &mut ChaCha8Rng) -> Profile {
    Profile::new((0..game.n()).map(|_| rng.gen_range(0..game.m())).collect())
}
