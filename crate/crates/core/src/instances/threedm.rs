use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Game, GameBuilder, Profile};
use crate::rational::{int, one};

/// Largest triple count [`solve_3dm_bruteforce`] accepts.
pub const BRUTEFORCE_LIMIT: usize = 24;

/// Triples over `X`, `Y`, `Z` of size `n`, elements numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeDMInstance {
    pub n: usize,
    pub triples: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccurrenceMode {
    /// Every element occurs two or three times.
    Strict,
    /// Only requires each `x_i` to occur at least once.
    Relaxed,
}

const AXES: [char; 3] = ['x', 'y', 'z'];

impl ThreeDMInstance {
    pub fn new(n: usize, triples: Vec<[usize; 3]>) -> Result<Self> {
        let t = ThreeDMInstance { n, triples };
        t.check_indices()?;
        Ok(t)
    }

    fn check_indices(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::validation("n", "n must be positive"));
        }
        for (t, triple) in self.triples.iter().enumerate() {
            for (axis, &e) in triple.iter().enumerate() {
                if e == 0 || e > self.n {
                    return Err(Error::validation(
                        format!("triples[{t}][{axis}]"),
                        format!("element {e} outside 1..={}", self.n),
                    ));
                }
            }
        }
        Ok(())
    }

    /// `occurrences()[axis][e - 1]`.
    pub fn occurrences(&self) -> [Vec<usize>; 3] {
        let mut occ = [vec![0; self.n], vec![0; self.n], vec![0; self.n]];
        for triple in &self.triples {
            for axis in 0..3 {
                occ[axis][triple[axis] - 1] += 1;
            }
        }
        occ
    }

    pub fn check_occurrences(&self, mode: OccurrenceMode) -> Result<()> {
        self.check_indices()?;
        let occ = self.occurrences();
        for axis in 0..3 {
            for (e, &c) in occ[axis].iter().enumerate() {
                let bad = match mode {
                    OccurrenceMode::Strict => !(2..=3).contains(&c),
                    OccurrenceMode::Relaxed => axis == 0 && c == 0,
                };
                if bad {
                    return Err(Error::validation(
                        "triples",
                        format!("element {}{} occurs {c} times", AXES[axis], e + 1),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Triple indices (0-based) containing `x_i`.
    fn of_type(&self, i: usize) -> Vec<usize> {
        (0..self.triples.len())
            .filter(|&t| self.triples[t][0] == i)
            .collect()
    }
}

/// Result of [`normalize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub instance: ThreeDMInstance,
    /// Original 1-based indices of triples forced into every matching.
    pub forced: Vec<usize>,
    /// Original 1-based index of each remaining triple.
    pub kept: Vec<usize>,
}

/// Removes single-occurrence elements: the unique triple holding such an
/// element is forced, its three elements leave the instance and every other
/// triple touching them is deleted. Forced triples are taken in ascending
/// index order until none remain. Fails when an element loses all triples.
pub fn normalize(t: &ThreeDMInstance) -> Result<Normalized> {
    t.check_indices()?;
    let mut alive: Vec<bool> = vec![true; t.triples.len()];
    let mut removed: [BTreeSet<usize>; 3] = Default::default();
    let mut forced = Vec::new();
    loop {
        let mut occ = [vec![0usize; t.n + 1], vec![0; t.n + 1], vec![0; t.n + 1]];
        for (k, tr) in t.triples.iter().enumerate() {
            if alive[k] {
                for a in 0..3 {
                    occ[a][tr[a]] += 1;
                }
            }
        }
        for a in 0..3 {
            for e in 1..=t.n {
                if occ[a][e] == 0 && !removed[a].contains(&e) {
                    return Err(Error::validation(
                        "triples",
                        format!("element {}{e} is covered by no remaining triple", AXES[a]),
                    ));
                }
            }
        }
        let next = (0..t.triples.len())
            .find(|&k| alive[k] && (0..3).any(|a| occ[a][t.triples[k][a]] == 1));
        let Some(k) = next else { break };
        forced.push(k + 1);
        let tr = t.triples[k];
        for (j, other) in t.triples.iter().enumerate() {
            if (0..3).any(|a| other[a] == tr[a]) {
                alive[j] = false;
            }
        }
        for a in 0..3 {
            removed[a].insert(tr[a]);
        }
    }
    // Relabel surviving elements densely.
    let relabel: Vec<Vec<usize>> = (0..3)
        .map(|a| {
            let mut map = vec![0; t.n + 1];
            let mut next = 0;
            for e in 1..=t.n {
                if !removed[a].contains(&e) {
                    next += 1;
                    map[e] = next;
                }
            }
            map
        })
        .collect();
    let kept: Vec<usize> = (0..t.triples.len()).filter(|&k| alive[k]).collect();
    let triples = kept
        .iter()
        .map(|&k| {
            let tr = t.triples[k];
            [relabel[0][tr[0]], relabel[1][tr[1]], relabel[2][tr[2]]]
        })
        .collect();
    Ok(Normalized {
        instance: ThreeDMInstance {
            n: t.n - forced.len(),
            triples,
        },
        forced,
        kept: kept.into_iter().map(|k| k + 1).collect(),
    })
}

/// Job ids of the reduction in input order `Y, Z, D, U, V`.
struct Layout {
    y: Vec<String>,
    z: Vec<String>,
    /// `d[i]` are the dummy jobs of type `i + 1`.
    d: Vec<Vec<String>>,
    u: Vec<String>,
    v: Vec<String>,
}

impl Layout {
    fn of(t: &ThreeDMInstance) -> Result<Self> {
        let d = (1..=t.n)
            .map(|i| {
                let tau = t.of_type(i).len();
                if tau > 27 {
                    return Err(Error::validation(
                        "triples",
                        format!("element x{i} occurs {tau} times"),
                    ));
                }
                Ok(match tau - 1 {
                    1 => vec![format!("d{i}")],
                    c => (0..c)
                        .map(|k| format!("d{i}{}", (b'a' + k as u8) as char))
                        .collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let m = t.triples.len();
        Ok(Layout {
            y: (1..=t.n).map(|j| format!("y{j}")).collect(),
            z: (1..=t.n).map(|k| format!("z{k}")).collect(),
            d,
            u: (1..=m).map(|l| format!("u{l}")).collect(),
            v: (1..=m).map(|l| format!("v{l}")).collect(),
        })
    }
}

/// The hardness game: one identical machine per triple, unit element jobs
/// for `Y` and `Z`, `τ_i - 1` length-2 dummy jobs per `x_i`, and unit `U`
/// and `V` jobs, one of each per triple.
pub fn reduce_3dm(t: &ThreeDMInstance, mode: OccurrenceMode) -> Result<Game> {
    t.check_occurrences(mode)?;
    let lay = Layout::of(t)?;
    let mut b = GameBuilder::new();
    for id in lay.y.iter().chain(&lay.z) {
        b = b.job(id.clone(), one());
    }
    for id in lay.d.iter().flatten() {
        b = b.job(id.clone(), int(2));
    }
    for id in lay.u.iter().chain(&lay.v) {
        b = b.job(id.clone(), one());
    }
    let mut lists = Vec::with_capacity(t.triples.len());
    for (l, &[i, j, k]) in t.triples.iter().enumerate() {
        b = b.machine(format!("M{}", l + 1), one());
        let mut list: Vec<String> = lay.d[i - 1].clone();
        list.push(lay.y[j - 1].clone());
        list.push(lay.z[k - 1].clone());
        list.extend(lay.u.iter().cloned());
        list.push(lay.v[l].clone());
        list.extend(lay.v.iter().filter(|v| **v != lay.v[l]).cloned());
        for (ti, di) in lay.d.iter().enumerate() {
            if ti != i - 1 {
                list.extend(di.iter().cloned());
            }
        }
        list.extend(lay.y.iter().filter(|y| **y != lay.y[j - 1]).cloned());
        list.extend(lay.z.iter().filter(|z| **z != lay.z[k - 1]).cloned());
        lists.push(list);
    }
    b.per_machine(&lists).build()
}

fn check_matching(t: &ThreeDMInstance, matching: &[usize]) -> Result<()> {
    if matching.len() != t.n {
        return Err(Error::contract(format!(
            "matching has {} triples, need {}",
            matching.len(),
            t.n
        )));
    }
    let mut seen: [BTreeSet<usize>; 3] = Default::default();
    for &l in matching {
        let tr = t
            .triples
            .get(l.wrapping_sub(1))
            .ok_or_else(|| Error::contract(format!("no triple t{l}")))?;
        for a in 0..3 {
            if !seen[a].insert(tr[a]) {
                return Err(Error::contract(format!(
                    "element {}{} covered twice",
                    AXES[a], tr[a]
                )));
            }
        }
    }
    Ok(())
}

/// The equilibrium built from a perfect matching (1-based triple indices):
/// matched machines take their `y` and `z` jobs, the other machines of each
/// type take one dummy job each, and machine `M_l` takes `u_l` and `v_l`.
pub fn matching_profile(t: &ThreeDMInstance, matching: &[usize]) -> Result<Profile> {
    check_matching(t, matching)?;
    let game = reduce_3dm(t, OccurrenceMode::Relaxed)?;
    let lay = Layout::of(t)?;
    let mut pairs: Vec<(String, String)> = Vec::with_capacity(game.n());
    for i in 1..=t.n {
        let ty = t.of_type(i);
        let matched = *matching
            .iter()
            .find(|&&l| t.triples[l - 1][0] == i)
            .expect("perfect matching covers every x");
        let mut dummies = lay.d[i - 1].iter();
        for l in ty {
            let machine = format!("M{}", l + 1);
            if l + 1 == matched {
                let [_, j, k] = t.triples[l];
                pairs.push((lay.y[j - 1].clone(), machine.clone()));
                pairs.push((lay.z[k - 1].clone(), machine));
            } else {
                let d = dummies
                    .next()
                    .expect("τ_i - 1 dummies for τ_i - 1 machines");
                pairs.push((d.clone(), machine));
            }
        }
    }
    for l in 0..t.triples.len() {
        let machine = format!("M{}", l + 1);
        pairs.push((lay.u[l].clone(), machine.clone()));
        pairs.push((lay.v[l].clone(), machine));
    }
    game.profile_from_ids(pairs.iter().map(|(j, m)| (j.as_str(), m.as_str())))
}

/// First perfect matching in lexicographic order of triple indices
/// (1-based), found by backtracking over `x_1, x_2, …`.
pub fn solve_3dm_bruteforce(t: &ThreeDMInstance) -> Result<Option<Vec<usize>>> {
    t.check_indices()?;
    if t.triples.len() > BRUTEFORCE_LIMIT {
        return Err(Error::contract(format!(
            "{} triples exceed the brute-force limit of {BRUTEFORCE_LIMIT}",
            t.triples.len()
        )));
    }
    let by_x: Vec<Vec<usize>> = (1..=t.n).map(|i| t.of_type(i)).collect();
    let mut used_y = vec![false; t.n + 1];
    let mut used_z = vec![false; t.n + 1];
    let mut chosen = Vec::with_capacity(t.n);
    fn go(
        t: &ThreeDMInstance,
        by_x: &[Vec<usize>],
        used_y: &mut [bool],
        used_z: &mut [bool],
        chosen: &mut Vec<usize>,
    ) -> bool {
        let i = chosen.len();
        if i == t.n {
            return true;
        }
        for &l in &by_x[i] {
            let [_, y, z] = t.triples[l];
            if used_y[y] || used_z[z] {
                continue;
            }
            used_y[y] = true;
            used_z[z] = true;
            chosen.push(l + 1);
            if go(t, by_x, used_y, used_z, chosen) {
                return true;
            }
            chosen.pop();
            used_y[y] = false;
            used_z[z] = false;
        }
        false
    }
    Ok(go(t, &by_x, &mut used_y, &mut used_z, &mut chosen).then_some(chosen))
}
