//! The strategy-profile graph and its export formats.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::scc::terminal_components;
use super::stationary::stationary;
use super::{deviator_distribution, DeviatorRule, SinkComponent};
use crate::error::Result;
use crate::game::{Game, Profile};
use crate::oracle::cap_check;
use crate::rational::{format_rational, widen, Rational};
use crate::schedule::Analysis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphMode {
    /// Every suboptimal job may move to any of its best responses.
    AllPlayers,
    /// Only the rule's deviator moves.
    RuleRestricted(DeviatorRule),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    /// Target vertex.
    pub to: usize,
    pub deviator: usize,
    /// Transition probability: uniform over candidate deviators, then uniform
    /// over the deviator's best responses.
    pub probability: Rational,
}

#[derive(Debug, Clone)]
pub struct ProfileGraph {
    n: usize,
    m: usize,
    mode: GraphMode,
    /// Profile index (base `m`) of every vertex.
    vertices: Vec<u64>,
    edges: Vec<Vec<Edge>>,
    makespans: Vec<Rational>,
}

struct Expansion {
    makespan: Rational,
    moves: Vec<(u64, usize, Rational)>,
}

fn expand(game: &Game, index: u64, mode: GraphMode) -> Expansion {
    let profile = Profile::from_index(index, game.n(), game.m());
    let analysis = Analysis::new_unchecked(game, profile);
    let sub = analysis.suboptimal_jobs();
    let deviators = match mode {
        GraphMode::AllPlayers => sub.clone(),
        GraphMode::RuleRestricted(rule) => deviator_distribution(&analysis, &sub, rule),
    };
    let mut moves = Vec::new();
    for &j in &deviators {
        let targets = analysis.best_responses(j);
        let p = Rational::new(1, (deviators.len() * targets.len()) as i64);
        for t in targets {
            moves.push((analysis.profile().with_move(j, t).index(game.m()), j, p));
        }
    }
    Expansion {
        makespan: analysis.makespan(),
        moves,
    }
}

/// Builds the graph over all `m^n` profiles, or over the profiles reachable
/// from `starts`. Refuses when `m^n` exceeds `cap` unless `force` is set.
pub fn build_profile_graph(
    game: &Game,
    mode: GraphMode,
    starts: Option<&[Profile]>,
    cap: u128,
    force: bool,
) -> Result<ProfileGraph> {
    cap_check(game, cap, force)?;
    let (n, m) = (game.n(), game.m());
    match starts {
        None => {
            let count = game.profile_count() as u64;
            let expansions: Vec<Expansion> = (0..count)
                .into_par_iter()
                .map(|idx| expand(game, idx, mode))
                .collect();
            let mut edges = Vec::with_capacity(expansions.len());
            let mut makespans = Vec::with_capacity(expansions.len());
            for e in expansions {
                makespans.push(e.makespan);
                edges.push(
                    e.moves
                        .into_iter()
                        .map(|(to, deviator, probability)| Edge {
                            to: to as usize,
                            deviator,
                            probability,
                        })
                        .collect(),
                );
            }
            Ok(ProfileGraph {
                n,
                m,
                mode,
                vertices: (0..count).collect(),
                edges,
                makespans,
            })
        }
        Some(starts) => {
            let mut lookup: HashMap<u64, usize> = HashMap::new();
            let mut vertices = Vec::new();
            let mut queue = VecDeque::new();
            for s in starts {
                game.check_profile(s)?;
                let idx = s.index(m);
                if let std::collections::hash_map::Entry::Vacant(slot) = lookup.entry(idx) {
                    slot.insert(vertices.len());
                    vertices.push(idx);
                    queue.push_back(idx);
                }
            }
            let mut pending: HashMap<u64, Expansion> = HashMap::new();
            while let Some(idx) = queue.pop_front() {
                let e = expand(game, idx, mode);
                for (to, _, _) in &e.moves {
                    if !lookup.contains_key(to) {
                        lookup.insert(*to, vertices.len());
                        vertices.push(*to);
                        queue.push_back(*to);
                    }
                }
                pending.insert(idx, e);
            }
            let mut edges = Vec::with_capacity(vertices.len());
            let mut makespans = Vec::with_capacity(vertices.len());
            for idx in &vertices {
                let e = pending.remove(idx).expect("every vertex expanded");
                makespans.push(e.makespan);
                edges.push(
                    e.moves
                        .into_iter()
                        .map(|(to, deviator, probability)| Edge {
                            to: lookup[&to],
                            deviator,
                            probability,
                        })
                        .collect(),
                );
            }
            Ok(ProfileGraph {
                n,
                m,
                mode,
                vertices,
                edges,
                makespans,
            })
        }
    }
}

impl ProfileGraph {
    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn profile(&self, vertex: usize) -> Profile {
        Profile::from_index(self.vertices[vertex], self.n, self.m)
    }

    pub fn vertex_of(&self, profile: &Profile) -> Option<usize> {
        let idx = profile.index(self.m);
        self.vertices.iter().position(|&v| v == idx)
    }

    pub fn edges(&self, vertex: usize) -> &[Edge] {
        &self.edges[vertex]
    }

    pub fn makespan(&self, vertex: usize) -> Rational {
        self.makespans[vertex]
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        self.edges
            .iter()
            .map(|es| es.iter().map(|e| e.to).collect())
            .collect()
    }

    /// Terminal components with stationary distributions, ordered by their
    /// smallest vertex.
    pub fn sinks(&self) -> Result<Vec<SinkComponent>> {
        let mut out = Vec::new();
        for members in terminal_components(&self.adjacency()) {
            let local: HashMap<usize, usize> =
                members.iter().enumerate().map(|(k, &v)| (v, k)).collect();
            let transitions: Vec<Vec<(usize, Rational)>> = members
                .iter()
                .map(|&v| {
                    self.edges[v]
                        .iter()
                        .map(|e| (local[&e.to], e.probability))
                        .collect()
                })
                .collect();
            let st = stationary(&transitions)?;
            let social_cost: BigRational = members
                .iter()
                .zip(&st.distribution)
                .map(|(&v, f)| f * widen(&self.makespans[v]))
                .sum();
            out.push(SinkComponent {
                members: members.iter().map(|&v| self.profile(v)).collect(),
                distribution: st.distribution,
                social_cost,
                exact: st.exact,
            });
        }
        Ok(out)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph profiles {\n");
        for (v, es) in self.edges.iter().enumerate() {
            let label = self.profile(v).digit_string();
            let _ = writeln!(
                out,
                "  \"{label}\" [label=\"{label}\\nC={}\"];",
                format_rational(&self.makespans[v])
            );
            for e in es {
                let _ = writeln!(
                    out,
                    "  \"{label}\" -> \"{}\" [label=\"j{} p={}\"];",
                    self.profile(e.to).digit_string(),
                    e.deviator,
                    format_rational(&e.probability)
                );
            }
        }
        out.push_str("}\n");
        out
    }

    /// `{"vertices": [{"profile", "makespan", "edges": [{"to", "deviator",
    /// "probability"}]}]}` with profiles as base-`m` digit strings.
    pub fn to_json(&self) -> Value {
        let vertices: Vec<Value> = (0..self.vertex_count())
            .map(|v| {
                json!({
                    "profile": self.profile(v).digit_string(),
                    "makespan": format_rational(&self.makespans[v]),
                    "edges": self.edges[v].iter().map(|e| json!({
                        "to": self.profile(e.to).digit_string(),
                        "deviator": e.deviator,
                        "probability": format_rational(&e.probability),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({ "vertices": vertices })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameBuilder;
    use crate::rational::int;
    use crate::schedule::prefers;

    fn cycle_game() -> Game {
        GameBuilder::new()
            .job("a", int(1))
            .job("b", int(1))
            .machine("M1", int(1))
            .machine("M2", int(1))
            .global(&["a", "b"])
            .build()
            .unwrap()
    }

    #[test]
    fn cycle_game_graph_is_a_four_cycle() {
        let g = cycle_game();
        let graph = build_profile_graph(&g, GraphMode::AllPlayers, None, 1 << 10, false).unwrap();
        assert_eq!(graph.vertex_count(), 4);
        for v in 0..4 {
            assert_eq!(graph.edges(v).len(), 1, "vertex {v}");
        }
        let sinks = graph.sinks().unwrap();
        assert_eq!(sinks.len(), 1);
        assert_eq!(sinks[0].members.len(), 4);
    }

    #[test]
    fn edges_are_improving_moves() {
        let g = cycle_game();
        let graph = build_profile_graph(&g, GraphMode::AllPlayers, None, 1 << 10, false).unwrap();
        for v in 0..graph.vertex_count() {
            for e in graph.edges(v) {
                assert!(prefers(&g, e.deviator, &graph.profile(v), &graph.profile(e.to)).unwrap());
            }
        }
    }

    #[test]
    fn single_job_equilibria_are_sinks() {
        let g = GameBuilder::new()
            .job("a", int(1))
            .machine("M1", int(1))
            .machine("M2", int(1))
            .global(&["a"])
            .build()
            .unwrap();
        let graph = build_profile_graph(
            &g,
            GraphMode::RuleRestricted(DeviatorRule::LowestIdSuboptimal),
            None,
            1 << 10,
            false,
        )
        .unwrap();
        assert_eq!(graph.vertex_count(), 2);
        assert_eq!(graph.edge_count(), 0);
        assert_eq!(graph.sinks().unwrap().len(), 2);
    }

    #[test]
    fn reachable_subset_and_export() {
        let g = cycle_game();
        let start = [Profile::new(vec![0, 0])];
        let graph = build_profile_graph(
            &g,
            GraphMode::RuleRestricted(DeviatorRule::LowestIdSuboptimal),
            Some(&start),
            1 << 10,
            false,
        )
        .unwrap();
        assert_eq!(graph.vertex_count(), 4);
        assert!(graph.to_dot().contains("\"00\" -> \"01\""));
        assert_eq!(graph.to_json()["vertices"][0]["profile"], "00");
    }
}
