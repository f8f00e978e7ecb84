//! JSON instance and profile files.
//!
//! Rationals are strings (`"3"`, `"2/3"`); unknown fields are rejected.
//! Set-level lists name competition sets `"S1"`, `"S2"`, … in the order of
//! the competition block.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::competition::CompetitionStructure;
use crate::error::{Error, Result};
use crate::game::{Game, Job, Machine, Priorities, PriorityList, Profile};
use crate::instances::ThreeDMInstance;
use crate::oracle::assignment_json;
use crate::rational::{serde_str, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineEntry {
    id: String,
    #[serde(with = "serde_str")]
    rate: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobEntry {
    id: String,
    #[serde(with = "serde_str")]
    length: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
enum PrioritiesEntry {
    Global { list: Vec<String> },
    PerMachine { lists: Vec<Vec<String>> },
    SetLevel { lists: Vec<Vec<String>> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
enum CompetitionEntry {
    #[default]
    Single,
    Singletons,
    Sets {
        sets: Vec<Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    machines: Vec<MachineEntry>,
    jobs: Vec<JobEntry>,
    priorities: PrioritiesEntry,
    #[serde(default)]
    competition: CompetitionEntry,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    assignment: serde_json::Map<String, Value>,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::validation(
        format!("line {} column {}", e.line(), e.column()),
        e.to_string(),
    )
}

fn job_list(jobs: &[JobEntry], ids: &[String], path: &str) -> Result<Vec<usize>> {
    ids.iter()
        .enumerate()
        .map(|(p, id)| {
            jobs.iter().position(|j| j.id == *id).ok_or_else(|| {
                Error::validation(format!("{path}[{p}]"), format!("unknown job id {id:?}"))
            })
        })
        .collect()
}

fn set_index(id: &str, count: usize, path: String) -> Result<usize> {
    id.strip_prefix('S')
        .and_then(|d| d.parse::<usize>().ok())
        .filter(|&l| (1..=count).contains(&l))
        .map(|l| l - 1)
        .ok_or_else(|| {
            Error::validation(
                path,
                format!("unknown set id {id:?}; expected S1..S{count}"),
            )
        })
}

pub fn parse_instance(text: &str) -> Result<Game> {
    let file: InstanceFile = serde_json::from_str(text).map_err(json_error)?;
    let n = file.jobs.len();
    let competition = match &file.competition {
        CompetitionEntry::Single => CompetitionStructure::Single,
        CompetitionEntry::Singletons => CompetitionStructure::Singletons,
        CompetitionEntry::Sets { sets } => CompetitionStructure::Sets(
            sets.iter()
                .enumerate()
                .map(|(l, s)| job_list(&file.jobs, s, &format!("competition.sets[{l}]")))
                .collect::<Result<_>>()?,
        ),
    };
    let set_count = match &competition {
        CompetitionStructure::Single => 1,
        CompetitionStructure::Singletons => n,
        CompetitionStructure::Sets(s) => s.len(),
    };
    let priorities = match &file.priorities {
        PrioritiesEntry::Global { list } => Priorities::Global(PriorityList::new(job_list(
            &file.jobs,
            list,
            "priorities.list",
        )?)),
        PrioritiesEntry::PerMachine { lists } => Priorities::PerMachine(
            lists
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    job_list(&file.jobs, l, &format!("priorities.lists[{i}]"))
                        .map(PriorityList::new)
                })
                .collect::<Result<_>>()?,
        ),
        PrioritiesEntry::SetLevel { lists } => Priorities::SetLevel(
            lists
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    l.iter()
                        .enumerate()
                        .map(|(p, id)| {
                            set_index(id, set_count, format!("priorities.lists[{i}][{p}]"))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?,
        ),
    };
    Game::new(
        file.jobs
            .into_iter()
            .map(|j| Job {
                id: j.id,
                length: j.length,
            })
            .collect(),
        file.machines
            .into_iter()
            .map(|m| Machine {
                id: m.id,
                rate: m.rate,
            })
            .collect(),
        priorities,
        competition,
    )
}

fn instance_value(game: &Game) -> InstanceFile {
    let name = |j: &usize| game.jobs()[*j].id.clone();
    let priorities = match game.priorities() {
        Priorities::Global(l) => PrioritiesEntry::Global {
            list: l.as_slice().iter().map(name).collect(),
        },
        Priorities::PerMachine(ls) => PrioritiesEntry::PerMachine {
            lists: ls
                .iter()
                .map(|l| l.as_slice().iter().map(name).collect())
                .collect(),
        },
        Priorities::SetLevel(ls) => PrioritiesEntry::SetLevel {
            lists: ls
                .iter()
                .map(|l| l.iter().map(|s| format!("S{}", s + 1)).collect())
                .collect(),
        },
    };
    let competition = match game.competition() {
        CompetitionStructure::Single => CompetitionEntry::Single,
        CompetitionStructure::Singletons => CompetitionEntry::Singletons,
        CompetitionStructure::Sets(sets) => CompetitionEntry::Sets {
            sets: sets.iter().map(|s| s.iter().map(name).collect()).collect(),
        },
    };
    InstanceFile {
        machines: game
            .machines()
            .iter()
            .map(|m| MachineEntry {
                id: m.id.clone(),
                rate: m.rate,
            })
            .collect(),
        jobs: game
            .jobs()
            .iter()
            .map(|j| JobEntry {
                id: j.id.clone(),
                length: j.length,
            })
            .collect(),
        priorities,
        competition,
    }
}

/// Pretty-printed canonical form; [`parse_instance`] inverts it.
pub fn serialize_instance(game: &Game) -> String {
    serde_json::to_string_pretty(&instance_value(game)).expect("instance serializes")
}

pub fn instance_json(game: &Game) -> Value {
    serde_json::to_value(instance_value(game)).expect("instance serializes")
}

/// Reads `{"assignment": {"job": "machine", …}}`; every job must appear.
pub fn parse_profile(game: &Game, text: &str) -> Result<Profile> {
    let file: ProfileFile = serde_json::from_str(text).map_err(json_error)?;
    let mut pairs = Vec::with_capacity(file.assignment.len());
    for (job, machine) in &file.assignment {
        let Value::String(machine) = machine else {
            return Err(Error::validation(
                format!("assignment.{job}"),
                "machine id must be a string",
            ));
        };
        pairs.push((job.as_str(), machine.as_str()));
    }
    game.profile_from_ids(pairs)
}

pub fn serialize_profile(game: &Game, profile: &Profile) -> String {
    serde_json::to_string_pretty(
        &serde_json::json!({ "assignment": assignment_json(game, profile) }),
    )
    .expect("profile serializes")
}

pub fn parse_threedm(text: &str) -> Result<ThreeDMInstance> {
    let t: ThreeDMInstance = serde_json::from_str(text).map_err(json_error)?;
    ThreeDMInstance::new(t.n, t.triples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    const FIG1: &str = r#"{
        "machines": [{"id": "M1", "rate": "1"}, {"id": "M2", "rate": "2/3"}],
        "jobs": [{"id": "a", "length": "1"}, {"id": "b", "length": "4/2"}],
        "priorities": {"mode": "global", "list": ["a", "b"]}
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let g = parse_instance(FIG1).unwrap();
        assert_eq!(g.rate(1), rat(2, 3));
        assert_eq!(g.length(1), rat(2, 1));
        let text = serialize_instance(&g);
        assert!(text.contains("\"2/3\""));
        assert!(text.contains("\"length\": \"2\""));
        let again = parse_instance(&text).unwrap();
        assert_eq!(again, g);
        assert_eq!(serialize_instance(&again), text);
    }

    #[test]
    fn set_level_with_sets() {
        let text = r#"{
            "machines": [{"id": "M1", "rate": "1"}, {"id": "M2", "rate": "1"}],
            "jobs": [{"id": "a", "length": "1"}, {"id": "b", "length": "1"}, {"id": "c", "length": "2"}],
            "priorities": {"mode": "set_level", "lists": [["S1", "S2"], ["S2", "S1"]]},
            "competition": {"mode": "sets", "sets": [["a", "c"], ["b"]]}
        }"#;
        let g = parse_instance(text).unwrap();
        assert!(g.is_set_level());
        assert_eq!(g.sets(), &[vec![0, 2], vec![1]]);
        assert_eq!(parse_instance(&serialize_instance(&g)).unwrap(), g);
    }

    #[test]
    fn rejections_carry_paths() {
        let missing = FIG1.replace(r#"["a", "b"]"#, r#"["a"]"#);
        let e = parse_instance(&missing).unwrap_err().to_string();
        assert!(e.contains("priorities.list") && e.contains("\"b\""), "{e}");

        let unknown = FIG1.replace(r#""rate": "1"}"#, r#""rate": "1", "speed": 2}"#);
        assert!(parse_instance(&unknown)
            .unwrap_err()
            .to_string()
            .contains("speed"));

        let zero = FIG1.replace(r#""length": "1""#, r#""length": "0""#);
        assert!(parse_instance(&zero)
            .unwrap_err()
            .to_string()
            .contains("jobs[0].length"));

        let dup = FIG1.replace(r#""id": "b""#, r#""id": "a""#);
        assert!(parse_instance(&dup).is_err());

        let wrong_count = FIG1.replace(
            r#"{"mode": "global", "list": ["a", "b"]}"#,
            r#"{"mode": "per_machine", "lists": [["a", "b"]]}"#,
        );
        let e = parse_instance(&wrong_count).unwrap_err().to_string();
        assert!(e.contains("expected 2 lists"), "{e}");

        let bad_set = FIG1.replace(
            r#"{"mode": "global", "list": ["a", "b"]}"#,
            r#"{"mode": "set_level", "lists": [["S1"], ["S2"]]}"#,
        );
        assert!(parse_instance(&bad_set)
            .unwrap_err()
            .to_string()
            .contains("S2"));
    }

    #[test]
    fn profile_files() {
        let g = parse_instance(FIG1).unwrap();
        let p = parse_profile(&g, r#"{"assignment": {"a": "M2", "b": "M1"}}"#).unwrap();
        assert_eq!(p, Profile::new(vec![1, 0]));
        assert_eq!(parse_profile(&g, &serialize_profile(&g, &p)).unwrap(), p);
        assert!(parse_profile(&g, r#"{"assignment": {"a": "M2"}}"#).is_err());
        assert!(parse_profile(&g, r#"{"assignment": {"a": "M3", "b": "M1"}}"#).is_err());
    }

    #[test]
    fn threedm_files() {
        let t = parse_threedm(r#"{"n": 1, "triples": [[1, 1, 1]]}"#).unwrap();
        assert_eq!(t.triples, vec![[1, 1, 1]]);
        assert!(parse_threedm(r#"{"n": 1, "triples": [[1, 2, 1]]}"#).is_err());
    }
}
