use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::game::{Game, GameBuilder};
use crate::rational::{format_rational, int, one, rat, zero, Rational};

pub const DEFAULT_EPSILON: (i64, i64) = (1, 1000);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    InvpolPoa,
    IdenticalPos,
    Q2SmallR,
    Q2LargeR,
    G1,
    G2,
    G3,
    G4,
    G5,
    SinkGprime,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::InvpolPoa,
        Family::IdenticalPos,
        Family::Q2SmallR,
        Family::Q2LargeR,
        Family::G1,
        Family::G2,
        Family::G3,
        Family::G4,
        Family::G5,
        Family::SinkGprime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::InvpolPoa => "invpol-poa",
            Family::IdenticalPos => "identical-pos",
            Family::Q2SmallR => "q2-small-r",
            Family::Q2LargeR => "q2-large-r",
            Family::G1 => "g1",
            Family::G2 => "g2",
            Family::G3 => "g3",
            Family::G4 => "g4",
            Family::G5 => "g5",
            Family::SinkGprime => "sink-gprime",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::validation("family", format!("unknown family `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    pub family: Family,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub r: Option<Rational>,
    /// Defaults to 1/1000 where the family uses it.
    pub epsilon: Option<Rational>,
}

impl FamilySpec {
    pub fn new(family: Family) -> Self {
        FamilySpec {
            family,
            m: None,
            k: None,
            r: None,
            epsilon: None,
        }
    }

    pub fn m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn r(mut self, r: Rational) -> Self {
        self.r = Some(r);
        self
    }

    pub fn epsilon(mut self, epsilon: Rational) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    fn need_m(&self, min: usize) -> Result<usize> {
        let m = self
            .m
            .ok_or_else(|| Error::validation("m", format!("{} needs m", self.family)))?;
        if m < min {
            return Err(Error::validation(
                "m",
                format!("{} requires m >= {min}", self.family),
            ));
        }
        Ok(m)
    }

    fn need_k(&self) -> Result<usize> {
        match self.k {
            Some(k) if k >= 1 => Ok(k),
            Some(_) => Err(Error::validation("k", "k must be at least 1")),
            None => Err(Error::validation("k", format!("{} needs k", self.family))),
        }
    }

    /// `0 < r <= 1`.
    fn need_r(&self) -> Result<Rational> {
        let r = self
            .r
            .ok_or_else(|| Error::validation("r", format!("{} needs r", self.family)))?;
        if r <= zero() || r > one() {
            return Err(Error::validation(
                "r",
                format!("r = {} violates 0 < r <= 1", format_rational(&r)),
            ));
        }
        Ok(r)
    }

    fn eps(&self) -> Result<Rational> {
        let e = self
            .epsilon
            .unwrap_or_else(|| rat(DEFAULT_EPSILON.0, DEFAULT_EPSILON.1));
        if e <= zero() {
            return Err(Error::validation("epsilon", "epsilon must be positive"));
        }
        Ok(e)
    }
}

fn require(cond: bool, path: &str, constraint: String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::validation(path, format!("violated: {constraint}")))
    }
}

fn small_r(r: Rational) -> bool {
    r * r + r <= one()
}

fn machines(b: GameBuilder, rates: &[Rational]) -> GameBuilder {
    rates
        .iter()
        .enumerate()
        .fold(b, |b, (i, &q)| b.machine(format!("M{}", i + 1), q))
}

fn jobs(b: GameBuilder, jobs: &[(String, Rational)]) -> GameBuilder {
    jobs.iter().fold(b, |b, (id, p)| b.job(id.clone(), *p))
}

fn ids(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn generate(spec: &FamilySpec) -> Result<Game> {
    match spec.family {
        Family::InvpolPoa => invpol_poa(spec.need_k()?),
        Family::IdenticalPos => identical_pos(spec.need_m(2)?),
        Family::Q2SmallR => q2_small_r(spec.need_r()?),
        Family::Q2LargeR => q2_large_r(spec.need_r()?),
        Family::G1 => g1(spec.need_m(2)?, spec.eps()?),
        Family::G2 => g2(spec.need_m(2)?, spec.eps()?),
        Family::G3 => g3(spec.need_r()?, spec.eps()?),
        Family::G4 => g4(spec.need_r()?),
        Family::G5 => g5(spec.need_r()?, spec.eps()?),
        Family::SinkGprime => sink_gprime(spec.need_r()?),
    }
}

fn invpol_poa(k: usize) -> Result<Game> {
    let units: Vec<String> = (1..=2 * k).map(|i| i.to_string()).collect();
    let mut all: Vec<(String, Rational)> = units.iter().map(|u| (u.clone(), one())).collect();
    all.push(("j*".into(), int(2 * k as i64)));
    let mut pi1: Vec<String> = units[..k].to_vec();
    pi1.push("j*".into());
    pi1.extend_from_slice(&units[k..]);
    let pi2: Vec<String> = pi1.iter().rev().cloned().collect();
    machines(jobs(GameBuilder::new(), &all), &[one(), one()])
        .per_machine(&[pi1, pi2])
        .build()
}

fn identical_pos(m: usize) -> Result<Game> {
    let count = m * (m - 1);
    let units: Vec<String> = (1..=count).map(|i| i.to_string()).collect();
    let mut all: Vec<(String, Rational)> = units.iter().map(|u| (u.clone(), one())).collect();
    all.push(("j*".into(), int(m as i64)));
    // M_i moves unit m(m-2)+i behind the other units.
    let lists: Vec<Vec<String>> = (1..=m)
        .map(|i| {
            let moved = m * (m - 2) + i - 1;
            let mut l: Vec<String> = units
                .iter()
                .enumerate()
                .filter(|&(u, _)| u != moved)
                .map(|(_, s)| s.clone())
                .collect();
            l.push(units[moved].clone());
            l.push("j*".into());
            l
        })
        .collect();
    machines(jobs(GameBuilder::new(), &all), &vec![one(); m])
        .per_machine(&lists)
        .build()
}

fn q2_small_r(r: Rational) -> Result<Game> {
    require(small_r(r), "r", "r^2 + r <= 1".into())?;
    let b = jobs(
        GameBuilder::new(),
        &[("a".into(), one()), ("b".into(), one() / r)],
    );
    machines(b, &[one(), r]).global(&["a", "b"]).build()
}

fn xyz(r: Rational) -> Vec<(String, Rational)> {
    vec![
        ("x".into(), one()),
        ("y".into(), r * r + r - one()),
        ("z".into(), r + one()),
    ]
}

fn q2_large_r(r: Rational) -> Result<Game> {
    require(!small_r(r), "r", "r^2 + r > 1".into())?;
    machines(jobs(GameBuilder::new(), &xyz(r)), &[one(), r])
        .per_machine(&[ids(&["x", "y", "z"]), ids(&["y", "x", "z"])])
        .build()
}

fn g1(m: usize, eps: Rational) -> Result<Game> {
    require(eps < one(), "epsilon", "p_b = 1 - epsilon > 0".into())?;
    let xs: Vec<String> = (3..=m).map(|i| format!("x{i}")).collect();
    let ys: Vec<String> = (3..=m).map(|i| format!("y{i}")).collect();
    let mut all = vec![
        ("a".to_string(), int(m as i64 - 1)),
        ("b".to_string(), one() - eps),
        ("c".to_string(), eps),
        ("d".to_string(), int(m as i64)),
    ];
    all.extend(xs.iter().map(|x| (x.clone(), int(m as i64 - 1))));
    all.extend(ys.iter().map(|y| (y.clone(), one())));
    let cat = |parts: &[&[String]]| -> Vec<String> { parts.concat() };
    let one_of = |s: &str| vec![s.to_string()];
    let mut lists = vec![
        cat(&[
            &one_of("b"),
            &one_of("a"),
            &one_of("c"),
            &ys,
            &one_of("d"),
            &xs,
        ]),
        cat(&[
            &one_of("a"),
            &one_of("d"),
            &one_of("c"),
            &ys,
            &one_of("b"),
            &xs,
        ]),
    ];
    for i in 0..xs.len() {
        let other_x: Vec<String> = xs
            .iter()
            .enumerate()
            .filter(|&(t, _)| t != i)
            .map(|(_, s)| s.clone())
            .collect();
        let other_y: Vec<String> = ys
            .iter()
            .enumerate()
            .filter(|&(t, _)| t != i)
            .map(|(_, s)| s.clone())
            .collect();
        lists.push(cat(&[
            &one_of(&xs[i]),
            &other_x,
            &one_of(&ys[i]),
            &other_y,
            &ids(&["c", "d", "a", "b"]),
        ]));
    }
    machines(jobs(GameBuilder::new(), &all), &vec![one(); m])
        .per_machine(&lists)
        .build()
}

fn g2(m: usize, eps: Rational) -> Result<Game> {
    let mi = m as i64;
    let pa = int(mi - 1) - int(mi) * eps;
    require(pa > zero(), "epsilon", "p_a = m - 1 - m*epsilon > 0".into())?;
    let cs: Vec<String> = (1..=m).map(|i| format!("c{i}")).collect();
    let mut all = vec![
        ("a".to_string(), pa),
        ("d".to_string(), one()),
        ("e".to_string(), int(mi)),
    ];
    all.extend(cs.iter().map(|c| (c.clone(), eps)));
    let mut x_all = Vec::new();
    for i in 3..=m {
        let (x1, x2) = (format!("x{i}1"), format!("x{i}2"));
        all.push((x1.clone(), int(mi - i as i64 + 1) + eps));
        all.push((x2.clone(), int(i as i64 - 2)));
        x_all.extend([x1, x2]);
    }
    let ys: Vec<String> = (3..=m).map(|i| format!("y{i}")).collect();
    all.extend(ys.iter().map(|y| (y.clone(), one())));
    let s = |v: &str| vec![v.to_string()];
    let mut lists = vec![
        [
            s("c1"),
            s("a"),
            cs[1..].to_vec(),
            s("e"),
            s("d"),
            x_all.clone(),
            ys.clone(),
        ]
        .concat(),
        [
            s("a"),
            s("d"),
            ys.iter().rev().cloned().collect(),
            s("e"),
            cs.clone(),
            x_all.clone(),
        ]
        .concat(),
    ];
    for i in 3..=m {
        let (x1, x2, y) = (format!("x{i}1"), format!("x{i}2"), format!("y{i}"));
        let other_x: Vec<String> = x_all
            .iter()
            .filter(|x| **x != x1 && **x != x2)
            .cloned()
            .collect();
        let other_y: Vec<String> = ys.iter().filter(|v| **v != y).cloned().collect();
        lists.push(
            [
                s(&x1),
                s(&y),
                s(&x2),
                ids(&["a", "d", "e"]),
                cs.clone(),
                other_x,
                other_y,
            ]
            .concat(),
        );
    }
    machines(jobs(GameBuilder::new(), &all), &vec![one(); m])
        .per_machine(&lists)
        .build()
}

fn g3(r: Rational, eps: Rational) -> Result<Game> {
    require(small_r(r), "r", "r^2 + r <= 1".into())?;
    require(eps < one(), "epsilon", "p_a = 1 - epsilon > 0".into())?;
    let all = vec![
        ("a".to_string(), one() - eps),
        ("b".to_string(), eps),
        ("c".to_string(), one() / r),
    ];
    machines(jobs(GameBuilder::new(), &all), &[one(), r])
        .per_machine(&[ids(&["a", "c", "b"]), ids(&["a", "b", "c"])])
        .build()
}

fn g4(r: Rational) -> Result<Game> {
    require(!small_r(r), "r", "p_y = r^2 + r - 1 > 0".into())?;
    machines(jobs(GameBuilder::new(), &xyz(r)), &[one(), r])
        .per_machine(&[ids(&["x", "z", "y"]), ids(&["x", "y", "z"])])
        .build()
}

fn g5(r: Rational, eps: Rational) -> Result<Game> {
    let pd = r * r + r - eps;
    require(pd > zero(), "epsilon", "p_d = r^2 + r - epsilon > 0".into())?;
    let all = vec![
        ("a".to_string(), r * r),
        ("b".to_string(), r + one() - r * r),
        ("c".to_string(), eps),
        ("d".to_string(), pd),
    ];
    machines(jobs(GameBuilder::new(), &all), &[one(), r])
        .per_machine(&[ids(&["a", "b", "c", "d"]), ids(&["a", "c", "d", "b"])])
        .build()
}

fn sink_gprime(r: Rational) -> Result<Game> {
    let b = jobs(GameBuilder::new(), &[("a".into(), one()), ("b".into(), r)]);
    machines(b, &[one(), r]).global(&["a", "b"]).build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{cost_only_poa_pos, poa_pos, DEFAULT_CAP};

    #[test]
    fn invpol_k2_shape() {
        let g = generate(&FamilySpec::new(Family::InvpolPoa).k(2)).unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.m(), 2);
        assert_eq!(g.total_length(), int(8));
        let rev: Vec<usize> = g.order(0).iter().rev().copied().collect();
        assert_eq!(g.order(1), rev.as_slice());
    }

    #[test]
    fn identical_pos_lists() {
        let g = generate(&FamilySpec::new(Family::IdenticalPos).m(3)).unwrap();
        assert_eq!(g.n(), 7);
        // Unit 4 trails the units on M1, unit 5 on M2, unit 6 on M3.
        for (i, last) in ["4", "5", "6"].iter().enumerate() {
            let order = g.order(i);
            assert_eq!(g.jobs()[order[5]].id, *last);
            assert_eq!(g.jobs()[order[6]].id, "j*");
        }
    }

    #[test]
    fn identical_pos_ratios() {
        let g = generate(&FamilySpec::new(Family::IdenticalPos).m(2)).unwrap();
        assert_eq!(poa_pos(&g, DEFAULT_CAP, false).unwrap().1, rat(3, 2));
        // With ranks the slot-1 units never settle at m = 3.
        let g = generate(&FamilySpec::new(Family::IdenticalPos).m(3)).unwrap();
        assert_eq!(poa_pos(&g, DEFAULT_CAP, false), Err(Error::NoEquilibrium));
        assert_eq!(
            cost_only_poa_pos(&g, DEFAULT_CAP, false).unwrap().1,
            rat(5, 3)
        );
    }

    #[test]
    fn sink_gprime_half() {
        let g = generate(&FamilySpec::new(Family::SinkGprime).r(rat(1, 2))).unwrap();
        assert_eq!(g.n(), 2);
        assert!(g.is_global());
        assert_eq!(g.rate(1), rat(1, 2));
    }

    #[test]
    fn domain_checks_name_the_constraint() {
        let e = generate(&FamilySpec::new(Family::G4).r(rat(1, 2))).unwrap_err();
        assert!(e.to_string().contains("r^2 + r - 1"), "{e}");
        assert!(generate(&FamilySpec::new(Family::Q2LargeR).r(rat(1, 2))).is_err());
        assert!(generate(&FamilySpec::new(Family::Q2SmallR).r(rat(3, 4))).is_err());
        assert!(generate(&FamilySpec::new(Family::G3).r(rat(1, 2)).epsilon(int(1))).is_err());
        assert!(generate(&FamilySpec::new(Family::G1)).is_err());
        assert!(generate(&FamilySpec::new(Family::SinkGprime).r(int(2))).is_err());
        assert!(generate(&FamilySpec::new(Family::G2).m(3).epsilon(rat(2, 3))).is_err());
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("g9".parse::<Family>().is_err());
    }

    #[test]
    fn q2_values() {
        let g = generate(&FamilySpec::new(Family::Q2SmallR).r(rat(1, 2))).unwrap();
        assert_eq!(poa_pos(&g, DEFAULT_CAP, false).unwrap().1, rat(3, 2));
        let g = generate(&FamilySpec::new(Family::Q2LargeR).r(rat(3, 4))).unwrap();
        assert_eq!(poa_pos(&g, DEFAULT_CAP, false).unwrap().1, rat(11, 7));
    }

    #[test]
    fn g2_and_g4_have_equilibria_without_competition() {
        let g = generate(&FamilySpec::new(Family::G2).m(3).epsilon(rat(1, 100))).unwrap();
        assert_eq!(g.n(), 3 + 3 + 3);
        assert!(cost_only_poa_pos(&g, DEFAULT_CAP, false).is_ok());
        let g = generate(&FamilySpec::new(Family::G4).r(rat(3, 4))).unwrap();
        assert!(cost_only_poa_pos(&g, DEFAULT_CAP, false).is_ok());
    }

    #[test]
    fn deterministic() {
        let s = FamilySpec::new(Family::G1).m(4).epsilon(rat(1, 7));
        assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
    }
}
