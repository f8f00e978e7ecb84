//! Stationary distributions of the Markov chain restricted to a sink.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{widen as big, Rational};

/// Sinks up to this many states are solved exactly.
pub const EXACT_LIMIT: usize = 64;

/// Total-variation threshold between sweeps for the iterative fallback.
pub const TV_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stationary {
    pub distribution: Vec<BigRational>,
    /// False when the distribution was estimated by iteration.
    pub exact: bool,
}

/// `transitions[a]` lists `(b, probability)` over local state indices; every
/// row must sum to 1 (a state with no outgoing transitions is absorbing).
pub fn stationary(transitions: &[Vec<(usize, Rational)>]) -> Result<Stationary> {
    let k = transitions.len();
    if k == 0 {
        return Err(Error::Invariant("empty sink".into()));
    }
    if k == 1 {
        return Ok(Stationary {
            distribution: vec![BigRational::one()],
            exact: true,
        });
    }
    if k <= EXACT_LIMIT {
        return Ok(Stationary {
            distribution: solve_exact(transitions)?,
            exact: true,
        });
    }
    Ok(Stationary {
        distribution: iterate(transitions)
            .into_iter()
            .map(|x| BigRational::from_float(x).unwrap_or_else(BigRational::zero))
            .collect(),
        exact: false,
    })
}

/// Solves `f (P − I) = 0`, `Σ f = 1` by Gaussian elimination over exact
/// rationals, then checks the residual.
pub(crate) fn solve_exact(transitions: &[Vec<(usize, Rational)>]) -> Result<Vec<BigRational>> {
    let k = transitions.len();
    // Unknowns f_0..f_{k-1}; equation b: Σ_a f_a (P_ab − δ_ab) = 0. The last
    // equation is replaced by normalization.
    let mut a = vec![vec![BigRational::zero(); k + 1]; k];
    for (from, row) in transitions.iter().enumerate() {
        let mut out = BigRational::zero();
        for (to, p) in row {
            let p = big(p);
            out += &p;
            a[*to][from] += p;
        }
        if !out.is_zero() {
            a[from][from] -= BigRational::one();
        }
    }
    for cell in a[k - 1].iter_mut() {
        *cell = BigRational::one();
    }
    // a[k-1][k] is the right-hand side 1; every other rhs is 0.
    for row in a.iter_mut().take(k - 1) {
        row[k] = BigRational::zero();
    }

    for col in 0..k {
        let pivot = (col..k)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Invariant("singular stationary system".into()))?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for cell in a[col].iter_mut().skip(col) {
            *cell *= &inv;
        }
        for r in 0..k {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..=k {
                    let delta = &factor * &a[col][c];
                    a[r][c] -= delta;
                }
            }
        }
    }
    let f: Vec<BigRational> = a.into_iter().map(|row| row[k].clone()).collect();

    let mut next = vec![BigRational::zero(); k];
    for (from, row) in transitions.iter().enumerate() {
        if row.is_empty() {
            next[from] += &f[from];
        }
        for (to, p) in row {
            next[*to] += &f[from] * big(p);
        }
    }
    if next != f || f.iter().any(|x| x.is_negative()) {
        return Err(Error::Invariant("stationary residual is not zero".into()));
    }
    Ok(f)
}

/// Lazy power iteration `f ← f (P + I) / 2` until sweeps differ by less than
/// [`TV_THRESHOLD`] in total variation.
fn iterate(transitions: &[Vec<(usize, Rational)>]) -> Vec<f64> {
    let k = transitions.len();
    let rows: Vec<Vec<(usize, f64)>> = transitions
        .iter()
        .map(|row| {
            row.iter()
                .map(|(to, p)| (*to, crate::rational::to_f64(p)))
                .collect()
        })
        .collect();
    let mut f = vec![1.0 / k as f64; k];
    for _ in 0..10_000_000 {
        let mut next: Vec<f64> = f.iter().map(|x| x / 2.0).collect();
        for (from, row) in rows.iter().enumerate() {
            if row.is_empty() {
                next[from] += f[from] / 2.0;
            }
            for (to, p) in row {
                next[*to] += f[from] * p / 2.0;
            }
        }
        let tv: f64 = f.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        f = next;
        if tv < TV_THRESHOLD {
            break;
        }
    }
    f
}
