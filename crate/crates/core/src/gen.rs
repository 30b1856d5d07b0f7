//! Seeded random instances with boxes the enumeration oracles can trust.
//!
//! Candidates are proposed from structured families and accepted only after
//! the exact checks pass, so every instance meets its spec regardless of how
//! the proposal was built. Identical specs give identical instances.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{InequalityIp, MixedIp, ProblemInstance, StandardIp};
use crate::matrix::{to_bigints, IntMatrix};
use crate::oracle::{inequality_lp_box, LpBox};
use crate::pipeline::analyze;

pub const DEFAULT_MAX_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Standard,
    Inequality,
    Mixed,
}

/// Shape of the generated constraint system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Standard and mixed: the first row has positive entries, so the
    /// feasible region is bounded by `b_0`. Inequality: the objective lies
    /// strictly inside the cone of the rows, so the optimal set is bounded.
    Budget,
    /// No sign structure; instances may be unbounded.
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub form: Form,
    pub n: usize,
    pub m: usize,
    /// Continuous variables (mixed form only).
    pub l: usize,
    /// Largest entry of `A` (standard, mixed) or largest sub-determinant (inequality).
    pub delta: i64,
    /// Largest `|b_i|`.
    pub rhs_bound: i64,
    pub family: Family,
    /// Right-hand side built from a random integer point, so the instance is feasible.
    pub planted: bool,
    pub seed: u64,
    pub max_attempts: usize,
}

impl GenSpec {
    pub fn standard(n: usize, m: usize, delta: i64, seed: u64) -> Self {
        GenSpec {
            form: Form::Standard,
            n,
            m,
            l: 0,
            delta,
            rhs_bound: 30,
            family: Family::Budget,
            planted: true,
            seed,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }

    pub fn inequality(n: usize, m: usize, delta: i64, seed: u64) -> Self {
        GenSpec {
            form: Form::Inequality,
            rhs_bound: 40,
            ..Self::standard(n, m, delta, seed)
        }
    }

    pub fn mixed(n: usize, m: usize, l: usize, delta: i64, seed: u64) -> Self {
        GenSpec {
            form: Form::Mixed,
            l,
            rhs_bound: 8,
            ..Self::standard(n, m, delta, seed)
        }
    }
}

/// Box inside which the enumeration oracle provably sees an optimum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleBox {
    /// `0 <= x_j <= r` for every integer variable.
    Nonneg(BigInt),
    Signed(Vec<(BigInt, BigInt)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub instance: ProblemInstance,
    /// Candidates proposed before one was accepted.
    pub attempts: usize,
    pub oracle_box: Option<OracleBox>,
    pub spec: GenSpec,
}

pub fn generate(spec: &GenSpec) -> Result<Generated> {
    if spec.n == 0 || spec.m == 0 {
        return Err(Error::Domain("n and m must be positive".into()));
    }
    if spec.delta < 1 || spec.rhs_bound < 0 {
        return Err(Error::Domain(
            "delta must be positive and rhs_bound nonnegative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for attempt in 1..=spec.max_attempts {
        let cand = match spec.form {
            Form::Standard => propose_standard(spec, &mut rng)?,
            Form::Mixed => propose_mixed(spec, &mut rng)?,
            Form::Inequality => propose_inequality(spec, &mut rng)?,
        };
        if let Some((instance, oracle_box)) = cand {
            return Ok(Generated {
                instance,
                attempts: attempt,
                oracle_box,
                spec: spec.clone(),
            });
        }
    }
    Err(Error::GenerationExhausted {
        attempts: spec.max_attempts,
    })
}

type Proposal = Option<(ProblemInstance, Option<OracleBox>)>;

fn random_rows(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    delta: i64,
    budget: bool,
) -> Vec<Vec<i64>> {
    (0..rows)
        .map(|i| {
            (0..cols)
                .map(|_| {
                    if budget && i == 0 {
                        rng.gen_range(1..=delta)
                    } else {
                        rng.gen_range(-delta..=delta)
                    }
                })
                .collect()
        })
        .collect()
}

fn row_dot(row: &[i64], x: &[i64]) -> i64 {
    row.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// `b` from a planted point, or uniformly random (first entry nonnegative for budget rows).
fn right_hand_side(
    spec: &GenSpec,
    rng: &mut ChaCha8Rng,
    rows: &[Vec<i64>],
    point: &[i64],
) -> Option<Vec<i64>> {
    let r = spec.rhs_bound;
    let b: Vec<i64> = if spec.planted {
        rows.iter().map(|row| row_dot(row, point)).collect()
    } else {
        (0..rows.len())
            .map(|i| {
                if spec.family == Family::Budget && i == 0 {
                    rng.gen_range(0..=r)
                } else {
                    rng.gen_range(-r..=r)
                }
            })
            .collect()
    };
    b.iter().all(|v| v.abs() <= r).then_some(b)
}

fn planted_point(rng: &mut ChaCha8Rng, len: usize, hi: i64) -> Vec<i64> {
    (0..len).map(|_| rng.gen_range(0..=hi)).collect()
}

fn propose_standard(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Result<Proposal> {
    let budget = spec.family == Family::Budget;
    let rows = random_rows(rng, spec.m, spec.n, spec.delta, budget);
    let point = planted_point(rng, spec.n, 3);
    let Some(b) = right_hand_side(spec, rng, &rows, &point) else {
        return Ok(None);
    };
    let c: Vec<i64> = (0..spec.n).map(|_| rng.gen_range(-5..=5)).collect();
    let ip = StandardIp::new(IntMatrix::from_rows(&rows), to_bigints(&b), to_bigints(&c))?;
    // every x_j <= b_0 because the first row is positive
    let bx = budget.then(|| OracleBox::Nonneg(BigInt::from(b[0])));
    Ok(Some((ProblemInstance::Standard(ip), bx)))
}

fn propose_mixed(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Result<Proposal> {
    let budget = spec.family == Family::Budget;
    let a_rows = random_rows(rng, spec.m, spec.n, spec.delta, budget);
    let b_rows = random_rows(rng, spec.m, spec.l, spec.delta, budget);
    let x = planted_point(rng, spec.n, 2);
    let y = planted_point(rng, spec.l, 2);
    let joined: Vec<Vec<i64>> = a_rows
        .iter()
        .zip(&b_rows)
        .map(|(p, q)| p.iter().chain(q).copied().collect())
        .collect();
    let point: Vec<i64> = x.iter().chain(&y).copied().collect();
    let Some(b) = right_hand_side(spec, rng, &joined, &point) else {
        return Ok(None);
    };
    let c: Vec<i64> = (0..spec.n).map(|_| rng.gen_range(-3..=3)).collect();
    let d: Vec<i64> = (0..spec.l).map(|_| rng.gen_range(-3..=3)).collect();
    let b_mat = if spec.l == 0 {
        IntMatrix::zeros(spec.m, 0)
    } else {
        IntMatrix::from_rows(&b_rows)
    };
    let mip = MixedIp::new(
        IntMatrix::from_rows(&a_rows),
        b_mat,
        to_bigints(&b),
        to_bigints(&c),
        to_bigints(&d),
    )?;
    let bx = budget.then(|| OracleBox::Nonneg(BigInt::from(b[0])));
    Ok(Some((ProblemInstance::Mixed(mip), bx)))
}

/// Nonsingular `n x n` block with `|det| <= delta`: a lower-triangular
/// factor with a random diagonal times a few random unimodular column moves.
fn nonsingular_block(rng: &mut ChaCha8Rng, n: usize, delta: i64) -> (Vec<Vec<i64>>, i64) {
    let target = rng.gen_range(1..=delta);
    let mut diag = vec![1i64; n];
    let mut rest = target;
    for p in 2..=target {
        while rest % p == 0 {
            diag[rng.gen_range(0..n)] *= p;
            rest /= p;
        }
    }
    let mut t = vec![vec![0i64; n]; n];
    for i in 0..n {
        t[i][i] = diag[i];
        for j in 0..i {
            t[i][j] = rng.gen_range(-1..=1);
        }
    }
    for _ in 0..rng.gen_range(0..=n) {
        let (p, q) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if p == q {
            continue;
        }
        let s = if rng.gen_bool(0.5) { 1 } else { -1 };
        for row in t.iter_mut() {
            row[p] += s * row[q];
        }
    }
    (t, target)
}

fn propose_inequality(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Result<Proposal> {
    let (n, m) = (spec.n, spec.m);
    if m < n {
        return Err(Error::Domain("inequality form needs m >= n".into()));
    }
    let (top, det) = nonsingular_block(rng, n, spec.delta);
    let mut rows = top.clone();
    // Extra rows are integer combinations of the block with nonzero weights,
    // so every n x n minor is a nonzero multiple of det.
    for _ in n..m {
        let max_w = (spec.delta / det).max(1);
        let w: Vec<i64> = (0..n)
            .map(|_| rng.gen_range(1..=max_w) * if rng.gen_bool(0.5) { 1 } else { -1 })
            .collect();
        let row: Vec<i64> = (0..n)
            .map(|j| (0..n).map(|i| w[i] * top[i][j]).sum())
            .collect();
        rows.push(row);
    }
    rows.shuffle(rng);

    let point: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
    let b: Vec<i64> = if spec.planted {
        rows.iter()
            .map(|row| row_dot(row, &point) + rng.gen_range(0..=2))
            .collect()
    } else {
        (0..m)
            .map(|_| rng.gen_range(-spec.rhs_bound..=spec.rhs_bound))
            .collect()
    };
    if b.iter().any(|v| v.abs() > spec.rhs_bound) {
        return Ok(None);
    }
    let c: Vec<i64> = match spec.family {
        Family::Budget => {
            // strictly positive row weights keep the optimal set bounded
            let lam: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=2)).collect();
            (0..n)
                .map(|j| (0..m).map(|i| lam[i] * rows[i][j]).sum())
                .collect()
        }
        Family::Free => (0..n).map(|_| rng.gen_range(-3..=3)).collect(),
    };
    let ip = InequalityIp::new(IntMatrix::from_rows(&rows), to_bigints(&b), to_bigints(&c))?;
    let report = analyze(&ip, &BigInt::from(spec.delta))?;
    if !report.all_ok(n) {
        return Ok(None);
    }
    let floor = spec
        .planted
        .then(|| crate::matrix::dot(&ip.c, &to_bigints(&point)));
    let bx = match inequality_lp_box(&ip, floor.as_ref()) {
        LpBox::Bounded(bx) => Some(OracleBox::Signed(bx)),
        // an empty relaxation has no integer points in any box
        LpBox::Infeasible => Some(OracleBox::Signed(vec![(BigInt::zero(), BigInt::zero()); n])),
        LpBox::Unbounded => None,
    };
    if spec.family == Family::Budget && bx.is_none() {
        return Ok(None);
    }
    if let Some(OracleBox::Signed(ranges)) = &bx {
        if ranges
            .iter()
            .any(|(lo, hi)| (hi - lo).abs() > BigInt::from(60))
        {
            return Ok(None);
        }
    }
    Ok(Some((ProblemInstance::Inequality(ip), bx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::subdet_scan;

    #[test]
    fn deterministic() {
        for spec in [
            GenSpec::standard(4, 2, 3, 9),
            GenSpec::inequality(3, 4, 4, 9),
            GenSpec::mixed(3, 2, 2, 2, 9),
        ] {
            assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        }
    }

    #[test]
    fn unimodular_inequality() {
        let g = generate(&GenSpec::inequality(2, 3, 1, 7)).unwrap();
        let ProblemInstance::Inequality(ip) = g.instance else {
            panic!("wrong form")
        };
        assert_eq!((ip.m(), ip.n()), (3, 2));
        let s = subdet_scan(&ip.a).unwrap();
        assert_eq!(s.delta_max, BigInt::from(1));
        assert!(!s.has_singular_square_submatrix);
    }

    #[test]
    fn standard_entries_in_range() {
        let g = generate(&GenSpec::standard(3, 1, 2, 1)).unwrap();
        let ProblemInstance::Standard(ip) = g.instance else {
            panic!("wrong form")
        };
        assert!(ip.a.entries().iter().all(|v| v.abs() <= BigInt::from(2)));
        assert!(matches!(g.oracle_box, Some(OracleBox::Nonneg(_))));
    }

    #[test]
    fn impossible_spec_exhausts() {
        let spec = GenSpec {
            // a positive planted point never sums to zero on the budget row
            rhs_bound: 0,
            max_attempts: 50,
            ..GenSpec::standard(8, 1, 3, 5)
        };
        assert_eq!(
            generate(&spec),
            Err(Error::GenerationExhausted { attempts: 50 })
        );
    }
}
