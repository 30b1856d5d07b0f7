//! Decomposition solver for standard-form programs with few rows.
//!
//! Some optimal solution splits into a part bounded by a small constant and at
//! most `m` large components whose columns are linearly independent. For
//! every candidate large support the bounded part is found by a targeted
//! right-hand-side DP and the large part by a unique integral solve, so the
//! running time does not depend on the magnitude of `b`.

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::dp::{
    clamp_i128, columns_of, costs_i128, lemma1_bound, run_layers, to_i64, LinearBound, StateMap,
};
use crate::error::{Error, Result};
use crate::instance::{is_valid_ray, Solution, StandardIp};
use crate::linalg::{
    adjugate, circuits, det, gcd_normalize_row, independent_rows, integer_kernel_basis, rank,
    Circuit, NormalizedRow, Sense,
};
use crate::matrix::{dot, IntMatrix};

/// How the cap on the bounded part is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarBoundRule {
    /// `(m + 2)(m Delta)^m` as stated for the worst case.
    Lemma1,
    /// The largest entry of any circuit of `A`, capped by the worst-case
    /// value. The exchange argument only needs kernel vectors of minimal
    /// support, so this cap is equally valid and usually far smaller.
    #[default]
    Circuit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecompOptions {
    pub var_bound: VarBoundRule,
    pub parallel: bool,
}

impl Default for DecompOptions {
    fn default() -> Self {
        DecompOptions {
            var_bound: VarBoundRule::Circuit,
            parallel: true,
        }
    }
}

/// Split of a solution into a bounded part on `S` and a large part on `S-bar`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionWitness {
    /// Columns carrying large components, ascending.
    pub large_support: Vec<usize>,
    pub b_double_prime: Vec<BigInt>,
    /// Values on the complement of `large_support`, ascending column order.
    pub bounded_part: Vec<BigInt>,
    pub large_part: Vec<BigInt>,
}

impl DecompositionWitness {
    pub fn assemble(&self, n: usize) -> Vec<BigInt> {
        let mut x = vec![BigInt::zero(); n];
        let small = (0..n).filter(|j| !self.large_support.contains(j));
        for (j, v) in small.zip(&self.bounded_part) {
            x[j] = v.clone();
        }
        for (&j, v) in self.large_support.iter().zip(&self.large_part) {
            x[j] = v.clone();
        }
        x
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardOutcome {
    pub solution: Solution,
    pub witness: Option<DecompositionWitness>,
    /// Cap used for the bounded part.
    pub var_bound: BigInt,
}

/// Looks for `d >= 0`, `A d = 0`, `c.d > 0` among kernel vectors with at most
/// `m + 1` nonzeros; every extreme ray of `{d >= 0 : A d = 0}` is of this kind.
pub fn detect_unbounded(ip: &StandardIp) -> Option<Vec<BigInt>> {
    ray_from_circuits(&ip.a, &ip.c, &circuits(&ip.a))
}

pub(crate) fn ray_from_circuits(
    a: &IntMatrix,
    c: &[BigInt],
    cs: &[Circuit],
) -> Option<Vec<BigInt>> {
    cs.iter()
        .filter(|k| k.is_sign_definite())
        .map(|k| {
            let d = k.to_dense(a.cols());
            if d.iter().any(|v| v.is_negative()) {
                d.into_iter().map(|v| -v).collect()
            } else {
                d
            }
        })
        .find(|d| dot(c, d).is_positive())
}

/// Rows after gcd normalization, with vanished rows dropped.
pub(crate) enum Normalized {
    Rows { a: IntMatrix, b: Vec<BigInt> },
    Infeasible,
}

pub(crate) fn normalize_rows(a: &IntMatrix, b: &[BigInt]) -> Result<Normalized> {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..a.rows() {
        if a.row(i).iter().all(Zero::is_zero) {
            if !b[i].is_zero() {
                return Ok(Normalized::Infeasible);
            }
            continue;
        }
        match gcd_normalize_row(a.row(i), &b[i], Sense::Equality)? {
            NormalizedRow::Row { row, rhs: r } => {
                rows.push(row);
                rhs.push(r);
            }
            NormalizedRow::Infeasible => return Ok(Normalized::Infeasible),
        }
    }
    let cols = a.cols();
    let a = if rows.is_empty() {
        IntMatrix::zeros(0, cols)
    } else {
        IntMatrix::try_from_rows(rows)?
    };
    Ok(Normalized::Rows { a, b: rhs })
}

/// Cap on the bounded part according to `rule`.
pub(crate) fn bounded_part_cap(
    a: &IntMatrix,
    cs: &[Circuit],
    rule: VarBoundRule,
) -> Result<BigInt> {
    let worst = lemma1_bound(a.rows().max(1), &a.max_abs().max(BigInt::from(1)))?;
    Ok(match rule {
        VarBoundRule::Lemma1 => worst,
        VarBoundRule::Circuit => cs
            .iter()
            .map(Circuit::max_abs)
            .max()
            .unwrap_or_else(BigInt::zero)
            .min(worst),
    })
}

/// Candidate large supports: independent column sets of size at most `rank`,
/// ordered by size and then lexicographically. The empty set comes first.
pub(crate) fn large_supports(a: &IntMatrix) -> Vec<Vec<usize>> {
    let r = rank(a);
    let mut out = Vec::new();
    for size in 0..=r.min(a.cols()) {
        for s in (0..a.cols()).combinations(size) {
            if size == 0 || rank(&a.select_columns(&s)) == size {
                out.push(s);
            }
        }
    }
    out
}

/// Pruning forms that every final sum `v = b''` must satisfy when
/// `b - b''` has to be produced by the columns of `free` with nonnegative
/// multipliers (exact equality when `free` is empty).
pub(crate) fn target_bounds(free: &IntMatrix, b: &[BigInt]) -> Result<Vec<LinearBound>> {
    let m = free.rows();
    let mut bounds = Vec::new();
    let to_form = |v: &[BigInt]| -> Result<Vec<i128>> {
        v.iter()
            .map(|x| crate::dp::to_i128(x, "pruning form"))
            .collect()
    };
    if free.cols() == 0 {
        for (i, bi) in b.iter().enumerate() {
            let mut f = vec![0i128; m];
            f[i] = 1;
            bounds.push(LinearBound::equal(f, clamp_i128(bi)));
        }
        return Ok(bounds);
    }
    // b - v must lie in the column span of `free`
    for p in integer_kernel_basis(&free.transpose()) {
        let target = dot(&p, b);
        bounds.push(LinearBound::equal(to_form(&p)?, clamp_i128(&target)));
    }
    // sign-definite rows of `free` bound v on one side
    for i in 0..m {
        let row = free.row(i);
        let nonneg = row.iter().all(|v| !v.is_negative());
        let nonpos = row.iter().all(|v| !v.is_positive());
        if nonneg == nonpos {
            continue;
        }
        let mut f = vec![0i128; m];
        f[i] = 1;
        let t = clamp_i128(&b[i]);
        bounds.push(LinearBound {
            form: f,
            lo: nonpos.then_some(t),
            hi: nonneg.then_some(t),
            every_layer: false,
        });
    }
    Ok(bounds)
}

/// Unique solve `A_{R,S-bar} y = (b - v)_R` with a fixed adjugate.
pub(crate) struct LargeSolver {
    rows: Vec<usize>,
    adj: IntMatrix,
    det: BigInt,
}

impl LargeSolver {
    pub fn new(large: &IntMatrix) -> Result<Self> {
        let rows = independent_rows(large);
        let d = large.select_rows(&rows);
        let det = det(&d)?;
        if det.is_zero() {
            return Err(Error::Invariant(
                "large support columns are dependent".into(),
            ));
        }
        Ok(LargeSolver {
            adj: adjugate(&d)?,
            rows,
            det,
        })
    }

    /// `y >= 0` expressed as forms on the final sum `v`:
    /// `sign(det) * adj_i . (b_R - v_R) >= 0`.
    pub fn cone_bounds(&self, m: usize, b: &[BigInt]) -> Result<Vec<LinearBound>> {
        let s = if self.det.is_negative() { -1 } else { 1 };
        let b_r: Vec<BigInt> = self.rows.iter().map(|&i| b[i].clone()).collect();
        let mut out = Vec::with_capacity(self.rows.len());
        for i in 0..self.adj.rows() {
            let mut form = vec![0i128; m];
            for (k, &r) in self.rows.iter().enumerate() {
                form[r] = -s * crate::dp::to_i128(self.adj.get(i, k), "adjugate entry")?;
            }
            let lo = -BigInt::from(s) * dot(self.adj.row(i), &b_r);
            out.push(LinearBound {
                form,
                lo: Some(clamp_i128(&lo)),
                hi: None,
                every_layer: false,
            });
        }
        Ok(out)
    }

    /// The large part for final sum `v`, when integral. Nonnegativity and
    /// consistency of the other rows are guaranteed by the pruning forms.
    pub fn solve(&self, b: &[BigInt], v: &[i64]) -> Option<Vec<BigInt>> {
        let rhs: Vec<BigInt> = self
            .rows
            .iter()
            .map(|&i| &b[i] - BigInt::from(v[i]))
            .collect();
        let mut y = Vec::with_capacity(self.adj.rows());
        for i in 0..self.adj.rows() {
            let num = dot(self.adj.row(i), &rhs);
            if !(&num % &self.det).is_zero() {
                return None;
            }
            y.push(num / &self.det);
        }
        Some(y)
    }
}

struct Candidate {
    value: BigInt,
    x: Vec<BigInt>,
    witness: DecompositionWitness,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        self.value > other.value || (self.value == other.value && self.x < other.x)
    }
}

fn pick(best: Option<Candidate>, cand: Option<Candidate>) -> Option<Candidate> {
    match (best, cand) {
        (Some(a), Some(b)) => Some(if b.beats(&a) { b } else { a }),
        (a, b) => a.or(b),
    }
}

pub(crate) fn small_columns(n: usize, large: &[usize]) -> Vec<usize> {
    (0..n).filter(|j| !large.contains(j)).collect()
}

/// Runs the targeted DP for one large support and returns its final states.
pub(crate) fn bounded_states(
    a: &IntMatrix,
    b: &[BigInt],
    cost: &[i128],
    cap: i64,
    large: &[usize],
    free: &IntMatrix,
    extra: Vec<LinearBound>,
) -> Result<StateMap> {
    let small = small_columns(a.cols(), large);
    let columns = columns_of(a, &small, cost, cap)?;
    let mut bounds = target_bounds(free, b)?;
    bounds.extend(extra);
    run_layers(a.rows(), &columns, &bounds)
}

fn best_for_support(
    a: &IntMatrix,
    b: &[BigInt],
    c: &[BigInt],
    cost: &[i128],
    cap: i64,
    large: &[usize],
) -> Result<Option<Candidate>> {
    let n = a.cols();
    let free = a.select_columns(large);
    let (solver, extra) = if large.is_empty() {
        (None, Vec::new())
    } else {
        let s = LargeSolver::new(&free)?;
        let extra = s.cone_bounds(a.rows(), b)?;
        (Some(s), extra)
    };
    let states = bounded_states(a, b, cost, cap, large, &free, extra)?;
    let small = small_columns(n, large);
    let mut best: Option<Candidate> = None;
    for (v, st) in states {
        let large_part = match &solver {
            None => Vec::new(),
            Some(s) => match s.solve(b, &v) {
                Some(y) => y,
                None => continue,
            },
        };
        if large_part.iter().any(|y| y.is_negative()) {
            return Err(Error::Invariant(
                "pruned search produced a negative large part".into(),
            ));
        }
        let bounded_part: Vec<BigInt> = st.assignment.iter().map(|&t| BigInt::from(t)).collect();
        let mut value = BigInt::from(st.value);
        for (&j, y) in large.iter().zip(&large_part) {
            value += &c[j] * y;
        }
        let witness = DecompositionWitness {
            large_support: large.to_vec(),
            b_double_prime: v.iter().map(|&t| BigInt::from(t)).collect(),
            bounded_part,
            large_part,
        };
        let x = witness.assemble(n);
        debug_assert_eq!(small.len(), witness.bounded_part.len());
        best = pick(best, Some(Candidate { value, x, witness }));
    }
    Ok(best)
}

/// Exact status and optimum of `max { c.x : A x = b, x >= 0, x integer }`.
pub fn solve_standard(ip: &StandardIp) -> Result<Solution> {
    Ok(solve_standard_with(ip, &DecompOptions::default())?.solution)
}

pub fn solve_standard_with(ip: &StandardIp, opts: &DecompOptions) -> Result<StandardOutcome> {
    let n = ip.n();
    let (a, b) = match normalize_rows(&ip.a, &ip.b)? {
        Normalized::Infeasible => {
            return Ok(StandardOutcome {
                solution: Solution::infeasible(),
                witness: None,
                var_bound: BigInt::zero(),
            })
        }
        Normalized::Rows { a, b } => (a, b),
    };
    if a.rows() == 0 {
        return Ok(no_rows_outcome(ip));
    }

    let cs = circuits(&a);
    let cap_big = bounded_part_cap(&a, &cs, opts.var_bound)?;
    let cap = to_i64(&cap_big, "bounded-part cap")?;
    let cost = costs_i128(&ip.c)?;
    let supports = large_supports(&a);
    log::debug!(
        "decomposition: m={} n={} cap={} supports={}",
        a.rows(),
        n,
        cap,
        supports.len()
    );

    let eval = |large: &Vec<usize>| best_for_support(&a, &b, &ip.c, &cost, cap, large);
    let results: Vec<Result<Option<Candidate>>> = if opts.parallel {
        supports.par_iter().map(eval).collect()
    } else {
        supports.iter().map(eval).collect()
    };
    let mut best = None;
    for r in results {
        best = pick(best, r?);
    }

    let Some(best) = best else {
        return Ok(StandardOutcome {
            solution: Solution::infeasible(),
            witness: None,
            var_bound: cap_big,
        });
    };

    // Express the witness against the caller's (unnormalized) matrix.
    let mut witness = best.witness;
    let small = small_columns(n, &witness.large_support);
    witness.b_double_prime = ip.a.select_columns(&small).mul_vec(&witness.bounded_part)?;
    if !verify_witness(ip, &witness) || !ip.is_feasible(&best.x) {
        return Err(Error::Invariant(
            "decomposition witness failed re-verification".into(),
        ));
    }

    if let Some(d) = ray_from_circuits(&a, &ip.c, &cs) {
        if !is_valid_ray(&ip.a, &ip.c, &d) {
            return Err(Error::Invariant(
                "unbounded direction failed re-verification".into(),
            ));
        }
        return Ok(StandardOutcome {
            solution: Solution::unbounded(d, Some(best.x)),
            witness: Some(witness),
            var_bound: cap_big,
        });
    }
    Ok(StandardOutcome {
        solution: Solution::optimal(best.x, best.value),
        witness: Some(witness),
        var_bound: cap_big,
    })
}

/// All constraints vanished: every `x >= 0` is feasible.
fn no_rows_outcome(ip: &StandardIp) -> StandardOutcome {
    let n = ip.n();
    let zero = vec![BigInt::zero(); n];
    let witness = DecompositionWitness {
        large_support: Vec::new(),
        b_double_prime: vec![BigInt::zero(); ip.m()],
        bounded_part: zero.clone(),
        large_part: Vec::new(),
    };
    let solution = match ip.c.iter().position(|v| v.is_positive()) {
        Some(j) => {
            let mut d = zero.clone();
            d[j] = BigInt::from(1);
            Solution::unbounded(d, Some(zero))
        }
        None => Solution::optimal(zero, BigInt::zero()),
    };
    StandardOutcome {
        solution,
        witness: Some(witness),
        var_bound: BigInt::zero(),
    }
}

/// Re-checks every structural property of a witness against `ip`.
pub fn verify_witness(ip: &StandardIp, w: &DecompositionWitness) -> bool {
    let n = ip.n();
    let m = ip.m();
    let large = &w.large_support;
    if large.len() > m
        || large.iter().any(|&j| j >= n)
        || !large.windows(2).all(|p| p[0] < p[1])
        || w.large_part.len() != large.len()
        || w.bounded_part.len() + large.len() != n
        || w.b_double_prime.len() != m
    {
        return false;
    }
    if !large.is_empty() && rank(&ip.a.select_columns(large)) != large.len() {
        return false;
    }
    let Ok(cap) = lemma1_bound(m, &ip.delta().max(BigInt::from(1))) else {
        return false;
    };
    if w.bounded_part.iter().any(|v| v.is_negative() || v > &cap)
        || w.large_part.iter().any(|v| v.is_negative())
    {
        return false;
    }
    let small = small_columns(n, large);
    let Ok(bpp) = ip.a.select_columns(&small).mul_vec(&w.bounded_part) else {
        return false;
    };
    if bpp != w.b_double_prime {
        return false;
    }
    let Ok(lp) = ip.a.select_columns(large).mul_vec(&w.large_part) else {
        return false;
    };
    let rest: Vec<BigInt> = ip.b.iter().zip(&bpp).map(|(b, v)| b - v).collect();
    if lp != rest {
        return false;
    }
    ip.is_feasible(&w.assemble(n))
}

/// Number of large supports examined for `ip`; useful for diagnostics.
pub fn support_count(ip: &StandardIp) -> usize {
    large_supports(&ip.a).len()
}
