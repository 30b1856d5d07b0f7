//! Mixed-integer programs `max { c.x + d.y : A x + B y = b, x, y >= 0, x integer }`.
//!
//! The integer part splits like the pure case: a bounded part found by the
//! targeted DP and at most `m` large components on independent columns. The
//! large components and the continuous variables are handled together by a
//! branch-and-bound over an exact LP.
//!
//! Branch-and-bound works inside a proximity box. Let `z` be an optimal LP
//! vertex and `(x*, y*)` an optimal mixed solution. Their difference lies in
//! the kernel of `[A | B]` and is a conformal sum of at most `cols - rank`
//! circuits with positive weights. Stripping the integer parts of the weights
//! yields another optimal solution within `(cols - rank) * max circuit entry`
//! of `z` in every coordinate, so the box never cuts off the optimum.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::decomp::{
    bounded_part_cap, bounded_states, large_supports, ray_from_circuits, small_columns,
    VarBoundRule,
};
use crate::dp::{costs_i128, to_i64};
use crate::error::{Error, Result};
use crate::instance::{MixedIp, Solution};
use crate::linalg::{circuits, rank};
use crate::matrix::{dot, IntMatrix};
use crate::simplex::{primitive_integer, rat, rational_simplex, LpOutcome, RationalLp};

pub const DEFAULT_NODE_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KappaOptions {
    pub node_limit: usize,
}

impl Default for KappaOptions {
    fn default() -> Self {
        KappaOptions {
            node_limit: DEFAULT_NODE_LIMIT,
        }
    }
}

/// `max obj.(x, y)` over `a (x, y) = rhs`, `(x, y) >= 0`, with the first
/// `n_int` variables integer.
#[derive(Debug, Clone)]
struct Milp {
    a: IntMatrix,
    rhs: Vec<BigInt>,
    obj: Vec<BigInt>,
    n_int: usize,
}

#[derive(Debug, Clone)]
enum MilpOutcome {
    Optimal {
        x: Vec<BigInt>,
        y: Vec<BigRational>,
        value: BigRational,
    },
    Infeasible,
    Unbounded {
        ray: Vec<BigInt>,
        point: (Vec<BigInt>, Vec<BigRational>),
    },
    /// The LP bound is strictly below the caller's threshold.
    Pruned,
}

type Bounds = Vec<(BigInt, Option<BigInt>)>;

impl Milp {
    fn cols(&self) -> usize {
        self.a.cols()
    }

    /// LP relaxation with integer bounds as extra rows over fresh slacks.
    fn relaxation(&self, bounds: &[(BigInt, Option<BigInt>)]) -> RationalLp {
        let cols = self.cols();
        let mut extra: Vec<(usize, bool, BigInt)> = Vec::new();
        for (j, (lo, hi)) in bounds.iter().enumerate() {
            if lo.is_positive() {
                extra.push((j, false, lo.clone()));
            }
            if let Some(h) = hi {
                extra.push((j, true, h.clone()));
            }
        }
        let width = cols + extra.len();
        let zero = BigRational::zero();
        let mut rows = Vec::with_capacity(self.a.rows() + extra.len());
        let mut rhs = Vec::with_capacity(rows.capacity());
        for i in 0..self.a.rows() {
            let mut row: Vec<BigRational> = self.a.row(i).iter().map(rat).collect();
            row.resize(width, zero.clone());
            rows.push(row);
            rhs.push(rat(&self.rhs[i]));
        }
        for (k, (j, upper, v)) in extra.into_iter().enumerate() {
            let mut row = vec![zero.clone(); width];
            row[j] = BigRational::one();
            row[cols + k] = if upper {
                BigRational::one()
            } else {
                -BigRational::one()
            };
            rows.push(row);
            rhs.push(rat(&v));
        }
        let mut obj: Vec<BigRational> = self.obj.iter().map(rat).collect();
        obj.resize(width, zero);
        RationalLp {
            a: rows,
            b: rhs,
            c: obj,
        }
    }

    /// Coordinate radius of the proximity box around an LP optimum.
    fn proximity_radius(&self) -> BigInt {
        let k = circuits(&self.a)
            .iter()
            .map(|c| c.max_abs())
            .max()
            .unwrap_or_else(BigInt::zero);
        BigInt::from(self.cols() - rank(&self.a)) * k
    }

    fn with_zero_objective(&self) -> Milp {
        Milp {
            obj: vec![BigInt::zero(); self.cols()],
            ..self.clone()
        }
    }
}

fn split_point(p: &Milp, x: &[BigRational]) -> (Vec<BigInt>, Vec<BigRational>) {
    let xi = x[..p.n_int].iter().map(|v| v.to_integer()).collect();
    let y = x[p.n_int..p.cols()].to_vec();
    (xi, y)
}

fn solve_milp(p: &Milp, node_limit: usize, threshold: Option<&BigRational>) -> Result<MilpOutcome> {
    let free: Bounds = vec![(BigInt::zero(), None); p.n_int];
    let z = match rational_simplex(&p.relaxation(&free)) {
        LpOutcome::Infeasible => return Ok(MilpOutcome::Infeasible),
        LpOutcome::Unbounded { ray } => {
            return Ok(
                match solve_milp(&p.with_zero_objective(), node_limit, None)? {
                    MilpOutcome::Optimal { x, y, .. } => MilpOutcome::Unbounded {
                        ray: primitive_integer(&ray[..p.cols()]),
                        point: (x, y),
                    },
                    _ => MilpOutcome::Infeasible,
                },
            );
        }
        LpOutcome::Optimal { x, value } => {
            if threshold.is_some_and(|t| &value < t) {
                return Ok(MilpOutcome::Pruned);
            }
            x
        }
    };
    if p.n_int == 0 {
        let (x, y) = split_point(p, &z);
        let value = objective(p, &x, &y);
        return Ok(MilpOutcome::Optimal { x, y, value });
    }

    let radius = rat(&p.proximity_radius());
    let root: Bounds = z[..p.n_int]
        .iter()
        .map(|v| {
            let lo = (v - &radius).ceil().to_integer().max(BigInt::zero());
            let hi = (v + &radius).floor().to_integer();
            (lo, Some(hi))
        })
        .collect();

    let mut best: Option<(BigRational, Vec<BigRational>)> = None;
    let mut stack = vec![root];
    let mut nodes = 0usize;
    while let Some(bounds) = stack.pop() {
        nodes += 1;
        if nodes > node_limit {
            return Err(Error::NodeLimit(node_limit));
        }
        if bounds
            .iter()
            .any(|(lo, hi)| hi.as_ref().is_some_and(|h| h < lo))
        {
            continue;
        }
        let (x, value) = match rational_simplex(&p.relaxation(&bounds)) {
            LpOutcome::Optimal { x, value } => (x, value),
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded { .. } => {
                return Err(Error::Invariant(
                    "bounded relaxation became unbounded".into(),
                ))
            }
        };
        if best.as_ref().is_some_and(|(b, _)| &value <= b) {
            continue;
        }
        match (0..p.n_int).find(|&j| !x[j].is_integer()) {
            None => best = Some((value, x)),
            Some(j) => {
                let f = &x[j];
                let mut up = bounds.clone();
                up[j].0 = f.ceil().to_integer();
                let mut down = bounds;
                down[j].1 = Some(f.floor().to_integer());
                // the floor branch is explored first
                stack.push(up);
                stack.push(down);
            }
        }
    }
    Ok(match best {
        None => MilpOutcome::Infeasible,
        Some((value, x)) => {
            let (xi, y) = split_point(p, &x);
            MilpOutcome::Optimal { x: xi, y, value }
        }
    })
}

fn objective(p: &Milp, x: &[BigInt], y: &[BigRational]) -> BigRational {
    let xi = rat(&dot(&p.obj[..p.n_int], x));
    let yc: BigRational = p.obj[p.n_int..]
        .iter()
        .zip(y)
        .map(|(o, v)| rat(o) * v)
        .sum();
    xi + yc
}

/// Among optimal solutions of value `value`, the one with the
/// lexicographically smallest integer part.
fn lex_refine(
    p: &Milp,
    value: &BigRational,
    node_limit: usize,
) -> Result<(Vec<BigInt>, Vec<BigRational>)> {
    let cols = p.cols();
    let mut rows = p.a.to_rows();
    let mut rhs = p.rhs.clone();
    // obj . (x, y) = value, scaled to integers
    let q = value.denom().clone();
    rows.push(p.obj.iter().map(|v| v * &q).collect());
    rhs.push(value.numer().clone());
    let mut fixed = Vec::with_capacity(p.n_int);
    for j in 0..p.n_int {
        let mut obj = vec![BigInt::zero(); cols];
        obj[j] = -BigInt::one();
        let sub = Milp {
            a: IntMatrix::try_from_rows(rows.clone())?,
            rhs: rhs.clone(),
            obj,
            n_int: p.n_int,
        };
        let t = match solve_milp(&sub, node_limit, None)? {
            MilpOutcome::Optimal { x, .. } => x[j].clone(),
            _ => {
                return Err(Error::Invariant(
                    "optimal face lost during refinement".into(),
                ))
            }
        };
        let mut unit = vec![BigInt::zero(); cols];
        unit[j] = BigInt::one();
        rows.push(unit);
        rhs.push(t.clone());
        fixed.push(t);
    }
    let sub = Milp {
        a: IntMatrix::try_from_rows(rows)?,
        rhs,
        obj: p.obj.clone(),
        n_int: p.n_int,
    };
    let free: Bounds = vec![(BigInt::zero(), None); p.n_int];
    match rational_simplex(&sub.relaxation(&free)) {
        LpOutcome::Optimal { x, value: v } if &v == value => {
            let y = x[p.n_int..cols].to_vec();
            Ok((fixed, y))
        }
        _ => Err(Error::Invariant(
            "refined point does not attain the optimum".into(),
        )),
    }
}

fn kappa_milp(sub: &MixedIp) -> Result<Milp> {
    let a = sub.a.hstack(&sub.b_mat)?;
    let mut obj = sub.c.clone();
    obj.extend(sub.d.iter().cloned());
    Ok(Milp {
        a,
        rhs: sub.b.clone(),
        obj,
        n_int: sub.n(),
    })
}

/// Exact optimum of a mixed program whose integer columns are linearly
/// independent, by branch-and-bound over exact LPs. Ties go to the
/// lexicographically smallest integer part.
pub fn kappa_solve(sub: &MixedIp) -> Result<Solution> {
    kappa_solve_with(sub, &KappaOptions::default())
}

pub fn kappa_solve_with(sub: &MixedIp, opts: &KappaOptions) -> Result<Solution> {
    if rank(&sub.a) != sub.n() {
        return Err(Error::Precondition(
            "integer columns must be linearly independent".into(),
        ));
    }
    let p = kappa_milp(sub)?;
    Ok(match solve_milp(&p, opts.node_limit, None)? {
        MilpOutcome::Infeasible | MilpOutcome::Pruned => Solution::infeasible(),
        MilpOutcome::Unbounded { ray, point } => mixed_unbounded(ray, point),
        MilpOutcome::Optimal { value, .. } => {
            let (x, y) = lex_refine(&p, &value, opts.node_limit)?;
            Solution::optimal_mixed(x, y, value)
        }
    })
}

fn mixed_unbounded(ray: Vec<BigInt>, point: (Vec<BigInt>, Vec<BigRational>)) -> Solution {
    let mut s = Solution::unbounded(ray, Some(point.0));
    s.y = Some(point.1);
    s
}

/// A candidate for one large support and one bounded-part sum.
struct MixedCandidate {
    value: BigRational,
    /// Assembled integer vector before refinement of the large part.
    x: Vec<BigInt>,
    y: Vec<BigRational>,
    large: Vec<usize>,
    bounded: Vec<BigInt>,
    sub_rhs: Vec<BigInt>,
}

fn assemble(n: usize, large: &[usize], bounded: &[BigInt], large_part: &[BigInt]) -> Vec<BigInt> {
    let mut x = vec![BigInt::zero(); n];
    for (j, v) in small_columns(n, large).into_iter().zip(bounded) {
        x[j] = v.clone();
    }
    for (&j, v) in large.iter().zip(large_part) {
        x[j] = v.clone();
    }
    x
}

/// Best candidates (all ties kept) for one large support.
fn candidates_for_support(
    mip: &MixedIp,
    obj: (&[BigInt], &[BigInt]),
    cap: i64,
    large: &[usize],
    node_limit: usize,
) -> Result<Vec<MixedCandidate>> {
    let (c, d) = obj;
    let n = mip.n();
    let free = mip.a.select_columns(large).hstack(&mip.b_mat)?;
    let cost = costs_i128(c)?;
    let states = bounded_states(&mip.a, &mip.b, &cost, cap, large, &free, Vec::new())?;
    let mut states: Vec<_> = states.into_iter().collect();
    // highest bounded value first tightens the threshold early
    states.sort_by(|(ka, sa), (kb, sb)| sb.value.cmp(&sa.value).then_with(|| ka.cmp(kb)));

    let mut sub_obj: Vec<BigInt> = large.iter().map(|&j| c[j].clone()).collect();
    sub_obj.extend(d.iter().cloned());
    let mut best: Vec<MixedCandidate> = Vec::new();
    for (v, st) in states {
        let sub_rhs: Vec<BigInt> = mip
            .b
            .iter()
            .zip(&v)
            .map(|(bi, &vi)| bi - BigInt::from(vi))
            .collect();
        let p = Milp {
            a: free.clone(),
            rhs: sub_rhs.clone(),
            obj: sub_obj.clone(),
            n_int: large.len(),
        };
        let base = BigRational::from_integer(BigInt::from(st.value));
        let threshold = best.first().map(|b| &b.value - &base);
        let (xl, y, sub_value) = match solve_milp(&p, node_limit, threshold.as_ref())? {
            MilpOutcome::Optimal { x, y, value } => (x, y, value),
            MilpOutcome::Infeasible | MilpOutcome::Pruned => continue,
            MilpOutcome::Unbounded { .. } => {
                return Err(Error::Invariant(
                    "subproblem unbounded although the program has no improving ray".into(),
                ))
            }
        };
        let bounded: Vec<BigInt> = st.assignment.iter().map(|&t| BigInt::from(t)).collect();
        let cand = MixedCandidate {
            value: base + sub_value,
            x: assemble(n, large, &bounded, &xl),
            y,
            large: large.to_vec(),
            bounded,
            sub_rhs,
        };
        match best.first().map(|b| cand.value.cmp(&b.value)) {
            None | Some(std::cmp::Ordering::Greater) => best = vec![cand],
            Some(std::cmp::Ordering::Equal) => best.push(cand),
            Some(std::cmp::Ordering::Less) => {}
        }
    }
    Ok(best)
}

/// Searches all large supports; returns every candidate of the best value.
fn search(
    mip: &MixedIp,
    c: &[BigInt],
    d: &[BigInt],
    node_limit: usize,
) -> Result<Vec<MixedCandidate>> {
    let a_cs = circuits(&mip.a);
    let cap = to_i64(
        &bounded_part_cap(&mip.a, &a_cs, VarBoundRule::Circuit)?,
        "bounded-part cap",
    )?;
    let supports = large_supports(&mip.a);
    log::debug!(
        "mixed decomposition: m={} n={} l={} cap={} supports={}",
        mip.m(),
        mip.n(),
        mip.l(),
        cap,
        supports.len()
    );
    let results: Vec<Result<Vec<MixedCandidate>>> = supports
        .par_iter()
        .map(|s| candidates_for_support(mip, (c, d), cap, s, node_limit))
        .collect();
    let mut best: Vec<MixedCandidate> = Vec::new();
    for r in results {
        for cand in r? {
            match best.first().map(|b| cand.value.cmp(&b.value)) {
                None | Some(std::cmp::Ordering::Greater) => best = vec![cand],
                Some(std::cmp::Ordering::Equal) => best.push(cand),
                Some(std::cmp::Ordering::Less) => {}
            }
        }
    }
    Ok(best)
}

/// Exact optimum of a mixed-integer program. The objective is an exact
/// rational; ties go to the lexicographically smallest integer vector among
/// the decomposition candidates.
pub fn solve_mixed(mip: &MixedIp) -> Result<Solution> {
    solve_mixed_with(mip, &KappaOptions::default())
}

pub fn solve_mixed_with(mip: &MixedIp, opts: &KappaOptions) -> Result<Solution> {
    let (n, l) = (mip.n(), mip.l());
    let ab = mip.a.hstack(&mip.b_mat)?;
    let mut cd = mip.c.clone();
    cd.extend(mip.d.iter().cloned());

    if let Some(ray) = ray_from_circuits(&ab, &cd, &circuits(&ab)) {
        let zc = vec![BigInt::zero(); n];
        let zd = vec![BigInt::zero(); l];
        let found = search(mip, &zc, &zd, opts.node_limit)?;
        let Some(first) = found.into_iter().min_by(|p, q| p.x.cmp(&q.x)) else {
            return Ok(Solution::infeasible());
        };
        check_mixed(mip, &first.x, &first.y)?;
        return Ok(mixed_unbounded(ray, (first.x, first.y)));
    }

    let best = search(mip, &mip.c, &mip.d, opts.node_limit)?;
    if best.is_empty() {
        return Ok(Solution::infeasible());
    }
    let value = best[0].value.clone();
    let mut winner: Option<(Vec<BigInt>, Vec<BigRational>)> = None;
    for cand in best {
        let (x, y) = if cand.large.is_empty() {
            (cand.x, cand.y)
        } else {
            let p = Milp {
                a: mip.a.select_columns(&cand.large).hstack(&mip.b_mat)?,
                rhs: cand.sub_rhs.clone(),
                obj: cand
                    .large
                    .iter()
                    .map(|&j| mip.c[j].clone())
                    .chain(mip.d.iter().cloned())
                    .collect(),
                n_int: cand.large.len(),
            };
            let sub_value = &value
                - BigRational::from_integer(dot(
                    &small_columns(n, &cand.large)
                        .iter()
                        .map(|&j| mip.c[j].clone())
                        .collect::<Vec<_>>(),
                    &cand.bounded,
                ));
            let (xl, y) = lex_refine(&p, &sub_value, opts.node_limit)?;
            (assemble(n, &cand.large, &cand.bounded, &xl), y)
        };
        if winner.as_ref().is_none_or(|(wx, _)| &x < wx) {
            winner = Some((x, y));
        }
    }
    let (x, y) = winner.expect("at least one candidate");
    check_mixed(mip, &x, &y)?;
    if mip.objective(&x, &y) != value {
        return Err(Error::Invariant("mixed objective mismatch".into()));
    }
    Ok(Solution::optimal_mixed(x, y, value))
}

fn check_mixed(mip: &MixedIp, x: &[BigInt], y: &[BigRational]) -> Result<()> {
    if mip.is_feasible(x, y) {
        Ok(())
    } else {
        Err(Error::Invariant(
            "mixed solution failed re-substitution".into(),
        ))
    }
}

/// Checks an unbounded direction over `(x, y)` for a mixed program.
pub fn is_valid_mixed_ray(mip: &MixedIp, dir: &[BigInt]) -> bool {
    let Ok(ab) = mip.a.hstack(&mip.b_mat) else {
        return false;
    };
    let mut cd = mip.c.clone();
    cd.extend(mip.d.iter().cloned());
    crate::instance::is_valid_ray(&ab, &cd, dir)
}
