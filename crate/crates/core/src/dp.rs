//! Dynamic programming over right-hand sides for bounded standard-form programs.
//!
//! The engine walks the columns in index order. A state is the partial sum
//! `sum_{j<k} A_j x_j`; every state keeps the best objective reaching it and
//! the lexicographically smallest prefix attaining that objective. Since any
//! two prefixes meeting in a state share all completions, this yields the
//! lexicographically smallest optimal assignment overall.
//!
//! States are pruned with interval arithmetic on linear forms of the final
//! sum (for example "row i must end at b_i"); pruning never removes a state
//! that can still complete, so the result equals the unpruned recursion.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::instance::{Solution, StandardIp};
use crate::matrix::IntMatrix;

/// Values beyond this magnitude are treated as out of reach for enumeration.
pub(crate) const ENUM_LIMIT: i128 = 1 << 62;
const FAR: i128 = 1 << 100;

/// `(n + 1) (m * Delta(A, b))^m`: some optimal solution of a feasible,
/// bounded standard-form program has all components at most this value.
pub fn papadimitriou_bound(ip: &StandardIp) -> BigInt {
    let n = BigInt::from(ip.n() + 1);
    let base = BigInt::from(ip.m()) * ip.delta_ab();
    n * Pow::pow(&base, ip.m())
}

/// `(m + 2) (m * Delta)^m`: all but at most `m` components of some optimal
/// solution stay below this value.
pub fn lemma1_bound(m: usize, delta: &BigInt) -> Result<BigInt> {
    if m < 1 {
        return Err(Error::Domain("row count must be at least 1".into()));
    }
    if delta < &BigInt::one() {
        return Err(Error::Domain("coefficient bound must be at least 1".into()));
    }
    let base = BigInt::from(m) * delta;
    Ok(BigInt::from(m + 2) * Pow::pow(&base, m))
}

#[derive(Debug, Clone)]
pub(crate) struct DpColumn {
    pub coeffs: Vec<i64>,
    pub cost: i128,
    pub ub: i64,
}

/// `lo <= form . v <= hi` on the final sum, or on every partial sum when
/// `every_layer` is set.
#[derive(Debug, Clone)]
pub(crate) struct LinearBound {
    pub form: Vec<i128>,
    pub lo: Option<i128>,
    pub hi: Option<i128>,
    pub every_layer: bool,
}

impl LinearBound {
    pub fn equal(form: Vec<i128>, target: i128) -> Self {
        LinearBound {
            form,
            lo: Some(target),
            hi: Some(target),
            every_layer: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct DpState {
    pub value: i128,
    pub assignment: Vec<i64>,
}

impl DpState {
    fn beats(&self, other: &DpState) -> bool {
        self.value > other.value
            || (self.value == other.value && self.assignment < other.assignment)
    }
}

pub(crate) type StateMap = HashMap<Vec<i64>, DpState>;

struct Prepared {
    /// per bound: column contributions `form . A_j`
    gains: Vec<Vec<i128>>,
    /// per bound, per layer k: range of what columns k.. can still add
    rem_lo: Vec<Vec<i128>>,
    rem_hi: Vec<Vec<i128>>,
}

fn prepare(columns: &[DpColumn], bounds: &[LinearBound]) -> Prepared {
    let n = columns.len();
    let mut gains = Vec::with_capacity(bounds.len());
    let mut rem_lo = Vec::with_capacity(bounds.len());
    let mut rem_hi = Vec::with_capacity(bounds.len());
    for bd in bounds {
        let g: Vec<i128> = columns
            .iter()
            .map(|col| {
                col.coeffs
                    .iter()
                    .zip(&bd.form)
                    .fold(0i128, |acc, (&a, &f)| {
                        acc.saturating_add(f.saturating_mul(a as i128))
                    })
            })
            .collect();
        let mut lo = vec![0i128; n + 1];
        let mut hi = vec![0i128; n + 1];
        if !bd.every_layer {
            for k in (0..n).rev() {
                let span = g[k].saturating_mul(columns[k].ub as i128);
                lo[k] = lo[k + 1].saturating_add(span.min(0));
                hi[k] = hi[k + 1].saturating_add(span.max(0));
            }
        }
        gains.push(g);
        rem_lo.push(lo);
        rem_hi.push(hi);
    }
    Prepared {
        gains,
        rem_lo,
        rem_hi,
    }
}

fn form_value(form: &[i128], v: &[i64]) -> i128 {
    form.iter().zip(v).fold(0i128, |acc, (&f, &x)| {
        acc.saturating_add(f.saturating_mul(x as i128))
    })
}

/// Window `[L, H]` that `form . v` must lie in before processing column `k`.
fn window(bd: &LinearBound, prep: &Prepared, p: usize, k: usize) -> (i128, i128) {
    let lo = bd
        .lo
        .map_or(-FAR, |lo| lo.saturating_sub(prep.rem_hi[p][k]));
    let hi = bd.hi.map_or(FAR, |hi| hi.saturating_sub(prep.rem_lo[p][k]));
    (lo, hi)
}

/// Runs the layered recursion and returns the final states.
pub(crate) fn run_layers(
    m: usize,
    columns: &[DpColumn],
    bounds: &[LinearBound],
) -> Result<StateMap> {
    let prep = prepare(columns, bounds);
    let mut states: StateMap = HashMap::new();
    let origin = vec![0i64; m];
    let start_ok = bounds.iter().enumerate().all(|(p, bd)| {
        let (lo, hi) = window(bd, &prep, p, 0);
        lo <= 0 && 0 <= hi
    });
    if !start_ok {
        return Ok(states);
    }
    states.insert(
        origin,
        DpState {
            value: 0,
            assignment: Vec::new(),
        },
    );

    for (k, col) in columns.iter().enumerate() {
        let mut next: StateMap = HashMap::with_capacity(states.len());
        let zero_column = col.coeffs.iter().all(|&a| a == 0);
        for (v, st) in states {
            let (t_lo, t_hi) = if zero_column {
                // state unchanged, so only the best multiplier matters
                let t = if col.cost > 0 { col.ub } else { 0 };
                (t, t)
            } else {
                let mut t_lo: i128 = 0;
                let mut t_hi: i128 = col.ub as i128;
                for (p, bd) in bounds.iter().enumerate() {
                    let s = form_value(&bd.form, &v);
                    let g = prep.gains[p][k];
                    let (lo, hi) = window(bd, &prep, p, k + 1);
                    if g == 0 {
                        if s < lo || s > hi {
                            t_hi = -1;
                        }
                    } else if g > 0 {
                        t_lo = t_lo.max(Integer::div_ceil(&(lo - s), &g));
                        t_hi = t_hi.min(Integer::div_floor(&(hi - s), &g));
                    } else {
                        t_lo = t_lo.max(Integer::div_ceil(&(hi - s), &g));
                        t_hi = t_hi.min(Integer::div_floor(&(lo - s), &g));
                    }
                    if t_lo > t_hi {
                        break;
                    }
                }
                if t_lo > t_hi {
                    continue;
                }
                (t_lo as i64, t_hi as i64)
            };
            for t in t_lo..=t_hi {
                let mut key = v.clone();
                for (slot, &a) in key.iter_mut().zip(&col.coeffs) {
                    *slot = a
                        .checked_mul(t)
                        .and_then(|d| slot.checked_add(d))
                        .filter(|x| (*x as i128).abs() < ENUM_LIMIT)
                        .ok_or_else(|| Error::Overflow("partial sum".into()))?;
                }
                let value = st.value + col.cost * t as i128;
                let mut assignment = Vec::with_capacity(k + 1);
                assignment.extend_from_slice(&st.assignment);
                assignment.push(t);
                let cand = DpState { value, assignment };
                match next.get_mut(&key) {
                    Some(old) => {
                        if cand.beats(old) {
                            *old = cand;
                        }
                    }
                    None => {
                        next.insert(key, cand);
                    }
                }
            }
        }
        states = next;
    }
    Ok(states)
}

pub(crate) fn to_i64(v: &BigInt, what: &str) -> Result<i64> {
    v.to_i64()
        .filter(|x| (*x as i128).abs() < ENUM_LIMIT)
        .ok_or_else(|| Error::Overflow(format!("{what} = {v}")))
}

pub(crate) fn to_i128(v: &BigInt, what: &str) -> Result<i128> {
    v.to_i128()
        .filter(|x| x.abs() < FAR)
        .ok_or_else(|| Error::Overflow(format!("{what} = {v}")))
}

/// Clamps to the engine's "far away" range; used for targets that partial
/// sums can never approach.
pub(crate) fn clamp_i128(v: &BigInt) -> i128 {
    v.to_i128()
        .map(|x| x.clamp(-FAR, FAR))
        .unwrap_or(if v.is_negative() { -FAR } else { FAR })
}

pub(crate) fn columns_of(
    a: &IntMatrix,
    cols: &[usize],
    cost: &[i128],
    ub: i64,
) -> Result<Vec<DpColumn>> {
    cols.iter()
        .map(|&j| {
            let coeffs = (0..a.rows())
                .map(|i| to_i64(a.get(i, j), "matrix entry"))
                .collect::<Result<Vec<_>>>()?;
            Ok(DpColumn {
                coeffs,
                cost: cost[j],
                ub,
            })
        })
        .collect()
}

pub(crate) fn costs_i128(c: &[BigInt]) -> Result<Vec<i128>> {
    c.iter()
        .map(|v| to_i128(v, "objective coefficient"))
        .collect()
}

fn unit_form(m: usize, i: usize) -> Vec<i128> {
    let mut f = vec![0i128; m];
    f[i] = 1;
    f
}

/// Exact optimum of the program restricted to `0 <= x_j <= var_bound`.
///
/// Never reports unboundedness. Partial sums are kept inside the box
/// `max(|b|_inf, n * Delta * var_bound)`, which every admissible solution respects.
pub fn dp_solve(ip: &StandardIp, var_bound: &BigInt) -> Result<Solution> {
    if var_bound.is_negative() {
        return Err(Error::Domain("variable bound must be nonnegative".into()));
    }
    let (m, n) = (ip.m(), ip.n());
    let ub = var_bound
        .to_i64()
        .unwrap_or(i64::MAX)
        .min(ENUM_LIMIT as i64);
    let cost = costs_i128(&ip.c)?;
    let all: Vec<usize> = (0..n).collect();
    let columns = columns_of(&ip.a, &all, &cost, ub)?;

    let b_inf = ip.b.iter().map(|v| v.abs()).max().unwrap_or_default();
    let radius = b_inf.max(BigInt::from(n) * ip.delta() * var_bound);
    let radius = clamp_i128(&radius);
    let mut bounds = Vec::with_capacity(2 * m);
    for i in 0..m {
        bounds.push(LinearBound::equal(unit_form(m, i), to_i128(&ip.b[i], "b")?));
        bounds.push(LinearBound {
            form: unit_form(m, i),
            lo: Some(-radius),
            hi: Some(radius),
            every_layer: true,
        });
    }
    let finals = run_layers(m, &columns, &bounds)?;
    debug_assert!(finals.len() <= 1);
    Ok(match finals.into_values().next() {
        Some(st) => Solution::optimal(
            st.assignment.iter().map(|&t| BigInt::from(t)).collect(),
            BigInt::from(st.value),
        ),
        None => Solution::infeasible(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableEntry {
    pub value: BigInt,
    pub assignment: Vec<BigInt>,
}

/// Best objective and assignment for every right-hand side reachable inside a box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhsValueTable {
    pub box_radius: BigInt,
    pub var_bound: BigInt,
    pub entries: BTreeMap<Vec<BigInt>, TableEntry>,
}

impl RhsValueTable {
    pub fn get(&self, v: &[BigInt]) -> Option<&TableEntry> {
        self.entries.get(v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Tabulates `max c.x` over `{x : A x = v, 0 <= x <= var_bound}` for every
/// `v` whose partial sums all stay inside `|.|_inf <= box_radius`.
pub fn dp_rhs_table(
    a: &IntMatrix,
    c: &[BigInt],
    var_bound: &BigInt,
    box_radius: &BigInt,
) -> Result<RhsValueTable> {
    if box_radius.is_negative() || var_bound.is_negative() {
        return Err(Error::Domain("bounds must be nonnegative".into()));
    }
    if c.len() != a.cols() {
        return Err(Error::Dimension(format!(
            "c has length {} for {} columns",
            c.len(),
            a.cols()
        )));
    }
    let m = a.rows();
    let ub = to_i64(var_bound, "variable bound")?;
    let radius = to_i128(box_radius, "box radius")?;
    let cost = costs_i128(c)?;
    let all: Vec<usize> = (0..a.cols()).collect();
    let columns = columns_of(a, &all, &cost, ub)?;
    let bounds: Vec<LinearBound> = (0..m)
        .map(|i| LinearBound {
            form: unit_form(m, i),
            lo: Some(-radius),
            hi: Some(radius),
            every_layer: true,
        })
        .collect();
    let finals = run_layers(m, &columns, &bounds)?;
    let entries = finals
        .into_iter()
        .map(|(v, st)| {
            (
                v.into_iter().map(BigInt::from).collect(),
                TableEntry {
                    value: BigInt::from(st.value),
                    assignment: st.assignment.into_iter().map(BigInt::from).collect(),
                },
            )
        })
        .collect();
    Ok(RhsValueTable {
        box_radius: box_radius.clone(),
        var_bound: var_bound.clone(),
        entries,
    })
}
