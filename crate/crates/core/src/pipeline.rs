//! Reduction of inequality-form programs with bounded, nonzero sub-determinants
//! to a standard-form program with few rows.
//!
//! A nonsingular row block is brought to Hermite Normal Form by a unimodular
//! column transform. Rows that become `+-e_i` are single-variable bounds and
//! are absorbed by a shift (and flip); the remaining dense rows, usually only
//! a handful, become an equality system over nonnegative variables with one
//! slack per row.

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};

use crate::decomp::solve_standard;
use crate::error::{Error, Result};
use crate::instance::{InequalityIp, Solution, StandardIp, Status};
use crate::linalg::{det, hnf, rank, subdet_scan};
use crate::matrix::{dot, IntMatrix};

/// `ceil(log2(delta))` for `delta >= 1`.
pub fn ceil_log2(delta: &BigInt) -> u64 {
    if delta <= &BigInt::one() {
        0
    } else {
        (delta - 1u32).bits()
    }
}

fn check_delta(delta: &BigInt) -> Result<()> {
    if delta < &BigInt::one() {
        return Err(Error::Domain(format!(
            "delta must be at least 1, got {delta}"
        )));
    }
    Ok(())
}

/// The entry bound `C(delta) = B_q` with `q = ceil(log2 delta)`,
/// `B_0 = delta` and `B_i = delta + F * sum_{l<i} B_l`.
///
/// `F = delta^q * q^(q/2)` with the logarithm rounded up and the square root
/// rounded up, so for non-powers of two the result over-approximates.
pub fn c_delta_bound(delta: &BigInt) -> Result<BigInt> {
    check_delta(delta)?;
    let q = ceil_log2(delta);
    let dq: BigInt = Pow::pow(delta, q);
    let qq: BigInt = Pow::pow(&BigInt::from(q), q);
    let f = ceil_sqrt(&(&dq * &dq * qq));
    let mut sum = BigInt::zero();
    let mut b = delta.clone();
    for _ in 0..q {
        sum += &b;
        b = delta + &f * &sum;
    }
    Ok(b)
}

fn ceil_sqrt(v: &BigInt) -> BigInt {
    let r = v.sqrt();
    if &(&r * &r) == v {
        r
    } else {
        r + 1
    }
}

/// `(2 C(delta) + 1)^(q + 3) + q` with `q = ceil(log2 delta)`.
pub fn lemma7_threshold(delta: &BigInt) -> Result<BigInt> {
    let c = c_delta_bound(delta)?;
    let q = ceil_log2(delta);
    let base: BigInt = 2 * c + 1;
    Ok(Pow::pow(&base, q + 3) + q)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisReport {
    pub rank: usize,
    pub delta_max: BigInt,
    pub has_singular_submatrix: bool,
    /// Declared `delta` covers `delta_max`.
    pub delta_ok: bool,
    /// Number of HNF diagonal entries greater than one.
    pub k: usize,
    pub hnf_diagonal: Vec<BigInt>,
    /// Largest absolute entry of the transformed matrix.
    pub max_transformed_entry: BigInt,
    pub entry_bound_ok: bool,
    pub row_count_ok: bool,
    /// Rows (original indices) of the nonsingular block that was transformed.
    pub top_block: Option<Vec<usize>>,
}

impl AnalysisReport {
    /// The flags that must hold before the reduction runs.
    pub fn blocking_failure(&self, n: usize) -> Option<String> {
        if self.rank != n {
            Some(format!("rank: A has rank {} but {} columns", self.rank, n))
        } else if self.has_singular_submatrix {
            Some("singular_submatrix: A has a singular (n x n) submatrix".into())
        } else if !self.delta_ok {
            Some(format!(
                "delta: largest sub-determinant {} exceeds the declared bound",
                self.delta_max
            ))
        } else if !self.entry_bound_ok {
            Some(format!(
                "entry_bound: transformed entry {} exceeds C(delta)",
                self.max_transformed_entry
            ))
        } else {
            None
        }
    }

    pub fn all_ok(&self, n: usize) -> bool {
        self.blocking_failure(n).is_none() && self.row_count_ok
    }
}

/// First nonsingular `n`-row block in lexicographic order of row subsets.
fn top_block(a: &IntMatrix) -> Result<Option<Vec<usize>>> {
    let n = a.cols();
    for rows in (0..a.rows()).combinations(n) {
        if !det(&a.select_rows(&rows))?.is_zero() {
            return Ok(Some(rows));
        }
    }
    Ok(None)
}

fn permutation_with_top(m: usize, top: &[usize]) -> Vec<usize> {
    let mut perm = top.to_vec();
    perm.extend((0..m).filter(|i| !top.contains(i)));
    perm
}

pub fn analyze(ip: &InequalityIp, delta: &BigInt) -> Result<AnalysisReport> {
    check_delta(delta)?;
    let (m, n) = (ip.m(), ip.n());
    let r = rank(&ip.a);
    let (delta_max, singular) = if m >= n {
        let s = subdet_scan(&ip.a)?;
        (s.delta_max, s.has_singular_square_submatrix)
    } else {
        (BigInt::zero(), true)
    };
    let threshold = lemma7_threshold(delta)?;
    let row_count_ok = m <= n + 1 || BigInt::from(n) <= threshold;

    let top = if r == n { top_block(&ip.a)? } else { None };
    let (k, diag, max_entry, entry_ok) = match &top {
        Some(rows) => {
            let h = hnf(&ip.a.select_rows(rows))?;
            let transformed = ip.a.mul(&h.u)?;
            let diag: Vec<BigInt> = (0..n).map(|i| h.h.get(i, i).clone()).collect();
            let k = diag.iter().filter(|d| *d > &BigInt::one()).count();
            let max_entry = transformed.max_abs();
            let ok = max_entry <= c_delta_bound(delta)?;
            (k, diag, max_entry, ok)
        }
        None => (0, Vec::new(), BigInt::zero(), false),
    };
    Ok(AnalysisReport {
        rank: r,
        delta_ok: delta_max <= *delta,
        delta_max,
        has_singular_submatrix: singular,
        k,
        hnf_diagonal: diag,
        max_transformed_entry: max_entry,
        entry_bound_ok: entry_ok,
        row_count_ok,
        top_block: top,
    })
}

/// How a transformed variable `x-hat_i` is recovered from the standard-form point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarSource {
    /// `x-hat_i = base + sign * y[index]` from a unit row.
    Shift {
        index: usize,
        base: BigInt,
        sign: i8,
        row: usize,
    },
    /// `x-hat_i = y[plus] - y[minus]`.
    Split { plus: usize, minus: usize },
}

/// Every step between the original program and its standard form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformTrace {
    pub row_permutation: Vec<usize>,
    pub unimodular_u: IntMatrix,
    /// Always the identity: the row classification needs no column moves.
    pub column_permutation: Vec<usize>,
    pub var_sources: Vec<VarSource>,
    /// Original indices of the rows kept as dense equality rows.
    pub dense_rows: Vec<usize>,
    pub slack_count: usize,
    pub objective_offset: BigInt,
    pub standard_vars: usize,
    pub original_a: IntMatrix,
    pub original_b: Vec<BigInt>,
    pub original_c: Vec<BigInt>,
}

impl TransformTrace {
    pub fn split_map(&self) -> Vec<(usize, usize, usize)> {
        self.var_sources
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match s {
                VarSource::Split { plus, minus } => Some((i, *plus, *minus)),
                _ => None,
            })
            .collect()
    }

    /// `x-hat` from a standard-form vector (point or direction).
    fn transformed(&self, y: &[BigInt], with_base: bool) -> Vec<BigInt> {
        self.var_sources
            .iter()
            .map(|s| match s {
                VarSource::Shift {
                    index, base, sign, ..
                } => {
                    let v = if *sign < 0 {
                        -&y[*index]
                    } else {
                        y[*index].clone()
                    };
                    if with_base {
                        base + v
                    } else {
                        v
                    }
                }
                VarSource::Split { plus, minus } => &y[*plus] - &y[*minus],
            })
            .collect()
    }

    /// Original-space vector `x = U x-hat`.
    pub fn map_point(&self, y: &[BigInt]) -> Result<Vec<BigInt>> {
        self.unimodular_u.mul_vec(&self.transformed(y, true))
    }

    pub fn map_direction(&self, d: &[BigInt]) -> Result<Vec<BigInt>> {
        self.unimodular_u.mul_vec(&self.transformed(d, false))
    }
}

fn unit_index(row: &[BigInt]) -> Option<(usize, i8)> {
    let mut found = None;
    for (j, v) in row.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        if found.is_some() || v.abs() != BigInt::one() {
            return None;
        }
        found = Some((j, if v.is_positive() { 1 } else { -1 }));
    }
    found
}

/// Builds the standard-form program and the trace that maps back.
pub fn to_standard_form(ip: &InequalityIp, delta: &BigInt) -> Result<(StandardIp, TransformTrace)> {
    let report = analyze(ip, delta)?;
    if let Some(msg) = report.blocking_failure(ip.n()) {
        return Err(Error::Precondition(msg));
    }
    if !report.row_count_ok {
        log::warn!("row count exceeds the bound expected for n > threshold; continuing");
    }
    let (m, n) = (ip.m(), ip.n());
    let top = report
        .top_block
        .clone()
        .expect("rank n implies a top block");
    let perm = permutation_with_top(m, &top);
    let h = hnf(&ip.a.select_rows(&top))?;
    let u = h.u;
    let t = ip.a.select_rows(&perm).mul(&u)?;
    let b: Vec<BigInt> = perm.iter().map(|&i| ip.b[i].clone()).collect();
    let c_hat = u.transpose().mul_vec(&ip.c)?;

    // Classify rows: the first unit row of each variable becomes its shift.
    let mut unit_of: Vec<Option<(usize, i8)>> = vec![None; n];
    let mut dense = Vec::new();
    for r in 0..m {
        match unit_index(t.row(r)) {
            Some((j, s)) if unit_of[j].is_none() => unit_of[j] = Some((r, s)),
            _ => dense.push(r),
        }
    }

    // Standard variables: shifted ones, then plus and minus parts, then slacks.
    let mut sources = Vec::with_capacity(n);
    let mut next = 0usize;
    for j in 0..n {
        if let Some((r, s)) = unit_of[j] {
            // +e_j: x_j <= b_r, x_j = b_r - y.  -e_j: -x_j <= b_r, x_j = -b_r + y.
            let base = if s > 0 { b[r].clone() } else { -b[r].clone() };
            sources.push(Some(VarSource::Shift {
                index: next,
                base,
                sign: -s,
                row: perm[r],
            }));
            next += 1;
        } else {
            sources.push(None);
        }
    }
    let free: Vec<usize> = (0..n).filter(|&j| unit_of[j].is_none()).collect();
    for (k, &j) in free.iter().enumerate() {
        sources[j] = Some(VarSource::Split {
            plus: next + k,
            minus: next + free.len() + k,
        });
    }
    let sources: Vec<VarSource> = sources
        .into_iter()
        .map(|s| s.expect("classified"))
        .collect();
    let core_vars = next + 2 * free.len();
    let rows_out = dense.len().max(1);
    let width = core_vars + rows_out;

    let mut a_std = IntMatrix::zeros(rows_out, width);
    let mut b_std = vec![BigInt::zero(); rows_out];
    for (k, &r) in dense.iter().enumerate() {
        let mut rhs = b[r].clone();
        for (j, src) in sources.iter().enumerate() {
            let coef = t.get(r, j);
            if coef.is_zero() {
                continue;
            }
            match src {
                VarSource::Shift {
                    index, base, sign, ..
                } => {
                    rhs -= coef * base;
                    let v = if *sign < 0 { -coef } else { coef.clone() };
                    a_std.set(k, *index, v);
                }
                VarSource::Split { plus, minus } => {
                    a_std.set(k, *plus, coef.clone());
                    a_std.set(k, *minus, -coef);
                }
            }
        }
        a_std.set(k, core_vars + k, BigInt::one());
        b_std[k] = rhs;
    }
    if dense.is_empty() {
        // keep one trivial row `z = 0` so the program has a row to carry
        a_std.set(0, core_vars, BigInt::one());
    }

    let mut c_std = vec![BigInt::zero(); width];
    let mut offset = BigInt::zero();
    for (j, src) in sources.iter().enumerate() {
        match src {
            VarSource::Shift {
                index, base, sign, ..
            } => {
                offset += &c_hat[j] * base;
                c_std[*index] = if *sign < 0 {
                    -&c_hat[j]
                } else {
                    c_hat[j].clone()
                };
            }
            VarSource::Split { plus, minus } => {
                c_std[*plus] = c_hat[j].clone();
                c_std[*minus] = -&c_hat[j];
            }
        }
    }

    let std = StandardIp::new(a_std, b_std, c_std)?;
    let trace = TransformTrace {
        row_permutation: perm.clone(),
        unimodular_u: u,
        column_permutation: (0..n).collect(),
        var_sources: sources,
        dense_rows: dense.iter().map(|&r| perm[r]).collect(),
        slack_count: rows_out,
        objective_offset: offset,
        standard_vars: width,
        original_a: ip.a.clone(),
        original_b: ip.b.clone(),
        original_c: ip.c.clone(),
    };
    Ok((std, trace))
}

fn satisfies(a: &IntMatrix, b: &[BigInt], x: &[BigInt]) -> Result<bool> {
    Ok(a.mul_vec(x)?.iter().zip(b).all(|(l, r)| l <= r))
}

/// Maps a standard-form result back to the original variables.
///
/// Optimal points are re-substituted into `A x <= b`; unbounded directions
/// are mapped to `d` with `A d <= 0` and `c.d > 0` and re-checked as well.
pub fn back_map(sol: &Solution, trace: &TransformTrace) -> Result<Solution> {
    let a = &trace.original_a;
    let b = &trace.original_b;
    match sol.status {
        Status::Infeasible => Ok(sol.clone()),
        Status::Optimal => {
            let y = sol
                .x
                .as_ref()
                .ok_or_else(|| Error::Invariant("optimal solution without a point".into()))?;
            let x = trace.map_point(y)?;
            if !satisfies(a, b, &x)? {
                return Err(Error::Invariant(
                    "back-mapped point violates A x <= b".into(),
                ));
            }
            let value = dot(&trace.original_c, &x);
            let expected = sol
                .integral_objective()
                .map(|v| v + &trace.objective_offset);
            if expected.as_ref() != Some(&value) {
                return Err(Error::Invariant(
                    "objective offset mismatch after back-mapping".into(),
                ));
            }
            Ok(Solution::optimal(x, value))
        }
        Status::Unbounded => {
            let d_std = sol
                .certificate
                .as_ref()
                .ok_or_else(|| Error::Invariant("unbounded without a direction".into()))?;
            let d = trace.map_direction(d_std)?;
            let zero = vec![BigInt::zero(); b.len()];
            if !satisfies(a, &zero, &d)? || !dot(&trace.original_c, &d).is_positive() {
                return Err(Error::Invariant(
                    "back-mapped direction is not improving".into(),
                ));
            }
            let point = match &sol.x {
                Some(y) => {
                    let x = trace.map_point(y)?;
                    if !satisfies(a, b, &x)? {
                        return Err(Error::Invariant(
                            "back-mapped point violates A x <= b".into(),
                        ));
                    }
                    Some(x)
                }
                None => None,
            };
            Ok(Solution::unbounded(d, point))
        }
    }
}

/// Checks `A d <= 0`, `c.d > 0` for an inequality-form program.
pub fn is_valid_inequality_ray(ip: &InequalityIp, d: &[BigInt]) -> bool {
    d.len() == ip.n()
        && ip
            .a
            .mul_vec(d)
            .map(|ad| ad.iter().all(|v| !v.is_positive()))
            .unwrap_or(false)
        && dot(&ip.c, d).is_positive()
}

/// Everything produced along the way, for reporting.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub report: AnalysisReport,
    pub standard: StandardIp,
    pub trace: TransformTrace,
    pub standard_solution: Solution,
    pub solution: Solution,
}

pub fn solve_inequality(ip: &InequalityIp, delta: &BigInt) -> Result<Solution> {
    Ok(solve_inequality_traced(ip, delta)?.solution)
}

pub fn solve_inequality_traced(ip: &InequalityIp, delta: &BigInt) -> Result<PipelineRun> {
    let report = analyze(ip, delta)?;
    if let Some(msg) = report.blocking_failure(ip.n()) {
        return Err(Error::Precondition(msg));
    }
    let (standard, trace) = to_standard_form(ip, delta)?;
    let standard_solution = solve_standard(&standard)?;
    let solution = back_map(&standard_solution, &trace)?;
    Ok(PipelineRun {
        report,
        standard,
        trace,
        standard_solution,
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::to_bigints;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn bound_formulas() {
        assert_eq!(c_delta_bound(&big(1)).unwrap(), big(1));
        assert_eq!(c_delta_bound(&big(2)).unwrap(), big(6));
        assert_eq!(c_delta_bound(&big(4)).unwrap(), big(4356));
        assert_eq!(lemma7_threshold(&big(1)).unwrap(), big(27));
        assert_eq!(lemma7_threshold(&big(2)).unwrap(), big(28562));
        assert_eq!(
            lemma7_threshold(&big(4)).unwrap(),
            Pow::pow(&big(8713), 5u32) + 2
        );
        assert!(c_delta_bound(&big(0)).is_err());
        let mut prev = big(0);
        for d in 1..=16 {
            let c = c_delta_bound(&big(d)).unwrap();
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn ceil_log2_values() {
        let got: Vec<u64> = [1, 2, 3, 4, 5, 8, 9]
            .iter()
            .map(|&d| ceil_log2(&big(d)))
            .collect();
        assert_eq!(got, vec![0, 1, 2, 2, 3, 3, 4]);
    }

    #[test]
    fn analyze_examples() {
        let ip = InequalityIp::from_i64(&[[1, 0], [0, 1], [1, 1]], &[2, 2, 3], &[1, 1]);
        let r = analyze(&ip, &big(1)).unwrap();
        assert_eq!(r.rank, 2);
        assert_eq!(r.delta_max, big(1));
        assert!(!r.has_singular_submatrix);
        assert_eq!(r.k, 0);
        assert!(r.all_ok(2));

        let ip = InequalityIp::from_i64(&[[1, 2], [2, 4]], &[1, 1], &[1, 1]);
        let r = analyze(&ip, &big(1)).unwrap();
        assert_eq!(r.rank, 1);
        assert!(r.blocking_failure(2).is_some());

        let ip = InequalityIp::from_i64(&[[2, 1], [1, 0], [0, 1]], &[4, 2, 2], &[1, 1]);
        let r = analyze(&ip, &big(2)).unwrap();
        assert_eq!(r.delta_max, big(2));
        assert!(!r.has_singular_submatrix);
        assert!(r.k <= 1);
    }

    #[test]
    fn triangle_reformulation() {
        let ip = InequalityIp::from_i64(&[[1, 0], [0, 1], [1, 1]], &[2, 2, 3], &[1, 1]);
        let (std, trace) = to_standard_form(&ip, &big(1)).unwrap();
        assert_eq!(std.a, IntMatrix::from_rows(&[[-1, -1, 1]]));
        assert_eq!(std.b, to_bigints(&[-1]));
        assert_eq!(std.c, to_bigints(&[-1, -1, 0]));
        assert_eq!(trace.objective_offset, big(4));
        let s = solve_inequality(&ip, &big(1)).unwrap();
        assert_eq!(s.integral_objective(), Some(big(3)));
        let x = s.x.unwrap();
        assert!(x == to_bigints(&[1, 2]) || x == to_bigints(&[2, 1]));
    }

    #[test]
    fn pipeline_examples() {
        let ip = InequalityIp::from_i64(&[[1, 0], [0, 1]], &[1, 2], &[1, 1]);
        let s = solve_inequality(&ip, &big(1)).unwrap();
        assert_eq!(s.x, Some(to_bigints(&[1, 2])));
        assert_eq!(s.integral_objective(), Some(big(3)));

        let ip = InequalityIp::from_i64(&[[2, 1], [1, 0], [0, 1]], &[4, 2, 2], &[1, 1]);
        let s = solve_inequality(&ip, &big(2)).unwrap();
        assert_eq!(s.integral_objective(), Some(big(3)));
        assert_eq!(s.x, Some(to_bigints(&[1, 2])));

        let ip = InequalityIp::from_i64(&[[1, 0], [0, 1], [1, 1]], &[0, 0, -3], &[1, 1]);
        let s = solve_inequality(&ip, &big(1)).unwrap();
        assert_eq!(s.integral_objective(), Some(big(-3)));

        let ip = InequalityIp::from_i64(&[[1, 0], [0, 1], [1, 1]], &[0, 0, 1], &[-1, 0]);
        let s = solve_inequality(&ip, &big(1)).unwrap();
        assert_eq!(s.status, Status::Unbounded);
        assert!(is_valid_inequality_ray(
            &ip,
            s.certificate.as_ref().unwrap()
        ));
    }

    #[test]
    fn rejects_bad_preconditions() {
        let ip = InequalityIp::from_i64(&[[1, 2], [2, 4]], &[1, 1], &[1, 1]);
        assert!(matches!(
            solve_inequality(&ip, &big(4)),
            Err(Error::Precondition(_))
        ));
        let ip = InequalityIp::from_i64(&[[3, 0], [0, 1]], &[1, 1], &[1, 1]);
        assert!(matches!(
            solve_inequality(&ip, &big(2)),
            Err(Error::Precondition(_))
        ));
    }
}
