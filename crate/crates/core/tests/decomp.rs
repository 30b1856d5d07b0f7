use ipdecomp::decomp::{solve_standard_with, DecompOptions, VarBoundRule};
use ipdecomp::oracle::brute_standard;
use ipdecomp::{
    detect_unbounded, dp_solve, papadimitriou_bound, solve_standard, verify_witness,
    DecompositionWitness, StandardIp, Status,
};
use num_bigint::BigInt;
use proptest::prelude::*;

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().copied().map(BigInt::from).collect()
}

#[test]
fn large_component_rides_on_one_column() {
    let ip = StandardIp::from_i64(&[[1, 2]], &[1000], &[1, 0]);
    let out = solve_standard_with(&ip, &DecompOptions::default()).unwrap();
    assert_eq!(out.solution.status, Status::Optimal);
    assert_eq!(out.solution.x, Some(ints(&[1000, 0])));
    assert_eq!(out.solution.integral_objective(), Some(BigInt::from(1000)));
    let w = out.witness.expect("optimal answers carry a witness");
    assert!(verify_witness(&ip, &w));
    assert_eq!(w.assemble(2), ints(&[1000, 0]));
}

#[test]
fn gcd_obstruction_is_infeasible() {
    let ip = StandardIp::from_i64(&[[2, 2]], &[3], &[1, 1]);
    let s = solve_standard(&ip).unwrap();
    assert_eq!(s.status, Status::Infeasible);
    assert!(s.x.is_none() && s.certificate.is_none());
}

#[test]
fn objective_on_second_variable() {
    let ip = StandardIp::from_i64(&[[1, 1]], &[5], &[0, 1]);
    let s = solve_standard(&ip).unwrap();
    assert_eq!(s.x, Some(ints(&[0, 5])));
    assert_eq!(s.integral_objective(), Some(BigInt::from(5)));
}

#[test]
fn ties_break_to_the_smallest_vector() {
    // every split of 4 between the two columns has value 4
    let ip = StandardIp::from_i64(&[[1, 1]], &[4], &[1, 1]);
    let s = solve_standard(&ip).unwrap();
    assert_eq!(s.x, Some(ints(&[0, 4])));
}

#[test]
fn witness_rejections() {
    let ip = StandardIp::from_i64(&[[1, 2]], &[1000], &[1, 0]);
    let negative = DecompositionWitness {
        large_support: vec![0],
        b_double_prime: ints(&[1002]),
        bounded_part: ints(&[501]),
        large_part: ints(&[-1]),
    };
    assert!(!verify_witness(&ip, &negative));

    let wrong_sum = DecompositionWitness {
        large_support: vec![0],
        b_double_prime: ints(&[0]),
        bounded_part: ints(&[0]),
        large_part: ints(&[999]),
    };
    assert!(!verify_witness(&ip, &wrong_sum));

    // columns (1,2) and (2,4) are parallel
    let ip = StandardIp::from_i64(&[[1, 2], [2, 4]], &[3, 6], &[1, 1]);
    let dependent = DecompositionWitness {
        large_support: vec![0, 1],
        b_double_prime: ints(&[0, 0]),
        bounded_part: vec![],
        large_part: ints(&[1, 1]),
    };
    assert!(ip.is_feasible(&dependent.assemble(2)));
    assert!(!verify_witness(&ip, &dependent));
}

#[test]
fn unbounded_directions() {
    let ip = StandardIp::from_i64(&[[1, -1]], &[0], &[1, 1]);
    assert_eq!(detect_unbounded(&ip), Some(ints(&[1, 1])));
    let s = solve_standard(&ip).unwrap();
    assert_eq!(s.status, Status::Unbounded);
    assert_eq!(s.certificate, Some(ints(&[1, 1])));

    let ip = StandardIp::from_i64(&[[1, 0], [0, 1]], &[1, 1], &[5, -3]);
    assert_eq!(detect_unbounded(&ip), None);
    let ip = StandardIp::from_i64(&[[1, 1]], &[1], &[1, 1]);
    assert_eq!(detect_unbounded(&ip), None);
}

#[test]
fn infeasible_beats_unbounded_direction() {
    // the ray (1,1) exists, but x1 - x2 = 1/2 has no integer point at all
    let ip = StandardIp::from_i64(&[[2, -2]], &[1], &[1, 1]);
    assert_eq!(solve_standard(&ip).unwrap().status, Status::Infeasible);
}

#[test]
fn sequential_and_parallel_agree() {
    let ip = StandardIp::from_i64(&[[3, 1, 2, 0], [1, 2, 0, 1]], &[41, 37], &[2, 1, 1, 1]);
    let seq = solve_standard_with(
        &ip,
        &DecompOptions {
            parallel: false,
            ..Default::default()
        },
    )
    .unwrap();
    let par = solve_standard_with(&ip, &DecompOptions::default()).unwrap();
    assert_eq!(seq, par);
    assert_eq!(
        seq.solution.objective,
        brute_standard(&ip, &BigInt::from(41)).unwrap().objective
    );
}

fn instance() -> impl Strategy<Value = StandardIp> {
    (1usize..=2, 1usize..=4)
        .prop_flat_map(|(m, n)| {
            (
                prop::collection::vec(prop::collection::vec(-2i64..=2, n), m),
                prop::collection::vec(0i64..=12, m),
                prop::collection::vec(-3i64..=3, n),
            )
        })
        .prop_map(|(mut rows, b, c)| {
            // a positive first row keeps every feasible point inside the box b[0]
            for v in rows[0].iter_mut() {
                *v = v.abs().max(1);
            }
            StandardIp::from_i64(&rows, &b, &c)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_exhaustive_search(ip in instance()) {
        let s = solve_standard(&ip).unwrap();
        let o = brute_standard(&ip, &ip.b[0]).unwrap();
        prop_assert_eq!(s.status, o.status);
        prop_assert_eq!(&s.objective, &o.objective);
        if let Some(x) = &s.x {
            prop_assert!(ip.is_feasible(x));
        }
    }

    #[test]
    fn both_variable_bounds_agree(ip in instance()) {
        let circuit = solve_standard_with(&ip, &DecompOptions::default()).unwrap();
        let worst = solve_standard_with(
            &ip,
            &DecompOptions { var_bound: VarBoundRule::Lemma1, parallel: false },
        )
        .unwrap();
        prop_assert!(circuit.var_bound <= worst.var_bound);
        prop_assert_eq!(&circuit.solution.objective, &worst.solution.objective);
        if let Some(w) = &circuit.witness {
            prop_assert!(verify_witness(&ip, w));
        }
    }

    #[test]
    fn single_row_free_signs_match_dp(
        row in prop::collection::vec(-3i64..=3, 1..=4),
        b in -6i64..=6,
        c in prop::collection::vec(-3i64..=3, 4),
    ) {
        // mixed signs may make the program unbounded; the DP cannot see rays,
        // so compare only when the decomposition reports a finite answer
        let n = row.len();
        let ip = StandardIp::from_i64(&[row], &[b], &c[..n]);
        let s = solve_standard(&ip).unwrap();
        if s.status == Status::Unbounded {
            let d = s.certificate.as_ref().unwrap();
            prop_assert!(ipdecomp::instance::is_valid_ray(&ip.a, &ip.c, d));
        } else {
            let dp = dp_solve(&ip, &papadimitriou_bound(&ip)).unwrap();
            prop_assert_eq!(s.status, dp.status);
            prop_assert_eq!(&s.objective, &dp.objective);
        }
    }
}
