//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::Path;
use std::time::{Duration, Instant};

use ipdecomp::decomp::solve_standard_with;
use ipdecomp::gen::{generate, Family, GenSpec, OracleBox};
use ipdecomp::instance::is_valid_ray;
use ipdecomp::io::parse_instance;
use ipdecomp::linalg::{det, hnf, is_hermite_normal_form, rank, subdet_scan};
use ipdecomp::mip::is_valid_mixed_ray;
use ipdecomp::oracle::{
    brute_inequality, brute_mixed, brute_standard, brute_standard_optima,
    lp_improving_inequality_ray, lp_improving_ray,
};
use ipdecomp::pipeline::{ceil_log2, is_valid_inequality_ray, solve_inequality_traced};
use ipdecomp::{
    c_delta_bound, dp_solve, lemma1_bound, lemma7_threshold, papadimitriou_bound, solve_mixed,
    solve_standard, IntMatrix, MixedIp, ProblemInstance, Solution, StandardIp, Status,
};
use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: &[String], detail: String) -> Outcome {
    match failures.first() {
        None => Outcome { pass: true, detail },
        Some(first) => Outcome {
            pass: false,
            detail: format!("{detail}; {} failure(s), first: {first}", failures.len()),
        },
    }
}

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

fn same_answer(a: &Solution, b: &Solution) -> bool {
    a.status == b.status && a.objective == b.objective
}

/// The seeded standard-form corpus shared by several criteria.
fn standard_corpus(count: usize) -> Vec<(StandardIp, BigInt)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut out = Vec::with_capacity(count);
    let mut seed = 0u64;
    while out.len() < count {
        seed += 1;
        let spec = GenSpec {
            planted: rng.gen_bool(0.8),
            ..GenSpec::standard(
                rng.gen_range(1..=8),
                rng.gen_range(1..=3),
                rng.gen_range(1..=3),
                seed,
            )
        };
        let g = generate(&spec).expect("standard generation");
        let (ProblemInstance::Standard(ip), Some(OracleBox::Nonneg(bx))) =
            (g.instance, g.oracle_box)
        else {
            unreachable!("budget family always has a box")
        };
        out.push((ip, bx));
    }
    out
}

fn criterion_1(corpus: &[(StandardIp, BigInt)]) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let (mut optimal, mut infeasible) = (0, 0);
    for (k, (ip, bx)) in corpus.iter().enumerate() {
        let decomp = solve_standard(ip);
        let dp = dp_solve(ip, &papadimitriou_bound(ip));
        let brute = brute_standard(ip, bx);
        match (decomp, dp, brute) {
            (Ok(d), Ok(p), Ok(b)) => {
                if !same_answer(&d, &p) || !same_answer(&d, &b) {
                    failures.push(format!(
                        "instance {k}: decomposition {:?}/{:?}, dp {:?}/{:?}, oracle {:?}/{:?}",
                        d.status, d.objective, p.status, p.objective, b.status, b.objective
                    ));
                }
                if d.status == Status::Optimal {
                    optimal += 1;
                    if !ip.is_feasible(d.x.as_ref().unwrap()) {
                        failures.push(format!("instance {k}: returned point is infeasible"));
                    }
                } else {
                    infeasible += 1;
                }
            }
            (d, p, b) => failures.push(format!(
                "instance {k}: error {:?} {:?} {:?}",
                d.err(),
                p.err(),
                b.err()
            )),
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(300) {
        failures.push(format!("took {elapsed:?}, over five minutes"));
    }
    outcome(
        &failures,
        format!(
            "{} instances ({optimal} optimal, {infeasible} infeasible) agree across decomposition, DP and oracle in {:.1?}",
            corpus.len(),
            elapsed
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut failures = Vec::new();
    let mut times = Vec::new();
    for exp in [3u32, 6, 9] {
        let b1: BigInt = Pow::pow(&big(10), exp);
        let ip = StandardIp::new(
            IntMatrix::from_rows(&[[1, 2]]),
            vec![b1.clone()],
            vec![big(1), big(0)],
        )
        .unwrap();
        // best of several runs keeps scheduler noise out of the ratio
        let mut best = Duration::MAX;
        for _ in 0..20 {
            let t = Instant::now();
            let s = solve_standard(&ip).unwrap();
            best = best.min(t.elapsed());
            if s.integral_objective() != Some(b1.clone()) {
                failures.push(format!("b = 10^{exp}: got {:?}", s.objective));
            }
        }
        times.push(best);
    }
    let max = times.iter().max().unwrap().as_secs_f64();
    let min = times.iter().min().unwrap().as_secs_f64().max(1e-9);
    if max / min >= 10.0 {
        failures.push(format!("runtime ratio {:.1} across the family", max / min));
    }
    // the plain DP is only run at 10^3; its state space grows with b
    let ip = StandardIp::from_i64(&[[1, 2]], &[1000], &[1, 0]);
    let t = Instant::now();
    let dp = dp_solve(&ip, &papadimitriou_bound(&ip)).unwrap();
    let dp_time = t.elapsed();
    if dp.integral_objective() != Some(big(1000)) {
        failures.push("dp at 10^3 disagrees".into());
    }
    outcome(
        &failures,
        format!(
            "value b each time; times {:?} (ratio {:.2}); DP at 10^3 took {:?}, excluded above as expected blow-up",
            times,
            max / min,
            dp_time
        ),
    )
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> IntMatrix {
    let v: Vec<Vec<i64>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(-bound..=bound)).collect())
        .collect();
    IntMatrix::from_rows(&v)
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = Vec::new();
    let mut done = 0;
    while done < 1000 {
        let n = rng.gen_range(1..=6);
        let a = random_matrix(&mut rng, n, n, 10);
        if det(&a).unwrap().is_zero() {
            continue;
        }
        done += 1;
        let r = hnf(&a).unwrap();
        if a.mul(&r.u).unwrap() != r.h {
            failures.push(format!("A U != H for {a:?}"));
        }
        if det(&r.u).unwrap().abs() != BigInt::one() {
            failures.push(format!("U not unimodular for {a:?}"));
        }
        if !is_hermite_normal_form(&r.h) {
            failures.push(format!("H not in normal form for {a:?}"));
        }
    }
    let mut invariance = 0;
    while invariance < 200 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(n..=n + 2);
        let a = random_matrix(&mut rng, m, n, 5);
        let block = random_matrix(&mut rng, n, n, 5);
        if det(&block).unwrap().is_zero() {
            continue;
        }
        invariance += 1;
        let u = hnf(&block).unwrap().u;
        let before = subdet_scan(&a).unwrap();
        let after = subdet_scan(&a.mul(&u).unwrap()).unwrap();
        if before.delta_max != after.delta_max
            || before.has_singular_square_submatrix != after.has_singular_square_submatrix
        {
            failures.push(format!("sub-determinants changed under U for {a:?}"));
        }
    }
    outcome(
        &failures,
        format!("{done} HNFs verified (A U = H, |det U| = 1, normal form); delta_max invariant on {invariance} matrices"),
    )
}

fn criterion_4() -> Outcome {
    // hand evaluation:
    //   C(2): B_1 = 2 + 2 * 2 = 6
    //   C(4): factor 4^2 * 2^1 = 32; B_1 = 4 + 32 * 4 = 132; B_2 = 4 + 32 * (4 + 132) = 4356
    //   threshold(1) = 3^3 + 0; threshold(2) = 13^4 + 1
    //   lemma1(1, 1) = 3 * 1; lemma1(2, 2) = 4 * 4^2
    let checks: Vec<(&str, BigInt, BigInt)> = vec![
        ("C(1)", c_delta_bound(&big(1)).unwrap(), big(1)),
        ("C(2)", c_delta_bound(&big(2)).unwrap(), big(6)),
        (
            "C(4)",
            c_delta_bound(&big(4)).unwrap(),
            big(4 + 32 * (4 + 132)),
        ),
        (
            "threshold(1)",
            lemma7_threshold(&big(1)).unwrap(),
            Pow::pow(&big(3), 3u32),
        ),
        (
            "threshold(2)",
            lemma7_threshold(&big(2)).unwrap(),
            Pow::pow(&big(13), 4u32) + 1,
        ),
        ("lemma1(1,1)", lemma1_bound(1, &big(1)).unwrap(), big(3)),
        (
            "lemma1(2,2)",
            lemma1_bound(2, &big(2)).unwrap(),
            big(4 * 16),
        ),
    ];
    let failures: Vec<String> = checks
        .iter()
        .filter(|(_, got, want)| got != want)
        .map(|(name, got, want)| format!("{name} = {got}, expected {want}"))
        .collect();
    let shown: Vec<String> = checks.iter().map(|(n, g, _)| format!("{n}={g}")).collect();
    outcome(&failures, shown.join(", "))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    let (mut optimal, mut infeasible, mut total, mut dense) = (0, 0, 0, 0);
    let mut seed = 0;
    while total < 200 {
        seed += 1;
        let n = rng.gen_range(1..=6);
        let m = n + rng.gen_range(0..=1);
        let delta = rng.gen_range(1..=4);
        let spec = GenSpec {
            planted: rng.gen_bool(0.85),
            family: Family::Budget,
            ..GenSpec::inequality(n, m, delta, seed)
        };
        let Ok(g) = generate(&GenSpec {
            max_attempts: 2000,
            ..spec
        }) else {
            continue;
        };
        let (ProblemInstance::Inequality(ip), Some(OracleBox::Signed(bx))) =
            (g.instance, g.oracle_box)
        else {
            continue;
        };
        total += 1;
        let d = big(delta);
        let run = match solve_inequality_traced(&ip, &d) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        if !run.trace.dense_rows.is_empty() {
            dense += 1;
        }
        let brute = brute_inequality(&ip, &bx).unwrap();
        if !same_answer(&run.solution, &brute) {
            failures.push(format!(
                "seed {seed}: pipeline {:?}/{:?}, oracle {:?}/{:?}",
                run.solution.status, run.solution.objective, brute.status, brute.objective
            ));
        }
        match run.solution.status {
            Status::Optimal => {
                optimal += 1;
                if !ip.is_feasible(run.solution.x.as_ref().unwrap()) {
                    failures.push(format!("seed {seed}: returned point violates A x <= b"));
                }
            }
            _ => infeasible += 1,
        }
        let rows_allowed = ceil_log2(&d) as usize + 2 + (m.saturating_sub(n + 1));
        if run.standard.m() > rows_allowed {
            failures.push(format!(
                "seed {seed}: {} rows > {rows_allowed}",
                run.standard.m()
            ));
        }
        if run.standard.delta() > c_delta_bound(&d).unwrap() {
            failures.push(format!(
                "seed {seed}: entry {} exceeds C(delta)",
                run.standard.delta()
            ));
        }
    }
    outcome(
        &failures,
        format!(
            "{total} instances ({optimal} optimal, {infeasible} infeasible, {dense} with dense rows) match the oracle; row and entry bounds hold"
        ),
    )
}

fn criterion_6(corpus: &[(StandardIp, BigInt)]) -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (k, (ip, bx)) in corpus.iter().enumerate() {
        let optima = brute_standard_optima(ip, bx).unwrap();
        if optima.is_empty() {
            continue;
        }
        checked += 1;
        let cap = lemma1_bound(ip.m(), &ip.delta().max(BigInt::one())).unwrap();
        let ok = optima.iter().any(|x| {
            let large: Vec<usize> = (0..ip.n()).filter(|&j| x[j] > cap).collect();
            large.len() <= ip.m() && rank(&ip.a.select_columns(&large)) == large.len()
        });
        if !ok {
            failures.push(format!(
                "instance {k}: no optimum with independent large support"
            ));
        }
    }
    outcome(
        &failures,
        format!("{checked} solved instances checked, no counterexample found"),
    )
}

fn criterion_7(corpus: &[(StandardIp, BigInt)]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    let (mut optimal, mut infeasible, mut fractional) = (0, 0, 0);
    let count = 200;
    for seed in 1..=count {
        let spec = GenSpec {
            planted: rng.gen_bool(0.8),
            ..GenSpec::mixed(
                rng.gen_range(1..=5),
                rng.gen_range(1..=2),
                rng.gen_range(0..=3),
                rng.gen_range(1..=2),
                seed,
            )
        };
        let g = generate(&spec).unwrap();
        let (ProblemInstance::Mixed(mip), Some(OracleBox::Nonneg(bx))) = (g.instance, g.oracle_box)
        else {
            unreachable!("budget family always has a box")
        };
        let solved = solve_mixed(&mip);
        let brute = brute_mixed(&mip, &bx);
        match (solved, brute) {
            (Ok(s), Ok(b)) => {
                if !same_answer(&s, &b) {
                    failures.push(format!(
                        "seed {seed}: solver {:?}/{:?}, oracle {:?}/{:?}",
                        s.status, s.objective, b.status, b.objective
                    ));
                }
                match s.status {
                    Status::Optimal => {
                        optimal += 1;
                        if !s.objective.as_ref().unwrap().is_integer() {
                            fractional += 1;
                        }
                        if !mip.is_feasible(s.x.as_ref().unwrap(), s.y.as_ref().unwrap()) {
                            failures.push(format!("seed {seed}: A x + B y != b"));
                        }
                    }
                    _ => infeasible += 1,
                }
            }
            (s, b) => failures.push(format!("seed {seed}: error {:?} {:?}", s.err(), b.err())),
        }
    }
    let mut shared = 0;
    for (k, (ip, _)) in corpus.iter().take(100).enumerate() {
        let mip = MixedIp::new(
            ip.a.clone(),
            IntMatrix::zeros(ip.m(), 0),
            ip.b.clone(),
            ip.c.clone(),
            Vec::new(),
        )
        .unwrap();
        let a = solve_mixed(&mip).unwrap();
        let b = solve_standard(ip).unwrap();
        if !same_answer(&a, &b) {
            failures.push(format!(
                "shared instance {k}: mixed {:?}, standard {:?}",
                a.objective, b.objective
            ));
        }
        shared += 1;
    }
    outcome(
        &failures,
        format!(
            "{count} instances ({optimal} optimal, {fractional} with fractional value, {infeasible} infeasible) equal the oracle exactly; l = 0 matches on {shared} shared instances"
        ),
    )
}

fn criterion_8() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/status");
    let mut entries: Vec<_> = std::fs::read_dir(&dir)
        .expect("fixture directory")
        .map(|e| e.unwrap().path())
        .collect();
    entries.sort();
    let mut failures = Vec::new();
    let (mut infeasible, mut unbounded) = (0, 0);
    for path in entries {
        let name = path.file_stem().unwrap().to_string_lossy().to_string();
        let text = std::fs::read_to_string(&path).unwrap();
        let expect: serde_json::Value = serde_json::from_str(&text).unwrap();
        let expect = expect["expect"].as_str().unwrap().to_string();
        let doc = parse_instance(&text).unwrap();
        let (status, cert_ok) = match &doc.instance {
            ProblemInstance::Standard(ip) => {
                let out = solve_standard_with(ip, &Default::default()).unwrap();
                let s = out.solution;
                let cert_ok = match (&s.certificate, s.status) {
                    (Some(d), Status::Unbounded) => {
                        is_valid_ray(&ip.a, &ip.c, d)
                            && lp_improving_ray(&ip.a, &ip.c).is_some()
                            && ip.is_feasible(s.x.as_ref().unwrap())
                    }
                    _ => s.certificate.is_none(),
                };
                (s.status, cert_ok)
            }
            ProblemInstance::Mixed(mip) => {
                let s = solve_mixed(mip).unwrap();
                let cert_ok = match (&s.certificate, s.status) {
                    (Some(d), Status::Unbounded) => is_valid_mixed_ray(mip, d),
                    _ => true,
                };
                (s.status, cert_ok)
            }
            ProblemInstance::Inequality(ip) => {
                let d = doc.delta.clone().unwrap_or_else(BigInt::one);
                let s = solve_inequality_traced(ip, &d).unwrap().solution;
                let cert_ok = match (&s.certificate, s.status) {
                    (Some(dir), Status::Unbounded) => {
                        is_valid_inequality_ray(ip, dir)
                            && lp_improving_inequality_ray(ip).is_some()
                    }
                    _ => true,
                };
                (s.status, cert_ok)
            }
        };
        let got = serde_json::to_value(status).unwrap();
        if got != expect.as_str() {
            failures.push(format!("{name}: expected {expect}, got {got}"));
        } else if !cert_ok {
            failures.push(format!("{name}: certificate failed re-verification"));
        }
        match expect.as_str() {
            "infeasible" => infeasible += 1,
            "unbounded" => unbounded += 1,
            _ => {}
        }
    }
    if infeasible < 10 || unbounded < 5 {
        failures.push(format!(
            "fixture set too small: {infeasible} infeasible, {unbounded} unbounded"
        ));
    }
    outcome(
        &failures,
        format!("{infeasible} infeasible and {unbounded} unbounded fixtures classified; rays satisfy A d = 0, d >= 0, c.d > 0"),
    )
}

fn main() {
    let corpus = standard_corpus(500);
    let results: Vec<(&str, Criterion)> = vec![
        (
            "oracle equivalence, standard form",
            Box::new(|| criterion_1(&corpus)),
        ),
        ("large right-hand sides", Box::new(criterion_2)),
        ("HNF suite", Box::new(criterion_3)),
        ("bound formulas", Box::new(criterion_4)),
        ("inequality pipeline", Box::new(criterion_5)),
        (
            "structure of optimal solutions",
            Box::new(|| criterion_6(&corpus)),
        ),
        ("mixed-integer suite", Box::new(|| criterion_7(&corpus))),
        ("status taxonomy", Box::new(criterion_8)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in results.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} [PRIMARY] {}: {} ({}) [{:.1?}]",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
