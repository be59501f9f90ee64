//! Cross-module invariants: every solver output verifies, bounds order
//! correctly, formats round-trip, and the packing heuristic scales the way
//! its nested loops say it should.

use bitrect::bounds::{greedy_fooling_set, max_fooling_set_exact, real_rank};
use bitrect::exact::{assignment_to_partition, brute_force_binary_rank, decide, Budget, DecisionOutcome};
use bitrect::heuristics::{row_packing, row_packing_once, trivial_partition};
use bitrect::matrix::verify_partition;
use bitrect::sap::{solve, SolveConfig, SolveStatus};
use bitrect::BinaryMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn matrix_strategy(max_dim: usize) -> impl Strategy<Value = BinaryMatrix> {
    (1..=max_dim, 1..=max_dim, 0.15f64..0.85).prop_flat_map(|(m, n, density)| {
        proptest::collection::vec(proptest::bool::weighted(density), m * n)
            .prop_map(move |cells| BinaryMatrix::from_fn(m, n, |i, j| cells[i * n + j]))
    })
}

proptest! {
    #[test]
    fn parse_serialize_roundtrip(m in matrix_strategy(8)) {
        let text = m.to_text();
        prop_assert_eq!(BinaryMatrix::parse(&text).unwrap(), m);
    }

    #[test]
    fn transpose_involution(m in matrix_strategy(8)) {
        prop_assert_eq!(m.transpose().transpose(), m);
    }

    #[test]
    fn heuristic_outputs_verify(m in matrix_strategy(12)) {
        prop_assume!(m.ones() > 0);
        let trivial = trivial_partition(&m).unwrap();
        prop_assert!(verify_partition(&m, &trivial).unwrap().is_valid());
        let packed = row_packing(&m, 3, 11).unwrap();
        prop_assert!(verify_partition(&m, &packed).unwrap().is_valid());
        prop_assert!(packed.len() <= trivial.len());
        prop_assert!(packed.len() >= real_rank(&m));
    }

    #[test]
    fn decide_decode_verifies_at_heuristic_bound(m in matrix_strategy(9)) {
        prop_assume!(m.ones() > 0);
        let warm = row_packing(&m, 2, 3).unwrap();
        match decide(&m, warm.len(), Budget::unlimited()) {
            DecisionOutcome::Sat(a) => {
                let p = assignment_to_partition(&m, &a).unwrap();
                prop_assert!(verify_partition(&m, &p).unwrap().is_valid());
                prop_assert!(p.len() <= warm.len());
            }
            other => prop_assert!(false, "expected Sat, got {:?}", other),
        }
    }

    #[test]
    fn partition_json_roundtrip(m in matrix_strategy(10)) {
        prop_assume!(m.ones() > 0);
        let p = row_packing(&m, 1, 0).unwrap();
        let parsed = bitrect::Partition::from_json(&p.to_json()).unwrap();
        prop_assert_eq!(parsed, p);
    }

    #[test]
    fn fooling_chain_orders(m in matrix_strategy(5)) {
        prop_assume!(m.ones() > 0);
        let exact_phi = max_fooling_set_exact(&m, 30).unwrap();
        for seed in 0..4 {
            let greedy = greedy_fooling_set(&m, seed);
            prop_assert!(greedy.len() <= exact_phi);
        }
        let rank = brute_force_binary_rank(&m, 30).unwrap();
        prop_assert!(exact_phi <= rank);
        prop_assert!(real_rank(&m) <= rank);
    }
}

#[test]
fn solver_agrees_with_oracle_and_rank_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for round in 0..60 {
        let m = BinaryMatrix::from_fn(4, 4, |_, _| rng.gen_bool(0.3 + 0.05 * (round % 9) as f64));
        if m.ones() == 0 {
            continue;
        }
        let result = solve(&m, &SolveConfig { trials: 4, ..Default::default() }).unwrap();
        assert_eq!(result.status, SolveStatus::Optimal);
        let oracle = brute_force_binary_rank(&m, 16).unwrap();
        assert_eq!(result.partition.len(), oracle, "matrix:\n{}", m.to_text());
        assert!(real_rank(&m) <= oracle);
        assert!(verify_partition(&m, &result.partition).unwrap().is_valid());
    }
}

/// Solving a row-permuted matrix yields the same optimal size as permuting
/// a solved partition (sizes only; the rectangles may differ).
#[test]
fn permutation_invariance_of_optimal_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..25 {
        let m = BinaryMatrix::from_fn(5, 5, |_, _| rng.gen_bool(0.5));
        if m.ones() == 0 {
            continue;
        }
        let mut perm: Vec<usize> = (0..5).collect();
        use rand::seq::SliceRandom;
        perm.shuffle(&mut rng);
        let permuted = m.permute_rows(&perm);
        let config = SolveConfig { trials: 8, ..Default::default() };
        let a = solve(&m, &config).unwrap();
        let b = solve(&permuted, &config).unwrap();
        assert_eq!(a.status, SolveStatus::Optimal);
        assert_eq!(b.status, SolveStatus::Optimal);
        assert_eq!(a.partition.len(), b.partition.len());
    }
}

#[test]
fn fooling_bound_not_tight_on_pinned_matrix() {
    let m = BinaryMatrix::parse("110\n011\n111\n").unwrap();
    assert_eq!(max_fooling_set_exact(&m, 30).unwrap(), 2);
    assert_eq!(brute_force_binary_rank(&m, 16).unwrap(), 3);
}

/// Coarse performance regression for the cubic-per-trial packing loop:
/// doubling the dimension must not blow past the expected growth by more
/// than small constants. Min-of-N timing keeps scheduler noise out.
#[test]
fn row_packing_scaling_is_near_cubic() {
    fn min_time(m: &BinaryMatrix, order: &[usize], reps: usize) -> f64 {
        let mut best = f64::INFINITY;
        for _ in 0..reps {
            let start = std::time::Instant::now();
            let p = row_packing_once(m, order).unwrap();
            best = best.min(start.elapsed().as_secs_f64());
            std::hint::black_box(p);
        }
        best
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let small = BinaryMatrix::from_fn(128, 128, |_, _| rng.gen_bool(0.5));
    let large = BinaryMatrix::from_fn(256, 256, |_, _| rng.gen_bool(0.5));
    let small_order: Vec<usize> = (0..128).collect();
    let large_order: Vec<usize> = (0..256).collect();
    let t_small = min_time(&small, &small_order, 40);
    let t_large = min_time(&large, &large_order, 40);
    let ratio = t_large / t_small;
    assert!(
        ratio <= 10.0,
        "doubling n grew single-trial time {ratio:.1}x (small {t_small:.6}s, large {t_large:.6}s)"
    );
}

#[test]
fn external_backend_agrees_when_solver_present() {
    let Some(cmd) = find_external_solver() else {
        println!("SKIP: no external SMT solver on PATH");
        return;
    };
    use bitrect::exact::{run_external, ExternalOutcome, SmtEncoding};
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for _ in 0..10 {
        let m = BinaryMatrix::from_fn(3, 3, |_, _| rng.gen_bool(0.5));
        if m.ones() == 0 {
            continue;
        }
        let oracle = brute_force_binary_rank(&m, 16).unwrap();
        for b in 1..=oracle + 1 {
            let internal = matches!(decide(&m, b, Budget::unlimited()), DecisionOutcome::Sat(_));
            let enc = SmtEncoding::new(&m, b);
            match run_external(&cmd, &enc).unwrap() {
                ExternalOutcome::Sat(a) => {
                    assert!(internal, "external sat, internal unsat at b={b}");
                    let p = assignment_to_partition(&m, &a).unwrap();
                    assert!(verify_partition(&m, &p).unwrap().is_valid());
                    assert!(p.len() <= b);
                }
                ExternalOutcome::Unsat => assert!(!internal, "external unsat, internal sat at b={b}"),
                ExternalOutcome::Unknown => panic!("external solver returned unknown"),
            }
        }
    }
}

/// Drives the process-based solver path with a stub executable, covering
/// command splitting, script handoff, and model decoding without a real
/// solver installed.
#[test]
#[cfg(unix)]
fn external_plumbing_with_stub_solver() {
    use bitrect::exact::{run_external, ExternalOutcome, SmtEncoding};
    use std::io::Write;
    use std::os::unix::fs::PermissionsExt;

    let dir = std::env::temp_dir().join(format!("bitrect-stub-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let stub = dir.join("stub-solver.sh");
    {
        let mut f = std::fs::File::create(&stub).unwrap();
        // echo a fixed sat model for the 2-cell encoding below; the script
        // path argument is ignored beyond an existence check
        writeln!(
            f,
            "#!/bin/sh\ntest -f \"$2\" || exit 1\nif [ \"$1\" = \"--sat\" ]; then\n  echo sat\n  echo '((define-fun f ((x!0 (_ BitVec 1))) (_ BitVec 1) (ite (= x!0 #b0) #b0 #b0)))'\nelse\n  echo unsat\nfi"
        )
        .unwrap();
    }
    std::fs::set_permissions(&stub, std::fs::Permissions::from_mode(0o755)).unwrap();

    let m = BinaryMatrix::parse("11\n").unwrap();
    let enc = SmtEncoding::new(&m, 1);
    let sat = run_external(&format!("{} --sat", stub.display()), &enc).unwrap();
    match sat {
        ExternalOutcome::Sat(a) => {
            let p = assignment_to_partition(&m, &a).unwrap();
            assert_eq!(p.len(), 1);
            assert!(verify_partition(&m, &p).unwrap().is_valid());
        }
        other => panic!("stub should report sat, got {other:?}"),
    }
    let unsat = run_external(&format!("{} --unsat", stub.display()), &enc).unwrap();
    assert_eq!(unsat, ExternalOutcome::Unsat);
    std::fs::remove_dir_all(&dir).ok();
}

fn find_external_solver() -> Option<String> {
    for cmd in ["z3", "cvc5 --lang smt2"] {
        let program = cmd.split_whitespace().next().unwrap();
        let found = std::process::Command::new(program)
            .arg("--version")
            .output()
            .is_ok();
        if found {
            return Some(cmd.to_string());
        }
    }
    None
}
