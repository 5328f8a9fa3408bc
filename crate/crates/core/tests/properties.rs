mod common;

use entmon::detector::{
    enumerate_partitions, exclusion_report, genuine_threshold, m_pb, m_total, m_total_bound,
    partition_bound, s_threshold, EPS_DET,
};
use entmon::frames::{preferred_frames, LocalFrame, ZeroPolicy};
use entmon::statevec::{make_random_haar, Matrix2};
use entmon::tensor::bloch_of;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn su2(theta: f64, phi: f64, lambda: f64) -> Matrix2 {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    [
        [Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
        [Complex64::from_polar(s, phi), Complex64::from_polar(c, phi + lambda)],
    ]
}

fn partition_count(n: usize) -> usize {
    // p(n) by the standard coin-change recurrence
    let mut p = vec![0usize; n + 1];
    p[0] = 1;
    for part in 1..=n {
        for total in part..=n {
            p[total] += p[total - part];
        }
    }
    p[n]
}

#[test]
fn partition_counts() {
    assert_eq!(enumerate_partitions(5, None).unwrap().len(), 7);
    for n in 1..=20 {
        assert_eq!(enumerate_partitions(n, None).unwrap().len(), partition_count(n), "n={n}");
    }
    assert_eq!(partition_count(20), 627);
}

#[test]
fn generic_states_differ_from_frame_choice() {
    // computational-frame M is not frame invariant, M^(pb) is
    let s = make_random_haar(3, 5).unwrap();
    let m = m_total(&s, &[LocalFrame::identity(); 3]).unwrap();
    let frames = preferred_frames(&s, &ZeroPolicy::Canonical).unwrap();
    let pb = m_total(&s, &frames).unwrap();
    assert!((m - pb).abs() > 1e-6);
    assert!((pb - m_pb(&s, &ZeroPolicy::Canonical).unwrap()).abs() <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn local_unitary_invariance(n in 2usize..=6, seed in any::<u64>(),
                                angles in prop::collection::vec((0.0..6.3f64, 0.0..6.3f64, 0.0..6.3f64), 6)) {
        let s = common::haar_with_bloch(n, seed, 1e-6);
        let mut u = s.clone();
        for (q, &(t, p, l)) in angles.iter().take(n).enumerate() {
            u = u.apply_local_unitary(q, &su2(t, p, l)).unwrap();
        }
        let a = m_pb(&s, &ZeroPolicy::Canonical).unwrap();
        let b = m_pb(&u, &ZeroPolicy::Canonical).unwrap();
        prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }

    #[test]
    fn global_bound_and_nonnegativity(n in 2usize..=7, seed in any::<u64>()) {
        let s = make_random_haar(n, seed).unwrap();
        let v = m_pb(&s, &ZeroPolicy::Canonical).unwrap();
        prop_assert!(v >= -EPS_DET);
        prop_assert!(v <= m_total_bound(n) + EPS_DET);
        for k in 0..n {
            prop_assert!(bloch_of(&s, k).unwrap().norm() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn product_states_never_excluded_at_own_partition(seed in any::<u64>(), n in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (state, partition) = common::random_product(n, &mut rng);
        let v = m_pb(&state, &ZeroPolicy::Canonical).unwrap();
        prop_assert!(v <= partition_bound(&partition) + EPS_DET);
        let r = exclusion_report(&state, &ZeroPolicy::Canonical).unwrap();
        prop_assert!(r.excluded_partitions.iter().all(|pb| pb.0 != partition));
        prop_assert!(!r.genuine_multipartite);
    }

    #[test]
    fn thresholds_are_consistent(n in 3usize..=20) {
        let all = enumerate_partitions(n, None).unwrap();
        for k in 2..n {
            let s = s_threshold(n, k).unwrap();
            let max = all.iter().filter(|p| p.k() == k).map(partition_bound).fold(0.0, f64::max);
            prop_assert_eq!(s, max);
        }
        let g = genuine_threshold(n).unwrap();
        let max = all.iter().filter(|p| !p.is_trivial()).map(partition_bound).fold(0.0, f64::max);
        prop_assert_eq!(g, max);
    }

    #[test]
    fn report_excludes_exactly_above_bound(n in 3usize..=9, v in 0.0..40.0f64) {
        let t = entmon::cli::partition_table(n, v).unwrap();
        for row in &t.partitions {
            if row.k == 1 {
                continue;
            }
            let excluded = v > row.bound + EPS_DET;
            prop_assert_eq!(row.verdict == "excluded", excluded);
        }
    }
}

#[test]
fn dicke_formula_even_n_canonical() {
    for n in (4..=10).step_by(2) {
        for e in 0..=n {
            let numeric = m_pb(&entmon::statevec::make_dicke(n, e).unwrap(), &ZeroPolicy::Canonical).unwrap();
            let formula = entmon::families::dicke_m_pb(n, e).unwrap().value;
            assert!((numeric - formula).abs() <= 1e-9, "n={n} e={e}");
        }
    }
}
