use ndt_core::bp::{build_exact_obdd, random_nbp, random_read_once, Nbp, NodeLabel};
use ndt_core::term::{eval, is_positive};
use ndt_core::{Assignment, PropVar};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn vars(n: usize) -> Vec<PropVar> {
    (0..n as u32).map(PropVar).collect()
}

fn assign(ones: &[u32]) -> Assignment {
    Assignment::from_ones(ones.iter().copied().map(PropVar))
}

#[test]
fn exact_two_of_four() {
    let g = build_exact_obdd(4, 2);
    assert!(g.eval(&assign(&[1, 2])));
    assert!(!g.eval(&assign(&[])));
    assert!(!g.eval(&assign(&[1, 2, 3])));
    assert!(!g.is_positive());
    assert!(g.is_read_once());

    let c = g.positive_closure();
    assert!(c.is_positive());
    assert_eq!(c.positive_closure(), c);
    let four: Vec<PropVar> = (1..=4).map(PropVar).collect();
    let t = c.truth_table(&four);
    for i in 0..16 {
        assert_eq!(t.get(i), i.count_ones() >= 2);
    }
}

#[test]
fn degenerate_programs() {
    let one = Nbp::constant(true);
    assert!(one.eval(&assign(&[])) && one.eval(&assign(&[0, 3])));
    assert!(one.is_positive() && one.is_read_once());
    let (f, ax) = one.to_endt();
    assert_eq!(f.to_string(), "1");
    assert!(ax.is_empty());

    assert!(build_exact_obdd(0, 0).eval(&assign(&[])));
    let never = build_exact_obdd(3, 5);
    assert!((0..8).all(|i| !never.eval(&Assignment::from_index(&vars(4)[1..], i))));

    let labels = vec![NodeLabel::Var(PropVar(0)), NodeLabel::Var(PropVar(0)), NodeLabel::Sink(true)];
    let chain = Nbp::new(labels, 0, [(0, 1)], [(1, 2)]).unwrap();
    assert!(!chain.is_read_once());
}

#[test]
fn malformed_programs_are_rejected() {
    let labels = vec![NodeLabel::Var(PropVar(0)), NodeLabel::Sink(true)];
    assert!(Nbp::new(labels.clone(), 0, [(0, 0)], []).is_err());
    assert!(Nbp::new(labels.clone(), 0, [(1, 0)], []).is_err());
    assert!(Nbp::new(labels, 5, [], []).is_err());
    let two_sinks = vec![NodeLabel::Sink(true), NodeLabel::Sink(true)];
    assert!(Nbp::new(two_sinks, 0, [], []).is_err());
}

#[test]
fn exact_obdds_are_read_once_and_count() {
    for n in 0..=7usize {
        let w: Vec<PropVar> = (1..=n as u32).map(PropVar).collect();
        for k in -1..=n as i64 + 1 {
            let g = build_exact_obdd(n, k);
            assert!(g.is_read_once());
            let t = g.truth_table(&w);
            for i in 0..1usize << n {
                assert_eq!(t.get(i), i.count_ones() as i64 == k, "n={n} k={k}");
            }
            assert_eq!(g.positive_closure().truth_table(&w), t.monotone_closure());
        }
    }
}

/// The closure law needs read-once programs: a random search over general
/// programs turns up a witness where the two tables differ.
#[test]
fn closure_law_fails_for_some_general_program() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0B);
    let w = vars(3);
    let found = (0..5000).find_map(|_| {
        let g = random_nbp(&mut rng, 3, 5, 0.3);
        let lhs = g.positive_closure().truth_table(&w);
        (lhs != g.truth_table(&w).monotone_closure()).then_some(g)
    });
    let g = found.expect("a non-read-once witness exists among small programs");
    assert!(!g.is_read_once());
}

#[test]
fn fixture_witness() {
    let g = Nbp::parse(include_str!("fixtures/not_read_once.bp")).unwrap();
    let w = vars(1);
    assert!(!g.is_read_once());
    assert_eq!(g.truth_table(&w).bits(), &[false, false]);
    assert_eq!(g.positive_closure().truth_table(&w).bits(), &[false, true]);
}

#[test]
fn dot_export_marks_zero_edges_dotted() {
    let dot = build_exact_obdd(2, 1).to_dot();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("dotted"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn positive_programs_are_monotone(seed in any::<u64>(), n in 1usize..=10, inner in 1usize..14) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_nbp(&mut rng, n, inner, 0.25).positive_closure();
        prop_assert!(g.is_positive());
        prop_assert!(g.truth_table(&vars(n)).is_monotone());
    }

    #[test]
    fn closure_is_monotone_closure_for_read_once(seed in any::<u64>(), n in 1usize..=8, inner in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_read_once(&mut rng, n, inner, 0.3);
        prop_assert!(g.is_read_once());
        let w = vars(n);
        prop_assert_eq!(g.positive_closure().truth_table(&w), g.truth_table(&w).monotone_closure());
    }

    #[test]
    fn encoding_preserves_semantics(seed in any::<u64>(), n in 1usize..=6, inner in 1usize..10, close in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = random_nbp(&mut rng, n, inner, 0.3);
        if close {
            g = g.positive_closure();
        }
        let (f, ax) = g.to_endt();
        prop_assert!(ax.check().is_ok());
        if g.is_positive() {
            prop_assert!(is_positive(&f));
            prop_assert!(ax.iter().all(|(_, b)| is_positive(b)));
        }
        let w = vars(n);
        for i in 0..1usize << n {
            let a = Assignment::from_index(&w, i);
            prop_assert_eq!(eval(&f, &ax, &a).unwrap(), g.eval(&a));
        }
    }

    #[test]
    fn text_round_trip(seed in any::<u64>(), n in 1usize..=5, inner in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_nbp(&mut rng, n, inner, 0.3);
        prop_assert_eq!(Nbp::parse(&g.to_text()).unwrap(), g);
    }
}
