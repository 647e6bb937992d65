use std::collections::HashMap;

use ndt_core::bp::build_exact_obdd;
use ndt_core::sequent::sequent_valid;
use ndt_core::term::{
    desugar, dnf_to_positive_sequent, eval, eval_traced, is_positive, parse_formula, parse_formula_any, posterm,
    substitute, truth_table,
};
use ndt_core::{Assignment, Dialect, ExtAxiomSet, ExtVar, Formula, Literal, PropVar, TruthTable};
use proptest::prelude::*;

fn p(i: u32) -> PropVar {
    PropVar(i)
}

fn vars(n: u32) -> Vec<PropVar> {
    (0..n).map(p).collect()
}

fn positive(n: u32) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        1 => Just(Formula::zero()),
        1 => Just(Formula::one()),
        6 => (0..n).prop_map(|i| Formula::var(p(i))),
    ];
    leaf.prop_recursive(5, 48, 2, move |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), 0..n, inner).prop_map(|(a, i, b)| Formula::pdec(a, Literal::pos(p(i)), b)),
        ]
    })
}

/// Formulas mixing every connective, negative literals included.
fn general(n: u32) -> impl Strategy<Value = Formula> {
    let literal = (0..n, any::<bool>()).prop_map(|(i, s)| Literal { var: p(i), positive: s });
    let leaf = prop_oneof![
        1 => Just(Formula::zero()),
        1 => Just(Formula::one()),
        6 => literal.clone().prop_map(Formula::lit),
    ];
    leaf.prop_recursive(5, 48, 2, move |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), literal.clone(), inner.clone()).prop_map(|(a, l, b)| Formula::dec(a, l, b)),
            (inner.clone(), literal.clone(), inner).prop_map(|(a, l, b)| Formula::pdec(a, l, b)),
        ]
    })
}

fn table(f: &Formula, n: u32) -> TruthTable {
    truth_table(f, &ExtAxiomSet::new(), &vars(n)).unwrap()
}

fn leq(a: &TruthTable, b: &TruthTable) -> bool {
    a.bits().iter().zip(b.bits()).all(|(x, y)| !x || *y)
}

#[test]
fn parse_examples() {
    let plus = Dialect::Plus;
    let f = parse_formula("pdec(0, p1, p2)", &plus).unwrap();
    assert_eq!(f, Formula::pdec(Formula::zero(), Literal::pos(p(1)), Formula::var(p(2))));

    let f = parse_formula_any("dec(e1, p0, or(e1, e2))").unwrap();
    let (e1, e2) = (Formula::ext(ExtVar::Plain(1)), Formula::ext(ExtVar::Plain(2)));
    assert_eq!(f, Formula::dec(e1.clone(), Literal::pos(p(0)), Formula::or(e1, e2)));
    assert!(is_positive(&f));

    assert!(parse_formula_any("dec(0, e1, 1)").is_err());
    assert!(!is_positive(&parse_formula_any("dec(p0, p1, p2)").unwrap()));
    assert!(is_positive(&parse_formula_any("pdec(0, p0, 1)").unwrap()));
}

#[test]
fn desugar_examples() {
    let (pv, qv) = (Literal::pos(p(0)), Literal::pos(p(1)));
    let inner = Formula::pdec(Formula::zero(), pv, Formula::one());
    let inner_d = Formula::dec(Formula::zero(), pv, Formula::or(Formula::zero(), Formula::one()));
    assert_eq!(desugar(&inner), inner_d);
    assert_eq!(desugar(&Formula::var(p(3))), Formula::var(p(3)));

    let e1 = Formula::ext(ExtVar::Plain(1));
    let nested = Formula::pdec(inner, qv, e1.clone());
    let want = Formula::dec(inner_d.clone(), qv, Formula::or(inner_d, e1));
    assert_eq!(desugar(&nested), want);
}

#[test]
fn axiom_set_order() {
    let mut ok = ExtAxiomSet::new();
    ok.push(ExtVar::Plain(0), Formula::var(p(0))).unwrap();
    assert!(ok.check().is_ok());

    let mut selfref = ExtAxiomSet::new();
    selfref.push(ExtVar::Plain(0), Formula::ext(ExtVar::Plain(0))).unwrap();
    assert!(selfref.check().is_err());

    // The encoding of "exactly 2 of 4" respects the witness order.
    let (_, ax) = build_exact_obdd(4, 2).to_endt();
    assert!(ax.check().is_ok());
}

#[test]
fn small_truth_tables() {
    let two = vars(2);
    let mut ax = ExtAxiomSet::new();
    let t = ax.instantiate_thr(&two, 1);
    let e = ax.instantiate_exact(&two, 1);
    let tt = |f: &Formula| truth_table(f, &ax, &two).unwrap();
    assert_eq!(tt(&Formula::one()).bits(), &[true; 4]);
    assert_eq!(tt(&Formula::ext(t)).bits(), &[false, true, true, true]);
    let exact = tt(&Formula::ext(e));
    assert_eq!(exact.bits(), &[false, true, true, false]);
    assert!(!exact.is_monotone());
    assert_eq!(exact.monotone_closure().bits(), &[false, true, true, true]);

    let four = vars(4);
    let mut ax = ExtAxiomSet::new();
    let t2 = Formula::ext(ax.instantiate_thr(&four, 2));
    let e2 = Formula::ext(ax.instantiate_exact(&four, 2));
    let thr = truth_table(&t2, &ax, &four).unwrap();
    assert!(thr.is_monotone());
    assert_eq!(truth_table(&e2, &ax, &four).unwrap().monotone_closure(), thr);
}

#[test]
fn substitution() {
    let (pv, qv, rv) = (p(0), p(1), p(2));
    let ax = ExtAxiomSet::new();
    let sigma = HashMap::from([(pv, Formula::one())]);
    let (g, _) = substitute(&Formula::or(Formula::var(pv), Formula::var(qv)), &sigma, &ax).unwrap();
    assert_eq!(g, Formula::or(Formula::one(), Formula::var(qv)));

    let a = Formula::var(qv);
    let sigma = HashMap::from([(qv, Formula::var(rv))]);
    let (g, _) = substitute(&Formula::pdec(a.clone(), Literal::pos(pv), a), &sigma, &ax).unwrap();
    assert_eq!(g, Formula::pdec(Formula::var(rv), Literal::pos(pv), Formula::var(rv)));

    // Decision variables cannot be replaced by compound formulas.
    let sigma = HashMap::from([(pv, Formula::or(Formula::var(qv), Formula::var(rv)))]);
    assert!(substitute(&Formula::dec(Formula::zero(), Literal::pos(pv), Formula::one()), &sigma, &ax).is_err());
}

#[test]
fn dnf_examples() {
    let (a, b) = (p(0), p(1));
    let xor = vec![vec![Literal::pos(a), Literal::neg(b)], vec![Literal::neg(a), Literal::pos(b)]];
    let s = dnf_to_positive_sequent(&xor);
    assert_eq!(s.ante.len(), 2);
    assert_eq!(s.succ.len(), 2);
    assert!(!sequent_valid(&s, &ExtAxiomSet::new()).unwrap().is_valid());

    let taut = vec![vec![Literal::pos(a)], vec![Literal::neg(a)]];
    assert!(sequent_valid(&dnf_to_positive_sequent(&taut), &ExtAxiomSet::new()).unwrap().is_valid());

    let single = dnf_to_positive_sequent(&[vec![Literal::pos(a)]]);
    assert_eq!(single.succ, vec![Formula::var(a)]);
}

/// Every nested unfolding names a strictly earlier variable than the one
/// being evaluated.
#[test]
fn evaluation_respects_the_witness_order() {
    for (n, k) in [(4, 2), (6, 3), (5, 0)] {
        let (f, ax) = build_exact_obdd(n, k).to_endt();
        let vs: Vec<PropVar> = (1..=n as u32).map(p).collect();
        for i in 0..1usize << n {
            let (_, trace) = eval_traced(&f, &ax, &Assignment::from_index(&vs, i)).unwrap();
            for (outer, inner) in trace {
                if let Some(outer) = outer {
                    assert!(ax.position(&inner).unwrap() < ax.position(&outer).unwrap(), "{outer} unfolded {inner}");
                }
            }
        }
    }
}

#[test]
fn axiom_text_round_trip() {
    let mut ax = ExtAxiomSet::new();
    ax.instantiate_exact(&vars(5), 2);
    ax.instantiate_thr(&vars(3), -1);
    let back = ExtAxiomSet::parse(&ax.to_text()).unwrap();
    assert_eq!(back, ax);
}

fn popcount_tables(n: u32) {
    let w = vars(n);
    for k in -1..=n as i64 + 2 {
        let mut ax = ExtAxiomSet::new();
        let t = Formula::ext(ax.instantiate_thr(&w, k));
        let e = Formula::ext(ax.instantiate_exact(&w, k));
        for i in 0..1usize << n {
            let a = Assignment::from_index(&w, i);
            let c = i.count_ones() as i64;
            assert_eq!(eval(&e, &ax, &a).unwrap(), c == k, "exact n={n} k={k} row {i}");
            // Negative thresholds bottom out in thr[; k] = 0, so they are
            // constant 0 rather than constant 1.
            let want = k >= 0 && c >= k;
            assert_eq!(eval(&t, &ax, &a).unwrap(), want, "thr n={n} k={k} row {i}");
        }
    }
}

#[test]
fn counting_families_match_popcount() {
    for n in 0..=10 {
        popcount_tables(n);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn desugar_preserves_semantics(f in general(12)) {
        let ax = ExtAxiomSet::new();
        let d = desugar(&f);
        prop_assert!(!d.has_posdec());
        let w = vars(12);
        for i in (0..1usize << 12).step_by(7) {
            let a = Assignment::from_index(&w, i);
            prop_assert_eq!(eval(&f, &ax, &a).unwrap(), eval(&d, &ax, &a).unwrap());
        }
    }

    #[test]
    fn desugar_preserves_tables(f in general(6)) {
        prop_assert_eq!(table(&f, 6), table(&desugar(&f), 6));
    }

    #[test]
    fn positive_formulas_are_monotone(f in positive(10)) {
        prop_assert!(is_positive(&f));
        prop_assert!(table(&f, 10).is_monotone());
    }

    #[test]
    fn printing_round_trips(f in general(8)) {
        prop_assert_eq!(parse_formula_any(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn closure_laws(n in 0usize..7, seed in any::<u64>(), other in any::<u64>()) {
        let bits = |s: u64| (0..1usize << n).map(|i| (s.rotate_left(i as u32 * 7) ^ i as u64) & 3 == 0).collect::<Vec<_>>();
        let t = TruthTable::new(vars(n as u32), bits(seed)).unwrap();
        let c = t.monotone_closure();
        prop_assert!(c.is_monotone());
        prop_assert!(leq(&t, &c));
        prop_assert_eq!(c.monotone_closure(), c.clone());

        let union: Vec<bool> = t.bits().iter().zip(bits(other)).map(|(a, b)| *a || b).collect();
        let u = TruthTable::new(vars(n as u32), union).unwrap();
        prop_assert!(leq(&c, &u.monotone_closure()));
        if t.is_monotone() {
            prop_assert_eq!(c, t);
        }
    }

    #[test]
    fn posterm_is_conjunction(n in 1u32..=10, shift in 0u32..5) {
        let vs: Vec<PropVar> = (0..n).map(|i| p(i + shift)).collect();
        let f = posterm(&vs).unwrap();
        let t = truth_table(&f, &ExtAxiomSet::new(), &vs).unwrap();
        let last = t.bits().len() - 1;
        for (i, bit) in t.bits().iter().enumerate() {
            prop_assert_eq!(*bit, i == last);
        }
    }

    #[test]
    fn dnf_translation_is_equivalid(
        terms in prop::collection::vec(prop::collection::vec((0u32..5, any::<bool>()), 0..4), 0..=6)
    ) {
        let terms: Vec<Vec<Literal>> = terms
            .into_iter()
            .map(|t| t.into_iter().map(|(v, s)| Literal { var: p(v), positive: s }).collect())
            .collect();
        let w = vars(5);
        let dnf_valid = (0..1usize << 5).all(|i| {
            let a = Assignment::from_index(&w, i);
            terms.iter().any(|t| t.iter().all(|l| l.holds(&a)))
        });
        let s = dnf_to_positive_sequent(&terms);
        prop_assert!(s.formulas().all(is_positive));
        prop_assert_eq!(sequent_valid(&s, &ExtAxiomSet::new()).unwrap().is_valid(), dnf_valid);
    }
}
