use ndt_core::sequent::{
    check_proof, check_soundness, parse_proof, parse_sequent, prove_by_search, sequent_valid, write_proof,
    SearchOutcome,
};
use ndt_core::sim::desugar_proof;
use ndt_core::term::desugar;
use ndt_core::{Dialect, ExtAxiomSet, Formula, Justification, Literal, Proof, PropVar, Sequent};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p(i: u32) -> PropVar {
    PropVar(i)
}

fn positive(n: u32, depth: u32) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        1 => Just(Formula::zero()),
        1 => Just(Formula::one()),
        5 => (0..n).prop_map(|i| Formula::var(p(i))),
    ];
    leaf.prop_recursive(depth, 16, 2, move |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), 0..n, inner).prop_map(|(a, i, b)| Formula::pdec(a, Literal::pos(p(i)), b)),
        ]
    })
}

fn sequent(n: u32, depth: u32) -> impl Strategy<Value = Sequent> {
    let side = || prop::collection::vec(positive(n, depth), 0..=3);
    (side(), side()).prop_map(|(a, s)| Sequent::new(a, s))
}

fn search(s: &Sequent) -> SearchOutcome {
    prove_by_search(s, &ExtAxiomSet::new()).unwrap()
}

/// Same proof with every cedent stored in a shuffled order.
fn permuted(p: &Proof, seed: u64) -> Proof {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = p.clone();
    for l in &mut q.lines {
        l.seq.ante.shuffle(&mut rng);
        l.seq.succ.shuffle(&mut rng);
    }
    q
}

/// Points one premise reference of a random rule line somewhere else.
fn mutated(p: &Proof, seed: u64) -> Option<Proof> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rules: Vec<usize> = (0..p.lines.len()).filter(|&i| !p.lines[i].just.premises().is_empty()).collect();
    let &i = rules.choose(&mut rng)?;
    let mut q = p.clone();
    if let Justification::Rule { premises, .. } = &mut q.lines[i].just {
        let j = rng.gen_range(0..premises.len());
        let old = premises[j];
        premises[j] = (0..i).find(|&t| t != old && !p.lines[t].seq.same_as(&p.lines[old].seq))?;
    }
    Some(q)
}

#[test]
fn search_examples() {
    let s = parse_sequent("p0, pdec(0, p1, p2) |- or(p0, p2)").unwrap();
    let proof = search(&s).proof().expect("valid");
    check_proof(&proof).unwrap();
    assert!(proof.conclusion().same_as(&s));

    let s = parse_sequent("pdec(p0, p1, p2) |- p0").unwrap();
    match search(&s) {
        SearchOutcome::Countermodel(a) => assert!(a.get(p(1)) && a.get(p(2)) && !a.get(p(0))),
        SearchOutcome::Proof(_) => panic!("the sequent is invalid"),
    }
}

#[test]
fn checker_rejects_bad_lines() {
    let bad = [
        // weakening with the wrong formula
        "dialect: eLNDT+\nL1: p0 |- p0 ; id[p0]\nL2: p0, p1 |- p0 ; wL[p2](L1)\n",
        // forward reference
        "dialect: eLNDT+\nL1: p0, p1 |- p0 ; wL[p1](L2)\nL2: p0 |- p0 ; id[p0]\n",
        // general decision in the positive dialect
        "dialect: eLNDT+\nL1: dec(p0, p1, p2) |- dec(p0, p1, p2) ; id[p0]\n",
        // negation axiom outside the dialect that has it
        "dialect: eLNDT+\nL1: p0, ~p0 |- ; negL[p0]\n",
    ];
    for text in bad {
        let rejected = match parse_proof(text) {
            Err(_) => true,
            Ok(p) => check_proof(&p).is_err(),
        };
        assert!(rejected, "accepted:\n{text}");
    }
    let ok = parse_proof("dialect: eLNDT+-\nL1: p0, ~p0 |- ; negL[p0]\n").unwrap();
    check_proof(&ok).unwrap();
}

/// Every extension-free positive sequent over two variables with one
/// depth-one formula per side: search and brute force agree.
#[test]
fn search_agrees_with_validity_exhaustively() {
    let mut atoms = vec![Formula::zero(), Formula::one()];
    atoms.extend((0..2).map(|i| Formula::var(p(i))));
    let mut fs = atoms.clone();
    for a in &atoms {
        for b in &atoms {
            fs.push(Formula::or(a.clone(), b.clone()));
            for v in 0..2 {
                fs.push(Formula::pdec(a.clone(), Literal::pos(p(v)), b.clone()));
            }
        }
    }
    let ax = ExtAxiomSet::new();
    for a in &fs {
        for s in &fs {
            let seq = Sequent::new(vec![a.clone()], vec![s.clone()]);
            let valid = sequent_valid(&seq, &ax).unwrap().is_valid();
            match search(&seq) {
                SearchOutcome::Proof(pf) => {
                    assert!(valid, "{seq}");
                    check_proof(&pf).unwrap();
                }
                SearchOutcome::Countermodel(_) => assert!(!valid, "{seq}"),
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn search_is_sound_and_complete(s in sequent(3, 2)) {
        let valid = sequent_valid(&s, &ExtAxiomSet::new()).unwrap().is_valid();
        match search(&s) {
            SearchOutcome::Proof(pf) => {
                prop_assert!(valid);
                prop_assert!(check_proof(&pf).is_ok());
                prop_assert!(pf.conclusion().same_as(&s));
                prop_assert!(check_soundness(&pf, 10).unwrap().is_sound());
            }
            SearchOutcome::Countermodel(_) => prop_assert!(!valid),
        }
    }

    #[test]
    fn verdicts_ignore_cedent_order(s in sequent(3, 2), seed in any::<u64>()) {
        if let SearchOutcome::Proof(pf) = search(&s) {
            prop_assert!(check_proof(&permuted(&pf, seed)).is_ok());
            if let Some(bad) = mutated(&pf, seed) {
                let verdict = check_proof(&bad).is_ok();
                prop_assert_eq!(check_proof(&permuted(&bad, seed ^ 1)).is_ok(), verdict);
                prop_assert_eq!(check_proof(&bad).is_ok(), verdict, "checking is deterministic");
            }
        }
    }

    #[test]
    fn positive_proofs_check_in_larger_dialects(s in sequent(3, 2)) {
        if let SearchOutcome::Proof(pf) = search(&s) {
            let mut pm = pf.clone();
            pm.dialect = Dialect::PlusMinus;
            prop_assert!(check_proof(&pm).is_ok());

            let d = desugar_proof(&pf).unwrap();
            prop_assert_eq!(&d.dialect, &Dialect::Elndt);
            prop_assert!(check_proof(&d).is_ok());
            let want = Sequent::new(s.ante.iter().map(desugar).collect(), s.succ.iter().map(desugar).collect());
            prop_assert!(d.conclusion().same_as(&want));
        }
    }

    #[test]
    fn proof_text_round_trips(s in sequent(3, 2)) {
        if let SearchOutcome::Proof(pf) = search(&s) {
            let text = write_proof(&pf);
            let back = parse_proof(&text).unwrap();
            prop_assert_eq!(back.lines.len(), pf.lines.len());
            for (x, y) in back.lines.iter().zip(&pf.lines) {
                prop_assert!(x.seq.same_as(&y.seq));
                prop_assert_eq!(x.just.premises(), y.just.premises());
            }
            prop_assert_eq!(write_proof(&back), text);
        }
    }
}
