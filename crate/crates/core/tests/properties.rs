use std::sync::Arc;

use branchlab::level_quotient::LevelQuotient;
use branchlab::*;
use proptest::prelude::*;

fn grig() -> Arc<SelfSimilarGroup> {
    Arc::new(grigorchuk())
}

fn ggs12() -> Arc<SelfSimilarGroup> {
    Arc::new(ggs(&GgsSpec::new(3, &[1, 2]).unwrap()).0)
}

fn gen_word(letters: &'static str, max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(letters.chars().collect::<Vec<_>>()), 1..=max)
        .prop_map(|v| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "))
}

fn vertex(d: u8, max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0..d, 0..=max)
}

fn probes(d: usize, depth: usize) -> Vec<Word> {
    let mut out = vec![Word::empty(d)];
    let mut frontier = out.clone();
    for _ in 0..depth {
        frontier = frontier.iter().flat_map(|w| w.children().collect::<Vec<_>>()).collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

fn same_action(x: &TreeAutomorphism, y: &TreeAutomorphism, depth: usize) -> bool {
    probes(x.arity(), depth).iter().all(|w| x.act(w) == y.act(w))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cocycle_identity(g in gen_word("abcd", 6), h in gen_word("abcd", 6), v in vertex(2, 3)) {
        let group = grig();
        let g = TreeAutomorphism::parse(&group, &g).unwrap();
        let h = TreeAutomorphism::parse(&group, &h).unwrap();
        let v = Word::new(2, v).unwrap();
        let lhs = g.compose(&h).section(&v);
        let rhs = g.section(&h.act(&v)).compose(&h.section(&v));
        prop_assert!(same_action(&lhs, &rhs, 5));
    }

    #[test]
    fn act_is_a_left_action(g in gen_word("ab", 6), h in gen_word("ab", 6), w in vertex(3, 5)) {
        let group = ggs12();
        let g = TreeAutomorphism::parse(&group, &g).unwrap();
        let h = TreeAutomorphism::parse(&group, &h).unwrap();
        let w = Word::new(3, w).unwrap();
        prop_assert_eq!(g.compose(&h).act(&w), g.act(&h.act(&w)));
        prop_assert_eq!(g.inverse().act(&g.act(&w)), w);
    }

    #[test]
    fn inverse_reverses_products(g in gen_word("abcd", 6), h in gen_word("abcd", 6)) {
        let group = grig();
        let g = TreeAutomorphism::parse(&group, &g).unwrap();
        let h = TreeAutomorphism::parse(&group, &h).unwrap();
        let lhs = g.compose(&h).inverse();
        let rhs = h.inverse().compose(&g.inverse());
        prop_assert!(lhs.equals(&rhs, &EqBudget::default()).is_proven());
    }

    #[test]
    fn grafts_at_incomparable_vertices_commute(
        k in gen_word("abcd", 5), l in gen_word("abcd", 5),
        u in vertex(2, 3), v in vertex(2, 3),
    ) {
        let group = grig();
        let (u, v) = (Word::new(2, u).unwrap(), Word::new(2, v).unwrap());
        prop_assume!(!u.is_prefix_of(&v) && !v.is_prefix_of(&u));
        let x = TreeAutomorphism::graft(&u, &TreeAutomorphism::parse(&group, &k).unwrap());
        let y = TreeAutomorphism::graft(&v, &TreeAutomorphism::parse(&group, &l).unwrap());
        prop_assert!(x.commutator(&y).is_trivial(&EqBudget::default()).is_proven());
        prop_assert!(same_action(&x.compose(&y), &y.compose(&x), 6));
    }

    #[test]
    fn graft_sections(k in gen_word("abcd", 5), v in vertex(2, 3), w in vertex(2, 3)) {
        let group = grig();
        let k = TreeAutomorphism::parse(&group, &k).unwrap();
        let v = Word::new(2, v).unwrap();
        let g = TreeAutomorphism::graft(&v, &k);
        prop_assert!(g.section(&v).equals(&k, &EqBudget::default()).is_proven());
        let w = Word::new(2, w).unwrap();
        if !v.is_prefix_of(&w) && !w.is_prefix_of(&v) {
            prop_assert_eq!(g.act(&w), w);
        }
    }

    #[test]
    fn quotient_is_a_homomorphism(g in gen_word("abcd", 8), h in gen_word("abcd", 8)) {
        let group = grig();
        let q = LevelQuotient::build(&group, 4).unwrap();
        let g = TreeAutomorphism::parse(&group, &g).unwrap();
        let h = TreeAutomorphism::parse(&group, &h).unwrap();
        prop_assert_eq!(q.perm_of(&g.compose(&h)), q.perm_of(&g).compose(&q.perm_of(&h)));
        prop_assert!(q.whole().contains(&q.perm_of(&g)));
    }

    #[test]
    fn word_text_round_trip(v in vertex(3, 6)) {
        let w = Word::new(3, v).unwrap();
        prop_assert_eq!(Word::parse(3, &w.to_string()).unwrap(), w);
    }

    #[test]
    fn element_text_round_trip(k in gen_word("abcd", 5), v in vertex(2, 3), g in gen_word("abcd", 4)) {
        let group = grig();
        let x = TreeAutomorphism::graft(&Word::new(2, v).unwrap(), &TreeAutomorphism::parse(&group, &k).unwrap())
            .compose(&TreeAutomorphism::parse(&group, &g).unwrap());
        let y = TreeAutomorphism::parse(&group, &x.to_string()).unwrap();
        prop_assert!(same_action(&x, &y, 6));
    }
}
