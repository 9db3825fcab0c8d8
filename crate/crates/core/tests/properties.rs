use proptest::prelude::*;
use thompson::dyadic::Dyadic;
use thompson::normalform::{homeo_to_normalform, homeo_to_word, word_to_normalform, NormalForm};
use thompson::plhomeo::PLMap;
use thompson::words::{Letter, Marking, Word};

fn word(rank: usize, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((0..rank, any::<bool>()), 0..=max_len)
        .prop_map(|ls| Word::reduce(ls.into_iter().map(|(g, inv)| Letter::new(g, inv))))
}

fn element(max_len: usize) -> impl Strategy<Value = PLMap> {
    word(2, max_len).prop_map(|w| Marking::standard().evaluate(&w).unwrap())
}

fn unit_dyadic() -> impl Strategy<Value = Dyadic> {
    (0u64..12).prop_flat_map(|e| (0i64..=(1 << e), Just(e))).prop_map(|(n, e)| Dyadic::frac(n, e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn composition_is_associative(f in element(8), g in element(8), h in element(8)) {
        prop_assert_eq!(f.compose(&g).compose(&h), f.compose(&g.compose(&h)));
    }

    #[test]
    fn inverse_cancels(f in element(10)) {
        prop_assert!(f.compose(&f.inverse()).is_identity());
        prop_assert!(f.inverse().compose(&f).is_identity());
    }

    #[test]
    fn composition_acts_right_to_left(f in element(6), g in element(6), x in unit_dyadic()) {
        prop_assert_eq!(f.compose(&g).apply(&x), f.apply(&g.apply(&x)));
    }

    #[test]
    fn evaluation_is_a_homomorphism(u in word(2, 8), v in word(2, 8)) {
        let m = Marking::standard();
        let uv = m.evaluate(&u.mul(&v)).unwrap();
        prop_assert_eq!(uv, m.evaluate(&u).unwrap().compose(&m.evaluate(&v).unwrap()));
        prop_assert_eq!(m.evaluate(&u.inverse()).unwrap(), m.evaluate(&u).unwrap().inverse());
    }

    #[test]
    fn substitution_commutes_with_evaluation(w in word(3, 6), imgs in prop::collection::vec(word(2, 4), 3)) {
        let m = Marking::standard();
        let inner = Marking::new(imgs.iter().map(|i| m.evaluate(i).unwrap()).collect());
        let direct = m.evaluate(&w.substitute(&imgs).unwrap()).unwrap();
        prop_assert_eq!(direct, inner.evaluate(&w).unwrap());
    }

    #[test]
    fn disjoint_supports_commute(f in element(6), g in element(6)) {
        let half = Dyadic::frac(1, 1);
        let f = f.rescale_into(&Dyadic::zero(), &half).unwrap();
        let g = g.rescale_into(&half, &Dyadic::one()).unwrap();
        prop_assert!(f.support().interiors_disjoint(&g.support()));
        prop_assert_eq!(f.compose(&g), g.compose(&f));
    }

    #[test]
    fn conjugation_moves_support(f in element(6), g in element(6)) {
        let conj = g.compose(&f).compose(&g.inverse());
        prop_assert_eq!(conj.support(), f.support().image_under(&g));
    }

    #[test]
    fn normal_form_matches_evaluation(w in word(2, 10)) {
        let nf = word_to_normalform(&w).unwrap();
        let f = Marking::standard().evaluate(&w).unwrap();
        prop_assert!(nf.is_reduced());
        prop_assert_eq!(nf.to_homeo(), f.clone());
        prop_assert_eq!(homeo_to_normalform(&f), nf.clone());
        prop_assert_eq!(nf.to_string().parse::<NormalForm>().unwrap(), nf);
    }

    #[test]
    fn homeo_word_roundtrip(f in element(10)) {
        prop_assert_eq!(Marking::standard().evaluate(&homeo_to_word(&f)).unwrap(), f);
    }

    #[test]
    fn support_is_where_points_move(f in element(8), x in unit_dyadic()) {
        let moved = f.apply(&x) != x;
        let inside = f.support().intervals().iter().any(|(a, b)| a <= &x && &x <= b);
        prop_assert!(!moved || inside);
    }

    #[test]
    fn serde_roundtrip(f in element(8), w in word(3, 8)) {
        let back: PLMap = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(back, f);
        let back: Word = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
        prop_assert_eq!(&back, &w);
        prop_assert_eq!(w.to_string().parse::<Word>().unwrap(), w);
    }
}
