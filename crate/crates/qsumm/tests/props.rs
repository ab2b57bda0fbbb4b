//! Property-based invariants over the numeric and text kernels.

use proptest::prelude::*;

use qsumm::rouge::{rouge_su, RougeMode};
use qsumm::textproc::stem;
use qsumm::vectorspace::{cosine, SparseVector};

fn sparse_vec() -> impl Strategy<Value = SparseVector<f64>> {
    proptest::collection::btree_map(0u32..40, -5.0f64..5.0, 0..12)
        .prop_map(|m| SparseVector::from_sorted(m.into_iter().collect()))
}

fn tokens() -> impl Strategy<Value = Vec<String>> {
    proptest::collection::vec(
        proptest::sample::select(vec!["a", "b", "c", "d", "e"]).prop_map(str::to_string),
        0..20,
    )
}

proptest! {
    #[test]
    fn cosine_is_symmetric_and_bounded(a in sparse_vec(), b in sparse_vec()) {
        let ab = cosine(&a, &b);
        let ba = cosine(&b, &a);
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&ab));
    }

    #[test]
    fn cosine_is_scale_invariant(a in sparse_vec(), b in sparse_vec(), c in 0.01f64..100.0) {
        let scaled = SparseVector::from_sorted(
            a.entries().iter().map(|&(i, v)| (i, v * c)).collect(),
        );
        prop_assert!((cosine(&a, &b) - cosine(&scaled, &b)).abs() < 1e-9);
    }

    #[test]
    fn cosine_of_self_is_one_or_zero(a in sparse_vec()) {
        let s = cosine(&a, &a);
        if a.entries().iter().any(|&(_, v)| v != 0.0) {
            prop_assert!((s - 1.0).abs() < 1e-9);
        } else {
            prop_assert_eq!(s, 0.0);
        }
    }

    #[test]
    fn rouge_swap_exchanges_precision_and_recall(
        c in tokens(), r in tokens(), d in 0usize..6
    ) {
        for mode in [RougeMode::S, RougeMode::SU] {
            let fwd = rouge_su::<f64, _, _>(&c, &r, d, mode);
            let rev = rouge_su::<f64, _, _>(&r, &c, d, mode);
            prop_assert!((fwd.precision - rev.recall).abs() < 1e-12);
            prop_assert!((fwd.recall - rev.precision).abs() < 1e-12);
            prop_assert!((fwd.f1 - rev.f1).abs() < 1e-12);
        }
    }

    #[test]
    fn rouge_identical_inputs_score_one(c in tokens(), d in 0usize..6) {
        prop_assume!(!c.is_empty());
        let s = rouge_su::<f64, _, _>(&c, &c, d, RougeMode::SU);
        prop_assert!((s.f1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stem_never_grows_and_keeps_charset(w in "[a-z]{1,20}") {
        let s = stem(&w);
        prop_assert!(s.len() <= w.len());
        prop_assert!(s.bytes().all(|b| b.is_ascii_lowercase()));
    }

    #[test]
    fn tokenize_output_is_lowercase_alphanumeric(text in ".{0,200}") {
        for t in qsumm::textproc::tokenize(&text) {
            prop_assert!(!t.is_empty());
            // some Unicode uppercase letters have no lowercase mapping, so
            // only the ASCII range is guaranteed lowercased
            prop_assert!(t.chars().all(|c| c.is_alphanumeric()));
            prop_assert!(!t.bytes().any(|b| b.is_ascii_uppercase()));
        }
    }
}
