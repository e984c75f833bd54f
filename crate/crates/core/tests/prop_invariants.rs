//! Property-based invariants over randomized tables, partitions, and face
//! words.

mod common;

use std::collections::HashMap;

use num_complex::Complex64;
use proptest::prelude::*;

use bifree::functionals::{words_up_to, CumulantFunctional, Letter, MomentFunctional, Word};
use bifree::infdiv::{check_cbound, check_cnd, chi_words_up_to, PairCumulants};
use bifree::limits::{gaussian_moments, GaussianSpec};
use bifree::partitions::{
    chi_permutation, enumerate_bnc, is_bnc, transport_partition, ChiWord, Face, SetPartition,
};

fn two_letters() -> Vec<Letter> {
    vec![Letter::left("x").unwrap(), Letter::right("y").unwrap()]
}

fn complex_entry() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn moment_table(max_order: usize) -> impl Strategy<Value = MomentFunctional> {
    let alphabet = two_letters();
    let count = words_up_to(&alphabet, max_order).len();
    proptest::collection::vec(complex_entry(), count).prop_map(move |values| {
        let mut table = HashMap::new();
        for (w, v) in words_up_to(&alphabet, max_order).into_iter().zip(values) {
            table.insert(w, v);
        }
        MomentFunctional::new(alphabet.clone(), max_order, table).unwrap()
    })
}

fn cumulant_table(max_order: usize) -> impl Strategy<Value = CumulantFunctional> {
    moment_table(max_order).prop_map(|mf| mf.to_cumulants().unwrap())
}

/// A random set partition of `{1..n}` from a block-assignment vector.
fn set_partition(n: usize) -> impl Strategy<Value = SetPartition> {
    proptest::collection::vec(0..n, n).prop_map(move |assignment| {
        let mut blocks: HashMap<usize, Vec<usize>> = HashMap::new();
        for (i, &b) in assignment.iter().enumerate() {
            blocks.entry(b).or_default().push(i + 1);
        }
        SetPartition::new(n, blocks.into_values().collect()).unwrap()
    })
}

fn chi_word(n: usize) -> impl Strategy<Value = ChiWord> {
    proptest::collection::vec(prop::bool::ANY, n).prop_map(|bits| {
        ChiWord::new(
            bits.into_iter()
                .map(|b| if b { Face::Right } else { Face::Left })
                .collect(),
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transforms_round_trip(mf in moment_table(4)) {
        let back = mf.to_cumulants().unwrap().to_moments().unwrap();
        for w in words_up_to(mf.alphabet(), 4) {
            let d = (mf.moment(&w).unwrap() - back.moment(&w).unwrap()).norm();
            prop_assert!(d <= 1e-12, "word {}: {:.3e}", w, d);
        }
    }

    #[test]
    fn scaling_is_additive(cf in cumulant_table(3), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let split = cf.scale(s).convolve(&cf.scale(t)).unwrap();
        let joined = cf.scale(s + t);
        prop_assert!(split.max_abs_diff(&joined).unwrap() <= 1e-12);
    }

    #[test]
    fn bnc_membership_matches_transport(chi in chi_word(5), p in set_partition(5)) {
        let bnc = enumerate_bnc(&chi).unwrap();
        let member = is_bnc(&chi, &p).unwrap();
        prop_assert_eq!(member, bnc.contains(&p));
        // the defining bijection: transported non-crossing partitions are
        // exactly the members
        let s = chi_permutation(&chi);
        if p.is_noncrossing() {
            let image = transport_partition(&s, &p).unwrap();
            prop_assert!(is_bnc(&chi, &image).unwrap());
        }
    }

    #[test]
    fn gaussian_routes_agree(
        var_l in 0.1f64..1.0,
        var_r in 0.1f64..1.0,
        cross in complex_entry(),
    ) {
        let (xl, yr) = (Letter::left("x").unwrap(), Letter::right("y").unwrap());
        let mut cov = HashMap::new();
        cov.insert((xl.clone(), xl.clone()), Complex64::new(var_l, 0.0));
        cov.insert((yr.clone(), yr.clone()), Complex64::new(var_r, 0.0));
        cov.insert((xl.clone(), yr.clone()), cross);
        cov.insert((yr.clone(), xl.clone()), cross.conj());
        let g = GaussianSpec::new(cov).unwrap();

        let mut table = HashMap::new();
        table.insert(Word::new(vec![xl.clone(), xl.clone()]), Complex64::new(var_l, 0.0));
        table.insert(Word::new(vec![yr.clone(), yr.clone()]), Complex64::new(var_r, 0.0));
        table.insert(Word::new(vec![xl.clone(), yr.clone()]), cross);
        table.insert(Word::new(vec![yr.clone(), xl.clone()]), cross.conj());
        let cf = CumulantFunctional::new(vec![xl, yr], 4, table).unwrap();
        let mf = cf.to_moments().unwrap();
        for w in words_up_to(mf.alphabet(), 4) {
            let d = (mf.moment(&w).unwrap() - gaussian_moments(&g, &w).unwrap()).norm();
            prop_assert!(d <= 1e-12, "word {}: {:.3e}", w, d);
        }
    }

    #[test]
    fn face_word_census(cap in 1usize..6) {
        let words = chi_words_up_to(cap);
        let expect: usize = (1..=cap).map(|len| 1usize << len).sum();
        prop_assert_eq!(words.len(), expect);
    }

    #[test]
    fn cnd_check_is_total_on_arbitrary_tables(cf in cumulant_table(4)) {
        // random tables are rarely conditionally non-negative definite; the
        // check must still return a coherent report rather than panic
        let pc = PairCumulants::new(cf).unwrap();
        let report = check_cnd(&pc, 2, 1e-9).unwrap();
        if report.psd {
            prop_assert!(report.min_eigenvalue >= -1e-9);
        } else {
            prop_assert!(report.witness.is_some());
        }
    }

    #[test]
    fn cbound_check_is_total_on_arbitrary_tables(cf in cumulant_table(4)) {
        let pc = PairCumulants::new(cf).unwrap();
        for face in [Face::Left, Face::Right] {
            match check_cbound(&pc, face, 1, 1e-9) {
                Ok(bound) => prop_assert!(bound >= 0.0 && bound.is_finite()),
                Err(bifree::Error::NotConditionallyBounded { leak }) => {
                    prop_assert!(leak > 0.0)
                }
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }
    }
}
