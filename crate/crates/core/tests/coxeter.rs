use std::collections::{HashMap, VecDeque};

use proptest::prelude::*;
use qsk::coxeter::{
    all_perms, braid_equal, coset_min_rep, is_scattered_subword, omega_ji, omega_word, perm_length, single_deletions,
    word_to_perm, Perm, ReducedWord,
};

fn word(letters: &[usize], n: usize) -> ReducedWord {
    ReducedWord::new(letters.to_vec(), n).unwrap()
}

/// Word length of every permutation of `S_n` by breadth-first search over
/// right multiplication by adjacent transpositions.
fn cayley_distances(n: usize) -> HashMap<Vec<usize>, usize> {
    let start: Vec<usize> = (1..=n).collect();
    let mut dist = HashMap::from([(start.clone(), 0)]);
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        let d = dist[&p];
        for i in 0..n - 1 {
            let mut next = p.clone();
            next.swap(i, i + 1);
            if !dist.contains_key(&next) {
                dist.insert(next.clone(), d + 1);
                queue.push_back(next);
            }
        }
    }
    dist
}

#[test]
fn length_examples() {
    assert_eq!(perm_length(&Perm::identity(4)), 0);
    assert_eq!(perm_length(&word_to_perm(&word(&[1], 2))), 1);
    let w = omega_ji(3, 1, 4).unwrap();
    assert_eq!(w.letters(), &[3, 2, 1]);
    assert_eq!(perm_length(&word_to_perm(&w)), 3);
}

#[test]
fn length_matches_cayley_distance() {
    for n in 1..=5 {
        let dist = cayley_distances(n);
        for p in all_perms(n) {
            assert_eq!(perm_length(&p), dist[p.images()], "{p:?}");
        }
    }
}

#[test]
fn evaluation_examples() {
    assert_eq!(word_to_perm(&ReducedWord::empty(3)), Perm::identity(3));
    assert_eq!(word_to_perm(&word(&[1, 1], 2)), Perm::identity(2));
    assert_eq!(word_to_perm(&word(&[1, 2, 1], 3)), word_to_perm(&word(&[2, 1, 2], 3)));
    assert!(!word(&[1, 1], 2).is_reduced());
}

#[test]
fn omega_examples() {
    assert_eq!(omega_word(3, 2, 1).unwrap().letters(), &[1]);
    assert_eq!(omega_word(3, 2, 3).unwrap().letters(), &[1, 2, 1]);
    // The last block ω_{3,4} is empty at k=1; (2,1,3,2,1) is the k=4 word.
    assert_eq!(omega_word(4, 2, 1).unwrap().letters(), &[2, 1]);
    assert_eq!(omega_word(4, 2, 4).unwrap().letters(), &[2, 1, 3, 2, 1]);
    assert_eq!(omega_word(5, 2, 2).unwrap().letters(), &[3, 2, 1, 4]);
    assert!(omega_word(4, 0, 1).is_err());
    assert!(omega_word(4, 2, 5).is_err());
}

#[test]
fn top_omega_is_reduced() {
    for n in 3..=5 {
        for k in 1..=n {
            let w = omega_word(n, 2, k).unwrap();
            assert!(w.is_reduced(), "n={n} k={k}");
            assert_eq!(perm_length(&word_to_perm(&w)), w.len());
        }
    }
}

/// `{h ∘ p}` for `h` permuting the values `1..=n-m`, built from images.
fn coset(p: &Perm, n: usize, m: usize) -> Vec<Perm> {
    let small = n - m;
    all_perms(small)
        .iter()
        .map(|h| {
            let img = p.images().iter().map(|&x| if x <= small { h.images()[x - 1] } else { x }).collect();
            Perm::from_images(img).unwrap()
        })
        .collect()
}

#[test]
fn coset_rep_is_the_strict_minimum() {
    for n in [4usize, 5] {
        for p in all_perms(n) {
            let rep = coset_min_rep(&p, n, 2);
            let members = coset(&p, n, 2);
            assert!(members.contains(&rep));
            let l = perm_length(&rep);
            for x in members.iter().filter(|&x| *x != rep) {
                assert!(perm_length(x) > l, "{p:?}: {x:?} not longer than {rep:?}");
            }
        }
    }
}

#[test]
fn coset_rep_examples() {
    assert_eq!(coset_min_rep(&Perm::identity(4), 4, 2), Perm::identity(4));
    let p = Perm::from_images(vec![2, 1, 3, 4]).unwrap();
    assert_eq!(coset_min_rep(&p, 4, 2), Perm::identity(4));
}

#[test]
fn braid_lemma_instances() {
    for n in 3..=7 {
        let lhs = omega_ji(n - 2, 1, n).unwrap().concat(&omega_ji(n - 1, 1, n).unwrap());
        let rhs = omega_ji(n - 1, 1, n).unwrap().concat(&omega_ji(n - 1, 2, n).unwrap());
        assert!(braid_equal(&lhs, &rhs), "n={n}");
    }
    assert!(!braid_equal(&word(&[1, 2], 3), &word(&[2, 1], 3)));
}

#[test]
fn letter_shift_identity() {
    for n in 3..=6 {
        for k in 1..=n - 2 {
            let lhs = omega_ji(n - 1, k, n).unwrap().concat(&omega_ji(n - 1, 1, n).unwrap());
            let rhs =
                omega_ji(n - 1, k + 1, n).unwrap().concat(&omega_ji(n - 1, 1, n).unwrap()).concat(&word(&[k + 1], n));
            assert!(braid_equal(&lhs, &rhs), "n={n} k={k}");
        }
    }
}

fn subsequence(a: &[usize], b: &[usize]) -> bool {
    match (a, b) {
        ([], _) => true,
        (_, []) => false,
        ([x, ra @ ..], [y, rb @ ..]) => (x == y && subsequence(ra, rb)) || subsequence(a, rb),
    }
}

fn words_up_to(len: usize, alphabet: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..len {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<usize>| {
                (1..=alphabet).map(move |a| {
                    let mut x = w.clone();
                    x.push(a);
                    x
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

#[test]
fn scattered_subword_exhaustive() {
    let all = words_up_to(5, 3);
    let ws: Vec<ReducedWord> = all.iter().map(|w| word(w, 4)).collect();
    for (a, wa) in all.iter().zip(&ws) {
        for (b, wb) in all.iter().zip(&ws) {
            assert_eq!(is_scattered_subword(wa, wb), subsequence(a, b), "{a:?} in {b:?}");
        }
    }
    assert!(is_scattered_subword(&ReducedWord::empty(3), &word(&[1, 2], 3)));
    assert!(is_scattered_subword(&word(&[1, 1], 3), &word(&[1, 2, 1], 3)));
}

#[test]
fn deletions_locate_the_letter() {
    let w = word(&[1, 2, 1], 3);
    assert_eq!(single_deletions(&w, &word(&[1, 1], 3)), vec![1]);
    assert_eq!(single_deletions(&w, &word(&[2, 1], 3)), vec![0]);
    assert_eq!(single_deletions(&w, &word(&[1, 2], 3)), vec![2]);
    assert!(single_deletions(&w, &word(&[1], 3)).is_empty());
}

#[test]
fn csv_form() {
    let w = ReducedWord::parse_csv("2, 1,3", 4).unwrap();
    assert_eq!(w.letters(), &[2, 1, 3]);
    assert_eq!(w.to_csv(), "2,1,3");
    assert!(ReducedWord::parse_csv("1,x", 3).is_err());
    assert!(ReducedWord::parse_csv("3", 3).is_err());
}

fn arb_word() -> impl Strategy<Value = (Vec<usize>, usize)> {
    (2usize..=5).prop_flat_map(|n| (prop::collection::vec(1..n, 0..9), Just(n)))
}

proptest! {
    #[test]
    fn length_bounded_by_letters((letters, n) in arb_word()) {
        let w = word(&letters, n);
        let l = perm_length(&word_to_perm(&w));
        prop_assert!(l <= w.len());
        prop_assert_eq!(l == w.len(), w.is_reduced());
        prop_assert_eq!(l % 2, w.len() % 2);
    }

    #[test]
    fn braid_equal_is_evaluation_equality((a, n) in arb_word(), b in prop::collection::vec(1usize..5, 0..9)) {
        let b: Vec<usize> = b.into_iter().map(|x| 1 + (x - 1) % (n - 1)).collect();
        let (wa, wb) = (word(&a, n), word(&b, n));
        prop_assert_eq!(braid_equal(&wa, &wb), word_to_perm(&wa) == word_to_perm(&wb));
        prop_assert!(braid_equal(&wa, &wa));
    }

    #[test]
    fn inverse_word_reverses((letters, n) in arb_word()) {
        let p = word_to_perm(&word(&letters, n));
        let rev: Vec<usize> = letters.iter().rev().copied().collect();
        prop_assert_eq!(word_to_perm(&word(&rev, n)), p.inverse());
        prop_assert_eq!(p.compose(&p.inverse()), Perm::identity(n));
    }
}
