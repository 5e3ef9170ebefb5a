//! Symmetric-group words: lengths, evaluation, the descending words
//! `ω_{j,i} = s_j s_{j-1} ⋯ s_i`, the Stiefel words `ω_k` and minimal coset
//! representatives for `S_{n-m}`.
//!
//! Permutations are stored in one-line notation with 1-based images. A word
//! `s_{i_1} s_{i_2} ⋯` evaluates left to right as the composition
//! `s_{i_1} ∘ s_{i_2} ∘ ⋯`, so appending `s_i` swaps positions `i` and `i+1`.

use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm { images: (1..=n).collect() }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self, Error> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x == 0 || x > n || seen[x - 1] {
                return Err(Error::InvalidArgument(format!("{images:?} is not a permutation of 1..={n}")));
            }
            seen[x - 1] = true;
        }
        Ok(Perm { images })
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(self.n(), other.n(), "degree mismatch");
        Perm { images: other.images.iter().map(|&x| self.images[x - 1]).collect() }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.n()];
        for (pos, &x) in self.images.iter().enumerate() {
            inv[x - 1] = pos + 1;
        }
        Perm { images: inv }
    }

    /// Right multiplication by `s_i`.
    fn times_generator(&mut self, i: usize) {
        self.images.swap(i - 1, i);
    }
}

/// All permutations of degree `n` in lexicographic order of one-line notation.
pub fn all_perms(n: usize) -> Vec<Perm> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Perm>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(Perm { images: prefix.clone() });
            return;
        }
        for x in 1..=n {
            if !used[x - 1] {
                used[x - 1] = true;
                prefix.push(x);
                rec(prefix, used, out);
                prefix.pop();
                used[x - 1] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReducedWord {
    letters: Vec<usize>,
    n: usize,
    reduced: bool,
}

impl ReducedWord {
    /// Builds a word in the generators of `S_n`; the `reduced` flag is
    /// computed here. Letters must lie in `1..n`.
    pub fn new(letters: Vec<usize>, n: usize) -> Result<Self, Error> {
        if let Some(&bad) = letters.iter().find(|&&i| i == 0 || i >= n) {
            return Err(Error::InvalidArgument(format!("letter s_{bad} is out of range for S_{n}")));
        }
        let mut p = Perm::identity(n);
        for &i in &letters {
            p.times_generator(i);
        }
        let reduced = perm_length(&p) == letters.len();
        Ok(ReducedWord { letters, n, reduced })
    }

    pub fn empty(n: usize) -> Self {
        ReducedWord { letters: Vec::new(), n, reduced: true }
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn concat(&self, other: &ReducedWord) -> ReducedWord {
        assert_eq!(self.n, other.n, "degree mismatch");
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        ReducedWord::new(letters, self.n).expect("letters already validated")
    }

    /// The word with the letter at `pos` (0-based) removed.
    pub fn delete(&self, pos: usize) -> ReducedWord {
        let mut letters = self.letters.clone();
        letters.remove(pos);
        ReducedWord::new(letters, self.n).expect("letters already validated")
    }

    /// Comma-separated letters, the form used on the command line and in reports.
    pub fn to_csv(&self) -> String {
        self.letters.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn parse_csv(s: &str, n: usize) -> Result<Self, Error> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(ReducedWord::empty(n));
        }
        let letters = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| Error::InvalidArgument(format!("bad letter {t:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        ReducedWord::new(letters, n)
    }
}

/// Inversion count.
pub fn perm_length(p: &Perm) -> usize {
    let im = p.images();
    let mut inv = 0;
    for a in 0..im.len() {
        for b in a + 1..im.len() {
            if im[a] > im[b] {
                inv += 1;
            }
        }
    }
    inv
}

pub fn word_to_perm(w: &ReducedWord) -> Perm {
    let mut p = Perm::identity(w.n);
    for &i in &w.letters {
        p.times_generator(i);
    }
    p
}

/// `ω_{j,i} = s_j s_{j-1} ⋯ s_i`, empty when `j < i`.
pub fn omega_ji(j: usize, i: usize, n: usize) -> Result<ReducedWord, Error> {
    if j < i {
        return Ok(ReducedWord::empty(n));
    }
    ReducedWord::new((i..=j).rev().collect(), n)
}

/// `ω_k = ω_{n-m,1} ω_{n-m+1,1} ⋯ ω_{n-2,1} ω_{n-1,n-k+1}`.
pub fn omega_word(n: usize, m: usize, k: usize) -> Result<ReducedWord, Error> {
    if m == 0 || m >= n || k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "omega_word needs 1 <= m <= n-1 and 1 <= k <= n, got n={n} m={m} k={k}"
        )));
    }
    let mut letters = Vec::new();
    for j in n - m..n - 1 {
        letters.extend(omega_ji(j, 1, n)?.letters);
    }
    letters.extend(omega_ji(n - 1, n - k + 1, n)?.letters);
    ReducedWord::new(letters, n)
}

/// Minimal-length element of the left coset `S_{n-m} ∘ p`, where `S_{n-m}`
/// permutes the values `1..=n-m`. Those values keep their positions but are
/// rewritten in increasing order.
pub fn coset_min_rep(p: &Perm, n: usize, m: usize) -> Perm {
    assert_eq!(p.n(), n, "degree mismatch");
    assert!(m >= 1 && m < n, "need 1 <= m <= n-1");
    let small = n - m;
    let mut images = p.images().to_vec();
    let mut next = 1;
    for x in images.iter_mut() {
        if *x <= small {
            *x = next;
            next += 1;
        }
    }
    Perm { images }
}

pub fn braid_equal(w1: &ReducedWord, w2: &ReducedWord) -> bool {
    w1.n == w2.n && word_to_perm(w1) == word_to_perm(w2)
}

/// True iff the letters of `w1` occur in order, not necessarily contiguously, in `w2`.
pub fn is_scattered_subword(w1: &ReducedWord, w2: &ReducedWord) -> bool {
    let mut it = w2.letters.iter();
    w1.letters.iter().all(|a| it.any(|b| b == a))
}

/// Positions `pos` with `w.delete(pos) == target`: the single-letter deletions
/// `w = w₁ s_k w₂ → w₁ w₂`.
pub fn single_deletions(w: &ReducedWord, target: &ReducedWord) -> Vec<usize> {
    if w.len() != target.len() + 1 {
        return Vec::new();
    }
    (0..w.len()).filter(|&pos| w.delete(pos).letters == target.letters).collect()
}
