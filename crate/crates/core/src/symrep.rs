//! Symbolic word representations.
//!
//! An entry `ψ_{t,w}(u_rs)` is a sum over index paths `r = j_0 → j_1 → ⋯ → j_ℓ = s`
//! of elementary tensors, one atom per letter of `w`, weighted by a torus
//! monomial from `τ_t(u_rr) = t_{n-r+1}`. [`PathSum`] stores these sums
//! exactly: integer multiplicities, integer powers of `q`, integer torus
//! exponents. Square roots only ever appear inside atoms.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::coxeter::ReducedWord;
use crate::fock::{atom_matrix, torus_power, AtomKind, FactorSpace, SparseOp};
use crate::{Error, C64};

/// Exponents of `t_1 … t_{n-1}`; `t_n` is stored as `t̄_1 ⋯ t̄_{n-1}`.
/// Under the `𝕋^m` embedding the variables past `m` are set to 1 when a
/// monomial is evaluated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TorusMonomial {
    pub exponents: Vec<i32>,
}

impl TorusMonomial {
    pub fn one(n: usize) -> Self {
        TorusMonomial { exponents: vec![0; n.saturating_sub(1)] }
    }

    /// The coordinate `t_j`, `1 ≤ j ≤ n`.
    pub fn generator(j: usize, n: usize) -> Self {
        let mut e = vec![0; n - 1];
        if j == n {
            e.iter_mut().for_each(|x| *x = -1);
        } else {
            e[j - 1] = 1;
        }
        TorusMonomial { exponents: e }
    }

    pub fn mul(&self, other: &TorusMonomial) -> TorusMonomial {
        TorusMonomial { exponents: self.exponents.iter().zip(&other.exponents).map(|(a, b)| a + b).collect() }
    }

    pub fn conj(&self) -> TorusMonomial {
        TorusMonomial { exponents: self.exponents.iter().map(|a| -a).collect() }
    }

    pub fn is_one(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    /// Only the first `m` coordinates are free under the `𝕋^m` embedding.
    pub fn involves_only_first(&self, m: usize) -> bool {
        self.exponents.iter().skip(m).all(|&e| e == 0)
    }

    pub fn evaluate(&self, sample: &[C64]) -> C64 {
        self.exponents.iter().zip(sample).map(|(&e, &t)| t.powi(e)).product()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub atoms: Vec<AtomKind>,
    pub torus: TorusMonomial,
    pub q_power: i32,
}

/// Formal sum of elementary tensors with integer multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSum {
    n: usize,
    slots: usize,
    terms: BTreeMap<Term, i64>,
}

impl PathSum {
    pub fn zero(n: usize, slots: usize) -> Self {
        PathSum { n, slots, terms: BTreeMap::new() }
    }

    pub fn identity(n: usize, slots: usize) -> Self {
        Self::monomial(n, vec![AtomKind::One; slots], TorusMonomial::one(n), 1)
    }

    pub fn monomial(n: usize, atoms: Vec<AtomKind>, torus: TorusMonomial, mult: i64) -> Self {
        let mut p = PathSum::zero(n, atoms.len());
        p.insert(Term { atoms, torus, q_power: 0 }, mult);
        p
    }

    fn insert(&mut self, term: Term, mult: i64) {
        debug_assert_eq!(term.atoms.len(), self.slots);
        if mult == 0 || term.atoms.contains(&AtomKind::Zero) {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(term) {
            Entry::Vacant(v) => {
                v.insert(mult);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += mult;
                // Cancelled keys are removed so equality is structural.
                if *o.get() == 0 {
                    o.remove();
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Term, i64)> {
        self.terms.iter().map(|(t, &m)| (t, m))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_compatible(&self, other: &PathSum) -> Result<(), Error> {
        if self.n != other.n || self.slots != other.slots {
            return Err(Error::ShapeMismatch(format!(
                "path sums of degree/slots {}/{} and {}/{}",
                self.n, self.slots, other.n, other.slots
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &PathSum) -> Result<PathSum, Error> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (t, m) in other.terms() {
            out.insert(t.clone(), m);
        }
        Ok(out)
    }

    pub fn scale(&self, c: i64) -> PathSum {
        let mut out = PathSum::zero(self.n, self.slots);
        for (t, m) in self.terms() {
            out.insert(t.clone(), c * m);
        }
        out
    }

    pub fn sub(&self, other: &PathSum) -> Result<PathSum, Error> {
        self.add(&other.scale(-1))
    }

    pub fn adjoint(&self) -> PathSum {
        let mut out = PathSum::zero(self.n, self.slots);
        for (t, m) in self.terms() {
            out.insert(
                Term {
                    atoms: t.atoms.iter().map(|a| a.adjoint()).collect(),
                    torus: t.torus.conj(),
                    q_power: t.q_power,
                },
                m,
            );
        }
        out
    }

    /// Slot-wise operator product. Fails when some slot product is not a
    /// single atom of the alphabet.
    pub fn mul(&self, other: &PathSum) -> Result<PathSum, Error> {
        self.check_compatible(other)?;
        let mut out = PathSum::zero(self.n, self.slots);
        for (a, ma) in self.terms() {
            for (b, mb) in other.terms() {
                let atoms = a
                    .atoms
                    .iter()
                    .zip(&b.atoms)
                    .map(|(&x, &y)| {
                        x.product(y).ok_or_else(|| Error::UnexpectedAtom(format!("{x:?}·{y:?} is not an atom")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                out.insert(Term { atoms, torus: a.torus.mul(&b.torus), q_power: a.q_power + b.q_power }, ma * mb);
            }
        }
        Ok(out)
    }

    /// Tensor product with slots concatenated.
    pub fn tensor(&self, other: &PathSum) -> Result<PathSum, Error> {
        if self.n != other.n {
            return Err(Error::ShapeMismatch("tensor of different degrees".into()));
        }
        let mut out = PathSum::zero(self.n, self.slots + other.slots);
        for (a, ma) in self.terms() {
            for (b, mb) in other.terms() {
                let mut atoms = a.atoms.clone();
                atoms.extend_from_slice(&b.atoms);
                out.insert(Term { atoms, torus: a.torus.mul(&b.torus), q_power: a.q_power + b.q_power }, ma * mb);
            }
        }
        Ok(out)
    }

    /// Deletes `slot`, weighting each term by `σ` of the deleted atom.
    pub fn sigma_contract(&self, slot: usize) -> Result<PathSum, Error> {
        if slot >= self.slots {
            return Err(Error::InvalidArgument(format!("slot {slot} of {}", self.slots)));
        }
        let mut out = PathSum::zero(self.n, self.slots - 1);
        for (t, m) in self.terms() {
            let s = t.atoms[slot].sigma();
            if s == 0 {
                continue;
            }
            let mut atoms = t.atoms.clone();
            atoms.remove(slot);
            out.insert(Term { atoms, torus: t.torus.clone(), q_power: t.q_power }, m * s);
        }
        Ok(out)
    }

    /// Rewrites torus monomials, possibly into a different degree.
    pub fn map_torus(&self, new_n: usize, f: impl Fn(&TorusMonomial) -> TorusMonomial) -> PathSum {
        let mut out = PathSum::zero(new_n, self.slots);
        for (t, m) in self.terms() {
            out.insert(Term { atoms: t.atoms.clone(), torus: f(&t.torus), q_power: t.q_power }, m);
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms()
                .map(|(t, m)| {
                    json!({
                        "atoms": t.atoms,
                        "t_exponents": t.torus.exponents,
                        "coeff": {"q_power": t.q_power, "sign": m.signum(), "scalar": m.unsigned_abs()},
                    })
                })
                .collect(),
        )
    }

    pub fn from_json(n: usize, slots: usize, v: &Value) -> Result<PathSum, Error> {
        #[derive(Deserialize)]
        struct Coeff {
            q_power: i32,
            sign: i64,
            scalar: i64,
        }
        #[derive(Deserialize)]
        struct Entry {
            atoms: Vec<AtomKind>,
            t_exponents: Vec<i32>,
            coeff: Coeff,
        }
        let entries: Vec<Entry> = serde_json::from_value(v.clone())?;
        let mut out = PathSum::zero(n, slots);
        for e in entries {
            if e.atoms.len() != slots {
                return Err(Error::SchemaMismatch("slot count".into()));
            }
            out.insert(
                Term { atoms: e.atoms, torus: TorusMonomial { exponents: e.t_exponents }, q_power: e.coeff.q_power },
                e.coeff.sign * e.coeff.scalar,
            );
        }
        Ok(out)
    }
}

/// `π_{s_i}(u_rs)` as a single atom.
pub fn elementary_entry(i: usize, r: usize, s: usize, n: usize) -> Result<AtomKind, Error> {
    if i == 0 || i >= n || r == 0 || r > n || s == 0 || s > n {
        return Err(Error::InvalidArgument(format!("elementary_entry({i},{r},{s}) for n={n}")));
    }
    Ok(match (r, s) {
        _ if (r, s) == (i, i) => AtomKind::A,
        _ if (r, s) == (i, i + 1) => AtomKind::B,
        _ if (r, s) == (i + 1, i) => AtomKind::C,
        _ if (r, s) == (i + 1, i + 1) => AtomKind::Astar,
        _ if r == s => AtomKind::One,
        _ => AtomKind::Zero,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TorusMode {
    /// `ψ_{t,w} = τ_t * ψ_w`, with `t` kept symbolic.
    Symbolic,
    /// The bare convolution `ψ_w`.
    Absent,
}

/// The images of the `n × n` generators under a word representation.
#[derive(Clone, Debug, PartialEq)]
pub struct RepMatrix {
    n: usize,
    word: ReducedWord,
    torus: TorusMode,
    entries: Vec<PathSum>,
}

impl RepMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn word(&self) -> &ReducedWord {
        &self.word
    }

    pub fn torus_mode(&self) -> TorusMode {
        self.torus
    }

    pub fn slots(&self) -> usize {
        self.entries[0].slots()
    }

    /// Entry for `u_rs`, 1-based.
    pub fn entry(&self, r: usize, s: usize) -> &PathSum {
        &self.entries[(r - 1) * self.n + (s - 1)]
    }

    pub fn from_entries(n: usize, word: ReducedWord, torus: TorusMode, entries: Vec<PathSum>) -> Self {
        assert_eq!(entries.len(), n * n);
        RepMatrix { n, word, torus, entries }
    }

    pub fn torus_character(n: usize) -> Self {
        let entries = (1..=n)
            .flat_map(|r| {
                (1..=n).map(move |s| {
                    if r == s {
                        PathSum::monomial(n, Vec::new(), TorusMonomial::generator(n - r + 1, n), 1)
                    } else {
                        PathSum::zero(n, 0)
                    }
                })
            })
            .collect();
        RepMatrix { n, word: ReducedWord::empty(n), torus: TorusMode::Symbolic, entries }
    }

    fn unit(n: usize) -> Self {
        let entries = (1..=n)
            .flat_map(|r| (1..=n).map(move |s| if r == s { PathSum::identity(n, 0) } else { PathSum::zero(n, 0) }))
            .collect();
        RepMatrix { n, word: ReducedWord::empty(n), torus: TorusMode::Absent, entries }
    }

    pub fn elementary(i: usize, n: usize) -> Result<Self, Error> {
        let mut entries = Vec::with_capacity(n * n);
        for r in 1..=n {
            for s in 1..=n {
                let a = elementary_entry(i, r, s, n)?;
                entries.push(if a == AtomKind::Zero {
                    PathSum::zero(n, 1)
                } else {
                    PathSum::monomial(n, vec![a], TorusMonomial::one(n), 1)
                });
            }
        }
        Ok(RepMatrix { n, word: ReducedWord::new(vec![i], n)?, torus: TorusMode::Absent, entries })
    }

    /// Rows `n-m+1 ..= n`, the generators of the Stiefel quotient, row-major.
    pub fn stiefel_generators(&self, m: usize) -> Result<Vec<((usize, usize), PathSum)>, Error> {
        if m == 0 || m >= self.n {
            return Err(Error::InvalidArgument(format!("m={m} for n={}", self.n)));
        }
        Ok((self.n - m + 1..=self.n)
            .flat_map(|r| (1..=self.n).map(move |s| (r, s)))
            .map(|(r, s)| ((r, s), self.entry(r, s).clone()))
            .collect())
    }

    pub fn sigma_contract(&self, slot: usize) -> Result<RepMatrix, Error> {
        let entries = self.entries.iter().map(|p| p.sigma_contract(slot)).collect::<Result<Vec<_>, _>>()?;
        Ok(RepMatrix { n: self.n, word: self.word.delete(slot), torus: self.torus, entries })
    }
}

/// `(φ*ξ)(u_rs) = Σ_j φ(u_rj) ⊗ ξ(u_js)`.
pub fn convolve(phi: &RepMatrix, xi: &RepMatrix) -> Result<RepMatrix, Error> {
    if phi.n != xi.n {
        return Err(Error::ShapeMismatch(format!("convolve degrees {} and {}", phi.n, xi.n)));
    }
    let n = phi.n;
    let mut entries = Vec::with_capacity(n * n);
    for r in 1..=n {
        for s in 1..=n {
            let mut acc = PathSum::zero(n, phi.slots() + xi.slots());
            for j in 1..=n {
                let (a, b) = (phi.entry(r, j), xi.entry(j, s));
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc = acc.add(&a.tensor(b)?)?;
            }
            entries.push(acc);
        }
    }
    let torus = if phi.torus == TorusMode::Symbolic || xi.torus == TorusMode::Symbolic {
        TorusMode::Symbolic
    } else {
        TorusMode::Absent
    };
    Ok(RepMatrix { n, word: phi.word.concat(&xi.word), torus, entries })
}

/// `ψ_{t,w}` (or `ψ_w` when the torus is absent), folded letter by letter.
pub fn build_rep(word: &ReducedWord, n: usize, torus: TorusMode) -> Result<RepMatrix, Error> {
    if word.n() != n {
        return Err(Error::ShapeMismatch(format!("word of S_{} used in degree {n}", word.n())));
    }
    let mut acc = match torus {
        TorusMode::Symbolic => RepMatrix::torus_character(n),
        TorusMode::Absent => RepMatrix::unit(n),
    };
    for &i in word.letters() {
        acc = convolve(&acc, &RepMatrix::elementary(i, n)?)?;
    }
    Ok(acc)
}

/// How torus coordinates are realized when a path sum is turned into a matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum TorusRealization {
    /// `m` factors `ℓ²(ℤ/M)`, each `t_j` the forward cyclic shift.
    Cyclic(usize),
    /// `m` factors `ℓ²(ℤ)` cut to `|n| ≤ L`; each coordinate `t_j` acts as
    /// the backward shift, so `t̄_j` is the right shift `e_n ↦ e_{n+1}`.
    Window(usize),
    /// No torus factors; `t_j` is replaced by the given unit scalar.
    Sample(Vec<C64>),
    /// No torus factors; every monomial must be trivial.
    Absent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    pub q: f64,
    pub fock_dim: usize,
    pub m: usize,
    pub torus: TorusRealization,
}

impl Realization {
    pub fn new(q: f64, fock_dim: usize, m: usize, torus: TorusRealization) -> Self {
        Realization { q, fock_dim, m, torus }
    }

    pub fn torus_factors(&self) -> Vec<FactorSpace> {
        match self.torus {
            TorusRealization::Cyclic(mm) => vec![FactorSpace::ZCyclic(mm); self.m],
            TorusRealization::Window(l) => vec![FactorSpace::ZWindow(l); self.m],
            _ => Vec::new(),
        }
    }

    pub fn shape(&self, slots: usize) -> Vec<FactorSpace> {
        let mut shape = self.torus_factors();
        shape.extend(std::iter::repeat_n(FactorSpace::FockTrunc(self.fock_dim), slots));
        if shape.is_empty() {
            shape.push(FactorSpace::Scalar);
        }
        shape
    }
}

/// Caches atom and torus matrices across materializations at one realization.
pub struct Materializer {
    real: Realization,
    atoms: HashMap<AtomKind, SparseOp>,
    torus: HashMap<i32, SparseOp>,
}

impl Materializer {
    pub fn new(real: Realization) -> Result<Self, Error> {
        if !(real.q > 0.0 && real.q < 1.0) {
            return Err(Error::InvalidArgument(format!("q={} must lie in (0,1)", real.q)));
        }
        if let TorusRealization::Sample(v) = &real.torus {
            if v.len() != real.m {
                return Err(Error::InvalidArgument(format!("{} samples for m={}", v.len(), real.m)));
            }
        }
        Ok(Materializer { real, atoms: HashMap::new(), torus: HashMap::new() })
    }

    pub fn realization(&self) -> &Realization {
        &self.real
    }

    pub fn atom(&mut self, a: AtomKind) -> Result<SparseOp, Error> {
        if let Some(x) = self.atoms.get(&a) {
            return Ok(x.clone());
        }
        let x = atom_matrix(a, self.real.q, FactorSpace::FockTrunc(self.real.fock_dim))?;
        self.atoms.insert(a, x.clone());
        Ok(x)
    }

    fn torus_factor(&mut self, e: i32) -> Result<SparseOp, Error> {
        if let Some(x) = self.torus.get(&e) {
            return Ok(x.clone());
        }
        let x = match self.real.torus {
            TorusRealization::Cyclic(mm) => torus_power(e, FactorSpace::ZCyclic(mm), true)?,
            TorusRealization::Window(l) => torus_power(e, FactorSpace::ZWindow(l), false)?,
            _ => unreachable!("scalar torus modes have no factor"),
        };
        self.torus.insert(e, x.clone());
        Ok(x)
    }

    /// `Σ_terms mult · q^{q_power} · (torus) ⊗ atom_1 ⊗ ⋯ ⊗ atom_k`.
    pub fn materialize(&mut self, pm: &PathSum) -> Result<SparseOp, Error> {
        let shape = self.real.shape(pm.slots());
        let mut trips = Vec::new();
        for (t, mult) in pm.terms() {
            let mut coeff = C64::new(mult as f64 * self.real.q.powi(t.q_power), 0.0);
            let mut factors: Vec<SparseOp> = Vec::new();
            let free = &t.torus.exponents[..self.real.m.min(t.torus.exponents.len())];
            match &self.real.torus {
                TorusRealization::Sample(v) => coeff *= TorusMonomial { exponents: free.to_vec() }.evaluate(v),
                TorusRealization::Absent => {
                    if free.iter().any(|&e| e != 0) {
                        return Err(Error::InvalidArgument("torus monomial in a realization without torus".into()));
                    }
                }
                _ => {
                    for j in 0..self.real.m {
                        let e = free.get(j).copied().unwrap_or(0);
                        factors.push(self.torus_factor(e)?);
                    }
                }
            }
            for &a in &t.atoms {
                factors.push(self.atom(a)?);
            }
            let op = if factors.is_empty() {
                SparseOp::identity(vec![FactorSpace::Scalar], None)
            } else {
                SparseOp::kron(&factors.iter().collect::<Vec<_>>())?
            };
            trips.extend(op.triplets().map(|(r, c, v)| (r, c, v * coeff)));
        }
        Ok(SparseOp::from_triplets(shape, None, trips))
    }

    /// All `n × n` entries of a representation, row-major.
    pub fn materialize_rep(&mut self, rm: &RepMatrix) -> Result<Vec<SparseOp>, Error> {
        (1..=rm.n())
            .flat_map(|r| (1..=rm.n()).map(move |s| (r, s)))
            .map(|(r, s)| self.materialize(rm.entry(r, s)))
            .collect()
    }
}

/// One-shot materialization.
pub fn materialize(pm: &PathSum, real: &Realization) -> Result<SparseOp, Error> {
    Materializer::new(real.clone())?.materialize(pm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_t_n_is_conjugate_product() {
        let t3 = TorusMonomial::generator(3, 3);
        assert_eq!(t3.exponents, vec![-1, -1]);
        let prod = t3.mul(&TorusMonomial::generator(1, 3)).mul(&TorusMonomial::generator(2, 3));
        assert!(prod.is_one());
    }

    #[test]
    fn cancellation_removes_keys() {
        let a = PathSum::identity(3, 2);
        assert!(a.sub(&a).unwrap().is_zero());
        assert_eq!(a.sub(&a).unwrap(), PathSum::zero(3, 2));
    }

    #[test]
    fn json_round_trip() {
        let w = ReducedWord::new(vec![1, 2, 1], 3).unwrap();
        let rm = build_rep(&w, 3, TorusMode::Symbolic).unwrap();
        let p = rm.entry(2, 1);
        let back = PathSum::from_json(3, 3, &p.to_json()).unwrap();
        assert_eq!(&back, p);
    }

    #[test]
    fn slot_product_outside_alphabet_fails() {
        let a = PathSum::monomial(2, vec![AtomKind::B], TorusMonomial::one(2), 1);
        assert!(a.mul(&a).is_err());
    }
}
