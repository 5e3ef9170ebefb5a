//! The odd Fredholm module `(P_k, F_k = 2P_k − 1)` for `C(SU_q(2))` on
//! `ℓ²(ℤ) ⊗ ℓ²(ℕ)`, index pairings, and the quotient map
//! `φ = (ev₁⊗1)σ₂σ₃` from `χ_{ω_3}` onto `SU_q(2)`.
//!
//! The pairing is `⟨[w], F_k⟩ = Index(P_k w P_k : P_kH → P_kH)`. Kernel and
//! cokernel are nullities of `P_k w` and `P_k w*` restricted to the interior
//! of `range(P_k)`, measured against the full window so that no image vector
//! of an interior column is cut off.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::coxeter::ReducedWord;
use crate::fock::{atom_matrix, AtomKind, FactorSpace, SparseOp, UnionFind, DENSE_LIMIT};
use crate::symrep::{
    build_rep, Materializer, PathSum, Realization, RepMatrix, TorusMode, TorusMonomial, TorusRealization,
};
use crate::{Error, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FredholmSpec {
    /// Window half-width: `|n| ≤ L`.
    pub l: usize,
    /// Fock truncation: `0 ≤ m < D`.
    pub d: usize,
    pub k: i64,
    pub block: Option<usize>,
}

impl FredholmSpec {
    pub fn new(l: usize, d: usize, k: i64) -> Self {
        FredholmSpec { l, d, k, block: None }
    }

    pub fn with_block(mut self, b: usize) -> Self {
        self.block = Some(b);
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.l < 4 || self.d < 4 {
            return Err(Error::InvalidArgument(format!("window L={} and D={} must be >= 4", self.l, self.d)));
        }
        if self.k.unsigned_abs() as usize + 4 > self.l || self.k + 4 > self.d as i64 {
            return Err(Error::InvalidArgument(format!(
                "level k={} too close to the truncation (L={}, D={})",
                self.k, self.l, self.d
            )));
        }
        Ok(())
    }

    pub fn shape(&self) -> Vec<FactorSpace> {
        vec![FactorSpace::ZWindow(self.l), FactorSpace::FockTrunc(self.d)]
    }

    /// `(n, m)` of a basis index of one block.
    pub fn lattice_point(&self, idx: usize) -> (i64, usize) {
        let d = self.d;
        let inner = (2 * self.l + 1) * d;
        let i = idx % inner;
        ((i / d) as i64 - self.l as i64, i % d)
    }

    fn in_half_space(&self, idx: usize) -> bool {
        let (n, m) = self.lattice_point(idx);
        n + m as i64 <= self.k
    }

    fn in_interior(&self, idx: usize) -> bool {
        let (n, m) = self.lattice_point(idx);
        n.unsigned_abs() as usize + 2 <= self.l && m + 2 <= self.d
    }

    fn dim(&self) -> usize {
        (2 * self.l + 1) * self.d * self.block.unwrap_or(1)
    }
}

/// Diagonal 0/1 projection onto `span{e_{n,m} : n+m ≤ k}`, amplified to the
/// block size if one is set.
pub fn half_space_projection(spec: &FredholmSpec) -> SparseOp {
    let p = SparseOp::diagonal(spec.shape(), None, |i| C64::new(if spec.in_half_space(i) { 1.0 } else { 0.0 }, 0.0));
    match spec.block {
        Some(b) => p.amplify(b).expect("nonzero block"),
        None => p,
    }
}

fn window_atoms(spec: &FredholmSpec) -> Result<[SparseOp; 2], Error> {
    let w = FactorSpace::ZWindow(spec.l);
    Ok([atom_matrix(AtomKind::TorusGen(1), 0.0, w)?, atom_matrix(AtomKind::TorusGenConj(1), 0.0, w)?])
}

/// `u = [[t⊗S, 0], [t̄⊗p, t̄⊗S*]]` with `t` the window right shift
/// `e_n ↦ e_{n+1}` and `S` the backward shift.
pub fn su2_limit_unitary(spec: &FredholmSpec) -> Result<SparseOp, Error> {
    let [right, left] = window_atoms(spec)?;
    let f = FactorSpace::FockTrunc(spec.d);
    let s = atom_matrix(AtomKind::S, 0.0, f)?;
    let p = atom_matrix(AtomKind::P, 0.0, f)?;
    let ss = atom_matrix(AtomKind::Sstar, 0.0, f)?;
    SparseOp::block_matrix(vec![
        vec![Some(SparseOp::kron(&[&right, &s])?), None],
        vec![Some(SparseOp::kron(&[&left, &p])?), Some(SparseOp::kron(&[&left, &ss])?)],
    ])
}

/// `t⊗p + 1 − 1⊗p` with `t` the right shift, the same `t` as in
/// [`su2_limit_unitary`].
pub fn t_p_unitary(spec: &FredholmSpec) -> Result<SparseOp, Error> {
    let [right, _] = window_atoms(spec)?;
    shift_p_unitary(spec, &right)
}

/// `t̄⊗p + 1 − 1⊗p`, the unitary that shares the `t̄⊗p` corner of the
/// limit unitary.
pub fn tbar_p_unitary(spec: &FredholmSpec) -> Result<SparseOp, Error> {
    let [_, left] = window_atoms(spec)?;
    shift_p_unitary(spec, &left)
}

fn shift_p_unitary(spec: &FredholmSpec, shift: &SparseOp) -> Result<SparseOp, Error> {
    let p = atom_matrix(AtomKind::P, 0.0, FactorSpace::FockTrunc(spec.d))?;
    let w_id = SparseOp::identity(vec![FactorSpace::ZWindow(spec.l)], None);
    let tp = SparseOp::kron(&[shift, &p])?;
    let one_p = SparseOp::kron(&[&w_id, &p])?;
    tp.add(&SparseOp::identity(spec.shape(), None))?.sub(&one_p)
}

/// The fundamental matrix `(u_ij)` of `C(SU_q(2))` in the representation
/// `ψ_{t,s_1}`, as a 2×2 block operator.
pub fn su2_q_unitary(q: f64, spec: &FredholmSpec) -> Result<SparseOp, Error> {
    let rm = build_rep(&ReducedWord::new(vec![1], 2)?, 2, TorusMode::Symbolic)?;
    block_from_entries(
        &(1..=2).flat_map(|r| (1..=2).map(move |s| (r, s))).map(|(r, s)| rm.entry(r, s).clone()).collect::<Vec<_>>(),
        2,
        q,
        spec,
    )
}

fn block_from_entries(entries: &[PathSum], b: usize, q: f64, spec: &FredholmSpec) -> Result<SparseOp, Error> {
    let mut mat = Materializer::new(Realization::new(q, spec.d, 1, TorusRealization::Window(spec.l)))?;
    let mut grid = Vec::with_capacity(b);
    for r in 0..b {
        let mut row = Vec::with_capacity(b);
        for s in 0..b {
            let e = &entries[r * b + s];
            row.push(if e.is_zero() { None } else { Some(mat.materialize(e)?) });
        }
        grid.push(row);
    }
    SparseOp::block_matrix(grid)
}

/// Which unitary to pair with `F_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitaryKind {
    Identity,
    /// The `q → 0` limit `[[t⊗S, 0], [t̄⊗p, t̄⊗S*]]`.
    Su2Limit,
    /// `t⊗p + 1 − 1⊗p`.
    TP,
    /// `t̄⊗p + 1 − 1⊗p`.
    TBarP,
    /// The materialized fundamental matrix `u_q`.
    Su2Q,
    /// `φ(U)` for the fundamental unitary of `SU_q(3)`, materialized from
    /// its symbolic image.
    Su3Fundamental,
    /// `diag(u, 1)` with `u` the limit unitary.
    Su3LimitBlock,
}

impl UnitaryKind {
    pub fn build(self, q: f64, spec: &FredholmSpec) -> Result<SparseOp, Error> {
        match self {
            UnitaryKind::Identity => Ok(SparseOp::identity(spec.shape(), spec.block)),
            UnitaryKind::Su2Limit => su2_limit_unitary(spec),
            UnitaryKind::TP => t_p_unitary(spec),
            UnitaryKind::TBarP => tbar_p_unitary(spec),
            UnitaryKind::Su2Q => su2_q_unitary(q, spec),
            UnitaryKind::Su3Fundamental => {
                let phi = phi_su3(&build_rep(&ReducedWord::new(vec![1, 2, 1], 3)?, 3, TorusMode::Symbolic)?)?;
                block_from_entries(&phi.entries, 3, q, spec)
            }
            UnitaryKind::Su3LimitBlock => {
                let u = su2_limit_unitary(spec)?;
                let id = SparseOp::identity(spec.shape(), None);
                let mut grid: Vec<Vec<Option<SparseOp>>> =
                    vec![vec![None, None, None], vec![None, None, None], vec![None, None, Some(id)]];
                for (i, row) in grid.iter_mut().take(2).enumerate() {
                    for (j, cell) in row.iter_mut().take(2).enumerate() {
                        let x = u.block_entry(i, j)?;
                        *cell = (x.nnz() > 0).then_some(x);
                    }
                }
                SparseOp::block_matrix(grid)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexSample {
    pub l: usize,
    pub d: usize,
    pub k: i64,
    pub dim_ker: usize,
    pub dim_coker: usize,
    pub index: i64,
    pub min_retained_sv: f64,
    pub max_discarded_sv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexResult {
    pub index: i64,
    pub dim_ker: usize,
    pub dim_coker: usize,
    pub min_retained_sv: f64,
    pub max_discarded_sv: f64,
    pub rank_tol: f64,
    pub stable: bool,
    pub sweep: Vec<IndexSample>,
}

impl IndexResult {
    /// `min retained / rank_tol` across the sweep.
    pub fn gap_ratio(&self) -> f64 {
        self.min_retained_sv / self.rank_tol
    }
}

struct Nullity {
    nullity: usize,
    min_retained: f64,
    max_discarded: f64,
}

/// Nullity of `w` restricted to the columns `cols` and read on the rows `rows`.
fn restricted_nullity(w: &SparseOp, rows: &[bool], cols: &[bool], tol: f64) -> Result<Nullity, Error> {
    let dim = w.dim();
    // Nodes 0..dim are columns, dim..2·dim are rows.
    let mut uf = UnionFind::new(2 * dim);
    for (r, c, _) in w.triplets() {
        if rows[r] && cols[c] {
            uf.union(c, dim + r);
        }
    }
    let mut out = Nullity { nullity: 0, min_retained: f64::INFINITY, max_discarded: 0.0 };
    for group in uf.groups() {
        let cs: Vec<usize> = group.iter().copied().filter(|&x| x < dim && cols[x]).collect();
        if cs.is_empty() {
            continue;
        }
        let rs: Vec<usize> = group.iter().filter(|&&x| x >= dim).map(|&x| x - dim).collect();
        if rs.is_empty() {
            out.nullity += cs.len();
            continue;
        }
        if rs.len() > DENSE_LIMIT || cs.len() > DENSE_LIMIT {
            return Err(Error::TooLarge { dim: rs.len().max(cs.len()), limit: DENSE_LIMIT });
        }
        let m = DMatrix::from_fn(rs.len(), cs.len(), |i, j| w.get(rs[i], cs[j]));
        let sv = m.singular_values();
        let mut rank = 0;
        for &s in sv.iter() {
            if s > tol / 10.0 && s < tol * 10.0 {
                return Err(Error::AmbiguousRank { value: s, tol });
            }
            if s > tol {
                rank += 1;
                out.min_retained = out.min_retained.min(s);
            } else {
                out.max_discarded = out.max_discarded.max(s);
            }
        }
        out.nullity += cs.len() - rank;
    }
    Ok(out)
}

/// Index of `P_k w P_k` at one spec.
pub fn index_sample(w: &SparseOp, spec: &FredholmSpec, rank_tol: f64) -> Result<IndexSample, Error> {
    if w.dim() != spec.dim() {
        return Err(Error::ShapeMismatch(format!("operator of dim {} for spec of dim {}", w.dim(), spec.dim())));
    }
    let rows: Vec<bool> = (0..w.dim()).map(|i| spec.in_half_space(i)).collect();
    let cols: Vec<bool> = (0..w.dim()).map(|i| rows[i] && spec.in_interior(i)).collect();
    let ker = restricted_nullity(w, &rows, &cols, rank_tol)?;
    let coker = restricted_nullity(&w.adjoint(), &rows, &cols, rank_tol)?;
    Ok(IndexSample {
        l: spec.l,
        d: spec.d,
        k: spec.k,
        dim_ker: ker.nullity,
        dim_coker: coker.nullity,
        index: ker.nullity as i64 - coker.nullity as i64,
        min_retained_sv: ker.min_retained.min(coker.min_retained),
        max_discarded_sv: ker.max_discarded.max(coker.max_discarded),
    })
}

/// The specs visited by [`index_pairing`]: `k−1, k, k+1` at `(L, D)` and
/// `(L+4, D+4)`.
pub fn sweep_specs(spec: &FredholmSpec) -> Vec<FredholmSpec> {
    let mut out = Vec::new();
    for (l, d) in [(spec.l, spec.d), (spec.l + 4, spec.d + 4)] {
        for k in [spec.k - 1, spec.k, spec.k + 1] {
            out.push(FredholmSpec { l, d, k, block: spec.block });
        }
    }
    out
}

/// Index pairing at `spec` with the stability sweep; `build` produces the
/// unitary for each swept spec.
pub fn index_pairing_with(
    build: &dyn Fn(&FredholmSpec) -> Result<SparseOp, Error>,
    spec: &FredholmSpec,
    rank_tol: f64,
) -> Result<IndexResult, Error> {
    spec.validate()?;
    let mut sweep = Vec::new();
    for s in sweep_specs(spec) {
        s.validate()?;
        sweep.push(index_sample(&build(&s)?, &s, rank_tol)?);
    }
    let centre = sweep[1].clone();
    let stable = sweep.iter().all(|x| x.index == centre.index);
    Ok(IndexResult {
        index: centre.index,
        dim_ker: centre.dim_ker,
        dim_coker: centre.dim_coker,
        min_retained_sv: sweep.iter().map(|x| x.min_retained_sv).fold(f64::INFINITY, f64::min),
        max_discarded_sv: sweep.iter().map(|x| x.max_discarded_sv).fold(0.0, f64::max),
        rank_tol,
        stable,
        sweep,
    })
}

pub fn index_pairing(kind: UnitaryKind, q: f64, spec: &FredholmSpec, rank_tol: f64) -> Result<IndexResult, Error> {
    let block = match kind {
        UnitaryKind::Identity => spec.block,
        UnitaryKind::Su2Limit | UnitaryKind::Su2Q => Some(2),
        UnitaryKind::TP | UnitaryKind::TBarP => None,
        UnitaryKind::Su3Fundamental | UnitaryKind::Su3LimitBlock => Some(3),
    };
    let spec = FredholmSpec { block, ..*spec };
    index_pairing_with(&|s| kind.build(q, s), &spec, rank_tol)
}

/// `φ(u_ij)` for `1 ≤ i, j ≤ 3` as degree-2 path sums with one slot.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiImage {
    pub entries: Vec<PathSum>,
}

impl PhiImage {
    pub fn entry(&self, i: usize, j: usize) -> &PathSum {
        &self.entries[(i - 1) * 3 + (j - 1)]
    }

    /// The upper-left 2×2 block as a representation of `C(SU_q(2))`.
    pub fn su2_block(&self) -> Result<RepMatrix, Error> {
        let e = (1..=2).flat_map(|i| (1..=2).map(move |j| (i, j))).map(|(i, j)| self.entry(i, j).clone()).collect();
        Ok(RepMatrix::from_entries(2, ReducedWord::new(vec![1], 2)?, TorusMode::Symbolic, e))
    }

    /// `φ(u_ij) = v_ij` for `i, j ≤ 2` and `δ_ij` otherwise, compared with
    /// `ψ_{t,s_1}` of `SU_q(2)`.
    pub fn is_block_diagonal(&self) -> Result<bool, Error> {
        let v = build_rep(&ReducedWord::new(vec![1], 2)?, 2, TorusMode::Symbolic)?;
        for i in 1..=3 {
            for j in 1..=3 {
                let want = if i <= 2 && j <= 2 {
                    v.entry(i, j).clone()
                } else if i == j {
                    PathSum::identity(2, 1)
                } else {
                    PathSum::zero(2, 1)
                };
                if *self.entry(i, j) != want {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// `φ` on a single path sum in the `χ_{ω_3}` layout: contract slots 3 and 2,
/// evaluate `t_1` at 1, and read `t_2` as the torus coordinate of `SU_q(2)`.
pub fn phi_path(pm: &PathSum) -> Result<PathSum, Error> {
    if pm.n() != 3 || pm.slots() != 3 {
        return Err(Error::InvalidArgument(format!(
            "φ acts on degree-3 path sums with 3 slots, got {}/{}",
            pm.n(),
            pm.slots()
        )));
    }
    let c = pm.sigma_contract(2)?.sigma_contract(1)?;
    Ok(c.map_torus(2, |m| TorusMonomial { exponents: vec![m.exponents[1]] }))
}

/// `φ = (ev₁⊗1)σ₂σ₃` applied entry-wise to `χ_{ω_3}` with `ω_3 = s_1 | s_2 s_1`.
pub fn phi_su3(rm: &RepMatrix) -> Result<PhiImage, Error> {
    if rm.n() != 3 || rm.word().letters() != [1, 2, 1] || rm.torus_mode() != TorusMode::Symbolic {
        return Err(Error::InvalidArgument(format!(
            "φ needs the symbolic representation of the word 1,2,1 in degree 3, got word {} in degree {}",
            rm.word().to_csv(),
            rm.n()
        )));
    }
    let entries = (1..=3)
        .flat_map(|i| (1..=3).map(move |j| (i, j)))
        .map(|(i, j)| phi_path(rm.entry(i, j)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PhiImage { entries })
}

/// `U_3 = t₁⊗1⊗p⊗p + 1 − 1⊗1⊗p⊗p` in the `χ_{ω_3}` layout.
pub fn u3_path() -> PathSum {
    use AtomKind::{One, P};
    let x = PathSum::monomial(3, vec![One, P, P], TorusMonomial::generator(1, 3), 1);
    let e = PathSum::monomial(3, vec![One, P, P], TorusMonomial::one(3), 1);
    x.add(&PathSum::identity(3, 3)).and_then(|y| y.sub(&e)).expect("same layout")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Su3Nontriviality {
    /// `φ(U) = diag(u, 1)` holds entry-wise on path data.
    pub block_diagonal: bool,
    /// `φ(U_3)` is the identity on path data.
    pub u3_to_identity: bool,
    /// Pairing of the materialized `φ(U)`.
    pub phi_image: IndexResult,
    /// Pairing of `diag(u, 1)` with the limit unitary.
    pub limit_block: IndexResult,
}

pub fn su3_nontriviality(q: f64, spec: &FredholmSpec, rank_tol: f64) -> Result<Su3Nontriviality, Error> {
    let rm = build_rep(&ReducedWord::new(vec![1, 2, 1], 3)?, 3, TorusMode::Symbolic)?;
    let phi = phi_su3(&rm)?;
    Ok(Su3Nontriviality {
        block_diagonal: phi.is_block_diagonal()?,
        u3_to_identity: phi_path(&u3_path())? == PathSum::identity(2, 1),
        phi_image: index_pairing(UnitaryKind::Su3Fundamental, q, spec, rank_tol)?,
        limit_block: index_pairing(UnitaryKind::Su3LimitBlock, q, spec, rank_tol)?,
    })
}
