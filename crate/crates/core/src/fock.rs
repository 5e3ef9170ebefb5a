//! Operators on tensor products of truncated sequence spaces.
//!
//! `SparseOp` is a square CSR matrix tagged with the factor spaces it acts on
//! and an optional outer block size for operator matrices. Basis indices are
//! row-major in the factors (first factor outermost), with the block index
//! outside everything, which matches `kron` of the factors.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, C64};

/// Entries with modulus at or below this are not stored.
pub const MAG_FLOOR: f64 = 1e-14;
/// Largest matrix handed to a dense eigen- or singular-value solver.
pub const DENSE_LIMIT: usize = 4096;
/// Tolerance on `‖a − a*‖` accepted by [`spectral_projection_one`].
pub const SELF_ADJOINT_TOL: f64 = 1e-9;
const POWER_MAX_ITER: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FactorSpace {
    /// `ℓ²(ℕ)` cut to `e_0 … e_{D-1}`.
    FockTrunc(usize),
    /// `ℓ²(ℤ)` cut to `e_{-L} … e_L`.
    ZWindow(usize),
    /// `ℓ²(ℤ/M)`.
    ZCyclic(usize),
    Scalar,
}

impl FactorSpace {
    pub fn dim(&self) -> usize {
        match *self {
            FactorSpace::FockTrunc(d) => d,
            FactorSpace::ZWindow(l) => 2 * l + 1,
            FactorSpace::ZCyclic(m) => m,
            FactorSpace::Scalar => 1,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let ok = match *self {
            FactorSpace::FockTrunc(d) => d >= 2,
            FactorSpace::ZWindow(l) => l >= 1,
            FactorSpace::ZCyclic(m) => m >= 2,
            FactorSpace::Scalar => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("degenerate factor space {self:?}")))
        }
    }
}

pub fn shape_dim(shape: &[FactorSpace]) -> usize {
    shape.iter().map(FactorSpace::dim).product()
}

/// The operator alphabet. `A = √(1−q^{2N+2}) S`, `Astar = A*`, `B = −q^{N+1}`,
/// `C = q^N`, `P = 1 − S*S`, with `S` the backward shift. `TorusGen(j)` is
/// the generator `t_j` on a torus factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AtomKind {
    One,
    A,
    Astar,
    B,
    C,
    P,
    S,
    Sstar,
    Zero,
    TorusGen(u8),
    TorusGenConj(u8),
}

impl AtomKind {
    pub fn adjoint(self) -> AtomKind {
        match self {
            AtomKind::A => AtomKind::Astar,
            AtomKind::Astar => AtomKind::A,
            AtomKind::S => AtomKind::Sstar,
            AtomKind::Sstar => AtomKind::S,
            AtomKind::TorusGen(j) => AtomKind::TorusGenConj(j),
            AtomKind::TorusGenConj(j) => AtomKind::TorusGen(j),
            other => other,
        }
    }

    pub fn is_torus(self) -> bool {
        matches!(self, AtomKind::TorusGen(_) | AtomKind::TorusGenConj(_))
    }

    /// The single atom equal to `self · rhs`, when there is one.
    /// `Some(Zero)` means the product vanishes.
    pub fn product(self, rhs: AtomKind) -> Option<AtomKind> {
        use AtomKind::*;
        match (self, rhs) {
            (Zero, _) | (_, Zero) => Some(Zero),
            (One, x) | (x, One) => Some(x),
            (P, P) => Some(P),
            (S, Sstar) => Some(One),
            (P, Sstar) | (S, P) | (P, Astar) | (A, P) => Some(Zero),
            _ => None,
        }
    }

    /// Value of the Toeplitz character `σ(S) = 1` on the atom.
    pub fn sigma(self) -> i64 {
        match self {
            AtomKind::One | AtomKind::A | AtomKind::Astar | AtomKind::S | AtomKind::Sstar => 1,
            _ => 0,
        }
    }
}

/// Matrix of an atom on one factor space.
pub fn atom_matrix(a: AtomKind, q: f64, f: FactorSpace) -> Result<SparseOp, Error> {
    let shape = vec![f];
    let mismatch = || Error::AtomSpaceMismatch { atom: format!("{a:?}"), space: format!("{f:?}") };
    f.validate()?;
    let d = f.dim();
    let mut trips: Vec<(usize, usize, C64)> = Vec::new();
    match (a, f) {
        (AtomKind::One, _) => return Ok(SparseOp::identity(shape, None)),
        (AtomKind::Zero, _) => return Ok(SparseOp::zeros(shape, None)),
        (AtomKind::TorusGen(_), FactorSpace::ZWindow(_)) => {
            trips.extend((0..d - 1).map(|i| (i + 1, i, C64::new(1.0, 0.0))))
        }
        (AtomKind::TorusGenConj(_), FactorSpace::ZWindow(_)) => {
            trips.extend((1..d).map(|i| (i - 1, i, C64::new(1.0, 0.0))))
        }
        (AtomKind::TorusGen(_), FactorSpace::ZCyclic(_)) => {
            trips.extend((0..d).map(|i| ((i + 1) % d, i, C64::new(1.0, 0.0))))
        }
        (AtomKind::TorusGenConj(_), FactorSpace::ZCyclic(_)) => {
            trips.extend((0..d).map(|i| ((i + d - 1) % d, i, C64::new(1.0, 0.0))))
        }
        (x, _) if x.is_torus() => return Err(mismatch()),
        (_, FactorSpace::FockTrunc(_)) => {
            let sq = |n: usize| (1.0 - q.powi(2 * n as i32)).sqrt();
            match a {
                AtomKind::A => trips.extend((1..d).map(|n| (n - 1, n, C64::new(sq(n), 0.0)))),
                AtomKind::Astar => trips.extend((1..d).map(|n| (n, n - 1, C64::new(sq(n), 0.0)))),
                AtomKind::B => trips.extend((0..d).map(|n| (n, n, C64::new(-q.powi(n as i32 + 1), 0.0)))),
                AtomKind::C => trips.extend((0..d).map(|n| (n, n, C64::new(q.powi(n as i32), 0.0)))),
                AtomKind::P => trips.push((0, 0, C64::new(1.0, 0.0))),
                AtomKind::S => trips.extend((1..d).map(|n| (n - 1, n, C64::new(1.0, 0.0)))),
                AtomKind::Sstar => trips.extend((1..d).map(|n| (n, n - 1, C64::new(1.0, 0.0)))),
                _ => unreachable!(),
            }
        }
        _ => return Err(mismatch()),
    }
    Ok(SparseOp::from_triplets(shape, None, trips))
}

/// `t^e` on a torus factor, as the `e`-th power of the basis map, with
/// basis vectors pushed past a window edge dropped. `forward` picks
/// `e_i ↦ e_{i+1}` as the image of `t`.
pub fn torus_power(e: i32, f: FactorSpace, forward: bool) -> Result<SparseOp, Error> {
    let shape = vec![f];
    let d = f.dim() as i64;
    let e = if forward { e as i64 } else { -(e as i64) };
    let trips: Vec<(usize, usize, C64)> = match f {
        FactorSpace::ZWindow(_) => (0..d)
            .filter_map(|i| {
                let j = i + e;
                (0..d).contains(&j).then(|| (j as usize, i as usize, C64::new(1.0, 0.0)))
            })
            .collect(),
        FactorSpace::ZCyclic(_) => {
            (0..d).map(|i| ((i + e).rem_euclid(d) as usize, i as usize, C64::new(1.0, 0.0))).collect()
        }
        _ => return Err(Error::AtomSpaceMismatch { atom: format!("t^{e}"), space: format!("{f:?}") }),
    };
    Ok(SparseOp::from_triplets(shape, None, trips))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp {
    shape: Vec<FactorSpace>,
    block: Option<usize>,
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl SparseOp {
    fn full_dim(shape: &[FactorSpace], block: Option<usize>) -> usize {
        shape_dim(shape) * block.unwrap_or(1)
    }

    pub fn zeros(shape: Vec<FactorSpace>, block: Option<usize>) -> Self {
        let dim = Self::full_dim(&shape, block);
        SparseOp { shape, block, dim, indptr: vec![0; dim + 1], indices: Vec::new(), data: Vec::new() }
    }

    pub fn identity(shape: Vec<FactorSpace>, block: Option<usize>) -> Self {
        Self::diagonal(shape, block, |_| C64::new(1.0, 0.0))
    }

    pub fn diagonal(shape: Vec<FactorSpace>, block: Option<usize>, f: impl Fn(usize) -> C64) -> Self {
        let dim = Self::full_dim(&shape, block);
        Self::from_triplets(shape, block, (0..dim).map(|i| (i, i, f(i))).collect())
    }

    /// Sums duplicate entries and drops those at or below [`MAG_FLOOR`].
    pub fn from_triplets(shape: Vec<FactorSpace>, block: Option<usize>, mut trips: Vec<(usize, usize, C64)>) -> Self {
        let dim = Self::full_dim(&shape, block);
        trips.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::with_capacity(trips.len());
        let mut data = Vec::with_capacity(trips.len());
        let mut i = 0;
        while i < trips.len() {
            let (r, c, mut v) = trips[i];
            assert!(r < dim && c < dim, "entry ({r},{c}) outside dimension {dim}");
            i += 1;
            while i < trips.len() && trips[i].0 == r && trips[i].1 == c {
                v += trips[i].2;
                i += 1;
            }
            if v.norm() > MAG_FLOOR {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
            }
        }
        for r in 0..dim {
            indptr[r + 1] += indptr[r];
        }
        SparseOp { shape, block, dim, indptr, indices, data }
    }

    pub fn shape(&self) -> &[FactorSpace] {
        &self.shape
    }

    pub fn block(&self) -> Option<usize> {
        self.block
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        self.indices[a..b].iter().copied().zip(self.data[a..b].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        match self.indices[a..b].binary_search(&c) {
            Ok(k) => self.data[a + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    fn same_space(&self, other: &SparseOp, what: &str) -> Result<(), Error> {
        if self.shape != other.shape || self.block != other.block {
            return Err(Error::ShapeMismatch(format!(
                "{what}: {:?}/{:?} vs {:?}/{:?}",
                self.shape, self.block, other.shape, other.block
            )));
        }
        Ok(())
    }

    pub fn adjoint(&self) -> SparseOp {
        let mut counts = vec![0usize; self.dim + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.dim {
            counts[i + 1] += counts[i];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0; self.nnz()];
        let mut data = vec![C64::new(0.0, 0.0); self.nnz()];
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                let k = next[c];
                indices[k] = r;
                data[k] = v.conj();
                next[c] += 1;
            }
        }
        SparseOp { shape: self.shape.clone(), block: self.block, dim: self.dim, indptr, indices, data }
    }

    pub fn scale(&self, c: C64) -> SparseOp {
        let trips = self.triplets().map(|(r, col, v)| (r, col, v * c)).collect();
        SparseOp::from_triplets(self.shape.clone(), self.block, trips)
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: C64, other: &SparseOp, b: C64) -> Result<SparseOp, Error> {
        self.same_space(other, "lin_comb")?;
        let mut trips: Vec<_> = self.triplets().map(|(r, c, v)| (r, c, a * v)).collect();
        trips.extend(other.triplets().map(|(r, c, v)| (r, c, b * v)));
        Ok(SparseOp::from_triplets(self.shape.clone(), self.block, trips))
    }

    pub fn add(&self, other: &SparseOp) -> Result<SparseOp, Error> {
        self.lin_comb(C64::new(1.0, 0.0), other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &SparseOp) -> Result<SparseOp, Error> {
        self.lin_comb(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
    }

    /// `self · other`, rows accumulated in a fixed order.
    pub fn mul(&self, other: &SparseOp) -> Result<SparseOp, Error> {
        self.same_space(other, "mul")?;
        let n = self.dim;
        let mut acc = vec![C64::new(0.0, 0.0); n];
        let mut mark = vec![usize::MAX; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut indptr = Vec::with_capacity(n + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for r in 0..n {
            touched.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = C64::new(0.0, 0.0);
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c].norm() > MAG_FLOOR {
                    indices.push(c);
                    data.push(acc[c]);
                }
            }
            indptr.push(indices.len());
        }
        Ok(SparseOp { shape: self.shape.clone(), block: self.block, dim: n, indptr, indices, data })
    }

    /// Product of a nonempty list, left to right.
    pub fn product(ops: &[&SparseOp]) -> Result<SparseOp, Error> {
        let (first, rest) = ops.split_first().ok_or_else(|| Error::InvalidArgument("empty product".into()))?;
        rest.iter().try_fold((*first).clone(), |acc, x| acc.mul(x))
    }

    pub fn commutator(&self, other: &SparseOp) -> Result<SparseOp, Error> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Tensor product; the shape is the concatenation of the factor shapes.
    pub fn kron(ops: &[&SparseOp]) -> Result<SparseOp, Error> {
        if ops.is_empty() {
            return Err(Error::InvalidArgument("kron of an empty list".into()));
        }
        if ops.iter().any(|o| o.block.is_some()) {
            return Err(Error::ShapeMismatch("kron of block operators".into()));
        }
        let mut out = ops[0].clone();
        for b in &ops[1..] {
            out = out.kron2(b);
        }
        Ok(out)
    }

    fn kron2(&self, b: &SparseOp) -> SparseOp {
        let mut shape = self.shape.clone();
        shape.extend_from_slice(&b.shape);
        let dim = self.dim * b.dim;
        let mut indptr = Vec::with_capacity(dim + 1);
        indptr.push(0);
        let mut indices = Vec::with_capacity(self.nnz() * b.nnz());
        let mut data = Vec::with_capacity(self.nnz() * b.nnz());
        for ra in 0..self.dim {
            for rb in 0..b.dim {
                for (ca, va) in self.row(ra) {
                    for (cb, vb) in b.row(rb) {
                        let v = va * vb;
                        if v.norm() > MAG_FLOOR {
                            indices.push(ca * b.dim + cb);
                            data.push(v);
                        }
                    }
                }
                indptr.push(indices.len());
            }
        }
        SparseOp { shape, block: None, dim, indptr, indices, data }
    }

    /// Operator matrix from a square grid of blocks; `None` is a zero block.
    pub fn block_matrix(blocks: Vec<Vec<Option<SparseOp>>>) -> Result<SparseOp, Error> {
        let b = blocks.len();
        let shape = blocks
            .iter()
            .flatten()
            .flatten()
            .next()
            .map(|x| x.shape.clone())
            .ok_or_else(|| Error::InvalidArgument("all blocks are zero".into()))?;
        let inner = shape_dim(&shape);
        let mut trips = Vec::new();
        for (i, row) in blocks.iter().enumerate() {
            if row.len() != b {
                return Err(Error::ShapeMismatch("block grid is not square".into()));
            }
            for (j, x) in row.iter().enumerate() {
                if let Some(x) = x {
                    if x.shape != shape || x.block.is_some() {
                        return Err(Error::ShapeMismatch("blocks on different spaces".into()));
                    }
                    trips.extend(x.triplets().map(|(r, c, v)| (i * inner + r, j * inner + c, v)));
                }
            }
        }
        Ok(SparseOp::from_triplets(shape, Some(b), trips))
    }

    pub fn block_entry(&self, i: usize, j: usize) -> Result<SparseOp, Error> {
        let b = self.block.ok_or_else(|| Error::ShapeMismatch("not a block operator".into()))?;
        if i >= b || j >= b {
            return Err(Error::InvalidArgument(format!("block ({i},{j}) outside {b}x{b}")));
        }
        let inner = shape_dim(&self.shape);
        let trips = (i * inner..(i + 1) * inner)
            .flat_map(|r| {
                self.row(r).filter(|&(c, _)| c / inner == j).map(move |(c, v)| (r - i * inner, c - j * inner, v))
            })
            .collect();
        Ok(SparseOp::from_triplets(self.shape.clone(), None, trips))
    }

    /// Block-diagonal embedding `diag(self, self, …)` with `b` copies.
    pub fn amplify(&self, b: usize) -> Result<SparseOp, Error> {
        let grid = (0..b).map(|i| (0..b).map(|j| (i == j).then(|| self.clone())).collect()).collect();
        SparseOp::block_matrix(grid)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn mat_vec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.dim).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(r, c, _)| r == c)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `√(‖·‖₁ ‖·‖_∞)`, an upper bound for the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.masked_norm_bound(None)
    }

    fn masked_norm_bound(&self, mask: Option<&[bool]>) -> f64 {
        let keep = |i: usize| mask.is_none_or(|m| m[i]);
        let mut col = vec![0.0f64; self.dim];
        let mut row_max = 0.0f64;
        for r in (0..self.dim).filter(|&r| keep(r)) {
            let mut s = 0.0;
            for (c, v) in self.row(r) {
                if keep(c) {
                    s += v.norm();
                    col[c] += v.norm();
                }
            }
            row_max = row_max.max(s);
        }
        let col_max = col.into_iter().fold(0.0, f64::max);
        (row_max * col_max).sqrt()
    }

    /// Coordinates of a basis index: `(block, per-factor indices)`.
    pub fn multi_index(&self, idx: usize) -> (usize, Vec<usize>) {
        let inner = shape_dim(&self.shape);
        let mut rest = idx % inner;
        let mut coords = vec![0; self.shape.len()];
        for (k, f) in self.shape.iter().enumerate().rev() {
            coords[k] = rest % f.dim();
            rest /= f.dim();
        }
        (idx / inner, coords)
    }

    /// Basis vectors at distance more than `fock_depth` from the Fock cut and
    /// more than `window_depth` from the window edges.
    pub fn interior_mask(&self, fock_depth: usize, window_depth: usize) -> Vec<bool> {
        (0..self.dim)
            .map(|i| {
                let (_, coords) = self.multi_index(i);
                self.shape.iter().zip(coords).all(|(f, x)| match *f {
                    FactorSpace::FockTrunc(d) => x + fock_depth < d,
                    FactorSpace::ZWindow(l) => x >= window_depth && x + window_depth <= 2 * l,
                    _ => true,
                })
            })
            .collect()
    }

    /// Norm bound of `self − other` compressed to the interior at the given Fock depth.
    pub fn interior_residual(&self, other: &SparseOp, depth: usize) -> Result<f64, Error> {
        let diff = self.sub(other)?;
        let mask = diff.interior_mask(depth, depth);
        Ok(diff.masked_norm_bound(Some(&mask)))
    }

    /// Largest entry modulus of `self − other` on the interior.
    pub fn interior_max_diff(&self, other: &SparseOp, depth: usize) -> Result<f64, Error> {
        let diff = self.sub(other)?;
        let mask = diff.interior_mask(depth, depth);
        Ok(diff.triplets().filter(|&(r, c, _)| mask[r] && mask[c]).map(|(_, _, v)| v.norm()).fold(0.0, f64::max))
    }

    /// Largest singular value. Each connected block of the sparsity pattern
    /// goes to a dense SVD; blocks above [`DENSE_LIMIT`] fall back to power
    /// iteration on `a*a`, stopped once `‖a*a x − λx‖ ≤ tol·λ`.
    pub fn op_norm(&self, tol: f64) -> Result<f64, Error> {
        let mut best = 0.0f64;
        for comp in self.components() {
            if comp.len() == 1 {
                best = best.max(self.get(comp[0], comp[0]).norm());
                continue;
            }
            let sigma = if comp.len() <= DENSE_LIMIT {
                let k = comp.len();
                let mut local = vec![usize::MAX; self.dim];
                comp.iter().enumerate().for_each(|(i, &g)| local[g] = i);
                let mut m = DMatrix::<C64>::zeros(k, k);
                for &r in &comp {
                    for (c, v) in self.row(r) {
                        m[(local[r], local[c])] = v;
                    }
                }
                m.singular_values().max()
            } else {
                self.power_norm(&comp, tol)?
            };
            best = best.max(sigma);
        }
        Ok(best)
    }

    fn power_norm(&self, comp: &[usize], tol: f64) -> Result<f64, Error> {
        let adj = self.adjoint();
        let n = self.dim;
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (i, &g) in comp.iter().enumerate() {
            x[g] = C64::new((1 + i % 7) as f64, 0.0);
        }
        let nx = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        for _ in 0..POWER_MAX_ITER {
            let y = adj.mat_vec(&self.mat_vec(&x));
            let lambda = y.iter().zip(&x).map(|(a, b)| (b.conj() * a).re).sum::<f64>();
            let ny = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if ny == 0.0 {
                return Ok(0.0);
            }
            let resid = y.iter().zip(&x).map(|(a, b)| (a - b * lambda).norm_sqr()).sum::<f64>().sqrt();
            if resid <= tol * lambda {
                return Ok(lambda.max(0.0).sqrt());
            }
            x = y.into_iter().map(|v| v / ny).collect();
        }
        Err(Error::NoConvergence(POWER_MAX_ITER))
    }

    /// Connected components of the symmetric sparsity pattern.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.dim);
        for (r, c, _) in self.triplets() {
            uf.union(r, c);
        }
        uf.groups()
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<(), Error> {
        w.write_all(b"QSKSPOP1")?;
        w.write_all(&(self.shape.len() as u32).to_le_bytes())?;
        for f in &self.shape {
            let (tag, p): (u8, u64) = match *f {
                FactorSpace::FockTrunc(d) => (0, d as u64),
                FactorSpace::ZWindow(l) => (1, l as u64),
                FactorSpace::ZCyclic(m) => (2, m as u64),
                FactorSpace::Scalar => (3, 0),
            };
            w.write_all(&[tag])?;
            w.write_all(&p.to_le_bytes())?;
        }
        w.write_all(&(self.block.unwrap_or(0) as u64).to_le_bytes())?;
        w.write_all(&(self.nnz() as u64).to_le_bytes())?;
        for (r, c, v) in self.triplets() {
            w.write_all(&(r as u64).to_le_bytes())?;
            w.write_all(&(c as u64).to_le_bytes())?;
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<SparseOp, Error> {
        fn u64_of<R: Read>(r: &mut R) -> Result<u64, Error> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(u64::from_le_bytes(b))
        }
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != b"QSKSPOP1" {
            return Err(Error::SchemaMismatch("bad operator dump header".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let nf = u32::from_le_bytes(b4) as usize;
        let mut shape = Vec::with_capacity(nf);
        for _ in 0..nf {
            let mut tag = [0u8; 1];
            r.read_exact(&mut tag)?;
            let p = u64_of(r)? as usize;
            shape.push(match tag[0] {
                0 => FactorSpace::FockTrunc(p),
                1 => FactorSpace::ZWindow(p),
                2 => FactorSpace::ZCyclic(p),
                3 => FactorSpace::Scalar,
                t => return Err(Error::SchemaMismatch(format!("unknown factor tag {t}"))),
            });
        }
        let block = match u64_of(r)? {
            0 => None,
            b => Some(b as usize),
        };
        let nnz = u64_of(r)? as usize;
        let mut trips = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            let row = u64_of(r)? as usize;
            let col = u64_of(r)? as usize;
            let re = f64::from_bits(u64_of(r)?);
            let im = f64::from_bits(u64_of(r)?);
            trips.push((row, col, C64::new(re, im)));
        }
        Ok(SparseOp::from_triplets(shape, block, trips))
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    /// Groups in order of their smallest member, members ascending.
    pub(crate) fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = self.find(i);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(i);
        }
        out
    }
}

/// Orthogonal projection onto the eigenvectors of the self-adjoint `a` with
/// eigenvalue in `[1 − gap/2, 1 + gap/2]`. Any eigenvalue with
/// `gap/2 < |λ − 1| < gap` is reported as a gap violation.
///
/// Diagonal inputs are read off directly; otherwise each connected component
/// of the sparsity pattern is diagonalized densely.
pub fn spectral_projection_one(a: &SparseOp, gap: f64) -> Result<SparseOp, Error> {
    if !(gap > 0.0 && gap < 1.0) {
        return Err(Error::InvalidArgument(format!("gap {gap} must lie in (0,1)")));
    }
    let asym = a.sub(&a.adjoint())?.norm_bound();
    if asym > SELF_ADJOINT_TOL {
        return Err(Error::NotSelfAdjoint(asym));
    }
    let classify = |lam: f64| -> Result<bool, Error> {
        let d = (lam - 1.0).abs();
        if d > gap / 2.0 && d < gap {
            return Err(Error::GapViolation { eigenvalue: lam, gap });
        }
        Ok(d <= gap / 2.0)
    };
    let mut trips = Vec::new();
    if a.is_diagonal() {
        for i in 0..a.dim() {
            if classify(a.get(i, i).re)? {
                trips.push((i, i, C64::new(1.0, 0.0)));
            }
        }
        return Ok(SparseOp::from_triplets(a.shape().to_vec(), a.block(), trips));
    }
    for comp in a.components() {
        if comp.len() == 1 {
            let i = comp[0];
            if classify(a.get(i, i).re)? {
                trips.push((i, i, C64::new(1.0, 0.0)));
            }
            continue;
        }
        if comp.len() > DENSE_LIMIT {
            return Err(Error::TooLarge { dim: comp.len(), limit: DENSE_LIMIT });
        }
        let k = comp.len();
        let m = DMatrix::from_fn(k, k, |i, j| (a.get(comp[i], comp[j]) + a.get(comp[j], comp[i]).conj()) * 0.5);
        let eig = m.symmetric_eigen();
        let mut sel: Vec<usize> = Vec::new();
        for (idx, &lam) in eig.eigenvalues.iter().enumerate() {
            if classify(lam)? {
                sel.push(idx);
            }
        }
        if sel.is_empty() {
            continue;
        }
        for i in 0..k {
            for j in 0..k {
                let v: C64 = sel.iter().map(|&e| eig.eigenvectors[(i, e)] * eig.eigenvectors[(j, e)].conj()).sum();
                trips.push((comp[i], comp[j], v));
            }
        }
    }
    Ok(SparseOp::from_triplets(a.shape().to_vec(), a.block(), trips))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn atoms_on_small_space() {
        let f = FactorSpace::FockTrunc(4);
        let a = atom_matrix(AtomKind::A, 0.5, f).unwrap();
        assert_eq!(a.nnz(), 3);
        assert!((a.get(0, 1) - c((1.0 - 0.25f64).sqrt())).norm() < 1e-15);
        let s = atom_matrix(AtomKind::S, 0.5, f).unwrap();
        let p = atom_matrix(AtomKind::P, 0.5, f).unwrap();
        let sss = s.adjoint().mul(&s).unwrap();
        assert_eq!(SparseOp::identity(vec![f], None).sub(&sss).unwrap(), p);
        assert!(atom_matrix(AtomKind::A, 0.5, FactorSpace::ZCyclic(4)).is_err());
        assert!(atom_matrix(AtomKind::TorusGen(1), 0.5, f).is_err());
    }

    #[test]
    fn torus_powers() {
        let f = FactorSpace::ZCyclic(5);
        let t = atom_matrix(AtomKind::TorusGen(1), 0.5, f).unwrap();
        assert_eq!(torus_power(1, f, true).unwrap(), t);
        let t3 = SparseOp::product(&[&t, &t, &t]).unwrap();
        assert_eq!(torus_power(3, f, true).unwrap(), t3);
        assert_eq!(torus_power(-2, f, true).unwrap(), torus_power(2, f, false).unwrap());
        let w = FactorSpace::ZWindow(2);
        assert_eq!(torus_power(1, w, true).unwrap(), atom_matrix(AtomKind::TorusGen(1), 0.5, w).unwrap());
        assert_eq!(torus_power(1, w, false).unwrap(), atom_matrix(AtomKind::TorusGenConj(1), 0.5, w).unwrap());
    }

    #[test]
    fn block_round_trip() {
        let f = FactorSpace::FockTrunc(3);
        let a = atom_matrix(AtomKind::A, 0.3, f).unwrap();
        let cc = atom_matrix(AtomKind::C, 0.3, f).unwrap();
        let m = SparseOp::block_matrix(vec![vec![Some(a.clone()), None], vec![Some(cc.clone()), None]]).unwrap();
        assert_eq!(m.dim(), 6);
        assert_eq!(m.block_entry(0, 0).unwrap(), a);
        assert_eq!(m.block_entry(1, 0).unwrap(), cc);
        assert_eq!(m.block_entry(0, 1).unwrap().nnz(), 0);
    }

    #[test]
    fn interior_mask_counts() {
        let f = FactorSpace::FockTrunc(4);
        let op = SparseOp::identity(vec![FactorSpace::ZWindow(3), f], None);
        let mask = op.interior_mask(1, 2);
        assert_eq!(mask.iter().filter(|&&b| b).count(), 3 * 3);
    }

    #[test]
    fn spectral_projection_rejects_annulus() {
        let f = FactorSpace::FockTrunc(3);
        let a = SparseOp::diagonal(vec![f], None, |i| c([1.0, 0.7, 0.0][i]));
        assert!(matches!(spectral_projection_one(&a, 0.5), Err(Error::GapViolation { .. })));
        let q = spectral_projection_one(&a, 0.2).unwrap();
        assert_eq!(q.nnz(), 1);
    }
}
