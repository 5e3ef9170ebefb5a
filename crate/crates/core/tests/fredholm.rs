use qsk::coxeter::ReducedWord;
use qsk::fock::{atom_matrix, AtomKind, FactorSpace, SparseOp};
use qsk::fredholm::{
    half_space_projection, index_pairing, index_pairing_with, index_sample, phi_path, phi_su3, su2_limit_unitary,
    su2_q_unitary, su3_nontriviality, sweep_specs, t_p_unitary, tbar_p_unitary, u3_path, FredholmSpec, UnitaryKind,
};
use qsk::symrep::{build_rep, PathSum, TorusMode};
use qsk::{Error, C64};

const TOL: f64 = 1e-6;

fn rank_of(p: &SparseOp) -> usize {
    (0..p.dim()).filter(|&i| p.get(i, i).re > 0.5).count()
}

/// Lattice points `(n, m)` with `|n| ≤ L`, `0 ≤ m < D` and `n + m ≤ k`.
fn lattice_count(l: i64, d: i64, k: i64) -> usize {
    (-l..=l).flat_map(|n| (0..d).map(move |m| (n, m))).filter(|(n, m)| n + m <= k).count()
}

#[test]
fn half_space_counts() {
    for (l, d) in [(2usize, 2usize), (4, 6), (6, 4)] {
        for k in -(l as i64) - 2..=(l + d) as i64 {
            let p = half_space_projection(&FredholmSpec::new(l, d, k));
            assert!(p.is_diagonal());
            assert_eq!(rank_of(&p), lattice_count(l as i64, d as i64, k), "L={l} D={d} k={k}");
        }
    }
    // The small example: n ∈ [−2, 2], m ∈ {0, 1}, n + m ≤ 0 has five points.
    assert_eq!(rank_of(&half_space_projection(&FredholmSpec::new(2, 2, 0))), 5);
    assert_eq!(half_space_projection(&FredholmSpec::new(3, 4, -4)).nnz(), 0);
}

#[test]
fn half_space_steps_by_one_diagonal() {
    let (l, d) = (5usize, 5usize);
    for k in -4i64..=6 {
        let on_line = (-(l as i64)..=l as i64).filter(|&n| (0..d as i64).contains(&(k - n))).count();
        let a = rank_of(&half_space_projection(&FredholmSpec::new(l, d, k)));
        let b = rank_of(&half_space_projection(&FredholmSpec::new(l, d, k - 1)));
        assert_eq!(a - b, on_line, "k={k}");
    }
}

#[test]
fn half_space_amplifies_to_blocks() {
    let spec = FredholmSpec::new(4, 4, 0).with_block(3);
    let p = half_space_projection(&spec);
    assert_eq!(p.block(), Some(3));
    assert_eq!(rank_of(&p), 3 * lattice_count(4, 4, 0));
}

#[test]
fn spec_validation() {
    assert!(FredholmSpec::new(24, 24, 0).validate().is_ok());
    assert!(FredholmSpec::new(3, 24, 0).validate().is_err());
    assert!(FredholmSpec::new(24, 3, 0).validate().is_err());
    assert!(FredholmSpec::new(8, 24, 5).validate().is_err());
    assert!(FredholmSpec::new(24, 8, 5).validate().is_err());
    assert!(FredholmSpec::new(24, 24, -20).validate().is_ok());
    assert!(FredholmSpec::new(24, 24, -21).validate().is_err());
}

fn fock_atoms(d: usize) -> (SparseOp, SparseOp, SparseOp) {
    let f = FactorSpace::FockTrunc(d);
    (
        atom_matrix(AtomKind::S, 0.0, f).unwrap(),
        atom_matrix(AtomKind::Sstar, 0.0, f).unwrap(),
        atom_matrix(AtomKind::P, 0.0, f).unwrap(),
    )
}

#[test]
fn first_column_is_isometric_exactly() {
    let (s, ss, p) = fock_atoms(10);
    let id = SparseOp::identity(s.shape().to_vec(), None);
    assert_eq!(ss.mul(&s).unwrap().add(&p).unwrap(), id);
}

/// `|n| ≤ L−2` and `m ≤ D−2` on every block.
fn window_interior(spec: &FredholmSpec, dim: usize) -> Vec<bool> {
    (0..dim)
        .map(|i| {
            let (n, m) = spec.lattice_point(i);
            n.unsigned_abs() as usize + 2 <= spec.l && m + 2 <= spec.d
        })
        .collect()
}

fn interior_defect(x: &SparseOp, mask: &[bool]) -> f64 {
    x.triplets().filter(|&(r, c, _)| mask[r] && mask[c]).map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
}

#[test]
fn limit_unitary_is_unitary_on_the_interior() {
    let spec = FredholmSpec::new(8, 8, 0);
    let u = su2_limit_unitary(&spec).unwrap();
    assert_eq!(u.block(), Some(2));
    let id = SparseOp::identity(u.shape().to_vec(), Some(2));
    let mask = window_interior(&spec, u.dim());
    assert!(interior_defect(&u.mul(&u.adjoint()).unwrap().sub(&id).unwrap(), &mask) <= 1e-12);
    assert!(interior_defect(&u.adjoint().mul(&u).unwrap().sub(&id).unwrap(), &mask) <= 1e-12);
}

#[test]
fn shift_commutators_with_the_half_space() {
    let spec = FredholmSpec::new(8, 8, 1);
    let w = FactorSpace::ZWindow(spec.l);
    let t = atom_matrix(AtomKind::TorusGen(1), 0.0, w).unwrap();
    let (s, _, p) = fock_atoms(spec.d);
    let pk = half_space_projection(&spec);
    // Full truncated space, not just the interior.
    let ts = SparseOp::kron(&[&t, &s]).unwrap();
    assert_eq!(ts.commutator(&pk).unwrap().nnz(), 0);
    let tp = SparseOp::kron(&[&t, &p]).unwrap();
    let comm = tp.commutator(&pk).unwrap();
    let mask = window_interior(&spec, comm.dim());
    let idx: Vec<usize> = (0..comm.dim()).filter(|&i| mask[i]).collect();
    let sub = nalgebra::DMatrix::from_fn(idx.len(), idx.len(), |i, j| comm.get(idx[i], idx[j]));
    let rank = sub.singular_values().iter().filter(|&&x| x > 1e-9).count();
    assert_eq!(rank, 1);
}

#[test]
fn identity_pairs_to_zero() {
    let r = index_pairing(UnitaryKind::Identity, 0.5, &FredholmSpec::new(12, 12, 0), TOL).unwrap();
    assert_eq!((r.index, r.dim_ker, r.dim_coker), (0, 0, 0));
    assert!(r.stable);
}

#[test]
fn limit_unitary_pairs_to_minus_one() {
    let r = index_pairing(UnitaryKind::Su2Limit, 0.5, &FredholmSpec::new(24, 24, 0), TOL).unwrap();
    assert_eq!(r.index, -1);
    assert_eq!((r.dim_ker, r.dim_coker), (0, 1));
    assert!(r.stable);
    assert!(r.min_retained_sv >= 0.1, "{}", r.min_retained_sv);
    assert_eq!(r.sweep.len(), 6);
    for s in &r.sweep {
        assert_eq!(s.index, s.dim_ker as i64 - s.dim_coker as i64);
    }
}

#[test]
fn fundamental_matrix_pairs_to_minus_one() {
    for q in [0.1, 0.3, 0.5, 0.8] {
        let r = index_pairing(UnitaryKind::Su2Q, q, &FredholmSpec::new(20, 20, 0), TOL).unwrap();
        assert_eq!(r.index, -1, "q={q}");
        assert!(r.stable, "q={q}");
    }
}

#[test]
fn shift_p_orientation() {
    // With t the right shift, t⊗p + 1 − 1⊗p has a kernel vector at
    // (k, 0) and index +1; the left shift version has index −1.
    for k in -2..=2 {
        let spec = FredholmSpec::new(20, 20, k);
        let tp = index_pairing(UnitaryKind::TP, 0.5, &spec, TOL).unwrap();
        assert_eq!((tp.index, tp.dim_ker, tp.dim_coker), (1, 1, 0), "k={k}");
        let tb = index_pairing(UnitaryKind::TBarP, 0.5, &spec, TOL).unwrap();
        assert_eq!((tb.index, tb.dim_ker, tb.dim_coker), (-1, 0, 1), "k={k}");
        assert!(tp.stable && tb.stable);
    }
    let spec = FredholmSpec::new(8, 8, 0);
    let tp = t_p_unitary(&spec).unwrap();
    let tb = tbar_p_unitary(&spec).unwrap();
    assert_eq!(tp.adjoint().to_dense(), tb.to_dense());
}

#[test]
fn fundamental_matrix_approaches_the_limit() {
    let spec = FredholmSpec::new(10, 10, 0);
    let u = su2_limit_unitary(&spec).unwrap();
    let mask = window_interior(&spec, u.dim());
    let mut prev = f64::INFINITY;
    for q in [0.5, 0.3, 0.1, 0.01] {
        let uq = su2_q_unitary(q, &spec).unwrap();
        let d = interior_defect(&uq.sub(&u).unwrap(), &mask);
        assert!(d < prev, "q={q}: {d} vs {prev}");
        prev = d;
    }
    assert!(prev < 0.02);
}

#[test]
fn ambiguous_rank_is_reported() {
    let spec = FredholmSpec::new(8, 8, 0);
    let build = |s: &FredholmSpec| Ok(SparseOp::identity(s.shape(), None).scale(C64::new(2.0 * TOL, 0.0)));
    assert!(matches!(index_pairing_with(&build, &spec, TOL), Err(Error::AmbiguousRank { .. })));
    let tiny = |s: &FredholmSpec| Ok(SparseOp::identity(s.shape(), None).scale(C64::new(1e-9, 0.0)));
    let r = index_pairing_with(&tiny, &spec, TOL).unwrap();
    assert_eq!(r.index, 0);
    assert!(r.dim_ker > 0 && r.dim_ker == r.dim_coker);
}

#[test]
fn sample_rejects_mismatched_dimensions() {
    let spec = FredholmSpec::new(8, 8, 0);
    let u = su2_limit_unitary(&spec).unwrap();
    assert!(index_sample(&u, &spec, TOL).is_err());
    assert_eq!(sweep_specs(&spec).len(), 6);
}

#[test]
fn phi_contracts_to_the_su2_block() {
    let rm = build_rep(&ReducedWord::new(vec![1, 2, 1], 3).unwrap(), 3, TorusMode::Symbolic).unwrap();
    let phi = phi_su3(&rm).unwrap();
    assert!(phi.is_block_diagonal().unwrap());
    assert_eq!(phi.entry(3, 3), &PathSum::identity(2, 1));
    let v = build_rep(&ReducedWord::new(vec![1], 2).unwrap(), 2, TorusMode::Symbolic).unwrap();
    for i in 1..=2 {
        for j in 1..=2 {
            assert_eq!(phi.entry(i, j), v.entry(i, j));
        }
    }
    assert_eq!(phi_path(&u3_path()).unwrap(), PathSum::identity(2, 1));
    let other = build_rep(&ReducedWord::new(vec![2, 1, 2], 3).unwrap(), 3, TorusMode::Symbolic).unwrap();
    assert!(phi_su3(&other).is_err());
}

#[test]
fn su3_fundamental_unitary_is_nontrivial() {
    for q in [0.5, 0.3] {
        let r = su3_nontriviality(q, &FredholmSpec::new(24, 24, 0), TOL).unwrap();
        assert!(r.block_diagonal && r.u3_to_identity);
        assert_eq!(r.phi_image.index, -1, "q={q}");
        assert_eq!(r.limit_block.index, -1, "q={q}");
        assert!(r.phi_image.stable && r.limit_block.stable);
    }
}
