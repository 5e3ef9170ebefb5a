//! Bott projection of two commuting shifts and of a slightly perturbed pair.
use qsk::fock::{atom_matrix, AtomKind, FactorSpace, SparseOp};
use qsk::ktheory::{bott_matrix, bott_projection};
use qsk::C64;

fn main() -> Result<(), qsk::Error> {
    let m = 6;
    let f = FactorSpace::ZCyclic(m);
    let t = atom_matrix(AtomKind::TorusGen(1), 0.0, f)?;
    let id = SparseOp::identity(vec![f], None);
    let u = SparseOp::kron(&[&t, &id])?;
    let v = SparseOp::kron(&[&id, &t])?;
    let e = bott_projection(&u, &v)?;
    let e2 = e.mul(&e)?.sub(&e)?.max_abs();
    let tr: C64 = (0..e.dim()).map(|i| e.get(i, i)).sum();
    println!("commuting shifts: ‖e² − e‖ = {e2:.1e}, trace {:.3}", tr.re);

    // V_ε = exp(iεH) V with H a diagonal weight on the first factor.
    for eps in [0.2, 0.05, 0.01] {
        let phase = SparseOp::diagonal(u.shape().to_vec(), None, |i| C64::new(0.0, eps * ((i / m) as f64).cos()).exp());
        let ve = phase.mul(&v)?;
        let b = bott_matrix(&u, &ve)?;
        let defect = b.mul(&b)?.sub(&b)?.op_norm(1e-10)?;
        let comm = u.commutator(&ve)?.op_norm(1e-10)?;
        println!("ε={eps}: ‖[U,V]‖ = {comm:.3e}, ‖e² − e‖ = {defect:.3e}");
    }
    Ok(())
}
