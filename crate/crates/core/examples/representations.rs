//! Builds χ_ω for SU(3), prints a few entries as path sums and checks
//! unitarity and the quantum determinant on a truncated realization.
use qsk::coxeter::omega_word;
use qsk::relations::{check_determinant, check_unitarity};
use qsk::symrep::{build_rep, Realization, TorusMode, TorusRealization};

fn main() -> Result<(), qsk::Error> {
    let rm = build_rep(&omega_word(3, 2, 3)?, 3, TorusMode::Symbolic)?;
    for (r, s) in [(1, 1), (3, 1), (3, 3)] {
        println!("u_{r}{s} = {}", rm.entry(r, s).to_json());
    }
    let real = Realization::new(0.5, 8, 2, TorusRealization::Cyclic(4));
    let u = check_unitarity(&rm, &real, 1e-9)?;
    let d = check_determinant(&rm, &real, 1e-8)?;
    println!("unitarity: pass={} max residual {:.2e}", u.pass, u.max_residual());
    println!("determinant: pass={} max residual {:.2e}", d.pass, d.max_residual());
    Ok(())
}
