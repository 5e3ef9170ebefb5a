//! K-theory witnesses for SU(3): boundary unitaries, the isometry pair
//! Z_n/Y_n, and the compactness profile behind S_n/T_n.
use qsk::ktheory::{build_k_unitaries, build_sn_tn, build_zn_yn, WitnessContext};
use qsk::symrep::TorusRealization;

fn main() -> Result<(), qsk::Error> {
    let ctx = WitnessContext::new(0.5, 8, TorusRealization::Cyclic(4));
    for k in 1..3 {
        for w in build_k_unitaries(3, k, &ctx)? {
            println!("{:<6} k={k} pass={} max residual {:.1e}", w.direct.name, w.report.pass, w.report.max_residual());
        }
    }
    let (z, y, rep) = build_zn_yn(3, &ctx)?;
    println!("{} / {}: pass={} integers {:?}", z.name, y.name, rep.pass, rep.integers);
    let (_, _, rep, cert) = build_sn_tn(3, &ctx)?;
    println!("S_n/T_n: pass={}", rep.pass);
    for (j, x) in cert.levels.iter().enumerate().take(4) {
        println!("  level {j}: {x:.6}  q^(2j) = {:.6}", 0.25f64.powi(j as i32));
    }
    Ok(())
}
