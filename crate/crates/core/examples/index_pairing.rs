//! Fredholm index of half-space compressions for each unitary family.
use qsk::fredholm::{index_pairing, FredholmSpec, UnitaryKind};

fn main() -> Result<(), qsk::Error> {
    let spec = FredholmSpec::new(16, 16, 0);
    for kind in [
        UnitaryKind::Identity,
        UnitaryKind::Su2Limit,
        UnitaryKind::Su2Q,
        UnitaryKind::TP,
        UnitaryKind::TBarP,
        UnitaryKind::Su3Fundamental,
    ] {
        let r = index_pairing(kind, 0.5, &spec, 1e-6)?;
        let sweep: Vec<i64> = r.sweep.iter().map(|s| s.index).collect();
        println!(
            "{kind:?}: index {} (ker {}, coker {}), stable {}, sweep {sweep:?}",
            r.index, r.dim_ker, r.dim_coker, r.stable
        );
    }
    Ok(())
}
