//! Sandwiches the last column of χ_{ω_{n−1,n−k}} between projections.
use qsk::relations::check_killing;

fn main() -> Result<(), qsk::Error> {
    for (n, k) in [(3, 1), (3, 2), (4, 2), (4, 3)] {
        let rep = check_killing(n, k, 0.5, 6, 1e-12)?;
        println!("n={n} k={k}: pass={} ({} residuals, max {:.1e})", rep.pass, rep.residuals.len(), rep.max_residual());
    }
    Ok(())
}
