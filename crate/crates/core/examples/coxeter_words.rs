//! Longest words of the Stiefel cosets and their minimal representatives.
use qsk::coxeter::{all_perms, coset_min_rep, omega_word, perm_length, word_to_perm};

fn main() -> Result<(), qsk::Error> {
    for n in 3..=5 {
        let w = omega_word(n, 2, n)?;
        let p = word_to_perm(&w);
        println!("n={n}: ω = ({}) length {} reduced {}", w.to_csv(), perm_length(&p), w.is_reduced());
    }
    // Distinct minimal representatives of S_4 / S_2.
    let mut reps: Vec<_> = all_perms(4).iter().map(|p| coset_min_rep(p, 4, 2).images().to_vec()).collect();
    reps.sort();
    reps.dedup();
    println!("{} cosets in S_4 / S_2", reps.len());
    Ok(())
}
