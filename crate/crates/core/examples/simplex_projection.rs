//! Euclidean projection onto the probability simplex and arm sampling.

use queue_regret::simplex::{mix_with_uniform, project_to_simplex, sample_arm, simplex_threshold};

fn main() -> queue_regret::Result<()> {
    for v in [vec![0.6, 0.5], vec![2.0, 0.0, -1.0], vec![0.3, 0.3, 0.3, 0.3], vec![-4.0, 1.5, 1.2]] {
        let p = project_to_simplex(&v)?;
        println!("{v:?} -> {:?} (threshold {:.4})", p.as_slice(), simplex_threshold(&v));
    }

    let p = project_to_simplex(&[0.9, 0.4, 0.1])?;
    let mixed = mix_with_uniform(&p, 0.3)?;
    println!("mixed with 30% uniform exploration: {:?}", mixed.as_slice());
    for u in [0.0, 0.25, 0.5, 0.75, 0.999] {
        println!("  u = {u:<5} -> arm {}", sample_arm(&mixed, u));
    }
    Ok(())
}
