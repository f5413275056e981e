//! Times the FFT Toeplitz product and one Strang-preconditioned solve for
//! growing n. Run with `cargo run --release --example matvec_scaling`.

use std::time::Instant;

use qtsolve::{HermitianToeplitz, Preconditioner, Quaternion, SolveConfig, SymbolModel};

fn main() -> qtsolve::Result<()> {
    let model = SymbolModel::ma1(Quaternion::new(0.9, 0.9, 0.5, 1.3), 1.0);
    println!(
        "{:>8} {:>12} {:>14} {:>6}",
        "n", "matvec_us", "us/(n log2 n)", "iters"
    );
    for k in 8..=18 {
        let n = 1usize << k;
        let t = HermitianToeplitz::from_symbol(&model, n)?;
        let x: Vec<Quaternion> = (0..n)
            .map(|i| Quaternion::new(1.0, (i % 7) as f64, 0.5, -1.0))
            .collect();
        let reps = (1 << 20) / n;
        let start = Instant::now();
        for _ in 0..reps {
            std::hint::black_box(t.matvec(&x)?);
        }
        let us = start.elapsed().as_secs_f64() * 1e6 / reps as f64;
        let (_, rep) = qtsolve::solve_toeplitz(
            &model,
            n,
            &x,
            Preconditioner::Strang,
            &SolveConfig::default(),
        )?;
        println!(
            "{n:>8} {us:>12.1} {:>14.4} {:>6}",
            us / (n as f64 * k as f64),
            rep.iterations
        );
    }
    Ok(())
}
