//! Thermal qubits charged by parallel `sigma_x` flips versus one global
//! `X^{(x)N}` drive, compared under each of the three fairness constraints.

use qbattery::experiments::global_flip_comparison;
use qbattery::metrics::{ComparisonOptions, ConstraintKind};

fn main() -> qbattery::Result<()> {
    let options = ComparisonOptions::default();
    println!("{:>2} {:>5} {:>3} {:>10} {:>10} {:>10}", "N", "eps", "C", "gamma", "alpha", "work");
    for n in 2..=6 {
        for eps in [0.01, 1.0] {
            for kind in ConstraintKind::ALL {
                let c = global_flip_comparison(n, eps, kind, &options)?;
                println!(
                    "{n:>2} {eps:>5} {kind:>3} {:>10.6} {:>10.6} {:>10.6}",
                    c.report.gamma, c.alpha, c.report.work_parallel
                );
            }
        }
    }
    // C0 and C2 scale like N, C1 like sqrt(N)
    Ok(())
}
