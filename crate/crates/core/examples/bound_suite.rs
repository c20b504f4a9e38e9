//! Random disjoint `k`-local circuits checked against every bound that
//! applies to them.

use qbattery::experiments::random_bound_case;
use qbattery::metrics::ComparisonOptions;

fn main() -> qbattery::Result<()> {
    let options = ComparisonOptions::default();
    let mut failures = 0;
    for i in 0..12 {
        let case = random_bound_case(2024, i, 6, &options)?;
        print!("#{i:<2} N={} k={} layers={} eps={:.3} chain={}", case.n_batteries, case.k, case.layers, case.epsilon, case.chain_ok);
        for r in &case.reports {
            let tight = r
                .bounds
                .iter()
                .filter(|(_, b)| b.pass.is_some())
                .map(|(name, b)| (name.as_str(), b.measured / b.bound))
                .fold(("-", 0.0), |a, b| if b.1 > a.1 { b } else { a });
            print!("  {}: gamma={:.4} tightest {}={:.3}", r.constraint, r.gamma, tight.0, tight.1);
        }
        println!();
        failures += usize::from(!case.all_pass());
    }
    println!("failures: {failures}");
    Ok(())
}
