//! Disjoint blocks of `k` qudits driven between their extremal levels reach
//! the largest advantage a `k`-local drive allows.

use qbattery::experiments::saturating_comparison;
use qbattery::metrics::{ComparisonOptions, ConstraintKind};
use qbattery::protocols::{locality_profile, saturating_klocal_protocol, InternalHamiltonian};

fn main() -> qbattery::Result<()> {
    let options = ComparisonOptions::default();
    for (n, k, d) in [(4, 2, 2), (6, 2, 2), (6, 3, 2), (4, 2, 3)] {
        let profile = locality_profile(&saturating_klocal_protocol(n, k, &InternalHamiltonian::symmetric_linear(d)?)?);
        print!("N={n} k={k} d={d} (m={} s={})", profile.m, profile.s);
        for kind in ConstraintKind::ALL {
            let r = saturating_comparison(n, k, d, kind, &options)?.report;
            print!("  {kind}: gamma={:.6} beta={:.6}", r.gamma, r.beta);
        }
        println!();
    }
    Ok(())
}
