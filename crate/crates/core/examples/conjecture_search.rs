//! Haar-random search for `k`-local charging terms whose commutator with the
//! internal Hamiltonian beats the single-term optimum.

use qbattery::conjecture::{search, SearchConfig};

fn main() -> qbattery::Result<()> {
    for (n, k) in [(3, 2), (4, 2), (4, 3)] {
        let mut config = SearchConfig::new(n, k, 2000, 7);
        config.workers = 2;
        config.timing = false;
        let out = search(&config)?;
        let s = &out.summary;
        let peak = s.histogram.counts.iter().enumerate().max_by_key(|(_, c)| **c).map(|(i, _)| i).unwrap_or(0);
        println!(
            "N={n} k={k}: max P={:.6} at sample {:?}, counterexamples={}, modal bin={peak}",
            s.max_p.unwrap_or(f64::NAN),
            s.argmax.as_ref().map(|a| a.sample_id),
            s.counterexamples.len()
        );
    }
    Ok(())
}
