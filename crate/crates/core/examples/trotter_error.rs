//! First-order Trotterization of a frustrated two-local drive, and the
//! locality bookkeeping that sets how many sequential groups each step needs.

use qbattery::evolution::propagate;
use qbattery::experiments::{random_pair_schedule, trotter_errors};
use qbattery::operator::{Partition, RngStream};
use qbattery::protocols::{locality_profile, profile_of_partitions, trotterize};
use qbattery::states::DensityMatrix;

fn parts(n: usize, v: &[&[usize]]) -> Vec<Partition> {
    v.iter().map(|p| Partition::new(p.to_vec(), n).unwrap()).collect()
}

fn main() -> qbattery::Result<()> {
    for (n, ps) in [
        (3, parts(3, &[&[0, 1]])),
        (3, parts(3, &[&[0, 1], &[1, 2], &[0, 2]])),
        (6, parts(6, &[&[0, 1, 2], &[0, 3, 4], &[1, 3, 5], &[2, 4, 5]])),
    ] {
        let p = profile_of_partitions(n, &ps);
        println!("k={} m={} M={} (k(m-1)+1 = {})", p.k, p.m, p.groups, p.k * (p.m - 1) + 1);
    }

    let steps = [8, 16, 32, 64];
    let mut rng = RngStream::new(11, 0);
    let schedule = random_pair_schedule(&mut rng, 1.0)?;
    let errors = trotter_errors(&schedule, &steps)?;
    for (w, l) in errors.windows(2).zip(steps.iter().skip(1)) {
        println!("L={l:>2}  error={:.4e}  ratio={:.3}", w[1], w[0] / w[1]);
    }

    // running the M groups one after another stretches time by M at equal work
    let rho0 = DensityMatrix::basis(2, 0)?.tensor_power(3)?;
    let m = locality_profile(&schedule).groups as f64;
    let exact = propagate(&schedule, &rho0, 16)?;
    let trot = propagate(&trotterize(&schedule, 64)?, &rho0, 4)?;
    let (p_exact, p_trot) = (exact.work() / exact.duration(), trot.work() / trot.duration());
    println!("M={m}  P={p_exact:.6}  M*P_trot={:.6}", m * p_trot);
    Ok(())
}
