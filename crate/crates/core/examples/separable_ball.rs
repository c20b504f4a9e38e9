//! The global product drive never leaves a small Frobenius ball around the
//! maximally mixed state when the batteries start hot, so the collective
//! speed-up needs no entanglement there.

use qbattery::evolution::propagate;
use qbattery::protocols::{global_product_protocol, InternalHamiltonian};
use qbattery::operator::Operator;
use qbattery::states::{ball_check, thermal_state, BallStatus};

fn main() -> qbattery::Result<()> {
    let (n, eps) = (6, 0.01);
    let internal = InternalHamiltonian::unit_gap_qubit();
    let schedule = global_product_protocol(&Operator::sigma_x(), &internal, n, 1.0, std::f64::consts::FRAC_PI_2)?;
    let rho0 = thermal_state(&internal.site_operator(), eps)?.tensor_power(n)?;
    let traj = propagate(&schedule, &rho0, 32)?;

    let verdicts: Vec<_> = traj.states().iter().map(ball_check).collect();
    let (lo, hi) = verdicts
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v.frobenius_radius), hi.max(v.frobenius_radius)));
    let inside = verdicts.iter().all(|v| v.verdict == BallStatus::WithinDocumentedBound);

    println!("samples            {}", verdicts.len());
    println!("radius range       [{lo:.12e}, {hi:.12e}]");
    println!("radius spread      {:.3e}", hi - lo);
    println!("separable ball     {:.6e}", verdicts[0].threshold);
    println!("inside throughout  {inside}");
    Ok(())
}
