//! A qubit flipped by `sigma_x` saturates the quantum speed limit between
//! orthogonal states.

use std::f64::consts::FRAC_PI_2;

use qbattery::evolution::{first_passage, propagate};
use qbattery::metrics::{qsl_time, ConstraintValues};
use qbattery::operator::Operator;
use qbattery::protocols::{parallel_protocol, InternalHamiltonian};
use qbattery::states::{bures_angle, DensityMatrix};

fn main() -> qbattery::Result<()> {
    let internal = InternalHamiltonian::unit_gap_qubit();
    let (rho, sigma) = (DensityMatrix::basis(2, 0)?, DensityMatrix::basis(2, 1)?);
    let schedule = parallel_protocol(&Operator::sigma_x(), &internal, 1, 2.0)?;

    let t = first_passage(&schedule, &rho, &sigma, 1e-8)?;
    let traj = propagate(&schedule.truncated(t)?, &rho, 32)?;
    let v = ConstraintValues::of(&traj);
    let bound = qsl_time(&rho, &sigma, 1, v.mean_energy, v.std_energy)?;

    println!("Bures angle   {:.12}", bures_angle(&rho, &sigma, 1)?);
    println!("passage time  {t:.12}  (pi/2 = {FRAC_PI_2:.12})");
    println!("mean E, dE    {:.12}, {:.12}", v.mean_energy, v.std_energy);
    println!("QSL time      {bound:.12}");
    println!("beta          {:.12}", t / bound);
    Ok(())
}
