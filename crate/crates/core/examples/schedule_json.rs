//! Schedules survive a JSON round trip bit for bit; the hash identifies them
//! in trajectory metadata.

use qbattery::evolution::propagate;
use qbattery::io::{schedule_from_json, schedule_hash, schedule_to_json, trajectory_csv, TrajectoryMeta};
use qbattery::operator::RngStream;
use qbattery::protocols::{mirrored_random_circuit, InternalHamiltonian};
use qbattery::states::DensityMatrix;
use qbattery::NumericPolicy;

fn main() -> qbattery::Result<()> {
    let mut rng = RngStream::new(3, 0);
    let schedule = mirrored_random_circuit(&InternalHamiltonian::unit_gap_qubit(), 3, 2, 2, &mut rng)?;
    let text = schedule_to_json(&schedule);
    let back = schedule_from_json(&text)?;
    assert_eq!(back, schedule);
    println!("{} bytes, {} segments, hash {}", text.len(), back.segments().len(), schedule_hash(&back));

    let traj = propagate(&back, &DensityMatrix::basis(2, 0)?.tensor_power(3)?, 4)?;
    let meta = TrajectoryMeta::new(&back, &traj, 4, Some(3), NumericPolicy::default());
    println!("{}", serde_json::to_string_pretty(&meta).expect("metadata serializes"));
    for line in trajectory_csv(&traj).lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
