//! Dimension of measured output distributions against the quantum output set
//! for random POVMs (a heuristic comparison).

use qdi::channel::{CqChannel, Family, Povm};
use qdi::geometry::{minkowski_estimate, CandidateGrid, Metric, Mode, PointSet, Schedule};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qdi::Result<()> {
    let schedule = Schedule {
        steps: 6,
        ..Schedule::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for family in [Family::BlochCircle, Family::MixedSegment] {
        let channel = CqChannel::family(family.clone())?;
        let grid = CandidateGrid::auto(&channel, Metric::SqrtHs, 1.0, schedule.finest())?;
        let quantum = minkowski_estimate(&PointSet::quantum(&channel, grid.clone(), Metric::SqrtHs)?, &schedule, Mode::Liminf)?;
        println!("{family:?}: quantum {:.4}", quantum.lower);
        let povms = [
            ("trivial", Povm::trivial(2)),
            ("computational", Povm::computational(2)),
            ("haar basis", Povm::random_basis(2, &mut rng)),
            ("haar splitting", Povm::random_splitting(2, 3, &mut rng)),
        ];
        for (name, povm) in &povms {
            let est = minkowski_estimate(&PointSet::classical(&channel, povm, grid.clone())?, &schedule, Mode::Liminf)?;
            println!("  {name:<15} classical {:.4}", est.lower);
        }
    }
    Ok(())
}
