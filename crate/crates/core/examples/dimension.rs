//! Minkowski-dimension estimates for the built-in families.
//!
//! Run with `cargo run --release --example dimension`.

use std::time::Instant;

use qdi::channel::{CqChannel, Family};
use qdi::geometry::{estimate_dimension, Metric, Mode, Schedule};

fn main() -> qdi::Result<()> {
    let cantor = Schedule {
        delta0: 0.3,
        ratio: 1.0 / 3.0,
        steps: 6,
        ..Schedule::default()
    };
    let cases = [
        ("bloch circle", Family::BlochCircle, Schedule::default()),
        ("mixed segment", Family::MixedSegment, Schedule::default()),
        ("cantor circle", Family::CantorCircle { depth: 9 }, cantor),
    ];
    for (name, family, schedule) in cases {
        let channel = CqChannel::family(family)?;
        for metric in [Metric::SqrtHs, Metric::Trace] {
            let start = Instant::now();
            let est = estimate_dimension(&channel, metric, &schedule, Mode::Liminf)?;
            println!(
                "{name:>14} {metric:?}: lower {:.4} upper {:.4} counts {:?} ({} candidates, {:.2?})",
                est.lower,
                est.upper,
                est.counts,
                est.grid.len(),
                start.elapsed()
            );
        }
    }
    Ok(())
}
