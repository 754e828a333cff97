//! Pure-state identification codes on the Bloch circle: build, measure the
//! exact errors and compare with the claimed bounds.
//!
//! Run with `cargo run --release --example pure_code`.

use std::time::Instant;

use qdi::channel::{CqChannel, Family};
use qdi::codes::{assemble_pure, BuildOptions, GvOptions, Sampling};
use qdi::verify::{check_thm5, measure_errors, rate_of};

fn main() -> qdi::Result<()> {
    let channel = CqChannel::family(Family::BlochCircle)?;
    let opts = BuildOptions {
        gv: GvOptions {
            sampling: Some(Sampling { seed: 1, draws: 20_000 }),
            ..GvOptions::default()
        },
    };
    println!("   n    q  d_min          N     lambda1     lambda2       bound    rate  time");
    for n in [4, 6, 8, 10] {
        let start = Instant::now();
        let code = assemble_pure(&channel, n, 0.5, 0.25, &opts)?;
        let report = measure_errors(&code, &channel)?;
        let check = check_thm5(&code, &report)?;
        println!(
            "{n:>4} {:>4} {:>6} {:>10} {:>11.3e} {:>11.6} {:>11.6} {:>7.4} {:.2?}{}",
            code.alphabet.len(),
            code.params.min_dist,
            code.len(),
            report.lambda1,
            report.lambda2,
            check.lambda2.bound,
            rate_of(code.len(), n)?,
            start.elapsed(),
            if code.params.hamming_sampled { " (sampled)" } else { "" }
        );
    }
    Ok(())
}
