//! Typical-projector codes on the mixed segment: packing, Hamming code,
//! entropy binning, separation certification, and exact errors.

use qdi::channel::{CqChannel, Family};
use qdi::codes::{assemble_thm4, BuildOptions};
use qdi::verify::{check_thm3, measure_errors};

fn main() -> qdi::Result<()> {
    let channel = CqChannel::family(Family::MixedSegment)?;
    println!(" n  delta  letters  hamming    N   lambda1   lambda2   claimed2  cert(bits)  required");
    for (n, delta) in [(2, 0.5), (4, 1.0), (6, 1.0), (8, 1.0)] {
        let code = assemble_thm4(&channel, n, 0.25, 0.25, delta, &BuildOptions::default())?;
        let report = measure_errors(&code, &channel)?;
        let cert = code.certification.as_ref().expect("typical codes are certified or not");
        println!(
            "{n:>2} {delta:>6} {:>8} {:>8} {:>4} {:>9.3e} {:>9.6} {:>10.4} {:>11} {:>9.2}",
            code.alphabet.len(),
            code.params.hamming_words,
            code.len(),
            report.lambda1,
            report.lambda2,
            code.claimed.lambda2,
            cert.min_exponent_bits.map_or("inf".to_string(), |b| format!("{b:.3}")),
            cert.required_bits
        );
        match check_thm3(&code, &report, channel.output_dim()) {
            Ok(c) => println!("    bounds hold: {}", c.pass),
            Err(e) => println!("    {e}"),
        }
    }
    Ok(())
}
