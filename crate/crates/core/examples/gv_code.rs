//! Greedy Hamming codes with relative distance `t` against the
//! Gilbert-Varshamov size, plus the sampled greedy above the enumeration cap.

use qdi::codes::{gv_code, GvOptions, Sampling};

fn main() -> qdi::Result<()> {
    println!(" q   n     t  d      |C|        GV  sampled");
    for (q, n, t) in [(2, 3, 1.0), (2, 7, 0.25), (3, 6, 0.5), (4, 8, 0.25), (5, 6, 0.5), (7, 10, 0.25)] {
        let opts = GvOptions {
            cap: 1_000_000,
            sampling: Some(Sampling { seed: 7, draws: 20_000 }),
        };
        let code = gv_code(q, n, t, &opts)?;
        println!(
            "{q:>2} {n:>3} {t:>5} {:>2} {:>8} {:>9.1}  {}",
            code.min_dist,
            code.len(),
            code.gv_bound(),
            code.sampled
        );
    }
    let fixture = gv_code(2, 3, 1.0, &GvOptions::default())?;
    println!("q=2 n=3 t=1: {:?}", fixture.words.iter().collect::<Vec<_>>());
    Ok(())
}
