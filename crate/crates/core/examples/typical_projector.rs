//! Entropy-typical projector of a qubit product state: rank, window, typical
//! mass against `1 - eta`, and the operator ordering `Pi W Pi <= W`.

use qdi::channel::{CqChannel, Family, InputWord, Letter};
use qdi::typicality::{eta, typical_projector};

fn main() -> qdi::Result<()> {
    let channel = CqChannel::family(Family::MixedSegment)?;
    let word = InputWord([0.9, 0.8, 0.7, 0.95, 0.6, 0.85].iter().map(|&p| Letter::Param(vec![p])).collect());
    let state = channel.word_state(&word)?;
    println!("n = {}, S(W) = {:.4} bits", state.len(), state.entropy());
    println!("delta  rank   window(log2)            typ_mass  1-eta     order");
    for delta in [0.5, 1.0, 1.5, 2.0] {
        let pi = typical_projector(&state, delta)?;
        let (lo, hi) = pi.window();
        let w = state.materialize(4096)?;
        let p = pi.materialize(4096)?;
        let order = (&w - &(&(&p * &w) * &p)).min_eig()?;
        println!(
            "{delta:>5} {:>5}  [{lo:>8.3}, {hi:>8.3}]  {:>9.6} {:>8.4}  {order:>9.2e}",
            pi.rank(),
            pi.typ_mass(),
            1.0 - eta(delta, 2)
        );
    }
    Ok(())
}
