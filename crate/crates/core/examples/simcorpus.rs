//! Simulates a random eLNDT corpus and prints input and output sizes with
//! the fitted log-log slope.
//!
//! `cargo run --release -p ndt-core --example simcorpus -- [seed] [count]`

use std::time::Instant;

use ndt_core::corpus::{random_corpus, CorpusOptions};
use ndt_core::sequent::check_proof;
use ndt_core::sim::simulate_report;

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let count: usize = args.next().map_or(50, |s| s.parse().expect("count"));
    let corpus = random_corpus(seed, count, &CorpusOptions::default());
    let mut pts = Vec::new();
    for (i, it) in corpus.iter().enumerate() {
        let t = Instant::now();
        let (out, rep) = simulate_report(&it.proof, &it.target, 4).expect("simulation");
        check_proof(&out).expect("output checks");
        println!(
            "{i:3} m={} in={:5} minus={:6} stripped={:6} out={:9} lines={:7} {:?}",
            rep.vars,
            rep.input,
            rep.minus,
            rep.stripped,
            rep.output,
            rep.lines,
            t.elapsed()
        );
        pts.push(((rep.input as f64).ln(), (rep.output as f64).ln()));
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    println!("slope {:.3}", sxy / sxx);
}
