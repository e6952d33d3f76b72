use std::time::Instant;

use qaml::ising::{evolve, evolve_oracle, AnnealSchedule, IsingProblem};

fn main() {
    for n in [8usize, 10, 12] {
        let couplings: Vec<f64> = (0..n - 1).map(|l| ((l * 7 % 5) as f64 - 2.0) / 3.0).collect();
        let fields: Vec<f64> = (0..n).map(|l| ((l * 3 % 7) as f64 - 3.0) / 4.0).collect();
        let p = IsingProblem::chain(couplings, fields).unwrap();
        let t0 = Instant::now();
        let evo = evolve(&p, &AnnealSchedule::Linear, 8.0, 1.0, 0.02).unwrap();
        let el = t0.elapsed();
        println!("N={n} steps={} {:?} per-step {:?}", evo.steps, el, el / evo.steps as u32);
    }
    let p = IsingProblem::chain(vec![0.3, -0.5], vec![0.2, 0.4, -0.6]).unwrap();
    let t0 = Instant::now();
    evolve_oracle(&p, &AnnealSchedule::Linear, 2.0, 1.0, 100_000).unwrap();
    println!("oracle N=3 1e5 {:?}", t0.elapsed());
}
