use chordal_metric_dim::*;
use chordal_metric_dim::emd::solver::SolverConfig;
use std::time::Instant;

fn main() {
    let cfg = SolverConfig::default();
    for seed in 0..200u64 {
        let n = 2 + (seed as usize * 7 % 9);
        let omega = 2 + (seed as usize % 2);
        let g = random_chordal(n, omega, seed).unwrap();
        let t = Instant::now();
        let dp = metric_dimension(&g, &cfg).unwrap();
        let el = t.elapsed().as_millis();
        let oracle = min_resolving_set(&g, None, 16).unwrap();
        let ok = dp.dim as usize == oracle.size;
        if el > 300 || !ok {
            println!("seed {seed} n {n} omega {omega} dp {} oracle {} ok {ok} ms {el} memo {}", dp.dim, oracle.size, dp.memo_entries_total);
        }
        if seed % 50 == 49 { println!("... through seed {seed}"); }
    }
    println!("done");
}
