//! Scratch experiment: sweep perturbation scales over a few seeds and report
//! how far the search gets within the iteration cap.

use std::time::Instant;

use twcircuit::config::RunConfig;
use twcircuit::search::{EpisodeObjective, PolicySetup, RandomSearch};
use twcircuit::wiring::{parse_wiring, DEFAULT_TW_WIRING};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let iterations: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let scales: Vec<f64> = args
        .get(2)
        .map(|s| s.split(',').map(|x| x.parse().unwrap()).collect())
        .unwrap_or_else(|| vec![0.02, 0.05, 0.1, 0.15]);
    let seeds: Vec<u64> = args
        .get(3)
        .map(|s| s.split(',').map(|x| x.parse().unwrap()).collect())
        .unwrap_or_else(|| vec![1, 2, 3]);

    let topo = parse_wiring(DEFAULT_TW_WIRING).unwrap();
    let base = RunConfig::default();
    let interface = base.interface(&topo).unwrap();

    for &scale in &scales {
        println!("== perturbation_scale = {scale} ==");
        for &seed in &seeds {
            let mut config = base.clone();
            config.perturbation_scale = scale;
            config.seed = seed;
            config.max_iterations = Some(iterations);
            config.max_wall_clock_s = None;
            let setup = PolicySetup {
                topo: &topo,
                interface: &interface,
                env: &config.env,
                solver: config.solver,
                sigmoid_sign: config.sigmoid_sign,
            };
            let search_cfg = config.search_config();
            let mut objective = EpisodeObjective::new(setup, &search_cfg).unwrap();
            let started = Instant::now();
            let (mut search, e0) = RandomSearch::start(&mut objective, &topo, &search_cfg).unwrap();
            let oe0 = -e0.incumbent_f;
            let mut accepted = 0u64;
            let mut best = oe0;
            let mut hit_1000_at = None;
            while !search.finished() {
                let e = search.step();
                if e.accepted {
                    accepted += 1;
                }
                let oe = -e.incumbent_f;
                if oe > best {
                    best = oe;
                }
                if oe >= 1000.0 && hit_1000_at.is_none() {
                    hit_1000_at = Some(e.iteration);
                }
            }
            let (_, estimate) = search.incumbent();
            let final_oe = estimate.value;
            println!(
                "seed {seed}: OE0 = {oe0:8.2}  final = {final_oe:8.2}  best_seen = {best:8.2}  \
                 accepted = {accepted:4}  hit1000 = {hit_1000_at:?}  ({:.1}s)",
                started.elapsed().as_secs_f64()
            );
        }
    }
}
