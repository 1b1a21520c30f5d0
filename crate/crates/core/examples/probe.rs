use rand::SeedableRng;
use swarm_planner_core::csp::{EvalOptions, Evaluator};
use swarm_planner_core::model::{generate_scenario, DatasetSpec};
use swarm_planner_core::weights::{weighted_random_individual, StrategyTriple};

fn main() {
    let s = generate_scenario(
        &DatasetSpec { tasks: 5, multi_uav_tasks: 1, uavs: 3, gcss: 1, nfzs: 0, time_deps: 1 },
        31,
    )
    .unwrap();
    let ev = Evaluator::new(&s, 1.0, EvalOptions::default());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for i in 0..6 {
        let c = weighted_random_individual(&s, &StrategyTriple::CONSTANT, 10.0, &mut rng).unwrap();
        let (tl, report) = ev.evaluate(&c);
        println!("--- individual {i}: total {} {:?}", report.total(), report);
        for u in &tl.per_uav {
            if u.used {
                println!(
                    "  uav {} fuel {:.1}/{:.1} ft {:.0}/{:.0} dist {:.1}/{:.1} legs {}",
                    u.uav, u.fuel_consumed, s.uav(u.uav).initial_fuel,
                    u.flight_time, s.uav(u.uav).max_flight_time,
                    u.distance, s.uav(u.uav).max_range, u.legs.len()
                );
            }
        }
    }
}
