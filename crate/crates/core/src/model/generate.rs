//! Synthetic scenario generation.
//!
//! Generation is a pure function of `(spec, seed)`: the same inputs always
//! produce the same scenario, byte for byte once serialized. Placement uses
//! bounded rejection sampling; exhausting the attempt budget is an error
//! rather than a silent constraint relaxation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::validate::base_covered;
use super::{
    geodesic_distance_nm, validate_scenario, DatasetSpec, FlightProfile, Gcs, GeoPoint, Nfz,
    ProfileKind, ProfileSet, RiskThresholds, Scenario, SensorKind, Task, Terrain, TimeDependency,
    Uav, UavType, AllenRelation,
};

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("could not place {what} after {attempts} attempts")]
    PlacementFailed { what: &'static str, attempts: usize },
    #[error("spec asks for {wanted} time dependencies but only {available} task pairs exist")]
    TooManyDependencies { wanted: usize, available: usize },
    #[error("invalid dataset spec: {0}")]
    BadSpec(String),
}

/// Knobs for the synthetic world. Defaults give desk-scale scenarios where
/// fuel and endurance genuinely constrain far task/UAV pairings.
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    /// South-west corner of the operations box, degrees.
    pub min_lat: f64,
    pub min_lon: f64,
    /// Box extent, degrees.
    pub lat_extent: f64,
    pub lon_extent: f64,
    /// Task zone radius range, NM.
    pub zone_radius: (f64, f64),
    /// Task performance altitude range, feet.
    pub task_altitude: (f64, f64),
    /// Nominal task duration range, seconds.
    pub base_duration: (f64, f64),
    /// Initial fuel range, kg.
    pub initial_fuel: (f64, f64),
    /// UAV cost range, monetary units per hour.
    pub cost_per_hour: (f64, f64),
    /// Endurance range, seconds.
    pub max_flight_time: (f64, f64),
    /// Range limit, NM.
    pub max_range: (f64, f64),
    /// NFZ circumradius range, NM.
    pub nfz_radius: (f64, f64),
    /// Sensors carried per UAV before capability repair.
    pub sensors_per_uav: usize,
    /// Clearance kept between NFZs and task zones / bases, NM.
    pub nfz_margin: f64,
    /// Rejection sampling budget per placed entity.
    pub max_attempts: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            min_lat: 39.0,
            min_lon: -4.4,
            lat_extent: 1.2,
            lon_extent: 1.4,
            zone_radius: (0.5, 1.5),
            task_altitude: (1500.0, 3000.0),
            base_duration: (600.0, 1500.0),
            initial_fuel: (110.0, 160.0),
            cost_per_hour: (80.0, 250.0),
            max_flight_time: (5400.0, 7800.0),
            max_range: (200.0, 320.0),
            nfz_radius: (3.0, 7.0),
            sensors_per_uav: 2,
            nfz_margin: 1.5,
            max_attempts: 1000,
        }
    }
}

/// Generate a scenario with the default world configuration.
pub fn generate_scenario(spec: &DatasetSpec, seed: u64) -> Result<Scenario, GenerationError> {
    generate_scenario_with(spec, seed, &GeneratorConfig::default())
}

/// Generate a scenario with explicit world knobs.
pub fn generate_scenario_with(
    spec: &DatasetSpec,
    seed: u64,
    cfg: &GeneratorConfig,
) -> Result<Scenario, GenerationError> {
    if spec.multi_uav_tasks > spec.tasks {
        return Err(GenerationError::BadSpec("multi_uav_tasks > tasks".into()));
    }
    if spec.uavs == 0 || spec.gcss == 0 {
        return Err(GenerationError::BadSpec("need at least one UAV and one GCS".into()));
    }
    let max_pairs = spec.tasks.saturating_mul(spec.tasks.saturating_sub(1)) / 2;
    if spec.time_deps > max_pairs {
        return Err(GenerationError::TooManyDependencies { wanted: spec.time_deps, available: max_pairs });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point_in_box = |rng: &mut ChaCha8Rng, pad: f64| {
        GeoPoint::flat(
            rng.gen_range(cfg.min_lat + pad * cfg.lat_extent..cfg.min_lat + (1.0 - pad) * cfg.lat_extent),
            rng.gen_range(cfg.min_lon + pad * cfg.lon_extent..cfg.min_lon + (1.0 - pad) * cfg.lon_extent),
        )
    };

    // GCS positions first: spread them out so distance-based station choice
    // is meaningful.
    let mut gcs_positions: Vec<GeoPoint> = Vec::with_capacity(spec.gcss);
    for _ in 0..spec.gcss {
        let p = place(
            &mut rng,
            cfg.max_attempts,
            "gcs",
            |rng| point_in_box(rng, 0.15),
            |p| gcs_positions.iter().all(|q| geodesic_distance_nm(p, q) > 8.0),
        )?;
        gcs_positions.push(p);
    }
    // Coverage generous enough to reach the whole box from any station: the
    // line-of-sight constraint stays satisfiable everywhere and out-of-coverage
    // time remains a risk driver for hand-built worlds only.
    let box_diag = geodesic_distance_nm(
        &GeoPoint::flat(cfg.min_lat, cfg.min_lon),
        &GeoPoint::flat(cfg.min_lat + cfg.lat_extent, cfg.min_lon + cfg.lon_extent),
    );
    let mut gcss: Vec<Gcs> = gcs_positions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut allowed: Vec<UavType> = UavType::ALL
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.8))
                .collect();
            if allowed.is_empty() {
                allowed.push(UavType::ALL[rng.gen_range(0..4)]);
            }
            Gcs {
                id: i + 1,
                position: *p,
                max_uavs: ((spec.uavs + spec.gcss - 1) / spec.gcss + 1).min(spec.uavs),
                allowed_types: allowed,
                coverage_radius: box_diag * 1.2,
            }
        })
        .collect();
    // Every type must have at least one admitting station.
    for ty in UavType::ALL {
        if !gcss.iter().any(|g| g.allowed_types.contains(&ty)) {
            let k = rng.gen_range(0..gcss.len());
            gcss[k].allowed_types.push(ty);
        }
    }

    // UAV bases.
    let mut bases: Vec<GeoPoint> = Vec::with_capacity(spec.uavs);
    for _ in 0..spec.uavs {
        let p = place(
            &mut rng,
            cfg.max_attempts,
            "uav base",
            |rng| point_in_box(rng, 0.05),
            |p| bases.iter().all(|q| geodesic_distance_nm(p, q) > 3.0),
        )?;
        bases.push(p);
    }

    let mut uavs: Vec<Uav> = Vec::with_capacity(spec.uavs);
    for (i, base) in bases.iter().enumerate() {
        let min_speed = rng.gen_range(150.0..180.0);
        let min_rate = rng.gen_range(60.0..90.0);
        let max_speed = rng.gen_range(290.0..350.0);
        // Keep the fast profile strictly thirstier per mile than the
        // economic one.
        let max_rate = (min_rate / min_speed) * max_speed * rng.gen_range(1.25..1.6);
        let profiles = ProfileSet {
            climb: FlightProfile {
                kind: ProfileKind::Climb,
                speed: rng.gen_range(130.0..160.0),
                fuel_rate: rng.gen_range(200.0..300.0),
                altitude: 0.0,
                angle: rng.gen_range(8.0..12.0),
            },
            descent: FlightProfile {
                kind: ProfileKind::Descent,
                speed: rng.gen_range(150.0..190.0),
                fuel_rate: rng.gen_range(30.0..60.0),
                altitude: 0.0,
                angle: rng.gen_range(6.0..10.0),
            },
            min_consumption: FlightProfile {
                kind: ProfileKind::MinConsumption,
                speed: min_speed,
                fuel_rate: min_rate,
                altitude: rng.gen_range(6000.0..10000.0),
                angle: 0.0,
            },
            max_speed: FlightProfile {
                kind: ProfileKind::MaxSpeed,
                speed: max_speed,
                fuel_rate: max_rate,
                altitude: rng.gen_range(2500.0..4000.0),
                angle: 0.0,
            },
        };
        uavs.push(Uav {
            id: i + 1,
            type_tag: UavType::ALL[rng.gen_range(0..4)],
            initial_position: *base,
            initial_fuel: rng.gen_range(cfg.initial_fuel.0..cfg.initial_fuel.1),
            cost_per_hour: rng.gen_range(cfg.cost_per_hour.0..cfg.cost_per_hour.1),
            max_flight_time: rng.gen_range(cfg.max_flight_time.0..cfg.max_flight_time.1),
            max_range: rng.gen_range(cfg.max_range.0..cfg.max_range.1),
            sensors: draw_sensors(&mut rng, cfg.sensors_per_uav),
            profiles,
        });
    }

    // Tasks.
    let mut centers: Vec<GeoPoint> = Vec::with_capacity(spec.tasks);
    for _ in 0..spec.tasks {
        let p = place(
            &mut rng,
            cfg.max_attempts,
            "task zone",
            |rng| point_in_box(rng, 0.05),
            |p| centers.iter().all(|q| geodesic_distance_nm(p, q) > 4.0),
        )?;
        centers.push(p);
    }
    let mut multi_flags: Vec<bool> = vec![false; spec.tasks];
    let mut chosen = 0;
    while chosen < spec.multi_uav_tasks {
        let k = rng.gen_range(0..spec.tasks);
        if !multi_flags[k] {
            multi_flags[k] = true;
            chosen += 1;
        }
    }
    let mut tasks: Vec<Task> = centers
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut zone = *c;
            zone.alt = rng.gen_range(cfg.task_altitude.0..cfg.task_altitude.1);
            Task {
                id: i + 1,
                zone,
                radius: rng.gen_range(cfg.zone_radius.0..cfg.zone_radius.1),
                required_sensor: SensorKind::ALL[rng.gen_range(0..4)],
                base_duration: rng.gen_range(cfg.base_duration.0..cfg.base_duration.1),
                multi_uav: multi_flags[i],
            }
        })
        .collect();

    // Capability repair: every required sensor must be carried by someone.
    for t in &mut tasks {
        if !uavs.iter().any(|u| u.carries(t.required_sensor)) {
            let k = rng.gen_range(0..uavs.len());
            uavs[k].sensors.push(t.required_sensor);
            uavs[k].sensors.sort();
            uavs[k].sensors.dedup();
        }
    }

    // NFZs: jittered regular polygons kept clear of zones and bases.
    let mut nfzs: Vec<Nfz> = Vec::with_capacity(spec.nfzs);
    for _ in 0..spec.nfzs {
        let mut attempts = 0;
        let polygon = loop {
            attempts += 1;
            if attempts > cfg.max_attempts {
                return Err(GenerationError::PlacementFailed { what: "nfz", attempts: attempts - 1 });
            }
            let center = point_in_box(&mut rng, 0.12);
            let radius = rng.gen_range(cfg.nfz_radius.0..cfg.nfz_radius.1);
            let reach = radius * 1.2;
            let clear_tasks = tasks
                .iter()
                .all(|t| geodesic_distance_nm(&center, &t.zone) > reach + t.radius + cfg.nfz_margin);
            let clear_bases = uavs
                .iter()
                .all(|u| geodesic_distance_nm(&center, &u.initial_position) > reach + cfg.nfz_margin);
            if clear_tasks && clear_bases {
                break polygon_around(&mut rng, &center, radius);
            }
        };
        nfzs.push(Nfz { polygon });
    }

    // Time dependencies: distinct Before pairs oriented low id -> high id,
    // which keeps the precedence graph acyclic by construction.
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for a in 1..=spec.tasks {
        for b in (a + 1)..=spec.tasks {
            pairs.push((a, b));
        }
    }
    let mut time_deps: Vec<TimeDependency> = Vec::with_capacity(spec.time_deps);
    for _ in 0..spec.time_deps {
        let k = rng.gen_range(0..pairs.len());
        let (first, second) = pairs.swap_remove(k);
        time_deps.push(TimeDependency { first, second, relation: AllenRelation::Before });
    }
    time_deps.sort_by_key(|d| (d.first, d.second));

    let mean_fuel = uavs.iter().map(|u| u.initial_fuel).sum::<f64>() / uavs.len() as f64;
    let scenario = Scenario {
        tasks,
        uavs,
        gcss,
        nfzs,
        time_deps,
        vehicle_deps: vec![],
        terrain: Terrain::default(),
        thresholds: RiskThresholds {
            fuel_th: (mean_fuel * 0.2 * 10.0).round() / 10.0,
            ground_clearance: 500.0,
            separation: 0.5,
        },
    };

    debug_assert!(scenario.uavs.iter().all(|u| base_covered(&scenario, u.id)));
    let report = validate_scenario(&scenario);
    debug_assert!(report.is_empty(), "generated scenario invalid: {report}");
    Ok(scenario)
}

fn place(
    rng: &mut ChaCha8Rng,
    max_attempts: usize,
    what: &'static str,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> GeoPoint,
    accept: impl Fn(&GeoPoint) -> bool,
) -> Result<GeoPoint, GenerationError> {
    for _ in 0..max_attempts {
        let p = draw(rng);
        if accept(&p) {
            return Ok(p);
        }
    }
    Err(GenerationError::PlacementFailed { what, attempts: max_attempts })
}

fn draw_sensors(rng: &mut ChaCha8Rng, count: usize) -> Vec<SensorKind> {
    let mut pool = SensorKind::ALL.to_vec();
    let mut out = Vec::with_capacity(count.max(1));
    for _ in 0..count.max(1).min(4) {
        out.push(pool.swap_remove(rng.gen_range(0..pool.len())));
    }
    out.sort();
    out
}

/// Jittered regular polygon around a center; `radius` is the nominal
/// circumradius in NM.
fn polygon_around(rng: &mut ChaCha8Rng, center: &GeoPoint, radius: f64) -> Vec<GeoPoint> {
    let sides = rng.gen_range(5..9);
    let lat_per_nm = 1.0 / 60.0;
    let lon_per_nm = 1.0 / (60.0 * center.lat.to_radians().cos());
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    (0..sides)
        .map(|i| {
            let ang = phase + std::f64::consts::TAU * i as f64 / sides as f64;
            let r = radius * rng.gen_range(0.85..1.2);
            GeoPoint::flat(
                center.lat + r * ang.sin() * lat_per_nm,
                center.lon + r * ang.cos() * lon_per_nm,
            )
        })
        .collect()
}

/// The sixteen dataset shapes used by the experiment protocol.
pub fn table1_specs() -> Vec<DatasetSpec> {
    let rows: [(usize, usize, usize, usize, usize, usize); 16] = [
        (5, 0, 3, 1, 0, 0),
        (6, 1, 3, 1, 1, 0),
        (6, 1, 4, 2, 2, 1),
        (7, 1, 5, 2, 1, 2),
        (8, 2, 5, 2, 3, 1),
        (9, 2, 5, 2, 0, 2),
        (9, 2, 6, 2, 2, 2),
        (10, 2, 6, 2, 3, 3),
        (11, 3, 6, 2, 3, 2),
        (12, 3, 7, 3, 0, 2),
        (12, 3, 8, 3, 2, 3),
        (13, 4, 7, 3, 4, 4),
        (14, 4, 8, 3, 0, 3),
        (15, 4, 9, 3, 5, 4),
        (16, 4, 9, 3, 4, 4),
        (16, 5, 10, 3, 5, 5),
    ];
    rows.iter()
        .map(|&(tasks, multi_uav_tasks, uavs, gcss, nfzs, time_deps)| DatasetSpec {
            tasks,
            multi_uav_tasks,
            uavs,
            gcss,
            nfzs,
            time_deps,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row1_shape_counts() {
        let spec = DatasetSpec { tasks: 5, multi_uav_tasks: 0, uavs: 3, gcss: 1, nfzs: 0, time_deps: 0 };
        let s = generate_scenario(&spec, 42).unwrap();
        assert_eq!(s.tasks.len(), 5);
        assert_eq!(s.multi_uav_task_count(), 0);
        assert_eq!(s.uavs.len(), 3);
        assert_eq!(s.gcss.len(), 1);
        assert_eq!(s.nfzs.len(), 0);
        assert_eq!(s.time_deps.len(), 0);
        assert!(validate_scenario(&s).is_empty());
    }

    #[test]
    fn row16_shape_counts() {
        let spec = DatasetSpec { tasks: 16, multi_uav_tasks: 5, uavs: 10, gcss: 3, nfzs: 5, time_deps: 5 };
        let s = generate_scenario(&spec, 7).unwrap();
        assert_eq!(s.tasks.len(), 16);
        assert_eq!(s.multi_uav_task_count(), 5);
        assert_eq!(s.uavs.len(), 10);
        assert_eq!(s.gcss.len(), 3);
        assert_eq!(s.nfzs.len(), 5);
        assert_eq!(s.time_deps.len(), 5);
        assert!(validate_scenario(&s).is_empty());
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = table1_specs()[4];
        let a = generate_scenario(&spec, 123).unwrap();
        let b = generate_scenario(&spec, 123).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let c = generate_scenario(&spec, 124).unwrap();
        assert_ne!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&c).unwrap()
        );
    }

    #[test]
    fn every_task_has_a_capable_uav() {
        for (i, spec) in table1_specs().iter().enumerate() {
            let s = generate_scenario(spec, 1000 + i as u64).unwrap();
            for t in &s.tasks {
                assert!(
                    !s.eligible_uavs(t.id).is_empty(),
                    "dataset {} task {} has no capable UAV",
                    i + 1,
                    t.id
                );
            }
        }
    }

    #[test]
    fn nfzs_clear_of_zones_and_bases() {
        let spec = table1_specs()[13]; // 15 tasks, 5 NFZs
        let s = generate_scenario(&spec, 9).unwrap();
        for t in &s.tasks {
            assert!(!s.inside_nfz(&t.zone));
        }
        for u in &s.uavs {
            assert!(!s.inside_nfz(&u.initial_position));
        }
    }

    #[test]
    fn dependency_pairs_distinct_and_forward() {
        let spec = table1_specs()[15];
        let s = generate_scenario(&spec, 3).unwrap();
        let mut seen = std::collections::HashSet::new();
        for d in &s.time_deps {
            assert!(d.first < d.second);
            assert!(seen.insert((d.first, d.second)));
        }
    }
}
