//! Domain types for the mission world plus scenario validation and
//! synthetic dataset generation.
//!
//! Conventions used throughout the crate: angles in decimal degrees,
//! horizontal distances in nautical miles, altitudes in feet, terrain
//! elevation in meters, fuel in kilograms, time in seconds, speed in knots,
//! fuel rates in kg/hour. Task, UAV and GCS ids are 1-based and contiguous,
//! so `scenario.tasks[id - 1].id == id`.

mod generate;
mod validate;

pub use generate::{generate_scenario, generate_scenario_with, table1_specs, GenerationError, GeneratorConfig};
pub use validate::{validate_scenario, ScenarioDefect, ValidationReport};

use serde::{Deserialize, Serialize};

/// Mean-earth sphere radius in nautical miles, used for all great-circle math.
pub const EARTH_RADIUS_NM: f64 = 3440.065;

/// Feet per nautical mile.
pub const FT_PER_NM: f64 = 6076.115_49;

/// Feet per meter, for terrain elevation (stored in meters) vs altitudes (feet).
pub const FT_PER_M: f64 = 3.280_84;

/// A geographic position. `alt` is feet above mean sea level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
    #[serde(default)]
    pub alt: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64, alt: f64) -> Self {
        GeoPoint { lat, lon, alt }
    }

    /// Planar position only, altitude zeroed.
    pub fn flat(lat: f64, lon: f64) -> Self {
        GeoPoint { lat, lon, alt: 0.0 }
    }
}

/// Great-circle distance between two points in nautical miles (haversine).
/// Altitude is ignored.
pub fn geodesic_distance_nm(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let (lat1, lon1) = (a.lat.to_radians(), a.lon.to_radians());
    let (lat2, lon2) = (b.lat.to_radians(), b.lon.to_radians());
    let dlat = lat2 - lat1;
    let dlon = lon2 - lon1;
    let s = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_NM * s.sqrt().min(1.0).asin()
}

/// Sensor payload classes a task may require and a UAV may carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SensorKind {
    EoIr,
    SarRadar,
    IsarRadar,
    MprRadar,
}

impl SensorKind {
    pub const ALL: [SensorKind; 4] = [
        SensorKind::EoIr,
        SensorKind::SarRadar,
        SensorKind::IsarRadar,
        SensorKind::MprRadar,
    ];
}

/// Airframe classes; GCSs whitelist the types they can command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UavType {
    Male,
    Hale,
    Ucav,
    Urav,
}

impl UavType {
    pub const ALL: [UavType; 4] = [UavType::Male, UavType::Hale, UavType::Ucav, UavType::Urav];
}

/// The four operating modes of a flight profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProfileKind {
    Climb,
    Descent,
    MinConsumption,
    MaxSpeed,
}

/// The cruise profile alternatives a chromosome chooses between for path and
/// return legs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CruiseChoice {
    Min,
    Max,
}

impl CruiseChoice {
    pub fn profile_kind(self) -> ProfileKind {
        match self {
            CruiseChoice::Min => ProfileKind::MinConsumption,
            CruiseChoice::Max => ProfileKind::MaxSpeed,
        }
    }
}

/// One flight profile: speed in knots, fuel rate in kg/hour, and either a
/// cruise `altitude` in feet (min-consumption / max-speed) or a climb/descent
/// `angle` in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightProfile {
    pub kind: ProfileKind,
    pub speed: f64,
    pub fuel_rate: f64,
    #[serde(default)]
    pub altitude: f64,
    #[serde(default)]
    pub angle: f64,
}

/// One profile per kind; every UAV carries all four.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSet {
    pub climb: FlightProfile,
    pub descent: FlightProfile,
    pub min_consumption: FlightProfile,
    pub max_speed: FlightProfile,
}

impl ProfileSet {
    pub fn get(&self, kind: ProfileKind) -> &FlightProfile {
        match kind {
            ProfileKind::Climb => &self.climb,
            ProfileKind::Descent => &self.descent,
            ProfileKind::MinConsumption => &self.min_consumption,
            ProfileKind::MaxSpeed => &self.max_speed,
        }
    }

    pub fn cruise(&self, choice: CruiseChoice) -> &FlightProfile {
        self.get(choice.profile_kind())
    }
}

/// A mission task: performed inside a circular zone, with one required
/// sensor. Multi-UAV tasks may be worked by several vehicles at once, which
/// divides the nominal duration by the crew size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: usize,
    pub zone: GeoPoint,
    pub radius: f64,
    pub required_sensor: SensorKind,
    pub base_duration: f64,
    pub multi_uav: bool,
}

/// A vehicle with its base position, endurance limits and payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Uav {
    pub id: usize,
    pub type_tag: UavType,
    pub initial_position: GeoPoint,
    pub initial_fuel: f64,
    pub cost_per_hour: f64,
    pub max_flight_time: f64,
    pub max_range: f64,
    pub sensors: Vec<SensorKind>,
    pub profiles: ProfileSet,
}

impl Uav {
    pub fn carries(&self, sensor: SensorKind) -> bool {
        self.sensors.contains(&sensor)
    }
}

/// A ground control station with command capacity, type whitelist and a
/// circular coverage footprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gcs {
    pub id: usize,
    pub position: GeoPoint,
    pub max_uavs: usize,
    pub allowed_types: Vec<UavType>,
    pub coverage_radius: f64,
}

impl Gcs {
    pub fn admits(&self, uav: &Uav) -> bool {
        self.allowed_types.contains(&uav.type_tag)
    }
}

/// A no-fly zone: a simple polygon in the lat/lon plane, applying at all
/// altitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nfz {
    pub polygon: Vec<GeoPoint>,
}

impl Nfz {
    /// Even-odd ray-casting point-in-polygon test in the lat/lon plane.
    pub fn contains(&self, p: &GeoPoint) -> bool {
        let n = self.polygon.len();
        if n < 3 {
            return false;
        }
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (vi, vj) = (&self.polygon[i], &self.polygon[j]);
            if (vi.lat > p.lat) != (vj.lat > p.lat) {
                let x = vi.lon + (p.lat - vi.lat) / (vj.lat - vi.lat) * (vj.lon - vi.lon);
                if p.lon < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }
}

/// The seven Allen interval relations admitted between two tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AllenRelation {
    Before,
    Meets,
    Overlaps,
    Starts,
    During,
    Finishes,
    Equals,
}

/// A temporal dependency `first REL second` between two task ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeDependency {
    pub first: usize,
    pub second: usize,
    pub relation: AllenRelation,
}

/// Whether two tasks must share a vehicle or must not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VehicleRelation {
    SameUav,
    DifferentUav,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VehicleDependency {
    pub first: usize,
    pub second: usize,
    pub mode: VehicleRelation,
}

/// Thresholds the risk objective measures against. All strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskThresholds {
    /// Final fuel below this many kg counts as a low-fuel landing.
    pub fuel_th: f64,
    /// Ground clearance below this many feet counts as terrain risk.
    pub ground_clearance: f64,
    /// Pairwise separation below this many NM counts as a near miss.
    pub separation: f64,
}

/// Terrain heightmap in meters on a regular lat/lon grid. An empty grid is
/// flat at sea level.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Terrain {
    pub origin_lat: f64,
    pub origin_lon: f64,
    /// Cell edge in degrees.
    pub cell_deg: f64,
    /// Row-major elevations, rows increasing with latitude.
    pub rows: Vec<Vec<f64>>,
}

impl Terrain {
    /// Elevation in meters at a point; nearest cell, 0 outside the grid.
    pub fn elevation_m(&self, p: &GeoPoint) -> f64 {
        if self.rows.is_empty() || self.cell_deg <= 0.0 {
            return 0.0;
        }
        let r = ((p.lat - self.origin_lat) / self.cell_deg).floor();
        let c = ((p.lon - self.origin_lon) / self.cell_deg).floor();
        if r < 0.0 || c < 0.0 {
            return 0.0;
        }
        let (r, c) = (r as usize, c as usize);
        self.rows
            .get(r)
            .and_then(|row| row.get(c))
            .copied()
            .unwrap_or(0.0)
    }
}

/// The immutable world description a solver run operates on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub tasks: Vec<Task>,
    pub uavs: Vec<Uav>,
    pub gcss: Vec<Gcs>,
    pub nfzs: Vec<Nfz>,
    pub time_deps: Vec<TimeDependency>,
    pub vehicle_deps: Vec<VehicleDependency>,
    #[serde(default)]
    pub terrain: Terrain,
    pub thresholds: RiskThresholds,
}

impl Scenario {
    pub fn task(&self, id: usize) -> &Task {
        &self.tasks[id - 1]
    }

    pub fn uav(&self, id: usize) -> &Uav {
        &self.uavs[id - 1]
    }

    pub fn gcs(&self, id: usize) -> &Gcs {
        &self.gcss[id - 1]
    }

    /// ξ(u, t): whether UAV `uav_id` carries the sensor task `task_id` needs.
    pub fn sensor_capable(&self, uav_id: usize, task_id: usize) -> bool {
        self.uav(uav_id).carries(self.task(task_id).required_sensor)
    }

    /// Ids of UAVs able to perform the task, ascending.
    pub fn eligible_uavs(&self, task_id: usize) -> Vec<usize> {
        self.uavs
            .iter()
            .filter(|u| u.carries(self.task(task_id).required_sensor))
            .map(|u| u.id)
            .collect()
    }

    /// Ids of GCSs whose type whitelist admits the UAV, ascending.
    pub fn eligible_gcss(&self, uav_id: usize) -> Vec<usize> {
        let uav = self.uav(uav_id);
        self.gcss.iter().filter(|g| g.admits(uav)).map(|g| g.id).collect()
    }

    pub fn multi_uav_task_count(&self) -> usize {
        self.tasks.iter().filter(|t| t.multi_uav).count()
    }

    /// Point inside any no-fly zone?
    pub fn inside_nfz(&self, p: &GeoPoint) -> bool {
        self.nfzs.iter().any(|z| z.contains(p))
    }
}

/// Feature counts for one synthetic dataset row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub tasks: usize,
    pub multi_uav_tasks: usize,
    pub uavs: usize,
    pub gcss: usize,
    pub nfzs: usize,
    pub time_deps: usize,
}
