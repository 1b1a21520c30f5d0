//! Structural scenario validation. Defects are data, not failures: an empty
//! report means the scenario is admissible for solving.

use std::fmt;

use super::{geodesic_distance_nm, Scenario};

/// One structural problem found in a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioDefect {
    /// A task/UAV/GCS id field does not equal its 1-based position.
    NonContiguousId { kind: &'static str, position: usize, found: usize },
    /// A dependency references a task id outside 1..=T.
    DanglingTaskId { dep: &'static str, id: usize },
    /// A dependency relates a task to itself.
    SelfDependency { dep: &'static str, id: usize },
    /// No UAV carries the sensor the task requires.
    NoCapableUav { task: usize },
    /// No GCS admits the UAV's type.
    NoCompatibleGcs { uav: usize },
    /// Σ max_uavs over all GCSs is below the UAV count; every assignment
    /// overflows some station.
    GcsCapacityShortfall { capacity: usize, uavs: usize },
    /// A UAV base lies inside a no-fly zone.
    NfzCoversUavBase { uav: usize },
    /// A task zone center lies inside a no-fly zone.
    NfzCoversTaskZone { task: usize },
    /// An NFZ polygon has fewer than three vertices or self-intersects.
    MalformedNfz { index: usize },
    /// A numeric field violates its bound (non-positive duration, fuel, ...).
    BadField { entity: String, field: &'static str },
}

impl fmt::Display for ScenarioDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioDefect::NonContiguousId { kind, position, found } => {
                write!(f, "{kind} at position {position} has id {found}, expected {position}")
            }
            ScenarioDefect::DanglingTaskId { dep, id } => {
                write!(f, "{dep} dependency references unknown task id {id}")
            }
            ScenarioDefect::SelfDependency { dep, id } => {
                write!(f, "{dep} dependency relates task {id} to itself")
            }
            ScenarioDefect::NoCapableUav { task } => {
                write!(f, "no UAV carries the sensor required by task {task}")
            }
            ScenarioDefect::NoCompatibleGcs { uav } => {
                write!(f, "no GCS admits the type of UAV {uav}")
            }
            ScenarioDefect::GcsCapacityShortfall { capacity, uavs } => {
                write!(f, "GCS capacity sum {capacity} is below the UAV count {uavs}")
            }
            ScenarioDefect::NfzCoversUavBase { uav } => {
                write!(f, "an NFZ covers the base of UAV {uav}")
            }
            ScenarioDefect::NfzCoversTaskZone { task } => {
                write!(f, "an NFZ covers the zone of task {task}")
            }
            ScenarioDefect::MalformedNfz { index } => {
                write!(f, "NFZ {index} is not a simple polygon with >= 3 vertices")
            }
            ScenarioDefect::BadField { entity, field } => {
                write!(f, "{entity}: field {field} violates its bound")
            }
        }
    }
}

/// Every structural defect found in a scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub defects: Vec<ScenarioDefect>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.defects.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.defects.is_empty() {
            return write!(f, "scenario ok");
        }
        for d in &self.defects {
            writeln!(f, "- {d}")?;
        }
        Ok(())
    }
}

/// Check a scenario for structural defects.
pub fn validate_scenario(s: &Scenario) -> ValidationReport {
    let mut defects = Vec::new();
    let t_count = s.tasks.len();

    for (i, t) in s.tasks.iter().enumerate() {
        if t.id != i + 1 {
            defects.push(ScenarioDefect::NonContiguousId { kind: "task", position: i + 1, found: t.id });
        }
        if t.base_duration <= 0.0 {
            defects.push(ScenarioDefect::BadField { entity: format!("task {}", t.id), field: "base_duration" });
        }
        if t.radius < 0.0 {
            defects.push(ScenarioDefect::BadField { entity: format!("task {}", t.id), field: "radius" });
        }
    }
    for (i, u) in s.uavs.iter().enumerate() {
        if u.id != i + 1 {
            defects.push(ScenarioDefect::NonContiguousId { kind: "uav", position: i + 1, found: u.id });
        }
        if u.initial_fuel <= 0.0 {
            defects.push(ScenarioDefect::BadField { entity: format!("uav {}", u.id), field: "initial_fuel" });
        }
        if u.sensors.is_empty() {
            defects.push(ScenarioDefect::BadField { entity: format!("uav {}", u.id), field: "sensors" });
        }
        if u.max_flight_time <= 0.0 {
            defects.push(ScenarioDefect::BadField { entity: format!("uav {}", u.id), field: "max_flight_time" });
        }
        if u.max_range <= 0.0 {
            defects.push(ScenarioDefect::BadField { entity: format!("uav {}", u.id), field: "max_range" });
        }
    }
    for (i, g) in s.gcss.iter().enumerate() {
        if g.id != i + 1 {
            defects.push(ScenarioDefect::NonContiguousId { kind: "gcs", position: i + 1, found: g.id });
        }
        if g.max_uavs < 1 || g.max_uavs > s.uavs.len().max(1) {
            defects.push(ScenarioDefect::BadField { entity: format!("gcs {}", g.id), field: "max_uavs" });
        }
        if g.allowed_types.is_empty() {
            defects.push(ScenarioDefect::BadField { entity: format!("gcs {}", g.id), field: "allowed_types" });
        }
        if g.coverage_radius <= 0.0 {
            defects.push(ScenarioDefect::BadField { entity: format!("gcs {}", g.id), field: "coverage_radius" });
        }
    }

    for d in &s.time_deps {
        for id in [d.first, d.second] {
            if id == 0 || id > t_count {
                defects.push(ScenarioDefect::DanglingTaskId { dep: "time", id });
            }
        }
        if d.first == d.second {
            defects.push(ScenarioDefect::SelfDependency { dep: "time", id: d.first });
        }
    }
    for d in &s.vehicle_deps {
        for id in [d.first, d.second] {
            if id == 0 || id > t_count {
                defects.push(ScenarioDefect::DanglingTaskId { dep: "vehicle", id });
            }
        }
        if d.first == d.second {
            defects.push(ScenarioDefect::SelfDependency { dep: "vehicle", id: d.first });
        }
    }

    for t in &s.tasks {
        if !s.uavs.iter().any(|u| u.carries(t.required_sensor)) {
            defects.push(ScenarioDefect::NoCapableUav { task: t.id });
        }
    }
    for u in &s.uavs {
        if !s.gcss.iter().any(|g| g.admits(u)) {
            defects.push(ScenarioDefect::NoCompatibleGcs { uav: u.id });
        }
    }
    let capacity: usize = s.gcss.iter().map(|g| g.max_uavs).sum();
    if capacity < s.uavs.len() {
        defects.push(ScenarioDefect::GcsCapacityShortfall { capacity, uavs: s.uavs.len() });
    }

    for (i, z) in s.nfzs.iter().enumerate() {
        if z.polygon.len() < 3 || !is_simple_polygon(z) {
            defects.push(ScenarioDefect::MalformedNfz { index: i });
        }
    }
    for u in &s.uavs {
        if s.inside_nfz(&u.initial_position) {
            defects.push(ScenarioDefect::NfzCoversUavBase { uav: u.id });
        }
    }
    for t in &s.tasks {
        if s.inside_nfz(&t.zone) {
            defects.push(ScenarioDefect::NfzCoversTaskZone { task: t.id });
        }
    }

    ValidationReport { defects }
}

/// Non-adjacent edge pairs must not intersect.
fn is_simple_polygon(z: &super::Nfz) -> bool {
    let n = z.polygon.len();
    let seg = |i: usize| {
        let a = &z.polygon[i];
        let b = &z.polygon[(i + 1) % n];
        ((a.lon, a.lat), (b.lon, b.lat))
    };
    for i in 0..n {
        for j in (i + 1)..n {
            // Skip adjacent edges (shared endpoint), including the wrap pair.
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a1, a2) = seg(i);
            let (b1, b2) = seg(j);
            if segments_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

fn segments_intersect(p1: (f64, f64), p2: (f64, f64), p3: (f64, f64), p4: (f64, f64)) -> bool {
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let d1 = cross(p3, p4, p1);
    let d2 = cross(p3, p4, p2);
    let d3 = cross(p1, p2, p3);
    let d4 = cross(p1, p2, p4);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: (f64, f64), b: (f64, f64), c: (f64, f64)| {
        cross(a, b, c) == 0.0
            && c.0 >= a.0.min(b.0)
            && c.0 <= a.0.max(b.0)
            && c.1 >= a.1.min(b.1)
            && c.1 <= a.1.max(b.1)
    };
    on(p1, p2, p3) || on(p1, p2, p4) || on(p3, p4, p1) || on(p3, p4, p2)
}

/// Used by the generator: GCS-to-base coverage sanity (not a defect class,
/// but the generator promises it).
pub(crate) fn base_covered(s: &Scenario, uav_id: usize) -> bool {
    let u = s.uav(uav_id);
    s.gcss.iter().any(|g| {
        g.admits(u) && geodesic_distance_nm(&g.position, &u.initial_position) <= g.coverage_radius
    })
}
