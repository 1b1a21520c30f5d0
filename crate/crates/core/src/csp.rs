//! Timeline propagation and constraint evaluation for decoded plans.
//!
//! Given a plan, [`Evaluator::propagate`] builds an earliest-start schedule:
//! every UAV flies its tasks in program order, multi-UAV crews synchronize on
//! the latest arrival, and Before/Meets dependencies push starts later (the
//! other Allen relations are checked afterwards, never enforced). The
//! propagated timeline is then scored either as a per-family violation count
//! or, when clean, as the seven-objective vector.
//!
//! Conventions the checks rely on:
//! - A leg whose route cannot be built (no NFZ-free path, or a climb that
//!   does not fit) counts as a path/return violation; scheduling continues
//!   on a straight-line or level fallback so times stay finite.
//! - The wait before a UAV's first departure is a ground hold: no fuel, not
//!   flight time. Later loiters and on-station task work burn fuel at the
//!   minimum-consumption rate.
//! - Coverage, clearance and separation are sampled on a shared clock grid;
//!   clearance is only measured between the end of the initial climb-out and
//!   the start of the final descent.

use serde::Serialize;

use crate::model::{
    geodesic_distance_nm, AllenRelation, CruiseChoice, GeoPoint, RiskThresholds, Scenario,
    VehicleRelation, FT_PER_M,
};
use crate::pathfind::{build_grid, route_metrics, theta_star, Grid, Route, RouteSegment};
use crate::plan::{decode, Chromosome, PlanView};

/// Equality slack for time comparisons, seconds.
const TIME_EPS: f64 = 1e-6;
/// Separation at or below this is a collision, NM.
const SEPARATION_FLOOR_NM: f64 = 1e-9;

/// Tunables for constraint evaluation.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Simulated-time step for coverage/clearance/separation sampling.
    pub sample_step_s: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { sample_step_s: 30.0 }
    }
}

/// One scheduled task visit by one UAV.
#[derive(Debug, Clone, Serialize)]
pub struct LegSchedule {
    pub task: usize,
    pub uav: usize,
    /// Position held while loitering before departure (previous stop).
    pub from: GeoPoint,
    pub departure: f64,
    pub start: f64,
    pub end: f64,
    pub dur_loiter: f64,
    pub dur_path: f64,
    pub dur_task: f64,
    pub dist_path: f64,
    pub fuel_path: f64,
    /// Route actually flown (fallback route when `path_violated`).
    pub route: Route,
    pub path_violated: bool,
    /// Slot of this UAV within the task crew, for on-station offsets.
    pub crew_slot: usize,
    pub crew_size: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReturnLeg {
    pub departure: f64,
    pub dur_return: f64,
    pub dist_return: f64,
    pub fuel_return: f64,
    pub route: Route,
    pub return_violated: bool,
}

/// Everything propagated for one UAV.
#[derive(Debug, Clone, Serialize)]
pub struct UavTimeline {
    pub uav: usize,
    pub legs: Vec<LegSchedule>,
    pub return_leg: Option<ReturnLeg>,
    pub first_departure: f64,
    /// Landing time; equals `first_departure` when the UAV is unused.
    pub return_time: f64,
    pub flight_time: f64,
    pub distance: f64,
    pub fuel_consumed: f64,
    pub fuel_remaining: f64,
    pub cost: f64,
    /// Sampled minimum ground clearance in feet within the measurement
    /// window; `None` when never sampled.
    pub min_clearance_ft: Option<f64>,
    pub out_of_coverage_s: f64,
    pub used: bool,
}

/// Propagated auxiliary variables for a whole plan.
#[derive(Debug, Clone, Serialize)]
pub struct Timeline {
    pub per_uav: Vec<UavTimeline>,
    /// Minimum sampled distance per UAV id pair (low, high), NM; `None` when
    /// the pair never flew at the same sampled instant.
    pub pair_min_separation: Vec<((usize, usize), Option<f64>)>,
    pub makespan: f64,
}

impl Timeline {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("timeline serializes")
    }

    pub fn uav(&self, id: usize) -> &UavTimeline {
        &self.per_uav[id - 1]
    }

    /// Scheduled (start, end) of a task, if any crew member flew it.
    pub fn task_interval(&self, task: usize) -> Option<(f64, f64)> {
        self.per_uav
            .iter()
            .flat_map(|u| u.legs.iter())
            .find(|l| l.task == task)
            .map(|l| (l.start, l.end))
    }
}

/// Per-family counts of independent constraint breaches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ViolationReport {
    pub sensor: u32,
    pub order: u32,
    pub allen: u32,
    pub vehicle_dep: u32,
    pub gcs_type: u32,
    pub gcs_capacity: u32,
    pub gcs_coverage: u32,
    pub path: u32,
    pub return_path: u32,
    pub overaltitude_overspeed: u32,
    pub ground_clearance: u32,
    pub uav_separation: u32,
    pub fuel: u32,
    pub flight_time: u32,
    pub range: u32,
}

impl ViolationReport {
    pub fn total(&self) -> u32 {
        self.sensor
            + self.order
            + self.allen
            + self.vehicle_dep
            + self.gcs_type
            + self.gcs_capacity
            + self.gcs_coverage
            + self.path
            + self.return_path
            + self.overaltitude_overspeed
            + self.ground_clearance
            + self.uav_separation
            + self.fuel
            + self.flight_time
            + self.range
    }
}

/// The seven minimized objectives of a feasible plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct ObjectiveVector {
    pub cost: f64,
    pub makespan: f64,
    /// Percentage in [0, 100].
    pub risk: f64,
    pub n_uavs: u32,
    pub fuel: f64,
    pub flight_time: f64,
    pub distance: f64,
}

pub const OBJECTIVE_NAMES: [&str; 7] =
    ["cost", "makespan", "risk", "n_uavs", "fuel", "flight_time", "distance"];

impl ObjectiveVector {
    pub fn as_array(&self) -> [f64; 7] {
        [
            self.cost,
            self.makespan,
            self.risk,
            self.n_uavs as f64,
            self.fuel,
            self.flight_time,
            self.distance,
        ]
    }
}

/// Shared, read-only evaluation context: the scenario, its NFZ grid and a
/// precomputed table of collision-free skeletons between every base and
/// task zone. Evaluating a chromosome is then pure arithmetic, safe to run
/// in parallel.
pub struct Evaluator<'a> {
    pub scenario: &'a Scenario,
    pub grid: Grid,
    opts: EvalOptions,
    /// Sites: `[0, U)` are UAV bases, `[U, U+T)` are task zones.
    sites: Vec<GeoPoint>,
    /// Skeleton per ordered site pair, `None` where Theta* found no path.
    skeletons: Vec<Option<Vec<GeoPoint>>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(scenario: &'a Scenario, grid_resolution_nm: f64, opts: EvalOptions) -> Self {
        let grid = build_grid(scenario, grid_resolution_nm);
        let u_count = scenario.uavs.len();
        let t_count = scenario.tasks.len();
        let mut sites = Vec::with_capacity(u_count + t_count);
        sites.extend(scenario.uavs.iter().map(|u| u.initial_position));
        sites.extend(scenario.tasks.iter().map(|t| t.zone));

        let n = sites.len();
        let mut skeletons = vec![None; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j || (i < u_count && j < u_count) {
                    continue; // base-to-base legs never occur
                }
                skeletons[i * n + j] = theta_star(&grid, &sites[i], &sites[j]).ok();
            }
        }
        Evaluator { scenario, grid, opts, sites, skeletons }
    }

    fn site_of_base(&self, uav: usize) -> usize {
        uav - 1
    }

    fn site_of_task(&self, task: usize) -> usize {
        self.scenario.uavs.len() + task - 1
    }

    fn skeleton(&self, from: usize, to: usize) -> Option<&Vec<GeoPoint>> {
        self.skeletons[from * self.sites.len() + to].as_ref()
    }

    /// Route a leg, falling back to a straight line (and then to level
    /// flight) when planning fails, so the schedule keeps finite times.
    /// Returns the route and whether the leg breaches path feasibility.
    fn leg_route(
        &self,
        from_site: usize,
        to_site: usize,
        cruise: CruiseChoice,
        uav_id: usize,
        start_alt: f64,
    ) -> (Route, bool) {
        let uav = self.scenario.uav(uav_id);
        let profile = *uav.profiles.cruise(cruise);
        let straight = [self.sites[from_site], self.sites[to_site]];
        let (skeleton, mut violated): (&[GeoPoint], bool) = match self.skeleton(from_site, to_site)
        {
            Some(s) => (s.as_slice(), false),
            None => (&straight, true),
        };
        match route_metrics(skeleton, &profile, uav, start_alt) {
            Ok(r) => (r, violated),
            Err(_) => {
                violated = true;
                (level_route(skeleton, &profile, start_alt), violated)
            }
        }
    }

    /// Build the earliest-start timeline for a decoded plan.
    pub fn propagate(&self, plan: &PlanView) -> Timeline {
        let s = self.scenario;
        let u_count = s.uavs.len();
        let mut per_uav: Vec<UavTimeline> = (1..=u_count)
            .map(|id| UavTimeline {
                uav: id,
                legs: Vec::new(),
                return_leg: None,
                first_departure: 0.0,
                return_time: 0.0,
                flight_time: 0.0,
                distance: 0.0,
                fuel_consumed: 0.0,
                fuel_remaining: s.uav(id).initial_fuel,
                cost: 0.0,
                min_clearance_ft: None,
                out_of_coverage_s: 0.0,
                used: false,
            })
            .collect();

        // Walking state per UAV: current site, altitude there, and the end
        // time of its previous activity.
        let mut cur_site: Vec<usize> = (1..=u_count).map(|id| self.site_of_base(id)).collect();
        let mut cur_alt: Vec<f64> = s.uavs.iter().map(|u| u.initial_position.alt).collect();
        let mut prev_end: Vec<f64> = vec![0.0; u_count];
        let mut task_times: Vec<Option<(f64, f64)>> = vec![None; s.tasks.len()];
        // Next program index per UAV, to pull the matching profile/sensor.
        let mut next_leg: Vec<usize> = vec![0; u_count];

        for &task_id in &plan.order {
            let task = s.task(task_id);
            // Crew in ascending UAV order, with each member's profile.
            let mut crew: Vec<(usize, CruiseChoice)> = Vec::new();
            for (ui, up) in plan.per_uav.iter().enumerate() {
                if let Some(pt) = up.tasks.get(next_leg[ui]) {
                    if pt.task == task_id {
                        crew.push((ui + 1, pt.profile));
                    }
                }
            }
            if crew.is_empty() {
                continue;
            }
            let n = crew.len();
            let dur_task = task.base_duration / n as f64;

            // Earliest start permitted by already-scheduled Before/Meets
            // predecessors.
            let mut lower_bound: f64 = 0.0;
            for d in &s.time_deps {
                if d.second == task_id
                    && matches!(d.relation, AllenRelation::Before | AllenRelation::Meets)
                {
                    if let Some((_, end)) = task_times[d.first - 1] {
                        lower_bound = lower_bound.max(end);
                    }
                }
            }

            // Routes and earliest arrivals for the whole crew.
            let mut legs: Vec<(usize, Route, bool, f64)> = Vec::with_capacity(n);
            let mut start = lower_bound;
            for &(uav_id, profile) in &crew {
                let ui = uav_id - 1;
                let (route, violated) = self.leg_route(
                    cur_site[ui],
                    self.site_of_task(task_id),
                    profile,
                    uav_id,
                    cur_alt[ui],
                );
                let arrival = prev_end[ui] + route.duration_s();
                start = start.max(arrival);
                legs.push((uav_id, route, violated, arrival));
            }

            for (slot, (uav_id, route, violated, _)) in legs.into_iter().enumerate() {
                let ui = uav_id - 1;
                let dur_path = route.duration_s();
                let departure = start - dur_path;
                let dur_loiter = departure - prev_end[ui];
                let tl = &mut per_uav[ui];
                tl.legs.push(LegSchedule {
                    task: task_id,
                    uav: uav_id,
                    from: self.sites[cur_site[ui]],
                    departure,
                    start,
                    end: start + dur_task,
                    dur_loiter,
                    dur_path,
                    dur_task,
                    dist_path: route.length_nm,
                    fuel_path: route.fuel_kg(),
                    route,
                    path_violated: violated,
                    crew_slot: slot,
                    crew_size: n,
                });
                prev_end[ui] = start + dur_task;
                cur_site[ui] = self.site_of_task(task_id);
                cur_alt[ui] = task.zone.alt;
                next_leg[ui] += 1;
            }
            task_times[task_id - 1] = Some((start, start + dur_task));
        }

        // Return legs and per-UAV totals.
        for ui in 0..u_count {
            let uav_id = ui + 1;
            let uav = s.uav(uav_id);
            let min_rate = uav.profiles.min_consumption.fuel_rate;
            let tl = &mut per_uav[ui];
            if tl.legs.is_empty() {
                continue;
            }
            tl.used = true;
            let (route, violated) = self.leg_route(
                cur_site[ui],
                self.site_of_base(uav_id),
                plan.per_uav[ui].return_profile,
                uav_id,
                cur_alt[ui],
            );
            let dur_return = route.duration_s();
            tl.return_leg = Some(ReturnLeg {
                departure: prev_end[ui],
                dur_return,
                dist_return: route.length_nm,
                fuel_return: route.fuel_kg(),
                route,
                return_violated: violated,
            });
            tl.first_departure = tl.legs[0].departure;
            tl.return_time = prev_end[ui] + dur_return;
            tl.flight_time = tl.return_time - tl.first_departure;
            tl.distance = tl.legs.iter().map(|l| l.dist_path).sum::<f64>()
                + tl.return_leg.as_ref().unwrap().dist_return;
            let airborne_loiter: f64 = tl.legs.iter().skip(1).map(|l| l.dur_loiter).sum();
            let on_station: f64 = tl.legs.iter().map(|l| l.dur_task).sum();
            tl.fuel_consumed = tl.legs.iter().map(|l| l.fuel_path).sum::<f64>()
                + tl.return_leg.as_ref().unwrap().fuel_return
                + (airborne_loiter + on_station) * min_rate / 3600.0;
            tl.fuel_remaining = uav.initial_fuel - tl.fuel_consumed;
            tl.cost = uav.cost_per_hour * tl.flight_time / 3600.0;
        }

        let makespan = per_uav.iter().filter(|u| u.used).map(|u| u.return_time).fold(0.0, f64::max);
        let mut timeline = Timeline { per_uav, pair_min_separation: Vec::new(), makespan };
        self.sample_trajectories(&mut timeline, plan);
        timeline
    }

    /// Shared-clock sweep filling coverage, clearance and separation data.
    fn sample_trajectories(&self, tl: &mut Timeline, plan: &PlanView) {
        let s = self.scenario;
        let step = self.opts.sample_step_s.max(1.0);
        let used: Vec<usize> =
            tl.per_uav.iter().filter(|u| u.used).map(|u| u.uav).collect();
        for i in 0..used.len() {
            for j in (i + 1)..used.len() {
                tl.pair_min_separation.push(((used[i], used[j]), None));
            }
        }
        if used.is_empty() {
            return;
        }

        // Clearance window per used UAV: after the initial climb-out, before
        // the final descent.
        let mut window: Vec<(f64, f64)> = Vec::new();
        for &uid in &used {
            let u = tl.uav(uid);
            let lo = u.first_departure + u.legs[0].route.initial_transition_s();
            let ret = u.return_leg.as_ref().unwrap();
            let hi = u.return_time - ret.route.final_transition_s();
            window.push((lo, hi));
        }

        let steps = (tl.makespan / step).ceil() as usize;
        let mut positions: Vec<Option<GeoPoint>> = vec![None; used.len()];
        for k in 0..=steps {
            let t = (k as f64 * step).min(tl.makespan);
            for (idx, &uid) in used.iter().enumerate() {
                positions[idx] = position_at(self.scenario, tl.uav(uid), t);
            }
            for (idx, &uid) in used.iter().enumerate() {
                let Some(pos) = positions[idx] else { continue };
                // Coverage against the controlling station.
                let gcs = s.gcs(plan.per_uav[uid - 1].gcs);
                if geodesic_distance_nm(&pos, &gcs.position) > gcs.coverage_radius {
                    tl.per_uav[uid - 1].out_of_coverage_s += step;
                }
                // Ground clearance inside the cruise window.
                let (lo, hi) = window[idx];
                if t >= lo && t <= hi {
                    let clearance = pos.alt - s.terrain.elevation_m(&pos) * FT_PER_M;
                    let entry = &mut tl.per_uav[uid - 1].min_clearance_ft;
                    *entry = Some(entry.map_or(clearance, |c| c.min(clearance)));
                }
            }
            let mut pair = 0;
            for i in 0..used.len() {
                for j in (i + 1)..used.len() {
                    if let (Some(a), Some(b)) = (positions[i], positions[j]) {
                        let d = geodesic_distance_nm(&a, &b);
                        let slot = &mut tl.pair_min_separation[pair].1;
                        *slot = Some(slot.map_or(d, |m| m.min(d)));
                    }
                    pair += 1;
                }
            }
        }
    }

    /// Count every constraint breach of a propagated plan.
    pub fn check_constraints(
        &self,
        tl: &Timeline,
        plan: &PlanView,
        c: &Chromosome,
    ) -> ViolationReport {
        let s = self.scenario;
        let mut report = ViolationReport::default();

        // Sensor: each crew slot must be capable and operate the required kind.
        for (ti, crew) in c.task_assign.iter().enumerate() {
            let required = s.tasks[ti].required_sensor;
            for (slot, &uav) in crew.iter().enumerate() {
                let ok = s.uav(uav).carries(required) && c.sensor_assign[ti][slot] == required;
                if !ok {
                    report.sensor += 1;
                }
            }
        }

        // Allen relations on propagated intervals.
        for d in &s.time_deps {
            let (Some((sa, ea)), Some((sb, eb))) =
                (interval(tl, d.first), interval(tl, d.second))
            else {
                continue;
            };
            let holds = match d.relation {
                AllenRelation::Before => ea <= sb + TIME_EPS,
                AllenRelation::Meets => (ea - sb).abs() <= TIME_EPS,
                AllenRelation::Overlaps => sa < sb && sb < ea && ea < eb,
                AllenRelation::Starts => (sa - sb).abs() <= TIME_EPS && ea < eb,
                AllenRelation::During => sb < sa && ea < eb,
                AllenRelation::Finishes => (ea - eb).abs() <= TIME_EPS && sa > sb,
                AllenRelation::Equals => (sa - sb).abs() <= TIME_EPS && (ea - eb).abs() <= TIME_EPS,
            };
            if !holds {
                report.allen += 1;
            }
        }

        // Vehicle dependencies on crew sets.
        for d in &s.vehicle_deps {
            let a = &c.task_assign[d.first - 1];
            let b = &c.task_assign[d.second - 1];
            let holds = match d.mode {
                VehicleRelation::SameUav => a == b,
                VehicleRelation::DifferentUav => a.iter().all(|u| !b.contains(u)),
            };
            if !holds {
                report.vehicle_dep += 1;
            }
        }

        // GCS type and capacity.
        for (ui, &g) in c.gcs_assign.iter().enumerate() {
            if !s.gcs(g).admits(s.uav(ui + 1)) {
                report.gcs_type += 1;
            }
        }
        for g in &s.gcss {
            let load = c.gcs_assign.iter().filter(|&&x| x == g.id).count();
            report.gcs_capacity += load.saturating_sub(g.max_uavs) as u32;
        }

        // Path / return feasibility and the sampled families.
        for u in &tl.per_uav {
            report.path += u.legs.iter().filter(|l| l.path_violated).count() as u32;
            if let Some(r) = &u.return_leg {
                if r.return_violated {
                    report.return_path += 1;
                }
            }
            if !u.used {
                continue;
            }
            if u.out_of_coverage_s > 0.0 {
                report.gcs_coverage += 1;
            }
            if u.min_clearance_ft.is_some_and(|c| c <= 0.0) {
                report.ground_clearance += 1;
            }
            let uav = s.uav(u.uav);
            if u.fuel_remaining <= 0.0 {
                report.fuel += 1;
            }
            if u.flight_time > uav.max_flight_time {
                report.flight_time += 1;
            }
            if u.distance > uav.max_range {
                report.range += 1;
            }
        }
        for &(_, sep) in &tl.pair_min_separation {
            if sep.is_some_and(|d| d <= SEPARATION_FLOOR_NM) {
                report.uav_separation += 1;
            }
        }

        // Order uniqueness is structural in the permutation encoding, and
        // routes fly the UAV's own profiles, so over-altitude/over-speed
        // cannot occur; both families stay zero.
        let _ = plan;
        report
    }

    /// The seven-objective vector of a (feasible) propagated plan.
    pub fn objectives(&self, tl: &Timeline) -> ObjectiveVector {
        let used: Vec<&UavTimeline> = tl.per_uav.iter().filter(|u| u.used).collect();
        ObjectiveVector {
            cost: used.iter().map(|u| u.cost).sum(),
            makespan: tl.makespan,
            risk: risk(tl, &self.scenario.thresholds),
            n_uavs: used.len() as u32,
            fuel: used.iter().map(|u| u.fuel_consumed).sum(),
            flight_time: used.iter().map(|u| u.flight_time).sum(),
            distance: used.iter().map(|u| u.distance).sum(),
        }
    }

    /// Decode, propagate and score one chromosome.
    pub fn fitness(&self, c: &Chromosome) -> crate::moea::Evaluation {
        let plan = decode(c, self.scenario);
        let tl = self.propagate(&plan);
        let report = self.check_constraints(&tl, &plan, c);
        let total = report.total();
        if total == 0 {
            crate::moea::Evaluation::Valid(self.objectives(&tl))
        } else {
            crate::moea::Evaluation::Invalid(total)
        }
    }

    /// Full diagnostic evaluation.
    pub fn evaluate(&self, c: &Chromosome) -> (Timeline, ViolationReport) {
        let plan = decode(c, self.scenario);
        let tl = self.propagate(&plan);
        let report = self.check_constraints(&tl, &plan, c);
        (tl, report)
    }
}

fn interval(tl: &Timeline, task: usize) -> Option<(f64, f64)> {
    tl.task_interval(task)
}

/// Mean of the four risk factor percentages.
///
/// (a) share of used UAVs landing with less than the fuel threshold,
/// (b) share of used UAVs dipping under the clearance threshold,
/// (c) mean out-of-coverage time fraction,
/// (d) share of used pairs closing under the separation threshold.
pub fn risk(tl: &Timeline, th: &RiskThresholds) -> f64 {
    let used: Vec<&UavTimeline> = tl.per_uav.iter().filter(|u| u.used).collect();
    if used.is_empty() {
        return 0.0;
    }
    let n = used.len() as f64;
    let low_fuel = used.iter().filter(|u| u.fuel_remaining < th.fuel_th).count() as f64 / n * 100.0;
    let low_ground = used
        .iter()
        .filter(|u| u.min_clearance_ft.is_some_and(|c| c < th.ground_clearance))
        .count() as f64
        / n
        * 100.0;
    let coverage = used
        .iter()
        .map(|u| (u.out_of_coverage_s / u.flight_time.max(1e-9)).min(1.0) * 100.0)
        .sum::<f64>()
        / n;
    let pairs: Vec<_> = tl.pair_min_separation.iter().filter(|(_, d)| d.is_some()).collect();
    let near_miss = if pairs.is_empty() {
        0.0
    } else {
        pairs.iter().filter(|(_, d)| d.unwrap() < th.separation).count() as f64
            / pairs.len() as f64
            * 100.0
    };
    (low_fuel + low_ground + coverage + near_miss) / 4.0
}

/// Position of a UAV at mission time `t`, or `None` while it is on the
/// ground (before first departure / after landing / never used).
pub fn position_at(s: &Scenario, u: &UavTimeline, t: f64) -> Option<GeoPoint> {
    if !u.used || t < u.first_departure || t > u.return_time {
        return None;
    }
    for leg in &u.legs {
        if t < leg.departure {
            // Airborne loiter at the previous stop.
            return Some(leg.from);
        }
        if t < leg.start {
            return Some(leg.route.position_at(t - leg.departure));
        }
        if t < leg.end {
            let task = s.task(leg.task);
            return Some(station_position(task.zone, task.radius, leg.crew_slot, leg.crew_size));
        }
    }
    let ret = u.return_leg.as_ref()?;
    Some(ret.route.position_at(t - ret.departure))
}

/// On-station hold point: crews fan out around the zone center so
/// cooperating UAVs keep horizontal separation.
fn station_position(zone: GeoPoint, radius_nm: f64, slot: usize, crew: usize) -> GeoPoint {
    if crew <= 1 {
        return zone;
    }
    let r = (radius_nm * 0.7).max(0.15);
    let angle = std::f64::consts::TAU * slot as f64 / crew as f64;
    let mut p = GeoPoint::new(
        zone.lat + r * angle.sin() / 60.0,
        zone.lon + r * angle.cos() / (60.0 * zone.lat.to_radians().cos()),
        zone.alt,
    );
    p.alt = zone.alt;
    p
}

/// Constant-altitude fallback route used when a leg's climb cannot fit:
/// fly the skeleton level at the current altitude under the cruise profile.
fn level_route(
    skeleton: &[GeoPoint],
    profile: &crate::model::FlightProfile,
    alt: f64,
) -> Route {
    let length_nm = crate::pathfind::polyline_length_nm(skeleton);
    let duration_s = length_nm / profile.speed * 3600.0;
    let segments = if length_nm > 0.0 {
        vec![RouteSegment {
            kind: profile.kind,
            length_nm,
            duration_s,
            fuel_kg: profile.fuel_rate * duration_s / 3600.0,
            alt_start: alt,
            alt_end: alt,
        }]
    } else {
        Vec::new()
    };
    Route { waypoints: skeleton.to_vec(), length_nm, segments }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        generate_scenario, DatasetSpec, SensorKind, TimeDependency,
    };
    use crate::plan::Chromosome;

    fn evaluator(s: &Scenario) -> Evaluator<'_> {
        Evaluator::new(s, 1.0, EvalOptions::default())
    }

    /// A world with controlled geometry: tasks on a north-south line,
    /// 25 NM apart, bases well separated, generous endurance.
    fn line_scenario(tasks: usize, uavs: usize) -> Scenario {
        let mut s = generate_scenario(
            &DatasetSpec { tasks, multi_uav_tasks: 0, uavs, gcss: 1, nfzs: 0, time_deps: 0 },
            21,
        )
        .unwrap();
        for (i, t) in s.tasks.iter_mut().enumerate() {
            t.zone = GeoPoint::new(39.3 + 25.0 * (i + 1) as f64 / 60.0, -3.0, 2000.0);
            t.radius = 1.0;
            t.base_duration = 600.0;
            t.required_sensor = SensorKind::EoIr;
        }
        for (i, u) in s.uavs.iter_mut().enumerate() {
            u.initial_position = GeoPoint::new(39.2, -3.3 + 0.15 * i as f64, 0.0);
            u.sensors = vec![SensorKind::EoIr];
            u.initial_fuel = 500.0;
            u.max_flight_time = 50_000.0;
            u.max_range = 2000.0;
        }
        s.gcss[0].position = GeoPoint::new(39.6, -3.1, 0.0);
        s.gcss[0].coverage_radius = 300.0;
        s.gcss[0].max_uavs = uavs;
        s
    }

    fn single_assignment(s: &Scenario, to: &[usize]) -> Chromosome {
        Chromosome {
            task_assign: to.iter().map(|&u| vec![u]).collect(),
            path_fp: to.iter().map(|_| vec![CruiseChoice::Max]).collect(),
            sensor_assign: s.tasks.iter().map(|t| vec![t.required_sensor]).collect(),
            order_perm: (1..=s.tasks.len()).collect(),
            gcs_assign: vec![1; s.uavs.len()],
            return_fp: vec![CruiseChoice::Max; s.uavs.len()],
        }
    }

    #[test]
    fn temporal_chain_identities_hold() {
        let s = line_scenario(1, 1);
        let ev = evaluator(&s);
        let c = single_assignment(&s, &[1]);
        let (tl, report) = ev.evaluate(&c);
        assert_eq!(report.total(), 0, "{report:?}");
        let u = tl.uav(1);
        let leg = &u.legs[0];
        assert!((leg.start - (leg.departure + leg.dur_path)).abs() < 1e-9);
        assert!((leg.end - (leg.start + leg.dur_task)).abs() < 1e-9);
        assert!((leg.dur_loiter - (leg.departure - 0.0)).abs() < 1e-9);
        let ret = u.return_leg.as_ref().unwrap();
        assert!((u.return_time - (leg.end + ret.dur_return)).abs() < 1e-9);
        assert_eq!(leg.departure, 0.0);
        assert_eq!(leg.dur_task, 600.0);
    }

    #[test]
    fn meets_dependency_synchronizes_and_loiters() {
        let mut s = line_scenario(2, 2);
        s.time_deps.push(TimeDependency {
            first: 1,
            second: 2,
            relation: AllenRelation::Meets,
        });
        let ev = evaluator(&s);
        let c = single_assignment(&s, &[1, 2]);
        let (tl, report) = ev.evaluate(&c);
        assert_eq!(report.total(), 0, "{report:?}");
        let (s1, e1) = tl.task_interval(1).unwrap();
        let (s2, _) = tl.task_interval(2).unwrap();
        assert!((s2 - e1).abs() < 1e-9, "meets should hold exactly");
        assert!(s1 >= 0.0);
        // UAV 2 arrives before task 1 ends, so it loiters the difference.
        let leg2 = &tl.uav(2).legs[0];
        let own_arrival = 0.0 + leg2.dur_path;
        assert!((leg2.dur_loiter - (e1 - own_arrival)).abs() < 1e-6);
    }

    #[test]
    fn multi_uav_crew_synchronizes_and_splits_duration() {
        let mut s = line_scenario(1, 2);
        s.tasks[0].multi_uav = true;
        s.tasks[0].base_duration = 600.0;
        let ev = evaluator(&s);
        let c = Chromosome {
            task_assign: vec![vec![1, 2]],
            path_fp: vec![vec![CruiseChoice::Max, CruiseChoice::Max]],
            sensor_assign: vec![vec![SensorKind::EoIr, SensorKind::EoIr]],
            order_perm: vec![1],
            gcs_assign: vec![1, 1],
            return_fp: vec![CruiseChoice::Max, CruiseChoice::Max],
        };
        let (tl, report) = ev.evaluate(&c);
        assert_eq!(report.total(), 0, "{report:?}");
        let l1 = &tl.uav(1).legs[0];
        let l2 = &tl.uav(2).legs[0];
        assert_eq!(l1.start, l2.start);
        assert_eq!(l1.end, l2.end);
        assert!((l1.dur_task - 300.0).abs() < 1e-9);
        // Crew members hold offset stations, never exactly colocated.
        let sep = tl.pair_min_separation[0].1.unwrap();
        assert!(sep > 1e-6, "separation {sep}");
        // On station they fan out by the zone radius.
        let mid = (l1.start + l1.end) / 2.0;
        let a = position_at(&s, tl.uav(1), mid).unwrap();
        let b = position_at(&s, tl.uav(2), mid).unwrap();
        assert!(geodesic_distance_nm(&a, &b) > 0.5);
    }

    #[test]
    fn sensor_breach_counts_per_slot() {
        let mut s = line_scenario(2, 2);
        s.uavs[1].sensors = vec![SensorKind::MprRadar];
        let ev = evaluator(&s);
        let c = single_assignment(&s, &[1, 2]);
        let (_, report) = ev.evaluate(&c);
        assert_eq!(report.sensor, 1);
        assert_eq!(report.total(), 1);
    }

    #[test]
    fn capacity_counts_one_per_excess_uav() {
        let mut s = line_scenario(3, 3);
        s.gcss[0].max_uavs = 1;
        let ev = evaluator(&s);
        let c = single_assignment(&s, &[1, 2, 3]);
        let (_, report) = ev.evaluate(&c);
        assert_eq!(report.gcs_capacity, 2);
    }

    #[test]
    fn objectives_cost_and_makespan() {
        let s = line_scenario(2, 2);
        let ev = evaluator(&s);
        let c = single_assignment(&s, &[1, 2]);
        let (tl, report) = ev.evaluate(&c);
        assert_eq!(report.total(), 0);
        let obj = ev.objectives(&tl);
        let expect_cost: f64 = tl
            .per_uav
            .iter()
            .filter(|u| u.used)
            .map(|u| s.uav(u.uav).cost_per_hour * u.flight_time / 3600.0)
            .sum();
        assert!((obj.cost - expect_cost).abs() < 1e-9);
        let expect_makespan =
            tl.per_uav.iter().filter(|u| u.used).map(|u| u.return_time).fold(0.0, f64::max);
        assert_eq!(obj.makespan, expect_makespan);
        assert_eq!(obj.n_uavs, 2);
    }

    #[test]
    fn unused_uav_contributes_nothing() {
        let s = line_scenario(1, 2);
        let ev = evaluator(&s);
        let c = single_assignment(&s, &[1]);
        let (tl, report) = ev.evaluate(&c);
        assert_eq!(report.total(), 0);
        let obj = ev.objectives(&tl);
        assert_eq!(obj.n_uavs, 1);
        assert!(!tl.uav(2).used);
        assert_eq!(tl.uav(2).cost, 0.0);
        assert_eq!(tl.uav(2).fuel_consumed, 0.0);
    }

    #[test]
    fn risk_factor_arithmetic() {
        let s = line_scenario(2, 2);
        let ev = evaluator(&s);
        let c = single_assignment(&s, &[1, 2]);
        let (mut tl, report) = ev.evaluate(&c);
        assert_eq!(report.total(), 0);
        let th = s.thresholds;
        assert_eq!(risk(&tl, &th), 0.0);

        // One of two UAVs low on fuel: (50 + 0 + 0 + 0) / 4 = 12.5.
        tl.per_uav[0].fuel_remaining = th.fuel_th - 1.0;
        assert!((risk(&tl, &th) - 12.5).abs() < 1e-9);

        // Every factor maximally breached reaches 100.
        for u in &mut tl.per_uav {
            u.fuel_remaining = th.fuel_th - 1.0;
            u.min_clearance_ft = Some(th.ground_clearance - 1.0);
            u.out_of_coverage_s = u.flight_time;
        }
        for p in &mut tl.pair_min_separation {
            p.1 = Some(th.separation / 2.0);
        }
        assert!((risk(&tl, &th) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn path_failure_counts_not_panics() {
        // Surround the first task zone with an NFZ ring (donut): no path in.
        let mut s = line_scenario(2, 1);
        let z = s.tasks[0].zone;
        let ring: Vec<GeoPoint> = (0..12)
            .map(|i| {
                let ang = std::f64::consts::TAU * i as f64 / 12.0;
                GeoPoint::flat(z.lat + 4.0 * ang.sin() / 60.0, z.lon + 4.0 * ang.cos() / 60.0)
            })
            .collect();
        s.nfzs.push(crate::model::Nfz { polygon: ring });
        let ev = evaluator(&s);
        let c = single_assignment(&s, &[1, 1]);
        let (_, report) = ev.evaluate(&c);
        assert!(report.path >= 1, "{report:?}");
        assert!(report.total() >= 1);
    }

    #[test]
    fn objectives_monotone_when_leg_lengthens() {
        let near = line_scenario(1, 1);
        let mut far = near.clone();
        far.tasks[0].zone.lat += 20.0 / 60.0;
        let c = single_assignment(&near, &[1]);

        let ev_near = evaluator(&near);
        let (tl_near, r1) = ev_near.evaluate(&c);
        let ev_far = evaluator(&far);
        let (tl_far, r2) = ev_far.evaluate(&c);
        assert_eq!(r1.total(), 0);
        assert_eq!(r2.total(), 0);
        let a = ev_near.objectives(&tl_near);
        let b = ev_far.objectives(&tl_far);
        assert!(b.cost >= a.cost);
        assert!(b.fuel >= a.fuel);
        assert!(b.flight_time >= a.flight_time);
        assert!(b.distance >= a.distance);
    }

    #[test]
    fn coverage_breach_detected_when_station_shrinks() {
        let mut s = line_scenario(2, 1);
        s.gcss[0].coverage_radius = 10.0;
        let ev = evaluator(&s);
        let c = single_assignment(&s, &[1, 1]);
        let (tl, report) = ev.evaluate(&c);
        assert!(tl.uav(1).out_of_coverage_s > 0.0);
        assert_eq!(report.gcs_coverage, 1);
    }

    #[test]
    fn timeline_serializes_for_diagnostics() {
        let s = line_scenario(1, 1);
        let ev = evaluator(&s);
        let c = single_assignment(&s, &[1]);
        let (tl, _) = ev.evaluate(&c);
        let json = tl.to_json();
        assert!(json.contains("per_uav"));
    }
}
