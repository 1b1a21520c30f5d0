//! Grid-based any-angle path planning around no-fly zones and per-leg route
//! metrics under a chosen flight profile.
//!
//! Planning is planar: NFZ avoidance happens in the lat/lon plane on a cell
//! grid, and the altitude profile (climb, cruise, descent) is attached to
//! the resulting polyline afterwards.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::model::{
    geodesic_distance_nm, FlightProfile, GeoPoint, ProfileKind, Scenario, Uav, FT_PER_NM,
};

#[derive(Debug, Error, PartialEq)]
pub enum PathError {
    #[error("no collision-free path between the endpoints")]
    NoPath,
    #[error("endpoint outside the planning grid")]
    OutOfBounds,
}

#[derive(Debug, Error, PartialEq)]
pub enum RouteError {
    #[error("altitude change of {required_nm:.2} NM footprint does not fit a {leg_nm:.2} NM leg")]
    InfeasibleClimb { required_nm: f64, leg_nm: f64 },
}

/// Occupancy grid over the scenario's bounding box. A cell is blocked when
/// its center lies inside any NFZ polygon.
#[derive(Debug, Clone)]
pub struct Grid {
    pub min_lat: f64,
    pub min_lon: f64,
    pub lat_step: f64,
    pub lon_step: f64,
    pub rows: usize,
    pub cols: usize,
    pub resolution_nm: f64,
    blocked: Vec<bool>,
}

impl Grid {
    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    pub fn is_blocked(&self, r: usize, c: usize) -> bool {
        self.blocked[self.idx(r, c)]
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|b| **b).count()
    }

    pub fn cell_center(&self, r: usize, c: usize) -> GeoPoint {
        GeoPoint::flat(
            self.min_lat + (r as f64 + 0.5) * self.lat_step,
            self.min_lon + (c as f64 + 0.5) * self.lon_step,
        )
    }

    pub fn cell_of(&self, p: &GeoPoint) -> Option<(usize, usize)> {
        let r = (p.lat - self.min_lat) / self.lat_step;
        let c = (p.lon - self.min_lon) / self.lon_step;
        if r < 0.0 || c < 0.0 {
            return None;
        }
        let (r, c) = (r as usize, c as usize);
        if r >= self.rows || c >= self.cols {
            return None;
        }
        Some((r, c))
    }

    /// Supercover line-of-sight between two arbitrary points: every cell the
    /// segment passes through must be unblocked. Corner crossings check both
    /// adjacent cells, so the test never cuts corners through an NFZ.
    pub fn line_of_sight(&self, a: &GeoPoint, b: &GeoPoint) -> bool {
        // Grid-space coordinates (units of cells).
        let x0 = (a.lon - self.min_lon) / self.lon_step;
        let y0 = (a.lat - self.min_lat) / self.lat_step;
        let x1 = (b.lon - self.min_lon) / self.lon_step;
        let y1 = (b.lat - self.min_lat) / self.lat_step;

        let mut cx = (x0.floor() as isize).clamp(0, self.cols as isize - 1);
        let mut cy = (y0.floor() as isize).clamp(0, self.rows as isize - 1);
        let tx = (x1.floor() as isize).clamp(0, self.cols as isize - 1);
        let ty = (y1.floor() as isize).clamp(0, self.rows as isize - 1);

        let dx = x1 - x0;
        let dy = y1 - y0;
        let step_x: isize = if dx > 0.0 { 1 } else { -1 };
        let step_y: isize = if dy > 0.0 { 1 } else { -1 };

        let mut t_max_x = if dx != 0.0 {
            let next = if dx > 0.0 { cx as f64 + 1.0 } else { cx as f64 };
            (next - x0) / dx
        } else {
            f64::INFINITY
        };
        let mut t_max_y = if dy != 0.0 {
            let next = if dy > 0.0 { cy as f64 + 1.0 } else { cy as f64 };
            (next - y0) / dy
        } else {
            f64::INFINITY
        };
        let t_delta_x = if dx != 0.0 { (1.0 / dx).abs() } else { f64::INFINITY };
        let t_delta_y = if dy != 0.0 { (1.0 / dy).abs() } else { f64::INFINITY };

        let in_bounds = |x: isize, y: isize| {
            x >= 0 && y >= 0 && (x as usize) < self.cols && (y as usize) < self.rows
        };
        let blocked_at = |x: isize, y: isize| {
            in_bounds(x, y) && self.blocked[(y as usize) * self.cols + x as usize]
        };

        if blocked_at(cx, cy) {
            return false;
        }
        let mut guard = 4 * (self.rows + self.cols) + 8;
        while (cx, cy) != (tx, ty) {
            guard -= 1;
            if guard == 0 {
                return false;
            }
            if (t_max_x - t_max_y).abs() < 1e-12 {
                // Exact corner crossing: be conservative and require both
                // adjacent cells free as well.
                if blocked_at(cx + step_x, cy) || blocked_at(cx, cy + step_y) {
                    return false;
                }
                cx += step_x;
                cy += step_y;
                t_max_x += t_delta_x;
                t_max_y += t_delta_y;
            } else if t_max_x < t_max_y {
                cx += step_x;
                t_max_x += t_delta_x;
            } else {
                cy += step_y;
                t_max_y += t_delta_y;
            }
            if blocked_at(cx, cy) {
                return false;
            }
        }
        true
    }
}

/// Rasterize the scenario's NFZs onto a grid of the given resolution. The
/// grid covers all bases, task zones and NFZ vertices plus a margin.
pub fn build_grid(s: &Scenario, resolution_nm: f64) -> Grid {
    assert!(resolution_nm > 0.0, "grid resolution must be positive");
    let mut min_lat = f64::INFINITY;
    let mut max_lat = f64::NEG_INFINITY;
    let mut min_lon = f64::INFINITY;
    let mut max_lon = f64::NEG_INFINITY;
    let mut expand = |p: &GeoPoint| {
        min_lat = min_lat.min(p.lat);
        max_lat = max_lat.max(p.lat);
        min_lon = min_lon.min(p.lon);
        max_lon = max_lon.max(p.lon);
    };
    for t in &s.tasks {
        expand(&t.zone);
    }
    for u in &s.uavs {
        expand(&u.initial_position);
    }
    for g in &s.gcss {
        expand(&g.position);
    }
    for z in &s.nfzs {
        for v in &z.polygon {
            expand(v);
        }
    }
    if !min_lat.is_finite() {
        min_lat = 0.0;
        max_lat = 0.0;
        min_lon = 0.0;
        max_lon = 0.0;
    }

    let margin_nm = 5.0 + resolution_nm;
    let mid_lat = 0.5 * (min_lat + max_lat);
    let lat_step = resolution_nm / 60.0;
    let lon_step = resolution_nm / (60.0 * mid_lat.to_radians().cos().max(0.05));
    let min_lat = min_lat - margin_nm / 60.0;
    let max_lat = max_lat + margin_nm / 60.0;
    let lon_margin = margin_nm * lon_step / resolution_nm;
    let min_lon = min_lon - lon_margin;
    let max_lon = max_lon + lon_margin;

    let rows = (((max_lat - min_lat) / lat_step).ceil() as usize).max(1);
    let cols = (((max_lon - min_lon) / lon_step).ceil() as usize).max(1);
    let mut blocked = vec![false; rows * cols];
    if !s.nfzs.is_empty() {
        for r in 0..rows {
            for c in 0..cols {
                let center = GeoPoint::flat(
                    min_lat + (r as f64 + 0.5) * lat_step,
                    min_lon + (c as f64 + 0.5) * lon_step,
                );
                if s.inside_nfz(&center) {
                    blocked[r * cols + c] = true;
                }
            }
        }
    }

    Grid { min_lat, min_lon, lat_step, lon_step, rows, cols, resolution_nm, blocked }
}

#[derive(Debug)]
struct HeapEntry {
    f: f64,
    seq: u64,
    node: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.f == other.f && self.seq == other.seq
    }
}
impl Eq for HeapEntry {}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on f, FIFO on ties, via BinaryHeap's max ordering.
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NEIGHBORS: [(isize, isize); 8] =
    [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

fn endpoints_to_cells(g: &Grid, from: &GeoPoint, to: &GeoPoint) -> Result<(usize, usize), PathError> {
    let start = g.cell_of(from).ok_or(PathError::OutOfBounds)?;
    let goal = g.cell_of(to).ok_or(PathError::OutOfBounds)?;
    if g.is_blocked(start.0, start.1) || g.is_blocked(goal.0, goal.1) {
        return Err(PathError::NoPath);
    }
    Ok((g.idx2(start), g.idx2(goal)))
}

impl Grid {
    #[inline]
    fn idx2(&self, (r, c): (usize, usize)) -> usize {
        r * self.cols + c
    }

    #[inline]
    fn rc(&self, idx: usize) -> (usize, usize) {
        (idx / self.cols, idx % self.cols)
    }
}

/// Generic best-first search over the 8-connected grid. With
/// `any_angle = true` it runs basic Theta* (parent line-of-sight
/// shortcutting); with `false` it is plain A*.
fn grid_search(
    g: &Grid,
    from: &GeoPoint,
    to: &GeoPoint,
    any_angle: bool,
) -> Result<Vec<GeoPoint>, PathError> {
    let (start, goal) = endpoints_to_cells(g, from, to)?;
    let n = g.rows * g.cols;
    let mut g_score = vec![f64::INFINITY; n];
    let mut parent = vec![u32::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;

    let center = |idx: usize| {
        let (r, c) = g.rc(idx);
        g.cell_center(r, c)
    };
    let h = |idx: usize| geodesic_distance_nm(&center(idx), &center(goal));

    g_score[start] = 0.0;
    parent[start] = start as u32;
    heap.push(HeapEntry { f: h(start), seq, node: start as u32 });

    while let Some(HeapEntry { node, .. }) = heap.pop() {
        let node = node as usize;
        if closed[node] {
            continue;
        }
        closed[node] = true;
        if node == goal {
            break;
        }
        let (r, c) = g.rc(node);
        for (dr, dc) in NEIGHBORS {
            let (nr, nc) = (r as isize + dr, c as isize + dc);
            if nr < 0 || nc < 0 || nr as usize >= g.rows || nc as usize >= g.cols {
                continue;
            }
            let (nr, nc) = (nr as usize, nc as usize);
            if g.is_blocked(nr, nc) {
                continue;
            }
            // Diagonal moves must not cut between two blocked orthogonal
            // neighbours.
            if dr != 0 && dc != 0 && (g.is_blocked(r, nc) || g.is_blocked(nr, c)) {
                continue;
            }
            let next = g.idx(nr, nc);
            if closed[next] {
                continue;
            }
            let step = geodesic_distance_nm(&center(node), &center(next));
            let mut best_g = g_score[node] + step;
            let mut best_parent = node as u32;
            if any_angle {
                let p = parent[node] as usize;
                if p != node && g.line_of_sight(&center(p), &center(next)) {
                    let shortcut = g_score[p] + geodesic_distance_nm(&center(p), &center(next));
                    if shortcut <= best_g {
                        best_g = shortcut;
                        best_parent = p as u32;
                    }
                }
            }
            if best_g + 1e-12 < g_score[next] {
                g_score[next] = best_g;
                parent[next] = best_parent;
                seq += 1;
                heap.push(HeapEntry { f: best_g + h(next), seq, node: next as u32 });
            }
        }
    }

    if !closed[goal] {
        return Err(PathError::NoPath);
    }

    let mut chain = vec![goal];
    let mut cur = goal;
    while cur != start {
        cur = parent[cur] as usize;
        chain.push(cur);
    }
    chain.reverse();

    let mut waypoints = Vec::with_capacity(chain.len() + 2);
    waypoints.push(*from);
    for idx in chain {
        waypoints.push(center(idx));
    }
    waypoints.push(*to);
    dedup_points(&mut waypoints);
    Ok(waypoints)
}

fn dedup_points(pts: &mut Vec<GeoPoint>) {
    pts.dedup_by(|a, b| (a.lat - b.lat).abs() < 1e-12 && (a.lon - b.lon).abs() < 1e-12);
    if pts.len() == 1 {
        let p = pts[0];
        pts.push(p);
    }
}

/// Remove polyline vertices whenever the direct segment between the
/// surviving neighbours keeps line-of-sight. Only ever shortens the path.
fn smooth(g: &Grid, pts: &[GeoPoint]) -> Vec<GeoPoint> {
    if pts.len() <= 2 {
        return pts.to_vec();
    }
    let mut out = vec![pts[0]];
    let mut i = 0;
    while i + 1 < pts.len() {
        let mut j = pts.len() - 1;
        while j > i + 1 && !g.line_of_sight(&pts[i], &pts[j]) {
            j -= 1;
        }
        out.push(pts[j]);
        i = j;
    }
    out
}

/// Any-angle collision-free polyline from `from` to `to`. The endpoints are
/// kept exactly; the interior waypoints are taut corner points around NFZs.
pub fn theta_star(g: &Grid, from: &GeoPoint, to: &GeoPoint) -> Result<Vec<GeoPoint>, PathError> {
    let raw = grid_search(g, from, to, true)?;
    Ok(smooth(g, &raw))
}

/// Plain 8-connected A* on the same grid; baseline for path-quality checks.
pub fn a_star_grid(g: &Grid, from: &GeoPoint, to: &GeoPoint) -> Result<Vec<GeoPoint>, PathError> {
    grid_search(g, from, to, false)
}

pub fn polyline_length_nm(pts: &[GeoPoint]) -> f64 {
    pts.windows(2).map(|w| geodesic_distance_nm(&w[0], &w[1])).sum()
}

/// One constant-profile stretch of a route.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RouteSegment {
    pub kind: ProfileKind,
    /// Horizontal ground distance covered, NM.
    pub length_nm: f64,
    pub duration_s: f64,
    pub fuel_kg: f64,
    pub alt_start: f64,
    pub alt_end: f64,
}

/// A flown leg: collision-free waypoints plus the altitude/speed profile
/// attached to them.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Route {
    pub waypoints: Vec<GeoPoint>,
    pub length_nm: f64,
    pub segments: Vec<RouteSegment>,
}

impl Route {
    pub fn duration_s(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_s).sum()
    }

    pub fn fuel_kg(&self) -> f64 {
        self.segments.iter().map(|s| s.fuel_kg).sum()
    }

    /// Duration of the leading climb/descent transition, if any.
    pub fn initial_transition_s(&self) -> f64 {
        match self.segments.first() {
            Some(s) if matches!(s.kind, ProfileKind::Climb | ProfileKind::Descent) => s.duration_s,
            _ => 0.0,
        }
    }

    /// Duration of the trailing climb/descent transition, if any.
    pub fn final_transition_s(&self) -> f64 {
        if self.segments.len() < 2 {
            return 0.0;
        }
        match self.segments.last() {
            Some(s) if matches!(s.kind, ProfileKind::Climb | ProfileKind::Descent) => s.duration_s,
            _ => 0.0,
        }
    }

    /// Position (with altitude) after `elapsed_s` seconds into the leg.
    /// Clamps to the leg's endpoints outside [0, duration].
    pub fn position_at(&self, elapsed_s: f64) -> GeoPoint {
        let first_alt = self.segments.first().map(|s| s.alt_start).unwrap_or(0.0);
        let last_alt = self.segments.last().map(|s| s.alt_end).unwrap_or(first_alt);
        if self.waypoints.is_empty() {
            return GeoPoint::flat(0.0, 0.0);
        }
        if elapsed_s <= 0.0 || self.segments.is_empty() {
            let mut p = self.waypoints[0];
            p.alt = first_alt;
            return p;
        }
        let mut t = elapsed_s;
        let mut dist = 0.0;
        let mut alt = first_alt;
        let mut done = true;
        for seg in &self.segments {
            if t <= seg.duration_s || seg.duration_s <= 0.0 {
                let frac = if seg.duration_s > 0.0 { (t / seg.duration_s).clamp(0.0, 1.0) } else { 1.0 };
                dist += seg.length_nm * frac;
                alt = seg.alt_start + (seg.alt_end - seg.alt_start) * frac;
                if t <= seg.duration_s {
                    done = false;
                    break;
                }
                t -= seg.duration_s;
            } else {
                dist += seg.length_nm;
                alt = seg.alt_end;
                t -= seg.duration_s;
            }
        }
        if done {
            let mut p = *self.waypoints.last().unwrap();
            p.alt = last_alt;
            return p;
        }
        let mut p = self.point_along(dist);
        p.alt = alt;
        p
    }

    /// Lat/lon `dist_nm` along the waypoint polyline.
    fn point_along(&self, dist_nm: f64) -> GeoPoint {
        let mut remaining = dist_nm.max(0.0);
        for w in self.waypoints.windows(2) {
            let edge = geodesic_distance_nm(&w[0], &w[1]);
            if remaining <= edge {
                if edge <= 0.0 {
                    return w[0];
                }
                let f = remaining / edge;
                return GeoPoint::flat(
                    w[0].lat + (w[1].lat - w[0].lat) * f,
                    w[0].lon + (w[1].lon - w[0].lon) * f,
                );
            }
            remaining -= edge;
        }
        *self.waypoints.last().unwrap()
    }

    /// Debug dump as a GeoJSON LineString feature.
    pub fn to_geojson(&self) -> String {
        let coords: Vec<[f64; 3]> = self.waypoints.iter().map(|p| [p.lon, p.lat, p.alt]).collect();
        serde_json::json!({
            "type": "Feature",
            "geometry": { "type": "LineString", "coordinates": coords },
            "properties": { "length_nm": self.length_nm, "duration_s": self.duration_s() }
        })
        .to_string()
    }
}

/// Attach an altitude/speed profile to a collision-free skeleton.
///
/// The leg climbs (or descends) from `start_alt` to the cruise altitude,
/// cruises, then transitions to the altitude of the final waypoint. The
/// horizontal footprint of each transition comes from the climb/descent
/// profile angle; a leg too short to fit both transitions is infeasible.
pub fn route_metrics(
    skeleton: &[GeoPoint],
    cruise: &FlightProfile,
    uav: &Uav,
    start_alt: f64,
) -> Result<Route, RouteError> {
    assert!(
        matches!(cruise.kind, ProfileKind::MinConsumption | ProfileKind::MaxSpeed),
        "cruise profile must be a cruise kind"
    );
    let waypoints: Vec<GeoPoint> = skeleton.to_vec();
    let length_nm = polyline_length_nm(&waypoints);
    let end_alt = waypoints.last().map(|p| p.alt).unwrap_or(start_alt);
    let cruise_alt = cruise.altitude;

    let transition = |from_alt: f64, to_alt: f64| -> Option<(ProfileKind, f64, f64, f64)> {
        let delta_ft = to_alt - from_alt;
        if delta_ft == 0.0 {
            return None;
        }
        let profile = if delta_ft > 0.0 { &uav.profiles.climb } else { &uav.profiles.descent };
        let angle = profile.angle.max(0.5).to_radians();
        let footprint_nm = (delta_ft.abs() / FT_PER_NM) / angle.tan();
        let slant_nm = (footprint_nm.powi(2) + (delta_ft / FT_PER_NM).powi(2)).sqrt();
        let duration_s = slant_nm / profile.speed * 3600.0;
        let fuel_kg = profile.fuel_rate * duration_s / 3600.0;
        Some((profile.kind, footprint_nm, duration_s, fuel_kg))
    };

    let entry = transition(start_alt, cruise_alt);
    let exit = transition(cruise_alt, end_alt);
    let footprint = entry.as_ref().map(|t| t.1).unwrap_or(0.0)
        + exit.as_ref().map(|t| t.1).unwrap_or(0.0);
    if footprint > length_nm + 1e-9 {
        return Err(RouteError::InfeasibleClimb { required_nm: footprint, leg_nm: length_nm });
    }

    let mut segments = Vec::with_capacity(3);
    if let Some((kind, len, dur, fuel)) = entry {
        segments.push(RouteSegment {
            kind,
            length_nm: len,
            duration_s: dur,
            fuel_kg: fuel,
            alt_start: start_alt,
            alt_end: cruise_alt,
        });
    }
    let cruise_len = length_nm - footprint;
    if cruise_len > 1e-12 {
        let duration_s = cruise_len / cruise.speed * 3600.0;
        segments.push(RouteSegment {
            kind: cruise.kind,
            length_nm: cruise_len,
            duration_s,
            fuel_kg: cruise.fuel_rate * duration_s / 3600.0,
            alt_start: cruise_alt,
            alt_end: cruise_alt,
        });
    }
    if let Some((kind, len, dur, fuel)) = exit {
        segments.push(RouteSegment {
            kind,
            length_nm: len,
            duration_s: dur,
            fuel_kg: fuel,
            alt_start: cruise_alt,
            alt_end: end_alt,
        });
    }

    Ok(Route { waypoints, length_nm, segments })
}
