//! The six-allele plan encoding and its decode into per-UAV task sequences.
//!
//! A chromosome fixes, per task, the crew of UAVs working it, the cruise
//! profile and sensor each crew member uses, a global execution order over
//! all tasks, and per UAV the controlling GCS and the return cruise profile.
//! Crew vectors are kept sorted so chromosome equality is well-defined.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AllenRelation, CruiseChoice, Scenario, SensorKind, TimeDependency};

#[derive(Debug, Error, PartialEq)]
pub enum RepairError {
    #[error("Before/Meets dependencies form a cycle")]
    CyclicDependency,
}

/// A candidate plan. Task/UAV/GCS references are 1-based ids; slot `k` of
/// `path_fp[t]` and `sensor_assign[t]` belongs to `task_assign[t][k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    /// Per task: the sorted, non-empty set of assigned UAV ids.
    pub task_assign: Vec<Vec<usize>>,
    /// Per task and crew slot: cruise profile used flying to the task.
    pub path_fp: Vec<Vec<CruiseChoice>>,
    /// Per task and crew slot: sensor operated during the task.
    pub sensor_assign: Vec<Vec<SensorKind>>,
    /// Global execution order: a permutation of all task ids.
    pub order_perm: Vec<usize>,
    /// Per UAV: controlling GCS id.
    pub gcs_assign: Vec<usize>,
    /// Per UAV: cruise profile for the return-to-base leg.
    pub return_fp: Vec<CruiseChoice>,
}

impl Chromosome {
    /// One-line JSON form for run logs.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("chromosome serializes")
    }

    /// Structural invariants relative to a scenario. Violations are
    /// programming errors, not plan constraint breaches.
    pub fn check_structure(&self, s: &Scenario) -> Result<(), String> {
        let t_count = s.tasks.len();
        let u_count = s.uavs.len();
        if self.task_assign.len() != t_count
            || self.path_fp.len() != t_count
            || self.sensor_assign.len() != t_count
        {
            return Err("per-task allele length mismatch".into());
        }
        if self.gcs_assign.len() != u_count || self.return_fp.len() != u_count {
            return Err("per-UAV allele length mismatch".into());
        }
        for (i, crew) in self.task_assign.iter().enumerate() {
            if crew.is_empty() {
                return Err(format!("task {} has an empty crew", i + 1));
            }
            if !s.tasks[i].multi_uav && crew.len() != 1 {
                return Err(format!(
                    "task {} is not multi-UAV but has a crew of {}",
                    i + 1,
                    crew.len()
                ));
            }
            if crew.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("task {} crew not sorted/unique", i + 1));
            }
            if crew.iter().any(|&u| u == 0 || u > u_count) {
                return Err(format!("task {} crew references unknown UAV", i + 1));
            }
            if self.path_fp[i].len() != crew.len() || self.sensor_assign[i].len() != crew.len() {
                return Err(format!("task {} slot vectors mismatch crew size", i + 1));
            }
        }
        if self.order_perm.len() != t_count {
            return Err("order_perm length mismatch".into());
        }
        let mut seen = vec![false; t_count];
        for &t in &self.order_perm {
            if t == 0 || t > t_count || seen[t - 1] {
                return Err("order_perm is not a permutation of task ids".into());
            }
            seen[t - 1] = true;
        }
        if self.gcs_assign.iter().any(|&g| g == 0 || g > s.gcss.len()) {
            return Err("gcs_assign references unknown GCS".into());
        }
        Ok(())
    }
}

/// One task occurrence in a UAV's flight program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedTask {
    pub task: usize,
    pub profile: CruiseChoice,
    pub sensor: SensorKind,
}

/// A decoded chromosome: what each UAV does, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanView {
    /// Global execution order the schedule follows (the order allele).
    pub order: Vec<usize>,
    /// Indexed by UAV id − 1.
    pub per_uav: Vec<UavPlan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavPlan {
    pub tasks: Vec<PlannedTask>,
    pub gcs: usize,
    pub return_profile: CruiseChoice,
}

/// Expand a chromosome into per-UAV ordered task sequences: each UAV's
/// program is the subsequence of the order permutation containing its
/// assigned tasks. Multi-UAV tasks appear in every crew member's program.
pub fn decode(c: &Chromosome, s: &Scenario) -> PlanView {
    debug_assert!(c.check_structure(s).is_ok(), "{:?}", c.check_structure(s));
    let mut per_uav: Vec<UavPlan> = (0..s.uavs.len())
        .map(|i| UavPlan {
            tasks: Vec::new(),
            gcs: c.gcs_assign[i],
            return_profile: c.return_fp[i],
        })
        .collect();
    for &task in &c.order_perm {
        let crew = &c.task_assign[task - 1];
        for (slot, &uav) in crew.iter().enumerate() {
            per_uav[uav - 1].tasks.push(PlannedTask {
                task,
                profile: c.path_fp[task - 1][slot],
                sensor: c.sensor_assign[task - 1][slot],
            });
        }
    }
    PlanView { order: c.order_perm.clone(), per_uav }
}

/// Rebuild a chromosome from a decoded plan; `decode(encode(p)) == p`.
pub fn encode(p: &PlanView, s: &Scenario) -> Chromosome {
    let t_count = s.tasks.len();
    let mut slots: Vec<Vec<(usize, CruiseChoice, SensorKind)>> = vec![Vec::new(); t_count];
    for (i, up) in p.per_uav.iter().enumerate() {
        for pt in &up.tasks {
            slots[pt.task - 1].push((i + 1, pt.profile, pt.sensor));
        }
    }
    let mut task_assign: Vec<Vec<usize>> = Vec::with_capacity(t_count);
    let mut path_fp: Vec<Vec<CruiseChoice>> = Vec::with_capacity(t_count);
    let mut sensor_assign: Vec<Vec<SensorKind>> = Vec::with_capacity(t_count);
    for mut entries in slots {
        entries.sort_by_key(|e| e.0);
        task_assign.push(entries.iter().map(|e| e.0).collect());
        path_fp.push(entries.iter().map(|e| e.1).collect());
        sensor_assign.push(entries.iter().map(|e| e.2).collect());
    }
    Chromosome {
        task_assign,
        path_fp,
        sensor_assign,
        order_perm: p.order.clone(),
        gcs_assign: p.per_uav.iter().map(|u| u.gcs).collect(),
        return_fp: p.per_uav.iter().map(|u| u.return_profile).collect(),
    }
}

/// Exact per-allele search-space sizes for a scenario shape.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    /// Sizes of the six alleles in encoding order.
    pub per_allele: [BigUint; 6],
    pub total: BigUint,
}

/// Count the candidate plans for a scenario, assuming every UAV carries
/// `sensors_per_uav` sensors.
pub fn search_space_size(s: &Scenario, sensors_per_uav: u32) -> SearchSpace {
    shape_search_space(
        s.tasks.len() as u32,
        s.multi_uav_task_count() as u32,
        s.uavs.len() as u32,
        s.gcss.len() as u32,
        sensors_per_uav,
    )
}

/// Allele-by-allele accounting from raw counts:
/// crews `U^(T−Tmu)·(2^U−1)^Tmu`, path profiles `2^(T−Tmu)·(2^(U+1)−2)^Tmu`,
/// sensors `s^(T−Tmu)·(Σ_{i=1..U} s^i)^Tmu`, orders `T!`, stations `G^U`,
/// return profiles `2^U`.
pub fn shape_search_space(t: u32, t_mu: u32, u: u32, g: u32, s: u32) -> SearchSpace {
    assert!(t_mu <= t, "more multi-UAV tasks than tasks");
    let big = |x: u32| BigUint::from(x);
    let t_single = t - t_mu;

    let crews = big(u).pow(t_single) * (big(2).pow(u) - 1u32).pow(t_mu);
    let profiles = big(2).pow(t_single) * (big(2).pow(u + 1) - 2u32).pow(t_mu);
    let sensor_multi: BigUint = (1..=u).map(|i| big(s).pow(i)).sum();
    let sensors = big(s).pow(t_single) * sensor_multi.pow(t_mu);
    let orders = (1..=t.max(1)).map(BigUint::from).product::<BigUint>();
    let stations = big(g).pow(u);
    let returns = big(2).pow(u);

    let per_allele = [crews, profiles, sensors, orders, stations, returns];
    let total = per_allele.iter().product();
    SearchSpace { per_allele, total }
}

/// Reorder a permutation so every Before/Meets dependency runs forward.
///
/// Violating pairs are swapped in place, sweeping until a clean pass; the
/// relative order of unconstrained tasks is preserved where possible. A
/// cyclic precedence graph cannot be repaired and is reported instead.
pub fn repair_allen_order(
    perm: &[usize],
    deps: &[TimeDependency],
) -> Result<Vec<usize>, RepairError> {
    let precedence: Vec<(usize, usize)> = deps
        .iter()
        .filter(|d| matches!(d.relation, AllenRelation::Before | AllenRelation::Meets))
        .map(|d| (d.first, d.second))
        .collect();
    if precedence.is_empty() {
        return Ok(perm.to_vec());
    }
    if has_cycle(perm.len(), &precedence) {
        return Err(RepairError::CyclicDependency);
    }

    let mut out = perm.to_vec();
    let mut pos = vec![0usize; out.len() + 1];
    for (i, &t) in out.iter().enumerate() {
        pos[t] = i;
    }
    let budget = out.len() * out.len() + 1;
    for _ in 0..budget {
        let mut swapped = false;
        for &(a, b) in &precedence {
            if pos[a] > pos[b] {
                out.swap(pos[a], pos[b]);
                pos.swap(a, b);
                swapped = true;
            }
        }
        if !swapped {
            return Ok(out);
        }
    }
    // Unreachable for acyclic inputs; the cycle check above guards entry.
    Err(RepairError::CyclicDependency)
}

fn has_cycle(task_count: usize, edges: &[(usize, usize)]) -> bool {
    let mut indegree = vec![0usize; task_count + 1];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); task_count + 1];
    for &(a, b) in edges {
        if a == 0 || b == 0 || a > task_count || b > task_count {
            continue;
        }
        adj[a].push(b);
        indegree[b] += 1;
    }
    let mut queue: Vec<usize> = (1..=task_count).filter(|&t| indegree[t] == 0).collect();
    let mut visited = 0;
    while let Some(t) = queue.pop() {
        visited += 1;
        for &n in &adj[t] {
            indegree[n] -= 1;
            if indegree[n] == 0 {
                queue.push(n);
            }
        }
    }
    visited != task_count
}
