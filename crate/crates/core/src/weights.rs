//! Weighted random strategies for biased plan generation.
//!
//! Three selections get biased weights instead of uniform draws: the crew
//! size of a multi-UAV task (NUS — smaller crews weigh more), which UAVs
//! join the crew (DUS — nearer UAVs weigh more), and which GCS controls a
//! UAV (DGS — nearer stations weigh more). Each selection runs one of four
//! weight shapes: constant (the plain uniform generator), arithmetic
//! `(max−v)/max`, harmonic `1/v`, or geometric `2^−v`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{geodesic_distance_nm, CruiseChoice, Gcs, Scenario, Task, Uav};
use crate::plan::{repair_allen_order, Chromosome, RepairError};

/// Smallest value harmonic weights divide by; a colocated UAV/GCS keeps a
/// finite, maximal weight.
const HARMONIC_VALUE_FLOOR: f64 = 1e-6;
/// Geometric exponents are clamped and weights floored so long distances
/// stay representable instead of flushing to zero.
const GEOMETRIC_EXPONENT_CAP: f64 = 60.0;
const GEOMETRIC_WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum WeightsError {
    #[error("weighted selection over empty input")]
    EmptyInput,
    #[error("task {task} has no sensor-capable UAV")]
    NoEligibleUav { task: usize },
    #[error("uav {uav} has no type-compatible GCS")]
    NoEligibleGcs { uav: usize },
    #[error(transparent)]
    Repair(#[from] RepairError),
}

/// Weight shape applied to a value or scaled distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Constant,
    Arithmetic,
    Harmonic,
    Geometric,
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            StrategyKind::Constant => "constant",
            StrategyKind::Arithmetic => "arithmetic",
            StrategyKind::Harmonic => "harmonic",
            StrategyKind::Geometric => "geometric",
        };
        write!(f, "{name}")
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "constant" => Ok(StrategyKind::Constant),
            "arithmetic" => Ok(StrategyKind::Arithmetic),
            "harmonic" => Ok(StrategyKind::Harmonic),
            "geometric" => Ok(StrategyKind::Geometric),
            other => Err(format!(
                "unknown strategy '{other}' (expected constant|arithmetic|harmonic|geometric)"
            )),
        }
    }
}

/// The strategy choice for each of the three biased selections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrategyTriple {
    pub nus: StrategyKind,
    pub dus: StrategyKind,
    pub dgs: StrategyKind,
}

impl StrategyTriple {
    pub fn uniform(kind: StrategyKind) -> Self {
        StrategyTriple { nus: kind, dus: kind, dgs: kind }
    }

    pub const CONSTANT: StrategyTriple = StrategyTriple {
        nus: StrategyKind::Constant,
        dus: StrategyKind::Constant,
        dgs: StrategyKind::Constant,
    };
}

impl fmt::Display for StrategyTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.nus, self.dus, self.dgs)
    }
}

/// Weight of one candidate `value` given the `max` over all candidates.
pub fn strategy_cost(value: f64, max: f64, kind: StrategyKind) -> f64 {
    match kind {
        StrategyKind::Constant => 1.0,
        StrategyKind::Arithmetic => {
            if max <= 0.0 {
                1.0
            } else {
                ((max - value) / max).max(0.0)
            }
        }
        StrategyKind::Harmonic => 1.0 / value.max(HARMONIC_VALUE_FLOOR),
        StrategyKind::Geometric => {
            let exp = value.max(0.0).min(GEOMETRIC_EXPONENT_CAP);
            (-exp).exp2().max(GEOMETRIC_WEIGHT_FLOOR)
        }
    }
}

/// Draw one value with probability proportional to its cost, by cumulative
/// subtraction: draw `u·Σcosts`, subtract costs left to right, and return
/// the value where the remainder first reaches zero. All-zero cost vectors
/// fall back to a uniform draw.
pub fn weighted_random_value<T: Copy>(
    values: &[T],
    costs: &[f64],
    rng: &mut impl Rng,
) -> Result<T, WeightsError> {
    if values.is_empty() || values.len() != costs.len() {
        return Err(WeightsError::EmptyInput);
    }
    let total: f64 = costs.iter().sum();
    if total <= 0.0 {
        return Ok(values[rng.gen_range(0..values.len())]);
    }
    let mut remaining = rng.gen::<f64>() * total;
    for (v, c) in values.iter().zip(costs) {
        remaining -= c;
        if remaining <= 0.0 {
            return Ok(*v);
        }
    }
    Ok(*values.last().unwrap())
}

/// NUS weights for crew sizes 1..=U: `weight[n] = strategy_cost(n, U, kind)`.
pub fn nus_costs(u_count: usize, kind: StrategyKind) -> Vec<f64> {
    (1..=u_count)
        .map(|n| strategy_cost(n as f64, u_count as f64, kind))
        .collect()
}

/// DUS weights over candidate UAVs for a task, from base-to-zone distances
/// scaled by `distance_unit_nm`. The max is taken over the candidates given.
pub fn dus_costs(task: &Task, uavs: &[&Uav], kind: StrategyKind, distance_unit_nm: f64) -> Vec<f64> {
    let unit = distance_unit_nm.max(1e-9);
    let dists: Vec<f64> = uavs
        .iter()
        .map(|u| geodesic_distance_nm(&task.zone, &u.initial_position) / unit)
        .collect();
    let max = dists.iter().copied().fold(0.0f64, f64::max);
    dists.into_iter().map(|d| strategy_cost(d, max, kind)).collect()
}

/// DGS weights over candidate GCSs for a UAV, analogous to [`dus_costs`].
pub fn dgs_costs(uav: &Uav, gcss: &[&Gcs], kind: StrategyKind, distance_unit_nm: f64) -> Vec<f64> {
    let unit = distance_unit_nm.max(1e-9);
    let dists: Vec<f64> = gcss
        .iter()
        .map(|g| geodesic_distance_nm(&uav.initial_position, &g.position) / unit)
        .collect();
    let max = dists.iter().copied().fold(0.0f64, f64::max);
    dists.into_iter().map(|d| strategy_cost(d, max, kind)).collect()
}

fn cruise_flip(rng: &mut impl Rng) -> CruiseChoice {
    if rng.gen_bool(0.5) {
        CruiseChoice::Min
    } else {
        CruiseChoice::Max
    }
}

/// Draw `n` distinct UAV ids from the sensor-capable pool, weighting each
/// pick by DUS costs over the remaining candidates (sampling without
/// replacement).
pub(crate) fn draw_crew(
    s: &Scenario,
    task: &Task,
    n: usize,
    kind: StrategyKind,
    distance_unit_nm: f64,
    rng: &mut impl Rng,
) -> Result<Vec<usize>, WeightsError> {
    let mut pool: Vec<usize> = s.eligible_uavs(task.id);
    if pool.is_empty() {
        return Err(WeightsError::NoEligibleUav { task: task.id });
    }
    let n = n.min(pool.len());
    let mut crew = Vec::with_capacity(n);
    for _ in 0..n {
        let refs: Vec<&Uav> = pool.iter().map(|&id| s.uav(id)).collect();
        let costs = dus_costs(task, &refs, kind, distance_unit_nm);
        let picked = weighted_random_value(&pool, &costs, rng)?;
        pool.retain(|&id| id != picked);
        crew.push(picked);
    }
    crew.sort_unstable();
    Ok(crew)
}

/// Generate one chromosome with the biased selections.
///
/// Per task: multi-UAV tasks draw a crew size via NUS then that many
/// distinct sensor-capable UAVs via DUS; single tasks draw one. The order
/// permutation is uniform then repaired for Before/Meets precedence. Path
/// and return profiles are uniform coin flips, sensors are the task's
/// required kind, and each UAV's GCS is drawn via DGS over type-compatible
/// stations. The result always satisfies the sensor, GCS-type and
/// precedence guarantees.
pub fn weighted_random_individual(
    s: &Scenario,
    strat: &StrategyTriple,
    distance_unit_nm: f64,
    rng: &mut impl Rng,
) -> Result<Chromosome, WeightsError> {
    let u_count = s.uavs.len();
    let mut task_assign = Vec::with_capacity(s.tasks.len());
    let mut path_fp = Vec::with_capacity(s.tasks.len());
    let mut sensor_assign = Vec::with_capacity(s.tasks.len());

    for task in &s.tasks {
        let crew_size = if task.multi_uav {
            let sizes: Vec<usize> = (1..=u_count).collect();
            let costs = nus_costs(u_count, strat.nus);
            weighted_random_value(&sizes, &costs, rng)?
        } else {
            1
        };
        let crew = draw_crew(s, task, crew_size, strat.dus, distance_unit_nm, rng)?;
        path_fp.push(crew.iter().map(|_| cruise_flip(rng)).collect::<Vec<_>>());
        sensor_assign.push(vec![task.required_sensor; crew.len()]);
        task_assign.push(crew);
    }

    let mut order_perm: Vec<usize> = (1..=s.tasks.len()).collect();
    for i in (1..order_perm.len()).rev() {
        order_perm.swap(i, rng.gen_range(0..=i));
    }
    let order_perm = repair_allen_order(&order_perm, &s.time_deps)?;

    let mut gcs_assign = Vec::with_capacity(u_count);
    for uav in &s.uavs {
        let eligible = s.eligible_gcss(uav.id);
        if eligible.is_empty() {
            return Err(WeightsError::NoEligibleGcs { uav: uav.id });
        }
        let refs: Vec<&Gcs> = eligible.iter().map(|&id| s.gcs(id)).collect();
        let costs = dgs_costs(uav, &refs, strat.dgs, distance_unit_nm);
        gcs_assign.push(weighted_random_value(&eligible, &costs, rng)?);
    }
    let return_fp = (0..u_count).map(|_| cruise_flip(rng)).collect();

    let c = Chromosome { task_assign, path_fp, sensor_assign, order_perm, gcs_assign, return_fp };
    debug_assert!(c.check_structure(s).is_ok());
    Ok(c)
}
