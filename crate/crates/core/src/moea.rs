//! The evolutionary loop: constraint-gated fitness, fast non-dominated
//! sorting, crowding, tournament selection, allele-wise crossover, biased
//! mutation, (μ+λ) survivor selection and a stagnation stopping rule.
//!
//! Invalid plans never outrank valid ones: they are compared among
//! themselves by violation count only. The returned front is an archive of
//! every non-dominated feasible objective vector seen during the run, and
//! the run stops once that archive has stayed identical for
//! `stagnation_gens` consecutive generations (an empty archive never counts
//! as stable).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csp::{EvalOptions, Evaluator, ObjectiveVector};
use crate::model::{validate_scenario, CruiseChoice, Scenario};
use crate::plan::{repair_allen_order, Chromosome};
use crate::weights::{
    draw_crew, dgs_costs, nus_costs, weighted_random_individual, weighted_random_value,
    StrategyTriple, WeightsError,
};

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("invalid run config: {0}")]
    Config(String),
    #[error("scenario failed validation:\n{0}")]
    Scenario(String),
    #[error(transparent)]
    Generator(#[from] WeightsError),
}

/// Fitness of one chromosome: the objective vector when every constraint
/// holds, otherwise the number of breached constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Evaluation {
    Valid(ObjectiveVector),
    Invalid(u32),
}

impl Evaluation {
    pub fn is_valid(&self) -> bool {
        matches!(self, Evaluation::Valid(_))
    }

    pub fn violations(&self) -> u32 {
        match self {
            Evaluation::Valid(_) => 0,
            Evaluation::Invalid(n) => *n,
        }
    }
}

/// Constrained Pareto dominance: valid beats invalid, fewer violations beat
/// more, and two valid plans compare componentwise over all seven minimized
/// objectives (all ≤, at least one <).
pub fn dominates(a: &Evaluation, b: &Evaluation) -> bool {
    match (a, b) {
        (Evaluation::Valid(_), Evaluation::Invalid(_)) => true,
        (Evaluation::Invalid(_), Evaluation::Valid(_)) => false,
        (Evaluation::Invalid(m), Evaluation::Invalid(n)) => m < n,
        (Evaluation::Valid(u), Evaluation::Valid(v)) => {
            let (u, v) = (u.as_array(), v.as_array());
            let mut strict = false;
            for i in 0..u.len() {
                if u[i] > v[i] {
                    return false;
                }
                if u[i] < v[i] {
                    strict = true;
                }
            }
            strict
        }
    }
}

/// Deb's fast non-dominated sort. Returns index fronts; every index appears
/// in exactly one front.
pub fn fast_nondominated_sort(evals: &[Evaluation]) -> Vec<Vec<usize>> {
    let n = evals.len();
    if n == 0 {
        return Vec::new();
    }
    let mut dominated: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    let mut first = Vec::new();
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            if dominates(&evals[p], &evals[q]) {
                dominated[p].push(q);
            } else if dominates(&evals[q], &evals[p]) {
                count[p] += 1;
            }
        }
        if count[p] == 0 {
            first.push(p);
        }
    }
    let mut fronts = vec![first];
    loop {
        let mut next = Vec::new();
        for &p in fronts.last().unwrap() {
            for &q in &dominated[p] {
                count[q] -= 1;
                if count[q] == 0 {
                    next.push(q);
                }
            }
        }
        if next.is_empty() {
            return fronts;
        }
        next.sort_unstable();
        fronts.push(next);
    }
}

/// Crowding distance over generic objective rows: boundary members per
/// column get +∞, interior members sum normalized neighbour gaps,
/// zero-range columns contribute nothing.
fn crowding_rows(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let mut dist = vec![0.0; n];
    if n == 0 {
        return dist;
    }
    let m = rows[0].len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    for col in 0..m {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| rows[a][col].total_cmp(&rows[b][col]).then(a.cmp(&b)));
        let lo = rows[order[0]][col];
        let hi = rows[order[n - 1]][col];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            if dist[order[w]].is_finite() {
                dist[order[w]] += (rows[order[w + 1]][col] - rows[order[w - 1]][col]) / range;
            }
        }
    }
    dist
}

/// Crowding distance of a front of objective vectors.
pub fn crowding_distance(front: &[ObjectiveVector]) -> Vec<f64> {
    let rows: Vec<Vec<f64>> = front.iter().map(|o| o.as_array().to_vec()).collect();
    crowding_rows(&rows)
}

/// Non-domination rank plus crowding for a whole population. Valid fronts
/// crowd over the seven objectives; invalid fronts (all equal violation
/// count) crowd over that single pseudo-objective.
pub(crate) fn rank_and_crowd(evals: &[Evaluation]) -> (Vec<usize>, Vec<f64>) {
    let mut rank = vec![0usize; evals.len()];
    let mut crowd = vec![0.0f64; evals.len()];
    for (r, front) in fast_nondominated_sort(evals).into_iter().enumerate() {
        let rows: Vec<Vec<f64>> = front
            .iter()
            .map(|&i| match &evals[i] {
                Evaluation::Valid(o) => o.as_array().to_vec(),
                Evaluation::Invalid(v) => vec![*v as f64],
            })
            .collect();
        let dists = crowding_rows(&rows);
        for (k, &i) in front.iter().enumerate() {
            rank[i] = r;
            crowd[i] = dists[k];
        }
    }
    (rank, crowd)
}

/// Binary-or-larger tournament: lowest rank wins, ties prefer the larger
/// crowding distance, remaining ties are drawn uniformly.
pub fn tournament_select(
    meta: &[(usize, f64)],
    k: usize,
    rng: &mut impl Rng,
) -> usize {
    assert!(!meta.is_empty(), "tournament over empty population");
    let entrants: Vec<usize> = (0..k.max(1)).map(|_| rng.gen_range(0..meta.len())).collect();
    let best_key = entrants
        .iter()
        .map(|&i| (meta[i].0, -meta[i].1))
        .min_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .unwrap();
    let tied: Vec<usize> = entrants
        .into_iter()
        .filter(|&i| meta[i].0 == best_key.0 && -meta[i].1 == best_key.1)
        .collect();
    tied[rng.gen_range(0..tied.len())]
}

/// Partially mapped crossover: the child takes `other`'s segment `[i, j)`
/// and keeps `base`'s genes elsewhere, chasing the segment mapping to stay
/// a permutation.
fn pmx(base: &[usize], other: &[usize], i: usize, j: usize) -> Vec<usize> {
    let n = base.len();
    let mut child = base.to_vec();
    child[i..j].copy_from_slice(&other[i..j]);
    for k in (0..i).chain(j..n) {
        let mut v = base[k];
        let mut guard = n + 1;
        while let Some(m) = other[i..j].iter().position(|&x| x == v) {
            v = base[i + m];
            guard -= 1;
            if guard == 0 {
                break;
            }
        }
        child[k] = v;
    }
    child
}

fn sorted_cut(rng: &mut impl Rng, len: usize) -> (usize, usize) {
    let a = rng.gen_range(0..=len);
    let b = rng.gen_range(0..=len);
    (a.min(b), a.max(b))
}

/// Allele-wise recombination of two parents: one task-indexed 2-point cut
/// swaps whole per-task cells of the first three alleles, PMX recombines
/// the order permutation, and one UAV-indexed 2-point cut swaps the GCS and
/// return-profile genes. Children are precedence-repaired.
///
/// Panics if the scenario's Before/Meets dependencies are cyclic (callers
/// validate the scenario first).
pub fn crossover(
    p1: &Chromosome,
    p2: &Chromosome,
    s: &Scenario,
    rng: &mut impl Rng,
) -> (Chromosome, Chromosome) {
    let t_count = s.tasks.len();
    let u_count = s.uavs.len();
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();

    let (a, b) = sorted_cut(rng, t_count);
    for t in a..b {
        std::mem::swap(&mut c1.task_assign[t], &mut c2.task_assign[t]);
        std::mem::swap(&mut c1.path_fp[t], &mut c2.path_fp[t]);
        std::mem::swap(&mut c1.sensor_assign[t], &mut c2.sensor_assign[t]);
    }

    let (i, j) = sorted_cut(rng, t_count);
    c1.order_perm = pmx(&p1.order_perm, &p2.order_perm, i, j);
    c2.order_perm = pmx(&p2.order_perm, &p1.order_perm, i, j);

    let (x, y) = sorted_cut(rng, u_count);
    for u in x..y {
        std::mem::swap(&mut c1.gcs_assign[u], &mut c2.gcs_assign[u]);
        std::mem::swap(&mut c1.return_fp[u], &mut c2.return_fp[u]);
    }

    c1.order_perm = repair_allen_order(&c1.order_perm, &s.time_deps)
        .expect("crossover on scenario with cyclic dependencies");
    c2.order_perm = repair_allen_order(&c2.order_perm, &s.time_deps)
        .expect("crossover on scenario with cyclic dependencies");
    (c1, c2)
}

/// Gene-wise mutation combined with the biased generator: crew cells are
/// resampled through NUS/DUS, GCS genes through DGS, profile genes flip
/// uniformly, and order genes move by insert-mutation followed by
/// precedence repair. `mutation_prob == 0` returns the input unchanged.
///
/// Panics under cyclic Before/Meets dependencies (callers validate first).
pub fn mutate(
    c: &Chromosome,
    s: &Scenario,
    cfg: &RunConfig,
    rng: &mut impl Rng,
) -> Chromosome {
    let p = cfg.mutation_prob;
    let mut out = c.clone();
    if p <= 0.0 {
        return out;
    }
    let flip = |rng: &mut dyn rand::RngCore| {
        if rng.gen_bool(0.5) {
            CruiseChoice::Min
        } else {
            CruiseChoice::Max
        }
    };

    for (t, task) in s.tasks.iter().enumerate() {
        if rng.gen_bool(p) {
            let crew_size = if task.multi_uav {
                let sizes: Vec<usize> = (1..=s.uavs.len()).collect();
                let costs = nus_costs(s.uavs.len(), cfg.strategies.nus);
                weighted_random_value(&sizes, &costs, rng).expect("non-empty sizes")
            } else {
                1
            };
            let crew = draw_crew(s, task, crew_size, cfg.strategies.dus, cfg.distance_unit_nm, rng)
                .expect("mutation on scenario with an uncoverable task");
            out.path_fp[t] = crew.iter().map(|_| flip(rng)).collect();
            out.sensor_assign[t] = vec![task.required_sensor; crew.len()];
            out.task_assign[t] = crew;
        }
        for slot in 0..out.path_fp[t].len() {
            if rng.gen_bool(p) {
                out.path_fp[t][slot] = flip(rng);
            }
        }
        for slot in 0..out.sensor_assign[t].len() {
            if rng.gen_bool(p) {
                let uav = s.uav(out.task_assign[t][slot]);
                out.sensor_assign[t][slot] = if uav.carries(task.required_sensor) {
                    task.required_sensor
                } else {
                    uav.sensors[rng.gen_range(0..uav.sensors.len())]
                };
            }
        }
    }

    let mut order = out.order_perm.clone();
    let mut order_changed = false;
    for idx in 0..order.len() {
        if rng.gen_bool(p) {
            let v = order.remove(idx.min(order.len() - 1));
            let at = rng.gen_range(0..=order.len());
            order.insert(at, v);
            order_changed = true;
        }
    }
    if order_changed {
        out.order_perm = repair_allen_order(&order, &s.time_deps)
            .expect("mutation on scenario with cyclic dependencies");
    }

    for u in 0..s.uavs.len() {
        if rng.gen_bool(p) {
            let eligible = s.eligible_gcss(u + 1);
            let refs: Vec<&crate::model::Gcs> = eligible.iter().map(|&id| s.gcs(id)).collect();
            let costs = dgs_costs(s.uav(u + 1), &refs, cfg.strategies.dgs, cfg.distance_unit_nm);
            out.gcs_assign[u] =
                weighted_random_value(&eligible, &costs, rng).expect("uav with no eligible gcs");
        }
        if rng.gen_bool(p) {
            out.return_fp[u] = flip(rng);
        }
    }
    out
}

/// Solver parameters. Defaults mirror the experiment setup: 30 elite
/// parents survive into a population of 300 offspring, 10% gene mutation,
/// and stop after 10 generations of an unchanged front.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub mu: usize,
    pub lambda: usize,
    pub mutation_prob: f64,
    pub crossover_prob: f64,
    pub stagnation_gens: usize,
    pub max_gens: usize,
    pub strategies: StrategyTriple,
    pub seed: u64,
    pub grid_resolution_nm: f64,
    pub sample_step_s: f64,
    pub distance_unit_nm: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mu: 30,
            lambda: 300,
            mutation_prob: 0.10,
            crossover_prob: 0.90,
            stagnation_gens: 10,
            max_gens: 1000,
            strategies: StrategyTriple::CONSTANT,
            seed: 0,
            grid_resolution_nm: 1.0,
            sample_step_s: 30.0,
            distance_unit_nm: 10.0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), EvolveError> {
        if self.mu == 0 || self.mu > self.lambda {
            return Err(EvolveError::Config(format!(
                "need 0 < mu <= lambda, got mu={} lambda={}",
                self.mu, self.lambda
            )));
        }
        for (name, p) in [("mutation_prob", self.mutation_prob), ("crossover_prob", self.crossover_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(EvolveError::Config(format!("{name} must be in [0,1], got {p}")));
            }
        }
        if self.stagnation_gens == 0 {
            return Err(EvolveError::Config("stagnation_gens must be >= 1".into()));
        }
        if self.max_gens == 0 {
            return Err(EvolveError::Config("max_gens must be >= 1".into()));
        }
        if self.grid_resolution_nm <= 0.0 {
            return Err(EvolveError::Config("grid resolution must be positive".into()));
        }
        Ok(())
    }
}

/// One feasible, non-dominated plan.
#[derive(Debug, Clone, Serialize)]
pub struct FrontMember {
    pub chromosome: Chromosome,
    pub objectives: ObjectiveVector,
}

/// Per-generation progress row.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GenerationStat {
    pub gen: usize,
    /// Valid individuals in the population.
    pub n_valid: usize,
    /// Size of the non-dominated archive after this generation.
    pub front_size: usize,
    /// Smallest violation count in the population (0 once any is valid).
    pub min_violation: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub front: Vec<FrontMember>,
    pub generations_run: usize,
    pub converged: bool,
    pub history: Vec<GenerationStat>,
}

/// All-time archive of non-dominated feasible solutions. One member per
/// distinct objective vector; dominated members are evicted on insert.
#[derive(Debug, Default)]
pub struct ParetoArchive {
    members: Vec<FrontMember>,
}

impl ParetoArchive {
    pub fn insert(&mut self, chromosome: &Chromosome, objectives: ObjectiveVector) -> bool {
        let cand = Evaluation::Valid(objectives);
        for m in &self.members {
            let held = Evaluation::Valid(m.objectives);
            if m.objectives == objectives || dominates(&held, &cand) {
                return false;
            }
        }
        self.members.retain(|m| !dominates(&cand, &Evaluation::Valid(m.objectives)));
        self.members.push(FrontMember { chromosome: chromosome.clone(), objectives });
        true
    }

    pub fn members(&self) -> &[FrontMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Objective vectors rounded to 1e-9, sorted: the stagnation key.
    fn key(&self) -> Vec<[i64; 7]> {
        let mut key: Vec<[i64; 7]> = self
            .members
            .iter()
            .map(|m| {
                let a = m.objectives.as_array();
                let mut row = [0i64; 7];
                for (i, v) in a.iter().enumerate() {
                    row[i] = (v * 1e9).round() as i64;
                }
                row
            })
            .collect();
        key.sort_unstable();
        key
    }
}

/// Pick the `want` best indices by (rank asc, crowding desc), whole fronts
/// first, crowding-sorted tail inside the cut front.
fn select_best(want: usize, evals: &[Evaluation], rank: &[usize], crowd: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..evals.len()).collect();
    order.sort_by(|&a, &b| {
        rank[a]
            .cmp(&rank[b])
            .then_with(|| crowd[b].total_cmp(&crowd[a]))
            .then_with(|| a.cmp(&b))
    });
    order.truncate(want);
    order
}

/// Run the full loop on a scenario.
pub fn evolve(s: &Scenario, cfg: &RunConfig) -> Result<RunResult, EvolveError> {
    cfg.validate()?;
    let report = validate_scenario(s);
    if !report.is_empty() {
        return Err(EvolveError::Scenario(report.to_string()));
    }
    // Surface cyclic dependencies before the operators would panic on them.
    let identity: Vec<usize> = (1..=s.tasks.len()).collect();
    repair_allen_order(&identity, &s.time_deps).map_err(WeightsError::from)?;

    let evaluator = Evaluator::new(
        s,
        cfg.grid_resolution_nm,
        EvalOptions { sample_step_s: cfg.sample_step_s },
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut pop: Vec<Chromosome> = Vec::with_capacity(cfg.lambda);
    for _ in 0..cfg.lambda {
        pop.push(weighted_random_individual(
            s,
            &cfg.strategies,
            cfg.distance_unit_nm,
            &mut rng,
        )?);
    }
    let mut evals: Vec<Evaluation> = pop.par_iter().map(|c| evaluator.fitness(c)).collect();

    let mut archive = ParetoArchive::default();
    for (c, e) in pop.iter().zip(&evals) {
        if let Evaluation::Valid(o) = e {
            archive.insert(c, *o);
        }
    }

    let mut history = Vec::with_capacity(cfg.max_gens + 1);
    history.push(stat(0, &evals, &archive));
    let mut prev_key = archive.key();
    let mut stagnation = 0usize;
    let mut generations_run = 0usize;
    let mut converged = false;

    for gen in 1..=cfg.max_gens {
        generations_run = gen;
        let (rank, crowd) = rank_and_crowd(&evals);
        let meta: Vec<(usize, f64)> = rank.iter().copied().zip(crowd.iter().copied()).collect();

        let mut offspring = Vec::with_capacity(cfg.lambda + 1);
        while offspring.len() < cfg.lambda {
            let i1 = tournament_select(&meta, 2, &mut rng);
            let i2 = tournament_select(&meta, 2, &mut rng);
            let (c1, c2) = if rng.gen_bool(cfg.crossover_prob) {
                crossover(&pop[i1], &pop[i2], s, &mut rng)
            } else {
                (pop[i1].clone(), pop[i2].clone())
            };
            offspring.push(mutate(&c1, s, cfg, &mut rng));
            if offspring.len() < cfg.lambda {
                offspring.push(mutate(&c2, s, cfg, &mut rng));
            }
        }
        let off_evals: Vec<Evaluation> =
            offspring.par_iter().map(|c| evaluator.fitness(c)).collect();
        for (c, e) in offspring.iter().zip(&off_evals) {
            if let Evaluation::Valid(o) = e {
                archive.insert(c, *o);
            }
        }

        // Survivors: μ elite parents plus the best λ−μ offspring.
        let elite = select_best(cfg.mu.min(pop.len()), &evals, &rank, &crowd);
        let (off_rank, off_crowd) = rank_and_crowd(&off_evals);
        let rest = select_best(cfg.lambda - elite.len(), &off_evals, &off_rank, &off_crowd);

        let mut next_pop = Vec::with_capacity(cfg.lambda);
        let mut next_evals = Vec::with_capacity(cfg.lambda);
        for &i in &elite {
            next_pop.push(pop[i].clone());
            next_evals.push(evals[i]);
        }
        for &i in &rest {
            next_pop.push(offspring[i].clone());
            next_evals.push(off_evals[i]);
        }
        pop = next_pop;
        evals = next_evals;

        history.push(stat(gen, &evals, &archive));
        let key = archive.key();
        if !archive.is_empty() && key == prev_key {
            stagnation += 1;
        } else {
            stagnation = 0;
        }
        prev_key = key;
        if stagnation >= cfg.stagnation_gens {
            converged = true;
            break;
        }
    }

    Ok(RunResult {
        front: archive.members,
        generations_run,
        converged,
        history,
    })
}

fn stat(gen: usize, evals: &[Evaluation], archive: &ParetoArchive) -> GenerationStat {
    GenerationStat {
        gen,
        n_valid: evals.iter().filter(|e| e.is_valid()).count(),
        front_size: archive.len(),
        min_violation: evals.iter().map(|e| e.violations()).min().unwrap_or(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_scenario, DatasetSpec};

    fn obj(v: [f64; 7]) -> ObjectiveVector {
        ObjectiveVector {
            cost: v[0],
            makespan: v[1],
            risk: v[2],
            n_uavs: v[3] as u32,
            fuel: v[4],
            flight_time: v[5],
            distance: v[6],
        }
    }

    fn valid(v: [f64; 7]) -> Evaluation {
        Evaluation::Valid(obj(v))
    }

    #[test]
    fn dominance_ordering() {
        assert!(dominates(&valid([9.0; 7]), &Evaluation::Invalid(1)));
        assert!(!dominates(&Evaluation::Invalid(1), &valid([9.0; 7])));
        assert!(dominates(&Evaluation::Invalid(1), &Evaluation::Invalid(2)));
        assert!(!dominates(&Evaluation::Invalid(2), &Evaluation::Invalid(2)));
        assert!(dominates(
            &valid([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
            &valid([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0])
        ));
        assert!(!dominates(&valid([1.0; 7]), &valid([1.0; 7])));
    }

    #[test]
    fn sort_single_front_when_mutually_nondominated() {
        let evals = vec![
            valid([1.0, 2.0, 0.0, 1.0, 1.0, 1.0, 1.0]),
            valid([2.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0]),
        ];
        let fronts = fast_nondominated_sort(&evals);
        assert_eq!(fronts, vec![vec![0, 1]]);
    }

    #[test]
    fn sort_chain_gives_singleton_fronts() {
        let evals: Vec<Evaluation> =
            (0..4).map(|k| valid([k as f64 + 1.0; 7])).collect();
        let fronts = fast_nondominated_sort(&evals);
        assert_eq!(fronts, vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn sort_matches_bruteforce_oracle() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let n = rng.gen_range(5..60);
            let evals: Vec<Evaluation> = (0..n)
                .map(|_| {
                    if rng.gen_bool(0.2) {
                        Evaluation::Invalid(rng.gen_range(1..5))
                    } else {
                        let mut v = [0.0; 7];
                        for x in &mut v {
                            *x = (rng.gen_range(0..5) as f64) / 2.0;
                        }
                        valid(v)
                    }
                })
                .collect();
            let fronts = fast_nondominated_sort(&evals);
            // Oracle: rank = longest chain of removals by pairwise dominance.
            let mut oracle_rank = vec![0usize; n];
            let mut remaining: Vec<usize> = (0..n).collect();
            let mut r = 0;
            while !remaining.is_empty() {
                let front: Vec<usize> = remaining
                    .iter()
                    .copied()
                    .filter(|&p| {
                        !remaining.iter().any(|&q| q != p && dominates(&evals[q], &evals[p]))
                    })
                    .collect();
                for &p in &front {
                    oracle_rank[p] = r;
                }
                remaining.retain(|p| !front.contains(p));
                r += 1;
            }
            for (r, front) in fronts.iter().enumerate() {
                for &p in front {
                    assert_eq!(oracle_rank[p], r);
                }
            }
        }
    }

    #[test]
    fn crowding_small_fronts_are_infinite() {
        let front = vec![obj([1.0; 7]), obj([2.0; 7])];
        assert!(crowding_distance(&front).iter().all(|d| d.is_infinite()));
    }

    #[test]
    fn crowding_middle_of_three_collinear_points() {
        // Two informative objectives, evenly spaced: middle = 1 + 1 = 2.
        let front = vec![
            obj([0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            obj([1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            obj([2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        ];
        let d = crowding_distance(&front);
        assert!((d[1] - 2.0).abs() < 1e-12, "{d:?}");
        assert!(d[0].is_infinite() && d[2].is_infinite());
    }

    #[test]
    fn crowding_handles_duplicate_vectors() {
        let front = vec![
            obj([0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            obj([0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0]),
            obj([0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0]),
            obj([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        ];
        let d = crowding_distance(&front);
        assert!(d.iter().all(|x| x.is_finite() || x.is_infinite()));
        assert!(d[1].is_finite() || d[2].is_finite());
    }

    #[test]
    fn tournament_prefers_rank_then_crowding() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // Rank 0 vs rank 2: index 1 wins only when drawn for both slots, so
        // index 0 takes roughly 3/4 of tournaments.
        let meta = vec![(0usize, 0.5f64), (2, 9.9)];
        let wins0 = (0..400).filter(|_| tournament_select(&meta, 2, &mut rng) == 0).count();
        assert!((250..=350).contains(&wins0), "wins0 = {wins0}");
        // Same rank: infinite crowding beats finite whenever both enter.
        let meta = vec![(1usize, f64::INFINITY), (1, 0.5)];
        let wins0 = (0..400).filter(|_| tournament_select(&meta, 2, &mut rng) == 0).count();
        assert!((250..=350).contains(&wins0), "wins0 = {wins0}");
        // Singleton population is forced.
        let meta = vec![(0usize, 1.0)];
        assert_eq!(tournament_select(&meta, 2, &mut rng), 0);
    }

    #[test]
    fn pmx_textbook_case_and_boundaries() {
        let a = [1, 2, 3, 4, 5];
        let b = [5, 4, 3, 2, 1];
        let child = pmx(&a, &b, 2, 4);
        let mut sorted = child.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![1, 2, 3, 4, 5]);
        assert_eq!(&child[2..4], &[3, 2]);

        assert_eq!(pmx(&a, &b, 0, 5), b.to_vec());
        assert_eq!(pmx(&a, &b, 0, 0), a.to_vec());
    }

    fn small_scenario() -> Scenario {
        generate_scenario(
            &DatasetSpec { tasks: 5, multi_uav_tasks: 1, uavs: 3, gcss: 1, nfzs: 0, time_deps: 1 },
            31,
        )
        .unwrap()
    }

    fn cfg(seed: u64) -> RunConfig {
        RunConfig {
            mu: 6,
            lambda: 40,
            max_gens: 60,
            seed,
            ..RunConfig::default()
        }
    }

    #[test]
    fn crossover_of_identical_parents_is_identity() {
        let s = small_scenario();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = weighted_random_individual(&s, &StrategyTriple::CONSTANT, 10.0, &mut rng).unwrap();
        let (c1, c2) = crossover(&p, &p, &s, &mut rng);
        assert_eq!(c1, p);
        assert_eq!(c2, p);
    }

    #[test]
    fn crossover_children_stay_structurally_valid() {
        let s = small_scenario();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let p1 =
                weighted_random_individual(&s, &StrategyTriple::CONSTANT, 10.0, &mut rng).unwrap();
            let p2 =
                weighted_random_individual(&s, &StrategyTriple::CONSTANT, 10.0, &mut rng).unwrap();
            let (c1, c2) = crossover(&p1, &p2, &s, &mut rng);
            assert!(c1.check_structure(&s).is_ok());
            assert!(c2.check_structure(&s).is_ok());
            let pos = |perm: &[usize], t: usize| perm.iter().position(|&x| x == t).unwrap();
            for d in &s.time_deps {
                assert!(pos(&c1.order_perm, d.first) < pos(&c1.order_perm, d.second));
                assert!(pos(&c2.order_perm, d.first) < pos(&c2.order_perm, d.second));
            }
        }
    }

    #[test]
    fn zero_mutation_probability_is_identity() {
        let s = small_scenario();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = weighted_random_individual(&s, &StrategyTriple::CONSTANT, 10.0, &mut rng).unwrap();
        let mut config = cfg(0);
        config.mutation_prob = 0.0;
        let m = mutate(&c, &s, &config, &mut rng);
        assert_eq!(m, c);
    }

    #[test]
    fn full_mutation_keeps_guarantees() {
        let s = small_scenario();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut config = cfg(0);
        config.mutation_prob = 1.0;
        for _ in 0..500 {
            let c =
                weighted_random_individual(&s, &StrategyTriple::CONSTANT, 10.0, &mut rng).unwrap();
            let m = mutate(&c, &s, &config, &mut rng);
            assert!(m.check_structure(&s).is_ok());
            for (t, crew) in m.task_assign.iter().enumerate() {
                for &u in crew {
                    assert!(s.sensor_capable(u, t + 1));
                }
            }
            for (u, &g) in m.gcs_assign.iter().enumerate() {
                assert!(s.gcs(g).admits(s.uav(u + 1)));
            }
            let pos = |t: usize| m.order_perm.iter().position(|&x| x == t).unwrap();
            for d in &s.time_deps {
                assert!(pos(d.first) < pos(d.second));
            }
        }
    }

    #[test]
    fn insert_mutation_semantics() {
        // Remove index 0 and insert at 2: (1,2,3,4) -> (2,3,1,4).
        let mut v = vec![1, 2, 3, 4];
        let x = v.remove(0);
        v.insert(2, x);
        assert_eq!(v, vec![2, 3, 1, 4]);
    }

    #[test]
    fn archive_insert_keeps_nondominated_cover() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = small_scenario();
        let c = weighted_random_individual(&s, &StrategyTriple::CONSTANT, 10.0, &mut rng).unwrap();
        let mut archive = ParetoArchive::default();
        let mut snapshots: Vec<Vec<ObjectiveVector>> = Vec::new();
        for _ in 0..300 {
            let mut v = [0.0; 7];
            for x in &mut v {
                *x = rng.gen_range(0.0..4.0f64).round();
            }
            archive.insert(&c, obj(v));
            snapshots.push(archive.members().iter().map(|m| m.objectives).collect());
        }
        // Every vector from an earlier snapshot stays covered by the final
        // archive: something there dominates or equals it.
        let last = snapshots.last().unwrap();
        for snap in &snapshots {
            for v in snap {
                let covered = last.iter().any(|w| {
                    w == v || dominates(&Evaluation::Valid(*w), &Evaluation::Valid(*v))
                });
                assert!(covered, "vector {v:?} regressed");
            }
        }
        // And the archive itself is mutually non-dominated.
        for a in last {
            for b in last {
                assert!(!dominates(&Evaluation::Valid(*a), &Evaluation::Valid(*b)) || a == b);
            }
        }
    }

    #[test]
    fn evolve_small_scenario_converges_with_valid_front() {
        let s = small_scenario();
        let result = evolve(&s, &cfg(42)).unwrap();
        assert!(result.converged, "ran {} gens", result.generations_run);
        assert!(!result.front.is_empty());
        assert!(result.generations_run <= 60);
        // Front is mutually non-dominated.
        for a in &result.front {
            for b in &result.front {
                let (ea, eb) = (Evaluation::Valid(a.objectives), Evaluation::Valid(b.objectives));
                assert!(!dominates(&ea, &eb) || a.objectives == b.objectives);
            }
        }
    }

    #[test]
    fn evolve_single_generation_does_not_converge() {
        let s = small_scenario();
        let mut config = cfg(1);
        config.max_gens = 1;
        let result = evolve(&s, &config).unwrap();
        assert_eq!(result.generations_run, 1);
        assert!(!result.converged);
    }

    #[test]
    fn evolve_is_deterministic_for_a_seed() {
        let s = small_scenario();
        let mut config = cfg(9);
        config.max_gens = 8;
        config.stagnation_gens = 3;
        let a = evolve(&s, &config).unwrap();
        let b = evolve(&s, &config).unwrap();
        assert_eq!(a.generations_run, b.generations_run);
        assert_eq!(
            serde_json::to_string(&a.front).unwrap(),
            serde_json::to_string(&b.front).unwrap()
        );
        assert_eq!(
            serde_json::to_string(&a.history).unwrap(),
            serde_json::to_string(&b.history).unwrap()
        );
    }

    #[test]
    fn forced_single_plan_front_matches_exhaustive_enumeration() {
        // One task, one capable UAV, one GCS: only profile choices vary.
        // The front must be exactly the non-dominated objective vectors of
        // the four feasible profile combinations.
        let mut s = generate_scenario(
            &DatasetSpec { tasks: 1, multi_uav_tasks: 0, uavs: 1, gcss: 1, nfzs: 0, time_deps: 0 },
            55,
        )
        .unwrap();
        s.uavs[0].initial_fuel = 500.0;
        s.uavs[0].max_flight_time = 50_000.0;
        s.uavs[0].max_range = 2000.0;
        let ev = Evaluator::new(&s, 1.0, EvalOptions::default());
        let mut expected = ParetoArchive::default();
        for path in [CruiseChoice::Min, CruiseChoice::Max] {
            for ret in [CruiseChoice::Min, CruiseChoice::Max] {
                let c = Chromosome {
                    task_assign: vec![vec![1]],
                    path_fp: vec![vec![path]],
                    sensor_assign: vec![vec![s.tasks[0].required_sensor]],
                    order_perm: vec![1],
                    gcs_assign: vec![1],
                    return_fp: vec![ret],
                };
                if let Evaluation::Valid(o) = ev.fitness(&c) {
                    expected.insert(&c, o);
                }
            }
        }
        assert!(!expected.is_empty());
        let result = evolve(&s, &cfg(3)).unwrap();
        let mut got: Vec<[i64; 7]> = result
            .front
            .iter()
            .map(|m| m.objectives.as_array().map(|v| (v * 1e6).round() as i64))
            .collect();
        let mut want: Vec<[i64; 7]> = expected
            .members()
            .iter()
            .map(|m| m.objectives.as_array().map(|v| (v * 1e6).round() as i64))
            .collect();
        got.sort_unstable();
        want.sort_unstable();
        assert_eq!(got, want);
    }
}
