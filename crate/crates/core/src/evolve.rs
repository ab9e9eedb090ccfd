//! Multiobjective (μ+λ) search over circuit bitstrings.
//!
//! Objectives: test accuracy (maximized) and the objective balance
//! `O_B = C + C·accuracy²` (minimized), where `C` is the weighted circuit
//! complexity. Survivors are chosen by NSGA-II; a Pareto archive collects
//! every non-dominated fitness seen so far.

use std::collections::HashMap;
use std::time::Instant;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::build_feature_map;
use crate::error::{Error, Result};
use crate::genome::{decode_genome, genome_length, BitString, CircuitGenome, EncodingMode};
use crate::reduce::{
    max_components, pca_fit, pca_transform, standardize_apply, standardize_fit, FeatureMatrix,
};
use crate::svm::{self, SvmConfig, TrainedQsvm};

/// The two objectives plus the raw complexity they derive from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessPair {
    pub accuracy: f64,
    pub objective_balance: f64,
    pub complexity: f64,
}

impl FitnessPair {
    /// `O_B = C + C·accuracy²`.
    pub fn new(accuracy: f64, complexity: f64) -> Self {
        FitnessPair {
            accuracy,
            objective_balance: complexity + complexity * accuracy * accuracy,
            complexity,
        }
    }
}

/// Pareto dominance: accuracy no worse, balance no worse, one strictly better.
pub fn dominates(a: &FitnessPair, b: &FitnessPair) -> bool {
    a.accuracy >= b.accuracy
        && a.objective_balance <= b.objective_balance
        && (a.accuracy > b.accuracy || a.objective_balance < b.objective_balance)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub bits: BitString,
    pub fitness: Option<FitnessPair>,
    /// Creation order, used as the final tie-break.
    pub eval_id: u64,
}

impl Individual {
    pub fn new(bits: BitString, eval_id: u64) -> Self {
        Individual {
            bits,
            fitness: None,
            eval_id,
        }
    }

    fn fit(&self) -> &FitnessPair {
        self.fitness
            .as_ref()
            .expect("individual must be evaluated before selection")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub mu: usize,
    pub lambda: usize,
    pub p_cross: f64,
    pub p_ind: f64,
    pub p_gen: f64,
    pub max_generations: usize,
    /// Stop after this many generations without an archive change.
    pub patience: Option<usize>,
    pub seed: u64,
    pub qubits: usize,
    pub layers: usize,
    pub mode: EncodingMode,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            mu: 50,
            lambda: 20,
            p_cross: 0.6,
            p_ind: 0.4,
            p_gen: 0.3,
            max_generations: 2000,
            patience: Some(200),
            seed: 0,
            qubits: 6,
            layers: 11,
            mode: EncodingMode::PcaHeader,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_cross", self.p_cross), ("p_ind", self.p_ind), ("p_gen", self.p_gen)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} is not a probability")));
            }
        }
        if self.mu == 0 || self.lambda == 0 {
            return Err(Error::Config("mu and lambda must be at least 1".into()));
        }
        if self.qubits == 0 || self.layers == 0 {
            return Err(Error::Config("qubits and layers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn genome_length(&self) -> usize {
        genome_length(self.qubits, self.layers, self.mode)
    }

    pub fn decode(&self, bits: &BitString) -> Result<CircuitGenome> {
        decode_genome(bits, self.qubits, self.layers, self.mode)
    }
}

/// Standardized, split data shared read-only by every fitness evaluation.
///
/// In PCA mode the principal axes are fitted once on the training rows with
/// the largest usable component count; an individual asking for `r`
/// components sees the leading `r` columns, which equals fitting with `r`
/// directly.
#[derive(Debug, Clone)]
pub struct PreparedData {
    train: FeatureMatrix,
    test: FeatureMatrix,
    y_train: Vec<f64>,
    y_test: Vec<f64>,
    pca_components: Option<usize>,
}

impl PreparedData {
    /// Features are used as given; the individual has no PCA header.
    pub fn fixed(train: FeatureMatrix, test: FeatureMatrix) -> Result<Self> {
        Self::build(train, test, None)
    }

    /// Projects onto principal axes of `train`. With `rescale`, every
    /// component score is mapped to `[−1, 1]` over the training rows.
    pub fn pca(train: FeatureMatrix, test: FeatureMatrix, max_r: usize, rescale: bool) -> Result<Self> {
        let r = max_r.min(max_components(train.nrows(), train.ncols()));
        let model = pca_fit(&train, r)?;
        let mut train_z = pca_transform(&model, &train)?;
        let mut test_z = pca_transform(&model, &test)?;
        if rescale {
            let params = standardize_fit(&train_z)?;
            train_z = standardize_apply(&params, &train_z)?;
            test_z = standardize_apply(&params, &test_z)?;
        }
        Self::build(train_z, test_z, Some(model.n_components()))
    }

    fn build(train: FeatureMatrix, test: FeatureMatrix, pca_components: Option<usize>) -> Result<Self> {
        let y_train = train
            .signed_labels()
            .ok_or_else(|| Error::Input("training rows are unlabeled".into()))?;
        let y_test = test
            .signed_labels()
            .ok_or_else(|| Error::Input("test rows are unlabeled".into()))?;
        if test.nrows() == 0 {
            return Err(Error::Input("test set is empty".into()));
        }
        if train.ncols() != test.ncols() {
            return Err(Error::Input("train and test widths differ".into()));
        }
        Ok(PreparedData {
            train,
            test,
            y_train,
            y_test,
            pca_components,
        })
    }

    pub fn train(&self) -> &FeatureMatrix {
        &self.train
    }

    pub fn test(&self) -> &FeatureMatrix {
        &self.test
    }

    pub fn y_train(&self) -> &[f64] {
        &self.y_train
    }

    pub fn y_test(&self) -> &[f64] {
        &self.y_test
    }

    /// Number of PCA columns available, if this is PCA data.
    pub fn pca_components(&self) -> Option<usize> {
        self.pca_components
    }

    /// Train and test features seen by `genome`.
    pub fn features_for(&self, genome: &CircuitGenome) -> Result<(FeatureMatrix, FeatureMatrix)> {
        match (genome.pca_components(), self.pca_components) {
            (Some(r), Some(avail)) => {
                let r = r.min(avail);
                Ok((self.train.leading_columns(r), self.test.leading_columns(r)))
            }
            (None, None) => Ok((self.train.clone(), self.test.clone())),
            (Some(_), None) => Err(Error::Config(
                "genome carries a PCA header but the data was prepared without PCA".into(),
            )),
            (None, Some(_)) => Err(Error::Config(
                "data was prepared for PCA but the genome has no PCA header".into(),
            )),
        }
    }
}

/// Everything produced while scoring one genome.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub fitness: FitnessPair,
    pub model: TrainedQsvm,
    pub input_dim: usize,
    pub train_accuracy: f64,
}

/// Decode → feature map → kernels → SVM → test accuracy → complexity.
pub fn evaluate_genome(genome: &CircuitGenome, data: &PreparedData, svm_config: &SvmConfig) -> Result<Evaluation> {
    let (train, test) = data.features_for(genome)?;
    let circuit = build_feature_map(genome, train.ncols())?;
    let mut k_train = circuit.gram_matrix(&train)?;
    svm::clamp_psd(&mut k_train)?;
    let model = svm::fit(&k_train, data.y_train(), svm_config)?;
    let k_test = circuit.kernel_matrix(&test, &train)?;
    let accuracy = svm::accuracy(&model.predict(&k_test)?, data.y_test())?;
    let train_accuracy = svm::accuracy(&model.predict(&k_train)?, data.y_train())?;
    Ok(Evaluation {
        fitness: FitnessPair::new(accuracy, circuit.complexity()),
        model,
        input_dim: train.ncols(),
        train_accuracy,
    })
}

/// Highest complexity a `qubits × layers` grid can reach.
pub fn worst_complexity(qubits: usize, layers: usize) -> f64 {
    if qubits == 1 {
        layers as f64
    } else {
        2.0 * layers as f64
    }
}

/// Fitness of one bitstring. Failures are logged and scored as worst case
/// (accuracy 0, full-grid complexity) so a search never halts.
pub fn evaluate_fitness(bits: &BitString, data: &PreparedData, ga: &GaConfig, svm_config: &SvmConfig) -> FitnessPair {
    let result = ga
        .decode(bits)
        .and_then(|g| evaluate_genome(&g, data, svm_config));
    match result {
        Ok(e) => e.fitness,
        Err(e) => {
            warn!("evaluation of {bits} failed: {e}");
            FitnessPair::new(0.0, worst_complexity(ga.qubits, ga.layers))
        }
    }
}

/// Flipbit mutation. Returns whether any bit changed.
pub fn flipbit_mutation<R: Rng + ?Sized>(bits: &mut BitString, p_ind: f64, p_gen: f64, rng: &mut R) -> bool {
    if !rng.gen_bool(p_ind) {
        return false;
    }
    let mut changed = false;
    for i in 0..bits.len() {
        if rng.gen_bool(p_gen) {
            bits.flip(i);
            changed = true;
        }
    }
    changed
}

/// Swaps `[start, end)` between the two parents.
pub fn crossover_at(a: &mut BitString, b: &mut BitString, start: usize, end: usize) {
    a.swap_segment(b, start, end);
}

/// Two-point crossover with cut points `1 ≤ i < j < L` drawn uniformly.
/// Returns whether a swap happened.
pub fn two_point_crossover<R: Rng + ?Sized>(a: &mut BitString, b: &mut BitString, p_cross: f64, rng: &mut R) -> bool {
    assert_eq!(a.len(), b.len(), "crossover parents must have equal length");
    let len = a.len();
    if len < 3 || !rng.gen_bool(p_cross) {
        return false;
    }
    let mut cuts = rand::seq::index::sample(rng, len - 1, 2).into_vec();
    cuts.sort_unstable();
    crossover_at(a, b, cuts[0] + 1, cuts[1] + 1);
    true
}

/// Fast non-dominated sort; fronts hold indices in ascending order.
pub fn non_dominated_sort(fits: &[FitnessPair]) -> Vec<Vec<usize>> {
    let n = fits.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for p in 0..n {
        for q in 0..n {
            if dominates(&fits[p], &fits[q]) {
                dominates_list[p].push(q);
            } else if dominates(&fits[q], &fits[p]) {
                dominated_by_count[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&p| dominated_by_count[p] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominates_list[p] {
                dominated_by_count[q] -= 1;
                if dominated_by_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance of each member of `front` (same order), objectives
/// normalized by their range over the front. Boundary points are infinite.
pub fn crowding_distance(fits: &[FitnessPair], front: &[usize]) -> Vec<f64> {
    let mut dist = vec![0.0; front.len()];
    if front.len() <= 2 {
        return vec![f64::INFINITY; front.len()];
    }
    let objectives: [fn(&FitnessPair) -> f64; 2] = [|f| f.accuracy, |f| f.objective_balance];
    for value in objectives {
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| {
            value(&fits[front[a]])
                .total_cmp(&value(&fits[front[b]]))
                .then(front[a].cmp(&front[b]))
        });
        let lo = value(&fits[front[order[0]]]);
        let hi = value(&fits[front[*order.last().unwrap()]]);
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        dist[order[0]] = f64::INFINITY;
        dist[*order.last().unwrap()] = f64::INFINITY;
        for w in 1..order.len() - 1 {
            let gap = value(&fits[front[order[w + 1]]]) - value(&fits[front[order[w - 1]]]);
            dist[order[w]] += gap / range;
        }
    }
    dist
}

/// Front rank and crowding distance per individual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    pub crowding: f64,
}

pub fn rank_population(population: &[Individual]) -> Vec<RankInfo> {
    let fits: Vec<FitnessPair> = population.iter().map(|i| *i.fit()).collect();
    let mut info = vec![RankInfo { rank: 0, crowding: 0.0 }; population.len()];
    for (rank, front) in non_dominated_sort(&fits).iter().enumerate() {
        for (&idx, d) in front.iter().zip(crowding_distance(&fits, front)) {
            info[idx] = RankInfo { rank, crowding: d };
        }
    }
    info
}

/// NSGA-II environmental selection of `mu` survivors.
pub fn nsga2_select(population: &[Individual], mu: usize) -> Vec<Individual> {
    let fits: Vec<FitnessPair> = population.iter().map(|i| *i.fit()).collect();
    let mut out = Vec::with_capacity(mu.min(population.len()));
    for front in non_dominated_sort(&fits) {
        let missing = mu - out.len();
        if missing == 0 {
            break;
        }
        let dist = crowding_distance(&fits, &front);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| {
            dist[b]
                .total_cmp(&dist[a])
                .then(population[front[a]].eval_id.cmp(&population[front[b]].eval_id))
        });
        out.extend(order.iter().take(missing).map(|&k| population[front[k]].clone()));
    }
    out
}

/// Binary tournament: lower rank, then larger crowding, then older.
fn tournament<'a, R: Rng + ?Sized>(population: &'a [Individual], info: &[RankInfo], rng: &mut R) -> &'a Individual {
    let a = rng.gen_range(0..population.len());
    let b = rng.gen_range(0..population.len());
    let better = |x: usize, y: usize| {
        info[x]
            .rank
            .cmp(&info[y].rank)
            .then(info[y].crowding.total_cmp(&info[x].crowding))
            .then(population[x].eval_id.cmp(&population[y].eval_id))
            .is_le()
    };
    if better(a, b) {
        &population[a]
    } else {
        &population[b]
    }
}

/// Non-dominated individuals seen so far, one per distinct fitness.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoArchive {
    members: Vec<Individual>,
}

impl ParetoArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Inserts every candidate not dominated by (or equal in fitness to) a
    /// member, evicting members it dominates. Returns whether anything changed.
    pub fn update<'a, I: IntoIterator<Item = &'a Individual>>(&mut self, candidates: I) -> bool {
        let mut changed = false;
        for cand in candidates {
            let f = cand.fit();
            if self
                .members
                .iter()
                .any(|m| dominates(m.fit(), f) || m.fit() == f)
            {
                continue;
            }
            self.members.retain(|m| !dominates(f, m.fit()));
            self.members.push(cand.clone());
            changed = true;
        }
        if changed {
            self.members.sort_by(|a, b| {
                b.fit()
                    .accuracy
                    .total_cmp(&a.fit().accuracy)
                    .then(a.fit().objective_balance.total_cmp(&b.fit().objective_balance))
                    .then(a.eval_id.cmp(&b.eval_id))
            });
        }
        changed
    }

    /// Highest accuracy, then lowest objective balance, then oldest.
    pub fn best(&self) -> Option<&Individual> {
        self.members.iter().min_by(|a, b| {
            b.fit()
                .accuracy
                .total_cmp(&a.fit().accuracy)
                .then(a.fit().objective_balance.total_cmp(&b.fit().objective_balance))
                .then(a.eval_id.cmp(&b.eval_id))
        })
    }

    pub fn is_non_dominated(&self) -> bool {
        self.members.iter().all(|a| {
            self.members
                .iter()
                .all(|b| !dominates(a.fit(), b.fit()))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_accuracy: f64,
    pub best_objective_balance: f64,
    pub archive_size: usize,
    pub evaluations: u64,
    pub wall_clock_secs: f64,
    pub median_complexity: f64,
}

/// One fitness computation, kept for auditing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub eval_id: u64,
    pub generation: usize,
    pub fitness: FitnessPair,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub archive: ParetoArchive,
    pub best: Individual,
    /// One row per completed generation (generation 1 onward).
    pub history: Vec<GenerationStats>,
    pub initial_median_complexity: f64,
    pub evaluations: Vec<EvaluationRecord>,
    pub total_evaluations: u64,
    pub generations_run: usize,
    pub stopped_on_stagnation: bool,
}

/// Derives an independent RNG for `(seed, generation, slot)`.
pub fn stream_rng(seed: u64, generation: usize, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(generation as u64)));
    rng.set_stream(slot);
    rng
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SELECTION_SLOT: u64 = u64::MAX;

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Memoizing, parallel evaluator.
struct Evaluator<'a> {
    data: &'a PreparedData,
    ga: &'a GaConfig,
    svm: &'a SvmConfig,
    cache: HashMap<BitString, FitnessPair>,
    records: Vec<EvaluationRecord>,
    count: u64,
}

impl Evaluator<'_> {
    fn evaluate(&mut self, individuals: &mut [Individual], generation: usize) {
        let mut pending: Vec<BitString> = individuals
            .iter()
            .filter(|i| i.fitness.is_none() && !self.cache.contains_key(&i.bits))
            .map(|i| i.bits.clone())
            .collect();
        pending.sort();
        pending.dedup();
        let scored: Vec<FitnessPair> = pending
            .par_iter()
            .map(|b| evaluate_fitness(b, self.data, self.ga, self.svm))
            .collect();
        self.cache.extend(pending.into_iter().zip(scored));
        for ind in individuals.iter_mut().filter(|i| i.fitness.is_none()) {
            let f = self.cache[&ind.bits];
            ind.fitness = Some(f);
            self.count += 1;
            self.records.push(EvaluationRecord {
                eval_id: ind.eval_id,
                generation,
                fitness: f,
            });
        }
    }
}

/// Runs the search to completion.
pub fn run(ga: &GaConfig, svm_config: &SvmConfig, data: &PreparedData) -> Result<RunOutcome> {
    run_with_observer(ga, svm_config, data, |_, _, _| {})
}

/// Like [`run`], calling `observer(stats, archive, population)` after every
/// generation.
pub fn run_with_observer<F>(ga: &GaConfig, svm_config: &SvmConfig, data: &PreparedData, mut observer: F) -> Result<RunOutcome>
where
    F: FnMut(&GenerationStats, &ParetoArchive, &[Individual]),
{
    ga.validate()?;
    svm_config.validate()?;
    let start = Instant::now();
    let len = ga.genome_length();
    let mut next_id = 0u64;
    let mut fresh = |bits: BitString| {
        let ind = Individual::new(bits, next_id);
        next_id += 1;
        ind
    };
    let mut evaluator = Evaluator {
        data,
        ga,
        svm: svm_config,
        cache: HashMap::new(),
        records: Vec::new(),
        count: 0,
    };

    let mut init_rng = stream_rng(ga.seed, 0, SELECTION_SLOT);
    let mut population: Vec<Individual> = (0..ga.mu)
        .map(|_| fresh(BitString::random(len, &mut init_rng)))
        .collect();
    evaluator.evaluate(&mut population, 0);
    let initial_median_complexity = median(
        &mut population
            .iter()
            .map(|i| i.fit().complexity)
            .collect::<Vec<_>>(),
    );
    let mut archive = ParetoArchive::new();
    archive.update(&population);

    let mut history = Vec::with_capacity(ga.max_generations);
    let mut stale = 0usize;
    let mut stopped_on_stagnation = false;
    let mut generations_run = 0;

    for generation in 1..=ga.max_generations {
        let info = rank_population(&population);
        let mut sel_rng = stream_rng(ga.seed, generation, SELECTION_SLOT);
        let parents: Vec<&Individual> = (0..ga.lambda.div_ceil(2) * 2)
            .map(|_| tournament(&population, &info, &mut sel_rng))
            .collect();

        let mut offspring = Vec::with_capacity(ga.lambda);
        for (pair, chunk) in parents.chunks(2).enumerate() {
            let mut rng = stream_rng(ga.seed, generation, pair as u64);
            let (mut a, mut b) = (chunk[0].clone(), chunk[1].clone());
            let crossed = two_point_crossover(&mut a.bits, &mut b.bits, ga.p_cross, &mut rng);
            for child in [&mut a, &mut b] {
                let mutated = flipbit_mutation(&mut child.bits, ga.p_ind, ga.p_gen, &mut rng);
                if crossed || mutated {
                    child.fitness = None;
                }
            }
            for child in [a, b] {
                if offspring.len() < ga.lambda {
                    let fitness = child.fitness;
                    let mut c = fresh(child.bits);
                    c.fitness = fitness;
                    offspring.push(c);
                }
            }
        }
        evaluator.evaluate(&mut offspring, generation);

        let changed = archive.update(&offspring);
        population.extend(offspring);
        population = nsga2_select(&population, ga.mu);

        let best = archive.best().expect("archive is never empty after evaluation");
        let stats = GenerationStats {
            generation,
            best_accuracy: best.fit().accuracy,
            best_objective_balance: archive
                .members()
                .iter()
                .map(|m| m.fit().objective_balance)
                .fold(f64::INFINITY, f64::min),
            archive_size: archive.len(),
            evaluations: evaluator.count,
            wall_clock_secs: start.elapsed().as_secs_f64(),
            median_complexity: median(
                &mut population
                    .iter()
                    .map(|i| i.fit().complexity)
                    .collect::<Vec<_>>(),
            ),
        };
        observer(&stats, &archive, &population);
        history.push(stats);
        generations_run = generation;

        stale = if changed { 0 } else { stale + 1 };
        if ga.patience.is_some_and(|p| stale >= p) {
            stopped_on_stagnation = true;
            break;
        }
    }

    let best = archive
        .best()
        .cloned()
        .expect("archive is never empty after evaluation");
    Ok(RunOutcome {
        archive,
        best,
        history,
        initial_median_complexity,
        evaluations: evaluator.records,
        total_evaluations: evaluator.count,
        generations_run,
        stopped_on_stagnation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(acc: f64, ob: f64) -> FitnessPair {
        FitnessPair {
            accuracy: acc,
            objective_balance: ob,
            complexity: ob,
        }
    }

    fn ind(acc: f64, ob: f64, id: u64) -> Individual {
        Individual {
            bits: BitString::zeros(4),
            fitness: Some(fp(acc, ob)),
            eval_id: id,
        }
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&fp(0.9, 3.0), &fp(0.8, 4.0)));
        assert!(!dominates(&fp(0.9, 5.0), &fp(0.8, 4.0)));
        assert!(!dominates(&fp(0.8, 4.0), &fp(0.8, 4.0)));
        assert!(dominates(&fp(0.8, 3.0), &fp(0.8, 4.0)));
    }

    #[test]
    fn objective_balance_arithmetic() {
        let f = FitnessPair::new(0.8, 2.5);
        assert!((f.objective_balance - 4.1).abs() < 1e-12);
        assert_eq!(FitnessPair::new(0.7, 0.0).objective_balance, 0.0);
    }

    #[test]
    fn mutation_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let orig: BitString = "0110100111".parse().unwrap();
        let mut b = orig.clone();
        assert!(!flipbit_mutation(&mut b, 0.0, 1.0, &mut rng));
        assert_eq!(b, orig);
        assert!(flipbit_mutation(&mut b, 1.0, 1.0, &mut rng));
        assert_eq!(b.to_string(), "1001011000");
    }

    #[test]
    fn mutation_rate_matches_binomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut b = BitString::zeros(100_000);
        flipbit_mutation(&mut b, 1.0, 0.3, &mut rng);
        let frac = b.bits().iter().filter(|&&x| x == 1).count() as f64 / 1e5;
        assert!((frac - 0.3).abs() < 0.01, "{frac}");
    }

    #[test]
    fn crossover_segment_swap() {
        let mut a: BitString = "00000000".parse().unwrap();
        let mut b: BitString = "11111111".parse().unwrap();
        crossover_at(&mut a, &mut b, 2, 5);
        assert_eq!(a.to_string(), "00111000");
        assert_eq!(b.to_string(), "11000111");
    }

    #[test]
    fn crossover_probability_zero_copies() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut a: BitString = "0000".parse().unwrap();
        let mut b: BitString = "1111".parse().unwrap();
        assert!(!two_point_crossover(&mut a, &mut b, 0.0, &mut rng));
        assert_eq!((a.to_string(), b.to_string()), ("0000".into(), "1111".into()));
    }

    #[test]
    fn crossover_preserves_xor_and_cut_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let len = rng.gen_range(3..40);
            let (pa, pb) = (BitString::random(len, &mut rng), BitString::random(len, &mut rng));
            let (mut a, mut b) = (pa.clone(), pb.clone());
            two_point_crossover(&mut a, &mut b, 1.0, &mut rng);
            assert_eq!(a.len(), len);
            for i in 0..len {
                assert_eq!(a.get(i) ^ b.get(i), pa.get(i) ^ pb.get(i));
            }
            // Position 0 and L−1 are never inside [i, j) with 1 ≤ i < j < L.
            assert_eq!(a.get(0), pa.get(0));
        }
    }

    #[test]
    fn single_dominant_point_is_alone_in_front_zero() {
        let fits = [fp(0.9, 1.0), fp(0.8, 2.0), fp(0.7, 1.5)];
        let fronts = non_dominated_sort(&fits);
        assert_eq!(fronts[0], vec![0]);
    }

    #[test]
    fn extremes_survive_truncation() {
        let pop = vec![ind(0.6, 1.0, 0), ind(0.7, 2.0, 1), ind(0.8, 3.0, 2), ind(0.9, 4.0, 3)];
        for _ in 0..3 {
            let sel = nsga2_select(&pop, 3);
            let ids: Vec<u64> = sel.iter().map(|i| i.eval_id).collect();
            assert!(ids.contains(&0) && ids.contains(&3), "{ids:?}");
        }
    }

    #[test]
    fn ties_break_by_eval_id() {
        let pop = vec![ind(0.5, 1.0, 7), ind(0.5, 1.0, 3), ind(0.5, 1.0, 5)];
        let sel = nsga2_select(&pop, 2);
        assert_eq!(sel.iter().map(|i| i.eval_id).collect::<Vec<_>>(), vec![3, 5]);
    }

    #[test]
    fn archive_keeps_only_non_dominated() {
        let mut a = ParetoArchive::new();
        assert!(a.update(&[ind(0.7, 2.0, 0), ind(0.8, 3.0, 1)]));
        assert!(!a.update(&[ind(0.7, 2.5, 2), ind(0.8, 3.0, 3)]));
        assert!(a.update(&[ind(0.9, 1.0, 4)]));
        assert_eq!(a.len(), 1);
        assert_eq!(a.best().unwrap().eval_id, 4);
        assert!(a.is_non_dominated());
    }

    #[test]
    fn stream_rngs_are_independent_of_order() {
        let x: u64 = stream_rng(9, 3, 1).gen();
        let _: u64 = stream_rng(9, 3, 0).gen();
        assert_eq!(x, stream_rng(9, 3, 1).gen::<u64>());
        assert_ne!(x, stream_rng(9, 4, 1).gen::<u64>());
    }
}
