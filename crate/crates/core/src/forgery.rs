//! The forgery game: search-space analytics, the random-sampling and
//! neighbor-replacement attacks, and the plain gradient-replica detector that
//! the detection circuit mirrors.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{FixedDataset, TaskKind};
use crate::error::{Error, Result};
use crate::fixed::{self, FixedConfig};
use crate::training::{
    self, fixed_grad_dist_squared, grad_distance, LrParams, Minibatch, ModelParams,
};

/// Attack budgets are desk-scale; draws beyond this are clamped.
pub const MAX_ATTACK_BUDGET: u64 = 100_000;

// ----- search space analytics ---------------------------------------------------

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut res = BigUint::one();
    for i in 0..k.min(n - k) {
        res = res * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    res
}

/// Renders a big integer in scientific notation with two significant figures
/// (a trailing `.0` is dropped, e.g. `9E+307`).
pub fn sci2(v: &BigUint) -> String {
    let digits = v.to_string();
    let mut exp = digits.len() as i64 - 1;
    let d = |i: usize| -> u32 {
        digits
            .as_bytes()
            .get(i)
            .map_or(0, |b| (*b - b'0') as u32)
    };
    let mut mantissa = d(0) * 10 + d(1);
    if d(2) >= 5 {
        mantissa += 1;
    }
    if mantissa >= 100 {
        mantissa /= 10;
        exp += 1;
    }
    if mantissa % 10 == 0 {
        format!("{}E+{}", mantissa / 10, exp)
    } else {
        format!("{}.{}E+{}", mantissa / 10, mantissa % 10, exp)
    }
}

/// Search-space sizes for the forgery game: the forging space
/// `C(|D|-|U|, batch)`, the target space `2^(|D|-|U|)`, and the verifiable-
/// randomness reduction `ceil(|D| / batch)`.
#[derive(Clone, Debug)]
pub struct SearchSpaceReport {
    pub dataset_size: u64,
    pub unlearned: u64,
    pub batch: u64,
    pub forging_space: BigUint,
    pub target_space: BigUint,
    pub reduced_forging_space: u64,
}

impl SearchSpaceReport {
    pub fn forging_space_sci(&self) -> String {
        sci2(&self.forging_space)
    }

    pub fn target_space_sci(&self) -> String {
        sci2(&self.target_space)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dataset_size": self.dataset_size,
            "unlearned": self.unlearned,
            "batch": self.batch,
            "forging_space": self.forging_space.to_string(),
            "forging_space_sci": self.forging_space_sci(),
            "target_space": self.target_space.to_string(),
            "target_space_sci": self.target_space_sci(),
            "reduced_forging_space": self.reduced_forging_space,
        })
    }
}

pub fn search_space_sizes(dataset_size: u64, unlearned: u64, batch: u64) -> Result<SearchSpaceReport> {
    if unlearned >= dataset_size || batch == 0 || batch > dataset_size - unlearned {
        return Err(Error::BadParams(format!(
            "need |U| < |D| and 1 <= batch <= |D| - |U| (got D={dataset_size}, U={unlearned}, batch={batch})"
        )));
    }
    let remaining = dataset_size - unlearned;
    Ok(SearchSpaceReport {
        dataset_size,
        unlearned,
        batch,
        forging_space: binomial(remaining, batch),
        target_space: BigUint::one() << remaining as usize,
        reduced_forging_space: dataset_size.div_ceil(batch),
    })
}

/// Probability of at least one success over Bernoulli trials:
/// `1 - (1 - p)^trials`, evaluated in log space.
pub fn collision_success_probability(p: f64, trials: &BigUint) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::BadParams(format!("p = {p} outside (0, 1)")));
    }
    if trials.is_zero() {
        return Err(Error::BadParams("trials must be >= 1".into()));
    }
    let t = trials.to_f64().unwrap_or(f64::MAX);
    Ok(-f64::exp_m1(t * f64::ln_1p(-p)))
}

// ----- gradient plumbing ---------------------------------------------------------

/// Normalized minibatch gradient (flattened) at the given parameters.
pub fn batch_gradient(
    params: &ModelParams,
    dataset: &FixedDataset,
    indices: &[usize],
) -> Result<Vec<f64>> {
    let batch = Minibatch(indices.to_vec());
    let sel = training::MaskSelection::none();
    match params {
        ModelParams::Lr(p) => {
            let (sum, n) = training::lr_masked_grad_sum(p, dataset, &sel, &batch)?;
            let g = training::flatten_lr(&sum);
            Ok(g.iter().map(|v| v / n as f64).collect())
        }
        ModelParams::Nn(p) => {
            let (sum, n) = training::nn_masked_grad_sum(p, dataset, &sel, &batch)?;
            let g = training::flatten_nn(&sum);
            Ok(g.iter().map(|v| v / n as f64).collect())
        }
    }
}

/// One sample's gradient (divisor 1), flattened.
pub fn per_sample_gradient(
    params: &ModelParams,
    dataset: &FixedDataset,
    index: usize,
) -> Result<Vec<f64>> {
    let g = batch_gradient(params, dataset, &[index])?;
    Ok(g)
}

// ----- attacks -------------------------------------------------------------------

/// A forging attempt: the candidate minibatch, the target it imitates, and
/// the forgery error achieved.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ForgeryInstance {
    pub target: Vec<usize>,
    pub candidate: Vec<usize>,
    pub epsilon: f64,
    pub draws_evaluated: u64,
}

/// Per-draw attack trace row for CSV reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AttackTraceRow {
    pub candidate_id: u64,
    pub epsilon: f64,
}

fn check_target(dataset: &FixedDataset, unlearned: &[usize], target: &Minibatch) -> Result<()> {
    target.validate(dataset.samples())?;
    if !target.0.iter().any(|i| unlearned.contains(i)) {
        return Err(Error::BadParams(
            "target minibatch must intersect the unlearned set".into(),
        ));
    }
    Ok(())
}

/// Random-sampling forgery: draws `budget` candidate minibatches from
/// `D \ U` and keeps the one with the smallest gradient distance to the
/// target. Ties prefer the lexicographically smaller index set.
pub fn attack_random_sampling(
    params: &ModelParams,
    dataset: &FixedDataset,
    unlearned: &[usize],
    target: &Minibatch,
    forging_size: usize,
    budget: u64,
    seed: u64,
) -> Result<(ForgeryInstance, Vec<AttackTraceRow>)> {
    check_target(dataset, unlearned, target)?;
    let pool: Vec<usize> = (0..dataset.samples())
        .filter(|i| !unlearned.contains(i))
        .collect();
    if forging_size == 0 || pool.len() < forging_size {
        return Err(Error::NoCandidates);
    }
    let budget = budget.min(MAX_ATTACK_BUDGET).max(1);
    let target_grad = batch_gradient(params, dataset, &target.0)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut trace = Vec::with_capacity(budget as usize);
    for draw in 0..budget {
        let mut candidate: Vec<usize> = pool
            .choose_multiple(&mut rng, forging_size)
            .copied()
            .collect();
        candidate.sort_unstable();
        let grad = batch_gradient(params, dataset, &candidate)?;
        let eps = grad_distance(&grad, &target_grad)?;
        trace.push(AttackTraceRow {
            candidate_id: draw,
            epsilon: eps,
        });
        let better = match &best {
            None => true,
            Some((be, bc)) => eps < *be || (eps == *be && candidate < *bc),
        };
        if better {
            best = Some((eps, candidate));
        }
    }
    let (epsilon, candidate) = best.expect("budget >= 1");
    Ok((
        ForgeryInstance {
            target: target.0.clone(),
            candidate,
            epsilon,
            draws_evaluated: budget,
        },
        trace,
    ))
}

/// Exact label-vector match (the "same class" relation).
fn same_class(dataset: &FixedDataset, a: usize, b: usize) -> bool {
    dataset.labels_real[a] == dataset.labels_real[b]
}

fn x_distance(dataset: &FixedDataset, a: usize, b: usize) -> f64 {
    dataset.features_real[a]
        .iter()
        .zip(&dataset.features_real[b])
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// Nearest class-wise neighbor of `u` within `D \ U` (excluding `exclude`),
/// ties broken by smallest index.
pub fn nearest_class_neighbor(
    dataset: &FixedDataset,
    unlearned: &[usize],
    u: usize,
    exclude: &[usize],
) -> Result<usize> {
    let mut best: Option<(f64, usize)> = None;
    for i in 0..dataset.samples() {
        if i == u || unlearned.contains(&i) || exclude.contains(&i) {
            continue;
        }
        if !same_class(dataset, i, u) {
            continue;
        }
        let d = x_distance(dataset, i, u);
        let better = match best {
            None => true,
            Some((bd, bi)) => d < bd || (d == bd && i < bi),
        };
        if better {
            best = Some((d, i));
        }
    }
    best.map(|(_, i)| i).ok_or(Error::NoSameClassNeighbor)
}

/// Neighbor-replacement forgery: swaps every unlearned member of the target
/// minibatch for its nearest class-wise neighbor and reports the achieved
/// forgery error.
pub fn attack_neighbor_replacement(
    params: &ModelParams,
    dataset: &FixedDataset,
    unlearned: &[usize],
    target: &Minibatch,
) -> Result<ForgeryInstance> {
    check_target(dataset, unlearned, target)?;
    let mut candidate = target.0.clone();
    for slot in 0..candidate.len() {
        if unlearned.contains(&candidate[slot]) {
            let neighbor =
                nearest_class_neighbor(dataset, unlearned, candidate[slot], &candidate)?;
            candidate[slot] = neighbor;
        }
    }
    let g_target = batch_gradient(params, dataset, &target.0)?;
    let g_candidate = batch_gradient(params, dataset, &candidate)?;
    Ok(ForgeryInstance {
        target: target.0.clone(),
        candidate,
        epsilon: grad_distance(&g_candidate, &g_target)?,
        draws_evaluated: 1,
    })
}

// ----- replica detection -----------------------------------------------------------

/// Arithmetic used for the distance-vs-threshold comparison; declared per
/// run so circuit flags and plain flags agree exactly in fixed-point mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArithmeticMode {
    Double,
    FixedPoint,
}

/// Flags every minibatch member whose per-sample gradient lies within `xi`
/// of the unlearned sample's gradient. The plain counterpart of the
/// detection circuit.
pub fn detect_replicas(
    params: &ModelParams,
    dataset: &FixedDataset,
    minibatch: &Minibatch,
    unlearned_index: usize,
    xi: f64,
    mode: ArithmeticMode,
) -> Result<Vec<bool>> {
    if xi < 0.0 {
        return Err(Error::BadParams("threshold must be non-negative".into()));
    }
    minibatch.validate(dataset.samples())?;
    if unlearned_index >= dataset.samples() {
        return Err(Error::DimMismatch(format!(
            "unlearned index {unlearned_index} out of range"
        )));
    }
    match mode {
        ArithmeticMode::Double => {
            let gu = per_sample_gradient(params, dataset, unlearned_index)?;
            minibatch
                .0
                .iter()
                .map(|m| {
                    let gm = per_sample_gradient(params, dataset, *m)?;
                    Ok(grad_distance(&gm, &gu)? <= xi)
                })
                .collect()
        }
        ArithmeticMode::FixedPoint => {
            let cfg = dataset.config;
            let xi_enc = fixed::encode(xi, &cfg)?;
            let xi_sq = fixed::mul_rescale(xi_enc, xi_enc, &cfg)?;
            let xi_sq_int = fixed::signed_lift(xi_sq);
            let gu = fixed_sample_gradient(params, dataset, unlearned_index, &cfg)?;
            minibatch
                .0
                .iter()
                .map(|m| {
                    let gm = fixed_sample_gradient(params, dataset, *m, &cfg)?;
                    let d2 = fixed_grad_dist_squared(&gm, &gu, &cfg)?;
                    Ok(fixed::signed_lift(d2) <= xi_sq_int)
                })
                .collect()
        }
    }
}

/// Fixed-point per-sample gradient for either model kind; mirrors the
/// detection circuit's gradient lane.
pub fn fixed_sample_gradient(
    params: &ModelParams,
    dataset: &FixedDataset,
    index: usize,
    cfg: &FixedConfig,
) -> Result<Vec<crate::field::FieldElem>> {
    match params {
        ModelParams::Lr(p) => {
            if dataset.task != TaskKind::Regression {
                return Err(Error::BadParams("LR params on a classification task".into()));
            }
            let fp = training::FixedLrParams::encode(p, cfg)?;
            training::fixed_lr_per_sample_grad(
                &fp,
                &dataset.features[index],
                dataset.labels[index][0],
                cfg,
            )
        }
        ModelParams::Nn(p) => {
            if dataset.task != TaskKind::Classification {
                return Err(Error::NonBinaryLabel);
            }
            let fp = training::FixedNnParams::encode(p, cfg)?;
            let y_scaled: Vec<crate::field::FieldElem> = dataset.labels[index]
                .iter()
                .map(|bit| *bit * cfg.one())
                .collect();
            training::fixed_nn_per_sample_grad(&fp, &dataset.features[index], &y_scaled, cfg)
        }
    }
}
