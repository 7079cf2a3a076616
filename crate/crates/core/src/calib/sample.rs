use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gen::rng_from_seed;
use crate::histogram::{locate, uniform_edges};
use crate::item::{check_score, ScoredItem};

/// Equal-width score strata and each item's place in them.
#[derive(Debug, Clone, PartialEq)]
pub struct Stratification {
    pub bounds: Vec<f64>,
    pub index: Vec<usize>,
    pub counts: Vec<usize>,
}

impl Stratification {
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.counts.len()];
        for (i, &h) in self.index.iter().enumerate() {
            members[h].push(i);
        }
        members
    }
}

/// Assigns scores to `k` equal-width strata `[0, 1/k), ..., [(k-1)/k, 1]`.
pub fn stratify(scores: &[f64], k: usize) -> Result<Stratification> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "stratum count must be positive".into(),
        ));
    }
    let bounds = uniform_edges(k);
    let mut counts = vec![0; k];
    let mut index = Vec::with_capacity(scores.len());
    for &s in scores {
        check_score(s)?;
        let h = locate(&bounds, s);
        counts[h] += 1;
        index.push(h);
    }
    Ok(Stratification {
        bounds,
        index,
        counts,
    })
}

/// A labeled calibration sample together with its sampling design.
#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedSample {
    pub items: Vec<ScoredItem>,
    /// Stratum index of each entry of `items`.
    pub strata: Vec<usize>,
    pub bounds: Vec<f64>,
    /// Size of each stratum in the full base dataset.
    pub population_counts: Vec<usize>,
}

impl StratifiedSample {
    /// Describes an externally chosen sample by stratifying it and the base
    /// scores on `k` equal-width strata.
    pub fn from_parts(items: Vec<ScoredItem>, base_scores: &[f64], k: usize) -> Result<Self> {
        let population = stratify(base_scores, k)?;
        let sample_scores: Vec<f64> = items.iter().map(|i| i.score).collect();
        let within = stratify(&sample_scores, k)?;
        Ok(Self {
            items,
            strata: within.index,
            bounds: population.bounds,
            population_counts: population.counts,
        })
    }

    pub fn strata_count(&self) -> usize {
        self.population_counts.len()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Sample item indexes grouped by stratum.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.strata_count()];
        for (i, &h) in self.strata.iter().enumerate() {
            members[h].push(i);
        }
        members
    }

    pub fn sample_counts(&self) -> Vec<usize> {
        self.members().iter().map(Vec::len).collect()
    }
}

fn draw<R: Rng>(
    rng: &mut R,
    base: &[ScoredItem],
    strat: &Stratification,
    allocation: &[usize],
) -> StratifiedSample {
    let mut items = Vec::new();
    let mut strata = Vec::new();
    for (h, members) in strat.members().into_iter().enumerate() {
        let take = allocation[h].min(members.len());
        let mut chosen: Vec<usize> = index::sample(rng, members.len(), take)
            .into_iter()
            .map(|j| members[j])
            .collect();
        chosen.sort_unstable();
        for i in chosen {
            items.push(base[i].clone());
            strata.push(h);
        }
    }
    StratifiedSample {
        items,
        strata,
        bounds: strat.bounds.clone(),
        population_counts: strat.counts.clone(),
    }
}

fn stratify_items(base: &[ScoredItem], k: usize) -> Result<Stratification> {
    if base.is_empty() {
        return Err(Error::EmptyInput("base dataset"));
    }
    let scores: Vec<f64> = base.iter().map(|i| i.score).collect();
    stratify(&scores, k)
}

/// Up to `cap` items from each of `k` strata, uniformly without replacement.
pub fn sample_uniform_strata(
    base: &[ScoredItem],
    cap: usize,
    k: usize,
    seed: u64,
) -> Result<StratifiedSample> {
    let strat = stratify_items(base, k)?;
    let allocation: Vec<usize> = strat.counts.iter().map(|&n| n.min(cap)).collect();
    Ok(draw(&mut rng_from_seed(seed), base, &strat, &allocation))
}

/// `n` items uniformly without replacement, recorded as a single stratum.
pub fn sample_random(base: &[ScoredItem], n: usize, seed: u64) -> Result<StratifiedSample> {
    if n > base.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot draw {n} items from a dataset of {}",
            base.len()
        )));
    }
    let strat = stratify_items(base, 1)?;
    Ok(draw(&mut rng_from_seed(seed), base, &strat, &[n]))
}

/// Neyman allocation of `total` draws using the mean raw score of each
/// stratum as the Bernoulli variance proxy.
pub fn sample_neyman(
    base: &[ScoredItem],
    total: usize,
    k: usize,
    seed: u64,
) -> Result<StratifiedSample> {
    let strat = stratify_items(base, k)?;
    let mut sums = vec![0.0; k];
    for (item, &h) in base.iter().zip(&strat.index) {
        sums[h] += item.score;
    }
    let means: Vec<f64> = sums
        .iter()
        .zip(&strat.counts)
        .map(|(s, &n)| if n > 0 { s / n as f64 } else { 0.0 })
        .collect();
    let allocation = neyman_allocation(&strat.counts, &means, total)?;
    Ok(draw(&mut rng_from_seed(seed), base, &strat, &allocation))
}

/// Per-stratum sample sizes `n_h ∝ N_h · sqrt(p_h (1 − p_h))`, rounded by
/// largest remainder and capped at `N_h`, with the excess redistributed over
/// the uncapped strata in the same proportions.
pub fn neyman_allocation(counts: &[usize], means: &[f64], total: usize) -> Result<Vec<usize>> {
    let k = counts.len();
    let population: usize = counts.iter().sum();
    if total < k {
        return Err(Error::AllocationInfeasible(format!(
            "total {total} is smaller than the {k} strata"
        )));
    }
    if total > population {
        return Err(Error::AllocationInfeasible(format!(
            "total {total} exceeds the {population} available items"
        )));
    }
    let weights: Vec<f64> = counts
        .iter()
        .zip(means)
        .map(|(&n, &p)| {
            let p = p.clamp(0.0, 1.0);
            n as f64 * (p * (1.0 - p)).sqrt()
        })
        .collect();

    let mut alloc = vec![0usize; k];
    let mut active: Vec<usize> = (0..k).filter(|&h| counts[h] > 0).collect();
    let mut remaining = total;
    loop {
        let mut shares: Vec<f64> = active.iter().map(|&h| weights[h]).collect();
        let mut total_weight: f64 = shares.iter().sum();
        if total_weight <= 0.0 {
            // Only zero-variance strata left: fill by remaining capacity.
            shares = active.iter().map(|&h| counts[h] as f64).collect();
            total_weight = shares.iter().sum();
        }
        let ideal: Vec<f64> = shares
            .iter()
            .map(|w| remaining as f64 * w / total_weight)
            .collect();
        let capped: Vec<usize> = active
            .iter()
            .zip(&ideal)
            .filter(|(&h, &x)| x > counts[h] as f64)
            .map(|(&h, _)| h)
            .collect();
        if capped.is_empty() {
            let floors: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
            let mut leftover = remaining - floors.iter().sum::<usize>();
            let mut order: Vec<usize> = (0..active.len()).collect();
            order.sort_by(|&a, &b| {
                let ra = ideal[a] - floors[a] as f64;
                let rb = ideal[b] - floors[b] as f64;
                rb.total_cmp(&ra).then(a.cmp(&b))
            });
            for (j, &h) in active.iter().enumerate() {
                alloc[h] = floors[j];
            }
            for j in order {
                if leftover == 0 {
                    break;
                }
                let h = active[j];
                if alloc[h] < counts[h] {
                    alloc[h] += 1;
                    leftover -= 1;
                }
            }
            return Ok(alloc);
        }
        for h in capped {
            alloc[h] = counts[h];
            remaining -= counts[h];
            active.retain(|&a| a != h);
        }
        if remaining == 0 || active.is_empty() {
            return Ok(alloc);
        }
    }
}
