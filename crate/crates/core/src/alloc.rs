//! Test-resource allocation: the bias-linked series model, budget
//! feasibility, the pre-posterior credible-interval-length criterion, and
//! a genetic-algorithm search over allocations.

use std::collections::HashMap;

use rand::Rng as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::beta::ln_beta;

use crate::dists::normal_log_pdf;
use crate::mcmc::{
    empirical_quantile, param, run_chain, Chain, MetropolisConfig, ParamVector, Support,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Bias link and allocations
// ---------------------------------------------------------------------------

/// Series system with a bias term: the two component reliabilities and the
/// log-odds shift relating their product to the system reliability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasedSeriesParams {
    pub p2: f64,
    pub p3: f64,
    pub beta: f64,
}

/// System reliability p1 = p2 p3 / [p2 p3 + (1 - p2 p3) e^(-beta)].
/// beta = 0 recovers the independent series product.
pub fn bias_link(p: &BiasedSeriesParams) -> Result<f64> {
    if !(p.p2 > 0.0 && p.p2 < 1.0 && p.p3 > 0.0 && p.p3 < 1.0) {
        return Err(Error::Param(format!(
            "component reliabilities must lie in (0,1), got ({}, {})",
            p.p2, p.p3
        )));
    }
    let prod = p.p2 * p.p3;
    if p.beta == 0.0 {
        return Ok(prod); // exact, not just in the limit of the formula
    }
    Ok(prod / (prod + (1.0 - prod) * (-p.beta).exp()))
}

/// Candidate test plan: counts per test type with unit costs and a budget.
/// Type 0 is the system test.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub counts: Vec<u64>,
    pub costs: Vec<f64>,
    pub budget: f64,
}

impl Allocation {
    pub fn validate(&self) -> Result<()> {
        if self.counts.len() != self.costs.len() {
            return Err(Error::Schema(format!(
                "{} counts for {} costs",
                self.counts.len(),
                self.costs.len()
            )));
        }
        if self.costs.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::Param("costs must be positive".into()));
        }
        if !(self.budget > 0.0) {
            return Err(Error::Param(format!("budget must be positive, got {}", self.budget)));
        }
        Ok(())
    }

    pub fn cost(&self) -> f64 {
        self.counts
            .iter()
            .zip(&self.costs)
            .map(|(&n, &c)| n as f64 * c)
            .sum()
    }
}

pub fn feasible(a: &Allocation) -> Result<bool> {
    a.validate()?;
    Ok(a.cost() <= a.budget)
}

// ---------------------------------------------------------------------------
// Resource-allocation prior: diffuse priors conditioned on existing data
// ---------------------------------------------------------------------------

/// Existing test results as (trials, successes) per level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExistingData {
    pub system: (u64, u64),
    pub comp2: (u64, u64),
    pub comp3: (u64, u64),
}

impl ExistingData {
    pub fn validate(&self) -> Result<()> {
        for (label, (n, y)) in
            [("system", self.system), ("comp2", self.comp2), ("comp3", self.comp3)]
        {
            if y > n {
                return Err(Error::Data(format!("{label}: {y} successes exceed {n} trials")));
            }
        }
        Ok(())
    }
}

/// Diffuse prior constants. The defaults were calibrated so that
/// conditioning on the stock existing data (2/2 system, 5/5, 9/10) yields
/// 90% intervals close to (0.83, 1.00), (0.77, 0.98), (-1.56, 2.75) for
/// (p2, p3, beta) and (0.579, 0.992) for the system reliability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusePrior {
    /// Beta (a, b) on each component reliability.
    pub p_shape: (f64, f64),
    /// Normal sd on beta (mean 0).
    pub beta_sd: f64,
}

impl Default for DiffusePrior {
    fn default() -> Self {
        DiffusePrior { p_shape: (9.0, 1.0), beta_sd: 1.5 }
    }
}

fn binom_ll(n: u64, y: u64, p: f64) -> f64 {
    let mut ll = 0.0;
    if y > 0 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        ll += y as f64 * p.ln();
    }
    if y < n {
        if p >= 1.0 {
            return f64::NEG_INFINITY;
        }
        ll += (n - y) as f64 * (1.0 - p).ln();
    }
    ll
}

/// Log-posterior of (p2, p3, beta) under the diffuse prior and binomial
/// data at the system (via the bias link) and component levels.
pub fn biased_series_log_posterior(
    p: &BiasedSeriesParams,
    data: &ExistingData,
    prior: &DiffusePrior,
) -> Result<f64> {
    data.validate()?;
    if !(p.p2 > 0.0 && p.p2 < 1.0 && p.p3 > 0.0 && p.p3 < 1.0) {
        return Ok(f64::NEG_INFINITY);
    }
    let (a, b) = prior.p_shape;
    let lbeta = ln_beta(a, b);
    let mut lp = 0.0;
    for q in [p.p2, p.p3] {
        lp += (a - 1.0) * q.ln() + (b - 1.0) * (1.0 - q).ln() - lbeta;
    }
    lp += -prior.beta_sd.ln() + normal_log_pdf(p.beta / prior.beta_sd);
    let p1 = bias_link(p)?;
    lp += binom_ll(data.system.0, data.system.1, p1);
    lp += binom_ll(data.comp2.0, data.comp2.1, p.p2);
    lp += binom_ll(data.comp3.0, data.comp3.1, p.p3);
    Ok(lp)
}

fn biased_series_init() -> ParamVector {
    ParamVector::new(vec![
        param("p2", 0.9, Support::UnitInterval),
        param("p3", 0.9, Support::UnitInterval),
        param("beta", 0.0, Support::Unbounded),
    ])
    .expect("static layout is valid")
}

fn params_from(pv: &ParamVector) -> BiasedSeriesParams {
    BiasedSeriesParams { p2: pv.value(0), p3: pv.value(1), beta: pv.value(2) }
}

/// Samples the resource-allocation prior: the diffuse prior conditioned on
/// the existing data. The returned chain is over (p2, p3, beta).
pub fn resource_prior_chain(
    data: &ExistingData,
    prior: &DiffusePrior,
    cfg: &MetropolisConfig,
) -> Result<Chain> {
    run_chain(
        |pv| {
            biased_series_log_posterior(&params_from(pv), data, prior)
                .unwrap_or(f64::NEG_INFINITY)
        },
        &biased_series_init(),
        cfg,
    )
}

// ---------------------------------------------------------------------------
// Pre-posterior criterion
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionConfig {
    /// Central credible level of the inner intervals.
    pub ci_level: f64,
    /// Upper quantile of the interval-length distribution reported.
    pub quantile: f64,
    pub replications: usize,
    /// Inner-update budget: (burn-in, retained draws).
    pub inner_burn_in: usize,
    pub inner_samples: usize,
    pub seed: u64,
}

impl Default for CriterionConfig {
    fn default() -> Self {
        CriterionConfig {
            ci_level: 0.90,
            quantile: 0.90,
            replications: 100,
            inner_burn_in: 500,
            inner_samples: 2000,
            seed: 0,
        }
    }
}

impl CriterionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ci_level > 0.0 && self.ci_level < 1.0)
            || !(self.quantile > 0.0 && self.quantile < 1.0)
        {
            return Err(Error::Param(format!(
                "levels must lie in (0,1), got ci_level={}, quantile={}",
                self.ci_level, self.quantile
            )));
        }
        if self.replications == 0 {
            return Err(Error::Param("need at least one replication".into()));
        }
        Ok(())
    }
}

/// Criterion value plus replication bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub value: f64,
    pub completed: usize,
    pub failed: usize,
}

/// Pre-posterior criterion of a candidate allocation: for each
/// replication, draw a truth from the prior chain, simulate binomial test
/// data under the allocation, update the posterior, and record the central
/// interval length of the system reliability. Returns the configured upper
/// quantile of the lengths. Replications run concurrently on derived
/// seeds; up to 10% may fail before the whole criterion errors.
pub fn preposterior_criterion(
    a: &Allocation,
    existing: &ExistingData,
    prior: &DiffusePrior,
    prior_draws: &Chain,
    cfg: &CriterionConfig,
) -> Result<CriterionOutcome> {
    cfg.validate()?;
    existing.validate()?;
    if a.counts.len() != 3 {
        return Err(Error::Schema(format!(
            "allocation needs 3 test types (system, comp2, comp3), got {}",
            a.counts.len()
        )));
    }
    if !feasible(a)? {
        return Err(Error::Domain(format!(
            "allocation cost {} exceeds budget {}",
            a.cost(),
            a.budget
        )));
    }
    if prior_draws.is_empty() {
        return Err(Error::Empty("prior chain has no draws".into()));
    }
    let tail = 0.5 * (1.0 - cfg.ci_level);

    let lengths: Vec<Result<f64>> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let rep_seed = cfg.seed ^ (r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(r as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(rep_seed);
            let truth = params_from(&prior_draws.state(rng.random_range(0..prior_draws.len())));
            let p1 = bias_link(&truth)?;
            // one Bernoulli stream per test type, seeded independently of
            // the allocation: y_i(n) is a partial sum over a fixed stream,
            // so allocations that differ in one count see nested data.
            // This common-random-numbers coupling makes criterion
            // comparisons across allocations far less noisy.
            let sim = |i: u64, n: u64, p: f64| -> u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    rep_seed ^ (i + 1).wrapping_mul(0x5851_F42D_4C95_7F2D),
                );
                (0..n).filter(|_| rng.random::<f64>() < p).count() as u64
            };
            let y1 = sim(0, a.counts[0], p1);
            let y2 = sim(1, a.counts[1], truth.p2);
            let y3 = sim(2, a.counts[2], truth.p3);
            // combined data: the analytic diffuse prior plus existing and
            // simulated counts is the prior chain updated with the new data
            let data = ExistingData {
                system: (existing.system.0 + a.counts[0], existing.system.1 + y1),
                comp2: (existing.comp2.0 + a.counts[1], existing.comp2.1 + y2),
                comp3: (existing.comp3.0 + a.counts[2], existing.comp3.1 + y3),
            };
            let mcfg = MetropolisConfig::uniform_steps(
                cfg.inner_burn_in,
                cfg.inner_samples,
                rep_seed ^ 0xA5A5_A5A5,
                3,
                0.5,
            );
            let chain = resource_prior_chain(&data, prior, &mcfg)?;
            let (_, qs) = chain.summarize(
                |pv| bias_link(&params_from(pv)).unwrap_or(f64::NAN),
                &[tail, 1.0 - tail],
            )?;
            Ok(qs[1] - qs[0])
        })
        .collect();

    let mut ok: Vec<f64> = lengths.iter().filter_map(|r| r.as_ref().ok()).copied().collect();
    let failed = cfg.replications - ok.len();
    if (failed as f64) > 0.1 * cfg.replications as f64 {
        let first = lengths.iter().find_map(|r| r.as_ref().err());
        return Err(Error::Numerical(format!(
            "{failed}/{} replications failed (first failure: {})",
            cfg.replications,
            first.map(|e| e.to_string()).unwrap_or_default()
        )));
    }
    ok.sort_by(|x, y| x.partial_cmp(y).expect("lengths are finite"));
    Ok(CriterionOutcome {
        value: empirical_quantile(&ok, cfg.quantile),
        completed: ok.len(),
        failed,
    })
}

// ---------------------------------------------------------------------------
// Genetic algorithm
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elitism: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 20,
            generations: 15,
            crossover_rate: 0.9,
            mutation_rate: 0.2,
            elitism: 1,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Param("population must be at least 2".into()));
        }
        if self.generations == 0 {
            return Err(Error::Param("need at least one generation".into()));
        }
        for (label, r) in [("crossover", self.crossover_rate), ("mutation", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Param(format!("{label} rate {r} outside [0,1]")));
            }
        }
        if self.elitism >= self.population {
            return Err(Error::Param("elitism must be below the population size".into()));
        }
        Ok(())
    }
}

/// Search space: per-type upper bounds on counts, with shared costs and
/// budget.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationBounds {
    pub max_counts: Vec<u64>,
    pub costs: Vec<f64>,
    pub budget: f64,
}

impl AllocationBounds {
    pub fn validate(&self) -> Result<()> {
        self.make(vec![0; self.max_counts.len()]).validate()
    }

    pub fn make(&self, counts: Vec<u64>) -> Allocation {
        Allocation { counts, costs: self.costs.clone(), budget: self.budget }
    }
}

/// Clamp to bounds, then decrement counts largest-cost-first until the
/// budget holds.
pub fn repair(bounds: &AllocationBounds, counts: &mut Vec<u64>) {
    for (c, &m) in counts.iter_mut().zip(&bounds.max_counts) {
        *c = (*c).min(m);
    }
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&i, &j| bounds.costs[j].partial_cmp(&bounds.costs[i]).expect("costs finite"));
    loop {
        let cost: f64 = counts
            .iter()
            .zip(&bounds.costs)
            .map(|(&n, &c)| n as f64 * c)
            .sum();
        if cost <= bounds.budget {
            return;
        }
        let Some(&i) = order.iter().find(|&&i| counts[i] > 0) else {
            return; // all zero; feasibility of the zero point is checked upstream
        };
        let over = (cost - bounds.budget) / bounds.costs[i];
        let dec = (over.ceil() as u64).clamp(1, counts[i]);
        counts[i] -= dec;
    }
}

/// Result of a GA run: best allocation, its criterion value, and the full
/// evaluation log in (generation, genome) order.
#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub best: Allocation,
    pub value: f64,
    pub log: Vec<(Vec<u64>, f64)>,
}

/// Genetic-algorithm minimization of `criterion` over feasible
/// allocations: integer genomes, tournament selection, uniform crossover,
/// geometric-step mutation, elitism, largest-cost-first repair. Repeat
/// genomes are looked up in a memo rather than re-evaluated, but every
/// candidate still appears in the log. Deterministic given the seed.
pub fn ga_optimize(
    bounds: &AllocationBounds,
    criterion: impl Fn(&Allocation) -> Result<f64> + Sync,
    cfg: &GaConfig,
) -> Result<GaOutcome> {
    cfg.validate()?;
    bounds.validate()?;
    if !feasible(&bounds.make(vec![0; bounds.max_counts.len()]))? {
        return Err(Error::Domain("no feasible allocation: zero point exceeds budget".into()));
    }
    let n_types = bounds.max_counts.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Seed the corners of the search space (zero, plus each single-type
    // maximum) before filling with random genomes. Repair only ever
    // decrements, so the single-type extremes are otherwise hard to reach;
    // corner seeding gives crossover those building blocks from the start.
    let mut pop: Vec<Vec<u64>> = Vec::with_capacity(cfg.population);
    pop.push(vec![0; n_types]);
    for i in 0..n_types {
        let mut g = vec![0; n_types];
        g[i] = bounds.max_counts[i].min((bounds.budget / bounds.costs[i]).floor() as u64);
        pop.push(g);
    }
    pop.truncate(cfg.population);
    while pop.len() < cfg.population {
        let mut g: Vec<u64> =
            bounds.max_counts.iter().map(|&m| rng.random_range(0..=m)).collect();
        repair(bounds, &mut g);
        pop.push(g);
    }

    let mut memo: HashMap<Vec<u64>, f64> = HashMap::new();
    let mut log: Vec<(Vec<u64>, f64)> = Vec::new();
    let mut best: Option<(Vec<u64>, f64)> = None;

    for _gen in 0..cfg.generations {
        // evaluate new genomes concurrently, in genome order
        let fresh: Vec<Vec<u64>> = {
            let mut seen = std::collections::HashSet::new();
            pop.iter()
                .filter(|g| !memo.contains_key(*g) && seen.insert((*g).clone()))
                .cloned()
                .collect()
        };
        let values: Vec<(Vec<u64>, Result<f64>)> = fresh
            .par_iter()
            .map(|g| (g.clone(), criterion(&bounds.make(g.clone()))))
            .collect();
        for (g, v) in values {
            memo.insert(g, v?);
        }
        let mut scored: Vec<(Vec<u64>, f64)> = Vec::with_capacity(pop.len());
        for g in &pop {
            let v = memo[g];
            log.push((g.clone(), v));
            scored.push((g.clone(), v));
        }
        for (g, v) in &scored {
            if best.as_ref().map_or(true, |(_, bv)| v < bv) {
                best = Some((g.clone(), *v));
            }
        }
        // next generation
        scored.sort_by(|x, y| x.1.partial_cmp(&y.1).expect("criterion values finite"));
        let mut next: Vec<Vec<u64>> =
            scored.iter().take(cfg.elitism).map(|(g, _)| g.clone()).collect();
        let tournament = |rng: &mut ChaCha8Rng| -> Vec<u64> {
            let a = rng.random_range(0..scored.len());
            let b = rng.random_range(0..scored.len());
            scored[a.min(b)].0.clone() // scored is sorted by fitness
        };
        while next.len() < cfg.population {
            let ma = tournament(&mut rng);
            let mb = tournament(&mut rng);
            let mut child = if rng.random::<f64>() < cfg.crossover_rate {
                (0..n_types)
                    .map(|i| if rng.random::<bool>() { ma[i] } else { mb[i] })
                    .collect::<Vec<u64>>()
            } else {
                ma
            };
            for (i, gene) in child.iter_mut().enumerate() {
                if rng.random::<f64>() < cfg.mutation_rate {
                    // geometric step, random direction
                    let mut step = 1u64;
                    while rng.random::<f64>() < 0.5 {
                        step += 1;
                    }
                    if rng.random::<bool>() {
                        *gene = (*gene + step).min(bounds.max_counts[i]);
                    } else {
                        *gene = gene.saturating_sub(step);
                    }
                }
            }
            repair(bounds, &mut child);
            next.push(child);
        }
        pop = next;
    }

    let (g, value) = best.expect("at least one generation evaluated");
    Ok(GaOutcome { best: bounds.make(g), value, log })
}
