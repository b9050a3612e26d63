//! Single-component data-combination models: degradation + failure times,
//! surrogate quality-assurance data, and biased/random lot samples.

use crate::dists::{
    ext_hypergeom_log_pmf, normal_cdf, normal_log_pdf, DistSpec, LN_2PI,
};
use crate::mcmc::{param, ParamVector, Support};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Degradation + failure time model
// ---------------------------------------------------------------------------

/// Lifetimes, censored ages, and degradation measurements for one component.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DegFailData {
    /// Observed failure times.
    pub failures: Vec<f64>,
    /// Ages of still-functioning units (right-censored lifetimes).
    pub survivors: Vec<f64>,
    /// (age, measurement) pairs from destructive degradation tests.
    pub degradation: Vec<(f64, f64)>,
}

impl DegFailData {
    pub fn validate(&self) -> Result<()> {
        if self.failures.is_empty() && self.survivors.is_empty() && self.degradation.is_empty() {
            return Err(Error::Empty("all three data lists are empty".into()));
        }
        let neg = self
            .failures
            .iter()
            .chain(self.survivors.iter())
            .chain(self.degradation.iter().map(|(t, _)| t))
            .any(|&t| t < 0.0);
        if neg {
            return Err(Error::Data("ages and lifetimes must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Prior on the degradation intercept: the model statement uses a normal
/// prior, the worked analysis a gamma; both are supported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaPrior {
    Normal { mean: f64, sd: f64 },
    Gamma { shape: f64, rate: f64 },
}

/// Hyperparameters for the degradation + failure time posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct DegFailPriors {
    pub alpha: AlphaPrior,
    /// Normal prior (mean, sd) on mu.
    pub mu: (f64, f64),
    /// Gamma prior (shape, rate) on sigma_y.
    pub sigma_y: (f64, f64),
    /// Gamma prior (shape, rate) on sigma_b.
    pub sigma_b: (f64, f64),
    /// Beta prior (a, b) on L/alpha.
    pub level_frac: (f64, f64),
    /// When set, the critical level is known with certainty: the prior
    /// factor on L is dropped and the level is held at this value.
    pub fixed_level: Option<f64>,
}

impl Default for DegFailPriors {
    /// The worked-analysis defaults: alpha ~ Gamma(4, 1/30), mu ~ Normal(0,1),
    /// sigma_y ~ Gamma(4, 1/2.5), sigma_b ~ Gamma(4, 5), L/alpha ~ Uniform(0,1).
    fn default() -> Self {
        DegFailPriors {
            alpha: AlphaPrior::Gamma { shape: 4.0, rate: 1.0 / 30.0 },
            mu: (0.0, 1.0),
            sigma_y: (4.0, 1.0 / 2.5),
            sigma_b: (4.0, 5.0),
            level_frac: (1.0, 1.0),
            fixed_level: None,
        }
    }
}

/// Parameter state for the degradation + failure time model. `log_betas`
/// holds one latent degradation-rate log per degradation observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DegFailParams {
    pub alpha: f64,
    pub log_betas: Vec<f64>,
    pub mu: f64,
    pub sigma_b: f64,
    pub sigma_y: f64,
    pub level: f64,
}

/// Unnormalized log-posterior for the degradation + failure time model:
/// log-priors, lognormal log-densities for observed lifetimes, lognormal
/// log-survivor terms for censored ages, normal log-densities for the
/// latent log-rates, and normal log-densities for the degradation
/// measurements with mean alpha - t / beta_j.
pub fn degfail_log_posterior(
    p: &DegFailParams,
    d: &DegFailData,
    pr: &DegFailPriors,
) -> Result<f64> {
    d.validate()?;
    if p.log_betas.len() != d.degradation.len() {
        return Err(Error::Schema(format!(
            "{} latent log-rates for {} degradation observations",
            p.log_betas.len(),
            d.degradation.len()
        )));
    }
    if !(p.sigma_b > 0.0) || !(p.sigma_y > 0.0) {
        return Ok(f64::NEG_INFINITY);
    }
    let level = pr.fixed_level.unwrap_or(p.level);
    if !(0.0 < level && level < p.alpha) {
        return Ok(f64::NEG_INFINITY);
    }
    let mut lp = 0.0;

    // priors
    lp += match pr.alpha {
        AlphaPrior::Normal { mean, sd } => {
            DistSpec::Normal { mean, sd }.log_density(p.alpha)?
        }
        AlphaPrior::Gamma { shape, rate } => {
            DistSpec::Gamma { shape, rate }.log_density(p.alpha)?
        }
    };
    lp += DistSpec::Normal { mean: pr.mu.0, sd: pr.mu.1 }.log_density(p.mu)?;
    lp += DistSpec::Gamma { shape: pr.sigma_y.0, rate: pr.sigma_y.1 }.log_density(p.sigma_y)?;
    lp += DistSpec::Gamma { shape: pr.sigma_b.0, rate: pr.sigma_b.1 }.log_density(p.sigma_b)?;
    if pr.fixed_level.is_none() {
        // beta density on L/alpha with the 1/alpha change-of-variables term
        lp += DistSpec::Beta { a: pr.level_frac.0, b: pr.level_frac.1 }
            .log_density(level / p.alpha)?
            - p.alpha.ln();
    }
    if !lp.is_finite() {
        return Ok(f64::NEG_INFINITY);
    }

    let loc = p.mu + (p.alpha - level).ln();
    for &t in &d.failures {
        // lognormal log-density of the lifetime
        let z = (t.ln() - loc) / p.sigma_b;
        lp += -p.sigma_b.ln() - t.ln() - 0.5 * LN_2PI - 0.5 * z * z;
    }
    for &a in &d.survivors {
        let z = (a.ln() - loc) / p.sigma_b;
        lp += normal_cdf(-z).ln();
    }
    for (j, &(t, y)) in d.degradation.iter().enumerate() {
        let lb = p.log_betas[j];
        let zb = (lb - p.mu) / p.sigma_b;
        lp += -p.sigma_b.ln() + normal_log_pdf(zb);
        let mean = p.alpha - t * (-lb).exp();
        let zy = (y - mean) / p.sigma_y;
        lp += -p.sigma_y.ln() + normal_log_pdf(zy);
    }
    Ok(lp)
}

/// Survivor function of the degradation-defined lifetime:
/// Phi((mu + log(alpha - L) - log t) / sigma_b). Strictly decreasing in t
/// with R(t) -> 1 as t -> 0+ (R(0) = 1 by that limit; t <= 0 itself is a
/// domain error).
pub fn degfail_reliability(alpha: f64, level: f64, mu: f64, sigma_b: f64, t: f64) -> Result<f64> {
    if !(0.0 < level && level < alpha) || !(sigma_b > 0.0) {
        return Err(Error::Param(format!(
            "need 0 < L < alpha and sigma_b > 0, got alpha={alpha}, L={level}, sigma_b={sigma_b}"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("reliability requires t > 0, got {t}")));
    }
    Ok(normal_cdf((mu + (alpha - level).ln() - t.ln()) / sigma_b))
}

/// Metropolis glue for the degradation + failure time model.
#[derive(Debug, Clone)]
pub struct DegFailModel {
    pub data: DegFailData,
    pub priors: DegFailPriors,
}

impl DegFailModel {
    /// Parameter layout: alpha, mu, sigma_b, sigma_y, [level,] then one
    /// log_beta per degradation observation. The level entry is present
    /// only when the critical level is estimated.
    pub fn initial_state(&self) -> Result<ParamVector> {
        self.data.validate()?;
        let mut entries = vec![
            param("alpha", 100.0, Support::Positive),
            param("mu", 0.0, Support::Unbounded),
            param("sigma_b", 0.5, Support::Positive),
            param("sigma_y", 5.0, Support::Positive),
        ];
        if self.priors.fixed_level.is_none() {
            entries.push(param("level", 50.0, Support::Positive));
        }
        for j in 0..self.data.degradation.len() {
            entries.push(param(&format!("log_beta_{j}"), 0.0, Support::Unbounded));
        }
        ParamVector::new(entries)
    }

    pub fn params_from(&self, pv: &ParamVector) -> DegFailParams {
        let has_level = self.priors.fixed_level.is_none();
        let base = if has_level { 5 } else { 4 };
        DegFailParams {
            alpha: pv.value(0),
            mu: pv.value(1),
            sigma_b: pv.value(2),
            sigma_y: pv.value(3),
            level: if has_level {
                pv.value(4)
            } else {
                self.priors.fixed_level.unwrap()
            },
            log_betas: (base..pv.len()).map(|i| pv.value(i)).collect(),
        }
    }

    pub fn log_posterior(&self, pv: &ParamVector) -> f64 {
        let p = self.params_from(pv);
        degfail_log_posterior(&p, &self.data, &self.priors).unwrap_or(f64::NEG_INFINITY)
    }

    pub fn reliability(&self, pv: &ParamVector, t: f64) -> f64 {
        let p = self.params_from(pv);
        degfail_reliability(p.alpha, p.level, p.mu, p.sigma_b, t).unwrap_or(f64::NAN)
    }
}

// ---------------------------------------------------------------------------
// Surrogate quality-assurance model
// ---------------------------------------------------------------------------

/// Pass/fail tests and specification measurements for one component.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SurrogateQAData {
    /// (age, outcome) with outcome 0 = fail, 1 = pass.
    pub pass_fail: Vec<(f64, u8)>,
    /// (age, spec index, measurement); indices are 0-based into the
    /// parameter list.
    pub specs: Vec<(f64, usize, f64)>,
}

/// Per-specification parameters: measurement mean alpha + delta t with sd
/// gamma, and a failure threshold at theta with scale sigma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateSpec {
    pub alpha: f64,
    pub delta: f64,
    pub gamma: f64,
    pub theta: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateQAParams {
    pub specs: Vec<SurrogateSpec>,
}

impl SurrogateQAParams {
    pub fn validate(&self) -> Result<()> {
        if self.specs.is_empty() {
            return Err(Error::Param("at least one specification is required".into()));
        }
        for (j, s) in self.specs.iter().enumerate() {
            if !(s.gamma > 0.0) || !(s.sigma > 0.0) {
                return Err(Error::Param(format!(
                    "spec {j}: gamma and sigma must be positive, got ({}, {})",
                    s.gamma, s.sigma
                )));
            }
        }
        Ok(())
    }
}

/// Pass probability at age `t` with the specification measurements
/// integrated out: the product over specs of
/// Phi((alpha_j + delta_j t - theta_j) / sqrt(gamma_j^2 + sigma_j^2)).
pub fn surrogate_reliability(p: &SurrogateQAParams, t: f64) -> Result<f64> {
    p.validate()?;
    let mut r = 1.0;
    for s in &p.specs {
        let z = (s.alpha + s.delta * t - s.theta) / (s.gamma * s.gamma + s.sigma * s.sigma).sqrt();
        r *= normal_cdf(z);
    }
    Ok(r)
}

/// Pass/fail Bernoulli log-terms in R(t) plus normal log-densities of the
/// spec measurements (mean alpha_k + delta_k tau, sd gamma_k).
pub fn surrogate_log_likelihood(p: &SurrogateQAParams, d: &SurrogateQAData) -> Result<f64> {
    p.validate()?;
    let mut ll = 0.0;
    for &(t, y) in &d.pass_fail {
        if y > 1 {
            return Err(Error::Data(format!("pass/fail outcome must be 0 or 1, got {y}")));
        }
        let r = surrogate_reliability(p, t)?;
        ll += if y == 1 { r.ln() } else { (1.0 - r).ln() };
    }
    for &(tau, k, z) in &d.specs {
        let s = p.specs.get(k).ok_or_else(|| {
            Error::Data(format!("spec index {k} out of range (J = {})", p.specs.len()))
        })?;
        let zr = (z - s.alpha - s.delta * tau) / s.gamma;
        ll += -s.gamma.ln() + normal_log_pdf(zr);
    }
    Ok(ll)
}

// ---------------------------------------------------------------------------
// Biased / random lot sampling model
// ---------------------------------------------------------------------------

/// One manufactured lot with its convenience and random inspection results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lot {
    pub size: u64,
    pub conv_n: u64,
    pub conv_y: u64,
    pub rand_n: u64,
    pub rand_y: u64,
}

impl Lot {
    pub fn validate(&self) -> Result<()> {
        if self.conv_y > self.conv_n || self.rand_y > self.rand_n {
            return Err(Error::Data(format!(
                "features found exceed sample size in lot {self:?}"
            )));
        }
        if self.conv_n + self.rand_n > self.size {
            return Err(Error::Data(format!(
                "samples exceed lot size in lot {self:?}"
            )));
        }
        Ok(())
    }

    /// Feasible range for the latent lot feature count.
    pub fn feature_bounds(&self) -> (u64, u64) {
        let lo = self.conv_y + self.rand_y;
        let hi = self.size - (self.conv_n - self.conv_y) - (self.rand_n - self.rand_y);
        (lo, hi)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LotData {
    pub lots: Vec<Lot>,
}

impl LotData {
    pub fn validate(&self) -> Result<()> {
        if self.lots.is_empty() {
            return Err(Error::Empty("no lots".into()));
        }
        self.lots.iter().try_for_each(Lot::validate)
    }
}

/// Latent state of the lot model: per-lot feature fractions and counts,
/// beta hyperparameters, and the sampling-bias odds.
#[derive(Debug, Clone, PartialEq)]
pub struct LotParams {
    pub p: Vec<f64>,
    pub k: Vec<u64>,
    pub a: f64,
    pub b: f64,
    pub theta: f64,
}

/// Priors for the lot model's top level.
#[derive(Debug, Clone, PartialEq)]
pub struct LotPriors {
    /// Lognormal (location, scale) prior on the bias odds theta.
    pub theta: (f64, f64),
    /// Gamma (shape, rate) hyperprior on a.
    pub a: (f64, f64),
    /// Gamma (shape, rate) hyperprior on b.
    pub b: (f64, f64),
}

impl Default for LotPriors {
    fn default() -> Self {
        LotPriors { theta: (0.0, 1.0), a: (1.0, 1.0), b: (1.0, 1.0) }
    }
}

/// Joint unnormalized log-posterior of (p, K, a, b, theta): binomial counts,
/// beta fractions, the extended-hypergeometric convenience factor, the
/// hypergeometric random-sample factor on the remaining items, and priors.
/// Infeasible K returns negative infinity.
pub fn lot_log_posterior(p: &LotParams, d: &LotData, pr: &LotPriors) -> Result<f64> {
    d.validate()?;
    if p.p.len() != d.lots.len() || p.k.len() != d.lots.len() {
        return Err(Error::Schema(format!(
            "{} p and {} K entries for {} lots",
            p.p.len(),
            p.k.len(),
            d.lots.len()
        )));
    }
    if !(p.a > 0.0) || !(p.b > 0.0) || !(p.theta > 0.0) {
        return Ok(f64::NEG_INFINITY);
    }
    let mut lp = 0.0;
    lp += DistSpec::Lognormal { location: pr.theta.0, scale: pr.theta.1 }.log_density(p.theta)?;
    lp += DistSpec::Gamma { shape: pr.a.0, rate: pr.a.1 }.log_density(p.a)?;
    lp += DistSpec::Gamma { shape: pr.b.0, rate: pr.b.1 }.log_density(p.b)?;
    for (i, lot) in d.lots.iter().enumerate() {
        let (pi, ki) = (p.p[i], p.k[i]);
        if !(0.0 < pi && pi < 1.0) {
            return Ok(f64::NEG_INFINITY);
        }
        let (lo, hi) = lot.feature_bounds();
        if ki < lo || ki > hi {
            return Ok(f64::NEG_INFINITY);
        }
        lp += DistSpec::Binomial { n: lot.size, p: pi }.log_density(ki as f64)?;
        lp += DistSpec::Beta { a: p.a, b: p.b }.log_density(pi)?;
        lp += ext_hypergeom_log_pmf(lot.size, ki, lot.conv_n, p.theta, lot.conv_y as i64);
        // random sample from the items the convenience sample left behind
        lp += DistSpec::Hypergeometric {
            population: lot.size - lot.conv_n,
            features: ki - lot.conv_y,
            draws: lot.rand_n,
        }
        .log_density(lot.rand_y as f64)?;
    }
    Ok(lp)
}

/// Prevalence of features among the unsampled items:
/// sum(K_i - y_i^c - y_i^r) / sum(N_i - n_i^c - n_i^r).
pub fn feature_prevalence(k: &[u64], d: &LotData) -> Result<f64> {
    d.validate()?;
    if k.len() != d.lots.len() {
        return Err(Error::Schema(format!("{} K entries for {} lots", k.len(), d.lots.len())));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (lot, &ki) in d.lots.iter().zip(k) {
        num += (ki - lot.conv_y - lot.rand_y) as f64;
        den += (lot.size - lot.conv_n - lot.rand_n) as f64;
    }
    if den == 0.0 {
        return Err(Error::Domain("no unsampled items".into()));
    }
    Ok(num / den)
}

/// Metropolis glue for the lot model.
#[derive(Debug, Clone)]
pub struct LotModel {
    pub data: LotData,
    pub priors: LotPriors,
}

impl LotModel {
    /// Layout: a, b, theta, then p_i and K_i per lot.
    pub fn initial_state(&self) -> Result<ParamVector> {
        self.data.validate()?;
        let mut entries = vec![
            param("a", 1.0, Support::Positive),
            param("b", 1.0, Support::Positive),
            param("theta", 1.0, Support::Positive),
        ];
        for (i, lot) in self.data.lots.iter().enumerate() {
            let (lo, hi) = lot.feature_bounds();
            let sampled = lot.conv_n + lot.rand_n;
            let found = lot.conv_y + lot.rand_y;
            let frac = if sampled > 0 {
                ((found as f64 + 0.5) / (sampled as f64 + 1.0)).clamp(0.05, 0.95)
            } else {
                0.5
            };
            let k0 = ((lot.size as f64 * frac).round() as u64).clamp(lo, hi);
            entries.push(param(&format!("p_{i}"), frac, Support::UnitInterval));
            entries.push(param(
                &format!("K_{i}"),
                k0 as f64,
                Support::Integer { lo: lo as i64, hi: hi as i64 },
            ));
        }
        ParamVector::new(entries)
    }

    pub fn params_from(&self, pv: &ParamVector) -> LotParams {
        let n = self.data.lots.len();
        LotParams {
            a: pv.value(0),
            b: pv.value(1),
            theta: pv.value(2),
            p: (0..n).map(|i| pv.value(3 + 2 * i)).collect(),
            k: (0..n).map(|i| pv.value(4 + 2 * i) as u64).collect(),
        }
    }

    pub fn log_posterior(&self, pv: &ParamVector) -> f64 {
        let p = self.params_from(pv);
        lot_log_posterior(&p, &self.data, &self.priors).unwrap_or(f64::NEG_INFINITY)
    }
}
