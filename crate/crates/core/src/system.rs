//! Multilevel likelihoods and system-reliability functions: series
//! composition, partially informative system tests, the hierarchical NHPP
//! fleet model, the Weibull series hierarchy, and induced series priors.

use statrs::function::gamma::ln_gamma;

use crate::component::AlphaPrior;
use crate::dists::{gamma_from_mean_sd, normal_cdf, normal_log_pdf, DistSpec};
use crate::mcmc::{param, ParamVector, Support};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Component reliability kinds and series composition
// ---------------------------------------------------------------------------

/// Parametric component reliability curves used by the multilevel series
/// system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComponentReliabilityModel {
    /// logit P(success at age t) = theta0 + theta1 t.
    LogisticAging { theta0: f64, theta1: f64 },
    /// P(T > t) = exp(-lambda0 t^lambda1). Equivalent to a Weibull with
    /// scale lambda0^(-1/lambda1) and shape lambda1.
    WeibullLifetime { lambda0: f64, lambda1: f64 },
    /// Survivor function of a degradation-defined lognormal lifetime with
    /// the critical level known with certainty.
    DegradationLognormal { mu: f64, sigma_b: f64, alpha: f64, level: f64 },
}

impl ComponentReliabilityModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ComponentReliabilityModel::LogisticAging { .. } => Ok(()),
            ComponentReliabilityModel::WeibullLifetime { lambda0, lambda1 } => {
                if !(lambda0 > 0.0) || !(lambda1 > 0.0) {
                    Err(Error::Param(format!(
                        "WeibullLifetime requires lambda0, lambda1 > 0, got ({lambda0}, {lambda1})"
                    )))
                } else {
                    Ok(())
                }
            }
            ComponentReliabilityModel::DegradationLognormal { sigma_b, alpha, level, .. } => {
                if !(sigma_b > 0.0) || !(alpha > level) {
                    Err(Error::Param(format!(
                        "DegradationLognormal requires sigma_b > 0 and alpha > level, got sigma_b={sigma_b}, alpha={alpha}, level={level}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Success probability of one component at age `t`.
pub fn component_reliability(m: &ComponentReliabilityModel, t: f64) -> Result<f64> {
    m.validate()?;
    Ok(match *m {
        ComponentReliabilityModel::LogisticAging { theta0, theta1 } => {
            inv_logit(theta0 + theta1 * t)
        }
        ComponentReliabilityModel::WeibullLifetime { lambda0, lambda1 } => {
            if t <= 0.0 {
                1.0
            } else {
                (-lambda0 * t.powf(lambda1)).exp()
            }
        }
        ComponentReliabilityModel::DegradationLognormal { mu, sigma_b, alpha, level } => {
            if t <= 0.0 {
                1.0
            } else {
                1.0 - normal_cdf((t.ln() - mu - (alpha - level).ln()) / sigma_b)
            }
        }
    })
}

/// Series system: the product of the component reliabilities.
pub fn series_reliability(models: &[ComponentReliabilityModel], t: f64) -> Result<f64> {
    if models.is_empty() {
        return Err(Error::Empty("series system needs at least one component".into()));
    }
    let mut r = 1.0;
    for m in models {
        r *= component_reliability(m, t)?;
    }
    Ok(r)
}

pub fn inv_logit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

// ---------------------------------------------------------------------------
// Multilevel series model (logistic + Weibull + degradation + system tests)
// ---------------------------------------------------------------------------

/// Pass/fail tests binned by age: (age, trials, successes).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BinomialAgeData {
    pub rows: Vec<(f64, u64, u64)>,
}

impl BinomialAgeData {
    pub fn validate(&self) -> Result<()> {
        for (i, &(t, n, s)) in self.rows.iter().enumerate() {
            if s > n {
                return Err(Error::Data(format!(
                    "row {i}: successes {s} exceed trials {n} at age {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Observed and right-censored lifetimes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LifetimeData {
    pub observed: Vec<f64>,
    pub censored: Vec<f64>,
}

impl LifetimeData {
    pub fn validate(&self) -> Result<()> {
        if self.observed.iter().chain(&self.censored).any(|&t| !(t > 0.0)) {
            return Err(Error::Data("lifetimes must be positive".into()));
        }
        Ok(())
    }
}

/// Priors for the three-component multilevel series model. The logistic
/// coefficients sit on the centered-age scale.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilevelPriors {
    /// Normal (mean, sd) on theta0 and theta1.
    pub theta: (f64, f64),
    /// Normal (mean, sd) on log lambda0.
    pub log_lambda0: (f64, f64),
    /// Gamma (shape, rate) on lambda1.
    pub lambda1: (f64, f64),
    pub alpha: AlphaPrior,
    pub mu: (f64, f64),
    pub sigma_b: (f64, f64),
    pub sigma_y: (f64, f64),
}

impl Default for MultilevelPriors {
    fn default() -> Self {
        MultilevelPriors {
            theta: (0.0, 10.0),
            log_lambda0: (0.0, 10.0),
            lambda1: (2.0, 1.0),
            alpha: AlphaPrior::Gamma { shape: 4.0, rate: 1.0 / 30.0 },
            mu: (0.0, 1.0),
            sigma_b: (4.0, 5.0),
            sigma_y: (4.0, 1.0 / 2.5),
        }
    }
}

/// Parameter state for the multilevel series model.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilevelParams {
    pub theta0: f64,
    pub theta1: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub alpha: f64,
    pub mu: f64,
    pub sigma_b: f64,
    pub sigma_y: f64,
    /// One latent degradation-rate log per degradation observation.
    pub log_betas: Vec<f64>,
}

/// Three-component multilevel series system: binary-with-age data for the
/// logistic component, censored/uncensored lifetimes for the Weibull
/// component, degradation + censored lifetimes for the degradation
/// component (critical level known), and binomial system tests at the
/// series reliability.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilevelSeriesModel {
    pub logistic_data: BinomialAgeData,
    pub weibull_data: LifetimeData,
    pub degradation: Vec<(f64, f64)>,
    pub deg_lifetimes: LifetimeData,
    /// The fixed critical level D.
    pub level: f64,
    pub system_data: BinomialAgeData,
    pub priors: MultilevelPriors,
    /// Subtracted from every age in the logistic term (and in the logistic
    /// factor of the system reliability).
    pub center_age: f64,
}

impl MultilevelSeriesModel {
    pub fn validate(&self) -> Result<()> {
        self.logistic_data.validate()?;
        self.weibull_data.validate()?;
        self.deg_lifetimes.validate()?;
        self.system_data.validate()?;
        if self.degradation.iter().any(|&(t, _)| t < 0.0) {
            return Err(Error::Data("degradation ages must be nonnegative".into()));
        }
        Ok(())
    }

    /// Mean test age of the logistic component data, the default centering.
    pub fn mean_logistic_age(rows: &BinomialAgeData) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for &(t, n, _) in &rows.rows {
            num += t * n as f64;
            den += n as f64;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    pub fn component_models(&self, p: &MultilevelParams) -> [ComponentReliabilityModel; 3] {
        [
            ComponentReliabilityModel::LogisticAging {
                theta0: p.theta0 - p.theta1 * self.center_age,
                theta1: p.theta1,
            },
            ComponentReliabilityModel::WeibullLifetime {
                lambda0: p.lambda0,
                lambda1: p.lambda1,
            },
            ComponentReliabilityModel::DegradationLognormal {
                mu: p.mu,
                sigma_b: p.sigma_b,
                alpha: p.alpha,
                level: self.level,
            },
        ]
    }

    pub fn system_reliability(&self, p: &MultilevelParams, t: f64) -> Result<f64> {
        series_reliability(&self.component_models(p), t)
    }

    /// Sum of the three component log-likelihoods, the system binomial
    /// log-likelihood at the series reliability, and all log-priors.
    pub fn log_posterior_params(&self, p: &MultilevelParams) -> Result<f64> {
        self.validate()?;
        if p.log_betas.len() != self.degradation.len() {
            return Err(Error::Schema(format!(
                "{} latent log-rates for {} degradation observations",
                p.log_betas.len(),
                self.degradation.len()
            )));
        }
        if !(p.lambda0 > 0.0)
            || !(p.lambda1 > 0.0)
            || !(p.sigma_b > 0.0)
            || !(p.sigma_y > 0.0)
            || !(p.alpha > self.level)
        {
            return Ok(f64::NEG_INFINITY);
        }
        let mut lp = 0.0;

        // priors
        lp += DistSpec::Normal { mean: self.priors.theta.0, sd: self.priors.theta.1 }
            .log_density(p.theta0)?;
        lp += DistSpec::Normal { mean: self.priors.theta.0, sd: self.priors.theta.1 }
            .log_density(p.theta1)?;
        lp += DistSpec::Normal {
            mean: self.priors.log_lambda0.0,
            sd: self.priors.log_lambda0.1,
        }
        .log_density(p.lambda0.ln())?;
        lp += DistSpec::Gamma { shape: self.priors.lambda1.0, rate: self.priors.lambda1.1 }
            .log_density(p.lambda1)?;
        lp += match self.priors.alpha {
            AlphaPrior::Normal { mean, sd } => DistSpec::Normal { mean, sd }.log_density(p.alpha)?,
            AlphaPrior::Gamma { shape, rate } => {
                DistSpec::Gamma { shape, rate }.log_density(p.alpha)?
            }
        };
        lp += DistSpec::Normal { mean: self.priors.mu.0, sd: self.priors.mu.1 }
            .log_density(p.mu)?;
        lp += DistSpec::Gamma { shape: self.priors.sigma_b.0, rate: self.priors.sigma_b.1 }
            .log_density(p.sigma_b)?;
        lp += DistSpec::Gamma { shape: self.priors.sigma_y.0, rate: self.priors.sigma_y.1 }
            .log_density(p.sigma_y)?;
        if !lp.is_finite() {
            return Ok(f64::NEG_INFINITY);
        }

        // component 1: logistic-binomial on centered ages
        for &(t, n, s) in &self.logistic_data.rows {
            let pr = inv_logit(p.theta0 + p.theta1 * (t - self.center_age));
            lp += binomial_log_like(n, s, pr);
        }
        // component 2: Weibull lifetimes
        for &t in &self.weibull_data.observed {
            lp += p.lambda0.ln() + p.lambda1.ln() + (p.lambda1 - 1.0) * t.ln()
                - p.lambda0 * t.powf(p.lambda1);
        }
        for &t in &self.weibull_data.censored {
            lp += -p.lambda0 * t.powf(p.lambda1);
        }
        // component 3: degradation factors with the level fixed
        let loc = p.mu + (p.alpha - self.level).ln();
        for (j, &(t, y)) in self.degradation.iter().enumerate() {
            let lb = p.log_betas[j];
            lp += -p.sigma_b.ln() + normal_log_pdf((lb - p.mu) / p.sigma_b);
            let mean = p.alpha - t * (-lb).exp();
            lp += -p.sigma_y.ln() + normal_log_pdf((y - mean) / p.sigma_y);
        }
        for &t in &self.deg_lifetimes.observed {
            let z = (t.ln() - loc) / p.sigma_b;
            lp += -p.sigma_b.ln() - t.ln() + normal_log_pdf(z);
        }
        for &t in &self.deg_lifetimes.censored {
            lp += normal_cdf(-(t.ln() - loc) / p.sigma_b).ln();
        }
        // system tests at the series reliability
        for &(t, n, s) in &self.system_data.rows {
            let r = self.system_reliability(p, t)?;
            lp += binomial_log_like(n, s, r);
        }
        Ok(lp)
    }

    /// Layout: theta0, theta1, lambda0, lambda1, alpha, mu, sigma_b,
    /// sigma_y, then one log_beta per degradation observation.
    pub fn initial_state(&self) -> Result<ParamVector> {
        self.validate()?;
        let mut entries = vec![
            param("theta0", 3.0, Support::Unbounded),
            param("theta1", 0.0, Support::Unbounded),
            param("lambda0", 1e-4, Support::Positive),
            param("lambda1", 2.0, Support::Positive),
            param("alpha", self.level + 80.0, Support::Positive),
            param("mu", 0.0, Support::Unbounded),
            param("sigma_b", 0.5, Support::Positive),
            param("sigma_y", 5.0, Support::Positive),
        ];
        for j in 0..self.degradation.len() {
            entries.push(param(&format!("log_beta_{j}"), 0.0, Support::Unbounded));
        }
        ParamVector::new(entries)
    }

    pub fn params_from(&self, pv: &ParamVector) -> MultilevelParams {
        MultilevelParams {
            theta0: pv.value(0),
            theta1: pv.value(1),
            lambda0: pv.value(2),
            lambda1: pv.value(3),
            alpha: pv.value(4),
            mu: pv.value(5),
            sigma_b: pv.value(6),
            sigma_y: pv.value(7),
            log_betas: (8..pv.len()).map(|i| pv.value(i)).collect(),
        }
    }

    pub fn log_posterior(&self, pv: &ParamVector) -> f64 {
        let p = self.params_from(pv);
        self.log_posterior_params(&p).unwrap_or(f64::NEG_INFINITY)
    }
}

fn binomial_log_like(n: u64, s: u64, p: f64) -> f64 {
    let mut lp = 0.0;
    if s > 0 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        lp += s as f64 * p.ln();
    }
    if s < n {
        if p >= 1.0 {
            return f64::NEG_INFINITY;
        }
        lp += (n - s) as f64 * (1.0 - p).ln();
    }
    lp
}

// ---------------------------------------------------------------------------
// Partially informative system tests
// ---------------------------------------------------------------------------

/// One system test with incomplete attribution: components known to have
/// worked, components known to have failed, and a set where at least one
/// component failed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialSystemTest {
    pub known_working: Vec<usize>,
    pub known_failed: Vec<usize>,
    pub some_failed: Vec<usize>,
    pub age: f64,
}

impl PartialSystemTest {
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for &k in self
            .known_working
            .iter()
            .chain(&self.known_failed)
            .chain(&self.some_failed)
        {
            if !seen.insert(k) {
                return Err(Error::Data(format!(
                    "component {k} appears in more than one outcome set"
                )));
            }
        }
        Ok(())
    }
}

/// Log-likelihood of partially informative system tests. `probs[i][k]` is
/// the success probability of component `k` in test `i`. An empty
/// at-least-one-failed set contributes a factor of 1.
pub fn partial_test_log_likelihood(
    tests: &[PartialSystemTest],
    probs: &[Vec<f64>],
) -> Result<f64> {
    if tests.len() != probs.len() {
        return Err(Error::Schema(format!(
            "{} probability rows for {} tests",
            probs.len(),
            tests.len()
        )));
    }
    let mut ll = 0.0;
    for (test, row) in tests.iter().zip(probs) {
        test.validate()?;
        let p_of = |k: usize| -> Result<f64> {
            let p = *row.get(k).ok_or_else(|| {
                Error::Schema(format!("no probability for component {k}"))
            })?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Param(format!("probability {p} for component {k}")));
            }
            Ok(p)
        };
        for &k in &test.known_working {
            ll += p_of(k)?.ln();
        }
        for &k in &test.known_failed {
            ll += (1.0 - p_of(k)?).ln();
        }
        if !test.some_failed.is_empty() {
            let mut prod = 1.0;
            for &k in &test.some_failed {
                prod *= p_of(k)?;
            }
            ll += (1.0 - prod).ln(); // -inf when every p is 1
        }
    }
    Ok(ll)
}

// ---------------------------------------------------------------------------
// Hierarchical NHPP fleet model
// ---------------------------------------------------------------------------

/// Failure counts per computer per equal-width interval.
#[derive(Debug, Clone, PartialEq)]
pub struct NhppFleetData {
    /// counts[i][j]: failures of computer i in interval j.
    pub counts: Vec<Vec<u64>>,
    /// Common interval width (one declared unit).
    pub interval: f64,
    /// Inclusion mask; outlier computers are excluded here rather than
    /// modeled separately.
    pub include: Vec<bool>,
}

impl NhppFleetData {
    pub fn new(counts: Vec<Vec<u64>>, interval: f64) -> Result<Self> {
        let n = counts.len();
        let d = NhppFleetData { counts, interval, include: vec![true; n] };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.counts.is_empty() {
            return Err(Error::Empty("no computers".into()));
        }
        if !(self.interval > 0.0) {
            return Err(Error::Param(format!("interval width must be positive, got {}", self.interval)));
        }
        let m = self.counts[0].len();
        if self.counts.iter().any(|row| row.len() != m) {
            return Err(Error::Schema("ragged count matrix".into()));
        }
        if self.include.len() != self.counts.len() {
            return Err(Error::Schema("inclusion mask length mismatch".into()));
        }
        Ok(())
    }
}

/// Per-computer intensity parameters of the extended power-law NHPP:
/// nu(t) = (phi/eta)(t/eta)^(phi-1) + rho.
#[derive(Debug, Clone, PartialEq)]
pub struct NhppParams {
    pub eta: Vec<f64>,
    pub phi: Vec<f64>,
    pub rho: Vec<f64>,
}

impl NhppParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.eta.len() != n || self.phi.len() != n || self.rho.len() != n {
            return Err(Error::Schema(format!(
                "parameter vectors must have length {n}"
            )));
        }
        if self
            .eta
            .iter()
            .chain(&self.phi)
            .chain(&self.rho)
            .any(|&x| !(x > 0.0))
        {
            return Err(Error::Param("eta, phi, rho must all be positive".into()));
        }
        Ok(())
    }
}

/// Expected count for computer parameters over the interval (a, b]:
/// (b/eta)^phi - (a/eta)^phi + rho (b - a).
pub fn nhpp_interval_mean(eta: f64, phi: f64, rho: f64, a: f64, b: f64) -> f64 {
    (b / eta).powf(phi) - (a / eta).powf(phi) + rho * (b - a)
}

/// Independent-interval Poisson log-likelihood of the fleet counts.
pub fn nhpp_log_likelihood(p: &NhppParams, d: &NhppFleetData) -> Result<f64> {
    d.validate()?;
    p.validate(d.counts.len())?;
    let t = d.interval;
    let mut ll = 0.0;
    for (i, row) in d.counts.iter().enumerate() {
        if !d.include[i] {
            continue;
        }
        let (eta, phi, rho) = (p.eta[i], p.phi[i], p.rho[i]);
        for (j, &x) in row.iter().enumerate() {
            let mu = nhpp_interval_mean(eta, phi, rho, j as f64 * t, (j + 1) as f64 * t);
            let x = x as f64;
            ll += if x > 0.0 { x * mu.ln() } else { 0.0 };
            ll += -mu - ln_gamma(x + 1.0);
        }
    }
    Ok(ll)
}

/// Probability a job of length `l` started at fleet age `s` finishes with
/// no failure on any included computer.
pub fn nhpp_reliability(p: &NhppParams, d_include: &[bool], l: f64, s: f64) -> Result<f64> {
    if !(l > 0.0) || !(s >= 0.0) {
        return Err(Error::Domain(format!("need l > 0 and s >= 0, got l={l}, s={s}")));
    }
    let n = p.eta.len();
    p.validate(n)?;
    if d_include.len() != n {
        return Err(Error::Schema("inclusion mask length mismatch".into()));
    }
    let mut r = 1.0;
    for i in 0..n {
        if !d_include[i] {
            continue;
        }
        let mu = nhpp_interval_mean(p.eta[i], p.phi[i], p.rho[i], s, s + l);
        r *= (-mu).exp();
    }
    Ok(r)
}

/// Hyperparameters of the NHPP hierarchy: gamma population distributions
/// for eta, phi, rho parameterized by mean and sd.
#[derive(Debug, Clone, PartialEq)]
pub struct NhppHyperParams {
    pub mu_eta: f64,
    pub sigma_eta: f64,
    pub mu_phi: f64,
    pub sigma_phi: f64,
    pub mu_rho: f64,
    pub sigma_rho: f64,
}

/// Weibull (shape, scale) hyperpriors on the six hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NhppHyperPriors {
    pub mu_eta: (f64, f64),
    pub sigma_eta: (f64, f64),
    pub mu_phi: (f64, f64),
    pub sigma_phi: (f64, f64),
    pub mu_rho: (f64, f64),
    pub sigma_rho: (f64, f64),
}

impl Default for NhppHyperPriors {
    fn default() -> Self {
        let diffuse = (1.0, 10.0);
        NhppHyperPriors {
            mu_eta: diffuse,
            sigma_eta: diffuse,
            mu_phi: (1.0, 2.0),
            sigma_phi: (1.0, 2.0),
            mu_rho: (1.0, 2.0),
            sigma_rho: (1.0, 2.0),
        }
    }
}

/// Full hierarchical log-posterior: the fleet likelihood, gamma population
/// priors on each computer's (eta, phi, rho), and Weibull hyperpriors.
pub fn nhpp_log_posterior(
    p: &NhppParams,
    h: &NhppHyperParams,
    d: &NhppFleetData,
    pr: &NhppHyperPriors,
) -> Result<f64> {
    let mut lp = nhpp_log_likelihood(p, d)?;
    let hypers = [
        (h.mu_eta, pr.mu_eta),
        (h.sigma_eta, pr.sigma_eta),
        (h.mu_phi, pr.mu_phi),
        (h.sigma_phi, pr.sigma_phi),
        (h.mu_rho, pr.mu_rho),
        (h.sigma_rho, pr.sigma_rho),
    ];
    for (value, (shape, scale)) in hypers {
        if !(value > 0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        lp += DistSpec::Weibull { shape, scale }.log_density(value)?;
    }
    let pops = [
        (&p.eta, h.mu_eta, h.sigma_eta),
        (&p.phi, h.mu_phi, h.sigma_phi),
        (&p.rho, h.mu_rho, h.sigma_rho),
    ];
    for (values, mean, sd) in pops {
        let pop = gamma_from_mean_sd(mean, sd)?;
        for (i, &v) in values.iter().enumerate() {
            if d.include[i] {
                lp += pop.log_density(v)?;
            }
        }
    }
    Ok(lp)
}

/// Metropolis glue for the NHPP hierarchy.
#[derive(Debug, Clone)]
pub struct NhppModel {
    pub data: NhppFleetData,
    pub priors: NhppHyperPriors,
}

impl NhppModel {
    /// Layout: six hyperparameters, then (eta_i, phi_i, rho_i) per
    /// included computer.
    pub fn initial_state(&self) -> Result<ParamVector> {
        self.data.validate()?;
        let mut entries = vec![
            param("mu_eta", 1.0, Support::Positive),
            param("sigma_eta", 1.0, Support::Positive),
            param("mu_phi", 1.0, Support::Positive),
            param("sigma_phi", 0.5, Support::Positive),
            param("mu_rho", 0.5, Support::Positive),
            param("sigma_rho", 0.5, Support::Positive),
        ];
        for i in 0..self.data.counts.len() {
            entries.push(param(&format!("eta_{i}"), 1.0, Support::Positive));
            entries.push(param(&format!("phi_{i}"), 1.0, Support::Positive));
            entries.push(param(&format!("rho_{i}"), 0.5, Support::Positive));
        }
        ParamVector::new(entries)
    }

    pub fn split(&self, pv: &ParamVector) -> (NhppParams, NhppHyperParams) {
        let h = NhppHyperParams {
            mu_eta: pv.value(0),
            sigma_eta: pv.value(1),
            mu_phi: pv.value(2),
            sigma_phi: pv.value(3),
            mu_rho: pv.value(4),
            sigma_rho: pv.value(5),
        };
        let n = self.data.counts.len();
        let p = NhppParams {
            eta: (0..n).map(|i| pv.value(6 + 3 * i)).collect(),
            phi: (0..n).map(|i| pv.value(7 + 3 * i)).collect(),
            rho: (0..n).map(|i| pv.value(8 + 3 * i)).collect(),
        };
        (p, h)
    }

    pub fn log_posterior(&self, pv: &ParamVector) -> f64 {
        let (p, h) = self.split(pv);
        nhpp_log_posterior(&p, &h, &self.data, &self.priors).unwrap_or(f64::NEG_INFINITY)
    }
}

// ---------------------------------------------------------------------------
// Weibull series hierarchy
// ---------------------------------------------------------------------------

/// Three-component series system with Weibull component lifetimes,
/// exchangeable gamma priors on the shapes and scales, and exponential
/// hyperpriors on the gamma parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct WeibullSeriesModel {
    /// Uncensored lifetimes per component.
    pub component_data: [Vec<f64>; 3],
    /// Uncensored full-system lifetimes.
    pub system_data: Vec<f64>,
    /// Exponential hyperprior rates for (lambda_a, zeta_a, lambda_b, zeta_b).
    pub hyper_rates: [f64; 4],
}

impl Default for WeibullSeriesModel {
    fn default() -> Self {
        WeibullSeriesModel {
            component_data: [vec![], vec![], vec![]],
            system_data: vec![],
            hyper_rates: [1.0; 4],
        }
    }
}

/// Parameter state: per-component Weibull (shape, scale) and the four
/// gamma-prior parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct WeibullSeriesParams {
    pub shape: [f64; 3],
    pub scale: [f64; 3],
    pub lambda_a: f64,
    pub zeta_a: f64,
    pub lambda_b: f64,
    pub zeta_b: f64,
}

fn weibull_log_pdf(shape: f64, scale: f64, t: f64) -> f64 {
    let z = t / scale;
    shape.ln() - scale.ln() + (shape - 1.0) * z.ln() - z.powf(shape)
}

fn weibull_log_sf(shape: f64, scale: f64, t: f64) -> f64 {
    -(t / scale).powf(shape)
}

impl WeibullSeriesModel {
    pub fn validate(&self) -> Result<()> {
        for data in self.component_data.iter().chain(std::iter::once(&self.system_data)) {
            if data.iter().any(|&t| !(t > 0.0)) {
                return Err(Error::Data("lifetimes must be positive".into()));
            }
        }
        if self.hyper_rates.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::Param("hyperprior rates must be positive".into()));
        }
        Ok(())
    }

    /// Density of the system lifetime, the minimum of the three component
    /// lifetimes: sum over i of f_i(t) prod_{j != i} R_j(t).
    pub fn system_log_density(&self, p: &WeibullSeriesParams, t: f64) -> f64 {
        let mut total_sf = 0.0;
        for i in 0..3 {
            total_sf += weibull_log_sf(p.shape[i], p.scale[i], t);
        }
        let mut hazard = 0.0;
        for i in 0..3 {
            // component hazard = f / R
            hazard += (weibull_log_pdf(p.shape[i], p.scale[i], t)
                - weibull_log_sf(p.shape[i], p.scale[i], t))
            .exp();
        }
        total_sf + hazard.ln()
    }

    pub fn system_reliability(&self, p: &WeibullSeriesParams, t: f64) -> f64 {
        let mut sf = 0.0;
        for i in 0..3 {
            sf += weibull_log_sf(p.shape[i], p.scale[i], t);
        }
        sf.exp()
    }

    pub fn log_posterior_params(&self, p: &WeibullSeriesParams) -> Result<f64> {
        self.validate()?;
        let positive = p
            .shape
            .iter()
            .chain(&p.scale)
            .chain([&p.lambda_a, &p.zeta_a, &p.lambda_b, &p.zeta_b])
            .all(|&x| x > 0.0);
        if !positive {
            return Ok(f64::NEG_INFINITY);
        }
        let mut lp = 0.0;
        // exponential hyperpriors
        for (value, rate) in [p.lambda_a, p.zeta_a, p.lambda_b, p.zeta_b]
            .into_iter()
            .zip(self.hyper_rates)
        {
            lp += rate.ln() - rate * value;
        }
        // exchangeable gamma priors on shapes and scales
        for i in 0..3 {
            lp += DistSpec::Gamma { shape: p.lambda_a, rate: p.zeta_a }.log_density(p.shape[i])?;
            lp += DistSpec::Gamma { shape: p.lambda_b, rate: p.zeta_b }.log_density(p.scale[i])?;
        }
        if !lp.is_finite() {
            return Ok(f64::NEG_INFINITY);
        }
        // component lifetimes
        for i in 0..3 {
            for &t in &self.component_data[i] {
                lp += weibull_log_pdf(p.shape[i], p.scale[i], t);
            }
        }
        // system lifetimes: density of the minimum
        for &t in &self.system_data {
            lp += self.system_log_density(p, t);
        }
        Ok(lp)
    }

    /// Layout: lambda_a, zeta_a, lambda_b, zeta_b, then (shape_i, scale_i)
    /// for the three components.
    pub fn initial_state(&self) -> Result<ParamVector> {
        self.validate()?;
        let mut entries = vec![
            param("lambda_a", 1.0, Support::Positive),
            param("zeta_a", 1.0, Support::Positive),
            param("lambda_b", 1.0, Support::Positive),
            param("zeta_b", 1.0, Support::Positive),
        ];
        for i in 0..3 {
            entries.push(param(&format!("shape_{i}"), 1.0, Support::Positive));
            entries.push(param(&format!("scale_{i}"), 1.0, Support::Positive));
        }
        ParamVector::new(entries)
    }

    pub fn params_from(&self, pv: &ParamVector) -> WeibullSeriesParams {
        WeibullSeriesParams {
            lambda_a: pv.value(0),
            zeta_a: pv.value(1),
            lambda_b: pv.value(2),
            zeta_b: pv.value(3),
            shape: [pv.value(4), pv.value(6), pv.value(8)],
            scale: [pv.value(5), pv.value(7), pv.value(9)],
        }
    }

    pub fn log_posterior(&self, pv: &ParamVector) -> f64 {
        let p = self.params_from(pv);
        self.log_posterior_params(&p).unwrap_or(f64::NEG_INFINITY)
    }
}

// ---------------------------------------------------------------------------
// Induced series priors
// ---------------------------------------------------------------------------

/// Which end of the series structure carries the uniform prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InducedPriorDirection {
    /// Each of k components has a Uniform(0,1) reliability prior; the
    /// system reliability is their product.
    ComponentsUniform,
    /// The system reliability is Uniform(0,1) and all k components share
    /// the same induced per-component prior.
    SystemUniform,
}

/// Density of the induced series prior at reliability `p`.
///
/// Components-uniform: (-log p)^(k-1) / Gamma(k), the density of a product
/// of k independent uniforms (mean 2^-k). System-uniform: the
/// per-component density (-log p)^(-(k-1)/k) / Gamma(1/k), with mean
/// 2^(-1/k).
pub fn induced_series_prior_density(
    p: f64,
    k: u32,
    direction: InducedPriorDirection,
) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::Domain(format!("reliability must lie in (0,1), got {p}")));
    }
    if k < 1 {
        return Err(Error::Param("component count must be at least 1".into()));
    }
    let neg_log = -p.ln();
    Ok(match direction {
        InducedPriorDirection::ComponentsUniform => {
            (((k - 1) as f64) * neg_log.ln() - ln_gamma(k as f64)).exp()
        }
        InducedPriorDirection::SystemUniform => {
            let k = k as f64;
            ((-(k - 1.0) / k) * neg_log.ln() - ln_gamma(1.0 / k)).exp()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use crate::component::degfail_reliability;

    #[test]
    fn component_reliability_kinds() {
        let flat = ComponentReliabilityModel::LogisticAging { theta0: 0.0, theta1: 0.0 };
        for t in [0.0, 3.0, 18.0] {
            assert_abs_diff_eq!(component_reliability(&flat, t).unwrap(), 0.5);
        }
        let w = ComponentReliabilityModel::WeibullLifetime { lambda0: 0.01, lambda1: 2.0 };
        assert_abs_diff_eq!(component_reliability(&w, 0.0).unwrap(), 1.0);
        let d = ComponentReliabilityModel::DegradationLognormal {
            mu: (0.35f64).ln(),
            sigma_b: 0.2,
            alpha: 100.0,
            level: 20.0,
        };
        assert_abs_diff_eq!(component_reliability(&d, 28.0).unwrap(), 0.5, epsilon = 1e-12);
        // same curve as the single-component module
        assert_abs_diff_eq!(
            component_reliability(&d, 17.0).unwrap(),
            degfail_reliability(100.0, 20.0, (0.35f64).ln(), 0.2, 17.0).unwrap(),
            epsilon = 1e-12
        );
        let bad = ComponentReliabilityModel::WeibullLifetime { lambda0: -1.0, lambda1: 2.0 };
        assert!(component_reliability(&bad, 1.0).is_err());
    }

    #[test]
    fn series_product_and_min_bound() {
        let m1 = ComponentReliabilityModel::LogisticAging { theta0: 2.1972245773362196, theta1: 0.0 }; // 0.9
        let m2 = ComponentReliabilityModel::WeibullLifetime { lambda0: 0.22314355131420976, lambda1: 1.0 }; // exp(-l0) = 0.8 at t=1
        assert_abs_diff_eq!(
            series_reliability(&[m1], 1.0).unwrap(),
            component_reliability(&m1, 1.0).unwrap()
        );
        assert_abs_diff_eq!(series_reliability(&[m1, m2], 1.0).unwrap(), 0.72, epsilon = 1e-12);
        // product never exceeds the weakest component
        let m3 = ComponentReliabilityModel::DegradationLognormal {
            mu: -1.0,
            sigma_b: 0.3,
            alpha: 50.0,
            level: 10.0,
        };
        for t in [0.5, 2.0, 10.0, 25.0] {
            let all = series_reliability(&[m1, m2, m3], t).unwrap();
            let min = [m1, m2, m3]
                .iter()
                .map(|m| component_reliability(m, t).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(all <= min + 1e-15);
        }
        assert!(series_reliability(&[], 1.0).is_err());
    }

    fn small_multilevel() -> MultilevelSeriesModel {
        let logistic_data = BinomialAgeData {
            rows: vec![(0.0, 25, 25), (10.0, 25, 24), (20.0, 25, 20)],
        };
        MultilevelSeriesModel {
            center_age: MultilevelSeriesModel::mean_logistic_age(&logistic_data),
            logistic_data,
            weibull_data: LifetimeData {
                observed: vec![14.1, 22.0, 33.5],
                censored: vec![20.0, 20.0, 40.0],
            },
            degradation: vec![(2.0, 95.0), (10.0, 72.0)],
            deg_lifetimes: LifetimeData { observed: vec![18.5], censored: vec![20.0; 5] },
            level: 20.0,
            system_data: BinomialAgeData { rows: vec![(0.0, 15, 14), (20.0, 15, 12)] },
            priors: MultilevelPriors::default(),
        }
    }

    fn small_params() -> MultilevelParams {
        MultilevelParams {
            theta0: 3.0,
            theta1: -0.1,
            lambda0: 5e-5,
            lambda1: 3.0,
            alpha: 100.0,
            mu: -1.05,
            sigma_b: 0.2,
            sigma_y: 5.0,
            log_betas: vec![-1.0, -1.1],
        }
    }

    #[test]
    fn multilevel_additive_decomposition() {
        // removing the system data subtracts exactly the system factors
        let model = small_multilevel();
        let p = small_params();
        let full = model.log_posterior_params(&p).unwrap();
        let mut no_system = model.clone();
        no_system.system_data = BinomialAgeData::default();
        let partial = no_system.log_posterior_params(&p).unwrap();
        let mut system_terms = 0.0;
        for &(t, n, s) in &model.system_data.rows {
            let r = model.system_reliability(&p, t).unwrap();
            system_terms +=
                s as f64 * r.ln() + (n - s) as f64 * (1.0 - r).ln();
        }
        assert_abs_diff_eq!(full, partial + system_terms, epsilon = 1e-10);
    }

    #[test]
    fn multilevel_one_more_passing_system_test() {
        let model = small_multilevel();
        let p = small_params();
        let base = model.log_posterior_params(&p).unwrap();
        let t_new = 7.0;
        let mut bigger = model.clone();
        bigger.system_data.rows.push((t_new, 1, 1));
        let r = model.system_reliability(&p, t_new).unwrap();
        assert_abs_diff_eq!(
            bigger.log_posterior_params(&p).unwrap(),
            base + r.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn multilevel_rejects_bad_shapes() {
        let model = small_multilevel();
        let mut p = small_params();
        p.log_betas.pop();
        assert!(matches!(model.log_posterior_params(&p), Err(Error::Schema(_))));
        let mut bad = small_multilevel();
        bad.logistic_data.rows[0] = (0.0, 10, 11);
        assert!(matches!(bad.validate(), Err(Error::Data(_))));
    }

    #[test]
    fn partial_tests_examples() {
        let p = vec![vec![0.9, 0.9]];
        let t = |w: Vec<usize>, f: Vec<usize>, s: Vec<usize>| PartialSystemTest {
            known_working: w,
            known_failed: f,
            some_failed: s,
            age: 0.0,
        };
        assert_abs_diff_eq!(
            partial_test_log_likelihood(&[t(vec![0, 1], vec![], vec![])], &p).unwrap(),
            (0.81f64).ln(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            partial_test_log_likelihood(&[t(vec![], vec![], vec![0, 1])], &p).unwrap(),
            (0.19f64).ln(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            partial_test_log_likelihood(&[t(vec![0], vec![1], vec![])], &p).unwrap(),
            (0.09f64).ln(),
            epsilon = 1e-12
        );
        // all probabilities 1 with a nonempty at-least-one-failed set
        let sure = vec![vec![1.0, 1.0]];
        assert_eq!(
            partial_test_log_likelihood(&[t(vec![], vec![], vec![0, 1])], &sure).unwrap(),
            f64::NEG_INFINITY
        );
        // overlap is rejected
        assert!(matches!(
            partial_test_log_likelihood(&[t(vec![0], vec![0], vec![])], &p),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn partial_tests_singleton_equivalence() {
        // a singleton "at least one failed" set is a known failure
        for q in [0.1, 0.5, 0.93] {
            let p = vec![vec![q]];
            let a = partial_test_log_likelihood(
                &[PartialSystemTest { some_failed: vec![0], ..Default::default() }],
                &p,
            )
            .unwrap();
            let b = partial_test_log_likelihood(
                &[PartialSystemTest { known_failed: vec![0], ..Default::default() }],
                &p,
            )
            .unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn partial_tests_two_component_brute_force() {
        // every 2-component outcome pattern, checked against direct
        // enumeration of component outcomes
        let (p1, p2) = (0.85, 0.6);
        let probs = vec![vec![p1, p2]];
        let like = |test: PartialSystemTest| {
            partial_test_log_likelihood(&[test], &probs).unwrap().exp()
        };
        // C1 = {0,1}
        assert_abs_diff_eq!(
            like(PartialSystemTest { known_working: vec![0, 1], ..Default::default() }),
            p1 * p2,
            epsilon = 1e-12
        );
        // C2 = {0,1}
        assert_abs_diff_eq!(
            like(PartialSystemTest { known_failed: vec![0, 1], ..Default::default() }),
            (1.0 - p1) * (1.0 - p2),
            epsilon = 1e-12
        );
        // C3 = {0,1}: 1 - both working, by enumeration fw + wf + ff
        let enumerated = p1 * (1.0 - p2) + (1.0 - p1) * p2 + (1.0 - p1) * (1.0 - p2);
        assert_abs_diff_eq!(
            like(PartialSystemTest { some_failed: vec![0, 1], ..Default::default() }),
            enumerated,
            epsilon = 1e-12
        );
        // mixed: C1 = {0}, C3 = {1}
        assert_abs_diff_eq!(
            like(PartialSystemTest {
                known_working: vec![0],
                some_failed: vec![1],
                ..Default::default()
            }),
            p1 * (1.0 - p2),
            epsilon = 1e-12
        );
    }

    #[test]
    fn nhpp_likelihood_examples() {
        // all zero counts, homogeneous rate 1: -(sum of means) = -2
        let d = NhppFleetData::new(vec![vec![0, 0]], 1.0).unwrap();
        let p = NhppParams { eta: vec![1.0], phi: vec![1.0], rho: vec![1e-300] };
        assert_abs_diff_eq!(nhpp_log_likelihood(&p, &d).unwrap(), -2.0, epsilon = 1e-9);
        // single cell x=1 with mu = 1: ln 1 - 1 = -1
        let d = NhppFleetData::new(vec![vec![1]], 1.0).unwrap();
        let p = NhppParams { eta: vec![1.0], phi: vec![2.0], rho: vec![1e-300] };
        assert_abs_diff_eq!(nhpp_log_likelihood(&p, &d).unwrap(), -1.0, epsilon = 1e-9);
    }

    #[test]
    fn nhpp_matches_poisson_product_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        use rand::Rng as _;
        for _ in 0..20 {
            let c = rng.random_range(1..4usize);
            let m = rng.random_range(1..5usize);
            let t = rng.random_range(0.5..2.0);
            let counts: Vec<Vec<u64>> =
                (0..c).map(|_| (0..m).map(|_| rng.random_range(0..5u64)).collect()).collect();
            let d = NhppFleetData::new(counts.clone(), t).unwrap();
            let p = NhppParams {
                eta: (0..c).map(|_| rng.random_range(0.5..3.0)).collect(),
                phi: (0..c).map(|_| rng.random_range(0.3..2.5)).collect(),
                rho: (0..c).map(|_| rng.random_range(0.01..1.0)).collect(),
            };
            let ll = nhpp_log_likelihood(&p, &d).unwrap();
            let mut oracle = 0.0;
            for i in 0..c {
                for j in 0..m {
                    let mu = nhpp_interval_mean(
                        p.eta[i],
                        p.phi[i],
                        p.rho[i],
                        j as f64 * t,
                        (j + 1) as f64 * t,
                    );
                    oracle += DistSpec::Poisson { mean: mu }
                        .log_density(counts[i][j] as f64)
                        .unwrap();
                }
            }
            assert_abs_diff_eq!(ll, oracle, epsilon = 1e-10);
        }
    }

    #[test]
    fn nhpp_interval_additivity() {
        // merging two adjacent intervals changes only the factorial terms
        let (eta, phi, rho) = (1.5, 0.7, 0.2);
        let t = 1.0;
        let m1 = nhpp_interval_mean(eta, phi, rho, 0.0, t);
        let m2 = nhpp_interval_mean(eta, phi, rho, t, 2.0 * t);
        let merged = nhpp_interval_mean(eta, phi, rho, 0.0, 2.0 * t);
        assert_abs_diff_eq!(m1 + m2, merged, epsilon = 1e-12);
    }

    #[test]
    fn nhpp_reliability_examples() {
        // homogeneous case is independent of start age
        let p = NhppParams { eta: vec![2.0, 3.0], phi: vec![1.0, 1.0], rho: vec![0.1, 0.2] };
        let inc = vec![true, true];
        let a = nhpp_reliability(&p, &inc, 1.5, 0.0).unwrap();
        let b = nhpp_reliability(&p, &inc, 1.5, 7.0).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        assert_abs_diff_eq!(
            a,
            (-1.5f64 / 2.0 - 0.1 * 1.5 - 1.5 / 3.0 - 0.2 * 1.5).exp(),
            epsilon = 1e-12
        );
        // one computer, eta=1, phi=2, rho->0, s=1, l=1: exp(1 - 4)
        let p = NhppParams { eta: vec![1.0], phi: vec![2.0], rho: vec![1e-300] };
        assert_abs_diff_eq!(
            nhpp_reliability(&p, &[true], 1.0, 1.0).unwrap(),
            (-3.0f64).exp(),
            epsilon = 1e-9
        );
        assert!(nhpp_reliability(&p, &[true], 0.0, 1.0).is_err());
    }

    #[test]
    fn nhpp_independent_increments() {
        let p = NhppParams { eta: vec![1.3, 0.8], phi: vec![0.6, 1.7], rho: vec![0.05, 0.3] };
        let inc = vec![true, true];
        for &(l1, l2, s) in &[(1.0, 2.0, 0.5), (0.2, 0.3, 3.0), (5.0, 1.0, 0.0)] {
            let whole = nhpp_reliability(&p, &inc, l1 + l2, s).unwrap();
            let split = nhpp_reliability(&p, &inc, l1, s).unwrap()
                * nhpp_reliability(&p, &inc, l2, s + l1).unwrap();
            assert_abs_diff_eq!(whole, split, epsilon = 1e-12);
        }
    }

    #[test]
    fn nhpp_reliability_growth_when_phi_below_one() {
        let p = NhppParams {
            eta: vec![1.0, 2.0, 0.7],
            phi: vec![0.5, 0.8, 0.9],
            rho: vec![0.01, 0.02, 0.005],
        };
        let inc = vec![true; 3];
        let mut prev = 0.0;
        for i in 0..30 {
            let s = i as f64 * 0.5;
            let r = nhpp_reliability(&p, &inc, 6.0, s).unwrap();
            assert!(r >= prev, "R(6, {s}) = {r} dropped below {prev}");
            prev = r;
        }
    }

    #[test]
    fn weibull_series_pure_prior_sum() {
        let model = WeibullSeriesModel::default();
        let p = WeibullSeriesParams {
            shape: [1.0; 3],
            scale: [1.0; 3],
            lambda_a: 1.0,
            zeta_a: 1.0,
            lambda_b: 1.0,
            zeta_b: 1.0,
        };
        let lp = model.log_posterior_params(&p).unwrap();
        let mut expect = 0.0;
        for _ in 0..4 {
            expect += -1.0; // Exponential(1) log-density at 1
        }
        for _ in 0..6 {
            expect += DistSpec::Gamma { shape: 1.0, rate: 1.0 }.log_density(1.0).unwrap();
        }
        assert_abs_diff_eq!(lp, expect, epsilon = 1e-12);
    }

    #[test]
    fn weibull_series_exponential_factor() {
        // one component-2 lifetime at t = scale with shape 1 contributes
        // -ln(scale) - 1
        let mut model = WeibullSeriesModel::default();
        model.component_data[0] = vec![2.5];
        let p = WeibullSeriesParams {
            shape: [1.0; 3],
            scale: [2.5, 1.0, 1.0],
            lambda_a: 1.0,
            zeta_a: 1.0,
            lambda_b: 1.0,
            zeta_b: 1.0,
        };
        let with = model.log_posterior_params(&p).unwrap();
        let without = WeibullSeriesModel::default().log_posterior_params(&p).unwrap();
        assert_abs_diff_eq!(with - without, -(2.5f64).ln() - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn weibull_series_system_density_matches_simulated_minima() {
        // Monte Carlo oracle: histogram density of the minimum of the three
        // component lifetimes
        let model = WeibullSeriesModel::default();
        let p = WeibullSeriesParams {
            shape: [1.5, 2.0, 0.8],
            scale: [2.0, 3.0, 4.0],
            lambda_a: 1.0,
            zeta_a: 1.0,
            lambda_b: 1.0,
            zeta_b: 1.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 1_000_000usize;
        let dists: Vec<DistSpec> = (0..3)
            .map(|i| DistSpec::Weibull { shape: p.shape[i], scale: p.scale[i] })
            .collect();
        let mut mins = Vec::with_capacity(n);
        for _ in 0..n {
            let m = dists
                .iter()
                .map(|d| d.sample(&mut rng).unwrap())
                .fold(f64::INFINITY, f64::min);
            mins.push(m);
        }
        for &(lo, hi) in &[(0.4, 0.6), (0.9, 1.1), (1.8, 2.2)] {
            let frac =
                mins.iter().filter(|&&m| lo <= m && m < hi).count() as f64 / n as f64;
            let mid = 0.5 * (lo + hi);
            let dens = model.system_log_density(&p, mid).exp();
            let approx_frac = dens * (hi - lo);
            // bin-width bias plus Monte Carlo noise: a few percent
            assert_abs_diff_eq!(frac, approx_frac, epsilon = 0.05 * approx_frac.max(0.01));
        }
        // and the survivor function agrees with the empirical tail
        let tail = mins.iter().filter(|&&m| m > 1.0).count() as f64 / n as f64;
        assert_abs_diff_eq!(tail, model.system_reliability(&p, 1.0), epsilon = 3e-3);
    }

    #[test]
    fn weibull_series_rejects_nonpositive_lifetimes() {
        let mut model = WeibullSeriesModel::default();
        model.system_data = vec![1.0, -2.0];
        assert!(matches!(model.validate(), Err(Error::Data(_))));
    }

    #[test]
    fn induced_prior_k1_is_uniform() {
        for p in [0.1, 0.5, 0.9] {
            for dir in [InducedPriorDirection::ComponentsUniform, InducedPriorDirection::SystemUniform] {
                assert_abs_diff_eq!(
                    induced_series_prior_density(p, 1, dir).unwrap(),
                    1.0,
                    epsilon = 1e-12
                );
            }
        }
        assert!(induced_series_prior_density(0.0, 2, InducedPriorDirection::ComponentsUniform)
            .is_err());
    }

    #[test]
    fn induced_prior_integrates_to_one_and_matches_product_mean() {
        // integrate on the x = -ln p scale where the integrand is smooth;
        // the mean picks up an extra factor e^(-x)
        for k in 2..=6u32 {
            let n = 200_000;
            let hi = 60.0;
            let h = hi / n as f64;
            let mut integral = 0.0;
            let mut mean = 0.0;
            for i in 0..n {
                let x = (i as f64 + 0.5) * h;
                let p = (-x).exp();
                let d = induced_series_prior_density(p, k, InducedPriorDirection::ComponentsUniform)
                    .unwrap();
                integral += d * p * h;
                mean += d * p * p * h;
            }
            assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-8);
            assert_abs_diff_eq!(mean, (2.0f64).powi(-(k as i32)), epsilon = 1e-8);
        }
    }

    #[test]
    fn induced_prior_system_uniform_properties() {
        // Monte Carlo oracle: iid component reliabilities drawn as
        // p = exp(-X), X ~ Gamma(1/k, 1), have mean 2^(-1/k) and their
        // k-fold product is Uniform(0,1)
        let k = 3u32;
        let gamma = DistSpec::Gamma { shape: 1.0 / k as f64, rate: 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 100_000usize;
        let mut sum = 0.0;
        let mut products = Vec::with_capacity(n);
        for _ in 0..n {
            let mut prod = 1.0;
            for _ in 0..k {
                let p = (-gamma.sample(&mut rng).unwrap()).exp();
                sum += p;
                prod *= p;
            }
            products.push(prod);
        }
        let mean = sum / (k as usize * n) as f64;
        let want = (2.0f64).powf(-1.0 / k as f64);
        assert_abs_diff_eq!(mean, want, epsilon = 5e-3);
        for q in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let frac = products.iter().filter(|&&p| p <= q).count() as f64 / n as f64;
            assert_abs_diff_eq!(frac, q, epsilon = 6e-3);
        }
        // the density integrates to 1; substitute x = u^k so the -ln p
        // scale integrand k exp(-u^k)/Gamma(1/k) is smooth
        let m = 200_000;
        let hi = 5.0;
        let h = hi / m as f64;
        let mut integral = 0.0;
        for i in 0..m {
            let u: f64 = (i as f64 + 0.5) * h;
            let x = u.powi(k as i32);
            let p = (-x).exp();
            let d = induced_series_prior_density(p, k, InducedPriorDirection::SystemUniform)
                .unwrap();
            integral += d * p * (k as f64) * u.powi(k as i32 - 1) * h;
        }
        assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-6);
    }
}
