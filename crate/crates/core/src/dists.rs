//! Probability kernel: densities, CDFs, quantiles, and samplers for the
//! distribution families the model modules use.
//!
//! Parameterizations are fixed per family:
//! - `Weibull { shape, scale }` has density
//!   f(t) = (shape/scale)(t/scale)^(shape-1) exp(-(t/scale)^shape).
//!   The rate-style form R(t) = exp(-l0 t^l1) is recovered via
//!   l0 = scale^(-shape), l1 = shape.
//! - `Gamma { shape, rate }` has mean shape/rate. The (mean, sd)
//!   reparameterization used by the NHPP hierarchy is available through
//!   [`gamma_from_mean_sd`]: shape = (mean/sd)^2, rate = mean/sd^2.
//! - `Lognormal { location, scale }` are the mean and sd of the log.

use rand::Rng;
use rand_distr::Distribution as _;
use statrs::function::beta::{beta_reg, ln_beta};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::{Error, Result};

pub const LN_2PI: f64 = 1.8378770664093453;

/// A fully specified distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistSpec {
    Normal { mean: f64, sd: f64 },
    Lognormal { location: f64, scale: f64 },
    Weibull { shape: f64, scale: f64 },
    Gamma { shape: f64, rate: f64 },
    Beta { a: f64, b: f64 },
    Exponential { rate: f64 },
    Binomial { n: u64, p: f64 },
    Poisson { mean: f64 },
    Hypergeometric { population: u64, features: u64, draws: u64 },
    ExtendedHypergeometric { population: u64, features: u64, draws: u64, odds: f64 },
    Uniform { lo: f64, hi: f64 },
}

/// Gamma distribution parameterized by mean and standard deviation.
pub fn gamma_from_mean_sd(mean: f64, sd: f64) -> Result<DistSpec> {
    if !(mean > 0.0) || !(sd > 0.0) {
        return Err(Error::Param(format!(
            "gamma mean/sd must be positive, got mean={mean}, sd={sd}"
        )));
    }
    Ok(DistSpec::Gamma { shape: (mean / sd).powi(2), rate: mean / (sd * sd) })
}

impl DistSpec {
    /// Checks the family's parameter invariants.
    pub fn validate(&self) -> Result<()> {
        use DistSpec::*;
        let bad = |m: String| Err(Error::Param(m));
        match *self {
            Normal { mean, sd } => {
                if !mean.is_finite() || !(sd > 0.0) {
                    return bad(format!("Normal requires finite mean and sd > 0, got ({mean}, {sd})"));
                }
            }
            Lognormal { location, scale } => {
                if !location.is_finite() || !(scale > 0.0) {
                    return bad(format!("Lognormal requires scale > 0, got ({location}, {scale})"));
                }
            }
            Weibull { shape, scale } => {
                if !(shape > 0.0) || !(scale > 0.0) {
                    return bad(format!("Weibull requires shape, scale > 0, got ({shape}, {scale})"));
                }
            }
            Gamma { shape, rate } => {
                if !(shape > 0.0) || !(rate > 0.0) {
                    return bad(format!("Gamma requires shape, rate > 0, got ({shape}, {rate})"));
                }
            }
            Beta { a, b } => {
                if !(a > 0.0) || !(b > 0.0) {
                    return bad(format!("Beta requires a, b > 0, got ({a}, {b})"));
                }
            }
            Exponential { rate } => {
                if !(rate > 0.0) {
                    return bad(format!("Exponential requires rate > 0, got {rate}"));
                }
            }
            Binomial { n: _, p } => {
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("Binomial requires p in [0,1], got {p}"));
                }
            }
            Poisson { mean } => {
                if !(mean >= 0.0) || !mean.is_finite() {
                    return bad(format!("Poisson requires mean >= 0, got {mean}"));
                }
            }
            Hypergeometric { population, features, draws } => {
                if features > population || draws > population {
                    return bad(format!(
                        "Hypergeometric requires K <= N and n <= N, got N={population}, K={features}, n={draws}"
                    ));
                }
            }
            ExtendedHypergeometric { population, features, draws, odds } => {
                if features > population || draws > population {
                    return bad(format!(
                        "ExtendedHypergeometric requires K <= N and n <= N, got N={population}, K={features}, n={draws}"
                    ));
                }
                if !(odds > 0.0) {
                    return bad(format!("ExtendedHypergeometric requires odds > 0, got {odds}"));
                }
            }
            Uniform { lo, hi } => {
                if !(lo < hi) {
                    return bad(format!("Uniform requires lo < hi, got ({lo}, {hi})"));
                }
            }
        }
        Ok(())
    }

    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            DistSpec::Binomial { .. }
                | DistSpec::Poisson { .. }
                | DistSpec::Hypergeometric { .. }
                | DistSpec::ExtendedHypergeometric { .. }
        )
    }

    /// Natural-log density (or mass) at `x`. Points outside the support are
    /// legal input and return negative infinity.
    pub fn log_density(&self, x: f64) -> Result<f64> {
        self.validate()?;
        use DistSpec::*;
        let neg_inf = f64::NEG_INFINITY;
        if self.is_discrete() && (x.fract() != 0.0 || !x.is_finite()) {
            return Ok(neg_inf);
        }
        Ok(match *self {
            Normal { mean, sd } => {
                let z = (x - mean) / sd;
                -0.5 * LN_2PI - sd.ln() - 0.5 * z * z
            }
            Lognormal { location, scale } => {
                if x <= 0.0 {
                    neg_inf
                } else {
                    let z = (x.ln() - location) / scale;
                    -x.ln() - scale.ln() - 0.5 * LN_2PI - 0.5 * z * z
                }
            }
            Weibull { shape, scale } => {
                if x < 0.0 {
                    neg_inf
                } else if x == 0.0 {
                    match shape.partial_cmp(&1.0).unwrap() {
                        std::cmp::Ordering::Less => f64::INFINITY,
                        std::cmp::Ordering::Equal => -scale.ln(),
                        std::cmp::Ordering::Greater => neg_inf,
                    }
                } else {
                    let z = x / scale;
                    shape.ln() - scale.ln() + (shape - 1.0) * z.ln() - z.powf(shape)
                }
            }
            Gamma { shape, rate } => {
                if x < 0.0 {
                    neg_inf
                } else if x == 0.0 {
                    match shape.partial_cmp(&1.0).unwrap() {
                        std::cmp::Ordering::Less => f64::INFINITY,
                        std::cmp::Ordering::Equal => rate.ln(),
                        std::cmp::Ordering::Greater => neg_inf,
                    }
                } else {
                    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
                }
            }
            Beta { a, b } => {
                if !(0.0..=1.0).contains(&x) {
                    neg_inf
                } else if x == 0.0 || x == 1.0 {
                    let edge_shape = if x == 0.0 { a } else { b };
                    match edge_shape.partial_cmp(&1.0).unwrap() {
                        std::cmp::Ordering::Less => f64::INFINITY,
                        std::cmp::Ordering::Equal => {
                            (if x == 0.0 { (b - 1.0) * (1.0f64).ln() } else { 0.0 }) - ln_beta(a, b)
                        }
                        std::cmp::Ordering::Greater => neg_inf,
                    }
                } else {
                    (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_beta(a, b)
                }
            }
            Exponential { rate } => {
                if x < 0.0 {
                    neg_inf
                } else {
                    rate.ln() - rate * x
                }
            }
            Binomial { n, p } => {
                let y = x as i64;
                if y < 0 || y as u64 > n {
                    neg_inf
                } else {
                    let y = y as u64;
                    let mut lp = ln_binomial(n, y);
                    // p = 0 or 1 edges: mass concentrates at 0 or n.
                    if y > 0 {
                        if p == 0.0 {
                            return Ok(neg_inf);
                        }
                        lp += y as f64 * p.ln();
                    }
                    if y < n {
                        if p == 1.0 {
                            return Ok(neg_inf);
                        }
                        lp += (n - y) as f64 * (1.0 - p).ln();
                    }
                    lp
                }
            }
            Poisson { mean } => {
                let y = x as i64;
                if y < 0 {
                    neg_inf
                } else if mean == 0.0 {
                    if y == 0 { 0.0 } else { neg_inf }
                } else {
                    y as f64 * mean.ln() - mean - ln_gamma(y as f64 + 1.0)
                }
            }
            Hypergeometric { population, features, draws } => {
                hypergeom_log_pmf(population, features, draws, x as i64)
            }
            ExtendedHypergeometric { population, features, draws, odds } => {
                ext_hypergeom_log_pmf(population, features, draws, odds, x as i64)
            }
            Uniform { lo, hi } => {
                if x < lo || x > hi {
                    neg_inf
                } else {
                    -(hi - lo).ln()
                }
            }
        })
    }

    /// Cumulative distribution function at `x`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        use DistSpec::*;
        Ok(match *self {
            Normal { mean, sd } => normal_cdf((x - mean) / sd),
            Lognormal { location, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    normal_cdf((x.ln() - location) / scale)
                }
            }
            Weibull { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / scale).powf(shape)).exp_m1()
                }
            }
            Gamma { shape, rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_lr(shape, rate * x)
                }
            }
            Beta { a, b } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    beta_reg(a, b, x)
                }
            }
            Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Poisson { mean } => {
                if x < 0.0 {
                    0.0
                } else if mean == 0.0 {
                    1.0
                } else {
                    1.0 - gamma_lr(x.floor() + 1.0, mean)
                }
            }
            Binomial { .. } | Hypergeometric { .. } | ExtendedHypergeometric { .. } => {
                let k = x.floor();
                let (lo, hi) = self.integer_support().unwrap();
                if k < lo as f64 {
                    0.0
                } else {
                    let hi = (hi as f64).min(k) as i64;
                    let mut total = 0.0;
                    for y in lo..=hi {
                        total += self.log_density(y as f64)?.exp();
                    }
                    total.min(1.0)
                }
            }
            Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        })
    }

    /// Quantile function for continuous families; `p` must lie in (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.validate()?;
        if !(0.0 < p && p < 1.0) {
            return Err(Error::Domain(format!("quantile requires p in (0,1), got {p}")));
        }
        use DistSpec::*;
        Ok(match *self {
            Normal { mean, sd } => mean + sd * normal_quantile(p),
            Lognormal { location, scale } => (location + scale * normal_quantile(p)).exp(),
            Weibull { shape, scale } => scale * (-(-p).ln_1p()).powf(1.0 / shape),
            Exponential { rate } => -(-p).ln_1p() / rate,
            Uniform { lo, hi } => lo + p * (hi - lo),
            Gamma { shape, rate } => {
                // bracket: expand upward from the mean
                let mean = shape / rate;
                let mut hi = mean.max(1e-300);
                while gamma_lr(shape, rate * hi) < p {
                    hi *= 2.0;
                }
                bisect_quantile(|x| gamma_lr(shape, rate * x), p, 0.0, hi)
            }
            Beta { a, b } => bisect_quantile(|x| beta_reg(a, b, x), p, 0.0, 1.0),
            Binomial { .. } | Poisson { .. } | Hypergeometric { .. }
            | ExtendedHypergeometric { .. } => {
                return Err(Error::Domain(
                    "quantile is defined for continuous families only".into(),
                ));
            }
        })
    }

    /// Draws one value. Deterministic given the rng state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        self.validate()?;
        use DistSpec::*;
        let p_err = |e: String| Error::Param(e);
        Ok(match *self {
            Normal { mean, sd } => rand_distr::Normal::new(mean, sd)
                .map_err(|e| p_err(e.to_string()))?
                .sample(rng),
            Lognormal { location, scale } => rand_distr::LogNormal::new(location, scale)
                .map_err(|e| p_err(e.to_string()))?
                .sample(rng),
            Weibull { shape, scale } => rand_distr::Weibull::new(scale, shape)
                .map_err(|e| p_err(e.to_string()))?
                .sample(rng),
            Gamma { shape, rate } => rand_distr::Gamma::new(shape, 1.0 / rate)
                .map_err(|e| p_err(e.to_string()))?
                .sample(rng),
            Beta { a, b } => rand_distr::Beta::new(a, b)
                .map_err(|e| p_err(e.to_string()))?
                .sample(rng),
            Exponential { rate } => rand_distr::Exp::new(rate)
                .map_err(|e| p_err(e.to_string()))?
                .sample(rng),
            Binomial { n, p } => {
                if n == 0 {
                    0.0
                } else {
                    rand_distr::Binomial::new(n, p)
                        .map_err(|e| p_err(e.to_string()))?
                        .sample(rng) as f64
                }
            }
            Poisson { mean } => {
                if mean == 0.0 {
                    0.0
                } else {
                    rand_distr::Poisson::new(mean)
                        .map_err(|e| p_err(e.to_string()))?
                        .sample(rng)
                }
            }
            Hypergeometric { population, features, draws } => {
                rand_distr::Hypergeometric::new(population, features, draws)
                    .map_err(|e| p_err(e.to_string()))?
                    .sample(rng) as f64
            }
            ExtendedHypergeometric { .. } => {
                // inverse-cdf walk over the (small) feasible range
                let (lo, hi) = self.integer_support().unwrap();
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut last = lo;
                for y in lo..=hi {
                    acc += self.log_density(y as f64)?.exp();
                    last = y;
                    if u <= acc {
                        break;
                    }
                }
                last as f64
            }
            Uniform { lo, hi } => rng.random_range(lo..hi),
        })
    }

    /// Integer support bounds for discrete families.
    pub fn integer_support(&self) -> Option<(i64, i64)> {
        use DistSpec::*;
        match *self {
            Binomial { n, .. } => Some((0, n as i64)),
            Poisson { .. } => Some((0, i64::MAX)),
            Hypergeometric { population, features, draws }
            | ExtendedHypergeometric { population, features, draws, .. } => {
                let lo = (draws + features).saturating_sub(population) as i64;
                let hi = draws.min(features) as i64;
                Some((lo, hi))
            }
            _ => None,
        }
    }
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

fn hypergeom_log_pmf(population: u64, features: u64, draws: u64, y: i64) -> f64 {
    let lo = (draws + features).saturating_sub(population) as i64;
    let hi = draws.min(features) as i64;
    if y < lo || y > hi {
        return f64::NEG_INFINITY;
    }
    let y = y as u64;
    ln_binomial(draws, y) + ln_binomial(population - draws, features - y)
        - ln_binomial(population, features)
}

/// Log-pmf of the extended hypergeometric distribution: a sample of `draws`
/// from a lot of `population` items containing `features` feature items,
/// where each feature item is `odds` times as likely to be selected.
///
/// The normalizer is computed in log space with a running-max shift, so lot
/// sizes in the thousands do not overflow.
pub fn ext_hypergeom_log_pmf(
    population: u64,
    features: u64,
    draws: u64,
    odds: f64,
    y: i64,
) -> f64 {
    let lo = (draws + features).saturating_sub(population) as i64;
    let hi = draws.min(features) as i64;
    if y < lo || y > hi {
        return f64::NEG_INFINITY;
    }
    let log_odds = odds.ln();
    let log_term = |j: i64| {
        let j = j as u64;
        ln_binomial(draws, j) + ln_binomial(population - draws, features - j) + j as f64 * log_odds
    };
    let mut max = f64::NEG_INFINITY;
    for j in lo..=hi {
        max = max.max(log_term(j));
    }
    let mut norm = 0.0;
    for j in lo..=hi {
        norm += (log_term(j) - max).exp();
    }
    log_term(y) - max - norm.ln()
}

/// Pmf of the extended hypergeometric distribution. Returns 0 for `y`
/// outside the feasible range; at `odds = 1` this is the ordinary
/// hypergeometric pmf.
pub fn ext_hypergeom_pmf(
    population: u64,
    features: u64,
    draws: u64,
    odds: f64,
    y: i64,
) -> Result<f64> {
    if features > population || draws > population {
        return Err(Error::Param(format!(
            "extended hypergeometric requires K <= N and n <= N, got N={population}, K={features}, n={draws}"
        )));
    }
    if !(odds > 0.0) {
        return Err(Error::Param(format!("odds must be positive, got {odds}")));
    }
    Ok(ext_hypergeom_log_pmf(population, features, draws, odds, y).exp())
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal log-density.
pub fn normal_log_pdf(z: f64) -> f64 {
    -0.5 * LN_2PI - 0.5 * z * z
}

/// Standard normal quantile: Acklam's rational approximation refined by one
/// Newton step against the CDF, giving absolute error well below 1e-9.
pub fn normal_quantile(p: f64) -> f64 {
    debug_assert!(0.0 < p && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    let x = if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (-p).ln_1p()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // Newton refinement
    let e = normal_cdf(x) - p;
    x - e / normal_log_pdf(x).exp()
}

fn bisect_quantile(cdf: impl Fn(f64) -> f64, p: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn normal_log_density_at_mode() {
        let d = DistSpec::Normal { mean: 0.0, sd: 1.0 };
        assert_abs_diff_eq!(d.log_density(0.0).unwrap(), -0.5 * LN_2PI, epsilon = 1e-12);
    }

    #[test]
    fn uniform_log_density_is_zero() {
        let d = DistSpec::Uniform { lo: 0.0, hi: 1.0 };
        assert_abs_diff_eq!(d.log_density(0.3).unwrap(), 0.0);
        assert_eq!(d.log_density(1.5).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn weibull_log_density_matches_closed_form() {
        // f(1) for shape 2, scale 1 is 2 exp(-1)
        let d = DistSpec::Weibull { shape: 2.0, scale: 1.0 };
        assert_abs_diff_eq!(d.log_density(1.0).unwrap(), 2.0f64.ln() - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(matches!(
            DistSpec::Normal { mean: 0.0, sd: -1.0 }.log_density(0.0),
            Err(Error::Param(_))
        ));
        assert!(matches!(
            DistSpec::Hypergeometric { population: 5, features: 7, draws: 2 }.validate(),
            Err(Error::Param(_))
        ));
        assert!(ext_hypergeom_pmf(10, 5, 3, 0.0, 1).is_err());
        assert!(ext_hypergeom_pmf(10, 12, 3, 1.0, 1).is_err());
    }

    #[test]
    fn ext_hypergeom_reduces_to_hypergeom_at_unit_odds() {
        let p = ext_hypergeom_pmf(10, 5, 3, 1.0, 1).unwrap();
        // C(3,1) C(7,4) / C(10,5) = 3*35/252
        assert_abs_diff_eq!(p, 3.0 * 35.0 / 252.0, epsilon = 1e-12);
        for y in -1..=4 {
            let a = ext_hypergeom_log_pmf(10, 5, 3, 1.0, y);
            let b = hypergeom_log_pmf(10, 5, 3, y);
            if a.is_finite() || b.is_finite() {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn ext_hypergeom_all_features() {
        // N = K: every item has the feature, so y = n with certainty
        let p = ext_hypergeom_pmf(7, 7, 4, 3.0, 4).unwrap();
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ext_hypergeom_pmf(7, 7, 4, 3.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn ext_hypergeom_matches_direct_summation() {
        // N=6, K=3, n=2, odds=2, y=2: normalize C(2,j) C(4,3-j) 2^j over j=0..2
        let t = |j: u64, odds: f64| {
            (ln_binomial(2, j) + ln_binomial(4, 3 - j)).exp() * odds.powi(j as i32)
        };
        let want = t(2, 2.0) / (t(0, 2.0) + t(1, 2.0) + t(2, 2.0));
        assert_abs_diff_eq!(ext_hypergeom_pmf(6, 3, 2, 2.0, 2).unwrap(), want, epsilon = 1e-12);
    }

    #[test]
    fn ext_hypergeom_sums_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let population = rng.random_range(1..40u64);
            let features = rng.random_range(0..=population);
            let draws = rng.random_range(0..=population);
            let odds = (rng.random::<f64>() * 4.0 - 2.0f64).exp();
            let d = DistSpec::ExtendedHypergeometric { population, features, draws, odds };
            let (lo, hi) = d.integer_support().unwrap();
            let total: f64 = (lo..=hi).map(|y| d.log_density(y as f64).unwrap().exp()).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn discrete_pmfs_sum_to_one() {
        let cases = vec![
            DistSpec::Binomial { n: 17, p: 0.3 },
            DistSpec::Hypergeometric { population: 15, features: 6, draws: 9 },
            DistSpec::ExtendedHypergeometric { population: 12, features: 5, draws: 7, odds: 2.5 },
        ];
        for d in cases {
            let (lo, hi) = d.integer_support().unwrap();
            let total: f64 = (lo..=hi).map(|y| d.log_density(y as f64).unwrap().exp()).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
        }
        // Poisson: sum far into the tail
        let d = DistSpec::Poisson { mean: 3.2 };
        let total: f64 = (0..200).map(|y| d.log_density(y as f64).unwrap().exp()).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn continuous_log_densities_integrate_to_one() {
        let cases = vec![
            DistSpec::Normal { mean: 1.0, sd: 2.0 },
            DistSpec::Lognormal { location: 0.0, scale: 0.5 },
            DistSpec::Weibull { shape: 2.0, scale: 3.0 },
            DistSpec::Gamma { shape: 3.0, rate: 1.5 },
            DistSpec::Beta { a: 2.0, b: 3.0 },
            DistSpec::Exponential { rate: 2.0 },
            DistSpec::Uniform { lo: -1.0, hi: 2.0 },
        ];
        for d in cases {
            // trapezoid over a wide quantile range
            let (lo, hi) = (d.quantile(1e-9).unwrap(), d.quantile(1.0 - 1e-9).unwrap());
            let n = 200_000;
            let h = (hi - lo) / n as f64;
            let mut total = 0.0;
            for i in 0..=n {
                let x = lo + i as f64 * h;
                let f = d.log_density(x).unwrap().exp();
                let f = if f.is_finite() { f } else { 0.0 };
                total += if i == 0 || i == n { 0.5 * f } else { f };
            }
            total *= h;
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-3);
        }
    }

    #[test]
    fn cdf_quantile_round_trip() {
        let cases = vec![
            DistSpec::Normal { mean: -1.0, sd: 0.7 },
            DistSpec::Lognormal { location: 0.3, scale: 0.4 },
            DistSpec::Weibull { shape: 1.7, scale: 2.2 },
            DistSpec::Gamma { shape: 4.0, rate: 0.5 },
            DistSpec::Beta { a: 2.5, b: 1.5 },
            DistSpec::Exponential { rate: 3.0 },
            DistSpec::Uniform { lo: 0.0, hi: 5.0 },
        ];
        for d in cases {
            for p in [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99] {
                let x = d.quantile(p).unwrap();
                let q = d.quantile(d.cdf(x).unwrap()).unwrap();
                assert_relative_eq!(q, x, epsilon = 1e-8, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn normal_cdf_and_quantile_reference_values() {
        let d = DistSpec::Normal { mean: 0.0, sd: 1.0 };
        assert_abs_diff_eq!(d.cdf(0.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.quantile(0.95).unwrap(), 1.6449, epsilon = 1e-4);
        assert_abs_diff_eq!(d.cdf(1.959963984540054).unwrap(), 0.975, epsilon = 1e-9);
        let e = DistSpec::Exponential { rate: 1.0 };
        assert_abs_diff_eq!(e.cdf(2.0f64.ln()).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn quantile_domain_errors() {
        let d = DistSpec::Normal { mean: 0.0, sd: 1.0 };
        assert!(matches!(d.quantile(0.0), Err(Error::Domain(_))));
        assert!(matches!(d.quantile(1.2), Err(Error::Domain(_))));
        assert!(matches!(
            DistSpec::Poisson { mean: 2.0 }.quantile(0.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn degenerate_binomial_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = DistSpec::Binomial { n: 0, p: 0.5 };
        for _ in 0..10 {
            assert_eq!(d.sample(&mut rng).unwrap(), 0.0);
        }
    }

    #[test]
    fn beta_samples_stay_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = DistSpec::Beta { a: 1.0, b: 1.0 };
        for _ in 0..1000 {
            let x = d.sample(&mut rng).unwrap();
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn sample_moments_match_analytic() {
        // mean within 5 standard errors at 1e5 draws per family
        let n = 100_000usize;
        let cases: Vec<(DistSpec, f64, f64)> = vec![
            (DistSpec::Normal { mean: 2.0, sd: 3.0 }, 2.0, 9.0),
            (DistSpec::Exponential { rate: 2.0 }, 0.5, 0.25),
            (DistSpec::Gamma { shape: 3.0, rate: 2.0 }, 1.5, 0.75),
            (DistSpec::Beta { a: 2.0, b: 2.0 }, 0.5, 0.05),
            (DistSpec::Weibull { shape: 1.0, scale: 2.0 }, 2.0, 4.0),
            (DistSpec::Uniform { lo: 0.0, hi: 1.0 }, 0.5, 1.0 / 12.0),
            (DistSpec::Binomial { n: 10, p: 0.3 }, 3.0, 2.1),
            (DistSpec::Poisson { mean: 4.0 }, 4.0, 4.0),
            (DistSpec::Lognormal { location: 0.0, scale: 0.5 }, (0.125f64).exp(), {
                let e = (0.25f64).exp();
                (e - 1.0) * e
            }),
            (
                DistSpec::Hypergeometric { population: 20, features: 8, draws: 5 },
                2.0,
                5.0 * 0.4 * 0.6 * 15.0 / 19.0,
            ),
        ];
        for (i, (d, mean, var)) in cases.into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
            let s: f64 = (0..n).map(|_| d.sample(&mut rng).unwrap()).sum();
            let se = (var / n as f64).sqrt();
            assert_abs_diff_eq!(s / n as f64, mean, epsilon = 5.0 * se);
        }
    }

    #[test]
    fn ext_hypergeom_sample_matches_pmf_mean() {
        let d = DistSpec::ExtendedHypergeometric { population: 20, features: 8, draws: 6, odds: 2.0 };
        let (lo, hi) = d.integer_support().unwrap();
        let (mut mean, mut m2) = (0.0, 0.0);
        for y in lo..=hi {
            let p = d.log_density(y as f64).unwrap().exp();
            mean += y as f64 * p;
            m2 += (y as f64) * (y as f64) * p;
        }
        let var = m2 - mean * mean;
        let n = 100_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let s: f64 = (0..n).map(|_| d.sample(&mut rng).unwrap()).sum();
        assert_abs_diff_eq!(s / n as f64, mean, epsilon = 5.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn gamma_mean_sd_constructor() {
        let d = gamma_from_mean_sd(10.0, 2.0).unwrap();
        match d {
            DistSpec::Gamma { shape, rate } => {
                assert_abs_diff_eq!(shape / rate, 10.0, epsilon = 1e-12);
                assert_abs_diff_eq!(shape / (rate * rate), 4.0, epsilon = 1e-12);
            }
            _ => unreachable!(),
        }
        assert!(gamma_from_mean_sd(-1.0, 2.0).is_err());
    }
}
