//! Variable-at-a-time random-walk Metropolis engine over named parameter
//! vectors.
//!
//! Bounded and positive parameters are proposed on a transformed scale (log
//! for positive, logit for interval supports) with the change-of-variables
//! term added to the acceptance ratio, so proposals stay symmetric and
//! supports are exact. Integer parameters move by a symmetric +/- step
//! random walk. Parameters are updated in declaration order each sweep, and
//! step sizes adapt only during burn-in.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution as _;

use crate::{Error, Result};

/// Support declaration for one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Unbounded,
    Positive,
    UnitInterval,
    Bounded { lo: f64, hi: f64 },
    /// Integer-valued parameter on an inclusive range; proposals are
    /// symmetric +/- integer steps rejected outside the range.
    Integer { lo: i64, hi: i64 },
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Support::Unbounded => x.is_finite(),
            Support::Positive => x > 0.0 && x.is_finite(),
            Support::UnitInterval => 0.0 < x && x < 1.0,
            Support::Bounded { lo, hi } => lo < x && x < hi,
            Support::Integer { lo, hi } => {
                x.fract() == 0.0 && x >= lo as f64 && x <= hi as f64
            }
        }
    }
}

/// One named parameter with its current value and support.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: f64,
    pub support: Support,
}

/// Ordered, named, typed parameter state for a model's log-posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    entries: Vec<Param>,
}

impl ParamVector {
    pub fn new(entries: Vec<Param>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for p in &entries {
            if !seen.insert(p.name.clone()) {
                return Err(Error::Param(format!("duplicate parameter name '{}'", p.name)));
            }
            if !p.support.contains(p.value) {
                return Err(Error::Param(format!(
                    "parameter '{}' value {} is outside its declared support",
                    p.name, p.value
                )));
            }
        }
        Ok(ParamVector { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Param] {
        &self.entries
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|p| p.name.as_str()).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|p| p.value).collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn value(&self, i: usize) -> f64 {
        self.entries[i].value
    }

    pub fn set_value(&mut self, i: usize, x: f64) {
        self.entries[i].value = x;
    }

    /// Replaces all values at once; lengths must match.
    pub fn with_values(&self, values: &[f64]) -> Result<Self> {
        if values.len() != self.entries.len() {
            return Err(Error::Schema(format!(
                "expected {} values, got {}",
                self.entries.len(),
                values.len()
            )));
        }
        let mut out = self.clone();
        for (p, &v) in out.entries.iter_mut().zip(values) {
            p.value = v;
        }
        Ok(out)
    }
}

/// Convenience constructor for a parameter entry.
pub fn param(name: &str, value: f64, support: Support) -> Param {
    Param { name: name.to_string(), value, support }
}

/// Metropolis run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct MetropolisConfig {
    pub burn_in: usize,
    pub samples: usize,
    pub thin: usize,
    pub step_sizes: Vec<f64>,
    pub seed: u64,
    /// Iterations between step rescalings during burn-in.
    pub adapt_interval: usize,
    pub target_acceptance: f64,
}

impl MetropolisConfig {
    pub fn new(burn_in: usize, samples: usize, seed: u64, step_sizes: Vec<f64>) -> Self {
        MetropolisConfig {
            burn_in,
            samples,
            thin: 1,
            step_sizes,
            seed,
            adapt_interval: 100,
            target_acceptance: 0.4,
        }
    }

    /// Uniform starting step size for `n` parameters.
    pub fn uniform_steps(burn_in: usize, samples: usize, seed: u64, n: usize, step: f64) -> Self {
        Self::new(burn_in, samples, seed, vec![step; n])
    }

    fn validate(&self, n_params: usize) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::Param("samples must be >= 1".into()));
        }
        if self.thin < 1 {
            return Err(Error::Param("thin must be >= 1".into()));
        }
        if self.step_sizes.len() != n_params {
            return Err(Error::Schema(format!(
                "{} step sizes for {} parameters",
                self.step_sizes.len(),
                n_params
            )));
        }
        if self.step_sizes.iter().any(|&s| !(s >= 0.0)) {
            return Err(Error::Param("step sizes must be nonnegative".into()));
        }
        if !(0.0 < self.target_acceptance && self.target_acceptance < 1.0) {
            return Err(Error::Param("target acceptance must lie in (0,1)".into()));
        }
        Ok(())
    }
}

/// Stored posterior draws with acceptance bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub names: Vec<String>,
    pub draws: Vec<Vec<f64>>,
    pub acceptance: Vec<f64>,
    pub config: MetropolisConfig,
    template: ParamVector,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// The parameter vector for draw `i`.
    pub fn state(&self, i: usize) -> ParamVector {
        self.template.with_values(&self.draws[i]).expect("draw width matches template")
    }

    /// Monte Carlo mean and empirical quantiles of `g` over the draws.
    pub fn summarize(
        &self,
        g: impl Fn(&ParamVector) -> f64,
        probs: &[f64],
    ) -> Result<(f64, Vec<f64>)> {
        if self.is_empty() {
            return Err(Error::Empty("chain has no draws".into()));
        }
        for &p in probs {
            if !(0.0 < p && p < 1.0) {
                return Err(Error::Domain(format!("quantile prob {p} outside (0,1)")));
            }
        }
        let mut vals: Vec<f64> = Vec::with_capacity(self.len());
        let mut state = self.template.clone();
        for d in &self.draws {
            for (i, &v) in d.iter().enumerate() {
                state.set_value(i, v);
            }
            vals.push(g(&state));
        }
        if let Some(bad) = vals.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "summary function returned a non-finite value ({bad})"
            )));
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let mut sorted = vals;
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values checked"));
        let qs = probs.iter().map(|&p| empirical_quantile(&sorted, p)).collect();
        Ok((mean, qs))
    }

    /// Columnar text export: one header row of parameter names, one row per
    /// retained draw. Values print in shortest round-trip form.
    pub fn export_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.names.join(","));
        out.push('\n');
        for d in &self.draws {
            let row: Vec<String> = d.iter().map(|v| format!("{v}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses a table produced by [`Chain::export_table`]. Supports are
    /// taken as unbounded; acceptance bookkeeping is not round-tripped.
    pub fn import_table(text: &str) -> Result<Chain> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Data("empty chain table".into()))?;
        let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut draws = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| {
                        Error::Data(format!("line {}: non-numeric field '{}'", lineno + 2, s))
                    })
                })
                .collect::<Result<_>>()?;
            if row.len() != names.len() {
                return Err(Error::Data(format!(
                    "line {}: {} fields, expected {}",
                    lineno + 2,
                    row.len(),
                    names.len()
                )));
            }
            draws.push(row);
        }
        let template = ParamVector::new(
            names
                .iter()
                .map(|n| Param { name: n.clone(), value: 0.0, support: Support::Unbounded })
                .collect(),
        )?;
        let n = names.len();
        Ok(Chain {
            names,
            draws,
            acceptance: vec![f64::NAN; n],
            config: MetropolisConfig::uniform_steps(0, 1, 0, n, 1.0),
            template,
        })
    }
}

/// Empirical quantile of an already-sorted slice (linear interpolation).
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let i = h.floor() as usize;
    let frac = h - i as f64;
    if i + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    }
}

// Transform to the proposal scale and back, with the log-Jacobian of the
// inverse transform (added to the acceptance ratio as log|J(x')| - log|J(x)|).
fn to_proposal_scale(x: f64, support: Support) -> f64 {
    match support {
        Support::Unbounded | Support::Integer { .. } => x,
        Support::Positive => x.ln(),
        Support::UnitInterval => (x / (1.0 - x)).ln(),
        Support::Bounded { lo, hi } => {
            let u = (x - lo) / (hi - lo);
            (u / (1.0 - u)).ln()
        }
    }
}

fn from_proposal_scale(z: f64, support: Support) -> f64 {
    match support {
        Support::Unbounded | Support::Integer { .. } => z,
        Support::Positive => z.exp(),
        Support::UnitInterval => 1.0 / (1.0 + (-z).exp()),
        Support::Bounded { lo, hi } => lo + (hi - lo) / (1.0 + (-z).exp()),
    }
}

fn log_jacobian(x: f64, support: Support) -> f64 {
    match support {
        Support::Unbounded | Support::Integer { .. } => 0.0,
        Support::Positive => x.ln(),
        Support::UnitInterval => x.ln() + (1.0 - x).ln(),
        Support::Bounded { lo, hi } => ((x - lo) / (hi - lo)).ln() + ((hi - x) / (hi - lo)).ln(),
    }
}

/// One variable-at-a-time Metropolis sweep. Each parameter is updated in
/// declaration order; returns the new state, per-parameter accept flags, and
/// the log-posterior at the new state.
pub fn metropolis_sweep(
    state: &ParamVector,
    log_post: &dyn Fn(&ParamVector) -> f64,
    steps: &[f64],
    rng: &mut impl Rng,
) -> Result<(ParamVector, Vec<bool>, f64)> {
    let mut current = state.clone();
    let mut current_lp = log_post(&current);
    if !current_lp.is_finite() {
        return Err(Error::Init(format!(
            "log-posterior is not finite ({current_lp}) at the sweep's starting state"
        )));
    }
    let mut accepted = vec![false; current.len()];
    for i in 0..current.len() {
        let step = steps[i];
        if step == 0.0 {
            continue;
        }
        let support = current.entries()[i].support;
        let x = current.value(i);
        let (proposal, jac) = match support {
            Support::Integer { lo, hi } => {
                let span = step.ceil().max(1.0) as i64;
                // symmetric draw from {-span..-1, 1..span}
                let mag = rng.random_range(1..=span);
                let delta = if rng.random::<bool>() { mag } else { -mag };
                let y = x as i64 + delta;
                if y < lo || y > hi {
                    continue; // proposal outside feasibility bounds: reject
                }
                (y as f64, 0.0)
            }
            _ => {
                let z = to_proposal_scale(x, support);
                let eps: f64 = rand_distr::StandardNormal.sample(rng);
                let y = from_proposal_scale(z + step * eps, support);
                if !support.contains(y) {
                    continue; // transform saturated at the boundary
                }
                (y, log_jacobian(y, support) - log_jacobian(x, support))
            }
        };
        current.set_value(i, proposal);
        let prop_lp = log_post(&current);
        if prop_lp.is_nan() {
            return Err(Error::NanLogPosterior { param: current.entries()[i].name.clone() });
        }
        let log_ratio = prop_lp - current_lp + jac;
        let accept = log_ratio >= 0.0 || rng.random::<f64>() < log_ratio.exp();
        if accept {
            current_lp = prop_lp;
            accepted[i] = true;
        } else {
            current.set_value(i, x);
        }
    }
    Ok((current, accepted, current_lp))
}

/// Multiplicative step-size update toward a target acceptance rate. The
/// factor is clamped to [0.5, 2] per update: a zero rate halves the step, a
/// unit rate doubles it, and a rate equal to the target leaves it unchanged.
pub fn adapt_steps(steps: &[f64], rates: &[f64], target: f64) -> Vec<f64> {
    steps
        .iter()
        .zip(rates)
        .map(|(&s, &r)| {
            let factor =
                (std::f64::consts::LN_2 * (r - target) / target).exp().clamp(0.5, 2.0);
            s * factor
        })
        .collect()
}

/// Runs a full chain: adaptive burn-in (discarded), then `samples` retained
/// draws with thinning. Deterministic given the seed.
pub fn run_chain(
    log_post: impl Fn(&ParamVector) -> f64,
    init: &ParamVector,
    cfg: &MetropolisConfig,
) -> Result<Chain> {
    cfg.validate(init.len())?;
    let lp0 = log_post(init);
    if !lp0.is_finite() {
        let offenders: Vec<&str> = init
            .entries()
            .iter()
            .filter(|p| !p.support.contains(p.value))
            .map(|p| p.name.as_str())
            .collect();
        let detail = if offenders.is_empty() {
            "check data/prior settings".to_string()
        } else {
            format!("parameters outside support: {}", offenders.join(", "))
        };
        return Err(Error::Init(format!(
            "initial log-posterior is {lp0}; {detail}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = init.len();
    let mut state = init.clone();
    let mut steps = cfg.step_sizes.clone();
    let lp = |s: &ParamVector| log_post(s);

    // burn-in with periodic adaptation
    let mut accept_count = vec![0usize; n];
    let mut window = 0usize;
    for _ in 0..cfg.burn_in {
        let (next, accepted, _) = metropolis_sweep(&state, &lp, &steps, &mut rng)?;
        state = next;
        for (c, &a) in accept_count.iter_mut().zip(&accepted) {
            *c += a as usize;
        }
        window += 1;
        if cfg.adapt_interval > 0 && window == cfg.adapt_interval {
            let rates: Vec<f64> =
                accept_count.iter().map(|&c| c as f64 / window as f64).collect();
            steps = adapt_steps(&steps, &rates, cfg.target_acceptance);
            accept_count.iter_mut().for_each(|c| *c = 0);
            window = 0;
        }
    }

    // retained phase: steps frozen
    let mut draws = Vec::with_capacity(cfg.samples);
    let mut accepts = vec![0usize; n];
    let mut proposals = 0usize;
    for _ in 0..cfg.samples {
        for _ in 0..cfg.thin {
            let (next, accepted, _) = metropolis_sweep(&state, &lp, &steps, &mut rng)?;
            state = next;
            for (c, &a) in accepts.iter_mut().zip(&accepted) {
                *c += a as usize;
            }
            proposals += 1;
        }
        debug_assert!(state
            .entries()
            .iter()
            .all(|p| p.support.contains(p.value)));
        draws.push(state.values());
    }
    let acceptance: Vec<f64> =
        accepts.iter().map(|&c| c as f64 / proposals.max(1) as f64).collect();
    Ok(Chain {
        names: init.names().iter().map(|s| s.to_string()).collect(),
        draws,
        acceptance,
        config: MetropolisConfig { step_sizes: steps, ..cfg.clone() },
        template: init.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn std_normal_target(pv: &ParamVector) -> f64 {
        let x = pv.value(0);
        -0.5 * x * x
    }

    #[test]
    fn zero_step_freezes_coordinate() {
        let init = ParamVector::new(vec![
            param("x", 0.3, Support::Unbounded),
            param("y", 1.0, Support::Positive),
        ])
        .unwrap();
        let lp = |pv: &ParamVector| -0.5 * (pv.value(0).powi(2) + pv.value(1).powi(2));
        let mut cfg = MetropolisConfig::new(0, 50, 9, vec![1.0, 0.0]);
        cfg.adapt_interval = 0;
        let chain = run_chain(lp, &init, &cfg).unwrap();
        for d in &chain.draws {
            assert_eq!(d[1], 1.0);
        }
        assert_eq!(chain.acceptance[1], 0.0);
    }

    #[test]
    fn uphill_moves_always_accepted() {
        // quadratic with max far away: early proposals uphill are accepted
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let init = ParamVector::new(vec![param("x", 0.0, Support::Unbounded)]).unwrap();
        let lp = |pv: &ParamVector| pv.value(0); // monotone: up is always better
        let mut ups = 0;
        let mut accepted_ups = 0;
        let mut state = init;
        for _ in 0..200 {
            let before = state.value(0);
            let (next, acc, _) = metropolis_sweep(&state, &lp, &[1.0], &mut rng).unwrap();
            if next.value(0) > before || (!acc[0]) {
                // if the proposal went up it must have been accepted
            }
            if acc[0] {
                assert!(next.value(0) != before);
            }
            if next.value(0) > before {
                ups += 1;
                accepted_ups += 1;
            }
            state = next;
        }
        assert!(ups > 0);
        assert_eq!(ups, accepted_ups);
    }

    #[test]
    fn normal_target_moments() {
        let init = ParamVector::new(vec![param("x", 0.0, Support::Unbounded)]).unwrap();
        let cfg = MetropolisConfig::new(2000, 100_000, 11, vec![1.0]);
        let chain = run_chain(std_normal_target, &init, &cfg).unwrap();
        let (mean, qs) = chain.summarize(|pv| pv.value(0), &[0.05, 0.95]).unwrap();
        assert_abs_diff_eq!(mean, 0.0, epsilon = 0.05);
        let var = chain
            .draws
            .iter()
            .map(|d| (d[0] - mean).powi(2))
            .sum::<f64>()
            / chain.len() as f64;
        assert_abs_diff_eq!(var.sqrt(), 1.0, epsilon = 0.05);
        assert_abs_diff_eq!(qs[0], -1.645, epsilon = 0.05);
        assert_abs_diff_eq!(qs[1], 1.645, epsilon = 0.05);
    }

    #[test]
    fn acceptance_rates_near_target_after_adaptation() {
        let init = ParamVector::new(vec![
            param("x", 0.1, Support::Unbounded),
            param("y", -0.2, Support::Unbounded),
        ])
        .unwrap();
        let lp = |pv: &ParamVector| -0.5 * (pv.value(0).powi(2) + pv.value(1).powi(2));
        let cfg = MetropolisConfig::new(5000, 20_000, 5, vec![0.01, 50.0]);
        let chain = run_chain(lp, &init, &cfg).unwrap();
        for &r in &chain.acceptance {
            assert!(r > 0.2 && r < 0.6, "acceptance {r} outside (0.2, 0.6)");
        }
    }

    #[test]
    fn single_draw_chain() {
        let init = ParamVector::new(vec![param("x", 0.0, Support::Unbounded)]).unwrap();
        let cfg = MetropolisConfig::new(0, 1, 1, vec![1.0]);
        let chain = run_chain(std_normal_target, &init, &cfg).unwrap();
        assert_eq!(chain.len(), 1);
    }

    #[test]
    fn seeded_rerun_is_bitwise_identical() {
        let init = ParamVector::new(vec![
            param("x", 0.0, Support::Unbounded),
            param("s", 1.0, Support::Positive),
        ])
        .unwrap();
        let lp = |pv: &ParamVector| {
            let (x, s) = (pv.value(0), pv.value(1));
            -0.5 * x * x - s - 0.1 * (s.ln()).powi(2)
        };
        let cfg = MetropolisConfig::new(500, 2000, 77, vec![0.5, 0.5]);
        let a = run_chain(lp, &init, &cfg).unwrap();
        let b = run_chain(lp, &init, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_initialization_reports_parameters() {
        let init = ParamVector::new(vec![param("sigma", 1.0, Support::Positive)]).unwrap();
        let lp = |_: &ParamVector| f64::NEG_INFINITY;
        let cfg = MetropolisConfig::new(10, 10, 1, vec![0.5]);
        match run_chain(lp, &init, &cfg) {
            Err(Error::Init(_)) => {}
            other => unreachable!("expected Init error, got {other:?}"),
        }
    }

    #[test]
    fn nan_log_posterior_names_parameter() {
        let init = ParamVector::new(vec![
            param("a", 0.0, Support::Unbounded),
            param("b", 0.5, Support::UnitInterval),
        ])
        .unwrap();
        // finite at the initial state, NaN as soon as b moves
        let lp = |pv: &ParamVector| {
            if pv.value(1) == 0.5 {
                0.0
            } else {
                f64::NAN
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut err = None;
        for _ in 0..100 {
            match metropolis_sweep(
                &ParamVector::new(vec![
                    param("a", 0.0, Support::Unbounded),
                    param("b", 0.5, Support::UnitInterval),
                ])
                .unwrap(),
                &lp,
                &[0.0, 1.0],
                &mut rng,
            ) {
                Err(e) => {
                    err = Some(e);
                    break;
                }
                Ok(_) => {}
            }
        }
        let _ = init;
        match err {
            Some(Error::NanLogPosterior { param }) => assert_eq!(param, "b"),
            other => unreachable!("expected NanLogPosterior, got {other:?}"),
        }
    }

    #[test]
    fn adapt_steps_fixed_point_and_clamps() {
        let steps = vec![0.7, 0.7, 0.7];
        let out = adapt_steps(&steps, &[0.4, 0.0, 1.0], 0.4);
        assert_abs_diff_eq!(out[0], 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(out[1], 0.35, epsilon = 1e-12);
        assert_abs_diff_eq!(out[2], 1.4, epsilon = 1e-12);
    }

    #[test]
    fn summarize_constant_and_median() {
        let init = ParamVector::new(vec![param("x", 0.0, Support::Unbounded)]).unwrap();
        let cfg = MetropolisConfig::new(0, 5, 1, vec![1.0]);
        let mut chain = run_chain(std_normal_target, &init, &cfg).unwrap();
        chain.draws = vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0], vec![5.0]];
        let (mean, qs) = chain.summarize(|_| 7.0, &[0.1, 0.9]).unwrap();
        assert_eq!(mean, 7.0);
        assert!(qs.iter().all(|&q| q == 7.0));
        let (mean, qs) = chain.summarize(|pv| pv.value(0), &[0.5]).unwrap();
        assert_abs_diff_eq!(mean, 3.0);
        assert_abs_diff_eq!(qs[0], 3.0);
    }

    #[test]
    fn two_state_detailed_balance() {
        // bounded parameter collapsed to a two-state caricature: the sign of
        // x encodes the state, target puts 0.7 / 0.3 on the halves
        let init = ParamVector::new(vec![param("x", 0.2, Support::Bounded { lo: -1.0, hi: 1.0 })])
            .unwrap();
        let lp = |pv: &ParamVector| {
            if pv.value(0) >= 0.0 {
                (0.7f64).ln()
            } else {
                (0.3f64).ln()
            }
        };
        let cfg = MetropolisConfig::new(1000, 100_000, 21, vec![2.0]);
        let chain = run_chain(lp, &init, &cfg).unwrap();
        let freq = chain.draws.iter().filter(|d| d[0] >= 0.0).count() as f64
            / chain.len() as f64;
        // wide tolerance: draws are autocorrelated
        assert_abs_diff_eq!(freq, 0.7, epsilon = 0.03);
    }

    #[test]
    fn support_preserved_on_all_draws() {
        let init = ParamVector::new(vec![
            param("p", 0.5, Support::UnitInterval),
            param("s", 1.0, Support::Positive),
            param("k", 3.0, Support::Integer { lo: 0, hi: 10 }),
        ])
        .unwrap();
        let lp = |pv: &ParamVector| {
            let (p, s, k) = (pv.value(0), pv.value(1), pv.value(2));
            2.0 * p.ln() + (1.0 - p).ln() - s + k * 0.1
        };
        let cfg = MetropolisConfig::new(500, 5000, 13, vec![1.0, 1.0, 2.0]);
        let chain = run_chain(lp, &init, &cfg).unwrap();
        for i in 0..chain.len() {
            let s = chain.state(i);
            for p in s.entries() {
                assert!(p.support.contains(p.value), "{} = {}", p.name, p.value);
            }
        }
    }

    #[test]
    fn export_import_round_trip() {
        let init = ParamVector::new(vec![
            param("alpha", 0.0, Support::Unbounded),
            param("beta", 1.0, Support::Positive),
        ])
        .unwrap();
        let lp = |pv: &ParamVector| -0.5 * pv.value(0).powi(2) - pv.value(1);
        let cfg = MetropolisConfig::new(100, 200, 31, vec![1.0, 1.0]);
        let chain = run_chain(lp, &init, &cfg).unwrap();
        let text = chain.export_table();
        let back = Chain::import_table(&text).unwrap();
        assert_eq!(back.names, chain.names);
        assert_eq!(back.draws, chain.draws);
    }

    #[test]
    fn import_rejects_malformed_rows() {
        assert!(matches!(Chain::import_table(""), Err(Error::Data(_))));
        let bad = "a,b\n1.0,2.0\n3.0\n";
        assert!(matches!(Chain::import_table(bad), Err(Error::Data(_))));
        let non_numeric = "a,b\n1.0,x\n";
        assert!(matches!(Chain::import_table(non_numeric), Err(Error::Data(_))));
    }
}
