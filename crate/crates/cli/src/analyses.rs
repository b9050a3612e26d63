//! One entry point per analysis kind: parse inputs, run the model, and
//! write the chain export, parameter summary, and band table.

use std::path::{Path, PathBuf};

use sysrel::alloc::{
    ga_optimize, preposterior_criterion, resource_prior_chain, Allocation, AllocationBounds,
    CriterionConfig, DiffusePrior, ExistingData, GaConfig,
};
use sysrel::bn::bn_system_reliability;
use sysrel::component::{
    surrogate_log_likelihood, surrogate_reliability, DegFailModel, DegFailPriors, LotModel,
    LotPriors, SurrogateQAParams, SurrogateSpec,
};
use sysrel::dists::DistSpec;
use sysrel::flowgraph::{flowgraph_solve, mgf_invert, mgf_moments};
use sysrel::mcmc::{param, run_chain, Chain, MetropolisConfig, ParamVector, Support};
use sysrel::system::{
    component_reliability, nhpp_reliability, partial_test_log_likelihood, ComponentReliabilityModel,
    MultilevelPriors, MultilevelSeriesModel, NhppHyperPriors, NhppModel, NhppParams,
    WeibullSeriesModel,
};

use crate::config::Config;
use crate::dataset;
use crate::netfmt;
use crate::tables::{linspace, summary_table, write_atomic, BandTable};
use crate::{CliError, CliResult};

/// Derives the RNG seed for a named stage from the single config seed
/// (FNV-1a of the stage name, XORed into the seed). Every stage of every
/// analysis draws its seed this way, so one config seed fixes the run.
pub fn stage_seed(seed: u64, stage: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in stage.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    seed ^ h
}

/// Flag overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replications: Option<usize>,
    pub verbose: bool,
}

pub struct Job {
    pub cfg: Config,
    pub out_dir: PathBuf,
    pub ov: Overrides,
}

impl Job {
    fn seed(&self) -> CliResult<u64> {
        Ok(match self.ov.seed {
            Some(s) => s,
            None => self.cfg.u64_or("seed", 0)?,
        })
    }

    fn mcmc_config(&self, n_params: usize, stage: &str) -> CliResult<MetropolisConfig> {
        Ok(MetropolisConfig::uniform_steps(
            self.cfg.usize_or("mcmc.burn_in", 2000)?,
            self.cfg.usize_or("mcmc.samples", 4000)?,
            stage_seed(self.seed()?, stage),
            n_params,
            self.cfg.f64_or("mcmc.step", 0.3)?,
        ))
    }

    fn band_grid(&self) -> CliResult<Vec<f64>> {
        if let Some(grid) = self.cfg.f64_list("band.grid")? {
            return Ok(grid);
        }
        linspace(
            self.cfg.f64_or("band.start", 0.0)?,
            self.cfg.f64_or("band.stop", 30.0)?,
            self.cfg.usize_or("band.points", 61)?,
        )
    }

    fn level(&self) -> CliResult<f64> {
        let level = self.cfg.f64_or("band.level", 0.90)?;
        if !(0.0 < level && level < 1.0) {
            return Err(CliError::Validation(format!("band.level {level} not in (0,1)")));
        }
        Ok(level)
    }

    fn write(&self, name: &str, content: &str) -> CliResult<()> {
        let path = self.out_dir.join(name);
        write_atomic(&path, content)?;
        if self.ov.verbose {
            eprintln!("wrote {}", path.display());
        }
        Ok(())
    }

    fn write_standard(
        &self,
        chain: &Chain,
        band: impl Fn(&ParamVector, f64) -> f64,
        abscissa: &str,
    ) -> CliResult<()> {
        let level = self.level()?;
        self.write("chain.csv", &chain.export_table())?;
        self.write("summary.csv", &summary_table(chain, level)?)?;
        let table = BandTable::from_chain(chain, band, &self.band_grid()?, level, abscissa)?;
        self.write("bands.csv", &table.emit())
    }

    fn run_mcmc(
        &self,
        stage: &str,
        init: &ParamVector,
        log_post: impl Fn(&ParamVector) -> f64,
    ) -> CliResult<Chain> {
        let cfg = self.mcmc_config(init.len(), stage)?;
        run_chain(log_post, init, &cfg)
            .map_err(|e| CliError::Runtime(format!("{stage} sampling: {e}")))
    }
}

pub fn run_degfail(job: &Job) -> CliResult<()> {
    let data = dataset::parse_degfail(&job.cfg.data_path("data.file")?)?;
    let model = DegFailModel { data, priors: DegFailPriors::default() };
    let init = model
        .initial_state()
        .map_err(|e| CliError::Validation(format!("degfail data: {e}")))?;
    let chain = job.run_mcmc("degfail", &init, |pv| model.log_posterior(pv))?;
    // R(t) -> 1 as t -> 0+; use the limit so a grid may start at 0
    job.write_standard(
        &chain,
        |pv, t| if t <= 0.0 { 1.0 } else { model.reliability(pv, t) },
        "t",
    )
}

pub fn run_surrogate(job: &Job) -> CliResult<()> {
    let n_specs = job.cfg.usize_or("specs", 1)?;
    if n_specs == 0 {
        return Err(CliError::Validation("specs must be at least 1".into()));
    }
    let data = dataset::parse_surrogate(&job.cfg.data_path("data.file")?, n_specs)?;
    let mut entries = Vec::new();
    for i in 1..=n_specs {
        let meas: Vec<f64> =
            data.specs.iter().filter(|(_, k, _)| *k == i - 1).map(|&(_, _, v)| v).collect();
        let center = if meas.is_empty() { 0.0 } else { meas.iter().sum::<f64>() / meas.len() as f64 };
        entries.push(param(&format!("alpha_{i}"), center, Support::Unbounded));
        entries.push(param(&format!("delta_{i}"), 0.0, Support::Unbounded));
        entries.push(param(&format!("gamma_{i}"), 1.0, Support::Positive));
        entries.push(param(&format!("theta_{i}"), center - 1.0, Support::Unbounded));
        entries.push(param(&format!("sigma_{i}"), 1.0, Support::Positive));
    }
    let init = ParamVector::new(entries)
        .map_err(|e| CliError::Validation(format!("surrogate parameters: {e}")))?;
    let location_prior = DistSpec::Normal { mean: 0.0, sd: job.cfg.f64_or("prior.location_sd", 10.0)? };
    let scale_prior = DistSpec::Gamma { shape: 2.0, rate: job.cfg.f64_or("prior.scale_rate", 1.0)? };
    let params_from = move |pv: &ParamVector| SurrogateQAParams {
        specs: (0..n_specs)
            .map(|i| SurrogateSpec {
                alpha: pv.value(5 * i),
                delta: pv.value(5 * i + 1),
                gamma: pv.value(5 * i + 2),
                theta: pv.value(5 * i + 3),
                sigma: pv.value(5 * i + 4),
            })
            .collect(),
    };
    let log_post = |pv: &ParamVector| {
        let p = params_from(pv);
        let mut lp = 0.0;
        for s in &p.specs {
            for v in [s.alpha, s.delta, s.theta] {
                lp += location_prior.log_density(v).unwrap_or(f64::NEG_INFINITY);
            }
            for v in [s.gamma, s.sigma] {
                lp += scale_prior.log_density(v).unwrap_or(f64::NEG_INFINITY);
            }
        }
        lp + surrogate_log_likelihood(&p, &data).unwrap_or(f64::NEG_INFINITY)
    };
    let chain = job.run_mcmc("surrogate", &init, log_post)?;
    job.write_standard(
        &chain,
        |pv, t| surrogate_reliability(&params_from(pv), t).unwrap_or(f64::NAN),
        "t",
    )
}

pub fn run_lots(job: &Job) -> CliResult<()> {
    let data = dataset::parse_lots(&job.cfg.data_path("data.file")?)?;
    let n_lots = data.lots.len();
    let model = LotModel { data, priors: LotPriors::default() };
    let init = model
        .initial_state()
        .map_err(|e| CliError::Validation(format!("lot data: {e}")))?;
    let chain = job.run_mcmc("lots", &init, |pv| model.log_posterior(pv))?;
    let level = job.level()?;
    job.write("chain.csv", &chain.export_table())?;
    job.write("summary.csv", &summary_table(&chain, level)?)?;
    // band abscissa is the lot number; the band is the posterior feature
    // prevalence per lot
    let grid: Vec<f64> = (1..=n_lots).map(|i| i as f64).collect();
    let table = BandTable::from_chain(
        &chain,
        |pv, lot| {
            let p = model.params_from(pv);
            let i = lot as usize - 1;
            p.k[i] as f64 / model.data.lots[i].size as f64
        },
        &grid,
        level,
        "lot",
    )?;
    job.write("bands.csv", &table.emit())
}

pub fn run_multilevel(job: &Job) -> CliResult<()> {
    let logistic_data = dataset::parse_binomial_age(&job.cfg.data_path("data.logistic")?)?;
    let model = MultilevelSeriesModel {
        center_age: MultilevelSeriesModel::mean_logistic_age(&logistic_data),
        logistic_data,
        weibull_data: dataset::parse_lifetimes(&job.cfg.data_path("data.lifetimes")?)?,
        degradation: dataset::parse_degradation(&job.cfg.data_path("data.degradation")?)?,
        deg_lifetimes: dataset::parse_lifetimes(&job.cfg.data_path("data.deg_lifetimes")?)?,
        level: job.cfg.require_f64("degradation.level")?,
        system_data: dataset::parse_binomial_age(&job.cfg.data_path("data.system")?)?,
        priors: MultilevelPriors::default(),
    };
    let init = model
        .initial_state()
        .map_err(|e| CliError::Validation(format!("multilevel data: {e}")))?;
    let chain = job.run_mcmc("multilevel-series", &init, |pv| model.log_posterior(pv))?;
    job.write_standard(
        &chain,
        |pv, t| {
            let p = model.params_from(pv);
            model.system_reliability(&p, t).unwrap_or(f64::NAN)
        },
        "t",
    )
}

pub fn run_partial_tests(job: &Job) -> CliResult<()> {
    let components = dataset::parse_component_counts(&job.cfg.data_path("data.components")?)?;
    let k = components.len();
    let tests = dataset::parse_partial_tests(&job.cfg.data_path("data.tests")?, k)?;
    let entries: Vec<_> = (1..=k)
        .map(|i| param(&format!("p_{i}"), 0.8, Support::UnitInterval))
        .collect();
    let init = ParamVector::new(entries)
        .map_err(|e| CliError::Validation(format!("partial-test parameters: {e}")))?;
    let log_post = |pv: &ParamVector| {
        let p: Vec<f64> = (0..k).map(|i| pv.value(i)).collect();
        // uniform priors on each p_i; binomial component data plus the
        // partially informative system tests
        let mut lp = 0.0;
        for (i, &(n, y)) in components.iter().enumerate() {
            lp += y as f64 * p[i].ln() + (n - y) as f64 * (1.0 - p[i]).ln();
        }
        let probs = vec![p.clone(); tests.len()];
        lp + partial_test_log_likelihood(&tests, &probs).unwrap_or(f64::NEG_INFINITY)
    };
    let chain = job.run_mcmc("partial-tests", &init, log_post)?;
    let level = job.level()?;
    job.write("chain.csv", &chain.export_table())?;
    job.write("summary.csv", &summary_table(&chain, level)?)?;
    // component probabilities are age-free; the band abscissa indexes the
    // system (0) and each component (1..k)
    let grid: Vec<f64> = (0..=k).map(|i| i as f64).collect();
    let table = BandTable::from_chain(
        &chain,
        |pv, which| {
            if which < 0.5 {
                (0..k).map(|i| pv.value(i)).product()
            } else {
                pv.value(which as usize - 1)
            }
        },
        &grid,
        level,
        "component",
    )?;
    job.write("bands.csv", &table.emit())
}

pub fn run_nhpp(job: &Job) -> CliResult<()> {
    let counts = dataset::parse_nhpp_counts(&job.cfg.data_path("data.file")?)?;
    let n = counts.len();
    let mut data = sysrel::system::NhppFleetData::new(
        counts,
        job.cfg.require_f64("interval.length")?,
    )
    .map_err(|e| CliError::Validation(format!("nhpp data: {e}")))?;
    if let Some(mask) = job.cfg.u64_list("include")? {
        if mask.len() != n {
            return Err(CliError::Validation(format!(
                "include mask has {} entries for {n} computers",
                mask.len()
            )));
        }
        data.include = mask.iter().map(|&b| b != 0).collect();
    }
    let include = data.include.clone();
    let model = NhppModel { data, priors: NhppHyperPriors::default() };
    let init = model
        .initial_state()
        .map_err(|e| CliError::Validation(format!("nhpp data: {e}")))?;
    let chain = job.run_mcmc("nhpp", &init, |pv| model.log_posterior(pv))?;
    let mission = job.cfg.f64_or("mission.length", 1.0)?;
    job.write_standard(
        &chain,
        |pv, s| {
            // layout: six hyperparameters then (eta, phi, rho) per computer
            let p = NhppParams {
                eta: (0..n).map(|i| pv.value(6 + 3 * i)).collect(),
                phi: (0..n).map(|i| pv.value(7 + 3 * i)).collect(),
                rho: (0..n).map(|i| pv.value(8 + 3 * i)).collect(),
            };
            nhpp_reliability(&p, &include, mission, s).unwrap_or(f64::NAN)
        },
        "s",
    )
}

pub fn run_weibull_series(job: &Job) -> CliResult<()> {
    let (component_data, system_data) =
        dataset::parse_weibull_series(&job.cfg.data_path("data.file")?)?;
    let model = WeibullSeriesModel {
        component_data,
        system_data,
        ..WeibullSeriesModel::default()
    };
    let init = model
        .initial_state()
        .map_err(|e| CliError::Validation(format!("weibull-series data: {e}")))?;
    let chain = job.run_mcmc("weibull-series", &init, |pv| model.log_posterior(pv))?;
    job.write_standard(
        &chain,
        |pv, t| model.system_reliability(&model.params_from(pv), t),
        "t",
    )
}

fn component_curve(cfg: &Config, name: &str) -> CliResult<Box<dyn Fn(f64) -> f64>> {
    let key = |suffix: &str| format!("component.{name}.{suffix}");
    let kind = cfg.require(&key("kind"))?.to_string();
    match kind.as_str() {
        "constant" => {
            let p = cfg.require_f64(&key("p"))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::Validation(format!(
                    "component.{name}.p = {p} not in [0,1]"
                )));
            }
            Ok(Box::new(move |_| p))
        }
        "logistic" => {
            let m = ComponentReliabilityModel::LogisticAging {
                theta0: cfg.require_f64(&key("theta0"))?,
                theta1: cfg.require_f64(&key("theta1"))?,
            };
            Ok(Box::new(move |t| component_reliability(&m, t).unwrap_or(f64::NAN)))
        }
        "weibull" => {
            let m = ComponentReliabilityModel::WeibullLifetime {
                lambda0: cfg.require_f64(&key("lambda0"))?,
                lambda1: cfg.require_f64(&key("lambda1"))?,
            };
            Ok(Box::new(move |t| component_reliability(&m, t).unwrap_or(f64::NAN)))
        }
        "degradation" => {
            let m = ComponentReliabilityModel::DegradationLognormal {
                mu: cfg.require_f64(&key("mu"))?,
                sigma_b: cfg.require_f64(&key("sigma_b"))?,
                alpha: cfg.require_f64(&key("alpha"))?,
                level: cfg.require_f64(&key("level"))?,
            };
            Ok(Box::new(move |t| component_reliability(&m, t).unwrap_or(f64::NAN)))
        }
        other => Err(CliError::Validation(format!(
            "component.{name}.kind: unknown curve kind `{other}`"
        ))),
    }
}

pub fn run_bn_system(job: &Job) -> CliResult<()> {
    let net = netfmt::parse_bn(&job.cfg.data_path("data.network")?)?;
    let system = job.cfg.require("system.node")?.to_string();
    let sys_idx = net
        .node_index(&system)
        .map_err(|e| CliError::Validation(format!("system.node: {e}")))?;
    let parents = net.nodes[sys_idx].parents.clone();
    if parents.is_empty() {
        return Err(CliError::Validation(format!(
            "system node `{system}` has no parent components"
        )));
    }
    let curves: Vec<Box<dyn Fn(f64) -> f64>> = parents
        .iter()
        .map(|&p| component_curve(&job.cfg, &net.nodes[p].name))
        .collect::<CliResult<_>>()?;
    let mut rows = String::from("t,mean,lower,upper\n");
    for &t in &job.band_grid()? {
        let comp_p: Vec<f64> = curves.iter().map(|c| c(t)).collect();
        let r = bn_system_reliability(&net, &system, &comp_p)
            .map_err(|e| CliError::Runtime(format!("bn evaluation at t={t}: {e}")))?;
        // fixed component curves: a degenerate posterior, zero-width bands
        rows.push_str(&format!("{t},{r},{r},{r}\n"));
    }
    job.write("bands.csv", &rows)
}

pub fn run_flowgraph(job: &Job) -> CliResult<()> {
    let fg = netfmt::parse_flowgraph(&job.cfg.data_path("data.graph")?)?;
    let src = job.cfg.u64_or("source", 0)? as usize;
    let dst = job.cfg.require("sink")?.parse::<usize>().map_err(|_| {
        CliError::Parse(format!("sink: `{}` is not a state index", job.cfg.raw("sink").unwrap()))
    })?;
    let t = flowgraph_solve(&fg, src, dst)
        .map_err(|e| CliError::Runtime(format!("flowgraph reduction: {e}")))?;
    let (mean, variance) =
        mgf_moments(&t).map_err(|e| CliError::Runtime(format!("moment extraction: {e}")))?;
    let mass = t
        .eval(0.0)
        .map_err(|e| CliError::Runtime(format!("transmittance at s=0: {e}")))?;
    job.write(
        "summary.csv",
        &format!(
            "quantity,value\npassage_probability,{mass}\nmean,{mean}\nvariance,{variance}\n"
        ),
    )?;
    let grid = job.band_grid()?;
    if grid.iter().any(|&t| t <= 0.0) {
        return Err(CliError::Validation(
            "flowgraph density grid must be strictly positive (band.start > 0)".into(),
        ));
    }
    let inverted = mgf_invert(&t, &grid)
        .map_err(|e| CliError::Runtime(format!("saddlepoint inversion: {e}")))?;
    let mut rows = String::from("t,density,reliability\n");
    for (&tp, r) in grid.iter().zip(&inverted) {
        match r {
            Ok((density, reliability)) => {
                rows.push_str(&format!("{tp},{density},{reliability}\n"))
            }
            Err(e) => {
                if job.ov.verbose {
                    eprintln!("inversion skipped t={tp}: {e}");
                }
                rows.push_str(&format!("{tp},,\n"));
            }
        }
    }
    job.write("density.csv", &rows)
}

pub fn run_allocate(job: &Job) -> CliResult<()> {
    let get_pair = |key: &str| -> CliResult<(u64, u64)> {
        let v = job.cfg.u64_list(key)?.ok_or_else(|| {
            CliError::Validation(format!("{}: missing required key `{key}`", job.cfg.path.display()))
        })?;
        if v.len() != 2 {
            return Err(CliError::Validation(format!(
                "{key}: expected `trials,successes`, got {} values",
                v.len()
            )));
        }
        if v[1] > v[0] {
            return Err(CliError::Validation(format!(
                "{key}: successes ({}) exceeds trials ({})",
                v[1], v[0]
            )));
        }
        Ok((v[0], v[1]))
    };
    let existing = ExistingData {
        system: get_pair("existing.system")?,
        comp2: get_pair("existing.comp2")?,
        comp3: get_pair("existing.comp3")?,
    };
    let costs = job
        .cfg
        .f64_list("costs")?
        .ok_or_else(|| CliError::Validation("missing required key `costs`".into()))?;
    let budget = job.cfg.require_f64("budget")?;
    let max_counts = job
        .cfg
        .u64_list("bounds")?
        .ok_or_else(|| CliError::Validation("missing required key `bounds`".into()))?;
    if costs.len() != 3 || max_counts.len() != 3 {
        return Err(CliError::Validation(
            "costs and bounds must list 3 test types (system, comp2, comp3)".into(),
        ));
    }
    let seed = {
        let s = match job.ov.seed {
            Some(s) => s,
            None => job.cfg.u64_or("seed", 0)?,
        };
        s
    };
    let prior = DiffusePrior::default();
    let prior_cfg = MetropolisConfig::uniform_steps(
        job.cfg.usize_or("prior.burn_in", 4000)?,
        job.cfg.usize_or("prior.samples", 20000)?,
        stage_seed(seed, "allocate.prior"),
        3,
        0.5,
    );
    let prior_draws = resource_prior_chain(&existing, &prior, &prior_cfg)
        .map_err(|e| CliError::Runtime(format!("prior conditioning: {e}")))?;
    let crit_cfg = CriterionConfig {
        replications: job
            .ov
            .replications
            .map(Ok)
            .unwrap_or_else(|| job.cfg.usize_or("criterion.replications", 100))?,
        inner_burn_in: job.cfg.usize_or("criterion.inner_burn_in", 500)?,
        inner_samples: job.cfg.usize_or("criterion.inner_samples", 2000)?,
        seed: stage_seed(seed, "allocate.criterion"),
        ..CriterionConfig::default()
    };
    let bounds = AllocationBounds { max_counts, costs: costs.clone(), budget };
    let ga_cfg = GaConfig {
        population: job.cfg.usize_or("ga.population", 20)?,
        generations: job.cfg.usize_or("ga.generations", 15)?,
        seed: stage_seed(seed, "allocate.ga"),
        ..GaConfig::default()
    };
    let out = ga_optimize(
        &bounds,
        |a: &Allocation| {
            preposterior_criterion(a, &existing, &prior, &prior_draws, &crit_cfg)
                .map(|o| o.value)
        },
        &ga_cfg,
    )
    .map_err(|e| CliError::Runtime(format!("allocation search: {e}")))?;
    job.write("prior_chain.csv", &prior_draws.export_table())?;
    let mut report = String::from("quantity,value\n");
    for (i, c) in out.best.counts.iter().enumerate() {
        report.push_str(&format!("n{},{c}\n", i + 1));
    }
    report.push_str(&format!("cost,{}\n", out.best.cost()));
    report.push_str(&format!("criterion,{}\n", out.value));
    job.write("report.csv", &report)?;
    let mut log = String::from("evaluation,n1,n2,n3,criterion\n");
    for (i, (g, v)) in out.log.iter().enumerate() {
        log.push_str(&format!("{},{},{},{},{v}\n", i + 1, g[0], g[1], g[2]));
    }
    job.write("evaluations.csv", &log)
}

pub fn run(kind: &str, cfg_path: &Path, out_dir: &Path, ov: Overrides) -> CliResult<()> {
    let cfg = Config::load(cfg_path)?;
    let job = Job { cfg, out_dir: out_dir.to_path_buf(), ov };
    match kind {
        "degfail" => run_degfail(&job),
        "surrogate" => run_surrogate(&job),
        "lots" => run_lots(&job),
        "multilevel-series" => run_multilevel(&job),
        "partial-tests" => run_partial_tests(&job),
        "nhpp" => run_nhpp(&job),
        "weibull-series" => run_weibull_series(&job),
        "bn-system" => run_bn_system(&job),
        "flowgraph" => run_flowgraph(&job),
        "allocate" => run_allocate(&job),
        other => Err(CliError::Validation(format!("unknown analysis kind `{other}`"))),
    }
}
