//! Flowgraph models: branches carry a transition probability and a
//! waiting-time MGF. Source-to-sink transmittances are assembled by
//! Mason's rule, differentiated numerically for moments, and inverted to
//! densities by a saddlepoint approximation.

use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Waiting-time families and transmittance expressions
// ---------------------------------------------------------------------------

/// Waiting-time distribution of one branch, identified by its MGF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaitingTime {
    /// M(s) = rate / (rate - s), s < rate.
    Exponential { rate: f64 },
    /// M(s) = (rate / (rate - s))^shape, s < rate; integer or real shape.
    Gamma { shape: f64, rate: f64 },
    /// M(s) = exp(mean s + sd^2 s^2 / 2).
    Normal { mean: f64, sd: f64 },
    /// Degenerate at `value`: M(s) = exp(value s).
    Constant { value: f64 },
}

impl WaitingTime {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            WaitingTime::Exponential { rate } => rate > 0.0,
            WaitingTime::Gamma { shape, rate } => shape > 0.0 && rate > 0.0,
            WaitingTime::Normal { sd, .. } => sd > 0.0,
            WaitingTime::Constant { value } => value >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Param(format!("invalid waiting time {self:?}")))
        }
    }

    /// MGF at `s`; infinite outside the convergence region.
    pub fn mgf(&self, s: f64) -> f64 {
        match *self {
            WaitingTime::Exponential { rate } => {
                if s < rate {
                    rate / (rate - s)
                } else {
                    f64::INFINITY
                }
            }
            WaitingTime::Gamma { shape, rate } => {
                if s < rate {
                    (rate / (rate - s)).powf(shape)
                } else {
                    f64::INFINITY
                }
            }
            WaitingTime::Normal { mean, sd } => (mean * s + 0.5 * sd * sd * s * s).exp(),
            WaitingTime::Constant { value } => (value * s).exp(),
        }
    }

    /// Supremum of the convergence region (exclusive).
    pub fn s_max(&self) -> f64 {
        match *self {
            WaitingTime::Exponential { rate } | WaitingTime::Gamma { rate, .. } => rate,
            WaitingTime::Normal { .. } | WaitingTime::Constant { .. } => f64::INFINITY,
        }
    }

    pub fn sample(&self, rng: &mut impl rand::Rng) -> f64 {
        use rand_distr::Distribution as _;
        match *self {
            WaitingTime::Exponential { rate } => {
                rand_distr::Exp::new(rate).unwrap().sample(rng)
            }
            WaitingTime::Gamma { shape, rate } => {
                rand_distr::Gamma::new(shape, 1.0 / rate).unwrap().sample(rng)
            }
            WaitingTime::Normal { mean, sd } => {
                rand_distr::Normal::new(mean, sd).unwrap().sample(rng)
            }
            WaitingTime::Constant { value } => value,
        }
    }
}

/// Evaluable transmittance expression: closed under sum, product, and the
/// feedback form 1/(1-x) that Mason's rule produces.
#[derive(Debug, Clone, PartialEq)]
pub enum Transmittance {
    Const(f64),
    /// One branch: probability times waiting-time MGF.
    Branch { p: f64, wt: WaitingTime },
    Add(Vec<Transmittance>),
    Mul(Vec<Transmittance>),
    /// 1 / inner; used as 1/Δ with Δ = 1 - Σ loops + …
    Recip(Box<Transmittance>),
}

impl Transmittance {
    /// Value at `s`. `Err` when a Recip denominator vanishes, `inf` when a
    /// branch MGF diverges.
    pub fn eval(&self, s: f64) -> Result<f64> {
        Ok(match self {
            Transmittance::Const(c) => *c,
            Transmittance::Branch { p, wt } => p * wt.mgf(s),
            Transmittance::Add(terms) => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.eval(s)?;
                }
                acc
            }
            Transmittance::Mul(factors) => {
                let mut acc = 1.0;
                for f in factors {
                    acc *= f.eval(s)?;
                }
                acc
            }
            Transmittance::Recip(inner) => {
                let d = inner.eval(s)?;
                if d == 0.0 {
                    return Err(Error::Numerical(format!(
                        "transmittance denominator vanishes at s = {s}"
                    )));
                }
                1.0 / d
            }
        })
    }

    /// Upper edge of the convergence region: the smallest branch s_max.
    /// Recip denominators can shrink the usable region further; callers
    /// probe with `eval`.
    pub fn s_max(&self) -> f64 {
        match self {
            Transmittance::Const(_) => f64::INFINITY,
            Transmittance::Branch { wt, .. } => wt.s_max(),
            Transmittance::Add(ts) | Transmittance::Mul(ts) => {
                ts.iter().map(|t| t.s_max()).fold(f64::INFINITY, f64::min)
            }
            Transmittance::Recip(inner) => inner.s_max(),
        }
    }
}

// ---------------------------------------------------------------------------
// Flowgraph and Mason's rule
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub p: f64,
    pub wt: WaitingTime,
}

/// Directed flowgraph over states 0..n_states.
#[derive(Debug, Clone, PartialEq)]
pub struct Flowgraph {
    pub n_states: usize,
    pub branches: Vec<Branch>,
}

const MAX_LOOPS: usize = 20;

impl Flowgraph {
    pub fn validate(&self) -> Result<()> {
        if self.n_states == 0 {
            return Err(Error::Empty("flowgraph has no states".into()));
        }
        let mut out_p = vec![0.0f64; self.n_states];
        let mut has_out = vec![false; self.n_states];
        for (i, b) in self.branches.iter().enumerate() {
            if b.from >= self.n_states || b.to >= self.n_states {
                return Err(Error::Schema(format!(
                    "branch {i}: state index out of range ({} -> {})",
                    b.from, b.to
                )));
            }
            if !(b.p > 0.0 && b.p <= 1.0) {
                return Err(Error::Param(format!(
                    "branch {i}: probability {} outside (0,1]",
                    b.p
                )));
            }
            b.wt.validate()?;
            out_p[b.from] += b.p;
            has_out[b.from] = true;
        }
        for state in 0..self.n_states {
            if has_out[state] && (out_p[state] - 1.0).abs() > 1e-9 {
                return Err(Error::Param(format!(
                    "state {state}: outgoing probabilities sum to {}",
                    out_p[state]
                )));
            }
        }
        Ok(())
    }

    fn branches_from(&self, state: usize) -> impl Iterator<Item = (usize, &Branch)> {
        self.branches
            .iter()
            .enumerate()
            .filter(move |(_, b)| b.from == state)
    }

    /// All simple paths src -> dst as branch-index lists.
    fn simple_paths(&self, src: usize, dst: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut visited = vec![false; self.n_states];
        let mut path = Vec::new();
        self.dfs_paths(src, dst, &mut visited, &mut path, &mut out);
        out
    }

    fn dfs_paths(
        &self,
        at: usize,
        dst: usize,
        visited: &mut Vec<bool>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if at == dst {
            out.push(path.clone());
            return;
        }
        visited[at] = true;
        for (i, b) in self.branches_from(at) {
            if !visited[b.to] || b.to == dst {
                path.push(i);
                self.dfs_paths(b.to, dst, visited, path, out);
                path.pop();
            }
        }
        visited[at] = false;
    }

    /// All simple loops as branch-index lists (canonical start: smallest
    /// state on the loop).
    fn simple_loops(&self) -> Result<Vec<Vec<usize>>> {
        let mut out = Vec::new();
        for start in 0..self.n_states {
            // only loops whose minimum state is `start`
            let mut visited = vec![false; self.n_states];
            let mut path = Vec::new();
            self.dfs_loops(start, start, &mut visited, &mut path, &mut out)?;
        }
        Ok(out)
    }

    fn dfs_loops(
        &self,
        at: usize,
        start: usize,
        visited: &mut Vec<bool>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        visited[at] = true;
        for (i, b) in self.branches_from(at) {
            if b.to == start {
                out.push({
                    let mut l = path.clone();
                    l.push(i);
                    l
                });
                if out.len() > MAX_LOOPS {
                    return Err(Error::Numerical(format!(
                        "more than {MAX_LOOPS} simple loops; flowgraph too entangled for Mason's rule"
                    )));
                }
            } else if b.to > start && !visited[b.to] {
                path.push(i);
                self.dfs_loops(b.to, start, visited, path, out)?;
                path.pop();
            }
        }
        visited[at] = false;
        Ok(())
    }

    fn loop_states(&self, l: &[usize]) -> Vec<usize> {
        l.iter().map(|&i| self.branches[i].from).collect()
    }
}

fn product_of(fg: &Flowgraph, branch_ids: &[usize]) -> Transmittance {
    Transmittance::Mul(
        branch_ids
            .iter()
            .map(|&i| {
                let b = &fg.branches[i];
                Transmittance::Branch { p: b.p, wt: b.wt }
            })
            .collect(),
    )
}

/// Δ over the subset of loops not touching `excluded` states: 1 - Σ single
/// loops + Σ pairs of non-touching loops - ... Built by enumerating
/// non-touching loop combinations.
fn delta(fg: &Flowgraph, loops: &[Vec<usize>], excluded: &[usize]) -> Transmittance {
    let usable: Vec<&Vec<usize>> = loops
        .iter()
        .filter(|l| fg.loop_states(l).iter().all(|s| !excluded.contains(s)))
        .collect();
    let mut terms = vec![Transmittance::Const(1.0)];
    // subsets of pairwise non-touching loops, with sign (-1)^{|subset|}
    let n = usable.len();
    let states: Vec<Vec<usize>> = usable.iter().map(|l| fg.loop_states(l)).collect();
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| (mask >> i) & 1 == 1).collect();
        let mut disjoint = true;
        'outer: for a in 0..idx.len() {
            for b in (a + 1)..idx.len() {
                if states[idx[a]].iter().any(|s| states[idx[b]].contains(s)) {
                    disjoint = false;
                    break 'outer;
                }
            }
        }
        if !disjoint {
            continue;
        }
        let sign = if idx.len() % 2 == 1 { -1.0 } else { 1.0 };
        let mut factors = vec![Transmittance::Const(sign)];
        for &i in &idx {
            factors.push(product_of(fg, usable[i]));
        }
        terms.push(Transmittance::Mul(factors));
    }
    Transmittance::Add(terms)
}

/// Source-to-sink transmittance by Mason's rule: Σ_k P_k Δ_k / Δ.
pub fn flowgraph_solve(fg: &Flowgraph, src: usize, dst: usize) -> Result<Transmittance> {
    fg.validate()?;
    if src >= fg.n_states || dst >= fg.n_states {
        return Err(Error::Schema(format!("state out of range ({src} or {dst})")));
    }
    let paths = fg.simple_paths(src, dst);
    if paths.is_empty() {
        return Err(Error::Domain(format!("state {dst} unreachable from {src}")));
    }
    let loops = fg.simple_loops()?;
    let big_delta = delta(fg, &loops, &[]);
    let mut numerator = Vec::new();
    for path in &paths {
        let mut touched: Vec<usize> = path.iter().map(|&i| fg.branches[i].from).collect();
        touched.push(dst);
        let delta_k = delta(fg, &loops, &touched);
        numerator.push(Transmittance::Mul(vec![product_of(fg, path), delta_k]));
    }
    Ok(Transmittance::Mul(vec![
        Transmittance::Add(numerator),
        Transmittance::Recip(Box::new(big_delta)),
    ]))
}

// ---------------------------------------------------------------------------
// Moments by numerical differentiation
// ---------------------------------------------------------------------------

/// Mean and variance of the conditional waiting time, from central
/// differences of K(s) = ln(M(s)/M(0)) at 0. The step shrinks from 1e-3
/// of the convergence radius until consecutive estimates stabilize.
pub fn mgf_moments(t: &Transmittance) -> Result<(f64, f64)> {
    let m0 = t.eval(0.0)?;
    if !(m0 > 0.0) || !m0.is_finite() {
        return Err(Error::Numerical(format!(
            "transmittance at s=0 is {m0}, cannot normalize"
        )));
    }
    let radius = t.s_max().min(1.0);
    if radius <= 0.0 {
        return Err(Error::Numerical("convergence region does not include 0".into()));
    }
    let k = |s: f64| -> Result<f64> {
        let v = t.eval(s)?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Numerical(format!("M({s}) = {v} not positive finite")));
        }
        Ok((v / m0).ln())
    };
    let mut h = radius * 1e-3;
    // back off if the MGF overflows at the initial step
    while h > 1e-14 && (k(h).is_err() || k(-h).is_err()) {
        h *= 0.25;
    }
    let mut prev: Option<(f64, f64)> = None;
    let mut tried = Vec::new();
    for _ in 0..12 {
        let (kp, km) = (k(h)?, k(-h)?);
        let mean = (kp - km) / (2.0 * h);
        let var = (kp - 2.0 * 0.0 + km) / (h * h); // K(0) = 0
        tried.push(h);
        if let Some((pm, pv)) = prev {
            let scale_m = mean.abs().max(1e-12);
            let scale_v = var.abs().max(1e-12);
            if ((mean - pm) / scale_m).abs() < 1e-7 && ((var - pv) / scale_v).abs() < 1e-5 {
                return Ok((mean, var));
            }
        }
        prev = Some((mean, var));
        h *= 0.5;
    }
    Err(Error::Numerical(format!(
        "moment differentiation did not stabilize; steps tried: {tried:?}"
    )))
}

// ---------------------------------------------------------------------------
// Saddlepoint inversion
// ---------------------------------------------------------------------------

/// Density and reliability values on a positive time grid, by the
/// first-order saddlepoint approximation to the normalized MGF, followed
/// by a renormalization pass so the density integrates to M(0) over the
/// covered range plus tails.
///
/// Returns one entry per grid point: `Ok((density, reliability))` or a
/// per-point diagnostic when the saddlepoint equation has no solution.
pub fn mgf_invert(t: &Transmittance, grid: &[f64]) -> Result<Vec<Result<(f64, f64)>>> {
    if grid.is_empty() {
        return Err(Error::Empty("empty time grid".into()));
    }
    if grid.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Domain("grid points must be positive".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("grid must be strictly increasing".into()));
    }
    let m0 = t.eval(0.0)?;
    if !(m0 > 0.0) || !m0.is_finite() {
        return Err(Error::Numerical(format!("M(0) = {m0}, cannot normalize")));
    }

    // usable upper s bound: back off from the convergence edge, then
    // shrink while evaluation fails (Recip roots inside the region)
    let mut s_hi = t.s_max();
    if !s_hi.is_finite() {
        s_hi = 1e6;
    }
    s_hi *= 1.0 - 1e-9;
    let k = |s: f64| -> Option<f64> {
        let v = t.eval(s).ok()?;
        if v > 0.0 && v.is_finite() {
            Some((v / m0).ln())
        } else {
            None
        }
    };
    while s_hi > 1e-12 && k(s_hi).is_none() {
        s_hi *= 0.5;
    }
    let s_lo = -1e6;

    let kp = |s: f64| -> Option<f64> {
        // five-point-free first derivative: central difference with a
        // step scaled to the distance from the convergence edge
        let h = ((s_hi - s).abs().min(1.0) * 1e-5).max(1e-9);
        Some((k(s + h)? - k(s - h)?) / (2.0 * h))
    };
    let kpp = |s: f64| -> Option<f64> {
        let h = ((s_hi - s).abs().min(1.0) * 1e-4).max(1e-8);
        Some((k(s + h)? - 2.0 * k(s)? + k(s - h)?) / (h * h))
    };

    let mut raw: Vec<Result<f64>> = Vec::with_capacity(grid.len());
    for &time in grid {
        // solve K'(s) = time by bisection; K' is increasing
        let solve = || -> Option<f64> {
            let mut lo = s_lo;
            let mut hi = s_hi - (s_hi - 0.0).abs() * 1e-6;
            let f_hi = kp(hi)? - time;
            if f_hi < 0.0 {
                return None; // grid point beyond the reachable mean range
            }
            // walk lo up until K'(lo) - time < 0
            let mut f_lo = kp(lo)? - time;
            if f_lo > 0.0 {
                return None;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let f_mid = kp(mid)? - time;
                if f_mid.abs() < 1e-12 {
                    return Some(mid);
                }
                if (f_lo < 0.0) == (f_mid < 0.0) {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
            }
            Some(0.5 * (lo + hi))
        };
        match solve() {
            None => raw.push(Err(Error::Numerical(format!(
                "saddlepoint equation unsolvable at t = {time}"
            )))),
            Some(s_hat) => {
                let (k_hat, k2_hat) = match (k(s_hat), kpp(s_hat)) {
                    (Some(a), Some(b)) if b > 0.0 => (a, b),
                    _ => {
                        raw.push(Err(Error::Numerical(format!(
                            "curvature evaluation failed at t = {time}"
                        ))));
                        continue;
                    }
                };
                let log_f = k_hat - s_hat * time - 0.5 * (2.0 * std::f64::consts::PI * k2_hat).ln();
                raw.push(Ok(log_f.exp()));
            }
        }
    }

    // renormalize over the grid (trapezoid, extended to 0 and beyond the
    // last point by flat extrapolation of the end densities)
    let mut integral = 0.0;
    let first_ok = raw.iter().position(|r| r.is_ok());
    if let Some(_i0) = first_ok {
        let pts: Vec<(f64, f64)> = grid
            .iter()
            .zip(&raw)
            .filter_map(|(&t, r)| r.as_ref().ok().map(|&d| (t, d)))
            .collect();
        for w in pts.windows(2) {
            integral += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
        }
        // leading tail: trapezoid from 0, with the density at 0 linearly
        // extrapolated from the first two points
        let f0 = if pts.len() >= 2 {
            let slope = (pts[1].1 - pts[0].1) / (pts[1].0 - pts[0].0);
            (pts[0].1 - slope * pts[0].0).max(0.0)
        } else {
            pts[0].1
        };
        integral += 0.5 * (f0 + pts[0].1) * pts[0].0;
        // trailing tail: exponential decay fitted to the last two points
        if pts.len() >= 2 {
            let (ta, da) = pts[pts.len() - 2];
            let (tb, db) = pts[pts.len() - 1];
            if db > 0.0 && da > db {
                let decay = (da / db).ln() / (tb - ta);
                integral += db / decay;
            }
        }
    }
    let scale = if integral > 0.0 { m0 / integral } else { 1.0 };

    // reliability: R(t) = M(0) - integral of the scaled density up to t,
    // with the same extrapolated value at t=0 for the leading trapezoid
    let scaled: Vec<Option<(f64, f64)>> = grid
        .iter()
        .zip(&raw)
        .map(|(&t, r)| r.as_ref().ok().map(|&d| (t, d * scale)))
        .collect();
    let oks: Vec<(f64, f64)> = scaled.iter().flatten().copied().collect();
    let f0 = match oks.len() {
        0 => 0.0,
        1 => oks[0].1,
        _ => {
            let slope = (oks[1].1 - oks[0].1) / (oks[1].0 - oks[0].0);
            (oks[0].1 - slope * oks[0].0).max(0.0)
        }
    };
    let mut out = Vec::with_capacity(grid.len());
    let mut cum = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (r, s) in raw.iter().zip(&scaled) {
        match (r, s) {
            (Err(e), _) => out.push(Err(Error::Numerical(e.to_string()))),
            (Ok(_), None) => unreachable!("Ok raw entries always carry a scaled value"),
            (Ok(_), &Some((time, d))) => {
                match prev {
                    None => cum += 0.5 * (f0 + d) * time,
                    Some((pt, pd)) => cum += 0.5 * (pd + d) * (time - pt),
                }
                prev = Some((time, d));
                out.push(Ok((d, (m0 - cum).max(0.0))));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Series 0 -> 1 -> 2 with exponential waits: the two-pump example.
    fn series_fg(rate01: f64, rate12: f64) -> Flowgraph {
        Flowgraph {
            n_states: 3,
            branches: vec![
                Branch { from: 0, to: 1, p: 1.0, wt: WaitingTime::Exponential { rate: rate01 } },
                Branch { from: 1, to: 2, p: 1.0, wt: WaitingTime::Exponential { rate: rate12 } },
            ],
        }
    }

    /// Feedback graph: 0 -> 1, then 1 -> 2 with probability p12 or back
    /// 1 -> 0 with probability 1 - p12.
    fn feedback_fg(p12: f64) -> Flowgraph {
        Flowgraph {
            n_states: 3,
            branches: vec![
                Branch { from: 0, to: 1, p: 1.0, wt: WaitingTime::Exponential { rate: 2.0 } },
                Branch { from: 1, to: 2, p: p12, wt: WaitingTime::Exponential { rate: 3.0 } },
                Branch {
                    from: 1,
                    to: 0,
                    p: 1.0 - p12,
                    wt: WaitingTime::Exponential { rate: 1.0 },
                },
            ],
        }
    }

    #[test]
    fn series_transmittance_is_product_of_mgfs() {
        let fg = series_fg(2.0, 3.0);
        let t = flowgraph_solve(&fg, 0, 2).unwrap();
        for s in [-1.0, 0.0, 0.5, 1.5] {
            let want = (2.0 / (2.0 - s)) * (3.0 / (3.0 - s));
            assert_abs_diff_eq!(t.eval(s).unwrap(), want, epsilon = 1e-12);
        }
        // two pumps: combined first-passage rate 2*lambda0, then lambda1
        let (l0, l1) = (0.7, 1.9);
        let t = flowgraph_solve(&series_fg(2.0 * l0, l1), 0, 2).unwrap();
        let s = 0.3;
        assert_abs_diff_eq!(
            t.eval(s).unwrap(),
            (2.0 * l0 / (2.0 * l0 - s)) * (l1 / (l1 - s)),
            epsilon = 1e-12
        );
    }

    #[test]
    fn transmittance_at_zero_is_total_probability() {
        let t = flowgraph_solve(&feedback_fg(0.6), 0, 2).unwrap();
        // absorption at 2 is certain
        assert_abs_diff_eq!(t.eval(0.0).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn feedback_reduces_to_series_when_loop_vanishes() {
        // p_10 -> 0 leaves the plain series transmittance
        let fg = Flowgraph {
            n_states: 3,
            branches: vec![
                Branch { from: 0, to: 1, p: 1.0, wt: WaitingTime::Exponential { rate: 2.0 } },
                Branch { from: 1, to: 2, p: 1.0 - 1e-12, wt: WaitingTime::Exponential { rate: 3.0 } },
                Branch { from: 1, to: 0, p: 1e-12, wt: WaitingTime::Exponential { rate: 1.0 } },
            ],
        };
        let t = flowgraph_solve(&fg, 0, 2).unwrap();
        let series = flowgraph_solve(&series_fg(2.0, 3.0), 0, 2).unwrap();
        for s in [-0.5, 0.0, 0.9] {
            assert_abs_diff_eq!(t.eval(s).unwrap(), series.eval(s).unwrap(), epsilon = 1e-9);
        }
    }

    #[test]
    fn feedback_closed_form() {
        // Mason: M = T01 T12 / (1 - T01 T10)
        let fg = feedback_fg(0.6);
        let t = flowgraph_solve(&fg, 0, 2).unwrap();
        for s in [-1.0, 0.0, 0.4] {
            let t01 = 2.0 / (2.0 - s);
            let t12 = 0.6 * 3.0 / (3.0 - s);
            let t10 = 0.4 * 1.0 / (1.0 - s);
            let want = t01 * t12 / (1.0 - t01 * t10);
            assert_abs_diff_eq!(t.eval(s).unwrap(), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn first_step_analysis_oracle_at_zero() {
        // absorption probabilities from linear equations, on a graph with
        // two absorbing states
        let fg = Flowgraph {
            n_states: 4,
            branches: vec![
                Branch { from: 0, to: 1, p: 0.5, wt: WaitingTime::Exponential { rate: 1.0 } },
                Branch { from: 0, to: 2, p: 0.3, wt: WaitingTime::Exponential { rate: 1.0 } },
                Branch { from: 0, to: 3, p: 0.2, wt: WaitingTime::Exponential { rate: 1.0 } },
                Branch { from: 1, to: 0, p: 0.4, wt: WaitingTime::Exponential { rate: 2.0 } },
                Branch { from: 1, to: 2, p: 0.6, wt: WaitingTime::Exponential { rate: 2.0 } },
            ],
        };
        // a0 = P(absorb at 2 | start 0) = 0.3 + 0.5 a1, a1 = 0.6 + 0.4 a0
        let a0 = (0.3 + 0.5 * 0.6) / (1.0 - 0.5 * 0.4);
        let t = flowgraph_solve(&fg, 0, 2).unwrap();
        assert_abs_diff_eq!(t.eval(0.0).unwrap(), a0, epsilon = 1e-12);
        // the other sink picks up the rest
        let t3 = flowgraph_solve(&fg, 0, 3).unwrap();
        assert_abs_diff_eq!(t3.eval(0.0).unwrap(), 1.0 - a0, epsilon = 1e-12);
    }

    #[test]
    fn unreachable_and_loop_cap() {
        let fg = series_fg(1.0, 1.0);
        assert!(matches!(flowgraph_solve(&fg, 2, 0), Err(Error::Domain(_))));
        // complete 6-state graph has far more than 20 simple loops
        let mut branches = Vec::new();
        for a in 0..5usize {
            for b in 0..5usize {
                if a != b {
                    branches.push(Branch {
                        from: a,
                        to: b,
                        p: 0.25,
                        wt: WaitingTime::Exponential { rate: 1.0 },
                    });
                }
            }
        }
        branches.push(Branch { from: 5, to: 0, p: 1.0, wt: WaitingTime::Constant { value: 1.0 } });
        let tangled = Flowgraph { n_states: 6, branches };
        // make state 5 the source so 0..4 keep probability sums of 1
        let err = flowgraph_solve(&tangled, 5, 4).unwrap_err();
        assert!(matches!(err, Error::Numerical(ref m) if m.contains("loops")), "{err}");
    }

    #[test]
    fn validation_errors() {
        let mut fg = series_fg(1.0, 1.0);
        fg.branches[0].p = 0.7; // state 0 no longer sums to 1
        assert!(matches!(fg.validate(), Err(Error::Param(_))));
        let mut fg = series_fg(1.0, 1.0);
        fg.branches[1].to = 9;
        assert!(matches!(fg.validate(), Err(Error::Schema(_))));
    }

    #[test]
    fn moments_of_single_exponential() {
        let t = Transmittance::Branch { p: 1.0, wt: WaitingTime::Exponential { rate: 4.0 } };
        let (mean, var) = mgf_moments(&t).unwrap();
        assert_abs_diff_eq!(mean, 0.25, epsilon = 1e-7);
        assert_abs_diff_eq!(var, 0.0625, epsilon = 1e-5);
    }

    #[test]
    fn moments_of_exponential_series() {
        let (l0, l1) = (1.0, 3.0);
        let t = flowgraph_solve(&series_fg(2.0 * l0, l1), 0, 2).unwrap();
        let (mean, var) = mgf_moments(&t).unwrap();
        assert_abs_diff_eq!(mean, 1.0 / (2.0 * l0) + 1.0 / l1, epsilon = 1e-7);
        assert_abs_diff_eq!(
            var,
            1.0 / (2.0 * l0).powi(2) + 1.0 / l1.powi(2),
            epsilon = 1e-5
        );
    }

    #[test]
    fn moments_feedback_reduction_and_other_families() {
        let t = flowgraph_solve(&feedback_fg(1.0 - 1e-13), 0, 2).unwrap();
        let series = flowgraph_solve(&series_fg(2.0, 3.0), 0, 2).unwrap();
        let (m1, v1) = mgf_moments(&t).unwrap();
        let (m2, v2) = mgf_moments(&series).unwrap();
        assert_abs_diff_eq!(m1, m2, epsilon = 1e-6);
        assert_abs_diff_eq!(v1, v2, epsilon = 1e-4);
        // normal and gamma branches
        let t = Transmittance::Branch { p: 1.0, wt: WaitingTime::Normal { mean: 5.0, sd: 2.0 } };
        let (m, v) = mgf_moments(&t).unwrap();
        assert_abs_diff_eq!(m, 5.0, epsilon = 1e-6);
        assert_abs_diff_eq!(v, 4.0, epsilon = 1e-4);
        let t = Transmittance::Branch { p: 1.0, wt: WaitingTime::Gamma { shape: 3.0, rate: 2.0 } };
        let (m, v) = mgf_moments(&t).unwrap();
        assert_abs_diff_eq!(m, 1.5, epsilon = 1e-6);
        assert_abs_diff_eq!(v, 0.75, epsilon = 1e-4);
    }

    #[test]
    fn moments_condition_on_reaching_the_sink() {
        // partial transmittance: probability 0.3 branch; conditional
        // moments are still the exponential's
        let t = Transmittance::Branch { p: 0.3, wt: WaitingTime::Exponential { rate: 4.0 } };
        let (mean, var) = mgf_moments(&t).unwrap();
        assert_abs_diff_eq!(mean, 0.25, epsilon = 1e-7);
        assert_abs_diff_eq!(var, 0.0625, epsilon = 1e-5);
    }

    #[test]
    fn monte_carlo_passage_time_matches_moments() {
        // simulate the feedback process directly
        let fg = feedback_fg(0.6);
        let t = flowgraph_solve(&fg, 0, 2).unwrap();
        let (mean, var) = mgf_moments(&t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        use rand::Rng as _;
        let n = 100_000usize;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let mut state = 0usize;
            let mut time = 0.0;
            while state != 2 {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = None;
                for b in fg.branches.iter().filter(|b| b.from == state) {
                    acc += b.p;
                    if u <= acc {
                        chosen = Some(b);
                        break;
                    }
                }
                let b = chosen.expect("outgoing probabilities sum to 1");
                time += b.wt.sample(&mut rng);
                state = b.to;
            }
            sum += time;
            sum2 += time * time;
        }
        let mc_mean = sum / n as f64;
        let mc_var = sum2 / n as f64 - mc_mean * mc_mean;
        let se = (mc_var / n as f64).sqrt();
        assert_abs_diff_eq!(mc_mean, mean, epsilon = 3.0 * se);
        assert_abs_diff_eq!(mc_var, var, epsilon = 0.05 * var);
    }

    #[test]
    fn invert_single_exponential() {
        let rate = 2.0;
        let t = Transmittance::Branch { p: 1.0, wt: WaitingTime::Exponential { rate } };
        let grid: Vec<f64> = (1..=100).map(|i| i as f64 * 0.05 / rate).collect();
        let out = mgf_invert(&t, &grid).unwrap();
        for (&time, r) in grid.iter().zip(&out) {
            let (d, rel) = r.as_ref().unwrap();
            let want = rate * (-rate * time).exp();
            if (0.1 / rate..=5.0 / rate).contains(&time) {
                assert!(
                    (d - want).abs() / want <= 0.02,
                    "density at t={time}: got {d}, want {want}"
                );
                let want_rel = (-rate * time).exp();
                assert!((rel - want_rel).abs() <= 0.02, "reliability at t={time}");
            }
        }
        // reliability nonincreasing
        let rels: Vec<f64> = out.iter().map(|r| r.as_ref().unwrap().1).collect();
        assert!(rels.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn invert_hypoexponential_series() {
        let (l0, l1) = (1.0, 3.0);
        let t = flowgraph_solve(&series_fg(2.0 * l0, l1), 0, 2).unwrap();
        let grid: Vec<f64> = (1..=120).map(|i| i as f64 * 0.025).collect();
        let out = mgf_invert(&t, &grid).unwrap();
        let c = 2.0 * l0 * l1 / (l1 - 2.0 * l0);
        for (&time, r) in grid.iter().zip(&out) {
            let (d, _) = r.as_ref().unwrap();
            let want = c * ((-2.0 * l0 * time).exp() - (-l1 * time).exp());
            if (0.15..=2.5).contains(&time) {
                assert!(
                    (d - want).abs() / want <= 0.02,
                    "density at t={time}: got {d}, want {want}"
                );
            }
        }
    }

    #[test]
    fn invert_partial_probability_keeps_total_mass() {
        // p = 0.3 branch: density integrates to 0.3, reliability starts
        // near 0.3
        let t = Transmittance::Branch { p: 0.3, wt: WaitingTime::Exponential { rate: 1.0 } };
        let grid: Vec<f64> = (1..=200).map(|i| i as f64 * 0.05).collect();
        let out = mgf_invert(&t, &grid).unwrap();
        let first = out[0].as_ref().unwrap();
        assert_abs_diff_eq!(first.1, 0.3 * (-0.05f64).exp(), epsilon = 0.01);
        let mut integral = 0.5 * out[0].as_ref().unwrap().0 * grid[0];
        for i in 1..grid.len() {
            integral += 0.5
                * (out[i - 1].as_ref().unwrap().0 + out[i].as_ref().unwrap().0)
                * (grid[i] - grid[i - 1]);
        }
        assert_abs_diff_eq!(integral, 0.3, epsilon = 0.01);
    }

    #[test]
    fn invert_rejects_bad_grids() {
        let t = Transmittance::Branch { p: 1.0, wt: WaitingTime::Exponential { rate: 1.0 } };
        assert!(matches!(mgf_invert(&t, &[]), Err(Error::Empty(_))));
        assert!(matches!(mgf_invert(&t, &[0.0, 1.0]), Err(Error::Domain(_))));
        assert!(matches!(mgf_invert(&t, &[1.0, 0.5]), Err(Error::Domain(_))));
    }

    #[test]
    fn invert_constant_waiting_time_reports_unsolvable_points() {
        // degenerate waiting time: K'(s) = c everywhere, so the equation
        // has no solution except at t = c
        let t = Transmittance::Branch { p: 1.0, wt: WaitingTime::Constant { value: 1.0 } };
        let out = mgf_invert(&t, &[0.2, 2.0]).unwrap();
        assert!(out.iter().all(|r| r.is_err()));
    }
}
