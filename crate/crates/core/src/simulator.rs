//! Monte Carlo estimates of the frequency measures and reach probabilities.
//!
//! Every run draws from its own ChaCha stream seeded from `(seed, run)`, so
//! results do not depend on how runs are scheduled across threads.

use crate::dta::Dta;
use crate::error::{invalid, Error, Result};
use crate::product::{Product, ProductState, SmpRun};
use crate::region::{region_of, BsccDecomposition, RegionGraph};
use crate::smp::{CylinderTemplate, SemiMarkovProcess};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub seed: u64,
    pub runs: usize,
    /// Letters counted per run, including the burn-in.
    pub steps: usize,
    pub burn_in: usize,
}

impl SimConfig {
    pub fn new(seed: u64, runs: usize, steps: usize, burn_in: usize) -> Result<Self> {
        if runs == 0 || steps == 0 {
            return Err(invalid("runs and steps must be positive"));
        }
        if burn_in >= steps {
            return Err(invalid(format!(
                "burn-in {burn_in} must be smaller than steps {steps}"
            )));
        }
        Ok(SimConfig {
            seed,
            runs,
            steps,
            burn_in,
        })
    }
}

/// `10·|V|` when the region graph size is known, else 100, kept below `steps`.
pub fn default_burn_in(regions: Option<usize>, steps: usize) -> usize {
    let b = regions.map_or(100, |v| v.saturating_mul(10));
    b.min(steps.saturating_sub(1))
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn run_seed(seed: u64, run: usize) -> u64 {
    splitmix64(seed ^ splitmix64(run as u64))
}

fn pick<R: Rng>(rng: &mut R, weights: impl Iterator<Item = (usize, f64)>) -> Option<usize> {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = None;
    for (i, w) in weights {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = Some(i);
        if u < acc {
            return Some(i);
        }
    }
    last
}

/// A run with `steps` transitions: `steps + 1` states and `steps` delays.
pub fn sample_run(smp: &SemiMarkovProcess, seed: u64, steps: usize) -> Result<SmpRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = pick(&mut rng, smp.initial().iter().copied().enumerate()).ok_or_else(|| {
        Error::DegenerateModel("initial distribution has no positive mass".into())
    })?;
    let mut states = Vec::with_capacity(steps + 1);
    let mut delays = Vec::with_capacity(steps);
    states.push(s);
    for _ in 0..steps {
        let succ: Vec<_> = smp.successors(s).collect();
        let k = pick(
            &mut rng,
            succ.iter().enumerate().map(|(i, (_, p, _))| (i, *p)),
        )
        .ok_or_else(|| {
            Error::DegenerateModel(format!("state `{}` has no successor", smp.state_name(s)))
        })?;
        let (target, _, density) = succ[k];
        delays.push(density.quantile(rng.gen::<f64>())?);
        s = target;
        states.push(s);
    }
    SmpRun::new(states, delays)
}

/// Point estimates with per-run standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub estimates: BTreeMap<String, f64>,
    pub stderr: BTreeMap<String, f64>,
    pub count: usize,
    pub config: SimConfig,
}

fn summarize(names: &[String], per_run: &[Vec<f64>], cfg: &SimConfig) -> EstimateReport {
    let n = per_run.len() as f64;
    let mut estimates = BTreeMap::new();
    let mut stderr = BTreeMap::new();
    for (q, name) in names.iter().enumerate() {
        let mean = per_run.iter().map(|r| r[q]).sum::<f64>() / n;
        let var = if per_run.len() > 1 {
            per_run.iter().map(|r| (r[q] - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        estimates.insert(name.clone(), mean);
        stderr.insert(name.clone(), (var / n).sqrt());
    }
    EstimateReport {
        estimates,
        stderr,
        count: per_run.len(),
        config: *cfg,
    }
}

/// Projected product states `z_0 .. z_{steps+1}` of run `r`, together with
/// the delays `t_0 .. t_steps`.
fn projected(
    product: &Product,
    cfg: &SimConfig,
    r: usize,
) -> Result<(Vec<ProductState>, Vec<f64>)> {
    let run = sample_run(product.smp, run_seed(cfg.seed, r), cfg.steps + 1)?;
    let zs = product.project_run(&run)?;
    Ok((zs, run.delays))
}

fn per_run<F>(cfg: &SimConfig, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(usize) -> Result<Vec<f64>> + Sync + Send,
{
    (0..cfg.runs).into_par_iter().map(f).collect()
}

/// Discrete frequency of each location over `Q^{burn_in+1} .. Q^{steps}`.
pub fn estimate_discrete(
    smp: &SemiMarkovProcess,
    dta: &Dta,
    cfg: &SimConfig,
) -> Result<EstimateReport> {
    let product = Product::new(smp, dta)?;
    let nq = dta.num_locations();
    let rows = per_run(cfg, |r| {
        let (zs, _) = projected(&product, cfg, r)?;
        let mut counts = vec![0.0; nq];
        for i in cfg.burn_in + 1..=cfg.steps {
            counts[zs[i + 1].location] += 1.0;
        }
        let n = (cfg.steps - cfg.burn_in) as f64;
        Ok(counts.into_iter().map(|c| c / n).collect())
    })?;
    Ok(summarize(dta.locations(), &rows, cfg))
}

/// Time-weighted frequencies `Σ t_i·1_q(Q^i) / Σ t_i` over the same window.
pub fn estimate_timed(
    smp: &SemiMarkovProcess,
    dta: &Dta,
    cfg: &SimConfig,
) -> Result<EstimateReport> {
    let product = Product::new(smp, dta)?;
    let nq = dta.num_locations();
    let rows = per_run(cfg, |r| {
        let (zs, delays) = projected(&product, cfg, r)?;
        let mut acc = vec![0.0; nq];
        let mut total = 0.0;
        for i in cfg.burn_in + 1..=cfg.steps {
            acc[zs[i + 1].location] += delays[i];
            total += delays[i];
        }
        if !(total > 0.0) {
            return Err(Error::DegenerateInput(
                "sampled delays sum to zero in the counting window".into(),
            ));
        }
        Ok(acc.into_iter().map(|c| c / total).collect())
    })?;
    Ok(summarize(dta.locations(), &rows, cfg))
}

/// Fraction of runs whose projected region enters each bottom component
/// within `steps` product steps; `residual` collects the rest.
pub fn estimate_reach(
    smp: &SemiMarkovProcess,
    dta: &Dta,
    graph: &RegionGraph,
    dec: &BsccDecomposition,
    cfg: &SimConfig,
) -> Result<EstimateReport> {
    let product = Product::new(smp, dta)?;
    let k = dec.k();
    let rows = per_run(cfg, |r| {
        let run = sample_run(smp, run_seed(cfg.seed, r), cfg.steps)?;
        let zs = product.project_run(&run)?;
        let mut hit = vec![0.0; k + 1];
        let found = zs.iter().find_map(|z| {
            graph
                .index_of(&region_of(z.state, z.location, &z.valuation, graph.b_max))
                .and_then(|v| dec.membership[v])
        });
        match found {
            Some(j) => hit[j] = 1.0,
            None => hit[k] = 1.0,
        }
        Ok(hit)
    })?;
    let mut names: Vec<String> = (0..k).map(|j| format!("bscc{j}")).collect();
    names.push("residual".into());
    Ok(summarize(&names, &rows, cfg))
}

/// Empirical probability of a cylinder template.
pub fn estimate_cylinder(
    smp: &SemiMarkovProcess,
    template: &CylinderTemplate,
    cfg: &SimConfig,
) -> Result<EstimateReport> {
    let len = template.intervals.len();
    let rows = per_run(cfg, |r| {
        let run = sample_run(smp, run_seed(cfg.seed, r), len)?;
        Ok(vec![if template.matches(&run.states, &run.delays) {
            1.0
        } else {
            0.0
        }])
    })?;
    Ok(summarize(&["hit".to_string()], &rows, cfg))
}
