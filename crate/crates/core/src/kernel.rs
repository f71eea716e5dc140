//! Grid discretization of the product kernel, and the numerical pipeline
//! built on it: absorption into bottom components, invariant measures per
//! cyclic class, discrete and timed frequencies, and the analytic bounds.

use crate::dta::Dta;
use crate::error::{invalid, Error, Result};
use crate::product::{GeneratorSet, Product, ProductState};
use crate::region::{bscc_decompose, build_region_graph, eliminate_growing_clocks, region_of};
use crate::region::{BsccDecomposition, RegionGraph, RestrictedDta};
use crate::smp::SemiMarkovProcess;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};

/// Per-clock grid of width `1/cells_per_unit` on `[0, cap)` plus one
/// overflow cell `[cap, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    pub cells_per_unit: u32,
    pub cap: u32,
}

impl GridSpec {
    pub fn new(cells_per_unit: u32, cap: u32) -> Result<Self> {
        if cells_per_unit == 0 {
            return Err(invalid("cells_per_unit must be at least 1"));
        }
        if cap.checked_mul(cells_per_unit).is_none() {
            return Err(invalid("grid too fine for the guard constants"));
        }
        Ok(GridSpec {
            cells_per_unit,
            cap,
        })
    }

    pub fn overflow_cell(&self) -> u32 {
        self.cap * self.cells_per_unit
    }

    pub fn cells_per_clock(&self) -> u32 {
        self.overflow_cell() + 1
    }

    fn h(&self) -> f64 {
        1.0 / self.cells_per_unit as f64
    }

    pub fn cell_of(&self, v: f64) -> u32 {
        if v >= self.cap as f64 {
            return self.overflow_cell();
        }
        ((v * self.cells_per_unit as f64).floor().max(0.0) as u32).min(self.overflow_cell() - 1)
    }

    /// `[lo, hi)`; the overflow cell has `hi = inf`.
    pub fn bounds(&self, cell: u32) -> (f64, f64) {
        if cell >= self.overflow_cell() {
            (self.cap as f64, f64::INFINITY)
        } else {
            (cell as f64 * self.h(), (cell + 1) as f64 * self.h())
        }
    }

    /// Midpoint, or `cap + 1/2` for the overflow cell.
    pub fn representative(&self, cell: u32) -> f64 {
        if cell >= self.overflow_cell() {
            self.cap as f64 + 0.5
        } else {
            (cell as f64 + 0.5) * self.h()
        }
    }
}

/// A grid state `(s, q, cells)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridState {
    pub state: usize,
    pub location: usize,
    pub cells: Vec<u32>,
}

impl GridState {
    pub fn representative(&self, grid: &GridSpec) -> Vec<f64> {
        self.cells.iter().map(|&c| grid.representative(c)).collect()
    }
}

/// Weights over grid states.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscretizedDistribution {
    pub weights: BTreeMap<GridState, f64>,
}

impl DiscretizedDistribution {
    pub fn point(g: GridState) -> Self {
        DiscretizedDistribution {
            weights: BTreeMap::from([(g, 1.0)]),
        }
    }

    pub fn total(&self) -> f64 {
        self.weights.values().sum()
    }

    pub fn location_mass(&self, location: usize) -> f64 {
        self.weights
            .iter()
            .filter(|(g, _)| g.location == location)
            .map(|(_, w)| w)
            .sum()
    }

    pub fn normalized(mut self) -> Self {
        let t = self.total();
        if t > 0.0 {
            self.weights.values_mut().for_each(|w| *w /= t);
        }
        self
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        let mut d = 0.0;
        for (g, w) in &self.weights {
            d += (w - other.weights.get(g).copied().unwrap_or(0.0)).abs();
        }
        for (g, w) in &other.weights {
            if !self.weights.contains_key(g) {
                d += w.abs();
            }
        }
        d
    }

    fn add(&mut self, g: GridState, w: f64) {
        *self.weights.entry(g).or_insert(0.0) += w;
    }
}

/// One kernel application from an exact point `(state, location, valuation)`,
/// with targets collapsed to grid cells and merged in key order.
pub fn transitions_from_point(
    product: &Product,
    grid: &GridSpec,
    state: usize,
    location: usize,
    valuation: &[f64],
) -> Result<Vec<(GridState, f64)>> {
    let read = product.read_phase(state, location, valuation)?;
    let n = grid.cells_per_unit as f64;
    let cap = grid.cap as f64;
    let mut out: Vec<(GridState, f64)> = Vec::new();
    for (target, prob, density) in product.smp.successors(state) {
        let (lo, hi) = density.support_f64();
        let mut points = vec![lo];
        for &v in &read.valuation {
            if v >= cap {
                continue;
            }
            let first = (v * n).floor() as u32 + 1;
            for k in first..=grid.overflow_cell() {
                let t = k as f64 / n - v;
                if t > lo && t < hi {
                    points.push(t);
                }
            }
        }
        if hi.is_finite() {
            points.push(hi);
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        let mut segments: Vec<(f64, f64, f64)> = points
            .windows(2)
            .map(|w| (w[0], w[1], 0.5 * (w[0] + w[1])))
            .collect();
        if hi.is_infinite() {
            let last = *points.last().expect("support start present");
            segments.push((last, f64::INFINITY, last + 1.0));
        }
        for (a, b, mid) in segments {
            let mass = prob * density.mass_between(a, b);
            if mass > 0.0 {
                let cells = read
                    .valuation
                    .iter()
                    .map(|v| grid.cell_of(v + mid))
                    .collect();
                out.push((
                    GridState {
                        state: target,
                        location: read.location,
                        cells,
                    },
                    mass,
                ));
            }
        }
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    let mut merged: Vec<(GridState, f64)> = Vec::with_capacity(out.len());
    for (g, w) in out {
        match merged.last_mut() {
            Some((last, acc)) if *last == g => *acc += w,
            _ => merged.push((g, w)),
        }
    }
    Ok(merged)
}

/// One application of the discretized kernel to a whole distribution.
pub fn discretized_step(
    dist: &DiscretizedDistribution,
    product: &Product,
    grid: &GridSpec,
) -> Result<DiscretizedDistribution> {
    let rows: Vec<Result<Vec<(GridState, f64)>>> = dist
        .weights
        .par_iter()
        .map(|(g, _)| {
            transitions_from_point(product, grid, g.state, g.location, &g.representative(grid))
        })
        .collect();
    let mut out = DiscretizedDistribution::default();
    for ((_, w), row) in dist.weights.iter().zip(rows) {
        for (g, p) in row? {
            out.add(g, w * p);
        }
    }
    Ok(out)
}

/// Lazily expanded sparse transition matrix over interned grid states.
pub struct DiscretizedKernel<'a> {
    product: Product<'a>,
    grid: GridSpec,
    states: Vec<GridState>,
    index: HashMap<GridState, usize>,
    rows: Vec<Option<Vec<(usize, f64)>>>,
}

impl<'a> DiscretizedKernel<'a> {
    pub fn new(product: Product<'a>, grid: GridSpec) -> Self {
        DiscretizedKernel {
            product,
            grid,
            states: Vec::new(),
            index: HashMap::new(),
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &GridState {
        &self.states[i]
    }

    pub fn intern(&mut self, g: GridState) -> usize {
        if let Some(&i) = self.index.get(&g) {
            return i;
        }
        let i = self.states.len();
        self.index.insert(g.clone(), i);
        self.states.push(g);
        self.rows.push(None);
        i
    }

    fn expand(&mut self, ids: &[usize]) -> Result<()> {
        let (product, grid, states) = (&self.product, &self.grid, &self.states);
        let raw: Vec<Result<Vec<(GridState, f64)>>> = ids
            .par_iter()
            .map(|&i| {
                let g = &states[i];
                transitions_from_point(product, grid, g.state, g.location, &g.representative(grid))
            })
            .collect();
        for (&i, row) in ids.iter().zip(raw) {
            let row = row?.into_iter().map(|(g, p)| (self.intern(g), p)).collect();
            self.rows[i] = Some(row);
        }
        Ok(())
    }

    /// `mass · K`; the result may be longer than `mass` when new states appear.
    pub fn step(&mut self, mass: &[f64]) -> Result<Vec<f64>> {
        let missing: Vec<usize> = (0..mass.len())
            .filter(|&i| mass[i] != 0.0 && self.rows[i].is_none())
            .collect();
        self.expand(&missing)?;
        let mut out = vec![0.0; self.states.len()];
        for (i, &w) in mass.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for &(j, p) in self.rows[i].as_ref().expect("expanded above") {
                out[j] += w * p;
            }
        }
        Ok(out)
    }

    pub fn row(&mut self, i: usize) -> Result<&[(usize, f64)]> {
        if self.rows[i].is_none() {
            self.expand(&[i])?;
        }
        Ok(self.rows[i].as_deref().expect("expanded above"))
    }

    pub fn to_distribution(&self, mass: &[f64]) -> DiscretizedDistribution {
        let mut d = DiscretizedDistribution::default();
        for (i, &w) in mass.iter().enumerate() {
            if w != 0.0 {
                d.add(self.states[i].clone(), w);
            }
        }
        d
    }

    pub fn from_distribution(&mut self, d: &DiscretizedDistribution) -> Vec<f64> {
        let ids: Vec<(usize, f64)> = d
            .weights
            .iter()
            .map(|(g, w)| (self.intern(g.clone()), *w))
            .collect();
        let mut v = vec![0.0; self.states.len()];
        for (i, w) in ids {
            v[i] += w;
        }
        v
    }
}

/// Where a grid state sits in the region graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellClass {
    Transient,
    Bottom { bscc: usize, class: usize },
    Unmatched,
}

/// Maps grid states of a (possibly clock-restricted) product to regions.
struct Classifier<'g> {
    graph: &'g RegionGraph,
    dec: &'g BsccDecomposition,
    grid: GridSpec,
    /// For restricted chains: original clock count and the kept clocks.
    lift: Option<(usize, Vec<usize>)>,
}

impl Classifier<'_> {
    fn classify(&self, g: &GridState) -> CellClass {
        let rep = g.representative(&self.grid);
        let n = rep.len();
        let h = 1.0 / self.grid.cells_per_unit as f64;
        for attempt in 0..2 {
            let mut v = rep.clone();
            if attempt == 1 {
                for (i, x) in v.iter_mut().enumerate() {
                    if g.cells[i] < self.grid.overflow_cell() {
                        *x += h * (i + 1) as f64 / (4.0 * (n + 1) as f64);
                    }
                }
            }
            let full = match &self.lift {
                None => v,
                Some((total, kept)) => {
                    let mut full = vec![self.graph.b_max as f64 + 1.0; *total];
                    for (k, &c) in kept.iter().enumerate() {
                        full[c] = v[k];
                    }
                    full
                }
            };
            let sig = region_of(g.state, g.location, &full, self.graph.b_max);
            if let Some(vtx) = self.graph.index_of(&sig) {
                return match self.dec.membership[vtx] {
                    Some(j) => CellClass::Bottom {
                        bscc: j,
                        class: self.dec.bsccs[j].class_of(vtx).unwrap_or(0),
                    },
                    None => CellClass::Transient,
                };
            }
            if n < 2 {
                break;
            }
        }
        CellClass::Unmatched
    }
}

/// One logged absorption iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorptionRecord {
    pub iteration: usize,
    pub reach: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionResult {
    pub reach: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub history: Vec<AbsorptionRecord>,
    /// Normalized first-visit distribution of each bottom component.
    pub entry: Vec<DiscretizedDistribution>,
}

/// Moves mass from the initial points into per-BSCC accumulators until the
/// free mass drops below `eps` or `max_iters` steps were taken.
pub fn transient_absorption(
    product: &Product,
    graph: &RegionGraph,
    dec: &BsccDecomposition,
    grid: &GridSpec,
    eps: f64,
    max_iters: usize,
) -> Result<AbsorptionResult> {
    let k = dec.k();
    let classifier = Classifier {
        graph,
        dec,
        grid: *grid,
        lift: None,
    };
    let mut kernel = DiscretizedKernel::new(product.clone(), *grid);
    let mut reach = vec![0.0; k];
    let mut entry = vec![DiscretizedDistribution::default(); k];
    let mut free_points: Vec<(GridState, f64)> = Vec::new();
    for (z, w) in product.initial_states() {
        let vtx = graph
            .index_of(&region_of(z.state, z.location, &z.valuation, graph.b_max))
            .ok_or_else(|| {
                Error::Internal("initial region missing from the region graph".into())
            })?;
        let row = transitions_from_point(product, grid, z.state, z.location, &z.valuation)?;
        match dec.membership[vtx] {
            Some(j) => {
                reach[j] += w;
                for (g, p) in row {
                    entry[j].add(g, w * p);
                }
            }
            None => free_points.extend(row.into_iter().map(|(g, p)| (g, w * p))),
        }
    }
    let residual0: f64 = 1.0 - reach.iter().sum::<f64>();
    let mut history = vec![AbsorptionRecord {
        iteration: 0,
        reach: reach.clone(),
        residual: residual0.max(0.0),
    }];
    let mut class_cache: HashMap<usize, CellClass> = HashMap::new();
    let mut classify = |kernel: &DiscretizedKernel, i: usize| -> CellClass {
        *class_cache
            .entry(i)
            .or_insert_with(|| classifier.classify(kernel.state(i)))
    };

    let mut free = {
        let ids: Vec<(usize, f64)> = free_points
            .into_iter()
            .map(|(g, w)| (kernel.intern(g), w))
            .collect();
        let mut v = vec![0.0; kernel.len()];
        for (i, w) in ids {
            v[i] += w;
        }
        v
    };
    let mut absorb = |kernel: &DiscretizedKernel, free: &mut Vec<f64>, reach: &mut Vec<f64>| {
        for i in 0..free.len() {
            if free[i] == 0.0 {
                continue;
            }
            if let CellClass::Bottom { bscc, .. } = classify(kernel, i) {
                reach[bscc] += free[i];
                entry[bscc].add(kernel.state(i).clone(), free[i]);
                free[i] = 0.0;
            }
        }
    };
    let mut iterations = 0;
    if free.iter().any(|w| *w != 0.0) {
        iterations = 1;
        absorb(&kernel, &mut free, &mut reach);
        history.push(AbsorptionRecord {
            iteration: 1,
            reach: reach.clone(),
            residual: free.iter().sum(),
        });
    }
    loop {
        let residual: f64 = free.iter().sum();
        if residual < eps || iterations >= max_iters {
            return Ok(AbsorptionResult {
                reach,
                residual,
                iterations,
                history,
                entry: entry
                    .into_iter()
                    .map(DiscretizedDistribution::normalized)
                    .collect(),
            });
        }
        free = kernel.step(&free)?;
        iterations += 1;
        absorb(&kernel, &mut free, &mut reach);
        history.push(AbsorptionRecord {
            iteration: iterations,
            reach: reach.clone(),
            residual: free.iter().sum(),
        });
    }
}

/// Invariant measures `π_0 .. π_{p-1}` of one bottom component.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantMeasure {
    /// Over grid states of the clock-restricted product.
    pub classes: Vec<DiscretizedDistribution>,
    pub restricted: RestrictedDta,
    pub sweeps: usize,
    pub residual: f64,
    /// Largest mass dropped in one sweep because it left the component.
    pub leaked: f64,
    /// `π_0(A_q)` after each sweep, indexed by location.
    pub history: Vec<Vec<f64>>,
}

impl InvariantMeasure {
    /// `(1/p) Σ_k π_k(A_q)` for every location.
    pub fn location_frequencies(&self, locations: usize) -> Vec<f64> {
        let p = self.classes.len() as f64;
        (0..locations)
            .map(|q| self.classes.iter().map(|c| c.location_mass(q)).sum::<f64>() / p)
            .collect()
    }
}

fn project_distribution(
    d: &DiscretizedDistribution,
    restricted: &RestrictedDta,
) -> DiscretizedDistribution {
    let mut out = DiscretizedDistribution::default();
    for (g, w) in &d.weights {
        out.add(
            GridState {
                state: g.state,
                location: g.location,
                cells: restricted.project(&g.cells),
            },
            *w,
        );
    }
    out
}

/// Power iteration of the `p`-fold step restricted to each cyclic class.
#[allow(clippy::too_many_arguments)]
pub fn invariant_measure(
    smp: &SemiMarkovProcess,
    dta: &Dta,
    graph: &RegionGraph,
    dec: &BsccDecomposition,
    j: usize,
    entry: &DiscretizedDistribution,
    grid: &GridSpec,
    tol: f64,
    max_sweeps: usize,
) -> Result<InvariantMeasure> {
    let bscc = &dec.bsccs[j];
    let p = bscc.period;
    let restricted = eliminate_growing_clocks(bscc, graph, dta)?;
    let product = Product::new(smp, &restricted.dta)?;
    let mut kernel = DiscretizedKernel::new(product, *grid);
    let classifier = Classifier {
        graph,
        dec,
        grid: *grid,
        lift: Some((dta.num_clocks(), restricted.kept.clone())),
    };
    let mut cache: HashMap<usize, CellClass> = HashMap::new();
    let mut leaked_max: f64 = 0.0;

    // keeps only mass that stays in class `k` of this component
    let mut restrict = |kernel: &DiscretizedKernel, v: &mut Vec<f64>, k: Option<usize>| -> f64 {
        let mut dropped = 0.0;
        for i in 0..v.len() {
            if v[i] == 0.0 {
                continue;
            }
            let c = *cache
                .entry(i)
                .or_insert_with(|| classifier.classify(kernel.state(i)));
            let keep = match c {
                CellClass::Bottom { bscc: b, class } => b == j && k.is_none_or(|k| k == class),
                _ => false,
            };
            if !keep {
                dropped += v[i];
                v[i] = 0.0;
            }
        }
        dropped
    };
    let normalize = |v: &mut Vec<f64>| -> f64 {
        let t: f64 = v.iter().sum();
        if t > 0.0 {
            v.iter_mut().for_each(|w| *w /= t);
        }
        t
    };

    let mut cur = kernel.from_distribution(&project_distribution(entry, &restricted));
    restrict(&kernel, &mut cur, None);
    if normalize(&mut cur) == 0.0 {
        return Err(Error::Internal(format!(
            "bottom component {j} has an empty entry distribution"
        )));
    }
    let mut nu = vec![0.0; cur.len()];
    for m in 0..p {
        let mut part = cur.clone();
        restrict(&kernel, &mut part, Some(0));
        nu.resize(part.len().max(nu.len()), 0.0);
        for (a, b) in nu.iter_mut().zip(part) {
            *a += b;
        }
        if m + 1 < p {
            cur = kernel.step(&cur)?;
            leaked_max = leaked_max.max(restrict(&kernel, &mut cur, None));
        }
    }
    if normalize(&mut nu) == 0.0 {
        return Err(Error::Internal(format!(
            "class 0 of bottom component {j} received no mass"
        )));
    }

    let nq = restricted.dta.num_locations();
    let loc_mass = |kernel: &DiscretizedKernel, v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; nq];
        for (i, &w) in v.iter().enumerate() {
            out[kernel.state(i).location] += w;
        }
        out
    };
    let mut history = Vec::new();
    let mut residual = f64::INFINITY;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        let mut next = nu.clone();
        for _ in 0..p {
            next = kernel.step(&next)?;
        }
        let dropped = restrict(&kernel, &mut next, Some(0));
        let kept = normalize(&mut next);
        leaked_max = leaked_max.max(dropped / (dropped + kept).max(f64::MIN_POSITIVE));
        nu.resize(next.len(), 0.0);
        residual = nu.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        nu = next;
        sweeps += 1;
        history.push(loc_mass(&kernel, &nu));
        if residual < tol {
            break;
        }
    }
    if !(residual < tol) {
        return Err(Error::ConvergenceFailure { residual });
    }
    let mut classes = vec![kernel.to_distribution(&nu)];
    let mut v = nu;
    for k in 1..p {
        v = kernel.step(&v)?;
        restrict(&kernel, &mut v, Some(k));
        normalize(&mut v);
        classes.push(kernel.to_distribution(&v));
    }
    Ok(InvariantMeasure {
        classes,
        restricted,
        sweeps,
        residual,
        leaked: leaked_max,
        history,
    })
}

/// `P^m(z, G)`: one exact step from `z`, then `m - 1` grid steps; the grid
/// mass of a cell counts toward `G` by the fraction of the cell inside it.
pub fn m_step_probability(
    product: &Product,
    grid: &GridSpec,
    z: &ProductState,
    m: usize,
    g: &GeneratorSet,
) -> Result<f64> {
    if m == 0 {
        return Ok(if g.contains(z) { 1.0 } else { 0.0 });
    }
    if m == 1 {
        return product.kernel_on_generator(z, g);
    }
    let mut dist = DiscretizedDistribution::default();
    for (s, w) in transitions_from_point(product, grid, z.state, z.location, &z.valuation)? {
        dist.add(s, w);
    }
    for _ in 1..m - 1 {
        dist = discretized_step(&dist, product, grid)?;
    }
    // the last step is exact from each cell representative
    let mut total = 0.0;
    for (cell, w) in &dist.weights {
        let rep = ProductState {
            state: cell.state,
            location: cell.location,
            valuation: cell.representative(grid),
        };
        total += w * product.kernel_on_generator(&rep, g)?;
    }
    Ok(total)
}

/// Reachability bound `(1 − (p_min·c_d/c)^c)^⌊i/c⌋` with `c = 4|V|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReachBound {
    pub bound: f64,
    pub c: u64,
    pub p_bound: f64,
}

pub fn compute_reach_bound(i: u64, vertices: usize, p_min: f64, c_d: f64) -> Result<ReachBound> {
    if i == 0 || vertices == 0 {
        return Err(invalid("reach bound needs i >= 1 and a nonempty graph"));
    }
    if !(p_min > 0.0 && p_min <= 1.0 && c_d > 0.0 && c_d <= 1.0) {
        return Err(invalid("reach bound needs p_min and c_d in (0, 1]"));
    }
    let c = 4 * vertices as u64;
    let p_bound = (p_min * c_d / c as f64).powf(c as f64);
    Ok(ReachBound {
        bound: decay(p_bound, i / c),
        c,
        p_bound,
    })
}

fn decay(base_gap: f64, exponent: u64) -> f64 {
    if exponent == 0 || base_gap == 0.0 {
        return 1.0;
    }
    ((exponent as f64) * (-base_gap).ln_1p()).exp()
}

/// Ergodicity bound `(1 − (p_min·c_d/r)^r)^⌊i/r⌋` with `r = ⌊|V|^{4 ln|V|}⌋`,
/// where `i` counts `p`-fold steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErgodicityBound {
    pub bound: f64,
    pub r: u64,
    /// `r` exceeded `u64` and was saturated; the bound is then reported as 1.
    pub saturated: bool,
    pub steps: u64,
}

pub fn ergodicity_r(vertices: usize) -> (u64, bool) {
    let v = vertices as f64;
    let r = (4.0 * v.ln() * v.ln()).exp();
    if r >= u64::MAX as f64 {
        (u64::MAX, true)
    } else {
        // guard against exp/ln rounding just below an exact integer
        let f = r.floor();
        let f = if (r - f) > 1.0 - 1e-9 { f + 1.0 } else { f };
        (f as u64, false)
    }
}

pub fn compute_ergodicity_bound(
    i: u64,
    vertices: usize,
    p_min: f64,
    c_d: f64,
    period: usize,
) -> Result<ErgodicityBound> {
    if i == 0 || vertices == 0 || period == 0 {
        return Err(invalid(
            "ergodicity bound needs i >= 1, a nonempty graph and a positive period",
        ));
    }
    if !(p_min > 0.0 && p_min <= 1.0 && c_d > 0.0 && c_d <= 1.0) {
        return Err(invalid("ergodicity bound needs p_min and c_d in (0, 1]"));
    }
    let (r, saturated) = ergodicity_r(vertices);
    let steps = i.saturating_mul(period as u64);
    if saturated {
        return Ok(ErgodicityBound {
            bound: 1.0,
            r,
            saturated,
            steps,
        });
    }
    let gap = (p_min * c_d / r as f64).powf(r as f64);
    Ok(ErgodicityBound {
        bound: decay(gap, i / r),
        r,
        saturated,
        steps,
    })
}

/// Smallest positive density value on `[0, B_max]` or positive tail mass
/// beyond `B_max`, over all delay densities.
pub fn c_d_of_model(smp: &SemiMarkovProcess, b_max: u32) -> f64 {
    let b = b_max as f64;
    let mut c = f64::INFINITY;
    for d in smp.densities() {
        if let Some(v) = d.min_value_on(0.0, b) {
            if v > 0.0 {
                c = c.min(v);
            }
        }
        let tail = d.survival(b);
        if tail > 0.0 {
            c = c.min(tail);
        }
    }
    if c.is_finite() {
        c.min(1.0)
    } else {
        1.0
    }
}

/// Numerical settings for [`analyze`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalysisOptions {
    pub cells_per_unit: u32,
    pub eps: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            cells_per_unit: 8,
            eps: 1e-6,
            tol: 1e-9,
            max_iters: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BsccReport {
    pub reach: f64,
    pub residual: f64,
    pub period: usize,
    pub regions: usize,
    pub growing_clocks: Vec<String>,
    #[serde(rename = "D")]
    pub d: BTreeMap<String, f64>,
    #[serde(rename = "C")]
    pub c: BTreeMap<String, f64>,
    pub sweeps: usize,
    pub leaked: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub vertices: usize,
    pub p_min: f64,
    pub c_d: f64,
    pub c: u64,
    pub p_bound: f64,
    pub reach_bound: f64,
    pub r: u64,
    pub r_saturated: bool,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    pub cells_per_unit: u32,
    pub cap: u32,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationReport {
    pub absorption: usize,
    pub invariant: Vec<usize>,
    pub timed_absorption: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub k: usize,
    pub bsccs: Vec<BsccReport>,
    pub residual: f64,
    pub bounds: BoundsReport,
    pub grid: GridReport,
    pub iterations: IterationReport,
    pub converged: bool,
    pub diagnostics: Vec<String>,
    #[serde(skip)]
    pub absorption_history: Vec<AbsorptionRecord>,
    #[serde(skip)]
    pub invariant_history: Vec<Vec<Vec<f64>>>,
}

fn sig12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_value(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(sig12(x)) {
                    *n = r;
                }
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(round_value),
        serde_json::Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to 12 significant digits.
pub fn to_report_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("report types serialize");
    round_value(&mut v);
    serde_json::to_string_pretty(&v).expect("value serializes") + "\n"
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        to_report_json(self)
    }
}

/// Frequencies of one bottom component together with the intermediate results.
struct BottomAnalysis {
    graph: RegionGraph,
    dec: BsccDecomposition,
    absorption: AbsorptionResult,
    measures: Vec<Result<InvariantMeasure>>,
}

fn analyze_chain(
    smp: &SemiMarkovProcess,
    dta: &Dta,
    opts: &AnalysisOptions,
) -> Result<BottomAnalysis> {
    let product = Product::new(smp, dta)?;
    let graph = build_region_graph(&product)?;
    let dec = bscc_decompose(&graph);
    let grid = GridSpec::new(opts.cells_per_unit, dta.b_max())?;
    let absorption = transient_absorption(&product, &graph, &dec, &grid, opts.eps, opts.max_iters)?;
    let measures = (0..dec.k())
        .map(|j| {
            if absorption.entry[j].weights.is_empty() {
                return Err(Error::Internal(format!(
                    "bottom component {j} was never entered"
                )));
            }
            invariant_measure(
                smp,
                dta,
                &graph,
                &dec,
                j,
                &absorption.entry[j],
                &grid,
                opts.tol,
                opts.max_iters,
            )
        })
        .collect();
    Ok(BottomAnalysis {
        graph,
        dec,
        absorption,
        measures,
    })
}

/// The automaton `S × A` over state names, and the SMP relabeled to read them.
pub fn state_labeled_pair(smp: &SemiMarkovProcess, dta: &Dta) -> Result<(SemiMarkovProcess, Dta)> {
    let names = smp.state_names().to_vec();
    let over = dta.over_states(&names, smp.labels())?;
    let sa = over.state_labeled(&names)?;
    let relabeled = smp.clone().with_labels(names)?;
    Ok((relabeled, sa))
}

fn sa_location(dta: &Dta, s: usize, q: usize) -> usize {
    1 + s * dta.num_locations() + q
}

/// `C_q = Σ_s E_s D_(s,q) / Σ_p Σ_s E_s D_(s,p)` from frequencies of `S × A`.
pub fn timed_from_state_labeled(d_sa: &[f64], expected: &[f64], dta: &Dta) -> Result<Vec<f64>> {
    if d_sa.len() != 1 + expected.len() * dta.num_locations() {
        return Err(invalid(
            "state-labeled frequencies do not match the state and location counts",
        ));
    }
    let nq = dta.num_locations();
    let mut num = vec![0.0; nq];
    for (s, e) in expected.iter().enumerate() {
        for (q, n) in num.iter_mut().enumerate() {
            *n += e * d_sa[sa_location(dta, s, q)];
        }
    }
    let denom: f64 = num.iter().sum();
    if !(denom > 0.0) {
        return Err(Error::DegenerateModel(
            "all expected sojourn times vanish on the bottom component".into(),
        ));
    }
    Ok(num.into_iter().map(|n| n / denom).collect())
}

/// The full pipeline from region graph to bounded frequency estimates.
pub fn analyze(
    smp: &SemiMarkovProcess,
    dta: &Dta,
    opts: &AnalysisOptions,
) -> Result<AnalysisReport> {
    let mut diagnostics = Vec::new();
    let main = analyze_chain(smp, dta, opts)?;
    let k = main.dec.k();
    let names = dta.locations();
    let to_map = |v: &[f64], names: &[String]| -> BTreeMap<String, f64> {
        names.iter().cloned().zip(v.iter().copied()).collect()
    };

    // timed frequencies through S × A
    let expected = smp.expected_delays().per_state;
    let mut timed: Vec<Option<Vec<f64>>> = vec![None; k];
    let mut timed_iters = 0;
    match state_labeled_pair(smp, dta)
        .and_then(|(m_sa, sa)| Ok((analyze_chain(&m_sa, &sa, opts)?, sa)))
    {
        Ok((sa_an, sa)) => {
            timed_iters = sa_an.absorption.iterations;
            for (jj, b) in sa_an.dec.bsccs.iter().enumerate() {
                let r = &sa_an.graph.vertices[b.vertices[0]];
                let location = match r.location {
                    0 => dta.initial(),
                    l => (l - 1) % dta.num_locations(),
                };
                let mut sig = r.clone();
                sig.location = location;
                let Some(j) = main
                    .graph
                    .index_of(&sig)
                    .and_then(|v| main.dec.membership[v])
                else {
                    diagnostics.push(format!("state-labeled component {jj} has no counterpart"));
                    continue;
                };
                match &sa_an.measures[jj] {
                    Ok(inv) => {
                        let d_sa = inv.location_frequencies(sa.num_locations());
                        if timed[j].is_some() {
                            diagnostics.push(format!(
                                "component {j} has several state-labeled counterparts"
                            ));
                            continue;
                        }
                        match timed_from_state_labeled(&d_sa, &expected, dta) {
                            Ok(c) => timed[j] = Some(c),
                            Err(e) => {
                                diagnostics.push(format!("timed measure of component {j}: {e}"))
                            }
                        }
                    }
                    Err(e) => diagnostics.push(format!("state-labeled component {jj}: {e}")),
                }
            }
        }
        Err(e) => diagnostics.push(format!("timed measure unavailable: {e}")),
    }

    let vertices = main.graph.len();
    let p_min = smp.min_positive_prob();
    let c_d = c_d_of_model(smp, dta.b_max());
    let iters = main.absorption.iterations.max(1) as u64;
    let rb = compute_reach_bound(iters, vertices, p_min, c_d)?;
    let mut converged = main.absorption.residual < opts.eps;
    let mut bsccs = Vec::with_capacity(k);
    let mut inv_iters = Vec::with_capacity(k);
    let mut epsilon: f64 = 0.0;
    let r_report = ergodicity_r(vertices);
    let mut invariant_history = Vec::with_capacity(k);
    for (j, b) in main.dec.bsccs.iter().enumerate() {
        let (d, sweeps, leaked, ok) = match &main.measures[j] {
            Ok(inv) => (
                to_map(&inv.location_frequencies(dta.num_locations()), names),
                inv.sweeps,
                inv.leaked,
                true,
            ),
            Err(e) => {
                diagnostics.push(format!("invariant measure of component {j}: {e}"));
                (BTreeMap::new(), 0, 0.0, false)
            }
        };
        if let Ok(inv) = &main.measures[j] {
            let eb =
                compute_ergodicity_bound(inv.sweeps.max(1) as u64, vertices, p_min, c_d, b.period)?;
            epsilon = epsilon.max(eb.bound);
            invariant_history.push(inv.history.clone());
            if inv.leaked > 1e-6 {
                diagnostics.push(format!(
                    "component {j} leaked {:.3e} of its mass under the grid",
                    inv.leaked
                ));
            }
        } else {
            invariant_history.push(Vec::new());
        }
        let c = match &timed[j] {
            Some(c) => to_map(c, names),
            None => {
                converged = false;
                BTreeMap::new()
            }
        };
        converged &= ok;
        inv_iters.push(sweeps);
        bsccs.push(BsccReport {
            reach: main.absorption.reach[j],
            residual: main.absorption.residual,
            period: b.period,
            regions: b.vertices.len(),
            growing_clocks: b
                .growing_clocks
                .iter()
                .map(|&c| dta.clocks()[c].clone())
                .collect(),
            d,
            c,
            sweeps,
            leaked,
            converged: ok,
        });
    }
    if k == 0 {
        converged = false;
        diagnostics.push("region graph has no bottom component".into());
    }
    Ok(AnalysisReport {
        k,
        bsccs,
        residual: main.absorption.residual,
        bounds: BoundsReport {
            vertices,
            p_min,
            c_d,
            c: rb.c,
            p_bound: rb.p_bound,
            reach_bound: rb.bound,
            r: r_report.0,
            r_saturated: r_report.1,
            epsilon: if k == 0 { 1.0 } else { epsilon },
        },
        grid: GridReport {
            cells_per_unit: opts.cells_per_unit,
            cap: dta.b_max(),
            note: format!(
                "midpoint representatives on cells of width 1/{}; discretization bias is O(1/{})",
                opts.cells_per_unit, opts.cells_per_unit
            ),
        },
        iterations: IterationReport {
            absorption: main.absorption.iterations,
            invariant: inv_iters,
            timed_absorption: timed_iters,
        },
        converged,
        diagnostics,
        absorption_history: main.absorption.history,
        invariant_history,
    })
}
