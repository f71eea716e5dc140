//! The product chain `M × A` over states `(s, q, ν)`.
//!
//! One product step reads the current SMP state with the automaton (possibly
//! resetting clocks), then lets the sampled transition delay elapse on every
//! clock. Clock values are kept exactly; no capping happens here.

use crate::dta::Dta;
use crate::error::{invalid, Error, Result};
use crate::scalar::ClockScalar;
use crate::smp::SemiMarkovProcess;

/// A product state `(s, q, ν)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState<T = f64> {
    pub state: usize,
    pub location: usize,
    pub valuation: Vec<T>,
}

/// Outcome of the automaton step that reads the current SMP state.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadPhaseResult<T = f64> {
    pub location: usize,
    pub valuation: Vec<T>,
    pub resets: Vec<usize>,
}

/// A generator set `{s'} × {q'} × I_1 × ... × I_n`; intervals are closed and
/// `hi` may be `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    pub state: usize,
    pub location: usize,
    pub intervals: Vec<(f64, f64)>,
}

impl GeneratorSet {
    pub fn new(state: usize, location: usize, intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(lo, hi) in &intervals {
            if !(lo >= 0.0) || !(lo <= hi) {
                return Err(invalid(format!(
                    "ill-formed generator interval [{lo},{hi}]"
                )));
            }
        }
        Ok(GeneratorSet {
            state,
            location,
            intervals,
        })
    }

    /// Every clock unconstrained.
    pub fn full(state: usize, location: usize, clocks: usize) -> Self {
        GeneratorSet {
            state,
            location,
            intervals: vec![(0.0, f64::INFINITY); clocks],
        }
    }

    pub fn contains(&self, z: &ProductState) -> bool {
        z.state == self.state
            && z.location == self.location
            && z.valuation
                .iter()
                .zip(&self.intervals)
                .all(|(v, (lo, hi))| v >= lo && v <= hi)
    }
}

/// A finite SMP run `s0 t0 s1 t1 ... s_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmpRun {
    pub states: Vec<usize>,
    pub delays: Vec<f64>,
}

impl SmpRun {
    pub fn new(states: Vec<usize>, delays: Vec<f64>) -> Result<Self> {
        if states.is_empty() || states.len() != delays.len() + 1 {
            return Err(invalid(
                "run must alternate states and delays and end in a state",
            ));
        }
        if delays.iter().any(|t| !(*t >= 0.0)) {
            return Err(invalid("run delays must be nonnegative"));
        }
        Ok(SmpRun { states, delays })
    }
}

/// An SMP paired with an observing automaton.
#[derive(Debug, Clone)]
pub struct Product<'a> {
    pub smp: &'a SemiMarkovProcess,
    pub dta: &'a Dta,
    letter_of_state: Vec<usize>,
}

impl<'a> Product<'a> {
    pub fn new(smp: &'a SemiMarkovProcess, dta: &'a Dta) -> Result<Self> {
        let letter_of_state = (0..smp.num_states())
            .map(|s| {
                let label = smp.label(s);
                dta.letter_index(label).ok_or_else(|| {
                    invalid(format!(
                        "state label `{label}` is not in the automaton alphabet"
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Product {
            smp,
            dta,
            letter_of_state,
        })
    }

    pub fn num_clocks(&self) -> usize {
        self.dta.num_clocks()
    }

    pub fn letter(&self, state: usize) -> usize {
        self.letter_of_state[state]
    }

    /// Product states `(s, q0, 0)` weighted by the initial distribution.
    pub fn initial_states(&self) -> Vec<(ProductState, f64)> {
        self.smp
            .initial()
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(s, p)| {
                (
                    ProductState {
                        state: s,
                        location: self.dta.initial(),
                        valuation: vec![0.0; self.num_clocks()],
                    },
                    *p,
                )
            })
            .collect()
    }

    /// The automaton reads the letter of `state` from `(location, valuation)`.
    pub fn read_phase<T: ClockScalar>(
        &self,
        state: usize,
        location: usize,
        valuation: &[T],
    ) -> Result<ReadPhaseResult<T>> {
        let letter = self.letter_of_state[state];
        let edge = self
            .dta
            .enabled_edge(location, letter, valuation)
            .ok_or_else(|| Error::TotalityViolation {
                location: self.dta.locations()[location].clone(),
                letter: self.dta.alphabet()[letter].clone(),
            })?;
        let mut v = valuation.to_vec();
        for &c in &edge.resets {
            v[c] = T::zero();
        }
        Ok(ReadPhaseResult {
            location: edge.target,
            valuation: v,
            resets: edge.resets.clone(),
        })
    }

    /// `P(z, {s'} × {q'} × I)`: zero unless `q'` is the post-read location,
    /// otherwise `P(s)(s')` times the delay mass of `{t : ν̄ + t ∈ I}`.
    pub fn kernel_on_generator(&self, z: &ProductState, g: &GeneratorSet) -> Result<f64> {
        if g.intervals.len() != self.num_clocks() {
            return Err(invalid("generator box dimension differs from clock count"));
        }
        let read = self.read_phase(z.state, z.location, &z.valuation)?;
        if read.location != g.location {
            return Ok(0.0);
        }
        let prob = self.smp.prob(z.state, g.state);
        if prob == 0.0 {
            return Ok(0.0);
        }
        let density = self
            .smp
            .delay(z.state, g.state)
            .ok_or_else(|| invalid("positive-probability transition without delay density"))?;
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        for (v, (a, b)) in read.valuation.iter().zip(&g.intervals) {
            lo = lo.max(a - v);
            hi = hi.min(b - v);
        }
        if lo > hi {
            return Ok(0.0);
        }
        Ok(prob * density.mass_between(lo, hi))
    }

    /// The run correspondence: `z_0 = (s0, q0, 0)` and
    /// `z_{i+1} = (s_{i+1}, q̄_i, ν̄_i + t_i)`.
    pub fn project_run(&self, run: &SmpRun) -> Result<Vec<ProductState>> {
        if run.states.is_empty() || run.states.len() != run.delays.len() + 1 {
            return Err(invalid(
                "run must alternate states and delays and end in a state",
            ));
        }
        if run.states.iter().any(|s| *s >= self.smp.num_states()) {
            return Err(invalid("run references unknown state"));
        }
        let mut z = ProductState {
            state: run.states[0],
            location: self.dta.initial(),
            valuation: vec![0.0; self.num_clocks()],
        };
        let mut out = Vec::with_capacity(run.states.len());
        out.push(z.clone());
        for (i, &t) in run.delays.iter().enumerate() {
            z = self.step(&z, run.states[i + 1], t)?;
            out.push(z.clone());
        }
        Ok(out)
    }

    /// One concrete product step to `next_state` with delay `t`.
    pub fn step(&self, z: &ProductState, next_state: usize, t: f64) -> Result<ProductState> {
        let read = self.read_phase(z.state, z.location, &z.valuation)?;
        Ok(ProductState {
            state: next_state,
            location: read.location,
            valuation: read.valuation.iter().map(|v| v + t).collect(),
        })
    }
}

/// Discrete location frequencies of a projected run, counting `z_2 .. z_{n+1}`
/// (the locations entered by reading `s_1 .. s_n`).
pub fn projected_discrete_frequency(states: &[ProductState], locations: usize) -> Result<Vec<f64>> {
    if states.len() < 3 {
        return Err(invalid(
            "projected frequency needs at least three product states",
        ));
    }
    let mut out = vec![0.0; locations];
    for z in &states[2..] {
        out[z.location] += 1.0;
    }
    let n = (states.len() - 2) as f64;
    out.iter_mut().for_each(|v| *v /= n);
    Ok(out)
}
