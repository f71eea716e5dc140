//! Semi-Markov processes and their delay densities.
//!
//! Three density families are supported, all with closed-form CDF, mean and
//! quantile:
//!
//! * `Uniform` on `[lo, hi]`,
//! * `PiecewiseConstant` on `[lo, hi]` with rational breakpoints and strictly
//!   positive values on every piece,
//! * `ShiftedTail`, an exponential tail `rate * exp(-rate (t - lo))` on `[lo, inf)`.
//!
//! Support endpoints are natural numbers. An infinite upper end is `None`.

use crate::error::{invalid, Error, Result};
use crate::scalar::Rational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::fmt;

const MASS_TOL: f64 = 1e-12;

/// One constant piece `[start, end)` of a piecewise-constant density.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub start: Rational,
    pub end: Rational,
    pub value: f64,
}

impl Piece {
    fn start_f(&self) -> f64 {
        self.start.to_f64().unwrap_or(f64::NAN)
    }
    fn end_f(&self) -> f64 {
        self.end.to_f64().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    Uniform,
    PiecewiseConstant,
    ShiftedTail,
}

/// A delay density satisfying the bounded-below-on-support assumption.
#[derive(Debug, Clone, PartialEq)]
pub enum DelayDensity {
    Uniform {
        lo: u32,
        hi: u32,
    },
    PiecewiseConstant {
        lo: u32,
        hi: u32,
        pieces: Vec<Piece>,
    },
    ShiftedTail {
        lo: u32,
        rate: f64,
    },
}

impl DelayDensity {
    pub fn uniform(lo: u32, hi: u32) -> Result<Self> {
        if lo >= hi {
            return Err(invalid(format!("uniform support [{lo},{hi}] is empty")));
        }
        Ok(DelayDensity::Uniform { lo, hi })
    }

    /// Pieces must tile `[lo, hi]` contiguously with positive values and unit mass.
    pub fn piecewise(lo: u32, hi: u32, pieces: Vec<Piece>) -> Result<Self> {
        if lo >= hi {
            return Err(invalid(format!("piecewise support [{lo},{hi}] is empty")));
        }
        if pieces.is_empty() {
            return Err(invalid("piecewise density needs at least one piece"));
        }
        let mut cursor = Rational::from_integer(lo as i64);
        let mut mass = 0.0;
        for (i, p) in pieces.iter().enumerate() {
            if p.start != cursor {
                return Err(invalid(format!(
                    "piece {i} starts at {} but previous piece ends at {cursor}",
                    p.start
                )));
            }
            if p.end <= p.start {
                return Err(invalid(format!("piece {i} has empty interval")));
            }
            if !(p.value > 0.0) || !p.value.is_finite() {
                return Err(invalid(format!(
                    "piece {i} value {} must be positive",
                    p.value
                )));
            }
            mass += p.value * (p.end_f() - p.start_f());
            cursor = p.end;
        }
        if cursor != Rational::from_integer(hi as i64) {
            return Err(invalid(format!(
                "pieces end at {cursor}, support ends at {hi}"
            )));
        }
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(invalid(format!("piecewise density has total mass {mass}")));
        }
        Ok(DelayDensity::PiecewiseConstant { lo, hi, pieces })
    }

    pub fn shifted_tail(lo: u32, rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(invalid(format!("tail rate {rate} must be positive")));
        }
        Ok(DelayDensity::ShiftedTail { lo, rate })
    }

    pub fn kind(&self) -> DensityKind {
        match self {
            DelayDensity::Uniform { .. } => DensityKind::Uniform,
            DelayDensity::PiecewiseConstant { .. } => DensityKind::PiecewiseConstant,
            DelayDensity::ShiftedTail { .. } => DensityKind::ShiftedTail,
        }
    }

    /// Support `[lo, hi]`; `hi == None` means `+inf`.
    pub fn support(&self) -> (u32, Option<u32>) {
        match *self {
            DelayDensity::Uniform { lo, hi } => (lo, Some(hi)),
            DelayDensity::PiecewiseConstant { lo, hi, .. } => (lo, Some(hi)),
            DelayDensity::ShiftedTail { lo, .. } => (lo, None),
        }
    }

    pub fn support_f64(&self) -> (f64, f64) {
        let (lo, hi) = self.support();
        (lo as f64, hi.map_or(f64::INFINITY, |h| h as f64))
    }

    /// Density value at `t`; zero outside the support.
    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.support_f64();
        if !(t >= lo && t <= hi) {
            return 0.0;
        }
        match self {
            DelayDensity::Uniform { .. } => 1.0 / (hi - lo),
            DelayDensity::PiecewiseConstant { pieces, .. } => {
                let last = pieces.len() - 1;
                pieces
                    .iter()
                    .enumerate()
                    .find(|(i, p)| t >= p.start_f() && (t < p.end_f() || *i == last))
                    .map_or(0.0, |(_, p)| p.value)
            }
            DelayDensity::ShiftedTail { rate, .. } => rate * (-rate * (t - lo)).exp(),
        }
    }

    /// Cumulative distribution function.
    pub fn cdf(&self, t: f64) -> f64 {
        let (lo, hi) = self.support_f64();
        if t <= lo {
            return 0.0;
        }
        if t >= hi {
            return 1.0;
        }
        match self {
            DelayDensity::Uniform { .. } => (t - lo) / (hi - lo),
            DelayDensity::PiecewiseConstant { pieces, .. } => {
                let mut acc = 0.0;
                for p in pieces {
                    let (a, b) = (p.start_f(), p.end_f());
                    if t >= b {
                        acc += p.value * (b - a);
                    } else {
                        if t > a {
                            acc += p.value * (t - a);
                        }
                        break;
                    }
                }
                acc.min(1.0)
            }
            DelayDensity::ShiftedTail { rate, .. } => -(-rate * (t - lo)).exp_m1(),
        }
    }

    /// Survival function `1 - cdf(t)`, computed without cancellation for the tail kind.
    pub fn survival(&self, t: f64) -> f64 {
        match *self {
            DelayDensity::ShiftedTail { lo, rate } if t > lo as f64 => {
                (-rate * (t - lo as f64)).exp()
            }
            _ => 1.0 - self.cdf(t),
        }
    }

    /// Exact integral of the density over `[a, b]`; `b` may be `+inf`.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        if a.is_nan() || b.is_nan() || a > b {
            return Err(invalid(format!("reversed integration interval [{a}, {b}]")));
        }
        Ok(self.mass_between(a, b))
    }

    /// Unchecked variant of [`integrate`](Self::integrate) for callers that
    /// already ordered the interval; returns 0 for `a >= b`.
    pub(crate) fn mass_between(&self, a: f64, b: f64) -> f64 {
        if !(a < b) {
            return 0.0;
        }
        let (lo, _) = self.support_f64();
        match self {
            DelayDensity::ShiftedTail { .. } => {
                let a = a.max(lo);
                if a >= b {
                    0.0
                } else {
                    (self.survival(a) - self.survival(b)).max(0.0)
                }
            }
            _ => (self.cdf(b) - self.cdf(a)).max(0.0),
        }
    }

    /// First moment, in closed form.
    pub fn mean(&self) -> f64 {
        match self {
            DelayDensity::Uniform { lo, hi } => (*lo as f64 + *hi as f64) / 2.0,
            DelayDensity::PiecewiseConstant { pieces, .. } => pieces
                .iter()
                .map(|p| {
                    let (a, b) = (p.start_f(), p.end_f());
                    p.value * (b * b - a * a) / 2.0
                })
                .sum(),
            DelayDensity::ShiftedTail { lo, rate } => *lo as f64 + 1.0 / rate,
        }
    }

    /// Smallest `t` with `cdf(t) >= p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("quantile level {p} outside [0,1]")));
        }
        let (lo, hi) = self.support_f64();
        if p == 0.0 {
            return Ok(lo);
        }
        Ok(match self {
            DelayDensity::Uniform { .. } => lo + p * (hi - lo),
            DelayDensity::PiecewiseConstant { pieces, .. } => {
                let mut acc = 0.0;
                let mut out = hi;
                for p_i in pieces {
                    let (a, b) = (p_i.start_f(), p_i.end_f());
                    let m = p_i.value * (b - a);
                    if acc + m >= p {
                        out = (a + (p - acc) / p_i.value).min(b);
                        break;
                    }
                    acc += m;
                }
                out
            }
            DelayDensity::ShiftedTail { rate, .. } => {
                if p == 1.0 {
                    f64::INFINITY
                } else {
                    lo - (-p).ln_1p() / rate
                }
            }
        })
    }

    /// Smallest density value taken on `[a, b] ∩ support`, or `None` when
    /// the intersection is empty.
    pub fn min_value_on(&self, a: f64, b: f64) -> Option<f64> {
        let (lo, hi) = self.support_f64();
        let (a, b) = (a.max(lo), b.min(hi));
        if a > b {
            return None;
        }
        match self {
            DelayDensity::Uniform { .. } => Some(1.0 / (hi - lo)),
            DelayDensity::PiecewiseConstant { pieces, .. } => pieces
                .iter()
                .filter(|p| p.start_f() <= b && p.end_f() >= a)
                .map(|p| p.value)
                .reduce(f64::min),
            DelayDensity::ShiftedTail { .. } => Some(self.eval(b)),
        }
    }
}

/// One outgoing transition of an SMP state.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub target: usize,
    pub prob: f64,
    pub delay: Option<DelayDensity>,
}

/// A semi-Markov process `(S, P, D, alpha0)` with a state labelling.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiMarkovProcess {
    states: Vec<String>,
    transitions: Vec<Vec<Transition>>,
    initial: Vec<f64>,
    labels: Vec<String>,
}

/// A violated well-formedness condition of a [`SemiMarkovProcess`].
#[derive(Debug, Clone, PartialEq)]
pub enum SmpViolation {
    RowSum { state: String, sum: f64 },
    NegativeProbability { from: String, to: String, prob: f64 },
    MissingDelay { from: String, to: String },
    InitialSum { sum: f64 },
    NegativeInitial { state: String },
    NoStates,
}

impl fmt::Display for SmpViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmpViolation::RowSum { state, sum } => {
                write!(
                    f,
                    "transition probabilities of state `{state}` sum to {sum}"
                )
            }
            SmpViolation::NegativeProbability { from, to, prob } => {
                write!(
                    f,
                    "transition ({from},{to}) has negative probability {prob}"
                )
            }
            SmpViolation::MissingDelay { from, to } => {
                write!(
                    f,
                    "transition ({from},{to}) has positive probability but no delay density"
                )
            }
            SmpViolation::InitialSum { sum } => write!(f, "initial distribution sums to {sum}"),
            SmpViolation::NegativeInitial { state } => {
                write!(f, "initial probability of `{state}` is negative")
            }
            SmpViolation::NoStates => write!(f, "model has no states"),
        }
    }
}

impl SemiMarkovProcess {
    /// Creates a process with no transitions; the initial distribution and
    /// labels default to "all mass on the first state" and the identity.
    pub fn new<S: Into<String>>(states: impl IntoIterator<Item = S>) -> Self {
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        let n = states.len();
        let mut initial = vec![0.0; n];
        if n > 0 {
            initial[0] = 1.0;
        }
        SemiMarkovProcess {
            labels: states.clone(),
            transitions: vec![Vec::new(); n],
            initial,
            states,
        }
    }

    pub fn with_initial(mut self, initial: Vec<f64>) -> Result<Self> {
        if initial.len() != self.states.len() {
            return Err(invalid(
                "initial distribution length differs from state count",
            ));
        }
        self.initial = initial;
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.states.len() {
            return Err(invalid("label list length differs from state count"));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn add_transition(
        &mut self,
        from: usize,
        to: usize,
        prob: f64,
        delay: Option<DelayDensity>,
    ) -> Result<()> {
        let n = self.states.len();
        if from >= n || to >= n {
            return Err(invalid(format!(
                "transition ({from},{to}) references unknown state"
            )));
        }
        self.transitions[from].push(Transition {
            target: to,
            prob,
            delay,
        });
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.states[s]
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn label(&self, s: usize) -> &str {
        &self.labels[s]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn transitions(&self, s: usize) -> &[Transition] {
        &self.transitions[s]
    }

    /// Transitions of `s` with positive probability, paired with their density.
    pub fn successors(&self, s: usize) -> impl Iterator<Item = (usize, f64, &DelayDensity)> + '_ {
        self.transitions[s]
            .iter()
            .filter(|t| t.prob > 0.0)
            .filter_map(|t| t.delay.as_ref().map(|d| (t.target, t.prob, d)))
    }

    /// `P(s)(s')`, summing duplicate entries.
    pub fn prob(&self, s: usize, target: usize) -> f64 {
        self.transitions[s]
            .iter()
            .filter(|t| t.target == target)
            .map(|t| t.prob)
            .sum()
    }

    pub fn delay(&self, s: usize, target: usize) -> Option<&DelayDensity> {
        self.transitions[s]
            .iter()
            .find(|t| t.target == target && t.prob > 0.0)
            .and_then(|t| t.delay.as_ref())
    }

    /// Every distinct density used by a positive-probability transition.
    pub fn densities(&self) -> Vec<&DelayDensity> {
        let mut out: Vec<&DelayDensity> = Vec::new();
        for s in 0..self.num_states() {
            for (_, _, d) in self.successors(s) {
                if !out.contains(&d) {
                    out.push(d);
                }
            }
        }
        out
    }

    /// Smallest positive transition probability.
    pub fn min_positive_prob(&self) -> f64 {
        self.transitions
            .iter()
            .flatten()
            .map(|t| t.prob)
            .filter(|p| *p > 0.0)
            .fold(1.0, f64::min)
    }

    /// Checks the well-formedness conditions; an empty list means valid.
    pub fn validate(&self) -> Vec<SmpViolation> {
        let mut out = Vec::new();
        if self.states.is_empty() {
            out.push(SmpViolation::NoStates);
            return out;
        }
        for (s, row) in self.transitions.iter().enumerate() {
            let mut sum = 0.0;
            for t in row {
                if t.prob < 0.0 {
                    out.push(SmpViolation::NegativeProbability {
                        from: self.states[s].clone(),
                        to: self.states[t.target].clone(),
                        prob: t.prob,
                    });
                }
                if t.prob > 0.0 && t.delay.is_none() {
                    out.push(SmpViolation::MissingDelay {
                        from: self.states[s].clone(),
                        to: self.states[t.target].clone(),
                    });
                }
                sum += t.prob;
            }
            if (sum - 1.0).abs() > MASS_TOL {
                out.push(SmpViolation::RowSum {
                    state: self.states[s].clone(),
                    sum,
                });
            }
        }
        for (s, p) in self.initial.iter().enumerate() {
            if *p < 0.0 {
                out.push(SmpViolation::NegativeInitial {
                    state: self.states[s].clone(),
                });
            }
        }
        let sum: f64 = self.initial.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            out.push(SmpViolation::InitialSum { sum });
        }
        out
    }

    pub fn expected_delays(&self) -> ExpectedDelays {
        let n = self.num_states();
        let mut per_transition = Vec::new();
        let mut per_state = vec![0.0; n];
        for (s, e_s) in per_state.iter_mut().enumerate() {
            for (target, prob, d) in self.successors(s) {
                let mean = d.mean();
                per_transition.push((s, target, mean));
                *e_s += prob * mean;
            }
        }
        ExpectedDelays {
            per_transition,
            per_state,
        }
    }

    /// Probability of the cylinder spanned by `template`.
    pub fn cylinder_probability(&self, template: &CylinderTemplate) -> Result<f64> {
        let n = self.num_states();
        if template.states.len() != template.intervals.len() + 1 || template.intervals.is_empty() {
            return Err(invalid(
                "template must alternate states and intervals, s0 I0 ... s_{n+1}",
            ));
        }
        if template.states.iter().any(|s| *s >= n) {
            return Err(invalid("template references unknown state"));
        }
        let mut p = self.initial[template.states[0]];
        for (i, iv) in template.intervals.iter().enumerate() {
            let (s, s_next) = (template.states[i], template.states[i + 1]);
            let prob = self.prob(s, s_next);
            if prob == 0.0 {
                return Ok(0.0);
            }
            let mass = match self.delay(s, s_next) {
                Some(d) => d.mass_between(iv.lo, iv.hi),
                None => return Err(invalid("template step without delay density")),
            };
            p *= prob * mass;
        }
        Ok(p)
    }
}

/// Expected transition times `E_{s,s'}` and per-state `E_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedDelays {
    pub per_transition: Vec<(usize, usize, f64)>,
    pub per_state: Vec<f64>,
}

/// A closed interval of delays `[lo, hi]`; `hi` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo < 0.0 {
            return Err(invalid(format!("ill-formed interval [{lo},{hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }
}

/// A template `s0 I0 s1 I1 ... s_{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderTemplate {
    pub states: Vec<usize>,
    pub intervals: Vec<Interval>,
}

impl CylinderTemplate {
    /// Whether a finite run `s0 t0 s1 t1 ...` lies in the cylinder.
    pub fn matches(&self, states: &[usize], delays: &[f64]) -> bool {
        states.len() >= self.states.len()
            && delays.len() >= self.intervals.len()
            && self.states.iter().zip(states).all(|(a, b)| a == b)
            && self
                .intervals
                .iter()
                .zip(delays)
                .all(|(iv, t)| iv.contains(*t))
    }
}

/// Error raised when a model file cannot be turned into a process.
pub(crate) fn model_error(key: &str, msg: impl fmt::Display) -> Error {
    Error::Parse {
        source_name: format!("model key `{key}`"),
        message: msg.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn uniform_eval_and_integrate() {
        let d = DelayDensity::uniform(0, 4).unwrap();
        assert_eq!(d.eval(1.0), 0.25);
        assert_eq!(d.eval(-0.5), 0.0);
        assert_eq!(d.integrate(0.0, 2.0).unwrap(), 0.5);
        assert_eq!(d.integrate(-1.0, 10.0).unwrap(), 1.0);
        assert!(d.integrate(2.0, 1.0).is_err());
    }

    #[test]
    fn tail_eval_integrate_mean() {
        let d = DelayDensity::shifted_tail(2, 1.0).unwrap();
        assert!(close(d.eval(3.0), (-1.0f64).exp(), 1e-15));
        let d0 = DelayDensity::shifted_tail(0, 1.0).unwrap();
        assert!(close(d0.integrate(0.0, f64::INFINITY).unwrap(), 1.0, 1e-15));
        let d = DelayDensity::shifted_tail(2, 0.5).unwrap();
        assert!(close(d.mean(), 4.0, 1e-15));
    }

    #[test]
    fn means_of_uniforms_are_midpoints() {
        assert_eq!(DelayDensity::uniform(0, 4).unwrap().mean(), 2.0);
        assert_eq!(DelayDensity::uniform(1, 3).unwrap().mean(), 2.0);
    }

    #[test]
    fn quantiles() {
        let d = DelayDensity::uniform(0, 4).unwrap();
        assert_eq!(d.quantile(0.5).unwrap(), 2.0);
        assert_eq!(d.quantile(0.0).unwrap(), 0.0);
        assert!(d.quantile(1.5).is_err());
        let t = DelayDensity::shifted_tail(1, 1.0).unwrap();
        let p = 1.0 - (-1.0f64).exp();
        assert!(close(t.quantile(p).unwrap(), 2.0, 1e-12));
    }

    #[test]
    fn piecewise_density() {
        let pieces = vec![
            Piece {
                start: Ratio::from_integer(0),
                end: Ratio::new(1, 2),
                value: 1.0,
            },
            Piece {
                start: Ratio::new(1, 2),
                end: Ratio::from_integer(2),
                value: 1.0 / 3.0,
            },
        ];
        let d = DelayDensity::piecewise(0, 2, pieces).unwrap();
        assert!(close(d.integrate(0.0, 2.0).unwrap(), 1.0, 1e-12));
        assert_eq!(d.eval(0.25), 1.0);
        assert!(close(d.eval(1.0), 1.0 / 3.0, 1e-15));
        assert!(close(d.quantile(0.5).unwrap(), 0.5, 1e-12));
        // 1 * (0.25 - 0)/2 + (1/3)(4 - 0.25)/2
        assert!(close(d.mean(), 0.125 + 0.625, 1e-12));
    }

    #[test]
    fn piecewise_rejects_gaps_and_bad_mass() {
        let gap = vec![
            Piece {
                start: Ratio::from_integer(0),
                end: Ratio::from_integer(1),
                value: 0.5,
            },
            Piece {
                start: Ratio::new(3, 2),
                end: Ratio::from_integer(2),
                value: 1.0,
            },
        ];
        assert!(DelayDensity::piecewise(0, 2, gap).is_err());
        let heavy = vec![Piece {
            start: Ratio::from_integer(0),
            end: Ratio::from_integer(2),
            value: 1.0,
        }];
        assert!(DelayDensity::piecewise(0, 2, heavy).is_err());
    }

    fn two_state() -> SemiMarkovProcess {
        let mut m = SemiMarkovProcess::new(["a", "b"]);
        m.add_transition(0, 1, 1.0, Some(DelayDensity::uniform(0, 1).unwrap()))
            .unwrap();
        m.add_transition(1, 0, 1.0, Some(DelayDensity::uniform(1, 3).unwrap()))
            .unwrap();
        m
    }

    #[test]
    fn validate_reports_violations() {
        assert!(two_state().validate().is_empty());

        let mut m = SemiMarkovProcess::new(["a", "b"]);
        m.add_transition(0, 1, 0.9, Some(DelayDensity::uniform(0, 1).unwrap()))
            .unwrap();
        m.add_transition(1, 0, 1.0, Some(DelayDensity::uniform(0, 1).unwrap()))
            .unwrap();
        let v = m.validate();
        assert_eq!(v.len(), 1);
        assert!(matches!(&v[0], SmpViolation::RowSum { state, .. } if state == "a"));

        let mut m = SemiMarkovProcess::new(["a", "b"]);
        m.add_transition(0, 1, 1.0, None).unwrap();
        m.add_transition(1, 0, 1.0, Some(DelayDensity::uniform(0, 1).unwrap()))
            .unwrap();
        let v = m.validate();
        assert_eq!(v.len(), 1);
        assert!(
            matches!(&v[0], SmpViolation::MissingDelay { from, to } if from == "a" && to == "b")
        );
    }

    #[test]
    fn expected_delays_per_state() {
        let e = two_state().expected_delays();
        assert_eq!(e.per_state, vec![0.5, 2.0]);
    }

    #[test]
    fn cylinder_probabilities() {
        let mut m = SemiMarkovProcess::new(["s"]);
        m.add_transition(0, 0, 1.0, Some(DelayDensity::uniform(0, 4).unwrap()))
            .unwrap();
        let iv = |a, b| Interval::new(a, b).unwrap();
        let one = CylinderTemplate {
            states: vec![0, 0],
            intervals: vec![iv(0.0, 2.0)],
        };
        assert_eq!(m.cylinder_probability(&one).unwrap(), 0.5);
        let empty = CylinderTemplate {
            states: vec![0, 0],
            intervals: vec![iv(1.0, 1.0)],
        };
        assert_eq!(m.cylinder_probability(&empty).unwrap(), 0.0);
        let two = CylinderTemplate {
            states: vec![0, 0, 0],
            intervals: vec![iv(0.0, 2.0), iv(2.0, 4.0)],
        };
        assert_eq!(m.cylinder_probability(&two).unwrap(), 0.25);

        let m2 = two_state();
        let impossible = CylinderTemplate {
            states: vec![0, 0],
            intervals: vec![iv(0.0, 1.0)],
        };
        assert_eq!(m2.cylinder_probability(&impossible).unwrap(), 0.0);
    }
}
