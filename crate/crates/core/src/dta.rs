//! Deterministic timed automata used as observers of timed words.

use crate::error::{invalid, Error, Result};
use crate::scalar::ClockScalar;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Relation {
    /// Upper-bound relations (`<`, `<=`).
    pub fn is_upper(self) -> bool {
        matches!(self, Relation::Lt | Relation::Le)
    }
}

/// A basic constraint `clock ⋈ constant`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Atom {
    pub clock: usize,
    pub rel: Relation,
    pub constant: u32,
}

impl Atom {
    pub fn holds<T: ClockScalar>(&self, value: T) -> bool {
        let c = T::from_nat(self.constant);
        match self.rel {
            Relation::Lt => value < c,
            Relation::Le => value <= c,
            Relation::Gt => value > c,
            Relation::Ge => value >= c,
        }
    }
}

/// A finite conjunction of atoms; the empty conjunction is `true`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Guard {
    pub atoms: Vec<Atom>,
}

impl Guard {
    pub fn tt() -> Self {
        Guard { atoms: Vec::new() }
    }

    pub fn new(atoms: Vec<Atom>) -> Self {
        Guard { atoms }
    }

    /// Evaluates the guard on a raw value vector indexed by clock.
    ///
    /// Panics if an atom references a clock outside `values`; use
    /// [`Guard::sat`] for a checked variant.
    pub fn holds<T: ClockScalar>(&self, values: &[T]) -> bool {
        self.atoms.iter().all(|a| a.holds(values[a.clock]))
    }

    pub fn sat(&self, nu: &ClockValuation) -> Result<bool> {
        if let Some(a) = self.atoms.iter().find(|a| a.clock >= nu.len()) {
            return Err(invalid(format!(
                "guard references unknown clock #{}",
                a.clock
            )));
        }
        Ok(self.holds(nu.values()))
    }

    pub fn max_constant(&self) -> u32 {
        self.atoms.iter().map(|a| a.constant).max().unwrap_or(0)
    }
}

/// Parses a single atom string such as `x<=2` against a clock list.
pub fn parse_atom(text: &str, clocks: &[String]) -> Result<Atom> {
    let t = text.trim();
    let pos = t
        .find(['<', '>'])
        .ok_or_else(|| invalid(format!("atom `{t}` has no relation")))?;
    let (name, rest) = t.split_at(pos);
    let (rel, num) = if let Some(r) = rest.strip_prefix("<=") {
        (Relation::Le, r)
    } else if let Some(r) = rest.strip_prefix(">=") {
        (Relation::Ge, r)
    } else if let Some(r) = rest.strip_prefix('<') {
        (Relation::Lt, r)
    } else if let Some(r) = rest.strip_prefix('>') {
        (Relation::Gt, r)
    } else {
        return Err(invalid(format!("atom `{t}` has an unknown relation")));
    };
    let name = name.trim();
    let clock = clocks
        .iter()
        .position(|c| c == name)
        .ok_or_else(|| invalid(format!("atom `{t}` references unknown clock `{name}`")))?;
    let constant = u32::from_str(num.trim())
        .map_err(|_| invalid(format!("atom `{t}` needs a natural-number constant")))?;
    Ok(Atom {
        clock,
        rel,
        constant,
    })
}

/// A clock valuation; every value is nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct ClockValuation(Vec<f64>);

impl ClockValuation {
    pub fn zero(clocks: usize) -> Self {
        ClockValuation(vec![0.0; clocks])
    }

    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(invalid("clock values must be nonnegative"));
        }
        Ok(ClockValuation(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn elapse(&self, t: f64) -> Self {
        ClockValuation(self.0.iter().map(|v| v + t).collect())
    }

    pub fn reset(&self, clocks: &[usize]) -> Self {
        let mut v = self.0.clone();
        for &c in clocks {
            v[c] = 0.0;
        }
        ClockValuation(v)
    }
}

/// An edge `(source, letter, guard, resets, target)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub letter: usize,
    pub guard: Guard,
    pub resets: Vec<usize>,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub location: usize,
    pub valuation: ClockValuation,
}

/// Per-clock cell of the guard-constant grid: `[k,k]`, `(k,k+1)` or `(B,inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClockCell {
    Point(u32),
    Open(u32),
    Above(u32),
}

impl ClockCell {
    fn representative(self) -> f64 {
        match self {
            ClockCell::Point(k) => k as f64,
            ClockCell::Open(k) => k as f64 + 0.5,
            ClockCell::Above(b) => b as f64 + 1.0,
        }
    }

    fn all(b_max: u32) -> Vec<ClockCell> {
        let mut v = Vec::with_capacity(2 * b_max as usize + 2);
        for k in 0..b_max {
            v.push(ClockCell::Point(k));
            v.push(ClockCell::Open(k));
        }
        v.push(ClockCell::Point(b_max));
        v.push(ClockCell::Above(b_max));
        v
    }
}

impl fmt::Display for ClockCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClockCell::Point(k) => write!(f, "[{k},{k}]"),
            ClockCell::Open(k) => write!(f, "({k},{})", k + 1),
            ClockCell::Above(b) => write!(f, "({b},inf)"),
        }
    }
}

/// A violated determinism or totality condition, with the offending cell.
#[derive(Debug, Clone, PartialEq)]
pub enum DtaViolation {
    NotTotal {
        location: String,
        letter: String,
        cell: String,
    },
    NotDeterministic {
        location: String,
        letter: String,
        cell: String,
        edges: Vec<usize>,
    },
    UnknownLocation {
        edge: usize,
    },
    UnknownClock {
        edge: usize,
    },
}

impl fmt::Display for DtaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DtaViolation::NotTotal { location, letter, cell } => {
                write!(f, "not total: no edge from ({location}, {letter}) for cell {cell}")
            }
            DtaViolation::NotDeterministic { location, letter, cell, edges } => write!(
                f,
                "not deterministic: edges {edges:?} from ({location}, {letter}) overlap on cell {cell}"
            ),
            DtaViolation::UnknownLocation { edge } => write!(f, "edge {edge} references an unknown location"),
            DtaViolation::UnknownClock { edge } => write!(f, "edge {edge} references an unknown clock"),
        }
    }
}

/// A deterministic timed automaton `(Q, Σ, X, ->, q0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dta {
    locations: Vec<String>,
    alphabet: Vec<String>,
    clocks: Vec<String>,
    initial: usize,
    edges: Vec<Edge>,
    b_max: u32,
    /// Edge indices per `(location, letter)`, flattened as `q * |Σ| + a`.
    by_source: Vec<Vec<usize>>,
}

impl Dta {
    pub fn new(
        locations: Vec<String>,
        alphabet: Vec<String>,
        clocks: Vec<String>,
        initial: usize,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        if locations.is_empty() {
            return Err(invalid("automaton needs at least one location"));
        }
        if initial >= locations.len() {
            return Err(invalid("initial location out of range"));
        }
        let nq = locations.len();
        let na = alphabet.len();
        let mut by_source = vec![Vec::new(); nq * na];
        for (i, e) in edges.iter().enumerate() {
            if e.source >= nq || e.target >= nq {
                return Err(invalid(format!("edge {i} references an unknown location")));
            }
            if e.letter >= na {
                return Err(invalid(format!("edge {i} references an unknown letter")));
            }
            if e.resets.iter().any(|c| *c >= clocks.len())
                || e.guard.atoms.iter().any(|a| a.clock >= clocks.len())
            {
                return Err(invalid(format!("edge {i} references an unknown clock")));
            }
            by_source[e.source * na + e.letter].push(i);
        }
        let b_max = edges
            .iter()
            .map(|e| e.guard.max_constant())
            .max()
            .unwrap_or(0);
        Ok(Dta {
            locations,
            alphabet,
            clocks,
            initial,
            edges,
            b_max,
            by_source,
        })
    }

    pub fn locations(&self) -> &[String] {
        &self.locations
    }

    pub fn num_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l == name)
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn letter_index(&self, name: &str) -> Option<usize> {
        self.alphabet.iter().position(|l| l == name)
    }

    pub fn clocks(&self) -> &[String] {
        &self.clocks
    }

    pub fn num_clocks(&self) -> usize {
        self.clocks.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Largest guard constant, 0 when there are no atoms.
    pub fn b_max(&self) -> u32 {
        self.b_max
    }

    pub fn edges_from(&self, q: usize, letter: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.by_source[q * self.alphabet.len() + letter]
            .iter()
            .map(move |i| &self.edges[*i])
    }

    /// The first edge from `(q, letter)` whose guard holds; unique when the
    /// automaton is deterministic.
    pub fn enabled_edge<T: ClockScalar>(
        &self,
        q: usize,
        letter: usize,
        values: &[T],
    ) -> Option<&Edge> {
        self.edges_from(q, letter).find(|e| e.guard.holds(values))
    }

    /// Checks determinism and totality by enumerating the per-clock cells
    /// `[0,0], (0,1), ..., [B,B], (B,inf)`.
    pub fn validate(&self) -> Vec<DtaViolation> {
        let mut out = Vec::new();
        let cells = ClockCell::all(self.b_max);
        let n = self.clocks.len();
        let na = self.alphabet.len();
        let total_cells = cells.len().pow(n as u32);
        let decode = |mut idx: usize| -> Vec<ClockCell> {
            let mut v = Vec::with_capacity(n);
            for _ in 0..n {
                v.push(cells[idx % cells.len()]);
                idx /= cells.len();
            }
            v
        };
        let describe = |cv: &[ClockCell]| -> String {
            if cv.is_empty() {
                return "(no clocks)".to_string();
            }
            cv.iter()
                .enumerate()
                .map(|(i, c)| format!("{}∈{}", self.clocks[i], c))
                .collect::<Vec<_>>()
                .join(",")
        };
        for q in 0..self.locations.len() {
            for a in 0..na {
                let group = &self.by_source[q * na + a];
                // Satisfaction pattern of every edge in the group, cell by cell.
                let patterns: Vec<Vec<bool>> = group
                    .iter()
                    .map(|&ei| {
                        (0..total_cells)
                            .map(|c| {
                                let reps: Vec<f64> =
                                    decode(c).iter().map(|x| x.representative()).collect();
                                self.edges[ei].guard.holds(&reps)
                            })
                            .collect()
                    })
                    .collect();
                for c in 0..total_cells {
                    let enabled: Vec<usize> =
                        (0..group.len()).filter(|&g| patterns[g][c]).collect();
                    if enabled.is_empty() {
                        out.push(DtaViolation::NotTotal {
                            location: self.locations[q].clone(),
                            letter: self.alphabet[a].clone(),
                            cell: describe(&decode(c)),
                        });
                        continue;
                    }
                    let first = enabled[0];
                    let same = |g: usize| {
                        let (e1, e2) = (&self.edges[group[first]], &self.edges[group[g]]);
                        let mut r1 = e1.resets.clone();
                        let mut r2 = e2.resets.clone();
                        r1.sort_unstable();
                        r1.dedup();
                        r2.sort_unstable();
                        r2.dedup();
                        patterns[first] == patterns[g] && r1 == r2 && e1.target == e2.target
                    };
                    if !enabled.iter().all(|&g| same(g)) {
                        out.push(DtaViolation::NotDeterministic {
                            location: self.locations[q].clone(),
                            letter: self.alphabet[a].clone(),
                            cell: describe(&decode(c)),
                            edges: enabled.iter().map(|&g| group[g]).collect(),
                        });
                    }
                }
            }
        }
        out
    }

    /// Discrete step: reads `letter` from configuration `c`.
    pub fn read(&self, c: &Configuration, letter: usize) -> Result<Configuration> {
        if letter >= self.alphabet.len() {
            return Err(invalid(format!("unknown letter #{letter}")));
        }
        let e = self
            .enabled_edge(c.location, letter, c.valuation.values())
            .ok_or_else(|| Error::TotalityViolation {
                location: self.locations[c.location].clone(),
                letter: self.alphabet[letter].clone(),
            })?;
        Ok(Configuration {
            location: e.target,
            valuation: c.valuation.reset(&e.resets),
        })
    }

    pub fn initial_configuration(&self) -> Configuration {
        Configuration {
            location: self.initial,
            valuation: ClockValuation::zero(self.clocks.len()),
        }
    }

    /// Configurations after each read and each elapse, starting from `(q0, 0)`.
    pub fn run_prefix(&self, word: &TimedWord) -> Result<Vec<Configuration>> {
        let mut c = self.initial_configuration();
        let mut out = vec![c.clone()];
        for sym in &word.symbols {
            c = match *sym {
                Symbol::Letter(a) => self.read(&c, a)?,
                Symbol::Stamp(t) => elapse(&c, t)?,
            };
            out.push(c.clone());
        }
        Ok(out)
    }

    /// Locations `Q^0, Q^1, ...` entered after reading each letter.
    fn entered_locations(&self, word: &TimedWord) -> Result<Vec<usize>> {
        let mut c = self.initial_configuration();
        let mut out = Vec::new();
        for sym in &word.symbols {
            match *sym {
                Symbol::Letter(a) => {
                    c = self.read(&c, a)?;
                    out.push(c.location);
                }
                Symbol::Stamp(t) => c = elapse(&c, t)?,
            }
        }
        Ok(out)
    }

    /// Fraction of indices `i = 1..=n` with `Q^i = q`, where the word holds
    /// letters `a_0 .. a_n`.
    pub fn finite_discrete_frequency(&self, word: &TimedWord) -> Result<FrequencyVector> {
        let entered = self.entered_locations(word)?;
        if entered.len() < 2 {
            return Err(invalid(
                "discrete frequency needs horizon n >= 1 (at least two letters)",
            ));
        }
        let n = entered.len() - 1;
        let mut values = vec![0.0; self.locations.len()];
        for &q in &entered[1..] {
            values[q] += 1.0;
        }
        values.iter_mut().for_each(|v| *v /= n as f64);
        Ok(FrequencyVector {
            values,
            horizon: n,
            kind: FrequencyKind::Discrete,
        })
    }

    /// `sum_i T^i 1^i_q / sum_i T^i` over `i = 1..=n`.
    pub fn finite_timed_frequency(&self, word: &TimedWord) -> Result<FrequencyVector> {
        let entered = self.entered_locations(word)?;
        if entered.len() < 2 {
            return Err(invalid(
                "timed frequency needs horizon n >= 1 (at least two letters)",
            ));
        }
        let n = entered.len() - 1;
        let stamps = word.stamps();
        if stamps.len() < n + 1 {
            return Err(invalid(format!(
                "timed frequency at horizon {n} needs stamp t_{n}"
            )));
        }
        let mut values = vec![0.0; self.locations.len()];
        let mut total = 0.0;
        for i in 1..=n {
            values[entered[i]] += stamps[i];
            total += stamps[i];
        }
        if total <= 0.0 {
            return Err(Error::DegenerateInput(
                "all stamps T^1..T^n are zero".into(),
            ));
        }
        values.iter_mut().for_each(|v| *v /= total);
        Ok(FrequencyVector {
            values,
            horizon: n,
            kind: FrequencyKind::Timed,
        })
    }

    /// The automaton `S × A` that additionally remembers the letter read last.
    ///
    /// Locations are `q0` followed by `(s, q)` for every state `s` and
    /// location `q`, named `"s,q"`, laid out state-major.
    pub fn state_labeled(&self, states: &[String]) -> Result<Dta> {
        let mut a_sorted = self.alphabet.clone();
        let mut s_sorted = states.to_vec();
        a_sorted.sort();
        s_sorted.sort();
        if a_sorted != s_sorted {
            return Err(invalid(
                "state-labeled construction needs alphabet equal to the state set",
            ));
        }
        let nq = self.locations.len();
        let letter_of_state: Vec<usize> = states
            .iter()
            .map(|s| self.letter_index(s).expect("checked above"))
            .collect();
        let state_of_letter: Vec<usize> = (0..self.alphabet.len())
            .map(|a| {
                letter_of_state
                    .iter()
                    .position(|&l| l == a)
                    .expect("checked above")
            })
            .collect();
        let pair = |s: usize, q: usize| 1 + s * nq + q;
        let mut locations = vec![self.locations[self.initial].clone()];
        for s in states {
            for q in &self.locations {
                locations.push(format!("{s},{q}"));
            }
        }
        let mut edges = Vec::new();
        for e in &self.edges {
            let s = state_of_letter[e.letter];
            if e.source == self.initial {
                edges.push(Edge {
                    source: 0,
                    target: pair(s, e.target),
                    ..e.clone()
                });
            }
        }
        for e in &self.edges {
            let s = state_of_letter[e.letter];
            for s_prev in 0..states.len() {
                edges.push(Edge {
                    source: pair(s_prev, e.source),
                    target: pair(s, e.target),
                    ..e.clone()
                });
            }
        }
        Dta::new(
            locations,
            self.alphabet.clone(),
            self.clocks.clone(),
            0,
            edges,
        )
    }

    /// Location of `S × A` standing for `(state, q)`.
    pub fn state_labeled_location(&self, state: usize, q: usize) -> usize {
        1 + state * self.locations.len() + q
    }

    /// Re-expresses an automaton over letters as one over state names, where
    /// state `s` is read as its label `labels[s]`.
    pub fn over_states(&self, states: &[String], labels: &[String]) -> Result<Dta> {
        let mut edges = Vec::new();
        for (s, label) in labels.iter().enumerate() {
            let a = self.letter_index(label).ok_or_else(|| {
                invalid(format!("label `{label}` is not in the automaton alphabet"))
            })?;
            for e in self.edges.iter().filter(|e| e.letter == a) {
                edges.push(Edge {
                    letter: s,
                    ..e.clone()
                });
            }
        }
        Dta::new(
            self.locations.clone(),
            states.to_vec(),
            self.clocks.clone(),
            self.initial,
            edges,
        )
    }
}

/// Time elapse: every clock grows by `t`.
pub fn elapse(c: &Configuration, t: f64) -> Result<Configuration> {
    if !(t >= 0.0) {
        return Err(invalid(format!("cannot elapse negative time {t}")));
    }
    Ok(Configuration {
        location: c.location,
        valuation: c.valuation.elapse(t),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Symbol {
    Letter(usize),
    Stamp(f64),
}

/// A finite timed word `a_0 t_0 a_1 t_1 ...`, alternating letters and stamps.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedWord {
    symbols: Vec<Symbol>,
}

impl TimedWord {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        for (i, s) in symbols.iter().enumerate() {
            match (i % 2, s) {
                (0, Symbol::Letter(_)) => {}
                (1, Symbol::Stamp(t)) if *t >= 0.0 => {}
                (1, Symbol::Stamp(t)) => {
                    return Err(invalid(format!("negative stamp {t} at position {i}")))
                }
                _ => {
                    return Err(invalid(format!(
                        "word does not alternate letter/stamp at position {i}"
                    )))
                }
            }
        }
        Ok(TimedWord { symbols })
    }

    /// Parses a whitespace-separated word such as `"a 0.2 a 2.4"`.
    pub fn parse(text: &str, dta: &Dta) -> Result<Self> {
        let mut symbols = Vec::new();
        for (i, tok) in text.split_whitespace().enumerate() {
            if i % 2 == 0 {
                let a = dta
                    .letter_index(tok)
                    .ok_or_else(|| invalid(format!("unknown letter `{tok}` at position {i}")))?;
                symbols.push(Symbol::Letter(a));
            } else {
                let t: f64 = tok
                    .parse()
                    .map_err(|_| invalid(format!("bad stamp `{tok}` at position {i}")))?;
                symbols.push(Symbol::Stamp(t));
            }
        }
        TimedWord::new(symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn stamps(&self) -> Vec<f64> {
        self.symbols
            .iter()
            .filter_map(|s| match s {
                Symbol::Stamp(t) => Some(*t),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyKind {
    Discrete,
    Timed,
}

/// Finite-horizon frequency per location.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyVector {
    pub values: Vec<f64>,
    pub horizon: usize,
    pub kind: FrequencyKind,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::observer_a_hat;

    fn loc(a: &Dta, name: &str) -> usize {
        a.location_index(name).unwrap()
    }

    #[test]
    fn guard_satisfaction() {
        let clocks = vec!["x".to_string()];
        let le2 = Guard::new(vec![parse_atom("x<=2", &clocks).unwrap()]);
        let gt2 = Guard::new(vec![parse_atom("x>2", &clocks).unwrap()]);
        assert!(le2.sat(&ClockValuation::new(vec![1.5]).unwrap()).unwrap());
        assert!(!gt2.sat(&ClockValuation::new(vec![2.0]).unwrap()).unwrap());
        assert!(Guard::tt()
            .sat(&ClockValuation::new(vec![7.0]).unwrap())
            .unwrap());
        assert!(le2.sat(&ClockValuation::zero(0)).is_err());
        assert!(parse_atom("y<1", &clocks).is_err());
        assert!(parse_atom("x<=1.5", &clocks).is_err());
        assert!(parse_atom("x=1", &clocks).is_err());
    }

    #[test]
    fn a_hat_is_valid() {
        let a = observer_a_hat();
        assert_eq!(a.b_max(), 2);
        assert!(a.validate().is_empty(), "{:?}", a.validate());
    }

    #[test]
    fn non_total_automaton_reports_uncovered_cell() {
        let clocks = vec!["x".to_string()];
        let edges = vec![
            Edge {
                source: 0,
                letter: 0,
                guard: Guard::tt(),
                resets: vec![],
                target: 1,
            },
            Edge {
                source: 1,
                letter: 0,
                guard: Guard::new(vec![parse_atom("x<=2", &clocks).unwrap()]),
                resets: vec![0],
                target: 1,
            },
        ];
        let a = Dta::new(
            vec!["q0".into(), "q1".into()],
            vec!["a".into()],
            clocks,
            0,
            edges,
        )
        .unwrap();
        let v = a.validate();
        assert_eq!(v.len(), 1);
        match &v[0] {
            DtaViolation::NotTotal { location, cell, .. } => {
                assert_eq!(location, "q1");
                assert_eq!(cell, "x∈(2,inf)");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn overlapping_guards_report_nondeterminism_at_the_shared_point() {
        let clocks = vec!["x".to_string()];
        let edges = vec![
            Edge {
                source: 0,
                letter: 0,
                guard: Guard::new(vec![parse_atom("x>=1", &clocks).unwrap()]),
                resets: vec![],
                target: 0,
            },
            Edge {
                source: 0,
                letter: 0,
                guard: Guard::new(vec![parse_atom("x<=1", &clocks).unwrap()]),
                resets: vec![],
                target: 1,
            },
            Edge {
                source: 1,
                letter: 0,
                guard: Guard::tt(),
                resets: vec![],
                target: 1,
            },
        ];
        let a = Dta::new(
            vec!["q".into(), "r".into()],
            vec!["a".into()],
            clocks,
            0,
            edges,
        )
        .unwrap();
        let v = a.validate();
        assert_eq!(v.len(), 1, "{v:?}");
        match &v[0] {
            DtaViolation::NotDeterministic { cell, .. } => assert_eq!(cell, "x∈[1,1]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn read_and_elapse_follow_the_example_run() {
        let a = observer_a_hat();
        let c0 = a.initial_configuration();
        let c1 = a.read(&c0, 0).unwrap();
        assert_eq!(c1.location, loc(&a, "q1"));
        assert_eq!(c1.valuation.values(), &[0.0]);
        let c2 = elapse(&c1, 0.2).unwrap();
        assert_eq!(c2.valuation.values(), &[0.2]);
        let c3 = a.read(&c2, 0).unwrap();
        assert_eq!(c3.location, loc(&a, "q_up"));
        assert_eq!(c3.valuation.values(), &[0.0]);
        let c4 = elapse(&c3, 2.4).unwrap();
        let c5 = a.read(&c4, 0).unwrap();
        assert_eq!(c5.location, loc(&a, "q_down"));
        assert_eq!(c5.valuation.values(), &[0.0]);
        assert_eq!(elapse(&c2, 0.0).unwrap(), c2);
        assert!(elapse(&c2, -1.0).is_err());
    }

    #[test]
    fn elapse_shifts_every_clock() {
        let c = Configuration {
            location: 0,
            valuation: ClockValuation::new(vec![1.0, 0.5]).unwrap(),
        };
        assert_eq!(elapse(&c, 1.5).unwrap().valuation.values(), &[2.5, 2.0]);
    }

    #[test]
    fn run_prefix_matches_example() {
        let a = observer_a_hat();
        let w = TimedWord::parse("a 0.2 a 2.4 a 2.1", &a).unwrap();
        let run = a.run_prefix(&w).unwrap();
        let got: Vec<(String, f64)> = run
            .iter()
            .map(|c| (a.locations()[c.location].clone(), c.valuation.values()[0]))
            .collect();
        let want = [
            ("q0", 0.0),
            ("q1", 0.0),
            ("q1", 0.2),
            ("q_up", 0.0),
            ("q_up", 2.4),
            ("q_down", 0.0),
            ("q_down", 2.1),
        ];
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert_eq!(g.0, w.0);
            assert!((g.1 - w.1).abs() < 1e-12);
        }
        let empty = TimedWord::new(vec![]).unwrap();
        assert_eq!(
            a.run_prefix(&empty).unwrap(),
            vec![a.initial_configuration()]
        );
        let single = TimedWord::parse("a", &a).unwrap();
        assert_eq!(a.run_prefix(&single).unwrap().len(), 2);
        assert!(TimedWord::new(vec![Symbol::Stamp(1.0)]).is_err());
        assert!(TimedWord::new(vec![Symbol::Letter(0), Symbol::Letter(0)]).is_err());
    }

    #[test]
    fn finite_frequencies_on_example_word() {
        let a = observer_a_hat();
        let w = TimedWord::parse("a 0.2 a 2.4 a 2.1", &a).unwrap();
        let d = a.finite_discrete_frequency(&w).unwrap();
        assert_eq!(d.horizon, 2);
        assert_eq!(d.values[loc(&a, "q_up")], 0.5);
        assert_eq!(d.values[loc(&a, "q_down")], 0.5);
        let c = a.finite_timed_frequency(&w).unwrap();
        assert!((c.values[loc(&a, "q_up")] - 2.4 / 4.5).abs() < 1e-12);
        assert!((c.values[loc(&a, "q_down")] - 2.1 / 4.5).abs() < 1e-12);
        let short = TimedWord::parse("a 1.0", &a).unwrap();
        assert!(a.finite_discrete_frequency(&short).is_err());
    }

    #[test]
    fn short_stamps_are_counted_from_index_one() {
        // Every stamp <= 2: Q^0 = q1 is excluded, Q^1..Q^10 are all q_up.
        let a = observer_a_hat();
        let text = (0..11).map(|_| "a 1.5").collect::<Vec<_>>().join(" ");
        let w = TimedWord::parse(&text, &a).unwrap();
        let d = a.finite_discrete_frequency(&w).unwrap();
        assert_eq!(d.horizon, 10);
        assert_eq!(d.values[loc(&a, "q_up")], 1.0);
        assert_eq!(d.values[loc(&a, "q1")], 0.0);
        let c = a.finite_timed_frequency(&w).unwrap();
        for (x, y) in c.values.iter().zip(&d.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_stamps_are_degenerate() {
        let a = observer_a_hat();
        let w = TimedWord::parse("a 0 a 0 a 0", &a).unwrap();
        assert!(matches!(
            a.finite_timed_frequency(&w),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn single_location_frequencies() {
        let a = Dta::new(
            vec!["only".into()],
            vec!["a".into()],
            vec![],
            0,
            vec![Edge {
                source: 0,
                letter: 0,
                guard: Guard::tt(),
                resets: vec![],
                target: 0,
            }],
        )
        .unwrap();
        let w = TimedWord::parse("a 0.3 a 1.7 a 0.1 a 9", &a).unwrap();
        assert_eq!(a.finite_discrete_frequency(&w).unwrap().values, vec![1.0]);
        assert_eq!(a.finite_timed_frequency(&w).unwrap().values, vec![1.0]);
    }

    #[test]
    fn state_labeled_construction() {
        let clocks = vec!["x".to_string()];
        let le1 = Guard::new(vec![parse_atom("x<=1", &clocks).unwrap()]);
        let gt1 = Guard::new(vec![parse_atom("x>1", &clocks).unwrap()]);
        // |S| = 2, |Q| = 3, 4 edges per letter group below: q0 has 2, others 1 each per letter.
        let edges = vec![
            Edge {
                source: 0,
                letter: 0,
                guard: Guard::tt(),
                resets: vec![0],
                target: 1,
            },
            Edge {
                source: 0,
                letter: 1,
                guard: Guard::tt(),
                resets: vec![0],
                target: 2,
            },
            Edge {
                source: 1,
                letter: 0,
                guard: le1.clone(),
                resets: vec![0],
                target: 1,
            },
            Edge {
                source: 1,
                letter: 0,
                guard: gt1.clone(),
                resets: vec![0],
                target: 2,
            },
            Edge {
                source: 1,
                letter: 1,
                guard: Guard::tt(),
                resets: vec![],
                target: 2,
            },
            Edge {
                source: 2,
                letter: 0,
                guard: Guard::tt(),
                resets: vec![],
                target: 1,
            },
            Edge {
                source: 2,
                letter: 1,
                guard: Guard::tt(),
                resets: vec![0],
                target: 2,
            },
        ];
        let a = Dta::new(
            vec!["q0".into(), "q1".into(), "q2".into()],
            vec!["s1".into(), "s2".into()],
            clocks,
            0,
            edges,
        )
        .unwrap();
        assert!(a.validate().is_empty());
        let states = vec!["s1".to_string(), "s2".to_string()];
        let sa = a.state_labeled(&states).unwrap();
        assert_eq!(sa.num_locations(), 1 + 2 * 3);
        // Edges leaving q0 once from the fresh initial location, every edge once per previous state.
        assert_eq!(sa.edges().len(), 2 + 2 * 7);
        assert!(sa.validate().is_empty());
        assert!(a.state_labeled(&["s1".to_string()]).is_err());

        let one = Dta::new(
            vec!["q".into()],
            vec!["s".into()],
            vec![],
            0,
            vec![Edge {
                source: 0,
                letter: 0,
                guard: Guard::tt(),
                resets: vec![],
                target: 0,
            }],
        )
        .unwrap();
        let sa = one.state_labeled(&["s".to_string()]).unwrap();
        assert_eq!(sa.locations(), &["q".to_string(), "s,q".to_string()]);
        assert!(sa.validate().is_empty());
    }
}
