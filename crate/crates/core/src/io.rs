//! JSON model and automaton files.
//!
//! Model file:
//!
//! ```json
//! { "states": ["s"],
//!   "initial": { "s": 1 },
//!   "transitions": [ { "from": "s", "to": "s", "prob": "1",
//!                      "delay": { "kind": "uniform", "lo": 0, "hi": 4 } } ],
//!   "labels": { "s": "a" } }
//! ```
//!
//! Delay kinds: `uniform` (`lo`, `hi`), `piecewise_constant` (`lo`, `hi`,
//! `pieces: [{from, to, value}]`), `shifted_tail` (`lo`, `hi: null`, `rate`).
//!
//! Automaton file:
//!
//! ```json
//! { "locations": ["q0", "q1"], "clocks": ["x"], "initial": "q0",
//!   "edges": [ { "from": "q0", "letter": "a", "guard": ["x<=2"],
//!                "resets": ["x"], "to": "q1" } ] }
//! ```

use crate::dta::{parse_atom, Dta, Edge, Guard};
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational};
use crate::smp::{model_error, DelayDensity, Piece, SemiMarkovProcess};
use num_traits::ToPrimitive;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

/// A number given either as a JSON number or as a decimal/fraction string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NumberLike {
    Num(f64),
    Text(String),
}

impl NumberLike {
    fn to_f64(&self, key: &str) -> Result<f64> {
        match self {
            NumberLike::Num(x) => Ok(*x),
            NumberLike::Text(t) => parse_rational(t)
                .and_then(|r| r.to_f64())
                .ok_or_else(|| model_error(key, format!("`{t}` is not a number"))),
        }
    }

    fn to_rational(&self, key: &str) -> Result<Rational> {
        match self {
            NumberLike::Num(x) => Rational::approximate_float(*x)
                .ok_or_else(|| model_error(key, format!("{x} is not representable"))),
            NumberLike::Text(t) => parse_rational(t)
                .ok_or_else(|| model_error(key, format!("`{t}` is not a rational"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceFile {
    pub from: NumberLike,
    pub to: NumberLike,
    pub value: NumberLike,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayFile {
    pub kind: String,
    pub lo: u32,
    #[serde(default)]
    pub hi: Option<u32>,
    #[serde(default)]
    pub pieces: Vec<PieceFile>,
    #[serde(default)]
    pub rate: Option<NumberLike>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionFile {
    pub from: String,
    pub to: String,
    pub prob: NumberLike,
    #[serde(default)]
    pub delay: Option<DelayFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub states: Vec<String>,
    pub transitions: Vec<TransitionFile>,
    pub initial: BTreeMap<String, NumberLike>,
    #[serde(default)]
    pub labels: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeFile {
    pub from: String,
    pub letter: String,
    #[serde(default)]
    pub guard: Vec<String>,
    #[serde(default)]
    pub resets: Vec<String>,
    pub to: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DtaFile {
    pub locations: Vec<String>,
    #[serde(default)]
    pub clocks: Vec<String>,
    pub initial: String,
    #[serde(default)]
    pub alphabet: Option<Vec<String>>,
    pub edges: Vec<EdgeFile>,
}

fn json_error(source_name: &str, e: serde_json::Error) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        message: format!("{e} (line {}, column {})", e.line(), e.column()),
    }
}

impl DelayFile {
    pub fn to_density(&self, key: &str) -> Result<DelayDensity> {
        let bad = |e: Error| model_error(key, e);
        match self.kind.as_str() {
            "uniform" => {
                let hi = self
                    .hi
                    .ok_or_else(|| model_error(key, "uniform delay needs finite `hi`"))?;
                DelayDensity::uniform(self.lo, hi).map_err(bad)
            }
            "piecewise_constant" | "piecewise" => {
                let hi = self
                    .hi
                    .ok_or_else(|| model_error(key, "piecewise delay needs finite `hi`"))?;
                let pieces = self
                    .pieces
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        let k = format!("{key}.pieces[{i}]");
                        Ok(Piece {
                            start: p.from.to_rational(&k)?,
                            end: p.to.to_rational(&k)?,
                            value: p.value.to_f64(&k)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                DelayDensity::piecewise(self.lo, hi, pieces).map_err(bad)
            }
            "shifted_tail" | "tail" => {
                if self.hi.is_some() {
                    return Err(model_error(
                        key,
                        "shifted_tail delay has infinite support; use `hi: null`",
                    ));
                }
                let rate = self
                    .rate
                    .as_ref()
                    .ok_or_else(|| model_error(key, "shifted_tail delay needs `rate`"))?
                    .to_f64(key)?;
                DelayDensity::shifted_tail(self.lo, rate).map_err(bad)
            }
            other => Err(model_error(key, format!("unknown delay kind `{other}`"))),
        }
    }
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| json_error("model file", e))
    }

    pub fn build(&self) -> Result<SemiMarkovProcess> {
        let index = |name: &str, key: &str| {
            self.states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| model_error(key, format!("unknown state `{name}`")))
        };
        let mut m = SemiMarkovProcess::new(self.states.iter().cloned());
        for (i, t) in self.transitions.iter().enumerate() {
            let key = format!("transitions[{i}]");
            let from = index(&t.from, &key)?;
            let to = index(&t.to, &key)?;
            let prob = t.prob.to_f64(&format!("{key}.prob"))?;
            let delay = t
                .delay
                .as_ref()
                .map(|d| d.to_density(&format!("{key}.delay")))
                .transpose()?;
            m.add_transition(from, to, prob, delay)?;
        }
        let mut initial = vec![0.0; self.states.len()];
        for (name, p) in &self.initial {
            let key = format!("initial.{name}");
            initial[index(name, &key)?] = p.to_f64(&key)?;
        }
        let mut m = m.with_initial(initial)?;
        if let Some(labels) = &self.labels {
            let mut out = self.states.clone();
            for (name, l) in labels {
                out[index(name, &format!("labels.{name}"))?] = l.clone();
            }
            m = m.with_labels(out)?;
        }
        Ok(m)
    }
}

impl DtaFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| json_error("automaton file", e))
    }

    pub fn build(&self) -> Result<Dta> {
        let loc = |name: &str, key: &str| {
            self.locations
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| Error::Parse {
                    source_name: format!("automaton key `{key}`"),
                    message: format!("unknown location `{name}`"),
                })
        };
        let alphabet = match &self.alphabet {
            Some(a) => a.clone(),
            None => {
                let mut a: Vec<String> = Vec::new();
                for e in &self.edges {
                    if !a.contains(&e.letter) {
                        a.push(e.letter.clone());
                    }
                }
                a
            }
        };
        let parse_err = |key: String| {
            move |e: Error| Error::Parse {
                source_name: format!("automaton key `{key}`"),
                message: e.to_string(),
            }
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            let key = format!("edges[{i}]");
            let letter = alphabet
                .iter()
                .position(|a| *a == e.letter)
                .ok_or_else(|| Error::Parse {
                    source_name: format!("automaton key `{key}.letter`"),
                    message: format!("letter `{}` not in alphabet", e.letter),
                })?;
            let atoms = e
                .guard
                .iter()
                .map(|g| parse_atom(g, &self.clocks))
                .collect::<Result<Vec<_>>>()
                .map_err(parse_err(format!("{key}.guard")))?;
            let resets = e
                .resets
                .iter()
                .map(|r| {
                    self.clocks
                        .iter()
                        .position(|c| c == r)
                        .ok_or_else(|| Error::Parse {
                            source_name: format!("automaton key `{key}.resets`"),
                            message: format!("unknown clock `{r}`"),
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            edges.push(Edge {
                source: loc(&e.from, &format!("{key}.from"))?,
                letter,
                guard: Guard::new(atoms),
                resets,
                target: loc(&e.to, &format!("{key}.to"))?,
            });
        }
        let initial = loc(&self.initial, "initial")?;
        Dta::new(
            self.locations.clone(),
            alphabet,
            self.clocks.clone(),
            initial,
            edges,
        )
        .map_err(parse_err("edges".into()))
    }
}

pub fn parse_model(text: &str) -> Result<SemiMarkovProcess> {
    ModelFile::parse(text)?.build()
}

pub fn parse_dta(text: &str) -> Result<Dta> {
    DtaFile::parse(text)?.build()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        source_name: path.display().to_string(),
        message: format!("cannot read file: {e}"),
    })
}

pub fn load_model(path: &Path) -> Result<SemiMarkovProcess> {
    parse_model(&read(path)?).map_err(|e| rename_source(e, path))
}

pub fn load_dta(path: &Path) -> Result<Dta> {
    parse_dta(&read(path)?).map_err(|e| rename_source(e, path))
}

fn rename_source(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse {
            source_name,
            message,
        } => Error::Parse {
            source_name: format!("{}: {source_name}", path.display()),
            message,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_model_with_all_delay_kinds() {
        let text = r#"{
            "states": ["a", "b", "c"],
            "initial": {"a": "1"},
            "transitions": [
                {"from": "a", "to": "b", "prob": "1/2", "delay": {"kind": "uniform", "lo": 0, "hi": 4}},
                {"from": "a", "to": "c", "prob": 0.5, "delay": {"kind": "shifted_tail", "lo": 1, "hi": null, "rate": "0.5"}},
                {"from": "b", "to": "a", "prob": 1, "delay": {"kind": "piecewise_constant", "lo": 0, "hi": 2,
                    "pieces": [{"from": 0, "to": "1/2", "value": 1}, {"from": "1/2", "to": 2, "value": "1/3"}]}},
                {"from": "c", "to": "a", "prob": 1, "delay": {"kind": "uniform", "lo": 1, "hi": 2}}
            ],
            "labels": {"a": "x", "b": "y", "c": "y"}
        }"#;
        let m = parse_model(text).unwrap();
        assert!(m.validate().is_empty());
        assert_eq!(m.prob(0, 1), 0.5);
        assert_eq!(m.delay(0, 2).unwrap().mean(), 3.0);
        assert_eq!(m.label(2), "y");
    }

    #[test]
    fn model_errors_carry_location() {
        match parse_model("{\n \"states\": [\"a\"],\n \"oops\": 1 }") {
            Err(Error::Parse { message, .. }) => assert!(message.contains("line")),
            other => panic!("unexpected {other:?}"),
        }
        let bad_state = r#"{"states": ["a"], "initial": {"a": 1},
            "transitions": [{"from": "a", "to": "zz", "prob": 1}]}"#;
        match parse_model(bad_state) {
            Err(Error::Parse { source_name, .. }) => {
                assert!(source_name.contains("transitions[0]"))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parses_automaton() {
        let text = r#"{"locations": ["q0", "q1"], "clocks": ["x"], "initial": "q0",
            "edges": [
              {"from": "q0", "letter": "a", "guard": [], "resets": ["x"], "to": "q1"},
              {"from": "q1", "letter": "a", "guard": ["x<=2"], "resets": ["x"], "to": "q1"},
              {"from": "q1", "letter": "a", "guard": ["x>2"], "resets": ["x"], "to": "q0"}
            ]}"#;
        let a = parse_dta(text).unwrap();
        assert_eq!(a.b_max(), 2);
        assert!(a.validate().is_empty());
        let bad = text.replace("x<=2", "y<=2");
        assert!(matches!(parse_dta(&bad), Err(Error::Parse { .. })));
    }
}
