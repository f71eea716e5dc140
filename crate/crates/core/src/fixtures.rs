//! Small reference models shipped with the crate (also under `models/`).

use crate::dta::Dta;
use crate::io::{parse_dta, parse_model};
use crate::smp::SemiMarkovProcess;

pub const A1_MODEL: &str = include_str!("../models/a1_model.json");
pub const A_HAT: &str = include_str!("../models/a_hat.json");
pub const A2_MODEL: &str = include_str!("../models/a2_model.json");
pub const A3_MODEL: &str = include_str!("../models/a3_model.json");
pub const A4_MODEL: &str = include_str!("../models/a4_model.json");
pub const TWO_STATE_TRIVIAL: &str = include_str!("../models/two_state_trivial.json");
pub const ONE_LOCATION: &str = include_str!("../models/one_location.json");
pub const ITINERARY_MODEL: &str = include_str!("../models/itinerary_model.json");
pub const ITINERARY_DTA: &str = include_str!("../models/itinerary_dta.json");

fn model(text: &str) -> SemiMarkovProcess {
    parse_model(text).expect("bundled model parses")
}

fn dta(text: &str) -> Dta {
    parse_dta(text).expect("bundled automaton parses")
}

/// One clock, guard constant 2: enters `q_up` after a stamp `<= 2`, `q_down` otherwise.
pub fn observer_a_hat() -> Dta {
    dta(A_HAT)
}

/// Single state with a `Uniform[0,4]` self-loop, observed by [`observer_a_hat`].
pub fn model_a1() -> (SemiMarkovProcess, Dta) {
    (model(A1_MODEL), observer_a_hat())
}

/// Two alternating states with `Uniform[0,1]` and `Uniform[1,3]` delays,
/// observed by the state-labeled one-location automaton.
pub fn model_a2() -> (SemiMarkovProcess, Dta) {
    let m = model(A2_MODEL);
    let a = dta(TWO_STATE_TRIVIAL)
        .state_labeled(m.state_names())
        .expect("alphabet matches");
    (m, a)
}

/// First step branches 0.5/0.5 into two absorbing self-loops.
pub fn model_a3() -> (SemiMarkovProcess, Dta) {
    (model(A3_MODEL), dta(ONE_LOCATION))
}

/// Two alternating states with `Uniform[0,1]` delays and a state-labeled
/// observer; its region graph has period 2.
pub fn model_a4() -> (SemiMarkovProcess, Dta) {
    let m = model(A4_MODEL);
    let a = dta(TWO_STATE_TRIVIAL)
        .state_labeled(m.state_names())
        .expect("alphabet matches");
    (m, a)
}

/// Two-stop itinerary `B -> K -> P -> B` with cumulative deadlines `x<=3`, `x<=5`.
pub fn model_itinerary() -> (SemiMarkovProcess, Dta) {
    (model(ITINERARY_MODEL), dta(ITINERARY_DTA))
}
