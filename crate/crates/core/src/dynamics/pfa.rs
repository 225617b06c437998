//! Cell states, the angiogenic switch, and the probabilistic automaton the
//! switch induces.
//!
//! Each live state owns an ordered cascade of trials. A trial compares its
//! factor against a fresh uniform threshold; the first success fires its
//! transition and later trials are skipped. If every trial fails the cell
//! stays put, and that stay mass is the state's final probability.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellState {
    Normal,
    Proliferative,
    Inflamed,
    Quiescent,
    Metastatic,
    Dead,
}

impl CellState {
    pub const ALL: [CellState; 6] = [
        CellState::Normal,
        CellState::Proliferative,
        CellState::Inflamed,
        CellState::Quiescent,
        CellState::Metastatic,
        CellState::Dead,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CellState::Normal => "normal",
            CellState::Proliferative => "proliferative",
            CellState::Inflamed => "inflamed",
            CellState::Quiescent => "quiescent",
            CellState::Metastatic => "metastatic",
            CellState::Dead => "dead",
        }
    }

    pub fn is_absorbing(self) -> bool {
        matches!(self, CellState::Metastatic | CellState::Dead)
    }

    /// States that count toward a neighbor's inflammation pressure.
    pub fn is_inflammatory(self) -> bool {
        matches!(self, CellState::Inflamed | CellState::Metastatic)
    }
}

impl std::fmt::Display for CellState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CellState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CellState::ALL
            .into_iter()
            .find(|state| state.as_str() == s)
            .ok_or_else(|| Error::Integrity(format!("unknown cell state `{s}`")))
    }
}

/// The automaton alphabet: which switch factor drove a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwitchFactor {
    Angioprevention,
    Angiogenesis,
    Quiescent,
}

/// Three transition-probability factors set by the operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngiogenicSwitch {
    pub angioprevention: f64,
    pub angiogenesis: f64,
    pub quiescent: f64,
}

impl AngiogenicSwitch {
    pub const ASW1: AngiogenicSwitch = AngiogenicSwitch::from_factors(0.4, 0.6, 0.2);
    pub const ASW2: AngiogenicSwitch = AngiogenicSwitch::from_factors(0.6, 0.4, 0.2);
    pub const ASW3: AngiogenicSwitch = AngiogenicSwitch::from_factors(0.4, 0.6, 0.8);
    pub const INERT: AngiogenicSwitch = AngiogenicSwitch::from_factors(0.0, 0.0, 0.0);

    const fn from_factors(angioprevention: f64, angiogenesis: f64, quiescent: f64) -> Self {
        AngiogenicSwitch {
            angioprevention,
            angiogenesis,
            quiescent,
        }
    }

    pub fn new(angioprevention: f64, angiogenesis: f64, quiescent: f64) -> Result<Self> {
        let switch = Self::from_factors(angioprevention, angiogenesis, quiescent);
        switch.validate()?;
        Ok(switch)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, value) in [
            ("angioprevention", self.angioprevention),
            ("angiogenesis", self.angiogenesis),
            ("quiescent", self.quiescent),
        ] {
            if !(value.is_finite() && (0.0..=1.0).contains(&value)) {
                return Err(Error::config(field, format!("{value} is outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn factor(&self, which: SwitchFactor) -> f64 {
        match which {
            SwitchFactor::Angioprevention => self.angioprevention,
            SwitchFactor::Angiogenesis => self.angiogenesis,
            SwitchFactor::Quiescent => self.quiescent,
        }
    }
}

impl Default for AngiogenicSwitch {
    fn default() -> Self {
        AngiogenicSwitch::ASW1
    }
}

/// Draw `K ~ U[0, 1)` and succeed when `factor > K`.
pub fn transition_trial<R: Rng + ?Sized>(factor: f64, rng: &mut R) -> bool {
    let threshold: f64 = rng.gen();
    factor > threshold
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trial {
    pub symbol: SwitchFactor,
    pub probability: f64,
    pub target: CellState,
}

/// The ordered trials for one state (at most three).
#[derive(Debug, Clone, Copy)]
pub struct Cascade {
    trials: [Option<Trial>; 3],
}

impl Cascade {
    pub fn trials(&self) -> impl Iterator<Item = &Trial> {
        self.trials.iter().flatten()
    }

    /// Run the cascade; returns the fired trial, `None` if the cell stays.
    pub fn fire<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&Trial> {
        self.trials()
            .find(|trial| transition_trial(trial.probability, rng))
    }
}

/// Trials for `state` given the switch and the fraction `neighbor_inflammation`
/// of inflamed or metastatic neighbors.
///
/// ```text
/// Normal:        quiescent -> Quiescent; min(1, angiogenesis (1 + f)) -> Proliferative
/// Proliferative: angiogenesis -> Inflamed; angioprevention -> Normal
/// Inflamed:      quiescent -> Quiescent; angioprevention -> Dead; angiogenesis f -> Metastatic
/// Quiescent:     angiogenesis (1 - quiescent) -> Normal
/// ```
///
/// The quiescent factor both recruits cells into dormancy and holds them
/// there; reactivation needs angiogenesis to overcome it.
pub fn cascade(state: CellState, switch: &AngiogenicSwitch, neighbor_inflammation: f64) -> Cascade {
    use CellState::*;
    use SwitchFactor as F;
    let t = |symbol, probability: f64, target| {
        Some(Trial {
            symbol,
            probability,
            target,
        })
    };
    let AngiogenicSwitch {
        angioprevention: prevent,
        angiogenesis: grow,
        quiescent: rest,
    } = *switch;
    let trials = match state {
        Normal => [
            t(F::Quiescent, rest, Quiescent),
            t(
                F::Angiogenesis,
                (grow * (1.0 + neighbor_inflammation)).min(1.0),
                Proliferative,
            ),
            None,
        ],
        Proliferative => [
            t(F::Angiogenesis, grow, Inflamed),
            t(F::Angioprevention, prevent, Normal),
            None,
        ],
        Inflamed => [
            t(F::Quiescent, rest, Quiescent),
            t(F::Angioprevention, prevent, Dead),
            t(F::Angiogenesis, grow * neighbor_inflammation, Metastatic),
        ],
        Quiescent => [t(F::Angiogenesis, grow * (1.0 - rest), Normal), None, None],
        Metastatic | Dead => [None, None, None],
    };
    Cascade { trials }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfaTransition {
    pub from: CellState,
    pub symbol: SwitchFactor,
    pub to: CellState,
    pub probability: f64,
}

/// `(S, Ω, I, F, P)` over the six cell states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfaDefinition {
    initial: [f64; 6],
    final_probability: [f64; 6],
    transitions: Vec<PfaTransition>,
}

impl PfaDefinition {
    pub fn states(&self) -> &'static [CellState; 6] {
        &CellState::ALL
    }

    pub fn alphabet(&self) -> [SwitchFactor; 3] {
        [
            SwitchFactor::Angioprevention,
            SwitchFactor::Angiogenesis,
            SwitchFactor::Quiescent,
        ]
    }

    pub fn initial(&self, state: CellState) -> f64 {
        self.initial[state.index()]
    }

    pub fn final_probability(&self, state: CellState) -> f64 {
        self.final_probability[state.index()]
    }

    pub fn transitions(&self) -> &[PfaTransition] {
        &self.transitions
    }

    /// `P(from, symbol, to)`; zero for absent entries.
    pub fn transition(&self, from: CellState, symbol: SwitchFactor, to: CellState) -> f64 {
        self.transitions
            .iter()
            .filter(|t| t.from == from && t.symbol == symbol && t.to == to)
            .map(|t| t.probability)
            .sum()
    }

    pub fn row(&self, from: CellState) -> impl Iterator<Item = &PfaTransition> {
        self.transitions.iter().filter(move |t| t.from == from)
    }

    /// `Σ_s I(s)`.
    pub fn initial_mass(&self) -> f64 {
        self.initial.iter().sum()
    }

    /// `F(s) + Σ_{b, s'} P(s, b, s')`.
    pub fn row_mass(&self, from: CellState) -> f64 {
        self.final_probability(from) + self.row(from).map(|t| t.probability).sum::<f64>()
    }

    /// Sample a state from `I`.
    pub fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> CellState {
        let draw: f64 = rng.gen();
        let mut acc = 0.0;
        for state in CellState::ALL {
            acc += self.initial(state);
            if draw < acc {
                return state;
            }
        }
        // rounding left a sliver above the cumulative sum; take the last
        // state carrying mass
        CellState::ALL
            .into_iter()
            .rev()
            .find(|s| self.initial(*s) > 0.0)
            .unwrap_or(CellState::Normal)
    }
}

/// Compile the switch into an automaton with the neighbor term at zero.
pub fn build_pfa(switch: &AngiogenicSwitch) -> PfaDefinition {
    build_pfa_with_neighbor(switch, 0.0)
}

/// Compile the cascade: trial `i` fires with probability
/// `p_i * Π_{j<i} (1 - p_j)`, and the stay mass `Π (1 - p_j)` becomes `F`.
pub fn build_pfa_with_neighbor(
    switch: &AngiogenicSwitch,
    neighbor_inflammation: f64,
) -> PfaDefinition {
    let mut initial = [0.0; 6];
    initial[CellState::Normal.index()] = 1.0;
    let mut final_probability = [0.0; 6];
    let mut transitions = Vec::new();
    for state in CellState::ALL {
        let mut reach = 1.0;
        for trial in cascade(state, switch, neighbor_inflammation).trials() {
            transitions.push(PfaTransition {
                from: state,
                symbol: trial.symbol,
                to: trial.target,
                probability: reach * trial.probability,
            });
            reach *= 1.0 - trial.probability;
        }
        final_probability[state.index()] = reach;
    }
    PfaDefinition {
        initial,
        final_probability,
        transitions,
    }
}
