//! Line-oriented text form for parametric nets.
//!
//! ```text
//! # comment
//! subprocess 1 Dig bulbs
//! place Start1 = 1
//! place People available = p
//! trans Start digging: Start1, People available*d -> Digging, People available*d
//! ```
//!
//! Places are declared on first mention, so declaration order follows the
//! text. `place` lines set the initial marking (default 0). Weights and
//! initial values are either integers or parameter names resolved through
//! [`ModelParams::get`]. Every transition belongs to the most recent
//! `subprocess` header (0 before the first header).

use thiserror::Error;

use super::params::ModelParams;
use crate::net::{MarkedNet, Marking, NetBuilder, NetError, Tokens};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SourceError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown parameter '{0}' in model source")]
    UnknownParameter(String),
    #[error("unknown {kind} '{name}'")]
    UnknownNode { kind: &'static str, name: String },
    #[error(transparent)]
    Net(#[from] NetError),
}

/// An integer literal or a parameter name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Amount {
    Const(Tokens),
    Param(String),
}

impl Amount {
    fn parse(text: &str) -> Amount {
        match text.trim().parse() {
            Ok(v) => Amount::Const(v),
            Err(_) => Amount::Param(text.trim().to_string()),
        }
    }

    pub fn eval(&self, params: &ModelParams) -> Result<Tokens, SourceError> {
        match self {
            Amount::Const(v) => Ok(*v),
            Amount::Param(name) => params
                .get(name)
                .ok_or_else(|| SourceError::UnknownParameter(name.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaceDecl {
    pub name: String,
    pub initial: Amount,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionDecl {
    pub name: String,
    pub subprocess: u8,
    pub inputs: Vec<(usize, Amount)>,
    pub outputs: Vec<(usize, Amount)>,
}

/// A parsed, not yet instantiated, parametric net.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NetSource {
    pub places: Vec<PlaceDecl>,
    pub transitions: Vec<TransitionDecl>,
}

impl NetSource {
    pub fn parse(text: &str) -> Result<NetSource, SourceError> {
        let mut src = NetSource::default();
        let mut subprocess = 0u8;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: &str| SourceError::Syntax {
                line: line_no,
                message: message.to_string(),
            };
            let (keyword, rest) = line.split_once(' ').ok_or_else(|| syntax("missing body"))?;
            match keyword {
                "subprocess" => {
                    let id = rest.split_whitespace().next().unwrap_or("");
                    subprocess = id.parse().map_err(|_| syntax("bad subprocess number"))?;
                }
                "place" => {
                    let (name, initial) = match rest.split_once('=') {
                        Some((n, v)) => (n.trim(), Amount::parse(v)),
                        None => (rest.trim(), Amount::Const(0)),
                    };
                    let id = src.place_index(name);
                    src.places[id].initial = initial;
                }
                "trans" => {
                    let (name, body) = rest.split_once(':').ok_or_else(|| syntax("missing ':'"))?;
                    let (ins, outs) = body
                        .split_once("->")
                        .ok_or_else(|| syntax("missing '->'"))?;
                    let name = name.trim().to_string();
                    if name.is_empty() {
                        return Err(syntax("empty transition name"));
                    }
                    let inputs = src.parse_arcs(ins);
                    let outputs = src.parse_arcs(outs);
                    src.transitions.push(TransitionDecl {
                        name,
                        subprocess,
                        inputs,
                        outputs,
                    });
                }
                _ => return Err(syntax("expected 'subprocess', 'place' or 'trans'")),
            }
        }
        Ok(src)
    }

    fn place_index(&mut self, name: &str) -> usize {
        match self.places.iter().position(|p| p.name == name) {
            Some(i) => i,
            None => {
                self.places.push(PlaceDecl {
                    name: name.to_string(),
                    initial: Amount::Const(0),
                });
                self.places.len() - 1
            }
        }
    }

    fn parse_arcs(&mut self, text: &str) -> Vec<(usize, Amount)> {
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|item| match item.rsplit_once('*') {
                Some((name, w)) => (self.place_index(name.trim()), Amount::parse(w)),
                None => (self.place_index(item), Amount::Const(1)),
            })
            .collect()
    }

    pub fn place_named(&self, name: &str) -> Result<usize, SourceError> {
        self.places
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| SourceError::UnknownNode {
                kind: "place",
                name: name.to_string(),
            })
    }

    pub fn transition_named(&self, name: &str) -> Result<usize, SourceError> {
        self.transitions
            .iter()
            .position(|t| t.name == name)
            .ok_or_else(|| SourceError::UnknownNode {
                kind: "transition",
                name: name.to_string(),
            })
    }

    pub fn remove_transition(&mut self, name: &str) -> Result<(), SourceError> {
        let idx = self.transition_named(name)?;
        self.transitions.remove(idx);
        Ok(())
    }

    /// Removes a place together with every arc touching it.
    pub fn remove_place(&mut self, name: &str) -> Result<(), SourceError> {
        let idx = self.place_named(name)?;
        self.places.remove(idx);
        let shift = |arcs: &mut Vec<(usize, Amount)>| {
            arcs.retain(|(p, _)| *p != idx);
            for (p, _) in arcs.iter_mut() {
                if *p > idx {
                    *p -= 1;
                }
            }
        };
        for t in &mut self.transitions {
            shift(&mut t.inputs);
            shift(&mut t.outputs);
        }
        Ok(())
    }

    pub fn add_input(
        &mut self,
        place: &str,
        transition: &str,
        weight: Amount,
    ) -> Result<(), SourceError> {
        let p = self.place_named(place)?;
        let t = self.transition_named(transition)?;
        self.transitions[t].inputs.push((p, weight));
        Ok(())
    }

    pub fn set_initial(&mut self, place: &str, initial: Amount) -> Result<(), SourceError> {
        let p = self.place_named(place)?;
        self.places[p].initial = initial;
        Ok(())
    }

    /// Instantiates the net for `params`. Arcs whose weight evaluates to 0
    /// are dropped.
    pub fn instantiate(&self, params: &ModelParams) -> Result<MarkedNet, SourceError> {
        let mut b = NetBuilder::new();
        let mut initial = Vec::with_capacity(self.places.len());
        for place in &self.places {
            b.add_place(place.name.clone())?;
            initial.push(place.initial.eval(params)?);
        }
        for t in &self.transitions {
            b.add_transition(t.name.clone())?;
        }
        for (ti, t) in self.transitions.iter().enumerate() {
            let tid = crate::net::TransitionId(ti);
            for (p, w) in &t.inputs {
                let w = w.eval(params)?;
                if w > 0 {
                    b.add_input(crate::net::PlaceId(*p), tid, w)?;
                }
            }
            for (p, w) in &t.outputs {
                let w = w.eval(params)?;
                if w > 0 {
                    b.add_output(tid, crate::net::PlaceId(*p), w)?;
                }
            }
        }
        Ok(MarkedNet::new(b.build()?, Marking::new(initial))?)
    }

    /// Subprocess tag of each transition, in transition order.
    pub fn subprocess_tags(&self) -> Vec<u8> {
        self.transitions.iter().map(|t| t.subprocess).collect()
    }
}
