//! Parametric production models, their subprocess contracts and parameter
//! sweeps.
//!
//! The two adhesive models are stored as text sources (see [`source`]) and
//! instantiated for a [`ModelParams`]. The no-return variant is derived from
//! the O. schinzii source by a structural edit rather than kept as a copy.

pub mod params;
pub mod source;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::net::{
    blade_net, MarkedNet, Marking, NetBuilder, PetriNet, PlaceId, Tokens, TransitionId,
};
use crate::reachability::{build_reachability_graph, ExplorationLimits, ExploreError};
use params::{ModelParams, ParamError};
use source::{Amount, NetSource, SourceError};

const A_CORANICA_SOURCE: &str = include_str!("../../models/a_coranica.net");
const O_SCHINZII_SOURCE: &str = include_str!("../../models/o_schinzii.net");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ModelVariant {
    ACoranica,
    OSchinzii,
    /// O. schinzii without the change of location between gathering and
    /// processing.
    OSchinziiNoReturn,
    /// Three-place example: two tools and a core make a blade.
    Blade,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 4] = [
        ModelVariant::ACoranica,
        ModelVariant::OSchinzii,
        ModelVariant::OSchinziiNoReturn,
        ModelVariant::Blade,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::ACoranica => "a-coranica",
            ModelVariant::OSchinzii => "o-schinzii",
            ModelVariant::OSchinziiNoReturn => "o-schinzii-no-return",
            ModelVariant::Blade => "blade",
        }
    }

    /// Whether the model depends on [`ModelParams`].
    pub fn is_parametric(self) -> bool {
        self != ModelVariant::Blade
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelVariant {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| ModelError::UnknownModel(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(
        "unknown model '{0}' (expected a-coranica, o-schinzii, o-schinzii-no-return or blade)"
    )]
    UnknownModel(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error("people range {start}..={end} must lie within 1..=64 and be non-empty")]
    BadRange { start: Tokens, end: Tokens },
    #[error("model {0} has no subprocess contracts")]
    NoContracts(ModelVariant),
}

/// The parsed source of a parametric model, with the variant edit applied.
pub fn model_source(variant: ModelVariant) -> Result<NetSource, ModelError> {
    match variant {
        ModelVariant::ACoranica => Ok(NetSource::parse(A_CORANICA_SOURCE)?),
        ModelVariant::OSchinzii => Ok(NetSource::parse(O_SCHINZII_SOURCE)?),
        ModelVariant::OSchinziiNoReturn => {
            let mut src = NetSource::parse(O_SCHINZII_SOURCE)?;
            src.remove_transition("Go back home")?;
            src.remove_place("Start5")?;
            src.remove_place("Start3")?;
            src.add_input(
                "Collecting roots done",
                "Start root preparation",
                Amount::Const(1),
            )?;
            src.add_input(
                "Collecting firewood done",
                "Start lighting",
                Amount::Const(1),
            )?;
            src.set_initial("Start4", Amount::Const(1))?;
            Ok(src)
        }
        ModelVariant::Blade => Err(ModelError::NoContracts(variant)),
    }
}

/// Instantiates a model. The blade example ignores `params` and starts
/// from three tools and two cores.
pub fn build_model(variant: ModelVariant, params: &ModelParams) -> Result<MarkedNet, ModelError> {
    if variant == ModelVariant::Blade {
        return Ok(blade_net(3, 2));
    }
    params.validate()?;
    Ok(model_source(variant)?.instantiate(params)?)
}

/// Subprocess number of each transition, in transition order (all zero for
/// the blade example).
pub fn subprocess_tags(variant: ModelVariant) -> Result<Vec<u8>, ModelError> {
    match variant {
        ModelVariant::Blade => Ok(vec![0]),
        _ => Ok(model_source(variant)?.subprocess_tags()),
    }
}

/// One row of a subprocess contract: the place, the smallest marking that
/// lets the subprocess run to completion, and the marking it leaves behind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ContractRow {
    pub place: &'static str,
    pub initial: Tokens,
    pub expected_final: Tokens,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubprocessContract {
    pub model: ModelVariant,
    pub subprocess: u8,
    pub title: &'static str,
    pub rows: Vec<ContractRow>,
}

const fn row(place: &'static str, initial: Tokens, expected_final: Tokens) -> ContractRow {
    ContractRow {
        place,
        initial,
        expected_final,
    }
}

/// Contracts for the default parameters with one person available.
pub fn subprocess_contracts(variant: ModelVariant) -> Result<Vec<SubprocessContract>, ModelError> {
    let table: Vec<(u8, &'static str, Vec<ContractRow>)> = match variant {
        ModelVariant::ACoranica => vec![
            (
                1,
                "Dig bulbs",
                vec![
                    row("Start1", 1, 0),
                    row("People available", 1, 1),
                    row("Bulbs", 0, 4),
                    row("Start5", 0, 1),
                    row("Digging sticks", 1, 1),
                    row("Bulbs needed", 4, 0),
                ],
            ),
            (
                2,
                "Collect firewood and branches",
                vec![
                    row("Start2", 1, 0),
                    row("People available", 1, 1),
                    row("Collected firewood", 0, 4),
                    row("Collected branches", 0, 4),
                    row("Start3", 0, 1),
                    row("Firewood needed", 4, 0),
                    row("Branches needed", 4, 0),
                ],
            ),
            (
                3,
                "Light fire",
                vec![
                    row("Start3", 1, 0),
                    row("People available", 1, 1),
                    row("Collected firewood", 4, 0),
                    row("Collected branches", 4, 0),
                    row("Fire and coals", 0, 1),
                    row("Firesticks", 1, 1),
                ],
            ),
            (
                4,
                "Collect small and large calcrete blocks",
                vec![
                    row("Start4", 1, 0),
                    row("People available", 1, 1),
                    row("Collected small blocks", 0, 1),
                    row("Collected large blocks", 0, 1),
                    row("Large blocks needed", 1, 0),
                    row("Small blocks needed", 1, 0),
                ],
            ),
            (
                5,
                "Prepare bulbs",
                vec![
                    row("Start5", 1, 0),
                    row("People available", 1, 1),
                    row("Bulbs", 4, 0),
                    row("Fleshy scales", 0, 8),
                    row("Start6", 0, 1),
                    row("Knives", 1, 1),
                    row("Bulb remains", 0, 4),
                    row("Outer scales", 0, 4),
                ],
            ),
            (
                6,
                "Heat selected scales",
                vec![
                    row("Start6", 1, 0),
                    row("People available", 1, 1),
                    row("Fire and coals", 1, 1),
                    row("Fleshy scales", 8, 0),
                    row("Collected large blocks", 1, 1),
                    row("Scales on large block", 0, 8),
                    row("Coals", 0, 1),
                    row("# First scales", 1, 0),
                    row("Ready to dust", 0, 1),
                ],
            ),
            (
                7,
                "Pound",
                vec![
                    row("Scales on large block", 8, 0),
                    row("People available", 1, 1),
                    row("Collected small blocks", 1, 1),
                    row("# Scales available for kneading", 0, 8),
                    row("Scales ready for kneading", 0, 8),
                    row("All scales pounded", 0, 1),
                ],
            ),
            (
                8,
                "Knead",
                vec![
                    row("# Scales available for kneading", 1, 0),
                    row("People available", 1, 1),
                    row("Scales ready for kneading", 1, 0),
                    row("Fire and coals", 1, 1),
                    row("All scales pounded", 1, 0),
                    row("Adhesive", 0, 1),
                ],
            ),
        ],
        ModelVariant::OSchinzii => vec![
            (
                1,
                "Dig roots",
                vec![
                    row("Start1", 1, 0),
                    row("People available", 1, 1),
                    row("Extracted roots", 0, 4),
                    row("Collecting roots done", 0, 1),
                    row("O. schinzii bush", 1, 1),
                    row("Digging sticks", 1, 1),
                    row("Roots needed", 4, 0),
                    row("Sand", 0, 3),
                ],
            ),
            (
                2,
                "Collect firewood",
                vec![
                    row("Start2", 1, 0),
                    row("People available", 1, 1),
                    row("Combretum branches", 0, 4),
                    row("T. sericea branches", 0, 4),
                    row("Collecting firewood done", 0, 1),
                    row("Combretum needed", 4, 0),
                    row("T. sericea needed", 4, 0),
                ],
            ),
            (
                3,
                "Light fire",
                vec![
                    row("Start3", 1, 0),
                    row("People available", 1, 1),
                    row("T. sericea branches", 4, 0),
                    row("Combretum branches", 4, 0),
                    row("Fire and coals", 0, 1),
                    row("Start6", 0, 1),
                    row("Firesticks", 1, 1),
                ],
            ),
            (
                4,
                "Make applicator",
                vec![
                    row("Start4", 1, 0),
                    row("People available", 1, 1),
                    row("Applicator", 0, 1),
                    row("Start8", 0, 1),
                    row("Knives", 1, 1),
                    row("G. flava branch", 1, 0),
                ],
            ),
            (
                5,
                "Root preparation",
                vec![
                    row("Start5", 1, 0),
                    row("People available", 1, 1),
                    row("Extracted roots", 4, 0),
                    row("Roots with slits", 0, 4),
                    row("Start7", 0, 1),
                    row("Knives", 1, 1),
                ],
            ),
            (
                6,
                "Burn and crush grass",
                vec![
                    row("Start6", 1, 0),
                    row("People available", 1, 1),
                    row("Black powder", 0, 4),
                    row("Fire and coals", 1, 1),
                    row("Grass needed", 4, 0),
                ],
            ),
            (
                7,
                "Heat roots",
                vec![
                    row("Start7", 1, 0),
                    row("People available", 1, 1),
                    row("Fire and coals", 1, 1),
                    row("Roots with slits", 4, 0),
                    row("Roots with latex", 0, 4),
                    row("Coals", 0, 1),
                ],
            ),
            (
                8,
                "Dip and mix latex",
                vec![
                    row("Start8", 1, 0),
                    row("People available", 1, 1),
                    row("Roots with latex", 4, 0),
                    row("Applicator", 1, 1),
                    row("Black powder", 4, 0),
                    row("Glue carrier", 1, 1),
                    row("Adhesive", 0, 1),
                ],
            ),
        ],
        other => return Err(ModelError::NoContracts(other)),
    };
    Ok(table
        .into_iter()
        .map(|(subprocess, title, rows)| SubprocessContract {
            model: variant,
            subprocess,
            title,
            rows,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowCheck {
    pub place: String,
    pub expected: Tokens,
    pub observed: Tokens,
}

/// Outcome of running one subprocess in isolation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContractReport {
    pub subprocess: u8,
    pub title: String,
    pub satisfied: bool,
    /// Per-row comparison at the terminal marking closest to the contract.
    pub rows: Vec<RowCheck>,
    /// Places outside the contract that still carry tokens at that marking.
    pub plumbing: Vec<(String, Tokens)>,
    /// Rows naming a place the model does not have.
    pub missing_places: Vec<String>,
    pub states: usize,
}

/// Restricts `net` to the transitions selected by `keep`, keeping every place.
fn restrict(net: &PetriNet, keep: impl Fn(TransitionId) -> bool) -> PetriNet {
    let mut b = NetBuilder::new();
    for p in net.places() {
        b.add_place(net.place_name(p)).expect("names are unique");
    }
    for t in net.transitions().filter(|&t| keep(t)) {
        let nt = b
            .add_transition(net.transition_name(t))
            .expect("names are unique");
        for &(p, w) in net.preset(t) {
            b.add_input(PlaceId(p), nt, w).expect("valid arc");
        }
        for &(p, w) in net.postset(t) {
            b.add_output(nt, PlaceId(p), w).expect("valid arc");
        }
    }
    b.build().expect("subprocess has transitions")
}

/// Runs the contract's subprocess alone from the contract's initial
/// marking (all other places empty) and looks for a terminal marking that
/// matches every final value.
pub fn validate_contract(contract: &SubprocessContract) -> Result<ContractReport, ModelError> {
    let params = ModelParams::with_people(1);
    let full = build_model(contract.model, &params)?;
    let tags = subprocess_tags(contract.model)?;
    let net = restrict(&full.net, |t| tags[t.index()] == contract.subprocess);

    let mut initial = Marking::zeros(net.place_count());
    let mut rows = Vec::new();
    let mut missing_places = Vec::new();
    for r in &contract.rows {
        match net.place_by_name(r.place) {
            Some(p) => {
                initial.set(p, r.initial);
                rows.push((p, r));
            }
            None => missing_places.push(r.place.to_string()),
        }
    }
    let mn = MarkedNet::new(net, initial).map_err(SourceError::from)?;
    let graph = build_reachability_graph(&mn, ExplorationLimits::default())?;
    let terminals = crate::reachability::deadlock_markings(&mn.net, &graph);

    let mismatches = |node: usize| {
        let m = graph.tokens(node);
        rows.iter()
            .filter(|(p, r)| m[p.index()] != r.expected_final)
            .count()
    };
    let best = terminals.iter().copied().min_by_key(|&n| mismatches(n));
    let (row_checks, plumbing, satisfied) = match best {
        Some(node) => {
            let m = graph.tokens(node);
            let checks: Vec<RowCheck> = rows
                .iter()
                .map(|(p, r)| RowCheck {
                    place: r.place.to_string(),
                    expected: r.expected_final,
                    observed: m[p.index()],
                })
                .collect();
            let plumbing = mn
                .net
                .places()
                .filter(|p| m[p.index()] > 0 && !rows.iter().any(|(q, _)| q == p))
                .map(|p| (mn.net.place_name(p).to_string(), m[p.index()]))
                .collect();
            let ok = checks.iter().all(|c| c.expected == c.observed) && missing_places.is_empty();
            (checks, plumbing, ok)
        }
        None => (Vec::new(), Vec::new(), false),
    };
    Ok(ContractReport {
        subprocess: contract.subprocess,
        title: contract.title.to_string(),
        satisfied,
        rows: row_checks,
        plumbing,
        missing_places,
        states: graph.node_count(),
    })
}

/// Checks every contract of a model.
pub fn validate_model(variant: ModelVariant) -> Result<Vec<ContractReport>, ModelError> {
    subprocess_contracts(variant)?
        .iter()
        .map(validate_contract)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub p: Tokens,
    pub states: usize,
    pub edges: usize,
}

pub const MAX_PEOPLE: Tokens = 64;

/// Reachability-graph size for every number of people in `start..=end`,
/// holding all other parameters fixed.
pub fn sweep_people(
    variant: ModelVariant,
    base: &ModelParams,
    start: Tokens,
    end: Tokens,
    limits: ExplorationLimits,
) -> Result<Vec<SweepRow>, ModelError> {
    if start == 0 || start > end || end > MAX_PEOPLE {
        return Err(ModelError::BadRange { start, end });
    }
    (start..=end)
        .map(|p| {
            let mut params = base.clone();
            params.p = p;
            let mn = build_model(variant, &params)?;
            let g = build_reachability_graph(&mn, limits)?;
            Ok(SweepRow {
                p,
                states: g.node_count(),
                edges: g.edge_count(),
            })
        })
        .collect()
}
