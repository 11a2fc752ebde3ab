//! PNML import and export for the place/transition core of ISO/IEC 15909-2.
//!
//! Output uses the 2009 grammar with a single page. On input, places,
//! transitions and arcs are collected from every page of the first net; the
//! net type must be a P/T net. Graphics and tool-specific data are skipped and
//! reported as warnings.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::net::{Arc, MarkedNet, Marking, NetBuilder, NetError, Node, Tokens};

pub const PNML_NAMESPACE: &str = "http://www.pnml.org/version-2009/grammar/pnml";
pub const PTNET_TYPE: &str = "http://www.pnml.org/version-2009/grammar/ptnet";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PnmlError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("root element is <{0}>, expected <pnml>")]
    NotPnml(String),
    #[error("document contains no <net>")]
    MissingNet,
    #[error("net '{id}' has type '{net_type}', expected a P/T net")]
    NotPtNet { id: String, net_type: String },
    #[error("<{element}> without an id attribute")]
    MissingId { element: String },
    #[error("duplicate id '{0}'")]
    DuplicateId(String),
    #[error("arc '{arc}' references unknown node '{reference}'")]
    DanglingArc { arc: String, reference: String },
    #[error("arc '{0}' connects two nodes of the same kind")]
    NotBipartite(String),
    #[error("place '{place}' has invalid initial marking '{text}'")]
    BadMarking { place: String, text: String },
    #[error("arc '{arc}' has invalid inscription '{text}'")]
    BadInscription { arc: String, text: String },
    #[error("element '{id}': {source}")]
    Net { id: String, source: NetError },
}

/// Result of a successful import.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PnmlImport {
    pub net: MarkedNet,
    pub warnings: Vec<String>,
}

fn label_text(node: roxmltree::Node<'_, '_>, label: &str) -> Option<String> {
    let el = node
        .children()
        .find(|c| c.is_element() && c.tag_name().name() == label)?;
    let text = el
        .children()
        .find(|c| c.is_element() && c.tag_name().name() == "text")?;
    Some(text.text().unwrap_or("").trim().to_string())
}

/// Parses a PNML document into a marked net.
pub fn parse_pnml(bytes: &[u8]) -> Result<PnmlImport, PnmlError> {
    let text = std::str::from_utf8(bytes).map_err(|e| PnmlError::MalformedXml(e.to_string()))?;
    let doc =
        roxmltree::Document::parse(text).map_err(|e| PnmlError::MalformedXml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "pnml" {
        return Err(PnmlError::NotPnml(root.tag_name().name().to_string()));
    }
    let net_el = root
        .children()
        .find(|c| c.is_element() && c.tag_name().name() == "net")
        .ok_or(PnmlError::MissingNet)?;
    let net_id = net_el.attribute("id").unwrap_or("").to_string();
    let net_type = net_el.attribute("type").unwrap_or("");
    if !net_type.to_ascii_lowercase().contains("ptnet") {
        return Err(PnmlError::NotPtNet {
            id: net_id,
            net_type: net_type.to_string(),
        });
    }

    let mut warnings = Vec::new();
    let mut places = Vec::new();
    let mut transitions = Vec::new();
    let mut arcs = Vec::new();
    collect(
        net_el,
        &mut places,
        &mut transitions,
        &mut arcs,
        &mut warnings,
    );

    let mut ids: HashMap<String, Node> = HashMap::new();
    let mut b = NetBuilder::new();
    let mut initial = Vec::with_capacity(places.len());
    for el in &places {
        let id = element_id(*el)?;
        let name = label_text(*el, "name")
            .filter(|n| !n.is_empty())
            .unwrap_or_else(|| id.clone());
        let tokens = match label_text(*el, "initialMarking") {
            None => 0,
            Some(t) => t.parse::<Tokens>().map_err(|_| PnmlError::BadMarking {
                place: id.clone(),
                text: t.clone(),
            })?,
        };
        let pid = b.add_place(name).map_err(|source| PnmlError::Net {
            id: id.clone(),
            source,
        })?;
        if ids.insert(id.clone(), Node::Place(pid)).is_some() {
            return Err(PnmlError::DuplicateId(id));
        }
        initial.push(tokens);
    }
    for el in &transitions {
        let id = element_id(*el)?;
        let name = label_text(*el, "name")
            .filter(|n| !n.is_empty())
            .unwrap_or_else(|| id.clone());
        let tid = b.add_transition(name).map_err(|source| PnmlError::Net {
            id: id.clone(),
            source,
        })?;
        if ids.insert(id.clone(), Node::Transition(tid)).is_some() {
            return Err(PnmlError::DuplicateId(id));
        }
    }
    let mut arc_ids = std::collections::HashSet::new();
    for el in &arcs {
        let id = element_id(*el)?;
        if ids.contains_key(&id) || !arc_ids.insert(id.clone()) {
            return Err(PnmlError::DuplicateId(id));
        }
        let endpoint = |attr: &str| -> Result<Node, PnmlError> {
            let reference = el.attribute(attr).unwrap_or("");
            ids.get(reference)
                .copied()
                .ok_or_else(|| PnmlError::DanglingArc {
                    arc: id.clone(),
                    reference: reference.to_string(),
                })
        };
        let from = endpoint("source")?;
        let to = endpoint("target")?;
        let weight = match label_text(*el, "inscription") {
            None => 1,
            Some(t) => match t.parse::<Tokens>() {
                Ok(w) if w >= 1 => w,
                _ => {
                    return Err(PnmlError::BadInscription {
                        arc: id.clone(),
                        text: t.clone(),
                    })
                }
            },
        };
        b.add_arc(from, to, weight).map_err(|source| match source {
            NetError::SameKindArc { .. } => PnmlError::NotBipartite(id.clone()),
            source => PnmlError::Net {
                id: id.clone(),
                source,
            },
        })?;
    }
    let net = b.build().map_err(|source| PnmlError::Net {
        id: net_id.clone(),
        source,
    })?;
    let net = MarkedNet::new(net, Marking::new(initial))
        .map_err(|source| PnmlError::Net { id: net_id, source })?;
    Ok(PnmlImport { net, warnings })
}

fn element_id(el: roxmltree::Node<'_, '_>) -> Result<String, PnmlError> {
    el.attribute("id")
        .map(str::to_string)
        .ok_or_else(|| PnmlError::MissingId {
            element: el.tag_name().name().to_string(),
        })
}

fn collect<'a, 'i>(
    parent: roxmltree::Node<'a, 'i>,
    places: &mut Vec<roxmltree::Node<'a, 'i>>,
    transitions: &mut Vec<roxmltree::Node<'a, 'i>>,
    arcs: &mut Vec<roxmltree::Node<'a, 'i>>,
    warnings: &mut Vec<String>,
) {
    for child in parent.children().filter(|c| c.is_element()) {
        match child.tag_name().name() {
            "page" => collect(child, places, transitions, arcs, warnings),
            "place" => {
                note_unknown(child, &["name", "initialMarking"], warnings);
                places.push(child)
            }
            "transition" => {
                note_unknown(child, &["name"], warnings);
                transitions.push(child)
            }
            "arc" => {
                note_unknown(child, &["inscription"], warnings);
                arcs.push(child)
            }
            "name" => {}
            other => {
                let owner = parent.attribute("id").unwrap_or(parent.tag_name().name());
                warnings.push(format!("ignored <{other}> in '{owner}'"));
            }
        }
    }
}

fn note_unknown(el: roxmltree::Node<'_, '_>, known: &[&str], warnings: &mut Vec<String>) {
    for child in el.children().filter(|c| c.is_element()) {
        let tag = child.tag_name().name();
        if !known.contains(&tag) {
            let owner = el.attribute("id").unwrap_or(el.tag_name().name());
            warnings.push(format!("ignored <{tag}> in '{owner}'"));
        }
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}

/// Serializes `mn` as PNML: places, then transitions, then arcs, each in
/// index order. Zero initial markings and unit inscriptions are omitted.
pub fn write_pnml(mn: &MarkedNet) -> String {
    let net = &mn.net;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<pnml xmlns=\"{PNML_NAMESPACE}\">");
    let _ = writeln!(out, "  <net id=\"net\" type=\"{PTNET_TYPE}\">");
    out.push_str("    <page id=\"page\">\n");
    for p in net.places() {
        let _ = writeln!(out, "      <place id=\"p{}\">", p.index());
        let _ = writeln!(
            out,
            "        <name><text>{}</text></name>",
            escape(net.place_name(p))
        );
        let tokens = mn.initial.get(p);
        if tokens > 0 {
            let _ = writeln!(
                out,
                "        <initialMarking><text>{tokens}</text></initialMarking>"
            );
        }
        out.push_str("      </place>\n");
    }
    for t in net.transitions() {
        let _ = writeln!(out, "      <transition id=\"t{}\">", t.index());
        let _ = writeln!(
            out,
            "        <name><text>{}</text></name>",
            escape(net.transition_name(t))
        );
        out.push_str("      </transition>\n");
    }
    for (i, arc) in net.arcs().iter().enumerate() {
        let (source, target) = match arc {
            Arc::Input {
                place, transition, ..
            } => (
                format!("p{}", place.index()),
                format!("t{}", transition.index()),
            ),
            Arc::Output {
                transition, place, ..
            } => (
                format!("t{}", transition.index()),
                format!("p{}", place.index()),
            ),
        };
        if arc.weight() == 1 {
            let _ = writeln!(
                out,
                "      <arc id=\"a{i}\" source=\"{source}\" target=\"{target}\"/>"
            );
        } else {
            let _ = writeln!(
                out,
                "      <arc id=\"a{i}\" source=\"{source}\" target=\"{target}\">"
            );
            let _ = writeln!(
                out,
                "        <inscription><text>{}</text></inscription>",
                arc.weight()
            );
            out.push_str("      </arc>\n");
        }
    }
    out.push_str("    </page>\n  </net>\n</pnml>\n");
    out
}
