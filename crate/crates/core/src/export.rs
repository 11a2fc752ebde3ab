//! Graphviz DOT views of nets and reachability graphs, and CSV for sweeps.

use std::fmt::Write as _;

use thiserror::Error;

use crate::models::SweepRow;
use crate::net::{Arc, MarkedNet, Marking};
use crate::reachability::ReachabilityGraph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExportError {
    #[error("sweep has no rows")]
    EmptySweep,
    #[error("sweep rows are not in ascending order of p at p={0}")]
    Unordered(u32),
}

fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for ch in text.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(ch),
        }
    }
    out.push('"');
    out
}

/// Places become circles labelled with their name and token count,
/// transitions become boxes. Weights of 2 or more label their arc.
pub fn export_dot_net(mn: &MarkedNet) -> String {
    let net = &mn.net;
    let mut out = String::from("digraph net {\n  rankdir=LR;\n");
    for p in net.places() {
        let label = format!("{}\n{}", net.place_name(p), mn.initial.get(p));
        let _ = writeln!(
            out,
            "  p{} [shape=circle, label={}];",
            p.index(),
            quote(&label)
        );
    }
    for t in net.transitions() {
        let _ = writeln!(
            out,
            "  t{} [shape=box, label={}];",
            t.index(),
            quote(net.transition_name(t))
        );
    }
    for arc in net.arcs() {
        let (from, to) = match arc {
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
        if arc.weight() >= 2 {
            let _ = writeln!(out, "  {from} -> {to} [label=\"{}\"];", arc.weight());
        } else {
            let _ = writeln!(out, "  {from} -> {to};");
        }
    }
    out.push_str("}\n");
    out
}

/// Nodes are labelled with their marking vectors and edges with the names
/// of the transitions that connect them. Node 0 is the initial marking.
pub fn export_dot_graph(mn: &MarkedNet, g: &ReachabilityGraph) -> String {
    let mut out = String::from("digraph reachability {\n");
    for n in 0..g.node_count() {
        let label = Marking::new(g.tokens(n).to_vec()).to_string();
        let _ = writeln!(out, "  m{n} [label={}];", quote(&label));
    }
    for e in g.edges() {
        let _ = writeln!(
            out,
            "  m{} -> m{} [label={}];",
            e.from,
            e.to,
            quote(mn.net.transition_name(e.transition))
        );
    }
    out.push_str("}\n");
    out
}

/// `p,states,edges` header followed by one row per point, ascending in p.
pub fn export_sweep_csv(rows: &[SweepRow]) -> Result<String, ExportError> {
    if rows.is_empty() {
        return Err(ExportError::EmptySweep);
    }
    let mut out = String::from("p,states,edges\n");
    let mut last = None;
    for r in rows {
        if last.is_some_and(|l| r.p <= l) {
            return Err(ExportError::Unordered(r.p));
        }
        last = Some(r.p);
        let _ = writeln!(out, "{},{},{}", r.p, r.states, r.edges);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::blade_net;
    use crate::reachability::{build_reachability_graph, ExplorationLimits};

    #[test]
    fn blade_net_dot() {
        let dot = export_dot_net(&blade_net(3, 2));
        assert_eq!(dot.matches("shape=circle").count(), 3);
        assert_eq!(dot.matches("shape=box").count(), 1);
        assert_eq!(dot.matches("->").count(), 3);
        assert_eq!(dot.matches("label=\"2\"").count(), 1);
        assert!(dot.contains("label=\"Tools\\n3\""));
    }

    #[test]
    fn blade_graph_dot() {
        let mn = blade_net(3, 1);
        let g = build_reachability_graph(&mn, ExplorationLimits::default()).unwrap();
        let dot = export_dot_graph(&mn, &g);
        assert!(dot.contains("m0 [label=\"(3, 1, 0)\"];"));
        assert!(dot.contains("m1 [label=\"(1, 0, 1)\"];"));
        assert!(dot.contains("m0 -> m1 [label=\"t1\"];"));
        assert_eq!(dot.matches("->").count(), 1);

        let dead = blade_net(1, 1);
        let g = build_reachability_graph(&dead, ExplorationLimits::default()).unwrap();
        let dot = export_dot_graph(&dead, &g);
        assert_eq!(dot.matches("[label=").count(), 1);
        assert_eq!(dot.matches("->").count(), 0);
    }

    #[test]
    fn sweep_csv() {
        let row = |p, states, edges| SweepRow { p, states, edges };
        assert_eq!(
            export_sweep_csv(&[row(1, 2, 1)]).unwrap(),
            "p,states,edges\n1,2,1\n"
        );
        assert_eq!(
            export_sweep_csv(&[row(1, 621, 1000)])
                .unwrap()
                .lines()
                .count(),
            2
        );
        assert_eq!(export_sweep_csv(&[]), Err(ExportError::EmptySweep));
        assert_eq!(
            export_sweep_csv(&[row(2, 1, 0), row(1, 1, 0)]),
            Err(ExportError::Unordered(1))
        );
    }
}
