//! Random small nets and independent oracles shared by the property suite
//! and the acceptance target.
#![allow(dead_code)]

use std::collections::BTreeSet;

use petriforge::net::{Arc, MarkedNet, Marking, NetBuilder, PetriNet, Tokens, TransitionId};
use petriforge::pnml::{parse_pnml, write_pnml};
use petriforge::reachability::{
    build_coverability_graph, build_reachability_graph, CoverToken, ExplorationLimits,
};

/// Dense description of a small net: `pre[t][p]`, `post[t][p]` and the
/// initial marking. Zero entries mean "no arc".
#[derive(Debug, Clone)]
pub struct NetSpec {
    pub pre: Vec<Vec<Tokens>>,
    pub post: Vec<Vec<Tokens>>,
    pub initial: Vec<Tokens>,
}

impl NetSpec {
    pub fn build(&self) -> MarkedNet {
        let places = self.initial.len();
        let mut b = NetBuilder::new();
        let ps: Vec<_> = (0..places)
            .map(|i| b.add_place(format!("p{i}")).unwrap())
            .collect();
        let ts: Vec<_> = (0..self.pre.len())
            .map(|i| b.add_transition(format!("t{i}")).unwrap())
            .collect();
        for (t, row) in self.pre.iter().enumerate() {
            for (p, &w) in row.iter().enumerate() {
                if w > 0 {
                    b.add_input(ps[p], ts[t], w).unwrap();
                }
            }
        }
        for (t, row) in self.post.iter().enumerate() {
            for (p, &w) in row.iter().enumerate() {
                if w > 0 {
                    b.add_output(ts[t], ps[p], w).unwrap();
                }
            }
        }
        MarkedNet::new(b.build().unwrap(), Marking::new(self.initial.clone())).unwrap()
    }
}

/// Draws a net with 1–4 places, 1–4 transitions, weights 0–3 (about half
/// zero) and 0–3 initial tokens per place from any `u64` source.
pub fn random_spec(mut next: impl FnMut() -> u64) -> NetSpec {
    let mut below = |n: u64| (next() % n) as Tokens;
    let places = 1 + below(4) as usize;
    let transitions = 1 + below(4) as usize;
    let mut weight = || if below(2) == 0 { 0 } else { 1 + below(3) };
    let pre = (0..transitions)
        .map(|_| (0..places).map(|_| weight()).collect())
        .collect();
    let post = (0..transitions)
        .map(|_| (0..places).map(|_| weight()).collect())
        .collect();
    let initial = (0..places).map(|_| below(4)).collect();
    NetSpec { pre, post, initial }
}

/// Input and output weights of `t` read straight off the arc list.
fn arc_weights(net: &PetriNet, t: TransitionId) -> (Vec<Tokens>, Vec<Tokens>) {
    let mut pre = vec![0; net.place_count()];
    let mut post = vec![0; net.place_count()];
    for arc in net.arcs() {
        match *arc {
            Arc::Input {
                place,
                transition,
                weight,
            } if transition == t => pre[place.index()] += weight,
            Arc::Output {
                transition,
                place,
                weight,
            } if transition == t => post[place.index()] += weight,
            _ => {}
        }
    }
    (pre, post)
}

fn oracle_enabled(net: &PetriNet, m: &[Tokens], t: TransitionId) -> bool {
    let (pre, _) = arc_weights(net, t);
    m.iter().zip(&pre).all(|(have, need)| have >= need)
}

fn oracle_fire(net: &PetriNet, m: &[Tokens], t: TransitionId) -> Vec<Tokens> {
    let (pre, post) = arc_weights(net, t);
    m.iter()
        .zip(pre.iter().zip(&post))
        .map(|(v, (i, o))| v - i + o)
        .collect()
}

/// Checks the firing rule, Definition-4 and enabled-set properties at `m`.
pub fn check_marking(net: &PetriNet, m: &Marking) -> Result<(), String> {
    let transitions: Vec<TransitionId> = net.transitions().collect();
    let brute: Vec<TransitionId> = transitions
        .iter()
        .copied()
        .filter(|&t| oracle_enabled(net, m.tokens(), t))
        .collect();
    let enabled = net.enabled_set(m).map_err(|e| e.to_string())?;
    if enabled != brute {
        return Err(format!(
            "enabled set {enabled:?} != brute force {brute:?} at {m}"
        ));
    }
    for &t in &transitions {
        let single = net
            .is_concurrently_enabled(m, &[t])
            .map_err(|e| e.to_string())?;
        if single != brute.contains(&t) {
            return Err(format!("singleton concurrency differs for {t:?} at {m}"));
        }
        match net.fire(m, t) {
            Ok(next) => {
                if !brute.contains(&t) {
                    return Err(format!("{t:?} fired while disabled at {m}"));
                }
                let (pre, post) = arc_weights(net, t);
                for p in 0..m.len() {
                    let before = i64::from(m.tokens()[p]);
                    let after = i64::from(next.tokens()[p]);
                    if after - before != i64::from(post[p]) - i64::from(pre[p]) {
                        return Err(format!("token balance broken on p{p} firing {t:?} at {m}"));
                    }
                    if pre[p] == 0 && post[p] == 0 && after != before {
                        return Err(format!("non-local change on p{p} firing {t:?} at {m}"));
                    }
                }
                if next.tokens() != oracle_fire(net, m.tokens(), t).as_slice() {
                    return Err(format!("firing {t:?} at {m} differs from oracle"));
                }
            }
            Err(_) => {
                if brute.contains(&t) {
                    return Err(format!("{t:?} refused while enabled at {m}"));
                }
            }
        }
    }
    // Every subset of a concurrently enabled set is concurrently enabled.
    let n = transitions.len();
    for mask in 0u32..(1 << n) {
        let set: Vec<TransitionId> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| transitions[i])
            .collect();
        if !net
            .is_concurrently_enabled(m, &set)
            .map_err(|e| e.to_string())?
        {
            continue;
        }
        for i in 0..set.len() {
            let mut sub = set.clone();
            sub.remove(i);
            if !net
                .is_concurrently_enabled(m, &sub)
                .map_err(|e| e.to_string())?
            {
                return Err(format!(
                    "subset {sub:?} of concurrent {set:?} not enabled at {m}"
                ));
            }
        }
    }
    Ok(())
}

const ORACLE_CAP: usize = 3_000;

/// Reachable set as the least fixed point of the successor relation,
/// computed semi-naively (only markings new in the last round are expanded),
/// or `None` past the cap.
fn oracle_reachable(net: &PetriNet, m0: &[Tokens]) -> Option<(BTreeSet<Vec<Tokens>>, usize)> {
    let mut seen: BTreeSet<Vec<Tokens>> = BTreeSet::from([m0.to_vec()]);
    let mut delta = vec![m0.to_vec()];
    let mut edges = 0;
    while !delta.is_empty() {
        let mut fresh = Vec::new();
        for m in &delta {
            for t in net.transitions() {
                if oracle_enabled(net, m, t) {
                    edges += 1;
                    let next = oracle_fire(net, m, t);
                    if next.iter().any(|&v| v > 1_000) {
                        return None;
                    }
                    if seen.insert(next.clone()) {
                        fresh.push(next);
                    }
                }
            }
        }
        if seen.len() > ORACLE_CAP {
            return None;
        }
        delta = fresh;
    }
    Some((seen, edges))
}

/// Checks a whole random net: per-marking properties at every reachable
/// marking, reachability against the fixed-point oracle, coverability
/// against reachability and PNML round trip.
pub fn check_net(spec: &NetSpec) -> Result<(), String> {
    let mn = spec.build();
    let net = &mn.net;

    let pnml = write_pnml(&mn);
    let back = parse_pnml(pnml.as_bytes()).map_err(|e| format!("PNML parse: {e}"))?;
    if back.net != mn {
        return Err("PNML round trip changed the net".into());
    }
    if write_pnml(&back.net) != pnml {
        return Err("PNML rewrite is not byte-identical".into());
    }

    let oracle = oracle_reachable(net, mn.initial.tokens());
    let graph = build_reachability_graph(
        &mn,
        ExplorationLimits::with_max_nodes(ORACLE_CAP * 4).unwrap(),
    );
    let cover = build_coverability_graph(&mn);
    match (oracle, graph) {
        (Some((set, edges)), Ok(g)) => {
            let found: BTreeSet<Vec<Tokens>> = g.markings().map(|m| m.to_vec()).collect();
            if found != set {
                return Err(format!(
                    "reachable set {} != oracle {}",
                    found.len(),
                    set.len()
                ));
            }
            if g.node_count() != set.len() || g.edge_count() != edges {
                return Err("graph has duplicate nodes or wrong edge count".into());
            }
            if g.tokens(0) != mn.initial.tokens() {
                return Err("node 0 is not the initial marking".into());
            }
            for m in g.markings() {
                check_marking(net, &Marking::new(m.to_vec()))?;
            }
            if cover.has_omega() {
                return Err("bounded net got ω in its coverability graph".into());
            }
            let covered: BTreeSet<Vec<Tokens>> = cover
                .nodes()
                .map(|n| {
                    n.iter()
                        .map(|v| match v {
                            CoverToken::Finite(x) => *x,
                            CoverToken::Omega => unreachable!(),
                        })
                        .collect()
                })
                .collect();
            if covered != set {
                return Err("coverability graph differs from reachability on a bounded net".into());
            }
        }
        (None, graph) => {
            // Too large for the oracle. An ω means the net is unbounded, so
            // no finite cap can hold its reachability graph; no ω means the
            // coverability nodes are exactly the reachable markings.
            check_marking(net, &mn.initial)?;
            if cover.has_omega() {
                if graph.is_ok() {
                    return Err("ω in coverability graph but reachability finished".into());
                }
            } else {
                let limits = ExplorationLimits::with_max_nodes(cover.node_count()).unwrap();
                let g = build_reachability_graph(&mn, limits)
                    .map_err(|e| format!("no ω but reachability did not fit: {e}"))?;
                if g.node_count() != cover.node_count() {
                    return Err(
                        "coverability and reachability sizes differ on a bounded net".into(),
                    );
                }
            }
        }
        (Some(_), Err(e)) => return Err(format!("exploration failed on a small bounded net: {e}")),
    }
    Ok(())
}
