//! Place/transition nets: structure, markings and the firing rule.
//!
//! A [`PetriNet`] is immutable once built. Places and transitions are indexed
//! densely in declaration order, and every vector indexed by place (markings,
//! pre/post sets) follows that order.

use std::fmt;

use thiserror::Error;

/// Token count held by a single place.
pub type Tokens = u32;

/// Index of a place in its net's declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaceId(pub usize);

/// Index of a transition in its net's declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionId(pub usize);

impl PlaceId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl TransitionId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Either endpoint of an arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Place(PlaceId),
    Transition(TransitionId),
}

/// A weighted arc, stored in declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Arc {
    /// Place to transition.
    Input {
        place: PlaceId,
        transition: TransitionId,
        weight: Tokens,
    },
    /// Transition to place.
    Output {
        transition: TransitionId,
        place: PlaceId,
        weight: Tokens,
    },
}

impl Arc {
    pub fn weight(&self) -> Tokens {
        match *self {
            Arc::Input { weight, .. } | Arc::Output { weight, .. } => weight,
        }
    }

    pub fn place(&self) -> PlaceId {
        match *self {
            Arc::Input { place, .. } | Arc::Output { place, .. } => place,
        }
    }

    pub fn transition(&self) -> TransitionId {
        match *self {
            Arc::Input { transition, .. } | Arc::Output { transition, .. } => transition,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("net has no places")]
    NoPlaces,
    #[error("net has no transitions")]
    NoTransitions,
    #[error("duplicate place name '{0}'")]
    DuplicatePlace(String),
    #[error("duplicate transition name '{0}'")]
    DuplicateTransition(String),
    #[error("arc {from} -> {to} has weight 0")]
    ZeroWeight { from: String, to: String },
    #[error("duplicate arc {from} -> {to}")]
    DuplicateArc { from: String, to: String },
    #[error("arc {from} -> {to} connects two nodes of the same kind")]
    SameKindArc { from: String, to: String },
    #[error("place index {0} out of range")]
    UnknownPlace(usize),
    #[error("transition index {0} out of range")]
    UnknownTransition(usize),
    #[error("marking has {got} entries but the net has {expected} places")]
    MarkingSize { expected: usize, got: usize },
    #[error("transition '{0}' is not enabled")]
    NotEnabled(String),
    #[error("token count overflow on place '{0}'")]
    Overflow(String),
}

/// A marking: one token count per place, in place index order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(Vec<Tokens>);

impl Marking {
    pub fn new(tokens: Vec<Tokens>) -> Self {
        Marking(tokens)
    }

    pub fn zeros(places: usize) -> Self {
        Marking(vec![0; places])
    }

    pub fn tokens(&self) -> &[Tokens] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, place: PlaceId) -> Tokens {
        self.0[place.0]
    }

    pub fn set(&mut self, place: PlaceId, tokens: Tokens) {
        self.0[place.0] = tokens;
    }

    pub fn into_inner(self) -> Vec<Tokens> {
        self.0
    }
}

impl From<Vec<Tokens>> for Marking {
    fn from(v: Vec<Tokens>) -> Self {
        Marking(v)
    }
}

impl std::ops::Index<PlaceId> for Marking {
    type Output = Tokens;
    fn index(&self, p: PlaceId) -> &Tokens {
        &self.0[p.0]
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Static structure of a place/transition net.
///
/// Weights are kept twice: as the declared arc list (used for serialization)
/// and as per-transition sparse pre/post vectors sorted by place index (used
/// by the firing rule).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PetriNet {
    places: Vec<String>,
    transitions: Vec<String>,
    arcs: Vec<Arc>,
    pre: Vec<Vec<(usize, Tokens)>>,
    post: Vec<Vec<(usize, Tokens)>>,
}

impl PetriNet {
    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn places(&self) -> impl Iterator<Item = PlaceId> + '_ {
        (0..self.places.len()).map(PlaceId)
    }

    pub fn transitions(&self) -> impl Iterator<Item = TransitionId> + '_ {
        (0..self.transitions.len()).map(TransitionId)
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p.0]
    }

    pub fn transition_name(&self, t: TransitionId) -> &str {
        &self.transitions[t.0]
    }

    pub fn place_names(&self) -> &[String] {
        &self.places
    }

    pub fn transition_names(&self) -> &[String] {
        &self.transitions
    }

    pub fn place_by_name(&self, name: &str) -> Option<PlaceId> {
        self.places.iter().position(|n| n == name).map(PlaceId)
    }

    pub fn transition_by_name(&self, name: &str) -> Option<TransitionId> {
        self.transitions
            .iter()
            .position(|n| n == name)
            .map(TransitionId)
    }

    /// Arcs in declaration order.
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Extended weight function: 0 when there is no arc.
    pub fn weight(&self, from: Node, to: Node) -> Tokens {
        let lookup = |set: &[(usize, Tokens)], p: usize| {
            set.iter().find(|(q, _)| *q == p).map_or(0, |(_, w)| *w)
        };
        match (from, to) {
            (Node::Place(p), Node::Transition(t)) => {
                self.pre.get(t.0).map_or(0, |set| lookup(set, p.0))
            }
            (Node::Transition(t), Node::Place(p)) => {
                self.post.get(t.0).map_or(0, |set| lookup(set, p.0))
            }
            _ => 0,
        }
    }

    /// Input places of `t` with their arc weights, sorted by place index.
    pub fn preset(&self, t: TransitionId) -> &[(usize, Tokens)] {
        &self.pre[t.0]
    }

    /// Output places of `t` with their arc weights, sorted by place index.
    pub fn postset(&self, t: TransitionId) -> &[(usize, Tokens)] {
        &self.post[t.0]
    }

    fn check_transition(&self, t: TransitionId) -> Result<(), NetError> {
        if t.0 < self.transitions.len() {
            Ok(())
        } else {
            Err(NetError::UnknownTransition(t.0))
        }
    }

    pub fn check_marking(&self, m: &[Tokens]) -> Result<(), NetError> {
        if m.len() == self.places.len() {
            Ok(())
        } else {
            Err(NetError::MarkingSize {
                expected: self.places.len(),
                got: m.len(),
            })
        }
    }

    /// Enabling test without bounds checks; `m` must be sized for the net.
    #[inline]
    pub(crate) fn enables(&self, m: &[Tokens], t: usize) -> bool {
        self.pre[t].iter().all(|&(p, w)| m[p] >= w)
    }

    /// Writes the successor of `m` under `t` into `out`. The caller guarantees
    /// that `t` is enabled at `m`.
    #[inline]
    pub(crate) fn fire_into(
        &self,
        m: &[Tokens],
        t: usize,
        out: &mut Vec<Tokens>,
    ) -> Result<(), NetError> {
        out.clear();
        out.extend_from_slice(m);
        for &(p, w) in &self.pre[t] {
            out[p] -= w;
        }
        for &(p, w) in &self.post[t] {
            out[p] = out[p]
                .checked_add(w)
                .ok_or_else(|| NetError::Overflow(self.places[p].clone()))?;
        }
        Ok(())
    }

    /// `m` enables `t` iff every input place holds at least the arc weight.
    pub fn is_enabled(&self, m: &Marking, t: TransitionId) -> Result<bool, NetError> {
        self.check_transition(t)?;
        self.check_marking(m.tokens())?;
        Ok(self.enables(m.tokens(), t.0))
    }

    /// Fires `t` at `m`, returning the successor marking.
    pub fn fire(&self, m: &Marking, t: TransitionId) -> Result<Marking, NetError> {
        if !self.is_enabled(m, t)? {
            return Err(NetError::NotEnabled(self.transitions[t.0].clone()));
        }
        let mut out = Vec::with_capacity(m.len());
        self.fire_into(m.tokens(), t.0, &mut out)?;
        Ok(Marking(out))
    }

    /// All transitions enabled at `m`, ascending by index.
    pub fn enabled_set(&self, m: &Marking) -> Result<Vec<TransitionId>, NetError> {
        self.check_marking(m.tokens())?;
        Ok((0..self.transitions.len())
            .filter(|&t| self.enables(m.tokens(), t))
            .map(TransitionId)
            .collect())
    }

    /// Whether the set `ts` is concurrently enabled at `m`: the summed input
    /// demand of all members fits in every place. Duplicates in `ts` are
    /// ignored, so a transition is never concurrent with itself.
    pub fn is_concurrently_enabled(
        &self,
        m: &Marking,
        ts: &[TransitionId],
    ) -> Result<bool, NetError> {
        self.check_marking(m.tokens())?;
        for &t in ts {
            self.check_transition(t)?;
        }
        let mut members: Vec<usize> = ts.iter().map(|t| t.0).collect();
        members.sort_unstable();
        members.dedup();
        let mut demand = vec![0u64; self.places.len()];
        for t in members {
            for &(p, w) in &self.pre[t] {
                demand[p] += u64::from(w);
            }
        }
        Ok(demand
            .iter()
            .zip(m.tokens())
            .all(|(&d, &have)| d <= u64::from(have)))
    }

    /// Size of the largest concurrently enabled subset of the enabled set.
    pub fn max_concurrency_degree(&self, m: &Marking) -> Result<usize, NetError> {
        let enabled = self.enabled_set(m)?;
        let mut budget: Vec<u64> = m.tokens().iter().map(|&v| u64::from(v)).collect();
        let mut best = 0;
        self.concurrency_search(&enabled, 0, 0, &mut budget, &mut best);
        Ok(best)
    }

    fn concurrency_search(
        &self,
        enabled: &[TransitionId],
        next: usize,
        chosen: usize,
        budget: &mut [u64],
        best: &mut usize,
    ) {
        if chosen > *best {
            *best = chosen;
        }
        if next == enabled.len() || chosen + (enabled.len() - next) <= *best {
            return;
        }
        let pre = &self.pre[enabled[next].0];
        if pre.iter().all(|&(p, w)| budget[p] >= u64::from(w)) {
            for &(p, w) in pre {
                budget[p] -= u64::from(w);
            }
            self.concurrency_search(enabled, next + 1, chosen + 1, budget, best);
            for &(p, w) in pre {
                budget[p] += u64::from(w);
            }
        }
        self.concurrency_search(enabled, next + 1, chosen, budget, best);
    }
}

/// Validating constructor for [`PetriNet`].
#[derive(Debug, Default, Clone)]
pub struct NetBuilder {
    places: Vec<String>,
    transitions: Vec<String>,
    arcs: Vec<Arc>,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_place(&mut self, name: impl Into<String>) -> Result<PlaceId, NetError> {
        let name = name.into();
        if self.places.contains(&name) {
            return Err(NetError::DuplicatePlace(name));
        }
        self.places.push(name);
        Ok(PlaceId(self.places.len() - 1))
    }

    pub fn add_transition(&mut self, name: impl Into<String>) -> Result<TransitionId, NetError> {
        let name = name.into();
        if self.transitions.contains(&name) {
            return Err(NetError::DuplicateTransition(name));
        }
        self.transitions.push(name);
        Ok(TransitionId(self.transitions.len() - 1))
    }

    pub fn place_by_name(&self, name: &str) -> Option<PlaceId> {
        self.places.iter().position(|n| n == name).map(PlaceId)
    }

    pub fn transition_by_name(&self, name: &str) -> Option<TransitionId> {
        self.transitions
            .iter()
            .position(|n| n == name)
            .map(TransitionId)
    }

    fn node_name(&self, n: Node) -> String {
        match n {
            Node::Place(p) => self
                .places
                .get(p.0)
                .cloned()
                .unwrap_or_else(|| format!("p#{}", p.0)),
            Node::Transition(t) => self
                .transitions
                .get(t.0)
                .cloned()
                .unwrap_or_else(|| format!("t#{}", t.0)),
        }
    }

    /// Adds an arc between two nodes of different kinds.
    pub fn add_arc(&mut self, from: Node, to: Node, weight: Tokens) -> Result<(), NetError> {
        let arc = match (from, to) {
            (Node::Place(place), Node::Transition(transition)) => Arc::Input {
                place,
                transition,
                weight,
            },
            (Node::Transition(transition), Node::Place(place)) => Arc::Output {
                transition,
                place,
                weight,
            },
            _ => {
                return Err(NetError::SameKindArc {
                    from: self.node_name(from),
                    to: self.node_name(to),
                })
            }
        };
        if arc.place().0 >= self.places.len() {
            return Err(NetError::UnknownPlace(arc.place().0));
        }
        if arc.transition().0 >= self.transitions.len() {
            return Err(NetError::UnknownTransition(arc.transition().0));
        }
        if weight == 0 {
            return Err(NetError::ZeroWeight {
                from: self.node_name(from),
                to: self.node_name(to),
            });
        }
        let duplicate = self.arcs.iter().any(|a| {
            std::mem::discriminant(a) == std::mem::discriminant(&arc)
                && a.place() == arc.place()
                && a.transition() == arc.transition()
        });
        if duplicate {
            return Err(NetError::DuplicateArc {
                from: self.node_name(from),
                to: self.node_name(to),
            });
        }
        self.arcs.push(arc);
        Ok(())
    }

    pub fn add_input(
        &mut self,
        place: PlaceId,
        transition: TransitionId,
        weight: Tokens,
    ) -> Result<(), NetError> {
        self.add_arc(Node::Place(place), Node::Transition(transition), weight)
    }

    pub fn add_output(
        &mut self,
        transition: TransitionId,
        place: PlaceId,
        weight: Tokens,
    ) -> Result<(), NetError> {
        self.add_arc(Node::Transition(transition), Node::Place(place), weight)
    }

    pub fn build(self) -> Result<PetriNet, NetError> {
        if self.places.is_empty() {
            return Err(NetError::NoPlaces);
        }
        if self.transitions.is_empty() {
            return Err(NetError::NoTransitions);
        }
        let mut pre = vec![Vec::new(); self.transitions.len()];
        let mut post = vec![Vec::new(); self.transitions.len()];
        for arc in &self.arcs {
            match *arc {
                Arc::Input {
                    place,
                    transition,
                    weight,
                } => pre[transition.0].push((place.0, weight)),
                Arc::Output {
                    transition,
                    place,
                    weight,
                } => post[transition.0].push((place.0, weight)),
            }
        }
        for set in pre.iter_mut().chain(post.iter_mut()) {
            set.sort_unstable();
        }
        Ok(PetriNet {
            places: self.places,
            transitions: self.transitions,
            arcs: self.arcs,
            pre,
            post,
        })
    }
}

/// A net together with its initial marking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedNet {
    pub net: PetriNet,
    pub initial: Marking,
}

impl MarkedNet {
    pub fn new(net: PetriNet, initial: Marking) -> Result<Self, NetError> {
        net.check_marking(initial.tokens())?;
        Ok(MarkedNet { net, initial })
    }

    /// Tokens of the named place in the initial marking.
    pub fn initial_tokens(&self, place: &str) -> Option<Tokens> {
        self.net.place_by_name(place).map(|p| self.initial.get(p))
    }
}

/// The three-place blade net: one firing uses up two tools and one core to
/// make one blade.
pub fn blade_net(tools: Tokens, cores: Tokens) -> MarkedNet {
    let mut b = NetBuilder::new();
    let tools_p = b.add_place("Tools").expect("fresh name");
    let cores_p = b.add_place("Cores").expect("fresh name");
    let blades_p = b.add_place("Blades").expect("fresh name");
    let t1 = b.add_transition("t1").expect("fresh name");
    b.add_input(tools_p, t1, 2).expect("valid arc");
    b.add_input(cores_p, t1, 1).expect("valid arc");
    b.add_output(t1, blades_p, 1).expect("valid arc");
    let net = b.build().expect("blade net is well formed");
    MarkedNet::new(net, Marking::new(vec![tools, cores, 0])).expect("sized marking")
}
