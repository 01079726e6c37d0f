//! Integral max-flow and the assignment integralizer.
//!
//! Once the set of open balls is fixed, assigning points is a bipartite
//! transportation problem with integral capacities, so any fractional
//! assignment can be replaced by an integral one of the same size.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use crate::arith::Quadratic;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rounding::RoundedSolution;

#[derive(Clone, Debug)]
struct Arc {
    to: usize,
    cap: i64,
    flow: i64,
    rev: usize,
}

/// Directed network with integer capacities.
#[derive(Clone, Debug, Default)]
pub struct FlowNetwork {
    adj: Vec<Vec<Arc>>,
    arcs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxFlow {
    pub value: u64,
    /// Flow on each arc, in insertion order.
    pub arc_flows: Vec<u64>,
    /// `true` for nodes on the source side of a minimum cut.
    pub source_side: Vec<bool>,
    /// Capacity of the cut described by `source_side`; equals `value`.
    pub cut_capacity: u64,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { adj: vec![Vec::new(); nodes], arcs: Vec::new() }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn add_arc(&mut self, from: usize, to: usize, cap: u64) -> usize {
        let fwd = self.adj[from].len();
        let back = self.adj[to].len() + usize::from(from == to);
        let cap = i64::try_from(cap).unwrap_or(i64::MAX);
        self.adj[from].push(Arc { to, cap, flow: 0, rev: back });
        self.adj[to].push(Arc { to: from, cap: 0, flow: 0, rev: fwd });
        self.arcs.push((from, fwd));
        self.arcs.len() - 1
    }

    /// Edmonds–Karp: breadth-first augmenting paths, arcs scanned in
    /// insertion order, so the result is deterministic.
    pub fn max_flow(mut self, source: usize, sink: usize) -> MaxFlow {
        let n = self.adj.len();
        let mut value = 0u64;
        if source != sink {
            loop {
                let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
                let mut seen = vec![false; n];
                seen[source] = true;
                let mut queue = VecDeque::from([source]);
                while let Some(u) = queue.pop_front() {
                    if u == sink {
                        break;
                    }
                    for (i, arc) in self.adj[u].iter().enumerate() {
                        if !seen[arc.to] && arc.cap > arc.flow {
                            seen[arc.to] = true;
                            parent[arc.to] = Some((u, i));
                            queue.push_back(arc.to);
                        }
                    }
                }
                if !seen[sink] {
                    break;
                }
                let mut bottleneck = i64::MAX;
                let mut v = sink;
                while let Some((u, i)) = parent[v] {
                    let arc = &self.adj[u][i];
                    bottleneck = bottleneck.min(arc.cap - arc.flow);
                    v = u;
                }
                let mut v = sink;
                while let Some((u, i)) = parent[v] {
                    self.adj[u][i].flow += bottleneck;
                    let rev = self.adj[u][i].rev;
                    self.adj[v][rev].flow -= bottleneck;
                    v = u;
                }
                value += bottleneck as u64;
            }
        }
        let source_side = self.residual_reachable(source);
        let cut_capacity = self
            .arcs
            .iter()
            .map(|&(u, i)| {
                let arc = &self.adj[u][i];
                if source_side[u] && !source_side[arc.to] {
                    arc.cap as u64
                } else {
                    0
                }
            })
            .sum();
        let arc_flows = self.arcs.iter().map(|&(u, i)| self.adj[u][i].flow as u64).collect();
        MaxFlow { value, arc_flows, source_side, cut_capacity }
    }

    fn residual_reachable(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for arc in &self.adj[u] {
                if !seen[arc.to] && arc.cap > arc.flow {
                    seen[arc.to] = true;
                    queue.push_back(arc.to);
                }
            }
        }
        seen
    }
}

/// Points that cannot all be served, with the open balls they can reach:
/// the point side of a minimum cut.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutWitness {
    pub assigned: usize,
    pub required: usize,
    pub points: Vec<usize>,
    pub balls: Vec<usize>,
}

/// Source → point (1), point → ball when the point lies in the expanded
/// ball (1), ball → sink (capacity).
struct AssignmentNetwork {
    network: FlowNetwork,
    source: usize,
    sink: usize,
    pair_arcs: Vec<(usize, usize, usize)>,
}

fn build_network(instance: &Instance, open: &[(usize, Quadratic)]) -> AssignmentNetwork {
    let demand = instance.demand();
    let (np, nb) = (demand.len(), open.len());
    let source = 0;
    let sink = 1 + np + nb;
    let mut network = FlowNetwork::new(sink + 1);
    for k in 0..np {
        network.add_arc(source, 1 + k, 1);
    }
    let mut pair_arcs = Vec::new();
    for (k, &p) in demand.iter().enumerate() {
        for (slot, (ball, beta)) in open.iter().enumerate() {
            if instance.contains_expanded(*ball, p, beta) {
                let arc = network.add_arc(1 + k, 1 + np + slot, 1);
                pair_arcs.push((arc, p, *ball));
            }
        }
    }
    for (slot, (ball, _)) in open.iter().enumerate() {
        network.add_arc(1 + np + slot, sink, instance.ball(*ball).capacity);
    }
    AssignmentNetwork { network, source, sink, pair_arcs }
}

/// Largest number of demand points that can be assigned to `open` balls,
/// each used at its paired expansion.
pub fn max_assignable(instance: &Instance, open: &[(usize, Quadratic)]) -> usize {
    let net = build_network(instance, open);
    net.network.max_flow(net.source, net.sink).value as usize
}

/// An integral assignment `φ` of every demand point to an open ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralAssignment {
    /// Open balls with the expansion each may use.
    pub open: BTreeMap<usize, Quadratic>,
    /// Demand point → ball.
    pub assign: BTreeMap<usize, usize>,
}

impl IntegralAssignment {
    pub fn size(&self) -> usize {
        self.open.len()
    }

    pub fn load(&self, ball: usize) -> usize {
        self.assign.values().filter(|&&b| b == ball).count()
    }
}

/// Integral assignment for a fixed set of open balls, or the min-cut witness
/// when no assignment of all demand points exists.
pub fn assign_integrally(instance: &Instance, open: &[(usize, Quadratic)]) -> Result<IntegralAssignment, CutWitness> {
    let net = build_network(instance, open);
    let np = instance.demand().len();
    let pair_arcs = net.pair_arcs;
    let flow = net.network.max_flow(net.source, net.sink);
    if flow.value as usize != np {
        let points =
            instance.demand().iter().enumerate().filter(|&(k, _)| flow.source_side[1 + k]).map(|(_, &p)| p).collect();
        let balls = open
            .iter()
            .enumerate()
            .filter(|&(slot, _)| flow.source_side[1 + np + slot])
            .map(|(_, (b, _))| *b)
            .collect();
        return Err(CutWitness { assigned: flow.value as usize, required: np, points, balls });
    }
    let assign = pair_arcs.iter().filter(|(arc, _, _)| flow.arc_flows[*arc] == 1).map(|&(_, p, b)| (p, b)).collect();
    Ok(IntegralAssignment { open: open.iter().cloned().collect(), assign })
}

/// Replaces the fractional point-to-ball flow of a rounded solution by an
/// integral assignment over the same open balls and expansions.
pub fn integralize(instance: &Instance, rounded: &RoundedSolution) -> Result<IntegralAssignment> {
    let open: Vec<(usize, Quadratic)> = rounded.open.iter().map(|(b, o)| (*b, o.expansion.clone())).collect();
    assign_integrally(instance, &open).map_err(|w| {
        Error::Invariant(format!(
            "integralization assigned {} of {} points; cut points {:?} reach only balls {:?}",
            w.assigned, w.required, w.points, w.balls
        ))
    })
}

pub const SOLUTION_HEADER: &str = "capcover-solution v1";

/// ```text
/// capcover-solution v1
/// open 0:1/1 3:2+sqrt5
/// assign 0 0
/// assign 1 3
/// ```
pub fn write_solution(solution: &IntegralAssignment) -> String {
    let mut out = String::new();
    writeln!(out, "{SOLUTION_HEADER}").unwrap();
    let open: Vec<String> = solution.open.iter().map(|(b, e)| format!("{b}:{e}")).collect();
    if open.is_empty() {
        writeln!(out, "open").unwrap();
    } else {
        writeln!(out, "open {}", open.join(" ")).unwrap();
    }
    for (p, b) in &solution.assign {
        writeln!(out, "assign {p} {b}").unwrap();
    }
    out
}

pub fn parse_solution(text: &str) -> Result<IntegralAssignment> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, SOLUTION_HEADER)) => {}
        _ => return Err(Error::Parse(format!("expected `{SOLUTION_HEADER}`"))),
    }
    let (_, open_line) = lines.next().ok_or_else(|| Error::Parse("missing `open` line".into()))?;
    let rest = open_line.strip_prefix("open").ok_or_else(|| Error::Parse("line 2: expected `open`".into()))?;
    let mut open = BTreeMap::new();
    for item in rest.split_whitespace() {
        let (b, e) = item
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("line 2: expected id:expansion, found `{item}`")))?;
        let b: usize = b.parse().map_err(|_| Error::Parse(format!("line 2: bad ball id `{b}`")))?;
        if open.insert(b, e.parse::<Quadratic>()?).is_some() {
            return Err(Error::Parse(format!("line 2: ball {b} listed twice")));
        }
    }
    let mut assign = BTreeMap::new();
    for (no, line) in lines {
        let mut parts = line.split(' ');
        let (Some("assign"), Some(p), Some(b), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse(format!("line {}: expected `assign point ball`", no + 1)));
        };
        let p: usize = p.parse().map_err(|_| Error::Parse(format!("line {}: bad point", no + 1)))?;
        let b: usize = b.parse().map_err(|_| Error::Parse(format!("line {}: bad ball", no + 1)))?;
        if assign.insert(p, b).is_some() {
            return Err(Error::Parse(format!("line {}: point {p} assigned twice", no + 1)));
        }
    }
    Ok(IntegralAssignment { open, assign })
}
