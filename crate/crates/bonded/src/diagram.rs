//! Combinatorial model of bonded-knot diagrams: 3-valent vertices and
//! 4-valent crossings carrying a rotation system (counterclockwise slot
//! order), plus a count of free loops (closed curves meeting no node).
//!
//! Crossing convention: slots are listed counterclockwise and slots 0, 2
//! carry the under-strand; slots 1, 3 the over-strand.

use crate::multigraph::Multigraph;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub type ArcId = u32;

/// One node of a diagram. The slot arrays hold arc ids in counterclockwise
/// rotation order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Node {
    #[serde(rename = "V")]
    Vertex([ArcId; 3]),
    #[serde(rename = "X")]
    Crossing([ArcId; 4]),
}

impl Node {
    pub fn slots(&self) -> &[ArcId] {
        match self {
            Node::Vertex(a) => a,
            Node::Crossing(a) => a,
        }
    }

    pub fn slots_mut(&mut self) -> &mut [ArcId] {
        match self {
            Node::Vertex(a) => a,
            Node::Crossing(a) => a,
        }
    }

    pub fn degree(&self) -> u8 {
        match self {
            Node::Vertex(_) => 3,
            Node::Crossing(_) => 4,
        }
    }

    pub fn is_crossing(&self) -> bool {
        matches!(self, Node::Crossing(_))
    }
}

/// An arc-end: a (node, slot) position in the rotation system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dart {
    pub node: u32,
    pub slot: u8,
}

impl Dart {
    pub fn new(node: u32, slot: u8) -> Self {
        Dart { node, slot }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DiagramError {
    #[error("arc {arc} appears {count} times (must be exactly 2)")]
    MalformedArc { arc: ArcId, count: usize },
    #[error("rotation system is not a sphere embedding (component {component}: V={v} E={e} F={f})")]
    NotPlanar {
        component: usize,
        v: usize,
        e: usize,
        f: usize,
    },
}

/// Serialized form used for JSON checkpoints.
#[derive(Serialize, Deserialize)]
struct DiagramData {
    nodes: Vec<Node>,
    free_loops: u32,
}

/// Immutable sphere-embedded diagram. Arc ids are dense (`0..arc_count`).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DiagramData", into = "DiagramData")]
pub struct Diagram {
    nodes: Vec<Node>,
    free_loops: u32,
    /// Per arc, the two darts holding it (in first-appearance order).
    endpoints: Vec<[Dart; 2]>,
}

impl TryFrom<DiagramData> for Diagram {
    type Error = DiagramError;
    fn try_from(d: DiagramData) -> Result<Self, Self::Error> {
        Diagram::new(d.nodes, d.free_loops)
    }
}

impl From<Diagram> for DiagramData {
    fn from(d: Diagram) -> Self {
        DiagramData {
            nodes: d.nodes,
            free_loops: d.free_loops,
        }
    }
}

impl std::fmt::Debug for Diagram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, node) in self.nodes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            let tag = if node.is_crossing() { "X" } else { "V" };
            write!(f, "{tag}{:?}", node.slots())?;
        }
        if self.free_loops > 0 {
            write!(f, " +{}O", self.free_loops)?;
        }
        Ok(())
    }
}

impl Diagram {
    /// Builds a diagram, relabeling arcs densely in order of first
    /// appearance, and checks the arc-pairing and sphere-embedding
    /// invariants.
    pub fn new(mut nodes: Vec<Node>, free_loops: u32) -> Result<Self, DiagramError> {
        // Dense relabel by first appearance.
        let mut relabel: HashMap<ArcId, ArcId> = HashMap::new();
        for node in &mut nodes {
            for slot in node.slots_mut() {
                let next = relabel.len() as ArcId;
                let id = *relabel.entry(*slot).or_insert(next);
                *slot = id;
            }
        }
        let arc_count = relabel.len();

        // Each arc must occupy exactly two slots.
        let mut seen: Vec<Vec<Dart>> = vec![Vec::new(); arc_count];
        for (n, node) in nodes.iter().enumerate() {
            for (s, &arc) in node.slots().iter().enumerate() {
                seen[arc as usize].push(Dart::new(n as u32, s as u8));
            }
        }
        let mut endpoints = Vec::with_capacity(arc_count);
        for (arc, darts) in seen.iter().enumerate() {
            if darts.len() != 2 {
                return Err(DiagramError::MalformedArc {
                    arc: arc as ArcId,
                    count: darts.len(),
                });
            }
            endpoints.push([darts[0], darts[1]]);
        }

        let diagram = Diagram {
            nodes,
            free_loops,
            endpoints,
        };
        diagram.check_planar()?;
        Ok(diagram)
    }

    /// A diagram that is just `n` disjoint circles.
    pub fn unknots(n: u32) -> Diagram {
        Diagram::new(Vec::new(), n).unwrap()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn free_loops(&self) -> u32 {
        self.free_loops
    }

    pub fn arc_count(&self) -> usize {
        self.endpoints.len()
    }

    pub fn crossing_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_crossing()).count()
    }

    pub fn vertex_count(&self) -> usize {
        self.nodes.len() - self.crossing_count()
    }

    /// Crossings plus 3-valent vertices: `s = c + 2b`.
    pub fn singularity_number(&self) -> usize {
        self.nodes.len()
    }

    pub fn arc_at(&self, d: Dart) -> ArcId {
        self.nodes[d.node as usize].slots()[d.slot as usize]
    }

    pub fn arc_ends(&self, arc: ArcId) -> [Dart; 2] {
        self.endpoints[arc as usize]
    }

    /// The other end of the arc at `d`.
    pub fn opposite(&self, d: Dart) -> Dart {
        let [a, b] = self.endpoints[self.arc_at(d) as usize];
        if a == d {
            b
        } else {
            a
        }
    }

    /// Rotation successor at the same node (counterclockwise).
    pub fn rot_next(&self, d: Dart) -> Dart {
        let deg = self.nodes[d.node as usize].degree();
        Dart::new(d.node, (d.slot + 1) % deg)
    }

    /// Face-trace permutation: successor of `d` along its face.
    pub fn face_next(&self, d: Dart) -> Dart {
        self.rot_next(self.opposite(d))
    }

    pub fn darts(&self) -> impl Iterator<Item = Dart> + '_ {
        self.nodes.iter().enumerate().flat_map(|(n, node)| {
            (0..node.degree()).map(move |s| Dart::new(n as u32, s))
        })
    }

    /// Whether the strand through this crossing slot is the over-strand.
    /// Only meaningful when the node is a crossing.
    pub fn is_over_slot(slot: u8) -> bool {
        slot % 2 == 1
    }

    /// Face walks of the rotation system. Each dart appears in exactly one
    /// walk. A free loop contributes two empty walks (a circle on the
    /// sphere bounds two faces).
    pub fn faces(&self) -> Vec<Vec<Dart>> {
        let mut faces = Vec::new();
        let mut visited: HashMap<Dart, bool> = HashMap::new();
        for start in self.darts() {
            if visited.contains_key(&start) {
                continue;
            }
            let mut walk = Vec::new();
            let mut d = start;
            loop {
                visited.insert(d, true);
                walk.push(d);
                d = self.face_next(d);
                if d == start {
                    break;
                }
            }
            faces.push(walk);
        }
        for _ in 0..self.free_loops {
            faces.push(Vec::new());
            faces.push(Vec::new());
        }
        faces
    }

    /// Connected components of the node graph (nodes joined by arcs),
    /// as a component index per node.
    pub fn node_components(&self) -> (usize, Vec<usize>) {
        let n = self.nodes.len();
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = count;
            while let Some(v) = stack.pop() {
                for &arc in self.nodes[v].slots() {
                    for d in self.endpoints[arc as usize] {
                        let u = d.node as usize;
                        if comp[u] == usize::MAX {
                            comp[u] = count;
                            stack.push(u);
                        }
                    }
                }
            }
            count += 1;
        }
        (count, comp)
    }

    fn check_planar(&self) -> Result<(), DiagramError> {
        let (ncomp, comp) = self.node_components();
        if ncomp == 0 {
            return Ok(());
        }
        let mut v = vec![0usize; ncomp];
        let mut e = vec![0usize; ncomp];
        let mut f = vec![0usize; ncomp];
        for (i, _) in self.nodes.iter().enumerate() {
            v[comp[i]] += 1;
        }
        for ends in &self.endpoints {
            e[comp[ends[0].node as usize]] += 1;
        }
        for walk in self.faces() {
            if let Some(d) = walk.first() {
                f[comp[d.node as usize]] += 1;
            }
        }
        for c in 0..ncomp {
            if v[c] + f[c] != e[c] + 2 {
                return Err(DiagramError::NotPlanar {
                    component: c,
                    v: v[c],
                    e: e[c],
                    f: f[c],
                });
            }
        }
        Ok(())
    }

    /// Mirror image: swap over/under at every crossing, embedding fixed.
    /// Implemented by rotating each crossing's slot list one step, which
    /// re-normalizes to the slot-0-under convention.
    pub fn mirror(&self) -> Diagram {
        let nodes = self
            .nodes
            .iter()
            .map(|node| match node {
                Node::Vertex(a) => Node::Vertex(*a),
                Node::Crossing([a, b, c, d]) => Node::Crossing([*b, *c, *d, *a]),
            })
            .collect();
        Diagram::new(nodes, self.free_loops).expect("mirror preserves validity")
    }

    /// Walks the maximal strand starting at a vertex dart, passing straight
    /// through crossings (slot -> slot+2). Returns the sequence of darts at
    /// which arcs were entered and the terminating vertex dart.
    fn trace_strand(&self, start: Dart) -> (Vec<ArcId>, Dart) {
        let mut arcs = Vec::new();
        let mut d = start;
        loop {
            arcs.push(self.arc_at(d));
            let opp = self.opposite(d);
            if !self.nodes[opp.node as usize].is_crossing() {
                return (arcs, opp);
            }
            d = Dart::new(opp.node, (opp.slot + 2) % 4);
        }
    }

    /// Underlying multigraph: crossings eliminated by through-tracing.
    /// Vertices of the result are the diagram's 3-valent vertices (in node
    /// order); closed strands meeting no vertex become free loops.
    pub fn underlying_graph(&self) -> Multigraph {
        self.underlying_graph_with_strands().0
    }

    /// As `underlying_graph`, also reporting the strand realizing each
    /// edge: for edge `i`, `strands[i]` is the arc sequence from its first
    /// endpoint to its second.
    pub fn underlying_graph_with_strands(&self) -> (Multigraph, Vec<Vec<ArcId>>) {
        let mut vertex_index = HashMap::new();
        for (n, node) in self.nodes.iter().enumerate() {
            if !node.is_crossing() {
                let idx = vertex_index.len();
                vertex_index.insert(n as u32, idx);
            }
        }
        let mut edges = Vec::new();
        let mut strands = Vec::new();
        let mut seen_start: HashMap<Dart, ()> = HashMap::new();
        for (n, node) in self.nodes.iter().enumerate() {
            if node.is_crossing() {
                continue;
            }
            for s in 0..node.degree() {
                let start = Dart::new(n as u32, s);
                if seen_start.contains_key(&start) {
                    continue;
                }
                let (arcs, end) = self.trace_strand(start);
                seen_start.insert(start, ());
                seen_start.insert(end, ());
                edges.push((
                    vertex_index[&start.node] as u32,
                    vertex_index[&end.node] as u32,
                ));
                strands.push(arcs);
            }
        }
        // Closed strands through crossings only.
        let mut on_strand: HashMap<ArcId, ()> = HashMap::new();
        for s in &strands {
            for &a in s {
                on_strand.insert(a, ());
            }
        }
        let mut free = self.free_loops;
        let mut visited_arc: HashMap<ArcId, ()> = HashMap::new();
        for arc in 0..self.arc_count() as ArcId {
            if on_strand.contains_key(&arc) || visited_arc.contains_key(&arc) {
                continue;
            }
            // Follow the closed strand containing this arc.
            let mut d = self.endpoints[arc as usize][0];
            loop {
                visited_arc.insert(self.arc_at(d), ());
                let opp = self.opposite(d);
                debug_assert!(self.nodes[opp.node as usize].is_crossing());
                d = Dart::new(opp.node, (opp.slot + 2) % 4);
                if self.arc_at(d) == arc {
                    break;
                }
            }
            free += 1;
        }
        (
            Multigraph::new(vertex_index.len(), edges, free),
            strands,
        )
    }

    /// Number of connected components of the underlying spatial graph,
    /// counting each free loop (including closed crossing-only strands)
    /// as a component.
    pub fn component_count(&self) -> usize {
        let g = self.underlying_graph();
        g.vertex_components().0 + g.free_loops() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pd::parse_pd;

    #[test]
    fn theta_faces_and_euler() {
        let d = parse_pd("V[0,1,2],V[0,2,1]").unwrap();
        assert_eq!(d.faces().len(), 3);
        assert_eq!(d.singularity_number(), 2);
        assert_eq!(d.component_count(), 1);
    }

    #[test]
    fn handcuff_faces() {
        let d = parse_pd("V[0,0,1],V[1,2,2]").unwrap();
        assert_eq!(d.faces().len(), 3);
    }

    #[test]
    fn free_loop_has_two_faces() {
        let d = Diagram::unknots(1);
        assert_eq!(d.faces().len(), 2);
        assert_eq!(d.component_count(), 1);
    }

    #[test]
    fn nonplanar_rotation_rejected() {
        // Two loops through a single crossing in an alternating rotation is
        // a torus embedding (V=1, E=2, F=1).
        let err = Diagram::new(vec![Node::Crossing([0, 1, 0, 1])], 0).unwrap_err();
        assert!(matches!(err, DiagramError::NotPlanar { .. }));
    }

    #[test]
    fn mirror_is_involution_on_nodes() {
        let d = parse_pd("V[0,1,2],V[0,3,4],X[1,5,6,7],X[7,8,3,2],X[8,6,5,4]").unwrap();
        let m = d.mirror().mirror();
        // Double mirror rotates crossing slots by two: same embedded diagram.
        assert_eq!(d.crossing_count(), m.crossing_count());
    }

    #[test]
    fn underlying_graph_of_k4_pd() {
        // B(0,2)_1 is the spatial complete graph on 4 vertices.
        let d = parse_pd("V[0,1,2],V[0,3,4],V[1,4,5],V[2,5,3]").unwrap();
        let g = d.underlying_graph();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.loop_edge_count(), 0);
        assert_eq!(g.free_loops(), 0);
    }

    #[test]
    fn underlying_graph_of_handcuff() {
        let d = parse_pd("V[0,0,1],V[1,2,2]").unwrap();
        let g = d.underlying_graph();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.loop_edge_count(), 2);
    }

    #[test]
    fn underlying_graph_of_l41_has_free_loop() {
        let d =
            parse_pd("V[0,1,2],V[0,3,4],X[1,5,6,7],X[7,6,8,2],X[3,8,9,10],X[10,9,5,4]").unwrap();
        let g = d.underlying_graph();
        // Two trivalent vertices carry exactly three edge-ends each: a
        // bridge plus a loop at each vertex, and the knot component
        // through-traces to a free loop.
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.loop_edge_count(), 2);
        assert_eq!(g.free_loops(), 1);
        assert_eq!(d.component_count(), 2);
    }

    #[test]
    fn component_count_h41() {
        let d =
            parse_pd("V[0,1,2],X[0,3,4,5],X[1,6,7,8],X[9,4,3,2],V[5,10,6],X[10,9,8,7]").unwrap();
        assert_eq!(d.component_count(), 1);
    }

    #[test]
    fn singularity_numbers_from_tables() {
        let theta = parse_pd("V[0,1,2],V[0,2,1]").unwrap();
        assert_eq!(theta.singularity_number(), 2);
        let b31 = parse_pd("V[0,1,2],V[0,3,4],X[1,5,6,7],X[7,8,3,2],X[8,6,5,4]").unwrap();
        assert_eq!(b31.singularity_number(), 5);
        let h51 = parse_pd(
            "V[0,1,2],X[0,3,4,5],X[1,6,7,8],X[9,4,3,2],V[5,10,6],X[11,12,8,7],X[12,11,10,9]",
        )
        .unwrap();
        assert_eq!(h51.singularity_number(), 7);
    }
}
