//! Low-level diagram surgery: dissolve a set of old nodes, add new nodes,
//! and re-trace strands through the site. Every move application and the
//! bond-deletion operation reduce to one such rewrite.
//!
//! Each dissolved node prescribes, per slot, what happens to a strand
//! arriving there: pass through to a partner slot, terminate at a port of
//! a new node, or die with its (deleted) arc. Closed strands that touch no
//! surviving node become free loops.

use crate::diagram::{Dart, Diagram, Node};
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) struct PortId {
    /// Index into `Rewrite::new_nodes`.
    pub node: usize,
    pub slot: u8,
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum SlotMap {
    /// Strand continues out of the partner slot of the same dissolved node.
    Through(u8),
    /// The arc at this slot is deleted with the node.
    Dead,
    /// Strand terminates at a port of a new node.
    Port(PortId),
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum PortSpec {
    /// Walk outward along the arc at this old dart; the port connects to
    /// whatever terminal the walk reaches.
    Into(Dart),
    /// Direct arc to another new port.
    Link(PortId),
    /// Direct arc to a surviving old dart (replacing its arc).
    Direct(Dart),
}

#[derive(Clone, Debug)]
pub(crate) struct NewNode {
    pub crossing: bool,
    pub ports: Vec<PortSpec>,
}

#[derive(Debug, thiserror::Error)]
pub(crate) enum RewriteError {
    #[error("rewrite walk entered a dead slot")]
    DeadEnd,
    #[error("terminal claimed twice")]
    DoubleClaim,
    #[error("unfilled slot after rewrite")]
    Unfilled,
    #[error("rewrite produced an invalid diagram: {0}")]
    Invalid(#[from] crate::diagram::DiagramError),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Terminal {
    Kept(Dart),
    Port(PortId),
}

pub(crate) struct Rewrite<'d> {
    d: &'d Diagram,
    dissolved: HashMap<u32, Vec<SlotMap>>,
    new_nodes: Vec<NewNode>,
}

impl<'d> Rewrite<'d> {
    pub fn new(d: &'d Diagram) -> Self {
        Rewrite {
            d,
            dissolved: HashMap::new(),
            new_nodes: Vec::new(),
        }
    }

    pub fn dissolve(&mut self, node: u32, maps: Vec<SlotMap>) -> &mut Self {
        debug_assert_eq!(
            maps.len(),
            self.d.nodes()[node as usize].degree() as usize
        );
        self.dissolved.insert(node, maps);
        self
    }

    /// Dissolves a crossing so both strands pass straight through.
    pub fn dissolve_through(&mut self, node: u32) -> &mut Self {
        self.dissolve(
            node,
            vec![
                SlotMap::Through(2),
                SlotMap::Through(3),
                SlotMap::Through(0),
                SlotMap::Through(1),
            ],
        )
    }

    pub fn add_node(&mut self, node: NewNode) -> usize {
        self.new_nodes.push(node);
        self.new_nodes.len() - 1
    }

    /// Walks outward from an old dart through dissolved nodes until a
    /// terminal is reached, recording visited old darts.
    fn walk(
        &self,
        start: Dart,
        visited: &mut Vec<bool>,
        dart_index: &impl Fn(Dart) -> usize,
    ) -> Result<Terminal, RewriteError> {
        let mut cur = start;
        loop {
            visited[dart_index(cur)] = true;
            let opp = self.d.opposite(cur);
            visited[dart_index(opp)] = true;
            match self.dissolved.get(&opp.node) {
                None => return Ok(Terminal::Kept(opp)),
                Some(maps) => match maps[opp.slot as usize] {
                    SlotMap::Through(s) => cur = Dart::new(opp.node, s),
                    SlotMap::Port(p) => return Ok(Terminal::Port(p)),
                    SlotMap::Dead => return Err(RewriteError::DeadEnd),
                },
            }
        }
    }

    pub fn apply(self) -> Result<Diagram, RewriteError> {
        let d = self.d;
        // Index surviving nodes.
        let mut kept_index: HashMap<u32, usize> = HashMap::new();
        for n in 0..d.nodes().len() as u32 {
            if !self.dissolved.contains_key(&n) {
                let i = kept_index.len();
                kept_index.insert(n, i);
            }
        }
        let kept_count = kept_index.len();
        let mut out_nodes: Vec<Node> = Vec::with_capacity(kept_count + self.new_nodes.len());
        for n in 0..d.nodes().len() as u32 {
            if kept_index.contains_key(&n) {
                out_nodes.push(match &d.nodes()[n as usize] {
                    Node::Vertex(_) => Node::Vertex([u32::MAX; 3]),
                    Node::Crossing(_) => Node::Crossing([u32::MAX; 4]),
                });
            }
        }
        for nn in &self.new_nodes {
            out_nodes.push(if nn.crossing {
                debug_assert_eq!(nn.ports.len(), 4);
                Node::Crossing([u32::MAX; 4])
            } else {
                debug_assert_eq!(nn.ports.len(), 3);
                Node::Vertex([u32::MAX; 3])
            });
        }

        // Dart bookkeeping over the old diagram.
        let mut offsets = Vec::with_capacity(d.nodes().len());
        let mut total = 0usize;
        for node in d.nodes() {
            offsets.push(total);
            total += node.degree() as usize;
        }
        let dart_index = |dart: Dart| offsets[dart.node as usize] + dart.slot as usize;
        let mut visited = vec![false; total];

        let mut claimed: HashMap<Terminal, ()> = HashMap::new();
        let mut next_arc: u32 = 0;
        let mut assign = |t: Terminal,
                          arc: u32,
                          out_nodes: &mut Vec<Node>,
                          claimed: &mut HashMap<Terminal, ()>|
         -> Result<(), RewriteError> {
            if claimed.insert(t, ()).is_some() {
                return Err(RewriteError::DoubleClaim);
            }
            let (node, slot) = match t {
                Terminal::Kept(dart) => (kept_index[&dart.node], dart.slot),
                Terminal::Port(p) => (kept_count + p.node, p.slot),
            };
            out_nodes[node].slots_mut()[slot as usize] = arc;
            Ok(())
        };

        // Phase 1: port specs, in order.
        for (ni, nn) in self.new_nodes.iter().enumerate() {
            for (si, spec) in nn.ports.iter().enumerate() {
                let here = Terminal::Port(PortId {
                    node: ni,
                    slot: si as u8,
                });
                if claimed.contains_key(&here) {
                    continue;
                }
                let other = match spec {
                    PortSpec::Link(p) => Terminal::Port(*p),
                    PortSpec::Direct(dart) => {
                        debug_assert!(!self.dissolved.contains_key(&dart.node));
                        Terminal::Kept(*dart)
                    }
                    PortSpec::Into(start) => self.walk(*start, &mut visited, &dart_index)?,
                };
                let arc = next_arc;
                next_arc += 1;
                assign(here, arc, &mut out_nodes, &mut claimed)?;
                assign(other, arc, &mut out_nodes, &mut claimed)?;
            }
        }

        // Phase 2: remaining strands incident to surviving nodes.
        for n in 0..d.nodes().len() as u32 {
            if self.dissolved.contains_key(&n) {
                continue;
            }
            for s in 0..d.nodes()[n as usize].degree() {
                let here = Terminal::Kept(Dart::new(n, s));
                if claimed.contains_key(&here) {
                    continue;
                }
                let other = self.walk(Dart::new(n, s), &mut visited, &dart_index)?;
                let arc = next_arc;
                next_arc += 1;
                assign(here, arc, &mut out_nodes, &mut claimed)?;
                assign(other, arc, &mut out_nodes, &mut claimed)?;
            }
        }

        // Phase 3: closed strands entirely inside dissolved pass-throughs.
        let mut free_loops = d.free_loops();
        for (&node, maps) in &self.dissolved {
            for (slot, map) in maps.iter().enumerate() {
                let start = Dart::new(node, slot as u8);
                if visited[dart_index(start)] {
                    continue;
                }
                match map {
                    SlotMap::Dead => continue,
                    SlotMap::Port(_) => continue, // claimed via walks
                    SlotMap::Through(_) => {}
                }
                // Trace the cycle.
                let mut cur = start;
                loop {
                    visited[dart_index(cur)] = true;
                    let opp = d.opposite(cur);
                    visited[dart_index(opp)] = true;
                    match self.dissolved.get(&opp.node).map(|m| m[opp.slot as usize]) {
                        Some(SlotMap::Through(s)) => {
                            cur = Dart::new(opp.node, s);
                            if cur == start {
                                break;
                            }
                        }
                        _ => return Err(RewriteError::DeadEnd),
                    }
                }
                free_loops += 1;
            }
        }

        for node in &out_nodes {
            if node.slots().iter().any(|&a| a == u32::MAX) {
                return Err(RewriteError::Unfilled);
            }
        }
        Ok(Diagram::new(out_nodes, free_loops)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::canonical_code;
    use crate::pd::parse_pd;

    #[test]
    fn dissolve_kink_yields_free_loop() {
        // One-crossing unknot: X[m, l, l, m] with arcs m=0, l=1.
        let d = parse_pd("X[0,1,1,0]").unwrap();
        let mut rw = Rewrite::new(&d);
        rw.dissolve_through(0);
        let out = rw.apply().unwrap();
        assert_eq!(out.nodes().len(), 0);
        assert_eq!(out.free_loops(), 1);
    }

    #[test]
    fn dissolve_r2_pair_splits_circles() {
        // Two circles crossing twice (a lens). Dissolving both crossings
        // through separates them into two free loops.
        let d = parse_pd("X[2,0,3,1],X[1,3,0,2]").unwrap();
        let mut rw = Rewrite::new(&d);
        rw.dissolve_through(0);
        rw.dissolve_through(1);
        let out = rw.apply().unwrap();
        assert_eq!(out.nodes().len(), 0);
        assert_eq!(out.free_loops(), 2);
        assert_eq!(
            canonical_code(&out),
            canonical_code(&crate::diagram::Diagram::unknots(2))
        );
    }
}
