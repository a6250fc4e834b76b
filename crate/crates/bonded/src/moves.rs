//! Generalized Reidemeister moves I-V on bonded-knot diagrams, detected by
//! face patterns, plus bounded move-space search: greedy simplification and
//! joint reduction of diagram sets.
//!
//! Decreasing moves remove crossings (R1-, R2-, R5- by untwisting at a
//! vertex, R4- by sliding a strand off two of a vertex's edges onto the
//! third); R3 is neutral; increasing moves insert admissible sites.

use crate::canon::{canonical_code, CanonicalCode};
use crate::diagram::{Dart, Diagram};
use crate::poly::LaurentPoly;
use crate::rewrite::{NewNode, PortId, PortSpec, Rewrite, SlotMap};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveKind {
    R1Down,
    R1Up,
    R2Down,
    R2Up,
    R3,
    R4Down,
    R4Up,
    R5Down,
    R5Up,
    Flype,
}

impl MoveKind {
    pub fn decreasing() -> &'static [MoveKind] {
        &[
            MoveKind::R1Down,
            MoveKind::R2Down,
            MoveKind::R4Down,
            MoveKind::R5Down,
        ]
    }

    pub fn increasing() -> &'static [MoveKind] {
        &[
            MoveKind::R1Up,
            MoveKind::R2Up,
            MoveKind::R4Up,
            MoveKind::R5Up,
        ]
    }

    /// Net change in crossing count.
    pub fn crossing_delta(self) -> i32 {
        match self {
            MoveKind::R1Down | MoveKind::R5Down | MoveKind::R4Down => -1,
            MoveKind::R2Down => -2,
            MoveKind::R3 | MoveKind::Flype => 0,
            MoveKind::R1Up | MoveKind::R5Up | MoveKind::R4Up => 1,
            MoveKind::R2Up => 2,
        }
    }
}

/// A concrete applicable move: anchor darts reference the diagram the site
/// was detected on.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MoveSite {
    pub kind: MoveKind,
    pub darts: Vec<Dart>,
    pub variant: u8,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MoveError {
    #[error("stale move site: anchor no longer present")]
    Stale,
}

/// Limits for move-space exploration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Crossing-increasing depth above the current minimum.
    pub max_up: u32,
    /// Cap on distinct states explored per search root.
    pub max_states: usize,
    /// Absolute crossing ceiling.
    pub max_crossings: usize,
    /// Enable the flype accelerator.
    pub flype: bool,
}

impl SearchBudget {
    pub fn depth(max_up: u32) -> Self {
        SearchBudget {
            max_up,
            max_states: 100_000,
            max_crossings: 32,
            flype: false,
        }
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget::depth(0)
    }
}

fn slot_add(slot: u8, add: u8, deg: u8) -> u8 {
    (slot + add) % deg
}

/// Enumerates all sites of the requested kinds, in deterministic order.
pub fn find_moves(d: &Diagram, kinds: &[MoveKind]) -> Vec<MoveSite> {
    let mut sites = Vec::new();
    let want = |k: MoveKind| kinds.contains(&k);
    let faces = d.faces();

    if want(MoveKind::R1Down) {
        let mut seen_crossing = BTreeSet::new();
        for walk in &faces {
            if walk.len() != 1 {
                continue;
            }
            let d0 = walk[0];
            if d.nodes()[d0.node as usize].is_crossing() && seen_crossing.insert(d0.node) {
                sites.push(MoveSite {
                    kind: MoveKind::R1Down,
                    darts: vec![d0],
                    variant: 0,
                });
            }
        }
    }
    if want(MoveKind::R2Down) {
        for walk in &faces {
            if walk.len() != 2 {
                continue;
            }
            let (d1, d2) = (walk[0], walk[1]);
            if r2down_valid(d, d1, d2) {
                sites.push(MoveSite {
                    kind: MoveKind::R2Down,
                    darts: vec![d1, d2],
                    variant: 0,
                });
            }
        }
    }
    if want(MoveKind::R5Down) {
        for walk in &faces {
            if walk.len() != 2 {
                continue;
            }
            // Order as (vertex dart, crossing dart).
            for (dv, dx) in [(walk[0], walk[1]), (walk[1], walk[0])] {
                if !d.nodes()[dv.node as usize].is_crossing()
                    && d.nodes()[dx.node as usize].is_crossing()
                {
                    sites.push(MoveSite {
                        kind: MoveKind::R5Down,
                        darts: vec![dv, dx],
                        variant: 0,
                    });
                    break;
                }
            }
        }
    }
    if want(MoveKind::R3) {
        for walk in &faces {
            if walk.len() != 3 {
                continue;
            }
            if r3_valid(d, walk[0], walk[1], walk[2]) {
                sites.push(MoveSite {
                    kind: MoveKind::R3,
                    darts: walk.clone(),
                    variant: 0,
                });
            }
        }
    }
    if want(MoveKind::R4Down) {
        for walk in &faces {
            if walk.len() != 3 {
                continue;
            }
            // Rotate so the vertex corner comes first.
            for r in 0..3 {
                let f1 = walk[r];
                let f2 = walk[(r + 1) % 3];
                let f3 = walk[(r + 2) % 3];
                if !d.nodes()[f1.node as usize].is_crossing() && r4down_valid(d, f1, f2, f3) {
                    sites.push(MoveSite {
                        kind: MoveKind::R4Down,
                        darts: vec![f1, f2, f3],
                        variant: 0,
                    });
                    break;
                }
            }
        }
    }
    if want(MoveKind::R1Up) {
        for arc in 0..d.arc_count() as u32 {
            let anchor = d.arc_ends(arc)[0];
            for variant in 0..2 {
                sites.push(MoveSite {
                    kind: MoveKind::R1Up,
                    darts: vec![anchor],
                    variant,
                });
            }
        }
        if d.free_loops() > 0 {
            // Kink a free loop (no dart anchor).
            for variant in 0..2 {
                sites.push(MoveSite {
                    kind: MoveKind::R1Up,
                    darts: Vec::new(),
                    variant,
                });
            }
        }
    }
    if want(MoveKind::R2Up) {
        for walk in &faces {
            for &da in walk {
                for &db in walk {
                    if da == db {
                        continue;
                    }
                    for variant in 0..2 {
                        sites.push(MoveSite {
                            kind: MoveKind::R2Up,
                            darts: vec![da, db],
                            variant,
                        });
                    }
                }
            }
        }
        if d.free_loops() > 0 {
            // Poke a free loop across an arc (either side).
            for arc in 0..d.arc_count() as u32 {
                let anchor = d.arc_ends(arc)[0];
                for variant in 0..2 {
                    sites.push(MoveSite {
                        kind: MoveKind::R2Up,
                        darts: vec![anchor],
                        variant,
                    });
                }
            }
        }
        if d.free_loops() > 1 {
            // Poke one free loop across another; the two chiralities give
            // isomorphic lenses, so one site suffices.
            sites.push(MoveSite {
                kind: MoveKind::R2Up,
                darts: Vec::new(),
                variant: 0,
            });
        }
    }
    if want(MoveKind::R4Up) {
        for (n, node) in d.nodes().iter().enumerate() {
            if !node.is_crossing() {
                continue;
            }
            for j in 0..4u8 {
                let dj = Dart::new(n as u32, j);
                if r4up_valid(d, dj) {
                    sites.push(MoveSite {
                        kind: MoveKind::R4Up,
                        darts: vec![dj],
                        variant: 0,
                    });
                }
            }
        }
    }
    if want(MoveKind::R5Up) {
        for (n, node) in d.nodes().iter().enumerate() {
            if node.is_crossing() {
                continue;
            }
            for i in 0..3u8 {
                for variant in 0..2 {
                    sites.push(MoveSite {
                        kind: MoveKind::R5Up,
                        darts: vec![Dart::new(n as u32, i)],
                        variant,
                    });
                }
            }
        }
    }
    if want(MoveKind::Flype) {
        crate::flype::find_flypes(d, &mut sites);
    }
    sites
}

fn r1down_valid(d: &Diagram, d0: Dart) -> bool {
    (d0.node as usize) < d.nodes().len()
        && d.nodes()[d0.node as usize].is_crossing()
        && d0.slot < 4
        && d.face_next(d0) == d0
}

fn r2down_valid(d: &Diagram, d1: Dart, d2: Dart) -> bool {
    if d1.node == d2.node {
        return false;
    }
    let (n1, n2) = (d1.node as usize, d2.node as usize);
    if n1 >= d.nodes().len() || n2 >= d.nodes().len() {
        return false;
    }
    if !d.nodes()[n1].is_crossing() || !d.nodes()[n2].is_crossing() {
        return false;
    }
    if d1.slot >= 4 || d2.slot >= 4 {
        return false;
    }
    if d.face_next(d1) != d2 || d.face_next(d2) != d1 {
        return false;
    }
    if d.arc_at(d1) == d.arc_at(d2) {
        return false;
    }
    // One strand over at both crossings: the side arcs sit at opposite
    // parities of their face darts.
    d1.slot % 2 != d2.slot % 2
}

fn r5down_valid(d: &Diagram, dv: Dart, dx: Dart) -> bool {
    (dv.node as usize) < d.nodes().len()
        && (dx.node as usize) < d.nodes().len()
        && !d.nodes()[dv.node as usize].is_crossing()
        && d.nodes()[dx.node as usize].is_crossing()
        && dv.slot < 3
        && dx.slot < 4
        && d.face_next(dv) == dx
        && d.face_next(dx) == dv
}

fn r3_valid(d: &Diagram, e1: Dart, e2: Dart, e3: Dart) -> bool {
    let nodes = [e1.node, e2.node, e3.node];
    if nodes[0] == nodes[1] || nodes[1] == nodes[2] || nodes[0] == nodes[2] {
        return false;
    }
    for &n in &nodes {
        if (n as usize) >= d.nodes().len() || !d.nodes()[n as usize].is_crossing() {
            return false;
        }
    }
    if d.face_next(e1) != e2 || d.face_next(e2) != e3 || d.face_next(e3) != e1 {
        return false;
    }
    // Applicable iff the over-relation is transitive: the side parities are
    // not all equal.
    let p = [e1.slot % 2, e2.slot % 2, e3.slot % 2];
    !(p[0] == p[1] && p[1] == p[2])
}

fn r4down_valid(d: &Diagram, f1: Dart, f2: Dart, f3: Dart) -> bool {
    let (v, x1, x2) = (f1.node, f2.node, f3.node);
    if x1 == x2 || v == x1 || v == x2 {
        return false;
    }
    if (v as usize) >= d.nodes().len()
        || (x1 as usize) >= d.nodes().len()
        || (x2 as usize) >= d.nodes().len()
    {
        return false;
    }
    if d.nodes()[v as usize].is_crossing()
        || !d.nodes()[x1 as usize].is_crossing()
        || !d.nodes()[x2 as usize].is_crossing()
    {
        return false;
    }
    if f1.slot >= 3 || f2.slot >= 4 || f3.slot >= 4 {
        return false;
    }
    if d.face_next(f1) != f2 || d.face_next(f2) != f3 || d.face_next(f3) != f1 {
        return false;
    }
    // The sliding strand passes both edges consistently over or under.
    f2.slot % 2 != f3.slot % 2
}

fn r4up_valid(d: &Diagram, dj: Dart) -> bool {
    let x = dj.node;
    if (x as usize) >= d.nodes().len() || !d.nodes()[x as usize].is_crossing() || dj.slot >= 4 {
        return false;
    }
    let other = d.opposite(dj);
    if other.node == x {
        return false; // edge loops back to the crossing
    }
    if d.nodes()[other.node as usize].is_crossing() {
        return false;
    }
    // Exclude transversal or edge arcs that return to this crossing; the
    // slide is still a legal isotopy there but the local rewrite is not.
    let v = other.node;
    let i = other.slot;
    for s in [1u8, 3u8] {
        let far = d.opposite(Dart::new(x, slot_add(dj.slot, s, 4)));
        if far.node == x {
            return false;
        }
    }
    for s in [1u8, 2u8] {
        let far = d.opposite(Dart::new(v, slot_add(i, s, 3)));
        if far.node == x {
            return false;
        }
    }
    true
}

/// Applies a move site to the diagram it was found on. Returns `Stale` if
/// the anchor pattern is no longer present.
pub fn apply_move(d: &Diagram, site: &MoveSite) -> Result<Diagram, MoveError> {
    match site.kind {
        MoveKind::R1Down => apply_r1down(d, site),
        MoveKind::R2Down => apply_r2down(d, site),
        MoveKind::R5Down => apply_r5down(d, site),
        MoveKind::R3 => apply_r3(d, site),
        MoveKind::R4Down => apply_r4down(d, site),
        MoveKind::R1Up => apply_r1up(d, site),
        MoveKind::R2Up => apply_r2up(d, site),
        MoveKind::R4Up => apply_r4up(d, site),
        MoveKind::R5Up => apply_r5up(d, site),
        MoveKind::Flype => crate::flype::apply_flype(d, site),
    }
}

fn finish(rw: Rewrite) -> Result<Diagram, MoveError> {
    rw.apply().map_err(|_| MoveError::Stale)
}

fn apply_r1down(d: &Diagram, site: &MoveSite) -> Result<Diagram, MoveError> {
    let d0 = site.darts[0];
    if !r1down_valid(d, d0) {
        return Err(MoveError::Stale);
    }
    let mut rw = Rewrite::new(d);
    rw.dissolve_through(d0.node);
    finish(rw)
}

fn apply_r2down(d: &Diagram, site: &MoveSite) -> Result<Diagram, MoveError> {
    let (d1, d2) = (site.darts[0], site.darts[1]);
    if !r2down_valid(d, d1, d2) {
        return Err(MoveError::Stale);
    }
    let mut rw = Rewrite::new(d);
    rw.dissolve_through(d1.node);
    rw.dissolve_through(d2.node);
    finish(rw)
}

fn apply_r5down(d: &Diagram, site: &MoveSite) -> Result<Diagram, MoveError> {
    let (dv, dx) = (site.darts[0], site.darts[1]);
    if !r5down_valid(d, dv, dx) {
        return Err(MoveError::Stale);
    }
    let v = dv.node;
    let i = dv.slot; // bigon sides at v occupy slots i-1, i
    let prev = slot_add(i, 2, 3); // i - 1 mod 3
    let third = slot_add(i, 1, 3);
    let mut rw = Rewrite::new(d);
    rw.dissolve_through(dx.node);
    // Untwisting rotates the vertex: the two twisted slots swap strands.
    let w = rw.add_node(NewNode {
        crossing: false,
        ports: {
            let mut ports = vec![PortSpec::Into(Dart::new(v, 0)); 3];
            ports[prev as usize] = PortSpec::Into(Dart::new(v, i));
            ports[i as usize] = PortSpec::Into(Dart::new(v, prev));
            ports[third as usize] = PortSpec::Into(Dart::new(v, third));
            ports
        },
    });
    rw.dissolve(
        v,
        {
            let mut maps = vec![SlotMap::Dead; 3];
            maps[i as usize] = SlotMap::Port(PortId {
                node: w,
                slot: prev,
            });
            maps[prev as usize] = SlotMap::Port(PortId { node: w, slot: i });
            maps[third as usize] = SlotMap::Port(PortId {
                node: w,
                slot: third,
            });
            maps
        },
    );
    finish(rw)
}

fn apply_r3(d: &Diagram, site: &MoveSite) -> Result<Diagram, MoveError> {
    let (e1, e2, e3) = (site.darts[0], site.darts[1], site.darts[2]);
    if !r3_valid(d, e1, e2, e3) {
        return Err(MoveError::Stale);
    }
    let corner = [e1, e2, e3];
    let mut rw = Rewrite::new(d);
    // New crossing n_i replaces corner i with rotation
    // (a_i, out_{i+2}, in_{i+1}, a_{i-1}), rotated one step when the a_i
    // strand passes over at this corner. Port roles by base position:
    // 0: a_i, 1: out_{i+2}, 2: in_{i+1}, 3: a_{i-1}.
    let over: Vec<bool> = corner.iter().map(|e| e.slot % 2 == 1).collect();
    let pos = |i: usize, role: u8| -> u8 {
        if over[i] {
            (role + 1) % 4
        } else {
            role
        }
    };
    for (i, e) in corner.iter().enumerate() {
        let gamma = e.node;
        let q = e.slot;
        let prev = (i + 2) % 3;
        let next = (i + 1) % 3;
        let mut ports = vec![PortSpec::Into(Dart::new(gamma, q)); 4];
        ports[pos(i, 0) as usize] = PortSpec::Into(Dart::new(gamma, q));
        ports[pos(i, 1) as usize] = PortSpec::Into(Dart::new(
            corner[prev].node,
            slot_add(corner[prev].slot, 2, 4),
        ));
        ports[pos(i, 2) as usize] = PortSpec::Into(Dart::new(
            corner[next].node,
            slot_add(corner[next].slot, 1, 4),
        ));
        ports[pos(i, 3) as usize] = PortSpec::Into(Dart::new(gamma, slot_add(q, 3, 4)));
        rw.add_node(NewNode {
            crossing: true,
            ports,
        });
    }
    for (i, e) in corner.iter().enumerate() {
        let gamma = e.node;
        let q = e.slot;
        let prev = (i + 2) % 3;
        let next = (i + 1) % 3;
        let mut maps = vec![SlotMap::Dead; 4];
        // Arrivals along a_i (from corner i+1 side).
        maps[q as usize] = SlotMap::Port(PortId {
            node: i,
            slot: pos(i, 0),
        });
        // Arrivals along a_{i-1}.
        maps[slot_add(q, 3, 4) as usize] = SlotMap::Port(PortId {
            node: i,
            slot: pos(i, 3),
        });
        // in_i moved to new corner i-1.
        maps[slot_add(q, 1, 4) as usize] = SlotMap::Port(PortId {
            node: prev,
            slot: pos(prev, 2),
        });
        // out_i moved to new corner i+1.
        maps[slot_add(q, 2, 4) as usize] = SlotMap::Port(PortId {
            node: next,
            slot: pos(next, 1),
        });
        rw.dissolve(gamma, maps);
    }
    finish(rw)
}

fn apply_r4down(d: &Diagram, site: &MoveSite) -> Result<Diagram, MoveError> {
    let (f1, f2, f3) = (site.darts[0], site.darts[1], site.darts[2]);
    if !r4down_valid(d, f1, f2, f3) {
        return Err(MoveError::Stale);
    }
    let (v, qv) = (f1.node, f1.slot);
    let (x1, q1) = (f2.node, f2.slot);
    let (x2, q2) = (f3.node, f3.slot);
    let s_over = q1 % 2 == 1;
    let e3_slot = slot_add(qv, 1, 3);
    let e3_far = d.opposite(Dart::new(v, e3_slot));

    // New crossing rotation (SR, e3a, SL, e3b); rotate one step when the
    // sliding strand is over. Roles: 0 SR, 1 e3a, 2 SL, 3 e3b.
    let pos = |role: u8| -> u8 {
        if s_over {
            (role + 1) % 4
        } else {
            role
        }
    };
    let mut rw = Rewrite::new(d);
    let mut ports = vec![PortSpec::Into(Dart::new(v, e3_slot)); 4];
    ports[pos(0) as usize] = PortSpec::Into(Dart::new(x2, slot_add(q2, 1, 4)));
    ports[pos(1) as usize] = PortSpec::Into(e3_far);
    ports[pos(2) as usize] = PortSpec::Into(Dart::new(x1, slot_add(q1, 2, 4)));
    ports[pos(3) as usize] = PortSpec::Into(Dart::new(v, e3_slot));
    let x3 = rw.add_node(NewNode {
        crossing: true,
        ports,
    });

    let mut maps1 = vec![SlotMap::Dead; 4];
    maps1[slot_add(q1, 3, 4) as usize] = SlotMap::Through(slot_add(q1, 1, 4));
    maps1[slot_add(q1, 1, 4) as usize] = SlotMap::Through(slot_add(q1, 3, 4));
    maps1[slot_add(q1, 2, 4) as usize] = SlotMap::Port(PortId {
        node: x3,
        slot: pos(2),
    });
    rw.dissolve(x1, maps1);

    let mut maps2 = vec![SlotMap::Dead; 4];
    maps2[q2 as usize] = SlotMap::Through(slot_add(q2, 2, 4));
    maps2[slot_add(q2, 2, 4) as usize] = SlotMap::Through(q2);
    maps2[slot_add(q2, 1, 4) as usize] = SlotMap::Port(PortId {
        node: x3,
        slot: pos(0),
    });
    rw.dissolve(x2, maps2);
    finish(rw)
}

fn apply_r4up(d: &Diagram, site: &MoveSite) -> Result<Diagram, MoveError> {
    let dj = site.darts[0];
    if !r4up_valid(d, dj) {
        return Err(MoveError::Stale);
    }
    let x = dj.node;
    let j = dj.slot;
    let vd = d.opposite(dj);
    let (v, i) = (vd.node, vd.slot);
    let s_over = (j + 1) % 2 == 1;
    let beta = Dart::new(v, slot_add(i, 1, 3)); // crossed by the SR side
    let alpha = Dart::new(v, slot_add(i, 2, 3)); // crossed by the SL side
    let loop_edge = d.arc_at(alpha) == d.arc_at(beta);

    let pos = |role: u8| -> u8 {
        if s_over {
            (role + 1) % 4
        } else {
            role
        }
    };
    let mut rw = Rewrite::new(d);
    // x1 sits on the alpha edge, roles (mid, e1b, SL, e1a).
    // x2 sits on the beta edge, roles (SR, e2b, mid, e2a).
    let x1 = 0usize;
    let x2 = 1usize;
    let mut ports1 = vec![PortSpec::Direct(alpha); 4];
    ports1[pos(0) as usize] = PortSpec::Link(PortId {
        node: x2,
        slot: pos(2),
    });
    ports1[pos(1) as usize] = if loop_edge {
        PortSpec::Link(PortId {
            node: x2,
            slot: pos(1),
        })
    } else {
        PortSpec::Into(alpha)
    };
    ports1[pos(2) as usize] = PortSpec::Into(Dart::new(x, slot_add(j, 1, 4)));
    ports1[pos(3) as usize] = PortSpec::Direct(alpha);
    rw.add_node(NewNode {
        crossing: true,
        ports: ports1,
    });

    let mut ports2 = vec![PortSpec::Direct(beta); 4];
    ports2[pos(0) as usize] = PortSpec::Into(Dart::new(x, slot_add(j, 3, 4)));
    ports2[pos(1) as usize] = if loop_edge {
        PortSpec::Link(PortId {
            node: x1,
            slot: pos(1),
        })
    } else {
        PortSpec::Into(beta)
    };
    ports2[pos(2) as usize] = PortSpec::Link(PortId {
        node: x1,
        slot: pos(0),
    });
    ports2[pos(3) as usize] = PortSpec::Direct(beta);
    rw.add_node(NewNode {
        crossing: true,
        ports: ports2,
    });

    let mut maps = vec![SlotMap::Dead; 4];
    maps[j as usize] = SlotMap::Through(slot_add(j, 2, 4));
    maps[slot_add(j, 2, 4) as usize] = SlotMap::Through(j);
    maps[slot_add(j, 1, 4) as usize] = SlotMap::Port(PortId {
        node: x1,
        slot: pos(2),
    });
    maps[slot_add(j, 3, 4) as usize] = SlotMap::Port(PortId {
        node: x2,
        slot: pos(0),
    });
    rw.dissolve(x, maps);
    finish(rw)
}

fn apply_r1up(d: &Diagram, site: &MoveSite) -> Result<Diagram, MoveError> {
    if site.darts.is_empty() {
        // Kink a free loop into a one-crossing unknot component.
        if d.free_loops() == 0 {
            return Err(MoveError::Stale);
        }
        let mut nodes = d.nodes().to_vec();
        let m = d.arc_count() as u32;
        let l = m + 1;
        nodes.push(if site.variant == 0 {
            Node::Crossing([m, l, l, m])
        } else {
            Node::Crossing([l, l, m, m])
        });
        return Diagram::new(nodes, d.free_loops() - 1).map_err(|_| MoveError::Stale);
    }
    let p = site.darts[0];
    if (p.node as usize) >= d.nodes().len()
        || p.slot >= d.nodes()[p.node as usize].degree()
    {
        return Err(MoveError::Stale);
    }
    let q = d.opposite(p);
    let mut rw = Rewrite::new(d);
    // variant 0: [a1, l, l, a2], an A^-2 kink; variant 1: [l, l, a1, a2],
    // the A^2 kink (the loop spans the under-then-over slot pair instead).
    let ports = if site.variant == 0 {
        vec![
            PortSpec::Direct(p),
            PortSpec::Link(PortId { node: 0, slot: 2 }),
            PortSpec::Link(PortId { node: 0, slot: 1 }),
            PortSpec::Direct(q),
        ]
    } else {
        vec![
            PortSpec::Link(PortId { node: 0, slot: 1 }),
            PortSpec::Link(PortId { node: 0, slot: 0 }),
            PortSpec::Direct(p),
            PortSpec::Direct(q),
        ]
    };
    rw.add_node(NewNode {
        crossing: true,
        ports,
    });
    finish(rw)
}

fn apply_r2up(d: &Diagram, site: &MoveSite) -> Result<Diagram, MoveError> {
    if site.darts.is_empty() {
        // Two free loops poked into a lens.
        if d.free_loops() < 2 {
            return Err(MoveError::Stale);
        }
        let mut nodes = d.nodes().to_vec();
        let base = d.arc_count() as u32;
        let (ao, al, bo, bl) = (base, base + 1, base + 2, base + 3);
        nodes.push(Node::Crossing([bo, ao, bl, al]));
        nodes.push(Node::Crossing([bo, al, bl, ao]));
        return Diagram::new(nodes, d.free_loops() - 2).map_err(|_| MoveError::Stale);
    }
    if site.darts.len() == 1 {
        // Poke a free loop across the anchored arc.
        if d.free_loops() == 0 {
            return Err(MoveError::Stale);
        }
        let db = site.darts[0];
        if (db.node as usize) >= d.nodes().len()
            || db.slot >= d.nodes()[db.node as usize].degree()
        {
            return Err(MoveError::Stale);
        }
        let b = d.arc_at(db);
        let w = d.opposite(db);
        let mut nodes = d.nodes().to_vec();
        let base = d.arc_count() as u32;
        let (ao, al, m, b2) = (base, base + 1, base + 2, base + 3);
        nodes[w.node as usize].slots_mut()[w.slot as usize] = b2;
        if site.variant == 0 {
            // Circle passes over the arc.
            nodes.push(Node::Crossing([b, ao, m, al]));
            nodes.push(Node::Crossing([b2, al, m, ao]));
        } else {
            nodes.push(Node::Crossing([al, b, ao, m]));
            nodes.push(Node::Crossing([ao, b2, al, m]));
        }
        return Diagram::new(nodes, d.free_loops() - 1).map_err(|_| MoveError::Stale);
    }
    let (da, db) = (site.darts[0], site.darts[1]);
    if da == db
        || (da.node as usize) >= d.nodes().len()
        || (db.node as usize) >= d.nodes().len()
        || da.slot >= d.nodes()[da.node as usize].degree()
        || db.slot >= d.nodes()[db.node as usize].degree()
    {
        return Err(MoveError::Stale);
    }
    // Same face check.
    let mut cur = d.face_next(da);
    let mut same_face = false;
    while cur != da {
        if cur == db {
            same_face = true;
            break;
        }
        cur = d.face_next(cur);
    }
    if !same_face {
        return Err(MoveError::Stale);
    }
    let self_poke = d.arc_at(da) == d.arc_at(db);
    let pa = d.opposite(da);
    let pb = d.opposite(db);
    // xL roles (m, a1, b2, tip); xR roles (b1, a2, m, tip).
    // variant 0: strand a passes over b (a-parts at odd slots).
    let rot = |role: u8| -> u8 {
        if site.variant == 0 {
            role
        } else {
            (role + 1) % 4
        }
    };
    let (xl, xr) = (0usize, 1usize);
    let mut rw = Rewrite::new(d);
    let mut ports_l = vec![PortSpec::Direct(da); 4];
    ports_l[rot(0) as usize] = PortSpec::Link(PortId {
        node: xr,
        slot: rot(2),
    });
    ports_l[rot(1) as usize] = PortSpec::Direct(da);
    ports_l[rot(2) as usize] = if self_poke {
        PortSpec::Direct(db)
    } else {
        PortSpec::Direct(pb)
    };
    ports_l[rot(3) as usize] = PortSpec::Link(PortId {
        node: xr,
        slot: rot(3),
    });
    rw.add_node(NewNode {
        crossing: true,
        ports: ports_l,
    });
    let mut ports_r = vec![PortSpec::Direct(db); 4];
    ports_r[rot(0) as usize] = if self_poke {
        PortSpec::Link(PortId {
            node: xr,
            slot: rot(1),
        })
    } else {
        PortSpec::Direct(db)
    };
    ports_r[rot(1) as usize] = if self_poke {
        PortSpec::Link(PortId {
            node: xr,
            slot: rot(0),
        })
    } else {
        PortSpec::Direct(pa)
    };
    ports_r[rot(2) as usize] = PortSpec::Link(PortId {
        node: xl,
        slot: rot(0),
    });
    ports_r[rot(3) as usize] = PortSpec::Link(PortId {
        node: xl,
        slot: rot(3),
    });
    rw.add_node(NewNode {
        crossing: true,
        ports: ports_r,
    });
    finish(rw)
}

fn apply_r5up(d: &Diagram, site: &MoveSite) -> Result<Diagram, MoveError> {
    let dv = site.darts[0];
    let v = dv.node;
    if (v as usize) >= d.nodes().len()
        || d.nodes()[v as usize].is_crossing()
        || dv.slot >= 3
    {
        return Err(MoveError::Stale);
    }
    let i = dv.slot;
    let i1 = slot_add(i, 1, 3);
    let i2 = slot_add(i, 2, 3);
    // New vertex w keeps v's slot layout; crossing xT has base rotation
    // [aB, tB, tA, aA] (roles 0..3), rotated one step for the other
    // chirality.
    let rot = |role: u8| -> u8 {
        if site.variant == 0 {
            role
        } else {
            (role + 1) % 4
        }
    };
    let (w, xt) = (0usize, 1usize);
    let mut rw = Rewrite::new(d);
    let mut wports = vec![PortSpec::Into(Dart::new(v, i2)); 3];
    wports[i as usize] = PortSpec::Link(PortId {
        node: xt,
        slot: rot(2),
    });
    wports[i1 as usize] = PortSpec::Link(PortId {
        node: xt,
        slot: rot(1),
    });
    wports[i2 as usize] = PortSpec::Into(Dart::new(v, i2));
    rw.add_node(NewNode {
        crossing: false,
        ports: wports,
    });
    let mut xports = vec![PortSpec::Into(Dart::new(v, i)); 4];
    xports[rot(0) as usize] = PortSpec::Into(Dart::new(v, i1));
    xports[rot(1) as usize] = PortSpec::Link(PortId {
        node: w,
        slot: i1,
    });
    xports[rot(2) as usize] = PortSpec::Link(PortId { node: w, slot: i });
    xports[rot(3) as usize] = PortSpec::Into(Dart::new(v, i));
    rw.add_node(NewNode {
        crossing: true,
        ports: xports,
    });
    let mut maps = vec![SlotMap::Dead; 3];
    maps[i as usize] = SlotMap::Port(PortId {
        node: xt,
        slot: rot(3),
    });
    maps[i1 as usize] = SlotMap::Port(PortId {
        node: xt,
        slot: rot(0),
    });
    maps[i2 as usize] = SlotMap::Port(PortId { node: w, slot: i2 });
    rw.dissolve(v, maps);
    finish(rw)
}

/// Result of a bounded simplification search.
#[derive(Clone, Debug)]
pub struct Simplified {
    pub diagram: Diagram,
    pub code: CanonicalCode,
    /// True when a state cap truncated the search.
    pub exhausted: bool,
    pub states_explored: usize,
}

/// One move applied during search, for trace logs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceEntry {
    pub kind: MoveKind,
    pub site: String,
    pub result_fingerprint: u64,
}

fn successor_sites(d: &Diagram, ceiling: usize, budget: &SearchBudget) -> Vec<MoveSite> {
    let crossings = d.crossing_count();
    let mut kinds: Vec<MoveKind> = MoveKind::decreasing().to_vec();
    kinds.push(MoveKind::R3);
    if budget.flype {
        kinds.push(MoveKind::Flype);
    }
    for &k in MoveKind::increasing() {
        if crossings as i32 + k.crossing_delta() <= ceiling as i32 {
            kinds.push(k);
        }
    }
    find_moves(d, &kinds)
        .into_iter()
        .filter(|s| crossings as i32 + s.kind.crossing_delta() <= ceiling as i32)
        .collect()
}

struct Exploration {
    /// Visited states: canonical code -> diagram.
    visited: HashMap<CanonicalCode, Diagram>,
    best: (usize, CanonicalCode),
    exhausted: bool,
}

/// Explores the closed move space around `start` with crossing counts
/// bounded by `ceiling`, stopping after `max_states` states.
fn explore(

    start: &Diagram,
    ceiling: usize,
    budget: &SearchBudget,
    mut on_state: impl FnMut(&CanonicalCode, &Diagram),
) -> Exploration {
    let start_code = canonical_code(start);
    let mut visited: HashMap<CanonicalCode, Diagram> = HashMap::new();
    let mut frontier: BTreeSet<(usize, CanonicalCode)> = BTreeSet::new();
    let mut best = (start.crossing_count(), start_code.clone());
    on_state(&start_code, start);
    visited.insert(start_code.clone(), start.clone());
    frontier.insert((start.crossing_count(), start_code));
    let mut exhausted = false;
    while let Some((_, code)) = frontier.pop_first() {
        let d = visited[&code].clone();
        for site in successor_sites(&d, ceiling, budget) {
            let next = match apply_move(&d, &site) {
                Ok(n) => n,
                Err(_) => continue,
            };
            debug_assert!(next.crossing_count() <= ceiling);
            let ncode = canonical_code(&next);
            if visited.contains_key(&ncode) {
                continue;
            }
            if visited.len() >= budget.max_states {
                exhausted = true;
                break;
            }
            on_state(&ncode, &next);
            let key = (next.crossing_count(), ncode.clone());
            if key < best {
                best = key.clone();
            }
            visited.insert(ncode.clone(), next);
            frontier.insert(key);
        }
        if exhausted {
            break;
        }
    }
    Exploration {
        visited,
        best,
        exhausted,
    }
}

/// Searches for a minimal diagram equivalent to `d`: repeatedly explores
/// the move space up to `max_up` crossings above the current minimum and
/// restarts from any strictly better state. Deterministic; idempotent.
pub fn simplify(d: &Diagram, budget: &SearchBudget) -> Simplified {
    let mut current = d.clone();
    let mut current_key = (current.crossing_count(), canonical_code(&current));
    let mut exhausted = false;
    let mut states = 0usize;
    loop {
        let ceiling = (current.crossing_count() + budget.max_up as usize)
            .min(budget.max_crossings);
        let result = explore(&current, ceiling, budget, |_, _| {});
        states += result.visited.len();
        exhausted |= result.exhausted;
        if result.best < current_key {
            current = result.visited[&result.best.1].clone();
            current_key = result.best;
        } else {
            return Simplified {
                diagram: current,
                code: current_key.1,
                exhausted,
                states_explored: states,
            };
        }
    }
}

/// Partition of input diagrams into equivalence classes found within the
/// budget.
#[derive(Clone, Debug)]
pub struct Partition {
    /// Classes as sorted lists of input indices.
    pub classes: Vec<Vec<usize>>,
    /// Minimal representative per class (same order as `classes`).
    pub representatives: Vec<Diagram>,
    pub exhausted: bool,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

/// Joint reduction: explores every input's move space within the budget and
/// merges inputs whose explored canonical-code sets intersect. Inputs whose
/// normalized Yamada values differ are never merged (hard assertion).
pub fn reduce_equivalent(ds: &[Diagram], budget: &SearchBudget) -> Partition {
    let polys: Vec<LaurentPoly> = ds
        .iter()
        .map(|d| crate::yamada::yamada_raw(d).canonical_unit())
        .collect();
    let mut uf = UnionFind::new(ds.len());
    let mut owner: HashMap<CanonicalCode, usize> = HashMap::new();
    let mut best: Vec<(usize, CanonicalCode, Diagram)> = Vec::with_capacity(ds.len());
    let mut exhausted = false;
    for (i, d) in ds.iter().enumerate() {
        let ceiling = (d.crossing_count() + budget.max_up as usize).min(budget.max_crossings);
        let mut merges: Vec<usize> = Vec::new();
        let result = explore(d, ceiling, budget, |code, _| {
            if let Some(&j) = owner.get(code) {
                merges.push(j);
            } else {
                owner.insert(code.clone(), i);
            }
        });
        exhausted |= result.exhausted;
        for j in merges {
            assert_eq!(
                polys[i], polys[j],
                "joint reduction tried to merge diagrams with different Yamada values"
            );
            uf.union(i, j);
        }
        let b = &result.visited[&result.best.1];
        best.push((result.best.0, result.best.1.clone(), b.clone()));
    }
    let mut by_root: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..ds.len() {
        by_root.entry(uf.find(i)).or_default().push(i);
    }
    let mut roots: Vec<usize> = by_root.keys().copied().collect();
    roots.sort_unstable();
    let mut classes = Vec::new();
    let mut representatives = Vec::new();
    for root in roots {
        let mut members = by_root.remove(&root).unwrap();
        members.sort_unstable();
        let rep = members
            .iter()
            .map(|&i| (&best[i].0, &best[i].1, i))
            .min_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)))
            .map(|(_, _, i)| best[i].2.clone())
            .unwrap();
        classes.push(members);
        representatives.push(rep);
    }
    Partition {
        classes,
        representatives,
        exhausted,
    }
}

#[cfg(test)]
mod tests;
