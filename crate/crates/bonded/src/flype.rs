//! Flype accelerator: a 2-tangle flanked by a crossing is rotated half a
//! turn, carrying the crossing to the other side. Off by default; enabled
//! through `SearchBudget::flype`.

use crate::diagram::{Dart, Diagram};
use crate::moves::{MoveError, MoveKind, MoveSite};
use crate::rewrite::{NewNode, PortId, PortSpec, Rewrite, SlotMap};
use std::collections::{HashMap, HashSet};

/// Enumerates flype sites: crossing `c` whose legs at slots `i`, `i+1`
/// enter a tangle `T` such that cutting `{e1, e2}` together with the two
/// remaining arcs of `c` separates `{c} + T` from a nonempty outside.
/// Site darts: `[Dart(c, i), e1 anchor, e2 anchor]`.
pub(crate) fn find_flypes(d: &Diagram, sites: &mut Vec<MoveSite>) {
    for (c, node) in d.nodes().iter().enumerate() {
        if !node.is_crossing() {
            continue;
        }
        for i in 0..4u8 {
            let arcs = d.arc_count() as u32;
            for e1 in 0..arcs {
                for e2 in (e1 + 1)..arcs {
                    if tangle_nodes(d, c as u32, i, e1, e2).is_some() {
                        sites.push(MoveSite {
                            kind: MoveKind::Flype,
                            darts: vec![
                                Dart::new(c as u32, i),
                                d.arc_ends(e1)[0],
                                d.arc_ends(e2)[0],
                            ],
                            variant: 0,
                        });
                    }
                }
            }
        }
    }
}

/// The tangle interior for side `i` of crossing `c` under cut arcs
/// `{e1, e2}`: nodes reachable from the legs without crossing the cut.
/// Returns None when the configuration is not a flype.
fn tangle_nodes(d: &Diagram, c: u32, i: u8, e1: u32, e2: u32) -> Option<HashSet<u32>> {
    let leg1 = d.arc_at(Dart::new(c, i));
    let leg2 = d.arc_at(Dart::new(c, (i + 1) % 4));
    let w1 = d.arc_at(Dart::new(c, (i + 2) % 4));
    let w2 = d.arc_at(Dart::new(c, (i + 3) % 4));
    let cut: HashSet<u32> = [e1, e2, w1, w2].into_iter().collect();
    if cut.len() != 4 || cut.contains(&leg1) || cut.contains(&leg2) {
        return None;
    }
    let mut tangle: HashSet<u32> = HashSet::new();
    let mut stack = Vec::new();
    for leg in [leg1, leg2] {
        for end in d.arc_ends(leg) {
            if end.node != c {
                stack.push(end.node);
            }
        }
    }
    if stack.is_empty() {
        return None;
    }
    while let Some(n) = stack.pop() {
        if n == c || !tangle.insert(n) {
            continue;
        }
        for &arc in d.nodes()[n as usize].slots() {
            if cut.contains(&arc) {
                continue;
            }
            for end in d.arc_ends(arc) {
                if end.node != c && !tangle.contains(&end.node) {
                    stack.push(end.node);
                }
            }
        }
    }
    if tangle.is_empty() || tangle.len() + 1 >= d.nodes().len() {
        return None;
    }
    for e in [e1, e2] {
        let ends = d.arc_ends(e);
        if ends.iter().any(|p| p.node == c) {
            return None;
        }
        let inside = ends.iter().filter(|p| tangle.contains(&p.node)).count();
        if inside != 1 {
            return None;
        }
    }
    for w in [w1, w2] {
        if d.arc_ends(w).iter().any(|p| tangle.contains(&p.node)) {
            return None;
        }
    }
    Some(tangle)
}

/// Arcs bounding the face that contains `start`.
fn face_arcs(d: &Diagram, start: Dart) -> HashSet<u32> {
    let mut arcs = HashSet::new();
    let mut cur = start;
    loop {
        arcs.insert(d.arc_at(cur));
        cur = d.face_next(cur);
        if cur == start {
            break;
        }
    }
    arcs
}

/// Applies a flype: the tangle is rotated half a turn (rotations reversed,
/// crossings re-normalized to slot-0-under) and the flanking crossing
/// reappears on the far side with the same twist sign.
pub(crate) fn apply_flype(d: &Diagram, site: &MoveSite) -> Result<Diagram, MoveError> {
    let cd = site.darts[0];
    let c = cd.node;
    let i = cd.slot;
    if (c as usize) >= d.nodes().len() || !d.nodes()[c as usize].is_crossing() || i >= 4 {
        return Err(MoveError::Stale);
    }
    let e1 = d.arc_at(site.darts[1]);
    let e2 = d.arc_at(site.darts[2]);
    let tangle = tangle_nodes(d, c, i, e1, e2).ok_or(MoveError::Stale)?;

    // Around c (counterclockwise): slot i = SE leg, i+1 = NE leg,
    // i+2 = NW outside arc, i+3 = SW outside arc. The tangle's boundary
    // cut arcs sort into the north face (shared with the i+2 sector) and
    // the south face (shared with the i sector).
    let north_arcs = face_arcs(d, Dart::new(c, (i + 2) % 4));
    let south_arcs = face_arcs(d, Dart::new(c, i));
    let e_north = if north_arcs.contains(&e1) && !north_arcs.contains(&e2) {
        e1
    } else if north_arcs.contains(&e2) && !north_arcs.contains(&e1) {
        e2
    } else {
        return Err(MoveError::Stale);
    };
    let e_south = if e_north == e1 { e2 } else { e1 };
    if !south_arcs.contains(&e_south) {
        return Err(MoveError::Stale);
    }

    let t_end = |arc: u32| -> Dart {
        *d.arc_ends(arc)
            .iter()
            .find(|p| tangle.contains(&p.node))
            .unwrap()
    };
    let (t_north, t_south) = (t_end(e_north), t_end(e_south));

    let mut rw = Rewrite::new(d);
    // Flipped tangle nodes: reversing each rotation flips top and bottom;
    // crossings rotate one extra step so slot 0 stays on the under-strand
    // (the half-turn swaps over/under, reversing the list swaps them back).
    let mut order: Vec<u32> = tangle.iter().copied().collect();
    order.sort_unstable();
    let mut new_index: HashMap<u32, usize> = HashMap::new();
    for &n in &order {
        new_index.insert(n, new_index.len());
    }
    let cprime = order.len();
    let reflected = |n: u32, s: u8| -> u8 {
        let deg = d.nodes()[n as usize].degree();
        let r = (deg - s) % deg;
        if d.nodes()[n as usize].is_crossing() {
            (r + 1) % 4
        } else {
            r
        }
    };
    // New flanking crossing, counterclockwise (SE', NE', NW', SW') =
    // (toward south outside, toward north outside, flipped south port,
    // flipped north port). The south diagonal {0,2} is under exactly when
    // the old south leg sat at an even slot: the twist sign is preserved.
    let rot = |role: u8| -> u8 {
        if i % 2 == 0 {
            role
        } else {
            (role + 1) % 4
        }
    };
    for &n in &order {
        let deg = d.nodes()[n as usize].degree();
        let ports: Vec<PortSpec> = (0..deg)
            .map(|new_slot| {
                let old_slot = (0..deg).find(|&s| reflected(n, s) == new_slot).unwrap();
                let old = Dart::new(n, old_slot);
                if old == t_south {
                    PortSpec::Link(PortId {
                        node: cprime,
                        slot: rot(2),
                    })
                } else if old == t_north {
                    PortSpec::Link(PortId {
                        node: cprime,
                        slot: rot(3),
                    })
                } else {
                    PortSpec::Into(old)
                }
            })
            .collect();
        rw.add_node(NewNode {
            crossing: d.nodes()[n as usize].is_crossing(),
            ports,
        });
    }
    let mut cports = vec![PortSpec::Into(t_south); 4];
    cports[rot(0) as usize] = PortSpec::Into(t_south);
    cports[rot(1) as usize] = PortSpec::Into(t_north);
    cports[rot(2) as usize] = PortSpec::Link(PortId {
        node: new_index[&t_south.node],
        slot: reflected(t_south.node, t_south.slot),
    });
    cports[rot(3) as usize] = PortSpec::Link(PortId {
        node: new_index[&t_north.node],
        slot: reflected(t_north.node, t_north.slot),
    });
    rw.add_node(NewNode {
        crossing: true,
        ports: cports,
    });

    for &n in &order {
        let deg = d.nodes()[n as usize].degree();
        let maps: Vec<SlotMap> = (0..deg)
            .map(|s| {
                SlotMap::Port(PortId {
                    node: new_index[&n],
                    slot: reflected(n, s),
                })
            })
            .collect();
        rw.dissolve(n, maps);
    }
    // The old flanking crossing dissolves through: its outside arcs run
    // straight into the flipped tangle legs.
    rw.dissolve_through(c);
    rw.apply().map_err(|_| MoveError::Stale)
}
