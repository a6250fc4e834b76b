//! The Yamada polynomial as a state sum over crossing resolutions, with the
//! graph layer evaluated through the flow polynomial at `k = sigma + 1`,
//! `sigma = A + 1 + A^-1`.
//!
//! Each crossing is resolved three ways: the A-smoothing `X[a,b,c,d] ->
//! (a,b)(c,d)` with weight `A`, the B-smoothing `(a,d)(b,c)` with weight
//! `A^-1`, or a flat 4-valent vertex with weight 1. A state's multigraph is
//! evaluated as `h(g) = (-1)^|V| * F_g(sigma+1)`, free loops contributing a
//! factor `sigma` each.

use crate::diagram::{Dart, Diagram, Node};
use crate::multigraph::Multigraph;
use crate::poly::LaurentPoly;
use crate::rewrite::{Rewrite, SlotMap};
use dashmap::DashMap;
use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum YamadaError {
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
}

fn flow_cache() -> &'static DashMap<Vec<u8>, LaurentPoly> {
    static CACHE: OnceLock<DashMap<Vec<u8>, LaurentPoly>> = OnceLock::new();
    CACHE.get_or_init(DashMap::new)
}

/// Flow polynomial of `g` evaluated at `k = sigma + 1`, computed by
/// deletion-contraction. Loops and free loops contribute `sigma` each;
/// bridges force 0; the result is multiplicative over components.
/// Memoized on the canonical form of each loop-free connected component.
pub fn flow_eval(g: &Multigraph) -> LaurentPoly {
    flow_eval_with(g, true)
}

/// As `flow_eval` but without the shared memo table.
pub fn flow_eval_uncached(g: &Multigraph) -> LaurentPoly {
    flow_eval_with(g, false)
}

fn flow_eval_with(g: &Multigraph, use_cache: bool) -> LaurentPoly {
    let sigma = LaurentPoly::sigma();
    let loop_count = g.loop_edge_count() as u32;
    let mut acc = sigma.pow(g.free_loops() + loop_count);
    if g.edge_count() == loop_count as usize {
        return acc;
    }
    let stripped = Multigraph::new(
        g.vertex_count(),
        g.edges().iter().copied().filter(|(a, b)| a != b),
        0,
    );
    for comp in stripped.components() {
        if comp.edge_count() == 0 {
            continue;
        }
        let f = flow_component(&comp, use_cache);
        if f.is_zero() {
            return LaurentPoly::zero();
        }
        acc = &acc * &f;
    }
    acc
}

/// `g` is connected and loop-free with at least one edge.
fn flow_component(g: &Multigraph, use_cache: bool) -> LaurentPoly {
    if g.has_bridge() {
        return LaurentPoly::zero();
    }
    let key = if use_cache {
        let k = g.canonical_key();
        if let Some(hit) = flow_cache().get(&k) {
            return hit.clone();
        }
        Some(k)
    } else {
        None
    };
    // Non-loop edge of maximal multiplicity, smallest endpoints on ties.
    let mut mult: HashMap<(u32, u32), usize> = HashMap::new();
    for &e in g.edges() {
        *mult.entry(e).or_insert(0) += 1;
    }
    let (&(u, v), _) = mult
        .iter()
        .max_by(|(e1, m1), (e2, m2)| m1.cmp(m2).then(e2.cmp(e1)))
        .expect("component has an edge");

    let contracted = contract_one(g, u, v);
    let deleted = delete_one(g, u, v);
    let f = &flow_eval_with(&contracted, use_cache) - &flow_eval_with(&deleted, use_cache);
    if let Some(k) = key {
        flow_cache().insert(k, f.clone());
    }
    f
}

fn delete_one(g: &Multigraph, u: u32, v: u32) -> Multigraph {
    let mut removed = false;
    let edges = g.edges().iter().copied().filter(|&e| {
        if !removed && e == (u.min(v), u.max(v)) {
            removed = true;
            false
        } else {
            true
        }
    });
    Multigraph::new(g.vertex_count(), edges, 0)
}

fn contract_one(g: &Multigraph, u: u32, v: u32) -> Multigraph {
    debug_assert_ne!(u, v);
    let (keep, gone) = (u.min(v), u.max(v));
    let relabel = |w: u32| -> u32 {
        if w == gone {
            keep
        } else if w > gone {
            w - 1
        } else {
            w
        }
    };
    let mut removed = false;
    let edges: Vec<(u32, u32)> = g
        .edges()
        .iter()
        .copied()
        .filter(|&e| {
            if !removed && e == (keep, gone) {
                removed = true;
                false
            } else {
                true
            }
        })
        .map(|(a, b)| (relabel(a), relabel(b)))
        .collect();
    Multigraph::new(g.vertex_count() - 1, edges, 0)
}

/// Graph evaluation `h(g) = (-1)^{|V|} F_g(sigma+1)`. Vanishes on graphs
/// with a bridge; multiplicative over disjoint union; `h(vertex) = -1`,
/// `h(free loop) = sigma`.
pub fn h_value(g: &Multigraph) -> LaurentPoly {
    let f = flow_eval(g);
    if g.vertex_count() % 2 == 1 {
        -&f
    } else {
        f
    }
}

/// Resolution choice per crossing.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Resolution {
    SmoothA,
    SmoothB,
    Flat,
}

/// The through-traced multigraph of a resolved diagram: 3-valent vertices
/// and flat crossings become graph vertices, smoothings splice strands,
/// vertexless circles count as free loops.
fn state_multigraph(d: &Diagram, crossings: &[u32], choices: &[Resolution]) -> Multigraph {
    let mut smoothing: HashMap<u32, Resolution> = HashMap::new();
    let mut kept: HashMap<u32, u32> = HashMap::new();
    for (n, node) in d.nodes().iter().enumerate() {
        if !node.is_crossing() {
            let i = kept.len() as u32;
            kept.insert(n as u32, i);
        }
    }
    for (&c, &choice) in crossings.iter().zip(choices) {
        match choice {
            Resolution::Flat => {
                let i = kept.len() as u32;
                kept.insert(c, i);
            }
            _ => {
                smoothing.insert(c, choice);
            }
        }
    }

    let mut offsets = Vec::with_capacity(d.nodes().len());
    let mut total = 0usize;
    for node in d.nodes() {
        offsets.push(total);
        total += node.degree() as usize;
    }
    let idx = |dart: Dart| offsets[dart.node as usize] + dart.slot as usize;
    let partner = |node: u32, slot: u8| -> u8 {
        match smoothing[&node] {
            Resolution::SmoothA => slot ^ 1,
            Resolution::SmoothB => 3 - slot,
            Resolution::Flat => unreachable!(),
        }
    };
    let mut visited = vec![false; total];
    let mut edges = Vec::new();

    let mut kept_order: Vec<(u32, u32)> = kept.iter().map(|(&n, &v)| (n, v)).collect();
    kept_order.sort_unstable();
    for (node, vi) in kept_order {
        let deg = d.nodes()[node as usize].degree();
        for s in 0..deg {
            let start = Dart::new(node, s);
            if visited[idx(start)] {
                continue;
            }
            visited[idx(start)] = true;
            let mut cur = d.opposite(start);
            loop {
                visited[idx(cur)] = true;
                if let Some(&other_end) = kept.get(&cur.node) {
                    edges.push((vi, other_end));
                    break;
                }
                let p = Dart::new(cur.node, partner(cur.node, cur.slot));
                visited[idx(p)] = true;
                cur = d.opposite(p);
            }
        }
    }
    // Vertexless circles through smoothings only.
    let mut free = d.free_loops();
    for &node in crossings.iter().filter(|c| smoothing.contains_key(c)) {
        for s in 0..4u8 {
            let start = Dart::new(node, s);
            if visited[idx(start)] {
                continue;
            }
            let mut cur = start;
            loop {
                visited[idx(cur)] = true;
                let p = Dart::new(cur.node, partner(cur.node, cur.slot));
                visited[idx(p)] = true;
                cur = d.opposite(p);
                if cur == start {
                    break;
                }
            }
            free += 1;
        }
    }
    Multigraph::new(kept.len(), edges, free)
}

/// Raw (un-normalized) Yamada polynomial: the full state sum. Changes by a
/// unit `±A^n` under moves I and V, and is exactly invariant under
/// moves II, III, IV.
pub fn yamada_raw(d: &Diagram) -> LaurentPoly {
    let crossings: Vec<u32> = d
        .nodes()
        .iter()
        .enumerate()
        .filter(|(_, n)| n.is_crossing())
        .map(|(i, _)| i as u32)
        .collect();
    let c = crossings.len();
    let mut choices = vec![Resolution::SmoothA; c];
    let mut counter = vec![0u8; c];
    let mut total = LaurentPoly::zero();
    loop {
        let mut weight = 0i32;
        for (i, &t) in counter.iter().enumerate() {
            choices[i] = match t {
                0 => {
                    weight += 1;
                    Resolution::SmoothA
                }
                1 => {
                    weight -= 1;
                    Resolution::SmoothB
                }
                _ => Resolution::Flat,
            };
        }
        let g = state_multigraph(d, &crossings, &choices);
        let h = h_value(&g);
        total += &h.shift(weight);
        // Increment the base-3 counter.
        let mut i = 0;
        loop {
            if i == c {
                return total;
            }
            counter[i] += 1;
            if counter[i] < 3 {
                break;
            }
            counter[i] = 0;
            i += 1;
        }
    }
}

/// Normalized Yamada value: representative of the `±A^n` unit class.
pub fn yamada(d: &Diagram) -> LaurentPoly {
    yamada_raw(d).canonical_unit()
}

/// Removes the bond strands realizing a perfect matching (edge indices of
/// `d.underlying_graph()`), suppresses the resulting 2-valent vertices, and
/// returns the normalized Yamada value of the remaining link diagram.
pub fn bond_deleted_invariant(d: &Diagram, matching: &[usize]) -> Result<LaurentPoly, YamadaError> {
    let (g, strands) = d.underlying_graph_with_strands();
    let mut covered = vec![false; g.vertex_count()];
    for &ei in matching {
        let &(a, b) = g
            .edges()
            .get(ei)
            .ok_or_else(|| YamadaError::InvalidMatching(format!("edge index {ei} out of range")))?;
        if a == b {
            return Err(YamadaError::InvalidMatching(format!(
                "edge {ei} is a loop"
            )));
        }
        for v in [a, b] {
            if covered[v as usize] {
                return Err(YamadaError::InvalidMatching(format!(
                    "vertex {v} covered twice"
                )));
            }
            covered[v as usize] = true;
        }
    }
    if covered.iter().any(|&c| !c) {
        return Err(YamadaError::InvalidMatching(
            "matching does not cover every vertex".into(),
        ));
    }

    let removed: HashSet<u32> = matching
        .iter()
        .flat_map(|&ei| strands[ei].iter().copied())
        .collect();
    let mut rw = Rewrite::new(d);
    for (n, node) in d.nodes().iter().enumerate() {
        let slots = node.slots();
        match node {
            Node::Vertex(_) => {
                let dead: Vec<u8> = (0..3u8)
                    .filter(|&s| removed.contains(&slots[s as usize]))
                    .collect();
                debug_assert_eq!(dead.len(), 1, "perfect matching removes one end per vertex");
                let d0 = dead[0];
                let (a, b) = match d0 {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let mut maps = vec![SlotMap::Dead; 3];
                maps[a as usize] = SlotMap::Through(b);
                maps[b as usize] = SlotMap::Through(a);
                rw.dissolve(n as u32, maps);
            }
            Node::Crossing(_) => {
                let pass0 = removed.contains(&slots[0]);
                let pass1 = removed.contains(&slots[1]);
                debug_assert_eq!(pass0, removed.contains(&slots[2]));
                debug_assert_eq!(pass1, removed.contains(&slots[3]));
                match (pass0, pass1) {
                    (false, false) => {}
                    (true, true) => {
                        rw.dissolve(n as u32, vec![SlotMap::Dead; 4]);
                    }
                    (true, false) => {
                        rw.dissolve(
                            n as u32,
                            vec![
                                SlotMap::Dead,
                                SlotMap::Through(3),
                                SlotMap::Dead,
                                SlotMap::Through(1),
                            ],
                        );
                    }
                    (false, true) => {
                        rw.dissolve(
                            n as u32,
                            vec![
                                SlotMap::Through(2),
                                SlotMap::Dead,
                                SlotMap::Through(0),
                                SlotMap::Dead,
                            ],
                        );
                    }
                }
            }
        }
    }
    let link = rw
        .apply()
        .map_err(|e| YamadaError::InvalidMatching(format!("strand removal failed: {e}")))?;
    Ok(yamada(&link))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pd::parse_pd;

    fn poly(s: &str) -> LaurentPoly {
        s.parse().unwrap()
    }

    fn sigma() -> LaurentPoly {
        LaurentPoly::sigma()
    }

    #[test]
    fn flow_basics() {
        // Single loop edge -> sigma.
        let loop_edge = Multigraph::new(1, [(0, 0)], 0);
        assert_eq!(flow_eval(&loop_edge), sigma());
        // Bridge -> 0.
        let bridge = Multigraph::new(2, [(0, 1)], 0);
        assert!(flow_eval(&bridge).is_zero());
        // Theta multigraph -> sigma * (sigma - 1).
        let theta = Multigraph::new(2, [(0, 1), (0, 1), (0, 1)], 0);
        let expected = &sigma() * &(&sigma() - &LaurentPoly::one());
        assert_eq!(flow_eval(&theta), expected);
    }

    #[test]
    fn h_consequences() {
        let vertex = Multigraph::new(1, [], 0);
        assert_eq!(h_value(&vertex), LaurentPoly::monomial(0, -1));
        let two_free = Multigraph::new(0, [], 2);
        assert_eq!(h_value(&two_free), sigma().pow(2));
        // h(K4) = sigma (sigma-1)(sigma-2).
        let k4 = Multigraph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], 0);
        let s = sigma();
        let expected = &(&s * &(&s - &LaurentPoly::one()))
            * &(&s - &LaurentPoly::monomial(0, 2));
        assert_eq!(h_value(&k4), expected);
    }

    #[test]
    fn h_deletion_contraction_identity() {
        // h(g) = -h(g/e) - h(g-e) for a non-loop edge e.
        let g = Multigraph::new(3, [(0, 1), (0, 1), (1, 2), (2, 0)], 0);
        let contracted = contract_one(&g, 0, 1);
        let deleted = delete_one(&g, 0, 1);
        let lhs = h_value(&g);
        let rhs = &(-&h_value(&contracted)) - &h_value(&deleted);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn cached_matches_uncached() {
        let g = Multigraph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)], 1);
        assert_eq!(flow_eval(&g), flow_eval_uncached(&g));
    }

    #[test]
    fn yamada_trivial_theta() {
        let d = parse_pd("V[0,1,2],V[0,2,1]").unwrap();
        assert_eq!(yamada(&d), poly("-A^4-A^3-2A^2-A-1").canonical_unit());
    }

    #[test]
    fn yamada_trivial_handcuff_is_zero() {
        let d = parse_pd("V[0,0,1],V[1,2,2]").unwrap();
        assert!(yamada_raw(&d).is_zero());
    }

    #[test]
    fn yamada_unknot() {
        let d = Diagram::unknots(1);
        assert_eq!(yamada_raw(&d), sigma());
    }

    #[test]
    fn yamada_k4() {
        let d = parse_pd("V[0,1,2],V[0,3,4],V[1,4,5],V[2,5,3]").unwrap();
        assert_eq!(yamada(&d), poly("-A^6-2A^4-2A^2-1").canonical_unit());
    }

    #[test]
    fn yamada_h21_matches_table() {
        let d = parse_pd("V[0,1,2],V[0,3,4],X[1,4,5,6],X[6,5,3,2]").unwrap();
        let value = yamada(&d);
        let table = poly("-A^9-A^8-A^7-A^6+A^3+A^2+A+1").canonical_unit();
        assert!(value == table || value.mirror().canonical_unit() == table);
    }

    #[test]
    fn mirror_identity() {
        for pd in [
            "V[0,1,2],V[0,3,4],X[1,5,6,7],X[7,8,3,2],X[8,6,5,4]",
            "V[0,1,2],V[0,3,4],X[1,4,5,6],X[6,5,3,2]",
        ] {
            let d = parse_pd(pd).unwrap();
            assert_eq!(yamada_raw(&d.mirror()), yamada_raw(&d).mirror());
        }
    }

    #[test]
    fn chirality_pretest_b31() {
        let d = parse_pd("V[0,1,2],V[0,3,4],X[1,5,6,7],X[7,8,3,2],X[8,6,5,4]").unwrap();
        let v = yamada(&d);
        assert_ne!(v.mirror().canonical_unit(), v);
    }

    #[test]
    fn bond_deletion_on_theta_gives_unknot() {
        let d = parse_pd("V[0,1,2],V[0,2,1]").unwrap();
        let g = d.underlying_graph();
        let matchings = g.perfect_matchings();
        assert_eq!(matchings.len(), 3);
        for m in matchings {
            assert_eq!(
                bond_deleted_invariant(&d, &m).unwrap(),
                sigma().canonical_unit()
            );
        }
    }

    #[test]
    fn bond_deletion_invalid_matching() {
        let d = parse_pd("V[0,1,2],V[0,2,1]").unwrap();
        assert!(bond_deleted_invariant(&d, &[]).is_err());
        assert!(bond_deleted_invariant(&d, &[0, 1]).is_err());
    }

    #[test]
    fn state_count_is_three_to_c() {
        // Indirect check: a 2-crossing diagram's state sum must equal the
        // hand-expanded 9-term sum. Use the handcuff clasp H(2,1)_1.
        let d = parse_pd("V[0,1,2],V[0,3,4],X[1,4,5,6],X[6,5,3,2]").unwrap();
        let crossings: Vec<u32> = vec![2, 3];
        let all = [Resolution::SmoothA, Resolution::SmoothB, Resolution::Flat];
        let mut total = LaurentPoly::zero();
        for a in all {
            for b in all {
                let w = [a, b]
                    .iter()
                    .map(|r| match r {
                        Resolution::SmoothA => 1,
                        Resolution::SmoothB => -1,
                        Resolution::Flat => 0,
                    })
                    .sum::<i32>();
                let g = state_multigraph(&d, &crossings, &[a, b]);
                total += &h_value(&g).shift(w);
            }
        }
        assert_eq!(total, yamada_raw(&d));
    }
}
