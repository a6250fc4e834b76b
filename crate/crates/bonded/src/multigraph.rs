//! Abstract multigraphs (loops and parallel edges allowed) plus a count of
//! free loops. This is the target of through-tracing and the domain of the
//! flow-polynomial evaluation.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Unordered endpoint pairs; loops are `(v, v)`. Free loops are closed
/// curves with no vertex at all.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Multigraph {
    vertex_count: usize,
    edges: Vec<(u32, u32)>,
    free_loops: u32,
}

impl Multigraph {
    pub fn new(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
        free_loops: u32,
    ) -> Self {
        let edges: Vec<(u32, u32)> = edges
            .into_iter()
            .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
            .collect();
        for &(a, b) in &edges {
            debug_assert!((a as usize) < vertex_count && (b as usize) < vertex_count);
        }
        Multigraph {
            vertex_count,
            edges,
            free_loops,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn loop_edge_count(&self) -> usize {
        self.edges.iter().filter(|(a, b)| a == b).count()
    }

    pub fn has_loop_edge(&self) -> bool {
        self.edges.iter().any(|(a, b)| a == b)
    }

    pub fn free_loops(&self) -> u32 {
        self.free_loops
    }

    /// Degree of each vertex; a loop contributes 2.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for &(a, b) in &self.edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        deg
    }

    /// Connected components over vertices (free loops not included).
    pub fn vertex_components(&self) -> (usize, Vec<usize>) {
        let mut comp = vec![usize::MAX; self.vertex_count];
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); self.vertex_count];
        for &(a, b) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        let mut count = 0;
        for start in 0..self.vertex_count {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = count;
            while let Some(v) = stack.pop() {
                for &u in &adj[v] {
                    if comp[u as usize] == usize::MAX {
                        comp[u as usize] = count;
                        stack.push(u as usize);
                    }
                }
            }
            count += 1;
        }
        (count, comp)
    }

    /// True when some component contains a bridge (a multiplicity-one
    /// non-loop edge whose removal disconnects its component).
    pub fn has_bridge(&self) -> bool {
        // Multiplicity per vertex pair; only multiplicity-1 edges can be
        // bridges, so run the standard low-link pass on the simple graph
        // and check candidate edges.
        let mut mult: HashMap<(u32, u32), usize> = HashMap::new();
        for &(a, b) in &self.edges {
            if a != b {
                *mult.entry((a, b)).or_insert(0) += 1;
            }
        }
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.vertex_count];
        let simple: Vec<((u32, u32), usize)> = mult.into_iter().collect();
        for (i, &((a, b), _)) in simple.iter().enumerate() {
            adj[a as usize].push((b as usize, i));
            adj[b as usize].push((a as usize, i));
        }
        // Iterative DFS computing discovery/low values.
        let n = self.vertex_count;
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut timer = 0;
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            while let Some(&mut (v, pe, ref mut idx)) = stack.last_mut() {
                if *idx < adj[v].len() {
                    let (u, ei) = adj[v][*idx];
                    *idx += 1;
                    if ei == pe {
                        continue;
                    }
                    if disc[u] == usize::MAX {
                        disc[u] = timer;
                        low[u] = timer;
                        timer += 1;
                        stack.push((u, ei, 0));
                    } else {
                        low[v] = low[v].min(disc[u]);
                    }
                } else {
                    stack.pop();
                    if let Some(&mut (p, _, _)) = stack.last_mut() {
                        low[p] = low[p].min(low[v]);
                        if low[v] > disc[p] {
                            // Tree edge p-v is a bridge in the simple graph;
                            // a real bridge only if multiplicity is 1.
                            let (ref pair, m) = simple[pe];
                            debug_assert!(
                                (pair.0 as usize == p || pair.1 as usize == p)
                                    && (pair.0 as usize == v || pair.1 as usize == v)
                            );
                            if m == 1 {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }

    /// Restriction to one vertex component (free loops dropped).
    fn component_graph(&self, comp: &[usize], which: usize) -> Multigraph {
        let mut remap = vec![u32::MAX; self.vertex_count];
        let mut next = 0u32;
        for v in 0..self.vertex_count {
            if comp[v] == which {
                remap[v] = next;
                next += 1;
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|(a, _)| comp[*a as usize] == which)
            .map(|&(a, b)| (remap[a as usize], remap[b as usize]));
        Multigraph::new(next as usize, edges, 0)
    }

    /// Splits into connected vertex components.
    pub fn components(&self) -> Vec<Multigraph> {
        let (n, comp) = self.vertex_components();
        (0..n).map(|c| self.component_graph(&comp, c)).collect()
    }

    /// All perfect matchings by non-loop edges, as sorted lists of edge
    /// indices. Empty result means no matching exists.
    pub fn perfect_matchings(&self) -> Vec<Vec<usize>> {
        let mut result = Vec::new();
        let mut chosen = Vec::new();
        let mut covered = vec![false; self.vertex_count];
        self.matchings_rec(0, &mut covered, &mut chosen, &mut result);
        result
    }

    fn matchings_rec(
        &self,
        from: usize,
        covered: &mut Vec<bool>,
        chosen: &mut Vec<usize>,
        result: &mut Vec<Vec<usize>>,
    ) {
        // Find the first uncovered vertex; match it or fail.
        let v = match (from..self.vertex_count).find(|&v| !covered[v]) {
            None => {
                result.push(chosen.clone());
                return;
            }
            Some(v) => v,
        };
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            if a == b {
                continue;
            }
            let (a, b) = (a as usize, b as usize);
            if a != v && b != v {
                continue;
            }
            let other = if a == v { b } else { a };
            if covered[other] {
                continue;
            }
            covered[v] = true;
            covered[other] = true;
            chosen.push(i);
            self.matchings_rec(v + 1, covered, chosen, result);
            chosen.pop();
            covered[v] = false;
            covered[other] = false;
        }
    }

    /// Canonical byte key: equal keys iff the graphs are isomorphic
    /// (free loops included in the key). Individualization-refinement
    /// over vertex colors, minimizing the relabeled edge list.
    pub fn canonical_key(&self) -> Vec<u8> {
        let mut best: Option<Vec<(u32, u32)>> = None;
        let init = self.refine(&vec![0u32; self.vertex_count]);
        self.canon_search(&init, &mut best);
        let mut key = Vec::new();
        key.extend_from_slice(&(self.vertex_count as u32).to_le_bytes());
        key.extend_from_slice(&self.free_loops.to_le_bytes());
        if let Some(edges) = best {
            for (a, b) in edges {
                key.extend_from_slice(&a.to_le_bytes());
                key.extend_from_slice(&b.to_le_bytes());
            }
        }
        key
    }

    /// Stable color refinement: color by (old color, sorted multiset of
    /// (edge-multiplicity to neighbor, neighbor color)), iterated to a
    /// fixed point. Loop edges enter via the initial degree signature.
    fn refine(&self, start: &[u32]) -> Vec<u32> {
        let n = self.vertex_count;
        let mut loops = vec![0u32; n];
        let mut nbrs: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            if a == b {
                loops[a as usize] += 1;
            } else {
                nbrs[a as usize].push(b);
                nbrs[b as usize].push(a);
            }
        }
        let init: Vec<(u32, u32, usize, Vec<(u32, u32)>)> = (0..n)
            .map(|v| (start[v], loops[v], nbrs[v].len(), Vec::new()))
            .collect();
        let mut color = compress(&init);
        loop {
            let full: Vec<(u32, u32, usize, Vec<(u32, u32)>)> = (0..n)
                .map(|v| {
                    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
                    for &u in &nbrs[v] {
                        *counts.entry(color[u as usize]).or_insert(0) += 1;
                    }
                    (color[v], 0, 0, counts.into_iter().collect())
                })
                .collect();
            let new_color = compress(&full);
            if new_color == color {
                break;
            }
            color = new_color;
        }
        color
    }

    fn canon_search(&self, color: &[u32], best: &mut Option<Vec<(u32, u32)>>) {
        let n = self.vertex_count;
        // Find the smallest non-singleton color class.
        let mut class_members: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (v, &c) in color.iter().enumerate() {
            class_members.entry(c).or_default().push(v);
        }
        let target = class_members
            .iter()
            .filter(|(_, m)| m.len() > 1)
            .min_by_key(|(_, m)| m.len())
            .map(|(&c, m)| (c, m.clone()));
        match target {
            None => {
                // Discrete coloring: colors define the labeling.
                let mut perm = vec![0u32; n];
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by_key(|&v| color[v]);
                for (new, &old) in order.iter().enumerate() {
                    perm[old] = new as u32;
                }
                let mut edges: Vec<(u32, u32)> = self
                    .edges
                    .iter()
                    .map(|&(a, b)| {
                        let (x, y) = (perm[a as usize], perm[b as usize]);
                        if x <= y {
                            (x, y)
                        } else {
                            (y, x)
                        }
                    })
                    .collect();
                edges.sort_unstable();
                if best.is_none() || edges < *best.as_ref().unwrap() {
                    *best = Some(edges);
                }
            }
            Some((_, members)) => {
                for &v in &members {
                    // Individualize v: fresh color strictly below its class.
                    let mut start: Vec<u32> = color.iter().map(|&c| c * 2 + 1).collect();
                    start[v] -= 1;
                    let refined = self.refine(&start);
                    self.canon_search(&refined, best);
                }
            }
        }
    }
}

/// Maps signatures to dense color ids ordered by signature.
fn compress(sigs: &[(u32, u32, usize, Vec<(u32, u32)>)]) -> Vec<u32> {
    let mut sorted: Vec<&(u32, u32, usize, Vec<(u32, u32)>)> = sigs.iter().collect();
    sorted.sort();
    sorted.dedup();
    let index: HashMap<&(u32, u32, usize, Vec<(u32, u32)>), u32> = sorted
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s, i as u32))
        .collect();
    sigs.iter().map(|s| index[s]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta() -> Multigraph {
        Multigraph::new(2, [(0, 1), (0, 1), (0, 1)], 0)
    }

    fn handcuff() -> Multigraph {
        Multigraph::new(2, [(0, 0), (0, 1), (1, 1)], 0)
    }

    #[test]
    fn matchings_theta_and_handcuff() {
        assert_eq!(theta().perfect_matchings().len(), 3);
        assert_eq!(handcuff().perfect_matchings().len(), 1);
    }

    #[test]
    fn unmatchable_spoke_star() {
        // Hub with three loop-vertices: no perfect matching by non-loop edges.
        let star = Multigraph::new(
            4,
            [(0, 0), (1, 1), (2, 2), (0, 3), (1, 3), (2, 3)],
            0,
        );
        assert!(star.perfect_matchings().is_empty());
    }

    #[test]
    fn bridges() {
        assert!(handcuff().has_bridge());
        assert!(!theta().has_bridge());
        // Double edge is not a bridge.
        assert!(!Multigraph::new(2, [(0, 1), (0, 1)], 0).has_bridge());
        assert!(Multigraph::new(2, [(0, 1)], 0).has_bridge());
    }

    #[test]
    fn canonical_key_is_isomorphism_invariant() {
        let g1 = Multigraph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)], 0);
        let g2 = Multigraph::new(4, [(2, 3), (3, 0), (0, 1), (1, 2), (1, 3)], 0);
        assert_eq!(g1.canonical_key(), g2.canonical_key());
        let g3 = Multigraph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)], 0);
        assert_ne!(g1.canonical_key(), g3.canonical_key());
    }

    #[test]
    fn canonical_key_distinguishes_multiplicity_and_loops() {
        let a = Multigraph::new(2, [(0, 1), (0, 1)], 0);
        let b = Multigraph::new(2, [(0, 1), (0, 0)], 0);
        assert_ne!(a.canonical_key(), b.canonical_key());
        let c = Multigraph::new(2, [(0, 1), (0, 1)], 1);
        assert_ne!(a.canonical_key(), c.canonical_key());
    }

    #[test]
    fn components_split() {
        let g = Multigraph::new(5, [(0, 1), (1, 2), (3, 4)], 2);
        let comps = g.components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].vertex_count(), 3);
        assert_eq!(comps[1].vertex_count(), 2);
    }
}
