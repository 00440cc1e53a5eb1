use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problem::Side;

/// An edge with its endpoints' port indices (0-based internally).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub white: usize,
    pub white_port: usize,
    pub black: usize,
    pub black_port: usize,
}

/// A port-numbered 2-colored bipartite (multi)graph. `white[v][i]` is the
/// edge behind port `i` of white node `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimGraph {
    white: Vec<Vec<usize>>,
    black: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    /// Set when the generator gave up on simplicity.
    pub multigraph: bool,
}

impl SimGraph {
    /// Builds a graph from `(white, black)` pairs; ports are assigned in
    /// order of appearance.
    pub fn from_pairs(white_n: usize, black_n: usize, pairs: &[(usize, usize)]) -> Result<SimGraph> {
        let mut white = vec![Vec::new(); white_n];
        let mut black = vec![Vec::new(); black_n];
        let mut edges = Vec::with_capacity(pairs.len());
        for (e, &(w, b)) in pairs.iter().enumerate() {
            if w >= white_n || b >= black_n {
                return Err(Error::Graph(format!("edge {e} refers to a missing node")));
            }
            edges.push(Edge {
                white: w,
                white_port: white[w].len(),
                black: b,
                black_port: black[b].len(),
            });
            white[w].push(e);
            black[b].push(e);
        }
        let multigraph = has_parallel_edges(&edges);
        Ok(SimGraph {
            white,
            black,
            edges,
            multigraph,
        })
    }

    /// Builds a graph from edges with explicit ports; every node's ports
    /// must be exactly `0..deg`.
    pub fn from_edges(white_n: usize, black_n: usize, edges: Vec<Edge>) -> Result<SimGraph> {
        let mut white: Vec<Vec<Option<usize>>> = vec![Vec::new(); white_n];
        let mut black: Vec<Vec<Option<usize>>> = vec![Vec::new(); black_n];
        for (e, edge) in edges.iter().enumerate() {
            for (table, node, port, side) in [
                (&mut white, edge.white, edge.white_port, "white"),
                (&mut black, edge.black, edge.black_port, "black"),
            ] {
                let slots = table
                    .get_mut(node)
                    .ok_or_else(|| Error::Graph(format!("edge {e}: no {side} node {node}")))?;
                if slots.len() <= port {
                    slots.resize(port + 1, None);
                }
                if slots[port].replace(e).is_some() {
                    return Err(Error::Graph(format!("{side} node {node} uses port {} twice", port + 1)));
                }
            }
        }
        let close = |t: Vec<Vec<Option<usize>>>, side: &str| -> Result<Vec<Vec<usize>>> {
            t.into_iter()
                .enumerate()
                .map(|(v, ports)| {
                    ports
                        .into_iter()
                        .collect::<Option<Vec<usize>>>()
                        .ok_or_else(|| Error::Graph(format!("{side} node {v} has a gap in its ports")))
                })
                .collect()
        };
        let white = close(white, "white")?;
        let black = close(black, "black")?;
        let multigraph = has_parallel_edges(&edges);
        Ok(SimGraph {
            white,
            black,
            edges,
            multigraph,
        })
    }

    pub fn node_count(&self, side: Side) -> usize {
        match side {
            Side::White => self.white.len(),
            Side::Black => self.black.len(),
        }
    }

    /// Edges of a node, indexed by port.
    pub fn node_edges(&self, side: Side, node: usize) -> &[usize] {
        match side {
            Side::White => &self.white[node],
            Side::Black => &self.black[node],
        }
    }

    pub fn degree(&self, side: Side, node: usize) -> usize {
        self.node_edges(side, node).len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn max_degree(&self) -> usize {
        self.white
            .iter()
            .chain(&self.black)
            .map(Vec::len)
            .max()
            .unwrap_or(0)
    }

    /// Every node has degree `delta`.
    pub fn is_regular(&self, delta: usize) -> bool {
        self.white.iter().chain(&self.black).all(|p| p.len() == delta)
    }

    /// The node at the other end of `e` from a node of `side`, and the port
    /// there.
    pub fn across(&self, side: Side, e: usize) -> (usize, usize) {
        let edge = self.edges[e];
        match side {
            Side::White => (edge.black, edge.black_port),
            Side::Black => (edge.white, edge.white_port),
        }
    }

    /// Exchanges two ports of one node.
    pub fn swap_ports(&mut self, side: Side, node: usize, p: usize, q: usize) {
        let table = match side {
            Side::White => &mut self.white,
            Side::Black => &mut self.black,
        };
        table[node].swap(p, q);
        let (ep, eq) = (table[node][p], table[node][q]);
        for (e, port) in [(ep, p), (eq, q)] {
            match side {
                Side::White => self.edges[e].white_port = port,
                Side::Black => self.edges[e].black_port = port,
            }
        }
    }

    /// Edge list with ports, one `w<id> p<i> -- b<id> p<j>` line per edge;
    /// ports are 1-based.
    pub fn to_exchange(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let _ = writeln!(
                out,
                "w{} p{} -- b{} p{}",
                e.white,
                e.white_port + 1,
                e.black,
                e.black_port + 1
            );
        }
        out
    }

    pub fn parse_exchange(text: &str) -> Result<SimGraph> {
        let mut edges = Vec::new();
        let (mut wn, mut bn) = (0, 0);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::Graph(format!("line {}: expected `w<id> p<i> -- b<id> p<j>`", i + 1));
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let [w, wp, "--", b, bp] = tokens.as_slice() else {
                return Err(bad());
            };
            let num = |s: &str, prefix: char| -> Result<usize> {
                s.strip_prefix(prefix).and_then(|r| r.parse().ok()).ok_or_else(bad)
            };
            let (w, wp, b, bp) = (num(w, 'w')?, num(wp, 'p')?, num(b, 'b')?, num(bp, 'p')?);
            if wp == 0 || bp == 0 {
                return Err(bad());
            }
            wn = wn.max(w + 1);
            bn = bn.max(b + 1);
            edges.push(Edge {
                white: w,
                white_port: wp - 1,
                black: b,
                black_port: bp - 1,
            });
        }
        SimGraph::from_edges(wn, bn, edges)
    }
}

fn has_parallel_edges(edges: &[Edge]) -> bool {
    let mut seen = HashSet::new();
    edges.iter().any(|e| !seen.insert((e.white, e.black)))
}

const MATCHING_RETRIES: usize = 100;

/// A Δ-regular bipartite graph on `n_side + n_side` nodes, the union of Δ
/// random perfect matchings with random port numbers. Parallel edges are
/// repaired by swaps; if that fails `MATCHING_RETRIES` times the result is a
/// multigraph (flagged) or, with `allow_multigraph == false`, an error.
pub fn gen_regular_bipartite(n_side: usize, delta: usize, seed: u64, allow_multigraph: bool) -> Result<SimGraph> {
    if delta == 0 || n_side < delta {
        return Err(Error::Range(format!("need n_side ≥ delta ≥ 1, got n_side = {n_side}, delta = {delta}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempt = 0;
    let pairs = loop {
        attempt += 1;
        match try_simple(n_side, delta, &mut rng) {
            Some(p) => break p,
            None if attempt >= MATCHING_RETRIES => {
                if !allow_multigraph {
                    return Err(Error::Generation(attempt));
                }
                break random_matchings(n_side, delta, &mut rng);
            }
            None => {}
        }
    };
    let mut white: Vec<Vec<usize>> = vec![Vec::with_capacity(delta); n_side];
    let mut black: Vec<Vec<usize>> = vec![Vec::with_capacity(delta); n_side];
    for (e, &(w, b)) in pairs.iter().enumerate() {
        white[w].push(e);
        black[b].push(e);
    }
    for ports in white.iter_mut().chain(black.iter_mut()) {
        ports.shuffle(&mut rng);
    }
    let mut edges: Vec<Edge> = pairs
        .iter()
        .map(|&(w, b)| Edge {
            white: w,
            white_port: 0,
            black: b,
            black_port: 0,
        })
        .collect();
    for (v, ports) in white.iter().enumerate() {
        for (i, &e) in ports.iter().enumerate() {
            debug_assert_eq!(edges[e].white, v);
            edges[e].white_port = i;
        }
    }
    for ports in &black {
        for (i, &e) in ports.iter().enumerate() {
            edges[e].black_port = i;
        }
    }
    let multigraph = has_parallel_edges(&edges);
    Ok(SimGraph {
        white,
        black,
        edges,
        multigraph,
    })
}

fn random_matchings(n: usize, delta: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * delta);
    for _ in 0..delta {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        pairs.extend(perm.into_iter().enumerate());
    }
    pairs
}

/// Adds matchings one by one, repairing parallel edges by swapping partners
/// within the current permutation.
fn try_simple(n: usize, delta: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(usize, usize)>> {
    let mut adj: Vec<HashSet<usize>> = vec![HashSet::with_capacity(delta); n];
    let mut pairs = Vec::with_capacity(n * delta);
    for _ in 0..delta {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        let mut budget = 50 * n + 100;
        loop {
            let bad: Vec<usize> = (0..n).filter(|&w| adj[w].contains(&perm[w])).collect();
            if bad.is_empty() {
                break;
            }
            for w in bad {
                if !adj[w].contains(&perm[w]) {
                    continue;
                }
                let u = rng.gen_range(0..n);
                if u != w && !adj[w].contains(&perm[u]) && !adj[u].contains(&perm[w]) {
                    perm.swap(w, u);
                }
                if budget == 0 {
                    return None;
                }
                budget -= 1;
            }
        }
        for (w, &b) in perm.iter().enumerate() {
            adj[w].insert(b);
            pairs.push((w, b));
        }
    }
    Some(pairs)
}

/// A balanced 2-colored tree: a white root with Δ children, every other
/// internal node with Δ − 1 children, leaves at distance `depth`. Colors
/// alternate by level; port 0 of a non-root node leads to its parent.
pub fn gen_tree(delta: usize, depth: usize) -> Result<SimGraph> {
    if depth == 0 || delta < 2 {
        return Err(Error::Range("tree needs depth ≥ 1 and delta ≥ 2".into()));
    }
    let mut counts = [0usize, 0usize];
    let mut pairs = Vec::new();
    let mut frontier = vec![0usize];
    counts[0] = 1;
    for level in 0..depth {
        let parent_side = level % 2;
        let child_side = 1 - parent_side;
        let children = if level == 0 { delta } else { delta - 1 };
        let mut next = Vec::with_capacity(frontier.len() * children);
        for &parent in &frontier {
            for _ in 0..children {
                let child = counts[child_side];
                counts[child_side] += 1;
                let (w, b) = if parent_side == 0 { (parent, child) } else { (child, parent) };
                pairs.push((w, b));
                next.push(child);
            }
        }
        frontier = next;
    }
    // Edges are emitted level by level, so a child's parent edge gets port 0.
    SimGraph::from_pairs(counts[0], counts[1], &pairs)
}

/// The complete bipartite graph `K_{Δ,Δ}` with white port `p` of node `w`
/// leading to black node `(w + p) mod Δ`.
pub fn complete_bipartite(delta: usize) -> SimGraph {
    let mut pairs = Vec::with_capacity(delta * delta);
    for w in 0..delta {
        for p in 0..delta {
            pairs.push((w, (w + p) % delta));
        }
    }
    SimGraph::from_pairs(delta, delta, &pairs).expect("valid construction")
}

/// Rewires white ports so that the edges at black node `b` use the given
/// white ports (one per incident edge, in black-port order).
pub fn set_white_ports_at(g: &mut SimGraph, b: usize, ports: &[usize]) -> Result<()> {
    let edges = g.node_edges(Side::Black, b).to_vec();
    if ports.len() != edges.len() {
        return Err(Error::Graph("one white port per incident edge expected".into()));
    }
    for (&e, &want) in edges.iter().zip(ports) {
        let Edge { white, white_port, .. } = g.edge(e);
        if want >= g.degree(Side::White, white) {
            return Err(Error::Graph(format!("white node {white} has no port {}", want + 1)));
        }
        g.swap_ports(Side::White, white, white_port, want);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_and_deterministic() {
        let g = gen_regular_bipartite(1000, 3, 7, false).unwrap();
        assert!(g.is_regular(3));
        assert!(!g.multigraph);
        assert_eq!(g, gen_regular_bipartite(1000, 3, 7, false).unwrap());
        assert_ne!(g, gen_regular_bipartite(1000, 3, 8, false).unwrap());
    }

    #[test]
    fn n_side_equal_delta_is_complete() {
        let g = gen_regular_bipartite(4, 4, 1, false).unwrap();
        assert!(g.is_regular(4));
        assert!(!g.multigraph);
        assert_eq!(g.edge_count(), 16);
    }

    #[test]
    fn tree_shape() {
        let star = gen_tree(3, 1).unwrap();
        assert_eq!(star.node_count(Side::White), 1);
        assert_eq!(star.node_count(Side::Black), 3);
        let t = gen_tree(3, 3).unwrap();
        let total = t.node_count(Side::White) + t.node_count(Side::Black);
        assert_eq!(total, 1 + 3 * (1 + 2 + 4));
        for b in 0..t.node_count(Side::Black) {
            let d = t.degree(Side::Black, b);
            assert!(d == 1 || d == 3);
        }
    }

    #[test]
    fn exchange_round_trip() {
        let g = gen_regular_bipartite(5, 3, 3, false).unwrap();
        let text = g.to_exchange();
        assert_eq!(SimGraph::parse_exchange(&text).unwrap(), g);
        assert!(SimGraph::parse_exchange("w0 p1 -- b0 p1\nw0 p1 -- b1 p1\n").is_err());
    }

    #[test]
    fn white_ports_can_be_forced() {
        let mut g = complete_bipartite(3);
        set_white_ports_at(&mut g, 0, &[0, 0, 0]).unwrap();
        for &e in g.node_edges(Side::Black, 0) {
            assert_eq!(g.edge(e).white_port, 0);
        }
        assert_eq!(SimGraph::parse_exchange(&g.to_exchange()).unwrap(), g);
    }
}
