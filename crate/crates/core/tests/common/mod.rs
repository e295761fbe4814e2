//! Shared oracles and fixtures for integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use codedcast::{Graph, Network};

pub struct HandGraph {
    pub name: String,
    pub graph: Graph,
}

pub const CORPUS: &str = include_str!("../data/hand_graphs.txt");

type Pending = Option<(String, usize, usize, Vec<(u32, u32)>)>;

pub fn hand_graphs() -> Vec<HandGraph> {
    let mut out = Vec::new();
    let mut current: Pending = None;
    let flush = |c: Pending, out: &mut Vec<HandGraph>| {
        if let Some((name, n, s, edges)) = c {
            out.push(HandGraph {
                graph: Graph::from_edges(n, &edges, s).expect("valid corpus graph"),
                name,
            });
        }
    };
    for line in CORPUS.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("graph ") {
            flush(current.take(), &mut out);
            let f: Vec<&str> = rest.split_whitespace().collect();
            current = Some((f[0].to_string(), f[1].parse().unwrap(), f[2].parse().unwrap(), Vec::new()));
        } else {
            let edges = &mut current.as_mut().expect("edges before header").3;
            for tok in line.split_whitespace() {
                let (a, b) = tok.split_once('-').unwrap();
                edges.push((a.parse().unwrap(), b.parse().unwrap()));
            }
        }
    }
    flush(current, &mut out);
    out
}

/// Event-driven forwarding: the source broadcasts; each node that hears the
/// packet for the first time rebroadcasts iff its mark is set. Returns
/// (transmitters, receivers).
pub fn event_driven<G: Network>(graph: &G, marks: &[bool]) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let src = graph.source();
    let mut heard = vec![false; graph.node_count()];
    let mut transmitters = BTreeSet::new();
    let mut queue = VecDeque::from([src]);
    heard[src] = true;
    while let Some(v) = queue.pop_front() {
        if v != src && !marks[v] {
            continue;
        }
        transmitters.insert(v);
        for &u in graph.neighbors(v) {
            let u = u as usize;
            if !heard[u] {
                heard[u] = true;
                queue.push_back(u);
            }
        }
    }
    let receivers = (0..graph.node_count()).filter(|&v| heard[v]).collect();
    (transmitters, receivers)
}

/// All mark vectors over the non-source nodes (source mark fixed to 1).
pub fn mark_vectors(nodes: usize, source: usize) -> impl Iterator<Item = Vec<bool>> {
    let others: Vec<usize> = (0..nodes).filter(|&v| v != source).collect();
    (0u32..1 << others.len()).map(move |bits| {
        let mut marks = vec![false; nodes];
        marks[source] = true;
        for (i, &v) in others.iter().enumerate() {
            marks[v] = bits >> i & 1 == 1;
        }
        marks
    })
}

/// Uniforms reproducing `marks` at any `p` in `(0.25, 0.75]`.
pub fn uniforms_for(marks: &[bool]) -> Vec<f64> {
    marks.iter().map(|&m| if m { 0.25 } else { 0.75 }).collect()
}

/// Distribution of an outcome over mark vectors, as exact counts keyed by
/// (outcome, number of marked non-source nodes). Equal maps mean equal
/// distributions for every `p`.
pub type Distribution = BTreeMap<((usize, usize), usize), u64>;

pub fn distribution<G: Network, F: Fn(&[bool]) -> (usize, usize)>(graph: &G, outcome: F) -> Distribution {
    let mut d = Distribution::new();
    for marks in mark_vectors(graph.node_count(), graph.source()) {
        let ones = marks.iter().filter(|&&m| m).count() - 1;
        *d.entry((outcome(&marks), ones)).or_default() += 1;
    }
    d
}

/// Exact expectation of `f` over mark vectors at probability `p`.
pub fn expectation<G: Network, F: Fn(&[bool]) -> f64>(graph: &G, p: f64, f: F) -> f64 {
    mark_vectors(graph.node_count(), graph.source())
        .map(|marks| {
            let ones = marks.iter().filter(|&&m| m).count() as i32 - 1;
            let zeros = graph.node_count() as i32 - 1 - ones;
            p.powi(ones) * (1.0 - p).powi(zeros) * f(&marks)
        })
        .sum()
}

/// Connected components by BFS; `active` restricts the vertex set.
pub fn bfs_components<G: Network>(graph: &G, active: &[bool]) -> Vec<Option<usize>> {
    let n = graph.node_count();
    let mut comp = vec![None; n];
    let mut next = 0;
    for s in 0..n {
        if !active[s] || comp[s].is_some() {
            continue;
        }
        comp[s] = Some(next);
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &u in graph.neighbors(v) {
                let u = u as usize;
                if active[u] && comp[u].is_none() {
                    comp[u] = Some(next);
                    queue.push_back(u);
                }
            }
        }
        next += 1;
    }
    comp
}
