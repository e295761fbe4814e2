//! Compressed adjacency storage and the [`Network`] abstraction that the
//! forwarding and clustering routines are written against.

use crate::error::{Error, Result};

/// An undirected simple graph with a distinguished source vertex.
pub trait Network {
    fn node_count(&self) -> usize;
    fn neighbors(&self, v: usize) -> &[u32];
    fn source(&self) -> usize;

    fn degree(&self, v: usize) -> usize {
        self.neighbors(v).len()
    }

    fn edge_count(&self) -> usize {
        (0..self.node_count()).map(|v| self.degree(v)).sum::<usize>() / 2
    }
}

/// CSR adjacency: neighbors of `v` are `targets[offsets[v]..offsets[v+1]]`,
/// sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Adjacency {
    pub(crate) fn from_parts(offsets: Vec<usize>, targets: Vec<u32>) -> Self {
        debug_assert_eq!(offsets.last().copied(), Some(targets.len()));
        Self { offsets, targets }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Builds a symmetric adjacency from an undirected edge list.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut lists = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a as usize >= n || b as usize >= n {
                return Err(Error::InvalidParams(format!("edge ({a}, {b}) out of range for {n} nodes")));
            }
            if a == b {
                return Err(Error::InvalidParams(format!("self-loop at {a}")));
            }
            lists[a as usize].push(b);
            lists[b as usize].push(a);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(2 * edges.len());
        offsets.push(0);
        for mut l in lists {
            l.sort_unstable();
            l.dedup();
            targets.extend(l);
            offsets.push(targets.len());
        }
        Ok(Self { offsets, targets })
    }

    /// Undirected edges `(i, j)` with `i < j`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.node_count()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .filter(move |&&j| (i as u32) < j)
                .map(move |&j| (i as u32, j))
        })
    }
}

/// A plain graph, used for hand-built topologies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Adjacency,
    source: usize,
}

impl Graph {
    pub fn from_edges(n: usize, edges: &[(u32, u32)], source: usize) -> Result<Self> {
        if source >= n {
            return Err(Error::InvalidParams(format!("source {source} out of range for {n} nodes")));
        }
        Ok(Self {
            adjacency: Adjacency::from_edges(n, edges)?,
            source,
        })
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }
}

impl Network for Graph {
    fn node_count(&self) -> usize {
        self.adjacency.node_count()
    }

    fn neighbors(&self, v: usize) -> &[u32] {
        self.adjacency.neighbors(v)
    }

    fn source(&self) -> usize {
        self.source
    }
}
