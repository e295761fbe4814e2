//! Common-random-number evaluation of forwarding outcomes for every `p` at once.
//!
//! With the per-node uniforms of a packet held fixed, node `v` receives the
//! packet at probability `p` iff some path from the source reaches `v`
//! through intermediate nodes whose uniforms are all `< p`. The smallest
//! such `p` is a bottleneck (minimax) path length, the node's *reception
//! threshold*, so `v` receives iff `threshold < p`. A node transmits iff it
//! receives and its own uniform is `< p`. Hence a single minimax search per
//! packet yields the whole monotone outcome curve `p ↦ outcome`, exactly
//! matching direct simulation with marks `u < p`.
//!
//! [`CrnPanel`] stores these curves on a uniform grid of `p` values for many
//! trials so that searches over `p` never re-simulate.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::{denominator_mask, draw_uniforms, TrialsSpec};
use crate::error::{Error, Result};
use crate::graph::Network;
use crate::pointproc::{sample_ppp, SimDomain};
use crate::rgg::build_rgg;
use crate::seed::{derive_stream, trial_id, SeedSpec};
use crate::stats::{two_level, Estimate};

/// Threshold of nodes that receive at every `p` (the source and its
/// neighbors).
pub const ALWAYS: f64 = -1.0;
/// Threshold of nodes outside the source's component.
pub const NEVER: f64 = f64::INFINITY;

#[inline]
fn key(t: f64) -> u64 {
    if t < 0.0 {
        0
    } else {
        t.to_bits() + 1
    }
}

/// Per-node reception and transmission thresholds of one packet.
#[derive(Debug, Clone, Default)]
pub struct Thresholds {
    pub receive: Vec<f64>,
    pub transmit: Vec<f64>,
    heap: BinaryHeap<Reverse<(u64, u32)>>,
}

impl Thresholds {
    pub fn new() -> Self {
        Self::default()
    }

    /// Computes thresholds for the given per-node uniforms.
    pub fn compute<G: Network + ?Sized>(&mut self, graph: &G, uniforms: &[f64]) {
        let n = graph.node_count();
        assert_eq!(uniforms.len(), n, "one uniform per node");
        let src = graph.source();
        self.receive.clear();
        self.receive.resize(n, NEVER);
        self.transmit.clear();
        self.transmit.resize(n, NEVER);
        self.heap.clear();

        self.receive[src] = ALWAYS;
        self.heap.push(Reverse((key(ALWAYS), src as u32)));
        while let Some(Reverse((k, x))) = self.heap.pop() {
            let x = x as usize;
            if k != key(self.receive[x]) || self.transmit[x] != NEVER {
                continue;
            }
            let level = if x == src {
                ALWAYS
            } else {
                self.receive[x].max(uniforms[x])
            };
            self.transmit[x] = level;
            for &y in graph.neighbors(x) {
                let y = y as usize;
                if level < self.receive[y] {
                    self.receive[y] = level;
                    self.heap.push(Reverse((key(level), y as u32)));
                }
            }
        }
        // Nodes reached only through their own level still need a transmit value.
        for ((t, &r), &u) in self.transmit.iter_mut().zip(&self.receive).zip(uniforms) {
            if *t == NEVER && r != NEVER {
                *t = r.max(u);
            }
        }
    }
}

/// Uniform grid `p_i = i / resolution`, `i = 0..=resolution`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PGrid {
    resolution: u32,
}

impl PGrid {
    pub fn new(resolution: u32) -> Result<Self> {
        if resolution == 0 || resolution > u16::MAX as u32 - 2 {
            return Err(Error::InvalidParams(format!("grid resolution {resolution} out of range")));
        }
        Ok(Self { resolution })
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    #[inline]
    pub fn p(&self, i: u32) -> f64 {
        f64::from(i) / f64::from(self.resolution)
    }

    /// Largest grid index with `p_i <= p`.
    pub fn floor_index(&self, p: f64) -> u32 {
        let mut i = ((p * f64::from(self.resolution)).floor().max(0.0) as u32).min(self.resolution);
        while i > 0 && self.p(i) > p {
            i -= 1;
        }
        while i < self.resolution && self.p(i + 1) <= p {
            i += 1;
        }
        i
    }

    /// Smallest index `i` with `t < p_i`, or `resolution + 1` if none.
    #[inline]
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn bin(&self, t: f64) -> u16 {
        let r = self.resolution;
        if t < 0.0 {
            return 0;
        }
        if !(t < 1.0) {
            return (r + 1) as u16;
        }
        let mut i = ((t * f64::from(r)).floor() as u32 + 1).min(r + 1);
        while i > 0 && t < self.p(i - 1) {
            i -= 1;
        }
        while i <= r && !(t < self.p(i)) {
            i += 1;
        }
        i as u16
    }
}

/// Outcome curves of one forwarding run, on the panel's grid.
#[derive(Debug, Clone)]
struct TrialCurves {
    denominator: u32,
    /// `success[c][i]`: successful receivers at `p_i` for the `c`-th packet count.
    success: Vec<Vec<u32>>,
    /// `transmissions[c][i]`: total transmissions at `p_i`.
    transmissions: Vec<Vec<u32>>,
}

/// Success and transmission curves for many trials, evaluated under common
/// random numbers on a grid of forwarding probabilities.
///
/// Packet counts `n` share their first packets, so curves for different
/// `n` are coupled as well.
#[derive(Debug, Clone)]
pub struct CrnPanel {
    grid: PGrid,
    k_decode: usize,
    packet_counts: Vec<usize>,
    /// `graphs[g][f]`.
    graphs: Vec<Vec<TrialCurves>>,
    area_intensity: f64,
}

fn cumulate(hist: &[u32]) -> Vec<u32> {
    let mut acc = 0;
    hist.iter()
        .map(|&h| {
            acc += h;
            acc
        })
        .collect()
}

impl CrnPanel {
    /// Simulates every trial once and records its curves.
    ///
    /// `packet_counts` must be ascending with every entry `>= k_decode`.
    pub fn build(
        domain: &SimDomain,
        k_decode: usize,
        packet_counts: &[usize],
        trials: TrialsSpec,
        master_seed: u64,
        grid: PGrid,
    ) -> Result<Self> {
        trials.validate()?;
        if packet_counts.is_empty() {
            return Err(Error::InvalidParams("no packet counts".into()));
        }
        if k_decode == 0 || packet_counts[0] < k_decode || packet_counts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams(format!(
                "packet counts {packet_counts:?} must be strictly ascending and at least k={k_decode}"
            )));
        }
        let graphs = (0..trials.graph_trials as u32)
            .into_par_iter()
            .map(|g| -> Result<Vec<TrialCurves>> {
                let points = sample_ppp(domain, SeedSpec::geometry(master_seed, trial_id(g, 0)))?;
                let graph = build_rgg(points);
                let mask = denominator_mask(&graph, trials.condition);
                (0..trials.fwd_trials as u32)
                    .into_par_iter()
                    .map(|f| {
                        let seed = SeedSpec::new(master_seed, trial_id(g, f), 0);
                        Ok(trial_curves(&graph, mask.as_deref(), k_decode, packet_counts, seed, grid))
                    })
                    .collect()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid,
            k_decode,
            packet_counts: packet_counts.to_vec(),
            graphs,
            area_intensity: domain.expected_points(),
        })
    }

    pub fn grid(&self) -> PGrid {
        self.grid
    }

    pub fn k_decode(&self) -> usize {
        self.k_decode
    }

    pub fn packet_counts(&self) -> &[usize] {
        &self.packet_counts
    }

    /// `λ m²` of the simulated domain.
    pub fn expected_points(&self) -> f64 {
        self.area_intensity
    }

    fn column(&self, n: usize) -> Result<usize> {
        self.packet_counts
            .iter()
            .position(|&c| c == n)
            .ok_or_else(|| Error::InvalidParams(format!("packet count {n} not in panel")))
    }

    /// Mean successful-receiver fraction at grid point `i`.
    pub fn success_at(&self, n: usize, i: u32) -> Result<Estimate> {
        let c = self.column(n)?;
        let groups: Vec<Vec<f64>> = self
            .graphs
            .iter()
            .map(|runs| {
                runs.iter()
                    .map(|t| f64::from(t.success[c][i as usize]) / f64::from(t.denominator))
                    .collect()
            })
            .collect();
        Ok(two_level(&groups))
    }

    /// Mean total transmissions at grid point `i`.
    pub fn transmissions_at(&self, n: usize, i: u32) -> Result<Estimate> {
        let c = self.column(n)?;
        let groups: Vec<Vec<f64>> = self
            .graphs
            .iter()
            .map(|runs| runs.iter().map(|t| f64::from(t.transmissions[c][i as usize])).collect())
            .collect();
        Ok(two_level(&groups))
    }
}

fn trial_curves<G: Network + ?Sized>(
    graph: &G,
    mask: Option<&[bool]>,
    k: usize,
    packet_counts: &[usize],
    seed: SeedSpec,
    grid: PGrid,
) -> TrialCurves {
    let n_nodes = graph.node_count();
    let n_max = *packet_counts.last().unwrap();
    let width = grid.resolution() as usize + 2;
    let mut uniforms = Vec::with_capacity(n_nodes);
    let mut th = Thresholds::new();
    // receive bins, node-major: bins[v * n_max + j]
    let mut bins = vec![0u16; n_nodes * n_max];
    let mut tx_hist = vec![0u32; width];
    let mut transmissions = Vec::with_capacity(packet_counts.len());
    let mut next = 0;
    for j in 0..n_max {
        let mut rng = derive_stream(seed.with_stream(j as u64 + 1));
        draw_uniforms(&mut rng, n_nodes, &mut uniforms);
        th.compute(graph, &uniforms);
        for v in 0..n_nodes {
            bins[v * n_max + j] = grid.bin(th.receive[v]);
            tx_hist[grid.bin(th.transmit[v]) as usize] += 1;
        }
        if j + 1 == packet_counts[next] {
            let mut cum = cumulate(&tx_hist);
            cum.truncate(width - 1);
            transmissions.push(cum);
            next += 1;
        }
    }

    // Success bin of a node for packet count n: the k-th smallest receive
    // bin among its first n packets (the source always succeeds).
    let mut hists = vec![vec![0u32; width]; packet_counts.len()];
    let mut heap: BinaryHeap<u16> = BinaryHeap::with_capacity(k + 1);
    let src = graph.source();
    let mut denominator = 0u32;
    for v in 0..n_nodes {
        if mask.is_some_and(|m| !m[v]) {
            continue;
        }
        denominator += 1;
        if v == src {
            for h in hists.iter_mut() {
                h[0] += 1;
            }
            continue;
        }
        heap.clear();
        let row = &bins[v * n_max..(v + 1) * n_max];
        let mut c = 0;
        for (j, &b) in row.iter().enumerate() {
            if heap.len() < k {
                heap.push(b);
            } else if b < *heap.peek().unwrap() {
                heap.pop();
                heap.push(b);
            }
            if j + 1 == packet_counts[c] {
                hists[c][*heap.peek().unwrap() as usize] += 1;
                c += 1;
            }
        }
    }
    let success = hists
        .iter()
        .map(|h| {
            let mut cum = cumulate(h);
            cum.truncate(width - 1);
            cum
        })
        .collect();

    TrialCurves {
        denominator,
        success,
        transmissions,
    }
}
