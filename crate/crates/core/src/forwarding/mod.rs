//! Probabilistic forwarding of `n` coded packets from the source.
//!
//! One packet is simulated by marking every non-source node with an
//! independent Bernoulli(p) "forwards" decision. The transmitters are the
//! source's component among marked nodes, and the receivers are that
//! component together with its full-graph neighborhood. Because each
//! decision is independent of when a node first hears the packet, this
//! coincides with running the protocol event by event.

pub mod crn;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::pointproc::{sample_ppp, SimDomain};
use crate::rgg::{build_rgg, components};
use crate::seed::{derive_stream, trial_id, SeedSpec, Stream};
use crate::stats::{two_level, Estimate};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardingParams {
    /// Coded packets sent by the source (`n`).
    pub n_packets: usize,
    /// Packets needed to decode (`k`).
    pub k_decode: usize,
    /// Forwarding probability (`p`).
    pub forward_prob: f64,
}

impl ForwardingParams {
    pub fn new(n_packets: usize, k_decode: usize, forward_prob: f64) -> Result<Self> {
        let params = Self {
            n_packets,
            k_decode,
            forward_prob,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_decode < 1 || self.k_decode > self.n_packets {
            return Err(Error::InvalidParams(format!(
                "need 1 <= k <= n, got k={} n={}",
                self.k_decode, self.n_packets
            )));
        }
        check_probability(self.forward_prob)
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("forwarding probability must lie in [0, 1], got {p}")))
    }
}

/// Which points make up the denominator of the success fraction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Condition {
    /// Every point of the window, the source included.
    #[default]
    None,
    /// Only the largest component of the graph (sensitivity analysis).
    Giant,
}

/// Node sets reached by one packet, both in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketOutcome {
    pub transmitters: Vec<u32>,
    pub receivers: Vec<u32>,
}

/// Sizes of one packet's transmitter and receiver sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketCounts {
    pub transmitters: usize,
    pub receivers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardingResult {
    /// Packets received by each node; the source holds all `n`.
    pub receive_count: Vec<u32>,
    /// Nodes holding at least `k` packets.
    pub successful_receivers: usize,
    /// Simulcast transmissions summed over packets.
    pub total_transmissions: usize,
    pub per_packet: Vec<PacketCounts>,
    /// Full node sets, kept only when requested.
    pub outcomes: Option<Vec<PacketOutcome>>,
}

/// Fills `out` with one uniform draw per node, in node order.
///
/// The source's draw is consumed but never used, which keeps node `v`'s
/// draw at position `v` of the stream for every graph.
pub fn draw_uniforms(rng: &mut Stream, n: usize, out: &mut Vec<f64>) {
    out.clear();
    out.extend((0..n).map(|_| rng.random::<f64>()));
}

/// Scratch buffers for repeated single-packet runs on graphs of one size.
#[derive(Debug, Default, Clone)]
pub struct Forwarder {
    stamp: Vec<u32>,
    tx_stamp: Vec<u32>,
    epoch: u32,
    queue: Vec<u32>,
    received: Vec<u32>,
}

impl Forwarder {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self, n: usize) {
        if self.stamp.len() != n || self.epoch == u32::MAX {
            self.stamp = vec![0; n];
            self.tx_stamp = vec![0; n];
            self.epoch = 0;
        }
        self.epoch += 1;
        self.queue.clear();
        self.received.clear();
    }

    /// Runs one packet with marks `uniforms[v] < p`. Afterwards
    /// [`Self::transmitters`] and [`Self::receivers`] hold the node sets in
    /// discovery order.
    pub fn run<G: Network + ?Sized>(&mut self, graph: &G, p: f64, uniforms: &[f64]) -> PacketCounts {
        let n = graph.node_count();
        assert_eq!(uniforms.len(), n, "one uniform per node");
        self.reset(n);
        let epoch = self.epoch;
        let src = graph.source();
        self.tx_stamp[src] = epoch;
        self.stamp[src] = epoch;
        self.queue.push(src as u32);
        self.received.push(src as u32);
        let mut head = 0;
        while head < self.queue.len() {
            let x = self.queue[head] as usize;
            head += 1;
            for &y in graph.neighbors(x) {
                let y = y as usize;
                if self.stamp[y] != epoch {
                    self.stamp[y] = epoch;
                    self.received.push(y as u32);
                }
                if self.tx_stamp[y] != epoch && uniforms[y] < p {
                    self.tx_stamp[y] = epoch;
                    self.queue.push(y as u32);
                }
            }
        }
        PacketCounts {
            transmitters: self.queue.len(),
            receivers: self.received.len(),
        }
    }

    pub fn transmitters(&self) -> &[u32] {
        &self.queue
    }

    pub fn receivers(&self) -> &[u32] {
        &self.received
    }

    fn outcome(&self) -> PacketOutcome {
        let mut transmitters = self.queue.clone();
        let mut receivers = self.received.clone();
        transmitters.sort_unstable();
        receivers.sort_unstable();
        PacketOutcome {
            transmitters,
            receivers,
        }
    }
}

/// Forwards one packet with fresh marks drawn from `stream`.
pub fn forward_one_packet<G: Network + ?Sized>(graph: &G, p: f64, stream: &mut Stream) -> Result<PacketOutcome> {
    check_probability(p)?;
    let mut uniforms = Vec::with_capacity(graph.node_count());
    draw_uniforms(stream, graph.node_count(), &mut uniforms);
    Ok(forward_with_uniforms(graph, p, &uniforms))
}

/// Forwards one packet with marks `uniforms[v] < p` (the source always
/// transmits).
pub fn forward_with_uniforms<G: Network + ?Sized>(graph: &G, p: f64, uniforms: &[f64]) -> PacketOutcome {
    let mut fw = Forwarder::new();
    fw.run(graph, p, uniforms);
    fw.outcome()
}

/// Sends `n` packets, packet `j` drawing its marks from stream `j` of
/// `seed`'s trial.
pub fn forward_n_packets<G: Network + ?Sized>(
    graph: &G,
    params: &ForwardingParams,
    seed: SeedSpec,
) -> Result<ForwardingResult> {
    run_packets(graph, params, seed, false)
}

/// Like [`forward_n_packets`] but keeps every packet's node sets.
pub fn forward_n_packets_retaining<G: Network + ?Sized>(
    graph: &G,
    params: &ForwardingParams,
    seed: SeedSpec,
) -> Result<ForwardingResult> {
    run_packets(graph, params, seed, true)
}

fn run_packets<G: Network + ?Sized>(
    graph: &G,
    params: &ForwardingParams,
    seed: SeedSpec,
    retain: bool,
) -> Result<ForwardingResult> {
    params.validate()?;
    let n = graph.node_count();
    let mut receive_count = vec![0u32; n];
    let mut per_packet = Vec::with_capacity(params.n_packets);
    let mut outcomes = retain.then(|| Vec::with_capacity(params.n_packets));
    let mut fw = Forwarder::new();
    let mut uniforms = Vec::with_capacity(n);
    let mut total_transmissions = 0;

    for j in 1..=params.n_packets {
        let mut rng = derive_stream(seed.with_stream(j as u64));
        draw_uniforms(&mut rng, n, &mut uniforms);
        let counts = fw.run(graph, params.forward_prob, &uniforms);
        for &v in fw.receivers() {
            receive_count[v as usize] += 1;
        }
        total_transmissions += counts.transmitters;
        per_packet.push(counts);
        if let Some(o) = outcomes.as_mut() {
            o.push(fw.outcome());
        }
    }
    receive_count[graph.source()] = params.n_packets as u32;
    let k = params.k_decode as u32;
    let successful_receivers = receive_count.iter().filter(|&&c| c >= k).count();
    Ok(ForwardingResult {
        receive_count,
        successful_receivers,
        total_transmissions,
        per_packet,
        outcomes,
    })
}

/// Number of Monte Carlo trials: graphs, and forwarding runs per graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialsSpec {
    pub graph_trials: usize,
    pub fwd_trials: usize,
    pub condition: Condition,
}

impl TrialsSpec {
    pub fn new(graph_trials: usize, fwd_trials: usize) -> Self {
        Self {
            graph_trials,
            fwd_trials,
            condition: Condition::None,
        }
    }

    pub fn with_condition(self, condition: Condition) -> Self {
        Self { condition, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.graph_trials == 0 || self.fwd_trials == 0 {
            return Err(Error::InvalidParams("graph_trials and fwd_trials must be at least 1".into()));
        }
        if self.graph_trials > u32::MAX as usize || self.fwd_trials > u32::MAX as usize {
            return Err(Error::InvalidParams("trial counts must fit in 32 bits".into()));
        }
        Ok(())
    }
}

/// Nodes counted in the success fraction: `None` means all of them.
pub(crate) fn denominator_mask<G: Network + ?Sized>(graph: &G, condition: Condition) -> Option<Vec<bool>> {
    match condition {
        Condition::None => None,
        Condition::Giant => {
            let labels = components(graph, None);
            let giant = labels.largest_id();
            Some((0..graph.node_count()).map(|v| Some(labels.label(v)) == giant).collect())
        }
    }
}

/// Mean fraction of successful receivers over sampled graphs and
/// forwarding runs, with a two-level standard error.
pub fn success_fraction(
    domain: &SimDomain,
    params: &ForwardingParams,
    trials: TrialsSpec,
    master_seed: u64,
) -> Result<Estimate> {
    params.validate()?;
    trials.validate()?;
    let groups = (0..trials.graph_trials as u32)
        .into_par_iter()
        .map(|g| -> Result<Vec<f64>> {
            let points = sample_ppp(domain, SeedSpec::geometry(master_seed, trial_id(g, 0)))?;
            let graph = build_rgg(points);
            let mask = denominator_mask(&graph, trials.condition);
            (0..trials.fwd_trials as u32)
                .map(|f| {
                    let seed = SeedSpec::new(master_seed, trial_id(g, f), 0);
                    let res = forward_n_packets(&graph, params, seed)?;
                    Ok(match &mask {
                        None => res.successful_receivers as f64 / graph.node_count() as f64,
                        Some(m) => {
                            let k = params.k_decode as u32;
                            let members = m.iter().filter(|&&b| b).count();
                            let ok = res
                                .receive_count
                                .iter()
                                .zip(m)
                                .filter(|&(&c, &inside)| inside && c >= k)
                                .count();
                            ok as f64 / members as f64
                        }
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(two_level(&groups))
}
