//! Network of canonical ensembles exchanging energy along graph edges,
//! relaxing toward a common temperature and coalescing into blocks as
//! neighboring temperatures equalize.
//!
//! Energy is the conserved quantity: each step moves mean energy across the
//! edges with a linear flux law, then refits every touched node's inverse
//! temperature to its new mean. Block merging is bookkeeping over labels, so
//! merged nodes keep their own ensembles. Both the flux law and the merge
//! criterion are model choices of this module.

use crate::error::{Error, Result};
use crate::replicator::step_plan;
use crate::thermo::{fit_beta, gibbs, CanonicalEnsemble};

/// Tolerance handed to the per-step beta refit; bounds how far a node's
/// realized Gibbs mean may sit from its conserved ledger value.
pub const ENERGY_FIT_TOL: f64 = 1e-10;

/// Explicit Euler stability bound: dt * coupling * max degree must stay
/// below this.
pub const STABILITY_LIMIT: f64 = 0.5;

/// One ensemble in the network, tagged with its current block label.
///
/// The mean energy is kept as an explicit ledger updated by exact flux
/// additions; beta merely tracks it within [`ENERGY_FIT_TOL`]. Summing the
/// ledger therefore conserves total energy to rounding, independent of the
/// refit tolerance.
#[derive(Debug, Clone)]
pub struct EnsembleNode {
    id: String,
    ensemble: CanonicalEnsemble,
    block_id: usize,
    mean_e: f64,
}

impl EnsembleNode {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn ensemble(&self) -> &CanonicalEnsemble {
        &self.ensemble
    }

    /// Label of the merged community this node belongs to; always the
    /// smallest node index in the community.
    pub fn block_id(&self) -> usize {
        self.block_id
    }

    pub fn mean_energy(&self) -> f64 {
        self.mean_e
    }

    pub fn tau(&self) -> f64 {
        1.0 / self.ensemble.beta
    }
}

/// Undirected network of ensembles with a uniform coupling strength and a
/// temperature tolerance below which neighboring blocks merge.
#[derive(Debug, Clone)]
pub struct EnsembleNetwork {
    nodes: Vec<EnsembleNode>,
    edges: Vec<(usize, usize)>,
    coupling: f64,
    merge_tol: f64,
    degree_max: usize,
}

impl EnsembleNetwork {
    pub fn new(
        members: Vec<(String, CanonicalEnsemble)>,
        edges: &[(String, String)],
        coupling: f64,
        merge_tol: f64,
    ) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidArgument("network needs at least one node".into()));
        }
        if !(coupling > 0.0) || !coupling.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "coupling must be positive, got {coupling}"
            )));
        }
        if !(merge_tol > 0.0) || !merge_tol.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "merge tolerance must be positive, got {merge_tol}"
            )));
        }

        let mut nodes = Vec::with_capacity(members.len());
        for (index, (id, ensemble)) in members.into_iter().enumerate() {
            if nodes.iter().any(|n: &EnsembleNode| n.id == id) {
                return Err(Error::InvalidArgument(format!("duplicate node id {id:?}")));
            }
            let mean_e = gibbs(&ensemble.energies, ensemble.beta)?.mean_e;
            nodes.push(EnsembleNode { id, ensemble, block_id: index, mean_e });
        }

        let index_of = |id: &str| -> Result<usize> {
            nodes
                .iter()
                .position(|n| n.id == id)
                .ok_or_else(|| Error::InvalidArgument(format!("edge references unknown node {id:?}")))
        };
        let mut index_edges = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            let (j, k) = (index_of(a)?, index_of(b)?);
            if j == k {
                return Err(Error::InvalidArgument(format!("self-loop on node {a:?}")));
            }
            index_edges.push((j, k));
        }
        let mut degree = vec![0usize; nodes.len()];
        for &(j, k) in &index_edges {
            degree[j] += 1;
            degree[k] += 1;
        }
        let degree_max = degree.into_iter().max().unwrap_or(0);

        Ok(Self { nodes, edges: index_edges, coupling, merge_tol, degree_max })
    }

    pub fn nodes(&self) -> &[EnsembleNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn merge_tol(&self) -> f64 {
        self.merge_tol
    }

    /// Number of distinct block labels.
    pub fn block_count(&self) -> usize {
        let mut labels: Vec<usize> = self.nodes.iter().map(|n| n.block_id).collect();
        labels.sort_unstable();
        labels.dedup();
        labels.len()
    }

    /// Sum of the per-node mean-energy ledgers.
    pub fn total_energy(&self) -> f64 {
        self.nodes.iter().map(|n| n.mean_e).sum()
    }

    /// max tau - min tau across nodes.
    pub fn temperature_spread(&self) -> f64 {
        let taus = self.nodes.iter().map(EnsembleNode::tau);
        let hi = taus.clone().fold(f64::NEG_INFINITY, f64::max);
        let lo = taus.fold(f64::INFINITY, f64::min);
        hi - lo
    }

    /// One explicit Euler step of the edge flux law: each edge (j, k) moves
    /// coupling * (tau_j - tau_k) * dt of mean energy into node k, then every
    /// node with nonzero net flux has its beta refit. A node whose new mean
    /// would leave the open interval of its spectrum rejects the whole step
    /// and the network is left unchanged.
    pub fn exchange_step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let budget = dt * self.coupling * self.degree_max as f64;
        if budget >= STABILITY_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "unstable step: dt * coupling * max degree = {budget} exceeds {STABILITY_LIMIT}; \
                 reduce the step size"
            )));
        }

        let taus: Vec<f64> = self.nodes.iter().map(EnsembleNode::tau).collect();
        let mut delta = vec![0.0; self.nodes.len()];
        for &(j, k) in &self.edges {
            let flux = self.coupling * (taus[j] - taus[k]) * dt;
            delta[k] += flux;
            delta[j] -= flux;
        }

        // Fit every touched node before committing anything, so a rejected
        // step leaves the network untouched.
        let mut updates = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            // Exactly zero net flux skips the refit, making a network at
            // common temperature a bit-exact fixed point.
            if delta[i] == 0.0 {
                continue;
            }
            let energies = &node.ensemble.energies;
            let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mean = node.mean_e + delta[i];
            if !(mean > lo && mean < hi) {
                return Err(Error::InvalidState(format!(
                    "node {}: mean energy {mean} left the open spectrum range ({lo}, {hi}); \
                     reduce the step size",
                    node.id
                )));
            }
            let beta = fit_beta(energies, mean, ENERGY_FIT_TOL)?;
            updates.push((i, mean, beta));
        }
        for (i, mean, beta) in updates {
            self.nodes[i].mean_e = mean;
            self.nodes[i].ensemble.beta = beta;
        }
        Ok(())
    }

    /// Unifies the block labels of every edge whose endpoint temperatures
    /// differ by less than the merge tolerance, transitively. Existing
    /// blocks are preserved: labels only ever merge, never split.
    pub fn merge_blocks(&mut self) {
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..n).collect();

        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        // Attaching the larger root under the smaller keeps every root the
        // minimum index of its component, which doubles as the block label.
        fn union(parent: &mut [usize], i: usize, j: usize) {
            let (a, b) = (find(parent, i), find(parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }

        for i in 0..n {
            let block = self.nodes[i].block_id;
            union(&mut parent, i, block);
        }
        for &(j, k) in &self.edges {
            if (self.nodes[j].tau() - self.nodes[k].tau()).abs() < self.merge_tol {
                union(&mut parent, j, k);
            }
        }
        for i in 0..n {
            self.nodes[i].block_id = find(&mut parent, i);
        }
    }

    /// Alternates exchange steps and block merges over [0, t_end], recording
    /// a sample every `sample_every` steps plus the initial and final states.
    pub fn run(&mut self, dt: f64, t_end: f64, sample_every: usize) -> Result<EquilibrationHistory> {
        if sample_every == 0 {
            return Err(Error::InvalidArgument("sample_every must be at least 1".into()));
        }
        if !(t_end >= 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidArgument(format!("t_end must be >= 0, got {t_end}")));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }

        let (full_steps, remainder) = step_plan(dt, t_end);
        let mut history = EquilibrationHistory {
            node_ids: self.nodes.iter().map(|n| n.id.clone()).collect(),
            times: Vec::new(),
            block_counts: Vec::new(),
            temperatures: Vec::new(),
            total_energy: Vec::new(),
        };
        history.push_sample(0.0, self);

        let mut sampled_last = true;
        for step in 1..=full_steps {
            self.exchange_step(dt)?;
            self.merge_blocks();
            sampled_last = step % sample_every == 0;
            if sampled_last {
                history.push_sample(step as f64 * dt, self);
            }
        }
        if remainder > 0.0 {
            self.exchange_step(remainder)?;
            self.merge_blocks();
            history.push_sample(t_end, self);
        } else if !sampled_last {
            history.push_sample(full_steps as f64 * dt, self);
        }
        Ok(history)
    }
}

/// Sampled time series of a network run.
#[derive(Debug, Clone)]
pub struct EquilibrationHistory {
    pub node_ids: Vec<String>,
    pub times: Vec<f64>,
    pub block_counts: Vec<usize>,
    /// Per-sample node temperatures, in `node_ids` order.
    pub temperatures: Vec<Vec<f64>>,
    pub total_energy: Vec<f64>,
}

impl EquilibrationHistory {
    fn push_sample(&mut self, t: f64, net: &EnsembleNetwork) {
        self.times.push(t);
        self.block_counts.push(net.block_count());
        self.temperatures.push(net.nodes.iter().map(EnsembleNode::tau).collect());
        self.total_energy.push(net.total_energy());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_levels(beta: f64) -> CanonicalEnsemble {
        CanonicalEnsemble::new(vec![0.0, 1.0], beta).unwrap()
    }

    fn pair(beta0: f64, beta1: f64, coupling: f64, merge_tol: f64) -> EnsembleNetwork {
        EnsembleNetwork::new(
            vec![("a".into(), two_levels(beta0)), ("b".into(), two_levels(beta1))],
            &[("a".into(), "b".into())],
            coupling,
            merge_tol,
        )
        .unwrap()
    }

    #[test]
    fn construction_validates_graph() {
        let dup = EnsembleNetwork::new(
            vec![("a".into(), two_levels(1.0)), ("a".into(), two_levels(1.0))],
            &[],
            1.0,
            1e-3,
        );
        assert!(dup.is_err());
        let unknown = EnsembleNetwork::new(
            vec![("a".into(), two_levels(1.0))],
            &[("a".into(), "ghost".into())],
            1.0,
            1e-3,
        );
        assert!(unknown.unwrap_err().to_string().contains("ghost"));
        let self_loop = EnsembleNetwork::new(
            vec![("a".into(), two_levels(1.0))],
            &[("a".into(), "a".into())],
            1.0,
            1e-3,
        );
        assert!(self_loop.is_err());
        assert!(EnsembleNetwork::new(vec![], &[], 1.0, 1e-3).is_err());
    }

    #[test]
    fn isolated_node_is_fixed() {
        let mut net = EnsembleNetwork::new(vec![("solo".into(), two_levels(1.3))], &[], 1.0, 1e-3)
            .unwrap();
        let before_mean = net.nodes()[0].mean_energy();
        let before_beta = net.nodes()[0].ensemble().beta;
        net.exchange_step(0.1).unwrap();
        assert_eq!(net.nodes()[0].mean_energy(), before_mean);
        assert_eq!(net.nodes()[0].ensemble().beta, before_beta);
    }

    #[test]
    fn common_temperature_is_exact_fixed_point() {
        let mut net = pair(0.8, 0.8, 0.3, 1e-3);
        let before: Vec<(f64, f64)> =
            net.nodes().iter().map(|n| (n.mean_energy(), n.ensemble().beta)).collect();
        net.exchange_step(0.05).unwrap();
        let after: Vec<(f64, f64)> =
            net.nodes().iter().map(|n| (n.mean_energy(), n.ensemble().beta)).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn hand_checked_two_node_step() {
        // tau = (0.5, 2.0)
        let mut net = pair(2.0, 0.5, 0.1, 1e-3);
        let m0 = 1.0 / (1.0 + 2.0f64.exp());
        let m1 = 1.0 / (1.0 + 0.5f64.exp());
        assert!((net.nodes()[0].mean_energy() - m0).abs() < 1e-15);
        assert!((net.nodes()[1].mean_energy() - m1).abs() < 1e-15);
        let total = net.total_energy();

        net.exchange_step(0.01).unwrap();
        // flux into the cold node: 0.1 * (2.0 - 0.5) * 0.01
        assert!((net.nodes()[0].mean_energy() - (m0 + 0.0015)).abs() < 1e-15);
        assert!((net.nodes()[1].mean_energy() - (m1 - 0.0015)).abs() < 1e-15);
        assert!((net.total_energy() - total).abs() < 1e-10);
        // betas move toward each other
        assert!(net.nodes()[0].ensemble().beta < 2.0);
        assert!(net.nodes()[1].ensemble().beta > 0.5);
        // the refit beta reproduces the ledger mean within the fit tolerance
        for node in net.nodes() {
            let realized = gibbs(&node.ensemble().energies, node.ensemble().beta).unwrap().mean_e;
            assert!((realized - node.mean_energy()).abs() < ENERGY_FIT_TOL);
        }
    }

    #[test]
    fn unstable_step_is_refused() {
        let mut net = pair(2.0, 0.5, 1.0, 1e-3);
        let err = net.exchange_step(0.5).unwrap_err();
        assert!(!err.is_numerical());
        assert!(err.to_string().contains("reduce the step size"));
    }

    #[test]
    fn escaping_mean_rejects_step_and_preserves_state() {
        // tau = (0.2, 3.0): the flux over one big (but stable) step exceeds
        // what either two-level node can absorb.
        let mut net = pair(5.0, 1.0 / 3.0, 0.9, 1e-3);
        let before: Vec<f64> = net.nodes().iter().map(|n| n.mean_energy()).collect();
        let err = net.exchange_step(0.5).unwrap_err();
        assert!(matches!(err, Error::InvalidState(_)));
        assert!(err.is_numerical());
        let after: Vec<f64> = net.nodes().iter().map(|n| n.mean_energy()).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn merge_is_tolerance_gated_and_transitive() {
        let tol = 0.1;
        let mut net = EnsembleNetwork::new(
            vec![
                ("a".into(), two_levels(1.0)),
                ("b".into(), two_levels(1.0 / (1.0 + tol / 2.0))),
                ("c".into(), two_levels(0.2)),
            ],
            &[("a".into(), "b".into()), ("b".into(), "c".into())],
            1.0,
            tol,
        )
        .unwrap();
        assert_eq!(net.block_count(), 3);
        net.merge_blocks();
        let blocks: Vec<usize> = net.nodes().iter().map(|n| n.block_id()).collect();
        assert_eq!(blocks, vec![0, 0, 2]);
        assert_eq!(net.block_count(), 2);
    }

    #[test]
    fn disconnected_equal_temperatures_never_merge() {
        let mut net = EnsembleNetwork::new(
            vec![("a".into(), two_levels(1.0)), ("b".into(), two_levels(1.0))],
            &[],
            1.0,
            1e-3,
        )
        .unwrap();
        net.merge_blocks();
        assert_eq!(net.block_count(), 2);
    }

    #[test]
    fn merged_labels_never_split() {
        let mut net = pair(1.0, 1.0, 0.3, 1e-3);
        net.merge_blocks();
        assert_eq!(net.block_count(), 1);
        // drive the temperatures far apart behind the ledger's back; the
        // label union must still survive the next merge pass
        net.nodes[1].ensemble.beta = 10.0;
        net.merge_blocks();
        assert_eq!(net.block_count(), 1);
    }

    #[test]
    fn two_node_run_reaches_one_block() {
        let mut net = pair(2.0, 0.5, 0.1, 1e-6);
        let total = net.total_energy();
        let history = net.run(0.05, 200.0, 50).unwrap();

        assert_eq!(*history.block_counts.last().unwrap(), 1);
        assert!(net.temperature_spread() < 1e-6);
        let drift = (net.total_energy() - total).abs() / total.abs();
        assert!(drift < 1e-12);

        for pair in history.times.windows(2) {
            assert!(pair[1] > pair[0]);
        }
        for pair in history.block_counts.windows(2) {
            assert!(pair[1] <= pair[0]);
        }
        assert!(history.temperatures.iter().all(|row| row.len() == 2));
        assert_eq!(history.node_ids, vec!["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn spread_shrinks_between_samples() {
        let betas = [2.0, 0.9, 1.4, 0.6];
        let members: Vec<(String, CanonicalEnsemble)> = betas
            .iter()
            .enumerate()
            .map(|(i, &b)| (format!("n{i}"), two_levels(b)))
            .collect();
        let edges: Vec<(String, String)> =
            (0..3).map(|i| (format!("n{i}"), format!("n{}", i + 1))).collect();
        let mut net = EnsembleNetwork::new(members, &edges, 0.2, 1e-4).unwrap();
        let history = net.run(0.1, 40.0, 5).unwrap();

        let spread = |taus: &Vec<f64>| {
            taus.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - taus.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        for pair in history.temperatures.windows(2) {
            assert!(spread(&pair[1]) <= spread(&pair[0]) + 1e-10);
        }
        assert_eq!(*history.block_counts.last().unwrap(), 1);
    }

    #[test]
    fn zero_t_end_records_initial_state_only() {
        let mut net = pair(2.0, 0.5, 0.1, 1e-3);
        let history = net.run(0.05, 0.0, 10).unwrap();
        assert_eq!(history.times, vec![0.0]);
        assert_eq!(history.block_counts, vec![2]);
    }

    #[test]
    fn partial_final_step_lands_on_t_end() {
        let mut net = pair(2.0, 0.5, 0.1, 1e-3);
        let history = net.run(0.4, 1.0, 1).unwrap();
        assert_eq!(history.times.len(), 4);
        assert_eq!(*history.times.last().unwrap(), 1.0);
    }
}
