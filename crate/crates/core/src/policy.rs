//! Graph neural network policy: stacked message-passing layers over the
//! disjunctive graph, a softmax actor over the available operations and a
//! critic over the summed node embeddings.
//!
//! One set of six networks is shared by every layer. Each layer maps the
//! previous embeddings `h` to
//! `f_n([relu(f_p(h_pred)) | relu(f_s(h_succ)) | relu(f_d(sum h_disj)) | relu(sum h) | h | h0])`,
//! where a missing neighbour contributes a zero vector. The graph-wide term
//! is a plain sum by default; mean pooling divides it by the node count.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{node_features, GraphError, NodeId, FEATURE_DIM};
use crate::nn::{Matrix, MlpCache, NnError, ParamStore, UPDATE_INPUT_DIM};
use crate::sim::{Decision, Scheduler, SimError, SimState};

/// Message-passing depth used unless configured otherwise.
pub const DEFAULT_LAYERS: usize = 3;

const D: usize = FEATURE_DIM;

/// Aggregation of the graph-wide term inside each layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphPooling {
    #[default]
    Sum,
    Mean,
}

impl GraphPooling {
    pub fn name(self) -> &'static str {
        match self {
            GraphPooling::Sum => "sum",
            GraphPooling::Mean => "mean",
        }
    }
}

impl std::str::FromStr for GraphPooling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum" => Ok(GraphPooling::Sum),
            "mean" => Ok(GraphPooling::Mean),
            other => Err(format!("unknown graph pooling `{other}`")),
        }
    }
}

/// Architecture choices that are not stored in the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GnnConfig {
    pub num_layers: usize,
    pub graph_pooling: GraphPooling,
}

impl Default for GnnConfig {
    fn default() -> Self {
        Self { num_layers: DEFAULT_LAYERS, graph_pooling: GraphPooling::Sum }
    }
}

impl GnnConfig {
    fn pooling_scale(&self, n: usize) -> f64 {
        match self.graph_pooling {
            GraphPooling::Sum => 1.0,
            GraphPooling::Mean => 1.0 / n as f64,
        }
    }
}

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("action set is empty")]
    EmptyActionSet,
    #[error("graph has no present nodes")]
    EmptyGraph,
    #[error("action {0} is not a present node")]
    ActionNotPresent(NodeId),
    #[error("malformed observation: {0}")]
    MalformedObservation(String),
    #[error("layer count must be at least 1")]
    NoLayers,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// Frozen view of the graph at a decision point. Neighbour lists and action
/// entries are indices into the node list.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphObservation {
    nodes: Vec<NodeId>,
    features: Matrix,
    preceding: Vec<Option<usize>>,
    succeeding: Vec<Option<usize>>,
    disjunctive: Vec<Vec<usize>>,
    actions: Vec<usize>,
}

impl GraphObservation {
    pub fn from_state(state: &SimState, actions: &[NodeId]) -> Result<Self, PolicyError> {
        let graph = state.graph();
        let nodes: Vec<NodeId> = graph.present_nodes().collect();
        if nodes.is_empty() {
            return Err(PolicyError::EmptyGraph);
        }
        let mut local = vec![usize::MAX; graph.num_nodes()];
        for (i, &v) in nodes.iter().enumerate() {
            local[graph.index(v)] = i;
        }
        let mut features = Matrix::zeros(nodes.len(), D);
        let mut preceding = Vec::with_capacity(nodes.len());
        let mut succeeding = Vec::with_capacity(nodes.len());
        let mut disjunctive = Vec::with_capacity(nodes.len());
        for (i, &v) in nodes.iter().enumerate() {
            features.row_mut(i).copy_from_slice(&node_features(state, v)?);
            let nb = graph.neighborhoods(v)?;
            preceding.push(nb.preceding.map(|w| local[graph.index(w)]));
            succeeding.push(nb.succeeding.map(|w| local[graph.index(w)]));
            disjunctive.push(nb.disjunctive.iter().map(|&w| local[graph.index(w)]).collect());
        }
        let actions = actions
            .iter()
            .map(|&a| {
                let present = a.job < graph.num_jobs() && a.rank < graph.num_machines() && graph.is_present(a);
                if present {
                    Ok(local[graph.index(a)])
                } else {
                    Err(PolicyError::ActionNotPresent(a))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { nodes, features, preceding, succeeding, disjunctive, actions })
    }

    /// Builds an observation from explicit parts, checking every index.
    pub fn new(
        nodes: Vec<NodeId>,
        features: Matrix,
        preceding: Vec<Option<usize>>,
        succeeding: Vec<Option<usize>>,
        disjunctive: Vec<Vec<usize>>,
        actions: Vec<usize>,
    ) -> Result<Self, PolicyError> {
        let n = nodes.len();
        if n == 0 {
            return Err(PolicyError::EmptyGraph);
        }
        if features.shape() != (n, D) {
            return Err(PolicyError::MalformedObservation(format!(
                "features are {:?}, expected ({n}, {D})",
                features.shape()
            )));
        }
        if preceding.len() != n || succeeding.len() != n || disjunctive.len() != n {
            return Err(PolicyError::MalformedObservation("neighbour lists must have one entry per node".into()));
        }
        let in_range = |i: &usize| *i < n;
        let ok = preceding.iter().flatten().all(in_range)
            && succeeding.iter().flatten().all(in_range)
            && disjunctive.iter().flatten().all(in_range)
            && actions.iter().all(in_range);
        if !ok {
            return Err(PolicyError::MalformedObservation("index out of range".into()));
        }
        Ok(Self { nodes, features, preceding, succeeding, disjunctive, actions })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Initial features, one row per node.
    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn preceding(&self) -> &[Option<usize>] {
        &self.preceding
    }

    pub fn succeeding(&self) -> &[Option<usize>] {
        &self.succeeding
    }

    pub fn disjunctive(&self) -> &[Vec<usize>] {
        &self.disjunctive
    }

    /// Node indices of the available actions.
    pub fn action_indices(&self) -> &[usize] {
        &self.actions
    }

    pub fn actions(&self) -> Vec<NodeId> {
        self.actions.iter().map(|&i| self.nodes[i]).collect()
    }

    /// Position of `v` within the action set.
    pub fn action_position(&self, v: NodeId) -> Option<usize> {
        self.actions.iter().position(|&i| self.nodes[i] == v)
    }
}

#[derive(Debug, Clone)]
struct LayerCache {
    preceding: MlpCache,
    succeeding: MlpCache,
    disjunctive: MlpCache,
    update: MlpCache,
    /// Pre-rectifier outputs of the three neighbourhood networks.
    pre_out: Matrix,
    suc_out: Matrix,
    dis_out: Matrix,
    graph_sum: Vec<f64>,
}

/// Activations of every layer, kept for [`embed_backward`].
#[derive(Debug, Clone)]
pub struct EmbedCache {
    layers: Vec<LayerCache>,
    /// Factor applied to the graph-wide sum.
    scale: f64,
}

fn gather_optional(h: &Matrix, idx: &[Option<usize>]) -> Matrix {
    let mut out = Matrix::zeros(idx.len(), h.cols());
    for (v, w) in idx.iter().enumerate() {
        if let Some(w) = *w {
            out.row_mut(v).copy_from_slice(h.row(w));
        }
    }
    out
}

fn sum_lists(h: &Matrix, lists: &[Vec<usize>]) -> Matrix {
    let mut out = Matrix::zeros(lists.len(), h.cols());
    for (v, list) in lists.iter().enumerate() {
        let row = out.row_mut(v);
        for &w in list {
            for (o, x) in row.iter_mut().zip(h.row(w)) {
                *o += x;
            }
        }
    }
    out
}

fn relu_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = s.max(0.0);
    }
}

/// Node embeddings after `gnn.num_layers` message-passing layers, one row per node.
pub fn embed(obs: &GraphObservation, params: &ParamStore, gnn: GnnConfig) -> Result<(Matrix, EmbedCache), PolicyError> {
    let num_layers = gnn.num_layers;
    if num_layers == 0 {
        return Err(PolicyError::NoLayers);
    }
    let n = obs.num_nodes();
    let scale = gnn.pooling_scale(n);
    let h0 = &obs.features;
    let mut h = h0.clone();
    let mut layers = Vec::with_capacity(num_layers);
    for _ in 0..num_layers {
        let (pre_out, preceding) = params.preceding.forward(&gather_optional(&h, &obs.preceding))?;
        let (suc_out, succeeding) = params.succeeding.forward(&gather_optional(&h, &obs.succeeding))?;
        let (dis_out, disjunctive) = params.disjunctive.forward(&sum_lists(&h, &obs.disjunctive))?;
        let graph_sum: Vec<f64> = h.sum_rows().into_iter().map(|x| x * scale).collect();
        let mut x = Matrix::zeros(n, UPDATE_INPUT_DIM);
        for v in 0..n {
            let row = x.row_mut(v);
            relu_into(&mut row[0..D], pre_out.row(v));
            relu_into(&mut row[D..2 * D], suc_out.row(v));
            relu_into(&mut row[2 * D..3 * D], dis_out.row(v));
            relu_into(&mut row[3 * D..4 * D], &graph_sum);
            row[4 * D..5 * D].copy_from_slice(h.row(v));
            row[5 * D..6 * D].copy_from_slice(h0.row(v));
        }
        let (next, update) = params.update.forward(&x)?;
        layers.push(LayerCache { preceding, succeeding, disjunctive, update, pre_out, suc_out, dis_out, graph_sum });
        h = next;
    }
    Ok((h, EmbedCache { layers, scale }))
}

fn masked(grad: &Matrix, cols: std::ops::Range<usize>, pre_activation: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(grad.rows(), cols.len());
    for v in 0..grad.rows() {
        let g = &grad.row(v)[cols.clone()];
        for ((o, &g), &a) in out.row_mut(v).iter_mut().zip(g).zip(pre_activation.row(v)) {
            if a > 0.0 {
                *o = g;
            }
        }
    }
    out
}

fn add_row(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// Accumulates into `grads` the parameter gradient of a scalar whose
/// gradient with respect to the final embeddings is `d_embeddings`.
pub fn embed_backward(
    obs: &GraphObservation,
    params: &ParamStore,
    cache: &EmbedCache,
    d_embeddings: Matrix,
    grads: &mut ParamStore,
) -> Result<(), PolicyError> {
    let n = obs.num_nodes();
    let mut dh = d_embeddings;
    for layer in cache.layers.iter().rev() {
        let dx = params.update.backward(&layer.update, &dh, &mut grads.update)?;
        let mut dprev = Matrix::zeros(n, D);

        let dp =
            params.preceding.backward(&layer.preceding, &masked(&dx, 0..D, &layer.pre_out), &mut grads.preceding)?;
        let ds = params.succeeding.backward(
            &layer.succeeding,
            &masked(&dx, D..2 * D, &layer.suc_out),
            &mut grads.succeeding,
        )?;
        let dd = params.disjunctive.backward(
            &layer.disjunctive,
            &masked(&dx, 2 * D..3 * D, &layer.dis_out),
            &mut grads.disjunctive,
        )?;
        let mut dg = vec![0.0; D];
        for v in 0..n {
            if let Some(w) = obs.preceding[v] {
                add_row(dprev.row_mut(w), dp.row(v));
            }
            if let Some(w) = obs.succeeding[v] {
                add_row(dprev.row_mut(w), ds.row(v));
            }
            for &w in &obs.disjunctive[v] {
                add_row(dprev.row_mut(w), dd.row(v));
            }
            add_row(&mut dg, &dx.row(v)[3 * D..4 * D]);
            add_row(dprev.row_mut(v), &dx.row(v)[4 * D..5 * D]);
        }
        for (g, &s) in dg.iter_mut().zip(&layer.graph_sum) {
            *g = if s > 0.0 { *g * cache.scale } else { 0.0 };
        }
        for v in 0..n {
            add_row(dprev.row_mut(v), &dg);
        }
        dh = dprev;
    }
    Ok(())
}

/// Softmax with max-subtraction; returns `(probs, log_probs)`.
pub fn softmax(logits: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_z = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    let log_probs: Vec<f64> = logits.iter().map(|z| z - log_z).collect();
    (log_probs.iter().map(|l| l.exp()).collect(), log_probs)
}

/// Action distribution over the rows `actions` of `embeddings`.
pub fn actor_probs(embeddings: &Matrix, actions: &[usize], params: &ParamStore) -> Result<Vec<f64>, PolicyError> {
    if actions.is_empty() {
        return Err(PolicyError::EmptyActionSet);
    }
    let (logits, _) = params.logit.forward(&embeddings.gather_rows(actions))?;
    Ok(softmax(logits.as_slice()).0)
}

/// Critic estimate from the sum of all node embeddings.
pub fn critic_value(embeddings: &Matrix, params: &ParamStore) -> Result<f64, PolicyError> {
    if embeddings.rows() == 0 {
        return Err(PolicyError::EmptyGraph);
    }
    let (v, _) = params.value.forward_vec(&embeddings.sum_rows())?;
    Ok(v[0])
}

#[derive(Debug, Clone)]
pub struct PolicyOutput {
    pub logits: Vec<f64>,
    /// Aligned with the observation's action set.
    pub probs: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub value: f64,
    pub embeddings: Matrix,
}

/// Everything [`backward`] needs from a forward pass.
#[derive(Debug, Clone)]
pub struct PolicyCache {
    embed: EmbedCache,
    logit: MlpCache,
    value: MlpCache,
}

/// Forward pass of embedding, actor and critic.
pub fn evaluate(
    obs: &GraphObservation,
    params: &ParamStore,
    gnn: GnnConfig,
) -> Result<(PolicyOutput, PolicyCache), PolicyError> {
    if obs.actions.is_empty() {
        return Err(PolicyError::EmptyActionSet);
    }
    let (embeddings, embed_cache) = embed(obs, params, gnn)?;
    let (logits, logit) = params.logit.forward(&embeddings.gather_rows(&obs.actions))?;
    let (value, value_cache) = params.value.forward_vec(&embeddings.sum_rows())?;
    let logits = logits.as_slice().to_vec();
    let (probs, log_probs) = softmax(&logits);
    let out = PolicyOutput { logits, probs, log_probs, value: value[0], embeddings };
    Ok((out, PolicyCache { embed: embed_cache, logit, value: value_cache }))
}

/// Accumulates into `grads` the gradient of a scalar with partial derivatives
/// `d_logits` (one per action) and `d_value`.
pub fn backward(
    obs: &GraphObservation,
    params: &ParamStore,
    cache: &PolicyCache,
    d_logits: &[f64],
    d_value: f64,
    grads: &mut ParamStore,
) -> Result<(), PolicyError> {
    if d_logits.len() != obs.actions.len() {
        return Err(NnError::DimensionMismatch { expected: obs.actions.len(), found: d_logits.len() }.into());
    }
    let n = obs.num_nodes();
    let mut dh = Matrix::zeros(n, D);
    let up = Matrix::from_vec(d_logits.len(), 1, d_logits.to_vec());
    let da = params.logit.backward(&cache.logit, &up, &mut grads.logit)?;
    for (k, &v) in obs.actions.iter().enumerate() {
        add_row(dh.row_mut(v), da.row(k));
    }
    let ds = params.value.backward_vec(&cache.value, &[d_value], &mut grads.value)?;
    for v in 0..n {
        add_row(dh.row_mut(v), &ds);
    }
    embed_backward(obs, params, &cache.embed, dh, grads)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActMode {
    Sample,
    /// Most probable action; ties go to the smallest (job, rank).
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Act {
    pub action: NodeId,
    /// Position within the action set.
    pub index: usize,
    pub log_prob: f64,
    pub value: f64,
}

/// Inverse-CDF draw from `probs`.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

fn greedy_index(obs: &GraphObservation, probs: &[f64]) -> usize {
    let mut best = 0;
    for k in 1..probs.len() {
        let better = probs[k] > probs[best]
            || (probs[k] == probs[best] && obs.nodes[obs.actions[k]] < obs.nodes[obs.actions[best]]);
        if better {
            best = k;
        }
    }
    best
}

pub fn act<R: Rng + ?Sized>(
    obs: &GraphObservation,
    params: &ParamStore,
    gnn: GnnConfig,
    mode: ActMode,
    rng: &mut R,
) -> Result<Act, PolicyError> {
    let (out, _) = evaluate(obs, params, gnn)?;
    let index = match mode {
        ActMode::Sample => sample_index(&out.probs, rng),
        ActMode::Greedy => greedy_index(obs, &out.probs),
    };
    Ok(Act { action: obs.nodes[obs.actions[index]], index, log_prob: out.log_probs[index], value: out.value })
}

/// Scheduler driven by the policy network.
#[derive(Debug, Clone)]
pub struct GnnScheduler {
    params: Arc<ParamStore>,
    mode: ActMode,
    gnn: GnnConfig,
    rng: ChaCha8Rng,
    record_observations: bool,
}

impl GnnScheduler {
    pub fn new(params: Arc<ParamStore>, mode: ActMode, seed: u64) -> Self {
        Self {
            params,
            mode,
            gnn: GnnConfig::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            record_observations: false,
        }
    }

    pub fn with_gnn(mut self, gnn: GnnConfig) -> Self {
        self.gnn = gnn;
        self
    }

    /// Attach each decision's observation to the returned [`Decision`].
    pub fn recording(mut self, record: bool) -> Self {
        self.record_observations = record;
        self
    }

    pub fn params(&self) -> &Arc<ParamStore> {
        &self.params
    }
}

impl Scheduler for GnnScheduler {
    fn decide(&mut self, state: &SimState, actions: &[NodeId]) -> Result<Decision, SimError> {
        let obs = GraphObservation::from_state(state, actions)?;
        let a = act(&obs, &self.params, self.gnn, self.mode, &mut self.rng)?;
        Ok(Decision {
            action: a.action,
            log_prob: Some(a.log_prob),
            value: Some(a.value),
            observation: self.record_observations.then_some(obs),
        })
    }
}
