//! Proximal policy optimization for the GNN scheduler.
//!
//! An iteration rolls out one episode with the sampling policy, turns its
//! decisions into a batch with generalized advantage estimates, and takes
//! `epochs` full-batch Adam ascent steps on the clipped objective. Steps in
//! which nothing could be loaded add their reward to the preceding decision.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{sample_training_size, Instance};
use crate::nn::{AdamConfig, AdamState, NnError, ParamStore};
use crate::policy::{
    self, ActMode, GnnConfig, GnnScheduler, GraphObservation, GraphPooling, PolicyError, DEFAULT_LAYERS,
};
use crate::seeding::derive_seed;
use crate::sim::{run_episode, Action, Episode, EpisodeConfig, SimConfig, SimError, DEFAULT_STEP_CAP};

pub const TRAIN_LOG_HEADER: &str = "iteration,episode_return,makespan,validation_mean,wall_ms";

#[derive(Debug, Error)]
pub enum PpoError {
    #[error("{rewards} rewards but {values} value estimates")]
    LengthMismatch { rewards: usize, values: usize },
    #[error("batch has no decision samples")]
    EmptyBatch,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("decision sample is missing its {0}")]
    MissingRecord(&'static str),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Nn(#[from] NnError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_epsilon: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Iterations between training-instance regenerations.
    pub refresh_every: usize,
    /// Iterations spent on the first training instance.
    pub initial_hold: usize,
    pub p_interrupt: f64,
    pub t_interrupt: u32,
    pub validation_size: usize,
    /// Iterations between greedy validation runs.
    pub validation_every: usize,
    /// Validation runs without improvement before stopping.
    pub patience: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub normalize_advantages: bool,
    /// Multiplies every reward before advantages and targets are formed.
    pub reward_scale: f64,
    pub num_layers: usize,
    pub graph_pooling: GraphPooling,
    pub step_cap: u64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            gae_lambda: 0.95,
            clip_epsilon: 0.2,
            value_coef: 0.5,
            entropy_coef: 0.01,
            learning_rate: 2.5e-4,
            epochs: 4,
            refresh_every: 100,
            initial_hold: 100,
            p_interrupt: 0.0,
            t_interrupt: 50,
            validation_size: 10,
            validation_every: 20,
            patience: 50,
            max_iterations: 5000,
            seed: 0,
            normalize_advantages: true,
            reward_scale: 1.0,
            num_layers: DEFAULT_LAYERS,
            graph_pooling: GraphPooling::Sum,
            step_cap: DEFAULT_STEP_CAP,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), PpoError> {
        let fail = |msg: &str| Err(PpoError::InvalidConfig(msg.to_string()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return fail("gamma must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return fail("gae_lambda must lie in [0, 1]");
        }
        // Written so that NaN fails too.
        let positive = |x: f64| x > 0.0;
        if !positive(self.clip_epsilon) {
            return fail("clip_epsilon must be positive");
        }
        if !positive(self.learning_rate) || !positive(self.reward_scale) {
            return fail("learning_rate and reward_scale must be positive");
        }
        if self.value_coef < 0.0 || self.entropy_coef < 0.0 {
            return fail("loss coefficients must be non-negative");
        }
        if self.epochs == 0 || self.refresh_every == 0 || self.initial_hold == 0 || self.validation_every == 0 {
            return fail("epochs, refresh_every, initial_hold and validation_every must be at least 1");
        }
        if self.validation_size == 0 || self.patience == 0 || self.num_layers == 0 {
            return fail("validation_size, patience and num_layers must be at least 1");
        }
        self.sim().validate().map_err(|e| PpoError::InvalidConfig(e.to_string()))
    }

    pub fn sim(&self) -> SimConfig {
        SimConfig { p_interrupt: self.p_interrupt, t_interrupt: self.t_interrupt }
    }

    pub fn gnn(&self) -> GnnConfig {
        GnnConfig { num_layers: self.num_layers, graph_pooling: self.graph_pooling }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig { learning_rate: self.learning_rate, ..AdamConfig::default() }
    }
}

/// Generalized advantage estimates by backward recursion, bootstrapping the
/// terminal state with value 0.
pub fn compute_gae(rewards: &[f64], values: &[f64], gamma: f64, lambda: f64) -> Result<Vec<f64>, PpoError> {
    if rewards.len() != values.len() {
        return Err(PpoError::LengthMismatch { rewards: rewards.len(), values: values.len() });
    }
    let mut adv = vec![0.0; rewards.len()];
    let mut next_value = 0.0;
    let mut running = 0.0;
    for t in (0..rewards.len()).rev() {
        let delta = rewards[t] + gamma * next_value - values[t];
        running = delta + gamma * lambda * running;
        adv[t] = running;
        next_value = values[t];
    }
    Ok(adv)
}

/// Discounted reward-to-go.
pub fn value_targets(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for t in (0..rewards.len()).rev() {
        acc = rewards[t] + gamma * acc;
        out[t] = acc;
    }
    out
}

/// `min(ratio * adv, clip(ratio, 1 - eps, 1 + eps) * adv)`.
pub fn clipped_surrogate(ratio: f64, advantage: f64, epsilon: f64) -> f64 {
    (ratio * advantage).min(ratio.clamp(1.0 - epsilon, 1.0 + epsilon) * advantage)
}

#[derive(Debug, Clone)]
pub struct BatchSample {
    pub observation: GraphObservation,
    /// Position of the chosen action within the observation's action set.
    pub action: usize,
    pub old_log_prob: f64,
    /// Scaled reward credited to this decision.
    pub reward: f64,
    pub value: f64,
    pub advantage: f64,
    pub target: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RolloutBatch {
    pub samples: Vec<BatchSample>,
}

impl RolloutBatch {
    pub fn from_episode(episode: &Episode, config: &PpoConfig) -> Result<Self, PpoError> {
        let mut samples: Vec<BatchSample> = Vec::new();
        for t in &episode.transitions {
            let reward = t.reward * config.reward_scale;
            match t.action {
                Action::Load(v) => {
                    let observation = t.observation.clone().ok_or(PpoError::MissingRecord("observation"))?;
                    let action = observation.action_position(v).ok_or(PpoError::MissingRecord("chosen action"))?;
                    samples.push(BatchSample {
                        observation,
                        action,
                        old_log_prob: t.old_log_prob.ok_or(PpoError::MissingRecord("log-probability"))?,
                        reward,
                        value: t.value_estimate.ok_or(PpoError::MissingRecord("value estimate"))?,
                        advantage: 0.0,
                        target: 0.0,
                    });
                }
                // Rewards before the first decision cannot be influenced and are dropped.
                Action::TimeAdvance => {
                    if let Some(last) = samples.last_mut() {
                        last.reward += reward;
                    }
                }
            }
        }
        let mut batch = Self { samples };
        batch.compute_targets(config)?;
        Ok(batch)
    }

    /// Fills in advantages and value targets from the stored rewards and values.
    pub fn compute_targets(&mut self, config: &PpoConfig) -> Result<(), PpoError> {
        let rewards: Vec<f64> = self.samples.iter().map(|s| s.reward).collect();
        let values: Vec<f64> = self.samples.iter().map(|s| s.value).collect();
        let mut adv = compute_gae(&rewards, &values, config.gamma, config.gae_lambda)?;
        if config.normalize_advantages && adv.len() > 1 {
            let n = adv.len() as f64;
            let mean = adv.iter().sum::<f64>() / n;
            let std = (adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
            for a in &mut adv {
                *a = (*a - mean) / (std + 1e-8);
            }
        }
        let targets = value_targets(&rewards, config.gamma);
        for ((s, a), t) in self.samples.iter_mut().zip(adv).zip(targets) {
            s.advantage = a;
            s.target = t;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Batch means of the objective and its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossStats {
    /// `surrogate - value_coef * value_error + entropy_coef * entropy`, to be maximized.
    pub objective: f64,
    pub surrogate: f64,
    pub value_error: f64,
    pub entropy: f64,
    pub mean_ratio: f64,
}

/// The clipped objective over `batch` and its gradient with respect to every parameter.
pub fn ppo_loss(
    batch: &RolloutBatch,
    params: &ParamStore,
    config: &PpoConfig,
) -> Result<(LossStats, ParamStore), PpoError> {
    if batch.is_empty() {
        return Err(PpoError::EmptyBatch);
    }
    let b = batch.len() as f64;
    let eps = config.clip_epsilon;
    let mut grads = ParamStore::zeros();
    let (mut surrogate, mut value_error, mut entropy, mut ratio_sum) = (0.0, 0.0, 0.0, 0.0);
    for s in &batch.samples {
        let (out, cache) = policy::evaluate(&s.observation, params, config.gnn())?;
        let a = s.action;
        let ratio = (out.log_probs[a] - s.old_log_prob).exp();
        let adv = s.advantage;
        let clipped = ratio.clamp(1.0 - eps, 1.0 + eps);
        surrogate += (ratio * adv).min(clipped * adv);
        ratio_sum += ratio;

        let h: f64 = -out.probs.iter().zip(&out.log_probs).map(|(p, l)| p * l).sum::<f64>();
        entropy += h;
        let diff = out.value - s.target;
        value_error += diff * diff;

        let mut d_logits = vec![0.0; out.probs.len()];
        // The min selects the unclipped branch: gradient flows through the ratio.
        let unclipped = ratio * adv <= clipped * adv;
        for (u, d) in d_logits.iter_mut().enumerate() {
            let p = out.probs[u];
            if unclipped {
                let indicator = if u == a { 1.0 } else { 0.0 };
                *d += adv * ratio * (indicator - p);
            }
            *d -= config.entropy_coef * p * (out.log_probs[u] + h);
            *d /= b;
        }
        let d_value = -2.0 * config.value_coef * diff / b;
        policy::backward(&s.observation, params, &cache, &d_logits, d_value, &mut grads)?;
    }
    let stats = LossStats {
        objective: (surrogate - config.value_coef * value_error + config.entropy_coef * entropy) / b,
        surrogate: surrogate / b,
        value_error: value_error / b,
        entropy: entropy / b,
        mean_ratio: ratio_sum / b,
    };
    Ok((stats, grads))
}

/// One row of the training log.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainLogRow {
    pub iteration: usize,
    /// Unscaled episode return; absent for the pre-training row.
    pub episode_return: Option<f64>,
    pub makespan: Option<u64>,
    /// Mean greedy makespan over the validation set, when evaluated.
    pub validation_mean: Option<f64>,
    pub wall_ms: Option<u64>,
}

impl TrainLogRow {
    pub fn to_csv_line(&self) -> String {
        fn opt<T: ToString>(x: &Option<T>) -> String {
            x.as_ref().map(T::to_string).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{}",
            self.iteration,
            opt(&self.episode_return),
            opt(&self.makespan),
            opt(&self.validation_mean),
            opt(&self.wall_ms)
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    /// Written with the best parameters whenever validation improves.
    pub checkpoint: Option<PathBuf>,
    /// Leave `wall_ms` empty so logs are reproducible byte for byte.
    pub omit_wall_time: bool,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub best_params: ParamStore,
    pub final_params: ParamStore,
    pub best_validation: f64,
    pub log: Vec<TrainLogRow>,
    pub iterations: usize,
    pub stopped_early: bool,
}

/// The held-out validation instances for `config`.
pub fn validation_instances(config: &PpoConfig) -> Vec<Arc<Instance>> {
    (0..config.validation_size as u64)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "validation", i));
            let (m, n) = sample_training_size(&mut rng);
            Arc::new(Instance::generate(m, n, &mut rng).with_name(format!("val{i:02}")))
        })
        .collect()
}

/// Mean makespan of the greedy policy over `instances`.
pub fn greedy_mean_makespan(
    params: &Arc<ParamStore>,
    instances: &[Arc<Instance>],
    config: &PpoConfig,
) -> Result<f64, PpoError> {
    let mut total = 0u64;
    for (i, inst) in instances.iter().enumerate() {
        let mut sched = GnnScheduler::new(params.clone(), ActMode::Greedy, 0).with_gnn(config.gnn());
        let ep_cfg = EpisodeConfig {
            sim: config.sim(),
            seed: derive_seed(config.seed, "validation-sim", i as u64),
            step_cap: config.step_cap,
        };
        total += run_episode(inst.clone(), &mut sched, &ep_cfg)?.makespan;
    }
    Ok(total as f64 / instances.len() as f64)
}

fn training_instance(rng: &mut ChaCha8Rng) -> Arc<Instance> {
    let (m, n) = sample_training_size(rng);
    Arc::new(Instance::generate(m, n, rng))
}

/// Runs the training loop. `on_row` sees each log row as soon as it exists.
pub fn train<F: FnMut(&TrainLogRow)>(
    config: &PpoConfig,
    options: &TrainOptions,
    mut on_row: F,
) -> Result<TrainOutcome, PpoError> {
    config.validate()?;
    let start = Instant::now();
    let wall = || (!options.omit_wall_time).then(|| start.elapsed().as_millis() as u64);
    let mut log = Vec::new();
    let mut emit = |row: TrainLogRow, log: &mut Vec<TrainLogRow>| {
        on_row(&row);
        log.push(row);
    };

    let mut params = ParamStore::init(&mut ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "init", 0)));
    let mut adam = AdamState::new(config.adam());
    let validation = validation_instances(config);
    let mut instance_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "instances", 0));
    let mut instance = training_instance(&mut instance_rng);
    let mut on_instance = 0;
    let mut hold = config.initial_hold;

    let save = |p: &ParamStore| -> Result<(), PpoError> {
        if let Some(path) = &options.checkpoint {
            p.save(path)?;
        }
        Ok(())
    };

    let mut best_validation = greedy_mean_makespan(&Arc::new(params.clone()), &validation, config)?;
    let mut best_params = params.clone();
    save(&best_params)?;
    emit(
        TrainLogRow {
            iteration: 0,
            episode_return: None,
            makespan: None,
            validation_mean: Some(best_validation),
            wall_ms: wall(),
        },
        &mut log,
    );

    let mut stale_evaluations = 0;
    let mut iterations = 0;
    let mut stopped_early = false;
    for it in 1..=config.max_iterations {
        if on_instance == hold {
            instance = training_instance(&mut instance_rng);
            on_instance = 0;
            hold = config.refresh_every;
        }
        on_instance += 1;

        let snapshot = Arc::new(params.clone());
        let mut sched = GnnScheduler::new(snapshot, ActMode::Sample, derive_seed(config.seed, "policy", it as u64))
            .with_gnn(config.gnn())
            .recording(true);
        let ep_cfg = EpisodeConfig {
            sim: config.sim(),
            seed: derive_seed(config.seed, "sim", it as u64),
            step_cap: config.step_cap,
        };
        let episode = run_episode(instance.clone(), &mut sched, &ep_cfg)?;
        let batch = RolloutBatch::from_episode(&episode, config)?;
        if !batch.is_empty() {
            for _ in 0..config.epochs {
                let (_, grads) = ppo_loss(&batch, &params, config)?;
                adam.step(&mut params, &grads, true)?;
            }
        }
        iterations = it;

        let mut validation_mean = None;
        if it % config.validation_every == 0 || it == config.max_iterations {
            let score = greedy_mean_makespan(&Arc::new(params.clone()), &validation, config)?;
            validation_mean = Some(score);
            if score < best_validation {
                best_validation = score;
                best_params = params.clone();
                save(&best_params)?;
                stale_evaluations = 0;
            } else {
                stale_evaluations += 1;
            }
        }
        emit(
            TrainLogRow {
                iteration: it,
                episode_return: Some(episode.total_reward()),
                makespan: Some(episode.makespan),
                validation_mean,
                wall_ms: wall(),
            },
            &mut log,
        );
        if stale_evaluations >= config.patience {
            stopped_early = true;
            break;
        }
    }
    Ok(TrainOutcome { best_params, final_params: params, best_validation, log, iterations, stopped_early })
}
