//! Interrupting swap-allowed blocking job shop: instances, a discrete-time
//! simulator over a dynamic disjunctive graph, priority dispatching rules and
//! a graph neural network scheduler trained with proximal policy optimization.

pub mod graph;
pub mod instance;
pub mod nn;
pub mod pdr;
pub mod policy;
pub mod ppo;
pub mod seeding;
pub mod sim;

pub use graph::{DisjunctiveGraph, NodeId};
pub use instance::{Instance, InstanceError, Operation};
pub use nn::ParamStore;
pub use pdr::Rule;
pub use policy::{ActMode, GnnConfig, GnnScheduler, GraphObservation, GraphPooling};
pub use ppo::{train, PpoConfig, TrainOptions};
pub use sim::{run_episode, EpisodeConfig, Scheduler, SimConfig, SimError, SimState};
