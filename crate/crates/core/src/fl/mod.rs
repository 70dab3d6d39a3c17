//! Synchronous federated training of a multinomial logistic regression model.
//!
//! Every client runs full-batch gradient descent until its local gradient
//! norm has shrunk to `theta` times the value at the broadcast model; `theta`
//! is the local relative accuracy negotiated in the incentive game.

mod aggregate;
mod local;
mod model;
mod train;

use thiserror::Error;

pub use aggregate::{aggregate, Aggregate, AggregatorKind, ClientUpdate};
pub use local::{local_solve, step_size, LocalSolve, Prox, SolverConfig};
pub use model::{accuracy, loss_and_grad, ModelWeights};
pub use train::{train_federated, ClientTiming, RoundRecord, TrainConfig, TrainOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite values in {0}")]
    NonFinite(String),
    #[error("shard has no samples")]
    EmptyShard,
    #[error("no clients to train or aggregate")]
    NoClients,
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("training diverged in round {round}: non-finite {what}")]
    Diverged {
        round: usize,
        what: String,
        /// Rounds completed before the failure.
        records: Vec<RoundRecord>,
    },
}
