//! Incentive-driven federated learning at the network edge.
//!
//! An edge base station (the leader) offers devices (the followers) a reward
//! rate for the local accuracy they contribute to a synchronous federated
//! training job. Devices trade the reward against computation and
//! communication cost; the station picks the reward that balances model
//! quality against payments. The resulting accuracies then drive an actual
//! federated training run.
//!
//! - [`cost`]: per-device cost model and accuracy–iteration laws.
//! - [`game`]: follower best responses, lower-level Nash, leader optimization
//!   by backward induction, and the interaction trace.
//! - [`fl`]: logistic-regression federated training with FedAvg, FedProx and
//!   fairness-weighted aggregation.
//! - [`data`]: synthetic datasets, IDX ingestion, IID and Dirichlet partitions.
//! - [`harness`]: JSON scenarios, sweeps, and CSV/JSON result files.

pub mod cost;
pub mod data;
pub mod fl;
pub mod game;
pub mod harness;

pub use cost::{AccuracyLaw, UeProfile};
pub use game::{GameConfig, StackelbergOutcome};
