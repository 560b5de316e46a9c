//! Per-base-station optimization of multi-user OFDM links assisted by
//! frequency-selective, switch-routed reconfigurable surfaces.
//!
//! Each base station controls a precoder per subcarrier, the varactor
//! capacitances of its surface and a permutation routing the surface's
//! elements. Users exchange pricing (gradients of the other users' rates)
//! and each solves a strongly concave local problem per iteration.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod capacitance;
pub mod circuit;
pub mod cmath;
pub mod config;
pub mod engine;
pub mod error;
pub mod gradcheck;
pub mod linkalg;
pub mod lsap;
pub mod output;
pub mod precoder;
pub mod profile;
pub mod scenario;
pub mod sweep;
pub mod switch;

pub use circuit::CircuitParams;
pub use cmath::{CMat, CVec, RMat, C64};
pub use config::{load_scenario, parse_scenario, ScenarioConfig};
pub use engine::{cooperation_overhead, Engine, IterationRecord, MessageBus, PricingBundle, RunTrace};
pub use error::{Error, Result};
pub use linkalg::{Network, Snapshot, UserState};
pub use scenario::{ChannelSet, Pricing, RisKind, Scenario, Scheme, UpdateOrder};
pub use sweep::{SweepParam, SweepSpec};
