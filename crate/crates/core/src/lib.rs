//! Slotted discrete-event simulator of a single-cell 802.11e WLAN.
//!
//! Two channel-access disciplines run on the same engine: plain EDCA, and
//! EDCA extended with a dynamic per-station user-weight class that shifts
//! each station's AIFS according to its recent successful traffic.
//!
//! ```
//! use edca_core::{engine, metrics, Discipline, Scenario};
//!
//! let basic = engine::run(&Scenario::table2()).unwrap();
//! let modified = engine::run(
//!     &Scenario::table2().with_discipline(Discipline::modified(10, 6).unwrap()),
//! )
//! .unwrap();
//! assert!(basic.is_conserved() && modified.is_conserved());
//! let _ = metrics::collision_count_per_ac(&modified);
//! ```

pub mod channel;
pub mod classifier;
pub mod engine;
pub mod error;
pub mod mac;
pub mod metrics;
pub mod params;
pub mod scenario;
pub mod sweep;

pub use channel::ChannelConfig;
pub use classifier::{AifsTable, ClassifierState};
pub use error::{Error, Result};
pub use metrics::{SimulationReport, Summary};
pub use params::{AccessCategory, Discipline, EdcaParams, Frame, SimTime};
pub use scenario::{load_scenario, load_scenario_with, Overrides, Scenario, StationSpec};
