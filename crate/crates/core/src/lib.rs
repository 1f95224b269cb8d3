//! Ethical decision engine for smart vehicles.
//!
//! The crate is split along the control loop of a single smart vehicle:
//!
//! - [`ethics`]: categorical DALY, personal/total ethical value, crash force and
//!   utilitarian force minimization.
//! - [`rules`]: the priority-ordered rule base, lexicographic admissibility
//!   filtering and SEL scoring.
//! - [`decision`]: decision engines that combine the two, behind a common trait.
//! - [`registry`]: engines and crash-force models registered by name.
//! - [`rcs`]: the per-entity control node (sensing, world model, judgment,
//!   behavior generation) and the command hierarchy.
//! - [`audit`]: the hash-chained forensic log.

pub mod audit;
pub mod decision;
pub mod entity;
pub mod ethics;
pub mod rcs;
pub mod registry;
pub mod rules;

pub use audit::{AuditEvent, AuditLog, AuditRecord, ChainStatus, RecordKind};
pub use decision::{ActionProposal, DecisionEngine, Judgment, SelEngine, UtilitarianEngine};
pub use entity::{EntityId, EntityKind, EntityState, NodeRole, Position, RoleKind};
pub use ethics::{
    AgeBands, CandidateAction, CrashForce, CrashForceModel, EthicalValue, EthicsError,
    LifeStageCategory, Occupant, Participant, SafetyRating, UtilitarianForce, WorkEnergyModel,
};
pub use registry::{Registry, RegistryError};
pub use rules::{Law, OutcomeFlags, PredicateKind, RuleBase, RuleError, SelScore, Verdict};
