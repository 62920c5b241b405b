//! Object-tree world model and command engine.

pub mod def;
mod diff;
mod engine;
pub mod game;
mod render;
mod snapshot;
mod state;
pub mod tree;
mod walkthrough;

pub use def::{AttrSet, Attribute, Exit, GameDef, GameTrait, Metadata, ObjectId, ObjectKind, ObjectNode, ScoreRule, Trigger, FORMAT_VERSION};
pub use diff::{state_diff, Diff, GlobalChange, StatusChange, TreeChange};
pub use engine::{CommandOutcome, DEFAULT_FAILURE, UNPARSEABLE_TEXT};
pub use game::{Game, Issue, ValidationError, Warning};
pub use render::{DARK_TEXT, EMPTY_HANDED};
pub use snapshot::{Snapshot, SnapshotError, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};
pub use state::{WorldError, WorldState};
pub use tree::{NodeIdx, ObjectTree, TreeError};
pub use walkthrough::{verify_walkthrough, WalkthroughError, WalkthroughReport};
