//! Synthetic question answering over a simulated 3D gridworld.
//!
//! The pipeline for one sample: [`scene::build_scene`] places an agent, a
//! player, NPCs and block structures; [`dynamics::run_episode`] steps the
//! world and captures [`Snapshot`]s; [`query::sample_query`] draws an
//! answerable logical form; [`oracle::execute`] computes the ground truth;
//! [`context`] serializes the snapshots as text and as relational nodes.
//! [`pipeline`] ties these together per sample and per dataset.

pub mod config;
pub mod context;
pub mod dynamics;
pub mod geometry;
pub mod oracle;
pub mod pipeline;
pub mod pools;
pub mod query;
pub mod record;
pub mod rng;
pub mod scene;
pub mod score;
pub mod shapes;
pub mod world;

pub use config::{ConfigError, GenConfig};
pub use context::{render_relational_context, render_text_context, RelationalContext};
pub use geometry::{Axis, Cell, Direction, Pose, Vec3};
pub use oracle::{execute, Answer, AnswerValue, OracleError};
pub use pipeline::{generate_dataset, generate_sample, DatasetStats, GenerateError};
pub use pools::ScenePools;
pub use query::{parse_form, render_text, ClauseKind, ClauseType, QueryClass, QueryForm, ReturnType};
pub use record::{read_samples, validate_sample, write_samples, Sample, Split};
pub use shapes::{make_shape, Shape, ShapeSize};
pub use world::{Memid, RefObject, Snapshot, WorldState};
