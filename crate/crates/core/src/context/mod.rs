//! Context serializations: flattened text and relational nodes.

pub mod relational;
pub mod text;

pub use relational::{render_relational_context, RefNode, RelationalContext, RelationalError, SnapshotInfo, TripleNode};
pub use text::render_text_context;
