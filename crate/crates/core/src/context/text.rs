//! Flattened text context.
//!
//! One section per snapshot, headed `t=<i>:`, with its fact lines in random
//! order:
//!
//! ```text
//! <name> is a <color> <type> at (x.x, y.y, z.z) facing yaw <d> pitch <d>
//! <name> is the agent at (x.x, y.y, z.z) facing yaw <d> pitch <d>
//! inst_seg <shape> colored <color> at (cx, cy, cz) with <n> blocks
//! <name> <predicate> <object_text>
//! ```
//!
//! Block triples (colour and shape tag) are folded into the `inst_seg` line.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::oracle::format_location;
use crate::world::{EntityKind, RefObject, Snapshot};

pub fn object_line(o: &RefObject) -> String {
    match o {
        RefObject::Entity(e) => {
            let what = match e.kind {
                EntityKind::Npc => format!(
                    "is a {} {}",
                    e.color.as_deref().unwrap_or("plain"),
                    e.npc_type.as_deref().unwrap_or("npc")
                ),
                EntityKind::Agent => "is the agent".to_string(),
                EntityKind::Player => "is the player".to_string(),
            };
            let p = &e.pose;
            format!(
                "{} {what} at ({:.1}, {:.1}, {:.1}) facing yaw {} pitch {}",
                e.name,
                p.x,
                p.y,
                p.z,
                p.yaw.round() as i64,
                p.pitch.round() as i64
            )
        }
        RefObject::Block(b) => format!(
            "inst_seg {} colored {} at {} with {} blocks",
            b.shape,
            b.color,
            format_location(b.centroid()),
            b.voxels.len()
        ),
    }
}

/// Fact lines of one snapshot in canonical (unshuffled) order.
pub fn section_lines(s: &Snapshot) -> Vec<String> {
    let mut lines = Vec::new();
    for o in &s.reference_objects {
        lines.push(object_line(o));
        if let Some(name) = o.name() {
            for t in s.triples_of(o.memid()) {
                lines.push(format!("{name} {} {}", t.predicate.as_str(), t.object_text));
            }
        }
    }
    lines
}

/// Render all snapshots, shuffling lines within each section.
pub fn render_text_context<R: Rng + ?Sized>(snapshots: &[Snapshot], rng: &mut R) -> String {
    let mut out = Vec::new();
    for s in snapshots {
        out.push(format!("t={}:", s.time_index));
        let mut lines = section_lines(s);
        lines.shuffle(rng);
        out.extend(lines);
    }
    out.join("\n")
}
