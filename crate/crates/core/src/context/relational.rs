//! Relational context: reference-object nodes and triple nodes per
//! snapshot, ordered by time index then memid.
//!
//! Reference-object words are `["npc", name, type, color]`,
//! `["agent", name]`, `["player", name]` or `["inst_seg", shape, color]`.
//! Floats are `[x, y, z, pitch, yaw]`; blocks carry their centroid with zero
//! angles plus the full voxel list, so the snapshot can be rebuilt exactly.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Cell, Pose};
use crate::shapes::Shape;
use crate::world::{BlockObject, Entity, EntityKind, Memid, Predicate, RefObject, Snapshot, Triple};

#[derive(Debug, Error, PartialEq)]
pub enum RelationalError {
    #[error("node at time index {time_index} refers to an unknown snapshot")]
    UnknownTime { time_index: u32 },
    #[error("reference object {memid}: malformed words {words:?}")]
    BadWords { memid: Memid, words: Vec<String> },
    #[error("triple {t_id} links to {subject}, which is not in its snapshot")]
    DanglingTriple { t_id: Memid, subject: Memid },
    #[error("triple {t_id}: malformed words {words:?}")]
    BadTriple { t_id: Memid, words: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotInfo {
    pub time_index: u32,
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefNode {
    pub time_index: u32,
    pub reference_object_hash: Memid,
    pub reference_objects_words: Vec<String>,
    pub reference_objects_float: [f64; 5],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voxels: Option<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleNode {
    pub time_index: u32,
    pub triples_hash: Memid,
    pub reference_object_hash: Memid,
    pub triples_words: [String; 2],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RelationalContext {
    pub snapshots: Vec<SnapshotInfo>,
    pub reference_objects: Vec<RefNode>,
    pub triples: Vec<TripleNode>,
}

fn ref_node(time_index: u32, o: &RefObject) -> RefNode {
    match o {
        RefObject::Entity(e) => {
            let mut words = vec![e.kind.as_str().to_string(), e.name.clone()];
            if e.kind == EntityKind::Npc {
                words.push(e.npc_type.clone().unwrap_or_default());
                words.push(e.color.clone().unwrap_or_default());
            }
            let p = &e.pose;
            RefNode {
                time_index,
                reference_object_hash: e.memid,
                reference_objects_words: words,
                reference_objects_float: [p.x, p.y, p.z, p.pitch, p.yaw],
                voxels: None,
            }
        }
        RefObject::Block(b) => {
            let c = b.centroid();
            RefNode {
                time_index,
                reference_object_hash: b.memid,
                reference_objects_words: vec!["inst_seg".into(), b.shape.as_str().into(), b.color.clone()],
                reference_objects_float: [c.x, c.y, c.z, 0.0, 0.0],
                voxels: Some(b.voxels.iter().copied().collect()),
            }
        }
    }
}

/// Build the relational context of an episode.
pub fn render_relational_context(snapshots: &[Snapshot]) -> RelationalContext {
    let mut ctx = RelationalContext::default();
    for s in snapshots {
        ctx.snapshots.push(SnapshotInfo {
            time_index: s.time_index,
            step: s.step,
        });
        ctx.reference_objects
            .extend(s.reference_objects.iter().map(|o| ref_node(s.time_index, o)));
        ctx.triples.extend(s.triples.iter().map(|t| TripleNode {
            time_index: s.time_index,
            triples_hash: t.t_id,
            reference_object_hash: t.subject,
            triples_words: [t.predicate.as_str().to_string(), t.object_text.clone()],
        }));
    }
    ctx
}

fn object_from_node(n: &RefNode) -> Result<RefObject, RelationalError> {
    let bad = || RelationalError::BadWords {
        memid: n.reference_object_hash,
        words: n.reference_objects_words.clone(),
    };
    let w: Vec<&str> = n.reference_objects_words.iter().map(String::as_str).collect();
    let [x, y, z, pitch, yaw] = n.reference_objects_float;
    let entity = |kind, name: &str, npc_type: Option<&str>, color: Option<&str>| {
        RefObject::Entity(Entity {
            memid: n.reference_object_hash,
            kind,
            name: name.to_string(),
            npc_type: npc_type.map(str::to_string),
            color: color.map(str::to_string),
            pose: Pose {
                x,
                y,
                z,
                pitch,
                yaw,
            },
        })
    };
    Ok(match w.as_slice() {
        ["agent", name] => entity(EntityKind::Agent, name, None, None),
        ["player", name] => entity(EntityKind::Player, name, None, None),
        ["npc", name, ty, color] => entity(EntityKind::Npc, name, Some(ty), Some(color)),
        ["inst_seg", shape, color] => {
            let shape: Shape = shape.parse().map_err(|_| bad())?;
            let voxels: BTreeSet<Cell> = n.voxels.as_ref().ok_or_else(bad)?.iter().copied().collect();
            RefObject::Block(BlockObject {
                memid: n.reference_object_hash,
                shape,
                color: color.to_string(),
                voxels,
            })
        }
        _ => return Err(bad()),
    })
}

impl RelationalContext {
    /// Rebuild the snapshots this context was rendered from.
    pub fn to_snapshots(&self) -> Result<Vec<Snapshot>, RelationalError> {
        let mut out: Vec<Snapshot> = self
            .snapshots
            .iter()
            .map(|i| Snapshot {
                time_index: i.time_index,
                step: i.step,
                reference_objects: Vec::new(),
                triples: Vec::new(),
            })
            .collect();
        let slot = |out: &mut Vec<Snapshot>, time_index: u32| {
            out.iter()
                .position(|s| s.time_index == time_index)
                .ok_or(RelationalError::UnknownTime { time_index })
        };
        for n in &self.reference_objects {
            let i = slot(&mut out, n.time_index)?;
            out[i].reference_objects.push(object_from_node(n)?);
        }
        for t in &self.triples {
            let i = slot(&mut out, t.time_index)?;
            let predicate = Predicate::parse(&t.triples_words[0]).ok_or_else(|| RelationalError::BadTriple {
                t_id: t.triples_hash,
                words: t.triples_words.to_vec(),
            })?;
            out[i].triples.push(Triple {
                t_id: t.triples_hash,
                subject: t.reference_object_hash,
                predicate,
                object_text: t.triples_words[1].clone(),
            });
        }
        for s in &mut out {
            s.reference_objects.sort_by_key(RefObject::memid);
            s.triples.sort();
            for t in &s.triples {
                if !s.contains(t.subject) {
                    return Err(RelationalError::DanglingTriple {
                        t_id: t.t_id,
                        subject: t.subject,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Every R_id and T_id in the context.
    pub fn memids(&self) -> BTreeSet<Memid> {
        self.reference_objects
            .iter()
            .map(|n| n.reference_object_hash)
            .chain(self.triples.iter().map(|t| t.triples_hash))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::world::WorldState;

    fn episode() -> Vec<Snapshot> {
        let mut w = WorldState::new(15, 8);
        w.add_entity(EntityKind::Agent, "ace", None, None, Pose::new(Vec3::new(1.0, 3.0, 1.0), 3.5, 12.25));
        w.add_entity(EntityKind::Player, "adam", None, None, Pose::new(Vec3::new(0.1, 3.0, 0.7), 0.0, 0.0));
        let bob = w.add_entity(EntityKind::Npc, "bob", Some("cow"), Some("white"), Pose::new(Vec3::new(5.0, 3.0, 5.0), 0.0, 0.0));
        let cube = w.add_block(Shape::Cube, "pink", [[8, 3, 8], [8, 4, 8]].into_iter().collect());
        let first = Snapshot::capture(&w, 0);
        w.entity_mut(bob).unwrap().pose.x = 5.3333333333333;
        w.remove_block(cube);
        w.clock = 50;
        vec![first, Snapshot::capture(&w, 1)]
    }

    #[test]
    fn node_counts() {
        let snaps = episode();
        let ctx = render_relational_context(&snaps);
        let at = |t| ctx.reference_objects.iter().filter(|n| n.time_index == t).count()
            + ctx.triples.iter().filter(|n| n.time_index == t).count();
        assert_eq!(at(0), snaps[0].reference_objects.len() + snaps[0].triples.len());
        assert_eq!(at(1), 3 + 7);
        let ace = snaps[0].reference_objects[0].memid();
        assert_eq!(ctx.reference_objects.iter().filter(|n| n.reference_object_hash == ace).count(), 2);
    }

    #[test]
    fn lossless_through_json() {
        let snaps = episode();
        let ctx = render_relational_context(&snaps);
        let text = serde_json::to_string(&ctx).unwrap();
        let back: RelationalContext = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_snapshots().unwrap(), snaps);
    }

    #[test]
    fn dangling_triple_detected() {
        let mut ctx = render_relational_context(&episode());
        ctx.triples[0].reference_object_hash = Memid(7);
        assert!(matches!(ctx.to_snapshots(), Err(RelationalError::DanglingTriple { .. })));
    }
}
