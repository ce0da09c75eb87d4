//! World state, reference objects, triples and frozen snapshots.
//!
//! A [`WorldState`] is the mutable simulation. A [`Snapshot`] is an
//! immutable copy of every reference object and triple at one recorded
//! timestep. Memids are issued by the world from `(memid seed, creation
//! counter)` and never change for the lifetime of an object.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::geometry::{Cell, Pose, Vec3};
use crate::rng::derive_seed;
use crate::shapes::Shape;

#[derive(Debug, Error, PartialEq)]
pub enum WorldError {
    #[error("snapshot time index {requested} is not after previous index {previous}")]
    OutOfOrderSnapshot { previous: u32, requested: u32 },
    #[error("memid {0} not found")]
    NotFound(Memid),
    #[error("invalid memid {0:?}")]
    BadMemid(String),
}

/// 64-bit key of a reference object or triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Memid(pub u64);

impl fmt::Display for Memid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl FromStr for Memid {
    type Err = WorldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != 16 || !s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
            return Err(WorldError::BadMemid(s.to_string()));
        }
        u64::from_str_radix(s, 16)
            .map(Memid)
            .map_err(|_| WorldError::BadMemid(s.to_string()))
    }
}

impl Serialize for Memid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Memid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Agent,
    Player,
    Npc,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Agent => "agent",
            EntityKind::Player => "player",
            EntityKind::Npc => "npc",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "agent" => Some(EntityKind::Agent),
            "player" => Some(EntityKind::Player),
            "npc" => Some(EntityKind::Npc),
            _ => None,
        }
    }
}

/// An animate object: the agent, the player, or an NPC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub memid: Memid,
    pub kind: EntityKind,
    pub name: String,
    /// NPCs only.
    pub npc_type: Option<String>,
    /// NPCs only.
    pub color: Option<String>,
    pub pose: Pose,
}

/// A voxel structure (or a dug hole).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockObject {
    pub memid: Memid,
    pub shape: Shape,
    pub color: String,
    pub voxels: BTreeSet<Cell>,
}

impl BlockObject {
    /// Mean of the voxel coordinates.
    pub fn centroid(&self) -> Vec3 {
        let n = self.voxels.len().max(1) as f64;
        let (mut x, mut y, mut z) = (0i64, 0i64, 0i64);
        for c in &self.voxels {
            x += c[0] as i64;
            y += c[1] as i64;
            z += c[2] as i64;
        }
        Vec3::new(x as f64 / n, y as f64 / n, z as f64 / n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RefObject {
    Entity(Entity),
    Block(BlockObject),
}

impl RefObject {
    pub fn memid(&self) -> Memid {
        match self {
            RefObject::Entity(e) => e.memid,
            RefObject::Block(b) => b.memid,
        }
    }

    /// Entity position, or block centroid.
    pub fn position(&self) -> Vec3 {
        match self {
            RefObject::Entity(e) => e.pose.position(),
            RefObject::Block(b) => b.centroid(),
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            RefObject::Entity(e) => Some(&e.name),
            RefObject::Block(_) => None,
        }
    }

    pub fn as_entity(&self) -> Option<&Entity> {
        match self {
            RefObject::Entity(e) => Some(e),
            RefObject::Block(_) => None,
        }
    }

    pub fn as_block(&self) -> Option<&BlockObject> {
        match self {
            RefObject::Block(b) => Some(b),
            RefObject::Entity(_) => None,
        }
    }

    pub fn kind(&self) -> Option<EntityKind> {
        self.as_entity().map(|e| e.kind)
    }

    pub fn is_animate(&self) -> bool {
        matches!(self, RefObject::Entity(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    HasName,
    HasTag,
    HasColour,
    HasType,
}

impl Predicate {
    pub const ALL: [Predicate; 4] = [
        Predicate::HasName,
        Predicate::HasTag,
        Predicate::HasColour,
        Predicate::HasType,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Predicate::HasName => "has_name",
            Predicate::HasTag => "has_tag",
            Predicate::HasColour => "has_colour",
            Predicate::HasType => "has_type",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Predicate::ALL.into_iter().find(|p| p.as_str() == s)
    }

    /// Predicates whose objects count as "properties" in tag clauses.
    pub fn is_property(self) -> bool {
        !matches!(self, Predicate::HasName)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub t_id: Memid,
    pub subject: Memid,
    pub predicate: Predicate,
    pub object_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Move,
    Build,
    Destroy,
    Dig,
    Follow,
}

impl ActionKind {
    pub const ALL: [ActionKind; 5] = [
        ActionKind::Move,
        ActionKind::Build,
        ActionKind::Destroy,
        ActionKind::Dig,
        ActionKind::Follow,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Move => "move",
            ActionKind::Build => "build",
            ActionKind::Destroy => "destroy",
            ActionKind::Dig => "dig",
            ActionKind::Follow => "follow",
        }
    }
}

/// Generator-side record of a scripted action. Never part of the context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub actor: Memid,
    pub action: ActionKind,
    pub detail: String,
    /// First step of the interval, inclusive.
    pub start_step: u64,
    /// Last step of the interval, exclusive.
    pub end_step: u64,
}

/// Full mutable simulation state.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub world_size: i32,
    pub clock: u64,
    pub entities: Vec<Entity>,
    pub block_objects: Vec<BlockObject>,
    pub triples: Vec<Triple>,
    pub action_log: Vec<ActionRecord>,
    memid_seed: u64,
    issued: u64,
}

impl WorldState {
    pub fn new(world_size: i32, memid_seed: u64) -> Self {
        Self {
            world_size,
            clock: 0,
            entities: Vec::new(),
            block_objects: Vec::new(),
            triples: Vec::new(),
            action_log: Vec::new(),
            memid_seed,
            issued: 0,
        }
    }

    /// Height of the ground surface. Animate entities stand at this `y`;
    /// structures rest on it and holes are dug below it.
    pub fn surface_level(&self) -> i32 {
        (self.world_size / 5).max(1)
    }

    /// Largest legal entity coordinate on each axis.
    pub fn max_coord(&self) -> f64 {
        (self.world_size - 1) as f64
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.iter().all(|&v| v >= 0 && v < self.world_size)
    }

    fn issue_memid(&mut self) -> Memid {
        let id = Memid(derive_seed(self.memid_seed, self.issued));
        self.issued += 1;
        id
    }

    fn add_triple(&mut self, subject: Memid, predicate: Predicate, object_text: &str) {
        if self
            .triples
            .iter()
            .any(|t| t.subject == subject && t.predicate == predicate && t.object_text == object_text)
        {
            return;
        }
        let t_id = self.issue_memid();
        self.triples.push(Triple {
            t_id,
            subject,
            predicate,
            object_text: object_text.to_string(),
        });
    }

    /// Add an entity and its triples. NPCs get name, type and colour triples
    /// plus tags duplicating type and colour; the agent and player get only a
    /// name triple.
    pub fn add_entity(
        &mut self,
        kind: EntityKind,
        name: &str,
        npc_type: Option<&str>,
        color: Option<&str>,
        pose: Pose,
    ) -> Memid {
        let memid = self.issue_memid();
        self.entities.push(Entity {
            memid,
            kind,
            name: name.to_string(),
            npc_type: npc_type.map(str::to_string),
            color: color.map(str::to_string),
            pose,
        });
        self.add_triple(memid, Predicate::HasName, name);
        if let Some(t) = npc_type {
            self.add_triple(memid, Predicate::HasType, t);
        }
        if let Some(c) = color {
            self.add_triple(memid, Predicate::HasColour, c);
        }
        if let Some(t) = npc_type {
            self.add_triple(memid, Predicate::HasTag, t);
        }
        if let Some(c) = color {
            self.add_triple(memid, Predicate::HasTag, c);
        }
        memid
    }

    /// Add a block object with a colour triple and a tag equal to its shape.
    pub fn add_block(&mut self, shape: Shape, color: &str, voxels: BTreeSet<Cell>) -> Memid {
        let memid = self.issue_memid();
        self.block_objects.push(BlockObject {
            memid,
            shape,
            color: color.to_string(),
            voxels,
        });
        self.add_triple(memid, Predicate::HasColour, color);
        self.add_triple(memid, Predicate::HasTag, shape.as_str());
        memid
    }

    /// Remove a block object and its triples. Returns the removed object.
    pub fn remove_block(&mut self, memid: Memid) -> Option<BlockObject> {
        let idx = self.block_objects.iter().position(|b| b.memid == memid)?;
        self.triples.retain(|t| t.subject != memid);
        Some(self.block_objects.remove(idx))
    }

    pub fn entity(&self, memid: Memid) -> Option<&Entity> {
        self.entities.iter().find(|e| e.memid == memid)
    }

    pub fn entity_mut(&mut self, memid: Memid) -> Option<&mut Entity> {
        self.entities.iter_mut().find(|e| e.memid == memid)
    }

    pub fn agent(&self) -> Option<&Entity> {
        self.entities.iter().find(|e| e.kind == EntityKind::Agent)
    }

    pub fn player(&self) -> Option<&Entity> {
        self.entities.iter().find(|e| e.kind == EntityKind::Player)
    }

    /// All cells occupied by block objects, holes excluded.
    pub fn solid_cells(&self) -> BTreeSet<Cell> {
        self.block_objects
            .iter()
            .filter(|b| b.shape != Shape::Hole)
            .flat_map(|b| b.voxels.iter().copied())
            .collect()
    }

    /// Cells already claimed by any block object, holes included.
    pub fn claimed_cells(&self) -> BTreeSet<Cell> {
        self.block_objects
            .iter()
            .flat_map(|b| b.voxels.iter().copied())
            .collect()
    }
}

/// A frozen, fully observed copy of the world at one recorded timestep.
///
/// Reference objects are ordered by memid and triples by t_id, so two
/// snapshots of equal content compare equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Ordinal of this snapshot within its episode.
    pub time_index: u32,
    /// World clock when the snapshot was taken.
    pub step: u64,
    pub reference_objects: Vec<RefObject>,
    pub triples: Vec<Triple>,
}

impl Snapshot {
    /// Copy the current world state.
    pub fn capture(world: &WorldState, time_index: u32) -> Self {
        let mut reference_objects: Vec<RefObject> = world
            .entities
            .iter()
            .cloned()
            .map(RefObject::Entity)
            .chain(world.block_objects.iter().cloned().map(RefObject::Block))
            .collect();
        reference_objects.sort_by_key(RefObject::memid);
        let mut triples = world.triples.clone();
        triples.sort();
        Self {
            time_index,
            step: world.clock,
            reference_objects,
            triples,
        }
    }

    pub fn lookup(&self, memid: Memid) -> Result<&RefObject, WorldError> {
        self.reference_objects
            .binary_search_by_key(&memid, RefObject::memid)
            .map(|i| &self.reference_objects[i])
            .map_err(|_| WorldError::NotFound(memid))
    }

    pub fn contains(&self, memid: Memid) -> bool {
        self.lookup(memid).is_ok()
    }

    pub fn triples_of(&self, subject: Memid) -> impl Iterator<Item = &Triple> {
        self.triples.iter().filter(move |t| t.subject == subject)
    }

    pub fn find_by_name(&self, name: &str) -> Option<&RefObject> {
        self.reference_objects.iter().find(|o| o.name() == Some(name))
    }

    pub fn entity_of_kind(&self, kind: EntityKind) -> Option<&Entity> {
        self.reference_objects
            .iter()
            .filter_map(RefObject::as_entity)
            .find(|e| e.kind == kind)
    }
}

/// Look up a reference object in a snapshot.
pub fn lookup(snapshot: &Snapshot, memid: Memid) -> Result<&RefObject, WorldError> {
    snapshot.lookup(memid)
}

/// Snapshots of one episode, in strictly increasing time order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SnapshotHistory {
    snapshots: Vec<Snapshot>,
}

impl SnapshotHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, world: &WorldState, time_index: u32) -> Result<&Snapshot, WorldError> {
        if let Some(prev) = self.snapshots.last() {
            if time_index <= prev.time_index {
                return Err(WorldError::OutOfOrderSnapshot {
                    previous: prev.time_index,
                    requested: time_index,
                });
            }
        }
        self.snapshots.push(Snapshot::capture(world, time_index));
        Ok(self.snapshots.last().expect("just pushed"))
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn into_snapshots(self) -> Vec<Snapshot> {
        self.snapshots
    }
}
