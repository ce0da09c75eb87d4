//! Randomized initial worlds.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::config::GenConfig;
use crate::geometry::{Cell, Pose, Vec3};
use crate::pools::ScenePools;
use crate::shapes::{make_shape, Shape, ShapeSize};
use crate::world::{EntityKind, WorldState};

/// Placement attempts per object before giving up.
pub const PLACEMENT_RETRIES: usize = 100;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SceneError {
    #[error("could not place {what} after {PLACEMENT_RETRIES} attempts in a world of size {world_size}")]
    Capacity { what: String, world_size: i32 },
    #[error("name pool has {available} names but the scene needs {needed}")]
    NotEnoughNames { available: usize, needed: usize },
}

/// Build a random scene: block objects first, then the agent, the player and
/// `config.n_npcs` NPCs on free ground cells.
pub fn build_scene<R: Rng + ?Sized>(
    config: &GenConfig,
    pools: &ScenePools,
    rng: &mut R,
) -> Result<WorldState, SceneError> {
    let mut world = WorldState::new(config.world_size, rng.gen());
    let needed = config.n_npcs + 2;
    if pools.names.len() < needed {
        return Err(SceneError::NotEnoughNames {
            available: pools.names.len(),
            needed,
        });
    }

    let n_blocks = rng.gen_range(config.min_blocks..=config.max_blocks);
    for _ in 0..n_blocks {
        let shape = *pools.shapes.choose(rng).expect("pools are non-empty");
        let color = pools.colors.choose(rng).expect("pools are non-empty").clone();
        let (_, voxels) = place_shape(&world, shape, rng).ok_or_else(|| SceneError::Capacity {
            what: format!("a {shape}"),
            world_size: world.world_size,
        })?;
        world.add_block(shape, &color, voxels);
    }

    let names: Vec<&String> = pools.names.choose_multiple(rng, needed).collect();
    let mut taken: BTreeSet<Cell> = BTreeSet::new();
    let blocked = world.solid_cells();
    let kinds = [EntityKind::Agent, EntityKind::Player]
        .into_iter()
        .chain(std::iter::repeat_n(EntityKind::Npc, config.n_npcs));
    for (kind, name) in kinds.zip(names) {
        let pose = place_entity(&world, &blocked, &taken, rng).ok_or_else(|| SceneError::Capacity {
            what: format!("{} {name}", kind.as_str()),
            world_size: world.world_size,
        })?;
        taken.insert(pose.position().cell());
        let (npc_type, color) = if kind == EntityKind::Npc {
            (
                Some(pools.npc_types.choose(rng).expect("pools are non-empty").as_str()),
                Some(pools.colors.choose(rng).expect("pools are non-empty").as_str()),
            )
        } else {
            (None, None)
        };
        world.add_entity(kind, name, npc_type, color, pose);
    }
    Ok(world)
}

fn place_entity<R: Rng + ?Sized>(
    world: &WorldState,
    blocked: &BTreeSet<Cell>,
    taken: &BTreeSet<Cell>,
    rng: &mut R,
) -> Option<Pose> {
    let max = world.max_coord();
    let y = world.surface_level() as f64;
    for _ in 0..PLACEMENT_RETRIES {
        let p = Vec3::new(rng.gen_range(0.0..=max), y, rng.gen_range(0.0..=max));
        let cell = p.cell();
        if blocked.contains(&cell) || taken.contains(&cell) {
            continue;
        }
        let pitch = rng.gen_range(-90.0..=90.0);
        let yaw = rng.gen_range(0.0..360.0);
        return Some(Pose::new(p, pitch, yaw));
    }
    None
}

/// Pick a size and a position for `shape` that lies in bounds and does not
/// overlap existing block objects. Structures rest on the surface; holes
/// hang below it.
pub fn place_shape<R: Rng + ?Sized>(
    world: &WorldState,
    shape: Shape,
    rng: &mut R,
) -> Option<(ShapeSize, BTreeSet<Cell>)> {
    let claimed = world.claimed_cells();
    let surface = world.surface_level();
    for _ in 0..PLACEMENT_RETRIES {
        let size = shape.random_size(rng, surface);
        let Ok(local) = make_shape(shape, size, [0, 0, 0]) else {
            continue;
        };
        let lo = |i: usize| local.iter().map(|c| c[i]).min().unwrap_or(0);
        let hi = |i: usize| local.iter().map(|c| c[i]).max().unwrap_or(0);
        let (x_min, x_max, z_min, z_max) = (lo(0), hi(0), lo(2), hi(2));
        if x_max - x_min >= world.world_size || z_max - z_min >= world.world_size {
            continue;
        }
        let dy = if shape == Shape::Hole {
            surface - 1 - hi(1)
        } else {
            surface - lo(1)
        };
        let dx = rng.gen_range(-x_min..world.world_size - x_max);
        let dz = rng.gen_range(-z_min..world.world_size - z_max);
        let voxels: BTreeSet<Cell> = local.iter().map(|c| [c[0] + dx, c[1] + dy, c[2] + dz]).collect();
        if voxels.iter().all(|c| world.in_bounds(*c)) && voxels.is_disjoint(&claimed) {
            return Some((size, voxels));
        }
    }
    None
}
