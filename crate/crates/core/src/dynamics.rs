//! World stepping: NPC random walk, scripted agent tasks, snapshot schedule.
//!
//! Each step runs in a fixed order: NPCs move, then the agent advances its
//! active task, then the clock ticks. Build, destroy and dig take effect on
//! the last step of their interval. Moves are straight-line with no
//! obstacle avoidance.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::GenConfig;
use crate::geometry::{heading_yaw, Cell, Vec3};
use crate::pools::ScenePools;
use crate::scene::place_shape;
use crate::shapes::{make_shape, Shape, ShapeSize};
use crate::world::{ActionKind, ActionRecord, EntityKind, Memid, Snapshot, SnapshotHistory, WorldState};

/// The follower stops once it is this close to its target.
pub const CONTACT_DISTANCE: f64 = 1.0;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("invalid snapshot schedule: {n_snapshots} snapshots over {total_steps} steps")]
    InvalidSchedule { total_steps: u64, n_snapshots: usize },
    #[error("world has no agent")]
    NoAgent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskAction {
    Move { to: Vec3 },
    Build { shape: Shape, size: ShapeSize, origin: Cell, color: String },
    Destroy { target: Memid },
    Dig { size: ShapeSize, origin: Cell, color: String },
    Follow { target: Memid },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub action: TaskAction,
    /// Steps the task occupies, at least 1.
    pub duration: u64,
}

impl Task {
    pub fn kind(&self) -> ActionKind {
        match self.action {
            TaskAction::Move { .. } => ActionKind::Move,
            TaskAction::Build { .. } => ActionKind::Build,
            TaskAction::Destroy { .. } => ActionKind::Destroy,
            TaskAction::Dig { .. } => ActionKind::Dig,
            TaskAction::Follow { .. } => ActionKind::Follow,
        }
    }

    fn detail(&self) -> String {
        match &self.action {
            TaskAction::Move { to } => format!("to ({:.1}, {:.1}, {:.1})", to.x, to.y, to.z),
            TaskAction::Build { shape, origin, color, .. } => {
                format!("{color} {shape} at ({}, {}, {})", origin[0], origin[1], origin[2])
            }
            TaskAction::Destroy { target } => format!("target {target}"),
            TaskAction::Dig { origin, .. } => format!("hole at ({}, {}, {})", origin[0], origin[1], origin[2]),
            TaskAction::Follow { target } => format!("target {target}"),
        }
    }
}

/// Motion parameters for [`step_world`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionParams {
    pub npc_move_prob: f64,
    pub npc_step: f64,
    pub agent_speed: f64,
}

impl MotionParams {
    pub fn from_config(c: &GenConfig) -> Self {
        Self {
            npc_move_prob: c.npc_move_prob,
            npc_step: c.npc_step,
            agent_speed: c.agent_speed,
        }
    }
}

impl Default for MotionParams {
    fn default() -> Self {
        Self::from_config(&GenConfig::default())
    }
}

/// A task in progress, carried across [`step_world`] calls.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveTask {
    task: Task,
    elapsed: u64,
    voxels: BTreeSet<Cell>,
}

/// Stepper state for one episode.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Stepper {
    active: Option<ActiveTask>,
}

impl Stepper {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_busy(&self) -> bool {
        self.active.is_some()
    }

    /// Validate `task` against the world, log it, and make it active.
    pub fn assign(&mut self, world: &mut WorldState, task: Task) -> Result<(), DynamicsError> {
        let agent = world.agent().ok_or(DynamicsError::NoAgent)?.memid;
        if task.duration == 0 {
            return Err(DynamicsError::InvalidTask("duration must be at least 1".into()));
        }
        if self.active.is_some() {
            return Err(DynamicsError::InvalidTask("agent already has a task".into()));
        }
        let in_bounds = |p: Vec3| [p.x, p.y, p.z].iter().all(|v| (0.0..=world.max_coord()).contains(v));
        let voxels = match &task.action {
            TaskAction::Move { to } => {
                if !in_bounds(*to) {
                    return Err(DynamicsError::InvalidTask(format!("move target {to:?} out of bounds")));
                }
                BTreeSet::new()
            }
            TaskAction::Build { shape, size, origin, .. } => {
                let v = make_shape(*shape, *size, *origin).map_err(|e| DynamicsError::InvalidTask(e.to_string()))?;
                if !v.iter().all(|c| world.in_bounds(*c)) {
                    return Err(DynamicsError::InvalidTask(format!("{shape} does not fit in the world")));
                }
                v
            }
            TaskAction::Dig { size, origin, .. } => {
                let v = make_shape(Shape::Hole, *size, *origin).map_err(|e| DynamicsError::InvalidTask(e.to_string()))?;
                if !v.iter().all(|c| world.in_bounds(*c)) {
                    return Err(DynamicsError::InvalidTask("hole does not fit in the world".into()));
                }
                v
            }
            TaskAction::Destroy { target } => {
                if !world.block_objects.iter().any(|b| b.memid == *target) {
                    return Err(DynamicsError::InvalidTask(format!("no block object {target}")));
                }
                BTreeSet::new()
            }
            TaskAction::Follow { target } => {
                match world.entity(*target) {
                    Some(e) if e.kind != EntityKind::Agent => {}
                    _ => return Err(DynamicsError::InvalidTask(format!("no entity {target} to follow"))),
                }
                BTreeSet::new()
            }
        };
        world.action_log.push(ActionRecord {
            actor: agent,
            action: task.kind(),
            detail: task.detail(),
            start_step: world.clock,
            end_step: world.clock + task.duration,
        });
        self.active = Some(ActiveTask {
            task,
            elapsed: 0,
            voxels,
        });
        Ok(())
    }

    /// Advance the world `n_steps` steps.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        world: &mut WorldState,
        n_steps: u64,
        params: &MotionParams,
        rng: &mut R,
    ) -> Result<(), DynamicsError> {
        for _ in 0..n_steps {
            move_npcs(world, params, rng);
            self.advance_task(world, params)?;
            world.clock += 1;
        }
        Ok(())
    }

    fn advance_task(&mut self, world: &mut WorldState, params: &MotionParams) -> Result<(), DynamicsError> {
        let Some(active) = self.active.as_mut() else {
            return Ok(());
        };
        let agent_id = world.agent().ok_or(DynamicsError::NoAgent)?.memid;
        active.elapsed += 1;
        let finishing = active.elapsed >= active.task.duration;
        match &active.task.action {
            TaskAction::Move { to } => {
                move_toward(world, agent_id, *to, params.agent_speed, 0.0);
            }
            TaskAction::Follow { target } => {
                if let Some(goal) = world.entity(*target).map(|e| e.pose.position()) {
                    move_toward(world, agent_id, goal, params.agent_speed, CONTACT_DISTANCE);
                }
            }
            TaskAction::Build { shape, color, .. } if finishing => {
                let (shape, color) = (*shape, color.clone());
                world.add_block(shape, &color, std::mem::take(&mut active.voxels));
            }
            TaskAction::Dig { color, .. } if finishing => {
                let color = color.clone();
                world.add_block(Shape::Hole, &color, std::mem::take(&mut active.voxels));
            }
            TaskAction::Destroy { target } if finishing => {
                world.remove_block(*target);
            }
            _ => {}
        }
        if finishing {
            self.active = None;
        }
        Ok(())
    }
}

/// Advance `world` by `n_steps`, first assigning `task` if given.
pub fn step_world<R: Rng + ?Sized>(
    world: &mut WorldState,
    n_steps: u64,
    task: Option<Task>,
    params: &MotionParams,
    rng: &mut R,
) -> Result<(), DynamicsError> {
    let mut stepper = Stepper::new();
    if let Some(task) = task {
        stepper.assign(world, task)?;
    }
    stepper.step(world, n_steps, params, rng)
}

fn clamp_to_world(world: &WorldState, p: Vec3) -> Vec3 {
    let max = world.max_coord();
    Vec3::new(p.x.clamp(0.0, max), p.y.clamp(0.0, max), p.z.clamp(0.0, max))
}

fn move_npcs<R: Rng + ?Sized>(world: &mut WorldState, params: &MotionParams, rng: &mut R) {
    let max = world.max_coord();
    for npc in world.entities.iter_mut().filter(|e| e.kind == EntityKind::Npc) {
        if !rng.gen_bool(params.npc_move_prob) {
            continue;
        }
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let len = rng.gen_range(0.0..=params.npc_step);
        let d = Vec3::new(angle.cos() * len, 0.0, angle.sin() * len);
        let p = npc.pose.position() + d;
        let p = Vec3::new(p.x.clamp(0.0, max), p.y, p.z.clamp(0.0, max));
        if len > 0.0 {
            npc.pose.yaw = heading_yaw(d);
        }
        npc.pose.set_position(p);
    }
}

/// Step `who` straight toward `goal`, stopping `standoff` short of it.
fn move_toward(world: &mut WorldState, who: Memid, goal: Vec3, speed: f64, standoff: f64) {
    let clamped_goal = clamp_to_world(world, goal);
    let Some(e) = world.entity_mut(who) else {
        return;
    };
    let here = e.pose.position();
    let delta = clamped_goal - here;
    let dist = delta.norm();
    let travel = (dist - standoff).min(speed);
    if travel <= 0.0 {
        return;
    }
    let next = if travel >= dist { clamped_goal } else { here + delta * (travel / dist) };
    e.pose.set_position(next);
    let h = delta.horizontal();
    if h.norm() > 1e-12 {
        e.pose.yaw = heading_yaw(h);
    }
}

/// Step indices at which snapshots are taken: `n_snapshots` evenly spaced
/// indices from 0 to `total_steps`, rounded half up. A single snapshot is
/// taken at the end.
pub fn schedule_snapshots(total_steps: u64, n_snapshots: usize) -> Result<Vec<u64>, DynamicsError> {
    let n = n_snapshots as u64;
    if n == 0 || n > total_steps + 1 {
        return Err(DynamicsError::InvalidSchedule {
            total_steps,
            n_snapshots,
        });
    }
    if n == 1 {
        return Ok(vec![total_steps]);
    }
    let gaps = n - 1;
    Ok((0..n).map(|i| (2 * i * total_steps + gaps) / (2 * gaps)).collect())
}

/// Draw a command the agent can execute within `n_steps`, or `None` when
/// there is no time to act.
pub fn sample_task<R: Rng + ?Sized>(
    world: &WorldState,
    pools: &ScenePools,
    params: &MotionParams,
    n_steps: u64,
    rng: &mut R,
) -> Option<Task> {
    if n_steps == 0 {
        return None;
    }
    let agent = world.agent()?;
    let mut kinds = vec![ActionKind::Move, ActionKind::Dig];
    if pools.shapes.iter().any(|s| *s != Shape::Hole) {
        kinds.push(ActionKind::Build);
    }
    if world.block_objects.iter().any(|b| b.shape != Shape::Hole) {
        kinds.push(ActionKind::Destroy);
    }
    if world.entities.iter().any(|e| e.kind == EntityKind::Npc) {
        kinds.push(ActionKind::Follow);
    }
    let work = |voxels: usize| (1 + voxels as u64 / 8).min(n_steps);
    let color = pools.colors.choose(rng)?.clone();
    let action = match *kinds.choose(rng)? {
        ActionKind::Move => {
            let size = world.world_size;
            let to = Vec3::new(
                rng.gen_range(0..size) as f64,
                world.surface_level() as f64,
                rng.gen_range(0..size) as f64,
            );
            let steps = (agent.pose.position().distance(to) / params.agent_speed).ceil() as u64 + 1;
            return Some(Task {
                action: TaskAction::Move { to },
                duration: steps.min(n_steps),
            });
        }
        ActionKind::Build => {
            let choices: Vec<Shape> = pools.shapes.iter().copied().filter(|s| *s != Shape::Hole).collect();
            let shape = *choices.choose(rng)?;
            let (size, voxels) = place_shape(world, shape, rng)?;
            let origin = origin_for(shape, size, &voxels);
            (TaskAction::Build { shape, size, origin, color }, work(voxels.len()))
        }
        ActionKind::Dig => {
            let (size, voxels) = place_shape(world, Shape::Hole, rng)?;
            let origin = origin_for(Shape::Hole, size, &voxels);
            (TaskAction::Dig { size, origin, color }, work(voxels.len()))
        }
        ActionKind::Destroy => {
            let targets: Vec<_> = world.block_objects.iter().filter(|b| b.shape != Shape::Hole).collect();
            let target = targets.choose(rng)?;
            (TaskAction::Destroy { target: target.memid }, work(target.voxels.len()))
        }
        ActionKind::Follow => {
            let npcs: Vec<_> = world.entities.iter().filter(|e| e.kind == EntityKind::Npc).collect();
            (TaskAction::Follow { target: npcs.choose(rng)?.memid }, n_steps)
        }
    };
    Some(Task {
        action: action.0,
        duration: action.1,
    })
}

/// Recover the origin that reproduces `voxels` for `shape` at `size`.
fn origin_for(shape: Shape, size: ShapeSize, voxels: &BTreeSet<Cell>) -> Cell {
    let local = make_shape(shape, size, [0, 0, 0]).expect("size came from a successful placement");
    let (a, b) = (local.iter().next().expect("non-empty"), voxels.iter().next().expect("non-empty"));
    [b[0] - a[0], b[1] - a[1], b[2] - a[2]]
}

/// Run one episode: maybe assign a command, then step the world and
/// capture snapshots on the configured schedule.
pub fn run_episode<R: Rng + ?Sized>(
    world: &mut WorldState,
    config: &GenConfig,
    pools: &ScenePools,
    rng: &mut R,
) -> Result<Vec<Snapshot>, DynamicsError> {
    let schedule = schedule_snapshots(config.world_steps, config.n_snapshots)?;
    let params = MotionParams::from_config(config);
    let mut stepper = Stepper::new();
    if config.world_steps > 0 && rng.gen_bool(config.command_prob) {
        if let Some(task) = sample_task(world, pools, &params, config.world_steps, rng) {
            stepper.assign(world, task)?;
        }
    }
    let mut history = SnapshotHistory::new();
    for (i, &at) in schedule.iter().enumerate() {
        stepper.step(world, at - world.clock, &params, rng)?;
        history
            .record(world, i as u32)
            .expect("schedule indices increase");
    }
    Ok(history.into_snapshots())
}
