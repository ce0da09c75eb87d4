//! Fixtures shared by the benchmarks.

use gridqa_core::dynamics::run_episode;
use gridqa_core::rng::sample_rng;
use gridqa_core::scene::build_scene;
use gridqa_core::world::ActionRecord;
use gridqa_core::{GenConfig, ScenePools, Snapshot};

/// A finished default-config episode for sample `index`.
pub fn episode(config: &GenConfig, pools: &ScenePools, index: u64) -> (Vec<Snapshot>, Vec<ActionRecord>) {
    let mut rng = sample_rng(config.seed, index);
    let mut world = build_scene(config, pools, &mut rng).expect("default scenes fit");
    let snaps = run_episode(&mut world, config, pools, &mut rng).expect("valid schedule");
    (snaps, world.action_log)
}
