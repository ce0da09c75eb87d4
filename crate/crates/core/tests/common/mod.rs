//! Test-only reference implementations, written against the serialized
//! formats rather than the library's types.
//!
//! `naive` answers a logical form from the JSON relational context with
//! plain loops. `shape_contains` is a per-cell membership predicate for
//! every shape, used to brute-force the voxel sets.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use gridqa_core::config::GenConfig;
use gridqa_core::dynamics::run_episode;
use gridqa_core::query::{sample_form_of_kind, QueryParams};
use gridqa_core::rng::sample_rng;
use gridqa_core::scene::build_scene;
use gridqa_core::world::ActionRecord;
use gridqa_core::{execute, render_relational_context, ClauseType, OracleError, ScenePools, Snapshot};
use serde_json::{json, Value};

/// Build one scene and run its episode, like the pipeline does.
pub fn episode(config: &GenConfig, pools: &ScenePools, index: u64) -> (Vec<Snapshot>, Vec<ActionRecord>) {
    let mut rng = sample_rng(config.seed, index);
    let mut world = build_scene(config, pools, &mut rng).expect("scene fits");
    let snaps = run_episode(&mut world, config, pools, &mut rng).expect("episode runs");
    (snaps, world.action_log)
}

/// The JSON a naive oracle sees for one question.
pub fn question_json(snaps: &[Snapshot], log: &[ActionRecord], form: &Value) -> Value {
    json!({
        "context_relational": serde_json::to_value(render_relational_context(snaps)).unwrap(),
        "action_log": serde_json::to_value(log).unwrap(),
        "query_logical_form": form,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    Empty,
    Tie,
    Missing,
    History,
}

pub fn failure_of(e: &OracleError) -> Option<Failure> {
    Some(match e {
        OracleError::Empty => Failure::Empty,
        OracleError::Tie(_) => Failure::Tie,
        OracleError::MissingObject(_) | OracleError::MissingEntity(_) => Failure::Missing,
        OracleError::NotEnoughSnapshots(_) => Failure::History,
        OracleError::Invalid(_) => return None,
    })
}

// ---------------------------------------------------------------------------
// Naive oracle

#[derive(Debug, Clone)]
struct Obj {
    id: String,
    kind: String,
    name: Option<String>,
    pos: [f64; 3],
    yaw: f64,
}

#[derive(Debug, Clone)]
struct Fact {
    id: String,
    subject: String,
    predicate: String,
    object: String,
}

#[derive(Debug, Clone, Default)]
struct Snap {
    step: u64,
    objs: Vec<Obj>,
    facts: Vec<Fact>,
}

impl Snap {
    fn get(&self, id: &str) -> Option<&Obj> {
        self.objs.iter().find(|o| o.id == id)
    }
    fn by_name(&self, name: &str) -> Option<&Obj> {
        self.objs.iter().find(|o| o.name.as_deref() == Some(name))
    }
    fn by_kind(&self, kind: &str) -> Option<&Obj> {
        self.objs.iter().find(|o| o.kind == kind)
    }
}

fn s(v: &Value) -> String {
    v.as_str().expect("string").to_string()
}

fn load(ctx: &Value) -> Vec<Snap> {
    let infos = ctx["snapshots"].as_array().unwrap();
    let mut snaps: BTreeMap<u64, Snap> = infos
        .iter()
        .map(|i| {
            let t = i["time_index"].as_u64().unwrap();
            (t, Snap { step: i["step"].as_u64().unwrap(), ..Default::default() })
        })
        .collect();
    for n in ctx["reference_objects"].as_array().unwrap() {
        let words: Vec<String> = n["reference_objects_words"].as_array().unwrap().iter().map(s).collect();
        let f: Vec<f64> = n["reference_objects_float"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        let mut pos = [f[0], f[1], f[2]];
        if let Some(vox) = n.get("voxels").and_then(Value::as_array) {
            // Recompute the centroid from the cells.
            let mut sum = [0i64; 3];
            for c in vox {
                for k in 0..3 {
                    sum[k] += c[k].as_i64().unwrap();
                }
            }
            for k in 0..3 {
                pos[k] = sum[k] as f64 / vox.len() as f64;
            }
        }
        let kind = words[0].clone();
        let name = if kind == "inst_seg" { None } else { Some(words[1].clone()) };
        let snap = snaps.get_mut(&n["time_index"].as_u64().unwrap()).unwrap();
        snap.objs.push(Obj { id: s(&n["reference_object_hash"]), kind, name, pos, yaw: f[4] });
    }
    for n in ctx["triples"].as_array().unwrap() {
        let w = n["triples_words"].as_array().unwrap();
        let snap = snaps.get_mut(&n["time_index"].as_u64().unwrap()).unwrap();
        snap.facts.push(Fact {
            id: s(&n["triples_hash"]),
            subject: s(&n["reference_object_hash"]),
            predicate: s(&w[0]),
            object: s(&w[1]),
        });
    }
    snaps.into_values().collect()
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = sub(a, b);
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Horizontal heading crossed with up.
fn right_of(yaw_deg: f64) -> [f64; 3] {
    let y = yaw_deg.to_radians();
    let f = [-y.sin(), 0.0, y.cos()];
    let up = [0.0, 1.0, 0.0];
    [
        f[1] * up[2] - f[2] * up[1],
        f[2] * up[0] - f[0] * up[2],
        f[0] * up[1] - f[1] * up[0],
    ]
}

fn dir_vec(owner: &Obj, direction: &str) -> [f64; 3] {
    let r = right_of(owner.yaw);
    match direction {
        "right" => r,
        "left" => [-r[0], -r[1], -r[2]],
        d => panic!("direction {d}"),
    }
}

fn axis_index(a: &str) -> usize {
    match a {
        "x" => 0,
        "y" => 1,
        "z" => 2,
        a => panic!("axis {a}"),
    }
}

fn cmp(v: f64, comparator: &str, t: f64) -> bool {
    match comparator {
        "less_than" => v < t,
        "greater_than" => v > t,
        c => panic!("comparator {c}"),
    }
}

fn round_half_away(v: f64) -> i64 {
    if v >= 0.0 {
        (v + 0.5).floor() as i64
    } else {
        -((-v + 0.5).floor() as i64)
    }
}

fn loc(p: [f64; 3]) -> String {
    format!("({}, {}, {})", round_half_away(p[0]), round_half_away(p[1]), round_half_away(p[2]))
}

fn tenths(d: f64) -> String {
    let t = (d * 10.0 + 0.5).floor() as i64;
    format!("{}.{}", t / 10, t % 10)
}

/// Unique best candidate; near-equal scores are a tie.
fn best(cands: &[(String, f64)]) -> Result<String, Failure> {
    let top = cands.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let near: Vec<&(String, f64)> = cands.iter().filter(|c| c.1 > top - 1e-6).collect();
    match near.len() {
        0 => Err(Failure::Empty),
        1 => Ok(near[0].0.clone()),
        _ => Err(Failure::Tie),
    }
}

struct World {
    first: Snap,
    last: Snap,
    n: usize,
}

impl World {
    fn owner(&self, frame: &str) -> Result<&Obj, Failure> {
        let kind = if frame == "my" { "player" } else { "agent" };
        self.last.by_kind(kind).ok_or(Failure::Missing)
    }

    fn anchor(&self, a: &str) -> Result<&Obj, Failure> {
        match a {
            "me" => self.owner("my"),
            "you" => self.owner("your"),
            n => self.last.by_name(n).ok_or(Failure::Missing),
        }
    }

    fn moves(&self) -> Vec<(String, [f64; 3])> {
        let mut out = Vec::new();
        for o in &self.last.objs {
            if o.kind == "inst_seg" {
                continue;
            }
            if let Some(b) = self.first.get(&o.id) {
                out.push((o.id.clone(), sub(o.pos, b.pos)));
            }
        }
        out
    }
}

type Chosen = (BTreeSet<String>, BTreeSet<String>);

fn clause(w: &World, c: &Value) -> Result<Chosen, Failure> {
    let kind = c["kind"].as_str().unwrap();
    let a = &c["args"];
    if c["class"] == "temporal" && w.n < 2 {
        return Err(Failure::History);
    }
    let mut objs = BTreeSet::new();
    let mut facts = BTreeSet::new();
    match kind {
        "name" | "tag" => {
            let want = if kind == "name" { &a["name"] } else { &a["value"] };
            for f in &w.last.facts {
                let pred_ok = if kind == "name" { f.predicate == "has_name" } else { f.predicate != "has_name" };
                if pred_ok && f.object == want.as_str().unwrap() {
                    objs.insert(f.subject.clone());
                    facts.insert(f.id.clone());
                }
            }
        }
        "absolute_cardinal" => {
            let k = axis_index(a["axis"].as_str().unwrap());
            let t = a["threshold"].as_f64().unwrap();
            for o in &w.last.objs {
                if cmp(o.pos[k], a["comparator"].as_str().unwrap(), t) {
                    objs.insert(o.id.clone());
                }
            }
        }
        "absolute_distance" => {
            let p: Vec<f64> = a["point"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
            let t = a["threshold"].as_f64().unwrap();
            for o in &w.last.objs {
                if cmp(dist(o.pos, [p[0], p[1], p[2]]), a["comparator"].as_str().unwrap(), t) {
                    objs.insert(o.id.clone());
                }
            }
        }
        "direction" => {
            let owner = w.owner(a["frame"].as_str().unwrap())?;
            let d = dir_vec(owner, a["direction"].as_str().unwrap());
            for o in &w.last.objs {
                let off = sub(o.pos, owner.pos);
                if dot([off[0], 0.0, off[2]], d) > 0.0 {
                    objs.insert(o.id.clone());
                }
            }
        }
        "temporal_cardinal" => {
            let k = axis_index(a["axis"].as_str().unwrap());
            let sign = if a["change"] == "increased" { 1.0 } else { -1.0 };
            let cands: Vec<(String, f64)> = w.moves().into_iter().map(|(id, d)| (id, sign * d[k])).collect();
            objs.insert(best(&cands)?);
        }
        "temporal_relative" => {
            let owner = w.owner(a["frame"].as_str().unwrap())?;
            let d = dir_vec(owner, a["direction"].as_str().unwrap());
            let cands: Vec<(String, f64)> = w.moves().into_iter().map(|(id, m)| (id, dot(m, d))).collect();
            objs.insert(best(&cands)?);
        }
        k => panic!("{k} is not a filter"),
    }
    if c["negated"].as_bool().unwrap() {
        let all: BTreeSet<String> = w.last.objs.iter().map(|o| o.id.clone()).collect();
        return Ok((all.difference(&objs).cloned().collect(), BTreeSet::new()));
    }
    Ok((objs, facts))
}

fn describe(w: &World, chosen: Chosen, rt: &str) -> Result<(String, BTreeSet<String>), Failure> {
    let (mut objs, facts) = chosen;
    if objs.is_empty() {
        return Err(Failure::Empty);
    }
    if rt == "name" {
        objs.retain(|id| w.last.get(id).unwrap().name.is_some());
    }
    let mut mem: BTreeSet<String> = objs.clone();
    for f in &w.last.facts {
        if facts.contains(&f.id) && objs.contains(&f.subject) {
            mem.insert(f.id.clone());
        }
    }
    let mut items: Vec<String> = match rt {
        "name" => objs.iter().map(|id| w.last.get(id).unwrap().name.clone().unwrap()).collect(),
        "tag" => {
            let set: BTreeSet<String> =
                w.last.facts.iter().filter(|f| objs.contains(&f.subject)).map(|f| f.object.clone()).collect();
            set.into_iter().collect()
        }
        "location" => objs.iter().map(|id| loc(w.last.get(id).unwrap().pos)).collect(),
        "count" => vec![objs.len().to_string()],
        r => panic!("return {r}"),
    };
    if items.is_empty() || (rt == "count" && objs.is_empty()) {
        return Err(Failure::Empty);
    }
    items.sort();
    Ok((items.join(", "), mem))
}

/// Answer text and sorted relevant memids, computed from the serialized
/// question (see [`question_json`]).
pub fn naive(q: &Value) -> Result<(String, Vec<String>), Failure> {
    let snaps = load(&q["context_relational"]);
    let w = World {
        first: snaps.first().unwrap().clone(),
        last: snaps.last().unwrap().clone(),
        n: snaps.len(),
    };
    let form = &q["query_logical_form"];
    let rt = form["return_type"].as_str().unwrap();
    let root = &form["root"];
    let one = |id: String| (BTreeSet::from([id]), BTreeSet::new());
    let (text, mem) = if let Some(op) = root.get("op") {
        let ch = root["children"].as_array().unwrap();
        let (a, fa) = clause(&w, &ch[0])?;
        let (b, fb) = clause(&w, &ch[1])?;
        let objs = if op == "and" { a.intersection(&b).cloned().collect() } else { a.union(&b).cloned().collect() };
        describe(&w, (objs, fa.union(&fb).cloned().collect()), rt)?
    } else {
        let a = &root["args"];
        if root["class"] == "temporal" && w.n < 2 {
            return Err(Failure::History);
        }
        match root["kind"].as_str().unwrap() {
            "farthest_moved" => {
                let cands: Vec<(String, f64)> =
                    w.moves().into_iter().map(|(id, d)| (id, dot(d, d).sqrt())).collect();
                describe(&w, one(best(&cands)?), rt)?
            }
            "closest_object" => {
                let anchor = w.anchor(a["anchor"].as_str().unwrap())?;
                let cands: Vec<(String, f64)> = w
                    .last
                    .objs
                    .iter()
                    .filter(|o| o.id != anchor.id)
                    .map(|o| (o.id.clone(), -dist(o.pos, anchor.pos)))
                    .collect();
                let (t, mut m) = describe(&w, one(best(&cands)?), rt)?;
                m.insert(anchor.id.clone());
                (t, m)
            }
            "max_direction" => {
                let owner = w.owner(a["frame"].as_str().unwrap())?;
                let d = dir_vec(owner, a["direction"].as_str().unwrap());
                let cands: Vec<(String, f64)> = w
                    .last
                    .objs
                    .iter()
                    .filter(|o| o.id != owner.id)
                    .map(|o| {
                        let off = sub(o.pos, owner.pos);
                        (o.id.clone(), dot([off[0], 0.0, off[2]], d))
                    })
                    .collect();
                let (t, mut m) = describe(&w, one(best(&cands)?), rt)?;
                m.insert(owner.id.clone());
                (t, m)
            }
            "location_at_time" => {
                let snap = if a["time"] == "beginning" { &w.first } else { &w.last };
                let o = snap.by_name(a["name"].as_str().unwrap()).ok_or(Failure::Missing)?;
                (loc(o.pos), BTreeSet::from([o.id.clone()]))
            }
            "action" => {
                let agent = w.owner("your")?;
                let mut done: Option<(u64, String)> = None;
                for r in q["action_log"].as_array().unwrap() {
                    let start = r["start_step"].as_u64().unwrap();
                    if r["actor"] != agent.id.as_str() || start < w.first.step || start >= w.last.step {
                        continue;
                    }
                    if done.as_ref().is_none_or(|(s, _)| start >= *s) {
                        done = Some((start, s(&r["action"])));
                    }
                }
                let text = done.map_or("nothing".to_string(), |d| d.1);
                (text, BTreeSet::from([agent.id.clone()]))
            }
            "object_tracking" => {
                let o = w.last.by_name(a["name"].as_str().unwrap()).ok_or(Failure::Missing)?;
                let me = w.owner("my")?;
                let to: Vec<f64> = a["to"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
                let off = sub(o.pos, me.pos);
                let p = [to[0] + off[0], to[1] + off[1], to[2] + off[2]];
                (loc(p), BTreeSet::from([o.id.clone(), me.id.clone()]))
            }
            "distance_between" => {
                let o = w.last.by_name(a["name"].as_str().unwrap()).ok_or(Failure::Missing)?;
                let other = w.anchor(a["other"].as_str().unwrap())?;
                (tenths(dist(o.pos, other.pos)), BTreeSet::from([o.id.clone(), other.id.clone()]))
            }
            "distance_from_position" => {
                let owner = w.owner(a["frame"].as_str().unwrap())?;
                let d = dir_vec(owner, a["direction"].as_str().unwrap());
                let n = a["steps"].as_f64().unwrap();
                let p = [owner.pos[0] + d[0] * n, owner.pos[1] + d[1] * n, owner.pos[2] + d[2] * n];
                (loc(p), BTreeSet::from([owner.id.clone()]))
            }
            _ => {
                let chosen = clause(&w, root)?;
                describe(&w, chosen, rt)?
            }
        }
    };
    Ok((text, mem.into_iter().collect()))
}

#[derive(Debug, Default)]
pub struct Comparison {
    pub compared: usize,
    /// Forms the library answered without error.
    pub answered: usize,
    pub mismatches: Vec<String>,
}

/// Compare the library oracle and the naive one on `n` scenes, one form of
/// every clause kind per scene.
pub fn compare_scenes(config: &GenConfig, n: u64) -> Comparison {
    let pools = ScenePools::default();
    let params = QueryParams::from_config(config);
    let mut out = Comparison::default();
    for i in 0..n {
        let (snaps, log) = episode(config, &pools, i);
        let mut rng = sample_rng(config.seed ^ 0xabcd, i);
        for &kind in ClauseType::ALL {
            let Some(form) = sample_form_of_kind(kind, &snaps, &params, &mut rng) else {
                continue;
            };
            out.compared += 1;
            let lib = execute(&form, &snaps, &log);
            out.answered += usize::from(lib.is_ok());
            let reference = naive(&question_json(&snaps, &log, &form.to_json_value()));
            let agree = match (&lib, &reference) {
                (Ok(a), Ok((text, mem))) => {
                    let ids: Vec<String> = a.relevant_memids.iter().map(|m| m.to_string()).collect();
                    &a.text == text && &ids == mem
                }
                (Err(e), Err(f)) => failure_of(e) == Some(*f),
                _ => false,
            };
            if !agree {
                out.mismatches.push(format!("scene {i} {form}: library {lib:?} vs naive {reference:?}"));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Shapes

fn in_box(c: [i32; 3], w: i32, h: i32, d: i32) -> bool {
    (0..w).contains(&c[0]) && (0..h).contains(&c[1]) && (0..d).contains(&c[2])
}

fn on_count(c: [i32; 3], dims: [i32; 3]) -> usize {
    (0..3).filter(|&k| c[k] == 0 || c[k] == dims[k] - 1).count()
}

fn in_ball(c: [i32; 3], r: i32) -> bool {
    let q = |v: i32| (v as i64) * (v as i64);
    q(c[0]) + q(c[1]) + q(c[2]) <= q(r)
}

fn in_disk(c: [i32; 3], r: i32) -> bool {
    c[1] == 0 && (c[0] as i64).pow(2) + (c[2] as i64).pow(2) <= (r as i64).pow(2)
}

fn in_triangle(c: [i32; 3], b: i32) -> bool {
    c[2] == 0 && c[1] >= 0 && c[0] >= c[1] && c[0] <= b - 1 - c[1]
}

/// Some neighbor from `offsets` falls outside `inside`.
fn on_edge(c: [i32; 3], inside: impl Fn([i32; 3]) -> bool, offsets: &[[i32; 3]]) -> bool {
    inside(c) && offsets.iter().any(|o| !inside([c[0] + o[0], c[1] + o[1], c[2] + o[2]]))
}

fn offsets(plane: Option<usize>) -> Vec<[i32; 3]> {
    let mut out = Vec::new();
    for x in -1..=1 {
        for y in -1..=1 {
            for z in -1..=1 {
                let o = [x, y, z];
                if o == [0, 0, 0] || plane.is_some_and(|k| o[k] != 0) {
                    continue;
                }
                out.push(o);
            }
        }
    }
    out
}

/// Whether local cell `c` belongs to shape `word` of size `[x, y, z]`
/// placed at the origin.
pub fn shape_contains(word: &str, size: [i32; 3], c: [i32; 3]) -> bool {
    let [a, b, d] = size;
    match word {
        "cube" => in_box(c, a, a, a),
        "hollow_cube" => in_box(c, a, a, a) && on_count(c, [a, a, a]) >= 1,
        "rectanguloid" => in_box(c, a, b, d),
        "hollow_rectanguloid" => in_box(c, a, b, d) && on_count(c, [a, b, d]) >= 1,
        "rectanguloid_frame" => in_box(c, a, b, d) && on_count(c, [a, b, d]) >= 2,
        "hole" => (0..a).contains(&c[0]) && (-(b - 1)..=0).contains(&c[1]) && (0..d).contains(&c[2]),
        "sphere" => in_ball(c, a),
        "spherical_shell" => on_edge(c, |p| in_ball(p, a), &offsets(None)),
        "dome" => c[1] >= 0 && on_edge(c, |p| in_ball(p, a), &offsets(None)),
        "ellipsoid" => {
            // x^2/a^2 + y^2/b^2 + z^2/d^2 <= 1, cleared of denominators.
            let q = |v: i32| (v as i64).pow(2);
            q(c[0]) * q(b) * q(d) + q(c[1]) * q(a) * q(d) + q(c[2]) * q(a) * q(b) <= q(a) * q(b) * q(d)
        }
        "pyramid" => {
            let l = c[1];
            l >= 0 && l <= a - 1 - l && (l..=a - 1 - l).contains(&c[0]) && (l..=a - 1 - l).contains(&c[2])
        }
        "square" => in_box(c, a, a, 1),
        "rectangle" => in_box(c, a, b, 1),
        "hollow_rectangle" => in_box(c, a, b, 1) && (c[0] == 0 || c[0] == a - 1 || c[1] == 0 || c[1] == b - 1),
        "triangle" => in_triangle(c, a),
        "hollow_triangle" => on_edge(c, |p| in_triangle(p, a), &offsets(Some(2))),
        "disk" => in_disk(c, a),
        "circle" => on_edge(c, |p| in_disk(p, a), &offsets(Some(1))),
        "arch" => c[2] == 0 && ((0..b).contains(&c[1]) && (c[0] == 0 || c[0] == a - 1) || c[1] == b && (0..a).contains(&c[0])),
        w => panic!("unknown shape {w}"),
    }
}

/// Every cell of the shape, by scanning a box that surely contains it.
pub fn brute_force_shape(word: &str, size: [i32; 3]) -> BTreeSet<[i32; 3]> {
    let r = size.iter().copied().max().unwrap() + 1;
    let mut out = BTreeSet::new();
    for x in -r..=r {
        for y in -r..=r {
            for z in -r..=r {
                if shape_contains(word, size, [x, y, z]) {
                    out.insert([x, y, z]);
                }
            }
        }
    }
    out
}
