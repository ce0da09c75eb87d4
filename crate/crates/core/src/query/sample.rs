//! Query sampling.
//!
//! Grounded sampling draws clause arguments from the scene so that names
//! and properties exist and thresholds split the objects, then rejects
//! forms whose answer is empty or tied. [`random_form`] draws ungrounded
//! forms from a vocabulary, for grammar tests.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{
    Anchor, Change, Clause, ClauseKind, ClauseType, Comparator, Conjunction, Frame, QueryClass, QueryError, QueryForm,
    QueryNode, ReturnType, TimeRef,
};
use crate::config::GenConfig;
use crate::geometry::{Axis, Cell, Direction, Vec3};
use crate::oracle::{execute, Answer};
use crate::world::{ActionRecord, EntityKind, RefObject, Snapshot};

/// Largest step count in "what is the location N steps to my left".
pub const MAX_STEPS: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryParams {
    pub world_size: i32,
    pub two_clause_prob: f64,
    pub negation_prob: f64,
    pub max_attempts: usize,
}

impl QueryParams {
    pub fn from_config(c: &GenConfig) -> Self {
        Self {
            world_size: c.world_size,
            two_clause_prob: c.two_clause_prob,
            negation_prob: c.negation_prob,
            max_attempts: c.max_query_attempts,
        }
    }
}

impl Default for QueryParams {
    fn default() -> Self {
        Self::from_config(&GenConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledQuery {
    pub form: QueryForm,
    pub text: String,
    pub answer: Answer,
    /// Forms drawn and rejected before this one.
    pub rejections: usize,
}

/// Pick a query class in proportion to the configured weights.
pub fn choose_class<R: Rng + ?Sized>(config: &GenConfig, rng: &mut R) -> QueryClass {
    let weights = [
        (QueryClass::Property, config.weight_property),
        (QueryClass::Temporal, config.weight_temporal),
        (QueryClass::Geometric, config.weight_geometric),
    ];
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    let mut x = rng.gen_range(0.0..total);
    for (class, w) in weights {
        if x < w {
            return class;
        }
        x -= w;
    }
    weights.iter().rev().find(|(_, w)| *w > 0.0).expect("validated weights").0
}

fn pick<T: Copy, R: Rng + ?Sized>(items: &[T], rng: &mut R) -> T {
    *items.choose(rng).expect("non-empty choice")
}

fn frame_dir<R: Rng + ?Sized>(rng: &mut R) -> (Frame, Direction) {
    (pick(Frame::ALL, rng), pick(&Direction::ALL, rng))
}

fn random_cell<R: Rng + ?Sized>(size: i32, rng: &mut R) -> Cell {
    [rng.gen_range(0..size), rng.gen_range(0..size), rng.gen_range(0..size)]
}

/// An integer threshold that puts the smallest value on one side and the
/// largest on the other, or `None` if the values cannot be split.
fn split_threshold<R: Rng + ?Sized>(values: &[f64], comparator: Comparator, rng: &mut R) -> Option<i32> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(min.is_finite() && max.is_finite()) {
        return None;
    }
    let (lo, hi) = match comparator {
        Comparator::LessThan => (min.floor() + 1.0, max.floor()),
        Comparator::GreaterThan => (min.ceil(), max.ceil() - 1.0),
    };
    (lo <= hi).then(|| rng.gen_range(lo as i32..=hi as i32))
}

fn named_entities(s: &Snapshot) -> Vec<&str> {
    s.reference_objects.iter().filter_map(RefObject::name).collect()
}

/// Arguments for one clause of `kind`, drawn from the scene.
fn ground_clause<R: Rng + ?Sized>(
    kind: ClauseType,
    snapshots: &[Snapshot],
    params: &QueryParams,
    rng: &mut R,
) -> Option<ClauseKind> {
    let first = snapshots.first()?;
    let last = snapshots.last()?;
    let names = named_entities(last);
    let player = last.entity_of_kind(EntityKind::Player).map(|e| e.name.as_str());
    let agent = last.entity_of_kind(EntityKind::Agent).map(|e| e.name.as_str());
    let positions: Vec<Vec3> = last.reference_objects.iter().map(RefObject::position).collect();
    Some(match kind {
        ClauseType::Name => ClauseKind::Name {
            name: names.choose(rng)?.to_string(),
        },
        ClauseType::Tag => {
            let props: Vec<&str> = last
                .triples
                .iter()
                .filter(|t| t.predicate.is_property())
                .map(|t| t.object_text.as_str())
                .collect();
            ClauseKind::Tag {
                value: props.choose(rng)?.to_string(),
            }
        }
        ClauseType::AbsoluteCardinal => {
            let axis = pick(&Axis::ALL, rng);
            let comparator = pick(Comparator::ALL, rng);
            let values: Vec<f64> = positions.iter().map(|p| p.axis(axis)).collect();
            let threshold = split_threshold(&values, comparator, rng)?;
            ClauseKind::AbsoluteCardinal { axis, comparator, threshold }
        }
        ClauseType::AbsoluteDistance => {
            let point = random_cell(params.world_size, rng);
            let comparator = pick(Comparator::ALL, rng);
            let q = Vec3::from_cell(point);
            let values: Vec<f64> = positions.iter().map(|p| p.distance(q)).collect();
            let threshold = split_threshold(&values, comparator, rng)?;
            ClauseKind::AbsoluteDistance { point, comparator, threshold }
        }
        ClauseType::Direction => {
            let (frame, direction) = frame_dir(rng);
            ClauseKind::Direction { frame, direction }
        }
        ClauseType::TemporalCardinal => ClauseKind::TemporalCardinal {
            axis: pick(&Axis::ALL, rng),
            change: pick(Change::ALL, rng),
        },
        ClauseType::TemporalRelative => {
            let (frame, direction) = frame_dir(rng);
            ClauseKind::TemporalRelative { frame, direction }
        }
        ClauseType::FarthestMoved => ClauseKind::FarthestMoved {},
        ClauseType::LocationAtTime => {
            let time = pick(TimeRef::ALL, rng);
            let snap = if time == TimeRef::Beginning { first } else { last };
            ClauseKind::LocationAtTime {
                name: named_entities(snap).choose(rng)?.to_string(),
                time,
            }
        }
        ClauseType::Action => ClauseKind::Action {},
        ClauseType::ObjectTracking => {
            let others: Vec<&str> = names.iter().copied().filter(|n| Some(*n) != player).collect();
            ClauseKind::ObjectTracking {
                name: others.choose(rng)?.to_string(),
                to: random_cell(params.world_size, rng),
            }
        }
        ClauseType::ClosestObject => {
            let mut anchors = vec![Anchor::Me, Anchor::You];
            anchors.extend(
                names
                    .iter()
                    .filter(|n| Some(**n) != player && Some(**n) != agent)
                    .map(|n| Anchor::Named(n.to_string())),
            );
            ClauseKind::ClosestObject {
                anchor: anchors.choose(rng)?.clone(),
            }
        }
        ClauseType::MaxDirection => {
            let (frame, direction) = frame_dir(rng);
            ClauseKind::MaxDirection { frame, direction }
        }
        ClauseType::DistanceBetween => {
            let name = *names.choose(rng)?;
            let mut others = Vec::new();
            if Some(name) != player {
                others.push(Anchor::Me);
            }
            if Some(name) != agent {
                others.push(Anchor::You);
            }
            others.extend(
                names
                    .iter()
                    .filter(|n| **n != name && Some(**n) != player && Some(**n) != agent)
                    .map(|n| Anchor::Named(n.to_string())),
            );
            ClauseKind::DistanceBetween {
                name: name.to_string(),
                other: others.choose(rng)?.clone(),
            }
        }
        ClauseType::DistanceFromPosition => {
            let (frame, direction) = frame_dir(rng);
            ClauseKind::DistanceFromPosition {
                frame,
                direction,
                steps: rng.gen_range(1..=MAX_STEPS),
            }
        }
    })
}

/// Wrap a root clause: maybe negate it, maybe conjoin a second clause of the
/// same class, then pick a compatible return type.
fn assemble<R: Rng + ?Sized>(
    root: ClauseKind,
    params: &QueryParams,
    rng: &mut R,
    mut second: impl FnMut(ClauseType, &mut R) -> Option<ClauseKind>,
) -> Option<QueryForm> {
    let t = root.clause_type();
    let negate = |rng: &mut R| rng.gen_bool(params.negation_prob);
    let node = if t.is_standalone() {
        QueryNode::Clause(Clause::new(root))
    } else {
        let first = Clause { kind: root, negated: negate(rng) };
        if rng.gen_bool(params.two_clause_prob) {
            let kinds: Vec<ClauseType> = t.class().combinable_kinds().collect();
            let other = second(pick(&kinds, rng), rng)?;
            let op = pick(Conjunction::ALL, rng);
            let other = Clause { kind: other, negated: negate(rng) };
            QueryNode::Conjunction { op, children: [first, other] }
        } else {
            QueryNode::Clause(first)
        }
    };
    let mut form = QueryForm { root: node, return_type: ReturnType::Name };
    form.return_type = pick(&form.allowed_returns(), rng);
    debug_assert!(form.validate().is_ok(), "{form:?}");
    Some(form)
}

/// A grounded form whose root clause has kind `kind`. The answer is not
/// checked; `None` when the scene offers no valid arguments.
pub fn sample_form_of_kind<R: Rng + ?Sized>(
    kind: ClauseType,
    snapshots: &[Snapshot],
    params: &QueryParams,
    rng: &mut R,
) -> Option<QueryForm> {
    let root = ground_clause(kind, snapshots, params, rng)?;
    assemble(root, params, rng, |k, rng| ground_clause(k, snapshots, params, rng))
}

/// Draw forms of `class` until one has a non-empty, tie-free answer.
pub fn sample_query<R: Rng + ?Sized>(
    class: QueryClass,
    snapshots: &[Snapshot],
    action_log: &[ActionRecord],
    params: &QueryParams,
    rng: &mut R,
) -> Result<SampledQuery, QueryError> {
    let kinds: Vec<ClauseType> = ClauseType::of_class(class).collect();
    for attempt in 0..params.max_attempts {
        let kind = pick(&kinds, rng);
        let Some(form) = sample_form_of_kind(kind, snapshots, params, rng) else {
            continue;
        };
        if let Ok(answer) = execute(&form, snapshots, action_log) {
            return Ok(SampledQuery {
                text: super::render_text(&form),
                form,
                answer,
                rejections: attempt,
            });
        }
    }
    Err(QueryError::Unanswerable {
        attempts: params.max_attempts,
    })
}

/// Words for ungrounded forms.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    pub names: Vec<String>,
    pub properties: Vec<String>,
}

impl Vocabulary {
    pub fn from_pools(pools: &crate::pools::ScenePools) -> Self {
        let mut properties = pools.npc_types.clone();
        properties.extend(pools.colors.iter().cloned());
        properties.extend(pools.shapes.iter().map(|s| s.as_str().to_string()));
        Self {
            names: pools.names.clone(),
            properties,
        }
    }
}

fn random_clause<R: Rng + ?Sized>(kind: ClauseType, vocab: &Vocabulary, size: i32, rng: &mut R) -> ClauseKind {
    let name = |rng: &mut R| vocab.names.choose(rng).expect("names").clone();
    let anchor = |rng: &mut R, not: &str| loop {
        let a = match rng.gen_range(0..3) {
            0 => Anchor::Me,
            1 => Anchor::You,
            _ => Anchor::Named(name(rng)),
        };
        if a.as_str() != not {
            break a;
        }
    };
    let threshold = |rng: &mut R| rng.gen_range(-3..=2 * size);
    match kind {
        ClauseType::Name => ClauseKind::Name { name: name(rng) },
        ClauseType::Tag => ClauseKind::Tag {
            value: vocab.properties.choose(rng).expect("properties").clone(),
        },
        ClauseType::AbsoluteCardinal => ClauseKind::AbsoluteCardinal {
            axis: pick(&Axis::ALL, rng),
            comparator: pick(Comparator::ALL, rng),
            threshold: threshold(rng),
        },
        ClauseType::TemporalCardinal => ClauseKind::TemporalCardinal {
            axis: pick(&Axis::ALL, rng),
            change: pick(Change::ALL, rng),
        },
        ClauseType::TemporalRelative => {
            let (frame, direction) = frame_dir(rng);
            ClauseKind::TemporalRelative { frame, direction }
        }
        ClauseType::FarthestMoved => ClauseKind::FarthestMoved {},
        ClauseType::LocationAtTime => ClauseKind::LocationAtTime {
            name: name(rng),
            time: pick(TimeRef::ALL, rng),
        },
        ClauseType::Action => ClauseKind::Action {},
        ClauseType::ObjectTracking => ClauseKind::ObjectTracking {
            name: name(rng),
            to: random_cell(size, rng),
        },
        ClauseType::AbsoluteDistance => ClauseKind::AbsoluteDistance {
            point: random_cell(size, rng),
            comparator: pick(Comparator::ALL, rng),
            threshold: threshold(rng),
        },
        ClauseType::Direction => {
            let (frame, direction) = frame_dir(rng);
            ClauseKind::Direction { frame, direction }
        }
        ClauseType::ClosestObject => ClauseKind::ClosestObject { anchor: anchor(rng, "") },
        ClauseType::MaxDirection => {
            let (frame, direction) = frame_dir(rng);
            ClauseKind::MaxDirection { frame, direction }
        }
        ClauseType::DistanceBetween => {
            let n = name(rng);
            let other = anchor(rng, &n);
            ClauseKind::DistanceBetween { name: n, other }
        }
        ClauseType::DistanceFromPosition => {
            let (frame, direction) = frame_dir(rng);
            ClauseKind::DistanceFromPosition {
                frame,
                direction,
                steps: rng.gen_range(1..=4 * MAX_STEPS),
            }
        }
    }
}

/// A valid but ungrounded form over `vocab`, for exercising the grammar.
pub fn random_form<R: Rng + ?Sized>(vocab: &Vocabulary, world_size: i32, rng: &mut R) -> QueryForm {
    let params = QueryParams {
        world_size,
        ..QueryParams::default()
    };
    let kind = pick(ClauseType::ALL, rng);
    let root = random_clause(kind, vocab, world_size, rng);
    assemble(root, &params, rng, |k, rng| Some(random_clause(k, vocab, world_size, rng)))
        .expect("ungrounded clauses always exist")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::run_episode;
    use crate::pools::ScenePools;
    use crate::query::{parse_form, render_text};
    use crate::rng::sample_rng;
    use crate::scene::build_scene;

    #[test]
    fn split_threshold_separates_extremes() {
        let mut rng = sample_rng(0, 0);
        let values = [0.5, 3.2, 7.9];
        for _ in 0..100 {
            let t = split_threshold(&values, Comparator::LessThan, &mut rng).unwrap() as f64;
            assert!(0.5 < t && 7.9 >= t);
            let t = split_threshold(&values, Comparator::GreaterThan, &mut rng).unwrap() as f64;
            assert!((0.5..7.9).contains(&t));
        }
        assert_eq!(split_threshold(&[2.2, 2.7], Comparator::LessThan, &mut rng), None);
    }

    #[test]
    fn class_weights_respected() {
        let config = GenConfig::preset("geometric").unwrap();
        let mut rng = sample_rng(1, 1);
        for _ in 0..100 {
            assert_eq!(choose_class(&config, &mut rng), QueryClass::Geometric);
        }
    }

    #[test]
    fn sampled_queries_are_answerable_and_roundtrip() {
        let config = GenConfig::default();
        let pools = ScenePools::default();
        let params = QueryParams::from_config(&config);
        for i in 0..60 {
            let mut rng = sample_rng(5, i);
            let mut w = build_scene(&config, &pools, &mut rng).unwrap();
            let snaps = run_episode(&mut w, &config, &pools, &mut rng).unwrap();
            let class = QueryClass::ALL[i as usize % 3];
            let q = sample_query(class, &snaps, &w.action_log, &params, &mut rng).unwrap();
            assert_eq!(q.form.class(), class);
            assert!(!q.answer.text.is_empty());
            assert_eq!(parse_form(&q.text).unwrap(), q.form);
        }
    }

    #[test]
    fn random_forms_are_valid() {
        let vocab = Vocabulary::from_pools(&ScenePools::default());
        let mut rng = sample_rng(2, 2);
        for _ in 0..500 {
            let f = random_form(&vocab, 15, &mut rng);
            f.validate().unwrap();
            assert_eq!(parse_form(&render_text(&f)).unwrap(), f);
        }
    }
}
