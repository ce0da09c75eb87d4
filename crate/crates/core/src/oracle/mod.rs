//! Ground-truth answers for logical forms over a snapshot history.
//!
//! Filter clauses read the last snapshot, except temporal clauses which
//! compare the first and last snapshots. Negation is the complement within
//! the last snapshot's reference objects; `and` intersects, `or` unions.
//! Movement questions consider only animate objects present at both ends.

mod format;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::geometry::{Direction, Vec3};
use crate::query::{
    Anchor, Change, Clause, ClauseKind, ClauseType, Comparator, Conjunction, Frame, QueryClass, QueryError, QueryForm,
    QueryNode, ReturnType, TimeRef,
};
use crate::world::{ActionRecord, Entity, EntityKind, Memid, Predicate, RefObject, Snapshot};

pub use format::{format_answer, format_distance, format_location};

/// Scores closer than this are a tie and the question is ambiguous.
pub const TIE_EPSILON: f64 = 1e-6;

/// Answer to an action question when the agent did nothing in the window.
pub const NO_ACTION: &str = "nothing";

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("the answer is empty")]
    Empty,
    #[error("{0} has a tie between its top candidates")]
    Tie(ClauseType),
    #[error("no object named {0:?} in the snapshot")]
    MissingObject(String),
    #[error("no {0} in the snapshot")]
    MissingEntity(&'static str),
    #[error("temporal questions need at least 2 snapshots, got {0}")]
    NotEnoughSnapshots(usize),
    #[error(transparent)]
    Invalid(#[from] QueryError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnswerValue {
    Names(Vec<String>),
    Tags(Vec<String>),
    Locations(Vec<Vec3>),
    Distance(f64),
    Count(usize),
    ActionName(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Answer {
    pub value: AnswerValue,
    pub text: String,
    /// Sorted, deduplicated R_ids and T_ids supporting the answer.
    pub relevant_memids: Vec<Memid>,
}

/// Objects selected by a filter, with the triples that matched positively.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Selection {
    pub objects: BTreeSet<Memid>,
    pub matched_triples: BTreeSet<Memid>,
}

struct Ctx<'a> {
    first: &'a Snapshot,
    last: &'a Snapshot,
    n_snapshots: usize,
}

impl<'a> Ctx<'a> {
    fn new(snapshots: &'a [Snapshot]) -> Result<Self, OracleError> {
        let (first, last) = match (snapshots.first(), snapshots.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(OracleError::NotEnoughSnapshots(0)),
        };
        Ok(Self {
            first,
            last,
            n_snapshots: snapshots.len(),
        })
    }

    fn need_history(&self) -> Result<(), OracleError> {
        if self.n_snapshots < 2 {
            return Err(OracleError::NotEnoughSnapshots(self.n_snapshots));
        }
        Ok(())
    }

    fn domain(&self) -> BTreeSet<Memid> {
        self.last.reference_objects.iter().map(RefObject::memid).collect()
    }

    fn object(&self, memid: Memid) -> &'a RefObject {
        self.last.lookup(memid).expect("selected from the last snapshot")
    }

    fn owner(&self, frame: Frame) -> Result<&'a Entity, OracleError> {
        match frame {
            Frame::My => self.last.entity_of_kind(EntityKind::Player).ok_or(OracleError::MissingEntity("player")),
            Frame::Your => self.last.entity_of_kind(EntityKind::Agent).ok_or(OracleError::MissingEntity("agent")),
        }
    }

    fn named(&self, snapshot: &'a Snapshot, name: &str) -> Result<&'a RefObject, OracleError> {
        snapshot
            .find_by_name(name)
            .ok_or_else(|| OracleError::MissingObject(name.to_string()))
    }

    fn anchor(&self, anchor: &Anchor) -> Result<&'a RefObject, OracleError> {
        let entity = match anchor {
            Anchor::Me => self.owner(Frame::My)?,
            Anchor::You => self.owner(Frame::Your)?,
            Anchor::Named(n) => return self.named(self.last, n),
        };
        Ok(self.last.lookup(entity.memid).expect("entity came from this snapshot"))
    }

    /// Displacement from the first to the last snapshot of every animate
    /// object present at both ends.
    fn movements(&self) -> Result<Vec<(Memid, Vec3)>, OracleError> {
        self.need_history()?;
        Ok(self
            .last
            .reference_objects
            .iter()
            .filter_map(RefObject::as_entity)
            .filter_map(|e| {
                let before = self.first.lookup(e.memid).ok()?;
                Some((e.memid, e.pose.position() - before.position()))
            })
            .collect())
    }
}

/// The unique best-scoring candidate.
fn argmax(kind: ClauseType, scored: impl IntoIterator<Item = (Memid, f64)>) -> Result<Memid, OracleError> {
    let mut v: Vec<(Memid, f64)> = scored.into_iter().collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    match v.as_slice() {
        [] => Err(OracleError::Empty),
        [(_, s0), (_, s1), ..] if s0 - s1 < TIE_EPSILON => Err(OracleError::Tie(kind)),
        [(a, _), ..] => Ok(*a),
    }
}

fn compare(value: f64, comparator: Comparator, threshold: i32) -> bool {
    match comparator {
        Comparator::LessThan => value < threshold as f64,
        Comparator::GreaterThan => value > threshold as f64,
    }
}

/// Horizontal offset of `p` from `owner`, projected on `direction`.
fn side_score(owner: &Entity, direction: Direction, p: Vec3) -> f64 {
    (p - owner.pose.position()).horizontal().dot(direction.vector(owner.pose.yaw))
}

fn eval_clause(ctx: &Ctx<'_>, clause: &Clause) -> Result<Selection, OracleError> {
    if clause.class() == QueryClass::Temporal {
        ctx.need_history()?;
    }
    let last = ctx.last;
    let mut sel = Selection::default();
    let positions = || last.reference_objects.iter().map(|o| (o.memid(), o.position()));
    match &clause.kind {
        ClauseKind::Name { name } => {
            for t in last.triples.iter().filter(|t| t.predicate == Predicate::HasName && &t.object_text == name) {
                sel.objects.insert(t.subject);
                sel.matched_triples.insert(t.t_id);
            }
        }
        ClauseKind::Tag { value } => {
            for t in last.triples.iter().filter(|t| t.predicate.is_property() && &t.object_text == value) {
                sel.objects.insert(t.subject);
                sel.matched_triples.insert(t.t_id);
            }
        }
        ClauseKind::AbsoluteCardinal { axis, comparator, threshold } => {
            sel.objects = positions()
                .filter(|(_, p)| compare(p.axis(*axis), *comparator, *threshold))
                .map(|(m, _)| m)
                .collect();
        }
        ClauseKind::AbsoluteDistance { point, comparator, threshold } => {
            let q = Vec3::from_cell(*point);
            sel.objects = positions()
                .filter(|(_, p)| compare(p.distance(q), *comparator, *threshold))
                .map(|(m, _)| m)
                .collect();
        }
        ClauseKind::Direction { frame, direction } => {
            let owner = ctx.owner(*frame)?;
            sel.objects = positions()
                .filter(|(_, p)| side_score(owner, *direction, *p) > 0.0)
                .map(|(m, _)| m)
                .collect();
        }
        ClauseKind::TemporalCardinal { axis, change } => {
            let sign = match change {
                Change::Increased => 1.0,
                Change::Decreased => -1.0,
            };
            let moves = ctx.movements()?;
            let best = argmax(clause.clause_type(), moves.iter().map(|(m, d)| (*m, sign * d.axis(*axis))))?;
            sel.objects.insert(best);
        }
        ClauseKind::TemporalRelative { frame, direction } => {
            let owner = ctx.owner(*frame)?;
            let dir = direction.vector(owner.pose.yaw);
            let moves = ctx.movements()?;
            let best = argmax(clause.clause_type(), moves.iter().map(|(m, d)| (*m, d.dot(dir))))?;
            sel.objects.insert(best);
        }
        _ => return Err(QueryError::Invalid(format!("{} is not a filter clause", clause.clause_type())).into()),
    }
    if clause.negated {
        let domain = ctx.domain();
        return Ok(Selection {
            objects: domain.difference(&sel.objects).copied().collect(),
            matched_triples: BTreeSet::new(),
        });
    }
    Ok(sel)
}

fn eval_node(ctx: &Ctx<'_>, node: &QueryNode) -> Result<Selection, OracleError> {
    match node {
        QueryNode::Clause(c) => eval_clause(ctx, c),
        QueryNode::Conjunction { op, children } => {
            let a = eval_clause(ctx, &children[0])?;
            let b = eval_clause(ctx, &children[1])?;
            let objects: BTreeSet<Memid> = match op {
                Conjunction::And => a.objects.intersection(&b.objects).copied().collect(),
                Conjunction::Or => a.objects.union(&b.objects).copied().collect(),
            };
            Ok(Selection {
                objects,
                matched_triples: a.matched_triples.union(&b.matched_triples).copied().collect(),
            })
        }
    }
}

/// Evaluate the filter part of a query (a combinable clause or a
/// conjunction) to the selected memids in the last snapshot.
pub fn filter_set(node: &QueryNode, snapshots: &[Snapshot]) -> Result<BTreeSet<Memid>, OracleError> {
    Ok(eval_node(&Ctx::new(snapshots)?, node)?.objects)
}

fn describe(ctx: &Ctx<'_>, selection: Selection, return_type: ReturnType) -> Result<Answer, OracleError> {
    if selection.objects.is_empty() {
        return Err(OracleError::Empty);
    }
    let mut objects: Vec<&RefObject> = selection.objects.iter().map(|m| ctx.object(*m)).collect();
    // Unnamed objects contribute nothing to a name answer.
    if return_type == ReturnType::Name {
        objects.retain(|o| o.name().is_some());
    }
    let kept: BTreeSet<Memid> = objects.iter().map(|o| o.memid()).collect();
    let mut relevant = kept.clone();
    relevant.extend(
        ctx.last
            .triples
            .iter()
            .filter(|t| selection.matched_triples.contains(&t.t_id) && kept.contains(&t.subject))
            .map(|t| t.t_id),
    );
    let value = match return_type {
        ReturnType::Name => {
            let mut names: Vec<String> = objects.iter().filter_map(|o| o.name()).map(str::to_string).collect();
            names.sort();
            AnswerValue::Names(names)
        }
        ReturnType::Tag => {
            let tags: BTreeSet<String> = ctx
                .last
                .triples
                .iter()
                .filter(|t| selection.objects.contains(&t.subject))
                .map(|t| t.object_text.clone())
                .collect();
            AnswerValue::Tags(tags.into_iter().collect())
        }
        ReturnType::Location => AnswerValue::Locations(objects.iter().map(|o| o.position()).collect()),
        ReturnType::Count => AnswerValue::Count(objects.len()),
        ReturnType::Distance | ReturnType::ActionName => {
            return Err(QueryError::Invalid(format!("{return_type} does not describe objects")).into())
        }
    };
    finish(value, relevant)
}

fn finish(value: AnswerValue, relevant: BTreeSet<Memid>) -> Result<Answer, OracleError> {
    let empty = match &value {
        AnswerValue::Names(v) | AnswerValue::Tags(v) => v.is_empty(),
        AnswerValue::Locations(v) => v.is_empty(),
        AnswerValue::Count(n) => *n == 0,
        AnswerValue::Distance(_) | AnswerValue::ActionName(_) => false,
    };
    if empty {
        return Err(OracleError::Empty);
    }
    Ok(Answer {
        text: format_answer(&value),
        value,
        relevant_memids: relevant.into_iter().collect(),
    })
}

fn single(m: Memid) -> Selection {
    Selection {
        objects: [m].into_iter().collect(),
        matched_triples: BTreeSet::new(),
    }
}

/// Answer `form` against `snapshots` (oldest first). `action_log` is the
/// generator's record of agent commands.
pub fn execute(form: &QueryForm, snapshots: &[Snapshot], action_log: &[ActionRecord]) -> Result<Answer, OracleError> {
    form.validate()?;
    let ctx = Ctx::new(snapshots)?;
    let Some(clause) = form.standalone() else {
        let sel = eval_node(&ctx, &form.root)?;
        return describe(&ctx, sel, form.return_type);
    };
    if clause.class() == QueryClass::Temporal {
        ctx.need_history()?;
    }
    let t = clause.clause_type();
    match &clause.kind {
        ClauseKind::FarthestMoved {} => {
            let moves = ctx.movements()?;
            let best = argmax(t, moves.iter().map(|(m, d)| (*m, d.norm())))?;
            describe(&ctx, single(best), form.return_type)
        }
        ClauseKind::ClosestObject { anchor } => {
            let a = ctx.anchor(anchor)?;
            let pa = a.position();
            let scored = ctx
                .last
                .reference_objects
                .iter()
                .filter(|o| o.memid() != a.memid())
                .map(|o| (o.memid(), -o.position().distance(pa)));
            let best = argmax(t, scored)?;
            let mut ans = describe(&ctx, single(best), form.return_type)?;
            add_memids(&mut ans, [a.memid()]);
            Ok(ans)
        }
        ClauseKind::MaxDirection { frame, direction } => {
            let owner = ctx.owner(*frame)?;
            let scored = ctx
                .last
                .reference_objects
                .iter()
                .filter(|o| o.memid() != owner.memid)
                .map(|o| (o.memid(), side_score(owner, *direction, o.position())));
            let best = argmax(t, scored)?;
            let mut ans = describe(&ctx, single(best), form.return_type)?;
            add_memids(&mut ans, [owner.memid]);
            Ok(ans)
        }
        ClauseKind::LocationAtTime { name, time } => {
            let snap = match time {
                TimeRef::Beginning => ctx.first,
                TimeRef::Now => ctx.last,
            };
            let o = ctx.named(snap, name)?;
            finish(AnswerValue::Locations(vec![o.position()]), [o.memid()].into())
        }
        ClauseKind::Action {} => {
            let agent = ctx.owner(Frame::Your)?;
            let done = action_log
                .iter()
                .enumerate()
                .filter(|(_, a)| a.actor == agent.memid && a.start_step >= ctx.first.step && a.start_step < ctx.last.step)
                .max_by_key(|(i, a)| (a.start_step, *i))
                .map_or(NO_ACTION, |(_, a)| a.action.as_str());
            finish(AnswerValue::ActionName(done.to_string()), [agent.memid].into())
        }
        ClauseKind::ObjectTracking { name, to } => {
            let o = ctx.named(ctx.last, name)?;
            let player = ctx.owner(Frame::My)?;
            let p = Vec3::from_cell(*to) + (o.position() - player.pose.position());
            finish(AnswerValue::Locations(vec![p]), [o.memid(), player.memid].into())
        }
        ClauseKind::DistanceBetween { name, other } => {
            let o = ctx.named(ctx.last, name)?;
            let a = ctx.anchor(other)?;
            let d = o.position().distance(a.position());
            finish(AnswerValue::Distance(d), [o.memid(), a.memid()].into())
        }
        ClauseKind::DistanceFromPosition { frame, direction, steps } => {
            let owner = ctx.owner(*frame)?;
            let p = owner.pose.position() + direction.vector(owner.pose.yaw) * f64::from(*steps);
            finish(AnswerValue::Locations(vec![p]), [owner.memid].into())
        }
        _ => unreachable!("standalone() only returns standalone kinds"),
    }
}

fn add_memids(ans: &mut Answer, extra: impl IntoIterator<Item = Memid>) {
    let mut all: BTreeSet<Memid> = ans.relevant_memids.iter().copied().collect();
    all.extend(extra);
    ans.relevant_memids = all.into_iter().collect();
}
