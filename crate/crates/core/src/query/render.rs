//! Templated English for logical forms.

use super::{Anchor, Change, Clause, ClauseKind, ClauseType, Comparator, Conjunction, QueryForm, QueryNode, ReturnType, TimeRef};

fn head(return_type: ReturnType, singular: bool) -> &'static str {
    match (return_type, singular) {
        (ReturnType::Name, true) => "what is the name of the object",
        (ReturnType::Tag, true) => "what are the properties of the object",
        (ReturnType::Location, true) => "what is the location of the object",
        (ReturnType::Name, false) => "what are the names of the objects",
        (ReturnType::Tag, false) => "what are the properties of the objects",
        (ReturnType::Location, false) => "what are the locations of the objects",
        (ReturnType::Count, _) => "what is the count of the objects",
        (ReturnType::Distance | ReturnType::ActionName, _) => "what is the value",
    }
}

/// Whether the head uses the singular "the object" wording.
pub(super) fn singular_head(form: &QueryForm) -> bool {
    match &form.root {
        QueryNode::Clause(c) => {
            let t = c.clause_type();
            t.is_standalone() || (!c.negated && matches!(t, ClauseType::TemporalCardinal | ClauseType::TemporalRelative))
        }
        QueryNode::Conjunction { .. } => false,
    }
}

fn not(negated: bool) -> &'static str {
    if negated {
        "not "
    } else {
        ""
    }
}

fn comparator_words(c: Comparator) -> &'static str {
    match c {
        Comparator::LessThan => "less than",
        Comparator::GreaterThan => "greater than",
    }
}

fn anchor_word(a: &Anchor) -> &str {
    a.as_str()
}

fn phrase(c: &Clause) -> String {
    let n = c.negated;
    match &c.kind {
        ClauseKind::Name { name } if n => format!("that do not have the name {name}"),
        ClauseKind::Name { name } => format!("that have the name {name}"),
        ClauseKind::Tag { value } if n => format!("that do not have the property {value}"),
        ClauseKind::Tag { value } => format!("that has the property {value}"),
        ClauseKind::AbsoluteCardinal { axis, comparator, threshold } => format!(
            "where the {axis} coordinate is {}{} {threshold}",
            not(n),
            comparator_words(*comparator)
        ),
        ClauseKind::AbsoluteDistance { point, comparator, threshold } => format!(
            "where the distance to ({}, {}, {}) is {}{} {threshold}",
            point[0],
            point[1],
            point[2],
            not(n),
            comparator_words(*comparator)
        ),
        ClauseKind::Direction { frame, direction } => format!("{}to {frame} {direction}", not(n)),
        ClauseKind::TemporalCardinal { axis, change } => match (change, n) {
            (Change::Increased, false) => format!("that increased {axis} the most"),
            (Change::Decreased, false) => format!("that decreased {axis} the most"),
            (Change::Increased, true) => format!("that did not increase {axis} the most"),
            (Change::Decreased, true) => format!("that did not decrease {axis} the most"),
        },
        ClauseKind::TemporalRelative { frame, direction } if n => {
            format!("that did not move to {frame} {direction} the most")
        }
        ClauseKind::TemporalRelative { frame, direction } => format!("that moved to {frame} {direction} the most"),
        ClauseKind::FarthestMoved {} => "that moved the farthest".to_string(),
        ClauseKind::ClosestObject { anchor } => format!("that is closest to {}", anchor_word(anchor)),
        ClauseKind::MaxDirection { frame, direction } => format!("that is the most to {frame} {direction}"),
        ClauseKind::LocationAtTime { .. }
        | ClauseKind::Action {}
        | ClauseKind::ObjectTracking { .. }
        | ClauseKind::DistanceBetween { .. }
        | ClauseKind::DistanceFromPosition { .. } => unreachable!("full-sentence kinds have no phrase"),
    }
}

/// Render a logical form as query text. Total over valid forms.
pub fn render_text(form: &QueryForm) -> String {
    if let QueryNode::Clause(c) = &form.root {
        match &c.kind {
            ClauseKind::LocationAtTime { name, time: TimeRef::Beginning } => {
                return format!("what was the location of {name} at the beginning?")
            }
            ClauseKind::LocationAtTime { name, time: TimeRef::Now } => {
                return format!("what is the location of {name} now?")
            }
            ClauseKind::Action {} => return "what did you do?".to_string(),
            ClauseKind::ObjectTracking { name, to } => {
                return format!("where would {name} be if i moved to ({},{},{})?", to[0], to[1], to[2])
            }
            ClauseKind::DistanceBetween { name, other } => {
                return format!("how far is {name} from {}?", anchor_word(other))
            }
            ClauseKind::DistanceFromPosition { frame, direction, steps } => {
                let unit = if *steps == 1 { "step" } else { "steps" };
                return format!("what is the location {steps} {unit} to {frame} {direction}?");
            }
            _ => {}
        }
    }
    let body = match &form.root {
        QueryNode::Clause(c) => phrase(c),
        QueryNode::Conjunction { op, children } => {
            let op = match op {
                Conjunction::And => "and",
                Conjunction::Or => "or",
            };
            format!("{} {op} {}", phrase(&children[0]), phrase(&children[1]))
        }
    };
    format!("{} {body}?", head(form.return_type, singular_head(form)))
}
