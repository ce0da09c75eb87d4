//! Query logical forms.
//!
//! A query is one clause, or two combinable clauses joined by `and`/`or`,
//! plus a return type. Standalone clause kinds (the argmax selectors and
//! scalar questions) always appear alone and are never negated.
//!
//! Logical forms serialize to JSON objects with sorted keys:
//!
//! ```text
//! {"return_type": "name", "root": {"class": "property", "kind": "tag", "negated": false, "args": {"value": "brown"}}}
//! {"return_type": "count", "root": {"op": "and", "children": [<clause>, <clause>]}}
//! ```

mod parse;
mod render;
mod sample;

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

use crate::geometry::{Axis, Cell, Direction};

pub use parse::parse_form;
pub use render::render_text;
pub use sample::{
    choose_class, random_form, sample_form_of_kind, sample_query, QueryParams, SampledQuery, Vocabulary,
};

#[derive(Debug, Error, PartialEq)]
pub enum QueryError {
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("invalid query form: {0}")]
    Invalid(String),
    #[error("logical form json: {0}")]
    Json(String),
    #[error("no answerable query after {attempts} attempts")]
    Unanswerable { attempts: usize },
}

fn invalid(msg: impl Into<String>) -> QueryError {
    QueryError::Invalid(msg.into())
}

macro_rules! word_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }

            pub fn parse(s: &str) -> Option<Self> {
                Self::ALL.iter().copied().find(|v| v.as_str() == s)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

word_enum!(QueryClass {
    Property => "property",
    Temporal => "temporal",
    Geometric => "geometric",
});

word_enum!(
    /// Clause kinds, grouped by query class.
    ClauseType {
        Name => "name",
        Tag => "tag",
        AbsoluteCardinal => "absolute_cardinal",
        TemporalCardinal => "temporal_cardinal",
        TemporalRelative => "temporal_relative",
        FarthestMoved => "farthest_moved",
        LocationAtTime => "location_at_time",
        Action => "action",
        ObjectTracking => "object_tracking",
        AbsoluteDistance => "absolute_distance",
        Direction => "direction",
        ClosestObject => "closest_object",
        MaxDirection => "max_direction",
        DistanceBetween => "distance_between",
        DistanceFromPosition => "distance_from_position",
    }
);

word_enum!(ReturnType {
    Name => "name",
    Tag => "tag",
    Location => "location",
    Distance => "distance",
    Count => "count",
    ActionName => "action_name",
});

word_enum!(Comparator {
    LessThan => "less_than",
    GreaterThan => "greater_than",
});

word_enum!(Change {
    Increased => "increased",
    Decreased => "decreased",
});

word_enum!(
    /// Whose egocentric frame a direction is measured in: `my` is the
    /// player (the speaker), `your` is the agent.
    Frame {
        My => "my",
        Your => "your",
    }
);

word_enum!(TimeRef {
    Beginning => "beginning",
    Now => "now",
});

word_enum!(Conjunction {
    And => "and",
    Or => "or",
});

impl ClauseType {
    pub fn class(self) -> QueryClass {
        use ClauseType as C;
        match self {
            C::Name | C::Tag | C::AbsoluteCardinal => QueryClass::Property,
            C::TemporalCardinal
            | C::TemporalRelative
            | C::FarthestMoved
            | C::LocationAtTime
            | C::Action
            | C::ObjectTracking => QueryClass::Temporal,
            C::AbsoluteDistance
            | C::Direction
            | C::ClosestObject
            | C::MaxDirection
            | C::DistanceBetween
            | C::DistanceFromPosition => QueryClass::Geometric,
        }
    }

    /// Kinds that must appear alone.
    pub fn is_standalone(self) -> bool {
        use ClauseType as C;
        !matches!(
            self,
            C::Name | C::Tag | C::AbsoluteCardinal | C::TemporalCardinal | C::TemporalRelative | C::AbsoluteDistance | C::Direction
        )
    }

    /// Filter kinds whose positive form selects at most one object.
    pub fn selects_one(self) -> bool {
        matches!(self, ClauseType::Name | ClauseType::TemporalCardinal | ClauseType::TemporalRelative)
    }

    pub fn of_class(class: QueryClass) -> impl Iterator<Item = ClauseType> {
        ClauseType::ALL.iter().copied().filter(move |k| k.class() == class)
    }

    /// Return types a root made of this standalone kind may ask for.
    pub fn standalone_returns(self) -> &'static [ReturnType] {
        use ReturnType as R;
        match self {
            ClauseType::FarthestMoved => &[R::Name, R::Tag, R::Location],
            ClauseType::LocationAtTime | ClauseType::ObjectTracking | ClauseType::DistanceFromPosition => &[R::Location],
            ClauseType::Action => &[R::ActionName],
            ClauseType::ClosestObject | ClauseType::MaxDirection => &[R::Name, R::Tag],
            ClauseType::DistanceBetween => &[R::Distance],
            _ => &[],
        }
    }
}

impl QueryClass {
    pub fn combinable_kinds(self) -> impl Iterator<Item = ClauseType> {
        ClauseType::of_class(self).filter(|k| !k.is_standalone())
    }
}

/// Reference point of a closest-object or distance question.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Anchor {
    /// The player.
    Me,
    /// The agent.
    You,
    Named(String),
}

impl Anchor {
    pub fn as_str(&self) -> &str {
        match self {
            Anchor::Me => "me",
            Anchor::You => "you",
            Anchor::Named(n) => n,
        }
    }

    pub fn parse(s: &str) -> Self {
        match s {
            "me" => Anchor::Me,
            "you" => Anchor::You,
            other => Anchor::Named(other.to_string()),
        }
    }
}

impl Serialize for Anchor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Anchor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Anchor::parse(&String::deserialize(d)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "args", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClauseKind {
    Name { name: String },
    Tag { value: String },
    AbsoluteCardinal { axis: Axis, comparator: Comparator, threshold: i32 },
    TemporalCardinal { axis: Axis, change: Change },
    TemporalRelative { frame: Frame, direction: Direction },
    FarthestMoved {},
    LocationAtTime { name: String, time: TimeRef },
    Action {},
    ObjectTracking { name: String, to: Cell },
    AbsoluteDistance { point: Cell, comparator: Comparator, threshold: i32 },
    Direction { frame: Frame, direction: Direction },
    ClosestObject { anchor: Anchor },
    MaxDirection { frame: Frame, direction: Direction },
    DistanceBetween { name: String, other: Anchor },
    DistanceFromPosition { frame: Frame, direction: Direction, steps: u32 },
}

impl ClauseKind {
    pub fn clause_type(&self) -> ClauseType {
        use ClauseKind as K;
        use ClauseType as C;
        match self {
            K::Name { .. } => C::Name,
            K::Tag { .. } => C::Tag,
            K::AbsoluteCardinal { .. } => C::AbsoluteCardinal,
            K::TemporalCardinal { .. } => C::TemporalCardinal,
            K::TemporalRelative { .. } => C::TemporalRelative,
            K::FarthestMoved {} => C::FarthestMoved,
            K::LocationAtTime { .. } => C::LocationAtTime,
            K::Action {} => C::Action,
            K::ObjectTracking { .. } => C::ObjectTracking,
            K::AbsoluteDistance { .. } => C::AbsoluteDistance,
            K::Direction { .. } => C::Direction,
            K::ClosestObject { .. } => C::ClosestObject,
            K::MaxDirection { .. } => C::MaxDirection,
            K::DistanceBetween { .. } => C::DistanceBetween,
            K::DistanceFromPosition { .. } => C::DistanceFromPosition,
        }
    }

    /// Object names mentioned in the arguments.
    pub fn names(&self) -> Vec<&str> {
        use ClauseKind as K;
        match self {
            K::Name { name } | K::LocationAtTime { name, .. } | K::ObjectTracking { name, .. } => vec![name],
            K::ClosestObject { anchor: Anchor::Named(n) } => vec![n],
            K::DistanceBetween { name, other } => match other {
                Anchor::Named(o) => vec![name, o],
                _ => vec![name],
            },
            _ => vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub kind: ClauseKind,
    pub negated: bool,
}

impl Clause {
    pub fn new(kind: ClauseKind) -> Self {
        Self { kind, negated: false }
    }

    pub fn negated(kind: ClauseKind) -> Self {
        Self { kind, negated: true }
    }

    pub fn clause_type(&self) -> ClauseType {
        self.kind.clause_type()
    }

    pub fn class(&self) -> QueryClass {
        self.clause_type().class()
    }

    fn to_value(&self) -> Value {
        let mut v = serde_json::to_value(&self.kind).expect("clause kinds serialize");
        let obj = v.as_object_mut().expect("adjacently tagged enum is an object");
        obj.insert("class".into(), Value::from(self.class().as_str()));
        obj.insert("negated".into(), Value::from(self.negated));
        v
    }

    fn from_value(mut v: Value) -> Result<Self, QueryError> {
        let obj = v.as_object_mut().ok_or_else(|| QueryError::Json("clause must be an object".into()))?;
        let class = obj.remove("class");
        let negated = match obj.remove("negated") {
            Some(Value::Bool(b)) => b,
            _ => return Err(QueryError::Json("clause needs a boolean `negated`".into())),
        };
        let kind: ClauseKind = serde_json::from_value(v).map_err(|e| QueryError::Json(e.to_string()))?;
        let expected = kind.clause_type().class().as_str();
        if class.as_ref().and_then(Value::as_str) != Some(expected) {
            return Err(QueryError::Json(format!("clause `class` must be {expected:?}")));
        }
        Ok(Clause { kind, negated })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueryNode {
    Clause(Clause),
    Conjunction { op: Conjunction, children: [Clause; 2] },
}

impl QueryNode {
    pub fn clauses(&self) -> &[Clause] {
        match self {
            QueryNode::Clause(c) => std::slice::from_ref(c),
            QueryNode::Conjunction { children, .. } => children,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryForm {
    pub root: QueryNode,
    pub return_type: ReturnType,
}

impl QueryForm {
    pub fn single(clause: Clause, return_type: ReturnType) -> Self {
        Self {
            root: QueryNode::Clause(clause),
            return_type,
        }
    }

    pub fn clauses(&self) -> &[Clause] {
        self.root.clauses()
    }

    pub fn class(&self) -> QueryClass {
        self.clauses()[0].class()
    }

    /// The standalone clause if the root is one.
    pub fn standalone(&self) -> Option<&Clause> {
        match &self.root {
            QueryNode::Clause(c) if c.clause_type().is_standalone() => Some(c),
            _ => None,
        }
    }

    /// True when the filter can select at most one object, which rules out
    /// count questions and calls for a singular head.
    pub fn selects_one(&self) -> bool {
        let one = |c: &Clause| !c.negated && c.clause_type().selects_one();
        match &self.root {
            QueryNode::Clause(c) => c.clause_type().is_standalone() || one(c),
            QueryNode::Conjunction { op: Conjunction::And, children } => children.iter().any(one),
            QueryNode::Conjunction { op: Conjunction::Or, .. } => false,
        }
    }

    /// Return types this root may be asked with.
    pub fn allowed_returns(&self) -> Vec<ReturnType> {
        if let Some(c) = self.standalone() {
            return c.clause_type().standalone_returns().to_vec();
        }
        let mut r = vec![ReturnType::Name, ReturnType::Tag, ReturnType::Location];
        if !self.selects_one() {
            r.push(ReturnType::Count);
        }
        r
    }

    pub fn validate(&self) -> Result<(), QueryError> {
        for c in self.clauses() {
            let t = c.clause_type();
            if t.is_standalone() && c.negated {
                return Err(invalid(format!("{t} clauses cannot be negated")));
            }
            validate_args(&c.kind)?;
        }
        if let QueryNode::Conjunction { children, .. } = &self.root {
            for c in children {
                if c.clause_type().is_standalone() {
                    return Err(invalid(format!("{} clauses cannot be combined", c.clause_type())));
                }
            }
            if children[0].class() != children[1].class() {
                return Err(invalid("conjoined clauses must share a query class"));
            }
        }
        if !self.allowed_returns().contains(&self.return_type) {
            return Err(invalid(format!(
                "return type {} is not allowed for this query",
                self.return_type
            )));
        }
        Ok(())
    }

    pub fn to_json_value(&self) -> Value {
        let root = match &self.root {
            QueryNode::Clause(c) => c.to_value(),
            QueryNode::Conjunction { op, children } => serde_json::json!({
                "op": op.as_str(),
                "children": [children[0].to_value(), children[1].to_value()],
            }),
        };
        serde_json::json!({ "return_type": self.return_type.as_str(), "root": root })
    }

    /// Canonical JSON text with sorted keys.
    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    pub fn from_json_value(v: Value) -> Result<Self, QueryError> {
        let Value::Object(mut obj) = v else {
            return Err(QueryError::Json("logical form must be an object".into()));
        };
        let return_type = obj
            .remove("return_type")
            .as_ref()
            .and_then(Value::as_str)
            .and_then(ReturnType::parse)
            .ok_or_else(|| QueryError::Json("missing or unknown `return_type`".into()))?;
        let root = obj.remove("root").ok_or_else(|| QueryError::Json("missing `root`".into()))?;
        if let Some(extra) = obj.keys().next() {
            return Err(QueryError::Json(format!("unknown field `{extra}`")));
        }
        let root = match root {
            Value::Object(mut node) if node.contains_key("op") => {
                let op = node
                    .remove("op")
                    .as_ref()
                    .and_then(Value::as_str)
                    .and_then(Conjunction::parse)
                    .ok_or_else(|| QueryError::Json("unknown `op`".into()))?;
                let children = match node.remove("children") {
                    Some(Value::Array(c)) if c.len() == 2 => c,
                    _ => return Err(QueryError::Json("`children` must hold two clauses".into())),
                };
                let mut it = children.into_iter().map(Clause::from_value);
                let a = it.next().expect("two children")?;
                let b = it.next().expect("two children")?;
                QueryNode::Conjunction { op, children: [a, b] }
            }
            other => QueryNode::Clause(Clause::from_value(other)?),
        };
        let form = QueryForm { root, return_type };
        form.validate()?;
        Ok(form)
    }

    pub fn from_json(text: &str) -> Result<Self, QueryError> {
        let v: Value = serde_json::from_str(text).map_err(|e| QueryError::Json(e.to_string()))?;
        Self::from_json_value(v)
    }
}

fn validate_args(kind: &ClauseKind) -> Result<(), QueryError> {
    for name in kind.names() {
        if name.is_empty() || !name.bytes().all(|b| b.is_ascii_lowercase() || b == b'_') {
            return Err(invalid(format!("bad object name {name:?}")));
        }
    }
    match kind {
        ClauseKind::Tag { value } if value.is_empty() || value.contains(char::is_whitespace) => {
            Err(invalid(format!("bad property {value:?}")))
        }
        ClauseKind::DistanceFromPosition { steps: 0, .. } => Err(invalid("steps must be at least 1")),
        ClauseKind::DistanceBetween { name, other: Anchor::Named(o) } if name == o => {
            Err(invalid("distance between an object and itself"))
        }
        _ => Ok(()),
    }
}

impl fmt::Display for QueryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_text(self))
    }
}

impl Serialize for QueryForm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json_value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for QueryForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        QueryForm::from_json_value(Value::deserialize(d)?).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_partition() {
        assert_eq!(ClauseType::ALL.len(), 15);
        assert_eq!(ClauseType::of_class(QueryClass::Property).count(), 3);
        assert_eq!(ClauseType::of_class(QueryClass::Temporal).count(), 6);
        assert_eq!(ClauseType::of_class(QueryClass::Geometric).count(), 6);
        for class in QueryClass::ALL {
            assert!(class.combinable_kinds().count() >= 2);
        }
    }

    #[test]
    fn json_has_stable_sorted_keys() {
        let f = QueryForm::single(Clause::new(ClauseKind::Tag { value: "brown".into() }), ReturnType::Name);
        assert_eq!(
            f.to_json(),
            r#"{"return_type":"name","root":{"args":{"value":"brown"},"class":"property","kind":"tag","negated":false}}"#
        );
        assert_eq!(QueryForm::from_json(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn compatibility_rules() {
        let action = QueryForm::single(Clause::new(ClauseKind::Action {}), ReturnType::Count);
        assert!(action.validate().is_err());
        let closest = QueryForm::single(Clause::new(ClauseKind::ClosestObject { anchor: Anchor::Me }), ReturnType::Location);
        assert!(closest.validate().is_err());
        let name_count = QueryForm::single(Clause::new(ClauseKind::Name { name: "bob".into() }), ReturnType::Count);
        assert!(name_count.validate().is_err());
        let neg_count = QueryForm::single(Clause::negated(ClauseKind::Name { name: "bob".into() }), ReturnType::Count);
        neg_count.validate().unwrap();
        let neg_standalone = QueryForm::single(Clause::negated(ClauseKind::FarthestMoved {}), ReturnType::Name);
        assert!(neg_standalone.validate().is_err());
        let mixed = QueryForm {
            root: QueryNode::Conjunction {
                op: Conjunction::And,
                children: [
                    Clause::new(ClauseKind::Tag { value: "brown".into() }),
                    Clause::new(ClauseKind::Direction { frame: Frame::My, direction: Direction::Left }),
                ],
            },
            return_type: ReturnType::Name,
        };
        assert!(mixed.validate().is_err());
    }

    #[test]
    fn json_rejects_wrong_class() {
        let text = r#"{"return_type":"name","root":{"args":{"value":"brown"},"class":"temporal","kind":"tag","negated":false}}"#;
        assert!(matches!(QueryForm::from_json(text), Err(QueryError::Json(_))));
    }
}
