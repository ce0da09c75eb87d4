//! Parser for the query text grammar, the inverse of [`render_text`].
//!
//! Parsing is strict: after a form is recovered it is rendered again and
//! the token sequences must agree, so only canonical text is accepted.

use super::render::render_text;
use super::{
    invalid, Anchor, Change, Clause, ClauseKind, Comparator, Conjunction, Frame, QueryError, QueryForm, QueryNode,
    ReturnType, TimeRef,
};
use crate::geometry::{Axis, Cell, Direction};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Token<'a> {
    pos: usize,
    text: &'a str,
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in text.char_indices() {
        let punct = matches!(ch, '(' | ')' | ',' | '?');
        if ch.is_whitespace() || punct {
            if let Some(s) = start.take() {
                out.push(Token { pos: s, text: &text[s..i] });
            }
            if punct {
                out.push(Token { pos: i, text: &text[i..i + 1] });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token { pos: s, text: &text[s..] });
    }
    out
}

struct Parser<'a> {
    toks: Vec<Token<'a>>,
    i: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, QueryError> {
        let position = self.toks.get(self.i).map_or(self.end, |t| t.pos);
        Err(QueryError::Parse {
            position,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&'a str> {
        self.toks.get(self.i).map(|t| t.text)
    }

    fn peek_at(&self, k: usize) -> Option<&'a str> {
        self.toks.get(self.i + k).map(|t| t.text)
    }

    fn next(&mut self) -> Result<&'a str, QueryError> {
        match self.peek() {
            Some(t) => {
                self.i += 1;
                Ok(t)
            }
            None => self.err("unexpected end of query"),
        }
    }

    fn eat(&mut self, word: &str) -> bool {
        if self.peek() == Some(word) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, words: &str) -> Result<(), QueryError> {
        for w in words.split(' ') {
            if !self.eat(w) {
                return self.err(format!("expected {w:?}"));
            }
        }
        Ok(())
    }

    fn word(&mut self, what: &str) -> Result<String, QueryError> {
        match self.peek() {
            Some(t) if t.bytes().all(|b| b.is_ascii_lowercase() || b == b'_') => {
                self.i += 1;
                Ok(t.to_string())
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn int(&mut self) -> Result<i32, QueryError> {
        match self.peek().and_then(|t| t.parse().ok()) {
            Some(v) => {
                self.i += 1;
                Ok(v)
            }
            None => self.err("expected an integer"),
        }
    }

    fn point(&mut self) -> Result<Cell, QueryError> {
        self.expect("(")?;
        let x = self.int()?;
        self.expect(",")?;
        let y = self.int()?;
        self.expect(",")?;
        let z = self.int()?;
        self.expect(")")?;
        Ok([x, y, z])
    }

    fn parse_word<T>(&mut self, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<T, QueryError> {
        match self.peek().and_then(&f) {
            Some(v) => {
                self.i += 1;
                Ok(v)
            }
            None => self.err(format!("expected {what}")),
        }
    }

    fn axis(&mut self) -> Result<Axis, QueryError> {
        self.parse_word("an axis", Axis::parse)
    }

    fn frame_direction(&mut self) -> Result<(Frame, Direction), QueryError> {
        let frame = self.parse_word("my or your", Frame::parse)?;
        let direction = self.parse_word("left or right", Direction::parse)?;
        Ok((frame, direction))
    }

    fn comparator(&mut self) -> Result<(bool, Comparator), QueryError> {
        let negated = self.eat("not");
        let c = match self.next()? {
            "less" => Comparator::LessThan,
            "greater" => Comparator::GreaterThan,
            _ => {
                self.i -= 1;
                return self.err("expected less or greater");
            }
        };
        self.expect("than")?;
        Ok((negated, c))
    }

    fn finish(&mut self) -> Result<(), QueryError> {
        self.expect("?")?;
        if self.peek().is_some() {
            return self.err("trailing text after '?'");
        }
        Ok(())
    }

    /// One combinable clause, or a standalone argmax phrase.
    fn clause(&mut self) -> Result<Clause, QueryError> {
        match self.peek() {
            Some("where") => {
                self.expect("where the")?;
                if self.eat("distance") {
                    self.expect("to")?;
                    let point = self.point()?;
                    self.expect("is")?;
                    let (negated, comparator) = self.comparator()?;
                    let threshold = self.int()?;
                    Ok(Clause {
                        kind: ClauseKind::AbsoluteDistance { point, comparator, threshold },
                        negated,
                    })
                } else {
                    let axis = self.axis()?;
                    self.expect("coordinate is")?;
                    let (negated, comparator) = self.comparator()?;
                    let threshold = self.int()?;
                    Ok(Clause {
                        kind: ClauseKind::AbsoluteCardinal { axis, comparator, threshold },
                        negated,
                    })
                }
            }
            Some("not") | Some("to") => {
                let negated = self.eat("not");
                self.expect("to")?;
                let (frame, direction) = self.frame_direction()?;
                Ok(Clause {
                    kind: ClauseKind::Direction { frame, direction },
                    negated,
                })
            }
            Some("that") => {
                self.i += 1;
                self.that_clause()
            }
            _ => self.err("expected a clause"),
        }
    }

    fn that_clause(&mut self) -> Result<Clause, QueryError> {
        let pos = self.i;
        match self.next()? {
            "have" => {
                self.expect("the name")?;
                Ok(Clause::new(ClauseKind::Name { name: self.word("a name")? }))
            }
            "has" => {
                self.expect("the property")?;
                Ok(Clause::new(ClauseKind::Tag { value: self.word("a property")? }))
            }
            "do" => {
                self.expect("not have the")?;
                match self.next()? {
                    "name" => Ok(Clause::negated(ClauseKind::Name { name: self.word("a name")? })),
                    "property" => Ok(Clause::negated(ClauseKind::Tag { value: self.word("a property")? })),
                    _ => {
                        self.i -= 1;
                        self.err("expected name or property")
                    }
                }
            }
            "increased" | "decreased" => {
                let change = if self.toks[pos].text == "increased" { Change::Increased } else { Change::Decreased };
                let axis = self.axis()?;
                self.expect("the most")?;
                Ok(Clause::new(ClauseKind::TemporalCardinal { axis, change }))
            }
            "did" => {
                self.expect("not")?;
                match self.next()? {
                    w @ ("increase" | "decrease") => {
                        let change = if w == "increase" { Change::Increased } else { Change::Decreased };
                        let axis = self.axis()?;
                        self.expect("the most")?;
                        Ok(Clause::negated(ClauseKind::TemporalCardinal { axis, change }))
                    }
                    "move" => {
                        self.expect("to")?;
                        let (frame, direction) = self.frame_direction()?;
                        self.expect("the most")?;
                        Ok(Clause::negated(ClauseKind::TemporalRelative { frame, direction }))
                    }
                    _ => {
                        self.i -= 1;
                        self.err("expected increase, decrease or move")
                    }
                }
            }
            "moved" => {
                if self.eat("the") {
                    self.expect("farthest")?;
                    return Ok(Clause::new(ClauseKind::FarthestMoved {}));
                }
                self.expect("to")?;
                let (frame, direction) = self.frame_direction()?;
                self.expect("the most")?;
                Ok(Clause::new(ClauseKind::TemporalRelative { frame, direction }))
            }
            "is" => {
                if self.eat("closest") {
                    self.expect("to")?;
                    let anchor = Anchor::parse(&self.word("me, you or a name")?);
                    return Ok(Clause::new(ClauseKind::ClosestObject { anchor }));
                }
                self.expect("the most to")?;
                let (frame, direction) = self.frame_direction()?;
                Ok(Clause::new(ClauseKind::MaxDirection { frame, direction }))
            }
            _ => {
                self.i = pos;
                self.err("unrecognized clause")
            }
        }
    }

    fn head(&mut self) -> Result<ReturnType, QueryError> {
        self.expect("what")?;
        let heads: [(&str, ReturnType); 7] = [
            ("is the name of the object", ReturnType::Name),
            ("are the properties of the object", ReturnType::Tag),
            ("is the location of the object", ReturnType::Location),
            ("are the names of the objects", ReturnType::Name),
            ("are the properties of the objects", ReturnType::Tag),
            ("are the locations of the objects", ReturnType::Location),
            ("is the count of the objects", ReturnType::Count),
        ];
        // Longest match first so "object" does not shadow "objects".
        let mut best: Option<(usize, ReturnType)> = None;
        for (words, rt) in heads {
            let n = words.split(' ').count();
            let matches = words.split(' ').enumerate().all(|(k, w)| self.peek_at(k) == Some(w));
            if matches && best.is_none_or(|(m, _)| n > m) {
                best = Some((n, rt));
            }
        }
        match best {
            Some((n, rt)) => {
                self.i += n;
                Ok(rt)
            }
            None => self.err("unrecognized question head"),
        }
    }

    fn query(&mut self) -> Result<QueryForm, QueryError> {
        let single = |kind, rt| QueryForm::single(Clause::new(kind), rt);
        match (self.peek(), self.peek_at(1), self.peek_at(2)) {
            (Some("what"), Some("did"), _) => {
                self.expect("what did you do")?;
                self.finish()?;
                return Ok(single(ClauseKind::Action {}, ReturnType::ActionName));
            }
            (Some("what"), Some("was"), _) => {
                self.expect("what was the location of")?;
                let name = self.word("a name")?;
                self.expect("at the beginning")?;
                self.finish()?;
                return Ok(single(ClauseKind::LocationAtTime { name, time: TimeRef::Beginning }, ReturnType::Location));
            }
            (Some("what"), Some("is"), Some("the"))
                if self.peek_at(3) == Some("location") && self.peek_at(4) == Some("of") && self.peek_at(5) != Some("the") =>
            {
                self.expect("what is the location of")?;
                let name = self.word("a name")?;
                self.expect("now")?;
                self.finish()?;
                return Ok(single(ClauseKind::LocationAtTime { name, time: TimeRef::Now }, ReturnType::Location));
            }
            (Some("what"), Some("is"), Some("the"))
                if self.peek_at(3) == Some("location") && self.peek_at(4).is_some_and(|t| t.parse::<i64>().is_ok()) =>
            {
                self.expect("what is the location")?;
                let steps = self.int()?;
                let steps = u32::try_from(steps).or_else(|_| self.err("steps must be positive"))?;
                if !(self.eat("steps") || self.eat("step")) {
                    return self.err("expected steps");
                }
                self.expect("to")?;
                let (frame, direction) = self.frame_direction()?;
                self.finish()?;
                return Ok(single(
                    ClauseKind::DistanceFromPosition { frame, direction, steps },
                    ReturnType::Location,
                ));
            }
            (Some("where"), Some("would"), _) => {
                self.expect("where would")?;
                let name = self.word("a name")?;
                self.expect("be if i moved to")?;
                let to = self.point()?;
                self.finish()?;
                return Ok(single(ClauseKind::ObjectTracking { name, to }, ReturnType::Location));
            }
            (Some("how"), _, _) => {
                self.expect("how far is")?;
                let name = self.word("a name")?;
                self.expect("from")?;
                let other = Anchor::parse(&self.word("me, you or a name")?);
                self.finish()?;
                return Ok(single(ClauseKind::DistanceBetween { name, other }, ReturnType::Distance));
            }
            _ => {}
        }
        let return_type = self.head()?;
        let first = self.clause()?;
        let op = if self.eat("and") {
            Some(Conjunction::And)
        } else if self.eat("or") {
            Some(Conjunction::Or)
        } else {
            None
        };
        let root = match op {
            None => QueryNode::Clause(first),
            Some(op) => QueryNode::Conjunction {
                op,
                children: [first, self.clause()?],
            },
        };
        self.finish()?;
        Ok(QueryForm { root, return_type })
    }
}

/// Parse canonical query text back into its logical form.
pub fn parse_form(text: &str) -> Result<QueryForm, QueryError> {
    let toks = tokenize(text);
    let mut p = Parser {
        toks: toks.clone(),
        i: 0,
        end: text.len(),
    };
    let form = p.query()?;
    form.validate()?;
    let rendered = render_text(&form);
    let canon = tokenize(&rendered);
    if let Some(k) = (0..toks.len().max(canon.len())).find(|&k| toks.get(k).map(|t| t.text) != canon.get(k).map(|t| t.text)) {
        let position = toks.get(k).map_or(text.len(), |t| t.pos);
        let expected = canon.get(k).map_or("end of query", |t| t.text);
        return Err(QueryError::Parse {
            position,
            message: format!("non-canonical wording, expected {expected:?}"),
        });
    }
    if form.clauses().iter().any(|c| c.kind.names().contains(&"the")) {
        return Err(invalid("\"the\" is not a name"));
    }
    Ok(form)
}
