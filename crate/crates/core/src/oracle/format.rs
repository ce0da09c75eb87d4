//! Answer text formatting.

use super::AnswerValue;
use crate::geometry::Vec3;

/// `(x, y, z)` with each coordinate rounded half away from zero.
pub fn format_location(p: Vec3) -> String {
    let r = |v: f64| v.round() as i64;
    format!("({}, {}, {})", r(p.x), r(p.y), r(p.z))
}

/// One decimal place, halves rounded up.
pub fn format_distance(d: f64) -> String {
    format!("{:.1}", (d * 10.0 + 0.5).floor() / 10.0)
}

/// Render an answer value. Multi-item answers are sorted and joined with
/// `", "`.
pub fn format_answer(value: &AnswerValue) -> String {
    match value {
        AnswerValue::Names(v) | AnswerValue::Tags(v) => {
            let mut v = v.clone();
            v.sort();
            v.join(", ")
        }
        AnswerValue::Locations(ps) => {
            let mut v: Vec<String> = ps.iter().map(|p| format_location(*p)).collect();
            v.sort();
            v.join(", ")
        }
        AnswerValue::Distance(d) => format_distance(*d),
        AnswerValue::Count(n) => n.to_string(),
        AnswerValue::ActionName(a) => a.clone(),
    }
}
