//! Literal, quadratic re-statements of the overlap rules, for cross-checking.

use crate::model::{Duration, OverlapAnnotation, OverlapKind, Response, ResponseLabel};

/// Checks every cross-speaker pair against the overlap definitions.
pub fn brute_force_overlaps(a: &[Response], b: &[Response], min_overlap: Duration) -> Vec<OverlapAnnotation> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            let lo = if x.start.micros() > y.start.micros() { x.start } else { y.start };
            let hi = if x.end.micros() < y.end.micros() { x.end } else { y.end };
            if hi.micros() - lo.micros() < min_overlap.micros() {
                continue;
            }
            let (overlapper, overlappee) = if x.start.micros() > y.start.micros() {
                (x, y)
            } else if y.start.micros() > x.start.micros() {
                (y, x)
            } else {
                continue;
            };
            // the overlappee "stops before the overlapper finishes" -> partial;
            // "continues after the overlapper stops" -> fully; ties -> partial
            let kind = if overlappee.end.micros() > overlapper.end.micros() {
                OverlapKind::Fully
            } else {
                OverlapKind::Partial
            };
            out.push(OverlapAnnotation { overlapper: overlapper.id, overlappee: overlappee.id, kind, start: lo, end: hi });
        }
    }
    out.sort_by(|p, q| {
        (p.start.micros(), p.overlapper.0, p.overlappee.0).cmp(&(q.start.micros(), q.overlapper.0, q.overlappee.0))
    });
    out
}

/// Candidate label of every response, derived pairwise from scratch.
pub fn brute_force_labels(responses: &[Response], min_overlap: Duration) -> Vec<ResponseLabel> {
    responses
        .iter()
        .map(|r| {
            let mut best: Option<(i64, u8)> = None;
            for other in responses.iter().filter(|o| o.speaker != r.speaker) {
                if other.start.micros() >= r.start.micros() {
                    continue;
                }
                let lo = r.start.micros();
                let hi = r.end.micros().min(other.end.micros());
                if hi - lo < min_overlap.micros() {
                    continue;
                }
                // rank 0 = interjection so it wins exact ties
                let rank = if other.end.micros() > r.end.micros() { 1 } else { 0 };
                if best.is_none_or(|b| (lo, rank) < b) {
                    best = Some((lo, rank));
                }
            }
            match best {
                None => ResponseLabel::Turn,
                Some((_, 0)) => ResponseLabel::SuccessfulInterjection,
                Some(_) => ResponseLabel::PendingBackchannel,
            }
        })
        .collect()
}
