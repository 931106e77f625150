use crate::model::{Duration, OverlapAnnotation, OverlapKind, OverlapRef, Response, ResponseLabel};

/// Classifies one cross-speaker pair, or `None` if it does not qualify.
///
/// The later-starting response is the overlapper; equal starts never qualify.
/// `Fully` requires the overlappee to outlast the overlapper; end-time ties
/// are `Partial`.
pub fn classify_pair(x: &Response, y: &Response, min_overlap: Duration) -> Option<OverlapAnnotation> {
    let start = x.start.max(y.start);
    let end = x.end.min(y.end);
    if end.saturating_sub(start) < min_overlap || x.start == y.start {
        return None;
    }
    let (overlapper, overlappee) = if x.start > y.start { (x, y) } else { (y, x) };
    let kind = if overlappee.end > overlapper.end { OverlapKind::Fully } else { OverlapKind::Partial };
    Some(OverlapAnnotation { overlapper: overlapper.id, overlappee: overlappee.id, kind, start, end })
}

/// Orders annotations by overlap start, then overlapper id.
pub fn sort_annotations(list: &mut [OverlapAnnotation]) {
    list.sort_by_key(|a| (a.start, a.overlapper, a.overlappee));
}

/// Finds every qualifying overlap between two speakers' responses.
///
/// Each side must be time-ordered and internally non-overlapping (true for
/// the output of segmentation), which allows a linear two-pointer sweep.
pub fn detect_overlaps(a: &[Response], b: &[Response], min_overlap: Duration) -> Vec<OverlapAnnotation> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        let (x, y) = (&a[i], &b[j]);
        if let Some(ann) = classify_pair(x, y, min_overlap) {
            out.push(ann);
        }
        match x.end.cmp(&y.end) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    sort_annotations(&mut out);
    out
}

/// Assigns Turn / SuccessfulInterjection / PendingBackchannel.
///
/// An overlapper takes its label from its earliest overlap; on an exact tie
/// the interjection wins. Overlappees and everything else stay `Turn`.
/// `responses[k].id` must equal `ResponseId(k)`.
pub fn assign_candidate_labels(responses: &mut [Response], overlaps: &[OverlapAnnotation]) {
    let mut chosen: Vec<Option<&OverlapAnnotation>> = vec![None; responses.len()];
    for ann in overlaps {
        let slot = &mut chosen[ann.overlapper.0 as usize];
        let better = match slot {
            None => true,
            Some(cur) => {
                (ann.start, ann.kind != OverlapKind::Partial) < (cur.start, cur.kind != OverlapKind::Partial)
            }
        };
        if better {
            *slot = Some(ann);
        }
    }
    for (r, ann) in responses.iter_mut().zip(chosen) {
        match ann {
            Some(a) => {
                r.label = match a.kind {
                    OverlapKind::Partial => ResponseLabel::SuccessfulInterjection,
                    OverlapKind::Fully => ResponseLabel::PendingBackchannel,
                };
                r.overlap = Some(OverlapRef { kind: a.kind, partner: a.overlappee });
            }
            None => {
                r.label = ResponseLabel::Turn;
                r.overlap = None;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ResponseId, SpeakerId, Timestamp, Token, WordToken};

    fn resp(id: u32, speaker: SpeakerId, s: f64, e: f64) -> Response {
        let w = WordToken::new("x", Timestamp::from_secs_f64(s), Timestamp::from_secs_f64(e), speaker);
        Response::from_tokens(ResponseId(id), speaker, vec![Token::word(&w)])
    }

    const MIN: Duration = Duration::from_millis(700);

    #[test]
    fn partial_overlap() {
        let a = [resp(0, SpeakerId::A, 0.0, 3.0)];
        let b = [resp(1, SpeakerId::B, 2.0, 6.0)];
        let o = detect_overlaps(&a, &b, MIN);
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].kind, OverlapKind::Partial);
        assert_eq!(o[0].overlapper, ResponseId(1));
    }

    #[test]
    fn fully_overlap() {
        let a = [resp(0, SpeakerId::A, 0.0, 5.0)];
        let b = [resp(1, SpeakerId::B, 2.0, 4.0)];
        let o = detect_overlaps(&a, &b, MIN);
        assert_eq!(o[0].kind, OverlapKind::Fully);
        assert_eq!(o[0].overlapper, ResponseId(1));
        assert_eq!(o[0].overlappee, ResponseId(0));
    }

    #[test]
    fn short_overlap_ignored() {
        let a = [resp(0, SpeakerId::A, 0.0, 5.0)];
        let b = [resp(1, SpeakerId::B, 4.5, 6.0)];
        assert!(detect_overlaps(&a, &b, MIN).is_empty());
    }

    #[test]
    fn boundary_cases() {
        // exactly the minimum qualifies
        let a = [resp(0, SpeakerId::A, 0.0, 5.0)];
        let b = [resp(1, SpeakerId::B, 4.3, 6.0)];
        assert_eq!(detect_overlaps(&a, &b, MIN).len(), 1);
        // end-time tie is partial
        let b = [resp(1, SpeakerId::B, 2.0, 5.0)];
        assert_eq!(detect_overlaps(&a, &b, MIN)[0].kind, OverlapKind::Partial);
        // equal starts never qualify
        let b = [resp(1, SpeakerId::B, 0.0, 2.0)];
        assert!(detect_overlaps(&a, &b, MIN).is_empty());
    }

    #[test]
    fn labels_follow_overlap_kind() {
        let mut rs = vec![
            resp(0, SpeakerId::A, 0.0, 10.0),
            resp(1, SpeakerId::B, 2.0, 3.0),
            resp(2, SpeakerId::B, 8.0, 12.0),
        ];
        let a: Vec<_> = rs.iter().filter(|r| r.speaker == SpeakerId::A).cloned().collect();
        let b: Vec<_> = rs.iter().filter(|r| r.speaker == SpeakerId::B).cloned().collect();
        let o = detect_overlaps(&a, &b, MIN);
        assign_candidate_labels(&mut rs, &o);
        assert_eq!(rs[0].label, ResponseLabel::Turn);
        assert_eq!(rs[1].label, ResponseLabel::PendingBackchannel);
        assert_eq!(rs[2].label, ResponseLabel::SuccessfulInterjection);
        assert_eq!(rs[2].overlap, Some(OverlapRef { kind: OverlapKind::Partial, partner: ResponseId(0) }));
    }

    #[test]
    fn earliest_overlap_wins_and_interjection_breaks_ties() {
        let mut rs = vec![resp(0, SpeakerId::A, 0.0, 1.0), resp(1, SpeakerId::B, 0.5, 2.0), resp(2, SpeakerId::A, 0.2, 3.0)];
        let t = |s: f64| Timestamp::from_secs_f64(s);
        let fully = OverlapAnnotation { overlapper: ResponseId(1), overlappee: ResponseId(2), kind: OverlapKind::Fully, start: t(0.5), end: t(2.0) };
        let partial = OverlapAnnotation { overlapper: ResponseId(1), overlappee: ResponseId(0), kind: OverlapKind::Partial, start: t(0.5), end: t(1.0) };
        let later = OverlapAnnotation { start: t(0.9), ..fully };
        assign_candidate_labels(&mut rs, &[fully, partial]);
        assert_eq!(rs[1].label, ResponseLabel::SuccessfulInterjection);
        assign_candidate_labels(&mut rs, &[later, partial]);
        assert_eq!(rs[1].label, ResponseLabel::SuccessfulInterjection);
        assign_candidate_labels(&mut rs, &[fully, OverlapAnnotation { start: t(0.6), ..partial }]);
        assert_eq!(rs[1].label, ResponseLabel::PendingBackchannel);
    }
}
