use crate::model::{LaughEvent, LaughMarker, Timestamp, Token, WordToken};

fn intersects(w: &WordToken, start: Timestamp, end: Timestamp) -> bool {
    if w.start == w.end {
        start <= w.start && w.start < end
    } else {
        w.start < end && start < w.end
    }
}

/// Unions overlapping or touching laugh events.
fn merge_laughs(laughs: &[LaughEvent]) -> Vec<(Timestamp, Timestamp)> {
    let mut sorted: Vec<_> = laughs.iter().map(|l| (l.start, l.end)).collect();
    sorted.sort();
    let mut out: Vec<(Timestamp, Timestamp)> = Vec::with_capacity(sorted.len());
    for (s, e) in sorted {
        match out.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => out.push((s, e)),
        }
    }
    out
}

/// Interleaves laugh tokens with one speaker's words.
///
/// A laugh touching no word becomes a standalone `[Laughter]` token spanning
/// the laugh. Otherwise a `[StartLaugh]` point marker goes immediately before
/// the first intersecting word (at its start time) and an `[EndLaugh]` marker
/// immediately after the last one (at its end time). Overlapping laughs are
/// merged first.
pub fn integrate_laughs(words: &[WordToken], laughs: &[LaughEvent]) -> Vec<Token> {
    let Some(speaker) = words.first().map(|w| w.speaker).or(laughs.first().map(|l| l.speaker)) else {
        return Vec::new();
    };
    let merged = merge_laughs(laughs);

    let mut opens = vec![0usize; words.len()];
    let mut closes = vec![0usize; words.len()];
    let mut standalone: Vec<(Timestamp, Timestamp)> = Vec::new();
    // words are sorted; `lo` trails the first word that can intersect
    let mut lo = 0usize;
    for &(ls, le) in &merged {
        while lo < words.len() && words[lo].end < ls {
            lo += 1;
        }
        let mut first = None;
        let mut last = None;
        let mut i = lo;
        while i < words.len() && words[i].start <= le {
            if intersects(&words[i], ls, le) {
                first.get_or_insert(i);
                last = Some(i);
            }
            i += 1;
        }
        match (first, last) {
            (Some(f), Some(l)) => {
                opens[f] += 1;
                closes[l] += 1;
            }
            _ => standalone.push((ls, le)),
        }
    }

    let mut out = Vec::with_capacity(words.len() + 2 * merged.len());
    let mut pending = standalone.into_iter().peekable();
    for (i, w) in words.iter().enumerate() {
        while let Some(&(ls, le)) = pending.peek() {
            if (ls, le) < (w.start, w.end) {
                out.push(Token::marker(LaughMarker::Laughter, ls, le, speaker));
                pending.next();
            } else {
                break;
            }
        }
        for _ in 0..opens[i] {
            out.push(Token::marker(LaughMarker::StartLaugh, w.start, w.start, speaker));
        }
        out.push(Token::word(w));
        for _ in 0..closes[i] {
            out.push(Token::marker(LaughMarker::EndLaugh, w.end, w.end, speaker));
        }
    }
    for (ls, le) in pending {
        out.push(Token::marker(LaughMarker::Laughter, ls, le, speaker));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{render_tokens, SpeakerId};

    fn w(text: &str, s: f64, e: f64) -> WordToken {
        WordToken::new(text, Timestamp::from_secs_f64(s), Timestamp::from_secs_f64(e), SpeakerId::A)
    }

    fn laugh(s: f64, e: f64) -> LaughEvent {
        LaughEvent { start: Timestamp::from_secs_f64(s), end: Timestamp::from_secs_f64(e), speaker: SpeakerId::A }
    }

    #[test]
    fn speech_laughter_wraps_words() {
        let words = [w("come", 5.1, 5.4), w("on", 5.5, 5.9)];
        let toks = integrate_laughs(&words, &[laugh(5.0, 6.0)]);
        assert_eq!(render_tokens(&toks), "[StartLaugh] come on [EndLaugh]");
        assert_eq!(toks[0].start, toks[0].end);
        assert_eq!(toks[3].start, Timestamp::from_secs_f64(5.9));
    }

    #[test]
    fn isolated_laugh_is_standalone() {
        let words = [w("come", 5.1, 5.4), w("on", 5.5, 5.9)];
        let toks = integrate_laughs(&words, &[laugh(8.0, 9.0)]);
        assert_eq!(render_tokens(&toks), "come on [Laughter]");
        assert_eq!(toks[2].start, Timestamp::from_secs_f64(8.0));
        assert_eq!(toks[2].end, Timestamp::from_secs_f64(9.0));
    }

    #[test]
    fn no_laughs_is_identity() {
        let words = [w("a", 0.0, 0.2), w("b", 0.3, 0.5)];
        let toks = integrate_laughs(&words, &[]);
        assert_eq!(toks, words.iter().map(Token::word).collect::<Vec<_>>());
    }

    #[test]
    fn laugh_touching_word_edge_does_not_intersect() {
        let words = [w("a", 1.0, 2.0)];
        let toks = integrate_laughs(&words, &[laugh(2.0, 2.5), laugh(0.5, 1.0)]);
        assert_eq!(render_tokens(&toks), "[Laughter] a [Laughter]");
    }

    #[test]
    fn partial_intersection_marks_only_touched_words() {
        let words = [w("i", 0.0, 0.2), w("hope", 0.3, 0.6), w("so", 0.7, 0.9)];
        let toks = integrate_laughs(&words, &[laugh(0.5, 0.75)]);
        assert_eq!(render_tokens(&toks), "i [StartLaugh] hope so [EndLaugh]");
    }

    #[test]
    fn overlapping_laughs_merge() {
        let words = [w("a", 0.0, 0.2), w("b", 0.3, 0.6), w("c", 0.7, 0.9)];
        let toks = integrate_laughs(&words, &[laugh(0.1, 0.35), laugh(0.3, 0.8)]);
        assert_eq!(render_tokens(&toks), "[StartLaugh] a b c [EndLaugh]");
    }
}
