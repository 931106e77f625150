use crate::model::{Duration, LaughMarker, Response, ResponseId, Token};

/// Splits one speaker's token stream wherever the gap between consecutive
/// tokens reaches `gap_threshold`. Point markers count as ordinary tokens.
///
/// Speech-laughter that straddles a split is closed at the tail of the first
/// response and reopened at the head of the next, so every response has
/// balanced `[StartLaugh]`/`[EndLaugh]` markers. Returned ids are provisional
/// (`0..n` within the speaker); labels are unset (`Turn`).
pub fn build_responses(tokens: &[Token], gap_threshold: Duration) -> Vec<Response> {
    let mut groups: Vec<Vec<Token>> = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let mut current_end = None;
    for tok in tokens {
        if let Some(end) = current_end {
            let gap = tok.start.saturating_sub(end);
            if gap >= gap_threshold {
                groups.push(std::mem::take(&mut current));
                current_end = None;
            }
        }
        current_end = Some(current_end.map_or(tok.end, |e: crate::model::Timestamp| e.max(tok.end)));
        current.push(tok.clone());
    }
    if !current.is_empty() {
        groups.push(current);
    }

    repair_laugh_pairs(&mut groups);

    groups
        .into_iter()
        .enumerate()
        .map(|(i, toks)| {
            let speaker = toks[0].speaker;
            Response::from_tokens(ResponseId(i as u32), speaker, toks)
        })
        .collect()
}

fn repair_laugh_pairs(groups: &mut [Vec<Token>]) {
    let mut carried = 0usize;
    for group in groups.iter_mut() {
        if carried > 0 {
            let head = &group[0];
            let (t, spk) = (head.start, head.speaker);
            let reopen = (0..carried).map(|_| Token::marker(LaughMarker::StartLaugh, t, t, spk));
            group.splice(0..0, reopen);
        }
        let mut open = 0usize;
        for tok in group.iter() {
            match tok.laugh_marker() {
                Some(LaughMarker::StartLaugh) => open += 1,
                Some(LaughMarker::EndLaugh) => open = open.saturating_sub(1),
                _ => {}
            }
        }
        if open > 0 {
            let tail = group.last().expect("non-empty group");
            let end = group.iter().map(|t| t.end).max().expect("non-empty group");
            let spk = tail.speaker;
            for _ in 0..open {
                group.push(Token::marker(LaughMarker::EndLaugh, end, end, spk));
            }
        }
        carried = open;
    }
}
