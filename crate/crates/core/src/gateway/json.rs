use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no JSON object found in model reply")]
pub struct NoJsonFound;

/// Returns the last complete JSON object in `text`.
///
/// Every `{` is tried as a candidate start; the object that ends latest wins,
/// and among those the outermost. Braces inside string literals never form a
/// valid candidate, so prose such as `{{{(TARGET) ...}}}` is skipped.
pub fn extract_trailing_json(text: &str) -> Result<Map<String, Value>, NoJsonFound> {
    let mut best: Option<(usize, usize, Map<String, Value>)> = None;
    for (pos, _) in text.match_indices('{') {
        let mut stream = serde_json::Deserializer::from_str(&text[pos..]).into_iter::<Value>();
        if let Some(Ok(Value::Object(obj))) = stream.next() {
            let end = pos + stream.byte_offset();
            match &best {
                Some((_, best_end, _)) if end <= *best_end => {}
                _ => best = Some((pos, end, obj)),
            }
        }
    }
    best.map(|(_, _, obj)| obj).ok_or(NoJsonFound)
}
