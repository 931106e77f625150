//! Minimal `${name}` substitution for the prompt assets.

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template refers to unknown placeholder ${{{0}}}")]
    Unknown(String),
    #[error("unterminated placeholder at byte {0}")]
    Unterminated(usize),
}

/// Replaces every `${key}` in one left-to-right pass. Substituted values are
/// copied verbatim and never rescanned, so they may contain `${` themselves.
pub fn render(template: &str, vars: &[(&str, &str)]) -> Result<String, TemplateError> {
    let mut out = String::with_capacity(template.len() * 2);
    let mut rest = template;
    let mut offset = 0;
    while let Some(i) = rest.find("${") {
        out.push_str(&rest[..i]);
        let after = &rest[i + 2..];
        let close = after.find('}').ok_or(TemplateError::Unterminated(offset + i))?;
        let key = &after[..close];
        let value = vars
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| TemplateError::Unknown(key.to_string()))?;
        out.push_str(value);
        let consumed = i + 2 + close + 1;
        offset += consumed;
        rest = &rest[consumed..];
    }
    out.push_str(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitutes_without_rescanning() {
        let s = render("a ${x} b ${y}${x}", &[("x", "${y}"), ("y", "2")]).unwrap();
        assert_eq!(s, "a ${y} b 2${y}");
    }

    #[test]
    fn unknown_and_unterminated() {
        assert_eq!(render("${nope}", &[]), Err(TemplateError::Unknown("nope".into())));
        assert_eq!(render("ab${x", &[("x", "1")]), Err(TemplateError::Unterminated(2)));
        assert_eq!(render("{{{x}}}", &[]).unwrap(), "{{{x}}}");
    }
}
