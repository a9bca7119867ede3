//! `${i}` and `${JT_ID}` substitution.

/// Values visible to a substitution: the coordinates fixed so far (tag
/// `${1}` is the first) and the point's index label.
#[derive(Debug, Clone, Copy)]
pub struct SubstitutionContext<'a> {
    pub coordinates: &'a [String],
    pub label: Option<&'a str>,
    /// Literal tag replaced by the label, `${JT_ID}` by default.
    pub jt_wildcard: &'a str,
}

impl<'a> SubstitutionContext<'a> {
    pub fn new(coordinates: &'a [String], label: Option<&'a str>, jt_wildcard: &'a str) -> Self {
        SubstitutionContext {
            coordinates,
            label,
            jt_wildcard,
        }
    }

    pub fn empty(jt_wildcard: &'a str) -> Self {
        SubstitutionContext::new(&[], None, jt_wildcard)
    }
}

/// Parses a positional tag `${<digits>}` at the start of `s`, returning the
/// index and the tag length in bytes.
fn positional_tag(s: &str) -> Option<(usize, usize)> {
    let rest = s.strip_prefix("${")?;
    let close = rest.find('}')?;
    let digits = &rest[..close];
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((digits.parse().ok()?, close + 3))
}

/// Replaces the positional tags `${1}..${k}` and the index tag in one
/// left-to-right pass. Inserted values are never rescanned; positional tags
/// beyond the context and unknown `${...}` text are left as they are.
pub fn substitute(text: &str, ctx: &SubstitutionContext<'_>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    let jt_first = ctx.jt_wildcard.chars().next().filter(|_| ctx.label.is_some());
    while let Some(pos) = rest.find(|c| c == '$' || Some(c) == jt_first) {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        if let Some(label) = ctx.label {
            if !ctx.jt_wildcard.is_empty() && rest.starts_with(ctx.jt_wildcard) {
                out.push_str(label);
                rest = &rest[ctx.jt_wildcard.len()..];
                continue;
            }
        }
        if let Some((index, len)) = positional_tag(rest) {
            if (1..=ctx.coordinates.len()).contains(&index) {
                out.push_str(&ctx.coordinates[index - 1]);
                rest = &rest[len..];
                continue;
            }
        }
        let width = rest.chars().next().map_or(1, char::len_utf8);
        out.push_str(&rest[..width]);
        rest = &rest[width..];
    }
    out.push_str(rest);
    out
}

/// Every positional index referenced in `text`, in order of appearance.
pub fn positional_refs(text: &str) -> Vec<usize> {
    let mut refs = Vec::new();
    let mut rest = text;
    while let Some(pos) = rest.find("${") {
        rest = &rest[pos..];
        match positional_tag(rest) {
            Some((index, len)) => {
                refs.push(index);
                rest = &rest[len..];
            }
            None => rest = &rest[2..],
        }
    }
    refs
}

/// Whether `text` carries any tag that must be resolved per sweep point.
pub fn has_wildcard(text: &str, jt_wildcard: &str) -> bool {
    (!jt_wildcard.is_empty() && text.contains(jt_wildcard)) || !positional_refs(text).is_empty()
}
