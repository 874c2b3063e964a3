//! Downward conjunctive tree patterns and their two textual surfaces: an
//! XPath subset for the common cases and an s-expression syntax covering the
//! full pattern model (optional edges, multiple returned nodes).

use std::fmt;

use crate::error::PatternError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Child,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValuePredicate {
    Eq(String),
    Contains(String),
}

/// One pattern node; the `axis` describes the edge above it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternNode {
    /// tag, `*`, `#text`, or `@name`.
    pub label: String,
    pub axis: Axis,
    /// Dashed edge: absence does not disqualify the parent match.
    pub optional: bool,
    /// Bracketed edge: must exist in the data but is not returned.
    pub existential: bool,
    /// Boxed node: bound into the query result.
    pub returned: bool,
    /// Applies to the node's text value.
    pub predicate: Option<ValuePredicate>,
    pub children: Vec<PatternNode>,
}

impl PatternNode {
    fn new(label: impl Into<String>, axis: Axis) -> Self {
        PatternNode {
            label: label.into(),
            axis,
            optional: false,
            existential: false,
            returned: false,
            predicate: None,
            children: Vec::new(),
        }
    }

    /// Label agreement; `*` matches element tags only.
    pub fn matches_label(&self, label: &str) -> bool {
        match self.label.as_str() {
            "*" => !label.starts_with('@') && label != "#text",
            other => other == label,
        }
    }
}

/// A validated tree pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPattern {
    root: PatternNode,
    node_count: usize,
}

impl QueryPattern {
    /// Wraps and validates a hand-built pattern tree.
    pub fn new(root: PatternNode) -> Result<Self, PatternError> {
        let node_count = count_nodes(&root);
        let pattern = QueryPattern { root, node_count };
        pattern.validate()?;
        Ok(pattern)
    }

    pub fn root(&self) -> &PatternNode {
        &self.root
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Pattern nodes in pre-order with their parent indices.
    pub fn flatten(&self) -> Vec<(Option<usize>, &PatternNode)> {
        let mut out = Vec::with_capacity(self.node_count);
        fn walk<'a>(
            node: &'a PatternNode,
            parent: Option<usize>,
            out: &mut Vec<(Option<usize>, &'a PatternNode)>,
        ) {
            let idx = out.len();
            out.push((parent, node));
            for child in &node.children {
                walk(child, Some(idx), out);
            }
        }
        walk(&self.root, None, &mut out);
        out
    }

    fn validate(&self) -> Result<(), PatternError> {
        fn walk(
            node: &PatternNode,
            under_optional: bool,
            under_existential: bool,
        ) -> Result<(), PatternError> {
            if node.returned && node.existential {
                return Err(PatternError::InvariantViolation(format!(
                    "node {} is both returned and existential",
                    node.label
                )));
            }
            if node.returned && !node.optional && under_optional {
                return Err(PatternError::InvariantViolation(format!(
                    "non-optional returned node {} lies under an optional edge",
                    node.label
                )));
            }
            if under_existential && !(node.existential || node.optional) {
                return Err(PatternError::InvariantViolation(format!(
                    "node {} under an existential edge must be existential or optional",
                    node.label
                )));
            }
            for child in &node.children {
                walk(
                    child,
                    under_optional || node.optional,
                    node.existential,
                )?;
            }
            Ok(())
        }
        walk(&self.root, false, false)
    }
}

fn count_nodes(node: &PatternNode) -> usize {
    1 + node.children.iter().map(count_nodes).sum::<usize>()
}

// ---- XPath subset ----------------------------------------------------------

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        Scanner { bytes: text.as_bytes(), pos: 0 }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn name(&mut self) -> Result<String, PatternError> {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.' | b':') {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(PatternError::syntax(start, "expected a name"));
        }
        let name = std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| PatternError::syntax(start, "name is not UTF-8"))?;
        if name.starts_with(|c: char| c.is_ascii_digit()) || name.starts_with('.') {
            return Err(PatternError::syntax(start, "names cannot start with a digit"));
        }
        Ok(name.to_string())
    }

    fn string_literal(&mut self) -> Result<String, PatternError> {
        let quote = match self.peek() {
            Some(q @ (b'\'' | b'"')) => q,
            _ => return Err(PatternError::syntax(self.pos, "expected a string literal")),
        };
        let start = self.pos;
        self.pos += 1;
        let from = self.pos;
        while let Some(b) = self.peek() {
            if b == quote {
                let s = std::str::from_utf8(&self.bytes[from..self.pos])
                    .map_err(|_| PatternError::syntax(from, "literal is not UTF-8"))?
                    .to_string();
                self.pos += 1;
                return Ok(s);
            }
            self.pos += 1;
        }
        Err(PatternError::syntax(start, "unterminated string literal"))
    }
}

/// Parses the XPath subset
/// `('/'|'//') step (('/'|'//') step)*` with
/// `step := (NCName|'*'|'@'NCName|'text()') predicate*` and
/// `predicate := '[' rel-path (('='|'~') literal)? ']'`.
///
/// Spine steps become non-returned internal nodes except the last, which is
/// returned; predicate paths become existential subtrees.
pub fn parse_xpath(text: &str) -> Result<QueryPattern, PatternError> {
    let mut s = Scanner::new(text);
    s.skip_ws();
    let mut spine: Vec<PatternNode> = Vec::new();
    loop {
        let axis = if s.eat(b'/') {
            if s.eat(b'/') {
                Axis::Desc
            } else {
                Axis::Child
            }
        } else if spine.is_empty() {
            return Err(PatternError::syntax(s.pos, "paths must start with '/' or '//'"));
        } else {
            break;
        };
        let node = parse_step(&mut s, axis)?;
        spine.push(node);
        s.skip_ws();
        if s.peek().is_none() {
            break;
        }
        if s.peek() != Some(b'/') {
            return Err(PatternError::syntax(s.pos, "expected '/', '//' or end of input"));
        }
    }
    if s.peek().is_some() {
        return Err(PatternError::syntax(s.pos, "trailing input"));
    }
    let mut node = match spine.pop() {
        Some(mut last) => {
            last.returned = true;
            last
        }
        None => return Err(PatternError::syntax(0, "empty path")),
    };
    while let Some(mut parent) = spine.pop() {
        // Predicate children precede the spine child, matching textual order.
        parent.children.push(node);
        node = parent;
    }
    QueryPattern::new(node)
}

fn parse_step(s: &mut Scanner, axis: Axis) -> Result<PatternNode, PatternError> {
    let label = parse_step_label(s)?;
    let mut node = PatternNode::new(label, axis);
    loop {
        s.skip_ws();
        if !s.eat(b'[') {
            break;
        }
        let child = parse_predicate(s)?;
        node.children.push(child);
        if !s.eat(b']') {
            return Err(PatternError::syntax(s.pos, "expected ']'"));
        }
    }
    Ok(node)
}

fn parse_step_label(s: &mut Scanner) -> Result<String, PatternError> {
    s.skip_ws();
    if s.eat(b'*') {
        return Ok("*".to_string());
    }
    if s.eat(b'@') {
        return Ok(format!("@{}", s.name()?));
    }
    let start = s.pos;
    let name = s.name()?;
    if name == "text" && s.eat(b'(') {
        if !s.eat(b')') {
            return Err(PatternError::syntax(s.pos, "expected ')' after text("));
        }
        return Ok("#text".to_string());
    }
    if s.peek() == Some(b'(') {
        return Err(PatternError::UnsupportedFeature(format!(
            "function call {name}() at position {start}"
        )));
    }
    if name.contains("::") {
        return Err(PatternError::UnsupportedFeature(format!(
            "axis specifier at position {start}"
        )));
    }
    Ok(name)
}

/// A predicate is a relative child/desc path, existential throughout, with
/// an optional value comparison on its last node.
fn parse_predicate(s: &mut Scanner) -> Result<PatternNode, PatternError> {
    s.skip_ws();
    if matches!(s.peek(), Some(b'\'' | b'"' | b'0'..=b'9')) {
        return Err(PatternError::UnsupportedFeature(
            "positional or literal-only predicates".into(),
        ));
    }
    let mut chain: Vec<PatternNode> = Vec::new();
    loop {
        let axis = if chain.is_empty() {
            Axis::Child
        } else if s.eat(b'/') {
            if s.eat(b'/') {
                Axis::Desc
            } else {
                Axis::Child
            }
        } else {
            break;
        };
        let label = parse_step_label(s)?;
        if s.peek() == Some(b'[') {
            return Err(PatternError::UnsupportedFeature("nested predicates".into()));
        }
        let mut node = PatternNode::new(label, axis);
        node.existential = true;
        chain.push(node);
        s.skip_ws();
    }
    s.skip_ws();
    let comparison = if s.eat(b'=') {
        Some(false)
    } else if s.eat(b'~') {
        Some(true)
    } else {
        None
    };
    if let Some(contains) = comparison {
        s.skip_ws();
        let literal = s.string_literal()?;
        let last = chain.last_mut().expect("chain nonempty");
        last.predicate = Some(if contains {
            ValuePredicate::Contains(literal)
        } else {
            ValuePredicate::Eq(literal)
        });
        s.skip_ws();
    }
    let mut node = chain.pop().expect("chain nonempty");
    while let Some(mut parent) = chain.pop() {
        parent.children.push(node);
        node = parent;
    }
    Ok(node)
}

// ---- s-expression surface ---------------------------------------------------

/// Parses the s-expression pattern syntax:
/// `(node tag=<label> axis=child|desc [opt] [exist] [ret]
/// [eq="…"|contains="…"] child*)`.
pub fn parse_pattern(text: &str) -> Result<QueryPattern, PatternError> {
    let mut s = Scanner::new(text);
    let root = parse_sexpr_node(&mut s)?;
    s.skip_ws();
    if s.peek().is_some() {
        return Err(PatternError::syntax(s.pos, "trailing input"));
    }
    QueryPattern::new(root)
}

fn parse_sexpr_node(s: &mut Scanner) -> Result<PatternNode, PatternError> {
    s.skip_ws();
    if !s.eat(b'(') {
        return Err(PatternError::syntax(s.pos, "expected '('"));
    }
    s.skip_ws();
    let head = sexpr_atom(s)?;
    if head != "node" {
        return Err(PatternError::syntax(s.pos, format!("expected 'node', found {head:?}")));
    }
    let mut label: Option<String> = None;
    let mut axis: Option<Axis> = None;
    let mut node = PatternNode::new("", Axis::Child);
    loop {
        s.skip_ws();
        match s.peek() {
            None => return Err(PatternError::syntax(s.pos, "unterminated node form")),
            Some(b')') => {
                s.pos += 1;
                break;
            }
            Some(b'(') => {
                let child = parse_sexpr_node(s)?;
                node.children.push(child);
            }
            Some(_) => {
                let atom = sexpr_atom(s)?;
                if let Some(eq) = atom.find('=') {
                    let (key, _) = atom.split_at(eq);
                    let value = sexpr_value(s, &atom[eq + 1..])?;
                    match key {
                        "tag" => label = Some(value),
                        "axis" => {
                            axis = Some(match value.as_str() {
                                "child" => Axis::Child,
                                "desc" => Axis::Desc,
                                other => {
                                    return Err(PatternError::syntax(
                                        s.pos,
                                        format!("axis must be child or desc, found {other:?}"),
                                    ))
                                }
                            })
                        }
                        "eq" => node.predicate = Some(ValuePredicate::Eq(value)),
                        "contains" => node.predicate = Some(ValuePredicate::Contains(value)),
                        other => {
                            return Err(PatternError::syntax(
                                s.pos,
                                format!("unknown attribute {other:?}"),
                            ))
                        }
                    }
                } else {
                    match atom.as_str() {
                        "opt" => node.optional = true,
                        "exist" => node.existential = true,
                        "ret" => node.returned = true,
                        other => {
                            return Err(PatternError::syntax(
                                s.pos,
                                format!("unknown flag {other:?}"),
                            ))
                        }
                    }
                }
            }
        }
    }
    node.label = label.ok_or_else(|| PatternError::syntax(s.pos, "missing tag="))?;
    node.axis = axis.ok_or_else(|| PatternError::syntax(s.pos, "missing axis="))?;
    Ok(node)
}

/// Reads a bare atom (up to whitespace or parens), stopping after `=` when a
/// quoted value follows.
fn sexpr_atom(s: &mut Scanner) -> Result<String, PatternError> {
    let start = s.pos;
    while let Some(b) = s.peek() {
        if b.is_ascii_whitespace() || b == b'(' || b == b')' {
            break;
        }
        s.pos += 1;
        if b == b'=' && matches!(s.peek(), Some(b'"')) {
            break;
        }
    }
    if s.pos == start {
        return Err(PatternError::syntax(start, "expected an atom"));
    }
    Ok(std::str::from_utf8(&s.bytes[start..s.pos])
        .map_err(|_| PatternError::syntax(start, "atom is not UTF-8"))?
        .to_string())
}

/// An attribute value: either the bare remainder of the atom or a quoted
/// string with `\"` and `\\` escapes.
fn sexpr_value(s: &mut Scanner, bare: &str) -> Result<String, PatternError> {
    if !bare.is_empty() {
        return Ok(bare.to_string());
    }
    if s.peek() != Some(b'"') {
        return Err(PatternError::syntax(s.pos, "expected a value"));
    }
    s.pos += 1;
    let mut out = String::new();
    loop {
        match s.peek() {
            None => return Err(PatternError::syntax(s.pos, "unterminated string")),
            Some(b'"') => {
                s.pos += 1;
                return Ok(out);
            }
            Some(b'\\') => {
                s.pos += 1;
                match s.peek() {
                    Some(b'"') => out.push('"'),
                    Some(b'\\') => out.push('\\'),
                    _ => return Err(PatternError::syntax(s.pos, "bad escape")),
                }
                s.pos += 1;
            }
            Some(_) => {
                let from = s.pos;
                while matches!(s.peek(), Some(b) if b != b'"' && b != b'\\') {
                    s.pos += 1;
                }
                out.push_str(
                    std::str::from_utf8(&s.bytes[from..s.pos])
                        .map_err(|_| PatternError::syntax(from, "value is not UTF-8"))?,
                );
            }
        }
    }
}

fn needs_quoting(value: &str) -> bool {
    value.is_empty()
        || value
            .bytes()
            .any(|b| b.is_ascii_whitespace() || matches!(b, b'(' | b')' | b'"' | b'\\' | b'='))
}

fn write_sexpr(node: &PatternNode, out: &mut String) {
    out.push_str("(node tag=");
    if needs_quoting(&node.label) {
        out.push('"');
        out.push_str(&node.label.replace('\\', "\\\\").replace('"', "\\\""));
        out.push('"');
    } else {
        out.push_str(&node.label);
    }
    out.push_str(match node.axis {
        Axis::Child => " axis=child",
        Axis::Desc => " axis=desc",
    });
    if node.optional {
        out.push_str(" opt");
    }
    if node.existential {
        out.push_str(" exist");
    }
    if node.returned {
        out.push_str(" ret");
    }
    if let Some(pred) = &node.predicate {
        let (key, value) = match pred {
            ValuePredicate::Eq(v) => ("eq", v),
            ValuePredicate::Contains(v) => ("contains", v),
        };
        out.push(' ');
        out.push_str(key);
        out.push_str("=\"");
        out.push_str(&value.replace('\\', "\\\\").replace('"', "\\\""));
        out.push('"');
    }
    for child in &node.children {
        out.push(' ');
        write_sexpr(child, out);
    }
    out.push(')');
}

/// Canonical s-expression rendition; `parse_pattern(p.to_string()) == p`.
impl fmt::Display for QueryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_sexpr(&self.root, &mut out);
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xpath_spine() {
        let q = parse_xpath("//asia//item/name").unwrap();
        assert_eq!(q.node_count(), 3);
        let asia = q.root();
        assert_eq!(asia.label, "asia");
        assert_eq!(asia.axis, Axis::Desc);
        assert!(!asia.returned && !asia.existential);
        let item = &asia.children[0];
        assert_eq!(item.label, "item");
        assert_eq!(item.axis, Axis::Desc);
        let name = &item.children[0];
        assert_eq!(name.label, "name");
        assert_eq!(name.axis, Axis::Child);
        assert!(name.returned);
    }

    #[test]
    fn xpath_existential_predicate() {
        let q = parse_xpath("//item[desc]").unwrap();
        let item = q.root();
        assert!(item.returned);
        assert_eq!(item.axis, Axis::Desc);
        let desc = &item.children[0];
        assert_eq!(desc.label, "desc");
        assert_eq!(desc.axis, Axis::Child);
        assert!(desc.existential && !desc.returned);
    }

    #[test]
    fn xpath_value_predicate() {
        let q = parse_xpath("//item[name='n1']").unwrap();
        let name = &q.root().children[0];
        assert!(name.existential);
        assert_eq!(name.predicate, Some(ValuePredicate::Eq("n1".into())));
        let q = parse_xpath("//item[name~'n']").unwrap();
        let name = &q.root().children[0];
        assert_eq!(name.predicate, Some(ValuePredicate::Contains("n".into())));
    }

    #[test]
    fn xpath_attr_text_and_star() {
        let q = parse_xpath("//*[@id='7']/text()").unwrap();
        let star = q.root();
        assert_eq!(star.label, "*");
        let id = &star.children[0];
        assert_eq!(id.label, "@id");
        assert!(id.existential);
        assert_eq!(id.predicate, Some(ValuePredicate::Eq("7".into())));
        let text = &star.children[1];
        assert_eq!(text.label, "#text");
        assert!(text.returned);
        assert!(star.matches_label("anything"));
        assert!(!star.matches_label("@id"));
        assert!(!star.matches_label("#text"));
    }

    #[test]
    fn xpath_deep_predicate_path() {
        let q = parse_xpath("//item[desc//kw='x']").unwrap();
        let desc = &q.root().children[0];
        assert_eq!(desc.label, "desc");
        assert!(desc.existential);
        let kw = &desc.children[0];
        assert_eq!(kw.label, "kw");
        assert_eq!(kw.axis, Axis::Desc);
        assert_eq!(kw.predicate, Some(ValuePredicate::Eq("x".into())));
    }

    #[test]
    fn xpath_errors() {
        assert!(matches!(parse_xpath("item"), Err(PatternError::SyntaxError { .. })));
        assert!(matches!(parse_xpath("//item["), Err(PatternError::SyntaxError { .. })));
        assert!(matches!(
            parse_xpath("//item/following-sibling::x"),
            Err(PatternError::UnsupportedFeature(_))
        ));
        assert!(matches!(
            parse_xpath("//item[count(x)]"),
            Err(PatternError::UnsupportedFeature(_))
        ));
        assert!(matches!(
            parse_xpath("//item[a[b]]"),
            Err(PatternError::UnsupportedFeature(_))
        ));
    }

    #[test]
    fn sexpr_optional_returned() {
        let q = parse_pattern(
            "(node tag=item axis=desc ret (node tag=emph axis=desc opt ret))",
        )
        .unwrap();
        let item = q.root();
        assert!(item.returned);
        let emph = &item.children[0];
        assert!(emph.optional && emph.returned);
    }

    #[test]
    fn sexpr_single_node() {
        let q = parse_pattern("(node tag=a axis=child)").unwrap();
        assert_eq!(q.node_count(), 1);
        assert_eq!(q.root().label, "a");
    }

    #[test]
    fn sexpr_invariant_violation() {
        let err = parse_pattern("(node tag=a axis=child exist ret)").unwrap_err();
        assert!(matches!(err, PatternError::InvariantViolation(_)));
        // A non-optional returned node below an optional edge is rejected.
        let err = parse_pattern(
            "(node tag=a axis=child ret (node tag=b axis=child opt (node tag=c axis=child ret)))",
        )
        .unwrap_err();
        assert!(matches!(err, PatternError::InvariantViolation(_)));
        // Non-existential child under an existential edge is rejected.
        let err = parse_pattern(
            "(node tag=a axis=child ret (node tag=b axis=child exist (node tag=c axis=child)))",
        )
        .unwrap_err();
        assert!(matches!(err, PatternError::InvariantViolation(_)));
    }

    #[test]
    fn sexpr_quoted_values() {
        let q = parse_pattern(r#"(node tag=k axis=desc ret eq="a \"b\" c")"#).unwrap();
        assert_eq!(q.root().predicate, Some(ValuePredicate::Eq(r#"a "b" c"#.into())));
    }

    #[test]
    fn display_parse_fixpoint() {
        let sources = [
            "(node tag=item axis=desc ret (node tag=emph axis=desc opt ret))",
            "(node tag=a axis=child)",
            r#"(node tag=k axis=desc ret eq="x y")"#,
            "(node tag=item axis=desc ret (node tag=desc axis=child exist) (node tag=name axis=child ret))",
        ];
        for src in sources {
            let once = parse_pattern(src).unwrap();
            let printed = once.to_string();
            let twice = parse_pattern(&printed).unwrap();
            assert_eq!(once, twice, "fixpoint failed for {src}");
            assert_eq!(printed, twice.to_string());
        }
        for xpath in ["//asia//item/name", "//item[desc]", "//item[name='n1']"] {
            let once = parse_xpath(xpath).unwrap();
            let twice = parse_pattern(&once.to_string()).unwrap();
            assert_eq!(once, twice);
        }
    }
}
