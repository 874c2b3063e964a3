//! Streaming XML parsing, structural-ID assignment, and the node-event
//! stream consumed by summary construction and store partitioning.

use std::collections::VecDeque;

use crate::error::XmlError;

/// Shift separating the slot (element counter value) from the sub-counter in
/// the packed `pre` stamp of text and attribute nodes.
pub const VALUE_SLOT_SHIFT: u32 = 32;

/// (pre, post, depth) triple identifying one XML node.
///
/// Elements draw `pre` from the element-begin counter and `post` from the
/// element-end counter, both 1-based and dense over the document's elements.
/// The classic region test applies to element pairs: `x` is an ancestor of
/// `y` iff `x.pre < y.pre && x.post > y.post`.
///
/// Text and attribute nodes carry a packed stamp instead:
/// `pre = slot << 32 | sub`, where `slot` is the element-begin counter value
/// at the point the node occurs and `sub` numbers value stamps within the
/// slot (1-based). `post` mirrors `pre` for these nodes. The packed stamps
/// order text and attribute nodes exactly against sibling elements via
/// [`DocKey`]; the region test is not defined across node kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StructuralId {
    pub pre: u64,
    pub post: u64,
    pub depth: u32,
}

/// Total document-order key comparable across elements and value nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DocKey {
    pub major: u64,
    pub minor: u64,
}

impl StructuralId {
    pub fn element(pre: u64, post: u64, depth: u32) -> Self {
        StructuralId { pre, post, depth }
    }

    /// Packs the stamp of a text or attribute node.
    pub fn value_node(slot: u64, sub: u64, depth: u32) -> Self {
        let pre = (slot << VALUE_SLOT_SHIFT) | sub;
        StructuralId { pre, post: pre, depth }
    }

    /// True iff `self` is a proper ancestor of `other`. Element ids only.
    pub fn is_ancestor_of(&self, other: &StructuralId) -> bool {
        self.pre < other.pre && self.post > other.post
    }

    /// True iff `self` is the parent of `other`. Element ids only.
    pub fn is_parent_of(&self, other: &StructuralId) -> bool {
        self.is_ancestor_of(other) && other.depth == self.depth + 1
    }

    /// Document-order key of an element id.
    pub fn element_key(&self) -> DocKey {
        DocKey { major: self.pre, minor: 0 }
    }

    /// Document-order key of a text/attribute stamp.
    pub fn value_key(&self) -> DocKey {
        DocKey {
            major: self.pre >> VALUE_SLOT_SHIFT,
            minor: self.pre & ((1u64 << VALUE_SLOT_SHIFT) - 1),
        }
    }
}

/// One node event of the document stream.
///
/// Element ids are completed in two steps: the start event carries the
/// element's `pre` and `depth` with `post = 0`, and the matching end event
/// carries the full id once the end rank is known. Attribute and text events
/// carry complete ids immediately. Attribute labels are `"@" + name`; text
/// labels are `"#text"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeEvent {
    ElementStart { label: String, id: Option<StructuralId> },
    ElementEnd { label: String, id: Option<StructuralId> },
    Attribute { label: String, id: Option<StructuralId>, value: String },
    Text { id: Option<StructuralId>, value: String },
}

impl NodeEvent {
    pub fn label(&self) -> &str {
        match self {
            NodeEvent::ElementStart { label, .. } => label,
            NodeEvent::ElementEnd { label, .. } => label,
            NodeEvent::Attribute { label, .. } => label,
            NodeEvent::Text { .. } => "#text",
        }
    }
}

/// Pull parser over a UTF-8 XML byte slice.
///
/// Emits events in document order; comments, processing instructions and the
/// document type declaration are dropped, as is whitespace-only text.
/// Attribute events directly follow their owner's start event.
pub struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    open: Vec<String>,
    queue: VecDeque<NodeEvent>,
    pending_text: String,
    seen_root: bool,
    finished: bool,
    failed: bool,
}

/// Parses a document from bytes. The returned iterator yields events without
/// structural ids; feed it through [`assign_ids`] to stamp them.
pub fn parse_document(bytes: &[u8]) -> Parser<'_> {
    Parser {
        bytes,
        pos: 0,
        open: Vec::new(),
        queue: VecDeque::new(),
        pending_text: String::new(),
        seen_root: false,
        finished: false,
        failed: false,
    }
}

impl<'a> Parser<'a> {
    fn err<T>(&mut self, offset: usize, msg: impl Into<String>) -> Result<T, XmlError> {
        self.failed = true;
        Err(XmlError::malformed(offset, msg))
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn starts_with(&self, s: &[u8]) -> bool {
        self.bytes[self.pos..].starts_with(s)
    }

    fn flush_text(&mut self) {
        if !self.pending_text.is_empty() {
            if self.pending_text.bytes().all(|b| b.is_ascii_whitespace()) {
                self.pending_text.clear();
            } else {
                let value = std::mem::take(&mut self.pending_text);
                self.queue.push_back(NodeEvent::Text { id: None, value });
            }
        }
    }

    fn read_name(&mut self) -> Result<String, XmlError> {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() || matches!(b, b'>' | b'/' | b'=' | b'<') {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start {
            return self.err(start, "expected a name");
        }
        match std::str::from_utf8(&self.bytes[start..self.pos]) {
            Ok(s) => Ok(s.to_string()),
            Err(_) => self.err(start, "name is not valid UTF-8"),
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    /// Decodes one reference starting at `&`. Supports the five built-in
    /// entities and decimal/hex character references.
    fn read_reference(&mut self, out: &mut String) -> Result<(), XmlError> {
        let start = self.pos;
        self.pos += 1; // consume '&'
        let end = match self.bytes[self.pos..].iter().position(|&b| b == b';') {
            Some(i) => self.pos + i,
            None => return self.err(start, "unterminated entity reference"),
        };
        let name = &self.bytes[self.pos..end];
        let decoded: String = match name {
            b"amp" => "&".into(),
            b"lt" => "<".into(),
            b"gt" => ">".into(),
            b"quot" => "\"".into(),
            b"apos" => "'".into(),
            _ if name.first() == Some(&b'#') => {
                let body = &name[1..];
                let code = if body.first() == Some(&b'x') || body.first() == Some(&b'X') {
                    u32::from_str_radix(std::str::from_utf8(&body[1..]).unwrap_or(""), 16)
                } else {
                    std::str::from_utf8(body).unwrap_or("").parse::<u32>()
                };
                match code.ok().and_then(char::from_u32) {
                    Some(c) => c.to_string(),
                    None => return self.err(start, "invalid character reference"),
                }
            }
            _ => {
                return self.err(
                    start,
                    format!(
                        "unknown entity &{};",
                        String::from_utf8_lossy(name)
                    ),
                )
            }
        };
        out.push_str(&decoded);
        self.pos = end + 1;
        Ok(())
    }

    fn read_quoted(&mut self) -> Result<String, XmlError> {
        let quote = match self.peek() {
            Some(q @ (b'"' | b'\'')) => q,
            _ => return self.err(self.pos, "expected quoted value"),
        };
        self.pos += 1;
        let mut out = String::new();
        let seg_start = self.pos;
        let mut seg_from = self.pos;
        loop {
            match self.peek() {
                None => return self.err(seg_start, "unterminated attribute value"),
                Some(b) if b == quote => {
                    out.push_str(self.utf8_slice(seg_from, self.pos)?);
                    self.pos += 1;
                    return Ok(out);
                }
                Some(b'&') => {
                    out.push_str(self.utf8_slice(seg_from, self.pos)?);
                    self.read_reference(&mut out)?;
                    seg_from = self.pos;
                }
                Some(b'<') => return self.err(self.pos, "'<' in attribute value"),
                Some(_) => self.pos += 1,
            }
        }
    }

    fn utf8_slice(&mut self, from: usize, to: usize) -> Result<&'a str, XmlError> {
        match std::str::from_utf8(&self.bytes[from..to]) {
            Ok(s) => Ok(s),
            Err(e) => {
                self.failed = true;
                Err(XmlError::malformed(from + e.valid_up_to(), "invalid UTF-8"))
            }
        }
    }

    /// Skips `<!DOCTYPE ...>` including a bracketed internal subset.
    fn skip_doctype(&mut self) -> Result<(), XmlError> {
        let start = self.pos;
        let mut depth = 0usize;
        while let Some(b) = self.peek() {
            match b {
                b'[' => depth += 1,
                b']' => depth = depth.saturating_sub(1),
                b'>' if depth == 0 => {
                    self.pos += 1;
                    return Ok(());
                }
                _ => {}
            }
            self.pos += 1;
        }
        self.err(start, "unterminated DOCTYPE")
    }

    fn skip_until(&mut self, terminator: &[u8], what: &str) -> Result<(), XmlError> {
        let start = self.pos;
        let hay = &self.bytes[self.pos..];
        match hay
            .windows(terminator.len())
            .position(|w| w == terminator)
        {
            Some(i) => {
                self.pos += i + terminator.len();
                Ok(())
            }
            None => self.err(start, format!("unterminated {what}")),
        }
    }

    /// Parses one markup construct or accumulates character data, pushing
    /// resulting events onto the queue.
    fn step(&mut self) -> Result<(), XmlError> {
        let start = self.pos;
        if self.pos >= self.bytes.len() {
            if !self.open.is_empty() {
                let tag = self.open.last().unwrap().clone();
                return self.err(start, format!("unexpected end of input; <{tag}> not closed"));
            }
            self.finished = true;
            if !self.seen_root {
                self.failed = true;
                return Err(XmlError::EmptyDocument);
            }
            return Ok(());
        }
        if self.peek() != Some(b'<') {
            // Character data run up to the next markup, decoding references.
            let mut run = String::new();
            let mut from = self.pos;
            while let Some(b) = self.peek() {
                if b == b'<' {
                    break;
                }
                if b == b'&' {
                    let s = self.utf8_slice(from, self.pos)?;
                    run.push_str(s);
                    let mut buf = std::mem::take(&mut run);
                    self.read_reference(&mut buf)?;
                    run = buf;
                    from = self.pos;
                } else {
                    self.pos += 1;
                }
            }
            let s = self.utf8_slice(from, self.pos)?;
            run.push_str(s);
            if self.open.is_empty() {
                if !run.bytes().all(|b| b.is_ascii_whitespace()) {
                    return self.err(start, "character data outside the root element");
                }
                return Ok(());
            }
            self.pending_text.push_str(&run);
            return Ok(());
        }
        // Markup.
        if self.starts_with(b"<!--") {
            self.flush_text();
            self.pos += 4;
            return self.skip_until(b"-->", "comment");
        }
        if self.starts_with(b"<![CDATA[") {
            if self.open.is_empty() {
                return self.err(start, "CDATA outside the root element");
            }
            self.pos += 9;
            let from = self.pos;
            self.skip_until(b"]]>", "CDATA section")?;
            let end = self.pos - 3;
            let s = self.utf8_slice(from, end)?;
            self.pending_text.push_str(s);
            return Ok(());
        }
        if self.starts_with(b"<?") {
            self.flush_text();
            self.pos += 2;
            return self.skip_until(b"?>", "processing instruction");
        }
        if self.starts_with(b"<!DOCTYPE") {
            if self.seen_root {
                return self.err(start, "DOCTYPE after the root element");
            }
            self.pos += 9;
            return self.skip_doctype();
        }
        if self.starts_with(b"</") {
            self.flush_text();
            self.pos += 2;
            let name = self.read_name()?;
            self.skip_ws();
            if self.peek() != Some(b'>') {
                return self.err(self.pos, "expected '>' in end tag");
            }
            self.pos += 1;
            match self.open.pop() {
                Some(top) if top == name => {
                    self.queue.push_back(NodeEvent::ElementEnd { label: name, id: None });
                    Ok(())
                }
                Some(top) => self.err(start, format!("mismatched tag: expected </{top}>, found </{name}>")),
                None => self.err(start, format!("unexpected end tag </{name}>")),
            }
        } else {
            // Start tag.
            self.flush_text();
            if self.seen_root && self.open.is_empty() {
                return self.err(start, "multiple root elements");
            }
            self.pos += 1;
            let name = self.read_name()?;
            self.seen_root = true;
            let mut attrs: Vec<(String, String)> = Vec::new();
            loop {
                self.skip_ws();
                match self.peek() {
                    Some(b'>') => {
                        self.pos += 1;
                        self.open.push(name.clone());
                        self.queue.push_back(NodeEvent::ElementStart { label: name.clone(), id: None });
                        for (n, v) in attrs {
                            self.queue.push_back(NodeEvent::Attribute {
                                label: format!("@{n}"),
                                id: None,
                                value: v,
                            });
                        }
                        return Ok(());
                    }
                    Some(b'/') => {
                        self.pos += 1;
                        if self.peek() != Some(b'>') {
                            return self.err(self.pos, "expected '>' after '/'");
                        }
                        self.pos += 1;
                        self.queue.push_back(NodeEvent::ElementStart { label: name.clone(), id: None });
                        for (n, v) in attrs {
                            self.queue.push_back(NodeEvent::Attribute {
                                label: format!("@{n}"),
                                id: None,
                                value: v,
                            });
                        }
                        self.queue.push_back(NodeEvent::ElementEnd { label: name, id: None });
                        return Ok(());
                    }
                    Some(_) => {
                        let attr_start = self.pos;
                        let attr_name = self.read_name()?;
                        self.skip_ws();
                        if self.peek() != Some(b'=') {
                            return self.err(self.pos, "expected '=' after attribute name");
                        }
                        self.pos += 1;
                        self.skip_ws();
                        let value = self.read_quoted()?;
                        if attrs.iter().any(|(n, _)| n == &attr_name) {
                            return self.err(attr_start, format!("duplicate attribute {attr_name}"));
                        }
                        attrs.push((attr_name, value));
                    }
                    None => return self.err(start, "unterminated start tag"),
                }
            }
        }
    }

}

impl<'a> Iterator for Parser<'a> {
    type Item = Result<NodeEvent, XmlError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(ev) = self.queue.pop_front() {
                return Some(Ok(ev));
            }
            if self.finished || self.failed {
                return None;
            }
            if let Err(e) = self.step() {
                return Some(Err(e));
            }
        }
    }
}

/// Iterator adapter that stamps structural ids onto a well-nested event
/// stream. Single pass; keeps only the open-element stack.
pub struct AssignIds<I> {
    inner: I,
    elem_begin: u64,
    elem_end: u64,
    value_sub: u64,
    open: Vec<StructuralId>,
}

/// Stamps ids per the scheme documented on [`StructuralId`].
pub fn assign_ids<I, E>(events: I) -> AssignIds<I::IntoIter>
where
    I: IntoIterator<Item = Result<NodeEvent, E>>,
{
    AssignIds {
        inner: events.into_iter(),
        elem_begin: 0,
        elem_end: 0,
        value_sub: 0,
        open: Vec::new(),
    }
}

impl<I, E> Iterator for AssignIds<I>
where
    I: Iterator<Item = Result<NodeEvent, E>>,
{
    type Item = Result<NodeEvent, E>;

    fn next(&mut self) -> Option<Self::Item> {
        let ev = match self.inner.next()? {
            Ok(ev) => ev,
            Err(e) => return Some(Err(e)),
        };
        let stamped = match ev {
            NodeEvent::ElementStart { label, .. } => {
                self.elem_begin += 1;
                self.value_sub = 0;
                let id = StructuralId::element(self.elem_begin, 0, self.open.len() as u32 + 1);
                self.open.push(id);
                NodeEvent::ElementStart { label, id: Some(id) }
            }
            NodeEvent::ElementEnd { label, .. } => {
                self.elem_end += 1;
                let mut id = self.open.pop().expect("well-nested event stream");
                id.post = self.elem_end;
                NodeEvent::ElementEnd { label, id: Some(id) }
            }
            NodeEvent::Attribute { label, value, .. } => {
                self.value_sub += 1;
                let depth = self.open.last().map(|o| o.depth).unwrap_or(0) + 1;
                let id = StructuralId::value_node(self.elem_begin, self.value_sub, depth);
                NodeEvent::Attribute { label, id: Some(id), value }
            }
            NodeEvent::Text { value, .. } => {
                self.value_sub += 1;
                let depth = self.open.last().map(|o| o.depth).unwrap_or(0) + 1;
                let id = StructuralId::value_node(self.elem_begin, self.value_sub, depth);
                NodeEvent::Text { id: Some(id), value }
            }
        };
        Some(Ok(stamped))
    }
}

/// Parses and stamps a whole document into an event vector.
pub fn parse_with_ids(bytes: &[u8]) -> Result<Vec<NodeEvent>, XmlError> {
    assign_ids(parse_document(bytes)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const D1: &str = "<site><asia><item><name>n1</name><desc/></item><item><name>n2</name></item></asia><europe><item><name>n3</name></item></europe></site>";

    fn kinds(events: &[NodeEvent]) -> (usize, usize, usize, usize) {
        let mut counts = (0, 0, 0, 0);
        for ev in events {
            match ev {
                NodeEvent::ElementStart { .. } => counts.0 += 1,
                NodeEvent::ElementEnd { .. } => counts.1 += 1,
                NodeEvent::Attribute { .. } => counts.2 += 1,
                NodeEvent::Text { .. } => counts.3 += 1,
            }
        }
        counts
    }

    /// Element (label, id) pairs in begin order, ids completed from end events.
    fn element_ids(events: &[NodeEvent]) -> Vec<(String, StructuralId)> {
        let mut out: Vec<(String, StructuralId)> = Vec::new();
        for ev in events {
            if let NodeEvent::ElementEnd { label, id: Some(id) } = ev {
                out.push((label.clone(), *id));
            }
        }
        out.sort_by_key(|(_, id)| id.pre);
        out
    }

    #[test]
    fn d1_event_counts() {
        let events: Vec<_> = parse_document(D1.as_bytes())
            .collect::<Result<_, _>>()
            .unwrap();
        let (starts, ends, attrs, texts) = kinds(&events);
        assert_eq!(starts, 10);
        assert_eq!(texts, 3);
        assert_eq!(ends, 10);
        assert_eq!(attrs, 0);
    }

    #[test]
    fn empty_element_parses() {
        let events: Vec<_> = parse_document(b"<a/>").collect::<Result<_, _>>().unwrap();
        assert_eq!(
            events,
            vec![
                NodeEvent::ElementStart { label: "a".into(), id: None },
                NodeEvent::ElementEnd { label: "a".into(), id: None },
            ]
        );
    }

    #[test]
    fn mismatched_tag_is_malformed() {
        let err = parse_document(b"<a><b></a>")
            .collect::<Result<Vec<_>, _>>()
            .unwrap_err();
        assert!(matches!(err, XmlError::MalformedXml { .. }), "{err}");
    }

    #[test]
    fn empty_input_is_empty_document() {
        let err = parse_document(b"  ").collect::<Result<Vec<_>, _>>().unwrap_err();
        assert!(matches!(err, XmlError::EmptyDocument));
    }

    #[test]
    fn d1_element_id_assignment() {
        let events = parse_with_ids(D1.as_bytes()).unwrap();
        let ids = element_ids(&events);
        let expected = [
            ("site", 1, 10, 1),
            ("asia", 2, 6, 2),
            ("item", 3, 3, 3),
            ("name", 4, 1, 4),
            ("desc", 5, 2, 4),
            ("item", 6, 5, 3),
            ("name", 7, 4, 4),
            ("europe", 8, 9, 2),
            ("item", 9, 8, 3),
            ("name", 10, 7, 4),
        ];
        assert_eq!(ids.len(), expected.len());
        for ((label, id), (el, pre, post, depth)) in ids.iter().zip(expected.iter()) {
            assert_eq!(label, el);
            assert_eq!(id.pre, *pre as u64, "pre of {el}");
            assert_eq!(id.post, *post as u64, "post of {el}");
            assert_eq!(id.depth, *depth as u32, "depth of {el}");
        }
    }

    #[test]
    fn single_element_id() {
        let events = parse_with_ids(b"<a/>").unwrap();
        let ids = element_ids(&events);
        assert_eq!(ids, vec![("a".to_string(), StructuralId::element(1, 1, 1))]);
    }

    #[test]
    fn ancestor_and_parent_checks() {
        let site = StructuralId::element(1, 10, 1);
        let asia = StructuralId::element(2, 6, 2);
        let item1 = StructuralId::element(3, 3, 3);
        let item2 = StructuralId::element(6, 5, 3);
        assert!(site.is_ancestor_of(&item1));
        assert!(!item1.is_ancestor_of(&item2));
        assert!(asia.is_parent_of(&item1));
        assert!(!site.is_parent_of(&item1));
    }

    #[test]
    fn element_pre_and_post_are_dense() {
        let events = parse_with_ids(D1.as_bytes()).unwrap();
        let ids = element_ids(&events);
        let mut pres: Vec<u64> = ids.iter().map(|(_, id)| id.pre).collect();
        let mut posts: Vec<u64> = ids.iter().map(|(_, id)| id.post).collect();
        pres.sort_unstable();
        posts.sort_unstable();
        assert_eq!(pres, (1..=10).collect::<Vec<_>>());
        assert_eq!(posts, (1..=10).collect::<Vec<_>>());
    }

    #[test]
    fn value_stamps_interleave_between_elements() {
        // <a x="1">t<b/>u</a>: attr and first text sit between a and b,
        // second text after b; all orders must agree with document order.
        let events = parse_with_ids(br#"<a x="1">t<b/>u</a>"#).unwrap();
        let mut keys = Vec::new();
        for ev in &events {
            match ev {
                NodeEvent::ElementStart { id: Some(id), label } => {
                    keys.push((id.element_key(), label.clone()))
                }
                NodeEvent::Attribute { id: Some(id), label, .. } => {
                    keys.push((id.value_key(), label.clone()))
                }
                NodeEvent::Text { id: Some(id), .. } => {
                    keys.push((id.value_key(), "#text".into()))
                }
                _ => {}
            }
        }
        let mut sorted = keys.clone();
        sorted.sort_by_key(|(k, _)| *k);
        assert_eq!(keys, sorted, "document order must agree with key order");
        let labels: Vec<&str> = keys.iter().map(|(_, l)| l.as_str()).collect();
        assert_eq!(labels, vec!["a", "@x", "#text", "b", "#text"]);
    }

    #[test]
    fn whitespace_only_text_dropped() {
        let events: Vec<_> = parse_document(b"<a>\n  <b/>  </a>")
            .collect::<Result<_, _>>()
            .unwrap();
        let (_, _, _, texts) = kinds(&events);
        assert_eq!(texts, 0);
    }

    #[test]
    fn entities_and_char_refs_decode() {
        let events: Vec<_> = parse_document(b"<a>x &amp; y &lt;z&gt; &#65;&#x42;</a>")
            .collect::<Result<_, _>>()
            .unwrap();
        match &events[1] {
            NodeEvent::Text { value, .. } => assert_eq!(value, "x & y <z> AB"),
            other => panic!("expected text, got {other:?}"),
        }
    }

    #[test]
    fn cdata_preserved_verbatim() {
        let events: Vec<_> = parse_document(b"<a>pre<![CDATA[<raw&>]]>post</a>")
            .collect::<Result<_, _>>()
            .unwrap();
        match &events[1] {
            NodeEvent::Text { value, .. } => assert_eq!(value, "pre<raw&>post"),
            other => panic!("expected text, got {other:?}"),
        }
    }

    #[test]
    fn comments_and_pis_dropped() {
        let events: Vec<_> =
            parse_document(b"<?xml version=\"1.0\"?><!-- c --><a><?pi data?><!--x--><b/></a>")
                .collect::<Result<_, _>>()
                .unwrap();
        let labels: Vec<&str> = events.iter().map(|e| e.label()).collect();
        assert_eq!(labels, vec!["a", "b", "b", "a"]);
    }

    #[test]
    fn attributes_precede_children() {
        let events: Vec<_> = parse_document(br#"<a b="1" c="2"><d/></a>"#)
            .collect::<Result<_, _>>()
            .unwrap();
        let labels: Vec<&str> = events.iter().map(|e| e.label()).collect();
        assert_eq!(labels, vec!["a", "@b", "@c", "d", "d", "a"]);
    }

    #[test]
    fn error_carries_byte_offset() {
        let err = parse_document(b"<a>&bogus;</a>")
            .collect::<Result<Vec<_>, _>>()
            .unwrap_err();
        match err {
            XmlError::MalformedXml { offset, .. } => assert_eq!(offset, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
