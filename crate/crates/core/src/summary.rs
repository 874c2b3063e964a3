//! The annotated path summary: build, encode, serialize, and query.
//!
//! A path summary is a tree with one node per distinct root-to-node label
//! path of the document. Each non-root node carries a child-cardinality
//! annotation relative to its parent path; the pre-computed encoding adds
//! cluster labels that answer chain-cardinality tests in constant time.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{SummaryError, XmlError};
use crate::ingest::NodeEvent;
use crate::varint;

/// Pre-order rank of a summary node; the root is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathId(pub u32);

impl PathId {
    fn index(self) -> usize {
        (self.0 - 1) as usize
    }
}

impl fmt::Display for PathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Child-cardinality fact on the edge above a summary node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Annotation {
    /// Every instance of the parent path has exactly one child on this path.
    One,
    /// Every instance has at least one child and some instance has several.
    Plus,
    /// Some instance of the parent path has no child on this path.
    Star,
}

impl Annotation {
    pub fn symbol(self) -> char {
        match self {
            Annotation::One => '1',
            Annotation::Plus => '+',
            Annotation::Star => '*',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Direct,
    Precomputed,
}

/// Serialization format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    XmlDirect,
    XmlPrecomputed,
    BinaryDirect,
    BinaryPrecomputed,
}

#[derive(Debug, Clone)]
struct SummaryNode {
    label: String,
    parent: Option<PathId>,
    annotation: Annotation,
    children: Vec<PathId>,
    depth: u32,
}

/// Labeled tree of the document's distinct simple paths.
///
/// Immutable after construction; safe to share across threads. The
/// annotation-probe counter used by tests is the only interior mutability.
pub struct PathSummary {
    nodes: Vec<SummaryNode>,
    encoding: Encoding,
    n1: Vec<u32>,
    nplus: Vec<u32>,
    subtree_end: Vec<u32>,
    tag_dictionary: Vec<String>,
    probe_visits: AtomicU64,
}

impl Clone for PathSummary {
    fn clone(&self) -> Self {
        PathSummary {
            nodes: self.nodes.clone(),
            encoding: self.encoding,
            n1: self.n1.clone(),
            nplus: self.nplus.clone(),
            subtree_end: self.subtree_end.clone(),
            tag_dictionary: self.tag_dictionary.clone(),
            probe_visits: AtomicU64::new(0),
        }
    }
}

impl fmt::Debug for PathSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PathSummary")
            .field("len", &self.nodes.len())
            .field("encoding", &self.encoding)
            .finish()
    }
}

/// Memory/shape counters gathered during a summary build.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildStats {
    /// Maximum number of simultaneously open element frames (document height).
    pub peak_open_frames: usize,
    /// Peak of summary nodes + open frames + per-frame child-count entries.
    pub peak_tracked_units: usize,
}

/// Per-tag fan-in plus the node-weighted median fan-in of the document.
#[derive(Debug, Clone)]
pub struct FanInReport {
    /// tag -> (number of distinct summary paths ending in the tag, node count).
    pub per_tag: BTreeMap<String, (u32, u64)>,
    /// Element + attribute node count.
    pub total_nodes: u64,
    /// Node-weighted average of per-tag fan-ins.
    pub median_fanin: f64,
}

struct Frame {
    path: usize,
    child_counts: HashMap<usize, u64>,
}

/// Aggregates per summary node used to derive the annotation.
#[derive(Default, Clone)]
struct NodeAgg {
    instances: u64,
    parent_instances_with: u64,
    max_per_instance: u64,
}

/// Incremental summary construction over a node-event stream.
pub struct SummaryBuilder {
    nodes: Vec<SummaryNode>,
    /// (parent index or usize::MAX for root, label) -> node index
    by_edge: HashMap<(usize, String), usize>,
    agg: Vec<NodeAgg>,
    stack: Vec<Frame>,
    tracked_entries: usize,
    stats: BuildStats,
}

impl Default for SummaryBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl SummaryBuilder {
    pub fn new() -> Self {
        SummaryBuilder {
            nodes: Vec::new(),
            by_edge: HashMap::new(),
            agg: Vec::new(),
            stack: Vec::new(),
            tracked_entries: 0,
            stats: BuildStats::default(),
        }
    }

    fn resolve(&mut self, parent: Option<usize>, label: &str) -> usize {
        let key = (parent.unwrap_or(usize::MAX), label.to_string());
        if let Some(&idx) = self.by_edge.get(&key) {
            return idx;
        }
        let idx = self.nodes.len();
        let depth = parent.map(|p| self.nodes[p].depth + 1).unwrap_or(1);
        self.nodes.push(SummaryNode {
            label: label.to_string(),
            parent: parent.map(|p| PathId(p as u32 + 1)),
            annotation: Annotation::One,
            children: Vec::new(),
            depth,
        });
        self.agg.push(NodeAgg::default());
        if let Some(p) = parent {
            self.nodes[p].children.push(PathId(idx as u32 + 1));
        }
        self.by_edge.insert(key, idx);
        idx
    }

    fn bump_child(&mut self, node: usize) {
        let frame = self.stack.last_mut().expect("value node outside any element");
        let entry = frame.child_counts.entry(node).or_insert(0);
        if *entry == 0 {
            self.tracked_entries += 1;
        }
        *entry += 1;
    }

    fn note_peak(&mut self) {
        let units = self.nodes.len() + self.stack.len() + self.tracked_entries;
        self.stats.peak_tracked_units = self.stats.peak_tracked_units.max(units);
        self.stats.peak_open_frames = self.stats.peak_open_frames.max(self.stack.len());
    }

    pub fn observe(&mut self, event: &NodeEvent) {
        match event {
            NodeEvent::ElementStart { label, .. } => {
                let parent = self.stack.last().map(|f| f.path);
                let node = self.resolve(parent, label);
                self.agg[node].instances += 1;
                if parent.is_some() {
                    self.bump_child(node);
                }
                self.stack.push(Frame { path: node, child_counts: HashMap::new() });
                self.note_peak();
            }
            NodeEvent::ElementEnd { .. } => {
                let frame = self.stack.pop().expect("well-nested event stream");
                self.tracked_entries -= frame.child_counts.len();
                for (child, count) in frame.child_counts {
                    let agg = &mut self.agg[child];
                    agg.parent_instances_with += 1;
                    agg.max_per_instance = agg.max_per_instance.max(count);
                }
            }
            NodeEvent::Attribute { label, .. } => {
                let parent = self.stack.last().map(|f| f.path);
                let node = self.resolve(parent, label);
                self.agg[node].instances += 1;
                self.bump_child(node);
                self.note_peak();
            }
            NodeEvent::Text { .. } => {
                let parent = self.stack.last().map(|f| f.path);
                let node = self.resolve(parent, "#text");
                self.agg[node].instances += 1;
                self.bump_child(node);
                self.note_peak();
            }
        }
    }

    pub fn stats(&self) -> BuildStats {
        self.stats
    }

    /// Finalizes annotations and renumbers nodes into canonical pre-order.
    pub fn finish(mut self) -> Result<PathSummary, SummaryError> {
        if self.nodes.is_empty() {
            return Err(SummaryError::Xml(XmlError::EmptyDocument));
        }
        for idx in 1..self.nodes.len() {
            let parent = self.nodes[idx].parent.unwrap().index();
            let parent_instances = self.agg[parent].instances;
            let agg = &self.agg[idx];
            self.nodes[idx].annotation = if agg.parent_instances_with < parent_instances {
                Annotation::Star
            } else if agg.max_per_instance <= 1 {
                Annotation::One
            } else {
                Annotation::Plus
            };
        }
        // Renumber into pre-order (children kept in first-appearance order).
        let n = self.nodes.len();
        let mut order = Vec::with_capacity(n);
        let mut dfs = vec![0usize];
        while let Some(idx) = dfs.pop() {
            order.push(idx);
            for child in self.nodes[idx].children.iter().rev() {
                dfs.push(child.index());
            }
        }
        let mut new_rank = vec![0u32; n];
        for (rank, &old) in order.iter().enumerate() {
            new_rank[old] = rank as u32 + 1;
        }
        let mut nodes = Vec::with_capacity(n);
        for &old in &order {
            let node = &self.nodes[old];
            nodes.push(SummaryNode {
                label: node.label.clone(),
                parent: node.parent.map(|p| PathId(new_rank[p.index()])),
                annotation: node.annotation,
                children: node.children.iter().map(|c| PathId(new_rank[c.index()])).collect(),
                depth: node.depth,
            });
        }
        Ok(PathSummary::from_nodes(nodes, Encoding::Direct, Vec::new(), Vec::new()))
    }
}

/// Builds a direct-encoded summary from an event stream.
pub fn build_summary<I, E>(events: I) -> Result<PathSummary, SummaryError>
where
    I: IntoIterator<Item = Result<NodeEvent, E>>,
    SummaryError: From<E>,
{
    let mut builder = SummaryBuilder::new();
    for ev in events {
        builder.observe(&ev?);
    }
    builder.finish()
}

impl PathSummary {
    fn from_nodes(
        nodes: Vec<SummaryNode>,
        encoding: Encoding,
        n1: Vec<u32>,
        nplus: Vec<u32>,
    ) -> Self {
        let n = nodes.len();
        let mut subtree_end = vec![0u32; n];
        // Pre-order ids make subtree extents computable right-to-left.
        for idx in (0..n).rev() {
            let mut end = idx as u32 + 1;
            for child in &nodes[idx].children {
                end = end.max(subtree_end[child.index()]);
            }
            subtree_end[idx] = end;
        }
        let mut tag_dictionary = Vec::new();
        let mut seen = HashMap::new();
        for node in &nodes {
            if !seen.contains_key(node.label.as_str()) {
                seen.insert(node.label.clone(), tag_dictionary.len());
                tag_dictionary.push(node.label.clone());
            }
        }
        PathSummary {
            nodes,
            encoding,
            n1,
            nplus,
            subtree_end,
            tag_dictionary,
            probe_visits: AtomicU64::new(0),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> PathId {
        PathId(1)
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn paths(&self) -> impl Iterator<Item = PathId> {
        (1..=self.nodes.len() as u32).map(PathId)
    }

    pub fn label(&self, p: PathId) -> &str {
        &self.nodes[p.index()].label
    }

    pub fn parent(&self, p: PathId) -> Option<PathId> {
        self.nodes[p.index()].parent
    }

    pub fn children(&self, p: PathId) -> &[PathId] {
        &self.nodes[p.index()].children
    }

    pub fn annotation(&self, p: PathId) -> Annotation {
        self.nodes[p.index()].annotation
    }

    /// Depth of the summary node; the root path has depth 1.
    pub fn depth(&self, p: PathId) -> u32 {
        self.nodes[p.index()].depth
    }

    pub fn height(&self) -> u32 {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn tag_dictionary(&self) -> &[String] {
        &self.tag_dictionary
    }

    /// True iff `px` equals `py` or is an ancestor of it in the summary tree.
    pub fn is_ancestor_or_self(&self, px: PathId, py: PathId) -> bool {
        px.0 <= py.0 && py.0 <= self.subtree_end[px.index()]
    }

    /// Cluster label lookups consulted by tests; counts summary-node visits
    /// made by `all1`/`all1orplus` since the last reset.
    pub fn probe_visits(&self) -> u64 {
        self.probe_visits.load(Ordering::Relaxed)
    }

    pub fn reset_probe_visits(&self) {
        self.probe_visits.store(0, Ordering::Relaxed);
    }

    fn check_chain(
        &self,
        px: PathId,
        py: PathId,
        allow_plus: bool,
    ) -> Result<bool, SummaryError> {
        if !self.is_ancestor_or_self(px, py) {
            return Err(SummaryError::NotAncestor { ancestor: px, descendant: py });
        }
        match self.encoding {
            Encoding::Precomputed => {
                self.probe_visits.fetch_add(2, Ordering::Relaxed);
                if allow_plus {
                    Ok(self.nplus[px.index()] == self.nplus[py.index()])
                } else {
                    Ok(self.n1[px.index()] == self.n1[py.index()])
                }
            }
            Encoding::Direct => {
                let mut cur = py;
                while cur != px {
                    self.probe_visits.fetch_add(1, Ordering::Relaxed);
                    let ok = match self.annotation(cur) {
                        Annotation::One => true,
                        Annotation::Plus => allow_plus,
                        Annotation::Star => false,
                    };
                    if !ok {
                        return Ok(false);
                    }
                    cur = self.parent(cur).expect("ancestor check bounds the walk");
                }
                Ok(true)
            }
        }
    }

    /// True iff every summary node strictly below `px` down to `py`
    /// (inclusive) is annotated One. `all1(p, p)` is true.
    pub fn all1(&self, px: PathId, py: PathId) -> Result<bool, SummaryError> {
        self.check_chain(px, py, false)
    }

    /// Like [`all1`](Self::all1) with {One, Plus} allowed.
    pub fn all1orplus(&self, px: PathId, py: PathId) -> Result<bool, SummaryError> {
        self.check_chain(px, py, true)
    }

    /// Computes the 1-partition and +-partition cluster labels.
    ///
    /// Direct annotations are retained; chain tests switch to constant-time
    /// cluster comparisons.
    pub fn precompute(mut self) -> PathSummary {
        let n = self.nodes.len();
        let mut uf1 = UnionFind::new(n);
        let mut ufp = UnionFind::new(n);
        for idx in 1..n {
            let parent = self.nodes[idx].parent.unwrap().index();
            match self.nodes[idx].annotation {
                Annotation::One => {
                    uf1.union(parent, idx);
                    ufp.union(parent, idx);
                }
                Annotation::Plus => {
                    ufp.union(parent, idx);
                }
                Annotation::Star => {}
            }
        }
        self.n1 = uf1.canonical_labels();
        self.nplus = ufp.canonical_labels();
        self.encoding = Encoding::Precomputed;
        self
    }

    /// 0-based cluster labels; only populated under the precomputed encoding.
    pub fn clusters(&self) -> (&[u32], &[u32]) {
        (&self.n1, &self.nplus)
    }

    /// Resolves a root-to-node label sequence to its path, if present.
    pub fn lookup(&self, labels: &[&str]) -> Option<PathId> {
        let mut iter = labels.iter();
        let first = iter.next()?;
        if self.nodes[0].label != *first {
            return None;
        }
        let mut cur = PathId(1);
        for label in iter {
            cur = *self
                .children(cur)
                .iter()
                .find(|c| self.label(**c) == *label)?;
        }
        Some(cur)
    }

    /// Root-to-node label sequence of a path.
    pub fn label_path(&self, p: PathId) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = Some(p);
        while let Some(c) = cur {
            out.push(self.label(c).to_string());
            cur = self.parent(c);
        }
        out.reverse();
        out
    }

    /// Emits a deterministic DOT graph, one node line per path.
    pub fn export_dot(&self) -> String {
        let mut out = String::from("digraph summary {\n");
        for p in self.paths() {
            out.push_str(&format!(
                "  {} [label=\"{}:{}[{}]\"];\n",
                p,
                p,
                self.label(p),
                self.annotation(p).symbol()
            ));
        }
        for p in self.paths() {
            for child in self.children(p) {
                out.push_str(&format!("  {} -> {};\n", p, child));
            }
        }
        out.push_str("}\n");
        out
    }

    /// Per-tag fan-in and the node-weighted median fan-in.
    ///
    /// `tag_counts` maps element/attribute tags to node counts; `#text`
    /// summary nodes are excluded from the report.
    pub fn fanin_report(
        &self,
        tag_counts: &BTreeMap<String, u64>,
    ) -> Result<FanInReport, SummaryError> {
        let mut per_tag: BTreeMap<String, (u32, u64)> = BTreeMap::new();
        for p in self.paths() {
            let label = self.label(p);
            if label == "#text" {
                continue;
            }
            let count = tag_counts.get(label).copied().unwrap_or(0);
            let entry = per_tag.entry(label.to_string()).or_insert((0, count));
            entry.0 += 1;
        }
        let total_nodes: u64 = per_tag.values().map(|(_, n)| *n).sum();
        if total_nodes == 0 {
            return Err(SummaryError::EmptyDocument);
        }
        let weighted: f64 = per_tag
            .values()
            .map(|(fin, n)| *fin as f64 * *n as f64)
            .sum();
        Ok(FanInReport {
            per_tag,
            total_nodes,
            median_fanin: weighted / total_nodes as f64,
        })
    }

    // ---- serialization ----------------------------------------------------

    /// Serializes in the requested format. Precomputed formats derive the
    /// cluster labels on the fly when the summary is direct-encoded.
    pub fn serialize(&self, format: Format) -> Vec<u8> {
        let owned;
        let with_clusters = match (format, self.encoding) {
            (Format::XmlPrecomputed | Format::BinaryPrecomputed, Encoding::Direct) => {
                owned = self.clone().precompute();
                &owned
            }
            _ => self,
        };
        match format {
            Format::BinaryDirect => with_clusters.to_binary(false),
            Format::BinaryPrecomputed => with_clusters.to_binary(true),
            Format::XmlDirect => with_clusters.to_xml(false).into_bytes(),
            Format::XmlPrecomputed => with_clusters.to_xml(true).into_bytes(),
        }
    }

    fn to_binary(&self, precomputed: bool) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"XSUM");
        out.push(0x01);
        out.push(if precomputed { 0x01 } else { 0x00 });
        let mut tag_index = HashMap::new();
        varint::write_u64(&mut out, self.tag_dictionary.len() as u64);
        for (i, label) in self.tag_dictionary.iter().enumerate() {
            tag_index.insert(label.as_str(), i as u64);
            varint::write_u64(&mut out, label.len() as u64);
            out.extend_from_slice(label.as_bytes());
        }
        varint::write_u64(&mut out, self.nodes.len() as u64);
        for (idx, node) in self.nodes.iter().enumerate() {
            varint::write_u64(&mut out, tag_index[node.label.as_str()]);
            varint::write_u64(&mut out, node.parent.map(|p| p.0 as u64).unwrap_or(0));
            out.push(match node.annotation {
                Annotation::One => 0,
                Annotation::Plus => 1,
                Annotation::Star => 2,
            });
            if precomputed {
                varint::write_u64(&mut out, self.n1[idx] as u64);
                varint::write_u64(&mut out, self.nplus[idx] as u64);
            }
        }
        out
    }

    fn to_xml(&self, precomputed: bool) -> String {
        let mut out = String::new();
        self.xml_node(PathId(1), precomputed, &mut out);
        out
    }

    fn xml_node(&self, p: PathId, precomputed: bool, out: &mut String) {
        let label = self.label(p);
        // `text` and `attr` element names are reserved for #text/@attr
        // summary nodes; literal tags of those names carry an `n` attribute.
        let (name, extra) = if let Some(attr_name) = label.strip_prefix('@') {
            ("attr".to_string(), format!(" name=\"{}\"", xml_escape(attr_name)))
        } else if label == "#text" {
            ("text".to_string(), String::new())
        } else if label == "text" || label == "attr" {
            (label.to_string(), format!(" n=\"{}\"", xml_escape(label)))
        } else {
            (label.to_string(), String::new())
        };
        out.push('<');
        out.push_str(&name);
        out.push_str(&extra);
        out.push_str(&format!(" a=\"{}\"", self.annotation(p).symbol()));
        if precomputed {
            out.push_str(&format!(" c1=\"{}\" cp=\"{}\"", self.n1[p.index()], self.nplus[p.index()]));
        }
        let children = self.children(p);
        if children.is_empty() {
            out.push_str("/>");
        } else {
            out.push('>');
            for child in children {
                self.xml_node(*child, precomputed, out);
            }
            out.push_str(&format!("</{name}>"));
        }
    }

    /// Reads back any of the four serialization formats.
    pub fn deserialize(bytes: &[u8]) -> Result<PathSummary, SummaryError> {
        if bytes.starts_with(b"XSUM") {
            Self::from_binary(bytes)
        } else if bytes.starts_with(b"<") {
            Self::from_xml(bytes)
        } else {
            Err(SummaryError::BadMagic)
        }
    }

    fn from_binary(bytes: &[u8]) -> Result<PathSummary, SummaryError> {
        let mut input = &bytes[4..];
        let map_io = |_: std::io::Error| SummaryError::TruncatedInput;
        let mut byte = [0u8; 1];
        use std::io::Read;
        input.read_exact(&mut byte).map_err(map_io)?;
        if byte[0] != 0x01 {
            return Err(SummaryError::UnsupportedVersion(byte[0]));
        }
        input.read_exact(&mut byte).map_err(map_io)?;
        let precomputed = byte[0] & 0x01 != 0;
        let tag_count = varint::read_u64(&mut input).map_err(map_io)?;
        let mut dict = Vec::with_capacity(tag_count as usize);
        for _ in 0..tag_count {
            let len = varint::read_u64(&mut input).map_err(map_io)? as usize;
            if input.len() < len {
                return Err(SummaryError::TruncatedInput);
            }
            let (head, rest) = input.split_at(len);
            let label = std::str::from_utf8(head)
                .map_err(|_| SummaryError::Malformed("label is not UTF-8".into()))?;
            dict.push(label.to_string());
            input = rest;
        }
        let count = varint::read_u64(&mut input).map_err(map_io)? as usize;
        if count == 0 {
            return Err(SummaryError::Malformed("empty summary".into()));
        }
        let mut nodes: Vec<SummaryNode> = Vec::with_capacity(count);
        let mut n1 = Vec::new();
        let mut nplus = Vec::new();
        for idx in 0..count {
            let tag = varint::read_u64(&mut input).map_err(map_io)? as usize;
            let parent = varint::read_u64(&mut input).map_err(map_io)?;
            input.read_exact(&mut byte).map_err(map_io)?;
            let annotation = match byte[0] {
                0 => Annotation::One,
                1 => Annotation::Plus,
                2 => Annotation::Star,
                other => {
                    return Err(SummaryError::Malformed(format!("bad annotation byte {other}")))
                }
            };
            if precomputed {
                n1.push(varint::read_u64(&mut input).map_err(map_io)? as u32);
                nplus.push(varint::read_u64(&mut input).map_err(map_io)? as u32);
            }
            let label = dict
                .get(tag)
                .ok_or_else(|| SummaryError::Malformed(format!("tag index {tag} out of range")))?
                .clone();
            let parent = if parent == 0 {
                if idx != 0 {
                    return Err(SummaryError::Malformed("non-root node without parent".into()));
                }
                None
            } else {
                if parent as usize > idx {
                    return Err(SummaryError::Malformed("parent id not smaller than node".into()));
                }
                Some(PathId(parent as u32))
            };
            let depth = parent.map(|p| nodes[p.index()].depth + 1).unwrap_or(1);
            nodes.push(SummaryNode { label, parent, annotation, children: Vec::new(), depth });
        }
        for idx in 1..count {
            let parent = nodes[idx].parent.unwrap().index();
            nodes[parent].children.push(PathId(idx as u32 + 1));
        }
        let encoding = if precomputed { Encoding::Precomputed } else { Encoding::Direct };
        Ok(PathSummary::from_nodes(nodes, encoding, n1, nplus))
    }

    fn from_xml(bytes: &[u8]) -> Result<PathSummary, SummaryError> {
        let mut state = XmlLoadState::default();
        // Deserializing reuses the document parser; summary XML is XML.
        for ev in crate::ingest::parse_document(bytes) {
            match ev? {
                NodeEvent::ElementStart { label, .. } => {
                    state.flush_pending()?;
                    let idx = state.nodes.len();
                    let parent = state.stack.last().map(|&p| PathId(p as u32 + 1));
                    let depth = state.stack.len() as u32 + 1;
                    state.nodes.push(SummaryNode {
                        label: String::new(),
                        parent,
                        annotation: Annotation::One,
                        children: Vec::new(),
                        depth,
                    });
                    if let Some(&p) = state.stack.last() {
                        state.nodes[p].children.push(PathId(idx as u32 + 1));
                    }
                    state.stack.push(idx);
                    state.pending = Some((label, idx));
                }
                NodeEvent::Attribute { label, value, .. } => {
                    state.attrs.push((label, value));
                }
                NodeEvent::ElementEnd { .. } => {
                    state.flush_pending()?;
                    state.stack.pop();
                }
                NodeEvent::Text { .. } => {
                    return Err(SummaryError::Malformed("unexpected text content".into()))
                }
            }
        }
        if state.nodes.is_empty() {
            return Err(SummaryError::Malformed("empty summary".into()));
        }
        if state.precomputed
            && (state.n1.len() != state.nodes.len() || state.nplus.len() != state.nodes.len())
        {
            return Err(SummaryError::Malformed("incomplete cluster labels".into()));
        }
        let encoding = if state.precomputed { Encoding::Precomputed } else { Encoding::Direct };
        Ok(PathSummary::from_nodes(state.nodes, encoding, state.n1, state.nplus))
    }
}

#[derive(Default)]
struct XmlLoadState {
    nodes: Vec<SummaryNode>,
    n1: Vec<u32>,
    nplus: Vec<u32>,
    precomputed: bool,
    stack: Vec<usize>,
    pending: Option<(String, usize)>,
    attrs: Vec<(String, String)>,
}

impl XmlLoadState {
    /// Applies the collected attributes of the element opened last.
    fn flush_pending(&mut self) -> Result<(), SummaryError> {
        let (name, idx) = match self.pending.take() {
            Some(p) => p,
            None => {
                self.attrs.clear();
                return Ok(());
            }
        };
        let mut label = name.clone();
        let mut explicit = false;
        let mut annotation = None;
        for (k, v) in self.attrs.drain(..) {
            match k.as_str() {
                "@name" => {
                    label = format!("@{v}");
                    explicit = true;
                }
                "@n" => {
                    label = v;
                    explicit = true;
                }
                "@a" => {
                    annotation = Some(match v.as_str() {
                        "1" => Annotation::One,
                        "+" => Annotation::Plus,
                        "*" => Annotation::Star,
                        other => {
                            return Err(SummaryError::Malformed(format!(
                                "bad annotation {other:?}"
                            )))
                        }
                    })
                }
                "@c1" => {
                    self.precomputed = true;
                    let v: u32 =
                        v.parse().map_err(|_| SummaryError::Malformed("bad c1".into()))?;
                    self.n1.push(v);
                }
                "@cp" => {
                    let v: u32 =
                        v.parse().map_err(|_| SummaryError::Malformed("bad cp".into()))?;
                    self.nplus.push(v);
                }
                _ => {}
            }
        }
        if name == "text" && !explicit {
            label = "#text".into();
        }
        let annotation =
            annotation.ok_or_else(|| SummaryError::Malformed("missing a attribute".into()))?;
        self.nodes[idx].label = label;
        self.nodes[idx].annotation = annotation;
        Ok(())
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            other => out.push(other),
        }
    }
    out
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb] = ra;
        }
    }

    /// 0-based cluster labels assigned by first occurrence in index order.
    fn canonical_labels(&mut self) -> Vec<u32> {
        let mut label_of_root = HashMap::new();
        let mut out = Vec::with_capacity(self.parent.len());
        for i in 0..self.parent.len() {
            let root = self.find(i);
            let next = label_of_root.len() as u32;
            let label = *label_of_root.entry(root).or_insert(next);
            out.push(label);
        }
        out
    }
}
