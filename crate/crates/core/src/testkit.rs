//! Test support: naive in-memory document tree, brute-force evaluators and
//! seeded random generators. These are the independent oracles the engine is
//! checked against; nothing here is used on the query path.
#![doc(hidden)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::error::XmlError;
use crate::ingest::{parse_with_ids, NodeEvent, StructuralId};
use crate::pattern::{Axis, PatternNode, QueryPattern, ValuePredicate};
use crate::summary::{PathId, PathSummary};

/// Fixture documents used throughout the test suites.
pub const D1: &str = "<site><asia><item><name>n1</name><desc/></item><item><name>n2</name></item></asia><europe><item><name>n3</name></item></europe></site>";
pub const D2: &str = "<a><b><c/><b><c/></b></b></a>";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomKind {
    Element,
    Attribute,
    Text,
}

#[derive(Debug, Clone)]
pub struct DomNode {
    pub kind: DomKind,
    pub label: String,
    pub value: Option<String>,
    pub id: StructuralId,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Arena-backed document tree; node 0 is the root element.
#[derive(Debug, Clone)]
pub struct Dom {
    pub nodes: Vec<DomNode>,
}

impl Dom {
    pub fn parse(bytes: &[u8]) -> Result<Dom, XmlError> {
        let events = parse_with_ids(bytes)?;
        let mut nodes: Vec<DomNode> = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        for ev in events {
            match ev {
                NodeEvent::ElementStart { label, id } => {
                    let idx = nodes.len();
                    nodes.push(DomNode {
                        kind: DomKind::Element,
                        label,
                        value: None,
                        id: id.unwrap(),
                        parent: stack.last().copied(),
                        children: Vec::new(),
                    });
                    if let Some(&p) = stack.last() {
                        nodes[p].children.push(idx);
                    }
                    stack.push(idx);
                }
                NodeEvent::ElementEnd { id, .. } => {
                    let idx = stack.pop().unwrap();
                    nodes[idx].id = id.unwrap();
                }
                NodeEvent::Attribute { label, id, value } => {
                    let idx = nodes.len();
                    let parent = *stack.last().unwrap();
                    nodes.push(DomNode {
                        kind: DomKind::Attribute,
                        label,
                        value: Some(value),
                        id: id.unwrap(),
                        parent: Some(parent),
                        children: Vec::new(),
                    });
                    nodes[parent].children.push(idx);
                }
                NodeEvent::Text { id, value } => {
                    let idx = nodes.len();
                    let parent = *stack.last().unwrap();
                    nodes.push(DomNode {
                        kind: DomKind::Text,
                        label: "#text".into(),
                        value: Some(value),
                        id: id.unwrap(),
                        parent: Some(parent),
                        children: Vec::new(),
                    });
                    nodes[parent].children.push(idx);
                }
            }
        }
        Ok(Dom { nodes })
    }

    pub fn root(&self) -> usize {
        0
    }

    /// True iff `a` is a proper ancestor of `b`, by parent chain.
    pub fn tree_ancestor(&self, a: usize, b: usize) -> bool {
        let mut cur = self.nodes[b].parent;
        while let Some(p) = cur {
            if p == a {
                return true;
            }
            cur = self.nodes[p].parent;
        }
        false
    }

    /// Root-to-node label path.
    pub fn label_path(&self, idx: usize) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = Some(idx);
        while let Some(i) = cur {
            out.push(self.nodes[i].label.clone());
            cur = self.nodes[i].parent;
        }
        out.reverse();
        out
    }

    /// Concatenation of an element's direct text children; the node's own
    /// value for text and attribute nodes. `None` when there is no text.
    pub fn text_value(&self, idx: usize) -> Option<String> {
        let node = &self.nodes[idx];
        match node.kind {
            DomKind::Text | DomKind::Attribute => node.value.clone(),
            DomKind::Element => {
                let mut out = String::new();
                let mut any = false;
                for &c in &node.children {
                    if self.nodes[c].kind == DomKind::Text {
                        out.push_str(self.nodes[c].value.as_deref().unwrap_or(""));
                        any = true;
                    }
                }
                any.then_some(out)
            }
        }
    }

    /// Canonical serialization of the subtree rooted at `idx`: explicit end
    /// tags, attributes in document order, built-in entities escaped, no
    /// added whitespace. Iterative; safe on very deep documents.
    pub fn serialize_subtree(&self, idx: usize) -> String {
        enum Step {
            Open(usize),
            Close(usize),
        }
        let mut out = String::new();
        let mut stack = vec![Step::Open(idx)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Open(i) => {
                    let node = &self.nodes[i];
                    match node.kind {
                        DomKind::Text => out.push_str(&escape_text(node.value.as_ref().unwrap())),
                        DomKind::Attribute => {}
                        DomKind::Element => {
                            out.push('<');
                            out.push_str(&node.label);
                            for &c in &node.children {
                                if self.nodes[c].kind == DomKind::Attribute {
                                    out.push(' ');
                                    out.push_str(&self.nodes[c].label[1..]);
                                    out.push_str("=\"");
                                    out.push_str(&escape_text(
                                        self.nodes[c].value.as_ref().unwrap(),
                                    ));
                                    out.push('"');
                                }
                            }
                            out.push('>');
                            stack.push(Step::Close(i));
                            for &c in node.children.iter().rev() {
                                if self.nodes[c].kind != DomKind::Attribute {
                                    stack.push(Step::Open(c));
                                }
                            }
                        }
                    }
                }
                Step::Close(i) => {
                    out.push_str("</");
                    out.push_str(&self.nodes[i].label);
                    out.push('>');
                }
            }
        }
        out
    }
}

pub fn escape_text(s: &str) -> String {
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

// ---- naive pattern evaluation ----------------------------------------------

/// One result row of the naive evaluator: per returned pattern node (in
/// pattern pre-order), the bound node's id and its value when it has one.
pub type OracleRow = Vec<Option<(StructuralId, Option<String>)>>;

/// Evaluates a pattern over the document tree by exhaustive recursion.
/// Returns deduplicated rows sorted by the first returned column.
pub fn evaluate_pattern(dom: &Dom, pattern: &QueryPattern) -> Vec<OracleRow> {
    let flat = pattern.flatten();
    let returned: Vec<usize> = flat
        .iter()
        .enumerate()
        .filter(|(_, (_, n))| n.returned)
        .map(|(i, _)| i)
        .collect();

    fn label_ok(node: &PatternNode, dom: &Dom, idx: usize) -> bool {
        node.matches_label(&dom.nodes[idx].label)
    }

    fn predicate_ok(node: &PatternNode, dom: &Dom, idx: usize) -> bool {
        match &node.predicate {
            None => true,
            Some(pred) => match dom.text_value(idx) {
                None => false,
                Some(v) => match pred {
                    ValuePredicate::Eq(x) => &v == x,
                    ValuePredicate::Contains(x) => v.contains(x),
                },
            },
        }
    }

    /// All bindings of `node`'s subtree given that `node` binds `idx`;
    /// each binding maps flat pattern indices to dom indices.
    fn matches_at(
        dom: &Dom,
        flat: &[(Option<usize>, &PatternNode)],
        flat_idx: usize,
        idx: usize,
        out: &mut Vec<BTreeMap<usize, usize>>,
    ) -> bool {
        let (_, node) = flat[flat_idx];
        if !label_ok(node, dom, idx) || !predicate_ok(node, dom, idx) {
            return false;
        }
        let mut partials: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::from([(flat_idx, idx)])];
        let mut child_flat = flat_idx + 1;
        for child in &node.children {
            let candidates = candidates_under(dom, idx, child.axis);
            let mut child_bindings: Vec<BTreeMap<usize, usize>> = Vec::new();
            for c in candidates {
                matches_at(dom, flat, child_flat, c, &mut child_bindings);
            }
            if child_bindings.is_empty() {
                if !child.optional {
                    return false;
                }
            } else {
                let mut next = Vec::new();
                for base in &partials {
                    for cb in &child_bindings {
                        let mut merged = base.clone();
                        merged.extend(cb.iter().map(|(k, v)| (*k, *v)));
                        next.push(merged);
                    }
                }
                partials = next;
            }
            child_flat += subtree_size(child);
        }
        out.extend(partials);
        true
    }

    fn subtree_size(node: &PatternNode) -> usize {
        1 + node.children.iter().map(subtree_size).sum::<usize>()
    }

    fn candidates_under(dom: &Dom, idx: usize, axis: Axis) -> Vec<usize> {
        match axis {
            Axis::Child => dom.nodes[idx].children.clone(),
            Axis::Desc => {
                let mut out = Vec::new();
                let mut stack = dom.nodes[idx].children.clone();
                while let Some(c) = stack.pop() {
                    out.push(c);
                    stack.extend(dom.nodes[c].children.iter().copied());
                }
                out.sort_unstable();
                out
            }
        }
    }

    let root_candidates: Vec<usize> = match pattern.root().axis {
        Axis::Child => vec![dom.root()],
        Axis::Desc => (0..dom.nodes.len()).collect(),
    };
    let mut bindings: Vec<BTreeMap<usize, usize>> = Vec::new();
    for c in root_candidates {
        matches_at(dom, &flat, 0, c, &mut bindings);
    }

    let mut rows: BTreeSet<Vec<Option<(u64, Option<String>)>>> = BTreeSet::new();
    let mut id_rows: Vec<OracleRow> = Vec::new();
    for binding in bindings {
        let row: OracleRow = returned
            .iter()
            .map(|flat_idx| {
                binding.get(flat_idx).map(|&dom_idx| {
                    let node = &dom.nodes[dom_idx];
                    let value = match node.kind {
                        DomKind::Element => None,
                        _ => node.value.clone(),
                    };
                    (node.id, value)
                })
            })
            .collect();
        let key: Vec<Option<(u64, Option<String>)>> = row
            .iter()
            .map(|c| c.as_ref().map(|(id, v)| (id.pre, v.clone())))
            .collect();
        if rows.insert(key) {
            id_rows.push(row);
        }
    }
    id_rows.sort_by(|a, b| {
        let key = |r: &OracleRow| -> Vec<Option<u64>> {
            r.iter().map(|c| c.as_ref().map(|(id, _)| id.pre)).collect()
        };
        key(a).cmp(&key(b))
    });
    id_rows
}

// ---- relevant-path oracle ----------------------------------------------------

/// One relevant-path tuple: pattern node index (pre-order) -> path.
pub type PathTuple = BTreeMap<usize, PathId>;

/// Exhaustive relevant-path computation straight from the definitions:
/// enumerate all valid pattern-node-to-path assignments, then apply the
/// trivial/useless pruning rules by direct definition. Independent of the
/// streaming stack algorithm.
pub fn oracle_relevant_paths(summary: &PathSummary, pattern: &QueryPattern) -> BTreeSet<PathTuple> {
    let flat = pattern.flatten();

    fn edge_ok(summary: &PathSummary, axis: Axis, parent: PathId, child: PathId) -> bool {
        match axis {
            Axis::Child => summary.parent(child) == Some(parent),
            Axis::Desc => parent != child && summary.is_ancestor_or_self(parent, child),
        }
    }

    /// All assignments of the subtree rooted at `flat_idx` given the node
    /// binds `path`. Empty result means the binding is invalid.
    fn assignments_at(
        summary: &PathSummary,
        flat: &[(Option<usize>, &PatternNode)],
        flat_idx: usize,
        path: PathId,
    ) -> Vec<PathTuple> {
        let (_, node) = flat[flat_idx];
        if !node.matches_label(summary.label(path)) {
            return Vec::new();
        }
        let mut partials: Vec<PathTuple> = vec![BTreeMap::from([(flat_idx, path)])];
        let mut child_flat = flat_idx + 1;
        for child in &node.children {
            let mut child_assignments: Vec<PathTuple> = Vec::new();
            for candidate in summary.paths() {
                if edge_ok(summary, child.axis, path, candidate) {
                    child_assignments.extend(assignments_at(summary, flat, child_flat, candidate));
                }
            }
            if child_assignments.is_empty() {
                if !child.optional {
                    return Vec::new();
                }
            } else {
                let mut next = Vec::new();
                for base in &partials {
                    for ca in &child_assignments {
                        let mut merged = base.clone();
                        merged.extend(ca.iter().map(|(k, v)| (*k, *v)));
                        next.push(merged);
                    }
                }
                partials = next;
            }
            child_flat += flat_subtree_size(flat, child_flat);
        }
        partials
    }

    fn flat_subtree_size(flat: &[(Option<usize>, &PatternNode)], flat_idx: usize) -> usize {
        fn size(node: &PatternNode) -> usize {
            1 + node.children.iter().map(size).sum::<usize>()
        }
        size(flat[flat_idx].1)
    }

    let mut assignments: Vec<PathTuple> = Vec::new();
    for candidate in summary.paths() {
        let anchored = match pattern.root().axis {
            Axis::Child => summary.depth(candidate) == 1,
            Axis::Desc => true,
        };
        if anchored {
            assignments.extend(assignments_at(summary, &flat, 0, candidate));
        }
    }

    // Pattern-descendant relation over flat indices.
    let descendants_of = |idx: usize| -> Vec<usize> {
        let size = {
            fn size(node: &PatternNode) -> usize {
                1 + node.children.iter().map(size).sum::<usize>()
            }
            size(flat[idx].1)
        };
        (idx + 1..idx + size).collect()
    };

    // Trivial pruning, bottom-up over pattern nodes. A (node, path) pair is
    // trivial only against every parent path it ever occurs with.
    let mut trivial: BTreeSet<(usize, PathId)> = BTreeSet::new();
    for idx in (0..flat.len()).rev() {
        let (parent_idx, node) = flat[idx];
        if !node.existential || node.predicate.is_some() {
            continue;
        }
        let paths: BTreeSet<PathId> =
            assignments.iter().filter_map(|a| a.get(&idx)).copied().collect();
        'paths: for p in paths {
            for a in &assignments {
                if a.get(&idx) != Some(&p) {
                    continue;
                }
                for d in descendants_of(idx) {
                    if let Some(dp) = a.get(&d) {
                        if !trivial.contains(&(d, *dp)) {
                            continue 'paths;
                        }
                    }
                }
                let parent_path = parent_idx.and_then(|pi| a.get(&pi)).copied();
                let chain_ok = match parent_path {
                    Some(pp) => summary.all1orplus(pp, p).unwrap_or(false),
                    None => summary.all1orplus(summary.root(), p).unwrap_or(false),
                };
                if !chain_ok {
                    continue 'paths;
                }
            }
            trivial.insert((idx, p));
        }
    }
    for a in &mut assignments {
        let to_drop: Vec<usize> = a
            .iter()
            .filter(|(idx, p)| trivial.contains(&(**idx, **p)))
            .map(|(idx, _)| *idx)
            .collect();
        for idx in to_drop {
            a.remove(&idx);
            for d in descendants_of(idx) {
                a.remove(&d);
            }
        }
    }

    // Useless pruning: non-returned, non-existential, non-optional nodes
    // whose binding is determined by an all-One chain from every parent path
    // (or from the summary root for the topmost node).
    let mut useless: BTreeSet<(usize, PathId)> = BTreeSet::new();
    for idx in 0..flat.len() {
        let (parent_idx, node) = flat[idx];
        if node.returned || node.existential || node.optional || node.predicate.is_some() {
            continue;
        }
        let paths: BTreeSet<PathId> =
            assignments.iter().filter_map(|a| a.get(&idx)).copied().collect();
        'paths: for p in paths {
            for a in &assignments {
                if a.get(&idx) != Some(&p) {
                    continue;
                }
                let parent_path = parent_idx.and_then(|pi| a.get(&pi)).copied();
                let chain_ok = match parent_path {
                    Some(pp) => summary.all1(pp, p).unwrap_or(false),
                    None => summary.all1(summary.root(), p).unwrap_or(false),
                };
                if !chain_ok {
                    continue 'paths;
                }
            }
            useless.insert((idx, p));
        }
    }
    for a in &mut assignments {
        let to_drop: Vec<usize> = a
            .iter()
            .filter(|(idx, p)| useless.contains(&(**idx, **p)))
            .map(|(idx, _)| *idx)
            .collect();
        for idx in to_drop {
            a.remove(&idx);
        }
    }

    assignments.into_iter().filter(|a| !a.is_empty()).collect()
}

// ---- random generators -------------------------------------------------------

/// Deterministic random document; recursion-friendly labels drawn from a
/// small alphabet so summaries stay moderate.
pub fn random_document<R: Rng>(rng: &mut R, max_nodes: usize) -> String {
    let tags = ["a", "b", "c", "d", "item", "name"];
    let mut out = String::new();
    let mut budget = max_nodes.max(1);
    fn emit<R: Rng>(
        rng: &mut R,
        out: &mut String,
        tags: &[&str],
        depth: usize,
        budget: &mut usize,
    ) {
        let tag = tags[rng.gen_range(0..tags.len())];
        *budget = budget.saturating_sub(1);
        out.push('<');
        out.push_str(tag);
        if rng.gen_bool(0.2) {
            out.push_str(&format!(" id=\"{}\"", rng.gen_range(0..5)));
            *budget = budget.saturating_sub(1);
        }
        out.push('>');
        if rng.gen_bool(0.35) {
            out.push_str(&format!("t{}", rng.gen_range(0..4)));
            *budget = budget.saturating_sub(1);
        }
        if depth < 8 {
            let children = rng.gen_range(0..4);
            for _ in 0..children {
                if *budget == 0 {
                    break;
                }
                emit(rng, out, tags, depth + 1, budget);
            }
        }
        out.push_str("</");
        out.push_str(tag);
        out.push('>');
    }
    out.push_str("<root>");
    budget = budget.saturating_sub(1);
    while budget > 0 && rng.gen_bool(0.9) {
        emit(rng, &mut out, &tags, 1, &mut budget);
        if rng.gen_bool(0.3) {
            break;
        }
    }
    out.push_str("</root>");
    out
}

/// Deterministic random pattern with labels drawn from `labels`; satisfies
/// the pattern invariants by construction.
pub fn random_pattern<R: Rng>(rng: &mut R, labels: &[String], max_nodes: usize) -> QueryPattern {
    fn gen_node<R: Rng>(
        rng: &mut R,
        labels: &[String],
        left: &mut usize,
        depth: usize,
        under_existential: bool,
        under_optional: bool,
    ) -> PatternNode {
        *left -= 1;
        let label = if rng.gen_bool(0.08) {
            "*".to_string()
        } else {
            labels[rng.gen_range(0..labels.len())].clone()
        };
        let axis = if rng.gen_bool(0.6) { Axis::Desc } else { Axis::Child };
        let mut node = PatternNode {
            label,
            axis,
            optional: false,
            existential: false,
            returned: false,
            predicate: None,
            children: Vec::new(),
        };
        if under_existential {
            if rng.gen_bool(0.8) {
                node.existential = true;
            } else {
                node.optional = true;
            }
        } else {
            match rng.gen_range(0..10) {
                0..=1 => node.existential = true,
                2 => node.optional = true,
                3..=6 => node.returned = true,
                _ => {}
            }
        }
        if node.optional && !node.existential && rng.gen_bool(0.5) {
            node.returned = true;
        }
        if node.returned && (node.existential || (under_optional && !node.optional)) {
            node.returned = false;
        }
        if node.existential && rng.gen_bool(0.25) {
            node.predicate = Some(if rng.gen_bool(0.5) {
                ValuePredicate::Eq(format!("t{}", rng.gen_range(0..4)))
            } else {
                ValuePredicate::Contains("t".to_string())
            });
        }
        if depth < 3 {
            while *left > 0 && node.children.len() < 3 && rng.gen_bool(0.45) {
                let child = gen_node(
                    rng,
                    labels,
                    left,
                    depth + 1,
                    under_existential || node.existential,
                    under_optional || node.optional,
                );
                node.children.push(child);
            }
        }
        node
    }

    loop {
        let mut left = rng.gen_range(1..=max_nodes.max(1));
        let mut root = gen_node(rng, labels, &mut left, 0, false, false);
        // Keep at least one returned node so plans have an output column.
        if !has_returned(&root) {
            if root.existential {
                root.existential = false;
            }
            root.returned = true;
        }
        if let Ok(p) = QueryPattern::new(root) {
            return p;
        }
    }
}

fn has_returned(node: &PatternNode) -> bool {
    node.returned || node.children.iter().any(has_returned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn region_test_agrees_with_tree_ancestor() {
        for doc in [D1, D2, r#"<a x="1">t<b><c/>u</b></a>"#] {
            let dom = Dom::parse(doc.as_bytes()).unwrap();
            let elements: Vec<usize> = (0..dom.nodes.len())
                .filter(|&i| dom.nodes[i].kind == DomKind::Element)
                .collect();
            for &a in &elements {
                for &b in &elements {
                    if a == b {
                        continue;
                    }
                    assert_eq!(
                        dom.nodes[a].id.is_ancestor_of(&dom.nodes[b].id),
                        dom.tree_ancestor(a, b),
                        "{doc}: {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn region_test_agrees_on_random_documents() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let doc = random_document(&mut rng, 120);
            let dom = Dom::parse(doc.as_bytes()).unwrap();
            let elements: Vec<usize> = (0..dom.nodes.len())
                .filter(|&i| dom.nodes[i].kind == DomKind::Element)
                .collect();
            for &a in &elements {
                for &b in &elements {
                    if a != b {
                        assert_eq!(
                            dom.nodes[a].id.is_ancestor_of(&dom.nodes[b].id),
                            dom.tree_ancestor(a, b)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn serializer_canonical_form() {
        let dom = Dom::parse(D1.as_bytes()).unwrap();
        assert_eq!(dom.serialize_subtree(0), D1.replace("<desc/>", "<desc></desc>"));
        let dom = Dom::parse(br#"<a k="x&amp;y">a&lt;b</a>"#).unwrap();
        assert_eq!(dom.serialize_subtree(0), r#"<a k="x&amp;y">a&lt;b</a>"#);
    }

    #[test]
    fn naive_evaluation_examples() {
        let dom = Dom::parse(D1.as_bytes()).unwrap();
        let rows = evaluate_pattern(&dom, &crate::pattern::parse_xpath("//item").unwrap());
        let pres: Vec<u64> = rows.iter().map(|r| r[0].as_ref().unwrap().0.pre).collect();
        assert_eq!(pres, vec![3, 6, 9]);
        let rows =
            evaluate_pattern(&dom, &crate::pattern::parse_xpath("//item[name='n1']").unwrap());
        let pres: Vec<u64> = rows.iter().map(|r| r[0].as_ref().unwrap().0.pre).collect();
        assert_eq!(pres, vec![3]);
        let rows =
            evaluate_pattern(&dom, &crate::pattern::parse_xpath("//asia//item/name").unwrap());
        let pres: Vec<u64> = rows.iter().map(|r| r[0].as_ref().unwrap().0.pre).collect();
        assert_eq!(pres, vec![4, 7]);
        let rows = evaluate_pattern(&dom, &crate::pattern::parse_xpath("//item[desc]").unwrap());
        let pres: Vec<u64> = rows.iter().map(|r| r[0].as_ref().unwrap().0.pre).collect();
        assert_eq!(pres, vec![3]);
    }

    #[test]
    fn oracle_relevant_paths_on_fixtures() {
        let summary =
            crate::summary::build_summary(crate::ingest::parse_document(D1.as_bytes())).unwrap();
        // //asia//item/name: asia useless, item {3}, name {4}.
        let q = crate::pattern::parse_xpath("//asia//item/name").unwrap();
        let tuples = oracle_relevant_paths(&summary, &q);
        let expected: BTreeSet<PathTuple> =
            [BTreeMap::from([(1, PathId(3)), (2, PathId(4))])].into();
        assert_eq!(tuples, expected);
        // //item[name]: both name paths trivial; items 3 and 8 remain.
        let q = crate::pattern::parse_xpath("//item[name]").unwrap();
        let tuples = oracle_relevant_paths(&summary, &q);
        let expected: BTreeSet<PathTuple> = [
            BTreeMap::from([(0, PathId(3))]),
            BTreeMap::from([(0, PathId(8))]),
        ]
        .into();
        assert_eq!(tuples, expected);
        // //item[desc]: only the asian item path qualifies; desc is kept
        // because its edge is Star.
        let q = crate::pattern::parse_xpath("//item[desc]").unwrap();
        let tuples = oracle_relevant_paths(&summary, &q);
        let expected: BTreeSet<PathTuple> =
            [BTreeMap::from([(0, PathId(3)), (1, PathId(6))])].into();
        assert_eq!(tuples, expected);
        // Value predicate blocks triviality.
        let q = crate::pattern::parse_xpath("//item[name='n1']").unwrap();
        let tuples = oracle_relevant_paths(&summary, &q);
        let expected: BTreeSet<PathTuple> = [
            BTreeMap::from([(0, PathId(3)), (1, PathId(4))]),
            BTreeMap::from([(0, PathId(8)), (1, PathId(9))]),
        ]
        .into();
        assert_eq!(tuples, expected);
    }

    #[test]
    fn oracle_relevant_paths_d2_chain() {
        let summary =
            crate::summary::build_summary(crate::ingest::parse_document(D2.as_bytes())).unwrap();
        // All-returned //b//c pattern: no pruning applies.
        let q = crate::pattern::parse_pattern(
            "(node tag=b axis=desc ret (node tag=c axis=desc ret))",
        )
        .unwrap();
        let tuples = oracle_relevant_paths(&summary, &q);
        let expected: BTreeSet<PathTuple> = [
            BTreeMap::from([(0, PathId(2)), (1, PathId(3))]),
            BTreeMap::from([(0, PathId(2)), (1, PathId(5))]),
            BTreeMap::from([(0, PathId(4)), (1, PathId(5))]),
        ]
        .into();
        assert_eq!(tuples, expected);
    }
}
