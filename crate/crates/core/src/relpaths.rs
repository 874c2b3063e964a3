//! Streaming computation of minimal relevant path sets.
//!
//! Phase 1 walks the summary depth-first once, maintaining one stack per
//! pattern node. Entries link to the pattern parent's stack and, through
//! `self_parent` pointers, to open same-stack ancestors; the pointers encode
//! combinatorially many path combinations in O(|PS|*|q|) entries. Phase 2
//! prunes trivial existential entries and useless unreturned entries using
//! the summary's cardinality annotations.

use std::collections::BTreeSet;

use crate::error::RelPathError;
use crate::pattern::{Axis, QueryPattern, ValuePredicate};
use crate::summary::{PathId, PathSummary};
use crate::testkit::PathTuple;

/// Flattened pattern node (pre-order index space).
#[derive(Debug, Clone)]
pub struct FlatNode {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub label: String,
    pub axis: Axis,
    pub optional: bool,
    pub existential: bool,
    pub returned: bool,
    pub predicate: Option<ValuePredicate>,
}

impl FlatNode {
    pub fn matches_label(&self, label: &str) -> bool {
        match self.label.as_str() {
            "*" => !label.starts_with('@') && label != "#text",
            other => other == label,
        }
    }
}

fn flatten(pattern: &QueryPattern) -> Vec<FlatNode> {
    pattern
        .flatten()
        .into_iter()
        .map(|(parent, node)| FlatNode {
            parent,
            children: Vec::new(),
            label: node.label.clone(),
            axis: node.axis,
            optional: node.optional,
            existential: node.existential,
            returned: node.returned,
            predicate: node.predicate.clone(),
        })
        .collect::<Vec<_>>()
        .tap_fill_children()
}

trait TapFillChildren {
    fn tap_fill_children(self) -> Self;
}

impl TapFillChildren for Vec<FlatNode> {
    fn tap_fill_children(mut self) -> Self {
        for i in 0..self.len() {
            if let Some(p) = self[i].parent {
                self[p].children.push(i);
            }
        }
        self
    }
}

/// Reference to an entry: (pattern node index, position in its stack).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntryRef {
    pub node: usize,
    pub idx: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryState {
    Live,
    /// Dropped in phase 1 for lacking a required descendant.
    Discarded,
    /// Erased in phase 2: binding guaranteed, shortcircuited in tuples.
    Useless,
    /// Erased in phase 2: existence guaranteed, subtree dropped.
    Trivial,
}

/// One stack entry; stacks are append-only, erasures are state changes.
#[derive(Debug, Clone)]
pub struct StackEntry {
    pub path: PathId,
    pub parent: Option<EntryRef>,
    pub self_parent: Option<usize>,
    pub open: bool,
    pub state: EntryState,
    /// Per-pattern-child-slot lists of entries in the child stacks.
    pub children: Vec<Vec<EntryRef>>,
    /// Same-stack entries whose `self_parent` points here.
    self_children: Vec<usize>,
}

/// Counters gathered during phase 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct MatchStats {
    pub entries_pushed: usize,
    /// Peak number of simultaneously open summary frames in the traversal.
    pub peak_open_frames: usize,
}

/// Result of the relevant-path computation for one pattern.
pub struct RelevantPathForest {
    flat: Vec<FlatNode>,
    stacks: Vec<Vec<StackEntry>>,
    unsatisfiable: bool,
    minimized: bool,
    stats: MatchStats,
}

/// Shared working state of phase 1.
struct MatchState<'a> {
    summary: &'a PathSummary,
    flat: &'a [FlatNode],
    stacks: Vec<Vec<StackEntry>>,
    /// Per stack, indices of currently open entries (innermost last).
    open: Vec<Vec<usize>>,
    stats: MatchStats,
}

impl<'a> MatchState<'a> {
    fn new(summary: &'a PathSummary, flat: &'a [FlatNode]) -> Self {
        MatchState {
            summary,
            flat,
            stacks: vec![Vec::new(); flat.len()],
            open: vec![Vec::new(); flat.len()],
            stats: MatchStats::default(),
        }
    }

    /// Push hook, run on first visit of each summary node. Pattern nodes are
    /// scanned children-first so a candidate never links to an entry pushed
    /// at the same path.
    fn begin_summary_node(&mut self, path: PathId) {
        let label = self.summary.label(path);
        let depth = self.summary.depth(path);
        for n in (0..self.flat.len()).rev() {
            let node = &self.flat[n];
            if !node.matches_label(label) {
                continue;
            }
            let parent_ref = match node.parent {
                None => {
                    let anchored = match node.axis {
                        Axis::Child => depth == 1,
                        Axis::Desc => true,
                    };
                    if !anchored {
                        continue;
                    }
                    None
                }
                Some(parent_node) => {
                    let Some(&top_idx) = self.open[parent_node].last() else {
                        continue;
                    };
                    let top_path = self.stacks[parent_node][top_idx].path;
                    let level_ok = match node.axis {
                        Axis::Child => depth == self.summary.depth(top_path) + 1,
                        Axis::Desc => depth > self.summary.depth(top_path),
                    };
                    if !level_ok {
                        continue;
                    }
                    Some(EntryRef { node: parent_node, idx: top_idx })
                }
            };
            let self_parent = self.open[n].last().copied();
            let idx = self.stacks[n].len();
            self.stacks[n].push(StackEntry {
                path,
                parent: parent_ref,
                self_parent,
                open: true,
                state: EntryState::Live,
                children: vec![Vec::new(); node.children.len()],
                self_children: Vec::new(),
            });
            self.stats.entries_pushed += 1;
            if let Some(sp) = self_parent {
                self.stacks[n][sp].self_children.push(idx);
            }
            if let Some(pref) = parent_ref {
                let slot = self.flat[pref.node]
                    .children
                    .iter()
                    .position(|&c| c == n)
                    .expect("child slot exists");
                self.stacks[pref.node][pref.idx].children[slot].push(EntryRef { node: n, idx });
            }
            self.open[n].push(idx);
        }
    }

    /// Pop hook, run when the traversal leaves each summary node: closes the
    /// entries created there and discards those missing a required child.
    fn end_summary_node(&mut self, path: PathId) {
        for n in (0..self.flat.len()).rev() {
            let Some(&idx) = self.open[n].last() else { continue };
            if self.stacks[n][idx].path != path {
                continue;
            }
            self.open[n].pop();
            self.stacks[n][idx].open = false;
            let mut missing = false;
            for (slot, &child_node) in self.flat[n].children.iter().enumerate() {
                if self.flat[child_node].optional {
                    continue;
                }
                if !self.has_live_child(n, idx, slot, self.flat[child_node].axis) {
                    missing = true;
                    break;
                }
            }
            if missing {
                self.discard(EntryRef { node: n, idx });
            }
        }
    }

    /// Entries of the same stack whose self-parent chain reaches `idx`;
    /// erased entries relay the chain but are not returned.
    fn desc_set(&self, node: usize, idx: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![idx];
        while let Some(cur) = stack.pop() {
            out.push(cur);
            stack.extend(self.stacks[node][cur].self_children.iter().copied());
        }
        out
    }

    fn has_live_child(&self, node: usize, idx: usize, slot: usize, axis: Axis) -> bool {
        let own_path = self.stacks[node][idx].path;
        let own_depth = self.summary.depth(own_path);
        let check = |r: &EntryRef| -> bool {
            let child = &self.stacks[r.node][r.idx];
            if child.state != EntryState::Live {
                return false;
            }
            match axis {
                Axis::Child => self.summary.depth(child.path) == own_depth + 1,
                Axis::Desc => true,
            }
        };
        match axis {
            Axis::Child => self.stacks[node][idx].children[slot].iter().any(check),
            Axis::Desc => self
                .desc_set(node, idx)
                .into_iter()
                .any(|d| self.stacks[node][d].children[slot].iter().any(check)),
        }
    }

    /// Nearest live (non-discarded) entry reachable from `start` through the
    /// self-parent chain, inclusive.
    fn nearest_live(&self, node: usize, start: usize) -> Option<usize> {
        let mut cur = Some(start);
        while let Some(i) = cur {
            if self.stacks[node][i].state == EntryState::Live {
                return Some(i);
            }
            cur = self.stacks[node][i].self_parent;
        }
        None
    }

    /// Drops an entry; its children re-link to the nearest live self-ancestor
    /// when one exists and are dropped recursively otherwise.
    fn discard(&mut self, eref: EntryRef) {
        self.stacks[eref.node][eref.idx].state = EntryState::Discarded;
        let target = self.stacks[eref.node][eref.idx]
            .self_parent
            .and_then(|sp| self.nearest_live(eref.node, sp));
        let children: Vec<Vec<EntryRef>> = self.stacks[eref.node][eref.idx]
            .children
            .iter_mut()
            .map(std::mem::take)
            .collect();
        match target {
            Some(t) => {
                for (slot, list) in children.into_iter().enumerate() {
                    let live: Vec<EntryRef> = list
                        .into_iter()
                        .filter(|r| self.stacks[r.node][r.idx].state == EntryState::Live)
                        .collect();
                    self.stacks[eref.node][t].children[slot].extend(live);
                }
            }
            None => {
                for list in children {
                    for r in list {
                        if self.stacks[r.node][r.idx].state == EntryState::Live {
                            self.discard(r);
                        }
                    }
                }
            }
        }
    }
}

/// Computes the forest, running both phases.
pub fn compute_relevant_paths(summary: &PathSummary, pattern: &QueryPattern) -> RelevantPathForest {
    compute_relevant_paths_with(summary, pattern, true)
}

/// Computes the forest; phase 2 minimization is optional.
pub fn compute_relevant_paths_with(
    summary: &PathSummary,
    pattern: &QueryPattern,
    minimize: bool,
) -> RelevantPathForest {
    let flat = flatten(pattern);
    let (stacks, stats) = {
        let mut state = MatchState::new(summary, &flat);
        // Iterative DFS over the summary with begin/end hooks; holds at most
        // one frame per open summary level.
        enum Visit {
            Begin(PathId),
            End(PathId),
        }
        let mut frames = vec![Visit::Begin(summary.root())];
        let mut open_frames = 0usize;
        while let Some(visit) = frames.pop() {
            match visit {
                Visit::Begin(p) => {
                    open_frames += 1;
                    state.stats.peak_open_frames =
                        state.stats.peak_open_frames.max(open_frames);
                    state.begin_summary_node(p);
                    frames.push(Visit::End(p));
                    for child in summary.children(p).iter().rev() {
                        frames.push(Visit::Begin(*child));
                    }
                }
                Visit::End(p) => {
                    state.end_summary_node(p);
                    open_frames -= 1;
                }
            }
        }
        (state.stacks, state.stats)
    };

    // A required pattern node (no optional edge on its root chain) left
    // without live entries makes the whole pattern unsatisfiable.
    let mut unsatisfiable = false;
    for (n, node) in flat.iter().enumerate() {
        let mut required = !node.optional;
        let mut cur = node.parent;
        while let Some(p) = cur {
            required &= !flat[p].optional;
            cur = flat[p].parent;
        }
        if required && !stacks[n].iter().any(|e| e.state == EntryState::Live) {
            unsatisfiable = true;
        }
    }

    let mut forest = RelevantPathForest {
        flat,
        stacks,
        unsatisfiable,
        minimized: false,
        stats,
    };
    if minimize {
        forest.minimize(summary);
    }
    forest
}

impl RelevantPathForest {
    pub fn flat(&self) -> &[FlatNode] {
        &self.flat
    }

    pub fn entries(&self, node: usize) -> &[StackEntry] {
        &self.stacks[node]
    }

    pub fn unsatisfiable(&self) -> bool {
        self.unsatisfiable
    }

    pub fn stats(&self) -> MatchStats {
        self.stats
    }

    pub fn minimized(&self) -> bool {
        self.minimized
    }

    pub fn node_count(&self) -> usize {
        self.flat.len()
    }

    /// Paths of live entries for a pattern node, sorted and deduplicated.
    pub fn node_paths(&self, node: usize) -> Vec<PathId> {
        let mut out: Vec<PathId> = self.stacks[node]
            .iter()
            .filter(|e| e.state == EntryState::Live)
            .map(|e| e.path)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Paths of entries erased as useless, sorted and deduplicated.
    pub fn useless_paths(&self, node: usize) -> Vec<PathId> {
        let mut out: Vec<PathId> = self.stacks[node]
            .iter()
            .filter(|e| e.state == EntryState::Useless)
            .map(|e| e.path)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn total_live_entries(&self) -> usize {
        self.stacks
            .iter()
            .flatten()
            .filter(|e| e.state == EntryState::Live)
            .count()
    }

    /// Shallowest claimant path of an entry: for child edges the recorded
    /// parent entry; for descendant edges the top of the parent's live
    /// self-parent chain. `None` means the pattern node is topmost (the
    /// summary root acts as claimant).
    fn shallowest_claimant(&self, summary: &PathSummary, node: usize, idx: usize) -> Option<PathId> {
        let entry = &self.stacks[node][idx];
        let parent = entry.parent?;
        let traversable = |state: EntryState| {
            matches!(state, EntryState::Live | EntryState::Useless)
        };
        let mut best = None;
        let mut cur = Some(parent.idx);
        while let Some(i) = cur {
            let e = &self.stacks[parent.node][i];
            if traversable(e.state) && summary.is_ancestor_or_self(e.path, entry.path) {
                best = Some(e.path);
            }
            cur = e.self_parent;
        }
        match self.flat[node].axis {
            // Child edges admit only the exact parent as claimant.
            Axis::Child => {
                let p = &self.stacks[parent.node][parent.idx];
                if traversable(p.state) {
                    Some(p.path)
                } else {
                    best
                }
            }
            Axis::Desc => best.or(Some(self.stacks[parent.node][parent.idx].path)),
        }
    }

    /// Live entries reachable as implicit children of (`node`, `idx`) in a
    /// slot: direct list for child edges, self-parent inheritance for
    /// descendant edges.
    fn slot_children(&self, node: usize, idx: usize, slot: usize) -> Vec<EntryRef> {
        let axis = self.flat[self.flat[node].children[slot]].axis;
        let mut out = Vec::new();
        let sources: Vec<usize> = match axis {
            Axis::Child => vec![idx],
            Axis::Desc => {
                let mut set = Vec::new();
                let mut stack = vec![idx];
                while let Some(cur) = stack.pop() {
                    set.push(cur);
                    stack.extend(self.stacks[node][cur].self_children.iter().copied());
                }
                set
            }
        };
        for s in sources {
            out.extend(self.stacks[node][s].children[slot].iter().copied());
        }
        out
    }

    /// Phase 2: prunes trivial existential entries (guaranteed presence,
    /// judged against the shallowest claimant chain) and useless unreturned
    /// entries (guaranteed one-to-one binding).
    pub fn minimize(&mut self, summary: &PathSummary) {
        // Trivial pruning first, children before parents.
        for n in (0..self.flat.len()).rev() {
            if !self.flat[n].existential || self.flat[n].predicate.is_some() {
                continue;
            }
            for idx in 0..self.stacks[n].len() {
                if self.stacks[n][idx].state != EntryState::Live {
                    continue;
                }
                let any_live_descendant = (0..self.flat[n].children.len()).any(|slot| {
                    self.slot_children(n, idx, slot)
                        .iter()
                        .any(|r| self.stacks[r.node][r.idx].state == EntryState::Live)
                });
                if any_live_descendant {
                    continue;
                }
                let path = self.stacks[n][idx].path;
                let claimant = self
                    .shallowest_claimant(summary, n, idx)
                    .unwrap_or(summary.root());
                if summary.all1orplus(claimant, path).unwrap_or(false) {
                    self.stacks[n][idx].state = EntryState::Trivial;
                }
            }
        }
        // Useless pruning: unreturned plain nodes bound one-to-one from
        // every claimant (or from the summary root when topmost).
        for n in 0..self.flat.len() {
            let node = &self.flat[n];
            if node.returned || node.existential || node.optional || node.predicate.is_some() {
                continue;
            }
            for idx in 0..self.stacks[n].len() {
                if self.stacks[n][idx].state != EntryState::Live {
                    continue;
                }
                let path = self.stacks[n][idx].path;
                let claimant = self
                    .shallowest_claimant(summary, n, idx)
                    .unwrap_or(summary.root());
                if summary.all1(claimant, path).unwrap_or(false) {
                    self.stacks[n][idx].state = EntryState::Useless;
                }
            }
        }
        self.minimized = true;
    }

    /// Expands the self-parent encoding into explicit path tuples. Live
    /// entries bind their pattern node, useless entries are traversed
    /// without binding, erased entries are skipped. Edge constraints are
    /// re-validated pairwise, which also filters re-linked child-edge
    /// entries whose depth no longer agrees.
    pub fn enumerate_tuples(
        &self,
        summary: &PathSummary,
        cap: u64,
    ) -> Result<BTreeSet<PathTuple>, RelPathError> {
        let mut out: BTreeSet<PathTuple> = BTreeSet::new();

        struct Ctx<'a> {
            forest: &'a RelevantPathForest,
            summary: &'a PathSummary,
            cap: u64,
        }

        /// Tuples contributed by one entry's subtree.
        fn expand(
            ctx: &Ctx,
            eref: EntryRef,
            out: &mut BTreeSet<PathTuple>,
            total: &mut u64,
        ) -> Result<Vec<PathTuple>, RelPathError> {
            let entry = &ctx.forest.stacks[eref.node][eref.idx];
            let mut acc: Vec<PathTuple> = vec![match entry.state {
                EntryState::Live => PathTuple::from([(eref.node, entry.path)]),
                EntryState::Useless => PathTuple::new(),
                _ => return Ok(Vec::new()),
            }];
            for (slot, &child_node) in ctx.forest.flat[eref.node].children.iter().enumerate() {
                let axis = ctx.forest.flat[child_node].axis;
                let mut slot_tuples: Vec<PathTuple> = Vec::new();
                let mut saw_erased = false;
                let mut candidates = ctx.forest.slot_children(eref.node, eref.idx, slot);
                candidates.dedup_by_key(|r| (r.node, r.idx));
                for r in candidates {
                    let child = &ctx.forest.stacks[r.node][r.idx];
                    match child.state {
                        EntryState::Trivial | EntryState::Discarded => {
                            saw_erased = true;
                            continue;
                        }
                        EntryState::Live | EntryState::Useless => {}
                    }
                    let edge_ok = match axis {
                        Axis::Child => ctx.summary.parent(child.path) == Some(entry.path),
                        Axis::Desc => {
                            entry.path != child.path
                                && ctx.summary.is_ancestor_or_self(entry.path, child.path)
                        }
                    };
                    if !edge_ok {
                        continue;
                    }
                    slot_tuples.extend(expand(ctx, r, out, total)?);
                }
                if slot_tuples.is_empty() {
                    let satisfied_without_binding =
                        ctx.forest.flat[child_node].optional || saw_erased;
                    if satisfied_without_binding {
                        continue;
                    }
                    return Ok(Vec::new());
                }
                let mut next = Vec::with_capacity(acc.len() * slot_tuples.len());
                for base in &acc {
                    for st in &slot_tuples {
                        let mut merged = base.clone();
                        merged.extend(st.iter().map(|(k, v)| (*k, *v)));
                        next.push(merged);
                        *total += 1;
                        if *total > ctx.cap {
                            return Err(RelPathError::TupleExplosion { cap: ctx.cap });
                        }
                    }
                }
                acc = next;
            }
            Ok(acc)
        }

        let ctx = Ctx { forest: self, summary, cap };
        let mut total = 0u64;
        for idx in 0..self.stacks[0].len() {
            let tuples = expand(&ctx, EntryRef { node: 0, idx }, &mut out, &mut total)?;
            for t in tuples {
                if !t.is_empty() {
                    total += 1;
                    if total > cap {
                        return Err(RelPathError::TupleExplosion { cap });
                    }
                    out.insert(t);
                }
            }
        }
        Ok(out)
    }

    /// Indented `label: path[, path…]` rendition plus the tuple count.
    pub fn render(&self, summary: &PathSummary, cap: u64) -> String {
        let mut out = String::new();
        fn depth_of(flat: &[FlatNode], mut n: usize) -> usize {
            let mut d = 0;
            while let Some(p) = flat[n].parent {
                d += 1;
                n = p;
            }
            d
        }
        for n in 0..self.flat.len() {
            let indent = "  ".repeat(depth_of(&self.flat, n));
            let paths = self.node_paths(n);
            let rendered = if paths.is_empty() {
                let erased = self.useless_paths(n);
                if erased.is_empty() {
                    "-".to_string()
                } else {
                    format!(
                        "({})",
                        erased.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
                    )
                }
            } else {
                paths.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
            };
            out.push_str(&format!("{indent}{}: {rendered}\n", self.flat[n].label));
        }
        match self.enumerate_tuples(summary, cap) {
            Ok(tuples) => out.push_str(&format!("tuples: {}\n", tuples.len())),
            Err(_) => out.push_str(&format!("tuples: > {cap} (cap exceeded)\n")),
        }
        out
    }

    /// For an existential child slot of `parent_node`: partitions the live
    /// parent paths into those whose child requirement was erased as
    /// guaranteed (no join needed) and those that still need the semijoin.
    pub fn existential_groups(
        &self,
        parent_node: usize,
        slot: usize,
    ) -> (Vec<PathId>, Vec<PathId>) {
        let mut unchecked: BTreeSet<PathId> = BTreeSet::new();
        let mut checked: BTreeSet<PathId> = BTreeSet::new();
        for idx in 0..self.stacks[parent_node].len() {
            if self.stacks[parent_node][idx].state != EntryState::Live {
                continue;
            }
            let path = self.stacks[parent_node][idx].path;
            let children = self.slot_children(parent_node, idx, slot);
            let has_erased = children.iter().any(|r| {
                matches!(self.stacks[r.node][r.idx].state, EntryState::Trivial)
            });
            if has_erased {
                unchecked.insert(path);
            } else {
                checked.insert(path);
            }
        }
        // A path may back several entries; a guaranteed child on any of them
        // lifts the check for that path.
        let checked: Vec<PathId> =
            checked.into_iter().filter(|p| !unchecked.contains(p)).collect();
        (unchecked.into_iter().collect(), checked)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_document;
    use crate::pattern::{parse_pattern, parse_xpath};
    use crate::summary::build_summary;
    use crate::testkit::{oracle_relevant_paths, D1, D2};
    use std::collections::BTreeMap;

    fn summary_of(doc: &str) -> PathSummary {
        build_summary(parse_document(doc.as_bytes())).unwrap()
    }

    fn tuples_of(doc: &str, pattern: &QueryPattern) -> BTreeSet<PathTuple> {
        let summary = summary_of(doc);
        let forest = compute_relevant_paths(&summary, pattern);
        forest.enumerate_tuples(&summary, 1_000_000).unwrap()
    }

    #[test]
    fn d1_spine_query_prunes_useless_ancestor() {
        let summary = summary_of(D1);
        let q = parse_xpath("//asia//item/name").unwrap();
        let forest = compute_relevant_paths(&summary, &q);
        assert!(!forest.unsatisfiable());
        assert_eq!(forest.node_paths(0), vec![]); // asia erased as useless
        assert_eq!(forest.useless_paths(0), vec![PathId(2)]);
        assert_eq!(forest.node_paths(1), vec![PathId(3)]);
        assert_eq!(forest.node_paths(2), vec![PathId(4)]);
        let tuples = forest.enumerate_tuples(&summary, 1000).unwrap();
        let expected: BTreeSet<PathTuple> =
            [BTreeMap::from([(1, PathId(3)), (2, PathId(4))])].into();
        assert_eq!(tuples, expected);
    }

    #[test]
    fn d1_trivial_existential_pruned() {
        let summary = summary_of(D1);
        let q = parse_xpath("//item[name]").unwrap();
        let forest = compute_relevant_paths(&summary, &q);
        assert_eq!(forest.node_paths(0), vec![PathId(3), PathId(8)]);
        assert_eq!(forest.node_paths(1), vec![]); // both name paths trivial
        let (unchecked, checked) = forest.existential_groups(0, 0);
        assert_eq!(unchecked, vec![PathId(3), PathId(8)]);
        assert!(checked.is_empty());
    }

    #[test]
    fn d1_star_edge_keeps_existential() {
        let summary = summary_of(D1);
        let q = parse_xpath("//item[desc]").unwrap();
        let forest = compute_relevant_paths(&summary, &q);
        // The europe item path is popped in the end hook: no desc below it.
        assert_eq!(forest.node_paths(0), vec![PathId(3)]);
        assert_eq!(forest.node_paths(1), vec![PathId(6)]);
        let (unchecked, checked) = forest.existential_groups(0, 0);
        assert!(unchecked.is_empty());
        assert_eq!(checked, vec![PathId(3)]);
    }

    #[test]
    fn d1_predicate_blocks_trivial() {
        let summary = summary_of(D1);
        let q = parse_xpath("//item[name='n1']").unwrap();
        let forest = compute_relevant_paths(&summary, &q);
        assert_eq!(forest.node_paths(1), vec![PathId(4), PathId(9)]);
    }

    #[test]
    fn d2_selfparent_link_set() {
        let summary = summary_of(D2);
        let q = parse_pattern("(node tag=b axis=desc ret)").unwrap();
        let forest = compute_relevant_paths(&summary, &q);
        let entries = forest.entries(0);
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].path, PathId(2));
        assert_eq!(entries[0].self_parent, None);
        assert_eq!(entries[1].path, PathId(4));
        assert_eq!(entries[1].self_parent, Some(0));
    }

    #[test]
    fn label_mismatch_no_push() {
        let summary = summary_of(D2);
        let q = parse_pattern("(node tag=zz axis=desc ret)").unwrap();
        let forest = compute_relevant_paths(&summary, &q);
        assert!(forest.entries(0).is_empty());
        assert!(forest.unsatisfiable());
    }

    #[test]
    fn child_edge_level_disagreement_no_push() {
        // Pattern /a/b against path /a/b/b: depth 3 disagrees with child
        // edge below the level-2 entry.
        let summary = summary_of(D2);
        let q = parse_xpath("/a/b").unwrap();
        let forest = compute_relevant_paths(&summary, &q);
        assert_eq!(forest.node_paths(1), vec![PathId(2)]);
    }

    #[test]
    fn endhook_discards_without_required_child() {
        let summary = summary_of(D1);
        let q = parse_xpath("//item[desc]").unwrap();
        let forest = compute_relevant_paths(&summary, &q);
        let item_states: Vec<(PathId, EntryState)> =
            forest.entries(0).iter().map(|e| (e.path, e.state)).collect();
        assert!(item_states.contains(&(PathId(3), EntryState::Live)));
        assert!(item_states.contains(&(PathId(8), EntryState::Discarded)));
        let desc_states: Vec<(PathId, EntryState)> =
            forest.entries(1).iter().map(|e| (e.path, e.state)).collect();
        assert_eq!(desc_states, vec![(PathId(6), EntryState::Live)]);
    }

    #[test]
    fn optional_only_children_always_survive() {
        let summary = summary_of(D1);
        let q = parse_pattern(
            "(node tag=item axis=desc ret (node tag=nosuch axis=child opt))",
        )
        .unwrap();
        let forest = compute_relevant_paths(&summary, &q);
        assert_eq!(forest.node_paths(0), vec![PathId(3), PathId(8)]);
        assert!(!forest.unsatisfiable());
    }

    #[test]
    fn d2_desc_chain_tuples() {
        let q = parse_pattern("(node tag=b axis=desc ret (node tag=c axis=desc ret))").unwrap();
        let tuples = tuples_of(D2, &q);
        let expected: BTreeSet<PathTuple> = [
            BTreeMap::from([(0, PathId(2)), (1, PathId(3))]),
            BTreeMap::from([(0, PathId(2)), (1, PathId(5))]),
            BTreeMap::from([(0, PathId(4)), (1, PathId(5))]),
        ]
        .into();
        assert_eq!(tuples, expected);
    }

    #[test]
    fn single_node_pattern_tuples_are_paths() {
        let q = parse_pattern("(node tag=item axis=desc ret)").unwrap();
        let tuples = tuples_of(D1, &q);
        let expected: BTreeSet<PathTuple> = [
            BTreeMap::from([(0, PathId(3))]),
            BTreeMap::from([(0, PathId(8))]),
        ]
        .into();
        assert_eq!(tuples, expected);
    }

    #[test]
    fn empty_forest_empty_tuples() {
        let summary = summary_of(D1);
        let q = parse_xpath("//nosuch").unwrap();
        let forest = compute_relevant_paths(&summary, &q);
        assert!(forest.unsatisfiable());
        assert!(forest.enumerate_tuples(&summary, 1000).unwrap().is_empty());
    }

    #[test]
    fn tuple_cap_enforced() {
        // Same-label chain summary; all-returned 2-node pattern explodes
        // quadratically.
        let mut doc = String::new();
        for _ in 0..12 {
            doc.push_str("<a>");
        }
        for _ in 0..12 {
            doc.push_str("</a>");
        }
        let summary = summary_of(&doc);
        let q = parse_pattern("(node tag=a axis=desc ret (node tag=a axis=desc ret))").unwrap();
        let forest = compute_relevant_paths(&summary, &q);
        assert!(matches!(
            forest.enumerate_tuples(&summary, 10),
            Err(RelPathError::TupleExplosion { cap: 10 })
        ));
        assert_eq!(forest.enumerate_tuples(&summary, 1_000_000).unwrap().len(), 66);
    }

    #[test]
    fn selfparent_chain_compactness() {
        // Unary same-label chain of 20 nodes; all-returned 3-node chain
        // pattern: C(20,3) tuples from at most 60 entries.
        let mut doc = String::new();
        for _ in 0..20 {
            doc.push_str("<a>");
        }
        for _ in 0..20 {
            doc.push_str("</a>");
        }
        let summary = summary_of(&doc);
        assert_eq!(summary.len(), 20);
        let q = parse_pattern(
            "(node tag=a axis=desc ret (node tag=a axis=desc ret (node tag=a axis=desc ret)))",
        )
        .unwrap();
        let forest = compute_relevant_paths(&summary, &q);
        assert!(forest.stats().entries_pushed <= 60);
        let tuples = forest.enumerate_tuples(&summary, 10_000).unwrap();
        assert_eq!(tuples.len(), 1140);
    }

    #[test]
    fn streaming_bound_on_open_frames() {
        let summary = summary_of(D1);
        let q = parse_xpath("//item[name]").unwrap();
        let forest = compute_relevant_paths(&summary, &q);
        assert!(forest.stats().peak_open_frames <= summary.height() as usize);
        assert!(forest.stats().entries_pushed <= summary.len() * q.node_count());
    }

    #[test]
    fn oracle_equivalence_on_fixtures() {
        let cases = [
            (D1, "//asia//item/name"),
            (D1, "//item[name]"),
            (D1, "//item[desc]"),
            (D1, "//item[name='n1']"),
            (D1, "//item"),
            (D1, "/site/asia"),
            (D2, "//b//c"),
            (D2, "//b/c"),
            (D2, "/a/b/b"),
            (D2, "//b[c]"),
        ];
        for (doc, xpath) in cases {
            let summary = summary_of(doc);
            let q = parse_xpath(xpath).unwrap();
            let forest = compute_relevant_paths(&summary, &q);
            let got = forest.enumerate_tuples(&summary, 1_000_000).unwrap();
            let want = oracle_relevant_paths(&summary, &q);
            assert_eq!(got, want, "{doc} :: {xpath}");
        }
    }

    #[test]
    fn oracle_equivalence_randomized() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5EED);
        let mut nonempty = 0;
        for round in 0..120 {
            let doc = crate::testkit::random_document(&mut rng, 150);
            let summary = summary_of(&doc);
            let mut labels: Vec<String> =
                summary.paths().map(|p| summary.label(p).to_string()).collect();
            labels.sort();
            labels.dedup();
            let q = crate::testkit::random_pattern(&mut rng, &labels, 6);
            let forest = compute_relevant_paths(&summary, &q);
            let got = forest.enumerate_tuples(&summary, 1_000_000).unwrap();
            let want = oracle_relevant_paths(&summary, &q);
            assert_eq!(got, want, "round {round}: doc {doc} pattern {q}");
            if !got.is_empty() {
                nonempty += 1;
            }
        }
        assert!(nonempty > 20, "only {nonempty} rounds produced matches");
    }

    #[test]
    fn minimization_disabled_keeps_entries() {
        let summary = summary_of(D1);
        let q = parse_xpath("//item[name]").unwrap();
        let forest = compute_relevant_paths_with(&summary, &q, false);
        assert_eq!(forest.node_paths(1), vec![PathId(4), PathId(9)]);
        assert!(!forest.minimized());
    }

    #[test]
    fn render_forest() {
        let summary = summary_of(D1);
        let q = parse_xpath("//item[name]").unwrap();
        let forest = compute_relevant_paths(&summary, &q);
        let text = forest.render(&summary, 1000);
        assert!(text.contains("item: 3, 8"), "{text}");
        assert!(text.contains("tuples: 2"), "{text}");
    }
}
