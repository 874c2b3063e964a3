//! Physical operators and plan construction over the path-partitioned store:
//! ID scans, merges, structural joins, selections, and the
//! duplicate-elimination skip analysis.

use std::cell::Cell;
use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::rc::Rc;

use crate::error::ExecError;
use crate::ingest::StructuralId;
use crate::pattern::{Axis, QueryPattern, ValuePredicate};
use crate::relpaths::RelevantPathForest;
use crate::store::PathStore;
use crate::summary::{PathId, PathSummary};

/// One row field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Field {
    Id(StructuralId),
    Value(String),
    Null,
}

impl Field {
    pub fn id(&self) -> Option<StructuralId> {
        match self {
            Field::Id(id) => Some(*id),
            _ => None,
        }
    }

    pub fn value(&self) -> Option<&str> {
        match self {
            Field::Value(v) => Some(v),
            _ => None,
        }
    }
}

pub type Row = Vec<Field>;
type RowIter = Box<dyn Iterator<Item = Result<Row, ExecError>>>;

/// What an id column stands for when joined structurally: the element
/// itself, or the owner element of a text/attribute value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyMode {
    Element,
    ValueOwner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinVariant {
    /// Emits combined (ancestor, descendant) rows.
    Inner,
    /// Emits each qualifying descendant row once.
    Semi,
    /// Emits each qualifying ancestor row once.
    SemiOuter,
    /// Emits every ancestor row, combined with each match or null-padded.
    LeftOuter,
}

/// Row emission order of a join: by the descendant column (classic
/// stack-tree output) or regrouped by the ancestor column through a bounded
/// reorder buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitOrder {
    DescOrder,
    OuterOrder,
}

/// Verdict of the duplicate-elimination skip analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DupSafety {
    pub safe: bool,
    pub witness: Option<(PathId, PathId)>,
}

/// Safe iff no relevant path of the outer input is a summary ancestor of
/// another; unsafe verdicts carry the offending pair.
pub fn needs_dup_elim(paths: &[PathId], summary: &PathSummary) -> DupSafety {
    for (i, &a) in paths.iter().enumerate() {
        for &b in &paths[i + 1..] {
            let (anc, desc) = if a < b { (a, b) } else { (b, a) };
            if anc != desc && summary.is_ancestor_or_self(anc, desc) {
                return DupSafety { safe: false, witness: Some((anc, desc)) };
            }
        }
    }
    DupSafety { safe: true, witness: None }
}

// ---- merge -------------------------------------------------------------------

struct MergeIter {
    inputs: Vec<std::iter::Peekable<RowIter>>,
    key_col: usize,
    last_pre: Option<u64>,
}

impl Iterator for MergeIter {
    type Item = Result<Row, ExecError>;

    fn next(&mut self) -> Option<Self::Item> {
        let mut best: Option<(usize, u64)> = None;
        for (i, input) in self.inputs.iter_mut().enumerate() {
            match input.peek() {
                None => continue,
                Some(Err(_)) => {
                    return Some(input.next().unwrap().map(|_| unreachable!()));
                }
                Some(Ok(row)) => {
                    let pre = match row[self.key_col].id() {
                        Some(id) => id.pre,
                        None => return Some(Err(ExecError::MissingColumn)),
                    };
                    if best.map(|(_, p)| pre < p).unwrap_or(true) {
                        best = Some((i, pre));
                    }
                }
            }
        }
        let (i, pre) = best?;
        if let Some(last) = self.last_pre {
            if pre < last {
                return Some(Err(ExecError::UnsortedInput));
            }
        }
        self.last_pre = Some(pre);
        self.inputs[i].next()
    }
}

/// K-way merge of sorted row streams by the id column `key_col`.
fn merge_rows(inputs: Vec<RowIter>, key_col: usize) -> RowIter {
    if inputs.len() == 1 {
        return inputs.into_iter().next().unwrap();
    }
    Box::new(MergeIter {
        inputs: inputs.into_iter().map(Iterator::peekable).collect(),
        key_col,
        last_pre: None,
    })
}

/// Merges sorted, duplicate-free id sequences into one. Disjoint inputs
/// (path partitions) cannot produce cross-stream duplicates.
pub fn merge(inputs: Vec<Vec<StructuralId>>) -> Result<Vec<StructuralId>, ExecError> {
    let iters: Vec<RowIter> = inputs
        .into_iter()
        .map(|ids| {
            Box::new(ids.into_iter().map(|id| Ok(vec![Field::Id(id)]))) as RowIter
        })
        .collect();
    if iters.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for row in merge_rows(iters, 0) {
        out.push(row?[0].id().unwrap());
    }
    for w in out.windows(2) {
        if w[0].pre >= w[1].pre {
            return Err(ExecError::UnsortedInput);
        }
    }
    Ok(out)
}

// ---- structural join ---------------------------------------------------------

struct StackSlot {
    key: StructuralId,
    rows: Vec<Row>,
    matched: bool,
    buffered: Vec<Row>,
}

/// Stack-based merge join of two pre-sorted streams on an
/// ancestor/descendant or parent/child relation. The stack holds the chain
/// of open ancestors, at most one per document level.
struct StructJoinIter {
    outer: std::iter::Peekable<RowIter>,
    inner: std::iter::Peekable<RowIter>,
    outer_key: usize,
    inner_key: usize,
    inner_mode: KeyMode,
    axis: Axis,
    variant: JoinVariant,
    emit: EmitOrder,
    inner_width: usize,
    stack: Vec<StackSlot>,
    /// Retired slots' output, ancestor-ordered, released when the chain drains.
    held: VecDeque<Row>,
    pending: VecDeque<Row>,
    last_outer: Option<u64>,
    last_inner: Option<u64>,
    done: bool,
}

impl StructJoinIter {
    fn key_of(row: &Row, col: usize) -> Result<StructuralId, ExecError> {
        row.get(col).and_then(Field::id).ok_or(ExecError::MissingColumn)
    }

    fn qualifies(&self, slot_key: &StructuralId, inner_key: &StructuralId) -> bool {
        match (self.inner_mode, self.axis) {
            (KeyMode::Element, Axis::Child) => slot_key.is_parent_of(inner_key),
            (KeyMode::Element, Axis::Desc) => slot_key.is_ancestor_of(inner_key),
            (KeyMode::ValueOwner, Axis::Child) => slot_key.pre == inner_key.pre,
            (KeyMode::ValueOwner, Axis::Desc) => {
                slot_key.pre == inner_key.pre || slot_key.is_ancestor_of(inner_key)
            }
        }
    }

    fn retire_top(&mut self) {
        let slot = self.stack.pop().expect("retire on nonempty stack");
        let mut block: Vec<Row> = Vec::new();
        match self.variant {
            JoinVariant::Inner => {
                if self.emit == EmitOrder::OuterOrder {
                    block = slot.buffered;
                }
            }
            JoinVariant::Semi => {}
            JoinVariant::SemiOuter => {
                if slot.matched {
                    block = slot.rows;
                }
            }
            JoinVariant::LeftOuter => {
                if slot.buffered.is_empty() {
                    for mut row in slot.rows {
                        row.extend(std::iter::repeat(Field::Null).take(self.inner_width));
                        block.push(row);
                    }
                } else {
                    block = slot.buffered;
                }
            }
        }
        for row in block.into_iter().rev() {
            self.held.push_front(row);
        }
        if self.stack.is_empty() {
            self.pending.extend(self.held.drain(..));
        }
    }

    /// Pops slots that cannot contain any key at or after `key`.
    fn pop_disjoint(&mut self, key: &StructuralId) {
        while let Some(top) = self.stack.last() {
            if top.key.post < key.post {
                self.retire_top();
            } else {
                break;
            }
        }
    }

    fn step(&mut self) -> Result<(), ExecError> {
        let outer_pre = match self.outer.peek() {
            Some(Ok(row)) => Some(Self::key_of(row, self.outer_key)?.pre),
            Some(Err(_)) => {
                return Err(match self.outer.next().unwrap() {
                    Err(e) => e,
                    Ok(_) => unreachable!(),
                })
            }
            None => None,
        };
        let inner_pre = match self.inner.peek() {
            Some(Ok(row)) => Some(Self::key_of(row, self.inner_key)?.pre),
            Some(Err(_)) => {
                return Err(match self.inner.next().unwrap() {
                    Err(e) => e,
                    Ok(_) => unreachable!(),
                })
            }
            None => None,
        };
        match (outer_pre, inner_pre) {
            (None, None) => {
                while !self.stack.is_empty() {
                    self.retire_top();
                }
                self.done = true;
            }
            (Some(op), ip) if ip.map(|ip| op <= ip).unwrap_or(true) => {
                let row = self.outer.next().unwrap()?;
                let key = Self::key_of(&row, self.outer_key)?;
                if self.last_outer.map(|l| key.pre < l).unwrap_or(false) {
                    return Err(ExecError::UnsortedInput);
                }
                self.last_outer = Some(key.pre);
                if let Some(top) = self.stack.last_mut() {
                    if top.key.pre == key.pre {
                        top.rows.push(row);
                        return Ok(());
                    }
                }
                self.pop_disjoint(&key);
                self.stack.push(StackSlot { key, rows: vec![row], matched: false, buffered: Vec::new() });
            }
            (_, Some(_)) => {
                let row = self.inner.next().unwrap()?;
                let key = Self::key_of(&row, self.inner_key)?;
                if self.last_inner.map(|l| key.pre < l).unwrap_or(false) {
                    return Err(ExecError::UnsortedInput);
                }
                self.last_inner = Some(key.pre);
                self.pop_disjoint(&key);
                let mut any = false;
                for i in 0..self.stack.len() {
                    if !self.qualifies(&self.stack[i].key.clone(), &key) {
                        continue;
                    }
                    any = true;
                    match self.variant {
                        JoinVariant::Inner | JoinVariant::LeftOuter => {
                            let combined: Vec<Row> = self.stack[i]
                                .rows
                                .iter()
                                .map(|outer_row| {
                                    let mut r = outer_row.clone();
                                    r.extend(row.iter().cloned());
                                    r
                                })
                                .collect();
                            if self.variant == JoinVariant::Inner
                                && self.emit == EmitOrder::DescOrder
                            {
                                self.pending.extend(combined);
                            } else {
                                self.stack[i].buffered.extend(combined);
                            }
                            self.stack[i].matched = true;
                        }
                        JoinVariant::Semi | JoinVariant::SemiOuter => {
                            self.stack[i].matched = true;
                        }
                    }
                }
                if any && self.variant == JoinVariant::Semi {
                    self.pending.push_back(row);
                }
            }
            (None, None) => unreachable!(),
        }
        Ok(())
    }
}

impl Iterator for StructJoinIter {
    type Item = Result<Row, ExecError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(row) = self.pending.pop_front() {
                return Some(Ok(row));
            }
            if self.done {
                return None;
            }
            if let Err(e) = self.step() {
                self.done = true;
                return Some(Err(e));
            }
        }
    }
}

fn struct_join_rows(
    outer: RowIter,
    inner: RowIter,
    outer_key: usize,
    inner_key: usize,
    inner_mode: KeyMode,
    axis: Axis,
    variant: JoinVariant,
    emit: EmitOrder,
    inner_width: usize,
) -> RowIter {
    Box::new(StructJoinIter {
        outer: outer.peekable(),
        inner: inner.peekable(),
        outer_key,
        inner_key,
        inner_mode,
        axis,
        variant,
        emit,
        inner_width,
        stack: Vec::new(),
        held: VecDeque::new(),
        pending: VecDeque::new(),
        last_outer: None,
        last_inner: None,
        done: false,
    })
}

/// One joined pair of the public id-level structural join. Variants leave
/// the side they do not carry as `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinedPair {
    pub outer: Option<StructuralId>,
    pub inner: Option<StructuralId>,
}

/// Structural join of two sorted, duplicate-free element-id streams.
///
/// `Inner` emits (ancestor, descendant) pairs sorted by the descendant;
/// `Semi` each qualifying descendant once; `SemiOuter` each qualifying
/// ancestor once; `LeftOuter` every ancestor, with matches or a null.
/// Memory is bounded by a stack of at most one ancestor per document level.
pub fn struct_join(
    outer: impl IntoIterator<Item = StructuralId>,
    inner: impl IntoIterator<Item = StructuralId>,
    axis: Axis,
    variant: JoinVariant,
) -> Result<Vec<JoinedPair>, ExecError> {
    let outer_rows: RowIter =
        Box::new(outer.into_iter().map(|id| Ok(vec![Field::Id(id)])));
    let inner_rows: RowIter =
        Box::new(inner.into_iter().map(|id| Ok(vec![Field::Id(id)])));
    let emit = match variant {
        JoinVariant::Inner | JoinVariant::Semi => EmitOrder::DescOrder,
        JoinVariant::SemiOuter | JoinVariant::LeftOuter => EmitOrder::OuterOrder,
    };
    let rows = struct_join_rows(
        outer_rows,
        inner_rows,
        0,
        0,
        KeyMode::Element,
        axis,
        variant,
        emit,
        1,
    );
    let mut out = Vec::new();
    for row in rows {
        let row = row?;
        let pair = match variant {
            JoinVariant::Inner => JoinedPair { outer: row[0].id(), inner: row[1].id() },
            JoinVariant::Semi => JoinedPair { outer: None, inner: row[0].id() },
            JoinVariant::SemiOuter => JoinedPair { outer: row[0].id(), inner: None },
            JoinVariant::LeftOuter => JoinedPair { outer: row[0].id(), inner: row[1].id() },
        };
        out.push(pair);
    }
    Ok(out)
}

// ---- select ------------------------------------------------------------------

fn predicate_matches(pred: &ValuePredicate, value: &str) -> bool {
    match pred {
        ValuePredicate::Eq(x) => value == x,
        ValuePredicate::Contains(x) => value.contains(x),
    }
}

/// Order-preserving filter on a value column.
pub fn select(
    input: impl IntoIterator<Item = Row>,
    value_col: usize,
    predicate: &ValuePredicate,
) -> Result<Vec<Row>, ExecError> {
    let mut out = Vec::new();
    for row in input {
        let value = row.get(value_col).ok_or(ExecError::MissingColumn)?;
        let value = value.value().ok_or(ExecError::MissingColumn)?;
        if predicate_matches(predicate, value) {
            out.push(row);
        }
    }
    Ok(out)
}

struct SelectIter {
    input: RowIter,
    value_col: usize,
    predicate: ValuePredicate,
}

impl Iterator for SelectIter {
    type Item = Result<Row, ExecError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let row = match self.input.next()? {
                Ok(row) => row,
                Err(e) => return Some(Err(e)),
            };
            let field = match row.get(self.value_col) {
                Some(f) => f,
                None => return Some(Err(ExecError::MissingColumn)),
            };
            match field.value() {
                None => return Some(Err(ExecError::MissingColumn)),
                Some(v) if predicate_matches(&self.predicate, v) => return Some(Ok(row)),
                Some(_) => continue,
            }
        }
    }
}
