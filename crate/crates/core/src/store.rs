//! Path-partitioned persistence: per-path ID sequences and (ID, value)
//! sequences in document order, with a CRC-checked on-disk layout.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::StoreError;
use crate::ingest::{NodeEvent, StructuralId};
use crate::summary::{PathId, PathSummary};
use crate::varint;

const STORE_VERSION: u32 = 1;
const SEQ_MAGIC: &[u8; 4] = b"XIDS";
const VAL_MAGIC: &[u8; 4] = b"XVAL";

/// What a summary path holds in the store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Element,
    Attribute,
    Text,
}

/// Sequence of structural ids on one path, sorted by `pre`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdSequence {
    pub path: PathId,
    pub ids: Vec<StructuralId>,
}

/// One stored value with its owner element and its own stamp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueEntry {
    pub owner: StructuralId,
    pub self_id: StructuralId,
    pub value: String,
}

/// Sequence of values on one `#text` or `@attr` path, sorted by `self_id.pre`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueSequence {
    pub path: PathId,
    pub entries: Vec<ValueEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestFile {
    file: String,
    crc: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestPath {
    path: u32,
    kind: PathKind,
    count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ids: Option<ManifestFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vals: Option<ManifestFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    document: String,
    element_count: u64,
    attribute_count: u64,
    text_count: u64,
    summary: ManifestFile,
    paths: Vec<ManifestPath>,
}

struct Slot {
    kind: PathKind,
    count: u64,
    ids: OnceLock<Arc<IdSequence>>,
    vals: OnceLock<Arc<ValueSequence>>,
    id_file: Option<(PathBuf, u32)>,
    val_file: Option<(PathBuf, u32)>,
}

impl Slot {
    fn new(kind: PathKind) -> Self {
        Slot {
            kind,
            count: 0,
            ids: OnceLock::new(),
            vals: OnceLock::new(),
            id_file: None,
            val_file: None,
        }
    }
}

/// Immutable path-partitioned store over one document.
///
/// Opening a persisted store reads only the manifest and the summary;
/// sequences load lazily on first scan and stay cached.
pub struct PathStore {
    summary: Arc<PathSummary>,
    document: String,
    slots: Vec<Slot>,
}

impl std::fmt::Debug for PathStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PathStore")
            .field("document", &self.document)
            .field("paths", &self.slots.len())
            .finish()
    }
}

fn path_kind(summary: &PathSummary, p: PathId) -> PathKind {
    let label = summary.label(p);
    if label == "#text" {
        PathKind::Text
    } else if label.starts_with('@') {
        PathKind::Attribute
    } else {
        PathKind::Element
    }
}

struct OpenFrame {
    path: PathId,
    pre: u64,
    depth: u32,
    /// Value entries owned by this element, flushed once its post is known.
    pending: Vec<(PathId, StructuralId, String)>,
}

/// Partitions a stamped event stream into per-path sequences.
///
/// Element and attribute ids go to id sequences; `#text` and `@attr` paths
/// additionally get (owner, self, value) sequences. Single pass; value
/// entries wait on the open-element stack until the owner's end rank is
/// known.
pub fn partition<I, E>(
    events: I,
    summary: Arc<PathSummary>,
    document: &str,
) -> Result<PathStore, StoreError>
where
    I: IntoIterator<Item = Result<NodeEvent, E>>,
    StoreError: From<E>,
{
    let n = summary.len();
    let mut id_seqs: Vec<Vec<StructuralId>> = vec![Vec::new(); n];
    let mut val_seqs: Vec<Vec<ValueEntry>> = vec![Vec::new(); n];
    let mut stack: Vec<OpenFrame> = Vec::new();

    let resolve = |summary: &PathSummary, parent: Option<PathId>, label: &str| {
        let found = match parent {
            None => (summary.label(summary.root()) == label).then(|| summary.root()),
            Some(p) => summary
                .children(p)
                .iter()
                .copied()
                .find(|c| summary.label(*c) == label),
        };
        found.ok_or_else(|| {
            let prefix = parent
                .map(|p| summary.label_path(p).join("/"))
                .unwrap_or_default();
            StoreError::SummaryMismatch(format!("/{prefix}/{label}"))
        })
    };

    for ev in events {
        match ev? {
            NodeEvent::ElementStart { label, id } => {
                let id = id.expect("partition requires stamped events");
                let parent = stack.last().map(|f| f.path);
                let path = resolve(&summary, parent, &label)?;
                stack.push(OpenFrame { path, pre: id.pre, depth: id.depth, pending: Vec::new() });
            }
            NodeEvent::ElementEnd { id, .. } => {
                let id = id.expect("partition requires stamped events");
                let frame = stack.pop().expect("well-nested event stream");
                debug_assert_eq!(frame.pre, id.pre);
                id_seqs[frame.path.index0()].push(id);
                for (path, self_id, value) in frame.pending {
                    val_seqs[path.index0()].push(ValueEntry { owner: id, self_id, value });
                }
            }
            NodeEvent::Attribute { label, id, value } => {
                let id = id.expect("partition requires stamped events");
                let frame = stack.last_mut().expect("attribute outside any element");
                let path = resolve(&summary, Some(frame.path), &label)?;
                id_seqs[path.index0()].push(id);
                frame.pending.push((path, id, value));
            }
            NodeEvent::Text { id, value } => {
                let id = id.expect("partition requires stamped events");
                let frame = stack.last_mut().expect("text outside any element");
                let path = resolve(&summary, Some(frame.path), "#text")?;
                frame.pending.push((path, id, value));
            }
        }
    }

    let mut slots = Vec::with_capacity(n);
    for p in summary.paths() {
        let kind = path_kind(&summary, p);
        let mut slot = Slot::new(kind);
        let ids = std::mem::take(&mut id_seqs[p.index0()]);
        let vals = std::mem::take(&mut val_seqs[p.index0()]);
        slot.count = match kind {
            PathKind::Text => vals.len() as u64,
            _ => ids.len() as u64,
        };
        if !ids.is_empty() {
            slot.ids.set(Arc::new(IdSequence { path: p, ids })).ok();
        }
        if !vals.is_empty() {
            slot.vals.set(Arc::new(ValueSequence { path: p, entries: vals })).ok();
        }
        slots.push(slot);
    }
    Ok(PathStore { summary, document: document.to_string(), slots })
}

trait PathIdIndex {
    fn index0(&self) -> usize;
}

impl PathIdIndex for PathId {
    fn index0(&self) -> usize {
        (self.0 - 1) as usize
    }
}

impl PathStore {
    /// Parses, summarizes and partitions a document in two streaming passes.
    pub fn build_from_xml(
        bytes: &[u8],
        document: &str,
        precompute: bool,
    ) -> Result<PathStore, StoreError> {
        let summary = crate::summary::build_summary(crate::ingest::parse_document(bytes))?;
        let summary = if precompute { summary.precompute() } else { summary };
        partition(
            crate::ingest::assign_ids(crate::ingest::parse_document(bytes)),
            Arc::new(summary),
            document,
        )
    }

    pub fn summary(&self) -> &PathSummary {
        &self.summary
    }

    pub fn summary_arc(&self) -> Arc<PathSummary> {
        Arc::clone(&self.summary)
    }

    pub fn document(&self) -> &str {
        &self.document
    }

    pub fn kind(&self, p: PathId) -> Option<PathKind> {
        self.slots.get(p.index0()).map(|s| s.kind)
    }

    /// Node count on a path (ids for element/attribute paths, values for text).
    pub fn count(&self, p: PathId) -> u64 {
        self.slots.get(p.index0()).map(|s| s.count).unwrap_or(0)
    }

    /// Per-tag node counts over element and attribute paths, for fan-in.
    pub fn tag_counts(&self) -> BTreeMap<String, u64> {
        let mut out = BTreeMap::new();
        for p in self.summary.paths() {
            let kind = self.slots[p.index0()].kind;
            if kind == PathKind::Text {
                continue;
            }
            *out.entry(self.summary.label(p).to_string()).or_insert(0) +=
                self.slots[p.index0()].count;
        }
        out
    }

    fn slot(&self, p: PathId) -> Result<&Slot, StoreError> {
        if p.0 == 0 || p.index0() >= self.slots.len() {
            return Err(StoreError::UnknownPath(p));
        }
        Ok(&self.slots[p.index0()])
    }

    fn load_ids(&self, p: PathId) -> Result<Arc<IdSequence>, StoreError> {
        let slot = self.slot(p)?;
        if let Some(seq) = slot.ids.get() {
            return Ok(Arc::clone(seq));
        }
        let (file, crc) = slot.id_file.as_ref().ok_or(StoreError::UnknownPath(p))?;
        let bytes = read_checked(file, *crc)?;
        let seq = Arc::new(decode_id_sequence(p, &bytes)?);
        Ok(Arc::clone(slot.ids.get_or_init(|| seq)))
    }

    fn load_vals(&self, p: PathId) -> Result<Arc<ValueSequence>, StoreError> {
        let slot = self.slot(p)?;
        if let Some(seq) = slot.vals.get() {
            return Ok(Arc::clone(seq));
        }
        let (file, crc) = slot.val_file.as_ref().ok_or(StoreError::UnknownPath(p))?;
        let bytes = read_checked(file, *crc)?;
        let seq = Arc::new(decode_value_sequence(p, &bytes)?);
        Ok(Arc::clone(slot.vals.get_or_init(|| seq)))
    }

    /// Streams the structural ids on a path in `pre` order.
    pub fn scan_ids(&self, p: PathId) -> Result<IdScan, StoreError> {
        let seq = self.load_ids(p)?;
        Ok(IdScan { seq, pos: 0 })
    }

    /// Streams the (owner, self, value) entries on a path in document order.
    pub fn scan_values(&self, p: PathId) -> Result<ValueScan, StoreError> {
        let seq = self.load_vals(p)?;
        Ok(ValueScan { seq, pos: 0 })
    }

    pub fn has_ids(&self, p: PathId) -> bool {
        self.slot(p)
            .map(|s| s.ids.get().is_some() || s.id_file.is_some())
            .unwrap_or(false)
    }

    pub fn has_values(&self, p: PathId) -> bool {
        self.slot(p)
            .map(|s| s.vals.get().is_some() || s.val_file.is_some())
            .unwrap_or(false)
    }

    /// Writes the store under `dir` (created if needed): `summary.xsum`,
    /// `ids/<path>.seq`, `vals/<path>.val` and a JSON manifest with CRCs.
    pub fn persist(&self, dir: &Path) -> Result<(), StoreError> {
        fs::create_dir_all(dir.join("ids"))?;
        fs::create_dir_all(dir.join("vals"))?;
        let format = match self.summary.encoding() {
            crate::summary::Encoding::Direct => crate::summary::Format::BinaryDirect,
            crate::summary::Encoding::Precomputed => crate::summary::Format::BinaryPrecomputed,
        };
        let summary_bytes = self.summary.serialize(format);
        fs::write(dir.join("summary.xsum"), &summary_bytes)?;
        let mut manifest = Manifest {
            version: STORE_VERSION,
            document: self.document.clone(),
            element_count: 0,
            attribute_count: 0,
            text_count: 0,
            summary: ManifestFile { file: "summary.xsum".into(), crc: crc32(&summary_bytes) },
            paths: Vec::new(),
        };
        for p in self.summary.paths() {
            let slot = &self.slots[p.index0()];
            match slot.kind {
                PathKind::Element => manifest.element_count += slot.count,
                PathKind::Attribute => manifest.attribute_count += slot.count,
                PathKind::Text => manifest.text_count += slot.count,
            }
            let mut entry = ManifestPath {
                path: p.0,
                kind: slot.kind,
                count: slot.count,
                ids: None,
                vals: None,
            };
            if let Ok(seq) = self.load_ids(p) {
                let bytes = encode_id_sequence(&seq);
                let rel = format!("ids/{}.seq", p.0);
                fs::write(dir.join(&rel), &bytes)?;
                entry.ids = Some(ManifestFile { file: rel, crc: crc32(&bytes) });
            }
            if let Ok(seq) = self.load_vals(p) {
                let bytes = encode_value_sequence(&seq);
                let rel = format!("vals/{}.val", p.0);
                fs::write(dir.join(&rel), &bytes)?;
                entry.vals = Some(ManifestFile { file: rel, crc: crc32(&bytes) });
            }
            manifest.paths.push(entry);
        }
        let manifest_text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| StoreError::CorruptStore(e.to_string()))?;
        fs::write(dir.join("manifest.json"), manifest_text)?;
        Ok(())
    }

    /// Opens a persisted store, reading only the manifest and the summary.
    pub fn open(dir: &Path) -> Result<PathStore, StoreError> {
        let manifest_path = dir.join("manifest.json");
        let manifest_text = fs::read_to_string(&manifest_path)
            .map_err(|e| StoreError::CorruptStore(format!("missing manifest: {e}")))?;
        let manifest: Manifest = serde_json::from_str(&manifest_text)
            .map_err(|e| StoreError::CorruptStore(format!("bad manifest: {e}")))?;
        if manifest.version != STORE_VERSION {
            return Err(StoreError::VersionMismatch {
                found: manifest.version,
                expected: STORE_VERSION,
            });
        }
        let summary_bytes = read_checked(&dir.join(&manifest.summary.file), manifest.summary.crc)?;
        let summary = Arc::new(PathSummary::deserialize(&summary_bytes)?);
        let mut slots: Vec<Slot> = summary
            .paths()
            .map(|p| Slot::new(path_kind(&summary, p)))
            .collect();
        for entry in manifest.paths {
            let idx = entry.path as usize - 1;
            if idx >= slots.len() {
                return Err(StoreError::CorruptStore(format!(
                    "manifest path {} outside summary",
                    entry.path
                )));
            }
            slots[idx].count = entry.count;
            if let Some(f) = entry.ids {
                slots[idx].id_file = Some((dir.join(f.file), f.crc));
            }
            if let Some(f) = entry.vals {
                slots[idx].val_file = Some((dir.join(f.file), f.crc));
            }
        }
        Ok(PathStore { summary, document: manifest.document, slots })
    }
}

/// Restartable cursor over one id sequence.
#[derive(Clone)]
pub struct IdScan {
    seq: Arc<IdSequence>,
    pos: usize,
}

impl Iterator for IdScan {
    type Item = StructuralId;

    fn next(&mut self) -> Option<StructuralId> {
        let id = self.seq.ids.get(self.pos)?;
        self.pos += 1;
        Some(*id)
    }
}

impl IdScan {
    pub fn len(&self) -> usize {
        self.seq.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.ids.is_empty()
    }
}

/// Restartable cursor over one value sequence.
#[derive(Clone)]
pub struct ValueScan {
    seq: Arc<ValueSequence>,
    pos: usize,
}

impl Iterator for ValueScan {
    type Item = ValueEntry;

    fn next(&mut self) -> Option<ValueEntry> {
        let entry = self.seq.entries.get(self.pos)?;
        self.pos += 1;
        Some(entry.clone())
    }
}

impl ValueScan {
    pub fn len(&self) -> usize {
        self.seq.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.entries.is_empty()
    }
}

fn encode_id_sequence(seq: &IdSequence) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(SEQ_MAGIC);
    varint::write_u64(&mut out, seq.ids.len() as u64);
    let mut prev_pre = 0u64;
    for id in &seq.ids {
        varint::write_u64(&mut out, id.pre - prev_pre);
        varint::write_u64(&mut out, id.post);
        varint::write_u64(&mut out, id.depth as u64);
        prev_pre = id.pre;
    }
    out
}

fn decode_id_sequence(path: PathId, bytes: &[u8]) -> Result<IdSequence, StoreError> {
    let mut input = check_magic(bytes, SEQ_MAGIC)?;
    let corrupt = |_: std::io::Error| StoreError::CorruptStore("truncated id sequence".into());
    let count = varint::read_u64(&mut input).map_err(corrupt)? as usize;
    let mut ids = Vec::with_capacity(count);
    let mut prev_pre = 0u64;
    for _ in 0..count {
        let pre = prev_pre + varint::read_u64(&mut input).map_err(corrupt)?;
        let post = varint::read_u64(&mut input).map_err(corrupt)?;
        let depth = varint::read_u64(&mut input).map_err(corrupt)? as u32;
        prev_pre = pre;
        ids.push(StructuralId { pre, post, depth });
    }
    Ok(IdSequence { path, ids })
}

fn encode_value_sequence(seq: &ValueSequence) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(VAL_MAGIC);
    varint::write_u64(&mut out, seq.entries.len() as u64);
    let mut prev_pre = 0u64;
    for e in &seq.entries {
        varint::write_u64(&mut out, e.self_id.pre - prev_pre);
        varint::write_u64(&mut out, e.owner.pre);
        varint::write_u64(&mut out, e.owner.post);
        varint::write_u64(&mut out, e.owner.depth as u64);
        varint::write_u64(&mut out, e.value.len() as u64);
        out.extend_from_slice(e.value.as_bytes());
        prev_pre = e.self_id.pre;
    }
    out
}

fn decode_value_sequence(path: PathId, bytes: &[u8]) -> Result<ValueSequence, StoreError> {
    let mut input = check_magic(bytes, VAL_MAGIC)?;
    let corrupt = |_: std::io::Error| StoreError::CorruptStore("truncated value sequence".into());
    let count = varint::read_u64(&mut input).map_err(corrupt)? as usize;
    let mut entries = Vec::with_capacity(count);
    let mut prev_pre = 0u64;
    for _ in 0..count {
        let self_pre = prev_pre + varint::read_u64(&mut input).map_err(corrupt)?;
        let owner_pre = varint::read_u64(&mut input).map_err(corrupt)?;
        let owner_post = varint::read_u64(&mut input).map_err(corrupt)?;
        let owner_depth = varint::read_u64(&mut input).map_err(corrupt)? as u32;
        let len = varint::read_u64(&mut input).map_err(corrupt)? as usize;
        if input.len() < len {
            return Err(StoreError::CorruptStore("truncated value payload".into()));
        }
        let (head, rest) = input.split_at(len);
        let value = std::str::from_utf8(head)
            .map_err(|_| StoreError::CorruptStore("value is not UTF-8".into()))?
            .to_string();
        input = rest;
        prev_pre = self_pre;
        let owner = StructuralId { pre: owner_pre, post: owner_post, depth: owner_depth };
        entries.push(ValueEntry {
            owner,
            self_id: StructuralId { pre: self_pre, post: self_pre, depth: owner_depth + 1 },
            value,
        });
    }
    Ok(ValueSequence { path, entries })
}

fn check_magic<'a>(bytes: &'a [u8], magic: &[u8; 4]) -> Result<&'a [u8], StoreError> {
    if bytes.len() < 4 || &bytes[..4] != magic {
        return Err(StoreError::CorruptStore("bad sequence magic".into()));
    }
    Ok(&bytes[4..])
}

fn read_checked(path: &Path, expected_crc: u32) -> Result<Vec<u8>, StoreError> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| StoreError::CorruptStore(format!("{}: {e}", path.display())))?;
    let actual = crc32(&bytes);
    if actual != expected_crc {
        return Err(StoreError::CorruptStore(format!(
            "checksum mismatch for {} (expected {expected_crc:#010x}, found {actual:#010x})",
            path.display()
        )));
    }
    Ok(bytes)
}

/// CRC-32 (IEEE 802.3), table-driven.
pub fn crc32(bytes: &[u8]) -> u32 {
    static TABLE: OnceLock<[u32; 256]> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut table = [0u32; 256];
        for (i, entry) in table.iter_mut().enumerate() {
            let mut c = i as u32;
            for _ in 0..8 {
                c = if c & 1 != 0 { 0xEDB8_8320 ^ (c >> 1) } else { c >> 1 };
            }
            *entry = c;
        }
        table
    });
    let mut crc = 0xFFFF_FFFFu32;
    for &b in bytes {
        crc = table[((crc ^ b as u32) & 0xff) as usize] ^ (crc >> 8);
    }
    !crc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{assign_ids, parse_document};

    pub const D1: &str = "<site><asia><item><name>n1</name><desc/></item><item><name>n2</name></item></asia><europe><item><name>n3</name></item></europe></site>";

    fn store_of(doc: &str) -> PathStore {
        PathStore::build_from_xml(doc.as_bytes(), "test", false).unwrap()
    }

    #[test]
    fn d1_id_sequences() {
        let store = store_of(D1);
        let items: Vec<_> = store.scan_ids(PathId(3)).unwrap().collect();
        assert_eq!(
            items,
            vec![StructuralId::element(3, 3, 3), StructuralId::element(6, 5, 3)]
        );
        let europe_items: Vec<_> = store.scan_ids(PathId(8)).unwrap().collect();
        assert_eq!(europe_items, vec![StructuralId::element(9, 8, 3)]);
    }

    #[test]
    fn d1_value_sequences() {
        let store = store_of(D1);
        let texts: Vec<_> = store.scan_values(PathId(5)).unwrap().collect();
        assert_eq!(texts.len(), 2);
        assert_eq!(texts[0].owner, StructuralId::element(4, 1, 4));
        assert_eq!(texts[0].value, "n1");
        assert_eq!(texts[1].owner, StructuralId::element(7, 4, 4));
        assert_eq!(texts[1].value, "n2");
        let t2: Vec<_> = store.scan_values(PathId(10)).unwrap().collect();
        assert_eq!(t2.len(), 1);
        assert_eq!(t2[0].owner, StructuralId::element(10, 7, 4));
        assert_eq!(t2[0].value, "n3");
    }

    #[test]
    fn single_element_store() {
        let store = store_of("<a/>");
        let ids: Vec<_> = store.scan_ids(PathId(1)).unwrap().collect();
        assert_eq!(ids, vec![StructuralId::element(1, 1, 1)]);
        assert!(store.scan_values(PathId(1)).is_err());
    }

    #[test]
    fn unknown_path_errors() {
        let store = store_of(D1);
        assert!(matches!(store.scan_ids(PathId(42)), Err(StoreError::UnknownPath(_))));
        // Path 5 is a #text path: it has values, not ids.
        assert!(matches!(store.scan_ids(PathId(5)), Err(StoreError::UnknownPath(_))));
    }

    #[test]
    fn scans_restart_independently() {
        let store = store_of(D1);
        let mut a = store.scan_ids(PathId(3)).unwrap();
        let first = a.next().unwrap();
        let b = store.scan_ids(PathId(3)).unwrap();
        assert_eq!(b.collect::<Vec<_>>().len(), 2);
        assert_eq!(first.pre, 3);
    }

    #[test]
    fn partition_law_and_order() {
        let docs = [
            D1,
            r#"<a x="1" y="2">t<b z="3"><c/>u</b>v</a>"#,
            "<a><b><c/><b><c/></b></b></a>",
        ];
        for doc in docs {
            let store = store_of(doc);
            let mut all: Vec<StructuralId> = Vec::new();
            for p in store.summary().paths() {
                if let Ok(scan) = store.scan_ids(p) {
                    let ids: Vec<_> = scan.collect();
                    for w in ids.windows(2) {
                        assert!(w[0].pre < w[1].pre, "scan order violated in {doc}");
                    }
                    // Ancestor-free within one path.
                    for i in 0..ids.len() {
                        for j in 0..ids.len() {
                            if i != j {
                                assert!(!ids[i].is_ancestor_of(&ids[j]), "nested ids in one path");
                            }
                        }
                    }
                    all.extend(ids);
                }
                if let Ok(scan) = store.scan_values(p) {
                    let entries: Vec<_> = scan.collect();
                    for w in entries.windows(2) {
                        assert!(w[0].self_id.pre < w[1].self_id.pre);
                    }
                    for e in &entries {
                        assert_eq!(e.self_id.depth, e.owner.depth + 1);
                    }
                }
            }
            // Element + attribute ids, reassembled and sorted, must be dense.
            let events = crate::ingest::parse_with_ids(doc.as_bytes()).unwrap();
            let mut expected: Vec<StructuralId> = events
                .iter()
                .filter_map(|ev| match ev {
                    NodeEvent::ElementEnd { id, .. } => *id,
                    NodeEvent::Attribute { id, .. } => *id,
                    _ => None,
                })
                .collect();
            expected.sort_by_key(|id| id.pre);
            all.sort_by_key(|id| id.pre);
            assert_eq!(all, expected, "partition law violated for {doc}");
        }
    }

    #[test]
    fn summary_mismatch_detected() {
        let summary =
            crate::summary::build_summary(parse_document(b"<a><b/></a>")).unwrap();
        let events = assign_ids(parse_document(b"<a><c/></a>"));
        let err = partition(events, Arc::new(summary), "bad").unwrap_err();
        assert!(matches!(err, StoreError::SummaryMismatch(_)));
    }

    #[test]
    fn persist_open_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = store_of(D1);
        store.persist(dir.path()).unwrap();
        let opened = PathStore::open(dir.path()).unwrap();
        assert_eq!(opened.document(), "test");
        assert_eq!(opened.summary().len(), store.summary().len());
        for p in store.summary().paths() {
            match store.scan_ids(p) {
                Ok(scan) => {
                    let orig: Vec<_> = scan.collect();
                    let back: Vec<_> = opened.scan_ids(p).unwrap().collect();
                    assert_eq!(orig, back);
                }
                Err(_) => assert!(opened.scan_ids(p).is_err()),
            }
            match store.scan_values(p) {
                Ok(scan) => {
                    let orig: Vec<_> = scan.collect();
                    let back: Vec<_> = opened.scan_values(p).unwrap().collect();
                    assert_eq!(orig, back);
                }
                Err(_) => assert!(opened.scan_values(p).is_err()),
            }
        }
    }

    #[test]
    fn persist_open_round_trip_large() {
        // Repetitive ~1e5-node document; sequences compared byte-for-byte.
        let mut doc = String::from("<root>");
        for i in 0..20_000 {
            doc.push_str(&format!("<row id=\"{i}\"><k>v{i}</k></row>"));
        }
        doc.push_str("</root>");
        let dir = tempfile::tempdir().unwrap();
        let store = store_of(&doc);
        store.persist(dir.path()).unwrap();
        let opened = PathStore::open(dir.path()).unwrap();
        for p in store.summary().paths() {
            if let Ok(seq) = store.load_ids(p) {
                let reopened = opened.load_ids(p).unwrap();
                assert_eq!(encode_id_sequence(&seq), encode_id_sequence(&reopened));
            }
            if let Ok(seq) = store.load_vals(p) {
                let reopened = opened.load_vals(p).unwrap();
                assert_eq!(encode_value_sequence(&seq), encode_value_sequence(&reopened));
            }
        }
    }

    #[test]
    fn open_empty_dir_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            PathStore::open(dir.path()),
            Err(StoreError::CorruptStore(_))
        ));
    }

    #[test]
    fn corrupted_file_detected_on_scan() {
        let dir = tempfile::tempdir().unwrap();
        let store = store_of(D1);
        store.persist(dir.path()).unwrap();
        // Flip a byte in one id sequence; the error surfaces on first scan.
        let target = dir.path().join("ids/3.seq");
        let mut bytes = fs::read(&target).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 0xff;
        fs::write(&target, bytes).unwrap();
        let opened = PathStore::open(dir.path()).unwrap();
        assert!(matches!(opened.scan_ids(PathId(3)), Err(StoreError::CorruptStore(_))));
        // Other paths still readable.
        assert!(opened.scan_ids(PathId(1)).is_ok());
    }

    #[test]
    fn crc32_known_vector() {
        assert_eq!(crc32(b"123456789"), 0xCBF4_3926);
    }

    #[test]
    fn tag_counts_for_fanin() {
        let store = store_of(D1);
        let counts = store.tag_counts();
        assert_eq!(counts["item"], 3);
        assert_eq!(counts["name"], 3);
        assert_eq!(counts["site"], 1);
        let report = store.summary().fanin_report(&counts).unwrap();
        assert!((report.median_fanin - 1.6).abs() < 1e-12);
    }
}
