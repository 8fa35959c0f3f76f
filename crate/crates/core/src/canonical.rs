//! Isomorphism of drawings through canonical traversal codes.
//!
//! A code is produced by a breadth-first traversal of the planarization that
//! starts at a root dart, numbers vertices in discovery order, and lists each
//! vertex's colour followed by its rotation (read from the dart back to its
//! discoverer). For a connected map this reconstructs the rooted map, so the
//! minimum over roots and both orientations is a complete invariant up to
//! homeomorphisms of the sphere that may reverse orientation.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use sha2::{Digest, Sha256};

use crate::drawing::{DartId, Drawing, FaceId, FaceMap, VertexId};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode(Vec<u8>);

impl CanonicalCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Option<CanonicalCode> {
        hex::decode(s.trim()).ok().map(CanonicalCode)
    }

    /// Short stable digest used in logs.
    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(&self.0);
        hex::encode(&digest[..8])
    }

    fn from_words(words: &[u16]) -> CanonicalCode {
        CanonicalCode(words.iter().flat_map(|w| w.to_be_bytes()).collect())
    }
}

impl fmt::Debug for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalCode({})", self.hash_hex())
    }
}

const REAL: u16 = 1;
const DUMMY: u16 = 2;

/// Reusable traversal buffers.
struct Encoder<'a> {
    d: &'a Drawing,
    number: Vec<u16>,
    entry: Vec<DartId>,
    queue: Vec<VertexId>,
    code: Vec<u16>,
}

enum Outcome {
    Worse,
    Equal,
    Better,
}

impl<'a> Encoder<'a> {
    fn new(d: &'a Drawing) -> Encoder<'a> {
        let nv = d.num_vertices();
        Encoder {
            d,
            number: vec![0; nv + 1],
            entry: vec![0; nv + 1],
            queue: Vec::with_capacity(nv),
            code: Vec::with_capacity(nv + d.num_darts() + 2),
        }
    }

    #[inline]
    fn step(&self, dart: DartId, mirror: bool) -> DartId {
        if mirror {
            self.d.prev(dart)
        } else {
            self.d.next(dart)
        }
    }

    /// Encodes from `root`, comparing against `best` on the fly and giving up
    /// as soon as the code is known to be larger.
    fn run(&mut self, root: DartId, mirror: bool, best: Option<&[u16]>) -> Outcome {
        let d = self.d;
        for &v in &self.queue {
            self.number[v] = 0;
        }
        self.queue.clear();
        self.code.clear();
        let mut state = if best.is_some() { Outcome::Equal } else { Outcome::Better };
        macro_rules! emit {
            ($w:expr) => {{
                let w: u16 = $w;
                if let (Outcome::Equal, Some(b)) = (&state, best) {
                    let pos = self.code.len();
                    match w.cmp(&b[pos]) {
                        std::cmp::Ordering::Less => state = Outcome::Better,
                        std::cmp::Ordering::Greater => return Outcome::Worse,
                        std::cmp::Ordering::Equal => {}
                    }
                }
                self.code.push(w);
            }};
        }
        emit!(d.n_real() as u16);
        emit!(d.crossings() as u16);
        let r = d.origin(root);
        self.number[r] = 1;
        self.entry[r] = root;
        self.queue.push(r);
        let mut head = 0;
        while head < self.queue.len() {
            let v = self.queue[head];
            head += 1;
            emit!(if d.is_real(v) { REAL } else { DUMMY });
            let start = self.entry[v];
            let mut cur = start;
            loop {
                let t = d.target(cur);
                if self.number[t] == 0 {
                    self.queue.push(t);
                    self.number[t] = self.queue.len() as u16;
                    self.entry[t] = d.twin(cur);
                }
                emit!(self.number[t]);
                cur = self.step(cur, mirror);
                if cur == start {
                    break;
                }
            }
        }
        state
    }
}

struct Best {
    code: Vec<u16>,
    root: DartId,
    mirror: bool,
}

fn minimize(d: &Drawing, roots: impl IntoIterator<Item = (DartId, bool)>) -> Best {
    let mut enc = Encoder::new(d);
    let mut best: Option<Best> = None;
    for (root, mirror) in roots {
        let outcome = enc.run(root, mirror, best.as_ref().map(|b| b.code.as_slice()));
        if let Outcome::Better = outcome {
            match &mut best {
                Some(b) => {
                    b.code.clear();
                    b.code.extend_from_slice(&enc.code);
                    b.root = root;
                    b.mirror = mirror;
                }
                None => {
                    best = Some(Best {
                        code: enc.code.clone(),
                        root,
                        mirror,
                    })
                }
            }
        }
    }
    best.expect("at least one root")
}

/// Root darts: darts at real vertices, narrowed by an isomorphism-invariant
/// key (vertex responsibility, crossings carried by the dart's edge).
fn drawing_roots(d: &Drawing) -> Vec<DartId> {
    let resp = d.responsibilities();
    let mut edge_cr = std::collections::HashMap::new();
    for dart in d.darts() {
        *edge_cr.entry(dart.edge).or_insert(0usize) += 1;
    }
    let key = |dart: DartId| (resp[d.origin(dart) - 1], edge_cr[&d.edge(dart)]);
    let all: Vec<DartId> = (1..=d.n_real()).flat_map(|v| d.rotation(v)).collect();
    let min = all.iter().map(|&r| key(r)).min().expect("drawing has real vertices");
    all.into_iter().filter(|&r| key(r) == min).collect()
}

pub fn canonical_code(d: &Drawing) -> CanonicalCode {
    let roots = drawing_roots(d);
    let best = minimize(d, roots.iter().flat_map(|&r| [(r, false), (r, true)]));
    CanonicalCode::from_words(&best.code)
}

/// Canonical code together with the canonically labelled drawing: real
/// vertices renumbered in traversal order, mirrored when the minimum was
/// reached in the reversed orientation. Isomorphic inputs give equal output.
pub fn canonical_form(d: &Drawing) -> (CanonicalCode, Drawing) {
    let roots = drawing_roots(d);
    let best = minimize(d, roots.iter().flat_map(|&r| [(r, false), (r, true)]));
    let mut enc = Encoder::new(d);
    enc.run(best.root, best.mirror, None);
    let mut perm = vec![0; d.n_real()];
    let mut next_label = 1;
    for &v in &enc.queue {
        if d.is_real(v) {
            perm[v - 1] = next_label;
            next_label += 1;
        }
    }
    let relabelled = d.relabel(&perm).expect("traversal reaches every real vertex");
    let form = if best.mirror { relabelled.mirror() } else { relabelled };
    (CanonicalCode::from_words(&best.code), form)
}

/// Rooted code of a face: minimum over its darts in both orientations.
pub fn face_code(d: &Drawing, faces: &FaceMap, f: FaceId) -> CanonicalCode {
    let darts = &faces.face(f).darts;
    // In the reversed orientation the face on the left of a dart is the face
    // on the right of its twin.
    let best = minimize(
        d,
        darts
            .iter()
            .flat_map(|&x| [(x, false), (d.twin(x), true)]),
    );
    CanonicalCode::from_words(&best.code)
}

/// One face per automorphism orbit, the smallest id of each orbit, ascending.
pub fn face_orbits(d: &Drawing, faces: &FaceMap) -> Vec<FaceId> {
    let mut seen: BTreeMap<CanonicalCode, FaceId> = BTreeMap::new();
    for f in 0..faces.len() {
        seen.entry(face_code(d, faces, f)).or_insert(f);
    }
    let mut reps: Vec<FaceId> = seen.into_values().collect();
    reps.sort_unstable();
    reps
}

/// Set of canonical codes seen so far.
#[derive(Clone, Debug, Default)]
pub struct DedupStore {
    codes: HashSet<CanonicalCode>,
}

impl DedupStore {
    pub fn new() -> DedupStore {
        DedupStore::default()
    }

    /// True iff `code` was not yet present.
    pub fn insert_if_new(&mut self, code: CanonicalCode) -> bool {
        self.codes.insert(code)
    }

    pub fn contains(&self, code: &CanonicalCode) -> bool {
        self.codes.contains(code)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn merge(&mut self, other: DedupStore) {
        self.codes.extend(other.codes);
    }

    /// Sorted hex codes, one per line.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<String> = self.codes.iter().map(CanonicalCode::to_hex).collect();
        lines.sort();
        let mut s = lines.join("\n");
        if !s.is_empty() {
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Option<DedupStore> {
        let mut store = DedupStore::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            store.insert_if_new(CanonicalCode::from_hex(line)?);
        }
        Some(store)
    }
}
