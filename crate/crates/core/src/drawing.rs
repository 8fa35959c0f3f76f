//! Good drawings of `K_n` stored as planarized rotation systems on the sphere.
//!
//! Every crossing of the drawing is a degree-4 dummy vertex. A segment is the
//! piece of a `K_n` edge between two consecutive vertices of the
//! planarization and is made of two darts. Darts are numbered so that
//! `twin(d) == d ^ 1`, and the rotation `next` lists the darts around their
//! origin in clockwise order. Faces are traced with `next(twin(d))`, which
//! keeps the face on the left of every dart.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::DrawingError;

pub type DartId = usize;
/// Vertex ids are 1-based: real vertices are `1..=n_real`, dummies follow.
pub type VertexId = usize;
pub type FaceId = usize;

/// An edge of `K_n`, stored with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    a: u16,
    b: u16,
}

impl Edge {
    pub fn new(u: VertexId, v: VertexId) -> Edge {
        assert!(u != v, "edge endpoints must differ");
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        Edge {
            a: a as u16,
            b: b as u16,
        }
    }

    pub fn a(self) -> VertexId {
        self.a as VertexId
    }

    pub fn b(self) -> VertexId {
        self.b as VertexId
    }

    pub fn contains(self, v: VertexId) -> bool {
        self.a() == v || self.b() == v
    }

    pub fn shares_endpoint(self, other: Edge) -> bool {
        self.contains(other.a()) || self.contains(other.b())
    }

    /// The endpoint that is not `v`.
    pub fn other(self, v: VertexId) -> VertexId {
        if self.a() == v {
            self.b()
        } else {
            self.a()
        }
    }

    /// Dense index of the edge among all edges of `K_n`, usable as a bit position.
    pub fn index(self) -> usize {
        let (a, b) = (self.a(), self.b());
        (b - 1) * (b - 2) / 2 + (a - 1)
    }

    pub fn bit(self) -> u128 {
        1u128 << self.index()
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.a, self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dart {
    pub twin: DartId,
    pub next: DartId,
    pub origin: VertexId,
    pub edge: Edge,
    pub seg: usize,
}

/// A good drawing of `K_n`, given by its planarization.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Drawing {
    n_real: usize,
    x: usize,
    darts: Vec<Dart>,
    prev: Vec<DartId>,
    /// Smallest dart leaving each vertex, indexed by `id - 1`.
    vertex_dart: Vec<DartId>,
}

pub(crate) const NO_DART: DartId = usize::MAX;

impl Drawing {
    /// Assembles a drawing from raw darts without validating it.
    ///
    /// Derived tables are filled on a best-effort basis so that broken input
    /// can still be handed to [`validate`].
    pub fn from_parts(n_real: usize, x: usize, darts: Vec<Dart>) -> Drawing {
        let nd = darts.len();
        let mut prev = vec![NO_DART; nd];
        for (d, dart) in darts.iter().enumerate() {
            if dart.next < nd {
                prev[dart.next] = d;
            }
        }
        let nv = n_real + x;
        let mut vertex_dart = vec![NO_DART; nv];
        for (d, dart) in darts.iter().enumerate() {
            if dart.origin >= 1 && dart.origin <= nv && vertex_dart[dart.origin - 1] == NO_DART {
                vertex_dart[dart.origin - 1] = d;
            }
        }
        Drawing {
            n_real,
            x,
            darts,
            prev,
            vertex_dart,
        }
    }

    pub fn n_real(&self) -> usize {
        self.n_real
    }

    /// Number of crossings (dummy vertices).
    pub fn crossings(&self) -> usize {
        self.x
    }

    pub fn num_vertices(&self) -> usize {
        self.n_real + self.x
    }

    pub fn num_darts(&self) -> usize {
        self.darts.len()
    }

    pub fn num_segments(&self) -> usize {
        self.darts.len() / 2
    }

    pub fn darts(&self) -> &[Dart] {
        &self.darts
    }

    #[inline]
    pub fn twin(&self, d: DartId) -> DartId {
        self.darts[d].twin
    }

    #[inline]
    pub fn next(&self, d: DartId) -> DartId {
        self.darts[d].next
    }

    #[inline]
    pub fn prev(&self, d: DartId) -> DartId {
        self.prev[d]
    }

    #[inline]
    pub fn origin(&self, d: DartId) -> VertexId {
        self.darts[d].origin
    }

    /// Vertex at the far end of `d`.
    #[inline]
    pub fn target(&self, d: DartId) -> VertexId {
        self.darts[self.darts[d].twin].origin
    }

    #[inline]
    pub fn edge(&self, d: DartId) -> Edge {
        self.darts[d].edge
    }

    #[inline]
    pub fn seg(&self, d: DartId) -> usize {
        self.darts[d].seg
    }

    /// Successor of `d` along the face on its left.
    #[inline]
    pub fn face_next(&self, d: DartId) -> DartId {
        self.darts[self.darts[d].twin].next
    }

    pub fn is_real(&self, v: VertexId) -> bool {
        v >= 1 && v <= self.n_real
    }

    /// Smallest dart leaving `v`.
    pub fn vertex_dart(&self, v: VertexId) -> DartId {
        self.vertex_dart[v - 1]
    }

    /// Darts leaving `v` in clockwise order, starting from the smallest id.
    pub fn rotation(&self, v: VertexId) -> Rotation<'_> {
        let start = self.vertex_dart(v);
        Rotation {
            drawing: self,
            start,
            cur: start,
            done: false,
        }
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.rotation(v).count()
    }

    /// The dart leaving real vertex `v` that starts edge `e`.
    pub fn dart_on_edge(&self, v: VertexId, e: Edge) -> Option<DartId> {
        self.rotation(v).find(|&d| self.edge(d) == e)
    }

    /// Real vertices as a bitmask (bit `v - 1`).
    pub fn real_mask(&self) -> u32 {
        if self.n_real >= 32 {
            u32::MAX
        } else {
            (1u32 << self.n_real) - 1
        }
    }

    /// The two edges crossing at dummy vertex `c`, smaller first.
    pub fn crossing_edges(&self, c: VertexId) -> (Edge, Edge) {
        let d = self.vertex_dart(c);
        let e1 = self.edge(d);
        let e2 = self.edge(self.next(d));
        if e1 < e2 {
            (e1, e2)
        } else {
            (e2, e1)
        }
    }

    /// Dummy vertices in id order.
    pub fn dummies(&self) -> std::ops::RangeInclusive<VertexId> {
        self.n_real + 1..=self.n_real + self.x
    }

    /// All crossing pairs of edges, one per dummy.
    pub fn crossing_pairs(&self) -> CrossingPairSet {
        let pairs = self.dummies().map(|c| self.crossing_edges(c)).collect();
        CrossingPairSet { pairs }
    }

    /// Number of crossings involving at least one edge incident with `v`.
    pub fn crossings_at(&self, v: VertexId) -> Result<usize, DrawingError> {
        if !self.is_real(v) {
            return Err(DrawingError::VertexOutOfRange {
                vertex: v,
                n_real: self.n_real,
            });
        }
        Ok(self.responsibility(v))
    }

    pub(crate) fn responsibility(&self, v: VertexId) -> usize {
        self.dummies()
            .filter(|&c| {
                let (e, f) = self.crossing_edges(c);
                e.contains(v) || f.contains(v)
            })
            .count()
    }

    /// Per-vertex crossing responsibility, indexed by `v - 1`.
    pub fn responsibilities(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_real];
        for c in self.dummies() {
            let (e, f) = self.crossing_edges(c);
            let mut seen = 0u32;
            for v in [e.a(), e.b(), f.a(), f.b()] {
                if seen & (1 << v) == 0 {
                    seen |= 1 << v;
                    out[v - 1] += 1;
                }
            }
        }
        out
    }

    pub fn faces(&self) -> Vec<Face> {
        FaceMap::new(self).faces
    }

    /// Removes real vertex `v` and its edges; surviving edges are fused
    /// across the dummies that disappear. Real vertices above `v` shift down.
    pub fn delete_vertex(&self, v: VertexId) -> Result<Drawing, DrawingError> {
        if !self.is_real(v) {
            return Err(DrawingError::VertexOutOfRange {
                vertex: v,
                n_real: self.n_real,
            });
        }
        if self.n_real <= 4 {
            return Err(DrawingError::TooSmall { n_real: self.n_real });
        }
        let relabel = |u: VertexId| if u < v { u } else { u - 1 };
        let n = self.n_real;
        let nv = self.num_vertices();
        let removed: Vec<bool> = (1..=nv)
            .map(|u| {
                if u == v {
                    true
                } else if self.is_real(u) {
                    false
                } else {
                    let (e, f) = self.crossing_edges(u);
                    e.contains(v) || f.contains(v)
                }
            })
            .collect();
        // Builder index: surviving real u -> relabel(u) - 1, surviving dummies after.
        let mut index = vec![usize::MAX; nv + 1];
        let mut next_index = n - 1;
        for u in 1..=nv {
            if removed[u - 1] {
                continue;
            }
            if self.is_real(u) {
                index[u] = relabel(u) - 1;
            } else {
                index[u] = next_index;
                next_index += 1;
            }
        }
        let mut rot = vec![Vec::new(); next_index];
        for u in 1..=nv {
            if removed[u - 1] {
                continue;
            }
            for d in self.rotation(u) {
                let e = self.edge(d);
                if e.contains(v) {
                    continue;
                }
                // Walk straight through removed dummies.
                let mut cur = d;
                while removed[self.target(cur) - 1] {
                    let t = self.twin(cur);
                    cur = self.next(self.next(t));
                }
                rot[index[u]].push(Slot {
                    to: index[self.target(cur)],
                    edge: Edge::new(relabel(e.a()), relabel(e.b())),
                    tag: Some(d),
                });
            }
        }
        let builder = RotationBuilder { n_real: n - 1, rot };
        Ok(builder.build()?.drawing)
    }

    /// Relabels real vertices: vertex `v` becomes `perm[v - 1]`.
    pub fn relabel(&self, perm: &[VertexId]) -> Result<Drawing, DrawingError> {
        let n = self.n_real;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p < 1 || p > n || std::mem::replace(&mut seen[p - 1], true)) {
            return Err(DrawingError::BadPermutation);
        }
        let mut b = self.to_builder();
        let mut rot = vec![Vec::new(); b.rot.len()];
        for (i, slots) in b.rot.drain(..).enumerate() {
            let map_index = |j: usize| if j < n { perm[j] - 1 } else { j };
            let slots = slots
                .into_iter()
                .map(|s| Slot {
                    to: map_index(s.to),
                    edge: Edge::new(perm[s.edge.a() - 1], perm[s.edge.b() - 1]),
                    tag: s.tag,
                })
                .collect();
            rot[map_index(i)] = slots;
        }
        b.rot = rot;
        Ok(b.build()?.drawing)
    }

    /// The reflected drawing: every rotation reversed.
    pub fn mirror(&self) -> Drawing {
        let mut b = self.to_builder();
        for slots in &mut b.rot {
            slots.reverse();
        }
        b.build().expect("mirror of a consistent drawing").drawing
    }

    /// Renumbers dummies and darts into the canonical order of this labeling.
    pub fn normalized(&self) -> Result<Drawing, DrawingError> {
        Ok(self.to_builder().build()?.drawing)
    }

    pub(crate) fn to_builder(&self) -> RotationBuilder {
        let rot = (1..=self.num_vertices())
            .map(|u| {
                self.rotation(u)
                    .map(|d| Slot {
                        to: self.target(d) - 1,
                        edge: self.edge(d),
                        tag: Some(d),
                    })
                    .collect()
            })
            .collect();
        RotationBuilder {
            n_real: self.n_real,
            rot,
        }
    }
}

pub struct Rotation<'a> {
    drawing: &'a Drawing,
    start: DartId,
    cur: DartId,
    done: bool,
}

impl Iterator for Rotation<'_> {
    type Item = DartId;

    fn next(&mut self) -> Option<DartId> {
        if self.done {
            return None;
        }
        let d = self.cur;
        self.cur = self.drawing.next(d);
        if self.cur == self.start {
            self.done = true;
        }
        Some(d)
    }
}

/// The crossing-free drawing of `K_4`.
pub fn seed_k4() -> Drawing {
    // Vertex 4 sits inside the triangle 1, 2, 3.
    let rotations: [&[usize]; 4] = [&[2, 4, 3], &[3, 4, 1], &[1, 4, 2], &[1, 2, 3]];
    let rot = rotations
        .iter()
        .enumerate()
        .map(|(i, nbrs)| {
            nbrs.iter()
                .map(|&w| Slot {
                    to: w - 1,
                    edge: Edge::new(i + 1, w),
                    tag: None,
                })
                .collect()
        })
        .collect();
    RotationBuilder { n_real: 4, rot }
        .build()
        .expect("seed rotation system is consistent")
        .drawing
}

/// A face of the planarization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub id: FaceId,
    /// Darts in face-walk order, starting with the smallest id.
    pub darts: Vec<DartId>,
}

/// All faces of a drawing together with dart-to-face lookups.
#[derive(Clone, Debug)]
pub struct FaceMap {
    pub faces: Vec<Face>,
    face_of: Vec<FaceId>,
    pos_in_face: Vec<usize>,
}

impl FaceMap {
    pub fn new(d: &Drawing) -> FaceMap {
        let nd = d.num_darts();
        let mut face_of = vec![usize::MAX; nd];
        let mut pos_in_face = vec![0; nd];
        let mut faces = Vec::new();
        for start in 0..nd {
            if face_of[start] != usize::MAX {
                continue;
            }
            let id = faces.len();
            let mut darts = Vec::new();
            let mut cur = start;
            loop {
                face_of[cur] = id;
                pos_in_face[cur] = darts.len();
                darts.push(cur);
                cur = d.face_next(cur);
                if cur == start || darts.len() > nd {
                    break;
                }
            }
            faces.push(Face { id, darts });
        }
        FaceMap {
            faces,
            face_of,
            pos_in_face,
        }
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Face on the left of dart `d`.
    #[inline]
    pub fn face_of(&self, d: DartId) -> FaceId {
        self.face_of[d]
    }

    #[inline]
    pub fn pos_in_face(&self, d: DartId) -> usize {
        self.pos_in_face[d]
    }

    pub fn face(&self, f: FaceId) -> &Face {
        &self.faces[f]
    }
}

/// Unordered pairs of crossing edges.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CrossingPairSet {
    pub pairs: BTreeSet<(Edge, Edge)>,
}

impl CrossingPairSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn is_superset(&self, other: &CrossingPairSet) -> bool {
        self.pairs.is_superset(&other.pairs)
    }
}

/// One entry of a vertex rotation during construction.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Slot {
    /// Builder index of the neighbour.
    pub to: usize,
    pub edge: Edge,
    /// Caller-defined provenance carried to the built dart.
    pub tag: Option<DartId>,
}

/// Rotation system over arbitrary vertex indices. Real vertex `id` must be
/// at index `id - 1`; all other indices are dummies.
#[derive(Clone, Debug)]
pub(crate) struct RotationBuilder {
    pub n_real: usize,
    pub rot: Vec<Vec<Slot>>,
}

pub(crate) struct Built {
    pub drawing: Drawing,
    /// Tag of each dart of the built drawing.
    pub tags: Vec<Option<DartId>>,
}

impl RotationBuilder {
    fn back_slot(&self, at: usize, from: usize) -> Option<usize> {
        self.rot[at].iter().position(|s| s.to == from)
    }

    /// Builds the normalized drawing: dummies sorted by (smallest edge,
    /// position along it), segments by (edge, position), dart `2k` of
    /// segment `k` pointing away from the smaller endpoint of its edge.
    pub fn build(&self) -> Result<Built, DrawingError> {
        let n = self.n_real;
        let nv = self.rot.len();
        let malformed = |msg: String| DrawingError::Malformed(msg);
        if nv < n {
            return Err(malformed("fewer vertices than real vertices".into()));
        }
        let total_slots: usize = self.rot.iter().map(Vec::len).sum();
        // (edge, position) pairs seen at each dummy.
        let mut dummy_marks: Vec<Vec<(Edge, usize)>> = vec![Vec::new(); nv];
        let mut paths: Vec<(Edge, Vec<usize>)> = Vec::with_capacity(n * (n - 1) / 2);
        for a in 1..=n {
            for b in a + 1..=n {
                let e = Edge::new(a, b);
                let Some(first) = self.rot[a - 1].iter().position(|s| s.edge == e) else {
                    continue;
                };
                let mut path = vec![a - 1];
                let mut prev = a - 1;
                let mut cur = self.rot[a - 1][first].to;
                while cur >= n {
                    if self.rot[cur].len() != 4 {
                        return Err(malformed(format!("dummy on edge {e} has degree {}", self.rot[cur].len())));
                    }
                    let j = self
                        .back_slot(cur, prev)
                        .ok_or_else(|| malformed(format!("missing back slot on edge {e}")))?;
                    if self.rot[cur][j].edge != e {
                        return Err(malformed(format!("edge label mismatch on edge {e}")));
                    }
                    dummy_marks[cur].push((e, path.len()));
                    path.push(cur);
                    if path.len() > nv {
                        return Err(malformed(format!("edge {e} does not terminate")));
                    }
                    let opp = self.rot[cur][(j + 2) % 4];
                    if opp.edge != e {
                        return Err(malformed(format!("edge {e} does not continue straight")));
                    }
                    prev = cur;
                    cur = opp.to;
                }
                if cur != b - 1 {
                    return Err(malformed(format!("edge {e} ends at the wrong vertex")));
                }
                match self.back_slot(cur, prev) {
                    Some(j) if self.rot[cur][j].edge == e => {}
                    _ => return Err(malformed(format!("edge {e} has no matching final slot"))),
                }
                path.push(cur);
                paths.push((e, path));
            }
        }
        let mut dummies: Vec<(Edge, usize, usize)> = Vec::new();
        for (u, marks) in dummy_marks.iter().enumerate().skip(n) {
            if marks.len() != 2 {
                return Err(malformed(format!("dummy index {u} lies on {} edges", marks.len())));
            }
            let key = marks.iter().min().copied().unwrap();
            dummies.push((key.0, key.1, u));
        }
        dummies.sort_unstable();
        let mut new_id = vec![0usize; nv];
        for (i, id) in new_id.iter_mut().enumerate().take(n) {
            *id = i + 1;
        }
        for (k, &(_, _, u)) in dummies.iter().enumerate() {
            new_id[u] = n + 1 + k;
        }
        // Dart id for every (vertex, slot).
        let mut offsets = Vec::with_capacity(nv + 1);
        let mut acc = 0;
        for r in &self.rot {
            offsets.push(acc);
            acc += r.len();
        }
        let mut dart_of = vec![NO_DART; total_slots];
        let mut darts = Vec::with_capacity(total_slots);
        let mut tags = Vec::with_capacity(total_slots);
        for (e, path) in &paths {
            for (j, w) in path.windows(2).enumerate() {
                let (p, q) = (w[0], w[1]);
                let sp = self.back_slot(p, q).unwrap();
                let sq = self.back_slot(q, p).unwrap();
                let k = darts.len();
                for (slot_flat, origin, tag) in [
                    (offsets[p] + sp, p, self.rot[p][sp].tag),
                    (offsets[q] + sq, q, self.rot[q][sq].tag),
                ] {
                    if dart_of[slot_flat] != NO_DART {
                        return Err(malformed("slot used by two segments".into()));
                    }
                    dart_of[slot_flat] = darts.len();
                    darts.push(Dart {
                        twin: NO_DART,
                        next: NO_DART,
                        origin: new_id[origin],
                        edge: *e,
                        seg: j,
                    });
                    tags.push(tag);
                }
                darts[k].twin = k + 1;
                darts[k + 1].twin = k;
            }
        }
        if darts.len() != total_slots {
            return Err(malformed(format!(
                "{} slots but {} darts reachable from edges",
                total_slots,
                darts.len()
            )));
        }
        for (u, r) in self.rot.iter().enumerate() {
            let deg = r.len();
            for i in 0..deg {
                let d = dart_of[offsets[u] + i];
                darts[d].next = dart_of[offsets[u] + (i + 1) % deg];
            }
        }
        let drawing = Drawing::from_parts(n, nv - n, darts);
        Ok(Built { drawing, tags })
    }
}

/// A single failed invariant with a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Structural(String),
    CrossingCount { declared: usize, found: usize },
    Degree { vertex: VertexId, expected: usize, found: usize },
    NotAlternating { vertex: VertexId },
    AdjacentEdgesCross { vertex: VertexId, e: Edge, f: Edge },
    EdgesCrossTwice { e: Edge, f: Edge },
    EdgeAtWrongVertex { vertex: VertexId, edge: Edge },
    BrokenEdgePath { edge: Edge, reason: String },
    Disconnected,
    Euler { vertices: usize, segments: usize, faces: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Structural(s) => write!(f, "structural: {s}"),
            Violation::CrossingCount { declared, found } => {
                write!(f, "crossing count: declared {declared}, found {found}")
            }
            Violation::Degree { vertex, expected, found } => {
                write!(f, "degree: vertex {vertex} has {found}, expected {expected}")
            }
            Violation::NotAlternating { vertex } => {
                write!(f, "dummy {vertex} does not alternate between two edges")
            }
            Violation::AdjacentEdgesCross { vertex, e, f: g } => {
                write!(f, "adjacent edges cross: {e} and {g} at dummy {vertex}")
            }
            Violation::EdgesCrossTwice { e, f: g } => write!(f, "edges cross twice: {e} and {g}"),
            Violation::EdgeAtWrongVertex { vertex, edge } => {
                write!(f, "vertex {vertex} carries edge {edge}")
            }
            Violation::BrokenEdgePath { edge, reason } => write!(f, "edge {edge}: {reason}"),
            Violation::Disconnected => write!(f, "planarization is disconnected"),
            Violation::Euler { vertices, segments, faces } => {
                write!(f, "euler: V={vertices} E={segments} F={faces}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every drawing invariant. Structural damage stops the check early
/// so later stages never index out of bounds.
pub fn validate(d: &Drawing) -> ValidationReport {
    let mut v = Vec::new();
    let nd = d.num_darts();
    let nv = d.num_vertices();
    let n = d.n_real();
    if n < 4 {
        v.push(Violation::Structural(format!("n_real = {n} < 4")));
        return ValidationReport { violations: v };
    }
    for (i, dart) in d.darts().iter().enumerate() {
        if dart.twin >= nd || dart.next >= nd {
            v.push(Violation::Structural(format!("dart {i} points outside the dart table")));
        } else if dart.twin == i || d.darts()[dart.twin].twin != i {
            v.push(Violation::Structural(format!("dart {i}: twin is not an involution")));
        } else if d.darts()[dart.twin].edge != dart.edge || d.darts()[dart.twin].seg != dart.seg {
            v.push(Violation::Structural(format!("dart {i}: twin carries a different segment")));
        }
        if dart.origin < 1 || dart.origin > nv {
            v.push(Violation::Structural(format!("dart {i}: origin {} out of range", dart.origin)));
        }
        if dart.edge.a() < 1 || dart.edge.b() > n {
            v.push(Violation::Structural(format!("dart {i}: edge {} not a K_n edge", dart.edge)));
        }
    }
    if !v.is_empty() {
        return ValidationReport { violations: v };
    }
    if d.prev.contains(&NO_DART) {
        v.push(Violation::Structural("rotation is not a permutation".into()));
        return ValidationReport { violations: v };
    }
    for (i, dart) in d.darts().iter().enumerate() {
        if d.origin(dart.next) != dart.origin {
            v.push(Violation::Structural(format!("dart {i}: rotation leaves its vertex")));
        }
    }
    if !v.is_empty() {
        return ValidationReport { violations: v };
    }
    // Each vertex must own exactly one rotation cycle.
    let mut cycles = vec![0usize; nv];
    let mut seen = vec![false; nd];
    for s in 0..nd {
        if seen[s] {
            continue;
        }
        let mut c = s;
        while !seen[c] {
            seen[c] = true;
            c = d.next(c);
        }
        cycles[d.origin(s) - 1] += 1;
    }
    for (i, &c) in cycles.iter().enumerate() {
        if c != 1 {
            v.push(Violation::Structural(format!("vertex {} has {c} rotation cycles", i + 1)));
        }
    }
    if !v.is_empty() {
        return ValidationReport { violations: v };
    }

    let dummies_found = nv - n;
    if d.x != dummies_found {
        v.push(Violation::CrossingCount {
            declared: d.x,
            found: dummies_found,
        });
    }
    for u in 1..=n {
        let deg = d.degree(u);
        if deg != n - 1 {
            v.push(Violation::Degree {
                vertex: u,
                expected: n - 1,
                found: deg,
            });
        }
        let mut edges_here = BTreeSet::new();
        for dd in d.rotation(u) {
            let e = d.edge(dd);
            if !e.contains(u) || !edges_here.insert(e) {
                v.push(Violation::EdgeAtWrongVertex { vertex: u, edge: e });
            }
        }
    }
    let mut pairs = BTreeSet::new();
    for c in d.dummies() {
        let rot: Vec<DartId> = d.rotation(c).collect();
        if rot.len() != 4 {
            v.push(Violation::Degree {
                vertex: c,
                expected: 4,
                found: rot.len(),
            });
            continue;
        }
        let (e0, e1, e2, e3) = (d.edge(rot[0]), d.edge(rot[1]), d.edge(rot[2]), d.edge(rot[3]));
        if e0 != e2 || e1 != e3 || e0 == e1 {
            v.push(Violation::NotAlternating { vertex: c });
            continue;
        }
        if e0.shares_endpoint(e1) {
            v.push(Violation::AdjacentEdgesCross { vertex: c, e: e0, f: e1 });
        }
        let key = if e0 < e1 { (e0, e1) } else { (e1, e0) };
        if !pairs.insert(key) {
            v.push(Violation::EdgesCrossTwice { e: key.0, f: key.1 });
        }
    }
    // Edge paths.
    let mut seg_count = std::collections::HashMap::new();
    for dart in d.darts() {
        *seg_count.entry(dart.edge).or_insert(0usize) += 1;
    }
    for a in 1..=n {
        for b in a + 1..=n {
            let e = Edge::new(a, b);
            let Some(start) = d.dart_on_edge(a, e) else {
                v.push(Violation::BrokenEdgePath {
                    edge: e,
                    reason: "missing at lower endpoint".into(),
                });
                continue;
            };
            let mut cur = start;
            let mut k = 0;
            let mut broken = None;
            loop {
                if d.edge(cur) != e {
                    broken = Some("path leaves the edge".to_string());
                    break;
                }
                if d.seg(cur) != k {
                    broken = Some(format!("segment {k} labelled {}", d.seg(cur)));
                    break;
                }
                let t = d.target(cur);
                k += 1;
                if d.is_real(t) {
                    if t != b {
                        broken = Some(format!("ends at {t}"));
                    }
                    break;
                }
                if k > nd {
                    broken = Some("does not terminate".into());
                    break;
                }
                let tw = d.twin(cur);
                cur = d.next(d.next(tw));
            }
            if broken.is_none() && seg_count.get(&e).copied().unwrap_or(0) != 2 * k {
                broken = Some("stray segments carry this edge".into());
            }
            if let Some(reason) = broken {
                v.push(Violation::BrokenEdgePath { edge: e, reason });
            }
        }
    }
    // Connectivity and Euler.
    let mut reached = vec![false; nv];
    let mut stack = vec![1usize];
    reached[0] = true;
    while let Some(u) = stack.pop() {
        for dd in d.rotation(u) {
            let t = d.target(dd);
            if !reached[t - 1] {
                reached[t - 1] = true;
                stack.push(t);
            }
        }
    }
    if reached.iter().any(|r| !r) {
        v.push(Violation::Disconnected);
    } else {
        let faces = FaceMap::new(d).len();
        let segments = nd / 2;
        if nv + faces != segments + 2 {
            v.push(Violation::Euler {
                vertices: nv,
                segments,
                faces,
            });
        }
    }
    ValidationReport { violations: v }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `K_4` drawn on a square with crossing diagonals.
    pub(crate) fn k4_crossed() -> Drawing {
        let c = 4; // builder index of the crossing
        let e13 = Edge::new(1, 3);
        let e24 = Edge::new(2, 4);
        let s = |to: usize, edge: Edge| Slot { to, edge, tag: None };
        let rot = vec![
            vec![s(1, Edge::new(1, 2)), s(c, e13), s(3, Edge::new(1, 4))],
            vec![s(2, Edge::new(2, 3)), s(c, e24), s(0, Edge::new(1, 2))],
            vec![s(3, Edge::new(3, 4)), s(c, e13), s(1, Edge::new(2, 3))],
            vec![s(0, Edge::new(1, 4)), s(c, e24), s(2, Edge::new(3, 4))],
            vec![s(0, e13), s(1, e24), s(2, e13), s(3, e24)],
        ];
        RotationBuilder { n_real: 4, rot }.build().unwrap().drawing
    }

    #[test]
    fn seed_is_planar_k4() {
        let d = seed_k4();
        assert_eq!(d.n_real(), 4);
        assert_eq!(d.crossings(), 0);
        assert_eq!(d.num_darts(), 12);
        assert!(validate(&d).ok(), "{:?}", validate(&d));
        let faces = d.faces();
        assert_eq!(faces.len(), 4);
        // Every face of planar K4 is a triangle.
        assert!(faces.iter().all(|f| f.darts.len() == 3));
        assert!(d.crossing_pairs().is_empty());
        for v in 1..=4 {
            assert_eq!(d.crossings_at(v).unwrap(), 0);
        }
    }

    #[test]
    fn crossed_k4_validates() {
        let d = k4_crossed();
        assert!(validate(&d).ok(), "{:?}", validate(&d));
        assert_eq!(d.crossings(), 1);
        assert_eq!(d.faces().len(), 5);
        let pairs = d.crossing_pairs();
        assert_eq!(pairs.len(), 1);
        let (e, f) = *pairs.pairs.iter().next().unwrap();
        assert!(!e.shares_endpoint(f));
        let total: usize = (1..=4).map(|v| d.crossings_at(v).unwrap()).sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn normalization_is_idempotent() {
        let d = k4_crossed();
        assert_eq!(d.normalized().unwrap(), d);
        let m = d.mirror();
        assert_eq!(m.mirror(), d);
    }

    #[test]
    fn twin_pairs_are_xor_one() {
        let d = k4_crossed();
        for i in 0..d.num_darts() {
            assert_eq!(d.twin(i), i ^ 1);
        }
    }

    #[test]
    fn adjacent_crossing_is_reported() {
        // Relabel the crossing so both of its edges meet at vertex 1.
        let d = k4_crossed();
        let mut darts = d.darts().to_vec();
        let e12 = Edge::new(1, 2);
        let c = 5;
        for dart in darts.iter_mut() {
            if dart.edge == Edge::new(2, 4) {
                dart.edge = Edge::new(1, 2);
            } else if dart.edge == e12 {
                dart.edge = Edge::new(2, 4);
            }
        }
        let broken = Drawing::from_parts(4, 1, darts);
        let report = validate(&broken);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::AdjacentEdgesCross { vertex, .. } if *vertex == c)));
    }

    #[test]
    fn corrupt_twin_is_structural() {
        let d = seed_k4();
        let mut darts = d.darts().to_vec();
        darts[0].twin = 2;
        let report = validate(&Drawing::from_parts(4, 0, darts));
        assert!(!report.ok());
        assert!(matches!(report.violations[0], Violation::Structural(_)));
    }

    #[test]
    fn too_small_to_delete() {
        assert!(matches!(
            seed_k4().delete_vertex(1),
            Err(DrawingError::TooSmall { .. })
        ));
        assert!(seed_k4().crossings_at(5).is_err());
    }

    #[test]
    fn edge_index_is_dense() {
        let mut seen = BTreeSet::new();
        for b in 2..=13 {
            for a in 1..b {
                assert!(seen.insert(Edge::new(a, b).index()));
            }
        }
        assert_eq!(seen.len(), 78);
        assert_eq!(*seen.iter().max().unwrap(), 77);
    }
}
