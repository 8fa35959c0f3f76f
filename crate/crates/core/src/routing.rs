//! Routings of a prospective new edge through the dual graph.
//!
//! A routing starts in an insertion face, crosses a sequence of segments and
//! ends at a corner of its target vertex. It is stored as the darts it
//! crosses: each crossed dart lies on the face being left, so the next face
//! is the face on the left of its twin.

use std::collections::VecDeque;
use std::fmt;

use crate::drawing::{DartId, Drawing, Edge, FaceId, FaceMap, VertexId};

pub const UNREACHABLE: u32 = u32::MAX;

/// Faces as nodes, one arc per segment.
#[derive(Clone, Debug)]
pub struct DualGraph {
    /// For each face: (segment id, opposite face), in face-walk order.
    pub incidence: Vec<Vec<(usize, FaceId)>>,
    /// Real vertices on each face boundary, as a bitmask (bit `v - 1`).
    pub face_vertices: Vec<u32>,
}

impl DualGraph {
    pub fn num_nodes(&self) -> usize {
        self.incidence.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.incidence.iter().map(Vec::len).sum::<usize>() / 2
    }
}

pub fn dual(d: &Drawing, faces: &FaceMap) -> DualGraph {
    let incidence = faces
        .faces
        .iter()
        .map(|f| f.darts.iter().map(|&x| (x / 2, faces.face_of(d.twin(x)))).collect())
        .collect();
    DualGraph {
        incidence,
        face_vertices: face_vertex_masks(d, faces),
    }
}

fn face_vertex_masks(d: &Drawing, faces: &FaceMap) -> Vec<u32> {
    faces
        .faces
        .iter()
        .map(|f| {
            f.darts
                .iter()
                .map(|&x| d.origin(x))
                .filter(|&v| d.is_real(v))
                .fold(0u32, |m, v| m | 1 << (v - 1))
        })
        .collect()
}

/// Dual distances from every face to every real vertex, where arcs whose
/// edge is incident with the target are forbidden.
#[derive(Clone, Debug)]
pub struct DistanceTable {
    /// `dist[w - 1][face]`.
    dist: Vec<Vec<u32>>,
}

impl DistanceTable {
    pub fn new(d: &Drawing, faces: &FaceMap) -> DistanceTable {
        let masks = face_vertex_masks(d, faces);
        let dist = (1..=d.n_real())
            .map(|w| {
                let mut dist = vec![UNREACHABLE; faces.len()];
                let mut queue = VecDeque::new();
                for (f, &m) in masks.iter().enumerate() {
                    if m & (1 << (w - 1)) != 0 {
                        dist[f] = 0;
                        queue.push_back(f);
                    }
                }
                while let Some(f) = queue.pop_front() {
                    for &x in &faces.face(f).darts {
                        if d.edge(x).contains(w) {
                            continue;
                        }
                        let g = faces.face_of(d.twin(x));
                        if dist[g] == UNREACHABLE {
                            dist[g] = dist[f] + 1;
                            queue.push_back(g);
                        }
                    }
                }
                dist
            })
            .collect();
        DistanceTable { dist }
    }

    #[inline]
    pub fn get(&self, face: FaceId, w: VertexId) -> u32 {
        self.dist[w - 1][face]
    }
}

/// Everything routing and realization need about one drawing.
#[derive(Clone, Debug)]
pub struct Planarization<'a> {
    pub drawing: &'a Drawing,
    pub faces: FaceMap,
    pub face_vertices: Vec<u32>,
    pub dist: DistanceTable,
}

impl<'a> Planarization<'a> {
    pub fn new(drawing: &'a Drawing) -> Planarization<'a> {
        let faces = FaceMap::new(drawing);
        let face_vertices = face_vertex_masks(drawing, &faces);
        let dist = DistanceTable::new(drawing, &faces);
        Planarization {
            drawing,
            faces,
            face_vertices,
            dist,
        }
    }

    pub fn n_real(&self) -> usize {
        self.drawing.n_real()
    }

    pub fn distance(&self, face: FaceId, w: VertexId) -> u32 {
        self.dist.get(face, w)
    }

    /// Corners of `w` on face `f`: darts of `f` leaving `w`.
    pub fn corners(&self, f: FaceId, w: VertexId) -> impl Iterator<Item = DartId> + '_ {
        self.faces
            .face(f)
            .darts
            .iter()
            .copied()
            .filter(move |&x| self.drawing.origin(x) == w)
    }

    /// Faces visited by `r`, starting with its origin face.
    pub fn visited_faces(&self, r: &Routing) -> Vec<FaceId> {
        std::iter::once(r.origin_face)
            .chain(r.crossed.iter().map(|&x| self.faces.face_of(self.drawing.twin(x))))
            .collect()
    }

    pub fn passes_through(&self, r: &Routing, f: FaceId) -> bool {
        r.origin_face == f || r.crossed.iter().any(|&x| self.faces.face_of(self.drawing.twin(x)) == f)
    }

    /// Crossed edges in routing order.
    pub fn crossed_edges(&self, r: &Routing) -> Vec<Edge> {
        r.crossed.iter().map(|&x| self.drawing.edge(x)).collect()
    }

    /// Sorted crossed edges: the equivalence key of a routing.
    pub fn key(&self, r: &Routing) -> Vec<Edge> {
        let mut k = self.crossed_edges(r);
        k.sort_unstable();
        k
    }

    /// Checks every routing invariant.
    pub fn routing_is_valid(&self, r: &Routing, distinct_faces: bool) -> bool {
        let d = self.drawing;
        let w = r.target;
        let faces = self.visited_faces(r);
        let mut used = 0u128;
        for (i, &x) in r.crossed.iter().enumerate() {
            if self.faces.face_of(x) != faces[i] {
                return false;
            }
            let e = d.edge(x);
            if e.contains(w) || used & e.bit() != 0 {
                return false;
            }
            used |= e.bit();
        }
        if distinct_faces {
            let mut sorted = faces.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != faces.len() {
                return false;
            }
        }
        d.origin(r.end_corner) == w && self.faces.face_of(r.end_corner) == *faces.last().unwrap()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Routing {
    pub origin_face: FaceId,
    pub target: VertexId,
    /// Crossed darts; each lies on the face being left.
    pub crossed: Vec<DartId>,
    /// Dart leaving `target` on the final face; the new edge enters the
    /// corner just before it.
    pub end_corner: DartId,
}

impl Routing {
    pub fn len(&self) -> usize {
        self.crossed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crossed.is_empty()
    }

    /// Crossed segment ids.
    pub fn segments(&self) -> Vec<usize> {
        self.crossed.iter().map(|&x| x / 2).collect()
    }

    fn sort_key(&self) -> (Vec<usize>, DartId) {
        (self.segments(), self.end_corner)
    }
}

impl fmt::Display for Routing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R F={} w={} len={}:", self.origin_face, self.target, self.len())?;
        for (i, s) in self.segments().iter().enumerate() {
            write!(f, "{}{s}", if i == 0 { " " } else { "," })?;
        }
        Ok(())
    }
}

pub fn distances(p: &Planarization<'_>, face: FaceId, w: VertexId) -> u32 {
    p.distance(face, w)
}

/// All routings from `face` to `w` of length at most `max_len`, in
/// lexicographic order of crossed segment ids.
pub fn enumerate_routings(
    p: &Planarization<'_>,
    face: FaceId,
    w: VertexId,
    max_len: usize,
    distinct_faces: bool,
) -> Vec<Routing> {
    let mut search = Search {
        p,
        w,
        max_len,
        distinct_faces,
        origin: face,
        visited: vec![false; p.faces.len()],
        path: Vec::with_capacity(max_len),
        out: Vec::new(),
    };
    if (p.distance(face, w) as usize) <= max_len {
        search.visited[face] = true;
        search.dfs(face, 0);
    }
    let mut out = search.out;
    out.sort_by_cached_key(Routing::sort_key);
    out
}

struct Search<'p, 'a> {
    p: &'p Planarization<'a>,
    w: VertexId,
    max_len: usize,
    distinct_faces: bool,
    origin: FaceId,
    visited: Vec<bool>,
    path: Vec<DartId>,
    out: Vec<Routing>,
}

impl Search<'_, '_> {
    fn dfs(&mut self, f: FaceId, used: u128) {
        let p = self.p;
        let d = p.drawing;
        let w = self.w;
        if p.face_vertices[f] & (1 << (w - 1)) != 0 {
            for c in p.corners(f, w) {
                self.out.push(Routing {
                    origin_face: self.origin,
                    target: w,
                    crossed: self.path.clone(),
                    end_corner: c,
                });
            }
        }
        let len = self.path.len();
        if len == self.max_len {
            return;
        }
        for &x in &p.faces.face(f).darts {
            let e = d.edge(x);
            if e.contains(w) || used & e.bit() != 0 {
                continue;
            }
            let g = p.faces.face_of(d.twin(x));
            if g == f || (self.distinct_faces && self.visited[g]) {
                continue;
            }
            let dg = p.distance(g, w);
            if dg == UNREACHABLE || len + 1 + dg as usize > self.max_len {
                continue;
            }
            self.path.push(x);
            let was = std::mem::replace(&mut self.visited[g], true);
            self.dfs(g, used | e.bit());
            self.visited[g] = was;
            self.path.pop();
        }
    }
}
