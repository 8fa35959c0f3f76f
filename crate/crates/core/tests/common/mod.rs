//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the routing, realization or canonical-code machinery of the library.

#![allow(dead_code)]

pub mod checks;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use forge_core::canonical::{canonical_code, CanonicalCode};
use forge_core::drawing::{seed_k4, Dart, Drawing, Edge};
use forge_core::extension::{extend_all, ExtendOptions};

/// A half-edge map that grows by inserting edges along dual walks.
#[derive(Clone, Debug)]
pub struct Map {
    /// Real vertices of the base drawing.
    pub n: usize,
    /// Vertex ids are `1..=nv`.
    pub nv: usize,
    /// Internal id of the vertex being added, if any.
    pub apex: Option<usize>,
    /// Clockwise out-half-edges, indexed by vertex id.
    pub rot: Vec<Vec<usize>>,
    pub origin: Vec<usize>,
    /// Edge label as real ids; the apex is labelled `n + 1`.
    pub label: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug)]
pub enum Start {
    /// The apex has no edges yet and sits in this face.
    Isolated,
    /// Leave the apex just before this half-edge in its rotation.
    Before(usize),
}

impl Map {
    pub fn from_drawing(d: &Drawing) -> Map {
        let nv = d.num_vertices();
        let mut rot = vec![Vec::new(); nv + 1];
        for (v, r) in rot.iter_mut().enumerate().skip(1) {
            *r = d.rotation(v).collect();
        }
        let origin = (0..d.num_darts()).map(|h| d.origin(h)).collect();
        let label = (0..d.num_darts()).map(|h| (d.edge(h).a(), d.edge(h).b())).collect();
        Map {
            n: d.n_real(),
            nv,
            apex: None,
            rot,
            origin,
            label,
        }
    }

    pub fn twin(&self, h: usize) -> usize {
        h ^ 1
    }

    pub fn cw_next(&self, h: usize) -> usize {
        let r = &self.rot[self.origin[h]];
        let i = r.iter().position(|&x| x == h).unwrap();
        r[(i + 1) % r.len()]
    }

    pub fn face_next(&self, h: usize) -> usize {
        self.cw_next(self.twin(h))
    }

    /// Face id of every half-edge.
    pub fn faces(&self) -> Vec<usize> {
        let mut face = vec![usize::MAX; self.origin.len()];
        let mut id = 0;
        for h in 0..self.origin.len() {
            if face[h] != usize::MAX {
                continue;
            }
            let mut x = h;
            loop {
                face[x] = id;
                x = self.face_next(x);
                if x == h {
                    break;
                }
            }
            id += 1;
        }
        face
    }

    fn is_new(&self, h: usize) -> bool {
        let (a, b) = self.label[h];
        a == self.n + 1 || b == self.n + 1
    }

    fn touches(&self, h: usize, w: usize) -> bool {
        let (a, b) = self.label[h];
        a == w || b == w
    }

    /// Fewest base segments to cross from each face to a face with `w`,
    /// never crossing edges at `w` or new edges.
    pub fn distances(&self, face: &[usize], w: usize) -> Vec<usize> {
        let nf = face.iter().max().map_or(0, |m| m + 1);
        let mut dist = vec![usize::MAX; nf];
        let mut q = VecDeque::new();
        for h in 0..self.origin.len() {
            if self.origin[h] == w && dist[face[h]] == usize::MAX {
                dist[face[h]] = 0;
                q.push_back(face[h]);
            }
        }
        let mut by_face: Vec<Vec<usize>> = vec![Vec::new(); nf];
        for h in 0..self.origin.len() {
            by_face[face[h]].push(h);
        }
        while let Some(f) = q.pop_front() {
            for &h in &by_face[f] {
                if self.touches(h, w) || self.is_new(h) {
                    continue;
                }
                let g = face[self.twin(h)];
                if dist[g] == usize::MAX {
                    dist[g] = dist[f] + 1;
                    q.push_back(g);
                }
            }
        }
        dist
    }

    /// All walks from `start_face` to a corner of `w` crossing at most
    /// `budget` base segments: each edge at most once, never an edge at `w`
    /// or a new edge. Faces may repeat unless `distinct` is set.
    pub fn walks(
        &self,
        face: &[usize],
        start_face: usize,
        w: usize,
        budget: usize,
        distinct: bool,
        prune: Option<&[usize]>,
    ) -> Vec<(Vec<usize>, usize)> {
        let nf = face.iter().max().map_or(0, |m| m + 1);
        let mut by_face: Vec<Vec<usize>> = vec![Vec::new(); nf];
        for h in 0..self.origin.len() {
            by_face[face[h]].push(h);
        }
        let mut out = Vec::new();
        let mut path = Vec::new();
        let mut used: HashSet<(usize, usize)> = HashSet::new();
        let mut seen = vec![false; nf];
        seen[start_face] = true;
        self.walk_rec(face, &by_face, start_face, w, budget, distinct, prune, &mut path, &mut used, &mut seen, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn walk_rec(
        &self,
        face: &[usize],
        by_face: &[Vec<usize>],
        f: usize,
        w: usize,
        budget: usize,
        distinct: bool,
        prune: Option<&[usize]>,
        path: &mut Vec<usize>,
        used: &mut HashSet<(usize, usize)>,
        seen: &mut Vec<bool>,
        out: &mut Vec<(Vec<usize>, usize)>,
    ) {
        for &e in &by_face[f] {
            if self.origin[e] == w {
                out.push((path.clone(), e));
            }
        }
        if path.len() == budget {
            return;
        }
        for &h in &by_face[f] {
            let l = self.label[h];
            if self.touches(h, w) || self.is_new(h) || used.contains(&l) {
                continue;
            }
            let g = face[self.twin(h)];
            if distinct && seen[g] {
                continue;
            }
            if let Some(dist) = prune {
                if dist[g] == usize::MAX || path.len() + 1 + dist[g] > budget {
                    continue;
                }
            }
            path.push(h);
            used.insert(l);
            let was = seen[g];
            seen[g] = true;
            self.walk_rec(face, by_face, g, w, budget, distinct, prune, path, used, seen, out);
            seen[g] = was;
            used.remove(&l);
            path.pop();
        }
    }

    /// Draws a new edge from the apex to `w` across `crossed`, entering `w`
    /// just before `end` in its rotation.
    pub fn insert(&self, start: Start, crossed: &[usize], w: usize, end: usize) -> Map {
        let mut m = self.clone();
        let apex = m.apex.expect("apex placed");
        let new_label = (w.min(m.n + 1), w.max(m.n + 1));
        let mut tail = (apex, start);
        for &h in crossed {
            let (u, t) = (m.origin[h], m.origin[m.twin(h)]);
            let h1 = m.twin(h);
            m.nv += 1;
            let c = m.nv;
            m.rot.push(Vec::new());
            // Far part of the crossed segment.
            let g = m.origin.len();
            m.origin.extend([c, t]);
            m.label.extend([m.label[h], m.label[h]]);
            let pos = m.rot[t].iter().position(|&x| x == h1).unwrap();
            m.rot[t][pos] = g + 1;
            m.origin[h1] = c;
            // Piece of the new edge from the tail to the crossing.
            let p = m.origin.len();
            m.origin.extend([tail.0, c]);
            m.label.extend([new_label, new_label]);
            m.place(tail, p);
            m.rot[c] = vec![g, h1, p + 1];
            let _ = u;
            tail = (c, Start::Before(h1));
        }
        let p = m.origin.len();
        m.origin.extend([tail.0, w]);
        m.label.extend([new_label, new_label]);
        m.place(tail, p);
        let pos = m.rot[w].iter().position(|&x| x == end).unwrap();
        m.rot[w].insert(pos, p + 1);
        m
    }

    fn place(&mut self, (v, start): (usize, Start), h: usize) {
        match start {
            Start::Isolated => self.rot[v].push(h),
            Start::Before(b) => {
                let pos = self.rot[v].iter().position(|&x| x == b).unwrap();
                self.rot[v].insert(pos, h);
            }
        }
    }

    /// Converts to a drawing, renumbering the apex to `n + 1` and the
    /// crossings after it.
    pub fn to_drawing(&self) -> Drawing {
        let apex = self.apex;
        let n_real = self.n + apex.is_some() as usize;
        let mut id = vec![0; self.nv + 1];
        let order = (1..=self.n)
            .chain(apex)
            .chain((self.n + 1..=self.nv).filter(|&v| Some(v) != apex));
        for (k, v) in order.enumerate() {
            id[v] = k + 1;
        }
        let x = self.nv - n_real;
        // Segment index along each edge, counted from its smaller end.
        let mut seg = vec![usize::MAX; self.origin.len()];
        for h in 0..self.origin.len() {
            let (a, _) = self.label[h];
            if id[self.origin[h]] != a {
                continue;
            }
            let mut k = 0;
            let mut cur = h;
            loop {
                seg[cur] = k;
                seg[self.twin(cur)] = k;
                let t = self.origin[self.twin(cur)];
                if id[t] <= n_real {
                    break;
                }
                // Straight on through a crossing: two steps round the rotation.
                let r = &self.rot[t];
                let i = r.iter().position(|&y| y == self.twin(cur)).unwrap();
                cur = r[(i + 2) % 4];
                k += 1;
            }
        }
        let darts = (0..self.origin.len())
            .map(|h| Dart {
                twin: self.twin(h),
                next: self.cw_next(h),
                origin: id[self.origin[h]],
                edge: Edge::new(self.label[h].0, self.label[h].1),
                seg: seg[h],
            })
            .collect();
        Drawing::from_parts(n_real, x, darts)
    }
}

/// Every drawing of `K_{n+1}` with at most `c` crossings that contains
/// `base` with the new vertex anywhere, by inserting one edge at a time
/// along arbitrary dual walks (faces may repeat).
pub fn naive_extensions(base: &Drawing, c: usize) -> BTreeSet<CanonicalCode> {
    let n = base.n_real();
    let x = base.crossings();
    let mut out = BTreeSet::new();
    if c < x {
        return out;
    }
    let eps = c - x;
    let m0 = Map::from_drawing(base);
    let f0 = m0.faces();
    let nf = f0.iter().max().unwrap() + 1;
    let base_dist: Vec<Vec<usize>> = (1..=n).map(|w| m0.distances(&f0, w)).collect();
    for face in 0..nf {
        // Lower bound for the edges to targets w..=n.
        let mut rest = vec![0usize; n + 2];
        for (w, dist) in base_dist.iter().enumerate().rev() {
            rest[w + 1] = rest[w + 2] + dist[face];
        }
        if rest[1] > eps {
            continue;
        }
        let mut m = m0.clone();
        m.nv += 1;
        m.apex = Some(m.nv);
        m.rot.push(Vec::new());
        grow(&m, Some(face), 1, eps, &rest, &mut out);
    }
    out
}

fn grow(m: &Map, isolated_face: Option<usize>, w: usize, eps: usize, rest: &[usize], out: &mut BTreeSet<CanonicalCode>) {
    if w > m.n {
        out.insert(canonical_code(&m.to_drawing()));
        return;
    }
    let faces = m.faces();
    let apex = m.apex.unwrap();
    let starts: Vec<(Start, usize)> = match isolated_face {
        Some(f) => vec![(Start::Isolated, f)],
        None => m.rot[apex].iter().map(|&b| (Start::Before(b), faces[b])).collect(),
    };
    let budget = eps - rest[w + 1];
    let dist = m.distances(&faces, w);
    for (start, f) in starts {
        for (crossed, end) in m.walks(&faces, f, w, budget, false, Some(&dist)) {
            let next = m.insert(start, &crossed, w, end);
            grow(&next, None, w + 1, eps - crossed.len(), rest, out);
        }
    }
}

/// Brute-force isomorphism of planarizations: try to extend a root
/// correspondence through `twin` and `next` (or `prev` for the mirror).
pub fn isomorphic(a: &Drawing, b: &Drawing) -> bool {
    if a.n_real() != b.n_real() || a.crossings() != b.crossings() || a.num_darts() != b.num_darts() {
        return false;
    }
    (0..b.num_darts()).any(|s| [false, true].into_iter().any(|mirror| extend_map(a, b, 0, s, mirror).is_some()))
}

/// The dart bijection sending `r` to `s`, if it is an isomorphism.
pub fn extend_map(a: &Drawing, b: &Drawing, r: usize, s: usize, mirror: bool) -> Option<Vec<usize>> {
    let nd = a.num_darts();
    let mut phi = vec![usize::MAX; nd];
    let mut used = vec![false; nd];
    let mut stack = vec![(r, s)];
    while let Some((x, y)) = stack.pop() {
        if phi[x] != usize::MAX {
            if phi[x] != y {
                return None;
            }
            continue;
        }
        if used[y] || a.is_real(a.origin(x)) != b.is_real(b.origin(y)) {
            return None;
        }
        phi[x] = y;
        used[y] = true;
        stack.push((a.twin(x), b.twin(y)));
        stack.push((a.next(x), if mirror { b.prev(y) } else { b.next(y) }));
    }
    Some(phi)
}

/// Face orbits under all automorphisms, as sorted lists of face ids of the
/// library's face numbering (given as a dart-to-face table).
pub fn automorphism_face_orbits(d: &Drawing, face_of: &[usize]) -> Vec<BTreeSet<usize>> {
    let nf = face_of.iter().max().unwrap() + 1;
    let mut parent: Vec<usize> = (0..nf).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for s in 0..d.num_darts() {
        for mirror in [false, true] {
            if let Some(phi) = extend_map(d, d, 0, s, mirror) {
                for x in 0..d.num_darts() {
                    // Reversing orientation swaps the sides of every dart.
                    let image = if mirror { face_of[d.twin(phi[x])] } else { face_of[phi[x]] };
                    let (ra, rb) = (find(&mut parent, face_of[x]), find(&mut parent, image));
                    parent[ra] = rb;
                }
            }
        }
    }
    let mut orbits: HashMap<usize, BTreeSet<usize>> = HashMap::new();
    for f in 0..nf {
        let r = find(&mut parent, f);
        orbits.entry(r).or_default().insert(f);
    }
    let mut v: Vec<BTreeSet<usize>> = orbits.into_values().collect();
    v.sort();
    v
}

/// Every drawing of `K_{n+1}` with at most `c` crossings over all bases,
/// deduplicated, via the library's Algorithm 1.
pub fn library_stage(bases: &[Drawing], c: usize, opts: ExtendOptions) -> Vec<Drawing> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for b in bases {
        for e in extend_all(b, c, opts).unwrap() {
            if seen.insert(canonical_code(&e.drawing)) {
                out.push(e.drawing);
            }
        }
    }
    out
}

pub fn with_crossings(ds: &[Drawing], lo: usize, hi: usize) -> Vec<Drawing> {
    ds.iter().filter(|d| (lo..=hi).contains(&d.crossings())).cloned().collect()
}

pub const EVERY_WALK: ExtendOptions = ExtendOptions {
    distinct_faces: false,
    face_orbits: false,
};

/// All drawings of `K_5` with at most 5 crossings and of `K_6` with at most
/// `k6_max` crossings that arise from the planar `K_4`.
pub fn small_pool(k6_max: usize) -> (Vec<Drawing>, Vec<Drawing>) {
    let k5 = library_stage(&[seed_k4()], 5, EVERY_WALK);
    let k6 = library_stage(&k5, k6_max, EVERY_WALK);
    (k5, k6)
}

/// The chain of optimal stages: `D_5^1`, `D_6^3`, `D_7^9`.
pub fn optimal_chain() -> (Vec<Drawing>, Vec<Drawing>, Vec<Drawing>) {
    let opts = ExtendOptions::default();
    let k5 = with_crossings(&library_stage(&[seed_k4()], 1, opts), 1, 1);
    let k6 = with_crossings(&library_stage(&k5, 3, opts), 3, 3);
    let k7 = with_crossings(&library_stage(&k6, 9, opts), 9, 9);
    (k5, k6, k7)
}
