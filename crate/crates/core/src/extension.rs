//! Inserting a new vertex into a face and drawing its edges along routings.
//!
//! Realization works face by face. Inside every face a routing contributes a
//! chord between two boundary points: a crossing point on a segment, a corner
//! of the target vertex, or the new vertex itself. Once the order of crossing
//! points along every segment is fixed, the tuple is drawable exactly when no
//! two chords of a face interleave along the face boundary. The segment
//! orders are found by backtracking.

use std::collections::HashMap;

use itertools::Itertools;

use crate::canonical::face_orbits;
use crate::drawing::{DartId, Drawing, Edge, FaceId, FaceMap, RotationBuilder, Slot, VertexId};
use crate::error::{DrawingError, ExtendError};
use crate::routing::{enumerate_routings, Planarization, Routing, UNREACHABLE};

/// A drawing of `K_{n+1}` obtained from a base drawing of `K_n`.
#[derive(Clone, Debug)]
pub struct Extension {
    /// Insertion face in the base drawing.
    pub face: FaceId,
    /// One routing per base vertex, ordered by target.
    pub routings: Vec<Routing>,
    pub drawing: Drawing,
    /// Base face containing each face of `drawing`.
    pub face_origin: Vec<FaceId>,
}

impl Extension {
    pub fn new_vertex(&self) -> VertexId {
        self.drawing.n_real()
    }

    pub fn total_added(&self) -> usize {
        self.routings.iter().map(Routing::len).sum()
    }

    /// Crossed-edge set of every new edge, in target order.
    pub fn signature(&self, p: &Planarization<'_>) -> Vec<Vec<Edge>> {
        self.routings.iter().map(|r| p.key(r)).collect()
    }
}

/// The routing tuple cannot be drawn without two new edges crossing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Entangled;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtendOptions {
    /// Only enumerate routings through pairwise distinct faces.
    pub distinct_faces: bool,
    /// Use one face per automorphism orbit.
    pub face_orbits: bool,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        ExtendOptions {
            distinct_faces: true,
            face_orbits: true,
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum End {
    NewVertex,
    Corner(DartId),
    /// Crossing point and the dart it lies on in this face.
    Point(usize, DartId),
}

#[derive(Clone, Debug)]
struct FaceCheck {
    face: FaceId,
    chords: Vec<(End, End)>,
}

#[derive(Clone, Copy, Debug)]
struct PointInfo {
    routing: usize,
    step: usize,
    seg: usize,
}

struct Var {
    points: Vec<usize>,
    perms: Vec<Vec<usize>>,
}

struct Arrangement<'p, 'a> {
    p: &'p Planarization<'a>,
    face: FaceId,
    routings: Vec<&'p Routing>,
    points: Vec<PointInfo>,
    /// Point ids of each crossed segment, in rank order once solved.
    seg_points: HashMap<usize, Vec<usize>>,
    vars: Vec<Var>,
    checks: Vec<FaceCheck>,
    /// Checks to run after assigning var `i`; index `vars.len()` holds the
    /// checks that need no assignment.
    schedule: Vec<Vec<usize>>,
    rank: Vec<usize>,
}

const KEY_SHIFT: u32 = 16;

impl<'p, 'a> Arrangement<'p, 'a> {
    fn new(p: &'p Planarization<'a>, face: FaceId, routings: &[&'p Routing]) -> Result<Self, ExtendError> {
        let d = p.drawing;
        let mut points = Vec::new();
        let mut seg_points: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut by_face: HashMap<FaceId, Vec<(End, End)>> = HashMap::new();
        for (i, r) in routings.iter().enumerate() {
            if r.origin_face != face {
                return Err(ExtendError::BadCandidate(format!("routing to {} starts elsewhere", r.target)));
            }
            let first = points.len();
            let mut cur_face = face;
            let mut prev_end = End::NewVertex;
            for (j, &x) in r.crossed.iter().enumerate() {
                if p.faces.face_of(x) != cur_face {
                    return Err(ExtendError::BadCandidate(format!("routing to {} is not a dual walk", r.target)));
                }
                let id = first + j;
                points.push(PointInfo {
                    routing: i,
                    step: j,
                    seg: x / 2,
                });
                seg_points.entry(x / 2).or_default().push(id);
                by_face.entry(cur_face).or_default().push((prev_end, End::Point(id, x)));
                let tx = d.twin(x);
                cur_face = p.faces.face_of(tx);
                prev_end = End::Point(id, tx);
            }
            if d.origin(r.end_corner) != r.target || p.faces.face_of(r.end_corner) != cur_face {
                return Err(ExtendError::BadCandidate(format!("routing to {} ends off its target", r.target)));
            }
            by_face.entry(cur_face).or_default().push((prev_end, End::Corner(r.end_corner)));
        }
        if seg_points.values().any(|v| {
            let mut rs: Vec<usize> = v.iter().map(|&q| points[q].routing).collect();
            rs.sort_unstable();
            rs.windows(2).any(|w| w[0] == w[1])
        }) {
            return Err(ExtendError::BadCandidate("a routing crosses a segment twice".into()));
        }
        let mut checks: Vec<FaceCheck> = by_face
            .into_iter()
            .filter(|(_, chords)| chords.len() >= 2)
            .map(|(face, chords)| FaceCheck { face, chords })
            .collect();
        checks.sort_by_key(|c| c.face);

        let mut rank = vec![0; points.len()];
        let mut multi: Vec<usize> = Vec::new();
        for (&seg, pts) in &seg_points {
            if pts.len() == 1 {
                rank[pts[0]] = 0;
            } else {
                multi.push(seg);
            }
        }
        multi.sort_unstable();
        // Variables a check depends on.
        let seg_of_var: HashMap<usize, usize> = multi.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let deps: Vec<Vec<usize>> = checks
            .iter()
            .map(|c| {
                let mut v: Vec<usize> = c
                    .chords
                    .iter()
                    .flat_map(|(a, b)| [*a, *b])
                    .filter_map(|e| match e {
                        End::Point(q, _) => seg_of_var.get(&points[q].seg).copied(),
                        _ => None,
                    })
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        // Fail-first: repeatedly finish the check with the fewest open variables.
        let mut order: Vec<usize> = Vec::new();
        let mut placed = vec![false; multi.len()];
        loop {
            let best = deps
                .iter()
                .map(|ds| ds.iter().filter(|&&v| !placed[v]).count())
                .enumerate()
                .filter(|&(_, open)| open > 0)
                .min_by_key(|&(_, open)| open);
            let Some((ci, _)) = best else { break };
            for &v in &deps[ci] {
                if !placed[v] {
                    placed[v] = true;
                    order.push(v);
                }
            }
        }
        for (v, done) in placed.iter().enumerate() {
            if !done {
                order.push(v);
            }
        }
        let position: Vec<usize> = {
            let mut pos = vec![0; multi.len()];
            for (i, &v) in order.iter().enumerate() {
                pos[v] = i;
            }
            pos
        };
        let vars: Vec<Var> = order
            .iter()
            .map(|&v| {
                let pts = seg_points[&multi[v]].clone();
                let perms = (0..pts.len()).permutations(pts.len()).collect();
                Var { points: pts, perms }
            })
            .collect();
        let mut schedule = vec![Vec::new(); vars.len() + 1];
        for (ci, ds) in deps.iter().enumerate() {
            match ds.iter().map(|&v| position[v]).max() {
                Some(last) => schedule[last].push(ci),
                None => schedule[vars.len()].push(ci),
            }
        }
        Ok(Arrangement {
            p,
            face,
            routings: routings.to_vec(),
            points,
            seg_points,
            vars,
            checks,
            schedule,
            rank,
        })
    }

    fn key(&self, e: End) -> Option<u64> {
        match e {
            End::NewVertex => None,
            End::Corner(c) => Some(((self.p.faces.pos_in_face(c) as u64) * 2) << KEY_SHIFT),
            End::Point(q, x) => {
                let m = self.seg_points[&self.points[q].seg].len();
                let r = self.rank[q];
                let along = if x % 2 == 0 { r } else { m - 1 - r };
                Some(((self.p.faces.pos_in_face(x) as u64 * 2 + 1) << KEY_SHIFT) | along as u64)
            }
        }
    }

    fn check(&self, ci: usize) -> bool {
        let c = &self.checks[ci];
        let mut fixed: Vec<(u64, u64)> = Vec::with_capacity(c.chords.len());
        let mut star: Vec<u64> = Vec::new();
        for &(a, b) in &c.chords {
            match (self.key(a), self.key(b)) {
                (Some(ka), Some(kb)) => fixed.push((ka, kb)),
                (None, Some(k)) | (Some(k), None) => star.push(k),
                (None, None) => unreachable!("chord between the new vertex and itself"),
            }
        }
        for i in 0..fixed.len() {
            for j in 0..i {
                if interleave(fixed[i], fixed[j]) {
                    return false;
                }
            }
        }
        if star.is_empty() || fixed.is_empty() {
            return true;
        }
        // The new vertex sits in one region of the fixed chords: try every
        // gap of the boundary for it.
        let mut keys: Vec<u64> = fixed.iter().flat_map(|&(a, b)| [a, b]).chain(star.iter().copied()).collect();
        keys.sort_unstable();
        keys.dedup();
        let fixed2: Vec<(u64, u64)> = fixed.iter().map(|&(a, b)| (a * 2, b * 2)).collect();
        keys.iter().any(|&g| {
            let v = g * 2 + 1;
            star.iter()
                .all(|&s| fixed2.iter().all(|&f| !interleave((v, s * 2), f)))
        })
    }

    /// Backtracks over segment orders; `visit` returns false to stop.
    fn solve(&mut self, visit: &mut dyn FnMut(&Self) -> bool) {
        let n = self.vars.len();
        if !self.schedule[n].iter().all(|&ci| self.check(ci)) {
            return;
        }
        self.assign(0, visit);
    }

    fn assign(&mut self, i: usize, visit: &mut dyn FnMut(&Self) -> bool) -> bool {
        if i == self.vars.len() {
            return visit(self);
        }
        for k in 0..self.vars[i].perms.len() {
            for (r, &pi) in self.vars[i].perms[k].iter().enumerate() {
                let q = self.vars[i].points[pi];
                self.rank[q] = r;
            }
            if self.schedule[i].iter().all(|&ci| self.check(ci)) && !self.assign(i + 1, visit) {
                return false;
            }
        }
        true
    }

    fn feasible(&mut self) -> bool {
        let mut found = false;
        self.solve(&mut |_| {
            found = true;
            false
        });
        found
    }

    /// Builds the drawing for the current ranks.
    fn build(&self) -> Result<Extension, DrawingError> {
        let p = self.p;
        let d = p.drawing;
        let n = d.n_real();
        let x = d.crossings();
        let new_id = n + 1;
        let idx = |u: VertexId| if u <= n { u - 1 } else { u };
        let pidx = |q: usize| n + x + 1 + q;
        let new_index = n;
        let mut ordered: HashMap<usize, Vec<usize>> = HashMap::with_capacity(self.seg_points.len());
        for (&s, pts) in &self.seg_points {
            let mut v = pts.clone();
            v.sort_by_key(|&q| self.rank[q]);
            ordered.insert(s, v);
        }
        // Builder index of each node along each routing: new vertex, points, target.
        let first_point: Vec<usize> = {
            let mut acc = 0;
            self.routings
                .iter()
                .map(|r| {
                    let f = acc;
                    acc += r.len();
                    f
                })
                .collect()
        };
        let node = |i: usize, j: isize| -> usize {
            let r = self.routings[i];
            if j < 0 {
                new_index
            } else if j as usize >= r.len() {
                idx(r.target)
            } else {
                pidx(first_point[i] + j as usize)
            }
        };
        let new_edge = |i: usize| Edge::new(self.routings[i].target, new_id);

        let mut corner_insert: HashMap<DartId, Slot> = HashMap::new();
        for (i, r) in self.routings.iter().enumerate() {
            corner_insert.insert(
                r.end_corner,
                Slot {
                    to: node(i, r.len() as isize - 1),
                    edge: new_edge(i),
                    tag: None,
                },
            );
        }
        let total_points = self.points.len();
        let mut rot: Vec<Vec<Slot>> = vec![Vec::new(); n + x + 1 + total_points];
        for u in 1..=n + x {
            let slots = &mut rot[idx(u)];
            for e in d.rotation(u) {
                if let Some(s) = corner_insert.get(&e) {
                    slots.push(*s);
                }
                let to = match ordered.get(&(e / 2)) {
                    Some(list) => pidx(if e % 2 == 0 { list[0] } else { list[list.len() - 1] }),
                    None => idx(d.target(e)),
                };
                slots.push(Slot {
                    to,
                    edge: d.edge(e),
                    tag: Some(e),
                });
            }
        }
        // New vertex: clockwise order is the reverse of the boundary order.
        let mut star: Vec<(u64, usize)> = self
            .routings
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let end = match r.crossed.first() {
                    Some(&x0) => End::Point(first_point[i], x0),
                    None => End::Corner(r.end_corner),
                };
                (self.key(end).unwrap(), i)
            })
            .collect();
        star.sort_unstable_by(|a, b| b.cmp(a));
        rot[new_index] = star
            .iter()
            .map(|&(_, i)| Slot {
                to: node(i, 0),
                edge: new_edge(i),
                tag: None,
            })
            .collect();
        for (q, info) in self.points.iter().enumerate() {
            let list = &ordered[&info.seg];
            let r = list.iter().position(|&z| z == q).unwrap();
            let a = 2 * info.seg;
            let b = a + 1;
            let to_q = if r + 1 < list.len() { pidx(list[r + 1]) } else { idx(d.target(a)) };
            let to_p = if r > 0 { pidx(list[r - 1]) } else { idx(d.origin(a)) };
            let i = info.routing;
            let j = info.step as isize;
            let prev = node(i, j - 1);
            let next = node(i, j + 1);
            let crossed = self.routings[i].crossed[info.step];
            let (left, right) = if crossed == a { (prev, next) } else { (next, prev) };
            let e = d.edge(a);
            let ne = new_edge(i);
            rot[pidx(q)] = vec![
                Slot { to: to_q, edge: e, tag: Some(a) },
                Slot { to: right, edge: ne, tag: None },
                Slot { to: to_p, edge: e, tag: Some(b) },
                Slot { to: left, edge: ne, tag: None },
            ];
        }
        let built = RotationBuilder { n_real: n + 1, rot }.build()?;
        let faces = FaceMap::new(&built.drawing);
        let face_origin = faces
            .faces
            .iter()
            .map(|f| {
                f.darts
                    .iter()
                    .find_map(|&dd| built.tags[dd])
                    .map(|t| p.faces.face_of(t))
                    .unwrap_or(usize::MAX)
            })
            .collect();
        let mut routings: Vec<Routing> = self.routings.iter().map(|r| (*r).clone()).collect();
        routings.sort_by_key(|r| r.target);
        Ok(Extension {
            face: self.face,
            routings,
            drawing: built.drawing,
            face_origin,
        })
    }
}

/// Chords `(a, b)` and `(c, d)` cross when exactly one of `c`, `d` lies
/// strictly between `a` and `b`. Chords sharing an endpoint never cross.
fn interleave((a, b): (u64, u64), (c, d): (u64, u64)) -> bool {
    if a == c || a == d || b == c || b == d {
        return false;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    (lo < c && c < hi) != (lo < d && d < hi)
}

/// Whether the (possibly partial) tuple can be drawn without new edges crossing.
pub fn compatible(p: &Planarization<'_>, face: FaceId, routings: &[&Routing]) -> bool {
    match Arrangement::new(p, face, routings) {
        Ok(mut a) => a.feasible(),
        Err(_) => false,
    }
}

fn check_full_tuple(p: &Planarization<'_>, routings: &[&Routing]) -> Result<(), ExtendError> {
    let n = p.n_real();
    let mut targets: Vec<VertexId> = routings.iter().map(|r| r.target).collect();
    targets.sort_unstable();
    if targets != (1..=n).collect::<Vec<_>>() {
        return Err(ExtendError::BadCandidate("need exactly one routing per vertex".into()));
    }
    Ok(())
}

/// Draws the new vertex in `face` with the given routings; the first
/// consistent arrangement wins.
pub fn realize(p: &Planarization<'_>, face: FaceId, routings: &[&Routing]) -> Result<Result<Extension, Entangled>, ExtendError> {
    check_full_tuple(p, routings)?;
    let mut arr = Arrangement::new(p, face, routings)?;
    let mut ranks = None;
    arr.solve(&mut |a| {
        ranks = Some(a.rank.clone());
        false
    });
    match ranks {
        Some(r) => {
            arr.rank = r;
            Ok(Ok(arr.build()?))
        }
        None => Ok(Err(Entangled)),
    }
}

/// Every consistent arrangement of the tuple as a drawing.
pub fn realize_all(p: &Planarization<'_>, face: FaceId, routings: &[&Routing]) -> Result<Vec<Extension>, ExtendError> {
    check_full_tuple(p, routings)?;
    let mut arr = Arrangement::new(p, face, routings)?;
    let mut all_ranks = Vec::new();
    arr.solve(&mut |a| {
        all_ranks.push(a.rank.clone());
        true
    });
    let mut out = Vec::with_capacity(all_ranks.len());
    for r in all_ranks {
        arr.rank = r;
        out.push(arr.build()?);
    }
    Ok(out)
}

/// Per-face routing sets for an insertion with crossing budget `eps`.
pub(crate) struct FaceRoutings {
    /// Indexed by `target - 1`.
    pub sets: Vec<Vec<Routing>>,
}

/// Enumerates the routing sets of `face`, or `None` when the face cannot
/// stay within `eps` added crossings.
pub(crate) fn face_routings(
    p: &Planarization<'_>,
    face: FaceId,
    eps: usize,
    distinct_faces: bool,
) -> Result<Option<FaceRoutings>, ExtendError> {
    let n = p.n_real();
    let mut total = 0usize;
    for w in 1..=n {
        let dw = p.distance(face, w);
        if dw == UNREACHABLE {
            return Ok(None);
        }
        total += dw as usize;
    }
    if total > eps {
        return Ok(None);
    }
    let slack = eps - total;
    if distinct_faces && slack > n - 2 {
        return Err(ExtendError::SlackExceedsDistinctFaceBound {
            face,
            slack,
            bound: n - 2,
        });
    }
    let mut sets = Vec::with_capacity(n);
    for w in 1..=n {
        let max_len = p.distance(face, w) as usize + slack;
        let mut rs = enumerate_routings(p, face, w, max_len, distinct_faces);
        if rs.is_empty() {
            return Ok(None);
        }
        rs.sort_by_key(Routing::len);
        sets.push(rs);
    }
    Ok(Some(FaceRoutings { sets }))
}

pub(crate) fn candidate_faces(p: &Planarization<'_>, use_orbits: bool) -> Vec<FaceId> {
    if use_orbits {
        face_orbits(p.drawing, &p.faces)
    } else {
        (0..p.faces.len()).collect()
    }
}

/// Every realizable extension of `base` with at most `c` crossings.
/// Outputs are not deduplicated.
pub fn extend_all(base: &Drawing, c: usize, opts: ExtendOptions) -> Result<Vec<Extension>, ExtendError> {
    let p = Planarization::new(base);
    let mut out = Vec::new();
    for face in candidate_faces(&p, opts.face_orbits) {
        extend_face(&p, face, c, opts.distinct_faces, &mut |ext| out.push(ext))?;
    }
    Ok(out)
}

/// Algorithm-1 products for a single insertion face.
pub fn extend_face(
    p: &Planarization<'_>,
    face: FaceId,
    c: usize,
    distinct_faces: bool,
    emit: &mut dyn FnMut(Extension),
) -> Result<(), ExtendError> {
    let x = p.drawing.crossings();
    if c < x {
        return Err(ExtendError::BudgetBelowBase { budget: c, base: x });
    }
    let eps = c - x;
    let Some(fr) = face_routings(p, face, eps, distinct_faces)? else {
        return Ok(());
    };
    let mut order: Vec<usize> = (0..fr.sets.len()).collect();
    order.sort_by_key(|&i| (fr.sets[i].len(), i));
    let sets: Vec<&Vec<Routing>> = order.iter().map(|&i| &fr.sets[i]).collect();
    // Minimum lengths still to come after position k.
    let mut rest_min = vec![0usize; sets.len() + 1];
    for k in (0..sets.len()).rev() {
        rest_min[k] = rest_min[k + 1] + sets[k][0].len();
    }
    let mut pair_cache: HashMap<(usize, usize, usize, usize), bool> = HashMap::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(sets.len());
    let mut err = None;
    product(
        p,
        face,
        &sets,
        &rest_min,
        eps,
        0,
        &mut chosen,
        &mut pair_cache,
        &mut |tuple| match realize_all(p, face, tuple) {
            Ok(exts) => exts.into_iter().for_each(&mut *emit),
            Err(e) => err = Some(e),
        },
    );
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

#[allow(clippy::too_many_arguments)]
fn product<'r>(
    p: &Planarization<'_>,
    face: FaceId,
    sets: &[&'r Vec<Routing>],
    rest_min: &[usize],
    remaining: usize,
    k: usize,
    chosen: &mut Vec<usize>,
    pair_cache: &mut HashMap<(usize, usize, usize, usize), bool>,
    leaf: &mut dyn FnMut(&[&'r Routing]),
) {
    if k == sets.len() {
        let tuple: Vec<&Routing> = chosen.iter().enumerate().map(|(i, &j)| &sets[i][j]).collect();
        leaf(&tuple);
        return;
    }
    for (j, r) in sets[k].iter().enumerate() {
        if r.len() + rest_min[k + 1] > remaining {
            break;
        }
        let ok = chosen.iter().enumerate().all(|(i, &ji)| {
            *pair_cache
                .entry((i, ji, k, j))
                .or_insert_with(|| compatible(p, face, &[&sets[i][ji], r]))
        });
        if !ok {
            continue;
        }
        chosen.push(j);
        product(p, face, sets, rest_min, remaining - r.len(), k + 1, chosen, pair_cache, leaf);
        chosen.pop();
    }
}

/// Keeps a drawing of `K_{n+1}` only if no deletion other than the new
/// vertex has fewer than `base_cr` crossings.
pub fn minimality_filter(d: &Drawing, new_vertex: VertexId, base_cr: usize) -> bool {
    let resp = d.responsibilities();
    (1..=d.n_real())
        .filter(|&v| v != new_vertex)
        .all(|v| d.crossings() - resp[v - 1] >= base_cr)
}
