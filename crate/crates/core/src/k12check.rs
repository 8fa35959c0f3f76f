//! The last stage without building drawings: from each representative
//! drawing of `K_{n+1}` decide whether a further vertex can be added so that
//! the result has exactly `target` crossings and some vertex deletion keeps at
//! least `threshold` of them.
//!
//! The crossing count of `D' - v` follows from crossed-edge sets alone: the
//! base part loses the crossings at `v`, and every new edge not ending at `v`
//! keeps its crossings with edges not incident with `v`. New edges share an
//! endpoint, so they never cross each other.

use std::fmt;

use crate::canonical::canonical_code;
use crate::drawing::{Drawing, Edge, FaceId, VertexId};
use crate::equivalence::{
    extend_representatives, partition_classes, realize_product, EquivalenceClass, ErrorSet,
    ProductOutcome,
};
use crate::error::ExtendError;
use crate::extension::{minimality_filter, realize, ExtendOptions, Extension};
use crate::routing::{enumerate_routings, Planarization, Routing, UNREACHABLE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct K12Params {
    /// Budget for the middle stage; every output has exactly this many.
    pub middle_budget: usize,
    pub target: usize,
    pub threshold: usize,
}

impl Default for K12Params {
    fn default() -> Self {
        K12Params {
            middle_budget: 100,
            target: 151,
            threshold: 104,
        }
    }
}

impl K12Params {
    /// The same stage three sizes down: `K_6` with 3 crossings, optimal
    /// `K_7`, then `K_8` with 19.
    pub fn desk_analogue() -> Self {
        K12Params {
            middle_budget: 9,
            target: 19,
            threshold: 12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    Skip,
    Exact,
    OptReroute,
    Anomaly,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Skip => "skip",
            Case::Exact => "exact",
            Case::OptReroute => "reroute",
            Case::Anomaly => "anomaly",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hit {
    /// Crossed-edge set per new edge, by target.
    pub classes: Vec<Vec<Edge>>,
    /// Target whose routing took one extra crossing.
    pub rerouted: Option<VertexId>,
    pub vertex: VertexId,
    pub crossings: usize,
    /// Whether some choice of class members can actually be drawn.
    pub realizable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceVerdict {
    pub face: FaceId,
    /// Fewest total crossings reachable from this face.
    pub m: usize,
    pub case: Case,
    pub hits: Vec<Hit>,
    /// Class products examined.
    pub products: usize,
    /// Products whose deletion counts broke the counting identity.
    pub audit_failures: usize,
}

/// `cr(D' - v)` for the drawing obtained by adding routings with the given
/// crossed-edge sets (indexed by target) to `d`.
pub fn subdrawing_crossings(d: &Drawing, keys: &[Vec<Edge>], v: VertexId) -> usize {
    let resp = d.responsibilities();
    subdrawing_crossings_with(d.crossings(), &resp, keys, v)
}

fn subdrawing_crossings_with(x: usize, resp: &[usize], keys: &[Vec<Edge>], v: VertexId) -> usize {
    let base = x - resp[v - 1];
    base + keys
        .iter()
        .enumerate()
        .filter(|&(i, _)| i + 1 != v)
        .map(|(_, k)| k.iter().filter(|e| !e.contains(v)).count())
        .sum::<usize>()
}

/// Fewest crossings of any valid routing from `face` to each vertex, up to
/// `cap`. Can exceed the dual distance, since a shortest dual path may cross
/// one edge twice.
pub fn minimal_lengths(p: &Planarization<'_>, face: FaceId, cap: usize) -> Vec<Option<usize>> {
    (1..=p.n_real())
        .map(|w| {
            let d = p.distance(face, w);
            if d == UNREACHABLE {
                return None;
            }
            (d as usize..=cap).find(|&l| !enumerate_routings(p, face, w, l, true).is_empty())
        })
        .collect()
}

fn classes_of_length(p: &Planarization<'_>, face: FaceId, w: VertexId, len: usize) -> Vec<EquivalenceClass> {
    let rs: Vec<Routing> = enumerate_routings(p, face, w, len, true)
        .into_iter()
        .filter(|r| r.len() == len)
        .collect();
    partition_classes(p, &rs)
}

/// Examines a face of a representative drawing for `target`-crossing
/// extensions with a heavy vertex deletion. With `audit` set every product is
/// visited and checked against the counting identity; otherwise products
/// that cannot reach the threshold are pruned.
pub fn check_face(p: &Planarization<'_>, face: FaceId, params: K12Params, audit: bool) -> Result<FaceVerdict, ExtendError> {
    let d = p.drawing;
    let x = d.crossings();
    let n = d.n_real();
    let mut verdict = FaceVerdict {
        face,
        m: usize::MAX,
        case: Case::Skip,
        hits: Vec::new(),
        products: 0,
        audit_failures: 0,
    };
    if x > params.target {
        return Ok(verdict);
    }
    let cap = params.target - x;
    let lens = minimal_lengths(p, face, cap);
    if lens.iter().any(Option::is_none) {
        return Ok(verdict);
    }
    let lens: Vec<usize> = lens.into_iter().map(Option::unwrap).collect();
    verdict.m = x + lens.iter().sum::<usize>();
    verdict.case = match verdict.m {
        m if m > params.target => Case::Skip,
        m if m == params.target => Case::Exact,
        m if m + 1 == params.target => Case::OptReroute,
        _ => Case::Anomaly,
    };
    let base_sets: Vec<Vec<EquivalenceClass>> = match verdict.case {
        Case::Exact | Case::OptReroute => (1..=n).map(|w| classes_of_length(p, face, w, lens[w - 1])).collect(),
        _ => return Ok(verdict),
    };
    let resp = d.responsibilities();
    let scan = |sets: &[Vec<EquivalenceClass>], rerouted: Option<VertexId>, verdict: &mut FaceVerdict| {
        let mut hs = HitSearch::new(x, &resp, sets, params, audit, n + 1);
        hs.dfs(0);
        verdict.products += hs.products;
        verdict.audit_failures += hs.audit_failures;
        for (choice, vertex, crossings) in hs.hits {
            let classes: Vec<&EquivalenceClass> = choice.iter().enumerate().map(|(i, &c)| &sets[i][c]).collect();
            let realizable = matches!(realize_product(p, face, &classes)?, ProductOutcome::Realized(..));
            verdict.hits.push(Hit {
                classes: classes.iter().map(|c| c.key.clone()).collect(),
                rerouted,
                vertex,
                crossings,
                realizable,
            });
        }
        Ok::<(), ExtendError>(())
    };
    if verdict.case == Case::Exact {
        scan(&base_sets, None, &mut verdict)?;
    } else {
        for w in 1..=n {
            let mut sets = base_sets.clone();
            sets[w - 1] = classes_of_length(p, face, w, lens[w - 1] + 1);
            if sets[w - 1].is_empty() {
                continue;
            }
            scan(&sets, Some(w), &mut verdict)?;
        }
    }
    Ok(verdict)
}

struct HitSearch<'s> {
    x: usize,
    threshold: usize,
    audit: bool,
    /// Total vertex count after the insertion.
    order: usize,
    sets: &'s [Vec<EquivalenceClass>],
    /// `contrib[i][c][v - 1]`: crossings of class `c` of target `i + 1`
    /// surviving the deletion of `v`.
    contrib: Vec<Vec<Vec<usize>>>,
    /// Largest contribution still to come from position `k` on.
    suffix_max: Vec<Vec<usize>>,
    partial: Vec<usize>,
    choice: Vec<usize>,
    products: usize,
    audit_failures: usize,
    hits: Vec<(Vec<usize>, VertexId, usize)>,
}

impl<'s> HitSearch<'s> {
    fn new(x: usize, resp: &[usize], sets: &'s [Vec<EquivalenceClass>], params: K12Params, audit: bool, order: usize) -> Self {
        let n = sets.len();
        let contrib: Vec<Vec<Vec<usize>>> = sets
            .iter()
            .enumerate()
            .map(|(i, cls)| {
                cls.iter()
                    .map(|c| {
                        (1..=n)
                            .map(|v| if v == i + 1 { 0 } else { c.key.iter().filter(|e| !e.contains(v)).count() })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut suffix_max = vec![vec![0usize; n]; n + 1];
        for k in (0..n).rev() {
            for v in 0..n {
                let best = contrib[k].iter().map(|c| c[v]).max().unwrap_or(0);
                suffix_max[k][v] = suffix_max[k + 1][v] + best;
            }
        }
        HitSearch {
            x,
            threshold: params.threshold,
            audit,
            order,
            sets,
            contrib,
            suffix_max,
            partial: (1..=n).map(|v| x - resp[v - 1]).collect(),
            choice: Vec::with_capacity(n),
            products: 0,
            audit_failures: 0,
            hits: Vec::new(),
        }
    }

    fn dfs(&mut self, k: usize) {
        let n = self.sets.len();
        if k == n {
            self.products += 1;
            if self.audit {
                let added: usize = self.choice.iter().enumerate().map(|(i, &c)| self.sets[i][c].len()).sum();
                let total = self.x + added;
                let sum: usize = self.partial.iter().sum::<usize>() + self.x;
                if sum != (self.order - 4) * total {
                    self.audit_failures += 1;
                }
            }
            for v in 0..n {
                if self.partial[v] >= self.threshold {
                    self.hits.push((self.choice.clone(), v + 1, self.partial[v]));
                }
            }
            return;
        }
        if !self.audit && (0..n).all(|v| self.partial[v] + self.suffix_max[k][v] < self.threshold) {
            return;
        }
        for c in 0..self.sets[k].len() {
            for v in 0..n {
                self.partial[v] += self.contrib[k][c][v];
            }
            self.choice.push(c);
            self.dfs(k + 1);
            self.choice.pop();
            for v in 0..n {
                self.partial[v] -= self.contrib[k][c][v];
            }
        }
    }
}

/// Verdicts for one representative and one base face `f_prime`.
#[derive(Clone, Debug)]
pub struct StageOutcome {
    pub verdicts: Vec<FaceVerdict>,
    /// The re-selected drawing, when re-selection changed a routing.
    pub rebuilt: Option<Extension>,
    /// Re-selection through `f_prime` could not be drawn; the original
    /// representative was examined instead.
    pub rebuild_entangled: bool,
}

/// Re-selects the representative's routings to pass through `f_prime` where
/// an equivalent routing does, then examines every face of the result lying
/// inside `f_prime`.
pub fn run_k12_stage(
    base: &Planarization<'_>,
    ext: &Extension,
    f_prime: FaceId,
    params: K12Params,
    audit: bool,
) -> Result<StageOutcome, ExtendError> {
    let mut changed = false;
    let mut chosen: Vec<Routing> = Vec::with_capacity(ext.routings.len());
    for r in &ext.routings {
        if base.passes_through(r, f_prime) {
            chosen.push(r.clone());
            continue;
        }
        let key = base.key(r);
        let alt = enumerate_routings(base, ext.face, r.target, r.len(), true)
            .into_iter()
            .find(|m| m.len() == r.len() && base.passes_through(m, f_prime) && base.key(m) == key);
        match alt {
            Some(m) => {
                changed = true;
                chosen.push(m);
            }
            None => chosen.push(r.clone()),
        }
    }
    let mut rebuild_entangled = false;
    let rebuilt = if changed {
        let refs: Vec<&Routing> = chosen.iter().collect();
        match realize(base, ext.face, &refs)? {
            Ok(e) => Some(e),
            Err(_) => {
                rebuild_entangled = true;
                None
            }
        }
    } else {
        None
    };
    let used = rebuilt.as_ref().unwrap_or(ext);
    let p = Planarization::new(&used.drawing);
    let mut verdicts = Vec::new();
    for (g, &origin) in used.face_origin.iter().enumerate() {
        if origin == f_prime {
            verdicts.push(check_face(&p, g, params, audit)?);
        }
    }
    Ok(StageOutcome {
        verdicts,
        rebuilt,
        rebuild_entangled,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerdictLine {
    /// Short hash of the representative's canonical code.
    pub middle: String,
    pub face: FaceId,
    pub m: usize,
    pub case: Case,
    pub hits: usize,
}

impl fmt::Display for VerdictLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "V k11={} face={} m={} case={} hits={}",
            self.middle, self.face, self.m, self.case, self.hits
        )
    }
}

/// Full provenance of a hit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HitReport {
    pub base: String,
    pub insertion_face: FaceId,
    pub f_prime: FaceId,
    pub face: FaceId,
    pub hit: Hit,
}

impl fmt::Display for HitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let keys: Vec<String> = self
            .hit
            .classes
            .iter()
            .map(|k| {
                if k.is_empty() {
                    "-".to_string()
                } else {
                    k.iter().map(Edge::to_string).collect::<Vec<_>>().join(",")
                }
            })
            .collect();
        write!(
            f,
            "H base={} F={} F'={} F''={} v={} cr={} rerouted={} realizable={} classes={}",
            self.base,
            self.insertion_face,
            self.f_prime,
            self.face,
            self.hit.vertex,
            self.hit.crossings,
            self.hit.rerouted.map_or("-".to_string(), |w| w.to_string()),
            self.hit.realizable,
            keys.join(";")
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct K12Report {
    pub bases: usize,
    pub representatives: usize,
    /// Representatives dropped because a cheaper deletion exists.
    pub discarded: usize,
    pub verdicts: Vec<VerdictLine>,
    pub hits: Vec<HitReport>,
    pub anomalies: usize,
    pub audit_failures: usize,
    pub errors: ErrorSet,
    pub rebuild_entangled: usize,
}

impl K12Report {
    pub fn merge(&mut self, other: K12Report) {
        self.bases += other.bases;
        self.representatives += other.representatives;
        self.discarded += other.discarded;
        self.verdicts.extend(other.verdicts);
        self.hits.extend(other.hits);
        self.anomalies += other.anomalies;
        self.audit_failures += other.audit_failures;
        self.errors.merge(other.errors);
        self.rebuild_entangled += other.rebuild_entangled;
    }

    pub fn clean(&self) -> bool {
        self.hits.is_empty() && self.anomalies == 0 && self.errors.is_empty() && self.audit_failures == 0
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in &self.verdicts {
            s.push_str(&format!("{v}\n"));
        }
        for h in &self.hits {
            s.push_str(&format!("{h}\n"));
        }
        s.push_str(&self.errors.to_text());
        s.push_str(&format!(
            "# bases={} representatives={} discarded={} verdicts={} hits={} anomalies={} audit_failures={} errors={} rebuild_entangled={}\n",
            self.bases,
            self.representatives,
            self.discarded,
            self.verdicts.len(),
            self.hits.len(),
            self.anomalies,
            self.audit_failures,
            self.errors.len(),
            self.rebuild_entangled
        ));
        s
    }
}

/// Runs both remaining stages for one base drawing.
pub fn check_base(base: &Drawing, params: K12Params, opts: ExtendOptions, audit: bool) -> Result<K12Report, ExtendError> {
    let mut report = K12Report {
        bases: 1,
        ..K12Report::default()
    };
    let run = extend_representatives(base, params.middle_budget, None, opts)?;
    report.errors = run.errors;
    let p = Planarization::new(base);
    let base_hash = canonical_code(base).hash_hex();
    let new_vertex = base.n_real() + 1;
    for ext in &run.extensions {
        if !minimality_filter(&ext.drawing, new_vertex, base.crossings()) {
            report.discarded += 1;
            continue;
        }
        report.representatives += 1;
        let middle = canonical_code(&ext.drawing).hash_hex();
        for f_prime in 0..p.faces.len() {
            let out = run_k12_stage(&p, ext, f_prime, params, audit)?;
            report.rebuild_entangled += out.rebuild_entangled as usize;
            for v in out.verdicts {
                report.audit_failures += v.audit_failures;
                if v.case == Case::Anomaly {
                    report.anomalies += 1;
                }
                if v.case != Case::Skip {
                    report.verdicts.push(VerdictLine {
                        middle: middle.clone(),
                        face: v.face,
                        m: v.m,
                        case: v.case,
                        hits: v.hits.len(),
                    });
                }
                for hit in v.hits {
                    report.hits.push(HitReport {
                        base: base_hash.clone(),
                        insertion_face: ext.face,
                        f_prime,
                        face: v.face,
                        hit,
                    });
                }
            }
        }
    }
    Ok(report)
}
