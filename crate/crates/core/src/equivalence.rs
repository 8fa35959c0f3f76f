//! Routings grouped by the set of edges they cross, and insertion with one
//! representative per class.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::canonical::canonical_code;
use crate::drawing::{Drawing, Edge, FaceId};
use crate::error::ExtendError;
use crate::extension::{candidate_faces, compatible, face_routings, realize, ExtendOptions, Extension};
use crate::routing::{Planarization, Routing};

/// Member combinations tried after the representatives of a class product
/// turn out to be entangled.
pub const RETRY_LIMIT: usize = 1024;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceClass {
    /// Sorted crossed edges.
    pub key: Vec<Edge>,
    pub members: Vec<Routing>,
    /// Index into `members`.
    pub representative: usize,
}

impl EquivalenceClass {
    pub fn len(&self) -> usize {
        self.key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.key.is_empty()
    }

    pub fn representative(&self) -> &Routing {
        &self.members[self.representative]
    }
}

/// Classes in lexicographic key order; members keep their input order.
pub fn partition_classes(p: &Planarization<'_>, routings: &[Routing]) -> Vec<EquivalenceClass> {
    let mut by_key: BTreeMap<Vec<Edge>, Vec<Routing>> = BTreeMap::new();
    for r in routings {
        by_key.entry(p.key(r)).or_default().push(r.clone());
    }
    by_key
        .into_iter()
        .map(|(key, members)| EquivalenceClass {
            key,
            members,
            representative: 0,
        })
        .collect()
}

/// A member passing through `preferred` if there is one, else the first.
pub fn select_representative<'c>(
    p: &Planarization<'_>,
    cls: &'c EquivalenceClass,
    preferred: Option<FaceId>,
) -> &'c Routing {
    preferred
        .and_then(|f| cls.members.iter().find(|r| p.passes_through(r, f)))
        .unwrap_or(&cls.members[0])
}

fn format_key(key: &[Edge]) -> String {
    if key.is_empty() {
        "-".to_string()
    } else {
        key.iter().map(Edge::to_string).collect::<Vec<_>>().join(",")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorRecord {
    /// Short hash of the base drawing's canonical code.
    pub base: String,
    pub face: FaceId,
    pub classes: Vec<Vec<Edge>>,
}

impl fmt::Display for ErrorRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let keys: Vec<String> = self.classes.iter().map(|k| format_key(k)).collect();
        write!(f, "E base={} face={} classes={}", self.base, self.face, keys.join(";"))
    }
}

impl ErrorRecord {
    /// Inverse of the `Display` form.
    pub fn parse(line: &str) -> Option<ErrorRecord> {
        let mut fields = line.strip_prefix("E ")?.split(' ');
        let base = fields.next()?.strip_prefix("base=")?.to_string();
        let face = fields.next()?.strip_prefix("face=")?.parse().ok()?;
        let classes = fields
            .next()?
            .strip_prefix("classes=")?
            .split(';')
            .map(|k| {
                if k == "-" {
                    return Some(Vec::new());
                }
                k.split(',')
                    .map(|e| {
                        let (a, b) = e.split_once('-')?;
                        Some(Edge::new(a.parse().ok()?, b.parse().ok()?))
                    })
                    .collect()
            })
            .collect::<Option<_>>()?;
        Some(ErrorRecord { base, face, classes })
    }
}

/// Class products whose representatives could not be untangled.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ErrorSet {
    records: Vec<ErrorRecord>,
}

impl ErrorSet {
    pub fn push(&mut self, r: ErrorRecord) {
        self.records.push(r);
    }

    pub fn merge(&mut self, other: ErrorSet) {
        self.records.extend(other.records);
    }

    pub fn records(&self) -> &[ErrorRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_text(&self) -> String {
        self.records.iter().map(|r| format!("{r}\n")).collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct RepresentativeRun {
    pub extensions: Vec<Extension>,
    pub errors: ErrorSet,
    /// Class products that needed a non-representative member.
    pub retried: usize,
}

/// Class sets for every target of `face`, indexed by `target - 1`.
pub fn face_classes(
    p: &Planarization<'_>,
    face: FaceId,
    eps: usize,
    distinct_faces: bool,
) -> Result<Option<Vec<Vec<EquivalenceClass>>>, ExtendError> {
    Ok(face_routings(p, face, eps, distinct_faces)?.map(|fr| {
        fr.sets
            .iter()
            .map(|rs| {
                let mut cls = partition_classes(p, rs);
                cls.sort_by(|a, b| (a.len(), &a.key).cmp(&(b.len(), &b.key)));
                cls
            })
            .collect()
    }))
}

/// Algorithm 2: one drawing per realizable class product.
pub fn extend_representatives(
    base: &Drawing,
    c: usize,
    preferred: Option<FaceId>,
    opts: ExtendOptions,
) -> Result<RepresentativeRun, ExtendError> {
    let p = Planarization::new(base);
    let mut run = RepresentativeRun::default();
    let base_hash = canonical_code(base).hash_hex();
    for face in candidate_faces(&p, opts.face_orbits) {
        extend_representatives_face(&p, face, c, preferred, opts.distinct_faces, &base_hash, &mut run)?;
    }
    Ok(run)
}

pub fn extend_representatives_face(
    p: &Planarization<'_>,
    face: FaceId,
    c: usize,
    preferred: Option<FaceId>,
    distinct_faces: bool,
    base_hash: &str,
    run: &mut RepresentativeRun,
) -> Result<(), ExtendError> {
    let x = p.drawing.crossings();
    if c < x {
        return Err(ExtendError::BudgetBelowBase { budget: c, base: x });
    }
    let eps = c - x;
    let Some(mut sets) = face_classes(p, face, eps, distinct_faces)? else {
        return Ok(());
    };
    for set in &mut sets {
        for cls in set.iter_mut() {
            let r = select_representative(p, cls, preferred);
            cls.representative = cls.members.iter().position(|m| m == r).unwrap();
        }
    }
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by_key(|&i| (sets[i].len(), i));
    let ordered: Vec<&Vec<EquivalenceClass>> = order.iter().map(|&i| &sets[i]).collect();
    let mut rest_min = vec![0usize; ordered.len() + 1];
    for k in (0..ordered.len()).rev() {
        rest_min[k] = rest_min[k + 1] + ordered[k][0].len();
    }
    let mut search = ClassSearch {
        p,
        face,
        sets: &ordered,
        rest_min: &rest_min,
        pair_cache: HashMap::new(),
        chosen: Vec::with_capacity(ordered.len()),
    };
    let mut err = None;
    search.dfs(0, eps, &mut |classes| {
        if err.is_some() {
            return;
        }
        match realize_product(p, face, classes) {
            Ok(ProductOutcome::Realized(ext, retried)) => {
                run.retried += retried as usize;
                run.extensions.push(ext);
            }
            Ok(ProductOutcome::Impossible) => {}
            Ok(ProductOutcome::Unresolved) => {
                let mut keyed: Vec<&EquivalenceClass> = classes.to_vec();
                keyed.sort_by_key(|c| c.members[0].target);
                run.errors.push(ErrorRecord {
                    base: base_hash.to_string(),
                    face,
                    classes: keyed.iter().map(|c| c.key.clone()).collect(),
                });
            }
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

pub(crate) enum ProductOutcome {
    /// Drawn; the flag tells whether a non-representative member was needed.
    Realized(Extension, bool),
    /// No member combination can be drawn.
    Impossible,
    /// The retry bound ran out before a drawable combination was found.
    Unresolved,
}

/// Realizes a class product with its representatives, falling back to
/// other members when the representatives are entangled.
pub(crate) fn realize_product(
    p: &Planarization<'_>,
    face: FaceId,
    classes: &[&EquivalenceClass],
) -> Result<ProductOutcome, ExtendError> {
    let reps: Vec<&Routing> = classes.iter().map(|c| c.representative()).collect();
    if let Ok(ext) = realize(p, face, &reps)? {
        return Ok(ProductOutcome::Realized(ext, false));
    }
    let sizes: Vec<usize> = classes.iter().map(|c| c.members.len()).collect();
    let total = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
    let exhaustive = matches!(total, Some(t) if t <= RETRY_LIMIT);
    let mut idx = vec![0usize; classes.len()];
    for _ in 0..RETRY_LIMIT {
        // Odometer over member indices.
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(if exhaustive {
                    ProductOutcome::Impossible
                } else {
                    ProductOutcome::Unresolved
                });
            }
            idx[k] += 1;
            if idx[k] < sizes[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        let tuple: Vec<&Routing> = classes.iter().zip(&idx).map(|(c, &i)| &c.members[i]).collect();
        if let Ok(ext) = realize(p, face, &tuple)? {
            return Ok(ProductOutcome::Realized(ext, true));
        }
    }
    Ok(if exhaustive {
        ProductOutcome::Impossible
    } else {
        ProductOutcome::Unresolved
    })
}

struct ClassSearch<'s, 'p, 'a> {
    p: &'p Planarization<'a>,
    face: FaceId,
    sets: &'s [&'s Vec<EquivalenceClass>],
    rest_min: &'s [usize],
    pair_cache: HashMap<(usize, usize, usize, usize), bool>,
    chosen: Vec<usize>,
}

impl<'s> ClassSearch<'s, '_, '_> {
    /// Two classes fit together when some pair of members can be drawn.
    fn classes_compatible(&mut self, i: usize, ci: usize, k: usize, ck: usize) -> bool {
        let (p, face, sets) = (self.p, self.face, self.sets);
        *self.pair_cache.entry((i, ci, k, ck)).or_insert_with(|| {
            let a = &sets[i][ci];
            let b = &sets[k][ck];
            a.members
                .iter()
                .any(|ra| b.members.iter().any(|rb| compatible(p, face, &[ra, rb])))
        })
    }

    fn dfs(&mut self, k: usize, remaining: usize, leaf: &mut dyn FnMut(&[&'s EquivalenceClass])) {
        let sets = self.sets;
        if k == sets.len() {
            let classes: Vec<&EquivalenceClass> = self.chosen.iter().enumerate().map(|(i, &c)| &sets[i][c]).collect();
            leaf(&classes);
            return;
        }
        for (j, cls) in sets[k].iter().enumerate() {
            if cls.len() + self.rest_min[k + 1] > remaining {
                break;
            }
            let ok = (0..self.chosen.len()).all(|i| {
                let ci = self.chosen[i];
                self.classes_compatible(i, ci, k, j)
            });
            if !ok {
                continue;
            }
            self.chosen.push(j);
            self.dfs(k + 1, remaining - cls.len(), leaf);
            self.chosen.pop();
        }
    }
}
