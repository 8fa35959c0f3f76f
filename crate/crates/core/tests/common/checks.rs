//! Library-versus-oracle comparisons. Each returns a short summary on
//! agreement and a description of the first disagreement otherwise.

use std::collections::BTreeSet;

use forge_core::canonical::{canonical_code, face_orbits};
use forge_core::drawing::{seed_k4, Drawing, FaceMap};
use forge_core::extension::{extend_all, ExtendOptions};
use forge_core::k12check::{check_face, subdrawing_crossings, K12Params};
use forge_core::routing::{enumerate_routings, Planarization, UNREACHABLE};
use forge_core::validate;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use super::*;

pub type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// The planar `K_4` and the `K_5`, `K_6` pools, every `n_real <= 6`.
pub fn small_drawings(k6_max: usize) -> Vec<Drawing> {
    let (k5, k6) = small_pool(k6_max);
    std::iter::once(seed_k4()).chain(k5).chain(k6).collect()
}

pub fn routings_match(pool: &[Drawing], max_slack: usize) -> Check {
    let mut compared = 0usize;
    let mut routings = 0usize;
    for (i, d) in pool.iter().enumerate() {
        let p = Planarization::new(d);
        let m = Map::from_drawing(d);
        let faces = m.faces();
        for f in 0..p.faces.len() {
            let start = faces[p.faces.face(f).darts[0]];
            for w in 1..=d.n_real() {
                let dist = p.distance(f, w);
                ensure!(dist != UNREACHABLE, "drawing {i}: {w} unreachable from face {f}");
                for slack in 0..=max_slack {
                    let len = dist as usize + slack;
                    for distinct in [false, true] {
                        let lib: BTreeSet<(Vec<usize>, usize)> = enumerate_routings(&p, f, w, len, distinct)
                            .into_iter()
                            .map(|r| (r.crossed, r.end_corner))
                            .collect();
                        let naive: BTreeSet<(Vec<usize>, usize)> =
                            m.walks(&faces, start, w, len, distinct, None).into_iter().collect();
                        ensure!(
                            lib == naive,
                            "drawing {i} face {f} target {w} len {len} distinct {distinct}: {} vs {} routings",
                            lib.len(),
                            naive.len()
                        );
                        compared += 1;
                        routings += lib.len();
                    }
                }
            }
        }
    }
    Ok(format!("{compared} (face, target, length) cases, {routings} routings"))
}

pub fn extensions_match(base: &Drawing, c: usize, opts: ExtendOptions) -> Result<usize, String> {
    let exts = extend_all(base, c, opts).map_err(|e| e.to_string())?;
    let mut lib = BTreeSet::new();
    for e in &exts {
        ensure!(validate(&e.drawing).ok(), "invalid extension of a {}-crossing base", base.crossings());
        lib.insert(canonical_code(&e.drawing));
    }
    let naive = naive_extensions(base, c);
    ensure!(
        lib == naive,
        "K_{} base with {} crossings, budget {c}: {} drawings vs {} from the oracle",
        base.n_real(),
        base.crossings(),
        lib.len(),
        naive.len()
    );
    Ok(lib.len())
}

/// Budgets compared for each base size.
pub fn extension_cases() -> Vec<(Drawing, usize, ExtendOptions)> {
    let mut cases = Vec::new();
    let seed = seed_k4();
    for c in 0..=2 {
        cases.push((seed.clone(), c, ExtendOptions::default()));
    }
    for c in 0..=4 {
        cases.push((seed.clone(), c, EVERY_WALK));
    }
    let (k5, k6) = small_pool(5);
    for b in &k5 {
        let x = b.crossings();
        for c in x..=x + 4 {
            cases.push((b.clone(), c, EVERY_WALK));
        }
        for c in x..=x + 3 {
            cases.push((b.clone(), c, ExtendOptions::default()));
        }
    }
    for b in &k6 {
        let x = b.crossings();
        for c in x + 5..=x + 7 {
            cases.push((b.clone(), c, ExtendOptions::default()));
        }
    }
    let (_, _, k7) = optimal_chain();
    for b in &k7 {
        for c in 18..=20 {
            cases.push((b.clone(), c, ExtendOptions::default()));
        }
    }
    cases
}

pub fn all_extensions_match(cases: &[(Drawing, usize, ExtendOptions)]) -> Check {
    let mut total = 0;
    let mut skipped = 0;
    for (b, c, opts) in cases {
        // Distinct faces are only guaranteed to suffice for slack up to n - 2.
        if opts.distinct_faces && extend_all(b, *c, *opts).is_err() {
            skipped += 1;
            continue;
        }
        total += extensions_match(b, *c, *opts)?;
    }
    Ok(format!(
        "{} (base, budget) cases, {total} drawings, {skipped} beyond the distinct-face slack",
        cases.len() - skipped
    ))
}

pub fn canonical_matches_isomorphism(k6_max: usize) -> Check {
    let originals = small_drawings(k6_max);
    let mut rng = StdRng::seed_from_u64(11);
    let mut pool = originals.clone();
    for d in &originals {
        for k in 0..2 {
            let mut perm: Vec<usize> = (1..=d.n_real()).collect();
            perm.shuffle(&mut rng);
            let copy = d.relabel(&perm).map_err(|e| e.to_string())?;
            pool.push(if k == 0 { copy } else { copy.mirror() });
        }
    }
    let codes: Vec<_> = pool.iter().map(canonical_code).collect();
    let mut pairs = 0;
    let mut iso = 0;
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            let same = isomorphic(&pool[i], &pool[j]);
            ensure!((codes[i] == codes[j]) == same, "drawings {i} and {j}: codes equal {}, isomorphic {same}", codes[i] == codes[j]);
            pairs += 1;
            iso += same as usize;
        }
    }
    // Each original matches exactly its two copies, which match each other.
    ensure!(iso == 3 * originals.len(), "{iso} isomorphic pairs among {} originals", originals.len());
    Ok(format!("{pairs} pairs over {} drawings, {iso} isomorphic", pool.len()))
}

pub fn orbits_match(pool: &[Drawing]) -> Check {
    let mut faces_total = 0;
    for (i, d) in pool.iter().enumerate() {
        let faces = FaceMap::new(d);
        let face_of: Vec<usize> = (0..d.num_darts()).map(|x| faces.face_of(x)).collect();
        let orbits = automorphism_face_orbits(d, &face_of);
        let reps = face_orbits(d, &faces);
        ensure!(reps.len() == orbits.len(), "drawing {i}: {} representatives for {} orbits", reps.len(), orbits.len());
        for o in &orbits {
            ensure!(
                reps.iter().find(|r| o.contains(r)) == o.iter().next(),
                "drawing {i}: orbit {o:?} not represented by its smallest face"
            );
        }
        faces_total += faces.len();
    }
    Ok(format!("{} drawings, {faces_total} faces", pool.len()))
}

/// Every `K_8` drawing with `params.target` crossings grown from the given
/// `K_7` drawings: counted deletions agree with drawn ones, and the face
/// checker reports exactly the drawn heavy deletions.
pub fn k12_analogue_matches(k7: &[Drawing], params: K12Params, thresholds: &[usize]) -> Check {
    let all_faces = ExtendOptions {
        distinct_faces: true,
        face_orbits: false,
    };
    let mut extensions = 0;
    let mut deletions = 0;
    let mut hits = 0;
    for (bi, base) in k7.iter().enumerate() {
        let p = Planarization::new(base);
        let nv = base.n_real() + 1;
        let exts = extend_all(base, params.target, all_faces).map_err(|e| e.to_string())?;
        for e in &exts {
            let keys = e.signature(&p);
            for v in 1..=base.n_real() {
                let drawn = e.drawing.delete_vertex(v).map_err(|e| e.to_string())?.crossings();
                let counted = subdrawing_crossings(base, &keys, v);
                ensure!(counted == drawn, "base {bi} face {}: vertex {v} counted {counted}, drawn {drawn}", e.face);
                deletions += 1;
            }
            let back = e.drawing.delete_vertex(nv).map_err(|e| e.to_string())?;
            ensure!(back.crossings() == base.crossings(), "base {bi}: new vertex deletion changed the base");
        }
        extensions += exts.len();
        for &threshold in thresholds {
            let params = K12Params { threshold, ..params };
            for f in 0..p.faces.len() {
                let mut drawn = BTreeSet::new();
                for e in exts.iter().filter(|e| e.face == f && e.drawing.crossings() == params.target) {
                    for v in 1..=base.n_real() {
                        if e.drawing.delete_vertex(v).map_err(|e| e.to_string())?.crossings() >= threshold {
                            drawn.insert((e.signature(&p), v));
                        }
                    }
                }
                for audit in [false, true] {
                    let verdict = check_face(&p, f, params, audit).map_err(|e| e.to_string())?;
                    ensure!(verdict.audit_failures == 0, "base {bi} face {f}: counting identity failed");
                    ensure!(verdict.m + 1 >= params.target, "base {bi} face {f}: total {} below the target range", verdict.m);
                    let found: BTreeSet<_> = verdict
                        .hits
                        .iter()
                        .filter(|h| h.realizable)
                        .map(|h| (h.classes.clone(), h.vertex))
                        .collect();
                    ensure!(
                        found == drawn,
                        "base {bi} face {f} threshold {threshold} audit {audit}: {} hits vs {} drawn",
                        found.len(),
                        drawn.len()
                    );
                    hits += found.len();
                }
            }
        }
    }
    Ok(format!(
        "{} bases, {extensions} extensions, {deletions} deletions, {hits} heavy deletions at thresholds {thresholds:?}",
        k7.len()
    ))
}
