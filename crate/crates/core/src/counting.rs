//! Closed-form crossing arithmetic: the conjectured crossing numbers, the
//! vertex-deletion counting identity, parity, and stage budgets.
//!
//! Everything here is exact integer arithmetic.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use crate::drawing::{Drawing, VertexId};
use crate::error::CountingError;

/// Conjectured crossing number of `K_n`:
/// `floor(n/2) floor((n-1)/2) floor((n-2)/2) floor((n-3)/2) / 4`.
pub fn zed(n: usize) -> Result<u64, CountingError> {
    if n < 1 {
        return Err(CountingError::BadN(n));
    }
    let n = n as i64;
    let p = (n / 2) * ((n - 1) / 2) * ((n - 2).div_euclid(2)) * ((n - 3).div_euclid(2));
    Ok((p / 4).max(0) as u64)
}

fn z(n: usize) -> u64 {
    zed(n).expect("n >= 1")
}

/// Crossing-parity test for odd `n`: a good drawing of `K_n` with `c`
/// crossings has the same parity as `Z(n)`.
pub fn parity_ok(n: usize, c: u64) -> Result<bool, CountingError> {
    if n.is_multiple_of(2) {
        return Err(CountingError::EvenN(n));
    }
    if n < 5 {
        return Err(CountingError::BadN(n));
    }
    Ok(c % 2 == z(n) % 2)
}

/// A known crossing number with where it comes from.
#[derive(Clone, Copy, Debug)]
pub struct KnownBound {
    pub n: usize,
    pub cr: u64,
    pub source: &'static str,
}

/// Crossing numbers of `K_n` that are established, used as stage minima.
pub const KNOWN_CROSSING_NUMBERS: &[KnownBound] = &[
    KnownBound { n: 4, cr: 0, source: "planar" },
    KnownBound { n: 5, cr: 1, source: "Kuratowski" },
    KnownBound { n: 6, cr: 3, source: "Guy 1960" },
    KnownBound { n: 7, cr: 9, source: "Guy 1969" },
    KnownBound { n: 8, cr: 18, source: "Guy 1969" },
    KnownBound { n: 9, cr: 36, source: "Guy 1969" },
    KnownBound { n: 10, cr: 60, source: "Guy 1969" },
    KnownBound { n: 11, cr: 100, source: "Pan and Richter 2007" },
    KnownBound { n: 12, cr: 150, source: "Pan and Richter 2007 with the counting identity" },
];

pub fn known_crossing_number(n: usize) -> Option<u64> {
    KNOWN_CROSSING_NUMBERS.iter().find(|k| k.n == n).map(|k| k.cr)
}

/// One generation stage: drawings of `K_n` with `min..=max` crossings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stage {
    pub n: usize,
    pub min_crossings: u64,
    pub max_crossings: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StagePlan {
    pub target_n: usize,
    pub target_cr: u64,
    pub parity: bool,
    pub known_bounds: bool,
    /// Ascending from `n = 4`, excluding the target itself.
    pub stages: Vec<Stage>,
}

#[derive(Clone, Copy, Debug)]
pub struct PlanConfig {
    pub parity: bool,
    /// Use [`KNOWN_CROSSING_NUMBERS`] for stage minima; otherwise minima are
    /// derived from the counting identity alone.
    pub known_bounds: bool,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            parity: true,
            known_bounds: true,
        }
    }
}

pub fn stage_plan(n_target: usize, c_target: u64, use_parity: bool) -> Result<StagePlan, CountingError> {
    stage_plan_with(
        n_target,
        c_target,
        PlanConfig {
            parity: use_parity,
            ..PlanConfig::default()
        },
    )
}

fn parity_reduce(n: usize, c: u64, parity: bool) -> u64 {
    if parity && n % 2 == 1 && n >= 5 && c > 0 && !parity_ok(n, c).unwrap() {
        c - 1
    } else {
        c
    }
}

fn lower_bounds(n_max: usize, cfg: PlanConfig) -> Vec<u64> {
    // lows[n] for n in 0..=n_max; derived bounds climb with the counting identity.
    let mut lows = vec![0u64; n_max + 1];
    for n in 5..=n_max {
        let derived = (n as u64 * lows[n - 1]).div_ceil(n as u64 - 4);
        let mut derived = derived;
        if cfg.parity && n % 2 == 1 && !parity_ok(n, derived).unwrap() {
            derived += 1;
        }
        lows[n] = match (cfg.known_bounds, known_crossing_number(n)) {
            (true, Some(k)) => k.max(derived),
            _ => derived,
        };
    }
    lows
}

/// Budgets for every stage below `(n_target, c_target)`.
///
/// Each stage keeps `floor((n+1-4) c_{n+1} / (n+1))` crossings, reduced by
/// one for odd `n` when parity rules that value out. When the first stage
/// below the target would only hold optimal drawings while the target
/// forces some deletion above optimal, the stage is pinned to the values
/// the pairwise deletion analysis leaves consistent.
pub fn stage_plan_with(n_target: usize, c_target: u64, cfg: PlanConfig) -> Result<StagePlan, CountingError> {
    if n_target < 5 {
        return Err(CountingError::BadN(n_target));
    }
    let lows = lower_bounds(n_target, cfg);
    let mut stages = Vec::new();
    let mut c_above = c_target;
    for n in (4..n_target).rev() {
        let raw = ((n as u64 + 1 - 4) * c_above) / (n as u64 + 1);
        let mut max = parity_reduce(n, raw, cfg.parity);
        let mut min = lows[n];
        if n + 1 == n_target && n >= 6 {
            if let Some(h) = pinned_value(n_target, c_target, max, lows[n], lows[n - 1]) {
                min = h;
                max = h;
            }
        }
        stages.push(Stage {
            n,
            min_crossings: min.min(max),
            max_crossings: max,
        });
        c_above = max;
    }
    stages.reverse();
    Ok(StagePlan {
        target_n: n_target,
        target_cr: c_target,
        parity: cfg.parity,
        known_bounds: cfg.known_bounds,
        stages,
    })
}

fn pinned_value(n_target: usize, c_target: u64, descent: u64, floor: u64, low_below: u64) -> Option<u64> {
    if descent != floor {
        return None;
    }
    let profiles = deletion_profiles(n_target, c_target, floor);
    let consistent: Vec<&DeletionProfile> = profiles
        .iter()
        .filter(|p| profile_consistent(p, n_target, floor, low_below))
        .collect();
    let mut highs = consistent.iter().flat_map(|p| p.counts.keys().copied().filter(|&v| v > floor));
    let h = highs.next()?;
    if highs.all(|v| v == h) && consistent.iter().all(|p| p.counts.keys().any(|&v| v > floor)) {
        Some(h)
    } else {
        None
    }
}

/// Whether the high deletions of a profile admit a consistent assignment of
/// double-deletion counts. Low vertices are optimal, so every double
/// deletion through a low vertex equals `low_below`.
fn profile_consistent(p: &DeletionProfile, n: usize, floor: u64, low_below: u64) -> bool {
    let highs: Vec<i64> = p
        .counts
        .iter()
        .filter(|(&v, _)| v > floor)
        .flat_map(|(&v, &m)| std::iter::repeat_n(v as i64, m))
        .collect();
    let k = highs.len();
    let (n, low) = (n as i64, low_below as i64);
    // r_i = sum of the unknown double deletions at high vertex i.
    let r: Vec<i64> = highs.iter().map(|&h| (n - 5) * h - (n - k as i64) * low).collect();
    match k {
        0 => true,
        1 => r[0] == 0,
        2 => r[0] == r[1] && r[0] >= low,
        3 => {
            let x01 = r[0] + r[1] - r[2];
            let x02 = r[0] + r[2] - r[1];
            let x12 = r[1] + r[2] - r[0];
            [x01, x02, x12].iter().all(|&x| x % 2 == 0 && x / 2 >= low)
        }
        // Underdetermined; never ruled out.
        _ => true,
    }
}

impl StagePlan {
    pub fn stage(&self, n: usize) -> Option<&Stage> {
        self.stages.iter().find(|s| s.n == n)
    }

    /// Plain-text table in the layout of a drawing-count table.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# stage plan target n={} cr={} parity={} known-bounds={}",
            self.target_n,
            self.target_cr,
            on_off(self.parity),
            on_off(self.known_bounds)
        );
        let _ = writeln!(s, "{:<14} {:>6} {:>6}", "drawings", "min", "max");
        for st in &self.stages {
            let _ = writeln!(s, "{:<14} {:>6} {:>6}", stage_name(st), st.min_crossings, st.max_crossings);
        }
        s
    }
}

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

/// `D_n^c` or `D_n^{<=c}`.
pub fn stage_name(st: &Stage) -> String {
    if st.min_crossings == st.max_crossings {
        format!("D_{}^{}", st.n, st.max_crossings)
    } else {
        format!("D_{}^{{<={}}}", st.n, st.max_crossings)
    }
}

/// `cr(D) - Z(n)`; negative values would refute the conjectured formula.
pub fn deficiency(d: &Drawing) -> i64 {
    d.crossings() as i64 - z(d.n_real()) as i64
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NdpReport {
    pub holds: bool,
    pub witness: Option<VertexId>,
    /// Set when a violation shows `cr(K_{n+1}) < Z(n+1)` by duplicating the witness.
    pub refutes_next_odd: bool,
}

/// Normal deficiency property for drawings of `K_{2m}`:
/// `δ(D - v) <= 2 δ(D)` for every vertex.
pub fn ndp_check(d: &Drawing) -> Result<NdpReport, CountingError> {
    let n = d.n_real();
    if n % 2 == 1 {
        return Err(CountingError::OddN(n));
    }
    let delta = deficiency(d);
    let resp = d.responsibilities();
    let zsub = z(n - 1) as i64;
    for v in 1..=n {
        let sub = (d.crossings() - resp[v - 1]) as i64 - zsub;
        if sub > 2 * delta {
            return Ok(NdpReport {
                holds: false,
                witness: Some(v),
                refutes_next_odd: true,
            });
        }
    }
    Ok(NdpReport {
        holds: true,
        witness: None,
        refutes_next_odd: false,
    })
}

/// Crossings of the drawing of `K_{n+1}` made by duplicating `v`:
/// `cr(D) + cr(v, D) + 2 C((n-1)/2, 2)`.
pub fn duplication_bound(d: &Drawing, v: VertexId) -> Result<u64, CountingError> {
    let n = d.n_real();
    if n.is_multiple_of(2) {
        return Err(CountingError::EvenN(n));
    }
    let resp = d
        .crossings_at(v)
        .map_err(|e| CountingError::Inconsistent(e.to_string()))?;
    let h = ((n - 1) / 2) as u64;
    Ok(d.crossings() as u64 + resp as u64 + h * h.saturating_sub(1))
}

/// Multiset of vertex-deletion crossing counts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DeletionProfile {
    pub counts: BTreeMap<u64, usize>,
}

impl DeletionProfile {
    pub fn total_vertices(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn weighted_sum(&self) -> u64 {
        self.counts.iter().map(|(&v, &m)| v * m as u64).sum()
    }
}

impl fmt::Display for DeletionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, m)) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}:{m}")?;
        }
        write!(f, "}}")
    }
}

/// All multisets of `n` deletion counts, each at least `floor_cr`, whose sum
/// is `(n - 4) c`.
pub fn deletion_profiles(n: usize, c: u64, floor_cr: u64) -> Vec<DeletionProfile> {
    if n < 5 {
        return Vec::new();
    }
    let total = (n as u64 - 4) * c;
    let base = n as u64 * floor_cr;
    if total < base {
        return Vec::new();
    }
    let excess = total - base;
    let mut out = Vec::new();
    let mut parts = Vec::new();
    partitions(excess, excess, n, &mut parts, &mut |parts| {
        let mut counts = BTreeMap::new();
        counts.insert(floor_cr, n - parts.len());
        for &p in parts {
            *counts.entry(floor_cr + p).or_insert(0) += 1;
        }
        counts.retain(|_, m| *m > 0);
        out.push(DeletionProfile { counts });
    });
    out.sort();
    out
}

fn partitions(rest: u64, max_part: u64, slots: usize, parts: &mut Vec<u64>, emit: &mut impl FnMut(&[u64])) {
    if rest == 0 {
        emit(parts);
        return;
    }
    if parts.len() == slots {
        return;
    }
    for p in (1..=max_part.min(rest)).rev() {
        parts.push(p);
        partitions(rest - p, p, slots, parts, emit);
        parts.pop();
    }
}

/// Common double-deletion count for `k` symmetric high vertices.
///
/// Low vertices of `K_n` are optimal; the optimal sub-stage count follows
/// from `low_value` by the counting identity. Each high vertex then has
/// `(n - 5) h = (k - 1) x + (n - k) low_value`.
pub fn pairwise_solver(n: usize, c: u64, k: usize, low_value: u64) -> Result<u64, CountingError> {
    if k < 2 {
        return Err(CountingError::Inconsistent(format!("need at least two high vertices, got {k}")));
    }
    if n < 6 || k > n {
        return Err(CountingError::BadN(n));
    }
    let (ni, ci, ki, low) = (n as i64, c as i64, k as i64, low_value as i64);
    let floor_num = (ni - 1) * low;
    if floor_num % (ni - 5) != 0 {
        return Err(CountingError::Inconsistent(format!(
            "{}·{low} is not divisible by {}",
            ni - 1,
            ni - 5
        )));
    }
    let floor = floor_num / (ni - 5);
    let high_num = (ni - 4) * ci - (ni - ki) * floor;
    if high_num % ki != 0 {
        return Err(CountingError::Inconsistent(format!(
            "{high_num} excess crossings cannot split evenly over {k} high vertices"
        )));
    }
    let h = high_num / ki;
    if h <= floor {
        return Err(CountingError::Inconsistent(format!("high value {h} is not above {floor}")));
    }
    let x_num = (ni - 5) * h - (ni - ki) * low;
    if x_num % (ki - 1) != 0 {
        return Err(CountingError::Inconsistent(format!(
            "double deletions {x_num} do not split over {} pairs",
            k - 1
        )));
    }
    let x = x_num / (ki - 1);
    if x < low {
        return Err(CountingError::Inconsistent(format!("double deletion {x} below {low}")));
    }
    Ok(x as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zed_values() {
        assert_eq!(zed(12).unwrap(), 150);
        assert_eq!(zed(13).unwrap(), 225);
        assert_eq!(zed(4).unwrap(), 0);
        assert_eq!(zed(1).unwrap(), 0);
        assert_eq!(zed(5).unwrap(), 1);
        assert_eq!(zed(11).unwrap(), 100);
        assert!(zed(0).is_err());
    }

    #[test]
    fn zed_counting_consistency() {
        for n in 5..40 {
            assert!(n as u64 * zed(n - 1).unwrap() <= (n as u64 - 4) * zed(n).unwrap());
        }
    }

    #[test]
    fn parity() {
        assert!(!parity_ok(9, 37).unwrap());
        assert!(parity_ok(7, 9).unwrap());
        assert!(parity_ok(13, 217).unwrap());
        assert!(parity_ok(8, 18).is_err());
    }

    #[test]
    fn plan_matches_the_known_chain() {
        let plan = stage_plan(13, 217, true).unwrap();
        let max: Vec<u64> = plan.stages.iter().rev().map(|s| s.max_crossings).collect();
        assert_eq!(max, vec![151, 100, 63, 36, 20, 9, 3, 1, 0]);
        let k12 = plan.stage(12).unwrap();
        assert_eq!((k12.min_crossings, k12.max_crossings), (151, 151));
        assert_eq!(plan.stage(8).unwrap().min_crossings, 18);

        let off = stage_plan(13, 217, false).unwrap();
        assert_eq!(off.stage(9).unwrap().max_crossings, 37);
        assert_eq!(off.stage(7).unwrap().max_crossings, 10);

        let tiny = stage_plan(5, 1, true).unwrap();
        assert_eq!(
            tiny.stages,
            vec![Stage {
                n: 4,
                min_crossings: 0,
                max_crossings: 0
            }]
        );
    }

    #[test]
    fn plan_table_lists_every_stage() {
        let t = stage_plan(13, 217, true).unwrap().to_table();
        assert!(t.contains("D_12^151"));
        assert!(t.contains("D_8^{<=20}"));
        assert_eq!(t.lines().count(), 2 + 9);
    }

    #[test]
    fn profiles() {
        let p = deletion_profiles(13, 217, 150);
        let shown: Vec<String> = p.iter().map(|p| p.to_string()).collect();
        assert_eq!(p.len(), 3, "{shown:?}");
        assert!(shown.contains(&"{150:10,151:3}".to_string()));
        assert!(shown.contains(&"{150:11,151:1,152:1}".to_string()));
        assert!(shown.contains(&"{150:12,153:1}".to_string()));
        for q in &p {
            assert_eq!(q.total_vertices(), 13);
            assert_eq!(q.weighted_sum(), 9 * 217);
        }
        assert_eq!(deletion_profiles(12, 150, 100).len(), 1);
        assert_eq!(deletion_profiles(12, 150, 100)[0].to_string(), "{100:12}");
        assert_eq!(deletion_profiles(8, 18, 9)[0].to_string(), "{9:8}");
        assert!(deletion_profiles(8, 17, 9).is_empty());
    }

    #[test]
    fn pairwise() {
        assert_eq!(pairwise_solver(13, 217, 3, 100).unwrap(), 104);
        assert!(matches!(pairwise_solver(13, 217, 2, 100), Err(CountingError::Inconsistent(_))));
        assert!(pairwise_solver(13, 217, 1, 100).is_err());
    }

    #[test]
    fn only_the_three_high_profile_survives() {
        let profiles = deletion_profiles(13, 217, 150);
        let ok: Vec<String> = profiles
            .iter()
            .filter(|p| profile_consistent(p, 13, 150, 100))
            .map(|p| p.to_string())
            .collect();
        assert_eq!(ok, vec!["{150:10,151:3}".to_string()]);
    }

    #[test]
    fn discovery_mode_still_bounds_from_above() {
        let plan = stage_plan_with(
            9,
            36,
            PlanConfig {
                parity: true,
                known_bounds: false,
            },
        )
        .unwrap();
        let s8 = plan.stage(8).unwrap();
        assert_eq!(s8.max_crossings, 20);
        assert!(s8.min_crossings <= 18);
    }
}
