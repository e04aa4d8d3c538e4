//! Grid sweep with adaptive halving.
//!
//! Boxes live on an integer lattice in units of the finest width `eps_min`.
//! The sweep enumerates every top-level box `a_i = j_i * eps0`,
//! `b_i = a_i + eps0` that satisfies the feasibility constraints and
//! evaluates its bound. A box whose bound reaches the threshold is split into
//! its 128 half-width sub-boxes, and so on down to `eps_min`. Work is spread
//! over a rayon pool in fixed-size chunks and merged in canonical order, so
//! the report does not depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{box_log_bound, f0_bound, factor_bound, BoxSpec, RateError, CONSTRAINT_TOL, GRID_UPPER, MIN_CUT_FRACTION};

const CHUNK: usize = 512;
pub const DEFAULT_OFFENDER_CAP: usize = 1_000;
pub const DEFAULT_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyConfig {
    pub threshold: f64,
    pub eps0: f64,
    pub eps_min: f64,
    /// Added to every box bound before comparing with `ln(threshold)`.
    pub slack: f64,
    pub workers: usize,
    /// Offending boxes listed in the report; the count is always exact.
    pub offender_cap: usize,
}

impl CertifyConfig {
    pub fn new(threshold: f64, eps0: f64, eps_min: f64) -> Self {
        CertifyConfig {
            threshold,
            eps0,
            eps_min,
            slack: DEFAULT_SLACK,
            workers: 1,
            offender_cap: DEFAULT_OFFENDER_CAP,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_slack(mut self, slack: f64) -> Self {
        self.slack = slack;
        self
    }

    /// Number of halvings from `eps0` down to `eps_min`.
    fn depth(&self) -> Result<u32, RateError> {
        let bad = |m: String| Err(RateError::BadSchedule(m));
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return bad(format!("threshold must be positive, got {}", self.threshold));
        }
        if !(self.eps_min > 0.0 && self.eps_min <= self.eps0 && self.eps0 <= 0.1) {
            return bad(format!(
                "need 0 < eps_min <= eps0 <= 0.1, got eps0 = {}, eps_min = {}",
                self.eps0, self.eps_min
            ));
        }
        if !(self.slack >= 0.0 && self.slack.is_finite()) {
            return bad(format!("slack must be non-negative, got {}", self.slack));
        }
        let ratio = self.eps0 / self.eps_min;
        let depth = ratio.log2().round();
        if depth > 20.0 || (ratio - depth.exp2()).abs() > 1e-9 * ratio {
            return bad(format!("eps0 / eps_min = {} is not a power of two (at most 2^20)", ratio));
        }
        Ok(depth as u32)
    }
}

/// A lattice box: `a_i = lo_i * unit`, `b_i = (lo_i + width) * unit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridBox {
    pub lo: [u32; 7],
    pub width: u32,
}

impl GridBox {
    pub fn to_box(&self, unit: f64) -> BoxSpec {
        let a = self.lo.map(|l| l as f64 * unit);
        let b = self.lo.map(|l| (l + self.width) as f64 * unit);
        BoxSpec { a, b }
    }

    /// The `2^7` sub-boxes of half width, in lexicographic order of `lo`.
    pub fn children(&self) -> impl Iterator<Item = GridBox> + '_ {
        let half = self.width / 2;
        (0u32..128).map(move |mask| GridBox {
            lo: std::array::from_fn(|i| self.lo[i] + ((mask >> (6 - i)) & 1) * half),
            width: half,
        })
    }
}

/// Per-level counts for the refinement histogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub eps: f64,
    pub boxes_enumerated: u64,
    pub boxes_feasible: u64,
    pub boxes_refined: u64,
    /// Boxes at this level whose bound reached the threshold.
    pub over_threshold: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Offender {
    pub grid: GridBox,
    pub bounds: BoxSpec,
    /// `None` when the box could not be evaluated soundly.
    pub log_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub threshold: f64,
    pub log_threshold: f64,
    pub slack: f64,
    pub epsilon_schedule: Vec<f64>,
    pub boxes_enumerated: u64,
    pub boxes_feasible: u64,
    pub boxes_refined: u64,
    /// Boxes meeting the linear constraints but not the `1/e` hypothesis.
    pub unsound_boxes: u64,
    /// Factor evaluations that fell back to a numeric scan.
    pub fallback_factors: u64,
    /// Largest bound over the boxes that were not refined further.
    pub max_log_bound: Option<f64>,
    pub max_bound: Option<f64>,
    pub worst_box: Option<BoxSpec>,
    pub certified: bool,
    pub offender_count: u64,
    pub offender_list: Vec<Offender>,
    pub refinement_histogram: Vec<LevelStats>,
}

impl CertificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Sweep {
    unit: f64,
    depth: u32,
    cutoff: f64,
    slack: f64,
    offender_cap: usize,
}

#[derive(Clone)]
struct Tally {
    levels: Vec<LevelStats>,
    unsound: u64,
    fallback: u64,
    worst: Option<(f64, GridBox)>,
    offender_count: u64,
    offenders: Vec<Offender>,
}

impl Tally {
    fn new(schedule: &[f64]) -> Self {
        Tally {
            levels: schedule
                .iter()
                .map(|&eps| LevelStats {
                    eps,
                    boxes_enumerated: 0,
                    boxes_feasible: 0,
                    boxes_refined: 0,
                    over_threshold: 0,
                })
                .collect(),
            unsound: 0,
            fallback: 0,
            worst: None,
            offender_count: 0,
            offenders: Vec::new(),
        }
    }

    fn note_leaf(&mut self, value: f64, grid: GridBox) {
        if self.worst.is_none_or(|(w, _)| value > w) {
            self.worst = Some((value, grid));
        }
    }

    fn offend(&mut self, cap: usize, o: Offender) {
        self.offender_count += 1;
        if self.offenders.len() < cap {
            self.offenders.push(o);
        }
    }

    /// Appends `other`, which covers boxes after `self` in canonical order.
    fn absorb(mut self, other: Tally, cap: usize) -> Tally {
        for (l, r) in self.levels.iter_mut().zip(&other.levels) {
            l.boxes_enumerated += r.boxes_enumerated;
            l.boxes_feasible += r.boxes_feasible;
            l.boxes_refined += r.boxes_refined;
            l.over_threshold += r.over_threshold;
        }
        self.unsound += other.unsound;
        self.fallback += other.fallback;
        if let Some((v, g)) = other.worst {
            self.note_leaf(v, g);
        }
        self.offender_count += other.offender_count;
        let room = cap.saturating_sub(self.offenders.len());
        self.offenders.extend(other.offenders.into_iter().take(room));
        self
    }
}

/// A log factor and whether it needed the numeric fallback; `Err` if unsound.
type Entry = Result<(f64, bool), ()>;

/// Log-bound pieces for the children of one box. Factor `i` of a child only
/// depends on which half of coordinates `i` and `i + 1` it takes, so the 128
/// children share four values per factor.
struct ChildTable {
    entries: [[[Entry; 2]; 2]; 7],
}

impl ChildTable {
    fn new(parent: GridBox, unit: f64) -> Self {
        let half = parent.width / 2;
        let a = |i: usize, o: u32| (parent.lo[i] + o * half) as f64 * unit;
        let b = |i: usize, o: u32| (parent.lo[i] + o * half + half) as f64 * unit;
        let entries = std::array::from_fn(|i| {
            std::array::from_fn(|oi| {
                std::array::from_fn(|on| {
                    let (oi, on) = (oi as u32, on as u32);
                    let next = (i + 1) % 7;
                    if i == 0 {
                        f0_bound(a(0, oi), b(0, oi), b(1, on)).map(|v| (v, false)).map_err(|_| ())
                    } else {
                        factor_bound(i, a(i, oi), b(i, oi), b(next, on))
                            .map(|f| (f.log_factor, f.used_fallback))
                            .map_err(|_| ())
                    }
                })
            })
        });
        ChildTable { entries }
    }

    /// Same value as [`box_log_bound`] on the child with offset bits `mask`.
    fn bound(&self, mask: u32) -> Option<(f64, usize)> {
        let bit = |i: usize| ((mask >> (6 - i)) & 1) as usize;
        let mut total = 0.0;
        let mut fallbacks = 0;
        for i in 0..7 {
            let (v, fb) = self.entries[i][bit(i)][bit((i + 1) % 7)].ok()?;
            total = if i == 0 { v } else { total + v };
            fallbacks += fb as usize;
        }
        Some((total, fallbacks))
    }
}

impl Sweep {
    fn visit_top(&self, grid: GridBox, tally: &mut Tally) {
        let bx = grid.to_box(self.unit);
        tally.levels[0].boxes_enumerated += 1;
        if !bx.satisfies_constraints() {
            return;
        }
        tally.levels[0].boxes_feasible += 1;
        let eval = box_log_bound(&bx).ok();
        self.judge(grid, bx, 0, eval, tally);
    }

    fn refine(&self, parent: GridBox, level: usize, tally: &mut Tally) {
        let table = ChildTable::new(parent, self.unit);
        for (mask, child) in parent.children().enumerate() {
            let bx = child.to_box(self.unit);
            tally.levels[level].boxes_enumerated += 1;
            if !bx.satisfies_constraints() {
                continue;
            }
            tally.levels[level].boxes_feasible += 1;
            self.judge(child, bx, level, table.bound(mask as u32), tally);
        }
    }

    fn judge(&self, grid: GridBox, bx: BoxSpec, level: usize, eval: Option<(f64, usize)>, tally: &mut Tally) {
        let Some((value, fallbacks)) = eval else {
            // fails the 1/e hypothesis: cannot be bounded, so it counts against us
            tally.unsound += 1;
            tally.levels[level].over_threshold += 1;
            tally.offend(
                self.offender_cap,
                Offender {
                    grid,
                    bounds: bx,
                    log_bound: None,
                },
            );
            return;
        };
        tally.fallback += fallbacks as u64;
        if value + self.slack < self.cutoff {
            tally.note_leaf(value, grid);
            return;
        }
        tally.levels[level].over_threshold += 1;
        if level as u32 == self.depth {
            tally.note_leaf(value, grid);
            tally.offend(
                self.offender_cap,
                Offender {
                    grid,
                    bounds: bx,
                    log_bound: Some(value),
                },
            );
            return;
        }
        tally.levels[level].boxes_refined += 1;
        self.refine(grid, level + 1, tally);
    }
}

/// Top-level lattice boxes in lexicographic order, pruned on the prefix sums.
fn top_level_boxes(width: u32, eps0: f64) -> Vec<GridBox> {
    let jmax = ((GRID_UPPER + CONSTRAINT_TOL) / eps0).floor() as u32;
    // b_i = (j + 1) eps0 must reach MIN_CUT_FRACTION
    let jmin = ((MIN_CUT_FRACTION - CONSTRAINT_TOL) / eps0 - 1.0).ceil().max(0.0) as u32;
    let mut js = [0u32; 7];
    fn rec(
        idx: usize,
        js: &mut [u32; 7],
        jmin: u32,
        jmax: u32,
        eps0: f64,
        out: &mut Vec<[u32; 7]>,
    ) {
        let prefix: u32 = js[..idx].iter().sum();
        if idx == 7 {
            out.push(*js);
            return;
        }
        let remaining = (7 - idx - 1) as u32;
        for j in jmin..=jmax {
            // sum a <= 1/2 even with the remaining coordinates at their minimum
            if (prefix + j + remaining * jmin) as f64 * eps0 > 0.5 + CONSTRAINT_TOL {
                break;
            }
            // sum b >= 1/2 must stay reachable
            if (prefix + j + remaining * jmax + 7) as f64 * eps0 < 0.5 - CONSTRAINT_TOL {
                continue;
            }
            js[idx] = j;
            rec(idx + 1, js, jmin, jmax, eps0, out);
        }
        js[idx] = 0;
    }
    let mut raw = Vec::new();
    rec(0, &mut js, jmin, jmax, eps0, &mut raw);
    raw.into_iter()
        .map(|j| GridBox {
            lo: j.map(|x| x * width),
            width,
        })
        .collect()
}

/// Runs the sweep. The report is identical for every worker count.
pub fn certify(cfg: &CertifyConfig) -> Result<CertificationReport, RateError> {
    let depth = cfg.depth()?;
    let width = 1u32 << depth;
    let unit = cfg.eps0 / width as f64;
    let schedule: Vec<f64> = (0..=depth).map(|k| cfg.eps0 / (1u32 << k) as f64).collect();
    let log_threshold = cfg.threshold.ln();
    let sweep = Sweep {
        unit,
        depth,
        cutoff: log_threshold,
        slack: cfg.slack,
        offender_cap: cfg.offender_cap,
    };
    let tops = top_level_boxes(width, cfg.eps0);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| RateError::BadSchedule(format!("cannot start worker pool: {e}")))?;
    let chunks: Vec<Tally> = pool.install(|| {
        tops.par_chunks(CHUNK)
            .map(|chunk| {
                let mut t = Tally::new(&schedule);
                for &g in chunk {
                    sweep.visit_top(g, &mut t);
                }
                t
            })
            .collect()
    });
    let tally = chunks
        .into_iter()
        .fold(Tally::new(&schedule), |acc, t| acc.absorb(t, cfg.offender_cap));

    let sum = |f: fn(&LevelStats) -> u64| tally.levels.iter().map(f).sum::<u64>();
    let max_log_bound = tally.worst.map(|(v, _)| v).filter(|v| v.is_finite());
    Ok(CertificationReport {
        threshold: cfg.threshold,
        log_threshold,
        slack: cfg.slack,
        epsilon_schedule: schedule,
        boxes_enumerated: sum(|l| l.boxes_enumerated),
        boxes_feasible: sum(|l| l.boxes_feasible),
        boxes_refined: sum(|l| l.boxes_refined),
        unsound_boxes: tally.unsound,
        fallback_factors: tally.fallback,
        max_log_bound,
        max_bound: max_log_bound.map(f64::exp),
        worst_box: tally.worst.map(|(_, g)| g.to_box(unit)),
        certified: tally.offender_count == 0,
        offender_count: tally.offender_count,
        offender_list: tally.offenders,
        refinement_histogram: tally.levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn children_tile_parent() {
        let parent = GridBox {
            lo: [8, 16, 0, 24, 8, 40, 32],
            width: 8,
        };
        let kids: Vec<GridBox> = parent.children().collect();
        assert_eq!(kids.len(), 128);
        assert!(kids.windows(2).all(|w| w[0] < w[1]));
        for i in 0..7 {
            let mut starts: Vec<u32> = kids.iter().map(|k| k.lo[i]).collect();
            starts.sort_unstable();
            starts.dedup();
            assert_eq!(starts, vec![parent.lo[i], parent.lo[i] + 4]);
        }
        // every lattice point of the parent lies in some child
        for k in &kids {
            assert_eq!(k.width, 4);
            for i in 0..7 {
                assert!(k.lo[i] >= parent.lo[i] && k.lo[i] + k.width <= parent.lo[i] + parent.width);
            }
        }
    }

    #[test]
    fn child_table_matches_direct_bound() {
        let unit = 0.01 / 8.0;
        for lo in [[12u32, 4, 4, 4, 4, 8, 12], [8, 8, 8, 8, 8, 8, 8], [16, 4, 8, 4, 4, 4, 16]] {
            let parent = GridBox { lo: lo.map(|x| x * 4), width: 8 };
            let table = ChildTable::new(parent, unit);
            for (mask, child) in parent.children().enumerate() {
                let direct = box_log_bound(&child.to_box(unit)).ok();
                let via = table.bound(mask as u32);
                assert_eq!(direct.map(|(v, f)| (v.to_bits(), f)), via.map(|(v, f)| (v.to_bits(), f)));
            }
        }
    }

    #[test]
    fn bad_schedules() {
        assert!(certify(&CertifyConfig::new(0.99, 0.01, 0.003)).is_err());
        assert!(certify(&CertifyConfig::new(0.99, 0.2, 0.1)).is_err());
        assert!(certify(&CertifyConfig::new(0.99, 0.01, 0.02)).is_err());
        assert!(certify(&CertifyConfig::new(-1.0, 0.01, 0.01)).is_err());
        assert!(certify(&CertifyConfig::new(0.99, 0.01, 0.01).with_slack(-1.0)).is_err());
    }

    #[test]
    fn top_level_covers_feasible_grid() {
        let eps = 0.02;
        let tops = top_level_boxes(1, eps);
        let kept: std::collections::HashSet<[u32; 7]> = tops.iter().map(|g| g.lo).collect();
        // brute force over the whole 13^7 grid for eps = 0.02
        let jmax = (GRID_UPPER / eps).floor() as u32;
        let mut feasible = 0;
        let mut js = [0u32; 7];
        loop {
            let bx = GridBox { lo: js, width: 1 }.to_box(eps);
            if bx.satisfies_constraints() {
                feasible += 1;
                assert!(kept.contains(&js), "{:?} missing", js);
            }
            let mut i = 0;
            while i < 7 {
                js[i] += 1;
                if js[i] <= jmax {
                    break;
                }
                js[i] = 0;
                i += 1;
            }
            if i == 7 {
                break;
            }
        }
        assert!(feasible > 0);
    }
}
