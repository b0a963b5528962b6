//! Frame-wise detection matching and MODA / MODP / precision / recall.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// Match threshold in meters.
pub const DEFAULT_THRESHOLD_M: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub det: usize,
    pub gt: usize,
    /// Meters.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameMatch {
    pub pairs: Vec<MatchedPair>,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// Unmatched detections excused by a don't-care point.
    #[serde(default)]
    pub ignored: usize,
}

impl FrameMatch {
    pub fn true_positives(&self) -> usize {
        self.pairs.len()
    }

    pub fn gt_count(&self) -> usize {
        self.pairs.len() + self.false_negatives
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub moda: f64,
    pub modp: f64,
    pub precision: f64,
    pub recall: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub gt: usize,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One `key=value` line per field.
    pub fn to_key_value(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "moda={}", self.moda)?;
        writeln!(f, "modp={}", self.modp)?;
        writeln!(f, "precision={}", self.precision)?;
        writeln!(f, "recall={}", self.recall)?;
        writeln!(f, "tp={}", self.tp)?;
        writeln!(f, "fp={}", self.fp)?;
        writeln!(f, "fn={}", self.fn_)?;
        write!(f, "gt={}", self.gt)
    }
}

/// Minimum-cost assignment of every row to a distinct column (`rows ≤ cols`),
/// shortest augmenting paths with potentials. Returns the column of each row.
fn hungarian(cost: &[Vec<f64>], cols: usize) -> Vec<usize> {
    let n = cost.len();
    debug_assert!(n <= cols);
    // 1-based arrays; index 0 is the virtual root
    let mut u = vec![0.0_f64; n + 1];
    let mut v = vec![0.0_f64; cols + 1];
    let mut p = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=cols {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=cols {
        if p[j] != 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Optimal one-to-one matching of detections to ground truth (meters).
///
/// Pairs farther than `threshold_m` are inadmissible. Among assignments the
/// number of admissible pairs is maximized first, then their total distance
/// is minimized.
pub fn match_detections(dets: &[Point2], gts: &[Point2], threshold_m: f64) -> Result<FrameMatch> {
    if !(threshold_m > 0.0 && threshold_m.is_finite()) {
        return Err(Error::InvalidArgument("match threshold must be positive".into()));
    }
    if dets.is_empty() || gts.is_empty() {
        return Ok(FrameMatch {
            pairs: Vec::new(),
            false_positives: dets.len(),
            false_negatives: gts.len(),
            ignored: 0,
        });
    }
    let transpose = dets.len() > gts.len();
    let (rows, cols) = if transpose { (gts, dets) } else { (dets, gts) };
    // any admissible pair beats any set of inadmissible ones
    let big = threshold_m * (rows.len() as f64 + 1.0) + 1.0;
    let cost: Vec<Vec<f64>> = rows
        .iter()
        .map(|a| {
            cols.iter()
                .map(|b| {
                    let d = a.distance(b);
                    if d <= threshold_m {
                        d
                    } else {
                        big
                    }
                })
                .collect()
        })
        .collect();
    let assign = hungarian(&cost, cols.len());
    let mut pairs: Vec<MatchedPair> = assign
        .iter()
        .enumerate()
        .filter_map(|(r, &c)| {
            let d = rows[r].distance(&cols[c]);
            (d <= threshold_m).then(|| {
                let (det, gt) = if transpose { (c, r) } else { (r, c) };
                MatchedPair { det, gt, distance: d }
            })
        })
        .collect();
    pairs.sort_by_key(|p| p.det);
    let tp = pairs.len();
    Ok(FrameMatch {
        pairs,
        false_positives: dets.len() - tp,
        false_negatives: gts.len() - tp,
        ignored: 0,
    })
}

/// [`match_detections`], then drops from the false positives every unmatched
/// detection within `threshold_m` of a don't-care point (for example a person
/// an augmentation moved just off the grid, whose heat still reaches it).
pub fn match_detections_with_ignore(dets: &[Point2], gts: &[Point2], ignore: &[Point2], threshold_m: f64) -> Result<FrameMatch> {
    let mut m = match_detections(dets, gts, threshold_m)?;
    if ignore.is_empty() {
        return Ok(m);
    }
    let mut matched = vec![false; dets.len()];
    for p in &m.pairs {
        matched[p.det] = true;
    }
    let excused = dets
        .iter()
        .zip(&matched)
        .filter(|(d, &hit)| !hit && ignore.iter().any(|g| g.distance(d) <= threshold_m))
        .count();
    m.false_positives -= excused;
    m.ignored = excused;
    Ok(m)
}

/// Aggregates frame matches. Empty denominators: precision 1 when nothing was
/// detected, recall 1 without ground truth, MODP 0 without matches, and MODA
/// `1 − FP` without ground truth.
pub fn compute_metrics(frames: &[FrameMatch], threshold_m: f64) -> Result<MetricsReport> {
    if frames.is_empty() {
        return Err(Error::InvalidArgument("metrics need at least one frame".into()));
    }
    if !(threshold_m > 0.0) {
        return Err(Error::InvalidArgument("match threshold must be positive".into()));
    }
    let tp: usize = frames.iter().map(|f| f.pairs.len()).sum();
    let fp: usize = frames.iter().map(|f| f.false_positives).sum();
    let fn_: usize = frames.iter().map(|f| f.false_negatives).sum();
    let gt = tp + fn_;
    let quality: f64 = frames
        .iter()
        .flat_map(|f| &f.pairs)
        .map(|p| 1.0 - p.distance / threshold_m)
        .sum();
    // without ground truth the denominator is taken as 1 so the value stays finite
    let moda = 1.0 - (fn_ + fp) as f64 / gt.max(1) as f64;
    Ok(MetricsReport {
        moda,
        modp: if tp == 0 { 0.0 } else { quality / tp as f64 },
        precision: if tp + fp == 0 { 1.0 } else { tp as f64 / (tp + fp) as f64 },
        recall: if gt == 0 { 1.0 } else { tp as f64 / gt as f64 },
        tp,
        fp,
        fn_,
        gt,
    })
}
