//! Independent re-implementations used as test oracles. None of these call
//! into the library's numeric code.

pub type M3 = [[f64; 3]; 3];

pub fn mul3(a: &M3, b: &M3) -> M3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(m: &M3) -> Option<M3> {
    let mut a = [[0.0_f64; 6]; 3];
    for i in 0..3 {
        a[i][..3].copy_from_slice(&m[i]);
        a[i][3 + i] = 1.0;
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for r in 0..3 {
            if r != col {
                let f = a[r][col];
                let row = a[col];
                for (v, pv) in a[r].iter_mut().zip(row) {
                    *v -= f * pv;
                }
            }
        }
    }
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        inv[i].copy_from_slice(&a[i][3..]);
    }
    Some(inv)
}

/// Homogeneous point mapping with explicit division.
pub fn map_raw(m: &M3, p: (f64, f64)) -> (f64, f64) {
    let x = m[0][0] * p.0 + m[0][1] * p.1 + m[0][2];
    let y = m[1][0] * p.0 + m[1][1] * p.1 + m[1][2];
    let w = m[2][0] * p.0 + m[2][1] * p.1 + m[2][2];
    (x / w, y / w)
}

/// Full pinhole projection `K · [R | t] · (X, Y, Z, 1)`.
pub fn project_3x4(k: &M3, r: &M3, t: &[f64; 3], p: [f64; 4]) -> Option<(f64, f64)> {
    let mut rt = [[0.0_f64; 4]; 3];
    for i in 0..3 {
        rt[i][..3].copy_from_slice(&r[i]);
        rt[i][3] = t[i];
    }
    let mut proj = [[0.0_f64; 4]; 3];
    for i in 0..3 {
        for j in 0..4 {
            proj[i][j] = (0..3).map(|l| k[i][l] * rt[l][j]).sum();
        }
    }
    let h: Vec<f64> = (0..3).map(|i| (0..4).map(|j| proj[i][j] * p[j]).sum()).collect();
    (h[2].abs() > 1e-12).then(|| (h[0] / h[2], h[1] / h[2]))
}

type Quat = [f64; 4];

fn qmul(a: Quat, b: Quat) -> Quat {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

/// Rotation matrix of an axis-angle vector, built by rotating the basis
/// vectors with `q · v · q*`.
pub fn quaternion_rotation(r: [f64; 3]) -> M3 {
    let theta = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let q = if theta < 1e-15 {
        [1.0, 0.0, 0.0, 0.0]
    } else {
        let s = (theta / 2.0).sin() / theta;
        [(theta / 2.0).cos(), r[0] * s, r[1] * s, r[2] * s]
    };
    let conj = [q[0], -q[1], -q[2], -q[3]];
    let mut m = [[0.0; 3]; 3];
    for (j, e) in [[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]].into_iter().enumerate() {
        let v = qmul(qmul(q, e), conj);
        for i in 0..3 {
            m[i][j] = v[i + 1];
        }
    }
    m
}

/// Exhaustive matching: every det is either unmatched or paired with a
/// distinct admissible gt. Best = most pairs, then least total distance.
/// Returns `(pairs, total)`.
pub fn brute_force_match(dets: &[(f64, f64)], gts: &[(f64, f64)], thr: f64) -> (usize, f64) {
    fn go(i: usize, dets: &[(f64, f64)], gts: &[(f64, f64)], thr: f64, used: &mut Vec<bool>, acc: (usize, f64), best: &mut (usize, f64)) {
        if i == dets.len() {
            if acc.0 > best.0 || (acc.0 == best.0 && acc.1 < best.1) {
                *best = acc;
            }
            return;
        }
        go(i + 1, dets, gts, thr, used, acc, best);
        for j in 0..gts.len() {
            let d = ((dets[i].0 - gts[j].0).powi(2) + (dets[i].1 - gts[j].1).powi(2)).sqrt();
            if !used[j] && d <= thr {
                used[j] = true;
                go(i + 1, dets, gts, thr, used, (acc.0 + 1, acc.1 + d), best);
                used[j] = false;
            }
        }
    }
    let mut best = (0, 0.0);
    go(0, dets, gts, thr, &mut vec![false; gts.len()], (0, 0.0), &mut best);
    best
}

/// Upper part of the contiguous split of sorted scores with least total
/// within-cluster squared error.
pub fn best_two_partition_upper(scores: &[f64]) -> Vec<f64> {
    let mut s = scores.to_vec();
    s.sort_by(f64::total_cmp);
    let sse = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
    };
    let k = (1..s.len())
        .min_by(|&a, &b| (sse(&s[..a]) + sse(&s[a..])).total_cmp(&(sse(&s[..b]) + sse(&s[b..]))))
        .expect("at least two scores");
    s[k..].to_vec()
}

/// Textbook four-term bilinear blend on a row-major single-channel raster.
/// Only valid strictly inside `[0, w−1) × [0, h−1)`.
pub fn bilinear_formula(data: &[f32], w: usize, x: f64, y: f64) -> f64 {
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let at = |xx: usize, yy: usize| data[yy * w + xx] as f64;
    (1.0 - fx) * (1.0 - fy) * at(x0, y0) + fx * (1.0 - fy) * at(x0 + 1, y0) + (1.0 - fx) * fy * at(x0, y0 + 1) + fx * fy * at(x0 + 1, y0 + 1)
}

/// Per-cell loop: mean of the valid contributors, 0 where none is valid.
pub fn naive_mean(maps: &[Vec<f32>], masks: &[Vec<bool>]) -> Vec<f64> {
    let n = maps[0].len();
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut sum = 0.0;
        let mut count = 0;
        for (m, k) in maps.iter().zip(masks) {
            if k[i] {
                sum += m[i] as f64;
                count += 1;
            }
        }
        if count > 0 {
            *o = sum / count as f64;
        }
    }
    out
}

pub fn naive_mse(a: &[f32], b: &[f32]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        let d = a[i] as f64 - b[i] as f64;
        s += d * d;
    }
    s / a.len() as f64
}

/// Columns moved right by `dx` with zero fill on the left.
pub fn shift_columns(data: &[f32], w: usize, h: usize, dx: usize) -> Vec<f32> {
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in dx..w {
            out[y * w + x] = data[y * w + x - dx];
        }
    }
    out
}

pub fn reverse_columns(data: &[f32], w: usize, h: usize) -> Vec<f32> {
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = data[y * w + (w - 1 - x)];
        }
    }
    out
}

/// Exact rational `p / q` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio(pub i64, pub i64);

impl Ratio {
    pub fn new(p: i64, q: i64) -> Self {
        fn gcd(a: i64, b: i64) -> i64 {
            if b == 0 {
                a.abs()
            } else {
                gcd(b, a % b)
            }
        }
        let g = gcd(p, q).max(1);
        let s = if q < 0 { -1 } else { 1 };
        Ratio(s * p / g, s * q / g)
    }

    pub fn sub(self, o: Ratio) -> Ratio {
        Ratio::new(self.0 * o.1 - o.0 * self.1, self.1 * o.1)
    }

    pub fn add(self, o: Ratio) -> Ratio {
        Ratio::new(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
    }

    pub fn div_int(self, n: i64) -> Ratio {
        Ratio::new(self.0, self.1 * n)
    }

    /// Correctly rounded value.
    pub fn value(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }
}
