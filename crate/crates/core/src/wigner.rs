//! Wigner 3j symbols of the two shapes needed by axial translations,
//! `(l1 l2 L; 0 0 0)` and `(l1 l2 L; m -m 0)`, and a cached table of their
//! products.
//!
//! The `m ≠ 0` symbols come from the Schulten–Gordon three-term recursion in
//! `L`, run inward from both ends of the allowed range and spliced where the
//! magnitudes stop growing, so every value is obtained in its stable direction.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// `ln n!` for `n` in `0..len`.
fn ln_factorials(len: usize) -> Vec<f64> {
    let mut t = vec![0.0; len.max(1)];
    for n in 1..t.len() {
        t[n] = t[n - 1] + (n as f64).ln();
    }
    t
}

/// `(l1 l2 l3; 0 0 0)` from its closed form. Zero when `l1+l2+l3` is odd or
/// the triangle condition fails.
pub fn wigner_3j_zero(l1: u32, l2: u32, l3: u32) -> f64 {
    let lnf = ln_factorials((l1 + l2 + l3 + 2) as usize);
    threej_zero_with(&lnf, l1, l2, l3)
}

fn threej_zero_with(lnf: &[f64], l1: u32, l2: u32, l3: u32) -> f64 {
    let j = l1 + l2 + l3;
    if j % 2 == 1 || l3 > l1 + l2 || l1 > l2 + l3 || l2 > l1 + l3 {
        return 0.0;
    }
    let g = j / 2;
    let f = |n: u32| lnf[n as usize];
    let ln = 0.5 * (f(j - 2 * l1) + f(j - 2 * l2) + f(j - 2 * l3) - f(j + 1)) + f(g)
        - f(g - l1)
        - f(g - l2)
        - f(g - l3);
    let sign = if g % 2 == 0 { 1.0 } else { -1.0 };
    sign * ln.exp()
}

/// All `(L j2 j3; 0 m -m)` for `L` in `|j2-j3|..=j2+j3`, which equal
/// `(j2 j3 L; m -m 0)`. Index 0 corresponds to `L = |j2-j3|`.
pub fn wigner_3j_m_sequence(j2: u32, j3: u32, m: i32) -> Vec<f64> {
    let jmin = j2.abs_diff(j3);
    let jmax = j2 + j3;
    let n = (jmax - jmin + 1) as usize;
    if m.unsigned_abs() > j2.min(j3) {
        return vec![0.0; n];
    }
    if m == 0 {
        // the recursion degenerates (B = 0); the closed form is exact
        let lnf = ln_factorials((2 * jmax + 2) as usize);
        return (jmin..=jmax).map(|l| threej_zero_with(&lnf, j2, j3, l)).collect();
    }
    if n == 1 {
        let sign = if (j2 + j3) % 2 == 0 { 1.0 } else { -1.0 };
        // j2 - j3 has the parity of j2 + j3
        return vec![sign / ((2 * jmin + 1) as f64).sqrt()];
    }

    let (a2, a3, mf) = (j2 as f64, j3 as f64, m as f64);
    // Schulten–Gordon coefficients specialised to m1 = 0, m2 = m, m3 = -m.
    let big_a = |j: f64| -> f64 {
        let t = (j * j - (a2 - a3) * (a2 - a3)) * ((a2 + a3 + 1.0) * (a2 + a3 + 1.0) - j * j);
        j * t.max(0.0).sqrt()
    };
    let big_b = |j: f64| -> f64 { -2.0 * mf * (2.0 * j + 1.0) * j * (j + 1.0) };

    const RESCALE: f64 = 1e150;

    // backward sweep from jmax while magnitudes grow
    let mut bwd = vec![0.0; n];
    bwd[n - 1] = 1.0;
    let jb;
    {
        let j = jmax as f64;
        bwd[n - 2] = -big_b(j) * bwd[n - 1] / ((j + 1.0) * big_a(j));
        let mut k = n - 2;
        if bwd[k].abs() < bwd[k + 1].abs() {
            jb = k + 1;
        } else {
            loop {
                if k == 0 {
                    jb = 0;
                    break;
                }
                let j = (jmin as usize + k) as f64;
                let v = -(big_b(j) * bwd[k] + j * big_a(j + 1.0) * bwd[k + 1]) / ((j + 1.0) * big_a(j));
                bwd[k - 1] = v;
                if v.abs() > RESCALE {
                    for x in bwd[k - 1..].iter_mut() {
                        *x /= RESCALE;
                    }
                }
                k -= 1;
                if bwd[k].abs() < bwd[k + 1].abs() {
                    jb = k + 1;
                    break;
                }
            }
        }
    }

    // forward sweep from jmin while magnitudes grow, then on to the splice point
    let mut fwd = vec![0.0; n];
    fwd[0] = 1.0;
    fwd[1] = if jmin == 0 {
        mf / (a2 * (a2 + 1.0)).sqrt()
    } else {
        let j = jmin as f64;
        -big_b(j) * fwd[0] / (j * big_a(j + 1.0))
    };
    let mut jf = None;
    if fwd[1].abs() < fwd[0].abs() {
        jf = Some(0);
    }
    let mut k = 1;
    let limit = |jf: Option<usize>| jf.map_or(n - 1, |f: usize| f.max(jb) + 1).min(n - 1);
    while k < limit(jf) {
        let j = (jmin as usize + k) as f64;
        let v = -(big_b(j) * fwd[k] + (j + 1.0) * big_a(j) * fwd[k - 1]) / (j * big_a(j + 1.0));
        fwd[k + 1] = v;
        if v.abs() > RESCALE {
            for x in fwd[..=k + 1].iter_mut() {
                *x /= RESCALE;
            }
        }
        if jf.is_none() && fwd[k + 1].abs() < fwd[k].abs() {
            jf = Some(k);
        }
        k += 1;
    }
    let p = jf.unwrap_or(n - 1).max(jb);

    // least-squares match of the two solutions on the points around p
    let lo = p.saturating_sub(1);
    let hi = (p + 1).min(n - 1).min(k);
    let (mut num, mut den) = (0.0, 0.0);
    for i in lo..=hi {
        num += fwd[i] * bwd[i];
        den += fwd[i] * fwd[i];
    }
    let scale = if den > 0.0 { num / den } else { 1.0 };
    let mut f: Vec<f64> = (0..n).map(|i| if i < p { fwd[i] * scale } else { bwd[i] }).collect();

    let norm: f64 = f
        .iter()
        .enumerate()
        .map(|(i, v)| (2.0 * (jmin as usize + i) as f64 + 1.0) * v * v)
        .sum::<f64>()
        .sqrt();
    let want_positive = (j2 + j3) % 2 == 0;
    let sign = if (f[n - 1] > 0.0) == want_positive { 1.0 } else { -1.0 };
    for v in f.iter_mut() {
        *v *= sign / norm;
    }
    f
}

/// Coefficients of the scalar axial addition theorem,
/// `(-1)^m √((2s+1)(2t+1)) (2L+1) (s t L; 0 0 0)(s t L; m -m 0)`,
/// tabulated for `0 ≤ m ≤ s, t ≤ n_max` and every `L` with `s+t+L` even.
#[derive(Debug)]
pub struct GauntTable {
    n_max: u32,
    offsets: Vec<usize>,
    coeffs: Vec<f64>,
}

impl GauntTable {
    pub fn new(n_max: u32) -> Self {
        let dim = (n_max + 1) as usize;
        let lnf = ln_factorials((4 * n_max + 4) as usize);
        let mut offsets = vec![0usize; dim * dim * dim + 1];
        let mut coeffs = Vec::new();
        for m in 0..=n_max {
            for s in 0..=n_max {
                for t in 0..=n_max {
                    let idx = (m as usize * dim + s as usize) * dim + t as usize;
                    offsets[idx] = coeffs.len();
                    if s < m || t < m {
                        continue;
                    }
                    let seq = wigner_3j_m_sequence(s, t, m as i32);
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    let pre = sign * (((2 * s + 1) * (2 * t + 1)) as f64).sqrt();
                    let lmin = s.abs_diff(t);
                    for l in (lmin..=s + t).step_by(2) {
                        let z = threej_zero_with(&lnf, s, t, l);
                        coeffs.push(pre * (2 * l + 1) as f64 * z * seq[(l - lmin) as usize]);
                    }
                }
            }
        }
        offsets[dim * dim * dim] = coeffs.len();
        Self {
            n_max,
            offsets,
            coeffs,
        }
    }

    /// Process-wide table covering at least `n_max`, built on first use.
    pub fn shared(n_max: u32) -> Arc<GauntTable> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<GauntTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(t) = guard.iter().filter(|(k, _)| **k >= n_max).min_by_key(|(k, _)| **k) {
            return Arc::clone(t.1);
        }
        let table = Arc::new(GauntTable::new(n_max));
        guard.insert(n_max, Arc::clone(&table));
        table
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    /// Coefficients for `L = |s-t|, |s-t|+2, …, s+t`. Empty when `m > min(s, t)`.
    #[inline]
    pub fn terms(&self, m: u32, s: u32, t: u32) -> &[f64] {
        debug_assert!(m <= self.n_max && s <= self.n_max && t <= self.n_max);
        let dim = (self.n_max + 1) as usize;
        let idx = (m as usize * dim + s as usize) * dim + t as usize;
        &self.coeffs[self.offsets[idx]..self.offsets[idx + 1]]
    }
}
