//! Shared test oracles, independent of the library's evaluation path:
//! a from-scratch Laurent-series p, plain Simpson quadrature, a dense
//! least-squares fitter, and a tiny deterministic RNG.

#![allow(dead_code)]

use num_complex::Complex64;

/// Laurent-series-plus-duplication oracle for p(z; g2, g3), written
/// directly from the textbook recurrence (order 30) with plain halving.
pub fn oracle_p(z: Complex64, g2: f64, g3: f64, small: f64) -> Complex64 {
    const ORDER: usize = 30;
    let mut c = [0.0f64; ORDER + 2];
    c[2] = g2 / 20.0;
    c[3] = g3 / 28.0;
    for k in 4..=ORDER + 1 {
        let mut s = 0.0;
        for m in 2..=k - 2 {
            s += c[m] * c[k - m];
        }
        c[k] = 3.0 * s / ((2 * k + 1) as f64 * (k - 3) as f64);
    }
    fn series(z: Complex64, c: &[f64]) -> (Complex64, Complex64) {
        let w = z * z;
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = p;
        for k in (2..c.len()).rev() {
            p = p * w + c[k];
            dp = dp * w + c[k] * (2 * k - 2) as f64;
        }
        (1.0 / w + w * p, -2.0 / (w * z) + z * dp)
    }
    // halve until |z| < small, then square up with the duplication formula
    let mut n = 0;
    let mut base = z;
    while base.norm() > small {
        base *= 0.5;
        n += 1;
    }
    let (mut p, mut dp) = series(base, &c);
    for _ in 0..n {
        let p2 = 6.0 * p * p - 0.5 * g2;
        let t = p2 / dp;
        let pn = 0.25 * t * t - 2.0 * p;
        let dpn = 0.25 * t * (12.0 * p - t * t) - dp;
        p = pn;
        dp = dpn;
    }
    p
}

/// Composite Simpson rule on [a, b].
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n_even: usize) -> f64 {
    let n = if n_even % 2 == 0 { n_even } else { n_even + 1 };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Least squares for V c = y via normal equations with partial pivoting.
/// Columns of V are supplied by `basis(x, j)`.
pub fn fit_least_squares<F: Fn(f64, usize) -> f64>(
    xs: &[f64],
    ys: &[f64],
    n_coeff: usize,
    basis: F,
) -> Vec<f64> {
    let mut ata = vec![vec![0.0f64; n_coeff]; n_coeff];
    let mut atb = vec![0.0f64; n_coeff];
    for (&x, &y) in xs.iter().zip(ys) {
        let row: Vec<f64> = (0..n_coeff).map(|j| basis(x, j)).collect();
        for i in 0..n_coeff {
            for j in 0..n_coeff {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * y;
        }
    }
    // gaussian elimination with partial pivoting
    for col in 0..n_coeff {
        let piv = (col..n_coeff)
            .max_by(|&a, &b| ata[a][col].abs().total_cmp(&ata[b][col].abs()))
            .unwrap();
        ata.swap(col, piv);
        atb.swap(col, piv);
        let d = ata[col][col];
        for r in col + 1..n_coeff {
            let f = ata[r][col] / d;
            for c in col..n_coeff {
                ata[r][c] -= f * ata[col][c];
            }
            atb[r] -= f * atb[col];
        }
    }
    let mut out = vec![0.0; n_coeff];
    for r in (0..n_coeff).rev() {
        let mut v = atb[r];
        for c in r + 1..n_coeff {
            v -= ata[r][c] * out[c];
        }
        out[r] = v / ata[r][r];
    }
    out
}

/// Small deterministic xorshift generator for reproducible sampling.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + u * (hi - lo)
    }
}
