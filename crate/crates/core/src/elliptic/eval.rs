//! Series/duplication evaluation core.
//!
//! Everything is computed from the Laurent expansion about the origin,
//!
//!   p(z)    = 1/z^2 + sum_{k>=2} c_k z^(2k-2),
//!   zeta(z) = 1/z   - sum_{k>=2} c_k z^(2k-1)/(2k-1),
//!   sigma(z)= z exp(- sum_{k>=2} c_k z^(2k) / ((2k-1) 2k)),
//!
//! with c_2 = g2/20, c_3 = g3/28 and the standard quadratic recurrence for
//! k >= 4. Arguments outside the series-accuracy radius are halved until
//! they fit and lifted back with the duplication formulas
//!
//!   p(2z)     = t^2/4 - 2 p,            t = p''/p',  p'' = 6 p^2 - g2/2,
//!   p'(2z)    = t (12 p - t^2)/4 - p',
//!   zeta(2z)  = 2 zeta + t/2,
//!   sigma(2z) = -p' sigma^4.

use num_complex::Complex64;

/// Number of stored Laurent coefficients c_2..c_(SERIES_TERMS+1).
pub const SERIES_TERMS: usize = 24;

/// Fraction of the shortest lattice vector accepted as series argument.
pub const SERIES_RADIUS_FACTOR: f64 = 0.4;

/// Joint values of the Weierstrass quartet at one point.
#[derive(Debug, Clone, Copy)]
pub struct Quartet {
    pub p: Complex64,
    pub p_prime: Complex64,
    pub zeta: Complex64,
    pub sigma: Complex64,
}

/// Laurent coefficients c_2..c_(SERIES_TERMS+1) from the invariants.
pub fn laurent_coefficients(g2: Complex64, g3: Complex64) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); SERIES_TERMS + 2]; // index by k
    c[2] = g2 / 20.0;
    c[3] = g3 / 28.0;
    for k in 4..=SERIES_TERMS + 1 {
        let mut s = Complex64::new(0.0, 0.0);
        for m in 2..=k - 2 {
            s += c[m] * c[k - m];
        }
        c[k] = s * (3.0 / ((2 * k + 1) as f64 * (k - 3) as f64));
    }
    c
}

/// Series evaluation; valid for |z| within the accuracy radius, z != 0.
pub fn eval_series(z: Complex64, c: &[Complex64]) -> Quartet {
    let w = z * z;
    // S_a = sum c_k w^(k-2), S_b = sum (2k-2) c_k w^(k-2),
    // S_c = sum c_k w^(k-2)/(2k-1), S_d = sum c_k w^(k-2)/((2k-1) 2k).
    let mut sa = Complex64::new(0.0, 0.0);
    let mut sb = sa;
    let mut sc = sa;
    let mut sd = sa;
    for k in (2..c.len()).rev() {
        let ck = c[k];
        sa = sa * w + ck;
        sb = sb * w + ck * (2 * k - 2) as f64;
        sc = sc * w + ck / (2 * k - 1) as f64;
        sd = sd * w + ck / ((2 * k - 1) as f64 * (2 * k) as f64);
    }
    Quartet {
        p: 1.0 / w + w * sa,
        p_prime: -2.0 / (w * z) + z * sb,
        zeta: 1.0 / z - w * z * sc,
        sigma: z * (-w * w * sd).exp(),
    }
}

/// Evaluate at arbitrary z (not on the lattice) by halving into the series
/// radius and lifting with the duplication formulas.
pub fn eval_ladder(z: Complex64, c: &[Complex64], g2: Complex64, radius: f64) -> Quartet {
    let mut halvings = 0u32;
    let mut base = z;
    while base.norm() > radius && halvings < 48 {
        base *= 0.5;
        halvings += 1;
    }
    let mut q = eval_series(base, c);
    for _ in 0..halvings {
        let pp2 = 6.0 * q.p * q.p - 0.5 * g2;
        let t = pp2 / q.p_prime;
        let p_new = 0.25 * t * t - 2.0 * q.p;
        let pprime_new = 0.25 * t * (12.0 * q.p - t * t) - q.p_prime;
        let zeta_new = 2.0 * q.zeta + 0.5 * t;
        let sigma_new = -q.p_prime * q.sigma * q.sigma * q.sigma * q.sigma;
        q = Quartet {
            p: p_new,
            p_prime: pprime_new,
            zeta: zeta_new,
            sigma: sigma_new,
        };
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_recurrence_start() {
        let c = laurent_coefficients(Complex64::new(4.0, 0.0), Complex64::new(0.0, 0.0));
        assert_eq!(c[2], Complex64::new(0.2, 0.0));
        assert_eq!(c[3], Complex64::new(0.0, 0.0));
        // c_4 = c_2^2 / 3
        assert!((c[4] - Complex64::new(0.2 * 0.2 / 3.0, 0.0)).norm() < 1e-18);
    }

    #[test]
    fn series_leading_behaviour() {
        let c = laurent_coefficients(Complex64::new(4.0, 0.0), Complex64::new(2.0, 0.0));
        let z = Complex64::new(1e-4, 0.0);
        let q = eval_series(z, &c);
        assert!((q.p - 1.0 / (z * z)).norm() < 1e-6);
        assert!((q.p_prime + 2.0 / (z * z * z)).norm() < 1e-2);
        assert!((q.zeta - 1.0 / z).norm() < 1e-9);
        assert!((q.sigma / z - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
