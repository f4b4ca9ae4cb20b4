//! Arithmetic-geometric mean and Carlson symmetric integrals over the
//! complex field.
//!
//! Both iterations converge quadratically. The AGM drives the half-period
//! computation; Carlson's R_F evaluates the elliptic integral of the first
//! kind used to seed the inversion of p.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ITER: usize = 64;

/// Complex AGM with the "optimal" square-root branch: at each step the sign
/// of b_{n+1} = sqrt(a_n b_n) is chosen so that |a - b| <= |a + b|
/// (Im(b/a) >= 0 on ties). With this rule the iteration computes the
/// principal limit for any non-opposite starting pair.
pub fn agm(mut a: Complex64, mut b: Complex64) -> Result<Complex64> {
    for _ in 0..MAX_ITER {
        if (a - b).norm() <= 1e-16 * (a.norm() + b.norm()) {
            return Ok(0.5 * (a + b));
        }
        let an = 0.5 * (a + b);
        let mut bn = (a * b).sqrt();
        let dm = (an - bn).norm();
        let dp = (an + bn).norm();
        if dm > dp || (dm == dp && (bn / an).im < 0.0) {
            bn = -bn;
        }
        a = an;
        b = bn;
    }
    Err(Error::ConvergenceFailure {
        what: "complex AGM",
        iterations: MAX_ITER,
    })
}

/// Carlson's symmetric elliptic integral R_F(x, y, z), complex arguments
/// (at most one zero, none on the negative real axis).
///
/// R_F(x,y,z) = (1/2) Int_0^inf dt / sqrt((t+x)(t+y)(t+z)), principal
/// branches throughout.
pub fn carlson_rf(x: Complex64, y: Complex64, z: Complex64) -> Result<Complex64> {
    let a0 = (x + y + z) / 3.0;
    let q = (3.0 * 1e-16_f64).powf(-1.0 / 6.0)
        * (a0 - x).norm().max((a0 - y).norm()).max((a0 - z).norm());
    let (mut xt, mut yt, mut zt, mut am) = (x, y, z, a0);
    let mut scale = 1.0_f64;
    for _ in 0..MAX_ITER {
        if scale * q < am.norm() {
            // X = (A0 - x)/(4^m Am); scale tracks 4^-m, so X = (A0 - x) scale / Am.
            let xx = (a0 - x) * scale / am;
            let yy = (a0 - y) * scale / am;
            let zz = -(xx + yy);
            let e2 = xx * yy - zz * zz;
            let e3 = xx * yy * zz;
            let s = 1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 / 44.0 * e2 * e3;
            return Ok(s / am.sqrt());
        }
        let sx = xt.sqrt();
        let sy = yt.sqrt();
        let sz = zt.sqrt();
        let lam = sx * sy + sy * sz + sz * sx;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        am = 0.25 * (am + lam);
        scale *= 0.25;
    }
    Err(Error::ConvergenceFailure {
        what: "Carlson R_F",
        iterations: MAX_ITER,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn agm_real_pair() {
        // AGM(1, sqrt(2)) = classical Gauss constant context: pi/(2 AGM) is
        // the lemniscatic half-period 1.31102877714605990523242...
        let m = agm(c(2f64.sqrt(), 0.0), c(1.0, 0.0)).unwrap();
        let om = std::f64::consts::PI / (2.0 * m.re);
        assert!((om - 1.311_028_777_146_059_9).abs() < 1e-14);
        assert!(m.im.abs() < 1e-16);
    }

    #[test]
    fn agm_is_symmetric_and_homogeneous() {
        let a = c(1.3, 0.4);
        let b = c(0.7, -0.2);
        let m1 = agm(a, b).unwrap();
        let m2 = agm(b, a).unwrap();
        assert!((m1 - m2).norm() < 1e-14);
        let lam = c(0.0, 2.0);
        let m3 = agm(lam * a, lam * b).unwrap();
        assert!((m3 - lam * m1).norm() < 1e-13 * m3.norm());
    }

    #[test]
    fn rf_agm_identity() {
        // R_F(0, x^2, y^2) = pi / (2 AGM(x, y))
        let x = c(1.1, 0.3);
        let y = c(0.8, -0.1);
        let rf = carlson_rf(c(0.0, 0.0), x * x, y * y).unwrap();
        let m = agm(x, y).unwrap();
        let expect = std::f64::consts::PI / 2.0 / m;
        assert!((rf - expect).norm() < 1e-12 * rf.norm(), "{rf} vs {expect}");
    }

    #[test]
    fn rf_reference_value() {
        // R_F(1, 2, 4) via its defining integral (computed once with a
        // high-precision quadrature): 0.6850858166334359...
        let v = carlson_rf(c(1.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)).unwrap();
        assert!((v.re - 0.685_085_816_633_435_9).abs() < 1e-13, "{v}");
        assert!(v.im.abs() < 1e-15);
    }
}
