//! Weierstrass elliptic functions parameterized by the invariants (g2, g3):
//! p, p', zeta, sigma, lattice/period data, and inversion of p.
//!
//! Strategy: arguments are reduced modulo the period lattice to a
//! minimal-norm representative, evaluated by truncated Laurent series
//! around the origin, and lifted with duplication formulas when the
//! reduced argument exceeds the series-accuracy radius. Half-periods come
//! from AGM iteration on the cubic roots; quasi-period increments from a
//! zeta duplication ladder. Everything is complex: the uniformization
//! parameter of the chain can be complex even for real chain data.

mod agm;
mod eval;

pub use agm::carlson_rf;
pub use eval::{Quartet, SERIES_TERMS};

use num_complex::Complex64;

use crate::error::{Error, Result};
use agm::agm;
use eval::{eval_ladder, eval_series, laurent_coefficients, SERIES_RADIUS_FACTOR};

/// Calls with a reduced argument closer to the lattice than this error out
/// instead of returning huge values; callers handle poles explicitly.
pub const POLE_EXCLUSION_RADIUS: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The pair (g2, g3) defining a Weierstrass lattice, with its modular
/// discriminant Delta = g2^3 - 27 g3^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticInvariants {
    g2: Complex64,
    g3: Complex64,
    discriminant: Complex64,
}

impl EllipticInvariants {
    pub fn new(g2: Complex64, g3: Complex64) -> Self {
        let discriminant = g2 * g2 * g2 - 27.0 * g3 * g3;
        EllipticInvariants { g2, g3, discriminant }
    }

    pub fn from_real(g2: f64, g3: f64) -> Self {
        Self::new(Complex64::new(g2, 0.0), Complex64::new(g3, 0.0))
    }

    pub fn g2(&self) -> Complex64 {
        self.g2
    }

    pub fn g3(&self) -> Complex64 {
        self.g3
    }

    pub fn discriminant(&self) -> Complex64 {
        self.discriminant
    }

    /// |Delta| at or below this collapses the lattice.
    pub fn degeneracy_threshold(&self) -> f64 {
        1e-14 * self.g2.norm().powi(3).max(self.g3.norm().powi(2))
    }

    pub fn is_degenerate(&self) -> bool {
        self.discriminant.norm() <= self.degeneracy_threshold()
    }
}

/// Period lattice data and the cached evaluation machinery: cubic roots,
/// half-periods (omega1, omega3), quasi-period increments (eta1, eta3),
/// Laurent coefficients and an internally Gauss-reduced basis.
#[derive(Debug, Clone)]
pub struct Lattice {
    inv: EllipticInvariants,
    roots: [Complex64; 3],
    omega1: Complex64,
    omega3: Complex64,
    eta1: Complex64,
    eta3: Complex64,
    coeffs: Vec<Complex64>,
    /// Reduced basis; v_i = u[i][0] * 2 omega1 + u[i][1] * 2 omega3.
    v1: Complex64,
    v2: Complex64,
    u: [[i64; 2]; 2],
    radius: f64,
}

impl Lattice {
    /// Builds the lattice for non-degenerate invariants.
    ///
    /// Roots are sorted by descending real part, then descending imaginary
    /// part. omega1 is the most nearly real half-period (normalized to
    /// Re >= 0), omega3 is chosen transversal with Im(omega3/omega1) > 0.
    /// The construction validates p(omega_j) = e_j and the Legendre
    /// relation before returning.
    pub fn from_invariants(inv: &EllipticInvariants) -> Result<Lattice> {
        if inv.is_degenerate() {
            return Err(Error::DegenerateLattice {
                disc_abs: inv.discriminant.norm(),
                threshold: inv.degeneracy_threshold(),
            });
        }
        let roots = cubic_roots(inv.g2, inv.g3);
        let coeffs = laurent_coefficients(inv.g2, inv.g3);

        // One half-period candidate per root: omega(e_j) = pi / (2 M_j),
        // M_j = AGM(sqrt(e_j - e_k), sqrt(e_j - e_l)).
        let mut cands: Vec<(usize, Complex64)> = Vec::with_capacity(3);
        for j in 0..3 {
            let (k, l) = ((j + 1) % 3, (j + 2) % 3);
            let m = agm((roots[j] - roots[k]).sqrt(), (roots[j] - roots[l]).sqrt())?;
            let w = normalize_sign(Complex64::new(std::f64::consts::PI, 0.0) / (2.0 * m));
            cands.push((j, w));
        }

        // omega1: the candidate pointing closest to the positive real axis.
        let score = |w: &Complex64| w.re / w.norm();
        let i1 = (0..3)
            .max_by(|&a, &b| score(&cands[a].1).total_cmp(&score(&cands[b].1)))
            .unwrap();
        let (j1, omega1) = cands[i1];

        // Remaining candidates ordered by transversality to omega1; ties
        // broken towards the most orthogonal one (rectangular lattices
        // then get the conventional imaginary omega3).
        let mut rest: Vec<(usize, Complex64)> =
            cands.into_iter().filter(|&(j, _)| j != j1).collect();
        rest.sort_by(|a, b| {
            let ra = a.1 / omega1;
            let rb = b.1 / omega1;
            rb.im.abs()
                .total_cmp(&ra.im.abs())
                .then(ra.re.abs().total_cmp(&rb.re.abs()))
        });

        let mut last_err = Error::ConvergenceFailure {
            what: "lattice construction",
            iterations: 0,
        };
        for &(j3, w3) in &rest {
            let tau_im = (w3 / omega1).im;
            if tau_im.abs() < 1e-10 {
                continue; // collinear with omega1
            }
            let omega3 = if tau_im > 0.0 { w3 } else { -w3 };
            match Self::assemble(inv, roots, &coeffs, omega1, j1, omega3, j3) {
                Ok(lat) => return Ok(lat),
                Err(e) => last_err = e,
            }
        }
        Err(last_err)
    }

    fn assemble(
        inv: &EllipticInvariants,
        roots: [Complex64; 3],
        coeffs: &[Complex64],
        omega1: Complex64,
        j1: usize,
        omega3: Complex64,
        j3: usize,
    ) -> Result<Lattice> {
        let (v1, v2, u) = gauss_reduce(2.0 * omega1, 2.0 * omega3);
        let radius = SERIES_RADIUS_FACTOR * v1.norm();
        let eta1 = eval_ladder(omega1, coeffs, inv.g2, radius).zeta;
        let eta3 = eval_ladder(omega3, coeffs, inv.g2, radius).zeta;

        let legendre = eta1 * omega3 - eta3 * omega1 - I * std::f64::consts::FRAC_PI_2;
        if legendre.norm() > 1e-10 {
            return Err(Error::ConvergenceFailure {
                what: "Legendre validation",
                iterations: 0,
            });
        }

        let lat = Lattice {
            inv: *inv,
            roots,
            omega1,
            omega3,
            eta1,
            eta3,
            coeffs: coeffs.to_vec(),
            v1,
            v2,
            u,
            radius,
        };

        // Half-periods must sit over their own roots.
        for (om, j) in [(omega1, j1), (omega3, j3)] {
            let val = lat.p(om)?;
            let scale = 1.0_f64.max(roots[j].norm());
            if (val - roots[j]).norm() > 1e-8 * scale {
                return Err(Error::ConvergenceFailure {
                    what: "half-period root validation",
                    iterations: 0,
                });
            }
        }
        Ok(lat)
    }

    pub fn invariants(&self) -> &EllipticInvariants {
        &self.inv
    }

    /// Roots e1, e2, e3 of 4t^3 - g2 t - g3, in the documented order.
    pub fn roots(&self) -> [Complex64; 3] {
        self.roots
    }

    pub fn omega1(&self) -> Complex64 {
        self.omega1
    }

    pub fn omega3(&self) -> Complex64 {
        self.omega3
    }

    pub fn eta1(&self) -> Complex64 {
        self.eta1
    }

    pub fn eta3(&self) -> Complex64 {
        self.eta3
    }

    /// Length of the shortest nonzero lattice vector.
    pub fn shortest_vector(&self) -> f64 {
        self.v1.norm()
    }

    /// Gauss-reduced basis of the period lattice.
    pub fn reduced_basis(&self) -> (Complex64, Complex64) {
        (self.v1, self.v2)
    }

    /// Minimal-norm representative of z modulo the lattice, together with
    /// the integer shift in the (2 omega1, 2 omega3) basis: the return
    /// (zr, m, n) satisfies z = zr + 2m omega1 + 2n omega3.
    pub fn reduce(&self, z: Complex64) -> (Complex64, i64, i64) {
        let det = self.v1.re * self.v2.im - self.v1.im * self.v2.re;
        let alpha = (z.re * self.v2.im - z.im * self.v2.re) / det;
        let beta = (self.v1.re * z.im - self.v1.im * z.re) / det;
        let (k0, l0) = (alpha.round(), beta.round());
        let mut best = (f64::INFINITY, 0i64, 0i64);
        for dk in -1..=1 {
            for dl in -1..=1 {
                let k = k0 + dk as f64;
                let l = l0 + dl as f64;
                let r = z - k * self.v1 - l * self.v2;
                let n = r.norm();
                if n < best.0 {
                    best = (n, k as i64, l as i64);
                }
            }
        }
        let (_, k, l) = best;
        let zr = z - k as f64 * self.v1 - l as f64 * self.v2;
        let m = k * self.u[0][0] + l * self.u[1][0];
        let n = k * self.u[0][1] + l * self.u[1][1];
        (zr, m, n)
    }

    /// Distance from z to the nearest lattice point.
    pub fn distance_to_lattice(&self, z: Complex64) -> f64 {
        self.reduce(z).0.norm()
    }

    fn quartet_at(&self, z: Complex64) -> Result<(Quartet, i64, i64)> {
        let (zr, m, n) = self.reduce(z);
        let dist = zr.norm();
        if dist < POLE_EXCLUSION_RADIUS {
            return Err(Error::PoleProximity { dist });
        }
        Ok((eval_ladder(zr, &self.coeffs, self.inv.g2, self.radius), m, n))
    }

    /// p(z; g2, g3).
    pub fn p(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.quartet_at(z)?.0.p)
    }

    /// p'(z; g2, g3).
    pub fn p_prime(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.quartet_at(z)?.0.p_prime)
    }

    /// p''(z) = 6 p(z)^2 - g2/2.
    pub fn p_second(&self, z: Complex64) -> Result<Complex64> {
        let p = self.p(z)?;
        Ok(6.0 * p * p - 0.5 * self.inv.g2)
    }

    /// zeta(z; g2, g3); quasi-periodic with increments 2 eta1, 2 eta3.
    pub fn zeta(&self, z: Complex64) -> Result<Complex64> {
        let (q, m, n) = self.quartet_at(z)?;
        Ok(q.zeta + 2.0 * m as f64 * self.eta1 + 2.0 * n as f64 * self.eta3)
    }

    /// sigma(z; g2, g3). Entire, with simple zeros on the lattice; errors
    /// only when the quasi-period exponential overflows f64.
    pub fn sigma(&self, z: Complex64) -> Result<Complex64> {
        let (zr, m, n) = self.reduce(z);
        let (mf, nf) = (m as f64, n as f64);
        let quasi = 2.0 * mf * self.eta1 + 2.0 * nf * self.eta3;
        let expo = quasi * (zr + mf * self.omega1 + nf * self.omega3);
        if expo.re > 705.0 {
            return Err(Error::RangeOverflow { exponent: expo.re });
        }
        let sign = if (m + n + m * n).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        let base = if zr.norm() < POLE_EXCLUSION_RADIUS {
            zr // sigma(z) = z + O(z^5) at its zero
        } else {
            eval_ladder(zr, &self.coeffs, self.inv.g2, self.radius).sigma
        };
        Ok(sign * base * expo.exp())
    }

    /// Inverse of p: a z in the fundamental domain with p(z) = w, to 1e-10
    /// relative. Branch fixed deterministically: the minimal-norm
    /// representative with Re(z) >= 0, and Im(z) >= 0 when Re(z) = 0.
    /// Seeded from the elliptic integral of the first kind
    /// R_F(w - e1, w - e2, w - e3) and polished by Newton iteration.
    pub fn invert_p(&self, w: Complex64) -> Result<Complex64> {
        let scale = 1.0_f64.max(w.norm());
        let args = [w - self.roots[0], w - self.roots[1], w - self.roots[2]];
        let all_neg_real = args
            .iter()
            .all(|a| a.im.abs() <= 1e-12 * (1.0 + a.norm()) && a.re < 0.0);
        let seed = if all_neg_real {
            // R_F(-x,-y,-z) = -i R_F(x,y,z) on the principal branch.
            carlson_rf(-args[0], -args[1], -args[2]).map(|r| -I * r)
        } else {
            carlson_rf(args[0], args[1], args[2])
        };

        if let Ok(z0) = seed {
            if let Some(z) = self.newton_p(z0, w, scale) {
                return self.branch_normalize(z, w, scale);
            }
        }
        // Deterministic fallback: grid over the fundamental cell.
        let grid = 24;
        let mut seeds: Vec<(f64, Complex64)> = Vec::new();
        for i in 0..grid {
            for j in 0..grid {
                let t1 = (2 * i + 1) as f64 / (2 * grid) as f64;
                let t2 = (2 * j + 1) as f64 / (2 * grid) as f64;
                let z = t1 * self.v1 + t2 * self.v2;
                if let Ok(p) = self.p(z) {
                    seeds.push(((p - w).norm(), z));
                }
            }
        }
        seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(_, z0) in seeds.iter().take(8) {
            if let Some(z) = self.newton_p(z0, w, scale) {
                return self.branch_normalize(z, w, scale);
            }
        }
        Err(Error::ConvergenceFailure {
            what: "invert_p",
            iterations: 50,
        })
    }

    fn newton_p(&self, mut z: Complex64, w: Complex64, scale: f64) -> Option<Complex64> {
        for _ in 0..50 {
            let q = match self.quartet_at(z) {
                Ok((q, _, _)) => q,
                Err(_) => {
                    // nudge off the lattice, deterministically
                    z += 1e-4 * (self.v1 + 0.37 * self.v2);
                    continue;
                }
            };
            let f = q.p - w;
            if f.norm() <= 1e-12 * scale {
                return Some(z);
            }
            if !f.norm().is_finite() {
                return None;
            }
            let step = f / q.p_prime;
            // p has double poles and p' double zeros; cap runaway steps.
            let cap = 0.5 * self.v1.norm();
            let step = if step.norm() > cap { step * (cap / step.norm()) } else { step };
            z -= step;
        }
        // accept slower (multiple-root) convergence if within tolerance
        if let Ok(p) = self.p(z) {
            if (p - w).norm() <= 1e-10 * scale {
                return Some(z);
            }
        }
        None
    }

    fn branch_normalize(&self, z: Complex64, w: Complex64, scale: f64) -> Result<Complex64> {
        let (zr, _, _) = self.reduce(z);
        let cand = if zr.re > 1e-10 * zr.norm() {
            zr
        } else if zr.re < -1e-10 * zr.norm() {
            -zr
        } else if zr.im >= 0.0 {
            zr
        } else {
            -zr
        };
        let check = self.p(cand)?;
        if (check - w).norm() > 1e-10 * scale {
            return Err(Error::ConvergenceFailure {
                what: "invert_p verification",
                iterations: 50,
            });
        }
        Ok(cand)
    }
}

fn normalize_sign(w: Complex64) -> Complex64 {
    let eps = 1e-12 * w.norm();
    if w.re > eps || (w.re.abs() <= eps && w.im >= 0.0) {
        w
    } else {
        -w
    }
}

/// Roots of 4t^3 - g2 t - g3 = 0 via Cardano with a Newton polish, sorted
/// by descending real part, then descending imaginary part.
fn cubic_roots(g2: Complex64, g3: Complex64) -> [Complex64; 3] {
    let p = -g2 / 4.0;
    let q = -g3 / 4.0;
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    let sq = disc.sqrt();
    let c1 = -half_q + sq;
    let c2 = -half_q - sq;
    let u3 = if c1.norm() >= c2.norm() { c1 } else { c2 };
    let u = u3.cbrt();
    let v = if u.norm() > 0.0 { -third_p / u } else { Complex64::new(0.0, 0.0) };
    let w = Complex64::new(-0.5, 0.5 * 3.0_f64.sqrt()); // primitive cube root of 1
    let wb = w.conj();
    let mut roots = [u + v, w * u + wb * v, wb * u + w * v];
    for r in roots.iter_mut() {
        for _ in 0..2 {
            let f = 4.0 * *r * *r * *r - g2 * *r - g3;
            let df = 12.0 * *r * *r - g2;
            if df.norm() > 1e-300 {
                *r -= f / df;
            }
        }
    }
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    roots
}

/// Gauss (Lagrange) reduction of a rank-2 lattice basis in the plane.
/// Returns (v1, v2, u) with |v1| <= |v2| and v_i = u[i][0] b1 + u[i][1] b2.
fn gauss_reduce(b1: Complex64, b2: Complex64) -> (Complex64, Complex64, [[i64; 2]; 2]) {
    let mut v1 = b1;
    let mut v2 = b2;
    let mut u = [[1i64, 0], [0, 1]];
    for _ in 0..64 {
        if v2.norm() < v1.norm() {
            std::mem::swap(&mut v1, &mut v2);
            u.swap(0, 1);
        }
        let t = ((v1.conj() * v2).re / v1.norm_sqr()).round();
        if t == 0.0 {
            break;
        }
        v2 -= t * v1;
        u[1][0] -= t as i64 * u[0][0];
        u[1][1] -= t as i64 * u[0][1];
    }
    (v1, v2, u)
}

/// Series-only evaluation at small arguments; exposed for oracle use in
/// tests (stays on the pure-Laurent code path, no reduction/duplication).
pub fn p_series_raw(z: Complex64, g2: Complex64, g3: Complex64) -> Complex64 {
    eval_series(z, &laurent_coefficients(g2, g3)).p
}
