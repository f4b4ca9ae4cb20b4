//! The periodic dressing chain as a dynamical system: right-hand sides,
//! the two first integrals of the N=3 closure, the quartic-curve
//! reduction and the uniformization parameter.

use num_complex::Complex64;

use crate::elliptic::{EllipticInvariants, Lattice};
use crate::error::{Error, Result};

/// Chain parameters: the period N and the spectral offsets mu_1..mu_N.
/// The Darboux steps alpha_i = mu_i - mu_{i+1} are derived, never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainParams {
    mu: Vec<f64>,
}

impl ChainParams {
    /// The closure condition sum(alpha_i) = 0 holds identically under
    /// periodic indexing (the alphas telescope); checked at construction.
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        assert!(!mu.is_empty(), "chain period must be positive");
        let params = ChainParams { mu };
        let spread: f64 = params.mu.iter().map(|m| m.abs()).sum();
        let closure: f64 = params.alpha().iter().sum();
        assert!(
            closure.abs() <= 16.0 * f64::EPSILON * spread.max(1.0),
            "alpha telescoping violated: {closure}"
        );
        Ok(params)
    }

    /// Convenience constructor for the N=3 chain.
    pub fn n3(mu: [f64; 3]) -> Self {
        Self::new(mu.to_vec()).expect("N=3 params")
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// alpha_i = mu_i - mu_{i+1}, cyclic.
    pub fn alpha(&self) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|i| self.mu[i] - self.mu[(i + 1) % n]).collect()
    }
}

/// State of the chain: the logarithmic-derivative variables sigma_1..sigma_N.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    sigma: Vec<f64>,
}

impl ChainState {
    pub fn new(sigma: Vec<f64>) -> Self {
        ChainState { sigma }
    }

    pub fn n3(sigma: [f64; 3]) -> Self {
        ChainState { sigma: sigma.to_vec() }
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }
}

/// Derivative vector (sigma_1', ..., sigma_N') of the closed chain.
///
/// The cyclic system (sigma_i + sigma_{i+1})' = sigma_i^2 - sigma_{i+1}^2
/// + mu_i - mu_{i+1} is inverted in closed form for odd N:
/// sigma_i' = sum_{k=1}^{N-1} (-1)^k D_{i+k} with D_j = sigma_j^2 + mu_j.
/// For N=3 this is exactly sigma_1' = sigma_3^2 - sigma_2^2 + mu_3 - mu_2
/// and cyclic permutations. The last component is emitted as minus the sum
/// of the others (<= 1 ulp from its direct value), so the components sum
/// to exactly zero and C is conserved bitwise.
pub fn chain_rhs(state: &ChainState, params: &ChainParams) -> Result<Vec<f64>> {
    let n = params.n();
    assert_eq!(state.len(), n, "state length must equal the chain period");
    if n % 2 == 0 {
        return Err(Error::EvenPeriod { n });
    }
    let d: Vec<f64> = (0..n)
        .map(|j| state.sigma[j] * state.sigma[j] + params.mu[j])
        .collect();
    let mut out = vec![0.0; n];
    let mut partial = 0.0;
    for (i, o) in out.iter_mut().enumerate().take(n - 1) {
        let mut acc = 0.0;
        for k in 1..n {
            let term = d[(i + k) % n];
            if k % 2 == 1 {
                acc -= term;
            } else {
                acc += term;
            }
        }
        *o = acc;
        partial += acc;
    }
    out[n - 1] = -partial;
    Ok(out)
}

/// First integral C = sigma_1 + sigma_2 + sigma_3 (N = 3).
pub fn integral_c(state: &ChainState) -> f64 {
    assert_eq!(state.len(), 3, "integral C is defined for the N=3 closure");
    state.sigma.iter().sum()
}

/// First integral A = g1 g2 g3 + mu_2 g3 + mu_1 g2 + mu_3 g1 (N = 3),
/// with g_i = sigma_i + sigma_{i+1}.
pub fn integral_a(state: &ChainState, params: &ChainParams) -> f64 {
    assert_eq!(state.len(), 3, "integral A is defined for the N=3 closure");
    assert_eq!(params.n(), 3);
    let g = g_coordinates(state);
    let mu = params.mu();
    g[0] * g[1] * g[2] + mu[1] * g[2] + mu[0] * g[1] + mu[2] * g[0]
}

/// g_i = sigma_i + sigma_{i+1}, cyclic.
pub fn g_coordinates(state: &ChainState) -> Vec<f64> {
    let n = state.len();
    (0..n)
        .map(|i| state.sigma[i] + state.sigma[(i + 1) % n])
        .collect()
}

/// Coefficients (a, b, d) of the reduced quartic
/// (sigma_1')^2 = sigma_1^4 - 6a sigma_1^2 + 4b sigma_1 + d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticCurve {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl QuarticCurve {
    /// Right-hand side sigma^4 - 6a sigma^2 + 4b sigma + d.
    pub fn eval(&self, s: f64) -> f64 {
        ((s * s - 6.0 * self.a) * s + 4.0 * self.b) * s + self.d
    }

    /// Repeated-root quartics are permitted but flagged: the quartic has a
    /// repeated root exactly when the associated lattice degenerates.
    pub fn is_degenerate(&self) -> bool {
        curve_invariants(self).is_degenerate()
    }
}

/// Quartic coefficients from the integrals C and A of the trajectory.
///
/// a = (C^2 + mu_2 + mu_3 - 2 mu_1)/3, b = A - 2 mu_1 C,
/// d = C^4 + 2(2 mu_1 + mu_2 + mu_3) C^2 - 4AC + (mu_3 - mu_2)^2.
/// b and d come from eliminating sigma_2, sigma_3 with the two integrals;
/// the elimination is guarded by a trajectory-fit regression test.
pub fn quartic_coefficients(c: f64, a_int: f64, params: &ChainParams) -> QuarticCurve {
    assert_eq!(params.n(), 3, "quartic reduction is defined for N=3");
    let (m1, m2, m3) = (params.mu[0], params.mu[1], params.mu[2]);
    QuarticCurve {
        a: (c * c + m2 + m3 - 2.0 * m1) / 3.0,
        b: a_int - 2.0 * m1 * c,
        d: c.powi(4) + 2.0 * (2.0 * m1 + m2 + m3) * c * c - 4.0 * a_int * c
            + (m3 - m2) * (m3 - m2),
    }
}

/// Weierstrass invariants of the curve: g2 = d + 3a^2, g3 = a^3 - b^2 - ad.
/// With these, (b, a) = (p'(2nu), p(2nu)) lies on b^2 = 4a^3 - g2 a - g3.
pub fn curve_invariants(q: &QuarticCurve) -> EllipticInvariants {
    EllipticInvariants::from_real(q.d + 3.0 * q.a * q.a, q.a.powi(3) - q.b * q.b - q.a * q.d)
}

/// Uniformization parameter nu = (1/2) p^{-1}(a) on the curve's lattice,
/// where a = (mu_3 + mu_2 - 2 mu_1 + C^2)/3. The postcondition
/// p(2 nu) = a is verified to 1e-9. The sign of p'(2 nu) is not fixed
/// here; the closed-form constructor selects the branch with p'(2nu) = +b.
pub fn uniformization_parameter(params: &ChainParams, c: f64, a_int: f64) -> Result<Complex64> {
    let q = quartic_coefficients(c, a_int, params);
    let lat = Lattice::from_invariants(&curve_invariants(&q))?;
    let a = Complex64::new(q.a, 0.0);
    let nu = 0.5 * lat.invert_p(a)?;
    let back = lat.p(2.0 * nu)?;
    if (back - a).norm() > 1e-9 * a.norm().max(1.0) {
        return Err(Error::ConvergenceFailure {
            what: "uniformization parameter",
            iterations: 0,
        });
    }
    Ok(nu)
}
