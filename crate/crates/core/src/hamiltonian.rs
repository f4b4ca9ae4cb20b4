//! Symbolic engine for the generating function of the commuting
//! Hamiltonians:
//!
//!   tau_N = [prod_{j=1..N} (1 + zeta_{j+1} d^2/(dg_j dg_{j+1}))] g_1...g_N,
//!   zeta_i = beta_i - lambda,  indices cyclic,
//!
//! expanded exactly as a multilinear polynomial in g_1..g_N whose
//! coefficients are polynomials in lambda. With the recorded convention
//! tau_N = (-1)^N (h_0 lambda^n + ... + h_n), n = (N-1)/2; for N = 3 and
//! beta = mu this reproduces the chain integrals: h_0 = 2C, h_1 = -A.

use std::collections::BTreeMap;

use crate::chain::g_coordinates;
use crate::error::{Error, Result};
use crate::integrator::Trajectory;

/// Multilinear polynomial in g_1..g_N: monomials are index subsets
/// (bitmask), each carrying a dense lambda-polynomial (ascending degree).
#[derive(Debug, Clone, PartialEq)]
pub struct TauPolynomial {
    n: usize,
    terms: BTreeMap<u32, Vec<f64>>,
}

impl TauPolynomial {
    pub fn n_period(&self) -> usize {
        self.n
    }

    /// Monomials in deterministic (bitmask) order.
    pub fn monomials(&self) -> impl Iterator<Item = (u32, &[f64])> {
        self.terms.iter().map(|(&m, c)| (m, c.as_slice()))
    }

    /// Highest lambda degree over all coefficients (ignoring zeros).
    pub fn lambda_degree(&self) -> usize {
        self.terms
            .values()
            .filter_map(|c| c.iter().rposition(|&x| x != 0.0))
            .max()
            .unwrap_or(0)
    }

    /// Human-readable monomial label, e.g. "g1*g3" ("1" for the constant).
    pub fn monomial_label(mask: u32, n: usize) -> String {
        let parts: Vec<String> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| format!("g{}", i + 1))
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

/// Expands tau_N for the given beta vector. Operators are applied
/// right-to-left (j = N down to 1); they commute, so the order only fixes
/// the arithmetic sequence. Each second derivative deletes a pair of
/// adjacent indices from a monomial, so multilinearity is structural.
pub fn tau_generating(n_period: usize, beta: &[f64]) -> Result<TauPolynomial> {
    if n_period % 2 == 0 {
        return Err(Error::EvenPeriod { n: n_period });
    }
    assert!(n_period >= 3, "tau_N needs N >= 3");
    assert!(n_period <= 31, "bitmask representation caps N at 31");
    assert_eq!(beta.len(), n_period);

    let full: u32 = (1u32 << n_period) - 1;
    let mut terms: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    terms.insert(full, vec![1.0]);

    for j in (0..n_period).rev() {
        let jp = (j + 1) % n_period;
        let bits: u32 = (1 << j) | (1 << jp);
        let b = beta[jp];
        let mut extra: Vec<(u32, Vec<f64>)> = Vec::new();
        for (&mask, coeffs) in &terms {
            if mask & bits == bits {
                // (beta_{j+1} - lambda) * coeffs
                let mut c = vec![0.0; coeffs.len() + 1];
                for (k, &v) in coeffs.iter().enumerate() {
                    c[k] += b * v;
                    c[k + 1] -= v;
                }
                extra.push((mask & !bits, c));
            }
        }
        for (mask, c) in extra {
            merge_into(&mut terms, mask, &c);
        }
    }
    Ok(TauPolynomial { n: n_period, terms })
}

fn merge_into(terms: &mut BTreeMap<u32, Vec<f64>>, mask: u32, c: &[f64]) {
    let entry = terms.entry(mask).or_default();
    if entry.len() < c.len() {
        entry.resize(c.len(), 0.0);
    }
    for (k, &v) in c.iter().enumerate() {
        entry[k] += v;
    }
}

/// Evaluates tau at the supplied g values, collects the lambda-polynomial,
/// strips the overall (-1)^N sign, and returns h_0 (coefficient of
/// lambda^n) down to h_n (constant term), n = (N-1)/2.
pub fn extract_h(tau: &TauPolynomial, state_g: &[f64]) -> Vec<f64> {
    assert_eq!(state_g.len(), tau.n);
    let n_h = (tau.n - 1) / 2;
    let mut acc = vec![0.0; n_h + 1];
    for (mask, coeffs) in tau.monomials() {
        let mut gp = 1.0;
        for (i, &g) in state_g.iter().enumerate() {
            if mask & (1 << i) != 0 {
                gp *= g;
            }
        }
        for (k, &v) in coeffs.iter().enumerate() {
            if v != 0.0 {
                assert!(k <= n_h, "lambda degree exceeds (N-1)/2");
                acc[k] += gp * v;
            }
        }
    }
    let sign = if tau.n % 2 == 1 { -1.0 } else { 1.0 };
    (0..=n_h).map(|i| sign * acc[n_h - i]).collect()
}

/// Max drift |h_i(x) - h_i(0)| of each extracted Hamiltonian over the
/// unmasked trajectory points. Diagnostic for beta != mu: conservation is
/// only established for beta = mu at N = 3.
pub fn conservation_check(traj: &Trajectory, beta: &[f64]) -> Result<Vec<f64>> {
    let tau = tau_generating(beta.len(), beta)?;
    let mut it = traj.unmasked();
    let (_, first) = it.next().expect("nonempty trajectory");
    let h0 = extract_h(&tau, &g_coordinates(first));
    let mut drift = vec![0.0_f64; h0.len()];
    for (_, s) in it {
        let h = extract_h(&tau, &g_coordinates(s));
        for (d, (a, b)) in drift.iter_mut().zip(h.iter().zip(&h0)) {
            *d = d.max((a - b).abs());
        }
    }
    Ok(drift)
}
