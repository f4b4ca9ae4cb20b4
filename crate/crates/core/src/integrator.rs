//! Independent numerical oracle: fixed-step classical Runge-Kutta
//! integration of the chain with blow-up detection, conservation and
//! quartic-residual reporting.

use crate::chain::{chain_rhs, integral_a, integral_c, ChainParams, ChainState, QuarticCurve};
use crate::error::{Error, Result};

/// Default bound on |sigma_i| beyond which the trajectory is truncated.
pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e8;

/// Default half-width of masked windows around detected poles.
pub const DEFAULT_POLE_MASK_HALFWIDTH: f64 = 1e-3;

/// A trajectory on a uniform grid, with per-point mask flags for
/// pole-window exclusion and an optional blow-up marker.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: Vec<f64>,
    states: Vec<ChainState>,
    masked: Vec<bool>,
    blowup_at: Option<f64>,
}

impl Trajectory {
    pub fn new(grid: Vec<f64>, states: Vec<ChainState>) -> Self {
        assert_eq!(grid.len(), states.len());
        assert!(grid.windows(2).all(|w| w[0] < w[1]), "grid must increase");
        let masked = vec![false; grid.len()];
        Trajectory { grid, states, masked, blowup_at: None }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn states(&self) -> &[ChainState] {
        &self.states
    }

    pub fn masked(&self) -> &[bool] {
        &self.masked
    }

    /// x at which integration aborted, if a blow-up was detected.
    pub fn blowup_at(&self) -> Option<f64> {
        self.blowup_at
    }

    /// Masks every grid point within `halfwidth` of one of `centers`.
    pub fn mask_windows(&mut self, centers: &[f64], halfwidth: f64) {
        for (i, &x) in self.grid.iter().enumerate() {
            if centers.iter().any(|&c| (x - c).abs() <= halfwidth) {
                self.masked[i] = true;
            }
        }
    }

    pub fn unmasked(&self) -> impl Iterator<Item = (f64, &ChainState)> {
        self.grid
            .iter()
            .zip(&self.states)
            .zip(&self.masked)
            .filter(|(_, &m)| !m)
            .map(|((x, s), _)| (*x, s))
    }
}

/// Classical 4th-order Runge-Kutta on the uniform grid 0, h, 2h, ...
/// covering [0, x_end]. Aborts cleanly at blow-up (any |sigma_i| above the
/// threshold), truncating the trajectory and recording the event.
pub fn integrate_chain(
    params: &ChainParams,
    initial: &ChainState,
    x_end: f64,
    step: f64,
) -> Result<Trajectory> {
    integrate_chain_with(params, initial, x_end, step, DEFAULT_BLOWUP_THRESHOLD)
}

/// As `integrate_chain`, with an explicit blow-up threshold.
pub fn integrate_chain_with(
    params: &ChainParams,
    initial: &ChainState,
    x_end: f64,
    step: f64,
    blowup_threshold: f64,
) -> Result<Trajectory> {
    assert!(step > 0.0 && x_end > 0.0, "step and x_end must be positive");
    if params.n() % 2 == 0 {
        return Err(Error::EvenPeriod { n: params.n() });
    }
    let bound = |s: &ChainState| s.sigma().iter().any(|v| v.abs() > blowup_threshold);
    if bound(initial) {
        return Err(Error::ImmediateBlowup { threshold: blowup_threshold });
    }

    let n_steps = (x_end / step + 1e-9).floor() as usize;
    let mut grid = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    grid.push(0.0);
    states.push(initial.clone());
    let mut y: Vec<f64> = initial.sigma().to_vec();
    let mut blowup_at = None;

    for i in 0..n_steps {
        let x = i as f64 * step;
        match rk4_step(params, &y, step) {
            Some(next) => y = next,
            None => {
                blowup_at = Some(x);
                break;
            }
        }
        let state = ChainState::new(y.clone());
        if bound(&state) || y.iter().any(|v| !v.is_finite()) {
            blowup_at = Some(x + step);
            break;
        }
        grid.push((i + 1) as f64 * step);
        states.push(state);
    }

    let mut traj = Trajectory::new(grid, states);
    traj.blowup_at = blowup_at;
    Ok(traj)
}

fn rk4_step(params: &ChainParams, y: &[f64], h: f64) -> Option<Vec<f64>> {
    let n = y.len();
    let f = |v: &[f64]| chain_rhs(&ChainState::new(v.to_vec()), params).ok();
    let k1 = f(y)?;
    let y2: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * h * k1[i]).collect();
    let k2 = f(&y2)?;
    let y3: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * h * k2[i]).collect();
    let k3 = f(&y3)?;
    let y4: Vec<f64> = (0..n).map(|i| y[i] + h * k3[i]).collect();
    let k4 = f(&y4)?;
    let next: Vec<f64> = (0..n)
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if next.iter().all(|v| v.is_finite()) {
        Some(next)
    } else {
        None
    }
}

/// Maximum drift of the two first integrals over the unmasked points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationReport {
    pub c_drift: f64,
    pub a_drift: f64,
}

pub fn conservation_report(traj: &Trajectory, params: &ChainParams) -> ConservationReport {
    assert_eq!(params.n(), 3);
    let mut it = traj.unmasked();
    let first = it.next().expect("nonempty trajectory");
    let c0 = integral_c(first.1);
    let a0 = integral_a(first.1, params);
    let mut report = ConservationReport { c_drift: 0.0, a_drift: 0.0 };
    for (_, s) in it {
        report.c_drift = report.c_drift.max((integral_c(s) - c0).abs());
        report.a_drift = report.a_drift.max((integral_a(s, params) - a0).abs());
    }
    report
}

/// Max over unmasked points of |(sigma_1')^2 - quartic(sigma_1)|, with
/// sigma_1' taken from the chain right-hand side (not finite differences).
pub fn quartic_residual_report(traj: &Trajectory, q: &QuarticCurve, params: &ChainParams) -> f64 {
    assert_eq!(params.n(), 3);
    let mut worst: f64 = 0.0;
    for (_, s) in traj.unmasked() {
        let sp = chain_rhs(s, params).expect("odd period")[0];
        worst = worst.max((sp * sp - q.eval(s.sigma()[0])).abs());
    }
    worst
}
