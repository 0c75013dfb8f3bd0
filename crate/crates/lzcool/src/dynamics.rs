//! Stationary and transient solutions of the four-state rate equations,
//! equilibrium baselines, effective temperature, and reduced closed-form
//! population estimates.

use crate::error::Error;
use crate::model::FluxQubitModel;
use crate::rates::GeneratorMatrix;

use serde::Serialize;

/// Stationary solution of `dp/dt = G p` with `sum(p) = 1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SteadyState {
    /// Occupations `(p00, p11, p22, p33)`, clamped to `[0, 1]`.
    pub p: [f64; 4],
    /// `max_i |(G p)_i|` of the returned populations.
    pub residual: f64,
    /// Effective temperature of the ground pair (rad GHz), when attached via
    /// [`SteadyState::with_effective_temperature`] and defined.
    pub t_eff: Option<f64>,
}

impl SteadyState {
    /// Attaches the ground-pair effective temperature for splitting `eps10`.
    /// Leaves `None` when the temperature is undefined (equal or degenerate
    /// populations, zero splitting).
    pub fn with_effective_temperature(mut self, eps10: f64) -> Self {
        self.t_eff = effective_temperature(self.p[1], self.p[0], eps10)
            .ok()
            .flatten();
        self
    }
}

/// Solves for the stationary populations of a rate-equation generator.
///
/// Replaces the best-conditioned row (largest-magnitude diagonal) with the
/// normalization constraint and solves the dense 4x4 system with partial
/// pivoting. Errors with [`Error::DegenerateChain`] when the chain splits
/// into disconnected groups and the stationary state is not unique.
pub fn steady_state(generator: &GeneratorMatrix) -> Result<SteadyState, Error> {
    let g = generator.entries();
    let max_abs = generator.max_abs();
    let mut replaced = 0;
    for i in 1..4 {
        if g[i][i].abs() > g[replaced][replaced].abs() {
            replaced = i;
        }
    }
    let mut a = *g;
    let mut b = [0.0; 4];
    a[replaced] = [1.0; 4];
    b[replaced] = 1.0;
    let pivot_floor = 1e-13 * max_abs.max(1.0);
    let solved = match solve4(&mut a, &mut b, pivot_floor) {
        Some(x) => x,
        None => return Err(degeneracy_error(generator)),
    };
    let mut p = solved;
    let mut sum = 0.0;
    for v in &mut p {
        if !v.is_finite() || *v < -1e-12 || *v > 1.0 + 1e-12 {
            return Err(Error::Compute(format!(
                "stationary solve produced an out-of-range population {v}"
            )));
        }
        *v = v.clamp(0.0, 1.0);
        sum += *v;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Compute(format!(
            "stationary populations sum to {sum}, not 1"
        )));
    }
    for v in &mut p {
        *v /= sum;
    }
    let gp = generator.apply(&p);
    let residual = gp.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if residual > 1e-10 * max_abs {
        return Err(Error::Compute(format!(
            "stationary residual {residual:e} exceeds 1e-10 of the largest rate {max_abs:e}"
        )));
    }
    Ok(SteadyState {
        p,
        residual,
        t_eff: None,
    })
}

fn solve4(a: &mut [[f64; 4]; 4], b: &mut [f64; 4], pivot_floor: f64) -> Option<[f64; 4]> {
    for col in 0..4 {
        let mut piv = col;
        for r in (col + 1)..4 {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < pivot_floor {
            return None;
        }
        if piv != col {
            a.swap(piv, col);
            b.swap(piv, col);
        }
        for r in (col + 1)..4 {
            let f = a[r][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            let pivot_row = a[col];
            for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for i in (0..4).rev() {
        let mut s = b[i];
        for c in (i + 1)..4 {
            s -= a[i][c] * x[c];
        }
        x[i] = s / a[i][i];
    }
    Some(x)
}

fn degeneracy_error(generator: &GeneratorMatrix) -> Error {
    let g = generator.entries();
    let mut seen = [false; 4];
    let mut groups = Vec::new();
    for start in 0..4 {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut group = Vec::new();
        while let Some(i) = stack.pop() {
            group.push(i);
            for j in 0..4 {
                if i != j && !seen[j] && (g[i][j] != 0.0 || g[j][i] != 0.0) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        group.sort_unstable();
        groups.push(group);
    }
    if groups.len() > 1 {
        Error::DegenerateChain { groups }
    } else {
        Error::Compute(
            "rate-equation generator is numerically singular despite a connected chain".into(),
        )
    }
}

const MAX_TIME_STEPS: usize = 100_000_000;

/// Fixed-step 4th-order integration of `dp/dt = G p` from `p0` to `t_final`.
///
/// Exists as a convergence oracle for [`steady_state`]; the step is capped by
/// the stiffness bound `dt * max|diag(G)| < 0.1`.
pub fn time_evolve(
    generator: &GeneratorMatrix,
    p0: [f64; 4],
    t_final: f64,
    dt: f64,
) -> Result<[f64; 4], Error> {
    if !t_final.is_finite() || t_final <= 0.0 {
        return Err(Error::Domain(format!(
            "final time must be positive and finite, got {t_final}"
        )));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::Domain(format!(
            "time step must be positive and finite, got {dt}"
        )));
    }
    let sum: f64 = p0.iter().sum();
    if p0.iter().any(|v| !v.is_finite() || *v < -1e-12) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "initial populations must lie on the probability simplex, got {p0:?}"
        )));
    }
    let g = generator.entries();
    let max_diag = (0..4).map(|i| g[i][i].abs()).fold(0.0_f64, f64::max);
    if dt * max_diag >= 0.1 {
        return Err(Error::Domain(format!(
            "time step too coarse for the fastest rate: dt * max|diag| = {} >= 0.1",
            dt * max_diag
        )));
    }
    let steps_needed = (t_final / dt).ceil();
    if steps_needed > MAX_TIME_STEPS as f64 {
        return Err(Error::Domain(format!(
            "integration would need {steps_needed:e} steps; raise dt or lower t_final"
        )));
    }
    let steps = (steps_needed as usize).max(1);
    let h = t_final / steps as f64;
    let mut p = p0;
    for _ in 0..steps {
        let k1 = generator.apply(&p);
        let k2 = generator.apply(&add_scaled(&p, &k1, 0.5 * h));
        let k3 = generator.apply(&add_scaled(&p, &k2, 0.5 * h));
        let k4 = generator.apply(&add_scaled(&p, &k3, h));
        for i in 0..4 {
            p[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
    }
    Ok(p)
}

fn add_scaled(p: &[f64; 4], k: &[f64; 4], h: f64) -> [f64; 4] {
    let mut out = *p;
    for i in 0..4 {
        out[i] += h * k[i];
    }
    out
}

/// Effective temperature (rad GHz) of a two-level pair with splitting
/// `eps10` and occupations `p11`, `p00`. `None` when undefined (equal
/// populations or zero splitting).
pub fn effective_temperature(p11: f64, p00: f64, eps10: f64) -> Result<Option<f64>, Error> {
    if !(p11 > 0.0 && p11 < 1.0 && p00 > 0.0 && p00 < 1.0) {
        return Err(Error::Domain(format!(
            "populations must lie strictly inside (0, 1), got p11 = {p11}, p00 = {p00}"
        )));
    }
    if !eps10.is_finite() {
        return Err(Error::Domain(format!(
            "level splitting must be finite, got {eps10}"
        )));
    }
    if eps10 == 0.0 || p00 == p11 {
        return Ok(None);
    }
    Ok(Some(eps10 / (p00 / p11).ln()))
}

/// Thermal-equilibrium occupation of state 1 at dc detuning `detuning_dc`.
pub fn equilibrium_p11(model: &FluxQubitModel, detuning_dc: f64) -> Result<f64, Error> {
    model.validate()?;
    if !detuning_dc.is_finite() {
        return Err(Error::Domain(format!(
            "dc detuning must be finite, got {detuning_dc}"
        )));
    }
    let eps10 = model.interwell_splitting(detuning_dc);
    Ok(1.0 / (1.0 + (eps10 / model.temperature).exp()))
}

/// Closed-form estimate of the state-1 occupation when both well-changing
/// driven channels act and the intrawell decays are fast:
/// `(g01 + w03) / (g10 + g01 + w12 + w03)`.
pub fn p11_two_channel_estimate(w12: f64, w03: f64, g10: f64, g01: f64) -> Result<f64, Error> {
    for (name, v) in [("w12", w12), ("w03", w03), ("g10", g10), ("g01", g01)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Domain(format!(
                "rate {name} must be nonnegative and finite, got {v}"
            )));
        }
    }
    let denominator = g10 + g01 + w12 + w03;
    if denominator <= 0.0 {
        return Err(Error::Domain(
            "all rates are zero; the reduced population is undefined".into(),
        ));
    }
    Ok((g01 + w03) / denominator)
}

/// Closed-form estimate of the state-1 occupation when only the left-well
/// excitation channel acts: `g01 / (g10 + g01 + w12)`. Intended for the
/// one-sided scheme, with `g01` its shifted-gap up-rate.
///
/// Ignores the off-resonant Lorentzian tails of the remaining channels, so
/// once `g01` is strongly suppressed it lower-bounds the full solution
/// rather than tracking it; see [`p11_two_channel_estimate`].
pub fn p11_single_channel_estimate(w12: f64, g10: f64, g01: f64) -> Result<f64, Error> {
    for (name, v) in [("w12", w12), ("g10", g10), ("g01", g01)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Domain(format!(
                "rate {name} must be nonnegative and finite, got {v}"
            )));
        }
    }
    let denominator = g10 + g01 + w12;
    if denominator <= 0.0 {
        return Err(Error::Domain(
            "all rates are zero; the reduced population is undefined".into(),
        ));
    }
    Ok(g01 / denominator)
}
