//! Transition rates for the driven two-well system.
//!
//! The central quantity is the cycle-averaged interwell transition rate of a
//! tunneling channel under a sinusoidal flux drive: a sum of Lorentzian
//! resonances at multiples of the drive frequency, weighted by squared Bessel
//! functions of the drive amplitude ([`mdlz_rate`]). Companion forms cover the
//! undriven limit ([`static_rate`]), a single-passage Landau-Zener probability
//! ([`lz_probability`]), and Airy-function approximations valid for slow
//! drives ([`airy_rate`], [`airy_rate_three_term`]). [`assemble_generator`]
//! combines the four channel rates with intrawell relaxation and thermally
//! activated interwell hopping into the 4-state rate-equation generator.

use crate::error::Error;
use crate::model::{DriveConfig, FluxQubitModel, TransitionChannel, Waveform};
use crate::specfun::{airy_ai, BesselCache};

use serde::{Deserialize, Serialize};

/// Cooling scheme selector. Each scheme pairs with one drive waveform:
/// `Ordinary` drives symmetrically about the dc bias, `NewMethod` drives
/// one-sided so the flux never swings past the bias point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ordinary,
    NewMethod,
}

impl Method {
    /// The drive waveform this scheme is defined for.
    pub fn waveform(self) -> Waveform {
        match self {
            Method::Ordinary => Waveform::Symmetric,
            Method::NewMethod => Waveform::OneSided,
        }
    }
}

/// Choice of exponent for the thermally activated interwell up-rate under a
/// one-sided drive.
///
/// `ShiftedGap` references the cycle-averaged level splitting (the dc
/// splitting plus the drive amplitude of the ground-pair channel) and obeys
/// detailed balance; it is the default. `CrossingReferenced` uses the
/// excited-channel detuning minus its drive amplitude verbatim; it grows
/// without bound at large amplitude and is retained only as a diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterwellActivation {
    ShiftedGap,
    CrossingReferenced,
}

/// Outcome of a single Landau-Zener passage through a channel crossing.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LzPassage {
    /// Transition probability `1 - exp(-gap^2 / (4 zeta))`.
    pub probability: f64,
    /// Drive phase in `[0, 2*pi)` of the first crossing in a cycle.
    pub crossing_phase: f64,
    /// Energy sweep rate `zeta = slope_sum * omega * phi_rf * |cos(phase)|`
    /// at the crossing, in (rad GHz)^2.
    pub sweep_rate: f64,
    /// True when the crossing sits exactly at a turning point of the drive,
    /// where the sweep rate vanishes and the passage is fully adiabatic.
    pub adiabatic_limit: bool,
}

/// Single-passage Landau-Zener transition probability for one channel.
///
/// Errors with [`Error::NotReached`] when the drive never sweeps the channel
/// through its crossing.
pub fn lz_probability(
    model: &FluxQubitModel,
    drive: &DriveConfig,
    channel: &TransitionChannel,
) -> Result<LzPassage, Error> {
    model.validate()?;
    drive.validate()?;
    let slope_sum = channel.slope_sum(model);
    let crossing = channel.crossover_flux(model, drive.detuning_dc);
    if drive.phi_rf == 0.0 {
        return Err(Error::NotReached(format!(
            "channel ({},{}) crossing at {} mPhi0 is never swept: drive amplitude is zero",
            channel.left, channel.right, crossing,
        )));
    }
    let offset = match drive.waveform {
        Waveform::Symmetric => 0.0,
        Waveform::OneSided => drive.phi_rf,
    };
    let s = (crossing - drive.detuning_dc - offset) / drive.phi_rf;
    if !(-1.0..=1.0).contains(&s) {
        let (lo, hi) = drive.flux_range();
        return Err(Error::NotReached(format!(
            "channel ({},{}) crossing at {} mPhi0 lies outside the swept range [{}, {}] mPhi0",
            channel.left, channel.right, crossing, lo, hi,
        )));
    }
    if s.abs() == 1.0 {
        return Ok(LzPassage {
            probability: if channel.gap == 0.0 { 0.0 } else { 1.0 },
            crossing_phase: if s > 0.0 {
                std::f64::consts::FRAC_PI_2
            } else {
                1.5 * std::f64::consts::PI
            },
            sweep_rate: 0.0,
            adiabatic_limit: true,
        });
    }
    let phase = if s >= 0.0 {
        s.asin()
    } else {
        std::f64::consts::PI - s.asin()
    };
    let zeta = slope_sum * drive.omega * drive.phi_rf * phase.cos().abs();
    let probability = 1.0 - (-channel.gap * channel.gap / (4.0 * zeta)).exp();
    Ok(LzPassage {
        probability,
        crossing_phase: phase,
        sweep_rate: zeta,
        adiabatic_limit: false,
    })
}

/// Undriven (zero-amplitude) transition rate of one channel: a single
/// Lorentzian of half-width `width` centered on zero detuning.
pub fn static_rate(channel: &TransitionChannel) -> Result<f64, Error> {
    if channel.width == 0.0 && channel.eps == 0.0 {
        return Err(Error::Domain(
            "static rate is singular at zero detuning with zero linewidth".into(),
        ));
    }
    Ok(0.5
        * channel.gap
        * channel.gap
        * channel.width
        * (1.0 / (channel.eps * channel.eps + channel.width * channel.width)))
}

/// Number of sideband orders kept in the driven-rate sums.
///
/// Covers every resonance reachable within the detuning span `|eps| + amp`,
/// the Bessel turning-point region, and enough Lorentzian tail for the
/// truncation error to sit far below solver tolerances.
pub fn truncation_order(eps: f64, amp: f64, width: f64, omega: f64) -> usize {
    let span = ((eps.abs() + amp) / omega).ceil();
    let turning = 10.0 * (amp / omega).cbrt();
    let tail = 50.0 * (width / omega).ceil();
    (span + turning.ceil() + tail + 100.0) as usize
}

const MAX_TRUNCATION: usize = 200_000_000;

fn validate_driven_inputs(channel: &TransitionChannel, omega: f64) -> Result<(), Error> {
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::Domain(format!(
            "drive frequency must be positive and finite, got {omega}"
        )));
    }
    if !channel.gap.is_finite() || channel.gap < 0.0 {
        return Err(Error::Domain(format!(
            "channel gap must be nonnegative and finite, got {}",
            channel.gap
        )));
    }
    if !channel.eps.is_finite() {
        return Err(Error::Domain(format!(
            "channel detuning must be finite, got {}",
            channel.eps
        )));
    }
    if !channel.amp.is_finite() || channel.amp < 0.0 {
        return Err(Error::Domain(format!(
            "channel drive amplitude must be nonnegative and finite, got {}",
            channel.amp
        )));
    }
    if !channel.width.is_finite() || channel.width <= 0.0 {
        return Err(Error::Domain(format!(
            "channel linewidth must be positive and finite, got {}",
            channel.width
        )));
    }
    Ok(())
}

/// Cycle-averaged driven transition rate of one channel (rad GHz).
///
/// Sums Lorentzians of half-width `channel.width` at every drive harmonic,
/// weighted by `J_n(amp/omega)^2`. The resonance comb is centered on
/// `channel.eps` for a symmetric drive and on `channel.eps + channel.amp` for
/// a one-sided drive. Terms are added in `+n`/`-n` pairs so the result is
/// bit-for-bit even in the detuning.
pub fn mdlz_rate(
    channel: &TransitionChannel,
    waveform: Waveform,
    omega: f64,
    cache: &BesselCache,
) -> Result<f64, Error> {
    validate_driven_inputs(channel, omega)?;
    let n = truncation_order(channel.eps, channel.amp, channel.width, omega);
    mdlz_rate_with_truncation(channel, waveform, omega, n, cache)
}

/// [`mdlz_rate`] with an explicit sideband cutoff, for convergence studies.
pub fn mdlz_rate_with_truncation(
    channel: &TransitionChannel,
    waveform: Waveform,
    omega: f64,
    n_trunc: usize,
    cache: &BesselCache,
) -> Result<f64, Error> {
    validate_driven_inputs(channel, omega)?;
    if n_trunc > MAX_TRUNCATION {
        return Err(Error::Domain(format!(
            "sideband cutoff {n_trunc} exceeds the supported maximum {MAX_TRUNCATION}"
        )));
    }
    let center = match waveform {
        Waveform::Symmetric => channel.eps,
        Waveform::OneSided => channel.eps + channel.amp,
    };
    let table = cache.table(channel.amp / omega)?;
    let w = channel.width;
    let w2 = w * w;
    let values = table.values();
    let top = n_trunc.min(values.len() - 1);
    let j0 = values[0];
    let mut acc = (j0 * j0) / (center * center + w2);
    for (k, &jn) in values[1..=top].iter().enumerate() {
        let j2 = jn * jn;
        if j2 == 0.0 {
            continue;
        }
        let nw = (k + 1) as f64 * omega;
        let dm = center - nw;
        let dp = center + nw;
        acc += j2 * (1.0 / (dm * dm + w2) + 1.0 / (dp * dp + w2));
    }
    Ok(0.5 * channel.gap * channel.gap * w * acc)
}

/// Driven rate of a one-sided channel with the Bessel weights replaced by
/// their turning-point (Airy-function) approximation.
///
/// Valid only for slow drives, `amp/omega >= 10`. The weight for order `-n`
/// reuses the order-`n` value, matching the parity `J_{-n}^2 = J_n^2` of the
/// weights it approximates.
pub fn airy_rate(channel: &TransitionChannel, omega: f64, n_trunc: usize) -> Result<f64, Error> {
    validate_driven_inputs(channel, omega)?;
    if n_trunc > MAX_TRUNCATION {
        return Err(Error::Domain(format!(
            "sideband cutoff {n_trunc} exceeds the supported maximum {MAX_TRUNCATION}"
        )));
    }
    let x = channel.amp / omega;
    if x < 10.0 {
        return Err(Error::Validity(format!(
            "turning-point approximation needs amp/omega >= 10, got {x}"
        )));
    }
    let center = channel.eps + channel.amp;
    let scale = (2.0 / x).cbrt();
    let w = channel.width;
    let w2 = w * w;
    let ai0 = airy_ai(scale * -x)?;
    let mut acc = (ai0 * ai0) / (center * center + w2);
    for n in 1..=n_trunc {
        let nf = n as f64;
        let arg = scale * (nf - x);
        if arg > 14.0 {
            break;
        }
        let ai = airy_ai(arg)?;
        let j2 = ai * ai;
        if j2 == 0.0 {
            continue;
        }
        let nw = nf * omega;
        let dm = center - nw;
        let dp = center + nw;
        acc += j2 * (1.0 / (dm * dm + w2) + 1.0 / (dp * dp + w2));
    }
    Ok(0.5 * channel.gap * channel.gap * w * scale * scale * acc)
}

/// Closed three-term estimate of the one-sided driven rate: the resonance at
/// the shifted band center plus its two nearest sideband neighbours, each an
/// Airy-weighted Lorentzian. Diagnostic quality only; prefer [`mdlz_rate`].
pub fn airy_rate_three_term(channel: &TransitionChannel, omega: f64) -> Result<f64, Error> {
    validate_driven_inputs(channel, omega)?;
    let x = channel.amp / omega;
    if x < 10.0 {
        return Err(Error::Validity(format!(
            "turning-point approximation needs amp/omega >= 10, got {x}"
        )));
    }
    let gap2 = channel.gap * channel.gap;
    let w = channel.width;
    let eps = channel.eps;
    let amp = channel.amp;
    let scale = (2.0 * omega / amp).cbrt();
    let ai_center = airy_ai(scale * (eps / omega))?;
    let t1 = gap2 * (omega * omega / (2.0 * amp * amp)).cbrt() * ai_center * ai_center / w;
    let side_prefactor = gap2 * (1.0 / (2.0 * amp * amp)).cbrt();
    let side_denominator = omega.powi(2).cbrt().powi(2) / w + w / omega.powi(2).cbrt();
    let ai_lower = airy_ai(scale * ((eps - omega) / omega))?;
    let ai_upper = airy_ai(scale * ((eps + omega) / omega))?;
    let t2 = side_prefactor * ai_lower * ai_lower / side_denominator;
    let t3 = side_prefactor * ai_upper * ai_upper / side_denominator;
    Ok(t1 + t2 + t3)
}

/// Thermally activated interwell hopping rates `(down, up)` between the two
/// well ground states, in rad GHz.
///
/// Both directions are referenced to the energetically downhill one: the
/// downhill rate equals the bare attempt rate and the uphill rate carries the
/// Boltzmann factor of the full splitting, so the pair obeys detailed balance
/// for either sign of the dc bias. For the one-sided scheme the splitting is
/// shifted by the cycle average of the drive (`ShiftedGap`), which suppresses
/// the up-rate exponentially with amplitude.
pub fn interwell_rates(
    model: &FluxQubitModel,
    drive: &DriveConfig,
    method: Method,
    activation: InterwellActivation,
) -> Result<(f64, f64), Error> {
    model.validate()?;
    drive.validate()?;
    let base = model.gamma10_inter;
    let t = model.temperature;
    let eps10 = model.interwell_splitting(drive.detuning_dc);
    match (method, activation) {
        (Method::Ordinary, _) => Ok(balanced_pair(base, eps10, t)),
        (Method::NewMethod, InterwellActivation::ShiftedGap) => {
            let a01 = (model.slope[0] + model.slope[1]) * drive.phi_rf;
            Ok(balanced_pair(base, eps10 + a01, t))
        }
        (Method::NewMethod, InterwellActivation::CrossingReferenced) => {
            let eps12 = (model.slope[1] + model.slope[2]) * (drive.detuning_dc - model.crossover);
            let a12 = (model.slope[1] + model.slope[2]) * drive.phi_rf;
            Ok((base, base * (-(eps12 - a12) / t).exp()))
        }
    }
}

fn balanced_pair(base: f64, splitting: f64, temperature: f64) -> (f64, f64) {
    let down = base * (splitting.min(0.0) / temperature).exp();
    let up = base * (-splitting.max(0.0) / temperature).exp();
    (down, up)
}

/// [`interwell_rates`] up-rate with the default `ShiftedGap` activation.
pub fn interwell_up_rate(
    model: &FluxQubitModel,
    drive: &DriveConfig,
    method: Method,
) -> Result<f64, Error> {
    interwell_rates(model, drive, method, InterwellActivation::ShiftedGap).map(|(_, up)| up)
}

/// Every rate entering the 4-state rate equations, in rad GHz. Channel rates
/// are symmetric (the same value drives both directions of a channel).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateSet {
    /// Driven rate of the ground-pair channel (states 0 and 1).
    pub w01: f64,
    /// Driven rate of the left-well excitation channel (states 1 and 2).
    pub w12: f64,
    /// Driven rate of the right-well excitation channel (states 0 and 3).
    pub w03: f64,
    /// Driven rate of the excited-pair channel (states 2 and 3).
    pub w23: f64,
    /// Intrawell relaxation 2 -> 0.
    pub gamma20: f64,
    /// Intrawell relaxation 3 -> 1.
    pub gamma31: f64,
    /// Interwell hopping 1 -> 0.
    pub gamma10_inter: f64,
    /// Interwell hopping 0 -> 1.
    pub gamma01_inter: f64,
    /// Scheme the rates were assembled for.
    pub method: Method,
}

/// Generator `G` of the rate equations `dp/dt = G p` over the populations
/// `(p00, p11, p22, p33)`. Every column sums to zero exactly: each diagonal
/// entry is built as the negated sum of its column's off-diagonal entries.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GeneratorMatrix {
    g: [[f64; 4]; 4],
}

impl GeneratorMatrix {
    /// Builds the generator from an assembled rate set.
    pub fn from_rate_set(rates: &RateSet) -> Self {
        let mut g = [[0.0; 4]; 4];
        g[0][1] = rates.gamma10_inter + rates.w01;
        g[0][2] = rates.gamma20;
        g[0][3] = rates.w03;
        g[1][0] = rates.gamma01_inter + rates.w01;
        g[1][2] = rates.w12;
        g[1][3] = rates.gamma31;
        g[2][1] = rates.w12;
        g[2][3] = rates.w23;
        g[3][0] = rates.w03;
        g[3][2] = rates.w23;
        for j in 0..4 {
            let mut leak = 0.0;
            for (i, row) in g.iter().enumerate() {
                if i != j {
                    leak += row[j];
                }
            }
            g[j][j] = -leak;
        }
        GeneratorMatrix { g }
    }

    /// The raw matrix, row-major, row = destination state.
    pub fn entries(&self) -> &[[f64; 4]; 4] {
        &self.g
    }

    /// `G p`.
    pub fn apply(&self, p: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (row, slot) in self.g.iter().zip(out.iter_mut()) {
            *slot = row.iter().zip(p.iter()).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Sum of column `j`: off-diagonal entries in row order, diagonal last.
    /// Exactly zero, since the diagonal is constructed as the negation of
    /// that same off-diagonal sum.
    pub fn column_sum(&self, j: usize) -> f64 {
        let mut off = 0.0;
        for (i, row) in self.g.iter().enumerate() {
            if i != j {
                off += row[j];
            }
        }
        off + self.g[j][j]
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.g
            .iter()
            .flatten()
            .fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    /// Smallest nonzero diagonal magnitude, if any diagonal entry is nonzero.
    pub fn min_nonzero_diagonal(&self) -> Option<f64> {
        let mut min: Option<f64> = None;
        for i in 0..4 {
            let d = self.g[i][i].abs();
            if d > 0.0 {
                min = Some(min.map_or(d, |m: f64| m.min(d)));
            }
        }
        min
    }
}

/// Assembles the rate-equation generator at one operating point.
///
/// Computes the four driven channel rates with the waveform the scheme is
/// defined for, combines them with the model's intrawell relaxation rates and
/// the thermally activated interwell pair, and packs everything into a
/// conservative generator. Errors if the drive waveform disagrees with the
/// scheme, or if any rate comes out nonfinite.
pub fn assemble_generator(
    model: &FluxQubitModel,
    drive: &DriveConfig,
    method: Method,
    activation: InterwellActivation,
    cache: &BesselCache,
) -> Result<(GeneratorMatrix, RateSet), Error> {
    model.validate()?;
    drive.validate()?;
    if drive.waveform != method.waveform() {
        return Err(Error::Domain(format!(
            "drive waveform {:?} does not match method {:?}: Ordinary pairs with Symmetric, \
             NewMethod with OneSided",
            drive.waveform, method,
        )));
    }
    let channels = crate::model::build_channels(model, drive);
    let mut w = [0.0; 4];
    for (slot, channel) in w.iter_mut().zip(channels.iter()) {
        *slot = mdlz_rate(channel, drive.waveform, drive.omega, cache)?;
    }
    let (gamma10_inter, gamma01_inter) = interwell_rates(model, drive, method, activation)?;
    let rates = RateSet {
        w01: w[0],
        w12: w[1],
        w03: w[2],
        w23: w[3],
        gamma20: model.gamma20,
        gamma31: model.gamma31,
        gamma10_inter,
        gamma01_inter,
        method,
    };
    for (name, value) in [
        ("w01", rates.w01),
        ("w12", rates.w12),
        ("w03", rates.w03),
        ("w23", rates.w23),
        ("gamma10_inter", rates.gamma10_inter),
        ("gamma01_inter", rates.gamma01_inter),
    ] {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::Compute(format!(
                "rate {name} is not a finite nonnegative number: {value}"
            )));
        }
    }
    Ok((GeneratorMatrix::from_rate_set(&rates), rates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_channels;
    use crate::specfun::shared_cache;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn reference() -> FluxQubitModel {
        FluxQubitModel::reference()
    }

    fn strong() -> FluxQubitModel {
        FluxQubitModel::reference().with_gamma2(TAU * 1.0)
    }

    fn drive(waveform: Waveform, phi_rf: f64, omega_ghz: f64, detuning: f64) -> DriveConfig {
        DriveConfig {
            waveform,
            phi_rf,
            omega: TAU * omega_ghz,
            detuning_dc: detuning,
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn static_rate_matches_closed_form() {
        let model = reference();
        let d = drive(Waveform::Symmetric, 0.0, 0.005, 8.4);
        let ch = &build_channels(&model, &d)[1];
        assert!(ch.eps.abs() < 1e-12);
        let rate = static_rate(ch).unwrap();
        assert!(rel(rate / TAU, 0.09 * 0.09 / (2.0 * 0.11)) < 1e-14);
    }

    #[test]
    fn static_rate_falls_off_resonance() {
        let on = TransitionChannel {
            left: 1,
            right: 2,
            gap: TAU * 0.09,
            eps: 0.0,
            amp: 0.0,
            width: TAU * 0.11,
        };
        let off = TransitionChannel {
            eps: TAU * 1.0,
            ..on
        };
        assert!(static_rate(&off).unwrap() < static_rate(&on).unwrap() / 50.0);
    }

    #[test]
    fn static_rate_rejects_singular_input() {
        let ch = TransitionChannel {
            left: 1,
            right: 2,
            gap: TAU * 0.09,
            eps: 0.0,
            amp: 0.0,
            width: 0.0,
        };
        assert!(matches!(static_rate(&ch), Err(Error::Domain(_))));
    }

    #[test]
    fn lz_passage_matches_frozen_point() {
        let model = reference();
        let d = drive(Waveform::Symmetric, 8.4, 0.005, 0.05);
        let ch = &build_channels(&model, &d)[1];
        let passage = lz_probability(&model, &d, ch).unwrap();
        assert!(rel(passage.sweep_rate, 0.4570278547505042505824) < 1e-12);
        assert!(rel(passage.probability, 0.1604767077587750384823) < 1e-12);
        assert!(!passage.adiabatic_limit);
    }

    #[test]
    fn lz_crossing_phase_hits_the_crossover_first() {
        let model = reference();
        let d = drive(Waveform::Symmetric, 8.4, 0.005, 0.05);
        let ch = &build_channels(&model, &d)[1];
        let passage = lz_probability(&model, &d, ch).unwrap();
        let crossing = ch.crossover_flux(&model, d.detuning_dc);
        let flux = d.flux_at_phase(passage.crossing_phase);
        assert!((flux - crossing).abs() < 1e-9);
        let steps = 2_000_000;
        let mut first = None;
        for k in 0..steps {
            let theta = (k as f64 + 0.5) * std::f64::consts::TAU / steps as f64;
            if (d.flux_at_phase(theta) - crossing).abs() < 2e-5 {
                first = Some(theta);
                break;
            }
        }
        assert!((first.unwrap() - passage.crossing_phase).abs() < 1e-4);
    }

    #[test]
    fn lz_sweep_rate_agrees_with_finite_differences() {
        let model = reference();
        let d = drive(Waveform::OneSided, 4.2, 0.01, 0.05);
        let ch = &build_channels(&model, &d)[1];
        let passage = lz_probability(&model, &d, ch).unwrap();
        let slope_sum = ch.slope_sum(&model);
        let h = 1e-7;
        let dflux = (d.flux_at_phase(passage.crossing_phase + h)
            - d.flux_at_phase(passage.crossing_phase - h))
            / (2.0 * h);
        let fd = slope_sum * d.omega * dflux.abs();
        assert!(rel(passage.sweep_rate, fd) < 1e-6);
    }

    #[test]
    fn lz_detects_unreached_crossing() {
        let model = reference();
        let d = drive(Waveform::Symmetric, 0.1, 0.005, 0.05);
        let ch = &build_channels(&model, &d)[1];
        assert!(matches!(
            lz_probability(&model, &d, ch),
            Err(Error::NotReached(_))
        ));
    }

    #[test]
    fn lz_flags_adiabatic_turning_point() {
        let model = reference();
        let phi = 8.4 - 0.05;
        let d = drive(Waveform::Symmetric, phi, 0.005, 0.05);
        let ch = &build_channels(&model, &d)[1];
        let passage = lz_probability(&model, &d, ch).unwrap();
        assert!(passage.adiabatic_limit);
        assert_eq!(passage.probability, 1.0);
        assert_eq!(passage.sweep_rate, 0.0);
    }

    #[test]
    fn lz_zero_gap_never_transitions() {
        let model = reference();
        let d = drive(Waveform::Symmetric, 8.4, 0.005, 0.05);
        let ch = TransitionChannel {
            gap: 0.0,
            ..build_channels(&model, &d)[1]
        };
        let passage = lz_probability(&model, &d, &ch).unwrap();
        assert_eq!(passage.probability, 0.0);
    }

    #[test]
    fn driven_rate_matches_frozen_weak_point() {
        let model = reference();
        let d = drive(Waveform::Symmetric, 8.35, 0.005, 0.05);
        let ch = &build_channels(&model, &d)[1];
        let w = mdlz_rate(ch, d.waveform, d.omega, shared_cache()).unwrap();
        assert!(rel(w, 0.008092911886012947564176) < 1e-9);
    }

    #[test]
    fn driven_rate_matches_frozen_strong_points() {
        let model = strong();
        let d2 = drive(Waveform::Symmetric, 8.1, 0.005, 0.05);
        let ch2 = &build_channels(&model, &d2)[1];
        let w2 = mdlz_rate(ch2, d2.waveform, d2.omega, shared_cache()).unwrap();
        assert!(rel(w2, 0.001791305226582028784275) < 1e-9);

        let d3 = drive(Waveform::OneSided, 4.298, 0.005, 0.05);
        let ch3 = &build_channels(&model, &d3)[1];
        let w3 = mdlz_rate(ch3, d3.waveform, d3.omega, shared_cache()).unwrap();
        assert!(rel(w3, 0.004411736325739983116927) < 1e-9);
    }

    #[test]
    fn driven_rate_matches_frozen_small_argument_points() {
        let ch = TransitionChannel {
            left: 1,
            right: 2,
            gap: TAU * 0.09,
            eps: TAU * 0.3,
            amp: TAU * 1.2,
            width: TAU * 0.11,
        };
        let omega = TAU * 0.1;
        let sym = mdlz_rate(&ch, Waveform::Symmetric, omega, shared_cache()).unwrap();
        let one = mdlz_rate(&ch, Waveform::OneSided, omega, shared_cache()).unwrap();
        assert!(rel(sym, 0.02258989428789022736929) < 1e-9);
        assert!(rel(one, 0.006052553085490676825697) < 1e-9);
    }

    #[test]
    fn driven_rate_reduces_to_static_at_zero_amplitude() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1b5a_92d4);
        for _ in 0..100 {
            let ch = TransitionChannel {
                left: 1,
                right: 2,
                gap: TAU * rng.gen_range(0.001..0.6),
                eps: TAU * rng.gen_range(-20.0..20.0),
                amp: 0.0,
                width: TAU * rng.gen_range(0.01..2.0),
            };
            let omega = TAU * rng.gen_range(0.001..2.0);
            let driven = mdlz_rate(&ch, Waveform::Symmetric, omega, shared_cache()).unwrap();
            let undriven = static_rate(&ch).unwrap();
            assert_eq!(driven.to_bits(), undriven.to_bits());
        }
    }

    #[test]
    fn driven_rate_is_even_in_detuning_bitwise() {
        let model = reference();
        for (phi, omega_ghz, det) in [(8.35, 0.005, 0.05), (4.0, 0.1, 0.7), (2.0, 1.3, 2.5)] {
            let d = drive(Waveform::Symmetric, phi, omega_ghz, det);
            let ch = build_channels(&model, &d)[1];
            let flipped = TransitionChannel { eps: -ch.eps, ..ch };
            let a = mdlz_rate(&ch, Waveform::Symmetric, d.omega, shared_cache()).unwrap();
            let b = mdlz_rate(&flipped, Waveform::Symmetric, d.omega, shared_cache()).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn one_sided_rate_is_symmetric_rate_of_shifted_channel() {
        let model = reference();
        let d = drive(Waveform::OneSided, 4.298, 0.005, 0.05);
        for ch in build_channels(&model, &d) {
            let shifted = TransitionChannel {
                eps: ch.eps + ch.amp,
                ..ch
            };
            let one = mdlz_rate(&ch, Waveform::OneSided, d.omega, shared_cache()).unwrap();
            let sym = mdlz_rate(&shifted, Waveform::Symmetric, d.omega, shared_cache()).unwrap();
            assert_eq!(one.to_bits(), sym.to_bits());
        }
    }

    #[test]
    fn driven_rate_respects_lorentzian_peak_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x77aa_02e1);
        for _ in 0..40 {
            let ch = TransitionChannel {
                left: 1,
                right: 2,
                gap: TAU * rng.gen_range(0.001..0.6),
                eps: TAU * rng.gen_range(-25.0..25.0),
                amp: TAU * rng.gen_range(0.0..25.0),
                width: TAU * rng.gen_range(0.02..2.0),
            };
            let omega = TAU * rng.gen_range(0.002..2.0);
            let w = mdlz_rate(&ch, Waveform::Symmetric, omega, shared_cache()).unwrap();
            let bound = ch.gap * ch.gap / (2.0 * ch.width);
            assert!(w <= bound * (1.0 + 1e-6), "w = {w}, bound = {bound}");
        }
    }

    #[test]
    fn doubling_the_cutoff_leaves_rates_unchanged() {
        let weak = reference();
        let cases = [
            (weak, drive(Waveform::Symmetric, 8.35, 0.005, 0.05)),
            (strong(), drive(Waveform::Symmetric, 8.1, 0.005, 0.05)),
            (strong(), drive(Waveform::OneSided, 4.298, 0.005, 0.05)),
        ];
        for (model, d) in cases {
            let ch = &build_channels(&model, &d)[1];
            let n = truncation_order(ch.eps, ch.amp, ch.width, d.omega);
            let base =
                mdlz_rate_with_truncation(ch, d.waveform, d.omega, n, shared_cache()).unwrap();
            let doubled =
                mdlz_rate_with_truncation(ch, d.waveform, d.omega, 2 * n, shared_cache()).unwrap();
            assert!(rel(base, doubled) < 1e-9);
        }
    }

    #[test]
    fn driven_rate_rejects_bad_inputs() {
        let model = reference();
        let d = drive(Waveform::Symmetric, 8.35, 0.005, 0.05);
        let ch = build_channels(&model, &d)[1];
        let bad_width = TransitionChannel { width: 0.0, ..ch };
        assert!(matches!(
            mdlz_rate(&bad_width, d.waveform, d.omega, shared_cache()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            mdlz_rate(&ch, d.waveform, 0.0, shared_cache()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            mdlz_rate(&ch, d.waveform, -1.0, shared_cache()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn airy_rate_needs_slow_drive() {
        let model = reference();
        let d = drive(Waveform::OneSided, 4.298, 1.5, 0.05);
        let ch = &build_channels(&model, &d)[1];
        assert!(matches!(
            airy_rate(ch, d.omega, 1000),
            Err(Error::Validity(_))
        ));
    }

    #[test]
    fn airy_rate_tracks_bessel_rate_near_turning_point() {
        let model = strong();
        let d = drive(Waveform::OneSided, 4.298, 0.005, 0.05);
        let ch = &build_channels(&model, &d)[1];
        let n = truncation_order(ch.eps, ch.amp, ch.width, d.omega);
        let approx = airy_rate(ch, d.omega, n).unwrap();
        let exact = mdlz_rate(ch, d.waveform, d.omega, shared_cache()).unwrap();
        assert!(
            rel(approx, exact) < 0.10,
            "approx = {approx}, exact = {exact}, rel = {}",
            rel(approx, exact)
        );
    }

    #[test]
    fn airy_weight_is_negligible_far_beyond_the_turning_point() {
        let x: f64 = 4250.0;
        let scale = (2.0 / x).cbrt();
        let n = x + 50.0 * (x / 2.0).cbrt();
        let weight = scale * scale * airy_ai(scale * (n - x)).unwrap().powi(2);
        assert!(weight < 1e-12);
    }

    #[test]
    fn three_term_estimate_is_positive_across_its_validity_band() {
        let model = strong();
        let mut values = Vec::new();
        let n = 121;
        for k in 0..n {
            let omega_ghz = 0.001 * (2000.0_f64).powf(k as f64 / (n - 1) as f64);
            let d = drive(Waveform::OneSided, 4.298, omega_ghz, 0.05);
            let ch = &build_channels(&model, &d)[1];
            if ch.amp / d.omega < 10.0 {
                break;
            }
            let v = airy_rate_three_term(ch, d.omega).unwrap();
            assert!(v.is_finite() && v >= 0.0);
            values.push(v);
        }
        assert!(values.len() > 40);
        assert!(values.iter().any(|&v| v > 0.0));
    }

    #[test]
    fn interwell_pair_obeys_detailed_balance() {
        let model = reference();
        let d = drive(Waveform::Symmetric, 8.35, 0.005, 0.05);
        let (down, up) = interwell_rates(
            &model,
            &d,
            Method::Ordinary,
            InterwellActivation::ShiftedGap,
        )
        .unwrap();
        assert_eq!(down, model.gamma10_inter);
        assert!(rel(up / down, 0.8709085278224187953681) < 1e-12);
    }

    #[test]
    fn interwell_pair_mirrors_bitwise() {
        let model = reference();
        for det in [0.05, 0.7, 2.5] {
            let fwd = drive(Waveform::Symmetric, 8.35, 0.005, det);
            let bwd = drive(Waveform::Symmetric, 8.35, 0.005, -det);
            let (down_f, up_f) = interwell_rates(
                &model,
                &fwd,
                Method::Ordinary,
                InterwellActivation::ShiftedGap,
            )
            .unwrap();
            let (down_b, up_b) = interwell_rates(
                &model,
                &bwd,
                Method::Ordinary,
                InterwellActivation::ShiftedGap,
            )
            .unwrap();
            assert_eq!(down_b.to_bits(), up_f.to_bits());
            assert_eq!(up_b.to_bits(), down_f.to_bits());
        }
    }

    #[test]
    fn shifted_gap_up_rate_decreases_with_amplitude() {
        let model = strong();
        let mut last = f64::INFINITY;
        for phi in [1.0, 2.0, 3.0, 4.298, 6.0] {
            let d = drive(Waveform::OneSided, phi, 0.005, 0.05);
            let up = interwell_up_rate(&model, &d, Method::NewMethod).unwrap();
            assert!(up < last);
            last = up;
        }
    }

    #[test]
    fn crossing_referenced_up_rate_matches_its_exponent() {
        let model = reference();
        let d = drive(Waveform::OneSided, 0.3, 0.005, 0.05);
        let (down, up) = interwell_rates(
            &model,
            &d,
            Method::NewMethod,
            InterwellActivation::CrossingReferenced,
        )
        .unwrap();
        assert_eq!(down, model.gamma10_inter);
        let eps12 = (model.slope[1] + model.slope[2]) * (d.detuning_dc - model.crossover);
        let a12 = (model.slope[1] + model.slope[2]) * d.phi_rf;
        let expected = model.gamma10_inter * (-(eps12 - a12) / model.temperature).exp();
        assert!(rel(up, expected) < 1e-14);
    }

    #[test]
    fn crossing_referenced_up_rate_diverges_at_large_amplitude() {
        let model = strong();
        let d = drive(Waveform::OneSided, 4.298, 0.005, 0.05);
        let (_, up) = interwell_rates(
            &model,
            &d,
            Method::NewMethod,
            InterwellActivation::CrossingReferenced,
        )
        .unwrap();
        let (_, shifted) = interwell_rates(
            &model,
            &d,
            Method::NewMethod,
            InterwellActivation::ShiftedGap,
        )
        .unwrap();
        assert!(up > 1e10 * model.gamma10_inter);
        assert!(shifted < model.gamma10_inter);
    }

    #[test]
    fn generator_columns_sum_to_zero_exactly() {
        let model = reference();
        let d = drive(Waveform::Symmetric, 8.35, 0.005, 0.05);
        let (gen, rates) = assemble_generator(
            &model,
            &d,
            Method::Ordinary,
            InterwellActivation::ShiftedGap,
            shared_cache(),
        )
        .unwrap();
        for j in 0..4 {
            assert_eq!(gen.column_sum(j), 0.0);
        }
        assert!(rates.w01 > 0.0 && rates.w12 > 0.0 && rates.w03 > 0.0 && rates.w23 > 0.0);
        assert!(rates.gamma01_inter < rates.gamma10_inter);
    }

    #[test]
    fn generator_rejects_mismatched_waveform() {
        let model = reference();
        let d = drive(Waveform::OneSided, 8.35, 0.005, 0.05);
        assert!(matches!(
            assemble_generator(
                &model,
                &d,
                Method::Ordinary,
                InterwellActivation::ShiftedGap,
                shared_cache(),
            ),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn gap_free_model_couples_wells_only_thermally() {
        let mut model = reference();
        model.gap01 = 0.0;
        model.gap12 = 0.0;
        model.gap03 = 0.0;
        model.gap23 = 0.0;
        let d = drive(Waveform::Symmetric, 8.35, 0.005, 0.05);
        let (gen, rates) = assemble_generator(
            &model,
            &d,
            Method::Ordinary,
            InterwellActivation::ShiftedGap,
            shared_cache(),
        )
        .unwrap();
        assert_eq!(rates.w01, 0.0);
        assert_eq!(rates.w12, 0.0);
        assert_eq!(rates.w03, 0.0);
        assert_eq!(rates.w23, 0.0);
        let g = gen.entries();
        assert_eq!(g[2][1], 0.0);
        assert_eq!(g[3][0], 0.0);
        assert!(g[0][1] > 0.0 && g[1][0] > 0.0);
        assert!(g[0][2] > 0.0 && g[1][3] > 0.0);
    }

    #[test]
    fn truncation_order_scales_with_span_and_width() {
        let n = truncation_order(TAU * 132.0, TAU * 133.0, TAU * 0.11, TAU * 0.005);
        assert!(n > 53_000 && n < 54_500, "n = {n}");
        let wider = truncation_order(TAU * 132.0, TAU * 133.0, TAU * 1.05, TAU * 0.005);
        assert!(wider > n + 9_000);
    }
}
