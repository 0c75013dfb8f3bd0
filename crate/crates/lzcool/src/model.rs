//! Device model: four flux states in a double well (|1>, |3> in the left well,
//! |0>, |2> in the right well), their linear flux dispersion, avoided-crossing
//! gaps, and decoherence rates.
//!
//! Every energy-like quantity is an angular frequency in rad/ns (rad GHz): a
//! splitting quoted as f GHz enters as `TAU * f`. Flux detunings and drive
//! amplitudes are in mPhi0, slopes in rad GHz per mPhi0, and the bath
//! temperature is converted to the same angular scale through k_B/h.

use std::f64::consts::TAU;

use crate::error::Error;

/// k_B/h in GHz per kelvin.
pub const KB_OVER_H_GHZ_PER_K: f64 = 20.8366;

/// Convert a bath temperature in millikelvin to an angular frequency in rad GHz.
pub fn temperature_from_millikelvin(t_mk: f64) -> Result<f64, Error> {
    if !t_mk.is_finite() || t_mk <= 0.0 {
        return Err(Error::Domain(format!(
            "temperature must be positive and finite, got {t_mk} mK"
        )));
    }
    Ok(TAU * KB_OVER_H_GHZ_PER_K * t_mk / 1000.0)
}

/// Static device parameters.
///
/// States |1> and |3> disperse upward with flux detuning, |0> and |2> downward.
/// Zero detuning is the |0>-|1> degeneracy point; the |1>-|2> crossing sits at
/// +`crossover` and the |0>-|3> crossing at -`crossover`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FluxQubitModel {
    /// Energy-slope magnitudes |d eps_i / d flux| for states 0..3, rad GHz per mPhi0.
    pub slope: [f64; 4],
    /// Avoided-crossing gap between |0> and |1>, rad GHz.
    pub gap01: f64,
    /// Avoided-crossing gap between |1> and |2>, rad GHz.
    pub gap12: f64,
    /// Avoided-crossing gap between |0> and |3>, rad GHz.
    pub gap03: f64,
    /// Avoided-crossing gap between |2> and |3>, rad GHz.
    pub gap23: f64,
    /// Intrawell crossing offset, mPhi0 (> 0).
    pub crossover: f64,
    /// Intrawell relaxation rate |2> -> |0>, rad GHz.
    pub gamma20: f64,
    /// Intrawell relaxation rate |3> -> |1>, rad GHz.
    pub gamma31: f64,
    /// Base interwell relaxation rate between |1> and |0>, rad GHz.
    pub gamma10_inter: f64,
    /// Dephasing rate entering every transition linewidth, rad GHz.
    pub gamma2: f64,
    /// Bath temperature as an angular frequency, rad GHz.
    pub temperature: f64,
}

impl FluxQubitModel {
    /// Reference device used by the bundled figure presets.
    pub fn reference() -> Self {
        Self {
            slope: [TAU * 1.44, TAU * 1.44, TAU * 1.09, TAU * 1.09],
            gap01: TAU * 0.013,
            gap12: TAU * 0.09,
            gap03: TAU * 0.09,
            gap23: TAU * 0.5,
            crossover: 8.4,
            gamma20: TAU * 0.1,
            gamma31: TAU * 0.1,
            gamma10_inter: TAU * 5.0e-5,
            gamma2: TAU * 0.06,
            temperature: temperature_from_millikelvin(50.0).expect("50 mK is valid"),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let named = [
            ("gap01", self.gap01),
            ("gap12", self.gap12),
            ("gap03", self.gap03),
            ("gap23", self.gap23),
            ("gamma20", self.gamma20),
            ("gamma31", self.gamma31),
            ("gamma10_inter", self.gamma10_inter),
            ("gamma2", self.gamma2),
        ];
        for (name, v) in named {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        for (i, s) in self.slope.iter().enumerate() {
            if !s.is_finite() || *s < 0.0 {
                return Err(Error::Domain(format!(
                    "slope[{i}] must be finite and nonnegative, got {s}"
                )));
            }
        }
        if !self.crossover.is_finite() || self.crossover <= 0.0 {
            return Err(Error::Domain(format!(
                "crossover must be positive, got {}",
                self.crossover
            )));
        }
        if !self.temperature.is_finite() || self.temperature <= 0.0 {
            return Err(Error::Domain(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        Ok(())
    }

    pub fn with_gamma2(mut self, gamma2: f64) -> Self {
        self.gamma2 = gamma2;
        self
    }

    /// Zero-detuning energy of the |2> crossing branch, rad GHz.
    pub fn eps_star2(&self) -> f64 {
        (self.slope[1] + self.slope[2]) * self.crossover
    }

    /// Zero-detuning energy of the |3> crossing branch, rad GHz.
    pub fn eps_star3(&self) -> f64 {
        (self.slope[0] + self.slope[3]) * self.crossover
    }

    /// dc energy of level `i` at a flux detuning: left-well states rise,
    /// right-well states fall.
    pub fn level_energy(&self, i: usize, detuning: f64) -> f64 {
        let star = match i {
            2 => self.eps_star2(),
            3 => self.eps_star3(),
            _ => 0.0,
        };
        match i {
            1 | 3 => star + self.slope[i] * detuning,
            _ => star - self.slope[i] * detuning,
        }
    }

    /// Interwell splitting eps_1 - eps_0 at a dc detuning, rad GHz.
    pub fn interwell_splitting(&self, detuning: f64) -> f64 {
        (self.slope[0] + self.slope[1]) * detuning
    }

    /// True when flux reflection about zero detuning maps the device onto
    /// itself under the state relabeling 0<->1, 2<->3.
    pub fn is_mirror_symmetric(&self) -> bool {
        self.slope[0] == self.slope[1]
            && self.slope[2] == self.slope[3]
            && self.gamma20 == self.gamma31
    }
}

/// Shape of the microwave flux drive added to the dc detuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Waveform {
    /// detuning_dc + phi_rf * sin(omega t): excursion symmetric about the dc point.
    Symmetric,
    /// detuning_dc + phi_rf * (1 + sin(omega t)): excursion entirely above the dc point.
    OneSided,
}

/// Microwave drive settings.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DriveConfig {
    pub waveform: Waveform,
    /// Drive amplitude, mPhi0 (>= 0).
    pub phi_rf: f64,
    /// Angular drive frequency, rad GHz (> 0).
    pub omega: f64,
    /// dc flux detuning from the interwell degeneracy point, mPhi0.
    pub detuning_dc: f64,
}

impl DriveConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !self.phi_rf.is_finite() || self.phi_rf < 0.0 {
            return Err(Error::Domain(format!(
                "phi_rf must be finite and nonnegative, got {}",
                self.phi_rf
            )));
        }
        if !self.omega.is_finite() || self.omega <= 0.0 {
            return Err(Error::Domain(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if !self.detuning_dc.is_finite() {
            return Err(Error::Domain("detuning_dc must be finite".into()));
        }
        Ok(())
    }

    /// Instantaneous flux detuning at drive phase `omega * t`.
    pub fn flux_at_phase(&self, phase: f64) -> f64 {
        match self.waveform {
            Waveform::Symmetric => self.detuning_dc + self.phi_rf * phase.sin(),
            Waveform::OneSided => self.detuning_dc + self.phi_rf * (1.0 + phase.sin()),
        }
    }

    /// Lowest and highest flux reached over one drive period.
    pub fn flux_range(&self) -> (f64, f64) {
        match self.waveform {
            Waveform::Symmetric => (
                self.detuning_dc - self.phi_rf,
                self.detuning_dc + self.phi_rf,
            ),
            Waveform::OneSided => (self.detuning_dc, self.detuning_dc + 2.0 * self.phi_rf),
        }
    }
}

/// One interwell avoided crossing dressed with the dc bias and drive it sees:
/// `left` in {1, 3}, `right` in {0, 2}.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TransitionChannel {
    pub left: usize,
    pub right: usize,
    /// Avoided-crossing gap, rad GHz.
    pub gap: f64,
    /// dc energy detuning eps_left - eps_right, rad GHz.
    pub eps: f64,
    /// Drive amplitude in energy, (slope_left + slope_right) * phi_rf, rad GHz.
    pub amp: f64,
    /// Lorentzian linewidth: gamma2 plus half the intrawell decay out of the pair, rad GHz.
    pub width: f64,
}

impl TransitionChannel {
    /// Combined slope of the pair, rad GHz per mPhi0.
    pub fn slope_sum(&self, model: &FluxQubitModel) -> f64 {
        model.slope[self.left] + model.slope[self.right]
    }

    /// Flux detuning at which this channel's levels cross.
    pub fn crossover_flux(&self, model: &FluxQubitModel, detuning_dc: f64) -> f64 {
        detuning_dc - self.eps / self.slope_sum(model)
    }
}

/// The four interwell channels (1,0), (1,2), (3,0), (3,2) at the drive's dc bias.
pub fn build_channels(model: &FluxQubitModel, drive: &DriveConfig) -> [TransitionChannel; 4] {
    let m = &model.slope;
    let d = drive.detuning_dc;
    let ch = |left: usize, right: usize, gap: f64, eps: f64, relax: f64| TransitionChannel {
        left,
        right,
        gap,
        eps,
        amp: (m[left] + m[right]) * drive.phi_rf,
        width: model.gamma2 + relax,
    };
    [
        ch(1, 0, model.gap01, (m[0] + m[1]) * d, 0.0),
        ch(
            1,
            2,
            model.gap12,
            (m[1] + m[2]) * (d - model.crossover),
            model.gamma20 / 2.0,
        ),
        ch(
            3,
            0,
            model.gap03,
            (m[0] + m[3]) * (d + model.crossover),
            model.gamma31 / 2.0,
        ),
        ch(
            3,
            2,
            model.gap23,
            (m[2] + m[3]) * d + (model.eps_star3() - model.eps_star2()),
            (model.gamma20 + model.gamma31) / 2.0,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drive_at(detuning_dc: f64) -> DriveConfig {
        DriveConfig {
            waveform: Waveform::Symmetric,
            phi_rf: 8.4,
            omega: TAU * 0.005,
            detuning_dc,
        }
    }

    #[test]
    fn temperature_conversion() {
        let t = temperature_from_millikelvin(50.0).unwrap();
        assert!((t - 6.546010948578909).abs() < 1e-12, "got {t}");
        assert!((t / TAU - 1.04183).abs() < 1e-6);
        assert!(temperature_from_millikelvin(0.0).is_err());
        assert!(temperature_from_millikelvin(-3.0).is_err());
        assert!(temperature_from_millikelvin(f64::NAN).is_err());
    }

    #[test]
    fn reference_device_is_valid_and_mirror_symmetric() {
        let m = FluxQubitModel::reference();
        m.validate().unwrap();
        assert!(m.is_mirror_symmetric());
        assert!(m.with_gamma2(TAU).is_mirror_symmetric());
        let mut asym = m;
        asym.slope[0] = TAU * 1.5;
        assert!(!asym.is_mirror_symmetric());
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let mut m = FluxQubitModel::reference();
        m.gap12 = -1.0;
        let err = m.validate().unwrap_err().to_string();
        assert!(err.contains("gap12"), "{err}");

        let mut m = FluxQubitModel::reference();
        m.crossover = 0.0;
        assert!(m.validate().is_err());

        let mut m = FluxQubitModel::reference();
        m.temperature = f64::INFINITY;
        assert!(m.validate().is_err());

        let mut m = FluxQubitModel::reference();
        m.slope[2] = f64::NAN;
        assert!(m.validate().is_err());
    }

    #[test]
    fn channel_detunings_match_geometry() {
        let m = FluxQubitModel::reference();

        // At the 1-2 crossing the channel detuning vanishes exactly.
        let ch = build_channels(&m, &drive_at(8.4));
        assert_eq!(ch[1].eps, 0.0);

        // Interwell splitting at 0.05 mPhi0 is TAU * 2.88 * 0.05.
        let ch = build_channels(&m, &drive_at(0.05));
        assert!(
            (ch[0].eps - 0.9047786842338605).abs() < 1e-12,
            "{}",
            ch[0].eps
        );

        // The 3-2 channel is linear in detuning with slope m2 + m3 and passes
        // through eps_star3 - eps_star2 at zero detuning.
        let ch0 = build_channels(&m, &drive_at(0.0));
        assert!((ch0[3].eps - (m.eps_star3() - m.eps_star2())).abs() < 1e-12);
        let d = 0.37;
        let chd = build_channels(&m, &drive_at(d));
        assert!((chd[3].eps - ch0[3].eps - (m.slope[2] + m.slope[3]) * d).abs() < 1e-9);
    }

    #[test]
    fn channel_widths_and_amps() {
        let m = FluxQubitModel::reference();
        let ch = build_channels(&m, &drive_at(0.05));
        assert_eq!(ch[0].width, m.gamma2);
        assert_eq!(ch[1].width, m.gamma2 + m.gamma20 / 2.0);
        assert_eq!(ch[2].width, m.gamma2 + m.gamma31 / 2.0);
        assert_eq!(ch[3].width, m.gamma2 + (m.gamma20 + m.gamma31) / 2.0);
        assert!((ch[1].width / TAU - 0.11).abs() < 1e-12);
        for c in &ch {
            assert!((c.amp - (m.slope[c.left] + m.slope[c.right]) * 8.4).abs() == 0.0);
        }
    }

    #[test]
    fn mirror_relation_between_side_channels() {
        let m = FluxQubitModel::reference();
        for d in [-2.0, -0.3, 0.0, 0.05, 1.7] {
            let pos = build_channels(&m, &drive_at(d));
            let neg = build_channels(&m, &drive_at(-d));
            // eps_12(-d) = -eps_30(d) holds exactly for a mirror-symmetric device.
            assert_eq!(neg[1].eps, -pos[2].eps, "detuning {d}");
            assert_eq!(neg[0].eps, -pos[0].eps);
            assert_eq!(neg[3].eps, -pos[3].eps);
        }
    }

    #[test]
    fn channel_crossover_flux() {
        let m = FluxQubitModel::reference();
        let ch = build_channels(&m, &drive_at(0.05));
        assert!((ch[0].crossover_flux(&m, 0.05) - 0.0).abs() < 1e-12);
        assert!((ch[1].crossover_flux(&m, 0.05) - 8.4).abs() < 1e-12);
        assert!((ch[2].crossover_flux(&m, 0.05) + 8.4).abs() < 1e-12);
        assert!((ch[3].crossover_flux(&m, 0.05) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn channel_construction_is_pure() {
        let m = FluxQubitModel::reference();
        let a = build_channels(&m, &drive_at(0.923));
        let b = build_channels(&m, &drive_at(0.923));
        assert_eq!(a, b);
    }

    #[test]
    fn level_energies_cross_where_expected() {
        let m = FluxQubitModel::reference();
        // 1-2 degeneracy at +crossover, 0-3 at -crossover.
        let e1 = m.level_energy(1, m.crossover);
        let e2 = m.level_energy(2, m.crossover);
        assert!((e1 - e2).abs() < 1e-9);
        let e0 = m.level_energy(0, -m.crossover);
        let e3 = m.level_energy(3, -m.crossover);
        assert!((e0 - e3).abs() < 1e-9);
        assert_eq!(m.level_energy(0, 0.0), 0.0);
        assert_eq!(m.level_energy(1, 0.0), 0.0);
    }

    #[test]
    fn drive_flux_range() {
        let d = drive_at(0.05);
        let (lo, hi) = d.flux_range();
        assert_eq!((lo, hi), (0.05 - 8.4, 0.05 + 8.4));
        let one_sided = DriveConfig {
            waveform: Waveform::OneSided,
            ..d
        };
        let (lo, hi) = one_sided.flux_range();
        assert_eq!((lo, hi), (0.05, 0.05 + 16.8));
        assert!((one_sided.flux_at_phase(0.0) - (0.05 + 8.4)).abs() < 1e-12);
        assert!((d.flux_at_phase(0.0) - 0.05).abs() < 1e-12);

        let bad = DriveConfig { phi_rf: -1.0, ..d };
        assert!(bad.validate().is_err());
        let bad = DriveConfig { omega: 0.0, ..d };
        assert!(bad.validate().is_err());
    }
}
