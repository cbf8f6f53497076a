//! Modal smoothness indicator and the sine ramp used by the shock-capturing baseline.

use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShockCapError {
    #[error("the indicator needs degree N >= 2, got {0}")]
    DegreeTooLow(usize),
    #[error("kappa must be positive, got {0}")]
    NonPositiveKappa(f64),
    #[error("eps0 must be nonnegative, got {0}")]
    NegativeCeiling(f64),
}

/// Ramp thresholds in log10 units and the viscosity ceiling `ε0 = eps0_scale · h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndicatorConfig {
    pub s0: f64,
    pub kappa: f64,
    pub eps0_scale: f64,
}

impl IndicatorConfig {
    /// `s0 + κ = −4 log10 N`, `s0 − κ = −11 log10 N`, `ε0 = h / (2N)`.
    pub fn for_degree(n: usize) -> Result<Self, ShockCapError> {
        if n < 2 {
            return Err(ShockCapError::DegreeTooLow(n));
        }
        let l = (n as f64).log10();
        let upper = -4.0 * l;
        let lower = -11.0 * l;
        Ok(Self {
            s0: 0.5 * (upper + lower),
            kappa: 0.5 * (upper - lower),
            eps0_scale: 1.0 / (2.0 * n as f64),
        })
    }

    pub fn validate(&self) -> Result<(), ShockCapError> {
        if !(self.kappa > 0.0) {
            return Err(ShockCapError::NonPositiveKappa(self.kappa));
        }
        if !(self.eps0_scale >= 0.0) {
            return Err(ShockCapError::NegativeCeiling(self.eps0_scale));
        }
        Ok(())
    }
}

/// `max(S̃ᴺ, S̃ᴺ⁻¹)` from orthonormal modal coefficients and their total degrees.
///
/// `S̃ᴺ` is the energy in the top degree band over the total energy; `S̃ᴺ⁻¹`
/// repeats that after discarding the top band.
pub fn smoothness_indicator(modes: &[f64], mode_degree: &[usize]) -> f64 {
    let n = mode_degree.iter().copied().max().unwrap_or(0);
    let band = |deg_max: usize| -> f64 {
        let mut top = 0.0;
        let mut total = 0.0;
        for (c, &d) in modes.iter().zip(mode_degree) {
            if d > deg_max {
                continue;
            }
            total += c * c;
            if d == deg_max {
                top += c * c;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            top / total
        }
    };
    if n == 0 {
        return 0.0;
    }
    band(n).max(band(n - 1))
}

/// Three-branch sine ramp in `s = log10 S`.
pub fn ramp_viscosity(indicator: f64, cfg: &IndicatorConfig, eps0: f64) -> f64 {
    if indicator <= 0.0 {
        return 0.0;
    }
    let s = indicator.log10();
    if s < cfg.s0 - cfg.kappa {
        0.0
    } else if s > cfg.s0 + cfg.kappa {
        eps0
    } else {
        0.5 * eps0 * (1.0 + (PI * (s - cfg.s0) / (2.0 * cfg.kappa)).sin())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_for_degree_five() {
        let c = IndicatorConfig::for_degree(5).unwrap();
        let l = 5f64.log10();
        assert!((c.s0 + c.kappa + 4.0 * l).abs() < 1e-14);
        assert!((c.s0 - c.kappa + 11.0 * l).abs() < 1e-14);
        // quoted to three decimals as −2.796 and ≈ −7.690
        assert!((c.s0 + c.kappa - (-2.796)).abs() < 1e-3);
        assert!((c.s0 - c.kappa - (-7.690)).abs() < 2e-3);
        assert!((c.eps0_scale - 0.1).abs() < 1e-15);
        assert!(IndicatorConfig::for_degree(1).is_err());
    }

    #[test]
    fn ramp_branches() {
        let c = IndicatorConfig::for_degree(3).unwrap();
        let at = |s: f64| ramp_viscosity(10f64.powf(s), &c, 2.0);
        assert_eq!(at(c.s0 + 2.0 * c.kappa), 2.0);
        assert!((at(c.s0) - 1.0).abs() < 1e-12);
        assert_eq!(at(c.s0 - 2.0 * c.kappa), 0.0);
        assert_eq!(ramp_viscosity(0.0, &c, 2.0), 0.0);
    }

    #[test]
    fn ramp_is_monotone_and_continuous() {
        let c = IndicatorConfig::for_degree(4).unwrap();
        let mut prev = 0.0;
        let n = 20_000;
        let (a, b) = (c.s0 - 2.0 * c.kappa, c.s0 + 2.0 * c.kappa);
        for i in 0..=n {
            let s = a + (b - a) * i as f64 / n as f64;
            let e = ramp_viscosity(10f64.powf(s), &c, 1.0);
            assert!(e >= prev - 1e-15);
            assert!(e - prev < 1e-3, "jump at s = {s}");
            prev = e;
        }
    }

    #[test]
    fn indicator_extremes() {
        let deg = [0, 1, 2, 3];
        assert_eq!(smoothness_indicator(&[2.0, 0.0, 0.0, 0.0], &deg), 0.0);
        assert_eq!(smoothness_indicator(&[0.0, 0.0, 0.0, 1.5], &deg), 1.0);
        // S̃^{N-1} dominates when the next-to-top band carries the energy
        let s = smoothness_indicator(&[1.0, 0.0, 1.0, 0.0], &deg);
        assert!((s - 0.5).abs() < 1e-15);
        assert_eq!(smoothness_indicator(&[0.0; 4], &deg), 0.0);
    }
}
