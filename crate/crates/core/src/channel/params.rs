use serde::Serialize;

use crate::error::{MoeError, Result};

/// Slack on the physicality condition `y >= |τ - 1|`.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-12;

/// Rates and duration of the semigroup `exp(t (γ₊ L₊ + γ₋ L₋))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LindbladSpec {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub t: f64,
}

impl LindbladSpec {
    pub fn new(gamma_plus: f64, gamma_minus: f64, t: f64) -> Result<Self> {
        for (name, v) in [("gamma_plus", gamma_plus), ("gamma_minus", gamma_minus), ("t", t)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(MoeError::param(name, v, "must be finite and non-negative"));
            }
        }
        Ok(LindbladSpec {
            gamma_plus,
            gamma_minus,
            t,
        })
    }

    /// Zero time or vanishing rates; the channel acts as the identity.
    pub fn is_identity(&self) -> bool {
        self.t == 0.0 || (self.gamma_plus == 0.0 && self.gamma_minus == 0.0)
    }

    /// Positive time with both rates zero: legal, but almost always a
    /// configuration mistake.
    pub fn is_degenerate(&self) -> bool {
        self.t > 0.0 && self.gamma_plus == 0.0 && self.gamma_minus == 0.0
    }

    pub fn with_time(&self, t: f64) -> Result<Self> {
        LindbladSpec::new(self.gamma_plus, self.gamma_minus, t)
    }

    /// Largest exit rate of the truncated generator, `γ₊ dim + γ₋ (dim-1)`.
    pub fn max_rate(&self, dim: usize) -> f64 {
        self.gamma_plus * dim as f64 + self.gamma_minus * dim.saturating_sub(1) as f64
    }

    /// Characteristic-function parameters of the channel.
    ///
    /// The mean photon number obeys `n' = (γ₊ - γ₋) n + γ₊`; matching its
    /// solution with `(τ(2n+1) + y - 1)/2` gives `τ = e^{ct}` and
    /// `y = 2γ₊ (e^{ct} - 1)/c - (τ - 1)` with `c = γ₊ - γ₋`.
    pub fn to_params(&self) -> ChannelParams {
        let ct = (self.gamma_plus - self.gamma_minus) * self.t;
        let growth = ct.exp_m1();
        let phi = if ct == 0.0 { 1.0 } else { growth / ct };
        let tau = ct.exp();
        let y = 2.0 * self.gamma_plus * self.t * phi - growth;
        ChannelParams {
            tau,
            y: y.max(0.0),
        }
    }

    /// A generator realizing covariant parameters `(τ, y)` at unit time.
    ///
    /// Uses `c = ln τ`, so the rates stay bounded as `τ → 1`.
    pub fn from_params(params: ChannelParams) -> Result<Self> {
        let d = params.tau - 1.0;
        let c = d.ln_1p();
        let ratio = if d == 0.0 { 1.0 } else { c / d };
        let gamma_plus = 0.5 * (params.y + d) * ratio;
        let gamma_minus = gamma_plus - c;
        LindbladSpec::new(gamma_plus.max(0.0), gamma_minus.max(0.0), 1.0)
    }

    /// Mean photon number of the output for a thermal input of mean `nbar`.
    pub fn thermal_output_nbar(&self, nbar: f64) -> Result<f64> {
        self.to_params().thermal_output_nbar(nbar)
    }
}

/// Characteristic-function parameterization `χ(ξ) ↦ χ(√τ ξ) e^{-y|ξ|²/2}`
/// of a gauge-covariant channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    pub tau: f64,
    pub y: f64,
}

impl ChannelParams {
    pub fn new(tau: f64, y: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(MoeError::param("tau", tau, "covariant channels need tau > 0"));
        }
        if !y.is_finite() || y < (tau - 1.0).abs() - PHYSICALITY_TOLERANCE {
            return Err(MoeError::param(
                "y",
                y,
                format!("not a physical channel: need y >= |tau - 1| = {}", (tau - 1.0).abs()),
            ));
        }
        Ok(ChannelParams { tau, y })
    }

    /// `(τ(2n̄+1) + y - 1)/2`, the output mean photon number for a thermal
    /// input.
    pub fn thermal_output_nbar(&self, nbar: f64) -> Result<f64> {
        if !(nbar.is_finite() && nbar >= 0.0) {
            return Err(MoeError::param("nbar", nbar, "must be finite and non-negative"));
        }
        let out = 0.5 * (self.tau * (2.0 * nbar + 1.0) + self.y - 1.0);
        if out < -1e-12 {
            return Err(MoeError::param(
                "y",
                self.y,
                format!("thermal output mean {out} is negative"),
            ));
        }
        Ok(out.max(0.0))
    }

    pub fn is_quantum_limited(&self) -> bool {
        (self.y - (self.tau - 1.0).abs()).abs() <= PHYSICALITY_TOLERANCE
    }
}

/// Named channel families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChannelKind {
    /// Transmissivity `eta` in (0, 1), thermal environment of mean `noise`.
    Loss { eta: f64, noise: f64 },
    /// Gain `kappa` > 1, thermal environment of mean `noise`.
    Amplifier { kappa: f64, noise: f64 },
    /// Unit gain, added noise `noise`.
    Additive { noise: f64 },
}

impl ChannelKind {
    pub fn validate(&self) -> Result<()> {
        let noise = match *self {
            ChannelKind::Loss { eta, noise } => {
                if !(eta > 0.0 && eta < 1.0) {
                    return Err(MoeError::param("eta", eta, "transmissivity must lie in (0, 1)"));
                }
                noise
            }
            ChannelKind::Amplifier { kappa, noise } => {
                if !(kappa.is_finite() && kappa > 1.0) {
                    return Err(MoeError::param("kappa", kappa, "gain must exceed 1"));
                }
                noise
            }
            ChannelKind::Additive { noise } => noise,
        };
        if !(noise.is_finite() && noise >= 0.0) {
            return Err(MoeError::param("noise", noise, "must be finite and non-negative"));
        }
        Ok(())
    }

    pub fn lindblad(&self) -> Result<LindbladSpec> {
        self.validate()?;
        match *self {
            ChannelKind::Loss { eta, noise } => LindbladSpec::new(noise, noise + 1.0, -eta.ln()),
            ChannelKind::Amplifier { kappa, noise } => {
                LindbladSpec::new(noise + 1.0, noise, kappa.ln())
            }
            ChannelKind::Additive { noise } => LindbladSpec::new(1.0, 1.0, noise),
        }
    }

    pub fn params(&self) -> Result<ChannelParams> {
        self.validate()?;
        let (tau, y) = match *self {
            ChannelKind::Loss { eta, noise } => (eta, (1.0 - eta) * (2.0 * noise + 1.0)),
            ChannelKind::Amplifier { kappa, noise } => (kappa, (kappa - 1.0) * (2.0 * noise + 1.0)),
            ChannelKind::Additive { noise } => (1.0, 2.0 * noise),
        };
        ChannelParams::new(tau, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn lindblad_dictionary() {
        let loss = ChannelKind::Loss { eta: 0.5, noise: 0.0 }.lindblad().unwrap();
        assert_eq!((loss.gamma_plus, loss.gamma_minus), (0.0, 1.0));
        assert_abs_diff_eq!(loss.t, LN2, epsilon = 1e-15);

        let amp = ChannelKind::Amplifier { kappa: 2.0, noise: 0.0 }.lindblad().unwrap();
        assert_eq!((amp.gamma_plus, amp.gamma_minus), (1.0, 0.0));
        assert_abs_diff_eq!(amp.t, LN2, epsilon = 1e-15);

        let add = ChannelKind::Additive { noise: 0.3 }.lindblad().unwrap();
        assert_eq!((add.gamma_plus, add.gamma_minus, add.t), (1.0, 1.0, 0.3));
    }

    #[test]
    fn parameter_dictionary() {
        let p = ChannelKind::Loss { eta: 0.5, noise: 0.0 }.params().unwrap();
        assert_eq!((p.tau, p.y), (0.5, 0.5));
        let p = ChannelKind::Amplifier { kappa: 2.0, noise: 0.0 }.params().unwrap();
        assert_eq!((p.tau, p.y), (2.0, 1.0));
        let p = ChannelKind::Additive { noise: 0.3 }.params().unwrap();
        assert_eq!((p.tau, p.y), (1.0, 0.6));
    }

    #[test]
    fn out_of_range_kinds_rejected() {
        assert!(ChannelKind::Loss { eta: 1.0, noise: 0.0 }.lindblad().is_err());
        assert!(ChannelKind::Loss { eta: 0.0, noise: 0.0 }.lindblad().is_err());
        assert!(ChannelKind::Amplifier { kappa: 1.0, noise: 0.0 }.lindblad().is_err());
        assert!(ChannelKind::Additive { noise: -0.1 }.lindblad().is_err());
        assert!(LindbladSpec::new(-1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn unphysical_params_rejected() {
        assert!(ChannelParams::new(2.0, 0.5).is_err());
        assert!(ChannelParams::new(-1.0, 3.0).is_err());
        assert!(ChannelParams::new(0.5, 0.5).unwrap().is_quantum_limited());
    }

    #[test]
    fn thermal_output_closed_forms() {
        let loss = ChannelKind::Loss { eta: 0.3, noise: 0.7 }.params().unwrap();
        assert_abs_diff_eq!(
            loss.thermal_output_nbar(2.0).unwrap(),
            0.3 * 2.0 + 0.7 * 0.7,
            epsilon = 1e-14
        );
        let amp = ChannelKind::Amplifier { kappa: 2.0, noise: 0.0 }.params().unwrap();
        assert_abs_diff_eq!(amp.thermal_output_nbar(0.0).unwrap(), 1.0, epsilon = 1e-15);
        let add = ChannelKind::Additive { noise: 0.4 }.params().unwrap();
        assert_abs_diff_eq!(add.thermal_output_nbar(1.5).unwrap(), 1.9, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_spec_flagged() {
        assert!(LindbladSpec::new(0.0, 0.0, 1.0).unwrap().is_degenerate());
        assert!(LindbladSpec::new(0.0, 0.0, 1.0).unwrap().is_identity());
        assert!(!LindbladSpec::new(1.0, 0.0, 1.0).unwrap().is_degenerate());
    }

    fn kind_strategy() -> impl Strategy<Value = ChannelKind> {
        prop_oneof![
            (0.01f64..0.99, 0.0f64..3.0).prop_map(|(eta, noise)| ChannelKind::Loss { eta, noise }),
            (1.01f64..5.0, 0.0f64..3.0)
                .prop_map(|(kappa, noise)| ChannelKind::Amplifier { kappa, noise }),
            (0.0f64..3.0).prop_map(|noise| ChannelKind::Additive { noise }),
        ]
    }

    proptest! {
        #[test]
        fn lindblad_and_params_agree(kind in kind_strategy()) {
            let direct = kind.params().unwrap();
            let via = kind.lindblad().unwrap().to_params();
            prop_assert!((direct.tau - via.tau).abs() <= 1e-12 * direct.tau);
            prop_assert!((direct.y - via.y).abs() <= 1e-12 * (1.0 + direct.y));
            prop_assert!(direct.y >= (direct.tau - 1.0).abs() - 1e-12);
        }

        #[test]
        fn from_params_round_trips(kind in kind_strategy()) {
            let params = kind.params().unwrap();
            let spec = LindbladSpec::from_params(params).unwrap();
            let back = spec.to_params();
            prop_assert!((back.tau - params.tau).abs() <= 1e-12 * params.tau);
            prop_assert!((back.y - params.y).abs() <= 1e-11 * (1.0 + params.y));
        }
    }
}
