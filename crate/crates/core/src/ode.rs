//! Embedded Dormand–Prince 5(4) integrator for autonomous linear systems.
//!
//! The local error estimate is measured in the ℓ¹ norm, which for probability
//! vectors bounds the per-step contribution to total-variation error.

use crate::error::{MoeError, Result};

// Stage nodes are not needed: the right-hand side never depends on t.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct DormandPrince {
    /// Maximum ℓ¹ local error per step.
    pub tolerance: f64,
    pub max_steps: usize,
}

impl Default for DormandPrince {
    fn default() -> Self {
        DormandPrince {
            tolerance: 1e-12,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
}

impl DormandPrince {
    pub fn with_tolerance(tolerance: f64) -> Self {
        DormandPrince {
            tolerance,
            ..Default::default()
        }
    }

    /// Integrates `y' = rhs(y)` from 0 to `t_end`.
    ///
    /// `scale_hint` is an estimate of the largest rate in the system and
    /// seeds the first step size.
    pub fn integrate<F>(
        &self,
        mut rhs: F,
        y0: &[f64],
        t_end: f64,
        scale_hint: f64,
    ) -> Result<(Vec<f64>, IntegrationStats)>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let n = y0.len();
        let mut stats = IntegrationStats::default();
        let mut y = y0.to_vec();
        if t_end == 0.0 {
            return Ok((y, stats));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(MoeError::Integrator(format!("bad end time {t_end}")));
        }

        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut k5 = vec![0.0; n];
        let mut k6 = vec![0.0; n];
        let mut k7 = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        let mut y_new = vec![0.0; n];

        rhs(&y, &mut k1);
        let mut t = 0.0;
        let mut h = (0.5 / scale_hint.max(1e-12)).min(t_end);

        while t < t_end {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(MoeError::Integrator(format!(
                    "step budget {} exhausted at t = {t}",
                    self.max_steps
                )));
            }
            let last = t + h >= t_end;
            if last {
                h = t_end - t;
            }

            for i in 0..n {
                tmp[i] = y[i] + h * A21 * k1[i];
            }
            rhs(&tmp, &mut k2);
            for i in 0..n {
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            rhs(&tmp, &mut k3);
            for i in 0..n {
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            rhs(&tmp, &mut k4);
            for i in 0..n {
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            rhs(&tmp, &mut k5);
            for i in 0..n {
                tmp[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            rhs(&tmp, &mut k6);
            for i in 0..n {
                y_new[i] = y[i]
                    + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            rhs(&y_new, &mut k7);

            let err: f64 = (0..n)
                .map(|i| {
                    (h * (E1 * k1[i]
                        + E3 * k3[i]
                        + E4 * k4[i]
                        + E5 * k5[i]
                        + E6 * k6[i]
                        + E7 * k7[i]))
                        .abs()
                })
                .sum();
            if !err.is_finite() {
                return Err(MoeError::Integrator(format!("non-finite error estimate at t = {t}")));
            }

            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * (self.tolerance / err).powf(0.2)).clamp(0.2, 5.0)
            };
            if err <= self.tolerance {
                stats.accepted += 1;
                t = if last { t_end } else { t + h };
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                h *= factor;
            } else {
                stats.rejected += 1;
                h *= factor.min(0.9);
                if h < 1e-300 {
                    return Err(MoeError::Integrator("step size underflow".into()));
                }
            }
        }
        Ok((y, stats))
    }
}
