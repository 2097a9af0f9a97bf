use serde::{Deserialize, Serialize};

/// Environment variable that overrides the base decision tolerance.
pub const TOLERANCE_ENV: &str = "MEMZOO_TOLERANCE";

/// Numerical thresholds shared by validation and classification.
///
/// Hermiticity is measured relative to `‖a‖_F`, positivity relative to the
/// largest eigenvalue, and the spectral cutoff relative to the largest
/// eigenvalue. The remaining fields are absolute trace-norm thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub hermiticity: f64,
    pub psd: f64,
    pub spectral_cutoff: f64,
    pub causality: f64,
    pub nonsignalling: f64,
    pub memoryless: f64,
    pub memory_measure: f64,
    pub ppt: f64,
    pub signalling: f64,
    pub channel: f64,
    pub sdp: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::with_base(1e-9)
    }
}

impl Tolerances {
    /// Derive every decision threshold from a single base value. The
    /// spectral cutoff and the SDP tolerance are not scaled.
    pub fn with_base(base: f64) -> Self {
        Self {
            hermiticity: base,
            psd: base,
            spectral_cutoff: 1e-10,
            causality: base,
            nonsignalling: base,
            memoryless: 10.0 * base,
            memory_measure: base,
            ppt: base,
            signalling: base,
            channel: 10.0 * base,
            sdp: 1e-7,
        }
    }

    /// Defaults, with the base overridden by `MEMZOO_TOLERANCE` when it holds
    /// a positive finite float.
    pub fn from_env() -> Self {
        std::env::var(TOLERANCE_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t > 0.0)
            .map(Self::with_base)
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_scaling() {
        let t = Tolerances::with_base(1e-6);
        assert_eq!(t.causality, 1e-6);
        assert!((t.memoryless - 1e-5).abs() < 1e-20);
        assert_eq!(t.spectral_cutoff, 1e-10);
        assert_eq!(Tolerances::default().causality, 1e-9);
    }
}
