//! Path gain: the dimensionless received-to-transmitted power ratio with
//! antenna gains normalized out, `P_R / (P_T G_T G_R)`.

/// A linear power ratio together with its dB view.
///
/// The dB value is always derived from the stored linear value, so the two
/// can never drift apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGain {
    linear: f64,
}

impl PathGain {
    /// Wrap a linear power ratio. Panics on negative or non-finite input;
    /// every model in this crate produces finite non-negative ratios.
    pub fn from_linear(linear: f64) -> Self {
        assert!(
            linear.is_finite() && linear >= 0.0,
            "path gain must be finite and non-negative, got {linear}"
        );
        Self { linear }
    }

    /// The linear power ratio.
    pub fn linear(&self) -> f64 {
        self.linear
    }

    /// `10 log10(linear)`; negative infinity for a zero ratio.
    pub fn db(&self) -> f64 {
        10.0 * self.linear.log10()
    }

    /// Incoherent (power) sum of several contributions.
    pub fn sum<I: IntoIterator<Item = PathGain>>(gains: I) -> PathGain {
        PathGain::from_linear(gains.into_iter().map(|g| g.linear).sum())
    }
}
