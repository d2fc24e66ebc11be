use mapping_numbers::FieldKind;
use regularity_certify::Theorem;
use serde::{Deserialize, Serialize};

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// a closed-form bound for the continuum mapping
    Analytic,
    /// an independent computation on the same data
    Oracle,
    /// a property every reasonable implementation must have
    Sanity,
    /// recorded for inspection, never fails
    Record,
}

/// A scalar measured on a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "quantity", rename_all = "kebab-case")]
pub enum Quantity {
    /// `max |v / center - 1|` over the evaluated points, optionally only at
    /// points at least `clearance` away from the scenario's singular set
    FieldDeviation {
        kind: FieldKind,
        center: f64,
        #[serde(default)]
        clearance: f64,
    },
    FieldMax {
        kind: FieldKind,
    },
    /// largest change of the distortion fields when the target metric is
    /// multiplied by the scenario's factor
    RescaleInvariance,
    /// one for PASS, zero for FAIL
    Verdict {
        theorem: Theorem,
    },
    /// largest `integral g_j` of the certificate
    MaxEnergy {
        theorem: Theorem,
    },
    /// window energy at level `to` over the one at level `from`
    WindowEnergyRatio {
        theorem: Theorem,
        from: usize,
        to: usize,
    },
    /// closed-form jump mass of the resolved strips, `to` over `from`
    JumpMassRatio {
        from: usize,
        to: usize,
    },
    /// one when the concentrated gradient mass decays with the mass fraction
    EquiDecays {
        theorem: Theorem,
    },
    CurvePassFraction {
        theorem: Theorem,
    },
    /// fraction of sampled `(x, r)` with `0.9 avg g <= H(x, r) <= 2.2 avg g`,
    /// at radii of 16 to 32 grid cells
    DistortionBand,
    /// integral of the squared lower Lipschitz proxy
    LipEnergy,
    /// largest generalized Lipschitz number on the singular segments
    SegmentLipMax,
    /// fraction of the segment points put in the Lipschitz part
    SegmentInLipschitzPart,
    /// fraction of points away from the segments put in the distortion part
    FarInDistortionPart,
    /// the sweep value of the bound that is smallest, and where
    SweepMinimum {
        theorem: Theorem,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "value", rename_all = "kebab-case")]
pub enum Comparator {
    AtMost(f64),
    AtLeast(f64),
    Equals(f64),
    Report,
}

impl Comparator {
    pub fn holds(self, measured: f64) -> bool {
        match self {
            Comparator::AtMost(v) => measured <= v,
            Comparator::AtLeast(v) => measured >= v,
            Comparator::Equals(v) => measured == v,
            Comparator::Report => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub label: String,
    #[serde(flatten)]
    pub quantity: Quantity,
    pub comparator: Comparator,
    pub basis: Basis,
}

impl Expectation {
    pub fn new(label: &str, quantity: Quantity, comparator: Comparator, basis: Basis) -> Self {
        Self {
            label: label.to_string(),
            quantity,
            comparator,
            basis,
        }
    }
}
