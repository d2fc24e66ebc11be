use serde::{Deserialize, Serialize};

use crate::{CertifyError, Result};

/// Structural constants of the domain and target the energy bounds depend on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// doubling constant `C_d`
    pub doubling: f64,
    /// two-sided regularity constant `C_Omega`
    pub regularity: f64,
    /// dimension exponent `Q`
    pub q: f64,
    /// ball enlargement `M`
    pub spread: f64,
}

impl Constants {
    pub fn new(doubling: f64, regularity: f64, q: f64, spread: f64) -> Result<Self> {
        if !(doubling >= 1.0) || !doubling.is_finite() {
            return Err(CertifyError::InvalidParameter(format!(
                "doubling constant must be finite and >= 1, got {doubling}"
            )));
        }
        if !(regularity > 0.0) || !regularity.is_finite() {
            return Err(CertifyError::InvalidParameter(format!(
                "regularity constant must be positive, got {regularity}"
            )));
        }
        if !(q > 1.0) || !q.is_finite() {
            return Err(CertifyError::InvalidParameter(format!("Q must exceed 1, got {q}")));
        }
        if !(spread >= 1.0) || !spread.is_finite() {
            return Err(CertifyError::InvalidParameter(format!("M must be >= 1, got {spread}")));
        }
        Ok(Self {
            doubling,
            regularity,
            q,
            spread,
        })
    }

    /// `ceil(log2(18 M))`, the number of doublings from a ball to its
    /// `18M`-enlargement.
    pub fn overlap_exponent(&self) -> f64 {
        (18.0 * self.spread).log2().ceil()
    }

    /// Colour classes needed for the dilated cover balls, `C_d^ceil(log2(18M))`.
    pub fn overlap(&self) -> f64 {
        self.doubling.powf(self.overlap_exponent())
    }

    /// BV constant: `2^(3+Q+Q/(Q-1)) C_Omega^2 C_d^(Q+ceil(log2(18M)))`.
    pub fn bv(&self) -> f64 {
        let q = self.q;
        2f64.powf(3.0 + q + q / (q - 1.0))
            * self.regularity.powi(2)
            * self.doubling.powf(q + self.overlap_exponent())
    }

    /// Lipschitz-route Sobolev constant: `4 C_d^(1/p + (1+1/p) ceil(log2(18M)))`.
    pub fn sobolev_lip(&self, p: f64) -> f64 {
        4.0 * self
            .doubling
            .powf(1.0 / p + (1.0 + 1.0 / p) * self.overlap_exponent())
    }

    /// Distortion-route Sobolev constant for `1 <= p < Q`:
    /// `2^(p+Qp/(Q-p)) C_d^(Q/p+(p+1) ceil(log2(18M))) C_Omega^2`.
    pub fn sobolev_distortion(&self, p: f64) -> f64 {
        let q = self.q;
        2f64.powf(p + q * p / (q - p))
            * self
                .doubling
                .powf(q / p + (p + 1.0) * self.overlap_exponent())
            * self.regularity.powi(2)
    }

    /// Critical-exponent constant `C_d^6 C_Omega^2`.
    pub fn critical(&self) -> f64 {
        self.doubling.powi(6) * self.regularity.powi(2)
    }
}

/// Sobolev conjugate `Qp/(Q-p)`; infinite at `p = Q`.
pub fn sobolev_conjugate(p: f64, q: f64) -> f64 {
    if p >= q {
        f64::INFINITY
    } else {
        q * p / (q - p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_exponent_for_small_spreads() {
        let c = Constants::new(4.0, 4.0, 2.0, 1.0).unwrap();
        assert_eq!(c.overlap_exponent(), 5.0);
        assert_eq!(c.overlap(), 1024.0);
        let c = Constants::new(4.0, 4.0, 2.0, 2.0).unwrap();
        assert_eq!(c.overlap_exponent(), 6.0);
    }

    #[test]
    fn sobolev_constant_matches_its_chain() {
        // C_2^p = 2^(2p) C_d C_M^(p+1)
        let c = Constants::new(3.5, 2.0, 2.0, 1.5).unwrap();
        for p in [1.0, 1.5, 2.0] {
            let lhs = c.sobolev_lip(p).powf(p);
            let rhs = 2f64.powf(2.0 * p) * c.doubling * c.overlap().powf(p + 1.0);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Constants::new(0.5, 1.0, 2.0, 1.0).is_err());
        assert!(Constants::new(2.0, 0.0, 2.0, 1.0).is_err());
        assert!(Constants::new(2.0, 1.0, 1.0, 1.0).is_err());
        assert!(Constants::new(2.0, 1.0, 2.0, 0.5).is_err());
    }
}
