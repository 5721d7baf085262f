//! Step distributions and initial spectral laws.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const WEIGHT_TOL: f64 = 1e-12;

/// Atomic law of the singular values `|a|`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularLaw {
    atoms: Vec<(f64, f64)>,
    normalized: bool,
}

impl SingularLaw {
    /// Atoms are `(value, weight)` pairs; values are sorted ascending internally.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidLaw("singular law has no atoms".into()));
        }
        for &(s, w) in &atoms {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidLaw(format!("singular value {s} is not a finite nonnegative number")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidLaw(format!("weight {w} is not positive")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidLaw(format!("weights sum to {total}, not 1")));
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let second: f64 = atoms.iter().map(|(s, w)| w * s * s).sum();
        Ok(Self { normalized: (second - 1.0).abs() <= WEIGHT_TOL, atoms })
    }

    /// Rescales so that `Σ wᵢσᵢ² = 1`.
    pub fn normalize(&self) -> Result<Self> {
        let second: f64 = self.atoms.iter().map(|(s, w)| w * s * s).sum();
        if second <= 0.0 {
            return Err(Error::InvalidLaw("cannot normalize the zero law".into()));
        }
        let c = second.sqrt().recip();
        Self::new(self.atoms.iter().map(|&(s, w)| (s * c, w)).collect())
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Left-continuous quantile: the smallest atom whose CDF reaches `p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let mut acc = 0.0;
        for &(s, w) in &self.atoms {
            acc += w;
            if acc >= p - 1e-15 {
                return s;
            }
        }
        self.atoms[self.atoms.len() - 1].0
    }

    pub fn kernel_mass(&self) -> f64 {
        self.atoms.iter().filter(|a| a.0 == 0.0).map(|a| a.1).sum()
    }

    /// `‖a⁻¹‖₂² = Σ wᵢ/σᵢ²`, infinite with a kernel.
    pub fn inv_l2_sq(&self) -> f64 {
        if self.kernel_mass() > 0.0 {
            f64::INFINITY
        } else {
            self.atoms.iter().map(|(s, w)| w / (s * s)).sum()
        }
    }
}

/// Derived scalars of a step law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepLawSummary {
    pub inv_l2_sq: f64,
    pub kernel_mass: f64,
}

/// Step distribution of the walk, normalized so that `‖a‖₂ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum StepLaw {
    Haar,
    Circular,
    Atomic(SingularLaw),
}

impl StepLaw {
    pub fn atomic(law: SingularLaw) -> Result<Self> {
        if !law.is_normalized() {
            return Err(Error::InvalidLaw("atomic step law must satisfy Σ wσ² = 1".into()));
        }
        Ok(StepLaw::Atomic(law))
    }

    pub fn summary(&self) -> StepLawSummary {
        match self {
            StepLaw::Haar => StepLawSummary { inv_l2_sq: 1.0, kernel_mass: 0.0 },
            StepLaw::Circular => StepLawSummary { inv_l2_sq: f64::INFINITY, kernel_mass: 0.0 },
            StepLaw::Atomic(l) => StepLawSummary { inv_l2_sq: l.inv_l2_sq(), kernel_mass: l.kernel_mass() },
        }
    }

    /// Whether the step is invertible almost surely.
    pub fn is_invertible(&self) -> bool {
        self.summary().kernel_mass == 0.0
    }
}

/// Atomic spectral measure of the initial unitary, angles in `(−π, π]`.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialLaw {
    atoms: Vec<(f64, f64)>,
}

impl InitialLaw {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidLaw("initial law has no atoms".into()));
        }
        for &(th, w) in &atoms {
            if !(th.is_finite() && th > -PI && th <= PI) {
                return Err(Error::InvalidLaw(format!("angle {th} outside (-pi, pi]")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidLaw(format!("weight {w} is not positive")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidLaw(format!("weights sum to {total}, not 1")));
        }
        for (i, a) in atoms.iter().enumerate() {
            if atoms[..i].iter().any(|b| b.0 == a.0) {
                return Err(Error::InvalidLaw(format!("repeated angle {}", a.0)));
            }
        }
        Ok(Self { atoms })
    }

    /// `u₀ = 1`.
    pub fn trivial() -> Self {
        Self { atoms: vec![(0.0, 1.0)] }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn is_trivial(&self) -> bool {
        self.atoms.len() == 1 && self.atoms[0].0 == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_law_validation() {
        assert!(SingularLaw::new(vec![(1.0, 0.5)]).is_err());
        assert!(SingularLaw::new(vec![]).is_err());
        let l = SingularLaw::new(vec![(2f64.sqrt(), 0.5), (0.0, 0.5)]).unwrap();
        assert!(l.is_normalized());
        assert_eq!(l.atoms()[0].0, 0.0);
        assert_eq!(l.kernel_mass(), 0.5);
        assert!(l.inv_l2_sq().is_infinite());
    }

    #[test]
    fn normalize_and_summary() {
        let l = SingularLaw::new(vec![(1.0, 0.5), (3.0, 0.5)]).unwrap();
        assert!(!l.is_normalized());
        assert!(StepLaw::atomic(l.clone()).is_err());
        let n = l.normalize().unwrap();
        let s = StepLaw::atomic(n).unwrap().summary();
        // Σwσ² = 5 before scaling, so σ² ∈ {1/5, 9/5}.
        assert!((s.inv_l2_sq - (0.5 * 5.0 + 0.5 * 5.0 / 9.0)).abs() < 1e-12);
        assert!(s.inv_l2_sq >= 1.0);
        assert_eq!(StepLaw::Haar.summary().inv_l2_sq, 1.0);
        assert!(StepLaw::Circular.summary().inv_l2_sq.is_infinite());
    }

    #[test]
    fn quantiles_of_two_point_law() {
        let l = SingularLaw::new(vec![(0.0, 0.5), (2f64.sqrt(), 0.5)]).unwrap();
        let q: Vec<f64> = (0..4).map(|i| l.quantile((i as f64 + 0.5) / 4.0)).collect();
        assert_eq!(q, vec![0.0, 0.0, 2f64.sqrt(), 2f64.sqrt()]);
    }

    #[test]
    fn initial_law_validation() {
        assert!(InitialLaw::new(vec![(4.0, 1.0)]).is_err());
        assert!(InitialLaw::new(vec![(0.1, 0.5), (0.1, 0.5)]).is_err());
        assert!(InitialLaw::new(vec![(0.1, 0.5), (0.2, 0.4)]).is_err());
        assert!(InitialLaw::new(vec![(PI, 1.0)]).is_ok());
        assert!(InitialLaw::trivial().is_trivial());
    }
}
