use super::{classical_compound_capacity, fqavc_ea_capacity, symmetrizability_check, SolverConfig, SolverReport, Symmetrizability};
use crate::error::Result;
use crate::models::{embed_kernel, AvcKernel};

/// Deterministic classical capacity, random-coding capacity and
/// entanglement-assisted capacity of a classical AVC side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    /// A symmetrizable kernel has deterministic capacity zero.
    pub symmetrizability: Symmetrizability,
    /// Compound capacity over the hull of the state kernels.
    pub compound: SolverReport,
    /// Jammer-channel capacity of the quantum embedding.
    pub fqavc_ea: SolverReport,
    /// Symmetrizable, yet the compound value exceeds the tolerance.
    pub separation: bool,
}

impl SeparationReport {
    /// `(deterministic, compound, entanglement-assisted)` values; the first
    /// entry is `None` when symmetrizability does not settle it.
    pub fn triple(&self) -> (Option<f64>, f64, f64) {
        let deterministic = self.symmetrizability.symmetrizable.then_some(0.0);
        (deterministic, self.compound.value, self.fqavc_ea.value)
    }
}

pub fn separation_report(w: &AvcKernel, cfg: &SolverConfig) -> Result<SeparationReport> {
    cfg.validate()?;
    let symmetrizability = symmetrizability_check(w)?;
    let compound = classical_compound_capacity(&w.state_kernels(), cfg)?;
    let fqavc_ea = fqavc_ea_capacity(&embed_kernel(w), cfg)?;
    let separation = symmetrizability.symmetrizable && compound.value > cfg.tol;
    Ok(SeparationReport {
        symmetrizability,
        compound,
        fqavc_ea,
        separation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{adder_avc, StochasticMatrix};

    #[test]
    fn adder_separates() {
        let r = separation_report(&adder_avc(), &SolverConfig::default()).unwrap();
        assert!(r.symmetrizability.symmetrizable);
        assert!((r.compound.value - 0.5).abs() <= 1e-3);
        assert!(r.fqavc_ea.value >= 0.5 - 1e-3);
        assert!(r.separation);
        assert_eq!(r.triple().0, Some(0.0));
    }

    #[test]
    fn noiseless_and_constant() {
        let cfg = SolverConfig::default();
        let noiseless = AvcKernel::jammer_independent(&StochasticMatrix::noiseless(2), 2).unwrap();
        let r = separation_report(&noiseless, &cfg).unwrap();
        assert!(!r.symmetrizability.symmetrizable && !r.separation);

        let constant = AvcKernel::new(2, 2, 2, alloc::vec![0.5; 8]).unwrap();
        let r = separation_report(&constant, &cfg).unwrap();
        assert!(r.symmetrizability.symmetrizable && !r.separation);
        assert!(r.compound.value.abs() <= 1e-4);
    }
}
