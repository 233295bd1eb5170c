use serde::{Deserialize, Serialize};

use crate::dirac::DiracParams;
use crate::hartree::HartreeParams;

/// Complete parameter set of the evolution equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub dirac: DiracParams,
    pub hartree: HartreeParams,
}

impl Model {
    pub fn new(dirac: DiracParams, hartree: HartreeParams) -> Self {
        Model { dirac, hartree }
    }

    /// Same model with the self-interaction switched off.
    pub fn linear(&self) -> Self {
        Model {
            dirac: self.dirac,
            hartree: self.hartree.with_coupling(crate::hartree::CouplingSign::Off),
        }
    }
}
