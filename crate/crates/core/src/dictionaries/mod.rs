//! Observable dictionaries `Psi(x) = [psi_1(x), ..., psi_K(x)]`.
//!
//! Every family implements [`Basis`]. The [`Dictionary`] enum bundles the
//! built-in families; it doubles as the serializable descriptor, so a JSON
//! round trip reconstructs a dictionary with identical evaluations.

mod boxtree;
mod fourier;
mod hermite;
mod rbf;
mod spectral;
mod state;
mod weights;

use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use boxtree::{build_box_tree, build_occupied_tree, BoxBounds, BoxTree, Leaf};
pub use fourier::{fourier_pair_dictionary, FourierPairDictionary};
pub use hermite::{hermite_dictionary, hermite_values, HermiteDictionary};
pub use rbf::{thin_plate, thin_plate_rbf_dictionary, ThinPlateDictionary};
pub use spectral::{default_tensor, legendre_values, spectral_element_dictionary, SpectralElementDictionary};
pub use state::{state_dictionary, StateDictionary};
pub use weights::{full_state_weights, FullStateWeights};

use crate::c64;

/// Uniform row-evaluation contract for a dictionary of `len()` observables on
/// `R^state_dim()`.
pub trait Basis: Sync {
    fn len(&self) -> usize;

    fn state_dim(&self) -> usize;

    /// True when every observable is real valued.
    fn is_real(&self) -> bool {
        true
    }

    /// Write `Psi(x)` into `out` (length `len()`).
    fn eval(&self, x: &[f64], out: &mut [c64]);

    /// Real evaluation; only meaningful when [`Basis::is_real`] holds.
    fn eval_real(&self, x: &[f64], out: &mut [f64]) {
        let mut tmp = vec![c64::new(0.0, 0.0); self.len()];
        self.eval(x, &mut tmp);
        for (o, z) in out.iter_mut().zip(&tmp) {
            *o = z.re;
        }
    }

    /// For block-sparse dictionaries, the index range outside of which
    /// `Psi(x)` vanishes. `None` means dense.
    fn block(&self, _x: &[f64]) -> Option<Range<usize>> {
        None
    }

    /// Convenience: allocate and return `Psi(x)`.
    fn row(&self, x: &[f64]) -> Vec<c64> {
        let mut out = vec![c64::new(0.0, 0.0); self.len()];
        self.eval(x, &mut out);
        out
    }
}

/// The built-in dictionary families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Dictionary {
    Hermite(HermiteDictionary),
    ThinPlate(ThinPlateDictionary),
    SpectralElement(SpectralElementDictionary),
    State(StateDictionary),
    FourierPair(FourierPairDictionary),
}

impl Dictionary {
    pub fn family(&self) -> &'static str {
        match self {
            Dictionary::Hermite(_) => "hermite",
            Dictionary::ThinPlate(_) => "thin-plate",
            Dictionary::SpectralElement(_) => "spectral-element",
            Dictionary::State(_) => "state",
            Dictionary::FourierPair(_) => "fourier-pair",
        }
    }

    fn inner(&self) -> &dyn Basis {
        match self {
            Dictionary::Hermite(d) => d,
            Dictionary::ThinPlate(d) => d,
            Dictionary::SpectralElement(d) => d,
            Dictionary::State(d) => d,
            Dictionary::FourierPair(d) => d,
        }
    }

    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> crate::Result<Self> {
        let mut d: Dictionary = serde_json::from_str(s)?;
        d.rebuild();
        Ok(d)
    }

    /// Restore derived lookup structures after deserialization.
    pub fn rebuild(&mut self) {
        if let Dictionary::SpectralElement(d) = self {
            d.tree.rebuild_index();
        }
    }
}

impl Basis for Dictionary {
    fn len(&self) -> usize {
        self.inner().len()
    }
    fn state_dim(&self) -> usize {
        self.inner().state_dim()
    }
    fn is_real(&self) -> bool {
        self.inner().is_real()
    }
    fn eval(&self, x: &[f64], out: &mut [c64]) {
        self.inner().eval(x, out)
    }
    fn eval_real(&self, x: &[f64], out: &mut [f64]) {
        self.inner().eval_real(x, out)
    }
    fn block(&self, x: &[f64]) -> Option<Range<usize>> {
        self.inner().block(x)
    }
}

macro_rules! impl_from {
    ($($variant:ident => $ty:ty),*) => {$(
        impl From<$ty> for Dictionary {
            fn from(d: $ty) -> Self {
                Dictionary::$variant(d)
            }
        }
    )*};
}

impl_from!(
    Hermite => HermiteDictionary,
    ThinPlate => ThinPlateDictionary,
    SpectralElement => SpectralElementDictionary,
    State => StateDictionary,
    FourierPair => FourierPairDictionary
);
