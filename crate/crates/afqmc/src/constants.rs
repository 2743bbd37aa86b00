//! Unit conversions and global numerical defaults.

/// Conversion factor from Hartree to kJ/mol.
///
/// Fixed, documented constant used by every energy report; keeping a single
/// definition means all tables round identically.
pub const HARTREE_TO_KJ_PER_MOL: f64 = 2625.4996;

/// Largest sector dimension the exact-diagonalization oracle accepts.
pub const DIMENSION_CAP: usize = 1_000_000;

/// Sector dimension above which the iterative (Lanczos) eigensolver is used
/// instead of a dense one.
pub const DENSE_EIGEN_CAP: usize = 2000;

/// Overlap magnitudes below this floor flag a dead walker.
pub const OVERLAP_FLOOR: f64 = 1e-280;

/// Energy unit label attached to Hamiltonians. Purely metadata: the engine
/// is unit-agnostic as long as the imaginary-time step carries the inverse
/// unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum EnergyUnit {
    Hartree,
    ElectronVolt,
}

impl std::fmt::Display for EnergyUnit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EnergyUnit::Hartree => write!(f, "Ha"),
            EnergyUnit::ElectronVolt => write!(f, "eV"),
        }
    }
}

impl std::str::FromStr for EnergyUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ha" | "hartree" | "a.u." | "au" => Ok(EnergyUnit::Hartree),
            "ev" | "electronvolt" => Ok(EnergyUnit::ElectronVolt),
            other => Err(format!("unknown energy unit `{other}`")),
        }
    }
}
