//! Exact diagonalization oracle: occupation bases, sparse sector
//! Hamiltonians, ground states, fidelities, statevector truncation.
//!
//! Fermionic ordering convention (the single rule every sign in this crate
//! derives from): modes are ordered up-spin sites ascending, then down-spin
//! sites ascending, and a basis state is the corresponding ascending product
//! of creation operators on the vacuum. Site `p` of spin up is mode `p`;
//! site `p` of spin down is mode `L + p`.

mod basis;
mod eigen;
mod ops;
mod statevector;

pub use basis::{enumerate_sector, enumerate_sector_capped, SectorBasis};
pub use eigen::{ground_state, GroundStateOptions};
pub use ops::{
    annihilate, apply_one_body_spin_summed, build_sector_matrix, create, SparseSectorMatrix,
};
pub use statevector::{
    embed_determinant, fidelity, minors_for_states, truncate_statevector, Statevector,
    TruncationRule,
};
