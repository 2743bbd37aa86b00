//! Hamiltonian construction, ingestion and factorization.
//!
//! Every problem the engine handles is reduced to one canonical form,
//!
//! ```text
//! H = E_core + sum_pq h_pq a^dag_p a_q  +  1/2 sum_g (L^g . rho)^2-style two-body,
//! ```
//!
//! where the two-body interaction is carried as a list of symmetric Cholesky
//! factors `L^g` with `sum_g L^g_pq L^g_rs = (pq|rs)` in chemists' notation.
//! This makes the continuous Hubbard-Stratonovich transformation of the
//! propagation module uniform across Hubbard chains and ab-initio integrals.

mod cholesky;
mod fcidump;
mod table;

pub use cholesky::cholesky_factorize_eri;
pub use fcidump::read_fcidump;
pub use table::{
    read_coupling_table, reduce_generalized_table, DroppedCoupling, GeneralizedHubbardTable,
    ReducedChain,
};

use crate::constants::EnergyUnit;
use crate::{AfqmcError, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Parameters of the one-band Hubbard chain with up to third-neighbor
/// hopping, an on-site energy of -U/2 per spin-orbital occupation and the
/// usual U n_up n_dn repulsion.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HubbardChainParams {
    pub t_x: f64,
    pub t_xx: f64,
    pub t_xxx: f64,
    pub u: f64,
    pub l: usize,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Boundary {
    Open,
    Periodic,
}

impl HubbardChainParams {
    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(AfqmcError::Input(format!(
                "chain length must be at least 2, got {}",
                self.l
            )));
        }
        if self.u < 0.0 {
            return Err(AfqmcError::Input(format!("U must be >= 0, got {}", self.u)));
        }
        for (name, v) in [
            ("t_x", self.t_x),
            ("t_xx", self.t_xx),
            ("t_xxx", self.t_xxx),
            ("U", self.u),
        ] {
            if !v.is_finite() {
                return Err(AfqmcError::Input(format!("{name} is not finite")));
            }
        }
        Ok(())
    }
}

/// One Cholesky factor of the two-body interaction: a real symmetric M x M
/// matrix. Diagonal factors (the Hubbard case) get a compact representation
/// so the hot loops can skip dense algebra.
#[derive(Debug, Clone)]
pub enum Factor {
    Dense(DMatrix<f64>),
    Diagonal(DVector<f64>),
}

impl Factor {
    pub fn dim(&self) -> usize {
        match self {
            Factor::Dense(m) => m.nrows(),
            Factor::Diagonal(d) => d.len(),
        }
    }

    /// Promote to a dense matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Factor::Dense(m) => m.clone(),
            Factor::Diagonal(d) => DMatrix::from_diagonal(d),
        }
    }

    /// Collapse a dense factor to the diagonal representation when exact.
    pub fn compact(self) -> Factor {
        if let Factor::Dense(m) = &self {
            let n = m.nrows();
            let off = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|&(i, j)| i != j)
                .map(|(i, j)| m[(i, j)].abs())
                .fold(0.0, f64::max);
            if off == 0.0 {
                return Factor::Diagonal(m.diagonal());
            }
        }
        self
    }

    /// tr(L G) for a complex matrix G.
    pub fn trace_with(&self, g: &DMatrix<Complex64>) -> Complex64 {
        match self {
            Factor::Diagonal(d) => (0..d.len()).map(|i| g[(i, i)] * d[i]).sum(),
            Factor::Dense(m) => {
                let n = m.nrows();
                let mut acc = Complex64::ZERO;
                for i in 0..n {
                    for j in 0..n {
                        acc += g[(j, i)] * m[(i, j)];
                    }
                }
                acc
            }
        }
    }

    /// tr(L G L G), the exchange contraction for a single spin sector.
    pub fn exchange_trace(&self, g: &DMatrix<Complex64>) -> Complex64 {
        match self {
            Factor::Diagonal(d) => {
                let n = d.len();
                let mut acc = Complex64::ZERO;
                for i in 0..n {
                    for j in 0..n {
                        acc += g[(i, j)] * g[(j, i)] * (d[i] * d[j]);
                    }
                }
                acc
            }
            Factor::Dense(m) => {
                let n = m.nrows();
                // (L G) computed once, then tr((LG)^2).
                let mut lg = DMatrix::<Complex64>::zeros(n, n);
                for i in 0..n {
                    for k in 0..n {
                        let lik = m[(i, k)];
                        if lik == 0.0 {
                            continue;
                        }
                        for j in 0..n {
                            lg[(i, j)] += g[(k, j)] * lik;
                        }
                    }
                }
                let mut acc = Complex64::ZERO;
                for i in 0..n {
                    for j in 0..n {
                        acc += lg[(i, j)] * lg[(j, i)];
                    }
                }
                acc
            }
        }
    }

    /// acc += scale * L, with acc complex.
    pub fn add_scaled_to(&self, scale: Complex64, acc: &mut DMatrix<Complex64>) {
        match self {
            Factor::Diagonal(d) => {
                for i in 0..d.len() {
                    acc[(i, i)] += scale * d[i];
                }
            }
            Factor::Dense(m) => {
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        acc[(i, j)] += scale * m[(i, j)];
                    }
                }
            }
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, Factor::Diagonal(_))
    }
}

/// Where a Hamiltonian came from; carries source-specific metadata.
#[derive(Debug, Clone)]
pub enum HamiltonianKind {
    HubbardChain(HubbardChainParams),
    AbInitio,
}

/// The canonical second-quantized problem: core constant, hermitian one-body
/// matrix and Cholesky-factorized two-body interaction. Immutable once
/// built, safe to share across threads.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub core_energy: f64,
    pub one_body: DMatrix<f64>,
    pub factors: Vec<Factor>,
    pub unit: EnergyUnit,
    /// (N_up, N_dn) suggested by the input (FCIDUMP NELEC/MS2 or half
    /// filling for chains); runs may override.
    pub suggested_filling: Option<(usize, usize)>,
    pub kind: HamiltonianKind,
}

impl Hamiltonian {
    pub fn n_orbitals(&self) -> usize {
        self.one_body.nrows()
    }

    /// Reconstruct the full (pq|rs) tensor from the factors. Guarded by the
    /// orbital count since the tensor is O(M^4).
    pub fn reconstruct_eri(&self) -> Result<EriTensor> {
        let m = self.n_orbitals();
        if m > 32 {
            return Err(AfqmcError::Dimension(format!(
                "refusing to reconstruct an ERI tensor with {m} orbitals"
            )));
        }
        let mut eri = EriTensor::zeros(m);
        for f in &self.factors {
            let d = f.to_dense();
            for p in 0..m {
                for q in 0..m {
                    let lpq = d[(p, q)];
                    if lpq == 0.0 {
                        continue;
                    }
                    for r in 0..m {
                        for s in 0..m {
                            *eri.at_mut(p, q, r, s) += lpq * d[(r, s)];
                        }
                    }
                }
            }
        }
        Ok(eri)
    }

    /// Effective one-body matrix h' = h - 1/2 sum_r (pr|rq) absorbed from
    /// normal-ordering the factored two-body term. sum_r (pr|rq) equals
    /// sum_g (L^g L^g)_pq.
    pub fn one_body_normal_ordered(&self) -> DMatrix<f64> {
        let m = self.n_orbitals();
        let mut h = self.one_body.clone();
        for f in &self.factors {
            match f {
                Factor::Diagonal(d) => {
                    for i in 0..m {
                        h[(i, i)] -= 0.5 * d[i] * d[i];
                    }
                }
                Factor::Dense(l) => {
                    let sq = l * l;
                    for i in 0..m {
                        for j in 0..m {
                            h[(i, j)] -= 0.5 * sq[(i, j)];
                        }
                    }
                }
            }
        }
        h
    }
}

/// Dense 4-index ERI tensor in chemists' notation, (pq|rs) at
/// `[((p*m+q)*m+r)*m+s]`.
#[derive(Debug, Clone)]
pub struct EriTensor {
    m: usize,
    data: Vec<f64>,
}

impl EriTensor {
    pub fn zeros(m: usize) -> Self {
        EriTensor {
            m,
            data: vec![0.0; m * m * m * m],
        }
    }

    pub fn n_orbitals(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn at(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[((p * self.m + q) * self.m + r) * self.m + s]
    }

    #[inline]
    pub fn at_mut(&mut self, p: usize, q: usize, r: usize, s: usize) -> &mut f64 {
        &mut self.data[((p * self.m + q) * self.m + r) * self.m + s]
    }

    /// Store one integral with all eight real-symmetry images.
    pub fn set_symmetric(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        for (a, b) in [(p, q), (q, p)] {
            for (c, d) in [(r, s), (s, r)] {
                *self.at_mut(a, b, c, d) = v;
                *self.at_mut(c, d, a, b) = v;
            }
        }
    }

    /// Largest absolute deviation from another tensor.
    pub fn max_abs_diff(&self, other: &EriTensor) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Build the Hubbard-chain Hamiltonian: hopping up to third neighbors with
/// a global minus sign on the listed amplitudes, -U/2 on every spin-orbital
/// occupation, and U n_up n_dn realized as one diagonal Cholesky factor
/// sqrt(U) per site.
pub fn build_hubbard_chain(params: HubbardChainParams) -> Result<Hamiltonian> {
    params.validate()?;
    let l = params.l;
    let mut h = DMatrix::<f64>::zeros(l, l);
    for i in 0..l {
        h[(i, i)] = -0.5 * params.u;
    }
    let hops = [(1usize, params.t_x), (2, params.t_xx), (3, params.t_xxx)];
    for (d, t) in hops {
        if t == 0.0 {
            continue;
        }
        match params.boundary {
            Boundary::Open => {
                for i in 0..l.saturating_sub(d) {
                    h[(i, i + d)] -= t;
                    h[(i + d, i)] -= t;
                }
            }
            Boundary::Periodic => {
                for i in 0..l {
                    let j = (i + d) % l;
                    h[(i, j)] -= t;
                    h[(j, i)] -= t;
                }
            }
        }
    }
    let sqrt_u = params.u.sqrt();
    let factors = if params.u > 0.0 {
        (0..l)
            .map(|i| {
                let mut d = DVector::zeros(l);
                d[i] = sqrt_u;
                Factor::Diagonal(d)
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(Hamiltonian {
        core_energy: 0.0,
        one_body: h,
        factors,
        unit: EnergyUnit::ElectronVolt,
        suggested_filling: Some((l / 2, l / 2)),
        kind: HamiltonianKind::HubbardChain(params),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_chain_and_nonfinite() {
        let mut p = HubbardChainParams {
            t_x: 1.0,
            t_xx: 0.0,
            t_xxx: 0.0,
            u: 4.0,
            l: 1,
            boundary: Boundary::Open,
        };
        assert!(build_hubbard_chain(p).is_err());
        p.l = 4;
        p.t_x = f64::NAN;
        assert!(build_hubbard_chain(p).is_err());
        p.t_x = 1.0;
        p.u = -1.0;
        assert!(build_hubbard_chain(p).is_err());
    }

    #[test]
    fn zero_parameters_give_zero_operator() {
        let p = HubbardChainParams {
            t_x: 0.0,
            t_xx: 0.0,
            t_xxx: 0.0,
            u: 0.0,
            l: 5,
            boundary: Boundary::Open,
        };
        let ham = build_hubbard_chain(p).unwrap();
        assert_eq!(ham.one_body.iter().map(|x| x.abs()).sum::<f64>(), 0.0);
        assert!(ham.factors.is_empty());
        assert_eq!(ham.core_energy, 0.0);
    }

    #[test]
    fn hubbard_factors_are_point_diagonals() {
        let p = HubbardChainParams {
            t_x: 1.0,
            t_xx: 0.0,
            t_xxx: 0.0,
            u: 4.0,
            l: 3,
            boundary: Boundary::Open,
        };
        let ham = build_hubbard_chain(p).unwrap();
        assert_eq!(ham.factors.len(), 3);
        let eri = ham.reconstruct_eri().unwrap();
        for p in 0..3 {
            for q in 0..3 {
                for r in 0..3 {
                    for s in 0..3 {
                        let want = if p == q && q == r && r == s { 4.0 } else { 0.0 };
                        assert_eq!(eri.at(p, q, r, s), want);
                    }
                }
            }
        }
    }

    #[test]
    fn one_body_is_hermitian_with_open_boundary_edges() {
        let p = HubbardChainParams {
            t_x: 0.0478,
            t_xx: 0.1570,
            t_xxx: 0.0339,
            u: 4.15,
            l: 6,
            boundary: Boundary::Open,
        };
        let ham = build_hubbard_chain(p).unwrap();
        let h = &ham.one_body;
        assert_eq!(h[(0, 1)], -0.0478);
        assert_eq!(h[(0, 2)], -0.1570);
        assert_eq!(h[(0, 3)], -0.0339);
        assert_eq!(h[(0, 4)], 0.0);
        // No wraparound bonds.
        assert_eq!(h[(0, 5)], 0.0);
        assert_eq!(h, &h.transpose());
    }

    #[test]
    fn periodic_boundary_adds_wraparound() {
        let p = HubbardChainParams {
            t_x: 1.0,
            t_xx: 0.0,
            t_xxx: 0.0,
            u: 0.0,
            l: 4,
            boundary: Boundary::Periodic,
        };
        let ham = build_hubbard_chain(p).unwrap();
        assert_eq!(ham.one_body[(0, 3)], -1.0);
    }
}
