//! Trial wavefunctions and their walker-facing evaluations: overlaps,
//! local energies, force bias, trial energy.
//!
//! Three representations share one interface. Single determinants evaluate
//! through the mixed Green's function; multi-determinant expansions sum
//! per-determinant Wick contractions (determinant counts stay at a few
//! thousand here, so the direct sum wins over fast-update algorithms);
//! statevector trials contract against the walker embedded in the sector
//! basis, which doubles as the independent oracle for the other two routes.

mod detfile;

pub use detfile::{load_determinant_file, write_determinant_file};

use crate::fockspace::{
    apply_one_body_spin_summed, build_sector_matrix, embed_determinant, enumerate_sector,
    minors_for_states, SectorBasis, Statevector,
};
use crate::gaussian::{self, energy_from_greens, greens_function, SlaterDeterminant};
use crate::hamiltonians::{Factor, Hamiltonian};
use crate::{AfqmcError, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::Arc;

/// Provenance metadata carried by multi-determinant trials.
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct TrialProvenance {
    pub source: String,
    pub rule: Option<String>,
    pub discarded_weight: Option<f64>,
    pub file_hash: Option<String>,
    /// Bond dimension of an ingested matrix-product-state expansion;
    /// metadata only, never used numerically.
    pub bond_dimension: Option<u32>,
}

/// Linear combination of occupation determinants (orthogonal expansion).
#[derive(Debug, Clone)]
pub struct MultiDetTrial {
    pub l: usize,
    pub n_up: usize,
    pub n_dn: usize,
    pub coeffs: Vec<Complex64>,
    pub occs: Vec<(u64, u64)>,
    pub provenance: TrialProvenance,
}

impl MultiDetTrial {
    pub fn validate(&self) -> Result<()> {
        if self.coeffs.len() != self.occs.len() || self.coeffs.is_empty() {
            return Err(AfqmcError::Input("empty or inconsistent determinant list".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for (&(up, dn), c) in self.occs.iter().zip(&self.coeffs) {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(AfqmcError::Input("non-finite coefficient".into()));
            }
            if up.count_ones() as usize != self.n_up || dn.count_ones() as usize != self.n_dn {
                return Err(AfqmcError::Input(format!(
                    "occupation ({up:b},{dn:b}) does not carry ({},{}) electrons",
                    self.n_up, self.n_dn
                )));
            }
            if up >> self.l != 0 || dn >> self.l != 0 {
                return Err(AfqmcError::Input("occupation beyond the orbital count".into()));
            }
            if !seen.insert((up, dn)) {
                return Err(AfqmcError::Input(format!(
                    "duplicate occupation pair ({up:b},{dn:b})"
                )));
            }
        }
        Ok(())
    }
}

/// Statevector trial (normalized) on an explicit sector basis.
#[derive(Debug, Clone)]
pub struct StateVecTrial {
    pub state: Statevector,
}

#[derive(Debug, Clone)]
pub enum TrialWavefunction {
    SingleDet(SlaterDeterminant),
    MultiDet(MultiDetTrial),
    StateVec(StateVecTrial),
}

impl TrialWavefunction {
    /// (orbitals, n_up, n_dn).
    pub fn shape(&self) -> (usize, usize, usize) {
        match self {
            TrialWavefunction::SingleDet(d) => (d.n_orbitals(), d.n_up(), d.n_dn()),
            TrialWavefunction::MultiDet(m) => (m.l, m.n_up, m.n_dn),
            TrialWavefunction::StateVec(s) => {
                let b = &s.state.basis;
                (b.l, b.n_up, b.n_dn)
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            TrialWavefunction::SingleDet(_) => "single-determinant",
            TrialWavefunction::MultiDet(_) => "multi-determinant",
            TrialWavefunction::StateVec(_) => "statevector",
        }
    }
}

/// Local energy <Psi_T|H|phi> / <Psi_T|phi> with its breakdown.
#[derive(Debug, Clone, Copy)]
pub struct LocalEnergyValue {
    pub value: Complex64,
    pub overlap: Complex64,
    pub core: f64,
    pub one_body: Complex64,
    pub two_body: Complex64,
    /// Determinant terms skipped because their walker overlap was exactly
    /// singular; nonzero values signal a pathological walker.
    pub degenerate_terms: usize,
}

/// Force-bias vector with the count of capped components.
#[derive(Debug, Clone)]
pub struct ForceBias {
    pub values: Vec<Complex64>,
    pub capped: usize,
}

// ---------------------------------------------------------------------------
// Prepared evaluation contexts.
// ---------------------------------------------------------------------------

/// Trial prepared against a Hamiltonian for repeated walker evaluations.
/// Construction may build sector structures (statevector trials); the
/// per-walker calls are allocation-light and thread-safe (&self only).
pub struct PreparedTrial {
    shape: (usize, usize, usize),
    core: f64,
    one_body: DMatrix<f64>,
    factors: Vec<Factor>,
    variant: Prepared,
}

enum Prepared {
    Single {
        det: SlaterDeterminant,
    },
    Multi {
        coeffs: Vec<Complex64>,
        rows_up: Vec<u8>,
        rows_dn: Vec<u8>,
    },
    StateVec {
        basis: Arc<SectorBasis>,
        conj_psi: Vec<Complex64>,
        conj_h_psi: Vec<Complex64>,
        conj_h1_psi: Vec<Complex64>,
        conj_factor_psi: Vec<Vec<Complex64>>,
    },
}

impl PreparedTrial {
    pub fn new(trial: &TrialWavefunction, ham: &Hamiltonian) -> Result<Self> {
        let shape = trial.shape();
        if ham.n_orbitals() != shape.0 {
            return Err(AfqmcError::Dimension(format!(
                "trial spans {} orbitals, Hamiltonian has {}",
                shape.0,
                ham.n_orbitals()
            )));
        }
        let variant = match trial {
            TrialWavefunction::SingleDet(d) => Prepared::Single { det: d.clone() },
            TrialWavefunction::MultiDet(m) => {
                m.validate()?;
                let unpack = |s: u64, n: usize| {
                    let mut v = Vec::with_capacity(n);
                    let mut s = s;
                    while s != 0 {
                        v.push(s.trailing_zeros() as u8);
                        s &= s - 1;
                    }
                    v
                };
                let mut rows_up = Vec::with_capacity(m.occs.len() * m.n_up);
                let mut rows_dn = Vec::with_capacity(m.occs.len() * m.n_dn);
                for &(up, dn) in &m.occs {
                    rows_up.extend(unpack(up, m.n_up));
                    rows_dn.extend(unpack(dn, m.n_dn));
                }
                Prepared::Multi {
                    coeffs: m.coeffs.clone(),
                    rows_up,
                    rows_dn,
                }
            }
            TrialWavefunction::StateVec(s) => {
                let basis = Arc::clone(&s.state.basis);
                let mat = build_sector_matrix(ham, &basis)?;
                let mut h_psi = vec![Complex64::ZERO; basis.len()];
                mat.matvec_complex(&s.state.amps, &mut h_psi);
                let h1_psi = apply_one_body_spin_summed(&basis, &ham.one_body, &s.state.amps);
                let factor_psi: Vec<Vec<Complex64>> = ham
                    .factors
                    .iter()
                    .map(|f| {
                        let dense = f.to_dense();
                        apply_one_body_spin_summed(&basis, &dense, &s.state.amps)
                            .into_iter()
                            .map(|z| z.conj())
                            .collect()
                    })
                    .collect();
                Prepared::StateVec {
                    basis,
                    conj_psi: s.state.amps.iter().map(|z| z.conj()).collect(),
                    conj_h_psi: h_psi.into_iter().map(|z| z.conj()).collect(),
                    conj_h1_psi: h1_psi.into_iter().map(|z| z.conj()).collect(),
                    conj_factor_psi: factor_psi,
                }
            }
        };
        Ok(PreparedTrial {
            shape,
            core: ham.core_energy,
            one_body: ham.one_body.clone(),
            factors: ham.factors.clone(),
            variant,
        })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.shape
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    fn check_walker(&self, w: &SlaterDeterminant) -> Result<()> {
        if (w.n_orbitals(), w.n_up(), w.n_dn()) != self.shape {
            return Err(AfqmcError::Dimension(format!(
                "walker shape ({},{},{}) incompatible with trial {:?}",
                w.n_orbitals(),
                w.n_up(),
                w.n_dn(),
                self.shape
            )));
        }
        Ok(())
    }

    /// <Psi_T|walker>.
    pub fn overlap(&self, w: &SlaterDeterminant) -> Result<Complex64> {
        self.check_walker(w)?;
        Ok(match &self.variant {
            Prepared::Single { det } => gaussian::overlap(det, w),
            Prepared::Multi {
                coeffs,
                rows_up,
                rows_dn,
            } => {
                let mut scratch = MultiScratch::new(self.shape.0, self.shape.1.max(self.shape.2));
                let mut acc = Complex64::ZERO;
                for (k, c) in coeffs.iter().enumerate() {
                    let det_up = scratch.det_only(&w.phi_up, rows_of(rows_up, k, self.shape.1));
                    if det_up == Complex64::ZERO {
                        continue;
                    }
                    let det_dn = scratch.det_only(&w.phi_dn, rows_of(rows_dn, k, self.shape.2));
                    acc += c.conj() * det_up * det_dn;
                }
                acc * w.log_scale.exp()
            }
            Prepared::StateVec { basis, conj_psi, .. } => {
                let emb = WalkerEmbedding::new(w, basis);
                emb.dot(conj_psi)
            }
        })
    }

    /// Spin-summed mixed expectations <Psi_T| L_g |walker>/<Psi_T|walker>
    /// for every factor, plus the overlap itself.
    pub fn factor_expectations(&self, w: &SlaterDeterminant) -> Result<(Vec<Complex64>, Complex64)> {
        self.check_walker(w)?;
        match &self.variant {
            Prepared::Single { det } => {
                let ovlp = gaussian::overlap(det, w);
                let [g_up, g_dn] = greens_function(det, w)?;
                let vals = self
                    .factors
                    .iter()
                    .map(|f| f.trace_with(&g_up) + f.trace_with(&g_dn))
                    .collect();
                Ok((vals, ovlp))
            }
            Prepared::Multi {
                coeffs,
                rows_up,
                rows_dn,
            } => {
                let (m, nu, nd) = self.shape;
                let mut scratch = MultiScratch::new(m, nu.max(nd));
                let mut denom = Complex64::ZERO;
                let mut traces = vec![Complex64::ZERO; self.factors.len()];
                for (k, c) in coeffs.iter().enumerate() {
                    let ru = rows_of(rows_up, k, nu);
                    let rd = rows_of(rows_dn, k, nd);
                    let Some((det_up, det_dn)) = scratch.halves(&w.phi_up, &w.phi_dn, ru, rd)
                    else {
                        continue;
                    };
                    let weight = c.conj() * det_up * det_dn;
                    denom += weight;
                    for (fi, f) in self.factors.iter().enumerate() {
                        let t = factor_half_trace(f, &scratch.theta_up, ru, m)
                            + factor_half_trace(f, &scratch.theta_dn, rd, m);
                        traces[fi] += weight * t;
                    }
                }
                if denom == Complex64::ZERO {
                    return Err(AfqmcError::Numerical("vanishing trial-walker overlap".into()));
                }
                for t in traces.iter_mut() {
                    *t /= denom;
                }
                Ok((traces, denom * w.log_scale.exp()))
            }
            Prepared::StateVec {
                basis,
                conj_psi,
                conj_factor_psi,
                ..
            } => {
                let emb = WalkerEmbedding::new(w, basis);
                let denom = emb.dot(conj_psi);
                if denom == Complex64::ZERO {
                    return Err(AfqmcError::Numerical("vanishing trial-walker overlap".into()));
                }
                let vals = conj_factor_psi.iter().map(|v| emb.dot(v) / denom).collect();
                Ok((vals, denom))
            }
        }
    }

    /// Mixed local energy of a walker.
    pub fn local_energy(&self, w: &SlaterDeterminant) -> Result<LocalEnergyValue> {
        self.check_walker(w)?;
        match &self.variant {
            Prepared::Single { det } => {
                let ovlp = gaussian::overlap(det, w);
                if ovlp == Complex64::ZERO {
                    return Err(AfqmcError::Numerical("zero trial-walker overlap".into()));
                }
                let [g_up, g_dn] = greens_function(det, w)?;
                let ham_view = self.ham_view();
                let (one, two) = energy_from_greens(&ham_view, &g_up, &g_dn);
                Ok(LocalEnergyValue {
                    value: one + two + self.core,
                    overlap: ovlp,
                    core: self.core,
                    one_body: one,
                    two_body: two,
                    degenerate_terms: 0,
                })
            }
            Prepared::Multi {
                coeffs,
                rows_up,
                rows_dn,
            } => {
                let (m, nu, nd) = self.shape;
                let mut scratch = MultiScratch::new(m, nu.max(nd));
                let mut denom = Complex64::ZERO;
                let mut num_one = Complex64::ZERO;
                let mut num_two = Complex64::ZERO;
                let mut degenerate = 0usize;
                for (k, c) in coeffs.iter().enumerate() {
                    let ru = rows_of(rows_up, k, nu);
                    let rd = rows_of(rows_dn, k, nd);
                    let dets = scratch.halves(&w.phi_up, &w.phi_dn, ru, rd);
                    let Some((det_up, det_dn)) = dets else {
                        degenerate += 1;
                        continue;
                    };
                    let weight = c.conj() * det_up * det_dn;
                    denom += weight;
                    let mut one = half_trace(&self.one_body, &scratch.theta_up, ru, m);
                    one += half_trace(&self.one_body, &scratch.theta_dn, rd, m);
                    let mut two = Complex64::ZERO;
                    for f in &self.factors {
                        let tu = factor_half_trace(f, &scratch.theta_up, ru, m);
                        let td = factor_half_trace(f, &scratch.theta_dn, rd, m);
                        let c2 = tu + td;
                        let ex = factor_half_exchange(f, &scratch.theta_up, ru, m)
                            + factor_half_exchange(f, &scratch.theta_dn, rd, m);
                        two += 0.5 * (c2 * c2 - ex);
                    }
                    num_one += weight * one;
                    num_two += weight * two;
                }
                if denom == Complex64::ZERO {
                    return Err(AfqmcError::Numerical("zero trial-walker overlap".into()));
                }
                let one = num_one / denom;
                let two = num_two / denom;
                Ok(LocalEnergyValue {
                    value: one + two + self.core,
                    overlap: denom * w.log_scale.exp(),
                    core: self.core,
                    one_body: one,
                    two_body: two,
                    degenerate_terms: degenerate,
                })
            }
            Prepared::StateVec {
                basis,
                conj_psi,
                conj_h_psi,
                conj_h1_psi,
                ..
            } => {
                let emb = WalkerEmbedding::new(w, basis);
                let denom = emb.dot(conj_psi);
                if denom == Complex64::ZERO {
                    return Err(AfqmcError::Numerical("zero trial-walker overlap".into()));
                }
                let value = emb.dot(conj_h_psi) / denom;
                let one = emb.dot(conj_h1_psi) / denom;
                Ok(LocalEnergyValue {
                    value,
                    overlap: denom,
                    core: self.core,
                    one_body: one,
                    two_body: value - one - self.core,
                    degenerate_terms: 0,
                })
            }
        }
    }

    fn ham_view(&self) -> Hamiltonian {
        Hamiltonian {
            core_energy: self.core,
            one_body: self.one_body.clone(),
            factors: self.factors.clone(),
            unit: crate::constants::EnergyUnit::Hartree,
            suggested_filling: None,
            kind: crate::hamiltonians::HamiltonianKind::AbInitio,
        }
    }
}

#[inline]
fn rows_of(flat: &[u8], k: usize, n: usize) -> &[u8] {
    &flat[k * n..(k + 1) * n]
}

/// Walker embedded on a sector basis as per-spin minor tables.
struct WalkerEmbedding {
    up: Vec<Complex64>,
    dn: Vec<Complex64>,
    scale: f64,
}

impl WalkerEmbedding {
    fn new(w: &SlaterDeterminant, basis: &SectorBasis) -> Self {
        WalkerEmbedding {
            up: minors_for_states(&w.phi_up, basis.up_states()),
            dn: minors_for_states(&w.phi_dn, basis.dn_states()),
            scale: w.log_scale.exp(),
        }
    }

    /// sum_b conj_vec[b] * emb[b] over the product-ordered basis.
    fn dot(&self, conj_vec: &[Complex64]) -> Complex64 {
        let nd = self.dn.len();
        let mut acc = Complex64::ZERO;
        for (iu, &mu) in self.up.iter().enumerate() {
            if mu == Complex64::ZERO {
                continue;
            }
            let base = iu * nd;
            let mut inner = Complex64::ZERO;
            for (idn, &md) in self.dn.iter().enumerate() {
                inner += conj_vec[base + idn] * md;
            }
            acc += mu * inner;
        }
        acc * self.scale
    }
}

/// Reusable buffers for the per-determinant Green's-function evaluation:
/// Gauss-Jordan inverse of the n x n walker-row matrix and the M x n
/// half Green's function Theta = Phi S^{-1}.
struct MultiScratch {
    m: usize,
    s: Vec<Complex64>,
    inv: Vec<Complex64>,
    theta_up: Vec<Complex64>,
    theta_dn: Vec<Complex64>,
}

impl MultiScratch {
    fn new(m: usize, nmax: usize) -> Self {
        MultiScratch {
            m,
            s: vec![Complex64::ZERO; nmax * nmax],
            inv: vec![Complex64::ZERO; nmax * nmax],
            theta_up: vec![Complex64::ZERO; m * nmax],
            theta_dn: vec![Complex64::ZERO; m * nmax],
        }
    }

    /// Determinant of the selected rows without building Theta.
    fn det_only(&mut self, phi: &DMatrix<Complex64>, rows: &[u8]) -> Complex64 {
        let n = rows.len();
        for (r, &row) in rows.iter().enumerate() {
            for c in 0..n {
                self.s[r * n + c] = phi[(row as usize, c)];
            }
        }
        det_in_place(&mut self.s, n)
    }

    /// Both spin sectors: determinant values and Theta buffers; None when
    /// either spin block is singular to machine precision.
    fn halves(
        &mut self,
        phi_up: &DMatrix<Complex64>,
        phi_dn: &DMatrix<Complex64>,
        rows_up: &[u8],
        rows_dn: &[u8],
    ) -> Option<(Complex64, Complex64)> {
        let det_up = self.half(phi_up, rows_up, true)?;
        let det_dn = self.half(phi_dn, rows_dn, false)?;
        Some((det_up, det_dn))
    }

    fn half(&mut self, phi: &DMatrix<Complex64>, rows: &[u8], up: bool) -> Option<Complex64> {
        let n = rows.len();
        let m = self.m;
        for (r, &row) in rows.iter().enumerate() {
            for c in 0..n {
                self.s[r * n + c] = phi[(row as usize, c)];
            }
        }
        let det = invert_in_place(&mut self.s, &mut self.inv, n)?;
        let theta = if up { &mut self.theta_up } else { &mut self.theta_dn };
        // Theta = Phi * S^{-1}, column-major in j.
        for i in 0..m {
            for j in 0..n {
                let mut acc = Complex64::ZERO;
                for k in 0..n {
                    acc += phi[(i, k)] * self.inv[k * n + j];
                }
                theta[i * n + j] = acc;
            }
        }
        Some(det)
    }
}

fn det_in_place(buf: &mut [Complex64], n: usize) -> Complex64 {
    if n == 0 {
        return Complex64::ONE;
    }
    let mut det = Complex64::ONE;
    for k in 0..n {
        let mut piv = k;
        let mut best = buf[k * n + k].norm_sqr();
        for r in k + 1..n {
            let m = buf[r * n + k].norm_sqr();
            if m > best {
                best = m;
                piv = r;
            }
        }
        if best == 0.0 {
            return Complex64::ZERO;
        }
        if piv != k {
            for c in 0..n {
                buf.swap(k * n + c, piv * n + c);
            }
            det = -det;
        }
        let pivot = buf[k * n + k];
        det *= pivot;
        for r in k + 1..n {
            let f = buf[r * n + k] / pivot;
            if f == Complex64::ZERO {
                continue;
            }
            for c in k + 1..n {
                let sub = f * buf[k * n + c];
                buf[r * n + c] -= sub;
            }
        }
    }
    det
}

/// Gauss-Jordan with partial pivoting; returns the determinant, or None on
/// exact singularity. `s` is destroyed, `inv` receives the inverse.
fn invert_in_place(s: &mut [Complex64], inv: &mut [Complex64], n: usize) -> Option<Complex64> {
    for r in 0..n {
        for c in 0..n {
            inv[r * n + c] = if r == c { Complex64::ONE } else { Complex64::ZERO };
        }
    }
    let mut det = Complex64::ONE;
    for k in 0..n {
        let mut piv = k;
        let mut best = s[k * n + k].norm_sqr();
        for r in k + 1..n {
            let m = s[r * n + k].norm_sqr();
            if m > best {
                best = m;
                piv = r;
            }
        }
        if best == 0.0 {
            return None;
        }
        if piv != k {
            for c in 0..n {
                s.swap(k * n + c, piv * n + c);
                inv.swap(k * n + c, piv * n + c);
            }
            det = -det;
        }
        let pivot = s[k * n + k];
        det *= pivot;
        let pinv = Complex64::ONE / pivot;
        for c in 0..n {
            s[k * n + c] *= pinv;
            inv[k * n + c] *= pinv;
        }
        for r in 0..n {
            if r == k {
                continue;
            }
            let f = s[r * n + k];
            if f == Complex64::ZERO {
                continue;
            }
            for c in 0..n {
                let sk = s[k * n + c] * f;
                s[r * n + c] -= sk;
                let ik = inv[k * n + c] * f;
                inv[r * n + c] -= ik;
            }
        }
    }
    Some(det)
}

/// sum_j (A Theta)[rows_j, j] = tr(A G) for the column-structured Green's
/// function G = Theta D^dagger.
fn half_trace(a: &DMatrix<f64>, theta: &[Complex64], rows: &[u8], m: usize) -> Complex64 {
    let n = rows.len();
    let mut acc = Complex64::ZERO;
    for (j, &rj) in rows.iter().enumerate() {
        let rj = rj as usize;
        for mm in 0..m {
            let av = a[(rj, mm)];
            if av != 0.0 {
                acc += theta[mm * n + j] * av;
            }
        }
    }
    acc
}

fn factor_half_trace(f: &Factor, theta: &[Complex64], rows: &[u8], m: usize) -> Complex64 {
    let n = rows.len();
    match f {
        Factor::Diagonal(d) => {
            let mut acc = Complex64::ZERO;
            for (j, &rj) in rows.iter().enumerate() {
                let dv = d[rj as usize];
                if dv != 0.0 {
                    acc += theta[rj as usize * n + j] * dv;
                }
            }
            acc
        }
        Factor::Dense(l) => {
            let mut acc = Complex64::ZERO;
            for (j, &rj) in rows.iter().enumerate() {
                let rj = rj as usize;
                for mm in 0..m {
                    let lv = l[(rj, mm)];
                    if lv != 0.0 {
                        acc += theta[mm * n + j] * lv;
                    }
                }
            }
            acc
        }
    }
}

/// tr(L G L G) for G = Theta D^dagger: with B = L Theta and C = B[rows,:],
/// the trace is tr(C^2).
fn factor_half_exchange(f: &Factor, theta: &[Complex64], rows: &[u8], m: usize) -> Complex64 {
    let n = rows.len();
    let mut c = vec![Complex64::ZERO; n * n];
    match f {
        Factor::Diagonal(d) => {
            for (jp, &rjp) in rows.iter().enumerate() {
                let scale = d[rjp as usize];
                if scale == 0.0 {
                    continue;
                }
                for j in 0..n {
                    c[jp * n + j] = theta[rjp as usize * n + j] * scale;
                }
            }
        }
        Factor::Dense(l) => {
            for (jp, &rjp) in rows.iter().enumerate() {
                let rjp = rjp as usize;
                for j in 0..n {
                    let mut acc = Complex64::ZERO;
                    for mm in 0..m {
                        let lv = l[(rjp, mm)];
                        if lv != 0.0 {
                            acc += theta[mm * n + j] * lv;
                        }
                    }
                    c[jp * n + j] = acc;
                }
            }
        }
    }
    let mut acc = Complex64::ZERO;
    for j in 0..n {
        for jp in 0..n {
            acc += c[j * n + jp] * c[jp * n + j];
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Free-function operations.
// ---------------------------------------------------------------------------

/// <Psi_T|walker>. For repeated evaluation prepare the trial once.
pub fn trial_overlap(trial: &TrialWavefunction, walker: &SlaterDeterminant) -> Result<Complex64> {
    match trial {
        TrialWavefunction::SingleDet(d) => {
            if !d.shape_matches(walker) {
                return Err(AfqmcError::Dimension("sector mismatch".into()));
            }
            Ok(gaussian::overlap(d, walker))
        }
        TrialWavefunction::MultiDet(m) => {
            m.validate()?;
            if (walker.n_orbitals(), walker.n_up(), walker.n_dn()) != (m.l, m.n_up, m.n_dn) {
                return Err(AfqmcError::Dimension("sector mismatch".into()));
            }
            let mut scratch = MultiScratch::new(m.l, m.n_up.max(m.n_dn));
            let mut acc = Complex64::ZERO;
            for (c, &(up, dn)) in m.coeffs.iter().zip(&m.occs) {
                let ru: Vec<u8> = bits_u8(up);
                let rd: Vec<u8> = bits_u8(dn);
                let du = scratch.det_only(&walker.phi_up, &ru);
                if du == Complex64::ZERO {
                    continue;
                }
                let dd = scratch.det_only(&walker.phi_dn, &rd);
                acc += c.conj() * du * dd;
            }
            Ok(acc * walker.log_scale.exp())
        }
        TrialWavefunction::StateVec(s) => {
            let emb = embed_determinant(walker, &s.state.basis)?;
            Ok(s.state.inner(&emb))
        }
    }
}

fn bits_u8(mut s: u64) -> Vec<u8> {
    let mut v = Vec::new();
    while s != 0 {
        v.push(s.trailing_zeros() as u8);
        s &= s - 1;
    }
    v
}

/// Local energy via the variant-specific route; convenience wrapper over
/// [`PreparedTrial`].
pub fn local_energy(
    trial: &TrialWavefunction,
    walker: &SlaterDeterminant,
    ham: &Hamiltonian,
) -> Result<LocalEnergyValue> {
    PreparedTrial::new(trial, ham)?.local_energy(walker)
}

/// Force-bias components v_g = -sqrt(dtau) <Psi_T| i (L_g - s_g) |walker> /
/// <Psi_T|walker>, with per-component magnitude cap.
pub fn force_bias(
    trial: &TrialWavefunction,
    walker: &SlaterDeterminant,
    ham: &Hamiltonian,
    sqrt_dtau: f64,
    mean_field_shift: &[f64],
    cap: f64,
) -> Result<ForceBias> {
    let prep = PreparedTrial::new(trial, ham)?;
    let (traces, _) = prep.factor_expectations(walker)?;
    Ok(force_bias_from_traces(&traces, mean_field_shift, sqrt_dtau, cap))
}

pub(crate) fn force_bias_from_traces(
    traces: &[Complex64],
    mean_field_shift: &[f64],
    sqrt_dtau: f64,
    cap: f64,
) -> ForceBias {
    let mut capped = 0;
    let values = traces
        .iter()
        .enumerate()
        .map(|(g, t)| {
            let shift = mean_field_shift.get(g).copied().unwrap_or(0.0);
            let mut v = -sqrt_dtau * Complex64::I * (t - shift);
            if v.norm() > cap {
                capped += 1;
                v *= cap / v.norm();
            }
            v
        })
        .collect();
    ForceBias { values, capped }
}

/// Variational energy <Psi_T|H|Psi_T>/<Psi_T|Psi_T>.
pub fn trial_energy(trial: &TrialWavefunction, ham: &Hamiltonian) -> Result<f64> {
    match trial {
        TrialWavefunction::SingleDet(d) => {
            let [g_up, g_dn] = greens_function(d, d)?;
            let (one, two) = energy_from_greens(ham, &g_up, &g_dn);
            let e = one + two + ham.core_energy;
            if e.im.abs() > 1e-8 * e.re.abs().max(1.0) {
                return Err(AfqmcError::Numerical(format!(
                    "trial energy has imaginary part {}",
                    e.im
                )));
            }
            Ok(e.re)
        }
        _ => {
            let (l, n_up, n_dn) = trial.shape();
            let basis = Arc::new(enumerate_sector(l, n_up, n_dn)?);
            let v = trial_to_statevector(trial, &basis)?;
            let mat = build_sector_matrix(ham, &basis)?;
            let mut hv = vec![Complex64::ZERO; basis.len()];
            mat.matvec_complex(&v.amps, &mut hv);
            let num: Complex64 = v.amps.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum();
            let den = v.norm_sqr();
            if den == 0.0 {
                return Err(AfqmcError::Numerical("null trial state".into()));
            }
            Ok((num / den).re)
        }
    }
}

/// Express any trial on an explicit sector basis.
pub fn trial_to_statevector(
    trial: &TrialWavefunction,
    basis: &Arc<SectorBasis>,
) -> Result<Statevector> {
    let (l, n_up, n_dn) = trial.shape();
    if !basis.compatible(l, n_up, n_dn) {
        return Err(AfqmcError::Dimension(format!(
            "trial sector ({l},{n_up},{n_dn}) incompatible with basis ({},{},{})",
            basis.l, basis.n_up, basis.n_dn
        )));
    }
    match trial {
        TrialWavefunction::SingleDet(d) => embed_determinant(d, basis),
        TrialWavefunction::MultiDet(m) => {
            m.validate()?;
            let mut v = Statevector::zeros(Arc::clone(basis));
            for (c, &(up, dn)) in m.coeffs.iter().zip(&m.occs) {
                let idx = basis
                    .index_of(up, dn)
                    .ok_or_else(|| AfqmcError::Input("occupation outside basis".into()))?;
                v.amps[idx] = *c;
            }
            Ok(v)
        }
        TrialWavefunction::StateVec(s) => {
            let mut v = Statevector::zeros(Arc::clone(basis));
            for (i, &a) in s.state.amps.iter().enumerate() {
                if a != Complex64::ZERO {
                    let (up, dn) = s.state.basis.state(i);
                    let idx = basis
                        .index_of(up, dn)
                        .ok_or_else(|| AfqmcError::Input("state outside basis".into()))?;
                    v.amps[idx] = a;
                }
            }
            Ok(v)
        }
    }
}
