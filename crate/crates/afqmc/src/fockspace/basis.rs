//! Occupation-number bases for fixed (N_up, N_dn) sectors.

use crate::constants::DIMENSION_CAP;
use crate::{AfqmcError, Result};
use std::collections::HashMap;

/// Ordered basis of a particle-number sector. States are pairs of
/// little-endian occupation bitstrings (bit `p` = site `p`), enumerated in
/// ascending numeric order with the up string outermost:
/// `index = up_rank * C(L, N_dn) + dn_rank`.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    pub l: usize,
    pub n_up: usize,
    pub n_dn: usize,
    up_states: Vec<u64>,
    dn_states: Vec<u64>,
    up_pos: HashMap<u64, u32>,
    dn_pos: HashMap<u64, u32>,
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// All `n`-bit subsets of `l` sites in ascending numeric order.
fn bit_combinations(l: usize, n: usize) -> Vec<u64> {
    if n == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut v: u64 = (1 << n) - 1;
    let limit: u64 = 1 << l;
    while v < limit {
        out.push(v);
        // Gosper's hack: next larger integer with the same popcount.
        let t = v | (v - 1);
        v = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
    }
    out
}

/// Enumerate the (N_up, N_dn) sector with the default dimension cap.
pub fn enumerate_sector(l: usize, n_up: usize, n_dn: usize) -> Result<SectorBasis> {
    enumerate_sector_capped(l, n_up, n_dn, DIMENSION_CAP)
}

pub fn enumerate_sector_capped(l: usize, n_up: usize, n_dn: usize, cap: usize) -> Result<SectorBasis> {
    if l == 0 || l > 63 {
        return Err(AfqmcError::Dimension(format!("unsupported site count {l}")));
    }
    if n_up > l || n_dn > l {
        return Err(AfqmcError::Input(format!(
            "cannot place ({n_up},{n_dn}) electrons on {l} sites"
        )));
    }
    let dim = binomial(l, n_up) * binomial(l, n_dn);
    if dim > cap as u128 {
        return Err(AfqmcError::Dimension(format!(
            "sector dimension {dim} exceeds cap {cap}"
        )));
    }
    let up_states = bit_combinations(l, n_up);
    let dn_states = bit_combinations(l, n_dn);
    let up_pos = up_states
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, i as u32))
        .collect();
    let dn_pos = dn_states
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, i as u32))
        .collect();
    Ok(SectorBasis {
        l,
        n_up,
        n_dn,
        up_states,
        dn_states,
        up_pos,
        dn_pos,
    })
}

impl SectorBasis {
    pub fn len(&self) -> usize {
        self.up_states.len() * self.dn_states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn up_states(&self) -> &[u64] {
        &self.up_states
    }

    pub fn dn_states(&self) -> &[u64] {
        &self.dn_states
    }

    pub fn index_of(&self, up: u64, dn: u64) -> Option<usize> {
        let iu = *self.up_pos.get(&up)? as usize;
        let idn = *self.dn_pos.get(&dn)? as usize;
        Some(iu * self.dn_states.len() + idn)
    }

    pub fn state(&self, index: usize) -> (u64, u64) {
        let nd = self.dn_states.len();
        (self.up_states[index / nd], self.dn_states[index % nd])
    }

    pub fn up_rank(&self, up: u64) -> Option<usize> {
        self.up_pos.get(&up).map(|&i| i as usize)
    }

    pub fn dn_rank(&self, dn: u64) -> Option<usize> {
        self.dn_pos.get(&dn).map(|&i| i as usize)
    }

    /// The basis carries the same particle content as another.
    pub fn compatible(&self, l: usize, n_up: usize, n_dn: usize) -> bool {
        self.l == l && self.n_up == n_up && self.n_dn == n_dn
    }
}
