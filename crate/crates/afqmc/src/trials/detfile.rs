//! Determinant-list file format shared with the Fock-space tooling.
//!
//! ```text
//! L N_up N_dn
//! coeff_re coeff_im up_bitstring dn_bitstring
//! ```
//!
//! Bitstrings are little-endian ASCII (`char j` = site `j`), coefficients
//! round-trip bitwise through the shortest-representation float formatter.
//! Lines starting with `#` and blank lines are ignored on input.

use super::{MultiDetTrial, TrialProvenance};
use crate::{AfqmcError, Result};
use num_complex::Complex64;
use sha2::{Digest, Sha256};
use std::io::{Read, Write};

pub fn write_determinant_file<W: Write>(mut out: W, trial: &MultiDetTrial) -> Result<()> {
    trial.validate()?;
    writeln!(out, "{} {} {}", trial.l, trial.n_up, trial.n_dn)?;
    for (c, &(up, dn)) in trial.coeffs.iter().zip(&trial.occs) {
        writeln!(
            out,
            "{} {} {} {}",
            c.re,
            c.im,
            bits_to_string(up, trial.l),
            bits_to_string(dn, trial.l)
        )?;
    }
    Ok(())
}

fn bits_to_string(bits: u64, l: usize) -> String {
    (0..l).map(|j| if bits >> j & 1 == 1 { '1' } else { '0' }).collect()
}

fn string_to_bits(s: &str, l: usize) -> Result<u64> {
    if s.len() != l {
        return Err(AfqmcError::Input(format!(
            "bitstring `{s}` does not have {l} characters"
        )));
    }
    let mut bits = 0u64;
    for (j, ch) in s.chars().enumerate() {
        match ch {
            '1' => bits |= 1 << j,
            '0' => {}
            other => {
                return Err(AfqmcError::Input(format!("bad bitstring character `{other}`")));
            }
        }
    }
    Ok(bits)
}

/// Load, validate and normalize a determinant list. Coefficients are left
/// untouched when their norm is already unit to 1e-12 (so write/load
/// round-trips are bitwise); otherwise they are renormalized and the
/// discarded weight recorded. Provenance carries the SHA-256 of the bytes.
pub fn load_determinant_file<R: Read>(mut input: R) -> Result<MultiDetTrial> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let hash = hex_digest(text.as_bytes());

    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| AfqmcError::Input("empty determinant file".into()))?;
    let head: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| AfqmcError::Input(format!("bad header `{header}`")))
        })
        .collect::<Result<_>>()?;
    let [l, n_up, n_dn] = head[..] else {
        return Err(AfqmcError::Input(format!(
            "header must be `L N_up N_dn`, got `{header}`"
        )));
    };

    let mut coeffs = Vec::new();
    let mut occs = Vec::new();
    for line in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 4 {
            return Err(AfqmcError::Input(format!(
                "expected `re im up dn`, got `{line}`"
            )));
        }
        let re: f64 = tokens[0]
            .parse()
            .map_err(|_| AfqmcError::Input(format!("bad coefficient in `{line}`")))?;
        let im: f64 = tokens[1]
            .parse()
            .map_err(|_| AfqmcError::Input(format!("bad coefficient in `{line}`")))?;
        coeffs.push(Complex64::new(re, im));
        occs.push((string_to_bits(tokens[2], l)?, string_to_bits(tokens[3], l)?));
    }

    let norm_sqr: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let mut discarded = 0.0;
    if (norm_sqr - 1.0).abs() > 1e-12 {
        if norm_sqr == 0.0 {
            return Err(AfqmcError::Input("determinant file has zero norm".into()));
        }
        let scale = 1.0 / norm_sqr.sqrt();
        for c in coeffs.iter_mut() {
            *c *= scale;
        }
        discarded = (1.0 - norm_sqr).max(0.0);
    }

    let trial = MultiDetTrial {
        l,
        n_up,
        n_dn,
        coeffs,
        occs,
        provenance: TrialProvenance {
            source: "determinant-file".into(),
            rule: None,
            discarded_weight: Some(discarded),
            file_hash: Some(hash),
            bond_dimension: None,
        },
    };
    trial.validate()?;
    Ok(trial)
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line_file_is_a_one_determinant_trial() {
        let text = "6 3 3\n1.0 0.0 111000 111000\n";
        let trial = load_determinant_file(text.as_bytes()).unwrap();
        assert_eq!(trial.coeffs.len(), 1);
        assert_eq!(trial.occs[0], (0b000111, 0b000111));
        assert_eq!(trial.coeffs[0], Complex64::ONE);
    }

    #[test]
    fn duplicate_occupation_is_rejected() {
        let text = "4 2 2\n0.7 0.0 1100 1100\n0.7 0.0 1100 1100\n";
        assert!(load_determinant_file(text.as_bytes()).is_err());
    }

    #[test]
    fn particle_number_mismatch_is_rejected() {
        let text = "4 2 2\n1.0 0.0 1110 1100\n";
        assert!(load_determinant_file(text.as_bytes()).is_err());
    }

    #[test]
    fn non_finite_coefficient_is_rejected() {
        let text = "4 2 2\ninf 0.0 1100 1100\n";
        assert!(load_determinant_file(text.as_bytes()).is_err());
    }

    #[test]
    fn round_trip_is_bitwise_for_normalized_trials() {
        let trial = MultiDetTrial {
            l: 5,
            n_up: 2,
            n_dn: 2,
            coeffs: vec![
                Complex64::new(0.6, 0.1),
                Complex64::new(-(1.0f64 - 0.37).sqrt(), 0.0),
            ],
            occs: vec![(0b00011, 0b00101), (0b00110, 0b01001)],
            provenance: TrialProvenance::default(),
        };
        // Make it exactly unit norm in floating point.
        let n = trial.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>();
        assert!((n - 1.0).abs() < 1e-12);
        let mut buf = Vec::new();
        write_determinant_file(&mut buf, &trial).unwrap();
        let back = load_determinant_file(&buf[..]).unwrap();
        assert_eq!(back.coeffs, trial.coeffs);
        assert_eq!(back.occs, trial.occs);
        assert!(back.provenance.file_hash.is_some());
    }
}
