//! FCIDUMP ingestion: namelist header, free-format integral records,
//! immediate Cholesky factorization of the two-body tensor.

use super::{cholesky_factorize_eri, EriTensor, Hamiltonian, HamiltonianKind};
use crate::constants::EnergyUnit;
use crate::{AfqmcError, Result};
use nalgebra::DMatrix;
use std::io::BufRead;

/// Default factorization tolerance for ingested integrals.
pub const FCIDUMP_CHOLESKY_TOL: f64 = 1e-10;

/// Parse an FCIDUMP stream (chemists' notation, 8-fold real symmetry).
///
/// Header: a `&FCI NORB=...,NELEC=...,MS2=...` namelist terminated by
/// `&END` or `/`. Records: `value i j k l` with 1-based indices;
/// `(0,0,0,0)` carries the core energy, `k=l=0` one-body elements, the rest
/// two-body integrals. Complex or non-finite values are rejected.
pub fn read_fcidump<R: BufRead>(reader: R) -> Result<Hamiltonian> {
    let mut lines = reader.lines();

    let mut header = String::new();
    for line in lines.by_ref() {
        let line = line?;
        header.push_str(&line.to_ascii_uppercase());
        header.push(' ');
        let l = line.to_ascii_uppercase();
        if l.contains("&END") || l.contains("$END") || l.trim_end().ends_with('/') {
            break;
        }
    }
    let norb = header_int(&header, "NORB")?;
    let nelec = header_int(&header, "NELEC")?;
    let ms2 = header_int_or(&header, "MS2", 0)?;
    if norb == 0 {
        return Err(AfqmcError::Input("FCIDUMP declares NORB=0".into()));
    }
    if (nelec + ms2) % 2 != 0 || ms2.unsigned_abs() as usize > nelec as usize {
        return Err(AfqmcError::Input(format!(
            "inconsistent NELEC={nelec} MS2={ms2}"
        )));
    }
    let m = norb as usize;
    let n_up = ((nelec + ms2) / 2) as usize;
    let n_dn = ((nelec - ms2) / 2) as usize;
    if n_up > m || n_dn > m {
        return Err(AfqmcError::Input(format!(
            "electron count {nelec} exceeds capacity of {m} orbitals"
        )));
    }

    let mut h = DMatrix::<f64>::zeros(m, m);
    let mut eri = EriTensor::zeros(m);
    let mut core = 0.0;
    for line in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let value: f64 = it
            .next()
            .unwrap()
            .parse()
            .map_err(|_| AfqmcError::Input(format!("bad integral value in `{trimmed}`")))?;
        if !value.is_finite() {
            return Err(AfqmcError::Input(format!("non-finite integral in `{trimmed}`")));
        }
        let idx: Vec<i64> = it
            .map(|t| {
                t.parse()
                    .map_err(|_| AfqmcError::Input(format!("bad index in `{trimmed}`")))
            })
            .collect::<Result<_>>()?;
        if idx.len() != 4 {
            return Err(AfqmcError::Input(format!(
                "expected `value i j k l`, got `{trimmed}`"
            )));
        }
        let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
        for (&x, name) in [(&i, "i"), (&j, "j"), (&k, "k"), (&l, "l")] {
            if *x < 0 || *x as usize > m {
                return Err(AfqmcError::Input(format!(
                    "index {name}={x} out of range 0..={m} in `{trimmed}`"
                )));
            }
        }
        match (i, j, k, l) {
            (0, 0, 0, 0) => core = value,
            (_, _, 0, 0) => {
                if i == 0 || j == 0 {
                    return Err(AfqmcError::Input(format!("bad one-body record `{trimmed}`")));
                }
                let (i, j) = (i as usize - 1, j as usize - 1);
                h[(i, j)] = value;
                h[(j, i)] = value;
            }
            _ => {
                if i == 0 || j == 0 || k == 0 || l == 0 {
                    return Err(AfqmcError::Input(format!("bad two-body record `{trimmed}`")));
                }
                eri.set_symmetric(
                    i as usize - 1,
                    j as usize - 1,
                    k as usize - 1,
                    l as usize - 1,
                    value,
                );
            }
        }
    }

    let factors = cholesky_factorize_eri(&eri, FCIDUMP_CHOLESKY_TOL)?;
    Ok(Hamiltonian {
        core_energy: core,
        one_body: h,
        factors,
        unit: EnergyUnit::Hartree,
        suggested_filling: Some((n_up, n_dn)),
        kind: HamiltonianKind::AbInitio,
    })
}

fn header_int(header: &str, key: &str) -> Result<i64> {
    header_find(header, key)?
        .ok_or_else(|| AfqmcError::Input(format!("FCIDUMP header missing {key}")))
}

fn header_int_or(header: &str, key: &str, default: i64) -> Result<i64> {
    Ok(header_find(header, key)?.unwrap_or(default))
}

fn header_find(header: &str, key: &str) -> Result<Option<i64>> {
    let Some(pos) = header.find(&format!("{key}=")) else {
        return Ok(None);
    };
    let rest = &header[pos + key.len() + 1..];
    let token: String = rest
        .chars()
        .take_while(|c| c.is_ascii_digit() || *c == '-' || *c == '+')
        .collect();
    token
        .parse()
        .map(Some)
        .map_err(|_| AfqmcError::Input(format!("cannot parse {key} from FCIDUMP header")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn single_orbital_closed_form() {
        // h11 = -1, (11|11) = 0.5, core 0.1, two electrons:
        // E = 0.1 + 2*(-1) + 0.5 = -1.4.
        let text = "&FCI NORB=1,NELEC=2,MS2=0,\n&END\n\
                    0.5 1 1 1 1\n\
                    -1.0 1 1 0 0\n\
                    0.1 0 0 0 0\n";
        let ham = read_fcidump(Cursor::new(text)).unwrap();
        assert_eq!(ham.n_orbitals(), 1);
        assert_eq!(ham.suggested_filling, Some((1, 1)));
        // Doubly occupied single orbital: E = core + 2 h11 + (11|11).
        let eri = ham.reconstruct_eri().unwrap();
        let e = ham.core_energy + 2.0 * ham.one_body[(0, 0)] + eri.at(0, 0, 0, 0);
        assert!((e - (-1.4)).abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range_indices_and_nan() {
        let bad_idx = "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n1.0 3 1 0 0\n";
        assert!(read_fcidump(Cursor::new(bad_idx)).is_err());
        let nan = "&FCI NORB=2,NELEC=2,MS2=0,\n&END\nNaN 1 1 0 0\n";
        assert!(read_fcidump(Cursor::new(nan)).is_err());
        let no_norb = "&FCI NELEC=2,MS2=0,\n&END\n";
        assert!(read_fcidump(Cursor::new(no_norb)).is_err());
    }

    #[test]
    fn symmetry_images_are_populated() {
        // PSD by construction: (pq|rs) = A_pq A_rs, A = [[1, .25], [.25, .5]].
        let text = "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n\
                    1.0 1 1 1 1\n\
                    0.25 2 1 1 1\n\
                    0.0625 2 1 2 1\n\
                    0.5 2 2 1 1\n\
                    0.125 2 2 2 1\n\
                    0.25 2 2 2 2\n";
        let ham = read_fcidump(Cursor::new(text)).unwrap();
        let eri = ham.reconstruct_eri().unwrap();
        for (p, q, r, s) in [
            (1, 0, 0, 0),
            (0, 1, 0, 0),
            (0, 0, 1, 0),
            (0, 0, 0, 1),
        ] {
            assert!((eri.at(p, q, r, s) - 0.25).abs() < 1e-9, "image ({p}{q}|{r}{s})");
        }
    }
}
