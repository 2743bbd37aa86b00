//! Generalized multi-orbital coupling tables and their reduction to the
//! one-band chain model.
//!
//! File format (UTF-8, `#` comments, energy unit declared before the first
//! section):
//!
//! ```text
//! unit = eV
//! [t]
//! m m' Rx Ry Rz value
//! [U]
//! m m' Rx Ry Rz value
//! [J]
//! m m' Rx Ry Rz value
//! ```

use super::{Boundary, HubbardChainParams};
use crate::constants::EnergyUnit;
use crate::{AfqmcError, Result};
use std::collections::BTreeMap;
use std::io::BufRead;

pub type LatticeVector = [i32; 3];

/// Transfer, direct and exchange integrals keyed by orbital pair and
/// lattice vector. Hermiticity t_mm'(R) = t_m'm(-R) is enforced on
/// ingestion for real tables.
#[derive(Debug, Clone)]
pub struct GeneralizedHubbardTable {
    pub unit: EnergyUnit,
    pub transfer: BTreeMap<(usize, usize, LatticeVector), f64>,
    pub direct: BTreeMap<(usize, usize), f64>,
    pub exchange: BTreeMap<(usize, usize), f64>,
}

impl GeneralizedHubbardTable {
    pub fn empty(unit: EnergyUnit) -> Self {
        GeneralizedHubbardTable {
            unit,
            transfer: BTreeMap::new(),
            direct: BTreeMap::new(),
            exchange: BTreeMap::new(),
        }
    }

    /// Validate hermiticity of transfer integrals and the on-site
    /// direct/exchange identity U_mm = J_mm that encodes Pauli exclusion.
    pub fn validate(&self) -> Result<()> {
        for (&(m, mp, r), &v) in &self.transfer {
            let mirror = (mp, m, [-r[0], -r[1], -r[2]]);
            if let Some(&w) = self.transfer.get(&mirror) {
                if (v - w).abs() > 1e-12 {
                    return Err(AfqmcError::Input(format!(
                        "transfer table breaks hermiticity: t[{m},{mp},{r:?}]={v} vs t[{mirror:?}]={w}"
                    )));
                }
            }
        }
        for (&(m, mp), &u) in &self.direct {
            if m == mp {
                if let Some(&j) = self.exchange.get(&(m, mp)) {
                    if (u - j).abs() > 1e-12 {
                        return Err(AfqmcError::Input(format!(
                            "on-site U[{m}]={u} != J[{m}]={j}; Pauli exclusion requires equality"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One coupling removed by [`reduce_generalized_table`].
#[derive(Debug, Clone, PartialEq)]
pub struct DroppedCoupling {
    pub label: String,
    pub vector: LatticeVector,
    pub value: f64,
}

/// Result of projecting a single-orbital table onto the chain model.
#[derive(Debug, Clone)]
pub struct ReducedChain {
    pub params: HubbardChainParams,
    /// On-site t(000): reported but excluded from the chain model, whose
    /// only on-site term is the -U/2 shift.
    pub onsite_energy: f64,
    pub dropped: Vec<DroppedCoupling>,
    /// Non-contiguity and similar diagnostics; an empty list means a clean
    /// reduction.
    pub warnings: Vec<String>,
}

fn vector_label(r: LatticeVector) -> String {
    match r {
        [0, 0, 0] => "t(000)".into(),
        [1, 0, 0] => "t_x".into(),
        [2, 0, 0] => "t_xx".into(),
        [3, 0, 0] => "t_xxx".into(),
        [4, 0, 0] => "t_xxxx".into(),
        [0, 1, 0] => "t_y".into(),
        [0, 0, 1] => "t_z".into(),
        [1, 1, 0] => "t_xy".into(),
        _ => format!("t({},{},{})", r[0], r[1], r[2]),
    }
}

/// Keep chain couplings with |t| > threshold among first, second and third
/// x-neighbors; report everything else dropped. Couplings the chain model
/// cannot represent (beyond third x-neighbor or off-axis) must fall below
/// the threshold or the reduction fails.
pub fn reduce_generalized_table(
    table: &GeneralizedHubbardTable,
    threshold: f64,
    l: usize,
    boundary: Boundary,
) -> Result<ReducedChain> {
    if threshold < 0.0 {
        return Err(AfqmcError::Input("threshold must be >= 0".into()));
    }
    table.validate()?;
    if table.transfer.keys().any(|&(m, mp, _)| m != mp || m != 0) {
        return Err(AfqmcError::Input(
            "reduction requires a single-orbital table (m = m' = 0)".into(),
        ));
    }

    let mut onsite = 0.0;
    let mut kept = [0.0f64; 3];
    let mut dropped = Vec::new();
    let mut warnings = Vec::new();

    for (&(_, _, r), &v) in &table.transfer {
        // Fold hermitian mirror images onto the positive-x representative.
        let rep = if r[0] < 0 || (r[0] == 0 && (r[1] < 0 || (r[1] == 0 && r[2] < 0))) {
            continue;
        } else {
            r
        };
        match rep {
            [0, 0, 0] => onsite = v,
            [d @ 1..=3, 0, 0] => {
                if v.abs() > threshold {
                    kept[d as usize - 1] = v;
                } else {
                    dropped.push(DroppedCoupling {
                        label: vector_label(rep),
                        vector: rep,
                        value: v,
                    });
                }
            }
            other => {
                if v.abs() > threshold {
                    return Err(AfqmcError::Input(format!(
                        "coupling {} = {v} exceeds threshold {threshold} but the chain model cannot represent it",
                        vector_label(other)
                    )));
                }
                dropped.push(DroppedCoupling {
                    label: vector_label(other),
                    vector: other,
                    value: v,
                });
            }
        }
    }

    // Non-contiguity diagnostic: a nearer neighbor dropped while a farther
    // one survives.
    for near in 0..3 {
        for far in near + 1..3 {
            if kept[near] == 0.0 && kept[far] != 0.0 {
                let has_near = table
                    .transfer
                    .contains_key(&(0, 0, [near as i32 + 1, 0, 0]));
                if has_near {
                    warnings.push(format!(
                        "non-contiguous hopping range: {} fell below threshold {threshold} while {} survives",
                        vector_label([near as i32 + 1, 0, 0]),
                        vector_label([far as i32 + 1, 0, 0]),
                    ));
                }
            }
        }
    }

    let u = table.direct.get(&(0, 0)).copied().unwrap_or(0.0);
    let params = HubbardChainParams {
        t_x: kept[0],
        t_xx: kept[1],
        t_xxx: kept[2],
        u,
        l,
        boundary,
    };
    Ok(ReducedChain {
        params,
        onsite_energy: onsite,
        dropped,
        warnings,
    })
}

/// Parse a coupling-table file.
pub fn read_coupling_table<R: BufRead>(reader: R) -> Result<GeneralizedHubbardTable> {
    let mut unit: Option<EnergyUnit> = None;
    let mut section: Option<char> = None;
    let mut table = GeneralizedHubbardTable::empty(EnergyUnit::ElectronVolt);

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| AfqmcError::Input(format!("line {}: {msg}", lineno + 1));
        if let Some(rest) = content.strip_prefix("unit") {
            let rest = rest.trim_start();
            let value = rest
                .strip_prefix('=')
                .ok_or_else(|| err("expected `unit = <name>`".into()))?;
            unit = Some(
                value
                    .trim()
                    .parse()
                    .map_err(|e: String| err(e))?,
            );
            continue;
        }
        match content {
            "[t]" => {
                section = Some('t');
                continue;
            }
            "[U]" => {
                section = Some('U');
                continue;
            }
            "[J]" => {
                section = Some('J');
                continue;
            }
            _ => {}
        }
        let Some(sec) = section else {
            return Err(err(format!("data before any section: `{content}`")));
        };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 6 {
            return Err(err(format!("expected `m m' Rx Ry Rz value`, got `{content}`")));
        }
        let m: usize = tokens[0].parse().map_err(|_| err("bad orbital index".into()))?;
        let mp: usize = tokens[1].parse().map_err(|_| err("bad orbital index".into()))?;
        let r: LatticeVector = [
            tokens[2].parse().map_err(|_| err("bad lattice vector".into()))?,
            tokens[3].parse().map_err(|_| err("bad lattice vector".into()))?,
            tokens[4].parse().map_err(|_| err("bad lattice vector".into()))?,
        ];
        let v: f64 = tokens[5].parse().map_err(|_| err("bad value".into()))?;
        if !v.is_finite() {
            return Err(err("non-finite value".into()));
        }
        match sec {
            't' => {
                table.transfer.insert((m, mp, r), v);
            }
            'U' | 'J' => {
                if r != [0, 0, 0] {
                    return Err(err("U/J entries must be on-site (static limit)".into()));
                }
                if sec == 'U' {
                    table.direct.insert((m, mp), v);
                } else {
                    table.exchange.insert((m, mp), v);
                }
            }
            _ => unreachable!(),
        }
    }
    if let Some(u) = unit {
        table.unit = u;
    } else {
        return Err(AfqmcError::Input(
            "coupling table must declare `unit = ...` in its header".into(),
        ));
    }
    table.validate()?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn cubr2_table() -> GeneralizedHubbardTable {
        let text = "\
# single-orbital chain couplings
unit = eV
[t]
0 0 0 0 0 -1.0987
0 0 1 0 0 0.0478
0 0 2 0 0 0.1570
0 0 3 0 0 0.0339
0 0 4 0 0 0.0059
0 0 0 1 0 0.0019
0 0 0 0 1 -0.0046
0 0 1 1 0 -0.0005
[U]
0 0 0 0 0 4.15
[J]
0 0 0 0 0 4.15
";
        read_coupling_table(Cursor::new(text)).unwrap()
    }

    #[test]
    fn reduction_keeps_first_three_neighbors() {
        let table = cubr2_table();
        let red = reduce_generalized_table(&table, 0.01, 6, Boundary::Open).unwrap();
        assert_eq!(red.params.t_x, 0.0478);
        assert_eq!(red.params.t_xx, 0.1570);
        assert_eq!(red.params.t_xxx, 0.0339);
        assert_eq!(red.params.u, 4.15);
        assert_eq!(red.onsite_energy, -1.0987);
        let mut dropped: Vec<(String, f64)> = red
            .dropped
            .iter()
            .map(|d| (d.label.clone(), d.value))
            .collect();
        dropped.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(
            dropped,
            vec![
                ("t_xxxx".to_string(), 0.0059),
                ("t_xy".to_string(), -0.0005),
                ("t_y".to_string(), 0.0019),
                ("t_z".to_string(), -0.0046),
            ]
        );
        assert!(red.warnings.is_empty());
        // Coupling-strength ratio used downstream stays deep in the
        // antiferromagnetic regime.
        let max_t = red.params.t_x.abs().max(red.params.t_xx.abs()).max(red.params.t_xxx.abs());
        assert!(red.params.u / max_t > 20.0);
    }

    #[test]
    fn empty_table_reduces_to_zero_params() {
        let mut t = GeneralizedHubbardTable::empty(EnergyUnit::ElectronVolt);
        t.direct.insert((0, 0), 0.0);
        let red = reduce_generalized_table(&t, 0.0, 4, Boundary::Open).unwrap();
        assert_eq!(red.params.t_x, 0.0);
        assert_eq!(red.params.u, 0.0);
        assert!(red.dropped.is_empty());
        assert!(red.warnings.is_empty());
    }

    #[test]
    fn high_threshold_flags_non_contiguous_range() {
        let table = cubr2_table();
        let red = reduce_generalized_table(&table, 0.05, 6, Boundary::Open).unwrap();
        assert_eq!(red.params.t_x, 0.0);
        assert_eq!(red.params.t_xx, 0.1570);
        assert_eq!(red.params.t_xxx, 0.0);
        assert!(!red.warnings.is_empty(), "expected non-contiguity diagnostic");
    }

    #[test]
    fn unrepresentable_large_coupling_is_an_error() {
        let mut table = cubr2_table();
        table.transfer.insert((0, 0, [4, 0, 0]), 0.5);
        assert!(reduce_generalized_table(&table, 0.01, 6, Boundary::Open).is_err());
    }

    #[test]
    fn pauli_violation_is_rejected() {
        let text = "unit = eV\n[U]\n0 0 0 0 0 4.0\n[J]\n0 0 0 0 0 3.0\n";
        assert!(read_coupling_table(Cursor::new(text)).is_err());
    }
}
