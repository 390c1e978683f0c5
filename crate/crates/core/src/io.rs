//! CSV formats for profiles and ψ tables.
//!
//! Numbers are written with 17 significant digits, which round-trips every `f64`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::profile::{RadialGrid, SolitonProfile};
use crate::psi::PsiProfile;

pub const PROFILE_MAGIC: &str = "# soliton-forge profile v1";
pub const PROFILE_HEADER: &str = "r,phi,dphi,ddphi,df,ddf";
pub const PSI_MAGIC: &str = "# soliton-forge psi v1";
pub const PSI_HEADER: &str = "s,psi,dpsi,u";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_profile_csv(profile: &SolitonProfile) -> String {
    let mut out = format!("{PROFILE_MAGIC}; exact_soliton={}\n{PROFILE_HEADER}\n", profile.is_exact_soliton());
    for (i, &r) in profile.grid().nodes().iter().enumerate() {
        let row = [r, profile.phi()[i], profile.dphi()[i], profile.ddphi()[i], profile.df()[i], profile.ddf()[i]];
        let _ = writeln!(out, "{}", row.map(num).join(","));
    }
    out
}

/// Non-empty lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_row<const N: usize>(line: usize, text: &str) -> Result<[f64; N]> {
    let fields: Vec<&str> = text.split(',').map(str::trim).collect();
    if fields.len() != N {
        return Err(Error::Parse { line, reason: format!("expected {N} fields, found {}", fields.len()) });
    }
    let mut row = [0.0; N];
    for (k, f) in fields.iter().enumerate() {
        row[k] = f.parse().map_err(|_| Error::Parse { line, reason: format!("invalid number {f:?}") })?;
    }
    Ok(row)
}

pub fn read_profile_csv(text: &str) -> Result<SolitonProfile> {
    let mut it = lines(text);
    let (l1, magic) = it.next().ok_or(Error::Parse { line: 1, reason: "empty profile file".into() })?;
    let exact = magic
        .strip_prefix(PROFILE_MAGIC)
        .and_then(|rest| rest.trim().strip_prefix(';'))
        .map(str::trim)
        .and_then(|flag| flag.strip_prefix("exact_soliton="))
        .ok_or_else(|| Error::Parse { line: l1, reason: format!("expected `{PROFILE_MAGIC}; exact_soliton=<bool>`") })?;
    let exact = match exact {
        "true" => true,
        "false" => false,
        other => return Err(Error::Parse { line: l1, reason: format!("invalid exact_soliton flag {other:?}") }),
    };
    let (l2, header) = it.next().ok_or(Error::Parse { line: l1 + 1, reason: "missing header".into() })?;
    if header != PROFILE_HEADER {
        return Err(Error::Parse { line: l2, reason: format!("expected header `{PROFILE_HEADER}`") });
    }
    let mut line_of = Vec::new();
    let mut cols: [Vec<f64>; 6] = Default::default();
    for (ln, text) in it {
        let row = parse_row::<6>(ln, text)?;
        for (c, v) in cols.iter_mut().zip(row) {
            c.push(v);
        }
        line_of.push(ln);
    }
    let [r, phi, dphi, ddphi, df, ddf] = cols;
    if let Some(i) = r.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Parse { line: line_of[i + 1], reason: format!("nodes not increasing at index {}", i + 1) });
    }
    let last = line_of.last().copied().unwrap_or(l2);
    let grid = RadialGrid::new(r).map_err(|e| Error::Parse { line: last, reason: e.to_string() })?;
    SolitonProfile::from_samples(grid, phi, dphi, ddphi, df, ddf, exact)
}

pub fn write_psi_csv(psi: &PsiProfile) -> String {
    let mut out = format!("{PSI_MAGIC}\n{PSI_HEADER}\n");
    for k in 0..psi.len() {
        let row = [psi.s_nodes()[k], psi.psi()[k], psi.dpsi()[k], psi.u()[k]];
        let _ = writeln!(out, "{}", row.map(num).join(","));
    }
    out
}

/// Rows `(s, ψ, ψ', u)` of a ψ table.
pub fn read_psi_csv(text: &str) -> Result<Vec<[f64; 4]>> {
    let mut it = lines(text);
    match it.next() {
        Some((_, l)) if l == PSI_MAGIC => {}
        Some((ln, _)) => return Err(Error::Parse { line: ln, reason: format!("expected `{PSI_MAGIC}`") }),
        None => return Err(Error::Parse { line: 1, reason: "empty psi file".into() }),
    }
    match it.next() {
        Some((_, l)) if l == PSI_HEADER => {}
        Some((ln, _)) => return Err(Error::Parse { line: ln, reason: format!("expected header `{PSI_HEADER}`") }),
        None => return Err(Error::Parse { line: 2, reason: "missing header".into() }),
    }
    let mut rows: Vec<[f64; 4]> = Vec::new();
    for (ln, text) in it {
        let row = parse_row::<4>(ln, text)?;
        if rows.last().is_some_and(|p| row[0] <= p[0]) {
            return Err(Error::Parse { line: ln, reason: format!("nodes not increasing at index {}", rows.len()) });
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(n: usize) -> SolitonProfile {
        let grid = RadialGrid::uniform(0.1, 2.0, n).unwrap();
        let r = grid.nodes().to_vec();
        let z = vec![0.0; n];
        SolitonProfile::from_samples(grid, r.clone(), vec![1.0; n], z.clone(), z.clone(), z, false).unwrap()
    }

    #[test]
    fn profile_round_trip_is_bit_exact() {
        let p = flat(20).with_scaled_df(1.0).unwrap();
        let back = read_profile_csv(&write_profile_csv(&p)).unwrap();
        assert_eq!(back.grid().nodes(), p.grid().nodes());
        assert_eq!(back.phi(), p.phi());
        assert!(!back.is_exact_soliton());
    }

    #[test]
    fn shuffled_rows_are_rejected_with_line_number() {
        let text = write_profile_csv(&flat(20));
        let mut lines: Vec<&str> = text.lines().collect();
        lines.swap(5, 6);
        let err = read_profile_csv(&lines.join("\n")).unwrap_err();
        match err {
            Error::Parse { line, reason } => {
                assert_eq!(line, 7);
                assert!(reason.contains("nodes not increasing"), "{reason}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_numbers_and_headers() {
        let text = write_profile_csv(&flat(20)).replacen("1.0000000000000000e0", "abc", 1);
        assert!(matches!(read_profile_csv(&text), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(read_profile_csv("# soliton-forge profile v1; exact_soliton=true\nr,phi\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_profile_csv("r,phi,dphi,ddphi,df,ddf\n"), Err(Error::Parse { line: 1, .. })));
    }
}
