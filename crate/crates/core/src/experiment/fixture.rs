//! Matrix text format: row-major whitespace-separated decimals, one matrix
//! per block, blocks separated by a line containing only `---`. Lines
//! starting with `#` are comments.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lie::{GroupElement, GroupTag};
use crate::matrix::SquareMatrix;

/// Orthogonality error up to which loaded matrices are snapped onto the group.
pub const LOAD_REPROJECTION_TOL: f64 = 1e-3;

/// Formats a float with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_matrices(text: &str, tag: GroupTag) -> Result<Vec<SquareMatrix<f64>>> {
    let dim = tag.matrix_dim();
    let mut out = Vec::new();
    let mut entries: Vec<f64> = Vec::new();
    let mut block_start = 1;

    let mut flush = |entries: &mut Vec<f64>, line: usize| -> Result<()> {
        if entries.is_empty() {
            return Ok(());
        }
        if entries.len() != dim * dim {
            return Err(Error::parse(
                line,
                format!(
                    "{tag} matrix needs {} entries, block has {}",
                    dim * dim,
                    entries.len()
                ),
            ));
        }
        out.push(SquareMatrix::from_row_major(dim, entries)?);
        entries.clear();
        Ok(())
    };

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "---" {
            flush(&mut entries, block_start)?;
            block_start = line_no + 1;
            continue;
        }
        if entries.is_empty() {
            block_start = line_no;
        }
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::parse(line_no, format!("`{tok}` is not a number")))?;
            entries.push(v);
        }
    }
    flush(&mut entries, block_start)?;
    Ok(out)
}

/// Parses matrices and snaps each onto the group, rejecting any whose
/// rotation block is further than [`LOAD_REPROJECTION_TOL`] from orthogonal.
pub fn parse_elements(text: &str, tag: GroupTag) -> Result<Vec<GroupElement<f64>>> {
    parse_matrices(text, tag)?
        .into_iter()
        .enumerate()
        .map(|(k, m)| {
            GroupElement::from_approximate(tag, m, LOAD_REPROJECTION_TOL)
                .map_err(|e| Error::config("initial", format!("matrix {k}: {e}")))
        })
        .collect()
}

pub fn format_matrices(mats: &[SquareMatrix<f64>]) -> String {
    let mut s = String::new();
    for (k, m) in mats.iter().enumerate() {
        if k > 0 {
            s.push_str("---\n");
        }
        for r in 0..m.dim() {
            let row: Vec<String> = (0..m.dim()).map(|c| format_real(m[(r, c)])).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let a =
            SquareMatrix::from_rows([[0.1, 1.0 / 3.0, -0.0], [1e-300, -2.5, 7.0], [1.0, 2.0, 3.0]]);
        let text = format_matrices(&[a, a.scale(-1.0)]);
        let back = parse_matrices(&text, GroupTag::So3).unwrap();
        assert_eq!(back.len(), 2);
        for (x, y) in back[0].to_row_major().iter().zip(a.to_row_major()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn wrong_block_size_reports_line() {
        let err = parse_matrices("1 0 0\n0 1 0\n---\n1 2\n", GroupTag::So3).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse_matrices("1 0 0\n0 x 0\n0 0 1\n", GroupTag::So3).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn shipped_fixtures_load() {
        let so3 = parse_elements(
            include_str!("../../fixtures/so3_three_agents.txt"),
            GroupTag::So3,
        )
        .unwrap();
        assert_eq!(so3.len(), 3);
        let se3 = parse_elements(
            include_str!("../../fixtures/se3_three_agents.txt"),
            GroupTag::Se3,
        )
        .unwrap();
        assert_eq!(se3[2].translation(), [5.0, 2.0, 0.0]);
    }

    #[test]
    fn far_from_orthogonal_is_rejected() {
        let err = parse_elements("1 0.5 0\n0 1 0\n0 0 1\n", GroupTag::So3).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }
}
