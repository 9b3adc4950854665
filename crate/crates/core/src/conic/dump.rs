use std::io::{self, Write};

use super::{RowKind, Sense, SdpProblem};

/// Writes `p` in a plain sparse-triplet text format for cross-checking with
/// external solvers.
///
/// ```text
/// sense max
/// psd_dim 36
/// free_dim 27
/// rows 56
/// objective
/// X i j value        (upper triangle, i <= j, of the dense coefficient)
/// y k value
/// constraint 0 le 0.0
/// X i j value
/// y k value
/// ...
/// ```
pub fn write_triplets<W: Write>(p: &SdpProblem, mut out: W) -> io::Result<()> {
    let sense = match p.sense {
        Sense::Minimize => "min",
        Sense::Maximize => "max",
    };
    writeln!(out, "sense {sense}")?;
    writeln!(out, "psd_dim {}", p.psd_dim)?;
    writeln!(out, "free_dim {}", p.free_dim)?;
    writeln!(out, "rows {}", p.rows.len())?;

    let section = |out: &mut W, x: &super::SymCoef, y: &super::SparseVec| -> io::Result<()> {
        let dense = x.to_dense(p.psd_dim);
        for i in 0..p.psd_dim {
            for j in i..p.psd_dim {
                let v = dense[(i, j)];
                if v != 0.0 {
                    writeln!(out, "X {i} {j} {v:e}")?;
                }
            }
        }
        for &(k, v) in y {
            writeln!(out, "y {k} {v:e}")?;
        }
        Ok(())
    };

    writeln!(out, "objective")?;
    section(&mut out, &p.objective.x, &p.objective.y)?;
    for (k, r) in p.rows.iter().enumerate() {
        let kind = match r.kind {
            RowKind::Eq => "eq",
            RowKind::Le => "le",
        };
        writeln!(out, "constraint {k} {kind} {:e}", r.rhs)?;
        section(&mut out, &r.x, &r.y)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{Constraint, SymCoef};

    #[test]
    fn dump_layout() {
        let mut p = SdpProblem::new(2, 1, Sense::Minimize);
        p.objective.x.element(0, 0, 1.0);
        let mut a = SymCoef::new();
        a.element(0, 1, 2.0);
        p.rows.push(Constraint::le(a, vec![(0, -1.0)], 3.0));
        let mut buf = Vec::new();
        write_triplets(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "sense min\npsd_dim 2\nfree_dim 1\nrows 1\nobjective\nX 0 0 1e0\n\
             constraint 0 le 3e0\nX 0 1 1e0\ny 0 -1e0\n"
        );
    }
}
