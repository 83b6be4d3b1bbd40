//! Plain-text LP instances.
//!
//! The format is one item per line, with `#` starting a comment anywhere:
//!
//! ```text
//! # first data line: row and column counts
//! m n
//! # next m lines: the rows of A
//! a11 a12 … a1n
//! …
//! # then the affine part, either a right-hand side or a shift:
//! b v1 … vm        (a particular solution d with Ad = b is computed)
//! d v1 … vn        (used directly)
//! # optionally an objective:
//! c v1 … vn
//! ```
//!
//! The problem encoded is `min ⟨c, x⟩ over Ax = Ad, x ≥ 0` — equivalently
//! `x ∈ ker(A) + d, x ≥ 0` — and plain feasibility of the same set when
//! the objective line is absent.

use crate::dense::{self, norm_inf, Matrix, Vector};

use crate::error::{Error, Result};
use crate::tol::Tolerance;

/// A parsed instance: constraints, a particular solution, and an optional
/// objective.
#[derive(Debug, Clone)]
pub struct Instance {
    /// Display name (file stem or generator tag).
    pub name: String,
    /// The constraint matrix `A`.
    pub a: Matrix,
    /// A particular solution of `Ax = b` (read directly or recovered by
    /// least squares when the file gives `b`).
    pub d: Vector,
    /// The objective, when the instance is an optimization problem.
    pub c: Option<Vector>,
}

impl Instance {
    /// Rows of `A`.
    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    /// Ambient dimension.
    pub fn cols(&self) -> usize {
        self.a.ncols()
    }
}

fn parse_numbers(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("expected a number, found {tok:?}"),
            })
        })
        .collect()
}

/// Parses the text format above. Numbers are read with full `f64`
/// precision; dimension errors and malformed tokens report the offending
/// line.
pub fn parse_instance(text: &str, name: &str, tol: &Tolerance) -> Result<Instance> {
    // Strip comments but remember original line numbers for diagnostics.
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (first_no, first) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty instance".into(),
    })?;
    let header = parse_numbers(first, first_no)?;
    if header.len() != 2 || header.iter().any(|&v| v < 0.0 || v.fract() != 0.0) {
        return Err(Error::Parse {
            line: first_no,
            msg: "the first line must be the two nonnegative integers `m n`".into(),
        });
    }
    let (m, n) = (header[0] as usize, header[1] as usize);
    if n == 0 {
        return Err(Error::Parse {
            line: first_no,
            msg: "the ambient dimension must be positive".into(),
        });
    }

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    for _ in 0..m {
        let (no, line) = lines.next().ok_or(Error::Parse {
            line: first_no,
            msg: format!("expected {m} matrix rows"),
        })?;
        let row = parse_numbers(line, no)?;
        if row.len() != n {
            return Err(Error::Parse {
                line: no,
                msg: format!("matrix row has {} entries, expected {n}", row.len()),
            });
        }
        rows.push(row);
    }
    let a = Matrix::from_rows_dims(&rows, n);

    let (affine_no, affine) = lines.next().ok_or(Error::Parse {
        line: first_no,
        msg: "expected a `b …` or `d …` line after the matrix".into(),
    })?;
    let (tag, rest) = affine.split_once(char::is_whitespace).unwrap_or((affine, ""));
    let values = parse_numbers(rest, affine_no)?;
    let d: Vector = match tag {
        "d" => {
            if values.len() != n {
                return Err(Error::Parse {
                    line: affine_no,
                    msg: format!("the shift needs {n} entries, found {}", values.len()),
                });
            }
            values
        }
        "b" => {
            if values.len() != m {
                return Err(Error::Parse {
                    line: affine_no,
                    msg: format!("the right-hand side needs {m} entries, found {}", values.len()),
                });
            }
            let (d, resid) = dense::solve_consistent(&a, &values, tol)?;
            if resid > tol.residual_tol * (1.0 + norm_inf(&values)) {
                return Err(Error::Parse {
                    line: affine_no,
                    msg: "the right-hand side lies outside the column space of A".into(),
                });
            }
            d
        }
        other => {
            return Err(Error::Parse {
                line: affine_no,
                msg: format!("expected `b` or `d`, found {other:?}"),
            })
        }
    };

    let mut c: Option<Vector> = None;
    if let Some((no, line)) = lines.next() {
        let (tag, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        if tag != "c" {
            return Err(Error::Parse {
                line: no,
                msg: format!("expected an objective line `c …`, found {tag:?}"),
            });
        }
        let values = parse_numbers(rest, no)?;
        if values.len() != n {
            return Err(Error::Parse {
                line: no,
                msg: format!("the objective needs {n} entries, found {}", values.len()),
            });
        }
        c = Some(values);
    }
    if let Some((no, _)) = lines.next() {
        return Err(Error::Parse {
            line: no,
            msg: "unexpected trailing content".into(),
        });
    }

    Ok(Instance {
        name: name.to_string(),
        a,
        d,
        c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn parses_a_minimal_feasibility_instance() {
        let text = "1 2\n1 1\nd -1 0\n";
        let inst = parse_instance(text, "mini", &tol()).unwrap();
        assert_eq!((inst.rows(), inst.cols()), (1, 2));
        assert_eq!(inst.d, vec![-1.0, 0.0]);
        assert!(inst.c.is_none());
    }

    #[test]
    fn recovers_the_shift_from_a_right_hand_side() {
        let text = "# flow balance\n1 3\n1 1 -1\nb 2\nc 1 2 0.5\n";
        let inst = parse_instance(text, "rhs", &tol()).unwrap();
        let b = inst.a.matvec(&inst.d);
        assert!((b[0] - 2.0).abs() <= 1e-9);
        assert_eq!(inst.c.as_deref(), Some(&[1.0, 2.0, 0.5][..]));
    }

    #[test]
    fn rejects_an_unreachable_right_hand_side() {
        // Rank-1 matrix with duplicated rows: b = (1, 2) is unreachable.
        let text = "2 2\n1 1\n1 1\nb 1 2\n";
        let err = parse_instance(text, "bad", &tol()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn reports_the_offending_line() {
        let text = "1 2\n1 x\nd 0 0\n";
        let err = parse_instance(text, "bad", &tol()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# header\n\n1 2  # dims\n1 -1 # the row\n\nd 1 1\n";
        let inst = parse_instance(text, "c", &tol()).unwrap();
        assert_eq!(inst.d, vec![1.0, 1.0]);
    }
}
