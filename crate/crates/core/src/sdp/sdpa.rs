//! SDPA sparse format (`.dat-s`).
//!
//! The program is written in SDPA's primal form
//! `minimize cᵀx  s.t.  Σ_i F_i x_i − F_0 ⪰ 0` with `x = (y_1 … y_m, t)`,
//! `F_0 = −C₀`, `F_k = B_k`, `F_{m+1} = −I` and `c = (0, …, 0, −1)`.

use nalgebra::DMatrix;

use super::problem::{SdpProblem, SymSparse};
use crate::error::Error;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_sdpa(problem: &SdpProblem) -> String {
    let n = problem.n;
    let m = problem.basis.len();
    let mut out = String::new();
    out.push_str(&format!("{}\n1\n{}\n", m + 1, n));
    let objective: Vec<String> = (0..=m)
        .map(|k| num(if k == m { -1.0 } else { 0.0 }))
        .collect();
    out.push_str(&objective.join(" "));
    out.push('\n');
    for i in 0..n {
        for j in i..n {
            let v = problem.constant[(i, j)];
            if v != 0.0 {
                out.push_str(&format!("0 1 {} {} {}\n", i + 1, j + 1, num(-v)));
            }
        }
    }
    for (k, b) in problem.basis.iter().enumerate() {
        for &(i, j, v) in &b.entries {
            out.push_str(&format!("{} 1 {} {} {}\n", k + 1, i + 1, j + 1, num(v)));
        }
    }
    for i in 0..n {
        out.push_str(&format!("{} 1 {} {} {}\n", m + 1, i + 1, i + 1, num(-1.0)));
    }
    out
}

fn clean(line: &str) -> String {
    line.chars()
        .map(|c| if "{}(),".contains(c) { ' ' } else { c })
        .collect()
}

fn parse_f64(tok: &str) -> Result<f64, Error> {
    tok.parse::<f64>()
        .map_err(|_| Error::Sdpa(format!("bad number {tok:?}")))
}

fn parse_usize(tok: &str) -> Result<usize, Error> {
    tok.parse::<usize>()
        .map_err(|_| Error::Sdpa(format!("bad integer {tok:?}")))
}

/// Parses a file produced by [`write_sdpa`] (or any single-block file with
/// the same variable layout) back into a problem.
pub fn read_sdpa(text: &str) -> Result<SdpProblem, Error> {
    let mut lines = text
        .lines()
        .filter(|l| !l.trim_start().starts_with(['"', '*']))
        .map(clean)
        .filter(|l| !l.trim().is_empty());
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::Sdpa(format!("missing {what}")))
    };
    let first = |l: String| {
        l.split_whitespace()
            .next()
            .map(str::to_string)
            .unwrap_or_default()
    };
    let vars = parse_usize(&first(next("variable count")?))?;
    let blocks = parse_usize(&first(next("block count")?))?;
    if blocks != 1 || vars == 0 {
        return Err(Error::Sdpa(format!(
            "expected one block and ≥1 variable, got {blocks}/{vars}"
        )));
    }
    let n = parse_usize(&first(next("block size")?))?;
    let mut objective = Vec::with_capacity(vars);
    while objective.len() < vars {
        for tok in next("objective")?.split_whitespace() {
            objective.push(parse_f64(tok)?);
        }
    }
    if objective.len() != vars
        || objective[vars - 1] != -1.0
        || objective[..vars - 1].iter().any(|&c| c != 0.0)
    {
        return Err(Error::Sdpa("objective is not (0, …, 0, −1)".into()));
    }
    let m = vars - 1;
    let mut constant = DMatrix::zeros(n, n);
    let mut basis = vec![SymSparse::default(); m];
    let mut shift = vec![0.0; n];
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(Error::Sdpa(format!("malformed entry line {line:?}")));
        }
        let mat = parse_usize(toks[0])?;
        let block = parse_usize(toks[1])?;
        let (i, j) = (parse_usize(toks[2])?, parse_usize(toks[3])?);
        let v = parse_f64(toks[4])?;
        if block != 1 || i == 0 || j == 0 || i > n || j > n || mat > vars {
            return Err(Error::Sdpa(format!("entry out of range: {line:?}")));
        }
        let (i, j) = (i.min(j) - 1, i.max(j) - 1);
        match mat {
            0 => {
                constant[(i, j)] = -v;
                constant[(j, i)] = -v;
            }
            k if k == vars => {
                if i != j || v != -1.0 {
                    return Err(Error::Sdpa("last variable must carry −I".into()));
                }
                shift[i] = v;
            }
            k => basis[k - 1].entries.push((i, j, v)),
        }
    }
    if shift.iter().any(|&v| v != -1.0) {
        return Err(Error::Sdpa("last variable must carry −I".into()));
    }
    SdpProblem::new(constant, basis)
}

/// Reads a solution vector: either the `xVec` block of an SDPA result file
/// or a bare list of numbers.
pub fn read_sdpa_solution(text: &str) -> Result<Vec<f64>, Error> {
    let body = match text.find("xVec") {
        Some(pos) => {
            let rest = &text[pos..];
            let open = rest
                .find('{')
                .ok_or_else(|| Error::Sdpa("xVec without '{'".into()))?;
            let close = rest[open..]
                .find('}')
                .ok_or_else(|| Error::Sdpa("truncated xVec block".into()))?;
            rest[open + 1..open + close].to_string()
        }
        None => {
            if text.contains('{') && !text.contains('}') {
                return Err(Error::Sdpa("truncated vector".into()));
            }
            clean(text)
        }
    };
    let values = body
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(parse_f64)
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(Error::Sdpa("no values".into()));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_layout() {
        let p = SdpProblem::new(DMatrix::identity(1, 1), vec![]).unwrap();
        let text = write_sdpa(&p);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "1");
        assert_eq!(lines[1], "1");
        assert_eq!(lines[2], "1");
        assert_eq!(lines[3], "-1.0000000000000000e0");
        assert_eq!(lines[4], "0 1 1 1 -1.0000000000000000e0");
        assert_eq!(lines[5], "1 1 1 1 -1.0000000000000000e0");
        assert_eq!(read_sdpa(&text).unwrap(), p);
    }

    #[test]
    fn round_trip_is_exact() {
        let c = DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 0.1, 0.0, 0.1, 1.0, 1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0],
        );
        let p = SdpProblem::new(
            c,
            vec![
                SymSparse::new(vec![(0, 2, std::f64::consts::PI), (1, 1, 1.0)]),
                SymSparse::new(vec![(2, 2, -1e-7)]),
            ],
        )
        .unwrap();
        let text = write_sdpa(&p);
        let back = read_sdpa(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(write_sdpa(&back), text);
    }

    #[test]
    fn solution_vectors() {
        assert_eq!(read_sdpa_solution("0.5").unwrap(), vec![0.5]);
        assert_eq!(
            read_sdpa_solution("xVec = \n{+1.0E-01,  -2.5e+00 ,3}\nxMat = ...").unwrap(),
            vec![0.1, -2.5, 3.0]
        );
        assert_eq!(
            read_sdpa_solution("  1e0\n\t2.0  ").unwrap(),
            vec![1.0, 2.0]
        );
        assert!(read_sdpa_solution("xVec = \n{1.0, 2.0").is_err());
        assert!(read_sdpa_solution("{1.0, 2.0").is_err());
        assert!(read_sdpa_solution("").is_err());
    }
}
