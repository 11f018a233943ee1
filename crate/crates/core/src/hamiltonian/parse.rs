use crate::error::{Error, Result};

use super::{Hamiltonian, Pauli, PauliString, PauliTerm};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses the term-list text format.
///
/// ```text
/// # comment
/// qubits: 4
/// -1.0 [Z0 Z1]
/// 0.5 [X0]
/// 0.25 []
/// ```
///
/// One term per line. The optional `qubits:` header fixes the register size;
/// without it the register is one past the largest index used. The result
/// is canonicalized.
pub fn parse_hamiltonian(text: &str) -> Result<Hamiltonian> {
    let mut terms = Vec::new();
    let mut header: Option<(usize, usize)> = None;
    let mut max_index: Option<usize> = None;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("qubits:") {
            if header.is_some() {
                return Err(parse_err(line_no, "repeated `qubits:` header"));
            }
            let n = rest
                .trim()
                .parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("invalid qubit count `{}`", rest.trim())))?;
            header = Some((n, line_no));
            continue;
        }
        let term = parse_term(line).map_err(|m| parse_err(line_no, m))?;
        if let Some(q) = term.string().max_index() {
            max_index = Some(max_index.map_or(q, |m: usize| m.max(q)));
        }
        terms.push(term);
    }

    let needed = max_index.map_or(0, |m| m + 1);
    let qubit_count = match header {
        Some((n, line_no)) if n < needed => {
            return Err(parse_err(
                line_no,
                format!("header declares {n} qubits but a term uses qubit {}", needed - 1),
            ))
        }
        Some((n, _)) => n,
        None => needed,
    };
    Ok(Hamiltonian::new(terms, qubit_count)?.canonicalize())
}

fn parse_term(line: &str) -> std::result::Result<PauliTerm, String> {
    let open = line
        .find('[')
        .ok_or_else(|| "expected `<coefficient> [<factors>]`".to_string())?;
    let close = line
        .rfind(']')
        .filter(|&c| c > open)
        .ok_or_else(|| "missing closing `]`".to_string())?;
    if !line[close + 1..].trim().is_empty() {
        return Err(format!("unexpected text after `]`: `{}`", line[close + 1..].trim()));
    }

    let coeff_text = line[..open].trim();
    if coeff_text.ends_with('j') || (coeff_text.ends_with('i') && !coeff_text.ends_with("inf")) {
        return Err(format!("complex coefficient `{coeff_text}` is not supported"));
    }
    let coefficient: f64 = coeff_text
        .parse()
        .map_err(|_| format!("invalid coefficient `{coeff_text}`"))?;
    if !coefficient.is_finite() {
        return Err(format!("non-finite coefficient `{coeff_text}`"));
    }

    let mut factors = Vec::new();
    for tok in line[open + 1..close].split_whitespace() {
        let mut chars = tok.chars();
        let letter = chars.next().and_then(Pauli::from_char).ok_or_else(|| {
            format!("invalid factor `{tok}`: expected X, Y or Z followed by a qubit index")
        })?;
        let index: usize = chars
            .as_str()
            .parse()
            .map_err(|_| format!("invalid qubit index in factor `{tok}`"))?;
        if factors.iter().any(|&(q, _)| q == index) {
            return Err(format!("duplicate qubit index {index}"));
        }
        factors.push((index, letter));
    }
    let string = PauliString::new(factors).map_err(|e| e.to_string())?;
    PauliTerm::new(coefficient, string).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_terms() {
        let h = parse_hamiltonian("-1.0 [Z0 Z1]\n0.5 [X0]").unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.qubit_count(), 2);
    }

    #[test]
    fn identity_term() {
        let h = parse_hamiltonian("0.25 []").unwrap();
        assert_eq!(h.len(), 1);
        assert!(h.terms()[0].string().is_identity());
        assert_eq!(h.terms()[0].coefficient(), 0.25);
    }

    #[test]
    fn duplicate_index_in_term() {
        let err = parse_hamiltonian("1.0 [X0 X0]").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn header_and_comments() {
        let text = "# TFIM\nqubits: 5\n\n0.1809312 [Z0 Z1] # bond\n";
        let h = parse_hamiltonian(text).unwrap();
        assert_eq!(h.qubit_count(), 5);
        assert_eq!(h.terms()[0].coefficient(), 0.1809312);
    }

    #[test]
    fn reports_line_number() {
        let err = parse_hamiltonian("1.0 [X0]\n\n2.0 X1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "nan [X0]",
            "inf [Z1]",
            "1+2j [X0]",
            "1.0 [W0]",
            "1.0 [X]",
            "1.0 [X0] junk",
            "1.0 [X0",
            "qubits: 1\n1.0 [X3]",
            "qubits: x",
        ] {
            assert!(parse_hamiltonian(bad).is_err(), "accepted `{bad}`");
        }
    }

    #[test]
    fn duplicate_lines_merge() {
        let h = parse_hamiltonian("0.5 [X0]\n0.5 [X0]").unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.terms()[0].coefficient(), 1.0);
    }
}
