//! Knapsack files: one instance per line, `#` comments, optional `n=<count>`.

use std::fmt;

use denumerant::arith::Int;
use num_traits::Signed;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// An instance line, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line<T> {
    pub line: usize,
    pub values: Vec<T>,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Splits off a leading `n=<count>` and validates it against the rest.
fn tokens(line: usize, l: &str) -> Result<Vec<&str>, ParseError> {
    let err = |message: String| ParseError { line, message };
    let mut toks: Vec<&str> = l.split_whitespace().collect();
    if let Some(count) = toks.first().and_then(|t| t.strip_prefix("n=")) {
        let n: usize = count.parse().map_err(|_| err(format!("bad count '{count}'")))?;
        toks.remove(0);
        if n != toks.len() {
            return Err(err(format!("n={n} but {} values follow", toks.len())));
        }
    }
    if toks.len() < 2 {
        return Err(err(format!("need at least two entries, found {}", toks.len())));
    }
    Ok(toks)
}

pub fn parse_instances(text: &str) -> Result<Vec<Line<Int>>, ParseError> {
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        let mut values = Vec::new();
        for tok in tokens(line, l)? {
            let v: Int = tok.parse().map_err(|_| ParseError { line, message: format!("'{tok}' is not an integer") })?;
            if !v.is_positive() {
                return Err(ParseError { line, message: format!("entry {v} is not positive") });
            }
            values.push(v);
        }
        out.push(Line { line, values });
    }
    if out.is_empty() {
        return Err(ParseError { line: 0, message: "no instances".into() });
    }
    Ok(out)
}

/// Lines of factorizations such as `2^2*3 5 7^3`.
pub fn parse_factored(text: &str) -> Result<Vec<Line<denumerant::factor::Factorization>>, ParseError> {
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        let values = tokens(line, l)?
            .into_iter()
            .map(|t| t.parse().map_err(|e: denumerant::Error| ParseError { line, message: e.to_string() }))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(Line { line, values });
    }
    if out.is_empty() {
        return Err(ParseError { line: 0, message: "no instances".into() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_counts_and_errors() {
        let text = "# header\n\n6 2 3\nn=3 12223 12224 36674\n  # indented comment\n";
        let got = parse_instances(text).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].line, 3);
        assert_eq!(got[1].values[2], Int::from(36674));

        assert_eq!(parse_instances("6 2 3\n7\n").unwrap_err().line, 2);
        assert_eq!(parse_instances("n=4 1 2 3\n").unwrap_err().line, 1);
        assert_eq!(parse_instances("1 2\n3 x\n").unwrap_err().line, 2);
        assert_eq!(parse_instances("1 0\n").unwrap_err().line, 1);
        assert!(parse_instances("# nothing\n").is_err());
    }

    #[test]
    fn huge_entries() {
        let got = parse_instances("1 123456789012345678901234567890\n").unwrap();
        assert_eq!(got[0].values[1].to_string(), "123456789012345678901234567890");
    }

    #[test]
    fn factored_lines() {
        let got = parse_factored("2^2*7 3 5^2\n").unwrap();
        assert_eq!(got[0].values[0].value(), Int::from(28));
        assert!(parse_factored("2^x 3\n").is_err());
    }
}
