//! Time expressions (`nlogn - 3n`, `0.5*n*logn + 2n`), time grids and integer ranges.

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Times,
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<Token>, CliError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' | '−' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' | '·' => {
                out.push(Token::Times);
                i += 1;
            }
            '(' => {
                out.push(Token::Open);
                i += 1;
            }
            ')' => {
                out.push(Token::Close);
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // exponent only when followed by a digit, so "2e" stays invalid
                if i + 1 < chars.len() && chars[i] == 'e' && (chars[i + 1].is_ascii_digit() || chars[i + 1] == '-') {
                    i += 2;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let lit: String = chars[start..i].iter().collect();
                let v = lit.parse::<f64>().map_err(|_| CliError::usage(format!("bad number '{lit}' in '{text}'")))?;
                out.push(Token::Num(v));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphabetic() {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(CliError::usage(format!("unexpected '{other}' in '{text}'"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    n: f64,
    text: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn fail(&self, what: &str) -> CliError {
        CliError::usage(format!("{what} in time expression '{}'", self.text))
    }

    fn expr(&mut self) -> Result<f64, CliError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc += self.term()?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc -= self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<f64, CliError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Times) => {
                    self.pos += 1;
                    acc *= self.factor()?;
                }
                // juxtaposition: "3n", "0.8 nlogn", "2(n+1)"
                Some(Token::Num(_) | Token::Ident(_) | Token::Open) => acc *= self.factor()?,
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<f64, CliError> {
        let tok = self.peek().cloned().ok_or_else(|| self.fail("unexpected end"))?;
        self.pos += 1;
        match tok {
            Token::Minus => Ok(-self.factor()?),
            Token::Plus => self.factor(),
            Token::Num(v) => Ok(v),
            Token::Ident(name) => match name.as_str() {
                "n" => Ok(self.n),
                "logn" => Ok(self.n.ln()),
                "nlogn" => Ok(self.n * self.n.ln()),
                _ => Err(self.fail(&format!("unknown symbol '{name}'"))),
            },
            Token::Open => {
                let v = self.expr()?;
                match self.peek() {
                    Some(Token::Close) => {
                        self.pos += 1;
                        Ok(v)
                    }
                    _ => Err(self.fail("missing ')'")),
                }
            }
            Token::Times | Token::Close => Err(self.fail("misplaced operator")),
        }
    }
}

/// Evaluates a time expression at degree `n`.
pub fn eval_time(text: &str, n: usize) -> Result<f64, CliError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(CliError::usage("empty time expression"));
    }
    let mut p = Parser { tokens, pos: 0, n: n as f64, text };
    let v = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(p.fail("trailing input"));
    }
    if !v.is_finite() || v < 0.0 {
        return Err(CliError::usage(format!("time '{text}' evaluates to {v} at n={n}; need a finite value >= 0")));
    }
    Ok(v)
}

/// Comma-separated time expressions, or `auto`: 41 evenly spaced points on `[0, 2·scale]`.
pub fn time_grid(text: &str, n: usize, scale: f64) -> Result<Vec<f64>, CliError> {
    if text.trim() == "auto" {
        return Ok((0..=40).map(|i| 2.0 * scale * i as f64 / 40.0).collect());
    }
    text.split(',').map(|part| eval_time(part, n)).collect()
}

/// `a..b` (inclusive), `a..=b`, a single value, or a comma-separated list.
pub fn parse_range(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::usage(format!("bad range '{text}'; expected a..b, a or a,b,c"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    if let Some((a, b)) = text.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(num).collect()
}

pub fn parse_floats(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::usage(format!("bad number '{s}' in '{text}'")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn expressions() {
        let n = 200usize;
        let nl = 200.0 * 200f64.ln();
        assert!(close(eval_time("nlogn-3n", n).unwrap(), nl - 600.0));
        assert!(close(eval_time("nlogn - 3*n", n).unwrap(), nl - 600.0));
        assert!(close(eval_time("0.5*nlogn+2n", n).unwrap(), 0.5 * nl + 400.0));
        assert!(close(eval_time("0.5n·(logn+2)", 20).unwrap(), 10.0 * (20f64.ln() + 2.0)));
        assert!(close(eval_time("12.5", n).unwrap(), 12.5));
        assert!(close(eval_time("1e2", n).unwrap(), 100.0));
        assert!(close(eval_time("-(-3)", n).unwrap(), 3.0));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "foo", "n+", "3n)", "(n", "n**2", "1-5", "n/2"] {
            assert!(eval_time(bad, 10).is_err(), "{bad}");
        }
    }

    #[test]
    fn grids_and_ranges() {
        let g = time_grid("auto", 10, 5.0).unwrap();
        assert_eq!(g.len(), 41);
        assert_eq!(g[0], 0.0);
        assert!(close(g[40], 10.0));
        assert_eq!(time_grid("0,n,nlogn", 3, 1.0).unwrap()[1], 3.0);
        assert_eq!(parse_range("15..18").unwrap(), vec![15, 16, 17, 18]);
        assert_eq!(parse_range("4..=5").unwrap(), vec![4, 5]);
        assert_eq!(parse_range("7").unwrap(), vec![7]);
        assert_eq!(parse_range("4,6").unwrap(), vec![4, 6]);
        assert!(parse_range("9..3").is_err());
        assert_eq!(parse_floats("0, 1,2.5").unwrap(), vec![0.0, 1.0, 2.5]);
        assert!(parse_floats("inf").is_err());
    }
}
