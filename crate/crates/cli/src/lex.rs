//! Tokenizer shared by the system-spec and set-expression parsers, with
//! line/column tracking for diagnostics.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Punct(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Number(s) => write!(f, "number '{s}'"),
            Tok::Str(s) => write!(f, "string \"{s}\""),
            Tok::Punct(c) => write!(f, "'{c}'"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone)]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

impl std::error::Error for ParseError {}

pub type PResult<T> = Result<T, ParseError>;

const PUNCTS: &str = "=(){},|&^~\\/+-*";

/// Tokenizes the source; `#` starts a comment to end of line. U+2212 is
/// normalized to '-'.
pub fn tokenize(source: &str) -> PResult<Vec<(Tok, Pos)>> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = source.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
                line += 1;
                col = 1;
            }
            '"' => {
                chars.next();
                col += 1;
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => {
                            col += 1;
                            break;
                        }
                        Some('\n') | None => {
                            return Err(ParseError {
                                pos,
                                message: "unterminated string literal".into(),
                            })
                        }
                        Some(c) => {
                            s.push(c);
                            col += 1;
                        }
                    }
                }
                out.push((Tok::Str(s), pos));
            }
            '\u{2212}' => {
                chars.next();
                col += 1;
                out.push((Tok::Punct('-'), pos));
            }
            c if PUNCTS.contains(c) => {
                chars.next();
                col += 1;
                out.push((Tok::Punct(c), pos));
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        s.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push((Tok::Number(s), pos));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' || d == '-' {
                        s.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(s), pos));
            }
            other => {
                return Err(ParseError {
                    pos,
                    message: format!("unexpected character '{other}'"),
                })
            }
        }
    }
    Ok(out)
}

/// Token cursor with convenience expectations.
pub struct Cursor {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Cursor {
    pub fn new(toks: Vec<(Tok, Pos)>) -> Cursor {
        Cursor { toks, at: 0 }
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    pub fn pos(&self) -> Pos {
        self.toks
            .get(self.at)
            .or_else(|| self.toks.last())
            .map(|(_, p)| *p)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    pub fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    pub fn eat_punct(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    pub fn eat_ident(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == word) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_punct(&mut self, c: char) -> PResult<()> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Punct(p)) if p == c => Ok(()),
            Some(t) => Err(ParseError {
                pos,
                message: format!("expected '{c}', found {t}"),
            }),
            None => Err(ParseError {
                pos,
                message: format!("expected '{c}', found end of input"),
            }),
        }
    }

    pub fn expect_number(&mut self) -> PResult<u64> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Number(s)) => s.parse().map_err(|_| ParseError {
                pos,
                message: format!("number '{s}' out of range"),
            }),
            Some(t) => Err(ParseError {
                pos,
                message: format!("expected a number, found {t}"),
            }),
            None => Err(ParseError {
                pos,
                message: "expected a number, found end of input".into(),
            }),
        }
    }

    pub fn expect_end(&self) -> PResult<()> {
        if self.at == self.toks.len() {
            Ok(())
        } else {
            Err(ParseError {
                pos: self.pos(),
                message: format!("unexpected trailing {}", self.toks[self.at].0),
            })
        }
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            pos: self.pos(),
            message: message.into(),
        }
    }
}

/// Parses an exact scalar: rational `p[/q]`, `a+b*sqrt(d)` forms, optional
/// wrapping parentheses.
pub fn parse_scalar(cur: &mut Cursor) -> PResult<ergolab_core::Scalar> {
    if cur.eat_punct('(') {
        let s = parse_scalar(cur)?;
        cur.expect_punct(')')?;
        return Ok(s);
    }
    let mut value = parse_scalar_term(cur)?;
    loop {
        if cur.eat_punct('+') {
            value = value + parse_scalar_term(cur)?;
        } else if cur.eat_punct('-') {
            value = value - parse_scalar_term(cur)?;
        } else {
            return Ok(value);
        }
    }
}

fn parse_scalar_term(cur: &mut Cursor) -> PResult<ergolab_core::Scalar> {
    use ergolab_core::Scalar;
    let neg = cur.eat_punct('-');
    let pos = cur.pos();
    // sqrt(d) with implicit coefficient 1
    if cur.eat_ident("sqrt") {
        let d = parse_sqrt_arg(cur)?;
        let coeff = Scalar::from_integer(if neg { -1 } else { 1 });
        return quadratic_unit(d, coeff, pos);
    }
    let num = cur.expect_number()?;
    let mut value = if cur.eat_punct('/') {
        let den = cur.expect_number()?;
        Scalar::ratio(num, den).map_err(|e| ParseError {
            pos,
            message: e.to_string(),
        })?
    } else {
        Scalar::from_integer(num)
    };
    if neg {
        value = -value;
    }
    if cur.eat_punct('*') {
        let pos = cur.pos();
        if !cur.eat_ident("sqrt") {
            return Err(ParseError {
                pos,
                message: "expected 'sqrt' after '*'".into(),
            });
        }
        let d = parse_sqrt_arg(cur)?;
        return quadratic_unit(d, value, pos);
    }
    Ok(value)
}

fn parse_sqrt_arg(cur: &mut Cursor) -> PResult<u64> {
    cur.expect_punct('(')?;
    let d = cur.expect_number()?;
    cur.expect_punct(')')?;
    Ok(d)
}

fn quadratic_unit(
    d: u64,
    coeff: ergolab_core::Scalar,
    pos: Pos,
) -> PResult<ergolab_core::Scalar> {
    use ergolab_core::Scalar;
    if !coeff.is_rational() {
        return Err(ParseError {
            pos,
            message: "nested sqrt coefficients are not supported".into(),
        });
    }
    let root = Scalar::sqrt(d).map_err(|e| ParseError {
        pos,
        message: e.to_string(),
    })?;
    Ok(coeff * root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ergolab_core::Scalar;

    fn scalar(text: &str) -> Scalar {
        let mut cur = Cursor::new(tokenize(text).unwrap());
        let s = parse_scalar(&mut cur).unwrap();
        cur.expect_end().unwrap();
        s
    }

    #[test]
    fn scalars_parse() {
        assert_eq!(scalar("3/4"), Scalar::rat(3, 4));
        assert_eq!(scalar("-1/2"), Scalar::rat(-1, 2));
        assert_eq!(scalar("7"), Scalar::from_integer(7));
        assert_eq!(
            scalar("(-1/2 + 1/2*sqrt(5))"),
            "-1/2+1/2*sqrt(5)".parse().unwrap()
        );
        assert_eq!(scalar("sqrt(2) - 1"), "-1+1*sqrt(2)".parse().unwrap());
    }

    #[test]
    fn errors_carry_positions() {
        let mut cur = Cursor::new(tokenize("1/x").unwrap());
        let err = parse_scalar(&mut cur).unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, col: 3 });
    }

    #[test]
    fn comments_and_newlines() {
        let toks = tokenize("a=1 # comment\nb=2").unwrap();
        assert_eq!(toks.len(), 6);
        assert_eq!(toks[3].1, Pos { line: 2, col: 1 });
    }
}
