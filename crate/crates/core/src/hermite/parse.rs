//! Text grammar for polynomials mixing the power and Hermite bases.
//!
//! ```text
//! expression := [sign] term { ('+' | '-') term }
//! term       := rational '*' atom | rational | atom
//! atom       := 'x' ['^' integer] | 'H' integer
//! rational   := integer | integer '/' integer | decimal
//! ```
//!
//! `x^3 - 3*x`, `H3`, and `2*H2 + 1/3*x` are all valid. Mixed bases are
//! allowed in one expression; [`parse_hermite`] normalizes the result to the
//! Hermite basis, [`parse_monomial`] rejects `H` atoms and stays in the
//! power basis. Errors carry the byte position of the offending token.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{HermitePoly, MonomialPoly, DEGREE_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

fn err<T>(position: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        position,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(BigRational),
    X,
    Hermite(usize),
    Caret,
    Star,
    Slash,
    Plus,
    Minus,
}

struct Lexer<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn integer(&mut self) -> BigInt {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .expect("digits parse as integer")
    }

    /// Next token with its byte position, or `None` at end of input.
    fn next(&mut self) -> Result<Option<(usize, Token)>, ParseError> {
        self.skip_ws();
        if self.pos >= self.bytes.len() {
            return Ok(None);
        }
        let at = self.pos;
        let token = match self.bytes[at] {
            b'+' => {
                self.pos += 1;
                Token::Plus
            }
            b'-' => {
                self.pos += 1;
                Token::Minus
            }
            b'*' => {
                self.pos += 1;
                Token::Star
            }
            b'/' => {
                self.pos += 1;
                Token::Slash
            }
            b'^' => {
                self.pos += 1;
                Token::Caret
            }
            b'x' => {
                self.pos += 1;
                Token::X
            }
            b'H' => {
                self.pos += 1;
                if self.pos >= self.bytes.len() || !self.bytes[self.pos].is_ascii_digit() {
                    return err(at, "expected an index after 'H'");
                }
                let index = self.integer();
                let index = usize::try_from(&index)
                    .ok()
                    .filter(|&k| k <= DEGREE_CAP)
                    .ok_or(ParseError {
                        position: at,
                        message: format!(
                            "Hermite index {index} exceeds the degree cap {DEGREE_CAP}"
                        ),
                    })?;
                Token::Hermite(index)
            }
            c if c.is_ascii_digit() => {
                let whole = self.integer();
                if self.pos < self.bytes.len() && self.bytes[self.pos] == b'.' {
                    self.pos += 1;
                    let frac_start = self.pos;
                    if self.pos >= self.bytes.len() || !self.bytes[self.pos].is_ascii_digit() {
                        return err(frac_start, "expected digits after the decimal point");
                    }
                    let frac = self.integer();
                    let digits = self.pos - frac_start;
                    let denom = BigInt::from(10u32).pow(digits as u32);
                    Token::Number(BigRational::new(whole * &denom + frac, denom))
                } else {
                    Token::Number(BigRational::from_integer(whole))
                }
            }
            other => {
                return err(at, format!("unexpected character '{}'", other as char));
            }
        };
        Ok(Some((at, token)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Atom {
    Power(usize),
    Hermite(usize),
}

struct Term {
    coefficient: BigRational,
    atom: Option<Atom>,
    atom_position: usize,
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    cursor: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(usize, Token)> {
        self.tokens.get(self.cursor)
    }

    fn advance(&mut self) -> Option<(usize, Token)> {
        let t = self.tokens.get(self.cursor).cloned();
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |(p, _)| *p)
    }

    fn exponent(&mut self) -> Result<usize, ParseError> {
        let at = self.here();
        match self.advance() {
            Some((_, Token::Number(n))) if n.is_integer() => usize::try_from(n.numer())
                .ok()
                .filter(|&k| k <= DEGREE_CAP)
                .ok_or(ParseError {
                    position: at,
                    message: format!("exponent exceeds the degree cap {DEGREE_CAP}"),
                }),
            _ => err(at, "expected a non-negative integer exponent after '^'"),
        }
    }

    fn atom(&mut self) -> Result<(usize, Atom), ParseError> {
        let at = self.here();
        match self.advance() {
            Some((_, Token::X)) => {
                if matches!(self.peek(), Some((_, Token::Caret))) {
                    self.advance();
                    Ok((at, Atom::Power(self.exponent()?)))
                } else {
                    Ok((at, Atom::Power(1)))
                }
            }
            Some((_, Token::Hermite(k))) => Ok((at, Atom::Hermite(k))),
            _ => err(at, "expected an atom ('x', 'x^k', or 'Hk')"),
        }
    }

    /// rational := number [ '/' integer ]
    fn rational(&mut self, first: BigRational) -> Result<BigRational, ParseError> {
        if matches!(self.peek(), Some((_, Token::Slash))) {
            self.advance();
            let at = self.here();
            match self.advance() {
                Some((_, Token::Number(d))) if d.is_integer() && !d.is_zero() => Ok(first / d),
                Some((_, Token::Number(d))) if d.is_zero() => {
                    err(at, "division by zero in rational")
                }
                _ => err(at, "expected an integer denominator after '/'"),
            }
        } else {
            Ok(first)
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let at = self.here();
        match self.peek() {
            Some((_, Token::Number(_))) => {
                let Some((_, Token::Number(n))) = self.advance() else {
                    unreachable!()
                };
                let coefficient = self.rational(n)?;
                if matches!(self.peek(), Some((_, Token::Star))) {
                    self.advance();
                    let (pos, atom) = self.atom()?;
                    Ok(Term {
                        coefficient,
                        atom: Some(atom),
                        atom_position: pos,
                    })
                } else {
                    Ok(Term {
                        coefficient,
                        atom: None,
                        atom_position: at,
                    })
                }
            }
            _ => {
                let (pos, atom) = self.atom()?;
                Ok(Term {
                    coefficient: BigRational::one(),
                    atom: Some(atom),
                    atom_position: pos,
                })
            }
        }
    }

    fn expression(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut terms = Vec::new();
        let mut negate = false;
        if let Some((_, Token::Minus)) = self.peek() {
            self.advance();
            negate = true;
        } else if let Some((_, Token::Plus)) = self.peek() {
            self.advance();
        }
        loop {
            let mut term = self.term()?;
            if negate {
                term.coefficient = -term.coefficient;
            }
            terms.push(term);
            match self.advance() {
                None => return Ok(terms),
                Some((_, Token::Plus)) => negate = false,
                Some((_, Token::Minus)) => negate = true,
                Some((pos, _)) => {
                    return err(pos, "expected '+', '-', or end of expression");
                }
            }
        }
    }
}

fn parse_terms(text: &str) -> Result<Vec<Term>, ParseError> {
    let mut lexer = Lexer::new(text);
    let mut tokens = Vec::new();
    while let Some(t) = lexer.next()? {
        tokens.push(t);
    }
    if tokens.is_empty() {
        return err(0, "empty expression");
    }
    let mut parser = Parser {
        tokens,
        cursor: 0,
        end: text.len(),
    };
    parser.expression()
}

/// Parse an expression (either basis, mixed allowed) and normalize to the
/// Hermite basis.
pub fn parse_hermite(text: &str) -> Result<HermitePoly, ParseError> {
    let terms = parse_terms(text)?;
    let mut monomial_part: Vec<BigRational> = Vec::new();
    let mut hermite_part: Vec<BigRational> = Vec::new();
    for term in terms {
        match term.atom {
            None | Some(Atom::Power(0)) => add_at(&mut monomial_part, 0, term.coefficient),
            Some(Atom::Power(k)) => add_at(&mut monomial_part, k, term.coefficient),
            Some(Atom::Hermite(k)) => add_at(&mut hermite_part, k, term.coefficient),
        }
    }
    let from_powers = MonomialPoly::new(monomial_part)
        .expect("degree bounded by the cap during lexing")
        .to_hermite();
    let direct = HermitePoly::new(hermite_part).expect("degree bounded by the cap during lexing");
    Ok(from_powers.add(&direct))
}

/// Parse an expression restricted to the power basis; `H` atoms are refused.
pub fn parse_monomial(text: &str) -> Result<MonomialPoly, ParseError> {
    let terms = parse_terms(text)?;
    let mut coeffs: Vec<BigRational> = Vec::new();
    for term in terms {
        match term.atom {
            None => add_at(&mut coeffs, 0, term.coefficient),
            Some(Atom::Power(k)) => add_at(&mut coeffs, k, term.coefficient),
            Some(Atom::Hermite(_)) => {
                return err(
                    term.atom_position,
                    "Hermite atom not allowed here; use the power basis ('x^k')",
                );
            }
        }
    }
    Ok(MonomialPoly::new(coeffs).expect("degree bounded by the cap during lexing"))
}

fn add_at(coeffs: &mut Vec<BigRational>, k: usize, c: BigRational) {
    if coeffs.len() <= k {
        coeffs.resize(k + 1, BigRational::zero());
    }
    coeffs[k] += c;
}
