//! A small infix parser for polynomials in `x, x1, …, xn` with Gaussian
//! rational coefficients, e.g. `x2^2 - 2*x*x1*x2 + 1/2*x^2 + i*x1`.
//! Division is only allowed by nonzero constants.

use super::MultiSeries;
use crate::coeff::Coefficient;
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
    order: i32,
}

pub(super) fn parse_series(nvars: usize, order: i32, src: &str) -> Result<MultiSeries> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        nvars,
        order,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!(
            "{msg} at byte {} in '{}'",
            self.pos,
            String::from_utf8_lossy(self.src)
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<MultiSeries> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == b'+' { acc.add(&rhs)? } else { acc.sub(&rhs)? };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<MultiSeries> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = acc.mul(&rhs)?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    let c = if rhs.is_zero() || rhs.max_degree() != Some(0) {
                        None
                    } else {
                        rhs.constant_term().inv()
                    };
                    let c = c.ok_or_else(|| self.err("division by a non-constant or zero"))?;
                    acc = acc.scale(&c);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<MultiSeries> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        if self.peek() == Some(b'+') {
            self.pos += 1;
        }
        self.power()
    }

    fn power(&mut self) -> Result<MultiSeries> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.integer()?;
            let e = u32::try_from(e).map_err(|_| self.err("bad exponent"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<u64> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err("expected integer"))
    }

    fn atom(&mut self) -> Result<MultiSeries> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                let n = i64::try_from(n).map_err(|_| self.err("integer too large"))?;
                Ok(MultiSeries::constant(self.nvars, self.order, Coefficient::from_int(n)))
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(MultiSeries::constant(self.nvars, self.order, Coefficient::i()))
            }
            Some(b'x') => {
                self.pos += 1;
                let idx = if matches!(self.src.get(self.pos), Some(c) if c.is_ascii_digit()) {
                    self.integer()? as usize
                } else {
                    0
                };
                if idx >= self.nvars {
                    return Err(self.err("variable index out of range"));
                }
                Ok(MultiSeries::var(self.nvars, self.order, idx))
            }
            _ => Err(self.err("unexpected token")),
        }
    }
}
