use alloc::boxed::Box;
use alloc::string::{String, ToString};

use super::{BinOp, Expr, Func, VfError};

pub(super) fn parse_expr(src: &str) -> Result<Expr, VfError> {
    let mut p = Parser { src: src.as_bytes(), text: src, pos: 0 };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("expected operator or end of input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> VfError {
        VfError::Parse { offset: self.pos, message: message.to_string() }
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

    fn expect(&mut self, c: u8, message: &str) -> Result<(), VfError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(message))
        }
    }

    fn sum(&mut self) -> Result<Expr, VfError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, VfError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, VfError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, VfError> {
        let base = self.primary()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        let exponent = if self.peek() == Some(b'(') {
            self.pos += 1;
            let k = self.integer()?;
            self.expect(b')', "expected ')' after exponent")?;
            k
        } else {
            self.integer()?
        };
        if self.peek() == Some(b'^') {
            return Err(self.error("chained exponents need parentheses"));
        }
        Ok(Expr::Pow(Box::new(base), exponent))
    }

    fn integer(&mut self) -> Result<i32, VfError> {
        let negative = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer exponent"));
        }
        if matches!(self.src.get(self.pos), Some(b'.') | Some(b'e') | Some(b'E')) {
            return Err(self.error("exponent must be an integer literal"));
        }
        let digits = &self.text[start..self.pos];
        let k: i32 = digits
            .parse()
            .map_err(|_| VfError::Parse { offset: start, message: "exponent out of range".to_string() })?;
        Ok(if negative { -k } else { k })
    }

    fn primary(&mut self) -> Result<Expr, VfError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(b')', "expected ')'")?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.error("expected expression")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr, VfError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
                return Err(self.error("malformed exponent in number"));
            }
        }
        let text = &self.text[start..self.pos];
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Expr::Num(v)),
            _ => Err(VfError::Parse { offset: start, message: "number out of range".to_string() }),
        }
    }

    fn identifier(&mut self) -> Result<Expr, VfError> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = &self.text[start..self.pos];
        let func = match name {
            "t" => return Ok(Expr::T),
            "x" => return Ok(Expr::X),
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            _ => return Err(VfError::UnknownIdentifier { name: String::from(name), offset: start }),
        };
        self.expect(b'(', "expected '(' after function name")?;
        let arg = self.sum()?;
        self.expect(b')', "expected ')' to close function argument")?;
        Ok(Expr::Func(func, Box::new(arg)))
    }
}
