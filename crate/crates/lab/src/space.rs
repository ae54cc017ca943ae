//! The `--space` grammar.
//!
//! ```text
//! space   := model | file | product
//! model   := kind ":" param ("," param)*
//! kind    := "chsc" | "quadric" | "flat" | "random" | "random-ke"
//! param   := key "=" value
//! file    := "file:" path
//! product := "product:[" space (("," | ";") space)* "]"
//! ```
//!
//! Inside a product a `,` followed by `kind:` starts the next factor; `;` is
//! always a factor separator. A file path ends at `;` or `]` inside a product.

use std::fmt;
use std::path::PathBuf;

use calabi_core::curvature::AlgebraicCurvatureTensor;
use calabi_core::model_spaces::{self, SpaceDescriptor};

use crate::input;
use crate::LabError;

#[derive(Clone, Debug, PartialEq)]
pub enum SpaceExpr {
    Model(SpaceDescriptor),
    File(PathBuf),
    Product(Vec<SpaceExpr>),
}

impl fmt::Display for SpaceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceExpr::Model(d) => write!(f, "{d}"),
            SpaceExpr::File(p) => write!(f, "file:{}", p.display()),
            SpaceExpr::Product(parts) => {
                f.write_str("product:[")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("space descriptor error at column {column}: {message}")]
pub struct ParseError {
    /// 1-based column in the descriptor string.
    pub column: usize,
    pub message: String,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, at: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { column: self.src[..at].chars().count() + 1, message: message.into() })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(got) => self.err(self.pos, format!("expected '{c}', found '{got}'")),
                None => self.err(self.pos, format!("expected '{c}', found end of input")),
            }
        }
    }

    fn ident(&mut self) -> &'a str {
        let rest = self.rest();
        let len = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '-' || c == '_')).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    /// Whether the input at the cursor looks like `kind:`.
    fn at_kind(&self) -> bool {
        let rest = self.rest();
        let len = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '-' || c == '_')).unwrap_or(rest.len());
        len > 0 && rest[len..].starts_with(':')
    }

    fn space(&mut self, depth: usize) -> Result<SpaceExpr, ParseError> {
        let start = self.pos;
        let kind = self.ident();
        if kind.is_empty() {
            return self.err(start, "expected a space kind");
        }
        self.expect(':')?;
        match kind {
            "product" => self.product(depth),
            "file" => self.file(depth),
            _ => self.model(kind, start),
        }
    }

    fn product(&mut self, depth: usize) -> Result<SpaceExpr, ParseError> {
        self.expect('[')?;
        let mut parts = vec![self.space(depth + 1)?];
        loop {
            if self.eat(']') {
                return Ok(SpaceExpr::Product(parts));
            }
            let at = self.pos;
            if !(self.eat(';') || self.eat(',')) {
                return match self.peek() {
                    Some(c) => self.err(at, format!("expected ';', ',' or ']', found '{c}'")),
                    None => self.err(at, "unterminated product, expected ']'"),
                };
            }
            parts.push(self.space(depth + 1)?);
        }
    }

    fn file(&mut self, depth: usize) -> Result<SpaceExpr, ParseError> {
        let rest = self.rest();
        let len = if depth > 0 { rest.find([';', ']']).unwrap_or(rest.len()) } else { rest.len() };
        if len == 0 {
            return self.err(self.pos, "empty file path");
        }
        self.pos += len;
        Ok(SpaceExpr::File(PathBuf::from(&rest[..len])))
    }

    fn params(&mut self) -> Result<Vec<(usize, &'a str, usize, &'a str)>, ParseError> {
        let mut out = Vec::new();
        loop {
            let key_at = self.pos;
            let key = self.ident();
            if key.is_empty() {
                return self.err(key_at, "expected a parameter name");
            }
            self.expect('=')?;
            let val_at = self.pos;
            let rest = self.rest();
            let len = rest.find([',', ';', ']']).unwrap_or(rest.len());
            if len == 0 {
                return self.err(val_at, format!("missing value for '{key}'"));
            }
            self.pos += len;
            out.push((key_at, key, val_at, &rest[..len]));
            // `,kind:` belongs to the enclosing product
            if self.peek() == Some(',') {
                let save = self.pos;
                self.pos += 1;
                if self.at_kind() {
                    self.pos = save;
                    return Ok(out);
                }
                continue;
            }
            return Ok(out);
        }
    }

    fn model(&mut self, kind: &str, kind_at: usize) -> Result<SpaceExpr, ParseError> {
        let keys: &[&str] = match kind {
            "chsc" => &["n", "c"],
            "quadric" => &["n", "scale"],
            "flat" => &["k"],
            "random" | "random-ke" => &["n", "seed"],
            _ => {
                return self.err(
                    kind_at,
                    format!("unknown space kind '{kind}' (expected chsc, quadric, flat, random, random-ke, product or file)"),
                )
            }
        };
        let params = self.params()?;
        let mut values: Vec<Option<(usize, &str)>> = vec![None; keys.len()];
        for (key_at, key, val_at, val) in params {
            let Some(slot) = keys.iter().position(|k| *k == key) else {
                return self.err(key_at, format!("unknown parameter '{key}' for {kind} (expected {})", keys.join(", ")));
            };
            if values[slot].is_some() {
                return self.err(key_at, format!("duplicate parameter '{key}'"));
            }
            values[slot] = Some((val_at, val));
        }
        let int = |slot: usize, default: Option<u64>| -> Result<u64, ParseError> {
            match values[slot] {
                Some((at, v)) => v.parse::<u64>().or_else(|_| self.err(at, format!("'{v}' is not a nonnegative integer"))),
                None => default.map_or_else(|| self.err(kind_at, format!("{kind} needs '{}'", keys[slot])), Ok),
            }
        };
        let real = |slot: usize, default: f64| -> Result<f64, ParseError> {
            match values[slot] {
                Some((at, v)) => match v.parse::<f64>() {
                    Ok(x) if x.is_finite() => Ok(x),
                    _ => self.err(at, format!("'{v}' is not a finite number")),
                },
                None => Ok(default),
            }
        };
        let dim = |slot: usize| -> Result<usize, ParseError> {
            let v = int(slot, None)?;
            if v == 0 || v > 16 {
                let at = values[slot].map_or(kind_at, |(a, _)| a);
                return self.err(at, format!("{} must be between 1 and 16", keys[slot]));
            }
            Ok(v as usize)
        };
        let d = match kind {
            "chsc" => SpaceDescriptor::Chsc { n: dim(0)?, c: real(1, 1.0)? },
            "quadric" => SpaceDescriptor::Quadric { n: dim(0)?, scale: real(1, 1.0)? },
            "flat" => SpaceDescriptor::Flat { k: dim(0)? },
            "random" => SpaceDescriptor::RandomKaehler { n: dim(0)?, seed: int(1, Some(0))? },
            _ => SpaceDescriptor::RandomKaehlerEinstein { n: dim(0)?, seed: int(1, Some(0))? },
        };
        Ok(SpaceExpr::Model(d))
    }
}

pub fn parse(src: &str) -> Result<SpaceExpr, ParseError> {
    let mut p = Parser { src, pos: 0 };
    let expr = p.space(0)?;
    if p.pos != src.len() {
        return p.err(p.pos, format!("unexpected trailing input '{}'", p.rest()));
    }
    Ok(expr)
}

impl SpaceExpr {
    pub fn dim(&self) -> Option<usize> {
        match self {
            SpaceExpr::Model(d) => Some(d.dim()),
            SpaceExpr::File(_) => None,
            SpaceExpr::Product(ps) => ps.iter().map(SpaceExpr::dim).sum(),
        }
    }

    pub fn resolve(&self) -> Result<AlgebraicCurvatureTensor, LabError> {
        match self {
            SpaceExpr::Model(d) => Ok(model_spaces::build(d)?),
            SpaceExpr::File(p) => input::load_tensor(p),
            SpaceExpr::Product(parts) => {
                let ts = parts.iter().map(SpaceExpr::resolve).collect::<Result<Vec<_>, _>>()?;
                Ok(model_spaces::product(&ts))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_models() {
        assert_eq!(parse("chsc:n=3,c=1").unwrap(), SpaceExpr::Model(SpaceDescriptor::Chsc { n: 3, c: 1.0 }));
        assert_eq!(parse("quadric:n=4").unwrap(), SpaceExpr::Model(SpaceDescriptor::Quadric { n: 4, scale: 1.0 }));
        assert_eq!(parse("flat:k=2").unwrap(), SpaceExpr::Model(SpaceDescriptor::Flat { k: 2 }));
        assert_eq!(
            parse("random:n=3,seed=9").unwrap(),
            SpaceExpr::Model(SpaceDescriptor::RandomKaehler { n: 3, seed: 9 })
        );
        assert_eq!(
            parse("chsc:c=-0.5,n=2").unwrap(),
            SpaceExpr::Model(SpaceDescriptor::Chsc { n: 2, c: -0.5 })
        );
    }

    #[test]
    fn parses_products_with_either_separator() {
        let a = parse("product:[chsc:n=1,c=1,chsc:n=1,c=1]").unwrap();
        let b = parse("product:[chsc:n=1,c=1;chsc:n=1]").unwrap();
        assert_eq!(a, b);
        let nested = parse("product:[flat:k=1;product:[quadric:n=2,scale=-1,random-ke:n=2,seed=4]]").unwrap();
        assert_eq!(nested.dim(), Some(5));
        assert_eq!(parse(&nested.to_string()).unwrap(), nested);
        assert_eq!(
            parse("product:[file:a.json;flat:k=1]").unwrap(),
            SpaceExpr::Product(vec![
                SpaceExpr::File(PathBuf::from("a.json")),
                SpaceExpr::Model(SpaceDescriptor::Flat { k: 1 })
            ])
        );
    }

    #[test]
    fn errors_carry_columns() {
        let e = parse("chsc:n=3,x=1").unwrap_err();
        assert_eq!(e.column, 10);
        assert!(e.message.contains("unknown parameter 'x'"));
        assert_eq!(parse("sphere:n=2").unwrap_err().column, 1);
        assert_eq!(parse("chsc:n=abc").unwrap_err().column, 8);
        assert_eq!(parse("chsc:c=1").unwrap_err().column, 1);
        assert_eq!(parse("product:[flat:k=1").unwrap_err().column, 18);
        assert_eq!(parse("quadric:n=0").unwrap_err().column, 11);
        assert_eq!(parse("chsc:n=2,n=3").unwrap_err().column, 10);
        assert_eq!(parse("flat:k=2]").unwrap_err().column, 9);
        assert!(parse("chsc:n=2,c=inf").is_err());
        assert!(parse("").is_err());
    }
}
