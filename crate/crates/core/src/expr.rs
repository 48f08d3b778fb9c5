//! Text form of curvature fields.
//!
//! ```text
//! expr := "const:" K
//!       | "pow:" a "," q [ "," p ]      a·|x − p|^q, pole p = 0 by default
//!       | "table:" path                 CSV rows x,k (linear in between)
//!       | "min(" expr "," expr ")"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use crate::curvature_field::CurvatureField;
use crate::error::{Error, Result};
use crate::io::read_pairs;

#[derive(Debug, Clone, PartialEq)]
pub enum FieldExpr {
    Const(f64),
    Pow { a: f64, q: f64, pole: f64 },
    Table(PathBuf),
    Min(Box<FieldExpr>, Box<FieldExpr>),
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldExpr::Const(k) => write!(f, "const:{k}"),
            FieldExpr::Pow { a, q, pole } => {
                if *pole == 0.0 {
                    write!(f, "pow:{a},{q}")
                } else {
                    write!(f, "pow:{a},{q},{pole}")
                }
            }
            FieldExpr::Table(p) => write!(f, "table:{}", p.display()),
            FieldExpr::Min(a, b) => write!(f, "min({a},{b})"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, lit: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(lit) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<()> {
        if self.eat(lit) {
            Ok(())
        } else {
            self.err(format!("expected '{lit}'"))
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '+')))
            .unwrap_or(self.rest().len());
        let text = &self.rest()[..len];
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos += len;
                Ok(v)
            }
            _ => self.err(format!("expected a finite number, found '{text}'")),
        }
    }

    /// A path runs to the next unbalanced ')' or ',' inside `min(...)`, or to
    /// the end of the input at top level.
    fn path(&mut self, depth: usize) -> Result<PathBuf> {
        self.skip_ws();
        let rest = self.rest();
        let len = if depth == 0 {
            rest.len()
        } else {
            rest.find([',', ')']).unwrap_or(rest.len())
        };
        let text = rest[..len].trim_end();
        if text.is_empty() {
            return self.err("expected a table path");
        }
        self.pos += len;
        Ok(PathBuf::from(text))
    }

    fn expr(&mut self, depth: usize) -> Result<FieldExpr> {
        if self.eat("const:") {
            return Ok(FieldExpr::Const(self.number()?));
        }
        if self.eat("pow:") {
            let a = self.number()?;
            self.expect(",")?;
            let q = self.number()?;
            // a third number is the pole; a ',' followed by anything else
            // belongs to an enclosing min(...)
            let save = self.pos;
            let pole = if self.eat(",") {
                match self.number() {
                    Ok(p) => p,
                    Err(_) => {
                        self.pos = save;
                        0.0
                    }
                }
            } else {
                0.0
            };
            return Ok(FieldExpr::Pow { a, q, pole });
        }
        if self.eat("table:") {
            return Ok(FieldExpr::Table(self.path(depth)?));
        }
        if self.eat("min(") {
            let a = self.expr(depth + 1)?;
            self.expect(",")?;
            let b = self.expr(depth + 1)?;
            self.expect(")")?;
            return Ok(FieldExpr::Min(Box::new(a), Box::new(b)));
        }
        self.err("expected one of const:, pow:, table:, min(")
    }
}

pub fn parse_field_expr(text: &str) -> Result<FieldExpr> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.expr(0)?;
    p.skip_ws();
    if p.pos != text.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

impl FieldExpr {
    /// Builds the field; table paths resolve against `base`. With
    /// `dimension_scale = Some(N)` the whole field is multiplied by `N − 1`.
    pub fn to_field(&self, base: &Path, dimension_scale: Option<f64>) -> Result<CurvatureField> {
        let f = self.build(base)?;
        Ok(match dimension_scale {
            Some(n) => f.scaled(n - 1.0),
            None => f,
        })
    }

    fn build(&self, base: &Path) -> Result<CurvatureField> {
        match self {
            FieldExpr::Const(k) => CurvatureField::constant(*k),
            FieldExpr::Pow { a, q, pole } => CurvatureField::radial_power(*a, *q, *pole),
            FieldExpr::Table(p) => {
                let path = if p.is_absolute() { p.clone() } else { base.join(p) };
                CurvatureField::from_samples(&read_pairs(&path)?, false)
            }
            FieldExpr::Min(a, b) => Ok(a.build(base)?.min(&b.build(base)?)),
        }
    }
}
