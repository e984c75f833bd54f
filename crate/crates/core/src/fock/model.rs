//! Model description files: a finite-dimensional `H` with named summands,
//! vectors, matrices, and one operator expression per letter.
//!
//! Operator expressions support `l(v)`, `r(v)`, `gauge_l(T)`, `gauge_r(T)`,
//! `adj(...)`, `+`, `-`, `*`, parentheses, real literals, and the imaginary
//! unit `i`.  Example: `l(f) + adj(l(f)) + 0.5*gauge_l(T) + 2`.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FockOp, FockSpace, HMatrix, HVector};
use crate::error::{Error, Result};
use crate::functionals::MomentFunctional;

/// On-disk form of an operator model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelDoc {
    pub dim_h: usize,
    #[serde(default)]
    pub summands: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    pub vectors: BTreeMap<String, Vec<[f64; 2]>>,
    #[serde(default)]
    pub matrices: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    pub left: BTreeMap<String, String>,
    #[serde(default)]
    pub right: BTreeMap<String, String>,
    /// Optional explicit grouping for bi-freeness checks; inferred from
    /// summand support when absent.
    #[serde(default)]
    pub groups: BTreeMap<String, Vec<String>>,
}

impl ModelDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable document");
        s.push('\n');
        s
    }

    pub fn parse(&self) -> Result<Model> {
        let dim = self.dim_h;
        let mut vectors = BTreeMap::new();
        for (name, coords) in &self.vectors {
            if coords.len() != dim {
                return Err(Error::Model(format!(
                    "vector {name} has {} coordinates, expected {dim}",
                    coords.len()
                )));
            }
            vectors.insert(
                name.clone(),
                HVector::from_iterator(dim, coords.iter().map(|&[re, im]| Complex64::new(re, im))),
            );
        }
        let mut matrices = BTreeMap::new();
        for (name, rows) in &self.matrices {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(Error::Model(format!("matrix {name} is not {dim}x{dim}")));
            }
            matrices.insert(
                name.clone(),
                HMatrix::from_fn(dim, dim, |i, j| {
                    let [re, im] = rows[i][j];
                    Complex64::new(re, im)
                }),
            );
        }
        let summands = if self.summands.is_empty() {
            let mut s = BTreeMap::new();
            s.insert("h".to_string(), (0..dim).collect());
            s
        } else {
            self.summands.clone()
        };
        // summand validation happens in FockSpace::with_summands
        FockSpace::with_summands(dim, 1, summands.clone())?;

        let ctx = ExprContext {
            vectors: &vectors,
            matrices: &matrices,
        };
        let mut left_ops = BTreeMap::new();
        for (label, expr) in &self.left {
            left_ops.insert(
                label.clone(),
                parse_expression(expr, &ctx)
                    .map_err(|e| Error::Model(format!("left operator {label}: {e}")))?,
            );
        }
        let mut right_ops = BTreeMap::new();
        for (label, expr) in &self.right {
            right_ops.insert(
                label.clone(),
                parse_expression(expr, &ctx)
                    .map_err(|e| Error::Model(format!("right operator {label}: {e}")))?,
            );
        }
        Ok(Model {
            dim_h: dim,
            summands,
            vectors,
            matrices,
            left_ops,
            right_ops,
            groups: self.groups.clone(),
        })
    }
}

/// A parsed model, ready to evaluate.
#[derive(Clone, Debug)]
pub struct Model {
    pub dim_h: usize,
    pub summands: BTreeMap<String, Vec<usize>>,
    pub vectors: BTreeMap<String, HVector>,
    pub matrices: BTreeMap<String, HMatrix>,
    pub left_ops: BTreeMap<String, FockOp>,
    pub right_ops: BTreeMap<String, FockOp>,
    pub groups: BTreeMap<String, Vec<String>>,
}

impl Model {
    pub fn space(&self, depth: usize) -> Result<FockSpace> {
        FockSpace::with_summands(self.dim_h, depth, self.summands.clone())
    }

    /// Dense moment table of the declared two-faced family.
    pub fn moments(&self, n_max: usize) -> Result<MomentFunctional> {
        let max_cap = self
            .left_ops
            .values()
            .chain(self.right_ops.values())
            .map(FockOp::capacity)
            .max()
            .unwrap_or(0);
        let space = self.space(n_max * max_cap.max(1))?;
        space.two_faced_moments(&self.left_ops, &self.right_ops, n_max)
    }

    /// Label -> group map for bi-freeness checks.  Explicit `groups` win;
    /// otherwise each label is assigned the unique summand supporting its
    /// expression.
    pub fn grouping(&self) -> Result<BTreeMap<String, String>> {
        let mut out = BTreeMap::new();
        if !self.groups.is_empty() {
            for (group, labels) in &self.groups {
                for label in labels {
                    if out.insert(label.clone(), group.clone()).is_some() {
                        return Err(Error::Model(format!(
                            "label {label} appears in more than one group"
                        )));
                    }
                }
            }
            for label in self.left_ops.keys().chain(self.right_ops.keys()) {
                if !out.contains_key(label) {
                    return Err(Error::Model(format!(
                        "label {label} is not covered by the declared groups"
                    )));
                }
            }
            return Ok(out);
        }
        let summand_of_index = |i: usize| -> Option<&str> {
            self.summands
                .iter()
                .find(|(_, indices)| indices.contains(&i))
                .map(|(name, _)| name.as_str())
        };
        for (label, op) in self.left_ops.iter().chain(self.right_ops.iter()) {
            let mut support = BTreeSet::new();
            collect_support(op, &mut |i| {
                if let Some(name) = summand_of_index(i) {
                    support.insert(name.to_string());
                }
            });
            match support.len() {
                1 => {
                    out.insert(label.clone(), support.into_iter().next().unwrap());
                }
                0 => {
                    return Err(Error::Model(format!(
                        "cannot infer a group for scalar-only operator {label}; \
                         declare `groups` explicitly"
                    )))
                }
                _ => {
                    return Err(Error::Model(format!(
                        "operator {label} touches summands {support:?}; \
                         declare `groups` explicitly"
                    )))
                }
            }
        }
        Ok(out)
    }
}

fn collect_support(op: &FockOp, visit: &mut impl FnMut(usize)) {
    match op {
        FockOp::LeftCreate(f) | FockOp::RightCreate(f) => {
            for (i, v) in f.iter().enumerate() {
                if *v != Complex64::ZERO {
                    visit(i);
                }
            }
        }
        FockOp::LeftGauge(t) | FockOp::RightGauge(t) => {
            for j in 0..t.ncols() {
                for i in 0..t.nrows() {
                    if t[(i, j)] != Complex64::ZERO {
                        visit(i);
                        visit(j);
                    }
                }
            }
        }
        FockOp::Scalar(_) => {}
        FockOp::Adjoint(inner) => collect_support(inner, visit),
        FockOp::Sum(parts) | FockOp::Product(parts) => {
            for p in parts {
                collect_support(p, visit);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Expression parsing
// ---------------------------------------------------------------------------

struct ExprContext<'a> {
    vectors: &'a BTreeMap<String, HVector>,
    matrices: &'a BTreeMap<String, HMatrix>,
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Ident(String),
    Number(f64),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    while pos < chars.len() {
        let ch = chars[pos];
        match ch {
            c if c.is_whitespace() => pos += 1,
            '+' => {
                tokens.push(Token::Plus);
                pos += 1;
            }
            '-' => {
                tokens.push(Token::Minus);
                pos += 1;
            }
            '*' => {
                tokens.push(Token::Star);
                pos += 1;
            }
            '(' => {
                tokens.push(Token::LParen);
                pos += 1;
            }
            ')' => {
                tokens.push(Token::RParen);
                pos += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = pos;
                while pos < chars.len() && (chars[pos].is_ascii_digit() || chars[pos] == '.') {
                    pos += 1;
                }
                if pos < chars.len() && (chars[pos] == 'e' || chars[pos] == 'E') {
                    pos += 1;
                    if pos < chars.len() && (chars[pos] == '+' || chars[pos] == '-') {
                        pos += 1;
                    }
                    while pos < chars.len() && chars[pos].is_ascii_digit() {
                        pos += 1;
                    }
                }
                let text: String = chars[start..pos].iter().collect();
                let value = text
                    .parse::<f64>()
                    .map_err(|_| Error::Model(format!("bad number literal \"{text}\"")))?;
                tokens.push(Token::Number(value));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = pos;
                while pos < chars.len() && (chars[pos].is_ascii_alphanumeric() || chars[pos] == '_')
                {
                    pos += 1;
                }
                tokens.push(Token::Ident(chars[start..pos].iter().collect()));
            }
            other => {
                return Err(Error::Model(format!(
                    "unexpected character '{other}' at offset {pos}"
                )))
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    ctx: &'a ExprContext<'a>,
}

fn parse_expression(text: &str, ctx: &ExprContext) -> Result<FockOp> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
        ctx,
    };
    let op = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(Error::Model(format!(
            "trailing input after expression in \"{text}\""
        )));
    }
    Ok(op)
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, token: Token) -> Result<()> {
        match self.bump() {
            Some(t) if t == token => Ok(()),
            other => Err(Error::Model(format!("expected {token:?}, found {other:?}"))),
        }
    }

    fn expr(&mut self) -> Result<FockOp> {
        let mut parts = vec![self.term()?];
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    parts.push(self.term()?);
                }
                Some(Token::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    parts.push(FockOp::Product(vec![
                        FockOp::Scalar(Complex64::new(-1.0, 0.0)),
                        rhs,
                    ]));
                }
                _ => break,
            }
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            FockOp::Sum(parts)
        })
    }

    fn term(&mut self) -> Result<FockOp> {
        let mut parts = vec![self.factor()?];
        while matches!(self.peek(), Some(Token::Star)) {
            self.bump();
            parts.push(self.factor()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            FockOp::Product(parts)
        })
    }

    fn factor(&mut self) -> Result<FockOp> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.bump();
            let inner = self.factor()?;
            return Ok(FockOp::Product(vec![
                FockOp::Scalar(Complex64::new(-1.0, 0.0)),
                inner,
            ]));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<FockOp> {
        match self.bump() {
            Some(Token::Number(x)) => Ok(FockOp::Scalar(Complex64::new(x, 0.0))),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "i" => Ok(FockOp::Scalar(Complex64::new(0.0, 1.0))),
                "l" => Ok(FockOp::LeftCreate(self.vector_arg()?)),
                "r" => Ok(FockOp::RightCreate(self.vector_arg()?)),
                "gauge_l" => Ok(FockOp::LeftGauge(self.matrix_arg()?)),
                "gauge_r" => Ok(FockOp::RightGauge(self.matrix_arg()?)),
                "adj" => {
                    self.expect(Token::LParen)?;
                    let inner = self.expr()?;
                    self.expect(Token::RParen)?;
                    Ok(inner.adjoint())
                }
                other => Err(Error::Model(format!(
                    "unknown name \"{other}\" (vectors appear only inside l()/r(), \
                     matrices inside gauge_l()/gauge_r())"
                ))),
            },
            other => Err(Error::Model(format!("unexpected token {other:?}"))),
        }
    }

    fn vector_arg(&mut self) -> Result<HVector> {
        self.expect(Token::LParen)?;
        let name = match self.bump() {
            Some(Token::Ident(name)) => name,
            other => {
                return Err(Error::Model(format!(
                    "expected a vector name, found {other:?}"
                )))
            }
        };
        self.expect(Token::RParen)?;
        self.ctx
            .vectors
            .get(&name)
            .cloned()
            .ok_or_else(|| Error::Model(format!("undeclared vector \"{name}\"")))
    }

    fn matrix_arg(&mut self) -> Result<HMatrix> {
        self.expect(Token::LParen)?;
        let name = match self.bump() {
            Some(Token::Ident(name)) => name,
            other => {
                return Err(Error::Model(format!(
                    "expected a matrix name, found {other:?}"
                )))
            }
        };
        self.expect(Token::RParen)?;
        self.ctx
            .matrices
            .get(&name)
            .cloned()
            .ok_or_else(|| Error::Model(format!("undeclared matrix \"{name}\"")))
    }
}
