//! Scheme files: a TOML document with a versioned header, and the small
//! expression language used for coefficients and equilibria.
//!
//! ```toml
//! format = "lbmfd-scheme/1"
//! dimension = 1
//! velocities = [[1], [-1]]
//! lattice_speed = "lambda"
//! moments = [[1, 1], ["lambda", "-lambda"]]
//! conserved = 1
//! relaxation = [0, "s2"]
//! equilibria = ["C*m1"]
//!
//! [parameters]
//! lambda = 1
//! s2 = "3/2"
//! C = "free"
//! ```
//!
//! `equilibria` lists the non-conserved moments only; a full list of `q`
//! entries whose first `N` are `m1 … mN` is accepted too. Parameters bound
//! to `"free"` stay symbolic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Deserialize;
use toml::Spanned;

use crate::algebra::{Coeff, Param, Ring};
use crate::error::{Error, Result};
use crate::jet::JetPoly;
use crate::matrix::Matrix;
use crate::scheme::LbmScheme;

pub const FORMAT: &str = "lbmfd-scheme/1";

const MAX_DEPTH: usize = 64;
const MAX_DEGREE: u64 = 64;

/// Which symbols an expression may use.
#[derive(Clone, Debug, Default)]
pub struct ExprContext {
    /// Number of conserved moments `m1 … mN` allowed.
    pub conserved: usize,
    /// Declared parameter names; `None` accepts any identifier.
    pub parameters: Option<BTreeSet<String>>,
}

impl ExprContext {
    pub fn permissive(conserved: usize) -> Self {
        ExprContext { conserved, parameters: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
}

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse { line: 1, column: offset + 1, message: message.into() }
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer { src, toks: Vec::new() };
        let mut it = src.char_indices().peekable();
        while let Some(&(i, ch)) = it.peek() {
            if ch.is_whitespace() {
                it.next();
            } else if ch.is_ascii_digit() || ch == '.' {
                let start = i;
                let mut end = i;
                while let Some(&(j, c)) = it.peek() {
                    if c.is_ascii_digit() || c == '.' {
                        end = j + c.len_utf8();
                        it.next();
                    } else {
                        break;
                    }
                }
                lx.toks.push((Tok::Num(number(&src[start..end], start)?), start));
            } else if ch.is_ascii_alphabetic() || ch == '_' {
                let start = i;
                let mut end = i;
                while let Some(&(j, c)) = it.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        end = j + c.len_utf8();
                        it.next();
                    } else {
                        break;
                    }
                }
                lx.toks.push((Tok::Ident(src[start..end].to_string()), start));
            } else if "+-*/^()".contains(ch) {
                lx.toks.push((Tok::Op(ch), i));
                it.next();
            } else {
                return Err(parse_err(i, format!("unexpected character `{ch}`")));
            }
        }
        lx.toks.push((Tok::End, lx.src.len()));
        Ok(lx.toks)
    }
}

fn number(text: &str, at: usize) -> Result<BigRational> {
    let mut parts = text.split('.');
    let int = parts.next().unwrap_or("");
    let frac = parts.next();
    if parts.next().is_some() || (int.is_empty() && frac.is_none_or(str::is_empty)) {
        return Err(parse_err(at, format!("malformed number `{text}`")));
    }
    let frac = frac.unwrap_or("");
    if frac.len() > 64 {
        return Err(parse_err(at, "too many decimal digits"));
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().map_err(|_| parse_err(at, format!("malformed number `{text}`")))?;
    Ok(BigRational::new(n, num_traits::pow(BigInt::from(10), frac.len())))
}

#[derive(Clone, Debug)]
enum Ast {
    Num(BigRational),
    Param(String),
    Moment(usize),
    Neg(Box<Ast>),
    Bin(char, Box<Ast>, Box<Ast>, usize),
    Pow(Box<Ast>, i64, usize),
}

struct Parser<'c> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    ctx: &'c ExprContext,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self, depth: usize) -> Result<Ast> {
        if depth > MAX_DEPTH {
            return Err(parse_err(self.offset(), "expression nested too deeply"));
        }
        let mut lhs = self.term(depth)?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            let (_, at) = self.bump();
            let rhs = self.term(depth)?;
            lhs = Ast::Bin(c, Box::new(lhs), Box::new(rhs), at);
        }
        Ok(lhs)
    }

    fn term(&mut self, depth: usize) -> Result<Ast> {
        let mut lhs = self.unary(depth)?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            let (_, at) = self.bump();
            let rhs = self.unary(depth)?;
            lhs = Ast::Bin(c, Box::new(lhs), Box::new(rhs), at);
        }
        Ok(lhs)
    }

    fn unary(&mut self, depth: usize) -> Result<Ast> {
        if depth > MAX_DEPTH {
            return Err(parse_err(self.offset(), "expression nested too deeply"));
        }
        match *self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Ast::Neg(Box::new(self.unary(depth + 1)?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary(depth + 1)
            }
            _ => self.power(depth),
        }
    }

    fn power(&mut self, depth: usize) -> Result<Ast> {
        let base = self.atom(depth)?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        let (_, at) = self.bump();
        let negative = if *self.peek() == Tok::Op('-') {
            self.bump();
            true
        } else {
            false
        };
        let (tok, eat) = self.bump();
        let exp = match tok {
            Tok::Num(r) if r.is_integer() => r.to_integer(),
            _ => return Err(parse_err(eat, "exponent must be an integer")),
        };
        let exp: i64 = i64::try_from(exp)
            .ok()
            .filter(|e| *e as u64 <= MAX_DEGREE)
            .ok_or_else(|| parse_err(eat, format!("exponent larger than {MAX_DEGREE}")))?;
        Ok(Ast::Pow(Box::new(base), if negative { -exp } else { exp }, at))
    }

    fn atom(&mut self, depth: usize) -> Result<Ast> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(r) => Ok(Ast::Num(r)),
            Tok::Ident(name) => self.symbol(name, at),
            Tok::Op('(') => {
                let inner = self.expr(depth + 1)?;
                match self.bump() {
                    (Tok::Op(')'), _) => Ok(inner),
                    (_, at) => Err(parse_err(at, "expected `)`")),
                }
            }
            Tok::End => Err(parse_err(at, "unexpected end of expression")),
            Tok::Op(c) => Err(parse_err(at, format!("unexpected `{c}`"))),
        }
    }

    fn symbol(&self, name: String, at: usize) -> Result<Ast> {
        if let Some(idx) = moment_index(&name) {
            if idx == 0 || idx > self.ctx.conserved {
                return Err(parse_err(
                    at,
                    format!("`{name}` is not a conserved moment (expected m1 … m{})", self.ctx.conserved),
                ));
            }
            return Ok(Ast::Moment(idx - 1));
        }
        match &self.ctx.parameters {
            Some(known) if !known.contains(&name) => Err(parse_err(at, format!("unknown symbol `{name}`"))),
            _ => Ok(Ast::Param(name)),
        }
    }
}

fn moment_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('m')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.len() > 6 {
        return None;
    }
    digits.parse().ok()
}

/// Degree bound used to reject expressions that would expand too far.
fn degree(a: &Ast) -> u64 {
    match a {
        Ast::Num(_) => 0,
        Ast::Param(_) | Ast::Moment(_) => 1,
        Ast::Neg(x) => degree(x),
        Ast::Bin('+' | '-', x, y, _) => degree(x).max(degree(y)),
        Ast::Bin(_, x, y, _) => degree(x).saturating_add(degree(y)),
        Ast::Pow(x, e, _) => degree(x).saturating_mul(e.unsigned_abs()),
    }
}

fn eval(a: &Ast) -> Result<JetPoly> {
    Ok(match a {
        Ast::Num(r) => JetPoly::scalar(Coeff::rational(r.clone())),
        Ast::Param(p) => JetPoly::scalar(Coeff::param(p)),
        Ast::Moment(i) => JetPoly::moment(*i),
        Ast::Neg(x) => eval(x)?.neg(),
        Ast::Bin(op, x, y, at) => {
            let (x, y) = (eval(x)?, eval(y)?);
            match op {
                '+' => x.add(&y),
                '-' => x.sub(&y),
                '*' => x.mul(&y),
                _ => {
                    if !y.is_constant() {
                        return Err(parse_err(*at, "division by an expression in the moments"));
                    }
                    let d = y.constant_term();
                    if d.is_zero() {
                        return Err(parse_err(*at, "division by zero"));
                    }
                    x.mul_coeff(&Coeff::one().div(&d)?)
                }
            }
        }
        Ast::Pow(x, e, at) => {
            let base = eval(x)?;
            if *e >= 0 {
                let mut out = JetPoly::one();
                for _ in 0..*e {
                    out = out.mul(&base);
                }
                out
            } else {
                if !base.is_constant() || base.constant_term().is_zero() {
                    return Err(parse_err(*at, "negative power of a non-invertible expression"));
                }
                let inv = Coeff::one().div(&base.constant_term())?;
                JetPoly::scalar(inv.pow(e.unsigned_abs() as u32))
            }
        }
    })
}

/// Parses a polynomial expression in the conserved moments with
/// rational-function coefficients in the parameters.
pub fn parse_expression(src: &str, ctx: &ExprContext) -> Result<JetPoly> {
    let toks = Lexer::run(src)?;
    let mut p = Parser { toks, pos: 0, ctx };
    let ast = p.expr(0)?;
    if *p.peek() != Tok::End {
        return Err(parse_err(p.offset(), "unexpected trailing input"));
    }
    if degree(&ast) > MAX_DEGREE {
        return Err(parse_err(0, format!("expression degree exceeds {MAX_DEGREE}")));
    }
    eval(&ast)
}

/// Parses an expression that must not involve the moments.
pub fn parse_coefficient(src: &str, ctx: &ExprContext) -> Result<Coeff> {
    let none = ExprContext { conserved: 0, parameters: ctx.parameters.clone() };
    let p = parse_expression(src, &none)?;
    Ok(p.constant_term())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    format: Spanned<String>,
    #[serde(default)]
    #[allow(dead_code)]
    name: Option<String>,
    dimension: Spanned<i64>,
    velocities: Spanned<Vec<Spanned<Vec<i64>>>>,
    lattice_speed: Spanned<toml::Value>,
    moments: Spanned<Vec<Spanned<Vec<Spanned<toml::Value>>>>>,
    conserved: Spanned<i64>,
    relaxation: Spanned<Vec<Spanned<toml::Value>>>,
    equilibria: Spanned<Vec<Spanned<String>>>,
    #[serde(default)]
    parameters: BTreeMap<String, Spanned<toml::Value>>,
}

/// Byte offset to 1-based line and column.
fn locate(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.chars().count(), |p| before[p + 1..].chars().count()) + 1;
    (line, col)
}

struct Doc<'a> {
    text: &'a str,
}

impl Doc<'_> {
    fn err(&self, span: Range<usize>, message: impl Into<String>) -> Error {
        let (line, column) = locate(self.text, span.start);
        Error::Parse { line, column, message: message.into() }
    }

    /// Moves an expression error to its place in the document.
    fn relocate(&self, e: Error, span: &Range<usize>, key: &str) -> Error {
        match e {
            Error::Parse { column, message, .. } => {
                let quote = usize::from(self.text.get(span.start..span.start + 1).is_some_and(|c| c == "\"" || c == "'"));
                let (line, col) = locate(self.text, span.start + quote + column - 1);
                Error::Parse { line, column: col, message: format!("{key}: {message}") }
            }
            other => {
                let (line, column) = locate(self.text, span.start);
                Error::Parse { line, column, message: format!("{key}: {other}") }
            }
        }
    }

    fn coeff(&self, v: &Spanned<toml::Value>, ctx: &ExprContext, key: &str) -> Result<Coeff> {
        let span = v.span();
        match v.get_ref() {
            toml::Value::Integer(n) => Ok(Coeff::int(*n)),
            toml::Value::String(s) => parse_coefficient(s, ctx).map_err(|e| self.relocate(e, &span, key)),
            toml::Value::Float(_) => Err(self.err(span, format!("{key}: use an exact rational such as \"3/2\" instead of a float"))),
            _ => Err(self.err(span, format!("{key}: expected a number or an expression string"))),
        }
    }
}

/// Parses and validates a scheme document.
pub fn parse_scheme(text: &str) -> Result<LbmScheme> {
    let raw: RawFile = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| locate(text, s.start));
        Error::Parse { line, column, message: e.message().trim().to_string() }
    })?;
    let doc = Doc { text };
    if raw.format.get_ref() != FORMAT {
        return Err(doc.err(raw.format.span(), format!("unsupported format `{}`, expected `{FORMAT}`", raw.format.get_ref())));
    }
    let dimension = usize::try_from(*raw.dimension.get_ref())
        .map_err(|_| doc.err(raw.dimension.span(), "dimension must be positive"))?;
    let conserved = usize::try_from(*raw.conserved.get_ref())
        .map_err(|_| doc.err(raw.conserved.span(), "conserved count must be positive"))?;
    let mut velocities = Vec::new();
    for v in raw.velocities.get_ref() {
        let c = v
            .get_ref()
            .iter()
            .map(|x| i32::try_from(*x).ok().filter(|x| x.abs() <= 1 << 20))
            .collect::<Option<Vec<i32>>>()
            .ok_or_else(|| doc.err(v.span(), "velocity component out of range"))?;
        velocities.push(c);
    }
    let q = velocities.len();

    let mut parameters = BTreeMap::new();
    let mut names = BTreeSet::new();
    for (name, value) in &raw.parameters {
        let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid || moment_index(name).is_some() {
            return Err(doc.err(value.span(), format!("invalid parameter name `{name}`")));
        }
        names.insert(name.clone());
    }
    let ctx = ExprContext { conserved, parameters: Some(names) };
    let literal = ExprContext { conserved: 0, parameters: Some(BTreeSet::new()) };
    for (name, value) in &raw.parameters {
        let binding = match value.get_ref() {
            toml::Value::String(s) if s == "free" => None,
            _ => {
                let c = doc.coeff(value, &literal, &format!("parameters.{name}"))?;
                Some(c.as_rational().ok_or_else(|| doc.err(value.span(), "binding must be a number"))?)
            }
        };
        parameters.insert(Param::new(name), binding);
    }

    let lambda = doc.coeff(&raw.lattice_speed, &ctx, "lattice_speed")?;
    let rows = raw.moments.get_ref();
    if rows.len() != q {
        return Err(doc.err(raw.moments.span(), format!("moments: expected {q} rows, got {}", rows.len())));
    }
    let mut entries = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if row.get_ref().len() != q {
            return Err(doc.err(row.span(), format!("moments row {}: expected {q} entries, got {}", i + 1, row.get_ref().len())));
        }
        let r = row
            .get_ref()
            .iter()
            .map(|v| doc.coeff(v, &ctx, &format!("moments row {}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        entries.push(r);
    }
    let rates = raw
        .relaxation
        .get_ref()
        .iter()
        .enumerate()
        .map(|(j, v)| doc.coeff(v, &ctx, &format!("relaxation[{}]", j + 1)))
        .collect::<Result<Vec<_>>>()?;

    let given = raw.equilibria.get_ref();
    let mut equilibria: Vec<JetPoly> = (0..conserved.min(q)).map(JetPoly::moment).collect();
    let skip = if given.len() == q { conserved.min(q) } else { 0 };
    for (k, e) in given.iter().enumerate() {
        let key = format!("equilibria[{}]", k + 1);
        let p = parse_expression(e.get_ref(), &ctx).map_err(|err| doc.relocate(err, &e.span(), &key))?;
        if k < skip {
            if p != JetPoly::moment(k) {
                return Err(doc.err(e.span(), format!("{key}: conserved moment m{0} must have equilibrium m{0}", k + 1)));
            }
        } else {
            equilibria.push(p);
        }
    }

    let s = LbmScheme {
        dimension,
        velocities,
        lambda,
        moments: Matrix::from_rows(entries),
        conserved,
        rates,
        equilibria,
        parameters,
    };
    let report = s.validate();
    if let Some(issue) = report.errors.first() {
        let key = issue.component.split('[').next().unwrap_or("");
        let span = match key {
            "dimension" => raw.dimension.span(),
            "velocities" => raw.velocities.span(),
            "conserved" => raw.conserved.span(),
            "moments" => raw.moments.span(),
            "lattice_speed" => raw.lattice_speed.span(),
            "relaxation" => raw.relaxation.span(),
            _ => raw.equilibria.span(),
        };
        let (line, column) = locate(text, span.start);
        return Err(Error::Validation {
            component: format!("line {line}, column {column}: {}", issue.component),
            message: issue.message.clone(),
        });
    }
    Ok(s)
}

pub fn parse_scheme_file(path: &Path) -> Result<LbmScheme> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse { line: 0, column: 0, message: format!("{}: {e}", path.display()) })?;
    parse_scheme(&text)
}

fn quote(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn coeff_value(c: &Coeff) -> String {
    match c.as_rational() {
        Some(r) if r.is_integer() => r.to_integer().to_string(),
        _ => quote(&c.to_string()),
    }
}

/// Writes a scheme back in the file format.
pub fn serialize_scheme(s: &LbmScheme) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format = {}", quote(FORMAT));
    let _ = writeln!(out, "dimension = {}", s.dimension);
    let vel: Vec<String> = s
        .velocities
        .iter()
        .map(|c| format!("[{}]", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")))
        .collect();
    let _ = writeln!(out, "velocities = [{}]", vel.join(", "));
    let _ = writeln!(out, "lattice_speed = {}", coeff_value(&s.lambda));
    let _ = writeln!(out, "moments = [");
    for i in 0..s.moments.rows() {
        let row: Vec<String> = s.moments.row(i).iter().map(coeff_value).collect();
        let _ = writeln!(out, "  [{}],", row.join(", "));
    }
    let _ = writeln!(out, "]");
    let _ = writeln!(out, "conserved = {}", s.conserved);
    let rates: Vec<String> = s.rates.iter().map(coeff_value).collect();
    let _ = writeln!(out, "relaxation = [{}]", rates.join(", "));
    let eqs: Vec<String> = s.equilibria.iter().skip(s.conserved).map(|e| quote(&e.render())).collect();
    let _ = writeln!(out, "equilibria = [{}]", eqs.join(", "));
    let _ = writeln!(out, "\n[parameters]");
    for (p, v) in &s.parameters {
        let value = match v {
            None => quote("free"),
            Some(r) if r.is_integer() => r.to_integer().to_string(),
            Some(r) => quote(&r.to_string()),
        };
        let _ = writeln!(out, "{p} = {value}");
    }
    out
}

/// Rational number from a literal such as `3/2`, `-4` or `0.25`.
pub fn parse_rational(src: &str) -> Result<BigRational> {
    let c = parse_coefficient(src, &ExprContext { conserved: 0, parameters: Some(BTreeSet::new()) })?;
    c.as_rational().ok_or_else(|| parse_err(0, "expected a number"))
}
