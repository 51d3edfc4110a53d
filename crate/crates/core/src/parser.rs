//! Text format for reaction networks (`.crn` files).
//!
//! ```text
//! # comment
//! @name = toy
//! @equilibrium = (1, 1)
//! 2 X1 -> X1 + X2 ; k = 1
//! X1 <-> X3 ; k = 1, 0.5
//! 0 -> X1 ; k = 0.008
//! ```
//!
//! Species are declared implicitly in order of first appearance unless an
//! `@species = A, B, ...` header fixes the order. `@generalized = true`
//! admits negative and fractional product coefficients. Numbers go through
//! [`Scalar::from_decimal_str`], so rational scalars keep literals exact.

use thiserror::Error;

use crate::model::{Complex, ModelError, Network, Reaction};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: {source}")]
    Network {
        line: usize,
        #[source]
        source: ModelError,
    },
    #[error("{0}")]
    Document(ModelError),
}

impl ParseError {
    fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}

/// A parsed `.crn` file: the reactions plus optional metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkDocument<T> {
    pub name: Option<String>,
    pub network: Network<T>,
    pub equilibrium: Option<Vec<T>>,
    pub x0: Option<Vec<T>>,
}

impl<T: Scalar> NetworkDocument<T> {
    pub fn from_network(network: Network<T>) -> Self {
        Self {
            name: None,
            network,
            equilibrium: None,
            x0: None,
        }
    }
}

struct RawTerm<T> {
    species: String,
    column: usize,
    coefficient: T,
    coefficient_column: usize,
}

struct RawReaction<T> {
    line: usize,
    reactant: Vec<RawTerm<T>>,
    product: Vec<RawTerm<T>>,
    rate: T,
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(text: &str, line: usize) -> Self {
        Self {
            chars: text.chars().collect(),
            pos: 0,
            line,
        }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::at(self.line, self.column(), message)
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(k, c)| self.chars.get(self.pos + k) == Some(&c))
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        self.skip_ws();
        if self.starts_with(s) {
            self.pos += s.chars().count();
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`")))
        }
    }

    fn identifier(&mut self) -> Option<String> {
        let start = self.pos;
        if !self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            return None;
        }
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        Some(self.chars[start..self.pos].iter().collect())
    }

    /// Numeric literal: optional sign, digits with optional fraction,
    /// optional exponent when `allow_exponent`, optional `/denominator`.
    fn number_literal(&mut self, allow_exponent: bool) -> Option<String> {
        let start = self.pos;
        let digits = |cur: &mut Self| {
            let s = cur.pos;
            while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                cur.pos += 1;
            }
            cur.pos > s
        };
        let unsigned = |cur: &mut Self| {
            let int = digits(cur);
            let mut frac = false;
            if cur.peek() == Some('.') {
                cur.pos += 1;
                frac = digits(cur);
            }
            int || frac
        };
        if matches!(self.peek(), Some('-') | Some('+')) {
            self.pos += 1;
        }
        if !unsigned(self) {
            self.pos = start;
            return None;
        }
        if allow_exponent && matches!(self.peek(), Some('e') | Some('E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('-') | Some('+')) {
                self.pos += 1;
            }
            if !digits(self) {
                self.pos = mark;
            }
        }
        if self.peek() == Some('/') {
            let mark = self.pos;
            self.pos += 1;
            if !unsigned(self) {
                self.pos = mark;
            }
        }
        Some(self.chars[start..self.pos].iter().collect())
    }

    fn number<T: Scalar>(&mut self, allow_exponent: bool) -> Result<T, ParseError> {
        self.skip_ws();
        let col = self.column();
        let lit = self
            .number_literal(allow_exponent)
            .ok_or_else(|| self.error("expected a number"))?;
        T::from_decimal_str(&lit).ok_or_else(|| ParseError::at(self.line, col, format!("invalid number `{lit}`")))
    }

    fn complex<T: Scalar>(&mut self) -> Result<Vec<RawTerm<T>>, ParseError> {
        let mut terms = Vec::new();
        loop {
            self.skip_ws();
            let coefficient_column = self.column();
            let literal = self.number_literal(false);
            self.skip_ws();
            let column = self.column();
            match (literal, self.identifier()) {
                (lit, Some(species)) => {
                    let coefficient = match lit {
                        None => T::one(),
                        Some(lit) => T::from_decimal_str(&lit).ok_or_else(|| {
                            ParseError::at(self.line, coefficient_column, format!("invalid coefficient `{lit}`"))
                        })?,
                    };
                    if coefficient.is_zero() {
                        return Err(ParseError::at(
                            self.line,
                            coefficient_column,
                            "coefficient must be nonzero; write `0` alone for the zero complex",
                        ));
                    }
                    terms.push(RawTerm {
                        species,
                        column,
                        coefficient,
                        coefficient_column,
                    });
                }
                (Some(lit), None) if lit == "0" && terms.is_empty() => {
                    return Ok(terms);
                }
                (Some(_), None) => return Err(self.error("expected a species name after the coefficient")),
                (None, None) => return Err(self.error("expected a species name or `0`")),
            }
            self.skip_ws();
            if self.peek() == Some('+') {
                self.pos += 1;
            } else {
                return Ok(terms);
            }
        }
    }
}

fn parse_tuple<T: Scalar>(value: &str, line: usize, offset: usize) -> Result<Vec<T>, ParseError> {
    let mut cur = Cursor::new(value, line);
    let shift = |e: ParseError| match e {
        ParseError::Syntax { line, column, message } => ParseError::Syntax {
            line,
            column: column + offset,
            message,
        },
        other => other,
    };
    cur.expect("(").map_err(shift)?;
    let mut out = Vec::new();
    cur.skip_ws();
    if cur.peek() == Some(')') {
        cur.pos += 1;
    } else {
        loop {
            out.push(cur.number::<T>(true).map_err(shift)?);
            cur.skip_ws();
            match cur.peek() {
                Some(',') => cur.pos += 1,
                Some(')') => {
                    cur.pos += 1;
                    break;
                }
                _ => return Err(shift(cur.error("expected `,` or `)`"))),
            }
        }
    }
    cur.skip_ws();
    if !cur.at_end() {
        return Err(shift(cur.error("unexpected text after `)`")));
    }
    Ok(out)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Parses a `.crn` document.
pub fn parse_network<T: Scalar>(text: &str) -> Result<NetworkDocument<T>, ParseError> {
    let mut name = None;
    let mut declared: Option<(usize, Vec<String>)> = None;
    let mut generalized = false;
    let mut equilibrium: Option<(usize, Vec<T>)> = None;
    let mut x0: Option<(usize, Vec<T>)> = None;
    let mut raw: Vec<RawReaction<T>> = Vec::new();

    for (idx, full) in text.lines().enumerate() {
        let line_no = idx + 1;
        let body = strip_comment(full);
        if body.trim().is_empty() {
            continue;
        }
        let lead = body.len() - body.trim_start().len();
        let trimmed = body.trim_start();
        if let Some(header) = trimmed.strip_prefix('@') {
            let (key, value) = header
                .split_once('=')
                .ok_or_else(|| ParseError::at(line_no, lead + 1, "header needs the form `@key = value`"))?;
            let value_offset = lead + 1 + key.len() + 1;
            let value_lead = value.len() - value.trim_start().len();
            let value_col = value_offset + value_lead;
            let value = value.trim();
            match key.trim() {
                "name" => name = Some(value.to_string()),
                "equilibrium" => equilibrium = Some((line_no, parse_tuple(value, line_no, value_col)?)),
                "x0" => x0 = Some((line_no, parse_tuple(value, line_no, value_col)?)),
                "generalized" => {
                    generalized = match value {
                        "true" => true,
                        "false" => false,
                        _ => return Err(ParseError::at(line_no, value_col + 1, "expected `true` or `false`")),
                    }
                }
                "species" => {
                    if declared.is_some() {
                        return Err(ParseError::at(line_no, lead + 1, "`@species` given twice"));
                    }
                    let mut names = Vec::new();
                    let mut col = value_col + 1;
                    for item in value.split(',') {
                        let item_lead = item.len() - item.trim_start().len();
                        let n = item.trim();
                        let mut cur = Cursor::new(n, line_no);
                        if cur.identifier().is_none() || !cur.at_end() {
                            return Err(ParseError::at(line_no, col + item_lead, format!("invalid species name `{n}`")));
                        }
                        if names.iter().any(|m| m == n) {
                            return Err(ParseError::at(line_no, col + item_lead, format!("species `{n}` declared twice")));
                        }
                        names.push(n.to_string());
                        col += item.chars().count() + 1;
                    }
                    declared = Some((line_no, names));
                }
                other => {
                    return Err(ParseError::at(line_no, lead + 2, format!("unknown header `@{}`", other)));
                }
            }
            continue;
        }

        let mut cur = Cursor::new(body, line_no);
        let reactant = cur.complex::<T>()?;
        cur.skip_ws();
        let reversible = if cur.starts_with("<->") {
            cur.pos += 3;
            true
        } else if cur.starts_with("->") {
            cur.pos += 2;
            false
        } else {
            return Err(cur.error("expected `->` or `<->`"));
        };
        let product = cur.complex::<T>()?;
        cur.expect(";")?;
        cur.expect("k")?;
        cur.expect("=")?;
        cur.skip_ws();
        let rate_col = cur.column();
        let kf: T = cur.number(true)?;
        let kr: Option<(usize, T)> = if reversible {
            cur.expect(",")?;
            cur.skip_ws();
            let col = cur.column();
            Some((col, cur.number(true)?))
        } else {
            None
        };
        cur.skip_ws();
        if !cur.at_end() {
            return Err(cur.error("unexpected text after the rate"));
        }
        for (col, k) in std::iter::once((rate_col, &kf)).chain(kr.as_ref().map(|(c, k)| (*c, k))) {
            if !(*k > T::zero()) {
                return Err(ParseError::at(line_no, col, "rate constant must be positive"));
            }
        }
        if same_terms(&reactant, &product) {
            return Err(ParseError::at(line_no, 1, "reactant and product complexes are identical"));
        }
        match kr {
            Some((_, kr)) => {
                let (r2, p2) = (clone_terms(&product), clone_terms(&reactant));
                raw.push(RawReaction {
                    line: line_no,
                    reactant,
                    product,
                    rate: kf,
                });
                raw.push(RawReaction {
                    line: line_no,
                    reactant: r2,
                    product: p2,
                    rate: kr,
                });
            }
            None => raw.push(RawReaction {
                line: line_no,
                reactant,
                product,
                rate: kf,
            }),
        }
    }

    let species: Vec<String> = match &declared {
        Some((_, names)) => names.clone(),
        None => {
            let mut names: Vec<String> = Vec::new();
            for r in &raw {
                for t in r.reactant.iter().chain(&r.product) {
                    if !names.contains(&t.species) {
                        names.push(t.species.clone());
                    }
                }
            }
            names
        }
    };

    let mut reactions = Vec::with_capacity(raw.len());
    for r in &raw {
        let build = |terms: &[RawTerm<T>], is_product: bool| -> Result<Complex<T>, ParseError> {
            let mut pairs = Vec::new();
            for t in terms {
                let i = species.iter().position(|s| *s == t.species).ok_or_else(|| {
                    ParseError::at(r.line, t.column, format!("species `{}` is not declared in `@species`", t.species))
                })?;
                let c = &t.coefficient;
                let ok = if generalized && is_product {
                    true
                } else if generalized {
                    *c > T::zero()
                } else {
                    c.as_integer().is_some_and(|k| k > 0)
                };
                if !ok {
                    return Err(ParseError::at(
                        r.line,
                        t.coefficient_column,
                        format!(
                            "coefficient `{}` must be a positive {}",
                            c.to_decimal_string(),
                            if generalized { "number" } else { "integer (or set `@generalized = true`)" }
                        ),
                    ));
                }
                pairs.push((i, c.clone()));
            }
            Ok(Complex::from_pairs(pairs))
        };
        let reactant = build(&r.reactant, false)?;
        let product = build(&r.product, true)?;
        reactions.push(Reaction::new(reactant, product, r.rate.clone()));
    }

    let network = Network::build(species, reactions, generalized).map_err(|e| match reaction_of(&e) {
        Some(j) => ParseError::Network {
            line: raw[j].line,
            source: e,
        },
        None => ParseError::Document(e),
    })?;

    let n = network.num_species();
    for (label, value) in [("@equilibrium", &equilibrium), ("@x0", &x0)] {
        if let Some((line, v)) = value {
            if v.len() != n {
                return Err(ParseError::at(
                    *line,
                    1,
                    format!("{label} has {} entries but the network has {n} species", v.len()),
                ));
            }
        }
    }

    Ok(NetworkDocument {
        name,
        network,
        equilibrium: equilibrium.map(|(_, v)| v),
        x0: x0.map(|(_, v)| v),
    })
}

fn reaction_of(e: &ModelError) -> Option<usize> {
    match e {
        ModelError::NonPositiveRate { reaction, .. }
        | ModelError::TrivialReaction { reaction }
        | ModelError::DuplicateReaction { reaction, .. }
        | ModelError::NonStandardCoefficient { reaction, .. }
        | ModelError::UnknownSpecies { reaction, .. } => Some(*reaction),
        _ => None,
    }
}

fn same_terms<T: Scalar>(a: &[RawTerm<T>], b: &[RawTerm<T>]) -> bool {
    let key = |terms: &[RawTerm<T>]| {
        let mut v: Vec<(String, String)> = Vec::new();
        for t in terms {
            match v.iter_mut().find(|(s, _)| *s == t.species) {
                Some(entry) => {
                    let sum = T::from_decimal_str(&entry.1).unwrap_or_else(T::zero) + t.coefficient.clone();
                    entry.1 = sum.to_decimal_string();
                }
                None => v.push((t.species.clone(), t.coefficient.to_decimal_string())),
            }
        }
        v.sort();
        v
    };
    key(a) == key(b)
}

fn clone_terms<T: Scalar>(terms: &[RawTerm<T>]) -> Vec<RawTerm<T>> {
    terms
        .iter()
        .map(|t| RawTerm {
            species: t.species.clone(),
            column: t.column,
            coefficient: t.coefficient.clone(),
            coefficient_column: t.coefficient_column,
        })
        .collect()
}

/// Renders a network so that [`parse_network`] rebuilds identical matrices.
pub fn serialize_network<T: Scalar>(net: &Network<T>) -> String {
    serialize_document(&NetworkDocument::from_network(net.clone()))
}

pub fn serialize_document<T: Scalar>(doc: &NetworkDocument<T>) -> String {
    let net = &doc.network;
    let names = net.species_names();
    let mut out = String::new();
    if let Some(name) = &doc.name {
        out.push_str(&format!("@name = {name}\n"));
    }
    out.push_str(&format!("@species = {}\n", names.join(", ")));
    if net.is_generalized() {
        out.push_str("@generalized = true\n");
    }
    let tuple = |v: &[T]| v.iter().map(Scalar::to_decimal_string).collect::<Vec<_>>().join(", ");
    if let Some(eq) = &doc.equilibrium {
        out.push_str(&format!("@equilibrium = ({})\n", tuple(eq)));
    }
    if let Some(x0) = &doc.x0 {
        out.push_str(&format!("@x0 = ({})\n", tuple(x0)));
    }
    for r in net.reactions() {
        out.push_str(&format!(
            "{} -> {} ; k = {}\n",
            r.reactant.format(&names),
            r.product.format(&names),
            r.rate.to_decimal_string()
        ));
    }
    out
}
