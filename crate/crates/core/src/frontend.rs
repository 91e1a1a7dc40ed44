//! Text syntax for systems and polynomials.
//!
//! ```text
//! system {
//!   diffvars: u1, u2;
//!   params: t (dt = 1), x;
//!   consts: a1, a2;
//!   f1 = a1*x + u1*u2' - 3/2*u1^-2;
//!   f2 = ...;
//! }
//! ```
//!
//! Derivatives are written with primes or `^(k)`; `^n` is an ordinary (possibly
//! negative) power. Optional declarations `order: ascending;` and `mode: generic;`
//! select the ps ordering and generic coefficients.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::poly::{derivative_marks, derive_n, render, Coeff, DerivationRules, MultiPoly, ParamRule, Var, Variable};
use crate::system::{DiffSystem, Mode, PsOrder};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - s;
            out.push(Token { tok: Tok::Ident(chars[s..i].iter().collect()), line: start.0, col: start.1 });
            continue;
        }
        if c.is_ascii_digit() {
            let s = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += i - s;
            let text: String = chars[s..i].iter().collect();
            out.push(Token { tok: Tok::Int(text.parse().unwrap()), line: start.0, col: start.1 });
            continue;
        }
        if "+-*/^(){},;:='".contains(c) {
            out.push(Token { tok: Tok::Sym(c), line, col });
            i += 1;
            col += 1;
            continue;
        }
        return Err(ParseError { line, col, message: format!("unexpected character `{c}`") });
    }
    out.push(Token { tok: Tok::End, line, col });
    Ok(out)
}

#[derive(Clone, Debug)]
enum Symbol {
    DiffVar(u32),
    Param(String),
}

/// Symbol table used to resolve identifiers.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    entries: Vec<(String, Symbol)>,
    rules: DerivationRules,
    /// Accept `c1_2`, `a1_0`, `y3`, `u2` spellings and unknown names as free parameters.
    open: bool,
}

impl Scope {
    /// Scope of a parsed system, also accepting engine-generated names.
    pub fn of_system(sys: &DiffSystem) -> Scope {
        let mut s = Scope { open: true, rules: sys.rules.clone(), ..Default::default() };
        for (j, name) in sys.var_names.iter().enumerate() {
            s.entries.push((name.clone(), Symbol::DiffVar(j as u32 + 1)));
        }
        for (name, _) in sys.rules.params() {
            s.entries.push((name.clone(), Symbol::Param(name.clone())));
        }
        s
    }

    /// Scope with no declarations: every identifier is interpreted by its spelling.
    pub fn open() -> Scope {
        Scope { open: true, ..Default::default() }
    }

    fn lookup(&self, name: &str) -> Option<&Symbol> {
        self.entries.iter().rev().find(|e| e.0 == name).map(|e| &e.1)
    }
}

fn parse_indexed(name: &str, prefix: char) -> Option<(u32, Option<u32>)> {
    let rest = name.strip_prefix(prefix)?;
    let (a, b) = match rest.split_once('_') {
        Some((a, b)) => (a, Some(b)),
        None => (rest, None),
    };
    if a.is_empty() || !a.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let b = match b {
        Some(b) if !b.is_empty() && b.chars().all(|c| c.is_ascii_digit()) => Some(b.parse().ok()?),
        Some(_) => return None,
        None => None,
    };
    Some((a.parse().ok()?, b))
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    scope: &'a Scope,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let t = &self.toks[self.pos];
        Err(ParseError { line: t.line, col: t.col, message: msg.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn int(&mut self) -> Result<BigInt, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.pos += 1;
                Ok(n)
            }
            _ => self.err("expected integer"),
        }
    }

    fn expr(&mut self) -> Result<MultiPoly, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc += &self.term()?;
            } else if self.eat('-') {
                acc -= &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if self.eat('/') {
                let d = self.unary()?;
                if !d.is_constant() {
                    return self.err("division is only allowed by nonzero constants");
                }
                let c = d.constant_term();
                if c.is_zero() {
                    return self.err("division by zero");
                }
                acc = acc.scale(&c.recip());
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<MultiPoly, ParseError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<MultiPoly, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let neg = self.eat('-');
            let e = self.int()?;
            let e: i32 = i32::try_from(&e).map_err(|_| ParseError { line: 0, col: 0, message: "exponent too large".into() })?;
            let e = if neg { -e } else { e };
            if e >= 0 {
                return Ok(base.pow(e as u32));
            }
            return match base.as_term() {
                Some((m, c)) => Ok(MultiPoly::term(m.pow(e), num_traits::pow(c.recip(), (-e) as usize))),
                None => self.err("negative powers are allowed only for monomials"),
            };
        }
        Ok(base)
    }

    fn derivative_order(&mut self) -> Result<u32, ParseError> {
        let mut k = 0u32;
        while self.eat('\'') {
            k += 1;
        }
        if k == 0 && *self.peek() == Tok::Sym('^') && *self.peek_at(1) == Tok::Sym('(') {
            self.pos += 2;
            let n = self.int()?;
            k = u32::try_from(&n).map_err(|_| ParseError { line: 0, col: 0, message: "derivative order too large".into() })?;
            self.expect(')')?;
        }
        Ok(k)
    }

    fn atom(&mut self) -> Result<MultiPoly, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.pos += 1;
                Ok(MultiPoly::constant(Coeff::from_integer(n)))
            }
            Tok::Sym('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                let k = self.derivative_order()?;
                self.resolve(&name, k)
            }
            _ => self.err("expected a number, identifier or `(`"),
        }
    }

    fn resolve(&self, name: &str, k: u32) -> Result<MultiPoly, ParseError> {
        match self.scope.lookup(name) {
            Some(Symbol::DiffVar(j)) => return Ok(MultiPoly::var(Var::diff_ind(*j, k))),
            Some(Symbol::Param(p)) => {
                return match self.scope.rules.rule(p) {
                    Some(ParamRule::Free) | None => Ok(MultiPoly::var(Var::diff_param(p, k))),
                    Some(_) => derive_n(&MultiPoly::var(Var::diff_param(p, 0)), &self.scope.rules, k)
                        .or_else(|e| self.err(e.to_string())),
                };
            }
            None => {}
        }
        if !self.scope.open {
            return self.err(format!("undeclared symbol `{name}`"));
        }
        let plain = |v: Var| -> Result<MultiPoly, ParseError> {
            if k > 0 {
                self.err(format!("`{name}` cannot be differentiated"))
            } else {
                Ok(MultiPoly::var(v))
            }
        };
        if let Some((l, Some(h))) = parse_indexed(name, 'c') {
            return plain(Var::gen_coeff(l, h));
        }
        if let Some((i, Some(h))) = parse_indexed(name, 'a') {
            return Ok(MultiPoly::var(Var::diff_coeff(i, h, k)));
        }
        if let Some((i, Some(j))) = parse_indexed(name, 'X') {
            return plain(Var::structural(i, j));
        }
        if let Some((m, None)) = parse_indexed(name, 'y') {
            return plain(Var::alg(m));
        }
        if let Some((j, None)) = parse_indexed(name, 'u') {
            return Ok(MultiPoly::var(Var::diff_ind(j, k)));
        }
        Ok(MultiPoly::var(Var::diff_param(name, k)))
    }
}

/// Parses a polynomial expression.
pub fn parse_poly(src: &str, scope: &Scope) -> Result<MultiPoly, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0, scope };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

fn validation(e: impl ToString) -> ParseError {
    ParseError { line: 0, col: 0, message: e.to_string() }
}

/// Parses a system description.
pub fn parse_system(src: &str) -> Result<DiffSystem, ParseError> {
    let toks = lex(src)?;
    let mut scope = Scope::default();
    let mut p = Parser { toks, pos: 0, scope: &Scope::default() };
    match p.ident()?.as_str() {
        "system" => {}
        _ => return p.err("expected `system`"),
    }
    if let Tok::Ident(_) = p.peek() {
        p.pos += 1;
    }
    p.expect('{')?;
    let mut var_names = Vec::new();
    let mut polys = Vec::new();
    let mut poly_names = Vec::new();
    let mut mode = Mode::Concrete;
    let mut order = PsOrder::Descending;
    while !p.eat('}') {
        let key = p.ident()?;
        if p.eat(':') {
            match key.as_str() {
                "diffvars" => loop {
                    let n = p.ident()?;
                    if scope.lookup(&n).is_some() {
                        return p.err(format!("`{n}` declared twice"));
                    }
                    var_names.push(n.clone());
                    scope.entries.push((n, Symbol::DiffVar(var_names.len() as u32)));
                    if !p.eat(',') {
                        break;
                    }
                },
                "params" | "consts" => loop {
                    let n = p.ident()?;
                    if scope.lookup(&n).is_some() {
                        return p.err(format!("`{n}` declared twice"));
                    }
                    let mut rule = if key == "consts" { ParamRule::Constant } else { ParamRule::Free };
                    if key == "params" && p.eat('(') {
                        let d = p.ident()?;
                        if d != format!("d{n}") {
                            return p.err(format!("expected `d{n}`"));
                        }
                        p.expect('=')?;
                        let snapshot = scope.clone();
                        let mut sub = Parser { toks: p.toks.clone(), pos: p.pos, scope: &snapshot };
                        let e = sub.expr()?;
                        p.pos = sub.pos;
                        p.expect(')')?;
                        rule = ParamRule::Expr(e);
                    }
                    scope.rules.set(&n, rule);
                    scope.entries.push((n.clone(), Symbol::Param(n)));
                    if !p.eat(',') {
                        break;
                    }
                },
                "order" => {
                    order = match p.ident()?.as_str() {
                        "ascending" => PsOrder::Ascending,
                        "descending" => PsOrder::Descending,
                        _ => return p.err("order must be `ascending` or `descending`"),
                    }
                }
                "mode" => {
                    mode = match p.ident()?.as_str() {
                        "concrete" => Mode::Concrete,
                        "generic" => Mode::Generic,
                        _ => return p.err("mode must be `concrete` or `generic`"),
                    }
                }
                _ => return p.err(format!("unknown declaration `{key}`")),
            }
        } else if p.eat('=') {
            let snapshot = Scope { open: mode == Mode::Generic, ..scope.clone() };
            let mut sub = Parser { toks: p.toks.clone(), pos: p.pos, scope: &snapshot };
            let e = sub.expr()?;
            p.pos = sub.pos;
            polys.push(e);
            poly_names.push(key);
        } else {
            return p.err("expected `:` or `=`");
        }
        p.expect(';')?;
    }
    let mut sys = DiffSystem::new(polys, var_names, scope.rules.clone()).map_err(validation)?;
    sys.poly_names = poly_names;
    sys.ps_order = order;
    if mode == Mode::Generic {
        let has_coeffs = sys.polys.iter().flat_map(|f| f.variables()).any(|v| matches!(v.variable(), Variable::DiffCoeff { .. }));
        if !has_coeffs {
            let names = sys.poly_names.clone();
            sys = sys.to_generic();
            sys.poly_names = names;
        }
        sys.mode = Mode::Generic;
    }
    sys.validate().map_err(validation)?;
    Ok(sys)
}

/// Spelling of a variable inside `sys`: declared names for the indeterminates.
pub fn var_display(sys: &DiffSystem, v: Var) -> String {
    variable_display(sys, &v.variable())
}

fn variable_display(sys: &DiffSystem, v: &Variable) -> String {
    match v {
        Variable::DiffInd { j, k } => match sys.var_names.get(*j as usize - 1) {
            Some(n) => format!("{n}{}", derivative_marks(*k)),
            None => v.to_string(),
        },
        _ => v.to_string(),
    }
}

/// Canonical text of `p` using the names declared in `sys`.
pub fn render_in(sys: &DiffSystem, p: &MultiPoly) -> String {
    render(p, &|v| variable_display(sys, v))
}

/// Text form of a system that parses back to the same system.
pub fn print_system(sys: &DiffSystem) -> String {
    let mut out = String::from("system {\n");
    out.push_str(&format!("  diffvars: {};\n", sys.var_names.join(", ")));
    let mut params = Vec::new();
    let mut consts = Vec::new();
    for (name, rule) in sys.rules.params() {
        match rule {
            ParamRule::Free => params.push(name.clone()),
            ParamRule::Expr(e) => params.push(format!("{name} (d{name} = {})", render_in(sys, e))),
            ParamRule::Constant => consts.push(name.clone()),
        }
    }
    if !params.is_empty() {
        out.push_str(&format!("  params: {};\n", params.join(", ")));
    }
    if !consts.is_empty() {
        out.push_str(&format!("  consts: {};\n", consts.join(", ")));
    }
    if sys.ps_order == PsOrder::Ascending {
        out.push_str("  order: ascending;\n");
    }
    if sys.mode == Mode::Generic {
        out.push_str("  mode: generic;\n");
    }
    for (name, f) in sys.poly_names.iter().zip(&sys.polys) {
        out.push_str(&format!("  {name} = {};\n", render_in(sys, f)));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ratio;

    const PREDATOR_PREY: &str = "
        system predator_prey {
          diffvars: u1;
          params: x;
          consts: a1, a2, a3, a4, a5, a6, b1, b2, b3, b4, b5;
          order: ascending;
          f1 = a2*x + (a1 + a4*x)*u1 + u1' + (a3 + a6*x)*u1^2 + a5*u1^3;
          f2 = x' + (b1 + b3*x)*u1 + (b2 + b5*x)*u1^2 + b4*u1^3;
        }";

    #[test]
    fn parses_predator_prey() {
        let sys = parse_system(PREDATOR_PREY).unwrap();
        assert_eq!(sys.n(), 2);
        assert_eq!(sys.ps_order, PsOrder::Ascending);
        assert_eq!(sys.polys[0].len(), 7);
    }

    #[test]
    fn round_trip() {
        let sys = parse_system(PREDATOR_PREY).unwrap();
        let again = parse_system(&print_system(&sys)).unwrap();
        assert_eq!(sys, again);
        let src = "system { diffvars: x, y; params: t (dt = 1), z; f1 = z + x + y + y'; f2 = z + t*x' + y''; f3 = z + x + y'; }";
        let sys = parse_system(src).unwrap();
        assert_eq!(parse_system(&print_system(&sys)).unwrap(), sys);
    }

    #[test]
    fn derivative_and_power_syntax() {
        let scope = Scope::open();
        let p = parse_poly("u1^(3)^2 - 3/4*u2''^-1", &scope).unwrap();
        assert_eq!(p.to_string(), "u1^(3)^2 - 3/4*u2''^-1");
        let t = parse_poly("1/2", &scope).unwrap();
        assert_eq!(t.constant_term(), ratio(1, 2));
    }

    #[test]
    fn explicit_rule_parameter_derivatives() {
        let sys = parse_system("system { diffvars: x; params: t (dt = 1); f1 = t' + x; f2 = t*x'; }").unwrap();
        assert_eq!(sys.polys[0].to_string(), "u1 + 1");
    }

    #[test]
    fn reports_errors_with_position() {
        let e = parse_system("system {\n diffvars: u1;\n f1 = u1 + w;\n f2 = u1; }").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("undeclared"));
        assert!(parse_system("system { diffvars: u1; f1 = u1; }").is_err());
        assert!(parse_poly("u1 / u2", &Scope::open()).is_err());
    }

    #[test]
    fn generic_mode_names_coefficients() {
        let sys = parse_system("system { diffvars: u1, u2; mode: generic; f1 = 1 + u1*u2; f2 = 1 + u1*u2''; f3 = 1 + u2'; }").unwrap();
        assert_eq!(sys.mode, Mode::Generic);
        assert_eq!(render_in(&sys, &sys.polys[1]), "a2_1*u1*u2'' + a2_0");
        assert_eq!(parse_system(&print_system(&sys)).unwrap(), sys);
    }
}
