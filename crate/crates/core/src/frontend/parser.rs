use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::ast::{Expr, ExprKind, FunctionDef, ProgramAst, Stmt};
use super::lexer::{tokenize, Pos, Tok};
use crate::error::Result;
use crate::semiring::parse_rational_literal;

/// Names that cannot be used for functions because they clash with built-in symbols.
pub(crate) const RESERVED: &[&str] = &[
    "and", "or", "not", "observe", "flip", "let", "true", "false",
];

/// Parses and checks a program: names resolve, arities match, calls are acyclic.
pub fn parse(src: &str) -> Result<ProgramAst> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, i: 0 };
    let mut functions = Vec::new();
    while p.peek() != &Tok::Eof {
        functions.push(p.fndef()?);
    }
    if functions.is_empty() {
        return Err(p.pos().error("program defines no functions"));
    }
    let ast = ProgramAst { functions };
    check(&ast)?;
    Ok(ast)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Pos> {
        let (t, pos) = self.next();
        if t == want {
            Ok(pos)
        } else {
            Err(pos.error(format!(
                "expected {}, found {}",
                want.describe(),
                t.describe()
            )))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos)> {
        match self.next() {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (t, pos) => Err(pos.error(format!("expected identifier, found {}", t.describe()))),
        }
    }

    /// Whether the upcoming tokens read `IDENT ( [IDENT {, IDENT}] ) :=`.
    fn at_fndef(&self) -> bool {
        if !matches!(self.peek(), Tok::Ident(_)) || self.peek_at(1) != &Tok::LParen {
            return false;
        }
        let mut k = 2;
        if matches!(self.peek_at(k), Tok::Ident(_)) {
            k += 1;
            while self.peek_at(k) == &Tok::Comma && matches!(self.peek_at(k + 1), Tok::Ident(_)) {
                k += 2;
            }
        }
        self.peek_at(k) == &Tok::RParen && self.peek_at(k + 1) == &Tok::Define
    }

    fn fndef(&mut self) -> Result<FunctionDef> {
        let (name, pos) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                params.push(self.ident()?.0);
                if self.peek() != &Tok::Comma {
                    break;
                }
                self.next();
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Define)?;

        let mut body = Vec::new();
        loop {
            match self.peek() {
                Tok::Let => {
                    let pos = self.next().1;
                    let mut targets = vec![self.ident()?.0];
                    while self.peek() == &Tok::Comma {
                        self.next();
                        targets.push(self.ident()?.0);
                    }
                    self.expect(Tok::Eq)?;
                    let value = self.expr()?;
                    self.expect(Tok::Semi)?;
                    body.push(Stmt::Let {
                        targets,
                        value,
                        pos,
                    });
                }
                Tok::Observe => {
                    let pos = self.next().1;
                    self.expect(Tok::LParen)?;
                    let value = self.expr()?;
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::Semi)?;
                    body.push(Stmt::Observe { value, pos });
                }
                _ => break,
            }
        }

        let mut returns = Vec::new();
        if self.peek() != &Tok::Eof && !self.at_fndef() {
            returns.push(self.expr()?);
            while self.peek() == &Tok::Comma {
                self.next();
                returns.push(self.expr()?);
            }
            if self.peek() == &Tok::Semi {
                self.next();
            }
        }
        if self.peek() != &Tok::Eof && !self.at_fndef() {
            let (t, pos) = self.next();
            return Err(pos.error(format!(
                "expected the start of a function definition, found {}",
                t.describe()
            )));
        }
        Ok(FunctionDef {
            name,
            pos,
            params,
            body,
            returns,
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut left = self.conj()?;
        while self.peek() == &Tok::Or {
            let pos = self.next().1;
            let right = self.conj()?;
            left = Expr {
                kind: ExprKind::Or {
                    left: Box::new(left),
                    right: Box::new(right),
                },
                pos,
            };
        }
        Ok(left)
    }

    fn conj(&mut self) -> Result<Expr> {
        let mut left = self.unary()?;
        while self.peek() == &Tok::And {
            let pos = self.next().1;
            let right = self.unary()?;
            left = Expr {
                kind: ExprKind::And {
                    left: Box::new(left),
                    right: Box::new(right),
                },
                pos,
            };
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == &Tok::Not {
            let pos = self.next().1;
            let arg = self.unary()?;
            return Ok(Expr {
                kind: ExprKind::Not { arg: Box::new(arg) },
                pos,
            });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        let (t, pos) = self.next();
        let kind = match t {
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                return Ok(e);
            }
            Tok::True => ExprKind::Flip {
                p: BigRational::one(),
            },
            Tok::False => ExprKind::Flip {
                p: BigRational::from_integer(0.into()),
            },
            Tok::Flip => {
                self.expect(Tok::LParen)?;
                let p = self.probability()?;
                self.expect(Tok::RParen)?;
                ExprKind::Flip { p }
            }
            Tok::Ident(name) => {
                if self.peek() == &Tok::LParen {
                    self.next();
                    let mut args = Vec::new();
                    if self.peek() != &Tok::RParen {
                        loop {
                            args.push(self.expr()?);
                            if self.peek() != &Tok::Comma {
                                break;
                            }
                            self.next();
                        }
                    }
                    self.expect(Tok::RParen)?;
                    ExprKind::Call { name, args }
                } else {
                    ExprKind::Var { name }
                }
            }
            t => return Err(pos.error(format!("expected an expression, found {}", t.describe()))),
        };
        Ok(Expr { kind, pos })
    }

    /// `p/q`, a decimal, scientific notation, or `base^exp` with integer parts.
    fn probability(&mut self) -> Result<BigRational> {
        let (t, pos) = self.next();
        let Tok::Number(lit) = t else {
            return Err(pos.error(format!("expected a probability, found {}", t.describe())));
        };
        let mut value = parse_rational_literal(&lit)
            .ok_or_else(|| pos.error(format!("malformed number `{lit}`")))?;
        if self.peek() == &Tok::Caret {
            self.next();
            let negative = self.peek() == &Tok::Minus;
            if negative {
                self.next();
            }
            let (t, epos) = self.next();
            let exp = match t {
                Tok::Number(e) => e.parse::<u32>().ok(),
                _ => None,
            }
            .ok_or_else(|| epos.error("expected an integer exponent"))?;
            if !value.is_integer() {
                return Err(pos.error("the base of a power must be an integer"));
            }
            let base: BigInt = value.to_integer();
            let pow = num_traits::pow(base, exp as usize);
            value = if negative {
                if pow == BigInt::from(0) {
                    return Err(pos.error("zero to a negative power"));
                }
                BigRational::new(1.into(), pow)
            } else {
                BigRational::from_integer(pow)
            };
        }
        if value.is_negative() || value > BigRational::one() {
            return Err(pos.error(format!("flip probability {value} is outside [0, 1]")));
        }
        Ok(value)
    }
}

/// Outputs produced by each function, computed callee-first.
pub(crate) fn output_arities(ast: &ProgramAst) -> Result<HashMap<String, usize>> {
    let order = call_order(ast)?;
    let mut arity: HashMap<String, usize> = HashMap::new();
    for name in order {
        let f = ast.function(&name).expect("ordered names are defined");
        let n = match f.returns.as_slice() {
            [Expr {
                kind: ExprKind::Call { name, .. },
                ..
            }] => arity[name],
            rs => rs.len(),
        };
        arity.insert(name, n);
    }
    Ok(arity)
}

/// Function names ordered so that callees precede callers.
fn call_order(ast: &ProgramAst) -> Result<Vec<String>> {
    let mut calls: BTreeMap<&str, Vec<(&str, Pos)>> = BTreeMap::new();
    for f in &ast.functions {
        let mut out = Vec::new();
        for s in &f.body {
            match s {
                Stmt::Let { value, .. } | Stmt::Observe { value, .. } => {
                    collect_calls(value, &mut out)
                }
            }
        }
        for r in &f.returns {
            collect_calls(r, &mut out);
        }
        calls.insert(&f.name, out);
    }
    for f in &ast.functions {
        for &(c, pos) in &calls[f.name.as_str()] {
            if ast.function(c).is_none() {
                return Err(pos.error(format!("call to undefined function `{c}`")));
            }
        }
    }

    // 0 = new, 1 = in progress, 2 = finished
    let mut state: HashMap<&str, u8> = HashMap::new();
    let mut order = Vec::new();
    for f in &ast.functions {
        if state.get(f.name.as_str()).copied().unwrap_or(0) != 0 {
            continue;
        }
        let mut stack: Vec<(&str, usize)> = vec![(&f.name, 0)];
        state.insert(&f.name, 1);
        while let Some((v, i)) = stack.pop() {
            if let Some(&(c, pos)) = calls[v].get(i) {
                stack.push((v, i + 1));
                match state.get(c).copied().unwrap_or(0) {
                    0 => {
                        state.insert(c, 1);
                        stack.push((c, 0));
                    }
                    1 => {
                        return Err(
                            pos.error(format!("recursive call to `{c}` forms a call cycle"))
                        );
                    }
                    _ => {}
                }
            } else {
                state.insert(v, 2);
                order.push(v.to_string());
            }
        }
    }
    Ok(order)
}

fn collect_calls<'a>(e: &'a Expr, out: &mut Vec<(&'a str, Pos)>) {
    match &e.kind {
        ExprKind::Var { .. } | ExprKind::Flip { .. } => {}
        ExprKind::Not { arg } => collect_calls(arg, out),
        ExprKind::And { left, right } | ExprKind::Or { left, right } => {
            collect_calls(left, out);
            collect_calls(right, out);
        }
        ExprKind::Call { name, args } => {
            for a in args {
                collect_calls(a, out);
            }
            out.push((name, e.pos));
        }
    }
}

fn check(ast: &ProgramAst) -> Result<()> {
    let mut seen = HashSet::new();
    for f in &ast.functions {
        if RESERVED.contains(&f.name.as_str()) {
            return Err(f.pos.error(format!("`{}` is a reserved name", f.name)));
        }
        if !seen.insert(f.name.as_str()) {
            return Err(f
                .pos
                .error(format!("function `{}` is defined twice", f.name)));
        }
    }
    let arity = output_arities(ast)?;
    for f in &ast.functions {
        let mut scope: HashSet<&str> = HashSet::new();
        for p in &f.params {
            if !scope.insert(p) {
                return Err(f.pos.error(format!("parameter `{p}` is declared twice")));
            }
        }
        for s in &f.body {
            match s {
                Stmt::Let {
                    targets,
                    value,
                    pos,
                } => {
                    let n = values(value, &scope, ast, &arity)?;
                    if n != targets.len() {
                        return Err(pos.error(format!(
                            "binding {} name(s) to an expression with {n} value(s)",
                            targets.len()
                        )));
                    }
                    let mut distinct = HashSet::new();
                    for t in targets {
                        if !distinct.insert(t.as_str()) {
                            return Err(pos.error(format!("`{t}` is bound twice in one let")));
                        }
                    }
                    scope.extend(targets.iter().map(String::as_str));
                }
                Stmt::Observe { value, .. } => single(value, &scope, ast, &arity)?,
            }
        }
        if let [r] = f.returns.as_slice() {
            values(r, &scope, ast, &arity)?;
        } else {
            for r in &f.returns {
                single(r, &scope, ast, &arity)?;
            }
        }
    }
    Ok(())
}

/// Number of values an expression produces; only calls can produce other than one.
fn values(
    e: &Expr,
    scope: &HashSet<&str>,
    ast: &ProgramAst,
    arity: &HashMap<String, usize>,
) -> Result<usize> {
    match &e.kind {
        ExprKind::Var { name } => {
            if scope.contains(name.as_str()) {
                Ok(1)
            } else {
                Err(e.pos.error(format!("unbound variable `{name}`")))
            }
        }
        ExprKind::Flip { .. } => Ok(1),
        ExprKind::Not { arg } => single(arg, scope, ast, arity).map(|_| 1),
        ExprKind::And { left, right } | ExprKind::Or { left, right } => {
            single(left, scope, ast, arity)?;
            single(right, scope, ast, arity)?;
            Ok(1)
        }
        ExprKind::Call { name, args } => {
            let f = ast.function(name).expect("calls resolved");
            if f.params.len() != args.len() {
                return Err(e.pos.error(format!(
                    "`{name}` takes {} argument(s), given {}",
                    f.params.len(),
                    args.len()
                )));
            }
            for a in args {
                single(a, scope, ast, arity)?;
            }
            Ok(arity[name])
        }
    }
}

fn single(
    e: &Expr,
    scope: &HashSet<&str>,
    ast: &ProgramAst,
    arity: &HashMap<String, usize>,
) -> Result<()> {
    match values(e, scope, ast, arity)? {
        1 => Ok(()),
        n => Err(e
            .pos
            .error(format!("expected a single value, this produces {n}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn err_msg(src: &str) -> String {
        match parse(src).unwrap_err() {
            Error::Parse { message, .. } => message,
            e => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn minimal_function() {
        let ast = parse("f() := let x = flip(0.5); x").unwrap();
        assert_eq!(ast.functions.len(), 1);
        assert_eq!(ast.functions[0].body.len(), 1);
    }

    #[test]
    fn precedence_not_and_or() {
        let ast = parse("f(a, b, c) := ¬a ∧ b ∨ c").unwrap();
        let ExprKind::Or { left, .. } = &ast.functions[0].returns[0].kind else {
            panic!("or at top");
        };
        let ExprKind::And { left, .. } = &left.kind else {
            panic!("and below or");
        };
        assert!(matches!(left.kind, ExprKind::Not { .. }));
    }

    #[test]
    fn power_literal() {
        let ast = parse("f() := flip(10^-4)").unwrap();
        let ExprKind::Flip { p } = &ast.functions[0].returns[0].kind else {
            panic!()
        };
        assert_eq!(*p, BigRational::new(1.into(), 10000.into()));
    }

    #[test]
    fn undefined_function() {
        assert!(err_msg("f() := let x = g(); x").contains("undefined function `g`"));
    }

    #[test]
    fn recursion_rejected() {
        let msg = err_msg("f() := g()\ng() := let x = f(); x");
        assert!(msg.contains("cycle"), "{msg}");
    }

    #[test]
    fn out_of_range_flip() {
        assert!(err_msg("f() := flip(1.5)").contains("outside [0, 1]"));
        assert!(err_msg("f() := flip(3/2)").contains("outside [0, 1]"));
    }

    #[test]
    fn arity_mismatch() {
        let src = "g(a) := a, a\nf() := let x = g(flip(0.5)); x";
        assert!(err_msg(src).contains("binding 1 name(s)"));
        assert!(err_msg("g(a) := a\nf() := g()").contains("takes 1 argument"));
    }

    #[test]
    fn multi_target_let() {
        let src = "g(a) := a, ¬a\nf() := let x, y = g(flip(0.5)); x ∧ y";
        assert!(parse(src).is_ok());
    }

    #[test]
    fn unbound_variable_position() {
        match parse("f() :=\n  let x = y;\n  x").unwrap_err() {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (2, 11)),
            e => panic!("{e}"),
        }
    }
}
