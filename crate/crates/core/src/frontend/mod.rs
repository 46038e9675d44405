//! Parsing and desugaring of Boolean discrete probabilistic programs.
//!
//! ```text
//! program := fndef+
//! fndef   := IDENT "(" params? ")" ":=" stmt* retlist
//! stmt    := "let" IDENT {"," IDENT} "=" expr ";" | "observe" "(" expr ")" ";"
//! expr    := expr ("∧" | "&&") expr | expr ("∨" | "||") expr | ("¬" | "!") expr
//!          | "flip" "(" RATIONAL ")" | IDENT "(" args? ")" | IDENT | "(" expr ")"
//!          | "true" | "false"
//! ```
//!
//! `¬` binds tighter than `∧`, which binds tighter than `∨`. Rationals may be
//! written `p/q`, `0.25`, `1e-4` or `10^-4`. Line comments start with `//` or `#`.

mod ast;
mod desugar;
mod lexer;
mod parser;
mod printer;

pub use ast::{Expr, ExprKind, FunctionDef, ProgramAst, Stmt};
pub use desugar::{
    bool_signature, bool_sort, compile_source, desugar, flip_symbol, rational_literal, BOOL_SORT,
};
pub use lexer::Pos;
pub use parser::parse;
pub use printer::pretty_program;
