use num_rational::BigRational;
use serde::{Serialize, Serializer};

use super::lexer::Pos;

/// A parsed program: an ordered list of function definitions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProgramAst {
    pub functions: Vec<FunctionDef>,
}

impl ProgramAst {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionDef {
    pub name: String,
    pub pos: Pos,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    pub returns: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "stmt", rename_all = "lowercase")]
pub enum Stmt {
    Let {
        targets: Vec<String>,
        value: Expr,
        pos: Pos,
    },
    Observe {
        value: Expr,
        pos: Pos,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expr {
    #[serde(flatten)]
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "expr", rename_all = "lowercase")]
pub enum ExprKind {
    Var {
        name: String,
    },
    And {
        left: Box<Expr>,
        right: Box<Expr>,
    },
    Or {
        left: Box<Expr>,
        right: Box<Expr>,
    },
    Not {
        arg: Box<Expr>,
    },
    Flip {
        #[serde(serialize_with = "rational_string")]
        p: BigRational,
    },
    Call {
        name: String,
        args: Vec<Expr>,
    },
}

fn rational_string<S: Serializer>(p: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}
