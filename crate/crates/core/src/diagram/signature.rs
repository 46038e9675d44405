use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// A sort name. Cheap to clone and compare.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sort(Arc<str>);

impl Sort {
    pub fn new(name: &str) -> Self {
        Sort(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A function symbol name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<&str> for Sort {
    fn from(s: &str) -> Self {
        Sort::new(s)
    }
}

/// Domain and codomain of a function symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolType {
    pub dom: Vec<Sort>,
    pub cod: Vec<Sort>,
}

impl SymbolType {
    pub fn new(dom: Vec<Sort>, cod: Vec<Sort>) -> Self {
        SymbolType { dom, cod }
    }
}

/// `A B -> C`, with `I` for an empty list.
impl fmt::Display for SymbolType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |xs: &[Sort]| {
            if xs.is_empty() {
                "I".to_string()
            } else {
                xs.iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            }
        };
        write!(f, "{} -> {}", list(&self.dom), list(&self.cod))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoidalSignature {
    pub sorts: BTreeSet<Sort>,
    pub symbols: BTreeMap<Symbol, SymbolType>,
}

impl MonoidalSignature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sort(&mut self, sort: Sort) -> &mut Self {
        self.sorts.insert(sort);
        self
    }

    pub fn add_symbol(&mut self, symbol: Symbol, dom: Vec<Sort>, cod: Vec<Sort>) -> &mut Self {
        self.symbols.insert(symbol, SymbolType::new(dom, cod));
        self
    }

    pub fn get(&self, symbol: &Symbol) -> Option<&SymbolType> {
        self.symbols.get(symbol)
    }

    pub fn contains(&self, symbol: &Symbol) -> bool {
        self.symbols.contains_key(symbol)
    }

    /// Sorts referenced by symbols but missing from the sort set.
    pub fn undeclared_sorts(&self) -> Vec<(Symbol, Sort)> {
        let mut out = Vec::new();
        for (sym, ty) in &self.symbols {
            for s in ty.dom.iter().chain(&ty.cod) {
                if !self.sorts.contains(s) {
                    out.push((sym.clone(), s.clone()));
                }
            }
        }
        out
    }
}
