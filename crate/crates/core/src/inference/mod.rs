//! Probabilistic inference for Boolean programs.
//!
//! A closed program denotes a column `(q, p)`: `p` is the mass of runs that
//! return true, `q` of those that return false, and runs rejected by an
//! `observe` are missing from both. The output probability is `p / (p + q)`.
//!
//! [`infer`] compiles the program to an arithmetic circuit once and either
//! evaluates it exactly or, in fixed-point arithmetic, at increasing precision
//! until the acceptance probability is certified positive.

mod dyadic;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

pub use dyadic::DyadicRational;

use crate::algebraise::{algebrise_hierarchical, AlgebraiseOptions};
use crate::diagram::HierarchicalDotDiagram;
use crate::error::{Error, Result};
use crate::frontend::BOOL_SORT;
use crate::semiring::{
    interpret_term, substochastic, ArithmeticCircuit, CircuitNode, EvalOptions, Matrix, NodeRef,
    Rational,
};
use crate::term::TermStore;

/// Exact masses of the two outcomes of a closed Boolean program.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeMasses {
    /// Mass of accepted runs returning true.
    pub p: BigRational,
    /// Mass of accepted runs returning false.
    pub q: BigRational,
}

impl OutcomeMasses {
    pub fn acceptance(&self) -> BigRational {
        &self.p + &self.q
    }

    /// `p / (p + q)`, or zero when no run is accepted.
    pub fn output_probability(&self) -> BigRational {
        let acc = self.acceptance();
        if acc.is_zero() {
            BigRational::zero()
        } else {
            &self.p / acc
        }
    }
}

fn check_closed_boolean(h: &HierarchicalDotDiagram) -> Result<()> {
    let body = &h.root_node().body;
    let outs = body.output_sorts();
    if !body.inputs().is_empty() || outs.len() != 1 || outs[0].name() != BOOL_SORT {
        return Err(Error::Precondition(format!(
            "inference needs a function with no parameters returning one Boolean; `{}` has type {}",
            h.root_node().name,
            body.interface_type()
        )));
    }
    Ok(())
}

fn masses_of(m: &Matrix<Rational>) -> OutcomeMasses {
    OutcomeMasses {
        p: m.get(1, 0).clone(),
        q: m.get(0, 0).clone(),
    }
}

/// Exact `(p, q)` by algebraising `h` and evaluating the term over the rationals.
pub fn exact_inference(h: &HierarchicalDotDiagram) -> Result<OutcomeMasses> {
    exact_inference_with(h, AlgebraiseOptions::default(), &EvalOptions::default())
}

pub fn exact_inference_with(
    h: &HierarchicalDotDiagram,
    algebraise: AlgebraiseOptions,
    eval: &EvalOptions,
) -> Result<OutcomeMasses> {
    check_closed_boolean(h)?;
    let mut store = TermStore::new();
    let t = algebrise_hierarchical(&mut store, h, algebraise)?;
    let interp = substochastic(&h.base)?;
    Ok(masses_of(&interpret_term(&store, t, &interp, eval)?))
}

/// Evaluates `c` in fixed point with `bits` fractional binary digits,
/// truncating every constant and every product toward zero. Sums are exact.
///
/// Returns the value of each root node. With `bits = 2·|V(C)| + b` every root
/// is within `2^-b` of its exact value, provided all exact intermediate values
/// lie in `[0, 1]`. Constants outside `[0, 1]`, or a truncated intermediate
/// above 1, are rejected.
pub fn truncated_eval(
    c: &ArithmeticCircuit<Rational>,
    bits: u32,
) -> Result<BTreeMap<NodeRef, DyadicRational>> {
    let one = BigInt::one() << bits as usize;
    let (zero_q, one_q) = (BigRational::zero(), BigRational::one());
    let live = c.pruned();
    let mut val: Vec<BigInt> = Vec::with_capacity(live.nodes().len());
    for (i, n) in live.nodes().iter().enumerate() {
        let v = match n {
            CircuitNode::Const(x) => {
                if x < &zero_q || x > &one_q {
                    return Err(Error::Precondition(format!(
                        "circuit constant {x} lies outside [0, 1]"
                    )));
                }
                (x.numer() << bits as usize) / x.denom()
            }
            CircuitNode::Add(a, b) => &val[*a] + &val[*b],
            CircuitNode::Mul(a, b) => (&val[*a] * &val[*b]) >> bits as usize,
        };
        if v > one {
            return Err(Error::Precondition(format!(
                "circuit node {i} evaluates above 1"
            )));
        }
        debug_assert!(!v.is_negative());
        val.push(v);
    }
    Ok(c.roots()
        .iter()
        .zip(live.roots())
        .map(|(&orig, &r)| (orig, dyadic::from_fixed(val[r].clone(), bits)))
        .collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InferenceMethod {
    /// Exact evaluation when the circuit is small enough, truncated otherwise.
    #[default]
    Auto,
    Exact,
    Truncated,
}

#[derive(Clone, Copy, Debug)]
pub struct InferOptions {
    pub method: InferenceMethod,
    /// Largest `b` tried while looking for a positive acceptance bound.
    pub precision_cap: u32,
    /// Circuits with at most this many nodes are evaluated exactly in `Auto`.
    pub exact_threshold: usize,
    pub algebraise: AlgebraiseOptions,
    pub eval: EvalOptions,
}

pub const DEFAULT_PRECISION_CAP: u32 = 4096;
pub const DEFAULT_EXACT_THRESHOLD: usize = 100_000;

impl Default for InferOptions {
    fn default() -> Self {
        InferOptions {
            method: InferenceMethod::Auto,
            precision_cap: DEFAULT_PRECISION_CAP,
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            algebraise: AlgebraiseOptions::default(),
            eval: EvalOptions::default(),
        }
    }
}

/// The answer to "what is the probability of true, to `d` binary digits".
#[derive(Clone, Debug, Serialize)]
pub struct InferenceResult {
    /// `d`, the requested number of fractional binary digits.
    pub digits: u32,
    pub p_f_approx: DyadicRational,
    /// Guaranteed bound on `|p_f_approx - p_f|`, namely `2^-(d+1)`.
    pub error_bound: DyadicRational,
    /// A certified lower bound on `p + q` (zero when the program never accepts).
    pub p_acc_lower_bound: DyadicRational,
    /// The precision `b` of the final evaluation.
    pub digits_used: u32,
    /// Nodes of the compiled circuit.
    pub circuit_size: usize,
    /// Which evaluation produced the answer (`exact` or `truncated`).
    pub method: InferenceMethod,
}

/// Output probability of `h` within `2^-(d+1)`.
pub fn infer(h: &HierarchicalDotDiagram, d: u32, opts: &InferOptions) -> Result<InferenceResult> {
    if d == 0 {
        return Err(Error::Precondition("at least one digit is required".into()));
    }
    check_closed_boolean(h)?;
    let mut store = TermStore::new();
    let t = algebrise_hierarchical(&mut store, h, opts.algebraise)?;
    let interp = substochastic(&h.base)?;
    let circuit = ArithmeticCircuit::compile(&store, t, &interp, &opts.eval)?.pruned();
    let exact = match opts.method {
        InferenceMethod::Exact => true,
        InferenceMethod::Truncated => false,
        InferenceMethod::Auto => circuit.size() <= opts.exact_threshold,
    };
    if exact {
        infer_exact(&circuit, d)
    } else {
        infer_truncated(&circuit, d, opts.precision_cap)
    }
}

/// Fractional bits kept in the final quotient; its truncation costs `2^-(d+3)`.
fn quotient_bits(d: u32) -> u32 {
    d + 3
}

fn infer_exact(c: &ArithmeticCircuit<Rational>, d: u32) -> Result<InferenceResult> {
    let m = masses_of(&c.eval());
    let acc = m.acceptance();
    let (lower, b) = if acc.is_zero() {
        (DyadicRational::zero(), 0)
    } else {
        // enough bits that the truncated bound stays positive
        let est = DyadicRational::truncate(&acc, 64 + acc.denom().bits() as u32);
        let b = d + 2 + est.ceil_log2_recip().unwrap_or(0).max(0) as u32;
        (DyadicRational::truncate(&acc, b), b)
    };
    Ok(InferenceResult {
        digits: d,
        p_f_approx: DyadicRational::truncate(&m.output_probability(), quotient_bits(d)),
        error_bound: DyadicRational::pow2(-(d as i64 + 1)),
        p_acc_lower_bound: lower,
        digits_used: b,
        circuit_size: c.size(),
        method: InferenceMethod::Exact,
    })
}

/// Truncated `(p, q)` with `|error| ≤ 2^-(b+1)` on each.
fn truncated_masses(
    c: &ArithmeticCircuit<Rational>,
    b: u32,
) -> Result<(DyadicRational, DyadicRational)> {
    let size = u32::try_from(c.size())
        .ok()
        .and_then(|n| n.checked_mul(2))
        .and_then(|n| n.checked_add(b + 1))
        .ok_or_else(|| {
            Error::ResourceLimit("circuit too large for fixed-point evaluation".into())
        })?;
    let vals = truncated_eval(c, size)?;
    Ok((
        vals[&c.root_of(1, 0)].clone(),
        vals[&c.root_of(0, 0)].clone(),
    ))
}

fn infer_truncated(c: &ArithmeticCircuit<Rational>, d: u32, cap: u32) -> Result<InferenceResult> {
    if c.shape() != (2, 1) {
        return Err(Error::Precondition(
            "circuit is not a Boolean column".into(),
        ));
    }
    // Each root is within 2^-(b+1), so p + q is within 2^-b.
    let mut b = d + 2;
    let lower = loop {
        let (p, q) = truncated_masses(c, b)?;
        let s = &p + &q;
        let eps = DyadicRational::pow2(-(b as i64));
        if s > eps {
            break &s - &eps;
        }
        if b >= cap {
            return Err(Error::UnresolvedAcceptance {
                upper_bound: format!("{:e}", (&s + &eps).to_f64()),
            });
        }
        b = (b + 8).min(cap);
    };
    let mut b = b.max(d + 2 + lower.ceil_log2_recip().unwrap_or(0).max(0) as u32);
    loop {
        let (p, q) = truncated_masses(c, b)?;
        let s = &p + &q;
        // |p/s - p̃/s̃| ≤ 2^-b / s̃; require this to be at most 2^-(d+2)
        if s.is_zero() {
            b += 1;
            continue;
        }
        let slack = &s * &DyadicRational::pow2(b as i64 - d as i64 - 2);
        if slack >= DyadicRational::one() {
            let ratio = p.to_rational() / s.to_rational();
            return Ok(InferenceResult {
                digits: d,
                p_f_approx: DyadicRational::truncate(&ratio, quotient_bits(d)),
                error_bound: DyadicRational::pow2(-(d as i64 + 1)),
                p_acc_lower_bound: lower,
                digits_used: b,
                circuit_size: c.size(),
                method: InferenceMethod::Truncated,
            });
        }
        b += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile_source;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn single_flip() {
        let h = compile_source("f() := flip(0.3)", None).unwrap();
        let m = exact_inference(&h).unwrap();
        assert_eq!((m.p.clone(), m.q.clone()), (q(3, 10), q(7, 10)));
        assert_eq!(m.output_probability(), q(3, 10));
    }

    #[test]
    fn observed_flip() {
        let h = compile_source("f() := let x = flip(0.5); observe(x); x", None).unwrap();
        let m = exact_inference(&h).unwrap();
        assert_eq!((m.p.clone(), m.q.clone()), (q(1, 2), q(0, 1)));
        assert_eq!(m.output_probability(), q(1, 1));
    }

    #[test]
    fn rejects_open_functions() {
        let h = compile_source("g(x) := x", None).unwrap();
        assert!(matches!(exact_inference(&h), Err(Error::Precondition(_))));
    }

    #[test]
    fn constant_circuit_is_unchanged() {
        let c = ArithmeticCircuit::from_parts(
            vec![CircuitNode::Const(q(3, 8)), CircuitNode::Const(q(1, 1))],
            vec![0, 1],
            2,
            1,
        )
        .unwrap();
        let v = truncated_eval(&c, 10).unwrap();
        assert_eq!(v[&0].to_rational(), q(3, 8));
        assert_eq!(v[&1].to_rational(), q(1, 1));
    }

    #[test]
    fn constant_above_one_is_rejected() {
        let c = ArithmeticCircuit::from_parts(vec![CircuitNode::Const(q(3, 2))], vec![0], 1, 1)
            .unwrap();
        assert!(matches!(truncated_eval(&c, 8), Err(Error::Precondition(_))));
    }

    #[test]
    fn contradiction_is_zero_exactly_and_unresolved_truncated() {
        let h =
            compile_source("f() := let x = flip(0.5); observe(x); observe(!x); x", None).unwrap();
        let r = infer(&h, 8, &InferOptions::default()).unwrap();
        assert!(r.p_f_approx.is_zero());
        assert!(r.p_acc_lower_bound.is_zero());
        let opts = InferOptions {
            method: InferenceMethod::Truncated,
            precision_cap: 64,
            ..InferOptions::default()
        };
        assert!(matches!(
            infer(&h, 8, &opts),
            Err(Error::UnresolvedAcceptance { .. })
        ));
    }
}
