//! Exact Fourier-Motzkin elimination over rate variables whose bounds are
//! rational combinations of information atoms.

mod eliminate;
mod polytope;
mod text;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::Atom;
use crate::prob::Var;

pub use eliminate::{
    chain_rule_identities, derive_region_system, eliminate, eliminate_all, expansion_identities, remove_redundant,
    simplify_with_identities,
    Identity,
};
pub use polytope::{instantiate, polytope_equal, NumericPolytope};

pub type Q = Rational64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RateVar {
    Rc,
    R1,
    R0,
    Rhat,
}

impl RateVar {
    pub const ALL: [RateVar; 4] = [RateVar::Rc, RateVar::R1, RateVar::R0, RateVar::Rhat];

    pub fn name(self) -> &'static str {
        match self {
            RateVar::Rc => "Rc",
            RateVar::R1 => "R1",
            RateVar::R0 => "R0",
            RateVar::Rhat => "Rhat",
        }
    }
}

impl fmt::Display for RateVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RateVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RateVar::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown rate variable `{s}`")))
    }
}

/// `sum_k q_k * atom_k + constant`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr {
    pub atoms: BTreeMap<Atom, Q>,
    pub constant: Q,
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::default()
    }

    pub fn atom(a: Atom) -> Expr {
        Expr::zero().plus(a, Q::one())
    }

    pub fn plus(mut self, a: Atom, q: Q) -> Expr {
        self.add_atom(a, q);
        self
    }

    pub fn add_atom(&mut self, a: Atom, q: Q) {
        let e = self.atoms.entry(a).or_insert_with(Q::zero);
        *e += q;
        if e.is_zero() {
            self.atoms.remove(&a);
        }
    }

    pub fn scaled(&self, k: Q) -> Expr {
        let mut out = Expr { atoms: BTreeMap::new(), constant: self.constant * k };
        for (a, q) in &self.atoms {
            out.add_atom(*a, *q * k);
        }
        out
    }

    pub fn add(&self, other: &Expr) -> Expr {
        let mut out = self.clone();
        out.constant += other.constant;
        for (a, q) in &other.atoms {
            out.add_atom(*a, *q);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.constant.is_zero()
    }

    /// Nonnegative for every distribution: all coefficients are `>= 0` and
    /// every atom is an entropy or mutual information.
    pub fn is_nonnegative(&self) -> bool {
        !self.constant.is_negative() && self.atoms.values().all(|q| !q.is_negative())
    }

    pub fn evaluate(&self, values: &BTreeMap<Atom, f64>) -> Result<f64> {
        let mut total = to_f64(self.constant);
        for (a, q) in &self.atoms {
            let v = values.get(a).ok_or_else(|| Error::Usage(format!("no value for atom {a}")))?;
            total += to_f64(*q) * v;
        }
        Ok(total)
    }
}

pub(crate) fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// `sum_v coeffs[v] * v (<= | <) rhs`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearInequality {
    pub coeffs: BTreeMap<RateVar, Q>,
    pub rhs: Expr,
    pub strict: bool,
}

impl LinearInequality {
    pub fn new(coeffs: &[(RateVar, i64)], rhs: Expr, strict: bool) -> LinearInequality {
        let mut out = LinearInequality { coeffs: BTreeMap::new(), rhs, strict };
        for &(v, c) in coeffs {
            out.add_coeff(v, Q::from_integer(c));
        }
        out
    }

    /// `-v <= 0`.
    pub fn nonnegative(v: RateVar) -> LinearInequality {
        LinearInequality::new(&[(v, -1)], Expr::zero(), false)
    }

    pub(crate) fn add_coeff(&mut self, v: RateVar, q: Q) {
        let e = self.coeffs.entry(v).or_insert_with(Q::zero);
        *e += q;
        if e.is_zero() {
            self.coeffs.remove(&v);
        }
    }

    pub fn coeff(&self, v: RateVar) -> Q {
        self.coeffs.get(&v).copied().unwrap_or_else(Q::zero)
    }

    pub fn scaled(&self, k: Q) -> LinearInequality {
        LinearInequality {
            coeffs: self.coeffs.iter().map(|(v, q)| (*v, *q * k)).collect(),
            rhs: self.rhs.scaled(k),
            strict: self.strict,
        }
    }

    /// Divides by the magnitude of the first nonzero coefficient.
    pub fn normalized(&self) -> LinearInequality {
        match self.coeffs.values().next() {
            Some(q) => self.scaled(q.abs().recip()),
            None => self.clone(),
        }
    }

    /// Same constraint, strictness ignored.
    pub fn same_as(&self, other: &LinearInequality) -> bool {
        let (a, b) = (self.normalized(), other.normalized());
        a.coeffs == b.coeffs && a.rhs == b.rhs
    }
}

/// A conjunction of inequalities, plus conditions that no longer involve any
/// rate (they restrict the distribution, not the rates).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InequalitySystem {
    pub rows: Vec<LinearInequality>,
    pub side_conditions: Vec<LinearInequality>,
}

impl InequalitySystem {
    pub fn new(rows: Vec<LinearInequality>) -> InequalitySystem {
        let mut s = InequalitySystem::default();
        for r in rows {
            s.push(r);
        }
        s
    }

    pub fn push(&mut self, row: LinearInequality) {
        if row.coeffs.is_empty() {
            self.side_conditions.push(row);
        } else {
            self.rows.push(row);
        }
    }

    pub fn variables(&self) -> Vec<RateVar> {
        let mut vs: Vec<RateVar> = self.rows.iter().flat_map(|r| r.coeffs.keys().copied()).collect();
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut out: Vec<Atom> = self.rows.iter().flat_map(|r| r.rhs.atoms.keys().copied()).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Equal as sets of constraints, strictness ignored.
    pub fn equivalent(&self, other: &InequalitySystem) -> bool {
        self.rows.iter().all(|r| other.rows.iter().any(|o| o.same_as(r)))
            && other.rows.iter().all(|r| self.rows.iter().any(|o| o.same_as(r)))
    }
}

fn mi(a: &[Var], b: &[Var], c: &[Var]) -> Atom {
    Atom::mi(a, b, c)
}

/// The five rate constraints of the block-Markov scheme, over
/// `(R_c, R_1, R_0, R_hat)`, with nonnegativity of all four rates.
pub fn scheme_constraint_system() -> InequalitySystem {
    use RateVar::*;
    use Var::*;
    let gp = mi(&[U], &[S], &[V, X2]);
    let one = Q::one();
    InequalitySystem::new(vec![
        LinearInequality::new(&[(Rhat, -1)], Expr::zero().plus(mi(&[V], &[S], &[X2]), -one), true),
        LinearInequality::new(&[(R0, 1)], Expr::atom(mi(&[X2], &[Y], &[])), true),
        LinearInequality::new(&[(Rhat, 1), (Rc, 1), (R1, 1)], Expr::atom(mi(&[U, V, X2], &[Y], &[])).plus(gp, -one), false),
        LinearInequality::new(&[(R1, 1)], Expr::atom(mi(&[U], &[Y], &[V, X2])).plus(gp, -one), false),
        LinearInequality::new(&[(Rhat, 1), (R0, -1), (R1, 1)], Expr::atom(mi(&[U, V], &[Y], &[X2])).plus(gp, -one), false),
        LinearInequality::nonnegative(Rc),
        LinearInequality::nonnegative(R1),
        LinearInequality::nonnegative(R0),
        LinearInequality::nonnegative(Rhat),
    ])
}

/// The two-constraint region over `(R_c, R_1)`.
pub fn region_bound_system() -> InequalitySystem {
    use RateVar::*;
    use Var::*;
    let one = Q::one();
    InequalitySystem::new(vec![
        LinearInequality::new(&[(R1, 1)], Expr::atom(mi(&[U], &[Y], &[V, X2])).plus(mi(&[U], &[S], &[V, X2]), -one), false),
        LinearInequality::new(
            &[(Rc, 1), (R1, 1)],
            Expr::atom(mi(&[U, V, X2], &[Y], &[])).plus(mi(&[U, V, X2], &[S], &[]), -one),
            false,
        ),
        LinearInequality::nonnegative(Rc),
        LinearInequality::nonnegative(R1),
    ])
}
