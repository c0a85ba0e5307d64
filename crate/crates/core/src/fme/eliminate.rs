use std::fmt;

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::info::Atom;
use crate::prob::Var;

use super::{scheme_constraint_system, Expr, InequalitySystem, LinearInequality, RateVar, Q};

const MAX_REWRITE_PASSES: usize = 64;

/// `lhs = rhs`, used left to right as a rewrite rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Identity {
    pub lhs: Atom,
    pub rhs: Expr,
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, super::text::format_expr(&self.rhs))
    }
}

/// Rewrites that fold the eliminated system back into the two-bound form:
/// two chain-rule splits and the independence of `X2` and `S`.
pub fn chain_rule_identities() -> Vec<Identity> {
    use Var::*;
    let one = Q::one();
    vec![
        Identity {
            lhs: Atom::mi(&[U, V], &[Y], &[X2]),
            rhs: Expr::atom(Atom::mi(&[U, V, X2], &[Y], &[])).plus(Atom::mi(&[X2], &[Y], &[]), -one),
        },
        Identity {
            lhs: Atom::mi(&[V], &[S], &[X2]),
            rhs: Expr::atom(Atom::mi(&[U, V, X2], &[S], &[]))
                .plus(Atom::mi(&[X2], &[S], &[]), -one)
                .plus(Atom::mi(&[U], &[S], &[V, X2]), -one),
        },
        Identity { lhs: Atom::mi(&[X2], &[S], &[]), rhs: Expr::zero() },
    ]
}

/// Chain-rule expansions used only to decide whether one bound dominates
/// another.
pub fn expansion_identities() -> Vec<Identity> {
    use Var::*;
    let one = Q::one();
    vec![
        Identity {
            lhs: Atom::mi(&[U, V, X2], &[S], &[]),
            rhs: Expr::atom(Atom::mi(&[X2], &[S], &[]))
                .plus(Atom::mi(&[V], &[S], &[X2]), one)
                .plus(Atom::mi(&[U], &[S], &[V, X2]), one),
        },
        Identity {
            lhs: Atom::mi(&[U, V, X2], &[Y], &[]),
            rhs: Expr::atom(Atom::mi(&[V, X2], &[Y], &[])).plus(Atom::mi(&[U], &[Y], &[V, X2]), one),
        },
        Identity { lhs: Atom::mi(&[X2], &[S], &[]), rhs: Expr::zero() },
    ]
}

fn combine(upper: &LinearInequality, lower: &LinearInequality, var: RateVar) -> LinearInequality {
    let a = upper.coeff(var);
    let b = -lower.coeff(var);
    let mut out = upper.scaled(a.recip());
    let low = lower.scaled(b.recip());
    for (v, q) in &low.coeffs {
        out.add_coeff(*v, *q);
    }
    out.coeffs.remove(&var);
    out.rhs = out.rhs.add(&low.rhs);
    out.strict = upper.strict || lower.strict;
    out.normalized()
}

fn push_unique(system: &mut InequalitySystem, row: LinearInequality) {
    let list = if row.coeffs.is_empty() { &system.side_conditions } else { &system.rows };
    if !list.iter().any(|r| r.same_as(&row)) {
        system.push(row);
    }
}

/// One Fourier-Motzkin step: removes `var` by pairing every upper bound with
/// every lower bound.
pub fn eliminate(system: &InequalitySystem, var: RateVar) -> InequalitySystem {
    let mut out = InequalitySystem { rows: Vec::new(), side_conditions: system.side_conditions.clone() };
    let (mut upper, mut lower) = (Vec::new(), Vec::new());
    for row in &system.rows {
        let c = row.coeff(var);
        if c.is_positive() {
            upper.push(row);
        } else if c.is_negative() {
            lower.push(row);
        } else {
            push_unique(&mut out, row.normalized());
        }
    }
    for u in &upper {
        for l in &lower {
            push_unique(&mut out, combine(u, l, var));
        }
    }
    out
}

pub fn eliminate_all(system: &InequalitySystem, vars: &[RateVar]) -> InequalitySystem {
    vars.iter().fold(system.clone(), |s, v| eliminate(&s, *v))
}

fn rewrite_expr(expr: &Expr, identities: &[Identity]) -> Result<Expr> {
    let mut cur = expr.clone();
    for _ in 0..MAX_REWRITE_PASSES {
        let hit = cur.atoms.iter().find_map(|(a, q)| identities.iter().find(|id| id.lhs == *a).map(|id| (*a, *q, id)));
        let Some((atom, q, id)) = hit else {
            return Ok(cur);
        };
        cur.atoms.remove(&atom);
        cur = cur.add(&id.rhs.scaled(q));
    }
    Err(Error::Consistency("identity rewriting did not terminate".into()))
}

/// Applies the rewrite rules to every right-hand side until none matches.
pub fn simplify_with_identities(system: &InequalitySystem, identities: &[Identity]) -> Result<InequalitySystem> {
    let mut out = InequalitySystem::default();
    for row in system.rows.iter().chain(&system.side_conditions) {
        let mut r = row.clone();
        r.rhs = rewrite_expr(&row.rhs, identities)?;
        push_unique(&mut out, r);
    }
    Ok(out)
}

/// `b` implies `a` for nonnegative rates: `a`'s coefficients are all at most
/// `b`'s and `a`'s bound exceeds `b`'s by a provably nonnegative amount.
fn implied_by(a: &LinearInequality, b: &LinearInequality, expansions: &[Identity]) -> Result<bool> {
    if RateVar::ALL.iter().any(|v| a.coeff(*v) > b.coeff(*v)) {
        return Ok(false);
    }
    let diff = a.rhs.add(&b.rhs.scaled(-Q::one()));
    Ok(diff.is_nonnegative() || rewrite_expr(&diff, expansions)?.is_nonnegative())
}

/// Drops duplicate rows and rows implied by another single row.
pub fn remove_redundant(system: &InequalitySystem, expansions: &[Identity]) -> Result<InequalitySystem> {
    let rows: Vec<LinearInequality> = system.rows.iter().map(LinearInequality::normalized).collect();
    let mut keep = vec![true; rows.len()];
    for i in 0..rows.len() {
        for j in 0..rows.len() {
            if i == j || !keep[j] {
                continue;
            }
            if implied_by(&rows[i], &rows[j], expansions)? {
                // mutual implication: keep the earlier row
                if j > i && implied_by(&rows[j], &rows[i], expansions)? {
                    continue;
                }
                keep[i] = false;
                break;
            }
        }
    }
    let mut out = InequalitySystem::default();
    for (r, k) in rows.into_iter().zip(keep) {
        if k {
            push_unique(&mut out, r);
        }
    }
    for c in &system.side_conditions {
        let c = c.clone();
        if !c.rhs.is_zero() || c.strict {
            push_unique(&mut out, c);
        }
    }
    Ok(out)
}

/// Eliminates the auxiliary rates from the block-Markov constraints and
/// reduces the result; it should equal [`super::region_bound_system`].
pub fn derive_region_system() -> Result<InequalitySystem> {
    let projected = eliminate_all(&scheme_constraint_system(), &[RateVar::R0, RateVar::Rhat]);
    let simplified = simplify_with_identities(&projected, &chain_rule_identities())?;
    remove_redundant(&simplified, &expansion_identities())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fme::region_bound_system;

    #[test]
    fn eliminating_from_a_box() {
        // 0 <= x <= 1, 0 <= y <= x  ->  0 <= x <= 1
        let one = Expr { constant: Q::one(), ..Expr::zero() };
        let s = InequalitySystem::new(vec![
            LinearInequality::new(&[(RateVar::Rc, 1)], one, false),
            LinearInequality::nonnegative(RateVar::Rc),
            LinearInequality::new(&[(RateVar::R1, 1), (RateVar::Rc, -1)], Expr::zero(), false),
            LinearInequality::nonnegative(RateVar::R1),
        ]);
        let e = eliminate(&s, RateVar::R1);
        assert_eq!(e.variables(), vec![RateVar::Rc]);
        assert_eq!(e.rows.len(), 2);
    }

    #[test]
    fn auxiliary_rates_disappear() {
        let e = eliminate_all(&scheme_constraint_system(), &[RateVar::R0, RateVar::Rhat]);
        assert_eq!(e.variables(), vec![RateVar::Rc, RateVar::R1]);
        assert!(!e.side_conditions.is_empty());
    }

    #[test]
    fn derivation_reaches_the_two_bound_form() {
        let d = derive_region_system().unwrap();
        assert!(d.equivalent(&region_bound_system()), "{}", d);
    }

    #[test]
    fn cyclic_identities_are_reported() {
        let a = Atom::mi(&[Var::U], &[Var::Y], &[]);
        let b = Atom::mi(&[Var::V], &[Var::Y], &[]);
        let ids = vec![Identity { lhs: a, rhs: Expr::atom(b) }, Identity { lhs: b, rhs: Expr::atom(a) }];
        let s = InequalitySystem::new(vec![LinearInequality::new(&[(RateVar::R1, 1)], Expr::atom(a), false)]);
        assert!(matches!(simplify_with_identities(&s, &ids), Err(Error::Consistency(_))));
    }
}
