//! Entropy and conditional mutual information over a [`JointDistribution`],
//! plus the `I(A;B|C)` / `H(A|B)` atom grammar shared with the FME module.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{marginalize, JointDistribution, Var, VarSet};

/// Negative information values down to this are float noise and clamp to 0.
pub const NEGATIVE_CLAMP_TOL: f64 = 1e-12;

/// A group of variables appearing as one argument of an information quantity.
pub type VariableGroup = VarSet;

/// `H(group)` in bits.
pub fn entropy(joint: &JointDistribution, group: VariableGroup) -> Result<f64> {
    if group.is_empty() {
        return Err(Error::Usage("entropy of an empty variable group".into()));
    }
    Ok(marginalize(joint, group)?.entropy_bits())
}

fn joint_entropy_or_zero(joint: &JointDistribution, group: VarSet) -> f64 {
    if group.is_empty() {
        0.0
    } else {
        marginalize(joint, group).expect("nonempty").entropy_bits()
    }
}

/// Unclamped `I(A;B|C)`; callers must have checked disjointness.
pub(crate) fn raw_cmi(joint: &JointDistribution, a: VarSet, b: VarSet, c: VarSet) -> f64 {
    joint_entropy_or_zero(joint, a.union(c)) + joint_entropy_or_zero(joint, b.union(c))
        - joint_entropy_or_zero(joint, a.union(b).union(c))
        - joint_entropy_or_zero(joint, c)
}

fn check_groups(a: VarSet, b: VarSet, c: VarSet) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Usage("mutual information needs two nonempty groups".into()));
    }
    if a.intersects(b) || a.intersects(c) || b.intersects(c) {
        return Err(Error::Usage(format!("groups {{{a}}}, {{{b}}}, {{{c}}} overlap")));
    }
    Ok(())
}

fn clamp(value: f64, what: &str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -NEGATIVE_CLAMP_TOL {
        Ok(0.0)
    } else {
        Err(Error::Consistency(format!("{what} evaluated to {value:e} < 0")))
    }
}

/// `I(A;B|C)` in bits; pass `VarSet::EMPTY` for an unconditional term.
pub fn cond_mutual_info(joint: &JointDistribution, a: VariableGroup, b: VariableGroup, c: VariableGroup) -> Result<f64> {
    check_groups(a, b, c)?;
    clamp(raw_cmi(joint, a, b, c), "conditional mutual information")
}

/// One information quantity in canonical form.
///
/// Mutual-information atoms are symmetric; the canonical order puts the group
/// containing `Y` (else `S`) second, so `I(S;V|X2)` and `I(V;S|X2)` are the
/// same atom and print as the latter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Entropy { of: VarSet, given: VarSet },
    MutualInfo { a: VarSet, b: VarSet, given: VarSet },
}

impl Atom {
    pub fn entropy(of: VarSet, given: VarSet) -> Result<Atom> {
        if of.is_empty() {
            return Err(Error::Usage("entropy of an empty variable group".into()));
        }
        if of.intersects(given) {
            return Err(Error::Usage(format!("H({of}|{given}) has overlapping groups")));
        }
        Ok(Atom::Entropy { of, given })
    }

    pub fn mutual_info(a: VarSet, b: VarSet, given: VarSet) -> Result<Atom> {
        check_groups(a, b, given)?;
        let key = |g: VarSet| (g.contains(Var::Y), g.contains(Var::S), std::cmp::Reverse(g));
        let (a, b) = if key(a) <= key(b) { (a, b) } else { (b, a) };
        Ok(Atom::MutualInfo { a, b, given })
    }

    /// Shorthand for tests and fixed systems: `Atom::mi(&[U], &[Y], &[V, X2])`.
    pub fn mi(a: &[Var], b: &[Var], given: &[Var]) -> Atom {
        Atom::mutual_info(VarSet::of(a), VarSet::of(b), VarSet::of(given)).expect("well-formed atom")
    }

    pub fn evaluate(&self, joint: &JointDistribution) -> Result<f64> {
        match *self {
            Atom::Entropy { of, given } => {
                let h = joint_entropy_or_zero(joint, of.union(given)) - joint_entropy_or_zero(joint, given);
                clamp(h, "conditional entropy")
            }
            Atom::MutualInfo { a, b, given } => cond_mutual_info(joint, a, b, given),
        }
    }

    pub fn variables(&self) -> VarSet {
        match *self {
            Atom::Entropy { of, given } => of.union(given),
            Atom::MutualInfo { a, b, given } => a.union(b).union(given),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Entropy { of, given } if given.is_empty() => write!(f, "H({of})"),
            Atom::Entropy { of, given } => write!(f, "H({of}|{given})"),
            Atom::MutualInfo { a, b, given } if given.is_empty() => write!(f, "I({a};{b})"),
            Atom::MutualInfo { a, b, given } => write!(f, "I({a};{b}|{given})"),
        }
    }
}

fn parse_group(text: &str) -> Result<VarSet> {
    let mut set = VarSet::EMPTY;
    for tag in text.split(',') {
        let v: Var = tag.parse()?;
        if set.contains(v) {
            return Err(Error::Parse(format!("variable {v} repeated in `{text}`")));
        }
        set = set.union(VarSet::of(&[v]));
    }
    Ok(set)
}

impl FromStr for Atom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let malformed = || Error::Parse(format!("malformed atom `{s}`"));
        let (head, rest) = compact.split_at(compact.find('(').ok_or_else(malformed)?);
        let body = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(malformed)?;
        let (main, given) = match body.split_once('|') {
            Some((m, g)) => (m, parse_group(g).map_err(|_| malformed())?),
            None => (body, VarSet::EMPTY),
        };
        let usage_to_parse = |e: Error| match e {
            Error::Usage(m) => Error::Parse(m),
            other => other,
        };
        match head {
            "H" => {
                let of = parse_group(main).map_err(|_| malformed())?;
                Atom::entropy(of, given).map_err(usage_to_parse)
            }
            "I" => {
                let (a, b) = main.split_once(';').ok_or_else(malformed)?;
                let a = parse_group(a).map_err(|_| malformed())?;
                let b = parse_group(b).map_err(|_| malformed())?;
                Atom::mutual_info(a, b, given).map_err(usage_to_parse)
            }
            _ => Err(malformed()),
        }
    }
}

impl Serialize for Atom {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Atom {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Evaluates every named atom on `joint`.
pub fn eval_atoms<S: AsRef<str>>(joint: &JointDistribution, atoms: &[S]) -> Result<BTreeMap<Atom, f64>> {
    let mut out = BTreeMap::new();
    for name in atoms {
        let atom: Atom = name.as_ref().parse()?;
        out.insert(atom, atom.evaluate(joint)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{build_joint, ConditionalKernel, FinitePmf};
    use approx::assert_abs_diff_eq;

    fn h2(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    /// S ~ Bern(ps); X1 uniform; Y = X1 xor S; everything else trivial.
    fn noisy_bit(ps: f64) -> JointDistribution {
        let q = FinitePmf::bernoulli(ps).unwrap();
        let px2 = FinitePmf::point_mass(1, 0).unwrap();
        let pv = ConditionalKernel::constant(&[2, 1], &[1.0]).unwrap();
        let pux1 = ConditionalKernel::constant(&[2, 1, 1], &[0.5, 0.5]).unwrap();
        let w = ConditionalKernel::deterministic(&[2, 1, 2], 2, |i| i[0] ^ i[2]).unwrap();
        build_joint(&q, &px2, &pv, &pux1, &w).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let j = noisy_bit(0.11);
        assert_abs_diff_eq!(entropy(&j, VarSet::of(&[Var::X1])).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(entropy(&j, VarSet::of(&[Var::X2])).unwrap(), 0.0, epsilon = 1e-15);
        let hs = entropy(&j, VarSet::of(&[Var::S])).unwrap();
        assert_abs_diff_eq!(hs, h2(0.11), epsilon = 1e-12);
        assert_abs_diff_eq!(hs, 0.49992, epsilon = 1e-4);
        assert!(entropy(&j, VarSet::EMPTY).is_err());
    }

    #[test]
    fn bsc_mutual_information() {
        let j = noisy_bit(0.11);
        let i = cond_mutual_info(&j, VarSet::of(&[Var::X1]), VarSet::of(&[Var::Y]), VarSet::EMPTY).unwrap();
        assert_abs_diff_eq!(i, 1.0 - h2(0.11), epsilon = 1e-12);
        assert_abs_diff_eq!(i, 0.50008, epsilon = 1e-4);
    }

    #[test]
    fn overlapping_groups_rejected() {
        let j = noisy_bit(0.3);
        let r = cond_mutual_info(&j, VarSet::of(&[Var::X1]), VarSet::of(&[Var::X1, Var::Y]), VarSet::EMPTY);
        assert!(matches!(r, Err(Error::Usage(_))));
    }

    #[test]
    fn atom_grammar_round_trip() {
        let a: Atom = " I( S ; V | X2 ) ".parse().unwrap();
        assert_eq!(a.to_string(), "I(V;S|X2)");
        let b: Atom = "I(V;S|X2)".parse().unwrap();
        assert_eq!(a, b);
        let c: Atom = "I(Y;U,V,X2)".parse().unwrap();
        assert_eq!(c.to_string(), "I(U,V,X2;Y)");
        let h: Atom = "H(Y|X1,S)".parse().unwrap();
        assert_eq!(h.to_string(), "H(Y|S,X1)");
        for bad in ["I(U;U)", "I(U;Y", "J(U;Y)", "I(U;Q)", "I(U,U;Y)", "I(;Y)", "H()"] {
            assert!(matches!(bad.parse::<Atom>(), Err(Error::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn eval_atoms_matches_individual_calls() {
        let j = noisy_bit(0.2);
        let vals = eval_atoms(&j, &["I(X1;Y)", "H(S)", "I(S;Y|X1)"]).unwrap();
        let direct = cond_mutual_info(&j, VarSet::of(&[Var::S]), VarSet::of(&[Var::Y]), VarSet::of(&[Var::X1])).unwrap();
        assert_abs_diff_eq!(vals[&"I(S;Y|X1)".parse().unwrap()], direct, epsilon = 0.0);
        assert!(eval_atoms(&j, &["I(X1;Y"]).is_err());
    }
}
