use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::info::Atom;
use crate::prob::JointDistribution;

use super::{to_f64, InequalitySystem, RateVar};

/// `A x <= b` over the listed rate variables, strictness dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericPolytope {
    pub vars: Vec<RateVar>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

/// Evaluates every right-hand side with the given atom values.
pub fn instantiate(system: &InequalitySystem, values: &BTreeMap<Atom, f64>) -> Result<NumericPolytope> {
    let vars = system.variables();
    let mut p = NumericPolytope { vars: vars.clone(), a: Vec::new(), b: Vec::new() };
    for row in &system.rows {
        p.a.push(vars.iter().map(|v| to_f64(row.coeff(*v))).collect());
        p.b.push(row.rhs.evaluate(values)?);
    }
    Ok(p)
}

impl NumericPolytope {
    /// Instantiates with atom values computed from a joint law.
    pub fn from_joint(system: &InequalitySystem, joint: &JointDistribution) -> Result<NumericPolytope> {
        let mut values = BTreeMap::new();
        for atom in system.atoms() {
            values.insert(atom, atom.evaluate(joint)?);
        }
        instantiate(system, &values)
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.a.iter().zip(&self.b).all(|(row, b)| row.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() <= b + tol)
    }

    /// Vertices of a bounded polytope by enumerating `dim`-subsets of rows.
    pub fn vertices(&self, tol: f64) -> Vec<Vec<f64>> {
        let d = self.dim();
        let m = self.a.len();
        let mut out: Vec<Vec<f64>> = Vec::new();
        if d == 0 || m < d {
            return out;
        }
        let mut pick: Vec<usize> = (0..d).collect();
        loop {
            let a: Vec<Vec<f64>> = pick.iter().map(|&i| self.a[i].clone()).collect();
            let b: Vec<f64> = pick.iter().map(|&i| self.b[i]).collect();
            if let Some(x) = solve(a, b) {
                if self.contains(&x, tol) && !out.iter().any(|v| dist(v, &x) <= tol) {
                    out.push(x);
                }
            }
            // next combination
            let mut k = d;
            while k > 0 && pick[k - 1] == m - d + k - 1 {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            pick[k - 1] += 1;
            for j in k..d {
                pick[j] = pick[j - 1] + 1;
            }
        }
        out
    }

    /// Vertices projected onto `keep`, in that order.
    pub fn projected_vertices(&self, keep: &[RateVar], tol: f64) -> Result<Vec<Vec<f64>>> {
        let idx: Vec<usize> = keep
            .iter()
            .map(|v| {
                self.vars.iter().position(|w| w == v).ok_or_else(|| Error::Usage(format!("polytope has no variable {v}")))
            })
            .collect::<Result<_>>()?;
        Ok(self.vertices(tol).into_iter().map(|x| idx.iter().map(|&i| x[i]).collect()).collect())
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn support(points: &[Vec<f64>], dir: &[f64]) -> f64 {
    points.iter().map(|p| p.iter().zip(dir).map(|(x, d)| x * d).sum::<f64>()).fold(f64::NEG_INFINITY, f64::max)
}

/// Compares the projections of two bounded polytopes onto their shared
/// variables through support functions; `a` may carry extra (eliminated)
/// variables.
pub fn polytope_equal(a: &NumericPolytope, b: &NumericPolytope, tol: f64) -> Result<bool> {
    let shared: Vec<RateVar> = b.vars.iter().copied().filter(|v| a.vars.contains(v)).collect();
    if shared.is_empty() {
        return Err(Error::Usage("polytopes share no variables".into()));
    }
    let pa = a.projected_vertices(&shared, 1e-9)?;
    let pb = b.projected_vertices(&shared, 1e-9)?;
    if pa.is_empty() || pb.is_empty() {
        return Ok(pa.is_empty() == pb.is_empty());
    }
    let d = shared.len();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    if d == 2 {
        for k in 0..720 {
            let t = std::f64::consts::TAU * k as f64 / 720.0;
            dirs.push(vec![t.cos(), t.sin()]);
        }
    }
    // every sign pattern in {-1, 0, 1}^d
    for code in 0..3usize.pow(d as u32) {
        let mut c = code;
        let dir: Vec<f64> = (0..d)
            .map(|_| {
                let s = (c % 3) as f64 - 1.0;
                c /= 3;
                s
            })
            .collect();
        if dir.iter().any(|&x| x != 0.0) {
            dirs.push(dir);
        }
    }
    Ok(dirs.iter().all(|dir| (support(&pa, dir) - support(&pb, dir)).abs() <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fme::{derive_region_system, region_bound_system, scheme_constraint_system};

    fn values(pairs: &[(&str, f64)]) -> BTreeMap<Atom, f64> {
        pairs.iter().map(|(a, v)| (a.parse().unwrap(), *v)).collect()
    }

    #[test]
    fn triangle_vertices() {
        let s: InequalitySystem = "Rc + R1 <= 1\n-Rc <= 0\n-R1 <= 0".parse().unwrap();
        let p = instantiate(&s, &BTreeMap::new()).unwrap();
        let mut v = p.vertices(1e-12);
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(v, vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn derived_system_matches_numerically() {
        let vals = values(&[
            ("I(U;Y|V,X2)", 0.6),
            ("I(U;S|V,X2)", 0.2),
            ("I(U,V,X2;Y)", 0.9),
            ("I(U,V,X2;S)", 0.35),
        ]);
        let d = instantiate(&derive_region_system().unwrap(), &vals).unwrap();
        let e = instantiate(&region_bound_system(), &vals).unwrap();
        assert!(polytope_equal(&d, &e, 1e-12).unwrap());
        let other = values(&[
            ("I(U;Y|V,X2)", 0.6),
            ("I(U;S|V,X2)", 0.2),
            ("I(U,V,X2;Y)", 0.9),
            ("I(U,V,X2;S)", 0.30),
        ]);
        let f = instantiate(&region_bound_system(), &other).unwrap();
        assert!(!polytope_equal(&d, &f, 1e-6).unwrap());
    }

    #[test]
    fn missing_atom_values_are_reported() {
        assert!(instantiate(&scheme_constraint_system(), &BTreeMap::new()).is_err());
    }
}
