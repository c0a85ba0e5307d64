//! Finite-alphabet probability objects and the product-form joint law of
//! `(S, U, V, X1, X2, Y)`.
//!
//! All alphabets are index based (`0..size`); labels are cosmetic only.
//! Probabilities are stored in the linear domain as `f64`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info;

/// Slack on normalisation of constructed pmfs and joints.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Slack on the state-marginal check and on the independence / Markov checks (bits).
pub const STATISTICAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AlphabetRepr")]
pub struct Alphabet {
    size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
struct AlphabetRepr {
    size: usize,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

impl TryFrom<AlphabetRepr> for Alphabet {
    type Error = Error;
    fn try_from(r: AlphabetRepr) -> Result<Self> {
        match r.labels {
            Some(labels) => {
                let a = Alphabet::with_labels(labels)?;
                if a.size != r.size {
                    return Err(Error::Validation(format!(
                        "alphabet declares size {} but has {} labels",
                        r.size, a.size
                    )));
                }
                Ok(a)
            }
            None => Alphabet::new(r.size),
        }
    }
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Validation("alphabet size must be at least 1".into()));
        }
        Ok(Alphabet { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Validation("alphabet size must be at least 1".into()));
        }
        Ok(Alphabet { size: labels.len(), labels: Some(labels) })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }
}

/// A probability vector over a finite alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PmfRepr")]
pub struct FinitePmf {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct PmfRepr {
    #[serde(default)]
    alphabet: Option<Alphabet>,
    probs: Vec<f64>,
}

impl TryFrom<PmfRepr> for FinitePmf {
    type Error = Error;
    fn try_from(r: PmfRepr) -> Result<Self> {
        let alphabet = match r.alphabet {
            Some(a) => a,
            None => Alphabet::new(r.probs.len())?,
        };
        FinitePmf::new(alphabet, r.probs)
    }
}

impl FinitePmf {
    pub fn new(alphabet: Alphabet, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != alphabet.size() {
            return Err(Error::Dimension(format!(
                "pmf has {} entries for an alphabet of size {}",
                probs.len(),
                alphabet.size()
            )));
        }
        check_simplex(&probs)?;
        Ok(FinitePmf { alphabet, probs })
    }

    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let alphabet = Alphabet::new(probs.len())?;
        FinitePmf::new(alphabet, probs)
    }

    pub fn uniform(size: usize) -> Result<Self> {
        FinitePmf::from_probs(vec![1.0 / size.max(1) as f64; size])
    }

    pub fn point_mass(size: usize, at: usize) -> Result<Self> {
        if at >= size {
            return Err(Error::Dimension(format!("point mass at {at} outside alphabet of size {size}")));
        }
        let mut probs = vec![0.0; size];
        probs[at] = 1.0;
        FinitePmf::from_probs(probs)
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        FinitePmf::from_probs(vec![1.0 - p, p])
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    /// `weight * self + (1 - weight) * other`.
    pub fn mix(&self, other: &FinitePmf, weight: f64) -> Result<FinitePmf> {
        if self.len() != other.len() {
            return Err(Error::Dimension("cannot mix pmfs of different sizes".into()));
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| weight * a + (1.0 - weight) * b)
            .collect();
        FinitePmf::new(self.alphabet.clone(), probs)
    }
}

fn check_simplex(probs: &[f64]) -> Result<()> {
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::Validation(format!("probability {p} is negative or not finite")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > CONSTRUCTION_TOL {
        return Err(Error::Validation(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// A stochastic matrix: one output pmf per tuple of input symbols. Rows are
/// stored in row-major order of the input tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelRepr")]
pub struct ConditionalKernel {
    input_alphabets: Vec<Alphabet>,
    output_alphabet: Alphabet,
    rows: Vec<FinitePmf>,
}

#[derive(Deserialize)]
struct KernelRepr {
    input_alphabets: Vec<Alphabet>,
    output_alphabet: Alphabet,
    rows: Vec<FinitePmf>,
}

impl TryFrom<KernelRepr> for ConditionalKernel {
    type Error = Error;
    fn try_from(r: KernelRepr) -> Result<Self> {
        ConditionalKernel::new(r.input_alphabets, r.output_alphabet, r.rows)
    }
}

impl ConditionalKernel {
    pub fn new(input_alphabets: Vec<Alphabet>, output_alphabet: Alphabet, rows: Vec<FinitePmf>) -> Result<Self> {
        let expected: usize = input_alphabets.iter().map(Alphabet::size).product();
        if rows.len() != expected {
            return Err(Error::Dimension(format!("kernel has {} rows, expected {expected}", rows.len())));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != output_alphabet.size()) {
            return Err(Error::Dimension(format!(
                "kernel row of length {} for output alphabet of size {}",
                r.len(),
                output_alphabet.size()
            )));
        }
        Ok(ConditionalKernel { input_alphabets, output_alphabet, rows })
    }

    /// Builds a kernel from plain sizes and row vectors.
    pub fn from_rows(input_sizes: &[usize], output_size: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let inputs = input_sizes.iter().map(|&s| Alphabet::new(s)).collect::<Result<Vec<_>>>()?;
        let output = Alphabet::new(output_size)?;
        let rows = rows
            .into_iter()
            .map(|r| FinitePmf::new(output.clone(), r))
            .collect::<Result<Vec<_>>>()?;
        ConditionalKernel::new(inputs, output, rows)
    }

    /// A kernel that puts all mass on `f(inputs)`.
    pub fn deterministic(input_sizes: &[usize], output_size: usize, f: impl Fn(&[usize]) -> usize) -> Result<Self> {
        let count: usize = input_sizes.iter().product();
        let mut rows = Vec::with_capacity(count);
        let mut idx = vec![0usize; input_sizes.len()];
        for _ in 0..count {
            let mut row = vec![0.0; output_size];
            let out = f(&idx);
            if out >= output_size {
                return Err(Error::Dimension(format!("deterministic map produced {out} >= {output_size}")));
            }
            row[out] = 1.0;
            rows.push(row);
            odometer_step(&mut idx, input_sizes);
        }
        ConditionalKernel::from_rows(input_sizes, output_size, rows)
    }

    /// Every row equal to `pmf`.
    pub fn constant(input_sizes: &[usize], pmf: &[f64]) -> Result<Self> {
        let count: usize = input_sizes.iter().product();
        ConditionalKernel::from_rows(input_sizes, pmf.len(), vec![pmf.to_vec(); count])
    }

    pub fn input_alphabets(&self) -> &[Alphabet] {
        &self.input_alphabets
    }

    pub fn input_sizes(&self) -> Vec<usize> {
        self.input_alphabets.iter().map(Alphabet::size).collect()
    }

    pub fn output_alphabet(&self) -> &Alphabet {
        &self.output_alphabet
    }

    pub fn output_size(&self) -> usize {
        self.output_alphabet.size()
    }

    pub fn rows(&self) -> &[FinitePmf] {
        &self.rows
    }

    pub fn row_index(&self, inputs: &[usize]) -> usize {
        debug_assert_eq!(inputs.len(), self.input_alphabets.len());
        inputs
            .iter()
            .zip(&self.input_alphabets)
            .fold(0, |acc, (&i, a)| acc * a.size() + i)
    }

    pub fn row(&self, inputs: &[usize]) -> &FinitePmf {
        &self.rows[self.row_index(inputs)]
    }

    pub fn prob(&self, inputs: &[usize], output: usize) -> f64 {
        self.row(inputs).prob(output)
    }

    pub fn mix(&self, other: &ConditionalKernel, weight: f64) -> Result<ConditionalKernel> {
        if self.input_sizes() != other.input_sizes() || self.output_size() != other.output_size() {
            return Err(Error::Dimension("cannot mix kernels of different shapes".into()));
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.mix(b, weight))
            .collect::<Result<Vec<_>>>()?;
        ConditionalKernel::new(self.input_alphabets.clone(), self.output_alphabet.clone(), rows)
    }
}

pub(crate) fn odometer_step(idx: &mut [usize], sizes: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < sizes[k] {
            return;
        }
        idx[k] = 0;
    }
}

/// The six random variables of the model, in canonical axis order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Var {
    S,
    U,
    V,
    X1,
    X2,
    Y,
}

impl Var {
    pub const ALL: [Var; 6] = [Var::S, Var::U, Var::V, Var::X1, Var::X2, Var::Y];

    pub fn axis(self) -> usize {
        self as usize
    }

    pub fn tag(self) -> &'static str {
        match self {
            Var::S => "S",
            Var::U => "U",
            Var::V => "V",
            Var::X1 => "X1",
            Var::X2 => "X2",
            Var::Y => "Y",
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Var {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "S" => Ok(Var::S),
            "U" => Ok(Var::U),
            "V" => Ok(Var::V),
            "X1" => Ok(Var::X1),
            "X2" => Ok(Var::X2),
            "Y" => Ok(Var::Y),
            other => Err(Error::Parse(format!("unknown variable tag `{other}`"))),
        }
    }
}

/// A set of model variables, iterated in canonical order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarSet(u8);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);
    pub const ALL: VarSet = VarSet(0b11_1111);

    pub fn of(vars: &[Var]) -> VarSet {
        VarSet(vars.iter().fold(0, |m, v| m | (1 << v.axis())))
    }

    pub fn contains(self, v: Var) -> bool {
        self.0 & (1 << v.axis()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn intersects(self, other: VarSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Var> {
        Var::ALL.into_iter().filter(move |v| self.contains(*v))
    }
}

impl FromIterator<Var> for VarSet {
    fn from_iter<I: IntoIterator<Item = Var>>(iter: I) -> Self {
        iter.into_iter().fold(VarSet::EMPTY, |s, v| s.union(VarSet::of(&[v])))
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tags: Vec<&str> = self.iter().map(Var::tag).collect();
        f.write_str(&tags.join(","))
    }
}

/// A pmf tensor over a subset of the model variables, axes in canonical order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Marginal {
    vars: Vec<Var>,
    sizes: Vec<usize>,
    probs: Vec<f64>,
}

impl Marginal {
    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn var_set(&self) -> VarSet {
        VarSet::of(&self.vars)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Sums out every axis not in `keep`. `keep` must be a nonempty subset of
    /// this marginal's variables.
    pub fn marginalize(&self, keep: VarSet) -> Result<Marginal> {
        if keep.is_empty() {
            return Err(Error::Usage("cannot marginalize onto an empty variable set".into()));
        }
        if !keep.is_subset(self.var_set()) {
            return Err(Error::Usage(format!("{keep} is not a subset of {}", self.var_set())));
        }
        let mask: Vec<bool> = self.vars.iter().map(|v| keep.contains(*v)).collect();
        let (sizes, probs) = sum_out(&self.sizes, &self.probs, &mask);
        Ok(Marginal { vars: keep.iter().collect(), sizes, probs })
    }

    /// Plain entropy of this tensor in bits with `0 log 0 = 0`.
    pub fn entropy_bits(&self) -> f64 {
        entropy_of(&self.probs)
    }
}

pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum::<f64>().max(0.0)
}

fn sum_out(sizes: &[usize], probs: &[f64], keep: &[bool]) -> (Vec<usize>, Vec<f64>) {
    let out_sizes: Vec<usize> = sizes.iter().zip(keep).filter(|(_, k)| **k).map(|(s, _)| *s).collect();
    // stride of each input axis inside the output tensor (0 for summed axes)
    let mut strides = vec![0usize; sizes.len()];
    let mut acc = 1;
    for k in (0..sizes.len()).rev() {
        if keep[k] {
            strides[k] = acc;
            acc *= sizes[k];
        }
    }
    let mut out = vec![0.0; acc];
    let mut idx = vec![0usize; sizes.len()];
    for &p in probs {
        let o: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
        out[o] += p;
        odometer_step(&mut idx, sizes);
    }
    (out_sizes, out)
}

/// The joint law of `(S, U, V, X1, X2, Y)`, a row-major tensor with axis
/// order `S, U, V, X1, X2, Y`, together with the declared state law `Q_S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JointRepr")]
pub struct JointDistribution {
    axes: [Var; 6],
    sizes: [usize; 6],
    q_s: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct JointRepr {
    #[serde(default)]
    axes: Option<Vec<Var>>,
    sizes: [usize; 6],
    q_s: Vec<f64>,
    probs: Vec<f64>,
}

impl TryFrom<JointRepr> for JointDistribution {
    type Error = Error;
    fn try_from(r: JointRepr) -> Result<Self> {
        if let Some(axes) = r.axes {
            if axes != Var::ALL {
                return Err(Error::Validation("joint tensor axes must be S,U,V,X1,X2,Y".into()));
            }
        }
        JointDistribution::from_tensor(r.sizes, r.q_s, r.probs)
    }
}

impl JointDistribution {
    /// Wraps a raw tensor. Checks shape, nonnegativity and normalisation only;
    /// the model invariants are reported by [`validate`].
    pub fn from_tensor(sizes: [usize; 6], q_s: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if sizes.contains(&0) {
            return Err(Error::Dimension("every alphabet needs at least one symbol".into()));
        }
        let len: usize = sizes.iter().product();
        if probs.len() != len {
            return Err(Error::Dimension(format!("joint tensor has {} cells, expected {len}", probs.len())));
        }
        if q_s.len() != sizes[0] {
            return Err(Error::Dimension(format!("Q_S has {} entries, |S| = {}", q_s.len(), sizes[0])));
        }
        check_simplex(&q_s)?;
        check_simplex(&probs)?;
        Ok(JointDistribution { axes: Var::ALL, sizes, q_s, probs })
    }

    pub fn sizes(&self) -> [usize; 6] {
        self.sizes
    }

    pub fn size_of(&self, v: Var) -> usize {
        self.sizes[v.axis()]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn q_s(&self) -> &[f64] {
        &self.q_s
    }

    pub fn index(&self, at: [usize; 6]) -> usize {
        at.iter().zip(&self.sizes).fold(0, |acc, (&i, &s)| acc * s + i)
    }

    pub fn get(&self, at: [usize; 6]) -> f64 {
        self.probs[self.index(at)]
    }

    pub fn as_marginal(&self) -> Marginal {
        Marginal { vars: Var::ALL.to_vec(), sizes: self.sizes.to_vec(), probs: self.probs.clone() }
    }

    /// `weight * self + (1 - weight) * other`; both must share shape and `Q_S`.
    pub fn mix(&self, other: &JointDistribution, weight: f64) -> Result<JointDistribution> {
        if self.sizes != other.sizes {
            return Err(Error::Dimension("cannot mix joints of different shapes".into()));
        }
        let probs = self.probs.iter().zip(&other.probs).map(|(a, b)| weight * a + (1.0 - weight) * b).collect();
        let q_s = self.q_s.iter().zip(&other.q_s).map(|(a, b)| weight * a + (1.0 - weight) * b).collect();
        JointDistribution::from_tensor(self.sizes, q_s, probs)
    }
}

/// Product-form joint `Q_S P_X2 P_{V|S,X2} P_{U,X1|S,V,X2} W_{Y|X1,X2,S}`.
///
/// Kernel input orders: `p_v_given_sx2` is indexed by `(s, x2)`,
/// `p_ux1_given_svx2` by `(s, v, x2)` with output symbol `u * |X1| + x1`,
/// and `channel` by `(x1, x2, s)`.
pub fn build_joint(
    q_s: &FinitePmf,
    p_x2: &FinitePmf,
    p_v_given_sx2: &ConditionalKernel,
    p_ux1_given_svx2: &ConditionalKernel,
    channel: &ConditionalKernel,
) -> Result<JointDistribution> {
    let ns = q_s.len();
    let nx2 = p_x2.len();
    let cin = channel.input_sizes();
    if cin.len() != 3 {
        return Err(Error::Dimension("channel must be indexed by (x1, x2, s)".into()));
    }
    let (nx1, ny) = (cin[0], channel.output_size());
    if cin[1] != nx2 || cin[2] != ns {
        return Err(Error::Dimension(format!(
            "channel inputs {:?} do not match |X2| = {nx2}, |S| = {ns}",
            cin
        )));
    }
    if p_v_given_sx2.input_sizes() != [ns, nx2] {
        return Err(Error::Dimension("P_{V|S,X2} must be indexed by (s, x2)".into()));
    }
    let nv = p_v_given_sx2.output_size();
    if p_ux1_given_svx2.input_sizes() != [ns, nv, nx2] {
        return Err(Error::Dimension("P_{U,X1|S,V,X2} must be indexed by (s, v, x2)".into()));
    }
    let nux1 = p_ux1_given_svx2.output_size();
    if nux1 % nx1 != 0 {
        return Err(Error::Dimension(format!("|U x X1| = {nux1} is not a multiple of |X1| = {nx1}")));
    }
    let nu = nux1 / nx1;
    let sizes = [ns, nu, nv, nx1, nx2, ny];
    let mut probs = vec![0.0; sizes.iter().product()];
    let mut k = 0;
    for s in 0..ns {
        for u in 0..nu {
            for v in 0..nv {
                for x1 in 0..nx1 {
                    for x2 in 0..nx2 {
                        let head = q_s.prob(s)
                            * p_x2.prob(x2)
                            * p_v_given_sx2.prob(&[s, x2], v)
                            * p_ux1_given_svx2.prob(&[s, v, x2], u * nx1 + x1);
                        let w = channel.row(&[x1, x2, s]).probs();
                        for y in 0..ny {
                            probs[k] = head * w[y];
                            k += 1;
                        }
                    }
                }
            }
        }
    }
    JointDistribution::from_tensor(sizes, q_s.probs().to_vec(), probs)
}

/// Sums the joint down to the variables in `keep`.
pub fn marginalize(joint: &JointDistribution, keep: VarSet) -> Result<Marginal> {
    if keep.is_empty() {
        return Err(Error::Usage("cannot marginalize onto an empty variable set".into()));
    }
    let mask: Vec<bool> = Var::ALL.iter().map(|v| keep.contains(*v)).collect();
    let (sizes, probs) = sum_out(&joint.sizes, &joint.probs, &mask);
    Ok(Marginal { vars: keep.iter().collect(), sizes, probs })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<InvariantCheck>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&InvariantCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub(crate) fn failures(&self) -> String {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{} (residual {:.3e})", c.name, c.residual))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

pub const CHECK_NORMALIZATION: &str = "normalization";
pub const CHECK_STATE_MARGINAL: &str = "state_marginal";
pub const CHECK_STATE_INPUT_INDEPENDENCE: &str = "state_input_independence";
pub const CHECK_MARKOV_CHAIN: &str = "markov_chain";

/// Measures every model invariant of a joint; never fails.
pub fn validate(joint: &JointDistribution) -> ValidationReport {
    let mut checks = Vec::with_capacity(4);
    let mut push = |name: &str, residual: f64, tolerance: f64| {
        checks.push(InvariantCheck { name: name.into(), residual, tolerance, pass: residual <= tolerance })
    };

    let neg = joint.probs.iter().fold(0.0f64, |m, &p| m.max(-p));
    let total: f64 = joint.probs.iter().sum();
    push(CHECK_NORMALIZATION, neg.max((total - 1.0).abs()), CONSTRUCTION_TOL);

    let ps = marginalize(joint, VarSet::of(&[Var::S])).expect("nonempty");
    let dev = ps.probs().iter().zip(&joint.q_s).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    push(CHECK_STATE_MARGINAL, dev, STATISTICAL_TOL);

    let s = VarSet::of(&[Var::S]);
    let x2 = VarSet::of(&[Var::X2]);
    push(CHECK_STATE_INPUT_INDEPENDENCE, info::raw_cmi(joint, s, x2, VarSet::EMPTY).abs(), STATISTICAL_TOL);

    let uv = VarSet::of(&[Var::U, Var::V]);
    let y = VarSet::of(&[Var::Y]);
    let sx = VarSet::of(&[Var::S, Var::X1, Var::X2]);
    push(CHECK_MARKOV_CHAIN, info::raw_cmi(joint, uv, y, sx).abs(), STATISTICAL_TOL);

    ValidationReport { checks }
}

/// Fails with a validation error unless every invariant holds.
pub fn ensure_valid(joint: &JointDistribution) -> Result<()> {
    let report = validate(joint);
    if report.all_pass() {
        Ok(())
    } else {
        Err(Error::Validation(format!("joint violates {}", report.failures())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uniform_binary_joint() -> JointDistribution {
        let q = FinitePmf::uniform(2).unwrap();
        let px2 = FinitePmf::uniform(2).unwrap();
        let pv = ConditionalKernel::constant(&[2, 2], &[0.5, 0.5]).unwrap();
        let pux1 = ConditionalKernel::constant(&[2, 2, 2], &[0.25; 4]).unwrap();
        let w = ConditionalKernel::deterministic(&[2, 2, 2], 2, |i| i[0]).unwrap();
        build_joint(&q, &px2, &pv, &pux1, &w).unwrap()
    }

    #[test]
    fn alphabet_rejects_zero_and_checks_labels() {
        assert!(Alphabet::new(0).is_err());
        let a = Alphabet::with_labels(vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(a.size(), 2);
        let bad: std::result::Result<Alphabet, _> = serde_json::from_str(r#"{"size":3,"labels":["a","b"]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn pmf_validation() {
        assert!(FinitePmf::from_probs(vec![0.5, 0.6]).is_err());
        assert!(FinitePmf::from_probs(vec![-0.1, 1.1]).is_err());
        assert!(FinitePmf::from_probs(vec![0.25, 0.75]).is_ok());
        let bad: std::result::Result<FinitePmf, _> = serde_json::from_str(r#"{"probs":[0.3,0.3]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn uniform_product_joint_has_independent_state() {
        let j = uniform_binary_joint();
        let report = validate(&j);
        assert!(report.all_pass(), "{report:?}");
        let ps = marginalize(&j, VarSet::of(&[Var::S])).unwrap();
        assert_abs_diff_eq!(ps.probs()[0], 0.5, epsilon = 1e-15);
        assert!(report.check(CHECK_STATE_INPUT_INDEPENDENCE).unwrap().residual < 1e-12);
    }

    #[test]
    fn singleton_state_conditioning_is_trivial() {
        let q = FinitePmf::point_mass(1, 0).unwrap();
        let px2 = FinitePmf::from_probs(vec![0.3, 0.7]).unwrap();
        let pv = ConditionalKernel::from_rows(&[1, 2], 2, vec![vec![0.2, 0.8], vec![0.6, 0.4]]).unwrap();
        let pux1 = ConditionalKernel::constant(&[1, 2, 2], &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let w = ConditionalKernel::constant(&[2, 2, 1], &[0.5, 0.5]).unwrap();
        let j = build_joint(&q, &px2, &pv, &pux1, &w).unwrap();
        let joint_no_s = marginalize(&j, VarSet::of(&[Var::U, Var::V, Var::X1, Var::X2, Var::Y])).unwrap();
        assert_eq!(joint_no_s.probs(), j.probs());
    }

    #[test]
    fn build_joint_rejects_mismatched_alphabets() {
        let q = FinitePmf::uniform(2).unwrap();
        let px2 = FinitePmf::uniform(3).unwrap();
        let pv = ConditionalKernel::constant(&[2, 2], &[1.0]).unwrap();
        let pux1 = ConditionalKernel::constant(&[2, 1, 2], &[0.5, 0.5]).unwrap();
        let w = ConditionalKernel::deterministic(&[2, 2, 2], 2, |i| i[0]).unwrap();
        assert!(matches!(build_joint(&q, &px2, &pv, &pux1, &w), Err(Error::Dimension(_))));
    }

    #[test]
    fn marginalize_identity_and_empty() {
        let j = uniform_binary_joint();
        let all = marginalize(&j, VarSet::ALL).unwrap();
        assert_eq!(all.probs(), j.probs());
        assert!(matches!(marginalize(&j, VarSet::EMPTY), Err(Error::Usage(_))));
    }

    #[test]
    fn dependent_state_and_input_fails_independence_by_one_bit() {
        // X2 = S, everything else constant
        let mut probs = vec![0.0; 2 * 2 * 2];
        let sizes = [2, 1, 1, 1, 2, 2];
        let j0 = JointDistribution::from_tensor(sizes, vec![0.5, 0.5], vec![0.0; 8]);
        assert!(j0.is_err());
        for s in 0..2 {
            // (s, u, v, x1, x2, y) with y = x2
            let idx = ((s * 2) + s) * 2 + s;
            probs[idx] = 0.5;
        }
        let j = JointDistribution::from_tensor(sizes, vec![0.5, 0.5], probs).unwrap();
        let report = validate(&j);
        let c = report.check(CHECK_STATE_INPUT_INDEPENDENCE).unwrap();
        assert!(!c.pass);
        assert_abs_diff_eq!(c.residual, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn perturbed_cell_reports_state_marginal_residual() {
        let j = uniform_binary_joint();
        let mut probs = j.probs().to_vec();
        let delta = 1e-6;
        probs[0] += delta;
        let z: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= z);
        let j2 = JointDistribution::from_tensor(j.sizes(), j.q_s().to_vec(), probs).unwrap();
        // P(S=0) becomes (0.5 + d)/(1 + d); residual = d/2/(1 + d)
        let expected = (0.5 + delta) / (1.0 + delta) - 0.5;
        let c = validate(&j2).check(CHECK_STATE_MARGINAL).cloned().unwrap();
        assert_abs_diff_eq!(c.residual, expected, epsilon = 1e-15);
        assert!(!c.pass);
    }

    #[test]
    fn joint_json_round_trip() {
        let j = uniform_binary_joint();
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains(r#""axes":["S","U","V","X1","X2","Y"]"#));
        let back: JointDistribution = serde_json::from_str(&text).unwrap();
        assert_eq!(back, j);
    }
}
