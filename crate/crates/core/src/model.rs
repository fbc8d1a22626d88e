//! Source models and pmf algebra.
//!
//! A discrete source is a dense joint pmf over three coordinates `(X, Y, Z)`
//! stored row-major: the cell `(ix, iy, iz)` lives at
//! `((ix * |Y|) + iy) * |Z| + iz`. Which coordinate plays which role
//! (decoder side information, helper side information, eavesdropper
//! observation) is documented per setting in [`crate::regions`].
//!
//! Auxiliary random variables are attached to a model through
//! [`AuxChannel`]s, producing a [`Joint`] over any number of axes on which
//! [`crate::measures`] evaluates entropies and mutual informations.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for a pmf (or pmf row) to count as normalized.
pub const NORM_TOL: f64 = 1e-9;
/// Tolerance for Markov-chain checks.
pub const MARKOV_TOL: f64 = 1e-9;
/// Soft cap on the number of cells in a dense model.
pub const MAX_MODEL_CELLS: usize = 1_000_000;

fn within(dev: f64, tol: f64) -> bool {
    // A few ulps of slack so that values printed exactly at the tolerance pass.
    dev <= tol + 8.0 * f64::EPSILON
}

/// A source coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coord {
    X,
    Y,
    Z,
}

impl Coord {
    pub const ALL: [Coord; 3] = [Coord::X, Coord::Y, Coord::Z];

    /// Axis index inside a [`JointPmf3`].
    pub fn axis(self) -> usize {
        match self {
            Coord::X => 0,
            Coord::Y => 1,
            Coord::Z => 2,
        }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coord::X => "X",
            Coord::Y => "Y",
            Coord::Z => "Z",
        })
    }
}

/// A variable that may condition an auxiliary channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    X,
    Y,
    Z,
    U,
    V,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Var::X => "X",
            Var::Y => "Y",
            Var::Z => "Z",
            Var::U => "U",
            Var::V => "V",
        })
    }
}

/// Dense pmf over any number of finite axes, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Joint {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl Joint {
    pub fn new(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidModel("axes must have size >= 1".into()));
        }
        if probs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: probs.len(),
            });
        }
        Ok(Joint { dims, probs })
    }

    /// One-axis pmf.
    pub fn from_pmf(p: &[f64]) -> Result<Self> {
        Joint::new(vec![p.len()], p.to_vec())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    fn check_axes(&self, axes: &[usize]) -> Result<()> {
        if axes.is_empty() {
            return Err(Error::EmptyCoords);
        }
        for (i, &a) in axes.iter().enumerate() {
            if a >= self.dims.len() {
                return Err(Error::InvalidParameter(format!(
                    "axis {a} out of range for rank {}",
                    self.dims.len()
                )));
            }
            if axes[..i].contains(&a) {
                return Err(Error::InvalidParameter(format!("axis {a} repeated")));
            }
        }
        Ok(())
    }

    /// Marginal over `axes`, with output axes in the order given.
    pub fn marginal(&self, axes: &[usize]) -> Result<Joint> {
        self.check_axes(axes)?;
        let out_dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let out_len: usize = out_dims.iter().product();
        // Stride of each source axis within the output array (0 if summed out).
        let mut weight = vec![0usize; self.dims.len()];
        let mut s = 1;
        for (j, &a) in axes.iter().enumerate().rev() {
            weight[a] = s;
            s *= out_dims[j];
        }
        let mut out = vec![0.0; out_len];
        let mut idx = vec![0usize; self.dims.len()];
        let mut o = 0usize;
        for &p in &self.probs {
            out[o] += p;
            // Increment the multi-index, keeping `o` in sync.
            for ax in (0..self.dims.len()).rev() {
                idx[ax] += 1;
                o += weight[ax];
                if idx[ax] < self.dims[ax] {
                    break;
                }
                o -= weight[ax] * idx[ax];
                idx[ax] = 0;
            }
        }
        Ok(Joint {
            dims: out_dims,
            probs: out,
        })
    }

    /// Appends a new last axis distributed as `channel` given the listed axes.
    pub fn attach(&self, channel: &AuxChannel, input_axes: &[usize]) -> Result<Joint> {
        self.check_axes(input_axes)?;
        let in_dims: Vec<usize> = input_axes.iter().map(|&a| self.dims[a]).collect();
        if in_dims != channel.input_dims {
            return Err(Error::InvalidChannel(format!(
                "channel expects input sizes {:?}, joint provides {:?}",
                channel.input_dims, in_dims
            )));
        }
        let mut weight = vec![0usize; self.dims.len()];
        let mut s = 1;
        for (j, &a) in input_axes.iter().enumerate().rev() {
            weight[a] = s;
            s *= in_dims[j];
        }
        let m = channel.aux_size;
        let mut out = Vec::with_capacity(self.probs.len() * m);
        let mut idx = vec![0usize; self.dims.len()];
        let mut row = 0usize;
        for &p in &self.probs {
            let r = channel.row(row);
            out.extend(r.iter().map(|&c| p * c));
            for ax in (0..self.dims.len()).rev() {
                idx[ax] += 1;
                row += weight[ax];
                if idx[ax] < self.dims[ax] {
                    break;
                }
                row -= weight[ax] * idx[ax];
                idx[ax] = 0;
            }
        }
        let mut dims = self.dims.clone();
        dims.push(m);
        Ok(Joint { dims, probs: out })
    }

    /// Flat index of a multi-index.
    pub fn index(&self, cell: &[usize]) -> usize {
        cell.iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }
}

/// One invariant violation found by [`JointPmf3::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    EmptyAlphabet(Coord),
    Shape { expected: usize, found: usize },
    NonFinite { cell: (String, String, String) },
    Negative { cell: (String, String, String), value: f64 },
    NotNormalized { sum: f64 },
    DuplicateLabel { coord: Coord, label: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyAlphabet(c) => write!(f, "alphabet of {c} is empty"),
            Violation::Shape { expected, found } => {
                write!(f, "probs has {found} entries, alphabets need {expected}")
            }
            Violation::NonFinite { cell } => {
                write!(f, "non-finite mass at ({},{},{})", cell.0, cell.1, cell.2)
            }
            Violation::Negative { cell, value } => write!(
                f,
                "negative mass at ({},{},{}): {value}",
                cell.0, cell.1, cell.2
            ),
            Violation::NotNormalized { sum } => write!(f, "probabilities sum to {sum}"),
            Violation::DuplicateLabel { coord, label } => {
                write!(f, "label {label:?} repeated in alphabet of {coord}")
            }
        }
    }
}

/// Result of [`JointPmf3::validate`]; empty means the model is valid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Outcome of a Markov-chain check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkovCheck {
    pub max_violation: f64,
    pub pass: bool,
}

/// Discrete joint pmf p(x, y, z) with symbol labels.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPmf3 {
    alphabet_x: Vec<String>,
    alphabet_y: Vec<String>,
    alphabet_z: Vec<String>,
    probs: Vec<f64>,
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

impl JointPmf3 {
    /// Builds a model, failing on any invariant violation.
    pub fn new(
        alphabet_x: Vec<String>,
        alphabet_y: Vec<String>,
        alphabet_z: Vec<String>,
        probs: Vec<f64>,
    ) -> Result<Self> {
        let m = Self::new_unchecked(alphabet_x, alphabet_y, alphabet_z, probs);
        let report = m.validate();
        match report.violations.first() {
            None => Ok(m),
            Some(Violation::Shape { expected, found }) => Err(Error::DimensionMismatch {
                expected: *expected,
                found: *found,
            }),
            Some(Violation::NotNormalized { sum }) => Err(Error::NotNormalized {
                sum: *sum,
                tol: NORM_TOL,
            }),
            Some(v) => Err(Error::InvalidModel(v.to_string())),
        }
    }

    /// Builds a model without checks; call [`JointPmf3::validate`] to inspect it.
    pub fn new_unchecked(
        alphabet_x: Vec<String>,
        alphabet_y: Vec<String>,
        alphabet_z: Vec<String>,
        probs: Vec<f64>,
    ) -> Self {
        JointPmf3 {
            alphabet_x,
            alphabet_y,
            alphabet_z,
            probs,
        }
    }

    /// Model with labels `"0", "1", ...` on every coordinate.
    pub fn with_sizes(nx: usize, ny: usize, nz: usize, probs: Vec<f64>) -> Result<Self> {
        Self::new(
            default_labels(nx),
            default_labels(ny),
            default_labels(nz),
            probs,
        )
    }

    /// Builds p(x,y)·p(z|y), which satisfies X − Y − Z by construction.
    pub fn from_xy_and_z_given_y(
        nx: usize,
        ny: usize,
        pxy: &[f64],
        pz_given_y: &[Vec<f64>],
    ) -> Result<Self> {
        if pxy.len() != nx * ny || pz_given_y.len() != ny {
            return Err(Error::DimensionMismatch {
                expected: nx * ny,
                found: pxy.len(),
            });
        }
        let nz = pz_given_y.first().map_or(0, Vec::len);
        let mut probs = Vec::with_capacity(nx * ny * nz);
        for x in 0..nx {
            for (y, row) in pz_given_y.iter().enumerate() {
                if row.len() != nz {
                    return Err(Error::DimensionMismatch {
                        expected: nz,
                        found: row.len(),
                    });
                }
                probs.extend(row.iter().map(|&c| pxy[x * ny + y] * c));
            }
        }
        Self::with_sizes(nx, ny, nz, probs)
    }

    /// Builds p(x,z)·p(y|z), which satisfies X − Z − Y by construction.
    pub fn from_xz_and_y_given_z(
        nx: usize,
        nz: usize,
        pxz: &[f64],
        py_given_z: &[Vec<f64>],
    ) -> Result<Self> {
        if pxz.len() != nx * nz || py_given_z.len() != nz {
            return Err(Error::DimensionMismatch {
                expected: nx * nz,
                found: pxz.len(),
            });
        }
        let ny = py_given_z.first().map_or(0, Vec::len);
        let mut probs = vec![0.0; nx * ny * nz];
        for x in 0..nx {
            for (z, row) in py_given_z.iter().enumerate() {
                if row.len() != ny {
                    return Err(Error::DimensionMismatch {
                        expected: ny,
                        found: row.len(),
                    });
                }
                for (y, &c) in row.iter().enumerate() {
                    probs[(x * ny + y) * nz + z] = pxz[x * nz + z] * c;
                }
            }
        }
        Self::with_sizes(nx, ny, nz, probs)
    }

    /// Doubly symmetric binary source with crossover `p`, extended by `Z = Y`.
    pub fn dsbs_z_eq_y(p: f64) -> Result<Self> {
        let pxy = [0.5 * (1.0 - p), 0.5 * p, 0.5 * p, 0.5 * (1.0 - p)];
        Self::from_xy_and_z_given_y(2, 2, &pxy, &[vec![1.0, 0.0], vec![0.0, 1.0]])
    }

    /// Doubly symmetric binary source with crossover `p` and a constant `Z`.
    pub fn dsbs_z_const(p: f64) -> Result<Self> {
        let pxy = [0.5 * (1.0 - p), 0.5 * p, 0.5 * p, 0.5 * (1.0 - p)];
        Self::from_xy_and_z_given_y(2, 2, &pxy, &[vec![1.0], vec![1.0]])
    }

    pub fn alphabet(&self, c: Coord) -> &[String] {
        match c {
            Coord::X => &self.alphabet_x,
            Coord::Y => &self.alphabet_y,
            Coord::Z => &self.alphabet_z,
        }
    }

    pub fn size(&self, c: Coord) -> usize {
        self.alphabet(c).len()
    }

    pub fn sizes(&self) -> [usize; 3] {
        [self.alphabet_x.len(), self.alphabet_y.len(), self.alphabet_z.len()]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn p(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        let [_, ny, nz] = self.sizes();
        self.probs[(ix * ny + iy) * nz + iz]
    }

    /// Lists every invariant violation; never fails.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for c in Coord::ALL {
            let alpha = self.alphabet(c);
            if alpha.is_empty() {
                violations.push(Violation::EmptyAlphabet(c));
            }
            for (i, label) in alpha.iter().enumerate() {
                if alpha[..i].contains(label) {
                    violations.push(Violation::DuplicateLabel {
                        coord: c,
                        label: label.clone(),
                    });
                }
            }
        }
        let expected: usize = self.sizes().iter().product();
        if self.probs.len() != expected {
            violations.push(Violation::Shape {
                expected,
                found: self.probs.len(),
            });
            return ValidationReport { violations };
        }
        if expected == 0 {
            return ValidationReport { violations };
        }
        let [_, ny, nz] = self.sizes();
        let label = |i: usize| {
            (
                self.alphabet_x[i / (ny * nz)].clone(),
                self.alphabet_y[(i / nz) % ny].clone(),
                self.alphabet_z[i % nz].clone(),
            )
        };
        let mut finite = true;
        for (i, &p) in self.probs.iter().enumerate() {
            if !p.is_finite() {
                finite = false;
                violations.push(Violation::NonFinite { cell: label(i) });
            } else if p < 0.0 {
                violations.push(Violation::Negative {
                    cell: label(i),
                    value: p,
                });
            }
        }
        if finite {
            let sum: f64 = self.probs.iter().sum();
            if !within((sum - 1.0).abs(), NORM_TOL) {
                violations.push(Violation::NotNormalized { sum });
            }
        }
        ValidationReport { violations }
    }

    /// The model as a three-axis [`Joint`] with axes `(X, Y, Z)`.
    pub fn joint(&self) -> Joint {
        Joint {
            dims: self.sizes().to_vec(),
            probs: self.probs.clone(),
        }
    }

    /// Marginal pmf over `coords`, axes in the order given.
    pub fn marginal(&self, coords: &[Coord]) -> Result<Joint> {
        let axes: Vec<usize> = coords.iter().map(|c| c.axis()).collect();
        self.joint().marginal(&axes)
    }

    /// Checks the chain `a − b − c`, i.e. a and c independent given b.
    ///
    /// The reported violation is the largest `|p(a,b,c)p(b) − p(a,b)p(b,c)|`.
    pub fn check_markov(&self, chain: [Coord; 3]) -> MarkovCheck {
        let [a, b, c] = chain;
        let distinct = a != b && b != c && a != c;
        assert!(distinct, "Markov chain needs three distinct coordinates");
        let j = self.joint();
        let abc = j.marginal(&[a.axis(), b.axis(), c.axis()]).expect("valid axes");
        let pb = j.marginal(&[b.axis()]).expect("valid axes");
        let pab = j.marginal(&[a.axis(), b.axis()]).expect("valid axes");
        let pbc = j.marginal(&[b.axis(), c.axis()]).expect("valid axes");
        let (na, nb, nc) = (abc.dims[0], abc.dims[1], abc.dims[2]);
        let mut max_violation: f64 = 0.0;
        for ia in 0..na {
            for ib in 0..nb {
                for ic in 0..nc {
                    let lhs = abc.probs[(ia * nb + ib) * nc + ic] * pb.probs[ib];
                    let rhs = pab.probs[ia * nb + ib] * pbc.probs[ib * nc + ic];
                    max_violation = max_violation.max((lhs - rhs).abs());
                }
            }
        }
        MarkovCheck {
            max_violation,
            pass: within(max_violation, MARKOV_TOL),
        }
    }

    /// Errors with [`Error::MarkovViolated`] unless `chain` holds.
    pub fn require_markov(&self, chain: [Coord; 3]) -> Result<()> {
        let check = self.check_markov(chain);
        if check.pass {
            Ok(())
        } else {
            Err(Error::MarkovViolated {
                chain: format!("{}-{}-{}", chain[0], chain[1], chain[2]),
                violation: check.max_violation,
            })
        }
    }
}

/// Markov structure of a Gaussian chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainOrder {
    /// `X = Y + N1`, `Z = X + N2`; the root variance is that of `Y`.
    #[serde(rename = "Y_X_Z")]
    YXZ,
    /// `Y = X + N1`, `Z = Y + N2`; the root variance is that of `X`.
    #[serde(rename = "X_Y_Z")]
    XYZ,
}

impl fmt::Display for ChainOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChainOrder::YXZ => "Y_X_Z",
            ChainOrder::XYZ => "X_Y_Z",
        })
    }
}

/// Jointly Gaussian chain built from a root and two independent noises.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianChain {
    order: ChainOrder,
    var_root: f64,
    var_n1: f64,
    var_n2: f64,
}

impl GaussianChain {
    pub fn new(order: ChainOrder, var_root: f64, var_n1: f64, var_n2: f64) -> Result<Self> {
        for (name, v) in [("var_root", var_root), ("var_n1", var_n1), ("var_n2", var_n2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(GaussianChain {
            order,
            var_root,
            var_n1,
            var_n2,
        })
    }

    pub fn order(&self) -> ChainOrder {
        self.order
    }

    pub fn var_root(&self) -> f64 {
        self.var_root
    }

    pub fn var_n1(&self) -> f64 {
        self.var_n1
    }

    pub fn var_n2(&self) -> f64 {
        self.var_n2
    }

    /// Same chain with every variance multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.order, self.var_root * c, self.var_n1 * c, self.var_n2 * c)
    }

    pub(crate) fn require_order(&self, order: ChainOrder) -> Result<()> {
        if self.order == order {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "needs a {order} chain, got {}",
                self.order
            )))
        }
    }
}

/// A rate-distortion-leakage tuple in bits per symbol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RdlPoint {
    pub r1: f64,
    pub r2: f64,
    /// Private-link rate; only present for triangular settings.
    pub r3: Option<f64>,
    pub d: f64,
    pub delta: f64,
}

impl RdlPoint {
    pub fn new(r1: f64, r2: f64, r3: Option<f64>, d: f64, delta: f64) -> Result<Self> {
        let p = RdlPoint {
            r1,
            r2,
            r3,
            d,
            delta,
        };
        p.check()?;
        Ok(p)
    }

    /// Errors unless every present coordinate is finite and nonnegative.
    pub fn check(&self) -> Result<()> {
        let fields = [
            ("r1", Some(self.r1)),
            ("r2", Some(self.r2)),
            ("r3", self.r3),
            ("d", Some(self.d)),
            ("delta", Some(self.delta)),
        ];
        for (name, v) in fields {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "{name} must be finite and >= 0, got {v}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Conditional pmf of an auxiliary variable given one or more inputs.
///
/// Rows are indexed row-major over the inputs in the listed order.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxChannel {
    inputs: Vec<Var>,
    input_dims: Vec<usize>,
    aux_size: usize,
    probs: Vec<f64>,
}

impl AuxChannel {
    pub fn new(
        inputs: Vec<Var>,
        input_dims: Vec<usize>,
        aux_size: usize,
        probs: Vec<f64>,
    ) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != input_dims.len() {
            return Err(Error::InvalidChannel(
                "one size per input variable is required".into(),
            ));
        }
        if aux_size == 0 || input_dims.contains(&0) {
            return Err(Error::InvalidChannel("alphabet sizes must be >= 1".into()));
        }
        let rows: usize = input_dims.iter().product();
        if probs.len() != rows * aux_size {
            return Err(Error::DimensionMismatch {
                expected: rows * aux_size,
                found: probs.len(),
            });
        }
        for r in 0..rows {
            let row = &probs[r * aux_size..(r + 1) * aux_size];
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidChannel(format!(
                    "row {r} has a negative or non-finite entry"
                )));
            }
            let s: f64 = row.iter().sum();
            if !within((s - 1.0).abs(), NORM_TOL) {
                return Err(Error::InvalidChannel(format!("row {r} sums to {s}")));
            }
        }
        Ok(AuxChannel {
            inputs,
            input_dims,
            aux_size,
            probs,
        })
    }

    /// Builds a channel from explicit rows.
    pub fn from_rows(inputs: Vec<Var>, input_dims: Vec<usize>, rows: &[Vec<f64>]) -> Result<Self> {
        let aux_size = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != aux_size) {
            return Err(Error::InvalidChannel("ragged rows".into()));
        }
        Self::new(inputs, input_dims, aux_size, rows.concat())
    }

    /// Single-symbol output regardless of the input.
    pub fn constant(inputs: Vec<Var>, input_dims: Vec<usize>) -> Self {
        let rows: usize = input_dims.iter().product();
        Self::new(inputs, input_dims, 1, vec![1.0; rows]).expect("constant channel is valid")
    }

    /// Deterministic channel `aux = f(input row)` over `aux_size` symbols.
    pub fn deterministic(
        inputs: Vec<Var>,
        input_dims: Vec<usize>,
        aux_size: usize,
        f: impl Fn(usize) -> usize,
    ) -> Result<Self> {
        let rows: usize = input_dims.iter().product();
        let mut probs = vec![0.0; rows * aux_size];
        for r in 0..rows {
            let a = f(r);
            if a >= aux_size {
                return Err(Error::InvalidChannel(format!(
                    "row {r} maps to {a}, outside 0..{aux_size}"
                )));
            }
            probs[r * aux_size + a] = 1.0;
        }
        Self::new(inputs, input_dims, aux_size, probs)
    }

    /// Output equals the input symbol.
    pub fn identity(input: Var, size: usize) -> Self {
        Self::deterministic(vec![input], vec![size], size, |r| r).expect("identity is valid")
    }

    /// Binary symmetric channel with crossover `flip`.
    pub fn bsc(input: Var, flip: f64) -> Result<Self> {
        Self::new(
            vec![input],
            vec![2],
            2,
            vec![1.0 - flip, flip, flip, 1.0 - flip],
        )
    }

    /// Erasure channel: output equals the input with probability `p`, else the
    /// extra symbol `size`.
    pub fn erasure(input: Var, size: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidChannel(format!("erasure keep prob {p}")));
        }
        let m = size + 1;
        let mut probs = vec![0.0; size * m];
        for r in 0..size {
            probs[r * m + r] = p;
            probs[r * m + size] = 1.0 - p;
        }
        Self::new(vec![input], vec![size], m, probs)
    }

    pub fn inputs(&self) -> &[Var] {
        &self.inputs
    }

    pub fn input_dims(&self) -> &[usize] {
        &self.input_dims
    }

    pub fn input_card(&self) -> usize {
        self.input_dims.iter().product()
    }

    pub fn aux_size(&self) -> usize {
        self.aux_size
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.probs[r * self.aux_size..(r + 1) * self.aux_size]
    }

    /// Errors unless the channel's inputs are exactly `inputs`.
    pub fn require_inputs(&self, inputs: &[Var], dims: &[usize]) -> Result<()> {
        if self.inputs != inputs {
            return Err(Error::InvalidChannel(format!(
                "expected a channel given {}, got one given {}",
                join_vars(inputs),
                join_vars(&self.inputs)
            )));
        }
        if self.input_dims != dims {
            return Err(Error::InvalidChannel(format!(
                "input sizes {:?} do not match {:?}",
                self.input_dims, dims
            )));
        }
        Ok(())
    }

    /// Errors when the auxiliary alphabet exceeds `cap`.
    pub fn require_cap(&self, which: &'static str, cap: usize) -> Result<()> {
        if self.aux_size > cap {
            Err(Error::CapExceeded {
                which,
                size: self.aux_size,
                cap,
            })
        } else {
            Ok(())
        }
    }
}

fn join_vars(v: &[Var]) -> String {
    v.iter().map(Var::to_string).collect::<Vec<_>>().join(",")
}

/// Either kind of source model.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceModel {
    Discrete(JointPmf3),
    Gaussian(GaussianChain),
}

/// A JSON number written as a decimal string; bare JSON numbers are accepted
/// on input.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DecimalNum {
    Str(String),
    Num(f64),
}

impl DecimalNum {
    pub fn from_f64(x: f64) -> Self {
        // Rust's float Display is the shortest string that parses back exactly.
        DecimalNum::Str(format!("{x}"))
    }

    pub fn value(&self) -> Result<f64> {
        match self {
            DecimalNum::Num(x) => Ok(*x),
            DecimalNum::Str(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Malformed(format!("not a decimal number: {s:?}"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Alphabets {
    x: Vec<String>,
    y: Vec<String>,
    z: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum ModelFile {
    Discrete {
        alphabets: Alphabets,
        probs: Vec<DecimalNum>,
    },
    Gaussian {
        order: ChainOrder,
        var_root: DecimalNum,
        var_n1: DecimalNum,
        var_n2: DecimalNum,
    },
}

/// Parses a model from its JSON text.
pub fn parse_model(text: &str) -> Result<SourceModel> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    match file {
        ModelFile::Discrete { alphabets, probs } => {
            let probs = probs
                .iter()
                .map(DecimalNum::value)
                .collect::<Result<Vec<_>>>()?;
            Ok(SourceModel::Discrete(JointPmf3::new(
                alphabets.x,
                alphabets.y,
                alphabets.z,
                probs,
            )?))
        }
        ModelFile::Gaussian {
            order,
            var_root,
            var_n1,
            var_n2,
        } => Ok(SourceModel::Gaussian(GaussianChain::new(
            order,
            var_root.value()?,
            var_n1.value()?,
            var_n2.value()?,
        )?)),
    }
}

/// Serializes a model to pretty JSON with decimal-string numbers.
pub fn model_to_json(model: &SourceModel) -> String {
    let file = match model {
        SourceModel::Discrete(m) => ModelFile::Discrete {
            alphabets: Alphabets {
                x: m.alphabet_x.clone(),
                y: m.alphabet_y.clone(),
                z: m.alphabet_z.clone(),
            },
            probs: m.probs.iter().map(|&p| DecimalNum::from_f64(p)).collect(),
        },
        SourceModel::Gaussian(g) => ModelFile::Gaussian {
            order: g.order,
            var_root: DecimalNum::from_f64(g.var_root),
            var_n1: DecimalNum::from_f64(g.var_n1),
            var_n2: DecimalNum::from_f64(g.var_n2),
        },
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SourceModel> {
    parse_model(&std::fs::read_to_string(path)?)
}

pub fn save_model(model: &SourceModel, path: impl AsRef<Path>) -> Result<()> {
    let mut text = model_to_json(model);
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
