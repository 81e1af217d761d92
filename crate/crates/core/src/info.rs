//! Finite-alphabet information measures.
//!
//! Everything is computed in nats and converted to the requested
//! [`InfoUnit`] on the way out. Probabilities below `1e-15` are treated as
//! exact zeros before taking logarithms, so `0 log 0 = 0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on total probability mass (distributions, channel rows, joints).
pub const MASS_TOL: f64 = 1e-12;

/// Probabilities at or below this are treated as zero inside logarithms.
pub const ZERO_PROB: f64 = 1e-15;

/// Negative information values down to `-CLAMP_TOL` are clamped to zero;
/// anything more negative is reported as an error.
pub const CLAMP_TOL: f64 = 1e-9;

/// Logarithm base for reported information quantities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfoUnit {
    #[default]
    Bits,
    Nats,
}

impl InfoUnit {
    /// Converts a value expressed in nats into this unit.
    pub fn from_nats(self, value: f64) -> f64 {
        match self {
            InfoUnit::Bits => value / std::f64::consts::LN_2,
            InfoUnit::Nats => value,
        }
    }

    /// Converts a value expressed in this unit into nats.
    pub fn to_nats(self, value: f64) -> f64 {
        match self {
            InfoUnit::Bits => value * std::f64::consts::LN_2,
            InfoUnit::Nats => value,
        }
    }

    pub fn convert(self, value: f64, to: InfoUnit) -> f64 {
        to.from_nats(self.to_nats(value))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            InfoUnit::Bits => "bits",
            InfoUnit::Nats => "nats",
        }
    }
}

impl fmt::Display for InfoUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InfoUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bits" => Ok(InfoUnit::Bits),
            "nats" => Ok(InfoUnit::Nats),
            other => Err(Error::Schema(format!("unknown unit `{other}`"))),
        }
    }
}

fn check_mass(probs: &[f64], what: &str) -> std::result::Result<(), String> {
    if probs.is_empty() {
        return Err(format!("{what} is empty"));
    }
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(format!("{what} has entry {p}"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(format!("{what} sums to {total}"));
    }
    Ok(())
}

/// Probability vector over a finite alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_mass(&probs, "distribution").map_err(Error::InvalidDistribution)?;
        Ok(Self { probs })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Ok(Self {
            probs: vec![1.0 / size as f64; size],
        })
    }

    /// Point mass on `symbol`.
    pub fn point(size: usize, symbol: usize) -> Result<Self> {
        if symbol >= size {
            return Err(Error::InvalidDistribution(format!(
                "symbol {symbol} outside alphabet of size {size}"
            )));
        }
        let mut probs = vec![0.0; size];
        probs[symbol] = 1.0;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn is_uniform(&self, tol: f64) -> bool {
        let u = 1.0 / self.len() as f64;
        self.probs.iter().all(|p| (p - u).abs() <= tol)
    }
}

impl TryFrom<Vec<f64>> for DiscreteDistribution {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DiscreteDistribution> for Vec<f64> {
    fn from(d: DiscreteDistribution) -> Self {
        d.probs
    }
}

/// Row-stochastic transition matrix; row `i` is the output law given input `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Channel {
    rows: Vec<Vec<f64>>,
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidChannel("no input symbols".into()));
        }
        let width = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidChannel(format!(
                    "row {i} has {} entries, expected {width}",
                    row.len()
                )));
            }
            check_mass(row, &format!("row {i}")).map_err(Error::InvalidChannel)?;
        }
        Ok(Self { rows })
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        check_unit_interval("crossover", p)?;
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Binary erasure channel; output symbol 2 is the erasure.
    pub fn bec(q: f64) -> Result<Self> {
        check_unit_interval("erasure", q)?;
        Self::new(vec![vec![1.0 - q, 0.0, q], vec![0.0, 1.0 - q, q]])
    }

    pub fn identity(size: usize) -> Result<Self> {
        (0..size)
            .map(|i| DiscreteDistribution::point(size, i).map(Vec::from))
            .collect::<Result<Vec<_>>>()
            .and_then(Self::new)
    }

    /// Every input is mapped to the same output law.
    pub fn constant(inputs: usize, output: &DiscreteDistribution) -> Result<Self> {
        Self::new(vec![output.probs().to_vec(); inputs])
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, input: usize) -> &[f64] {
        &self.rows[input]
    }

    pub fn get(&self, input: usize, output: usize) -> f64 {
        self.rows[input][output]
    }

    /// Output law when the input is distributed as `input`.
    pub fn output_distribution(&self, input: &DiscreteDistribution) -> Result<DiscreteDistribution> {
        if input.len() != self.inputs() {
            return Err(Error::DimensionMismatch(format!(
                "input law over {} symbols, channel has {} inputs",
                input.len(),
                self.inputs()
            )));
        }
        let mut out = vec![0.0; self.outputs()];
        for (p, row) in input.probs().iter().zip(&self.rows) {
            for (o, w) in out.iter_mut().zip(row) {
                *o += p * w;
            }
        }
        renormalized(out).map(|probs| DiscreteDistribution { probs })
    }

    /// Largest entrywise absolute difference to a same-shaped channel.
    pub fn max_abs_diff(&self, other: &Channel) -> Result<f64> {
        if self.inputs() != other.inputs() || self.outputs() != other.outputs() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.inputs(),
                self.outputs(),
                other.inputs(),
                other.outputs()
            )));
        }
        Ok(self
            .rows
            .iter()
            .flatten()
            .zip(other.rows.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Row-major entries, for export.
    pub fn flat(&self) -> Vec<f64> {
        self.rows.iter().flatten().copied().collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Channel {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<Channel> for Vec<Vec<f64>> {
    fn from(c: Channel) -> Self {
        c.rows
    }
}

fn renormalized(mut v: Vec<f64>) -> Result<Vec<f64>> {
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::InvalidDistribution(format!("mass {total}")));
    }
    v.iter_mut().for_each(|p| *p /= total);
    Ok(v)
}

/// Dense joint law over several finite alphabets, stored row-major
/// (the last axis varies fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    axes: Vec<usize>,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(axes: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if axes.is_empty() || axes.contains(&0) {
            return Err(Error::InvalidDistribution(format!("bad axes {axes:?}")));
        }
        let size: usize = axes.iter().product();
        if size != probs.len() {
            return Err(Error::LengthMismatch {
                expected: size,
                got: probs.len(),
            });
        }
        check_mass(&probs, "joint").map_err(Error::InvalidDistribution)?;
        Ok(Self { axes, probs })
    }

    pub fn from_distribution(d: &DiscreteDistribution) -> Self {
        Self {
            axes: vec![d.len()],
            probs: d.probs().to_vec(),
        }
    }

    /// Joint of two independent variables.
    pub fn product(a: &DiscreteDistribution, b: &DiscreteDistribution) -> Self {
        let probs = a
            .probs()
            .iter()
            .flat_map(|pa| b.probs().iter().map(move |pb| pa * pb))
            .collect();
        Self {
            axes: vec![a.len(), b.len()],
            probs,
        }
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Appends a new last axis drawn through `channel` from `parent`, so the
    /// new variable is conditionally independent of every other axis given
    /// the parent.
    pub fn extend(&self, parent: usize, channel: &Channel) -> Result<Self> {
        self.check_axis(parent)?;
        if channel.inputs() != self.axes[parent] {
            return Err(Error::DimensionMismatch(format!(
                "axis {parent} has {} symbols, channel has {} inputs",
                self.axes[parent],
                channel.inputs()
            )));
        }
        let out = channel.outputs();
        let stride: usize = self.axes[parent + 1..].iter().product();
        let mut probs = Vec::with_capacity(self.probs.len() * out);
        for (flat, p) in self.probs.iter().enumerate() {
            let sym = (flat / stride) % self.axes[parent];
            probs.extend(channel.row(sym).iter().map(|w| p * w));
        }
        let mut axes = self.axes.clone();
        axes.push(out);
        Ok(Self { axes, probs })
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.ndim() {
            return Err(Error::AxisOutOfRange {
                axis,
                ndim: self.ndim(),
            });
        }
        Ok(())
    }

    /// Marginal over `keep` (axes taken in ascending order).
    pub fn marginal(&self, keep: &[usize]) -> Result<Self> {
        let keep = self.normalize_axes(keep)?;
        if keep.is_empty() {
            return Err(Error::InvalidDistribution("empty marginal".into()));
        }
        let probs = self.marginal_probs(&keep);
        Ok(Self {
            axes: keep.iter().map(|&a| self.axes[a]).collect(),
            probs,
        })
    }

    fn normalize_axes(&self, axes: &[usize]) -> Result<Vec<usize>> {
        let mut v = axes.to_vec();
        v.sort_unstable();
        for w in v.windows(2) {
            if w[0] == w[1] {
                return Err(Error::OverlappingAxes(w[0]));
            }
        }
        if let Some(&a) = v.last() {
            self.check_axis(a)?;
        }
        Ok(v)
    }

    fn marginal_probs(&self, keep: &[usize]) -> Vec<f64> {
        let nd = self.ndim();
        let mut strides = vec![0usize; nd];
        let mut size = 1;
        for &ax in keep.iter().rev() {
            strides[ax] = size;
            size *= self.axes[ax];
        }
        let mut out = vec![0.0; size];
        let mut idx = vec![0usize; nd];
        let mut pos = 0usize;
        for &p in &self.probs {
            out[pos] += p;
            for ax in (0..nd).rev() {
                idx[ax] += 1;
                pos += strides[ax];
                if idx[ax] < self.axes[ax] {
                    break;
                }
                pos -= strides[ax] * self.axes[ax];
                idx[ax] = 0;
            }
        }
        out
    }

    /// Entropy of the marginal over `axes`, in nats. The empty set has zero
    /// entropy.
    pub fn entropy_nats(&self, axes: &[usize]) -> Result<f64> {
        let axes = self.normalize_axes(axes)?;
        if axes.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy_nats_of(&self.marginal_probs(&axes)))
    }
}

pub(crate) fn entropy_nats_of(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > ZERO_PROB).map(|&p| -p * p.ln()).sum()
}

pub(crate) fn clamp_information(value: f64) -> Result<f64> {
    if value < -CLAMP_TOL {
        Err(Error::NegativeInformation(value))
    } else {
        Ok(value.max(0.0))
    }
}

fn disjoint(sets: &[&[usize]]) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for set in sets {
        for &a in *set {
            if !seen.insert(a) {
                return Err(Error::OverlappingAxes(a));
            }
        }
    }
    Ok(())
}

/// Shannon entropy `-Σ p log p`.
pub fn entropy(d: &DiscreteDistribution, unit: InfoUnit) -> f64 {
    unit.from_nats(entropy_nats_of(d.probs()))
}

/// `I(A;B) = H(A) + H(B) - H(A,B)` over the given axis sets of `joint`.
pub fn mutual_information(
    joint: &JointDistribution,
    axes_a: &[usize],
    axes_b: &[usize],
    unit: InfoUnit,
) -> Result<f64> {
    conditional_mutual_information(joint, axes_a, axes_b, &[], unit)
}

/// `I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C)`.
pub fn conditional_mutual_information(
    joint: &JointDistribution,
    axes_a: &[usize],
    axes_b: &[usize],
    axes_c: &[usize],
    unit: InfoUnit,
) -> Result<f64> {
    disjoint(&[axes_a, axes_b, axes_c])?;
    let ac: Vec<usize> = axes_a.iter().chain(axes_c).copied().collect();
    let bc: Vec<usize> = axes_b.iter().chain(axes_c).copied().collect();
    let abc: Vec<usize> = ac.iter().chain(axes_b).copied().collect();
    let value =
        joint.entropy_nats(&ac)? + joint.entropy_nats(&bc)? - joint.entropy_nats(&abc)? - joint.entropy_nats(axes_c)?;
    Ok(unit.from_nats(clamp_information(value)?))
}

/// Channel product `x -> first -> second`.
pub fn compose_channels(first: &Channel, second: &Channel) -> Result<Channel> {
    if first.outputs() != second.inputs() {
        return Err(Error::DimensionMismatch(format!(
            "first has {} outputs, second has {} inputs",
            first.outputs(),
            second.inputs()
        )));
    }
    let rows = first
        .rows()
        .iter()
        .map(|row| {
            let mut out = vec![0.0; second.outputs()];
            for (w, mid) in row.iter().zip(second.rows()) {
                for (o, v) in out.iter_mut().zip(mid) {
                    *o += w * v;
                }
            }
            renormalized(out)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::InvalidChannel(e.to_string()))?;
    Channel::new(rows)
}

fn check_unit_interval(name: &'static str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange {
            name,
            value: x,
            range: "[0, 1]",
        });
    }
    Ok(())
}

pub(crate) fn hb_nats(x: f64) -> f64 {
    entropy_nats_of(&[x, 1.0 - x])
}

pub(crate) fn hb_bits(x: f64) -> f64 {
    hb_nats(x) / std::f64::consts::LN_2
}

/// Binary entropy `H_b(x)`.
pub fn binary_entropy(x: f64, unit: InfoUnit) -> Result<f64> {
    check_unit_interval("x", x)?;
    Ok(unit.from_nats(hb_nats(x)))
}

/// Inverse of the binary entropy (in bits) restricted to `[0, 1/2]`.
pub fn binary_entropy_inverse(h: f64) -> Result<f64> {
    if !(-MASS_TOL..=1.0 + MASS_TOL).contains(&h) {
        return Err(Error::OutOfRange {
            name: "h",
            value: h,
            range: "[0, 1]",
        });
    }
    Ok(hb_inverse_bits(h.clamp(0.0, 1.0)))
}

pub(crate) fn hb_inverse_bits(h: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    if h >= 1.0 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if hb_bits(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub(crate) fn conv(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + (1.0 - a) * b
}

/// Binary convolution `a * b = a(1-b) + (1-a)b`.
pub fn convolve(a: f64, b: f64) -> Result<f64> {
    check_unit_interval("a", a)?;
    check_unit_interval("b", b)?;
    Ok(conv(a, b))
}
