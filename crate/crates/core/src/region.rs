//! Authentication-system model and rate-region evaluation.
//!
//! A model consists of the source law `P_X`, the enrollment channel
//! `P_{X̃|X}` and the two authentication-channel marginals `P_{Y|X}` and
//! `P_{Z|X}`. Only marginals are accepted; the joint `P_{YZ|X}` is
//! assembled as physically degraded (`Z` drawn from `Y` through the
//! classifier's witness) when the verdict allows it, and as conditionally
//! independent given `X` otherwise. All region quantities depend on the
//! marginals alone, so the choice only matters for diagnostics such as
//! `I(Y;U|Z)`.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classify::{classify_ac, ChannelOrderVerdict, ChannelRelation, ClassifierSettings, Witness};
use crate::error::{Error, Result};
use crate::info::{
    clamp_information, conditional_mutual_information, mutual_information, Channel, DiscreteDistribution, InfoUnit,
    JointDistribution,
};
use crate::rng;

/// Tolerance used when deciding Pareto dominance and region membership.
pub const DOMINANCE_TOL: f64 = 1e-9;

/// Axis layout of the joint built by [`one_aux_joint`].
pub mod axis {
    pub const X: usize = 0;
    pub const X_TILDE: usize = 1;
    pub const U: usize = 2;
    pub const Y: usize = 3;
    pub const Z: usize = 4;
}

/// Axis layout of the joint built by [`two_aux_joint`].
pub mod axis2 {
    pub const X: usize = 0;
    pub const X_TILDE: usize = 1;
    pub const U: usize = 2;
    pub const V: usize = 3;
    pub const Y: usize = 4;
    pub const Z: usize = 5;
}

/// Which region formula applies to a model, driven by its verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionClass {
    /// Z degraded w.r.t. Y.
    A1,
    /// Y less noisy than Z.
    A2,
    /// The eavesdropper's channel dominates; no key can be generated.
    A3,
    /// More capable only, or unordered.
    Unsupported,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuthModel {
    pub px: DiscreteDistribution,
    pub ec: Channel,
    pub ac_y: Channel,
    pub ac_z: Channel,
    pub verdict: ChannelOrderVerdict,
}

impl AuthModel {
    /// Validates alphabets and classifies the authentication channels.
    pub fn new(
        px: DiscreteDistribution,
        ec: Channel,
        ac_y: Channel,
        ac_z: Channel,
        settings: &ClassifierSettings,
    ) -> Result<Self> {
        check_alphabets(&px, &ec, &ac_y, &ac_z)?;
        let verdict = classify_ac(&ac_y, &ac_z, settings)?;
        Ok(Self {
            px,
            ec,
            ac_y,
            ac_z,
            verdict,
        })
    }

    /// Builds a model with a verdict supplied by the caller.
    pub fn with_verdict(
        px: DiscreteDistribution,
        ec: Channel,
        ac_y: Channel,
        ac_z: Channel,
        verdict: ChannelOrderVerdict,
    ) -> Result<Self> {
        check_alphabets(&px, &ec, &ac_y, &ac_z)?;
        Ok(Self {
            px,
            ec,
            ac_y,
            ac_z,
            verdict,
        })
    }

    pub fn x_size(&self) -> usize {
        self.px.len()
    }

    pub fn x_tilde_size(&self) -> usize {
        self.ec.outputs()
    }

    /// Cardinality bound `|U| ≤ |X̃| + 3`.
    pub fn max_aux_size(&self) -> usize {
        self.x_tilde_size() + 3
    }

    pub fn region_class(&self) -> RegionClass {
        match self.verdict.relation {
            ChannelRelation::DegradedZWrtY => RegionClass::A1,
            ChannelRelation::LessNoisyYOverZ => RegionClass::A2,
            ChannelRelation::DegradedYWrtZ | ChannelRelation::LessNoisyZOverY => RegionClass::A3,
            ChannelRelation::MoreCapableY | ChannelRelation::MoreCapableZ | ChannelRelation::Unordered => {
                RegionClass::Unsupported
            }
        }
    }

    fn degraded_witness(&self) -> Option<&Channel> {
        match (&self.verdict.relation, &self.verdict.witness) {
            (ChannelRelation::DegradedZWrtY, Some(Witness::IntermediateChannel { channel, .. })) => Some(channel),
            _ => None,
        }
    }

    /// `I(X;Z)`, the privacy-leakage floor shared by every region.
    pub fn xz_information(&self, unit: InfoUnit) -> Result<f64> {
        let j = JointDistribution::from_distribution(&self.px).extend(0, &self.ac_z)?;
        mutual_information(&j, &[0], &[1], unit)
    }

    /// SHA-256 of the canonical JSON form of the four model laws.
    pub fn hash(&self) -> String {
        #[derive(Serialize)]
        struct Laws<'a> {
            px: &'a DiscreteDistribution,
            ec: &'a Channel,
            ac_y: &'a Channel,
            ac_z: &'a Channel,
        }
        let json = serde_json::to_vec(&Laws {
            px: &self.px,
            ec: &self.ec,
            ac_y: &self.ac_y,
            ac_z: &self.ac_z,
        })
        .expect("model laws serialize");
        hex::encode(Sha256::digest(&json))
    }

    fn require_one_aux(&self) -> Result<()> {
        match self.region_class() {
            RegionClass::A1 | RegionClass::A2 => Ok(()),
            RegionClass::A3 => Err(Error::UnsupportedClass(format!(
                "verdict {:?} favors the eavesdropper; only the A3 corner applies",
                self.verdict.relation
            ))),
            RegionClass::Unsupported => Err(Error::UnsupportedClass(format!(
                "verdict {:?}: no single-auxiliary characterization is known for this class",
                self.verdict.relation
            ))),
        }
    }
}

fn check_alphabets(px: &DiscreteDistribution, ec: &Channel, ac_y: &Channel, ac_z: &Channel) -> Result<()> {
    for (name, ch) in [("ec", ec), ("ac_y", ac_y), ("ac_z", ac_z)] {
        if ch.inputs() != px.len() {
            return Err(Error::DimensionMismatch(format!(
                "{name} has {} inputs but the source has {} symbols",
                ch.inputs(),
                px.len()
            )));
        }
    }
    Ok(())
}

/// Joint law of `(X, X̃, U, Y, Z)` under `U − X̃ − X − (Y, Z)`.
pub fn one_aux_joint(model: &AuthModel, test: &Channel) -> Result<JointDistribution> {
    if test.inputs() != model.x_tilde_size() {
        return Err(Error::DimensionMismatch(format!(
            "test channel has {} inputs, |X̃| = {}",
            test.inputs(),
            model.x_tilde_size()
        )));
    }
    let j = JointDistribution::from_distribution(&model.px)
        .extend(axis::X, &model.ec)?
        .extend(axis::X_TILDE, test)?
        .extend(axis::X, &model.ac_y)?;
    match model.degraded_witness() {
        Some(w) => j.extend(axis::Y, w),
        None => j.extend(axis::X, &model.ac_z),
    }
}

/// Joint law of `(X, X̃, U, V, Y, Z)` under `V − U − X̃ − X − (Y, Z)`.
pub fn two_aux_joint(model: &AuthModel, test_u: &Channel, test_v: &Channel) -> Result<JointDistribution> {
    if test_u.inputs() != model.x_tilde_size() || test_v.inputs() != test_u.outputs() {
        return Err(Error::DimensionMismatch(
            "test channel chain does not fit the model".into(),
        ));
    }
    let j = JointDistribution::from_distribution(&model.px)
        .extend(axis2::X, &model.ec)?
        .extend(axis2::X_TILDE, test_u)?
        .extend(axis2::U, test_v)?
        .extend(axis2::X, &model.ac_y)?;
    match model.degraded_witness() {
        Some(w) => j.extend(axis2::Y, w),
        None => j.extend(axis2::X, &model.ac_z),
    }
}

/// How a corner was generated: a structured-family parameter or a random
/// sample index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CornerParam {
    Beta(f64),
    Alpha(f64),
    Sample(u64),
}

impl CornerParam {
    pub fn value(&self) -> f64 {
        match *self {
            CornerParam::Beta(b) => b,
            CornerParam::Alpha(a) => a,
            CornerParam::Sample(i) => i as f64,
        }
    }
}

/// Achievable `(R_S, R_J, R_L)` corner and the test channel behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCorner {
    pub rs: f64,
    pub rj: f64,
    pub rl: f64,
    /// Secret-key rate before clamping at zero.
    pub rs_unclamped: f64,
    pub unit: InfoUnit,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_channel: Option<Channel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second_test_channel: Option<Channel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<CornerParam>,
}

impl RateCorner {
    pub fn new(rs_unclamped: f64, rj: f64, rl: f64, unit: InfoUnit) -> Self {
        Self {
            rs: rs_unclamped.max(0.0),
            rj,
            rl,
            rs_unclamped,
            unit,
            test_channel: None,
            second_test_channel: None,
            param: None,
        }
    }

    pub fn with_test_channel(mut self, test: Channel) -> Self {
        self.test_channel = Some(test);
        self
    }

    pub fn with_param(mut self, param: CornerParam) -> Self {
        self.param = Some(param);
        self
    }

    pub fn point(&self) -> RatePoint {
        RatePoint {
            rs: self.rs,
            rj: self.rj,
            rl: self.rl,
        }
    }

    pub fn u_size(&self) -> Option<usize> {
        self.test_channel.as_ref().map(Channel::outputs)
    }

    /// Same corner expressed in another unit.
    pub fn in_unit(&self, unit: InfoUnit) -> Self {
        let c = |v: f64| self.unit.convert(v, unit);
        Self {
            rs: c(self.rs),
            rj: c(self.rj),
            rl: c(self.rl),
            rs_unclamped: c(self.rs_unclamped),
            unit,
            ..self.clone()
        }
    }
}

/// Bare rate triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub rs: f64,
    pub rj: f64,
    pub rl: f64,
}

/// How far `c` is from being dominated by `d`: zero when `d` has at least
/// the key rate of `c` at no more storage and leakage.
pub fn dominance_slack(c: &RatePoint, d: &RatePoint) -> f64 {
    (c.rs - d.rs).max(d.rj - c.rj).max(d.rl - c.rl).max(0.0)
}

/// `a` dominates `b`: no worse in every coordinate and better in one,
/// both judged with [`DOMINANCE_TOL`].
pub fn dominates(a: &RatePoint, b: &RatePoint) -> bool {
    let no_worse = a.rs >= b.rs - DOMINANCE_TOL && a.rj <= b.rj + DOMINANCE_TOL && a.rl <= b.rl + DOMINANCE_TOL;
    let better = a.rs > b.rs + DOMINANCE_TOL || a.rj < b.rj - DOMINANCE_TOL || a.rl < b.rl - DOMINANCE_TOL;
    no_worse && better
}

fn equivalent(a: &RatePoint, b: &RatePoint) -> bool {
    (a.rs - b.rs).abs() <= DOMINANCE_TOL && (a.rj - b.rj).abs() <= DOMINANCE_TOL && (a.rl - b.rl).abs() <= DOMINANCE_TOL
}

fn corner_order(a: &RateCorner, b: &RateCorner) -> Ordering {
    b.rs.total_cmp(&a.rs)
        .then(a.rj.total_cmp(&b.rj))
        .then(a.rl.total_cmp(&b.rl))
        .then_with(|| {
            let pa = a.param.map(|p| p.value()).unwrap_or(f64::NEG_INFINITY);
            let pb = b.param.map(|p| p.value()).unwrap_or(f64::NEG_INFINITY);
            pa.total_cmp(&pb)
        })
        .then_with(|| {
            let fa = a.test_channel.as_ref().map(Channel::flat).unwrap_or_default();
            let fb = b.test_channel.as_ref().map(Channel::flat).unwrap_or_default();
            fa.len().cmp(&fb.len()).then_with(|| {
                fa.iter()
                    .zip(&fb)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
        })
}

/// Keeps the non-dominated corners. Input order does not matter: corners
/// are first sorted by a total order, and among tolerance-equivalent
/// corners the first in that order survives.
pub fn pareto_filter(mut corners: Vec<RateCorner>) -> Vec<RateCorner> {
    corners.sort_by(corner_order);
    let mut front: Vec<RateCorner> = Vec::new();
    for c in corners {
        let p = c.point();
        if front.iter().any(|f| {
            let q = f.point();
            dominates(&q, &p) || equivalent(&q, &p)
        }) {
            continue;
        }
        front.retain(|f| !dominates(&p, &f.point()));
        front.push(c);
    }
    front
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMetadata {
    /// Which region or search produced the corners.
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<ChannelOrderVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Pareto-filtered set of corners.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionBoundary {
    pub unit: InfoUnit,
    pub corners: Vec<RateCorner>,
    pub metadata: BoundaryMetadata,
}

impl RegionBoundary {
    /// Filters `corners` (all in `unit`) and wraps them.
    pub fn from_corners(corners: Vec<RateCorner>, unit: InfoUnit, metadata: BoundaryMetadata) -> Result<Self> {
        if let Some(c) = corners.iter().find(|c| c.unit != unit) {
            return Err(Error::UnitMismatch(c.unit.to_string(), unit.to_string()));
        }
        Ok(Self {
            unit,
            corners: pareto_filter(corners),
            metadata,
        })
    }

    pub fn max_rs(&self) -> Option<&RateCorner> {
        self.corners.iter().max_by(|a, b| a.rs.total_cmp(&b.rs))
    }

    pub fn in_unit(&self, unit: InfoUnit) -> Self {
        Self {
            unit,
            corners: self.corners.iter().map(|c| c.in_unit(unit)).collect(),
            metadata: self.metadata.clone(),
        }
    }
}

fn check_aux_size(size: usize, cap: usize) -> Result<()> {
    if size > cap {
        return Err(Error::CardinalityExceeded { size, cap });
    }
    Ok(())
}

/// Rate corner of the single-auxiliary region for test channel `P_{U|X̃}`:
/// `R_S = I(Y;U) − I(Z;U)`, `R_J = I(X̃;U) − I(Y;U)`,
/// `R_L = I(X;U) − I(Y;U) + I(X;Z)`.
pub fn eval_one_aux(model: &AuthModel, test: &Channel, unit: InfoUnit) -> Result<RateCorner> {
    model.require_one_aux()?;
    check_aux_size(test.outputs(), model.max_aux_size())?;
    let j = one_aux_joint(model, test)?;
    let mi = |a: usize, b: usize| mutual_information(&j, &[a], &[b], InfoUnit::Nats);
    let uy = mi(axis::U, axis::Y)?;
    let uz = mi(axis::U, axis::Z)?;
    let ux = mi(axis::U, axis::X)?;
    let uxt = mi(axis::U, axis::X_TILDE)?;
    let xz = mi(axis::X, axis::Z)?;
    let rs = uy - uz;
    let rj = clamp_information(uxt - uy)?;
    let rl = clamp_information(ux - uy)? + xz;
    Ok(
        RateCorner::new(unit.from_nats(rs), unit.from_nats(rj), unit.from_nats(rl), unit)
            .with_test_channel(test.clone()),
    )
}

/// Alphabet caps for the two-auxiliary search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoAuxCaps {
    pub max_u: usize,
    pub max_v: usize,
}

impl Default for TwoAuxCaps {
    fn default() -> Self {
        Self { max_u: 4, max_v: 3 }
    }
}

/// Rate corner of the two-auxiliary region for `(P_{U|X̃}, P_{V|U})`:
/// `R_S = I(Y;U|V) − I(Z;U|V)`, `R_J = I(X̃;U|Y)`,
/// `R_L = I(X;U,Y) − I(X;Y|V) + I(X;Z|V)`.
pub fn eval_two_aux(
    model: &AuthModel,
    test_u: &Channel,
    test_v: &Channel,
    unit: InfoUnit,
    caps: TwoAuxCaps,
) -> Result<RateCorner> {
    check_aux_size(test_u.outputs(), caps.max_u)?;
    check_aux_size(test_v.outputs(), caps.max_v)?;
    let j = two_aux_joint(model, test_u, test_v)?;
    use axis2::*;
    let cmi = |a: &[usize], b: &[usize], c: &[usize]| conditional_mutual_information(&j, a, b, c, InfoUnit::Nats);
    let rs = cmi(&[Y], &[U], &[V])? - cmi(&[Z], &[U], &[V])?;
    let rj = cmi(&[X_TILDE], &[U], &[Y])?;
    let rl = cmi(&[X], &[U, Y], &[])? - cmi(&[X], &[Y], &[V])? + cmi(&[X], &[Z], &[V])?;
    let mut corner = RateCorner::new(unit.from_nats(rs), unit.from_nats(rj), unit.from_nats(rl), unit)
        .with_test_channel(test_u.clone());
    corner.second_test_channel = Some(test_v.clone());
    Ok(corner)
}

fn a3_corner(model: &AuthModel, unit: InfoUnit) -> Result<RateCorner> {
    let single = DiscreteDistribution::point(1, 0)?;
    Ok(RateCorner::new(0.0, 0.0, model.xz_information(unit)?, unit)
        .with_test_channel(Channel::constant(model.x_tilde_size(), &single)?))
}

/// The region without key generation: the single corner `(0, 0, I(X;Z))`.
pub fn region_a3(model: &AuthModel, unit: InfoUnit) -> Result<RegionBoundary> {
    RegionBoundary::from_corners(
        vec![a3_corner(model, unit)?],
        unit,
        BoundaryMetadata {
            kind: "A3".into(),
            model_hash: Some(model.hash()),
            verdict: Some(model.verdict.clone()),
            ..Default::default()
        },
    )
}

/// Test-channel sampling for [`sweep_region`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    /// Random test channels, cycling `|U|` through `1..=max_u`.
    pub samples: usize,
    /// Step of the BSC test-channel grid on `[0, 1/2]` (binary `X̃` only);
    /// `None` disables the structured family.
    pub beta_step: Option<f64>,
    /// Largest `|U|`; defaults to `|X̃| + 3`.
    pub max_u: Option<usize>,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            beta_step: Some(1e-3),
            max_u: None,
            seed: 0,
        }
    }
}

/// Grid `0, h, 2h, …, 1/2` with `h` adjusted so the endpoint is hit.
pub fn beta_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::OutOfRange {
            name: "beta_step",
            value: step,
            range: "(0, 1/2]",
        });
    }
    let n = (0.5 / step).round().max(1.0) as usize;
    Ok((0..=n).map(|i| 0.5 * i as f64 / n as f64).collect())
}

/// Random test channel with `u_size` outputs, rows from the flat simplex.
pub fn random_test_channel(inputs: usize, u_size: usize, seed: u64, index: u64) -> Result<Channel> {
    let mut r = rng::stream(seed, index);
    Channel::new((0..inputs).map(|_| rng::flat_simplex(&mut r, u_size)).collect())
}

/// Union over test channels of the single-auxiliary corners, Pareto-filtered.
/// Models whose verdict favors the eavesdropper get the A3 corner.
pub fn sweep_region(model: &AuthModel, sampler: &SamplerConfig, unit: InfoUnit) -> Result<RegionBoundary> {
    match model.region_class() {
        RegionClass::A3 => return region_a3(model, unit),
        RegionClass::Unsupported => model.require_one_aux()?,
        RegionClass::A1 | RegionClass::A2 => {}
    }
    let max_u = sampler.max_u.unwrap_or(model.max_aux_size());
    check_aux_size(max_u, model.max_aux_size())?;
    if max_u == 0 {
        return Err(Error::OutOfRange {
            name: "max_u",
            value: 0.0,
            range: ">= 1",
        });
    }

    let mut corners = Vec::new();
    if let (Some(step), 2) = (sampler.beta_step, model.x_tilde_size()) {
        let structured: Result<Vec<_>> = beta_grid(step)?
            .into_par_iter()
            .map(|b| Ok(eval_one_aux(model, &Channel::bsc(b)?, unit)?.with_param(CornerParam::Beta(b))))
            .collect();
        corners.extend(structured?);
    }
    let inputs = model.x_tilde_size();
    let random: Result<Vec<_>> = (0..sampler.samples as u64)
        .into_par_iter()
        .map(|k| {
            let u = 1 + (k as usize % max_u);
            let test = random_test_channel(inputs, u, sampler.seed, k)?;
            Ok(eval_one_aux(model, &test, unit)?.with_param(CornerParam::Sample(k)))
        })
        .collect();
    corners.extend(random?);

    RegionBoundary::from_corners(
        corners,
        unit,
        BoundaryMetadata {
            kind: match model.region_class() {
                RegionClass::A1 => "A1".into(),
                _ => "A2".into(),
            },
            model_hash: Some(model.hash()),
            verdict: Some(model.verdict.clone()),
            seed: Some(sampler.seed),
            samples: sampler.samples,
            grid_step: sampler.beta_step.filter(|_| model.x_tilde_size() == 2),
            warnings: Vec::new(),
        },
    )
}

/// True iff `point` lies in the region generated by the boundary corners.
pub fn region_contains(boundary: &RegionBoundary, point: &RatePoint, unit: InfoUnit) -> Result<bool> {
    if unit != boundary.unit {
        return Err(Error::UnitMismatch(unit.to_string(), boundary.unit.to_string()));
    }
    Ok(boundary.corners.iter().any(|c| {
        point.rs <= c.rs + DOMINANCE_TOL && point.rj >= c.rj - DOMINANCE_TOL && point.rl >= c.rl - DOMINANCE_TOL
    }))
}

/// One-sided excess of `a` over `b`: the largest, over corners of `a`, of the
/// smallest dominance slack against corners of `b`. Zero when `a ⊆ b`.
pub fn compare_regions(a: &RegionBoundary, b: &RegionBoundary) -> Result<f64> {
    if a.unit != b.unit {
        return Err(Error::UnitMismatch(a.unit.to_string(), b.unit.to_string()));
    }
    Ok(excess_of_points(
        &a.corners.iter().map(RateCorner::point).collect::<Vec<_>>(),
        &b.corners.iter().map(RateCorner::point).collect::<Vec<_>>(),
    ))
}

pub(crate) fn excess_of_points(a: &[RatePoint], b: &[RatePoint]) -> f64 {
    a.par_iter()
        .map(|c| b.iter().map(|d| dominance_slack(c, d)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max)
}

/// Offset separating two-auxiliary sample streams from single-auxiliary ones.
const TWO_AUX_STREAM: u64 = 1 << 40;

/// Numerical comparison of the single- and two-auxiliary regions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxComparison {
    pub unit: InfoUnit,
    pub two_aux_samples: usize,
    pub caps: TwoAuxCaps,
    pub one_aux_front_size: usize,
    /// Largest dominance slack of a two-auxiliary corner against the single-auxiliary front.
    pub two_over_one_excess: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_two_aux: Option<RateCorner>,
    /// Excess of the single-auxiliary front over the `V`-constant embeddings of its corners.
    pub one_over_two_excess: f64,
    /// Largest coordinate difference between a front corner and its embedding.
    pub embedding_max_deviation: f64,
}

/// Random two-auxiliary pair `(P_{U|X̃}, P_{V|U})` number `index`.
pub fn random_two_aux_pair(inputs: usize, caps: TwoAuxCaps, seed: u64, index: u64) -> Result<(Channel, Channel)> {
    let u = 1 + index as usize % caps.max_u;
    let v = 1 + (index as usize / caps.max_u) % caps.max_v;
    let mut r = rng::stream(seed, TWO_AUX_STREAM + index);
    let test_u = Channel::new((0..inputs).map(|_| rng::flat_simplex(&mut r, u)).collect())?;
    let test_v = Channel::new((0..u).map(|_| rng::flat_simplex(&mut r, v)).collect())?;
    Ok((test_u, test_v))
}

/// Sweeps the single-auxiliary region with `sampler`, draws `two_aux_samples`
/// random pairs within `caps`, and measures containment both ways.
pub fn compare_aux_regions(
    model: &AuthModel,
    sampler: &SamplerConfig,
    two_aux_samples: usize,
    caps: TwoAuxCaps,
    unit: InfoUnit,
) -> Result<AuxComparison> {
    model.require_one_aux()?;
    if caps.max_u == 0 || caps.max_v == 0 {
        return Err(Error::OutOfRange {
            name: "caps",
            value: 0.0,
            range: ">= 1",
        });
    }
    let front = sweep_region(model, sampler, unit)?;
    let front_points: Vec<RatePoint> = front.corners.iter().map(RateCorner::point).collect();

    let inputs = model.x_tilde_size();
    let two: Vec<RateCorner> = (0..two_aux_samples as u64)
        .into_par_iter()
        .map(|k| {
            let (tu, tv) = random_two_aux_pair(inputs, caps, sampler.seed, k)?;
            Ok(eval_two_aux(model, &tu, &tv, unit, caps)?.with_param(CornerParam::Sample(k)))
        })
        .collect::<Result<_>>()?;
    let slacks: Vec<f64> = two
        .par_iter()
        .map(|c| {
            let p = c.point();
            front_points
                .iter()
                .map(|d| dominance_slack(&p, d))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let worst = slacks
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, &s)| (i, s));

    let embed_caps = TwoAuxCaps {
        max_u: caps.max_u.max(model.max_aux_size()),
        max_v: 1,
    };
    let embedded: Vec<RateCorner> = front
        .corners
        .par_iter()
        .map(|c| {
            let tu = c
                .test_channel
                .as_ref()
                .ok_or_else(|| Error::Degenerate("front corner without a test channel".into()))?;
            let tv = Channel::constant(tu.outputs(), &DiscreteDistribution::point(1, 0)?)?;
            eval_two_aux(model, tu, &tv, unit, embed_caps)
        })
        .collect::<Result<_>>()?;
    let deviation = front
        .corners
        .iter()
        .zip(&embedded)
        .map(|(a, b)| (a.rs - b.rs).abs().max((a.rj - b.rj).abs()).max((a.rl - b.rl).abs()))
        .fold(0.0, f64::max);
    let mut pool: Vec<RatePoint> = embedded.iter().map(RateCorner::point).collect();
    pool.extend(two.iter().map(RateCorner::point));

    Ok(AuxComparison {
        unit,
        two_aux_samples,
        caps,
        one_aux_front_size: front.corners.len(),
        two_over_one_excess: worst.map_or(0.0, |w| w.1.max(0.0)),
        worst_two_aux: worst.map(|(i, _)| two[i].clone()),
        one_over_two_excess: excess_of_points(&front_points, &pool),
        embedding_max_deviation: deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::Certainty;

    fn verdict(relation: ChannelRelation) -> ChannelOrderVerdict {
        ChannelOrderVerdict {
            relation,
            certainty: Certainty::Exact,
            witness: None,
            note: None,
        }
    }

    fn binary_model(p: f64, q: f64, eps: f64) -> AuthModel {
        AuthModel::with_verdict(
            DiscreteDistribution::uniform(2).unwrap(),
            Channel::bsc(p).unwrap(),
            Channel::bec(q).unwrap(),
            Channel::bsc(eps).unwrap(),
            verdict(ChannelRelation::LessNoisyYOverZ),
        )
        .unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn constant_test_channel_gives_a3_corner() {
        let m = binary_model(0.1, 0.5, 0.2);
        let xz = m.xz_information(InfoUnit::Bits).unwrap();
        let konst = Channel::constant(2, &DiscreteDistribution::new(vec![0.3, 0.7]).unwrap()).unwrap();
        for test in [konst, Channel::bsc(0.5).unwrap()] {
            let c = eval_one_aux(&m, &test, InfoUnit::Bits).unwrap();
            close(c.rs, 0.0, 1e-15);
            close(c.rj, 0.0, 1e-15);
            close(c.rl, xz, 1e-15);
        }
    }

    #[test]
    fn identity_test_channel_on_binary_model() {
        let m = binary_model(0.1, 0.5, 0.2);
        let c = eval_one_aux(&m, &Channel::identity(2).unwrap(), InfoUnit::Bits).unwrap();
        close(c.rs, 0.092_248_575_697_977_4, 1e-12);
        close(c.rj, 0.734_497_796_794_640_7, 1e-12);
        close(c.rl, 0.543_574_108_317_997_2, 1e-12);
    }

    #[test]
    fn one_aux_rejects_bad_inputs() {
        let m = binary_model(0.1, 0.5, 0.2);
        let big = random_test_channel(2, 6, 0, 0).unwrap();
        assert_eq!(
            eval_one_aux(&m, &big, InfoUnit::Bits),
            Err(Error::CardinalityExceeded { size: 6, cap: 5 })
        );
        let mut unordered = m.clone();
        unordered.verdict = verdict(ChannelRelation::Unordered);
        assert!(matches!(
            eval_one_aux(&unordered, &Channel::identity(2).unwrap(), InfoUnit::Bits),
            Err(Error::UnsupportedClass(_))
        ));
        let mut reversed = m;
        reversed.verdict = verdict(ChannelRelation::LessNoisyZOverY);
        assert!(eval_one_aux(&reversed, &Channel::identity(2).unwrap(), InfoUnit::Bits).is_err());
    }

    #[test]
    fn two_aux_with_constant_v_matches_one_aux() {
        let m = binary_model(0.1, 0.5, 0.2);
        let v = Channel::constant(3, &DiscreteDistribution::point(1, 0).unwrap()).unwrap();
        let u = random_test_channel(2, 3, 5, 1).unwrap();
        let one = eval_one_aux(&m, &u, InfoUnit::Bits).unwrap();
        let two = eval_two_aux(&m, &u, &v, InfoUnit::Bits, TwoAuxCaps::default()).unwrap();
        close(one.rs, two.rs, 1e-12);
        close(one.rj, two.rj, 1e-12);
        close(one.rl, two.rl, 1e-12);
    }

    #[test]
    fn two_aux_constant_u_gives_a3_corner() {
        let m = binary_model(0.1, 0.5, 0.2);
        let u = Channel::constant(2, &DiscreteDistribution::point(1, 0).unwrap()).unwrap();
        let v = Channel::identity(1).unwrap();
        let c = eval_two_aux(&m, &u, &v, InfoUnit::Bits, TwoAuxCaps::default()).unwrap();
        close(c.rs, 0.0, 1e-15);
        close(c.rj, 0.0, 1e-15);
        close(c.rl, m.xz_information(InfoUnit::Bits).unwrap(), 1e-14);
        let big_v = random_test_channel(1, 4, 0, 0).unwrap();
        assert!(eval_two_aux(&m, &u, &big_v, InfoUnit::Bits, TwoAuxCaps::default()).is_err());
    }

    #[test]
    fn a3_examples() {
        let u2 = DiscreteDistribution::uniform(2).unwrap();
        let konst = Channel::constant(2, &u2).unwrap();
        let mk = |z: Channel| {
            AuthModel::with_verdict(
                u2.clone(),
                Channel::bsc(0.1).unwrap(),
                Channel::bsc(0.3).unwrap(),
                z,
                verdict(ChannelRelation::DegradedYWrtZ),
            )
            .unwrap()
        };
        let b = region_a3(&mk(konst), InfoUnit::Bits).unwrap();
        assert_eq!(b.corners.len(), 1);
        close(b.corners[0].rl, 0.0, 1e-15);
        let b = region_a3(&mk(Channel::bsc(0.2).unwrap()), InfoUnit::Bits).unwrap();
        close(b.corners[0].rl, 0.278_071_905_112_637_7, 1e-12);
        let b = region_a3(&mk(Channel::identity(2).unwrap()), InfoUnit::Bits).unwrap();
        close(b.corners[0].rl, 1.0, 1e-14);
    }

    #[test]
    fn a3_model_sweep_returns_single_corner() {
        let mut m = binary_model(0.1, 0.5, 0.2);
        m.verdict = verdict(ChannelRelation::LessNoisyZOverY);
        let b = sweep_region(&m, &SamplerConfig::default(), InfoUnit::Bits).unwrap();
        assert_eq!(b.corners.len(), 1);
        assert_eq!(b.metadata.kind, "A3");
    }

    #[test]
    fn single_constant_sample_boundary() {
        let m = binary_model(0.1, 0.5, 0.2);
        let cfg = SamplerConfig {
            samples: 1,
            beta_step: None,
            ..Default::default()
        };
        let b = sweep_region(&m, &cfg, InfoUnit::Bits).unwrap();
        assert_eq!(b.corners.len(), 1);
        close(b.corners[0].rs, 0.0, 1e-15);
        close(b.corners[0].rj, 0.0, 1e-15);
        close(b.corners[0].rl, m.xz_information(InfoUnit::Bits).unwrap(), 1e-15);
    }

    #[test]
    fn containment_and_comparison() {
        let m = binary_model(0.1, 0.5, 0.2);
        let cfg = SamplerConfig {
            samples: 200,
            beta_step: Some(0.01),
            ..Default::default()
        };
        let b = sweep_region(&m, &cfg, InfoUnit::Bits).unwrap();
        let xz = m.xz_information(InfoUnit::Bits).unwrap();
        assert!(region_contains(
            &b,
            &RatePoint {
                rs: 0.0,
                rj: 0.0,
                rl: xz
            },
            InfoUnit::Bits
        )
        .unwrap());
        let top = b.max_rs().unwrap();
        let above = RatePoint {
            rs: top.rs + 1.0,
            ..top.point()
        };
        assert!(!region_contains(&b, &above, InfoUnit::Bits).unwrap());
        assert!(region_contains(&b, &top.point(), InfoUnit::Nats).is_err());

        assert_eq!(compare_regions(&b, &b).unwrap(), 0.0);
        let a3 = region_a3(&m, InfoUnit::Bits).unwrap();
        assert_eq!(compare_regions(&a3, &b).unwrap(), 0.0);
        assert!(compare_regions(&b, &a3).unwrap() > 0.0);
        assert!(compare_regions(&b, &b.in_unit(InfoUnit::Nats)).is_err());
    }

    #[test]
    fn pareto_filter_basics() {
        let c = |rs, rj, rl| RateCorner::new(rs, rj, rl, InfoUnit::Bits);
        let front = pareto_filter(vec![
            c(1.0, 1.0, 1.0),
            c(0.5, 1.0, 1.0),
            c(1.0, 1.0, 1.0),
            c(0.2, 0.1, 2.0),
        ]);
        assert_eq!(front.len(), 2);
        assert!(!dominates(&front[0].point(), &front[1].point()));
        assert!(!dominates(&front[1].point(), &front[0].point()));
    }

    #[test]
    fn beta_grid_hits_endpoints() {
        let g = beta_grid(1e-3).unwrap();
        assert_eq!(g.len(), 501);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 0.5);
        assert!(beta_grid(0.0).is_err());
    }
}
