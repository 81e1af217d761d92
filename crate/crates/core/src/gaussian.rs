//! Scalar Gaussian model: closed-form region over the auxiliary variance
//! split `X̃ = U + Θ`, plus a covariance-determinant mutual-information oracle
//! used to cross-check it.
//!
//! All rates here are in nats.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::InfoUnit;
use crate::region::{BoundaryMetadata, CornerParam, RateCorner, RegionBoundary};
use crate::rng;

/// Variable order in [`CovarianceMatrix`].
pub mod var {
    pub const U: usize = 0;
    pub const X_TILDE: usize = 1;
    pub const X: usize = 2;
    pub const Y: usize = 3;
    pub const Z: usize = 4;
}

/// Squared enrollment correlation used for the visible-source model.
pub const VSM_RHO1_SQ: f64 = 1.0 - 1e-9;

const SINGULAR_DET: f64 = 1e-12;
const ZERO_VARIANCE: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianModelParams {
    pub rho1_sq: f64,
    pub rho2_sq: f64,
    pub rho3_sq: f64,
    #[serde(default = "default_alpha_min")]
    pub alpha_min: f64,
    #[serde(default = "default_alpha_points")]
    pub alpha_points: usize,
}

fn default_alpha_min() -> f64 {
    1e-6
}

fn default_alpha_points() -> usize {
    400
}

impl GaussianModelParams {
    pub fn new(rho1_sq: f64, rho2_sq: f64, rho3_sq: f64) -> Result<Self> {
        let p = Self {
            rho1_sq,
            rho2_sq,
            rho3_sq,
            alpha_min: default_alpha_min(),
            alpha_points: default_alpha_points(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rho1_sq", self.rho1_sq),
            ("rho2_sq", self.rho2_sq),
            ("rho3_sq", self.rho3_sq),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "[0, 1)",
                });
            }
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= 1.0) {
            return Err(Error::OutOfRange {
                name: "alpha_min",
                value: self.alpha_min,
                range: "(0, 1]",
            });
        }
        if self.alpha_points == 0 {
            return Err(Error::OutOfRange {
                name: "alpha_points",
                value: 0.0,
                range: "[1, ∞)",
            });
        }
        Ok(())
    }

    /// Same channels with (numerically) noiseless enrollment.
    pub fn visible_source(&self) -> Self {
        Self {
            rho1_sq: VSM_RHO1_SQ,
            ..*self
        }
    }

    /// True when the main channel is strictly better than the eavesdropper's.
    pub fn main_channel_stronger(&self) -> bool {
        self.rho2_sq > self.rho3_sq
    }

    fn a2(&self) -> f64 {
        self.rho1_sq * self.rho2_sq
    }

    fn a3(&self) -> f64 {
        self.rho1_sq * self.rho3_sq
    }

    /// `I(X;Z) = ½ ln(1/(1−ρ₃²))`.
    pub fn xz_information(&self) -> f64 {
        -0.5 * (1.0 - self.rho3_sq).ln()
    }

    /// Log-spaced grid on `[alpha_min, 1]`, ascending; `{1}` when a single point is requested.
    pub fn alpha_grid(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.alpha_points;
        if n == 1 {
            return Ok(vec![1.0]);
        }
        let lo = self.alpha_min.ln();
        Ok((0..n)
            .map(|i| match i {
                0 => self.alpha_min,
                _ if i + 1 == n => 1.0,
                _ => (lo * (1.0 - i as f64 / (n - 1) as f64)).exp(),
            })
            .collect())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "(0, 1]",
        });
    }
    Ok(())
}

/// The four closed-form mutual informations at split `alpha`, in nats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxInformation {
    pub xt_u: f64,
    pub x_u: f64,
    pub y_u: f64,
    pub z_u: f64,
}

pub fn aux_information(params: &GaussianModelParams, alpha: f64) -> Result<AuxInformation> {
    params.validate()?;
    check_alpha(alpha)?;
    let half_log_inv = |v: f64| -0.5 * v.ln();
    Ok(AuxInformation {
        xt_u: half_log_inv(alpha),
        x_u: half_log_inv(alpha * params.rho1_sq + 1.0 - params.rho1_sq),
        y_u: half_log_inv(alpha * params.a2() + 1.0 - params.a2()),
        z_u: half_log_inv(alpha * params.a3() + 1.0 - params.a3()),
    })
}

/// Symmetric PSD covariance over `(U, X̃, X, Y, Z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix(DMatrix<f64>);

impl CovarianceMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch("covariance must be square".into()));
        }
        if (&m - m.transpose()).amax() > 1e-14 {
            return Err(Error::InvalidDistribution("covariance is not symmetric".into()));
        }
        let min_eig = SymmetricEigen::new(m.clone()).eigenvalues.min();
        if min_eig < -1e-10 {
            return Err(Error::InvalidDistribution(format!(
                "covariance has eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn log_det(&self, vars: &[usize]) -> Result<f64> {
        let m = DMatrix::from_fn(vars.len(), vars.len(), |i, j| self.0[(vars[i], vars[j])]);
        let det = m.clone().determinant();
        if det <= SINGULAR_DET {
            return Err(Error::SingularBlock(format!(
                "variables {vars:?} have determinant {det:e}"
            )));
        }
        // Cholesky is more accurate than the LU determinant for near-singular blocks.
        Ok(match m.cholesky() {
            Some(c) => 2.0 * c.l().diagonal().iter().map(|d| d.ln()).sum::<f64>(),
            None => det.ln(),
        })
    }
}

/// Builds the covariance of `(U, X̃, X, Y, Z)` with `Var(U) = 1−α`,
/// `Var(Θ) = α`, and unit variance elsewhere. `Y` and `Z` are coupled through
/// the degraded construction (the weaker one is a noisy scaling of the other),
/// which leaves every marginal pair as specified.
pub fn build_covariance(params: &GaussianModelParams, alpha: f64) -> Result<CovarianceMatrix> {
    params.validate()?;
    check_alpha(alpha)?;
    let (r1, r2, r3) = (params.rho1_sq.sqrt(), params.rho2_sq.sqrt(), params.rho3_sq.sqrt());
    let u = 1.0 - alpha;
    let yz = if r2 > r3 {
        r3 / r2
    } else if r3 > 0.0 {
        r2 / r3
    } else {
        0.0
    };
    let upper = [
        [u, u, r1 * u, r1 * r2 * u, r1 * r3 * u],
        [0.0, 1.0, r1, r1 * r2, r1 * r3],
        [0.0, 0.0, 1.0, r2, r3],
        [0.0, 0.0, 0.0, 1.0, yz],
        [0.0, 0.0, 0.0, 0.0, 1.0],
    ];
    let m = DMatrix::from_fn(5, 5, |i, j| if i <= j { upper[i][j] } else { upper[j][i] });
    CovarianceMatrix::new(m)
}

/// `½ ln(det Σ_A det Σ_B / det Σ_{A∪B})` in nats. Variables with zero variance
/// carry no information and are dropped first, so `α = 1` yields exactly 0
/// for anything involving `U`.
pub fn gaussian_mi(cov: &CovarianceMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    let keep = |vars: &[usize]| -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(vars.len());
        for &v in vars {
            if v >= cov.dim() {
                return Err(Error::AxisOutOfRange {
                    axis: v,
                    ndim: cov.dim(),
                });
            }
            if cov.get(v, v) > ZERO_VARIANCE {
                out.push(v);
            }
        }
        Ok(out)
    };
    let (a, b) = (keep(a)?, keep(b)?);
    if let Some(&v) = a.iter().find(|v| b.contains(v)) {
        return Err(Error::OverlappingAxes(v));
    }
    if a.is_empty() || b.is_empty() {
        return Ok(0.0);
    }
    let ab: Vec<usize> = a.iter().chain(&b).copied().collect();
    let mi = 0.5 * (cov.log_det(&a)? + cov.log_det(&b)? - cov.log_det(&ab)?);
    Ok(mi.max(0.0))
}

/// `I(A;B|C) = I(A;B,C) − I(A;C)`.
pub fn gaussian_cmi(cov: &CovarianceMatrix, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
    let bc: Vec<usize> = b.iter().chain(c).copied().collect();
    Ok((gaussian_mi(cov, a, &bc)? - gaussian_mi(cov, a, c)?).max(0.0))
}

/// Closed-form corner at split `alpha`, in nats.
pub fn corollary1_corner(params: &GaussianModelParams, alpha: f64) -> Result<RateCorner> {
    if !params.main_channel_stronger() {
        return Err(Error::WrongDirection(format!(
            "rho2_sq = {} ≤ rho3_sq = {}; the region is the single leakage corner",
            params.rho2_sq, params.rho3_sq
        )));
    }
    params.validate()?;
    check_alpha(alpha)?;
    let (a2, a3, r1) = (params.a2(), params.a3(), params.rho1_sq);
    let y = alpha * a2 + 1.0 - a2;
    let rs = 0.5 * ((alpha * a3 + 1.0 - a3) / y).ln();
    let rj = 0.5 * (y / alpha).ln();
    let rl = 0.5 * (y / ((alpha * r1 + 1.0 - r1) * (1.0 - params.rho3_sq))).ln();
    Ok(RateCorner::new(rs, rj, rl, InfoUnit::Nats).with_param(CornerParam::Alpha(alpha)))
}

fn metadata(kind: &str, samples: usize, warnings: Vec<String>) -> BoundaryMetadata {
    BoundaryMetadata {
        kind: kind.into(),
        samples,
        warnings,
        ..Default::default()
    }
}

/// Single corner `(0, 0, ½ ln(1/(1−ρ₃²)))` for `ρ₂² ≤ ρ₃²`.
pub fn region_a3_gaussian(params: &GaussianModelParams) -> Result<RegionBoundary> {
    params.validate()?;
    if params.main_channel_stronger() {
        return Err(Error::WrongDirection(format!(
            "rho2_sq = {} > rho3_sq = {}; use the parametric region",
            params.rho2_sq, params.rho3_sq
        )));
    }
    let corner = RateCorner::new(0.0, 0.0, params.xz_information(), InfoUnit::Nats);
    RegionBoundary::from_corners(vec![corner], InfoUnit::Nats, metadata("gaussian_a3", 1, Vec::new()))
}

/// Corners along the α grid, ascending in α, without filtering.
pub fn corollary1_curve(params: &GaussianModelParams) -> Result<Vec<RateCorner>> {
    params
        .alpha_grid()?
        .into_par_iter()
        .map(|a| corollary1_corner(params, a))
        .collect()
}

pub fn corollary1_region(params: &GaussianModelParams) -> Result<RegionBoundary> {
    let corners = corollary1_curve(params)?;
    let n = corners.len();
    let mut b = RegionBoundary::from_corners(corners, InfoUnit::Nats, metadata("gaussian_closed_form", n, Vec::new()))?;
    b.metadata.grid_step = Some(params.alpha_min);
    Ok(b)
}

/// Region for either direction of the channel ordering.
pub fn gaussian_region(params: &GaussianModelParams) -> Result<RegionBoundary> {
    if params.main_channel_stronger() {
        corollary1_region(params)
    } else {
        region_a3_gaussian(params)
    }
}

/// The α at which the closed-form `R_J` equals `rj`, by bisection in `ln α`.
/// `R_J` is strictly decreasing in α with `R_J(1) = 0`.
pub fn alpha_for_rj(params: &GaussianModelParams, rj: f64) -> Result<f64> {
    if rj < 0.0 {
        return Err(Error::OutOfRange {
            name: "rj",
            value: rj,
            range: "[0, ∞)",
        });
    }
    let rj_at = |la: f64| corollary1_corner(params, la.exp()).map(|c| c.rj);
    let (mut lo, mut hi) = (params.alpha_min.ln(), 0.0);
    if rj_at(lo)? < rj {
        return Err(Error::OutOfRange {
            name: "rj",
            value: rj,
            range: "[0, R_J(alpha_min)]",
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rj_at(mid)? > rj {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Two models evaluated at the same helper-data rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommonRjPoint {
    pub rj: f64,
    pub first_rs: f64,
    pub second_rs: f64,
    pub first_rl: f64,
    pub second_rl: f64,
}

/// Evaluates both closed forms at `count` evenly spaced `R_J` values
/// covering the range both grids reach.
pub fn compare_at_common_rj(
    first: &GaussianModelParams,
    second: &GaussianModelParams,
    count: usize,
) -> Result<Vec<CommonRjPoint>> {
    let top = corollary1_corner(first, first.alpha_min)?
        .rj
        .min(corollary1_corner(second, second.alpha_min)?.rj);
    (0..count)
        .into_par_iter()
        .map(|i| {
            let rj = top * i as f64 / (count.max(2) - 1) as f64;
            let f = corollary1_corner(first, alpha_for_rj(first, rj)?)?;
            let s = corollary1_corner(second, alpha_for_rj(second, rj)?)?;
            Ok(CommonRjPoint {
                rj,
                first_rs: f.rs,
                second_rs: s.rs,
                first_rl: f.rl,
                second_rl: s.rl,
            })
        })
        .collect()
}

/// Empirical covariance of `samples` draws from the generative model behind
/// [`build_covariance`], for comparison with the analytic matrix.
pub fn sample_covariance(params: &GaussianModelParams, alpha: f64, samples: usize, seed: u64) -> Result<DMatrix<f64>> {
    params.validate()?;
    check_alpha(alpha)?;
    if samples < 2 {
        return Err(Error::OutOfRange {
            name: "samples",
            value: samples as f64,
            range: "[2, ∞)",
        });
    }
    let (r1, r2, r3) = (params.rho1_sq.sqrt(), params.rho2_sq.sqrt(), params.rho3_sq.sqrt());
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    let chunk = 1 << 14;
    let chunks = samples.div_ceil(chunk);
    let sum = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, c as u64);
            let mut acc = DMatrix::<f64>::zeros(5, 5);
            for _ in 0..chunk.min(samples - c * chunk) {
                let mut g = || std.sample(&mut r);
                let u = (1.0 - alpha).sqrt() * g();
                let xt = u + alpha.sqrt() * g();
                let x = r1 * xt + (1.0 - r1 * r1).sqrt() * g();
                let (y, z) = if r2 > r3 {
                    let y = r2 * x + (1.0 - r2 * r2).sqrt() * g();
                    let k = r3 / r2;
                    (y, k * y + (1.0 - k * k).sqrt() * g())
                } else {
                    let z = r3 * x + (1.0 - r3 * r3).sqrt() * g();
                    let k = if r3 > 0.0 { r2 / r3 } else { 0.0 };
                    (k * z + (1.0 - k * k).sqrt() * g(), z)
                };
                let v = nalgebra::DVector::from_vec(vec![u, xt, x, y, z]);
                acc += &v * v.transpose();
            }
            acc
        })
        .reduce(|| DMatrix::zeros(5, 5), |a, b| a + b);
    Ok(sum / samples as f64)
}

#[cfg(test)]
mod tests {
    use super::var::*;
    use super::*;

    fn reference() -> GaussianModelParams {
        GaussianModelParams::new(7.0 / 8.0, 4.0 / 5.0, 2.0 / 3.0).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn invariants_rejected() {
        assert!(GaussianModelParams::new(1.0, 0.5, 0.2).is_err());
        assert!(GaussianModelParams::new(0.5, -0.1, 0.2).is_err());
        assert!(corollary1_corner(&reference(), 0.0).is_err());
        assert!(corollary1_corner(&reference(), 1.5).is_err());
    }

    #[test]
    fn alpha_one_kills_u() {
        let cov = build_covariance(&reference(), 1.0).unwrap();
        for j in 0..5 {
            assert_eq!(cov.get(U, j), 0.0);
        }
        assert_eq!(gaussian_mi(&cov, &[U], &[Y]).unwrap(), 0.0);
    }

    #[test]
    fn noiseless_enrollment_limit() {
        let p = GaussianModelParams::new(VSM_RHO1_SQ, 0.8, 0.5).unwrap();
        let cov = build_covariance(&p, 0.5).unwrap();
        close(cov.get(X_TILDE, X), 1.0, 1e-9);
    }

    #[test]
    fn oracle_examples() {
        let p = reference();
        let cov = build_covariance(&p, 0.25).unwrap();
        close(
            gaussian_mi(&cov, &[X_TILDE], &[U]).unwrap(),
            std::f64::consts::LN_2,
            1e-12,
        );
        let cov = build_covariance(&p, 0.5).unwrap();
        close(gaussian_mi(&cov, &[Z], &[U]).unwrap(), 0.172_420_243_145_864_77, 1e-12);
        let y_u = gaussian_mi(&cov, &[Y], &[U]).unwrap();
        let c = cov.get(U, Y);
        close(y_u, -0.5 * (1.0 - c * c / (cov.get(U, U) * cov.get(Y, Y))).ln(), 1e-12);
    }

    #[test]
    fn uncorrelated_blocks_are_independent() {
        let p = GaussianModelParams::new(0.5, 0.0, 0.0).unwrap();
        let cov = build_covariance(&p, 0.3).unwrap();
        assert_eq!(gaussian_mi(&cov, &[Y], &[X, U]).unwrap(), 0.0);
        close(gaussian_mi(&cov, &[Y], &[Z]).unwrap(), 0.0, 1e-15);
    }

    #[test]
    fn closed_form_matches_oracle() {
        let p = reference();
        for a in p.alpha_grid().unwrap().into_iter().step_by(7) {
            let cov = build_covariance(&p, a).unwrap();
            let cf = aux_information(&p, a).unwrap();
            close(gaussian_mi(&cov, &[X_TILDE], &[U]).unwrap(), cf.xt_u, 1e-9);
            close(gaussian_mi(&cov, &[X], &[U]).unwrap(), cf.x_u, 1e-9);
            close(gaussian_mi(&cov, &[Y], &[U]).unwrap(), cf.y_u, 1e-9);
            close(gaussian_mi(&cov, &[Z], &[U]).unwrap(), cf.z_u, 1e-9);
            // Markov chain U − Y − Z from the degraded coupling.
            assert!(gaussian_cmi(&cov, &[U], &[Z], &[Y]).unwrap() < 1e-9);
        }
    }

    #[test]
    fn corner_is_recombined_mutual_information() {
        let p = reference();
        for a in [1e-6, 0.01, 0.3, 0.9] {
            let mi = aux_information(&p, a).unwrap();
            let c = corollary1_corner(&p, a).unwrap();
            close(c.rs, mi.y_u - mi.z_u, 1e-12);
            close(c.rj, mi.xt_u - mi.y_u, 1e-12);
            close(c.rl, mi.x_u - mi.y_u + p.xz_information(), 1e-12);
            assert!(c.rl >= p.xz_information() - 1e-15);
            assert!(c.rs_unclamped > 0.0);
        }
    }

    #[test]
    fn corner_examples() {
        let p = reference();
        let c = corollary1_corner(&p, 1.0).unwrap();
        assert_eq!((c.rs, c.rj), (0.0, 0.0));
        close(c.rl, 0.549_306_144_334_054_8, 1e-12);
        close(corollary1_corner(&p, 1e-12).unwrap().rs, 0.164_252_033_486_018_03, 1e-9);

        let vsm = p.visible_source();
        let c = corollary1_corner(&vsm, 0.2).unwrap();
        close(c.rj, 0.5 * ((0.2 * 0.8 + 0.2) / 0.2f64).ln(), 1e-9);
    }

    #[test]
    fn a3_examples() {
        let b = region_a3_gaussian(&GaussianModelParams::new(0.5, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(b.corners[0].point().rl, 0.0);
        let b = region_a3_gaussian(&GaussianModelParams::new(0.5, 0.5, 2.0 / 3.0).unwrap()).unwrap();
        close(b.corners[0].rl, 0.549_306_144_334_054_8, 1e-12);
        let tie = GaussianModelParams::new(0.5, 0.4, 0.4).unwrap();
        assert!(region_a3_gaussian(&tie).is_ok());
        assert!(matches!(corollary1_corner(&tie, 0.5), Err(Error::WrongDirection(_))));
        assert!(matches!(
            region_a3_gaussian(&reference()),
            Err(Error::WrongDirection(_))
        ));
    }

    #[test]
    fn single_point_grid() {
        let p = GaussianModelParams {
            alpha_points: 1,
            ..reference()
        };
        let b = corollary1_region(&p).unwrap();
        assert_eq!(b.corners.len(), 1);
        assert_eq!(b.corners[0].rs, 0.0);
    }

    #[test]
    fn curve_is_monotone_tradeoff() {
        let curve = corollary1_curve(&reference()).unwrap();
        assert_eq!(curve.len(), 400);
        for w in curve.windows(2) {
            assert!(w[1].rs < w[0].rs);
            assert!(w[1].rj < w[0].rj);
        }
        assert_eq!(corollary1_region(&reference()).unwrap().corners.len(), 400);
    }

    #[test]
    fn alpha_for_rj_inverts() {
        let p = reference();
        for a in [1e-5, 0.02, 0.5, 0.99] {
            let rj = corollary1_corner(&p, a).unwrap().rj;
            close(alpha_for_rj(&p, rj).unwrap(), a, 1e-9 * a.max(1e-3));
        }
        assert!(alpha_for_rj(&p, 100.0).is_err());
    }

    #[test]
    fn visible_source_dominates() {
        let hsm = reference();
        let pts = compare_at_common_rj(&hsm, &hsm.visible_source(), 50).unwrap();
        assert!(pts
            .iter()
            .all(|q| q.second_rs >= q.first_rs - 1e-12 && q.first_rl <= q.second_rl + 1e-12));
        assert!(pts.iter().any(|q| q.second_rs > q.first_rs + 1e-3));
    }

    #[test]
    fn monte_carlo_covariance() {
        let p = reference();
        let emp = sample_covariance(&p, 0.5, 200_000, 3).unwrap();
        let exact = build_covariance(&p, 0.5).unwrap();
        assert!((emp - exact.matrix()).amax() < 1.5e-2);
    }
}
