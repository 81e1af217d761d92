//! Closed-form region for the binary model: uniform binary source,
//! enrollment BSC(p), main channel BEC(q), eavesdropper BSC(ε), and BSC(β)
//! test channels. Also the entropy bounds used to show the closed form is
//! tight (the convolution ordering and the two Mrs. Gerber inequalities).

use serde::{Deserialize, Serialize};

use crate::classify::ClassifierSettings;
use crate::error::{Error, Result};
use crate::info::{conv, hb_bits, hb_inverse_bits, Channel, DiscreteDistribution, InfoUnit};
use crate::region::{
    axis, beta_grid, one_aux_joint, AuthModel, BoundaryMetadata, CornerParam, RateCorner, RegionBoundary, RegionClass,
};

/// Slack allowed in the entropy-bound checks, in bits.
pub const MGL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinaryModelParams {
    pub p: f64,
    pub q: f64,
    pub eps: f64,
    #[serde(default = "default_beta_step")]
    pub beta_step: f64,
}

fn default_beta_step() -> f64 {
    1e-3
}

fn in_range(name: &'static str, v: f64, hi: f64, range: &'static str) -> Result<()> {
    if !(0.0..=hi).contains(&v) {
        return Err(Error::OutOfRange { name, value: v, range });
    }
    Ok(())
}

impl BinaryModelParams {
    pub fn new(p: f64, q: f64, eps: f64) -> Result<Self> {
        let params = Self {
            p,
            q,
            eps,
            beta_step: default_beta_step(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        in_range("p", self.p, 0.5, "[0, 1/2]")?;
        in_range("q", self.q, 1.0, "[0, 1]")?;
        in_range("eps", self.eps, 0.5, "[0, 1/2]")?;
        beta_grid(self.beta_step).map(|_| ())
    }

    /// `(P_X, P_{X̃|X}, P_{Y|X}, P_{Z|X})`.
    pub fn laws(&self) -> Result<(DiscreteDistribution, Channel, Channel, Channel)> {
        self.validate()?;
        Ok((
            DiscreteDistribution::uniform(2)?,
            Channel::bsc(self.p)?,
            Channel::bec(self.q)?,
            Channel::bsc(self.eps)?,
        ))
    }

    /// The generic model, with the authentication channels classified.
    pub fn to_model(&self, settings: &ClassifierSettings) -> Result<AuthModel> {
        let (px, ec, y, z) = self.laws()?;
        AuthModel::new(px, ec, y, z, settings)
    }
}

/// Corner of the closed-form region at test-channel crossover `beta`, in bits:
/// `R_S = H_b(β*p*ε) − (1−q)H_b(β*p) − q`,
/// `R_J = q + (1−q)H_b(β*p) − H_b(β)`,
/// `R_L = 1 + q − qH_b(β*p) − H_b(ε)`.
pub fn theorem3_corner(params: &BinaryModelParams, beta: f64) -> Result<RateCorner> {
    params.validate()?;
    in_range("beta", beta, 0.5, "[0, 1/2]")?;
    let BinaryModelParams { p, q, eps, .. } = *params;
    let bp = conv(beta, p);
    let rs = hb_bits(conv(bp, eps)) - (1.0 - q) * hb_bits(bp) - q;
    let rj = q + (1.0 - q) * hb_bits(bp) - hb_bits(beta);
    let rl = 1.0 + q - q * hb_bits(bp) - hb_bits(eps);
    Ok(RateCorner::new(rs, rj, rl, InfoUnit::Bits)
        .with_test_channel(Channel::bsc(beta)?)
        .with_param(CornerParam::Beta(beta)))
}

/// Closed-form region on the default β grid, with a golden-section refinement
/// of the key-rate maximizer.
pub fn theorem3_region(params: &BinaryModelParams, settings: &ClassifierSettings) -> Result<RegionBoundary> {
    let grid = beta_grid(params.beta_step)?;
    let mut boundary = theorem3_region_on_grid(params, &grid, settings)?;
    let (lo, hi) = bracket_max_rs(params, &grid)?;
    let beta = golden_section_max(
        |b| theorem3_corner(params, b).map(|c| c.rs_unclamped).unwrap_or(f64::MIN),
        lo,
        hi,
    );
    let mut corners = std::mem::take(&mut boundary.corners);
    corners.push(theorem3_corner(params, beta)?);
    boundary = RegionBoundary::from_corners(corners, InfoUnit::Bits, boundary.metadata)?;
    boundary.metadata.grid_step = Some(params.beta_step);
    Ok(boundary)
}

/// Closed-form region over an explicit list of β values. The classifier is
/// run on `(BEC(q), BSC(ε))`; if it does not confirm the main channel as at
/// least less noisy, a warning is attached instead of failing.
pub fn theorem3_region_on_grid(
    params: &BinaryModelParams,
    betas: &[f64],
    settings: &ClassifierSettings,
) -> Result<RegionBoundary> {
    let model = params.to_model(settings)?;
    let mut warnings = Vec::new();
    if !matches!(model.region_class(), RegionClass::A1 | RegionClass::A2) {
        warnings.push(format!(
            "classifier verdict {:?} does not confirm the main channel as less noisy than the eavesdropper's; \
             the closed form is not established as the capacity region here",
            model.verdict.relation
        ));
    }
    let corners = betas
        .iter()
        .map(|&b| theorem3_corner(params, b))
        .collect::<Result<Vec<_>>>()?;
    RegionBoundary::from_corners(
        corners,
        InfoUnit::Bits,
        BoundaryMetadata {
            kind: "binary_closed_form".into(),
            model_hash: Some(model.hash()),
            verdict: Some(model.verdict),
            seed: Some(settings.seed),
            samples: betas.len(),
            grid_step: None,
            warnings,
        },
    )
}

fn bracket_max_rs(params: &BinaryModelParams, grid: &[f64]) -> Result<(f64, f64)> {
    let rs = grid
        .iter()
        .map(|&b| theorem3_corner(params, b).map(|c| c.rs_unclamped))
        .collect::<Result<Vec<_>>>()?;
    let best = rs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok((grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]))
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..100 {
        if hi - lo < 1e-12 {
            break;
        }
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionBounds {
    pub lower: f64,
    pub mid: f64,
    pub upper: f64,
}

/// `((λ*p − ε)/(1 − 2ε), λ*p*ε, 1/2)`; ordered `lower ≤ mid ≤ upper`.
pub fn lemma6_bounds(lambda: f64, p: f64, eps: f64) -> Result<ConvolutionBounds> {
    in_range("lambda", lambda, 0.5, "[0, 1/2]")?;
    in_range("p", p, 0.5, "[0, 1/2]")?;
    if !(0.0..0.5).contains(&eps) {
        return Err(if eps == 0.5 {
            Error::Degenerate("eps = 1/2 makes 1 - 2 eps vanish".into())
        } else {
            Error::OutOfRange {
                name: "eps",
                value: eps,
                range: "[0, 1/2)",
            }
        });
    }
    // Centered form: λ*p = 1/2 − d/2 with d = (1−2λ)(1−2p), so λ = 1/2 lands exactly on 1/2.
    let d = (1.0 - 2.0 * lambda) * (1.0 - 2.0 * p);
    let e = 1.0 - 2.0 * eps;
    Ok(ConvolutionBounds {
        lower: 0.5 - 0.5 * d / e,
        mid: 0.5 - 0.5 * d * e,
        upper: 0.5,
    })
}

/// Conditional entropies behind the Mrs. Gerber checks, all in bits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MglCheck {
    pub h_x_given_u: f64,
    pub h_z_given_u: f64,
    pub h_xt_given_u: f64,
    /// `λ` solving `H(X|U) = H_b(λ*p)`.
    pub lambda: f64,
    /// `H(Z|U) − H_b(H_b^{-1}(H(X|U))*ε)`, nonnegative by Mrs. Gerber's lemma.
    pub eavesdropper_slack: f64,
    /// `H_b(λ) − H(X̃|U)`.
    pub enrollment_slack: f64,
}

impl MglCheck {
    pub fn holds(&self) -> bool {
        self.eavesdropper_slack >= -MGL_TOL && self.enrollment_slack >= -MGL_TOL
    }
}

fn bsc_crossover(c: &Channel, what: &str) -> Result<f64> {
    let is_bsc =
        c.inputs() == 2 && c.outputs() == 2 && (c.get(0, 1) - c.get(1, 0)).abs() <= 1e-12 && c.get(0, 1) <= 0.5 + 1e-12;
    if !is_bsc {
        return Err(Error::NonBinaryModel(format!(
            "{what} is not a BSC with crossover ≤ 1/2"
        )));
    }
    Ok(c.get(0, 1).min(0.5))
}

/// Evaluates both entropy inequalities for `test` on a binary model with
/// uniform source, BSC enrollment and BSC eavesdropper channel.
pub fn mgl_bound_details(model: &AuthModel, test: &Channel) -> Result<MglCheck> {
    if model.x_size() != 2 || !model.px.is_uniform(1e-12) {
        return Err(Error::NonBinaryModel("source must be a fair bit".into()));
    }
    let p = bsc_crossover(&model.ec, "enrollment channel")?;
    let eps = bsc_crossover(&model.ac_z, "eavesdropper channel")?;
    let j = one_aux_joint(model, test)?;
    let nats_to_bits = |v: f64| InfoUnit::Bits.from_nats(v);
    let h_u = j.entropy_nats(&[axis::U])?;
    let cond = |a: usize| -> Result<f64> { Ok(nats_to_bits(j.entropy_nats(&[a, axis::U])? - h_u)) };
    let h_x_given_u = cond(axis::X)?;
    let h_z_given_u = cond(axis::Z)?;
    let h_xt_given_u = cond(axis::X_TILDE)?;

    let t = hb_inverse_bits(h_x_given_u.clamp(0.0, 1.0));
    let eavesdropper_slack = h_z_given_u - hb_bits(conv(t, eps));
    let lambda = if p < 0.5 {
        ((t - p) / (1.0 - 2.0 * p)).clamp(0.0, 0.5)
    } else {
        0.5
    };
    Ok(MglCheck {
        h_x_given_u,
        h_z_given_u,
        h_xt_given_u,
        lambda,
        eavesdropper_slack,
        enrollment_slack: hb_bits(lambda) - h_xt_given_u,
    })
}

/// True iff both entropy inequalities hold within [`MGL_TOL`].
pub fn mgl_bound_check(model: &AuthModel, test: &Channel) -> Result<bool> {
    mgl_bound_details(model, test).map(|c| c.holds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::{eval_one_aux, random_test_channel};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    fn quick() -> ClassifierSettings {
        ClassifierSettings {
            trials: 500,
            ..Default::default()
        }
    }

    #[test]
    fn corner_at_half_is_leakage_floor() {
        let params = BinaryModelParams::new(0.1, 0.5, 0.2).unwrap();
        let c = theorem3_corner(&params, 0.5).unwrap();
        close(c.rs, 0.0, 1e-15);
        close(c.rj, 0.0, 1e-15);
        close(c.rl, 1.0 - hb_bits(0.2), 1e-15);
    }

    #[test]
    fn corner_at_zero() {
        let params = BinaryModelParams::new(0.1, 0.5, 0.2).unwrap();
        let c = theorem3_corner(&params, 0.0).unwrap();
        close(c.rs, 0.092_248_575_697_977_3, 1e-12);
        close(c.rj, 0.734_497_796_794_640_6, 1e-12);
        close(c.rl, 0.543_574_108_317_997_1, 1e-12);
    }

    #[test]
    fn noiseless_main_link_useless_eavesdropper() {
        let params = BinaryModelParams::new(0.0, 0.0, 0.5).unwrap();
        let c = theorem3_corner(&params, 0.0).unwrap();
        close(c.rs, 1.0, 1e-15);
        close(c.rj, 0.0, 1e-15);
        close(c.rl, 0.0, 1e-15);
    }

    #[test]
    fn out_of_range_parameters() {
        assert!(BinaryModelParams::new(0.6, 0.5, 0.2).is_err());
        assert!(BinaryModelParams::new(0.1, 1.5, 0.2).is_err());
        let params = BinaryModelParams::new(0.1, 0.5, 0.2).unwrap();
        assert!(theorem3_corner(&params, 0.7).is_err());
    }

    #[test]
    fn closed_form_matches_generic_evaluator() {
        let params = BinaryModelParams::new(0.1, 0.5, 0.2).unwrap();
        let model = params.to_model(&quick()).unwrap();
        for beta in [0.0, 0.03, 0.25, 0.4, 0.5] {
            let closed = theorem3_corner(&params, beta).unwrap();
            let generic = eval_one_aux(&model, &Channel::bsc(beta).unwrap(), InfoUnit::Bits).unwrap();
            close(closed.rs, generic.rs, 1e-9);
            close(closed.rj, generic.rj, 1e-9);
            close(closed.rl, generic.rl, 1e-9);
        }
    }

    #[test]
    fn region_on_single_half_grid() {
        let params = BinaryModelParams::new(0.1, 0.5, 0.2).unwrap();
        let b = theorem3_region_on_grid(&params, &[0.5], &quick()).unwrap();
        assert_eq!(b.corners.len(), 1);
        close(b.corners[0].rl, 1.0 - hb_bits(0.2), 1e-15);
        assert!(b.metadata.warnings.is_empty());
    }

    #[test]
    fn region_max_rs_at_zero_beta() {
        let params = BinaryModelParams::new(0.1, 0.5, 0.2).unwrap();
        let b = theorem3_region(&params, &quick()).unwrap();
        let top = b.max_rs().unwrap();
        close(top.rs, 0.092_248_575_697_977_3, 1e-12);
        assert_eq!(top.param, Some(CornerParam::Beta(0.0)));
    }

    #[test]
    fn noiseless_eavesdropper_degenerates() {
        let params = BinaryModelParams::new(0.1, 0.5, 0.0).unwrap();
        for beta in beta_grid(0.01).unwrap() {
            assert!(theorem3_corner(&params, beta).unwrap().rs_unclamped <= 1e-12);
        }
        let b = theorem3_region(&params, &quick()).unwrap();
        assert!(b.corners.iter().all(|c| c.rs <= 1e-12));
        assert!(!b.metadata.warnings.is_empty());
    }

    #[test]
    fn convolution_bounds_examples() {
        let b = lemma6_bounds(0.5, 0.2, 0.3).unwrap();
        assert_eq!((b.lower, b.mid, b.upper), (0.5, 0.5, 0.5));
        let b = lemma6_bounds(0.3, 0.1, 0.0).unwrap();
        close(b.lower, 0.34, 1e-15);
        assert_eq!(b.lower, b.mid);
        let b = lemma6_bounds(0.3, 0.1, 0.2).unwrap();
        close(b.lower, 0.233_333_333_333_333_3, 1e-15);
        close(b.mid, 0.404, 1e-15);
        assert!(matches!(lemma6_bounds(0.3, 0.1, 0.5), Err(Error::Degenerate(_))));
        assert!(lemma6_bounds(0.6, 0.1, 0.2).is_err());
    }

    #[test]
    fn mgl_examples() {
        let params = BinaryModelParams::new(0.1, 0.5, 0.2).unwrap();
        let model = params.to_model(&quick()).unwrap();
        let konst = Channel::constant(2, &DiscreteDistribution::point(1, 0).unwrap()).unwrap();
        let c = mgl_bound_details(&model, &konst).unwrap();
        close(c.h_x_given_u, 1.0, 1e-14);
        assert!(c.holds());

        let c = mgl_bound_details(&model, &Channel::identity(2).unwrap()).unwrap();
        close(c.h_x_given_u, hb_bits(0.1), 1e-12);
        close(c.h_z_given_u, hb_bits(conv(0.1, 0.2)), 1e-12);
        close(c.lambda, 0.0, 1e-9);
        // Deterministic U|X̃: both inequalities are tight.
        close(c.eavesdropper_slack, 0.0, 1e-9);
        close(c.enrollment_slack, 0.0, 1e-9);
        assert!(c.holds());

        for k in 0..200 {
            let test = random_test_channel(2, 1 + k % 5, 11, k as u64).unwrap();
            assert!(mgl_bound_check(&model, &test).unwrap(), "sample {k}");
        }
    }

    #[test]
    fn mgl_rejects_non_binary_models() {
        let params = BinaryModelParams::new(0.1, 0.5, 0.2).unwrap();
        let mut model = params.to_model(&quick()).unwrap();
        model.ac_z = Channel::bec(0.3).unwrap();
        assert!(mgl_bound_check(&model, &Channel::identity(2).unwrap()).is_err());
    }
}
