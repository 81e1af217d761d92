//! Partial orders between the two authentication-channel marginals.
//!
//! Degradedness is decided exactly by a small linear program. Less-noisy is
//! tested through concavity of `P ↦ I(X;B) − I(X;C)`: a midpoint violation
//! is a certificate that the order fails, while the absence of violations
//! over random pairs and a simplex grid is only evidence. More-capable is a
//! grid search plus local refinement for a negative `I(X;B) − I(X;C)`.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{compose_channels, entropy_nats_of, Channel};
use crate::rng;

/// Largest composition residual accepted as a degradedness witness.
pub const DEGRADED_TOL: f64 = 1e-9;
/// Midpoint-concavity slack before a violation counts.
pub const CONCAVITY_TOL: f64 = 1e-10;
/// Most negative capability gap still accepted as "holds".
pub const CAPABILITY_TOL: f64 = 1e-9;
/// Upper bound on deterministic simplex grid points per check.
pub const MAX_GRID_POINTS: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelRelation {
    DegradedZWrtY,
    DegradedYWrtZ,
    LessNoisyYOverZ,
    LessNoisyZOverY,
    MoreCapableY,
    MoreCapableZ,
    Unordered,
}

impl ChannelRelation {
    /// The same relation with the roles of Y and Z exchanged.
    pub fn swapped(self) -> Self {
        use ChannelRelation::*;
        match self {
            DegradedZWrtY => DegradedYWrtZ,
            DegradedYWrtZ => DegradedZWrtY,
            LessNoisyYOverZ => LessNoisyZOverY,
            LessNoisyZOverY => LessNoisyYOverZ,
            MoreCapableY => MoreCapableZ,
            MoreCapableZ => MoreCapableY,
            Unordered => Unordered,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certainty {
    Exact,
    Counterexample,
    StatisticalEvidence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `candidate = reference ∘ channel` up to `residual`.
    IntermediateChannel { channel: Channel, residual: f64 },
    /// Smallest achievable composition residual; above tolerance.
    MinimumResidual { residual: f64 },
    /// `f(mid) < (f(first) + f(second)) / 2` by `gap` nats.
    ConcavityViolation {
        first: Vec<f64>,
        second: Vec<f64>,
        gap: f64,
    },
    /// Concavity held on every checked pair.
    ConcavityEvidence { pairs_checked: usize, min_slack: f64 },
    /// Input law at which `I(X;B) − I(X;C)` is smallest, with that value.
    CapabilityMinimum { input: Vec<f64>, gap: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelOrderVerdict {
    pub relation: ChannelRelation,
    pub certainty: Certainty,
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ChannelOrderVerdict {
    pub fn holds(&self) -> bool {
        self.relation != ChannelRelation::Unordered
    }

    fn swapped(mut self) -> Self {
        self.relation = self.relation.swapped();
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSettings {
    pub trials: usize,
    pub seed: u64,
    pub grid_resolution: usize,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        Self {
            trials: 20_000,
            seed: 0,
            grid_resolution: 64,
        }
    }
}

fn same_inputs(a: &Channel, b: &Channel) -> Result<()> {
    if a.inputs() != b.inputs() {
        return Err(Error::DimensionMismatch(format!(
            "channels have {} and {} input symbols",
            a.inputs(),
            b.inputs()
        )));
    }
    Ok(())
}

/// Decides whether `candidate` is a stochastically degraded version of
/// `reference`, i.e. `candidate = reference ∘ W` for some channel `W`.
///
/// On success the relation is reported as `DegradedZWrtY` (candidate in the
/// Z role) with the intermediate channel as witness.
#[allow(clippy::needless_range_loop)] // columns of W are gathered across rows
pub fn is_stochastically_degraded(candidate: &Channel, reference: &Channel) -> Result<ChannelOrderVerdict> {
    same_inputs(candidate, reference)?;
    let (inner, outer) = (reference.outputs(), candidate.outputs());

    // minimize t  s.t.  |Σ_b R[a][b] W[b][c] − C[a][c]| ≤ t,  rows of W stochastic.
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    let w: Vec<Vec<_>> = (0..inner)
        .map(|_| (0..outer).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect())
        .collect();
    for row in &w {
        let terms: Vec<_> = row.iter().map(|&v| (v, 1.0)).collect();
        lp.add_constraint(&terms, ComparisonOp::Eq, 1.0);
    }
    for a in 0..reference.inputs() {
        for c in 0..outer {
            let mut terms: Vec<_> = (0..inner)
                .filter(|&b| reference.get(a, b) != 0.0)
                .map(|b| (w[b][c], reference.get(a, b)))
                .collect();
            let target = candidate.get(a, c);
            terms.push((t, -1.0));
            lp.add_constraint(&terms, ComparisonOp::Le, target);
            terms.last_mut().unwrap().1 = 1.0;
            lp.add_constraint(&terms, ComparisonOp::Ge, target);
        }
    }
    let solution = lp.solve().map_err(|e| Error::Solver(e.to_string()))?;

    let rows: Vec<Vec<f64>> = w
        .iter()
        .map(|row| {
            let mut r: Vec<f64> = row.iter().map(|&v| solution[v].max(0.0)).collect();
            let s: f64 = r.iter().sum();
            r.iter_mut().for_each(|x| *x /= s);
            r
        })
        .collect();
    let witness = Channel::new(rows)?;
    let residual = compose_channels(reference, &witness)?.max_abs_diff(candidate)?;

    if residual <= DEGRADED_TOL {
        Ok(ChannelOrderVerdict {
            relation: ChannelRelation::DegradedZWrtY,
            certainty: Certainty::Exact,
            witness: Some(Witness::IntermediateChannel {
                channel: witness,
                residual,
            }),
            note: None,
        })
    } else {
        Ok(ChannelOrderVerdict {
            relation: ChannelRelation::Unordered,
            certainty: Certainty::Exact,
            witness: Some(Witness::MinimumResidual {
                residual: solution.objective().max(0.0),
            }),
            note: None,
        })
    }
}

/// `I(X;B) − I(X;C)` in nats as a function of the input law.
struct CapabilityGap<'a> {
    better: &'a Channel,
    worse: &'a Channel,
    better_row_h: Vec<f64>,
    worse_row_h: Vec<f64>,
}

impl<'a> CapabilityGap<'a> {
    fn new(better: &'a Channel, worse: &'a Channel) -> Self {
        let row_h = |c: &Channel| c.rows().iter().map(|r| entropy_nats_of(r)).collect();
        Self {
            better,
            worse,
            better_row_h: row_h(better),
            worse_row_h: row_h(worse),
        }
    }

    fn eval(&self, px: &[f64]) -> f64 {
        mi_through(px, self.better, &self.better_row_h) - mi_through(px, self.worse, &self.worse_row_h)
    }
}

fn mi_through(px: &[f64], channel: &Channel, row_h: &[f64]) -> f64 {
    let mut out = vec![0.0; channel.outputs()];
    let mut cond = 0.0;
    for ((p, row), h) in px.iter().zip(channel.rows()).zip(row_h) {
        cond += p * h;
        for (o, w) in out.iter_mut().zip(row) {
            *o += p * w;
        }
    }
    entropy_nats_of(&out) - cond
}

/// Resolution actually used for a `k`-symbol simplex grid, reduced from the
/// requested one until the grid has at most [`MAX_GRID_POINTS`] points.
pub fn effective_grid_resolution(k: usize, requested: usize) -> usize {
    let mut res = requested.max(1);
    while res > 1 && grid_size(k, res) > MAX_GRID_POINTS as f64 {
        res -= 1;
    }
    res
}

fn grid_size(k: usize, res: usize) -> f64 {
    // C(res + k − 1, k − 1)
    (1..k).fold(1.0, |acc, i| acc * (res + i) as f64 / i as f64)
}

/// All points of the simplex with coordinates in multiples of `1/res`.
fn simplex_grid(k: usize, res: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=left {
            prefix.push(v);
            rec(k - 1, left - v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, res, &mut Vec::with_capacity(k), &mut out);
    out
}

fn to_probs(counts: &[usize], res: usize) -> Vec<f64> {
    counts.iter().map(|&c| c as f64 / res as f64).collect()
}

struct PairCheck {
    slack: f64,
    first: Vec<f64>,
    second: Vec<f64>,
}

fn midpoint_slack(gap: &CapabilityGap<'_>, first: Vec<f64>, second: Vec<f64>) -> PairCheck {
    let mid: Vec<f64> = first.iter().zip(&second).map(|(a, b)| 0.5 * (a + b)).collect();
    let slack = gap.eval(&mid) - 0.5 * (gap.eval(&first) + gap.eval(&second));
    PairCheck { slack, first, second }
}

/// Midpoint-concavity test of `I(X;better) − I(X;worse)`.
///
/// `trials` random pairs from the flat simplex measure are checked, plus
/// symmetric pairs around every point of a simplex grid. The most violated
/// pair is returned as a counterexample; otherwise the verdict is evidence.
pub fn is_less_noisy(
    better: &Channel,
    worse: &Channel,
    trials: usize,
    seed: u64,
    grid_resolution: usize,
) -> Result<ChannelOrderVerdict> {
    same_inputs(better, worse)?;
    if trials == 0 {
        return Err(Error::OutOfRange {
            name: "trials",
            value: 0.0,
            range: ">= 1",
        });
    }
    let k = better.inputs();
    let gap = CapabilityGap::new(better, worse);

    let random: Vec<PairCheck> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i);
            let a = rng::flat_simplex(&mut r, k);
            let b = rng::flat_simplex(&mut r, k);
            midpoint_slack(&gap, a, b)
        })
        .collect();

    let res = effective_grid_resolution(k, grid_resolution);
    let grid: Vec<PairCheck> = simplex_grid(k, res)
        .into_par_iter()
        .flat_map_iter(|point| {
            let mut checks = Vec::new();
            for i in 0..k {
                for j in (i + 1)..k {
                    let mut step = 1;
                    while step <= point[i].min(point[j]) {
                        let mut lo = point.clone();
                        let mut hi = point.clone();
                        lo[i] -= step;
                        lo[j] += step;
                        hi[i] += step;
                        hi[j] -= step;
                        checks.push(midpoint_slack(&gap, to_probs(&lo, res), to_probs(&hi, res)));
                        step *= 2;
                    }
                }
            }
            checks
        })
        .collect();

    let pairs_checked = random.len() + grid.len();
    let worst = random
        .into_iter()
        .chain(grid)
        .reduce(|a, b| if b.slack < a.slack { b } else { a })
        .expect("at least one trial");

    if worst.slack < -CONCAVITY_TOL {
        Ok(ChannelOrderVerdict {
            relation: ChannelRelation::Unordered,
            certainty: Certainty::Counterexample,
            witness: Some(Witness::ConcavityViolation {
                first: worst.first,
                second: worst.second,
                gap: -worst.slack,
            }),
            note: None,
        })
    } else {
        Ok(ChannelOrderVerdict {
            relation: ChannelRelation::LessNoisyYOverZ,
            certainty: Certainty::StatisticalEvidence,
            witness: Some(Witness::ConcavityEvidence {
                pairs_checked,
                min_slack: worst.slack,
            }),
            note: None,
        })
    }
}

/// Re-evaluates a concavity witness directly; returns the violation gap.
pub fn concavity_gap(better: &Channel, worse: &Channel, first: &[f64], second: &[f64]) -> Result<f64> {
    same_inputs(better, worse)?;
    let gap = CapabilityGap::new(better, worse);
    Ok(-midpoint_slack(&gap, first.to_vec(), second.to_vec()).slack)
}

/// Minimizes `I(X;better) − I(X;worse)` over the input simplex.
pub fn is_more_capable(better: &Channel, worse: &Channel, grid_resolution: usize) -> Result<ChannelOrderVerdict> {
    same_inputs(better, worse)?;
    let k = better.inputs();
    let gap = CapabilityGap::new(better, worse);
    let res = effective_grid_resolution(k, grid_resolution);

    let mut scored: Vec<(f64, Vec<f64>)> = simplex_grid(k, res)
        .into_par_iter()
        .map(|c| {
            let p = to_probs(&c, res);
            (gap.eval(&p), p)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    scored.truncate(8);

    let (value, input) = scored
        .into_iter()
        .map(|(v, p)| refine_minimum(&gap, p, v, 1.0 / res as f64))
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("grid is non-empty");

    let holds = value >= -CAPABILITY_TOL;
    Ok(ChannelOrderVerdict {
        relation: if holds {
            ChannelRelation::MoreCapableY
        } else {
            ChannelRelation::Unordered
        },
        certainty: if holds {
            Certainty::StatisticalEvidence
        } else {
            Certainty::Counterexample
        },
        witness: Some(Witness::CapabilityMinimum { input, gap: value }),
        note: None,
    })
}

/// Pattern search along the simplex edge directions `e_i − e_j`.
fn refine_minimum(gap: &CapabilityGap<'_>, mut p: Vec<f64>, mut value: f64, mut step: f64) -> (f64, Vec<f64>) {
    let k = p.len();
    while step > 1e-10 {
        let mut improved = false;
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let delta = step.min(p[j]);
                if delta <= 0.0 {
                    continue;
                }
                let mut q = p.clone();
                q[i] += delta;
                q[j] -= delta;
                let v = gap.eval(&q);
                if v < value {
                    value = v;
                    p = q;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (value, p)
}

/// Strongest verified relation between the main channel `ac_y` and the
/// eavesdropper's channel `ac_z`, in the order degraded, less noisy, more
/// capable, unordered.
pub fn classify_ac(ac_y: &Channel, ac_z: &Channel, settings: &ClassifierSettings) -> Result<ChannelOrderVerdict> {
    same_inputs(ac_y, ac_z)?;

    let z_deg = is_stochastically_degraded(ac_z, ac_y)?;
    let y_deg = is_stochastically_degraded(ac_y, ac_z)?;
    match (z_deg.holds(), y_deg.holds()) {
        (true, true) => {
            return Ok(ChannelOrderVerdict {
                note: Some(
                    "equivalent channels: each is degraded w.r.t. the other; reported as Z degraded w.r.t. Y".into(),
                ),
                ..z_deg
            })
        }
        (true, false) => return Ok(z_deg),
        (false, true) => return Ok(y_deg.swapped()),
        (false, false) => {}
    }

    let ln = |a, b| is_less_noisy(a, b, settings.trials, settings.seed, settings.grid_resolution);
    let y_ln = ln(ac_y, ac_z)?;
    if y_ln.holds() {
        return Ok(ChannelOrderVerdict {
            note: Some("not degraded in either direction".into()),
            ..y_ln
        });
    }
    let z_ln = ln(ac_z, ac_y)?;
    if z_ln.holds() {
        return Ok(ChannelOrderVerdict {
            note: Some("not degraded in either direction".into()),
            ..z_ln.swapped()
        });
    }

    let y_mc = is_more_capable(ac_y, ac_z, settings.grid_resolution)?;
    if y_mc.holds() {
        return Ok(ChannelOrderVerdict {
            note: Some("less-noisy refuted in both directions".into()),
            ..y_mc
        });
    }
    let z_mc = is_more_capable(ac_z, ac_y, settings.grid_resolution)?;
    if z_mc.holds() {
        return Ok(ChannelOrderVerdict {
            note: Some("less-noisy refuted in both directions".into()),
            ..z_mc.swapped()
        });
    }

    Ok(ChannelOrderVerdict {
        relation: ChannelRelation::Unordered,
        certainty: Certainty::Counterexample,
        witness: y_mc.witness,
        note: Some("more-capable refuted in both directions".into()),
    })
}
