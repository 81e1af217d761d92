//! Exact secrecy and privacy leakage by enumerating all `x̃ⁿ`.
//!
//! The table `P(s, j, x̃ⁿ)` is built from the encoder (its random choice
//! among typical codewords marginalized exactly), then pushed through the
//! per-symbol channel `P_{Z|X̃}` one position at a time. `P(j, xⁿ)` is
//! obtained the same way through the backward channel `P_{X|X̃}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Codebook, SimConfig};
use crate::error::{Error, Result};
use crate::info::{compose_channels, entropy_nats_of, Channel, InfoUnit};
use crate::region::AuthModel;

/// Cap on the number of entries of any enumerated table.
pub const MAX_TABLE_ENTRIES: usize = 1 << 25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactLeakage {
    /// `I(S; J, Zⁿ)` in bits.
    pub secrecy_leakage: f64,
    /// `I(Xⁿ; J, Zⁿ)/n` in bits per symbol.
    pub privacy_leakage: f64,
    /// `Σ |P(s,j,zⁿ) − P(j,zⁿ)/M_S|`.
    pub mu_n: f64,
    /// `H(S)` in bits.
    pub key_entropy: f64,
    /// Total mass of the enumerated table (1 up to rounding).
    pub mass: f64,
}

/// A table indexed by `(row, sequence)` with the sequence in mixed radix,
/// position 0 most significant.
#[derive(Clone, Debug)]
pub(crate) struct SeqTable {
    pub rows: usize,
    pub radices: Vec<usize>,
    pub data: Vec<f64>,
}

impl SeqTable {
    pub fn cols(&self) -> usize {
        self.radices.iter().product()
    }

    /// Replaces the symbol at `pos` by its image through `channel`.
    pub fn push_through(&self, pos: usize, channel: &Channel) -> Result<Self> {
        let (din, dout) = (channel.inputs(), channel.outputs());
        if self.radices[pos] != din {
            return Err(Error::DimensionMismatch(format!(
                "position {pos} has {} symbols, channel expects {din}",
                self.radices[pos]
            )));
        }
        let lo: usize = self.radices[pos + 1..].iter().product();
        let hi: usize = self.radices[..pos].iter().product();
        let mut radices = self.radices.clone();
        radices[pos] = dout;
        let (old_cols, new_cols) = (self.cols(), hi * dout * lo);
        check_size(self.rows, new_cols)?;
        let mut data = vec![0.0; self.rows * new_cols];
        data.par_chunks_mut(new_cols)
            .zip(self.data.par_chunks(old_cols))
            .for_each(|(out, inp)| {
                for h in 0..hi {
                    for d in 0..din {
                        let src = &inp[(h * din + d) * lo..(h * din + d + 1) * lo];
                        if src.iter().all(|&v| v == 0.0) {
                            continue;
                        }
                        for (o, &w) in channel.row(d).iter().enumerate() {
                            if w == 0.0 {
                                continue;
                            }
                            let dst = &mut out[(h * dout + o) * lo..(h * dout + o + 1) * lo];
                            for (t, &s) in dst.iter_mut().zip(src) {
                                *t += w * s;
                            }
                        }
                    }
                }
            });
        Ok(Self {
            rows: self.rows,
            radices,
            data,
        })
    }

    /// Pushes every position through `channel`.
    pub fn push_all(&self, channel: &Channel) -> Result<Self> {
        let mut t = self.clone();
        for pos in 0..t.radices.len() {
            t = t.push_through(pos, channel)?;
        }
        Ok(t)
    }
}

fn check_size(rows: usize, cols: usize) -> Result<()> {
    match rows.checked_mul(cols) {
        Some(v) if v <= MAX_TABLE_ENTRIES => Ok(()),
        _ => Err(Error::LimitExceeded(format!(
            "exact enumeration needs {rows} × {cols} entries (cap {MAX_TABLE_ENTRIES})"
        ))),
    }
}

fn bits(nats: f64) -> f64 {
    InfoUnit::Bits.from_nats(nats)
}

/// `P_{X|X̃}`; rows for impossible `x̃` are uniform and carry no mass.
fn backward_channel(model: &AuthModel) -> Result<Channel> {
    let (nx, nt) = (model.x_size(), model.x_tilde_size());
    let rows = (0..nt)
        .map(|t| {
            let joint: Vec<f64> = (0..nx).map(|x| model.px.probs()[x] * model.ec.get(x, t)).collect();
            let total: f64 = joint.iter().sum();
            if total > 0.0 {
                joint.iter().map(|v| v / total).collect()
            } else {
                vec![1.0 / nx as f64; nx]
            }
        })
        .collect();
    Channel::new(rows)
}

/// `P(s, j, x̃ⁿ)` with row index `s · M_J + j` (both zero-based).
pub(crate) fn key_helper_source_table(book: &Codebook, model: &AuthModel) -> Result<SeqTable> {
    let (n, nt) = (book.n(), model.x_tilde_size());
    let cols = nt
        .checked_pow(n as u32)
        .ok_or_else(|| Error::LimitExceeded("|X̃|^n overflows".into()))?;
    let rows = book.keys() * book.bins();
    check_size(rows, cols)?;
    let p_xt = model.ec.output_distribution(&model.px)?;
    let contributions = (0..cols)
        .into_par_iter()
        .map(|c| {
            let mut seq = vec![0u8; n];
            let (mut rest, mut prob) = (c, 1.0);
            for t in (0..n).rev() {
                seq[t] = (rest % nt) as u8;
                rest /= nt;
                prob *= p_xt.probs()[seq[t] as usize];
            }
            if prob == 0.0 {
                return Ok(Vec::new());
            }
            let typical = book.typical_set(&seq)?;
            if typical.is_empty() {
                return Ok(vec![(0, c, prob)]);
            }
            let w = prob / typical.len() as f64;
            Ok(typical
                .into_iter()
                .map(|i| ((book.key_of(i) - 1) * book.bins() + book.bin_of(i) - 1, c, w))
                .collect())
        })
        .collect::<Result<Vec<Vec<(usize, usize, f64)>>>>()?;
    let mut data = vec![0.0; rows * cols];
    for (r, c, w) in contributions.into_iter().flatten() {
        data[r * cols + c] += w;
    }
    // Absorb rounding in the product probabilities so entropies of constant keys are exactly 0.
    let total: f64 = data.iter().sum();
    data.iter_mut().for_each(|v| *v /= total);
    Ok(SeqTable {
        rows,
        radices: vec![nt; n],
        data,
    })
}

/// Sums rows `s · M_J + j` over `s`.
fn helper_marginal(t: &SeqTable, keys: usize, bins: usize) -> SeqTable {
    let cols = t.cols();
    let mut data = vec![0.0; bins * cols];
    for s in 0..keys {
        for j in 0..bins {
            let src = &t.data[(s * bins + j) * cols..(s * bins + j + 1) * cols];
            for (d, v) in data[j * cols..(j + 1) * cols].iter_mut().zip(src) {
                *d += v;
            }
        }
    }
    SeqTable {
        rows: bins,
        radices: t.radices.clone(),
        data,
    }
}

/// Exact leakage of `book` on `model`. Requires `n ≤ config.exact_leakage_limit`.
pub fn exact_leakage(book: &Codebook, model: &AuthModel, config: &SimConfig) -> Result<ExactLeakage> {
    if book.n() > config.exact_leakage_limit {
        return Err(Error::LimitExceeded(format!(
            "n = {} exceeds exact_leakage_limit = {}",
            book.n(),
            config.exact_leakage_limit
        )));
    }
    let (keys, bins, n) = (book.keys(), book.bins(), book.n());
    let source = key_helper_source_table(book, model)?;
    let backward = backward_channel(model)?;
    let z_given_xt = compose_channels(&backward, &model.ac_z)?;

    let sjz = source.push_all(&z_given_xt)?;
    let jz = helper_marginal(&sjz, keys, bins);
    let cols = sjz.cols();
    let ps: Vec<f64> = (0..keys)
        .map(|s| sjz.data[s * bins * cols..(s + 1) * bins * cols].iter().sum())
        .collect();
    let total: f64 = ps.iter().sum();
    let ps: Vec<f64> = ps.iter().map(|v| v / total).collect();
    let h_s = bits(entropy_nats_of(&ps));
    let h_jz = bits(entropy_nats_of(&jz.data));
    let h_sjz = bits(entropy_nats_of(&sjz.data));
    let secrecy = (h_s + h_jz - h_sjz).max(0.0);

    let mut mu = 0.0;
    for s in 0..keys {
        let block = &sjz.data[s * bins * cols..(s + 1) * bins * cols];
        mu += block
            .iter()
            .zip(&jz.data)
            .map(|(p, q)| (p - q / keys as f64).abs())
            .sum::<f64>();
    }

    // J − Xⁿ − Zⁿ, so H(J,Zⁿ|Xⁿ) = H(J|Xⁿ) + n H(Z|X).
    let jx = helper_marginal(&source, keys, bins).push_all(&backward)?;
    let h_x = bits(entropy_nats_of(model.px.probs()));
    let h_z_given_x: f64 = (0..model.x_size())
        .map(|x| model.px.probs()[x] * bits(entropy_nats_of(model.ac_z.row(x))))
        .sum();
    let h_j_given_x = bits(entropy_nats_of(&jx.data)) - n as f64 * h_x;
    let privacy = ((h_jz - h_j_given_x - n as f64 * h_z_given_x) / n as f64).max(0.0);

    Ok(ExactLeakage {
        secrecy_leakage: secrecy,
        privacy_leakage: privacy,
        mu_n: mu.min(2.0),
        key_entropy: h_s.abs(),
        mass: sjz.data.iter().sum(),
    })
}
