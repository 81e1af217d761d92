//! Finite-blocklength run of the random-binning authentication scheme:
//! a random codebook drawn from `P_U`, a typicality encoder, uniform binning
//! for the helper data, a universal hash for the key, and a typicality
//! decoder restricted to the announced bin.
//!
//! Rates and typicality slacks are in bits per symbol. Keys and bins are
//! 1-based at the API, matching the `(j, s) = (1, 1)` fallback.

mod hash;
mod leakage;

pub use hash::{gf_mul, AffineHash, MAX_FIELD_BITS};
pub use leakage::{exact_leakage, ExactLeakage};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{conditional_mutual_information, mutual_information, Channel, InfoUnit};
use crate::region::{axis, one_aux_joint, AuthModel};
use crate::rng;

/// Stream reserved for codebook generation; trials use streams `0..trials`.
const CODEBOOK_STREAM: u64 = u64::MAX;
/// Slack on the typicality thresholds, in bits over the whole block.
const THRESHOLD_EPS: f64 = 1e-10;
/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binning {
    /// Each codeword lands in a uniformly random bin.
    #[default]
    Uniform,
    /// One bin per codeword, so the helper data names the codeword.
    Bijective,
}

/// Replacement `(R_J, R_S)` in bits per symbol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateOverrides {
    pub rj: f64,
    pub rs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    /// `P_{U|X̃}`.
    pub test_channel: Channel,
    /// Typicality slack in bits.
    pub gamma: f64,
    #[serde(default)]
    pub rate_overrides: Option<RateOverrides>,
    #[serde(default)]
    pub binning: Binning,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_exact_limit")]
    pub exact_leakage_limit: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_max_codewords")]
    pub max_codewords: usize,
}

fn default_exact_limit() -> usize {
    10
}

fn default_trials() -> usize {
    10_000
}

fn default_max_codewords() -> usize {
    1 << 20
}

impl SimConfig {
    pub fn new(n: usize, test_channel: Channel, gamma: f64) -> Self {
        Self {
            n,
            test_channel,
            gamma,
            rate_overrides: None,
            binning: Binning::Uniform,
            seed: 0,
            exact_leakage_limit: default_exact_limit(),
            trials: default_trials(),
            max_codewords: default_max_codewords(),
        }
    }

    pub fn validate(&self, model: &AuthModel) -> Result<()> {
        if self.n == 0 {
            return Err(Error::OutOfRange {
                name: "n",
                value: 0.0,
                range: "[1, ∞)",
            });
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::OutOfRange {
                name: "gamma",
                value: self.gamma,
                range: "(0, ∞)",
            });
        }
        if self.trials == 0 {
            return Err(Error::OutOfRange {
                name: "trials",
                value: 0.0,
                range: "[1, ∞)",
            });
        }
        if self.test_channel.inputs() != model.x_tilde_size() {
            return Err(Error::DimensionMismatch(format!(
                "test channel has {} inputs, enrollment output alphabet has {}",
                self.test_channel.inputs(),
                model.x_tilde_size()
            )));
        }
        let too_big = [model.x_tilde_size(), self.test_channel.outputs(), model.ac_y.outputs()]
            .into_iter()
            .any(|k| k > u8::MAX as usize);
        if too_big {
            return Err(Error::LimitExceeded("alphabets above 255 symbols".into()));
        }
        if let Some(o) = self.rate_overrides {
            if !(o.rj.is_finite() && o.rs.is_finite()) {
                return Err(Error::OutOfRange {
                    name: "rate_overrides",
                    value: f64::NAN,
                    range: "finite",
                });
            }
        }
        Ok(())
    }
}

/// Information terms and the integer sizes derived from them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeRates {
    pub i_xt_u: f64,
    pub i_y_u: f64,
    pub i_z_u: f64,
    pub i_xt_u_given_y: f64,
    /// Helper-data rate used, bits per symbol.
    pub rj: f64,
    /// Key rate used, bits per symbol; may be negative.
    pub rs: f64,
    pub codebook_size: usize,
    pub bins: usize,
    pub keys: usize,
}

/// Sizes `⌈2^{n(I(X̃;U)+2γ)}⌉`, `2^{max(0, round(n R_J))}` and
/// `2^{max(0, round(n R_S))}` with the default rates
/// `R_J = I(X̃;U|Y) + 4γ` and `R_S = I(Y;U) − I(Z;U) − 6γ`.
pub fn scheme_rates(model: &AuthModel, config: &SimConfig) -> Result<SchemeRates> {
    config.validate(model)?;
    let j = one_aux_joint(model, &config.test_channel)?;
    let bits = InfoUnit::Bits;
    let i_xt_u = mutual_information(&j, &[axis::X_TILDE], &[axis::U], bits)?;
    let i_y_u = mutual_information(&j, &[axis::Y], &[axis::U], bits)?;
    let i_z_u = mutual_information(&j, &[axis::Z], &[axis::U], bits)?;
    let i_xt_u_given_y = conditional_mutual_information(&j, &[axis::X_TILDE], &[axis::U], &[axis::Y], bits)?;
    let (g, n) = (config.gamma, config.n as f64);
    let (rj, rs) = match config.rate_overrides {
        Some(o) => (o.rj, o.rs),
        None => (i_xt_u_given_y + 4.0 * g, i_y_u - i_z_u - 6.0 * g),
    };

    let exponent = n * (i_xt_u + 2.0 * g);
    if exponent > (config.max_codewords as f64).log2() + 1e-9 {
        return Err(Error::LimitExceeded(format!(
            "codebook of 2^{exponent:.2} words exceeds max_codewords = {}",
            config.max_codewords
        )));
    }
    let codebook_size = ((2f64.powf(exponent) - 1e-9).ceil() as usize).max(1);
    let pow2 = |name: &str, rate: f64| -> Result<usize> {
        let b = (n * rate).round().max(0.0);
        if b > MAX_FIELD_BITS as f64 {
            return Err(Error::LimitExceeded(format!(
                "{name} needs {b} bits, cap is {MAX_FIELD_BITS}"
            )));
        }
        Ok(1usize << b as u32)
    };
    let bins = match config.binning {
        Binning::Uniform => pow2("helper data", rj)?,
        Binning::Bijective => codebook_size,
    };
    Ok(SchemeRates {
        i_xt_u,
        i_y_u,
        i_z_u,
        i_xt_u_given_y,
        rj,
        rs,
        codebook_size,
        bins,
        keys: pow2("key", rs)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    n: usize,
    u_size: usize,
    x_tilde_size: usize,
    y_size: usize,
    /// Row-major `codebook_size × n`.
    words: Vec<u8>,
    /// Zero-based bin of each codeword.
    bin_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    pub hash: AffineHash,
    pub rates: SchemeRates,
    /// `log2 P(u|x̃)/P(u)` at `[x̃ · |U| + u]`, `-inf` where `P(u|x̃) = 0`.
    enc_density: Vec<f64>,
    /// `log2 P(y|u)/P(y)` at `[y · |U| + u]`.
    dec_density: Vec<f64>,
    enc_threshold: f64,
    dec_threshold: f64,
}

fn draw<R: Rng + ?Sized>(probs: &[f64], r: &mut R) -> usize {
    let mut u: f64 = r.random();
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            if u < p {
                return i;
            }
            u -= p;
            last = i;
        }
    }
    last
}

fn log_density(joint: &[f64], a_size: usize, b_size: usize) -> Vec<f64> {
    let pa: Vec<f64> = (0..a_size)
        .map(|a| joint[a * b_size..(a + 1) * b_size].iter().sum())
        .collect();
    let pb: Vec<f64> = (0..b_size)
        .map(|b| (0..a_size).map(|a| joint[a * b_size + b]).sum())
        .collect();
    let mut out = vec![f64::NEG_INFINITY; a_size * b_size];
    for a in 0..a_size {
        for b in 0..b_size {
            let p = joint[a * b_size + b];
            if p > 0.0 {
                out[a * b_size + b] = (p / (pa[a] * pb[b])).log2();
            }
        }
    }
    out
}

/// Draws the codebook, bins and hash. Deterministic given `config.seed`.
pub fn generate_codebook(model: &AuthModel, config: &SimConfig) -> Result<Codebook> {
    let rates = scheme_rates(model, config)?;
    let j = one_aux_joint(model, &config.test_channel)?;
    let (xt, u, y) = (
        model.x_tilde_size(),
        config.test_channel.outputs(),
        model.ac_y.outputs(),
    );
    let pu = j.marginal(&[axis::U])?;
    let mut r = rng::stream(config.seed, CODEBOOK_STREAM);
    let words: Vec<u8> = (0..rates.codebook_size * config.n)
        .map(|_| draw(pu.probs(), &mut r) as u8)
        .collect();
    let bin_of: Vec<usize> = match config.binning {
        Binning::Uniform => (0..rates.codebook_size)
            .map(|_| r.random_range(0..rates.bins))
            .collect(),
        Binning::Bijective => (0..rates.codebook_size).collect(),
    };
    let hash = AffineHash::random(&mut r, rates.codebook_size, rates.keys.trailing_zeros())?;
    let n = config.n as f64;
    let mut book = Codebook {
        n: config.n,
        u_size: u,
        x_tilde_size: xt,
        y_size: y,
        words,
        bin_of,
        members: Vec::new(),
        hash,
        rates,
        enc_density: log_density(j.marginal(&[axis::X_TILDE, axis::U])?.probs(), xt, u),
        dec_density: log_density(j.marginal(&[axis::Y, axis::U])?.probs(), y, u),
        enc_threshold: n * (rates.i_xt_u + config.gamma) + THRESHOLD_EPS,
        dec_threshold: n * (rates.i_y_u - config.gamma) - THRESHOLD_EPS,
    };
    book.index_bins();
    Ok(book)
}

impl Codebook {
    fn index_bins(&mut self) {
        self.members = vec![Vec::new(); self.rates.bins];
        for (i, &b) in self.bin_of.iter().enumerate() {
            self.members[b].push(i);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.bin_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bin_of.is_empty()
    }

    pub fn bins(&self) -> usize {
        self.rates.bins
    }

    pub fn keys(&self) -> usize {
        self.rates.keys
    }

    pub fn codeword(&self, index: usize) -> &[u8] {
        &self.words[index * self.n..(index + 1) * self.n]
    }

    /// 1-based bin of a zero-based codeword index.
    pub fn bin_of(&self, index: usize) -> usize {
        self.bin_of[index] + 1
    }

    /// 1-based key of a zero-based codeword index.
    pub fn key_of(&self, index: usize) -> usize {
        self.hash.apply(index) + 1
    }

    /// Same codewords and hash with every codeword in a single bin.
    pub fn with_single_bin(&self) -> Self {
        let mut out = self.clone();
        out.bin_of = vec![0; self.len()];
        out.rates.bins = 1;
        out.index_bins();
        out
    }

    fn check_seq(&self, seq: &[u8], alphabet: usize) -> Result<()> {
        if seq.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: seq.len(),
            });
        }
        if let Some(&s) = seq.iter().find(|&&s| s as usize >= alphabet) {
            return Err(Error::OutOfRange {
                name: "symbol",
                value: s as f64,
                range: "the channel alphabet",
            });
        }
        Ok(())
    }

    /// Block information density `Σ log2 P(u_t|x̃_t)/P(u_t)`.
    pub fn encoder_density(&self, index: usize, x_tilde: &[u8]) -> f64 {
        self.codeword(index)
            .iter()
            .zip(x_tilde)
            .map(|(&u, &x)| self.enc_density[x as usize * self.u_size + u as usize])
            .sum()
    }

    /// Block information density `Σ log2 P(y_t|u_t)/P(y_t)`.
    pub fn decoder_density(&self, index: usize, y: &[u8]) -> f64 {
        self.codeword(index)
            .iter()
            .zip(y)
            .map(|(&u, &y)| self.dec_density[y as usize * self.u_size + u as usize])
            .sum()
    }

    /// Indices jointly typical with `x_tilde`: density at most
    /// `n(I(X̃;U) + γ)` and positive conditional probability.
    pub fn typical_set(&self, x_tilde: &[u8]) -> Result<Vec<usize>> {
        self.check_seq(x_tilde, self.x_tilde_size)?;
        Ok((0..self.len())
            .filter(|&i| {
                let d = self.encoder_density(i, x_tilde);
                d.is_finite() && d <= self.enc_threshold
            })
            .collect())
    }

    /// Members of the 1-based `bin` whose decoder density is at least `n(I(Y;U) − γ)`.
    pub fn decodable_in_bin(&self, y: &[u8], bin: usize) -> Result<Vec<usize>> {
        self.check_seq(y, self.y_size)?;
        if bin == 0 || bin > self.bins() {
            return Err(Error::BinOutOfRange { bin, bins: self.bins() });
        }
        Ok(self.members[bin - 1]
            .iter()
            .copied()
            .filter(|&i| self.decoder_density(i, y) >= self.dec_threshold)
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enrollment {
    pub bin: usize,
    pub key: usize,
    /// Chosen codeword; `None` when the encoder fell back to `(1, 1)`.
    pub index: Option<usize>,
    pub candidates: usize,
}

impl Enrollment {
    pub fn encoder_failed(&self) -> bool {
        self.index.is_none()
    }
}

/// Picks a typical codeword uniformly at random and publishes its bin.
pub fn enroll<R: Rng + ?Sized>(codebook: &Codebook, x_tilde: &[u8], r: &mut R) -> Result<Enrollment> {
    let t = codebook.typical_set(x_tilde)?;
    Ok(if t.is_empty() {
        Enrollment {
            bin: 1,
            key: 1,
            index: None,
            candidates: 0,
        }
    } else {
        let i = t[r.random_range(0..t.len())];
        Enrollment {
            bin: codebook.bin_of(i),
            key: codebook.key_of(i),
            index: Some(i),
            candidates: t.len(),
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Authentication {
    pub key: usize,
    pub index: Option<usize>,
    pub hits: usize,
}

impl Authentication {
    pub fn decoder_failed(&self) -> bool {
        self.index.is_none()
    }
}

/// Key from the unique decodable codeword in `bin`; `1` otherwise.
pub fn authenticate(codebook: &Codebook, y: &[u8], bin: usize) -> Result<Authentication> {
    let hits = codebook.decodable_in_bin(y, bin)?;
    Ok(match hits.as_slice() {
        [i] => Authentication {
            key: codebook.key_of(*i),
            index: Some(*i),
            hits: 1,
        },
        _ => Authentication {
            key: 1,
            index: None,
            hits: hits.len(),
        },
    })
}

/// Binomial proportion with a Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub count: usize,
    pub trials: usize,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    pub fn wilson(count: usize, trials: usize) -> Self {
        let n = trials as f64;
        let p = count as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Self {
            count,
            trials,
            value: p,
            ci_low: if count == 0 { 0.0 } else { (center - half).max(0.0) },
            ci_high: if count == trials { 1.0 } else { (center + half).min(1.0) },
        }
    }

    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n: usize,
    pub seed: u64,
    pub gamma: f64,
    pub binning: Binning,
    pub rates: SchemeRates,
    pub hash: AffineHash,
    /// `Pr{Ŝ ≠ S}`.
    pub error_prob: Estimate,
    /// Decoded codeword differs from the enrolled one (encoder failures included).
    pub codeword_error: Estimate,
    pub encoder_failure_rate: f64,
    pub decoder_failure_rate: f64,
    pub decoder_ambiguity_rate: f64,
    pub exact: Option<ExactLeakage>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Copy, Default)]
struct Tally {
    key_errors: usize,
    codeword_errors: usize,
    encoder_failures: usize,
    decoder_failures: usize,
    ambiguous: usize,
}

impl std::ops::Add for Tally {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            key_errors: self.key_errors + o.key_errors,
            codeword_errors: self.codeword_errors + o.codeword_errors,
            encoder_failures: self.encoder_failures + o.encoder_failures,
            decoder_failures: self.decoder_failures + o.decoder_failures,
            ambiguous: self.ambiguous + o.ambiguous,
        }
    }
}

fn trial(model: &AuthModel, book: &Codebook, seed: u64, index: u64) -> Result<Tally> {
    let mut r = rng::stream(seed, index);
    let n = book.n();
    let mut xt = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let x = draw(model.px.probs(), &mut r);
        xt.push(draw(model.ec.row(x), &mut r) as u8);
        y.push(draw(model.ac_y.row(x), &mut r) as u8);
    }
    let e = enroll(book, &xt, &mut r)?;
    let a = authenticate(book, &y, e.bin)?;
    Ok(Tally {
        key_errors: usize::from(a.key != e.key),
        codeword_errors: usize::from(e.index.is_none() || a.index != e.index),
        encoder_failures: usize::from(e.encoder_failed()),
        decoder_failures: usize::from(a.hits == 0),
        ambiguous: usize::from(a.hits > 1),
    })
}

/// Monte-Carlo error estimates on `codebook`, plus exact leakage when
/// `n ≤ exact_leakage_limit`.
pub fn simulate_with_codebook(model: &AuthModel, config: &SimConfig, book: &Codebook) -> Result<SimReport> {
    let tally = (0..config.trials as u64)
        .into_par_iter()
        .map(|i| trial(model, book, config.seed, i))
        .try_reduce(Tally::default, |a, b| Ok(a + b))?;
    let trials = config.trials;
    let rate = |c: usize| c as f64 / trials as f64;
    let mut notes = Vec::new();
    if book.keys() == 1 {
        notes.push("single key: key errors and secrecy leakage are zero by construction".to_string());
    }
    let exact = if config.n <= config.exact_leakage_limit {
        Some(exact_leakage(book, model, config)?)
    } else {
        notes.push(format!(
            "exact leakage skipped: n = {} exceeds the limit {}",
            config.n, config.exact_leakage_limit
        ));
        None
    };
    Ok(SimReport {
        n: config.n,
        seed: config.seed,
        gamma: config.gamma,
        binning: config.binning,
        rates: book.rates,
        hash: book.hash,
        error_prob: Estimate::wilson(tally.key_errors, trials),
        codeword_error: Estimate::wilson(tally.codeword_errors, trials),
        encoder_failure_rate: rate(tally.encoder_failures),
        decoder_failure_rate: rate(tally.decoder_failures),
        decoder_ambiguity_rate: rate(tally.ambiguous),
        exact,
        notes,
    })
}

/// Generates the codebook and runs [`simulate_with_codebook`]. Deterministic given the seed.
pub fn run_simulation(model: &AuthModel, config: &SimConfig) -> Result<SimReport> {
    let book = generate_codebook(model, config)?;
    simulate_with_codebook(model, config, &book)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::BinaryModelParams;
    use crate::classify::ClassifierSettings;
    use crate::info::DiscreteDistribution;

    fn settings() -> ClassifierSettings {
        ClassifierSettings {
            trials: 500,
            ..Default::default()
        }
    }

    fn reference_model() -> AuthModel {
        BinaryModelParams::new(0.1, 0.5, 0.2)
            .unwrap()
            .to_model(&settings())
            .unwrap()
    }

    fn noiseless_model() -> AuthModel {
        let id = Channel::identity(2).unwrap();
        AuthModel::new(
            DiscreteDistribution::uniform(2).unwrap(),
            id.clone(),
            id,
            Channel::bsc(0.5).unwrap(),
            &settings(),
        )
        .unwrap()
    }

    #[test]
    fn codebook_size_formula() {
        // U from X̃ through BSC(β) with 1 − H_b(β) = 0.53 bits; γ = 0.05, n = 8.
        let m = reference_model();
        let beta = crate::info::binary_entropy_inverse(1.0 - 0.53).unwrap();
        let cfg = SimConfig::new(8, Channel::bsc(beta).unwrap(), 0.05);
        let r = scheme_rates(&m, &cfg).unwrap();
        assert!((r.i_xt_u - 0.53).abs() < 1e-9);
        assert_eq!(r.codebook_size, 33);
        // Default rates: the key rate is negative at this γ.
        assert!(r.rs < 0.0);
        assert_eq!(r.keys, 1);
    }

    #[test]
    fn single_codeword_book() {
        let m = reference_model();
        let konst = Channel::constant(2, &DiscreteDistribution::point(2, 0).unwrap()).unwrap();
        let cfg = SimConfig {
            trials: 200,
            ..SimConfig::new(6, konst, 1e-12)
        };
        let book = generate_codebook(&m, &cfg).unwrap();
        assert_eq!(book.len(), 1);
        let rep = simulate_with_codebook(&m, &cfg, &book).unwrap();
        assert_eq!(rep.error_prob.count, 0);
    }

    #[test]
    fn deterministic_given_seed() {
        let m = reference_model();
        let cfg = SimConfig {
            trials: 300,
            seed: 9,
            ..SimConfig::new(6, Channel::bsc(0.05).unwrap(), 0.1)
        };
        let a = run_simulation(&m, &cfg).unwrap();
        let b = run_simulation(&m, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = run_simulation(&m, &SimConfig { seed: 10, ..cfg }).unwrap();
        assert_ne!(a.hash, c.hash);
    }

    #[test]
    fn noiseless_bijective_recovers_keys() {
        let m = noiseless_model();
        let cfg = SimConfig {
            binning: Binning::Bijective,
            rate_overrides: Some(RateOverrides { rj: 1.0, rs: 0.25 }),
            trials: 2000,
            exact_leakage_limit: 0,
            ..SimConfig::new(8, Channel::identity(2).unwrap(), 0.25)
        };
        let book = generate_codebook(&m, &cfg).unwrap();
        assert_eq!(book.keys(), 4);
        assert_eq!(book.bins(), book.len());
        let rep = simulate_with_codebook(&m, &cfg, &book).unwrap();
        assert_eq!(rep.error_prob.count, 0);
        assert!(rep.encoder_failure_rate < 0.01);
    }

    #[test]
    fn enroll_selects_matching_codeword() {
        let m = noiseless_model();
        let cfg = SimConfig {
            binning: Binning::Bijective,
            ..SimConfig::new(6, Channel::identity(2).unwrap(), 0.5)
        };
        let book = generate_codebook(&m, &cfg).unwrap();
        let target = book.codeword(3).to_vec();
        let mut r = rng::stream(1, 1);
        let e = enroll(&book, &target, &mut r).unwrap();
        let i = e.index.unwrap();
        assert_eq!(book.codeword(i), target.as_slice());
        let a = authenticate(&book, &target, e.bin).unwrap();
        assert_eq!(a.key, e.key);
    }

    #[test]
    fn encoder_fallback_and_errors() {
        let m = noiseless_model();
        let cfg = SimConfig::new(4, Channel::identity(2).unwrap(), 0.01);
        let book = generate_codebook(&m, &cfg).unwrap();
        let missing = (0u8..16)
            .map(|v| (0..4).map(|t| (v >> t) & 1).collect::<Vec<u8>>())
            .find(|s| (0..book.len()).all(|i| book.codeword(i) != s.as_slice()));
        if let Some(s) = missing {
            let e = enroll(&book, &s, &mut rng::stream(0, 0)).unwrap();
            assert_eq!((e.bin, e.key, e.encoder_failed()), (1, 1, true));
        }
        assert!(matches!(
            enroll(&book, &[0, 1], &mut rng::stream(0, 0)),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            authenticate(&book, &[0, 1, 0, 1], book.bins() + 1),
            Err(Error::BinOutOfRange { .. })
        ));
        assert!(authenticate(&book, &[0, 1, 0, 1], 0).is_err());
    }

    #[test]
    fn block_density_matches_definition() {
        let m = reference_model();
        let test = Channel::bsc(0.2).unwrap();
        let cfg = SimConfig::new(5, test.clone(), 0.1);
        let book = generate_codebook(&m, &cfg).unwrap();
        let xt = [0u8, 1, 1, 0, 1];
        // P_U is uniform for a BSC test channel on a uniform X̃.
        for i in 0..book.len().min(10) {
            let u = book.codeword(i);
            let direct: f64 = u
                .iter()
                .zip(&xt)
                .map(|(&u, &x)| test.get(x as usize, u as usize))
                .product();
            let expected = (direct / 0.5f64.powi(5)).log2();
            assert!((book.encoder_density(i, &xt) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn encoder_rarely_fails_with_identity_leaning_test() {
        let m = reference_model();
        let cfg = SimConfig {
            trials: 10_000,
            exact_leakage_limit: 0,
            ..SimConfig::new(8, Channel::bsc(0.05).unwrap(), 0.1)
        };
        let rep = run_simulation(&m, &cfg).unwrap();
        assert!(rep.encoder_failure_rate < 0.05, "{}", rep.encoder_failure_rate);
    }

    #[test]
    fn wilson_interval() {
        let e = Estimate::wilson(0, 100);
        assert_eq!(e.ci_low, 0.0);
        assert!((e.ci_high - 0.036_993_498_206_985_68).abs() < 1e-9);
        let e = Estimate::wilson(50, 100);
        assert!((e.ci_low + e.ci_high - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_rejects_bad_values() {
        let m = reference_model();
        let bsc = Channel::bsc(0.1).unwrap();
        assert!(SimConfig::new(0, bsc.clone(), 0.1).validate(&m).is_err());
        assert!(SimConfig::new(4, bsc.clone(), 0.0).validate(&m).is_err());
        assert!(SimConfig::new(4, Channel::identity(3).unwrap(), 0.1)
            .validate(&m)
            .is_err());
        let huge = SimConfig::new(64, bsc, 0.1);
        assert!(matches!(generate_codebook(&m, &huge), Err(Error::LimitExceeded(_))));
    }
}
