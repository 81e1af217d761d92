//! CSV and JSON writers. Every file starts with (CSV) or carries (JSON) the
//! tool version, config hash and seed so outputs can be traced to inputs.

use std::fmt::Write as _;

use authcap::gaussian::GaussianModelParams;
use authcap::info::InfoUnit;
use authcap::region::{CornerParam, RateCorner, RegionBoundary};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Column order of region CSV files.
pub const REGION_COLUMNS: &str = "rs,rj,rl,unit,param,param_kind,u_size,test_channel";

#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub unit: InfoUnit,
}

impl Meta {
    pub fn new(command: &'static str, config_text: &[u8], seed: u64, unit: InfoUnit) -> Self {
        Self {
            tool: "authcap",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_sha256: hex::encode(Sha256::digest(config_text)),
            seed,
            unit,
        }
    }

    pub fn csv_comment(&self) -> String {
        format!(
            "# {} {} command={} config_sha256={} seed={} unit={}\n",
            self.tool, self.version, self.command, self.config_sha256, self.seed, self.unit
        )
    }
}

#[derive(Serialize)]
pub struct Document<'a, T: Serialize> {
    pub meta: &'a Meta,
    #[serde(flatten)]
    pub body: T,
}

pub fn json<T: Serialize>(meta: &Meta, body: T) -> String {
    let mut s = serde_json::to_string_pretty(&Document { meta, body }).expect("report serializes");
    s.push('\n');
    s
}

fn param_fields(p: Option<CornerParam>) -> (String, &'static str) {
    match p {
        Some(CornerParam::Beta(b)) => (b.to_string(), "beta"),
        Some(CornerParam::Alpha(a)) => (a.to_string(), "alpha"),
        Some(CornerParam::Sample(k)) => (k.to_string(), "sample"),
        None => (String::new(), ""),
    }
}

fn corner_row(c: &RateCorner) -> String {
    let (param, kind) = param_fields(c.param);
    let test = c
        .test_channel
        .as_ref()
        .map(|t| format!("\"{}\"", serde_json::to_string(t).expect("channel serializes")))
        .unwrap_or_default();
    let u = c.u_size().map(|u| u.to_string()).unwrap_or_default();
    format!("{},{},{},{},{param},{kind},{u},{test}\n", c.rs, c.rj, c.rl, c.unit)
}

pub fn region_csv(meta: &Meta, boundary: &RegionBoundary) -> String {
    let mut out = meta.csv_comment();
    out.push_str(REGION_COLUMNS);
    out.push('\n');
    for c in &boundary.corners {
        out.push_str(&corner_row(c));
    }
    out
}

/// One projection of the closed-form Gaussian curves; `value` picks the
/// vertical coordinate.
pub fn curve_csv(
    meta: &Meta,
    column: &str,
    curves: &[(&str, &GaussianModelParams, &[RateCorner])],
    value: impl Fn(&RateCorner) -> f64,
) -> String {
    let mut out = meta.csv_comment();
    let _ = writeln!(out, "model,rho1_sq,rj,{column},unit,alpha");
    for (label, params, corners) in curves {
        for c in corners.iter() {
            let (alpha, _) = param_fields(c.param);
            let _ = writeln!(
                out,
                "{label},{},{},{},{},{alpha}",
                params.rho1_sq,
                c.rj,
                value(c),
                c.unit
            );
        }
    }
    out
}
