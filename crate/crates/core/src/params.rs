//! Parameter sets.
//!
//! The three HQC-RMRS instances plus the two simulation-only sets used for
//! the error-weight studies. `sim-set-i` has a 23746-bit code length that no
//! RM/RS concatenation produces, so it exists only as an [`ErrorProfile`].

use serde::Serialize;

use crate::concat::ConcatCode;
use crate::error::{Error, Result};
use crate::ring::validate_primitive_prime;
use crate::rm::RmCode;
use crate::rs::RsCode;

/// Weights and lengths that determine the distribution of the error `e'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ErrorProfile {
    /// Ring length.
    pub n: usize,
    /// Weight of the secret vectors `x`, `y`.
    pub w: usize,
    /// Weight of `r1`, `r2`.
    pub w_r: usize,
    /// Weight of `e`.
    pub w_e: usize,
    /// Length of the auxiliary code `n1*n2`; the last `n - code_length`
    /// coordinates are dropped before measuring weights.
    pub code_length: usize,
}

impl ErrorProfile {
    pub fn new(n: usize, w: usize, w_r: usize, w_e: usize, code_length: usize) -> Result<Self> {
        let p = Self {
            n,
            w,
            w_r,
            w_e,
            code_length,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("ring length must be positive"));
        }
        for (name, v) in [("w", self.w), ("w_r", self.w_r), ("w_e", self.w_e)] {
            if v > self.n {
                return Err(Error::invalid(format!(
                    "{name} = {v} exceeds n = {}",
                    self.n
                )));
            }
        }
        if self.code_length > self.n {
            return Err(Error::invalid(format!(
                "code length {} exceeds n = {}",
                self.code_length, self.n
            )));
        }
        Ok(())
    }

    /// Number of truncated coordinates `l = n - n1*n2`.
    pub fn truncation(&self) -> usize {
        self.n - self.code_length
    }
}

/// A complete HQC-RMRS instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HqcParams {
    pub name: String,
    /// Identifier written into key and ciphertext files; 0 for custom sets.
    pub id: u8,
    pub security_bits: u32,
    pub n: usize,
    pub w: usize,
    pub w_r: usize,
    pub w_e: usize,
    pub inner: RmCode,
    pub outer: RsCode,
}

impl HqcParams {
    /// Builds and validates a parameter set.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        id: u8,
        security_bits: u32,
        n: usize,
        w: usize,
        w_r: usize,
        w_e: usize,
        multiplicity: usize,
        outer_length: usize,
    ) -> Result<Self> {
        let params = Self {
            name: name.into(),
            id,
            security_bits,
            n,
            w,
            w_r,
            w_e,
            inner: RmCode::new(multiplicity)?,
            outer: RsCode::with_length(outer_length)?,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !validate_primitive_prime(self.n as u64) {
            return Err(Error::invalid(format!(
                "n = {} is not a primitive prime",
                self.n
            )));
        }
        if self.code_length() > self.n {
            return Err(Error::invalid(format!(
                "code length {} exceeds n = {}",
                self.code_length(),
                self.n
            )));
        }
        self.error_profile().validate()
    }

    /// `N = n_e * n_i`.
    pub fn code_length(&self) -> usize {
        self.outer.length() * self.inner.length()
    }

    /// `l = n - N`.
    pub fn truncation(&self) -> usize {
        self.n - self.code_length()
    }

    /// Correction capacity of the outer code, the scheme parameter `delta`.
    pub fn delta(&self) -> usize {
        self.outer.correction_capacity()
    }

    pub fn code(&self) -> ConcatCode {
        ConcatCode::new(self.outer.clone(), self.inner).expect("validated outer code")
    }

    pub fn error_profile(&self) -> ErrorProfile {
        ErrorProfile {
            n: self.n,
            w: self.w,
            w_r: self.w_r,
            w_e: self.w_e,
            code_length: self.code_length(),
        }
    }

    /// Same instance with a different outer length, for DFR sweeps.
    pub fn with_outer_length(&self, outer_length: usize) -> Result<Self> {
        let mut p = self.clone();
        p.outer = RsCode::with_length(outer_length)?;
        p.name = format!("{}/rs{}", self.name, outer_length);
        p.id = 0;
        p.validate()?;
        Ok(p)
    }

    pub fn summary(&self) -> ParamsSummary {
        ParamsSummary {
            name: self.name.clone(),
            id: self.id,
            security_bits: self.security_bits,
            n: self.n,
            w: self.w,
            w_r: self.w_r,
            w_e: self.w_e,
            reed_muller: [
                self.inner.length(),
                self.inner.dimension(),
                self.inner.min_distance(),
            ],
            reed_solomon: [
                self.outer.length(),
                self.outer.dimension(),
                self.outer.min_distance(),
            ],
            code_length: self.code_length(),
            truncation: self.truncation(),
            delta: self.delta(),
            dfr_target_log2: -(self.security_bits as i64),
        }
    }
}

impl Serialize for HqcParams {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.summary().serialize(serializer)
    }
}

/// Flat view of a parameter set for reports.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ParamsSummary {
    pub name: String,
    pub id: u8,
    pub security_bits: u32,
    pub n: usize,
    pub w: usize,
    pub w_r: usize,
    pub w_e: usize,
    pub reed_muller: [usize; 3],
    pub reed_solomon: [usize; 3],
    pub code_length: usize,
    pub truncation: usize,
    pub delta: usize,
    pub dfr_target_log2: i64,
}

pub const HQC_RMRS_128: &str = "hqc-rmrs-128";
pub const HQC_RMRS_192: &str = "hqc-rmrs-192";
pub const HQC_RMRS_256: &str = "hqc-rmrs-256";
pub const SIM_SET_I: &str = "sim-set-i";
pub const SIM_SET_II: &str = "sim-set-ii";

/// Names of the scheme instances.
pub const SCHEME_SETS: [&str; 3] = [HQC_RMRS_128, HQC_RMRS_192, HQC_RMRS_256];

/// Names accepted wherever only an error profile is needed.
pub const PROFILE_SETS: [&str; 5] = [
    HQC_RMRS_128,
    HQC_RMRS_192,
    HQC_RMRS_256,
    SIM_SET_I,
    SIM_SET_II,
];

/// Key-size reduction over the BCH/repetition instantiation, as published.
/// Documentation only; that instantiation is not implemented here.
pub fn published_gain(name: &str) -> Option<&'static str> {
    match name {
        HQC_RMRS_128 => Some("16.8%"),
        HQC_RMRS_192 => Some("16.7%"),
        HQC_RMRS_256 => Some("15.4%"),
        _ => None,
    }
}

/// Looks up one of the three HQC-RMRS instances.
pub fn scheme(name: &str) -> Result<HqcParams> {
    match name {
        HQC_RMRS_128 => HqcParams::new(HQC_RMRS_128, 1, 128, 20_533, 67, 77, 77, 2, 80),
        HQC_RMRS_192 => HqcParams::new(HQC_RMRS_192, 2, 192, 38_923, 101, 117, 117, 4, 76),
        HQC_RMRS_256 => HqcParams::new(HQC_RMRS_256, 3, 256, 59_957, 133, 153, 153, 6, 78),
        _ => Err(Error::UnknownParameterSet(name.to_string())),
    }
}

pub fn scheme_by_id(id: u8) -> Result<HqcParams> {
    SCHEME_SETS
        .iter()
        .map(|name| scheme(name).expect("built-in set"))
        .find(|p| p.id == id)
        .ok_or_else(|| Error::Format(format!("unknown parameter-set id {id}")))
}

/// Error profile of any named set, including the simulation-only ones.
pub fn profile(name: &str) -> Result<ErrorProfile> {
    match name {
        SIM_SET_I => ErrorProfile::new(23_869, 67, 77, 77, 23_746),
        SIM_SET_II => ErrorProfile::new(20_533, 67, 77, 77, 20_480),
        _ => scheme(name).map(|p| p.error_profile()),
    }
}

/// All three scheme instances.
pub fn all_schemes() -> Vec<HqcParams> {
    SCHEME_SETS
        .iter()
        .map(|n| scheme(n).expect("built-in set"))
        .collect()
}
