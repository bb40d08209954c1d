//! Parameter documents for each subcommand.
//!
//! Every field defaults to the reference preset; a JSON config overrides
//! individual keys and unknown keys are rejected.

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use nonlocal_trefftz::bvp1d::ApplyConvIn;
use nonlocal_trefftz::trefftz::ConstraintIndexing;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BvpParams {
    pub sigma: f64,
    pub eps_loc: f64,
    pub eps_nl: f64,
    pub domain: [f64; 2],
    pub local_region: [f64; 2],
    pub n_cells: usize,
    pub u_a: f64,
    pub u_b: f64,
    pub apply_conv_in: ApplyConvIn,
    pub target_rel_change: f64,
    pub max_cells: usize,
}

impl Default for BvpParams {
    fn default() -> Self {
        BvpParams {
            sigma: 1.0,
            eps_loc: 1.0,
            eps_nl: 10.0,
            domain: [-5.0, 5.0],
            local_region: [-1.0, 1.0],
            n_cells: 20,
            u_a: 0.0,
            u_b: 1.0,
            apply_conv_in: ApplyConvIn::Everywhere,
            target_rel_change: 1e-4,
            max_cells: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Trefftz1dParams {
    pub sigma: f64,
    pub eps_loc: f64,
    pub eps_nl: f64,
    pub x0: f64,
    pub n_max: usize,
    pub m: usize,
    pub trefftz_half_width: f64,
    /// Left end of the convolution domain; the right end is padded by the kernel radius.
    pub conv_lo: f64,
    pub indexing: ConstraintIndexing,
    pub samples: usize,
    pub sample_half_width: f64,
}

impl Default for Trefftz1dParams {
    fn default() -> Self {
        Trefftz1dParams {
            sigma: 0.5,
            eps_loc: 1.0,
            eps_nl: 10.0,
            x0: 1.0,
            n_max: 4,
            m: 1,
            trefftz_half_width: 0.25,
            conv_lo: 0.0,
            indexing: ConstraintIndexing::ZeroThroughM,
            samples: 201,
            sample_half_width: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Trefftz2dParams {
    pub sigma: f64,
    pub eps_loc: f64,
    pub eps_nl: f64,
    pub n_max: usize,
    pub m: usize,
    pub omega_a_half_width: f64,
    pub trefftz_half_width: f64,
    pub indexing: ConstraintIndexing,
    pub grid: usize,
    pub sample_half_width: f64,
    pub which: usize,
}

impl Default for Trefftz2dParams {
    fn default() -> Self {
        Trefftz2dParams {
            sigma: 0.5,
            eps_loc: 1.0,
            eps_nl: 10.0,
            n_max: 4,
            m: 2,
            omega_a_half_width: 3.0,
            trefftz_half_width: 0.5,
            indexing: ConstraintIndexing::ZeroThroughM,
            grid: 41,
            sample_half_width: 1.0,
            which: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterfaceParams {
    pub sigma: f64,
    /// Local permittivity of the nonlocal medium.
    pub eps_loc: f64,
    pub eps_nl: f64,
    /// Permittivity of the local medium (`x < 0`).
    pub eps_local: f64,
    pub n_max: usize,
    pub m: usize,
    pub p_max: usize,
    pub x0: [f64; 2],
    pub trefftz_half_width: f64,
    pub indexing: ConstraintIndexing,
    pub grid: usize,
    pub sample_half_width: f64,
    pub which: usize,
}

impl Default for InterfaceParams {
    fn default() -> Self {
        InterfaceParams {
            sigma: 0.5,
            eps_loc: 1.0,
            eps_nl: 10.0,
            eps_local: 1.0,
            n_max: 4,
            m: 2,
            p_max: 2,
            x0: [0.25, 0.0],
            trefftz_half_width: 0.5,
            indexing: ConstraintIndexing::ZeroThroughM,
            grid: 41,
            sample_half_width: 0.5,
            which: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeParams {
    pub sigma: f64,
    pub eps_loc: f64,
    pub eps_nl: f64,
    pub n_max_list: Vec<usize>,
    pub m: usize,
    pub omega_a_half_width: f64,
    pub omega_t_half_width: f64,
    pub include_local_term: bool,
    pub indexing: ConstraintIndexing,
    pub quad_points: usize,
}

impl Default for ConvergeParams {
    fn default() -> Self {
        ConvergeParams {
            sigma: 0.5,
            eps_loc: 1.0,
            eps_nl: 10.0,
            n_max_list: vec![0, 1, 2, 3, 4],
            m: 2,
            omega_a_half_width: 3.0,
            omega_t_half_width: 0.5,
            include_local_term: false,
            indexing: ConstraintIndexing::ZeroThroughM,
            quad_points: 24,
        }
    }
}

/// Preset values overridden by the keys present in `text`.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if !value.is_object() {
        return Err("config document must be a JSON object".into());
    }
    serde_json::from_value(value).map_err(|e| e.to_string())
}
