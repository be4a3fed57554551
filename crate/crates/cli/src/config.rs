//! Run configuration: a JSON document describing the tower, precisions,
//! characters and claims.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use asw_core::charsum::CharacterSpec;
use asw_core::tower::{Basis, TowerSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::UsageError;

/// `fbar` either as prime-field coefficients or as `F_q` coordinate vectors,
/// constant term first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Polynomial {
    PrimeField(Vec<u64>),
    Full(Vec<Vec<u64>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterEntry {
    pub m: u32,
    pub b: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Characters {
    List(Vec<CharacterEntry>),
    UpTo { all_of_conductor_up_to: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub p: u64,
    pub a: usize,
    pub ell: usize,
    pub fbar: Polynomial,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Basis>,
    #[serde(default = "default_precision")]
    pub precision: u32,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default = "default_kmax")]
    pub kmax: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub characters: Option<Characters>,
    /// Claim ids for `verify`; all claims when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claims: Option<Vec<String>>,
    /// Conductor bound for `zeta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_precision() -> u32 {
    4
}
fn default_degree() -> usize {
    15
}
fn default_kmax() -> usize {
    4
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())).into())
    }

    /// The tower, validated; violations are usage errors naming the constraint.
    pub fn tower(&self) -> Result<TowerSpec> {
        let mut spec = match &self.fbar {
            Polynomial::PrimeField(c) => TowerSpec::from_prime_coeffs(self.p, self.a, self.ell, c),
            Polynomial::Full(c) => TowerSpec::with_default_basis(self.p, self.a, self.ell, c.clone()),
        }
        .map_err(|e| UsageError(format!("invalid config: {e}")))?;
        if let Some(b) = &self.basis {
            spec.basis = b.clone();
        }
        spec.validate().map_err(|e| UsageError(format!("invalid config: {e}")))?;
        Ok(spec)
    }

    pub fn character_list(&self) -> Result<Option<Vec<CharacterSpec>>> {
        let Some(sel) = &self.characters else {
            return Ok(None);
        };
        let list = match sel {
            Characters::List(v) => v
                .iter()
                .map(|c| CharacterSpec::new(self.p, c.m, c.b.clone()))
                .collect::<asw_core::Result<Vec<_>>>()
                .map_err(|e| UsageError(format!("invalid character: {e}")))?,
            Characters::UpTo { all_of_conductor_up_to } => {
                (1..=*all_of_conductor_up_to).flat_map(|m| CharacterSpec::all_of_conductor(self.p, self.ell, m)).collect()
            }
        };
        if let Some(c) = list.iter().find(|c| c.b.len() != self.ell) {
            return Err(UsageError(format!("character {:?} has {} coordinates, expected ell = {}", c.b, c.b.len(), self.ell)).into());
        }
        Ok(Some(list))
    }

    /// sha256 of the canonical JSON of the effective configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
