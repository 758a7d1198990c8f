use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::InfiniteMps;
use crate::error::{Error, Result};
use crate::numerics::C64;

const VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct ComplexTensor {
    re: Vec<Vec<Vec<f64>>>,
    im: Vec<Vec<Vec<f64>>>,
}

/// On-disk layout, version 1. Field order is the serialized key order.
#[derive(Serialize, Deserialize)]
pub struct StateFile {
    version: u64,
    d: usize,
    chi: usize,
    lambda: Vec<f64>,
    gamma: ComplexTensor,
}

impl From<&InfiniteMps> for StateFile {
    fn from(m: &InfiniteMps) -> Self {
        let (d, chi) = (m.d(), m.chi());
        let part = |f: fn(C64) -> f64| -> Vec<Vec<Vec<f64>>> {
            (0..d)
                .map(|s| (0..chi).map(|a| (0..chi).map(|b| f(m.gamma(s, a, b))).collect()).collect())
                .collect()
        };
        StateFile {
            version: VERSION,
            d,
            chi,
            lambda: m.lambda().to_vec(),
            gamma: ComplexTensor { re: part(|z| z.re), im: part(|z| z.im) },
        }
    }
}

impl StateFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain numeric data serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(VERSION) => {}
            Some(other) => return Err(Error::UnsupportedVersion(other)),
            None => return Err(Error::InvalidInput("state file has no integer \"version\"".into())),
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn into_mps(self) -> Result<InfiniteMps> {
        let (d, chi) = (self.d, self.chi);
        let shape_ok = |t: &Vec<Vec<Vec<f64>>>| t.len() == d && t.iter().all(|m| m.len() == chi && m.iter().all(|r| r.len() == chi));
        if !shape_ok(&self.gamma.re) || !shape_ok(&self.gamma.im) {
            return Err(Error::InvalidInput(format!("gamma does not have shape {d}x{chi}x{chi}")));
        }
        let mut gamma = Vec::with_capacity(d * chi * chi);
        for s in 0..d {
            for a in 0..chi {
                for b in 0..chi {
                    gamma.push(C64::new(self.gamma.re[s][a][b], self.gamma.im[s][a][b]));
                }
            }
        }
        InfiniteMps::from_parts(d, chi, gamma, self.lambda)
    }
}

pub fn write_state(mps: &InfiniteMps, path: impl AsRef<Path>) -> Result<()> {
    let mut text = StateFile::from(mps).to_json();
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_state(path: impl AsRef<Path>) -> Result<InfiniteMps> {
    StateFile::parse(&fs::read_to_string(path)?)?.into_mps()
}
