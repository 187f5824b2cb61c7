//! System configuration files: `{"n": 2, "A": [[0, 1], [0, 0]], "B": [0, 1], "label": "..."}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HandsoffError, Result};
use crate::lti::LtiSystem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub n: usize,
    #[serde(rename = "A")]
    pub a_matrix: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b_vector: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl SystemConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            HandsoffError::InvalidSystem(format!("line {} column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path)
            .map_err(|e| HandsoffError::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| HandsoffError::InvalidSystem(format!("{} is not UTF-8", path.display())))?;
        Ok((Self::parse(&text)?, bytes))
    }

    pub fn to_system(&self) -> Result<LtiSystem> {
        if self.n == 0 {
            return Err(HandsoffError::InvalidSystem("field `n`: must be positive".into()));
        }
        if self.a_matrix.len() != self.n {
            return Err(HandsoffError::InvalidSystem(format!(
                "field `A`: expected {} rows, got {}",
                self.n,
                self.a_matrix.len()
            )));
        }
        if let Some((i, row)) = self.a_matrix.iter().enumerate().find(|(_, r)| r.len() != self.n) {
            return Err(HandsoffError::InvalidSystem(format!(
                "field `A`: row {i} has {} entries, expected {}",
                row.len(),
                self.n
            )));
        }
        if self.b_vector.len() != self.n {
            return Err(HandsoffError::InvalidSystem(format!(
                "field `B`: expected {} entries, got {}",
                self.n,
                self.b_vector.len()
            )));
        }
        LtiSystem::from_rows(&self.a_matrix, &self.b_vector, self.label.clone())
    }

    pub fn from_system(sys: &LtiSystem) -> Self {
        let n = sys.n();
        Self {
            n,
            a_matrix: (0..n).map(|i| (0..n).map(|j| sys.a()[(i, j)]).collect()).collect(),
            b_vector: sys.b().iter().copied().collect(),
            label: sys.label().map(str::to_owned),
        }
    }
}
