use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Enumeration and work limits. Exceeding any of them is an explicit
/// [`Error::CapExceeded`], never a silent truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    /// Largest block length for type enumeration.
    pub max_n: usize,
    /// Largest `|X|·|Y|` for joint-type enumeration.
    pub max_joint_cells: usize,
    /// Largest number of joint types a single enumeration may return.
    pub max_joint_types: usize,
    /// Largest type class that may be listed word by word.
    pub max_class_size: u64,
    /// Largest `|Y|^n` (or `|X|^n`) for dense word-space computations.
    pub max_word_space: u64,
    /// Largest total number of stored covering words in a simulation code.
    pub max_code_words: u64,
    /// Vertex combinations above which the E-step switches to greedy descent.
    pub e_step_combos: u64,
    /// Largest number of grid matrices the brute-force oracles may visit.
    pub oracle_grid_points: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            max_n: 16,
            max_joint_cells: 9,
            max_joint_types: 2_000_000,
            max_class_size: 1 << 22,
            max_word_space: 1 << 16,
            max_code_words: 400_000_000,
            e_step_combos: 1_000_000,
            oracle_grid_points: 50_000_000,
        }
    }
}

impl Caps {
    /// Applies a `KEY=VALUE` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let parse = |v: &str| {
            v.parse::<u64>()
                .map_err(|_| Error::InvalidInput(format!("cap {key}: '{v}' is not an unsigned integer")))
        };
        match key {
            "max_n" => self.max_n = parse(value)? as usize,
            "max_joint_cells" => self.max_joint_cells = parse(value)? as usize,
            "max_joint_types" => self.max_joint_types = parse(value)? as usize,
            "max_class_size" => self.max_class_size = parse(value)?,
            "max_word_space" => self.max_word_space = parse(value)?,
            "max_code_words" => self.max_code_words = parse(value)?,
            "e_step_combos" => self.e_step_combos = parse(value)?,
            "oracle_grid_points" => self.oracle_grid_points = parse(value)?,
            other => return Err(Error::InvalidInput(format!("unknown cap '{other}'"))),
        }
        Ok(())
    }

    pub(crate) fn word_space(&self, alphabet: usize, n: usize) -> Result<u64> {
        let size = (alphabet as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if size > self.max_word_space as u128 {
            return Err(Error::cap("word space", size, self.max_word_space));
        }
        Ok(size as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides() {
        let mut caps = Caps::default();
        caps.set("max_n", "20").unwrap();
        assert_eq!(caps.max_n, 20);
        assert!(caps.set("max_n", "x").is_err());
        assert!(caps.set("bogus", "1").is_err());
        assert!(caps.word_space(2, 17).is_err());
        assert_eq!(caps.word_space(2, 4).unwrap(), 16);
    }
}
