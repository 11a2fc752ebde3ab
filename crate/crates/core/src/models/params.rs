//! Parameters of the production models.

use serde::Serialize;
use thiserror::Error;

use crate::net::Tokens;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("unknown parameter '{0}'")]
    UnknownKey(String),
    #[error("parameter '{key}': '{value}' is not a nonnegative integer")]
    BadValue { key: String, value: String },
    #[error("parameter '{0}' must be at least 1")]
    Zero(&'static str),
    #[error("x = {x} exceeds nb * sb = {total}")]
    FirstBatchTooLarge { x: Tokens, total: Tokens },
    #[error("line {line}: expected key=value, got '{text}'")]
    Syntax { line: usize, text: String },
}

/// Model parameters. Field names double as the keys accepted on the command
/// line and in parameter files.
///
/// `fs`, `ds` and `k` (firesticks, digging sticks, knives) default to `p`;
/// they stay tied to `p` until explicitly set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelParams {
    /// People available.
    pub p: Tokens,
    pub d: Tokens,
    pub c: Tokens,
    pub b: Tokens,
    pub a: Tokens,
    pub h: Tokens,
    pub q: Tokens,
    pub m: Tokens,
    pub nfw: Tokens,
    pub nbr: Tokens,
    pub nb: Tokens,
    pub nbs: Tokens,
    pub nbl: Tokens,
    pub x: Tokens,
    pub sb: Tokens,
    pub nr: Tokens,
    pub nts: Tokens,
    pub nco: Tokens,
    pub ng: Tokens,
    pub gc: Tokens,
    pub fs: Option<Tokens>,
    pub ds: Option<Tokens>,
    pub k: Option<Tokens>,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            p: 1,
            d: 1,
            c: 1,
            b: 1,
            a: 1,
            h: 1,
            q: 1,
            m: 1,
            nfw: 4,
            nbr: 4,
            nb: 4,
            nbs: 1,
            nbl: 1,
            x: 1,
            sb: 2,
            nr: 4,
            nts: 4,
            nco: 4,
            ng: 4,
            gc: 1,
            fs: None,
            ds: None,
            k: None,
        }
    }
}

impl ModelParams {
    pub const KEYS: [&'static str; 23] = [
        "p", "d", "c", "b", "a", "h", "q", "m", "nfw", "nbr", "nb", "nbs", "nbl", "x", "sb", "nr",
        "nts", "nco", "ng", "gc", "fs", "ds", "k",
    ];

    /// Defaults with `p` people and one tool of each kind per person.
    pub fn with_people(p: Tokens) -> Self {
        ModelParams {
            p,
            ..Self::default()
        }
    }

    pub fn fs(&self) -> Tokens {
        self.fs.unwrap_or(self.p)
    }

    pub fn ds(&self) -> Tokens {
        self.ds.unwrap_or(self.p)
    }

    pub fn k(&self) -> Tokens {
        self.k.unwrap_or(self.p)
    }

    /// Total number of fleshy scales, `nb * sb`.
    pub fn u(&self) -> Tokens {
        self.nb * self.sb
    }

    /// Scales placed on the coals after the first batch, `nb * sb - x`.
    pub fn s(&self) -> Tokens {
        self.u() - self.x
    }

    /// Value of a parameter or derived quantity by name.
    pub fn get(&self, key: &str) -> Option<Tokens> {
        Some(match key {
            "p" => self.p,
            "d" => self.d,
            "c" => self.c,
            "b" => self.b,
            "a" => self.a,
            "h" => self.h,
            "q" => self.q,
            "m" => self.m,
            "nfw" => self.nfw,
            "nbr" => self.nbr,
            "nb" => self.nb,
            "nbs" => self.nbs,
            "nbl" => self.nbl,
            "x" => self.x,
            "sb" => self.sb,
            "nr" => self.nr,
            "nts" => self.nts,
            "nco" => self.nco,
            "ng" => self.ng,
            "gc" => self.gc,
            "fs" => self.fs(),
            "ds" => self.ds(),
            "k" => self.k(),
            "u" => self.u(),
            "s" => self.s(),
            _ => return None,
        })
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ParamError> {
        let v: Tokens = value.trim().parse().map_err(|_| ParamError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        })?;
        let slot = match key.trim() {
            "p" => &mut self.p,
            "d" => &mut self.d,
            "c" => &mut self.c,
            "b" => &mut self.b,
            "a" => &mut self.a,
            "h" => &mut self.h,
            "q" => &mut self.q,
            "m" => &mut self.m,
            "nfw" => &mut self.nfw,
            "nbr" => &mut self.nbr,
            "nb" => &mut self.nb,
            "nbs" => &mut self.nbs,
            "nbl" => &mut self.nbl,
            "x" => &mut self.x,
            "sb" => &mut self.sb,
            "nr" => &mut self.nr,
            "nts" => &mut self.nts,
            "nco" => &mut self.nco,
            "ng" => &mut self.ng,
            "gc" => &mut self.gc,
            "fs" => {
                self.fs = Some(v);
                return Ok(());
            }
            "ds" => {
                self.ds = Some(v);
                return Ok(());
            }
            "k" => {
                self.k = Some(v);
                return Ok(());
            }
            other => return Err(ParamError::UnknownKey(other.to_string())),
        };
        *slot = v;
        Ok(())
    }

    /// Applies a `key=value` assignment.
    pub fn assign(&mut self, assignment: &str) -> Result<(), ParamError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| ParamError::Syntax {
                line: 1,
                text: assignment.to_string(),
            })?;
        self.set(key.trim(), value)
    }

    /// Applies a flat `key=value` file. Blank lines and lines starting with
    /// `#` are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ParamError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ParamError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        for key in Self::KEYS {
            if self.get(key) == Some(0) {
                return Err(ParamError::Zero(key));
            }
        }
        let total = self.nb * self.sb;
        if self.x > total {
            return Err(ParamError::FirstBatchTooLarge { x: self.x, total });
        }
        Ok(())
    }
}
