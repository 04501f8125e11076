//! Sufficient statistics of a choice history.
//!
//! The joint table ν(k, C) counts how often option `k` was picked from
//! presentation `C`. Its marginals μ(C) (presentation multiplicities) and
//! y(k) (win counts) are maintained alongside ν and only ever change through
//! [`SufficientStatistics::record_choice`], so they stay consistent.
//!
//! Text format, one entry per line after a `K=<int>` header:
//!
//! ```text
//! K=3
//! c=0,1 k=0 n=10
//! c=0,1 k=1 n=5
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::choice::{ChoiceRecord, Presentation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SufficientStatistics {
    k: usize,
    nu: BTreeMap<(Presentation, usize), u64>,
    mu: BTreeMap<Presentation, u64>,
    y: Vec<u64>,
    total: u64,
}

impl SufficientStatistics {
    pub fn new(k: usize) -> Self {
        SufficientStatistics {
            k,
            nu: BTreeMap::new(),
            mu: BTreeMap::new(),
            y: vec![0; k],
            total: 0,
        }
    }

    pub fn from_records<'a>(k: usize, records: impl IntoIterator<Item = &'a ChoiceRecord>) -> Result<Self> {
        let mut s = Self::new(k);
        for r in records {
            s.record_choice(r)?;
        }
        Ok(s)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of recorded choices T.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Adds one observation: ν(C, k) += 1 and T += 1.
    pub fn record_choice(&mut self, rec: &ChoiceRecord) -> Result<()> {
        self.add_count(rec.presentation().clone(), rec.chosen(), 1)
    }

    fn add_count(&mut self, c: Presentation, k: usize, n: u64) -> Result<()> {
        if c.min_k() > self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                actual: c.min_k(),
            });
        }
        if !c.contains(k) {
            return Err(Error::NotInPresentation {
                option: k,
                presentation: c.to_string(),
            });
        }
        if n == 0 {
            return Ok(());
        }
        *self.mu.entry(c.clone()).or_insert(0) += n;
        *self.nu.entry((c, k)).or_insert(0) += n;
        self.y[k] += n;
        self.total += n;
        Ok(())
    }

    /// ν(C, k).
    pub fn count(&self, c: &Presentation, k: usize) -> u64 {
        self.nu.get(&(c.clone(), k)).copied().unwrap_or(0)
    }

    /// μ(C), the number of times `c` was presented.
    pub fn mu(&self, c: &Presentation) -> u64 {
        self.mu.get(c).copied().unwrap_or(0)
    }

    /// y, the per-option win counts.
    pub fn y(&self) -> &[u64] {
        &self.y
    }

    /// Presentations with μ(C) > 0 and their multiplicities, in canonical order.
    pub fn presentations(&self) -> impl Iterator<Item = (&Presentation, u64)> {
        self.mu.iter().map(|(c, &n)| (c, n))
    }

    /// Nonzero entries of ν in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (&Presentation, usize, u64)> {
        self.nu.iter().map(|((c, k), &n)| (c, *k, n))
    }

    pub fn unique_presentations(&self) -> usize {
        self.mu.len()
    }

    /// Expands the table into individual records in canonical order.
    pub fn to_records(&self) -> Vec<ChoiceRecord> {
        let mut out = Vec::with_capacity(self.total as usize);
        for ((c, k), &n) in &self.nu {
            for _ in 0..n {
                out.push(ChoiceRecord::new(c.clone(), *k).expect("stored entries are valid"));
            }
        }
        out
    }

    /// Re-indexes the table for a larger option set; new options have no history.
    pub fn extend_options(&mut self, new_k: usize) -> Result<()> {
        if new_k < self.k {
            return Err(Error::InvalidArgument(format!(
                "cannot shrink statistics from K={} to K={new_k}",
                self.k
            )));
        }
        self.k = new_k;
        self.y.resize(new_k, 0);
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("K={}\n", self.k);
        for ((c, k), n) in &self.nu {
            writeln!(s, "c={c} k={k} n={n}").unwrap();
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut stats: Option<SufficientStatistics> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: line_no, msg };
            let Some(s) = stats.as_mut() else {
                let k = line
                    .strip_prefix("K=")
                    .ok_or_else(|| perr(format!("expected header `K=<int>`, found `{line}`")))?
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| perr(format!("bad K: {e}")))?;
                if k == 0 {
                    return Err(perr("K must be positive".into()));
                }
                stats = Some(SufficientStatistics::new(k));
                continue;
            };
            let mut c = None;
            let mut kk = None;
            let mut n = None;
            for field in line.split_whitespace() {
                let (key, val) = field
                    .split_once('=')
                    .ok_or_else(|| perr(format!("malformed field `{field}`")))?;
                match key {
                    "c" => {
                        let opts = val
                            .split(',')
                            .map(|t| t.trim().parse::<usize>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|e| perr(format!("bad presentation `{val}`: {e}")))?;
                        c = Some(Presentation::new(opts, s.k).map_err(|e| perr(e.to_string()))?);
                    }
                    "k" => kk = Some(val.parse::<usize>().map_err(|e| perr(format!("bad k: {e}")))?),
                    "n" => n = Some(val.parse::<u64>().map_err(|e| perr(format!("bad n: {e}")))?),
                    other => return Err(perr(format!("unknown field `{other}`"))),
                }
            }
            let (Some(c), Some(kk), Some(n)) = (c, kk, n) else {
                return Err(perr("expected fields c=, k= and n=".into()));
            };
            s.add_count(c, kk, n).map_err(|e| perr(e.to_string()))?;
        }
        stats.ok_or(Error::Parse {
            line: 0,
            msg: "missing `K=<int>` header".into(),
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}
