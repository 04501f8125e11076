//! Experiment configuration files.
//!
//! Flat `key = value` text; `#` starts a comment. The accepted keys are
//! listed in [`CONFIG_SCHEMA`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::bandit::PolicyKind;
use crate::error::{Error, Result};
use crate::sim::fixture::ThetaKind;
use crate::smc::DEFAULT_PARTICLES;

/// Text shown by `--help`.
pub const CONFIG_SCHEMA: &str = "\
Config file: one `key = value` per line, `#` starts a comment.
  K          number of options (>= 2)                       required
  L          presentation size, 2 <= L <= K                 required
  T          rounds per run                                 required
  runs       independent runs per policy                    default 1
  policy     comma-separated list of dirichlet_luce_ts,
             dirichlet_multinomial_ts, dts, uniform_random  required
  env        transitive | cyclic (cyclic: K = 4, L = 2)     default transitive
  theta_kind sparse | dense                                 default sparse
  particles  SMC particles for dirichlet_luce_ts            default 2048
  seed       base seed; run r uses seed XOR r               default 0
  out_dir    output directory                               default out
  regret     weak (L = 2 only) | topN, e.g. top2            default weak if L = 2, else top2";

const KEYS: [&str; 11] = [
    "K", "L", "T", "runs", "policy", "env", "theta_kind", "particles", "seed", "out_dir", "regret",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    Transitive,
    Cyclic,
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvKind::Transitive => "transitive",
            EnvKind::Cyclic => "cyclic",
        })
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transitive" => Ok(EnvKind::Transitive),
            "cyclic" => Ok(EnvKind::Cyclic),
            _ => Err(Error::Config(format!("unknown env '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegretKind {
    /// Weak dueling regret of the presented pair.
    Weak,
    /// Top-n regret of the sampled ranking.
    Top(usize),
}

impl fmt::Display for RegretKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegretKind::Weak => f.write_str("weak"),
            RegretKind::Top(n) => write!(f, "top{n}"),
        }
    }
}

impl FromStr for RegretKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "weak" {
            return Ok(RegretKind::Weak);
        }
        s.strip_prefix("top")
            .and_then(|n| n.parse().ok())
            .filter(|&n| n > 0)
            .map(RegretKind::Top)
            .ok_or_else(|| Error::Config(format!("unknown regret '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub k: usize,
    pub l: usize,
    pub t: usize,
    pub runs: usize,
    pub policies: Vec<PolicyKind>,
    pub env: EnvKind,
    pub theta_kind: ThetaKind,
    pub particles: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub regret: RegretKind,
}

impl ExperimentConfig {
    /// A validated config with defaults for the optional keys.
    pub fn new(k: usize, l: usize, t: usize, policies: Vec<PolicyKind>, env: EnvKind) -> Result<Self> {
        let cfg = ExperimentConfig {
            k,
            l,
            t,
            runs: 1,
            policies,
            env,
            theta_kind: ThetaKind::Sparse,
            particles: DEFAULT_PARTICLES,
            seed: 0,
            out_dir: PathBuf::from("out"),
            regret: default_regret(l),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected `key = value`, got '{line}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("unknown key '{key}'"),
                });
            }
            if kv.insert(key, (i + 1, value)).is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("duplicate key '{key}'"),
                });
            }
        }

        fn get<T: FromStr>(kv: &BTreeMap<&str, (usize, &str)>, key: &str) -> Result<Option<T>> {
            match kv.get(key) {
                None => Ok(None),
                Some(&(line, v)) => v.parse().map(Some).map_err(|_| Error::Parse {
                    line,
                    msg: format!("bad value '{v}' for {key}"),
                }),
            }
        }
        fn required<T: FromStr>(kv: &BTreeMap<&str, (usize, &str)>, key: &str) -> Result<T> {
            get(kv, key)?.ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
        }
        fn parsed<T: FromStr<Err = Error>>(kv: &BTreeMap<&str, (usize, &str)>, key: &str) -> Result<Option<T>> {
            kv.get(key).map(|&(_, v)| v.parse()).transpose()
        }

        let l: usize = required(&kv, "L")?;
        let policy_text = kv
            .get("policy")
            .map(|&(_, v)| v)
            .ok_or_else(|| Error::Config("missing required key 'policy'".into()))?;
        let policies = policy_text
            .split(',')
            .map(|p| p.trim().parse())
            .collect::<Result<Vec<PolicyKind>>>()?;

        let cfg = ExperimentConfig {
            k: required(&kv, "K")?,
            l,
            t: required(&kv, "T")?,
            runs: get(&kv, "runs")?.unwrap_or(1),
            policies,
            env: parsed(&kv, "env")?.unwrap_or(EnvKind::Transitive),
            theta_kind: parsed(&kv, "theta_kind")?.unwrap_or(ThetaKind::Sparse),
            particles: get(&kv, "particles")?.unwrap_or(DEFAULT_PARTICLES),
            seed: get(&kv, "seed")?.unwrap_or(0),
            out_dir: kv.get("out_dir").map_or_else(|| PathBuf::from("out"), |&(_, v)| PathBuf::from(v)),
            regret: parsed(&kv, "regret")?.unwrap_or(default_regret(l)),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.k < 2 {
            return fail(format!("K must be ≥ 2, got {}", self.k));
        }
        if self.l < 2 || self.l > self.k {
            return fail(format!("L must satisfy 2 ≤ L ≤ K, got L={}", self.l));
        }
        if self.runs < 1 {
            return fail("runs must be ≥ 1".into());
        }
        if self.particles < 2 {
            return fail("particles must be ≥ 2".into());
        }
        if self.policies.is_empty() {
            return fail("policy list is empty".into());
        }
        for (i, p) in self.policies.iter().enumerate() {
            if self.policies[..i].contains(p) {
                return fail(format!("policy {p} listed twice"));
            }
        }
        if self.policies.contains(&PolicyKind::Dts) && self.l != 2 {
            return fail("dts needs L = 2".into());
        }
        if self.env == EnvKind::Cyclic && (self.k != 4 || self.l != 2) {
            return fail("the cyclic environment needs K = 4 and L = 2".into());
        }
        match self.regret {
            RegretKind::Weak if self.l != 2 => fail("weak regret needs L = 2".into()),
            RegretKind::Top(_) if self.env == EnvKind::Cyclic => {
                fail("top-n regret needs a transitive environment".into())
            }
            RegretKind::Top(n) if n > self.l => fail(format!("top{n} regret needs n ≤ L")),
            _ => Ok(()),
        }
    }
}

fn default_regret(l: usize) -> RegretKind {
    if l == 2 {
        RegretKind::Weak
    } else {
        RegretKind::Top(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# dueling comparison
K = 10
L = 2
T = 2000
runs = 20
policy = dirichlet_luce_ts, dts,uniform_random
theta_kind = sparse   # shape of θ*
seed = 42
out_dir = results/duel
";

    #[test]
    fn parses_sample() {
        let c = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!((c.k, c.l, c.t, c.runs), (10, 2, 2000, 20));
        assert_eq!(
            c.policies,
            vec![PolicyKind::DirichletLuceTs, PolicyKind::Dts, PolicyKind::UniformRandom]
        );
        assert_eq!(c.env, EnvKind::Transitive);
        assert_eq!(c.regret, RegretKind::Weak);
        assert_eq!(c.particles, DEFAULT_PARTICLES);
        assert_eq!(c.out_dir, PathBuf::from("results/duel"));
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let e = ExperimentConfig::parse("K=3\nL=2\nT=1\npolicy=dts\nfoo=1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 5, .. }), "{e}");
        assert!(ExperimentConfig::parse("K=3\nK=4\nL=2\nT=1\npolicy=dts\n").is_err());
    }

    #[test]
    fn rejects_incompatible_settings() {
        for text in [
            "K=5\nL=3\nT=1\npolicy=dts\n",
            "K=5\nL=2\nT=1\npolicy=dts\nenv=cyclic\n",
            "K=4\nL=3\nT=1\npolicy=uniform_random\nregret=weak\n",
            "K=4\nL=2\nT=1\npolicy=uniform_random\nenv=cyclic\nregret=top1\n",
            "K=4\nL=2\nT=1\npolicy=uniform_random\nregret=top3\n",
            "K=4\nL=5\nT=1\npolicy=uniform_random\n",
            "K=4\nL=2\nT=1\npolicy=uniform_random,uniform_random\n",
            "K=4\nL=2\nT=1\n",
            "K=4\nL=2\nT=x\npolicy=dts\n",
        ] {
            assert!(ExperimentConfig::parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn regret_names() {
        assert_eq!("top3".parse::<RegretKind>().unwrap(), RegretKind::Top(3));
        assert!("top0".parse::<RegretKind>().is_err());
        assert_eq!(RegretKind::Top(2).to_string(), "top2");
    }

    #[test]
    fn schema_lists_every_key() {
        for k in KEYS {
            assert!(CONFIG_SCHEMA.lines().any(|l| l.trim_start().starts_with(k)), "{k}");
        }
    }
}
