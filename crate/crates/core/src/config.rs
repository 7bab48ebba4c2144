//! Flat `key=value` experiment configuration.
//!
//! Resolution order is defaults, then a config file, then explicit overrides
//! (command-line flags). Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::plm::PlmParams;
use crate::rank::RankParams;
use crate::sdm::{OrderWeights, OrderedPairs, SdmParams};
use crate::text::CorpusFormat;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: RankParams,
    pub index: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub format: CorpusFormat,
    pub topics: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub run: Option<PathBuf>,
    pub baseline: Option<PathBuf>,
    pub k: usize,
    pub tag: Option<String>,
    pub stopwords: bool,
    pub seed: u64,
    pub trials: usize,
    /// 0 means one worker per core.
    pub threads: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            params: RankParams::default(),
            index: None,
            corpus: None,
            format: CorpusFormat::TrecText,
            topics: None,
            qrels: None,
            run: None,
            baseline: None,
            k: 1000,
            tag: None,
            stopwords: false,
            seed: 1,
            trials: 100,
            threads: 0,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidParam(format!("bad value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::InvalidParam(format!("bad value `{value}` for `{key}`"))),
    }
}

fn show_path(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl Config {
    /// Defaults, then `file` if given, then `overrides` in order.
    pub fn resolve(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut cfg = Config::default();
        if let Some(path) = file {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            cfg.apply_text(&text, path)?;
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_text(&mut self, text: &str, source: &Path) -> Result<()> {
        let mut offset = 0u64;
        for (n, line) in text.lines().enumerate() {
            let start = offset;
            offset += line.len() as u64 + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Malformed {
                    path: source.to_path_buf(),
                    offset: start,
                    docs: n,
                    message: "expected `key=value`".into(),
                });
            };
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let sdm = &mut self.params.sdm;
        let plm = &mut self.params.plm;
        let path = || (!value.is_empty()).then(|| PathBuf::from(value));
        match key {
            "sdm.lambda_t" => sdm.lambda_t = parse(key, value)?,
            "sdm.lambda_o" => sdm.lambda_o = parse(key, value)?,
            "sdm.lambda_u" => sdm.lambda_u = parse(key, value)?,
            "sdm.lambda_ow" => sdm.lambda_ow = parse(key, value)?,
            "sdm.mu" => sdm.mu = parse(key, value)?,
            "sdm.window" => sdm.window = parse(key, value)?,
            "sdm.unordered_span" => sdm.unordered_span = parse(key, value)?,
            "sdm.order_weights" => {
                sdm.order_weights = match value {
                    "sito" => OrderWeights::Sito,
                    "neutral" => OrderWeights::Neutral,
                    _ => return Err(Error::InvalidParam(format!("`{key}` is `sito` or `neutral`"))),
                }
            }
            "sdm.ordered_pairs" => {
                sdm.ordered_pairs = match value {
                    "all" => OrderedPairs::All,
                    "non-adjacent" => OrderedPairs::NonAdjacent,
                    _ => return Err(Error::InvalidParam(format!("`{key}` is `all` or `non-adjacent`"))),
                }
            }
            "plm.mu" => plm.mu = parse(key, value)?,
            "plm.sigma" => plm.sigma = parse(key, value)?,
            "plm.lambda" => plm.lambda = parse(key, value)?,
            "plm.window" => plm.window = parse(key, value)?,
            "mu" => {
                sdm.mu = parse(key, value)?;
                plm.mu = sdm.mu;
            }
            "window" => {
                sdm.window = parse(key, value)?;
                plm.window = sdm.window;
            }
            "index" => self.index = path(),
            "corpus" => self.corpus = path(),
            "format" => self.format = value.parse()?,
            "topics" => self.topics = path(),
            "qrels" => self.qrels = path(),
            "run" => self.run = path(),
            "baseline" => self.baseline = path(),
            "k" => self.k = parse(key, value)?,
            "tag" => self.tag = (!value.is_empty()).then(|| value.to_string()),
            "stopwords" => self.stopwords = parse_bool(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "threads" => self.threads = parse(key, value)?,
            _ => return Err(Error::InvalidParam(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.sdm.validate()?;
        self.params.plm.validate()?;
        if self.k == 0 {
            return Err(Error::InvalidParam("k must be positive".into()));
        }
        Ok(())
    }

    /// Every resolved key, sorted, as `key=value` lines.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let SdmParams {
            lambda_t,
            lambda_o,
            lambda_u,
            lambda_ow,
            mu: sdm_mu,
            window: sdm_window,
            unordered_span,
            order_weights,
            ordered_pairs,
        } = self.params.sdm;
        let PlmParams {
            mu: plm_mu,
            sigma,
            lambda,
            window: plm_window,
        } = self.params.plm;
        let mut out = vec![
            ("baseline", show_path(&self.baseline)),
            ("corpus", show_path(&self.corpus)),
            ("format", self.format.to_string()),
            ("index", show_path(&self.index)),
            ("k", self.k.to_string()),
            ("plm.lambda", lambda.to_string()),
            ("plm.mu", plm_mu.to_string()),
            ("plm.sigma", sigma.to_string()),
            ("plm.window", plm_window.to_string()),
            ("qrels", show_path(&self.qrels)),
            ("run", show_path(&self.run)),
            ("sdm.lambda_o", lambda_o.to_string()),
            ("sdm.lambda_ow", lambda_ow.to_string()),
            ("sdm.lambda_t", lambda_t.to_string()),
            ("sdm.lambda_u", lambda_u.to_string()),
            ("sdm.mu", sdm_mu.to_string()),
            (
                "sdm.order_weights",
                match order_weights {
                    OrderWeights::Sito => "sito",
                    OrderWeights::Neutral => "neutral",
                }
                .into(),
            ),
            (
                "sdm.ordered_pairs",
                match ordered_pairs {
                    OrderedPairs::All => "all",
                    OrderedPairs::NonAdjacent => "non-adjacent",
                }
                .into(),
            ),
            ("sdm.unordered_span", unordered_span.to_string()),
            ("sdm.window", sdm_window.to_string()),
            ("seed", self.seed.to_string()),
            ("stopwords", self.stopwords.to_string()),
            ("tag", self.tag.clone().unwrap_or_default()),
            ("threads", self.threads.to_string()),
            ("topics", show_path(&self.topics)),
            ("trials", self.trials.to_string()),
        ];
        out.sort_by_key(|(k, _)| *k);
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    /// Report header: resolved config and manifest hash as `#` comments, then
    /// the timestamp, the only line that varies between identical runs.
    pub fn header(&self, manifest_hash: Option<&str>, timestamp: &str) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "# {k}={v}");
        }
        if let Some(h) = manifest_hash {
            let _ = writeln!(s, "# index_manifest_sha256={h}");
        }
        let _ = writeln!(s, "# timestamp={timestamp}");
        s
    }
}
