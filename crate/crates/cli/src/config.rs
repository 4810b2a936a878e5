//! TOML config file and its merge with command-line flags. Flags win.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use fhdr_core::harness::{Mode, Source, TrialConfig};
use fhdr_core::Exec;
use serde::Deserialize;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub simulate: SimulateFile,
    #[serde(default)]
    pub serve: ServeFile,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateFile {
    pub dataset: Option<PathBuf>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub dint: Option<Vec<usize>>,
    pub mode: Option<Mode>,
    pub q: Option<Vec<usize>>,
    #[serde(rename = "K")]
    pub k_output: Option<Vec<usize>>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub m: Option<usize>,
    pub report: Option<PathBuf>,
    pub sequential: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServeFile {
    pub host: Option<String>,
    pub port: Option<u16>,
    pub datasets: Option<Vec<PathBuf>>,
    pub ttl_secs: Option<u64>,
}

/// One simulate invocation after merging: a grid over `d_int × q × K`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulatePlan {
    pub base: TrialConfig,
    pub dints: Vec<usize>,
    pub qs: Vec<usize>,
    pub ks: Vec<usize>,
    pub report: Option<PathBuf>,
    pub exec: Exec,
}

impl SimulatePlan {
    pub fn cells(&self) -> Vec<TrialConfig> {
        let mut out = Vec::new();
        for &d_int in &self.dints {
            for &q in &self.qs {
                for &k in &self.ks {
                    out.push(TrialConfig {
                        d_int,
                        q,
                        k_output: k,
                        ..self.base.clone()
                    });
                }
            }
        }
        out
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn nonempty(v: Vec<usize>, what: &str) -> anyhow::Result<Vec<usize>> {
    if v.is_empty() {
        bail!("{what} needs at least one value");
    }
    Ok(v)
}

pub fn merge_simulate(flags: SimulateFile, file: SimulateFile) -> anyhow::Result<SimulatePlan> {
    let def = TrialConfig::default();
    let (def_n, def_d) = match def.source {
        Source::Synthetic { n, d } => (n, d),
        Source::Csv { .. } => unreachable!("default source is synthetic"),
    };
    let source = match flags.dataset.or(file.dataset) {
        Some(path) => Source::Csv { path },
        None => Source::Synthetic {
            n: pick(flags.n, file.n, def_n),
            d: pick(flags.d, file.d, def_d),
        },
    };
    let base = TrialConfig {
        mode: pick(flags.mode, file.mode, def.mode),
        source,
        reps: pick(flags.reps, file.reps, def.reps),
        seed: pick(flags.seed, file.seed, def.seed),
        m: pick(flags.m, file.m, def.m),
        ..def.clone()
    };
    let exec = if pick(flags.sequential, file.sequential, false) {
        Exec::Sequential
    } else {
        Exec::default()
    };
    Ok(SimulatePlan {
        base,
        dints: nonempty(pick(flags.dint, file.dint, vec![def.d_int]), "dint")?,
        qs: nonempty(pick(flags.q, file.q, vec![def.q]), "q")?,
        ks: nonempty(pick(flags.k_output, file.k_output, vec![def.k_output]), "K")?,
        report: flags.report.or(file.report),
        exec,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ServePlan {
    pub host: String,
    pub port: u16,
    pub datasets: Vec<PathBuf>,
    pub ttl_secs: u64,
}

pub fn merge_serve(flags: ServeFile, file: ServeFile) -> ServePlan {
    ServePlan {
        host: pick(flags.host, file.host, "127.0.0.1".to_string()),
        port: pick(flags.port, file.port, 8080),
        datasets: match flags.datasets {
            Some(v) if !v.is_empty() => v,
            _ => file.datasets.unwrap_or_default(),
        },
        ttl_secs: pick(flags.ttl_secs, file.ttl_secs, 3600),
    }
}
