//! Run configuration: per-verb key tables, `key = value` files and the
//! resolution order flag > file > environment (work limit only) > default.

use std::collections::BTreeMap;

use crate::CliError;

#[derive(Clone, Copy)]
pub struct KeySpec {
    pub key: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn k(key: &'static str, default: Option<&'static str>, help: &'static str) -> KeySpec {
    KeySpec { key, default, help }
}

pub struct VerbSpec {
    /// Command path, e.g. `["channel", "mac"]`.
    pub path: &'static [&'static str],
    pub about: &'static str,
    pub keys: &'static [KeySpec],
}

pub const GLOBAL_KEYS: &[KeySpec] = &[
    k("seed", Some("0"), "master seed for sampled quantities"),
    k("work", Some("100000000"), "work limit (box points per search)"),
    k("precision", Some("4096"), "precision cap in bits for sign certification"),
    k("format", Some("csv"), "report format: csv or json"),
    k("out", None, "report path (stdout when absent)"),
];

pub const WORK_ENV: &str = "DIOPH_WORK_LIMIT";

const CHANNEL_COMMON: [KeySpec; 6] = [
    k("action", None, "constellation | dmin | bounds | points | ser | kg-check"),
    k("lambda", Some("1"), "scaling factor (at least 1)"),
    k("receiver", Some("all"), "receiver index (1-based) or all"),
    k("samples", Some("100000"), "noise samples for ser"),
    k("noise", Some("gaussian"), "gaussian | zero | below-half"),
    k("method", Some("auto"), "auto | full | difference"),
];

macro_rules! channel_keys {
    ($($extra:expr),* $(,)?) => {
        &[
            CHANNEL_COMMON[0], CHANNEL_COMMON[1], CHANNEL_COMMON[2],
            CHANNEL_COMMON[3], CHANNEL_COMMON[4], CHANNEL_COMMON[5],
            $($extra),*
        ]
    };
}

pub const VERBS: &[VerbSpec] = &[
    VerbSpec {
        path: &["dirichlet"],
        about: "best approximation |q xi - p| with q <= Q",
        keys: &[
            k("xi", None, "real number"),
            k("Q", None, "bound on q"),
            k("sweep", Some("false"), "report every Q from 1"),
        ],
    },
    VerbSpec {
        path: &["cf"],
        about: "continued fraction quotients and convergents",
        keys: &[k("xi", None, "real number"), k("depth", Some("20"), "number of quotients after a_0")],
    },
    VerbSpec {
        path: &["profile"],
        about: "one linear form: Q^n min |q.xi + p|",
        keys: &[k("xi", None, "comma-separated coefficients"), k("Q", None, "box bound")],
    },
    VerbSpec {
        path: &["witness"],
        about: "system of forms: minimizing (p, q) for max_j |q.xi_j + p_j|",
        keys: &[k("xi", None, "n x m matrix, rows separated by ';'; column j is form j"), k("Q", None, "box bound")],
    },
    VerbSpec {
        path: &["joint-profile"],
        about: "Q^n min_q min_j |q.xi_j + p|",
        keys: &[k("xi", None, "n x m matrix, rows separated by ';'; column j is form j"), k("Q", None, "box bound")],
    },
    VerbSpec {
        path: &["bound"],
        about: "effective lower bounds",
        keys: &[
            k("variant", None, "mum2 | ekg | eff"),
            k("n", None, "dimension"),
            k("m", Some("1"), "number of forms (eff)"),
            k("Q", None, "box bound (mum2)"),
            k("kappa", None, "constant"),
            k("family", Some("power"), "power | log"),
            k("eps", None, "exponent excess"),
            k("terms", Some("1000000"), "series truncation"),
        ],
    },
    VerbSpec {
        path: &["measure-b1"],
        about: "exact measure of B_1(Q, kappa) and its bounds",
        keys: &[k("Q", None, "box bound"), k("kappa", None, "rational constant")],
    },
    VerbSpec {
        path: &["totient-sum"],
        about: "sum of phi(q)/q against 6Q/pi^2",
        keys: &[k("Q", None, "upper limit")],
    },
    VerbSpec {
        path: &["mc"],
        about: "seeded Monte Carlo probability of an event",
        keys: &[
            k("event", None, "always | bn | bpsi"),
            k("n", Some("1"), "dimension"),
            k("Q", None, "box bound (bn)"),
            k("kappa", None, "constant"),
            k("family", Some("power"), "power | log (bpsi)"),
            k("eps", None, "exponent excess (bpsi)"),
            k("truncation", Some("100"), "largest |q| tested (bpsi)"),
            k("samples", Some("10000"), "number of samples"),
        ],
    },
    VerbSpec {
        path: &["orbit"],
        about: "orbit lattice diagnostics",
        keys: &[
            k("mode", Some("escape"), "escape | shortest | dani | z"),
            k("xi", None, "comma-separated coordinates (n <= 3); points separated by ';' for z"),
            k("n", None, "dimension, checked against xi"),
            k("t", None, "time: rational or log:r (shortest, dani)"),
            k("eps", None, "threshold (escape, dani)"),
            k("s", None, "step (escape)"),
            k("N", None, "number of steps (escape, z)"),
            k("delta", None, "one rational per point (z)"),
        ],
    },
    VerbSpec {
        path: &["channel", "mac"],
        about: "two-user multiple access channel",
        keys: channel_keys![
            k("h", Some("1/3,2/3"), "gains h1,h2"),
            k("alpha", Some("1"), "encoder gain of user 1"),
            k("beta", Some("1"), "encoder gain of user 2"),
            k("Q", Some("1"), "message bound"),
        ],
    },
    VerbSpec {
        path: &["channel", "xchannel"],
        about: "two-user X-channel with real interference alignment",
        keys: channel_keys![
            k("h", None, "gains h11,h12,h21,h22"),
            k("gains", None, "unaligned encoder gains a1,b1,a2,b2"),
            k("Q", Some("1"), "message bound"),
            k("qs", Some("1..16"), "Q list for kg-check"),
            k("eps", Some("0.1"), "exponent excess for kg-check"),
            k("kappa", None, "constant tested by kg-check"),
        ],
    },
    VerbSpec {
        path: &["channel", "gic"],
        about: "three-user interference channel with block alignment",
        keys: channel_keys![
            k("h", None, "gains h11..h33 row-major"),
            k("k", Some("1"), "block exponent"),
            k("B", Some("2"), "digit base"),
            k("generators", Some("full"), "full, or a list of at most 2 generators"),
            k("map", None, "generator index (1-based) of h12,h13,h21,h23,h31,h32"),
        ],
    },
    VerbSpec {
        path: &["channel", "multiant"],
        about: "two multi-antenna receivers: the matrix Xi and constellations",
        keys: channel_keys![
            k("h", None, "2 x n gains, rows separated by ';'"),
            k("alpha", None, "n encoder gains"),
            k("Q", Some("1"), "message bound"),
        ],
    },
    VerbSpec {
        path: &["dof", "xchannel"],
        about: "X-channel DoF ratio sweep",
        keys: &[
            k("eps", Some("0.05"), "exponent excess"),
            k("sweep", Some("2,16,256,65536,1048576"), "Q values"),
            k("constant", Some("1"), "implied constant in P = c (lambda Q)^2"),
            k("h", None, "gains h11,h12,h21,h22 for measured distances"),
            k("model-file", None, "key = value file supplying h"),
        ],
    },
    VerbSpec {
        path: &["dof", "gic"],
        about: "interference-channel DoF formula",
        keys: &[
            k("sweep", Some("1,2,10,100,1000"), "k values"),
            k("eps", Some("0"), "rational exponent excess"),
            k("mg", Some("6"), "number of generators"),
        ],
    },
];

pub fn find_verb(path: &[String]) -> Option<&'static VerbSpec> {
    VERBS.iter().find(|v| v.path.len() == path.len() && v.path.iter().zip(path).all(|(a, b)| a == b))
}

/// A fully resolved run: verb path and every key with a value, in table order.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub verb: &'static VerbSpec,
    pub values: Vec<(String, String)>,
}

impl RunConfig {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn verb_name(&self) -> String {
        self.verb.path.join(" ")
    }
}

impl PartialEq for VerbSpec {
    fn eq(&self, o: &Self) -> bool {
        self.path == o.path
    }
}

impl std::fmt::Debug for VerbSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.path.join(" "))
    }
}

fn all_keys(verb: &VerbSpec) -> impl Iterator<Item = &KeySpec> {
    GLOBAL_KEYS.iter().chain(verb.keys.iter())
}

/// Merges the layers. `flags` and `file` hold only keys that were given.
pub fn resolve(
    verb: &'static VerbSpec,
    flags: &BTreeMap<String, String>,
    file: &BTreeMap<String, String>,
    env_work: Option<String>,
) -> Result<RunConfig, CliError> {
    for key in file.keys().chain(flags.keys()) {
        if !all_keys(verb).any(|s| s.key == key) {
            return Err(CliError::Parse(format!("unknown key `{key}` for `{}`", verb.path.join(" "))));
        }
    }
    let mut values = Vec::new();
    for spec in all_keys(verb) {
        let v = flags
            .get(spec.key)
            .or_else(|| file.get(spec.key))
            .cloned()
            .or_else(|| if spec.key == "work" { env_work.clone() } else { None })
            .or_else(|| default_for(verb, spec));
        if let Some(v) = v {
            values.push((spec.key.to_string(), v));
        }
    }
    Ok(RunConfig { verb, values })
}

/// Channel reports default to JSON; everything else to CSV.
fn default_for(verb: &VerbSpec, spec: &KeySpec) -> Option<String> {
    if spec.key == "format" && verb.path[0] == "channel" {
        return Some("json".into());
    }
    spec.default.map(str::to_string)
}

/// Prefix of configuration lines in CSV reports.
pub const ECHO_PREFIX: &str = "# config:";

/// Reads `key = value` lines. Blank lines and `#` comments are skipped,
/// except report echo lines (`# config: key = value`), which are read as
/// settings. A JSON report is read from its `config` object. The `verb`
/// entry, if present, is returned separately.
pub fn parse_config_text(text: &str) -> Result<(Option<String>, BTreeMap<String, String>), CliError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(trimmed).map_err(|e| CliError::Parse(format!("config JSON: {e}")))?;
        let obj = v
            .get("config")
            .and_then(|c| c.as_object())
            .ok_or_else(|| CliError::Parse("config JSON has no `config` object".into()))?;
        let mut map = BTreeMap::new();
        let mut verb = None;
        for (k, val) in obj {
            let s = val.as_str().ok_or_else(|| CliError::Parse(format!("config value for `{k}` must be a string")))?;
            if k == "verb" {
                verb = Some(s.to_string());
            } else {
                map.insert(k.clone(), s.to_string());
            }
        }
        return Ok((verb, map));
    }
    // A CSV report: only its echo lines are settings.
    let is_report = trimmed.starts_with(crate::report::VERSION_PREFIX);
    let mut map = BTreeMap::new();
    let mut verb = None;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        let body = match line.strip_prefix(ECHO_PREFIX) {
            Some(rest) => rest.trim(),
            None if is_report => continue,
            None if line.is_empty() || line.starts_with('#') => continue,
            None => line,
        };
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("config line {}: expected `key = value`", n + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(CliError::Parse(format!("config line {}: empty key", n + 1)));
        }
        if key == "verb" {
            verb = Some(value.to_string());
        } else if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(CliError::Parse(format!("config line {}: duplicate key `{key}`", n + 1)));
        }
    }
    Ok((verb, map))
}
