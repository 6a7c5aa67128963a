//! `dioph`: command-line front end for the dioph-core experiments.

mod config;
mod report;
mod verbs;

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Command};

use config::{find_verb, parse_config_text, resolve, RunConfig, VerbSpec, GLOBAL_KEYS, VERBS, WORK_ENV};
use report::VERSION;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse(String),
    Core(dioph_core::Error),
    Io(String),
}

impl From<dioph_core::Error> for CliError {
    fn from(e: dioph_core::Error) -> Self {
        match e {
            dioph_core::Error::Parse(s) => CliError::Parse(s),
            e => CliError::Core(e),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "usage: {s}"),
            CliError::Parse(s) => write!(f, "parse error: {s}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(s) => write!(f, "i/o error: {s}"),
        }
    }
}

impl CliError {
    /// 2 parse or usage, 3 precision cap, 4 work limit or guard, 5 I/O,
    /// 1 anything else.
    fn code(&self) -> u8 {
        use dioph_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Parse(_) => 2,
            CliError::Io(_) => 5,
            CliError::Core(E::PrecisionCap { .. }) => 3,
            CliError::Core(E::WorkLimit { .. } | E::GuardExceeded(_)) => 4,
            CliError::Core(E::Parse(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}

fn key_arg(key: &'static str, help: &'static str) -> Arg {
    Arg::new(key).long(key).value_name("VALUE").num_args(1).allow_hyphen_values(true).help(help)
}

fn leaf(spec: &'static VerbSpec) -> Command {
    let name = *spec.path.last().expect("non-empty path");
    let mut cmd = Command::new(name).about(spec.about);
    if spec.path[0] == "channel" {
        cmd = cmd.arg(Arg::new("action-pos").value_name("ACTION").help("same as --action"));
    }
    for k in spec.keys.iter().chain(GLOBAL_KEYS) {
        cmd = cmd.arg(key_arg(k.key, k.help));
    }
    cmd.arg(Arg::new("config").long("config").value_name("FILE").help("key = value settings; flags override"))
}

fn command() -> Command {
    let mut root = Command::new("dioph")
        .version(VERSION)
        .about("Exact Diophantine approximation and alignment constellation experiments")
        .arg_required_else_help(true)
        .subcommand_required(true);
    let mut groups: BTreeMap<&str, Command> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    for spec in VERBS {
        match spec.path {
            [_] => {
                root = root.subcommand(leaf(spec));
            }
            [group, _] => {
                if !groups.contains_key(group) {
                    order.push(group);
                    let about = match *group {
                        "channel" => "channel models: mac | xchannel | gic | multiant",
                        _ => "degrees-of-freedom sweeps: xchannel | gic",
                    };
                    groups.insert(group, Command::new(*group).about(about).subcommand_required(true).arg_required_else_help(true));
                }
                let g = groups.remove(group).expect("group present");
                groups.insert(group, g.subcommand(leaf(spec)));
            }
            _ => unreachable!("verb paths have one or two parts"),
        }
    }
    for g in order {
        root = root.subcommand(groups.remove(g).expect("group present"));
    }
    root.subcommand(
        Command::new("replay")
            .about("re-run the configuration echoed in a report")
            .arg(Arg::new("report").required(true).value_name("REPORT"))
            .arg(key_arg("out", "report path (stdout when absent)")),
    )
}

fn read(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))
}

fn leaf_matches(m: &ArgMatches) -> (Vec<String>, &ArgMatches) {
    let mut path = Vec::new();
    let mut cur = m;
    while let Some((name, sub)) = cur.subcommand() {
        path.push(name.to_string());
        cur = sub;
    }
    (path, cur)
}

fn configure(m: &ArgMatches) -> Result<(RunConfig, Option<String>), CliError> {
    let (path, lm) = leaf_matches(m);
    if path == ["replay"] {
        let file = lm.get_one::<String>("report").expect("required");
        let (verb, map) = parse_config_text(&read(file)?)?;
        let verb = verb.ok_or_else(|| CliError::Parse(format!("{file}: no `verb` entry")))?;
        let words: Vec<String> = verb.split_whitespace().map(str::to_string).collect();
        let spec = find_verb(&words).ok_or_else(|| CliError::Parse(format!("{file}: unknown verb `{verb}`")))?;
        let cfg = resolve(spec, &BTreeMap::new(), &map, None)?;
        return Ok((cfg, lm.get_one::<String>("out").cloned()));
    }
    let spec = find_verb(&path).ok_or_else(|| CliError::Usage(format!("unknown verb `{}`", path.join(" "))))?;
    let mut flags = BTreeMap::new();
    for k in spec.keys.iter().chain(GLOBAL_KEYS) {
        if let Some(v) = lm.get_one::<String>(k.key) {
            flags.insert(k.key.to_string(), v.clone());
        }
    }
    if let Some(a) = lm.try_get_one::<String>("action-pos").ok().flatten() {
        if flags.get("action").is_some_and(|b| b != a) {
            return Err(CliError::Parse("conflicting action and --action".into()));
        }
        flags.insert("action".into(), a.clone());
    }
    let file = match lm.get_one::<String>("config") {
        Some(f) => {
            let (verb, map) = parse_config_text(&read(f)?)?;
            if let Some(v) = verb {
                if v.split_whitespace().ne(spec.path.iter().copied()) {
                    return Err(CliError::Parse(format!("{f}: config is for `{v}`, not `{}`", spec.path.join(" "))));
                }
            }
            map
        }
        None => BTreeMap::new(),
    };
    let cfg = resolve(spec, &flags, &file, std::env::var(WORK_ENV).ok())?;
    let out = cfg.get("out").map(str::to_string);
    Ok((cfg, out))
}

fn execute(m: &ArgMatches) -> Result<(), CliError> {
    let (cfg, out) = configure(m)?;
    let rep = verbs::run(&cfg)?;
    let text = match cfg.get("format") {
        Some("csv") => rep.to_csv(&cfg),
        Some("json") => rep.to_json(&cfg),
        Some(v) => return Err(CliError::Parse(format!("--format `{v}`: expected csv or json"))),
        None => unreachable!("format has a default"),
    };
    match out {
        Some(path) => std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{path}: {e}"))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    let matches = match command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dioph: {e}");
            ExitCode::from(e.code())
        }
    }
}
