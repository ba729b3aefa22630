use std::path::PathBuf;
use std::process::ExitCode;

use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};
use condcop_cli::commands::{cmd_fit, cmd_simulate, cmd_test, Input};
use condcop_cli::config::{read_config_file, KEYS};
use condcop_cli::{CliError, CliResult, RunConfig};

fn with_keys(mut cmd: Command, needs_data: bool) -> Command {
    cmd = cmd
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .value_parser(value_parser!(PathBuf))
                .help("flat key = value configuration file"),
        )
        .arg(
            Arg::new("set")
                .long("set")
                .value_name("KEY=VALUE")
                .action(ArgAction::Append)
                .help("override one configuration key (repeatable)"),
        )
        .arg(
            Arg::new("out")
                .long("out")
                .value_name("DIR")
                .required(true)
                .value_parser(value_parser!(PathBuf))
                .help("output directory"),
        );
    if needs_data {
        cmd = cmd.arg(
            Arg::new("data")
                .long("data")
                .value_name("FILE")
                .required(true)
                .value_parser(value_parser!(PathBuf))
                .help("dataset CSV with columns y1, y2, d1, d2, x"),
        );
    }
    for &(key, default, help) in KEYS {
        cmd = cmd.arg(
            Arg::new(key)
                .long(key.replace('_', "-"))
                .alias(key)
                .value_name("VALUE")
                .help(format!("{help} [default: {default}]")),
        );
    }
    cmd
}

fn cli() -> Command {
    Command::new("condcop")
        .about("Covariate-conditional copulas for right-censored paired event times")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("threads")
                .long("threads")
                .global(true)
                .value_name("N")
                .value_parser(value_parser!(usize))
                .help("worker threads (results do not depend on this)"),
        )
        .subcommand(with_keys(
            Command::new("fit").about("estimate the calibration curve with optional bootstrap bands"),
            true,
        ))
        .subcommand(with_keys(
            Command::new("test").about("bootstrap test of a constant calibration function"),
            true,
        ))
        .subcommand(with_keys(
            Command::new("simulate").about("Monte Carlo estimation and power studies"),
            false,
        ))
}

fn resolve(m: &ArgMatches) -> CliResult<RunConfig> {
    let mut layers = Vec::new();
    if let Some(path) = m.get_one::<PathBuf>("config") {
        layers.extend(read_config_file(path)?);
    }
    for &(key, _, _) in KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            layers.push((key.to_string(), v.clone()));
        }
    }
    for kv in m.get_many::<String>("set").into_iter().flatten() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        layers.push((k.trim().to_string(), v.trim().to_string()));
    }
    RunConfig::resolve(layers)
}

fn run(m: &ArgMatches) -> CliResult<()> {
    if let Some(&n) = m.get_one::<usize>("threads") {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {n} worker threads: {e}")))?;
    }
    let (name, sub) = m.subcommand().expect("subcommand is required");
    let cfg = resolve(sub)?;
    let out = sub.get_one::<PathBuf>("out").expect("required");
    match name {
        "fit" | "test" => {
            let input = Input::read(sub.get_one::<PathBuf>("data").expect("required"))?;
            if name == "fit" {
                cmd_fit(&cfg, &input, out)
            } else {
                cmd_test(&cfg, &input, out)
            }
        }
        "simulate" => cmd_simulate(&cfg, out),
        _ => unreachable!(),
    }
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    match run(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("condcop: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
