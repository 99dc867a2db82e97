//! `gipgut`: run the local server, replay session reports, inspect the
//! profile, and generate synthetic sessions.
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration error,
//! 3 server unreachable, 4 request rejected.

mod backend;
mod render;

use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use backend::{Backend, CliError, Remote};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gipgut_core::service::AchievementView;
use gipgut_core::simulate::{simulate_report, SimulationSpec};
use gipgut_core::{Catalog, Clock, DailyTask, IngestOutcome, Profile, ProfileEdit};
use gipgut_server::{ServerConfig, DEFAULT_ADDR, DEFAULT_PROFILE};
use serde::de::DeserializeOwned;

#[derive(Parser)]
#[command(name = "gipgut", version, about = "Gamified GUI testing: achievements, levels and daily tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct StoreArgs {
    /// Directory holding state.json.
    #[arg(long, env = "GIPGUT_DATA_DIR", default_value = "gipgut-data")]
    data_dir: PathBuf,
    /// Achievement catalog JSON; the bundled catalog when omitted.
    #[arg(long, env = "GIPGUT_CATALOG")]
    catalog: Option<PathBuf>,
    /// `system`, or `fixed:YYYY-MM-DD`.
    #[arg(long, env = "GIPGUT_CLOCK", default_value = "system")]
    clock: Clock,
    /// Profile id used when a new state is created.
    #[arg(long, env = "GIPGUT_PROFILE", default_value = DEFAULT_PROFILE)]
    profile: String,
}

#[derive(Args, Clone)]
struct Target {
    /// Server address.
    #[arg(long, env = "GIPGUT_ADDR", default_value = DEFAULT_ADDR)]
    addr: String,
    /// Work on the data directory directly instead of a server.
    #[arg(long)]
    offline: bool,
    #[command(flatten)]
    store: StoreArgs,
    /// Print raw JSON response bodies.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP server.
    Serve {
        #[arg(long, env = "GIPGUT_ADDR", default_value = DEFAULT_ADDR)]
        addr: SocketAddr,
        /// Allow binding to a non-loopback address.
        #[arg(long)]
        allow_external: bool,
        #[command(flatten)]
        store: StoreArgs,
    },
    /// Submit session report files in order.
    Replay {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        target: Target,
    },
    /// Show or edit the profile.
    Profile {
        #[command(subcommand)]
        action: ProfileAction,
    },
    /// List achievements and progress.
    Achievements {
        /// Include per-project rows for this project.
        #[arg(long)]
        project: Option<String>,
        #[command(flatten)]
        target: Target,
    },
    /// Show today's daily task.
    Daily {
        #[command(flatten)]
        target: Target,
    },
    /// Print a synthetic session report as JSON.
    Simulate {
        #[arg(long, default_value_t = 5)]
        pages: usize,
        #[arg(long, default_value_t = 20)]
        clicks: usize,
        #[arg(long, default_value_t = 10)]
        inputs: usize,
        #[arg(long, default_value_t = 10)]
        lookups: usize,
        #[arg(long, default_value_t = 3)]
        tests: usize,
        /// How many of the tests fail.
        #[arg(long = "fail", default_value_t = 0)]
        failures: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "demo-shop")]
        project: String,
        #[arg(long, env = "GIPGUT_PROFILE", default_value = DEFAULT_PROFILE)]
        profile: String,
    },
}

#[derive(Subcommand)]
enum ProfileAction {
    Show {
        #[command(flatten)]
        target: Target,
    },
    Set {
        field: ProfileField,
        /// New value; for `showcase`, comma-separated achievement ids.
        value: String,
        #[command(flatten)]
        target: Target,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileField {
    Username,
    Icon,
    Title,
    Showcase,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("gipgut: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn server_config(store: &StoreArgs) -> ServerConfig {
    ServerConfig {
        data_dir: store.data_dir.clone(),
        catalog_path: store.catalog.clone(),
        clock: store.clock,
        profile_id: store.profile.clone(),
        ..ServerConfig::default()
    }
}

fn connect(target: &Target) -> Result<Backend, CliError> {
    if target.offline {
        let service = server_config(&target.store).open_service().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Backend::Local(Box::new(service)))
    } else {
        Ok(Backend::Remote(Remote::new(&target.addr)))
    }
}

fn decode<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Failed(format!("unexpected response: {e}")))
}

fn emit_json(bytes: &[u8]) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes).and_then(|()| out.write_all(b"\n")).map_err(|e| CliError::Failed(e.to_string()))
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Serve { addr, allow_external, store } => serve(ServerConfig {
            bind_address: addr,
            allow_external,
            ..server_config(&store)
        }),
        Command::Replay { files, target } => replay(&files, &target),
        Command::Profile { action: ProfileAction::Show { target } } => {
            let backend = connect(&target)?;
            let body = backend.profile()?;
            if target.json {
                return emit_json(&body);
            }
            let catalog: Catalog = decode(&backend.catalog()?)?;
            print!("{}", render::profile(&decode::<Profile>(&body)?, &catalog));
            Ok(())
        }
        Command::Profile { action: ProfileAction::Set { field, value, target } } => {
            let mut edit = ProfileEdit::default();
            match field {
                ProfileField::Username => edit.username = Some(value),
                ProfileField::Icon => edit.icon_id = Some(value),
                ProfileField::Title => edit.title_id = Some(value),
                ProfileField::Showcase => {
                    edit.showcase =
                        Some(value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_owned).collect())
                }
            }
            let backend = connect(&target)?;
            let body = backend.edit_profile(&edit)?;
            if target.json {
                return emit_json(&body);
            }
            let update: gipgut_core::service::ProfileUpdate = decode(&body)?;
            let catalog: Catalog = decode(&backend.catalog()?)?;
            print!("{}", render::profile(&update.profile, &catalog));
            if update.outcome.xp_total_awarded > 0 {
                print!("{}", render::outcome(&update.outcome, &catalog));
            }
            Ok(())
        }
        Command::Achievements { project, target } => {
            let backend = connect(&target)?;
            let body = backend.achievements(project.as_deref())?;
            if target.json {
                return emit_json(&body);
            }
            print!("{}", render::achievements(&decode::<Vec<AchievementView>>(&body)?));
            Ok(())
        }
        Command::Daily { target } => {
            let backend = connect(&target)?;
            let body = backend.daily()?;
            if target.json {
                return emit_json(&body);
            }
            let catalog: Catalog = decode(&backend.catalog()?)?;
            print!("{}", render::daily(&decode::<DailyTask>(&body)?, &catalog));
            Ok(())
        }
        Command::Simulate { pages, clicks, inputs, lookups, tests, failures, seed, project, profile } => {
            let spec = SimulationSpec {
                pages,
                clicks,
                inputs,
                lookups,
                tests,
                failures,
                seed,
                project_id: project,
                profile_id: profile,
            };
            let report = simulate_report(&spec).map_err(|e| CliError::Config(e.to_string()))?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(())
        }
    }
}

fn serve(config: ServerConfig) -> Result<(), CliError> {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Failed(e.to_string()))?;
    runtime.block_on(async {
        let (listener, service) = config.bind().await.map_err(|e| CliError::Config(e.to_string()))?;
        let local = listener.local_addr().map_err(|e| CliError::Failed(e.to_string()))?;
        println!("listening on {local}");
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        gipgut_server::run(listener, service, shutdown).await.map_err(|e| CliError::Failed(e.to_string()))
    })
}

/// Submits each file in order. Stops at the first connectivity failure;
/// other rejections are reported and the remaining files still run.
fn replay(files: &[PathBuf], target: &Target) -> Result<(), CliError> {
    let backend = connect(target)?;
    let catalog: Option<Catalog> = if target.json { None } else { Some(decode(&backend.catalog()?)?) };
    let mut rejected = 0usize;
    for path in files {
        let label = path.display();
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(e) => {
                eprintln!("{label}: cannot read: {e}");
                rejected += 1;
                continue;
            }
        };
        match backend.ingest(&bytes) {
            Ok(body) => match &catalog {
                None => emit_json(&body)?,
                Some(catalog) => {
                    let out: IngestOutcome = decode(&body)?;
                    println!("{label}:");
                    print!("{}", render::outcome(&out, catalog));
                }
            },
            Err(CliError::Rejected(msg)) => {
                eprintln!("{label}: rejected: {msg}");
                rejected += 1;
            }
            Err(other) => return Err(other),
        }
    }
    if rejected > 0 {
        return Err(CliError::Rejected(format!("{rejected} of {} reports not accepted", files.len())));
    }
    if let Some(catalog) = &catalog {
        println!("{}", render::level_line(&decode::<Profile>(&backend.profile()?)?, catalog));
    }
    Ok(())
}
