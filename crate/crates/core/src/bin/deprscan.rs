use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use deprscan::depdb::DeprecationDb;
use deprscan::eval::{format_table, load_manifest, run_eval};
use deprscan::extractor::{extract_library, ExtractorConfig};
use deprscan::output::{render, OutputFormat};
use deprscan::scan::scan_project;

#[derive(Parser)]
#[command(name = "deprscan", version, about = "Find deprecated Python APIs in libraries and their uses in client code")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine deprecated elements from a library source tree into a database.
    Extract(ExtractArgs),
    /// Report uses of deprecated elements in a project.
    Scan(ScanArgs),
    /// Compare detection counts against reference counts.
    Eval(EvalArgs),
    /// Run the language server over stdio.
    Serve(ServeArgs),
}

#[derive(Args)]
struct ExtractArgs {
    library_root: PathBuf,
    /// Library name stamped on records (default: root directory name).
    #[arg(long)]
    library: Option<String>,
    /// Library version (default: read from the sources when possible).
    #[arg(long)]
    version: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Also treat PendingDeprecationWarning as a deprecation category.
    #[arg(long)]
    include_pending: bool,
    /// Case-insensitive regex over a decorator's last name segment.
    #[arg(long, default_value = "deprecat")]
    decorator_pattern: String,
    /// Directory names to skip.
    #[arg(long, value_delimiter = ',', default_value = "tests,test,benchmarks,examples")]
    exclude_dirs: Vec<String>,
    /// Write unparseable files (path and error) to this file.
    #[arg(long)]
    skipped_report: Option<PathBuf>,
    /// Also check function docstrings for the keyword.
    #[arg(long)]
    check_function_docstrings: bool,
    /// Attribute warning calls outside functions to the module.
    #[arg(long)]
    module_level_warnings: bool,
}

#[derive(Args)]
struct ScanArgs {
    project_path: PathBuf,
    #[arg(long = "db", required = true)]
    dbs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Exit with status 1 when anything is reported.
    #[arg(long)]
    fail_on_hit: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// JSON array of {name, path, expected_detected}.
    #[arg(long)]
    libraries: PathBuf,
    /// Write each library's database here.
    #[arg(long)]
    db_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long = "db", required = true)]
    dbs: Vec<PathBuf>,
    #[arg(long, default_value_t = 200)]
    debounce_ms: u64,
}

fn load_dbs(paths: &[PathBuf]) -> deprscan::Result<DeprecationDb> {
    let mut merged: Option<DeprecationDb> = None;
    for p in paths {
        let db = DeprecationDb::load(p)?;
        merged = Some(match merged {
            Some(m) => m.merge(&db),
            None => db,
        });
    }
    Ok(merged.unwrap_or_default())
}

fn extract(args: ExtractArgs) -> deprscan::Result<ExitCode> {
    let mut cfg = ExtractorConfig::default().with_decorator_pattern(&args.decorator_pattern)?;
    cfg.include_pending = args.include_pending;
    cfg.exclude_dirs = args.exclude_dirs.into_iter().filter(|d| !d.is_empty()).collect();
    cfg.check_function_docstrings = args.check_function_docstrings;
    cfg.module_level_warnings = args.module_level_warnings;
    let library = args.library.unwrap_or_else(|| {
        let root = std::fs::canonicalize(&args.library_root).unwrap_or_else(|_| args.library_root.clone());
        root.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "library".into())
    });
    let x = extract_library(&args.library_root, &library, args.version.as_deref(), &cfg)?;
    DeprecationDb::from_extraction(&x).save(&args.out)?;
    if let Some(path) = &args.skipped_report {
        std::fs::write(path, x.skipped_report()).map_err(|e| deprscan::Error::Io { path: path.clone(), source: e })?;
    }
    eprintln!("extracted {} records from {} files ({} skipped)", x.records.len(), x.files_scanned, x.skipped.len());
    Ok(ExitCode::SUCCESS)
}

fn scan(args: ScanArgs) -> deprscan::Result<ExitCode> {
    let db = load_dbs(&args.dbs)?;
    let result = scan_project(&args.project_path, &db)?;
    for (path, err) in &result.errors {
        eprintln!("{}: skipped: {err}", path.display());
    }
    print!("{}", render(&result.diagnostics, args.format));
    if args.fail_on_hit && !result.diagnostics.is_empty() {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn eval(args: EvalArgs) -> deprscan::Result<ExitCode> {
    let manifest = load_manifest(&args.libraries)?;
    let base = args.libraries.parent().unwrap_or(Path::new("."));
    let rows = run_eval(&manifest, base, args.db_dir.as_deref(), &ExtractorConfig::default())?;
    for r in &rows {
        if r.detected.is_some() {
            eprintln!("{}: {} files in {:.2?}", r.library, r.files_scanned, r.elapsed);
        }
    }
    print!("{}", format_table(&rows));
    Ok(ExitCode::SUCCESS)
}

fn serve(args: ServeArgs) -> deprscan::Result<ExitCode> {
    let db = Arc::new(load_dbs(&args.dbs)?);
    let code = deprscan::lsp::serve_stdio(db, Duration::from_millis(args.debounce_ms))
        .map_err(|e| deprscan::Error::Io { path: "<stdio>".into(), source: e })?;
    Ok(ExitCode::from(code as u8))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DEPRSCAN_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract(a) => extract(a),
        Command::Scan(a) => scan(a),
        Command::Eval(a) => eval(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("deprscan: {e}");
            ExitCode::from(2)
        }
    }
}
