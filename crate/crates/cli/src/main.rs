//! `transparent`: generate, verify, transport, reduce and export transparent
//! pairs. Exit status 0 means success, 1 a failed certification or
//! verification, 2 bad input or configuration.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use transparent_pairs::backlund::{generate_chain, reduce_degree, ReductionOptions};
use transparent_pairs::cocycle::{transport, triviality_residual, TransportOptions};
use transparent_pairs::io::{
    encode_pgm, field_from_json, field_from_json_on, field_hash, field_to_json, pair_from_json, pair_to_json, select,
    CertificateRecord, Selector,
};
use transparent_pairs::random::{random_gauge, FieldRng};
use transparent_pairs::smfield::{gauge_trivializer, FourierField, Pair};
use transparent_pairs::torus::SMPoint;
use transparent_pairs::verify::{verify_pair, VerifyOptions, VerifyTolerances};
use transparent_pairs::Error;

use config::RunConfig;

#[derive(Parser)]
#[command(name = "transparent", version, about = "Transparent SO(3) pairs on the 2-torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a chain of transformation steps from the trivial pair
    Generate {
        /// TOML run configuration
        config: PathBuf,
        /// output directory (overrides `out_dir` in the config)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a pair and a trivializer against every residual identity
    Verify {
        #[arg(long)]
        pair: PathBuf,
        /// trivializer; the identity when omitted
        #[arg(long)]
        trivializer: Option<PathBuf>,
        /// TOML file with verify tolerances
        #[arg(long)]
        tolerances: Option<PathBuf>,
        /// write the report as JSON
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        orbits: usize,
        #[arg(long, default_value_t = 5.0)]
        orbit_time: f64,
    },
    /// Transport the cocycle along one geodesic and write it as CSV
    Transport {
        #[arg(long)]
        pair: PathBuf,
        /// compare the cocycle with this trivializer
        #[arg(long)]
        trivializer: Option<PathBuf>,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        time: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// polar re-projection every this many steps
        #[arg(long)]
        reproject_every: Option<usize>,
        /// CSV path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower the degree of a trivializer by one step
    Reduce {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        trivializer: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one component of a field as a PGM heatmap
    Export {
        /// field file, or pair file together with --component
        #[arg(long)]
        field: PathBuf,
        /// `connection` or `higgs` when the file holds a pair
        #[arg(long, default_value = "higgs")]
        component: String,
        /// `MODE:norm` or `MODE:RC:re|im|abs`
        #[arg(long)]
        select: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        sixteen_bit: bool,
        /// also write `x,y,value` rows
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

fn input(message: impl ToString) -> Failure {
    Failure { code: 2, message: message.to_string() }
}

fn failed(message: impl ToString) -> Failure {
    Failure { code: 1, message: message.to_string() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidGrid(_)
            | Error::NonSmoothLambda(_)
            | Error::MetricMismatch
            | Error::Format(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::NotUnit(_)
            | Error::StepTooLarge { .. } => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_pair(path: &Path) -> Result<Pair, Failure> {
    pair_from_json(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_trivializer(path: Option<&Path>, pair: &Pair) -> Result<FourierField, Failure> {
    match path {
        None => Ok(FourierField::identity(pair.metric())),
        Some(p) => field_from_json_on(&read(p)?, pair.metric()).map_err(|e| input(format!("{}: {e}", p.display()))),
    }
}

fn json_text(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn generate(config: &Path, out: Option<PathBuf>) -> Outcome {
    let cfg = RunConfig::parse(&read(config)?).map_err(|e| input(format!("{}: {e}", config.display())))?;
    let dir = out.or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let metric = cfg.metric().map_err(input)?;
    let chain = generate_chain(&metric, &cfg.chain, &cfg.step_tolerances())?;
    let mut records = Vec::with_capacity(chain.certificates.len());
    for (k, (cert, spec)) in chain.certificates.iter().zip(&cfg.chain).enumerate() {
        records.push(CertificateRecord::new(k, Some(spec.clone()), cert)?);
    }
    let (pair, u) = match cfg.gauge {
        Some(gc) => {
            let r = random_gauge(metric.grid(), &mut FieldRng::seed(cfg.seed), gc.band, gc.amplitude);
            (chain.pair.gauge(&r), gauge_trivializer(&r, &chain.trivializer))
        }
        None => (chain.pair, chain.trivializer),
    };
    let transport_residual = pair.transport_residual(&u);
    let limit = cfg.tolerances.verify.unwrap_or_default().transport;
    if !(transport_residual <= limit) {
        return Err(failed(format!("final transport residual {transport_residual:.3e} exceeds {limit:.1e}")));
    }
    fs::create_dir_all(&dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
    write(&dir.join("pair.json"), &pair_to_json(&pair)?)?;
    write(&dir.join("trivializer.json"), &field_to_json(&u)?)?;
    let certs = json!({
        "config": cfg,
        "steps": records,
        "final": {
            "transport_residual": transport_residual,
            "higgs_sup": pair.higgs.sup_norm(),
            "trivializer_degree": u.degree(),
            "connection_hash": field_hash(&pair.connection.to_field())?,
            "higgs_hash": field_hash(&pair.higgs.to_field())?,
            "trivializer_hash": field_hash(&u)?,
        },
    });
    write(&dir.join("certificates.json"), &json_text(&certs))?;
    println!(
        "{} steps, trivializer degree {}, transport residual {transport_residual:.3e}, wrote {}",
        records.len(),
        u.degree(),
        dir.display()
    );
    Ok(())
}

fn verify(
    pair: &Path,
    trivializer: Option<&Path>,
    tolerances: Option<&Path>,
    report: Option<&Path>,
    orbits: usize,
    orbit_time: f64,
) -> Outcome {
    let tol: VerifyTolerances = match tolerances {
        Some(p) => toml::from_str(&read(p)?).map_err(|e| input(format!("{}: {e}", p.display())))?,
        None => VerifyTolerances::default(),
    };
    let pair = load_pair(pair)?;
    let u = load_trivializer(trivializer, &pair)?;
    let opts = VerifyOptions { tolerances: tol, orbits, orbit_time, ..VerifyOptions::default() };
    let rep = verify_pair(&pair, &u, &opts)?;
    print!("{}", rep.to_text());
    if let Some(p) = report {
        write(p, &json_text(&serde_json::to_value(&rep).expect("serializable")))?;
    }
    if rep.passed {
        Ok(())
    } else {
        let tags: Vec<&str> = rep.failing().map(|c| c.tag.as_str()).collect();
        Err(failed(format!("failing identities: {}", tags.join(", "))))
    }
}

#[allow(clippy::too_many_arguments)]
fn transport_cmd(
    pair: &Path,
    trivializer: Option<&Path>,
    p0: SMPoint,
    time: f64,
    dt: f64,
    reproject_every: Option<usize>,
    out: Option<&Path>,
) -> Outcome {
    if !(time >= 0.0) {
        return Err(input("time must be non-negative"));
    }
    let pair = load_pair(pair)?;
    let opts = TransportOptions { dt, reproject_every, ..TransportOptions::default() };
    let res = match trivializer {
        Some(p) => {
            let u = load_trivializer(Some(p), &pair)?;
            triviality_residual(&pair, &u, p0, time, &opts, 1)?
        }
        None => transport(&pair, p0, time, &opts)?,
    };
    let mut summary = format!(
        "final |C - Id| {:.3e}, max drift {:.3e}",
        (res.end() - transparent_pairs::lie3::Mat3::identity()).norm(),
        res.max_drift
    );
    if let Some(c) = res.comparison {
        summary.push_str(&format!(", max |C - u(phi_t) u^-1| {c:.3e}"));
    }
    match out {
        Some(p) => {
            write(p, &res.to_csv())?;
            println!("{summary}");
        }
        None => {
            print!("{}", res.to_csv());
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn reduce(pair: &Path, trivializer: &Path, out: &Path) -> Outcome {
    let pair = load_pair(pair)?;
    let u = load_trivializer(Some(trivializer), &pair)?;
    if u.effective_degree(1e-12) == 0 {
        return Err(input("trivializer already has degree 0"));
    }
    let red = reduce_degree(&pair, &u, &ReductionOptions::default())?;
    fs::create_dir_all(out).map_err(|e| input(format!("{}: {e}", out.display())))?;
    write(&out.join("g.json"), &field_to_json(&red.g.to_field())?)?;
    write(&out.join("trivializer.json"), &field_to_json(&red.trivializer)?)?;
    write(&out.join("pair.json"), &pair_to_json(&red.pair)?)?;
    let report = json!({
        "diagnostics": red.diagnostics,
        "step": CertificateRecord::new(0, None, &red.certificate)?,
    });
    write(&out.join("reduction.json"), &json_text(&report))?;
    let d = &red.diagnostics;
    println!(
        "degree {} -> {}, removed modes {:.3e}, transport {:.3e}, zero points {}",
        d.degree,
        red.trivializer.degree(),
        d.removed_modes,
        d.transport,
        d.zero_points
    );
    Ok(())
}

fn export(field: &Path, component: &str, sel: &str, out: &Path, sixteen_bit: bool, csv: Option<&Path>) -> Outcome {
    let sel: Selector = sel.parse().map_err(|e: Error| input(e))?;
    let text = read(field)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", field.display())))?;
    let f = if value.get("connection").is_some() {
        let pair = pair_from_json(&text).map_err(|e| input(format!("{}: {e}", field.display())))?;
        match component {
            "connection" => pair.connection.to_field(),
            "higgs" => pair.higgs.to_field(),
            other => return Err(input(format!("unknown component {other:?}; expected connection or higgs"))),
        }
    } else {
        field_from_json(&text).map_err(|e| input(format!("{}: {e}", field.display())))?
    };
    let g = f.grid();
    let values = select(&f, &sel);
    let (bytes, scale) = encode_pgm(&values, g.nx, g.ny, sixteen_bit)?;
    fs::write(out, bytes).map_err(|e| input(format!("{}: {e}", out.display())))?;
    write(&out.with_extension("txt"), &scale.to_text())?;
    if let Some(p) = csv {
        let mut s = String::from("x,y,value\n");
        for ((x, y), v) in g.points().zip(&values) {
            s.push_str(&format!("{x:.10e},{y:.10e},{v:.16e}\n"));
        }
        write(p, &s)?;
    }
    println!("{}x{} heatmap, min {:.6e}, max {:.6e}", g.nx, g.ny, scale.min, scale.max);
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Generate { config, out } => generate(&config, out),
        Command::Verify { pair, trivializer, tolerances, report, orbits, orbit_time } => {
            verify(&pair, trivializer.as_deref(), tolerances.as_deref(), report.as_deref(), orbits, orbit_time)
        }
        Command::Transport { pair, trivializer, x, y, theta, time, dt, reproject_every, out } => {
            transport_cmd(&pair, trivializer.as_deref(), SMPoint::new(x, y, theta), time, dt, reproject_every, out.as_deref())
        }
        Command::Reduce { pair, trivializer, out } => reduce(&pair, &trivializer, &out),
        Command::Export { field, component, select, out, sixteen_bit, csv } => {
            export(&field, &component, &select, &out, sixteen_bit, csv.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
