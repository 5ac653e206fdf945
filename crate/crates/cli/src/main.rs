//! `sphbv` command-line driver.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use sphbv::bounds::{run_campaign, CampaignConfig, CampaignKind};
use sphbv::classify::{classify_dual, classify_function};
use sphbv::harmonics::{basis, dim_h, zonal, DegreeInfo};
use sphbv::poisson::{bv_roundtrip, growth_classify_expansion, poisson_transform};
use sphbv::quadrature::QNorm;
use sphbv::support::{detect_support, DEFAULT_DELTA, DEFAULT_TAU};
use sphbv::symalg::param_point;
use sphbv::weights::{assoc_estimate_grid, check_conditions, petzsche_vogt_search};
use sphbv::{CampaignSummary, Error, Expansion, Kind, WeightSequence, VERSION};

#[derive(Parser, Serialize)]
#[command(name = "sphbv", version, about = "Spherical harmonics, weight sequences and boundary values on the unit ball")]
struct Cli {
    /// Seed for randomized campaigns.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for reports (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
enum Command {
    /// Dimensions d_j and eigenvalues of degree-j harmonics.
    Dims {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        jmax: usize,
    },
    /// Exact orthonormal basis and zonal kernel of degree j.
    Basis {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        j: usize,
    },
    /// Condition checks, associated functions and the Petzsche–Vogt search.
    Weights {
        #[command(flatten)]
        weights: WeightArgs,
        /// Points t at which M(t) and M*(t) are reported.
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
    },
    /// Classifies an expansion by the decay or growth of its degree norms.
    Classify {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long)]
        expansion: PathBuf,
        /// L^q exponent (a number or "inf").
        #[arg(long, default_value = "2")]
        q: String,
    },
    /// Randomized campaigns for the derivative bounds of spherical harmonics.
    VerifyBounds {
        /// One of a, b, c, step.
        #[arg(long)]
        inequality: String,
        /// Dimensions (default 2,3).
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long)]
        jmax: Option<usize>,
        #[arg(long)]
        alphamax: Option<u32>,
    },
    /// Samples P[f](rω) on an angle grid.
    Poisson {
        #[arg(long)]
        expansion: PathBuf,
        #[arg(long)]
        r: f64,
        /// Points per angle.
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
    /// Growth of P[f] against the associated function M*.
    Growth {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long)]
        expansion: PathBuf,
    },
    /// Support estimate from the Abel limit.
    Support {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long)]
        expansion: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
    },
    /// Boundary value of the Poisson transform against the input.
    Roundtrip {
        #[arg(long)]
        expansion: PathBuf,
        /// Maximal accepted coefficient deviation.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Args, Serialize, Clone)]
struct WeightArgs {
    /// Weight sequence JSON file.
    #[arg(long, conflicts_with_all = ["gevrey", "factorial"])]
    weights: Option<PathBuf>,
    /// Gevrey sequence (p!)^s.
    #[arg(long, conflicts_with = "factorial")]
    gevrey: Option<f64>,
    /// M_p = p!.
    #[arg(long)]
    factorial: bool,
    /// Table cutoff P_max.
    #[arg(long)]
    p_max: Option<usize>,
}

impl WeightArgs {
    fn load(&self, default_gevrey: Option<f64>) -> Result<WeightSequence, Failure> {
        let p_max = self.p_max.unwrap_or(sphbv::weights::DEFAULT_P_MAX);
        let w = if let Some(path) = &self.weights {
            let text = read(path)?;
            let mut w = WeightSequence::from_json_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            if let Some(p) = self.p_max {
                w = w.with_p_max(p)?;
            }
            w
        } else if let Some(s) = self.gevrey {
            WeightSequence::gevrey(s, p_max)?
        } else if self.factorial {
            WeightSequence::factorial(p_max)?
        } else if let Some(s) = default_gevrey {
            WeightSequence::gevrey(s, p_max)?
        } else {
            return Err(Failure::Input("a weight sequence is required (--weights FILE, --gevrey S or --factorial)".into()));
        };
        Ok(w)
    }
}

enum Failure {
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

struct Output {
    report: Value,
    csv: Option<String>,
    /// Extra CSV written next to the JSON report.
    side_csv: Option<(String, String)>,
    verified: bool,
}

impl Output {
    fn json(report: Value) -> Self {
        Self { report, csv: None, side_csv: None, verified: true }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_expansion(path: &Path) -> Result<Expansion, Failure> {
    let text = read(path)?;
    Expansion::from_json_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable report")
}

fn num(v: f64) -> String {
    format!("{v:.17e}")
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Dims { n, jmax } => {
            if *n < 2 {
                return Err(Failure::Input("n must be at least 2".into()));
            }
            let rows: Vec<DegreeInfo> = (0..=*jmax).map(|j| DegreeInfo::new(*n, j)).collect();
            let mut csv = String::from("j,d_j,eigenvalue\n");
            for r in &rows {
                csv.push_str(&format!("{},{},{}\n", r.j, r.d_j, r.eigenvalue));
            }
            let mut out = Output::json(json!({ "n": n, "rows": rows }));
            out.csv = Some(csv);
            Ok(out)
        }
        Command::Basis { n, j } => {
            if *n < 2 {
                return Err(Failure::Input("n must be at least 2".into()));
            }
            let b = basis(*n, *j)?;
            let z = zonal(*n, *j)?;
            let mut csv = String::from("k,normalizer\n");
            for k in 0..b.len() {
                csv.push_str(&format!("{k},{}\n", num(b.normalizer(k))));
            }
            let mut out = Output::json(json!({ "n": n, "j": j, "d_j": dim_h(*n, *j), "basis": b.to_json(), "zonal": z.to_json() }));
            out.csv = Some(csv);
            Ok(out)
        }
        Command::Weights { weights, t } => {
            let w = weights.load(None)?;
            let flags = check_conditions(&w)?;
            let pv = match petzsche_vogt_search(&w, &assoc_estimate_grid(1.0, 1e3, 40)) {
                Ok(r) => to_value(&r),
                Err(e) => json!({ "error": e.to_string() }),
            };
            let mut rows = Vec::new();
            let mut csv = String::from("t,M,M_star\n");
            for &ti in t {
                let m = w.associated_m(ti).map_err(Failure::from)?;
                let ms = w.associated_mstar(ti).map_err(Failure::from)?;
                csv.push_str(&format!("{},{},{}\n", num(ti), num(m), num(ms)));
                rows.push(json!({ "t": ti, "M": m, "M_star": ms }));
            }
            let mut out = Output::json(json!({ "weight": w.to_json(), "conditions": flags, "petzsche_vogt": pv, "associated": rows }));
            out.csv = Some(csv);
            Ok(out)
        }
        Command::Classify { weights, expansion, q } => {
            let w = weights.load(None)?;
            let e = load_expansion(expansion)?;
            let q: QNorm = q.parse().map_err(|e: Error| Failure::Input(e.to_string()))?;
            let r = match e.kind {
                Kind::Function => classify_function(&e, &w, q)?,
                Kind::Ultradistribution => classify_dual(&e, &w, q)?,
            };
            let mut csv = String::from("j,norm\n");
            for (j, v) in r.norm_track.iter().enumerate() {
                csv.push_str(&format!("{j},{}\n", num(*v)));
            }
            let mut out = Output::json(to_value(&r));
            out.csv = Some(csv);
            Ok(out)
        }
        Command::VerifyBounds { inequality, n, trials, jmax, alphamax } => {
            let kind: CampaignKind = inequality.parse()?;
            let mut cfg = CampaignConfig::new(kind, *trials, cli.seed);
            if !n.is_empty() {
                cfg.dims = n.clone();
            }
            if let Some(j) = jmax {
                cfg.jmax = *j;
            }
            if let Some(a) = alphamax {
                cfg.alphamax = *a;
            }
            let verdicts = run_campaign(&cfg)?;
            let summary = CampaignSummary::of(&verdicts);
            let mut csv = String::from("instance,lhs,rhs,slack_ratio,holds\n");
            for v in &verdicts {
                csv.push_str(&format!("\"{}\",{},{},{},{}\n", v.instance, num(v.lhs), num(v.rhs), num(v.slack_ratio), v.holds));
            }
            Ok(Output {
                verified: summary.all_hold(),
                report: json!({ "campaign": cfg, "summary": summary, "verdicts": verdicts }),
                csv: Some(csv),
                side_csv: None,
            })
        }
        Command::Poisson { expansion, r, grid } => {
            let e = load_expansion(expansion)?;
            let pts = angle_grid(e.n, *grid)?;
            let mut rows = Vec::with_capacity(pts.len());
            let mut csv = String::new();
            for d in 0..e.n - 1 {
                csv.push_str(&format!("theta{d},"));
            }
            csv.push_str("value\n");
            for theta in pts {
                let v = poisson_transform(&e, *r, &param_point(&theta))?;
                for t in &theta {
                    csv.push_str(&num(*t));
                    csv.push(',');
                }
                csv.push_str(&num(v.value));
                csv.push('\n');
                rows.push(json!({ "theta": theta, "value": v.value, "tail": v.tail }));
            }
            let mut out = Output::json(json!({ "n": e.n, "r": r, "grid": grid, "points": rows }));
            out.csv = Some(csv);
            Ok(out)
        }
        Command::Growth { weights, expansion } => {
            let w = weights.load(None)?;
            let e = load_expansion(expansion)?;
            let g = growth_classify_expansion(&e, &w)?;
            let mut csv = String::from("h,m,r,sup_u,log_weighted\n");
            for hh in &g.h_grid {
                for l in &hh.levels {
                    csv.push_str(&format!("{},{},{},{},{}\n", num(hh.h), l.m, num(l.r), num(l.sup_u), num(l.log_weighted)));
                }
            }
            let mut out = Output::json(to_value(&g));
            out.csv = Some(csv);
            Ok(out)
        }
        Command::Support { weights, expansion, delta, tau } => {
            let w = weights.load(Some(2.0))?;
            let e = load_expansion(expansion)?;
            let s = detect_support(&e, &w, None, *delta, *tau)?;
            let csv = s.profiles_csv();
            let mut out = Output::json(to_value(&s));
            out.side_csv = Some(("support_profiles.csv".into(), csv.clone()));
            out.csv = Some(csv);
            Ok(out)
        }
        Command::Roundtrip { expansion, tol } => {
            let e = load_expansion(expansion)?;
            let rt = bv_roundtrip(&e)?;
            let mut csv = String::from("j,deviation\n");
            for (j, v) in rt.per_degree.iter().enumerate() {
                csv.push_str(&format!("{j},{}\n", num(*v)));
            }
            Ok(Output {
                verified: rt.max_deviation <= *tol,
                report: json!({ "roundtrip": rt, "tol": tol, "holds": rt.max_deviation <= *tol }),
                csv: Some(csv),
                side_csv: None,
            })
        }
    }
}

/// Angle tuples: `grid` points per angle, polar angles at midpoints of
/// `[0, π]` and the last angle uniform on `[0, 2π)`.
fn angle_grid(n: usize, grid: usize) -> Result<Vec<Vec<f64>>, Failure> {
    use std::f64::consts::PI;
    let m = n - 1;
    let total = (grid as f64).powi(m as i32);
    if grid == 0 || total > 4.0e6 {
        return Err(Failure::Input(format!("grid of {grid}^{m} points is empty or too large")));
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; m];
    loop {
        out.push(
            idx.iter()
                .enumerate()
                .map(|(d, &k)| if d + 1 == m { 2.0 * PI * k as f64 / grid as f64 } else { PI * (k as f64 + 0.5) / grid as f64 })
                .collect(),
        );
        let mut d = 0;
        while d < m {
            idx[d] += 1;
            if idx[d] < grid {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == m {
            return Ok(out);
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Dims { .. } => "dims",
        Command::Basis { .. } => "basis",
        Command::Weights { .. } => "weights",
        Command::Classify { .. } => "classify",
        Command::VerifyBounds { .. } => "verify-bounds",
        Command::Poisson { .. } => "poisson",
        Command::Growth { .. } => "growth",
        Command::Support { .. } => "support",
        Command::Roundtrip { .. } => "roundtrip",
    }
}

fn emit(cli: &Cli, out: Output) -> std::io::Result<()> {
    let name = command_name(&cli.command);
    let envelope = json!({
        "artifact": "sphbv",
        "version": VERSION,
        "command": name,
        "config": to_value(cli),
        "verified": out.verified,
        "report": out.report,
    });
    let json_text = serde_json::to_string_pretty(&envelope).expect("serializable") + "\n";
    let csv_text = out.csv.map(|c| format!("# sphbv {VERSION} {name} seed={}\n{c}", cli.seed));
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            match (cli.format, &csv_text) {
                (Format::Csv, Some(c)) => std::fs::write(dir.join(format!("{name}.csv")), c)?,
                _ => std::fs::write(dir.join(format!("{name}.json")), &json_text)?,
            }
            if let Some((file, c)) = out.side_csv {
                std::fs::write(dir.join(file), c)?;
            }
        }
        None => match (cli.format, csv_text) {
            (Format::Csv, Some(c)) => print!("{c}"),
            _ => print!("{json_text}"),
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(out) => {
            let verified = out.verified;
            if let Err(e) = emit(&cli, out) {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(1);
            }
            if verified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
