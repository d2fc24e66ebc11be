//! `regcert`: pointwise Lipschitz and distortion fields, curve modulus,
//! covering contents and energy certificates for sampled mappings.
//!
//! Exit codes: 0 success or PASS, 1 verdict FAIL, 2 input error,
//! 3 parameter error, 4 solver budget exhausted.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use regularity_certify::{HField, Theorem};

mod commands;
mod config;
mod error;

use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "regcert", version, about = "Energy certificates for sampled mappings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML run configuration; flags override it
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    domain: Option<PathBuf>,
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// auxiliary measure (JSON); the domain measure when omitted
    #[arg(long)]
    weight: Option<PathBuf>,
    /// output directory
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate pointwise fields and write them as CSV
    Fields {
        #[command(flatten)]
        common: Common,
        /// comma separated: lip, Lip, h, H, Lip_generalized, H_generalized
        #[arg(long, value_delimiter = ',')]
        kinds: Option<Vec<String>>,
        /// decreasing radii, comma separated
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        #[arg(long)]
        tail: Option<usize>,
        /// ball enlargement M
        #[arg(long)]
        spread: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        stride: Option<usize>,
    },
    /// Discrete p-modulus of a curve family
    Modulus {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p: Option<f64>,
        /// straight curves along this axis
        #[arg(long)]
        axis: Option<usize>,
        /// JSON list of curves given as point index lists
        #[arg(long)]
        curves: Option<PathBuf>,
        #[arg(long)]
        max_sweeps: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        time_limit: Option<f64>,
    },
    /// Covering content of a point set
    Hausdorff {
        #[command(flatten)]
        common: Common,
        /// JSON list of point indices
        #[arg(long)]
        set: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lo: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        hi: Option<Vec<f64>>,
        #[arg(long, conflicts_with = "dimension")]
        codimension: Option<f64>,
        #[arg(long)]
        dimension: Option<f64>,
        #[arg(long)]
        cap: Option<f64>,
        #[arg(long)]
        effort: Option<usize>,
    },
    /// Run a theorem pipeline and write its certificate
    Certify {
        #[command(flatten)]
        common: Common,
        /// bv, sobolev-lip, sobolev-distortion or sobolev-critical
        #[arg(long)]
        theorem: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        spread: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
        /// constant dominating function
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long)]
        curves: Option<usize>,
    },
    /// Generate a reference scenario and check its expectations
    Reproduce {
        name: String,
        /// scenario parameters (TOML or JSON)
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Write the input files of a reference scenario
    Generate {
        name: String,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn base_config(common: Common) -> Result<RunConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let inputs = &mut config.input;
    for (slot, flag) in [
        (&mut inputs.domain, common.domain),
        (&mut inputs.target, common.target),
        (&mut inputs.mapping, common.mapping),
        (&mut inputs.weight, common.weight),
        (&mut config.output, common.out),
    ] {
        if flag.is_some() {
            *slot = flag;
        }
    }
    if common.seed.is_some() {
        config.seed = common.seed;
    }
    Ok(config)
}

fn run(command: Command) -> Result<commands::Outcome, CliError> {
    match command {
        Command::Fields {
            common,
            kinds,
            radii,
            tail,
            spread,
            q,
            stride,
        } => {
            let mut c = base_config(common)?;
            let f = &mut c.fields;
            set(&mut f.kinds, kinds);
            set(&mut f.radii, radii);
            set(&mut f.tail, tail);
            set(&mut f.spread, spread);
            if q.is_some() {
                f.q = q;
            }
            set(&mut f.stride, stride);
            commands::fields(&c)
        }
        Command::Modulus {
            common,
            p,
            axis,
            curves,
            max_sweeps,
            tolerance,
            time_limit,
        } => {
            let mut c = base_config(common)?;
            let m = &mut c.modulus;
            set(&mut m.p, p);
            if axis.is_some() {
                m.axis = axis;
                m.curves = None;
            }
            if curves.is_some() {
                m.curves = curves;
                m.axis = None;
            }
            set(&mut m.max_sweeps, max_sweeps);
            set(&mut m.tolerance, tolerance);
            if time_limit.is_some() {
                m.time_limit_secs = time_limit;
            }
            commands::modulus(&c)
        }
        Command::Hausdorff {
            common,
            set: set_file,
            lo,
            hi,
            codimension,
            dimension,
            cap,
            effort,
        } => {
            let mut c = base_config(common)?;
            let h = &mut c.hausdorff;
            if set_file.is_some() {
                h.set = set_file;
            }
            if lo.is_some() || hi.is_some() {
                h.set = None;
                h.lo = lo;
                h.hi = hi;
            }
            if codimension.is_some() {
                h.codimension = codimension;
                h.dimension = None;
            }
            if dimension.is_some() {
                h.dimension = dimension;
                h.codimension = None;
            }
            if cap.is_some() {
                h.cap = cap;
            }
            set(&mut h.effort, effort);
            commands::hausdorff(&c)
        }
        Command::Certify {
            common,
            theorem,
            p,
            q,
            spread,
            epsilon,
            beta,
            levels,
            h,
            stride,
            curves,
        } => {
            let mut c = base_config(common)?;
            let r = &mut c.certify;
            if let Some(t) = theorem {
                r.theorem = t.parse::<Theorem>().map_err(error::parameter)?;
            }
            set(&mut r.p, p);
            set(&mut r.q, q);
            set(&mut r.spread, spread);
            set(&mut r.epsilon, epsilon);
            if beta.is_some() {
                r.beta = beta;
            }
            set(&mut r.levels, levels);
            set(&mut r.h, h.map(HField::Constant));
            set(&mut r.stride, stride);
            set(&mut r.curves, curves);
            commands::certify_cmd(&c)
        }
        Command::Reproduce { name, params, out } => {
            commands::reproduce_cmd(&name, params.as_deref(), out.as_deref())
        }
        Command::Generate { name, params, out } => {
            commands::generate_cmd(&name, params.as_deref(), &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
