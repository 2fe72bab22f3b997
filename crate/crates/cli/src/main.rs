use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use psrank::apolarity::sylvester_decompose;
use psrank::bounds::{
    bound_report_tensor, bound_report_w_product, format_report, format_table,
    submultiplicativity_table,
};
use psrank::constructions::{
    check_condition_33, curve_union_decomposition, prune_support, split_rank_one,
    thm33_decomposition, w_product, w_product_combined, CurvePointSet, XiScheme,
};
use psrank::exactla::rank;
use psrank::flatten::{cactus_lower_bound, flattening_matrix, merge_lower_bound, FlatteningSpec};
use psrank::forms::AnyDecomposition;
use psrank::json::{
    parse_coeff_list, parse_decomposition, parse_form, parse_multidegree_list, parse_tensor,
    to_json,
};
use psrank::repro::{run_all, run_criterion, seed_from_env, CRITERIA};
use psrank::{Error, FieldTag, PSTensor, Rational};

#[derive(Parser)]
#[command(
    name = "psrank",
    version,
    about = "Certified bounds for partially symmetric tensor rank"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for randomized checks (defaults to PSRANK_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Waring rank and a minimal decomposition of a binary form.
    Sylvester {
        /// Coefficients of x^d, x^{d-1}y, …, y^d, comma separated.
        #[arg(long, conflicts_with = "form")]
        coeffs: Option<String>,
        /// Form as JSON (file path or `-` for stdin).
        #[arg(long)]
        form: Option<String>,
        /// Field to decompose over: Q, Qi or approx.
        #[arg(long, default_value = "Qi")]
        field: String,
    },
    /// Exact rank of one flattening.
    Flatten {
        #[command(flatten)]
        target: TargetArgs,
        /// Exponents (e_1, …, e_k) of the row side.
        #[arg(long)]
        exponents: String,
    },
    /// Best flattening or merge lower bound.
    Lower {
        #[command(flatten)]
        target: TargetArgs,
    },
    /// Explicit decomposition of a W-product.
    Decompose {
        #[arg(long)]
        wproduct: String,
        #[arg(long, value_enum, default_value_t = Method::Combine)]
        method: Method,
        /// ξ values for thm33, comma separated.
        #[arg(long)]
        xi: Option<String>,
        /// Field for the rank-one split of thm33: Q, Qi or approx.
        #[arg(long, default_value = "Qi")]
        field: String,
        /// Emit the factor form of thm33 instead of rank-one terms.
        #[arg(long)]
        factor_form: bool,
    },
    /// Check a decomposition against a target; exit 1 if it does not match.
    Verify {
        /// Decomposition JSON (file path or `-`).
        #[arg(long)]
        dec: String,
        #[command(flatten)]
        target: TargetArgs,
        /// Residual tolerance for numeric decompositions.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Conditions on a_ij = ξ_i/(ξ_i - ξ_j) and the expansion of the identity.
    Check33 {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        xi: Option<String>,
    },
    /// Lower and upper bounds with witnesses.
    Bounds {
        #[command(flatten)]
        target: TargetArgs,
    },
    /// Submultiplicativity table over W-products.
    Table {
        #[arg(long, default_value_t = 3)]
        max_k: usize,
        #[arg(long, default_value_t = 4)]
        max_d: usize,
    },
    /// Run the reproduction table; exit 1 if any check fails.
    Repro {
        /// Run only these criteria, e.g. `1,7,9`.
        #[arg(long)]
        only: Option<String>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct TargetArgs {
    /// Tensor JSON (file path or `-`).
    #[arg(long)]
    tensor: Option<String>,
    /// W-product W_{d1} ⊗ … ⊗ W_{dk}, as d1,…,dk.
    #[arg(long)]
    wproduct: Option<String>,
    /// Alias of --tensor.
    #[arg(long)]
    target: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Thm33,
    Curve,
    Prune,
    Combine,
}

enum Target {
    WProduct(Vec<usize>),
    Tensor(PSTensor<Rational>),
}

impl Target {
    fn tensor(&self) -> Result<PSTensor<Rational>, Failure> {
        match self {
            Target::WProduct(ds) => Ok(w_product(ds)?),
            Target::Tensor(t) => Ok(t.clone()),
        }
    }
}

/// Exit status 2 for bad input, 1 for everything else.
enum Failure {
    Input(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::InvalidArgument(_)
            | Error::MultidegreeMismatch { .. }
            | Error::DimensionMismatch(_)
            | Error::ZeroInput(_) => Failure::Input(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

fn read_source(path: &str, field: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Input(format!("malformed input at `{field}`: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("malformed input at `{field}`: {path}: {e}")))
    }
}

fn parse_field(s: &str) -> Result<FieldTag, Failure> {
    s.parse()
        .map_err(|e| Failure::Input(format!("malformed input at `field`: {e}")))
}

fn parse_xi(s: &str) -> Result<XiScheme, Failure> {
    let xi = s
        .split(',')
        .enumerate()
        .map(|(i, v)| {
            v.trim()
                .parse::<Rational>()
                .map_err(|e| Failure::Input(format!("malformed input at `xi[{i}]`: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    XiScheme::new(xi).map_err(|e| Failure::Input(format!("malformed input at `xi`: {e}")))
}

fn target(args: &TargetArgs) -> Result<Target, Failure> {
    if let Some(ds) = &args.wproduct {
        return Ok(Target::WProduct(parse_multidegree_list(ds, "wproduct")?));
    }
    let path = args
        .tensor
        .as_ref()
        .or(args.target.as_ref())
        .expect("clap enforces one target");
    Ok(Target::Tensor(parse_tensor(&read_source(path, "tensor")?)?))
}

struct Output {
    json: Value,
    table: String,
    ok: bool,
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Sylvester {
            coeffs,
            form,
            field,
        } => {
            let f = match (coeffs, form) {
                (Some(c), _) => parse_coeff_list(c)?,
                (None, Some(path)) => parse_form(&read_source(path, "form")?)?,
                (None, None) => {
                    return Err(Failure::Input(
                        "malformed input at `coeffs`: give --coeffs or --form".into(),
                    ))
                }
            };
            let out = sylvester_decompose(&f, parse_field(field)?)?;
            let table = format!(
                "degree {}\nrank {}\nborder rank {}\nnon-unique {}\nfield {}\nresidual {:.1e}\n",
                out.degree,
                out.rank,
                out.border_rank,
                out.non_unique,
                out.field(),
                out.residual
            );
            Ok(Output {
                json: json!({
                    "degree": out.degree,
                    "rank": out.rank,
                    "border_rank": out.border_rank,
                    "non_unique": out.non_unique,
                    "field": out.field(),
                    "residual": out.residual,
                    "apolar_form": out.apolar_form,
                    "decomposition": out.decomposition,
                }),
                table,
                ok: true,
            })
        }
        Command::Flatten {
            target: t,
            exponents,
        } => {
            let t = target(t)?.tensor()?;
            let es = parse_exponents(exponents)?;
            let spec = FlatteningSpec::new(t.multidegree().to_vec(), es)?;
            let m = flattening_matrix(&t, &spec)?;
            let r = rank(&m);
            Ok(Output {
                table: format!("{}×{} flattening of rank {r}\n", m.rows(), m.cols()),
                json: json!({ "spec": spec, "rows": m.rows(), "cols": m.cols(), "rank": r }),
                ok: true,
            })
        }
        Command::Lower { target: t } => {
            let target = target(t)?;
            let mut best = cactus_lower_bound(&target.tensor()?)?;
            if let Target::WProduct(ds) = &target {
                let merged = merge_lower_bound(ds)?;
                if merged.value > best.value {
                    best = merged;
                }
            }
            Ok(Output {
                table: format!("lower bound {} via {}\n", best.value, best.method_name()),
                json: serde_json::to_value(&best).expect("serializes"),
                ok: true,
            })
        }
        Command::Decompose {
            wproduct,
            method,
            xi,
            field,
            factor_form,
        } => {
            let ds = parse_multidegree_list(wproduct, "wproduct")?;
            let dec = match method {
                Method::Thm33 => {
                    if ds.iter().any(|&d| d != 3) {
                        return Err(Failure::Input(
                            "malformed input at `wproduct`: thm33 needs every degree equal to 3"
                                .into(),
                        ));
                    }
                    let scheme = match xi {
                        Some(s) => parse_xi(s)?,
                        None => XiScheme::default_for(ds.len())?,
                    };
                    if scheme.k() != ds.len() {
                        return Err(Failure::Input(format!(
                            "malformed input at `xi`: expected {} values, got {}",
                            ds.len(),
                            scheme.k()
                        )));
                    }
                    let fd = thm33_decomposition(&scheme)?;
                    if *factor_form {
                        let split = fd.split_count();
                        return Ok(Output {
                            table: format!(
                                "{} factor terms, {split} after splitting\n",
                                fd.terms.len()
                            ),
                            json: serde_json::to_value(&fd).expect("serializes"),
                            ok: true,
                        });
                    }
                    split_rank_one(&fd, parse_field(field)?)?.decomposition
                }
                Method::Curve => AnyDecomposition::Rational(curve_union_decomposition(&ds, None)?),
                Method::Prune => {
                    let t = w_product(&ds)?;
                    let points = if ds.len() == 2 {
                        CurvePointSet::hyperplane_section(ds[0], ds[1])?.points()
                    } else {
                        CurvePointSet::default_for(&ds)?.points()
                    };
                    AnyDecomposition::Rational(prune_support(&ds, &points, &t)?)
                }
                Method::Combine => AnyDecomposition::Rational(w_product_combined(&ds)?),
            };
            let report = dec.verify_against(&w_product(&ds)?, None)?;
            Ok(Output {
                table: format!(
                    "{} terms over {}, residual {:.1e}\n",
                    dec.len(),
                    dec.field(),
                    report.residual
                ),
                json: serde_json::to_value(&dec).expect("serializes"),
                ok: report.ok,
            })
        }
        Command::Verify {
            dec,
            target: t,
            tol,
        } => {
            let dec = parse_decomposition(&read_source(dec, "dec")?)?;
            let t = target(t)?.tensor()?;
            if dec.multidegree() != t.multidegree() {
                eprintln!(
                    "error: decomposition has multidegree {:?}, target has {:?}",
                    dec.multidegree(),
                    t.multidegree()
                );
                return Ok(Output {
                    table: "mismatch (multidegree)\n".into(),
                    json: json!({ "ok": false, "term_count": dec.len(), "field": dec.field() }),
                    ok: false,
                });
            }
            let report = dec.verify_against(&t, *tol)?;
            Ok(Output {
                table: format!(
                    "{} ({} terms over {}, residual {:.1e})\n",
                    if report.ok { "ok" } else { "mismatch" },
                    report.term_count,
                    report.field,
                    report.residual
                ),
                json: json!({
                    "ok": report.ok,
                    "residual": report.residual,
                    "term_count": report.term_count,
                    "field": report.field,
                }),
                ok: report.ok,
            })
        }
        Command::Check33 { k, xi } => {
            let scheme = match (xi, k) {
                (Some(s), _) => parse_xi(s)?,
                (None, Some(k)) => XiScheme::default_for(*k)?,
                (None, None) => {
                    return Err(Failure::Input(
                        "malformed input at `k`: give --k or --xi".into(),
                    ))
                }
            };
            if let (Some(k), true) = (k, xi.is_some()) {
                if *k != scheme.k() {
                    return Err(Failure::Input(format!(
                        "malformed input at `xi`: expected {k} values, got {}",
                        scheme.k()
                    )));
                }
            }
            let report = check_condition_33(&scheme.matrix())?;
            let fd = thm33_decomposition(&scheme)?;
            let expands = fd.expand()? == w_product(&vec![3; scheme.k()])?;
            let ok = report.holds && expands;
            Ok(Output {
                table: format!(
                    "conditions {} ({} subsets), expansion {}, split count {}\n",
                    if report.holds { "hold" } else { "fail" },
                    report.subsets_checked,
                    if expands { "exact" } else { "wrong" },
                    fd.split_count()
                ),
                json: json!({
                    "xi": scheme.xi(),
                    "conditions": report,
                    "expands_to_target": expands,
                    "split_count": fd.split_count(),
                }),
                ok,
            })
        }
        Command::Bounds { target: t } => {
            let report = match target(t)? {
                Target::WProduct(ds) => bound_report_w_product(&ds)?,
                Target::Tensor(t) => bound_report_tensor(&t)?,
            };
            Ok(Output {
                table: format_report(&report),
                json: serde_json::to_value(&report).expect("serializes"),
                ok: true,
            })
        }
        Command::Table { max_k, max_d } => {
            let rows = submultiplicativity_table(*max_k, *max_d)?;
            Ok(Output {
                table: format_table(&rows),
                json: serde_json::to_value(&rows).expect("serializes"),
                ok: true,
            })
        }
        Command::Repro { only } => {
            let seed = cli.seed.unwrap_or_else(seed_from_env);
            let outcomes = match only {
                None => run_all(seed),
                Some(list) => parse_multidegree_list(list, "only")?
                    .into_iter()
                    .map(|id| {
                        if id > CRITERIA {
                            Err(Failure::Input(format!(
                                "malformed input at `only`: criterion {id} does not exist"
                            )))
                        } else {
                            Ok(run_criterion(id, seed))
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            };
            let ok = outcomes.iter().all(|o| o.pass);
            let mut table = format!("seed {seed}\n");
            for o in &outcomes {
                table.push_str(&o.line());
                table.push('\n');
            }
            Ok(Output {
                table,
                json: json!({ "seed": seed, "pass": ok, "criteria": outcomes }),
                ok,
            })
        }
    }
}

fn parse_exponents(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .enumerate()
        .map(|(i, v)| {
            v.trim().parse::<usize>().map_err(|_| {
                Failure::Input(format!(
                    "malformed input at `exponents[{i}]`: expected a nonnegative integer, got {:?}",
                    v.trim()
                ))
            })
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            match cli.format {
                Format::Json => print!("{}", to_json(&out.json)),
                Format::Table => print!("{}", out.table),
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: verification failed");
                ExitCode::from(1)
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
