//! Command-line harness over the exact engines: attractor iteration, box
//! counting, sum-dimension experiments, the verification engines, and the
//! report-only search harnesses.
//!
//! Shared contracts:
//! * every command is a pure function of its arguments — reruns are
//!   byte-identical, independent of the worker count;
//! * rationals are written `p/q` (decimal notation is rejected);
//! * depth ranges are written `a:b`, both ends included;
//! * exit codes: 0 pass, 1 a checked bound or containment failed,
//!   2 invalid parameters or a violated hypothesis, 3 resource cap.

use std::fs;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use sumdim_core::addcomb::{
    check_plunnecke, check_tuple_inequality, eq42_holds, search_conjecture5, GroupSubset,
};
use sumdim_core::boxdim::{
    box_count_intervals, estimate_dim, run_sum_experiment, theorem_bound, BoundSpec, DimBound,
    SumOperand,
};
use sumdim_core::ifs::{check_r2_hypotheses, FamilyLabel};
use sumdim_core::proofs::{
    explore_conj222, prop2_cover_check, prop2_solve, prop3_verify, r3_verify, r4_tiling_check,
};
use sumdim_core::scalar::parse_rat;
use sumdim_core::sumset::parse_signs;
use sumdim_core::{rat, rat_int, Caps, Error, IFSystem, Int, IntervalUnion, Rat, Result};

const CAPS_HELP: &str = "Resource caps (environment variable overrides):
  SUMDIM_MAX_INTERVALS   intervals per union                 [default: 10000000]
  SUMDIM_MAX_CELLS       cells per cell set                  [default: 50000000]
  SUMDIM_MAX_GRID_SIDE   per-axis difference-grid side       [default: 16384]
  SUMDIM_MAX_GRID_BITS   total difference-grid bits          [default: 2147483648]
  SUMDIM_MAX_ENUM        exact enumeration budget            [default: 100000000]
Exceeding a cap exits with status 3.

Exit codes: 0 pass; 1 a checked bound or containment failed; 2 invalid
parameters or a violated hypothesis; 3 resource cap.

Rationals are written p/q (decimals rejected). Depth ranges a:b include both
ends. Reruns of any command are byte-identical, independent of --threads.";

#[derive(Parser)]
#[command(
    name = "sumdim",
    version,
    about = "Exact experiments and verifiers for sums of self-similar sets",
    after_help = CAPS_HELP
)]
struct Cli {
    /// Worker threads for the parallel kernels (default: all cores).
    /// Outputs do not depend on this setting.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Iterate a family and print its stage-m interval set.
    Attractor(AttractorArgs),
    /// Box-count a family across a depth range and fit a dimension slope.
    Boxdim(BoxdimArgs),
    /// Box-count K, E, and K+E on a common grid; compare the sum's slope
    /// against a dimension lower bound.
    Sumdim(SumdimArgs),
    /// Run one of the exact verification engines; prints a JSON report.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Run a report-only exploration harness; prints JSON lines.
    #[command(subcommand)]
    Search(SearchCmd),
}

/// Family selector shared by `attractor` and `boxdim`.
#[derive(Args)]
struct FamilyArgs {
    /// Family kind: digit-cantor | cantor | r2.
    #[arg(long)]
    family: String,
    /// Base for digit-cantor.
    #[arg(long)]
    n: Option<u32>,
    /// Comma-separated digit list for digit-cantor, e.g. 0,2.
    #[arg(long = "A", value_name = "DIGITS")]
    digits: Option<String>,
    /// Contraction ratio p/q for cantor, in (0, 1/2).
    #[arg(long)]
    a: Option<String>,
    /// Largest translation J for r2.
    #[arg(long = "J")]
    j: Option<u32>,
    /// Contraction ratio p/q for r2; the window 2/(3J) <= r < 1/(J+1) is
    /// required.
    #[arg(long)]
    r: Option<String>,
}

impl FamilyArgs {
    fn build(&self) -> Result<IFSystem> {
        match self.family.as_str() {
            "digit-cantor" => {
                let n = require(self.n, "--n")?;
                let digits = parse_u32_list(require(self.digits.as_deref(), "--A")?)?;
                IFSystem::digit_cantor(n, &digits)
            }
            "cantor" => {
                let a = parse_rat(require(self.a.as_deref(), "--a")?)?;
                IFSystem::homogeneous_cantor(a)
            }
            "r2" => {
                let j = require(self.j, "--J")?;
                let r = parse_rat(require(self.r.as_deref(), "--r")?)?;
                build_r2(j, r)
            }
            other => Err(Error::InvalidParam(format!(
                "unknown family {other:?}; expected digit-cantor, cantor, or r2"
            ))),
        }
    }
}

#[derive(Args)]
struct AttractorArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Iteration depth m; prints the stage-m set.
    #[arg(long)]
    depth: u32,
    /// Write the set file here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoxdimArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Inclusive depth range a:b.
    #[arg(long)]
    depths: String,
    /// Also write the per-depth counts as CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SumdimArgs {
    /// Left operand: cantorN | cantor:p/q | digits:n:d0,d1,... | r2:J:p/q | point.
    #[arg(long = "K")]
    k: String,
    /// Right operand, same forms as --K.
    #[arg(long = "E")]
    e: String,
    /// Inclusive depth range a:b.
    #[arg(long)]
    depths: String,
    /// Common grid base (default: least common refinement of the operands).
    #[arg(long)]
    base: Option<u32>,
    /// Bound to compare against: auto | none | prop1 | eq2106 | r2 | thm1 |
    /// thm2 | generic | trivial | ca-conjecture. `auto` picks the family
    /// theorem of --K (the two-map bound when E is degenerate).
    #[arg(long, default_value = "auto")]
    bound: String,
    /// Summand count for the thm2 bound.
    #[arg(long)]
    bound_k: Option<u32>,
    /// Coefficient p/q for the generic bound form.
    #[arg(long)]
    gamma: Option<String>,
    /// Dimension floor p/q for the trivial bound form.
    #[arg(long)]
    dim_k: Option<String>,
    /// Dimension of E as p/q, used on the bound's right side (default: the
    /// similarity dimension of the --E family).
    #[arg(long)]
    dim_e: Option<String>,
    /// Slope tolerance subtracted from the bound before comparing.
    #[arg(long, default_value_t = 0.05)]
    tol: f64,
    /// Also write the per-depth counts as CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Exact hexagon tiling decomposition for the integer-translate family.
    R4 {
        #[arg(long = "J")]
        j: u32,
        /// Contraction ratio p/q inside the family window.
        #[arg(long)]
        r: String,
    },
    /// Grid iteration of the difference-set containment for the
    /// integer-translate family, depths 0..=depth.
    R3 {
        #[arg(long = "J")]
        j: u32,
        /// Contraction ratio p/q inside the family window.
        #[arg(long)]
        r: String,
        #[arg(long, default_value_t = 2)]
        depth: u32,
    },
    /// Difference-tuple fullness of a digit set in (Z_n)^k.
    Eq42 {
        #[arg(long)]
        n: u64,
        /// Comma-separated digit list, e.g. 0,1.
        #[arg(long = "A", value_name = "DIGITS")]
        digits: String,
        #[arg(long)]
        k: u32,
    },
    /// k-fold containment induction for a named family.
    Prop3 {
        /// Family spec: cantorN | cantor:p/q | digits:n:d0,d1,... | r2:J:p/q.
        #[arg(long)]
        family: String,
        #[arg(long)]
        k: u32,
        /// Check stages 0..=depth.
        #[arg(long)]
        depth: u32,
    },
    /// Digit-recursion solver: solves x_0 - x_l = delta_l + y_l exactly and
    /// prints the digit solution.
    Prop2 {
        #[arg(long)]
        n: u32,
        /// Comma-separated digit list for the attractor.
        #[arg(long = "A", value_name = "DIGITS")]
        digits: String,
        #[arg(long)]
        k: u32,
        /// Target digit rows y_1..y_k, one comma list per flag, most
        /// significant digit first; all rows the same length.
        #[arg(long = "y", required = true)]
        y: Vec<String>,
        /// Also check that every grid point at this depth decomposes.
        #[arg(long)]
        cover_depth: Option<u32>,
    },
    /// Tuple-count inequality for explicit subsets of Z_n (n = 0 for Z).
    Lemma2a {
        #[arg(long)]
        n: u64,
        /// Comma-separated elements of K.
        #[arg(long = "K")]
        k_set: String,
        /// Comma-separated elements of S.
        #[arg(long = "S")]
        s_set: String,
        #[arg(long)]
        k: u32,
    },
    /// Signed-sumset inequality for explicit subsets of Z_n (n = 0 for Z).
    Plunnecke {
        #[arg(long)]
        n: u64,
        #[arg(long = "K")]
        k_set: String,
        #[arg(long = "S")]
        s_set: String,
        /// Sign pattern such as +- or +-+; the first sign must be +.
        #[arg(long)]
        signs: String,
    },
}

#[derive(Subcommand)]
enum SearchCmd {
    /// Random sweep of the five-fold ratio inequality; report-only.
    Conj5 {
        #[arg(long, default_value_t = 2)]
        nmin: u64,
        #[arg(long)]
        nmax: u64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Difference-set measure table for the two-map family; report-only.
    Conj222 {
        /// Contraction ratio p/q, in (0, 1/2).
        #[arg(long)]
        a: String,
        #[arg(long)]
        k: u32,
        /// Inclusive depth range a:b.
        #[arg(long)]
        depths: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Hypothesis { .. } => 2,
                Error::ResourceCap { .. } => 3,
                _ => 2,
            })
        }
    }
}

fn run(cmd: Cmd) -> Result<u8> {
    let caps = caps_from_env()?;
    match cmd {
        Cmd::Attractor(args) => cmd_attractor(args, &caps),
        Cmd::Boxdim(args) => cmd_boxdim(args, &caps),
        Cmd::Sumdim(args) => cmd_sumdim(args, &caps),
        Cmd::Verify(which) => cmd_verify(which, &caps),
        Cmd::Search(which) => cmd_search(which, &caps),
    }
}

fn cmd_attractor(args: AttractorArgs, caps: &Caps) -> Result<u8> {
    let sys = args.family.build()?;
    if sys.d() != 1 {
        return Err(Error::InvalidParam("attractor output is 1-D".into()));
    }
    let km = sys.approximant_intervals(None, args.depth, caps)?;
    let text = km.to_text();
    match args.out {
        Some(path) => write_file(&path, &text)?,
        None => emit(&text),
    }
    Ok(0)
}

fn cmd_boxdim(args: BoxdimArgs, caps: &Caps) -> Result<u8> {
    let sys = args.family.build()?;
    let op = SumOperand::Ifs(sys.clone());
    let base = natural_base(&sys)?;
    let depths = parse_depths(&args.depths)?;
    let mut samples = Vec::new();
    for m in depths {
        let km = sys.approximant_intervals(None, m, caps)?;
        samples.push((m, box_count_intervals(&km, base, m)?));
    }
    let est = estimate_dim(base, &samples)?;
    let out = json!({
        "schema": "sumdim.boxdim.v1",
        "family": op.describe(),
        "base": base,
        "samples": samples.iter().map(|&(m, n)| json!([m, n.to_string()])).collect::<Vec<_>>(),
        "slope": est.slope,
        "intercept": est.intercept,
        "residual": est.residual,
        "step_slopes": est.step_slopes,
    });
    if let Some(path) = &args.csv {
        let mut csv = String::from("# schema: sumdim.boxdim.csv.v1\ndepth,count\n");
        for (m, n) in &samples {
            csv.push_str(&format!("{m},{n}\n"));
        }
        write_file(path, &csv)?;
    }
    emit_line(&pretty(&out));
    Ok(0)
}

fn cmd_sumdim(args: SumdimArgs, caps: &Caps) -> Result<u8> {
    let k_op = parse_operand(&args.k)?;
    let e_op = parse_operand(&args.e)?;
    let depths = parse_depths(&args.depths)?;
    let dim_e = match &args.dim_e {
        Some(s) => rat_to_f64(&parse_rat(s)?)?,
        None => similarity_dim(&e_op)?,
    };
    let bound = chosen_bound(&args, &k_op, dim_e, caps)?;
    let exp = run_sum_experiment(
        &k_op,
        &e_op,
        depths,
        args.base,
        bound.as_ref(),
        Some(dim_e),
        args.tol,
        caps,
    )?;
    let mut out: Value = serde_json::from_str(&exp.to_json())
        .map_err(|e| Error::Parse(format!("report serialization: {e}")))?;
    out["schema"] = json!("sumdim.sumexp.v1");
    if let Some(path) = &args.csv {
        let csv = format!("# schema: sumdim.sumexp.csv.v1\n{}", exp.to_csv());
        write_file(path, &csv)?;
    }
    emit_line(&pretty(&out));
    Ok(match &exp.bound {
        Some(check) if !check.pass => 1,
        _ => 0,
    })
}

fn cmd_verify(which: VerifyCmd, caps: &Caps) -> Result<u8> {
    match which {
        VerifyCmd::R4 { j, r } => {
            let report = r4_tiling_check(j, &parse_rat(&r)?, caps)?;
            emit_line(&report.to_json());
            Ok(u8::from(!report.pass))
        }
        VerifyCmd::R3 { j, r, depth } => {
            let report = r3_verify(j, &parse_rat(&r)?, depth, caps)?;
            emit_line(&report.to_json());
            Ok(u8::from(!report.pass))
        }
        VerifyCmd::Eq42 { n, digits, k } => {
            let digits = parse_i64_list(&digits)?;
            let rep = eq42_holds(n, &digits, k, caps)?;
            let out = json!({
                "schema": "sumdim.eq42.v1",
                "n": rep.n,
                "k": rep.k,
                "count_precondition": rep.count_precondition,
                "tuple_count": rep.tuple_count.to_string(),
                "full_count": rep.full_count.to_string(),
                "holds": rep.holds,
                "witness": rep.witness,
                "verdict": verdict(rep.holds),
            });
            emit_line(&pretty(&out));
            Ok(u8::from(!rep.holds))
        }
        VerifyCmd::Prop3 { family, k, depth } => {
            let sys = parse_system(&family)?;
            let report = prop3_verify(&sys, k, depth, caps)?;
            emit_line(&report.to_json());
            Ok(u8::from(!report.pass))
        }
        VerifyCmd::Prop2 {
            n,
            digits,
            k,
            y,
            cover_depth,
        } => {
            let digits = parse_u32_list(&digits)?;
            let rows: Vec<Vec<u32>> = y.iter().map(|s| parse_u32_list(s)).collect::<Result<_>>()?;
            if rows.len() != k as usize {
                return Err(Error::InvalidParam(format!(
                    "expected {k} target rows (--y), got {}",
                    rows.len()
                )));
            }
            let m = rows.first().map_or(0, Vec::len);
            let sol = prop2_solve(n, &digits, k, &rows, m, caps)?;
            let sol_value: Value = serde_json::from_str(&sol.to_json())
                .map_err(|e| Error::Parse(format!("solution serialization: {e}")))?;
            let cover = match cover_depth {
                Some(d) => Some(prop2_cover_check(n, &digits, k, d, caps)?),
                None => None,
            };
            let pass = cover.unwrap_or(true);
            let out = json!({
                "schema": "sumdim.prop2.v1",
                "solution": sol_value,
                "cover_depth": cover_depth,
                "cover_full": cover,
                "verdict": verdict(pass),
            });
            emit_line(&pretty(&out));
            Ok(u8::from(!pass))
        }
        VerifyCmd::Lemma2a { n, k_set, s_set, k } => {
            let kv = GroupSubset::from_ints(n, &parse_i64_list(&k_set)?)?;
            let sv = GroupSubset::from_ints(n, &parse_i64_list(&s_set)?)?;
            let rep = check_tuple_inequality(&kv, &sv, k, caps)?;
            print_ineq(&rep);
            Ok(u8::from(!rep.holds))
        }
        VerifyCmd::Plunnecke {
            n,
            k_set,
            s_set,
            signs,
        } => {
            let kv = GroupSubset::from_ints(n, &parse_i64_list(&k_set)?)?;
            let sv = GroupSubset::from_ints(n, &parse_i64_list(&s_set)?)?;
            let rep = check_plunnecke(&kv, &sv, &parse_signs(&signs)?, caps)?;
            print_ineq(&rep);
            Ok(u8::from(!rep.holds))
        }
    }
}

fn print_ineq(rep: &sumdim_core::addcomb::IneqReport) {
    let counts: Vec<Value> = rep
        .counts
        .iter()
        .map(|(name, c)| json!([name, c.to_string()]))
        .collect();
    let out = json!({
        "schema": "sumdim.ineq.v1",
        "counts": counts,
        "power": rep.power,
        "lhs": rep.lhs,
        "rhs": rep.rhs,
        "holds": rep.holds,
        "verdict": verdict(rep.holds),
    });
    emit_line(&pretty(&out));
}

fn cmd_search(which: SearchCmd, caps: &Caps) -> Result<u8> {
    match which {
        SearchCmd::Conj5 {
            nmin,
            nmax,
            trials,
            seed,
        } => {
            let rep = search_conjecture5(nmin, nmax, trials, seed, caps)?;
            emit_line(
                &json!({
                    "schema": "sumdim.conj5.v1",
                    "n_lo": rep.n_lo,
                    "n_hi": rep.n_hi,
                    "trials": rep.trials,
                    "seed": rep.seed,
                })
                .to_string(),
            );
            emit_line(
                &json!({
                    "record": "max_ratio",
                    "ratio_pow5": rep.max_ratio_pow5,
                    "instance": rep.argmax,
                })
                .to_string(),
            );
            for inst in &rep.violations {
                emit_line(&json!({ "record": "violation", "instance": inst }).to_string());
            }
            Ok(0)
        }
        SearchCmd::Conj222 { a, k, depths } => {
            let rep = explore_conj222(&parse_rat(&a)?, k, parse_depths(&depths)?, caps)?;
            emit_line(
                &json!({
                    "schema": "sumdim.conj222.v1",
                    "a": rep.a,
                    "k": rep.k,
                    "base": rep.base,
                })
                .to_string(),
            );
            for row in &rep.rows {
                emit_line(
                    &json!({
                        "record": "row",
                        "depth": row.depth,
                        "grid_depth": row.grid_depth,
                        "covered_cells": row.covered_cells.to_string(),
                        "measure": row.measure,
                    })
                    .to_string(),
                );
            }
            emit_line(&json!({ "record": "summary", "nonincreasing": rep.nonincreasing }).to_string());
            Ok(0)
        }
    }
}

// ---- bound selection ----

/// Default bound for `sumdim --bound auto`: the family theorem of `K`. For a
/// two-map system the digit-chain refinement only bites when the summand has
/// positive dimension, so a degenerate `E` falls back to the two-map bound.
fn auto_bound(k_op: &SumOperand, dim_e: f64, caps: &Caps) -> Option<DimBound> {
    let SumOperand::Ifs(sys) = k_op else {
        return None;
    };
    match sys.label() {
        FamilyLabel::HomogeneousCantor { a } => {
            if dim_e > 0.0 {
                if let Some(n) = unit_fraction_base(a) {
                    let spec = BoundSpec::Eq2106 {
                        n,
                        digits: vec![0, n - 1],
                    };
                    if let Ok(b) = theorem_bound(&spec, caps) {
                        return Some(b);
                    }
                }
            }
            theorem_bound(&BoundSpec::Prop1 { a: a.clone() }, caps).ok()
        }
        FamilyLabel::DigitCantor { n, digits } => {
            let eq = BoundSpec::Eq2106 {
                n: *n,
                digits: digits.clone(),
            };
            theorem_bound(&eq, caps)
                .or_else(|_| {
                    theorem_bound(
                        &BoundSpec::Thm2 {
                            n: *n,
                            digits: digits.clone(),
                            k: 1,
                        },
                        caps,
                    )
                })
                .ok()
        }
        FamilyLabel::R2Family { j, r } => theorem_bound(
            &BoundSpec::R2 {
                j: *j,
                r: r.clone(),
            },
            caps,
        )
        .ok(),
        FamilyLabel::Generic => None,
    }
}

fn chosen_bound(
    args: &SumdimArgs,
    k_op: &SumOperand,
    dim_e: f64,
    caps: &Caps,
) -> Result<Option<DimBound>> {
    let ifs = || -> Result<&IFSystem> {
        match k_op {
            SumOperand::Ifs(sys) => Ok(sys),
            SumOperand::Fixed(_) => Err(Error::InvalidParam(
                "this bound needs --K to be a family".into(),
            )),
        }
    };
    let homogeneous_a = || -> Result<Rat> {
        match ifs()?.label() {
            FamilyLabel::HomogeneousCantor { a } => Ok(a.clone()),
            _ => Err(Error::InvalidParam(
                "this bound needs --K to be a two-map cantor family".into(),
            )),
        }
    };
    let digit_params = || -> Result<(u32, Vec<u32>)> {
        match ifs()?.label() {
            FamilyLabel::DigitCantor { n, digits } => Ok((*n, digits.clone())),
            FamilyLabel::HomogeneousCantor { a } => unit_fraction_base(a)
                .map(|n| (n, vec![0, n - 1]))
                .ok_or_else(|| {
                    Error::InvalidParam("two-map family has no digit representation".into())
                }),
            _ => Err(Error::InvalidParam(
                "this bound needs --K to be a digit family".into(),
            )),
        }
    };
    let spec = match args.bound.as_str() {
        "auto" => return Ok(auto_bound(k_op, dim_e, caps)),
        "none" => return Ok(None),
        "prop1" => BoundSpec::Prop1 { a: homogeneous_a()? },
        "ca-conjecture" => BoundSpec::CaConjecture { a: homogeneous_a()? },
        "eq2106" => {
            let (n, digits) = digit_params()?;
            BoundSpec::Eq2106 { n, digits }
        }
        "thm2" => {
            let (n, digits) = digit_params()?;
            BoundSpec::Thm2 {
                n,
                digits,
                k: args.bound_k.unwrap_or(1),
            }
        }
        "r2" => match ifs()?.label() {
            FamilyLabel::R2Family { j, r } => BoundSpec::R2 {
                j: *j,
                r: r.clone(),
            },
            _ => {
                return Err(Error::InvalidParam(
                    "this bound needs --K to be an r2 family".into(),
                ))
            }
        },
        "thm1" => BoundSpec::Thm1 {
            d: 1,
            r: ifs()?.ratio().clone(),
        },
        "generic" => BoundSpec::GenericConc {
            d: 1,
            gamma: parse_rat(require(args.gamma.as_deref(), "--gamma")?)?,
        },
        "trivial" => BoundSpec::TrivialEq1 {
            d: 1,
            dim_k: parse_rat(require(args.dim_k.as_deref(), "--dim-k")?)?,
        },
        other => {
            return Err(Error::InvalidParam(format!(
                "unknown bound {other:?}; expected auto, none, prop1, eq2106, r2, \
                 thm1, thm2, generic, trivial, or ca-conjecture"
            )))
        }
    };
    theorem_bound(&spec, caps).map(Some)
}

// ---- operand and argument parsing ----

fn build_r2(j: u32, r: Rat) -> Result<IFSystem> {
    if !check_r2_hypotheses(j, &r) {
        return Err(Error::hypothesis(
            "ratio_window",
            format!(
                "family x -> rx + j needs J >= 3 and 2/(3J) <= r < 1/(J+1); \
                 got J={j}, r={r}"
            ),
        ));
    }
    IFSystem::r2_family(j, r)
}

fn parse_operand(spec: &str) -> Result<SumOperand> {
    if spec == "point" {
        return Ok(SumOperand::Fixed(IntervalUnion::point(rat_int(0))));
    }
    parse_system(spec).map(SumOperand::Ifs)
}

fn parse_system(spec: &str) -> Result<IFSystem> {
    if let Some(rest) = spec.strip_prefix("cantor") {
        if let Some(a) = rest.strip_prefix(':') {
            return IFSystem::homogeneous_cantor(parse_rat(a)?);
        }
        let n: i64 = rest
            .parse()
            .map_err(|_| Error::Parse(format!("bad family spec {spec:?}")))?;
        return IFSystem::homogeneous_cantor(rat(1, n));
    }
    if let Some(rest) = spec.strip_prefix("digits:") {
        let (n, digits) = rest
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("bad family spec {spec:?}")))?;
        let n: u32 = n
            .parse()
            .map_err(|_| Error::Parse(format!("bad base in {spec:?}")))?;
        return IFSystem::digit_cantor(n, &parse_u32_list(digits)?);
    }
    if let Some(rest) = spec.strip_prefix("r2:") {
        let (j, r) = rest
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("bad family spec {spec:?}")))?;
        let j: u32 = j
            .parse()
            .map_err(|_| Error::Parse(format!("bad J in {spec:?}")))?;
        return build_r2(j, parse_rat(r)?);
    }
    Err(Error::Parse(format!(
        "unknown family spec {spec:?}; expected cantorN, cantor:p/q, \
         digits:n:d0,d1,..., r2:J:p/q, or point"
    )))
}

fn parse_depths(s: &str) -> Result<RangeInclusive<u32>> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("depth range {s:?} is not a:b")))?;
    let a: u32 = a
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad depth {a:?}")))?;
    let b: u32 = b
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad depth {b:?}")))?;
    if a > b {
        return Err(Error::InvalidParam(format!("empty depth range {s:?}")));
    }
    Ok(a..=b)
}

fn parse_u32_list(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad entry {t:?} in list {s:?}")))
        })
        .collect()
}

fn parse_i64_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad entry {t:?} in list {s:?}")))
        })
        .collect()
}

fn require<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidParam(format!("{flag} is required for this family")))
}

/// `n` when `a == 1/n`; the two-map family has the digit representation
/// `{0, n-1}` in base `n` exactly in that case.
fn unit_fraction_base(a: &Rat) -> Option<u32> {
    if *a.numer() != Int::from(1) {
        return None;
    }
    u32::try_from(a.denom().clone()).ok()
}

/// Grid base matched to the family's arithmetic: the ratio's denominator.
fn natural_base(sys: &IFSystem) -> Result<u32> {
    let den = sys.ratio().denom().clone();
    u32::try_from(den).map_err(|_| Error::InvalidParam("ratio denominator too large".into()))
}

fn rat_to_f64(x: &Rat) -> Result<f64> {
    x.to_f64()
        .ok_or_else(|| Error::InvalidParam(format!("{x} does not fit a float")))
}

/// Similarity dimension of a named operand, for the bound's right side:
/// `ln(maps) / ln(1/ratio)` for a family, 0 for points, 1 for intervals.
fn similarity_dim(op: &SumOperand) -> Result<f64> {
    match op {
        SumOperand::Ifs(sys) => {
            let r = rat_to_f64(sys.ratio())?;
            Ok((sys.maps_count() as f64).ln() / (1.0 / r).ln())
        }
        SumOperand::Fixed(iv) => {
            let degenerate = iv.intervals().iter().all(|(lo, hi)| lo == hi);
            Ok(if degenerate { 0.0 } else { 1.0 })
        }
    }
}

fn caps_from_env() -> Result<Caps> {
    let mut caps = Caps::default();
    if let Some(v) = env_u128("SUMDIM_MAX_INTERVALS")? {
        caps.max_intervals = to_usize(v)?;
    }
    if let Some(v) = env_u128("SUMDIM_MAX_CELLS")? {
        caps.max_cells = to_usize(v)?;
    }
    if let Some(v) = env_u128("SUMDIM_MAX_GRID_SIDE")? {
        caps.max_grid_side = to_usize(v)?;
    }
    if let Some(v) = env_u128("SUMDIM_MAX_GRID_BITS")? {
        caps.max_grid_bits = v;
    }
    if let Some(v) = env_u128("SUMDIM_MAX_ENUM")? {
        caps.max_enum = v;
    }
    Ok(caps)
}

fn env_u128(name: &str) -> Result<Option<u128>> {
    match std::env::var(name) {
        Ok(v) => v
            .trim()
            .parse::<u128>()
            .map(Some)
            .map_err(|_| Error::Parse(format!("{name}={v:?} is not a nonnegative integer"))),
        Err(_) => Ok(None),
    }
}

fn to_usize(v: u128) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::InvalidParam(format!("cap {v} exceeds usize")))
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    fs::write(path, text)
        .map_err(|e| Error::InvalidParam(format!("cannot write {}: {e}", path.display())))
}

/// Stdout writer that tolerates the consumer closing the pipe early (e.g.
/// `| head`): the command still finishes its side effects and returns its
/// verdict instead of aborting mid-report.
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn emit_line(text: &str) {
    emit(text);
    emit("\n");
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("value serializes")
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}
