mod args;
mod load;

use std::fs;
use std::process::ExitCode;

use clap::Parser;
use flagcalc::algebra::FlagAlgebra;
use flagcalc::flags::{density_p, empirical_density, joint_density_p2, Density, DensityMode};
use flagcalc::kernel::{
    condition_ensemble, default_max_check, exact_hom, exact_hom_flag, mc_hom, restrict_root, sample_model,
    validate_kernel, Restricted, SampleSeed,
};
use flagcalc::model::{enumerate_models_with, set_size_limit};
use flagcalc::par::Exec;
use flagcalc::rational::format as fmt_rational;
use flagcalc::selftest::{run_selftest, Scale, SelftestConfig};
use flagcalc::verify::{
    check_cauchy_schwarz, check_iterated_expectation, check_multiplicativity, check_product_asymptotics,
    AsymptoticConfig, CheckReport, Verifier,
};
use flagcalc::{io, Error, Result};
use serde_json::{json, Value};

use args::{AlgebraCommand, Cli, Command, FlagsCommand, Global, MeasureCommand, ScaleArg, VerifyCommand};

/// Exit status of a successful run.
enum Status {
    Ok,
    Failed,
}

struct Ctx<'a> {
    global: &'a Global,
    exec: Exec,
}

impl Ctx<'_> {
    fn emit(&self, v: &Value) -> Result<()> {
        let text = io::render(v);
        match &self.global.out {
            Some(path) => Ok(fs::write(path, text)?),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn report(&self, r: &CheckReport) -> Result<Status> {
        self.emit(&r.to_json())?;
        if !r.passed() {
            if let Some(c) = &r.counterexample {
                eprintln!("{} failed; counterexample: {}", r.check, c.to_json());
            }
        }
        Ok(if r.passed() { Status::Ok } else { Status::Failed })
    }

    fn algebra(&self, theory: std::sync::Arc<flagcalc::model::Theory>) -> FlagAlgebra {
        FlagAlgebra::with_exec(theory, self.exec)
    }
}

fn element_theory(arg: Option<&str>, path: &std::path::Path) -> Result<std::sync::Arc<flagcalc::model::Theory>> {
    let v = load::read_json(path)?;
    load::resolve(arg, load::recorded_theory(&v).as_deref())
}

fn run(cli: &Cli) -> Result<Status> {
    let global = &cli.global;
    if let Some(n) = global.max_size {
        set_size_limit(n);
    }
    let exec = if global.sequential { Exec::Sequential } else { Exec::default() };
    let ctx = Ctx { global, exec };
    match &cli.command {
        Command::Models(a) => {
            let theory = load::resolve(a.theory.theory.as_deref(), None)?;
            let models = enumerate_models_with(&theory, a.size, exec)?;
            ctx.emit(&json!({
                "theory": theory.name(),
                "n": a.size,
                "count": models.len(),
                "models": models.iter().map(|m| io::model_to_json(&m.model)).collect::<Vec<_>>(),
            }))?;
        }
        Command::Flags(cmd) => flags(&ctx, cmd)?,
        Command::Algebra(cmd) => algebra(&ctx, cmd)?,
        Command::Measure(cmd) => return measure(&ctx, cmd),
        Command::Verify(cmd) => return verify(&ctx, cmd),
        Command::Selftest(a) => {
            let scale = match a.scale {
                ScaleArg::Small => Scale::Small,
                ScaleArg::Full => Scale::Full,
            };
            let report = run_selftest(&SelftestConfig { scale, seed: global.seed, exec });
            for c in &report.criteria {
                eprintln!("{c}");
            }
            ctx.emit(&report.to_json())?;
            return Ok(if report.passed() { Status::Ok } else { Status::Failed });
        }
    }
    Ok(Status::Ok)
}

fn flags(ctx: &Ctx<'_>, cmd: &FlagsCommand) -> Result<()> {
    match cmd {
        FlagsCommand::Enumerate { theory, level, sigma } => {
            let theory = load::resolve(theory.theory.as_deref(), None)?;
            let sigma = load::sigma(&theory, sigma.as_deref())?;
            let basis = flagcalc::flags::enumerate_flags_with(&theory, &sigma, *level, ctx.exec)?;
            ctx.emit(&json!({
                "theory": theory.name(),
                "level": level,
                "sigma": io::model_to_json(sigma.model()),
                "count": basis.len(),
                "flags": basis.flags().iter().map(io::flag_to_json).collect::<Vec<_>>(),
            }))
        }
        FlagsCommand::Density { theory, small, big } => {
            let theory = load::resolve(theory.theory.as_deref(), None)?;
            let v = density_p(&load::flag(&theory, small)?, &load::flag(&theory, big)?)?;
            ctx.emit(&json!(fmt_rational(&v)))
        }
        FlagsCommand::Joint { theory, f1, f2, big } => {
            let theory = load::resolve(theory.theory.as_deref(), None)?;
            let v = joint_density_p2(&load::flag(&theory, f1)?, &load::flag(&theory, f2)?, &load::flag(&theory, big)?)?;
            ctx.emit(&json!(fmt_rational(&v)))
        }
        FlagsCommand::Empirical { theory, flag, host, trials } => {
            let theory = load::resolve(theory.theory.as_deref(), None)?;
            let flag = load::flag(&theory, flag)?;
            let host = load::model(&theory, host)?;
            let mode = match trials {
                Some(t) => DensityMode::MonteCarlo { trials: *t, seed: ctx.global.seed },
                None => DensityMode::Exact,
            };
            match empirical_density(&flag, &host, mode)? {
                Density::Exact(r) => ctx.emit(&json!(fmt_rational(&r))),
                Density::Estimate(e) => ctx.emit(&json!({"mean": e.mean, "stderr": e.stderr, "trials": e.trials})),
            }
        }
    }
}

fn algebra(ctx: &Ctx<'_>, cmd: &AlgebraCommand) -> Result<()> {
    match cmd {
        AlgebraCommand::Lift { theory, element, level } => {
            let alg = ctx.algebra(element_theory(theory.theory.as_deref(), element)?);
            let a = load::element(&alg, element)?;
            ctx.emit(&io::element_to_json(alg.theory(), &alg.lift(&a, *level)?))
        }
        AlgebraCommand::Mul { theory, a, b } => {
            let alg = ctx.algebra(element_theory(theory.theory.as_deref(), a)?);
            let x = load::element(&alg, a)?;
            let y = load::element(&alg, b)?;
            ctx.emit(&io::element_to_json(alg.theory(), &alg.multiply(&x, &y)?))
        }
        AlgebraCommand::Avg { theory, element, root } => {
            let alg = ctx.algebra(element_theory(theory.theory.as_deref(), element)?);
            let a = load::element(&alg, element)?;
            ctx.emit(&io::element_to_json(alg.theory(), &alg.downward(&a, *root)?))
        }
        AlgebraCommand::Iszero { theory, element } => {
            let alg = ctx.algebra(element_theory(theory.theory.as_deref(), element)?);
            let a = load::element(&alg, element)?;
            ctx.emit(&json!(alg.is_zero(&a)))
        }
    }
}

fn measure(ctx: &Ctx<'_>, cmd: &MeasureCommand) -> Result<Status> {
    match cmd {
        MeasureCommand::Eval { theory, kernel, flag, element, root } => {
            let (theory, kernel) = load::kernel(theory.theory.as_deref(), kernel)?;
            let value = match (flag, element) {
                (Some(path), _) => {
                    let f = load::flag(&theory, path)?;
                    exact_hom_flag(&load::rooted(&kernel, &f.sigma(), &root.root_types)?, &f)?
                }
                (None, Some(path)) => {
                    let alg = ctx.algebra(theory.clone());
                    let a = load::element(&alg, path)?;
                    exact_hom(&load::rooted(&kernel, a.sigma(), &root.root_types)?, &a)?
                }
                (None, None) => return Err(Error::Input("pass --flag or --element".into())),
            };
            ctx.emit(&json!(fmt_rational(&value)))?;
        }
        MeasureCommand::Sample { theory, kernel, n, stream } => {
            let (_, kernel) = load::kernel(theory.theory.as_deref(), kernel)?;
            let m = sample_model(&kernel, *n, SampleSeed::new(ctx.global.seed, *stream))?;
            ctx.emit(&io::model_to_json(&m))?;
        }
        MeasureCommand::Mc { theory, kernel, flag, n, trials, root } => {
            let (theory, kernel) = load::kernel(theory.theory.as_deref(), kernel)?;
            let f = load::flag(&theory, flag)?;
            let rk = load::rooted(&kernel, &f.sigma(), &root.root_types)?;
            let e = mc_hom(&rk, &f, *n, *trials, SampleSeed::new(ctx.global.seed, 0), ctx.exec)?;
            ctx.emit(&json!({"mean": e.mean, "stderr": e.stderr, "trials": e.trials}))?;
        }
        MeasureCommand::Ensemble { theory, kernel, sigma } => {
            let (theory, kernel) = load::kernel(theory.theory.as_deref(), kernel)?;
            let sigma = load::sigma(&theory, Some(sigma))?;
            let ens = condition_ensemble(&kernel, &sigma)?;
            ctx.emit(&json!({
                "sigma_probability": fmt_rational(&ens.sigma_probability),
                "members": ens.members.iter().map(|(w, m)| json!({
                    "weight": fmt_rational(w),
                    "root_types": m.root_type_names(),
                    "sigma_probability": fmt_rational(m.sigma_probability()),
                })).collect::<Vec<_>>(),
            }))?;
        }
        MeasureCommand::Restrict { theory, kernel, sigma, root, keep } => {
            let (theory, kernel) = load::kernel(theory.theory.as_deref(), kernel)?;
            let sigma = load::sigma(&theory, Some(sigma))?;
            let rk = load::rooted(&kernel, &sigma, &root.root_types)?;
            let out = match restrict_root(&rk, *keep)? {
                Restricted::Base(b) => json!({"kernel": io::kernel_to_json(&b)}),
                Restricted::Rooted(r) => json!({
                    "kernel": io::kernel_to_json(r.base()),
                    "root_types": r.root_type_names(),
                    "sigma": io::model_to_json(r.sigma().model()),
                }),
            };
            ctx.emit(&out)?;
        }
        MeasureCommand::Validate { theory, kernel, max_check } => {
            let (theory, kernel) = load::kernel(theory.theory.as_deref(), kernel)?;
            let max_check = max_check.unwrap_or_else(|| default_max_check(&theory));
            let report = validate_kernel(&kernel, max_check);
            ctx.emit(&json!({
                "valid": report.is_valid(),
                "max_check": max_check,
                "violations": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            }))?;
            if !report.is_valid() {
                return Ok(Status::Failed);
            }
        }
    }
    Ok(Status::Ok)
}

fn verify(ctx: &Ctx<'_>, cmd: &VerifyCommand) -> Result<Status> {
    let report = match cmd {
        VerifyCommand::ChainRule { theory, sigma, m, level } => {
            let theory = load::resolve(theory.theory.as_deref(), None)?;
            let sigma = load::sigma(&theory, sigma.as_deref())?;
            let v = Verifier::new(ctx.algebra(theory), ctx.global.panel, ctx.global.seed)?;
            v.check_chain_rule(&sigma, *m, *level)?
        }
        VerifyCommand::Mult { theory, kernel, a, b, root } => {
            let (theory, kernel) = load::kernel(theory.theory.as_deref(), kernel)?;
            let alg = ctx.algebra(theory);
            let (x, y) = (load::element(&alg, a)?, load::element(&alg, b)?);
            let rk = load::rooted(&kernel, x.sigma(), &root.root_types)?;
            check_multiplicativity(&alg, &rk, &x, &y)?
        }
        VerifyCommand::Cs { theory, kernel, f } => {
            let (theory, kernel) = load::kernel(theory.theory.as_deref(), kernel)?;
            let alg = ctx.algebra(theory);
            let f = load::element(&alg, f)?;
            check_cauchy_schwarz(&alg, &kernel, &f)?
        }
        VerifyCommand::Iterated { theory, element, k1, k2 } => {
            let alg = ctx.algebra(element_theory(theory.theory.as_deref(), element)?);
            let a = load::element(&alg, element)?;
            check_iterated_expectation(&alg, &a, *k1, *k2)?
        }
        VerifyCommand::Asymptotic { theory, kernel, f1, f2, sizes, trials, constant, root } => {
            let (theory, kernel) = load::kernel(theory.theory.as_deref(), kernel)?;
            let (f1, f2) = (load::flag(&theory, f1)?, load::flag(&theory, f2)?);
            let rk = load::rooted(&kernel, &f1.sigma(), &root.root_types)?;
            let cfg = AsymptoticConfig {
                sizes: sizes.clone(),
                trials: *trials,
                seed: ctx.global.seed,
                constant: *constant,
                ..Default::default()
            };
            check_product_asymptotics(&rk, &f1, &f2, &cfg, ctx.exec)?
        }
        VerifyCommand::Cert { theory, cert } => {
            let v = load::read_json(cert)?;
            let theory = load::resolve(theory.theory.as_deref(), load::recorded_theory(&v).as_deref())?;
            let verifier = Verifier::new(ctx.algebra(theory), ctx.global.panel, ctx.global.seed)?;
            let cert = io::certificate_from_json(verifier.algebra(), &v)?;
            verifier.check_certificate(&cert)?
        }
    };
    ctx.report(&report)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Input(_) | Error::Conditioning(_) | Error::Io(_) | Error::Json(_) => 2,
        Error::Resource(_) | Error::Consistency(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("flagcalc: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
