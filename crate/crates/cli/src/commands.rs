use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use tailscore::backtest::{calibration_test, comparative_test, ForecastSeries};
use tailscore::config::FamilyConfig;
use tailscore::estimation::{m_estimate, z_estimate};
use tailscore::grid::Grid;
use tailscore::io::read_column;
use tailscore::risk::{es, expectile, rvar, tail_risk, GeneratorSpec, TailPairSpec};
use tailscore::verification::suites::run_suite;
use tailscore::{DiscreteDistribution, Level};

use crate::{
    BacktestArgs, EvalArgs, FamilyArgs, FitArgs, Levels, ScoreArgs, VerifyArgs, EXIT_VERIFY,
};

const SCHEMA_VERSION: u32 = 1;

fn single_input(inputs: &[std::path::PathBuf]) -> Result<&Path> {
    match inputs {
        [one] => Ok(one),
        _ => bail!("expected exactly one --input, got {}", inputs.len()),
    }
}

fn write_json<T: Serialize>(value: &T, output: Option<&Path>) -> Result<()> {
    let s = serde_json::to_string_pretty(value)?;
    match output {
        Some(path) => {
            std::fs::write(path, s + "\n").with_context(|| format!("writing {}", path.display()))?
        }
        None => println!("{s}"),
    }
    Ok(())
}

fn level(v: Option<f64>) -> Result<Option<Level>> {
    Ok(v.map(Level::new).transpose()?)
}

/// Builds the family config from `--config` or from the flags.
pub fn family_config(f: &FamilyArgs, l: &Levels) -> Result<FamilyConfig> {
    if let Some(path) = &f.config {
        return Ok(FamilyConfig::from_path(path)?);
    }
    let Some(name) = &f.family else {
        bail!("no family given: use --family or --config");
    };
    let mut c = FamilyConfig::new(name.as_str());
    (c.p, c.q, c.tau) = (l.level_p, l.level_q, l.tau);
    if let Some(gen) = &f.generator {
        let mut inner = FamilyConfig::new(gen.as_str());
        inner.tau = l.tau;
        inner.phi = f.phi.clone();
        inner.repair = f.repair;
        if matches!(name.as_str(), "lift" | "left_tail") {
            inner.g = f.g.clone();
        } else {
            c.g = f.g.clone();
        }
        c.generator = Some(Box::new(inner));
    } else {
        c.phi = f.phi.clone();
        c.g = f.g.clone();
        c.repair = f.repair;
    }
    Ok(c)
}

#[derive(Serialize)]
struct EvalReport {
    schema_version: u32,
    n: usize,
    p: Option<f64>,
    q: Option<f64>,
    tau: Option<f64>,
    mean: f64,
    var_minus: Option<f64>,
    var_plus: Option<f64>,
    es: Option<f64>,
    rvar: Option<f64>,
    expectile: Option<f64>,
    /// The τ-expectile of the p-tail.
    tail_risk: Option<f64>,
}

pub fn eval(a: &EvalArgs) -> Result<u8> {
    let path = single_input(&a.input)?;
    let ys = read_column(path, "y")?;
    if ys.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    let f = DiscreteDistribution::empirical(&ys)?;
    let (p, q, tau) = (
        level(a.levels.level_p)?,
        level(a.levels.level_q)?,
        level(a.levels.tau)?,
    );
    let rv = match (p, q) {
        (Some(p), Some(q)) => Some(rvar(&f, p, q)?),
        (None, Some(_)) => bail!("--level-q needs --level-p"),
        _ => None,
    };
    let tail = match (p, tau) {
        (Some(p), Some(t)) => Some(tail_risk(
            &TailPairSpec::right(GeneratorSpec::Expectile(t), p),
            &f,
        )?),
        _ => None,
    };
    let report = EvalReport {
        schema_version: SCHEMA_VERSION,
        n: ys.len(),
        p: a.levels.level_p,
        q: a.levels.level_q,
        tau: a.levels.tau,
        mean: f.mean(),
        var_minus: p.map(|p| f.var_minus(p)),
        var_plus: p.map(|p| f.var_plus(p)),
        es: p.map(|p| es(&f, p)),
        rvar: rv,
        expectile: tau.map(|t| expectile(&f, t)),
        tail_risk: tail,
    };
    write_json(&report, a.output.as_deref())?;
    Ok(0)
}

#[derive(Serialize)]
struct ScoreSummary {
    schema_version: u32,
    construction: String,
    n: usize,
    mean_score: f64,
}

pub fn score(a: &ScoreArgs) -> Result<u8> {
    let path = single_input(&a.input)?;
    let cfg = family_config(&a.family, &a.levels)?;
    let s = cfg.score_spec()?;
    let series = ForecastSeries::from_csv(path, s.arity())?;
    let scores: Vec<f64> = series
        .records()
        .iter()
        .map(|r| s.eval(&r.forecast, r.y))
        .collect();
    let mean_score = scores.iter().sum::<f64>() / scores.len() as f64;

    // Echo the input rows with the score appended.
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut headers = rdr.headers()?.clone();
    headers.push_field("score");
    let sink: Box<dyn Write> = match &a.output {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut wtr = csv::Writer::from_writer(sink);
    wtr.write_record(&headers)?;
    for (rec, sc) in rdr.records().zip(&scores) {
        let mut rec = rec?;
        rec.push_field(&sc.to_string());
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    drop(wtr);

    let summary = ScoreSummary {
        schema_version: SCHEMA_VERSION,
        construction: s.meta().construction.clone(),
        n: scores.len(),
        mean_score,
    };
    if a.output.is_some() {
        write_json(&summary, None)?;
    } else {
        eprintln!("{}", serde_json::to_string(&summary)?);
    }
    Ok(0)
}

pub fn fit(a: &FitArgs) -> Result<u8> {
    let path = single_input(&a.input)?;
    let ys = read_column(path, "y")?;
    let cfg = family_config(&a.family, &a.levels)?;
    let report = match a.method.as_str() {
        "z" => z_estimate(&cfg.id_spec()?, &ys, None, a.tol)?,
        _ => {
            let s = cfg.score_spec()?;
            let axes = match a.grid.len() {
                0 => bail!("m-estimation needs --grid lo:hi:step"),
                1 => vec![a.grid[0]; s.arity()],
                k if k == s.arity() => a.grid.clone(),
                k => bail!(
                    "{k} grid axes given for a forecast of dimension {}",
                    s.arity()
                ),
            };
            m_estimate(&s, &ys, &Grid::new(axes)?)?
        }
    };
    write_json(&report, a.output.as_deref())?;
    Ok(0)
}

pub fn backtest(a: &BacktestArgs) -> Result<u8> {
    let cfg = family_config(&a.family, &a.levels)?;
    let report = match a.input.as_slice() {
        [one] => {
            let v = cfg.id_spec()?;
            calibration_test(&v, &ForecastSeries::from_csv(one, v.arity())?, a.lag)?
        }
        [first, second] => {
            let s = cfg.score_spec()?;
            let fa = ForecastSeries::from_csv(first, s.arity())?;
            let fb = ForecastSeries::from_csv(second, s.arity())?;
            comparative_test(&s, &fa, &fb, a.lag)?
        }
        _ => bail!("backtest takes one --input (calibration) or two (comparison)"),
    };
    write_json(&report, a.output.as_deref())?;
    Ok(0)
}

pub fn verify(a: &VerifyArgs) -> Result<u8> {
    let report = run_suite(&a.suite, a.seed)?;
    write_json(&report, a.output.as_deref())?;
    Ok(if report.pass { 0 } else { EXIT_VERIFY })
}
