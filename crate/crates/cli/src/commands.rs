//! The subcommands. Each writes its CSV, SVG or JSON output into the output
//! directory and returns whether all checks passed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use heatkernel::lrb::{uniform_grid, Measure};
use heatkernel::pricing::{caplet_price_closed, mc_price, swaption_price_closed, Instrument};
use heatkernel::scenario::{run_scenario, ScenarioConfig};
use heatkernel::verify::{run_criterion, Report, VerifyOptions, CRITERIA};

use crate::config::{FileConfig, ModelSection};
use crate::plot::{read_scenario_csv, render_svg};
use crate::CliError;

/// Settings shared by every command after flags and file are merged.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: Option<FileConfig>,
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub out: PathBuf,
    pub tolerances: Vec<(String, f64)>,
}

impl Context {
    fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .or_else(|| self.config.as_ref().and_then(|c| c.seed))
            .ok_or_else(|| CliError::Config("seed: required for stochastic commands (--seed or `seed` in the config)".into()))
    }

    fn paths(&self, default: usize) -> usize {
        self.paths.or_else(|| self.config.as_ref().and_then(|c| c.paths)).unwrap_or(default)
    }

    fn model(&self) -> Result<&ModelSection, CliError> {
        self.config
            .as_ref()
            .and_then(|c| c.model.as_ref())
            .ok_or_else(|| CliError::Config("model: section required (pass --config)".into()))
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>, CliError> {
        std::fs::create_dir_all(&self.out)?;
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Initial curve `P0T`, coefficient `b(T)` and forward rate on an even grid
/// of maturities.
pub fn curve(ctx: &Context) -> Result<PathBuf, CliError> {
    let model = ctx.model()?;
    let bond = model.bond()?;
    let points = ctx.config.as_ref().and_then(|c| c.curve.as_ref()).map_or(50, |c| c.points);
    if points == 0 {
        return Err(CliError::Config("curve.points: must be at least 1".into()));
    }
    let b = &bond.terms()[0].factors[0].b;
    let zero = [0.0];
    let mut w = ctx.create("curve.csv")?;
    writeln!(w, "T,P0T,b,f0T")?;
    for k in 0..points {
        let tm = model.horizon * k as f64 / points as f64;
        let f = bond.forward_rate(0.0, tm, &zero)?;
        writeln!(w, "{},{},{},{}", num(tm), num(bond.curve().value(tm)), num(b.value(tm)), num(f))?;
    }
    w.flush()?;
    Ok(ctx.out.join("curve.csv"))
}

/// Closed-form and Monte Carlo prices of the configured instruments.
pub fn price(ctx: &Context) -> Result<PathBuf, CliError> {
    let model = ctx.model()?;
    let section = ctx
        .config
        .as_ref()
        .and_then(|c| c.price.as_ref())
        .ok_or_else(|| CliError::Config("price: section required".into()))?;
    let seed = ctx.seed()?;
    let paths = ctx.paths(100_000);
    let bond = model.bond()?;
    let (curve, b) = (bond.curve(), &bond.terms()[0].factors[0].b);
    let kind = model.closed_form_kind();
    let u = model.horizon;
    let mut w = ctx.create("prices.csv")?;
    writeln!(w, "instrument,expiry,maturity,strike,closed_form,mc,mc_se")?;
    for (i, ins) in section.instruments(model)?.iter().enumerate() {
        let est = mc_price(ins, &bond, paths, seed.wrapping_add(i as u64))?;
        let (name, expiry, maturity, strike, closed) = match ins {
            Instrument::Bond { maturity } => ("bond", 0.0, *maturity, 0.0, curve.value(*maturity)),
            Instrument::Caplet { expiry, maturity, strike } => (
                "caplet",
                *expiry,
                *maturity,
                *strike,
                caplet_price_closed(kind, *strike, *expiry, *maturity, u, curve.as_ref(), b.as_ref())?,
            ),
            Instrument::Swaption { expiry, resets, strike } => (
                "swaption",
                *expiry,
                *resets.last().expect("validated schedule"),
                *strike,
                swaption_price_closed(kind, *strike, *expiry, resets, u, curve.as_ref(), b.as_ref())?,
            ),
            Instrument::AssetClaim { .. } => unreachable!("not configurable"),
        };
        writeln!(w, "{name},{},{},{},{},{},{}", num(expiry), num(maturity), num(strike), num(closed), num(est.mean), num(est.se))?;
        println!("{name:<9} t = {expiry:<6} T = {maturity:<6} closed {closed:.8e}  mc {:.8e} ± {:.1e}", est.mean, est.se);
    }
    w.flush()?;
    Ok(ctx.out.join("prices.csv"))
}

/// Real-world paths of the information process with the bond price and
/// short rate along each.
pub fn simulate(ctx: &Context) -> Result<PathBuf, CliError> {
    let model = ctx.model()?;
    let section = ctx
        .config
        .as_ref()
        .and_then(|c| c.simulate.as_ref())
        .ok_or_else(|| CliError::Config("simulate: section required".into()))?;
    let seed = ctx.seed()?;
    let paths = ctx.paths(10);
    let bond = model.bond()?;
    let grid = uniform_grid(section.maturity, section.steps);
    let big = section.maturity;
    let rows = bond.bridge().map_paths(Measure::P, &grid, seed, paths, |p| {
        (0..grid.len())
            .map(|k| {
                let s = p.state(k);
                Ok((s[0], bond.bond_price(grid[k], big, s)?, bond.short_rate(grid[k], s)?))
            })
            .collect::<heatkernel::Result<Vec<_>>>()
    })?;
    let mut w = ctx.create("simulate.csv")?;
    writeln!(w, "path,t,L,P,r")?;
    for (i, row) in rows.into_iter().enumerate() {
        for (k, (l, p, r)) in row?.into_iter().enumerate() {
            writeln!(w, "{i},{},{},{},{}", num(grid[k]), num(l), num(p), num(r))?;
        }
    }
    w.flush()?;
    Ok(ctx.out.join("simulate.csv"))
}

fn scenario_config(ctx: &Context, seed: u64, n_paths: usize) -> Result<ScenarioConfig, CliError> {
    match ctx.config.as_ref().and_then(|c| c.contagion.as_ref()) {
        Some(section) => section.scenario(seed, n_paths),
        None => Ok(ScenarioConfig { seed, n_paths, ..ScenarioConfig::paper_baseline() }),
    }
}

/// Contagion scenario paths; the built-in baseline when the config has no
/// `contagion` section.
pub fn contagion(ctx: &Context) -> Result<PathBuf, CliError> {
    let cfg = scenario_config(ctx, ctx.seed()?, ctx.paths(1))?;
    let run = run_scenario(&cfg)?;
    let mut w = ctx.create("contagion.csv")?;
    run.write_csv(&mut w)?;
    w.flush()?;
    Ok(ctx.out.join("contagion.csv"))
}

/// Runs the acceptance checks, writes `report.json` and prints one line per
/// check. Returns whether all selected checks pass.
pub fn verify(ctx: &Context, criteria: &[usize]) -> Result<bool, CliError> {
    let seed = ctx.seed()?;
    let mut opts = VerifyOptions { seed, ..VerifyOptions::default() };
    if let Some(n) = ctx.paths.or_else(|| ctx.config.as_ref().and_then(|c| c.paths)) {
        opts.paths = n;
        opts.option_paths = 10 * n;
    }
    if let Some(v) = ctx.config.as_ref().and_then(|c| c.verify.as_ref()) {
        opts.break_b_sign = v.break_b_sign;
        for (name, value) in &v.tolerances {
            opts.tol.set(name, *value).map_err(|e| CliError::Config(format!("verify.tolerances: {e}")))?;
        }
    }
    for (name, value) in &ctx.tolerances {
        opts.tol.set(name, *value).map_err(|e| CliError::Config(format!("--tol: {e}")))?;
    }
    opts.scenario = scenario_config(ctx, seed, 8)?;
    let selected: Vec<usize> = if criteria.is_empty() { (1..=CRITERIA.len()).collect() } else { criteria.to_vec() };
    if let Some(c) = selected.iter().find(|c| !(1..=CRITERIA.len()).contains(*c)) {
        return Err(CliError::Config(format!("--criteria: no criterion {c} (1..={})", CRITERIA.len())));
    }
    let mut checks = Vec::new();
    for &c in &selected {
        let part = run_criterion(c, &opts);
        let pass = !part.is_empty() && part.iter().all(|k| k.pass);
        println!("{} criterion {c:>2}: {}", if pass { "PASS" } else { "FAIL" }, CRITERIA[c - 1]);
        for k in &part {
            println!("    {}", k.line());
        }
        checks.extend(part);
    }
    let report = Report { seed, checks };
    let mut w = ctx.create("report.json")?;
    serde_json::to_writer_pretty(&mut w, &report).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(report.all_pass())
}

/// One SVG per quantity of a scenario CSV: `yield.svg`, `spread.svg` and
/// `price.svg`, one series per country.
pub fn plot(ctx: &Context, csv: &Path, path_id: u64) -> Result<Vec<PathBuf>, CliError> {
    let file = File::open(csv).map_err(|e| CliError::Input(format!("{}: {e}", csv.display())))?;
    let cols = read_scenario_csv(file, path_id)?;
    let charts = [
        ("yield", "Yield of the bond", "y"),
        ("spread", "Yield spread against the base country", "s"),
        ("price", "Bond price", "P"),
    ];
    // render everything before writing anything
    let rendered = charts
        .iter()
        .map(|(key, title, axis)| Ok((*key, render_svg(title, axis, &cols[key])?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut written = Vec::new();
    for (key, svg) in rendered {
        let name = format!("{key}.svg");
        let mut w = ctx.create(&name)?;
        w.write_all(svg.as_bytes())?;
        w.flush()?;
        written.push(ctx.out.join(name));
    }
    Ok(written)
}
