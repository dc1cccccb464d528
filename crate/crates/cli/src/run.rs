use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qasep::bethe::{bethe_cumulants, solve_open_w, solve_periodic_w, BetheOptions, CircleFunction, WSeries};
use qasep::markov_oracle::cumulants_oracle;
use qasep::matansatz::{steady_state, verify_stationarity};
use qasep::qspecial::ab_from_rates;
use qasep::transfer::boundary::boundary_residuals;
use qasep::transfer::kplus::truncation_ratio_check;
use qasep::transfer::lax::khat_residuals;
use qasep::transfer::rmatrix::{boundary_action_residual, exchange_residuals};
use qasep::transfer::verify::verify_tq_and_fusion;
use qasep::transfer::{
    decay_ratio, markov_from_t2, mu_zero_limit_checks, verify_commutation, verify_decomposition, verify_exchange,
    ReconstructionPoint,
};
use qasep::{Geometry, SystemSpec, C64};

use crate::args::{Check, CumulantArgs, ExportArgs, Format, SteadyArgs, VerifyArgs};
use crate::document::{sig17, CheckResult, CumulantTable, InputEcho, ResultDocument};

/// Largest chain handed to the exact generator by `cumulants`.
pub const ORACLE_MAX_L: usize = 12;
/// Accepted relative difference between the two cumulant columns.
pub const CUMULANT_TOL: f64 = 1e-6;
/// Accepted residual of the generator rebuilt by finite differences.
pub const RECONSTRUCTION_FLOOR: f64 = 1e-5;
/// Levels of the auxiliary pair used by the R-matrix check.
pub const RMATRIX_LEVELS: usize = 24;
/// `μ` values and spectral parameters of the `μ → 0` check.
const LIMIT_MUS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
const LIMIT_YS: [f64; 3] = [0.1, 0.2, 0.3];

pub const STEADY_CSV: &str = "steady_state.csv";
pub const STEADY_JSON: &str = "steady_state.json";
pub const EXPORT_CSV: &str = "w_series.csv";
pub const EXPORT_JSON: &str = "w_series.json";

/// Usage and domain problems, reported with exit status 2.
#[derive(Debug)]
pub struct Failure(pub String);

impl From<qasep::Error> for Failure {
    fn from(e: qasep::Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure(s)
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure(format!("cannot write {}: {e}", path.display()))
}

type Outcome = Result<ResultDocument, Failure>;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn is_open(spec: &SystemSpec) -> bool {
    matches!(spec.geometry, Geometry::Open(_))
}

/// Checks run by `--all` for this geometry.
pub fn applicable(spec: &SystemSpec) -> Vec<Check> {
    use Check::*;
    if !is_open(spec) {
        return vec![Commutation, Decomposition, TqFusion, Reconstruction, Limits];
    }
    let mut v = vec![Commutation, Exchange, Decomposition, TqFusion, Reconstruction, RMatrix];
    if spec.q > 0.0 {
        v.push(Ratios);
    }
    v.push(Limits);
    let max_current = spec.rates().and_then(|r| ab_from_rates(&r, spec.q).ok()).is_some_and(|ab| ab.is_max_current());
    if max_current {
        v.push(Stationarity);
    }
    v.extend([Boundary, Lax]);
    v
}

struct Recorder<'a> {
    check: &'static str,
    out: &'a mut Vec<CheckResult>,
}

impl Recorder<'_> {
    fn push(&mut self, name: &str, residual: f64, threshold: f64) {
        self.out.push(CheckResult {
            check: self.check.into(),
            name: name.into(),
            residual,
            threshold,
            pass: residual.is_finite() && residual < threshold,
        });
    }
}

fn open_only(spec: &SystemSpec, check: Check) -> Result<(), Failure> {
    if is_open(spec) {
        Ok(())
    } else {
        Err(Failure(format!("check {} needs an open chain", check.name())))
    }
}

fn run_check(check: Check, spec: &SystemSpec, a: &VerifyArgs, out: &mut Vec<CheckResult>) -> Result<(), Failure> {
    let trunc = a.system.truncation();
    let (x, y, tol, q) = (re(a.x), re(a.y), a.tol, spec.q);
    let mut rec = Recorder { check: check.name(), out };
    match check {
        Check::Commutation => {
            rec.push("transfer", verify_commutation(spec, x, y, trunc)?, tol);
            if is_open(spec) {
                rec.push("pq", verify_exchange(spec, x, y, trunc)?.pq_commutator, tol);
            }
        }
        Check::Exchange => {
            open_only(spec, check)?;
            let r = verify_exchange(spec, x, y, trunc)?;
            rec.push("ut", r.ut, tol);
            rec.push("tu", r.tu, tol);
            rec.push("pq-constant", r.pq_constant, tol);
        }
        Check::Decomposition => {
            let ks = if is_open(spec) { 1..=2 } else { 1..=3 };
            for k in ks {
                let r = verify_decomposition(spec, k, x, trunc)?;
                rec.push(&format!("k{k}"), r.identity, tol);
                if let Some(s) = r.symmetry {
                    rec.push(&format!("k{k}-symmetry"), s, tol);
                }
            }
        }
        Check::TqFusion => {
            let r = verify_tq_and_fusion(spec, x, trunc)?;
            rec.push("tq2", r.tq2, tol);
            rec.push("tq3", r.tq3, tol);
            rec.push("fusion", r.max_fusion(), tol);
        }
        Check::Reconstruction => {
            let threshold = tol.max(RECONSTRUCTION_FLOOR);
            rec.push("x=-1", markov_from_t2(spec, ReconstructionPoint::MinusOne, trunc)?.residual, threshold);
            if q > 0.0 {
                rec.push("x=-1/q", markov_from_t2(spec, ReconstructionPoint::MinusInverseQ, trunc)?.residual, threshold);
            }
        }
        Check::RMatrix => {
            open_only(spec, check)?;
            let n = a.system.truncation.unwrap_or(RMATRIX_LEVELS);
            let r = exchange_residuals(x, y, x * 0.75, y * 0.7, q, n)?;
            rec.push("r-y", r[0], tol);
            rec.push("r-x", r[1], tol);
            rec.push("r", r[2], tol);
            let ab = ab_from_rates(&spec.rates().expect("open chain"), q)?;
            if ab.is_one_way() {
                rec.push("boundary-action", boundary_action_residual(x, y, &ab, q, n)?, tol);
            }
        }
        Check::Ratios => {
            open_only(spec, check)?;
            if q == 0.0 {
                return Err(Failure("check ratios needs q > 0".into()));
            }
            let ab = ab_from_rates(&spec.rates().expect("open chain"), q)?;
            for p in [1, 2] {
                let r = truncation_ratio_check(p, x, &ab, q, 3)?;
                rec.push(&format!("p{p}-zero-block"), r.zero_block, tol);
                rec.push(&format!("p{p}-ratio"), r.ratio_error, tol);
            }
        }
        Check::Limits => {
            let open = is_open(spec);
            let report = mu_zero_limit_checks(spec, &LIMIT_MUS, &LIMIT_YS, if open { 0.0 } else { a.x })?;
            let bound = if open { 10.0 } else { 5.0 };
            let worst = |f: fn(&qasep::transfer::LimitPoint) -> f64| {
                report.points.iter().map(|p| f(p) / p.mu).fold(0.0f64, f64::max)
            };
            rec.push("deviation/mu", worst(|p| p.deviation), bound);
            if open {
                rec.push("y-spread/mu", worst(|p| p.y_spread), bound);
            }
        }
        Check::Stationarity => {
            open_only(spec, check)?;
            let r = verify_stationarity(spec.l, &spec.rates().expect("open chain"), q, a.system.truncation)?;
            rec.push("residual", r.residual, tol);
            rec.push("angle", r.angle, tol);
        }
        Check::Boundary => {
            open_only(spec, check)?;
            let rates = spec.rates().expect("open chain");
            let ab = ab_from_rates(&rates, q)?;
            let n = trunc.resolve(decay_ratio(q, Some(&ab), spec.mu));
            let r = boundary_residuals(x, y, &rates, &ab, q, n)?;
            for (name, v) in ["v", "w", "v-tilde", "w-tilde"].iter().zip(r) {
                rec.push(name, v, tol);
            }
        }
        Check::Lax => {
            open_only(spec, check)?;
            let r = khat_residuals(&spec.rates().expect("open chain"), q)?;
            for (name, v) in ["k-plus", "k-plus-slope", "k-minus", "k-minus-slope"].iter().zip(r) {
                rec.push(name, v, tol);
            }
        }
    }
    Ok(())
}

pub fn verify(a: &VerifyArgs) -> Outcome {
    let spec = a.system.validated()?;
    if !(a.tol > 0.0) {
        return Err(Failure(format!("--tol must be positive, got {}", a.tol)));
    }
    let mut checks = if a.all { applicable(&spec) } else { a.check.clone() };
    if checks.is_empty() {
        return Err(Failure("choose checks with --check NAME or --all".into()));
    }
    checks.sort();
    checks.dedup();
    let input = InputEcho::new(&a.system)
        .with("checks", checks.iter().map(|c| c.name()).collect::<Vec<_>>())
        .with("x", a.x)
        .with("y", a.y)
        .with("tol", a.tol);
    let mut doc = ResultDocument::new("verify", input);
    for c in checks {
        run_check(c, &spec, a, &mut doc.checks)?;
    }
    Ok(doc)
}

fn bethe_options(grid: Option<usize>) -> Result<BetheOptions, Failure> {
    let mut opts = BetheOptions::default();
    if let Some(m) = grid {
        if m < 8 || !m.is_power_of_two() {
            return Err(Failure(format!("--grid must be a power of two of at least 8, got {m}")));
        }
        opts.grid = m;
    }
    Ok(opts)
}

fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn cumulant_table(spec: &SystemSpec, orders: usize, opts: &BetheOptions, oracle: bool) -> Result<CumulantTable, Failure> {
    if orders == 0 {
        return Ok(CumulantTable { bethe: Vec::new(), oracle: oracle.then(Vec::new), rel_diff: oracle.then(Vec::new) });
    }
    let bethe = bethe_cumulants(spec, orders, opts)?.nonzero_orders().to_vec();
    if !oracle {
        return Ok(CumulantTable { bethe, oracle: None, rel_diff: None });
    }
    let exact = cumulants_oracle(spec, orders)?.nonzero_orders().to_vec();
    let diff = bethe.iter().zip(&exact).map(|(&b, &o)| relative_difference(b, o)).collect();
    Ok(CumulantTable { bethe, oracle: Some(exact), rel_diff: Some(diff) })
}

pub fn cumulants(a: &CumulantArgs) -> Outcome {
    let spec = a.system.validated()?;
    let opts = bethe_options(a.grid)?;
    let oracle = !a.no_oracle && spec.l <= ORACLE_MAX_L;
    let input = InputEcho::new(&a.system).with("orders", a.orders).with("grid", opts.grid).with("oracle", oracle);
    let mut doc = ResultDocument::new("cumulants", input);
    let table = cumulant_table(&spec, a.orders, &opts, oracle)?;
    if let Some(diff) = &table.rel_diff {
        let mut rec = Recorder { check: "bethe-vs-oracle", out: &mut doc.checks };
        for (k, &d) in diff.iter().enumerate() {
            rec.push(&format!("c{}", k + 1), d, CUMULANT_TOL);
        }
    }
    doc.cumulants = Some(table);
    Ok(doc)
}

/// `--out-dir`, then the environment default, then the working directory.
fn output_dir(dir: &Option<PathBuf>) -> Result<PathBuf, Failure> {
    let dir = dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
    Ok(dir)
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| io_failure(&path, e))
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Failure(format!("csv: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    w.into_inner().map_err(|e| Failure(format!("csv: {e}")))
}

/// Occupations as a string of 0/1, site 1 first.
pub fn config_label(config: usize, l: usize) -> String {
    (0..l).map(|i| if (config >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn steady(a: &SteadyArgs) -> Outcome {
    let spec = a.system.validated()?;
    let rates = spec.rates().ok_or_else(|| Failure("steady needs an open chain".into()))?;
    let s = steady_state(spec.l, &rates, spec.q, a.x, a.system.truncation)?;
    let dir = output_dir(&a.out_dir)?;
    let probs = s.probabilities();
    let rows = (0..s.weights.len()).map(|c| vec![config_label(c, s.l), sig17(s.weights[c]), sig17(probs[c])]);
    write_file(&dir, STEADY_CSV, &csv_bytes(&["config", "weight", "probability"], rows)?)?;
    let input = InputEcho::new(&a.system).with("x", a.x);
    let mut doc = ResultDocument::new("steady", input);
    doc.files = vec![STEADY_CSV.into(), STEADY_JSON.into()];
    write_file(&dir, STEADY_JSON, (doc.for_file().to_json() + "\n").as_bytes())?;
    Ok(doc)
}

fn w_series(spec: &SystemSpec, orders: usize, opts: &BetheOptions) -> Result<WSeries, Failure> {
    Ok(match spec.geometry {
        Geometry::Open(rates) => solve_open_w(spec.l, &ab_from_rates(&rates, spec.q)?, spec.q, orders, opts)?,
        Geometry::Periodic { particles } => solve_periodic_w(spec.l, particles, spec.q, orders, opts)?,
    })
}

pub fn export(a: &ExportArgs) -> Outcome {
    let spec = a.system.validated()?;
    let opts = bethe_options(a.grid)?;
    let dir = output_dir(&a.out_dir)?;
    let mut samples: Vec<Vec<String>> = Vec::new();
    let mut used = opts.grid;
    if a.orders > 0 {
        let w = w_series(&spec, a.orders, &opts)?;
        used = w.grid();
        for (n, f) in w.orders.iter().enumerate().skip(1) {
            samples.extend(rows_of(n, f));
        }
    }
    let header = ["order", "index", "z_re", "z_im", "w_re", "w_im"];
    write_file(&dir, EXPORT_CSV, &csv_bytes(&header, samples.into_iter())?)?;
    let input = InputEcho::new(&a.system).with("orders", a.orders).with("grid", opts.grid).with("grid_used", used);
    let mut doc = ResultDocument::new("export", input);
    doc.cumulants = Some(cumulant_table(&spec, a.orders, &opts, false)?);
    doc.files = vec![EXPORT_CSV.into(), EXPORT_JSON.into()];
    write_file(&dir, EXPORT_JSON, (doc.for_file().to_json() + "\n").as_bytes())?;
    Ok(doc)
}

fn rows_of(order: usize, f: &CircleFunction) -> impl Iterator<Item = Vec<String>> + '_ {
    f.points().into_iter().zip(f.samples()).enumerate().map(move |(i, (z, w))| {
        vec![order.to_string(), i.to_string(), sig17(z.re), sig17(z.im), sig17(w.re), sig17(w.im)]
    })
}

/// Human-readable rendering of a result document.
pub fn render_text(doc: &ResultDocument) -> String {
    let mut s = String::new();
    for c in &doc.checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "{:<16} {:<18} {} < {}  {verdict}", c.check, c.name, sig17(c.residual), sig17(c.threshold));
    }
    if let Some(t) = &doc.cumulants {
        let _ = writeln!(s, "k  bethe  oracle  rel_diff");
        for (k, b) in t.bethe.iter().enumerate() {
            let col = |v: &Option<Vec<f64>>| v.as_ref().map_or("-".to_string(), |v| sig17(v[k]));
            let _ = writeln!(s, "{}  {}  {}  {}", k + 1, sig17(*b), col(&t.oracle), col(&t.rel_diff));
        }
    }
    for f in &doc.files {
        let _ = writeln!(s, "wrote {f}");
    }
    s
}

pub fn emit(doc: &ResultDocument, format: Format, json: &Option<PathBuf>, started: Instant) -> Result<(), Failure> {
    if let Some(path) = json {
        fs::write(path, doc.for_file().to_json() + "\n").map_err(|e| io_failure(path, e))?;
    }
    let mut shown = doc.clone();
    shown.seconds = Some(started.elapsed().as_secs_f64());
    let text = match format {
        Format::Json => shown.to_json() + "\n",
        Format::Text => render_text(&shown),
    };
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}
