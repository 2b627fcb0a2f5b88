use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use gramlax::alignment::{align_index_subspace, align_subspace, AlignmentCertificate};
use gramlax::duality::{dualize, verify_off_certificate, verify_theta_certificate};
use gramlax::geometry::{alpha_all, hull_polygon, AlphaCertificate};
use gramlax::rank2::rank2_pipeline;
use gramlax::search::{optimize, welch_bound, SearchConfig, SearchResult};
use gramlax::{ExtReal, OffCertificate, PointConfig, Subspace, ThetaCertificate, Tolerances, VerificationReport};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::output::{num, write_csv, Output};
use crate::{Command, Failure};

pub struct Done {
    pub output: Output,
    /// Set when the command ran but a check it performs failed.
    pub failure: Option<String>,
}

impl From<Output> for Done {
    fn from(output: Output) -> Self {
        Done { output, failure: None }
    }
}

pub fn dispatch(cmd: &Command, tol: &Tolerances) -> Result<Done, Failure> {
    match cmd {
        Command::Align { subspace, index } => align(subspace, *index, tol),
        Command::Alpha { config, emit_polygon } => alpha(config, *emit_polygon, tol),
        Command::Dualize { subspace } => dualize_cmd(subspace, tol),
        Command::Rank2 { n } => rank2(*n, tol),
        Command::Solve { n, d, restarts, seed, max_iters, history_csv } => {
            let mut cfg = SearchConfig { restarts: *restarts, seed: *seed, tol: *tol, ..SearchConfig::default() };
            if let Some(m) = max_iters {
                cfg.max_iters = *m;
            }
            solve(*n, *d, &cfg, history_csv.as_deref())
        }
        Command::Verify { certificate, theta } => verify(certificate, *theta, tol),
        Command::Table { d, n_from, n_to, restarts, seed } => {
            let cfg = SearchConfig { restarts: *restarts, seed: *seed, tol: *tol, ..SearchConfig::default() };
            table(*d, *n_from, *n_to, &cfg)
        }
        Command::Welch { n, d } => welch(*n, *d),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        let msg = e.to_string();
        let msg = msg.split(" at line ").next().unwrap_or(&msg).to_string();
        Failure::Input(format!("{}:{}:{}: {msg}", path.display(), e.line(), e.column()))
    })
}

/// Converts a 1-based index from the command line.
fn index_arg(i: usize, n: usize) -> Result<usize, Failure> {
    if i == 0 || i > n {
        return Err(Failure::Input(format!("index {i} is out of range 1..={n}")));
    }
    Ok(i - 1)
}

#[derive(Serialize)]
struct AlignCert {
    index: usize,
    value: ExtReal,
    witness: Vec<f64>,
}

impl From<AlignmentCertificate> for AlignCert {
    fn from(c: AlignmentCertificate) -> Self {
        Self { index: c.index + 1, value: c.value, witness: c.witness }
    }
}

#[derive(Serialize)]
struct AlignOut {
    value: ExtReal,
    certificates: Vec<AlignCert>,
}

fn ext(x: ExtReal) -> String {
    num(x.to_f64())
}

fn align(path: &Path, index: Option<usize>, tol: &Tolerances) -> Result<Done, Failure> {
    let a: Subspace = read_json(path)?;
    let certs: Vec<AlignmentCertificate> = match index {
        Some(i) => vec![align_index_subspace(&a, index_arg(i, a.ambient())?, tol)?],
        None => align_subspace(&a, tol)?.certificates,
    };
    let value = certs.iter().fold(ExtReal::Finite(0.0), |m, c| m.max(c.value));
    let rows = certs.iter().map(|c| vec![(c.index + 1).to_string(), ext(c.value)]).collect();
    let mut pretty = format!("alignment {}\n", value);
    for c in &certs {
        writeln!(pretty, "  index {:>3}: {}", c.index + 1, c.value).ok();
    }
    let out = AlignOut { value, certificates: certs.into_iter().map(AlignCert::from).collect() };
    Ok(Output::new(&out, pretty).with_csv(&["index", "alignment"], rows).into())
}

#[derive(Serialize)]
struct AlphaCert {
    index: usize,
    value: f64,
    witness: Vec<f64>,
}

impl From<AlphaCertificate> for AlphaCert {
    fn from(c: AlphaCertificate) -> Self {
        Self { index: c.index + 1, value: c.value, witness: c.witness }
    }
}

#[derive(Serialize)]
struct AlphaOut {
    values: Vec<f64>,
    max: f64,
    certificates: Vec<AlphaCert>,
}

#[derive(Serialize)]
struct PolygonOut {
    index: usize,
    vertices: Vec<[f64; 2]>,
}

fn alpha(path: &Path, polygon: Option<usize>, tol: &Tolerances) -> Result<Done, Failure> {
    let s: PointConfig = read_json(path)?;
    if let Some(i) = polygon {
        // Negating the points produces -0.0 coordinates; print them as 0.
        let vertices: Vec<[f64; 2]> = hull_polygon(&s, index_arg(i, s.len())?)?
            .into_iter()
            .map(|[x, y]| [x + 0.0, y + 0.0])
            .collect();
        let rows = vertices.iter().map(|v| vec![num(v[0]), num(v[1])]).collect();
        let mut pretty = format!("hull without point {i}: {} vertices\n", vertices.len());
        for v in &vertices {
            writeln!(pretty, "  ({}, {})", v[0], v[1]).ok();
        }
        let out = PolygonOut { index: i, vertices };
        return Ok(Output::new(&out, pretty).with_csv(&["x", "y"], rows).into());
    }
    let t = alpha_all(&s, tol)?;
    let rows = t.values.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), num(*v)]).collect();
    let mut pretty = format!("max alpha {}\n", t.max);
    for (i, v) in t.values.iter().enumerate() {
        writeln!(pretty, "  alpha_{:<3} {}", i + 1, v).ok();
    }
    let out = AlphaOut {
        values: t.values,
        max: t.max,
        certificates: t.certificates.into_iter().map(AlphaCert::from).collect(),
    };
    Ok(Output::new(&out, pretty).with_csv(&["index", "alpha"], rows).into())
}

fn matrix_rows(g: &gramlax::Mat) -> Vec<Vec<String>> {
    (0..g.rows()).map(|i| g.row(i).iter().map(|&x| num(x)).collect()).collect()
}

fn matrix_header(cols: usize) -> Vec<String> {
    (1..=cols).map(|j| format!("c{j}")).collect()
}

fn certificate_output(c: &OffCertificate) -> Output {
    let pretty = format!(
        "off-certificate n={} d={} eps={}\n  residuals: diag {:e}, rank {:e}\n",
        c.n, c.d, c.eps, c.residuals.diag, c.residuals.rank
    );
    let header = matrix_header(c.g.cols());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    Output::new(c, pretty).with_csv(&header, matrix_rows(&c.g))
}

fn dualize_cmd(path: &Path, tol: &Tolerances) -> Result<Done, Failure> {
    let a: Subspace = read_json(path)?;
    let c = dualize(&a, tol)?;
    Ok(certificate_output(&c).into())
}

fn rank2(n: usize, tol: &Tolerances) -> Result<Done, Failure> {
    let r = rank2_pipeline(n, tol)?;
    let target = (PI / n as f64).cos();
    let pretty = format!(
        "rank-2 construction, n={n}\n  eps {} (cos(pi/n) = {target})\n  Q' eigenvalues {:?}\n  psd {}  rank(Q') {}  rank(PL) {}\n  residuals: symmetry {:e}, annihilation {:e}, trace {:e}\n  breaches {:?}\n",
        r.eps, r.eigenvalues, r.psd, r.q_prime_rank, r.pl_rank,
        r.residuals.pl_symmetry, r.residuals.annihilation, r.residuals.trace, r.breaches
    );
    let rows = vec![
        vec!["n".into(), n.to_string()],
        vec!["eps".into(), num(r.eps)],
        vec!["cos_pi_n".into(), num(target)],
        vec!["psd".into(), r.psd.to_string()],
        vec!["q_prime_rank".into(), r.q_prime_rank.to_string()],
        vec!["pl_rank".into(), r.pl_rank.to_string()],
        vec!["smallest_eigenvalue".into(), num(r.eigenvalues[0])],
        vec!["pl_symmetry".into(), num(r.residuals.pl_symmetry)],
        vec!["annihilation".into(), num(r.residuals.annihilation)],
    ];
    let failure = (r.verified != Some(true)).then(|| {
        format!("eps {} vs cos(pi/{n}) = {target}, psd {}", r.eps, r.psd)
    });
    let output = Output::new(&r, pretty).with_csv(&["quantity", "value"], rows);
    Ok(Done { output, failure })
}

#[derive(Serialize)]
struct SolveOut<'a> {
    n: usize,
    d: usize,
    eps: f64,
    /// The search yields an upper bound on the optimum, never a proof.
    bound: &'static str,
    welch_bound: Option<f64>,
    exact: Option<f64>,
    #[serde(flatten)]
    result: &'a SearchResult,
}

fn history_rows(h: &[f64]) -> Vec<Vec<String>> {
    h.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), num(*v)]).collect()
}

fn solve(n: usize, d: usize, cfg: &SearchConfig, history: Option<&Path>) -> Result<Done, Failure> {
    if d == 0 || (d != 2 && d >= n) || n < 2 {
        return Err(Failure::Input(format!("need n > d >= 1 (or d = 2, n >= 2); got n={n}, d={d}")));
    }
    let result = optimize(n, d, cfg)?;
    let eps = result.certificate.eps;
    let welch = (n > d).then(|| welch_bound(n, d)).transpose()?;
    let exact = (d == 2).then(|| (PI / n as f64).cos());
    if let Some(path) = history {
        let file = std::fs::File::create(path)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
        write_csv(file, &["iteration".into(), "max_alpha".into()], &history_rows(&result.history))
            .map_err(Failure::Input)?;
    }
    let report = verify_off_certificate(&result.certificate, &cfg.tol);
    let mut failure = failed_checks(&report);
    if let Some(w) = welch {
        if eps < w - 1e-9 {
            failure = Some(format!("eps {eps} lies below the Welch bound {w}"));
        }
    }
    let mut pretty = format!("n={n} d={d}: eps {eps} (upper bound)\n");
    if let Some(w) = welch {
        writeln!(pretty, "  welch bound {w}").ok();
    }
    if let Some(x) = exact {
        writeln!(pretty, "  cos(pi/n)   {x}  gap {:e}", eps - x).ok();
    }
    writeln!(pretty, "  restart {} iterations {} converged {}", result.restart, result.iterations, result.converged).ok();
    let out = SolveOut { n, d, eps, bound: "upper", welch_bound: welch, exact, result: &result };
    let output = Output::new(&out, pretty).with_csv(&["iteration", "max_alpha"], history_rows(&result.history));
    Ok(Done { output, failure })
}

fn failed_checks(r: &VerificationReport) -> Option<String> {
    let names: Vec<&str> = r.failures().map(|c| c.name.as_str()).collect();
    (!names.is_empty()).then(|| format!("failed checks: {}", names.join(", ")))
}

fn verify(path: &Path, theta: bool, tol: &Tolerances) -> Result<Done, Failure> {
    let mut value: serde_json::Value = read_json(path)?;
    // Accept the output of `solve`, which wraps the certificate.
    if let Some(inner) = value.get_mut("certificate") {
        value = inner.take();
    }
    let bad = |e: serde_json::Error| Failure::Input(format!("{}: not a certificate: {e}", path.display()));
    let report = if theta {
        let cert = if value.get("U").is_some() {
            serde_json::from_value::<ThetaCertificate>(value).map_err(bad)?
        } else {
            let off: OffCertificate = serde_json::from_value(value).map_err(bad)?;
            ThetaCertificate::from_off(off, tol)?
        };
        verify_theta_certificate(&cert, tol)
    } else {
        let cert: OffCertificate = serde_json::from_value(value).map_err(bad)?;
        verify_off_certificate(&cert, tol)
    };
    let mut pretty = format!("{}\n", if report.passed { "PASS" } else { "FAIL" });
    for c in &report.checks {
        writeln!(
            pretty,
            "  {:<4} {:<20} measured {:e}  threshold {:e}",
            if c.passed { "ok" } else { "FAIL" },
            c.name,
            c.measured,
            c.threshold
        )
        .ok();
    }
    let rows = report
        .checks
        .iter()
        .map(|c| vec![c.name.clone(), num(c.measured), num(c.threshold), c.passed.to_string()])
        .collect();
    let failure = failed_checks(&report);
    let output = Output::new(&report, pretty).with_csv(&["check", "measured", "threshold", "passed"], rows);
    Ok(Done { output, failure })
}

#[derive(Serialize)]
struct TableRow {
    n: usize,
    found_eps: f64,
    cos_pi_n: f64,
    welch_bound: Option<f64>,
    gap: f64,
}

fn table(d: usize, from: usize, to: usize, cfg: &SearchConfig) -> Result<Done, Failure> {
    if d != 2 {
        return Err(Failure::Input("the table compares against the exact value, known only for d = 2".into()));
    }
    if from < 2 || to < from {
        return Err(Failure::Input(format!("need 2 <= n-from <= n-to, got {from}..{to}")));
    }
    let mut rows = Vec::new();
    for n in from..=to {
        let r = optimize(n, 2, cfg)?;
        let exact = (PI / n as f64).cos();
        rows.push(TableRow {
            n,
            found_eps: r.certificate.eps,
            cos_pi_n: exact,
            welch_bound: (n > 2).then(|| welch_bound(n, 2)).transpose()?,
            gap: r.certificate.eps - exact,
        });
    }
    let mut pretty = String::from("   n  found               cos(pi/n)           gap\n");
    for r in &rows {
        writeln!(pretty, "{:>4}  {:<18.16}  {:<18.16}  {:e}", r.n, r.found_eps, r.cos_pi_n, r.gap).ok();
    }
    let csv = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                num(r.found_eps),
                num(r.cos_pi_n),
                r.welch_bound.map(num).unwrap_or_default(),
                num(r.gap),
            ]
        })
        .collect();
    Ok(Output::new(&rows, pretty)
        .with_csv(&["n", "found_eps", "cos_pi_n", "welch_bound", "gap"], csv)
        .into())
}

fn welch(n: usize, d: usize) -> Result<Done, Failure> {
    let w = welch_bound(n, d)?;
    Ok(Output::new(&w, format!("{w}\n")).with_csv(&["welch_bound"], vec![vec![num(w)]]).into())
}
