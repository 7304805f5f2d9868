use std::path::PathBuf;

use chaingeo::boundary_map::BoundaryMap;
use chaingeo::busemann::volume_entropy;
use chaingeo::cartan::{cartan_invariant, chain_through};
use chaingeo::finite::{exact_suite, FiniteGroupModel, WeightedQuotient};
use chaingeo::forms::{BoundaryCocycle, DeltaForm, McConfig};
use chaingeo::hermitian::{HermitianModel, ProjPoint, AREA_TOL};
use chaingeo::isometry::{EmbeddingMap, Isometry};
use chaingeo::reconstruction::{fit_antiholomorphic, fit_embedding, verify_embedding, BoundarySampleMap};
use chaingeo::sampling::{boundary_point, derive_seed, interior_point, rng};
use chaingeo::toledo::{milnor_wood_check, toledo_surface_group, SurfaceGroupRep};
use chaingeo::Error;
use clap::Args;
use serde::Serialize;
use serde_json::json;

use crate::input::{self, PointInput};
use crate::report::{fmt, Report, Table};
use crate::{suites, CliError, Command, Global};

pub fn dispatch(g: &Global, cmd: &Command) -> Result<Report, CliError> {
    match cmd {
        Command::Cartan(a) => cartan(g, a),
        Command::Chain(a) => chain(g, a),
        Command::Toledo(a) => toledo(g, a),
        Command::DeltaForm(a) => delta_form(g, a),
        Command::Reconstruct(a) => reconstruct(g, a),
        Command::FiniteModel(a) => finite_model(g, a),
        Command::Verify(a) => verify(g, a),
    }
}

#[derive(Debug, Args)]
pub struct CartanArgs {
    /// Complex dimension of the ball.
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// JSON list of points (taken three at a time) or of triples; random
    /// triples are drawn when omitted.
    #[arg(long)]
    pub points: Option<PathBuf>,
}

#[derive(serde::Deserialize)]
#[serde(untagged)]
enum TripleInput {
    Triples(Vec<[PointInput; 3]>),
    Flat(Vec<PointInput>),
}

fn model(p: usize) -> Result<HermitianModel, CliError> {
    Ok(HermitianModel::new(p)?)
}

fn cartan(g: &Global, a: &CartanArgs) -> Result<Report, CliError> {
    model(a.p)?;
    let triples: Vec<[ProjPoint; 3]> = match &a.points {
        Some(path) => {
            let flat = match input::parse_json::<TripleInput>("points", &input::read(path)?)? {
                TripleInput::Triples(t) => t.into_iter().flatten().collect(),
                TripleInput::Flat(f) => {
                    if f.len() % 3 != 0 {
                        return Err(CliError::Input(format!("{} points do not form triples", f.len())));
                    }
                    f
                }
            };
            let pts = input::points(flat, a.p)?;
            pts.chunks(3)
                .map(|c| [c[0].clone(), c[1].clone(), c[2].clone()])
                .collect()
        }
        None => {
            let mut r = rng(g.seed);
            (0..g.samples.unwrap_or(10))
                .map(|_| std::array::from_fn(|_| boundary_point(a.p, &mut r)))
                .collect()
        }
    };
    let mut table = Table::new(&["triple", "c", "degenerate"]);
    let mut values = Vec::with_capacity(triples.len());
    for (i, t) in triples.iter().enumerate() {
        let c = cartan_invariant(&t[0], &t[1], &t[2])?;
        table.push(vec![i.to_string(), fmt(c.value), c.degenerate.to_string()]);
        values.push(c);
    }
    Ok(Report::new("cartan", g.seed, triples.len(), g.tol.unwrap_or(0.0))
        .with_result(&json!({ "p": a.p, "values": values }))
        .with_table(table))
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// JSON list of the two boundary points spanning the chain; random when
    /// omitted.
    #[arg(long)]
    pub points: Option<PathBuf>,
}

fn chain(g: &Global, a: &ChainArgs) -> Result<Report, CliError> {
    model(a.p)?;
    let ends = match &a.points {
        Some(path) => {
            let raw: Vec<PointInput> = input::parse_json("points", &input::read(path)?)?;
            if raw.len() != 2 {
                return Err(CliError::Input(format!("expected 2 points, got {}", raw.len())));
            }
            input::points(raw, a.p)?
        }
        None => {
            let mut r = rng(g.seed);
            vec![boundary_point(a.p, &mut r), boundary_point(a.p, &mut r)]
        }
    };
    let ch = chain_through(&ends[0], &ends[1])?;
    let n = g.samples.unwrap_or(64);
    let tol = g.tol.unwrap_or(1e-9);
    let mut headers = vec!["t".to_string()];
    for k in 1..=a.p {
        headers.push(format!("re_z{k}"));
        headers.push(format!("im_z{k}"));
    }
    headers.push("residual".into());
    let mut table = Table {
        headers,
        rows: Vec::new(),
    };
    let mut worst = 0.0f64;
    for k in 0..n {
        let t = std::f64::consts::TAU * k as f64 / n.max(1) as f64;
        let x = ch.sample(t);
        let res = ch.residual(&x);
        worst = worst.max(res);
        let mut row = vec![fmt(t)];
        for z in x.ball_coordinates() {
            row.push(fmt(z.re));
            row.push(fmt(z.im));
        }
        row.push(fmt(res));
        table.push(row);
    }
    Ok(Report::new("chain", g.seed, n, tol)
        .with_result(&json!({
            "p": a.p,
            "orientation": ch.orientation(),
            "defining_points": ends,
            "max_residual": worst,
        }))
        .with_table(table)
        .with_verdict(worst < tol))
}

#[derive(Debug, Args)]
pub struct ToledoArgs {
    /// JSON `{genus, generators: [matrices], relator?, target_q?}`.
    #[arg(long, conflicts_with = "fuchsian", required_unless_present = "fuchsian")]
    pub rep: Option<PathBuf>,
    /// Use the built-in Fuchsian representation of this genus.
    #[arg(long)]
    pub fuchsian: Option<usize>,
    /// Compose with the standard embedding into this target dimension.
    #[arg(long)]
    pub target_q: Option<usize>,
    /// Replace the representation by its complex conjugate.
    #[arg(long)]
    pub conjugate: bool,
}

fn toledo(g: &Global, a: &ToledoArgs) -> Result<Report, CliError> {
    let mut rep = match (&a.rep, a.fuchsian) {
        (Some(path), _) => SurfaceGroupRep::from_json(&input::read(path)?)?,
        (None, Some(genus)) => SurfaceGroupRep::fuchsian(genus)?,
        (None, None) => unreachable!("clap requires one of --rep, --fuchsian"),
    };
    if let Some(q) = a.target_q {
        if q < rep.q() {
            return Err(CliError::Input(format!(
                "--target-q {q} is below the generator dimension {}",
                rep.q()
            )));
        }
        if q > rep.q() {
            rep = rep.extend(&EmbeddingMap::standard(rep.q(), q)?)?;
        }
    }
    if a.conjugate {
        rep = rep.conj();
    }
    let m = model(rep.q())?;
    let r = toledo_surface_group(&m, &rep)?;
    let mw = milnor_wood_check(&r, 1, 1)?;
    let mut table = Table::new(&["i_rho", "err", "mw_ok", "margin"]);
    table.push(vec![
        fmt(r.value),
        fmt(r.error_bound),
        mw.holds.to_string(),
        fmt(mw.margin),
    ]);
    Ok(Report::new("toledo", g.seed, r.triangles, g.tol.unwrap_or(AREA_TOL))
        .with_result(&json!({
            "i_rho": r.value,
            "err": r.error_bound,
            "mw_ok": mw.holds,
            "mw_margin": mw.margin,
            "genus": r.genus,
            "target_q": rep.q(),
            "triangles": r.triangles,
            "relator_residual": rep.relator_residual(),
        }))
        .with_table(table)
        .with_verdict(mw.holds))
}

#[derive(Debug, Args)]
pub struct DeltaFormArgs {
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    /// Interior point (JSON); random when omitted.
    #[arg(long)]
    pub point: Option<PathBuf>,
    /// Boundary cocycle to integrate.
    #[arg(long, value_enum, default_value_t = CocycleChoice::Cartan)]
    pub cocycle: CocycleChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CocycleChoice {
    Cartan,
    /// The constant cocycle, whose form vanishes.
    Constant,
}

fn delta_form(g: &Global, a: &DeltaFormArgs) -> Result<Report, CliError> {
    let m = model(a.p)?;
    let x = match &a.point {
        Some(path) => {
            let raw: PointInput = input::parse_json("point", &input::read(path)?)?;
            let x = input::points(vec![raw], a.p)?.remove(0);
            if !x.is_interior() {
                return Err(Error::NotInterior.into());
            }
            x
        }
        None => interior_point(a.p, 0.8, &mut rng(g.seed)),
    };
    let h = volume_entropy(&m)?.value;
    let cocycle = match a.cocycle {
        CocycleChoice::Cartan => BoundaryCocycle::cartan(),
        CocycleChoice::Constant => BoundaryCocycle::constant(3, 1.0),
    };
    let n = g.samples.unwrap_or(4000);
    let field = DeltaForm::new(m, h, cocycle, McConfig::new(n, derive_seed(g.seed, 1)))?;
    let frame = m.tangent_frame(&x)?;
    let mut table = Table::new(&["i", "j", "value", "stderr", "bound", "within_bound"]);
    #[derive(Serialize)]
    struct Entry {
        i: usize,
        j: usize,
        value: f64,
        stderr: f64,
        bound: f64,
    }
    let mut entries = Vec::new();
    let mut ok = true;
    for i in 0..frame.len() {
        for j in i + 1..frame.len() {
            let e = field.evaluate(&x, &[frame[i].clone(), frame[j].clone()])?;
            let within = e.within_bound();
            ok &= within;
            table.push(vec![
                i.to_string(),
                j.to_string(),
                fmt(e.value),
                fmt(e.stderr),
                fmt(e.bound),
                within.to_string(),
            ]);
            entries.push(Entry {
                i,
                j,
                value: e.value,
                stderr: e.stderr,
                bound: e.bound,
            });
        }
    }
    Ok(Report::new("delta-form", g.seed, n, g.tol.unwrap_or(0.0))
        .with_result(&json!({ "p": a.p, "entropy": h, "point": x, "pairs": entries }))
        .with_table(table)
        .with_verdict(ok))
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Sample table `[{source, target}, ...]`; a planted embedding is
    /// sampled when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Source dimension of the planted embedding.
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    /// Target dimension of the planted embedding.
    #[arg(long, default_value_t = 3)]
    pub q: usize,
    /// Write the planted samples to this file.
    #[arg(long)]
    pub save_samples: Option<PathBuf>,
    /// Fraction of samples that must match the fit.
    #[arg(long, default_value_t = 1.0)]
    pub min_fraction: f64,
    /// Accept an antiholomorphic model instead of failing.
    #[arg(long)]
    pub allow_antiholomorphic: bool,
}

fn reconstruct(g: &Global, a: &ReconstructArgs) -> Result<Report, CliError> {
    let tol = g.tol.unwrap_or(1e-6);
    let samples = match &a.input {
        Some(path) => BoundarySampleMap::from_json(&input::read(path)?)?,
        None => {
            let phi = BoundaryMap::standard(a.p, a.q)?.then(&Isometry::random(a.q, g.seed))?;
            let s = BoundarySampleMap::sample(&phi, g.samples.unwrap_or(200), 0, 0, derive_seed(g.seed, 1))?;
            if let Some(path) = &a.save_samples {
                std::fs::write(path, s.to_json()).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
            }
            s
        }
    };
    let base = Report::new("reconstruct", g.seed, samples.len(), tol);
    let fit = match fit_embedding(&samples) {
        Ok(f) => f,
        Err(Error::OrientationReversing) if a.allow_antiholomorphic => fit_antiholomorphic(&samples)?,
        Err(e @ (Error::NoRigidModel { .. } | Error::OrientationReversing)) => {
            return Ok(base
                .with_result(&json!({ "p": samples.p(), "q": samples.q(), "error": e.to_string() }))
                .with_verdict(false));
        }
        Err(e) => return Err(e.into()),
    };
    let v = verify_embedding(&fit, &samples, tol)?;
    let mut table = Table::new(&["sample", "residual", "ok"]);
    for (i, r) in v.residuals.iter().enumerate() {
        table.push(vec![i.to_string(), fmt(*r), (*r < tol).to_string()]);
    }
    let passed = v.fraction >= a.min_fraction;
    Ok(base
        .with_result(&json!({
            "fit": fit,
            "fraction": v.fraction,
            "bad_indices": v.bad_indices,
            "isometry_residual": v.isometry_residual,
        }))
        .with_table(table)
        .with_verdict(passed))
}

#[derive(Debug, Args)]
pub struct FiniteModelArgs {
    /// Built-in model: S3, S4 or D4.
    #[arg(long, conflicts_with = "group", required_unless_present = "group")]
    pub preset: Option<String>,
    /// JSON `{table, h, q, l}`.
    #[arg(long)]
    pub group: Option<PathBuf>,
    /// `ramp`, `uniform`, or comma-separated rationals like `1/3,2/3`.
    #[arg(long, default_value = "ramp")]
    pub weights: String,
    /// Largest cochain degree checked.
    #[arg(long, default_value_t = 2)]
    pub n_max: usize,
}

fn finite_model(g: &Global, a: &FiniteModelArgs) -> Result<Report, CliError> {
    let m = match (&a.preset, &a.group) {
        (Some(name), _) => FiniteGroupModel::preset(name)?,
        (None, Some(path)) => FiniteGroupModel::from_json(&input::read(path)?)?,
        (None, None) => unreachable!("clap requires one of --preset, --group"),
    };
    let w = match a.weights.as_str() {
        "ramp" => WeightedQuotient::ramp(&m),
        "uniform" => WeightedQuotient::uniform(&m),
        list => WeightedQuotient::parse(&m, &list.split(',').map(String::from).collect::<Vec<_>>())?,
    };
    let n = g.samples.unwrap_or(20);
    let verdicts = exact_suite(&m, &w, a.n_max, n, g.seed)?;
    let mut table = Table::new(&["check", "passed", "detail"]);
    for v in &verdicts {
        table.push(vec![v.name.clone(), v.passed.to_string(), v.detail.clone()]);
    }
    let ok = verdicts.iter().all(|v| v.passed);
    Ok(Report::new("finite-model", g.seed, n, 0.0)
        .with_result(&json!({
            "order": m.order(),
            "index_gh": m.index_gh(),
            "index_hq": m.index_hq(),
            "weights": w.weights().iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            "checks": verdicts,
        }))
        .with_table(table)
        .with_verdict(ok))
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// `all` or one of the suite names.
    #[arg(long, default_value = "all")]
    pub suite: String,
}

fn verify(g: &Global, a: &VerifyArgs) -> Result<Report, CliError> {
    let names: Vec<&str> = if a.suite == "all" {
        suites::SUITES.to_vec()
    } else if suites::SUITES.contains(&a.suite.as_str()) {
        vec![a.suite.as_str()]
    } else {
        return Err(CliError::Input(format!(
            "unknown suite {:?}; expected all or one of {}",
            a.suite,
            suites::SUITES.join(", ")
        )));
    };
    let scale = g.samples.unwrap_or(suites::DEFAULT_SCALE);
    let mut checks = Vec::new();
    for name in names {
        checks.extend(suites::run_suite(name, g.seed, scale)?);
    }
    let mut table = Table::new(&["suite", "check", "passed", "detail"]);
    for c in &checks {
        table.push(vec![
            c.suite.into(),
            c.name.clone(),
            c.passed.to_string(),
            c.detail.clone(),
        ]);
    }
    let ok = checks.iter().all(|c| c.passed);
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}/{}", c.suite, c.name))
        .collect();
    Ok(Report::new("verify", g.seed, scale, suites::IDENTITY_TOL)
        .with_result(&json!({ "suite": a.suite, "checks": checks, "failed": failed }))
        .with_table(table)
        .with_verdict(ok))
}
