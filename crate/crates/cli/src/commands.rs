use std::path::{Path, PathBuf};

use critset::atlas::{self, Region};
use critset::model::{self, Scale};
use critset::operators::{self, ZERO_OUTPUT_TOL};
use critset::saddle::{self, Classification};
use critset::symmetry::{DeltaVector, IndexMap, Partition, Permutation};
use critset::{BranchId, ParamPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::problem::{example_problem, Problem, ProblemFile, Settings};
use crate::report::{
    dim_label, CheckRecord, ManifoldRecord, Meta, PieceRecord, PointRecord, Report, SaddleRecord, Tolerances,
    WitnessRecord,
};
use crate::{CliError, GlobalOpts, Input};

/// Settings after merging command-line flags over the problem file.
struct Ctx {
    tol: saddle::Tolerances,
    region: [f64; 2],
    budget: usize,
    seed: Option<u64>,
    m_target: Option<usize>,
}

impl Ctx {
    fn new(g: &GlobalOpts, s: &Settings) -> Result<Self, CliError> {
        let region = match &g.region {
            Some(text) => parse_region(text)?,
            None => s.region.unwrap_or([-3.0, 3.0]),
        };
        if !region.iter().all(|v| v.is_finite()) || region[0] >= region[1] {
            return Err(CliError::Input(format!("region lower bound {} is not below {}", region[0], region[1])));
        }
        let tol = saddle::Tolerances {
            tol_grad: g.tol_grad.or(s.tol_grad).unwrap_or(1e-8),
            tol_eig_rel: g.tol_eig.or(s.tol_eig).unwrap_or(1e-6),
            ..saddle::Tolerances::default()
        };
        Ok(Self {
            tol,
            region,
            budget: g.budget.or(s.budget).unwrap_or(10_000),
            seed: g.seed.or(s.seed),
            m_target: g.m_target.or(s.m_target),
        })
    }

    fn region(&self, d: usize) -> Result<Region, CliError> {
        Ok(Region::cube(d, self.region[0], self.region[1])?)
    }

    fn report(&self, command: &str, input: &ProblemFile) -> Report {
        Report {
            meta: Meta {
                tool: "critset".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                seed: self.seed,
            },
            tolerances: Tolerances {
                tol_grad: self.tol.tol_grad,
                tol_eig_rel: self.tol.tol_eig_rel,
                witness_radius: self.tol.witness_radius,
                region: self.region,
                budget: self.budget,
            },
            input: input.clone(),
            points: Vec::new(),
            manifold: None,
            pieces: Vec::new(),
            witnesses: Vec::new(),
            saddles: Vec::new(),
            checks: Vec::new(),
        }
    }
}

fn parse_region(text: &str) -> Result<[f64; 2], CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || CliError::Input(format!("--region expects `lo,hi`, got {text:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let lo = parts[0].parse::<f64>().map_err(|_| bad())?;
    let hi = parts[1].parse::<f64>().map_err(|_| bad())?;
    Ok([lo, hi])
}

fn load(g: &GlobalOpts, input: &Input) -> Result<(Problem, Ctx), CliError> {
    let problem = ProblemFile::read(&input.problem)?.validate()?;
    let ctx = Ctx::new(g, &problem.file.settings)?;
    Ok((problem, ctx))
}

fn emit(report: &Report, output: Option<&Path>) -> Result<(), CliError> {
    let text = report.to_toml()?;
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn point_record(problem: &Problem, ctx: &Ctx, name: &str, p: &ParamPoint) -> Result<PointRecord, CliError> {
    let spec = problem.spec_for(p)?;
    let branch = operators::locate_branch(p, &problem.activation);
    let mut rec = PointRecord::new(name, p, &branch);
    rec.errors = model::errors(&spec, p, &problem.samples)?;
    rec.criticality = Some(saddle::classify(&spec, p, &problem.samples, &ctx.tol)?);
    Ok(rec)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn require_critical(problem: &Problem, ctx: &Ctx, p: &ParamPoint) -> Result<(), CliError> {
    let g = model::gradient(&problem.spec_for(p)?, p, &problem.samples)?.norm();
    if g > ctx.tol.tol_grad {
        return Err(CliError::Check(format!("point is not critical: ‖∇R‖ = {g:.3e} > {:.1e}", ctx.tol.tol_grad)));
    }
    Ok(())
}

pub fn analyze(g: &GlobalOpts, input: &Input) -> Result<u8, CliError> {
    let (problem, ctx) = load(g, input)?;
    let mut report = ctx.report("analyze", &problem.file);
    let names: Vec<String> = match &input.point {
        Some(n) => vec![n.clone()],
        None => problem.file.points.iter().map(|p| p.name.clone()).collect(),
    };
    if names.is_empty() {
        return Err(CliError::Input("the problem file lists no points".into()));
    }
    for name in names {
        let (_, p) = problem.point(Some(&name))?;
        let rec = point_record(&problem, &ctx, &name, &p)?;
        let c = rec.criticality.as_ref().expect("set above");
        eprintln!("{name}: {:?}, ‖∇R‖ = {:.3e}, r = {}, l = {}", c.classification, c.grad_norm, rec.branch.r, rec.branch.l);
        report.points.push(rec);
    }
    emit(&report, g.output.as_deref())?;
    Ok(0)
}

pub fn atlas(g: &GlobalOpts, input: &Input, trace_csv: Option<&Path>) -> Result<u8, CliError> {
    let (problem, ctx) = load(g, input)?;
    let (name, theta) = problem.point(input.point.as_deref())?;
    require_critical(&problem, &ctx, &theta)?;
    let act = problem.activation;
    let (reduced, _) = operators::minimal_reduce(&theta, &act);
    let r = reduced.width();
    if r == 0 {
        return Err(CliError::Check("the point represents the zero function".into()));
    }
    let m = ctx.m_target.unwrap_or(theta.width());
    if m < r {
        return Err(CliError::Input(format!("--m-target {m} is below the minimal width {r}")));
    }
    let d = theta.input_dim();
    let trace = atlas::trace_manifold(&reduced, &problem.samples, &act, &ctx.region(d)?, ctx.budget);
    let pieces = atlas::enumerate_pieces(&reduced, m, &problem.samples, &act, !g.expand_permutations, &trace)?;
    let n_r = atlas::critical_set_nullity(&problem.spec_for(&reduced)?, &reduced, &problem.samples)?;

    let csv_path: Option<PathBuf> =
        trace_csv.map(Path::to_path_buf).or_else(|| g.output.as_ref().map(|p| p.with_extension("csv")));
    if let Some(path) = &csv_path {
        write_trace_csv(path, d, &trace)?;
    }

    let mut report = ctx.report("atlas", &problem.file);
    report.points.push(point_record(&problem, &ctx, &name, &theta)?);
    report.points.push(point_record(&problem, &ctx, "reduced", &reduced)?);
    report.manifold = Some(ManifoldRecord {
        points: trace.len(),
        est_dim: dim_label(trace.est_dim),
        entire_space: trace.entire_space,
        max_residual: trace.residuals.iter().copied().fold(0.0, f64::max),
        csv: csv_path.as_ref().and_then(|p| p.file_name()).map(|f| f.to_string_lossy().into_owned()),
    });
    for piece in &pieces {
        let spec = problem.spec_for(&piece.base)?;
        let dimension = match (piece.manifold_factors, trace.est_dim.known()) {
            (0, _) => Some(atlas::dimension_report(piece, 0, n_r)),
            (_, Some(k)) => Some(atlas::dimension_report(piece, k, n_r)),
            _ => None,
        };
        report.pieces.push(PieceRecord {
            branch: (&piece.branch).into(),
            free_affine_dim: piece.free_affine_dim,
            manifold_factors: piece.manifold_factors,
            dimension,
            grad_norm: model::gradient(&spec, &piece.base, &problem.samples)?.norm(),
            base_a: piece.base.a().to_vec(),
            base_w: piece.base.w().to_vec(),
        });
    }
    eprintln!("{} pieces at width {m}, {} traced points, est_dim {}", pieces.len(), trace.len(), dim_label(trace.est_dim));
    emit(&report, g.output.as_deref())?;
    Ok(0)
}

fn write_trace_csv(path: &Path, d: usize, trace: &critset::ManifoldTrace) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Input(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header: Vec<String> = (1..=d).map(|t| format!("w_{t}")).collect();
    header.push("residual".into());
    w.write_record(&header).map_err(io)?;
    for (p, r) in trace.points.iter().zip(&trace.residuals) {
        let mut row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        row.push(r.to_string());
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

pub fn reduce(g: &GlobalOpts, input: &Input) -> Result<u8, CliError> {
    let (problem, ctx) = load(g, input)?;
    let (name, theta) = problem.point(input.point.as_deref())?;
    let (reduced, chain) = operators::minimal_reduce(&theta, &problem.activation);
    let mut report = ctx.report("reduce", &problem.file);
    let before = point_record(&problem, &ctx, &name, &theta)?;
    if reduced.width() == 0 {
        return Err(CliError::Check("the point represents the zero function".into()));
    }
    let after = point_record(&problem, &ctx, "reduced", &reduced)?;
    let diff = max_diff(&before.errors, &after.errors);
    let passed = diff <= 1e-12;
    report.checks.push(CheckRecord {
        name: "errors preserved".into(),
        passed,
        expected: "<= 1e-12".into(),
        got: format!("{diff:e}"),
    });
    eprintln!("width {} -> {} in {} step(s)", theta.width(), reduced.width(), chain.len());
    report.points.push(before);
    report.points.push(after);
    emit(&report, g.output.as_deref())?;
    Ok(if passed { 0 } else { 1 })
}

pub fn embed(g: &GlobalOpts, input: &Input, zero_neurons: usize) -> Result<u8, CliError> {
    let (problem, ctx) = load(g, input)?;
    let (name, theta) = problem.point(input.point.as_deref())?;
    let r = theta.width();
    let m = ctx.m_target.ok_or_else(|| CliError::Input("embed needs --m-target".into()))?;
    if m < r + zero_neurons {
        return Err(CliError::Input(format!("width {m} cannot hold {r} neurons and {zero_neurons} zero neurons")));
    }
    let mut lengths = vec![1usize; r];
    for k in 0..(m - zero_neurons - r) {
        lengths[k % r] += 1;
    }
    let partition = Partition::from_lengths(&lengths)?;
    let delta = match ctx.seed {
        None => DeltaVector::uniform(&partition),
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut values = Vec::with_capacity(partition.total());
            for len in &lengths {
                let raw: Vec<f64> = (0..*len).map(|_| rng.random_range(0.1..1.0)).collect();
                let s: f64 = raw.iter().sum();
                values.extend(raw.iter().map(|v| v / s));
            }
            DeltaVector::new(values, &partition)?
        }
    };
    let wide = operators::embed(&theta, &partition, &delta, &IndexMap::constant(zero_neurons, 0), &Permutation::identity(m))?;
    let mut report = ctx.report("embed", &problem.file);
    let before = point_record(&problem, &ctx, &name, &theta)?;
    let after = point_record(&problem, &ctx, "embedded", &wide)?;
    let diff = max_diff(&before.errors, &after.errors);
    let passed = diff <= 1e-12;
    report.checks.push(CheckRecord {
        name: "errors preserved".into(),
        passed,
        expected: "<= 1e-12".into(),
        got: format!("{diff:e}"),
    });
    report.points.push(before);
    report.points.push(after);
    emit(&report, g.output.as_deref())?;
    Ok(if passed { 0 } else { 1 })
}

pub fn saddle(g: &GlobalOpts, input: &Input, radius: f64) -> Result<u8, CliError> {
    let (problem, ctx) = load(g, input)?;
    let (name, theta) = problem.point(input.point.as_deref())?;
    require_critical(&problem, &ctx, &theta)?;
    let act = problem.activation;
    let mut report = ctx.report("saddle", &problem.file);
    report.points.push(point_record(&problem, &ctx, &name, &theta)?);
    if theta.a().iter().any(|a| a.abs() <= ZERO_OUTPUT_TOL) {
        let wit = saddle::saddle_witness(&problem.spec_for(&theta)?, &theta, &problem.samples, radius)?;
        eprintln!("witness: R(up) - R = {:e}, R(down) - R = {:e}", wit.delta_up, wit.delta_down);
        for (kind, p, deltas) in [
            ("perturbed", &wit.theta_tilde, vec![wit.delta_tilde]),
            ("up", &wit.theta_up, vec![wit.delta_up]),
            ("down", &wit.theta_down, vec![wit.delta_down]),
        ] {
            report.saddles.push(SaddleRecord {
                kind: kind.into(),
                radius: Some(radius),
                slot: Some(wit.slot),
                deltas,
                quadratic_form: None,
                a_choice: None,
                a: p.a().to_vec(),
                w: p.w().to_vec(),
            });
        }
    } else {
        let (reduced, _) = operators::minimal_reduce(&theta, &act);
        let r = reduced.width();
        let m = ctx.m_target.unwrap_or(theta.width()).max(r + 1);
        let (branch, nc, rep) = saddle::embedding_saddle_search(&reduced, m, &problem.samples, &act, &ctx.tol)?;
        eprintln!("strict saddle at width {m}: vᵀHv = {:e}, eig_min = {:e}", nc.quadratic_form, rep.eig_min);
        let mut rec = PointRecord::new("embedded_saddle", &nc.theta, &branch);
        rec.criticality = Some(rep);
        report.points.push(rec);
        report.saddles.push(SaddleRecord {
            kind: "embedding".into(),
            radius: None,
            slot: None,
            deltas: Vec::new(),
            quadratic_form: Some(nc.quadratic_form),
            a_choice: Some(nc.a_choice),
            a: nc.theta.a().to_vec(),
            w: nc.theta.w().to_vec(),
        });
    }
    emit(&report, g.output.as_deref())?;
    Ok(0)
}

pub fn connect(g: &GlobalOpts, input: &Input, n_max: usize, interval: Option<usize>) -> Result<u8, CliError> {
    let (problem, ctx) = load(g, input)?;
    let (name, theta) = problem.point(input.point.as_deref())?;
    require_critical(&problem, &ctx, &theta)?;
    let act = problem.activation;
    let branch = operators::locate_branch(&theta, &act);
    let p = branch.partition();
    let long = interval.or_else(|| (0..p.num_intervals()).find(|&j| p.interval_len(j) > 1));
    let seq = match long {
        Some(j) => atlas::connectivity_witness_a(&theta, &branch, j, n_max, &act, &problem.samples)?,
        None if branch.l() >= 2 => {
            let region = ctx.region(theta.input_dim())?;
            let zeros = atlas::common_zero_search(&theta, &problem.samples, &act, &region, ctx.budget.min(256));
            atlas::connectivity_witness_b(
                &theta,
                &branch,
                &zeros,
                branch.r() + 1,
                branch.l() - 2,
                n_max,
                &act,
                &problem.samples,
            )?
        }
        None => {
            return Err(CliError::Check(
                "no interval with two neurons and fewer than two zero-output neurons".into(),
            ))
        }
    };
    let kind = if long.is_some() { "concentrate" } else { "split" };
    eprintln!("{kind}: {} -> {}", seq.source_branch, seq.target_branch);
    let mut report = ctx.report("connect", &problem.file);
    report.points.push(point_record(&problem, &ctx, &name, &theta)?);
    report.witnesses.push(WitnessRecord::new(kind, &seq));
    emit(&report, g.output.as_deref())?;
    Ok(0)
}

type CheckOutcome = Result<(bool, String, String), CliError>;

fn run_check(checks: &mut Vec<CheckRecord>, name: &str, f: impl FnOnce() -> CheckOutcome) {
    let (passed, expected, got) = match f() {
        Ok(v) => v,
        Err(e) => (false, "no error".into(), e.to_string()),
    };
    if passed {
        eprintln!("PASS {name}");
    } else {
        eprintln!("FAIL {name}: expected {expected}, got {got}");
    }
    checks.push(CheckRecord { name: name.into(), passed, expected, got });
}

fn close(got: f64, want: f64, tol: f64) -> (bool, String, String) {
    ((got - want).abs() <= tol, format!("{want:e} ± {tol:e}"), format!("{got:e}"))
}

pub fn verify_example(g: &GlobalOpts, path: Option<&Path>) -> Result<u8, CliError> {
    let file = match path {
        Some(p) => ProblemFile::read(p)?,
        None => example_problem(),
    };
    let problem = file.validate()?;
    let ctx = Ctx::new(g, &problem.file.settings)?;
    let seed = ctx.seed.unwrap_or(0);
    let (_, theta) = problem.point(None)?;
    let act = problem.activation;
    let samples = &problem.samples;
    let spec = problem.spec_for(&theta)?;
    let mut checks = Vec::new();

    run_check(&mut checks, "residuals (-2/3, 0, 1/3, 1/3)", || {
        let e = model::errors(&spec, &theta, samples)?;
        let want = [-2.0 / 3.0, 0.0, 1.0 / 3.0, 1.0 / 3.0];
        let diff = if e.len() == 4 { max_diff(&e, &want) } else { f64::INFINITY };
        Ok((diff <= 1e-12, format!("{want:?}"), format!("{e:?}")))
    });
    run_check(&mut checks, "gradient vanishes", || {
        let n = model::gradient(&spec, &theta, samples)?.norm();
        Ok((n <= 1e-10, "<= 1e-10".into(), format!("{n:e}")))
    });
    run_check(&mut checks, "loss 2/3", || {
        let r = model::loss(&spec, &theta, samples)?;
        Ok(close(r, 2.0 / 3.0, 1e-12 * 2.0 / 3.0))
    });
    let e = model::errors(&spec, &theta, samples)?;
    let w0 = theta.w()[0].clone();
    run_check(&mut checks, "B entry (2,2) = 2/9", || {
        let b = model::error_curvature(&act, &w0, samples, &e, Scale::Raw);
        Ok(close(b[(1, 1)], 2.0 / 9.0, 1e-12))
    });
    run_check(&mut checks, "A entry (2,2) = 22/9 in the Hessian scaling", || {
        let a = model::feature_gram(&act, &w0, samples, Scale::Hessian);
        Ok(close(a[(1, 1)], 22.0 / 9.0, 1e-12))
    });
    run_check(&mut checks, "embedding saddle condition", || {
        let c = saddle::embedding_saddle_condition(&theta, samples, &act);
        Ok((c == Some((0, 0)), "Some((0, 0))".into(), format!("{c:?}")))
    });
    run_check(&mut checks, "tau(0, 1)", || {
        let want = -2.0 / 3.0 + std::f64::consts::E / 3.0 + 1.0 / (3.0 * std::f64::consts::E);
        Ok(close(atlas::tau(&act, &theta, samples, &[0.0, 1.0]), want, 1e-12))
    });
    let region = Region::cube(theta.input_dim(), -3.0, 3.0)?;
    let trace = atlas::trace_manifold(&theta, samples, &act, &region, 10_000);
    run_check(&mut checks, "zero set is the first axis", || {
        let off_axis = trace.points.iter().map(|p| p.get(1).copied().unwrap_or(f64::INFINITY).abs()).fold(0.0, f64::max);
        let res = trace.residuals.iter().copied().fold(0.0, f64::max);
        let ok = trace.len() >= 50 && off_axis <= 1e-8 && res <= 1e-8 && trace.est_dim.known() == Some(1);
        Ok((
            ok,
            ">= 50 points, |w_2| <= 1e-8, |tau| <= 1e-8, dimension 1".into(),
            format!("{} points, |w_2| <= {off_axis:e}, |tau| <= {res:e}, dimension {}", trace.len(), dim_label(trace.est_dim)),
        ))
    });
    run_check(&mut checks, "three pieces at width 3", || {
        let pieces = atlas::enumerate_pieces(&theta, 3, samples, &act, true, &trace)?;
        let got: Vec<(Vec<usize>, usize)> =
            pieces.iter().map(|p| (p.branch.partition().cuts().to_vec(), p.branch.l())).collect();
        let want = vec![(vec![0, 1], 2), (vec![0, 2], 1), (vec![0, 3], 0)];
        Ok((got == want, format!("{want:?}"), format!("{got:?}")))
    });
    run_check(&mut checks, "strict embedding saddle at width 4", || {
        let p = Partition::new(vec![0, 4])?;
        let wide = operators::embed(&theta, &p, &DeltaVector::uniform(&p), &IndexMap::new(vec![], 1)?, &Permutation::identity(4))?;
        let nc = saddle::negative_curvature_direction(&wide, &p, 0, samples, &act)?;
        let rep = saddle::classify(&problem.spec_for(&nc.theta)?, &nc.theta, samples, &ctx.tol)?;
        let ok = (nc.a_choice + 1.0 / 11.0).abs() <= 1e-12
            && (nc.quadratic_form + 22.0 / 1089.0).abs() <= 1e-12
            && rep.classification == Classification::StrictSaddle;
        Ok((
            ok,
            format!("a = {:e}, vᵀHv = {:e}, StrictSaddle", -1.0 / 11.0, -22.0 / 1089.0),
            format!("a = {:e}, vᵀHv = {:e}, {:?}", nc.a_choice, nc.quadratic_form, rep.classification),
        ))
    });
    run_check(&mut checks, "zero-output neuron gives a saddle", || {
        let v = trace.points.get(trace.len() / 2).cloned().ok_or_else(|| CliError::Check("empty trace".into()))?;
        let p = ParamPoint::new(vec![theta.a()[0], 0.0], vec![w0.clone(), v])?;
        let sp = problem.spec_for(&p)?;
        let rep = saddle::classify(&sp, &p, samples, &ctx.tol)?;
        let deltas: Vec<(f64, f64)> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|r| saddle::saddle_witness(&sp, &p, samples, *r).map(|w| (w.delta_up, w.delta_down)))
            .collect::<Result<_, _>>()?;
        let ok = rep.classification == Classification::SaddleWitnessed && deltas.iter().all(|(u, d)| *u > 0.0 && *d < 0.0);
        Ok((ok, "SaddleWitnessed, R(down) < R < R(up) at 3 radii".into(), format!("{:?}, {deltas:?}", rep.classification)))
    });
    let delta = ChaCha8Rng::seed_from_u64(seed).random_range(0.1..0.9);
    let split = ParamPoint::new(vec![delta * theta.a()[0], (1.0 - delta) * theta.a()[0]], vec![w0.clone(), w0.clone()])?;
    run_check(&mut checks, "split point connects to a zero-output branch", || {
        let branch = BranchId::new(1, 0, Partition::new(vec![0, 2])?, Permutation::identity(2))?;
        let seq = atlas::connectivity_witness_a(&split, &branch, 0, 10, &act, samples)?;
        let d = seq.distances();
        let ok = seq.grad_norms.iter().all(|g| *g <= 1e-10)
            && d.windows(2).all(|p| p[1] < p[0])
            && (seq.target_branch.r(), seq.target_branch.l()) == (1, 1);
        Ok((
            ok,
            "critical at 1e-10, decreasing distance, limit in r=1 l=1".into(),
            format!("max grad {:e}, limit r={} l={}", seq.grad_norms.iter().copied().fold(0.0, f64::max), seq.target_branch.r(), seq.target_branch.l()),
        ))
    });
    run_check(&mut checks, "segment of critical points to a saddle", || {
        let branch = BranchId::new(1, 0, Partition::new(vec![0, 2])?, Permutation::identity(2))?;
        let seg = saddle::segment_to_saddle(&split, &branch, 0, samples, &act)?;
        let g = seg.grad_norms.iter().copied().fold(0.0, f64::max);
        let ok = g <= 1e-10 && seg.loss_deviation <= 1e-12 && seg.points.len() == 11;
        Ok((ok, "11 samples, grad <= 1e-10, loss change <= 1e-12".into(), format!("{} samples, grad {g:e}, loss change {:e}", seg.points.len(), seg.loss_deviation)))
    });

    let failed = checks.iter().filter(|c| !c.passed).count();
    let mut report = ctx.report("verify-example", &problem.file);
    report.meta.seed = Some(seed);
    let branch = operators::locate_branch(&theta, &act);
    let mut rec = PointRecord::new("theta_prime", &theta, &branch);
    rec.errors = e;
    rec.criticality = Some(saddle::classify(&spec, &theta, samples, &ctx.tol)?);
    report.points.push(rec);
    report.checks = checks;
    emit(&report, g.output.as_deref())?;
    eprintln!("{} of {} checks passed", report.checks.len() - failed, report.checks.len());
    Ok(if failed == 0 { 0 } else { 1 })
}
