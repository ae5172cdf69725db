//! Suite orchestration: runs the selected suites over every model of a
//! configuration and collects reports in canonical order.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ModelCase, RunConfig};
use crate::error::{Error, Result};
use crate::geometry::{
    asymptotic_nonnegativity_profile, check_mean_inequality, classify_volume_growth,
    curvature_radii, eval_curvature, verify_bochner_radial, verify_comparison_sharpness,
    verify_laplacian_comparison, verify_volume_comparison, verify_warped_ricci,
};
use crate::heat::{
    harnack_pairs, verify_averaging_identity, verify_euclidean_oracle, verify_gaussian_lower,
    verify_gaussian_upper, verify_harnack, verify_initial_normalization, verify_li_yau,
    verify_mass_and_positivity, verify_phi_form_bound, verify_semigroup_crosscheck,
    verify_varadhan, AveragingPlan, CrosscheckPlan, LiYauWindow, SamplePlan, SpectralKernel,
};
use crate::model::{Boundary, RadialWarp, WarpedProductModel, Weight, WeightedModel};
use crate::operator::tridiag::RESIDUAL_TOL;
use crate::operator::{
    cheng_bound_check, eigen_solve, extrapolated_eigenvalues, verify_collapse_identities,
    PoleCondition, SturmLiouvilleOp,
};
use crate::probe::{
    certify_interval, delta_r_integral_check, lp_hypothesis_certificate, ornstein_uhlenbeck,
    verify_hermite_spectrum, verify_negative_control,
};
use crate::report::{fmt_num, BoundReport, Severity, Table, Verdict};

pub const COLLAPSE_EPSILONS: [f64; 4] = [1.0, 0.5, 0.1, 0.01];
/// Relative tolerance of the sector identities: exact up to solver residual.
pub const COLLAPSE_TOL: f64 = 1e-10;
pub const COLLAPSE_MODES: usize = 10;
pub const RICCI_RADII: usize = 50;
pub const HEAT_T_MIN: f64 = 0.02;
pub const LIYAU_T_MIN: f64 = 0.05;
pub const LIYAU_ALPHA: f64 = 2.0;
pub const PHI_BETA: f64 = 1.0;
pub const EUCLIDEAN_ORACLE_TOL: f64 = 1e-4;
pub const VARADHAN_TIMES: [f64; 4] = [1e-3, 2e-3, 5e-3, 1e-2];
pub const WEYL_LAMBDAS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
/// Domain radius of the Weyl probe when the configured one is too small
/// for three doublings of the cutoff radius.
pub const WEYL_RADIUS: f64 = 170.0;
pub const CONTROL_RADIUS: f64 = 330.0;
pub const CONTROL_RADII: [f64; 4] = [10.0, 20.0, 40.0, 80.0];
pub const CONTROL_SEPARATION: f64 = 10.0;
pub const HERMITE_TOL: f64 = 1e-6;
pub const DELTA_R_EPSILON: f64 = 0.1;

/// Numerical settings shared by every suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    /// Operator cells for eigenvalue suites.
    pub grid: usize,
    /// Operator cells for heat kernels (`5/2` of `grid`).
    pub heat_cells: usize,
    pub tol: f64,
    pub delta: f64,
    pub seed: u64,
    pub matrix: bool,
}

impl Settings {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            grid: cfg.run.grid,
            heat_cells: cfg.run.grid * 5 / 2,
            tol: cfg.run.tol,
            delta: cfg.run.delta,
            seed: cfg.run.seed,
            matrix: cfg.run.matrix,
        }
    }

    fn plan(&self) -> SamplePlan {
        SamplePlan {
            seed: self.seed,
            ..SamplePlan::default()
        }
    }
}

/// A report tied to a model (index into the run's model list) or to the
/// whole run.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub model: Option<usize>,
    pub report: BoundReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRecord {
    pub model: Option<usize>,
    pub name: String,
    pub table: Table,
}

#[derive(Debug, Clone, Serialize)]
pub struct DataRecord {
    pub model: Option<usize>,
    pub name: String,
    pub value: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub model: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub checks: Vec<CheckRecord>,
    pub tables: Vec<TableRecord>,
    pub data: Vec<DataRecord>,
    pub errors: Vec<ErrorRecord>,
}

impl SuiteResult {
    /// Hard checks that failed, as `(model, check)`.
    pub fn hard_failures(&self) -> Vec<(Option<usize>, String)> {
        self.checks
            .iter()
            .filter(|c| c.report.severity == Severity::Hard && c.report.verdict == Verdict::Fail)
            .map(|c| (c.model, c.report.check.clone()))
            .collect()
    }

    /// Soft failures and inconclusive hard checks.
    pub fn warnings(&self) -> Vec<(Option<usize>, String)> {
        self.checks
            .iter()
            .filter(|c| match (c.report.severity, c.report.verdict) {
                (Severity::Soft, Verdict::Fail | Verdict::Inconclusive) => true,
                (Severity::Hard, Verdict::Inconclusive) => true,
                _ => false,
            })
            .map(|c| (c.model, c.report.check.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub models: Vec<ModelSummary>,
    pub settings: Settings,
    pub suites: Vec<SuiteResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub index: usize,
    pub label: String,
    pub n: usize,
    pub q: usize,
    pub epsilon: f64,
    pub radius: f64,
    pub warp: String,
    pub warp_params: Vec<f64>,
    pub weight: String,
    pub weight_params: Vec<f64>,
}

impl RunOutcome {
    /// 0 when every hard check passed and nothing errored, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        let bad = self
            .suites
            .iter()
            .any(|s| !s.errors.is_empty() || !s.hard_failures().is_empty());
        i32::from(bad)
    }
}

/// Output of one suite on one model.
#[derive(Default)]
struct Part {
    checks: Vec<BoundReport>,
    tables: Vec<(String, Table)>,
    data: Vec<(String, serde_json::Value)>,
    errors: Vec<String>,
}

impl Part {
    fn check(&mut self, r: Result<BoundReport>) {
        match r {
            Ok(rep) => self.checks.push(rep),
            Err(e) => self.errors.push(e.to_string()),
        }
    }
}

/// Kernels shared by the heat, bounds, Li–Yau and Harnack suites.
struct Kernels<'a> {
    model: &'a WeightedModel,
    cells: usize,
    primary: Option<SpectralKernel>,
    neumann: Option<(WeightedModel, SpectralKernel)>,
}

impl<'a> Kernels<'a> {
    fn new(model: &'a WeightedModel, cells: usize) -> Self {
        Self {
            model,
            cells,
            primary: None,
            neumann: None,
        }
    }

    fn primary(&mut self) -> Result<&SpectralKernel> {
        if self.primary.is_none() {
            self.primary = Some(SpectralKernel::new(self.model, self.cells, HEAT_T_MIN)?);
        }
        Ok(self.primary.as_ref().expect("set above"))
    }

    fn neumann(&mut self) -> Result<&(WeightedModel, SpectralKernel)> {
        if self.neumann.is_none() {
            let m = self.model.with_bc(Boundary::Neumann);
            let k = SpectralKernel::new(&m, self.cells, LIYAU_T_MIN)?;
            self.neumann = Some((m, k));
        }
        Ok(self.neumann.as_ref().expect("set above"))
    }
}

/// Run the configured suites. Suites run in dependency order; models are
/// processed in parallel and reassembled in configuration order.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let cases = cfg.cases()?;
    let settings = Settings::from_config(cfg);
    let suites = &cfg.run.suites;
    let single = cases.len() == 1 && !settings.matrix;
    let per_case: Vec<Vec<Part>> = cases
        .par_iter()
        .map(|case| {
            let mut kernels = Kernels::new(&case.model, settings.heat_cells);
            suites
                .iter()
                .map(|s| run_suite(s, case, &settings, &mut kernels, single))
                .collect()
        })
        .collect();
    let mut results = Vec::with_capacity(suites.len());
    for (si, suite) in suites.iter().enumerate() {
        let mut res = SuiteResult {
            suite: suite.clone(),
            ..SuiteResult::default()
        };
        for (mi, parts) in per_case.iter().enumerate() {
            absorb(&mut res, Some(mi), &parts[si]);
        }
        if suite == "weyl" {
            absorb(&mut res, None, &weyl_global(&settings));
        }
        results.push(res);
    }
    let models = cases
        .iter()
        .enumerate()
        .map(|(index, c)| ModelSummary {
            index,
            label: c.label(),
            n: c.model.n,
            q: c.q,
            epsilon: c.epsilon,
            radius: c.model.radius,
            warp: c.model.warp.family().to_string(),
            warp_params: c.model.warp.params(),
            weight: c.model.weight.family().to_string(),
            weight_params: c.model.weight.params(),
        })
        .collect();
    Ok(RunOutcome {
        models,
        settings,
        suites: results,
    })
}

fn absorb(res: &mut SuiteResult, model: Option<usize>, part: &Part) {
    res.checks.extend(part.checks.iter().map(|r| CheckRecord {
        model,
        report: r.clone(),
    }));
    res.tables
        .extend(part.tables.iter().map(|(name, t)| TableRecord {
            model,
            name: name.clone(),
            table: t.clone(),
        }));
    res.data
        .extend(part.data.iter().map(|(name, v)| DataRecord {
            model,
            name: name.clone(),
            value: v.clone(),
        }));
    res.errors.extend(part.errors.iter().map(|m| ErrorRecord {
        model,
        message: m.clone(),
    }));
}

fn run_suite(
    suite: &str,
    case: &ModelCase,
    s: &Settings,
    kernels: &mut Kernels<'_>,
    single: bool,
) -> Part {
    let mut part = Part::default();
    let outcome = match suite {
        "curvature" => curvature(&mut part, case, s),
        "prop31" => warped_ricci(&mut part, case, s),
        "comparison" => comparison(&mut part, case),
        "volume" => volume(&mut part, case),
        "eigs" => eigs(&mut part, case, s),
        "collapse" => collapse(&mut part, case, s),
        "heat" => heat(&mut part, case, s, kernels, single),
        "bounds" => bounds(&mut part, case, s, kernels),
        "liyau" => liyau(&mut part, case, kernels),
        "harnack" => harnack(&mut part, case, kernels),
        "weyl" => weyl(&mut part, case),
        "lp-cert" => lp_cert(&mut part, case),
        other => Err(Error::Config(format!("unknown suite `{other}`"))),
    };
    if let Err(e) = outcome {
        part.errors.push(e.to_string());
    }
    part
}

/// `count` radii evenly spaced in `(0, R̄)`, excluding both ends.
fn interior_radii(radius: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|i| radius * i as f64 / (count + 1) as f64)
        .collect()
}

fn curvature(part: &mut Part, case: &ModelCase, s: &Settings) -> Result<()> {
    let model = &case.model;
    let profile = eval_curvature(model, case.q, &curvature_radii(model, s.grid))?;
    let step = (profile.radii.len() / 50).max(1);
    let mut table = Table::new(&[
        "r",
        "ric_radial",
        "ric_tangential",
        "ricf_radial",
        "ricfq_radial",
        "ricfq_tangential",
    ]);
    for i in (step - 1..profile.radii.len()).step_by(step) {
        let tangential = |v: &Vec<f64>| v.get(i).map(|x| fmt_num(*x)).unwrap_or_default();
        table.push(vec![
            fmt_num(profile.radii[i]),
            fmt_num(profile.ric_radial[i]),
            tangential(&profile.ric_tangential),
            fmt_num(profile.ricf_radial[i]),
            fmt_num(profile.ricfq_radial[i]),
            tangential(&profile.ricfq_tangential),
        ]);
    }
    part.tables.push(("curvature_profile".into(), table));
    let asymptotic = asymptotic_nonnegativity_profile(model, case.q)?;
    part.data.push((
        "curvature".into(),
        json!({
            "K": profile.k,
            "deficit_tail": asymptotic.tail,
            "asymptotically_nonnegative": asymptotic.nonnegative,
        }),
    ));

    let radii = interior_radii(model.radius, RICCI_RADII);
    let u = |r: f64| [r.sin(), r.cos(), -r.sin(), -r.cos()];
    part.check(verify_bochner_radial(model, &u, &radii, s.tol));
    // the mean inequality as used on Δ_f r = Δr - f'
    let mut samples = Vec::with_capacity(radii.len());
    for &r in &radii {
        let dr = model.drift_laplacian_radius(r)? + model.weight_jet(r)?.d1;
        samples.push((dr, -model.weight_jet(r)?.d1, model.n as f64, case.q as f64));
    }
    part.check(check_mean_inequality(&samples));
    Ok(())
}

fn warped_ricci(part: &mut Part, case: &ModelCase, s: &Settings) -> Result<()> {
    if case.model.n < 2 {
        part.data.push((
            "skipped".into(),
            json!("warped-product Ricci blocks need n >= 2"),
        ));
        return Ok(());
    }
    let (qs, eps): (Vec<usize>, Vec<f64>) = if s.matrix {
        (vec![1, 2, 3], vec![1.0, 0.1])
    } else {
        (vec![case.q], vec![case.epsilon])
    };
    let radii = interior_radii(case.model.radius, RICCI_RADII);
    let mut table = Table::new(&["q", "epsilon", "max_discrepancy", "verdict"]);
    for &q in &qs {
        for &e in &eps {
            let wp = WarpedProductModel::new(case.model.clone(), q, e)?;
            let mut rep = verify_warped_ricci(&wp, &radii, s.tol)?;
            rep.note(format!("q={q} epsilon={e}"));
            table.push(vec![
                q.to_string(),
                fmt_num(e),
                fmt_num(rep.max_discrepancy()),
                format!("{:?}", rep.verdict).to_lowercase(),
            ]);
            part.checks.push(rep);
        }
    }
    part.tables.push(("discrepancy".into(), table));
    Ok(())
}

fn comparison(part: &mut Part, case: &ModelCase) -> Result<()> {
    let model = &case.model;
    let radii = interior_radii(model.radius, RICCI_RADII);
    part.check(verify_laplacian_comparison(model, case.q, &radii));
    if model.n >= 2 && model.weight.is_zero() && matches!(model.warp, RadialWarp::Hyperbolic { .. })
    {
        part.check(verify_comparison_sharpness(model, &radii, 1e-6));
    }
    Ok(())
}

fn volume(part: &mut Part, case: &ModelCase) -> Result<()> {
    let model = &case.model;
    let r = model.radius;
    let mut pairs = Vec::new();
    for small in [1.0, 2.0] {
        for big in [0.5 * r, r] {
            if small < big {
                pairs.push((small, big));
            }
        }
    }
    let (derived, displayed) = verify_volume_comparison(model, case.q, &pairs)?;
    part.checks.push(derived);
    part.checks.push(displayed);
    let grid: Vec<f64> = (0..24)
        .map(|i| 0.5 * (2.0 * r).powf(i as f64 / 23.0))
        .collect();
    let growth = classify_volume_growth(model, &[0.05, 0.1, 0.2, 0.5], &grid)?;
    part.data.push((
        "growth".into(),
        json!({
            "class": growth.class,
            "outer_slope": growth.outer_slope,
            "tail_slope": growth.tail_slope,
            "envelope": growth.envelope,
            "total_volume": growth.total_volume,
            "note": growth.note,
        }),
    ));
    part.tables.push(("log_volume".into(), growth.evidence));
    Ok(())
}

fn eigs(part: &mut Part, case: &ModelCase, s: &Settings) -> Result<()> {
    let model = &case.model;
    let k = COLLAPSE_MODES;
    let op = SturmLiouvilleOp::assemble(model, s.grid)?;
    let dec = eigen_solve(&op, k)?;
    let mut gram = BoundReport::new("eigen_gram", Severity::Hard, &["form"]);
    gram.push_le(
        vec![0.0],
        dec.gram_defect(),
        1e-10,
        crate::report::Split::Check,
    );
    if model.bc == Boundary::Dirichlet {
        // solver residual slack: λ₁ can be 0 up to e^{-f(R̄)}
        let slack = RESIDUAL_TOL * dec.eigenvalues[k - 1].abs().max(1.0);
        gram.push_le(
            vec![1.0],
            -slack,
            dec.eigenvalues[0],
            crate::report::Split::Check,
        );
    }
    gram.note("form 0: weighted Gram defect, form 1: λ₁ ≥ 0 under Dirichlet data");
    part.checks.push(gram.finish());

    let ex = extrapolated_eigenvalues(model, PoleCondition::Natural, s.grid, k)?;
    let mut table = Table::new(&["index", "coarse", "medium", "fine", "extrapolated", "order"]);
    for i in 0..k {
        table.push(vec![
            (i + 1).to_string(),
            fmt_num(ex.coarse[i]),
            fmt_num(ex.medium[i]),
            fmt_num(ex.fine[i]),
            fmt_num(ex.extrapolated[i]),
            fmt_num(ex.orders[i]),
        ]);
    }
    part.tables.push(("eigenvalues".into(), table));

    let r = model.radius;
    let (standard, displayed, table) =
        cheng_bound_check(model, case.q, &[0.25 * r, 0.5 * r, 0.75 * r, r], s.grid)?;
    part.data.push((
        "cheng".into(),
        json!({
            "lambda_1": dec.eigenvalues[0],
            "standard_bound": table.rows.last().map(|row| row[2].clone()),
            "displayed_bound": table.rows.last().map(|row| row[3].clone()),
            "exceeds_displayed": displayed.verdict == Verdict::Fail,
        }),
    ));
    part.checks.push(standard);
    part.checks.push(displayed);
    part.tables.push(("cheng".into(), table));
    Ok(())
}

fn collapse(part: &mut Part, case: &ModelCase, s: &Settings) -> Result<()> {
    let wp = case.product()?;
    let rep = verify_collapse_identities(
        &wp,
        COLLAPSE_MODES,
        &COLLAPSE_EPSILONS,
        COLLAPSE_TOL,
        s.grid,
    )?;
    part.data.push((
        "collapse".into(),
        json!({
            "crossover_epsilon": rep.crossover,
            "epsilons": COLLAPSE_EPSILONS,
            "modes": COLLAPSE_MODES,
        }),
    ));
    part.checks.push(rep.identity);
    part.checks.push(rep.convergence);
    part.tables.push(("convergence".into(), rep.table));
    Ok(())
}

fn heat(
    part: &mut Part,
    case: &ModelCase,
    s: &Settings,
    kernels: &mut Kernels<'_>,
    single: bool,
) -> Result<()> {
    let model = &case.model;
    {
        let kernel = kernels.primary()?;
        part.check(verify_mass_and_positivity(
            kernel,
            &[HEAT_T_MIN, 0.1, 1.0, 10.0],
        ));
        part.check(verify_initial_normalization(
            model,
            kernel,
            &[0.2, 0.1, 0.05],
        ));
    }
    {
        let (_, kernel) = kernels.neumann()?;
        part.check(verify_mass_and_positivity(
            kernel,
            &[LIYAU_T_MIN, 0.1, 1.0, 10.0],
        ));
    }
    part.check(verify_semigroup_crosscheck(
        model,
        CrosscheckPlan {
            cells: s.grid,
            steps: 400,
        },
        0.1,
        0.2,
        1e-6,
    ));
    if matches!(model.warp, RadialWarp::Euclidean) && model.weight.is_zero() {
        let ball = WeightedModel::euclidean(model.n, Weight::Zero, 12.0, Boundary::Dirichlet)?;
        let kernel = SpectralKernel::new(&ball, 2400, 0.2)?;
        part.check(verify_euclidean_oracle(
            &kernel,
            model.n,
            &[0.25, 0.5, 1.0],
            EUCLIDEAN_ORACLE_TOL,
        ));
    }
    if single && case.q == 1 {
        let av = verify_averaging_identity(
            &case.product()?,
            &[0.05, 0.2, 0.5],
            1e-3,
            &AveragingPlan::default(),
        )?;
        part.checks.extend([
            av.identity,
            av.refinement,
            av.fiber_constancy,
            av.mode_decay,
            av.normalization,
        ]);
        part.tables.push(("averaging".into(), av.table));
    }
    Ok(())
}

fn bounds(
    part: &mut Part,
    case: &ModelCase,
    s: &Settings,
    kernels: &mut Kernels<'_>,
) -> Result<()> {
    let model = &case.model;
    let plan = s.plan();
    {
        let kernel = kernels.primary()?;
        part.check(verify_gaussian_upper(
            model,
            case.q,
            kernel,
            &plan,
            s.delta,
            &[],
        ));
        part.check(verify_gaussian_lower(
            model,
            case.q,
            kernel,
            &plan,
            s.delta,
            &[],
        ));
        part.check(verify_phi_form_bound(
            model, case.q, kernel, PHI_BETA, &plan,
        ));
    }
    if model.radius >= 2.0 {
        let small = model.with_radius(2.0)?;
        let kernel = SpectralKernel::new(&small, 2000, VARADHAN_TIMES[0])?;
        part.check(verify_varadhan(&kernel, &VARADHAN_TIMES));
    }
    Ok(())
}

fn liyau(part: &mut Part, case: &ModelCase, kernels: &mut Kernels<'_>) -> Result<()> {
    let (model, kernel) = kernels.neumann()?;
    part.check(verify_li_yau(
        model,
        case.q,
        kernel,
        LIYAU_ALPHA,
        &LiYauWindow::default(),
        0.0,
    ));
    Ok(())
}

fn harnack(part: &mut Part, case: &ModelCase, kernels: &mut Kernels<'_>) -> Result<()> {
    let (model, kernel) = kernels.neumann()?;
    let pairs = harnack_pairs(kernel, &LiYauWindow::default());
    part.check(verify_harnack(model, case.q, kernel, LIYAU_ALPHA, &pairs));
    Ok(())
}

fn weyl(part: &mut Part, case: &ModelCase) -> Result<()> {
    let mut model = case.model.clone();
    if model.radius < WEYL_RADIUS {
        // three doublings with 4R < R̄ need a long domain; extend when the
        // warp allows it
        if let Ok(longer) = weyl_domain(&model) {
            model = longer;
        }
    }
    let top = 0.24 * model.radius;
    let radii = [top / 8.0, top / 4.0, top / 2.0, top];
    let rep = certify_interval(&model, case.q, &WEYL_LAMBDAS, &radii)?;
    let severity = if rep.advisory() {
        Severity::Info
    } else {
        Severity::Soft
    };
    let mut check = BoundReport::new("weyl_certificate", severity, &["lambda", "form"]);
    for v in &rep.verdicts {
        check.push_le(
            vec![v.lambda, 0.0],
            v.exponent,
            rep.decay_exponent,
            crate::report::Split::Check,
        );
        check.push_le(
            vec![v.lambda, 1.0],
            f64::from(u8::from(!v.monotone)),
            0.0,
            crate::report::Split::Check,
        );
        check.push_le(
            vec![v.lambda, 2.0],
            f64::from(u8::from(!v.within_bound)),
            0.0,
            crate::report::Split::Check,
        );
    }
    check.constant("probe_radius", model.radius);
    check.constant("deficit_tail", rep.deficit_tail);
    check.note("form 0: decay exponent, form 1: monotone decrease, form 2: a-priori bound");
    if rep.advisory() {
        check.note("curvature hypothesis not met: verdicts are advisory");
    }
    part.checks.push(check.finish());
    part.tables.push(("quotients".into(), rep.table()));
    part.data.push((
        "weyl".into(),
        json!({
            "probe_radius": model.radius,
            "hypothesis": rep.hypothesis,
            "consistent": rep.consistent,
            "verdicts": rep.verdicts,
        }),
    ));
    Ok(())
}

fn weyl_domain(model: &WeightedModel) -> Result<WeightedModel> {
    match &model.warp {
        RadialWarp::Tabulated(_) => WeightedModel::new(
            model.n,
            RadialWarp::cone_profile(WEYL_RADIUS)?,
            model.weight.clone(),
            WEYL_RADIUS,
            model.bc,
        ),
        _ => model.with_radius(WEYL_RADIUS),
    }
}

/// Checks of the Weyl suite that do not depend on the configured models.
fn weyl_global(_: &Settings) -> Part {
    let mut part = Part::default();
    part.check(verify_hermite_spectrum(12.0, 400, 10, HERMITE_TOL));
    let control = ornstein_uhlenbeck(CONTROL_RADIUS).and_then(|control| {
        let reference = WeightedModel::euclidean(
            2,
            Weight::LogPoly { c: 1.0 },
            CONTROL_RADIUS,
            Boundary::Dirichlet,
        )?;
        verify_negative_control(
            &control,
            0.7,
            &reference,
            1.0,
            &CONTROL_RADII,
            CONTROL_SEPARATION,
        )
    });
    part.check(control);
    part
}

fn lp_cert(part: &mut Part, case: &ModelCase) -> Result<()> {
    let model = &case.model;
    let cert = lp_hypothesis_certificate(model, case.q)?;
    part.data
        .push(("lp_certificate".into(), serde_json::to_value(&cert)?));
    let r = model.radius;
    // the estimate needs limsup Δ_f r <= 0; read as Δ_f r(R̄) <= ε/4
    if model.drift_laplacian_radius(r)? <= 0.25 * DELTA_R_EPSILON && r > 4.0 {
        part.check(delta_r_integral_check(
            model,
            DELTA_R_EPSILON,
            1.0,
            &[0.25 * r, 0.5 * r, r - 1.0],
        ));
    } else {
        part.data.push((
            "delta_r_integral".into(),
            json!("not applicable: Δ_f r exceeds ε/4 at the domain boundary"),
        ));
    }
    Ok(())
}
