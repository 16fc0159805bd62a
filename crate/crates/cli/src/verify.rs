//! Randomised property suites over one parameter set.

use liebundle::algebra::{
    bracket, bracket_matrix, max_abs, skew_residual, sym_residual, trace_pair, DeformationParams, DualPoint,
    SkewElement, SymElement,
};
use liebundle::poisson::{
    bracket_of_gradients, bracket_scale, coadjoint, finite_difference_gradient, gradient, pencil_integrals,
    CasimirField, DegenerateCasimirField, PencilSpec, QuadraticField, ScalarField,
};
use liebundle::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{RunConfig, Tolerances, VerifyBlock};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    /// Worst relative residual seen.
    pub residual: f64,
    pub tol: f64,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub a: Vec<f64>,
    pub seed: u64,
    pub trials: usize,
    pub results: Vec<PropertyResult>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!("verify n={} a={:?} seed={} trials={}\n", self.n, self.a, self.seed, self.trials);
        for r in &self.results {
            let tag = match r.outcome {
                Outcome::Pass => "PASS",
                Outcome::Fail => "FAIL",
                Outcome::Skipped => "SKIP",
            };
            out += &format!("  {tag}  {:<24} residual {:.3e}  tol {:.1e}", r.name, r.residual, r.tol);
            if let Some(note) = &r.note {
                out += &format!("  ({note})");
            }
            out.push('\n');
        }
        out += if self.passed { "all properties hold\n" } else { "property failures\n" };
        out
    }
}

struct Tols {
    jacobi: f64,
    closure: f64,
    linearity: f64,
    duality: f64,
    pencil: f64,
    casimir: f64,
    gradient: f64,
    involution: f64,
}

impl From<Tolerances> for Tols {
    fn from(t: Tolerances) -> Self {
        Self {
            jacobi: t.jacobi.unwrap_or(1e-10),
            closure: t.closure.unwrap_or(1e-12),
            linearity: t.linearity.unwrap_or(1e-12),
            duality: t.duality.unwrap_or(1e-12),
            pencil: t.pencil.unwrap_or(1e-11),
            casimir: t.casimir.unwrap_or(1e-9),
            gradient: t.gradient.unwrap_or(1e-6),
            involution: t.involution.unwrap_or(1e-9),
        }
    }
}

fn rel(v: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        v.abs() / scale
    } else {
        v.abs()
    }
}

fn judged(name: impl Into<String>, residual: f64, tol: f64) -> PropertyResult {
    // NaN residuals fail
    let outcome = if residual <= tol { Outcome::Pass } else { Outcome::Fail };
    PropertyResult {
        name: name.into(),
        residual,
        tol,
        outcome,
        note: None,
    }
}

fn skipped(name: impl Into<String>, tol: f64, note: impl Into<String>) -> PropertyResult {
    PropertyResult {
        name: name.into(),
        residual: 0.0,
        tol,
        outcome: Outcome::Skipped,
        note: Some(note.into()),
    }
}

fn failed(name: impl Into<String>, tol: f64, note: impl Into<String>) -> PropertyResult {
    PropertyResult {
        name: name.into(),
        residual: f64::INFINITY,
        tol,
        outcome: Outcome::Fail,
        note: Some(note.into()),
    }
}

/// Resolved inputs of a verification run. `s` is taken as given, without a
/// membership check, so that a corrupted bracket matrix is reported by the
/// suites rather than rejected up front.
pub struct VerifyInput {
    pub params: DeformationParams,
    pub s: SymElement,
    pub w: Option<SymElement>,
    pub seed: u64,
    pub block: VerifyBlock,
    pub tolerances: Tolerances,
}

impl VerifyInput {
    pub fn from_config(cfg: &RunConfig) -> Result<Self, CliError> {
        let params = cfg.deformation()?;
        let s = match &cfg.s {
            Some(spec) => SymElement::from_matrix_unchecked(&params, spec.dense("s", &params)?)
                .map_err(|e| CliError::Config(format!("at `s`: {e}")))?,
            None => SymElement::identity(&params),
        };
        let w = cfg.w.as_ref().map(|spec| spec.element("w", &params)).transpose()?;
        Ok(Self {
            params,
            s,
            w,
            seed: cfg.seed,
            block: cfg.verify.clone().unwrap_or_default(),
            tolerances: cfg.tolerances(),
        })
    }
}

pub fn run(input: &VerifyInput) -> Result<VerifyReport, CliError> {
    let p = &input.params;
    let s = &input.s;
    let tol = Tols::from(input.tolerances);
    let trials = input.block.trials.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(input.seed);
    let mut results = Vec::new();

    // the second structure defaults to a random member drawn from the seed
    let w = match &input.w {
        Some(w) => w.clone(),
        None => sample::sym(p, &mut rng),
    };

    results.push(judged("s_membership", rel(sym_residual(p, s.matrix()), s.max_abs().max(1.0)), tol.closure));
    results.push(closure(p, s, trials, &mut rng, tol.closure));
    results.push(jacobi(p, s, trials, &mut rng, tol.jacobi));
    results.push(linearity(p, s, &w, trials, &mut rng, tol.linearity));
    results.push(duality(p, s, trials, &mut rng, tol.duality));
    results.push(pencil(p, s, &w, trials, &mut rng, tol.pencil)?);
    for &l in &input.block.casimir_orders {
        results.push(casimir_centrality(p, s, l, trials, &mut rng, tol.casimir)?);
    }
    results.push(gradients(p, s, &input.block.casimir_orders, trials, &mut rng, tol.gradient)?);
    results.push(involution(p, s, &w, input.block.pencil_order, trials, &mut rng, tol.involution)?);

    let passed = results.iter().all(|r| r.outcome != Outcome::Fail);
    Ok(VerifyReport {
        n: p.n(),
        a: p.a().to_vec(),
        seed: input.seed,
        trials,
        results,
        passed,
    })
}

fn closure(p: &DeformationParams, s: &SymElement, trials: usize, rng: &mut ChaCha8Rng, tol: f64) -> PropertyResult {
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let (x, y) = (sample::skew(p, rng), sample::skew(p, rng));
        let z = bracket_matrix(x.matrix(), y.matrix(), s.matrix());
        let scale = x.max_abs() * y.max_abs() * s.max_abs();
        worst = worst.max(rel(skew_residual(p, &z), scale));
    }
    judged("closure", worst, tol)
}

fn jacobi(p: &DeformationParams, s: &SymElement, trials: usize, rng: &mut ChaCha8Rng, tol: f64) -> PropertyResult {
    let sm = s.matrix();
    let br = |u: &nalgebra::DMatrix<f64>, v: &nalgebra::DMatrix<f64>| bracket_matrix(u, v, sm);
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let [x, y, z] = [(); 3].map(|_| sample::skew(p, rng));
        let (x, y, z) = (x.matrix(), y.matrix(), z.matrix());
        let cyc = br(x, &br(y, z)) + br(y, &br(z, x)) + br(z, &br(x, y));
        let scale = max_abs(x) * max_abs(y) * max_abs(z) * s.max_abs().powi(2);
        worst = worst.max(rel(max_abs(&cyc), scale));
    }
    judged("jacobi", worst, tol)
}

fn linearity(
    p: &DeformationParams,
    s: &SymElement,
    w: &SymElement,
    trials: usize,
    rng: &mut ChaCha8Rng,
    tol: f64,
) -> PropertyResult {
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let (x, y) = (sample::skew(p, rng), sample::skew(p, rng));
        let lambda: f64 = rng.gen_range(-3.0..3.0);
        let mixed = s.matrix() + w.matrix() * lambda;
        let lhs = bracket_matrix(x.matrix(), y.matrix(), &mixed);
        let rhs = bracket_matrix(x.matrix(), y.matrix(), s.matrix())
            + bracket_matrix(x.matrix(), y.matrix(), w.matrix()) * lambda;
        let scale = x.max_abs() * y.max_abs() * max_abs(&mixed).max(s.max_abs());
        worst = worst.max(rel(max_abs(&(lhs - rhs)), scale));
    }
    judged("s_linearity", worst, tol)
}

fn duality(p: &DeformationParams, s: &SymElement, trials: usize, rng: &mut ChaCha8Rng, tol: f64) -> PropertyResult {
    let basis = SkewElement::basis(p);
    let mut worst = 0.0_f64;
    // a basis sweep is n⁴ pairs; a few points are enough
    for _ in 0..trials.clamp(1, 4) {
        let rho = sample::dual(p, rng);
        for x in &basis {
            let Ok(ad) = coadjoint(x, &rho, s) else {
                return failed("duality", tol, "coadjoint failed");
            };
            for y in &basis {
                let Ok(xy) = bracket(x, y, s) else {
                    return failed("duality", tol, "bracket failed");
                };
                let d = trace_pair(&ad, y) - trace_pair(&rho, &xy);
                worst = worst.max(rel(d, rho.max_abs() * s.max_abs()));
            }
        }
    }
    judged("duality", worst, tol)
}

fn random_quadratic(p: &DeformationParams, rng: &mut ChaCha8Rng) -> Result<QuadraticField, CliError> {
    let dim = p.skew_dim();
    let lin: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Ok(QuadraticField::new(p, sample::matrix(dim, rng))?.with_linear(lin)?)
}

fn pencil(
    p: &DeformationParams,
    s: &SymElement,
    w: &SymElement,
    trials: usize,
    rng: &mut ChaCha8Rng,
    tol: f64,
) -> Result<PropertyResult, CliError> {
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let rho = sample::dual(p, rng);
        let (f, g) = (random_quadratic(p, rng)?, random_quadratic(p, rng)?);
        let (df, dg) = (gradient(&f, &rho)?, gradient(&g, &rho)?);
        for lambda in [-1.0, 0.5, 3.0] {
            let mixed = SymElement::from_matrix_unchecked(p, s.matrix() + w.matrix() * lambda)?;
            let lhs = bracket_of_gradients(&df, &dg, &rho, &mixed)?;
            let rhs = bracket_of_gradients(&df, &dg, &rho, s)? + lambda * bracket_of_gradients(&df, &dg, &rho, w)?;
            let scale = bracket_scale(&rho, &df, &dg, s) + lambda.abs() * bracket_scale(&rho, &df, &dg, w);
            worst = worst.max(rel(lhs - rhs, scale));
        }
    }
    Ok(judged("pencil_compatibility", worst, tol))
}

fn casimir_of(l: usize, s: &SymElement) -> liebundle::Result<Box<dyn ScalarField>> {
    if s.params().all_nonzero() {
        Ok(Box::new(CasimirField::new(l, s)?))
    } else {
        Ok(Box::new(DegenerateCasimirField::new(l, s)?))
    }
}

fn casimir_centrality(
    p: &DeformationParams,
    s: &SymElement,
    l: usize,
    trials: usize,
    rng: &mut ChaCha8Rng,
    tol: f64,
) -> Result<PropertyResult, CliError> {
    let name = if p.all_nonzero() { format!("casimir_C{l}") } else { format!("casimir_C~{l}") };
    let c = match casimir_of(l, s) {
        Ok(c) => c,
        Err(e) => return Ok(skipped(name, tol, e.to_string())),
    };
    let basis = SkewElement::basis(p);
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let rho = sample::dual(p, rng);
        let dc = gradient(c.as_ref(), &rho)?;
        for e in &basis {
            let v = bracket_of_gradients(&dc, e, &rho, s)?;
            worst = worst.max(rel(v, bracket_scale(&rho, &dc, e, s)));
        }
    }
    Ok(judged(name, worst, tol))
}

fn gradients(
    p: &DeformationParams,
    s: &SymElement,
    orders: &[usize],
    trials: usize,
    rng: &mut ChaCha8Rng,
    tol: f64,
) -> Result<PropertyResult, CliError> {
    let mut fields: Vec<Box<dyn ScalarField>> = vec![Box::new(random_quadratic(p, rng)?)];
    fields.extend(orders.iter().filter_map(|&l| casimir_of(l, s).ok()));
    let mut worst = 0.0_f64;
    for _ in 0..trials.clamp(1, 5) {
        let rho = sample::dual(p, rng);
        for f in &fields {
            let Some(exact) = f.exact_gradient(&rho) else { continue };
            let fd = finite_difference_gradient(f.as_ref(), &rho)?;
            let err = max_abs(&(exact.matrix() - fd.matrix()));
            worst = worst.max(err / exact.max_abs().max(1e-3));
        }
    }
    Ok(judged("gradient_fd", worst, tol))
}

fn involution(
    p: &DeformationParams,
    s: &SymElement,
    w: &SymElement,
    order: usize,
    trials: usize,
    rng: &mut ChaCha8Rng,
    tol: f64,
) -> Result<PropertyResult, CliError> {
    const NAME: &str = "pencil_involution";
    if !p.all_nonzero() {
        return Ok(skipped(NAME, tol, "needs all parameters nonzero"));
    }
    let pencil = PencilSpec::new(s.clone(), w.clone())?;
    let mut fields = Vec::new();
    for l in 1..=2 {
        match pencil_integrals(&pencil, l, order) {
            Ok(f) => fields.extend(f),
            Err(e) => return Ok(skipped(NAME, tol, e.to_string())),
        }
    }
    let mut worst = 0.0_f64;
    for _ in 0..trials.clamp(1, 10) {
        let rho = sample::dual(p, rng);
        let grads = fields.iter().map(|f| gradient(f, &rho)).collect::<Result<Vec<_>, _>>()?;
        for (i, di) in grads.iter().enumerate() {
            for dj in &grads[i + 1..] {
                let v = bracket_of_gradients(di, dj, &rho, s)?;
                worst = worst.max(rel(v, bracket_scale(&rho, di, dj, s)));
            }
        }
    }
    Ok(judged(NAME, worst, tol))
}

/// Reads a `DualPoint` from coordinates, checking the count.
pub fn dual_from(p: &DeformationParams, coords: &[f64], field: &str) -> Result<DualPoint, CliError> {
    DualPoint::from_coords(p, coords).map_err(|e| CliError::Config(format!("at `{field}`: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(a: &[f64], seed: u64) -> VerifyInput {
        let params = DeformationParams::new(a.to_vec()).unwrap();
        VerifyInput {
            s: SymElement::identity(&params),
            params,
            w: None,
            seed,
            block: VerifyBlock {
                trials: 6,
                ..VerifyBlock::default()
            },
            tolerances: Tolerances::default(),
        }
    }

    #[test]
    fn standard_so4_passes() {
        let rep = run(&input(&[1.0, 1.0, 1.0], 42)).unwrap();
        assert!(rep.passed, "{}", rep.render());
        assert_eq!(rep.exit_code(), 0);
    }

    #[test]
    fn corrupted_bracket_matrix_fails_closure() {
        let mut inp = input(&[1.0, 1.0, 1.0], 42);
        let mut m = inp.s.matrix().clone();
        m[(0, 1)] = 0.7;
        inp.s = SymElement::from_matrix_unchecked(&inp.params, m).unwrap();
        let rep = run(&inp).unwrap();
        let closure = rep.results.iter().find(|r| r.name == "closure").unwrap();
        assert_eq!(closure.outcome, Outcome::Fail);
        assert_eq!(rep.exit_code(), 1);
    }

    #[test]
    fn zeros_skip_the_pencil_integrals() {
        let rep = run(&input(&[0.0, 1.0, 1.0], 1)).unwrap();
        assert!(rep.passed, "{}", rep.render());
        let inv = rep.results.iter().find(|r| r.name == "pencil_involution").unwrap();
        assert_eq!(inv.outcome, Outcome::Skipped);
        assert!(rep.results.iter().any(|r| r.name == "casimir_C~1"));
    }

    #[test]
    fn runs_are_reproducible() {
        let a = run(&input(&[0.5, -1.0, 2.0], 9)).unwrap();
        let b = run(&input(&[0.5, -1.0, 2.0], 9)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
