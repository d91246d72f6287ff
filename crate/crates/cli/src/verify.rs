//! Seeded invariant battery behind `whindex verify`.
//!
//! Each family draws its instances from its own ChaCha stream of the
//! master seed, so results depend only on the seed and the case count.
//! The index pipeline is injected, which lets tests run the battery
//! against deliberately broken implementations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use whindex::blaschke::{
    blaschke_of_minus_a, defect_rank, recover_blaschke_pointwise, unit_eigenvector,
};
use whindex::cayley::{c2d, d2c};
use whindex::equations::{solve_stein, solve_sylvester};
use whindex::indices::{discrete_negative_profile, IndexProfile, Tolerances};
use whindex::linalg::{self, block_diag, identity, op_norm, CMatrix};
use whindex::oracle::{roots_stable, schur_cohen_stable, winding_number};
use whindex::realization::{
    cascade, direct_sum, eval_transfer, unitary_twist, validate_stable_dissipative, validate_stable_unitary, Side,
};
use whindex::{sample, SymbolPair};

use crate::json::canonical;
use crate::problem::{blaschke_value, complex_value, matrix_value, realization_value, Problem};

pub type FullProfileFn = fn(&SymbolPair, Tolerances) -> whindex::Result<IndexProfile>;

#[derive(Debug, Clone, Copy)]
pub struct Pipeline {
    pub full_profile: FullProfileFn,
}

impl Default for Pipeline {
    fn default() -> Self {
        fn library(pair: &SymbolPair, tol: Tolerances) -> whindex::Result<IndexProfile> {
            whindex::full_profile(pair, tol)
        }
        Self { full_profile: library }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub seed: u64,
    pub cases: usize,
    pub tol: Tolerances,
}

pub const DEFAULT_SEED: u64 = 0x5eed_1d3c_0ffe_e000;
pub const DEFAULT_CASES: usize = 100;

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, cases: DEFAULT_CASES, tol: Tolerances::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub case: usize,
    pub detail: String,
    /// Serialized instance; problem-file shaped where one exists.
    pub replay: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyResult {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
    /// Smallest failing instance by serialized size.
    pub failure: Option<Failure>,
}

impl FamilyResult {
    fn new(name: &'static str) -> Self {
        Self { name, passed: 0, total: 0, failure: None }
    }

    fn record(&mut self, case: usize, outcome: Result<(), String>, replay: impl FnOnce() -> Value) {
        self.total += 1;
        match outcome {
            Ok(()) => self.passed += 1,
            Err(detail) => {
                let replay = replay();
                let smaller = self
                    .failure
                    .as_ref()
                    .is_none_or(|f| canonical(&replay).len() < canonical(&f.replay).len());
                if smaller {
                    self.failure = Some(Failure { case, detail, replay });
                }
            }
        }
    }

    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub seed: u64,
    pub cases: usize,
    pub families: Vec<FamilyResult>,
}

impl Summary {
    pub fn all_passed(&self) -> bool {
        self.families.iter().all(FamilyResult::ok)
    }

    pub fn first_failure(&self) -> Option<(&FamilyResult, &Failure)> {
        self.families.iter().find_map(|f| f.failure.as_ref().map(|x| (f, x)))
    }

    pub fn render(&self) -> String {
        let width = self.families.iter().map(|f| f.name.len()).max().unwrap_or(0);
        let mut out = format!("seed {} ({:#x}), {} cases per family\n", self.seed, self.seed, self.cases);
        for f in &self.families {
            let status = if f.ok() { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status}  {:<width$}  {}/{}", f.name, f.passed, f.total));
            if let Some(x) = &f.failure {
                out.push_str(&format!("  case {}: {}", x.case, x.detail));
            }
            out.push('\n');
        }
        out
    }

    /// Replay record of the first failing family.
    pub fn failing_case(&self) -> Option<Value> {
        self.first_failure().map(|(family, f)| {
            json!({
                "family": family.name,
                "seed": self.seed,
                "case": f.case,
                "detail": f.detail,
                "instance": f.replay,
            })
        })
    }
}

fn check(cond: bool, detail: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(detail())
    }
}

fn lib<T>(r: whindex::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn sorted(mut v: Vec<i64>) -> Vec<i64> {
    v.sort_unstable();
    v
}

fn pair_problem(pair: &SymbolPair) -> Value {
    Problem::RealizationPair { v: pair.v().clone(), w: pair.w().clone() }.to_value()
}

struct Battery<'a> {
    config: &'a VerifyConfig,
    pipeline: Pipeline,
    /// Full-profile runs, checked for dual consistency at the end.
    runs: Vec<(String, Value, IndexProfile)>,
}

impl Battery<'_> {
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(stream);
        rng
    }

    fn profile(&mut self, label: String, replay: &Value, pair: &SymbolPair) -> Result<IndexProfile, String> {
        let p = (self.pipeline.full_profile)(pair, self.config.tol).map_err(|e| e.to_string())?;
        self.runs.push((label, replay.clone(), p.clone()));
        Ok(p)
    }

    fn worked_example(&mut self) -> FamilyResult {
        let mut family = FamilyResult::new("indices: worked example [-4,-2,0,3,5]");
        let problem = Problem::DiagonalPowers(vec![-4, -2, 0, 3, 5]);
        let replay = problem.to_value();
        let outcome = (|| {
            let pair = lib(problem.symbol_pair())?;
            let p = self.profile("worked example".into(), &replay, &pair)?;
            let t = &p.negative_trace;
            check(op_norm(&t.omega) < 1e-10, || format!("|Omega| = {:e}", op_norm(&t.omega)))?;
            check(t.q.shape() == (6, 6) && op_norm(&(&t.q - identity(6))) < 1e-8, || "Q != I_6".into())?;
            check(t.kernel_dims == [6, 4, 2, 1, 0], || format!("kernel dims {:?}", t.kernel_dims))?;
            check(p.mu == [2, 2, 1, 1], || format!("mu {:?}", p.mu))?;
            check(p.all_indices == [-4, -2, 0, 3, 5], || format!("indices {:?}", p.all_indices))
        })();
        family.record(0, outcome, || replay.clone());
        family
    }

    fn unitarity_on_axis(&mut self) -> FamilyResult {
        let mut family = FamilyResult::new("realization: unitary on the axis, sums and cascades");
        let mut rng = self.rng(1);
        for case in 0..self.config.cases {
            let Ok(x) = sample::inner(&mut rng, 2, 2, 2) else { continue };
            let Ok(y) = sample::inner(&mut rng, 2, 1, 2) else { continue };
            let points: Vec<f64> = (0..50).map(|_| rng.gen_range(-20.0..20.0)).collect();
            let s = sample::right_half_point(&mut rng);
            let outcome = (|| {
                check(lib(validate_stable_dissipative(&x))?.verdict, || "sample failed validation".into())?;
                for &w in &points {
                    let t = lib(eval_transfer(&x, Complex64::new(0.0, w)))?;
                    let r = op_norm(&(&t * t.adjoint() - identity(2)));
                    check(r < 1e-8, || format!("unitarity residual {r:e} at i{w}"))?;
                }
                let (tx, ty) = (lib(eval_transfer(&x, s))?, lib(eval_transfer(&y, s))?);
                let sum = lib(eval_transfer(&lib(direct_sum(&x, &y))?, s))?;
                let prod = lib(eval_transfer(&lib(cascade(&x, &y))?, s))?;
                check(linalg::max_abs_diff(&sum, &block_diag(&tx, &ty)) < 1e-10, || "direct sum".into())?;
                check(linalg::max_abs_diff(&prod, &(&tx * &ty)) < 1e-10, || "cascade".into())
            })();
            family.record(case, outcome, || json!({"x": realization_value(&x), "y": realization_value(&y)}));
        }
        family
    }

    fn solver_residuals(&mut self) -> FamilyResult {
        let mut family = FamilyResult::new("equations: Sylvester and Stein residual bounds");
        let mut rng = self.rng(2);
        for case in 0..self.config.cases {
            let (n, m) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
            let c = CMatrix::from_fn(n, m, |_, _| sample::complex_in_box(&mut rng));
            let (a, b) = (sample::hurwitz(&mut rng, n), sample::hurwitz(&mut rng, m));
            let (ad, bd) = (sample::schur_stable(&mut rng, n), sample::schur_stable(&mut rng, m));
            let outcome = (|| {
                let x = lib(solve_sylvester(&a, &b, &c))?.x;
                let res = op_norm(&(&a * &x + &x * &b + &c));
                let bound = 1e-10 * (1.0 + (op_norm(&a) + op_norm(&b)) * op_norm(&x) + op_norm(&c));
                check(res <= bound, || format!("Sylvester residual {res:e} > {bound:e}"))?;
                let x = lib(solve_stein(&ad, &bd, &c))?.x;
                let res = op_norm(&(&ad * &x * &bd + &c - &x));
                let bound = 1e-10 * (1.0 + op_norm(&ad) * op_norm(&x) * op_norm(&bd) + op_norm(&c));
                check(res <= bound, || format!("Stein residual {res:e} > {bound:e}"))
            })();
            family.record(case, outcome, || {
                json!({"a": matrix_value(&a), "b": matrix_value(&b), "a_d": matrix_value(&ad),
                       "b_d": matrix_value(&bd), "c": matrix_value(&c)})
            });
        }
        family
    }

    fn cayley(&mut self) -> FamilyResult {
        let mut family = FamilyResult::new("cayley: unitary images, round trip, transfer identity");
        let mut rng = self.rng(3);
        for case in 0..self.config.cases {
            let Ok(r) = sample::inner(&mut rng, 2, 2, 2) else { continue };
            let points: Vec<Complex64> = (0..5).map(|_| sample::right_half_point(&mut rng)).collect();
            let outcome = (|| {
                let d = lib(c2d(&r))?;
                let report = lib(validate_stable_unitary(&d))?;
                check(report.verdict, || report.summary())?;
                let back = lib(d2c(&d))?;
                check(back.max_diff(&r) < 1e-10, || format!("round trip error {:e}", back.max_diff(&r)))?;
                for &s in &points {
                    let z = (1.0 - s) / (1.0 + s);
                    let diff = linalg::max_abs_diff(&lib(eval_transfer(&d, z))?, &lib(eval_transfer(&r, s))?);
                    check(diff < 1e-10, || format!("transfer identity off by {diff:e} at {s}"))?;
                }
                Ok(())
            })();
            family.record(case, outcome, || realization_value(&r));
        }
        family
    }

    fn defect_law(&mut self) -> FamilyResult {
        let mut family = FamilyResult::new("blaschke: defect rank = min(deg, dim)");
        let mut rng = self.rng(4);
        for case in 0..self.config.cases {
            let n = rng.gen_range(1..=6);
            let Ok((a, _)) = sample::rank_one_dissipative(&mut rng, n) else { continue };
            let degree = rng.gen_range(0..=8);
            let phi = sample::blaschke_spec(&mut rng, degree);
            let outcome = (|| {
                let f = lib(blaschke_of_minus_a(&phi.denominator(), &a))?;
                check(op_norm(&f) <= 1.0 + 1e-10, || format!("|phi(-A)| = {}", op_norm(&f)))?;
                let rank = lib(defect_rank(&f, self.config.tol.cluster))?;
                check(rank == degree.min(n), || format!("defect rank {rank}, expected {}", degree.min(n)))
            })();
            family.record(case, outcome, || json!({"a": matrix_value(&a), "phi": blaschke_value(&phi)}));
        }
        family
    }

    fn recovery(&mut self) -> FamilyResult {
        let mut family = FamilyResult::new("blaschke: recovery formula");
        let mut rng = self.rng(5);
        for case in 0..self.config.cases {
            let n = rng.gen_range(2..=6);
            let Ok((a, c)) = sample::rank_one_dissipative(&mut rng, n) else { continue };
            let degree = rng.gen_range(0..n);
            let phi = sample::blaschke_spec(&mut rng, degree);
            let points: Vec<Complex64> = (0..10).map(|_| sample::right_half_point(&mut rng)).collect();
            let outcome = (|| {
                let x = lib(unit_eigenvector(&a, &phi, self.config.tol.cluster))?;
                for &s in &points {
                    let got = lib(recover_blaschke_pointwise(&a, &c, &phi, &x, s))?;
                    let err = (got - phi.eval(s)).norm();
                    check(err < 1e-8, || format!("error {err:e} at {s}"))?;
                }
                Ok(())
            })();
            family.record(case, outcome, || {
                json!({"a": matrix_value(&a), "c": matrix_value(&c), "phi": blaschke_value(&phi),
                       "points": points.iter().map(|&s| complex_value(s)).collect::<Vec<_>>()})
            });
        }
        family
    }

    fn diagonal_sweep(&mut self) -> FamilyResult {
        let mut family = FamilyResult::new("indices: diagonal powers reproduced");
        let mut rng = self.rng(6);
        for case in 0..self.config.cases {
            let powers = sample::power_list(&mut rng, 6, 6);
            let problem = Problem::DiagonalPowers(powers.clone());
            let replay = problem.to_value();
            let outcome = (|| {
                let pair = lib(problem.symbol_pair())?;
                let p = self.profile(format!("diagonal {powers:?}"), &replay, &pair)?;
                let expected = sorted(powers.iter().map(|&x| x as i64).collect());
                check(p.all_indices == expected, || format!("{:?} expected {expected:?}", p.all_indices))
            })();
            family.record(case, outcome, || replay.clone());
        }
        family
    }

    fn scalar_sweep(&mut self) -> FamilyResult {
        let mut family = FamilyResult::new("indices: scalar index = winding number = deg difference");
        let mut rng = self.rng(7);
        for case in 0..self.config.cases {
            let (dp, dm) = (rng.gen_range(0..=6), rng.gen_range(0..=6));
            let phi = sample::blaschke_spec(&mut rng, dp);
            let m = sample::blaschke_spec(&mut rng, dm);
            let problem = Problem::ScalarBlaschkePair { phi: phi.clone(), m: m.clone() };
            let replay = problem.to_value();
            let outcome = (|| {
                let expected = dp as i64 - dm as i64;
                let winding = lib(winding_number(&phi, &m))?;
                check(winding == expected, || format!("winding {winding}, expected {expected}"))?;
                let pair = lib(problem.symbol_pair())?;
                let p = self.profile(format!("scalar case {case}"), &replay, &pair)?;
                check(p.all_indices == [expected], || format!("pipeline {:?}, expected [{expected}]", p.all_indices))
            })();
            family.record(case, outcome, || replay.clone());
        }
        family
    }

    fn stein_equivalence(&mut self) -> FamilyResult {
        let mut family = FamilyResult::new("indices: Stein and Lyapunov pipelines agree");
        let mut rng = self.rng(8);
        for case in 0..self.config.cases {
            let Ok(pair) = sample::symbol_pair(&mut rng, 3, 2) else { continue };
            let replay = pair_problem(&pair);
            let outcome = (|| {
                let cont = self.profile(format!("equivalence case {case}"), &replay, &pair)?;
                let (vd, wd) = (lib(c2d(pair.v()))?, lib(c2d(pair.w()))?);
                for r in [&vd, &wd] {
                    let report = lib(validate_stable_unitary(r))?;
                    check(report.verdict, || report.summary())?;
                }
                let disc = lib(discrete_negative_profile(&vd, &wd, self.config.tol))?;
                let gap = op_norm(&(&disc.trace.q - &cont.negative_trace.q));
                check(gap < 1e-8, || format!("|Q_d - Q_c| = {gap:e}"))?;
                check(disc.indices == cont.negative, || format!("kappa {:?} vs {:?}", disc.indices, cont.negative))
            })();
            family.record(case, outcome, || replay.clone());
        }
        family
    }

    fn metamorphic(&mut self) -> FamilyResult {
        let mut family = FamilyResult::new("indices: twist invariance, direct-sum additivity");
        let mut rng = self.rng(9);
        for case in 0..self.config.cases {
            let Ok(pair) = sample::symbol_pair(&mut rng, 3, 2) else { continue };
            let Ok(other) = sample::symbol_pair(&mut rng, 2, 2) else { continue };
            let m = pair.size();
            let (u1, u2) = (sample::unitary(&mut rng, m), sample::unitary(&mut rng, m));
            let replay = json!({"pair": pair_problem(&pair), "other": pair_problem(&other),
                                "u1": matrix_value(&u1), "u2": matrix_value(&u2)});
            let outcome = (|| {
                let base = self.profile(format!("metamorphic {case}"), &replay, &pair)?;
                let left = lib(SymbolPair::new(
                    lib(unitary_twist(pair.v(), &u1, Side::Left))?,
                    lib(unitary_twist(pair.w(), &u2, Side::Left))?,
                ))?;
                let right = lib(SymbolPair::new(
                    lib(unitary_twist(pair.v(), &u1, Side::Right))?,
                    lib(unitary_twist(pair.w(), &u1, Side::Right))?,
                ))?;
                for (name, twisted) in [("left twist", &left), ("right twist", &right)] {
                    let t = self.profile(format!("metamorphic {case} {name}"), &replay, twisted)?;
                    check(t.all_indices == base.all_indices, || {
                        format!("{name}: {:?} -> {:?}", base.all_indices, t.all_indices)
                    })?;
                }
                let o = self.profile(format!("metamorphic {case} summand"), &replay, &other)?;
                let sum = lib(SymbolPair::new(lib(direct_sum(pair.v(), other.v()))?, lib(direct_sum(pair.w(), other.w()))?))?;
                let s = self.profile(format!("metamorphic {case} sum"), &replay, &sum)?;
                let expected = sorted([base.all_indices.clone(), o.all_indices].concat());
                check(s.all_indices == expected, || format!("direct sum {:?}, expected {expected:?}", s.all_indices))
            })();
            family.record(case, outcome, || replay.clone());
        }
        family
    }

    fn schur_cohen(&mut self) -> FamilyResult {
        let mut family = FamilyResult::new("oracle: Schur-Cohen test = root location");
        let mut rng = self.rng(10);
        for case in 0..self.config.cases {
            let degree = rng.gen_range(1..=8);
            let p = sample::polynomial(&mut rng, degree, 1e-6);
            let outcome = (|| {
                let by_roots = lib(roots_stable(&p))?;
                let sc = lib(schur_cohen_stable(&p))?;
                check(by_roots == sc.stable, || {
                    format!("roots say {by_roots}, Schur-Cohen says {} (lambda_min {:e})", sc.stable, sc.lambda_min)
                })
            })();
            family.record(case, outcome, || {
                json!({"coefficients": p.coeffs().iter().map(|&c| complex_value(c)).collect::<Vec<_>>()})
            });
        }
        family
    }

    fn dual_consistency(&self) -> FamilyResult {
        let mut family = FamilyResult::new("indices: dual consistency on every run");
        for (case, (label, replay, p)) in self.runs.iter().enumerate() {
            let outcome = check(p.dual_omega_gap < 1e-10, || format!("{label}: |Omega_* - Omega^*| = {:e}", p.dual_omega_gap))
                .and_then(|()| match p.cross_checks.iter().find(|c| !c.holds) {
                    Some(c) => Err(format!("{label}: {} ({} vs {})", c.name, c.lhs, c.rhs)),
                    None => Ok(()),
                });
            family.record(case, outcome, || replay.clone());
        }
        family
    }
}

pub fn run(config: &VerifyConfig, pipeline: Pipeline) -> Summary {
    let mut battery = Battery { config, pipeline, runs: Vec::new() };
    let mut families = vec![
        battery.worked_example(),
        battery.unitarity_on_axis(),
        battery.solver_residuals(),
        battery.cayley(),
        battery.defect_law(),
        battery.recovery(),
        battery.diagonal_sweep(),
        battery.scalar_sweep(),
        battery.stein_equivalence(),
        battery.metamorphic(),
        battery.schur_cohen(),
    ];
    families.push(battery.dual_consistency());
    Summary { seed: config.seed, cases: config.cases, families }
}
