//! Acceptance criteria 1 to 8. Run with
//! `cargo test -p degent --test acceptance -- --nocapture` to see the
//! PASS/FAIL lines.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};
use std::time::{Duration, Instant};

use degent::commands;
use degent::config::BoundsConfig;
use degent::format::{fmt12, Cell};
use degent_core::ci::{extrapolate, lambda_sweep, CiBasis, CiProblem, DEFAULT_LAMBDAS};
use degent_core::degenpt::{
    build_htilde, closed_form_r, entanglement_of_r, enumerate_level, five_level_pattern, resolve_zeroth_order,
    zeroth_order_states, FiveLevelClosedForm, ZerothOrderState,
};
use degent_core::entangle::{level_bounds, reduced_density, schmidt_spectrum, TwoFermionState};
use degent_core::spbasis::{HarmonicBasis, SpatialBasis};
use degent_core::twobody::{InteractionSpec, TwoBody};
use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const C1_TOLERANCE: f64 = 1e-10;
const C1_TIME: Duration = Duration::from_secs(1);
const C2_TOLERANCE: f64 = 1e-10;
const C3_OVERLAP: f64 = 1.0 - 1e-9;
const C3_TOLERANCE: f64 = 1e-9;
const C4_TOLERANCE: f64 = 1e-9;
const C4_LEVELS: usize = 8;
const C5_CASES: usize = 1000;
const C5_MIN_D: f64 = 1e-3;
const C5_TOLERANCE: f64 = 1e-9;
const C5_TIME: Duration = Duration::from_secs(10);
const C6_CUTOFF: usize = 12;
const C6_TOLERANCE: f64 = 1e-3;
const C6_TIME: Duration = Duration::from_secs(60);
/// Deviations below this are rounding noise and count as converged.
const C6_NOISE_FLOOR: f64 = 1e-12;
const C7_STATES: usize = 10_000;
const C7_VN_TOLERANCE: f64 = 1e-9;
const C7_L_TOLERANCE: f64 = 1e-10;
const C7_PAIRING: f64 = 1e-9;
const C7_TIME: Duration = Duration::from_secs(30);
const C8_TOLERANCE: f64 = 1e-6;
const C8_LAMBDA: f64 = 0.1;
const C8_CUTOFF: usize = 14;
const C8_LEVELS: usize = 6;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let detail = f()?;
    let elapsed = start.elapsed();
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))?;
    Ok(format!("{detail}; {:.3} s", elapsed.as_secs_f64()))
}

fn states(basis: &dyn SpatialBasis, v: &InteractionSpec, n: usize) -> Result<Vec<ZerothOrderState>, String> {
    let mut tb = TwoBody::new(basis, v);
    let level = enumerate_level(basis, n).map_err(|e| e.to_string())?;
    let h = build_htilde(&level, &mut tb).map_err(|e| e.to_string())?;
    zeroth_order_states(&h, &level).map_err(|e| e.to_string())
}

fn oscillator() -> HarmonicBasis {
    HarmonicBasis::new(1.0).unwrap()
}

fn criterion_1() -> Outcome {
    timed(C1_TIME, || {
        let basis = oscillator();
        let v = InteractionSpec::Delta;
        let mut tb = TwoBody::new(&basis, &v);
        let level = enumerate_level(&basis, 1).map_err(|e| e.to_string())?;
        let h = build_htilde(&level, &mut tb).map_err(|e| e.to_string())?;
        let k = 0.25 * (0.5 / PI).sqrt();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            0.0, 0.0, 0.0, 0.0,
            0.0, k, -k, 0.0,
            0.0, -k, k, 0.0,
            0.0, 0.0, 0.0, 0.0,
        ]);
        let worst = (h.matrix - expected).abs().max();
        ensure(worst <= C1_TOLERANCE, || format!("max deviation {worst:e}"))?;
        Ok(format!("max deviation {worst:.1e}"))
    })
}

fn criterion_2() -> Outcome {
    let found = states(&oscillator(), &InteractionSpec::Delta, 1)?;
    let mut values: Vec<(f64, f64)> = found.iter().map(|s| (s.eps_l, s.eps_vn)).collect();
    values.sort_by(|a, b| a.0.total_cmp(&b.0));
    let expected = [(0.0, 0.0), (0.0, 0.0), (0.5, LN_2), (0.5, LN_2)];
    ensure(values.len() == 4, || format!("{} states", values.len()))?;
    let worst = values
        .iter()
        .zip(expected)
        .map(|(a, b)| (a.0 - b.0).abs().max((a.1 - b.1).abs()))
        .fold(0.0_f64, f64::max);
    ensure(worst <= C2_TOLERANCE, || format!("max deviation {worst:e}"))?;
    Ok(format!("(1/2, ln 2) x2 and (0, 0) x2, max deviation {worst:.1e}"))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn criterion_3() -> Outcome {
    let basis = oscillator();
    let kinds = [InteractionSpec::Delta, InteractionSpec::harmonic(1.0).unwrap(), InteractionSpec::gaussian(1.0, 0.5).unwrap()];
    let sets: Vec<Vec<ZerothOrderState>> = kinds.iter().map(|v| states(&basis, v, 1)).collect::<Result<_, _>>()?;
    let mut worst_overlap = 1.0_f64;
    let mut worst_eps = 0.0_f64;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let mut used = vec![false; sets[j].len()];
            for s in &sets[i] {
                // phase is fixed by taking |<s|t>|
                let (best, overlap) = sets[j]
                    .iter()
                    .enumerate()
                    .map(|(k, t)| (k, dot(&s.coefficients, &t.coefficients).abs()))
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap();
                ensure(!used[best], || format!("{} and {} states do not pair up", kinds[i].name(), kinds[j].name()))?;
                used[best] = true;
                let t = &sets[j][best];
                worst_overlap = worst_overlap.min(overlap);
                worst_eps = worst_eps.max((s.eps_l - t.eps_l).abs()).max((s.eps_vn - t.eps_vn).abs());
            }
        }
    }
    ensure(worst_overlap >= C3_OVERLAP, || format!("minimum overlap {worst_overlap}"))?;
    ensure(worst_eps <= C3_TOLERANCE, || format!("entanglement differs by {worst_eps:e}"))?;
    Ok(format!("delta, harmonic, gaussian: min overlap 1 - {:.1e}, max eps difference {worst_eps:.1e}", 1.0 - worst_overlap))
}

fn criterion_4() -> Outcome {
    let basis = oscillator();
    let mut checked = 0;
    for n in 0..=C4_LEVELS {
        let b = level_bounds(n);
        for s in states(&basis, &InteractionSpec::Delta, n)? {
            ensure(s.eps_l <= b.linear + C4_TOLERANCE && s.eps_vn <= b.von_neumann + C4_TOLERANCE, || {
                format!("N={n}: ({}, {}) above ({}, {})", s.eps_l, s.eps_vn, b.linear, b.von_neumann)
            })?;
            checked += 1;
        }
    }
    let report = commands::bounds(&BoundsConfig { n_min: 0, n_max: C4_LEVELS });
    for (n, row) in report.table.rows.iter().enumerate() {
        let x = n as f64;
        let exact = [Cell::Int(n as i64), Cell::Num(x / (x + 1.0)), Cell::Num((x + 1.0).ln())];
        ensure(row[..] == exact[..], || format!("N={n}: bounds row {row:?}"))?;
    }
    let csv = report.table.to_csv().map_err(|e| e.to_string())?;
    let mut expected = String::from("n,bound_l,bound_vn\n");
    for n in 0..=C4_LEVELS {
        let x = n as f64;
        expected += &format!("{n},{},{}\n", fmt12(x / (x + 1.0)), fmt12((x + 1.0).ln()));
    }
    ensure(csv == expected, || format!("bounds output differs:\n{csv}"))?;
    Ok(format!("{checked} states in N=0..{C4_LEVELS} within bounds; bounds table exact"))
}

fn criterion_5() -> Outcome {
    timed(C5_TIME, || {
        let kets = enumerate_level(&oscillator(), 2).map_err(|e| e.to_string())?.states().map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut worst = 0.0_f64;
        let mut cases = 0;
        while cases < C5_CASES {
            let [a, b, c, d, e] = [(); 5].map(|_| rng.gen_range(-1.0_f64..1.0));
            if d.abs() <= C5_MIN_D {
                continue;
            }
            let h = five_level_pattern(a, b, c, d, e);
            let form = closed_form_r(b, c, d, e).map_err(|e| e.to_string())?;
            for r in [form.r1, form.r2] {
                let v = DVector::from_column_slice(&FiveLevelClosedForm::eigenvector(r));
                let residual = (&h * &v - v.scale(form.eigenvalue(r))).abs().max();
                ensure(residual <= C5_TOLERANCE, || format!("closed-form eigenvector residual {residual:e}"))?;
            }
            let direct = resolve_zeroth_order(&h, &kets, true).map_err(|e| e.to_string())?;
            let mut numeric: Vec<(f64, f64)> = direct
                .iter()
                .filter(|s| FiveLevelClosedForm::branch_ratio(&s.coefficients).is_some())
                .map(|s| (s.eps_l, s.eps_vn))
                .collect();
            let mut formula: Vec<(f64, f64)> = [form.r1, form.r2]
                .iter()
                .map(|r| entanglement_of_r(*r))
                .map(|eps| (eps.linear, eps.von_neumann))
                .collect();
            numeric.sort_by(|x, y| x.1.total_cmp(&y.1));
            formula.sort_by(|x, y| x.1.total_cmp(&y.1));
            ensure(numeric.len() == 2, || format!("{} branch states in direct diagonalization", numeric.len()))?;
            for (x, y) in numeric.iter().zip(&formula) {
                worst = worst.max((x.0 - y.0).abs()).max((x.1 - y.1).abs());
            }
            cases += 1;
        }
        ensure(worst <= C5_TOLERANCE, || format!("entanglement differs by {worst:e}"))?;

        let basis = oscillator();
        let v = InteractionSpec::harmonic(1.0).unwrap();
        let mut tb = TwoBody::new(&basis, &v);
        let level = enumerate_level(&basis, 2).map_err(|e| e.to_string())?;
        let h = build_htilde(&level, &mut tb).map_err(|e| e.to_string())?;
        let form = FiveLevelClosedForm::from_htilde(&h.matrix, 1e-10).map_err(|e| e.to_string())?;
        let r = form.r1.max(form.r2);
        ensure((r - FRAC_1_SQRT_2).abs() <= C5_TOLERANCE, || format!("Moshinsky r = {r}"))?;
        ensure((form.r1.min(form.r2) + FRAC_1_SQRT_2).abs() <= C5_TOLERANCE, || "second branch is not -1/sqrt 2".into())?;
        let eps = entanglement_of_r(r);
        ensure((eps.linear - 0.625).abs() <= C5_TOLERANCE, || format!("Moshinsky eps_l = {}", eps.linear))?;
        ensure((eps.von_neumann - 1.5 * LN_2).abs() <= C5_TOLERANCE, || format!("Moshinsky eps_vn = {}", eps.von_neumann))?;
        Ok(format!("{C5_CASES} random cases, max eps difference {worst:.1e}; Moshinsky r = {}", fmt12(r)))
    })
}

fn criterion_6() -> Outcome {
    timed(C6_TIME, || {
        let basis = oscillator();
        let mut worst = 0.0_f64;
        for v in [InteractionSpec::Delta, InteractionSpec::harmonic(1.0).unwrap()] {
            let mut tb = TwoBody::new(&basis, &v);
            let problem = CiProblem::new(CiBasis::new(C6_CUTOFF), &mut tb).map_err(|e| e.to_string())?;
            for n in [1, 2] {
                let level = enumerate_level(&basis, n).map_err(|e| e.to_string())?;
                let predicted = zeroth_order_states(&build_htilde(&level, &mut tb).map_err(|e| e.to_string())?, &level)
                    .map_err(|e| e.to_string())?;
                let result = lambda_sweep(&problem, &level, &predicted, &DEFAULT_LAMBDAS).map_err(|e| e.to_string())?;
                for fit in extrapolate(&result).map_err(|e| e.to_string())? {
                    let p = &predicted[fit.state_index];
                    let error = (fit.limit_eps_l - p.eps_l).abs().max((fit.limit_eps_vn - p.eps_vn).abs());
                    worst = worst.max(error);
                    ensure(error <= C6_TOLERANCE, || {
                        format!("{} N={n} state {}: intercept off by {error:e}", v.name(), fit.state_index)
                    })?;
                    let deviations: Vec<f64> = result
                        .records_for(fit.state_index)
                        .map(|r| (r.eps_l - p.eps_l).abs().max((r.eps_vn - p.eps_vn).abs()))
                        .collect();
                    ensure(deviations.windows(2).all(|w| w[1] <= w[0] || w[1] <= C6_NOISE_FLOOR), || {
                        format!("{} N={n} state {}: deviations {deviations:?} not shrinking", v.name(), fit.state_index)
                    })?;
                }
            }
        }
        Ok(format!("delta and harmonic, N=1,2, n_max={C6_CUTOFF}: max intercept error {worst:.1e}, monotone"))
    })
}

fn random_state(rng: &mut ChaCha8Rng) -> TwoFermionState {
    let dim = 2 * rng.gen_range(2..=6);
    let mut w = DMatrix::<Complex<f64>>::zeros(dim, dim);
    // occasionally low Schmidt rank, to exercise exact zeros and degenerate pairs
    let active = if rng.gen_bool(0.2) { 4.min(dim) } else { dim };
    for i in 0..active {
        for j in i + 1..active {
            let z = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            w[(i, j)] = z;
            w[(j, i)] = -z;
        }
    }
    TwoFermionState::normalized(w).unwrap()
}

fn criterion_7() -> Outcome {
    timed(C7_TIME, || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut worst_l, mut worst_vn, mut worst_pair) = (0.0_f64, 0.0_f64, 0.0_f64);
        for _ in 0..C7_STATES {
            let state = random_state(&mut rng);
            let rho = reduced_density(&state);
            // trace forms: 1 − 2 Tr ρ², −Tr ρ ln ρ − ln 2
            let purity: f64 = rho.iter().map(|z| z.norm_sqr()).sum();
            let linear_trace = 1.0 - 2.0 * purity;
            let mut eigen: Vec<f64> = rho.symmetric_eigenvalues().iter().map(|x| x.max(0.0)).collect();
            eigen.sort_by(|a, b| b.total_cmp(a));
            let vn_trace = -eigen.iter().filter(|x| **x > 0.0).map(|x| x * x.ln()).sum::<f64>() - LN_2;
            for pair in eigen.chunks(2) {
                worst_pair = worst_pair.max((pair[0] - pair[1]).abs());
            }
            // Schmidt forms: 1 − Σλ², −Σλ ln λ
            let schmidt = schmidt_spectrum(&state).map_err(|e| e.to_string())?;
            worst_l = worst_l.max((linear_trace - schmidt.linear_entropy()).abs());
            worst_vn = worst_vn.max((vn_trace - schmidt.von_neumann_entropy()).abs());
        }
        ensure(worst_l <= C7_L_TOLERANCE, || format!("linear forms differ by {worst_l:e}"))?;
        ensure(worst_vn <= C7_VN_TOLERANCE, || format!("von Neumann forms differ by {worst_vn:e}"))?;
        ensure(worst_pair <= C7_PAIRING, || format!("pairing gap {worst_pair:e}"))?;
        Ok(format!(
            "{C7_STATES} states: eps_l {worst_l:.1e}, eps_vn {worst_vn:.1e}, pairing {worst_pair:.1e}"
        ))
    })
}

fn criterion_8() -> Outcome {
    let basis = oscillator();
    let v = InteractionSpec::harmonic(1.0).unwrap();
    let mut tb = TwoBody::new(&basis, &v);
    let problem = CiProblem::new(CiBasis::new(C8_CUTOFF), &mut tb).map_err(|e| e.to_string())?;
    let energies = problem.energies(C8_LAMBDA).map_err(|e| e.to_string())?;

    // centre of mass at ω = 1, relative motion at √(1 + 2λ); even n_rel singlet, odd triplet
    let omega_rel = (1.0 + 2.0 * C8_LAMBDA).sqrt();
    let mut exact = Vec::new();
    for n_cm in 0..10 {
        for n_rel in 0..10 {
            let e = n_cm as f64 + 0.5 + omega_rel * (n_rel as f64 + 0.5);
            exact.extend(std::iter::repeat_n(e, if n_rel % 2 == 0 { 1 } else { 3 }));
        }
    }
    exact.sort_by(f64::total_cmp);
    let mut distinct = exact.clone();
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let cutoff = distinct[C8_LEVELS - 1] + 1e-9;
    let lowest: Vec<f64> = exact.into_iter().filter(|e| *e <= cutoff).collect();
    let worst = energies.iter().zip(&lowest).map(|(a, b)| (a - b).abs()).fold(0.0_f64, f64::max);
    ensure(worst <= C8_TOLERANCE, || format!("max energy error {worst:e}"))?;
    Ok(format!("lowest {C8_LEVELS} levels ({} states) at lambda={C8_LAMBDA}: max error {worst:.1e}", lowest.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 8] = [
        ("1 delta first-excited matrix", criterion_1),
        ("2 first-excited entanglement values", criterion_2),
        ("3 interaction universality", criterion_3),
        ("4 level bounds", criterion_4),
        ("5 five-state closed form", criterion_5),
        ("6 lambda -> 0 convergence", criterion_6),
        ("7 measure consistency", criterion_7),
        ("8 Moshinsky spectrum", criterion_8),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(reason) => {
                println!("FAIL criterion {name}: {reason}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
