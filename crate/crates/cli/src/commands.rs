use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use degent_core::ci::{extrapolate, lambda_sweep, CiBasis, CiProblem, Extrapolation, SweepResult};
use degent_core::degenpt::{
    build_htilde, entanglement_of_r, enumerate_level, zeroth_order_states, DegenerateLevel, FiveLevelClosedForm,
    HTilde, ZerothOrderState, BOUND_TOLERANCE,
};
use degent_core::entangle::level_bounds;
use degent_core::twobody::{SlaterState, TwoBody};
use serde_json::{json, Value as Json};

use crate::config::{Basis, BoundsConfig, LevelConfig, RcurveConfig, SweepConfig};
use crate::error::Result;
use crate::format::{fmt12, round12, Cell, Report, Table};

/// Largest allowed distance between a sweep intercept and the zeroth-order value.
pub const INTERCEPT_TOLERANCE: f64 = 1e-3;

/// Agreement required between a numerically found branch state and the
/// closed-form `r₁`, `r₂` and `ε(r)`.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-8;

/// Deviation from the five-state zero pattern accepted before the closed
/// form is attempted.
const PATTERN_TOLERANCE: f64 = 1e-10;

fn slater_label(s: &SlaterState) -> String {
    format!("{}{}", s.first, s.second)
}

fn parity_label(p: Option<i8>) -> Cell {
    p.map_or(Cell::Empty, |p| Cell::Int(p as i64))
}

fn level_header(level: &DegenerateLevel, potential: &str, interaction: &str) -> String {
    format!(
        "level N={}  m={}  E0={}  potential {potential}  interaction {interaction}\n",
        level.label,
        level.degeneracy(),
        fmt12(level.unperturbed_energy)
    )
}

struct ClosedFormOutcome {
    json: Json,
    text: String,
    violations: Vec<String>,
}

fn closed_form_check(h: &HTilde, states: &[ZerothOrderState]) -> ClosedFormOutcome {
    let form = match FiveLevelClosedForm::from_htilde(&h.matrix, PATTERN_TOLERANCE) {
        Ok(form) => form,
        Err(e) => {
            let reason = format!("closed form not applicable: {e}");
            return ClosedFormOutcome {
                json: json!({ "applicable": false, "reason": reason }),
                text: format!("{reason}\n"),
                violations: Vec::new(),
            };
        }
    };
    let mut text = String::from("closed form\n");
    let mut table = Table::new(["branch", "r", "eps_l", "eps_vn", "shift"]);
    for (name, r) in [("r1", form.r1), ("r2", form.r2)] {
        let eps = entanglement_of_r(r);
        table.push(vec![Cell::Text(name.into()), r.into(), eps.linear.into(), eps.von_neumann.into(), form.eigenvalue(r).into()]);
    }
    text += &table.to_text();

    let mut violations = Vec::new();
    for (k, s) in states.iter().enumerate() {
        let Some(r) = FiveLevelClosedForm::branch_ratio(&s.coefficients) else { continue };
        let nearest = [form.r1, form.r2].into_iter().min_by(|a, b| (a - r).abs().total_cmp(&(b - r).abs())).unwrap();
        let eps = entanglement_of_r(nearest);
        let worst = (nearest - r).abs().max((eps.linear - s.eps_l).abs()).max((eps.von_neumann - s.eps_vn).abs());
        if worst > CLOSED_FORM_TOLERANCE {
            violations.push(format!("state {k}: branch ratio {} disagrees with the closed form by {worst:e}", fmt12(r)));
        }
    }
    ClosedFormOutcome {
        json: json!({
            "applicable": true,
            "a": round12(form.a), "b": round12(form.b), "c": round12(form.c), "d": round12(form.d), "e": round12(form.e),
            "branches": table.to_json(),
        }),
        text,
        violations,
    }
}

/// Zeroth-order states of one degenerate level with their entanglement.
pub fn level(cfg: &LevelConfig, cache_capacity: usize) -> Result<Report> {
    let basis = Basis::build(&cfg.potential, cfg.n + 1)?;
    let interaction = cfg.interaction.build()?;
    let mut tb = TwoBody::new(basis.as_dyn(), &interaction).with_cache_capacity(cache_capacity);
    let level = enumerate_level(basis.as_dyn(), cfg.n)?;
    let h = build_htilde(&level, &mut tb)?;
    let states = zeroth_order_states(&h, &level)?;
    let bounds = level_bounds(cfg.n);
    let m = level.degeneracy();
    let five_level = cfg.n == 2 && m == 5 && matches!(basis, Basis::Harmonic(_));

    let mut warnings = Vec::new();
    if let Some(t) = tb.truncation_warning() {
        warnings.push(format!(
            "interaction table truncates integral {:?} (tail mass {:e})",
            t.quartet, t.tail_mass
        ));
    }

    let mut columns: Vec<String> = ["state", "energy_shift", "sz", "spin", "parity", "eps_l", "eps_vn", "within_bounds", "unresolved", "r"]
        .map(String::from)
        .to_vec();
    columns.extend((1..=m).map(|j| format!("c{j}")));
    let mut table = Table::new(columns);
    let mut violations = Vec::new();
    for (k, s) in states.iter().enumerate() {
        let ok = s.within_level_bounds(cfg.n);
        if !ok {
            violations.push(format!(
                "state {k}: (eps_l, eps_vn) = ({}, {}) exceeds the level bound ({}, {})",
                fmt12(s.eps_l),
                fmt12(s.eps_vn),
                fmt12(bounds.linear),
                fmt12(bounds.von_neumann)
            ));
        }
        let r = if five_level { FiveLevelClosedForm::branch_ratio(&s.coefficients) } else { None };
        let mut row = vec![
            Cell::from(k),
            s.energy_shift.into(),
            s.sz.into(),
            s.spin.map_or(Cell::Empty, |v| Cell::Int(v as i64)),
            parity_label(s.parity),
            s.eps_l.into(),
            s.eps_vn.into(),
            ok.into(),
            s.unresolved.into(),
            Cell::opt_num(r),
        ];
        row.extend(s.coefficients.iter().map(|c| Cell::Num(*c)));
        table.push(row);
    }

    let potential = cfg.potential.to_string();
    let interaction_name = cfg.interaction.to_string();
    let labels: Vec<String> = level.basis.iter().map(slater_label).collect();
    let mut text = level_header(&level, &potential, &interaction_name);
    text += "basis\n";
    for (j, label) in labels.iter().enumerate() {
        let _ = writeln!(text, "  c{}  {label}", j + 1);
    }
    text += "H~ per unit lambda\n";
    let mut matrix = Table::new((1..=m).map(|j| format!("c{j}")));
    for i in 0..m {
        matrix.push((0..m).map(|j| Cell::Num(h.matrix[(i, j)])).collect());
    }
    text += &matrix.to_text();
    text += "states\n";
    text += &table.to_text();
    let _ = writeln!(text, "bounds  eps_l <= {}  eps_vn <= {}", fmt12(bounds.linear), fmt12(bounds.von_neumann));

    let mut closed = Json::Null;
    if five_level {
        let outcome = closed_form_check(&h, &states);
        text += &outcome.text;
        violations.extend(outcome.violations);
        closed = outcome.json;
    }

    let htilde: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| round12(h.matrix[(i, j)])).collect()).collect();
    let json = json!({
        "level": cfg.n,
        "m": m,
        "potential": potential,
        "interaction": interaction_name,
        "unperturbed_energy": round12(level.unperturbed_energy),
        "energy_spread": round12(level.energy_spread),
        "basis": labels,
        "htilde": htilde,
        "bounds": { "eps_l": round12(bounds.linear), "eps_vn": round12(bounds.von_neumann) },
        "states": table.to_json(),
        "closed_form": closed,
    });
    Ok(Report { text, table, json, warnings, violations })
}

/// Oscillator level ceilings `(N/(N+1), ln(N+1))` over a range of `N`.
pub fn bounds(cfg: &BoundsConfig) -> Report {
    let mut table = Table::new(["n", "bound_l", "bound_vn"]);
    for n in cfg.n_min..=cfg.n_max {
        let b = level_bounds(n);
        table.push(vec![n.into(), b.linear.into(), b.von_neumann.into()]);
    }
    let mut text = table.to_text();
    if cfg.n_min == 0 {
        text += "N=0 is the non-degenerate ground level: both bounds vanish\n";
    }
    let json = table.to_json();
    Report { text, table, json, warnings: Vec::new(), violations: Vec::new() }
}

/// `ε_L(r)` and `ε_vN(r)` of the five-state branch vector on a uniform `r`
/// grid, plus a flagged row at the Moshinsky point `r = 1/√2`.
pub fn rcurve(cfg: &RcurveConfig) -> Report {
    let step = (cfg.r_max - cfg.r_min) / (cfg.steps - 1) as f64;
    let mut points: Vec<(f64, bool)> = (0..cfg.steps).map(|i| (cfg.r_min + step * i as f64, false)).collect();
    if let Some(last) = points.last_mut() {
        last.0 = cfg.r_max;
    }
    if (cfg.r_min..=cfg.r_max).contains(&FRAC_1_SQRT_2) {
        match points.iter_mut().find(|(r, _)| fmt12(*r) == fmt12(FRAC_1_SQRT_2)) {
            Some(point) => *point = (FRAC_1_SQRT_2, true),
            None => {
                let at = points.partition_point(|(r, _)| *r < FRAC_1_SQRT_2);
                points.insert(at, (FRAC_1_SQRT_2, true));
            }
        }
    }

    let bounds = level_bounds(2);
    let mut table = Table::new(["r", "eps_l", "eps_vn", "moshinsky", "within_bounds"]);
    let mut violations = Vec::new();
    for (r, star) in points {
        let eps = entanglement_of_r(r);
        let ok = eps.linear <= bounds.linear + BOUND_TOLERANCE && eps.von_neumann <= bounds.von_neumann + BOUND_TOLERANCE;
        if !ok {
            violations.push(format!("r = {}: entanglement exceeds the N=2 bound", fmt12(r)));
        }
        table.push(vec![r.into(), eps.linear.into(), eps.von_neumann.into(), star.into(), ok.into()]);
    }
    let mut text = table.to_text();
    let star = entanglement_of_r(FRAC_1_SQRT_2);
    let _ = writeln!(
        text,
        "Moshinsky point r = {}: eps_l = {}, eps_vn = {}",
        fmt12(FRAC_1_SQRT_2),
        fmt12(star.linear),
        fmt12(star.von_neumann)
    );
    let json = table.to_json();
    Report { text, table, json, warnings: Vec::new(), violations }
}

fn monotone(result: &SweepResult, predicted: &ZerothOrderState, k: usize) -> bool {
    let deviations: Vec<f64> = result
        .records_for(k)
        .map(|r| (r.eps_l - predicted.eps_l).abs().max((r.eps_vn - predicted.eps_vn).abs()))
        .collect();
    deviations.windows(2).all(|w| w[1] <= w[0] || w[1] <= 1e-12)
}

fn summary_row(fit: &Extrapolation, p: &ZerothOrderState, result: &SweepResult, n: usize) -> (Vec<Cell>, Option<String>) {
    let error = (fit.limit_eps_l - p.eps_l).abs().max((fit.limit_eps_vn - p.eps_vn).abs());
    let bounds = level_bounds(n);
    let inside = fit.limit_eps_l <= bounds.linear + INTERCEPT_TOLERANCE
        && fit.limit_eps_vn <= bounds.von_neumann + INTERCEPT_TOLERANCE;
    let converged = error <= INTERCEPT_TOLERANCE && inside;
    let violation = (!converged).then(|| {
        format!(
            "state {}: intercept ({}, {}) misses zeroth order ({}, {}) by {error:e}",
            fit.state_index,
            fmt12(fit.limit_eps_l),
            fmt12(fit.limit_eps_vn),
            fmt12(p.eps_l),
            fmt12(p.eps_vn)
        )
    });
    let row = vec![
        fit.state_index.into(),
        p.eps_l.into(),
        p.eps_vn.into(),
        fit.limit_eps_l.into(),
        fit.limit_eps_vn.into(),
        fit.slope_eps_l.into(),
        fit.slope_eps_vn.into(),
        fit.poor_fit.into(),
        monotone(result, p, fit.state_index).into(),
        converged.into(),
    ];
    (row, violation)
}

/// CI sweep towards `λ → 0` with a linear extrapolation of the entanglement.
pub fn sweep(cfg: &SweepConfig, cache_capacity: usize) -> Result<Report> {
    let basis = Basis::build(&cfg.potential, cfg.n_max + 1)?;
    let interaction = cfg.interaction.build()?;
    let mut tb = TwoBody::new(basis.as_dyn(), &interaction).with_cache_capacity(cache_capacity);
    let level = enumerate_level(basis.as_dyn(), cfg.n)?;
    let predicted = zeroth_order_states(&build_htilde(&level, &mut tb)?, &level)?;
    let problem = CiProblem::new(CiBasis::new(cfg.n_max), &mut tb)?;
    let result = lambda_sweep(&problem, &level, &predicted, &cfg.lambdas)?;
    let fits = extrapolate(&result)?;

    let mut warnings = Vec::new();
    if let Some(t) = tb.truncation_warning() {
        warnings.push(format!("interaction table truncates integral {:?} (tail mass {:e})", t.quartet, t.tail_mass));
    }

    let mut table = Table::new(["lambda", "state_index", "energy", "eps_l", "eps_vn", "overlap_max"]);
    for r in &result.records {
        table.push(vec![r.lambda.into(), r.state_index.into(), r.energy.into(), r.eps_l.into(), r.eps_vn.into(), r.overlap_max.into()]);
    }

    let mut summary = Table::new([
        "state_index",
        "eps_l_0",
        "eps_vn_0",
        "eps_l_fit",
        "eps_vn_fit",
        "slope_eps_l",
        "slope_eps_vn",
        "poor_fit",
        "monotone",
        "converged",
    ]);
    let mut violations = Vec::new();
    for fit in &fits {
        let (row, violation) = summary_row(fit, &predicted[fit.state_index], &result, cfg.n);
        if fit.poor_fit {
            warnings.push(format!("state {}: entanglement is not linear in lambda over the fitted points", fit.state_index));
        }
        violations.extend(violation);
        summary.push(row);
    }

    let potential = cfg.potential.to_string();
    let interaction_name = cfg.interaction.to_string();
    let mut text = level_header(&level, &potential, &interaction_name);
    let _ = writeln!(text, "CI cutoff n_max={}  basis size {}", cfg.n_max, problem.basis().len());
    text += &table.to_text();
    text += "extrapolation to lambda -> 0\n";
    text += &summary.to_text();
    let json = json!({
        "level": cfg.n,
        "n_max": cfg.n_max,
        "potential": potential,
        "interaction": interaction_name,
        "records": table.to_json(),
        "extrapolation": summary.to_json(),
    });
    Ok(Report { text, table, json, warnings, violations })
}
