//! Budgeted searches for the counterexamples whose existence the centrality
//! dichotomies guarantee for non-central elements.
//!
//! Each search first tries the candidates suggested by the constructive
//! arguments, then random ones. For central inputs the searches instead
//! confirm the positive side of the dichotomy on `budget` samples.

use crate::algebra::{classify, is_central, Element, CLASSIFY_TOL};
use crate::cone::rank_one;
use crate::error::{ConeError, Result};
use crate::jordan::BlackBox;
use crate::random::Sampler;
use crate::spectral::{hermitian_eig, product_seminorm};

use super::Witness;

pub const DEFAULT_BUDGET: usize = 2000;

/// A non-additivity witness with relative defect at least this ends the search.
pub const NONADDITIVITY_TARGET: f64 = 1e-3;
/// Smallest relative defect accepted as a non-additivity witness.
pub const NONADDITIVITY_FLOOR: f64 = 1e-6;
/// `λ_min(x² − a²) < −SQUARING_FLOOR · ‖x‖²` is a squaring witness.
pub const SQUARING_FLOOR: f64 = 1e-6;
/// `‖ax‖ − ‖ax‖_S > GAP_FLOOR · ‖ax‖` is a seminorm gap witness.
pub const GAP_FLOOR: f64 = 1e-8;

/// Log-spaced perturbation sizes for the squaring search.
fn t_grid() -> impl Iterator<Item = f64> {
    const STEPS: usize = 25;
    let (lo, hi) = (1e-3f64.ln(), 10f64.ln());
    (0..STEPS).map(move |k| (lo + (hi - lo) * k as f64 / (STEPS - 1) as f64).exp())
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    /// The element is central; the positive conditions held on `samples`
    /// inputs with this largest relative violation.
    Central { max_violation: f64, samples: usize },
    Found(Witness),
    /// Non-central, but the budget ran out.
    Inconclusive { reason: String },
}

impl SearchOutcome {
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            SearchOutcome::Found(w) => Some(w),
            _ => None,
        }
    }

    pub fn is_central(&self) -> bool {
        matches!(self, SearchOutcome::Central { .. })
    }
}

fn require_positive_invertible(a: &Element) -> Result<()> {
    if classify(a, CLASSIFY_TOL).positive_invertible {
        Ok(())
    } else {
        Err(ConeError::DomainError(
            "witness searches need a positive invertible element".into(),
        ))
    }
}

/// `x ↦ (a x² a)^{1/2}`.
pub fn sqrt_congruence_map(a: &Element) -> BlackBox {
    let a = a.clone();
    BlackBox::new("sqrt-congruence", move |x| (&(&a * &x.square()) * &a).sqrt())
}

/// Relative additivity defect `‖φ(x+y) − φ(x) − φ(y)‖ / (‖φ(x)‖ + ‖φ(y)‖)`.
pub fn additivity_defect(phi: &BlackBox, x: &Element, y: &Element) -> Result<(f64, f64)> {
    let fx = phi.eval(x)?;
    let fy = phi.eval(y)?;
    let fxy = phi.eval(&(x + y))?;
    let defect = (&(&fxy - &fx) - &fy).norm();
    let scale = fx.norm() + fy.norm();
    Ok((defect, if scale > 0.0 { defect / scale } else { 0.0 }))
}

/// Non-additivity of `x ↦ (a x² a)^{1/2}`.
pub fn search_nonadditivity_witness(a: &Element, budget: usize, seed: u64) -> Result<SearchOutcome> {
    require_positive_invertible(a)?;
    let phi = sqrt_congruence_map(a);
    if is_central(a, CLASSIFY_TOL) {
        return confirm_additivity(&phi, a, budget, seed);
    }
    search_nonadditivity_in(&phi, a, &[a.inverse()?], budget, seed)
}

/// Largest relative additivity defect of `phi` over `budget` random pairs.
pub fn confirm_additivity(phi: &BlackBox, like: &Element, budget: usize, seed: u64) -> Result<SearchOutcome> {
    let mut s = Sampler::new(like.shape(), seed, 0x4144_4431);
    let mut worst = 0.0f64;
    for _ in 0..budget {
        let x = s.pd();
        let y = s.pd();
        worst = worst.max(additivity_defect(phi, &x, &y)?.1);
    }
    Ok(SearchOutcome::Central {
        max_violation: worst,
        samples: budget,
    })
}

/// Searches pairs `(x, y)` with `φ(x+y) ≠ φ(x) + φ(y)`. The first quarter of
/// the budget pairs each candidate `x` with random `y`.
pub fn search_nonadditivity_in(
    phi: &BlackBox,
    like: &Element,
    candidates: &[Element],
    budget: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    let mut s = Sampler::new(like.shape(), seed, 0x4e4f_4e41);
    let guided = if candidates.is_empty() { 0 } else { budget / 4 };
    let mut best: Option<Witness> = None;
    for k in 0..budget {
        let x = if k < guided {
            candidates[k % candidates.len()].clone()
        } else {
            s.pd()
        };
        let y = s.pd();
        let (defect, margin) = additivity_defect(phi, &x, &y)?;
        if best.as_ref().is_none_or(|b| margin > b.margin) {
            best = Some(Witness::new(
                "nonadditivity",
                vec![("x", x), ("y", y)],
                defect,
                0.0,
                margin,
            ));
        }
        if margin >= NONADDITIVITY_TARGET {
            break;
        }
    }
    Ok(match best {
        Some(w) if w.margin > NONADDITIVITY_FLOOR => SearchOutcome::Found(w),
        best => SearchOutcome::Inconclusive {
            reason: format!(
                "best relative defect {:.3e} after {budget} pairs",
                best.map_or(0.0, |w| w.margin)
            ),
        },
    })
}

/// `x` with `a ≤ x` but `a² ≰ x²`.
pub fn search_squaring_witness(a: &Element, budget: usize, seed: u64) -> Result<SearchOutcome> {
    require_positive_invertible(a)?;
    if is_central(a, CLASSIFY_TOL) {
        return confirm_squaring_monotone(a, budget, seed);
    }
    squaring_search(a, budget, seed)
}

/// `λ_min(x² − a²) / ‖x‖²` clipped at zero from above, negated: the relative
/// amount by which `a² ≤ x²` fails.
fn squaring_violation(a: &Element, x: &Element) -> Result<f64> {
    let d = &x.square() - &a.square();
    let lam = hermitian_eig(&d.hermitian_part())?.min_eigenvalue();
    Ok((-lam / x.norm().powi(2)).max(0.0))
}

fn confirm_squaring_monotone(a: &Element, budget: usize, seed: u64) -> Result<SearchOutcome> {
    let mut s = Sampler::new(a.shape(), seed, 0x5351_5231);
    let mut worst = 0.0f64;
    for k in 0..budget {
        let p = s.psd(k % 10 < 3).scale_real(s.uniform(0.01, 3.0) / a.norm().max(1.0));
        let x = a + &p;
        worst = worst.max(squaring_violation(a, &x)?);
    }
    Ok(SearchOutcome::Central {
        max_violation: worst,
        samples: budget,
    })
}

fn squaring_search(a: &Element, budget: usize, seed: u64) -> Result<SearchOutcome> {
    let eig = hermitian_eig(a)?;
    let dims = a.shape().dims().to_vec();
    let wide: Vec<usize> = (0..dims.len()).filter(|&b| dims[b] >= 2).collect();
    if wide.is_empty() {
        return Ok(SearchOutcome::Inconclusive {
            reason: "no block of size two or more".into(),
        });
    }
    // Mixing the extreme eigenvectors of a block is the direction where
    // a·vv* + vv*·a is most indefinite.
    let mut directions: Vec<(usize, Vec<crate::matrix::C64>)> = Vec::new();
    for &b in &wide {
        let n = dims[b];
        let u1 = eig.vectors[b].column(0);
        let u2 = eig.vectors[b].column(n - 1);
        let v = u1
            .iter()
            .zip(&u2)
            .map(|(p, q)| (p + q) / std::f64::consts::SQRT_2)
            .collect();
        directions.push((b, v));
    }
    let mut s = Sampler::new(a.shape(), seed, 0x5351_5232);
    let mut evals = 0;
    let mut best = 0.0f64;
    let mut k = 0;
    while evals < budget {
        let (b, v) = if k < directions.len() {
            directions[k].clone()
        } else {
            let b = wide[s.index(wide.len())];
            (b, s.unit_vector(dims[b]))
        };
        k += 1;
        let p = rank_one(a, b, &v);
        for t in t_grid() {
            if evals >= budget {
                break;
            }
            evals += 1;
            let x = a + &p.scale_real(t);
            let d = &x.square() - &a.square();
            let lam = hermitian_eig(&d.hermitian_part())?.min_eigenvalue();
            let margin = -lam / x.norm().powi(2);
            best = best.max(margin);
            if margin > SQUARING_FLOOR {
                return Ok(SearchOutcome::Found(Witness::new(
                    "squaring",
                    vec![("a", a.clone()), ("x", x)],
                    lam,
                    0.0,
                    margin,
                )));
            }
        }
    }
    Ok(SearchOutcome::Inconclusive {
        reason: format!("best relative margin {best:.3e} after {budget} candidates"),
    })
}

/// Relative violations of the four norm conditions that characterize a
/// central `a`, evaluated at `x`:
/// `‖axa⁻¹‖=‖x‖`, `‖a²x‖=‖axa‖`, `‖ax‖=‖ax‖_S`, `‖a²x‖=‖a²x‖_S`.
pub fn centrality_violations(a: &Element, x: &Element) -> Result<[f64; 4]> {
    let ai = a.inverse()?;
    let a2 = a.square();
    let r = |l: f64, r: f64| super::rel_err(l, r, 0.0);
    let axai = (&(a * x) * &ai).norm();
    let a2x = (&a2 * x).norm();
    let axa = (&(a * x) * a).norm();
    let ax = (a * x).norm();
    let ax_s = product_seminorm(a, x)?;
    let a2x_s = product_seminorm(&a2, x)?;
    Ok([
        r(axai, x.norm()),
        r(a2x, axa),
        r(ax, ax_s),
        r(a2x, a2x_s),
    ])
}

/// `x` with `‖ax‖ > ‖ax‖_S`. Tries `x₀ = x⁻¹` for a squaring witness `x` at
/// `a` first (then `a ≤ x₀⁻¹` and `a² ≰ x₀⁻²`), then random `x`.
pub fn search_seminorm_gap_witness(a: &Element, budget: usize, seed: u64) -> Result<SearchOutcome> {
    require_positive_invertible(a)?;
    if is_central(a, CLASSIFY_TOL) {
        let mut s = Sampler::new(a.shape(), seed, 0x4741_5031);
        let mut worst = 0.0f64;
        for _ in 0..budget {
            let x = s.pd();
            for v in centrality_violations(a, &x)? {
                worst = worst.max(v);
            }
        }
        return Ok(SearchOutcome::Central {
            max_violation: worst,
            samples: budget,
        });
    }
    let gap_witness = |x: Element| -> Result<Option<Witness>> {
        let ax = (a * &x).norm();
        let ax_s = product_seminorm(a, &x)?;
        let gap = ax - ax_s;
        Ok((gap > GAP_FLOOR * ax).then(|| {
            Witness::new(
                "seminorm-gap",
                vec![("a", a.clone()), ("x", x)],
                ax,
                ax_s,
                gap / ax,
            )
        }))
    };
    let half = budget / 2;
    let mut used = 0;
    if let SearchOutcome::Found(w) = squaring_search(a, half.max(1), seed)? {
        used += 1;
        let x = w.element("x").expect("squaring witness carries x");
        if let Some(g) = gap_witness(x.inverse()?)? {
            return Ok(SearchOutcome::Found(g));
        }
    } else {
        used += half;
    }
    let mut s = Sampler::new(a.shape(), seed, 0x4741_5032);
    while used < budget {
        used += 1;
        if let Some(g) = gap_witness(s.pd())? {
            return Ok(SearchOutcome::Found(g));
        }
    }
    Ok(SearchOutcome::Inconclusive {
        reason: format!("no seminorm gap above {GAP_FLOOR:.0e} after {budget} candidates"),
    })
}
