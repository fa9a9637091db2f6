//! The distance computations.
//!
//! Both distances are exact optima of linear programs:
//!
//! - the Dobrushin distance maximizes `(mu - nu)(f)` jointly over a test
//!   function `f` and site weights `e` in the simplex, subject to `f`
//!   being 1-Lipschitz for the weighted cost `sum_s e_s d_s`;
//! - the Steif distance minimizes, over couplings `m` of `mu` and `nu`,
//!   the worst per-site expected distance `max_s m(d_s)`.
//!
//! That these two optima agree exactly on every instance is the headline
//! identity checked by the [`crate::verify`] suite. The remaining
//! operations expose the intermediate objects the identity factors
//! through: the fixed-weight transport problem, its Kantorovich–Rubinstein
//! dual, the two-function relaxation for general semi-metric costs, and a
//! brute-force grid scan of the weight simplex.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::lp::{self, LinearProgram, LpError, LpSolution, Relation, Sense, VarBounds};
use crate::model::{
    same_space, Config, ConfigFunction, Coupling, Distribution, SemiMetric, SiteWeights,
};
use crate::rational::{format_rational, Rational};
use crate::smoothness;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("inputs live on different product spaces")]
    SpaceMismatch,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, MetricsError>;

/// Optimum of the Dobrushin program together with its certifying witnesses.
#[derive(Debug, Clone)]
pub struct DobrushinResult {
    pub value: Rational,
    /// Optimizing test function (gauge-fixed to 0 at the first config).
    pub witness_f: ConfigFunction,
    /// Optimizing site weights, in the simplex.
    pub witness_e: SiteWeights,
}

/// Optimum of the Steif program together with its certifying witnesses.
#[derive(Debug, Clone)]
pub struct SteifResult {
    pub value: Rational,
    pub witness_plan: Coupling,
    /// The optimal bound on every per-site expected distance; equals
    /// `value`, and is attained by at least one site.
    pub witness_t: Rational,
}

fn require_same_space(mu: &Distribution, nu: &Distribution) -> Result<()> {
    if same_space(mu, nu) {
        Ok(())
    } else {
        Err(MetricsError::SpaceMismatch)
    }
}

fn signed_difference(mu: &Distribution, nu: &Distribution) -> Vec<Rational> {
    mu.mass()
        .iter()
        .zip(nu.mass())
        .map(|(a, b)| a - b)
        .collect()
}

/// The joint Dobrushin program: variables are the function values `f(x)`
/// plus the site weights `e_s`; maximize `(mu - nu)(f)` subject to
/// `f(x) - f(y) <= sum_s e_s d_s(x, y)` for every ordered pair `x != y`,
/// `e >= 0`, `sum_s e_s <= 1`, and the gauge `f(first config) = 0`.
pub fn dobrushin_program(mu: &Distribution, nu: &Distribution) -> Result<LinearProgram> {
    require_same_space(mu, nu)?;
    let space = mu.space().clone();
    let n = space.config_count();
    let s_count = space.site_count();
    let nvars = n + s_count;

    let mut objective = signed_difference(mu, nu);
    objective.resize(nvars, Rational::zero());
    let mut program = LinearProgram::new(Sense::Maximize, objective);
    program.set_bounds(0, VarBounds::fixed(Rational::zero()));
    for s in 0..s_count {
        program.set_bounds(n + s, VarBounds::nonnegative());
    }

    let configs: Vec<Config> = space.configs().collect();
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let mut coeffs = vec![Rational::zero(); nvars];
            coeffs[x] = Rational::one();
            coeffs[y] = -Rational::one();
            for s in 0..s_count {
                coeffs[n + s] = -space.site_distance(s, &configs[x], &configs[y]);
            }
            program.add_constraint(coeffs, Relation::Le, Rational::zero());
        }
    }
    let mut simplex_row = vec![Rational::zero(); nvars];
    for c in simplex_row.iter_mut().skip(n) {
        *c = Rational::one();
    }
    program.add_constraint(simplex_row, Relation::Le, Rational::one());
    Ok(program)
}

/// Dobrushin distance `D(mu, nu)`: the exact optimum of
/// [`dobrushin_program`] together with its witnesses.
pub fn dobrushin_distance(mu: &Distribution, nu: &Distribution) -> Result<DobrushinResult> {
    let space = mu.space().clone();
    let n = space.config_count();
    let program = dobrushin_program(mu, nu)?;
    let (value, primal) = match lp::solve(&program)? {
        LpSolution::Optimal { value, primal } => (value, primal),
        other => {
            return Err(MetricsError::Internal(format!(
                "Dobrushin program must have an optimum, got {other:?}"
            )))
        }
    };
    let witness_f = ConfigFunction::new(space.clone(), primal[..n].to_vec())
        .expect("witness has one value per config");
    let witness_e =
        SiteWeights::new(primal[n..].to_vec()).expect("weights feasible by construction");
    debug_assert!(smoothness::is_weighted_lipschitz(&witness_f, &witness_e));
    debug_assert!(smoothness::dobrushin_norm(&witness_f) <= Rational::one());
    debug_assert_eq!(
        mu.expectation(&witness_f) - nu.expectation(&witness_f),
        value
    );
    Ok(DobrushinResult {
        value,
        witness_f,
        witness_e,
    })
}

/// The Steif program: variables are a coupling `m(x, y) >= 0` plus a
/// scalar `t`; minimize `t` subject to the marginal equalities and
/// `sum_{x,y} m(x, y) d_s(x, y) <= t` for every site `s`.
pub fn steif_program(mu: &Distribution, nu: &Distribution) -> Result<LinearProgram> {
    require_same_space(mu, nu)?;
    let space = mu.space().clone();
    let n = space.config_count();
    let s_count = space.site_count();
    let nvars = n * n + 1;
    let t_var = n * n;

    let mut objective = vec![Rational::zero(); nvars];
    objective[t_var] = Rational::one();
    let mut program = LinearProgram::new(Sense::Minimize, objective);
    for v in 0..n * n {
        program.set_bounds(v, VarBounds::nonnegative());
    }

    for x in 0..n {
        let mut coeffs = vec![Rational::zero(); nvars];
        for y in 0..n {
            coeffs[x * n + y] = Rational::one();
        }
        program.add_constraint(coeffs, Relation::Eq, mu.mass_of(x).clone());
    }
    for y in 0..n {
        let mut coeffs = vec![Rational::zero(); nvars];
        for x in 0..n {
            coeffs[x * n + y] = Rational::one();
        }
        program.add_constraint(coeffs, Relation::Eq, nu.mass_of(y).clone());
    }
    let configs: Vec<Config> = space.configs().collect();
    for s in 0..s_count {
        let mut coeffs = vec![Rational::zero(); nvars];
        for x in 0..n {
            for y in 0..n {
                coeffs[x * n + y] = space.site_distance(s, &configs[x], &configs[y]);
            }
        }
        coeffs[t_var] = -Rational::one();
        program.add_constraint(coeffs, Relation::Le, Rational::zero());
    }
    Ok(program)
}

/// Steif distance `d-bar(mu, nu)`: the exact optimum of [`steif_program`]
/// together with its witnesses.
pub fn steif_distance(mu: &Distribution, nu: &Distribution) -> Result<SteifResult> {
    let space = mu.space().clone();
    let n = space.config_count();
    let s_count = space.site_count();
    let program = steif_program(mu, nu)?;
    let (value, primal) = match lp::solve(&program)? {
        LpSolution::Optimal { value, primal } => (value, primal),
        LpSolution::Infeasible => {
            return Err(MetricsError::Internal(
                "coupling polytope reported empty; the product coupling always exists".into(),
            ))
        }
        LpSolution::Unbounded => {
            return Err(MetricsError::Internal(
                "Steif program reported unbounded; t is bounded below by 0".into(),
            ))
        }
    };
    let plan: Vec<Vec<Rational>> = (0..n)
        .map(|x| primal[x * n..(x + 1) * n].to_vec())
        .collect();
    let witness_plan = Coupling::new(plan, mu.clone(), nu.clone())
        .map_err(|e| MetricsError::Internal(format!("optimal plan failed validation: {e:?}")))?;
    let per_site: Vec<Rational> = (0..s_count)
        .map(|s| witness_plan.expected_site_distance(s))
        .collect();
    if per_site.iter().any(|d| *d > value) || !per_site.contains(&value) {
        return Err(MetricsError::Internal(format!(
            "optimal t = {} is not the worst per-site distance of the witness plan ({:?})",
            format_rational(&value),
            per_site.iter().map(format_rational).collect::<Vec<_>>()
        )));
    }
    Ok(SteifResult {
        witness_t: value.clone(),
        value,
        witness_plan,
    })
}

/// Minimum expected weighted cost `m(c_e)` over couplings of `mu` and
/// `nu`, together with an optimal plan.
pub fn transport_value(
    mu: &Distribution,
    nu: &Distribution,
    weights: &SiteWeights,
) -> Result<(Rational, Coupling)> {
    require_same_space(mu, nu)?;
    let space = mu.space().clone();
    if weights.len() != space.site_count() {
        return Err(MetricsError::SpaceMismatch);
    }
    let n = space.config_count();

    let configs: Vec<Config> = space.configs().collect();
    let mut objective = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            objective.push(space.weighted_cost(weights, &configs[x], &configs[y]));
        }
    }
    let mut program = LinearProgram::new(Sense::Minimize, objective);
    for v in 0..n * n {
        program.set_bounds(v, VarBounds::nonnegative());
    }
    for x in 0..n {
        let mut coeffs = vec![Rational::zero(); n * n];
        for y in 0..n {
            coeffs[x * n + y] = Rational::one();
        }
        program.add_constraint(coeffs, Relation::Eq, mu.mass_of(x).clone());
    }
    for y in 0..n {
        let mut coeffs = vec![Rational::zero(); n * n];
        for x in 0..n {
            coeffs[x * n + y] = Rational::one();
        }
        program.add_constraint(coeffs, Relation::Eq, nu.mass_of(y).clone());
    }

    let (value, primal) = match lp::solve(&program)? {
        LpSolution::Optimal { value, primal } => (value, primal),
        other => {
            return Err(MetricsError::Internal(format!(
                "transport program must have an optimum, got {other:?}"
            )))
        }
    };
    let plan: Vec<Vec<Rational>> = (0..n)
        .map(|x| primal[x * n..(x + 1) * n].to_vec())
        .collect();
    let coupling = Coupling::new(plan, mu.clone(), nu.clone())
        .map_err(|e| MetricsError::Internal(format!("optimal plan failed validation: {e:?}")))?;
    Ok((value, coupling))
}

/// Kantorovich–Rubinstein dual of [`transport_value`] at the same weights:
/// maximize `(mu - nu)(f)` over functions `f` that are 1-Lipschitz for the
/// weighted cost, gauge-fixed to 0 at the first configuration.
///
/// By duality the optimum equals `transport_value(mu, nu, weights)`
/// exactly; the verification suite asserts that identity on every run.
pub fn dual_potential_value(
    mu: &Distribution,
    nu: &Distribution,
    weights: &SiteWeights,
) -> Result<(Rational, ConfigFunction)> {
    require_same_space(mu, nu)?;
    let space = mu.space().clone();
    if weights.len() != space.site_count() {
        return Err(MetricsError::SpaceMismatch);
    }
    let cost = SemiMetric::from_weights(&space, weights);
    potential_program(mu, nu, &cost)
}

fn potential_program(
    mu: &Distribution,
    nu: &Distribution,
    cost: &SemiMetric,
) -> Result<(Rational, ConfigFunction)> {
    let space = mu.space().clone();
    let n = space.config_count();
    let mut program = LinearProgram::new(Sense::Maximize, signed_difference(mu, nu));
    program.set_bounds(0, VarBounds::fixed(Rational::zero()));
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let mut coeffs = vec![Rational::zero(); n];
            coeffs[x] = Rational::one();
            coeffs[y] = -Rational::one();
            program.add_constraint(coeffs, Relation::Le, cost.at(x, y).clone());
        }
    }
    let (value, primal) = match lp::solve(&program)? {
        LpSolution::Optimal { value, primal } => (value, primal),
        other => {
            return Err(MetricsError::Internal(format!(
                "potential program must have an optimum, got {other:?}"
            )))
        }
    };
    let witness = ConfigFunction::new(space, primal).expect("one value per config");
    Ok((value, witness))
}

/// Optimum of the two-function program for a general semi-metric cost:
/// maximize `mu(f) + nu(g)` over pairs with `f(x) + g(y) <= c(x, y)` for
/// all ordered pairs including `x = y`.
///
/// With `restricted` the second function is tied to `g = -f`, collapsing
/// the constraints to `f(x) - f(y) <= c(x, y)`. The two optima are equal
/// for every semi-metric; the verification suite asserts it.
pub fn two_function_value(
    mu: &Distribution,
    nu: &Distribution,
    cost: &SemiMetric,
    restricted: bool,
) -> Result<Rational> {
    require_same_space(mu, nu)?;
    if *cost.space() != *mu.space() {
        return Err(MetricsError::SpaceMismatch);
    }
    if restricted {
        return potential_program(mu, nu, cost).map(|(value, _)| value);
    }
    let n = mu.space().config_count();
    // Variables: f values then g values.
    let mut objective = mu.mass().to_vec();
    objective.extend(nu.mass().iter().cloned());
    let mut program = LinearProgram::new(Sense::Maximize, objective);
    program.set_bounds(0, VarBounds::fixed(Rational::zero()));
    for x in 0..n {
        for y in 0..n {
            let mut coeffs = vec![Rational::zero(); 2 * n];
            coeffs[x] += Rational::one();
            coeffs[n + y] += Rational::one();
            program.add_constraint(coeffs, Relation::Le, cost.at(x, y).clone());
        }
    }
    match lp::solve(&program)? {
        LpSolution::Optimal { value, .. } => Ok(value),
        other => Err(MetricsError::Internal(format!(
            "two-function program must have an optimum, got {other:?}"
        ))),
    }
}

/// Brute-force lower bound for the Steif distance: the best transport
/// value over the resolution-`k` grid of the weight simplex.
///
/// Always at most the Steif distance, non-decreasing along nested grids
/// (`k`, `2k`, `4k`, ...), and exact already at `k = 1` for single-site
/// spaces.
pub fn grid_lower_bound(mu: &Distribution, nu: &Distribution, resolution: u32) -> Result<Rational> {
    require_same_space(mu, nu)?;
    let mut best = Rational::zero();
    for weights in SiteWeights::grid(mu.space().site_count(), resolution) {
        let (value, _) = transport_value(mu, nu, &weights)?;
        if value > best {
            best = value;
        }
    }
    Ok(best)
}
