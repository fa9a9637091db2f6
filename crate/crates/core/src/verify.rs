//! Randomized instance generation and the executable identity-check suite.
//!
//! Every check in this module encodes an exact identity or inequality that
//! is a theorem for the finite spaces handled here, so a single failure is
//! a defect in the implementation, never in the data. Failed checks carry
//! the generating seed and enough rendered state (instance text, program
//! dumps, exact values) to reproduce and triage offline.

use std::fmt::Write as _;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::format;
use crate::metrics;
use crate::model::{
    ConfigFunction, Distribution, Instance, ProductSpace, SemiMetric, Site, SiteWeights,
};
use crate::rational::{format_rational, Rational};
use crate::smoothness;

// Distinct streams for the independent draws attached to one seed.
const SALT_CONTENT: u64 = 0x9e37_79b9_7f4a_7c15;
const SALT_FUNCTION: u64 = 0x1000_0001;
const SALT_WEIGHTS: u64 = 0x1000_0002;
const SALT_PROP1: u64 = 0x1000_0003;
const SALT_PROP2: u64 = 0x1000_0004;
const SALT_TRIPLE: u64 = 0x1000_0005;
const SALT_SANDWICH: u64 = 0x1000_0006;

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape and seed of one generated instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceSpec {
    pub seed: u64,
    pub site_count: usize,
    pub points_per_site: Vec<usize>,
    /// Masses and metric entries are drawn as fractions with denominator
    /// at most this bound (normalization may enlarge denominators).
    pub denominator_bound: u32,
}

impl InstanceSpec {
    fn assert_valid(&self) {
        assert!(
            (1..=4).contains(&self.site_count),
            "site count must lie in 1..=4"
        );
        assert_eq!(self.points_per_site.len(), self.site_count);
        assert!(
            self.points_per_site.iter().all(|n| (1..=4).contains(n)),
            "points per site must lie in 1..=4"
        );
        assert!(self.denominator_bound >= 1);
    }
}

/// Options for the randomized suite. The defaults match the standard run:
/// 200 instances, at most 3 sites of at most 3 points, denominators up to
/// 8, and the resolution-4 grid for weight sampling.
#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub base_seed: u64,
    pub count: usize,
    pub max_sites: usize,
    pub max_points: usize,
    /// When set, every instance gets exactly these site sizes.
    pub fixed_points: Option<Vec<usize>>,
    pub denominator_bound: u32,
    pub grid_resolution: u32,
    pub checks: CheckSelection,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            base_seed: 1,
            count: 200,
            max_sites: 3,
            max_points: 3,
            fixed_points: None,
            denominator_bound: 8,
            grid_resolution: 4,
            checks: CheckSelection::all(),
        }
    }
}

/// Which checks a suite run executes per seed.
#[derive(Debug, Clone, Copy)]
pub struct CheckSelection {
    pub theorem: bool,
    pub duality: bool,
    pub norm: bool,
    pub prop1: bool,
    pub prop2: bool,
    pub metric_axioms: bool,
    pub sandwich: bool,
}

impl CheckSelection {
    pub fn all() -> Self {
        CheckSelection {
            theorem: true,
            duality: true,
            norm: true,
            prop1: true,
            prop2: true,
            metric_axioms: true,
            sandwich: true,
        }
    }

    pub fn none() -> Self {
        CheckSelection {
            theorem: false,
            duality: false,
            norm: false,
            prop1: false,
            prop2: false,
            metric_axioms: false,
            sandwich: false,
        }
    }

    pub fn theorem_only() -> Self {
        CheckSelection {
            theorem: true,
            ..CheckSelection::none()
        }
    }
}

// The auxiliary checks that solve quadratically sized programs run on
// deliberately small spaces; identities do not get more interesting with
// size, only slower.
const SMALL_MAX_SITES: usize = 2;
const SMALL_MAX_POINTS: usize = 3;

/// Grid resolutions scanned by the sandwich check.
pub const SANDWICH_RESOLUTIONS: [u32; 4] = [1, 2, 4, 8];

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

fn random_positive_fraction(rng: &mut ChaCha8Rng, denominator_bound: u32) -> Rational {
    let num = rng.random_range(1..=2 * denominator_bound as i64);
    let den = rng.random_range(1..=denominator_bound as i64);
    Rational::new(num.into(), den.into())
}

fn random_signed_fraction(rng: &mut ChaCha8Rng, denominator_bound: u32) -> Rational {
    let bound = 2 * denominator_bound as i64;
    let num = rng.random_range(-bound..=bound);
    let den = rng.random_range(1..=denominator_bound as i64);
    Rational::new(num.into(), den.into())
}

/// Min-plus closure; the exact all-pairs shortest path of the entries.
fn shortest_path_closure(cost: &mut [Vec<Rational>]) {
    let n = cost.len();
    for k in 0..n {
        for i in 0..n {
            if i == k {
                continue;
            }
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                let via = &cost[i][k] + &cost[k][j];
                if via < cost[i][j] {
                    cost[i][j] = via;
                }
            }
        }
    }
}

fn random_site_metric(rng: &mut ChaCha8Rng, n: usize, denominator_bound: u32) -> Vec<Vec<Rational>> {
    let mut metric = vec![vec![Rational::zero(); n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let w = random_positive_fraction(rng, denominator_bound);
            metric[a][b] = w.clone();
            metric[b][a] = w;
        }
    }
    // Positive symmetric edges plus the closure give a genuine metric.
    shortest_path_closure(&mut metric);
    metric
}

fn random_mass_vector(rng: &mut ChaCha8Rng, len: usize, denominator_bound: u32) -> Vec<Rational> {
    let mut raw: Vec<Rational> = (0..len)
        .map(|_| {
            let num = rng.random_range(0..=denominator_bound as i64);
            let den = rng.random_range(1..=denominator_bound as i64);
            Rational::new(num.into(), den.into())
        })
        .collect();
    if raw.iter().all(Zero::is_zero) {
        raw[0] = Rational::one();
    }
    let total: Rational = raw.iter().sum();
    raw.into_iter().map(|r| r / &total).collect()
}

/// Draws the shape of the instance for `seed` under the given options.
pub fn draw_instance_spec(seed: u64, opts: &SuiteOptions) -> InstanceSpec {
    let mut rng = rng_for(seed);
    let points_per_site = match &opts.fixed_points {
        Some(points) => points.clone(),
        None => {
            let site_count = rng.random_range(1..=opts.max_sites);
            (0..site_count)
                .map(|_| rng.random_range(1..=opts.max_points))
                .collect()
        }
    };
    InstanceSpec {
        seed,
        site_count: points_per_site.len(),
        points_per_site,
        denominator_bound: opts.denominator_bound,
    }
}

/// Deterministically generates a valid instance: metrics by shortest-path
/// closure of random positive edges, masses normalized to exact unit sum.
pub fn generate_instance(spec: &InstanceSpec) -> Instance {
    spec.assert_valid();
    let mut rng = rng_for(spec.seed ^ SALT_CONTENT);
    let sites: Vec<Site> = spec
        .points_per_site
        .iter()
        .enumerate()
        .map(|(s, &n)| {
            let metric = random_site_metric(&mut rng, n, spec.denominator_bound);
            let points = (0..n).map(|i| i.to_string()).collect();
            Site::new(format!("s{s}"), points, metric)
                .expect("closure of positive symmetric edges is a metric")
        })
        .collect();
    let space = ProductSpace::new(sites).expect("non-empty site list");
    let mu = Distribution::new(
        space.clone(),
        random_mass_vector(&mut rng, space.config_count(), spec.denominator_bound),
    )
    .expect("normalized masses");
    let nu = Distribution::new(
        space.clone(),
        random_mass_vector(&mut rng, space.config_count(), spec.denominator_bound),
    )
    .expect("normalized masses");
    Instance { space, mu, nu }
}

/// Random function with signed fractional values.
pub fn draw_function(
    seed: u64,
    space: &Arc<ProductSpace>,
    denominator_bound: u32,
) -> ConfigFunction {
    let mut rng = rng_for(seed ^ SALT_FUNCTION);
    let values = (0..space.config_count())
        .map(|_| random_signed_fraction(&mut rng, denominator_bound))
        .collect();
    ConfigFunction::new(space.clone(), values).expect("one value per config")
}

/// Random weights strictly inside the simplex: every coordinate positive,
/// total strictly below one.
pub fn draw_interior_weights(seed: u64, site_count: usize, denominator_bound: u32) -> SiteWeights {
    let mut rng = rng_for(seed ^ SALT_WEIGHTS);
    let raw: Vec<Rational> = (0..site_count)
        .map(|_| random_positive_fraction(&mut rng, denominator_bound))
        .collect();
    let total: Rational = raw.iter().sum::<Rational>() + Rational::one();
    SiteWeights::new(raw.into_iter().map(|r| r / &total).collect())
        .expect("scaled into the open simplex")
}

/// Deterministic picks from the resolution grid of the weight simplex.
pub fn draw_grid_weights(
    seed: u64,
    site_count: usize,
    resolution: u32,
    count: usize,
) -> Vec<SiteWeights> {
    let grid = SiteWeights::grid(site_count, resolution);
    let mut rng = rng_for(seed ^ SALT_WEIGHTS);
    (0..count)
        .map(|_| grid[rng.random_range(0..grid.len())].clone())
        .collect()
}

/// Random semi-metric on the configurations of `space`.
///
/// Directed positive edge weights (symmetrized unless `asymmetric`) are
/// closed under shortest paths; with `shifted`, a per-point potential
/// `h` is added as `c(x, y) + h(y) - h(x)`, which preserves the
/// semi-metric axioms while allowing negative entries.
pub fn draw_semi_metric(
    seed: u64,
    space: &Arc<ProductSpace>,
    denominator_bound: u32,
    asymmetric: bool,
    shifted: bool,
) -> SemiMetric {
    let mut rng = rng_for(seed ^ SALT_PROP1);
    let n = space.config_count();
    let mut cost = vec![vec![Rational::zero(); n]; n];
    for x in 0..n {
        for y in 0..n {
            if x != y {
                cost[x][y] = random_positive_fraction(&mut rng, denominator_bound);
            }
        }
    }
    if !asymmetric {
        for x in 0..n {
            for y in x + 1..n {
                cost[y][x] = cost[x][y].clone();
            }
        }
    }
    shortest_path_closure(&mut cost);
    if shifted {
        let h: Vec<Rational> = (0..n)
            .map(|_| random_signed_fraction(&mut rng, denominator_bound))
            .collect();
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    cost[x][y] += &h[y] - &h[x];
                }
            }
        }
    }
    SemiMetric::new(space.clone(), cost).expect("closure plus potential shift is a semi-metric")
}

fn small_options(opts: &SuiteOptions) -> SuiteOptions {
    SuiteOptions {
        max_sites: SMALL_MAX_SITES.min(opts.max_sites),
        max_points: SMALL_MAX_POINTS.min(opts.max_points),
        fixed_points: opts.fixed_points.clone(),
        ..opts.clone()
    }
}

/// Inputs for the c-transform equivalence check: a space, a test function
/// and a semi-metric. Seeds cycle through symmetric, asymmetric and
/// potential-shifted (possibly negative) costs; on half the seeds the
/// function is replaced by its own transform so the 1-Lipschitz branch is
/// exercised as often as the non-Lipschitz one.
pub fn draw_prop1_inputs(seed: u64, opts: &SuiteOptions) -> (ConfigFunction, SemiMetric) {
    let instance = generate_instance(&draw_instance_spec(seed, &small_options(opts)));
    let space = instance.space;
    let asymmetric = seed % 4 >= 2;
    let shifted = seed % 4 == 3;
    let cost = draw_semi_metric(seed, &space, opts.denominator_bound, asymmetric, shifted);
    let mut psi = draw_function(seed ^ SALT_PROP1, &space, opts.denominator_bound);
    if seed % 2 == 0 {
        psi = smoothness::c_transform(&psi, &cost);
    }
    (psi, cost)
}

/// Inputs for the two-function equality check, on a small space.
pub fn draw_prop2_inputs(seed: u64, opts: &SuiteOptions) -> (Distribution, Distribution, SemiMetric) {
    let instance = generate_instance(&draw_instance_spec(seed ^ SALT_PROP2, &small_options(opts)));
    let asymmetric = seed % 2 == 0;
    let shifted = seed % 4 == 1;
    let cost = draw_semi_metric(
        seed ^ SALT_PROP2,
        &instance.space,
        opts.denominator_bound,
        asymmetric,
        shifted,
    );
    (instance.mu, instance.nu, cost)
}

/// A third distribution on the same space, for triangle inequalities.
pub fn draw_third_distribution(seed: u64, space: &Arc<ProductSpace>, denominator_bound: u32) -> Distribution {
    let mut rng = rng_for(seed ^ SALT_TRIPLE);
    Distribution::new(
        space.clone(),
        random_mass_vector(&mut rng, space.config_count(), denominator_bound),
    )
    .expect("normalized masses")
}

/// Small instance for the metric-axiom check (three distributions).
pub fn draw_triple(seed: u64, opts: &SuiteOptions) -> (Instance, Distribution) {
    let instance = generate_instance(&draw_instance_spec(seed ^ SALT_TRIPLE, &small_options(opts)));
    let rho = draw_third_distribution(seed, &instance.space, opts.denominator_bound);
    (instance, rho)
}

/// Small instance for the sandwich check; every third seed is single-site
/// so the exactness of the resolution-1 bound there is exercised.
pub fn draw_sandwich_instance(seed: u64, opts: &SuiteOptions) -> Instance {
    let mut small = small_options(opts);
    if seed % 3 == 0 && small.fixed_points.is_none() {
        small.max_sites = 1;
    }
    generate_instance(&draw_instance_spec(seed ^ SALT_SANDWICH, &small))
}

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

/// Result of one named check on one seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub seed: u64,
    pub check: String,
    pub pass: bool,
    /// Empty on success; witnesses (exact values, instance text, program
    /// dumps) on failure.
    pub details: String,
}

impl CheckOutcome {
    fn pass(seed: u64, check: impl Into<String>) -> Self {
        CheckOutcome {
            seed,
            check: check.into(),
            pass: true,
            details: String::new(),
        }
    }

    fn fail(seed: u64, check: impl Into<String>, details: String) -> Self {
        CheckOutcome {
            seed,
            check: check.into(),
            pass: false,
            details,
        }
    }
}

/// Exact equality of the two distances on one instance; fails with both
/// program dumps.
pub fn check_theorem(seed: u64, instance: &Instance) -> CheckOutcome {
    const NAME: &str = "theorem";
    let dobrushin = metrics::dobrushin_distance(&instance.mu, &instance.nu);
    let steif = metrics::steif_distance(&instance.mu, &instance.nu);
    match (dobrushin, steif) {
        (Ok(d), Ok(s)) if d.value == s.value => CheckOutcome::pass(seed, NAME),
        (Ok(d), Ok(s)) => {
            let mut details = String::new();
            let _ = writeln!(
                details,
                "dobrushin = {} but steif = {}",
                format_rational(&d.value),
                format_rational(&s.value)
            );
            let _ = writeln!(details, "instance:\n{}", format::render_instance(instance));
            if let Ok(p) = metrics::dobrushin_program(&instance.mu, &instance.nu) {
                let _ = writeln!(details, "dobrushin program:\n{}", p.dump());
            }
            if let Ok(p) = metrics::steif_program(&instance.mu, &instance.nu) {
                let _ = writeln!(details, "steif program:\n{}", p.dump());
            }
            CheckOutcome::fail(seed, NAME, details)
        }
        (d, s) => CheckOutcome::fail(
            seed,
            NAME,
            format!(
                "solver error: dobrushin {:?}, steif {:?}\ninstance:\n{}",
                d.err(),
                s.err(),
                format::render_instance(instance)
            ),
        ),
    }
}

/// Kantorovich–Rubinstein duality at fixed weights: the transport optimum
/// equals the potential optimum exactly.
pub fn check_duality_fixed_e(seed: u64, instance: &Instance, weights: &SiteWeights) -> CheckOutcome {
    let name = format!("duality[e={weights}]");
    let transport = metrics::transport_value(&instance.mu, &instance.nu, weights);
    let dual = metrics::dual_potential_value(&instance.mu, &instance.nu, weights);
    match (transport, dual) {
        (Ok((tv, _)), Ok((dv, _))) if tv == dv => CheckOutcome::pass(seed, name),
        (Ok((tv, _)), Ok((dv, _))) => CheckOutcome::fail(
            seed,
            name,
            format!(
                "transport = {} but dual = {}\ninstance:\n{}",
                format_rational(&tv),
                format_rational(&dv),
                format::render_instance(instance)
            ),
        ),
        (t, d) => CheckOutcome::fail(
            seed,
            name,
            format!("solver error: transport {:?}, dual {:?}", t.err(), d.err()),
        ),
    }
}

/// Both directions of the norm characterisation:
/// a function of norm at most one lies in the Lipschitz ball of its own
/// partial constants, and membership in any sampled ball caps every
/// partial constant by the corresponding weight.
pub fn check_norm_characterization(
    seed: u64,
    f: &ConfigFunction,
    grid_resolution: u32,
) -> CheckOutcome {
    const NAME: &str = "norm-characterization";
    let mut failures = String::new();
    let norm = smoothness::dobrushin_norm(f);

    // Forward: scale to norm exactly 1 when needed, then f must lie in
    // the ball of its own deltas, which in turn lie in the simplex.
    let normalized = if norm <= Rational::one() {
        f.clone()
    } else {
        f.scale(&norm.recip())
    };
    let deltas = smoothness::partial_lipschitz_vector(&normalized);
    match SiteWeights::new(deltas.clone()) {
        Ok(weights) => {
            if !smoothness::is_weighted_lipschitz(&normalized, &weights) {
                let _ = writeln!(
                    failures,
                    "norm {} <= 1 but f is not Lipschitz for its own deltas {weights}",
                    format_rational(&smoothness::dobrushin_norm(&normalized)),
                );
            }
        }
        Err(e) => {
            let _ = writeln!(failures, "deltas of a norm <= 1 function left the simplex: {e:?}");
        }
    }

    // Converse, sampled over the grid: membership caps the deltas.
    let site_count = f.space().site_count();
    let deltas_f = smoothness::partial_lipschitz_vector(f);
    for weights in SiteWeights::grid(site_count, grid_resolution) {
        if smoothness::is_weighted_lipschitz(f, &weights) {
            for (s, delta) in deltas_f.iter().enumerate() {
                if delta > weights.get(s) {
                    let _ = writeln!(
                        failures,
                        "f in ball of {weights} but delta_{s} = {} exceeds the weight",
                        format_rational(delta),
                    );
                }
            }
            if smoothness::dobrushin_norm(f) > Rational::one() {
                let _ = writeln!(failures, "f in ball of {weights} but its norm exceeds 1");
            }
        }
    }

    // Constructed membership: scale f into an interior ball.
    let interior = draw_interior_weights(seed, site_count, 8);
    let scaled = scale_into_ball(f, &interior);
    if !smoothness::is_weighted_lipschitz(&scaled, &interior) {
        let _ = writeln!(failures, "scaled copy failed membership in {interior}");
    }
    for (s, delta) in smoothness::partial_lipschitz_vector(&scaled).iter().enumerate() {
        if delta > interior.get(s) {
            let _ = writeln!(
                failures,
                "scaled copy: delta_{s} = {} exceeds weight {}",
                format_rational(delta),
                format_rational(interior.get(s)),
            );
        }
    }

    // A function of norm 2 fits no ball in the simplex.
    if !norm.is_zero() {
        let doubled = f.scale(&(Rational::from_integer(2.into()) / &norm));
        for weights in SiteWeights::grid(site_count, grid_resolution) {
            if smoothness::is_weighted_lipschitz(&doubled, &weights) {
                let _ = writeln!(failures, "norm-2 function claimed to fit in ball of {weights}");
            }
        }
    }

    if failures.is_empty() {
        CheckOutcome::pass(seed, NAME)
    } else {
        CheckOutcome::fail(seed, NAME, failures)
    }
}

/// Largest multiple of `f` that is Lipschitz for strictly interior
/// weights (for which the weighted cost is positive off the diagonal).
pub fn scale_into_ball(f: &ConfigFunction, weights: &SiteWeights) -> ConfigFunction {
    let space = f.space();
    let n = space.config_count();
    let configs: Vec<_> = space.configs().collect();
    let mut worst: Option<Rational> = None;
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let cost = space.weighted_cost(weights, &configs[x], &configs[y]);
            assert!(
                cost.is_positive(),
                "scale_into_ball needs strictly interior weights"
            );
            let ratio = (f.value_at(x) - f.value_at(y)) / cost;
            if worst.as_ref().is_none_or(|w| ratio > *w) {
                worst = Some(ratio);
            }
        }
    }
    match worst {
        Some(w) if w > Rational::one() => f.scale(&w.recip()),
        _ => f.clone(),
    }
}

/// The three-way c-transform equivalence on `psi` and on its transform,
/// idempotence of the transform, and the reversed jump bound for
/// 1-Lipschitz functions.
pub fn check_prop1(seed: u64, psi: &ConfigFunction, cost: &SemiMetric) -> CheckOutcome {
    const NAME: &str = "c-transform-equivalence";
    let mut failures = String::new();
    let mut check_agreement = |label: &str, g: &ConfigFunction| {
        let convex = smoothness::is_c_convex(g, cost);
        let lipschitz = smoothness::is_one_lipschitz(g, cost);
        let fixed_point = smoothness::c_transform(g, cost) == *g;
        if convex != lipschitz || lipschitz != fixed_point {
            let _ = writeln!(
                failures,
                "{label}: c-convex = {convex}, 1-Lipschitz = {lipschitz}, fixed point = {fixed_point}"
            );
        }
        (convex, lipschitz, fixed_point)
    };
    check_agreement("psi", psi);
    let transformed = smoothness::c_transform(psi, cost);
    let (_, lipschitz, _) = check_agreement("psi^c", &transformed);
    if !lipschitz {
        let _ = writeln!(failures, "psi^c is not 1-Lipschitz");
    }
    if smoothness::c_transform(&transformed, cost) != transformed {
        let _ = writeln!(failures, "psi^cc differs from psi^c");
    }
    // Reversed bound for the 1-Lipschitz transform.
    let n = psi.space().config_count();
    'outer: for x in 0..n {
        for xp in 0..n {
            let diff = transformed.value_at(x) - transformed.value_at(xp);
            if diff < -cost.at(x, xp).clone() {
                let _ = writeln!(
                    failures,
                    "reversed bound violated at ({x}, {xp}): diff = {}",
                    format_rational(&diff)
                );
                break 'outer;
            }
        }
    }
    if failures.is_empty() {
        CheckOutcome::pass(seed, NAME)
    } else {
        let _ = write!(failures, "cost:\n{}", format::render_cost(cost));
        CheckOutcome::fail(seed, NAME, failures)
    }
}

/// Exact equality of the unrestricted and `g = -f` two-function optima.
pub fn check_prop2(
    seed: u64,
    mu: &Distribution,
    nu: &Distribution,
    cost: &SemiMetric,
) -> CheckOutcome {
    const NAME: &str = "two-function-equality";
    let unrestricted = metrics::two_function_value(mu, nu, cost, false);
    let restricted = metrics::two_function_value(mu, nu, cost, true);
    match (unrestricted, restricted) {
        (Ok(u), Ok(r)) if u == r => CheckOutcome::pass(seed, NAME),
        (Ok(u), Ok(r)) => CheckOutcome::fail(
            seed,
            NAME,
            format!(
                "unrestricted = {} but restricted = {}\ncost:\n{}",
                format_rational(&u),
                format_rational(&r),
                format::render_cost(cost)
            ),
        ),
        (u, r) => CheckOutcome::fail(
            seed,
            NAME,
            format!("solver error: unrestricted {:?}, restricted {:?}", u.err(), r.err()),
        ),
    }
}

/// Metric axioms for both distances on a triple of distributions, plus
/// the diameter bound for the Steif distance.
pub fn check_metric_axioms(
    seed: u64,
    mu: &Distribution,
    nu: &Distribution,
    rho: &Distribution,
) -> CheckOutcome {
    const NAME: &str = "metric-axioms";
    let mut failures = String::new();

    let evaluate = |which: &str,
                    d: &dyn Fn(&Distribution, &Distribution) -> metrics::Result<Rational>,
                    failures: &mut String| {
        let pairs = [
            (mu, nu, "mu,nu"),
            (nu, mu, "nu,mu"),
            (mu, rho, "mu,rho"),
            (rho, mu, "rho,mu"),
            (nu, rho, "nu,rho"),
            (rho, nu, "rho,nu"),
        ];
        let mut values = Vec::new();
        for (a, b, label) in pairs {
            match d(a, b) {
                Ok(v) => values.push(v),
                Err(e) => {
                    let _ = writeln!(failures, "{which}({label}) errored: {e}");
                    return;
                }
            }
        }
        let [mn, nm, mr, rm, nr, rn]: [Rational; 6] = values.try_into().expect("six pairs");
        for (v, label) in [(&mn, "mu,nu"), (&mr, "mu,rho"), (&nr, "nu,rho")] {
            if v.is_negative() {
                let _ = writeln!(failures, "{which}({label}) = {} < 0", format_rational(v));
            }
        }
        for ((a, b), label) in [((&mn, &nm), "mu,nu"), ((&mr, &rm), "mu,rho"), ((&nr, &rn), "nu,rho")] {
            if a != b {
                let _ = writeln!(
                    failures,
                    "{which} asymmetric on ({label}): {} vs {}",
                    format_rational(a),
                    format_rational(b)
                );
            }
        }
        for ((v, eq), label) in [
            ((&mn, mu.mass() == nu.mass()), "mu,nu"),
            ((&mr, mu.mass() == rho.mass()), "mu,rho"),
            ((&nr, nu.mass() == rho.mass()), "nu,rho"),
        ] {
            if v.is_zero() != eq {
                let _ = writeln!(
                    failures,
                    "{which}({label}) = {} contradicts identity of indiscernibles",
                    format_rational(v)
                );
            }
        }
        for ((lhs, a, b), label) in [
            ((&mr, &mn, &nr), "mu,rho <= mu,nu + nu,rho"),
            ((&mn, &mr, &rn), "mu,nu <= mu,rho + rho,nu"),
            ((&nr, &nm, &mr), "nu,rho <= nu,mu + mu,rho"),
        ] {
            if *lhs > a + b {
                let _ = writeln!(failures, "{which} triangle violated: {label}");
            }
        }
    };

    evaluate(
        "dobrushin",
        &|a, b| metrics::dobrushin_distance(a, b).map(|r| r.value),
        &mut failures,
    );
    evaluate(
        "steif",
        &|a, b| metrics::steif_distance(a, b).map(|r| r.value),
        &mut failures,
    );

    let diameter = mu.space().max_site_diameter();
    for (a, b, label) in [(mu, nu, "mu,nu"), (mu, rho, "mu,rho"), (nu, rho, "nu,rho")] {
        if let Ok(s) = metrics::steif_distance(a, b) {
            if s.value > diameter {
                let _ = writeln!(
                    failures,
                    "steif({label}) = {} exceeds the diameter bound {}",
                    format_rational(&s.value),
                    format_rational(&diameter)
                );
            }
        }
    }

    if failures.is_empty() {
        CheckOutcome::pass(seed, NAME)
    } else {
        CheckOutcome::fail(seed, NAME, failures)
    }
}

/// The minimax sandwich: grid lower bounds are monotone along nested
/// resolutions and never exceed the Steif value; every coupling's worst
/// per-site distance is at least the Steif value, with equality for the
/// witness; and the worst per-site distance of the witness equals its
/// best weighted average over the grid.
pub fn check_sandwich(seed: u64, instance: &Instance) -> CheckOutcome {
    const NAME: &str = "minimax-sandwich";
    let mut failures = String::new();
    let steif = match metrics::steif_distance(&instance.mu, &instance.nu) {
        Ok(s) => s,
        Err(e) => {
            return CheckOutcome::fail(seed, NAME, format!("steif errored: {e}"));
        }
    };

    let mut previous = Rational::zero();
    for &resolution in SANDWICH_RESOLUTIONS.iter() {
        match metrics::grid_lower_bound(&instance.mu, &instance.nu, resolution) {
            Ok(bound) => {
                if bound < previous {
                    let _ = writeln!(
                        failures,
                        "grid bound decreased at resolution {resolution}: {} < {}",
                        format_rational(&bound),
                        format_rational(&previous)
                    );
                }
                if bound > steif.value {
                    let _ = writeln!(
                        failures,
                        "grid bound at resolution {resolution} = {} exceeds steif = {}",
                        format_rational(&bound),
                        format_rational(&steif.value)
                    );
                }
                previous = bound;
            }
            Err(e) => {
                let _ = writeln!(failures, "grid bound errored at resolution {resolution}: {e}");
            }
        }
    }

    if instance.space.site_count() == 1 {
        match metrics::grid_lower_bound(&instance.mu, &instance.nu, 1) {
            Ok(bound) if bound == steif.value => {}
            Ok(bound) => {
                let _ = writeln!(
                    failures,
                    "single site: resolution-1 bound {} differs from steif {}",
                    format_rational(&bound),
                    format_rational(&steif.value)
                );
            }
            Err(e) => {
                let _ = writeln!(failures, "single-site bound errored: {e}");
            }
        }
    }

    // Any coupling dominates the optimum; the witness attains it.
    let witness_worst = steif.witness_plan.worst_site_distance();
    if witness_worst != steif.value {
        let _ = writeln!(
            failures,
            "witness coupling has worst per-site distance {} but steif = {}",
            format_rational(&witness_worst),
            format_rational(&steif.value)
        );
    }
    let product = crate::model::Coupling::product(&instance.mu, &instance.nu);
    if product.worst_site_distance() < steif.value {
        let _ = writeln!(failures, "product coupling beat the optimum");
    }
    for s in 0..instance.space.site_count() {
        let unit = SiteWeights::unit(instance.space.site_count(), s);
        if let Ok((_, plan)) = metrics::transport_value(&instance.mu, &instance.nu, &unit) {
            if plan.worst_site_distance() < steif.value {
                let _ = writeln!(
                    failures,
                    "transport plan at unit weight {s} beat the optimum"
                );
            }
        }
    }

    // Worst per-site expectation of the witness equals its best weighted
    // average over the grid (vertices included).
    let per_site: Vec<Rational> = (0..instance.space.site_count())
        .map(|s| steif.witness_plan.expected_site_distance(s))
        .collect();
    let worst = per_site.iter().max().cloned().unwrap_or_else(Rational::zero);
    let best_weighted = SiteWeights::grid(instance.space.site_count(), 2)
        .into_iter()
        .map(|w| {
            w.weights()
                .iter()
                .zip(&per_site)
                .map(|(a, b)| a * b)
                .sum::<Rational>()
        })
        .max()
        .unwrap_or_else(Rational::zero);
    if worst != best_weighted {
        let _ = writeln!(
            failures,
            "weighted-sup identity failed: max_s = {}, best weighted = {}",
            format_rational(&worst),
            format_rational(&best_weighted)
        );
    }

    if failures.is_empty() {
        CheckOutcome::pass(seed, NAME)
    } else {
        let _ = write!(failures, "instance:\n{}", format::render_instance(instance));
        CheckOutcome::fail(seed, NAME, failures)
    }
}

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

/// Everything the suite ran, sorted by seed and check name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub entries: Vec<CheckOutcome>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failure_count(&self) -> usize {
        self.entries.iter().filter(|e| !e.pass).count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.entries.iter().filter(|e| !e.pass)
    }

    /// Deterministic text form: one line per check, exact values only,
    /// failure details indented beneath the failing line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            let _ = writeln!(
                out,
                "seed {:>6}  {:<42} {}",
                entry.seed,
                entry.check,
                if entry.pass { "pass" } else { "FAIL" }
            );
            if !entry.pass {
                for line in entry.details.lines() {
                    let _ = writeln!(out, "    {line}");
                }
            }
        }
        let _ = writeln!(
            out,
            "checks: {}, failures: {}",
            self.entries.len(),
            self.failure_count()
        );
        out
    }

    fn sort(&mut self) {
        self.entries
            .sort_by(|a, b| (a.seed, &a.check).cmp(&(b.seed, &b.check)));
    }
}

/// All selected checks for one seed.
pub fn run_seed_checks(seed: u64, opts: &SuiteOptions) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let checks = &opts.checks;
    if checks.theorem || checks.duality || checks.norm {
        let instance = generate_instance(&draw_instance_spec(seed, opts));
        if checks.theorem {
            out.push(check_theorem(seed, &instance));
        }
        if checks.duality {
            for weights in draw_grid_weights(
                seed,
                instance.space.site_count(),
                opts.grid_resolution,
                2,
            ) {
                out.push(check_duality_fixed_e(seed, &instance, &weights));
            }
        }
        if checks.norm {
            let f = draw_function(seed, &instance.space, opts.denominator_bound);
            out.push(check_norm_characterization(seed, &f, opts.grid_resolution));
        }
    }
    if checks.prop1 {
        let (psi, cost) = draw_prop1_inputs(seed, opts);
        out.push(check_prop1(seed, &psi, &cost));
    }
    if checks.prop2 {
        let (mu, nu, cost) = draw_prop2_inputs(seed, opts);
        out.push(check_prop2(seed, &mu, &nu, &cost));
    }
    if checks.metric_axioms {
        let (instance, rho) = draw_triple(seed, opts);
        out.push(check_metric_axioms(seed, &instance.mu, &instance.nu, &rho));
    }
    if checks.sandwich {
        let instance = draw_sandwich_instance(seed, opts);
        out.push(check_sandwich(seed, &instance));
    }
    out
}

/// Runs the suite, fanning out across instances; the report is assembled
/// in seed order and is byte-identical across repeated runs.
pub fn run_suite(opts: &SuiteOptions) -> VerificationReport {
    let seeds: Vec<u64> = (0..opts.count as u64).map(|i| opts.base_seed + i).collect();
    let entries: Vec<CheckOutcome> = seeds
        .par_iter()
        .map(|&seed| run_seed_checks(seed, opts))
        .flatten()
        .collect();
    let mut report = VerificationReport { entries };
    report.sort();
    report
}
