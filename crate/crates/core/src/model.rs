//! Finite product-space data model.
//!
//! A [`ProductSpace`] is an ordered list of finite metric [`Site`]s; its
//! configurations are tuples picking one point per site, enumerated
//! lexicographically with the first site slowest. [`Distribution`],
//! [`Coupling`], [`SiteWeights`], [`ConfigFunction`] and [`SemiMetric`] are
//! all validated exactly at construction and immutable afterwards, so every
//! value of these types can be assumed well-formed and shared freely across
//! threads.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{format_rational, Rational};

/// A violated construction invariant, with enough indices to locate it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    /// A site metric failed a metric axiom.
    #[error("site {site:?}: {detail}")]
    NonMetric { site: String, detail: String },
    /// A mass vector is negative somewhere or does not sum to one.
    #[error("bad mass for {which}: {detail}")]
    BadMass { which: String, detail: String },
    /// Dimensions, labels, or index ranges do not line up.
    #[error("shape mismatch: {detail}")]
    ShapeMismatch { detail: String },
}

fn shape(detail: impl Into<String>) -> ValidationError {
    ValidationError::ShapeMismatch {
        detail: detail.into(),
    }
}

/// One coordinate of the product: a named finite set of points together
/// with an exact metric given as an explicit matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Site {
    name: String,
    points: Vec<String>,
    metric: Vec<Vec<Rational>>,
}

impl Site {
    /// Validates the metric axioms exactly: zero diagonal, symmetry,
    /// positivity off the diagonal, and the triangle inequality.
    pub fn new(
        name: impl Into<String>,
        points: Vec<String>,
        metric: Vec<Vec<Rational>>,
    ) -> Result<Self, Vec<ValidationError>> {
        let name = name.into();
        let mut errors = Vec::new();
        let n = points.len();
        if n == 0 {
            errors.push(shape(format!("site {name:?} has no points")));
        }
        let label_ok = |l: &str| {
            !l.is_empty() && l.chars().all(|c| !c.is_control() && c != ',' && c != '"' && c != '\\')
        };
        if !label_ok(&name) {
            errors.push(shape(format!("site name {name:?} is unusable as a label")));
        }
        for (i, p) in points.iter().enumerate() {
            if !label_ok(p) {
                errors.push(shape(format!(
                    "site {name:?} point {i} has unusable label {p:?}"
                )));
            }
            if points[..i].contains(p) {
                errors.push(shape(format!(
                    "site {name:?} has duplicate point label {p:?}"
                )));
            }
        }
        if metric.len() != n || metric.iter().any(|row| row.len() != n) {
            errors.push(shape(format!(
                "site {name:?}: metric must be {n}x{n}, got {}x{:?}",
                metric.len(),
                metric.iter().map(|r| r.len()).collect::<Vec<_>>()
            )));
            return Err(errors);
        }
        let non_metric = |detail: String| ValidationError::NonMetric {
            site: name.clone(),
            detail,
        };
        for a in 0..n {
            if !metric[a][a].is_zero() {
                errors.push(non_metric(format!(
                    "d({a},{a}) = {} must be 0",
                    format_rational(&metric[a][a])
                )));
            }
            for b in 0..n {
                if a != b && !metric[a][b].is_positive() {
                    errors.push(non_metric(format!(
                        "d({a},{b}) = {} must be > 0",
                        format_rational(&metric[a][b])
                    )));
                }
                if a < b && metric[a][b] != metric[b][a] {
                    errors.push(non_metric(format!(
                        "d({a},{b}) = {} but d({b},{a}) = {}",
                        format_rational(&metric[a][b]),
                        format_rational(&metric[b][a])
                    )));
                }
                for c in 0..n {
                    if metric[a][c] > &metric[a][b] + &metric[b][c] {
                        errors.push(non_metric(format!(
                            "triangle violated: d({a},{c}) = {} > d({a},{b}) + d({b},{c}) = {}",
                            format_rational(&metric[a][c]),
                            format_rational(&(&metric[a][b] + &metric[b][c]))
                        )));
                    }
                }
            }
        }
        if errors.is_empty() {
            Ok(Site {
                name,
                points,
                metric,
            })
        } else {
            Err(errors)
        }
    }

    /// Site with the discrete metric (all off-diagonal distances 1).
    pub fn discrete(name: impl Into<String>, points: Vec<String>) -> Self {
        let n = points.len();
        assert!(n >= 1, "a site needs at least one point");
        let metric = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| if a == b { Rational::zero() } else { Rational::one() })
                    .collect()
            })
            .collect();
        Site::new(name, points, metric).expect("discrete metric is always valid")
    }

    /// Discrete site with points labelled `"0"`, `"1"`, ...
    pub fn discrete_indexed(name: impl Into<String>, n: usize) -> Self {
        Site::discrete(name, (0..n).map(|i| i.to_string()).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // n >= 1 by construction
    }

    /// Exact distance between two points of this site.
    pub fn distance(&self, a: usize, b: usize) -> &Rational {
        &self.metric[a][b]
    }

    pub fn metric(&self) -> &[Vec<Rational>] {
        &self.metric
    }

    /// Largest entry of the metric.
    pub fn diameter(&self) -> Rational {
        self.metric
            .iter()
            .flatten()
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }
}

/// One configuration of the product: a point index per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Config(Vec<usize>);

impl Config {
    pub fn new(coords: Vec<usize>) -> Self {
        Config(coords)
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn coord(&self, site: usize) -> usize {
        self.0[site]
    }

    /// Copy with the coordinate at `site` replaced by `point`.
    pub fn with_coord(&self, site: usize, point: usize) -> Config {
        let mut coords = self.0.clone();
        coords[site] = point;
        Config(coords)
    }
}

/// Ordered finite product of sites.
///
/// Configurations are indexed lexicographically: index 0 is all-zeros, the
/// last site varies fastest, the first slowest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSpace {
    sites: Vec<Site>,
    strides: Vec<usize>,
    config_count: usize,
}

impl ProductSpace {
    pub fn new(sites: Vec<Site>) -> Result<Arc<Self>, Vec<ValidationError>> {
        let mut errors = Vec::new();
        if sites.is_empty() {
            errors.push(shape("a product space needs at least one site"));
        }
        for (i, s) in sites.iter().enumerate() {
            if sites[..i].iter().any(|t| t.name == s.name) {
                errors.push(shape(format!("duplicate site name {:?}", s.name)));
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        let mut strides = vec![1usize; sites.len()];
        for s in (0..sites.len().saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * sites[s + 1].len();
        }
        let config_count = strides[0] * sites[0].len();
        Ok(Arc::new(ProductSpace {
            sites,
            strides,
            config_count,
        }))
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, s: usize) -> &Site {
        &self.sites[s]
    }

    pub fn site_index(&self, name: &str) -> Option<usize> {
        self.sites.iter().position(|s| s.name == name)
    }

    pub fn config_count(&self) -> usize {
        self.config_count
    }

    /// All configurations in lexicographic order (first site slowest).
    pub fn configs(&self) -> impl Iterator<Item = Config> + '_ {
        (0..self.config_count).map(|i| self.config_at(i))
    }

    pub fn config_at(&self, index: usize) -> Config {
        assert!(index < self.config_count, "configuration index out of range");
        let coords = self
            .sites
            .iter()
            .zip(&self.strides)
            .map(|(site, stride)| (index / stride) % site.len())
            .collect();
        Config(coords)
    }

    pub fn index_of(&self, config: &Config) -> usize {
        assert_eq!(
            config.coords().len(),
            self.sites.len(),
            "configuration has wrong arity"
        );
        config
            .coords()
            .iter()
            .zip(&self.sites)
            .zip(&self.strides)
            .map(|((&c, site), stride)| {
                assert!(c < site.len(), "coordinate out of range for site {:?}", site.name);
                c * stride
            })
            .sum()
    }

    /// The per-site distance `d_s(x_s, y_s)` seen as a cost on configurations.
    ///
    /// On the product it is only a semi-metric: it vanishes on distinct
    /// configurations that agree at `s`.
    pub fn site_distance(&self, s: usize, x: &Config, y: &Config) -> Rational {
        assert!(s < self.sites.len(), "site index out of range");
        self.sites[s].distance(x.coord(s), y.coord(s)).clone()
    }

    /// Weighted cost `sum_s w_s * d_s(x, y)`.
    pub fn weighted_cost(&self, weights: &SiteWeights, x: &Config, y: &Config) -> Rational {
        assert_eq!(
            weights.len(),
            self.sites.len(),
            "weight vector length mismatch"
        );
        let mut total = Rational::zero();
        for (s, w) in weights.weights().iter().enumerate() {
            if !w.is_zero() {
                total += w * self.site_distance(s, x, y);
            }
        }
        total
    }

    /// Largest site diameter; an upper bound for both distances.
    pub fn max_site_diameter(&self) -> Rational {
        self.sites
            .iter()
            .map(|s| s.diameter())
            .max()
            .expect("at least one site")
    }

    /// Comma-joined point labels, e.g. `"H,T"`.
    pub fn label_of(&self, config: &Config) -> String {
        config
            .coords()
            .iter()
            .zip(&self.sites)
            .map(|(&c, site)| site.points[c].clone())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Inverse of [`label_of`](Self::label_of).
    pub fn config_from_label(&self, label: &str) -> Result<Config, ValidationError> {
        let parts: Vec<&str> = label.split(',').collect();
        if parts.len() != self.sites.len() {
            return Err(shape(format!(
                "label {label:?} has {} components, expected {}",
                parts.len(),
                self.sites.len()
            )));
        }
        let mut coords = Vec::with_capacity(parts.len());
        for (part, site) in parts.iter().zip(&self.sites) {
            match site.points.iter().position(|p| p == part) {
                Some(c) => coords.push(c),
                None => {
                    return Err(shape(format!(
                        "label {label:?}: {part:?} is not a point of site {:?}",
                        site.name
                    )))
                }
            }
        }
        Ok(Config(coords))
    }
}

/// Probability distribution on the configurations of a product space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    space: Arc<ProductSpace>,
    mass: Vec<Rational>,
}

impl Distribution {
    pub fn new(
        space: Arc<ProductSpace>,
        mass: Vec<Rational>,
    ) -> Result<Self, Vec<ValidationError>> {
        Self::validated(space, mass, "distribution")
    }

    fn validated(
        space: Arc<ProductSpace>,
        mass: Vec<Rational>,
        which: &str,
    ) -> Result<Self, Vec<ValidationError>> {
        let mut errors = Vec::new();
        if mass.len() != space.config_count() {
            errors.push(shape(format!(
                "{which} has {} masses, space has {} configurations",
                mass.len(),
                space.config_count()
            )));
            return Err(errors);
        }
        for (i, m) in mass.iter().enumerate() {
            if m.is_negative() {
                errors.push(ValidationError::BadMass {
                    which: which.to_string(),
                    detail: format!(
                        "mass of {:?} is {}",
                        space.label_of(&space.config_at(i)),
                        format_rational(m)
                    ),
                });
            }
        }
        let total: Rational = mass.iter().sum();
        if !total.is_one() {
            errors.push(ValidationError::BadMass {
                which: which.to_string(),
                detail: format!("masses sum to {}, expected 1", format_rational(&total)),
            });
        }
        if errors.is_empty() {
            Ok(Distribution { space, mass })
        } else {
            Err(errors)
        }
    }

    /// Point mass at `config`.
    pub fn dirac(space: Arc<ProductSpace>, config: &Config) -> Self {
        let idx = space.index_of(config);
        let mut mass = vec![Rational::zero(); space.config_count()];
        mass[idx] = Rational::one();
        Distribution { space, mass }
    }

    /// Uniform distribution.
    pub fn uniform(space: Arc<ProductSpace>) -> Self {
        let n = space.config_count();
        let w = Rational::new(1.into(), (n as i64).into());
        Distribution {
            space,
            mass: vec![w; n],
        }
    }

    pub fn space(&self) -> &Arc<ProductSpace> {
        &self.space
    }

    pub fn mass(&self) -> &[Rational] {
        &self.mass
    }

    pub fn mass_of(&self, index: usize) -> &Rational {
        &self.mass[index]
    }

    /// Exact integral of `f` against this distribution.
    pub fn expectation(&self, f: &ConfigFunction) -> Rational {
        assert!(
            self.same_space_as_fn(f),
            "function and distribution live on different spaces"
        );
        self.mass
            .iter()
            .zip(f.values())
            .filter(|(m, _)| !m.is_zero())
            .map(|(m, v)| m * v)
            .sum()
    }

    fn same_space_as_fn(&self, f: &ConfigFunction) -> bool {
        Arc::ptr_eq(&self.space, &f.space) || *self.space == *f.space
    }

    /// Marginal distribution on a single site.
    pub fn site_marginal(&self, s: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.space.site(s).len()];
        for (i, m) in self.mass.iter().enumerate() {
            if !m.is_zero() {
                out[self.space.config_at(i).coord(s)] += m;
            }
        }
        out
    }
}

/// Shared-space check used by the metric computations.
pub fn same_space(a: &Distribution, b: &Distribution) -> bool {
    Arc::ptr_eq(a.space(), b.space()) || *a.space() == *b.space()
}

/// Transport plan: a probability on ordered pairs of configurations whose
/// marginals are prescribed exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coupling {
    space: Arc<ProductSpace>,
    plan: Vec<Vec<Rational>>,
    first: Distribution,
    second: Distribution,
}

impl Coupling {
    pub fn new(
        plan: Vec<Vec<Rational>>,
        first: Distribution,
        second: Distribution,
    ) -> Result<Self, Vec<ValidationError>> {
        let mut errors = Vec::new();
        if !same_space(&first, &second) {
            errors.push(shape("coupling marginals live on different spaces"));
            return Err(errors);
        }
        let space = first.space().clone();
        let n = space.config_count();
        if plan.len() != n || plan.iter().any(|row| row.len() != n) {
            errors.push(shape(format!("coupling plan must be {n}x{n}")));
            return Err(errors);
        }
        for (x, row) in plan.iter().enumerate() {
            for (y, m) in row.iter().enumerate() {
                if m.is_negative() {
                    errors.push(ValidationError::BadMass {
                        which: "coupling".to_string(),
                        detail: format!("plan[{x}][{y}] = {} is negative", format_rational(m)),
                    });
                }
            }
        }
        for x in 0..n {
            let row_sum: Rational = plan[x].iter().sum();
            if &row_sum != first.mass_of(x) {
                errors.push(ValidationError::BadMass {
                    which: "coupling".to_string(),
                    detail: format!(
                        "row {x} sums to {}, first marginal is {}",
                        format_rational(&row_sum),
                        format_rational(first.mass_of(x))
                    ),
                });
            }
        }
        for y in 0..n {
            let col_sum: Rational = plan.iter().map(|row| &row[y]).sum();
            if &col_sum != second.mass_of(y) {
                errors.push(ValidationError::BadMass {
                    which: "coupling".to_string(),
                    detail: format!(
                        "column {y} sums to {}, second marginal is {}",
                        format_rational(&col_sum),
                        format_rational(second.mass_of(y))
                    ),
                });
            }
        }
        if errors.is_empty() {
            Ok(Coupling {
                space,
                plan,
                first,
                second,
            })
        } else {
            Err(errors)
        }
    }

    /// The diagonal coupling of a distribution with itself.
    pub fn diagonal(mu: &Distribution) -> Self {
        let n = mu.space().config_count();
        let mut plan = vec![vec![Rational::zero(); n]; n];
        for (i, m) in mu.mass().iter().enumerate() {
            plan[i][i] = m.clone();
        }
        Coupling {
            space: mu.space().clone(),
            plan,
            first: mu.clone(),
            second: mu.clone(),
        }
    }

    /// The independent (product) coupling.
    pub fn product(mu: &Distribution, nu: &Distribution) -> Self {
        assert!(same_space(mu, nu));
        let n = mu.space().config_count();
        let plan = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| mu.mass_of(x) * nu.mass_of(y))
                    .collect()
            })
            .collect();
        Coupling {
            space: mu.space().clone(),
            plan,
            first: mu.clone(),
            second: nu.clone(),
        }
    }

    pub fn space(&self) -> &Arc<ProductSpace> {
        &self.space
    }

    pub fn plan(&self) -> &[Vec<Rational>] {
        &self.plan
    }

    pub fn first_marginal(&self) -> &Distribution {
        &self.first
    }

    pub fn second_marginal(&self) -> &Distribution {
        &self.second
    }

    /// Expected per-site distance `m(d_s)`.
    pub fn expected_site_distance(&self, s: usize) -> Rational {
        let mut total = Rational::zero();
        for (x, row) in self.plan.iter().enumerate() {
            let cx = self.space.config_at(x);
            for (y, m) in row.iter().enumerate() {
                if !m.is_zero() {
                    total += m * self.space.site_distance(s, &cx, &self.space.config_at(y));
                }
            }
        }
        total
    }

    /// Expected cost under an arbitrary pair cost matrix.
    pub fn expected_cost(&self, cost: &SemiMetric) -> Rational {
        let mut total = Rational::zero();
        for (x, row) in self.plan.iter().enumerate() {
            for (y, m) in row.iter().enumerate() {
                if !m.is_zero() {
                    total += m * cost.at(x, y);
                }
            }
        }
        total
    }

    /// Worst per-site expected distance `max_s m(d_s)`.
    pub fn worst_site_distance(&self) -> Rational {
        (0..self.space.site_count())
            .map(|s| self.expected_site_distance(s))
            .max()
            .expect("at least one site")
    }
}

/// Non-negative site weights with total at most one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteWeights {
    weights: Vec<Rational>,
}

impl SiteWeights {
    pub fn new(weights: Vec<Rational>) -> Result<Self, Vec<ValidationError>> {
        let mut errors = Vec::new();
        for (s, w) in weights.iter().enumerate() {
            if w.is_negative() {
                errors.push(ValidationError::BadMass {
                    which: "weights".to_string(),
                    detail: format!("weight {s} is {}", format_rational(w)),
                });
            }
        }
        let total: Rational = weights.iter().sum();
        if total > Rational::one() {
            errors.push(ValidationError::BadMass {
                which: "weights".to_string(),
                detail: format!("weights sum to {} > 1", format_rational(&total)),
            });
        }
        if errors.is_empty() {
            Ok(SiteWeights { weights })
        } else {
            Err(errors)
        }
    }

    pub fn zero(site_count: usize) -> Self {
        SiteWeights {
            weights: vec![Rational::zero(); site_count],
        }
    }

    /// All weight on a single site.
    pub fn unit(site_count: usize, s: usize) -> Self {
        let mut weights = vec![Rational::zero(); site_count];
        weights[s] = Rational::one();
        SiteWeights { weights }
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, s: usize) -> &Rational {
        &self.weights[s]
    }

    pub fn total(&self) -> Rational {
        self.weights.iter().sum()
    }

    /// All weight vectors whose coordinates are multiples of
    /// `1/resolution` and sum to at most one, in lexicographic order.
    ///
    /// Grids nest along doubling resolutions, so maxima taken over them
    /// are monotone in the refinement.
    pub fn grid(site_count: usize, resolution: u32) -> Vec<SiteWeights> {
        assert!(resolution >= 1);
        let mut out = Vec::new();
        let mut current = vec![0u32; site_count];
        fn rec(
            s: usize,
            left: u32,
            resolution: u32,
            current: &mut Vec<u32>,
            out: &mut Vec<SiteWeights>,
        ) {
            if s == current.len() {
                let weights = current
                    .iter()
                    .map(|&j| Rational::new((j as i64).into(), (resolution as i64).into()))
                    .collect();
                out.push(SiteWeights { weights });
                return;
            }
            for j in 0..=left {
                current[s] = j;
                rec(s + 1, left - j, resolution, current, out);
            }
            current[s] = 0;
        }
        rec(0, resolution, resolution, &mut current, &mut out);
        out
    }
}

impl fmt::Display for SiteWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({})",
            self.weights
                .iter()
                .map(format_rational)
                .collect::<Vec<_>>()
                .join(", ")
        )
    }
}

/// Real-valued function on the configurations of a product space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigFunction {
    space: Arc<ProductSpace>,
    values: Vec<Rational>,
}

impl ConfigFunction {
    pub fn new(
        space: Arc<ProductSpace>,
        values: Vec<Rational>,
    ) -> Result<Self, Vec<ValidationError>> {
        if values.len() != space.config_count() {
            return Err(vec![shape(format!(
                "function has {} values, space has {} configurations",
                values.len(),
                space.config_count()
            ))]);
        }
        Ok(ConfigFunction { space, values })
    }

    pub fn constant(space: Arc<ProductSpace>, value: Rational) -> Self {
        let n = space.config_count();
        ConfigFunction {
            space,
            values: vec![value; n],
        }
    }

    pub fn from_fn(space: Arc<ProductSpace>, f: impl Fn(&Config) -> Rational) -> Self {
        let values = space.configs().map(|c| f(&c)).collect();
        ConfigFunction { space, values }
    }

    /// Indicator of `{x : x_s = point}`.
    pub fn indicator_site_point(space: Arc<ProductSpace>, s: usize, point: usize) -> Self {
        ConfigFunction::from_fn(space, |c| {
            if c.coord(s) == point {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
    }

    pub fn space(&self) -> &Arc<ProductSpace> {
        &self.space
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value_at(&self, index: usize) -> &Rational {
        &self.values[index]
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        ConfigFunction {
            space: self.space.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn negate(&self) -> Self {
        ConfigFunction {
            space: self.space.clone(),
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }
}

/// Exact cost on ordered pairs of configurations, constrained to be a
/// semi-metric: zero diagonal and the triangle inequality. Symmetry and
/// non-negativity are deliberately not required.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiMetric {
    space: Arc<ProductSpace>,
    cost: Vec<Vec<Rational>>,
}

impl SemiMetric {
    pub fn new(
        space: Arc<ProductSpace>,
        cost: Vec<Vec<Rational>>,
    ) -> Result<Self, Vec<ValidationError>> {
        let n = space.config_count();
        let mut errors = Vec::new();
        if cost.len() != n || cost.iter().any(|row| row.len() != n) {
            return Err(vec![shape(format!("cost matrix must be {n}x{n}"))]);
        }
        for x in 0..n {
            if !cost[x][x].is_zero() {
                errors.push(ValidationError::NonMetric {
                    site: "<pairs>".to_string(),
                    detail: format!(
                        "c({x},{x}) = {} must be 0",
                        format_rational(&cost[x][x])
                    ),
                });
            }
        }
        for x in 0..n {
            for z in 0..n {
                for y in 0..n {
                    if cost[x][z] > &cost[x][y] + &cost[y][z] {
                        errors.push(ValidationError::NonMetric {
                            site: "<pairs>".to_string(),
                            detail: format!(
                                "triangle violated: c({x},{z}) = {} > c({x},{y}) + c({y},{z}) = {}",
                                format_rational(&cost[x][z]),
                                format_rational(&(&cost[x][y] + &cost[y][z]))
                            ),
                        });
                    }
                }
            }
        }
        if errors.is_empty() {
            Ok(SemiMetric { space, cost })
        } else {
            Err(errors)
        }
    }

    /// The weighted cost `c(x,y) = sum_s w_s d_s(x,y)` as an explicit matrix.
    ///
    /// Always symmetric and non-negative on top of the semi-metric axioms.
    pub fn from_weights(space: &Arc<ProductSpace>, weights: &SiteWeights) -> Self {
        let n = space.config_count();
        let configs: Vec<Config> = space.configs().collect();
        let cost = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| space.weighted_cost(weights, &configs[x], &configs[y]))
                    .collect()
            })
            .collect();
        SemiMetric {
            space: space.clone(),
            cost,
        }
    }

    pub fn space(&self) -> &Arc<ProductSpace> {
        &self.space
    }

    pub fn at(&self, x: usize, y: usize) -> &Rational {
        &self.cost[x][y]
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.cost
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.cost.len();
        (0..n).all(|x| (x + 1..n).all(|y| self.cost[x][y] == self.cost[y][x]))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.cost.iter().flatten().all(|c| !c.is_negative())
    }
}

/// Unvalidated instance data as it comes out of a parser or generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawInstance {
    pub sites: Vec<RawSite>,
    /// Masses keyed by configuration label, e.g. `("H,T", 1/4)`.
    pub mu: Vec<(String, Rational)>,
    pub nu: Vec<(String, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSite {
    pub name: String,
    pub points: Vec<String>,
    pub metric: Vec<Vec<Rational>>,
}

/// A fully validated instance: the space and the two distributions.
#[derive(Debug, Clone)]
pub struct Instance {
    pub space: Arc<ProductSpace>,
    pub mu: Distribution,
    pub nu: Distribution,
}

/// Validates every construction invariant of a raw instance exactly,
/// collecting all violations instead of stopping at the first: metric
/// axiom failures do not prevent the mass maps from being checked too,
/// as long as the point labels themselves are usable.
pub fn validate_instance(raw: &RawInstance) -> Result<Instance, Vec<ValidationError>> {
    let mut errors = Vec::new();
    if raw.sites.is_empty() {
        return Err(vec![shape("instance has no sites")]);
    }
    let mut sites = Vec::new();
    // Discrete stand-ins keep label resolution alive when only the metric
    // values are wrong.
    let mut label_sites = Vec::new();
    let mut labels_ok = true;
    for rs in &raw.sites {
        let discrete = |a: usize, b: usize| {
            if a == b {
                Rational::zero()
            } else {
                Rational::one()
            }
        };
        let n = rs.points.len();
        let discrete_metric: Vec<Vec<Rational>> =
            (0..n).map(|a| (0..n).map(|b| discrete(a, b)).collect()).collect();
        match Site::new(rs.name.clone(), rs.points.clone(), rs.metric.clone()) {
            Ok(site) => {
                label_sites.push(
                    Site::new(rs.name.clone(), rs.points.clone(), discrete_metric)
                        .expect("labels validated with the site"),
                );
                sites.push(site);
            }
            Err(mut errs) => {
                errors.append(&mut errs);
                match Site::new(rs.name.clone(), rs.points.clone(), discrete_metric) {
                    Ok(stand_in) => label_sites.push(stand_in),
                    Err(_) => labels_ok = false,
                }
            }
        }
    }
    let mut mu = None;
    let mut nu = None;
    if labels_ok {
        match ProductSpace::new(label_sites) {
            Ok(label_space) => {
                let build_mass = |entries: &[(String, Rational)], which: &str| {
                    let mut mass = vec![Rational::zero(); label_space.config_count()];
                    let mut seen = vec![false; label_space.config_count()];
                    let mut local = Vec::new();
                    for (label, value) in entries {
                        match label_space.config_from_label(label) {
                            Ok(config) => {
                                let idx = label_space.index_of(&config);
                                if seen[idx] {
                                    local.push(shape(format!(
                                        "{which}: duplicate mass for {label:?}"
                                    )));
                                }
                                seen[idx] = true;
                                mass[idx] = value.clone();
                            }
                            Err(ValidationError::ShapeMismatch { detail }) => {
                                local.push(shape(format!("{which}: {detail}")))
                            }
                            Err(other) => local.push(other),
                        }
                    }
                    if local.is_empty() {
                        match Distribution::validated(label_space.clone(), mass.clone(), which) {
                            Ok(_) => return (Some(mass), local),
                            Err(mut errs) => local.append(&mut errs),
                        }
                    }
                    (None, local)
                };
                let (mu_mass, mut mu_errs) = build_mass(&raw.mu, "mu");
                let (nu_mass, mut nu_errs) = build_mass(&raw.nu, "nu");
                errors.append(&mut mu_errs);
                errors.append(&mut nu_errs);
                mu = mu_mass;
                nu = nu_mass;
            }
            Err(mut errs) => errors.append(&mut errs),
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let space = ProductSpace::new(sites)?;
    let mu = Distribution::validated(space.clone(), mu.expect("validated above"), "mu")
        .expect("validated against the label space");
    let nu = Distribution::validated(space.clone(), nu.expect("validated above"), "nu")
        .expect("validated against the label space");
    Ok(Instance { space, mu, nu })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn two_by_two() -> Arc<ProductSpace> {
        ProductSpace::new(vec![
            Site::discrete_indexed("a", 2),
            Site::discrete_indexed("b", 2),
        ])
        .unwrap()
    }

    #[test]
    fn enumeration_is_lexicographic_first_site_slowest() {
        let space = two_by_two();
        let got: Vec<Vec<usize>> = space.configs().map(|c| c.coords().to_vec()).collect();
        assert_eq!(got, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);

        let single = ProductSpace::new(vec![Site::discrete_indexed("s", 3)]).unwrap();
        let got: Vec<Vec<usize>> = single.configs().map(|c| c.coords().to_vec()).collect();
        assert_eq!(got, vec![vec![0], vec![1], vec![2]]);

        let mixed = ProductSpace::new(vec![
            Site::discrete_indexed("a", 2),
            Site::discrete_indexed("b", 3),
        ])
        .unwrap();
        assert_eq!(mixed.config_count(), 6);
        assert_eq!(mixed.config_at(0).coords(), &[0, 0]);
        assert_eq!(mixed.config_at(5).coords(), &[1, 2]);
    }

    #[test]
    fn site_distance_lookup() {
        let space = two_by_two();
        let x = Config::new(vec![0, 1]);
        assert_eq!(space.site_distance(0, &x, &x), int(0));
        let y = Config::new(vec![1, 1]);
        assert_eq!(space.site_distance(0, &x, &y), int(1));
        assert_eq!(space.site_distance(1, &x, &y), int(0));

        let site = Site::new(
            "m",
            vec!["0".into(), "1".into()],
            vec![
                vec![int(0), ratio(3, 2)],
                vec![ratio(3, 2), int(0)],
            ],
        )
        .unwrap();
        let space = ProductSpace::new(vec![site]).unwrap();
        let x = Config::new(vec![0]);
        let y = Config::new(vec![1]);
        assert_eq!(space.site_distance(0, &x, &y), ratio(3, 2));
        assert_eq!(space.site_distance(0, &y, &x), ratio(3, 2));
    }

    #[test]
    fn weighted_cost_examples() {
        let space = two_by_two();
        let x = Config::new(vec![0, 0]);
        let y = Config::new(vec![1, 1]);
        let zero = SiteWeights::zero(2);
        assert_eq!(space.weighted_cost(&zero, &x, &y), int(0));
        let unit = SiteWeights::unit(2, 1);
        assert_eq!(space.weighted_cost(&unit, &x, &y), int(1));
        let w = SiteWeights::new(vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        assert_eq!(space.weighted_cost(&w, &x, &y), int(1));
    }

    #[test]
    fn weighted_cost_is_symmetric_nonnegative_semi_metric() {
        let space = ProductSpace::new(vec![
            Site::new(
                "a",
                vec!["0".into(), "1".into(), "2".into()],
                vec![
                    vec![int(0), ratio(1, 2), ratio(5, 4)],
                    vec![ratio(1, 2), int(0), int(1)],
                    vec![ratio(5, 4), int(1), int(0)],
                ],
            )
            .unwrap(),
            Site::discrete_indexed("b", 2),
        ])
        .unwrap();
        let w = SiteWeights::new(vec![ratio(1, 4), ratio(1, 2)]).unwrap();
        let cost = SemiMetric::from_weights(&space, &w);
        // Construction re-validates the semi-metric axioms.
        assert!(SemiMetric::new(space.clone(), cost.matrix().to_vec()).is_ok());
        assert!(cost.is_symmetric());
        assert!(cost.is_nonnegative());
    }

    #[test]
    fn metric_validation_catches_violations() {
        // Zero off the diagonal.
        let err = Site::new(
            "bad",
            vec!["0".into(), "1".into()],
            vec![vec![int(0), int(0)], vec![int(0), int(0)]],
        )
        .unwrap_err();
        assert!(err
            .iter()
            .any(|e| matches!(e, ValidationError::NonMetric { .. })));

        // Triangle violation.
        let err = Site::new(
            "tri",
            vec!["0".into(), "1".into(), "2".into()],
            vec![
                vec![int(0), int(1), int(5)],
                vec![int(1), int(0), int(1)],
                vec![int(5), int(1), int(0)],
            ],
        )
        .unwrap_err();
        assert!(err
            .iter()
            .any(|e| matches!(e, ValidationError::NonMetric { detail, .. } if detail.contains("triangle"))));

        // Asymmetry.
        let err = Site::new(
            "asym",
            vec!["0".into(), "1".into()],
            vec![vec![int(0), int(1)], vec![int(2), int(0)]],
        )
        .unwrap_err();
        assert_eq!(err.len(), 1);
    }

    #[test]
    fn mass_validation() {
        let space = two_by_two();
        let err = Distribution::new(
            space.clone(),
            vec![ratio(1, 10), ratio(2, 10), ratio(3, 10), ratio(3, 10)],
        )
        .unwrap_err();
        assert!(matches!(&err[0], ValidationError::BadMass { detail, .. } if detail.contains("9/10")));

        let err =
            Distribution::new(space.clone(), vec![ratio(-1, 4), ratio(1, 2), ratio(1, 2), ratio(1, 4)])
                .unwrap_err();
        assert!(!err.is_empty());

        let ok = Distribution::new(
            space,
            vec![ratio(1, 4), ratio(1, 4), ratio(1, 4), ratio(1, 4)],
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn validate_instance_collects_everything() {
        let raw = RawInstance {
            sites: vec![RawSite {
                name: "a".into(),
                points: vec!["0".into(), "1".into()],
                metric: vec![vec![int(0), int(0)], vec![int(0), int(0)]],
            }],
            mu: vec![("0".into(), ratio(9, 10))],
            nu: vec![("0".into(), ratio(1, 2)), ("1".into(), ratio(1, 2))],
        };
        let errs = validate_instance(&raw).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, ValidationError::NonMetric { .. })));

        let raw = RawInstance {
            sites: vec![
                RawSite {
                    name: "a".into(),
                    points: vec!["0".into(), "1".into()],
                    metric: vec![vec![int(0), int(1)], vec![int(1), int(0)]],
                },
                RawSite {
                    name: "b".into(),
                    points: vec!["0".into(), "1".into()],
                    metric: vec![vec![int(0), int(1)], vec![int(1), int(0)]],
                },
            ],
            mu: vec![
                ("0,0".into(), ratio(1, 2)),
                ("1,1".into(), ratio(1, 2)),
            ],
            nu: vec![("0,1".into(), int(1))],
        };
        let inst = validate_instance(&raw).unwrap();
        assert_eq!(inst.mu.mass_of(0), &ratio(1, 2));
        assert_eq!(inst.nu.mass_of(1), &int(1));
    }

    #[test]
    fn coupling_marginals_checked_exactly() {
        let space = two_by_two();
        let mu = Distribution::uniform(space.clone());
        let nu = Distribution::dirac(space.clone(), &Config::new(vec![0, 0]));
        let c = Coupling::product(&mu, &nu);
        assert_eq!(c.first_marginal(), &mu);
        assert_eq!(c.second_marginal(), &nu);

        let mut bad = c.plan().to_vec();
        bad[0][0] += ratio(1, 100);
        assert!(Coupling::new(bad, mu.clone(), nu.clone()).is_err());

        let diag = Coupling::diagonal(&mu);
        assert_eq!(diag.worst_site_distance(), int(0));
    }

    #[test]
    fn site_marginals() {
        let space = two_by_two();
        let mu = Distribution::new(
            space,
            vec![ratio(3, 8), ratio(3, 8), ratio(1, 8), ratio(1, 8)],
        )
        .unwrap();
        assert_eq!(mu.site_marginal(0), vec![ratio(3, 4), ratio(1, 4)]);
        assert_eq!(mu.site_marginal(1), vec![ratio(1, 2), ratio(1, 2)]);
    }

    #[test]
    fn weights_must_lie_in_the_simplex() {
        assert!(SiteWeights::new(vec![ratio(1, 2), ratio(1, 2)]).is_ok());
        assert!(SiteWeights::new(vec![ratio(3, 4), ratio(1, 2)]).is_err());
        assert!(SiteWeights::new(vec![ratio(-1, 4), ratio(1, 2)]).is_err());
    }

    proptest! {
        #[test]
        fn config_indexing_is_a_bijection(sizes in proptest::collection::vec(1usize..5, 1..4)) {
            let sites: Vec<Site> = sizes
                .iter()
                .enumerate()
                .map(|(i, &n)| Site::discrete_indexed(format!("s{i}"), n))
                .collect();
            let space = ProductSpace::new(sites).unwrap();
            for i in 0..space.config_count() {
                prop_assert_eq!(space.index_of(&space.config_at(i)), i);
            }
            // Labels round-trip too.
            for c in space.configs() {
                let label = space.label_of(&c);
                prop_assert_eq!(space.config_from_label(&label).unwrap(), c);
            }
        }
    }
}
