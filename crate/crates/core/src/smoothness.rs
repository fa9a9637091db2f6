//! Smoothness of functions on a product space.
//!
//! The central quantities are the per-site partial Lipschitz constants and
//! their sum, the Dobrushin semi-norm. The second half of the module is the
//! c-transform toolkit for general semi-metric pair costs: 1-Lipschitz
//! functions, c-convexity, and the fixed-point characterisation tying the
//! two together.

use num_traits::Zero;

use crate::model::{Config, ConfigFunction, SemiMetric, SiteWeights};
use crate::rational::Rational;

/// Best Lipschitz bound of `f` along changes at site `s` only: the exact
/// maximum of `(f(x) - f(y)) / d_s(x, y)` over ordered pairs that differ
/// only in coordinate `s`.
///
/// Both orders of every pair are included, so the result is non-negative;
/// a site with a single point contributes 0 (empty supremum).
pub fn partial_lipschitz(f: &ConfigFunction, s: usize) -> Rational {
    let space = f.space();
    assert!(s < space.site_count(), "site index out of range");
    let site = space.site(s);
    let mut best: Option<Rational> = None;
    for x in space.configs() {
        let fx = f.value_at(space.index_of(&x));
        let a = x.coord(s);
        for b in 0..site.len() {
            if b == a {
                continue;
            }
            let y = x.with_coord(s, b);
            let fy = f.value_at(space.index_of(&y));
            let ratio = (fx - fy) / site.distance(a, b);
            if best.as_ref().is_none_or(|r| ratio > *r) {
                best = Some(ratio);
            }
        }
    }
    best.unwrap_or_else(Rational::zero)
}

/// All partial Lipschitz constants of `f`, one per site.
pub fn partial_lipschitz_vector(f: &ConfigFunction) -> Vec<Rational> {
    (0..f.space().site_count())
        .map(|s| partial_lipschitz(f, s))
        .collect()
}

/// Dobrushin semi-norm: the sum of the partial Lipschitz constants.
/// Zero exactly on constant functions.
pub fn dobrushin_norm(f: &ConfigFunction) -> Rational {
    partial_lipschitz_vector(f).into_iter().sum()
}

/// True iff `f(x) - f(y) <= sum_s w_s d_s(x, y)` for every ordered pair,
/// i.e. `f` is 1-Lipschitz for the weighted cost induced by `w`.
pub fn is_weighted_lipschitz(f: &ConfigFunction, w: &SiteWeights) -> bool {
    let space = f.space();
    assert_eq!(
        w.len(),
        space.site_count(),
        "weight vector length mismatch"
    );
    let configs: Vec<Config> = space.configs().collect();
    for (xi, x) in configs.iter().enumerate() {
        for (yi, y) in configs.iter().enumerate() {
            if xi == yi {
                continue;
            }
            let diff = f.value_at(xi) - f.value_at(yi);
            if diff > space.weighted_cost(w, x, y) {
                return false;
            }
        }
    }
    true
}

/// The telescoping bound `f(x) - f(y) <= sum_s Delta_s(f) d_s(x, y)`,
/// obtained by changing coordinates of `x` into those of `y` one site at a
/// time. Holds for every pair; checking it exercises `partial_lipschitz`.
pub fn chain_bound_holds(f: &ConfigFunction, x: &Config, y: &Config) -> bool {
    let space = f.space();
    let deltas = partial_lipschitz_vector(f);
    let mut bound = Rational::zero();
    for (s, delta) in deltas.iter().enumerate() {
        if !delta.is_zero() {
            bound += delta * space.site_distance(s, x, y);
        }
    }
    let diff = f.value_at(space.index_of(x)) - f.value_at(space.index_of(y));
    diff <= bound
}

/// c-transform: `psi^c(x) = min_y (psi(y) + c(y, x))`.
///
/// The result is always 1-Lipschitz with respect to `c`, and applying the
/// transform twice changes nothing more (`psi^cc = psi^c`).
pub fn c_transform(psi: &ConfigFunction, c: &SemiMetric) -> ConfigFunction {
    let space = psi.space();
    assert_eq!(
        space.config_count(),
        c.space().config_count(),
        "function and cost shapes differ"
    );
    let n = space.config_count();
    let values = (0..n)
        .map(|x| {
            (0..n)
                .map(|y| psi.value_at(y) + c.at(y, x))
                .min()
                .expect("non-empty space")
        })
        .collect();
    ConfigFunction::new(space.clone(), values).expect("same shape as psi")
}

/// True iff `psi(x) - psi(x') <= c(x', x)` for all ordered pairs.
///
/// For asymmetric costs the argument order matters: the bound for going
/// from `x'` to `x` is `c(x', x)`. Reversing roles also yields
/// `psi(x) - psi(x') >= -c(x, x')`.
pub fn is_one_lipschitz(psi: &ConfigFunction, c: &SemiMetric) -> bool {
    let n = psi.space().config_count();
    for x in 0..n {
        for xp in 0..n {
            if x == xp {
                continue;
            }
            if psi.value_at(x) - psi.value_at(xp) > *c.at(xp, x) {
                return false;
            }
        }
    }
    true
}

/// c-convexity, decided through the fixed-point criterion
/// `psi^c = psi`, which for semi-metric costs is equivalent both to the
/// existential definition (some `zeta` with
/// `psi(x) = sup_y (zeta(y) - c(x, y))`) and to being 1-Lipschitz.
pub fn is_c_convex(psi: &ConfigFunction, c: &SemiMetric) -> bool {
    c_transform(psi, c) == *psi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ProductSpace, Site};
    use crate::rational::{int, ratio};
    use std::sync::Arc;

    fn two_site_space() -> Arc<ProductSpace> {
        ProductSpace::new(vec![
            Site::discrete_indexed("a", 2),
            Site::discrete_indexed("b", 2),
        ])
        .unwrap()
    }

    /// Independent recomputation of the partial Lipschitz constant by
    /// scanning all ordered configuration pairs and filtering the ones
    /// agreeing off `s`.
    fn delta_by_full_scan(f: &ConfigFunction, s: usize) -> Rational {
        let space = f.space();
        let configs: Vec<Config> = space.configs().collect();
        let mut best = Rational::zero();
        for (xi, x) in configs.iter().enumerate() {
            for (yi, y) in configs.iter().enumerate() {
                if xi == yi {
                    continue;
                }
                let agree_off_s = (0..space.site_count())
                    .all(|t| t == s || x.coord(t) == y.coord(t));
                if !agree_off_s || x.coord(s) == y.coord(s) {
                    continue;
                }
                let ratio = (f.value_at(xi) - f.value_at(yi)) / space.site_distance(s, x, y);
                if ratio > best {
                    best = ratio;
                }
            }
        }
        best
    }

    #[test]
    fn constants_have_zero_norm() {
        let space = two_site_space();
        let f = ConfigFunction::constant(space, ratio(7, 3));
        assert_eq!(partial_lipschitz(&f, 0), int(0));
        assert_eq!(partial_lipschitz(&f, 1), int(0));
        assert_eq!(dobrushin_norm(&f), int(0));
    }

    #[test]
    fn single_point_sites_contribute_nothing() {
        // No pair differs only at a one-point site: empty supremum.
        let space = ProductSpace::new(vec![
            Site::discrete_indexed("only", 1),
            Site::discrete_indexed("b", 3),
        ])
        .unwrap();
        // Values 0, 2, 4 on a discrete 3-point site: worst jump 4 at distance 1.
        let f = ConfigFunction::from_fn(space, |c| int(2 * c.coord(1) as i64));
        assert_eq!(partial_lipschitz(&f, 0), int(0));
        assert_eq!(partial_lipschitz(&f, 1), int(4));
        assert_eq!(dobrushin_norm(&f), int(4));
    }

    #[test]
    fn function_ignoring_a_site_has_zero_delta_there() {
        let space = two_site_space();
        // Depends on site 0 only.
        let f = ConfigFunction::indicator_site_point(space, 0, 1);
        assert_eq!(partial_lipschitz(&f, 0), int(1));
        assert_eq!(partial_lipschitz(&f, 1), int(0));
        assert_eq!(dobrushin_norm(&f), int(1));
        assert_eq!(delta_by_full_scan(&f, 0), int(1));
        assert_eq!(delta_by_full_scan(&f, 1), int(0));
    }

    #[test]
    fn norm_of_sum_of_per_site_functions() {
        // f(x) = g0(x_0) + g1(x_1) on a (2,3) space with non-discrete metric.
        let site0 = Site::new(
            "a",
            vec!["0".into(), "1".into()],
            vec![vec![int(0), ratio(1, 2)], vec![ratio(1, 2), int(0)]],
        )
        .unwrap();
        let site1 = Site::discrete_indexed("b", 3);
        let space = ProductSpace::new(vec![site0, site1]).unwrap();
        let g0 = [int(0), int(2)];
        let g1 = [int(0), ratio(1, 3), int(1)];
        let f = ConfigFunction::from_fn(space.clone(), |c| {
            &g0[c.coord(0)] + &g1[c.coord(1)]
        });
        let d0 = partial_lipschitz(&f, 0);
        let d1 = partial_lipschitz(&f, 1);
        assert_eq!(d0, delta_by_full_scan(&f, 0));
        assert_eq!(d1, delta_by_full_scan(&f, 1));
        // g0 jumps by 2 over distance 1/2; g1's worst ratio is 1.
        assert_eq!(d0, int(4));
        assert_eq!(d1, int(1));
        assert_eq!(dobrushin_norm(&f), int(5));
    }

    #[test]
    fn norm_is_absolutely_homogeneous() {
        let space = two_site_space();
        let f = ConfigFunction::from_fn(space, |c| {
            int(c.coord(0) as i64) + ratio(c.coord(1) as i64, 3)
        });
        let scaled = f.scale(&int(-2));
        assert_eq!(dobrushin_norm(&scaled), int(2) * dobrushin_norm(&f));
    }

    #[test]
    fn weighted_lipschitz_membership() {
        let space = two_site_space();
        let constant = ConfigFunction::constant(space.clone(), int(5));
        let w = SiteWeights::new(vec![ratio(1, 4), ratio(1, 4)]).unwrap();
        assert!(is_weighted_lipschitz(&constant, &w));

        // An indicator has norm 1 and lies in the ball of its own deltas.
        let f = ConfigFunction::indicator_site_point(space.clone(), 1, 1);
        let deltas = SiteWeights::new(partial_lipschitz_vector(&f)).unwrap();
        assert!(is_weighted_lipschitz(&f, &deltas));

        // Twice the indicator needs weight 2 at its site: impossible inside
        // the simplex. Check over the resolution-4 grid.
        let g = f.scale(&int(2));
        for e in SiteWeights::grid(2, 4) {
            assert!(!is_weighted_lipschitz(&g, &e));
        }
    }

    #[test]
    fn chain_bound_exhaustive_on_small_space() {
        let space = two_site_space();
        let f = ConfigFunction::from_fn(space.clone(), |c| {
            ratio(3 * c.coord(0) as i64, 2) - int(c.coord(1) as i64)
        });
        let configs: Vec<Config> = space.configs().collect();
        for x in &configs {
            for y in &configs {
                assert!(chain_bound_holds(&f, x, y));
            }
        }
    }

    fn simple_cost(space: &Arc<ProductSpace>) -> SemiMetric {
        let w = SiteWeights::new(vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        SemiMetric::from_weights(space, &w)
    }

    #[test]
    fn c_transform_fixes_constants_for_nonnegative_costs() {
        let space = two_site_space();
        let c = simple_cost(&space);
        let psi = ConfigFunction::constant(space, ratio(-3, 7));
        assert_eq!(c_transform(&psi, &c), psi);
        assert!(is_one_lipschitz(&psi, &c));
        assert!(is_c_convex(&psi, &c));
    }

    #[test]
    fn transform_output_is_one_lipschitz_and_idempotent() {
        let space = two_site_space();
        let c = simple_cost(&space);
        let psi = ConfigFunction::new(
            space.clone(),
            vec![int(3), int(-2), ratio(7, 2), int(0)],
        )
        .unwrap();
        assert!(!is_one_lipschitz(&psi, &c));
        assert!(!is_c_convex(&psi, &c));
        let t = c_transform(&psi, &c);
        assert!(is_one_lipschitz(&t, &c));
        assert!(is_c_convex(&t, &c));
        assert_eq!(c_transform(&t, &c), t);
    }

    #[test]
    fn one_lipschitz_functions_are_fixed_points() {
        let space = two_site_space();
        let c = simple_cost(&space);
        // Build a 1-Lipschitz function via the transform, then check the
        // individual jump bound reverses as well.
        let seed = ConfigFunction::new(
            space.clone(),
            vec![int(1), int(0), int(2), int(-1)],
        )
        .unwrap();
        let psi = c_transform(&seed, &c);
        assert_eq!(c_transform(&psi, &c), psi);
        let n = space.config_count();
        for x in 0..n {
            for xp in 0..n {
                let diff = psi.value_at(x) - psi.value_at(xp);
                assert!(diff >= -c.at(x, xp).clone());
            }
        }
    }

    #[test]
    fn jump_larger_than_cost_is_not_lipschitz() {
        let space = two_site_space();
        let c = simple_cost(&space);
        // Jump of 2 across a pair at weighted cost 1/2.
        let psi = ConfigFunction::new(
            space,
            vec![int(2), int(0), int(0), int(0)],
        )
        .unwrap();
        assert!(!is_one_lipschitz(&psi, &c));
    }

    proptest::proptest! {
        #[test]
        fn chain_bound_holds_for_every_function(values in proptest::collection::vec(-12i64..12, 6)) {
            let space = ProductSpace::new(vec![
                Site::discrete_indexed("a", 2),
                Site::discrete_indexed("b", 3),
            ])
            .unwrap();
            let f = ConfigFunction::new(
                space.clone(),
                values.iter().map(|&v| ratio(v, 4)).collect(),
            )
            .unwrap();
            let configs: Vec<Config> = space.configs().collect();
            for x in &configs {
                for y in &configs {
                    proptest::prop_assert!(chain_bound_holds(&f, x, y));
                }
            }
        }
    }

    #[test]
    fn definitional_c_convexity_matches_fixed_point() {
        let space = two_site_space();
        let c = simple_cost(&space);
        // psi(x) = max_y (zeta(y) - c(x, y)) for an arbitrary zeta.
        let zeta = [int(2), ratio(-1, 2), int(1), int(0)];
        let n = space.config_count();
        let values: Vec<Rational> = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| &zeta[y] - c.at(x, y))
                    .max()
                    .unwrap()
            })
            .collect();
        let psi = ConfigFunction::new(space, values).unwrap();
        assert!(is_c_convex(&psi, &c));
        assert!(is_one_lipschitz(&psi, &c));
    }
}
