//! Exact linear programming over rationals.
//!
//! A deliberately plain two-phase primal simplex on a dense tableau.
//! All arithmetic is arbitrary-precision rational, so there are no
//! tolerances anywhere: feasibility, optimality and the ratio test are
//! exact comparisons. Bland's least-index rule is used for both the
//! entering and leaving variable, which rules out cycling; with exact
//! arithmetic that is the only way a simplex run could fail to terminate.
//!
//! Every `Optimal` answer is re-verified against the original program
//! (constraints, bounds, and objective value) before it is returned.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// Per-variable bounds; `None` means unbounded on that side.
#[derive(Debug, Clone, Default)]
pub struct VarBounds {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl VarBounds {
    pub fn free() -> Self {
        VarBounds::default()
    }

    pub fn nonnegative() -> Self {
        VarBounds {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }

    pub fn fixed(value: Rational) -> Self {
        VarBounds {
            lower: Some(value.clone()),
            upper: Some(value),
        }
    }
}

/// Canonical-form program: optimize `objective . x` subject to linear
/// relations and per-variable bounds. Variables default to free.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBounds>,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<Rational>) -> Self {
        assert!(!objective.is_empty(), "a program needs at least one variable");
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            constraints: Vec::new(),
            bounds: vec![VarBounds::free(); n],
        }
    }

    pub fn var_count(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bounds(&mut self, var: usize, bounds: VarBounds) {
        self.bounds[var] = bounds;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(
            coeffs.len(),
            self.var_count(),
            "constraint arity must match variable count"
        );
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Human-readable text form for failure triage.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let sense = match self.sense {
            Sense::Maximize => "maximize",
            Sense::Minimize => "minimize",
        };
        out.push_str(sense);
        out.push(' ');
        out.push_str(&linear_form(&self.objective));
        out.push_str("\nsubject to\n");
        for (i, c) in self.constraints.iter().enumerate() {
            out.push_str(&format!(
                "  r{i}: {} {} {}\n",
                linear_form(&c.coeffs),
                c.relation,
                format_rational(&c.rhs)
            ));
        }
        out.push_str("bounds\n");
        for (j, b) in self.bounds.iter().enumerate() {
            let line = match (&b.lower, &b.upper) {
                (None, None) => format!("  x{j} free"),
                (Some(l), None) => format!("  x{j} >= {}", format_rational(l)),
                (None, Some(u)) => format!("  x{j} <= {}", format_rational(u)),
                (Some(l), Some(u)) if l == u => format!("  x{j} = {}", format_rational(l)),
                (Some(l), Some(u)) => format!(
                    "  {} <= x{j} <= {}",
                    format_rational(l),
                    format_rational(u)
                ),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

fn linear_form(coeffs: &[Rational]) -> String {
    let mut parts = Vec::new();
    for (j, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        parts.push(if c.is_one() {
            format!("x{j}")
        } else if (-c).is_one() {
            format!("-x{j}")
        } else {
            format!("{} x{j}", format_rational(c))
        });
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ").replace("+ -", "- ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpSolution {
    Optimal {
        value: Rational,
        primal: Vec<Rational>,
    },
    Infeasible,
    Unbounded,
}

impl LpSolution {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpSolution::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    /// Unwraps an optimum that the caller knows must exist.
    pub fn expect_optimal(self, what: &str) -> (Rational, Vec<Rational>) {
        match self {
            LpSolution::Optimal { value, primal } => (value, primal),
            other => panic!("{what}: expected an optimum, got {other:?}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Shape(String),
    #[error("exact certification of an optimal basis failed: {reason}\n{dump}")]
    Certification { reason: String, dump: String },
}

/// How an original variable is represented by the non-negative
/// tableau variables.
enum VarMap {
    Fixed(Rational),
    /// x = offset + y[col]
    Shifted { col: usize, offset: Rational },
    /// x = offset - y[col]
    Flipped { col: usize, offset: Rational },
    /// x = y[pos] - y[neg]
    Split { pos: usize, neg: usize },
}

struct Tableau {
    /// m rows, each `ncols + 1` wide; the last cell is the rhs.
    rows: Vec<Vec<Rational>>,
    /// Reduced costs, `ncols` wide.
    cost: Vec<Rational>,
    /// Current objective value (maximization form).
    value: Rational,
    basis: Vec<usize>,
    ncols: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.ncols]
    }

    /// Recomputes reduced costs and objective value for the cost vector
    /// `c` (length `ncols`) by pricing out the current basis.
    fn price_out(&mut self, c: &[Rational]) {
        self.cost = c.to_vec();
        self.value = Rational::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = c[b].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..self.ncols {
                if !self.rows[i][j].is_zero() {
                    let delta = &cb * &self.rows[i][j];
                    self.cost[j] -= delta;
                }
            }
            self.value += &cb * self.rhs(i);
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.ncols + 1;
        let pivot_value = self.rows[r][c].clone();
        debug_assert!(!pivot_value.is_zero());
        if !pivot_value.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v = &*v / &pivot_value;
                }
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        // Only the pivot row's nonzero columns can change anything.
        let touched: Vec<usize> = (0..width)
            .filter(|&j| j != c && !pivot_row[j].is_zero())
            .collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = std::mem::replace(&mut row[c], Rational::zero());
            if factor.is_zero() {
                continue;
            }
            for &j in &touched {
                row[j] -= &factor * &pivot_row[j];
            }
        }
        let factor = std::mem::replace(&mut self.cost[c], Rational::zero());
        if !factor.is_zero() {
            for &j in &touched {
                if j < self.ncols {
                    self.cost[j] -= &factor * &pivot_row[j];
                }
            }
            self.value += &factor * &pivot_row[self.ncols];
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Entering column under Dantzig's rule: the most positive reduced
    /// cost, ties broken by least index.
    fn entering_dantzig(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for j in 0..self.ncols {
            if self.cost[j].is_positive() && best.is_none_or(|b| self.cost[j] > self.cost[b]) {
                best = Some(j);
            }
        }
        best
    }

    /// Entering column under Bland's rule: least index with positive
    /// reduced cost.
    fn entering_bland(&self) -> Option<usize> {
        (0..self.ncols).find(|&j| self.cost[j].is_positive())
    }

    /// Simplex iterations to optimality or unboundedness.
    ///
    /// Dantzig's rule is used while the objective makes progress; after
    /// `STALL_LIMIT` consecutive degenerate pivots the loop falls back to
    /// Bland's least-index rule, which cannot cycle, and stays there until
    /// the objective strictly improves again. Exactness makes this the
    /// complete termination argument: a non-terminating run would have to
    /// stall forever, hence run Bland's rule forever, hence cycle.
    fn iterate(&mut self) -> PhaseOutcome {
        const STALL_LIMIT: u32 = 64;
        let mut stalled = 0u32;
        loop {
            let enter = if stalled < STALL_LIMIT {
                self.entering_dantzig()
            } else {
                self.entering_bland()
            };
            let Some(enter) = enter else {
                return PhaseOutcome::Optimal;
            };
            // Leaving: minimum ratio; ties by least basic-variable index
            // (part of Bland's anti-cycling guarantee).
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((leave, ratio)) = best else {
                return PhaseOutcome::Unbounded;
            };
            if ratio.is_zero() {
                stalled += 1;
            } else {
                stalled = 0;
            }
            self.pivot(leave, enter);
        }
    }
}

/// Solves the program exactly.
///
/// Deterministic: identical inputs take identical pivot sequences and
/// return identical solutions.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let n = lp.var_count();
    if lp.bounds.len() != n {
        return Err(LpError::Shape(format!(
            "{} bounds for {} variables",
            lp.bounds.len(),
            n
        )));
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(LpError::Shape(format!(
                "constraint {i} has {} coefficients for {} variables",
                c.coeffs.len(),
                n
            )));
        }
    }

    // Substitute every variable by non-negative tableau variables.
    let mut maps = Vec::with_capacity(n);
    let mut upper_rows: Vec<(usize, Rational)> = Vec::new();
    let mut ncols = 0usize;
    for b in &lp.bounds {
        match (&b.lower, &b.upper) {
            (Some(l), Some(u)) => {
                if l > u {
                    return Ok(LpSolution::Infeasible);
                }
                if l == u {
                    maps.push(VarMap::Fixed(l.clone()));
                } else {
                    maps.push(VarMap::Shifted {
                        col: ncols,
                        offset: l.clone(),
                    });
                    upper_rows.push((ncols, u - l));
                    ncols += 1;
                }
            }
            (Some(l), None) => {
                maps.push(VarMap::Shifted {
                    col: ncols,
                    offset: l.clone(),
                });
                ncols += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap::Flipped {
                    col: ncols,
                    offset: u.clone(),
                });
                ncols += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split {
                    pos: ncols,
                    neg: ncols + 1,
                });
                ncols += 2;
            }
        }
    }

    // Rows in the transformed coordinates.
    let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();
    for c in &lp.constraints {
        let mut coeffs = vec![Rational::zero(); ncols];
        let mut rhs = c.rhs.clone();
        for (j, a) in c.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            match &maps[j] {
                VarMap::Fixed(v) => rhs -= a * v,
                VarMap::Shifted { col, offset } => {
                    coeffs[*col] += a;
                    if !offset.is_zero() {
                        rhs -= a * offset;
                    }
                }
                VarMap::Flipped { col, offset } => {
                    coeffs[*col] -= a;
                    rhs -= a * offset;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[*pos] += a;
                    coeffs[*neg] -= a;
                }
            }
        }
        rows.push((coeffs, c.relation, rhs));
    }
    for (col, cap) in upper_rows {
        let mut coeffs = vec![Rational::zero(); ncols];
        coeffs[col] = Rational::one();
        rows.push((coeffs, Relation::Le, cap));
    }

    // Transformed objective, in maximization form; offsets contribute a
    // constant that the tableau never sees.
    let mut obj = vec![Rational::zero(); ncols];
    let mut obj_offset = Rational::zero();
    for (j, c) in lp.objective.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let c = match lp.sense {
            Sense::Maximize => c.clone(),
            Sense::Minimize => -c,
        };
        match &maps[j] {
            VarMap::Fixed(v) => obj_offset += &c * v,
            VarMap::Shifted { col, offset } => {
                obj[*col] += &c;
                obj_offset += &c * offset;
            }
            VarMap::Flipped { col, offset } => {
                obj[*col] -= &c;
                obj_offset += &c * offset;
            }
            VarMap::Split { pos, neg } => {
                obj[*pos] += &c;
                obj[*neg] -= &c;
            }
        }
    }

    // Non-negative rhs, then slacks and artificials.
    for (coeffs, relation, rhs) in rows.iter_mut() {
        if rhs.is_negative() {
            for v in coeffs.iter_mut() {
                if !v.is_zero() {
                    *v = -&*v;
                }
            }
            *rhs = -&*rhs;
            *relation = match relation {
                Relation::Le => Relation::Ge,
                Relation::Eq => Relation::Eq,
                Relation::Ge => Relation::Le,
            };
        }
    }
    let m = rows.len();
    let n_slack = rows
        .iter()
        .filter(|(_, rel, _)| !matches!(rel, Relation::Eq))
        .count();
    let n_artif = rows
        .iter()
        .filter(|(_, rel, _)| !matches!(rel, Relation::Le))
        .count();
    let slack_start = ncols;
    let artif_start = ncols + n_slack;
    let total = artif_start + n_artif;

    let mut tableau = Tableau {
        rows: Vec::with_capacity(m),
        cost: Vec::new(),
        value: Rational::zero(),
        basis: Vec::with_capacity(m),
        ncols: total,
    };
    let mut next_slack = slack_start;
    let mut next_artif = artif_start;
    for (coeffs, relation, rhs) in rows {
        let mut row = vec![Rational::zero(); total + 1];
        row[..ncols].clone_from_slice(&coeffs);
        row[total] = rhs;
        match relation {
            Relation::Le => {
                row[next_slack] = Rational::one();
                tableau.basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -Rational::one();
                next_slack += 1;
                row[next_artif] = Rational::one();
                tableau.basis.push(next_artif);
                next_artif += 1;
            }
            Relation::Eq => {
                row[next_artif] = Rational::one();
                tableau.basis.push(next_artif);
                next_artif += 1;
            }
        }
        tableau.rows.push(row);
    }

    // Phase 1: drive the artificial variables to zero.
    if n_artif > 0 {
        let mut phase1 = vec![Rational::zero(); total];
        for c in phase1.iter_mut().skip(artif_start) {
            *c = -Rational::one();
        }
        tableau.price_out(&phase1);
        match tableau.iterate() {
            PhaseOutcome::Optimal => {}
            PhaseOutcome::Unbounded => {
                // Cannot happen: the phase-1 objective is bounded above by 0.
                return Err(LpError::Certification {
                    reason: "phase-1 simplex reported an unbounded auxiliary program".into(),
                    dump: lp.dump(),
                });
            }
        }
        if tableau.value.is_negative() {
            return Ok(LpSolution::Infeasible);
        }
        // Pivot basic artificials out; rows that cannot pivot are redundant.
        let mut drop_rows = Vec::new();
        for i in 0..tableau.rows.len() {
            if tableau.basis[i] < artif_start {
                continue;
            }
            match (0..artif_start).find(|&j| !tableau.rows[i][j].is_zero()) {
                Some(j) => tableau.pivot(i, j),
                None => drop_rows.push(i),
            }
        }
        for &i in drop_rows.iter().rev() {
            tableau.rows.remove(i);
            tableau.basis.remove(i);
        }
        // Physically remove the artificial columns (they are the last block).
        for row in tableau.rows.iter_mut() {
            let rhs = row.pop().expect("row has rhs");
            row.truncate(artif_start);
            row.push(rhs);
        }
        tableau.ncols = artif_start;
    }

    // Phase 2 on the real objective.
    let mut phase2 = obj.clone();
    phase2.resize(tableau.ncols, Rational::zero());
    tableau.price_out(&phase2);
    match tableau.iterate() {
        PhaseOutcome::Optimal => {}
        PhaseOutcome::Unbounded => return Ok(LpSolution::Unbounded),
    }

    // Read the transformed solution and map it back.
    let mut y = vec![Rational::zero(); tableau.ncols];
    for (i, &b) in tableau.basis.iter().enumerate() {
        y[b] = tableau.rhs(i).clone();
    }
    let primal: Vec<Rational> = maps
        .iter()
        .map(|map| match map {
            VarMap::Fixed(v) => v.clone(),
            VarMap::Shifted { col, offset } => offset + &y[*col],
            VarMap::Flipped { col, offset } => offset - &y[*col],
            VarMap::Split { pos, neg } => &y[*pos] - &y[*neg],
        })
        .collect();
    let value: Rational = lp
        .objective
        .iter()
        .zip(&primal)
        .map(|(c, x)| c * x)
        .sum();

    certify(lp, &value, &primal, &(&tableau.value + &obj_offset))?;
    Ok(LpSolution::Optimal { value, primal })
}

/// Exact re-verification of a claimed optimal point against the original
/// program. Any failure here is a solver defect, not a property of the
/// input.
fn certify(
    lp: &LinearProgram,
    value: &Rational,
    primal: &[Rational],
    tableau_value: &Rational,
) -> Result<(), LpError> {
    let fail = |reason: String| {
        Err(LpError::Certification {
            reason,
            dump: lp.dump(),
        })
    };
    let expected_tableau = match lp.sense {
        Sense::Maximize => value.clone(),
        Sense::Minimize => -value,
    };
    if *tableau_value != expected_tableau {
        return fail(format!(
            "tableau objective {} disagrees with recomputed objective {}",
            format_rational(tableau_value),
            format_rational(value)
        ));
    }
    for (j, b) in lp.bounds.iter().enumerate() {
        if let Some(l) = &b.lower {
            if &primal[j] < l {
                return fail(format!(
                    "x{j} = {} violates lower bound {}",
                    format_rational(&primal[j]),
                    format_rational(l)
                ));
            }
        }
        if let Some(u) = &b.upper {
            if &primal[j] > u {
                return fail(format!(
                    "x{j} = {} violates upper bound {}",
                    format_rational(&primal[j]),
                    format_rational(u)
                ));
            }
        }
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        let lhs: Rational = c
            .coeffs
            .iter()
            .zip(primal)
            .filter(|(a, _)| !a.is_zero())
            .map(|(a, x)| a * x)
            .sum();
        let ok = match c.relation {
            Relation::Le => lhs <= c.rhs,
            Relation::Eq => lhs == c.rhs,
            Relation::Ge => lhs >= c.rhs,
        };
        if !ok {
            return fail(format!(
                "constraint r{i} violated: lhs = {}, rhs = {}",
                format_rational(&lhs),
                format_rational(&c.rhs)
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn nonneg(lp: &mut LinearProgram) {
        for j in 0..lp.var_count() {
            lp.set_bounds(j, VarBounds::nonnegative());
        }
    }

    #[test]
    fn one_variable_box() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![int(1)]);
        nonneg(&mut lp);
        lp.add_constraint(vec![int(1)], Relation::Le, int(1));
        let sol = solve(&lp).unwrap();
        assert_eq!(
            sol,
            LpSolution::Optimal {
                value: int(1),
                primal: vec![int(1)]
            }
        );
    }

    #[test]
    fn infeasible_box() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![int(1)]);
        nonneg(&mut lp);
        lp.add_constraint(vec![int(1)], Relation::Le, int(-1));
        assert_eq!(solve(&lp).unwrap(), LpSolution::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![int(1)]);
        nonneg(&mut lp);
        assert_eq!(solve(&lp).unwrap(), LpSolution::Unbounded);

        // Free variable, no constraints, minimizing.
        let lp = LinearProgram::new(Sense::Minimize, vec![int(1)]);
        assert_eq!(solve(&lp).unwrap(), LpSolution::Unbounded);
    }

    #[test]
    fn small_transportation_problem() {
        // Marginals (1/2, 1/2) on both sides, cost [[0,1],[1,0]].
        // Vertices of the one-parameter coupling family give optimum 0.
        let mut lp = LinearProgram::new(
            Sense::Minimize,
            vec![int(0), int(1), int(1), int(0)],
        );
        nonneg(&mut lp);
        let half = ratio(1, 2);
        lp.add_constraint(vec![int(1), int(1), int(0), int(0)], Relation::Eq, half.clone());
        lp.add_constraint(vec![int(0), int(0), int(1), int(1)], Relation::Eq, half.clone());
        lp.add_constraint(vec![int(1), int(0), int(1), int(0)], Relation::Eq, half.clone());
        lp.add_constraint(vec![int(0), int(1), int(0), int(1)], Relation::Eq, half.clone());
        let (value, primal) = solve(&lp).unwrap().expect_optimal("transport");
        assert_eq!(value, int(0));
        assert_eq!(primal[0], half);
        assert_eq!(primal[3], half);
    }

    #[test]
    fn free_and_bounded_variables() {
        // max x + y with x free below, x <= 3, -5 <= y <= -2.
        let mut lp = LinearProgram::new(Sense::Maximize, vec![int(1), int(1)]);
        lp.set_bounds(
            0,
            VarBounds {
                lower: None,
                upper: Some(int(3)),
            },
        );
        lp.set_bounds(
            1,
            VarBounds {
                lower: Some(int(-5)),
                upper: Some(int(-2)),
            },
        );
        let (value, primal) = solve(&lp).unwrap().expect_optimal("box");
        assert_eq!(value, int(1));
        assert_eq!(primal, vec![int(3), int(-2)]);
    }

    #[test]
    fn fixed_variable_is_substituted() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![int(2), int(1)]);
        lp.set_bounds(0, VarBounds::fixed(ratio(1, 3)));
        lp.set_bounds(1, VarBounds::nonnegative());
        lp.add_constraint(vec![int(1), int(1)], Relation::Le, int(1));
        let (value, primal) = solve(&lp).unwrap().expect_optimal("fixed");
        assert_eq!(primal[0], ratio(1, 3));
        assert_eq!(primal[1], ratio(2, 3));
        assert_eq!(value, ratio(4, 3));
    }

    #[test]
    fn crossing_bounds_infeasible() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![int(1)]);
        lp.set_bounds(
            0,
            VarBounds {
                lower: Some(int(2)),
                upper: Some(int(1)),
            },
        );
        assert_eq!(solve(&lp).unwrap(), LpSolution::Infeasible);
    }

    #[test]
    fn equality_with_negative_rhs() {
        // -x = -3, x >= 0  ->  x = 3.
        let mut lp = LinearProgram::new(Sense::Minimize, vec![int(1)]);
        nonneg(&mut lp);
        lp.add_constraint(vec![int(-1)], Relation::Eq, int(-3));
        let (value, _) = solve(&lp).unwrap().expect_optimal("negated row");
        assert_eq!(value, int(3));
    }

    #[test]
    fn degenerate_cycling_guard() {
        // Beale's classic degenerate example; Dantzig's rule cycles on it,
        // Bland's rule must terminate at value 1/20.
        let mut lp = LinearProgram::new(
            Sense::Maximize,
            vec![ratio(3, 4), int(-150), ratio(1, 50), int(-6)],
        );
        nonneg(&mut lp);
        lp.add_constraint(
            vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9)],
            Relation::Le,
            int(0),
        );
        lp.add_constraint(
            vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3)],
            Relation::Le,
            int(0),
        );
        lp.add_constraint(vec![int(0), int(0), int(1), int(0)], Relation::Le, int(1));
        let (value, _) = solve(&lp).unwrap().expect_optimal("beale");
        assert_eq!(value, ratio(1, 20));
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        // x + y = 1 stated twice plus its double.
        let mut lp = LinearProgram::new(Sense::Maximize, vec![int(1), int(0)]);
        nonneg(&mut lp);
        lp.add_constraint(vec![int(1), int(1)], Relation::Eq, int(1));
        lp.add_constraint(vec![int(1), int(1)], Relation::Eq, int(1));
        lp.add_constraint(vec![int(2), int(2)], Relation::Eq, int(2));
        let (value, _) = solve(&lp).unwrap().expect_optimal("redundant");
        assert_eq!(value, int(1));
    }

    #[test]
    fn ge_constraints() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![int(3), int(5)]);
        nonneg(&mut lp);
        lp.add_constraint(vec![int(1), int(2)], Relation::Ge, int(4));
        lp.add_constraint(vec![int(3), int(1)], Relation::Ge, int(6));
        let (value, primal) = solve(&lp).unwrap().expect_optimal("ge");
        // Vertex of the two constraints: x = 8/5, y = 6/5.
        assert_eq!(primal, vec![ratio(8, 5), ratio(6, 5)]);
        assert_eq!(value, ratio(54, 5));
    }

    #[test]
    fn deterministic_resolves() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![int(1), int(1), int(1)]);
        nonneg(&mut lp);
        lp.add_constraint(vec![int(1), int(1), int(0)], Relation::Le, int(2));
        lp.add_constraint(vec![int(0), int(1), int(1)], Relation::Le, int(2));
        lp.add_constraint(vec![int(1), int(0), int(1)], Relation::Le, int(2));
        let a = solve(&lp).unwrap();
        let b = solve(&lp).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dump_is_readable() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![int(3), ratio(-1, 2)]);
        lp.set_bounds(0, VarBounds::nonnegative());
        lp.add_constraint(vec![int(1), int(1)], Relation::Le, ratio(7, 2));
        let text = lp.dump();
        assert!(text.contains("maximize 3 x0 - 1/2 x1"));
        assert!(text.contains("r0: x0 + x1 <= 7/2"));
        assert!(text.contains("x0 >= 0"));
        assert!(text.contains("x1 free"));
    }
}
