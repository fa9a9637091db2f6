//! Versioned text formats.
//!
//! All documents are TOML with a `format = 1` header. Scalars are written
//! as plain integers or as `"p/q"` strings, so values survive a round trip
//! bit-exactly; there is no floating point in any input format. Mass maps
//! and function tables are keyed by configuration labels: the point labels
//! of a configuration joined with commas, e.g. `"H,T"`.
//!
//! Missing keys mean zero in mass and weight maps (convenient for Dirac
//! measures and sparse weight vectors) but are rejected in function and
//! cost tables, where totality is required.

use std::collections::BTreeMap;

use serde::Deserialize;
use thiserror::Error;

use crate::metrics::{DobrushinResult, SteifResult};
use crate::model::{
    ConfigFunction, Coupling, Instance, ProductSpace, RawInstance, RawSite,
    SemiMetric, SiteWeights, ValidationError,
};
use crate::rational::{decimal_approx, format_rational, parse_rational, Rational};
use std::sync::Arc;

pub const FORMAT_VERSION: i64 = 1;

/// Significant digits used for decimal annotations in result documents.
pub const DECIMAL_DIGITS: u32 = 12;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("document parse error: {0}")]
    Toml(String),
    #[error("unsupported format version {0}, expected {FORMAT_VERSION}")]
    Version(i64),
    #[error("bad scalar {text:?}: {detail}")]
    Scalar { text: String, detail: String },
    #[error("missing entry for {0:?}")]
    Missing(String),
}

/// A TOML scalar that is either an integer or a `"p/q"` string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawScalar {
    Int(i64),
    Text(String),
}

impl RawScalar {
    fn to_rational(&self) -> Result<Rational, FormatError> {
        match self {
            RawScalar::Int(n) => Ok(Rational::from_integer((*n).into())),
            RawScalar::Text(s) => parse_rational(s).map_err(|e| FormatError::Scalar {
                text: s.clone(),
                detail: e.to_string(),
            }),
        }
    }
}

fn check_version(format: i64) -> Result<(), FormatError> {
    if format == FORMAT_VERSION {
        Ok(())
    } else {
        Err(FormatError::Version(format))
    }
}

fn toml_err(e: impl std::fmt::Display) -> FormatError {
    FormatError::Toml(e.to_string())
}

fn quote(s: &str) -> String {
    // Labels are validated to contain no quotes, backslashes or control
    // characters, so plain quoting is exact.
    format!("\"{s}\"")
}

fn scalar(r: &Rational) -> String {
    if r.is_integer() {
        format_rational(r)
    } else {
        quote(&format_rational(r))
    }
}

// ---------------------------------------------------------------------------
// Instance documents
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    format: i64,
    sites: Vec<SiteDoc>,
    #[serde(default)]
    mu: BTreeMap<String, RawScalar>,
    #[serde(default)]
    nu: BTreeMap<String, RawScalar>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteDoc {
    name: String,
    points: Vec<String>,
    metric: Vec<Vec<RawScalar>>,
}

/// Parses an instance document into raw (not yet validated) data.
pub fn parse_instance(text: &str) -> Result<RawInstance, FormatError> {
    let doc: InstanceDoc = toml::from_str(text).map_err(toml_err)?;
    check_version(doc.format)?;
    let mut sites = Vec::with_capacity(doc.sites.len());
    for site in doc.sites {
        let metric = site
            .metric
            .iter()
            .map(|row| row.iter().map(RawScalar::to_rational).collect())
            .collect::<Result<Vec<Vec<Rational>>, FormatError>>()?;
        sites.push(RawSite {
            name: site.name,
            points: site.points,
            metric,
        });
    }
    let mass_entries = |map: BTreeMap<String, RawScalar>| {
        map.into_iter()
            .map(|(label, raw)| Ok((label, raw.to_rational()?)))
            .collect::<Result<Vec<(String, Rational)>, FormatError>>()
    };
    Ok(RawInstance {
        sites,
        mu: mass_entries(doc.mu)?,
        nu: mass_entries(doc.nu)?,
    })
}

/// Canonical text form of a validated instance. Zero masses are omitted;
/// parsing the output reproduces the instance exactly.
pub fn render_instance(instance: &Instance) -> String {
    let space = &instance.space;
    let mut out = String::new();
    out.push_str(&format!("format = {FORMAT_VERSION}\n"));
    for site in space.sites() {
        out.push_str("\n[[sites]]\n");
        out.push_str(&format!("name = {}\n", quote(site.name())));
        out.push_str(&format!(
            "points = [{}]\n",
            site.points()
                .iter()
                .map(|p| quote(p))
                .collect::<Vec<_>>()
                .join(", ")
        ));
        out.push_str("metric = [\n");
        for row in site.metric() {
            out.push_str(&format!(
                "    [{}],\n",
                row.iter().map(scalar).collect::<Vec<_>>().join(", ")
            ));
        }
        out.push_str("]\n");
    }
    for (name, dist) in [("mu", &instance.mu), ("nu", &instance.nu)] {
        out.push_str(&format!("\n[{name}]\n"));
        out.push_str(&render_mass_map(space, dist.mass()));
    }
    out
}

fn render_mass_map(space: &Arc<ProductSpace>, values: &[Rational]) -> String {
    use num_traits::Zero;
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        let label = space.label_of(&space.config_at(i));
        out.push_str(&format!("{} = {}\n", quote(&label), scalar(v)));
    }
    out
}

// ---------------------------------------------------------------------------
// Function documents
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionDoc {
    format: i64,
    values: BTreeMap<String, RawScalar>,
}

/// Parses a function document against a space; every configuration must
/// receive a value.
pub fn parse_function(
    text: &str,
    space: &Arc<ProductSpace>,
) -> Result<ConfigFunction, Vec<ValidationError>> {
    let doc: FunctionDoc =
        toml::from_str(text).map_err(|e| vec![format_to_validation(toml_err(e))])?;
    if let Err(e) = check_version(doc.format) {
        return Err(vec![format_to_validation(e)]);
    }
    let mut values = vec![None; space.config_count()];
    let mut errors = Vec::new();
    for (label, raw) in &doc.values {
        match (space.config_from_label(label), raw.to_rational()) {
            (Ok(config), Ok(v)) => values[space.index_of(&config)] = Some(v),
            (Err(e), _) => errors.push(e),
            (_, Err(e)) => errors.push(format_to_validation(e)),
        }
    }
    for (i, v) in values.iter().enumerate() {
        if v.is_none() {
            errors.push(ValidationError::ShapeMismatch {
                detail: format!(
                    "function is missing a value for {:?}",
                    space.label_of(&space.config_at(i))
                ),
            });
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let values = values.into_iter().map(Option::unwrap).collect();
    ConfigFunction::new(space.clone(), values)
}

/// Canonical text form of a function (total: every configuration listed).
pub fn render_function(f: &ConfigFunction) -> String {
    let space = f.space();
    let mut out = format!("format = {FORMAT_VERSION}\n\n[values]\n");
    for (i, v) in f.values().iter().enumerate() {
        let label = space.label_of(&space.config_at(i));
        out.push_str(&format!("{} = {}\n", quote(&label), scalar(v)));
    }
    out
}

fn format_to_validation(e: FormatError) -> ValidationError {
    ValidationError::ShapeMismatch {
        detail: e.to_string(),
    }
}

// ---------------------------------------------------------------------------
// Weight documents
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsDoc {
    format: i64,
    weights: BTreeMap<String, RawScalar>,
}

/// Parses site weights keyed by site name. Missing sites get weight zero;
/// the result is validated to lie in the weight simplex.
pub fn parse_weights(
    text: &str,
    space: &Arc<ProductSpace>,
) -> Result<SiteWeights, Vec<ValidationError>> {
    let doc: WeightsDoc =
        toml::from_str(text).map_err(|e| vec![format_to_validation(toml_err(e))])?;
    if let Err(e) = check_version(doc.format) {
        return Err(vec![format_to_validation(e)]);
    }
    let mut weights = vec![Rational::from_integer(0.into()); space.site_count()];
    let mut errors = Vec::new();
    for (name, raw) in &doc.weights {
        match (space.site_index(name), raw.to_rational()) {
            (Some(s), Ok(v)) => weights[s] = v,
            (None, _) => errors.push(ValidationError::ShapeMismatch {
                detail: format!("{name:?} is not a site of this instance"),
            }),
            (_, Err(e)) => errors.push(format_to_validation(e)),
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    SiteWeights::new(weights)
}

pub fn render_weights(space: &Arc<ProductSpace>, w: &SiteWeights) -> String {
    let mut out = format!("format = {FORMAT_VERSION}\n\n[weights]\n");
    for (s, v) in w.weights().iter().enumerate() {
        out.push_str(&format!(
            "{} = {}\n",
            quote(space.site(s).name()),
            scalar(v)
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Pair-cost documents
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostDoc {
    format: i64,
    cost: BTreeMap<String, BTreeMap<String, RawScalar>>,
}

/// Parses a pair-cost document: nested tables `[cost."x"]` with one entry
/// per target label. Diagonal entries may be omitted (they must be zero);
/// all other pairs are required. The result is validated as a semi-metric.
pub fn parse_cost(
    text: &str,
    space: &Arc<ProductSpace>,
) -> Result<SemiMetric, Vec<ValidationError>> {
    let doc: CostDoc = toml::from_str(text).map_err(|e| vec![format_to_validation(toml_err(e))])?;
    if let Err(e) = check_version(doc.format) {
        return Err(vec![format_to_validation(e)]);
    }
    let n = space.config_count();
    let mut cost = vec![vec![None; n]; n];
    let mut errors = Vec::new();
    for (from, row) in &doc.cost {
        let x = match space.config_from_label(from) {
            Ok(c) => space.index_of(&c),
            Err(e) => {
                errors.push(e);
                continue;
            }
        };
        for (to, raw) in row {
            match (space.config_from_label(to), raw.to_rational()) {
                (Ok(c), Ok(v)) => cost[x][space.index_of(&c)] = Some(v),
                (Err(e), _) => errors.push(e),
                (_, Err(e)) => errors.push(format_to_validation(e)),
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            if cost[x][y].is_none() && x != y {
                errors.push(ValidationError::ShapeMismatch {
                    detail: format!(
                        "cost is missing the pair ({:?}, {:?})",
                        space.label_of(&space.config_at(x)),
                        space.label_of(&space.config_at(y))
                    ),
                });
            }
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let cost = cost
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|v| v.unwrap_or_else(|| Rational::from_integer(0.into())))
                .collect()
        })
        .collect();
    SemiMetric::new(space.clone(), cost)
}

pub fn render_cost(c: &SemiMetric) -> String {
    let space = c.space();
    let n = space.config_count();
    let mut out = format!("format = {FORMAT_VERSION}\n");
    for x in 0..n {
        let from = space.label_of(&space.config_at(x));
        out.push_str(&format!("\n[cost.{}]\n", quote(&from)));
        for y in 0..n {
            if x == y {
                continue;
            }
            let to = space.label_of(&space.config_at(y));
            out.push_str(&format!("{} = {}\n", quote(&to), scalar(c.at(x, y))));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Result documents
// ---------------------------------------------------------------------------

fn render_value_block(out: &mut String, header: &str, value: &Rational) {
    out.push_str(&format!("\n[{header}]\n"));
    out.push_str(&format!("value = {}\n", quote(&format_rational(value))));
    out.push_str(&format!(
        "decimal = {}\n",
        quote(&decimal_approx(value, DECIMAL_DIGITS))
    ));
}

fn render_coupling_tables(out: &mut String, header: &str, plan: &Coupling) {
    use num_traits::Zero;
    let space = plan.space();
    for (x, row) in plan.plan().iter().enumerate() {
        if row.iter().all(|m| m.is_zero()) {
            continue;
        }
        let from = space.label_of(&space.config_at(x));
        out.push_str(&format!("\n[{header}.{}]\n", quote(&from)));
        for (y, m) in row.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            let to = space.label_of(&space.config_at(y));
            out.push_str(&format!("{} = {}\n", quote(&to), scalar(m)));
        }
    }
}

/// Structured result document for a distance computation. Either result
/// may be absent (when only one metric was requested); with both present
/// an explicit equality flag is included.
pub fn render_distance_report(
    space: &Arc<ProductSpace>,
    dobrushin: Option<&DobrushinResult>,
    steif: Option<&SteifResult>,
    witness: bool,
) -> String {
    let mut out = format!("format = {FORMAT_VERSION}\n");
    if let Some(d) = dobrushin {
        render_value_block(&mut out, "dobrushin", &d.value);
        if witness {
            out.push_str("\n[dobrushin.witness.weights]\n");
            for (s, v) in d.witness_e.weights().iter().enumerate() {
                out.push_str(&format!(
                    "{} = {}\n",
                    quote(space.site(s).name()),
                    scalar(v)
                ));
            }
            out.push_str("\n[dobrushin.witness.function]\n");
            for (i, v) in d.witness_f.values().iter().enumerate() {
                let label = space.label_of(&space.config_at(i));
                out.push_str(&format!("{} = {}\n", quote(&label), scalar(v)));
            }
        }
    }
    if let Some(s) = steif {
        render_value_block(&mut out, "steif", &s.value);
        if witness {
            render_coupling_tables(&mut out, "steif.witness.plan", &s.witness_plan);
        }
    }
    if let (Some(d), Some(s)) = (dobrushin, steif) {
        out.push_str("\n[comparison]\n");
        out.push_str(&format!("equal = {}\n", d.value == s.value));
    }
    out
}
