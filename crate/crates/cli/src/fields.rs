//! Field construction from the config's field spec.

use schwarz_core::{GridDomain, ScalarField};

use crate::config::{FieldSpec, RunError};

/// Named preset fields.
pub const PRESETS: &[&str] = &["one", "cone", "linear-x", "pyramid"];

pub fn build_field(domain: &GridDomain, spec: &FieldSpec) -> Result<ScalarField, RunError> {
    match spec.kind.as_str() {
        "expression" => {
            let text = spec
                .params
                .get("expr")
                .and_then(|v| v.as_str())
                .ok_or_else(|| RunError::config("expression field needs params.expr"))?;
            let expr = crate::expr::parse(text).map_err(RunError::Config)?;
            from_values(domain, |x, y| expr.eval(x, y), text)
        }
        "preset" => {
            let name = spec
                .params
                .get("name")
                .and_then(|v| v.as_str())
                .ok_or_else(|| RunError::config("preset field needs params.name"))?;
            let (lo, hi) = domain.bbox();
            let (lx, ly) = (hi[0] - lo[0], hi[1] - lo[1]);
            match name {
                "one" => from_values(domain, |_, _| 1.0, name),
                "cone" => from_values(domain, |x, y| (1.0 - x.hypot(y)).max(0.0), name),
                "linear-x" => from_values(domain, |x, _| x, name),
                "pyramid" => from_values(
                    domain,
                    move |x, y| {
                        let xh = (x - lo[0]) / lx;
                        let yh = (y - lo[1]) / ly;
                        xh.min(1.0 - xh).min(yh).min(1.0 - yh).max(0.0)
                    },
                    name,
                ),
                other => Err(RunError::config(format!("unknown preset {other:?}"))),
            }
        }
        "random-smooth" => {
            let seed = spec
                .seed
                .ok_or_else(|| RunError::config("random-smooth field requires a seed"))?;
            Ok(ScalarField::random_smooth(domain, seed))
        }
        other => Err(RunError::config(format!("unknown field kind {other:?}"))),
    }
}

fn from_values(
    domain: &GridDomain,
    f: impl Fn(f64, f64) -> f64,
    what: &str,
) -> Result<ScalarField, RunError> {
    let values: Vec<f64> = domain
        .cells()
        .iter()
        .map(|c| f(c.center[0], c.center[1]))
        .collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !min.is_finite() || min < -1e-9 {
        return Err(RunError::config(format!(
            "field {what:?} must be nonnegative on the domain (min = {min:.3e}); \
             wrap it in max(..., 0) if a clamp is intended"
        )));
    }
    // Absorb roundoff-level negatives from expression evaluation.
    let values = values.into_iter().map(|v| v.max(0.0)).collect();
    ScalarField::from_values(domain, values).map_err(RunError::runtime)
}
