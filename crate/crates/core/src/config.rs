//! Scenario and bias-experiment files.
//!
//! Both are TOML. Units are fixed: meters, degrees (clockwise from North),
//! seconds and m/s. Unknown keys are rejected.
//!
//! Scenario file, one key per [`Scenario`] field:
//!
//! ```toml
//! b0 = 45.0
//! ts = 10.0
//! n = 120
//! noise_sigma = 1.0
//! ownship_start = { x = 0.0, y = 0.0 }   # optional, defaults to the origin
//!
//! [target]
//! r0 = 5000.0
//! course = 30.0
//! speed = 5.0
//!
//! [[legs]]
//! course = 100.0
//! speed = 5.0
//! duration = 595.0
//!
//! [[legs]]
//! course = 140.0
//! speed = 5.0
//! duration = 595.0
//! ```
//!
//! Bias file: a `[bias]` table with the [`BiasConfig`] fields and an optional
//! `[sweep]` table giving initial ranges either as `values = [...]` or as
//! `start`, `stop`, `step` (inclusive of `stop`).

use serde::{Deserialize, Serialize};

use crate::bias::BiasConfig;
use crate::error::{Error, Result};
use crate::estimator::GridAxis;
use crate::scenario::Scenario;

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string().trim_end().to_string()))
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let s: Scenario = parse(text)?;
    s.validate()?;
    Ok(s)
}

pub fn scenario_to_toml(s: &Scenario) -> String {
    toml::to_string(s).expect("scenario serializes")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl SweepSpec {
    pub fn r0_values(&self) -> Result<Vec<f64>> {
        let values = match (&self.values, self.start, self.stop, self.step) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(lo), Some(hi), Some(step)) => {
                let axis = GridAxis::new(lo, hi, step);
                axis.validate("sweep")?;
                axis.values()
            }
            _ => {
                return Err(Error::InvalidConfig(
                    "sweep: give either `values` or all of `start`, `stop`, `step`".into(),
                ))
            }
        };
        if values.is_empty() {
            return Err(Error::InvalidConfig("sweep: no ranges".into()));
        }
        if let Some(bad) = values.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
            return Err(Error::InvalidConfig(format!("sweep: range {bad} must be > 0")));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasFile {
    pub bias: BiasConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl BiasFile {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("bias file serializes")
    }
}

pub fn parse_bias(text: &str) -> Result<BiasFile> {
    let f: BiasFile = parse(text)?;
    f.bias.validate()?;
    if let Some(s) = &f.sweep {
        s.r0_values()?;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BearingDeg;

    const SCENARIO: &str = r#"
b0 = 45.0
ts = 10.0
n = 4
noise_sigma = 1.0

[target]
r0 = 5000.0
course = 30.0
speed = 5.0

[[legs]]
course = 100.0
speed = 5.0
duration = 30.0
"#;

    #[test]
    fn scenario_round_trip() {
        let s = parse_scenario(SCENARIO).unwrap();
        assert_eq!(s.b0, BearingDeg::new(45.0));
        assert_eq!(s.legs.len(), 1);
        assert_eq!(parse_scenario(&scenario_to_toml(&s)).unwrap(), s);
    }

    #[test]
    fn unknown_key_rejected_with_location() {
        let text = SCENARIO.replace("speed = 5.0\n\n[[legs]]", "speed = 5.0\nsped = 1\n\n[[legs]]");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("sped"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(parse_scenario(&SCENARIO.replace("n = 4", "n = 2")).is_err());
        assert!(parse_scenario(&SCENARIO.replace("duration = 30.0", "duration = 10.0")).is_err());
        assert!(parse_scenario(&SCENARIO.replace("r0 = 5000.0", "r0 = -1.0")).is_err());
    }

    const BIAS: &str = r#"
[bias]
r0 = 5000.0
b0 = 45.0
target_course = 30.0
target_speed = 5.0
ownship_course = 90.0
ownship_speed = 5.0
ts = 30.0
noise_sigma = 1.0
runs = 100000
"#;

    #[test]
    fn bias_file_forms() {
        let f = parse_bias(BIAS).unwrap();
        assert!(f.sweep.is_none());
        assert_eq!(f.bias.bins, 100);
        assert_eq!(parse_bias(&f.to_toml()).unwrap(), f);

        let f = parse_bias(&format!("{BIAS}\n[sweep]\nstart = 5000.0\nstop = 100000.0\nstep = 1000.0\n")).unwrap();
        let v = f.sweep.unwrap().r0_values().unwrap();
        assert_eq!(v.len(), 96);
        assert_eq!(v[95], 100000.0);

        let f = parse_bias(&format!("{BIAS}\n[sweep]\nvalues = [5000.0, 25000.0]\n")).unwrap();
        assert_eq!(f.sweep.unwrap().r0_values().unwrap(), vec![5000.0, 25000.0]);

        assert!(parse_bias(&format!("{BIAS}\n[sweep]\nvalues = [1.0]\nstep = 2.0\n")).is_err());
        assert!(parse_bias(&BIAS.replace("100000", "10")).is_err());
        assert!(parse_bias(&format!("{BIAS}\nextra = 1\n")).is_err());
    }
}
