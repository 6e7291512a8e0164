// SPDX-License-Identifier: Apache-2.0

//! JSON measure specs shared by every command.
//!
//! ```json
//! {"type": "atoms", "atoms": [[0.0, 0.5], [1.0, 0.5]]}
//! {"type": "density", "grid": [-1, 0, 1], "values": [0, 1, 0], "atoms": []}
//! {"type": "semicircle"}
//! {"type": "arcsine"}
//! {"type": "two_point", "p": 0.3}
//! {"type": "pair", "alpha": 0.0, "nu": {"atoms": [[0.0, 1.0]]}}
//! ```
//!
//! A measure written as plot CSV (`x,cdf,density`) is accepted as well.
//! Probability specs must carry unit mass; the `nu` of a pair is any finite
//! measure, given by `atoms` and/or `grid` + `values`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infdiv::GeneratingPair;
use crate::measures::{Density, FiniteMeasure, Measure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Atoms {
        atoms: Vec<(f64, f64)>,
    },
    Density {
        grid: Vec<f64>,
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        atoms: Vec<(f64, f64)>,
    },
    Semicircle,
    Arcsine,
    TwoPoint {
        p: f64,
    },
    Pair {
        alpha: f64,
        nu: FiniteSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

/// What a spec file describes.
#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    Measure(Measure),
    Pair(GeneratingPair),
}

impl Parsed {
    pub fn into_measure(self) -> Result<Measure> {
        match self {
            Parsed::Measure(m) => Ok(m),
            Parsed::Pair(_) => Err(Error::Parse("expected a probability measure, found a pair".into())),
        }
    }

    pub fn into_pair(self) -> Result<GeneratingPair> {
        match self {
            Parsed::Pair(p) => Ok(p),
            Parsed::Measure(_) => Err(Error::Parse("expected a generating pair, found a measure".into())),
        }
    }
}

/// Parses a JSON spec, or a measure in plot CSV form (recognised by its
/// header row).
pub fn parse_measure_spec(text: &str) -> Result<Parsed> {
    if text.trim_start().starts_with(super::plot::MEASURE_HEADER) {
        return super::plot::measure_from_plot_data(text).map(Parsed::Measure);
    }
    let spec: MeasureSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    spec.build()
}

impl MeasureSpec {
    pub fn build(&self) -> Result<Parsed> {
        let m = match self {
            MeasureSpec::Atoms { atoms } => Measure::atoms(atoms.clone())?,
            MeasureSpec::Density { grid, values, atoms } => {
                Measure::mixed(atoms.clone(), grid.clone(), values.clone())?
            }
            MeasureSpec::Semicircle => Measure::semicircle(),
            MeasureSpec::Arcsine => Measure::arcsine(),
            MeasureSpec::TwoPoint { p } => Measure::two_point(*p)?,
            MeasureSpec::Pair { alpha, nu } => {
                return Ok(Parsed::Pair(GeneratingPair::new(*alpha, nu.build()?)?));
            }
        };
        Ok(Parsed::Measure(m))
    }

    /// Spec of a stored measure, exact to the last bit once serialized.
    pub fn of_measure(m: &FiniteMeasure) -> MeasureSpec {
        let atoms: Vec<(f64, f64)> = m.atoms().iter().map(|a| (a.position, a.weight)).collect();
        match m.density() {
            None => MeasureSpec::Atoms { atoms },
            Some(d) => MeasureSpec::Density {
                grid: d.grid().to_vec(),
                values: d.values().to_vec(),
                atoms,
            },
        }
    }

    pub fn of_pair(pair: &GeneratingPair) -> MeasureSpec {
        let nu = &pair.nu;
        MeasureSpec::Pair {
            alpha: pair.alpha,
            nu: FiniteSpec {
                atoms: nu.atoms().iter().map(|a| (a.position, a.weight)).collect(),
                grid: nu.density().map(|d| d.grid().to_vec()),
                values: nu.density().map(|d| d.values().to_vec()),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("specs hold only finite numbers")
    }
}

impl FiniteSpec {
    pub fn build(&self) -> Result<FiniteMeasure> {
        let density = match (&self.grid, &self.values) {
            (Some(g), Some(v)) => Some(Density::new(g.clone(), v.clone())?),
            (None, None) => None,
            _ => return Err(Error::Parse("nu needs both grid and values, or neither".into())),
        };
        FiniteMeasure::new(self.atoms.clone(), density)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::plot::{render, PlotData};
    use crate::measures::kolmogorov;

    #[test]
    fn dirac_from_atoms() {
        let m = parse_measure_spec(r#"{"type":"atoms","atoms":[[0.0,1.0]]}"#)
            .unwrap()
            .into_measure()
            .unwrap();
        assert_eq!(m, Measure::dirac(0.0));
    }

    #[test]
    fn named_families_dispatch() {
        let m = parse_measure_spec(r#"{"type":"two_point","p":0.3}"#).unwrap().into_measure().unwrap();
        assert_eq!(m, Measure::two_point(0.3).unwrap());
        let s = parse_measure_spec(r#"{"type":"semicircle"}"#).unwrap().into_measure().unwrap();
        assert_eq!(s, Measure::semicircle());
    }

    #[test]
    fn bad_mass_unknown_tag_and_bad_json_fail() {
        assert!(matches!(
            parse_measure_spec(r#"{"type":"atoms","atoms":[[0,0.5]]}"#),
            Err(Error::InvalidMeasure(_))
        ));
        assert!(matches!(parse_measure_spec(r#"{"type":"cauchy"}"#), Err(Error::Parse(_))));
        assert!(matches!(parse_measure_spec("{"), Err(Error::Parse(_))));
        assert!(matches!(
            parse_measure_spec(r#"{"type":"two_point","p":0.3,"q":0.7}"#),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn pair_spec_allows_any_finite_nu() {
        let p = parse_measure_spec(r#"{"type":"pair","alpha":0.5,"nu":{"atoms":[[0.0,2.5]]}}"#)
            .unwrap()
            .into_pair()
            .unwrap();
        assert_eq!(p.alpha, 0.5);
        assert_eq!(p.nu.total_mass(), 2.5);
        let p = parse_measure_spec(r#"{"type":"pair","alpha":0,"nu":{}}"#).unwrap().into_pair().unwrap();
        assert!(p.nu.is_zero());
        assert!(parse_measure_spec(r#"{"type":"pair","alpha":0,"nu":{"grid":[0,1]}}"#).is_err());
    }

    #[test]
    fn measure_json_round_trips_exactly() {
        let m = Measure::mixed(vec![(-0.5, 0.3), (1.2, 0.1)], vec![-1.0, 0.0, 0.5, 2.0], vec![0.0, 0.48, 0.24, 0.0])
            .unwrap();
        let text = MeasureSpec::of_measure(&m).to_json();
        let back = parse_measure_spec(&text).unwrap().into_measure().unwrap();
        assert_eq!(back, m);
        assert_eq!(kolmogorov(&back, &m), 0.0);
    }

    #[test]
    fn plot_csv_is_accepted() {
        let m = Measure::two_point(0.3).unwrap();
        let csv = render(&PlotData::Measure(&m));
        let back = parse_measure_spec(&csv).unwrap().into_measure().unwrap();
        assert!(kolmogorov(&back, &m) <= 1e-12);
    }

    #[test]
    fn pair_json_round_trips_exactly() {
        let nu = FiniteMeasure::new(vec![(0.0, 1.0)], Some(Density::new(vec![1.0, 2.0], vec![0.5, 0.25]).unwrap()))
            .unwrap();
        let pair = GeneratingPair::new(-0.25, nu).unwrap();
        let back = parse_measure_spec(&MeasureSpec::of_pair(&pair).to_json()).unwrap().into_pair().unwrap();
        assert_eq!(back, pair);
    }
}
