use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Bpsk,
    Qpsk,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct ConstellationSpec {
    modulation: Modulation,
    energy: f64,
}

/// Symbol alphabet with average energy `energy`.
///
/// QPSK points are Gray labelled: index bits `(b1 b0)` map to
/// `((-1)^b0 + i (-1)^b1) / sqrt(2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConstellationSpec", into = "ConstellationSpec")]
pub struct Constellation {
    modulation: Modulation,
    energy: f64,
    points: Vec<C64>,
}

impl Constellation {
    pub fn new(modulation: Modulation, energy: f64) -> Result<Self> {
        if !(energy > 0.0) || !energy.is_finite() {
            return Err(Error::InvalidParameter(format!("symbol energy {energy} must be positive")));
        }
        let a = energy.sqrt();
        let points = match modulation {
            Modulation::Bpsk => vec![C64::new(a, 0.0), C64::new(-a, 0.0)],
            Modulation::Qpsk => {
                let s = a / 2f64.sqrt();
                vec![C64::new(s, s), C64::new(-s, s), C64::new(s, -s), C64::new(-s, -s)]
            }
        };
        Ok(Self {
            modulation,
            energy,
            points,
        })
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    /// Index of the nearest point; ties resolve to the lowest index.
    pub fn nearest_index(&self, y: C64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (y - p).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    pub fn slice(&self, y: C64) -> C64 {
        self.points[self.nearest_index(y)]
    }

    pub fn contains(&self, s: C64) -> bool {
        self.points.contains(&s)
    }
}

impl TryFrom<ConstellationSpec> for Constellation {
    type Error = Error;
    fn try_from(s: ConstellationSpec) -> Result<Self> {
        Self::new(s.modulation, s.energy)
    }
}

impl From<Constellation> for ConstellationSpec {
    fn from(c: Constellation) -> Self {
        Self {
            modulation: c.modulation,
            energy: c.energy,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_average_energy() {
        for m in [Modulation::Bpsk, Modulation::Qpsk] {
            let c = Constellation::new(m, 2.5).unwrap();
            let e: f64 = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / c.points().len() as f64;
            assert!((e - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn qpsk_slicing() {
        let c = Constellation::new(Modulation::Qpsk, 1.0).unwrap();
        let s = c.slice(C64::new(0.1, 0.9));
        assert!((s - C64::new(1.0, 1.0) / 2f64.sqrt()).norm() < 1e-15);
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        let c = Constellation::new(Modulation::Qpsk, 1.0).unwrap();
        for i in 0..4usize {
            for j in 0..4usize {
                let adjacent = ((c.points()[i] - c.points()[j]).norm() - 2f64.sqrt()).abs() < 1e-12;
                if adjacent {
                    assert_eq!((i ^ j).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let c = Constellation::new(Modulation::Bpsk, 1.0).unwrap();
        assert_eq!(c.nearest_index(C64::new(0.0, 0.3)), 0);
        let q = Constellation::new(Modulation::Qpsk, 1.0).unwrap();
        assert_eq!(q.nearest_index(C64::new(0.0, 0.0)), 0);
    }

    #[test]
    fn json_round_trip() {
        let c = Constellation::new(Modulation::Qpsk, 1.0).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"modulation":"qpsk","energy":1.0}"#);
        let back: Constellation = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<Constellation>(r#"{"modulation":"bpsk","energy":-1}"#).is_err());
    }
}
