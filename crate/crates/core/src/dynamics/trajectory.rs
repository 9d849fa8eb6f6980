use crate::error::Result;
use crate::model::BatteryModel;
use crate::numerics::IntegrationStats;
use crate::observables::{energy_of_populations, ergotropy, ergotropy_of_populations, most_populated_of};

use super::propagate::{StateRecord, StateSeries};

/// Battery observables on a time grid. Stored energy is measured against
/// the first recorded state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: StateRecord,
    stored_energy: Vec<f64>,
    ergotropy: Vec<f64>,
    populations: Vec<Vec<f64>>,
    most_populated: Vec<usize>,
    qutrit_ground: Option<Vec<f64>>,
    stats: IntegrationStats,
}

impl Trajectory {
    pub fn from_series(series: StateSeries, b: &BatteryModel) -> Result<Self> {
        let StateSeries { times, states, qutrit_ground, stats } = series;
        let n = times.len();
        let populations: Vec<Vec<f64>> = (0..n).map(|i| states.populations(i)).collect();
        let ergotropy = match &states {
            StateRecord::Diagonal(p) => p.iter().map(|p| ergotropy_of_populations(p, b)).collect(),
            StateRecord::Dense(s) => s.iter().map(|r| ergotropy(r, b)).collect::<Result<Vec<_>>>()?,
        };
        let e0 = populations.first().map_or(0.0, |p| energy_of_populations(p, b));
        let stored_energy = populations.iter().map(|p| energy_of_populations(p, b) - e0).collect();
        let most_populated = populations.iter().map(|p| most_populated_of(p)).collect();
        Ok(Self { times, states, stored_energy, ergotropy, populations, most_populated, qutrit_ground, stats })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &StateRecord {
        &self.states
    }

    pub fn stored_energy(&self) -> &[f64] {
        &self.stored_energy
    }

    pub fn ergotropy(&self) -> &[f64] {
        &self.ergotropy
    }

    pub fn populations(&self) -> &[Vec<f64>] {
        &self.populations
    }

    pub fn most_populated(&self) -> &[usize] {
        &self.most_populated
    }

    pub fn qutrit_ground(&self) -> Option<&[f64]> {
        self.qutrit_ground.as_deref()
    }

    pub fn stats(&self) -> IntegrationStats {
        self.stats
    }

    /// First sample index whose ergotropy reaches `level`.
    pub fn first_index_with_ergotropy(&self, level: f64) -> Option<usize> {
        self.ergotropy.iter().position(|&e| e >= level)
    }

    /// First time the ergotropy reaches `level`, linearly interpolated
    /// between grid samples.
    pub fn ergotropy_crossing_time(&self, level: f64) -> Option<f64> {
        let i = self.first_index_with_ergotropy(level)?;
        if i == 0 {
            return Some(self.times[0]);
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (e0, e1) = (self.ergotropy[i - 1], self.ergotropy[i]);
        Some(t0 + (t1 - t0) * (level - e0) / (e1 - e0))
    }

    /// A quantity linearly interpolated at time `t` within the grid.
    pub fn interpolate(&self, values: &[f64], t: f64) -> Option<f64> {
        let k = self.times.iter().position(|&s| s >= t)?;
        if k == 0 || self.times[k] == t {
            return Some(values[k]);
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        Some(values[k - 1] + (values[k] - values[k - 1]) * (t - t0) / (t1 - t0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{propagate, uniform_grid, DensityMatrix, LindbladGenerator};
    use crate::numerics::{ComplexMatrix, Tolerances};

    #[test]
    fn two_level_pumping() {
        // Pure upward pumping at rate 1 from the ground level.
        let b = BatteryModel::uniform_ladder(1, 1.0).unwrap();
        let l = ComplexMatrix::outer_basis(2, 1, 0);
        let gen = LindbladGenerator::new(ComplexMatrix::zeros(2, 2), vec![l]).unwrap();
        let grid = uniform_grid(3.0, 31).unwrap();
        let s = propagate(&gen, &DensityMatrix::pure_level(2, 0).unwrap(), &grid, Tolerances::default()).unwrap();
        let tr = Trajectory::from_series(s, &b).unwrap();
        assert_eq!(tr.len(), 31);
        for (i, &t) in tr.times().iter().enumerate() {
            let p1 = 1.0 - (-t).exp();
            assert!((tr.stored_energy()[i] - p1).abs() < 1e-9);
            assert!((tr.ergotropy()[i] - (2.0 * p1 - 1.0).max(0.0)).abs() < 1e-9);
            assert!((tr.populations()[i].iter().sum::<f64>() - 1.0).abs() < 1e-8);
        }
        let crossing = tr.ergotropy_crossing_time(0.5).unwrap();
        assert!((crossing - 4f64.ln()).abs() < 5e-3);
        assert_eq!(tr.most_populated()[0], 0);
        assert_eq!(*tr.most_populated().last().unwrap(), 1);
        assert!(tr.qutrit_ground().is_none());
        assert_eq!(tr.ergotropy_crossing_time(0.0), Some(0.0));
        assert!(tr.ergotropy_crossing_time(2.0).is_none());
    }
}
