use thiserror::Error;

/// Tolerance on row sums of a [`DecompositionTable`].
pub const ROW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("table has {found} entries, expected {rows}x{cols}")]
    Shape { rows: usize, cols: usize, found: usize },
    #[error("row {row} is not a probability vector (sum {sum})")]
    NotStochastic { row: usize, sum: f64 },
}

/// `probs[a][j] = P(Z_j | a)` for every arm `a` and every value `Z_j` of the
/// observed decomposition variable (the reward parents by default).
///
/// Kept in both layouts: rows for lookups, columns so that scoring all arms
/// is a sequence of contiguous axpy passes.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionTable {
    arms: usize,
    assignments: usize,
    rows: Vec<f64>,
    cols: Vec<f64>,
}

impl DecompositionTable {
    /// Row-major `arms × assignments` probabilities.
    pub fn new(arms: usize, assignments: usize, probs: Vec<f64>) -> Result<Self, TableError> {
        if probs.len() != arms * assignments || arms == 0 || assignments == 0 {
            return Err(TableError::Shape {
                rows: arms,
                cols: assignments,
                found: probs.len(),
            });
        }
        for (row, r) in probs.chunks(assignments).enumerate() {
            let sum: f64 = r.iter().sum();
            if r.iter().any(|&p| p < 0.0 || !p.is_finite()) || (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(TableError::NotStochastic { row, sum });
            }
        }
        let mut cols = vec![0.0; probs.len()];
        for a in 0..arms {
            for j in 0..assignments {
                cols[j * arms + a] = probs[a * assignments + j];
            }
        }
        Ok(Self {
            arms,
            assignments,
            rows: probs,
            cols,
        })
    }

    /// Arm `a` observes assignment `map[a]` with probability one.
    pub fn point_mass(map: &[usize], assignments: usize) -> Result<Self, TableError> {
        let mut probs = vec![0.0; map.len() * assignments];
        for (a, &j) in map.iter().enumerate() {
            if j >= assignments {
                return Err(TableError::NotStochastic { row: a, sum: 0.0 });
            }
            probs[a * assignments + j] = 1.0;
        }
        Self::new(map.len(), assignments, probs)
    }

    pub fn num_arms(&self) -> usize {
        self.arms
    }

    pub fn num_assignments(&self) -> usize {
        self.assignments
    }

    pub fn row(&self, arm: usize) -> &[f64] {
        &self.rows[arm * self.assignments..(arm + 1) * self.assignments]
    }

    pub fn column(&self, assignment: usize) -> &[f64] {
        &self.cols[assignment * self.arms..(assignment + 1) * self.arms]
    }

    pub fn prob(&self, arm: usize, assignment: usize) -> f64 {
        self.rows[arm * self.assignments + assignment]
    }

    /// `out[a] = Σ_j per_assignment[j] · P(Z_j | a)`, summed in `j` order.
    pub fn scores_into(&self, per_assignment: &[f64], out: &mut [f64]) {
        debug_assert_eq!(per_assignment.len(), self.assignments);
        debug_assert_eq!(out.len(), self.arms);
        out.fill(0.0);
        for (j, &w) in per_assignment.iter().enumerate() {
            for (o, &p) in out.iter_mut().zip(self.column(j)) {
                *o += w * p;
            }
        }
    }
}

/// Feature rows `f(Z_j)` and the induced arm features
/// `m_a = Σ_j P(Z_j | a) f(Z_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    dim: usize,
    features: Vec<f64>,
    arm_features: Vec<f64>,
}

impl FeatureTable {
    /// `features` is row-major `assignments × dim`.
    pub fn new(table: &DecompositionTable, dim: usize, features: Vec<f64>) -> Result<Self, TableError> {
        let k = table.num_assignments();
        if features.len() != k * dim || dim == 0 {
            return Err(TableError::Shape {
                rows: k,
                cols: dim,
                found: features.len(),
            });
        }
        let mut arm_features = vec![0.0; table.num_arms() * dim];
        for a in 0..table.num_arms() {
            let m = &mut arm_features[a * dim..(a + 1) * dim];
            for (j, &p) in table.row(a).iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (mi, &fi) in m.iter_mut().zip(&features[j * dim..(j + 1) * dim]) {
                    *mi += p * fi;
                }
            }
        }
        Ok(Self {
            dim,
            features,
            arm_features,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_arms(&self) -> usize {
        self.arm_features.len() / self.dim
    }

    pub fn feature(&self, assignment: usize) -> &[f64] {
        &self.features[assignment * self.dim..(assignment + 1) * self.dim]
    }

    pub fn arm_feature(&self, arm: usize) -> &[f64] {
        &self.arm_features[arm * self.dim..(arm + 1) * self.dim]
    }
}
