use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Completed,
    /// Some `ψᵢ` reached zero or stopped being finite; the record ends at the
    /// last grid time before closure.
    FunnelClosed {
        t: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordSummary {
    /// `max_{i,t} |uᵢ|` over the grid.
    pub max_input: f64,
    /// `max_{i,t} |νᵢ/ψᵢ|` over the grid.
    pub max_ratio: f64,
    pub breach: bool,
    /// Accepted internal steps.
    pub runtime_steps: usize,
    /// Rejected trial steps (guard or error control).
    pub rejected_steps: usize,
    pub outcome: Outcome,
}

/// Closed-loop trajectory sampled on the nominal grid. Every per-time field
/// holds one row per recorded time, each row indexed by agent.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub nu: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub ratio: Vec<Vec<f64>>,
    pub psi: Vec<Vec<f64>>,
    pub summary: RecordSummary,
}

impl TrajectoryRecord {
    pub(crate) fn empty() -> Self {
        TrajectoryRecord {
            times: Vec::new(),
            x: Vec::new(),
            nu: Vec::new(),
            u: Vec::new(),
            ratio: Vec::new(),
            psi: Vec::new(),
            summary: RecordSummary {
                max_input: 0.0,
                max_ratio: 0.0,
                breach: false,
                runtime_steps: 0,
                rejected_steps: 0,
                outcome: Outcome::Completed,
            },
        }
    }

    pub(crate) fn push(&mut self, t: f64, x: &[f64], nu: &[f64], u: &[f64], ratio: &[f64], psi: &[f64]) {
        for (ui, ri) in u.iter().zip(ratio) {
            self.summary.max_input = self.summary.max_input.max(ui.abs());
            self.summary.max_ratio = self.summary.max_ratio.max(ri.abs());
        }
        self.times.push(t);
        self.x.push(x.to_vec());
        self.nu.push(nu.to_vec());
        self.u.push(u.to_vec());
        self.ratio.push(ratio.to_vec());
        self.psi.push(psi.to_vec());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn final_state(&self) -> Option<&[f64]> {
        self.x.last().map(Vec::as_slice)
    }

    /// Average state `x_s = (1/N) Σ xᵢ` at each recorded time.
    pub fn average_state(&self) -> Vec<f64> {
        self.x.iter().map(|row| row.iter().sum::<f64>() / row.len() as f64).collect()
    }

    /// `max_{i,j} |xᵢ − xⱼ|` at each recorded time.
    pub fn spread(&self) -> Vec<f64> {
        self.x
            .iter()
            .map(|row| {
                let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            })
            .collect()
    }
}
