use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum InequalityId {
    Thm31a,
    Thm31b,
    Thm31c,
    StepL2,
    AssocEst,
    PoissonGrowth,
    KernelRate,
    LaplacePower,
    PartialSum,
}

/// Outcome of checking one instance of an inequality `lhs ≤ rhs (1 + tol)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundVerdict {
    pub inequality_id: InequalityId,
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack_ratio: f64,
    pub tol: f64,
    pub holds: bool,
    pub sampling_note: String,
}

impl BoundVerdict {
    pub fn new(id: InequalityId, instance: impl Into<String>, lhs: f64, rhs: f64, tol: f64, note: impl Into<String>) -> Self {
        let slack_ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs <= 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let holds = lhs <= rhs * (1.0 + tol) || lhs <= 0.0 && rhs >= 0.0;
        Self {
            inequality_id: id,
            instance: instance.into(),
            lhs,
            rhs,
            slack_ratio,
            tol,
            holds,
            sampling_note: note.into(),
        }
    }
}

/// Aggregate of a batch of verdicts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub total: usize,
    pub holding: usize,
    /// Smallest `lhs / rhs` observed.
    pub min_slack_ratio: f64,
    /// Largest `lhs / rhs` observed; the tightest instance.
    pub max_slack_ratio: f64,
}

impl CampaignSummary {
    pub fn of(verdicts: &[BoundVerdict]) -> Self {
        let ratios = verdicts.iter().map(|v| v.slack_ratio);
        Self {
            total: verdicts.len(),
            holding: verdicts.iter().filter(|v| v.holds).count(),
            min_slack_ratio: ratios.clone().fold(f64::INFINITY, f64::min),
            max_slack_ratio: ratios.fold(0.0, f64::max),
        }
    }

    pub fn all_hold(&self) -> bool {
        self.holding == self.total
    }
}
