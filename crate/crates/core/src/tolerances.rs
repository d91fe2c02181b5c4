/// Numerical thresholds shared by the whole pipeline.
///
/// All values are absolute unless noted; `rank` is relative to the largest
/// singular value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative signature residual accepted by element validation.
    pub unitary: f64,
    /// Relative singular-value threshold for kernel/image decisions.
    pub rank: f64,
    /// Band around zero of the Hermitian self-product that counts as null.
    pub null: f64,
    /// Classification threshold for eigenvalue moduli and eigenspace signs.
    pub class: f64,
    /// Fixed-point and projective-identity threshold.
    pub fix: f64,
    /// Eigenpair residual bound, relative to the sup-entry norm.
    pub eig: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            unitary: 1e-8,
            rank: 1e-9,
            null: 1e-10,
            class: 1e-6,
            fix: 1e-8,
            eig: 1e-9,
        }
    }
}
