//! Truncated-matrix characteristic values.

use crate::tridiag::SymTridiagonal;

use super::recurrence::Recurrence;

/// Truncation of a recurrence to a finite index window.
pub(crate) struct Truncation {
    pub lo: i64,
    pub matrix: SymTridiagonal,
    pub rank: usize,
}

impl Truncation {
    pub(crate) fn new(rec: &Recurrence, q: f64, margin: i64) -> Self {
        let (lo, hi) = rec.window(margin);
        let diag = (lo..=hi).map(|j| rec.diag(j, q)).collect();
        let off = (lo..hi).map(|j| rec.off(j, q)).collect();
        Truncation { lo, matrix: SymTridiagonal::new(diag, off), rank: rec.rank_in(lo, hi) }
    }

    pub(crate) fn eigenvalue(&self) -> f64 {
        self.matrix.eigenvalue(self.rank)
    }
}
