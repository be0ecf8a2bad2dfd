//! Support recovery: M-SBL and its constrained variant, plus the SOMP,
//! OSGA and Co-LASSO baselines.

mod colasso;
mod greedy;
mod msbl;
mod support;

pub use colasso::{colasso, ColassoConfig, ColassoResult};
pub use greedy::{osga, osga_scores, somp, SompResult};
pub use msbl::{cmsbl, loglik, msbl, msbl_from, InitGamma, MsblConfig, RecoveryResult, UpdateRule};
pub use support::{extract_support, Extracted, ExtractionPolicy, DEFAULT_THRESHOLD};

use crate::error::{Error, Result};
use crate::matlib::Matrix;

pub(crate) fn check_y_a(op: &'static str, y: &Matrix, a: &Matrix) -> Result<()> {
    if y.nrows() != a.nrows() {
        return Err(Error::dims(
            op,
            format!("{} rows in Y", a.nrows()),
            y.nrows(),
        ));
    }
    if y.ncols() == 0 {
        return Err(Error::invalid(format!("{op}: Y has no columns")));
    }
    Ok(())
}
