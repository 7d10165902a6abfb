//! Domain-wall partition function of the eight-vertex model with a
//! non-diagonal reflecting end, computed by independent routes, plus
//! numerical residuals for the algebraic identities behind them.

pub mod boundary;
pub mod cli;
pub mod closedform;
pub mod elliptic;
pub mod error;
pub mod fbasis;
pub mod operator;
pub mod oracle;
pub mod report;
pub mod rmatrices;
pub mod scaled;
pub mod spectral;

pub use elliptic::{ModularSetup, ThetaChar, C64};
pub use error::{Error, Result};
