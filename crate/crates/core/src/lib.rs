pub mod cremona;
pub mod degeneration;
pub mod error;
pub mod neg_curves;
pub mod oracle;
pub mod system;
pub mod tables;
pub mod verdict;

pub use error::{Error, ParseError, Result, Slot};
pub use system::{parse_system, DivisorClass, LinearSystem};
pub use verdict::{DimVerdict, Status, Trace};
