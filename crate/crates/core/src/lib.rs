pub mod error;
pub mod linalg;
pub mod root_datum;
pub mod cyclotomic;
pub mod characters;
pub mod group;
pub mod center;
pub mod verlinde;
pub mod oracle;
pub mod query;
pub mod selfcheck;
pub mod fixedpoint;
