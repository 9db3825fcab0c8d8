pub mod cli;
pub mod constructions;
pub mod dyadic;
pub mod limits;
pub mod metric;
pub mod normalform;
pub mod plhomeo;
pub mod words;
