pub mod adfamily;
pub mod builder;
pub mod cli;
pub mod exactnum;
pub mod funcio;
pub mod rank;
pub mod report;
pub mod theta;
