//! Verification harness: random-matrix oracles, Kolmogorov–Smirnov
//! comparison, campaign configuration and schema-tagged CSV output.

mod campaign;
mod config;
mod io;
mod oracle;
mod reference;
mod stats;

pub use campaign::{
    default_config, execute, gue2_density, ratio_spread, run_campaign, warren_runs, CampaignReport, Check, WarrenReference,
    BES3_START, CAMPAIGNS, WARREN_START,
};
pub use config::{Budget, CampaignConfig};
pub use io::{csv_file, num, CsvOut, CSV_SCHEMA_LINE};
pub use oracle::{order_statistic, rmt_oracle, sample_spectrum, Ensemble, ORACLE_MAX_COUNT, ORACLE_MAX_N};
pub use reference::{bes3_cdf, pair_marginal_cdfs, pair_marginal_nodes, TabulatedCdf};
pub use stats::{kolmogorov_sf, ks_compare, linspace, sup_diff, EmpiricalCdf, MCReport, KS_MIN_SAMPLES};
