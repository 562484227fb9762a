//! CBI-time-changed Lévy processes: mechanisms, affine transforms, exponential moments,
//! Esscher changes of measure, simulation and Fourier pricing.

pub mod config;
pub mod error;
pub mod levy;
pub mod measure;
pub mod mechanisms;
pub mod moments;
pub mod presets;
pub mod pricing;
pub mod quadrature;
pub mod riccati;
pub mod scalar;
pub mod simulate;

pub use error::{CbitclError, ErrorKind, Result};
pub use levy::{JumpRole, LevyMeasureSpec};
pub use measure::{esscher_transform, exponential_compensator, is_exp_martingale, EsscherSpec};
pub use mechanisms::{BranchingMechanism, CbitclModel, DomainInfo, ImmigrationMechanism, NoiseExponent};
pub use moments::{chi, lifetime, moment_domain_full, wing_slopes, xi_asymptotic, AsymptoticResult, LifetimeClass, LifetimeResult};
pub use riccati::{char_fn_joint, solve_riccati, solve_riccati_at, transform, RiccatiArgs, RiccatiSolution, SolveStatus, SolverConfig};
pub use scalar::Scalar;
pub use pricing::{black_scholes_call, char_fn_log_price, implied_vol, price_call, LogPriceSpec, PriceResult, PricingConfig};
pub use simulate::{sample_levy_increment, simulate_lamperti, simulate_paths, simulate_terminal, PathSet, SimConfig, SmallJumps, TerminalSet};
pub use config::{load_model, model_hash, model_to_toml, parse_model};
