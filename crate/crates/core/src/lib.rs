//! Finite-blocklength outage analysis of OTFS over sparse delay-Doppler channels.
//!
//! The crate is `no_std` and needs only `alloc`. It provides
//!
//! - [`fbl_math`]: Q-function, AWGN capacity and dispersion, and the normal
//!   approximation of the block error probability for scalar and parallel
//!   channels,
//! - [`dd_channel`]: random channel realizations (complex Gaussian gains,
//!   distinct delays, Jakes Doppler with fractional offsets),
//! - [`dd_matrix`]: the effective DD-domain channel matrix and the frame
//!   log-det capacity behind the theoretical outage,
//! - [`power_alloc`]: average and water-filling power allocation across paths.
//!
//! Monte-Carlo sweeps, file formats and the command line live in the
//! `otfs-outage` crate.
#![no_std]

extern crate alloc;

pub mod dd_channel;
pub mod dd_matrix;
pub mod error;
pub mod fbl_math;
pub mod power_alloc;

pub use dd_channel::{gain_power, sample_tapset, split_doppler, ChannelConfig, DelayModel, OtfsGrid, TapSet};
pub use dd_matrix::{
    build_h_dd, frame_capacity_bits, frame_capacity_bits_banded, theoretical_outage_indicator, BlockDft, DdMatrix,
};
pub use error::{Error, Result};
pub use fbl_math::{
    achievable_rate, awgn_capacity, awgn_dispersion, parallel_capacity, parallel_dispersion, parallel_outage,
    q_function, q_inverse, scalar_outage, FblPoint, SnrVector,
};
pub use power_alloc::{
    allocate, allocate_average, allocate_waterfilling, equivalent_noise, water_fill, Allocation, PowerBudget,
    Strategy, TotalPowerModel,
};
