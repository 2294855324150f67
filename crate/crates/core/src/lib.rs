//! Resonance fluorescence of a two-level atom in a squeezed reservoir whose
//! squeezing phase varies with frequency.
//!
//! Modules, bottom up: [`specfun`] (Faddeeva and complex error functions),
//! [`kernel`] (phase modulations and the memory kernel they induce),
//! [`dynamics`] (Laplace-domain polarization, poles, time evolution) and
//! [`spectrum`] (steady-state fluorescence spectrum and its width).

pub mod dynamics;
pub mod error;
pub mod kernel;
pub mod quad;
pub mod specfun;
pub mod spectrum;

pub use dynamics::{
    PoleSet, PolarizationState, Region, Reservoir, ReservoirParams, TimeGrid, TimeSeries,
};
pub use error::{Error, Result};
pub use kernel::{
    AxisSide, Bandwidth, FirstMoment, KernelMethod, KernelValue, MemoryKernel, PhaseModulation,
    PhaseTable,
};
pub use num_complex::Complex64;
pub use spectrum::{Normalization, SpectrumSeries, SteadyState};
