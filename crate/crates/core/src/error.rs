use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the domain of a function (e.g. `t > T`).
    #[error("{what} = {value} outside domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// A parameter set or scene configuration violates an invariant.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The sample rate cannot represent the highest instantaneous frequency.
    #[error("frequency {frequency} Hz exceeds the Nyquist limit of {nyquist} Hz")]
    Nyquist { frequency: f64, nyquist: f64 },

    /// Internal contract between pipeline stages was broken.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("signal of {len} samples is shorter than one {window}-sample window")]
    TooShort { len: usize, window: usize },
}
