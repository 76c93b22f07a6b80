use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty signal")]
    EmptySignal,
    #[error("zero power")]
    ZeroPower,
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("entropy exceeds log2(M): target {target} bits, M = {order}")]
    EntropyExceedsLog2M { target: f64, order: usize },
    #[error("constellation order {0} is not a square QAM order")]
    NonSquareOrder(usize),

    #[error("insufficient simulation bandwidth: composite band {needed_hz:.3e} Hz exceeds sample rate {sample_rate_hz:.3e} Hz")]
    InsufficientBandwidth { needed_hz: f64, sample_rate_hz: f64 },
    #[error("channel overlap: spacing {spacing_hz:.3e} Hz < occupied bandwidth {occupied_hz:.3e} Hz")]
    ChannelOverlap { spacing_hz: f64, occupied_hz: f64 },

    #[error("numerical blowup at z = {z_km:.6} km (step {step}, h = {step_km:.3e} km)")]
    NumericalBlowup { z_km: f64, step: usize, step_km: f64 },

    #[error("attenuation requested from amplifier: gain {gain_db:.3} dB")]
    AmplifierAttenuation { gain_db: f64 },
    #[error("amplifier saturation: output {output_dbm:.3} dBm above maximum {max_dbm:.3} dBm")]
    AmplifierSaturation { output_dbm: f64, max_dbm: f64 },
    #[error("VOA cannot amplify: input {input_dbm:.3} dBm below target {target_dbm:.3} dBm")]
    VoaCannotAmplify { input_dbm: f64, target_dbm: f64 },

    #[error("loop {loop_index}, stage '{stage}': {source}")]
    Stage {
        loop_index: usize,
        stage: String,
        #[source]
        source: Box<Error>,
    },
    #[error("unknown loop stage '{0}'")]
    UnknownStage(String),

    #[error("channel index {index} out of range for {count} channels")]
    ChannelIndex { index: usize, count: usize },
    #[error("sync failed: normalized correlation {0:.3}")]
    SyncFailed(f64),
    #[error("equalizer diverged: mse {mse:.3e} > input variance {variance:.3e}")]
    EqualizerDiverged { mse: f64, variance: f64 },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("insufficient sample size: {got} symbols, need at least {need}")]
    InsufficientSampleSize { got: usize, need: usize },
    #[error("insufficient markers: found {0}, need at least 2")]
    InsufficientMarkers(usize),
    #[error("OSNR not measurable spectrally: no guard band between channels")]
    OsnrNotMeasurable,

    #[error("config: {0}")]
    Config(String),
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_stage(self, loop_index: usize, stage: &str) -> Error {
        Error::Stage {
            loop_index,
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}
