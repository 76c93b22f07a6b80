//! Shaped WDM transmitter: PCS symbols, RRC shaping, front-end response, multiplexing.

mod constellation;
mod frontend;
mod pulse;
mod wdm;

pub use constellation::{
    draw_shaped_symbols, entropy_bits, mb_entropy, mb_shape_constellation, ShapedConstellation,
};
pub use frontend::{
    apply_tx_frontend, bessel_response, frontend_response, laser_phase_walk,
    preemphasis_response, PREEMPHASIS_CLIP_DB,
};
pub use pulse::{pulse_shape_rrc, rrc_taps, TxChain, CUT_WAVELENGTH_NM};
pub(crate) use pulse::circular_filter;
pub use wdm::wdm_multiplex;
