//! Dual-polarization baseband waveform and WDM channel grid.
//!
//! Field convention: `|x|² + |y|²` is instantaneous power in watts.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const PLANCK: f64 = 6.626_070_15e-34;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn wavelength_nm_to_hz(nm: f64) -> f64 {
    SPEED_OF_LIGHT / (nm * 1e-9)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalBlock {
    x: Vec<Complex64>,
    y: Vec<Complex64>,
    sample_rate: f64,
    center_frequency: f64,
    seed_tag: u64,
}

impl SignalBlock {
    pub fn new(
        x: Vec<Complex64>,
        y: Vec<Complex64>,
        sample_rate: f64,
        center_frequency: f64,
        seed_tag: u64,
    ) -> Result<Self> {
        if x.is_empty() && y.is_empty() {
            return Err(Error::EmptySignal);
        }
        if x.len() != y.len() {
            return Err(Error::InvalidSignal(format!(
                "polarization lengths differ ({} vs {})",
                x.len(),
                y.len()
            )));
        }
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::InvalidSignal(format!("sample rate {sample_rate}")));
        }
        if !(center_frequency > 0.0 && center_frequency.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "center frequency {center_frequency}"
            )));
        }
        if x.iter().chain(&y).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidSignal("non-finite sample".into()));
        }
        Ok(Self {
            x,
            y,
            sample_rate,
            center_frequency,
            seed_tag,
        })
    }

    /// Constructor for stage outputs whose finiteness is established by the caller.
    pub(crate) fn from_parts_unchecked(
        x: Vec<Complex64>,
        y: Vec<Complex64>,
        template: &SignalBlock,
    ) -> Self {
        debug_assert_eq!(x.len(), y.len());
        Self {
            x,
            y,
            sample_rate: template.sample_rate,
            center_frequency: template.center_frequency,
            seed_tag: template.seed_tag,
        }
    }

    pub fn x(&self) -> &[Complex64] {
        &self.x
    }

    pub fn y(&self) -> &[Complex64] {
        &self.y
    }

    pub fn polarizations(&self) -> [&[Complex64]; 2] {
        [&self.x, &self.y]
    }

    pub fn into_parts(self) -> (Vec<Complex64>, Vec<Complex64>) {
        (self.x, self.y)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn center_frequency(&self) -> f64 {
        self.center_frequency
    }

    pub fn seed_tag(&self) -> u64 {
        self.seed_tag
    }

    pub fn with_seed_tag(mut self, seed_tag: u64) -> Self {
        self.seed_tag = seed_tag;
        self
    }

    pub fn with_center_frequency(mut self, hz: f64) -> Self {
        self.center_frequency = hz;
        self
    }

    pub fn all_finite(&self) -> bool {
        self.x
            .iter()
            .chain(&self.y)
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn energy(&self) -> f64 {
        spectral::energy(&self.x) + spectral::energy(&self.y)
    }

    /// Mean total power in watts.
    pub fn power_w(&self) -> f64 {
        self.energy() / self.len() as f64
    }

    pub fn measure_power_dbm(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptySignal);
        }
        let p = self.power_w();
        if p <= 0.0 {
            return Err(Error::ZeroPower);
        }
        Ok(watts_to_dbm(p))
    }

    /// Scales field amplitude by a real factor.
    pub fn scaled(&self, factor: f64) -> SignalBlock {
        let x = self.x.iter().map(|v| v * factor).collect();
        let y = self.y.iter().map(|v| v * factor).collect();
        Self::from_parts_unchecked(x, y, self)
    }

    pub fn set_power_dbm(&self, target_dbm: f64) -> Result<SignalBlock> {
        let current = self.measure_power_dbm()?;
        Ok(self.scaled(10f64.powf((target_dbm - current) / 20.0)))
    }

    /// Multiplies by `exp(i 2π offset t)` with `t = n / fs`.
    pub fn frequency_shift(&self, offset_hz: f64) -> SignalBlock {
        if offset_hz == 0.0 {
            return self.clone();
        }
        let cycles_per_sample = offset_hz / self.sample_rate;
        let rot: Vec<Complex64> = (0..self.len())
            .map(|n| {
                let turns = (cycles_per_sample * n as f64).rem_euclid(1.0);
                Complex64::from_polar(1.0, 2.0 * PI * turns)
            })
            .collect();
        let x = self.x.iter().zip(&rot).map(|(a, r)| a * r).collect();
        let y = self.y.iter().zip(&rot).map(|(a, r)| a * r).collect();
        Self::from_parts_unchecked(x, y, self)
    }

    /// Applies `f` to each polarization independently.
    pub fn map_polarizations<F>(&self, mut f: F) -> SignalBlock
    where
        F: FnMut(&[Complex64]) -> Vec<Complex64>,
    {
        let x = f(&self.x);
        let y = f(&self.y);
        Self::from_parts_unchecked(x, y, self)
    }

    /// Sample-wise sum of two blocks on the same time grid.
    pub fn add(&self, other: &SignalBlock) -> Result<SignalBlock> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        if self.sample_rate != other.sample_rate {
            return Err(Error::InvalidParameter("sample rates differ".into()));
        }
        let x = self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect();
        let y = self.y.iter().zip(&other.y).map(|(a, b)| a + b).collect();
        Ok(Self::from_parts_unchecked(x, y, self))
    }

    /// Writes the little-endian `HLSB` dump.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        write_header(&mut w, self.len(), self.sample_rate, self.center_frequency)?;
        for (a, b) in self.x.iter().zip(&self.y) {
            for v in [a.re, a.im, b.re, b.im] {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<SignalBlock> {
        let (len, sample_rate, center_frequency) = read_header(&mut r)?;
        let mut x = Vec::with_capacity(len);
        let mut y = Vec::with_capacity(len);
        let mut buf = [0u8; 32];
        for _ in 0..len {
            r.read_exact(&mut buf)?;
            let v = |i: usize| f64::from_le_bytes(buf[i * 8..i * 8 + 8].try_into().unwrap());
            x.push(Complex64::new(v(0), v(1)));
            y.push(Complex64::new(v(2), v(3)));
        }
        SignalBlock::new(x, y, sample_rate, center_frequency, 0)
    }
}

pub(crate) const DUMP_MAGIC: &[u8; 4] = b"HLSB";
pub(crate) const DUMP_VERSION: u32 = 1;

pub(crate) fn write_header<W: Write>(
    w: &mut W,
    len: usize,
    sample_rate: f64,
    center_frequency: f64,
) -> Result<()> {
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&DUMP_VERSION.to_le_bytes())?;
    w.write_all(&(len as u64).to_le_bytes())?;
    w.write_all(&sample_rate.to_le_bytes())?;
    w.write_all(&center_frequency.to_le_bytes())?;
    Ok(())
}

pub(crate) fn read_header<R: Read>(r: &mut R) -> Result<(usize, f64, f64)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::Format("bad magic, expected HLSB".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != DUMP_VERSION {
        return Err(Error::Format(format!("unsupported dump version {version}")));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let len = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let sample_rate = f64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let center_frequency = f64::from_le_bytes(b8);
    Ok((len, sample_rate, center_frequency))
}

/// Uniform WDM grid. The channel under test sits at zero offset, index `count / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGrid {
    center_wavelengths_nm: Vec<f64>,
    spacing_hz: f64,
    reference_frequency_hz: f64,
    occupied_bandwidth_hz: f64,
    passband_hz: f64,
}

impl ChannelGrid {
    pub fn uniform(count: usize, spacing_hz: f64, cut_wavelength_nm: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter("channel count must be >= 1".into()));
        }
        if !(spacing_hz > 0.0) {
            return Err(Error::InvalidParameter("channel spacing must be > 0".into()));
        }
        let f0 = wavelength_nm_to_hz(cut_wavelength_nm);
        let cut = count / 2;
        let center_wavelengths_nm = (0..count)
            .map(|k| {
                let f = f0 + (k as f64 - cut as f64) * spacing_hz;
                SPEED_OF_LIGHT / f * 1e9
            })
            .collect();
        Ok(Self {
            center_wavelengths_nm,
            spacing_hz,
            reference_frequency_hz: f0,
            occupied_bandwidth_hz: spacing_hz,
            passband_hz: spacing_hz,
        })
    }

    /// Declares the occupied bandwidth of each channel (`R_s (1 + rolloff)`).
    pub fn with_occupied_bandwidth(mut self, hz: f64) -> Result<Self> {
        if hz > self.spacing_hz * (1.0 + 1e-12) {
            return Err(Error::ChannelOverlap {
                spacing_hz: self.spacing_hz,
                occupied_hz: hz,
            });
        }
        self.occupied_bandwidth_hz = hz;
        Ok(self)
    }

    /// Passband width of the equalizing filter bank; defaults to the spacing.
    pub fn with_passband(mut self, hz: f64) -> Self {
        self.passband_hz = hz.min(self.spacing_hz);
        self
    }

    pub fn channel_count(&self) -> usize {
        self.center_wavelengths_nm.len()
    }

    pub fn spacing_hz(&self) -> f64 {
        self.spacing_hz
    }

    pub fn center_wavelengths_nm(&self) -> &[f64] {
        &self.center_wavelengths_nm
    }

    pub fn cut_index(&self) -> usize {
        self.channel_count() / 2
    }

    pub fn reference_frequency_hz(&self) -> f64 {
        self.reference_frequency_hz
    }

    pub fn occupied_bandwidth_hz(&self) -> f64 {
        self.occupied_bandwidth_hz
    }

    pub fn passband_hz(&self) -> f64 {
        self.passband_hz
    }

    /// Baseband offset of channel `k` from the simulation center.
    pub fn offset_hz(&self, k: usize) -> f64 {
        (k as f64 - self.cut_index() as f64) * self.spacing_hz
    }

    pub fn offsets_hz(&self) -> Vec<f64> {
        (0..self.channel_count()).map(|k| self.offset_hz(k)).collect()
    }

    /// Total band the comb needs in the simulation: one spacing per channel.
    pub fn composite_bandwidth_hz(&self) -> f64 {
        self.channel_count() as f64 * self.spacing_hz
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.channel_count() {
            return Err(Error::ChannelIndex {
                index,
                count: self.channel_count(),
            });
        }
        Ok(())
    }
}
