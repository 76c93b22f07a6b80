use num_complex::Complex64;

use super::DspConfig;

const PHASE_TRACKING_GAIN: f64 = 0.05;
use crate::error::{Error, Result};

/// Trained T/2-spaced 2×2 butterfly:
/// `out_p[k] = Σ_q Σ_j w[p][q][j] in_q[2k + j - L/2]`.
#[derive(Debug, Clone)]
pub struct EqualizerTaps {
    pub w: [[Vec<Complex64>; 2]; 2],
    /// Mean squared error over the last training pass.
    pub training_mse: f64,
}

fn window<'a>(input: &'a [Complex64], k: usize, taps: usize, buf: &'a mut Vec<Complex64>) -> &'a [Complex64] {
    let n = input.len();
    let start = (2 * k) as isize - (taps / 2) as isize;
    if start >= 0 && start as usize + taps <= n {
        return &input[start as usize..start as usize + taps];
    }
    buf.clear();
    buf.extend((0..taps).map(|j| input[(start + j as isize).rem_euclid(n as isize) as usize]));
    buf
}

impl EqualizerTaps {
    fn identity(taps: usize) -> Self {
        let zero = || vec![Complex64::new(0.0, 0.0); taps];
        let mut w = [[zero(), zero()], [zero(), zero()]];
        w[0][0][taps / 2] = Complex64::new(1.0, 0.0);
        w[1][1][taps / 2] = Complex64::new(1.0, 0.0);
        Self { w, training_mse: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.w[0][0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn output(&self, win: [&[Complex64]; 2]) -> [Complex64; 2] {
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for (p, o) in out.iter_mut().enumerate() {
            for (q, wq) in win.iter().enumerate() {
                *o += self.w[p][q].iter().zip(wq.iter()).map(|(a, b)| a * b).sum::<Complex64>();
            }
        }
        out
    }

    /// Energy of the cross taps relative to the direct taps, in dB.
    pub fn cross_to_direct_db(&self) -> f64 {
        let e = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>();
        let direct = e(&self.w[0][0]) + e(&self.w[1][1]);
        let cross = e(&self.w[0][1]) + e(&self.w[1][0]);
        10.0 * (cross / direct).log10()
    }

    /// Applies the frozen taps to unit-power-normalized inputs.
    pub fn apply(&self, x2: &[Complex64], y2: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let inputs = [normalized(x2), normalized(y2)];
        let taps = self.len();
        let n_sym = x2.len() / 2;
        let (mut b0, mut b1) = (Vec::new(), Vec::new());
        let mut ox = Vec::with_capacity(n_sym);
        let mut oy = Vec::with_capacity(n_sym);
        for k in 0..n_sym {
            let w0 = window(&inputs[0], k, taps, &mut b0);
            let w1 = window(&inputs[1], k, taps, &mut b1);
            let out = self.output([w0, w1]);
            ox.push(out[0]);
            oy.push(out[1]);
        }
        (ox, oy)
    }
}

fn normalized(v: &[Complex64]) -> Vec<Complex64> {
    let p = v.iter().map(|c| c.norm_sqr()).sum::<f64>() / v.len() as f64;
    if p > 0.0 {
        let g = 1.0 / p.sqrt();
        v.iter().map(|c| c * g).collect()
    } else {
        v.to_vec()
    }
}

fn check_lengths(x2: &[Complex64], y2: &[Complex64], known_x: &[Complex64], known_y: &[Complex64], train: usize) -> Result<()> {
    if x2.len() != y2.len() {
        return Err(Error::LengthMismatch(x2.len(), y2.len()));
    }
    if known_x.len() != known_y.len() {
        return Err(Error::LengthMismatch(known_x.len(), known_y.len()));
    }
    let n_sym = x2.len() / 2;
    if n_sym == 0 || x2.len() % 2 != 0 || known_x.len() < n_sym.min(train) {
        return Err(Error::LengthMismatch(x2.len(), 2 * known_x.len()));
    }
    Ok(())
}

/// LMS adaptation on the training prefix.
pub fn train_equalizer(
    x2: &[Complex64],
    y2: &[Complex64],
    known_x: &[Complex64],
    known_y: &[Complex64],
    dsp: &DspConfig,
) -> Result<EqualizerTaps> {
    dsp.validate()?;
    check_lengths(x2, y2, known_x, known_y, dsp.training_symbols)?;
    let inputs = [normalized(x2), normalized(y2)];
    let known = [known_x, known_y];
    let train = dsp.training_symbols.min(x2.len() / 2);
    let taps = dsp.eq_taps;
    let mu = dsp.eq_step_size;
    let mut eq = EqualizerTaps::identity(taps);
    let (mut b0, mut b1) = (Vec::new(), Vec::new());

    // Data-aided first-order phase tracker per output, so the taps learn
    // the channel rather than the laser phase walk.
    let mut phase = [Complex64::new(1.0, 0.0); 2];
    for _ in 0..dsp.eq_training_passes {
        let mut se = 0.0;
        for k in 0..train {
            let w0 = window(&inputs[0], k, taps, &mut b0);
            let w1 = window(&inputs[1], k, taps, &mut b1);
            let out = eq.output([w0, w1]);
            for p in 0..2 {
                let target = known[p][k] * phase[p];
                let e = target - out[p];
                se += e.norm_sqr();
                for (q, win) in [w0, w1].into_iter().enumerate() {
                    for (w, v) in eq.w[p][q].iter_mut().zip(win) {
                        *w += mu * e * v.conj();
                    }
                }
                let turn = (out[p] * target.conj()).im * PHASE_TRACKING_GAIN;
                phase[p] *= Complex64::from_polar(1.0, turn);
            }
        }
        eq.training_mse = se / (2 * train) as f64;
    }

    let variance = known[0][..train]
        .iter()
        .chain(&known[1][..train])
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        / (2 * train) as f64;
    if !(eq.training_mse <= variance) {
        return Err(Error::EqualizerDiverged {
            mse: eq.training_mse,
            variance,
        });
    }
    Ok(eq)
}

/// Data-aided LMS butterfly equalizer.
///
/// `x2`/`y2` hold 2 samples per symbol with sample `2k` at symbol `k`.
/// Taps adapt on the first `dsp.training_symbols` symbols for
/// `dsp.eq_training_passes` passes, then are frozen and applied to the whole
/// sequence. Returns one sample per symbol per polarization.
pub fn equalize_2x2(
    x2: &[Complex64],
    y2: &[Complex64],
    known_x: &[Complex64],
    known_y: &[Complex64],
    dsp: &DspConfig,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let eq = train_equalizer(x2, y2, known_x, known_y, dsp)?;
    Ok(eq.apply(x2, y2))
}
