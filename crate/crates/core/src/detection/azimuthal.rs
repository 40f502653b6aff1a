use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major luminance grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame2D {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl Frame2D {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::invalid(format!(
                "frame data has {} values, expected {height}x{width}",
                data.len()
            )));
        }
        Ok(Self { height, width, data })
    }

    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let data = (0..height).flat_map(|y| (0..width).map(move |x| (y, x))).map(|(y, x)| f(y, x)).collect();
        Self { height, width, data }
    }
}

fn signed_index(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Mean 2-D magnitude spectrum over annuli of integer radius around the
/// spectral centre (DC), normalised by the pixel count. The profile has
/// `min(H, W) / 2` entries; frequencies past the last annulus are dropped.
pub fn azimuthal_spectrum(frame: &Frame2D) -> Result<Vec<f64>> {
    let (h, w) = (frame.height, frame.width);
    if h < 8 || w < 8 {
        return Err(Error::invalid(format!("frame {h}x{w} is smaller than 8x8")));
    }
    if frame.data.len() != h * w {
        return Err(Error::invalid("frame data does not match its dimensions"));
    }
    let mut planner = FftPlanner::<f64>::new();
    let row_fft = planner.plan_fft_forward(w);
    let col_fft = planner.plan_fft_forward(h);
    let mut grid: Vec<Complex<f64>> = frame.data.iter().map(|&v| Complex::new(v, 0.0)).collect();
    for row in grid.chunks_exact_mut(w) {
        row_fft.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            col[y] = grid[y * w + x];
        }
        col_fft.process(&mut col);
        for y in 0..h {
            grid[y * w + x] = col[y];
        }
    }

    let len = h.min(w) / 2;
    let mut sums = vec![0.0; len];
    let mut counts = vec![0usize; len];
    let norm = 1.0 / (h * w) as f64;
    for y in 0..h {
        let fy = signed_index(y, h);
        for x in 0..w {
            let fx = signed_index(x, w);
            let r = (fy * fy + fx * fx).sqrt().round() as usize;
            if r < len {
                sums[r] += grid[y * w + x].norm() * norm;
                counts[r] += 1;
            }
        }
    }
    Ok(sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect())
}
