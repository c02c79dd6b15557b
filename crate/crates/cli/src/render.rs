//! Phase portraits and eigenvalue scatter plots.

use num_complex::Complex64;
use rayon::prelude::*;
use secular_core::graph::sample_digraph;
use secular_core::limit::{eval_F, gaussian_limit, sample_G, FForm, FieldSampler};
use secular_core::spectra::{block_eigenvalues, Spectrum};
use secular_core::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MIN_RESOLUTION: usize = 16;

/// Function drawn by [`domain_colouring`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSource {
    /// z ↦ det(I − zA) for a sampled digraph, as ∏(1 − zλ).
    SampledQn { n: usize, d: f64, seed: u64 },
    /// The limit function F of a sampled cycle field of length `length`.
    LimitF { d: f64, length: usize, seed: u64 },
    /// −z√(1 − z²) exp(g(z)) with K Gaussian coefficients.
    GaussianLimit { k: usize, seed: u64 },
    /// Σ c_k z^k with real coefficients.
    Polynomial { coeffs: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColourScheme {
    pub saturation: f64,
    /// Lightness runs from `base` to `base + depth` across each band |f| ∈ [2^m, 2^{m+1}).
    pub base: f64,
    pub depth: f64,
    /// Pixels where the function is undefined.
    pub sentinel: [u8; 3],
    pub circle: [u8; 3],
}

impl Default for ColourScheme {
    fn default() -> Self {
        ColourScheme { saturation: 0.85, base: 0.35, depth: 0.3, sentinel: [128, 128, 128], circle: [255, 255, 255] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderSpec {
    pub center: (f64, f64),
    pub half_width: f64,
    pub resolution: usize,
    pub source: FunctionSource,
    /// Radii of circles centred at 0.
    pub circles: Vec<f64>,
    pub scheme: ColourScheme,
}

impl RenderSpec {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < MIN_RESOLUTION {
            return Err(Error::Parameter(format!("resolution must be at least {MIN_RESOLUTION}")));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::Parameter("half-width must be positive".into()));
        }
        Ok(())
    }

    /// Centre of pixel (row, col); row 0 is the top edge.
    pub fn pixel(&self, row: usize, col: usize) -> Complex64 {
        let r = self.resolution as f64;
        let x = self.center.0 + self.half_width * ((2 * col + 1) as f64 / r - 1.0);
        let y = self.center.1 + self.half_width * (1.0 - (2 * row + 1) as f64 / r);
        Complex64::new(x, y)
    }
}

type Evaluator = Box<dyn Fn(Complex64) -> Result<Complex64> + Sync>;

fn evaluator(source: &FunctionSource) -> Result<Evaluator> {
    Ok(match source {
        FunctionSource::SampledQn { n, d, seed } => {
            let spectrum = block_eigenvalues(&sample_digraph(*n, *d, *seed)?)?;
            let values = spectrum.nonzero_values();
            Box::new(move |z| Ok(values.iter().fold(Complex64::new(1.0, 0.0), |acc, l| acc * (1.0 - z * l))))
        }
        FunctionSource::LimitF { d, length, seed } => {
            let field = FieldSampler::new(*d, 0.5, Some(*length))?.sample(*seed);
            Box::new(move |z| Ok(eval_F(&field, z, FForm::Centered)?.value()))
        }
        FunctionSource::GaussianLimit { k, seed } => {
            let chaos = sample_G(*seed, *k);
            Box::new(move |z| gaussian_limit(&chaos, z))
        }
        FunctionSource::Polynomial { coeffs } => {
            let c = coeffs.clone();
            Box::new(move |z| Ok(c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)))
        }
    })
}

/// HSL with h, s, l in [0, 1].
pub fn hsl_to_rgb(h: f64, s: f64, l: f64) -> [u8; 3] {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = (h.rem_euclid(1.0)) * 6.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let byte = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [byte(r), byte(g), byte(b)]
}

/// Hue of an RGB triple in [0, 1), the inverse of the hue part of [`hsl_to_rgb`].
pub fn rgb_hue(rgb: [u8; 3]) -> f64 {
    let [r, g, b] = rgb.map(|v| v as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let c = max - min;
    if c == 0.0 {
        return 0.0;
    }
    let h = if max == r {
        ((g - b) / c).rem_euclid(6.0)
    } else if max == g {
        (b - r) / c + 2.0
    } else {
        (r - g) / c + 4.0
    };
    h / 6.0
}

pub fn colour(value: Result<Complex64>, scheme: &ColourScheme) -> [u8; 3] {
    match value {
        Ok(f) if f.re.is_finite() && f.im.is_finite() => {
            let modulus = f.norm();
            if modulus == 0.0 {
                return [0, 0, 0];
            }
            let hue = (f.arg() / std::f64::consts::TAU).rem_euclid(1.0);
            let level = modulus.log2();
            let lightness = scheme.base + scheme.depth * (level - level.floor());
            hsl_to_rgb(hue, scheme.saturation, lightness)
        }
        _ => scheme.sentinel,
    }
}

fn encode_png(width: usize, height: usize, rgb: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width as u32, height as u32);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        encoder.set_compression(png::Compression::Balanced);
        let mut writer = encoder.write_header().map_err(|e| Error::Parse(e.to_string()))?;
        writer.write_image_data(rgb).map_err(|e| Error::Parse(e.to_string()))?;
    }
    Ok(out)
}

/// Phase portrait of the source function over the window, as PNG bytes.
pub fn domain_colouring(spec: &RenderSpec) -> Result<Vec<u8>> {
    spec.validate()?;
    let f = evaluator(&spec.source)?;
    let res = spec.resolution;
    let pixel_size = 2.0 * spec.half_width / res as f64;
    let rows: Vec<Vec<u8>> = (0..res)
        .into_par_iter()
        .map(|row| {
            let mut line = Vec::with_capacity(3 * res);
            for col in 0..res {
                let z = spec.pixel(row, col);
                let on_circle = spec.circles.iter().any(|r| (z.norm() - r).abs() < 0.75 * pixel_size);
                let rgb = if on_circle { spec.scheme.circle } else { colour(f(z), &spec.scheme) };
                line.extend_from_slice(&rgb);
            }
            line
        })
        .collect();
    encode_png(res, res, &rows.concat())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatterFormat {
    Csv,
    Png,
}

pub const SCATTER_SIZE: usize = 512;

/// Eigenvalues with reference circles. CSV output is the spectrum's own schema.
pub fn eigen_scatter(spectrum: &Spectrum, circles: &[f64], format: ScatterFormat) -> Result<Vec<u8>> {
    if format == ScatterFormat::Csv {
        return Ok(spectrum.to_csv()?.into_bytes());
    }
    let values = spectrum.values();
    let extent = values
        .iter()
        .map(|z| z.re.abs().max(z.im.abs()))
        .chain(circles.iter().copied())
        .fold(1.0f64, f64::max)
        * 1.1;
    let size = SCATTER_SIZE;
    let mut rgb = vec![255u8; 3 * size * size];
    let to_pixel = |x: f64, y: f64| -> (i64, i64) {
        let col = ((x / extent + 1.0) * 0.5 * size as f64).floor() as i64;
        let row = ((1.0 - y / extent) * 0.5 * size as f64).floor() as i64;
        (row, col)
    };
    let mut put = |row: i64, col: i64, c: [u8; 3]| {
        if (0..size as i64).contains(&row) && (0..size as i64).contains(&col) {
            let i = 3 * (row as usize * size + col as usize);
            rgb[i..i + 3].copy_from_slice(&c);
        }
    };
    let mid = (size / 2) as i64;
    for t in 0..size as i64 {
        put(mid, t, [200, 200, 200]);
        put(t, mid, [200, 200, 200]);
    }
    for &r in circles {
        let steps = (8.0 * size as f64 * r / extent).ceil().max(64.0) as usize;
        for s in 0..steps {
            let a = std::f64::consts::TAU * s as f64 / steps as f64;
            let (row, col) = to_pixel(r * a.cos(), r * a.sin());
            put(row, col, [220, 60, 60]);
        }
    }
    for z in values {
        let (row, col) = to_pixel(z.re, z.im);
        for dr in -1..=1 {
            for dc in -1..=1 {
                put(row + dr, col + dc, [20, 40, 160]);
            }
        }
    }
    encode_png(size, size, &rgb)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn decode(bytes: &[u8]) -> (usize, Vec<u8>) {
        let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
        let mut reader = decoder.read_info().unwrap();
        let mut buf = vec![0; reader.output_buffer_size().unwrap()];
        let info = reader.next_frame(&mut buf).unwrap();
        buf.truncate(info.buffer_size());
        (info.width as usize, buf)
    }

    fn spec(source: FunctionSource, center: (f64, f64), half_width: f64) -> RenderSpec {
        RenderSpec { center, half_width, resolution: 64, source, circles: vec![], scheme: ColourScheme::default() }
    }

    #[test]
    fn constant_one_is_a_single_colour() {
        let png = domain_colouring(&spec(FunctionSource::Polynomial { coeffs: vec![1.0] }, (0.0, 0.0), 1.0)).unwrap();
        let (w, px) = decode(&png);
        assert_eq!(w, 64);
        assert!(px.chunks(3).all(|c| c == &px[..3]));
    }

    #[test]
    fn simple_zero_winds_once() {
        let s = spec(FunctionSource::Polynomial { coeffs: vec![1.0, -2.0] }, (0.5, 0.0), 0.5);
        let (w, px) = decode(&domain_colouring(&s).unwrap());
        let hue = |row: usize, col: usize| {
            let i = 3 * (row * w + col);
            rgb_hue([px[i], px[i + 1], px[i + 2]])
        };
        // Walk a circle of radius 20 pixels around the centre.
        let steps = 200;
        let mut total = 0.0;
        let at = |s: usize| {
            let a = std::f64::consts::TAU * s as f64 / steps as f64;
            let row = (31.5 - 20.0 * a.sin()).round() as usize;
            let col = (31.5 + 20.0 * a.cos()).round() as usize;
            hue(row, col)
        };
        for s in 0..steps {
            let mut dh = at(s + 1) - at(s);
            dh -= dh.round();
            total += dh;
        }
        assert!((total.abs() - 1.0).abs() < 0.05, "{total}");
    }

    #[test]
    fn undefined_points_use_the_sentinel() {
        let s = spec(FunctionSource::GaussianLimit { k: 40, seed: 1 }, (0.0, 0.0), 1.5);
        let (w, px) = decode(&domain_colouring(&s).unwrap());
        assert_eq!(&px[..3], &ColourScheme::default().sentinel);
        let centre = 3 * (32 * w + 32);
        assert_ne!(&px[centre..centre + 3], &ColourScheme::default().sentinel);
    }

    #[test]
    fn hue_inverts_hsl() {
        for i in 0..36 {
            let h = i as f64 / 36.0;
            assert!((rgb_hue(hsl_to_rgb(h, 0.85, 0.5)) - h).abs() < 0.01);
        }
    }

    #[test]
    fn bad_specs_are_rejected() {
        let mut s = spec(FunctionSource::Polynomial { coeffs: vec![1.0] }, (0.0, 0.0), 1.0);
        s.resolution = 8;
        assert!(domain_colouring(&s).is_err());
        s.resolution = 32;
        s.half_width = 0.0;
        assert!(domain_colouring(&s).is_err());
    }

    #[test]
    fn empty_scatter_draws_axes_and_circles() {
        let empty = Spectrum::from_values(&[]);
        let (w, px) = decode(&eigen_scatter(&empty, &[1.0], ScatterFormat::Png).unwrap());
        assert_eq!(w, SCATTER_SIZE);
        assert!(px.chunks(3).any(|c| c == [220, 60, 60]));
        assert!(!px.chunks(3).any(|c| c == [20, 40, 160]));
    }
}
