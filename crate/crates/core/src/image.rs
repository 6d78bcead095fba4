//! Grayscale images as initial conditions.
//!
//! Images are binary PGM (P5) files covering `[-1, 1]²`, row 0 at the top.
//! Intensity `0` maps to `u = -1` and full intensity to `u = +1`.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::{Domain, ScalarField, CLAMP_VALUE};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Row-major, row 0 at the top.
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Image("image has zero size".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::Image(format!(
                "expected {} pixels, found {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            maxval: 255,
            pixels,
        })
    }

    /// Rasterizes an indicator on `[-1, 1]²` at pixel centres.
    pub fn from_indicator(size: usize, inside: impl Fn(f64, f64) -> bool) -> Result<Self> {
        let mut pixels = vec![0u8; size * size];
        for r in 0..size {
            for c in 0..size {
                let x = (c as f64 + 0.5) / size as f64 * 2.0 - 1.0;
                let y = 1.0 - (r as f64 + 0.5) / size as f64 * 2.0;
                if inside(x, y) {
                    pixels[r * size + c] = 255;
                }
            }
        }
        Self::new(size, size, pixels)
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let mut token = || -> Result<String> {
            loop {
                while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::Image("truncated PGM header".into()));
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };
        if token()? != "P5" {
            return Err(Error::Image("not a binary PGM (P5) file".into()));
        }
        let mut number = |what: &str| -> Result<usize> {
            let t = token()?;
            t.parse()
                .map_err(|_| Error::Image(format!("bad {what} in PGM header: {t:?}")))
        };
        let width = number("width")?;
        let height = number("height")?;
        let maxval = number("maxval")?;
        if maxval == 0 || maxval > 255 {
            return Err(Error::Image(format!("unsupported maxval {maxval}")));
        }
        // exactly one whitespace byte separates the header from the raster
        let data = bytes.get(pos + 1..).unwrap_or(&[]);
        if data.len() < width * height {
            return Err(Error::Image(format!(
                "expected {} pixels, found {}",
                width * height,
                data.len()
            )));
        }
        let mut img = Self::new(width, height, data[..width * height].to_vec())?;
        img.maxval = maxval as u16;
        Ok(img)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n{}\n", self.width, self.height, self.maxval).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&bytes).map_err(|e| Error::Image(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    /// Intensities scaled to `[0, 1]`.
    pub fn intensities(&self) -> Vec<f64> {
        let s = 1.0 / self.maxval as f64;
        self.pixels.iter().map(|&p| p as f64 * s).collect()
    }
}

/// Separable Gaussian blur with standard deviation `sigma` pixels, edges
/// extended by replication. `sigma = 0` is the identity.
pub fn gaussian_blur(values: &[f64], width: usize, height: usize, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return values.to_vec();
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|w| *w /= total);

    let pass = |src: &[f64], len: usize, count: usize, at: &dyn Fn(usize, usize) -> usize| {
        let mut dst = vec![0.0; src.len()];
        for line in 0..count {
            for i in 0..len {
                let mut acc = 0.0;
                for (o, w) in kernel.iter().enumerate() {
                    let j = (i as isize + o as isize - radius).clamp(0, len as isize - 1) as usize;
                    acc += w * src[at(line, j)];
                }
                dst[at(line, i)] = acc;
            }
        }
        dst
    };
    let rows = pass(values, width, height, &|r, c| r * width + c);
    pass(&rows, height, width, &|c, r| r * width + c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageInitParams {
    pub path: PathBuf,
    /// Blur standard deviation in pixels.
    pub blur_sigma: f64,
}

/// Reads the PGM at `params.path` and samples it with [`init_from_gray`].
pub fn init_from_image(params: &ImageInitParams, domain: &Domain) -> Result<ScalarField> {
    let img = GrayImage::read(&params.path)?;
    init_from_gray(&img, params.blur_sigma, domain)
}

/// Blurs, samples bilinearly at FREE nodes and maps `[0, 1] → [-1, 1]`.
pub fn init_from_gray(img: &GrayImage, blur_sigma: f64, domain: &Domain) -> Result<ScalarField> {
    if !(blur_sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "blur_sigma must be non-negative, got {blur_sigma}"
        )));
    }
    let (w, h) = (img.width, img.height);
    let data = gaussian_blur(&img.intensities(), w, h, blur_sigma);
    let sample = |x: f64, y: f64| -> f64 {
        // continuous pixel coordinates with pixel centres at integers
        let fc = (x + 1.0) / 2.0 * w as f64 - 0.5;
        let fr = (1.0 - y) / 2.0 * h as f64 - 0.5;
        let c0 = fc.floor().clamp(0.0, (w - 1) as f64);
        let r0 = fr.floor().clamp(0.0, (h - 1) as f64);
        let tc = (fc - c0).clamp(0.0, 1.0);
        let tr = (fr - r0).clamp(0.0, 1.0);
        let (c0, r0) = (c0 as usize, r0 as usize);
        let (c1, r1) = ((c0 + 1).min(w - 1), (r0 + 1).min(h - 1));
        let at = |r: usize, c: usize| data[r * w + c];
        (1.0 - tr) * ((1.0 - tc) * at(r0, c0) + tc * at(r0, c1)) + tr * ((1.0 - tc) * at(r1, c0) + tc * at(r1, c1))
    };
    let grid = *domain.grid();
    let mut u = domain.filled(CLAMP_VALUE);
    for k in domain.free_nodes() {
        let [x, y] = grid.position(k);
        u.values[k] = (2.0 * sample(x, y) - 1.0).clamp(-1.0, 1.0);
    }
    Ok(u)
}

/// Three-fold symmetric shape: a core disc joined to three lobes by necks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LobedShape {
    pub core_radius: f64,
    pub lobe_radius: f64,
    /// Distance of the lobe centres from the origin.
    pub lobe_distance: f64,
    pub neck_width: f64,
    /// Angle of the first lobe, radians.
    pub rotation: f64,
}

impl Default for LobedShape {
    fn default() -> Self {
        Self {
            core_radius: 0.3,
            lobe_radius: 0.22,
            lobe_distance: 0.65,
            neck_width: 0.15,
            rotation: FRAC_PI_2,
        }
    }
}

impl LobedShape {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        if x.hypot(y) < self.core_radius {
            return true;
        }
        (0..3).any(|i| {
            let th = self.rotation + TAU * i as f64 / 3.0;
            let (dx, dy) = (th.cos(), th.sin());
            let (cx, cy) = (self.lobe_distance * dx, self.lobe_distance * dy);
            if (x - cx).hypot(y - cy) < self.lobe_radius {
                return true;
            }
            let along = x * dx + y * dy;
            let across = (-x * dy + y * dx).abs();
            along > 0.0 && along < self.lobe_distance && across < 0.5 * self.neck_width
        })
    }
}

/// Mirror-symmetric bent band: an annular sector about the y axis with
/// rounded ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldedShape {
    /// Radius of the band's centre line.
    pub radius: f64,
    pub half_width: f64,
    /// Half the opening angle of the band, radians.
    pub half_angle: f64,
}

impl Default for FoldedShape {
    fn default() -> Self {
        Self {
            radius: 0.55,
            half_width: 0.17,
            half_angle: 2.4,
        }
    }
}

impl FoldedShape {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let r = x.hypot(y);
        // angle measured from the +y axis
        let a = x.atan2(y).abs();
        if a <= self.half_angle {
            return (r - self.radius).abs() < self.half_width;
        }
        [-1.0, 1.0].iter().any(|&s| {
            let ex = s * self.radius * self.half_angle.sin();
            let ey = self.radius * self.half_angle.cos();
            (x - ex).hypot(y - ey) < self.half_width
        })
    }
}
