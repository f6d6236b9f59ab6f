use std::io::{self, Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Point = [f64; 3];

/// Generator recorded alongside synthetic outputs.
pub const SYNTHETIC_ALGORITHM: &str = "chacha8";

#[derive(Debug, thiserror::Error)]
pub enum CloudError {
    #[error("point cloud is empty")]
    Empty,
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("binary cloud header declares {declared} points but {found} bytes of data follow")]
    Truncated { declared: usize, found: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point>,
    attr_count: usize,
    attrs: Vec<f64>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Result<Self, CloudError> {
        Self::with_attrs(points, 0, Vec::new())
    }

    /// `attrs` holds `attr_count` values per point, row-major.
    pub fn with_attrs(
        points: Vec<Point>,
        attr_count: usize,
        attrs: Vec<f64>,
    ) -> Result<Self, CloudError> {
        if points.is_empty() {
            return Err(CloudError::Empty);
        }
        if let Some(index) = points.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(CloudError::NonFinite { index });
        }
        assert_eq!(
            attrs.len(),
            points.len() * attr_count,
            "attribute table size"
        );
        Ok(Self {
            points,
            attr_count,
            attrs,
        })
    }

    /// `n` points uniform in the unit cube.
    pub fn synthetic(n: usize, seed: u64) -> Result<Self, CloudError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..n)
            .map(|_| [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        Self::new(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    pub fn attr_count(&self) -> usize {
        self.attr_count
    }

    pub fn attrs(&self, i: usize) -> &[f64] {
        &self.attrs[i * self.attr_count..(i + 1) * self.attr_count]
    }

    /// Parses `x y z [attrs...]` lines; blank lines and `#` comments are
    /// skipped. Every point must carry the same number of attributes.
    pub fn parse_text(text: &str) -> Result<Self, CloudError> {
        let mut points = Vec::new();
        let mut attrs = Vec::new();
        let mut attr_count = None;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let values = body
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| CloudError::Parse {
                        line: line_no,
                        message: format!("`{tok}` is not a number"),
                    })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            if values.len() < 3 {
                return Err(CloudError::Parse {
                    line: line_no,
                    message: format!("expected at least 3 values, found {}", values.len()),
                });
            }
            let extra = values.len() - 3;
            match attr_count {
                None => attr_count = Some(extra),
                Some(n) if n != extra => {
                    return Err(CloudError::Parse {
                        line: line_no,
                        message: format!("expected {n} attributes, found {extra}"),
                    })
                }
                _ => {}
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(CloudError::Parse {
                    line: line_no,
                    message: "non-finite value".into(),
                });
            }
            points.push([values[0], values[1], values[2]]);
            attrs.extend_from_slice(&values[3..]);
        }
        Self::with_attrs(points, attr_count.unwrap_or(0), attrs)
    }

    /// Reads a little-endian `u32` count followed by `f32` triples.
    pub fn read_binary(mut reader: impl Read) -> Result<Self, CloudError> {
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        if bytes.len() < 4 {
            return Err(CloudError::Truncated {
                declared: 0,
                found: bytes.len(),
            });
        }
        let declared = u32::from_le_bytes(bytes[..4].try_into().expect("4 bytes")) as usize;
        let data = &bytes[4..];
        if data.len() != declared * 12 {
            return Err(CloudError::Truncated {
                declared,
                found: data.len(),
            });
        }
        let points = data
            .chunks_exact(12)
            .map(|c| {
                let f = |k: usize| {
                    f32::from_le_bytes(c[4 * k..4 * k + 4].try_into().expect("4 bytes")) as f64
                };
                [f(0), f(1), f(2)]
            })
            .collect();
        Self::new(points)
    }

    pub fn write_binary(&self, mut out: impl Write) -> io::Result<()> {
        out.write_all(&(self.points.len() as u32).to_le_bytes())?;
        for p in &self.points {
            for c in p {
                out.write_all(&(*c as f32).to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn write_text(&self, mut out: impl Write) -> io::Result<()> {
        for i in 0..self.len() {
            let p = self.points[i];
            write!(out, "{} {} {}", p[0], p[1], p[2])?;
            for a in self.attrs(i) {
                write!(out, " {a}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

pub fn squared_distance(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}
