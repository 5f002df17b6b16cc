//! Material data sets: observed (strain, stress) pairs replacing a
//! constitutive law, the weighting constant that makes the two residuals
//! commensurate, nearest-point queries, and synthetic data generation.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Strains with magnitude at or below this are skipped when estimating the
/// weighting constant from stress/strain ratios.
pub const ZERO_STRAIN_TOL: f64 = 1e-12;

/// One observed (strain, stress) pair. Strain is dimensionless, stress in Pa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialPoint {
    pub strain: f64,
    pub stress: f64,
}

/// Ordered collection of observed material points. Point indices are stable:
/// index `j` always refers to the j-th row of the source.
#[derive(Debug, Clone)]
pub struct MaterialDataset {
    points: Vec<MaterialPoint>,
}

/// The strictly positive constant `c` (Pa) weighting strain against stress
/// residuals in the phase-space distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weighting(f64);

impl Weighting {
    pub fn new(c: f64) -> Result<Self> {
        if c.is_finite() && c > 0.0 {
            Ok(Self(c))
        } else {
            Err(Error::DegenerateDataset(format!(
                "weighting constant must be finite and positive, got {c}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Result of estimating the weighting constant from a dataset.
#[derive(Debug, Clone, Copy)]
pub struct WeightingEstimate {
    pub weighting: Weighting,
    /// Number of points whose ratio entered the mean.
    pub ratios_used: usize,
    /// Number of points skipped because their strain was (near-)zero.
    pub zero_strain_skipped: usize,
}

impl MaterialDataset {
    pub fn new(points: Vec<MaterialPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for (j, point) in points.iter().enumerate() {
            if !point.strain.is_finite() || !point.stress.is_finite() {
                return Err(Error::DegenerateDataset(format!(
                    "point {j} has non-finite components"
                )));
            }
        }
        Ok(Self { points })
    }

    /// Number of observations `d`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, j: usize) -> MaterialPoint {
        self.points[j]
    }

    pub fn points(&self) -> &[MaterialPoint] {
        &self.points
    }

    /// Reads a two-column CSV (strain, stress in Pa) with an optional header
    /// row. Plain numeric CSV only: comma-separated, `.` decimal separator.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv_reader(BufReader::new(file), &path.display().to_string())
    }

    /// Same as [`from_csv_path`](Self::from_csv_path) for any reader;
    /// `origin` names the source in diagnostics.
    pub fn from_csv_reader(reader: impl BufRead, origin: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let row = idx + 1;
            let line = line.map_err(|source| Error::Io {
                path: origin.to_string(),
                source,
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let cells: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if cells.len() != 2 {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    row,
                    column: cells.len(),
                    message: format!("expected 2 columns, found {}", cells.len()),
                });
            }
            let parsed: std::result::Result<Vec<f64>, (usize, String)> = cells
                .iter()
                .enumerate()
                .map(|(col, cell)| {
                    f64::from_str(cell).map_err(|_| (col + 1, format!("not a number: {cell:?}")))
                })
                .collect();
            match parsed {
                Ok(values) => points.push(MaterialPoint {
                    strain: values[0],
                    stress: values[1],
                }),
                Err((column, message)) => {
                    // A non-numeric first row is an optional header.
                    if row == 1 && points.is_empty() {
                        continue;
                    }
                    return Err(Error::Parse {
                        path: origin.to_string(),
                        row,
                        column,
                        message,
                    });
                }
            }
        }
        Self::new(points)
    }

    /// Writes the CSV format read by [`from_csv_path`](Self::from_csv_path),
    /// with a `strain,stress` header. Byte-deterministic for a given dataset.
    pub fn write_csv(&self, mut writer: impl Write) -> std::io::Result<()> {
        writeln!(writer, "strain,stress")?;
        for point in &self.points {
            writeln!(writer, "{:.12e},{:.12e}", point.strain, point.stress)?;
        }
        Ok(())
    }

    pub fn to_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.write_csv(&mut file).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Mean of the stress/strain ratios over all points with
    /// `|strain| > ZERO_STRAIN_TOL`. Errors if no point qualifies or the
    /// mean is not positive.
    pub fn compute_c(&self) -> Result<WeightingEstimate> {
        if self.points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut sum = 0.0;
        let mut used = 0usize;
        for point in &self.points {
            if point.strain.abs() > ZERO_STRAIN_TOL {
                sum += point.stress / point.strain;
                used += 1;
            }
        }
        if used == 0 {
            return Err(Error::DegenerateDataset(
                "no points with nonzero strain for the ratio mean".into(),
            ));
        }
        let c = sum / used as f64;
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::DegenerateDataset(format!(
                "mean stress/strain ratio is not positive: {c}"
            )));
        }
        Ok(WeightingEstimate {
            weighting: Weighting(c),
            ratios_used: used,
            zero_strain_skipped: self.points.len() - used,
        })
    }

    /// Squared phase-space distance from a member state `(strain, stress)`
    /// to data point `j`, for member volume `v` and weighting `c`:
    /// `(v c / 2)(strain - e_j)^2 + (v / 2c)(stress - s_j)^2`.
    pub fn squared_distance(&self, strain: f64, stress: f64, c: f64, v: f64, j: usize) -> f64 {
        let p = self.points[j];
        let de = strain - p.strain;
        let ds = stress - p.stress;
        0.5 * v * c * de * de + 0.5 * v / c * ds * ds
    }

    /// Nearest data point to `(strain, stress)` over the whole set.
    /// Ties resolve to the smallest index.
    pub fn nearest(&self, strain: f64, stress: f64, c: f64, v: f64) -> (usize, f64) {
        let mut best = (0usize, self.squared_distance(strain, stress, c, v, 0));
        for j in 1..self.points.len() {
            let d = self.squared_distance(strain, stress, c, v, j);
            if d < best.1 {
                best = (j, d);
            }
        }
        best
    }

    /// Nearest data point restricted to `allowed` (indices in ascending
    /// order). Ties resolve to the smallest index.
    pub fn nearest_in(
        &self,
        strain: f64,
        stress: f64,
        c: f64,
        v: f64,
        allowed: &[u32],
    ) -> Result<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for &j in allowed {
            let j = j as usize;
            let d = self.squared_distance(strain, stress, c, v, j);
            match best {
                Some((_, bd)) if d >= bd => {}
                _ => best = Some((j, d)),
            }
        }
        best.ok_or(Error::EmptyAllowedSet)
    }
}

/// Stress-strain curve used by the synthetic data generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveSpec {
    /// `stress = modulus * strain`
    Linear { modulus: f64 },
    /// `stress = modulus * strain - beta * strain^3`
    CubicSoftening { modulus: f64, beta: f64 },
}

impl CurveSpec {
    pub fn stress(&self, strain: f64) -> f64 {
        match *self {
            CurveSpec::Linear { modulus } => modulus * strain,
            CurveSpec::CubicSoftening { modulus, beta } => {
                modulus * strain - beta * strain * strain * strain
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            CurveSpec::Linear { modulus } => modulus.is_finite() && modulus > 0.0,
            CurveSpec::CubicSoftening { modulus, beta } => {
                modulus.is_finite() && modulus > 0.0 && beta.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidCurveSpec(format!("{self:?}")))
        }
    }
}

impl FromStr for CurveSpec {
    type Err = Error;

    /// `linear:<E>` or `cubic:<E>,<beta>`, e.g. `cubic:2e9,4e12`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidCurveSpec(format!("{s:?}: {msg}"));
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| bad("expected `<kind>:<params>`"))?;
        let spec = match kind.trim() {
            "linear" => CurveSpec::Linear {
                modulus: f64::from_str(args.trim()).map_err(|_| bad("bad modulus"))?,
            },
            "cubic" => {
                let (e, beta) = args
                    .split_once(',')
                    .ok_or_else(|| bad("cubic takes `<E>,<beta>`"))?;
                CurveSpec::CubicSoftening {
                    modulus: f64::from_str(e.trim()).map_err(|_| bad("bad modulus"))?,
                    beta: f64::from_str(beta.trim()).map_err(|_| bad("bad beta"))?,
                }
            }
            other => return Err(bad(&format!("unknown curve kind {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Generates `d` points with strains evenly spaced over
/// `[strain_range.0, strain_range.1]` (endpoints included) and stresses on
/// the curve plus Gaussian noise of the given standard deviation.
/// Deterministic for a fixed seed.
pub fn generate_synthetic(
    curve: &CurveSpec,
    d: usize,
    strain_range: (f64, f64),
    noise_std: f64,
    seed: u64,
) -> Result<MaterialDataset> {
    curve.validate()?;
    if d < 1 {
        return Err(Error::EmptyDataset);
    }
    let (lo, hi) = strain_range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidCurveSpec(format!(
            "bad strain range [{lo}, {hi}]"
        )));
    }
    if !(noise_std >= 0.0) || !noise_std.is_finite() {
        return Err(Error::InvalidCurveSpec(format!(
            "bad noise standard deviation {noise_std}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_std).expect("validated std");
    let mut points = Vec::with_capacity(d);
    for k in 0..d {
        let strain = if d == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * k as f64 / (d - 1) as f64
        };
        let mut stress = curve.stress(strain);
        if noise_std > 0.0 {
            stress += noise.sample(&mut rng);
        }
        points.push(MaterialPoint { strain, stress });
    }
    MaterialDataset::new(points)
}
