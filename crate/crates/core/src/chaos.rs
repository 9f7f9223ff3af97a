//! Chebyshev (CPF) and piecewise-linear (PWL) chaotic chip generators.
//!
//! Raw orbits live in `[-1, 1]`. Sequences handed to the modem are shifted
//! and scaled by per-map constants so that chips have zero mean and unit
//! variance. The constants come from one long calibration orbit per map and
//! are cached for the life of the process.

use std::collections::HashMap;
use std::fmt;
use std::sync::{LazyLock, Mutex};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Iterates discarded before the first emitted chip.
pub const DEFAULT_BURN_IN: usize = 1000;

/// Seeds closer than this to a fixed point are rejected.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-6;

const CALIBRATION_SEED: f64 = 0.123_456_789;
const CALIBRATION_LENGTH: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MapKind {
    /// Order-2 Chebyshev polynomial map `x -> 1 - 2x^2`.
    Cpf,
    /// `z = (L|x| + phi) mod 1`, `x -> sign(x) (2z - 1)`.
    Pwl { l: u32, phi: f64 },
}

impl MapKind {
    pub const fn pwl_default() -> Self {
        MapKind::Pwl { l: 3, phi: 0.1 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MapKind::Cpf => "cpf",
            MapKind::Pwl { .. } => "pwl",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let MapKind::Pwl { l, phi } = *self {
            if l < 1 {
                return Err(Error::invalid("pwl_l", "must be a positive integer"));
            }
            if !(phi > 0.0 && phi < 1.0) {
                return Err(Error::invalid("pwl_phi", format!("{phi} not in (0, 1)")));
            }
        }
        Ok(())
    }

    /// One step of the map with the domain check.
    pub fn iterate(&self, x: f64) -> Result<f64> {
        match *self {
            MapKind::Cpf => cpf_iterate(x),
            MapKind::Pwl { l, phi } => pwl_iterate(x, l, phi),
        }
    }

    #[inline]
    fn step(&self, x: f64) -> f64 {
        match *self {
            MapKind::Cpf => 1.0 - 2.0 * x * x,
            MapKind::Pwl { l, phi } => {
                let z = (l as f64 * x.abs() + phi).fract();
                let y = 2.0 * z - 1.0;
                if x < 0.0 {
                    -y
                } else {
                    y
                }
            }
        }
    }

    /// Fixed points of the map inside `[-1, 1]`.
    pub fn fixed_points(&self) -> Vec<f64> {
        match *self {
            MapKind::Cpf => vec![-1.0, 0.5],
            MapKind::Pwl { l, phi } => {
                // Positive branch: x = 2(Lx + phi - k) - 1 for the integer part k.
                // The map is odd, so the negated points are fixed as well.
                let lf = l as f64;
                let mut points = Vec::new();
                for k in 0..=l {
                    let y = (2.0 * k as f64 + 1.0 - 2.0 * phi) / (2.0 * lf - 1.0);
                    if y > 0.0 && y <= 1.0 && (self.step(y) - y).abs() < 1e-9 {
                        points.push(y);
                        points.push(-y);
                    }
                }
                points
            }
        }
    }

    fn check_seed(&self, seed: f64) -> Result<()> {
        if !(seed > -1.0 && seed < 1.0) {
            return Err(Error::Domain(format!("seed {seed} outside (-1, 1)")));
        }
        if let Some(fp) = self
            .fixed_points()
            .into_iter()
            .find(|fp| (seed - fp).abs() <= FIXED_POINT_TOLERANCE)
        {
            return Err(Error::Domain(format!(
                "seed {seed} within {FIXED_POINT_TOLERANCE:e} of fixed point {fp} of the {} map",
                self.name()
            )));
        }
        Ok(())
    }

    /// Draws a seed uniformly from `(-1, 1)`, redrawing near fixed points.
    pub fn random_seed<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let s = rng.random_range(-1.0..1.0);
            if self.check_seed(s).is_ok() {
                return s;
            }
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapKind::Cpf => write!(f, "cpf"),
            MapKind::Pwl { l, phi } => write!(f, "pwl(L={l}, phi={phi})"),
        }
    }
}

fn check_unit_interval(x: f64) -> Result<()> {
    if x.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("|x| = {} exceeds 1", x.abs())))
    }
}

pub fn cpf_iterate(x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    Ok(MapKind::Cpf.step(x))
}

/// `sign(0)` is taken as `+1`.
pub fn pwl_iterate(x: f64, l: u32, phi: f64) -> Result<f64> {
    check_unit_interval(x)?;
    let map = MapKind::Pwl { l, phi };
    map.validate()?;
    Ok(map.step(x))
}

/// Long-run affine constants of a map's raw orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub mean: f64,
    pub std: f64,
}

#[derive(Hash, PartialEq, Eq)]
enum CalibrationKey {
    Cpf,
    Pwl(u32, u64),
}

static CALIBRATIONS: LazyLock<Mutex<HashMap<CalibrationKey, Calibration>>> =
    LazyLock::new(Default::default);

/// Normalization constants for `map`, computed once from a fixed-seed orbit.
pub fn calibration(map: &MapKind) -> Result<Calibration> {
    map.validate()?;
    let key = match *map {
        MapKind::Cpf => CalibrationKey::Cpf,
        MapKind::Pwl { l, phi } => CalibrationKey::Pwl(l, phi.to_bits()),
    };
    if let Some(c) = CALIBRATIONS.lock().expect("calibration cache").get(&key) {
        return Ok(*c);
    }
    let orbit = raw_orbit(map, CALIBRATION_SEED, CALIBRATION_LENGTH, DEFAULT_BURN_IN)?;
    let (mean, var) = sample_stats(&orbit)?;
    let c = Calibration {
        mean,
        std: var.sqrt(),
    };
    CALIBRATIONS.lock().expect("calibration cache").insert(key, c);
    Ok(c)
}

/// Unnormalized orbit: `burn_in` discarded iterates, then `length` chips.
///
/// Fails if the orbit lands on a fixed point in finite precision.
pub fn raw_orbit(map: &MapKind, seed: f64, length: usize, burn_in: usize) -> Result<Vec<f64>> {
    map.validate()?;
    map.check_seed(seed)?;
    let mut x = seed;
    for _ in 0..burn_in {
        x = map.step(x);
    }
    let mut out = Vec::with_capacity(length);
    for _ in 0..length {
        let next = map.step(x);
        if next == x {
            return Err(Error::Domain(format!(
                "orbit from seed {seed} collapsed onto fixed point {x}"
            )));
        }
        x = next;
        out.push(x);
    }
    Ok(out)
}

/// A run of chips from one chaotic orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaoticSequence {
    pub chips: Vec<f64>,
    pub map: MapKind,
    pub seed_state: f64,
    pub normalized: bool,
    pub raw_mean: f64,
    pub raw_std: f64,
}

impl ChaoticSequence {
    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    /// Wraps externally supplied chips (already normalized) as a sequence.
    pub fn from_chips(chips: Vec<f64>, map: MapKind) -> Self {
        ChaoticSequence {
            chips,
            map,
            seed_state: 0.0,
            normalized: true,
            raw_mean: 0.0,
            raw_std: 1.0,
        }
    }
}

/// Generates `length` zero-mean, unit-variance chips from `seed_state`.
pub fn generate_sequence(
    map: MapKind,
    seed_state: f64,
    length: usize,
    burn_in: usize,
) -> Result<ChaoticSequence> {
    if length == 0 {
        return Err(Error::invalid("length", "must be positive"));
    }
    let cal = calibration(&map)?;
    let mut chips = raw_orbit(&map, seed_state, length, burn_in)?;
    let inv = 1.0 / cal.std;
    for c in &mut chips {
        *c = (*c - cal.mean) * inv;
    }
    Ok(ChaoticSequence {
        chips,
        map,
        seed_state,
        normalized: true,
        raw_mean: cal.mean,
        raw_std: cal.std,
    })
}

/// Sample mean and biased sample variance of the chips.
pub fn sequence_stats(seq: &ChaoticSequence) -> Result<(f64, f64)> {
    sample_stats(&seq.chips)
}

pub(crate) fn sample_stats(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var))
}
