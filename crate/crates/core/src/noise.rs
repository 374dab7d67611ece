//! Seeded Wiener increments with exact Brownian-bridge refinement.
//!
//! Every Gaussian draw is addressed by `(seed, level, index)` on a ChaCha20
//! stream: the seed keys the cipher, the refinement level selects the
//! stream, and the index fixes the word position. Draws therefore never
//! depend on the order in which paths or levels are produced.
//!
//! Increments are stored as integer multiples of a power-of-two quantum tied
//! to the base step. Block sums of refined increments are then exact in any
//! summation order, which is what makes coarse and fine integrations see
//! bit-identical Brownian paths.

use std::io::{BufRead, Write};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// Uniform time grid `t0, t0 + dt, …, t0 + steps·dt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidArgument("start time must be finite".into()));
        }
        Ok(Self { t0, dt, steps })
    }

    /// Grid covering `[0, t_final]` with `round(t_final/dt)` steps.
    pub fn covering(dt: f64, t_final: f64) -> Result<Self> {
        if !(t_final > 0.0) {
            return Err(Error::InvalidArgument(format!("final time must be positive, got {t_final}")));
        }
        let steps = (t_final / dt).round().max(1.0) as usize;
        Self::new(0.0, dt, steps)
    }

    pub fn time(&self, step: usize) -> f64 {
        self.t0 + step as f64 * self.dt
    }

    pub fn t_final(&self) -> f64 {
        self.time(self.steps)
    }
}

/// Increments `ΔWⁱₙ` for `m` independent drivers over a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerPath {
    m: usize,
    steps: usize,
    dt: f64,
    increments: Vec<f64>,
    seed: u64,
    level: u32,
    /// Power-of-two grid the increments live on; `None` for replayed paths.
    quantum: Option<f64>,
}

/// Standard normal via Box–Muller from the four 32-bit words at `index`.
struct NormalSource {
    rng: ChaCha20Rng,
}

impl NormalSource {
    fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    fn draw(&mut self, level: u32, index: u64) -> f64 {
        self.rng.set_stream(level as u64);
        self.rng.set_word_pos(index as u128 * 4);
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        // u1 ∈ (0, 1], u2 ∈ [0, 1)
        let u1 = ((a >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
        let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

fn quantum_for(dt: f64) -> f64 {
    2f64.powi(dt.sqrt().log2().floor() as i32 - 44)
}

fn snap(x: f64, q: f64) -> f64 {
    (x / q).round() * q
}

/// Draws `steps × m` increments `√dt · N(0,1)` keyed by `seed`.
pub fn generate(seed: u64, m: usize, grid: &TimeGrid) -> WienerPath {
    let q = quantum_for(grid.dt);
    let sd = grid.dt.sqrt();
    let mut src = NormalSource::new(seed);
    let increments = (0..grid.steps * m)
        .map(|idx| snap(sd * src.draw(0, idx as u64), q))
        .collect();
    WienerPath {
        m,
        steps: grid.steps,
        dt: grid.dt,
        increments,
        seed,
        level: 0,
        quantum: Some(q),
    }
}

impl WienerPath {
    /// A path with all increments zero (deterministic runs).
    pub fn zero(m: usize, grid: &TimeGrid) -> Self {
        Self {
            m,
            steps: grid.steps,
            dt: grid.dt,
            increments: vec![0.0; m * grid.steps],
            seed: 0,
            level: 0,
            quantum: Some(quantum_for(grid.dt)),
        }
    }

    /// A path built from externally supplied increments, row-major
    /// `steps × m`. Such paths cannot be refined.
    pub fn from_increments(m: usize, dt: f64, increments: Vec<f64>) -> Result<Self> {
        if m == 0 && !increments.is_empty() {
            return Err(Error::InvalidArgument("increments given for zero drivers".into()));
        }
        if m > 0 && !increments.len().is_multiple_of(m) {
            return Err(Error::InvalidArgument(format!(
                "{} increments do not fill whole steps of {m} drivers",
                increments.len()
            )));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument("time step must be positive".into()));
        }
        let steps = increments.len().checked_div(m).unwrap_or(0);
        Ok(Self {
            m,
            steps,
            dt,
            increments,
            seed: 0,
            level: 0,
            quantum: None,
        })
    }

    pub fn drivers(&self) -> usize {
        self.m
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Increments of all drivers for step `n`.
    pub fn step(&self, n: usize) -> &[f64] {
        &self.increments[n * self.m..(n + 1) * self.m]
    }

    pub fn increment(&self, step: usize, driver: usize) -> f64 {
        self.increments[step * self.m + driver]
    }

    /// Checks that this path can drive an integration on `grid`.
    pub fn check_grid(&self, grid: &TimeGrid, drivers: usize) -> Result<()> {
        Error::check_dim(drivers, self.m)?;
        if drivers > 0 && self.steps < grid.steps {
            return Err(Error::InvalidArgument(format!(
                "Wiener path has {} steps, grid needs {}",
                self.steps, grid.steps
            )));
        }
        if drivers > 0 && (self.dt - grid.dt).abs() > 1e-12 * grid.dt {
            return Err(Error::InvalidArgument(format!(
                "Wiener path step {} does not match grid step {}",
                self.dt, grid.dt
            )));
        }
        Ok(())
    }

    /// Splits every increment into `factor` sub-increments by Brownian-bridge
    /// sampling. `factor` must be a power of two; refining by 4 is bitwise
    /// identical to refining by 2 twice.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !factor.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "refinement factor must be a power of two, got {factor}"
            )));
        }
        let mut path = self.clone();
        for _ in 0..factor.trailing_zeros() {
            path = path.halve()?;
        }
        Ok(path)
    }

    fn halve(&self) -> Result<Self> {
        let q = self.quantum.ok_or_else(|| {
            Error::InvalidArgument("replayed Wiener paths cannot be refined".into())
        })?;
        let steps = self
            .steps
            .checked_mul(2)
            .filter(|s| s.checked_mul(self.m.max(1)).is_some())
            .ok_or_else(|| Error::InvalidArgument("refined path step count overflows".into()))?;
        let level = self.level + 1;
        // Conditional law of the first half given the whole: N(ΔW/2, dt/4).
        let sd = 0.5 * self.dt.sqrt();
        let mut src = NormalSource::new(self.seed);
        let mut increments = vec![0.0; steps * self.m];
        for n in 0..self.steps {
            for d in 0..self.m {
                let total = self.increment(n, d);
                let idx = (n * self.m + d) as u64;
                let first = snap(0.5 * total + sd * src.draw(level, idx), q);
                increments[2 * n * self.m + d] = first;
                increments[(2 * n + 1) * self.m + d] = total - first;
            }
        }
        Ok(Self {
            m: self.m,
            steps,
            dt: self.dt / 2.0,
            increments,
            seed: self.seed,
            level,
            quantum: Some(q),
        })
    }

    /// Sums of `factor` consecutive increments, left to right.
    pub fn block_sums(&self, factor: usize) -> Result<Vec<f64>> {
        if factor == 0 || !self.steps.is_multiple_of(factor) {
            return Err(Error::InvalidArgument(format!(
                "{} steps are not divisible into blocks of {factor}",
                self.steps
            )));
        }
        let coarse = self.steps / factor;
        let mut out = vec![0.0; coarse * self.m];
        for n in 0..coarse {
            for d in 0..self.m {
                let mut s = 0.0;
                for k in 0..factor {
                    s += self.increment(n * factor + k, d);
                }
                out[n * self.m + d] = s;
            }
        }
        Ok(out)
    }

    /// Writes `step,driver,dW` rows with shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "step,driver,dW")?;
        for n in 0..self.steps {
            for d in 0..self.m {
                writeln!(w, "{n},{d},{}", self.increment(n, d))?;
            }
        }
        Ok(())
    }

    /// Reads the format written by [`WienerPath::write_csv`].
    pub fn read_csv<R: BufRead>(r: R, dt: f64) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let mut rows: Vec<(usize, usize, f64)> = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
            let field = |i: usize| {
                rec.get(i)
                    .map(str::trim)
                    .ok_or_else(|| Error::Io(format!("increment row has no column {i}")))
            };
            let parse_err = |e: String| Error::Io(format!("bad increment row {:?}: {e}", rec));
            let step = field(0)?.parse::<usize>().map_err(|e| parse_err(e.to_string()))?;
            let driver = field(1)?.parse::<usize>().map_err(|e| parse_err(e.to_string()))?;
            let dw = field(2)?.parse::<f64>().map_err(|e| parse_err(e.to_string()))?;
            rows.push((step, driver, dw));
        }
        if rows.is_empty() {
            return Self::from_increments(0, dt, Vec::new());
        }
        let steps = rows.iter().map(|r| r.0).max().unwrap() + 1;
        let m = rows.iter().map(|r| r.1).max().unwrap() + 1;
        if rows.len() != steps * m {
            return Err(Error::Io(format!(
                "increment table has {} rows, expected {steps}x{m}",
                rows.len()
            )));
        }
        let mut inc = vec![f64::NAN; steps * m];
        for (n, d, w) in rows {
            inc[n * m + d] = w;
        }
        if inc.iter().any(|x| x.is_nan()) {
            return Err(Error::Io("increment table has duplicate or missing entries".into()));
        }
        Self::from_increments(m, dt, inc)
    }
}
