use std::io::{self, BufRead, Write};

use super::{SimError, SimModel};
use crate::rng::{self, SplitMix64};

/// One realised initial state plus an `h x width` block of uniform numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<S> {
    initial_state: S,
    noise: Vec<f64>,
    width: usize,
}

impl<S> Scenario<S> {
    /// Builds a scenario from row-major noise. Every entry must lie in `[0, 1]`.
    pub fn new(initial_state: S, noise: Vec<f64>, width: usize) -> Result<Self, SimError> {
        if width == 0 && !noise.is_empty() {
            return Err(SimError::Domain("noise width 0 with nonempty noise".into()));
        }
        if width > 0 && noise.len() % width != 0 {
            return Err(SimError::Domain(format!("{} noise entries do not fill rows of width {width}", noise.len())));
        }
        if let Some(bad) = noise.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(SimError::Domain(format!("noise entry {bad} outside [0, 1]")));
        }
        Ok(Self { initial_state, noise, width })
    }

    pub fn initial_state(&self) -> &S {
        &self.initial_state
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> usize {
        if self.width == 0 {
            0
        } else {
            self.noise.len() / self.width
        }
    }

    /// Noise block consumed by transition `t`.
    pub fn row(&self, t: usize) -> &[f64] {
        &self.noise[t * self.width..(t + 1) * self.width]
    }

    pub fn noise(&self) -> &[f64] {
        &self.noise
    }
}

/// Draws `m` scenarios with `h` noise rows each.
///
/// Scenario `i` uses its own generator stream `rng::stream(seed, i)`: the initial
/// state is drawn first, then the noise block is filled row by row. Scenario `i` is
/// therefore a pure function of `(seed, i)`.
pub fn draw_scenarios<M: SimModel>(
    model: &M,
    m: usize,
    h: usize,
    seed: u64,
) -> Result<Vec<Scenario<M::State>>, SimError> {
    if m == 0 || h == 0 {
        return Err(SimError::Domain(format!("need m >= 1 and h >= 1, got m={m}, h={h}")));
    }
    let width = model.noise_dim();
    Ok((0..m as u64)
        .map(|i| {
            let mut rng: SplitMix64 = rng::stream(seed, i);
            let initial_state = model.initial(&mut rng);
            let noise = (0..h * width).map(|_| rng::uniform01(&mut rng)).collect();
            Scenario { initial_state, noise, width }
        })
        .collect())
}

/// Single-token text form of a state, used by the scenario file format.
///
/// The token must not contain commas or newlines.
pub trait StateText: Sized {
    fn to_token(&self) -> String;
    fn from_token(token: &str) -> Option<Self>;
}

impl StateText for usize {
    fn to_token(&self) -> String {
        self.to_string()
    }

    fn from_token(token: &str) -> Option<Self> {
        token.parse().ok()
    }
}

/// 17 significant digits in scientific notation; round-trips every `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes one scenario per line: the state token, then row-major noise entries with
/// 17 significant digits, comma separated.
pub fn write_scenarios<S: StateText, W: Write>(out: &mut W, scenarios: &[Scenario<S>]) -> io::Result<()> {
    for sc in scenarios {
        write!(out, "{}", sc.initial_state.to_token())?;
        for p in &sc.noise {
            write!(out, ",{}", fmt17(*p))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads scenarios written by [`write_scenarios`]. Blank lines and `#` lines are skipped.
pub fn read_scenarios<S: StateText, R: BufRead>(input: R, width: usize) -> Result<Vec<Scenario<S>>, SimError> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| SimError::Parse { line: line_no, reason: e.to_string() })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',');
        let token = fields.next().unwrap_or_default();
        let state = S::from_token(token)
            .ok_or_else(|| SimError::Parse { line: line_no, reason: format!("bad state token {token:?}") })?;
        let noise = fields
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| SimError::Parse { line: line_no, reason: format!("bad noise entry {f:?}: {e}") })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let sc =
            Scenario::new(state, noise, width).map_err(|e| SimError::Parse { line: line_no, reason: e.to_string() })?;
        out.push(sc);
    }
    Ok(out)
}
