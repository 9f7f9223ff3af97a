//! CSK spreading and correlation detection.
//!
//! One chip is one sample (`T_c = 1`), so the rectangular chip pulse is the
//! identity and symbol `l` occupies samples `[l*beta, (l+1)*beta)`.

use rand::Rng;

use crate::chaos::ChaoticSequence;
use crate::error::{Error, Result};

/// Chip period in samples.
pub const CHIP_PERIOD: f64 = 1.0;

/// Antipodal symbol, `+1` or `-1`.
pub type Symbol = i8;

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    symbols: Vec<Symbol>,
    beta: usize,
}

impl SymbolFrame {
    pub fn new(symbols: Vec<Symbol>, beta: usize) -> Result<Self> {
        if beta == 0 {
            return Err(Error::invalid("beta", "spreading factor must be positive"));
        }
        if let Some(bad) = symbols.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::invalid("symbols", format!("{bad} is not +1 or -1")));
        }
        Ok(SymbolFrame { symbols, beta })
    }

    /// Equiprobable random symbols.
    pub fn random<R: Rng + ?Sized>(n: usize, beta: usize, rng: &mut R) -> Result<Self> {
        let symbols = (0..n)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        Self::new(symbols, beta)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn chip_period(&self) -> f64 {
        CHIP_PERIOD
    }

    pub fn chip_len(&self) -> usize {
        self.symbols.len() * self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitEnergy {
    pub value: f64,
    pub symbol_index: usize,
}

fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            context,
            expected,
            actual,
        })
    }
}

/// Transmitted CSK waveform: sample `l*beta + k` is `s_l * x_{l*beta + k}`.
pub fn spread(frame: &SymbolFrame, chips: &ChaoticSequence) -> Result<Vec<f64>> {
    check_len("spread: chips vs symbols * beta", frame.chip_len(), chips.len())?;
    Ok(chips
        .chips
        .chunks_exact(frame.beta)
        .zip(&frame.symbols)
        .flat_map(|(block, &s)| block.iter().map(move |&x| s as f64 * x))
        .collect())
}

pub(crate) fn block_energy(block: &[f64]) -> f64 {
    CHIP_PERIOD * block.iter().map(|x| x * x).sum::<f64>()
}

/// `E_b = T_c * sum of squared chips` over symbol `symbol_index`.
pub fn bit_energy(chips: &ChaoticSequence, symbol_index: usize, beta: usize) -> Result<BitEnergy> {
    if beta == 0 {
        return Err(Error::invalid("beta", "spreading factor must be positive"));
    }
    let n_symbols = chips.len() / beta;
    if symbol_index >= n_symbols {
        return Err(Error::OutOfRange {
            index: symbol_index,
            len: n_symbols,
        });
    }
    let block = &chips.chips[symbol_index * beta..(symbol_index + 1) * beta];
    Ok(BitEnergy {
        value: block_energy(block),
        symbol_index,
    })
}

#[inline]
pub(crate) fn correlate(samples: &[f64], chips: &[f64]) -> f64 {
    samples.iter().zip(chips).map(|(y, x)| y * x).sum()
}

#[inline]
pub(crate) fn decide(statistic: f64) -> Symbol {
    if statistic >= 0.0 {
        1
    } else {
        -1
    }
}

/// Correlates each symbol period with the local chip replica and takes the
/// sign; a zero statistic decides `+1`.
pub fn despread_decide(combined: &[f64], chips: &ChaoticSequence, beta: usize) -> Result<Vec<Symbol>> {
    if beta == 0 {
        return Err(Error::invalid("beta", "spreading factor must be positive"));
    }
    check_len("despread: combined vs chips", chips.len(), combined.len())?;
    if !combined.len().is_multiple_of(beta) {
        return Err(Error::LengthMismatch {
            context: "despread: length not a multiple of beta",
            expected: combined.len() - combined.len() % beta,
            actual: combined.len(),
        });
    }
    Ok(combined
        .chunks_exact(beta)
        .zip(chips.chips.chunks_exact(beta))
        .map(|(y, x)| decide(correlate(y, x)))
        .collect())
}
