//! Sweep configuration and its validation rules.

use crate::channel::{JammerKind, JammerPath, JammerSpec};
use crate::error::{Error, Result};
use crate::modem::OfdmGrid;

/// Transceiver scheme under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Rate-2 beamformer with the full-band precoder.
    RrFull,
    /// Rate-2 beamformer with the multi-band precoder (data only on the
    /// protected slots).
    RrMulti,
    /// Conventional Alamouti linear beamformer baseline.
    AlamoutiBf,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::RrFull => "rr-full",
            Scheme::RrMulti => "rr-multi",
            Scheme::AlamoutiBf => "alamouti-bf",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rr-full" => Ok(Scheme::RrFull),
            "rr-multi" => Ok(Scheme::RrMulti),
            "alamouti-bf" => Ok(Scheme::AlamoutiBf),
            other => Err(Error::invalid(format!("unknown scheme '{other}'"))),
        }
    }

    /// Symbol rate in symbols per channel use.
    pub fn rate(&self) -> f64 {
        match self {
            Scheme::RrFull | Scheme::RrMulti => 2.0,
            Scheme::AlamoutiBf => 1.0,
        }
    }

    /// Information symbols per code block.
    pub fn symbols_per_block(&self) -> usize {
        match self {
            Scheme::RrFull | Scheme::RrMulti => 4,
            Scheme::AlamoutiBf => 2,
        }
    }

    /// Constellation giving the scheme its nominal 4 b/s/Hz operating
    /// point: 4-QAM at rate 2, 16-QAM at rate 1.
    pub fn default_constellation(&self) -> usize {
        match self {
            Scheme::RrFull | Scheme::RrMulti => 4,
            Scheme::AlamoutiBf => 16,
        }
    }
}

/// How code blocks are mapped onto the OFDM grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockMapping {
    /// A block occupies a pair of adjacent active subcarriers within one
    /// OFDM symbol; its two epochs are the two subcarriers.
    SfPairs,
    /// A block occupies one subcarrier across two consecutive OFDM
    /// symbols; its two epochs are the two symbols.
    TimeSlots,
}

impl BlockMapping {
    pub fn as_str(&self) -> &'static str {
        match self {
            BlockMapping::SfPairs => "sf-pairs",
            BlockMapping::TimeSlots => "time-slots",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sf-pairs" => Ok(BlockMapping::SfPairs),
            "time-slots" => Ok(BlockMapping::TimeSlots),
            other => Err(Error::invalid(format!("unknown mapping '{other}'"))),
        }
    }

    /// OFDM symbols per frame under this mapping.
    pub fn symbols_per_frame(&self) -> usize {
        match self {
            BlockMapping::SfPairs => 1,
            BlockMapping::TimeSlots => 2,
        }
    }
}

pub const DEFAULT_ES_N0_DB: f64 = 25.0;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_FRAMES_PER_POINT: usize = 1000;
/// Early-stop threshold on accumulated bit errors per sweep point.
pub const DEFAULT_ERROR_CAP: u64 = 500;

/// Everything one sweep needs. Rows come out deterministic in the seed:
/// identical configurations produce byte-identical CSV.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub scheme: Scheme,
    pub jammer_kind: JammerKind,
    pub jammer_path: JammerPath,
    /// SJR grid in dB, ascending.
    pub sjr_points_db: Vec<f64>,
    /// Es/N0 operating point in dB per data symbol (`inf` = noiseless).
    pub es_n0_db: f64,
    pub constellation_order: usize,
    /// Upper bound on frames per sweep point.
    pub frames_per_point: usize,
    /// Rotation angle of the rate-2 code.
    pub phi1: f64,
    pub mapping: BlockMapping,
    pub grid: OfdmGrid,
    pub seed: u64,
    /// Protected slots for `rr-multi` and occupied slots for the
    /// multi-band jammer (the genie assumption ties them together).
    /// Slot indices are 0-based positions in the grid's data-slot order.
    pub jammed_slots: Vec<usize>,
    /// Total precoder power budget; defaults to the data slot count so
    /// the full-band weights are unity.
    pub power_budget: Option<f64>,
    /// Stop a point early once this many bit errors have accumulated;
    /// `None` disables early stopping.
    pub error_cap: Option<u64>,
}

impl SweepConfig {
    /// A sweep over the default -20..30 dB grid in 5 dB steps with the
    /// scheme's nominal constellation.
    pub fn new(scheme: Scheme, jammer_kind: JammerKind) -> Self {
        Self {
            scheme,
            jammer_kind,
            jammer_path: JammerPath::Faded,
            sjr_points_db: sjr_grid(-20.0, 30.0, 5.0),
            es_n0_db: DEFAULT_ES_N0_DB,
            constellation_order: scheme.default_constellation(),
            frames_per_point: DEFAULT_FRAMES_PER_POINT,
            phi1: crate::default_phi1(scheme.default_constellation()),
            mapping: BlockMapping::SfPairs,
            grid: OfdmGrid::ieee80211a(),
            seed: DEFAULT_SEED,
            jammed_slots: Vec::new(),
            power_budget: None,
            error_cap: Some(DEFAULT_ERROR_CAP),
        }
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
            .unwrap_or(self.grid.data_subcarriers() as f64)
    }

    /// Active data slots carrying blocks: all slots for `rr-full` and the
    /// baseline, the protected set for `rr-multi`.
    pub fn active_slots(&self) -> Vec<usize> {
        match self.scheme {
            Scheme::RrMulti => self.jammed_slots.clone(),
            _ => (0..self.grid.data_subcarriers()).collect(),
        }
    }

    /// Code blocks per frame under the configured mapping.
    pub fn blocks_per_frame(&self) -> usize {
        let active = match self.scheme {
            Scheme::RrMulti => self.jammed_slots.len(),
            _ => self.grid.data_subcarriers(),
        };
        match self.mapping {
            BlockMapping::SfPairs => active / 2,
            BlockMapping::TimeSlots => active,
        }
    }

    pub fn bits_per_block(&self) -> usize {
        self.scheme.symbols_per_block() * self.constellation_order.trailing_zeros() as usize
    }

    pub fn bits_per_frame(&self) -> usize {
        self.blocks_per_frame() * self.bits_per_block()
    }

    /// Jammer description at one sweep point.
    pub fn jammer_spec(&self, sjr_db: f64) -> JammerSpec {
        JammerSpec {
            kind: self.jammer_kind,
            path: self.jammer_path,
            sjr_db,
            jammed_slots: self.jammed_slots.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames_per_point == 0 {
            return Err(Error::invalid("frames_per_point must be at least 1"));
        }
        if self.sjr_points_db.is_empty() {
            return Err(Error::invalid("sjr grid must be nonempty"));
        }
        if self
            .sjr_points_db
            .windows(2)
            .any(|w| !(w[1] > w[0]) || !w[0].is_finite())
            || !self.sjr_points_db.last().unwrap().is_finite()
        {
            return Err(Error::invalid("sjr grid must be finite and ascending"));
        }
        if !matches!(self.constellation_order, 4 | 16 | 64) {
            return Err(Error::invalid(format!(
                "constellation order {} not in {{4, 16, 64}}",
                self.constellation_order
            )));
        }
        if !(self.phi1 > 0.0 && self.phi1 < std::f64::consts::FRAC_PI_2) {
            return Err(Error::invalid("phi1 must lie in (0, pi/2)"));
        }
        if !(self.es_n0_db.is_finite() || self.es_n0_db == f64::INFINITY) {
            return Err(Error::invalid("es_n0_db must be finite or +inf"));
        }
        if let Some(p) = self.power_budget {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::invalid("power budget must be positive"));
            }
        }
        let n_data = self.grid.data_subcarriers();
        let needs_slots = matches!(self.scheme, Scheme::RrMulti)
            || self.jammer_kind == JammerKind::MultiBand;
        if needs_slots && self.jammed_slots.is_empty() {
            return Err(Error::invalid(
                "rr-multi and multi-band jamming require --jammed-slots",
            ));
        }
        if self
            .jammed_slots
            .windows(2)
            .any(|w| w[1] <= w[0])
        {
            return Err(Error::invalid(
                "jammed slots must be strictly ascending (0-based, no duplicates)",
            ));
        }
        if self.jammed_slots.iter().any(|&s| s >= n_data) {
            return Err(Error::invalid(format!(
                "jammed slot out of range (grid has {n_data} data slots)"
            )));
        }
        if self.mapping == BlockMapping::SfPairs {
            let active = match self.scheme {
                Scheme::RrMulti => self.jammed_slots.len(),
                _ => n_data,
            };
            if active % 2 != 0 {
                return Err(Error::invalid(
                    "sf-pairs mapping needs an even number of active slots",
                ));
            }
        }
        if self.blocks_per_frame() == 0 {
            return Err(Error::invalid("configuration yields zero blocks per frame"));
        }
        Ok(())
    }
}

/// Inclusive ascending dB grid.
pub fn sjr_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let mut points = Vec::new();
    if step <= 0.0 || stop < start {
        return points;
    }
    let mut v = start;
    let mut k = 0u32;
    while v <= stop + 1e-9 {
        points.push(v);
        k += 1;
        v = start + step * k as f64;
    }
    points
}
