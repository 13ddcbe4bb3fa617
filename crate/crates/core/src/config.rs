//! Infection configurations over a finite region, with portable text and
//! binary serialization.
//!
//! Internally bit 1 means infected. The on-disk text format uses `o` for
//! infected and `.` for healthy; the binary format records which convention
//! its payload bits use, so round trips through either format are the
//! identity.

use std::io::{self, Read, Write};
use std::sync::Arc;

use thiserror::Error;

use crate::lattice::{v2, Vec2};
use crate::region::{Region, RegionError, SiteIndex};

/// An infection state over the sites of a finite region.
#[derive(Clone, Debug)]
pub struct Configuration {
    index: Arc<SiteIndex>,
    bits: Vec<u64>,
    infected_count: usize,
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.index.region() == other.index.region() && self.bits == other.bits
    }
}
impl Eq for Configuration {}

impl Configuration {
    pub fn empty(region: Region) -> Result<Configuration, RegionError> {
        let index = Arc::new(SiteIndex::new(region)?);
        Ok(Configuration::empty_indexed(index))
    }

    pub fn empty_indexed(index: Arc<SiteIndex>) -> Configuration {
        let words = index.len().div_ceil(64);
        Configuration {
            index,
            bits: vec![0; words],
            infected_count: 0,
        }
    }

    pub fn fully_infected(region: Region) -> Result<Configuration, RegionError> {
        let mut c = Configuration::empty(region)?;
        for i in 0..c.index.len() as u32 {
            c.set_idx(i, true);
        }
        Ok(c)
    }

    pub fn from_infected(
        region: Region,
        infected: impl IntoIterator<Item = Vec2>,
    ) -> Result<Configuration, RegionError> {
        let mut c = Configuration::empty(region)?;
        for p in infected {
            c.set(p, true);
        }
        Ok(c)
    }

    pub fn region(&self) -> &Region {
        self.index.region()
    }

    pub fn site_index(&self) -> &Arc<SiteIndex> {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn infected_count(&self) -> usize {
        self.infected_count
    }

    pub fn is_infected_idx(&self, idx: u32) -> bool {
        let w = (idx / 64) as usize;
        (self.bits[w] >> (idx % 64)) & 1 == 1
    }

    /// Infection state of a site; `None` outside the region.
    pub fn is_infected(&self, p: Vec2) -> Option<bool> {
        self.index.index_of(p).map(|i| self.is_infected_idx(i))
    }

    pub fn set_idx(&mut self, idx: u32, infected: bool) {
        let w = (idx / 64) as usize;
        let mask = 1u64 << (idx % 64);
        let was = self.bits[w] & mask != 0;
        if infected {
            self.bits[w] |= mask;
        } else {
            self.bits[w] &= !mask;
        }
        match (was, infected) {
            (false, true) => self.infected_count += 1,
            (true, false) => self.infected_count -= 1,
            _ => {}
        }
    }

    /// Sets a site's state; panics outside the region.
    pub fn set(&mut self, p: Vec2, infected: bool) {
        let idx = self
            .index
            .index_of(p)
            .unwrap_or_else(|| panic!("site {p:?} outside region"));
        self.set_idx(idx, infected);
    }

    pub fn infected_sites(&self) -> Vec<Vec2> {
        (0..self.index.len() as u32)
            .filter(|&i| self.is_infected_idx(i))
            .map(|i| self.index.site(i))
            .collect()
    }

    /// Is `self` contained in `other` site-wise (both on the same region)?
    pub fn subset_of(&self, other: &Configuration) -> bool {
        debug_assert_eq!(self.index.region(), other.index.region());
        self.bits
            .iter()
            .zip(&other.bits)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn bits(&self) -> &[u64] {
        &self.bits
    }
}

#[derive(Error, Debug)]
pub enum ConfigIoError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("bad header: {0}")]
    Header(String),
    #[error("line {0}: row has wrong width")]
    RowWidth(usize),
    #[error("line {line}: unexpected cell character {ch:?}")]
    BadCell { line: usize, ch: char },
    #[error("region: {0}")]
    Region(#[from] RegionError),
}

/// Writes the text grid format: header `x0 y0 w h`, then one row per line
/// starting at `y0`, `o` infected, `.` healthy.
pub fn write_text_grid(cfg: &Configuration, out: &mut impl Write) -> Result<(), ConfigIoError> {
    let (x0, y0, w, h) = match *cfg.region() {
        Region::Box { x0, y0, w, h } => (x0, y0, w, h),
        Region::Torus { w, h } => (0, 0, w, h),
        _ => {
            return Err(ConfigIoError::Header(
                "text grid supports box and torus regions only".into(),
            ))
        }
    };
    writeln!(out, "{x0} {y0} {w} {h}")?;
    let mut row = String::with_capacity(w as usize);
    for y in y0..y0 + h {
        row.clear();
        for x in x0..x0 + w {
            row.push(if cfg.is_infected(v2(x, y)).unwrap() { 'o' } else { '.' });
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// Reads the text grid format into a box-region configuration.
pub fn read_text_grid(input: &mut impl Read) -> Result<Configuration, ConfigIoError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| ConfigIoError::Header("missing header".into()))?;
    let nums: Vec<i64> = header
        .split_whitespace()
        .map(|t| t.parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|e| ConfigIoError::Header(e.to_string()))?;
    let [x0, y0, w, h] = nums[..] else {
        return Err(ConfigIoError::Header(format!(
            "expected 4 integers, got {}",
            nums.len()
        )));
    };
    let mut cfg = Configuration::empty(Region::Box { x0, y0, w, h })?;
    for (dy, line) in lines.enumerate() {
        let y = y0 + dy as i64;
        if dy as i64 >= h {
            if line.trim().is_empty() {
                continue;
            }
            return Err(ConfigIoError::RowWidth(dy + 2));
        }
        if line.chars().count() != w as usize {
            return Err(ConfigIoError::RowWidth(dy + 2));
        }
        for (dx, ch) in line.chars().enumerate() {
            match ch {
                'o' => cfg.set(v2(x0 + dx as i64, y), true),
                '.' => {}
                _ => return Err(ConfigIoError::BadCell { line: dy + 2, ch }),
            }
        }
    }
    Ok(cfg)
}

const BITMAP_MAGIC: [u8; 4] = *b"KLB1";
/// Flag value: payload bit 1 means infected.
pub const CONVENTION_INFECTED_ONE: u32 = 1;
/// Flag value: payload bit 0 means infected (occupation-variable layout).
pub const CONVENTION_INFECTED_ZERO: u32 = 0;

/// Writes the binary bitmap format: 16-byte header (magic, width, height,
/// convention flag), little-endian, then row-major payload bits packed in
/// little-endian u64 words. Origin is implicit at (0, 0).
pub fn write_bitmap(
    cfg: &Configuration,
    convention: u32,
    out: &mut impl Write,
) -> Result<(), ConfigIoError> {
    let (w, h) = match *cfg.region() {
        Region::Box { x0: 0, y0: 0, w, h } => (w, h),
        Region::Torus { w, h } => (w, h),
        _ => {
            return Err(ConfigIoError::Header(
                "bitmap supports origin boxes and tori only".into(),
            ))
        }
    };
    out.write_all(&BITMAP_MAGIC)?;
    out.write_all(&(w as u32).to_le_bytes())?;
    out.write_all(&(h as u32).to_le_bytes())?;
    out.write_all(&convention.to_le_bytes())?;
    let mut words = cfg.bits().to_vec();
    if convention == CONVENTION_INFECTED_ZERO {
        let n = cfg.len();
        for (i, word) in words.iter_mut().enumerate() {
            *word = !*word;
            // clear padding past the last site
            if (i + 1) * 64 > n {
                let valid = n - i * 64;
                if valid < 64 {
                    *word &= (1u64 << valid) - 1;
                }
            }
        }
    }
    for word in words {
        out.write_all(&word.to_le_bytes())?;
    }
    Ok(())
}

/// Reads the binary bitmap format into an origin-box configuration.
pub fn read_bitmap(input: &mut impl Read) -> Result<Configuration, ConfigIoError> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if header[0..4] != BITMAP_MAGIC {
        return Err(ConfigIoError::Header("bad magic".into()));
    }
    let w = u32::from_le_bytes(header[4..8].try_into().unwrap()) as i64;
    let h = u32::from_le_bytes(header[8..12].try_into().unwrap()) as i64;
    let convention = u32::from_le_bytes(header[12..16].try_into().unwrap());
    let mut cfg = Configuration::empty(Region::Box { x0: 0, y0: 0, w, h })?;
    let words = cfg.len().div_ceil(64);
    let mut buf = [0u8; 8];
    for i in 0..words {
        input.read_exact(&mut buf)?;
        let mut word = u64::from_le_bytes(buf);
        if convention == CONVENTION_INFECTED_ZERO {
            word = !word;
        }
        let base = (i * 64) as u32;
        for b in 0..64u32 {
            if (base + b) as usize >= cfg.len() {
                break;
            }
            if (word >> b) & 1 == 1 {
                cfg.set_idx(base + b, true);
            }
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = Configuration::empty(Region::Box { x0: -1, y0: -1, w: 3, h: 2 }).unwrap();
        cfg.set(v2(0, 0), true);
        cfg.set(v2(-1, -1), true);
        let mut buf = Vec::new();
        write_text_grid(&cfg, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "-1 -1 3 2\no..\n.o.\n");
        let back = read_text_grid(&mut buf.as_slice()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn bitmap_round_trip_both_conventions() {
        let mut cfg = Configuration::empty(Region::Box { x0: 0, y0: 0, w: 9, h: 7 }).unwrap();
        for (i, p) in cfg.site_index().sites().to_vec().iter().enumerate() {
            if i % 3 == 0 {
                cfg.set(*p, true);
            }
        }
        for convention in [CONVENTION_INFECTED_ONE, CONVENTION_INFECTED_ZERO] {
            let mut buf = Vec::new();
            write_bitmap(&cfg, convention, &mut buf).unwrap();
            assert_eq!(buf.len(), 16 + 8 * cfg.len().div_ceil(64));
            let back = read_bitmap(&mut buf.as_slice()).unwrap();
            assert_eq!(back.infected_sites(), cfg.infected_sites());
        }
    }

    #[test]
    fn subset_and_counts() {
        let region = Region::Box { x0: 0, y0: 0, w: 4, h: 4 };
        let a = Configuration::from_infected(region.clone(), [v2(1, 1)]).unwrap();
        let b = Configuration::from_infected(region, [v2(1, 1), v2(2, 2)]).unwrap();
        assert!(a.subset_of(&b));
        assert!(!b.subset_of(&a));
        assert_eq!(b.infected_count(), 2);
    }
}
