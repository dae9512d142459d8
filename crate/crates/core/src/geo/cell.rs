//! S2 cell ids: cube-face projection, quadratic ST transform and Hilbert
//! ordering, using the standard 64-bit layout (3 face bits, 2 bits per
//! level, trailing sentinel bit).

use std::fmt;
use std::str::FromStr;

use super::{GeoError, GeoPoint};

pub const MAX_LEVEL: u8 = 30;

const POS_BITS: u32 = 2 * MAX_LEVEL as u32 + 1;
const FACE_BITS_SHIFT: u32 = POS_BITS;
const MAX_SIZE: u32 = 1 << MAX_LEVEL;

const SWAP_MASK: u8 = 0x01;
const INVERT_MASK: u8 = 0x02;

// Indexed by [orientation][(i_bit << 1) | j_bit].
const IJ_TO_POS: [[u8; 4]; 4] = [[0, 1, 3, 2], [0, 3, 1, 2], [2, 3, 1, 0], [2, 1, 3, 0]];
// Indexed by [orientation][pos].
const POS_TO_IJ: [[u8; 4]; 4] = [[0, 1, 3, 2], [0, 2, 3, 1], [3, 2, 0, 1], [3, 1, 0, 2]];
const POS_TO_ORIENTATION: [u8; 4] = [SWAP_MASK, 0, 0, INVERT_MASK | SWAP_MASK];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId(u64);

impl CellId {
    /// Wraps a raw id, checking face range and the sentinel bit.
    pub fn from_raw(id: u64) -> Option<Self> {
        let cell = CellId(id);
        cell.is_valid().then_some(cell)
    }

    pub fn raw(&self) -> u64 {
        self.0
    }

    pub fn is_valid(&self) -> bool {
        self.face() < 6 && (self.lsb() & 0x1555_5555_5555_5555) != 0
    }

    /// The cell at `level` containing `point`.
    pub fn from_point(point: &GeoPoint, level: u8) -> Result<Self, GeoError> {
        GeoPoint::new(point.lat, point.lng)?;
        if level > MAX_LEVEL {
            return Err(GeoError::InvalidLevel {
                requested: level,
                level: MAX_LEVEL,
            });
        }
        let (face, i, j) = face_ij(point);
        CellId::from_face_ij(face, i, j).ancestor(level)
    }

    pub fn leaf(point: &GeoPoint) -> Result<Self, GeoError> {
        Self::from_point(point, MAX_LEVEL)
    }

    fn from_face_ij(face: u8, i: u32, j: u32) -> Self {
        let mut orientation = face & SWAP_MASK;
        let mut pos: u64 = 0;
        for k in (0..MAX_LEVEL as u32).rev() {
            let ij = ((((i >> k) & 1) << 1) | ((j >> k) & 1)) as usize;
            let quad = IJ_TO_POS[orientation as usize][ij];
            pos |= (quad as u64) << (2 * k);
            orientation ^= POS_TO_ORIENTATION[quad as usize];
        }
        CellId(((face as u64) << FACE_BITS_SHIFT) | (pos << 1) | 1)
    }

    /// Face and leaf-cell (i, j) coordinates of the cell's center leaf.
    pub fn to_face_ij(&self) -> (u8, u32, u32) {
        let face = self.face();
        let mut orientation = face & SWAP_MASK;
        let (mut i, mut j) = (0u32, 0u32);
        for k in (0..MAX_LEVEL as u32).rev() {
            let quad = ((self.0 >> (2 * k + 1)) & 3) as usize;
            let ij = POS_TO_IJ[orientation as usize][quad];
            i |= ((ij >> 1) as u32) << k;
            j |= ((ij & 1) as u32) << k;
            orientation ^= POS_TO_ORIENTATION[quad];
        }
        (face, i, j)
    }

    pub fn face(&self) -> u8 {
        (self.0 >> FACE_BITS_SHIFT) as u8
    }

    fn lsb(&self) -> u64 {
        self.0 & self.0.wrapping_neg()
    }

    fn lsb_for_level(level: u8) -> u64 {
        1u64 << (2 * (MAX_LEVEL - level) as u32)
    }

    pub fn level(&self) -> u8 {
        MAX_LEVEL - (self.0.trailing_zeros() / 2) as u8
    }

    pub fn ancestor(&self, level: u8) -> Result<Self, GeoError> {
        if level > self.level() {
            return Err(GeoError::InvalidLevel {
                requested: level,
                level: self.level(),
            });
        }
        let lsb = Self::lsb_for_level(level);
        Ok(CellId((self.0 & lsb.wrapping_neg()) | lsb))
    }

    pub fn range_min(&self) -> u64 {
        self.0 - (self.lsb() - 1)
    }

    pub fn range_max(&self) -> u64 {
        self.0 + (self.lsb() - 1)
    }

    pub fn contains(&self, other: &CellId) -> bool {
        self.range_min() <= other.0 && other.0 <= self.range_max()
    }

    /// Geometric containment in (face, i, j) space, independent of the
    /// Hilbert encoding of `point`.
    pub fn contains_point(&self, point: &GeoPoint) -> bool {
        let (face, i, j) = face_ij(point);
        let (cell_face, ci, cj) = self.to_face_ij();
        let size = 1u32 << (MAX_LEVEL - self.level());
        let mask = !(size - 1);
        face == cell_face && (i & mask) == (ci & mask) && (j & mask) == (cj & mask)
    }

    /// Lowercase, zero-padded, big-endian hex of the 64-bit id.
    pub fn to_hex(&self) -> String {
        format!("{:016x}", self.0)
    }

    pub fn from_hex(hex: &str) -> Result<Self, GeoError> {
        let bad = || GeoError::InvalidHex(hex.to_string());
        if hex.len() != 16 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(bad());
        }
        let raw = u64::from_str_radix(hex, 16).map_err(|_| bad())?;
        CellId::from_raw(raw).ok_or_else(bad)
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for CellId {
    type Err = GeoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CellId::from_hex(s)
    }
}

fn to_xyz(p: &GeoPoint) -> [f64; 3] {
    let (phi, theta) = (p.lat.to_radians(), p.lng.to_radians());
    let cos_phi = phi.cos();
    [theta.cos() * cos_phi, theta.sin() * cos_phi, phi.sin()]
}

fn largest_abs_component(v: &[f64; 3]) -> usize {
    let a = v.map(f64::abs);
    if a[0] > a[1] {
        if a[0] > a[2] {
            0
        } else {
            2
        }
    } else if a[1] > a[2] {
        1
    } else {
        2
    }
}

fn xyz_to_face_uv(v: &[f64; 3]) -> (u8, f64, f64) {
    let axis = largest_abs_component(v);
    let face = if v[axis] < 0.0 { axis + 3 } else { axis } as u8;
    let [x, y, z] = *v;
    let (u, w) = match face {
        0 => (y / x, z / x),
        1 => (-x / y, z / y),
        2 => (-x / z, -y / z),
        3 => (z / x, y / x),
        4 => (z / y, -x / y),
        _ => (-y / z, -x / z),
    };
    (face, u, w)
}

fn uv_to_st(u: f64) -> f64 {
    if u >= 0.0 {
        0.5 * (1.0 + 3.0 * u).sqrt()
    } else {
        1.0 - 0.5 * (1.0 - 3.0 * u).sqrt()
    }
}

fn st_to_ij(s: f64) -> u32 {
    let scaled = (MAX_SIZE as f64 * s).floor();
    scaled.clamp(0.0, (MAX_SIZE - 1) as f64) as u32
}

fn face_ij(point: &GeoPoint) -> (u8, u32, u32) {
    let (face, u, v) = xyz_to_face_uv(&to_xyz(point));
    (face, st_to_ij(uv_to_st(u)), st_to_ij(uv_to_st(v)))
}
