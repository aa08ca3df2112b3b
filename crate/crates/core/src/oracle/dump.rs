//! Binary state dumps.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic        8 bytes  "PSTNDUMP"
//! version      u32      1
//! mode count   u32      5
//! mode names   per mode: u8 length, UTF-8 bytes   (L_V L_H R_V R_H M)
//! photon cut   u32
//! phonon cut   u32
//! time         f64
//! branches     u32
//! per branch:  weight f64, amplitude count u64,
//!              amplitudes as (re f32, im f32) pairs in basis order
//! ```
//!
//! Basis order is row-major over the mode order with the phonon index
//! fastest, matching [`ModeLayout::index`](super::layout::ModeLayout::index).

use std::io::{Read, Write};

use num_complex::Complex64;

use super::layout::{ModeLayout, MODE_NAMES};
use super::state::{Branch, TruncatedState};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"PSTNDUMP";
const VERSION: u32 = 1;

pub fn write_dump<W: Write>(out: &mut W, state: &TruncatedState, time: f64) -> Result<()> {
    let layout = state.layout();
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(MODE_NAMES.len() as u32).to_le_bytes())?;
    for name in MODE_NAMES {
        out.write_all(&[name.len() as u8])?;
        out.write_all(name.as_bytes())?;
    }
    out.write_all(&(layout.photon_cutoff() as u32).to_le_bytes())?;
    out.write_all(&(layout.phonon_cutoff() as u32).to_le_bytes())?;
    out.write_all(&time.to_le_bytes())?;
    out.write_all(&(state.branches().len() as u32).to_le_bytes())?;
    for b in state.branches() {
        out.write_all(&b.weight.to_le_bytes())?;
        out.write_all(&(b.amplitudes.len() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(8 * b.amplitudes.len());
        for a in &b.amplitudes {
            buf.extend_from_slice(&(a.re as f32).to_le_bytes());
            buf.extend_from_slice(&(a.im as f32).to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)
        .map_err(|e| Error::Dump(format!("truncated input: {e}")))?;
    Ok(b)
}

/// Reads a dump; returns the state (amplitudes widened from f32) and time.
pub fn read_dump<R: Read>(input: &mut R) -> Result<(TruncatedState, f64)> {
    if &take::<8, _>(input)? != MAGIC {
        return Err(Error::Dump("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(input)?);
    if version != VERSION {
        return Err(Error::Dump(format!("unsupported version {version}")));
    }
    let modes = u32::from_le_bytes(take(input)?) as usize;
    if modes != MODE_NAMES.len() {
        return Err(Error::Dump(format!("expected 5 modes, found {modes}")));
    }
    for expected in MODE_NAMES {
        let [len] = take::<1, _>(input)?;
        let mut name = vec![0u8; len as usize];
        input
            .read_exact(&mut name)
            .map_err(|e| Error::Dump(e.to_string()))?;
        if name != expected.as_bytes() {
            return Err(Error::Dump(format!(
                "mode order mismatch: found {}, expected {expected}",
                String::from_utf8_lossy(&name)
            )));
        }
    }
    let photon = u32::from_le_bytes(take(input)?) as usize;
    let phonon = u32::from_le_bytes(take(input)?) as usize;
    let time = f64::from_le_bytes(take(input)?);
    let layout = ModeLayout::with_cap(photon, phonon, usize::MAX)?;
    let count = u32::from_le_bytes(take(input)?) as usize;
    let mut branches = Vec::with_capacity(count);
    for _ in 0..count {
        let weight = f64::from_le_bytes(take(input)?);
        let n = u64::from_le_bytes(take(input)?) as usize;
        if n != layout.dimension() {
            return Err(Error::Dump(format!(
                "branch has {n} amplitudes, layout needs {}",
                layout.dimension()
            )));
        }
        let mut raw = vec![0u8; 8 * n];
        input
            .read_exact(&mut raw)
            .map_err(|e| Error::Dump(format!("truncated amplitudes: {e}")))?;
        let amplitudes = raw
            .chunks_exact(8)
            .map(|c| {
                let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
                let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
                Complex64::new(re as f64, im as f64)
            })
            .collect();
        branches.push(Branch { weight, amplitudes });
    }
    Ok((TruncatedState::mixture(layout, branches)?, time))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GasFamily, GasSpec, MembraneSpec};
    use crate::oracle::state::prepare_state;

    #[test]
    fn round_trip() {
        let layout = ModeLayout::new(2, 12).unwrap();
        let f = GasFamily::Fock(1);
        let s = prepare_state(
            &GasSpec::vertical(f),
            &GasSpec::new(f, 0.6),
            &MembraneSpec { n_th: 0.2 },
            &layout,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_dump(&mut buf, &s, 1.25).unwrap();
        let (back, t) = read_dump(&mut buf.as_slice()).unwrap();
        assert_eq!(t, 1.25);
        assert_eq!(back.layout(), s.layout());
        assert_eq!(back.branches().len(), s.branches().len());
        for (a, b) in back.branches().iter().zip(s.branches()) {
            assert_eq!(a.weight, b.weight);
            for (x, y) in a.amplitudes.iter().zip(&b.amplitudes) {
                assert!((x - y).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_dump(&mut &b"NOTADUMP\x01\x00\x00\x00"[..]).is_err());
        let layout = ModeLayout::new(1, 0).unwrap();
        let s = TruncatedState::pure(layout, vec![Complex64::new(1.0, 0.0); 16]).unwrap();
        let mut buf = Vec::new();
        write_dump(&mut buf, &s, 0.0).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_dump(&mut buf.as_slice()).is_err());
    }
}
