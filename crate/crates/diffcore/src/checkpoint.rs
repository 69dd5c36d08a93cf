//! Binary parameter checkpoints.
//!
//! Little-endian layout: magic `REDN`, format version (u32), parameter count
//! (u32), then per parameter: name length (u16), UTF-8 name, rank (u8), one
//! u32 per extent, and the raw f32 values.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::param::ParamStore;
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 4] = b"REDN";
pub const VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(store: &ParamStore<f32>, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(store.len() as u32).to_le_bytes())?;
    for p in store.iter() {
        let name = p.name.as_bytes();
        let len = u16::try_from(name.len()).map_err(|_| Error::Format(format!("name too long: {}", p.name)))?;
        out.write_all(&len.to_le_bytes())?;
        out.write_all(name)?;
        out.write_all(&[p.value.dims().len() as u8])?;
        for &d in p.value.dims() {
            out.write_all(&(d as u32).to_le_bytes())?;
        }
        let mut raw = Vec::with_capacity(p.value.len() * 4);
        for v in p.value.data() {
            raw.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&raw)?;
    }
    Ok(())
}

fn read_exact<R: Read>(input: &mut R, n: usize, what: &str) -> Result<Vec<u8>> {
    let mut buf = vec![0u8; n];
    input
        .read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated while reading {what}: {e}")))?;
    Ok(buf)
}

fn read_u32<R: Read>(input: &mut R, what: &str) -> Result<u32> {
    let b = read_exact(input, 4, what)?;
    Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<ParamStore<f32>> {
    let magic = read_exact(&mut input, 4, "magic")?;
    if magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut input, "version")?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let count = read_u32(&mut input, "parameter count")?;
    let mut store = ParamStore::new();
    for i in 0..count {
        let len = read_exact(&mut input, 2, "name length")?;
        let len = u16::from_le_bytes([len[0], len[1]]) as usize;
        let name = String::from_utf8(read_exact(&mut input, len, "name")?)
            .map_err(|_| Error::Format(format!("parameter {i}: name is not UTF-8")))?;
        let rank = read_exact(&mut input, 1, "rank")?[0] as usize;
        let dims = (0..rank)
            .map(|_| read_u32(&mut input, "extent").map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        let numel: usize = dims.iter().product();
        let raw = read_exact(&mut input, numel * 4, &name)?;
        let data = raw.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
        let tensor = Tensor::from_vec(&dims, data).map_err(|e| Error::Format(format!("{name}: {e}")))?;
        store.insert(name, tensor).map_err(|e| Error::Format(e.to_string()))?;
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after last parameter".into()));
    }
    Ok(store)
}

pub fn save(store: &ParamStore<f32>, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_checkpoint(store, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<ParamStore<f32>> {
    let file = std::fs::File::open(path)?;
    read_checkpoint(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ParamStore<f32> {
        let mut s = ParamStore::new();
        s.insert("conv.weight", Tensor::from_vec(&[2, 1, 1, 1], vec![1.5, -0.25]).unwrap()).unwrap();
        s.insert("conv.bias", Tensor::from_vec(&[2], vec![f32::MIN_POSITIVE, 3.0e7]).unwrap()).unwrap();
        s
    }

    #[test]
    fn header_layout_is_fixed() {
        let mut buf = Vec::new();
        write_checkpoint(&sample(), &mut buf).unwrap();
        assert_eq!(&buf[..4], b"REDN");
        assert_eq!(&buf[4..8], &1u32.to_le_bytes());
        assert_eq!(&buf[8..12], &2u32.to_le_bytes());
        assert_eq!(&buf[12..14], &11u16.to_le_bytes());
        assert_eq!(&buf[14..25], b"conv.weight");
        assert_eq!(buf[25], 4);
        // header + names + extents + data
        assert_eq!(buf.len(), 12 + (2 + 11 + 1 + 16 + 8) + (2 + 9 + 1 + 4 + 8));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut buf = Vec::new();
        write_checkpoint(&sample(), &mut buf).unwrap();
        let back = read_checkpoint(buf.as_slice()).unwrap();
        let mut again = Vec::new();
        write_checkpoint(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn rejects_corruption() {
        let mut buf = Vec::new();
        write_checkpoint(&sample(), &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_checkpoint(bad.as_slice()), Err(Error::Format(_))));
        assert!(read_checkpoint(&buf[..buf.len() - 1]).is_err());
        let mut long = buf.clone();
        long.push(0);
        assert!(read_checkpoint(long.as_slice()).is_err());
    }
}
