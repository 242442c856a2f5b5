//! Field serialization: a compact little-endian binary dump and CSV export.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{FrequencyGrid, SpectralError, SpectralField};

pub const FIELD_MAGIC: &[u8; 4] = b"FL2L";
pub const FIELD_VERSION: u32 = 1;

/// Writes `magic, version, n, J, inv_h` followed by `(re, im)` pairs in node order.
pub fn write_field<W: Write>(mut w: W, field: &SpectralField) -> Result<(), SpectralError> {
    let g = field.grid();
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&FIELD_VERSION.to_le_bytes())?;
    w.write_all(&[g.dim() as u8])?;
    w.write_all(&g.radius().to_le_bytes())?;
    w.write_all(&g.inv_spacing().to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * field.values().len());
    for v in field.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field<R: Read>(mut r: R) -> Result<SpectralField, SpectralError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FIELD_MAGIC {
        return Err(SpectralError::Format("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != FIELD_VERSION {
        return Err(SpectralError::Format(format!("unsupported version {version}")));
    }
    let mut n = [0u8; 1];
    r.read_exact(&mut n)?;
    let radius = read_u32(&mut r)?;
    let inv_h = read_u32(&mut r)?;
    let grid = FrequencyGrid::new(n[0] as usize, radius, inv_h)?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 16 * grid.len() {
        return Err(SpectralError::SampleCount { expected: grid.len(), got: bytes.len() / 16 });
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    SpectralField::new(grid, values)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, SpectralError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// CSV with columns `xi_1..xi_n, re, im`, one row per node.
pub fn write_field_csv<W: Write>(w: W, field: &SpectralField) -> Result<(), SpectralError> {
    let g = field.grid();
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (1..=g.dim()).map(|k| format!("xi_{k}")).collect();
    header.push("re".into());
    header.push("im".into());
    out.write_record(&header).map_err(csv_err)?;
    for (i, v) in field.values().iter().enumerate() {
        let xi = g.node(i);
        let mut row: Vec<String> = xi[..g.dim()].iter().map(|x| x.to_string()).collect();
        row.push(v.re.to_string());
        row.push(v.im.to_string());
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> SpectralError {
    SpectralError::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn binary_round_trip() {
        let g = make_grid(2, 1, 0.5).unwrap();
        let u = SpectralField::from_fn(g, |xi| Complex64::new(xi[0], -xi[1] * 3.0));
        let mut buf = Vec::new();
        write_field(&mut buf, &u).unwrap();
        assert_eq!(&buf[..4], b"FL2L");
        assert_eq!(buf.len(), 4 + 4 + 1 + 4 + 4 + 16 * 25);
        assert_eq!(read_field(&buf[..]).unwrap(), u);
    }

    #[test]
    fn binary_rejects_garbage() {
        assert!(matches!(read_field(&b"NOPE\x01\0\0\0"[..]), Err(SpectralError::Format(_))));
        let g = make_grid(1, 1, 1.0).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &SpectralField::ones(g)).unwrap();
        buf.pop();
        assert!(read_field(&buf[..]).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = make_grid(1, 1, 1.0).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &SpectralField::ones(g)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "xi_1,re,im\n-1,1,0\n0,1,0\n1,1,0\n");
    }
}
