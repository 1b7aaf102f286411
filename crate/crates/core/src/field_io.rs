//! Binary field snapshots.
//!
//! Layout of a snapshot file:
//!
//! | bytes | content                                             |
//! |-------|-----------------------------------------------------|
//! | 6     | magic `SSFLD1`                                      |
//! | 4     | dimension `n`, little-endian u32                    |
//! | 4     | points per axis `N`, little-endian u32             |
//! | 8     | half-width `L`, little-endian f64                   |
//! | 1     | space flag: 0 physical, 1 frequency                 |
//! | rest  | `N^n` samples as interleaved `(re, im)` f64 pairs, |
//! |       | row-major with the last axis fastest                |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Space};

const MAGIC: &[u8; 6] = b"SSFLD1";

/// Writes a field snapshot to `path`, replacing any existing file.
pub fn save_field(field: &Field, path: &Path) -> Result<()> {
    let grid = field.grid();
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    w.write_all(&(grid.size() as u32).to_le_bytes())?;
    w.write_all(&grid.half_width().to_le_bytes())?;
    let flag: u8 = match field.space() {
        Space::Physical => 0,
        Space::Frequency => 1,
    };
    w.write_all(&[flag])?;
    for v in field.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a field snapshot written by [`save_field`].
///
/// # Errors
///
/// [`Error::BadFieldFile`] on a bad magic, malformed header, truncated
/// payload, or trailing bytes.  Header values go through [`Grid::new`], so a
/// file describing an unsupported grid is rejected as well.
pub fn load_field(path: &Path) -> Result<Field> {
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 6];
    read_exact(&mut r, &mut magic, "magic")?;
    if &magic != MAGIC {
        return Err(Error::BadFieldFile {
            what: format!("magic {:?} is not SSFLD1", magic),
        });
    }

    let mut u32_buf = [0u8; 4];
    read_exact(&mut r, &mut u32_buf, "dimension")?;
    let dim = u32::from_le_bytes(u32_buf) as usize;
    read_exact(&mut r, &mut u32_buf, "point count")?;
    let size = u32::from_le_bytes(u32_buf) as usize;

    let mut f64_buf = [0u8; 8];
    read_exact(&mut r, &mut f64_buf, "half-width")?;
    let half_width = f64::from_le_bytes(f64_buf);

    let mut flag = [0u8; 1];
    read_exact(&mut r, &mut flag, "space flag")?;
    let space = match flag[0] {
        0 => Space::Physical,
        1 => Space::Frequency,
        other => {
            return Err(Error::BadFieldFile {
                what: format!("space flag {other} is neither 0 nor 1"),
            })
        }
    };

    let grid = Grid::new(dim, size, half_width).map_err(|e| Error::BadFieldFile {
        what: format!("header describes an unusable grid: {e}"),
    })?;

    let mut values = Vec::with_capacity(grid.point_count());
    for _ in 0..grid.point_count() {
        read_exact(&mut r, &mut f64_buf, "sample")?;
        let re = f64::from_le_bytes(f64_buf);
        read_exact(&mut r, &mut f64_buf, "sample")?;
        let im = f64::from_le_bytes(f64_buf);
        values.push(Complex64::new(re, im));
    }

    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(Error::BadFieldFile {
            what: "trailing bytes after the sample payload".into(),
        });
    }

    Field::from_values(grid, space, values)
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|_| Error::BadFieldFile {
        what: format!("truncated while reading {what}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scratch(name: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("statwave_io_{}_{name}", std::process::id()));
        p
    }

    #[test]
    fn roundtrip_preserves_everything() {
        let grid = Grid::new(2, 16, 3.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut f = Field::zeros(grid, Space::Frequency);
        for v in f.values_mut() {
            *v = Complex64::new(rng.random::<f64>(), rng.random::<f64>());
        }
        let path = scratch("roundtrip.ssfld");
        save_field(&f, &path).unwrap();
        let back = load_field(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(back.grid(), grid);
        assert_eq!(back.space(), Space::Frequency);
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn truncated_file_is_rejected() {
        let grid = Grid::new(2, 16, 1.0).unwrap();
        let f = Field::zeros(grid, Space::Physical);
        let path = scratch("truncated.ssfld");
        save_field(&f, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 7]).unwrap();
        let err = load_field(&path).unwrap_err();
        std::fs::remove_file(&path).ok();
        assert!(matches!(err, Error::BadFieldFile { .. }));
    }

    #[test]
    fn bad_magic_and_bad_flag_are_rejected() {
        let grid = Grid::new(2, 16, 1.0).unwrap();
        let f = Field::zeros(grid, Space::Physical);
        let path = scratch("header.ssfld");

        save_field(&f, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_field(&path),
            Err(Error::BadFieldFile { .. })
        ));

        save_field(&f, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[22] = 9;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_field(&path),
            Err(Error::BadFieldFile { .. })
        ));

        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn trailing_bytes_are_rejected() {
        let grid = Grid::new(2, 16, 1.0).unwrap();
        let f = Field::zeros(grid, Space::Physical);
        let path = scratch("trailing.ssfld");
        save_field(&f, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.push(0);
        std::fs::write(&path, &bytes).unwrap();
        let err = load_field(&path).unwrap_err();
        std::fs::remove_file(&path).ok();
        assert!(matches!(err, Error::BadFieldFile { .. }));
    }
}
