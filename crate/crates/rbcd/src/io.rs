//! File formats: 8-bit PGM previews, exact raw f64 arrays with JSON sidecar
//! headers, Matrix Market payloads, operator descriptors, and the errors.csv
//! trajectory table.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::operators::{BlockOperator, CsrMatrix, DenseMatrix, MaskOperator, TensorProduct};
use crate::solver::HistoryPoint;

/// Min/max used to scale an image into 8-bit PGM range; recorded so the
/// preview stays attributable to the exact data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgmScale {
    pub min: f64,
    pub max: f64,
}

/// Writes a binary (P5) PGM preview, min-max scaled to 0..255.
pub fn write_pgm(path: &Path, img: &Image) -> Result<PgmScale> {
    let (min, max) = img.min_max();
    let span = max - min;
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P5\n{} {}\n255\n", img.cols, img.rows)?;
    let bytes: Vec<u8> = img
        .data
        .iter()
        .map(|&v| {
            if span > 0.0 {
                ((v - min) / span * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect();
    out.write_all(&bytes)?;
    Ok(PgmScale { min, max })
}

/// Reads a binary (P5) PGM; returns the image (values 0..maxval) and maxval.
pub fn read_pgm(path: &Path) -> Result<(Image, u16)> {
    let bytes = fs::read(path)?;
    let mut pos = 0usize;
    let mut token = |bytes: &[u8]| -> Result<String> {
        // Skip whitespace and comments.
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Parse("unexpected end of PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };

    let magic = token(&bytes)?;
    if magic != "P5" {
        return Err(Error::Parse(format!("unsupported PGM magic {magic}")));
    }
    let cols: usize = token(&bytes)?.parse().map_err(|e| Error::Parse(format!("{e}")))?;
    let rows: usize = token(&bytes)?.parse().map_err(|e| Error::Parse(format!("{e}")))?;
    let maxval: u16 = token(&bytes)?.parse().map_err(|e| Error::Parse(format!("{e}")))?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Parse(format!("unsupported PGM maxval {maxval}")));
    }
    pos += 1; // single whitespace after maxval
    let need = rows * cols;
    if bytes.len() < pos + need {
        return Err(Error::Parse("PGM pixel data truncated".into()));
    }
    let data = bytes[pos..pos + need].iter().map(|&b| b as f64).collect();
    Ok((Image::new(rows, cols, data), maxval))
}

/// JSON sidecar for a raw little-endian f64 array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawHeader {
    pub dims: Vec<usize>,
    pub dtype: String,
    pub byte_order: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pgm_scale: Option<PgmScale>,
}

/// Writes `data` as raw little-endian f64 plus `<path>.json` sidecar.
pub fn write_raw_f64(path: &Path, dims: &[usize], data: &[f64]) -> Result<()> {
    assert_eq!(dims.iter().product::<usize>(), data.len());
    let mut out = BufWriter::new(File::create(path)?);
    for v in data {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    let header = RawHeader {
        dims: dims.to_vec(),
        dtype: "f64".into(),
        byte_order: "little".into(),
        pgm_scale: None,
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

/// Reads a raw f64 array and its sidecar header.
pub fn read_raw_f64(path: &Path) -> Result<(Vec<usize>, Vec<f64>)> {
    let header: RawHeader = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    if header.dtype != "f64" || header.byte_order != "little" {
        return Err(Error::Parse(format!(
            "unsupported raw format {}/{}",
            header.dtype, header.byte_order
        )));
    }
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let count: usize = header.dims.iter().product();
    if bytes.len() != count * 8 {
        return Err(Error::Parse(format!(
            "raw payload has {} bytes, header expects {}",
            bytes.len(),
            count * 8
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((header.dims, data))
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

/// A Matrix Market matrix in triplet form.
#[derive(Debug, Clone)]
pub struct MmMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
    pub dense: bool,
}

impl MmMatrix {
    pub fn to_dense(&self) -> DenseMatrix {
        let mut data = vec![0.0; self.rows * self.cols];
        for &(r, c, v) in &self.entries {
            data[r * self.cols + c] = v;
        }
        DenseMatrix::new(self.rows, self.cols, data)
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let mut per_row: Vec<Vec<(u32, f64)>> = vec![Vec::new(); self.rows];
        for &(r, c, v) in &self.entries {
            per_row[r].push((c as u32, v));
        }
        for row in &mut per_row {
            row.sort_by_key(|e| e.0);
        }
        CsrMatrix::from_rows(self.rows, self.cols, per_row)
    }
}

/// Reads Matrix Market coordinate (real/integer/pattern) and array (real)
/// formats, general symmetry only.
pub fn read_matrix_market(path: &Path) -> Result<MmMatrix> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();

    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix market file".into()))??;
    let lower = header.to_lowercase();
    let parts: Vec<&str> = lower.split_whitespace().collect();
    if parts.len() < 4 || parts[0] != "%%matrixmarket" || parts[1] != "matrix" {
        return Err(Error::Parse(format!("bad matrix market header: {header}")));
    }
    let coordinate = match parts[2] {
        "coordinate" => true,
        "array" => false,
        other => return Err(Error::Parse(format!("unsupported layout {other}"))),
    };
    let field = parts[3];
    if parts.len() >= 5 && parts[4] != "general" {
        return Err(Error::Parse(format!("unsupported symmetry {}", parts[4])));
    }

    let mut size_line = None;
    for line in lines.by_ref() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        size_line = Some(t.to_string());
        break;
    }
    let size_line = size_line.ok_or_else(|| Error::Parse("missing size line".into()))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse().map_err(|e| Error::Parse(format!("{e}"))))
        .collect::<Result<_>>()?;

    if coordinate {
        if dims.len() != 3 {
            return Err(Error::Parse("coordinate size line needs rows cols nnz".into()));
        }
        let (rows, cols, nnz) = (dims[0], dims[1], dims[2]);
        let mut entries = Vec::with_capacity(nnz);
        for line in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            let toks: Vec<&str> = t.split_whitespace().collect();
            let r: usize = toks[0].parse().map_err(|e| Error::Parse(format!("{e}")))?;
            let c: usize = toks[1].parse().map_err(|e| Error::Parse(format!("{e}")))?;
            let v = match field {
                "pattern" => 1.0,
                _ => {
                    if toks.len() < 3 {
                        return Err(Error::Parse(format!("missing value in: {t}")));
                    }
                    toks[2].parse().map_err(|e| Error::Parse(format!("{e}")))?
                }
            };
            if r == 0 || c == 0 || r > rows || c > cols {
                return Err(Error::Parse(format!("index out of bounds in: {t}")));
            }
            entries.push((r - 1, c - 1, v));
        }
        if entries.len() != nnz {
            return Err(Error::Parse(format!(
                "expected {nnz} entries, found {}",
                entries.len()
            )));
        }
        Ok(MmMatrix { rows, cols, entries, dense: false })
    } else {
        if dims.len() != 2 {
            return Err(Error::Parse("array size line needs rows cols".into()));
        }
        let (rows, cols) = (dims[0], dims[1]);
        let mut values = Vec::with_capacity(rows * cols);
        for line in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            for tok in t.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|e| Error::Parse(format!("{e}")))?);
            }
        }
        if values.len() != rows * cols {
            return Err(Error::Parse(format!(
                "array payload has {} values, expected {}",
                values.len(),
                rows * cols
            )));
        }
        // Array format is column-major.
        let mut entries = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                entries.push((r, c, values[c * rows + r]));
            }
        }
        Ok(MmMatrix { rows, cols, entries, dense: true })
    }
}

/// Writes coordinate-real Matrix Market from a dense matrix (zeros skipped).
pub fn write_matrix_market_dense(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let entries: Vec<(usize, usize, f64)> = (0..m.rows)
        .flat_map(|r| (0..m.cols).map(move |c| (r, c)))
        .filter_map(|(r, c)| {
            let v = m.get(r, c);
            (v != 0.0).then_some((r, c, v))
        })
        .collect();
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", m.rows, m.cols, entries.len())?;
    for (r, c, v) in entries {
        writeln!(out, "{} {} {:.17e}", r + 1, c + 1, v)?;
    }
    Ok(())
}

/// JSON descriptor for loading operators from files. Payload paths are
/// resolved relative to the descriptor's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OperatorDescriptor {
    Dense { data_dim: usize, block_dims: Vec<usize>, payloads: Vec<String> },
    Sparse { data_dim: usize, block_dims: Vec<usize>, payloads: Vec<String> },
    TensorProduct { v: String, k: String },
    Mask { frames: usize, rows: usize, cols: usize, payload: String },
}

/// Loads a [`BlockOperator`] from a JSON descriptor file.
pub fn load_operator_descriptor(path: &Path) -> Result<BlockOperator> {
    let desc: OperatorDescriptor = serde_json::from_str(&fs::read_to_string(path)?)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &str| base.join(p);
    match desc {
        OperatorDescriptor::Dense { data_dim, block_dims, payloads } => {
            if payloads.len() != block_dims.len() {
                return Err(Error::Parse("one payload per block required".into()));
            }
            let mut mats = Vec::new();
            for (p, &dim) in payloads.iter().zip(&block_dims) {
                let mm = read_matrix_market(&resolve(p))?;
                if mm.rows != data_dim || mm.cols != dim {
                    return Err(Error::Parse(format!(
                        "payload {p} is {}x{}, descriptor says {data_dim}x{dim}",
                        mm.rows, mm.cols
                    )));
                }
                mats.push(mm.to_dense());
            }
            Ok(BlockOperator::from_dense(mats))
        }
        OperatorDescriptor::Sparse { data_dim, block_dims, payloads } => {
            if payloads.len() != block_dims.len() {
                return Err(Error::Parse("one payload per block required".into()));
            }
            let mut mats = Vec::new();
            for (p, &dim) in payloads.iter().zip(&block_dims) {
                let mm = read_matrix_market(&resolve(p))?;
                if mm.rows != data_dim || mm.cols != dim {
                    return Err(Error::Parse(format!(
                        "payload {p} is {}x{}, descriptor says {data_dim}x{dim}",
                        mm.rows, mm.cols
                    )));
                }
                mats.push(mm.to_csr());
            }
            Ok(BlockOperator::from_sparse(mats))
        }
        OperatorDescriptor::TensorProduct { v, k } => {
            let vm = read_matrix_market(&resolve(&v))?.to_dense();
            let km = read_matrix_market(&resolve(&k))?.to_dense();
            Ok(BlockOperator::from_tensor_product(TensorProduct::new(vm, km)))
        }
        OperatorDescriptor::Mask { frames, rows, cols, payload } => {
            // Payload is frames x (rows*cols) in coordinate-pattern form.
            let mm = read_matrix_market(&resolve(&payload))?;
            if mm.rows != frames || mm.cols != rows * cols {
                return Err(Error::Parse(format!(
                    "mask payload is {}x{}, descriptor says {frames}x{}",
                    mm.rows,
                    mm.cols,
                    rows * cols
                )));
            }
            let mut masks = vec![vec![0u8; rows * cols]; frames];
            for &(f, j, v) in &mm.entries {
                masks[f][j] = if v != 0.0 { 1 } else { 0 };
            }
            Ok(BlockOperator::from_masks(MaskOperator::new(masks)))
        }
    }
}

/// Writes the trajectory table with the fixed header `k,residual,rel_sq_error`.
pub fn write_history_csv(path: &Path, history: &[HistoryPoint]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "k,residual,rel_sq_error")?;
    for h in history {
        match h.rel_sq_error {
            Some(e) => writeln!(out, "{},{},{}", h.k, h.residual_norm, e)?,
            None => writeln!(out, "{},{},", h.k, h.residual_norm)?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmpdir(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("rbcd-io-{name}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn pgm_round_trip() {
        let dir = tmpdir("pgm");
        let img = Image::new(2, 3, vec![0.0, 0.5, 1.0, 0.25, 0.75, 1.0]);
        let path = dir.join("a.pgm");
        let scale = write_pgm(&path, &img).unwrap();
        assert_eq!(scale, PgmScale { min: 0.0, max: 1.0 });
        let (back, maxval) = read_pgm(&path).unwrap();
        assert_eq!(maxval, 255);
        assert_eq!(back.rows, 2);
        assert_eq!(back.cols, 3);
        assert_eq!(back.data[0], 0.0);
        assert_eq!(back.data[2], 255.0);
    }

    #[test]
    fn raw_f64_round_trip_is_exact() {
        let dir = tmpdir("raw");
        let path = dir.join("x.f64");
        let data = vec![std::f64::consts::PI, -1.0, 1e-300, 7.25];
        write_raw_f64(&path, &[2, 2], &data).unwrap();
        let (dims, back) = read_raw_f64(&path).unwrap();
        assert_eq!(dims, vec![2, 2]);
        assert_eq!(back, data);
    }

    #[test]
    fn matrix_market_coordinate_and_array() {
        let dir = tmpdir("mm");
        let coord = dir.join("c.mtx");
        fs::write(
            &coord,
            "%%MatrixMarket matrix coordinate real general\n% comment\n2 3 2\n1 1 1.5\n2 3 -2.0\n",
        )
        .unwrap();
        let mm = read_matrix_market(&coord).unwrap();
        assert_eq!((mm.rows, mm.cols), (2, 3));
        let d = mm.to_dense();
        assert_eq!(d.get(0, 0), 1.5);
        assert_eq!(d.get(1, 2), -2.0);
        assert_eq!(d.get(0, 1), 0.0);

        let arr = dir.join("a.mtx");
        fs::write(
            &arr,
            "%%MatrixMarket matrix array real general\n2 2\n1.0\n2.0\n3.0\n4.0\n",
        )
        .unwrap();
        let mm = read_matrix_market(&arr).unwrap();
        let d = mm.to_dense();
        // Column-major payload: (1,2; 3,4) columns are (1,2) and (3,4).
        assert_eq!(d.get(0, 0), 1.0);
        assert_eq!(d.get(1, 0), 2.0);
        assert_eq!(d.get(0, 1), 3.0);
        assert_eq!(d.get(1, 1), 4.0);

        let pat = dir.join("p.mtx");
        fs::write(&pat, "%%MatrixMarket matrix coordinate pattern general\n2 2 1\n2 1\n").unwrap();
        let mm = read_matrix_market(&pat).unwrap();
        assert_eq!(mm.entries, vec![(1, 0, 1.0)]);
    }

    #[test]
    fn dense_descriptor_round_trip() {
        let dir = tmpdir("desc");
        let m1 = DenseMatrix::new(2, 1, vec![1.0, 0.0]);
        let m2 = DenseMatrix::new(2, 2, vec![0.0, 2.0, 3.0, 0.0]);
        write_matrix_market_dense(&dir.join("b0.mtx"), &m1).unwrap();
        write_matrix_market_dense(&dir.join("b1.mtx"), &m2).unwrap();
        let desc = OperatorDescriptor::Dense {
            data_dim: 2,
            block_dims: vec![1, 2],
            payloads: vec!["b0.mtx".into(), "b1.mtx".into()],
        };
        let path = dir.join("op.json");
        fs::write(&path, serde_json::to_string_pretty(&desc).unwrap()).unwrap();
        let op = load_operator_descriptor(&path).unwrap();
        assert_eq!(op.block_count(), 2);
        assert_eq!(op.data_dim(), 2);
        let x = crate::block::BlockVector::new(vec![vec![1.0], vec![1.0, 1.0]]);
        let y = op.apply(&x).unwrap();
        assert_eq!(y.values(), &[3.0, 3.0]);
    }

    #[test]
    fn history_csv_format() {
        let dir = tmpdir("csv");
        let path = dir.join("errors.csv");
        write_history_csv(
            &path,
            &[
                HistoryPoint { k: 0, residual_norm: 5.0, rel_sq_error: Some(1.0) },
                HistoryPoint { k: 1, residual_norm: 2.5, rel_sq_error: None },
            ],
        )
        .unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "k,residual,rel_sq_error\n0,5,1\n1,2.5,\n");
    }
}
