//! Instance containers.
//!
//! The binary form is little-endian:
//!
//! ```text
//! magic  "RGTINST\0"                     8 bytes
//! version u32                            (currently 1)
//! d, n, n_v, T, seed                     u64 each
//! header_len u32, header                 JSON generator descriptor or `null`
//! per task:
//!   flags u8                             bit 0 w*, bit 1 noise, bit 2 validation noise
//!   X (d x n), y (n), X_v (d x n_v), y_v (n_v)
//!   [w* (d)] [noise (n)] [validation noise (n_v)]
//! ```
//!
//! Matrices are stored row-major as f64. Reading back reproduces every bit.
//! The JSON form carries the same content with matrices as arrays of rows.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::tasks::{Generator, ProblemInstance, Task};

const MAGIC: &[u8; 8] = b"RGTINST\0";
const VERSION: u32 = 1;

fn put_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_f64s<W: Write, I: IntoIterator<Item = f64>>(w: &mut W, vals: I) -> Result<()> {
    for v in vals {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn row_major(m: &Matrix) -> impl Iterator<Item = f64> + '_ {
    (0..m.nrows()).flat_map(move |i| (0..m.ncols()).map(move |j| m[(i, j)]))
}

pub fn write_binary<W: Write>(inst: &ProblemInstance, w: &mut W) -> Result<()> {
    w.write_all(MAGIC)?;
    put_u32(w, VERSION)?;
    for v in [inst.d, inst.n, inst.n_v, inst.t()] {
        put_u64(w, v as u64)?;
    }
    put_u64(w, inst.seed)?;
    let header = serde_json::to_vec(&inst.generator)?;
    put_u32(w, header.len() as u32)?;
    w.write_all(&header)?;
    for t in &inst.tasks {
        let flags = (t.w_star.is_some() as u8) | ((t.noise.is_some() as u8) << 1) | ((t.noise_v.is_some() as u8) << 2);
        w.write_all(&[flags])?;
        put_f64s(w, row_major(&t.x))?;
        put_f64s(w, t.y.iter().copied())?;
        put_f64s(w, row_major(&t.xv))?;
        put_f64s(w, t.yv.iter().copied())?;
        for v in [&t.w_star, &t.noise, &t.noise_v].into_iter().flatten() {
            put_f64s(w, v.iter().copied())?;
        }
    }
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inner
            .read_exact(&mut b)
            .map_err(|e| Error::Format(format!("truncated container: {e}")))?;
        Ok(b)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn count(&mut self, name: &str) -> Result<usize> {
        let v = self.u64()?;
        if v == 0 || v > (1 << 32) {
            return Err(Error::Format(format!("implausible {name} = {v}")));
        }
        Ok(v as usize)
    }

    fn f64s(&mut self, len: usize) -> Result<Vec<f64>> {
        (0..len).map(|_| Ok(f64::from_le_bytes(self.bytes()?))).collect()
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        Ok(Matrix::from_row_slice(rows, cols, &self.f64s(rows * cols)?))
    }

    fn vector(&mut self, len: usize) -> Result<Vector> {
        Ok(Vector::from_vec(self.f64s(len)?))
    }
}

pub fn read_binary<R: Read>(r: R) -> Result<ProblemInstance> {
    let mut r = Reader { inner: r };
    if &r.bytes::<8>()? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let d = r.count("d")?;
    let n = r.count("n")?;
    let n_v = r.count("n_v")?;
    let t = r.count("T")?;
    let seed = r.u64()?;
    let header_len = r.u32()? as usize;
    let mut header = vec![0u8; header_len];
    r.inner
        .read_exact(&mut header)
        .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    let generator: Option<Generator> = serde_json::from_slice(&header)?;
    let mut tasks = Vec::with_capacity(t);
    for _ in 0..t {
        let [flags] = r.bytes::<1>()?;
        if flags > 7 {
            return Err(Error::Format(format!("bad task flags {flags}")));
        }
        let x = r.matrix(d, n)?;
        let y = r.vector(n)?;
        let xv = r.matrix(d, n_v)?;
        let yv = r.vector(n_v)?;
        let w_star = if flags & 1 != 0 { Some(r.vector(d)?) } else { None };
        let noise = if flags & 2 != 0 { Some(r.vector(n)?) } else { None };
        let noise_v = if flags & 4 != 0 { Some(r.vector(n_v)?) } else { None };
        tasks.push(Task {
            x,
            y,
            xv,
            yv,
            w_star,
            noise,
            noise_v,
        });
    }
    let mut trailing = [0u8; 1];
    if r.inner.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after last task".into()));
    }
    let mut inst = ProblemInstance::from_tasks(tasks, seed)?;
    inst.generator = generator;
    Ok(inst)
}

#[derive(Serialize, Deserialize)]
struct JsonTask {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    x_v: Vec<Vec<f64>>,
    y_v: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w_star: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise_v: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct JsonInstance {
    d: usize,
    n: usize,
    n_v: usize,
    seed: u64,
    generator: Option<Generator>,
    tasks: Vec<JsonTask>,
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>], name: &str) -> Result<Matrix> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Format(format!("{name} must be a non-empty rectangular array")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(Matrix::from_row_slice(rows.len(), ncols, &flat))
}

fn vec_of(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

pub fn to_json(inst: &ProblemInstance) -> Result<String> {
    let doc = JsonInstance {
        d: inst.d,
        n: inst.n,
        n_v: inst.n_v,
        seed: inst.seed,
        generator: inst.generator.clone(),
        tasks: inst
            .tasks
            .iter()
            .map(|t| JsonTask {
                x: rows(&t.x),
                y: vec_of(&t.y),
                x_v: rows(&t.xv),
                y_v: vec_of(&t.yv),
                w_star: t.w_star.as_ref().map(vec_of),
                noise: t.noise.as_ref().map(vec_of),
                noise_v: t.noise_v.as_ref().map(vec_of),
            })
            .collect(),
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn from_json(s: &str) -> Result<ProblemInstance> {
    let doc: JsonInstance = serde_json::from_str(s)?;
    let tasks = doc
        .tasks
        .into_iter()
        .map(|t| {
            Ok(Task {
                x: from_rows(&t.x, "x")?,
                y: Vector::from_vec(t.y),
                xv: from_rows(&t.x_v, "x_v")?,
                yv: Vector::from_vec(t.y_v),
                w_star: t.w_star.map(Vector::from_vec),
                noise: t.noise.map(Vector::from_vec),
                noise_v: t.noise_v.map(Vector::from_vec),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut inst = ProblemInstance::from_tasks(tasks, doc.seed)?;
    if (inst.d, inst.n, inst.n_v) != (doc.d, doc.n, doc.n_v) {
        return Err(Error::Format("header dimensions disagree with task blocks".into()));
    }
    inst.generator = doc.generator;
    Ok(inst)
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Writes JSON for `*.json` paths, the binary container otherwise.
pub fn save_instance(inst: &ProblemInstance, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    if is_json(path) {
        w.write_all(to_json(inst)?.as_bytes())?;
    } else {
        write_binary(inst, &mut w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_instance(path: &Path) -> Result<ProblemInstance> {
    if is_json(path) {
        from_json(&std::fs::read_to_string(path)?)
    } else {
        read_binary(BufReader::new(File::open(path)?))
    }
}
