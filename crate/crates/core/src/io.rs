//! Readers and writers for every file format the command line emits or
//! ingests. Text formats start with a `# rankfn-<kind> v<N>` line and JSON
//! formats carry a `schema` field.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::complexes::{Filtration, PointCloud, Simplex, TimeSeries};
use crate::error::{Error, Result};
use crate::persistence::{DiagramPoint, PersistenceDiagram};
use crate::rank::{truncate, BiRankGrid, GridSpec, Landscape, RankGrid};

pub const DIAGRAM_SCHEMA: &str = "rankfn-diagram v1";
pub const FILTRATION_SCHEMA: &str = "rankfn-filtration v1";
pub const LANDSCAPE_SCHEMA: &str = "rankfn-landscape v1";
pub const RANK_GRID_SCHEMA: &str = "rankfn-rankgrid/1";
pub const BIRANK_GRID_SCHEMA: &str = "rankfn-birankgrid/1";

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| parse_err(format!("{what}: cannot parse {s:?} as a number")))?;
    if !v.is_finite() {
        return Err(parse_err(format!("{what}: {s:?} is not finite")));
    }
    Ok(v)
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| parse_err(format!("{what}: cannot parse {s:?} as a non-negative integer")))
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r)
}

/// Numeric rows of a CSV, skipping `#` comments and a leading header line.
fn numeric_rows<R: Read>(r: R, what: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (k, rec) in csv_reader(r).records().enumerate() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) => {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(parse_err(format!("{what}: row {} has a non-finite value", k + 1)));
                }
                rows.push(v)
            }
            Err(_) if k == 0 => continue,
            Err(_) => return Err(parse_err(format!("{what}: row {} is not numeric", k + 1))),
        }
    }
    Ok(rows)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// One point per row; an optional non-numeric header is skipped.
pub fn read_point_cloud<R: Read>(r: R) -> Result<PointCloud> {
    let rows = numeric_rows(r, "point cloud")?;
    if rows.is_empty() {
        return Err(parse_err("point cloud: no rows"));
    }
    PointCloud::new(rows).map_err(|e| parse_err(format!("point cloud: {e}")))
}

pub fn write_point_cloud<W: Write>(mut w: W, pc: &PointCloud) -> Result<()> {
    for p in pc.points() {
        let line: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// A single numeric column; an optional header is skipped.
pub fn read_time_series<R: Read>(r: R) -> Result<TimeSeries> {
    let rows = numeric_rows(r, "time series")?;
    if let Some(k) = rows.iter().position(|r| r.len() != 1) {
        return Err(parse_err(format!("time series: row {} has {} columns", k + 1, rows[k].len())));
    }
    TimeSeries::new(rows.into_iter().map(|r| r[0]).collect()).map_err(|e| parse_err(format!("time series: {e}")))
}

pub fn write_time_series<W: Write>(mut w: W, ts: &TimeSeries) -> Result<()> {
    for v in ts.values() {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

/// Rows `value,dim,v0,v1,...` in filtration order.
pub fn write_filtration<W: Write>(mut w: W, f: &Filtration) -> Result<()> {
    writeln!(w, "# {FILTRATION_SCHEMA}")?;
    for (vs, value) in f.iter() {
        write!(w, "{value},{}", vs.len() - 1)?;
        for v in vs {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_filtration<R: Read>(r: R) -> Result<Filtration> {
    let mut entries = Vec::new();
    for (k, rec) in csv_reader(r).records().enumerate() {
        let rec = rec?;
        if rec.len() < 3 {
            return Err(parse_err(format!("filtration: row {} is too short", k + 1)));
        }
        let value = parse_f64(&rec[0], "filtration value")?;
        let dim = parse_usize(&rec[1], "filtration dim")?;
        let vs = rec
            .iter()
            .skip(2)
            .map(|s| s.parse::<u32>().map_err(|_| parse_err(format!("filtration: bad vertex {s:?}"))))
            .collect::<Result<Vec<u32>>>()?;
        if vs.len() != dim + 1 {
            return Err(parse_err(format!("filtration: row {} lists {} vertices for dim {dim}", k + 1, vs.len())));
        }
        let s = Simplex::new(vs).map_err(|e| parse_err(format!("filtration: {e}")))?;
        entries.push((s, value));
    }
    Filtration::new(entries)
}

/// Rows `degree,birth,death` sorted by degree then point, after the schema
/// and `# cap=<value>` lines.
pub fn write_diagram<W: Write>(mut w: W, d: &PersistenceDiagram) -> Result<()> {
    writeln!(w, "# {DIAGRAM_SCHEMA}")?;
    writeln!(w, "# cap={}", d.cap())?;
    writeln!(w, "degree,birth,death")?;
    for q in 0..d.degrees() {
        for p in d.degree(q) {
            writeln!(w, "{q},{},{}", p.birth, p.death)?;
        }
    }
    Ok(())
}

/// Reads a diagram file. Without a `# cap=` line the cap is the largest
/// death.
pub fn read_diagram<R: Read>(r: R) -> Result<PersistenceDiagram> {
    let mut text = String::new();
    BufReader::new(r).read_to_string(&mut text)?;
    let mut cap = None;
    for line in text.lines() {
        if let Some(v) = line.trim().strip_prefix('#').map(str::trim).and_then(|l| l.strip_prefix("cap=")) {
            cap = Some(parse_f64(v, "diagram cap")?);
        }
    }
    let mut points: Vec<Vec<DiagramPoint>> = Vec::new();
    for (k, rec) in csv_reader(text.as_bytes()).records().enumerate() {
        let rec = rec?;
        if k == 0 && rec.get(0).is_some_and(|f| f.parse::<usize>().is_err()) {
            continue;
        }
        if rec.len() != 3 {
            return Err(parse_err(format!("diagram: row {} must have 3 columns", k + 1)));
        }
        let q = parse_usize(&rec[0], "diagram degree")?;
        let b = parse_f64(&rec[1], "diagram birth")?;
        let d = parse_f64(&rec[2], "diagram death")?;
        if points.len() <= q {
            points.resize(q + 1, Vec::new());
        }
        points[q].push(DiagramPoint::new(b, d));
    }
    let cap = cap.unwrap_or_else(|| {
        points
            .iter()
            .flatten()
            .map(|p| p.death)
            .fold(0.0, f64::max)
    });
    PersistenceDiagram::new(points, cap).map_err(|e| parse_err(format!("diagram: {e}")))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RankGridFile {
    schema: String,
    #[serde(rename = "tMin")]
    t_min: f64,
    #[serde(rename = "tMax")]
    t_max: f64,
    #[serde(rename = "G")]
    resolution: usize,
    degree: usize,
    cap: f64,
    truncation: f64,
    values: Vec<u32>,
}

pub fn write_rank_grid<W: Write>(w: W, r: &RankGrid) -> Result<()> {
    let spec = r.spec();
    let file = RankGridFile {
        schema: RANK_GRID_SCHEMA.into(),
        t_min: spec.t_min,
        t_max: spec.t_max,
        resolution: spec.resolution,
        degree: r.degree(),
        cap: r.cap(),
        truncation: r.truncation(),
        values: r.values().to_vec(),
    };
    serde_json::to_writer(w, &file)?;
    Ok(())
}

pub fn read_rank_grid<R: Read>(r: R) -> Result<RankGrid> {
    let f: RankGridFile = serde_json::from_reader(r).map_err(|e| parse_err(format!("rank grid: {e}")))?;
    if f.schema != RANK_GRID_SCHEMA {
        return Err(parse_err(format!("rank grid: unsupported schema {:?}", f.schema)));
    }
    let spec = GridSpec::new(f.t_min, f.t_max, f.resolution).map_err(|e| parse_err(format!("rank grid: {e}")))?;
    let grid = RankGrid::from_values(spec, f.degree, f.cap, f.values).map_err(|e| parse_err(format!("rank grid: {e}")))?;
    if f.truncation > 0.0 {
        truncate(&grid, f.truncation)
    } else {
        Ok(grid)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BiRankGridFile {
    schema: String,
    axis1: Vec<f64>,
    axis2: Vec<f64>,
    degree: usize,
    /// `[i, j, i', j', rank]` for each comparable `(i, j) ⪯ (i', j')`.
    pairs: Vec<[usize; 5]>,
}

pub fn write_birank_grid<W: Write>(w: W, r: &BiRankGrid) -> Result<()> {
    let file = BiRankGridFile {
        schema: BIRANK_GRID_SCHEMA.into(),
        axis1: r.axis1().to_vec(),
        axis2: r.axis2().to_vec(),
        degree: r.degree(),
        pairs: r.pairs().map(|(a, b, v)| [a.0, a.1, b.0, b.1, v]).collect(),
    };
    serde_json::to_writer(w, &file)?;
    Ok(())
}

pub fn read_birank_grid<R: Read>(r: R) -> Result<BiRankGrid> {
    let f: BiRankGridFile = serde_json::from_reader(r).map_err(|e| parse_err(format!("bi-rank grid: {e}")))?;
    if f.schema != BIRANK_GRID_SCHEMA {
        return Err(parse_err(format!("bi-rank grid: unsupported schema {:?}", f.schema)));
    }
    let pairs: Vec<_> = f.pairs.iter().map(|p| ((p[0], p[1]), (p[2], p[3]), p[4])).collect();
    BiRankGrid::from_pairs(f.axis1, f.axis2, f.degree, &pairs).map_err(|e| parse_err(format!("bi-rank grid: {e}")))
}

/// Columns `t,lambda_1,...,lambda_K`, all landscapes on the same `t` grid.
pub fn write_landscapes<W: Write>(mut w: W, ls: &[Landscape]) -> Result<()> {
    writeln!(w, "# {LANDSCAPE_SCHEMA}")?;
    write!(w, "t")?;
    for l in ls {
        write!(w, ",lambda_{}", l.k)?;
    }
    writeln!(w)?;
    let Some(first) = ls.first() else {
        return Ok(());
    };
    for (i, t) in first.ts.iter().enumerate() {
        write!(w, "{t}")?;
        for l in ls {
            write!(w, ",{}", l.values[i])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_landscapes<R: Read>(r: R) -> Result<Vec<Landscape>> {
    let mut lines = BufReader::new(r).lines();
    let mut header = None;
    let mut body = String::new();
    for line in lines.by_ref() {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if header.is_none() {
            header = Some(line);
        } else {
            body.push_str(&line);
            body.push('\n');
        }
    }
    let header = header.ok_or_else(|| parse_err("landscape: missing header"))?;
    let ks = header
        .split(',')
        .skip(1)
        .map(|c| {
            c.trim()
                .strip_prefix("lambda_")
                .ok_or_else(|| parse_err(format!("landscape: bad column {c:?}")))
                .and_then(|k| parse_usize(k, "landscape index"))
        })
        .collect::<Result<Vec<usize>>>()?;
    let rows = numeric_rows(body.as_bytes(), "landscape")?;
    let mut out: Vec<Landscape> = ks
        .iter()
        .map(|&k| Landscape {
            k,
            ts: Vec::new(),
            values: Vec::new(),
        })
        .collect();
    for row in rows {
        if row.len() != ks.len() + 1 {
            return Err(parse_err("landscape: ragged row"));
        }
        for (l, v) in out.iter_mut().zip(&row[1..]) {
            l.ts.push(row[0]);
            l.values.push(*v);
        }
    }
    Ok(out)
}

macro_rules! path_helpers {
    ($($read:ident => $read_path:ident, $write:ident => $write_path:ident : $ty:ty;)*) => {
        $(
            pub fn $read_path(path: &Path) -> Result<$ty> {
                $read(open(path)?)
            }

            pub fn $write_path(path: &Path, v: &$ty) -> Result<()> {
                let mut w = create(path)?;
                $write(&mut w, v)?;
                w.flush()?;
                Ok(())
            }
        )*
    };
}

path_helpers! {
    read_point_cloud => read_point_cloud_file, write_point_cloud => write_point_cloud_file: PointCloud;
    read_time_series => read_time_series_file, write_time_series => write_time_series_file: TimeSeries;
    read_filtration => read_filtration_file, write_filtration => write_filtration_file: Filtration;
    read_diagram => read_diagram_file, write_diagram => write_diagram_file: PersistenceDiagram;
    read_rank_grid => read_rank_grid_file, write_rank_grid => write_rank_grid_file: RankGrid;
    read_birank_grid => read_birank_grid_file, write_birank_grid => write_birank_grid_file: BiRankGrid;
}

pub fn read_landscapes_file(path: &Path) -> Result<Vec<Landscape>> {
    read_landscapes(open(path)?)
}

pub fn write_landscapes_file(path: &Path, ls: &[Landscape]) -> Result<()> {
    let mut w = create(path)?;
    write_landscapes(&mut w, ls)?;
    w.flush()?;
    Ok(())
}

/// Pretty JSON followed by a newline.
pub fn write_json_file<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{distance_matrix, sublevel_filtration, vietoris_rips};
    use crate::rank::{landscape, rank_from_diagram};

    #[test]
    fn point_cloud_with_and_without_header() {
        let a = read_point_cloud("x,y\n0,1\n2.5,3\n".as_bytes()).unwrap();
        let b = read_point_cloud("# comment\n0,1\n2.5,3\n".as_bytes()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dim(), 2);
        let mut buf = Vec::new();
        write_point_cloud(&mut buf, &a).unwrap();
        assert_eq!(read_point_cloud(&buf[..]).unwrap(), a);
        assert!(matches!(read_point_cloud("0,1\n2\n".as_bytes()), Err(Error::Parse(_))));
        assert!(matches!(read_point_cloud("0,1\nx,2\n".as_bytes()), Err(Error::Parse(_))));
    }

    #[test]
    fn time_series_roundtrip() {
        let ts = read_time_series("rr\n812\n790.5\n805\n".as_bytes()).unwrap();
        assert_eq!(ts.values(), &[812.0, 790.5, 805.0]);
        let mut buf = Vec::new();
        write_time_series(&mut buf, &ts).unwrap();
        assert_eq!(read_time_series(&buf[..]).unwrap(), ts);
        assert!(read_time_series("1,2\n3,4\n".as_bytes()).is_err());
    }

    #[test]
    fn filtration_roundtrip() {
        let pc = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let f = vietoris_rips(&distance_matrix(&pc), 2, f64::INFINITY).unwrap();
        let mut buf = Vec::new();
        write_filtration(&mut buf, &f).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("# rankfn-filtration v1\n0,0,0\n"));
        assert_eq!(read_filtration(&buf[..]).unwrap(), f);
        let ts = TimeSeries::new(vec![3.0, 1.0, 2.0, 0.5]).unwrap();
        let f = sublevel_filtration(&ts);
        let mut buf = Vec::new();
        write_filtration(&mut buf, &f).unwrap();
        assert_eq!(read_filtration(&buf[..]).unwrap(), f);
    }

    #[test]
    fn diagram_roundtrip_is_exact() {
        let d = PersistenceDiagram::new(
            vec![
                vec![DiagramPoint::new(0.0, 0.1 + 0.2), DiagramPoint::new(0.0, 7.0)],
                vec![],
                vec![DiagramPoint::new(1.0 / 3.0, 2.0)],
            ],
            7.0,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_diagram(&mut buf, &d).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# rankfn-diagram v1\n# cap=7\ndegree,birth,death\n0,0,"));
        assert_eq!(read_diagram(&buf[..]).unwrap(), d);
        let bare = read_diagram("1,0,2\n1,0.5,1\n".as_bytes()).unwrap();
        assert_eq!(bare.cap(), 2.0);
        assert_eq!(bare.degree(1).len(), 2);
        assert!(matches!(read_diagram("0,2,1\n".as_bytes()), Err(Error::Parse(_))));
    }

    #[test]
    fn grid_roundtrips() {
        let d = PersistenceDiagram::from_pairs(1, &[(0.0, 2.0), (0.5, 1.5)]).unwrap();
        let spec = GridSpec::new(0.0, 2.0, 20).unwrap();
        let r = rank_from_diagram(&d, 1, spec).unwrap();
        let mut buf = Vec::new();
        write_rank_grid(&mut buf, &r).unwrap();
        assert_eq!(read_rank_grid(&buf[..]).unwrap(), r);
        let t = truncate(&r, 0.5).unwrap();
        let mut buf = Vec::new();
        write_rank_grid(&mut buf, &t).unwrap();
        assert_eq!(read_rank_grid(&buf[..]).unwrap(), t);
        assert!(read_rank_grid(r#"{"schema":"x"}"#.as_bytes()).is_err());

        let ls = landscape(&d, 1, 2, &crate::rank::landscape_grid(0.0, 2.0, 11).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_landscapes(&mut buf, &ls).unwrap();
        assert_eq!(read_landscapes(&buf[..]).unwrap(), ls);
    }
}
