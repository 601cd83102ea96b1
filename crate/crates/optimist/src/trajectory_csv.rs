//! Trajectory files: a `t,arm,outcome` header followed by one row per round.
//!
//! Rounds are numbered from 1 and must be consecutive. Arms are 1-based.
//! Outcomes are written with the shortest representation that round-trips, so
//! reading a written file gives back the exact same trajectory.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use optimist_core::Trajectory;

use crate::error::{Error, Result};

pub const HEADER: [&str; 3] = ["t", "arm", "outcome"];

pub fn write_trajectory<W: Write>(h: &Trajectory, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for r in h.records() {
        w.write_record([r.t.to_string(), r.arm.to_string(), r.outcome.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_trajectory(path: &Path, h: &Trajectory) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_trajectory(h, BufWriter::new(f)).map_err(|e| Error::io(path, e.into()))
}

/// Parses a trajectory over `arms` arms. `source` names the input in errors.
pub fn read_trajectory<R: Read>(input: R, arms: usize, source: &str) -> Result<Trajectory> {
    let data_err = |line: u64, msg: String| Error::Data {
        path: source.to_string(),
        line,
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let mut h = Trajectory::empty(arms)?;
    let mut saw_header = false;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            data_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if !saw_header {
            if rec.iter().ne(HEADER) {
                return Err(data_err(
                    line,
                    format!("expected header `{}`", HEADER.join(",")),
                ));
            }
            saw_header = true;
            continue;
        }
        if rec.len() != 3 {
            return Err(data_err(
                line,
                format!("expected 3 fields, found {}", rec.len()),
            ));
        }
        let t: usize = rec[0]
            .parse()
            .map_err(|_| data_err(line, format!("bad round index `{}`", &rec[0])))?;
        if t != h.len() + 1 {
            return Err(data_err(
                line,
                format!("round {t} out of order, expected {}", h.len() + 1),
            ));
        }
        let arm: usize = rec[1]
            .parse()
            .map_err(|_| data_err(line, format!("bad arm `{}`", &rec[1])))?;
        if arm == 0 || arm > arms {
            return Err(data_err(line, format!("arm {arm} outside 1..={arms}")));
        }
        let outcome: f64 = rec[2]
            .parse()
            .map_err(|_| data_err(line, format!("bad outcome `{}`", &rec[2])))?;
        h.push(arm, outcome)
            .map_err(|e| data_err(line, e.to_string()))?;
    }
    if !saw_header {
        return Err(data_err(1, "missing header".into()));
    }
    Ok(h)
}

pub fn load_trajectory(path: &Path, arms: usize) -> Result<Trajectory> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_trajectory(BufReader::new(f), arms, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(h: &Trajectory) -> Trajectory {
        let mut buf = Vec::new();
        write_trajectory(h, &mut buf).unwrap();
        read_trajectory(buf.as_slice(), h.arms(), "mem").unwrap()
    }

    #[test]
    fn writes_exact_layout() {
        let h = Trajectory::from_pairs(2, [(1, 0.5), (2, 1.0), (1, -0.1)]).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&h, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t,arm,outcome\n1,1,0.5\n2,2,1\n3,1,-0.1\n"
        );
    }

    #[test]
    fn empty_trajectory_is_header_only() {
        let h = Trajectory::empty(3).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&h, &mut buf).unwrap();
        assert_eq!(buf, b"t,arm,outcome\n");
        assert!(roundtrip(&h).is_empty());
    }

    #[test]
    fn roundtrip_is_exact() {
        let xs = [0.1 + 0.2, 1e-300, -3.5e12, f64::MIN_POSITIVE, 2.0 / 3.0];
        let h =
            Trajectory::from_pairs(2, xs.iter().enumerate().map(|(i, &x)| (1 + i % 2, x))).unwrap();
        assert_eq!(roundtrip(&h), h);
    }

    #[test]
    fn missing_header_rejected() {
        let err = read_trajectory("1,1,0.5\n".as_bytes(), 2, "mem").unwrap_err();
        assert!(matches!(err, Error::Data { line: 1, .. }), "{err}");
        let err = read_trajectory("".as_bytes(), 2, "mem").unwrap_err();
        assert!(err.to_string().contains("missing header"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let src = "t,arm,outcome\n1,1,0.5\n2,1,abc\n";
        let err = read_trajectory(src.as_bytes(), 2, "f.csv").unwrap_err();
        assert!(matches!(err, Error::Data { line: 3, .. }), "{err}");
        assert!(err.to_string().starts_with("f.csv: line 3"));

        let src = "t,arm,outcome\n1,3,0.5\n";
        let err = read_trajectory(src.as_bytes(), 2, "f.csv").unwrap_err();
        assert!(matches!(err, Error::Data { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("outside 1..=2"));
    }

    #[test]
    fn rejects_gaps_and_nonfinite() {
        let src = "t,arm,outcome\n1,1,0.5\n3,1,0.5\n";
        assert!(read_trajectory(src.as_bytes(), 2, "m").is_err());
        let src = "t,arm,outcome\n1,1,NaN\n";
        assert!(read_trajectory(src.as_bytes(), 2, "m").is_err());
        let src = "t,arm,outcome\n1,1\n";
        assert!(read_trajectory(src.as_bytes(), 2, "m").is_err());
    }

    #[test]
    fn comments_and_crlf_tolerated() {
        let src = "# manifest\r\nt,arm,outcome\r\n1,2,0.25\r\n";
        let h = read_trajectory(src.as_bytes(), 2, "m").unwrap();
        assert_eq!(h.arm_sequence(), vec![2]);
    }
}
