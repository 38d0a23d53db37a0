use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One detector click: channel 0 or 1 and an integer picosecond timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TimeTagRecord {
    pub channel: u8,
    pub timestamp: u64,
}

impl TimeTagRecord {
    pub fn new(channel: u8, timestamp: u64) -> Result<Self> {
        if channel > 1 {
            return Err(Error::Parse(format!("channel must be 0 or 1, got {channel}")));
        }
        Ok(Self { channel, timestamp })
    }
}

/// Splits a tag stream into per-channel timestamp lists, checking that each
/// channel is time-ordered.
pub fn split_channels(tags: &[TimeTagRecord]) -> Result<(Vec<u64>, Vec<u64>)> {
    let mut ch = [Vec::new(), Vec::new()];
    for t in tags {
        let c = t.channel as usize;
        if c > 1 {
            return Err(Error::Parse(format!("channel must be 0 or 1, got {c}")));
        }
        if let Some(&last) = ch[c].last() {
            if t.timestamp < last {
                return Err(Error::InvalidInput(format!(
                    "timestamps on channel {c} decrease ({last} -> {})",
                    t.timestamp
                )));
            }
        }
        ch[c].push(t.timestamp);
    }
    let [a, b] = ch;
    Ok((a, b))
}

pub fn read_csv<R: BufRead>(reader: R) -> Result<Vec<TimeTagRecord>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if lineno == 0 && line.starts_with("channel") {
            continue;
        }
        let (c, t) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `channel,timestamp_ps`", lineno + 1)))?;
        let c: u8 = c.trim().parse().map_err(|e| Error::Parse(format!("line {}: channel: {e}", lineno + 1)))?;
        let t: u64 = t.trim().parse().map_err(|e| Error::Parse(format!("line {}: timestamp: {e}", lineno + 1)))?;
        out.push(TimeTagRecord::new(c, t)?);
    }
    Ok(out)
}

pub fn write_csv<W: Write>(mut w: W, tags: &[TimeTagRecord]) -> Result<()> {
    writeln!(w, "channel,timestamp_ps")?;
    for t in tags {
        writeln!(w, "{},{}", t.channel, t.timestamp)?;
    }
    w.flush()?;
    Ok(())
}

/// Binary layout: `u64` record count, then `count` records of
/// `(u8 channel, u64 timestamp_ps)`, all little-endian.
pub fn read_binary<R: Read>(mut r: R) -> Result<Vec<TimeTagRecord>> {
    let mut word = [0u8; 8];
    r.read_exact(&mut word).map_err(|e| Error::Parse(format!("missing record count: {e}")))?;
    let n = u64::from_le_bytes(word);
    let mut out = Vec::with_capacity(n.min(1 << 24) as usize);
    let mut rec = [0u8; 9];
    for i in 0..n {
        r.read_exact(&mut rec).map_err(|e| Error::Parse(format!("truncated at record {i} of {n}: {e}")))?;
        let ts = u64::from_le_bytes(rec[1..9].try_into().expect("8 bytes"));
        out.push(TimeTagRecord::new(rec[0], ts)?);
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Parse("trailing bytes after last record".into()));
    }
    Ok(out)
}

pub fn write_binary<W: Write>(mut w: W, tags: &[TimeTagRecord]) -> Result<()> {
    w.write_all(&(tags.len() as u64).to_le_bytes())?;
    for t in tags {
        w.write_all(&[t.channel])?;
        w.write_all(&t.timestamp.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<TimeTagRecord> {
        vec![
            TimeTagRecord::new(0, 5).unwrap(),
            TimeTagRecord::new(1, 7).unwrap(),
            TimeTagRecord::new(0, 1 << 40).unwrap(),
        ]
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &sample()).unwrap();
        assert!(buf.starts_with(b"channel,timestamp_ps\n"));
        assert_eq!(read_csv(&buf[..]).unwrap(), sample());
    }

    #[test]
    fn binary_round_trip() {
        let mut buf = Vec::new();
        write_binary(&mut buf, &sample()).unwrap();
        assert_eq!(buf.len(), 8 + 3 * 9);
        assert_eq!(read_binary(&buf[..]).unwrap(), sample());
        assert!(read_binary(&buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn rejects_bad_records() {
        assert!(read_csv("channel,timestamp_ps\n2,10\n".as_bytes()).is_err());
        assert!(read_csv("0;10\n".as_bytes()).is_err());
        let tags = [TimeTagRecord::new(1, 10).unwrap(), TimeTagRecord::new(1, 9).unwrap()];
        assert!(split_channels(&tags).is_err());
    }
}
