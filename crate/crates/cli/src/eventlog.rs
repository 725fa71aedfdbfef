//! CSV event log: the ledger of a run, one record per row.
//!
//! A few `# key=value` header lines precede the CSV header. Times are
//! written with `f64`'s shortest round-trip formatting, so reading a log back
//! reproduces the ledger exactly.

use std::io::{BufRead, Write};

use thiserror::Error;

use oppsim_core::metrics::{DropReason, Ledger, LogEvent, Record};
use oppsim_core::{DataId, NodeId};

pub const SCHEMA_VERSION: u32 = 1;
const COLUMNS: [&str; 9] = [
    "t", "seq", "kind", "node", "peer", "item", "size", "liked", "reason",
];

#[derive(Debug, Error)]
pub enum EventLogError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unsupported event log schema {0}")]
    Schema(String),
    #[error("missing header line `# {0}=`")]
    MissingHeader(&'static str),
    #[error("row {row}: {reason}")]
    BadRow { row: usize, reason: String },
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn row(r: &Record) -> [String; 9] {
    let mut cells: [String; 9] = Default::default();
    cells[0] = r.t.to_string();
    cells[1] = r.seq.to_string();
    cells[2] = r.event.kind().to_string();
    match &r.event {
        LogEvent::Generated {
            item,
            origin,
            destination,
            size,
        } => {
            cells[3] = origin.0.to_string();
            cells[4] = opt(destination.map(|d| d.0));
            cells[5] = item.to_string();
            cells[6] = size.to_string();
        }
        LogEvent::Sent {
            node,
            peer,
            item,
            size,
        } => {
            cells[3] = node.0.to_string();
            cells[4] = opt(peer.map(|p| p.0));
            cells[5] = item.to_string();
            cells[6] = size.to_string();
        }
        LogEvent::Received {
            node,
            from,
            item,
            liked,
        } => {
            cells[3] = node.0.to_string();
            cells[4] = from.0.to_string();
            cells[5] = item.to_string();
            cells[7] = u8::from(*liked).to_string();
        }
        LogEvent::Delivered { node, item } | LogEvent::Evicted { node, item } => {
            cells[3] = node.0.to_string();
            cells[5] = item.to_string();
        }
        LogEvent::ContactOpen { a, b } | LogEvent::ContactClose { a, b } => {
            cells[3] = a.0.to_string();
            cells[4] = b.0.to_string();
        }
        LogEvent::Dropped { node, item, reason } => {
            cells[3] = node.0.to_string();
            cells[5] = opt(item.as_ref());
            cells[8] = reason.to_string();
        }
    }
    cells
}

pub fn write_event_log<W: Write>(ledger: &Ledger, out: W) -> Result<(), EventLogError> {
    write_event_log_with_header(ledger, &[], out)
}

/// Like [`write_event_log`], with extra `# key=value` lines that readers ignore.
pub fn write_event_log_with_header<W: Write>(
    ledger: &Ledger,
    extra: &[(String, String)],
    out: W,
) -> Result<(), EventLogError> {
    let mut out = out;
    writeln!(out, "# schema={SCHEMA_VERSION}")?;
    writeln!(out, "# node_count={}", ledger.node_count)?;
    writeln!(out, "# t_end={}", ledger.t_end)?;
    for (k, v) in extra {
        writeln!(out, "# {k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in &ledger.records {
        w.write_record(row(r))?;
    }
    w.flush()?;
    Ok(())
}

struct Cells<'a> {
    rec: &'a csv::StringRecord,
    row: usize,
}

impl Cells<'_> {
    fn bad(&self, reason: impl Into<String>) -> EventLogError {
        EventLogError::BadRow {
            row: self.row,
            reason: reason.into(),
        }
    }

    fn text(&self, col: usize) -> &str {
        self.rec.get(col).unwrap_or("")
    }

    fn num<T: std::str::FromStr>(&self, col: usize) -> Result<T, EventLogError> {
        self.text(col)
            .parse()
            .map_err(|_| self.bad(format!("column `{}` = {:?}", COLUMNS[col], self.text(col))))
    }

    fn node(&self, col: usize) -> Result<NodeId, EventLogError> {
        self.num(col).map(NodeId)
    }

    fn opt_node(&self, col: usize) -> Result<Option<NodeId>, EventLogError> {
        if self.text(col).is_empty() {
            Ok(None)
        } else {
            self.node(col).map(Some)
        }
    }

    fn item(&self) -> Result<DataId, EventLogError> {
        match self.text(5) {
            "" => Err(self.bad("missing item")),
            s => Ok(DataId::new(s)),
        }
    }
}

fn parse_row(rec: &csv::StringRecord, row: usize) -> Result<Record, EventLogError> {
    let c = Cells { rec, row };
    let t: f64 = c.num(0)?;
    let seq: u64 = c.num(1)?;
    let event = match c.text(2) {
        "generated" => LogEvent::Generated {
            item: c.item()?,
            origin: c.node(3)?,
            destination: c.opt_node(4)?,
            size: c.num(6)?,
        },
        "sent" => LogEvent::Sent {
            node: c.node(3)?,
            peer: c.opt_node(4)?,
            item: c.item()?,
            size: c.num(6)?,
        },
        "received" => LogEvent::Received {
            node: c.node(3)?,
            from: c.node(4)?,
            item: c.item()?,
            liked: c.num::<u8>(7)? != 0,
        },
        "delivered" => LogEvent::Delivered {
            node: c.node(3)?,
            item: c.item()?,
        },
        "evicted" => LogEvent::Evicted {
            node: c.node(3)?,
            item: c.item()?,
        },
        "contact_open" => LogEvent::ContactOpen {
            a: c.node(3)?,
            b: c.node(4)?,
        },
        "contact_close" => LogEvent::ContactClose {
            a: c.node(3)?,
            b: c.node(4)?,
        },
        "dropped" => LogEvent::Dropped {
            node: c.node(3)?,
            item: match c.text(5) {
                "" => None,
                s => Some(DataId::new(s)),
            },
            reason: c.text(8).parse::<DropReason>().map_err(|e| c.bad(e))?,
        },
        other => return Err(c.bad(format!("unknown kind {other:?}"))),
    };
    Ok(Record { t, seq, event })
}

pub fn read_event_log<R: BufRead>(input: R) -> Result<Ledger, EventLogError> {
    let mut input = input;
    let mut node_count = None;
    let mut t_end = None;
    let mut schema = None;
    let mut header_lines = 0;
    loop {
        let buf = input.fill_buf()?;
        if buf.first() != Some(&b'#') {
            break;
        }
        let mut line = String::new();
        input.read_line(&mut line)?;
        header_lines += 1;
        let Some((k, v)) = line.trim_start_matches('#').trim().split_once('=') else {
            continue;
        };
        let v = v.trim().to_string();
        match k.trim() {
            "schema" => schema = Some(v),
            "node_count" => node_count = Some(v),
            "t_end" => t_end = Some(v),
            _ => {}
        }
    }
    match schema {
        Some(s) if s == SCHEMA_VERSION.to_string() => {}
        Some(s) => return Err(EventLogError::Schema(s)),
        None => return Err(EventLogError::MissingHeader("schema")),
    }
    let header_err = |name: &'static str, v: &str| EventLogError::BadRow {
        row: 0,
        reason: format!("header `{name}` = {v:?}"),
    };
    let nc = node_count.ok_or(EventLogError::MissingHeader("node_count"))?;
    let te = t_end.ok_or(EventLogError::MissingHeader("t_end"))?;
    let mut ledger = Ledger::new(nc.parse().map_err(|_| header_err("node_count", &nc))?);
    ledger.t_end = te.parse().map_err(|_| header_err("t_end", &te))?;

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(COLUMNS.iter().copied()) {
        return Err(EventLogError::BadRow {
            row: header_lines + 1,
            reason: format!("unexpected columns {headers:?}"),
        });
    }
    for (i, rec) in rdr.records().enumerate() {
        // 1-based file line: comment lines, column header, then rows
        ledger.records.push(parse_row(&rec?, header_lines + 2 + i)?);
    }
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_every_kind() {
        let mut l = Ledger::new(3);
        l.t_end = 10.5;
        let id = DataId::new("n0-1");
        let (a, b) = (NodeId(0), NodeId(2));
        l.push(0.1, LogEvent::ContactOpen { a, b });
        l.push(
            0.1 + 0.2,
            LogEvent::Generated {
                item: id.clone(),
                origin: a,
                destination: Some(b),
                size: 10,
            },
        );
        l.push(
            1.0,
            LogEvent::Sent {
                node: a,
                peer: None,
                item: id.clone(),
                size: 10,
            },
        );
        l.push(
            1.0,
            LogEvent::Received {
                node: b,
                from: a,
                item: id.clone(),
                liked: true,
            },
        );
        l.push(
            1.0,
            LogEvent::Delivered {
                node: b,
                item: id.clone(),
            },
        );
        l.push(
            2.0,
            LogEvent::Evicted {
                node: b,
                item: id.clone(),
            },
        );
        l.push(
            3.0,
            LogEvent::Dropped {
                node: a,
                item: None,
                reason: DropReason::OutOfRange,
            },
        );
        l.push(4.0, LogEvent::ContactClose { a, b });
        let mut buf = Vec::new();
        write_event_log(&l, &mut buf).unwrap();
        let back = read_event_log(&buf[..]).unwrap();
        assert_eq!(back, l);
    }

    #[test]
    fn rejects_unknown_schema() {
        let text = "# schema=9\n# node_count=1\n# t_end=1\n";
        assert!(matches!(
            read_event_log(text.as_bytes()),
            Err(EventLogError::Schema(_))
        ));
    }

    #[test]
    fn bad_row_reports_line() {
        let text = "# schema=1\n# node_count=1\n# t_end=1\nt,seq,kind,node,peer,item,size,liked,reason\n0,0,bogus,0,,,,,\n";
        match read_event_log(text.as_bytes()) {
            Err(EventLogError::BadRow { row, .. }) => assert_eq!(row, 5),
            other => panic!("{other:?}"),
        }
    }
}
