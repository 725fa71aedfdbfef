//! BonnMotion movement files: one node per line, repeating `t x y` (2-D) or
//! `t x y z` (3-D) groups separated by arbitrary whitespace.

use std::fmt::Write as _;

use super::{MobilityError, Trajectory, Waypoint};
use crate::geometry::Point;
use crate::num::Scalar;

/// Coordinate dimensionality of a movement file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dims {
    #[default]
    Two,
    Three,
}

impl Dims {
    pub fn group_len(self) -> usize {
        match self {
            Dims::Two => 3,
            Dims::Three => 4,
        }
    }

    pub fn from_count(n: u8) -> Option<Self> {
        match n {
            2 => Some(Dims::Two),
            3 => Some(Dims::Three),
            _ => None,
        }
    }

    pub fn count(self) -> u8 {
        match self {
            Dims::Two => 2,
            Dims::Three => 3,
        }
    }
}

/// Parses a movement file. Node `i` is the `i`-th non-blank line.
///
/// Errors carry the 1-based line number and the 1-based token position.
pub fn parse_bonnmotion<T: Scalar>(
    text: &str,
    dims: Dims,
) -> Result<Vec<Trajectory<T>>, MobilityError> {
    let group = dims.group_len();
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if !tokens.len().is_multiple_of(group) {
            return Err(MobilityError::MalformedLine {
                line,
                tokens: tokens.len(),
                group,
            });
        }
        let mut values = Vec::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            match tok.parse::<T>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(MobilityError::NonNumericToken {
                        line,
                        token: i + 1,
                        text: (*tok).to_string(),
                    })
                }
            }
        }
        let mut waypoints: Vec<Waypoint<T>> = Vec::with_capacity(values.len() / group);
        for (g, chunk) in values.chunks(group).enumerate() {
            let z = if group == 4 { chunk[3] } else { T::zero() };
            let wp = Waypoint {
                t: chunk[0],
                pos: Point::new(chunk[1], chunk[2], z),
            };
            if let Some(prev) = waypoints.last() {
                if !(wp.t > prev.t) {
                    return Err(MobilityError::NonMonotoneTime {
                        line,
                        token: g * group + 1,
                    });
                }
            }
            waypoints.push(wp);
        }
        out.push(Trajectory::new(waypoints)?);
    }
    Ok(out)
}

/// Writes trajectories in the format [`parse_bonnmotion`] reads.
pub fn serialize_bonnmotion<T: Scalar>(trajectories: &[Trajectory<T>], dims: Dims) -> String {
    let mut s = String::new();
    for tr in trajectories {
        let mut first = true;
        for w in tr.waypoints() {
            if !first {
                s.push(' ');
            }
            first = false;
            match dims {
                Dims::Two => write!(s, "{} {} {}", w.t, w.pos.x, w.pos.y),
                Dims::Three => write!(s, "{} {} {} {}", w.t, w.pos.x, w.pos.y, w.pos.z),
            }
            .expect("writing to a String cannot fail");
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_groups_2d() {
        let tr = parse_bonnmotion::<f64>("0.0 10.0 20.0  30.0 50.0 20.0", Dims::Two).unwrap();
        assert_eq!(tr.len(), 1);
        assert_eq!(
            tr[0].waypoints(),
            &[
                Waypoint::planar(0.0, 10.0, 20.0),
                Waypoint::planar(30.0, 50.0, 20.0)
            ]
        );
    }

    #[test]
    fn token_count_not_divisible() {
        let e = parse_bonnmotion::<f64>("0 0 0 5 1", Dims::Two).unwrap_err();
        assert_eq!(
            e,
            MobilityError::MalformedLine {
                line: 1,
                tokens: 5,
                group: 3
            }
        );
    }

    #[test]
    fn repeated_time() {
        let e = parse_bonnmotion::<f64>("0 0 0  0 5 5", Dims::Two).unwrap_err();
        assert_eq!(e, MobilityError::NonMonotoneTime { line: 1, token: 4 });
    }

    #[test]
    fn non_numeric_reports_position() {
        let e = parse_bonnmotion::<f64>("0 0 0\n1 2 x 4", Dims::Three);
        // line 1 has 3 tokens, not a multiple of 4
        assert!(matches!(
            e,
            Err(MobilityError::MalformedLine { line: 1, .. })
        ));
        let e = parse_bonnmotion::<f64>("0 0 0 0\n1 2 x 4", Dims::Three).unwrap_err();
        assert_eq!(
            e,
            MobilityError::NonNumericToken {
                line: 2,
                token: 3,
                text: "x".into()
            }
        );
    }

    #[test]
    fn crlf_and_tabs_and_3d() {
        let text = "0\t1 2 3   4 5 6 7\r\n1 1 1 1\r\n";
        let tr = parse_bonnmotion::<f32>(text, Dims::Three).unwrap();
        assert_eq!(tr.len(), 2);
        assert_eq!(tr[0].waypoints()[1], Waypoint::new(4.0, 5.0, 6.0, 7.0));
    }

    fn arb_traces() -> impl Strategy<Value = Vec<Trajectory<f64>>> {
        let node = prop::collection::vec(
            (0.001f64..1e4, -1e4f64..1e4, -1e4f64..1e4, -50f64..50.0),
            1..20,
        )
        .prop_map(|steps| {
            let mut t = 0.0;
            let wps = steps
                .into_iter()
                .map(|(dt, x, y, z)| {
                    let w = Waypoint::new(t, x, y, z);
                    t += dt;
                    w
                })
                .collect();
            Trajectory::new(wps).unwrap()
        });
        prop::collection::vec(node, 1..8)
    }

    proptest! {
        #[test]
        fn round_trip_3d(traces in arb_traces()) {
            let text = serialize_bonnmotion(&traces, Dims::Three);
            prop_assert_eq!(parse_bonnmotion::<f64>(&text, Dims::Three).unwrap(), traces);
        }
    }
}
