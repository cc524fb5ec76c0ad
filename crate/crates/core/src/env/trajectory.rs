//! Line-delimited JSON trajectory dumps: one object per step.
//!
//! ```text
//! {"step":1,"state":[0.01,-0.02,0.03,0.0],"action":1,"reward":0.0,"done":false}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryRecord {
    pub step: usize,
    /// Simulator state after the step.
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub done: bool,
}

pub fn write_trajectory(records: &[TrajectoryRecord]) -> String {
    let mut out = String::new();
    for r in records {
        // Serializing plain numbers and bools cannot fail.
        out.push_str(&serde_json::to_string(r).expect("trajectory record serializes"));
        out.push('\n');
    }
    out
}

/// Parses a dump. Blank lines are skipped; anything else must be a record.
pub fn read_trajectory(text: &str) -> Result<Vec<TrajectoryRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<TrajectoryRecord>(l).map_err(|e| Error::parse(i + 1, e.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reports_line_of_bad_record() {
        let text = "{\"step\":1,\"state\":[0.0],\"action\":0,\"reward\":0.0,\"done\":false}\n\nnot json\n";
        match read_trajectory(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = "{\"step\":1,\"state\":[],\"action\":0,\"reward\":0.0,\"done\":false,\"x\":1}";
        assert!(read_trajectory(text).is_err());
    }

    proptest! {
        #[test]
        fn dump_round_trips(
            recs in prop::collection::vec(
                (0usize..1000, prop::collection::vec(-1e6f64..1e6, 0..6), 0usize..3, -1e3f64..1e3, any::<bool>()),
                0..20,
            )
        ) {
            let records: Vec<_> = recs
                .into_iter()
                .map(|(step, state, action, reward, done)| TrajectoryRecord { step, state, action, reward, done })
                .collect();
            prop_assert_eq!(read_trajectory(&write_trajectory(&records)).unwrap(), records);
        }
    }
}
