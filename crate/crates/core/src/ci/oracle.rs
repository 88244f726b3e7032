use crate::graph::Mag;

use super::{CiBackend, CiQuery, CiResult, Counter, Result};

/// Answers queries by m-separation in a known MAG.
#[derive(Debug)]
pub struct Oracle {
    mag: Mag,
    counter: Counter,
}

impl Oracle {
    pub fn new(mag: Mag) -> Self {
        Oracle {
            mag,
            counter: Counter::default(),
        }
    }

    pub fn mag(&self) -> &Mag {
        &self.mag
    }
}

impl CiBackend for Oracle {
    fn variables(&self) -> &[String] {
        self.mag.names()
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.mag.node(name).ok()
    }

    fn test(&self, q: &CiQuery) -> Result<CiResult> {
        self.counter.bump();
        q.validate(self.mag.names())?;
        let independent = self.mag.m_separated(q.x, q.y, &q.z)?;
        Ok(CiResult {
            independent,
            statistic: 0.0,
            p_value: if independent { 1.0 } else { 0.0 },
            dof_or_n: 0.0,
            flag: None,
        })
    }

    fn tests_performed(&self) -> u64 {
        self.counter.get()
    }

    fn label(&self) -> &'static str {
        "oracle"
    }
}
