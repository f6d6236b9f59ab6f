//! Single-ported banked memory with per-cycle arbitration.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BankModel {
    bank_count: usize,
}

impl BankModel {
    pub fn new(bank_count: usize) -> Self {
        assert!(bank_count >= 1, "at least one bank");
        Self { bank_count }
    }

    pub fn bank_count(&self) -> usize {
        self.bank_count
    }

    pub fn ports_per_bank(&self) -> usize {
        1
    }

    pub fn bank(&self, element: usize) -> usize {
        element % self.bank_count
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BankPolicy {
    /// A denied agent retries the same access next cycle.
    Stall,
    /// A denied agent drops the access and moves on.
    Elide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    Granted(usize),
    Denied(usize),
    Idle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BankLog {
    /// `cycles[t][agent]`.
    pub cycles: Vec<Vec<Access>>,
}

impl BankLog {
    pub fn cycle_count(&self) -> usize {
        self.cycles.len()
    }

    pub fn granted(&self) -> usize {
        self.count(|a| matches!(a, Access::Granted(_)))
    }

    pub fn denied(&self) -> usize {
        self.count(|a| matches!(a, Access::Denied(_)))
    }

    fn count(&self, f: impl Fn(&Access) -> bool) -> usize {
        self.cycles.iter().flatten().filter(|a| f(a)).count()
    }
}

/// Grants at most one distinct element per bank per cycle, lowest agent
/// first. Agents requesting the element already granted in that bank share
/// the read.
pub fn arbitrate(model: &BankModel, requests: &[Option<usize>]) -> Vec<Access> {
    let mut owner: Vec<Option<usize>> = vec![None; model.bank_count()];
    requests
        .iter()
        .map(|r| match *r {
            None => Access::Idle,
            Some(el) => {
                let slot = &mut owner[model.bank(el)];
                match *slot {
                    None => {
                        *slot = Some(el);
                        Access::Granted(el)
                    }
                    Some(held) if held == el => Access::Granted(el),
                    Some(_) => Access::Denied(el),
                }
            }
        })
        .collect()
}

/// Replays per-agent access streams against `model` until every stream is
/// exhausted.
pub fn simulate_banked(streams: &[Vec<usize>], model: &BankModel, policy: BankPolicy) -> BankLog {
    assert!(!streams.is_empty(), "at least one agent");
    let mut next = vec![0usize; streams.len()];
    let mut cycles = Vec::new();
    while next.iter().zip(streams).any(|(&i, s)| i < s.len()) {
        let requests: Vec<Option<usize>> = next
            .iter()
            .zip(streams)
            .map(|(&i, s)| s.get(i).copied())
            .collect();
        let grants = arbitrate(model, &requests);
        for (a, g) in grants.iter().enumerate() {
            match (g, policy) {
                (Access::Granted(_), _) | (Access::Denied(_), BankPolicy::Elide) => next[a] += 1,
                _ => {}
            }
        }
        cycles.push(grants);
    }
    BankLog { cycles }
}
