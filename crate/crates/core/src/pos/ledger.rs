use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::NodeId;

/// In-memory token ledger standing in for contract state.
///
/// Tokens enter only through [`Ledger::mint`] during setup; every other
/// operation is a transfer, so `total_supply` never changes afterwards.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ledger {
    balances: BTreeMap<NodeId, u64>,
    total_supply: u64,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mint(&mut self, account: NodeId, amount: u64) {
        *self.balances.entry(account).or_default() += amount;
        self.total_supply += amount;
    }

    pub fn balance(&self, account: NodeId) -> u64 {
        self.balances.get(&account).copied().unwrap_or(0)
    }

    pub fn total_supply(&self) -> u64 {
        self.total_supply
    }

    /// Sum of all balances; equals `total_supply` in every reachable state.
    pub fn circulating(&self) -> u64 {
        self.balances.values().sum()
    }

    pub fn accounts(&self) -> impl Iterator<Item = (NodeId, u64)> + '_ {
        self.balances.iter().map(|(k, v)| (*k, *v))
    }

    pub fn ensure_funds(&self, account: NodeId, needed: u64) -> Result<()> {
        let balance = self.balance(account);
        if balance < needed {
            return Err(Error::InsufficientFunds {
                account,
                balance,
                needed,
            });
        }
        Ok(())
    }

    pub fn transfer(&mut self, from: NodeId, to: NodeId, amount: u64) -> Result<()> {
        self.ensure_funds(from, amount)?;
        if amount == 0 || from == to {
            return Ok(());
        }
        *self.balances.get_mut(&from).expect("funded account exists") -= amount;
        *self.balances.entry(to).or_default() += amount;
        Ok(())
    }

    /// Text dump: one `<id> <balance>` line per account in ascending id order,
    /// then `total_supply <n>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (id, bal) in &self.balances {
            writeln!(out, "{id} {bal}").unwrap();
        }
        writeln!(out, "total_supply {}", self.total_supply).unwrap();
        out
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let mut ledger = Ledger::new();
        let mut declared = None;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (key, value) = line
                .split_once(' ')
                .ok_or_else(|| Error::Malformed(format!("ledger line `{line}`")))?;
            let value: u64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Malformed(format!("ledger amount in `{line}`")))?;
            if key == "total_supply" {
                declared = Some(value);
            } else {
                let id: u64 = key
                    .parse()
                    .map_err(|_| Error::Malformed(format!("ledger account in `{line}`")))?;
                ledger.mint(NodeId(id), value);
            }
        }
        match declared {
            Some(total) if total == ledger.total_supply => Ok(ledger),
            Some(total) => Err(Error::Malformed(format!(
                "declared total_supply {total} but balances sum to {}",
                ledger.total_supply
            ))),
            None => Err(Error::Malformed("missing total_supply line".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transfer_conserves_and_rejects_overdraft() {
        let mut l = Ledger::new();
        l.mint(NodeId(1), 50);
        l.mint(NodeId(2), 10);
        l.transfer(NodeId(1), NodeId(3), 20).unwrap();
        assert_eq!(l.balance(NodeId(1)), 30);
        assert_eq!(l.balance(NodeId(3)), 20);
        assert_eq!(l.circulating(), 60);
        let err = l.transfer(NodeId(2), NodeId(1), 11).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientFunds {
                balance: 10,
                needed: 11,
                ..
            }
        ));
        assert_eq!(l.total_supply(), 60);
    }

    #[test]
    fn dump_is_sorted_and_parses_back() {
        let mut l = Ledger::new();
        l.mint(NodeId(10), 5);
        l.mint(NodeId(2), 7);
        let text = l.dump();
        assert_eq!(text, "2 7\n10 5\ntotal_supply 12\n");
        assert_eq!(Ledger::from_dump(&text).unwrap(), l);
        assert!(Ledger::from_dump("2 7\ntotal_supply 8\n").is_err());
    }
}
