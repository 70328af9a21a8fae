use std::fmt;

use super::{Circuit, Gate};
use crate::error::{Error, Result};

/// Most players a bitmask coalition can hold.
pub const MAX_PLAYERS: usize = 63;

/// A set of players encoded as a bitmask; bit `i` is player `i` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Coalition(pub u64);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn grand(players: usize) -> Self {
        debug_assert!(players <= MAX_PLAYERS);
        Coalition(if players == 0 {
            0
        } else {
            u64::MAX >> (64 - players)
        })
    }

    pub fn from_players(players: impl IntoIterator<Item = usize>) -> Self {
        Coalition(players.into_iter().fold(0, |m, p| m | (1 << p)))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn contains(self, player: usize) -> bool {
        self.0 >> player & 1 == 1
    }

    pub fn with(self, player: usize) -> Self {
        Coalition(self.0 | 1 << player)
    }

    pub fn without(self, player: usize) -> Self {
        Coalition(self.0 & !(1 << player))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Players in ascending order.
    pub fn players(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let p = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(p)
        })
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

/// A circuit whose gates are split into players (`active`) and an
/// always-present backbone (`remaining`).
#[derive(Debug, Clone)]
pub struct CoalitionGame {
    circuit: Circuit,
    active: Vec<usize>,
    remaining: Vec<usize>,
    /// For each gate position (0-based), the player it belongs to.
    player_of: Vec<Option<usize>>,
}

impl CoalitionGame {
    /// `active` lists 1-based gate indices; their order defines player numbering.
    pub fn new(circuit: Circuit, active: Vec<usize>) -> Result<Self> {
        let g = circuit.len();
        if active.is_empty() {
            return Err(Error::Config("active gate set must be non-empty".into()));
        }
        if active.len() > MAX_PLAYERS {
            return Err(Error::ResourceCap(format!(
                "{} players exceed the {MAX_PLAYERS}-player bitmask limit",
                active.len()
            )));
        }
        let mut player_of = vec![None; g];
        for (player, &gate) in active.iter().enumerate() {
            if gate == 0 || gate > g {
                return Err(Error::Config(format!("active gate {gate} outside 1..={g}")));
            }
            if player_of[gate - 1].replace(player).is_some() {
                return Err(Error::Config(format!("active gate {gate} listed twice")));
            }
        }
        let remaining = (1..=g).filter(|&i| player_of[i - 1].is_none()).collect();
        Ok(CoalitionGame {
            circuit,
            active,
            remaining,
            player_of,
        })
    }

    /// Every gate is a player.
    pub fn all_active(circuit: Circuit) -> Result<Self> {
        let active = (1..=circuit.len()).collect();
        CoalitionGame::new(circuit, active)
    }

    /// Every gate not listed in `remaining` is a player, in circuit order.
    pub fn with_remaining(circuit: Circuit, remaining: &[usize]) -> Result<Self> {
        if let Some(&bad) = remaining.iter().find(|&&r| r == 0 || r > circuit.len()) {
            return Err(Error::Config(format!(
                "remaining gate {bad} outside 1..={}",
                circuit.len()
            )));
        }
        let active = (1..=circuit.len())
            .filter(|i| !remaining.contains(i))
            .collect();
        CoalitionGame::new(circuit, active)
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn players(&self) -> usize {
        self.active.len()
    }

    /// Active gate indices `A_1 … A_N` (1-based).
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Remaining gate indices (1-based, ascending).
    pub fn remaining(&self) -> &[usize] {
        &self.remaining
    }

    /// Gate index of player `player` (0-based player, 1-based gate).
    pub fn gate_index(&self, player: usize) -> usize {
        self.active[player]
    }

    pub fn gate_label(&self, player: usize) -> &'static str {
        self.circuit.gates()[self.active[player] - 1].kind.label()
    }

    pub fn grand(&self) -> Coalition {
        Coalition::grand(self.players())
    }

    /// Gates of the coalition plus the remaining gates, in original order.
    pub fn subcircuit(&self, coalition: Coalition) -> Circuit {
        let gates: Vec<Gate> = self
            .circuit
            .gates()
            .iter()
            .zip(&self.player_of)
            .filter(|(_, owner)| owner.is_none_or(|p| coalition.contains(p)))
            .map(|(g, _)| g.clone())
            .collect();
        self.circuit.with_gates(gates)
    }

    /// 1-based gate indices present in the coalition's subcircuit.
    pub fn subcircuit_indices(&self, coalition: Coalition) -> Vec<usize> {
        self.player_of
            .iter()
            .enumerate()
            .filter(|(_, owner)| owner.is_none_or(|p| coalition.contains(p)))
            .map(|(i, _)| i + 1)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{GateKind, ParamExpr};
    use proptest::prelude::*;

    fn six_gate_circuit() -> Circuit {
        let mut gates = vec![Gate::rotation(GateKind::RZ, &[0], ParamExpr::feature(0))];
        for i in 0..5 {
            gates.push(Gate::rotation(GateKind::RY, &[i % 4], ParamExpr::theta(i)));
        }
        Circuit::from_gates(4, 5, 1, gates).unwrap()
    }

    #[test]
    fn figure_four_coalition() {
        let game = CoalitionGame::new(six_gate_circuit(), vec![2, 3, 4, 5, 6]).unwrap();
        assert_eq!(game.remaining(), &[1]);
        // players for gates 2 and 5 are 0 and 3
        let s = Coalition::from_players([0, 3]);
        assert_eq!(game.subcircuit_indices(s), vec![1, 2, 5]);
        let sub = game.subcircuit(s);
        assert_eq!(sub.len(), 3);
        assert_eq!(sub.gates()[2], game.circuit().gates()[4]);
    }

    #[test]
    fn grand_and_empty() {
        let game = CoalitionGame::all_active(six_gate_circuit()).unwrap();
        assert_eq!(&game.subcircuit(game.grand()), game.circuit());
        let empty = game.subcircuit(Coalition::EMPTY);
        assert!(empty.is_empty());
        assert_eq!(empty.qubits(), 4);
        assert_eq!(empty.theta_dim(), 5);
    }

    #[test]
    fn invalid_active_sets() {
        assert!(CoalitionGame::new(six_gate_circuit(), vec![]).is_err());
        assert!(CoalitionGame::new(six_gate_circuit(), vec![7]).is_err());
        assert!(CoalitionGame::new(six_gate_circuit(), vec![2, 2]).is_err());
        assert!(CoalitionGame::with_remaining(six_gate_circuit(), &[0]).is_err());
    }

    #[test]
    fn coalition_bits() {
        let s = Coalition::from_players([1, 4]);
        assert_eq!(s.players().collect::<Vec<_>>(), vec![1, 4]);
        assert!(s.contains(4) && !s.contains(0));
        assert_eq!(s.with(0).len(), 3);
        assert_eq!(s.without(4), Coalition(2));
        assert_eq!(Coalition::grand(63).len(), 63);
        assert_eq!(Coalition::grand(0), Coalition::EMPTY);
    }

    fn wide_circuit(g: usize) -> Circuit {
        let gates =
            (0..g).map(|i| Gate::rotation(GateKind::RX, &[i % 3], ParamExpr::constant(i as f64)));
        Circuit::from_gates(3, 0, 0, gates).unwrap()
    }

    proptest! {
        #[test]
        fn subcircuit_is_ordered_subsequence_containing_remaining(
            g in 1usize..16,
            active_bits in any::<u16>(),
            coalition_bits in any::<u64>(),
        ) {
            let circuit = wide_circuit(g);
            let mut active: Vec<usize> = (1..=g).filter(|i| active_bits >> (i - 1) & 1 == 1).collect();
            if active.is_empty() { active.push(1); }
            let game = CoalitionGame::new(circuit, active).unwrap();
            let s = Coalition(coalition_bits & game.grand().mask());
            let idx = game.subcircuit_indices(s);
            prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
            for r in game.remaining() { prop_assert!(idx.contains(r)); }
            prop_assert_eq!(idx.len(), game.remaining().len() + s.len());
            let sub = game.subcircuit(s);
            for (gate, &i) in sub.gates().iter().zip(&idx) {
                prop_assert_eq!(gate, game.circuit().gate(i).unwrap());
            }
        }
    }

    #[test]
    fn subcircuit_order_exhaustive_n12() {
        let game = CoalitionGame::all_active(wide_circuit(12)).unwrap();
        for mask in 0..(1u64 << 12) {
            let idx = game.subcircuit_indices(Coalition(mask));
            assert!(idx.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(idx.len(), mask.count_ones() as usize);
        }
    }
}
