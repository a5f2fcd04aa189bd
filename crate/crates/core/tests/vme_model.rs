//! Random transaction sequences against a plain byte-array model of the bus.

use board_sim::vme::{
    BerrReason, Outcome, StatusWidth, VmeRam, VmeSlave, VmeTransaction, ADO_CYCLES, BERR_CYCLES,
    RMW_CYCLES, SINGLE_CYCLES,
};
use proptest::prelude::*;

const BASE: u32 = 0x0040_0000;
const WINDOW: u32 = 0x400;

struct Model {
    bytes: Vec<u8>,
    latch: Option<u32>,
}

impl Model {
    fn word(&self, o: usize) -> u16 {
        u16::from_be_bytes([self.bytes[o], self.bytes[o + 1]])
    }

    fn set(&mut self, o: usize, w: u16) {
        self.bytes[o..o + 2].copy_from_slice(&w.to_be_bytes());
    }

    // Expected (data, cycles), or None for a bus error.
    fn apply(&mut self, t: &VmeTransaction) -> Option<(Vec<u16>, u32)> {
        let inside = |a: u32| (BASE..BASE + WINDOW).contains(&a);
        let hit = match t {
            VmeTransaction::Ado { address } => {
                self.latch = inside(*address).then_some(*address);
                return self.latch.map(|_| (vec![], ADO_CYCLES));
            }
            VmeTransaction::Iack { .. } => unreachable!(),
            _ => self.latch.take() == t.address(),
        };
        let (data, cycles) = match *t {
            VmeTransaction::D16Read { address } if inside(address) && address % 2 == 0 => {
                (vec![self.word((address - BASE) as usize)], SINGLE_CYCLES)
            }
            VmeTransaction::D16Write { address, data } if inside(address) && address % 2 == 0 => {
                self.set((address - BASE) as usize, data);
                (vec![], SINGLE_CYCLES)
            }
            VmeTransaction::D08Read { address } if inside(address) => (
                vec![self.bytes[(address - BASE) as usize] as u16],
                SINGLE_CYCLES,
            ),
            VmeTransaction::D08Write { address, data } if inside(address) => {
                self.bytes[(address - BASE) as usize] = data;
                (vec![], SINGLE_CYCLES)
            }
            VmeTransaction::Rmw { address, and, or } if inside(address) && address % 2 == 0 => {
                let o = (address - BASE) as usize;
                let pre = self.word(o);
                self.set(o, (pre & and) | or);
                (vec![pre], RMW_CYCLES)
            }
            VmeTransaction::BltRead { address, count } => {
                let o = self.block(address, count)?;
                (
                    (0..count).map(|i| self.word(o + 2 * i)).collect(),
                    2 + 2 * count as u32,
                )
            }
            VmeTransaction::BltWrite { address, ref data } => {
                let o = self.block(address, data.len())?;
                for (i, &w) in data.iter().enumerate() {
                    self.set(o + 2 * i, w);
                }
                (vec![], 2 + 2 * data.len() as u32)
            }
            _ => return None,
        };
        Some((data, cycles - hit as u32))
    }

    fn block(&self, address: u32, count: usize) -> Option<usize> {
        let last = address.checked_add(2 * count as u32)?.checked_sub(1)?;
        let ok = count > 0
            && address.is_multiple_of(2)
            && address >= BASE
            && last < BASE + WINDOW
            && address / 256 == last / 256;
        ok.then(|| (address - BASE) as usize)
    }
}

fn address() -> impl Strategy<Value = u32> {
    // Mostly inside the window, sometimes just outside either end.
    prop_oneof![
        8 => (0..WINDOW).prop_map(|o| BASE + o),
        1 => (0u32..16).prop_map(|o| BASE - 1 - o),
        1 => (0u32..16).prop_map(|o| BASE + WINDOW + o),
    ]
}

fn transaction() -> impl Strategy<Value = VmeTransaction> {
    prop_oneof![
        address().prop_map(|address| VmeTransaction::D16Read { address }),
        (address(), any::<u16>())
            .prop_map(|(address, data)| VmeTransaction::D16Write { address, data }),
        address().prop_map(|address| VmeTransaction::D08Read { address }),
        (address(), any::<u8>())
            .prop_map(|(address, data)| VmeTransaction::D08Write { address, data }),
        (address(), 0usize..40)
            .prop_map(|(address, count)| VmeTransaction::BltRead { address, count }),
        (address(), prop::collection::vec(any::<u16>(), 0..40))
            .prop_map(|(address, data)| VmeTransaction::BltWrite { address, data }),
        (address(), any::<u16>(), any::<u16>())
            .prop_map(|(address, and, or)| VmeTransaction::Rmw { address, and, or }),
        address().prop_map(|address| VmeTransaction::Ado { address }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn slave_matches_model(txns in prop::collection::vec(transaction(), 1..60)) {
        let mut bus = VmeSlave::new(BASE, WINDOW, VmeRam::new(WINDOW)).unwrap();
        let mut model = Model { bytes: vec![0; WINDOW as usize], latch: None };
        for t in &txns {
            let got = bus.execute(t);
            match model.apply(t) {
                Some((data, cycles)) => {
                    prop_assert_eq!(&got.outcome, &Outcome::Dtack(data), "{}", t);
                    prop_assert_eq!(got.cycles, cycles, "{}", t);
                }
                None => {
                    prop_assert!(matches!(got.outcome, Outcome::Berr(_)), "{} gave {:?}", t, got);
                    prop_assert_eq!(got.cycles, BERR_CYCLES);
                }
            }
        }
        let words: Vec<u16> = (0..WINDOW as usize / 2).map(|i| model.word(2 * i)).collect();
        prop_assert_eq!(bus.backing().words(), words.as_slice());
    }

    #[test]
    fn interrupts_are_single_depth(levels in prop::collection::vec((1u8..=7, any::<u8>()), 1..30)) {
        let mut bus = VmeSlave::new(BASE, WINDOW, VmeRam::new(WINDOW)).unwrap();
        let mut pending = [None; 7];
        for (level, id) in levels {
            let slot = &mut pending[level as usize - 1];
            let raised = bus.raise_interrupt(level, id as u16, StatusWidth::D08);
            prop_assert_eq!(raised.is_ok(), slot.is_none());
            if slot.is_none() {
                *slot = Some(id as u16);
            }
        }
        for level in 1..=7u8 {
            let r = bus.execute(&VmeTransaction::Iack { level });
            match pending[level as usize - 1] {
                Some(id) => prop_assert_eq!(r.outcome, Outcome::Dtack(vec![id])),
                None => prop_assert_eq!(r.outcome, Outcome::NoResponse),
            }
        }
    }
}

#[test]
fn blt_across_a_page_is_refused_untouched() {
    let mut bus = VmeSlave::new(BASE, WINDOW, VmeRam::new(WINDOW)).unwrap();
    let r = bus.execute(&VmeTransaction::BltWrite {
        address: BASE + 0xFE,
        data: vec![1, 2],
    });
    assert_eq!(
        r.outcome,
        Outcome::Berr(BerrReason::BlockBoundary {
            address: BASE + 0xFE,
            count: 2
        })
    );
    assert!(bus.backing().words().iter().all(|&w| w == 0));
}
