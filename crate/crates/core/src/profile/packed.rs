use crate::time::{Time, INFINITY};

pub const LEG_BITS: u32 = 5;
pub const MAX_LEGS: u32 = (1 << LEG_BITS) - 1;
/// Largest arrival time that still fits next to the leg counter without
/// colliding with the infinite value.
pub const MAX_PACKED_ARRIVAL: Time = (1 << (32 - LEG_BITS)) - 2;

/// 32-bit timestamp carrying a leg counter between the high and low
/// `round_bits` of the arrival time. Integer order is lexicographic on
/// (rounded arrival, legs, exact arrival).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PackedLayout {
    round_bits: u32,
}

impl PackedLayout {
    pub fn new(round_bits: u32) -> Option<Self> {
        (round_bits <= 32 - LEG_BITS).then_some(PackedLayout { round_bits })
    }

    pub fn round_bits(&self) -> u32 {
        self.round_bits
    }

    #[inline]
    fn low_mask(&self) -> u32 {
        (1u32 << self.round_bits) - 1
    }

    /// `arr` must not exceed [`MAX_PACKED_ARRIVAL`] and `legs` must fit in five bits.
    #[inline]
    pub fn pack(&self, arr: Time, legs: u32) -> u32 {
        if arr == INFINITY {
            return INFINITY;
        }
        debug_assert!(arr <= MAX_PACKED_ARRIVAL && legs <= MAX_LEGS);
        let r = self.round_bits;
        (((arr as u64 >> r) << (r + LEG_BITS)) | ((legs as u64) << r) | (arr & self.low_mask()) as u64) as u32
    }

    #[inline]
    pub fn arrival(&self, p: u32) -> Time {
        if p == INFINITY {
            return INFINITY;
        }
        let r = self.round_bits;
        (((p as u64 >> (r + LEG_BITS)) << r) as u32) | (p & self.low_mask())
    }

    #[inline]
    pub fn legs(&self, p: u32) -> u32 {
        (p >> self.round_bits) & MAX_LEGS
    }

    /// One more leg; saturates at the counter's maximum.
    #[inline]
    pub fn add_leg(&self, p: u32) -> u32 {
        if p == INFINITY || self.legs(p) == MAX_LEGS {
            p
        } else {
            p + (1 << self.round_bits)
        }
    }

    /// Adds a duration to the arrival part, keeping the leg counter.
    #[inline]
    pub fn delay(&self, p: u32, dur: Time) -> u32 {
        if p == INFINITY {
            return INFINITY;
        }
        let arr = self.arrival(p).saturating_add(dur);
        if arr > MAX_PACKED_ARRIVAL {
            INFINITY
        } else {
            self.pack(arr, self.legs(p))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn round_trip_extremes() {
        for r in [0, 8, 27] {
            let l = PackedLayout::new(r).unwrap();
            for (a, g) in [(0, 0), (MAX_PACKED_ARRIVAL, MAX_LEGS), (12345, 3)] {
                let p = l.pack(a, g);
                assert_eq!((l.arrival(p), l.legs(p)), (a, g));
            }
            assert_eq!(l.pack(INFINITY, 2), INFINITY);
            assert_eq!(l.add_leg(l.pack(5, MAX_LEGS)), l.pack(5, MAX_LEGS));
        }
        assert!(PackedLayout::new(28).is_none());
    }

    proptest! {
        #[test]
        fn order_is_lexicographic(
            r in 0u32..=12,
            a1 in 0..=MAX_PACKED_ARRIVAL, g1 in 0..=MAX_LEGS,
            a2 in 0..=MAX_PACKED_ARRIVAL, g2 in 0..=MAX_LEGS,
        ) {
            let l = PackedLayout::new(r).unwrap();
            let key = |a: u32, g: u32| (a >> r, g, a);
            prop_assert_eq!(l.pack(a1, g1).cmp(&l.pack(a2, g2)), key(a1, g1).cmp(&key(a2, g2)));
            prop_assert_eq!(l.arrival(l.pack(a1, g1)), a1);
            prop_assert_eq!(l.legs(l.pack(a1, g1)), g1);
        }
    }
}
