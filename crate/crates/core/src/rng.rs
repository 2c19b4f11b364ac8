//! Counter-based random streams.
//!
//! Every draw in a simulation is a pure function of the master seed and a
//! stream id `(agent, step, lane)`. The generator underneath is Philox4x32-10:
//! the 64-bit master seed is the key, the stream id plus a block counter is the
//! 128-bit counter. Results therefore do not depend on scheduling, thread
//! count or the order in which agents are visited.

use rand_core::RngCore;

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

#[inline(always)]
fn philox_round(ctr: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let (hi0, lo0) = mulhilo(PHILOX_M0, ctr[0]);
    let (hi1, lo1) = mulhilo(PHILOX_M1, ctr[2]);
    [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0]
}

/// The Philox4x32 bijection with 10 rounds.
pub fn philox4x32_10(mut ctr: [u32; 4], mut key: [u32; 2]) -> [u32; 4] {
    ctr = philox_round(ctr, key);
    for _ in 1..10 {
        key[0] = key[0].wrapping_add(PHILOX_W0);
        key[1] = key[1].wrapping_add(PHILOX_W1);
        ctr = philox_round(ctr, key);
    }
    ctr
}

/// Separates independent uses of the same `(agent, step)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lane(pub u32);

impl Lane {
    /// Return coefficient draws.
    pub const ALPHA: Lane = Lane(0);
    /// Bankruptcy replacement draws.
    pub const REPLACEMENT: Lane = Lane(1);
    /// Initial-condition draws.
    pub const INITIAL: Lane = Lane(2);
    /// Free for analysis code (theory checks, synthetic fixtures).
    pub const AUXILIARY: Lane = Lane(3);
}

/// Identifies one independent stream under a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub agent: u32,
    pub step: u32,
    pub lane: Lane,
}

/// A reproducible random stream keyed on `(master_seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    key: [u32; 2],
    ctr: [u32; 4],
    buf: [u32; 4],
    pos: usize,
}

impl RngStream {
    pub fn new(master_seed: u64, id: StreamId) -> Self {
        RngStream {
            key: [master_seed as u32, (master_seed >> 32) as u32],
            ctr: [0, id.lane.0, id.step, id.agent],
            buf: [0; 4],
            pos: 4,
        }
    }

    /// Shorthand for `RngStream::new(seed, StreamId { agent, step, lane })`.
    pub fn for_agent(master_seed: u64, agent: u32, step: u32, lane: Lane) -> Self {
        Self::new(master_seed, StreamId { agent, step, lane })
    }

    pub fn master_seed(&self) -> u64 {
        u64::from(self.key[0]) | (u64::from(self.key[1]) << 32)
    }

    pub fn stream_id(&self) -> StreamId {
        StreamId {
            agent: self.ctr[3],
            step: self.ctr[2],
            lane: Lane(self.ctr[1]),
        }
    }

    #[inline]
    fn refill(&mut self) {
        self.buf = philox4x32_10(self.ctr, self.key);
        self.ctr[0] = self.ctr[0].wrapping_add(1);
        self.pos = 0;
    }

    /// Uniform on the open-closed interval (0, 1].
    #[inline]
    pub fn uniform_open_closed(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.next_u64() >> 11) + 1) as f64 * SCALE
    }

    /// Uniform on [0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// Uniform index in `0..n` by Lemire's widening multiply with rejection.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be nonempty");
        let n = n as u64;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(n);
            let lo = m as u64;
            if lo >= n.wrapping_neg() % n {
                return (m >> 64) as usize;
            }
        }
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        if self.pos == 4 {
            self.refill();
        }
        let v = self.buf[self.pos];
        self.pos += 1;
        v
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        let lo = self.next_u32();
        let hi = self.next_u32();
        u64::from(lo) | (u64::from(hi) << 32)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(4) {
            let v = self.next_u32().to_le_bytes();
            chunk.copy_from_slice(&v[..chunk.len()]);
        }
    }
}
