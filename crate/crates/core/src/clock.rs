//! Time source used by the branch-and-bound limits and incumbent log.

/// Monotonic seconds since some fixed origin.
pub trait Clock {
    fn now(&self) -> f64;
}

/// A clock that never advances. With it, time limits never trigger and every
/// incumbent is stamped at zero, which keeps reports bit-for-bit reproducible.
#[derive(Debug, Default, Clone, Copy)]
pub struct FrozenClock;

impl Clock for FrozenClock {
    fn now(&self) -> f64 {
        0.0
    }
}

/// Wall clock backed by [`std::time::Instant`].
#[cfg(feature = "std")]
#[derive(Debug, Clone, Copy)]
pub struct StdClock {
    origin: std::time::Instant,
}

#[cfg(feature = "std")]
impl StdClock {
    pub fn new() -> Self {
        Self { origin: std::time::Instant::now() }
    }
}

#[cfg(feature = "std")]
impl Default for StdClock {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(feature = "std")]
impl Clock for StdClock {
    fn now(&self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }
}

/// A clock that advances by one unit on every reading. The solver reads the
/// clock a fixed number of times per node, so elapsed "time" becomes a
/// deterministic count of work. Limits are then measured in readings.
#[derive(Debug, Default)]
pub struct TickClock {
    ticks: core::cell::Cell<u64>,
}

impl TickClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ticks(&self) -> u64 {
        self.ticks.get()
    }
}

impl Clock for TickClock {
    fn now(&self) -> f64 {
        let t = self.ticks.get();
        self.ticks.set(t + 1);
        t as f64
    }
}
