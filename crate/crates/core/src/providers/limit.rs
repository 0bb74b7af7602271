use std::sync::{Condvar, Mutex};
use std::time::Duration;

use super::ProviderError;

/// Counting semaphore bounding in-flight calls to one provider.
#[derive(Debug)]
pub struct ConcurrencyCap {
    max: usize,
    in_flight: Mutex<usize>,
    freed: Condvar,
}

impl ConcurrencyCap {
    pub fn new(max: usize) -> Self {
        ConcurrencyCap { max: max.max(1), in_flight: Mutex::new(0), freed: Condvar::new() }
    }

    /// Run `f` once a slot is free.
    pub fn run<T>(&self, f: impl FnOnce() -> T) -> T {
        {
            let mut n = self.in_flight.lock().unwrap();
            while *n >= self.max {
                n = self.freed.wait(n).unwrap();
            }
            *n += 1;
        }
        struct Release<'a>(&'a ConcurrencyCap);
        impl Drop for Release<'_> {
            fn drop(&mut self) {
                *self.0.in_flight.lock().unwrap() -= 1;
                self.0.freed.notify_one();
            }
        }
        let _guard = Release(self);
        f()
    }
}

/// Retry with exponential backoff on transient provider errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_attempts: 3, base_delay: Duration::from_millis(500) }
    }
}

impl RetryPolicy {
    pub fn immediate(max_attempts: u32) -> Self {
        RetryPolicy { max_attempts, base_delay: Duration::ZERO }
    }

    pub fn delay_for(&self, attempt: u32) -> Duration {
        self.base_delay.saturating_mul(1u32 << attempt.min(16))
    }

    /// Call `f` until it succeeds, fails permanently, or attempts run out.
    pub fn run<T>(&self, mut f: impl FnMut() -> Result<T, ProviderError>) -> Result<T, ProviderError> {
        let attempts = self.max_attempts.max(1);
        let mut attempt = 0;
        loop {
            match f() {
                Err(e) if e.is_transient() && attempt + 1 < attempts => {
                    tracing::debug!(attempt, error = %e, "retrying provider call");
                    std::thread::sleep(self.delay_for(attempt));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}
