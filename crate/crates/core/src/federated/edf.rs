//! Uniprocessor EDF tests for sequential implicit-deadline tasks.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::wceto::Cycles;

/// A sequential task in the integer time model of the non-preemptive test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct IntTask {
    pub wcet: u64,
    pub period: u64,
}

impl IntTask {
    /// Rounds the WCET up and the period down, which can only make the test stricter.
    pub fn pessimistic(wcet: Cycles, period: Cycles) -> Self {
        IntTask { wcet: wcet.ceil().max(0.0) as u64, period: period.floor().max(0.0) as u64 }
    }
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// Preemptive EDF: `Σ C/T ≤ 1`, evaluated exactly on the binary values.
pub fn edf_p_test(tasks: &[(Cycles, Cycles)]) -> bool {
    let mut u = BigRational::zero();
    for &(c, t) in tasks {
        if t.is_nan() || t <= 0.0 {
            return false;
        }
        u += exact(c) / exact(t);
    }
    u <= BigRational::one()
}

fn int_utilization_ok(tasks: &[IntTask]) -> bool {
    let mut u = BigRational::zero();
    for t in tasks {
        u += BigRational::new(BigInt::from(t.wcet), BigInt::from(t.period));
    }
    u <= BigRational::one()
}

/// Non-preemptive EDF for sporadic tasks with implicit deadlines.
///
/// Requires `U ≤ 1` and, with tasks sorted by period, for every `i ≥ 2`
/// and every `L` with `T_1 < L < T_i`:
/// `L ≥ C_i + Σ_{j<i} ⌊(L−1)/T_j⌋·C_j`.
/// The right side only steps at `L = k·T_j + 1`, so those points and
/// `T_1 + 1` suffice. Points beyond `(C_i − U')/(1 − U')`, with `U'` the
/// utilization of the shorter-period tasks, satisfy the inequality outright.
pub fn edf_np_test(tasks: &[IntTask]) -> bool {
    if tasks.iter().any(|t| t.period == 0) {
        return false;
    }
    if tasks.is_empty() {
        return true;
    }
    if !int_utilization_ok(tasks) {
        return false;
    }
    let mut sorted = tasks.to_vec();
    sorted.sort_by_key(|t| (t.period, t.wcet));
    let t1 = sorted[0].period;
    for i in 1..sorted.len() {
        let (ci, ti) = (sorted[i].wcet, sorted[i].period);
        let shorter = &sorted[..i];
        let u_prime: f64 = shorter.iter().map(|t| t.wcet as f64 / t.period as f64).sum();
        let mut hi = ti;
        if u_prime < 1.0 {
            let bound = (ci as f64 - u_prime) / (1.0 - u_prime);
            // One unit of margin absorbs rounding in the bound.
            hi = hi.min(bound.max(0.0).ceil() as u64 + 1);
        }
        let demand = |l: u64| ci + shorter.iter().map(|t| (l - 1) / t.period * t.wcet).sum::<u64>();
        if t1 + 1 < hi && t1 + 1 < demand(t1 + 1) {
            return false;
        }
        for t in shorter {
            let mut k = t1 / t.period + 1;
            while k * t.period + 1 < hi {
                let l = k * t.period + 1;
                if l > t1 && l < demand(l) {
                    return false;
                }
                k += 1;
            }
        }
    }
    true
}

/// Synchronous-release non-preemptive EDF over one hyperperiod.
///
/// Returns `false` on the first deadline miss. Ties on absolute deadline go
/// to the lower task index. Test oracle for [`edf_np_test`].
pub fn simulate_np_edf(tasks: &[IntTask]) -> bool {
    let hyper = tasks.iter().fold(1u64, |h, t| lcm(h, t.period.max(1)));
    // (release, deadline, task, wcet) for every job released in [0, H).
    let mut jobs: Vec<(u64, u64, usize, u64)> = Vec::new();
    for (i, t) in tasks.iter().enumerate() {
        if t.period == 0 {
            return false;
        }
        let mut r = 0;
        while r < hyper {
            jobs.push((r, r + t.period, i, t.wcet));
            r += t.period;
        }
    }
    jobs.sort();
    let mut now = 0u64;
    let mut next = 0;
    let mut pending: Vec<(u64, usize, u64)> = Vec::new();
    while next < jobs.len() || !pending.is_empty() {
        while next < jobs.len() && jobs[next].0 <= now {
            let (_, d, i, c) = jobs[next];
            pending.push((d, i, c));
            next += 1;
        }
        if pending.is_empty() {
            now = jobs[next].0;
            continue;
        }
        let pick = (0..pending.len()).min_by_key(|&k| (pending[k].0, pending[k].1)).unwrap();
        let (d, _, c) = pending.swap_remove(pick);
        now += c;
        if now > d {
            return false;
        }
    }
    true
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}
