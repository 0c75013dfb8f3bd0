//! Bessel J_n tables and the Airy function Ai.
//!
//! The driven-rate kernels need J_n(x) at every order up to somewhat past the
//! turning point n = x, for x as large as a few tens of thousands, and they
//! revisit the same x constantly during amplitude and detuning scans. Tables
//! come from one downward-recurrence pass per argument and are shared through
//! a bounded cache. Ai backs the large-order uniform approximation
//! J_n(x) = (2/x)^(1/3) Ai((2/x)^(1/3) (n - x)) near the turning point.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::Error;

/// Smallest top order that keeps every order left out of a table negligible:
/// past the turning point n = x the values decay on the scale x^(1/3), and
/// twelve of those scales push them below 1e-17.
pub fn min_orders(x: f64) -> usize {
    x.ceil() as usize + 12 * (x.cbrt().ceil() as usize) + 20
}

/// J_0(x)..J_{n_max}(x) for one nonnegative argument.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselTable {
    x: f64,
    values: Vec<f64>,
}

impl BesselTable {
    pub fn x(&self) -> f64 {
        self.x
    }

    /// Highest tabulated order.
    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    /// J_n(x). Orders beyond the table read as 0; the table-length rule keeps
    /// their true magnitude below 1e-17.
    #[inline]
    pub fn j(&self, n: usize) -> f64 {
        self.values.get(n).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// J_0^2 + 2 sum_{n>=1} J_n^2, pinned to 1 by the normalization.
    pub fn sum_rule(&self) -> f64 {
        let mut s = self.values[0] * self.values[0];
        for v in &self.values[1..] {
            s += 2.0 * v * v;
        }
        s
    }
}

/// Tabulate J_n(x) for n = 0..=max(n_max, min_orders(x)).
///
/// Downward Miller recurrence from a start order safely above the turning
/// point, with overflow rescaling, normalized through the sum rule
/// J_0^2 + 2 sum J_n^2 = 1. Absolute accuracy is far better than the 1e-10
/// the rate sums need.
pub fn bessel_j_array(x: f64, n_max: usize) -> Result<BesselTable, Error> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!(
            "bessel argument must be finite and nonnegative, got {x}"
        )));
    }
    if x > 1.0e6 {
        return Err(Error::Domain(format!(
            "bessel argument {x} exceeds the tabulation limit 1e6"
        )));
    }
    let len = n_max.max(min_orders(x)) + 1;
    let values = if x == 0.0 {
        let mut v = vec![0.0; len];
        v[0] = 1.0;
        v
    } else if x < 0.05 {
        bessel_series(x, len)
    } else {
        bessel_miller(x, len)?
    };
    Ok(BesselTable { x, values })
}

/// Ascending power series, used only for tiny arguments where it converges in
/// a few terms and the recurrence's step ratio 2n/x would be enormous.
fn bessel_series(x: f64, len: usize) -> Vec<f64> {
    let half = 0.5 * x;
    let u = half * half;
    let mut values = vec![0.0; len];
    let mut lead = 1.0;
    for (n, slot) in values.iter_mut().enumerate() {
        if n > 0 {
            lead *= half / n as f64;
            if lead == 0.0 {
                break;
            }
        }
        let mut term = lead;
        let mut sum = term;
        let mut k = 0.0;
        while term.abs() > sum.abs() * 1e-18 && k < 40.0 {
            term *= -u / ((k + 1.0) * (k + 1.0 + n as f64));
            sum += term;
            k += 1.0;
        }
        *slot = sum;
    }
    values
}

fn bessel_miller(x: f64, len: usize) -> Result<Vec<f64>, Error> {
    const BIG: f64 = 1.0e140;
    const SHRINK: f64 = 1.0e-140;

    let start = len + 14;
    let mut values = vec![0.0; len];
    let mut jp = 0.0_f64;
    let mut jc = 1.0e-30_f64;
    let mut norm = 0.0_f64;

    for n in (1..=start).rev() {
        let jm = (2.0 * n as f64 / x) * jc - jp;
        jp = jc;
        jc = jm;
        if jc.abs() > BIG {
            jc *= SHRINK;
            jp *= SHRINK;
            norm *= SHRINK * SHRINK;
            let idx = (n - 1).min(len);
            for v in values[idx..].iter_mut() {
                *v *= SHRINK;
            }
        }
        let idx = n - 1;
        if idx < len {
            values[idx] = jc;
        }
        norm += if idx == 0 { jc * jc } else { 2.0 * jc * jc };
    }

    if !norm.is_finite() || norm <= 0.0 {
        return Err(Error::Compute(format!(
            "bessel normalization failed at x = {x}: sum of squares {norm}"
        )));
    }
    // The start order sits above the turning point, where every true J_n is
    // positive, so the Miller sequence carries a positive overall constant.
    let scale = 1.0 / norm.sqrt();
    for v in values.iter_mut() {
        *v *= scale;
    }
    Ok(values)
}

/// Large-order uniform approximation J_n(x) ~ (2/x)^(1/3) Ai((2/x)^(1/3)(n - x)),
/// good near the turning point n ~ x.
pub fn bessel_uniform_approx(n: usize, x: f64) -> Result<f64, Error> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "uniform approximation needs a positive argument, got {x}"
        )));
    }
    let c = (2.0 / x).cbrt();
    Ok(c * airy_ai(c * (n as f64 - x))?)
}

/// Bounded LRU cache of Bessel tables keyed by the argument's bit pattern.
///
/// Amplitude sweeps at fixed frequency hit the same handful of arguments for
/// every grid cell; recomputing the table would dominate the sweep cost.
/// Concurrent callers always receive values identical to the uncached
/// computation.
pub struct BesselCache {
    capacity: usize,
    inner: Mutex<CacheInner>,
}

#[derive(Default)]
struct CacheInner {
    map: HashMap<u64, Arc<BesselTable>>,
    order: VecDeque<u64>,
}

impl BesselCache {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            inner: Mutex::new(CacheInner::default()),
        }
    }

    /// Table for this argument at the default length, computed on a miss and
    /// shared thereafter.
    pub fn table(&self, x: f64) -> Result<Arc<BesselTable>, Error> {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::Domain(format!(
                "bessel argument must be finite and nonnegative, got {x}"
            )));
        }
        let key = if x == 0.0 { 0.0_f64 } else { x }.to_bits();
        {
            let mut inner = self.inner.lock().unwrap();
            if let Some(t) = inner.map.get(&key) {
                let t = Arc::clone(t);
                inner.order.retain(|k| *k != key);
                inner.order.push_back(key);
                return Ok(t);
            }
        }

        // Compute outside the lock; under a race the first insert wins so
        // every caller sees one shared table.
        let fresh = Arc::new(bessel_j_array(x, 1)?);
        let mut inner = self.inner.lock().unwrap();
        let out = Arc::clone(inner.map.entry(key).or_insert(fresh));
        inner.order.retain(|k| *k != key);
        inner.order.push_back(key);
        while inner.order.len() > self.capacity {
            if let Some(old) = inner.order.pop_front() {
                inner.map.remove(&old);
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Process-wide cache shared by the rate kernels.
pub fn shared_cache() -> &'static BesselCache {
    static CACHE: OnceLock<BesselCache> = OnceLock::new();
    CACHE.get_or_init(|| BesselCache::new(64))
}

const AI_ZERO: f64 = 0.35502805388781724;
const AIP_ZERO: f64 = -0.2588194037928068;

/// Airy function Ai on the real line.
///
/// Maclaurin series on the central interval, the decaying asymptotic
/// expansion (DLMF 9.7.5) for large positive z, and the oscillatory expansion
/// (DLMF 9.7.9) for large negative z. Absolute accuracy a few times 1e-12 or
/// better everywhere on [-20, 10], limited by series cancellation near the
/// regime switches.
pub fn airy_ai(z: f64) -> Result<f64, Error> {
    if !z.is_finite() {
        return Err(Error::Domain(format!(
            "airy argument must be finite, got {z}"
        )));
    }
    Ok(if z >= 5.5 {
        airy_decaying(z)
    } else if z > -7.25 {
        airy_maclaurin(z)
    } else {
        airy_oscillatory(z)
    })
}

fn airy_maclaurin(z: f64) -> f64 {
    let z3 = z * z * z;
    let mut f_term = 1.0;
    let mut f_sum = 1.0;
    let mut g_term = z;
    let mut g_sum = z;
    let mut k = 0.0;
    while k < 120.0 {
        f_term *= z3 / ((3.0 * k + 2.0) * (3.0 * k + 3.0));
        g_term *= z3 / ((3.0 * k + 3.0) * (3.0 * k + 4.0));
        f_sum += f_term;
        g_sum += g_term;
        k += 1.0;
        if f_term.abs().max(g_term.abs()) < 1e-17 * (f_sum.abs() + g_sum.abs() + 1.0) {
            break;
        }
    }
    AI_ZERO * f_sum + AIP_ZERO * g_sum
}

/// Next term ratio of the u_k asymptotic coefficients (DLMF 9.7.2).
fn airy_u_step(k: f64) -> f64 {
    (3.0 * k + 2.5) * (3.0 * k + 1.5) * (3.0 * k + 0.5) / (54.0 * (k + 1.0) * (k + 0.5))
}

fn airy_decaying(z: f64) -> f64 {
    let xi = 2.0 / 3.0 * z.powf(1.5);
    if xi > 700.0 {
        return 0.0;
    }
    let pre = 0.5 * (-xi).exp() / (PI.sqrt() * z.powf(0.25));
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut k = 0.0;
    while k < 60.0 {
        let next = term * airy_u_step(k) / xi;
        if next >= term {
            break;
        }
        term = next;
        k += 1.0;
        sum += if (k as u64) % 2 == 1 { -term } else { term };
        if term < 1e-18 * sum.abs() {
            break;
        }
    }
    pre * sum
}

fn airy_oscillatory(z: f64) -> f64 {
    let t = -z;
    let xi = 2.0 / 3.0 * t.powf(1.5);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut k = 0usize;
    while k < 60 {
        let next = term * airy_u_step(k as f64) / xi;
        if next >= term {
            break;
        }
        term = next;
        k += 1;
        let signed = if (k / 2).is_multiple_of(2) {
            term
        } else {
            -term
        };
        if k.is_multiple_of(2) {
            p += signed;
        } else {
            q += signed;
        }
        if term < 1e-18 {
            break;
        }
    }
    let phase = xi - FRAC_PI_4;
    (phase.cos() * p + phase.sin() * q) / (PI.sqrt() * t.powf(0.25))
}
