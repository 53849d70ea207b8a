//! In-process microbenchmarks: STREAM triad bandwidth and independent-FMA throughput.
//!
//! Only one benchmark runs at a time per process; concurrent callers block.

use std::hint::black_box;
use std::mem::MaybeUninit;
use std::str::FromStr;
use std::sync::{Barrier, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hwmodel::{self, Mode, PlatformSpec, Precision};

/// Triad scalar `q` in `a[i] = b[i] + q * c[i]`.
pub const TRIAD_SCALAR: f64 = 3.0;
/// Untimed passes before the timed repetitions.
pub const WARMUP_PASSES: u32 = 2;
pub const DEFAULT_REPETITIONS: u32 = 200;
/// Two reads and one write of 8 bytes.
pub const TRIAD_BYTES_PER_ELEMENT: u64 = 24;
pub const MIN_FMA_DURATION: f64 = 0.1;
/// Independent accumulator chains in the FMA kernel.
pub const FMA_CHAINS: usize = 12;
/// Environment variable capping benchmark thread counts.
pub const THREADS_ENV: &str = "PERFCHAR_THREADS";

static RUN_LOCK: Mutex<()> = Mutex::new(());

fn exclusive() -> MutexGuard<'static, ()> {
    RUN_LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

/// Hardware threads usable by a benchmark: available parallelism, capped by
/// `PERFCHAR_THREADS` when set.
pub fn max_threads() -> usize {
    let hw = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        Some(cap) if cap >= 1 => hw.min(cap),
        _ => hw,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pinning {
    /// Round-robin across sockets.
    Interleaved,
    /// Fill cores in id order.
    Compact,
    None,
}

impl FromStr for Pinning {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interleaved" => Ok(Pinning::Interleaved),
            "compact" => Ok(Pinning::Compact),
            "none" => Ok(Pinning::None),
            other => Err(Error::InvalidParameter(format!(
                "unknown pinning policy `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for Pinning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Pinning::Interleaved => "interleaved",
            Pinning::Compact => "compact",
            Pinning::None => "none",
        })
    }
}

fn socket_of(core: usize) -> usize {
    std::fs::read_to_string(format!(
        "/sys/devices/system/cpu/cpu{core}/topology/physical_package_id"
    ))
    .ok()
    .and_then(|s| s.trim().parse().ok())
    .unwrap_or(0)
}

/// Core ids for `threads` workers under `policy`, or `None` when affinity is
/// unavailable or not requested.
fn pin_plan(policy: Pinning, threads: usize) -> Option<Vec<core_affinity::CoreId>> {
    if policy == Pinning::None {
        return None;
    }
    let mut cores = core_affinity::get_core_ids()?;
    if cores.is_empty() {
        return None;
    }
    cores.sort_by_key(|c| c.id);
    if policy == Pinning::Interleaved {
        let mut sockets: std::collections::BTreeMap<usize, Vec<core_affinity::CoreId>> =
            Default::default();
        for c in cores {
            sockets.entry(socket_of(c.id)).or_default().push(c);
        }
        let lists: Vec<Vec<_>> = sockets.into_values().collect();
        let longest = lists.iter().map(Vec::len).max().unwrap_or(0);
        cores = (0..longest)
            .flat_map(|i| lists.iter().filter_map(move |l| l.get(i).copied()))
            .collect();
    }
    Some((0..threads).map(|t| cores[t % cores.len()]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriadConfig {
    /// 8-byte elements per array.
    pub elements: usize,
    pub threads: usize,
    pub repetitions: u32,
    pub pinning: Pinning,
}

impl TriadConfig {
    pub fn new(elements: usize, threads: usize) -> Self {
        TriadConfig {
            elements,
            threads,
            repetitions: DEFAULT_REPETITIONS,
            pinning: Pinning::Interleaved,
        }
    }

    pub fn validate(&self, spec: Option<&PlatformSpec>) -> Result<()> {
        if self.threads == 0 {
            return Err(Error::InvalidParameter("threads must be >= 1".into()));
        }
        let cap = max_threads();
        if self.threads > cap {
            return Err(Error::InvalidParameter(format!(
                "{} threads requested, host allows {cap}",
                self.threads
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter("repetitions must be >= 1".into()));
        }
        if self.elements < self.threads {
            return Err(Error::InvalidParameter(format!(
                "{} elements cannot be split over {} threads",
                self.elements, self.threads
            )));
        }
        if let Some(spec) = spec {
            let required = hwmodel::stream_min_elements(spec);
            if self.elements < required {
                return Err(Error::SizingViolation {
                    elements: self.elements,
                    required,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandwidthResult {
    /// Best repetition, GB/s.
    pub best: f64,
    /// Every timed repetition, GB/s, in execution order.
    pub per_repetition: Vec<f64>,
    pub threads: usize,
    pub elements: usize,
    pub pinning: Pinning,
    /// False when pinning was requested but affinity could not be set.
    pub pinned: bool,
    pub scalar: f64,
    pub warmup_passes: u32,
}

impl BandwidthResult {
    pub fn mean(&self) -> f64 {
        self.per_repetition.iter().sum::<f64>() / self.per_repetition.len() as f64
    }
}

fn alloc(elements: usize) -> Result<Vec<f64>> {
    let mut v = Vec::new();
    v.try_reserve_exact(elements).map_err(|e| {
        Error::Resource(format!(
            "cannot allocate {} MiB for a triad array: {e}",
            (elements * 8) >> 20
        ))
    })?;
    Ok(v)
}

fn init_b(i: usize) -> f64 {
    1.0 + (i % 1021) as f64 * 0.5
}

fn init_c(i: usize) -> f64 {
    0.25 + (i % 509) as f64 * 0.125
}

fn split_uninit<'a>(v: &'a mut Vec<f64>, bounds: &[usize]) -> Vec<&'a mut [MaybeUninit<f64>]> {
    let mut rest = &mut v.spare_capacity_mut()[..*bounds.last().unwrap()];
    let mut out = Vec::with_capacity(bounds.len() - 1);
    for w in bounds.windows(2) {
        let (head, tail) = rest.split_at_mut(w[1] - w[0]);
        out.push(head);
        rest = tail;
    }
    out
}

/// Initialize a chunk in place and view it as initialized.
fn touch(chunk: &mut [MaybeUninit<f64>], offset: usize, f: impl Fn(usize) -> f64) -> &mut [f64] {
    for (k, slot) in chunk.iter_mut().enumerate() {
        slot.write(f(offset + k));
    }
    // SAFETY: every element was written above
    unsafe { &mut *(chunk as *mut [MaybeUninit<f64>] as *mut [f64]) }
}

#[inline(never)]
fn triad(a: &mut [f64], b: &[f64], c: &[f64], q: f64) {
    for ((ai, bi), ci) in a.iter_mut().zip(b).zip(c) {
        *ai = bi + q * ci;
    }
}

/// STREAM triad over `config.threads` pinned workers. Each worker first-touches its
/// own chunk of the three arrays, then all workers run every pass between barriers.
pub fn run_stream_triad(
    config: &TriadConfig,
    spec: Option<&PlatformSpec>,
) -> Result<BandwidthResult> {
    config.validate(spec)?;
    let _guard = exclusive();
    let n = config.elements;
    let t = config.threads;
    let (mut a, mut b, mut c) = (alloc(n)?, alloc(n)?, alloc(n)?);
    let bounds: Vec<usize> = (0..=t).map(|k| k * n / t).collect();
    let plan = pin_plan(config.pinning, t);
    let passes = WARMUP_PASSES + config.repetitions;
    let start = Barrier::new(t + 1);
    let end = Barrier::new(t + 1);
    let q = TRIAD_SCALAR;
    let mut times = Vec::with_capacity(config.repetitions as usize);
    let mut pinned_all = plan.is_some();

    std::thread::scope(|s| {
        let chunks = split_uninit(&mut a, &bounds)
            .into_iter()
            .zip(split_uninit(&mut b, &bounds))
            .zip(split_uninit(&mut c, &bounds))
            .enumerate();
        let mut handles = Vec::with_capacity(t);
        for (w, ((ca, cb), cc)) in chunks {
            let core = plan.as_ref().map(|p| p[w]);
            let (start, end) = (&start, &end);
            let offset = bounds[w];
            handles.push(s.spawn(move || {
                let pinned = core.is_some_and(core_affinity::set_for_current);
                let a = touch(ca, offset, |_| 0.0);
                let b = touch(cb, offset, init_b);
                let c = touch(cc, offset, init_c);
                for _ in 0..passes {
                    start.wait();
                    triad(a, b, c, q);
                    end.wait();
                }
                pinned
            }));
        }
        for pass in 0..passes {
            start.wait();
            let t0 = Instant::now();
            end.wait();
            let dt = t0.elapsed();
            if pass >= WARMUP_PASSES {
                times.push(dt);
            }
        }
        for h in handles {
            pinned_all &= h.join().expect("triad worker panicked");
        }
    });
    // SAFETY: the workers initialized every element of all three arrays
    unsafe {
        a.set_len(n);
        b.set_len(n);
        c.set_len(n);
    }
    for i in 0..n {
        let expected = b[i] + q * c[i];
        if a[i].to_bits() != expected.to_bits() {
            return Err(Error::KernelCorruption {
                index: i,
                expected,
                found: a[i],
            });
        }
    }
    let bytes = TRIAD_BYTES_PER_ELEMENT as f64 * n as f64;
    let per_repetition: Vec<f64> = times
        .iter()
        .map(|d| bytes / d.as_secs_f64().max(1e-9) / 1e9)
        .collect();
    let best = per_repetition.iter().copied().fold(0.0, f64::max);
    Ok(BandwidthResult {
        best,
        per_repetition,
        threads: t,
        elements: n,
        pinning: config.pinning,
        pinned: pinned_all,
        scalar: q,
        warmup_passes: WARMUP_PASSES,
    })
}

trait Lane: Copy + Default {
    const X: Self;
    const Y: Self;
    #[cfg_attr(target_arch = "x86_64", allow(dead_code))]
    fn fma(self, x: Self, y: Self) -> Self;
    fn seed(k: usize) -> Self;
    fn to_f64(self) -> f64;
}

impl Lane for f64 {
    // fixed point y / (1 - x) = 1 keeps the accumulators bounded and normal
    const X: f64 = 0.999_999;
    const Y: f64 = 1e-6;
    #[inline(always)]
    fn fma(self, x: f64, y: f64) -> f64 {
        self.mul_add(x, y)
    }
    fn seed(k: usize) -> f64 {
        1.0 + k as f64 * 1e-3
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Lane for f32 {
    const X: f32 = 0.999;
    const Y: f32 = 1e-3;
    #[inline(always)]
    fn fma(self, x: f32, y: f32) -> f32 {
        self.mul_add(x, y)
    }
    fn seed(k: usize) -> f32 {
        1.0 + k as f32 * 1e-3
    }
    fn to_f64(self) -> f64 {
        f64::from(self)
    }
}

/// `iters` rounds of `FMA_CHAINS x L` independent fused multiply-adds.
#[cfg_attr(target_arch = "x86_64", allow(dead_code))]
#[inline(always)]
fn fma_chains<T: Lane, const L: usize>(iters: u64) -> f64 {
    let x = black_box(T::X);
    let y = black_box(T::Y);
    let mut acc = [[T::default(); L]; FMA_CHAINS];
    for (k, chain) in acc.iter_mut().enumerate() {
        for (l, v) in chain.iter_mut().enumerate() {
            *v = T::seed(k * L + l);
        }
    }
    for _ in 0..iters {
        for chain in acc.iter_mut() {
            for v in chain.iter_mut() {
                *v = v.fma(x, y);
            }
        }
    }
    acc.iter().flatten().map(|v| v.to_f64()).sum()
}

type Kernel = fn(u64) -> f64;

#[cfg(target_arch = "x86_64")]
mod x86 {
    use super::*;
    use std::arch::x86_64::*;

    // Explicit intrinsics: written as plain lane loops, the chains are not packed
    // reliably at every width (128/256-bit f64 stayed scalar).
    macro_rules! vector_kernel {
        ($name:ident, $feat:literal, $ty:ty, $elem:ty, $lanes:literal, $set1:ident, $fmadd:ident, $store:ident) => {
            #[target_feature(enable = $feat)]
            unsafe fn $name(iters: u64) -> f64 {
                let x = $set1(black_box(<$elem as Lane>::X));
                let y = $set1(black_box(<$elem as Lane>::Y));
                let mut acc: [$ty; FMA_CHAINS] =
                    std::array::from_fn(|k| $set1(<$elem as Lane>::seed(k)));
                for _ in 0..iters {
                    for v in acc.iter_mut() {
                        *v = $fmadd(*v, x, y);
                    }
                }
                let mut total = 0.0;
                for v in acc {
                    let mut out = [<$elem>::default(); $lanes];
                    $store(out.as_mut_ptr(), v);
                    total += out.iter().map(|e| e.to_f64()).sum::<f64>();
                }
                total
            }
        };
    }

    vector_kernel!(
        v512_f64,
        "avx512f",
        __m512d,
        f64,
        8,
        _mm512_set1_pd,
        _mm512_fmadd_pd,
        _mm512_storeu_pd
    );
    vector_kernel!(
        v512_f32,
        "avx512f",
        __m512,
        f32,
        16,
        _mm512_set1_ps,
        _mm512_fmadd_ps,
        _mm512_storeu_ps
    );
    vector_kernel!(
        v256_f64,
        "avx2,fma",
        __m256d,
        f64,
        4,
        _mm256_set1_pd,
        _mm256_fmadd_pd,
        _mm256_storeu_pd
    );
    vector_kernel!(
        v256_f32,
        "avx2,fma",
        __m256,
        f32,
        8,
        _mm256_set1_ps,
        _mm256_fmadd_ps,
        _mm256_storeu_ps
    );
    vector_kernel!(
        v128_f64,
        "fma",
        __m128d,
        f64,
        2,
        _mm_set1_pd,
        _mm_fmadd_pd,
        _mm_storeu_pd
    );
    vector_kernel!(
        v128_f32,
        "fma",
        __m128,
        f32,
        4,
        _mm_set1_ps,
        _mm_fmadd_ps,
        _mm_storeu_ps
    );

    // Scalar chains use the low-lane instructions so they cannot be packed into vectors.
    #[target_feature(enable = "fma")]
    unsafe fn scalar_f64(iters: u64) -> f64 {
        let x = _mm_set_sd(black_box(<f64 as Lane>::X));
        let y = _mm_set_sd(black_box(<f64 as Lane>::Y));
        let mut acc: [__m128d; FMA_CHAINS] =
            std::array::from_fn(|k| _mm_set_sd(<f64 as Lane>::seed(k)));
        for _ in 0..iters {
            for v in acc.iter_mut() {
                *v = _mm_fmadd_sd(*v, x, y);
            }
        }
        acc.iter().map(|v| _mm_cvtsd_f64(*v)).sum()
    }
    #[target_feature(enable = "fma")]
    unsafe fn scalar_f32(iters: u64) -> f64 {
        let x = _mm_set_ss(black_box(<f32 as Lane>::X));
        let y = _mm_set_ss(black_box(<f32 as Lane>::Y));
        let mut acc: [__m128; FMA_CHAINS] =
            std::array::from_fn(|k| _mm_set_ss(<f32 as Lane>::seed(k)));
        for _ in 0..iters {
            for v in acc.iter_mut() {
                *v = _mm_fmadd_ss(*v, x, y);
            }
        }
        acc.iter().map(|v| f64::from(_mm_cvtss_f32(*v))).sum()
    }

    pub fn supported_widths() -> Vec<u32> {
        let mut w = Vec::new();
        if is_x86_feature_detected!("fma") {
            w.push(128);
            if is_x86_feature_detected!("avx2") {
                w.push(256);
            }
            if is_x86_feature_detected!("avx512f") {
                w.push(512);
            }
        }
        w
    }

    pub fn kernel(precision: Precision, width: Option<u32>) -> Option<Kernel> {
        if !is_x86_feature_detected!("fma") {
            return None;
        }
        // SAFETY (all arms): the required features were detected above
        Some(match (width, precision) {
            (None, Precision::Double) => |n| unsafe { scalar_f64(n) },
            (None, Precision::Single) => |n| unsafe { scalar_f32(n) },
            (Some(128), Precision::Double) => |n| unsafe { v128_f64(n) },
            (Some(128), Precision::Single) => |n| unsafe { v128_f32(n) },
            (Some(256), Precision::Double) => |n| unsafe { v256_f64(n) },
            (Some(256), Precision::Single) => |n| unsafe { v256_f32(n) },
            (Some(512), Precision::Double) => |n| unsafe { v512_f64(n) },
            (Some(512), Precision::Single) => |n| unsafe { v512_f32(n) },
            _ => return None,
        })
    }
}

#[cfg(target_arch = "aarch64")]
mod arm {
    use super::*;

    #[target_feature(enable = "neon")]
    unsafe fn v128_f64(iters: u64) -> f64 {
        fma_chains::<f64, 2>(iters)
    }
    #[target_feature(enable = "neon")]
    unsafe fn v128_f32(iters: u64) -> f64 {
        fma_chains::<f32, 4>(iters)
    }

    pub fn supported_widths() -> Vec<u32> {
        if std::arch::is_aarch64_feature_detected!("neon") {
            vec![128]
        } else {
            Vec::new()
        }
    }

    pub fn kernel(precision: Precision, width: Option<u32>) -> Option<Kernel> {
        Some(match (width, precision) {
            (None, Precision::Double) => fma_chains::<f64, 1>,
            (None, Precision::Single) => fma_chains::<f32, 1>,
            (Some(128), p) if std::arch::is_aarch64_feature_detected!("neon") => match p {
                // SAFETY: neon was detected
                Precision::Double => |n| unsafe { v128_f64(n) },
                Precision::Single => |n| unsafe { v128_f32(n) },
            },
            _ => return None,
        })
    }
}

#[cfg(not(any(target_arch = "x86_64", target_arch = "aarch64")))]
mod generic {
    use super::*;

    pub fn supported_widths() -> Vec<u32> {
        Vec::new()
    }

    pub fn kernel(precision: Precision, width: Option<u32>) -> Option<Kernel> {
        match (width, precision) {
            (None, Precision::Double) => Some(fma_chains::<f64, 1>),
            (None, Precision::Single) => Some(fma_chains::<f32, 1>),
            _ => None,
        }
    }
}

#[cfg(target_arch = "aarch64")]
use arm as arch;
#[cfg(not(any(target_arch = "x86_64", target_arch = "aarch64")))]
use generic as arch;
#[cfg(target_arch = "x86_64")]
use x86 as arch;

/// Vector register widths (bits) the FMA kernel can run on this host, ascending.
pub fn supported_vector_widths() -> Vec<u32> {
    arch::supported_widths()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThroughputResult {
    pub gflops: f64,
    pub precision: Precision,
    pub mode: Mode,
    /// Register width in bits; the element width in scalar mode.
    pub width_bits: u32,
    /// Measured seconds.
    pub duration: f64,
    pub threads: usize,
}

fn resolve_kernel(precision: Precision, mode: Mode, width: Option<u32>) -> Result<(Kernel, u32)> {
    let supported = supported_vector_widths();
    let width = match mode {
        Mode::Scalar => None,
        Mode::Vector => Some(match width {
            Some(w) => w,
            None => *supported.last().ok_or_else(|| Error::Capability {
                requested: 0,
                supported: supported.clone(),
            })?,
        }),
    };
    if let Some(w) = width {
        if !supported.contains(&w) {
            return Err(Error::Capability {
                requested: w,
                supported,
            });
        }
    }
    let kernel = arch::kernel(precision, width).ok_or_else(|| Error::Capability {
        requested: width.unwrap_or(precision.bits()),
        supported: supported.clone(),
    })?;
    Ok((kernel, width.unwrap_or(precision.bits())))
}

/// Time one kernel until at least `duration` has elapsed; returns (flops, seconds).
fn time_kernel(kernel: Kernel, flops_per_iter: f64, duration: Duration) -> (f64, f64) {
    let mut batch: u64 = 1 << 12;
    loop {
        let t0 = Instant::now();
        black_box(kernel(black_box(batch)));
        if t0.elapsed() >= Duration::from_millis(5) || batch >= 1 << 40 {
            break;
        }
        batch *= 2;
    }
    let mut iters: u64 = 0;
    let t0 = Instant::now();
    while t0.elapsed() < duration {
        black_box(kernel(black_box(batch)));
        iters += batch;
    }
    let secs = t0.elapsed().as_secs_f64();
    (iters as f64 * flops_per_iter, secs)
}

/// Sustained FMA throughput on one thread. `width` selects a vector width in bits
/// (default: the widest supported); it is ignored in scalar mode.
pub fn run_fma_kernel(
    precision: Precision,
    mode: Mode,
    duration: f64,
    width: Option<u32>,
) -> Result<ThroughputResult> {
    run_fma_kernel_threads(precision, mode, duration, width, 1, Pinning::Compact)
}

/// FMA throughput summed over `threads` concurrent workers.
pub fn run_fma_kernel_threads(
    precision: Precision,
    mode: Mode,
    duration: f64,
    width: Option<u32>,
    threads: usize,
    pinning: Pinning,
) -> Result<ThroughputResult> {
    if !(duration >= MIN_FMA_DURATION && duration.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "duration must be >= {MIN_FMA_DURATION} s, got {duration}"
        )));
    }
    if threads == 0 || threads > max_threads() {
        return Err(Error::InvalidParameter(format!(
            "thread count {threads} outside 1..={}",
            max_threads()
        )));
    }
    let (kernel, width_bits) = resolve_kernel(precision, mode, width)?;
    let lanes = width_bits / precision.bits();
    let flops_per_iter = (FMA_CHAINS as u32 * lanes * 2) as f64;
    let _guard = exclusive();
    let plan = pin_plan(pinning, threads);
    let target = Duration::from_secs_f64(duration);
    let results: Vec<(f64, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let core = plan.as_ref().map(|p| p[w]);
                s.spawn(move || {
                    if let Some(c) = core {
                        core_affinity::set_for_current(c);
                    }
                    time_kernel(kernel, flops_per_iter, target)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fma worker panicked"))
            .collect()
    });
    let gflops = results.iter().map(|(f, s)| f / s).sum::<f64>() / 1e9;
    let secs = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(ThroughputResult {
        gflops,
        precision,
        mode,
        width_bits,
        duration: secs,
        threads,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Triad,
    Fma,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub threads: usize,
    /// GB/s for triad, GFlop/s for FMA.
    pub value: f64,
}

/// Parameters shared by every point of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepSettings {
    pub elements: usize,
    pub repetitions: u32,
    pub pinning: Pinning,
    pub precision: Precision,
    pub mode: Mode,
    pub duration: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            elements: hwmodel::STREAM_FLOOR_ELEMENTS,
            repetitions: DEFAULT_REPETITIONS,
            pinning: Pinning::Interleaved,
            precision: Precision::Double,
            mode: Mode::Vector,
            duration: MIN_FMA_DURATION,
        }
    }
}

/// One measurement per thread count; counts must be strictly ascending.
pub fn thread_sweep(
    kind: SweepKind,
    thread_counts: &[usize],
    settings: &SweepSettings,
    spec: Option<&PlatformSpec>,
) -> Result<Vec<SweepPoint>> {
    if thread_counts.is_empty() {
        return Err(Error::InvalidParameter(
            "thread sweep needs at least one count".into(),
        ));
    }
    if thread_counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(format!(
            "thread counts must be strictly ascending, got {thread_counts:?}"
        )));
    }
    thread_counts
        .iter()
        .map(|&t| {
            let value = match kind {
                SweepKind::Triad => {
                    let cfg = TriadConfig {
                        elements: settings.elements,
                        threads: t,
                        repetitions: settings.repetitions,
                        pinning: settings.pinning,
                    };
                    run_stream_triad(&cfg, spec)?.best
                }
                SweepKind::Fma => {
                    run_fma_kernel_threads(
                        settings.precision,
                        settings.mode,
                        settings.duration,
                        None,
                        t,
                        settings.pinning,
                    )?
                    .gflops
                }
            };
            Ok(SweepPoint { threads: t, value })
        })
        .collect()
}
