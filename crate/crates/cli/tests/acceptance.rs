//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Every numeric check is made against an oracle written here, not
//! against the library's own helpers.

use board_sim::adaptive::{
    run_identification, run_iir_equation_error, FilterCoefficients, LmsConfig, PredictorConfig,
};
use board_sim::apps::{run_predict, PredictExperiment};
use board_sim::board::{trip_evaluate, AdcModel, DacModel, TripConfig};
use board_sim::dualcore::{
    delayed_update_reference, mac_budget, run_dual_pipeline, FilterKind, PipelineConfig,
    RoleAssignment, Schedule, SharedLayout, Topology,
};
use board_sim::signal::{Component, GaussianSource, SampleStream, SignalSpec};
use board_sim::vme::{Outcome, VmeRam, VmeSlave, VmeTransaction};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Instant;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn stream(v: Vec<f64>, rate: f64) -> SampleStream {
    SampleStream::new(v, rate).unwrap()
}

// Plain serial LMS: newest-first regressor, y = b·w, e = d − y,
// b += 2·mu·e·w (NLMS scales mu by 1/(eps + |w|²)).
fn oracle_lms(
    regressors: &[Vec<f64>],
    d: &[f64],
    mu: f64,
    normalized: bool,
    eps: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = regressors.first().map_or(0, Vec::len);
    let mut b = vec![0.0; n];
    let mut y = Vec::with_capacity(d.len());
    for (w, &dk) in regressors.iter().zip(d) {
        let yk: f64 = b.iter().zip(w).map(|(bi, wi)| bi * wi).sum();
        let e = dk - yk;
        let step = if normalized {
            mu / (eps + w.iter().map(|v| v * v).sum::<f64>())
        } else {
            mu
        };
        for (bi, wi) in b.iter_mut().zip(w) {
            *bi += 2.0 * step * e * wi;
        }
        y.push(yk);
    }
    (b, y)
}

fn tapped(x: &[f64], k: usize, delay: usize, taps: usize) -> Vec<f64> {
    (0..taps)
        .map(|i| k.checked_sub(delay + i).map_or(0.0, |j| x[j]))
        .collect()
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for c in 0..3 {
        let p = (c..3)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..3 {
            let f = a[r][c] / a[c][c];
            let pivot = a[c];
            for (ark, pk) in a[r].iter_mut().zip(pivot).skip(c) {
                *ark -= f * pk;
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

fn identification() -> Check {
    let h = [0.5, -0.3, 0.2];
    let n = 20_000;
    let x = GaussianSource::new(11).take(n, 1.0);
    let d: Vec<f64> = (0..n)
        .map(|k| {
            (0..3)
                .map(|i| k.checked_sub(i).map_or(0.0, |j| h[i] * x[j]))
                .sum()
        })
        .collect();

    let t0 = Instant::now();
    let run = run_identification(
        &stream(x.clone(), 1000.0),
        &stream(d.clone(), 1000.0),
        &LmsConfig::lms(0.01, 3),
        &FilterCoefficients::zeros(3),
    )
    .map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed().as_secs_f64();
    let b = &run.final_coeffs.b;

    let regs: Vec<Vec<f64>> = (0..n).map(|k| tapped(&x, k, 0, 3)).collect();
    let (oracle_b, _) = oracle_lms(&regs, &d, 0.01, false, 0.0);

    // Wiener solution from the empirical autocorrelation and cross-correlation.
    let mut r = [[0.0; 3]; 3];
    let mut p = [0.0; 3];
    for (w, &dk) in regs.iter().zip(&d) {
        for i in 0..3 {
            p[i] += w[i] * dk;
            for j in 0..3 {
                r[i][j] += w[i] * w[j];
            }
        }
    }
    let wiener = solve3(r, p);

    let err = |u: &[f64], v: &[f64]| {
        u.iter()
            .zip(v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let to_h = err(b, &h);
    ensure(to_h <= 1e-2, || format!("‖b − h‖∞ = {to_h:e}"))?;
    ensure(err(b, &oracle_b) <= 1e-12, || {
        format!("library {b:?} vs oracle {oracle_b:?}")
    })?;
    ensure(err(&wiener, &h) <= 1e-9, || {
        format!("Wiener solution {wiener:?} is not h")
    })?;
    ensure(elapsed < 1.0, || format!("took {elapsed:.3} s"))?;
    Ok(format!("‖b − h‖∞ = {to_h:.2e}, {:.1} ms", elapsed * 1e3))
}

fn line_enhancer() -> Check {
    let rate = 333_000.0;
    let f = 0.05 * rate;
    let signal = SignalSpec::new(
        0.3,
        rate,
        vec![
            Component::Sinusoid {
                freq_hz: f,
                amplitude_v: 1.0,
                phase_rad: 0.0,
            },
            Component::WhiteNoise {
                sigma_v: 1.0,
                seed: 7,
            },
        ],
    );
    let settle = 30_000;
    let exp = PredictExperiment {
        signal,
        predictor: PredictorConfig {
            lms: LmsConfig::nlms(0.002, 32),
            delay: 1,
        },
        pipeline: None,
        settle_samples: settle,
    };
    let t0 = Instant::now();
    let out = run_predict(&exp).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed().as_secs_f64();

    // Independent ALE on the same input, scored against a sinusoid built here.
    let x = out.input.samples();
    let clean: Vec<f64> = (0..x.len())
        .map(|k| (2.0 * std::f64::consts::PI * f * k as f64 / rate).sin())
        .collect();
    let regs: Vec<Vec<f64>> = (0..x.len()).map(|k| tapped(x, k, 1, 32)).collect();
    let eps = LmsConfig::nlms(0.002, 32).eps;
    let (_, y) = oracle_lms(&regs, x, 0.002, true, eps);
    let mse = |v: &[f64]| {
        v[settle..]
            .iter()
            .zip(&clean[settle..])
            .map(|(a, c)| (a - c).powi(2))
            .sum::<f64>()
    };
    let oracle_gain = 10.0 * (mse(x) / mse(&y)).log10();

    ensure(out.improvement_db >= 6.0, || {
        format!("improvement {:.2} dB", out.improvement_db)
    })?;
    ensure((out.improvement_db - oracle_gain).abs() < 0.05, || {
        format!(
            "library {:.3} dB vs oracle {oracle_gain:.3} dB",
            out.improvement_db
        )
    })?;
    ensure((out.input_snr_db + 3.01).abs() < 0.2, || {
        format!("input SNR {:.2} dB", out.input_snr_db)
    })?;
    ensure(elapsed < 2.0, || format!("took {elapsed:.3} s"))?;
    Ok(format!(
        "{:.2} dB → {:.2} dB, improvement {:.2} dB (oracle {oracle_gain:.2}), {:.0} ms",
        out.input_snr_db,
        out.output_snr_db,
        out.improvement_db,
        elapsed * 1e3
    ))
}

fn wire(v: f64) -> f64 {
    v as f32 as f64
}

// The two-DSP schedule seen serially: block n is filtered with the
// coefficients published two handoffs earlier, rounded to binary32, while
// the updater adapts on binary32 copies of x and e.
fn oracle_delayed(
    x: &[f64],
    d: &[f64],
    delay: usize,
    lms: &LmsConfig,
    block: usize,
) -> (Vec<f64>, Vec<f64>) {
    let taps = lms.num_taps;
    let mut master = vec![0.0; taps];
    let mut stale = [master.clone(), master.clone()];
    let mut y = vec![0.0; x.len()];
    for start in (0..x.len()).step_by(block) {
        let end = (start + block).min(x.len());
        let used: Vec<f64> = stale[0].iter().map(|&c| wire(c)).collect();
        let mut e = vec![0.0; end - start];
        for k in start..end {
            let w = tapped(x, k, delay, taps);
            y[k] = used.iter().zip(&w).fold(0.0, |acc, (b, w)| acc + b * w);
            e[k - start] = d[k] - y[k];
        }
        for k in start..end {
            let w: Vec<f64> = tapped(x, k, delay, taps).into_iter().map(wire).collect();
            let ek = wire(e[k - start]);
            let power = w.iter().fold(0.0, |acc, v| acc + v * v);
            let step = if lms.normalized {
                lms.mu / (lms.eps + power)
            } else {
                lms.mu
            };
            let g = 2.0 * step * ek;
            let keep = 1.0 - lms.leakage;
            for (bi, wi) in master.iter_mut().zip(&w) {
                *bi = keep * *bi + g * wi;
            }
        }
        stale = [stale[1].clone(), master.clone()];
    }
    (y, master)
}

fn dual_core_equivalence() -> Check {
    let mut rng = StdRng::seed_from_u64(0xD5);
    let n = 100_000;
    let mut oracle_checked = 0;
    for case in 0..50 {
        let block_len = [1, 16, 64][rng.random_range(0..3)];
        let taps = rng.random_range(1..=8);
        let sigma = rng.random_range(0.1..2.0);
        let x = GaussianSource::new(rng.random()).take(n, sigma);
        // Coefficients reach the filter up to two blocks late, so the step
        // size has to shrink with the block length to keep adaptation stable.
        let staleness = (2 * block_len + 1) as f64;
        let scale = rng.random_range(0.1..1.0) * 0.25 / staleness;
        let predictor = case % 2 == 0;
        let (topology, d, delay) = if predictor {
            let delay = rng.random_range(1..=4);
            let lms = LmsConfig::nlms(scale, taps);
            (
                Topology::Predictor(PredictorConfig { lms, delay }),
                x.clone(),
                delay,
            )
        } else {
            let h: Vec<f64> = (0..taps).map(|_| rng.random_range(-1.0..1.0)).collect();
            let d: Vec<f64> = (0..n)
                .map(|k| {
                    h.iter()
                        .enumerate()
                        .map(|(i, hi)| k.checked_sub(i).map_or(0.0, |j| hi * x[j]))
                        .sum()
                })
                .collect();
            let mut lms = LmsConfig::lms(scale / (taps as f64 * sigma * sigma), taps);
            lms.leakage = if rng.random_bool(0.3) { 1e-4 } else { 0.0 };
            (Topology::Identification(lms), d, 0)
        };
        let mut cfg = PipelineConfig::new(block_len, topology);
        cfg.schedule = Schedule::Seeded(rng.random());
        cfg.roles = if rng.random_bool(0.5) {
            RoleAssignment::FilterOnA
        } else {
            RoleAssignment::FilterOnB
        };
        let xs = stream(x.clone(), 333_000.0);
        let ds = stream(d.clone(), 333_000.0);
        let desired = (!predictor).then_some(&ds);
        let layout = SharedLayout::standard(taps, block_len).map_err(|e| e.to_string())?;
        let out = run_dual_pipeline(&xs, desired, &cfg, &layout)
            .map_err(|e| format!("case {case}: {e}"))?;
        let reference = delayed_update_reference(&xs, desired, &cfg).map_err(|e| e.to_string())?;
        ensure(out.run == reference, || {
            format!("case {case}: pipeline differs from reference ({cfg:?})")
        })?;

        // The independent oracle is slow, so it covers the first 10^4 samples
        // of every fifth configuration.
        if case % 5 == 0 {
            let m = 10_000;
            let sub_x = stream(x[..m].to_vec(), 333_000.0);
            let sub_d = stream(d[..m].to_vec(), 333_000.0);
            let short = delayed_update_reference(&sub_x, (!predictor).then_some(&sub_d), &cfg)
                .map_err(|e| e.to_string())?;
            let (oy, ob) = oracle_delayed(&x[..m], &d[..m], delay, cfg.topology.lms(), block_len);
            ensure(
                short.y.samples() == oy.as_slice() && short.final_coeffs.b == ob,
                || format!("case {case}: reference disagrees with the oracle"),
            )?;
            oracle_checked += 1;
        }
    }
    Ok(format!(
        "50 configs × 10^5 samples bit-identical; {oracle_checked} cross-checked by oracle"
    ))
}

fn iir() -> Check {
    let n = 50_000;
    let x = GaussianSource::new(21).take(n, 1.0);
    let mut d = vec![0.0; n];
    for k in 0..n {
        d[k] = 0.5 * x[k] + if k > 0 { 0.4 * d[k - 1] } else { 0.0 };
    }
    let (xs, ds) = (stream(x.clone(), 1000.0), stream(d.clone(), 1000.0));

    let fir_cfg = LmsConfig::lms(0.01, 3);
    let fir = run_identification(&xs, &ds, &fir_cfg, &FilterCoefficients::zeros(3))
        .map_err(|e| e.to_string())?;
    let reduced = run_iir_equation_error(&xs, &ds, &fir_cfg, 3, 0).map_err(|e| e.to_string())?;
    ensure(
        fir.y == reduced.y && fir.e == reduced.e && fir.final_coeffs.b == reduced.final_coeffs.b,
        || "na = 0 does not reproduce FIR identification".into(),
    )?;

    let run = run_iir_equation_error(&xs, &ds, &LmsConfig::lms(0.005, 1), 1, 1)
        .map_err(|e| e.to_string())?;
    let est = run.final_coeffs.flat();
    let (b0, a1) = (est[0], est[1]);
    ensure((b0 - 0.5).abs() <= 0.02 && (a1 - 0.4).abs() <= 0.02, || {
        format!("recovered b0 = {b0}, a1 = {a1}")
    })?;
    Ok(format!(
        "na = 0 bit-matches FIR; b0 = {b0:.5}, a1 = {a1:.5}"
    ))
}

fn quantization() -> Check {
    let adc = AdcModel::default();
    let dac = DacModel::default();
    let lsb = 10.0 / 4096.0;
    let points = 1_000_000;
    let mut prev = 0u16;
    let mut worst = 0.0f64;
    for i in 0..points {
        let v = -6.0 + 12.0 * i as f64 / (points - 1) as f64;
        let code = adc.sample(v);
        ensure(code >= prev, || {
            format!("code fell from {prev} to {code} at {v} V")
        })?;
        prev = code;
        if (-5.0..5.0 - lsb / 2.0).contains(&v) {
            worst = worst.max((dac.code_to_volts(code) - v).abs());
        }
    }
    ensure(prev == 4095 && adc.sample(-6.0) == 0, || {
        "rails not reached".into()
    })?;
    ensure(worst <= lsb, || format!("round trip error {worst:e} V"))?;
    let mid = adc.sample(0.0);
    ensure(mid == 2048, || format!("midscale code {mid}"))?;
    Ok(format!(
        "monotone over 10^6 points, worst round trip {:.3} LSB, midscale {mid}",
        worst / lsb
    ))
}

fn vme() -> Check {
    const BASE: u32 = 0x0080_0000;
    const WINDOW: u32 = 0x1_0000;
    let mut rng = StdRng::seed_from_u64(0x7E);
    let mut bus = VmeSlave::new(BASE, WINDOW, VmeRam::new(WINDOW)).map_err(|e| e.to_string())?;
    let run = |bus: &mut VmeSlave<VmeRam>, t: VmeTransaction| {
        let r = bus.execute(&t);
        match r.outcome {
            Outcome::Dtack(d) => Ok(d),
            other => Err(format!("{t}: {other:?}")),
        }
    };
    let even = |rng: &mut StdRng| BASE + 2 * rng.random_range(0..WINDOW / 2);

    for _ in 0..100 {
        let (address, data) = (even(&mut rng), rng.random());
        run(&mut bus, VmeTransaction::D16Write { address, data })?;
        let got = run(&mut bus, VmeTransaction::D16Read { address })?;
        ensure(got == [data], || {
            format!("D16 {address:#x}: wrote {data:#06x}, read {got:?}")
        })?;
    }
    for _ in 0..100 {
        let (address, data) = (BASE + rng.random_range(0..WINDOW), rng.random::<u8>());
        run(&mut bus, VmeTransaction::D08Write { address, data })?;
        let got = run(&mut bus, VmeTransaction::D08Read { address })?;
        ensure(got == [data as u16], || {
            format!("D08 {address:#x}: wrote {data:#04x}, read {got:?}")
        })?;
    }
    for _ in 0..100 {
        let count = rng.random_range(1..=128usize);
        let page = BASE + 256 * rng.random_range(0..WINDOW / 256);
        let address = page + 2 * rng.random_range(0..=(128 - count) as u32);
        let data: Vec<u16> = (0..count).map(|_| rng.random()).collect();
        run(
            &mut bus,
            VmeTransaction::BltWrite {
                address,
                data: data.clone(),
            },
        )?;
        let got = run(&mut bus, VmeTransaction::BltRead { address, count })?;
        ensure(got == data, || {
            format!("BLT {address:#x}×{count} did not round-trip")
        })?;
    }
    for _ in 0..100 {
        let address = even(&mut rng);
        let data = rng.random();
        run(&mut bus, VmeTransaction::D16Write { address, data })?;
        run(&mut bus, VmeTransaction::Ado { address })?;
        let piped = bus.execute(&VmeTransaction::D16Read { address });
        ensure(
            piped.data() == Some(&[data][..]) && piped.cycles == 3,
            || format!("pipelined read at {address:#x}: {piped:?}"),
        )?;
    }
    for _ in 0..100 {
        let level = rng.random_range(1..=7u8);
        let id: u16 = rng.random();
        bus.raise_interrupt(level, id, board_sim::vme::StatusWidth::D16)
            .map_err(|e| e.to_string())?;
        let got = run(&mut bus, VmeTransaction::Iack { level })?;
        ensure(got == [id], || {
            format!("IACK {level} returned {got:?}, expected {id:#06x}")
        })?;
        ensure(
            bus.execute(&VmeTransaction::Iack { level }).outcome == Outcome::NoResponse,
            || format!("level {level} still pending after acknowledge"),
        )?;
    }

    // Pre-image/post-image law on 10^4 cases: RMW returns the old word and
    // leaves (old & and) | or behind.
    for case in 0..10_000 {
        let address = even(&mut rng);
        let (old, and, or): (u16, u16, u16) = (rng.random(), rng.random(), rng.random());
        run(&mut bus, VmeTransaction::D16Write { address, data: old })?;
        let pre = run(&mut bus, VmeTransaction::Rmw { address, and, or })?;
        let post = run(&mut bus, VmeTransaction::D16Read { address })?;
        ensure(pre == [old] && post == [(old & and) | or], || {
            format!("RMW case {case}: old {old:#06x} and {and:#06x} or {or:#06x} gave {pre:?} / {post:?}")
        })?;
    }

    // ADO never changes memory, whatever it targets.
    for _ in 0..1000 {
        let before = bus.backing().words().to_vec();
        let address = BASE
            .wrapping_add(rng.random_range(0..2 * WINDOW))
            .wrapping_sub(WINDOW / 2);
        let _ = bus.execute(&VmeTransaction::Ado { address });
        ensure(bus.backing().words() == before.as_slice(), || {
            format!("ADO at {address:#x} changed memory")
        })?;
    }

    for _ in 0..100 {
        let address = even(&mut rng) + 1;
        let r = bus.execute(&VmeTransaction::D16Read { address });
        ensure(matches!(r.outcome, Outcome::Berr(_)), || {
            format!("odd D16 read at {address:#x}: {r:?}")
        })?;
        let w = bus.execute(&VmeTransaction::D16Write { address, data: 0 });
        ensure(matches!(w.outcome, Outcome::Berr(_)), || {
            format!("odd D16 write at {address:#x}: {w:?}")
        })?;
    }
    Ok(
        "100 round trips each for D16/D08/BLT/ADO/IACK, 10^4 RMW cases, ADO inert, odd D16 → BERR"
            .into(),
    )
}

// Trip at the first k where the M samples ending at k are all above threshold.
fn oracle_trip(v: &[f64], threshold: f64, m: usize) -> Option<usize> {
    (m - 1..v.len()).find(|&k| v[k + 1 - m..=k].iter().all(|&s| s > threshold))
}

fn trip() -> Check {
    let rate = 333_000.0;
    let mut rng = StdRng::seed_from_u64(0x71);
    for case in 0..1000 {
        let len = rng.random_range(0..300);
        let threshold = rng.random_range(-1.0..1.0);
        let m = rng.random_range(1..=8);
        // Coarse levels make ties with the threshold and long runs common.
        let v: Vec<f64> = (0..len)
            .map(|_| {
                if rng.random_bool(0.2) {
                    threshold
                } else {
                    (rng.random_range(-4..=4) as f64) * 0.5
                }
            })
            .collect();
        let cfg = TripConfig {
            threshold_v: threshold,
            persistence: m,
            output_line: 0,
        };
        let got = trip_evaluate(&cfg, &stream(v.clone(), rate)).map_err(|e| e.to_string())?;
        let want = oracle_trip(&v, threshold, m);
        ensure(got.trip_index == want, || {
            format!("case {case}: {:?} vs oracle {want:?}", got.trip_index)
        })?;
        ensure(got.run_start == want.map(|k| k + 1 - m), || {
            format!("case {case}: run start {:?}", got.run_start)
        })?;
    }

    let mut step = vec![0.0; 200];
    step[100..].fill(4.0);
    let cfg = TripConfig {
        threshold_v: 2.5,
        persistence: 5,
        output_line: 0,
    };
    let r = trip_evaluate(&cfg, &stream(step, rate)).map_err(|e| e.to_string())?;
    let latency = r.latency_s.ok_or("step did not trip")?;
    ensure(r.trip_index == Some(104), || {
        format!("step tripped at {:?}", r.trip_index)
    })?;
    ensure(latency == 5.0 / rate, || format!("latency {latency:e} s"))?;
    let from_step = (r.trip_index.unwrap() + 1 - 100) as f64 / rate;
    ensure(from_step == latency, || {
        format!("step-to-trip time {from_step:e} s")
    })?;
    Ok(format!(
        "10^3 streams agree; step trips at 104, latency {:.3} µs",
        latency * 1e6
    ))
}

fn mac() -> Check {
    let b = mac_budget(32, FilterKind::Fir, 333_000.0);
    let expected = 32.0 * 2.0 * 333_000.0;
    ensure(
        b.macs_per_second == expected && expected == 2.1312e7,
        || format!("{} MACs/s", b.macs_per_second),
    )?;
    ensure(
        (b.utilization - expected / 3.0e8).abs() < 1e-15 && (b.utilization - 0.071).abs() < 5e-4,
        || format!("utilization {}", b.utilization),
    )?;
    Ok(format!(
        "{:.4e} MACs/s, utilization {:.4}",
        b.macs_per_second, b.utilization
    ))
}

fn files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = std::fs::read(&p).unwrap();
            (p.file_name().unwrap().into(), bytes)
        })
        .collect();
    out.sort();
    out
}

fn reproducibility() -> Check {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cfg = |name: &str| configs.join(name).to_string_lossy().into_owned();
    let seed: u64 = StdRng::seed_from_u64(0x99).random_range(1..1_000_000);
    let seed = seed.to_string();
    let runs: Vec<(&str, Vec<String>)> = vec![
        (
            "bcm",
            vec!["bcm".into(), "--config".into(), cfg("bcm.toml")],
        ),
        (
            "bcm-seeded",
            vec![
                "bcm".into(),
                "--config".into(),
                cfg("bcm.toml"),
                "--seed".into(),
                seed.clone(),
            ],
        ),
        (
            "ident",
            vec!["ident".into(), "--config".into(), cfg("ident.toml")],
        ),
        (
            "ident-iir",
            vec!["ident".into(), "--config".into(), cfg("ident_iir.toml")],
        ),
        (
            "predict",
            vec![
                "predict".into(),
                "--config".into(),
                cfg("predict.toml"),
                "--seed".into(),
                seed,
            ],
        ),
        (
            "vme",
            vec!["vme".into(), "--config".into(), cfg("smoke.vme")],
        ),
        ("budget", vec!["budget".into(), "32".into()]),
    ];
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for (name, args) in runs {
        let out = tmp.path().join(name);
        let mut snapshots = Vec::new();
        for _ in 0..2 {
            let status = Command::new(env!("CARGO_BIN_EXE_board-sim"))
                .args(&args)
                .arg("--out")
                .arg(&out)
                .env("SOURCE_DATE_EPOCH", "1700000000")
                .stdout(Stdio::null())
                .status()
                .map_err(|e| e.to_string())?;
            ensure(status.success(), || format!("{name}: exit {status}"))?;
            snapshots.push(files(&out));
            std::fs::remove_dir_all(&out).map_err(|e| e.to_string())?;
        }
        ensure(snapshots[0].len() > 1, || format!("{name}: no outputs"))?;
        ensure(snapshots[0] == snapshots[1], || {
            format!("{name}: outputs differ between runs")
        })?;
        compared += snapshots[0].len();
    }
    Ok(format!(
        "7 runs, {compared} files byte-identical across two invocations"
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("identification convergence", identification),
        ("adaptive line enhancer", line_enhancer),
        ("dual-core equivalence", dual_core_equivalence),
        ("IIR reduction and recovery", iir),
        ("quantization", quantization),
        ("VME conformance", vme),
        ("trip logic", trip),
        ("MAC budget", mac),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
