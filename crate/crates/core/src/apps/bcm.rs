//! Beam-current-monitor protection chain.
//!
//! The synthetic beam signal goes through the ADC, the two-DSP adaptive line
//! enhancer, the trip comparator and finally the DAC. The clean part of the
//! signal is synthesised alongside, which a real monitor could never do, so
//! that the enhancement can be scored against ground truth.

use super::AppError;
use crate::adaptive::AdaptiveRun;
use crate::board::{trip_evaluate, AdcModel, DacModel, DigitalIo, TripConfig, TripReport};
use crate::dualcore::{run_dual_pipeline, PipelineConfig, RunStats, SharedLayout, Topology};
use crate::signal::{measure_snr, synthesize, SampleStream, SignalSpec};
use std::fmt::Write as _;
use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct BcmExperiment {
    pub signal: SignalSpec,
    /// Must use the predictor topology.
    pub pipeline: PipelineConfig,
    pub trip: TripConfig,
    /// `None` hands the filter the unquantised samples.
    pub adc: Option<AdcModel>,
    pub dac: DacModel,
    /// Leading samples left out of the SNR figures while the filter converges.
    pub settle_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcmReport {
    /// SNR of what the filter saw, ADC included.
    pub input_snr_db: f64,
    pub output_snr_db: f64,
    /// Output minus input SNR; 0 when the input carries no noise at all.
    pub improvement_db: f64,
    pub trip: TripReport,
    pub run: AdaptiveRun,
    pub clean: SampleStream,
    /// Filter input, after the ADC when one is configured.
    pub input: SampleStream,
    pub adc_saturations: usize,
    pub dac_codes: Vec<u16>,
    pub dac_out: SampleStream,
    pub dac_timing_violations: usize,
    /// Digital output lines after the trip drove them.
    pub dio_outputs: u8,
    pub stats: RunStats,
}

impl BcmExperiment {
    pub fn validate(&self) -> Result<(), AppError> {
        self.signal.validate()?;
        self.pipeline.validate()?;
        if !matches!(self.pipeline.topology, Topology::Predictor(_)) {
            return Err(AppError::config(
                "pipeline.topology",
                "the beam-current monitor runs the predictor topology",
            ));
        }
        self.trip.validate()?;
        if let Some(adc) = &self.adc {
            adc.validate()?;
            if adc.rate_hz != self.signal.rate_hz {
                return Err(AppError::config(
                    "adc.rate_hz",
                    format!(
                        "{} Hz differs from signal.rate_hz {} Hz",
                        adc.rate_hz, self.signal.rate_hz
                    ),
                ));
            }
        }
        self.dac.validate()?;
        if self.settle_samples >= self.signal.num_samples() {
            return Err(AppError::config(
                "experiment.settle_samples",
                format!(
                    "{} leaves nothing to score out of {} samples",
                    self.settle_samples,
                    self.signal.num_samples()
                ),
            ));
        }
        Ok(())
    }

    pub fn layout(&self) -> Result<SharedLayout, AppError> {
        SharedLayout::standard(
            self.pipeline.topology.lms().num_taps,
            self.pipeline.block_len,
        )
        .map_err(|e| AppError::Pipeline(e.into()))
    }
}

pub fn run_bcm_experiment(exp: &BcmExperiment) -> Result<BcmReport, AppError> {
    exp.validate()?;
    let contaminated = synthesize(&exp.signal)?;
    let clean = synthesize(&exp.signal.clean())?;
    let (input, adc_saturations) = match &exp.adc {
        Some(adc) => (
            adc.requantize(&contaminated),
            adc.quantize(&contaminated).saturated,
        ),
        None => (contaminated, 0),
    };

    let outcome = run_dual_pipeline(&input, None, &exp.pipeline, &exp.layout()?)?;
    let run = outcome.run;

    let n = input.len();
    let scored = exp.settle_samples..n;
    let reference = clean.slice(scored.clone());
    let input_snr = measure_snr(&reference, &input.slice(scored.clone()))?;
    let output_snr = measure_snr(&reference, &run.y.slice(scored))?;
    let improvement_db = if input_snr.noise_power_v2 == 0.0 {
        0.0
    } else {
        output_snr.snr_db - input_snr.snr_db
    };

    let trip = trip_evaluate(&exp.trip, &run.y)?;
    let mut dio = DigitalIo::new();
    trip.drive(&exp.trip, &mut dio)?;

    let mut dac = exp.dac;
    let mut dac_codes = Vec::with_capacity(n);
    let mut dac_volts = Vec::with_capacity(n);
    for (k, &y) in run.y.samples().iter().enumerate() {
        let code = dac.volts_to_code(y);
        let update = dac.output(code, k as f64 / input.rate_hz())?;
        dac_codes.push(code);
        dac_volts.push(update.volts);
    }
    let dac_out = SampleStream::new(dac_volts, input.rate_hz())?;

    log::info!(
        "bcm: input {:.2} dB, output {:.2} dB, tripped {}",
        input_snr.snr_db,
        output_snr.snr_db,
        trip.tripped()
    );
    Ok(BcmReport {
        input_snr_db: input_snr.snr_db,
        output_snr_db: output_snr.snr_db,
        improvement_db,
        trip,
        run,
        clean,
        input,
        adc_saturations,
        dac_codes,
        dac_out,
        dac_timing_violations: dac.timing_violations(),
        dio_outputs: dio.output_mask(),
        stats: outcome.stats,
    })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl BcmReport {
    /// Header plus one row of figures.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "input_snr_db,output_snr_db,improvement_db,tripped,trip_index,run_start,latency_s,\
             adc_saturations,dac_timing_violations,dio_outputs,pipeline_steps"
        )?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.input_snr_db,
            self.output_snr_db,
            self.improvement_db,
            self.trip.tripped(),
            opt(self.trip.trip_index),
            opt(self.trip.run_start),
            opt(self.trip.latency_s),
            self.adc_saturations,
            self.dac_timing_violations,
            self.dio_outputs,
            self.stats.steps
        )
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let rate = self.input.rate_hz();
        let _ = writeln!(s, "samples             {}", self.input.len());
        let _ = writeln!(s, "input SNR           {:.3} dB", self.input_snr_db);
        let _ = writeln!(s, "output SNR          {:.3} dB", self.output_snr_db);
        let _ = writeln!(s, "SNR improvement     {:.3} dB", self.improvement_db);
        match self.trip.trip_index {
            Some(k) => {
                let _ = writeln!(
                    s,
                    "trip                fired at sample {k} ({:.6e} s), run started at {}, persistence latency {:.6e} s",
                    k as f64 / rate,
                    opt(self.trip.run_start),
                    self.trip.latency_s.unwrap_or_default()
                );
            }
            None => {
                let _ = writeln!(s, "trip                not fired");
            }
        }
        let _ = writeln!(s, "digital outputs     0b{:08b}", self.dio_outputs);
        let _ = writeln!(s, "ADC saturations     {}", self.adc_saturations);
        let _ = writeln!(s, "DAC settle flags    {}", self.dac_timing_violations);
        let _ = writeln!(s, "pipeline steps      {}", self.stats.steps);
        s
    }
}
