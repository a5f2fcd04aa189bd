//! Access-log export and flag-discipline audit.

use super::dpram::{Access, AccessKind};
use super::layout::SharedLayout;
use std::io::Write;

/// `step,port,op,address,value`, address and value in hex.
pub fn write_access_log_csv<W: Write>(log: &[Access], mut out: W) -> std::io::Result<()> {
    writeln!(out, "step,port,op,address,value")?;
    for a in log {
        let op = match a.kind {
            AccessKind::Read => "R",
            AccessKind::Write => "W",
        };
        writeln!(
            out,
            "{},{},{},0x{:04X},0x{:04X}",
            a.step, a.port, op, a.address, a.value
        )?;
    }
    Ok(())
}

/// An access to a guarded region made while its flag said "keep out".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    /// Index into the log.
    pub entry: usize,
    pub access: Access,
}

/// Replays the log and checks that
///
/// * the data slot is read only while `flag_data_ready` is set and written
///   only while it is clear;
/// * the coefficient region is read only while `flag_coeff_ready` is set and
///   written only while it is clear.
pub fn audit_flag_discipline(log: &[Access], layout: &SharedLayout) -> Result<(), Violation> {
    let data = layout.data_region();
    let coeffs = layout.coeff_region();
    let mut data_flag = 0u16;
    let mut coeff_flag = 0u16;
    for (entry, a) in log.iter().enumerate() {
        let addr = a.address as u32;
        if a.kind == AccessKind::Write {
            if addr == layout.flag_data_ready {
                data_flag = a.value;
            } else if addr == layout.flag_coeff_ready {
                coeff_flag = a.value;
            }
        }
        let guard = if data.contains(&(a.address as usize)) {
            Some(data_flag)
        } else if coeffs.contains(&(a.address as usize)) {
            Some(coeff_flag)
        } else {
            None
        };
        let ok = match (guard, a.kind) {
            (None, _) => true,
            (Some(flag), AccessKind::Read) => flag != 0,
            (Some(flag), AccessKind::Write) => flag == 0,
        };
        if !ok {
            return Err(Violation { entry, access: *a });
        }
    }
    Ok(())
}
