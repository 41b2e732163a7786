//! Piecewise-linear charging blocks shared by all formulations.

use crate::charging::ChargingFunction;

use super::{Assignment, MipModel, Sense, VarId, VarKind};

/// Variables of one charging block: arrival and departure SoC with their
/// segment fill levels and the matching charging-time offsets.
pub(super) struct ChargeVars {
    pub qp: VarId,
    pub qm: VarId,
    pub s: VarId,
    pub d: VarId,
}

/// Adds the block for key `key` (for example `5c1` or `1,5,2`). Rows are
/// numbered from `first` upwards: arrival SoC, fill order, indicator order,
/// indicator floor, arrival time offset, then the same five for departure.
pub(super) fn charge_block(
    m: &mut MipModel,
    key: &str,
    f: &ChargingFunction,
    q_max: f64,
    first: usize,
    all: &[VarId],
) -> ChargeVars {
    let t_full = f.time_to_full();
    let qp = m.add_var(format!("qp[{key}]"), VarKind::Continuous, 0.0, q_max);
    let qm = m.add_var(format!("qm[{key}]"), VarKind::Continuous, 0.0, q_max);
    let s = m.add_var(format!("s[{key}]"), VarKind::Continuous, 0.0, t_full);
    let d = m.add_var(format!("d[{key}]"), VarKind::Continuous, 0.0, t_full);
    let widths_e = f.energy_widths();
    let widths_t = f.time_widths();
    for (sign, soc, time, offset) in [("p", qp, s, 0), ("m", qm, d, 5)] {
        let b = widths_e.len();
        let alpha: Vec<VarId> = (1..=b)
            .map(|k| m.add_var(format!("a{sign}[{key},{k}]"), VarKind::Continuous, 0.0, 1.0))
            .collect();
        let z: Vec<VarId> = (1..=b)
            .map(|k| m.add_var(format!("z{sign}[{key},{k}]"), VarKind::Binary, 0.0, 1.0))
            .collect();
        let row = |n: usize| format!("c{}", first + offset + n);
        let mut terms = vec![(soc, 1.0)];
        terms.extend(alpha.iter().zip(&widths_e).map(|(&a, &w)| (a, -w)));
        m.add_row(format!("{}[{key}]", row(0)), terms, Sense::Eq, 0.0);
        for k in 0..b - 1 {
            m.add_row(
                format!("{}[{key},{}]", row(1), k + 1),
                vec![(alpha[k + 1], 1.0), (alpha[k], -1.0)],
                Sense::Le,
                0.0,
            );
        }
        for k in 0..b - 1 {
            m.add_row(
                format!("{}[{key},{}]", row(2), k + 1),
                vec![(z[k + 1], 1.0), (alpha[k], -1.0)],
                Sense::Le,
                0.0,
            );
        }
        for k in 0..b {
            m.add_row(
                format!("{}[{key},{}]", row(3), k + 1),
                vec![(z[k], 1.0), (alpha[k], -1.0)],
                Sense::Ge,
                0.0,
            );
        }
        let mut terms = vec![(time, 1.0)];
        terms.extend(alpha.iter().zip(&widths_t).map(|(&a, &w)| (a, -w)));
        m.add_row(format!("{}[{key}]", row(4)), terms, Sense::Eq, 0.0);
        for &x in all {
            for k in 0..b {
                m.add_row(
                    format!("zlink{sign}[{key},{}]", k + 1),
                    vec![(z[k], 1.0), (x, -1.0)],
                    Sense::Le,
                    0.0,
                );
            }
        }
    }
    ChargeVars { qp, qm, s, d }
}

/// Segment fill levels for SoC `q`: `α_k = clamp((q − E_{k−1}) / E′_k, 0, 1)`.
pub(super) fn fill_levels(f: &ChargingFunction, q: f64) -> Vec<f64> {
    let bp = f.breakpoints();
    bp.windows(2)
        .map(|w| ((q - w[0].0) / (w[1].0 - w[0].0)).clamp(0.0, 1.0))
        .collect()
}

/// Writes the block values for a visit charging from `q_in` to `q_out`.
pub(super) fn set_charge_values(
    m: &MipModel,
    a: &mut Assignment,
    key: &str,
    f: &ChargingFunction,
    q_in: f64,
    q_out: f64,
) {
    let q_max = f.capacity();
    let q_in = q_in.clamp(0.0, q_max);
    let q_out = q_out.clamp(0.0, q_max);
    let mut put = |name: String, v: f64| {
        let id = m.var(&name).unwrap_or_else(|| panic!("block variable {name} missing"));
        a.set(id, v);
    };
    let mut times = [0.0; 2];
    for (idx, (sign, q)) in [("p", q_in), ("m", q_out)].into_iter().enumerate() {
        let alpha = fill_levels(f, q);
        let widths_t = f.time_widths();
        times[idx] = alpha.iter().zip(&widths_t).map(|(a, w)| a * w).sum();
        for (k, &al) in alpha.iter().enumerate() {
            put(format!("a{sign}[{key},{}]", k + 1), al);
            put(format!("z{sign}[{key},{}]", k + 1), if al > 0.0 { 1.0 } else { 0.0 });
        }
    }
    put(format!("qp[{key}]"), q_in);
    put(format!("qm[{key}]"), q_out);
    put(format!("s[{key}]"), times[0]);
    put(format!("d[{key}]"), times[1]);
}

/// Charging time of the block values written by [`set_charge_values`].
pub(super) fn block_delta(f: &ChargingFunction, q_in: f64, q_out: f64) -> f64 {
    let q_max = f.capacity();
    let t = |q: f64| -> f64 {
        fill_levels(f, q.clamp(0.0, q_max))
            .iter()
            .zip(f.time_widths())
            .map(|(a, w)| a * w)
            .sum()
    };
    (t(q_out) - t(q_in)).max(0.0)
}
