use crate::error::{ensure, Result};

use super::AutocorrelationSeries;

/// Thresholds for reading periods off `|A(t)|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectConfig {
    /// Smallest envelope height accepted as a revival.
    pub revival_threshold: f64,
    /// Smallest relative prominence of a classical return.
    pub classical_prominence: f64,
    /// Smallest height of a classical return.
    pub classical_height: f64,
    /// Peaks below this height are ignored.
    pub min_height: f64,
    /// The packet counts as collapsed once a full classical period stays below this.
    pub collapse_level: f64,
    /// Half-width of the search window around each expected classical return, in periods.
    pub chain_tolerance: f64,
    /// Relative tolerance for recognising a candidate at half the time of another.
    pub pair_tolerance: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            revival_threshold: 0.7,
            classical_prominence: 0.5,
            classical_height: 0.2,
            min_height: 0.05,
            collapse_level: 0.5,
            chain_tolerance: 0.1,
            pair_tolerance: 0.1,
        }
    }
}

/// Local maximum of `|A|^2`, refined by a parabola through three samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub time: f64,
    pub height: f64,
    /// Topographic prominence divided by height.
    pub prominence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalCandidate {
    /// Envelope maximum.
    pub time: f64,
    pub height: f64,
    /// Highest comb peak under the envelope.
    pub comb_peak: f64,
    /// Set when a peak above the collapse level sits at about twice this time.
    pub fractional: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevivalEstimate {
    /// Mean spacing of the early classical returns.
    pub classical_period: Option<f64>,
    pub classical_peaks: Vec<Peak>,
    /// Spacing of the comb between the start and the revival comb peak.
    pub comb_period: Option<f64>,
    pub revival_time: Option<f64>,
    pub revival_height: f64,
    pub candidates: Vec<RevivalCandidate>,
    /// Mean relative prominence of the classical returns; zero without any.
    pub confidence: f64,
}

/// Local maxima of `values` at or above `min_height`.
pub fn find_peaks(times: &[f64], values: &[f64], min_height: f64) -> Vec<Peak> {
    let n = values.len();
    let mut idx = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            // Walk across plateaus.
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] && values[i] >= min_height {
                idx.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    idx.iter()
        .enumerate()
        .map(|(p, &i)| {
            let (time, height) = refine(times, values, i);
            // Prominence: height above the higher of the two lowest points that
            // separate this peak from higher terrain on either side.
            let h = values[i];
            let left = base(values, i, idx[..p].iter().rev().copied(), true);
            let right = base(values, i, idx[p + 1..].iter().copied(), false);
            let floor = left.max(right);
            Peak { time, height, prominence: if h > 0.0 { (h - floor) / h } else { 0.0 } }
        })
        .collect()
}

fn base(values: &[f64], i: usize, others: impl Iterator<Item = usize>, leftwards: bool) -> f64 {
    let h = values[i];
    let stop = others.into_iter().find(|&j| values[j] > h);
    let range = match (stop, leftwards) {
        (Some(j), true) => j..i,
        (None, true) => 0..i,
        (Some(j), false) => i..j + 1,
        (None, false) => i..values.len(),
    };
    values[range].iter().copied().fold(f64::INFINITY, f64::min)
}

fn refine(times: &[f64], values: &[f64], i: usize) -> (f64, f64) {
    let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
    let den = a - 2.0 * b + c;
    if den >= 0.0 {
        return (times[i], b);
    }
    let d = (0.5 * (a - c) / den).clamp(-0.5, 0.5);
    let dt = if d >= 0.0 { times[i + 1] - times[i] } else { times[i] - times[i - 1] };
    (times[i] + d * dt, b - 0.25 * (a - c) * d)
}

/// Estimates the classical period and the revival time from `|A(t)|^2`.
///
/// The classical period is the mean spacing of the early returns, followed
/// from the first sample while exactly one prominent peak sits near each
/// expected return. The revival is the highest envelope maximum above
/// `revival_threshold` once the packet has collapsed. A candidate with a
/// strong peak at about twice its time is a fractional revival and is
/// skipped, so runs should stop short of twice the revival time.
pub fn detect_times(series: &AutocorrelationSeries, cfg: &DetectConfig) -> Result<RevivalEstimate> {
    let times = &series.times;
    let values = &series.values;
    ensure(times.len() >= 3 && times.len() == values.len(), || {
        format!("need at least 3 matching samples, got {} times and {} values", times.len(), values.len())
    })?;
    ensure(times.windows(2).all(|w| w[1] > w[0]), || "sample times must increase".into())?;
    let t0 = times[0];
    let peaks = find_peaks(times, values, cfg.min_height);

    let chain = classical_chain(&peaks, t0, cfg);
    let classical_period = chain.last().map(|p| (p.time - t0) / chain.len() as f64);
    let confidence = if chain.is_empty() {
        0.0
    } else {
        chain.iter().map(|p| p.prominence).sum::<f64>() / chain.len() as f64
    };

    let collapse = collapse_time(times, values, classical_period, cfg);
    let mut candidates = match collapse {
        Some(tc) => revival_candidates(&peaks, t0, tc, classical_period, cfg),
        None => Vec::new(),
    };
    // A partner only has to clear the collapse level: the full revival of a
    // wide packet can dip below the threshold its mirror still exceeds.
    for c in candidates.iter_mut() {
        let twice = 2.0 * (c.time - t0);
        c.fractional = peaks.iter().any(|p| {
            p.height >= cfg.collapse_level && ((p.time - t0) - twice).abs() <= cfg.pair_tolerance * twice
        });
    }
    let best = candidates
        .iter()
        .filter(|c| !c.fractional)
        .max_by(|a, b| a.height.total_cmp(&b.height))
        .copied();
    let comb_period = match (best, classical_period) {
        (Some(c), Some(p)) => {
            let m = ((c.comb_peak - t0) / p).round();
            (m >= 1.0).then(|| (c.comb_peak - t0) / m)
        }
        _ => None,
    };
    Ok(RevivalEstimate {
        classical_period,
        classical_peaks: chain,
        comb_period,
        revival_time: best.map(|c| c.time),
        revival_height: best.map_or(0.0, |c| c.height),
        candidates,
        confidence,
    })
}

fn classical_chain(peaks: &[Peak], t0: f64, cfg: &DetectConfig) -> Vec<Peak> {
    let prominent: Vec<Peak> = peaks.iter().copied().filter(|p| p.prominence >= cfg.classical_prominence).collect();
    // The first return must stand out; later bumps of a washed-out packet do not count.
    let first = match prominent.first() {
        Some(&p) if p.height >= cfg.classical_height => p,
        _ => return Vec::new(),
    };
    let prominent: Vec<Peak> = prominent.into_iter().filter(|p| p.height >= cfg.classical_height).collect();
    let mut chain = vec![first];
    loop {
        let j = chain.len() as f64;
        let period = (chain.last().unwrap().time - t0) / j;
        let expect = t0 + (j + 1.0) * period;
        let window = cfg.chain_tolerance * period;
        let mut near = prominent.iter().filter(|p| (p.time - expect).abs() <= window);
        match (near.next(), near.next()) {
            (Some(&p), None) => chain.push(p),
            _ => break,
        }
    }
    chain
}

/// First time after which a full window of `|A|^2` stays below `collapse_level`.
fn collapse_time(times: &[f64], values: &[f64], period: Option<f64>, cfg: &DetectConfig) -> Option<f64> {
    let t0 = times[0];
    let first_drop = times.iter().zip(values).find(|(_, &v)| v < cfg.collapse_level).map(|(&t, _)| t)?;
    let window = period.unwrap_or(2.0 * (first_drop - t0));
    let mut start = 0;
    for end in 0..times.len() {
        if values[end] >= cfg.collapse_level {
            start = end + 1;
        } else if start < times.len() && times[end] - times[start] >= window && times[start] > t0 {
            return Some(times[end]);
        }
    }
    None
}

fn revival_candidates(peaks: &[Peak], t0: f64, collapse: f64, period: Option<f64>, cfg: &DetectConfig) -> Vec<RevivalCandidate> {
    let late: Vec<Peak> = peaks.iter().copied().filter(|p| p.time > collapse).collect();
    let mut out: Vec<RevivalCandidate> = Vec::new();
    for (i, p) in late.iter().enumerate() {
        if p.height < cfg.revival_threshold {
            continue;
        }
        // Keep only the highest comb peak within a quarter of its own time.
        let reach = 0.25 * (p.time - t0);
        let dominated = late.iter().enumerate().any(|(j, q)| {
            j != i && (q.time - p.time).abs() <= reach && (q.height > p.height || (q.height == p.height && j < i))
        });
        if dominated {
            continue;
        }
        let (time, height) = match period {
            Some(s) => envelope_vertex(&late, p, s),
            None => (p.time, p.height),
        };
        out.push(RevivalCandidate { time, height, comb_peak: p.time, fractional: false });
    }
    out
}

/// Vertex of the parabola through `ln h` at the comb peak and its neighbours
/// one period away on either side.
fn envelope_vertex(peaks: &[Peak], p: &Peak, period: f64) -> (f64, f64) {
    let neighbour = |sign: f64| {
        peaks
            .iter()
            .filter(|q| {
                let d = sign * (q.time - p.time);
                d >= 0.5 * period && d <= 1.5 * period
            })
            .max_by(|a, b| a.height.total_cmp(&b.height))
            .copied()
    };
    let (Some(a), Some(c)) = (neighbour(-1.0), neighbour(1.0)) else {
        return (p.time, p.height);
    };
    let (la, lb, lc) = (a.height.ln(), p.height.ln(), c.height.ln());
    let (ta, tb, tc) = (a.time - p.time, 0.0, c.time - p.time);
    // Parabola through three points with unequal spacing.
    let d1 = (lb - la) / (tb - ta);
    let d2 = (lc - lb) / (tc - tb);
    let curv = (d2 - d1) / (tc - ta);
    if curv >= 0.0 {
        return (p.time, p.height);
    }
    let slope = d1 - curv * (ta + tb);
    let x = (-slope / (2.0 * curv)).clamp(ta, tc);
    let ln_h = lb + slope * x + curv * x * x;
    (p.time + x, ln_h.exp().min(1.0))
}
