//! Random-instance stress suites for the perturbation bounds.

use rayon::prelude::*;
use rhpe_core::bounds::{
    perturbative_case, strict_case, subsample_error_scaling, BoundReport, LikelihoodProbe,
    PerturbativeCase, PerturbativeSettings, ScalingReport, StrictCase, StrictSettings,
};
use rhpe_core::rng::derive_seed;
use rhpe_core::solver::Eigensystem;

use crate::config::AuditSection;
use crate::error::CliError;
use crate::inputs::load_hamiltonian;
use crate::output::{float, Table};

pub const REPORT_COLUMNS: [&str; 10] = [
    "suite", "instance", "seed", "context", "gamma", "lambda", "m", "bound", "observed", "satisfied",
];

#[derive(Clone, Debug, PartialEq)]
pub struct AuditResult {
    pub strict: Vec<StrictCase>,
    pub perturbative: Vec<PerturbativeCase>,
    pub subsample: Option<ScalingReport>,
    pub ratio_bins: usize,
    pub max_ratio: f64,
}

impl AuditResult {
    pub fn strict_violations(&self) -> usize {
        self.strict.iter().map(StrictCase::violations).sum()
    }

    pub fn overlap_rate(&self) -> f64 {
        rate(self.perturbative.iter().map(|c| c.overlap.satisfied))
    }

    pub fn deviation_rate(&self) -> f64 {
        rate(self.perturbative.iter().map(|c| c.deviation.report.satisfied))
    }
}

fn rate(flags: impl Iterator<Item = bool>) -> f64 {
    let (mut hit, mut n) = (0usize, 0usize);
    for f in flags {
        n += 1;
        hit += f as usize;
    }
    if n == 0 { f64::NAN } else { hit as f64 / n as f64 }
}

/// Strict instance `i` uses `derive_seed(seed, [0, i])`, perturbative
/// instance `i` uses `derive_seed(seed, [1, i])` and the subsample scan
/// uses `derive_seed(seed, [2])`.
pub fn run_audit(cfg: &AuditSection, seed: u64) -> Result<AuditResult, CliError> {
    let mut strict_settings = StrictSettings::default();
    if let Some(g) = cfg.strict_grid_points {
        strict_settings.grid_points = g;
    }
    let strict = (0..cfg.strict_instances)
        .into_par_iter()
        .map(|i| strict_case(derive_seed(seed, &[0, i as u64]), &strict_settings))
        .collect::<Result<Vec<_>, _>>()?;

    let mut pert_settings = PerturbativeSettings::default();
    if let Some(r) = cfg.max_ratio {
        pert_settings.max_ratio = r;
    }
    let perturbative = (0..cfg.perturbative_instances)
        .into_par_iter()
        .map(|i| perturbative_case(derive_seed(seed, &[1, i as u64]), &pert_settings))
        .collect::<Result<Vec<_>, _>>()?;

    let subsample = match &cfg.subsample {
        None => None,
        Some(s) => {
            let h = load_hamiltonian(&s.hamiltonian)?;
            let psi = Eigensystem::new(&h)?.ground_state();
            let probe = LikelihoodProbe { reps: s.probe_reps, time: s.probe_time };
            Some(subsample_error_scaling(&h, &psi, &s.m_values, s.trials, probe, derive_seed(seed, &[2]))?)
        }
    };

    Ok(AuditResult {
        strict,
        perturbative,
        subsample,
        ratio_bins: cfg.ratio_bins,
        max_ratio: pert_settings.max_ratio,
    })
}

fn report_row(suite: &str, instance: usize, seed: u64, r: &BoundReport, stats: Option<(f64, f64, usize)>) -> Vec<String> {
    let (g, l, m) = match stats {
        Some((g, l, m)) => (float(g), float(l), m.to_string()),
        None => (String::new(), String::new(), String::new()),
    };
    vec![
        suite.to_string(),
        instance.to_string(),
        seed.to_string(),
        r.context.clone(),
        g,
        l,
        m,
        float(r.bound),
        float(r.observed),
        r.satisfied.to_string(),
    ]
}

pub fn reports_table(res: &AuditResult) -> Table {
    let mut t = Table::new(&REPORT_COLUMNS);
    for (i, c) in res.strict.iter().enumerate() {
        for r in c.reports.all() {
            t.push(report_row("strict", i, c.seed, r, None));
        }
    }
    for (i, c) in res.perturbative.iter().enumerate() {
        let s = (c.stats.gamma, c.stats.lambda, c.stats.m_count);
        t.push(report_row("perturbative", i, c.seed, &c.overlap, Some(s)));
        t.push(report_row("perturbative", i, c.seed, &c.deviation.report, Some(s)));
    }
    t
}

/// Satisfaction rates of the perturbative suite in equal-width `λ/γ` bins.
pub fn satisfaction_table(res: &AuditResult) -> Table {
    let mut t = Table::new(&["ratio_low", "ratio_high", "instances", "overlap_rate", "deviation_rate"]);
    let width = res.max_ratio / res.ratio_bins as f64;
    for b in 0..res.ratio_bins {
        let (lo, hi) = (b as f64 * width, (b + 1) as f64 * width);
        let last = b + 1 == res.ratio_bins;
        let cases: Vec<&PerturbativeCase> = res
            .perturbative
            .iter()
            .filter(|c| {
                let r = c.ratio();
                r >= lo && (r < hi || (last && r <= hi))
            })
            .collect();
        t.push(vec![
            float(lo),
            float(hi),
            cases.len().to_string(),
            float(rate(cases.iter().map(|c| c.overlap.satisfied))),
            float(rate(cases.iter().map(|c| c.deviation.report.satisfied))),
        ]);
    }
    t
}

pub fn subsample_table(res: &AuditResult) -> Table {
    let mut t = Table::new(&["m", "rms"]);
    if let Some(s) = &res.subsample {
        for r in &s.rows {
            t.push(vec![r.m.to_string(), float(r.rms)]);
        }
    }
    t
}

pub fn summary_table(res: &AuditResult) -> Table {
    let slope = res.subsample.as_ref().and_then(|s| s.slope).map(float).unwrap_or_default();
    let rows = [
        ("strict_instances", res.strict.len().to_string()),
        ("strict_violations", res.strict_violations().to_string()),
        ("perturbative_instances", res.perturbative.len().to_string()),
        ("overlap_rate", float(res.overlap_rate())),
        ("deviation_rate", float(res.deviation_rate())),
        ("subsample_slope", slope),
    ];
    let mut t = Table::new(&["metric", "value"]);
    for (k, v) in rows {
        t.push(vec![k.to_string(), v]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty() -> AuditSection {
        AuditSection {
            strict_instances: 0,
            strict_grid_points: None,
            perturbative_instances: 0,
            max_ratio: None,
            ratio_bins: 5,
            subsample: None,
        }
    }

    #[test]
    fn zero_instances_give_header_only() {
        let res = run_audit(&empty(), 1).unwrap();
        let text = String::from_utf8(reports_table(&res).to_bytes()).unwrap();
        assert_eq!(text.trim_end(), REPORT_COLUMNS.join(","));
        assert_eq!(res.strict_violations(), 0);
    }

    #[test]
    fn small_batches_are_reported() {
        let cfg = AuditSection {
            strict_instances: 2,
            strict_grid_points: Some(1 << 12),
            perturbative_instances: 3,
            ..empty()
        };
        let res = run_audit(&cfg, 11).unwrap();
        assert_eq!(res.strict_violations(), 0);
        let rows = reports_table(&res).to_bytes();
        let lines = String::from_utf8(rows).unwrap().lines().count();
        assert_eq!(lines, 1 + 2 * 5 + 3 * 2);
        let binned: usize = String::from_utf8(satisfaction_table(&res).to_bytes())
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(2).unwrap().parse::<usize>().unwrap())
            .sum();
        assert_eq!(binned, 3);
    }
}
