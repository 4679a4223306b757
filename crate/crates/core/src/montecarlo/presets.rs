//! Named simulation designs covering the size tables, power tables and
//! density figures of the study.

use crate::distributions::SMParams;
use crate::error::{Error, Result};
use crate::sample::MeasureKind;

use super::density::{z_s_density_diagnostic, DensityCurve, DensityDesign, DensitySpec, TrueSdCache};
use super::{run_power_experiment, run_size_experiment, SimSpec, SizePowerCell, TestSpec, DEFAULT_REPLICATIONS};

pub const DEFAULT_RESAMPLES: usize = 999;

const THEIL_TABLE_PAIRS: [(f64, f64); 3] = [(2.5, 2.502199), (3.2, 1.2320215), (5.8, 0.4996163)];
const GINI_TABLE_PAIRS: [(f64, f64); 3] = [(2.5, 2.640350), (3.2, 1.1866026), (5.8, 0.4473111)];
const BASE_PAIR: (f64, f64) = (2.8, 1.7);
const MODERATE_HEAVY: (f64, f64) = (2.0, 1.1);
const EXTREME_HEAVY: (f64, f64) = (2.0, 0.7);
const SIZE_GRID_N2: [usize; 5] = [50, 200, 500, 1000, 5000];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetKind {
    Size,
    Power,
    Density,
}

/// One column of a table: a design and, for power tables, its null.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetColumn {
    pub label: String,
    pub spec: SimSpec,
    pub null_spec: Option<SimSpec>,
}

/// A density curve request; `keep_z` / `keep_s` select which of the two
/// statistics the figure shows at this sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityRequest {
    pub spec: DensitySpec,
    pub keep_z: bool,
    pub keep_s: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub kind: PresetKind,
    pub columns: Vec<PresetColumn>,
    pub densities: Vec<DensityRequest>,
}

/// Output of [`Preset::run`].
#[derive(Debug, Clone, PartialEq)]
pub struct PresetResult {
    pub tables: Vec<(String, Vec<SizePowerCell>)>,
    pub densities: Vec<DensityCurve>,
}

impl Preset {
    pub fn with_replications(mut self, replications: usize) -> Self {
        for c in &mut self.columns {
            c.spec.replications = replications;
            if let Some(n) = &mut c.null_spec {
                n.replications = replications;
            }
        }
        for d in &mut self.densities {
            d.spec.replications = replications;
            d.spec.calibration_replications = replications;
        }
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        for c in &mut self.columns {
            c.spec.seed = seed;
            if let Some(n) = &mut c.null_spec {
                n.seed = seed;
            }
        }
        for d in &mut self.densities {
            d.spec.seed = seed;
        }
        self
    }

    /// Set `B` for every permutation and bootstrap test.
    pub fn with_resamples(self, b: usize) -> Self {
        self.with_permutation_resamples(b).with_bootstrap_resamples(b)
    }

    pub fn with_permutation_resamples(self, b: usize) -> Self {
        self.map_tests(|t| {
            if let TestSpec::Permutation { b: old } = t {
                *old = b;
            }
        })
    }

    pub fn with_bootstrap_resamples(self, b: usize) -> Self {
        self.map_tests(|t| {
            if let TestSpec::Bootstrap { b: old } = t {
                *old = b;
            }
        })
    }

    fn map_tests(mut self, f: impl Fn(&mut TestSpec)) -> Self {
        for c in &mut self.columns {
            c.spec.tests.iter_mut().for_each(&f);
            if let Some(n) = &mut c.null_spec {
                n.tests.iter_mut().for_each(&f);
            }
        }
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        for c in &mut self.columns {
            c.spec.alpha = alpha;
            if let Some(n) = &mut c.null_spec {
                n.alpha = alpha;
            }
        }
        self
    }

    /// Validate every column before any replication runs.
    pub fn validate(&self) -> Result<()> {
        for c in &self.columns {
            c.spec.validate()?;
            c.spec.resolved_hypothesis()?;
            if let Some(n) = &c.null_spec {
                n.validate()?;
                n.resolved_hypothesis()?;
            }
        }
        Ok(())
    }

    pub fn run(&self) -> Result<PresetResult> {
        self.validate()?;
        let mut tables = Vec::with_capacity(self.columns.len());
        for c in &self.columns {
            let cells = match &c.null_spec {
                Some(null) => run_power_experiment(&c.spec, null)?,
                None => run_size_experiment(&c.spec)?,
            };
            log::info!("{}: {} done", self.name, c.label);
            tables.push((c.label.clone(), cells));
        }
        let mut cache = TrueSdCache::new();
        let mut densities = Vec::new();
        for d in &self.densities {
            let (z, s) = z_s_density_diagnostic(&d.spec, &mut cache)?;
            if d.keep_z {
                densities.push(z);
            }
            if d.keep_s {
                densities.push(s);
            }
        }
        Ok(PresetResult { tables, densities })
    }
}

fn sm(pair: (f64, f64)) -> SMParams {
    SMParams::with_b0(pair.0, pair.1).expect("preset parameters are positive")
}

fn zeta_label(pair: (f64, f64)) -> String {
    format!("{:.2}", pair.0 * pair.1)
}

fn q_grid() -> [usize; 4] {
    [4, 8, 12, 16]
}

fn one_sample_roster() -> Vec<TestSpec> {
    let mut v = vec![TestSpec::Asymptotic];
    v.extend(q_grid().map(|q| TestSpec::OneSample { q }));
    v
}

fn two_sample_roster() -> Vec<TestSpec> {
    let mut v = vec![TestSpec::Asymptotic];
    v.extend(q_grid().map(|q| TestSpec::TwoSample { q1: q, q2: q }));
    v.extend(q_grid().map(|q| TestSpec::Paired { q }));
    v.push(TestSpec::Permutation { b: DEFAULT_RESAMPLES });
    v.push(TestSpec::Bootstrap { b: DEFAULT_RESAMPLES });
    v
}

fn roster_with_pairs(pairs: &[(usize, usize)]) -> Vec<TestSpec> {
    let mut v = vec![TestSpec::Asymptotic];
    v.extend(pairs.iter().map(|&(q1, q2)| TestSpec::TwoSample { q1, q2 }));
    v.push(TestSpec::Permutation { b: DEFAULT_RESAMPLES });
    v.push(TestSpec::Bootstrap { b: DEFAULT_RESAMPLES });
    v
}

/// `(q1, q2)` combinations of the group-count comparison table.
pub const GROUP_COUNT_PAIRS: [(usize, usize); 12] = [
    (4, 4),
    (8, 8),
    (12, 12),
    (16, 16),
    (3, 4),
    (6, 8),
    (9, 12),
    (12, 16),
    (2, 4),
    (4, 8),
    (6, 12),
    (8, 16),
];

/// `(q1, q2)` combinations of the unequal-size power tables.
pub const POWER_GROUP_PAIRS: [(usize, usize); 12] = [
    (4, 4),
    (8, 8),
    (12, 12),
    (16, 16),
    (4, 3),
    (8, 6),
    (12, 9),
    (16, 12),
    (4, 2),
    (8, 4),
    (12, 6),
    (16, 8),
];

fn measure_name(m: MeasureKind) -> &'static str {
    match m {
        MeasureKind::Gini => "gini",
        _ => "theil",
    }
}

struct Design {
    gen_i: (f64, f64),
    gen_y: Option<(f64, f64)>,
    n1: usize,
    n2: usize,
    measure: MeasureKind,
    tests: Vec<TestSpec>,
}

fn sim(label: String, d: Design) -> SimSpec {
    SimSpec {
        label,
        generator_i: sm(d.gen_i),
        generator_y: d.gen_y.map(sm),
        n1: d.n1,
        n2: d.n2,
        measure: d.measure,
        tests: d.tests,
        alpha: 0.05,
        replications: DEFAULT_REPLICATIONS,
        seed: 1,
        hypothesis: None,
    }
}

fn size_column(label: String, d: Design) -> PresetColumn {
    PresetColumn {
        spec: sim(label.clone(), d),
        label,
        null_spec: None,
    }
}

fn power_column(label: String, d: Design) -> PresetColumn {
    let null = Design {
        gen_y: Some(d.gen_i),
        tests: d.tests.clone(),
        ..d
    };
    let null_spec = sim(format!("{label} null"), null);
    let spec = sim(label.clone(), d);
    PresetColumn {
        label,
        spec,
        null_spec: Some(null_spec),
    }
}

fn preset(name: &str, description: &str, kind: PresetKind, columns: Vec<PresetColumn>) -> Preset {
    Preset {
        name: name.into(),
        description: description.into(),
        kind,
        columns,
        densities: Vec::new(),
    }
}

fn table1(measure: MeasureKind, n: usize) -> Preset {
    let pairs = match measure {
        MeasureKind::Gini => GINI_TABLE_PAIRS,
        _ => THEIL_TABLE_PAIRS,
    };
    let name = measure_name(measure);
    let columns = pairs
        .iter()
        .map(|&p| {
            size_column(
                format!("{name} zeta={}", zeta_label(p)),
                Design {
                    gen_i: p,
                    gen_y: None,
                    n1: n,
                    n2: n,
                    measure,
                    tests: one_sample_roster(),
                },
            )
        })
        .collect();
    preset(
        &format!("table1-{name}-N{n}"),
        &format!("one-sample size, {name}, N = {n}, three tail indices"),
        PresetKind::Size,
        columns,
    )
}

fn per_measure<F>(f: F) -> Vec<PresetColumn>
where
    F: Fn(MeasureKind, &'static str) -> Vec<PresetColumn>,
{
    let mut v = f(MeasureKind::Theil, "theil");
    v.extend(f(MeasureKind::Gini, "gini"));
    v
}

fn table_pairs(m: MeasureKind) -> [(f64, f64); 3] {
    match m {
        MeasureKind::Gini => GINI_TABLE_PAIRS,
        _ => THEIL_TABLE_PAIRS,
    }
}

fn heaviest_grid_pair(m: MeasureKind) -> (f64, f64) {
    table_pairs(m)[2]
}

fn figure(name: &str, description: &str, measure: MeasureKind, pair: (f64, f64), design: DensityDesign) -> Preset {
    let densities = [50usize, 100, 1000]
        .iter()
        .map(|&n| DensityRequest {
            spec: DensitySpec::new(sm(pair), measure, design, n),
            keep_z: true,
            keep_s: n == 100,
        })
        .collect();
    Preset {
        name: name.into(),
        description: description.into(),
        kind: PresetKind::Density,
        columns: Vec::new(),
        densities,
    }
}

/// Every named design, with [`DEFAULT_REPLICATIONS`] replications, seed 1,
/// `α = 0.05` and `B = 999` resamples.
pub fn preset_catalog() -> Vec<Preset> {
    let mut out = Vec::new();
    for m in [MeasureKind::Theil, MeasureKind::Gini] {
        for n in [200, 500, 1000] {
            out.push(table1(m, n));
        }
    }

    out.push(preset(
        "table2-identical",
        "two-sample size, identical parents, N1 = N2 = 200",
        PresetKind::Size,
        per_measure(|m, name| {
            table_pairs(m)
                .iter()
                .chain([MODERATE_HEAVY, EXTREME_HEAVY].iter())
                .map(|&p| {
                    size_column(
                        format!("{name} zeta={}", zeta_label(p)),
                        Design { gen_i: p, gen_y: Some(p), n1: 200, n2: 200, measure: m, tests: two_sample_roster() },
                    )
                })
                .collect()
        }),
    ));

    out.push(preset(
        "table3-different-dists",
        "two-sample size, zeta_I = 4.76 against iso-index parents, N1 = N2 = 200",
        PresetKind::Size,
        per_measure(|m, name| {
            table_pairs(m)
                .iter()
                .map(|&p| {
                    size_column(
                        format!("{name} zetaY={}", zeta_label(p)),
                        Design { gen_i: BASE_PAIR, gen_y: Some(p), n1: 200, n2: 200, measure: m, tests: two_sample_roster() },
                    )
                })
                .collect()
        }),
    ));

    let sizes = |name: &str, description: &str, gen_i: Option<(f64, f64)>, gen_y: fn(MeasureKind) -> (f64, f64)| {
        preset(
            name,
            description,
            PresetKind::Size,
            per_measure(|m, mname| {
                SIZE_GRID_N2
                    .iter()
                    .map(|&n2| {
                        let y = gen_y(m);
                        size_column(
                            format!("{mname} N2={n2}"),
                            Design {
                                gen_i: gen_i.unwrap_or(y),
                                gen_y: Some(y),
                                n1: 200,
                                n2,
                                measure: m,
                                tests: two_sample_roster(),
                            },
                        )
                    })
                    .collect()
            }),
        )
    };
    out.push(sizes(
        "table4-identical-different-sizes",
        "two-sample size, identical parents at the heaviest iso-index pair, N1 = 200",
        None,
        heaviest_grid_pair,
    ));
    out.push(sizes(
        "table5-different-sizes",
        "two-sample size, identical parents with zeta = 1.4, N1 = 200",
        None,
        |_| EXTREME_HEAVY,
    ));
    out.push(sizes(
        "table6-different-dists-sizes",
        "two-sample size, zeta_I = 4.76 against the heaviest iso-index pair, N1 = 200",
        Some(BASE_PAIR),
        heaviest_grid_pair,
    ));

    out.push(preset(
        "table7-different-groups",
        "two-sample size, identical parents with zeta = 2.2, N1 = 200, unequal group counts",
        PresetKind::Size,
        per_measure(|m, name| {
            [400usize, 600, 800]
                .iter()
                .map(|&n2| {
                    size_column(
                        format!("{name} N2={n2}"),
                        Design {
                            gen_i: MODERATE_HEAVY,
                            gen_y: Some(MODERATE_HEAVY),
                            n1: 200,
                            n2,
                            measure: m,
                            tests: roster_with_pairs(&GROUP_COUNT_PAIRS),
                        },
                    )
                })
                .collect()
        }),
    ));

    let power = |name: &str, description: &str, gen_i: (f64, f64), n1: usize, n2: usize,
                 theil_c: [f64; 5], gini_c: [f64; 5], tests: fn() -> Vec<TestSpec>| {
        preset(
            name,
            description,
            PresetKind::Power,
            per_measure(|m, mname| {
                let cs = if m == MeasureKind::Gini { gini_c } else { theil_c };
                cs.iter()
                    .map(|&c| {
                        let y = (gen_i.0, c);
                        power_column(
                            format!("{mname} zetaY={}", zeta_label(y)),
                            Design { gen_i, gen_y: Some(y), n1, n2, measure: m, tests: tests() },
                        )
                    })
                    .collect()
            }),
        )
    };
    let base_c = [0.7, 1.1, 1.7, 2.7, 31.7];
    let heavy_c = [0.7, 0.9, 1.1, 1.5, 3.7];
    let heavy_c_gini = [0.7, 0.9, 1.1, 1.5, 2.2];
    out.push(power(
        "table8-power-equal-sizes",
        "size-adjusted power, zeta_I = 4.76, N1 = N2 = 200",
        BASE_PAIR, 200, 200, base_c, base_c, two_sample_roster,
    ));
    out.push(power(
        "table9-power-heavy",
        "size-adjusted power, zeta_I = 2.2, N1 = N2 = 200",
        MODERATE_HEAVY, 200, 200, heavy_c, heavy_c, two_sample_roster,
    ));
    out.push(power(
        "table10-power-N200-400",
        "size-adjusted power, zeta_I = 2.2, N1 = 200, N2 = 400",
        MODERATE_HEAVY, 200, 400, heavy_c, heavy_c_gini, two_sample_roster,
    ));
    out.push(power(
        "table11-power-N400-200",
        "size-adjusted power, zeta_I = 2.2, N1 = 400, N2 = 200",
        MODERATE_HEAVY, 400, 200, heavy_c, heavy_c_gini, two_sample_roster,
    ));
    fn unequal_roster() -> Vec<TestSpec> {
        roster_with_pairs(&POWER_GROUP_PAIRS)
    }
    out.push(power(
        "table12-power-N200-800",
        "size-adjusted power, zeta_I = 2.2, N1 = 200, N2 = 800, unequal group counts",
        MODERATE_HEAVY, 200, 800, heavy_c, heavy_c_gini, unequal_roster,
    ));
    out.push(power(
        "table13-power-N800-200",
        "size-adjusted power, zeta_I = 2.2, N1 = 800, N2 = 200, unequal group counts",
        MODERATE_HEAVY, 800, 200, heavy_c, heavy_c_gini, unequal_roster,
    ));

    let heavy_gini = GINI_TABLE_PAIRS[2];
    out.push(figure("figure1-theil-one-sample", "Z and S densities, Theil, zeta = 4.76",
        MeasureKind::Theil, BASE_PAIR, DensityDesign::OneSample));
    out.push(figure("figure2-gini-one-sample", "Z and S densities, Gini, zeta = 4.76",
        MeasureKind::Gini, BASE_PAIR, DensityDesign::OneSample));
    out.push(figure("figure3-gini-one-sample-heavy", "Z and S densities, Gini, zeta = 2.59",
        MeasureKind::Gini, heavy_gini, DensityDesign::OneSample));
    out.push(figure("figure4-theil-two-sample", "Z and S densities of a difference, Theil, zeta = 4.76",
        MeasureKind::Theil, BASE_PAIR, DensityDesign::TwoSample));
    out.push(figure("figure5-gini-two-sample", "Z and S densities of a difference, Gini, zeta = 4.76",
        MeasureKind::Gini, BASE_PAIR, DensityDesign::TwoSample));
    out.push(figure("figure6-gini-two-sample-heavy", "Z and S densities of a difference, Gini, zeta = 2.59",
        MeasureKind::Gini, heavy_gini, DensityDesign::TwoSample));
    out
}

/// Look a preset up by name; the error lists the catalog.
pub fn find_preset(name: &str) -> Result<Preset> {
    let catalog = preset_catalog();
    let names: Vec<String> = catalog.iter().map(|p| p.name.clone()).collect();
    catalog
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::Usage(format!("unknown preset '{name}'; available: {}", names.join(", "))))
}
