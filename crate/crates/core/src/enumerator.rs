//! Expansion of each set declaration into its elements and enumeration of
//! the Cartesian product in index order.
//!
//! The last dimension varies fastest: point `j + 1` differs from point `j`
//! only in a suffix of its coordinates.

use bigdecimal::{BigDecimal, Signed, ToPrimitive, Zero};

use crate::config::ConfigTable;
use crate::error::{Error, Result};
use crate::grammar::{LoopType, ParameterSpec, SetSpec};
use crate::value::{
    apply_transform_chain, decimal_to_f64, f64_to_decimal, parse_scalar, plain_string, round_significant,
    NumKind, Scalar, SweepRng, Transform, FLOAT_DIGITS,
};
use crate::wildcard::{has_wildcard, positional_refs, substitute, SubstitutionContext};

/// Relative tolerance for bound inclusion and skip matching on values that
/// went through floating point.
pub const RELATIVE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Element {
    Resolved(String),
    /// Raw text still carrying tags; resolved and transformed per point.
    Deferred(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionSet {
    pub elements: Vec<Element>,
    /// Chain still to run on deferred elements once resolved.
    pub chain: Vec<Transform>,
}

impl DimensionSet {
    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn deferred(&self) -> bool {
        self.elements.iter().any(|e| matches!(e, Element::Deferred(_)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepPoint {
    pub index: u64,
    pub label: String,
    pub coordinates: Vec<String>,
}

/// Zero-padded decimal label of point `j` out of `m`; the width is the digit
/// count of `m - 1`.
pub fn index_label(j: u64, m: u64) -> String {
    let width = m.saturating_sub(1).to_string().len();
    format!("{j:0width$}")
}

fn syntax(spec: &SetSpec, message: impl Into<String>) -> Error {
    Error::syntax(spec.line_number, message)
}

fn ensure_non_empty(spec: &SetSpec, set: &DimensionSet) -> Result<()> {
    if set.elements.is_empty() {
        Err(syntax(spec, "every element of the set was skipped"))
    } else {
        Ok(())
    }
}

pub fn expand_list(spec: &SetSpec, cfg: &ConfigTable, rng: &mut SweepRng) -> Result<DimensionSet> {
    debug_assert_eq!(spec.loop_type, LoopType::List);
    let mut elements = Vec::with_capacity(spec.values.len());
    for raw in spec.values.iter().filter(|v| !spec.skips.contains(v)) {
        if has_wildcard(raw, &cfg.job_template_wildcard) {
            elements.push(Element::Deferred(raw.clone()));
        } else if spec.function_chain.is_empty() {
            elements.push(Element::Resolved(raw.clone()));
        } else {
            let v = parse_scalar(raw, cfg.use_bignum);
            let v = apply_transform_chain(&spec.function_chain, v, rng, cfg.use_bignum)?;
            elements.push(Element::Resolved(v.render()));
        }
    }
    let set = DimensionSet {
        elements,
        chain: spec.function_chain.clone(),
    };
    ensure_non_empty(spec, &set)?;
    Ok(set)
}

fn bound(spec: &SetSpec, name: &str, raw: &Option<String>, cfg: &ConfigTable) -> Result<Scalar> {
    let raw = raw.as_deref().ok_or_else(|| syntax(spec, format!("{name} missing")))?;
    if has_wildcard(raw, &cfg.job_template_wildcard) {
        return Err(syntax(spec, format!("{name} may not contain wildcards")));
    }
    Ok(parse_scalar(raw, cfg.use_bignum))
}

fn numeric(spec: &SetSpec, name: &str, v: &Scalar) -> Result<(NumKind, BigDecimal)> {
    v.as_number()
        .map(|(k, x)| (k, x.clone()))
        .ok_or_else(|| syntax(spec, format!("{name} must be numeric, got `{}`", v.render())))
}

/// Gives float-derived or inexact values a kind that renders them
/// faithfully: integral kinds cannot hold fractions.
fn settle_kind(kind: NumKind, value: &BigDecimal, fallback: NumKind) -> NumKind {
    match kind {
        NumKind::Integer | NumKind::BigNum if !value.is_integer() => fallback,
        other => other,
    }
}

fn linear_values(spec: &SetSpec, cfg: &ConfigTable) -> Result<Vec<Scalar>> {
    let start = bound(spec, "START", &spec.start, cfg)?;
    let end = bound(spec, "END", &spec.end, cfg)?;
    match (&start, &end) {
        (Scalar::Character(a), Scalar::Character(b)) => char_range(spec, *a, *b),
        (Scalar::Number { .. }, Scalar::Number { .. }) => {
            let (ks, s) = numeric(spec, "START", &start)?;
            let (ke, e) = numeric(spec, "END", &end)?;
            let kind = ks.widen(ke);
            if let Some(step) = &spec.step {
                let step = bound(spec, "STEP", &Some(step.clone()), cfg)?;
                let (kstep, step) = numeric(spec, "STEP", &step)?;
                if !step.is_positive() {
                    return Err(syntax(spec, "STEP must be positive"));
                }
                if s > e {
                    return Err(syntax(spec, "START is greater than END"));
                }
                let kind = kind.widen(kstep);
                let mut out = Vec::new();
                let mut r = s;
                while r <= e {
                    out.push(Scalar::number(settle_kind(kind, &r, NumKind::Decimal), r.clone()));
                    r += &step;
                }
                Ok(out)
            } else {
                let points = spec.points.expect("grammar guarantees STEP or POINTS");
                Ok(linear_points(s, e, points, kind, cfg.use_bignum))
            }
        }
        _ => Err(syntax(
            spec,
            format!(
                "START and END must be both numbers or both characters, got `{}` and `{}`",
                start.render(),
                end.render()
            ),
        )),
    }
}

fn linear_points(s: BigDecimal, e: BigDecimal, points: u64, kind: NumKind, bignum: bool) -> Vec<Scalar> {
    if points == 1 {
        return vec![Scalar::number(kind, s)];
    }
    let intervals = BigDecimal::from(points - 1);
    let diff = &e - &s;
    (0..points)
        .map(|j| {
            let num = &diff * BigDecimal::from(j);
            let q = &num / &intervals;
            let value = if &q * &intervals == num {
                &s + q
            } else {
                let r = &s + q;
                let int_digits = plain_string(&r.with_scale(0).abs()).trim_start_matches('0').len() as u64;
                let digits = if bignum { int_digits + FLOAT_DIGITS } else { FLOAT_DIGITS };
                round_significant(&r, digits)
            };
            Scalar::number(settle_kind(kind, &value, NumKind::Decimal), value)
        })
        .collect()
}

fn char_range(spec: &SetSpec, a: char, b: char) -> Result<Vec<Scalar>> {
    let (a, b) = (a as u32, b as u32);
    let codes: Vec<u32> = if let Some(step) = &spec.step {
        let step: u32 = step
            .parse()
            .ok()
            .filter(|s| *s > 0)
            .ok_or_else(|| syntax(spec, "STEP of a character range must be a positive integer"))?;
        if a > b {
            return Err(syntax(spec, "START is greater than END"));
        }
        (a..=b).step_by(step as usize).collect()
    } else {
        let points = spec.points.expect("grammar guarantees STEP or POINTS") as i64;
        if points == 1 {
            vec![a]
        } else {
            let diff = b as i64 - a as i64;
            if diff % (points - 1) != 0 {
                return Err(syntax(spec, "POINTS does not divide the character range evenly"));
            }
            let step = diff / (points - 1);
            (0..points).map(|j| (a as i64 + j * step) as u32).collect()
        }
    };
    codes
        .into_iter()
        .map(|c| {
            char::from_u32(c)
                .map(Scalar::Character)
                .ok_or_else(|| syntax(spec, format!("code point {c} is not a character")))
        })
        .collect()
}

fn pow10(value: &BigDecimal, exponent: i64) -> BigDecimal {
    let (mantissa, scale) = value.as_bigint_and_exponent();
    BigDecimal::new(mantissa, scale - exponent)
}

fn within_upper(r: &BigDecimal, end: &BigDecimal) -> bool {
    if r <= end {
        return true;
    }
    let (r, e) = (decimal_to_f64(r), decimal_to_f64(end));
    r <= e * (1.0 + RELATIVE_TOLERANCE)
}

/// Snaps a float-derived value to the nearest integer when it lies within the
/// relative tolerance of it.
fn snap_integral(value: BigDecimal) -> BigDecimal {
    let nearest = value.round(0);
    let gap = decimal_to_f64(&(&value - &nearest)).abs();
    if gap <= RELATIVE_TOLERANCE * decimal_to_f64(&value).abs() {
        nearest.with_scale(0)
    } else {
        value
    }
}

fn exponential_values(spec: &SetSpec, cfg: &ConfigTable) -> Result<Vec<Scalar>> {
    let start = bound(spec, "START", &spec.start, cfg)?;
    let end = bound(spec, "END", &spec.end, cfg)?;
    let (ks, s) = numeric(spec, "START", &start)?;
    let (ke, e) = numeric(spec, "END", &end)?;
    if !s.is_positive() || !e.is_positive() {
        return Err(syntax(spec, "EXPRANGE bounds must be positive"));
    }
    if s > e {
        return Err(syntax(spec, "START is greater than END"));
    }
    let kind = ks.widen(ke);
    let mut out = Vec::new();
    if let Some(step) = &spec.step {
        let step = bound(spec, "STEP", &Some(step.clone()), cfg)?;
        let (_, step) = numeric(spec, "STEP", &step)?;
        if !step.is_positive() {
            return Err(syntax(spec, "STEP must be positive"));
        }
        if step.is_integer() {
            let e10 = step
                .to_i64()
                .ok_or_else(|| syntax(spec, "STEP is out of range"))?;
            let mut j = 0i64;
            loop {
                let r = pow10(&s, j * e10);
                if !within_upper(&r, &e) {
                    break;
                }
                out.push(Scalar::number(kind, r));
                j += 1;
            }
        } else {
            let (s_f, step_f) = (decimal_to_f64(&s), decimal_to_f64(&step));
            let mut j = 0i32;
            loop {
                let r = if j == 0 {
                    s.clone()
                } else {
                    snap_integral(f64_to_decimal(s_f * 10f64.powf(j as f64 * step_f)))
                };
                if !within_upper(&r, &e) {
                    break;
                }
                out.push(Scalar::number(settle_kind(kind, &r, NumKind::Scientific), r));
                j += 1;
            }
        }
    } else {
        let points = spec.points.expect("grammar guarantees STEP or POINTS");
        let (ls, le) = (decimal_to_f64(&s).log10(), decimal_to_f64(&e).log10());
        for j in 0..points {
            let r = if j == 0 {
                s.clone()
            } else if j == points - 1 {
                e.clone()
            } else {
                let x = ls + j as f64 * (le - ls) / (points - 1) as f64;
                snap_integral(f64_to_decimal(10f64.powf(x)))
            };
            out.push(Scalar::number(settle_kind(kind, &r, NumKind::Scientific), r));
        }
    }
    Ok(out)
}

fn matches_skip(v: &Scalar, skip: &Scalar) -> bool {
    match (v.as_number(), skip.as_number()) {
        (Some((_, a)), Some((_, b))) => {
            if a == b {
                return true;
            }
            if b.is_zero() {
                return false;
            }
            let rel = decimal_to_f64(&((a - b) / b)).abs();
            rel <= RELATIVE_TOLERANCE
        }
        _ => v.render() == skip.render(),
    }
}

fn finish_numeric(
    spec: &SetSpec,
    values: Vec<Scalar>,
    cfg: &ConfigTable,
    rng: &mut SweepRng,
) -> Result<DimensionSet> {
    let skips: Vec<Scalar> = spec
        .skips
        .iter()
        .map(|s| parse_scalar(s, cfg.use_bignum))
        .collect();
    let mut elements = Vec::with_capacity(values.len());
    for v in values {
        if skips.iter().any(|s| matches_skip(&v, s)) {
            continue;
        }
        let v = apply_transform_chain(&spec.function_chain, v, rng, cfg.use_bignum)?;
        elements.push(Element::Resolved(v.render()));
    }
    let set = DimensionSet {
        elements,
        chain: Vec::new(),
    };
    ensure_non_empty(spec, &set)?;
    Ok(set)
}

pub fn expand_range(spec: &SetSpec, cfg: &ConfigTable, rng: &mut SweepRng) -> Result<DimensionSet> {
    debug_assert_eq!(spec.loop_type, LoopType::Range);
    let values = linear_values(spec, cfg)?;
    finish_numeric(spec, values, cfg, rng)
}

pub fn expand_exprange(
    spec: &SetSpec,
    cfg: &ConfigTable,
    rng: &mut SweepRng,
) -> Result<DimensionSet> {
    debug_assert_eq!(spec.loop_type, LoopType::ExpRange);
    let values = exponential_values(spec, cfg)?;
    finish_numeric(spec, values, cfg, rng)
}

pub fn expand_set(spec: &SetSpec, cfg: &ConfigTable, rng: &mut SweepRng) -> Result<DimensionSet> {
    match spec.loop_type {
        LoopType::List => expand_list(spec, cfg, rng),
        LoopType::Range => expand_range(spec, cfg, rng),
        LoopType::ExpRange => expand_exprange(spec, cfg, rng),
    }
}

/// Fully expanded sweep, ready to be enumerated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sweep {
    pub sets: Vec<DimensionSet>,
    pub total: u64,
}

impl Sweep {
    /// Expands every set in declaration order and checks that positional
    /// wildcards only look back at earlier dimensions.
    pub fn build(spec: &ParameterSpec, cfg: &ConfigTable, rng: &mut SweepRng) -> Result<Sweep> {
        let mut sets = Vec::with_capacity(spec.sets.len());
        let mut total: u64 = 1;
        for (i, set_spec) in spec.sets.iter().enumerate() {
            let dimension = i + 1;
            let set = expand_set(set_spec, cfg, rng)?;
            for element in &set.elements {
                if let Element::Deferred(raw) = element {
                    if let Some(bad) = positional_refs(raw)
                        .into_iter()
                        .find(|r| *r == 0 || *r >= dimension)
                    {
                        return Err(syntax(
                            set_spec,
                            format!(
                                "wildcard ${{{bad}}} in set {dimension} must refer to an earlier set"
                            ),
                        ));
                    }
                }
            }
            total = total
                .checked_mul(set.size() as u64)
                .ok_or_else(|| Error::Computation("sweep size overflows".into()))?;
            sets.push(set);
        }
        Ok(Sweep { sets, total })
    }

    pub fn dimensions(&self) -> usize {
        self.sets.len()
    }

    pub fn points<'a>(&'a self, cfg: &'a ConfigTable, rng: &'a mut SweepRng) -> Points<'a> {
        Points {
            sweep: self,
            cfg,
            rng,
            counters: vec![0; self.sets.len()],
            next: 0,
        }
    }
}

/// Lazy iterator over the sweep points in index order.
pub struct Points<'a> {
    sweep: &'a Sweep,
    cfg: &'a ConfigTable,
    rng: &'a mut SweepRng,
    counters: Vec<usize>,
    next: u64,
}

impl Points<'_> {
    fn resolve(&mut self, label: &str) -> Result<Vec<String>> {
        let mut coordinates: Vec<String> = Vec::with_capacity(self.sweep.sets.len());
        for (set, &k) in self.sweep.sets.iter().zip(&self.counters) {
            let value = match &set.elements[k] {
                Element::Resolved(v) => v.clone(),
                Element::Deferred(raw) => {
                    let ctx = SubstitutionContext::new(
                        &coordinates,
                        Some(label),
                        &self.cfg.job_template_wildcard,
                    );
                    let text = substitute(raw, &ctx);
                    if set.chain.is_empty() {
                        text
                    } else {
                        let v = parse_scalar(&text, self.cfg.use_bignum);
                        apply_transform_chain(&set.chain, v, self.rng, self.cfg.use_bignum)?
                            .render()
                    }
                }
            };
            coordinates.push(value);
        }
        Ok(coordinates)
    }

    fn advance(&mut self) {
        for (counter, set) in self.counters.iter_mut().zip(&self.sweep.sets).rev() {
            *counter += 1;
            if *counter < set.size() {
                return;
            }
            *counter = 0;
        }
    }
}

impl Iterator for Points<'_> {
    type Item = Result<SweepPoint>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.sweep.total {
            return None;
        }
        let index = self.next;
        let label = index_label(index, self.sweep.total);
        let point = self.resolve(&label).map(|coordinates| SweepPoint {
            index,
            label,
            coordinates,
        });
        self.next += 1;
        self.advance();
        Some(point)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.sweep.total - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Points<'_> {}

/// Eager convenience wrapper around [`Sweep::build`] and [`Sweep::points`].
pub fn enumerate(spec: &ParameterSpec, cfg: &ConfigTable, rng: &mut SweepRng) -> Result<Vec<SweepPoint>> {
    let sweep = Sweep::build(spec, cfg, rng)?;
    let points = sweep.points(cfg, rng).collect();
    points
}
