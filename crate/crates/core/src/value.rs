//! Sweep values: classification of raw tokens, exact rendering, and the
//! library of single-argument transforms usable in `FUNCTION=`.

use std::fmt;
use std::num::NonZeroU64;
use std::str::FromStr;

use bigdecimal::num_bigint::{BigInt, Sign};
use bigdecimal::{BigDecimal, RoundingMode, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Significant digits kept for results of floating-point transforms and of
/// inexact divisions.
pub const FLOAT_DIGITS: u64 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NumKind {
    Integer,
    BigNum,
    Decimal,
    Scientific,
}

impl NumKind {
    /// Kind of the result of arithmetic mixing `self` and `other`.
    pub fn widen(self, other: NumKind) -> NumKind {
        self.max(other)
    }

    fn is_integral(self) -> bool {
        matches!(self, NumKind::Integer | NumKind::BigNum)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarKind {
    Integer,
    Decimal,
    Scientific,
    Character,
    BigNum,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scalar {
    Number { kind: NumKind, value: BigDecimal },
    Character(char),
    Text(String),
}

impl Scalar {
    pub fn number(kind: NumKind, value: BigDecimal) -> Self {
        Scalar::Number { kind, value }
    }

    pub fn integer(value: i64) -> Self {
        Scalar::number(NumKind::Integer, BigDecimal::from(value))
    }

    /// Integer-valued result, promoted to bignum when it outgrows `i64`.
    fn integral(value: BigDecimal, bignum: bool) -> Self {
        let kind = if bignum || value.to_i64().is_none() {
            NumKind::BigNum
        } else {
            NumKind::Integer
        };
        Scalar::number(kind, value)
    }

    pub fn kind(&self) -> ScalarKind {
        match self {
            Scalar::Number { kind, .. } => match kind {
                NumKind::Integer => ScalarKind::Integer,
                NumKind::BigNum => ScalarKind::BigNum,
                NumKind::Decimal => ScalarKind::Decimal,
                NumKind::Scientific => ScalarKind::Scientific,
            },
            Scalar::Character(_) => ScalarKind::Character,
            Scalar::Text(_) => ScalarKind::Text,
        }
    }

    pub fn as_number(&self) -> Option<(NumKind, &BigDecimal)> {
        match self {
            Scalar::Number { kind, value } => Some((*kind, value)),
            _ => None,
        }
    }

    pub fn render(&self) -> String {
        render_scalar(self)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_scalar(self))
    }
}

fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn strip_sign(s: &str) -> &str {
    s.strip_prefix(['+', '-']).unwrap_or(s)
}

fn is_integer_token(s: &str) -> bool {
    is_digits(strip_sign(s))
}

fn is_decimal_token(s: &str) -> bool {
    match strip_sign(s).split_once('.') {
        Some((int, frac)) => {
            (is_digits(int) && (frac.is_empty() || is_digits(frac)))
                || (int.is_empty() && is_digits(frac))
        }
        None => false,
    }
}

fn is_scientific_token(s: &str) -> bool {
    let Some(pos) = s.find(['e', 'E']) else {
        return false;
    };
    let (mantissa, exponent) = (&s[..pos], &s[pos + 1..]);
    (is_integer_token(mantissa) || is_decimal_token(mantissa)) && is_integer_token(exponent)
}

/// Classifies a raw token as integer, decimal, scientific, single character
/// or free text, in that order of precedence.
///
/// Without `use_bignum`, integers that do not fit a 64-bit signed integer are
/// held as double-precision values, like any interpreter without a bignum
/// package would.
pub fn parse_scalar(token: &str, use_bignum: bool) -> Scalar {
    if is_integer_token(token) {
        let value = BigDecimal::from_str(token).expect("integer token");
        if use_bignum {
            return Scalar::number(NumKind::BigNum, value);
        }
        if value.to_i64().is_some() {
            return Scalar::number(NumKind::Integer, value);
        }
        let collapsed: f64 = token.parse().expect("integer token");
        return Scalar::number(NumKind::Scientific, f64_to_decimal(collapsed));
    }
    if is_decimal_token(token) {
        let value = BigDecimal::from_str(token).expect("decimal token");
        return Scalar::number(NumKind::Decimal, value);
    }
    if is_scientific_token(token) {
        let value = BigDecimal::from_str(token).expect("scientific token");
        return Scalar::number(NumKind::Scientific, value);
    }
    let mut chars = token.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Scalar::Character(c),
        _ => Scalar::Text(token.to_string()),
    }
}

pub fn render_scalar(v: &Scalar) -> String {
    match v {
        Scalar::Number { kind, value } => match kind {
            NumKind::Integer | NumKind::BigNum | NumKind::Decimal => plain_string(value),
            NumKind::Scientific => format_general(value, FLOAT_DIGITS as usize),
        },
        Scalar::Character(c) => c.to_string(),
        Scalar::Text(s) => s.clone(),
    }
}

/// Decimal digits of `|n|` and the sign.
fn digits_of(n: &BigInt) -> (bool, String) {
    let negative = n.sign() == Sign::Minus;
    let digits = n.magnitude().to_string();
    (negative, digits)
}

/// Positional notation without exponent and without trailing fractional
/// zeros.
pub fn plain_string(value: &BigDecimal) -> String {
    if value.is_zero() {
        return "0".into();
    }
    let (mantissa, scale) = value.normalized().into_bigint_and_exponent();
    let (negative, digits) = digits_of(&mantissa);
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if scale <= 0 {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', (-scale) as usize));
    } else {
        let scale = scale as usize;
        if digits.len() > scale {
            let (int, frac) = digits.split_at(digits.len() - scale);
            out.push_str(int);
            out.push('.');
            out.push_str(frac);
        } else {
            out.push_str("0.");
            out.extend(std::iter::repeat_n('0', scale - digits.len()));
            out.push_str(&digits);
        }
    }
    out
}

/// `printf("%.<precision>g")` formatting of an exact decimal value.
pub fn format_general(value: &BigDecimal, precision: usize) -> String {
    if value.is_zero() {
        return "0".into();
    }
    let precision = precision.max(1);
    let rounded = round_significant(value, precision as u64);
    let (mantissa, scale) = rounded.normalized().into_bigint_and_exponent();
    let (negative, digits) = digits_of(&mantissa);
    // decimal exponent of the leading digit
    let exp = digits.len() as i64 - 1 - scale;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exp < -4 || exp >= precision as i64 {
        out.push_str(&digits[..1]);
        if digits.len() > 1 {
            out.push('.');
            out.push_str(&digits[1..]);
        }
        out.push('e');
        out.push(if exp < 0 { '-' } else { '+' });
        out.push_str(&format!("{:02}", exp.abs()));
    } else {
        out.push_str(&plain_string(&rounded.abs()));
    }
    out
}

/// Rounds half away from zero to `digits` significant digits.
pub fn round_significant(value: &BigDecimal, digits: u64) -> BigDecimal {
    if value.is_zero() {
        return BigDecimal::zero();
    }
    let prec = NonZeroU64::new(digits.max(1)).expect("non-zero precision");
    value.with_precision_round(prec, RoundingMode::HalfUp)
}

/// Exact decimal value of the shortest representation of `x`, rounded to
/// [`FLOAT_DIGITS`] significant digits.
pub fn f64_to_decimal(x: f64) -> BigDecimal {
    let shortest = BigDecimal::from_str(&format!("{x:e}")).expect("finite float");
    round_significant(&shortest, FLOAT_DIGITS)
}

pub fn decimal_to_f64(value: &BigDecimal) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// The process-wide random stream used by `rand` and `srand`.
#[derive(Debug, Clone)]
pub struct SweepRng {
    inner: ChaCha8Rng,
}

impl SweepRng {
    /// Seeded stream when `seed` is given, entropy-seeded otherwise.
    pub fn new(seed: Option<u64>) -> Self {
        let inner = match seed {
            Some(seed) => ChaCha8Rng::seed_from_u64(seed),
            None => ChaCha8Rng::from_os_rng(),
        };
        SweepRng { inner }
    }

    pub fn reseed(&mut self, seed: u64) {
        self.inner = ChaCha8Rng::seed_from_u64(seed);
    }

    /// Uniform draw in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn below(&mut self, bound: u64) -> u64 {
        self.inner.random_range(0..bound.max(1))
    }
}

/// One named single-argument transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transform {
    Abs,
    Atan2,
    Cos,
    Exp,
    Hex,
    Int,
    Log,
    Oct,
    Rand,
    Sin,
    Sqrt,
    Srand,
    Chomp,
    Chop,
    Chr,
    Lc,
    Lcfirst,
    Length,
    Ord,
    Reverse,
    Uc,
    Ucfirst,
}

impl Transform {
    pub const ALL: [Transform; 22] = [
        Transform::Abs,
        Transform::Atan2,
        Transform::Cos,
        Transform::Exp,
        Transform::Hex,
        Transform::Int,
        Transform::Log,
        Transform::Oct,
        Transform::Rand,
        Transform::Sin,
        Transform::Sqrt,
        Transform::Srand,
        Transform::Chomp,
        Transform::Chop,
        Transform::Chr,
        Transform::Lc,
        Transform::Lcfirst,
        Transform::Length,
        Transform::Ord,
        Transform::Reverse,
        Transform::Uc,
        Transform::Ucfirst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Transform::Abs => "abs",
            Transform::Atan2 => "atan2",
            Transform::Cos => "cos",
            Transform::Exp => "exp",
            Transform::Hex => "hex",
            Transform::Int => "int",
            Transform::Log => "log",
            Transform::Oct => "oct",
            Transform::Rand => "rand",
            Transform::Sin => "sin",
            Transform::Sqrt => "sqrt",
            Transform::Srand => "srand",
            Transform::Chomp => "chomp",
            Transform::Chop => "chop",
            Transform::Chr => "chr",
            Transform::Lc => "lc",
            Transform::Lcfirst => "lcfirst",
            Transform::Length => "length",
            Transform::Ord => "ord",
            Transform::Reverse => "reverse",
            Transform::Uc => "uc",
            Transform::Ucfirst => "ucfirst",
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Transform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "crypt" {
            return Err("function `crypt` is not supported: it takes two arguments".into());
        }
        Transform::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown function `{s}`"))
    }
}

/// Applies `chain` right to left: `[int, rand]` computes `int(rand(v))`.
pub fn apply_transform_chain(
    chain: &[Transform],
    v: Scalar,
    rng: &mut SweepRng,
    use_bignum: bool,
) -> Result<Scalar> {
    chain
        .iter()
        .rev()
        .try_fold(v, |acc, t| apply_transform(*t, acc, rng, use_bignum))
}

fn numeric_arg(t: Transform, v: &Scalar) -> Result<(NumKind, BigDecimal)> {
    match v {
        Scalar::Number { kind, value } => Ok((*kind, value.clone())),
        other => match parse_scalar(&other.render(), true) {
            Scalar::Number { kind, value } => Ok((kind, value)),
            _ => Err(Error::Computation(format!(
                "`{t}` expects a numeric argument, got `{}`",
                other.render()
            ))),
        },
    }
}

fn float_result(t: Transform, x: f64) -> Result<Scalar> {
    if x.is_finite() {
        Ok(Scalar::number(NumKind::Scientific, f64_to_decimal(x)))
    } else {
        Err(Error::Computation(format!("`{t}` produced a non-finite result")))
    }
}

fn parse_radix(t: Transform, text: &str, radix: u32, use_bignum: bool) -> Result<Scalar> {
    let digits: String = text.chars().filter(|c| *c != '_').collect();
    BigInt::parse_bytes(digits.as_bytes(), radix)
        .filter(|_| !digits.is_empty() && !digits.starts_with(['+', '-']))
        .map(|n| Scalar::integral(BigDecimal::from(n), use_bignum))
        .ok_or_else(|| {
            Error::Computation(format!("`{t}` cannot convert `{text}` in base {radix}"))
        })
}

fn apply_transform(t: Transform, v: Scalar, rng: &mut SweepRng, use_bignum: bool) -> Result<Scalar> {
    let text = || v.render();
    let restring = |s: String| parse_scalar(&s, use_bignum);
    match t {
        Transform::Abs => {
            let (kind, value) = numeric_arg(t, &v)?;
            Ok(Scalar::number(kind, value.abs()))
        }
        Transform::Int => {
            let (kind, value) = numeric_arg(t, &v)?;
            let truncated = value.with_scale_round(0, RoundingMode::Down);
            if kind == NumKind::Scientific && truncated.abs() >= 10u64.pow(15) {
                Ok(Scalar::number(kind, truncated))
            } else {
                Ok(Scalar::integral(truncated, kind == NumKind::BigNum || use_bignum && kind.is_integral()))
            }
        }
        Transform::Cos | Transform::Sin | Transform::Exp | Transform::Atan2 => {
            let x = decimal_to_f64(&numeric_arg(t, &v)?.1);
            let y = match t {
                Transform::Cos => x.cos(),
                Transform::Sin => x.sin(),
                Transform::Exp => x.exp(),
                _ => x.atan2(1.0),
            };
            float_result(t, y)
        }
        Transform::Log => {
            let value = numeric_arg(t, &v)?.1;
            if !value.is_positive() {
                return Err(Error::Computation(format!(
                    "`log` of non-positive value {}",
                    plain_string(&value)
                )));
            }
            float_result(t, decimal_to_f64(&value).ln())
        }
        Transform::Sqrt => {
            let value = numeric_arg(t, &v)?.1;
            if value.is_negative() {
                return Err(Error::Computation(format!(
                    "`sqrt` of negative value {}",
                    plain_string(&value)
                )));
            }
            float_result(t, decimal_to_f64(&value).sqrt())
        }
        Transform::Rand => {
            let mut bound = decimal_to_f64(&numeric_arg(t, &v)?.1);
            if bound == 0.0 {
                bound = 1.0;
            }
            float_result(t, rng.unit() * bound)
        }
        Transform::Srand => {
            let value = numeric_arg(t, &v)?.1;
            let seed = value
                .with_scale_round(0, RoundingMode::Down)
                .abs()
                .to_u64()
                .ok_or_else(|| Error::Computation("`srand` seed out of range".into()))?;
            rng.reseed(seed);
            Ok(v)
        }
        Transform::Hex => {
            let s = text();
            let body = s
                .strip_prefix("0x")
                .or_else(|| s.strip_prefix("0X"))
                .unwrap_or(&s);
            parse_radix(t, body, 16, use_bignum)
        }
        Transform::Oct => {
            let s = text();
            let lower = s.to_ascii_lowercase();
            if let Some(body) = lower.strip_prefix("0x") {
                parse_radix(t, body, 16, use_bignum)
            } else if let Some(body) = lower.strip_prefix("0b") {
                parse_radix(t, body, 2, use_bignum)
            } else {
                let body = lower.strip_prefix("0o").unwrap_or(&lower);
                parse_radix(t, body, 8, use_bignum)
            }
        }
        Transform::Chr => {
            let value = numeric_arg(t, &v)?.1;
            value
                .with_scale_round(0, RoundingMode::Down)
                .to_u32()
                .and_then(char::from_u32)
                .map(|c| restring(c.to_string()))
                .ok_or_else(|| {
                    Error::Computation(format!("`chr` of invalid code point {}", plain_string(&value)))
                })
        }
        Transform::Ord => Ok(Scalar::integer(
            text().chars().next().map_or(0, |c| c as i64),
        )),
        Transform::Length => Ok(Scalar::integer(text().chars().count() as i64)),
        Transform::Reverse => Ok(restring(text().chars().rev().collect())),
        Transform::Uc => Ok(restring(text().to_uppercase())),
        Transform::Lc => Ok(restring(text().to_lowercase())),
        Transform::Ucfirst => Ok(restring(map_first(&text(), |c| c.to_uppercase().collect()))),
        Transform::Lcfirst => Ok(restring(map_first(&text(), |c| c.to_lowercase().collect()))),
        Transform::Chomp => {
            let s = text();
            Ok(restring(s.strip_suffix('\n').unwrap_or(&s).to_string()))
        }
        Transform::Chop => {
            let mut s = text();
            s.pop();
            Ok(restring(s))
        }
    }
}

fn map_first(s: &str, f: impl Fn(char) -> String) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => f(c) + chars.as_str(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dec(s: &str) -> BigDecimal {
        BigDecimal::from_str(s).unwrap()
    }

    fn seeded() -> SweepRng {
        SweepRng::new(Some(7))
    }

    fn apply(names: &[&str], v: Scalar) -> Result<Scalar> {
        let chain: Vec<Transform> = names.iter().map(|n| n.parse().unwrap()).collect();
        apply_transform_chain(&chain, v, &mut seeded(), false)
    }

    #[test]
    fn classification() {
        assert_eq!(parse_scalar("-4", false), Scalar::integer(-4));
        assert_eq!(parse_scalar("54764563", false), Scalar::integer(54764563));
        assert_eq!(
            parse_scalar("567884.2234", false),
            Scalar::number(NumKind::Decimal, dec("567884.2234"))
        );
        assert_eq!(
            parse_scalar("1.4E-12", false),
            Scalar::number(NumKind::Scientific, dec("1.4e-12"))
        );
        assert_eq!(parse_scalar("1E3", false).kind(), ScalarKind::Scientific);
        assert_eq!(parse_scalar("j", false), Scalar::Character('j'));
        assert_eq!(parse_scalar("z", false), Scalar::Character('z'));
        assert_eq!(parse_scalar("7", false).kind(), ScalarKind::Integer);
        assert_eq!(parse_scalar("hello", false), Scalar::Text("hello".into()));
        assert_eq!(parse_scalar("\"3\"", false).kind(), ScalarKind::Text);
        assert_eq!(parse_scalar("1.2.3", false).kind(), ScalarKind::Text);
        assert_eq!(parse_scalar("e5", false).kind(), ScalarKind::Text);
        assert_eq!(parse_scalar(".5", false).kind(), ScalarKind::Decimal);
    }

    #[test]
    fn bignum_keeps_every_digit() {
        let token = "123456789012345678911234567892123456789312345678941";
        let v = parse_scalar(token, true);
        assert_eq!(v.kind(), ScalarKind::BigNum);
        assert_eq!(v.render(), token);
    }

    #[test]
    fn oversized_integer_without_bignum_loses_precision() {
        let token = "123456789012345678911234567892123456789312345678941";
        let v = parse_scalar(token, false);
        assert_eq!(v.kind(), ScalarKind::Scientific);
        assert_eq!(v.render(), "1.23456789012346e+50");
    }

    #[test]
    fn rendering() {
        assert_eq!(parse_scalar("1000", false).render(), "1000");
        assert_eq!(parse_scalar("1E3", false).render(), "1000");
        assert_eq!(parse_scalar("1.4E-12", false).render(), "1.4e-12");
        assert_eq!(Scalar::number(NumKind::Decimal, dec("0.5")).render(), "0.5");
        assert_eq!(Scalar::number(NumKind::Decimal, dec("2.500")).render(), "2.5");
        assert_eq!(Scalar::number(NumKind::Decimal, dec("0.001")).render(), "0.001");
        assert_eq!(Scalar::number(NumKind::Integer, dec("-1200")).render(), "-1200");
        assert_eq!(parse_scalar("\"Hello world!\"", false).render(), "\"Hello world!\"");
    }

    #[test]
    fn general_format_matches_printf() {
        // expected strings from C printf("%.15g")
        let cases = [
            ("0.1", "0.1"),
            ("100000", "100000"),
            ("1e15", "1e+15"),
            ("999999999999999", "999999999999999"),
            ("0.0001", "0.0001"),
            ("0.00001", "1e-05"),
            ("-2.5e-7", "-2.5e-07"),
            ("3.14159265358979323846", "3.14159265358979"),
            ("9.9999999999999999", "10"),
            ("1.23456789012345678e300", "1.23456789012346e+300"),
        ];
        for (input, expected) in cases {
            assert_eq!(format_general(&dec(input), 15), expected, "{input}");
        }
    }

    #[test]
    fn transforms() {
        assert_eq!(apply(&["ucfirst"], Scalar::Text("hello".into())).unwrap().render(), "Hello");
        assert_eq!(apply(&["abs"], Scalar::integer(-4)).unwrap(), Scalar::integer(4));
        assert_eq!(apply(&["reverse"], Scalar::Text("abc".into())).unwrap().render(), "cba");
        assert_eq!(apply(&["uc"], Scalar::Text("abc".into())).unwrap().render(), "ABC");
        assert_eq!(apply(&["lc"], Scalar::Text("ABC".into())).unwrap().render(), "abc");
        assert_eq!(apply(&["lcfirst"], Scalar::Text("ABC".into())).unwrap().render(), "aBC");
        assert_eq!(apply(&["length"], Scalar::Text("abcd".into())).unwrap(), Scalar::integer(4));
        assert_eq!(apply(&["ord"], Scalar::Character('A')).unwrap(), Scalar::integer(65));
        assert_eq!(apply(&["chr"], Scalar::integer(97)).unwrap(), Scalar::Character('a'));
        assert_eq!(apply(&["hex"], Scalar::Text("ff".into())).unwrap(), Scalar::integer(255));
        assert_eq!(apply(&["hex"], Scalar::Text("0x1F".into())).unwrap(), Scalar::integer(31));
        assert_eq!(apply(&["oct"], Scalar::integer(755)).unwrap(), Scalar::integer(493));
        assert_eq!(apply(&["oct"], Scalar::Text("0b101".into())).unwrap(), Scalar::integer(5));
        assert_eq!(apply(&["chop"], Scalar::Text("abc".into())).unwrap().render(), "ab");
        assert_eq!(apply(&["chomp"], Scalar::Text("ab\n".into())).unwrap().render(), "ab");
        assert_eq!(apply(&["chomp"], Scalar::Text("ab".into())).unwrap().render(), "ab");
        assert_eq!(apply(&["int"], parse_scalar("-3.7", false)).unwrap(), Scalar::integer(-3));
        assert_eq!(apply(&["sqrt"], Scalar::integer(16)).unwrap().render(), "4");
        assert_eq!(apply(&["exp"], Scalar::integer(0)).unwrap().render(), "1");
        assert_eq!(apply(&["log"], Scalar::integer(1)).unwrap().render(), "0");
        assert_eq!(apply(&["cos"], Scalar::integer(0)).unwrap().render(), "1");
        assert_eq!(apply(&["sin"], Scalar::integer(0)).unwrap().render(), "0");
        assert_eq!(
            apply(&["atan2"], Scalar::integer(1)).unwrap().render(),
            "0.785398163397448"
        );
        assert_eq!(apply(&["exp"], Scalar::integer(1)).unwrap().render(), "2.71828182845905");
    }

    #[test]
    fn chain_runs_right_to_left() {
        // length(uc(x)) and uc(length(x)) differ only in type, reverse(ucfirst) does not commute
        let v = Scalar::Text("abc".into());
        assert_eq!(apply(&["ucfirst", "reverse"], v.clone()).unwrap().render(), "Cba");
        assert_eq!(apply(&["reverse", "ucfirst"], v).unwrap().render(), "cbA");
    }

    #[test]
    fn int_rand_stays_in_bounds() {
        let mut rng = seeded();
        let chain = [Transform::Int, Transform::Rand];
        for _ in 0..1000 {
            let v = apply_transform_chain(&chain, Scalar::integer(1000), &mut rng, false).unwrap();
            let (kind, value) = v.as_number().unwrap();
            assert_eq!(kind, NumKind::Integer);
            let k = value.to_i64().unwrap();
            assert!((0..1000).contains(&k), "{k}");
        }
    }

    #[test]
    fn srand_reseeds_the_stream() {
        let chain = [Transform::Rand];
        let mut a = SweepRng::new(Some(1));
        let mut b = SweepRng::new(Some(2));
        apply_transform_chain(&[Transform::Srand], Scalar::integer(42), &mut a, false).unwrap();
        apply_transform_chain(&[Transform::Srand], Scalar::integer(42), &mut b, false).unwrap();
        let x = apply_transform_chain(&chain, Scalar::integer(1), &mut a, false).unwrap();
        let y = apply_transform_chain(&chain, Scalar::integer(1), &mut b, false).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn domain_errors_are_computation_errors() {
        for (f, v) in [("log", 0), ("log", -1), ("sqrt", -4)] {
            let err = apply(&[f], Scalar::integer(v)).unwrap_err();
            assert_eq!(err.exit_code().code(), 8, "{f}({v})");
        }
        let err = apply(&["sqrt"], Scalar::Text("abc".into())).unwrap_err();
        assert_eq!(err.exit_code().code(), 8);
    }

    #[test]
    fn unsupported_function_names() {
        assert!("crypt".parse::<Transform>().unwrap_err().contains("crypt"));
        assert!("frobnicate".parse::<Transform>().unwrap_err().contains("frobnicate"));
        for t in Transform::ALL {
            assert_eq!(t.name().parse::<Transform>(), Ok(t));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn bignum_digits_round_trip(t in "[1-9][0-9]{0,99}") {
                prop_assert_eq!(parse_scalar(&t, true).render(), t);
            }

            #[test]
            fn numeric_render_round_trips(i in any::<i64>(), frac in 0u32..1_000_000) {
                let int = parse_scalar(&i.to_string(), false);
                prop_assert_eq!(parse_scalar(&int.render(), false), int);
                let d = parse_scalar(&format!("{i}.{frac:06}"), false);
                let again = parse_scalar(&d.render(), false);
                prop_assert_eq!(again.as_number().unwrap().1, d.as_number().unwrap().1);
            }

            #[test]
            fn abs_and_int_identities(i in 0i64..i64::MAX) {
                let v = Scalar::integer(i);
                prop_assert_eq!(apply(&["abs"], v.clone()).unwrap(), v.clone());
                prop_assert_eq!(apply(&["int"], v.clone()).unwrap(), v);
            }
        }
    }
}
