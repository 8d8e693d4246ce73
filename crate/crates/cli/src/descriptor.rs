//! Phantom descriptors.
//!
//! ```text
//! descriptor := preset | mode (';' mode)*
//! preset     := "single" | "four"
//! mode       := m ',' l ':' shape
//! shape      := "expoly" ':' power ':' rate ':' coeffs
//!             | "rational" ':' coeffs ':' coeffs
//! coeffs     := number ('/' number)*            (increasing degree)
//! ```
//!
//! `0,1:expoly:3:1:1` is `r³ e^{-r}` on mode `(0, 1)`;
//! `0,1:rational:1:1/1` is `1 / (1 + r)`.

use subsphere_core::harmonics::HarmonicIndex;
use subsphere_core::phantom::{four_mode, single_mode, PhantomMode, PhantomSpec, RadialShape};

pub fn parse_phantom(text: &str, n: usize) -> Result<PhantomSpec, String> {
    let text = text.trim();
    match text {
        "single" => return single_mode(n).map_err(|e| e.to_string()),
        "four" if n == 3 => return four_mode().map_err(|e| e.to_string()),
        "four" => return Err(format!("preset `four` is defined for n = 3 only (got n = {n})")),
        _ => {}
    }
    let modes = text
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_mode)
        .collect::<Result<Vec<_>, _>>()?;
    if modes.is_empty() {
        return Err("phantom descriptor has no modes".into());
    }
    PhantomSpec::new(n, modes).map_err(|e| format!("phantom: {e}"))
}

pub fn parse_mode(text: &str) -> Result<PhantomMode, String> {
    let bad = |why: &str| format!("malformed phantom mode `{text}`: {why}");
    let mut parts = text.split(':').map(str::trim);
    let index = parts.next().ok_or_else(|| bad("empty"))?;
    let (m, l) = index.split_once(',').ok_or_else(|| bad("index must be `m,l`"))?;
    let m: usize = m.trim().parse().map_err(|_| bad("degree m is not an integer"))?;
    let l: usize = l.trim().parse().map_err(|_| bad("index l is not an integer"))?;
    let kind = parts.next().ok_or_else(|| bad("missing shape"))?;
    let rest: Vec<&str> = parts.collect();
    let shape = match kind {
        "expoly" => {
            let [power, rate, coeffs] = rest[..] else {
                return Err(bad("expoly takes `power:rate:coeffs`"));
            };
            let power: u32 = power.parse().map_err(|_| bad("power is not a non-negative integer"))?;
            let rate = number(rate).ok_or_else(|| bad("rate is not a number"))?;
            let coeffs = numbers(coeffs).ok_or_else(|| bad("bad coefficient list"))?;
            RadialShape::exp_poly(power, &coeffs, rate)
        }
        "rational" => {
            let [numer, denom] = rest[..] else {
                return Err(bad("rational takes `numer:denom`"));
            };
            let numer = numbers(numer).ok_or_else(|| bad("bad numerator coefficients"))?;
            let denom = numbers(denom).ok_or_else(|| bad("bad denominator coefficients"))?;
            RadialShape::rational(&numer, &denom)
        }
        other => return Err(bad(&format!("unknown shape `{other}`"))),
    };
    Ok(PhantomMode { index: HarmonicIndex::new(m, l), shape })
}

fn number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn numbers(s: &str) -> Option<Vec<f64>> {
    s.split('/').map(number).collect()
}

/// The descriptor of one mode; parsing it back gives the same mode exactly.
pub fn format_mode(mode: &PhantomMode) -> String {
    let list = |c: &[f64]| c.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join("/");
    let HarmonicIndex { m, l } = mode.index;
    match &mode.shape {
        RadialShape::ExpPoly { power, coeffs, rate } => format!("{m},{l}:expoly:{power}:{rate:?}:{}", list(coeffs)),
        RadialShape::Rational { numer, denom } => format!("{m},{l}:rational:{}:{}", list(numer), list(denom)),
    }
}

pub fn format_phantom(spec: &PhantomSpec) -> String {
    spec.modes().iter().map(format_mode).collect::<Vec<_>>().join("; ")
}
